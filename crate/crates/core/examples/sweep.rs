//! Document-limit sweep over a shared retrieved corpus.
use litreview::pipeline::{run_limit_sweep, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = tempfile::tempdir()?;
    let config = PipelineConfig {
        output_dir: out.path().to_path_buf(),
        sweep_repeats: 1,
        ..PipelineConfig::mock("Large Language Models")
    };
    let report = run_limit_sweep(&config, &[10, 20, 40, 80])?;
    print!("{}", report.to_csv());
    Ok(())
}
