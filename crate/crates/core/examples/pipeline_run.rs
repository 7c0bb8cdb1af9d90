//! Full offline run: nine checkpointed stages, then a resume that finds
//! nothing to redo.
use litreview::pipeline::{resume, run_pipeline, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = tempfile::tempdir()?;
    let config = PipelineConfig { output_dir: out.path().to_path_buf(), ..PipelineConfig::mock("Virtual Reality") };
    let manifest = run_pipeline(&config, None)?;
    for s in &manifest.stages {
        println!("{:<10} {:>8.4}s", s.stage, s.wall_time_s);
    }
    let dir = config.run_dir();
    println!("\n{}", std::fs::read_to_string(dir.join("review.tex"))?.lines().take(20).collect::<Vec<_>>().join("\n"));
    print!("\n{}", std::fs::read_to_string(dir.join("metrics.jsonl"))?);

    let again = resume(out.path(), &manifest.run_id, None)?;
    println!("\nresume complete: {}", again.is_complete());
    Ok(())
}
