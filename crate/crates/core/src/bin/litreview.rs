use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use litreview::gateway::BackendKind;
use litreview::pipeline::{self, PipelineConfig, PipelineError, RunManifest, Stage};

#[derive(Parser)]
#[command(name = "litreview", version, about = "Automated systematic literature review pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Research topic, e.g. "Explainable Artificial Intelligence".
    #[arg(long)]
    topic: Option<String>,
    /// TOML file with any PipelineConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Offline run: mock language model, bundled feeds, hashing embedder.
    #[arg(long)]
    mock: bool,
    /// gpt-3.5-like, gpt-4o-like, or a model id.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    max_results: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
    /// Seed for the language model and clustering.
    #[arg(long)]
    seed: Option<u64>,
    /// Bundled feed for mock runs (xai, vr, blockchain, llm, nmt).
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig, PipelineError> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::from_toml_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(t) = &self.topic {
            c.topic = t.clone();
        }
        c.backend = if self.mock { BackendKind::Mock } else if self.config.is_some() { c.backend } else { BackendKind::Remote };
        if let Some(m) = &self.model {
            c.model_preset = m.clone();
        }
        if let Some(n) = self.max_results {
            c.max_results = n;
        }
        if let Some(k) = self.top_k {
            c.top_k = k;
        }
        if let Some(s) = self.seed {
            c.llm_seed = s;
            c.cluster_seed = s;
        }
        if self.fixture.is_some() {
            c.fixture = self.fixture.clone();
        }
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline for a topic.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Stop after this stage.
        #[arg(long)]
        until: Option<String>,
    },
    /// Continue a run, re-running stages whose checkpoints changed.
    Resume {
        run_id: String,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        until: Option<String>,
    },
    /// Re-run screening onward at several document limits.
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        /// Comma-separated limits, e.g. 50,100,200,400.
        #[arg(long, value_delimiter = ',')]
        limits: Option<Vec<usize>>,
    },
    /// Recompute and print the metrics of a finished run.
    Eval {
        #[arg(long = "run")]
        run_id: String,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

fn parse_stage(s: &Option<String>) -> Result<Option<Stage>, PipelineError> {
    s.as_deref().map(str::parse).transpose()
}

fn summary(m: &RunManifest) {
    println!("run {}", m.run_id);
    for r in &m.stages {
        println!("  {:<10} {:<8} {:>8.3}s", r.stage.as_str(), format!("{:?}", r.status).to_lowercase(), r.wall_time_s);
    }
    println!("  total wall {:.3}s, cpu {:.3}s", m.total_wall_time_s(), m.total_cpu_time_s());
}

fn main_inner(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Run { args, until } => {
            let m = pipeline::run_pipeline(&args.config()?, parse_stage(&until)?)?;
            summary(&m);
        }
        Command::Resume { run_id, out, until } => {
            let m = pipeline::resume(&out, &run_id, parse_stage(&until)?)?;
            summary(&m);
        }
        Command::Sweep { args, limits } => {
            let mut c = args.config()?;
            if let Some(l) = limits {
                c.sweep_limits = l;
            }
            c.validate()?;
            let report = pipeline::run_limit_sweep(&c, &c.sweep_limits.clone())?;
            print!("{}", report.to_csv());
        }
        Command::Eval { run_id, out } => {
            let report = pipeline::evaluate_run(&out, &run_id)?;
            for r in &report.records {
                println!("{:<8} {:<20} {:.4}", r.stage, r.metric, r.value);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
