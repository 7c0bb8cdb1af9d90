//! Configuration, the nine checkpointed stages, resume, and the
//! document-limit sweep.
//!
//! Every stage writes its checkpoint atomically under `<out>/<run_id>/` and
//! records the file digests in `manifest.json`. A stage counts as done only
//! while its checkpoints still match those digests, so resuming re-runs the
//! first stage whose files went missing or changed and everything after it.

pub mod config;
pub mod manifest;
pub mod stages;
pub mod sweep;

use std::path::Path;
use std::time::Instant;

use thiserror::Error;

pub use config::{slug, PipelineConfig, DEFAULT_SWEEP_LIMITS};
pub use manifest::{process_cpu_time_s, sha256_file, RunManifest, Stage, StageRecord, StageStatus, MANIFEST_FILE};
pub use stages::{compute_metrics, stage_files, RunContext};
pub use sweep::{run_limit_sweep, SweepPoint, SweepReport};

use crate::document::DocumentError;
use crate::evaluation::EvalError;
use crate::gateway::GatewayError;
use crate::search::SearchError;
use crate::synthesis::SynthesisError;
use crate::topics::TopicError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no run found at {0}")]
    UnknownRun(String),
    #[error("manifest is corrupt: {0}")]
    ManifestCorrupt(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("stage {stage} failed: {reason}")]
    StageFailed { stage: Stage, reason: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl PipelineError {
    /// 1 for problems found before any stage ran, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::UnknownRun(_) => 1,
            _ => 2,
        }
    }
}

/// Runs pending stages in order, stopping after `until` if given. The
/// manifest is saved after every stage.
pub fn execute(ctx: &RunContext, manifest: &mut RunManifest, until: Option<Stage>) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&ctx.dir)?;
    for stage in Stage::ALL {
        if manifest.record(stage).status != StageStatus::Done {
            let (wall0, cpu0) = (Instant::now(), process_cpu_time_s());
            let result = stages::run_stage(ctx, stage);
            let record = manifest.record_mut(stage);
            record.wall_time_s = wall0.elapsed().as_secs_f64();
            record.cpu_time_s = process_cpu_time_s() - cpu0;
            match result {
                Ok(()) => {
                    record.files.clear();
                    for name in stage_files(stage) {
                        record.files.insert(name.to_string(), sha256_file(&ctx.dir.join(name))?);
                    }
                    record.status = StageStatus::Done;
                    record.error = None;
                    log::info!("stage {stage} done in {:.3}s", record.wall_time_s);
                    manifest.save(&ctx.dir)?;
                }
                Err(e) => {
                    record.status = StageStatus::Failed;
                    record.error = Some(e.to_string());
                    manifest.save(&ctx.dir)?;
                    return Err(PipelineError::StageFailed { stage, reason: e.to_string() });
                }
            }
        } else {
            log::info!("stage {stage} already done");
        }
        if until == Some(stage) {
            break;
        }
    }
    Ok(())
}

/// Validates the configuration and runs the pipeline from scratch in
/// `<output_dir>/<run_id>/`.
pub fn run_pipeline(config: &PipelineConfig, until: Option<Stage>) -> Result<RunManifest, PipelineError> {
    config.validate()?;
    let dir = config.run_dir();
    let ctx = RunContext::new(config, &dir)?;
    let mut manifest = RunManifest::new(config);
    std::fs::create_dir_all(&dir)?;
    manifest.save(&dir)?;
    execute(&ctx, &mut manifest, until)?;
    Ok(manifest)
}

/// Continues the run stored in `<out_dir>/<run_id>/`, skipping stages whose
/// checkpoints still match the manifest.
pub fn resume(out_dir: &Path, run_id: &str, until: Option<Stage>) -> Result<RunManifest, PipelineError> {
    let dir = out_dir.join(run_id);
    let mut manifest = RunManifest::load(&dir)?;
    manifest.config.output_dir = out_dir.to_path_buf();
    manifest.config.validate()?;
    if let Some(stage) = manifest.reset_from_first_invalid(&dir) {
        log::info!("resuming {run_id} at stage {stage}");
    }
    let ctx = RunContext::new(&manifest.config, &dir)?;
    execute(&ctx, &mut manifest, until)?;
    Ok(manifest)
}

/// Recomputes the metrics of a finished run without touching its files.
pub fn evaluate_run(out_dir: &Path, run_id: &str) -> Result<crate::evaluation::MetricsReport, PipelineError> {
    let dir = out_dir.join(run_id);
    let manifest = RunManifest::load(&dir)?;
    if !manifest.verify(Stage::Assemble, &dir) {
        return Err(PipelineError::Checkpoint(format!("run {run_id} has not completed the assemble stage")));
    }
    let ctx = RunContext::new(&manifest.config, &dir)?;
    compute_metrics(&ctx)
}
