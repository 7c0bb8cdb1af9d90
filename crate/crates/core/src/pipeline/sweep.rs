use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::stages::{RETRIEVED_FILE, METRICS_FILE};
use super::{execute, run_pipeline, PipelineConfig, PipelineError, RunContext, RunManifest, Stage, StageStatus};
use crate::document::write_atomic;
use crate::evaluation::MetricsReport;

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";

/// One row of the sweep: the document limit and the metrics of the run
/// that screened that many papers. Metric cells are empty for failed points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub doc_limit: usize,
    /// Papers actually kept; below `doc_limit` when fewer were retrieved.
    pub effective_limit: usize,
    pub clamped: bool,
    pub status: String,
    /// Fastest of the timed repetitions of screening through evaluation.
    pub wall_time_s: Option<f64>,
    pub topic_count: Option<usize>,
    pub coherence: Option<f64>,
    pub rouge_f1: Option<f64>,
    pub cosine: Option<f64>,
    pub fres: Option<f64>,
    pub error: Option<String>,
}

impl SweepPoint {
    /// True when the point ran and all six metrics are present and finite.
    pub fn is_complete(&self) -> bool {
        self.status == "ok"
            && self.topic_count.is_some()
            && [self.wall_time_s, self.coherence, self.rouge_f1, self.cosine, self.fres]
                .iter()
                .all(|v| v.is_some_and(f64::is_finite))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub run_id: String,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &self.points {
            w.serialize(CsvRow::from(p)).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }
}

/// CSV columns: the point without the free-text error.
#[derive(Serialize)]
struct CsvRow {
    doc_limit: usize,
    effective_limit: usize,
    clamped: bool,
    status: String,
    wall_time_s: Option<f64>,
    topic_count: Option<usize>,
    coherence: Option<f64>,
    rouge_f1: Option<f64>,
    cosine: Option<f64>,
    fres: Option<f64>,
}

impl From<&SweepPoint> for CsvRow {
    fn from(p: &SweepPoint) -> Self {
        Self {
            doc_limit: p.doc_limit,
            effective_limit: p.effective_limit,
            clamped: p.clamped,
            status: p.status.clone(),
            wall_time_s: p.wall_time_s,
            topic_count: p.topic_count,
            coherence: p.coherence,
            rouge_f1: p.rouge_f1,
            cosine: p.cosine,
            fres: p.fres,
        }
    }
}

/// Retrieves once, then re-screens and runs the rest of the pipeline for
/// each limit. Points run one after another so their timings compare; a
/// failing point is recorded and the sweep moves on. Writes `sweep.csv`
/// and `sweep.json` in the base run directory.
pub fn run_limit_sweep(config: &PipelineConfig, limits: &[usize]) -> Result<SweepReport, PipelineError> {
    if limits.is_empty() || limits.contains(&0) || limits.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PipelineError::Config("limits must be a strictly increasing list of positive sizes".into()));
    }
    let largest = *limits.last().expect("non-empty");
    let base_cfg = PipelineConfig {
        top_k: largest.min(config.max_results),
        sweep_limits: limits.to_vec(),
        ..config.clone()
    };
    let base = run_pipeline(&base_cfg, Some(Stage::Fetch))?;
    let base_dir = base_cfg.run_dir();
    let retrieved = super::stages::read_jsonl::<crate::search::PaperRecord>(&base_dir.join(RETRIEVED_FILE))?.len();

    let mut points = Vec::with_capacity(limits.len());
    for &limit in limits {
        let effective = limit.min(retrieved).min(config.max_results).max(1);
        let point = match run_point(&base_cfg, &base, &base_dir, limit, effective) {
            Ok((wall, metrics)) => {
                let get = |stage: &str, metric: &str| metrics.get(stage, metric);
                SweepPoint {
                    doc_limit: limit,
                    effective_limit: effective,
                    clamped: effective < limit,
                    status: "ok".into(),
                    wall_time_s: Some(wall),
                    topic_count: get("Topics", "topic_count").map(|v| v as usize),
                    coherence: get("Topics", "coherence_cv"),
                    rouge_f1: get("GPTSLR", "rouge1_f1"),
                    cosine: get("GPTSLR", "cosine"),
                    fres: get("GPTSLR", "fres"),
                    error: None,
                }
            }
            Err(e) => {
                log::warn!("sweep point {limit} failed: {e}");
                SweepPoint {
                    doc_limit: limit,
                    effective_limit: effective,
                    clamped: effective < limit,
                    status: "failed".into(),
                    wall_time_s: None,
                    topic_count: None,
                    coherence: None,
                    rouge_f1: None,
                    cosine: None,
                    fres: None,
                    error: Some(e.to_string()),
                }
            }
        };
        points.push(point);
    }
    let report = SweepReport { run_id: base.run_id.clone(), points };
    write_atomic(&base_dir.join(SWEEP_CSV), report.to_csv().as_bytes())?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_atomic(&base_dir.join(SWEEP_JSON), json.as_bytes())?;
    Ok(report)
}

/// Runs screening through evaluation at one limit `repeats` times in
/// `<base>/sweep/k<limit>/`; returns the fastest wall time and the metrics.
fn run_point(
    base_cfg: &PipelineConfig,
    base: &RunManifest,
    base_dir: &Path,
    limit: usize,
    effective: usize,
) -> Result<(f64, MetricsReport), PipelineError> {
    let cfg = PipelineConfig { top_k: effective, ..base_cfg.clone() };
    let dir = base_dir.join("sweep").join(format!("k{limit}"));
    std::fs::create_dir_all(&dir)?;
    let shared = [Stage::Expand, Stage::Query, Stage::Fetch];
    for stage in shared {
        for name in super::stage_files(stage) {
            std::fs::copy(base_dir.join(name), dir.join(name))?;
        }
    }
    let ctx = RunContext::new(&cfg, &dir)?;
    let mut best = f64::INFINITY;
    for _ in 0..base_cfg.sweep_repeats.max(1) {
        let mut manifest = RunManifest::new(&cfg);
        for stage in shared {
            *manifest.record_mut(stage) = base.record(stage).clone();
        }
        let start = Instant::now();
        execute(&ctx, &mut manifest, None)?;
        best = best.min(start.elapsed().as_secs_f64());
        debug_assert!(manifest.stages.iter().all(|s| s.status == StageStatus::Done));
    }
    let metrics = MetricsReport::from_jsonl(&std::fs::read_to_string(dir.join(METRICS_FILE))?)
        .map_err(|e| PipelineError::Checkpoint(e.to_string()))?;
    Ok((best, metrics))
}
