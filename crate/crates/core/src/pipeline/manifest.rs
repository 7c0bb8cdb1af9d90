use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineConfig, PipelineError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Expand,
    Query,
    Fetch,
    Screen,
    Cluster,
    Summarize,
    Postedit,
    Assemble,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Expand,
        Stage::Query,
        Stage::Fetch,
        Stage::Screen,
        Stage::Cluster,
        Stage::Summarize,
        Stage::Postedit,
        Stage::Assemble,
        Stage::Evaluate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Expand => "expand",
            Stage::Query => "query",
            Stage::Fetch => "fetch",
            Stage::Screen => "screen",
            Stage::Cluster => "cluster",
            Stage::Summarize => "summarize",
            Stage::Postedit => "postedit",
            Stage::Assemble => "assemble",
            Stage::Evaluate => "evaluate",
        }
    }

    pub fn index(self) -> usize {
        Stage::ALL.iter().position(|s| *s == self).expect("listed")
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| PipelineError::Config(format!("unknown stage {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub wall_time_s: f64,
    pub cpu_time_s: f64,
    /// Checkpoint file name to SHA-256 hex digest.
    pub files: BTreeMap<String, String>,
    pub error: Option<String>,
}

impl StageRecord {
    fn pending(stage: Stage) -> Self {
        Self { stage, status: StageStatus::Pending, wall_time_s: 0.0, cpu_time_s: 0.0, files: BTreeMap::new(), error: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config: PipelineConfig,
    pub stages: Vec<StageRecord>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}

impl RunManifest {
    pub fn new(config: &PipelineConfig) -> Self {
        Self { run_id: config.run_id(), config: config.clone(), stages: Stage::ALL.map(StageRecord::pending).to_vec() }
    }

    pub fn record(&self, stage: Stage) -> &StageRecord {
        &self.stages[stage.index()]
    }

    pub fn record_mut(&mut self, stage: Stage) -> &mut StageRecord {
        &mut self.stages[stage.index()]
    }

    pub fn is_complete(&self) -> bool {
        self.stages.iter().all(|s| s.status == StageStatus::Done)
    }

    pub fn total_wall_time_s(&self) -> f64 {
        self.stages.iter().map(|s| s.wall_time_s).sum()
    }

    pub fn total_cpu_time_s(&self) -> f64 {
        self.stages.iter().map(|s| s.cpu_time_s).sum()
    }

    /// True when the stage is done and every checkpoint it lists still has
    /// the recorded digest.
    pub fn verify(&self, stage: Stage, dir: &Path) -> bool {
        let r = self.record(stage);
        r.status == StageStatus::Done
            && !r.files.is_empty()
            && r.files.iter().all(|(name, digest)| sha256_file(&dir.join(name)).is_ok_and(|d| &d == digest))
    }

    /// Resets the first stage that fails verification and everything after
    /// it to pending. Returns that stage, if any.
    pub fn reset_from_first_invalid(&mut self, dir: &Path) -> Option<Stage> {
        let first = Stage::ALL.into_iter().find(|s| !self.verify(*s, dir))?;
        if self.record(first).status == StageStatus::Done {
            log::warn!("checkpoint digest mismatch at stage {first}; re-running from there");
        }
        for s in &Stage::ALL[first.index()..] {
            *self.record_mut(*s) = StageRecord::pending(*s);
        }
        Some(first)
    }

    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|_| PipelineError::UnknownRun(dir.display().to_string()))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| PipelineError::ManifestCorrupt(e.to_string()))?;
        if m.stages.len() != Stage::ALL.len() || m.stages.iter().zip(Stage::ALL).any(|(r, s)| r.stage != s) {
            return Err(PipelineError::ManifestCorrupt("stage list does not match".into()));
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<(), PipelineError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        crate::document::write_atomic(&dir.join(MANIFEST_FILE), json.as_bytes())?;
        Ok(())
    }
}

/// User plus system CPU seconds consumed by this process so far.
pub fn process_cpu_time_s() -> f64 {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::zeroed();
    // SAFETY: getrusage fills the struct we pass and has no other effects.
    let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) };
    if rc != 0 {
        return 0.0;
    }
    // SAFETY: initialised by the successful call above.
    let u = unsafe { usage.assume_init() };
    let secs = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 / 1e6;
    secs(u.ru_utime) + secs(u.ru_stime)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
        }
        assert!("nope".parse::<Stage>().is_err());
    }

    #[test]
    fn tampering_resets_successors() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new(&PipelineConfig::mock("T"));
        for s in Stage::ALL {
            let name = format!("{s}.txt");
            std::fs::write(dir.path().join(&name), s.as_str()).unwrap();
            let r = m.record_mut(s);
            r.status = StageStatus::Done;
            r.files.insert(name.clone(), sha256_file(&dir.path().join(&name)).unwrap());
        }
        assert_eq!(m.reset_from_first_invalid(dir.path()), None);
        std::fs::write(dir.path().join("cluster.txt"), "tampered").unwrap();
        assert_eq!(m.reset_from_first_invalid(dir.path()), Some(Stage::Cluster));
        assert_eq!(m.record(Stage::Screen).status, StageStatus::Done);
        assert!(Stage::ALL[4..].iter().all(|s| m.record(*s).status == StageStatus::Pending));
    }

    #[test]
    fn cpu_time_moves_forward() {
        let a = process_cpu_time_s();
        let mut x = 0u64;
        for i in 0..3_000_000u64 {
            x = x.wrapping_add(i * i);
        }
        std::hint::black_box(x);
        assert!(process_cpu_time_s() >= a);
    }
}
