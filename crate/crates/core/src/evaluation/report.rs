use serde::{Deserialize, Serialize};

/// One value of one metric at one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub stage: String,
    pub metric: String,
    pub value: f64,
}

/// Ordered list of metric records, serialized as one JSON object per line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub records: Vec<MetricRecord>,
}

impl MetricsReport {
    pub fn push(&mut self, stage: &str, metric: &str, value: f64) {
        self.records.push(MetricRecord { stage: stage.to_string(), metric: metric.to_string(), value });
    }

    pub fn get(&self, stage: &str, metric: &str) -> Option<f64> {
        self.records.iter().find(|r| r.stage == stage && r.metric == metric).map(|r| r.value)
    }

    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("plain struct") + "\n").collect()
    }

    pub fn from_jsonl(text: &str) -> serde_json::Result<Self> {
        let records = text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect::<Result<_, _>>()?;
        Ok(Self { records })
    }
}
