use serde::{Deserialize, Serialize};

/// One optimizer step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub stage: usize,
    pub bucket: String,
    pub epoch: usize,
    /// Global step counter, starting at 1.
    pub step: u64,
    pub loss: f64,
    /// Batch mean of `beta * (r_w - r_l)`.
    pub mean_margin: f64,
    /// Batch mean of `beta * S`.
    pub mean_weighted_margin: f64,
    pub accuracy: f64,
}

/// Whole-stage statistics after an epoch. Epoch 0 is measured before any
/// update in the stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub stage: usize,
    pub bucket: String,
    pub epoch: usize,
    pub loss: f64,
    pub mean_margin: f64,
    pub mean_weighted_margin: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogRecord {
    Step(StepRecord),
    Epoch(EpochSummary),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub records: Vec<LogRecord>,
}

impl TrainLog {
    pub fn steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Step(s) => Some(s),
            LogRecord::Epoch(_) => None,
        })
    }

    pub fn epochs(&self) -> impl Iterator<Item = &EpochSummary> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Epoch(e) => Some(e),
            LogRecord::Step(_) => None,
        })
    }

    /// Summary after the last epoch of the last stage.
    pub fn final_summary(&self) -> Option<&EpochSummary> {
        self.epochs().last()
    }

    /// Bucket names in the order their stages were trained.
    pub fn stage_order(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut last = None;
        for e in self.epochs() {
            if last != Some(e.stage) {
                out.push(e.bucket.clone());
                last = Some(e.stage);
            }
        }
        out
    }

    pub fn to_jsonl(&self) -> Result<String, serde_json::Error> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}
