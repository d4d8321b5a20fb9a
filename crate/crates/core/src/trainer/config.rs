use serde::{Deserialize, Serialize};

use crate::hindpo::LossConfig;

use super::TrainError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs_per_stage: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Replace the reference policy with the current policy after each stage.
    pub refresh_reference_per_stage: bool,
    /// Save a checkpoint every this many optimizer steps.
    pub checkpoint_every: Option<u64>,
    pub loss: LossConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs_per_stage: 10,
            learning_rate: 1e-4,
            batch_size: 2,
            seed: 0,
            refresh_reference_per_stage: true,
            checkpoint_every: None,
            loss: LossConfig::default(),
        }
    }
}

impl TrainConfig {
    pub const TOY_LEARNING_RATE: f64 = 0.5;

    /// Defaults with the learning rate raised for bigram-scale runs.
    pub fn toy_preset() -> Self {
        Self {
            learning_rate: Self::TOY_LEARNING_RATE,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs_per_stage == 0 {
            return Err(TrainError::InvalidConfig("epochs_per_stage must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be positive".into()));
        }
        if self.checkpoint_every == Some(0) {
            return Err(TrainError::InvalidConfig("checkpoint_every must be positive".into()));
        }
        self.loss.validate()?;
        Ok(())
    }
}
