//! Run configuration, read from TOML. Every field has a default, so an empty
//! file (or no file) is a valid configuration.
//!
//! ```toml
//! seed = 7
//! order = "algorithm1"          # or "section4"
//! toy_preset = false            # learning rate 0.5 instead of 1e-4
//!
//! [paths]
//! corpus = "articles.jsonl"     # omit to use the bundled toy corpus
//! out_dir = "out"
//!
//! [split]
//! train = 0.75
//! val = 0.05
//! test = 0.20
//!
//! [actuality]
//! provider = "embedded"         # "file" (with path = "...") or "constant" (with value = 0.5)
//!
//! [loss]
//! mode = "hin_dpo"
//! beta = 0.6
//!
//! [train]
//! epochs_per_stage = 10
//! batch_size = 2
//!
//! [policy]
//! warm_start_alpha = 0.1
//!
//! [eval]
//! max_len = 40
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hindpo_core::dataforge::{SplitFractions, StageOrder};
use hindpo_core::evalharness::Decoding;
use hindpo_core::hindpo::{LossConfig, LossMode};
use hindpo_core::trainer::TrainConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            corpus: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActualitySource {
    /// Scores stored in the corpus records.
    #[default]
    Embedded,
    /// Line-based lookup file `<id> <pref|candN> <score>`.
    File { path: PathBuf },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs_per_stage: usize,
    pub learning_rate: Option<f64>,
    pub batch_size: usize,
    pub refresh_reference_per_stage: bool,
    pub checkpoint_every: Option<u64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            epochs_per_stage: d.epochs_per_stage,
            learning_rate: None,
            batch_size: d.batch_size,
            refresh_reference_per_stage: d.refresh_reference_per_stage,
            checkpoint_every: d.checkpoint_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    /// Additive smoothing of the base policy's transition counts.
    pub warm_start_alpha: f64,
}

impl Default for PolicySection {
    fn default() -> Self {
        Self { warm_start_alpha: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub max_len: usize,
    pub decoding: Decoding,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            max_len: 40,
            decoding: Decoding::Greedy,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub order: StageOrder,
    pub toy_preset: bool,
    pub paths: Paths,
    pub split: SplitFractions,
    pub actuality: ActualitySource,
    pub loss: LossConfig,
    pub train: TrainSection,
    pub policy: PolicySection,
    pub eval: EvalSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.loss.validate()?;
        self.train_config(self.loss.mode).validate()?;
        if let ActualitySource::Constant { value } = self.actuality {
            if !(0.0..=1.0).contains(&value) {
                bail!("constant Actuality score {value} outside [0, 1]");
            }
        }
        if self.eval.max_len == 0 {
            bail!("eval.max_len must be positive");
        }
        Ok(())
    }

    pub fn learning_rate(&self) -> f64 {
        match (self.train.learning_rate, self.toy_preset) {
            (Some(lr), _) => lr,
            (None, true) => TrainConfig::TOY_LEARNING_RATE,
            (None, false) => TrainConfig::default().learning_rate,
        }
    }

    pub fn train_config(&self, mode: LossMode) -> TrainConfig {
        TrainConfig {
            epochs_per_stage: self.train.epochs_per_stage,
            learning_rate: self.learning_rate(),
            batch_size: self.train.batch_size,
            seed: self.seed,
            refresh_reference_per_stage: self.train.refresh_reference_per_stage,
            checkpoint_every: self.train.checkpoint_every,
            loss: LossConfig { mode, ..self.loss.clone() },
        }
    }
}
