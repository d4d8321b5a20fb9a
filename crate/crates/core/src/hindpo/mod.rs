//! Actuality- and Finesse-weighted DPO objective.
//!
//! For a pair `(x, y_w, y_l)` with log-ratios `r_w`, `r_l` against the
//! reference policy, Actuality scores `s_w`, `s_l` and Finesse variance `v`:
//!
//! ```text
//! S = ((1 + s_w) r_w - max(0.01, s_l) r_l) / (v + epsilon)
//! L = -log sigmoid(beta * S)
//! ```
//!
//! [`LossMode`] switches the Actuality weights and the Finesse divisor on
//! and off independently; with both off the objective is plain DPO.

mod config;
mod finesse;
mod loss;

use thiserror::Error;

use crate::policy::PolicyError;
use crate::stats::StatsError;

pub use config::{LossConfig, LossMode};
pub use finesse::{compute_finesse, mean_token_probability, FinesseEstimate};
pub use loss::{
    actuality_weights, batch_loss, finesse_multiplier, hin_dpo_loss, loss_gradient, pair_ratios, pair_stats,
    preference_score, sigmoid, softplus, standard_dpo_loss, LossOutput, PairLogRatios, PairStats,
    PreferenceExample,
};

#[derive(Debug, Error)]
pub enum LossError {
    #[error("invalid loss configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate Finesse estimate: {0}")]
    Degenerate(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
