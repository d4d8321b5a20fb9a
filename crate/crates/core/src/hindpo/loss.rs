use serde::{Deserialize, Serialize};

use crate::policy::{Policy, ReferenceSnapshot};

use super::{LossConfig, LossError, LossMode};

/// Policy-to-reference log-ratios of the preferred and rejected responses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairLogRatios {
    pub r_w: f64,
    pub r_l: f64,
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `1 / (v_effective + epsilon)`, capped at `scale_cap`.
pub fn finesse_multiplier(v_effective: f64, config: &LossConfig) -> f64 {
    (1.0 / (v_effective + config.epsilon)).min(config.scale_cap)
}

/// Weights on `r_w` and `r_l`: `(1 + s_w, max(0.01, s_l))` when Actuality is
/// active, `(1, 1)` otherwise.
pub fn actuality_weights(mode: LossMode, s_w: f64, s_l: f64) -> (f64, f64) {
    if mode.uses_actuality() {
        (1.0 + s_w, s_l.max(0.01))
    } else {
        (1.0, 1.0)
    }
}

/// The preference score whose scaled sigmoid is maximized.
pub fn preference_score(ratios: PairLogRatios, s_w: f64, s_l: f64, v_effective: f64, config: &LossConfig) -> f64 {
    let (a_w, a_l) = actuality_weights(config.mode, s_w, s_l);
    let weighted = a_w * ratios.r_w - a_l * ratios.r_l;
    if config.mode.uses_finesse() {
        weighted * finesse_multiplier(v_effective, config)
    } else {
        weighted
    }
}

/// `-log sigmoid(beta * score)`.
pub fn hin_dpo_loss(score: f64, beta: f64) -> f64 {
    softplus(-beta * score)
}

pub fn standard_dpo_loss(ratios: PairLogRatios, beta: f64) -> f64 {
    softplus(-beta * (ratios.r_w - ratios.r_l))
}

/// One training pair in token-id form, with its Actuality and Finesse inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceExample {
    pub prompt: Vec<usize>,
    /// EOS-terminated preferred response.
    pub chosen: Vec<usize>,
    /// EOS-terminated rejected response.
    pub rejected: Vec<usize>,
    pub s_w: f64,
    pub s_l: f64,
    pub v_effective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub ratios: PairLogRatios,
    pub score: f64,
    pub loss: f64,
}

impl PairStats {
    /// Unweighted margin `beta * (r_w - r_l)`.
    pub fn margin(&self, beta: f64) -> f64 {
        beta * (self.ratios.r_w - self.ratios.r_l)
    }

    /// `beta * S`, the sigmoid argument with Actuality and Finesse weights applied.
    pub fn weighted_margin(&self, beta: f64) -> f64 {
        beta * self.score
    }

    pub fn prefers_chosen(&self) -> bool {
        self.ratios.r_w > self.ratios.r_l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    /// Batch-mean loss.
    pub loss: f64,
    /// Batch-mean gradient with respect to the policy parameters.
    pub grad: Vec<f64>,
    pub pairs: Vec<PairStats>,
}

pub fn pair_ratios<P: Policy>(
    policy: &P,
    reference: &ReferenceSnapshot<P>,
    example: &PreferenceExample,
) -> Result<PairLogRatios, LossError> {
    let r_w = policy.sequence_log_prob(&example.prompt, &example.chosen)?
        - reference.sequence_log_prob(&example.prompt, &example.chosen)?;
    let r_l = policy.sequence_log_prob(&example.prompt, &example.rejected)?
        - reference.sequence_log_prob(&example.prompt, &example.rejected)?;
    Ok(PairLogRatios { r_w, r_l })
}

pub fn pair_stats<P: Policy>(
    policy: &P,
    reference: &ReferenceSnapshot<P>,
    example: &PreferenceExample,
    config: &LossConfig,
) -> Result<PairStats, LossError> {
    let ratios = pair_ratios(policy, reference, example)?;
    let score = preference_score(ratios, example.s_w, example.s_l, example.v_effective, config);
    Ok(PairStats {
        ratios,
        score,
        loss: hin_dpo_loss(score, config.beta),
    })
}

/// Mean loss over a batch, without gradients.
pub fn batch_loss<P: Policy>(
    policy: &P,
    reference: &ReferenceSnapshot<P>,
    batch: &[PreferenceExample],
    config: &LossConfig,
) -> Result<f64, LossError> {
    if batch.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    let mut total = 0.0;
    for ex in batch {
        total += pair_stats(policy, reference, ex, config)?.loss;
    }
    Ok(total / batch.len() as f64)
}

/// Batch-mean loss and its analytic gradient.
///
/// Per pair, with `u = beta * S`, `dL/du = -(1 - sigmoid(u))` and
/// `du/dθ = beta * m * (a_w ∇log π(y_w) - a_l ∇log π(y_l))`, where `m` is
/// the capped Finesse multiplier (1 when Finesse is off). The Finesse value
/// is held constant.
pub fn loss_gradient<P: Policy>(
    policy: &P,
    reference: &ReferenceSnapshot<P>,
    batch: &[PreferenceExample],
    config: &LossConfig,
) -> Result<LossOutput, LossError> {
    if batch.is_empty() {
        return Err(LossError::EmptyBatch);
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grad = vec![0.0; policy.parameters().len()];
    let mut pairs = Vec::with_capacity(batch.len());
    let mut loss = 0.0;
    for ex in batch {
        let stats = pair_stats(policy, reference, ex, config)?;
        let u = config.beta * stats.score;
        let multiplier = if config.mode.uses_finesse() {
            finesse_multiplier(ex.v_effective, config)
        } else {
            1.0
        };
        let (a_w, a_l) = actuality_weights(config.mode, ex.s_w, ex.s_l);
        let coeff = -sigmoid(-u) * config.beta * multiplier * scale;
        policy.accumulate_sequence_grad(&ex.prompt, &ex.chosen, coeff * a_w, &mut grad)?;
        policy.accumulate_sequence_grad(&ex.prompt, &ex.rejected, -coeff * a_l, &mut grad)?;
        loss += stats.loss;
        pairs.push(stats);
    }
    Ok(LossOutput {
        loss: loss * scale,
        grad,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: LossMode) -> LossConfig {
        LossConfig::with_mode(mode)
    }

    #[test]
    fn score_examples() {
        let r = PairLogRatios { r_w: 0.5, r_l: -0.5 };
        // v_eff + eps = 1
        let s = preference_score(r, 0.5, 0.2, 0.95, &cfg(LossMode::HinDpo));
        assert!((s - 0.85).abs() < 1e-12);
        let s = preference_score(r, 0.0, 1.0, 0.95, &cfg(LossMode::HinDpo));
        assert_eq!(s, r.r_w - r.r_l);
        assert_eq!(actuality_weights(LossMode::DpoAct, 0.3, 0.001).1, 0.01);
        assert_eq!(actuality_weights(LossMode::Dpo, 0.3, 0.001), (1.0, 1.0));
    }

    #[test]
    fn mode_table() {
        let r = PairLogRatios { r_w: 0.3, r_l: 0.1 };
        let v = 0.15; // multiplier 5
        assert_eq!(preference_score(r, 1.0, 0.5, v, &cfg(LossMode::Dpo)), 0.3 - 0.1);
        assert!((preference_score(r, 1.0, 0.5, v, &cfg(LossMode::DpoAct)) - (0.6 - 0.05)).abs() < 1e-15);
        assert!((preference_score(r, 1.0, 0.5, v, &cfg(LossMode::DpoFin)) - 5.0 * 0.2).abs() < 1e-12);
        assert!((preference_score(r, 1.0, 0.5, v, &cfg(LossMode::HinDpo)) - 5.0 * 0.55).abs() < 1e-12);
    }

    #[test]
    fn multiplier_is_capped() {
        let c = LossConfig::default();
        assert_eq!(finesse_multiplier(0.0, &c), 20.0);
        assert_eq!(finesse_multiplier(0.95, &c), 1.0);
        let tight = LossConfig { scale_cap: 5.0, ..c };
        assert_eq!(finesse_multiplier(0.0, &tight), 5.0);
    }

    #[test]
    fn loss_values() {
        assert!((hin_dpo_loss(0.0, 0.6) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((hin_dpo_loss(0.85, 0.6) - 0.4703).abs() < 1e-4);
        let r = PairLogRatios { r_w: 1.0, r_l: 0.0 };
        assert!((standard_dpo_loss(r, 0.6) - 0.4375).abs() < 1e-4);
        assert_eq!(
            standard_dpo_loss(PairLogRatios { r_w: 0.2, r_l: 0.2 }, 0.6),
            std::f64::consts::LN_2
        );
    }

    #[test]
    fn loss_asymptotics() {
        assert!(hin_dpo_loss(50.0, 1.0) > 0.0);
        assert!(hin_dpo_loss(50.0, 1.0) < 1e-20);
        assert!((hin_dpo_loss(-50.0, 1.0) - 50.0).abs() < 1e-15);
        let l = hin_dpo_loss(700.0 / 0.6, 0.6);
        assert!(l.is_finite() && l >= 0.0);
        assert!(hin_dpo_loss(-700.0 / 0.6, 0.6).is_finite());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }
}
