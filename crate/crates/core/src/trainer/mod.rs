//! Staged preference training with plain gradient descent.

mod config;
mod log;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataforge::CurriculumDataset;
use crate::hindpo::{
    batch_loss, compute_finesse, loss_gradient, pair_stats, LossConfig, LossError, PairStats, PreferenceExample,
};
use crate::policy::{snapshot_reference, Policy, PolicyError, ReferenceSnapshot, Vocabulary};
use crate::textmetrics::tokenize;

pub use crate::stats::{welford_update, RunningVariance};
pub use config::TrainConfig;
pub use log::{EpochSummary, LogRecord, StepRecord, TrainLog};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("stage {stage} ({bucket}) has no pairs")]
    EmptyStage { stage: usize, bucket: String },
    #[error("non-finite loss {loss} at stage {stage}, epoch {epoch}, step {step}")]
    NonFiniteLoss { stage: usize, epoch: usize, step: u64, loss: f64 },
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// A curriculum stage in token-id form.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStage {
    pub bucket: String,
    pub pairs: Vec<PreferenceExample>,
}

/// Tokenizes and encodes every pair of the dataset. `v_effective` is left at
/// 1 and filled in by the trainer at stage start.
pub fn encode_curriculum(dataset: &CurriculumDataset, vocab: &Vocabulary) -> Result<Vec<TrainStage>, TrainError> {
    dataset
        .stages
        .iter()
        .map(|stage| {
            let pairs = stage
                .pairs
                .iter()
                .map(|p| {
                    Ok(PreferenceExample {
                        prompt: vocab.encode(&tokenize(&p.prompt))?,
                        chosen: vocab.encode_response(&tokenize(&p.preferred))?,
                        rejected: vocab.encode_response(&tokenize(&p.rejected))?,
                        s_w: p.s_w,
                        s_l: p.s_l,
                        v_effective: 1.0,
                    })
                })
                .collect::<Result<_, TrainError>>()?;
            Ok(TrainStage {
                bucket: stage.bucket.to_string(),
                pairs,
            })
        })
        .collect()
}

/// Finesse per unique (prompt, preferred) in first-appearance order.
fn refresh_finesse<P: Policy>(
    policy: &P,
    pairs: &mut [PreferenceExample],
    config: &LossConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(), TrainError> {
    let mut cache: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    for pair in pairs.iter_mut() {
        let key = (pair.prompt.clone(), pair.chosen.clone());
        let v = match cache.get(&key) {
            Some(v) => *v,
            None => {
                let v = compute_finesse(policy, &pair.prompt, config, rng)?.v_effective;
                cache.insert(key, v);
                v
            }
        };
        pair.v_effective = v;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSummary {
    pub loss: f64,
    pub mean_margin: f64,
    pub mean_weighted_margin: f64,
    pub accuracy: f64,
}

/// Mean loss, margins and preference accuracy of `policy` on `pairs`.
pub fn summarize<P: Policy>(
    policy: &P,
    reference: &ReferenceSnapshot<P>,
    pairs: &[PreferenceExample],
    config: &LossConfig,
) -> Result<PairSummary, TrainError> {
    let stats: Vec<PairStats> = pairs
        .iter()
        .map(|p| pair_stats(policy, reference, p, config))
        .collect::<Result<_, _>>()?;
    Ok(aggregate(&stats, config.beta))
}

fn aggregate(stats: &[PairStats], beta: f64) -> PairSummary {
    let n = stats.len() as f64;
    PairSummary {
        loss: stats.iter().map(|s| s.loss).sum::<f64>() / n,
        mean_margin: stats.iter().map(|s| s.margin(beta)).sum::<f64>() / n,
        mean_weighted_margin: stats.iter().map(|s| s.weighted_margin(beta)).sum::<f64>() / n,
        accuracy: stats.iter().filter(|s| s.prefers_chosen()).count() as f64 / n,
    }
}

pub fn train<P: Policy>(stages: &[TrainStage], policy: P, config: &TrainConfig) -> Result<(P, TrainLog), TrainError> {
    train_with_checkpoints(stages, policy, config, |_, _| Ok(()))
}

/// Runs every stage in order. `checkpoint(step, policy)` is called every
/// `config.checkpoint_every` steps.
pub fn train_with_checkpoints<P: Policy>(
    stages: &[TrainStage],
    mut policy: P,
    config: &TrainConfig,
    mut checkpoint: impl FnMut(u64, &P) -> Result<(), TrainError>,
) -> Result<(P, TrainLog), TrainError> {
    config.validate()?;
    if let Some((stage, s)) = stages.iter().enumerate().find(|(_, s)| s.pairs.is_empty()) {
        return Err(TrainError::EmptyStage {
            stage,
            bucket: s.bucket.clone(),
        });
    }
    let loss_cfg = &config.loss;
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reference = snapshot_reference(&policy);
    let mut log = TrainLog::default();
    let mut step = 0u64;

    for (stage_ix, stage) in stages.iter().enumerate() {
        let mut pairs = stage.pairs.clone();
        if loss_cfg.mode.uses_finesse() {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(1 + stage_ix as u64);
            refresh_finesse(&policy, &mut pairs, loss_cfg, &mut rng)?;
        }
        let summary = |policy: &P, reference: &ReferenceSnapshot<P>, epoch| {
            summarize(policy, reference, &pairs, loss_cfg).map(|s| {
                LogRecord::Epoch(EpochSummary {
                    stage: stage_ix,
                    bucket: stage.bucket.clone(),
                    epoch,
                    loss: s.loss,
                    mean_margin: s.mean_margin,
                    mean_weighted_margin: s.mean_weighted_margin,
                    accuracy: s.accuracy,
                })
            })
        };
        log.records.push(summary(&policy, &reference, 0)?);

        let mut order: Vec<usize> = (0..pairs.len()).collect();
        for epoch in 1..=config.epochs_per_stage {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(config.batch_size) {
                step += 1;
                let batch: Vec<PreferenceExample> = chunk.iter().map(|&i| pairs[i].clone()).collect();
                let out = loss_gradient(&policy, &reference, &batch, loss_cfg)?;
                if !out.loss.is_finite() || out.grad.iter().any(|g| !g.is_finite()) {
                    return Err(TrainError::NonFiniteLoss {
                        stage: stage_ix,
                        epoch,
                        step,
                        loss: out.loss,
                    });
                }
                for (w, g) in policy.parameters_mut().iter_mut().zip(&out.grad) {
                    *w -= config.learning_rate * g;
                }
                let s = aggregate(&out.pairs, loss_cfg.beta);
                log.records.push(LogRecord::Step(StepRecord {
                    stage: stage_ix,
                    bucket: stage.bucket.clone(),
                    epoch,
                    step,
                    loss: out.loss,
                    mean_margin: s.mean_margin,
                    mean_weighted_margin: s.mean_weighted_margin,
                    accuracy: s.accuracy,
                }));
                if config.checkpoint_every.is_some_and(|n| step.is_multiple_of(n)) {
                    checkpoint(step, &policy)?;
                }
            }
            log.records.push(summary(&policy, &reference, epoch)?);
        }
        if config.refresh_reference_per_stage {
            reference = snapshot_reference(&policy);
        }
    }
    Ok((policy, log))
}

/// Below this gradient magnitude the relative error is taken against the
/// floor, so finite-difference rounding noise (about `eps * loss / h`) on
/// near-zero entries is not reported as a mismatch.
pub const GRADCHECK_SCALE_FLOOR: f64 = 1e-4;

/// Largest relative difference between the analytic loss gradient and
/// central differences (step `h`) over every parameter the batch touches.
pub fn gradcheck<P: Policy>(
    policy: &P,
    reference: &ReferenceSnapshot<P>,
    batch: &[PreferenceExample],
    config: &LossConfig,
    h: f64,
) -> Result<f64, TrainError> {
    let analytic = loss_gradient(policy, reference, batch, config)?.grad;
    let mut touched = Vec::new();
    for ex in batch {
        touched.extend(policy.sequence_parameters(&ex.prompt, &ex.chosen)?);
        touched.extend(policy.sequence_parameters(&ex.prompt, &ex.rejected)?);
    }
    touched.sort_unstable();
    touched.dedup();
    let mut worst = 0.0f64;
    let mut probe = policy.clone();
    for i in touched {
        let base = probe.parameters()[i];
        probe.parameters_mut()[i] = base + h;
        let plus = batch_loss(&probe, reference, batch, config)?;
        probe.parameters_mut()[i] = base - h;
        let minus = batch_loss(&probe, reference, batch, config)?;
        probe.parameters_mut()[i] = base;
        let fd = (plus - minus) / (2.0 * h);
        let scale = analytic[i].abs().max(fd.abs()).max(GRADCHECK_SCALE_FLOOR);
        worst = worst.max((analytic[i] - fd).abs() / scale);
    }
    Ok(worst)
}
