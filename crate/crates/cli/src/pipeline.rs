//! forge → train → eval orchestration. Everything is written below
//! `paths.out_dir`:
//!
//! ```text
//! curriculum/manifest.json, curriculum/stage{i}_{bucket}.jsonl
//! policy/base.json
//! train/{mode}/policy.json, train/{mode}/trainlog.jsonl, train/{mode}/checkpoints/
//! eval/report.txt, eval/report.json, eval/generations/{config}.jsonl
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hindpo_core::dataforge::{
    corpus_checksum, emit_forged, forge, load_articles, load_curriculum, ActualityProvider, ActualityTable,
    ArticleRecord, CurriculumDataset, ForgeOptions, Manifest, MANIFEST_FILE,
};
use hindpo_core::evalharness::{evaluate, generate, report_table, MetricReport, ReportTable};
use hindpo_core::hindpo::{LossConfig, LossMode, PreferenceExample};
use hindpo_core::policy::{load_checkpoint, save_checkpoint, snapshot_reference, BigramPolicy, Init, Policy, Vocabulary};
use hindpo_core::textmetrics::{tokenize, CharNgramCosine, MetricBundle};
use hindpo_core::toy::{separable_pairs, separable_vocab, toy_articles};
use hindpo_core::trainer::{encode_curriculum, gradcheck, train_with_checkpoints, EpochSummary, TrainError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ActualitySource, RunConfig};

pub const GRADCHECK_TOLERANCE: f64 = 1e-5;
const GRADCHECK_STEP: f64 = 1e-5;

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn jsonl<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub mode: LossMode,
    pub checkpoint: PathBuf,
    pub log: PathBuf,
    pub final_epoch: EpochSummary,
}

#[derive(Debug, Clone)]
pub struct DemoSummary {
    pub manifest: PathBuf,
    pub runs: Vec<TrainSummary>,
    pub report: ReportTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    pub mode: LossMode,
    pub seed: u64,
    pub pairs: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub struct Pipeline {
    config: RunConfig,
    records: Vec<ArticleRecord>,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let records = match &config.paths.corpus {
            Some(path) => load_articles(path)?,
            None => toy_articles()?,
        };
        if records.is_empty() {
            bail!("corpus has no records");
        }
        Ok(Self { config, records })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.paths.out_dir
    }

    fn curriculum_dir(&self) -> PathBuf {
        self.out_dir().join("curriculum")
    }

    fn base_path(&self) -> PathBuf {
        self.out_dir().join("policy").join("base.json")
    }

    fn mode_dir(&self, mode: LossMode) -> PathBuf {
        self.out_dir().join("train").join(mode.as_str())
    }

    fn forge_options(&self) -> ForgeOptions {
        ForgeOptions {
            order: self.config.order,
            split: self.config.split,
            seed: self.config.seed,
        }
    }

    fn actuality(&self) -> Result<ActualityProvider> {
        Ok(match &self.config.actuality {
            ActualitySource::Embedded => ActualityProvider::RecordEmbedded(ActualityTable::from_records(&self.records)),
            ActualitySource::File { path } => ActualityProvider::FileLookup(ActualityTable::load(path)?),
            ActualitySource::Constant { value } => ActualityProvider::constant(*value)?,
        })
    }

    pub fn forge(&self) -> Result<PathBuf> {
        let scorer = CharNgramCosine::default();
        let options = self.forge_options();
        let forged = forge(&self.records, &MetricBundle::new(&scorer), &self.actuality()?, &options)?;
        Ok(emit_forged(&forged, &options, &self.curriculum_dir())?)
    }

    fn load_curriculum(&self) -> Result<(Manifest, CurriculumDataset)> {
        let path = self.curriculum_dir().join(MANIFEST_FILE);
        if !path.exists() {
            bail!("{} not found; run `forge` first", path.display());
        }
        let (manifest, dataset) = load_curriculum(&path)?;
        if manifest.checksum != corpus_checksum(&self.records)? {
            bail!("{} was forged from a different corpus; run `forge` again", path.display());
        }
        Ok((manifest, dataset))
    }

    /// Vocabulary over every text in the corpus, so held-out prompts encode.
    pub fn vocabulary(&self) -> Result<Vocabulary> {
        let texts: Vec<_> = self
            .records
            .iter()
            .flat_map(|r| {
                let mut t = vec![tokenize(&r.news_text), tokenize(&r.ground_truth_explanation)];
                t.extend(r.candidates.iter().map(|c| tokenize(&c.text)));
                t
            })
            .collect();
        Ok(Vocabulary::from_sequences(texts.iter())?)
    }

    /// Smoothed transition counts of the training articles' reference
    /// explanations; the starting point and first reference of every run.
    pub fn base_policy(&self, manifest: &Manifest) -> Result<BigramPolicy> {
        let vocab = self.vocabulary()?;
        let by_id: HashMap<&str, &ArticleRecord> = self.records.iter().map(|r| (r.id.as_str(), r)).collect();
        let mut seqs = Vec::new();
        for id in &manifest.split_ids.train {
            let r = by_id.get(id.as_str()).with_context(|| format!("split id {id:?} not in corpus"))?;
            seqs.push((
                vocab.encode(&tokenize(&r.news_text))?,
                vocab.encode_response(&tokenize(&r.ground_truth_explanation))?,
            ));
        }
        let pairs = seqs.iter().map(|(p, r)| (p.as_slice(), r.as_slice()));
        Ok(BigramPolicy::from_transition_counts(vocab, pairs, self.config.policy.warm_start_alpha)?)
    }

    pub fn train(&self, mode: LossMode) -> Result<TrainSummary> {
        let (manifest, dataset) = self.load_curriculum()?;
        let base = self.base_policy(&manifest)?;
        ensure_parent(&self.base_path())?;
        save_checkpoint(&base, &self.base_path())?;
        let stages = encode_curriculum(&dataset, base.vocab())?;
        let cfg = self.config.train_config(mode);
        let dir = self.mode_dir(mode);
        let ckpt_dir = dir.join("checkpoints");
        if cfg.checkpoint_every.is_some() {
            fs::create_dir_all(&ckpt_dir).with_context(|| format!("creating {}", ckpt_dir.display()))?;
        }
        let (policy, log) = train_with_checkpoints(&stages, base, &cfg, |step, p: &BigramPolicy| {
            save_checkpoint(p, &ckpt_dir.join(format!("step-{step:06}.json"))).map_err(TrainError::from)
        })?;
        let checkpoint = dir.join("policy.json");
        let log_path = dir.join("trainlog.jsonl");
        ensure_parent(&checkpoint)?;
        save_checkpoint(&policy, &checkpoint)?;
        write(&log_path, &log.to_jsonl()?)?;
        let final_epoch = log.final_summary().cloned().context("training produced no epochs")?;
        Ok(TrainSummary {
            mode,
            checkpoint,
            log: log_path,
            final_epoch,
        })
    }

    /// Scores the base policy and every trained mode on the test split.
    pub fn eval(&self) -> Result<ReportTable> {
        let (manifest, _) = self.load_curriculum()?;
        let by_id: HashMap<&str, &ArticleRecord> = self.records.iter().map(|r| (r.id.as_str(), r)).collect();
        let test: Vec<&ArticleRecord> = manifest
            .split_ids
            .test
            .iter()
            .map(|id| by_id.get(id.as_str()).copied().with_context(|| format!("split id {id:?} not in corpus")))
            .collect::<Result<_>>()?;
        if test.is_empty() {
            bail!("test split is empty");
        }
        let prompts: Vec<String> = test.iter().map(|r| r.news_text.clone()).collect();
        let references: Vec<String> = test.iter().map(|r| r.ground_truth_explanation.clone()).collect();

        let mut policies = Vec::new();
        let base_path = self.base_path();
        let base = if base_path.exists() {
            load_checkpoint(&base_path)?
        } else {
            self.base_policy(&manifest)?
        };
        policies.push(("base".to_string(), base));
        for mode in LossMode::ALL {
            let path = self.mode_dir(mode).join("policy.json");
            if path.exists() {
                policies.push((mode.to_string(), load_checkpoint(&path)?));
            }
        }

        #[derive(Serialize)]
        struct Generation<'a> {
            id: &'a str,
            generated: &'a str,
            reference: &'a str,
        }

        let scorer = CharNgramCosine::default();
        let eval_dir = self.out_dir().join("eval");
        let mut reports: Vec<MetricReport> = Vec::new();
        for (name, policy) in &policies {
            let generated = generate(policy, &prompts, self.config.eval.max_len, self.config.eval.decoding)?;
            let rows: Vec<Generation> = test
                .iter()
                .zip(&generated)
                .map(|(r, g)| Generation {
                    id: &r.id,
                    generated: g,
                    reference: &r.ground_truth_explanation,
                })
                .collect();
            write(&eval_dir.join("generations").join(format!("{name}.jsonl")), &jsonl(&rows)?)?;
            reports.push(evaluate(name, &generated, &references, &scorer)?);
        }
        let table = report_table(&reports)?;
        write(&eval_dir.join("report.txt"), &table.text)?;
        write(&eval_dir.join("report.json"), &table.json)?;
        Ok(table)
    }

    /// forge, train every loss mode, eval.
    pub fn demo(&self) -> Result<DemoSummary> {
        let manifest = self.forge()?;
        let runs = LossMode::ALL.into_iter().map(|m| self.train(m)).collect::<Result<_>>()?;
        let report = self.eval()?;
        Ok(DemoSummary { manifest, runs, report })
    }
}

/// Compares the analytic loss gradient with central differences on a
/// seeded random policy over the separable toy vocabulary.
pub fn gradcheck_fixture(mode: LossMode, seed: u64, loss: &LossConfig) -> Result<GradcheckReport> {
    let vocab = separable_vocab()?;
    let policy = BigramPolicy::new(vocab.clone(), Init::Noise { std: 1.0, seed })?;
    let reference = snapshot_reference(&BigramPolicy::new(
        vocab.clone(),
        Init::Noise {
            std: 1.0,
            seed: seed.wrapping_add(1),
        },
    )?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch: Vec<PreferenceExample> = separable_pairs(&vocab, 8, 1.0, 0.01)
        .into_iter()
        .map(|p| PreferenceExample {
            s_w: rng.gen(),
            s_l: rng.gen(),
            v_effective: rng.gen(),
            ..p
        })
        .collect();
    let cfg = LossConfig { mode, ..loss.clone() };
    let err = gradcheck(&policy, &reference, &batch, &cfg, GRADCHECK_STEP)?;
    Ok(GradcheckReport {
        mode,
        seed,
        pairs: batch.len(),
        max_relative_error: err,
        tolerance: GRADCHECK_TOLERANCE,
        pass: err < GRADCHECK_TOLERANCE,
    })
}
