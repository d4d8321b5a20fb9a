use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ArticleRecord, Bucket, ForgeError, PreferencePair};

/// Order in which bucket stages are trained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOrder {
    /// Low, medium, high: `D = B_L ∪ B_M ∪ B_H`.
    #[default]
    Algorithm1,
    /// High, medium, low: rank-0 rejected explanations first.
    Section4,
}

impl StageOrder {
    pub fn buckets(self) -> [Bucket; 3] {
        match self {
            StageOrder::Algorithm1 => [Bucket::Low, Bucket::Medium, Bucket::High],
            StageOrder::Section4 => [Bucket::High, Bucket::Medium, Bucket::Low],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StageOrder::Algorithm1 => "algorithm1",
            StageOrder::Section4 => "section4",
        }
    }
}

impl fmt::Display for StageOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageOrder {
    type Err = ForgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "algorithm1" => Ok(StageOrder::Algorithm1),
            "section4" => Ok(StageOrder::Section4),
            other => Err(ForgeError::InvalidConfig(format!("unknown stage order {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub bucket: Bucket,
    pub pairs: Vec<PreferencePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumDataset {
    pub order: StageOrder,
    pub stages: Vec<Stage>,
}

impl CurriculumDataset {
    pub fn pair_count(&self) -> usize {
        self.stages.iter().map(|s| s.pairs.len()).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = &PreferencePair> {
        self.stages.iter().flat_map(|s| s.pairs.iter())
    }
}

/// Places each article's rank-2/1/0 pairs in B_L/B_M/B_H and orders the stages.
/// Pairs inside a stage are sorted by article id.
pub fn bucketize(pairs: Vec<PreferencePair>, order: StageOrder) -> Result<CurriculumDataset, ForgeError> {
    let mut by_article: BTreeMap<String, [Option<PreferencePair>; 3]> = BTreeMap::new();
    for pair in pairs {
        let slot = by_article.entry(pair.id.clone()).or_default();
        let rank = pair.rank as usize;
        if rank > 2 {
            return Err(ForgeError::InvalidRank { id: pair.id, rank: pair.rank });
        }
        if slot[rank].is_some() {
            return Err(ForgeError::DuplicateRank { id: pair.id, rank: pair.rank });
        }
        slot[rank] = Some(pair);
    }
    let mut buckets: BTreeMap<Bucket, Vec<PreferencePair>> = BTreeMap::new();
    for (id, slots) in by_article {
        for (rank, slot) in slots.into_iter().enumerate() {
            let mut pair = slot.ok_or_else(|| ForgeError::MissingRank {
                id: id.clone(),
                rank: rank as u8,
            })?;
            let bucket = Bucket::from_rank(rank as u8).expect("rank < 3");
            pair.bucket = bucket;
            buckets.entry(bucket).or_default().push(pair);
        }
    }
    let stages = order
        .buckets()
        .into_iter()
        .map(|bucket| Stage {
            bucket,
            pairs: buckets.remove(&bucket).unwrap_or_default(),
        })
        .collect();
    Ok(CurriculumDataset { order, stages })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.75,
            val: 0.05,
            test: 0.20,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<(), ForgeError> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(ForgeError::InvalidConfig(format!("split fractions must lie in [0, 1]: {self:?}")));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(ForgeError::InvalidConfig(format!("split fractions must sum to 1: {self:?}")));
        }
        Ok(())
    }
}

/// Article ids per split, each sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIds {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// Shuffles article ids with a seeded generator and cuts them into
/// train/val/test. Counts are rounded for train and val; test takes the rest.
pub fn split_articles(records: &[ArticleRecord], fractions: SplitFractions, seed: u64) -> Result<SplitIds, ForgeError> {
    fractions.validate()?;
    let mut ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    ids.sort();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = ids.len();
    let n_train = ((fractions.train * n as f64).round() as usize).min(n);
    let n_val = ((fractions.val * n as f64).round() as usize).min(n - n_train);
    let mut test = ids.split_off(n_train + n_val);
    let mut val = ids.split_off(n_train);
    let mut train = ids;
    train.sort();
    val.sort();
    test.sort();
    Ok(SplitIds { train, val, test })
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageEntry {
    pub bucket: Bucket,
    pub file: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub articles: usize,
    pub pairs: usize,
    pub train_articles: usize,
    pub val_articles: usize,
    pub test_articles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub order: StageOrder,
    pub stages: Vec<StageEntry>,
    pub counts: Counts,
    /// SHA-256 of the canonical corpus serialization.
    pub checksum: String,
    pub split: SplitFractions,
    pub split_ids: SplitIds,
    pub seed: u64,
}

/// Everything `emit_curriculum` records besides the stage contents.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitContext<'a> {
    pub checksum: &'a str,
    pub article_count: usize,
    pub split: SplitFractions,
    pub split_ids: &'a SplitIds,
    pub seed: u64,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ForgeError> {
    fs::write(path, contents).map_err(|e| ForgeError::io(path, e))
}

/// Writes one line-delimited file per stage plus `manifest.json` into `out_dir`.
pub fn emit_curriculum(dataset: &CurriculumDataset, ctx: &EmitContext<'_>, out_dir: &Path) -> Result<PathBuf, ForgeError> {
    fs::create_dir_all(out_dir).map_err(|e| ForgeError::io(out_dir, e))?;
    let mut stages = Vec::with_capacity(dataset.stages.len());
    for (i, stage) in dataset.stages.iter().enumerate() {
        let file = format!("stage{i}_{}.jsonl", stage.bucket);
        let mut text = String::new();
        for pair in &stage.pairs {
            text.push_str(&serde_json::to_string(pair)?);
            text.push('\n');
        }
        write_file(&out_dir.join(&file), &text)?;
        stages.push(StageEntry {
            bucket: stage.bucket,
            file,
            count: stage.pairs.len(),
        });
    }
    let manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        order: dataset.order,
        stages,
        counts: Counts {
            articles: ctx.article_count,
            pairs: dataset.pair_count(),
            train_articles: ctx.split_ids.train.len(),
            val_articles: ctx.split_ids.val.len(),
            test_articles: ctx.split_ids.test.len(),
        },
        checksum: ctx.checksum.to_string(),
        split: ctx.split,
        split_ids: ctx.split_ids.clone(),
        seed: ctx.seed,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&path, &text)?;
    Ok(path)
}

/// Reads a manifest and its stage files back into a dataset.
pub fn load_curriculum(manifest_path: &Path) -> Result<(Manifest, CurriculumDataset), ForgeError> {
    let text = fs::read_to_string(manifest_path).map_err(|e| ForgeError::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut stages = Vec::new();
    for entry in &manifest.stages {
        let path = dir.join(&entry.file);
        let body = fs::read_to_string(&path).map_err(|e| ForgeError::io(&path, e))?;
        let mut pairs = Vec::new();
        for (i, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let pair: PreferencePair = serde_json::from_str(line).map_err(|e| ForgeError::Parse {
                line: i + 1,
                message: format!("{}: {e}", path.display()),
            })?;
            pairs.push(pair);
        }
        if pairs.len() != entry.count {
            return Err(ForgeError::InvalidConfig(format!(
                "{} holds {} pairs, manifest says {}",
                path.display(),
                pairs.len(),
                entry.count
            )));
        }
        stages.push(Stage {
            bucket: entry.bucket,
            pairs,
        });
    }
    let dataset = CurriculumDataset {
        order: manifest.order,
        stages,
    };
    Ok((manifest, dataset))
}
