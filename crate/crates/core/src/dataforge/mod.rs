//! Preference-dataset construction: score and rank the three candidate
//! explanations of each article, attach Actuality scores, split at article
//! level, bucketize by rank and emit the curriculum.

mod actuality;
mod curriculum;
mod rank;
mod record;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::textmetrics::{MetricBundle, MetricError};

pub use actuality::{attach_actuality, ActualityProvider, ActualityTable, Role};
pub use curriculum::{
    bucketize, emit_curriculum, load_curriculum, split_articles, Counts, CurriculumDataset, EmitContext, Manifest,
    SplitFractions, SplitIds, Stage, StageEntry, StageOrder, MANIFEST_FILE, MANIFEST_FORMAT_VERSION,
};
pub use rank::{score_and_rank, Bucket, PreferencePair, ScoredPair};
pub use record::{
    articles_to_jsonl, load_articles, parse_articles, write_articles, ArticleRecord, Candidate, Label,
    CANDIDATES_PER_ARTICLE,
};

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("I/O error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: schema violation: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: duplicate record id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("no Actuality score for record {id:?} role {role}")]
    ActualityMissing { id: String, role: String },
    #[error("line {line}: Actuality score {value} outside [0, 1]")]
    ActualityOutOfRange { line: usize, value: f64 },
    #[error("article {id:?} has no rank-{rank} pair")]
    MissingRank { id: String, rank: u8 },
    #[error("article {id:?} has more than one rank-{rank} pair")]
    DuplicateRank { id: String, rank: u8 },
    #[error("article {id:?} has invalid rank {rank}")]
    InvalidRank { id: String, rank: u8 },
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ForgeError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ForgeError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Hex SHA-256 of the canonical line-delimited corpus.
pub fn corpus_checksum(records: &[ArticleRecord]) -> Result<String, ForgeError> {
    let text = articles_to_jsonl(records)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForgeOptions {
    pub order: StageOrder,
    pub split: SplitFractions,
    pub seed: u64,
}

impl Default for ForgeOptions {
    fn default() -> Self {
        Self {
            order: StageOrder::Algorithm1,
            split: SplitFractions::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forged {
    /// Curriculum built from the training split only.
    pub dataset: CurriculumDataset,
    pub split_ids: SplitIds,
    pub checksum: String,
    pub article_count: usize,
}

/// Runs the full dataset-creation pipeline in memory.
pub fn forge(
    records: &[ArticleRecord],
    metrics: &MetricBundle<'_>,
    provider: &ActualityProvider,
    options: &ForgeOptions,
) -> Result<Forged, ForgeError> {
    let split_ids = split_articles(records, options.split, options.seed)?;
    let train: std::collections::HashSet<&str> = split_ids.train.iter().map(String::as_str).collect();
    let mut pairs = Vec::new();
    for record in records.iter().filter(|r| train.contains(r.id.as_str())) {
        let scored = score_and_rank(record, metrics)?;
        pairs.extend(attach_actuality(scored, provider)?);
    }
    let dataset = bucketize(pairs, options.order)?;
    Ok(Forged {
        dataset,
        split_ids,
        checksum: corpus_checksum(records)?,
        article_count: records.len(),
    })
}

/// Writes a forged dataset to `out_dir`; returns the manifest path.
pub fn emit_forged(forged: &Forged, options: &ForgeOptions, out_dir: &Path) -> Result<PathBuf, ForgeError> {
    let ctx = EmitContext {
        checksum: &forged.checksum,
        article_count: forged.article_count,
        split: options.split,
        split_ids: &forged.split_ids,
        seed: options.seed,
    };
    emit_curriculum(&forged.dataset, &ctx, out_dir)
}
