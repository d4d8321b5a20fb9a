use std::fmt;

use serde::{Deserialize, Serialize};

use crate::textmetrics::{CandidateScores, MetricBundle};

use super::{ArticleRecord, ForgeError};

/// Curriculum bucket of a rejected explanation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bucket {
    /// Lowest-scoring candidate of each article (rank 2).
    #[serde(rename = "B_L")]
    Low,
    /// Rank 1.
    #[serde(rename = "B_M")]
    Medium,
    /// Highest-scoring candidate (rank 0).
    #[serde(rename = "B_H")]
    High,
}

impl Bucket {
    pub fn from_rank(rank: u8) -> Option<Bucket> {
        match rank {
            0 => Some(Bucket::High),
            1 => Some(Bucket::Medium),
            2 => Some(Bucket::Low),
            _ => None,
        }
    }

    pub fn rank(self) -> u8 {
        match self {
            Bucket::High => 0,
            Bucket::Medium => 1,
            Bucket::Low => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Low => "B_L",
            Bucket::Medium => "B_M",
            Bucket::High => "B_H",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A ranked (prompt, preferred, rejected) triple before Actuality scores are attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    /// Article id.
    pub id: String,
    /// Position of the rejected explanation in the article's candidate list.
    pub candidate: usize,
    pub model_id: String,
    pub prompt: String,
    pub preferred: String,
    pub rejected: String,
    pub scores: CandidateScores,
    pub rank: u8,
    pub bucket: Bucket,
}

/// A training pair: prompt, preferred and rejected explanations with their
/// Actuality scores and curriculum placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferencePair {
    pub id: String,
    pub candidate: usize,
    pub model_id: String,
    pub prompt: String,
    pub preferred: String,
    pub rejected: String,
    pub s_w: f64,
    pub s_l: f64,
    pub fs: f64,
    pub rank: u8,
    pub bucket: Bucket,
}

impl PreferencePair {
    pub fn from_scored(pair: ScoredPair, s_w: f64, s_l: f64) -> Self {
        Self {
            id: pair.id,
            candidate: pair.candidate,
            model_id: pair.model_id,
            prompt: pair.prompt,
            preferred: pair.preferred,
            rejected: pair.rejected,
            s_w,
            s_l,
            fs: pair.scores.fs.value(),
            rank: pair.rank,
            bucket: pair.bucket,
        }
    }
}

/// Scores the three candidates against the ground truth and ranks them by
/// descending final score (rank 0 = closest). Ties go to the smaller `model_id`,
/// then to the earlier candidate position.
pub fn score_and_rank(record: &ArticleRecord, metrics: &MetricBundle<'_>) -> Result<Vec<ScoredPair>, ForgeError> {
    let mut scored: Vec<(usize, CandidateScores)> = record
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| Ok((i, metrics.score(&c.text, &record.ground_truth_explanation)?)))
        .collect::<Result<_, ForgeError>>()?;
    scored.sort_by(|(ia, a), (ib, b)| {
        b.fs.value()
            .total_cmp(&a.fs.value())
            .then_with(|| record.candidates[*ia].model_id.cmp(&record.candidates[*ib].model_id))
            .then_with(|| ia.cmp(ib))
    });
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(rank, (i, scores))| {
            let rank = rank as u8;
            ScoredPair {
                id: record.id.clone(),
                candidate: i,
                model_id: record.candidates[i].model_id.clone(),
                prompt: record.news_text.clone(),
                preferred: record.ground_truth_explanation.clone(),
                rejected: record.candidates[i].text.clone(),
                scores,
                rank,
                bucket: Bucket::from_rank(rank).expect("three candidates"),
            }
        })
        .collect())
}
