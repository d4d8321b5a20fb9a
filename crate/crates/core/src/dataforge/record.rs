use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ForgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    pub model_id: String,
    pub text: String,
}

/// One fact-checked item: the claim, its human-written explanation and
/// exactly three machine-generated explanations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleRecord {
    pub id: String,
    pub label: Label,
    pub news_text: String,
    pub ground_truth_explanation: String,
    pub candidates: Vec<Candidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuality_preferred: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuality_candidates: Option<Vec<f64>>,
}

pub const CANDIDATES_PER_ARTICLE: usize = 3;

impl ArticleRecord {
    /// Checks the per-record invariants; `line` is used in error messages.
    pub fn validate(&self, line: usize) -> Result<(), ForgeError> {
        let schema = |message: String| ForgeError::Schema { line, message };
        if self.id.trim().is_empty() {
            return Err(schema("id must be non-empty".into()));
        }
        if self.news_text.trim().is_empty() {
            return Err(schema(format!("record {}: news_text must be non-empty", self.id)));
        }
        if self.candidates.len() != CANDIDATES_PER_ARTICLE {
            return Err(schema(format!(
                "record {}: expected {CANDIDATES_PER_ARTICLE} candidates, found {}",
                self.id,
                self.candidates.len()
            )));
        }
        if let Some(v) = self.actuality_preferred {
            check_unit(v).map_err(|_| schema(format!("record {}: actuality_preferred {v} outside [0, 1]", self.id)))?;
        }
        if let Some(vs) = &self.actuality_candidates {
            if vs.len() != CANDIDATES_PER_ARTICLE {
                return Err(schema(format!(
                    "record {}: expected {CANDIDATES_PER_ARTICLE} candidate actuality scores, found {}",
                    self.id,
                    vs.len()
                )));
            }
            for v in vs {
                check_unit(*v)
                    .map_err(|_| schema(format!("record {}: candidate actuality {v} outside [0, 1]", self.id)))?;
            }
        }
        Ok(())
    }
}

pub(crate) fn check_unit(v: f64) -> Result<f64, ()> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(())
    }
}

/// Parses line-delimited records, validating each one. Blank lines are skipped.
pub fn parse_articles(text: &str) -> Result<Vec<ArticleRecord>, ForgeError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: ArticleRecord = serde_json::from_str(raw).map_err(|e| ForgeError::Parse {
            line,
            message: e.to_string(),
        })?;
        record.validate(line)?;
        if !seen.insert(record.id.clone()) {
            return Err(ForgeError::DuplicateId { line, id: record.id });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_articles(path: &Path) -> Result<Vec<ArticleRecord>, ForgeError> {
    let text = fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
    parse_articles(&text)
}

/// Canonical line-delimited serialization, one record per line.
pub fn articles_to_jsonl(records: &[ArticleRecord]) -> Result<String, ForgeError> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_articles(records: &[ArticleRecord], path: &Path) -> Result<(), ForgeError> {
    fs::write(path, articles_to_jsonl(records)?).map_err(|e| ForgeError::io(path, e))
}
