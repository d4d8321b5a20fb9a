use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::record::check_unit;
use super::{ArticleRecord, ForgeError, PreferencePair, ScoredPair};

/// Which explanation of an article a factual-consistency score belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Preferred,
    Candidate(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Preferred => f.write_str("pref"),
            Role::Candidate(i) => write!(f, "cand{i}"),
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pref" => Ok(Role::Preferred),
            "cand0" => Ok(Role::Candidate(0)),
            "cand1" => Ok(Role::Candidate(1)),
            "cand2" => Ok(Role::Candidate(2)),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Scores keyed by (record id, role).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActualityTable {
    scores: HashMap<(String, Role), f64>,
}

impl ActualityTable {
    pub fn get(&self, id: &str, role: Role) -> Option<f64> {
        self.scores.get(&(id.to_string(), role)).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Collects the scores embedded in the records themselves.
    pub fn from_records(records: &[ArticleRecord]) -> Self {
        let mut scores = HashMap::new();
        for r in records {
            if let Some(v) = r.actuality_preferred {
                scores.insert((r.id.clone(), Role::Preferred), v);
            }
            for (i, v) in r.actuality_candidates.iter().flatten().enumerate() {
                scores.insert((r.id.clone(), Role::Candidate(i)), *v);
            }
        }
        Self { scores }
    }

    /// Parses `<record_id> <role> <score>` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, ForgeError> {
        let mut scores = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| ForgeError::Parse { line, message };
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let [id, role, score] = fields[..] else {
                return Err(parse_err(format!("expected 3 fields, found {}", fields.len())));
            };
            let role: Role = role.parse().map_err(parse_err)?;
            let value: f64 = score
                .parse()
                .map_err(|_| parse_err(format!("invalid score {score:?}")))?;
            check_unit(value).map_err(|_| ForgeError::ActualityOutOfRange { line, value })?;
            if scores.insert((id.to_string(), role), value).is_some() {
                return Err(parse_err(format!("duplicate entry for {id} {role}")));
            }
        }
        Ok(Self { scores })
    }

    pub fn load(path: &Path) -> Result<Self, ForgeError> {
        let text = fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Source of the factual-consistency scores `s_w` and `s_l`.
#[derive(Debug, Clone, PartialEq)]
pub enum ActualityProvider {
    RecordEmbedded(ActualityTable),
    FileLookup(ActualityTable),
    ConstantStub(f64),
}

impl ActualityProvider {
    pub fn constant(value: f64) -> Result<Self, ForgeError> {
        check_unit(value).map_err(|_| ForgeError::ActualityOutOfRange { line: 0, value })?;
        Ok(Self::ConstantStub(value))
    }

    fn lookup(&self, id: &str, role: Role) -> Result<f64, ForgeError> {
        let table = match self {
            Self::ConstantStub(v) => return Ok(*v),
            Self::RecordEmbedded(t) | Self::FileLookup(t) => t,
        };
        table.get(id, role).ok_or_else(|| ForgeError::ActualityMissing {
            id: id.to_string(),
            role: role.to_string(),
        })
    }
}

/// Attaches `s_w` (preferred explanation) and `s_l` (the pair's rejected
/// candidate) to every pair. A missing lookup entry is an error.
pub fn attach_actuality(pairs: Vec<ScoredPair>, provider: &ActualityProvider) -> Result<Vec<PreferencePair>, ForgeError> {
    pairs
        .into_iter()
        .map(|p| {
            let s_w = provider.lookup(&p.id, Role::Preferred)?.clamp(0.0, 1.0);
            let s_l = provider.lookup(&p.id, Role::Candidate(p.candidate))?.clamp(0.0, 1.0);
            Ok(PreferencePair::from_scored(p, s_w, s_l))
        })
        .collect()
}
