use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BigramPolicy, Policy, PolicyError, Vocabulary};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// On-disk JSON layout: format version, full vocabulary (BOS and EOS first)
/// and the logit table as a list of rows.
#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    vocab: Vec<String>,
    logits: Vec<Vec<f64>>,
}

pub fn save_checkpoint(policy: &BigramPolicy, path: &Path) -> Result<(), PolicyError> {
    let n = policy.vocab().len();
    let file = CheckpointFile {
        format_version: CHECKPOINT_FORMAT_VERSION,
        vocab: policy.vocab().tokens().to_vec(),
        logits: (0..n).map(|r| policy.row(r).to_vec()).collect(),
    };
    let mut text = serde_json::to_string(&file).map_err(|e| PolicyError::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|source| PolicyError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<BigramPolicy, PolicyError> {
    let text = fs::read_to_string(path).map_err(|source| PolicyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| PolicyError::Format(format!("{}: {e}", path.display())))?;
    if file.format_version != CHECKPOINT_FORMAT_VERSION {
        return Err(PolicyError::Format(format!(
            "unsupported checkpoint version {}",
            file.format_version
        )));
    }
    let vocab = Vocabulary::from_full_list(file.vocab)?;
    let n = vocab.len();
    if file.logits.len() != n || file.logits.iter().any(|row| row.len() != n) {
        return Err(PolicyError::Format(format!("logit table is not {n} x {n}")));
    }
    BigramPolicy::from_logits(vocab, file.logits.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Init;

    #[test]
    fn round_trip_is_exact() {
        let v = Vocabulary::new(["क", "ख", "x"]).unwrap();
        let p = BigramPolicy::new(v, Init::Noise { std: 1.3, seed: 11 }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        save_checkpoint(&p, &path).unwrap();
        let q = load_checkpoint(&path).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_bad_version_and_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, r#"{"format_version":2,"vocab":["<bos>","<eos>","a"],"logits":[]}"#).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(PolicyError::Format(_))));
        fs::write(&path, r#"{"format_version":1,"vocab":["<bos>","<eos>","a"],"logits":[[0,0,0]]}"#).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(PolicyError::Format(_))));
        assert!(matches!(
            load_checkpoint(&dir.path().join("missing.json")),
            Err(PolicyError::Io { .. })
        ));
    }
}
