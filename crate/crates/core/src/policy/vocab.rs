use std::collections::HashMap;

use crate::textmetrics::TokenSequence;

use super::PolicyError;

pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";

/// Ordered, duplicate-free token inventory. Index 0 is BOS and index 1 is EOS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub const BOS_ID: usize = 0;
    pub const EOS_ID: usize = 1;

    /// Builds a vocabulary from ordinary tokens; BOS/EOS are prepended and
    /// duplicates keep their first position.
    pub fn new<I, S>(tokens: I) -> Result<Self, PolicyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for t in [BOS.to_string(), EOS.to_string()]
            .into_iter()
            .chain(tokens.into_iter().map(Into::into))
        {
            if t.is_empty() || vocab.index.contains_key(&t) {
                continue;
            }
            vocab.index.insert(t.clone(), vocab.tokens.len());
            vocab.tokens.push(t);
        }
        if vocab.tokens.len() < 3 {
            return Err(PolicyError::VocabularyTooSmall(vocab.tokens.len()));
        }
        Ok(vocab)
    }

    /// Sorted union of all tokens in `sequences`.
    pub fn from_sequences<'a, I>(sequences: I) -> Result<Self, PolicyError>
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        let mut all: Vec<&str> = sequences
            .into_iter()
            .flat_map(|s| s.iter().map(String::as_str))
            .collect();
        all.sort_unstable();
        all.dedup();
        Self::new(all)
    }

    /// Restores a vocabulary from its full token list (reserved tokens first).
    pub fn from_full_list(tokens: Vec<String>) -> Result<Self, PolicyError> {
        if tokens.first().map(String::as_str) != Some(BOS)
            || tokens.get(1).map(String::as_str) != Some(EOS)
        {
            return Err(PolicyError::Format(
                "vocabulary must start with the reserved BOS and EOS tokens".into(),
            ));
        }
        let n = tokens.len();
        let vocab = Self::new(tokens.into_iter().skip(2))?;
        if vocab.len() != n {
            return Err(PolicyError::Format("vocabulary contains duplicate tokens".into()));
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn encode(&self, seq: &TokenSequence) -> Result<Vec<usize>, PolicyError> {
        seq.iter()
            .map(|t| self.id(t).ok_or_else(|| PolicyError::OutOfVocabulary(t.clone())))
            .collect()
    }

    /// Encodes a response and terminates it with EOS.
    pub fn encode_response(&self, seq: &TokenSequence) -> Result<Vec<usize>, PolicyError> {
        let mut ids = self.encode(seq)?;
        ids.push(Self::EOS_ID);
        Ok(ids)
    }

    /// Maps ids back to text tokens, dropping BOS/EOS.
    pub fn decode(&self, ids: &[usize]) -> TokenSequence {
        TokenSequence::from_tokens(
            ids.iter()
                .filter(|&&id| id != Self::BOS_ID && id != Self::EOS_ID)
                .filter_map(|&id| self.token(id)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmetrics::tokenize;

    #[test]
    fn reserved_tokens_first() {
        let v = Vocabulary::new(["a", "b", "a"]).unwrap();
        assert_eq!(v.tokens(), &["<bos>", "<eos>", "a", "b"]);
        assert_eq!(v.id("b"), Some(3));
        assert_eq!(v.token(1), Some(EOS));
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            Vocabulary::new(Vec::<String>::new()),
            Err(PolicyError::VocabularyTooSmall(2))
        ));
    }

    #[test]
    fn encode_decode() {
        let v = Vocabulary::new(["क", "ख"]).unwrap();
        let ids = v.encode_response(&tokenize("क ख क")).unwrap();
        assert_eq!(ids, vec![2, 3, 2, 1]);
        assert_eq!(v.decode(&ids).join(), "क ख क");
        assert!(matches!(
            v.encode(&tokenize("ग")),
            Err(PolicyError::OutOfVocabulary(t)) if t == "ग"
        ));
    }

    #[test]
    fn full_list_round_trip() {
        let v = Vocabulary::new(["x", "y"]).unwrap();
        assert_eq!(Vocabulary::from_full_list(v.tokens().to_vec()).unwrap(), v);
        assert!(Vocabulary::from_full_list(vec!["x".into(), "y".into(), "z".into()]).is_err());
        assert!(Vocabulary::from_full_list(
            vec![BOS.into(), EOS.into(), "x".into(), "x".into()]
        )
        .is_err());
    }
}
