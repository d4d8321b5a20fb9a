use std::ops::Deref;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;
use unicode_script::{Script, UnicodeScript};

/// Ordered list of normalized text units.
///
/// Tokens are never empty. Produced by [`tokenize`], or wrapped from ids
/// that were already normalized (e.g. a vocabulary dump).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Wraps pre-normalized tokens, dropping empty strings.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(
            tokens
                .into_iter()
                .map(Into::into)
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Space-joined surface form.
    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

fn is_separator(c: char) -> bool {
    if c.is_whitespace() {
        return true;
    }
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Splits text into normalized tokens.
///
/// The input is NFC-composed, split on whitespace and Unicode punctuation,
/// and Latin-script letters are lowercased. Other scripts keep their case
/// and combining marks, so Devanagari syllables (consonant + virama + matra)
/// stay within a single token.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.nfc() {
        if is_separator(c) {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.script() == Script::Latin {
            current.extend(c.to_lowercase());
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenSequence(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text).into_inner()
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(toks("").is_empty());
        assert!(toks("  \t\n ").is_empty());
    }

    #[test]
    fn devanagari_whitespace_split() {
        assert_eq!(toks("क ख ग"), vec!["क", "ख", "ग"]);
    }

    #[test]
    fn latin_punctuation_stripped() {
        assert_eq!(toks("fake news!"), vec!["fake", "news"]);
    }

    #[test]
    fn decomposed_input_is_composed() {
        // "é" as e + combining acute
        assert_eq!(toks("Cafe\u{301}"), vec!["café"]);
        // क़ is a composition exclusion; NFC maps both spellings to क + nukta
        assert_eq!(toks("\u{915}\u{93C}"), toks("\u{958}"));
    }
}
