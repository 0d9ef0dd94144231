//! Report preprocessing: header stripping, tokenization, negation-preserving
//! stopword removal, and optional rule-based stemming.
//!
//! The stopword list and default header patterns are fixed data files shipped
//! with the crate (`data/stopwords.txt`, `data/header_patterns.txt`) so that
//! token output is stable across builds.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const STOPWORDS_RAW: &str = include_str!("../data/stopwords.txt");
const HEADER_PATTERNS_RAW: &str = include_str!("../data/header_patterns.txt");

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_RAW.lines().filter(|l| !l.is_empty()).collect())
}

/// Default header patterns, one per data-file line.
pub fn default_header_patterns() -> Vec<String> {
    HEADER_PATTERNS_RAW
        .lines()
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Preprocessing pipeline configuration.
///
/// `negation_keep_list` exempts tokens from stopword removal; the defaults
/// cover the negations that carry diagnostic signal in report text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    pub strip_headers: bool,
    pub lowercase: bool,
    pub remove_stopwords: bool,
    pub negation_keep_list: Vec<String>,
    pub stem: bool,
    /// Literal header lines to drop (compared case-insensitively against the
    /// trimmed line).
    pub header_patterns: Vec<String>,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            strip_headers: true,
            lowercase: true,
            remove_stopwords: true,
            negation_keep_list: vec![
                "no".into(),
                "not".into(),
                "without".into(),
                "cannot".into(),
            ],
            stem: true,
            header_patterns: default_header_patterns(),
        }
    }
}

/// Run the full preprocessing pipeline over one report.
///
/// Stages, in order: header-line removal, lowercasing, tokenization into
/// alphanumeric runs (underscore de-identification blanks fall out as
/// separators), stopword removal with the negation keep-list exempt, and
/// optional stemming.
pub fn preprocess(text: &str, config: &PrepConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    for line in text.lines() {
        if config.strip_headers {
            let trimmed = line.trim();
            if config
                .header_patterns
                .iter()
                .any(|p| trimmed.eq_ignore_ascii_case(p))
            {
                continue;
            }
        }
        for raw in line
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            let token = if config.lowercase {
                raw.to_lowercase()
            } else {
                raw.to_string()
            };
            tokens.push(token);
        }
    }

    if config.remove_stopwords {
        tokens.retain(|t| {
            let lower = t.to_lowercase();
            !stopword_set().contains(lower.as_str())
                || config.negation_keep_list.contains(&lower)
        });
    }

    if config.stem {
        for t in &mut tokens {
            *t = stem(t);
        }
    }

    tokens
}

/// Rule-based suffix stripping, iterated to a fixed point (hence idempotent).
///
/// Tokens of three characters or fewer are returned unchanged. This is a
/// deliberately small, dictionary-free substitute for lemmatisation.
pub fn stem(token: &str) -> String {
    let mut current = token.to_string();
    if current.chars().count() <= 3 {
        return current;
    }
    loop {
        let next = stem_once(&current);
        if next == current {
            return current;
        }
        current = next;
        if current.chars().count() <= 3 {
            return current;
        }
    }
}

fn stem_once(token: &str) -> String {
    if let Some(stem) = token.strip_suffix("ies") {
        if stem.len() >= 3 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = token.strip_suffix("sses") {
        if stem.len() >= 2 {
            return format!("{stem}ss");
        }
    }
    if let Some(stem) = token.strip_suffix('s') {
        if stem.len() >= 3
            && !token.ends_with("ss")
            && !token.ends_with("us")
            && !token.ends_with("is")
        {
            return stem.to_string();
        }
    }
    if let Some(stem) = token.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return stem.to_string();
        }
    }
    if let Some(stem) = token.strip_suffix("ed") {
        if stem.len() >= 3 && has_vowel(stem) {
            return stem.to_string();
        }
    }
    if let Some(stem) = token.strip_suffix("ly") {
        if stem.len() >= 3 && has_vowel(stem) {
            return stem.to_string();
        }
    }
    token.to_string()
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}
