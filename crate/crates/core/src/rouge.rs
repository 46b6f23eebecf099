//! ROUGE-N and ROUGE-L F1 scores.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Lower-cased alphanumeric word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    /// Splits on runs of non-alphanumeric characters and lower-cases.
    pub fn tokenize(text: &str) -> Self {
        TokenSequence {
            tokens: text
                .split(|c: char| !c.is_alphanumeric())
                .filter(|t| !t.is_empty())
                .map(str::to_lowercase)
                .collect(),
        }
    }

    pub fn from_tokens<I: IntoIterator<Item = S>, S: Into<String>>(tokens: I) -> Self {
        TokenSequence {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl From<&str> for TokenSequence {
    fn from(text: &str) -> Self {
        TokenSequence::tokenize(text)
    }
}

fn f1(overlap: usize, candidate_total: usize, reference_total: usize) -> f64 {
    if overlap == 0 || candidate_total == 0 || reference_total == 0 {
        return 0.0;
    }
    let p = overlap as f64 / candidate_total as f64;
    let r = overlap as f64 / reference_total as f64;
    2.0 * p * r / (p + r)
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// F1 of clipped n-gram overlap. `n` must be at least 1; `n == 0` scores 0.
pub fn rouge_n(reference: &TokenSequence, candidate: &TokenSequence, n: usize) -> f64 {
    let r = ngram_counts(&reference.tokens, n);
    let c = ngram_counts(&candidate.tokens, n);
    let overlap: usize = c
        .iter()
        .map(|(gram, &count)| count.min(r.get(gram).copied().unwrap_or(0)))
        .sum();
    f1(overlap, c.values().sum(), r.values().sum())
}

/// Length of the longest common subsequence, in O(|a|·|b|) time and
/// O(min(|a|, |b|)) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    const STACK: usize = 64;
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.len() < STACK {
        let mut row = [0usize; STACK];
        lcs_row(long, short, &mut row[..=short.len()])
    } else {
        lcs_row(long, short, &mut vec![0usize; short.len() + 1])
    }
}

fn lcs_row<T: PartialEq>(long: &[T], short: &[T], row: &mut [usize]) -> usize {
    for x in long {
        // row[j] before it is overwritten: the previous row's value
        let mut diag = 0;
        for (j, y) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { row[j].max(up) };
            diag = up;
        }
    }
    row[short.len()]
}

/// F1 from the longest common subsequence.
pub fn rouge_l(reference: &TokenSequence, candidate: &TokenSequence) -> f64 {
    let l = lcs_len(&reference.tokens, &candidate.tokens);
    f1(l, candidate.len(), reference.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub r1: f64,
    pub r2: f64,
    pub rl: f64,
}

pub fn rouge_all(reference: &str, candidate: &str) -> RougeScores {
    let r = TokenSequence::tokenize(reference);
    let c = TokenSequence::tokenize(candidate);
    RougeScores {
        r1: rouge_n(&r, &c, 1),
        r2: rouge_n(&r, &c, 2),
        rl: rouge_l(&r, &c),
    }
}
