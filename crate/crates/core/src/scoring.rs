//! Coverage, consistency and their harmonic mean over a review/summary
//! similarity matrix.
//!
//! Coverage averages, over review tuples, the best similarity to any summary
//! tuple; repeated review claims therefore weigh more. Consistency is the
//! column-wise mirror: how well each summary tuple is supported by some
//! review tuple.

use serde::{Deserialize, Serialize};

use crate::embedding::{clamped_cosine, embed_with, EmbedOptions, EmbeddedFactSet, Encoder};
use crate::error::{Error, Result, Side};
use crate::extraction::{FactSet, FactTuple};

/// Pairwise similarities: rows are review tuples, columns summary tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Builds a matrix from raw values, checking shape and range.
    pub fn from_values(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if values.len() != row_labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} row labels",
                values.len(),
                row_labels.len()
            )));
        }
        for row in &values {
            if row.len() != col_labels.len() {
                return Err(Error::invalid(format!(
                    "row of length {} but {} column labels",
                    row.len(),
                    col_labels.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::invalid(format!("similarity {v} outside [0, 1]")));
            }
        }
        Ok(SimilarityMatrix {
            row_labels,
            col_labels,
            values,
        })
    }

    /// Unlabeled matrix; labels are the row/column indices.
    pub fn unlabeled(values: Vec<Vec<f64>>) -> Result<Self> {
        let cols = values.first().map(Vec::len).unwrap_or(0);
        Self::from_values(
            (0..values.len()).map(|i| i.to_string()).collect(),
            (0..cols).map(|j| j.to_string()).collect(),
            values,
        )
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn transpose(&self) -> SimilarityMatrix {
        let values = (0..self.cols())
            .map(|j| self.values.iter().map(|row| row[j]).collect())
            .collect();
        SimilarityMatrix {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            values,
        }
    }

    /// For every row, the first column holding the row maximum.
    pub fn row_best(&self) -> Vec<BestMatch> {
        self.values
            .iter()
            .map(|row| argmax(row.iter().copied()))
            .collect()
    }

    /// For every column, the first row holding the column maximum.
    pub fn col_best(&self) -> Vec<BestMatch> {
        (0..self.cols())
            .map(|j| argmax(self.values.iter().map(|row| row[j])))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestMatch {
    pub index: usize,
    pub similarity: f64,
}

fn argmax(values: impl Iterator<Item = f64>) -> BestMatch {
    let mut best = BestMatch {
        index: 0,
        similarity: f64::NEG_INFINITY,
    };
    for (i, v) in values.enumerate() {
        if v > best.similarity {
            best = BestMatch {
                index: i,
                similarity: v,
            };
        }
    }
    best
}

/// Mean that does not depend on the order of `values`: they are summed in
/// ascending order, so any permutation gives a bit-identical result.
fn order_free_mean(mut values: Vec<f64>) -> f64 {
    let n = values.len() as f64;
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / n
}

pub fn similarity_matrix(
    reviews: &EmbeddedFactSet,
    summary: &EmbeddedFactSet,
) -> Result<SimilarityMatrix> {
    if reviews.is_empty() {
        return Err(Error::EmptyExtraction(Side::Reviews));
    }
    if summary.is_empty() {
        return Err(Error::EmptyExtraction(Side::Summary));
    }
    if reviews.encoder_id() != summary.encoder_id() {
        return Err(Error::invalid(format!(
            "encoder mismatch: reviews embedded with {:?}, summary with {:?}",
            reviews.encoder_id(),
            summary.encoder_id()
        )));
    }
    if reviews.dim() != summary.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            reviews.dim(),
            summary.dim()
        )));
    }
    let values = reviews
        .vectors()
        .iter()
        .map(|r| {
            summary
                .vectors()
                .iter()
                .map(|s| clamped_cosine(r, s))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimilarityMatrix {
        row_labels: reviews.labels().to_vec(),
        col_labels: summary.labels().to_vec(),
        values,
    })
}

/// Mean over review tuples of the best similarity to any summary tuple.
pub fn coverage(matrix: &SimilarityMatrix) -> Result<f64> {
    if matrix.is_empty() {
        return Err(Error::invalid("coverage of an empty matrix"));
    }
    Ok(order_free_mean(
        matrix.row_best().iter().map(|b| b.similarity).collect(),
    ))
}

/// Mean over summary tuples of the best similarity to any review tuple.
pub fn consistency(matrix: &SimilarityMatrix) -> Result<f64> {
    if matrix.is_empty() {
        return Err(Error::invalid("consistency of an empty matrix"));
    }
    Ok(order_free_mean(
        matrix.col_best().iter().map(|b| b.similarity).collect(),
    ))
}

/// Harmonic mean of coverage and consistency; 0 when both are 0.
pub fn factsim(coverage: f64, consistency: f64) -> Result<f64> {
    for (name, v) in [("coverage", coverage), ("consistency", consistency)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
        }
    }
    if coverage == consistency {
        return Ok(coverage);
    }
    let sum = coverage + consistency;
    if sum == 0.0 {
        return Ok(0.0);
    }
    // Rounding can push the quotient a hair outside [min, max].
    let h = 2.0 * coverage * consistency / sum;
    Ok(h.clamp(coverage.min(consistency), coverage.max(consistency)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub encoder_id: String,
    pub coverage: f64,
    pub consistency: f64,
    pub factsim: f64,
    pub matrix: SimilarityMatrix,
    pub review_tuples: Vec<FactTuple>,
    pub summary_tuples: Vec<FactTuple>,
    /// Per review tuple: best summary column and its similarity.
    pub best_match_per_review_tuple: Vec<BestMatch>,
    /// Per summary tuple: best review row and its similarity.
    pub best_match_per_summary_tuple: Vec<BestMatch>,
}

impl ScoreReport {
    pub fn from_matrix(
        encoder_id: &str,
        matrix: SimilarityMatrix,
        review_tuples: Vec<FactTuple>,
        summary_tuples: Vec<FactTuple>,
    ) -> Result<Self> {
        let c = coverage(&matrix)?;
        let n = consistency(&matrix)?;
        Ok(ScoreReport {
            encoder_id: encoder_id.to_string(),
            coverage: c,
            consistency: n,
            factsim: factsim(c, n)?,
            best_match_per_review_tuple: matrix.row_best(),
            best_match_per_summary_tuple: matrix.col_best(),
            matrix,
            review_tuples,
            summary_tuples,
        })
    }
}

pub fn score_embedded(reviews: &EmbeddedFactSet, summary: &EmbeddedFactSet) -> Result<ScoreReport> {
    let matrix = similarity_matrix(reviews, summary)?;
    ScoreReport::from_matrix(
        reviews.encoder_id(),
        matrix,
        reviews.facts().tuples().to_vec(),
        summary.facts().tuples().to_vec(),
    )
}

/// Embeds both sets and scores them. Empty sets are an
/// [`Error::EmptyExtraction`], never a silent 0 or 1.
pub fn score<E: Encoder + ?Sized>(
    reviews: &FactSet,
    summary: &FactSet,
    encoder: &E,
) -> Result<ScoreReport> {
    score_with(reviews, summary, encoder, &EmbedOptions::default())
}

pub fn score_with<E: Encoder + ?Sized>(
    reviews: &FactSet,
    summary: &FactSet,
    encoder: &E,
    options: &EmbedOptions,
) -> Result<ScoreReport> {
    if reviews.is_empty() {
        return Err(Error::EmptyExtraction(Side::Reviews));
    }
    if summary.is_empty() {
        return Err(Error::EmptyExtraction(Side::Summary));
    }
    let r = embed_with(reviews, encoder, options)?;
    let s = embed_with(summary, encoder, options)?;
    score_embedded(&r, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::TestEncoder;

    fn m(values: Vec<Vec<f64>>) -> SimilarityMatrix {
        SimilarityMatrix::unlabeled(values).unwrap()
    }

    fn tuples(pairs: &[(&str, &str)]) -> FactSet {
        FactSet::from_tuples(
            pairs
                .iter()
                .map(|(s, d)| FactTuple::new(s, d).unwrap())
                .collect(),
        )
    }

    #[test]
    fn hand_arithmetic() {
        assert_eq!(coverage(&m(vec![vec![1.0]])).unwrap(), 1.0);
        assert_eq!(coverage(&m(vec![vec![1.0], vec![0.5]])).unwrap(), 0.75);
        assert_eq!(consistency(&m(vec![vec![1.0]])).unwrap(), 1.0);
        assert!((consistency(&m(vec![vec![1.0, 0.2]])).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn factsim_values() {
        assert_eq!(factsim(1.0, 1.0).unwrap(), 1.0);
        assert!((factsim(0.5, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(factsim(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(factsim(0.0, 0.7).unwrap(), 0.0);
        assert!(factsim(1.2, 0.5).is_err());
        assert!(factsim(0.5, -0.1).is_err());
        assert!(factsim(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn empty_matrix_rejected() {
        assert!(coverage(&m(vec![])).is_err());
        assert!(consistency(&m(vec![vec![]])).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(SimilarityMatrix::unlabeled(vec![vec![1.5]]).is_err());
        assert!(SimilarityMatrix::unlabeled(vec![vec![0.5, 0.1], vec![0.2]]).is_err());
    }

    #[test]
    fn transpose_swaps_roles() {
        let a = m(vec![vec![0.1, 0.9, 0.3], vec![0.4, 0.2, 0.8]]);
        let t = a.transpose();
        assert_eq!(coverage(&a).unwrap(), consistency(&t).unwrap());
        assert_eq!(consistency(&a).unwrap(), coverage(&t).unwrap());
    }

    #[test]
    fn best_matches() {
        let a = m(vec![vec![0.1, 0.9, 0.9], vec![0.4, 0.2, 0.8]]);
        let rows = a.row_best();
        assert_eq!((rows[0].index, rows[0].similarity), (1, 0.9));
        assert_eq!((rows[1].index, rows[1].similarity), (2, 0.8));
        let cols = a.col_best();
        assert_eq!(
            cols.iter().map(|b| b.index).collect::<Vec<_>>(),
            vec![1, 0, 0]
        );
    }

    #[test]
    fn identical_sets_score_one() {
        let set = tuples(&[("car", "fast"), ("seat", "soft"), ("car", "fast")]);
        let r = score(&set, &set, &TestEncoder).unwrap();
        assert_eq!((r.coverage, r.consistency, r.factsim), (1.0, 1.0, 1.0));
        assert_eq!(r.matrix.rows(), 3);
        assert_eq!(r.matrix.cols(), 3);
    }

    #[test]
    fn single_tuple_identity_matrix() {
        let set = tuples(&[("car", "fast")]);
        let r = score(&set, &set, &TestEncoder).unwrap();
        assert_eq!(r.matrix.values, vec![vec![1.0]]);
    }

    #[test]
    fn subset_summary_is_fully_consistent() {
        let reviews = tuples(&[("car", "fast"), ("seat", "soft"), ("price", "high")]);
        let summary = tuples(&[("seat", "soft")]);
        let r = score(&reviews, &summary, &TestEncoder).unwrap();
        assert_eq!(r.consistency, 1.0);
        assert!(r.coverage < 1.0);
    }

    #[test]
    fn empty_sets_are_distinct_errors() {
        let set = tuples(&[("car", "fast")]);
        assert!(matches!(
            score(&FactSet::new(1), &set, &TestEncoder),
            Err(Error::EmptyExtraction(Side::Reviews))
        ));
        assert!(matches!(
            score(&set, &FactSet::new(1), &TestEncoder),
            Err(Error::EmptyExtraction(Side::Summary))
        ));
    }

    #[test]
    fn encoder_mismatch_rejected() {
        let facts = tuples(&[("car", "fast")]);
        let a = crate::embedding::embed(&facts, &TestEncoder).unwrap();
        let b = EmbeddedFactSet::new(
            "other",
            facts.clone(),
            a.labels().to_vec(),
            a.vectors().to_vec(),
        )
        .unwrap();
        assert!(matches!(
            similarity_matrix(&a, &b),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn disjoint_trigrams_give_zero_matrix() {
        // No character trigram is shared between the two sides, and the
        // hashed buckets do not collide.
        let reviews = tuples(&[("abc", "def")]);
        let summary = tuples(&[("xyz", "uvw")]);
        let r = score(&reviews, &summary, &TestEncoder).unwrap();
        assert_eq!(r.matrix.values, vec![vec![0.0]]);
        assert_eq!(r.factsim, 0.0);
    }
}
