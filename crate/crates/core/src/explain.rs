//! Post-hoc reports over a score: how often each review claim recurs, which
//! claims the summary missed, which summary claims lack support, and the
//! similarity matrix in plottable form.

use serde::{Deserialize, Serialize};

use crate::embedding::{clamped_cosine, EmbeddedFactSet};
use crate::error::{Error, Result};
use crate::extraction::FactTuple;
use crate::scoring::{ScoreReport, SimilarityMatrix};

/// Threshold below which a claim counts as unmatched.
pub const DEFAULT_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMember {
    pub tuple_index: usize,
    pub source: usize,
}

/// Review claims grouped around their first occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCluster {
    pub representative: FactTuple,
    pub members: Vec<ClusterMember>,
    pub frequency: usize,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "threshold {threshold} outside (0, 1]"
        )))
    }
}

/// Single greedy pass in tuple order: a tuple joins the first cluster whose
/// representative is at least `threshold` similar, or starts a new one.
/// Clusters come back by descending frequency, ties in order of creation.
pub fn cluster_claims(reviews: &EmbeddedFactSet, threshold: f64) -> Result<Vec<ClaimCluster>> {
    check_threshold(threshold)?;
    let facts = reviews.facts();
    let vectors = reviews.vectors();
    // (index of representative tuple, cluster)
    let mut clusters: Vec<(usize, ClaimCluster)> = Vec::new();
    for (i, (tuple, source)) in facts.iter().enumerate() {
        let member = ClusterMember {
            tuple_index: i,
            source,
        };
        let mut joined = false;
        for (rep, cluster) in clusters.iter_mut() {
            if clamped_cosine(&vectors[*rep], &vectors[i])? >= threshold {
                cluster.members.push(member.clone());
                cluster.frequency += 1;
                joined = true;
                break;
            }
        }
        if !joined {
            clusters.push((
                i,
                ClaimCluster {
                    representative: tuple.clone(),
                    members: vec![member],
                    frequency: 1,
                },
            ));
        }
    }
    let mut clusters: Vec<ClaimCluster> = clusters.into_iter().map(|(_, c)| c).collect();
    clusters.sort_by_key(|c| std::cmp::Reverse(c.frequency));
    Ok(clusters)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncoveredClaim {
    pub tuple: FactTuple,
    pub best_similarity: f64,
    /// Size of the cluster the claim belongs to.
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnsupportedClaim {
    pub tuple: FactTuple,
    pub best_similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageFindings {
    pub threshold: f64,
    pub uncovered_review_claims: Vec<UncoveredClaim>,
    pub unsupported_summary_claims: Vec<UnsupportedClaim>,
}

/// Lists distinct review claims whose best summary match is below
/// `threshold`, most frequent first, and distinct summary claims with no
/// review match at or above it.
pub fn coverage_findings(
    report: &ScoreReport,
    clusters: &[ClaimCluster],
    threshold: f64,
) -> Result<CoverageFindings> {
    check_threshold(threshold)?;
    let n = report.review_tuples.len();
    if report.best_match_per_review_tuple.len() != n
        || report.best_match_per_summary_tuple.len() != report.summary_tuples.len()
    {
        return Err(Error::invalid("score report is internally inconsistent"));
    }
    let mut frequency = vec![1usize; n];
    let mut covered_by_clusters = 0;
    for c in clusters {
        for m in &c.members {
            if m.tuple_index >= n {
                return Err(Error::invalid(
                    "clusters were built from a different review set than the report",
                ));
            }
            frequency[m.tuple_index] = c.frequency;
            covered_by_clusters += 1;
        }
    }
    if !clusters.is_empty() && covered_by_clusters != n {
        return Err(Error::invalid(
            "clusters were built from a different review set than the report",
        ));
    }

    let mut uncovered: Vec<UncoveredClaim> = Vec::new();
    for (i, best) in report.best_match_per_review_tuple.iter().enumerate() {
        let tuple = &report.review_tuples[i];
        if best.similarity < threshold && !uncovered.iter().any(|u| &u.tuple == tuple) {
            uncovered.push(UncoveredClaim {
                tuple: tuple.clone(),
                best_similarity: best.similarity,
                frequency: frequency[i],
            });
        }
    }
    uncovered.sort_by_key(|u| std::cmp::Reverse(u.frequency));

    let mut unsupported: Vec<UnsupportedClaim> = Vec::new();
    for (j, best) in report.best_match_per_summary_tuple.iter().enumerate() {
        let tuple = &report.summary_tuples[j];
        if best.similarity < threshold && !unsupported.iter().any(|u| &u.tuple == tuple) {
            unsupported.push(UnsupportedClaim {
                tuple: tuple.clone(),
                best_similarity: best.similarity,
            });
        }
    }

    Ok(CoverageFindings {
        threshold,
        uncovered_review_claims: uncovered,
        unsupported_summary_claims: unsupported,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::invalid(format!(
                "unsupported export format {other:?} (expected csv or json)"
            ))),
        }
    }
}

impl ExportFormat {
    /// Picks the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| {
                Error::invalid(format!("cannot infer export format of {}", path.display()))
            })?
            .parse()
    }
}

/// Serializes the labeled matrix. CSV: the first row holds the summary tuple
/// labels after an empty corner cell; each following row starts with its
/// review tuple label.
pub fn export_matrix(report: &ScoreReport, format: ExportFormat) -> Result<Vec<u8>> {
    export_similarity_matrix(&report.matrix, format)
}

pub fn export_similarity_matrix(
    matrix: &SimilarityMatrix,
    format: ExportFormat,
) -> Result<Vec<u8>> {
    match format {
        ExportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(matrix)?;
            out.push(b'\n');
            Ok(out)
        }
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec![String::new()];
            header.extend(matrix.col_labels.iter().cloned());
            w.write_record(&header)?;
            for (label, row) in matrix.row_labels.iter().zip(&matrix.values) {
                let mut record = vec![label.clone()];
                record.extend(row.iter().map(|v| v.to_string()));
                w.write_record(&record)?;
            }
            w.into_inner()
                .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
        }
    }
}
