//! Correlation of automatic scores with human judgments.
//!
//! System level: one point per system, pairing its mean metric score with its
//! mean human rating over the samples where it was scored. Summary level: the
//! per-sample tau across systems, averaged over samples where it is defined.

mod kendall;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use kendall::{kendall_tau, kendall_tau_variant, pair_counts, PairCounts, TauVariant};

use crate::embedding::{embed_with, EmbedOptions, EmbeddedFactSet, Encoder};
use crate::error::{Error, Result};
use crate::extraction::{ChatProvider, Extractor};
use crate::rouge::{rouge_l, rouge_n, TokenSequence};
use crate::scoring::score_embedded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    AspectRelevance,
    SelfCoherence,
    SentimentConsistency,
    Readability,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::AspectRelevance,
        Dimension::SelfCoherence,
        Dimension::SentimentConsistency,
        Dimension::Readability,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Dimension::AspectRelevance => "asp_rel",
            Dimension::SelfCoherence => "sel_coh",
            Dimension::SentimentConsistency => "sen_con",
            Dimension::Readability => "read",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanScores {
    pub aspect_relevance: f64,
    pub self_coherence: f64,
    pub sentiment_consistency: f64,
    pub readability: f64,
}

impl HumanScores {
    pub fn get(&self, d: Dimension) -> f64 {
        match d {
            Dimension::AspectRelevance => self.aspect_relevance,
            Dimension::SelfCoherence => self.self_coherence,
            Dimension::SentimentConsistency => self.sentiment_consistency,
            Dimension::Readability => self.readability,
        }
    }

    /// The same value on every dimension.
    pub fn uniform(v: f64) -> Self {
        HumanScores {
            aspect_relevance: v,
            self_coherence: v,
            sentiment_consistency: v,
            readability: v,
        }
    }
}

/// One product: its source reviews, each system's summary, and the human
/// ratings of those summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSample {
    pub sample_id: String,
    pub reviews: Vec<String>,
    pub system_summaries: BTreeMap<String, String>,
    pub human_scores: BTreeMap<String, HumanScores>,
}

impl BenchmarkSample {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.sample_id.is_empty() {
            return Err("sample_id is empty".into());
        }
        if self.reviews.is_empty() {
            return Err(format!("sample {:?} has no reviews", self.sample_id));
        }
        for (system, scores) in &self.human_scores {
            if !self.system_summaries.contains_key(system) {
                return Err(format!(
                    "sample {:?}: system {system:?} has human scores but no summary",
                    self.sample_id
                ));
            }
            if Dimension::ALL.iter().any(|&d| !scores.get(d).is_finite()) {
                return Err(format!(
                    "sample {:?}: system {system:?} has a non-finite human score",
                    self.sample_id
                ));
            }
        }
        Ok(())
    }
}

/// Reads a JSONL dataset, one sample per non-blank line.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<BenchmarkSample>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let schema = |line: usize, message: String| Error::Schema {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut samples = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: BenchmarkSample =
            serde_json::from_str(&line).map_err(|e| schema(line_no, e.to_string()))?;
        sample.validate().map_err(|m| schema(line_no, m))?;
        if !seen.insert(sample.sample_id.clone()) {
            return Err(schema(
                line_no,
                format!("duplicate sample_id {:?}", sample.sample_id),
            ));
        }
        samples.push(sample);
    }
    Ok(samples)
}

/// Scores one system's summary for one sample.
pub trait SummaryScorer {
    fn name(&self) -> &str;
    fn score(&self, sample: &BenchmarkSample, system: &str, summary: &str) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RougeVariant {
    #[serde(rename = "rouge-1")]
    Rouge1,
    #[serde(rename = "rouge-2")]
    Rouge2,
    #[serde(rename = "rouge-l")]
    RougeL,
}

/// Reference-free ROUGE: the summary against all reviews concatenated.
#[derive(Debug, Clone, Copy)]
pub struct RougeScorer(pub RougeVariant);

impl SummaryScorer for RougeScorer {
    fn name(&self) -> &str {
        match self.0 {
            RougeVariant::Rouge1 => "rouge-1",
            RougeVariant::Rouge2 => "rouge-2",
            RougeVariant::RougeL => "rouge-l",
        }
    }

    fn score(&self, sample: &BenchmarkSample, _: &str, summary: &str) -> Result<f64> {
        let reference = TokenSequence::tokenize(&sample.reviews.join(" "));
        let candidate = TokenSequence::tokenize(summary);
        Ok(match self.0 {
            RougeVariant::Rouge1 => rouge_n(&reference, &candidate, 1),
            RougeVariant::Rouge2 => rouge_n(&reference, &candidate, 2),
            RougeVariant::RougeL => rouge_l(&reference, &candidate),
        })
    }
}

/// FactSim with review tuples extracted and embedded once per sample.
pub struct FactSimScorer<P, E> {
    extractor: Extractor<P>,
    encoder: E,
    options: EmbedOptions,
    reviews: Mutex<HashMap<String, EmbeddedFactSet>>,
}

impl<P: ChatProvider, E: Encoder> FactSimScorer<P, E> {
    pub fn new(extractor: Extractor<P>, encoder: E, options: EmbedOptions) -> Self {
        FactSimScorer {
            extractor,
            encoder,
            options,
            reviews: Mutex::new(HashMap::new()),
        }
    }

    fn review_facts(&self, sample: &BenchmarkSample) -> Result<EmbeddedFactSet> {
        if let Some(hit) = self
            .reviews
            .lock()
            .expect("poisoned")
            .get(&sample.sample_id)
        {
            return Ok(hit.clone());
        }
        let facts = self.extractor.extract_facts(&sample.reviews)?.facts;
        let embedded = embed_with(&facts, &self.encoder, &self.options)?;
        self.reviews
            .lock()
            .expect("poisoned")
            .insert(sample.sample_id.clone(), embedded.clone());
        Ok(embedded)
    }
}

impl<P: ChatProvider, E: Encoder> SummaryScorer for FactSimScorer<P, E> {
    fn name(&self) -> &str {
        "factsim"
    }

    fn score(&self, sample: &BenchmarkSample, _: &str, summary: &str) -> Result<f64> {
        let reviews = self.review_facts(sample)?;
        let facts = self.extractor.extract_facts(&[summary])?.facts;
        let embedded = embed_with(&facts, &self.encoder, &self.options)?;
        Ok(score_embedded(&reviews, &embedded)?.factsim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BenchOptions {
    pub tau: TauVariant,
    /// Score to use when extraction yields no tuples. `None` skips the cell.
    pub empty_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub sample_id: String,
    pub system: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionCorrelation {
    pub dimension: Dimension,
    pub system_level_tau: Option<f64>,
    pub summary_level_tau: Option<f64>,
    pub summary_level_samples_used: usize,
    /// Samples where the per-sample tau was undefined or had < 2 systems.
    pub summary_level_samples_skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub tool_version: String,
    pub metric: String,
    pub tau_variant: TauVariant,
    pub samples: usize,
    pub systems: usize,
    pub cells_scored: usize,
    pub dimensions: Vec<DimensionCorrelation>,
    pub skipped_cells: Vec<SkippedCell>,
    pub notes: Vec<String>,
}

impl CorrelationReport {
    pub fn dimension(&self, d: Dimension) -> Option<&DimensionCorrelation> {
        self.dimensions.iter().find(|c| c.dimension == d)
    }

    /// One row per metric, two columns (system, summary) per dimension.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["metric".to_string()];
        let mut row = vec![self.metric.clone()];
        let fmt = |v: Option<f64>| v.map(|t| format!("{t:.4}")).unwrap_or_default();
        for d in &self.dimensions {
            header.push(format!("{}_sys", d.dimension.short_name()));
            header.push(format!("{}_sum", d.dimension.short_name()));
            row.push(fmt(d.system_level_tau));
            row.push(fmt(d.summary_level_tau));
        }
        w.write_record(&header)?;
        w.write_record(&row)?;
        w.into_inner()
            .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
    }
}

struct Cell {
    sample: usize,
    system: String,
    metric: f64,
    human: HumanScores,
}

/// Scores every (sample, system) cell and correlates with human ratings.
///
/// Failed cells are listed in the report and left out of the correlations.
pub fn evaluate_benchmark<S: SummaryScorer + ?Sized>(
    samples: &[BenchmarkSample],
    scorer: &S,
    options: &BenchOptions,
) -> Result<CorrelationReport> {
    let mut cells = Vec::new();
    let mut skipped = Vec::new();
    for (si, sample) in samples.iter().enumerate() {
        for (system, human) in &sample.human_scores {
            let summary = &sample.system_summaries[system];
            let result = match scorer.score(sample, system, summary) {
                Err(e) if matches!(e.root(), Error::EmptyExtraction(_)) => {
                    options.empty_floor.ok_or(e)
                }
                other => other,
            };
            match result {
                Ok(metric) if metric.is_finite() => cells.push(Cell {
                    sample: si,
                    system: system.clone(),
                    metric,
                    human: *human,
                }),
                Ok(metric) => skipped.push(SkippedCell {
                    sample_id: sample.sample_id.clone(),
                    system: system.clone(),
                    reason: format!("non-finite score {metric}"),
                }),
                Err(e) => {
                    log::warn!("{} / {system}: {e}", sample.sample_id);
                    skipped.push(SkippedCell {
                        sample_id: sample.sample_id.clone(),
                        system: system.clone(),
                        reason: e.to_string(),
                    })
                }
            }
        }
    }

    let mut notes = Vec::new();

    // system level: per-system means over surviving cells, in sample order
    let mut by_system: BTreeMap<&str, Vec<&Cell>> = BTreeMap::new();
    for c in &cells {
        by_system.entry(c.system.as_str()).or_default().push(c);
    }
    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        sum / n as f64
    };
    let system_metric: Vec<f64> = by_system
        .values()
        .map(|cs| mean(&mut cs.iter().map(|c| c.metric)))
        .collect();

    // summary level: cells grouped per sample, systems in name order
    let mut by_sample: BTreeMap<usize, Vec<&Cell>> = BTreeMap::new();
    for c in &cells {
        by_sample.entry(c.sample).or_default().push(c);
    }

    let mut dimensions = Vec::new();
    for d in Dimension::ALL {
        let system_human: Vec<f64> = by_system
            .values()
            .map(|cs| mean(&mut cs.iter().map(|c| c.human.get(d))))
            .collect();
        let system_level_tau = if system_metric.len() < 2 {
            None
        } else {
            match kendall_tau_variant(&system_metric, &system_human, options.tau) {
                Ok(t) => Some(t),
                Err(e) => {
                    notes.push(format!(
                        "{}: system-level tau undefined: {e}",
                        d.short_name()
                    ));
                    None
                }
            }
        };

        let mut taus = Vec::new();
        let mut sample_skips = samples.len() - by_sample.len();
        for cs in by_sample.values() {
            let m: Vec<f64> = cs.iter().map(|c| c.metric).collect();
            let h: Vec<f64> = cs.iter().map(|c| c.human.get(d)).collect();
            match kendall_tau_variant(&m, &h, options.tau) {
                Ok(t) => taus.push(t),
                Err(_) => sample_skips += 1,
            }
        }
        let summary_level_tau =
            (!taus.is_empty()).then(|| taus.iter().sum::<f64>() / taus.len() as f64);

        dimensions.push(DimensionCorrelation {
            dimension: d,
            system_level_tau,
            summary_level_tau,
            summary_level_samples_used: taus.len(),
            summary_level_samples_skipped: sample_skips,
        });
    }
    if system_metric.len() < 2 {
        notes.push("fewer than two systems scored; no system-level correlation".into());
    }

    Ok(CorrelationReport {
        tool_version: crate::TOOL_VERSION.to_string(),
        metric: scorer.name().to_string(),
        tau_variant: options.tau,
        samples: samples.len(),
        systems: by_system.len(),
        cells_scored: cells.len(),
        dimensions,
        skipped_cells: skipped,
        notes,
    })
}
