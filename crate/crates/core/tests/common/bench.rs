use std::collections::BTreeMap;

use factsim::benchmark::{BenchmarkSample, Dimension, HumanScores, SummaryScorer};
use factsim::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `systems` x `samples` dataset with random integer ratings on a 1..=5
/// scale, so ties occur.
pub fn synthetic_dataset(systems: usize, samples: usize, seed: u64) -> Vec<BenchmarkSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|s| {
            let mut summaries = BTreeMap::new();
            let mut human = BTreeMap::new();
            for k in 0..systems {
                let name = format!("sys{k}");
                summaries.insert(name.clone(), format!("summary {k} for sample {s}"));
                let mut r = || rng.random_range(1..=5) as f64;
                human.insert(
                    name,
                    HumanScores {
                        aspect_relevance: r(),
                        self_coherence: r(),
                        sentiment_consistency: r(),
                        readability: r(),
                    },
                );
            }
            BenchmarkSample {
                sample_id: format!("s{s}"),
                reviews: vec![format!("review text for sample {s}")],
                system_summaries: summaries,
                human_scores: human,
            }
        })
        .collect()
}

/// Scores each cell with its own human rating on one dimension, times `sign`.
pub struct HumanEcho {
    pub dimension: Dimension,
    pub sign: f64,
}

impl SummaryScorer for HumanEcho {
    fn name(&self) -> &str {
        "human-echo"
    }

    fn score(&self, sample: &BenchmarkSample, system: &str, _: &str) -> Result<f64> {
        Ok(self.sign * sample.human_scores[system].get(self.dimension))
    }
}

/// Looks scores up by (sample_id, system).
pub struct Table(pub BTreeMap<(String, String), f64>);

impl SummaryScorer for Table {
    fn name(&self) -> &str {
        "table"
    }

    fn score(&self, sample: &BenchmarkSample, system: &str, _: &str) -> Result<f64> {
        Ok(self.0[&(sample.sample_id.clone(), system.to_string())])
    }
}

/// Two samples, three systems. Aspect relevance ratings and metric scores:
///
/// | sample | system | metric | human |
/// |--------|--------|--------|-------|
/// | p      | A      | 0.9    | 3     |
/// | p      | B      | 0.3    | 2     |
/// | p      | C      | 0.1    | 1     |
/// | q      | A      | 0.2    | 2     |
/// | q      | B      | 0.6    | 3     |
/// | q      | C      | 0.4    | 1     |
///
/// By hand:
/// - sample p: all three pairs concordant, tau = 1.
/// - sample q: AB concordant, AC discordant, BC concordant, tau = 1/3.
/// - summary level: mean(1, 1/3) = 2/3.
/// - system means: metric A 0.55, B 0.45, C 0.25; human A 2.5, B 2.5, C 1.5.
///   AB is tied in human only; AC and BC are concordant.
/// - tau-b = 2 / sqrt(3 * 2) = 2/sqrt(6); tau-a = 2/3.
pub fn three_system_fixture() -> (Vec<BenchmarkSample>, Table) {
    let rows = [
        ("p", "A", 0.9, 3.0),
        ("p", "B", 0.3, 2.0),
        ("p", "C", 0.1, 1.0),
        ("q", "A", 0.2, 2.0),
        ("q", "B", 0.6, 3.0),
        ("q", "C", 0.4, 1.0),
    ];
    let mut samples: BTreeMap<&str, BenchmarkSample> = BTreeMap::new();
    let mut table = BTreeMap::new();
    for (sample, system, metric, human) in rows {
        let entry = samples.entry(sample).or_insert_with(|| BenchmarkSample {
            sample_id: sample.to_string(),
            reviews: vec!["r".into()],
            system_summaries: BTreeMap::new(),
            human_scores: BTreeMap::new(),
        });
        entry
            .system_summaries
            .insert(system.into(), format!("{system} summary"));
        entry.human_scores.insert(
            system.into(),
            HumanScores {
                aspect_relevance: human,
                ..HumanScores::uniform(1.0)
            },
        );
        table.insert((sample.to_string(), system.to_string()), metric);
    }
    (samples.into_values().collect(), Table(table))
}
