use factsim::embedding::TestEncoder;
use factsim::extraction::{FactSet, FactTuple};
use factsim::scoring::score;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tuple;

const SUBJECTS: &[&str] = &[
    "car", "seat", "engine", "price", "battery", "screen", "shoes", "service",
];
const DESCRIPTIONS: &[&str] = &[
    "fast",
    "slow",
    "quick",
    "cheap",
    "expensive",
    "soft",
    "hard",
    "bright",
    "dim",
    "great",
    "bad",
    "comfortable",
    "loud",
    "reliable",
];

pub fn random_set(rng: &mut impl Rng, max: usize) -> FactSet {
    let n = rng.random_range(1..=max);
    FactSet::from_tuples(
        (0..n)
            .map(|_| {
                let s = SUBJECTS[rng.random_range(0..SUBJECTS.len())];
                let d = DESCRIPTIONS[rng.random_range(0..DESCRIPTIONS.len())];
                tuple(s, d)
            })
            .collect(),
    )
}

pub fn shuffled(set: &FactSet, rng: &mut impl Rng) -> FactSet {
    let mut t: Vec<FactTuple> = set.tuples().to_vec();
    t.shuffle(rng);
    FactSet::from_tuples(t)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

/// Checks range, exact symmetry, identity, bit-exact permutation invariance,
/// the harmonic-mean sandwich and coverage monotonicity on `cases` random
/// pairs with the test encoder.
pub fn check_metric_laws(cases: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let a = random_set(&mut rng, 8);
        let b = random_set(&mut rng, 8);
        let ab = score(&a, &b, &TestEncoder).map_err(|e| e.to_string())?;
        let ba = score(&b, &a, &TestEncoder).map_err(|e| e.to_string())?;

        for v in [ab.coverage, ab.consistency, ab.factsim] {
            ensure!((0.0..=1.0).contains(&v), "case {case}: {v} out of range");
        }
        ensure!(
            ab.factsim.to_bits() == ba.factsim.to_bits(),
            "case {case}: asymmetric"
        );
        ensure!(
            ab.coverage.to_bits() == ba.consistency.to_bits(),
            "case {case}: coverage/consistency swap"
        );

        let lo = ab.coverage.min(ab.consistency);
        let hi = ab.coverage.max(ab.consistency);
        ensure!(
            lo <= ab.factsim && ab.factsim <= hi,
            "case {case}: outside [{lo}, {hi}]"
        );

        let p = score(
            &shuffled(&a, &mut rng),
            &shuffled(&b, &mut rng),
            &TestEncoder,
        )
        .map_err(|e| e.to_string())?;
        ensure!(
            p.coverage.to_bits() == ab.coverage.to_bits()
                && p.consistency.to_bits() == ab.consistency.to_bits()
                && p.factsim.to_bits() == ab.factsim.to_bits(),
            "case {case}: permutation changed the score"
        );

        let mut bigger: Vec<FactTuple> = b.tuples().to_vec();
        bigger.extend(random_set(&mut rng, 3).tuples().iter().cloned());
        let grown =
            score(&a, &FactSet::from_tuples(bigger), &TestEncoder).map_err(|e| e.to_string())?;
        ensure!(
            grown.coverage >= ab.coverage,
            "case {case}: coverage dropped after additions"
        );

        let aa = score(&a, &a, &TestEncoder).map_err(|e| e.to_string())?;
        ensure!(
            aa.factsim == 1.0,
            "case {case}: factsim(A, A) = {}",
            aa.factsim
        );
    }
    Ok(cases)
}
