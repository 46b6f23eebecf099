use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauVariant {
    /// (C − D) / (n choose 2), no tie correction.
    A,
    /// Tie-corrected: (C − D) / √((n0 − n1)(n0 − n2)).
    #[default]
    B,
}

impl std::str::FromStr for TauVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(TauVariant::A),
            "b" => Ok(TauVariant::B),
            _ => Err(Error::invalid(format!(
                "tau variant must be 'a' or 'b' (got {s:?})"
            ))),
        }
    }
}

/// Pair counts behind Kendall's tau.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// n(n − 1)/2
    pub total: u64,
    /// pairs tied in x (including joint ties)
    pub tied_x: u64,
    /// pairs tied in y (including joint ties)
    pub tied_y: u64,
    /// pairs tied in both
    pub tied_both: u64,
    pub discordant: u64,
}

impl PairCounts {
    /// Concordant minus discordant pairs.
    pub fn score(&self) -> i64 {
        let untied = self.total + self.tied_both - self.tied_x - self.tied_y;
        untied as i64 - 2 * self.discordant as i64
    }
}

fn tie_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<T> = None;
    for v in sorted {
        if prev.as_ref() == Some(&v) {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
        prev = Some(v);
    }
    total + run * (run + 1) / 2
}

/// Counts strict inversions of `v` while sorting it (merge sort).
fn sort_counting_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        sort_counting_inversions(left, bl) + sort_counting_inversions(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Knight's O(n log n) pair counting.
pub fn pair_counts(x: &[f64], y: &[f64]) -> Result<PairCounts> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("kendall's tau needs at least 2 points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("kendall's tau needs finite values"));
    }
    // -0.0 + 0.0 == +0.0, so signed zeros sort as one value
    let x: Vec<f64> = x.iter().map(|v| v + 0.0).collect();
    let y: Vec<f64> = y.iter().map(|v| v + 0.0).collect();
    let n = x.len() as u64;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let tied_x = tie_pairs(order.iter().map(|&i| x[i]));
    let tied_both = tie_pairs(order.iter().map(|&i| (x[i], y[i])));

    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; ys.len()];
    let discordant = sort_counting_inversions(&mut ys, &mut buf);
    let tied_y = tie_pairs(ys.iter().copied());

    Ok(PairCounts {
        total: n * (n - 1) / 2,
        tied_x,
        tied_y,
        tied_both,
        discordant,
    })
}

pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    kendall_tau_variant(x, y, TauVariant::B)
}

pub fn kendall_tau_variant(x: &[f64], y: &[f64], variant: TauVariant) -> Result<f64> {
    let c = pair_counts(x, y)?;
    let denom = match variant {
        TauVariant::A => c.total as f64,
        TauVariant::B => {
            let dx = c.total - c.tied_x;
            let dy = c.total - c.tied_y;
            if dx == 0 || dy == 0 {
                return Err(Error::invalid(
                    "kendall's tau-b is undefined when every pair is tied in one variable",
                ));
            }
            ((dx * dy) as f64).sqrt()
        }
    };
    Ok(c.score() as f64 / denom)
}
