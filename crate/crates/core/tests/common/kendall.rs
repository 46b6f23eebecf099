use factsim::benchmark::TauVariant;

/// Concordant, discordant, and tie counts by checking every pair.
pub fn brute_counts(x: &[f64], y: &[f64]) -> (i64, i64, u64, u64, u64) {
    let (mut c, mut d, mut tx, mut ty, mut txy) = (0, 0, 0, 0, 0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            match (dx == 0.0, dy == 0.0) {
                (true, true) => {
                    tx += 1;
                    ty += 1;
                    txy += 1
                }
                (true, false) => tx += 1,
                (false, true) => ty += 1,
                _ if (dx > 0.0) == (dy > 0.0) => c += 1,
                _ => d += 1,
            }
        }
    }
    (c, d, tx, ty, txy)
}

pub fn brute_tau(x: &[f64], y: &[f64], variant: TauVariant) -> Option<f64> {
    let n = x.len() as u64;
    let n0 = n * (n - 1) / 2;
    let (c, d, tx, ty, _) = brute_counts(x, y);
    match variant {
        TauVariant::A => Some((c - d) as f64 / n0 as f64),
        TauVariant::B => {
            let (a, b) = (n0 - tx, n0 - ty);
            (a != 0 && b != 0).then(|| (c - d) as f64 / ((a * b) as f64).sqrt())
        }
    }
}
