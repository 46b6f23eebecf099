use factsim::rouge::{rouge_l, TokenSequence};

/// Every sequence over `alphabet` symbols of length 0..=max_len, shorter
/// sequences first.
pub fn all_sequences(max_len: usize, alphabet: u8) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut start = 0;
    for _ in 0..max_len {
        let end = out.len();
        for i in start..end {
            for c in 0..alphabet {
                let mut t = out[i].clone();
                t.push(c);
                out.push(t);
            }
        }
        start = end;
    }
    out
}

/// LCS of every pair by the recursive definition over suffixes:
/// lcs(xs, ys) = 1 + lcs(s, t) when the heads match, otherwise
/// max(lcs(s, ys), lcs(xs, t)). Each suffix is itself in `seqs` at a
/// smaller index, so the table fills in index order.
pub struct LcsTable {
    n: usize,
    table: Vec<u8>,
}

impl LcsTable {
    pub fn build(seqs: &[Vec<u8>]) -> Self {
        let n = seqs.len();
        let index: std::collections::HashMap<&[u8], usize> = seqs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let suffix: Vec<usize> = seqs
            .iter()
            .map(|s| if s.is_empty() { 0 } else { index[&s[1..]] })
            .collect();
        let mut table = vec![0u8; n * n];
        for i in 0..n {
            if seqs[i].is_empty() {
                continue;
            }
            for j in 0..n {
                if seqs[j].is_empty() {
                    continue;
                }
                table[i * n + j] = if seqs[i][0] == seqs[j][0] {
                    1 + table[suffix[i] * n + suffix[j]]
                } else {
                    table[suffix[i] * n + j].max(table[i * n + suffix[j]])
                };
            }
        }
        LcsTable { n, table }
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.table[i * self.n + j] as usize
    }
}

fn f1(l: usize, candidate: usize, reference: usize) -> f64 {
    if l == 0 {
        return 0.0;
    }
    let p = l as f64 / candidate as f64;
    let r = l as f64 / reference as f64;
    2.0 * p * r / (p + r)
}

/// Checks `rouge_l` against the table for every ordered pair of sequences up
/// to `max_len` over a three-word vocabulary. F1 is strictly increasing in
/// the LCS length for fixed sequence lengths, so a bit-exact F1 also pins
/// the LCS. Returns the number of pairs checked, or the first mismatch.
pub fn check_rouge_l_exhaustive(max_len: usize) -> Result<u64, String> {
    const WORDS: [&str; 3] = ["a", "b", "c"];
    let seqs = all_sequences(max_len, 3);
    let table = LcsTable::build(&seqs);
    let tokens: Vec<TokenSequence> = seqs
        .iter()
        .map(|s| TokenSequence::from_tokens(s.iter().map(|&c| WORDS[c as usize])))
        .collect();
    let mut pairs = 0u64;
    for i in 0..seqs.len() {
        for j in 0..seqs.len() {
            let got = rouge_l(&tokens[i], &tokens[j]);
            let want = f1(table.get(i, j), seqs[j].len(), seqs[i].len());
            if got.to_bits() != want.to_bits() {
                return Err(format!(
                    "rouge-l {:?} {:?}: {got} vs {want}",
                    seqs[i], seqs[j]
                ));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}
