//! Conditional-entropy bounds for explicit parity-check codes whose bits are
//! split across parallel MBIOS channels, plus an exhaustive small-code oracle
//! that computes the exact conditional entropy and MAP bit error.

use serde::{Deserialize, Serialize};

use crate::bounds_rate::BoundResult;
use crate::channel::{DiscreteMbios, Mbios, NumericControls, LN2};
use crate::error::{Error, Result};

/// Sparse binary parity-check matrix: one sorted column-index set per row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    pub fn new(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || rows.is_empty() {
            return Err(Error::validation("need n >= 1 and at least one row"));
        }
        let mut rows = rows;
        for (m, row) in rows.iter_mut().enumerate() {
            if row.is_empty() {
                return Err(Error::validation(format!("row {m} has weight zero")));
            }
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::validation(format!("row {m} has a duplicate index")));
            }
            if *row.last().unwrap() >= n {
                return Err(Error::validation(format!(
                    "row {m} references a column outside [0, {n})"
                )));
            }
        }
        Ok(ParityCheckMatrix { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity-check rows.
    pub fn c(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Design rate `1 - c/n` (may undershoot the true rate if rows are
    /// linearly dependent).
    pub fn design_rate(&self) -> f64 {
        1.0 - self.rows.len() as f64 / self.n as f64
    }

    /// Parses the standard alist sparse-matrix text format (1-based indices,
    /// zero padding allowed).
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut nums = text
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::validation(format!("alist: bad token {t:?}")))
            })
            .collect::<Result<Vec<usize>>>()?
            .into_iter();
        let mut next = |what: &str| {
            nums.next()
                .ok_or_else(|| Error::validation(format!("alist: truncated before {what}")))
        };
        let n = next("n")?;
        let c = next("c")?;
        let max_col = next("max column degree")?;
        let max_row = next("max row degree")?;
        let col_degs: Vec<usize> = (0..n).map(|_| next("column degrees")).collect::<Result<_>>()?;
        let row_degs: Vec<usize> = (0..c).map(|_| next("row degrees")).collect::<Result<_>>()?;
        if col_degs.iter().any(|&d| d > max_col) || row_degs.iter().any(|&d| d > max_row) {
            return Err(Error::validation("alist: a degree exceeds the stated maximum"));
        }
        // Column blocks are read only to keep the cursor aligned; the matrix
        // itself is rebuilt from the row blocks.
        for &d in &col_degs {
            for _ in 0..max_col.max(d) {
                next("column index block")?;
            }
        }
        let mut rows = Vec::with_capacity(c);
        for &d in &row_degs {
            let mut row = Vec::with_capacity(d);
            for k in 0..max_row.max(d) {
                let v = next("row index block")?;
                if k < d {
                    if v == 0 || v > n {
                        return Err(Error::validation(format!(
                            "alist: row index {v} outside 1..={n}"
                        )));
                    }
                    row.push(v - 1);
                } else if v != 0 {
                    return Err(Error::validation("alist: nonzero padding entry"));
                }
            }
            rows.push(row);
        }
        ParityCheckMatrix::new(n, rows)
    }

    /// Serializes to the alist format with zero padding.
    pub fn to_alist(&self) -> String {
        let n = self.n;
        let c = self.rows.len();
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (m, row) in self.rows.iter().enumerate() {
            for &i in row {
                cols[i].push(m);
            }
        }
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let pad = |v: &[usize], width: usize| {
            let mut out: Vec<usize> = v.iter().map(|&x| x + 1).collect();
            out.resize(width, 0);
            join(&out)
        };
        let mut lines = vec![
            format!("{n} {c}"),
            format!("{max_col} {max_row}"),
            join(&cols.iter().map(Vec::len).collect::<Vec<_>>()),
            join(&self.rows.iter().map(Vec::len).collect::<Vec<_>>()),
        ];
        lines.extend(cols.iter().map(|v| pad(v, max_col)));
        lines.extend(self.rows.iter().map(|v| pad(v, max_row)));
        lines.join("\n") + "\n"
    }
}

/// Maps each code bit to the index of the channel it is transmitted over.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BitAssignment {
    channel_of: Vec<usize>,
    num_channels: usize,
}

impl BitAssignment {
    pub fn new(channel_of: Vec<usize>, num_channels: usize) -> Result<Self> {
        if num_channels == 0 || channel_of.is_empty() {
            return Err(Error::validation("need at least one bit and one channel"));
        }
        let mut used = vec![false; num_channels];
        for &j in &channel_of {
            if j >= num_channels {
                return Err(Error::validation(format!(
                    "channel index {j} outside [0, {num_channels})"
                )));
            }
            used[j] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::validation("every channel must carry at least one bit"));
        }
        Ok(BitAssignment {
            channel_of,
            num_channels,
        })
    }

    pub fn single_channel(n: usize) -> Self {
        BitAssignment {
            channel_of: vec![0; n],
            num_channels: 1,
        }
    }

    pub fn channel_of(&self) -> &[usize] {
        &self.channel_of
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    /// Fraction of bits on each channel.
    pub fn bit_fractions(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.num_channels];
        for &j in &self.channel_of {
            counts[j] += 1;
        }
        let n = self.channel_of.len() as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }
}

/// Per-row channel-usage counts: `beta[j][m]` is how many of row m's bits are
/// carried by channel j.
pub fn beta_counts(h: &ParityCheckMatrix, a: &BitAssignment) -> Result<Vec<Vec<usize>>> {
    if a.channel_of.len() != h.n() {
        return Err(Error::validation("assignment length must equal the block length"));
    }
    let mut beta = vec![vec![0usize; h.c()]; a.num_channels];
    for (m, row) in h.rows().iter().enumerate() {
        for &i in row {
            beta[a.channel_of[i]][m] += 1;
        }
    }
    Ok(beta)
}

/// Probability that a parity check over variables with (nonnegative) LLR
/// magnitudes `alphas` is violated: `(1/2)(1 - prod_w tanh(alpha_w / 2))`.
pub fn syndrome_prob_one(alphas: &[f64]) -> Result<f64> {
    let mut prod = 1.0;
    for &a in alphas {
        if a < 0.0 || a.is_nan() {
            return Err(Error::validation(format!("LLR magnitude {a} must be >= 0")));
        }
        prod *= (0.5 * a).tanh();
    }
    Ok(0.5 * (1.0 - prod))
}

/// Lower bound on the per-bit conditional entropy `H(X|Y)/n` of the code
/// defined by `h`, with bit i carried by `channels[a.channel_of[i]]`.
pub fn entropy_lower_bound<M: Mbios>(
    h: &ParityCheckMatrix,
    a: &BitAssignment,
    channels: &[M],
    ctrl: &NumericControls,
) -> Result<BoundResult> {
    if channels.len() != a.num_channels {
        return Err(Error::validation("need one channel model per channel index"));
    }
    ctrl.validate()?;
    let beta = beta_counts(h, a)?;
    let fractions = a.bit_fractions();
    let mut cbar = 0.0;
    for (j, ch) in channels.iter().enumerate() {
        cbar += fractions[j] * ch.capacity(ctrl)?;
    }
    let n = h.n() as f64;
    let c = h.c() as f64;

    // Per-row product of per-channel moments, accumulated in the log domain
    // so large beta counts cannot underflow.
    let row_products = |log_g: &[f64]| -> f64 {
        (0..h.c())
            .map(|m| {
                let mut acc = 0.0;
                for (j, lg) in log_g.iter().enumerate() {
                    let b = beta[j][m];
                    if b > 0 {
                        acc += b as f64 * lg;
                    }
                }
                acc.exp()
            })
            .sum()
    };

    // The moments decrease towards the perfect-observation probability, so
    // the series is summed exactly around that limit (using
    // `sum_p 1/(p(2p-1)) = 2 ln 2`) plus a truncated excess with a rigorous
    // tail bound from its last term.
    let log_g_limit: Vec<f64> = channels.iter().map(|ch| ch.g_moment_limit().ln()).collect();
    let floor = row_products(&log_g_limit);
    let mut series = 2.0 * LN2 * floor;
    let mut harmonic = 0.0;
    let mut tail = f64::INFINITY;
    let mut terms = ctrl.series_pmax;
    for p in 1..=ctrl.series_pmax {
        let log_g = channels
            .iter()
            .map(|ch| Ok(ch.g_moment(p, ctrl)?.ln()))
            .collect::<Result<Vec<f64>>>()?;
        let excess = (row_products(&log_g) - floor).max(0.0);
        let coeff = 1.0 / (p as f64 * (2.0 * p as f64 - 1.0));
        series += coeff * excess;
        harmonic += coeff;
        tail = (2.0 * LN2 - harmonic).max(0.0) * excess;
        if tail / (2.0 * LN2 * c.max(1.0)) < ctrl.series_tol {
            terms = p;
            break;
        }
    }

    let bound_at = |s: f64| 1.0 - cbar - (c / n) * (1.0 - s / (2.0 * c * LN2));
    let value = bound_at(series);
    let value_hi = bound_at(series + tail);
    Ok(BoundResult {
        value,
        series_terms_used: terms,
        series_remainder_bound: (value_hi - value).max(0.0),
        controls: ctrl.clone(),
    })
}

/// Upper bound `R * h2(P_b)` on the per-bit conditional entropy in terms of
/// the bit error probability.
pub fn entropy_upper_bound(rate: f64, p_b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::validation(format!("rate {rate} must be in [0,1]")));
    }
    if !(0.0..=0.5).contains(&p_b) {
        return Err(Error::validation(format!(
            "bit error probability {p_b} must be in [0, 1/2]"
        )));
    }
    Ok(rate * crate::channel::h2(p_b))
}

/// Exact quantities for a small code, computed by exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct ExactCodeStats {
    /// `H(X|Y)/n` with X uniform over the codewords.
    pub per_bit_entropy: f64,
    /// Bitwise-MAP error probability averaged over the information set of a
    /// fixed systematic encoder.
    pub map_bit_error: f64,
    /// Code dimension.
    pub dimension: usize,
}

const MAX_ORACLE_WORK: f64 = 4.0e7;

struct SymbolTable {
    /// (p0, p1): probability of each output symbol given bit 0 / bit 1.
    probs: Vec<(f64, f64)>,
}

fn symbol_table(ch: &DiscreteMbios) -> SymbolTable {
    // Each LLR magnitude yields a mirror pair of output symbols; by the
    // channel symmetry, the distribution under one input is the reflection of
    // the distribution under the other. Mirrors are matched by magnitude with
    // a tolerance because quantized channels compute the two signs
    // independently, leaving them unequal in the last bits.
    let mut entries: Vec<(f64, f64)> = ch.mass.clone();
    entries.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
    let close = |a: f64, b: f64| {
        (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-9 * (1.0 + a.abs())
    };
    let mut probs: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let mag = entries[i].0.abs();
        let mut pos = 0.0; // mass at +mag under input 1
        let mut neg = 0.0; // mass at -mag under input 1
        while i < entries.len() && close(entries[i].0.abs(), mag) {
            if entries[i].0 >= 0.0 {
                pos += entries[i].1;
            } else {
                neg += entries[i].1;
            }
            i += 1;
        }
        if mag == 0.0 {
            probs.push((pos, pos));
        } else {
            // Symbol +mag is seen with probability `pos` under input 1 and,
            // by reflection, `neg` under input 0; symbol -mag vice versa.
            probs.push((neg, pos));
            probs.push((pos, neg));
        }
    }
    SymbolTable { probs }
}

/// Basis of the null space of `h` over GF(2), with a matching information set
/// (the pivot-free columns).
fn nullspace(h: &ParityCheckMatrix) -> Result<(Vec<u64>, Vec<usize>)> {
    let n = h.n();
    if n > 60 {
        return Err(Error::TooLarge(format!("block length {n} exceeds 60")));
    }
    let mut masks: Vec<u64> = h
        .rows()
        .iter()
        .map(|row| row.iter().fold(0u64, |acc, &i| acc | (1 << i)))
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut rank = 0;
    for col in 0..n {
        if let Some(r) = (rank..masks.len()).find(|&r| masks[r] >> col & 1 == 1) {
            masks.swap(rank, r);
            for r2 in 0..masks.len() {
                if r2 != rank && masks[r2] >> col & 1 == 1 {
                    masks[r2] ^= masks[rank];
                }
            }
            pivots.push((rank, col));
            rank += 1;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let basis = free_cols
        .iter()
        .map(|&f| {
            let mut v = 1u64 << f;
            for &(r, pc) in &pivots {
                if masks[r] >> f & 1 == 1 {
                    v |= 1 << pc;
                }
            }
            v
        })
        .collect();
    Ok((basis, free_cols))
}

/// Exact conditional entropy and MAP bit error by enumerating every codeword
/// against every joint output of the (finite-alphabet) channels.
pub fn exact_code_stats(
    h: &ParityCheckMatrix,
    a: &BitAssignment,
    channels: &[DiscreteMbios],
) -> Result<ExactCodeStats> {
    if channels.len() != a.num_channels() {
        return Err(Error::validation("need one channel model per channel index"));
    }
    let n = h.n();
    let tables: Vec<SymbolTable> = channels.iter().map(symbol_table).collect();
    let radix: Vec<usize> = (0..n)
        .map(|i| tables[a.channel_of()[i]].probs.len())
        .collect();
    let (basis, info_set) = nullspace(h)?;
    let dim = basis.len();
    if dim > 24 {
        return Err(Error::TooLarge(format!("code dimension {dim} exceeds 24")));
    }
    let num_outputs: f64 = radix.iter().map(|&r| r as f64).product();
    let work = num_outputs * (1u64 << dim) as f64 * n as f64;
    if work > MAX_ORACLE_WORK {
        return Err(Error::TooLarge(format!(
            "enumeration cost {work:.3e} exceeds the {MAX_ORACLE_WORK:.1e} cap"
        )));
    }

    // All codewords as bitmasks, spanned by the nullspace basis.
    let mut codewords = vec![0u64; 1 << dim];
    for (idx, cw) in codewords.iter_mut().enumerate() {
        let mut v = 0u64;
        for (b, &vec) in basis.iter().enumerate() {
            if idx >> b & 1 == 1 {
                v ^= vec;
            }
        }
        *cw = v;
    }
    let inv_count = 1.0 / codewords.len() as f64;

    let mut entropy = 0.0;
    let mut bit_error = vec![0.0f64; info_set.len()];
    let mut y = vec![0usize; n];
    let mut weights = vec![0.0f64; codewords.len()];
    loop {
        let mut total = 0.0;
        for (w, &cw) in weights.iter_mut().zip(&codewords) {
            let mut lik = 1.0;
            for (i, &sym) in y.iter().enumerate() {
                let (p0, p1) = tables[a.channel_of()[i]].probs[sym];
                lik *= if cw >> i & 1 == 1 { p1 } else { p0 };
                if lik == 0.0 {
                    break;
                }
            }
            *w = lik;
            total += lik;
        }
        if total > 0.0 {
            for &w in &weights {
                if w > 0.0 {
                    entropy += inv_count * w * (total / w).log2();
                }
            }
            for (k, &bit) in info_set.iter().enumerate() {
                let ones: f64 = weights
                    .iter()
                    .zip(&codewords)
                    .filter(|&(_, &cw)| cw >> bit & 1 == 1)
                    .map(|(&w, _)| w)
                    .sum();
                bit_error[k] += inv_count * ones.min(total - ones);
            }
        }
        // Mixed-radix increment over the joint output alphabet.
        let mut i = 0;
        loop {
            if i == n {
                let map_bit_error = if info_set.is_empty() {
                    0.0
                } else {
                    bit_error.iter().sum::<f64>() / info_set.len() as f64
                };
                return Ok(ExactCodeStats {
                    per_bit_entropy: entropy / n as f64,
                    map_bit_error,
                    dimension: dim,
                });
            }
            y[i] += 1;
            if y[i] < radix[i] {
                break;
            }
            y[i] = 0;
            i += 1;
        }
    }
}

/// Exact `H(X|Y)/n`; see [`exact_code_stats`].
pub fn exact_conditional_entropy(
    h: &ParityCheckMatrix,
    a: &BitAssignment,
    channels: &[DiscreteMbios],
) -> Result<f64> {
    Ok(exact_code_stats(h, a, channels)?.per_bit_entropy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{h2, ChannelModel};

    fn hamming_7_4() -> ParityCheckMatrix {
        ParityCheckMatrix::new(
            7,
            vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]],
        )
        .unwrap()
    }

    #[test]
    fn beta_counts_hand_example() {
        let h = ParityCheckMatrix::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let a = BitAssignment::new(vec![0, 1, 0], 2).unwrap();
        let beta = beta_counts(&h, &a).unwrap();
        assert_eq!(beta, vec![vec![1, 1], vec![1, 1]]);
        let a2 = BitAssignment::new(vec![0, 0, 1], 2).unwrap();
        let beta2 = beta_counts(&h, &a2).unwrap();
        assert_eq!(beta2, vec![vec![2, 1], vec![0, 1]]);
    }

    #[test]
    fn syndrome_prob_limits_and_enumeration() {
        assert_eq!(syndrome_prob_one(&[1.0, 0.0, 3.0]).unwrap(), 0.5);
        assert!(syndrome_prob_one(&[1e9, 1e9]).unwrap() < 1e-12);
        // Exhaustive check over sign patterns: Pr(theta_w = -1) = 1/(1+e^a).
        let alphas = [1.0f64, 2.0, 3.0];
        let mut odd = 0.0;
        for pattern in 0..1u32 << alphas.len() {
            let mut prob = 1.0;
            let mut parity = 0;
            for (w, &a) in alphas.iter().enumerate() {
                let p_minus = 1.0 / (1.0 + a.exp());
                if pattern >> w & 1 == 1 {
                    prob *= p_minus;
                    parity ^= 1;
                } else {
                    prob *= 1.0 - p_minus;
                }
            }
            if parity == 1 {
                odd += prob;
            }
        }
        let formula = syndrome_prob_one(&alphas).unwrap();
        assert!((odd - formula).abs() < 1e-14, "{odd} vs {formula}");
    }

    #[test]
    fn entropy_lower_bound_extremes() {
        let h = hamming_7_4();
        let a = BitAssignment::single_channel(7);
        let ctrl = NumericControls::default();
        // Perfect channel: every moment equals its limit, so the series is
        // summed exactly and the bound collapses to 0.
        let perfect =
            entropy_lower_bound(&h, &a, &[ChannelModel::Bec { eps: 0.0 }], &ctrl).unwrap();
        assert!(perfect.value.abs() < 1e-12, "{}", perfect.value);
        let useless = entropy_lower_bound(&h, &a, &[ChannelModel::Bec { eps: 1.0 }], &ctrl)
            .unwrap()
            .value;
        assert!((useless - h.design_rate()).abs() < 1e-12, "{useless}");
    }

    #[test]
    fn upper_bound_endpoints() {
        assert_eq!(entropy_upper_bound(0.5, 0.0).unwrap(), 0.0);
        assert!((entropy_upper_bound(0.5, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((entropy_upper_bound(0.5, 0.11).unwrap() - 0.5 * h2(0.11)).abs() < 1e-15);
    }

    #[test]
    fn alist_round_trip() {
        let h = hamming_7_4();
        let text = h.to_alist();
        let back = ParityCheckMatrix::from_alist(&text).unwrap();
        assert_eq!(back.n(), h.n());
        assert_eq!(back.rows(), h.rows());
    }

    #[test]
    fn oracle_matches_repetition_code_closed_form() {
        let w = 0.12;
        let h = ParityCheckMatrix::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let a = BitAssignment::single_channel(3);
        let ch = DiscreteMbios::from_channel(&ChannelModel::Bsc { w }).unwrap();
        let stats = exact_code_stats(&h, &a, &[ch]).unwrap();
        assert_eq!(stats.dimension, 1);
        // Posterior over the two codewords depends only on the Hamming
        // distance d of y from the all-zero word.
        let mut expected = 0.0;
        let mut pb = 0.0;
        for d in 0..=3u32 {
            let binom = [1.0, 3.0, 3.0, 1.0][d as usize];
            let l0 = w.powi(d as i32) * (1.0 - w).powi(3 - d as i32);
            let l1 = w.powi(3 - d as i32) * (1.0 - w).powi(d as i32);
            let py = 0.5 * binom * (l0 + l1);
            expected += py * h2(l0 / (l0 + l1));
            pb += binom * 0.5 * l0.min(l1);
        }
        assert!(
            (stats.per_bit_entropy - expected / 3.0).abs() < 1e-12,
            "{} vs {}",
            stats.per_bit_entropy,
            expected / 3.0
        );
        assert!((stats.map_bit_error - pb).abs() < 1e-12, "{} vs {pb}", stats.map_bit_error);
    }

    #[test]
    fn oracle_zero_entropy_on_perfect_channel() {
        let h = hamming_7_4();
        let a = BitAssignment::single_channel(7);
        let ch = DiscreteMbios::from_channel(&ChannelModel::Bsc { w: 1e-12 }).unwrap();
        let stats = exact_code_stats(&h, &a, &[ch]).unwrap();
        assert!(stats.per_bit_entropy < 1e-9, "{}", stats.per_bit_entropy);
    }

    #[test]
    fn hamming_sandwich_over_bec() {
        let h = hamming_7_4();
        let a = BitAssignment::single_channel(7);
        let model = ChannelModel::Bec { eps: 0.5 };
        let ch = DiscreteMbios::from_channel(&model).unwrap();
        let ctrl = NumericControls::default();
        let stats = exact_code_stats(&h, &a, &[ch]).unwrap();
        let lower = entropy_lower_bound(&h, &a, &[model], &ctrl).unwrap().value;
        let rate = 4.0 / 7.0;
        let upper = entropy_upper_bound(rate, stats.map_bit_error).unwrap();
        assert!(
            lower <= stats.per_bit_entropy + 1e-12 && stats.per_bit_entropy <= upper + 1e-12,
            "lower {lower}, exact {}, upper {upper}",
            stats.per_bit_entropy
        );
    }
}
