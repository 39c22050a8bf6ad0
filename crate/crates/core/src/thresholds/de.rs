//! Density evolution for sum-product decoding: an exact scalar recursion for
//! the BEC and a discretized LLR-density recursion for the BIAWGN channel.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::normal_cdf;
use crate::degree::{DegreePolynomial, Perspective, Side};
use crate::error::{Error, Result};

/// Discretization and stopping controls for density evolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DEControls {
    /// LLR grid spacing.
    pub llr_quantization_step: f64,
    /// Grid half-width; mass beyond it is clamped to the boundary bins.
    pub llr_range: f64,
    pub max_iterations: usize,
    /// Message error probability below which decoding counts as successful.
    pub target_error: f64,
    /// Bisection resolution of the E_b/N_0 threshold, in dB.
    pub bisection_tol_db: f64,
}

impl Default for DEControls {
    fn default() -> Self {
        DEControls {
            llr_quantization_step: 0.05,
            llr_range: 25.0,
            max_iterations: 2000,
            target_error: 1e-6,
            bisection_tol_db: 1e-3,
        }
    }
}

impl DEControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.llr_quantization_step > 0.0)
            || !(self.llr_range > 0.0)
            || self.max_iterations == 0
            || !(self.target_error > 0.0)
            || !(self.bisection_tol_db > 0.0)
        {
            return Err(Error::validation("all density-evolution controls must be positive"));
        }
        let bins = 2.0 * self.llr_range / self.llr_quantization_step;
        if bins > 40_000.0 {
            return Err(Error::validation(format!(
                "grid of {bins:.0} bins is too large; coarsen llr_quantization_step"
            )));
        }
        Ok(())
    }
}

fn degree_classes(
    lambda_edge: &DegreePolynomial,
    pi: &BTreeMap<u32, f64>,
) -> Result<Vec<(u32, f64, f64)>> {
    if lambda_edge.perspective() != Perspective::Edge || lambda_edge.side() != Side::Variable {
        return Err(Error::validation("lambda must be variable-side edge-perspective"));
    }
    for (&d, &r) in pi {
        if lambda_edge.weight(d) == 0.0 {
            return Err(Error::validation(format!(
                "puncturing references degree {d} outside the lambda support"
            )));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::validation(format!("puncture rate {r} outside [0,1]")));
        }
    }
    Ok(lambda_edge
        .support()
        .map(|d| {
            (
                d,
                lambda_edge.weight(d),
                pi.get(&d).copied().unwrap_or(0.0),
            )
        })
        .collect())
}

/// Scalar density evolution over the BEC: tracks the erasure probability of
/// variable-to-check messages, with punctured bits erased at rate
/// `pi + (1 - pi) eps`.
pub fn bec_converges(
    lambda_edge: &DegreePolynomial,
    rho_edge: &DegreePolynomial,
    pi: &BTreeMap<u32, f64>,
    eps: f64,
    de: &DEControls,
) -> Result<bool> {
    de.validate()?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::validation(format!("erasure probability {eps} outside [0,1]")));
    }
    let classes = degree_classes(lambda_edge, pi)?;
    let eff: Vec<(u32, f64, f64)> = classes
        .iter()
        .map(|&(d, w, p)| (d, w, p + (1.0 - p) * eps))
        .collect();
    let mut x: f64 = eff.iter().map(|&(_, w, e)| w * e).sum();
    let mut stall = 0usize;
    for _ in 0..de.max_iterations {
        let y = 1.0 - rho_edge.eval(1.0 - x);
        let next: f64 = eff
            .iter()
            .map(|&(d, w, e)| w * e * y.powi(d as i32 - 1))
            .sum();
        if next < de.target_error {
            return Ok(true);
        }
        if next > x - 1e-15 {
            stall += 1;
            if stall >= 20 {
                return Ok(false);
            }
        } else {
            stall = 0;
        }
        x = next;
    }
    Ok(false)
}

/// Largest erasure probability at which the BEC recursion drives the message
/// erasure rate below `target_error`.
pub fn bec_threshold(
    lambda_edge: &DegreePolynomial,
    rho_edge: &DegreePolynomial,
    pi: &BTreeMap<u32, f64>,
    de: &DEControls,
) -> Result<f64> {
    let mut lo = 1e-9;
    let mut hi = 1.0 - 1e-9;
    if !bec_converges(lambda_edge, rho_edge, pi, lo, de)? {
        return Err(Error::Bracket(
            "density evolution fails even on an almost-perfect erasure channel".into(),
        ));
    }
    if bec_converges(lambda_edge, rho_edge, pi, hi, de)? {
        return Ok(hi);
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if bec_converges(lambda_edge, rho_edge, pi, mid, de)? {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-7 {
            break;
        }
    }
    Ok(lo)
}

/// Uniform LLR grid with a precomputed check-node (boxplus) lookup table.
pub struct DeGrid {
    step: f64,
    half: usize,
    bins: usize,
    /// `r_table[a * bins + b]` is the bin index of boxplus(l_a, l_b).
    r_table: Vec<u16>,
    fft_size: usize,
}

impl DeGrid {
    pub fn new(de: &DEControls) -> Result<DeGrid> {
        de.validate()?;
        let half = (de.llr_range / de.llr_quantization_step).round() as usize;
        let bins = 2 * half + 1;
        if bins > u16::MAX as usize {
            return Err(Error::validation("grid too fine for the lookup table"));
        }
        let step = de.llr_quantization_step;
        let tanh_half: Vec<f64> = (0..bins)
            .map(|k| (0.5 * (k as f64 - half as f64) * step).tanh())
            .collect();
        let mut r_table = vec![0u16; bins * bins];
        for a in 0..bins {
            let ta = tanh_half[a];
            let row = &mut r_table[a * bins..(a + 1) * bins];
            for (b, slot) in row.iter_mut().enumerate() {
                let t = ta * tanh_half[b];
                // boxplus(l_a, l_b) = 2 atanh(tanh(l_a/2) tanh(l_b/2))
                let l = 2.0 * t.atanh();
                let k = (l / step).round() + half as f64;
                *slot = k.clamp(0.0, (bins - 1) as f64) as u16;
            }
        }
        let mut fft_size = 1;
        while fft_size < 2 * bins - 1 {
            fft_size *= 2;
        }
        Ok(DeGrid {
            step,
            half,
            bins,
            r_table,
            fft_size,
        })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    fn delta_zero(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.bins];
        d[self.half] = 1.0;
        d
    }

    /// BIAWGN LLR density N(2/sigma^2, 4/sigma^2) integrated over the bins,
    /// tails absorbed into the boundary bins.
    pub fn biawgn_density(&self, sigma: f64) -> Result<Vec<f64>> {
        if !(sigma > 0.0) {
            return Err(Error::validation(format!("sigma {sigma} must be > 0")));
        }
        let mean = 2.0 / (sigma * sigma);
        let std = 2.0 / sigma;
        let mut mass = vec![0.0; self.bins];
        for (k, m) in mass.iter_mut().enumerate() {
            let center = (k as f64 - self.half as f64) * self.step;
            let lo = if k == 0 {
                f64::NEG_INFINITY
            } else {
                center - 0.5 * self.step
            };
            let hi = if k == self.bins - 1 {
                f64::INFINITY
            } else {
                center + 0.5 * self.step
            };
            *m = normal_cdf((hi - mean) / std) - normal_cdf((lo - mean) / std);
        }
        Ok(mass)
    }

    /// One check-node pairing: the density of boxplus(A, B) via table gather.
    fn check_pair(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.bins];
        for (i, &pa) in a.iter().enumerate() {
            if pa < 1e-16 {
                continue;
            }
            let row = &self.r_table[i * self.bins..(i + 1) * self.bins];
            for (j, &pb) in b.iter().enumerate() {
                if pb != 0.0 {
                    out[row[j] as usize] += pa * pb;
                }
            }
        }
        out
    }

    /// Density of the sum of two independent grid variables, clamped to the
    /// grid boundary.
    fn add_pair(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.fft_size;
        let mut fa = to_complex(a, n);
        let mut fb = to_complex(b, n);
        fft(&mut fa, false);
        fft(&mut fb, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
        }
        fft(&mut fa, true);
        let mut out = vec![0.0; self.bins];
        for (m, &(re, _)) in fa.iter().enumerate().take(2 * self.bins - 1) {
            let v = (re / n as f64).max(0.0);
            let idx = (m as i64 - self.half as i64).clamp(0, self.bins as i64 - 1) as usize;
            out[idx] += v;
        }
        out
    }

    fn error_prob(&self, d: &[f64]) -> f64 {
        let below: f64 = d[..self.half].iter().sum();
        below + 0.5 * d[self.half]
    }
}

fn to_complex(a: &[f64], n: usize) -> Vec<(f64, f64)> {
    let mut v = vec![(0.0, 0.0); n];
    for (x, &p) in v.iter_mut().zip(a) {
        x.0 = p;
    }
    v
}

/// Iterative radix-2 FFT (inverse when `inv`; caller divides by n).
fn fft(a: &mut [(f64, f64)], inv: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = 2.0 * std::f64::consts::PI / len as f64 * if inv { 1.0 } else { -1.0 };
        let (ws, wc) = ang.sin_cos();
        let w0 = (wc, ws);
        for chunk in a.chunks_mut(len) {
            let mut w = (1.0, 0.0);
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let v = (y.0 * w.0 - y.1 * w.1, y.0 * w.1 + y.1 * w.0);
                *y = (x.0 - v.0, x.1 - v.1);
                x.0 += v.0;
                x.1 += v.1;
                w = (w.0 * w0.0 - w.1 * w0.1, w.0 * w0.1 + w.1 * w0.0);
            }
        }
        len *= 2;
    }
}

fn normalize(d: &mut [f64]) {
    let s: f64 = d.iter().sum();
    if s > 0.0 {
        for x in d.iter_mut() {
            *x /= s;
        }
    }
}

/// Discretized sum-product density evolution over the BIAWGN channel at noise
/// level `sigma`; punctured degree classes start from (and keep mixing in)
/// a point mass at LLR zero.
pub fn biawgn_converges(
    grid: &DeGrid,
    lambda_edge: &DegreePolynomial,
    rho_edge: &DegreePolynomial,
    pi: &BTreeMap<u32, f64>,
    sigma: f64,
    de: &DEControls,
) -> Result<bool> {
    let classes = degree_classes(lambda_edge, pi)?;
    let chan = grid.biawgn_density(sigma)?;
    let delta = grid.delta_zero();
    let max_var = lambda_edge.max_degree() as usize;
    let max_chk = rho_edge.max_degree() as usize;

    // Initial variable-to-check message: the (possibly punctured) channel
    // observation itself.
    let mut v = vec![0.0; grid.bins];
    for &(_, w, p) in &classes {
        for k in 0..grid.bins {
            v[k] += w * (p * delta[k] + (1.0 - p) * chan[k]);
        }
    }
    normalize(&mut v);

    let mut best = f64::INFINITY;
    let mut stall = 0usize;
    for _ in 0..de.max_iterations {
        // Check-node update: mixture over rho of (d-1)-fold boxplus powers.
        let mut c = vec![0.0; grid.bins];
        let mut power = v.clone(); // (d-1)-fold boxplus, starting at d = 2
        for d in 2..=max_chk {
            if d > 2 {
                power = grid.check_pair(&power, &v);
            }
            let w = rho_edge.weight(d as u32);
            if w > 0.0 {
                for (ck, &pk) in c.iter_mut().zip(&power) {
                    *ck += w * pk;
                }
            }
        }
        normalize(&mut c);

        // Variable-node update: per degree class, channel (or zero-LLR) plus
        // (i-1) independent check messages.
        let mut sums: Vec<Vec<f64>> = Vec::with_capacity(max_var); // i-fold sums of c
        sums.push(c.clone());
        for _ in 2..max_var {
            let next = grid.add_pair(sums.last().unwrap(), &c);
            sums.push(next);
        }
        let mut v_new = vec![0.0; grid.bins];
        for &(d, w, p) in &classes {
            let base: &[f64] = if d >= 2 { &sums[d as usize - 2] } else { &delta };
            let with_chan = grid.add_pair(base, &chan);
            for k in 0..grid.bins {
                v_new[k] += w * (p * base[k] + (1.0 - p) * with_chan[k]);
            }
        }
        normalize(&mut v_new);
        v = v_new;

        let pe = grid.error_prob(&v);
        if pe < de.target_error {
            return Ok(true);
        }
        if pe > best * (1.0 - 1e-4) {
            stall += 1;
            if stall >= 50 {
                return Ok(false);
            }
        } else {
            stall = 0;
        }
        best = best.min(pe);
    }
    Ok(false)
}
