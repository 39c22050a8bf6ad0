//! MBIOS channel models (BEC, BSC, binary-input AWGN), their capacities,
//! LLR-moment functionals, the binary-entropy series, and puncturing
//! composition.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, gauss_hermite};

pub const LN2: f64 = std::f64::consts::LN_2;

/// Tolerances and truncation depths shared by all bound computations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericControls {
    pub series_pmax: usize,
    pub series_tol: f64,
    pub quad_rel_tol: f64,
    pub quad_nodes: usize,
}

impl Default for NumericControls {
    fn default() -> Self {
        NumericControls {
            series_pmax: 200,
            series_tol: 1e-10,
            quad_rel_tol: 1e-10,
            quad_nodes: 301,
        }
    }
}

impl NumericControls {
    pub fn validate(&self) -> Result<()> {
        if self.series_pmax == 0 || self.quad_nodes < 2 {
            return Err(Error::validation("series_pmax and quad_nodes must be positive"));
        }
        if !(self.series_tol > 0.0) || !(self.quad_rel_tol > 0.0) {
            return Err(Error::validation("tolerances must be strictly positive"));
        }
        Ok(())
    }
}

/// One memoryless binary-input output-symmetric channel. All LLR densities
/// are taken under channel input 1 (symmetry makes the convention immaterial
/// for the moments).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ChannelModel {
    Bec { eps: f64 },
    Bsc { w: f64 },
    Biawgn { sigma: f64 },
}

/// Common surface over plain, punctured, and discretized channels: capacity
/// and the tanh-power moments of the LLR density.
pub trait Mbios {
    fn capacity(&self, ctrl: &NumericControls) -> Result<f64>;
    fn g_moment(&self, p: usize, ctrl: &NumericControls) -> Result<f64>;
    /// Limit of the moments as p grows: the probability of a perfect
    /// (infinite-LLR) observation. Lets series over the moments be summed
    /// exactly around their limit.
    fn g_moment_limit(&self) -> f64;
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelModel::Bec { eps } => {
                if !(0.0..=1.0).contains(&eps) {
                    return Err(Error::validation(format!("BEC erasure prob {eps} outside [0,1]")));
                }
            }
            ChannelModel::Bsc { w } => {
                if !(0.0..=0.5).contains(&w) {
                    return Err(Error::validation(format!("BSC crossover {w} outside [0,1/2]")));
                }
            }
            ChannelModel::Biawgn { sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::validation(format!("BIAWGN sigma {sigma} must be > 0")));
                }
            }
        }
        Ok(())
    }

    /// Uncoded bit error probability w = (1/2) Pr(L = 0) + Pr(L < 0).
    pub fn uncoded_error_prob(&self) -> f64 {
        match *self {
            ChannelModel::Bec { eps } => eps / 2.0,
            ChannelModel::Bsc { w } => w,
            ChannelModel::Biawgn { sigma } => q_function(1.0 / sigma),
        }
    }

    /// Parses a CLI channel spec such as `bec:eps=0.4`, `bsc:w=0.11`,
    /// `biawgn:sigma=0.978` or `biawgn:ebno_db=0.187,rate=0.5`.
    pub fn parse(spec: &str) -> Result<ChannelModel> {
        let (family, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::validation(format!("channel spec `{spec}` missing `:`")))?;
        let mut kv = std::collections::BTreeMap::new();
        for part in args.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::validation(format!("bad channel argument `{part}`")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::validation(format!("bad number `{v}` in channel spec")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let ch = match family {
            "bec" => ChannelModel::Bec {
                eps: *kv
                    .get("eps")
                    .ok_or_else(|| Error::validation("bec requires eps="))?,
            },
            "bsc" => ChannelModel::Bsc {
                w: *kv
                    .get("w")
                    .ok_or_else(|| Error::validation("bsc requires w="))?,
            },
            "biawgn" => {
                if let Some(&sigma) = kv.get("sigma") {
                    ChannelModel::Biawgn { sigma }
                } else {
                    let ebno = *kv
                        .get("ebno_db")
                        .ok_or_else(|| Error::validation("biawgn requires sigma= or ebno_db="))?;
                    let rate = *kv
                        .get("rate")
                        .ok_or_else(|| Error::validation("biawgn ebno_db requires rate="))?;
                    ChannelModel::Biawgn {
                        sigma: sigma_from_ebno_db(ebno, rate)?,
                    }
                }
            }
            other => return Err(Error::validation(format!("unknown channel family `{other}`"))),
        };
        ch.validate()?;
        Ok(ch)
    }
}

impl Mbios for ChannelModel {
    fn capacity(&self, ctrl: &NumericControls) -> Result<f64> {
        self.validate()?;
        let c = match *self {
            ChannelModel::Bec { eps } => 1.0 - eps,
            ChannelModel::Bsc { w } => 1.0 - h2(w),
            ChannelModel::Biawgn { sigma } => {
                biawgn_expectation(sigma, ctrl, |l| log2_1p_exp(-l)).map(|e| 1.0 - e)?
            }
        };
        Ok(c.clamp(0.0, 1.0))
    }

    /// The moment g_p = E[tanh^(2p)(L/2)] of the channel LLR.
    fn g_moment(&self, p: usize, ctrl: &NumericControls) -> Result<f64> {
        self.validate()?;
        if p == 0 {
            return Err(Error::validation("moment order p must be >= 1"));
        }
        match *self {
            ChannelModel::Bec { eps } => Ok(1.0 - eps),
            ChannelModel::Bsc { w } => Ok((1.0 - 2.0 * w).powi(2 * p as i32)),
            ChannelModel::Biawgn { sigma } => {
                biawgn_expectation(sigma, ctrl, |l| (l / 2.0).tanh().powi(2 * p as i32))
            }
        }
    }

    fn g_moment_limit(&self) -> f64 {
        match *self {
            ChannelModel::Bec { eps } => 1.0 - eps,
            ChannelModel::Bsc { w } => {
                if w == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ChannelModel::Biawgn { .. } => 0.0,
        }
    }
}

/// Channel seen by a bit that is punctured with rate `pi` before entering
/// `base`: a BEC(pi) in series with the base channel. Capacity and every
/// moment scale exactly by (1 - pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChannel {
    pub base: ChannelModel,
    pub puncture_rate: f64,
}

pub fn puncture_channel(base: ChannelModel, pi: f64) -> Result<EffectiveChannel> {
    base.validate()?;
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::validation(format!("puncture rate {pi} outside [0,1]")));
    }
    Ok(EffectiveChannel {
        base,
        puncture_rate: pi,
    })
}

impl Mbios for EffectiveChannel {
    fn capacity(&self, ctrl: &NumericControls) -> Result<f64> {
        Ok((1.0 - self.puncture_rate) * self.base.capacity(ctrl)?)
    }

    fn g_moment(&self, p: usize, ctrl: &NumericControls) -> Result<f64> {
        Ok((1.0 - self.puncture_rate) * self.base.g_moment(p, ctrl)?)
    }

    fn g_moment_limit(&self) -> f64 {
        (1.0 - self.puncture_rate) * self.base.g_moment_limit()
    }
}

impl EffectiveChannel {
    pub fn is_bec(&self) -> bool {
        matches!(self.base, ChannelModel::Bec { .. })
    }
}

/// Binary entropy function (base 2).
pub fn h2(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -(x * x.log2() + (1.0 - x) * (1.0 - x).log2())
}

#[derive(Debug, Clone, Copy)]
pub struct H2Series {
    /// Rigorous lower estimate of h2(x) after `pmax` series terms.
    pub partial_sum: f64,
    /// Nonnegative bound on h2(x) - partial_sum.
    pub remainder_bound: f64,
}

/// Truncation of the entropy series
/// `h2(x) = 1 - (1/(2 ln 2)) sum_p (1-2x)^(2p) / (p(2p-1))`
/// with a rigorous tail bound: the tail factor (1-2x)^(2p) is bounded by its
/// value at pmax, and the tail of `sum 1/(p(2p-1))` is `2 ln 2` minus the
/// partial sum.
pub fn h2_series(x: f64, pmax: usize) -> H2Series {
    assert!(pmax >= 1);
    let z = (1.0 - 2.0 * x).powi(2); // (1-2x)^2
    let mut series = 0.0;
    let mut harmonic = 0.0;
    let mut zp = 1.0;
    for p in 1..=pmax {
        zp *= z;
        let c = 1.0 / (p as f64 * (2.0 * p as f64 - 1.0));
        series += c * zp;
        harmonic += c;
    }
    let tail_bound = zp * (2.0 * LN2 - harmonic).max(0.0);
    let partial_sum = 1.0 - (series + tail_bound) / (2.0 * LN2);
    H2Series {
        partial_sum,
        remainder_bound: tail_bound / (2.0 * LN2),
    }
}

/// An MBIOS channel given by a finite LLR mass function under input 1.
/// Serves as the exhaustive-oracle channel representation.
#[derive(Debug, Clone)]
pub struct DiscreteMbios {
    /// (llr, probability) pairs; +inf llr encodes a perfect observation.
    pub mass: Vec<(f64, f64)>,
}

impl DiscreteMbios {
    pub fn new(mass: Vec<(f64, f64)>) -> Result<Self> {
        let total: f64 = mass.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("LLR mass sums to {total}")));
        }
        if mass.iter().any(|&(_, p)| p < 0.0) {
            return Err(Error::validation("negative probability mass"));
        }
        Ok(DiscreteMbios { mass })
    }

    pub fn from_channel(ch: &ChannelModel) -> Result<DiscreteMbios> {
        ch.validate()?;
        match *ch {
            ChannelModel::Bec { eps } => {
                DiscreteMbios::new(vec![(f64::INFINITY, 1.0 - eps), (0.0, eps)])
            }
            ChannelModel::Bsc { w } => {
                if w == 0.0 {
                    return DiscreteMbios::new(vec![(f64::INFINITY, 1.0)]);
                }
                let l = ((1.0 - w) / w).ln();
                DiscreteMbios::new(vec![(l, 1.0 - w), (-l, w)])
            }
            ChannelModel::Biawgn { sigma } => DiscreteMbios::quantized_biawgn(sigma, 8),
        }
    }

    /// Quantizes the BIAWGN output into `bins` symmetric intervals (bins must
    /// be even). Symmetric binning preserves the MBIOS structure.
    pub fn quantized_biawgn(sigma: f64, bins: usize) -> Result<DiscreteMbios> {
        if bins < 2 || bins % 2 != 0 {
            return Err(Error::validation("bin count must be even and >= 2"));
        }
        // Interior thresholds at multiples of 0.5 in y-space, symmetric in 0:
        // -inf, -(half-1)*d, ..., -d, 0, d, ..., (half-1)*d, +inf.
        let half = bins / 2;
        let d = 0.5;
        let mut edges: Vec<f64> = Vec::with_capacity(bins + 1);
        edges.push(f64::NEG_INFINITY);
        for k in -(half as i32 - 1)..=(half as i32 - 1) {
            edges.push(k as f64 * d);
        }
        edges.push(f64::INFINITY);

        // Bin probabilities given transmitted symbol +1 (y ~ N(1, sigma^2))
        // and -1; the LLR of a bin is the log-ratio of the two.
        let mut mass = Vec::with_capacity(bins);
        for win in edges.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let p_plus = normal_cdf((hi - 1.0) / sigma) - normal_cdf((lo - 1.0) / sigma);
            let p_minus = normal_cdf((hi + 1.0) / sigma) - normal_cdf((lo + 1.0) / sigma);
            let llr = if p_minus == 0.0 {
                f64::INFINITY
            } else if p_plus == 0.0 {
                f64::NEG_INFINITY
            } else {
                (p_plus / p_minus).ln()
            };
            mass.push((llr, p_plus));
        }
        DiscreteMbios::new(mass)
    }

    pub fn uncoded_error_prob(&self) -> f64 {
        self.mass
            .iter()
            .map(|&(l, p)| {
                if l < 0.0 {
                    p
                } else if l == 0.0 {
                    0.5 * p
                } else {
                    0.0
                }
            })
            .sum()
    }
}

impl Mbios for DiscreteMbios {
    fn capacity(&self, _ctrl: &NumericControls) -> Result<f64> {
        Ok(1.0 - self
            .mass
            .iter()
            .map(|&(l, p)| p * log2_1p_exp(-l))
            .sum::<f64>())
    }

    fn g_moment(&self, p: usize, _ctrl: &NumericControls) -> Result<f64> {
        if p == 0 {
            return Err(Error::validation("moment order p must be >= 1"));
        }
        Ok(self
            .mass
            .iter()
            .map(|&(l, q)| {
                let t = if l.is_infinite() { l.signum() } else { (l / 2.0).tanh() };
                q * t.powi(2 * p as i32)
            })
            .sum())
    }

    fn g_moment_limit(&self) -> f64 {
        self.mass
            .iter()
            .filter(|&&(l, _)| l.is_infinite())
            .map(|&(_, p)| p)
            .sum()
    }
}

/// E_b/N_0 in dB for a BIAWGN channel at noise std `sigma` and code rate
/// `rate`: E_b/N_0 = 1/(2 R sigma^2).
pub fn ebno_db_from_sigma(sigma: f64, rate: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(rate > 0.0) {
        return Err(Error::validation("sigma and rate must be positive"));
    }
    Ok(10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10())
}

pub fn sigma_from_ebno_db(ebno_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::validation("rate must be positive"));
    }
    let ebno = 10f64.powf(ebno_db / 10.0);
    Ok((1.0 / (2.0 * rate * ebno)).sqrt())
}

/// Gaussian tail probability Q(x) = Pr(N(0,1) > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(x: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// log2(1 + e^x), stable for large |x|.
pub fn log2_1p_exp(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let ln = if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    };
    ln / LN2
}

/// Expectation of `f` under the BIAWGN LLR law N(2/sigma^2, 4/sigma^2),
/// by Gauss-Hermite with a secondary rule and adaptive-Simpson fallback when
/// the two rules disagree beyond the requested tolerance.
fn biawgn_expectation(
    sigma: f64,
    ctrl: &NumericControls,
    f: impl Fn(f64) -> f64 + Copy,
) -> Result<f64> {
    ctrl.validate()?;
    let mean = 2.0 / (sigma * sigma);
    let std = 2.0 / sigma;
    let primary = gauss_hermite(ctrl.quad_nodes).gaussian_expectation(mean, std, f);
    let check_nodes = (2 * ctrl.quad_nodes / 3).max(3) | 1;
    let secondary = gauss_hermite(check_nodes).gaussian_expectation(mean, std, f);
    if (primary - secondary).abs() <= ctrl.quad_rel_tol * primary.abs().max(1.0) {
        return Ok(primary);
    }
    // The Hermite rules disagree (typically at extreme sigma, where tiny tail
    // contributions dominate); fall back to adaptive Simpson and keep only a
    // coarse consistency check against the rules.
    let pdf_norm = 1.0 / (std * (2.0 * std::f64::consts::PI).sqrt());
    let g = |l: f64| {
        let z = (l - mean) / std;
        f(l) * pdf_norm * (-0.5 * z * z).exp()
    };
    // One panel per standard deviation, so a narrow off-center lobe cannot
    // slip between the initial sample points of the adaptive rule.
    let simpson: f64 = (-14..14)
        .map(|k| {
            let a = mean + k as f64 * std;
            adaptive_simpson(&g, a, a + std, ctrl.quad_rel_tol / 28.0)
        })
        .sum();
    let disagreement = (primary - simpson).abs() / simpson.abs().max(1.0);
    if disagreement > 1e-5 {
        return Err(Error::Numeric {
            msg: format!("BIAWGN quadrature failed for sigma={sigma}"),
            achieved: disagreement,
        });
    }
    Ok(simpson)
}
