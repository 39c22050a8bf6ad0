//! Threshold solvers: capacity limits, ML-decoding lower-bound thresholds by
//! bisection on the rate bounds, iterative-decoding thresholds by density
//! evolution, and the combined table report.

pub mod de;

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds_rate::{rate_bound_ip, rate_bound_rp};
use crate::channel::{ebno_db_from_sigma, ChannelModel, Mbios, NumericControls};
use crate::degree::{design_rate, DegreePolynomial, Perspective};
use crate::error::{Error, Result};
use crate::parallel::{rp_assignment, PuncturingSpec};
use de::{bec_threshold, biawgn_converges, DeGrid, DEControls};

/// Channel family with a single scalar noise parameter theta (erasure
/// probability, crossover probability, or noise standard deviation); channel
/// quality is strictly decreasing in theta for every family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFamily {
    Bec,
    Bsc,
    Biawgn,
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<ChannelFamily> {
        match s {
            "bec" => Ok(ChannelFamily::Bec),
            "bsc" => Ok(ChannelFamily::Bsc),
            "biawgn" => Ok(ChannelFamily::Biawgn),
            other => Err(Error::validation(format!("unknown channel family `{other}`"))),
        }
    }
}

impl ChannelFamily {
    pub fn channel(&self, theta: f64) -> Result<ChannelModel> {
        let ch = match self {
            ChannelFamily::Bec => ChannelModel::Bec { eps: theta },
            ChannelFamily::Bsc => ChannelModel::Bsc { w: theta },
            ChannelFamily::Biawgn => ChannelModel::Biawgn { sigma: theta },
        };
        ch.validate()?;
        Ok(ch)
    }

    /// (best, worst) endpoints of the searchable parameter range.
    fn param_range(&self) -> (f64, f64) {
        match self {
            ChannelFamily::Bec => (1e-9, 1.0 - 1e-9),
            ChannelFamily::Bsc => (1e-9, 0.5 - 1e-9),
            ChannelFamily::Biawgn => (0.02, 50.0),
        }
    }

    /// Reported threshold unit: E_b/N_0 in dB for BIAWGN (at code rate
    /// `rate`), the raw parameter otherwise.
    fn report(&self, theta: f64, rate: f64) -> Result<f64> {
        match self {
            ChannelFamily::Biawgn => ebno_db_from_sigma(theta, rate),
            _ => Ok(theta),
        }
    }
}

/// Noise parameter at which the channel capacity equals `rate` (the Shannon
/// limit for that rate); reported in dB for BIAWGN.
pub fn capacity_limit(rate: f64, family: ChannelFamily, ctrl: &NumericControls) -> Result<f64> {
    let theta = capacity_limit_param(rate, family, ctrl)?;
    family.report(theta, rate)
}

/// Same as [`capacity_limit`] but always in the channel's native parameter.
pub fn capacity_limit_param(
    rate: f64,
    family: ChannelFamily,
    ctrl: &NumericControls,
) -> Result<f64> {
    if !(0.0 < rate && rate < 1.0) {
        return Err(Error::validation(format!("rate {rate} must be in (0,1)")));
    }
    ctrl.validate()?;
    let (mut lo, mut hi) = family.param_range();
    let cap = |theta: f64| family.channel(theta)?.capacity(ctrl);
    if cap(lo)? < rate {
        return Err(Error::validation(format!(
            "rate {rate} is unachievable even at the best searchable parameter"
        )));
    }
    if cap(hi)? > rate {
        return Err(Error::validation(format!(
            "rate {rate} is achievable even at the worst searchable parameter"
        )));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cap(mid)? >= rate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Overall fraction of punctured bits implied by a puncturing pattern.
pub fn overall_puncture_fraction(
    big_lambda: &DegreePolynomial,
    pattern: &PuncturingSpec,
) -> Result<f64> {
    pattern.validate()?;
    match pattern {
        PuncturingSpec::Intentional { pi } => {
            Ok(pi.iter().map(|&(d, r)| big_lambda.weight(d) * r).sum())
        }
        PuncturingSpec::Random { alpha, p_pct } => Ok(alpha * p_pct),
    }
}

fn rate_bound_for(
    lambda: &DegreePolynomial,
    big_lambda: &DegreePolynomial,
    gamma_node: &DegreePolynomial,
    pattern: &PuncturingSpec,
    base: ChannelModel,
    ctrl: &NumericControls,
) -> Result<f64> {
    match pattern {
        PuncturingSpec::Intentional { .. } => {
            let pi = pattern.intentional_map().unwrap();
            Ok(rate_bound_ip(lambda, big_lambda, gamma_node, base, &pi, ctrl)?.value)
        }
        PuncturingSpec::Random { alpha, p_pct } => {
            let rp = rp_assignment(lambda, base, *alpha, *p_pct, ctrl)?;
            Ok(rate_bound_rp(&rp, gamma_node, base, ctrl)?.value)
        }
    }
}

/// Worst channel parameter at which the achievable-rate upper bound still
/// reaches the punctured design rate: below it, reliable communication at
/// that rate is impossible for the ensemble under any decoding. Reported in
/// dB for BIAWGN.
pub fn ml_threshold(
    lambda: &DegreePolynomial,
    rho: &DegreePolynomial,
    pattern: &PuncturingSpec,
    family: ChannelFamily,
    ctrl: &NumericControls,
) -> Result<f64> {
    let r_d = design_rate(lambda, rho)?;
    let big_lambda = lambda.convert(Perspective::Node);
    let gamma_node = rho.convert(Perspective::Node);
    let gamma = overall_puncture_fraction(&big_lambda, pattern)?;
    if gamma >= 1.0 {
        return Err(Error::degenerate("all code bits punctured"));
    }
    let target = r_d / (1.0 - gamma);
    if !(0.0 < target && target < 1.0) {
        return Err(Error::validation(format!(
            "punctured design rate {target} must be in (0,1)"
        )));
    }

    // Above the capacity limit the bound is already below the design rate, so
    // the threshold lies at a better parameter.
    let mut bad = capacity_limit_param(target, family, ctrl)?;
    let f = |theta: f64| -> Result<f64> {
        let base = family.channel(theta)?;
        Ok(rate_bound_for(lambda, &big_lambda, &gamma_node, pattern, base, ctrl)? - target)
    };
    if f(bad)? > 0.0 {
        return Err(Error::Numeric {
            msg: "rate bound exceeds the design rate at the capacity limit".into(),
            achieved: f(bad)?,
        });
    }
    let mut good = family.param_range().0;
    let mut expand = 0;
    while f(good)? <= 0.0 {
        expand += 1;
        good = 0.5 * (good + bad);
        if expand > 40 {
            return Err(Error::Bracket(
                "rate bound never reaches the design rate inside the search range".into(),
            ));
        }
    }

    // The bound must be monotone along the bracket for bisection to be
    // meaningful; sample before trusting it.
    let samples = 9;
    let mut prev = f64::INFINITY;
    for k in 0..=samples {
        let theta = good + (bad - good) * k as f64 / samples as f64;
        let v = f(theta)?;
        if v > prev + 1e-9 {
            return Err(Error::NonMonotone(format!(
                "rate bound increases with worsening channel near theta = {theta}"
            )));
        }
        prev = v;
    }

    for _ in 0..100 {
        let mid = 0.5 * (good + bad);
        if f(mid)? > 0.0 {
            good = mid;
        } else {
            bad = mid;
        }
        if bad - good < 1e-11 * bad.max(1.0) {
            break;
        }
    }
    family.report(0.5 * (good + bad), target)
}

/// Iterative-decoding threshold by density evolution; BEC and BIAWGN only.
/// Reported in dB for BIAWGN.
pub fn de_threshold(
    lambda: &DegreePolynomial,
    rho: &DegreePolynomial,
    pattern: &PuncturingSpec,
    family: ChannelFamily,
    de_ctrl: &DEControls,
    ctrl: &NumericControls,
) -> Result<f64> {
    let pi = pattern
        .intentional_map()
        .ok_or_else(|| Error::validation("density evolution needs an intentional pattern"))?;
    match family {
        ChannelFamily::Bec => bec_threshold(lambda, rho, &pi, de_ctrl),
        ChannelFamily::Biawgn => biawgn_de_threshold_db(lambda, rho, &pi, de_ctrl, ctrl),
        ChannelFamily::Bsc => Err(Error::validation(
            "density evolution is implemented for bec and biawgn only",
        )),
    }
}

fn biawgn_de_threshold_db(
    lambda: &DegreePolynomial,
    rho: &DegreePolynomial,
    pi: &BTreeMap<u32, f64>,
    de_ctrl: &DEControls,
    ctrl: &NumericControls,
) -> Result<f64> {
    let r_d = design_rate(lambda, rho)?;
    let big_lambda = lambda.convert(Perspective::Node);
    let p0: f64 = pi.iter().map(|(&d, &r)| big_lambda.weight(d) * r).sum();
    if p0 >= 1.0 {
        return Err(Error::Bracket("all code bits punctured".into()));
    }
    let rate = r_d / (1.0 - p0);
    let grid = DeGrid::new(de_ctrl)?;
    let converges = |db: f64| -> Result<bool> {
        let sigma = crate::channel::sigma_from_ebno_db(db, rate)?;
        biawgn_converges(&grid, lambda, rho, pi, sigma, de_ctrl)
    };
    // Density evolution cannot beat capacity, so bracket upward from there.
    let mut lo = capacity_limit(rate, ChannelFamily::Biawgn, ctrl)?;
    let mut hi = lo + 6.0;
    let mut expand = 0;
    while !converges(hi)? {
        lo = hi;
        hi += 6.0;
        expand += 1;
        if expand > 3 {
            return Err(Error::Bracket(format!(
                "density evolution does not converge even at {hi} dB"
            )));
        }
    }
    while hi - lo > de_ctrl.bisection_tol_db {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One row of the threshold comparison table. For BIAWGN the three threshold
/// columns are E_b/N_0 in dB; for BEC/BSC they hold the native parameter.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub pattern_id: String,
    pub design_rate: f64,
    pub capacity_limit_db: f64,
    pub ml_bound_db: f64,
    pub it_threshold_db: Option<f64>,
    pub fractional_gap: Option<f64>,
}

/// Rayon pool sized by the `LDPCB_THREADS` environment variable (default: all
/// processors).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("LDPCB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Error::validation(format!("LDPCB_THREADS=`{v}` is not a number")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::validation(format!("thread pool: {e}")))
}

/// Computes one table row per puncturing pattern: punctured design rate,
/// capacity limit, ML-bound threshold, optional iterative threshold, and the
/// fractional gap `(ml - cap) / (it - cap)`.
pub fn table_report(
    lambda: &DegreePolynomial,
    rho: &DegreePolynomial,
    patterns: &[(String, PuncturingSpec)],
    family: ChannelFamily,
    with_de: bool,
    ctrl: &NumericControls,
    de_ctrl: &DEControls,
) -> Result<Vec<ThresholdRow>> {
    let r_d = design_rate(lambda, rho)?;
    let big_lambda = lambda.convert(Perspective::Node);
    let pool = thread_pool()?;
    pool.install(|| {
        patterns
            .par_iter()
            .map(|(id, pattern)| {
                let gamma = overall_puncture_fraction(&big_lambda, pattern)?;
                if gamma >= 1.0 {
                    return Err(Error::degenerate(format!("pattern {id}: all bits punctured")));
                }
                let rate = r_d / (1.0 - gamma);
                let cap = capacity_limit(rate, family, ctrl)?;
                let ml = ml_threshold(lambda, rho, pattern, family, ctrl)?;
                let de_ok = with_de
                    && matches!(pattern, PuncturingSpec::Intentional { .. })
                    && family != ChannelFamily::Bsc;
                let it = if de_ok {
                    Some(de_threshold(lambda, rho, pattern, family, de_ctrl, ctrl)?)
                } else {
                    None
                };
                let fractional_gap = it.and_then(|it_v| {
                    let denom = it_v - cap;
                    (denom.abs() > 1e-12).then(|| (ml - cap) / denom)
                });
                Ok(ThresholdRow {
                    pattern_id: id.clone(),
                    design_rate: rate,
                    capacity_limit_db: cap,
                    ml_bound_db: ml,
                    it_threshold_db: it,
                    fractional_gap,
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::Side;

    #[test]
    fn bec_capacity_limit_is_one_minus_rate() {
        let ctrl = NumericControls::default();
        let e = capacity_limit(0.5, ChannelFamily::Bec, &ctrl).unwrap();
        assert!((e - 0.5).abs() < 1e-9, "{e}");
    }

    #[test]
    fn bsc_capacity_limit_matches_entropy_inverse() {
        let ctrl = NumericControls::default();
        let w = capacity_limit(0.5, ChannelFamily::Bsc, &ctrl).unwrap();
        assert!((crate::channel::h2(w) - 0.5).abs() < 1e-9, "{w}");
    }

    #[test]
    fn biawgn_capacity_limit_rate_half() {
        let ctrl = NumericControls::default();
        let db = capacity_limit(0.5, ChannelFamily::Biawgn, &ctrl).unwrap();
        assert!((db - 0.187).abs() < 0.005, "{db}");
    }

    #[test]
    fn regular_3_6_ml_threshold_above_capacity() {
        let lambda =
            DegreePolynomial::new([(3, 1.0)], Perspective::Edge, Side::Variable).unwrap();
        let rho = DegreePolynomial::new([(6, 1.0)], Perspective::Edge, Side::Check).unwrap();
        let ctrl = NumericControls::default();
        let pattern = PuncturingSpec::none();
        let cap = capacity_limit(0.5, ChannelFamily::Biawgn, &ctrl).unwrap();
        let ml = ml_threshold(&lambda, &rho, &pattern, ChannelFamily::Biawgn, &ctrl).unwrap();
        assert!(ml > cap, "ml {ml} <= cap {cap}");
        assert!(ml < cap + 2.0, "ml {ml} implausibly far from capacity");
    }
}
