//! Lower bounds on the graphical and decoding complexity needed to approach
//! capacity: the parallel-channel bound in the form `K1 + K2 ln(1/eps)`, its
//! puncturing specializations, and an independent bound for comparison.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::{ChannelModel, Mbios, NumericControls, LN2};
use crate::degree::{DegreePolynomial, Perspective, Side};
use crate::error::{Error, Result};
use crate::parallel::{ParallelAssignment, RandomAssignment};

/// Whether the logarithm inside K1 carries the MBIOS-generic `1/(2 ln 2)`
/// factor or the sharper all-BEC form without it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityVariant {
    Mbios,
    Bec,
}

/// Coefficients of the complexity lower bound `K1 + K2 ln(1/eps)`, where
/// `eps` is the fractional gap to the (average) capacity.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityBound {
    pub k1: f64,
    pub k2: f64,
    pub variant: ComplexityVariant,
}

impl ComplexityBound {
    /// Evaluates the bound at capacity gap `eps`.
    pub fn value(&self, eps: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&eps) || eps == 0.0 {
            return Err(Error::validation(format!(
                "capacity gap {eps} must be in (0,1)"
            )));
        }
        Ok(self.k1 + self.k2 * (1.0 / eps).ln())
    }
}

/// Graphical complexity (edges per information bit) of an ensemble with the
/// given design rate and average right degree.
pub fn chi_d(design_rate: f64, avg_right_degree: f64) -> Result<f64> {
    if !(0.0 < design_rate && design_rate < 1.0) {
        return Err(Error::validation(format!(
            "design rate {design_rate} must be in (0,1)"
        )));
    }
    Ok((1.0 - design_rate) / design_rate * avg_right_degree)
}

/// Graphical complexity of a punctured ensemble, measured per information bit
/// of the punctured code; `rate` is the punctured (higher) design rate and
/// `gamma` the overall fraction of punctured bits.
pub fn chi_d_punctured(rate: f64, gamma: f64, avg_right_degree: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::validation(format!(
            "puncturing fraction {gamma} must be in [0,1)"
        )));
    }
    let survived = (1.0 - gamma) * rate;
    if !(0.0 < survived && survived < 1.0) {
        return Err(Error::validation(format!(
            "(1 - gamma) * rate = {survived} must be in (0,1)"
        )));
    }
    Ok((1.0 - survived) / survived * avg_right_degree)
}

/// `Gamma(alpha)` and its lower bound `alpha^(a_R)` with `a_R = Gamma'(1)`;
/// the first dominates the second for any alpha >= 0 (Jensen's inequality on
/// the convex map `i -> alpha^i`).
pub fn gamma_power_lower(gamma_node: &DegreePolynomial, alpha: f64) -> Result<(f64, f64)> {
    if gamma_node.perspective() != Perspective::Node || gamma_node.side() != Side::Check {
        return Err(Error::validation("Gamma must be check-side node-perspective"));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::validation(format!("alpha {alpha} must be >= 0")));
    }
    let a_r = gamma_node.derivative_at_one();
    Ok((gamma_node.eval(alpha), alpha.powf(a_r)))
}

fn k1_k2(cbar: f64, s1: f64, variant: ComplexityVariant) -> Result<ComplexityBound> {
    if !(0.0 < cbar && cbar < 1.0) {
        return Err(Error::degenerate(format!(
            "average capacity {cbar} must be in (0,1) for the complexity bound"
        )));
    }
    if !(0.0 < s1 && s1 < 1.0) {
        return Err(Error::degenerate(format!(
            "edge moment {s1} must be in (0,1) for the complexity bound"
        )));
    }
    let inner = (1.0 - cbar) / cbar
        * match variant {
            ComplexityVariant::Bec => 1.0,
            ComplexityVariant::Mbios => 1.0 / (2.0 * LN2),
        };
    let ln_s1 = s1.ln();
    Ok(ComplexityBound {
        k1: -(1.0 - cbar) * inner.ln() / (cbar * ln_s1),
        k2: -(1.0 - cbar) / (cbar * ln_s1),
        variant,
    })
}

/// Complexity bound coefficients for a general parallel-channel assignment.
pub fn complexity_bound_parallel(
    a: &ParallelAssignment,
    ctrl: &NumericControls,
) -> Result<ComplexityBound> {
    let variant = if a.all_bec() {
        ComplexityVariant::Bec
    } else {
        ComplexityVariant::Mbios
    };
    k1_k2(a.average_capacity(ctrl)?, a.edge_moment(1, ctrl)?, variant)
}

/// Complexity bound coefficients for randomly punctured ensembles.
pub fn complexity_bound_rp(
    rp: &RandomAssignment,
    base: ChannelModel,
    ctrl: &NumericControls,
) -> Result<ComplexityBound> {
    let variant = if matches!(base, ChannelModel::Bec { .. }) {
        ComplexityVariant::Bec
    } else {
        ComplexityVariant::Mbios
    };
    let cbar = (1.0 - rp.alpha * rp.p_pct) * base.capacity(ctrl)?;
    let s1 = rp.surrogate_factor() * base.g_moment(1, ctrl)?;
    k1_k2(cbar, s1, variant)
}

/// Complexity bound coefficients for intentionally punctured ensembles; the
/// effective capacity here is scaled by the edge-weighted surviving fraction.
pub fn complexity_bound_ip(
    lambda_edge: &DegreePolynomial,
    base: ChannelModel,
    pi: &BTreeMap<u32, f64>,
    ctrl: &NumericControls,
) -> Result<ComplexityBound> {
    let variant = if matches!(base, ChannelModel::Bec { .. }) {
        ComplexityVariant::Bec
    } else {
        ComplexityVariant::Mbios
    };
    let mut lam_pi = 0.0;
    for (&d, &rate) in pi {
        let w = lambda_edge.weight(d);
        if w == 0.0 {
            return Err(Error::validation(format!(
                "puncturing references degree {d} outside the lambda support"
            )));
        }
        lam_pi += w * rate;
    }
    let survive = 1.0 - lam_pi;
    let cbar = survive * base.capacity(ctrl)?;
    let s1 = survive * base.g_moment(1, ctrl)?;
    k1_k2(cbar, s1, variant)
}

/// The puncturing fraction that makes a rate-`(1 - eps')`-of-capacity mother
/// code hit the design point after random puncturing at rate `p_pct`.
pub fn matched_alpha(capacity: f64, p_pct: f64, eps: f64) -> Result<f64> {
    if !(0.0 < capacity && capacity <= 1.0) || !(0.0..1.0).contains(&p_pct) {
        return Err(Error::validation("need capacity in (0,1] and p_pct in [0,1)"));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::validation(format!("eps {eps} must be in (0,1)")));
    }
    Ok((1.0 - eps) * capacity / (1.0 + (1.0 - eps) * capacity * p_pct))
}

/// Independent complexity lower bound for randomly punctured ensembles over a
/// general MBIOS channel, used as a comparison baseline.
pub fn pfister_bound_mbios(
    base: ChannelModel,
    p_pct: f64,
    eps: f64,
    ctrl: &NumericControls,
) -> Result<f64> {
    if !(0.0..1.0).contains(&p_pct) || !(0.0 < eps && eps < 1.0) {
        return Err(Error::validation("need p_pct in [0,1) and eps in (0,1)"));
    }
    let c = base.capacity(ctrl)?;
    if !(0.0 < c && c < 1.0) {
        return Err(Error::degenerate(format!("capacity {c} must be in (0,1)")));
    }
    let w = base.uncoded_error_prob();
    let contraction = (1.0 - p_pct) * (1.0 - 2.0 * w);
    if !(0.0 < contraction && contraction < 1.0) {
        return Err(Error::degenerate(format!(
            "per-edge contraction {contraction} must be in (0,1)"
        )));
    }
    let inner = (1.0 / eps) * (1.0 - (1.0 - p_pct) * c) / (2.0 * c * LN2);
    Ok((1.0 - c) / (2.0 * c) * inner.ln() / (1.0 / contraction).ln())
}

/// All-BEC sharpening of the comparison bound, obtained by tracking the exact
/// erasure propagation instead of the generic moment inequality.
pub fn pfister_bound_bec(erasure: f64, p_pct: f64, eps: f64) -> Result<f64> {
    if !(0.0 < erasure && erasure < 1.0) || !(0.0..1.0).contains(&p_pct) {
        return Err(Error::validation("need erasure in (0,1) and p_pct in [0,1)"));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::validation(format!("eps {eps} must be in (0,1)")));
    }
    let c = 1.0 - erasure;
    let alpha = matched_alpha(c, p_pct, eps)?;
    let b = (1.0 - alpha * p_pct) * c;
    let g = (1.0 - p_pct) * c;
    if !(0.0 < g && g < 1.0) {
        return Err(Error::degenerate(format!("contraction {g} must be in (0,1)")));
    }
    let ratio = eps * b / (1.0 - (1.0 - eps) * b);
    if !(0.0 < ratio && ratio < 1.0) {
        return Err(Error::degenerate(format!("rate ratio {ratio} must be in (0,1)")));
    }
    let a_r = ratio.ln() / g.ln();
    Ok((1.0 - c) / c * a_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NumericControls;
    use crate::degree::{DegreePolynomial, Perspective, Side};

    fn gamma_regular(d: u32) -> DegreePolynomial {
        DegreePolynomial::new([(d, 1.0)], Perspective::Node, Side::Check).unwrap()
    }

    #[test]
    fn bound_grows_logarithmically_in_inverse_gap() {
        let b = ComplexityBound {
            k1: 0.5,
            k2: 2.0,
            variant: ComplexityVariant::Mbios,
        };
        let v1 = b.value(0.1).unwrap();
        let v2 = b.value(0.01).unwrap();
        assert!((v2 - v1 - 2.0 * 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn regular_graphical_complexity() {
        // (3,6)-regular: rate 1/2, so (1 - R)/R * a_R = 6.
        assert!((chi_d(0.5, 6.0).unwrap() - 6.0).abs() < 1e-12);
        // Unpunctured special case agrees with the general form.
        let a = chi_d_punctured(0.5, 0.0, 6.0).unwrap();
        assert!((a - 6.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_dominates_its_power_lower_bound() {
        let g = gamma_regular(6);
        for i in 0..=150 {
            let alpha = i as f64 / 100.0;
            let (exact, lower) = gamma_power_lower(&g, alpha).unwrap();
            assert!(exact >= lower - 1e-12, "alpha={alpha}: {exact} < {lower}");
        }
    }

    #[test]
    fn bec_comparison_bound_is_finite_and_positive() {
        let ctrl = NumericControls::default();
        let v = pfister_bound_bec(0.5, 0.1, 0.05).unwrap();
        assert!(v.is_finite() && v > 0.0, "{v}");
        let m = pfister_bound_mbios(ChannelModel::Bsc { w: 0.11 }, 0.1, 0.05, &ctrl).unwrap();
        assert!(m.is_finite() && m > 0.0, "{m}");
    }
}
