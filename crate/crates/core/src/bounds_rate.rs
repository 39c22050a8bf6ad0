//! Upper bounds on the achievable rates of LDPC ensembles under ML decoding:
//! the parallel-channel bound, its BEC closed form, and the random- and
//! intentional-puncturing specializations.

use serde::Serialize;

use crate::channel::{ChannelModel, Mbios, NumericControls, LN2};
use crate::degree::{DegreePolynomial, Perspective, Side};
use crate::error::{Error, Result};
use crate::parallel::{ParallelAssignment, RandomAssignment};

/// A computed bound value together with the numeric-control metadata that
/// produced it.
#[derive(Debug, Clone, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub series_terms_used: usize,
    pub series_remainder_bound: f64,
    pub controls: NumericControls,
}

fn require_gamma(gamma: &DegreePolynomial) -> Result<()> {
    if gamma.perspective() != Perspective::Node || gamma.side() != Side::Check {
        return Err(Error::validation("Gamma must be check-side node-perspective"));
    }
    Ok(())
}

/// Evaluates `sum_p Gamma(arg(p)) / (p(2p-1))` with a rigorous tail bound.
/// The arguments decrease towards `arg_limit`, so the series is summed as
/// `2 ln 2 * Gamma(arg_limit)` (exact, using `sum_p 1/(p(2p-1)) = 2 ln 2`)
/// plus the excess terms `Gamma(arg(p)) - Gamma(arg_limit)`; the tail of the
/// excess is at most its last term times the remaining harmonic weight.
/// Constant arguments (all-BEC assignments) are therefore summed exactly.
fn gamma_series(
    gamma: &DegreePolynomial,
    mut arg: impl FnMut(usize) -> Result<f64>,
    arg_limit: f64,
    ctrl: &NumericControls,
) -> Result<(f64, usize, f64)> {
    if !(0.0..=1.0 + 1e-12).contains(&arg_limit) {
        return Err(Error::Numeric {
            msg: format!("series argument limit {arg_limit} outside [0,1]"),
            achieved: arg_limit,
        });
    }
    let floor = gamma.eval(arg_limit.min(1.0));
    let mut sum = 2.0 * LN2 * floor;
    let mut harmonic = 0.0;
    let mut tail = f64::INFINITY;
    let mut terms = ctrl.series_pmax;
    for p in 1..=ctrl.series_pmax {
        let a = arg(p)?;
        if !(0.0..=1.0 + 1e-12).contains(&a) {
            return Err(Error::Numeric {
                msg: format!("series argument {a} outside [0,1] at p={p}"),
                achieved: a,
            });
        }
        let excess = (gamma.eval(a.min(1.0)) - floor).max(0.0);
        let c = 1.0 / (p as f64 * (2.0 * p as f64 - 1.0));
        sum += c * excess;
        harmonic += c;
        tail = (2.0 * LN2 - harmonic).max(0.0) * excess;
        if tail / (2.0 * LN2) < ctrl.series_tol {
            terms = p;
            break;
        }
    }
    Ok((sum, terms, tail))
}

/// Assembles `scale * (1 - (1 - cbar) / (1 - series/(2 ln 2)))` with the
/// truncated and tail-augmented series, reporting the difference as the
/// remainder bound.
fn assemble(
    scale: f64,
    cbar: f64,
    series: f64,
    terms: usize,
    tail: f64,
    ctrl: &NumericControls,
) -> Result<BoundResult> {
    let numerator = 1.0 - cbar;
    if numerator <= 0.0 {
        // Noiseless limit: any rate up to the scale factor is admissible.
        return Ok(BoundResult {
            value: scale,
            series_terms_used: terms,
            series_remainder_bound: 0.0,
            controls: ctrl.clone(),
        });
    }
    let denom = 1.0 - series / (2.0 * LN2);
    let denom_lo = 1.0 - (series + tail) / (2.0 * LN2);
    if denom_lo <= 0.0 || denom <= 0.0 {
        return Err(Error::degenerate(
            "series denominator is non-positive (channels carry no usable information)",
        ));
    }
    let value = scale * (1.0 - numerator / denom);
    let value_lo = scale * (1.0 - numerator / denom_lo);
    Ok(BoundResult {
        value,
        series_terms_used: terms,
        series_remainder_bound: (value - value_lo).max(0.0),
        controls: ctrl.clone(),
    })
}

/// Upper bound on the common design rate of LDPC ensembles over a parallel
/// MBIOS assignment.
pub fn rate_bound_parallel(
    a: &ParallelAssignment,
    gamma_node: &DegreePolynomial,
    ctrl: &NumericControls,
) -> Result<BoundResult> {
    require_gamma(gamma_node)?;
    ctrl.validate()?;
    let cbar = a.average_capacity(ctrl)?;
    let (series, terms, tail) = gamma_series(
        gamma_node,
        |p| a.edge_moment(p, ctrl),
        a.edge_moment_limit(),
        ctrl,
    )?;
    assemble(1.0, cbar, series, terms, tail, ctrl)
}

/// Closed form of the parallel-channel bound when every component channel is
/// a BEC; no series is involved.
pub fn rate_bound_bec(
    a: &ParallelAssignment,
    gamma_node: &DegreePolynomial,
    ctrl: &NumericControls,
) -> Result<BoundResult> {
    require_gamma(gamma_node)?;
    if !a.all_bec() {
        return Err(Error::validation("rate_bound_bec requires all-BEC channels"));
    }
    let cbar = a.average_capacity(ctrl)?;
    let avg_erasure = 1.0 - cbar;
    if avg_erasure <= 0.0 {
        return Ok(BoundResult {
            value: 1.0,
            series_terms_used: 0,
            series_remainder_bound: 0.0,
            controls: ctrl.clone(),
        });
    }
    let edge_survival = a.edge_moment(1, ctrl)?; // 1 - sum_j q_j eps_j
    let g = gamma_node.eval(edge_survival);
    if g >= 1.0 {
        return Err(Error::degenerate("Gamma(1 - sum q_j eps_j) = 1"));
    }
    Ok(BoundResult {
        value: 1.0 - avg_erasure / (1.0 - g),
        series_terms_used: 0,
        series_remainder_bound: 0.0,
        controls: ctrl.clone(),
    })
}

/// Upper bound on the design rate of randomly punctured ensembles: a
/// fraction alpha of the bits punctured at fixed rate p_pct over `base`.
pub fn rate_bound_rp(
    rp: &RandomAssignment,
    gamma_node: &DegreePolynomial,
    base: ChannelModel,
    ctrl: &NumericControls,
) -> Result<BoundResult> {
    require_gamma(gamma_node)?;
    ctrl.validate()?;
    let gamma_overall = rp.alpha * rp.p_pct;
    if gamma_overall >= 1.0 {
        return Err(Error::degenerate("all code bits punctured"));
    }
    let c = base.capacity(ctrl)?;
    let cbar = (1.0 - gamma_overall) * c;
    let factor = rp.surrogate_factor();
    let (series, terms, tail) = gamma_series(
        gamma_node,
        |p| Ok(factor * base.g_moment(p, ctrl)?),
        factor * base.g_moment_limit(),
        ctrl,
    )?;
    assemble(1.0 / (1.0 - gamma_overall), cbar, series, terms, tail, ctrl)
}

/// Upper bound on the design rate of intentionally punctured ensembles with
/// per-degree rates `pi`.
pub fn rate_bound_ip(
    lambda_edge: &DegreePolynomial,
    big_lambda: &DegreePolynomial,
    gamma_node: &DegreePolynomial,
    base: ChannelModel,
    pi: &std::collections::BTreeMap<u32, f64>,
    ctrl: &NumericControls,
) -> Result<BoundResult> {
    require_gamma(gamma_node)?;
    ctrl.validate()?;
    let mut p0 = 0.0; // node-weighted average puncturing rate
    let mut lam_pi = 0.0; // edge-weighted average puncturing rate
    for (&d, &rate) in pi {
        if lambda_edge.weight(d) == 0.0 {
            return Err(Error::validation(format!(
                "puncturing references degree {d} outside the lambda support"
            )));
        }
        p0 += big_lambda.weight(d) * rate;
        lam_pi += lambda_edge.weight(d) * rate;
    }
    if p0 >= 1.0 {
        return Err(Error::degenerate("all code bits punctured"));
    }
    let c = base.capacity(ctrl)?;
    let cbar = (1.0 - p0) * c;
    let factor = 1.0 - lam_pi;
    let (series, terms, tail) = gamma_series(
        gamma_node,
        |p| Ok(factor * base.g_moment(p, ctrl)?),
        factor * base.g_moment_limit(),
        ctrl,
    )?;
    assemble(1.0 / (1.0 - p0), cbar, series, terms, tail, ctrl)
}

/// Design rate of a punctured code: the mother-code design rate scaled by the
/// surviving fraction of bits.
pub fn punctured_design_rate(mother_design_rate: f64, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::validation(format!(
            "overall puncturing rate {gamma} must be in [0,1)"
        )));
    }
    Ok(mother_design_rate / (1.0 - gamma))
}
