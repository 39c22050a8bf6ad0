//! Parallel-channel bookkeeping: bit fractions, edge fractions, average
//! capacity, and the mapping from puncturing specs to parallel-channel
//! assignments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{puncture_channel, ChannelModel, EffectiveChannel, Mbios, NumericControls};
use crate::degree::{DegreePolynomial, Perspective, Side};
use crate::error::{Error, Result};

const FRACTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct AssignmentEntry {
    pub channel: EffectiveChannel,
    /// Fraction of code bits on this channel.
    pub p: f64,
    /// Fraction of graph edges on this channel.
    pub q: f64,
}

/// J parallel channels with their bit and edge fractions. Both fraction
/// vectors must sum to one and be strictly positive.
#[derive(Debug, Clone)]
pub struct ParallelAssignment {
    entries: Vec<AssignmentEntry>,
}

impl ParallelAssignment {
    pub fn new(entries: Vec<AssignmentEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("assignment must have at least one channel"));
        }
        let sp: f64 = entries.iter().map(|e| e.p).sum();
        let sq: f64 = entries.iter().map(|e| e.q).sum();
        if (sp - 1.0).abs() > 1e-9 || (sq - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "fractions must sum to 1 (got p: {sp}, q: {sq})"
            )));
        }
        if entries.iter().any(|e| e.p <= 0.0 || e.q <= 0.0) {
            return Err(Error::validation("all bit and edge fractions must be positive"));
        }
        let mut entries = entries;
        if (sp - 1.0).abs() > FRACTION_TOL || (sq - 1.0).abs() > FRACTION_TOL {
            for e in &mut entries {
                e.p /= sp;
                e.q /= sq;
            }
        }
        Ok(ParallelAssignment { entries })
    }

    pub fn entries(&self) -> &[AssignmentEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn all_bec(&self) -> bool {
        self.entries.iter().all(|e| e.channel.is_bec())
    }

    /// Average capacity over the bit fractions.
    pub fn average_capacity(&self, ctrl: &NumericControls) -> Result<f64> {
        let mut acc = 0.0;
        for e in &self.entries {
            acc += e.p * e.channel.capacity(ctrl)?;
        }
        Ok(acc)
    }

    /// Overall puncturing rate, the p-weighted average of the per-channel
    /// puncture rates.
    pub fn overall_puncture_rate(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.p * e.channel.puncture_rate)
            .sum()
    }

    /// The edge-weighted moment sum entering the rate bound.
    pub fn edge_moment(&self, p: usize, ctrl: &NumericControls) -> Result<f64> {
        let mut acc = 0.0;
        for e in &self.entries {
            acc += e.q * e.channel.g_moment(p, ctrl)?;
        }
        Ok(acc)
    }

    /// Limit of [`Self::edge_moment`] as the order grows.
    pub fn edge_moment_limit(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.q * e.channel.g_moment_limit())
            .sum()
    }
}

/// How a code's bits are punctured: per-degree rates, or a fixed rate over an
/// a-priori selected fraction of the bits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PuncturingSpec {
    Intentional {
        pi: Vec<(u32, f64)>,
    },
    Random {
        alpha: f64,
        p_pct: f64,
    },
}

impl PuncturingSpec {
    pub fn none() -> Self {
        PuncturingSpec::Intentional { pi: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PuncturingSpec::Intentional { pi } => {
                for &(d, r) in pi {
                    if d < 1 || !(0.0..=1.0).contains(&r) {
                        return Err(Error::validation(format!(
                            "puncture rate {r} at degree {d} invalid"
                        )));
                    }
                }
            }
            PuncturingSpec::Random { alpha, p_pct } => {
                if !(0.0..=1.0).contains(alpha) || !(0.0..=1.0).contains(p_pct) {
                    return Err(Error::validation("alpha and p_pct must be in [0,1]"));
                }
            }
        }
        Ok(())
    }

    pub fn intentional_map(&self) -> Option<BTreeMap<u32, f64>> {
        match self {
            PuncturingSpec::Intentional { pi } => Some(pi.iter().copied().collect()),
            PuncturingSpec::Random { .. } => None,
        }
    }
}

/// Edge fractions q_j from the bit fractions and the per-channel left degree
/// distributions. Also asserts the consistency identity tying the overall
/// lambda to the per-channel ones.
pub fn edge_fractions(
    lambda_edge: &DegreePolynomial,
    per_channel_lambdas: &[DegreePolynomial],
    p: &[f64],
) -> Result<Vec<f64>> {
    if per_channel_lambdas.len() != p.len() || p.is_empty() {
        return Err(Error::validation("per-channel lambdas and p must have equal length"));
    }
    let sp: f64 = p.iter().sum();
    if (sp - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!("bit fractions sum to {sp}")));
    }
    let inv_ints: Vec<f64> = per_channel_lambdas
        .iter()
        .map(|l| 1.0 / l.integral01())
        .collect();
    let total: f64 = p.iter().zip(&inv_ints).map(|(&pj, &inv)| pj * inv).sum();
    let expected = 1.0 / lambda_edge.integral01();
    if (total - expected).abs() > 1e-9 * expected.max(1.0) {
        return Err(Error::validation(format!(
            "inconsistent assignment: sum p_j / int lambda_j = {total}, expected {expected}"
        )));
    }
    Ok(p.iter()
        .zip(&inv_ints)
        .map(|(&pj, &inv)| pj * inv / total)
        .collect())
}

/// Parallel-channel view of intentional puncturing: one channel per degree in
/// the lambda support, with p_j the node fraction and q_j the edge fraction
/// of that degree, over the base channel punctured at that degree's rate.
pub fn ip_assignment(
    lambda_edge: &DegreePolynomial,
    big_lambda: &DegreePolynomial,
    base: ChannelModel,
    pi: &BTreeMap<u32, f64>,
) -> Result<ParallelAssignment> {
    if lambda_edge.perspective() != Perspective::Edge || lambda_edge.side() != Side::Variable {
        return Err(Error::validation("lambda must be variable-side edge-perspective"));
    }
    if big_lambda.perspective() != Perspective::Node {
        return Err(Error::validation("node distribution must be node-perspective"));
    }
    for &d in pi.keys() {
        if lambda_edge.weight(d) == 0.0 {
            return Err(Error::validation(format!(
                "puncturing references degree {d} outside the lambda support"
            )));
        }
    }
    let mut entries = Vec::new();
    for degree in lambda_edge.support() {
        let rate = pi.get(&degree).copied().unwrap_or(0.0);
        entries.push(AssignmentEntry {
            channel: puncture_channel(base, rate)?,
            p: big_lambda.weight(degree),
            q: lambda_edge.weight(degree),
        });
    }
    ParallelAssignment::new(entries)
}

/// Random puncturing cannot pin down per-channel degree distributions, so the
/// assignment carries the universal surrogate factor (1 - P_pct + xi) used by
/// the rate bound instead of exact edge fractions.
#[derive(Debug, Clone, Serialize)]
pub struct RandomAssignment {
    pub alpha: f64,
    pub p_pct: f64,
    /// xi = 2 (1 - alpha) P_pct int_0^1 lambda.
    pub xi: f64,
    /// Bit fractions (alpha, 1 - alpha) of the punctured / untouched sets.
    pub p: [f64; 2],
    /// Capacities (C (1 - P_pct), C) of the two composed channels.
    pub capacities: [f64; 2],
}

impl RandomAssignment {
    /// Lower-bound surrogate for the edge-weighted moment sum: the bound uses
    /// `surrogate_factor * g_p` in place of `sum_j q_j g_{j,p}`.
    pub fn surrogate_factor(&self) -> f64 {
        1.0 - self.p_pct + self.xi
    }

    pub fn average_capacity(&self) -> f64 {
        self.p[0] * self.capacities[0] + self.p[1] * self.capacities[1]
    }
}

pub fn rp_assignment(
    lambda_edge: &DegreePolynomial,
    base: ChannelModel,
    alpha: f64,
    p_pct: f64,
    ctrl: &NumericControls,
) -> Result<RandomAssignment> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&p_pct) {
        return Err(Error::validation("alpha and p_pct must be in [0,1]"));
    }
    let c = base.capacity(ctrl)?;
    let xi = 2.0 * (1.0 - alpha) * p_pct * lambda_edge.integral01();
    Ok(RandomAssignment {
        alpha,
        p_pct,
        xi,
        p: [alpha, 1.0 - alpha],
        capacities: [c * (1.0 - p_pct), c],
    })
}
