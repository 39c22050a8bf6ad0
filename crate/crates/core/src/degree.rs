//! Degree-distribution algebra for LDPC ensembles: edge/node perspective
//! conversions, design rate, average right degree, and the numerical
//! rate-convergence check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Drift in the coefficient sum that is silently repaired by renormalization.
/// Printed table coefficients are rounded to 5-6 decimals and rarely sum to 1.
const RENORMALIZE_TOL: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    Edge,
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Variable,
    Check,
}

/// A sparse degree distribution. In edge perspective the polynomial is
/// `sum_i c_i x^(i-1)`, in node perspective `sum_i c_i x^i`, where `i` runs
/// over the stored degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePolynomial {
    coeffs: BTreeMap<u32, f64>,
    perspective: Perspective,
    side: Side,
}

impl DegreePolynomial {
    pub fn new(
        coeffs: impl IntoIterator<Item = (u32, f64)>,
        perspective: Perspective,
        side: Side,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (degree, weight) in coeffs {
            if degree < 1 {
                return Err(Error::validation(format!("degree {degree} < 1")));
            }
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(Error::validation(format!(
                    "weight {weight} for degree {degree} is outside (0, 1]"
                )));
            }
            if map.insert(degree, weight).is_some() {
                return Err(Error::validation(format!("duplicate degree {degree}")));
            }
        }
        if map.is_empty() {
            return Err(Error::validation("empty degree distribution"));
        }
        let sum: f64 = map.values().sum();
        let drift = (sum - 1.0).abs();
        if drift > RENORMALIZE_TOL {
            return Err(Error::validation(format!(
                "coefficients sum to {sum}, drift {drift:e} exceeds {RENORMALIZE_TOL:e}"
            )));
        }
        if drift > NORMALIZATION_TOL {
            log::warn!("renormalizing degree distribution, coefficient drift {drift:e}");
            for w in map.values_mut() {
                *w /= sum;
            }
        }
        if side == Side::Variable {
            if let Some((&min, _)) = map.iter().next() {
                if min < 2 {
                    log::warn!("variable-side distribution has minimum degree {min} < 2");
                }
            }
        }
        Ok(Self {
            coeffs: map,
            perspective,
            side,
        })
    }

    pub fn coefficients(&self) -> &BTreeMap<u32, f64> {
        &self.coeffs
    }

    pub fn perspective(&self) -> Perspective {
        self.perspective
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn weight(&self, degree: u32) -> f64 {
        self.coeffs.get(&degree).copied().unwrap_or(0.0)
    }

    pub fn min_degree(&self) -> u32 {
        *self.coeffs.keys().next().unwrap()
    }

    pub fn max_degree(&self) -> u32 {
        *self.coeffs.keys().next_back().unwrap()
    }

    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.coeffs.keys().copied()
    }

    /// Polynomial value at `x` (exponents depend on the perspective).
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&i, &c)| {
                let e = match self.perspective {
                    Perspective::Edge => i - 1,
                    Perspective::Node => i,
                };
                c * x.powi(e as i32)
            })
            .sum()
    }

    /// Derivative of the polynomial at x = 1.
    pub fn derivative_at_one(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(&i, &c)| {
                let e = match self.perspective {
                    Perspective::Edge => i - 1,
                    Perspective::Node => i,
                };
                c * e as f64
            })
            .sum()
    }

    /// Integral of the polynomial over [0, 1].
    pub fn integral01(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(&i, &c)| {
                let e = match self.perspective {
                    Perspective::Edge => i,
                    Perspective::Node => i + 1,
                };
                c / e as f64
            })
            .sum()
    }

    /// Converts the distribution to the target perspective. Converting to the
    /// same perspective is the identity.
    pub fn convert(&self, target: Perspective) -> DegreePolynomial {
        if self.perspective == target {
            return self.clone();
        }
        let coeffs: BTreeMap<u32, f64> = match target {
            // node_i = (edge_i / i) / sum_k (edge_k / k)
            Perspective::Node => {
                let norm: f64 = self.coeffs.iter().map(|(&i, &c)| c / i as f64).sum();
                self.coeffs
                    .iter()
                    .map(|(&i, &c)| (i, c / i as f64 / norm))
                    .collect()
            }
            // edge_i = i * node_i / sum_k k * node_k
            Perspective::Edge => {
                let norm: f64 = self.coeffs.iter().map(|(&i, &c)| c * i as f64).sum();
                self.coeffs
                    .iter()
                    .map(|(&i, &c)| (i, c * i as f64 / norm))
                    .collect()
            }
        };
        DegreePolynomial {
            coeffs,
            perspective: target,
            side: self.side,
        }
    }
}

fn require(
    d: &DegreePolynomial,
    perspective: Perspective,
    side: Side,
    what: &str,
) -> Result<()> {
    if d.perspective != perspective || d.side != side {
        return Err(Error::validation(format!(
            "{what}: expected {side:?}/{perspective:?}, got {:?}/{:?}",
            d.side, d.perspective
        )));
    }
    Ok(())
}

/// Design rate of the ensemble, computed from the edge-perspective pair and
/// cross-checked against the node-perspective form.
pub fn design_rate(lambda_edge: &DegreePolynomial, rho_edge: &DegreePolynomial) -> Result<f64> {
    require(lambda_edge, Perspective::Edge, Side::Variable, "lambda")?;
    require(rho_edge, Perspective::Edge, Side::Check, "rho")?;
    let r_edge = 1.0 - rho_edge.integral01() / lambda_edge.integral01();
    let big_lambda = lambda_edge.convert(Perspective::Node);
    let big_gamma = rho_edge.convert(Perspective::Node);
    let r_node = 1.0 - big_lambda.derivative_at_one() / big_gamma.derivative_at_one();
    if (r_edge - r_node).abs() > 1e-12 {
        return Err(Error::Numeric {
            msg: format!("design-rate forms disagree: {r_edge} vs {r_node}"),
            achieved: (r_edge - r_node).abs(),
        });
    }
    Ok(r_edge)
}

/// Average right degree a_R = 1 / int_0^1 rho = Gamma'(1).
pub fn average_right_degree(rho_edge: &DegreePolynomial) -> Result<f64> {
    require(rho_edge, Perspective::Edge, Side::Check, "rho")?;
    Ok(1.0 / rho_edge.integral01())
}

/// The v(u) ratio entering the rate-convergence function: a weighted mean of
/// u^(i-1)/(1+u^i) terms against 1/(1+u^i) terms over the lambda support.
fn v_of_u(u: f64, lambda_edge: &DegreePolynomial) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&i, &c) in lambda_edge.coefficients() {
        let i = i as f64;
        // u^i can overflow for extreme grids; switch to the 1/u form there.
        let log_ui = i * u.ln();
        if u > 0.0 && log_ui > 700.0 {
            num += c / u;
            den += c * (-log_ui).exp();
        } else {
            let ui = u.powf(i);
            num += c * u.powf(i - 1.0) / (1.0 + ui);
            den += c / (1.0 + ui);
        }
    }
    num / den
}

/// The rate-convergence function of the ensemble evaluated at u >= 0. Its
/// value at u = 1 is identically zero; if its global maximum over [0, inf) is
/// attained at u = 1, the ensemble rate converges to the design rate.
pub fn psi(
    u: f64,
    lambda_edge: &DegreePolynomial,
    big_lambda: &DegreePolynomial,
    big_gamma: &DegreePolynomial,
) -> f64 {
    debug_assert!(u >= 0.0);
    let lp1 = big_lambda.derivative_at_one();
    let gp1 = big_gamma.derivative_at_one();
    if u == 0.0 {
        // v -> 0 term-by-term: t1 = 0, t2 = -1, t3 = lp1/gp1.
        return -1.0 + lp1 / gp1;
    }
    if u.is_infinite() {
        // v -> inf, (1-v)/(1+v) -> -1: odd check degrees drive t3 to -inf.
        let all_even = big_gamma.support().all(|i| i % 2 == 0);
        return if all_even {
            -1.0 + lp1 / gp1
        } else {
            f64::NEG_INFINITY
        };
    }
    let v = v_of_u(u, lambda_edge);
    let t1 = -lp1 * ((1.0 + u * v) / ((1.0 + u) * (1.0 + v))).log2();
    let log2_1pu = (1.0 + u).ln() / std::f64::consts::LN_2;
    let mut t2 = 0.0;
    for (&i, &c) in big_lambda.coefficients() {
        let i_f = i as f64;
        let log_ui = i_f * u.ln();
        let log2_1pui = if log_ui > 50.0 {
            log_ui / std::f64::consts::LN_2
        } else {
            u.powf(i_f).ln_1p() / std::f64::consts::LN_2
        };
        t2 += c * (log2_1pui - 1.0 - i_f * log2_1pu);
    }
    let ratio = (1.0 - v) / (1.0 + v);
    let mut t3 = 0.0;
    for (&i, &c) in big_gamma.coefficients() {
        t3 += c * (1.0 + ratio.powi(i as i32)).log2();
    }
    t1 + t2 + lp1 / gp1 * t3
}

/// Grid used by [`check_rate_convergence`]: log-spaced points on
/// [u_min, u_max] with u = 1 always inserted.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub points: usize,
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 2000,
            u_min: 1e-6,
            u_max: 1e6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RateConvergenceReport {
    /// True when the numerically observed maximum does not exceed the value at
    /// u = 1 beyond tolerance. Numerical support, not a proof.
    pub passes: bool,
    pub argmax: f64,
    pub max_value: f64,
}

/// Numerically tests the sufficient condition for rate convergence: the
/// global maximum of the psi function over the grid must sit at u = 1.
pub fn check_rate_convergence(
    lambda_edge: &DegreePolynomial,
    rho_edge: &DegreePolynomial,
    grid: &GridSpec,
) -> Result<RateConvergenceReport> {
    require(lambda_edge, Perspective::Edge, Side::Variable, "lambda")?;
    require(rho_edge, Perspective::Edge, Side::Check, "rho")?;
    let big_lambda = lambda_edge.convert(Perspective::Node);
    let big_gamma = rho_edge.convert(Perspective::Node);
    let f = |u: f64| psi(u, lambda_edge, &big_lambda, &big_gamma);

    let mut us: Vec<f64> = Vec::with_capacity(grid.points + 1);
    let (lo, hi) = (grid.u_min.ln(), grid.u_max.ln());
    for k in 0..grid.points {
        let t = k as f64 / (grid.points - 1) as f64;
        us.push((lo + t * (hi - lo)).exp());
    }
    us.push(1.0);
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let values: Vec<f64> = us.iter().map(|&u| f(u)).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Ties resolve to the smallest u.
    let k = values.iter().position(|&v| v >= max - 1e-15).unwrap();

    // Golden-section refinement in log-u around the grid argmax.
    let a = us[k.saturating_sub(1)].ln();
    let b = us[(k + 1).min(us.len() - 1)].ln();
    let (argmax, max_value) = golden_max(|t| f(t.exp()), a, b);
    let argmax = argmax.exp();

    let psi_one = f(1.0);
    let max_value = max_value.max(psi_one);
    let passes = max_value <= psi_one + 1e-9;
    let argmax = if (max_value - psi_one).abs() <= 1e-12 && argmax > 1.0 {
        // The maximum is (numerically) attained at u = 1 as well; report the
        // smaller location.
        1.0
    } else {
        argmax
    };
    Ok(RateConvergenceReport {
        passes,
        argmax,
        max_value,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// On-disk ensemble description consumed by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub lambda: Vec<(u32, f64)>,
    pub rho: Vec<(u32, f64)>,
    pub perspective: Perspective,
}

impl EnsembleSpec {
    /// Builds the edge-perspective pair, converting if the file carried the
    /// node perspective.
    pub fn into_edge_pair(self) -> Result<(DegreePolynomial, DegreePolynomial)> {
        let lambda = DegreePolynomial::new(self.lambda, self.perspective, Side::Variable)?;
        let rho = DegreePolynomial::new(self.rho, self.perspective, Side::Check)?;
        Ok((
            lambda.convert(Perspective::Edge),
            rho.convert(Perspective::Edge),
        ))
    }
}
