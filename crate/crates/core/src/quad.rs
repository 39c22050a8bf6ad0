//! Quadrature helpers: cached Gauss-Hermite rules and an adaptive Simpson
//! fallback used to cross-check them.

use std::collections::HashMap;
use std::sync::Mutex;

use once_cell::sync::Lazy;

/// Nodes and weights for the rule `int e^{-t^2} f(t) dt ~= sum w_i f(t_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

static CACHE: Lazy<Mutex<HashMap<usize, &'static GaussHermite>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Returns the cached n-point Gauss-Hermite rule, computing it on first use.
pub fn gauss_hermite(n: usize) -> &'static GaussHermite {
    let mut cache = CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(compute_gauss_hermite(n))))
}

/// Golub-Welsch construction: nodes are the eigenvalues of the symmetric
/// tridiagonal Jacobi matrix (zero diagonal, off-diagonal sqrt(j/2)) and the
/// weight of each node is sqrt(pi) times the squared first component of its
/// eigenvector. Stable for rules of several hundred points.
fn compute_gauss_hermite(n: usize) -> GaussHermite {
    assert!(n >= 2);
    let mut diag = vec![0.0f64; n];
    let mut off: Vec<f64> = (1..n).map(|j| (j as f64 / 2.0).sqrt()).collect();
    off.push(0.0);
    // First eigenvector components, tracked through the QL rotations.
    let mut first = vec![0.0f64; n];
    first[0] = 1.0;
    tql_with_first_components(&mut diag, &mut off, &mut first);
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first.into_iter().map(|c| sqrt_pi * c * c))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (nodes, weights) = pairs.into_iter().unzip();
    GaussHermite { nodes, weights }
}

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix, also
/// rotating a single row of the eigenvector matrix (enough for quadrature
/// weights). `off[i]` couples index i and i+1; `off[n-1]` must be 0.
fn tql_with_first_components(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find a negligible off-diagonal element.
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "QL iteration failed to converge");
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                f = first[i + 1];
                first[i + 1] = s * first[i] + c * f;
                first[i] = c * first[i] - s * f;
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

impl GaussHermite {
    /// `E[f(X)]` for `X ~ N(mean, std^2)`.
    pub fn gaussian_expectation(&self, mean: f64, std: f64, f: impl Fn(f64) -> f64) -> f64 {
        let scale = std * std::f64::consts::SQRT_2;
        let mut acc = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mean + scale * t);
        }
        acc / std::f64::consts::PI.sqrt()
    }
}

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fb, fm, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)
    }
}
