//! Spectral density, a quadrature route to the autocovariance, and the
//! closed-form one-dimensional integrals used to cross-check it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acf::AcfGrid;
use crate::error::{Error, Result};
use crate::params::{check_conditions, ParamSet};

pub const DEFAULT_NODES: usize = 1024;
pub const MAX_NODES: usize = 16384;
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    /// Equispaced nodes on the period; spectrally accurate for smooth periodic integrands.
    Trapezoid,
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub rule: QuadratureRule,
}

impl QuadratureSpec {
    pub fn trapezoid(nodes_per_axis: usize) -> Self {
        Self {
            nodes_per_axis,
            rule: QuadratureRule::Trapezoid,
        }
    }

    pub fn gauss_legendre(nodes_per_axis: usize) -> Self {
        Self {
            nodes_per_axis,
            rule: QuadratureRule::GaussLegendre,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < MIN_NODES {
            return Err(Error::ParameterDomain(format!(
                "quadrature needs at least {MIN_NODES} nodes per axis, got {}",
                self.nodes_per_axis
            )));
        }
        if self.rule == QuadratureRule::Trapezoid && !self.nodes_per_axis.is_multiple_of(2) {
            return Err(Error::ParameterDomain(format!(
                "trapezoid rule needs an even node count, got {}",
                self.nodes_per_axis
            )));
        }
        Ok(())
    }

    /// Nodes on [-1/2, 1/2] and their weights (weights sum to one).
    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes_per_axis;
        match self.rule {
            QuadratureRule::Trapezoid => {
                let x = (0..n).map(|k| -0.5 + k as f64 / n as f64).collect();
                (x, vec![1.0 / n as f64; n])
            }
            QuadratureRule::GaussLegendre => {
                let (x, w) = gauss_legendre(n);
                (
                    x.iter().map(|v| 0.5 * v).collect(),
                    w.iter().map(|v| 0.5 * v).collect(),
                )
            }
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::trapezoid(DEFAULT_NODES)
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], mirrored so the node set is
/// exactly symmetric.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Pairwise summation: bit-stable for a fixed input order.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let (l, r) = v.split_at(v.len() / 2);
        pairwise_sum(l) + pairwise_sum(r)
    }
}

/// Denominator `|1 - a e^{i w1} - b e^{i w2} - c e^{i(w1+w2)}|^2` in its real form.
fn denominator(p: &ParamSet, nu1: f64, nu2: f64) -> f64 {
    let (a, b, c) = (p.a, p.b, p.c);
    let (s2, c2) = (2.0 * PI * nu2).sin_cos();
    let (s1, c1) = (2.0 * PI * nu1).sin_cos();
    let big_a = 1.0 + a * a + b * b + c * c + 2.0 * (a * c - b) * c2;
    let big_b = 2.0 * ((b * c - a) + (a * b - c) * c2);
    let big_c = 2.0 * (a * b + c) * s2;
    big_a + big_b * c1 + big_c * s1
}

/// The spectral density at frequencies `(nu1, nu2)`, in cycles per lattice step.
pub fn density_at(p: &ParamSet, nu1: f64, nu2: f64) -> Result<f64> {
    p.require_stationary()?;
    Ok(p.sigma2 / denominator(p, nu1, nu2))
}

/// Density on an `n x n` frequency grid `nu = -1/2 + k/n`, row-major in `nu1`.
pub fn density_grid(p: &ParamSet, n: usize) -> Result<Vec<(f64, f64, f64)>> {
    p.require_stationary()?;
    if n == 0 {
        return Err(Error::ParameterDomain(
            "spectrum resolution must be positive".into(),
        ));
    }
    let nu: Vec<f64> = (0..n).map(|k| -0.5 + k as f64 / n as f64).collect();
    Ok(nu
        .iter()
        .flat_map(|&x| {
            nu.iter()
                .map(move |&y| (x, y, p.sigma2 / denominator(p, x, y)))
        })
        .collect())
}

/// Autocovariance over a lag window by two-dimensional quadrature of the
/// spectral density.
///
/// The trig factor is split as `cos(w1 h1) C(h2) - sin(w1 h1) S(h2)` so every
/// lag in the window reuses one pass over the density samples. Rows are
/// reduced with pairwise sums in a fixed order, so the result does not depend
/// on the thread count.
pub fn acf_quadrature_window(
    p: &ParamSet,
    h1_min: i64,
    h1_max: i64,
    h2_min: i64,
    h2_max: i64,
    q: &QuadratureSpec,
) -> Result<AcfGrid> {
    p.require_stationary()?;
    q.validate()?;
    let mut grid = AcfGrid::zeros(h1_min, h1_max, h2_min, h2_max)?;
    let (nodes, weights) = q.nodes();
    let n = nodes.len();
    let h2s: Vec<i64> = (h2_min..=h2_max).collect();
    let h1s: Vec<i64> = (h1_min..=h1_max).collect();
    let trig = |h: i64, nu: f64| (2.0 * PI * (h as f64 * nu)).sin_cos();
    let table = |hs: &[i64]| -> Vec<Vec<(f64, f64)>> {
        hs.iter()
            .map(|&h| nodes.iter().map(|&nu| trig(h, nu)).collect())
            .collect()
    };
    let trig2 = table(&h2s);
    let trig1 = table(&h1s);

    // For every first-axis node: C(h2), S(h2) with density weights folded in.
    let rows: Vec<Vec<(f64, f64)>> = nodes
        .par_iter()
        .map(|&nu1| {
            let inv: Vec<f64> = nodes
                .iter()
                .zip(&weights)
                .map(|(&nu2, &w)| w / denominator(p, nu1, nu2))
                .collect();
            let mut buf_c = vec![0.0; n];
            let mut buf_s = vec![0.0; n];
            trig2
                .iter()
                .map(|row| {
                    for j in 0..n {
                        let (s, c) = row[j];
                        buf_c[j] = inv[j] * c;
                        buf_s[j] = inv[j] * s;
                    }
                    (pairwise_sum(&buf_c), pairwise_sum(&buf_s))
                })
                .collect()
        })
        .collect();

    let values: Vec<f64> = trig1
        .par_iter()
        .flat_map_iter(|t1| {
            let rows = &rows;
            let weights = &weights;
            (0..h2s.len()).map(move |k| {
                let terms: Vec<f64> = (0..n)
                    .map(|i| {
                        let (s, c) = t1[i];
                        let (rc, rs) = rows[i][k];
                        weights[i] * (c * rc - s * rs)
                    })
                    .collect();
                p.sigma2 * pairwise_sum(&terms)
            })
        })
        .collect();
    grid.values_mut().copy_from_slice(&values);
    Ok(grid)
}

pub fn acf_quadrature(p: &ParamSet, h1: i64, h2: i64, q: &QuadratureSpec) -> Result<f64> {
    let g = acf_quadrature_window(p, h1, h1, h2, h2, q)?;
    Ok(g.values()[0])
}

/// Outcome of an adaptive quadrature run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub nodes_per_axis: usize,
    /// `|I(n) - I(n/2)|` at the final node count.
    pub error_estimate: f64,
    pub converged: bool,
    pub near_boundary: bool,
}

/// Doubles the trapezoid node count from `start` until successive estimates
/// differ by less than `tol` or `MAX_NODES` is reached.
pub fn acf_quadrature_adaptive(
    p: &ParamSet,
    h1: i64,
    h2: i64,
    tol: f64,
    start: usize,
) -> Result<QuadratureEstimate> {
    let report = check_conditions(p)?;
    p.require_stationary()?;
    let mut n = start.max(MIN_NODES);
    n += n % 2;
    let mut prev = acf_quadrature(p, h1, h2, &QuadratureSpec::trapezoid(n))?;
    loop {
        let next_n = n * 2;
        if next_n > MAX_NODES {
            return Ok(QuadratureEstimate {
                value: prev,
                nodes_per_axis: n,
                error_estimate: f64::NAN,
                converged: false,
                near_boundary: report.near_boundary,
            });
        }
        let next = acf_quadrature(p, h1, h2, &QuadratureSpec::trapezoid(next_n))?;
        let err = (next - prev).abs();
        if err < tol || next_n * 2 > MAX_NODES {
            return Ok(QuadratureEstimate {
                value: next,
                nodes_per_axis: next_n,
                error_estimate: err,
                converged: err < tol,
                near_boundary: report.near_boundary,
            });
        }
        prev = next;
        n = next_n;
    }
}

/// `int_{-1/2}^{1/2} dt / (A + B cos 2 pi t + C sin 2 pi t) = 1 / sqrt(A^2 - B^2 - C^2)`.
pub fn integral_poisson(a: f64, b: f64, c: f64) -> Result<f64> {
    let disc = a * a - b * b - c * c;
    if !(a > 0.0 && disc > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "requires A > 0 and A^2 > B^2 + C^2, got ({a}, {b}, {c})"
        )));
    }
    Ok(1.0 / disc.sqrt())
}

/// `int_{-1/2}^{1/2} e^{2 pi i n t} / (A + B cos 2 pi t) dt = alpha^|n| / sqrt(A^2 - B^2)`
/// with `alpha = -B / (A + sqrt(A^2 - B^2))` and `alpha^0 = 1`.
pub fn integral_ar1_kernel(a: f64, b: f64, n: i64) -> Result<f64> {
    if !(a > b.abs()) {
        return Err(Error::ParameterDomain(format!(
            "requires A > |B|, got ({a}, {b})"
        )));
    }
    let root = (a * a - b * b).sqrt();
    let alpha = -b / (a + root);
    let pow = if n == 0 {
        1.0
    } else {
        alpha.powi(n.unsigned_abs() as i32)
    };
    Ok(pow / root)
}

/// `int_{-1/2}^{1/2} e^{2 pi i n v} / (A - B e^{2 pi i v}) dv` by residues.
pub fn integral_unit_circle(a: Complex64, b: Complex64, n: i64) -> Result<Complex64> {
    let (na, nb) = (a.norm(), b.norm());
    if na == nb {
        return Err(Error::ParameterDomain(format!(
            "requires |A| != |B|, got |A| = |B| = {na}"
        )));
    }
    let term = || a.powi((n - 1) as i32) * b.powi(-n as i32);
    Ok(match (n <= 0, na > nb) {
        (true, true) => term(),
        (true, false) | (false, true) => Complex64::new(0.0, 0.0),
        (false, false) => -term(),
    })
}

/// `sum_k C(n1,k) C(n2,k) a^(n1-k) b^(n2-k) (ab+c)^k`, the value of
/// `int e^{-2 pi i n2 v} (a + c e^{2 pi i v})^n1 / (1 - b e^{2 pi i v})^(n1+1) dv`
/// under causal coefficients. Binomials are formed directly; intended for
/// small orders.
pub fn integral_binomial(p: &ParamSet, n1: u32, n2: u32) -> Result<f64> {
    p.require_causal("the binomial integral identity needs causal coefficients")?;
    let binom = |n: u32, k: u32| -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let s = p.a * p.b + p.c;
    Ok((0..=n1.min(n2))
        .map(|k| {
            binom(n1, k)
                * binom(n2, k)
                * p.a.powi((n1 - k) as i32)
                * p.b.powi((n2 - k) as i32)
                * s.powi(k as i32)
        })
        .sum())
}
