//! Moving-average coefficients of the causal solution
//! `X[i,j] = sum_{k,l >= 0} psi[k,l] e[i-k, j-l]`.

use serde::{Deserialize, Serialize};

use crate::acf::axis_coefficients;
use crate::error::{Error, Result};
use crate::params::ParamSet;

/// `sum_m C(k,m) C(l,m) a^(k-m) b^(l-m) (ab+c)^m`, zero for negative indices.
///
/// Summands are built in log-magnitude with the binomial ratio
/// `(k-m)(l-m)/(m+1)^2`, so large orders neither overflow nor underflow
/// through an intermediate power.
pub fn psi(p: &ParamSet, k: i64, l: i64) -> f64 {
    if k < 0 || l < 0 {
        return 0.0;
    }
    let (a, b, s) = (p.a, p.b, p.a * p.b + p.c);
    // 0^0 = 1; a zero base kills every summand with a positive exponent
    let admissible = |m: i64| (a != 0.0 || k == m) && (b != 0.0 || l == m) && (s != 0.0 || m == 0);
    let (la, lb, ls) = (a.abs().ln(), b.abs().ln(), s.abs().ln());
    let term_sign = |m: i64| {
        let neg =
            (a < 0.0 && (k - m) % 2 == 1) ^ (b < 0.0 && (l - m) % 2 == 1) ^ (s < 0.0 && m % 2 == 1);
        if neg {
            -1.0
        } else {
            1.0
        }
    };
    let log_pow = |base_ln: f64, e: i64| if e == 0 { 0.0 } else { e as f64 * base_ln };

    let mut log_binom = 0.0_f64; // ln C(k,m) + ln C(l,m)
    let mut total = 0.0;
    for m in 0..=k.min(l) {
        if m > 0 {
            log_binom += (((k - m + 1) * (l - m + 1)) as f64).ln() - 2.0 * (m as f64).ln();
        }
        if !admissible(m) {
            continue;
        }
        let lt = log_binom + log_pow(la, k - m) + log_pow(lb, l - m) + log_pow(ls, m);
        total += term_sign(m) * lt.exp();
    }
    total
}

/// MA coefficients on `[0, kmax] x [0, lmax]`, row-major in `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiTable {
    pub kmax: usize,
    pub lmax: usize,
    values: Vec<f64>,
    /// Estimated (not proven) absolute mass of the coefficients outside the table.
    pub tail_bound: f64,
}

impl PsiTable {
    pub fn get(&self, k: i64, l: i64) -> f64 {
        if k < 0 || l < 0 || k as usize > self.kmax || l as usize > self.lmax {
            0.0
        } else {
            self.values[k as usize * (self.lmax + 1) + l as usize]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.lmax + 1;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i / cols, i % cols, v))
    }

    /// `psi[k,l] - a psi[k-1,l] - b psi[k,l-1] - c psi[k-1,l-1] - [k = l = 0]`.
    pub fn recurrence_residual(&self, p: &ParamSet, k: i64, l: i64) -> f64 {
        let delta = if k == 0 && l == 0 { 1.0 } else { 0.0 };
        self.get(k, l)
            - p.a * self.get(k - 1, l)
            - p.b * self.get(k, l - 1)
            - p.c * self.get(k - 1, l - 1)
            - delta
    }
}

/// Fills the table by the defining recurrence and estimates the tail mass.
///
/// The tail estimate sums the two rims just outside the table (closed-form
/// coefficients) and extrapolates geometrically with ratio
/// `max(|alpha|, |beta|, rim2 / rim1)`.
pub fn psi_table(p: &ParamSet, kmax: usize, lmax: usize) -> Result<PsiTable> {
    p.require_causal("the MA tail may diverge for non-causal coefficients")?;
    let cells = (kmax as u64 + 1) * (lmax as u64 + 1);
    if cells > crate::acf::MAX_CELLS {
        return Err(Error::Range(format!(
            "{cells} cells exceed the table limit"
        )));
    }
    let cols = lmax + 1;
    let mut v = vec![0.0; (kmax + 1) * cols];
    for k in 0..=kmax {
        for l in 0..=lmax {
            let at = |kk: usize, ll: usize| v[kk * cols + ll];
            let mut x = if k == 0 && l == 0 { 1.0 } else { 0.0 };
            if k > 0 {
                x += p.a * at(k - 1, l);
            }
            if l > 0 {
                x += p.b * at(k, l - 1);
            }
            if k > 0 && l > 0 {
                x += p.c * at(k - 1, l - 1);
            }
            v[k * cols + l] = x;
        }
    }
    let tail_bound = estimate_tail(p, kmax, lmax)?;
    Ok(PsiTable {
        kmax,
        lmax,
        values: v,
        tail_bound,
    })
}

fn rim_mass(p: &ParamSet, kk: usize, ll: usize) -> f64 {
    let along_k: f64 = (0..=ll).map(|l| psi(p, kk as i64, l as i64).abs()).sum();
    let along_l: f64 = (0..kk).map(|k| psi(p, k as i64, ll as i64).abs()).sum();
    along_k + along_l
}

fn estimate_tail(p: &ParamSet, kmax: usize, lmax: usize) -> Result<f64> {
    let r1 = rim_mass(p, kmax + 1, lmax + 1);
    let r2 = rim_mass(p, kmax + 2, lmax + 2);
    if r1 == 0.0 && r2 == 0.0 {
        return Ok(0.0);
    }
    let ax = axis_coefficients(p)?;
    let mut ratio = ax.alpha.abs().max(ax.beta.abs());
    if r1 > 0.0 {
        ratio = ratio.max(r2 / r1);
    }
    if ratio >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(r1 + r2 + r2 * ratio / (1.0 - ratio))
}

/// Smallest square order `K` (searched over 0, 1, 2, 4, ... then bisected)
/// whose estimated tail is below `tol`.
pub fn truncation_order(p: &ParamSet, tol: f64, cap: usize) -> Result<usize> {
    p.require_causal("truncation needs causal coefficients")?;
    let tail = |k: usize| estimate_tail(p, k, k);
    if tail(0)? < tol {
        return Ok(0);
    }
    let mut hi = 1;
    while tail(hi)? >= tol {
        if hi >= cap {
            return Err(Error::Truncation(format!(
                "MA tail estimate {:.3e} still exceeds {tol:.1e} at order {cap}; raise the cap",
                tail(cap)?
            )));
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail(mid)? < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `cov(X[i+h1, j+h2], e[i,j]) = psi[h1,h2] sigma2`.
pub fn cross_covariance(p: &ParamSet, h1: i64, h2: i64) -> Result<f64> {
    p.require_causal("the cross-covariance formula holds for causal models")?;
    Ok(psi(p, h1, h2) * p.sigma2)
}
