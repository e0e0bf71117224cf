//! Parameter recovery from autocovariances at lags (0,0), (1,0), (0,1), (1,1).

use serde::{Deserialize, Serialize};

use crate::acf::{acf_grid, yw_residual, AcfGrid};
use crate::error::{Error, Result};
use crate::params::{
    check_conditions, equivalence_class, transform, ConditionReport, EquivalenceClass, FlipKind,
    ParamSet, TransformId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcfSource {
    ExactAcf,
    EmpiricalAcf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YwDiagnostic {
    pub h1: i64,
    pub h2: i64,
    /// Yule-Walker residual minus its theoretical value (`sigma2` at the origin, zero elsewhere).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    /// The causal parameterization matching the autocovariance (up to `orientation`).
    pub params: ParamSet,
    pub equivalence: EquivalenceClass,
    pub condition_report: ConditionReport,
    pub source: AcfSource,
    /// Reflection relating the input autocovariance to that of `params`:
    /// `gamma_input(h1, h2) = gamma_params(s1 h1, s2 h2)`.
    pub orientation: FlipKind,
    /// Every parameter set whose autocovariance equals the input.
    pub acf_candidates: Vec<ParamSet>,
    pub diagnostics: Vec<YwDiagnostic>,
}

/// Relative threshold on the inversion denominators.
pub const ILL_CONDITIONED: f64 = 1e-12;

/// Relative tolerance for an exact autocovariance to be reproduced by the
/// recovered model.
pub const REPRODUCTION_TOL: f64 = 1e-8;

fn invert(g00: f64, g10: f64, g01: f64, g11: f64) -> Result<ParamSet> {
    if !(g00 > 0.0) || ![g10, g01, g11].iter().all(|v| v.is_finite()) {
        return Err(Error::InconsistentAcf(format!(
            "variance must be positive and lags finite, got gamma(0,0) = {g00}"
        )));
    }
    let den_a = g00 * g00 - g01 * g01;
    let den_b = g00 * g00 - g10 * g10;
    let floor = ILL_CONDITIONED * g00 * g00;
    if den_a.abs() < floor || den_b.abs() < floor {
        return Err(Error::IllConditioned(format!(
            "gamma(0,0)^2 - gamma(0,1)^2 = {den_a:e}, gamma(0,0)^2 - gamma(1,0)^2 = {den_b:e}"
        )));
    }
    let a = (g10 * g00 - g01 * g11) / den_a;
    let b = (g01 * g00 - g10 * g11) / den_b;
    let c = (g11 - a * g01 - b * g10) / g00;
    let coeffs = ParamSet {
        a,
        b,
        c,
        sigma2: 1.0,
    };
    let d = coeffs.discriminant();
    if !(d > 0.0) {
        return Err(Error::InconsistentAcf(format!(
            "recovered coefficients ({a}, {b}, {c}) have D = {d} <= 0"
        )));
    }
    ParamSet::new(a, b, c, g00 * d.sqrt())
}

/// The inversion formulas only hold for autocovariances of a causal model; any
/// other input comes back as coefficients whose autocovariance differs.
fn require_reproduced(p: &ParamSet, g00: f64, g10: f64, g01: f64, g11: f64) -> Result<()> {
    let model = acf_grid(p, 0, 1, 0, 1)?;
    let input = [(0, 0, g00), (1, 0, g10), (0, 1, g01), (1, 1, g11)];
    let worst = input
        .iter()
        .map(|&(h1, h2, v)| (model.get(h1, h2).unwrap_or(f64::NAN) - v).abs())
        .fold(0.0_f64, f64::max);
    if !(worst <= REPRODUCTION_TOL * g00) {
        return Err(Error::InconsistentAcf(format!(
            "recovered model ({}, {}, {}) reproduces the input lags only to {worst:e}",
            p.a, p.b, p.c
        )));
    }
    Ok(())
}

fn assemble(
    params: ParamSet,
    source: AcfSource,
    orientation: FlipKind,
    diagnostics: Vec<YwDiagnostic>,
) -> Result<MomentEstimate> {
    let equivalence = equivalence_class(&params)?;
    let acf_candidates = if orientation.changes_acf() {
        // models whose autocovariance is the one-axis reflection of `params`
        let mut out: Vec<ParamSet> = [TransformId::T3, TransformId::T4]
            .iter()
            .filter_map(|&m| transform(&params, m).ok())
            .collect();
        out.dedup_by(|x, y| x.max_abs_diff(y) == 0.0);
        out
    } else {
        equivalence.members.iter().map(|m| m.params).collect()
    };
    Ok(MomentEstimate {
        condition_report: check_conditions(&params)?,
        params,
        equivalence,
        source,
        orientation,
        acf_candidates,
        diagnostics,
    })
}

/// Inverts the Yule-Walker relations of a causal model.
pub fn recover_params(g00: f64, g10: f64, g01: f64, g11: f64) -> Result<MomentEstimate> {
    let params = invert(g00, g10, g01, g11)?;
    require_reproduced(&params, g00, g10, g01, g11)?;
    assemble(params, AcfSource::ExactAcf, FlipKind::None, Vec::new())
}

/// Recovers parameters from a lag grid.
///
/// When `gamma(1,-1)` is available the grid orientation is chosen by which
/// diagonal factorizes as `gamma(1,0) gamma(0,1) / gamma(0,0)`: a causal
/// autocovariance factorizes on the opposite diagonal; a first-axis reflected
/// one on the same diagonal.
pub fn recover_from_grid(g: &AcfGrid, source: AcfSource) -> Result<MomentEstimate> {
    let g00 = g.try_get(0, 0)?;
    let g10 = g.try_get(1, 0)?;
    let g01 = g.try_get(0, 1)?;
    let g11 = g.try_get(1, 1)?;
    let product = g10 * g01;
    let flipped = match g.get(1, -1) {
        Some(g1m1) => (g1m1 * g00 - product).abs() > (g11 * g00 - product).abs(),
        None => false,
    };
    let oriented = if flipped {
        g.flip_first_axis()
    } else {
        g.clone()
    };
    let diag = if flipped {
        oriented.try_get(1, 1)?
    } else {
        g11
    };
    let params = invert(g00, g10, g01, diag)?;
    if source == AcfSource::ExactAcf {
        require_reproduced(&params, g00, g10, g01, diag)?;
    }
    let diagnostics = if source == AcfSource::EmpiricalAcf {
        yw_diagnostics(&params, &oriented)
    } else {
        Vec::new()
    };
    let orientation = if flipped {
        FlipKind::FirstAxis
    } else {
        FlipKind::None
    };
    assemble(params, source, orientation, diagnostics)
}

/// Residuals at lags `|h| <= 2` where the Yule-Walker relation is an identity
/// and all four lags are in the grid.
fn yw_diagnostics(p: &ParamSet, g: &AcfGrid) -> Vec<YwDiagnostic> {
    let mut out = Vec::new();
    for h1 in -2..=2 {
        for h2 in -2..=2 {
            let origin = h1 == 0 && h2 == 0;
            if !(origin || h1.max(h2) > 0) {
                continue;
            }
            if let Ok(r) = yw_residual(p, g, h1, h2) {
                let expected = if origin { p.sigma2 } else { 0.0 };
                out.push(YwDiagnostic {
                    h1,
                    h2,
                    residual: r - expected,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acf::acf_grid;
    use crate::params::canonical_causal;

    fn ps(a: f64, b: f64, c: f64, s: f64) -> ParamSet {
        ParamSet::new(a, b, c, s).unwrap()
    }

    #[test]
    fn published_values_invert() {
        let est = recover_params(1.0, 0.0, 0.5, 0.15).unwrap();
        assert!(
            est.params.max_abs_diff(&ps(-0.1, 0.5, 0.2, 0.72)) < 1e-15,
            "{:?}",
            est.params
        );
        assert_eq!(est.equivalence.class_size, 2);
        assert!(est.condition_report.causal);
    }

    #[test]
    fn white_noise_inverts() {
        let est = recover_params(2.5, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(est.params, ps(0.0, 0.0, 0.0, 2.5));
    }

    #[test]
    fn inversion_errors() {
        assert!(matches!(
            recover_params(1.0, 0.0, 1.0, 0.0),
            Err(Error::IllConditioned(_))
        ));
        assert!(matches!(
            recover_params(0.0, 0.0, 0.0, 0.0),
            Err(Error::InconsistentAcf(_))
        ));
        // inverts to non-causal coefficients whose autocovariance differs
        assert!(matches!(
            recover_params(1.0, 0.9, 0.9, -0.9),
            Err(Error::InconsistentAcf(_))
        ));
        assert!(matches!(
            recover_params(1.0, 0.5, 0.5, -0.5),
            Err(Error::InconsistentAcf(_))
        ));
    }

    #[test]
    fn grid_round_trip_and_partner_identity() {
        let p = ps(-0.1, 0.5, 0.2, 0.72);
        let t2 = transform(&p, TransformId::T2).unwrap();
        let e1 =
            recover_from_grid(&acf_grid(&p, -2, 2, -2, 2).unwrap(), AcfSource::ExactAcf).unwrap();
        let e2 =
            recover_from_grid(&acf_grid(&t2, -2, 2, -2, 2).unwrap(), AcfSource::ExactAcf).unwrap();
        assert!(e1.params.max_abs_diff(&p) < 1e-12);
        assert!(e1.params.max_abs_diff(&e2.params) < 1e-14);
        assert_eq!(e1.orientation, FlipKind::None);
    }

    #[test]
    fn same_quadrant_grid_is_reoriented() {
        let p = ps(2.0, -0.1, -0.05, 1.0);
        let est =
            recover_from_grid(&acf_grid(&p, -2, 2, -2, 2).unwrap(), AcfSource::ExactAcf).unwrap();
        let canon = canonical_causal(&p).unwrap();
        assert_eq!(est.orientation, FlipKind::FirstAxis);
        assert!(est.params.max_abs_diff(&canon.params) < 1e-12);
        assert!(est
            .acf_candidates
            .iter()
            .any(|q| q.max_abs_diff(&p) < 1e-10));
        for q in &est.acf_candidates {
            let a = acf_grid(q, -2, 2, -2, 2).unwrap();
            let b = acf_grid(&p, -2, 2, -2, 2).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-10);
        }
    }

    #[test]
    fn missing_lag_is_range_error() {
        let g = acf_grid(&ps(0.1, 0.1, 0.1, 1.0), 0, 0, 0, 1).unwrap();
        assert!(matches!(
            recover_from_grid(&g, AcfSource::ExactAcf),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn empirical_source_reports_diagnostics() {
        let g = acf_grid(&ps(0.2, 0.3, 0.1, 1.0), -2, 2, -2, 2).unwrap();
        let est = recover_from_grid(&g, AcfSource::EmpiricalAcf).unwrap();
        assert!(!est.diagnostics.is_empty());
        assert!(est.diagnostics.iter().all(|d| d.residual.abs() < 1e-12));
    }
}
