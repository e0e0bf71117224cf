//! Model parameters, existence and causality predicates, and the four
//! parameter transforms that relate models sharing an autocovariance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Factors below this magnitude mark a parameter set as close to the
/// stationarity or causality boundary.
pub const NEAR_BOUNDARY: f64 = 1e-9;

/// Coefficients and innovation variance of
/// `X[i,j] = a X[i-1,j] + b X[i,j-1] + c X[i-1,j-1] + e[i,j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sigma2: f64,
}

impl ParamSet {
    pub fn new(a: f64, b: f64, c: f64, sigma2: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "coefficients must be finite, got ({a}, {b}, {c})"
            )));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "innovation variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self { a, b, c, sigma2 })
    }

    /// `(f1, f2, f3, f4)`.
    pub fn factors(&self) -> [f64; 4] {
        let (a, b, c) = (self.a, self.b, self.c);
        [
            1.0 - a - b - c,
            1.0 - a + b + c,
            1.0 + a - b + c,
            1.0 + a + b - c,
        ]
    }

    /// Product of the four factors. Positive iff a stationary solution exists.
    pub fn discriminant(&self) -> f64 {
        let [f1, f2, f3, f4] = self.factors();
        f1 * f2 * f3 * f4
    }

    pub fn is_stationary(&self) -> bool {
        self.discriminant() > 0.0
    }

    pub fn is_causal(&self) -> bool {
        self.factors().iter().all(|&f| f > 0.0)
    }

    pub(crate) fn require_stationary(&self) -> Result<f64> {
        let d = self.discriminant();
        if d > 0.0 {
            Ok(d)
        } else {
            Err(Error::Nonstationary { d })
        }
    }

    pub(crate) fn require_causal(&self, hint: &'static str) -> Result<()> {
        if self.is_causal() {
            Ok(())
        } else {
            Err(Error::NonCausal {
                factors: self.factors(),
                hint,
            })
        }
    }

    pub fn max_abs_diff(&self, other: &ParamSet) -> f64 {
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.sigma2 - other.sigma2,
        ]
        .iter()
        .fold(0.0_f64, |m, d| m.max(d.abs()))
    }
}

/// Special coefficient relations with their own autocovariance structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    Generic,
    /// `c = -ab`: the autocovariance separates into a product of axis terms.
    SymmetricABC,
    /// `a = -bc`: zero autocovariance along the first axis.
    TransectUncorrelated,
    /// `a = b = c = 0`.
    Degenerate,
}

/// Classifies with exact floating comparisons.
pub fn classify_symmetry(p: &ParamSet) -> Symmetry {
    classify_symmetry_tol(p, 0.0)
}

/// Classifies with `|c + ab| <= tol` style tests; `tol = 0` is the exact test.
pub fn classify_symmetry_tol(p: &ParamSet, tol: f64) -> Symmetry {
    let (a, b, c) = (p.a, p.b, p.c);
    if a.abs() <= tol && b.abs() <= tol && c.abs() <= tol {
        Symmetry::Degenerate
    } else if (c + a * b).abs() <= tol {
        Symmetry::SymmetricABC
    } else if (a + b * c).abs() <= tol {
        Symmetry::TransectUncorrelated
    } else {
        Symmetry::Generic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub stationary: bool,
    pub causal: bool,
    pub pnd_sufficient: bool,
    pub near_boundary: bool,
    pub symmetry: Symmetry,
}

impl ConditionReport {
    pub fn factors(&self) -> [f64; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }
}

pub fn check_conditions(p: &ParamSet) -> Result<ConditionReport> {
    if !(p.sigma2.is_finite() && p.sigma2 > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "innovation variance must be positive, got {}",
            p.sigma2
        )));
    }
    let [f1, f2, f3, f4] = p.factors();
    let d = f1 * f2 * f3 * f4;
    let stationary = d > 0.0;
    let causal = f1 > 0.0 && f2 > 0.0 && f3 > 0.0 && f4 > 0.0;
    let pnd_sufficient = stationary && 1.0 + p.c * p.c > p.a * p.a + p.b * p.b;
    let near_boundary = [f1, f2, f3, f4]
        .iter()
        .fold(f64::INFINITY, |m, f| m.min(f.abs()))
        < NEAR_BOUNDARY;
    Ok(ConditionReport {
        f1,
        f2,
        f3,
        f4,
        d,
        stationary,
        causal,
        pnd_sufficient,
        near_boundary,
        symmetry: classify_symmetry(p),
    })
}

/// Rows of the parameter correspondence table. `T1` is the identity;
/// `T2`, `T3`, `T4` describe the fields `X[-i,-j]`, `X[-i,j]`, `X[i,-j]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformId {
    T1,
    T2,
    T3,
    T4,
}

impl TransformId {
    pub const ALL: [TransformId; 4] = [Self::T1, Self::T2, Self::T3, Self::T4];

    pub fn index(self) -> u8 {
        match self {
            Self::T1 => 1,
            Self::T2 => 2,
            Self::T3 => 3,
            Self::T4 => 4,
        }
    }

    pub fn from_index(m: u8) -> Result<Self> {
        match m {
            1 => Ok(Self::T1),
            2 => Ok(Self::T2),
            3 => Ok(Self::T3),
            4 => Ok(Self::T4),
            _ => Err(Error::ParameterDomain(format!(
                "transform id must be in 1..=4, got {m}"
            ))),
        }
    }

    /// How the autocovariance of the transformed field relates to the original.
    pub fn flip(self) -> FlipKind {
        match self {
            Self::T1 => FlipKind::None,
            Self::T2 => FlipKind::BothAxes,
            Self::T3 => FlipKind::FirstAxis,
            Self::T4 => FlipKind::SecondAxis,
        }
    }
}

/// Lag reflection relating two autocovariance functions:
/// `gamma_orig(h1, h2) = gamma_other(s1 h1, s2 h2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipKind {
    None,
    BothAxes,
    FirstAxis,
    SecondAxis,
}

impl FlipKind {
    pub fn signs(self) -> (i64, i64) {
        match self {
            Self::None => (1, 1),
            Self::BothAxes => (-1, -1),
            Self::FirstAxis => (-1, 1),
            Self::SecondAxis => (1, -1),
        }
    }

    pub fn apply(self, h1: i64, h2: i64) -> (i64, i64) {
        let (s1, s2) = self.signs();
        (s1 * h1, s2 * h2)
    }

    /// Whether the reflected autocovariance differs from the original in general.
    /// Autocovariances are even, so a reflection of both axes is invisible.
    pub fn changes_acf(self) -> bool {
        matches!(self, Self::FirstAxis | Self::SecondAxis)
    }
}

/// Applies row `m` of the correspondence table. Every transform is an involution.
pub fn transform(p: &ParamSet, m: TransformId) -> Result<ParamSet> {
    let (a, b, c, s2) = (p.a, p.b, p.c, p.sigma2);
    let nonzero = |v: f64, name: &str| {
        if v == 0.0 {
            Err(Error::ParameterDomain(format!(
                "transform {} divides by {name}, which is zero",
                m.index()
            )))
        } else {
            Ok(())
        }
    };
    let out = match m {
        TransformId::T1 => *p,
        TransformId::T2 => {
            nonzero(c, "c")?;
            ParamSet {
                a: -b / c,
                b: -a / c,
                c: 1.0 / c,
                sigma2: s2 / (c * c),
            }
        }
        TransformId::T3 => {
            nonzero(a, "a")?;
            ParamSet {
                a: 1.0 / a,
                b: -c / a,
                c: -b / a,
                sigma2: s2 / (a * a),
            }
        }
        TransformId::T4 => {
            nonzero(b, "b")?;
            ParamSet {
                a: -c / b,
                b: 1.0 / b,
                c: -a / b,
                sigma2: s2 / (b * b),
            }
        }
    };
    if !(out.sigma2.is_finite() && out.sigma2 > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "transform {} produced a non-finite variance",
            m.index()
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMember {
    pub transform: TransformId,
    pub params: ParamSet,
}

/// The unique causal parameterization reachable through the transform table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub params: ParamSet,
    pub transform: TransformId,
    pub flip: FlipKind,
}

/// Parameter sets sharing one autocovariance function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceClass {
    pub members: Vec<ClassMember>,
    pub class_size: usize,
    /// Index into `members` of the causal member. `None` when the causal
    /// parameterization only reproduces the autocovariance up to a one-axis flip.
    pub causal_member_index: Option<usize>,
    /// The causal parameterization of the transform orbit, with its lag relation.
    pub canonical: CanonicalForm,
}

pub fn equivalence_class(p: &ParamSet) -> Result<EquivalenceClass> {
    p.require_stationary()?;
    let (a, b, c) = (p.a, p.b, p.c);
    use TransformId::*;
    let ids: &[TransformId] = if c != 0.0 {
        if c == -(a * b) {
            &[T1, T2, T3, T4]
        } else {
            &[T1, T2]
        }
    } else if a != 0.0 && b == 0.0 {
        &[T1, T3]
    } else if a == 0.0 && b != 0.0 {
        &[T1, T4]
    } else {
        &[T1]
    };
    let members = ids
        .iter()
        .map(|&m| {
            transform(p, m).map(|params| ClassMember {
                transform: m,
                params,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let causal: Vec<usize> = members
        .iter()
        .enumerate()
        .filter(|(_, m)| m.params.is_causal())
        .map(|(i, _)| i)
        .collect();
    if causal.len() > 1 {
        return Err(Error::Internal(format!(
            "{} causal members in one class",
            causal.len()
        )));
    }
    Ok(EquivalenceClass {
        class_size: members.len(),
        causal_member_index: causal.first().copied(),
        members,
        canonical: canonical_causal(p)?,
    })
}

/// Selects the causal row of the correspondence table from the sign pattern
/// of the factors.
pub fn canonical_causal(p: &ParamSet) -> Result<CanonicalForm> {
    p.require_stationary()?;
    let pos = p.factors().map(|f| f > 0.0);
    let m = match pos {
        [true, true, true, true] => TransformId::T1,
        [false, true, true, false] | [true, false, false, true] => TransformId::T2,
        [false, false, true, true] | [true, true, false, false] => TransformId::T3,
        [false, true, false, true] | [true, false, true, false] => TransformId::T4,
        _ => {
            return Err(Error::Internal(format!(
                "sign pattern {:?} is incompatible with D > 0",
                p.factors()
            )))
        }
    };
    let params = transform(p, m)?;
    if !params.is_causal() {
        return Err(Error::Internal(format!(
            "transform {} of {:?} is not causal: {:?}",
            m.index(),
            p,
            params
        )));
    }
    Ok(CanonicalForm {
        params,
        transform: m,
        flip: m.flip(),
    })
}
