//! Exact autocovariance: closed forms on the axes, the product formula on the
//! opposite quadrants, Yule-Walker recursion on the causal quadrant, and grid
//! assembly for any stationary parameters through the causal representative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{canonical_causal, ParamSet};

/// Largest absolute lag accepted in a window.
pub const MAX_LAG: i64 = 10_000;
/// Largest number of cells in a dense grid.
pub const MAX_CELLS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisCoefficients {
    /// Decay ratio along the first axis: `gamma(h, 0) = alpha^|h| * variance`.
    pub alpha: f64,
    /// Decay ratio along the second axis.
    pub beta: f64,
    #[serde(rename = "sqrtD")]
    pub sqrt_d: f64,
    pub variance: f64,
}

fn sign(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(1.0)
    } else if x < 0.0 {
        Ok(-1.0)
    } else {
        Err(Error::Internal(format!(
            "sign argument vanished with D > 0 ({x})"
        )))
    }
}

pub fn axis_coefficients(p: &ParamSet) -> Result<AxisCoefficients> {
    let d = p.require_stationary()?;
    let (a, b, c) = (p.a, p.b, p.c);
    let sqrt_d = d.sqrt();
    let u = 1.0 - a * a + b * b - c * c;
    let w = 1.0 + a * a - b * b - c * c;
    let beta = 2.0 * (a * c + b) / (u + sign(u)? * sqrt_d);
    let alpha = 2.0 * (a + b * c) / (w + sign(w)? * sqrt_d);
    Ok(AxisCoefficients {
        alpha,
        beta,
        sqrt_d,
        variance: p.sigma2 / sqrt_d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    First,
    Second,
}

fn pow_abs(x: f64, h: i64) -> f64 {
    if h == 0 {
        1.0
    } else {
        x.powi(h.unsigned_abs() as i32)
    }
}

pub fn acf_axes(p: &ParamSet, h: i64, axis: Axis) -> Result<f64> {
    let ax = axis_coefficients(p)?;
    let ratio = match axis {
        Axis::First => ax.alpha,
        Axis::Second => ax.beta,
    };
    Ok(ax.variance * pow_abs(ratio, h))
}

/// Autocovariance of a causal model on the quadrant `[0, h1_max] x [0, h2_max]`,
/// filled by the Yule-Walker recursion from the axis seeds. Other quadrants
/// are read from the product formula or by even symmetry.
#[derive(Debug, Clone)]
pub struct CausalAcf {
    params: ParamSet,
    axis: AxisCoefficients,
    h1_max: usize,
    h2_max: usize,
    quadrant: Vec<f64>,
}

impl CausalAcf {
    pub fn new(p: &ParamSet, h1_max: usize, h2_max: usize) -> Result<Self> {
        p.require_causal("use acf_grid, which canonicalizes non-causal parameters")?;
        let axis = axis_coefficients(p)?;
        let cells = (h1_max as u64 + 1) * (h2_max as u64 + 1);
        if cells > MAX_CELLS {
            return Err(Error::Range(format!("{cells} cells exceed the grid limit")));
        }
        let cols = h2_max + 1;
        let mut q = vec![0.0; (h1_max + 1) * cols];
        for (h2, v) in q[..cols].iter_mut().enumerate() {
            *v = axis.variance * pow_abs(axis.beta, h2 as i64);
        }
        for h1 in 1..=h1_max {
            q[h1 * cols] = axis.variance * pow_abs(axis.alpha, h1 as i64);
            for h2 in 1..cols {
                q[h1 * cols + h2] = p.a * q[(h1 - 1) * cols + h2]
                    + p.b * q[h1 * cols + h2 - 1]
                    + p.c * q[(h1 - 1) * cols + h2 - 1];
            }
        }
        Ok(Self {
            params: *p,
            axis,
            h1_max,
            h2_max,
            quadrant: q,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn axis(&self) -> &AxisCoefficients {
        &self.axis
    }

    pub fn get(&self, h1: i64, h2: i64) -> Result<f64> {
        if h1.signum() * h2.signum() <= 0 {
            return Ok(self.axis.variance
                * pow_abs(self.axis.alpha, h1)
                * pow_abs(self.axis.beta, h2));
        }
        let (u, v) = (h1.unsigned_abs() as usize, h2.unsigned_abs() as usize);
        if u > self.h1_max || v > self.h2_max {
            return Err(Error::Range(format!(
                "lag ({h1}, {h2}) outside the computed quadrant [0, {}] x [0, {}]",
                self.h1_max, self.h2_max
            )));
        }
        Ok(self.quadrant[u * (self.h2_max + 1) + v])
    }
}

pub fn acf_causal(p: &ParamSet, h1: i64, h2: i64) -> Result<f64> {
    check_lag(h1)?;
    check_lag(h2)?;
    let (u, v) = if h1.signum() * h2.signum() > 0 {
        (h1.unsigned_abs() as usize, h2.unsigned_abs() as usize)
    } else {
        (0, 0)
    };
    CausalAcf::new(p, u, v)?.get(h1, h2)
}

fn check_lag(h: i64) -> Result<()> {
    if h.abs() > MAX_LAG {
        Err(Error::Range(format!("lag {h} exceeds the limit {MAX_LAG}")))
    } else {
        Ok(())
    }
}

/// Dense autocovariance values on a lag rectangle, row-major with `h1` as
/// the major index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfGrid {
    pub h1_min: i64,
    pub h1_max: i64,
    pub h2_min: i64,
    pub h2_max: i64,
    values: Vec<f64>,
}

impl AcfGrid {
    pub fn zeros(h1_min: i64, h1_max: i64, h2_min: i64, h2_max: i64) -> Result<Self> {
        for h in [h1_min, h1_max, h2_min, h2_max] {
            check_lag(h)?;
        }
        if h1_min > h1_max || h2_min > h2_max {
            return Err(Error::Range(format!(
                "empty window [{h1_min}, {h1_max}] x [{h2_min}, {h2_max}]"
            )));
        }
        let cells = (h1_max - h1_min + 1) as u64 * (h2_max - h2_min + 1) as u64;
        if cells > MAX_CELLS {
            return Err(Error::Range(format!("{cells} cells exceed the grid limit")));
        }
        Ok(Self {
            h1_min,
            h1_max,
            h2_min,
            h2_max,
            values: vec![0.0; cells as usize],
        })
    }

    pub fn from_values(
        h1_min: i64,
        h1_max: i64,
        h2_min: i64,
        h2_max: i64,
        values: Vec<f64>,
    ) -> Result<Self> {
        let mut g = Self::zeros(h1_min, h1_max, h2_min, h2_max)?;
        if values.len() != g.values.len() {
            return Err(Error::Input(format!(
                "window needs {} values, got {}",
                g.values.len(),
                values.len()
            )));
        }
        g.values = values;
        Ok(g)
    }

    pub fn n_h1(&self) -> usize {
        (self.h1_max - self.h1_min + 1) as usize
    }

    pub fn n_h2(&self) -> usize {
        (self.h2_max - self.h2_min + 1) as usize
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn contains(&self, h1: i64, h2: i64) -> bool {
        (self.h1_min..=self.h1_max).contains(&h1) && (self.h2_min..=self.h2_max).contains(&h2)
    }

    fn offset(&self, h1: i64, h2: i64) -> usize {
        (h1 - self.h1_min) as usize * self.n_h2() + (h2 - self.h2_min) as usize
    }

    pub fn get(&self, h1: i64, h2: i64) -> Option<f64> {
        self.contains(h1, h2)
            .then(|| self.values[self.offset(h1, h2)])
    }

    pub fn try_get(&self, h1: i64, h2: i64) -> Result<f64> {
        self.get(h1, h2).ok_or_else(|| {
            Error::Range(format!(
                "lag ({h1}, {h2}) outside window [{}, {}] x [{}, {}]",
                self.h1_min, self.h1_max, self.h2_min, self.h2_max
            ))
        })
    }

    pub fn set(&mut self, h1: i64, h2: i64, v: f64) {
        let k = self.offset(h1, h2);
        self.values[k] = v;
    }

    /// `(h1, h2, gamma)` triples in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        (self.h1_min..=self.h1_max)
            .flat_map(move |h1| (self.h2_min..=self.h2_max).map(move |h2| (h1, h2)))
            .zip(self.values.iter())
            .map(|((h1, h2), &v)| (h1, h2, v))
    }

    /// The grid of `gamma(-h1, h2)`.
    pub fn flip_first_axis(&self) -> AcfGrid {
        let mut out = AcfGrid::zeros(-self.h1_max, -self.h1_min, self.h2_min, self.h2_max)
            .expect("mirrored window is valid");
        for (h1, h2, v) in self.iter() {
            out.set(-h1, h2, v);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &AcfGrid) -> Option<f64> {
        let same = (self.h1_min, self.h1_max, self.h2_min, self.h2_max)
            == (other.h1_min, other.h1_max, other.h2_min, other.h2_max);
        same.then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
        })
    }
}

/// Autocovariance of any stationary parameter set over a lag window.
pub fn acf_grid(
    p: &ParamSet,
    h1_min: i64,
    h1_max: i64,
    h2_min: i64,
    h2_max: i64,
) -> Result<AcfGrid> {
    p.require_stationary()?;
    let mut grid = AcfGrid::zeros(h1_min, h1_max, h2_min, h2_max)?;
    let canon = canonical_causal(p)?;
    let reach = |lo: i64, hi: i64| lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
    let causal = CausalAcf::new(&canon.params, reach(h1_min, h1_max), reach(h2_min, h2_max))?;
    for h1 in h1_min..=h1_max {
        for h2 in h2_min..=h2_max {
            let (u, v) = canon.flip.apply(h1, h2);
            grid.set(h1, h2, causal.get(u, v)?);
        }
    }
    Ok(grid)
}

/// `gamma(h1,h2) - a gamma(h1-1,h2) - b gamma(h1,h2-1) - c gamma(h1-1,h2-1)`.
pub fn yw_residual(p: &ParamSet, g: &AcfGrid, h1: i64, h2: i64) -> Result<f64> {
    Ok(g.try_get(h1, h2)?
        - p.a * g.try_get(h1 - 1, h2)?
        - p.b * g.try_get(h1, h2 - 1)?
        - p.c * g.try_get(h1 - 1, h2 - 1)?)
}

/// Separable autocovariance for `c = -ab`, valid for non-causal `|a| > 1` or
/// `|b| > 1` as well.
pub fn acf_special_symmetric(p: &ParamSet, h1: i64, h2: i64) -> Result<f64> {
    let (a, b) = (p.a, p.b);
    if p.c != -(a * b) {
        return Err(Error::ParameterDomain(format!(
            "requires c = -ab exactly, got c = {} and -ab = {}",
            p.c,
            -(a * b)
        )));
    }
    if a.abs() == 1.0 || b.abs() == 1.0 {
        return Err(Error::Nonstationary {
            d: p.discriminant(),
        });
    }
    let base = |x: f64| if x.abs() < 1.0 { x } else { 1.0 / x };
    let scale = (1.0 - a * a).abs() * (1.0 - b * b).abs();
    Ok(pow_abs(base(a), h1) * pow_abs(base(b), h2) * p.sigma2 / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProductStructure {
    /// `ab + c = 0`: separable everywhere.
    FullyMultiplicative,
    /// Separable for `h1 h2 <= 0` only.
    MultiplicativeOppositeQuadrant,
    /// Separable for `h1 h2 >= 0` only.
    MultiplicativeSameQuadrant,
    /// `1 + c^2 = a^2 + b^2` with `ab + c != 0`; not covered by the case analysis
    /// (unreachable in exact arithmetic when `D > 0`).
    Boundary,
}

pub fn classify_product_structure(p: &ParamSet) -> Result<ProductStructure> {
    p.require_stationary()?;
    let (a, b, c) = (p.a, p.b, p.c);
    if a * b + c == 0.0 {
        return Ok(ProductStructure::FullyMultiplicative);
    }
    let lhs = 1.0 + c * c;
    let rhs = a * a + b * b;
    Ok(if lhs > rhs {
        ProductStructure::MultiplicativeOppositeQuadrant
    } else if lhs < rhs {
        ProductStructure::MultiplicativeSameQuadrant
    } else {
        ProductStructure::Boundary
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{transform, TransformId};

    fn ps(a: f64, b: f64, c: f64, s: f64) -> ParamSet {
        ParamSet::new(a, b, c, s).unwrap()
    }

    fn table() -> ParamSet {
        ps(-0.1, 0.5, 0.2, 0.72)
    }

    /// Published values, rows h2 = 3, 2, 1, 0, -1, -2, -3; columns h1 = -2..=3.
    pub(crate) const TABLE: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.125, 0.1125, 0.0225, -0.00225],
        [0.0, 0.0, 0.25, 0.15, 0.0075, -0.003],
        [0.0, 0.0, 0.5, 0.15, -0.015, 0.0015],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        [-0.015, 0.15, 0.5, 0.0, 0.0, 0.0],
        [0.0075, 0.15, 0.25, 0.0, 0.0, 0.0],
        [0.0225, 0.1125, 0.125, 0.0, 0.0, 0.0],
    ];

    #[test]
    fn axis_examples() {
        let ax = axis_coefficients(&table()).unwrap();
        assert!(ax.alpha.abs() < 1e-15);
        assert!((ax.beta - 0.5).abs() < 1e-15);
        assert!((ax.sqrt_d - 0.72).abs() < 1e-15);
        assert!((ax.variance - 1.0).abs() < 1e-15);

        let ax = axis_coefficients(&ps(0.0, 0.0, 0.0, 3.0)).unwrap();
        assert_eq!((ax.alpha, ax.beta, ax.variance), (0.0, 0.0, 3.0));

        let ax = axis_coefficients(&ps(0.5, 0.0, 0.0, 1.0)).unwrap();
        assert!((ax.alpha - 0.5).abs() < 1e-15 && ax.beta == 0.0);
        // brute-force 1-D AR(1) variance: sum of a^(2k)
        let series: f64 = (0..200).map(|k| 0.25_f64.powi(k)).sum();
        assert!((ax.variance - series).abs() < 1e-14);
    }

    #[test]
    fn axes_examples() {
        let p = table();
        assert!((acf_axes(&p, 3, Axis::Second).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(acf_axes(&p, 2, Axis::First).unwrap(), 0.0);
        let q = ps(0.3, -0.2, 0.1, 2.0);
        assert_eq!(
            acf_axes(&q, 0, Axis::First).unwrap(),
            2.0 / q.discriminant().sqrt()
        );
    }

    #[test]
    fn causal_examples() {
        let p = table();
        assert!((acf_causal(&p, 1, 1).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(acf_causal(&p, 2, -1).unwrap(), 0.0);
        assert!((acf_causal(&p, 3, 2).unwrap() + 0.003).abs() < 1e-15);
        assert!(matches!(
            acf_causal(&ps(2.0, -0.1, -0.05, 1.0), 0, 0),
            Err(Error::NonCausal { .. })
        ));
    }

    #[test]
    fn grid_reproduces_published_table() {
        let g = acf_grid(&table(), -2, 3, -3, 3).unwrap();
        for (r, row) in TABLE.iter().enumerate() {
            let h2 = 3 - r as i64;
            for (k, want) in row.iter().enumerate() {
                let h1 = k as i64 - 2;
                let got = g.get(h1, h2).unwrap();
                assert!((got - want).abs() < 1e-12, "({h1},{h2}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn partner_grid_matches() {
        let p = table();
        let t2 = transform(&p, TransformId::T2).unwrap();
        let g1 = acf_grid(&p, -2, 3, -3, 3).unwrap();
        let g2 = acf_grid(&t2, -2, 3, -3, 3).unwrap();
        assert!(g1.max_abs_diff(&g2).unwrap() < 1e-12);
    }

    #[test]
    fn white_noise_grid() {
        let g = acf_grid(&ps(0.0, 0.0, 0.0, 2.0), -2, 2, -1, 3).unwrap();
        for (h1, h2, v) in g.iter() {
            assert_eq!(v, if (h1, h2) == (0, 0) { 2.0 } else { 0.0 });
        }
    }

    #[test]
    fn grid_rejects_bad_windows() {
        assert!(matches!(
            acf_grid(&table(), 2, 1, 0, 0),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            acf_grid(&table(), 0, 20_000, 0, 0),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            acf_grid(&ps(0.5, 0.5, 0.5, 1.0), 0, 1, 0, 1),
            Err(Error::Nonstationary { .. })
        ));
    }

    #[test]
    fn yw_examples() {
        let p = table();
        let g = acf_grid(&p, -2, 3, -3, 3).unwrap();
        assert!((yw_residual(&p, &g, 0, 0).unwrap() - 0.72).abs() < 1e-14);
        assert!(yw_residual(&p, &g, 2, 1).unwrap().abs() < 1e-15);
        let w = ps(0.0, 0.0, 0.0, 1.0);
        let gw = acf_grid(&w, 0, 1, 0, 1).unwrap();
        assert_eq!(yw_residual(&w, &gw, 1, 1).unwrap(), 0.0);
        assert!(matches!(yw_residual(&p, &g, -2, 0), Err(Error::Range(_))));
    }

    #[test]
    fn symmetric_examples() {
        let p = ps(0.3, 0.4, -0.12, 1.0);
        let v = acf_special_symmetric(&p, 2, 1).unwrap();
        assert!((v - 0.09 * 0.4 / (0.91 * 0.84)).abs() < 1e-15);
        assert!((v - 0.047096).abs() < 1e-6);
        let q = ps(2.0, 0.5, -1.0, 1.0);
        let v = acf_special_symmetric(&q, 1, 0).unwrap();
        assert!((v - 0.5 / (3.0 * 0.75)).abs() < 1e-15);
        let v0 = acf_special_symmetric(&p, 0, 0).unwrap();
        assert!((v0 - 1.0 / p.discriminant().sqrt()).abs() < 1e-14);
        assert!(acf_special_symmetric(&ps(0.3, 0.4, 0.1, 1.0), 0, 0).is_err());
        assert!(matches!(
            acf_special_symmetric(&ps(1.0, 0.4, -0.4, 1.0), 0, 0),
            Err(Error::Nonstationary { .. })
        ));
    }

    #[test]
    fn product_structure_examples() {
        use ProductStructure::*;
        assert_eq!(
            classify_product_structure(&table()).unwrap(),
            MultiplicativeOppositeQuadrant
        );
        assert_eq!(
            classify_product_structure(&ps(0.3, 0.4, -0.12, 1.0)).unwrap(),
            FullyMultiplicative
        );
        assert_eq!(
            classify_product_structure(&ps(-2.5, 0.5, 5.0, 18.0)).unwrap(),
            MultiplicativeOppositeQuadrant
        );
        assert_eq!(
            classify_product_structure(&ps(2.0, -0.1, -0.05, 1.0)).unwrap(),
            MultiplicativeSameQuadrant
        );
    }

    #[test]
    fn negative_alpha_keeps_sign_off_quadrant() {
        // a < 0 gives alpha < 0; gamma(1, -1) carries that sign
        let p = ps(-0.5, 0.3, 0.1, 1.0);
        let ax = axis_coefficients(&p).unwrap();
        assert!(ax.alpha < 0.0);
        let g = acf_grid(&p, -1, 1, -1, 1).unwrap();
        let lhs = g.get(1, -1).unwrap() * g.get(0, 0).unwrap();
        let rhs = g.get(1, 0).unwrap() * g.get(0, 1).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
        assert!(g.get(1, -1).unwrap() < 0.0);
    }

    #[test]
    fn flip_first_axis_mirrors() {
        let g = acf_grid(&table(), -2, 3, -3, 3).unwrap();
        let f = g.flip_first_axis();
        assert_eq!((f.h1_min, f.h1_max), (-3, 2));
        assert_eq!(f.get(-1, 1), g.get(1, 1));
    }
}
