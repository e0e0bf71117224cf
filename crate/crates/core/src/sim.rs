//! Field generation: the deterministic quadrant recurrence, its explicit MA
//! solution, seeded simulation of the stationary field, and the sample
//! autocovariance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acf::{AcfGrid, MAX_CELLS};
use crate::error::{Error, Result};
use crate::ma::{psi_table, truncation_order};
use crate::params::{canonical_causal, FlipKind, ParamSet};

/// Generator identity recorded in simulation metadata. Lattice row `r` draws
/// from stream `r` of a ChaCha20 generator keyed by the seed.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9), one stream per lattice row";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Deterministic,
    CausalMA,
    BoundaryRecursion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub n_rows: usize,
    pub n_cols: usize,
    values: Vec<f64>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
}

impl FieldGrid {
    pub fn from_values(
        n_rows: usize,
        n_cols: usize,
        values: Vec<f64>,
        provenance: Provenance,
        seed: Option<u64>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Input("field dimensions must be positive".into()));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Input(format!(
                "{n_rows} x {n_cols} field needs {} values, got {}",
                n_rows * n_cols,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite field value at cell {bad}"
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
            provenance,
            seed,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.n_cols;
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k / cols, k % cols, v))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    fn reflect(&mut self, flip: FlipKind) {
        let (rows, cols) = (self.n_rows, self.n_cols);
        let (s1, s2) = flip.signs();
        if s1 == 1 && s2 == 1 {
            return;
        }
        let src = self.values.clone();
        for i in 0..rows {
            for j in 0..cols {
                let si = if s1 < 0 { rows - 1 - i } else { i };
                let sj = if s2 < 0 { cols - 1 - j } else { j };
                self.values[i * cols + j] = src[si * cols + sj];
            }
        }
    }
}

/// Initial/boundary data for the quadrant recurrence on an
/// `(first_axis.len() + 1) x (second_axis.len() + 1)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub x00: f64,
    /// `x[i,0]` for `i = 1..n_rows`.
    pub first_axis: Vec<f64>,
    /// `x[0,j]` for `j = 1..n_cols`.
    pub second_axis: Vec<f64>,
    /// `v[i,j]` for `i, j >= 1`, row-major, `(n_rows-1) x (n_cols-1)`.
    pub forcing: Vec<f64>,
}

impl BoundaryData {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        let (r, c) = (n_rows.saturating_sub(1), n_cols.saturating_sub(1));
        Self {
            x00: 0.0,
            first_axis: vec![0.0; r],
            second_axis: vec![0.0; c],
            forcing: vec![0.0; r * c],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.first_axis.len() + 1
    }

    pub fn n_cols(&self) -> usize {
        self.second_axis.len() + 1
    }

    fn validate(&self) -> Result<()> {
        let (r, c) = (self.first_axis.len(), self.second_axis.len());
        if self.forcing.len() != r * c {
            return Err(Error::Input(format!(
                "forcing has {} values, a {} x {} interior needs {}",
                self.forcing.len(),
                r,
                c,
                r * c
            )));
        }
        if (r as u64 + 1) * (c as u64 + 1) > MAX_CELLS {
            return Err(Error::Range("grid exceeds the cell limit".into()));
        }
        Ok(())
    }

    /// Forcing `v[i,j]`, `i, j >= 1`.
    fn v(&self, i: usize, j: usize) -> f64 {
        self.forcing[(i - 1) * self.second_axis.len() + (j - 1)]
    }

    fn boundary(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.x00,
            (i, 0) => self.first_axis[i - 1],
            (0, j) => self.second_axis[j - 1],
            _ => unreachable!("interior cell"),
        }
    }
}

/// Solves `x[i,j] = a x[i-1,j] + b x[i,j-1] + c x[i-1,j-1] + v[i,j]` by direct
/// recursion in row-major order.
pub fn solve_deterministic(p: &ParamSet, bd: &BoundaryData) -> Result<FieldGrid> {
    bd.validate()?;
    let (rows, cols) = (bd.n_rows(), bd.n_cols());
    let mut x = vec![0.0; rows * cols];
    x[0] = bd.x00;
    for i in 1..rows {
        x[i * cols] = bd.first_axis[i - 1];
    }
    x[1..cols].copy_from_slice(&bd.second_axis);
    for i in 1..rows {
        for j in 1..cols {
            x[i * cols + j] = p.a * x[(i - 1) * cols + j]
                + p.b * x[i * cols + j - 1]
                + p.c * x[(i - 1) * cols + j - 1]
                + bd.v(i, j);
        }
    }
    FieldGrid::from_values(rows, cols, x, Provenance::Deterministic, None)
}

/// Evaluates the explicit solution of the quadrant recurrence: boundary
/// increments and forcing convolved with the MA coefficients.
pub fn solve_explicit(p: &ParamSet, bd: &BoundaryData) -> Result<FieldGrid> {
    bd.validate()?;
    p.require_causal("the explicit solution is stated for causal coefficients")?;
    let (rows, cols) = (bd.n_rows(), bd.n_cols());
    let psi = psi_table(p, rows - 1, cols - 1)?;
    let g = |k: usize, l: usize| psi.get(k as i64, l as i64);
    let x: Vec<f64> = (0..rows)
        .into_par_iter()
        .flat_map_iter(|i| {
            let psi = &g;
            (0..cols).map(move |j| {
                if i == 0 || j == 0 {
                    return bd.boundary(i, j);
                }
                let mut s = psi(i, j) * bd.x00;
                for k in 0..i {
                    let prev = if i - k - 1 == 0 {
                        bd.x00
                    } else {
                        bd.first_axis[i - k - 2]
                    };
                    s += psi(k, j) * (bd.first_axis[i - k - 1] - p.a * prev);
                }
                for l in 0..j {
                    let prev = if j - l - 1 == 0 {
                        bd.x00
                    } else {
                        bd.second_axis[j - l - 2]
                    };
                    s += psi(i, l) * (bd.second_axis[j - l - 1] - p.b * prev);
                }
                for k in 0..i {
                    for l in 0..j {
                        s += psi(k, l) * bd.v(i - k, j - l);
                    }
                }
                s
            })
        })
        .collect();
    FieldGrid::from_values(rows, cols, x, Provenance::Deterministic, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimMethod {
    CausalMA,
    BoundaryRecursion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Noise {
    Gaussian,
    /// Uniform on `[-sqrt(3), sqrt(3)]`, variance matched to the Gaussian.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Target for the estimated MA tail mass (truncation and burn-in).
    pub tol: f64,
    /// Largest MA order or burn-in margin the tolerance search may use.
    pub max_order: usize,
    /// Overrides the burn-in margin of the boundary recursion.
    pub burn_in: Option<usize>,
    pub noise: Noise,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_order: 1024,
            burn_in: None,
            noise: Noise::Gaussian,
        }
    }
}

pub const MIN_BURN_IN: usize = 64;

/// Settings actually used by a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub params: ParamSet,
    pub seed: u64,
    pub method: SimMethod,
    pub noise: Noise,
    pub tol: f64,
    /// MA order (CausalMA) or burn-in margin (BoundaryRecursion).
    pub truncation: usize,
    pub flip: FlipKind,
    pub rng: &'static str,
}

/// Unit-variance noise on a `rows x cols` lattice, row `r` drawn from stream `r`.
fn noise_lattice(rows: usize, cols: usize, seed: u64, noise: Noise, scale: f64) -> Vec<f64> {
    let uniform = Uniform::new_inclusive(-(3f64.sqrt()), 3f64.sqrt()).expect("valid bounds");
    (0..rows)
        .into_par_iter()
        .flat_map_iter(|r| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            (0..cols)
                .map(|_| {
                    let z: f64 = match noise {
                        Noise::Gaussian => rng.sample(StandardNormal),
                        Noise::Uniform => uniform.sample(&mut rng),
                    };
                    scale * z
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Simulates `n_rows x n_cols` cells of the stationary field. Non-causal
/// stationary parameters are simulated through their causal representative
/// and reflected back, so the output has the autocovariance of `p`.
pub fn simulate_stationary(
    p: &ParamSet,
    n_rows: usize,
    n_cols: usize,
    seed: u64,
    method: SimMethod,
    opts: &SimOptions,
) -> Result<(FieldGrid, SimMetadata)> {
    p.require_stationary()?;
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::ParameterDomain(
            "field dimensions must be positive".into(),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let canon = canonical_causal(p)?;
    let q = canon.params;
    let scale = q.sigma2.sqrt();
    let (mut field, truncation) = match method {
        SimMethod::CausalMA => {
            let k = truncation_order(&q, opts.tol, opts.max_order)?;
            check_cells(n_rows + k, n_cols + k)?;
            let psi = psi_table(&q, k, k)?;
            let (lr, lc) = (n_rows + k, n_cols + k);
            let eps = noise_lattice(lr, lc, seed, opts.noise, scale);
            let taps: Vec<(usize, usize, f64)> = psi.iter().filter(|&(_, _, v)| v != 0.0).collect();
            let x: Vec<f64> = (0..n_rows)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let eps = &eps;
                    let taps = &taps;
                    (0..n_cols).map(move |j| {
                        taps.iter()
                            .map(|&(kk, ll, w)| w * eps[(i + k - kk) * lc + (j + k - ll)])
                            .sum::<f64>()
                    })
                })
                .collect();
            (
                FieldGrid::from_values(n_rows, n_cols, x, Provenance::CausalMA, Some(seed))?,
                k,
            )
        }
        SimMethod::BoundaryRecursion => {
            let m = match opts.burn_in {
                Some(m) => m,
                None => truncation_order(&q, opts.tol, opts.max_order)?.max(MIN_BURN_IN),
            };
            let (lr, lc) = (n_rows + m + 1, n_cols + m + 1);
            check_cells(lr, lc)?;
            let eps = noise_lattice(lr - 1, lc - 1, seed, opts.noise, scale);
            let mut bd = BoundaryData::zeros(lr, lc);
            bd.forcing = eps;
            let full = solve_deterministic(&q, &bd)?;
            let x: Vec<f64> = (0..n_rows)
                .flat_map(|i| {
                    let row = (i + m + 1) * lc + m + 1;
                    full.values[row..row + n_cols].to_vec()
                })
                .collect();
            (
                FieldGrid::from_values(
                    n_rows,
                    n_cols,
                    x,
                    Provenance::BoundaryRecursion,
                    Some(seed),
                )?,
                m,
            )
        }
    };
    field.reflect(canon.flip);
    let meta = SimMetadata {
        params: *p,
        seed,
        method,
        noise: opts.noise,
        tol: opts.tol,
        truncation,
        flip: canon.flip,
        rng: RNG_NAME,
    };
    Ok((field, meta))
}

fn check_cells(rows: usize, cols: usize) -> Result<()> {
    if rows as u64 * cols as u64 > MAX_CELLS {
        Err(Error::Range(format!(
            "{rows} x {cols} lattice exceeds the cell limit"
        )))
    } else {
        Ok(())
    }
}

/// Residual `x[i,j] - a x[i-1,j] - b x[i,j-1] - c x[i-1,j-1]` on interior cells,
/// `(n_rows-1) x (n_cols-1)` row-major.
pub fn recurrence_residuals(p: &ParamSet, g: &FieldGrid) -> Vec<f64> {
    let mut out = Vec::with_capacity((g.n_rows - 1) * (g.n_cols - 1));
    for i in 1..g.n_rows {
        for j in 1..g.n_cols {
            out.push(
                g.get(i, j)
                    - p.a * g.get(i - 1, j)
                    - p.b * g.get(i, j - 1)
                    - p.c * g.get(i - 1, j - 1),
            );
        }
    }
    out
}

/// Biased sample autocovariance on `[-h1_max, h1_max] x [-h2_max, h2_max]`:
/// `(1/N) sum (x[i,j] - m)(x[i-h1,j-h2] - m)` over pairs inside the grid.
pub fn empirical_acf(g: &FieldGrid, h1_max: usize, h2_max: usize) -> Result<AcfGrid> {
    if h1_max >= g.n_rows || h2_max >= g.n_cols {
        return Err(Error::Range(format!(
            "lag window {h1_max} x {h2_max} does not fit a {} x {} field",
            g.n_rows, g.n_cols
        )));
    }
    let (h1m, h2m) = (h1_max as i64, h2_max as i64);
    let mut out = AcfGrid::zeros(-h1m, h1m, -h2m, h2m)?;
    let n = g.values.len() as f64;
    let mean = g.values.iter().sum::<f64>() / n;
    let centered: Vec<f64> = g.values.iter().map(|v| v - mean).collect();
    let (rows, cols) = (g.n_rows as i64, g.n_cols as i64);
    let lags: Vec<(i64, i64)> = (0..=h1m)
        .flat_map(|h1| (-h2m..=h2m).map(move |h2| (h1, h2)))
        .filter(|&(h1, h2)| h1 > 0 || h2 >= 0)
        .collect();
    let vals: Vec<f64> = lags
        .par_iter()
        .map(|&(h1, h2)| {
            let mut s = 0.0;
            for i in h1.max(0)..rows.min(rows + h1) {
                let (j0, j1) = (h2.max(0), cols.min(cols + h2));
                let r = (i * cols) as usize;
                let rl = ((i - h1) * cols) as usize;
                for j in j0..j1 {
                    s += centered[r + j as usize] * centered[rl + (j - h2) as usize];
                }
            }
            s / n
        })
        .collect();
    for (&(h1, h2), v) in lags.iter().zip(vals) {
        out.set(h1, h2, v);
        out.set(-h1, -h2, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(a: f64, b: f64, c: f64, s: f64) -> ParamSet {
        ParamSet::new(a, b, c, s).unwrap()
    }

    fn table() -> ParamSet {
        ps(-0.1, 0.5, 0.2, 0.72)
    }

    #[test]
    fn deterministic_examples() {
        let diag = ps(0.0, 0.0, 1.0, 1.0);
        let mut bd = BoundaryData::zeros(3, 3);
        bd.x00 = 1.0;
        let x = solve_deterministic(&diag, &bd).unwrap();
        assert_eq!((x.get(1, 1), x.get(2, 2), x.get(2, 1)), (1.0, 1.0, 0.0));

        let x = solve_deterministic(&table(), &bd).unwrap();
        assert!((x.get(1, 1) - 0.2).abs() < 1e-15);

        let z = solve_deterministic(&table(), &BoundaryData::zeros(5, 4)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        assert_eq!((z.n_rows, z.n_cols), (5, 4));
    }

    #[test]
    fn deterministic_rejects_bad_dimensions() {
        let mut bd = BoundaryData::zeros(4, 4);
        bd.forcing.pop();
        assert!(matches!(
            solve_deterministic(&table(), &bd),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn explicit_examples() {
        let p = table();
        let mut bd = BoundaryData::zeros(2, 2);
        bd.x00 = 1.0;
        let x = solve_explicit(&p, &bd).unwrap();
        assert!((x.get(1, 1) - p.c).abs() < 1e-15);

        let mut bd = BoundaryData::zeros(6, 5);
        bd.forcing[0] = 1.0; // v[1,1]
        let x = solve_explicit(&p, &bd).unwrap();
        for i in 1..6 {
            for j in 1..5 {
                let want = crate::ma::psi(&p, i as i64 - 1, j as i64 - 1);
                assert!((x.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn explicit_matches_recursion_on_random_boundary() {
        use rand::Rng;
        let p = table();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut bd = BoundaryData::zeros(16, 16);
        bd.x00 = rng.random_range(-1.0..1.0);
        bd.first_axis
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-1.0..1.0));
        bd.second_axis
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-1.0..1.0));
        bd.forcing
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-1.0..1.0));
        let a = solve_explicit(&p, &bd).unwrap();
        let b = solve_deterministic(&p, &bd).unwrap();
        let err = a
            .values()
            .iter()
            .zip(b.values())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn white_noise_simulation_is_raw_draws() {
        let p = ps(0.0, 0.0, 0.0, 1.0);
        let (g, meta) =
            simulate_stationary(&p, 7, 5, 42, SimMethod::CausalMA, &SimOptions::default()).unwrap();
        assert_eq!(meta.truncation, 0);
        let raw = noise_lattice(7, 5, 42, Noise::Gaussian, 1.0);
        assert_eq!(g.values(), &raw[..]);
    }

    #[test]
    fn simulation_is_deterministic() {
        let p = table();
        for method in [SimMethod::CausalMA, SimMethod::BoundaryRecursion] {
            let (a, _) =
                simulate_stationary(&p, 32, 24, 9, method, &SimOptions::default()).unwrap();
            let (b, _) =
                simulate_stationary(&p, 32, 24, 9, method, &SimOptions::default()).unwrap();
            assert_eq!(a, b);
            let (c, _) =
                simulate_stationary(&p, 32, 24, 10, method, &SimOptions::default()).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let p = table();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    simulate_stationary(&p, 40, 40, 3, SimMethod::CausalMA, &SimOptions::default())
                })
                .unwrap()
                .0
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn uniform_noise_matches_variance() {
        let p = ps(0.0, 0.0, 0.0, 2.0);
        let opts = SimOptions {
            noise: Noise::Uniform,
            ..SimOptions::default()
        };
        let (g, _) = simulate_stationary(&p, 200, 200, 5, SimMethod::CausalMA, &opts).unwrap();
        let lim = 3f64.sqrt() * 2f64.sqrt();
        assert!(g.values().iter().all(|v| v.abs() <= lim));
        let var = g.values().iter().map(|v| v * v).sum::<f64>() / 40_000.0;
        assert!((var - 2.0).abs() < 0.1, "{var}");
    }

    #[test]
    fn simulation_rejects_nonstationary() {
        assert!(matches!(
            simulate_stationary(
                &ps(0.5, 0.5, 0.5, 1.0),
                4,
                4,
                1,
                SimMethod::CausalMA,
                &SimOptions::default()
            ),
            Err(Error::Nonstationary { .. })
        ));
    }

    #[test]
    fn empirical_acf_examples() {
        let zero =
            FieldGrid::from_values(4, 4, vec![0.0; 16], Provenance::Deterministic, None).unwrap();
        let g = empirical_acf(&zero, 2, 2).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
        assert!(matches!(empirical_acf(&zero, 4, 1), Err(Error::Range(_))));
    }

    #[test]
    fn empirical_acf_brute_force() {
        let vals: Vec<f64> = (0..20).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let f = FieldGrid::from_values(4, 5, vals, Provenance::Deterministic, None).unwrap();
        let g = empirical_acf(&f, 2, 3).unwrap();
        let mean = f.values().iter().sum::<f64>() / 20.0;
        for h1 in -2i64..=2 {
            for h2 in -3i64..=3 {
                let mut s = 0.0;
                for i in 0..4i64 {
                    for j in 0..5i64 {
                        let (u, v) = (i - h1, j - h2);
                        if (0..4).contains(&u) && (0..5).contains(&v) {
                            s += (f.get(i as usize, j as usize) - mean)
                                * (f.get(u as usize, v as usize) - mean);
                        }
                    }
                }
                assert!((g.get(h1, h2).unwrap() - s / 20.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reflected_simulation_for_noncausal_params() {
        let p = ps(2.0, -0.1, -0.05, 1.0);
        let (g, meta) = simulate_stationary(
            &p,
            16,
            16,
            1,
            SimMethod::BoundaryRecursion,
            &SimOptions::default(),
        )
        .unwrap();
        assert_eq!(meta.flip, FlipKind::FirstAxis);
        assert!(g.values().iter().all(|v| v.is_finite()));
    }
}
