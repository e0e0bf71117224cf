#![allow(dead_code)]

use planar_ar::params::{transform, ParamSet, TransformId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn table_params() -> ParamSet {
    ParamSet::new(-0.1, 0.5, 0.2, 0.72).unwrap()
}

/// Rows `h2 = 3..=-3`, columns `h1 = -2..=3`.
pub const PUBLISHED: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.125, 0.1125, 0.0225, -0.00225],
    [0.0, 0.0, 0.25, 0.15, 0.0075, -0.003],
    [0.0, 0.0, 0.5, 0.15, -0.015, 0.0015],
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [-0.015, 0.15, 0.5, 0.0, 0.0, 0.0],
    [0.0075, 0.15, 0.25, 0.0, 0.0, 0.0],
    [0.0225, 0.1125, 0.125, 0.0, 0.0, 0.0],
];

pub fn published(h1: i64, h2: i64) -> f64 {
    PUBLISHED[(3 - h2) as usize][(h1 + 2) as usize]
}

/// Uniform draw from the causal tetrahedron with every factor above `margin`.
pub fn causal_draw(r: &mut impl Rng, margin: f64) -> ParamSet {
    loop {
        let (a, b, c) = (
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        );
        let s = r.random_range(0.2..3.0);
        let p = ParamSet::new(a, b, c, s).unwrap();
        if p.factors().iter().all(|&f| f > margin) {
            return p;
        }
    }
}

/// A causal draw pushed through a random row of the transform table.
pub fn stationary_draw(r: &mut impl Rng, margin: f64) -> ParamSet {
    loop {
        let p = causal_draw(r, margin);
        let m = TransformId::ALL[r.random_range(0..4)];
        if let Ok(q) = transform(&p, m) {
            if q.is_stationary() {
                return q;
            }
        }
    }
}

/// Rejection draw from a box, keeping `D > 0` and every `|f_i| > margin`.
pub fn stationary_box_draw(r: &mut impl Rng, half_width: f64, margin: f64) -> ParamSet {
    loop {
        let mut u = || r.random_range(-half_width..half_width);
        let (a, b, c) = (u(), u(), u());
        let p = ParamSet::new(a, b, c, 1.0).unwrap();
        if p.is_stationary() && p.factors().iter().all(|f| f.abs() > margin) {
            return p;
        }
    }
}
