//! First-order planar autoregressive random fields
//! `X[i,j] = a X[i-1,j] + b X[i,j-1] + c X[i-1,j-1] + e[i,j]`.
//!
//! * [`params`]: existence and causality conditions, parameter transforms,
//!   equivalence classes and the causal representative.
//! * [`spectral`]: spectral density, quadrature autocovariance, closed-form
//!   one-dimensional integrals.
//! * [`acf`]: exact autocovariance grids and Yule-Walker residuals.
//! * [`ma`]: moving-average coefficients and truncation.
//! * [`sim`]: deterministic solvers, seeded simulation, sample autocovariance.
//! * [`estimate`]: moment-based parameter recovery.
//! * [`export`]: CSV, JSON and PGM renderings.
//! * [`cli`]: the `planar-ar` command line.
//!
//! ```
//! use planar_ar::{acf::acf_grid, params::check_conditions, ParamSet};
//!
//! let p = ParamSet::new(-0.1, 0.5, 0.2, 0.72)?;
//! assert!(check_conditions(&p)?.causal);
//! let g = acf_grid(&p, -2, 3, -3, 3)?;
//! assert!((g.get(3, 2).unwrap() + 0.003).abs() < 1e-12);
//! # Ok::<(), planar_ar::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acf;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod export;
pub mod ma;
pub mod params;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use params::ParamSet;
