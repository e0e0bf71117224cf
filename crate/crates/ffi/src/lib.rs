//! C interface to `planar_ar`.
//!
//! Every fallible function returns a [`PlanarArStatus`]; on failure a message
//! is available from [`planar_ar_last_error`] on the same thread. Grids and
//! tables are opaque handles released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use planar_ar::acf::{acf_grid, AcfGrid};
use planar_ar::estimate::recover_params;
use planar_ar::ma::{psi_table, PsiTable};
use planar_ar::params::{canonical_causal, check_conditions, transform, ParamSet, TransformId};
use planar_ar::sim::{simulate_stationary, FieldGrid, Noise, SimMethod, SimOptions};
use planar_ar::spectral::{acf_quadrature, QuadratureSpec};
use planar_ar::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarArStatus {
    Ok = 0,
    NullPointer = 1,
    ParameterDomain = 2,
    Nonstationary = 3,
    NonCausal = 4,
    Range = 5,
    IllConditioned = 6,
    InconsistentAcf = 7,
    Truncation = 8,
    Input = 9,
    Internal = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarArParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sigma2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarArConditions {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub d: f64,
    pub stationary: bool,
    pub causal: bool,
    pub pnd_sufficient: bool,
    pub near_boundary: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanarArMethod {
    CausalMa = 0,
    BoundaryRecursion = 1,
}

/// Opaque autocovariance grid.
pub struct PlanarArAcfGrid(AcfGrid);

/// Opaque table of moving-average coefficients.
pub struct PlanarArPsiTable(PsiTable);

/// Opaque simulated field.
pub struct PlanarArField(FieldGrid);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PlanarArStatus {
    match e {
        Error::ParameterDomain(_) => PlanarArStatus::ParameterDomain,
        Error::Nonstationary { .. } => PlanarArStatus::Nonstationary,
        Error::NonCausal { .. } => PlanarArStatus::NonCausal,
        Error::Range(_) => PlanarArStatus::Range,
        Error::IllConditioned(_) => PlanarArStatus::IllConditioned,
        Error::InconsistentAcf(_) => PlanarArStatus::InconsistentAcf,
        Error::Truncation(_) => PlanarArStatus::Truncation,
        Error::Input(_) => PlanarArStatus::Input,
        Error::Internal(_) => PlanarArStatus::Internal,
    }
}

enum Fail {
    Null,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PlanarArStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlanarArStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            PlanarArStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside planar_ar".into());
            PlanarArStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null)
}

unsafe fn input<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn params_in(p: *const PlanarArParams) -> Result<ParamSet, Fail> {
    let p = input(p)?;
    Ok(ParamSet::new(p.a, p.b, p.c, p.sigma2)?)
}

fn params_out(p: &ParamSet) -> PlanarArParams {
    PlanarArParams {
        a: p.a,
        b: p.b,
        c: p.c,
        sigma2: p.sigma2,
    }
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn planar_ar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn planar_ar_version() -> *const c_char {
    static V: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => c"unknown",
        };
    V.as_ptr()
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_check_conditions(
    params: *const PlanarArParams,
    result: *mut PlanarArConditions,
) -> PlanarArStatus {
    guard(|| {
        let r = check_conditions(&params_in(params)?)?;
        *out(result)? = PlanarArConditions {
            f1: r.f1,
            f2: r.f2,
            f3: r.f3,
            f4: r.f4,
            d: r.d,
            stationary: r.stationary,
            causal: r.causal,
            pnd_sufficient: r.pnd_sufficient,
            near_boundary: r.near_boundary,
        };
        Ok(())
    })
}

/// Applies row `m` (1 to 4) of the parameter correspondence table.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_transform(
    params: *const PlanarArParams,
    m: u8,
    result: *mut PlanarArParams,
) -> PlanarArStatus {
    guard(|| {
        let q = transform(&params_in(params)?, TransformId::from_index(m)?)?;
        *out(result)? = params_out(&q);
        Ok(())
    })
}

/// Causal representative and the index (1 to 4) of the transform reaching it.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_canonical_causal(
    params: *const PlanarArParams,
    result: *mut PlanarArParams,
    transform_index: *mut u8,
) -> PlanarArStatus {
    guard(|| {
        let c = canonical_causal(&params_in(params)?)?;
        *out(result)? = params_out(&c.params);
        *out(transform_index)? = c.transform.index();
        Ok(())
    })
}

/// Autocovariance at one lag.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_acf(
    params: *const PlanarArParams,
    h1: i64,
    h2: i64,
    value: *mut f64,
) -> PlanarArStatus {
    guard(|| {
        *out(value)? = acf_grid(&params_in(params)?, h1, h1, h2, h2)?.try_get(h1, h2)?;
        Ok(())
    })
}

/// Autocovariance at one lag by trapezoid quadrature of the spectral density.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_acf_quadrature(
    params: *const PlanarArParams,
    h1: i64,
    h2: i64,
    nodes_per_axis: usize,
    value: *mut f64,
) -> PlanarArStatus {
    guard(|| {
        let q = QuadratureSpec::trapezoid(nodes_per_axis);
        *out(value)? = acf_quadrature(&params_in(params)?, h1, h2, &q)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_acf_grid_new(
    params: *const PlanarArParams,
    h1_min: i64,
    h1_max: i64,
    h2_min: i64,
    h2_max: i64,
    grid: *mut *mut PlanarArAcfGrid,
) -> PlanarArStatus {
    guard(|| {
        let slot = out(grid)?;
        let g = acf_grid(&params_in(params)?, h1_min, h1_max, h2_min, h2_max)?;
        *slot = Box::into_raw(Box::new(PlanarArAcfGrid(g)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_acf_grid_get(
    grid: *const PlanarArAcfGrid,
    h1: i64,
    h2: i64,
    value: *mut f64,
) -> PlanarArStatus {
    guard(|| {
        *out(value)? = input(grid)?.0.try_get(h1, h2)?;
        Ok(())
    })
}

/// Values in row-major order (`h1` outer, `h2` inner); `len` receives the count.
/// The pointer lives as long as the grid.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_acf_grid_values(
    grid: *const PlanarArAcfGrid,
    len: *mut usize,
) -> *const f64 {
    match grid.as_ref() {
        Some(g) => {
            if let Some(n) = len.as_mut() {
                *n = g.0.values().len();
            }
            g.0.values().as_ptr()
        }
        None => ptr::null(),
    }
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_acf_grid_free(grid: *mut PlanarArAcfGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_psi_table_new(
    params: *const PlanarArParams,
    kmax: usize,
    lmax: usize,
    table: *mut *mut PlanarArPsiTable,
) -> PlanarArStatus {
    guard(|| {
        let slot = out(table)?;
        let t = psi_table(&params_in(params)?, kmax, lmax)?;
        *slot = Box::into_raw(Box::new(PlanarArPsiTable(t)));
        Ok(())
    })
}

/// Coefficient `psi(k, l)`; zero outside the table.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_psi_table_get(
    table: *const PlanarArPsiTable,
    k: i64,
    l: i64,
) -> f64 {
    table.as_ref().map_or(f64::NAN, |t| t.0.get(k, l))
}

/// Estimated absolute mass of the coefficients outside the table.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_psi_table_tail(table: *const PlanarArPsiTable) -> f64 {
    table.as_ref().map_or(f64::NAN, |t| t.0.tail_bound)
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_psi_table_free(table: *mut PlanarArPsiTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Gaussian-noise simulation with default truncation settings.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_simulate(
    params: *const PlanarArParams,
    n_rows: usize,
    n_cols: usize,
    seed: u64,
    method: PlanarArMethod,
    field: *mut *mut PlanarArField,
) -> PlanarArStatus {
    guard(|| {
        let slot = out(field)?;
        let m = match method {
            PlanarArMethod::CausalMa => SimMethod::CausalMA,
            PlanarArMethod::BoundaryRecursion => SimMethod::BoundaryRecursion,
        };
        let opts = SimOptions {
            noise: Noise::Gaussian,
            ..SimOptions::default()
        };
        let (g, _) = simulate_stationary(&params_in(params)?, n_rows, n_cols, seed, m, &opts)?;
        *slot = Box::into_raw(Box::new(PlanarArField(g)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_field_dims(
    field: *const PlanarArField,
    n_rows: *mut usize,
    n_cols: *mut usize,
) -> PlanarArStatus {
    guard(|| {
        let f = input(field)?;
        *out(n_rows)? = f.0.n_rows;
        *out(n_cols)? = f.0.n_cols;
        Ok(())
    })
}

/// Row-major cell values; the pointer lives as long as the field.
#[no_mangle]
pub unsafe extern "C" fn planar_ar_field_values(field: *const PlanarArField) -> *const f64 {
    field
        .as_ref()
        .map_or(ptr::null(), |f| f.0.values().as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn planar_ar_field_free(field: *mut PlanarArField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Parameters from the autocovariances at lags (0,0), (1,0), (0,1), (1,1).
#[no_mangle]
pub unsafe extern "C" fn planar_ar_recover_params(
    g00: f64,
    g10: f64,
    g01: f64,
    g11: f64,
    result: *mut PlanarArParams,
) -> PlanarArStatus {
    guard(|| {
        let slot = out(result)?;
        *slot = params_out(&recover_params(g00, g10, g01, g11)?.params);
        Ok(())
    })
}
