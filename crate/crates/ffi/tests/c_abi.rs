use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use planar_ar_ffi::*;

const TABLE: PlanarArParams = PlanarArParams {
    a: -0.1,
    b: 0.5,
    c: 0.2,
    sigma2: 0.72,
};

fn last_error() -> String {
    let p = planar_ar_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn conditions_and_transforms() {
    let mut r = PlanarArConditions {
        f1: 0.0,
        f2: 0.0,
        f3: 0.0,
        f4: 0.0,
        d: 0.0,
        stationary: false,
        causal: false,
        pnd_sufficient: false,
        near_boundary: false,
    };
    unsafe {
        assert_eq!(
            planar_ar_check_conditions(&TABLE, &mut r),
            PlanarArStatus::Ok
        );
        assert!(r.stationary && r.causal);
        assert!((r.d - 0.5184).abs() < 1e-15);

        let mut t2 = TABLE;
        assert_eq!(planar_ar_transform(&TABLE, 2, &mut t2), PlanarArStatus::Ok);
        assert!((t2.a + 2.5).abs() < 1e-15 && (t2.c - 5.0).abs() < 1e-15);
        assert_eq!(
            planar_ar_transform(&TABLE, 5, &mut t2),
            PlanarArStatus::ParameterDomain
        );

        let mut canon = TABLE;
        let mut m = 0u8;
        let noncausal = PlanarArParams {
            a: -2.5,
            b: 0.5,
            c: 5.0,
            sigma2: 25.0,
        };
        assert_eq!(
            planar_ar_canonical_causal(&noncausal, &mut canon, &mut m),
            PlanarArStatus::Ok
        );
        assert_eq!(m, 2);
        assert!((canon.a + 0.1).abs() < 1e-15 && (canon.sigma2 - 1.0).abs() < 1e-15);
    }
}

#[test]
fn acf_grid_handle() {
    unsafe {
        let mut g: *mut PlanarArAcfGrid = ptr::null_mut();
        assert_eq!(
            planar_ar_acf_grid_new(&TABLE, -2, 3, -3, 3, &mut g),
            PlanarArStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(planar_ar_acf_grid_get(g, 3, 2, &mut v), PlanarArStatus::Ok);
        assert!((v + 0.003).abs() < 1e-12);
        assert_eq!(
            planar_ar_acf_grid_get(g, 4, 0, &mut v),
            PlanarArStatus::Range
        );
        let mut n = 0usize;
        let vals = planar_ar_acf_grid_values(g, &mut n);
        assert_eq!(n, 42);
        assert!(std::slice::from_raw_parts(vals, n)
            .iter()
            .any(|&x| (x - 1.0).abs() < 1e-14));
        planar_ar_acf_grid_free(g);

        let mut single = 0.0;
        assert_eq!(
            planar_ar_acf(&TABLE, -1, -2, &mut single),
            PlanarArStatus::Ok
        );
        assert!((single - 0.15).abs() < 1e-12);
        let mut q = 0.0;
        assert_eq!(
            planar_ar_acf_quadrature(&TABLE, -1, -2, 256, &mut q),
            PlanarArStatus::Ok
        );
        assert!((q - 0.15).abs() < 1e-9);
    }
}

#[test]
fn psi_and_simulation_handles() {
    unsafe {
        let mut t: *mut PlanarArPsiTable = ptr::null_mut();
        assert_eq!(
            planar_ar_psi_table_new(&TABLE, 4, 4, &mut t),
            PlanarArStatus::Ok
        );
        assert_eq!(planar_ar_psi_table_get(t, 1, 2), 0.125);
        assert!(planar_ar_psi_table_tail(t) > 0.0);
        planar_ar_psi_table_free(t);

        let mut f: *mut PlanarArField = ptr::null_mut();
        assert_eq!(
            planar_ar_simulate(&TABLE, 8, 5, 7, PlanarArMethod::BoundaryRecursion, &mut f),
            PlanarArStatus::Ok
        );
        let (mut r, mut c) = (0usize, 0usize);
        assert_eq!(planar_ar_field_dims(f, &mut r, &mut c), PlanarArStatus::Ok);
        assert_eq!((r, c), (8, 5));
        let vals = std::slice::from_raw_parts(planar_ar_field_values(f), r * c);
        assert!(vals.iter().all(|v| v.is_finite()));
        planar_ar_field_free(f);
    }
}

#[test]
fn recover_round_trip() {
    let mut p = TABLE;
    unsafe {
        assert_eq!(
            planar_ar_recover_params(1.0, 0.0, 0.5, 0.15, &mut p),
            PlanarArStatus::Ok
        );
    }
    assert!((p.a + 0.1).abs() < 1e-14 && (p.sigma2 - 0.72).abs() < 1e-14);
}

#[test]
fn errors_and_null_pointers() {
    let bad = PlanarArParams {
        a: 0.5,
        b: 0.5,
        c: 0.5,
        sigma2: 1.0,
    };
    let mut v = 0.0;
    unsafe {
        assert_eq!(
            planar_ar_acf(&bad, 0, 0, &mut v),
            PlanarArStatus::Nonstationary
        );
        assert!(last_error().contains("nonstationary"));
        let mut f: *mut PlanarArField = ptr::null_mut();
        assert_eq!(
            planar_ar_simulate(&bad, 4, 4, 0, PlanarArMethod::CausalMa, &mut f),
            PlanarArStatus::Nonstationary
        );
        assert!(f.is_null());
        assert_eq!(
            planar_ar_acf(ptr::null(), 0, 0, &mut v),
            PlanarArStatus::NullPointer
        );
        assert_eq!(
            planar_ar_acf(&TABLE, 0, 0, ptr::null_mut()),
            PlanarArStatus::NullPointer
        );
        let neg = PlanarArParams {
            sigma2: -1.0,
            ..TABLE
        };
        assert_eq!(
            planar_ar_acf(&neg, 0, 0, &mut v),
            PlanarArStatus::ParameterDomain
        );
        planar_ar_acf_grid_free(ptr::null_mut());
        planar_ar_psi_table_free(ptr::null_mut());
        planar_ar_field_free(ptr::null_mut());
    }
    let ver = unsafe { CStr::from_ptr(planar_ar_version()) };
    assert_eq!(ver.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/planar_ar.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "planar_ar_acf_grid_new",
        "planar_ar_simulate",
        "PLANAR_AR_STATUS_NONSTATIONARY",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(cc) = which("cc") else {
        eprintln!("no C compiler found; skipping compile check");
        return;
    };
    let example = dir.join("examples/acf_table.c");
    let include = format!("-I{}", dir.join("include").display());
    for lang in ["c", "c++"] {
        let status = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, &include])
            .arg(&example)
            .status()
            .unwrap();
        assert!(status.success(), "example does not compile as {lang}");
    }
}

fn which(name: &str) -> Result<std::path::PathBuf, ()> {
    std::env::var_os("PATH")
        .and_then(|paths| {
            std::env::split_paths(&paths)
                .map(|p| p.join(name))
                .find(|p| p.is_file())
        })
        .ok_or(())
}
