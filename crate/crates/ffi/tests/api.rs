use std::ffi::{CStr, CString};
use std::ptr;

use oslx_ffi::*;

fn grid(dim: usize, n: usize, values: &[f64]) -> *mut OslxGrid {
    let mut g = ptr::null_mut();
    let s = unsafe { oslx_grid_new(dim, n, values.as_ptr(), values.len(), &mut g) };
    assert_eq!(s, OslxStatus::Ok);
    g
}

fn values(g: *const OslxGrid) -> Vec<f64> {
    let len = unsafe { oslx_grid_len(g) };
    let mut v = vec![0.0; len];
    assert_eq!(unsafe { oslx_grid_values(g, v.as_mut_ptr(), len) }, OslxStatus::Ok);
    v
}

fn last_error() -> String {
    let p = oslx_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(oslx_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn grid_round_trip_and_shape() {
    let g = grid(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    unsafe {
        assert_eq!(oslx_grid_dim(g), 2);
        assert_eq!(oslx_grid_resolution(g), 2);
        assert_eq!(oslx_grid_len(g), 4);
    }
    assert_eq!(values(g), [1.0, 2.0, 3.0, 4.0]);
    let mut short = [0.0; 3];
    assert_eq!(unsafe { oslx_grid_values(g, short.as_mut_ptr(), 3) }, OslxStatus::InvalidArgument);
    unsafe { oslx_grid_free(g) };
}

#[test]
fn invalid_shapes_and_nulls() {
    let mut g = ptr::null_mut();
    let v = [1.0; 3];
    assert_eq!(unsafe { oslx_grid_new(1, 3, v.as_ptr(), 3, &mut g) }, OslxStatus::InvalidGrid);
    assert!(g.is_null());
    assert!(last_error().contains("power of two"));
    assert_eq!(unsafe { oslx_grid_new(1, 4, ptr::null(), 4, &mut g) }, OslxStatus::NullPointer);
    let mut out = 0.0;
    assert_eq!(unsafe { oslx_bmo(ptr::null(), OSLX_FAMILY_ALL, &mut out) }, OslxStatus::NullPointer);
    unsafe {
        oslx_grid_free(ptr::null_mut());
        oslx_weight_free(ptr::null_mut());
        assert_eq!(oslx_grid_len(ptr::null()), 0);
    }
}

#[test]
fn maximal_and_sharp_of_a_step() {
    let g = grid(1, 4, &[0.0, 0.0, 2.0, 2.0]);
    let mut m = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(oslx_maximal(g, OSLX_MODE_RESTRICTED, &mut m), OslxStatus::Ok);
        assert_eq!(oslx_sharp_maximal(g, OSLX_MODE_RESTRICTED, &mut s), OslxStatus::Ok);
    }
    let mv = values(m);
    let sv = values(s);
    assert_eq!(mv, [1.0, 4.0 / 3.0, 2.0, 2.0]);
    for (a, b) in sv.iter().zip(&mv) {
        assert!(*a <= 2.0 * b);
    }
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { oslx_maximal(g, 7, &mut bad) }, OslxStatus::InvalidArgument);
    assert!(last_error().contains("mode"));
    unsafe {
        oslx_grid_free(g);
        oslx_grid_free(m);
        oslx_grid_free(s);
    }
}

#[test]
fn seminorms_of_indicator() {
    let g = grid(1, 8, &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    let (mut bmo, mut blo) = (0.0, 0.0);
    unsafe {
        assert_eq!(oslx_bmo(g, OSLX_FAMILY_ALL, &mut bmo), OslxStatus::Ok);
        assert_eq!(oslx_blo(g, OSLX_FAMILY_ALL, &mut blo), OslxStatus::Ok);
        oslx_grid_free(g);
    }
    assert!((bmo - 0.5).abs() < 1e-15);
    assert!(blo >= bmo / 2.0);
}

#[test]
fn weights_and_constants() {
    let g = grid(1, 8, &[1.0; 8]);
    let mut w = ptr::null_mut();
    let mut k = OslxWeightConstants::default();
    unsafe {
        assert_eq!(oslx_weight_new(g, 0.0, &mut w), OslxStatus::Ok);
        assert_eq!(oslx_weight_constants(w, OSLX_MODE_RESTRICTED, OSLX_FAMILY_ALL, &mut k), OslxStatus::Ok);
        oslx_weight_free(w);
        oslx_grid_free(g);
    }
    assert!((k.a1 - 1.0).abs() < 1e-15 && (k.a_infty - 1.0).abs() < 1e-15);

    let g = grid(1, 4, &[1.0, 0.0, 2.0, 1.0]);
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(oslx_weight_new(g, 0.0, &mut w), OslxStatus::NonPositiveWeight);
        assert!(last_error().contains("nonpositive"));
        assert_eq!(oslx_weight_new(g, 1e-3, &mut w), OslxStatus::Ok);
        assert_eq!(oslx_weight_constants(w, OSLX_MODE_DYADIC, OSLX_FAMILY_DYADIC, &mut k), OslxStatus::Ok);
        assert!(k.a_infty >= 1.0);
        oslx_weight_free(w);
        oslx_grid_free(g);
    }
}

#[test]
fn read_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("g.csv");
    std::fs::write(&good, "1\n2\n3\n4\n").unwrap();
    let bad = dir.path().join("b.csv");
    std::fs::write(&bad, "1\nx\n").unwrap();
    let mut g = ptr::null_mut();
    let p = CString::new(good.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { oslx_grid_read(p.as_ptr(), &mut g) }, OslxStatus::Ok);
    assert_eq!(values(g), [1.0, 2.0, 3.0, 4.0]);
    unsafe { oslx_grid_free(g) };
    let p = CString::new(bad.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { oslx_grid_read(p.as_ptr(), &mut g) }, OslxStatus::Parse);
    assert!(last_error().contains("line 2"));
    let p = CString::new(dir.path().join("missing.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { oslx_grid_read(p.as_ptr(), &mut g) }, OslxStatus::Io);
}

#[test]
fn header_lists_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/oslx.h")).unwrap();
    for name in [
        "oslx_grid_new",
        "oslx_grid_read",
        "oslx_grid_free",
        "oslx_grid_values",
        "oslx_weight_new",
        "oslx_weight_free",
        "oslx_maximal",
        "oslx_sharp_maximal",
        "oslx_bmo",
        "oslx_blo",
        "oslx_weight_constants",
        "oslx_last_error_message",
        "typedef struct OslxGrid OslxGrid",
        "OSLX_STATUS_NON_POSITIVE_WEIGHT = 5",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
