use std::ffi::{CStr, CString};
use std::ptr;

use finslerlab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fl_last_error_message()) }.to_string_lossy().into_owned()
}

fn from_expr(src: &str, n: usize, guard: Option<&str>) -> (FlStatus, *mut FlMetric) {
    let src = CString::new(src).unwrap();
    let guard = guard.map(|g| CString::new(g).unwrap());
    let mut m = ptr::null_mut();
    let st = unsafe { fl_metric_from_expr(src.as_ptr(), n, guard.as_ref().map_or(ptr::null(), |g| g.as_ptr()), &mut m) };
    (st, m)
}

fn from_catalog(label: &str, n: usize) -> (FlStatus, *mut FlMetric) {
    let label = CString::new(label).unwrap();
    let mut m = ptr::null_mut();
    let st = unsafe { fl_metric_from_catalog(label.as_ptr(), n, &mut m) };
    (st, m)
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(fl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn euclidean_fundamental_tensor_is_identity() {
    let (st, m) = from_expr("sqrt(y1^2+y2^2+y3^2)", 3, None);
    assert_eq!(st, FlStatus::Ok);
    unsafe {
        assert_eq!(fl_metric_dim(m), 3);
        let x = [0.1, 0.2, -0.3];
        let y = [1.0, -2.0, 0.5];
        let mut f = 0.0;
        assert_eq!(fl_metric_eval(m, x.as_ptr(), y.as_ptr(), &mut f), FlStatus::Ok);
        assert!((f - 5.25f64.sqrt()).abs() <= 1e-14);

        let mut g = [0.0; 9];
        assert_eq!(fl_fundamental_tensor(m, x.as_ptr(), y.as_ptr(), g.as_mut_ptr(), 9), FlStatus::Ok);
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[3 * i + j] - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-12);
            }
        }
        let mut s = [1.0; 3];
        assert_eq!(fl_spray(m, x.as_ptr(), y.as_ptr(), s.as_mut_ptr(), 3), FlStatus::Ok);
        assert!(s.iter().all(|v| v.abs() <= 1e-14));

        let mut short = [0.0; 8];
        assert_eq!(fl_fundamental_tensor(m, x.as_ptr(), y.as_ptr(), short.as_mut_ptr(), 8), FlStatus::InvalidArgument);
        assert!(last_error().contains("9 required"));
        fl_metric_free(m);
    }
}

#[test]
fn funk_curvature_through_the_catalog() {
    let (st, m) = from_catalog("funk", 2);
    assert_eq!(st, FlStatus::Ok);
    let x = [0.1, -0.2];
    let y = [0.6, 0.3];
    unsafe {
        let mut k = 0.0;
        assert_eq!(fl_flag_curvature(m, x.as_ptr(), y.as_ptr(), [0.2, 1.0].as_ptr(), &mut k), FlStatus::Ok);
        assert!((k + 0.25).abs() <= 1e-6, "K = {k}");

        let mut f = 0.0;
        fl_metric_eval(m, x.as_ptr(), y.as_ptr(), &mut f);
        let mut ric = 0.0;
        assert_eq!(fl_ricci_scalar(m, x.as_ptr(), y.as_ptr(), &mut ric), FlStatus::Ok);
        assert!((ric + 0.25 * f * f).abs() <= 1e-6 * f * f, "Ric = {ric}");

        let mut s = [0.0; 2];
        assert_eq!(fl_spray(m, x.as_ptr(), y.as_ptr(), s.as_mut_ptr(), 2), FlStatus::Ok);
        for i in 0..2 {
            assert!((s[i] - 0.5 * f * y[i]).abs() <= 1e-10);
        }

        assert_eq!(fl_flag_curvature(m, x.as_ptr(), y.as_ptr(), [1.2, 0.6].as_ptr(), &mut k), FlStatus::Numeric);
        assert!(!last_error().is_empty());
        fl_metric_free(m);
    }
}

#[test]
fn error_codes() {
    assert_eq!(from_expr("sqrt(y1^2+", 2, None).0, FlStatus::Parse);
    assert!(last_error().contains("syntax"));
    assert_eq!(from_expr("sqrt(z1^2)", 2, None).0, FlStatus::Parse);
    assert_eq!(from_expr("sqrt(y1^2)", 7, None).0, FlStatus::InvalidArgument);
    assert_eq!(from_catalog("hyperbolic", 2).0, FlStatus::InvalidArgument);

    let bad = [0xffu8, 0];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { fl_metric_from_catalog(bad.as_ptr().cast(), 2, &mut m) }, FlStatus::InvalidArgument);
    assert!(m.is_null());

    let (st, m) = from_expr("sqrt(y1^2+y2^2)/(1-x1^2-x2^2)", 2, Some("1-x1^2-x2^2"));
    assert_eq!(st, FlStatus::Ok);
    let mut g = [0.0; 4];
    unsafe {
        assert_eq!(fl_fundamental_tensor(m, [2.0, 0.0].as_ptr(), [1.0, 0.0].as_ptr(), g.as_mut_ptr(), 4), FlStatus::Domain);
        assert!(last_error().contains("guard"));
        assert_eq!(fl_fundamental_tensor(m, [0.2, 0.0].as_ptr(), [1.0, 0.0].as_ptr(), g.as_mut_ptr(), 4), FlStatus::Ok);
        assert!(last_error().is_empty());
        fl_metric_free(m);
    }

    let (st, m) = from_expr("y1+2*y2", 2, None);
    assert_eq!(st, FlStatus::Ok);
    unsafe {
        assert_eq!(fl_fundamental_tensor(m, [0.0, 0.0].as_ptr(), [1.0, 1.0].as_ptr(), g.as_mut_ptr(), 4), FlStatus::Numeric);
        fl_metric_free(m);
    }
}

#[test]
fn null_pointers_are_rejected() {
    let (_, m) = from_catalog("euclidean", 2);
    let x = [0.0, 0.0];
    let mut out = [0.0; 4];
    unsafe {
        let src = CString::new("sqrt(y1^2)").unwrap();
        assert_eq!(fl_metric_from_expr(ptr::null(), 1, ptr::null(), &mut ptr::null_mut()), FlStatus::NullPointer);
        assert_eq!(fl_metric_from_expr(src.as_ptr(), 1, ptr::null(), ptr::null_mut()), FlStatus::NullPointer);
        assert_eq!(fl_metric_from_catalog(ptr::null(), 1, &mut ptr::null_mut()), FlStatus::NullPointer);
        assert_eq!(fl_metric_eval(ptr::null(), x.as_ptr(), x.as_ptr(), out.as_mut_ptr()), FlStatus::NullPointer);
        assert_eq!(fl_metric_eval(m, ptr::null(), x.as_ptr(), out.as_mut_ptr()), FlStatus::NullPointer);
        assert_eq!(fl_metric_eval(m, x.as_ptr(), x.as_ptr(), ptr::null_mut()), FlStatus::NullPointer);
        assert_eq!(fl_spray(m, x.as_ptr(), ptr::null(), out.as_mut_ptr(), 2), FlStatus::NullPointer);
        assert_eq!(fl_flag_curvature(m, x.as_ptr(), [1.0, 0.0].as_ptr(), ptr::null(), out.as_mut_ptr()), FlStatus::NullPointer);
        assert_eq!(fl_ricci_scalar(m, x.as_ptr(), [1.0, 0.0].as_ptr(), ptr::null_mut()), FlStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(fl_metric_dim(ptr::null()), 0);
        fl_metric_free(ptr::null_mut());
        fl_metric_free(m);
    }
}

#[test]
fn errors_are_thread_local() {
    assert_eq!(from_catalog("hyperbolic", 2).0, FlStatus::InvalidArgument);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_empty());
    assert!(!last_error().is_empty());
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/finslerlab.h")).unwrap();
    for name in [
        "fl_version",
        "fl_last_error_message",
        "fl_metric_from_expr",
        "fl_metric_from_catalog",
        "fl_metric_free",
        "fl_metric_dim",
        "fl_metric_eval",
        "fl_fundamental_tensor",
        "fl_spray",
        "fl_flag_curvature",
        "fl_ricci_scalar",
        "typedef struct FlMetric FlMetric",
        "FL_STATUS_PANIC = 6",
    ] {
        assert!(h.contains(name), "{name}");
    }
}
