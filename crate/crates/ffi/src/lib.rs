//! C interface to the finslerlab engine.
//!
//! Metrics live behind an opaque `FlMetric` handle. Every entry point returns
//! an `FlStatus`; on failure the message is available from
//! `fl_last_error_message` on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use finslerlab::catalog;
use finslerlab::expr::{parse_metric, MetricField};
use finslerlab::geometry::Geometry;
use finslerlab::tensor::TangentSample;
use finslerlab::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Domain = 3,
    Numeric = 4,
    InvalidArgument = 5,
    Panic = 6,
}

/// Opaque handle to a parsed metric.
pub struct FlMetric {
    metric: MetricField,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> FlStatus {
    use Error::*;
    match e {
        Syntax { .. } | UnknownIdentifier { .. } | IndexOutOfRange { .. } | YVariableInVectorField { .. } | Config(_) => {
            FlStatus::Parse
        }
        Domain(_) | GuardViolation { .. } | StencilLeavesDomain | LeftDomain { .. } | FlowLeftDomain { .. } | SampleRejected(_) => {
            FlStatus::Domain
        }
        InvalidParameter(_) | DimensionMismatch { .. } | TruncationOrderExceeded(_) | OrderOutOfSpec(_) => {
            FlStatus::InvalidArgument
        }
        _ => FlStatus::Numeric,
    }
}

struct Fail(FlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FlStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(FlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(FlStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn handle<'a>(m: *const FlMetric) -> Result<&'a FlMetric, Fail> {
    m.as_ref().ok_or_else(|| null("metric"))
}

unsafe fn out_buf<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(null("out"));
    }
    if len < need {
        return Err(Fail(FlStatus::InvalidArgument, format!("output buffer holds {len} values, {need} required")));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn geometry(m: &FlMetric, x: *const f64, y: *const f64, ox: usize, oy: usize) -> Result<Geometry, Fail> {
    let n = m.metric.n;
    let s = TangentSample::new(slice(x, n, "x")?.to_vec(), slice(y, n, "y")?.to_vec());
    Ok(Geometry::new(&m.metric, &s, ox, oy)?)
}

unsafe fn publish(m: MetricField, out: *mut *mut FlMetric) {
    *out = Box::into_raw(Box::new(FlMetric { metric: m }));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses `F(x, y)` in dimension `n`. `guard_src` may be null.
///
/// # Safety
/// `src` and a non-null `guard_src` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_from_expr(
    src: *const c_char,
    n: usize,
    guard_src: *const c_char,
    out: *mut *mut FlMetric,
) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut m = parse_metric(text(src, "src")?, n)?;
        if !guard_src.is_null() {
            m = m.with_guard(text(guard_src, "guard")?)?;
        }
        publish(m, out);
        Ok(())
    })
}

/// Builds a catalog metric such as `"funk"` or `"sphere_chart"`.
///
/// # Safety
/// `label` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_from_catalog(label: *const c_char, n: usize, out: *mut *mut FlMetric) -> FlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let e = catalog::metric(text(label, "label")?, n)?;
        publish(e.metric, out);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `m` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_free(m: *mut FlMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the base manifold, 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_dim(m: *const FlMetric) -> usize {
    m.as_ref().map_or(0, |m| m.metric.n)
}

/// Evaluates `F(x, y)`. `x` and `y` hold `n` values each.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fl_metric_eval(m: *const FlMetric, x: *const f64, y: *const f64, out: *mut f64) -> FlStatus {
    guard(|| {
        let m = handle(m)?;
        let n = m.metric.n;
        let out = out_buf(out, 1, 1)?;
        out[0] = m.metric.eval(slice(x, n, "x")?, slice(y, n, "y")?)?;
        Ok(())
    })
}

/// Writes `g_ij(x, y)` row-major into `out`, which must hold `n * n` values.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fl_fundamental_tensor(
    m: *const FlMetric,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    out_len: usize,
) -> FlStatus {
    guard(|| {
        let m = handle(m)?;
        let n = m.metric.n;
        let g = geometry(m, x, y, 0, 2)?;
        out_buf(out, out_len, n * n)?.copy_from_slice(&g.value(g.fundamental()).components);
        Ok(())
    })
}

/// Writes the spray coefficients `G^i(x, y)` into `out`, which must hold `n` values.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fl_spray(
    m: *const FlMetric,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
    out_len: usize,
) -> FlStatus {
    guard(|| {
        let m = handle(m)?;
        let n = m.metric.n;
        let g = geometry(m, x, y, 1, 2)?;
        let s = g.value(g.spray()?);
        out_buf(out, out_len, n)?.copy_from_slice(&s.components);
        Ok(())
    })
}

/// Flag curvature `K(x, y, v)` of the plane spanned by `y` and `v`.
///
/// # Safety
/// `x`, `y` and `v` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_flag_curvature(
    m: *const FlMetric,
    x: *const f64,
    y: *const f64,
    v: *const f64,
    out: *mut f64,
) -> FlStatus {
    guard(|| {
        let m = handle(m)?;
        let n = m.metric.n;
        let out = out_buf(out, 1, 1)?;
        let g = geometry(m, x, y, 2, 4)?;
        out[0] = g.flag_curvature(slice(v, n, "v")?)?;
        Ok(())
    })
}

/// Ricci scalar `Ric(x, y)`.
///
/// # Safety
/// `x` and `y` must each hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_ricci_scalar(m: *const FlMetric, x: *const f64, y: *const f64, out: *mut f64) -> FlStatus {
    guard(|| {
        let m = handle(m)?;
        let out = out_buf(out, 1, 1)?;
        let g = geometry(m, x, y, 2, 4)?;
        out[0] = g.ricci_scalar()?.value();
        Ok(())
    })
}
