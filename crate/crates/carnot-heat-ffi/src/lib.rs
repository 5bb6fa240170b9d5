//! C ABI for the heat-content estimators: opaque handles, integer status
//! codes, and a thread-local last-error message. The header is generated by
//! cbindgen into include/carnot_heat.h at build time.

use carnot_heat::config::ExperimentConfig;
use carnot_heat::domain::{domain_by_name, horizontal_perimeter, LevelSetDomain, PerimeterMethod};
use carnot_heat::experiment;
use carnot_heat::group::{by_name as group_by_name, CarnotGroup};
use carnot_heat::heat::{estimate_q, HeatParams};
use carnot_heat::stable::{estimate_sup_constant, RateFunction};
use carnot_heat::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChStatus {
    ChOk = 0,
    /// a check ran and failed
    ChCheckFailed = 1,
    /// bad arguments, unknown names, malformed configs
    ChInvalidInput = 2,
    ChNullPointer = 3,
    ChRuntimeError = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> ChStatus {
    match err {
        Error::CheckFailed(_) => ChStatus::ChCheckFailed,
        Error::Io(_) => ChStatus::ChRuntimeError,
        _ => ChStatus::ChInvalidInput,
    }
}

fn fail(err: Error) -> ChStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn guarded(f: impl FnOnce() -> ChStatus) -> ChStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            ChStatus::ChRuntimeError
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, ChStatus> {
    if p.is_null() {
        set_error("null string pointer".into());
        return Err(ChStatus::ChNullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string is not valid UTF-8".into());
        ChStatus::ChInvalidInput
    })
}

/// Opaque Carnot group handle.
pub struct ChGroup {
    inner: CarnotGroup,
}

/// Opaque level-set domain handle, bound to the group it was built for.
pub struct ChDomain {
    inner: LevelSetDomain,
}

/// Copies the last error message for this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn ch_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a group from a registry name such as "heisenberg:1" or
/// "euclidean:3".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ch_group_new(name: *const c_char, out: *mut *mut ChGroup) -> ChStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return ChStatus::ChNullPointer;
        }
        let name = match cstr(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match group_by_name(name) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(ChGroup { inner: g }));
                ChStatus::ChOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Frees a group handle; a null pointer is a no-op.
///
/// # Safety
/// `g` must come from `ch_group_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ch_group_free(g: *mut ChGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Topological dimension, or 0 on a null handle.
///
/// # Safety
/// `g` must be a live group handle or null.
#[no_mangle]
pub unsafe extern "C" fn ch_group_dim(g: *const ChGroup) -> usize {
    g.as_ref().map_or(0, |g| g.inner.dim())
}

/// Homogeneous dimension Q, or 0 on a null handle.
///
/// # Safety
/// `g` must be a live group handle or null.
#[no_mangle]
pub unsafe extern "C" fn ch_group_homogeneous_dim(g: *const ChGroup) -> usize {
    g.as_ref().map_or(0, |g| g.inner.homogeneous_dim())
}

/// Builds a domain from a registry name such as "h1-torus:2,0.5".
///
/// # Safety
/// `g` must be a live group handle, `name` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ch_domain_new(
    g: *const ChGroup,
    name: *const c_char,
    out: *mut *mut ChDomain,
) -> ChStatus {
    guarded(|| {
        let Some(g) = g.as_ref() else {
            set_error("null group handle".into());
            return ChStatus::ChNullPointer;
        };
        if out.is_null() {
            set_error("null output pointer".into());
            return ChStatus::ChNullPointer;
        }
        let name = match cstr(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match domain_by_name(&g.inner, name) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(ChDomain { inner: d }));
                ChStatus::ChOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Frees a domain handle; a null pointer is a no-op.
///
/// # Safety
/// `d` must come from `ch_domain_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ch_domain_free(d: *mut ChDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Membership test: writes 1 into `out` when x lies in the open domain.
///
/// # Safety
/// `x` must point to `len` doubles matching the group dimension.
#[no_mangle]
pub unsafe extern "C" fn ch_domain_contains(
    d: *const ChDomain,
    x: *const f64,
    len: usize,
    out: *mut i32,
) -> ChStatus {
    guarded(|| {
        let Some(d) = d.as_ref() else {
            set_error("null domain handle".into());
            return ChStatus::ChNullPointer;
        };
        if x.is_null() || out.is_null() {
            set_error("null pointer argument".into());
            return ChStatus::ChNullPointer;
        }
        if len != d.inner.dim() {
            set_error(format!("point has {} coordinates, domain needs {}", len, d.inner.dim()));
            return ChStatus::ChInvalidInput;
        }
        let slice = std::slice::from_raw_parts(x, len);
        *out = d.inner.contains(slice) as i32;
        ChStatus::ChOk
    })
}

/// Horizontal perimeter by the shell co-area estimator.
///
/// # Safety
/// Handles must be live; `value` and `stderr` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ch_perimeter_shell(
    g: *const ChGroup,
    d: *const ChDomain,
    eps: f64,
    samples: usize,
    seed: u64,
    value: *mut f64,
    stderr: *mut f64,
) -> ChStatus {
    guarded(|| {
        let (Some(g), Some(d)) = (g.as_ref(), d.as_ref()) else {
            set_error("null handle".into());
            return ChStatus::ChNullPointer;
        };
        if value.is_null() || stderr.is_null() {
            set_error("null output pointer".into());
            return ChStatus::ChNullPointer;
        }
        match horizontal_perimeter(
            &g.inner,
            &d.inner,
            PerimeterMethod::ShellCoarea { eps, samples },
            seed,
        ) {
            Ok(est) => {
                *value = est.value;
                *stderr = est.stderr;
                ChStatus::ChOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Heat content Q^(alpha)(t) with default estimator settings; writes the
/// estimate and its standard error.
///
/// # Safety
/// Handles must be live; `q` and `stderr` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ch_heat_content(
    g: *const ChGroup,
    d: *const ChDomain,
    alpha: f64,
    t: f64,
    samples: usize,
    grid: usize,
    seed: u64,
    q: *mut f64,
    stderr: *mut f64,
) -> ChStatus {
    guarded(|| {
        let (Some(g), Some(d)) = (g.as_ref(), d.as_ref()) else {
            set_error("null handle".into());
            return ChStatus::ChNullPointer;
        };
        if q.is_null() || stderr.is_null() {
            set_error("null output pointer".into());
            return ChStatus::ChNullPointer;
        }
        let params = HeatParams { n: samples, grid, ..Default::default() };
        match estimate_q(&g.inner, &d.inner, alpha, t, &params, seed) {
            Ok(est) => {
                *q = est.q_hat;
                *stderr = est.stderr;
                ChStatus::ChOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Small-time rate function mu_alpha(t); for alpha > 1 the constant
/// kappa_alpha is estimated from `kappa_samples` Monte Carlo draws.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ch_rate_mu(
    alpha: f64,
    t: f64,
    kappa_samples: usize,
    seed: u64,
    out: *mut f64,
) -> ChStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return ChStatus::ChNullPointer;
        }
        let rate = if alpha > 1.0 {
            let steps = if alpha >= 2.0 { 64 } else { 256 };
            match estimate_sup_constant(alpha, kappa_samples, steps, seed) {
                Ok(c) => RateFunction::with_constant(c),
                Err(e) => return fail(e),
            }
        } else {
            match RateFunction::without_constant(alpha) {
                Ok(r) => r,
                Err(e) => return fail(e),
            }
        };
        match rate.mu(t) {
            Ok(v) => {
                *out = v;
                ChStatus::ChOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs an experiment config file, writing CSV and JSON into `out_dir`.
/// Returns ChOk when every verdict passes and ChCheckFailed otherwise.
///
/// # Safety
/// Both paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ch_run_experiment(
    config_path: *const c_char,
    out_dir: *const c_char,
) -> ChStatus {
    guarded(|| {
        let config_path = match cstr(config_path) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let out_dir = match cstr(out_dir) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let cfg = match ExperimentConfig::from_file(Path::new(config_path)) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match experiment::run(&cfg, Path::new(out_dir)) {
            Ok(outcome) if outcome.pass => ChStatus::ChOk,
            Ok(_) => {
                set_error("one or more verdicts failed; see the summary JSON".into());
                ChStatus::ChCheckFailed
            }
            Err(e) => fail(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn group_and_domain_roundtrip() {
        unsafe {
            let name = CString::new("heisenberg:1").unwrap();
            let mut g: *mut ChGroup = ptr::null_mut();
            assert_eq!(ch_group_new(name.as_ptr(), &mut g), ChStatus::ChOk);
            assert_eq!(ch_group_dim(g), 3);
            assert_eq!(ch_group_homogeneous_dim(g), 4);

            let dname = CString::new("h1-ball:1").unwrap();
            let mut d: *mut ChDomain = ptr::null_mut();
            assert_eq!(ch_domain_new(g, dname.as_ptr(), &mut d), ChStatus::ChOk);
            let mut inside = 0i32;
            let origin = [0.0f64; 3];
            assert_eq!(ch_domain_contains(d, origin.as_ptr(), 3, &mut inside), ChStatus::ChOk);
            assert_eq!(inside, 1);
            let far = [9.0f64, 0.0, 0.0];
            assert_eq!(ch_domain_contains(d, far.as_ptr(), 3, &mut inside), ChStatus::ChOk);
            assert_eq!(inside, 0);

            ch_domain_free(d);
            ch_group_free(g);
        }
    }

    #[test]
    fn unknown_names_report_invalid_input() {
        unsafe {
            let name = CString::new("no-such-group").unwrap();
            let mut g: *mut ChGroup = ptr::null_mut();
            assert_eq!(ch_group_new(name.as_ptr(), &mut g), ChStatus::ChInvalidInput);
            let mut buf = [0 as c_char; 128];
            let n = ch_last_error(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);
            let msg = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
            assert!(msg.contains("no-such-group"), "{msg}");
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            let mut g: *mut ChGroup = ptr::null_mut();
            assert_eq!(ch_group_new(ptr::null(), &mut g), ChStatus::ChNullPointer);
            let name = CString::new("euclidean:1").unwrap();
            assert_eq!(ch_group_new(name.as_ptr(), ptr::null_mut()), ChStatus::ChNullPointer);
            assert_eq!(ch_group_dim(ptr::null()), 0);
            ch_group_free(ptr::null_mut());
            ch_domain_free(ptr::null_mut());
        }
    }

    #[test]
    fn heat_content_matches_direct_call() {
        unsafe {
            let gname = CString::new("euclidean:1").unwrap();
            let dname = CString::new("interval:0,1").unwrap();
            let mut g: *mut ChGroup = ptr::null_mut();
            let mut d: *mut ChDomain = ptr::null_mut();
            assert_eq!(ch_group_new(gname.as_ptr(), &mut g), ChStatus::ChOk);
            assert_eq!(ch_domain_new(g, dname.as_ptr(), &mut d), ChStatus::ChOk);
            let (mut q, mut se) = (0.0, 0.0);
            assert_eq!(
                ch_heat_content(g, d, 2.0, 1e-3, 20_000, 128, 7, &mut q, &mut se),
                ChStatus::ChOk
            );
            let params = HeatParams { n: 20_000, grid: 128, ..Default::default() };
            let direct = estimate_q(
                &carnot_heat::group::euclidean(1),
                &carnot_heat::domain::interval(0.0, 1.0).unwrap(),
                2.0,
                1e-3,
                &params,
                7,
            )
            .unwrap();
            assert_eq!(q, direct.q_hat);
            assert_eq!(se, direct.stderr);
            // invalid time surfaces as invalid input
            assert_eq!(
                ch_heat_content(g, d, 2.0, -1.0, 100, 16, 7, &mut q, &mut se),
                ChStatus::ChInvalidInput
            );
            ch_domain_free(d);
            ch_group_free(g);
        }
    }

    #[test]
    fn rate_mu_known_values() {
        unsafe {
            let mut v = 0.0;
            assert_eq!(ch_rate_mu(1.0, 1e-2, 0, 0, &mut v), ChStatus::ChOk);
            let exact = 1e-2 * (1e2f64).ln() / std::f64::consts::PI;
            assert!((v - exact).abs() < 1e-15);
            assert_eq!(ch_rate_mu(0.5, 1e-2, 0, 0, &mut v), ChStatus::ChOk);
            assert_eq!(v, 1e-2);
            assert_eq!(ch_rate_mu(2.0, 1e-2, 50_000, 1, &mut v), ChStatus::ChOk);
            // mu = sqrt(t) * kappa_2, kappa_2 = 2/sqrt(pi)
            let kappa = v / 1e-1;
            assert!((kappa - 2.0 / std::f64::consts::PI.sqrt()).abs() < 0.02, "{kappa}");
        }
    }

    #[test]
    fn experiment_run_through_ffi() {
        let dir = std::env::temp_dir().join(format!("ch-ffi-run-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let cfg_path = dir.join("sub.cfg");
        std::fs::write(&cfg_path, "kind = subordinator\nalpha = 1.5\nsamples = 20000\nseed = 3\n")
            .unwrap();
        unsafe {
            let c = CString::new(cfg_path.to_str().unwrap()).unwrap();
            let o = CString::new(dir.to_str().unwrap()).unwrap();
            assert_eq!(ch_run_experiment(c.as_ptr(), o.as_ptr()), ChStatus::ChOk);
            let missing = CString::new(dir.join("missing.cfg").to_str().unwrap()).unwrap();
            assert_ne!(ch_run_experiment(missing.as_ptr(), o.as_ptr()), ChStatus::ChOk);
        }
        assert!(dir.join("subordinator.csv").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
