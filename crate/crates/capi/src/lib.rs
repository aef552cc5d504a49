//! C ABI surface: opaque handles over the grid/field/solver stack,
//! status codes for every failure path, and a thread-local message slot
//! for the last error. No panic may cross this boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use nonrel_lab::field::{random_smooth, ComplexField};
use nonrel_lab::grid::SpectralGrid;
use nonrel_lab::nlkg::nlkg_evolve;
use nonrel_lab::normalized::normalized_evolve;
use nonrel_lab::norms::sobolev_hk;
use nonrel_lab::params::SimParams;
use nonrel_lab::strichartz::{admissible_check, ExponentKind};
use nonrel_lab::transform::canonical_transform;
use nonrel_lab::LabError;

/// Result of every fallible call. Non-zero means the out parameters are
/// untouched; nrl_last_error_message describes the failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NrlStatus {
    NrlOk = 0,
    NrlInvalid = 1,
    NrlConfig = 2,
    NrlSolver = 3,
    NrlIo = 4,
    NrlNullPointer = 5,
    NrlPanic = 6,
}

pub struct NrlGrid {
    inner: Arc<SpectralGrid>,
}

pub struct NrlField {
    inner: ComplexField,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &LabError) -> NrlStatus {
    match e {
        LabError::Invalid(_) => NrlStatus::NrlInvalid,
        LabError::Config(_) => NrlStatus::NrlConfig,
        LabError::Solver(_) => NrlStatus::NrlSolver,
        LabError::Io(_) => NrlStatus::NrlIo,
    }
}

/// Shields the boundary: panics become NrlPanic with the message saved.
fn guard(f: impl FnOnce() -> NrlStatus) -> NrlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(&msg);
            NrlStatus::NrlPanic
        }
    }
}

fn fail(e: LabError) -> NrlStatus {
    set_error(&e.to_string());
    status_of(&e)
}

macro_rules! need {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error("null pointer argument");
                return NrlStatus::NrlNullPointer;
            }
        }
    };
}

macro_rules! need_mut {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_error("null pointer argument");
                return NrlStatus::NrlNullPointer;
            }
        }
    };
}

/// Copies the last error message into buf (truncated, always
/// nul-terminated when cap > 0) and returns the full message length in
/// bytes, excluding the terminator.
#[no_mangle]
pub extern "C" fn nrl_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Static library version string; never freed by the caller.
#[no_mangle]
pub extern "C" fn nrl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Periodic grid: d axes, n points per axis (power of two), side length
/// box_len. On success *out owns the handle; release with nrl_grid_free.
#[no_mangle]
pub extern "C" fn nrl_grid_new(d: u32, n: u32, box_len: f64, out: *mut *mut NrlGrid) -> NrlStatus {
    guard(|| {
        let out = need_mut!(out);
        match SpectralGrid::new(d as usize, n as usize, box_len) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(NrlGrid { inner: g }));
                NrlStatus::NrlOk
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub extern "C" fn nrl_grid_free(grid: *mut NrlGrid) {
    if !grid.is_null() {
        drop(unsafe { Box::from_raw(grid) });
    }
}

/// Total number of grid points (n^d).
#[no_mangle]
pub extern "C" fn nrl_grid_total(grid: *const NrlGrid, out: *mut usize) -> NrlStatus {
    guard(|| {
        let grid = need!(grid);
        let out = need_mut!(out);
        *out = grid.inner.total();
        NrlStatus::NrlOk
    })
}

/// Deterministic smooth random field with unit L2 norm; spectral
/// amplitude falls off like exp(-decay |xi|).
#[no_mangle]
pub extern "C" fn nrl_field_random(
    grid: *const NrlGrid,
    seed: u64,
    decay: f64,
    out: *mut *mut NrlField,
) -> NrlStatus {
    guard(|| {
        let grid = need!(grid);
        let out = need_mut!(out);
        let f = random_smooth(&grid.inner, seed, decay);
        *out = Box::into_raw(Box::new(NrlField { inner: f }));
        NrlStatus::NrlOk
    })
}

#[no_mangle]
pub extern "C" fn nrl_field_free(field: *mut NrlField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Multiplies the field by the complex scalar re + i im.
#[no_mangle]
pub extern "C" fn nrl_field_scale(field: *mut NrlField, re: f64, im: f64) -> NrlStatus {
    guard(|| {
        let field = need_mut!(field);
        field.inner.scale(num_complex::Complex64::new(re, im));
        NrlStatus::NrlOk
    })
}

#[no_mangle]
pub extern "C" fn nrl_field_norm_l2(field: *const NrlField, out: *mut f64) -> NrlStatus {
    guard(|| {
        let field = need!(field);
        let out = need_mut!(out);
        *out = field.inner.norm_l2();
        NrlStatus::NrlOk
    })
}

/// Sobolev H^k norm with weight (1 + |xi|^2)^k.
#[no_mangle]
pub extern "C" fn nrl_field_sobolev(field: *const NrlField, k: f64, out: *mut f64) -> NrlStatus {
    guard(|| {
        let field = need!(field);
        let out = need_mut!(out);
        *out = sobolev_hk(&field.inner, k);
        NrlStatus::NrlOk
    })
}

/// H^k norm of the difference of two fields on the same grid.
#[no_mangle]
pub extern "C" fn nrl_field_error(
    a: *const NrlField,
    b: *const NrlField,
    k: f64,
    out: *mut f64,
) -> NrlStatus {
    guard(|| {
        let a = need!(a);
        let b = need!(b);
        let out = need_mut!(out);
        if !a.inner.grid().same_layout(b.inner.grid()) {
            return fail(LabError::invalid("fields live on different grids"));
        }
        let mut diff = a.inner.spectral_clone();
        diff.axpy(num_complex::Complex64::new(-1.0, 0.0), &b.inner.spectral_clone());
        *out = sobolev_hk(&diff, k);
        NrlStatus::NrlOk
    })
}

/// Copies the physical-space values into caller arrays of length len
/// (which must equal nrl_grid_total).
#[no_mangle]
pub extern "C" fn nrl_field_values(
    field: *const NrlField,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> NrlStatus {
    guard(|| {
        let field = need!(field);
        if out_re.is_null() || out_im.is_null() {
            set_error("null pointer argument");
            return NrlStatus::NrlNullPointer;
        }
        let phys = field.inner.physical_clone();
        let data = phys.data();
        if data.len() != len {
            return fail(LabError::invalid(format!(
                "length mismatch: field has {} points, caller passed {len}",
                data.len()
            )));
        }
        for (i, v) in data.iter().enumerate() {
            unsafe {
                *out_re.add(i) = v.re;
                *out_im.add(i) = v.im;
            }
        }
        NrlStatus::NrlOk
    })
}

fn evolve_impl(
    which: u32,
    field: *const NrlField,
    c: f64,
    lambda: f64,
    l: u32,
    r: u32,
    dt: f64,
    t_end: f64,
    out_field: *mut *mut NrlField,
    out_drift: *mut f64,
) -> NrlStatus {
    let field = need!(field);
    let out_field = need_mut!(out_field);
    let params = SimParams::new(c, lambda, l, r as usize, field.inner.grid().clone())
        .with_time(dt, t_end);
    let stride = params.n_steps().max(1) as usize;
    let run = if which == 0 {
        nlkg_evolve(&field.inner, &params, stride, None)
    } else {
        normalized_evolve(&field.inner, &params, stride, None)
    };
    match run {
        Ok(traj) => {
            if let Some(d) = unsafe { out_drift.as_mut() } {
                *d = traj.energy_drift();
            }
            *out_field = Box::into_raw(Box::new(NrlField {
                inner: traj.final_field().clone(),
            }));
            NrlStatus::NrlOk
        }
        Err(e) => fail(e),
    }
}

/// Integrates the relativistic flow from the given state over [0, t_end]
/// with step dt; *out_field receives the final state and out_drift (may
/// be null) the relative energy drift.
#[no_mangle]
pub extern "C" fn nrl_evolve_wave(
    field: *const NrlField,
    c: f64,
    lambda: f64,
    l: u32,
    r: u32,
    dt: f64,
    t_end: f64,
    out_field: *mut *mut NrlField,
    out_drift: *mut f64,
) -> NrlStatus {
    guard(|| evolve_impl(0, field, c, lambda, l, r, dt, t_end, out_field, out_drift))
}

/// Same contract for the order-r slow flow.
#[no_mangle]
pub extern "C" fn nrl_evolve_slow(
    field: *const NrlField,
    c: f64,
    lambda: f64,
    l: u32,
    r: u32,
    dt: f64,
    t_end: f64,
    out_field: *mut *mut NrlField,
    out_drift: *mut f64,
) -> NrlStatus {
    guard(|| evolve_impl(1, field, c, lambda, l, r, dt, t_end, out_field, out_drift))
}

/// Applies the near-identity change of variables (direction +1) or its
/// inverse (-1).
#[no_mangle]
pub extern "C" fn nrl_transform(
    field: *const NrlField,
    c: f64,
    lambda: f64,
    l: u32,
    direction: i32,
    out_field: *mut *mut NrlField,
) -> NrlStatus {
    guard(|| {
        let field = need!(field);
        let out_field = need_mut!(out_field);
        match canonical_transform(&field.inner, c, lambda, l, direction) {
            Ok(g) => {
                *out_field = Box::into_raw(Box::new(NrlField { inner: g }));
                NrlStatus::NrlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact combined quintic coefficient for degree parameter l, as a
/// reduced fraction.
#[no_mangle]
pub extern "C" fn nrl_derive_combined(l: u32, out_num: *mut i64, out_den: *mut i64) -> NrlStatus {
    guard(|| {
        let out_num = need_mut!(out_num);
        let out_den = need_mut!(out_den);
        if !(2..=8).contains(&l) {
            return fail(LabError::invalid(format!(
                "degree parameter l must lie in 2..=8, got {l}"
            )));
        }
        let v = nonrel_lab::derive::combined_quintic(l);
        let (n, d) = (v.numer(), v.denom());
        match (i64::try_from(n.clone()), i64::try_from(d.clone())) {
            (Ok(n), Ok(d)) => {
                *out_num = n;
                *out_den = d;
                NrlStatus::NrlOk
            }
            _ => fail(LabError::invalid("coefficient exceeds 64-bit range")),
        }
    })
}

/// Membership test for an exponent pair: kind 0 = free scaling line,
/// 1 = order-r scaling line, 2 = order-r quadrilateral. Writes 1 or 0
/// to *out_admissible; the reason lands in the last-error slot either
/// way (query it with nrl_last_error_message).
#[no_mangle]
pub extern "C" fn nrl_admissible(
    kind: u32,
    p: f64,
    q: f64,
    d: u32,
    r: u32,
    out_admissible: *mut i32,
) -> NrlStatus {
    guard(|| {
        let out = need_mut!(out_admissible);
        let kind = match kind {
            0 => ExponentKind::Schrodinger,
            1 => ExponentKind::OrderR,
            2 => ExponentKind::Quadrilateral,
            other => {
                return fail(LabError::invalid(format!(
                    "kind must be 0, 1 or 2, got {other}"
                )))
            }
        };
        match admissible_check(p, q, d as usize, r as usize, kind) {
            Ok(a) => {
                *out = a.admissible as i32;
                set_error(&a.reason);
                NrlStatus::NrlOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Parses a flat key=value config text and reports validity; a cheap
/// syntax gate for embedders shipping config files. text must be a
/// nul-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn nrl_config_check(text: *const c_char) -> NrlStatus {
    guard(|| {
        if text.is_null() {
            set_error("null pointer argument");
            return NrlStatus::NrlNullPointer;
        }
        let s = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(s) => s,
            Err(_) => return fail(LabError::config("config text is not valid UTF-8")),
        };
        match nonrel_lab::config::parse_config_str(s) {
            Ok(_) => NrlStatus::NrlOk,
            Err(e) => fail(e),
        }
    })
}
