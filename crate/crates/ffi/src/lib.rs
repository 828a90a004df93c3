//! C ABI over `kp_core`.
//!
//! Grids and fields are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`KpStatus`]; on failure the
//! message is available from [`kp_last_error_message`] on the same thread.
//! Physical samples use the `[ix * ny + iy]` layout and coefficient arrays
//! interleave `(re, im)` in FFT order.
//!
//! # Safety
//!
//! Handle arguments must be null or a live handle returned by this library.
//! Buffers must be valid for `len` elements and paths NUL-terminated. Output
//! pointers may be null, which yields `KP_STATUS_NULL_POINTER`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kp_core::evolution::{conserved_diagnostics, evolve, linear_propagate, SolverConfig};
use kp_core::norms::{besov_norm, energy_space_norm, weighted_besov_norm};
use kp_core::presets::InitialData;
use kp_core::symbol::dispersion_symbol;
use kp_core::{kpf2, DispersionParams, Field2D, Grid2D, KpError};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGrid = 2,
    InvalidParameter = 3,
    Domain = 4,
    GridMismatch = 5,
    BlowUp = 6,
    DataTooLarge = 7,
    TooCoarse = 8,
    Format = 9,
    Io = 10,
    Other = 11,
    Panic = 12,
}

/// Periodic box and its wavenumber tables.
pub struct KpGrid(Grid2D);

/// Fourier coefficients of a field on a grid.
pub struct KpField(Field2D);

/// `ω = ξ³ − γ μ²/ξ`, nonlinearity `β u u_x`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct KpParams {
    pub gamma: f64,
    pub beta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KpDiagnostics {
    pub l2: f64,
    pub hamiltonian: f64,
    pub energy_norm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &KpError) -> KpStatus {
    match e {
        KpError::InvalidGrid(_) => KpStatus::InvalidGrid,
        KpError::InvalidParameter(_) | KpError::Config { .. } | KpError::Incompatible(_) => {
            KpStatus::InvalidParameter
        }
        KpError::Domain(_) => KpStatus::Domain,
        KpError::GridMismatch(_) => KpStatus::GridMismatch,
        KpError::BlowUp { .. } => KpStatus::BlowUp,
        KpError::DataTooLarge { .. } => KpStatus::DataTooLarge,
        KpError::TooCoarse(_) => KpStatus::TooCoarse,
        KpError::Format(_) => KpStatus::Format,
        KpError::Io(_) => KpStatus::Io,
        KpError::UnknownSchema(_) => KpStatus::Other,
    }
}

enum Fail {
    Null(&'static str),
    Kp(KpError),
}

impl From<KpError> for Fail {
    fn from(e: KpError) -> Self {
        Fail::Kp(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            KpStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            KpStatus::NullPointer
        }
        Ok(Err(Fail::Kp(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            KpStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn params(p: KpParams) -> Result<DispersionParams, Fail> {
    Ok(DispersionParams::new(p.gamma, p.beta)?)
}

fn check_len(got: usize, want: usize, what: &str) -> Result<(), Fail> {
    if got != want {
        return Err(Fail::Kp(KpError::GridMismatch(format!(
            "{what}: expected length {want}, got {got}"
        ))));
    }
    Ok(())
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Kp(KpError::InvalidParameter("path is not UTF-8".into())))
}

unsafe fn emit_field(out: *mut *mut KpField, f: Field2D) -> Result<(), Fail> {
    write(out, Box::into_raw(Box::new(KpField(f))), "out")
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
#[no_mangle]
pub unsafe extern "C" fn kp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

#[no_mangle]
pub extern "C" fn kp_params_kp1() -> KpParams {
    let p = DispersionParams::kp1();
    KpParams { gamma: p.gamma, beta: p.beta }
}

#[no_mangle]
pub extern "C" fn kp_params_kp2() -> KpParams {
    let p = DispersionParams::kp2();
    KpParams { gamma: p.gamma, beta: p.beta }
}

#[no_mangle]
pub unsafe extern "C" fn kp_dispersion_symbol(xi: f64, mu: f64, p: KpParams, out: *mut f64) -> KpStatus {
    guard(|| {
        let v = dispersion_symbol(xi, mu, &params(p)?)?;
        write(out, v, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_grid_new(lx: f64, ly: f64, nx: usize, ny: usize, out: *mut *mut KpGrid) -> KpStatus {
    guard(|| {
        let g = Grid2D::new(lx, ly, nx, ny)?;
        write(out, Box::into_raw(Box::new(KpGrid(g))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_grid_free(grid: *mut KpGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

#[no_mangle]
pub unsafe extern "C" fn kp_grid_shape(grid: *const KpGrid, nx: *mut usize, ny: *mut usize) -> KpStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        write(nx, g.nx(), "nx")?;
        write(ny, g.ny(), "ny")
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_field_from_real(
    grid: *const KpGrid,
    samples: *const f64,
    len: usize,
    out: *mut *mut KpField,
) -> KpStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let s = slice(samples, len, "samples")?;
        emit_field(out, Field2D::from_real(g, s)?)
    })
}

/// `coeffs` holds `2 * nx * ny` doubles.
#[no_mangle]
pub unsafe extern "C" fn kp_field_from_coeffs(
    grid: *const KpGrid,
    coeffs: *const f64,
    len: usize,
    out: *mut *mut KpField,
) -> KpStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let s = slice(coeffs, len, "coeffs")?;
        check_len(len, 2 * g.len(), "coeffs")?;
        let c = s.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        emit_field(out, Field2D::from_coeffs(g, c)?)
    })
}

/// `A · ∂x exp(−x²/σx² − y²/σy²)` up to the factor `σx²/2`.
#[no_mangle]
pub unsafe extern "C" fn kp_field_gaussian(
    grid: *const KpGrid,
    amplitude: f64,
    sigma_x: f64,
    sigma_y: f64,
    out: *mut *mut KpField,
) -> KpStatus {
    guard(|| {
        let g = &deref(grid, "grid")?.0;
        let f = InitialData::Gaussian {
            amplitude,
            sigma_x,
            sigma_y,
        }
        .build(g)?;
        emit_field(out, f)
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_field_clone(field: *const KpField, out: *mut *mut KpField) -> KpStatus {
    guard(|| emit_field(out, deref(field, "field")?.0.clone()))
}

#[no_mangle]
pub unsafe extern "C" fn kp_field_free(field: *mut KpField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Number of grid points; physical buffers have this length, coefficient
/// buffers twice it.
#[no_mangle]
pub unsafe extern "C" fn kp_field_len(field: *const KpField, out: *mut usize) -> KpStatus {
    guard(|| write(out, deref(field, "field")?.0.grid().len(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn kp_field_to_real(field: *const KpField, buf: *mut f64, len: usize) -> KpStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        check_len(len, f.grid().len(), "buffer")?;
        slice_mut(buf, len, "buf")?.copy_from_slice(&f.to_real());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_field_coeffs(field: *const KpField, buf: *mut f64, len: usize) -> KpStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        check_len(len, 2 * f.grid().len(), "buffer")?;
        let out = slice_mut(buf, len, "buf")?;
        for (o, c) in out.chunks_exact_mut(2).zip(f.coeffs()) {
            o[0] = c.re;
            o[1] = c.im;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_field_save(field: *const KpField, path_utf8: *const c_char) -> KpStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        kpf2::save(f, path(path_utf8)?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_field_load(path_utf8: *const c_char, out: *mut *mut KpField) -> KpStatus {
    guard(|| emit_field(out, kpf2::load(path(path_utf8)?)?))
}

#[no_mangle]
pub unsafe extern "C" fn kp_l2_norm(field: *const KpField, out: *mut f64) -> KpStatus {
    guard(|| write(out, deref(field, "field")?.0.l2_norm(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn kp_besov_norm(field: *const KpField, s: f64, out: *mut f64) -> KpStatus {
    guard(|| write(out, besov_norm(&deref(field, "field")?.0, s).total, "out"))
}

#[no_mangle]
pub unsafe extern "C" fn kp_weighted_besov_norm(field: *const KpField, r: f64, out: *mut f64) -> KpStatus {
    guard(|| write(out, weighted_besov_norm(&deref(field, "field")?.0, r).total, "out"))
}

/// Energy part `‖u‖ + ‖∂x u‖ + ‖∂x⁻¹∂y u‖` and weight part `‖y u‖`.
#[no_mangle]
pub unsafe extern "C" fn kp_energy_space_norm(field: *const KpField, energy: *mut f64, weight: *mut f64) -> KpStatus {
    guard(|| {
        let (e, p) = energy_space_norm(&deref(field, "field")?.0);
        write(energy, e, "energy")?;
        write(weight, p, "weight")
    })
}

#[no_mangle]
pub unsafe extern "C" fn kp_diagnostics(field: *const KpField, p: KpParams, out: *mut KpDiagnostics) -> KpStatus {
    guard(|| {
        let d = conserved_diagnostics(&deref(field, "field")?.0, &params(p)?);
        write(
            out,
            KpDiagnostics {
                l2: d.l2,
                hamiltonian: d.hamiltonian,
                energy_norm: d.energy_norm,
            },
            "out",
        )
    })
}

/// Free evolution `S(t)`.
#[no_mangle]
pub unsafe extern "C" fn kp_linear_propagate(
    field: *const KpField,
    t: f64,
    p: KpParams,
    out: *mut *mut KpField,
) -> KpStatus {
    guard(|| {
        let p = params(p)?;
        emit_field(out, linear_propagate(&deref(field, "field")?.0, t, &p))
    })
}

/// Nonlinear evolution to `t_final` with integrating-factor RK4 and 2/3 dealiasing.
#[no_mangle]
pub unsafe extern "C" fn kp_evolve(
    field: *const KpField,
    dt: f64,
    t_final: f64,
    p: KpParams,
    out: *mut *mut KpField,
) -> KpStatus {
    guard(|| {
        let p = params(p)?;
        let tr = evolve(&deref(field, "field")?.0, &SolverConfig::rk4(dt, t_final), &p, usize::MAX)?;
        emit_field(out, tr.final_field)
    })
}
