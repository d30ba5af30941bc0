//! C ABI over `minkowski-graphs`.
//!
//! Surfaces and radial profiles are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`MkgStatus`]; on failure
//! the message is kept per thread and read back with [`mkg_last_error`].
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use minkowski_graphs::analysis::{
    fit_gradient_bound, heinz_check, salavessa_check, stokes_check, unit_ball_constants, CheckOptions,
    CheckReport,
};
use minkowski_graphs::geometry::{
    classify_point, hyperbolic_angle, mean_curvature, tilt, unit_normal, Catalog,
};
use minkowski_graphs::solvers::{solve_radial_cmc, RadialProfile};
use minkowski_graphs::{CausalType, Error, GraphSurface, HeightField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Arity = 4,
    Domain = 5,
    LightLike = 6,
    NotSpaceLike = 7,
    MixedCausalType = 8,
    InvalidParameter = 9,
    HypothesisFailure = 10,
    SolverFailure = 11,
    BufferTooSmall = 12,
    Panic = 13,
    Io = 14,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkgCausalType {
    SpaceLike = 0,
    TimeLike = 1,
    LightLike = 2,
}

/// Numeric part of a check report; metadata stays on the Rust side.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MkgCheckReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub quadrature_error: f64,
    pub passed: bool,
}

/// Opaque graph surface.
pub struct MkgSurface(GraphSurface);

/// Opaque radial profile.
pub struct MkgRadialProfile(RadialProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(MkgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Syntax { .. } | Error::VariableOutOfRange { .. } => MkgStatus::Syntax,
            Error::Arity { .. } => MkgStatus::Arity,
            Error::Domain { .. } => MkgStatus::Domain,
            Error::LightLike { .. } => MkgStatus::LightLike,
            Error::NotSpaceLike { .. } => MkgStatus::NotSpaceLike,
            Error::MixedCausalType { .. } => MkgStatus::MixedCausalType,
            Error::InvalidParameter(_) => MkgStatus::InvalidParameter,
            Error::UnboundedFit(_) | Error::Hypothesis { .. } => MkgStatus::HypothesisFailure,
            Error::CausalBreakdown { .. } | Error::NonConvergence { .. } | Error::Singular(_) => {
                MkgStatus::SolverFailure
            }
            Error::Io(_) => MkgStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(MkgStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> MkgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MkgStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            MkgStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| Failure(MkgStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn surface<'a>(s: *const MkgSurface) -> Result<&'a GraphSurface, Failure> {
    s.as_ref().map(|s| &s.0).ok_or_else(|| null("surface"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn hand_out(out: *mut *mut MkgSurface, s: GraphSurface) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(MkgSurface(s))), "output handle")
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mkg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse `text` as a field in `u1..un`.
///
/// # Safety
/// `text_ptr` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mkg_surface_parse(text_ptr: *const c_char, n: usize, out: *mut *mut MkgSurface) -> MkgStatus {
    guard(|| {
        let s = GraphSurface::parse(text(text_ptr, "expression text")?, n)?;
        hand_out(out, s)
    })
}

/// The hyperboloid of constant mean curvature `h` over `R^n`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mkg_surface_hyperboloid(n: usize, h: f64, out: *mut *mut MkgSurface) -> MkgStatus {
    guard(|| hand_out(out, Catalog::Hyperboloid { n, h }.build()?))
}

/// The hyperplane `a . u + b`; `a` holds `n` slopes.
///
/// # Safety
/// `a` must point to `n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_surface_hyperplane(
    n: usize,
    a: *const f64,
    b: f64,
    out: *mut *mut MkgSurface,
) -> MkgStatus {
    guard(|| {
        let a = slice(a, n, "slopes")?.to_vec();
        hand_out(out, Catalog::Hyperplane { n, a, b }.build()?)
    })
}

/// The translation surface `u_n + h(u1)` for a profile `h` in `u1`.
///
/// # Safety
/// `profile` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_surface_translation(
    n: usize,
    profile: *const c_char,
    out: *mut *mut MkgSurface,
) -> MkgStatus {
    guard(|| {
        let h = text(profile, "profile")?.to_string();
        hand_out(out, Catalog::Translation { n, h }.build()?)
    })
}

/// Release a surface. Null is ignored.
///
/// # Safety
/// `s` must come from one of the `mkg_surface_*` constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mkg_surface_free(s: *mut MkgSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Dimension `n` of the parameter space, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mkg_surface_dim(s: *const MkgSurface) -> usize {
    s.as_ref().map_or(0, |s| s.0.dim())
}

/// Causal type at `point` with light-like band `tau`.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_classify(
    s: *const MkgSurface,
    point: *const f64,
    len: usize,
    tau: f64,
    out: *mut MkgCausalType,
) -> MkgStatus {
    guard(|| {
        let c = classify_point(surface(s)?, slice(point, len, "point")?, tau)?;
        let c = match c {
            CausalType::SpaceLike => MkgCausalType::SpaceLike,
            CausalType::TimeLike => MkgCausalType::TimeLike,
            CausalType::LightLike => MkgCausalType::LightLike,
        };
        write(out, c, "output")
    })
}

type PointQuantity = fn(&GraphSurface, &[f64]) -> minkowski_graphs::Result<f64>;

unsafe fn scalar_at(
    s: *const MkgSurface,
    point: *const f64,
    len: usize,
    out: *mut f64,
    f: PointQuantity,
) -> MkgStatus {
    guard(|| {
        let v = f(surface(s)?, slice(point, len, "point")?)?;
        write(out, v, "output")
    })
}

/// Mean curvature with respect to the upward normal.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_mean_curvature(
    s: *const MkgSurface,
    point: *const f64,
    len: usize,
    out: *mut f64,
) -> MkgStatus {
    scalar_at(s, point, len, out, mean_curvature::<GraphSurface>)
}

/// `|grad psi| / sqrt|1 - |grad psi|^2|`.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_tilt(s: *const MkgSurface, point: *const f64, len: usize, out: *mut f64) -> MkgStatus {
    scalar_at(s, point, len, out, tilt::<GraphSurface>)
}

/// Hyperbolic angle between the normal and the vertical; space-like points only.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_hyperbolic_angle(
    s: *const MkgSurface,
    point: *const f64,
    len: usize,
    out: *mut f64,
) -> MkgStatus {
    scalar_at(s, point, len, out, hyperbolic_angle::<GraphSurface>)
}

/// Unit normal, written as `n + 1` doubles into `out` of capacity `out_len`.
///
/// # Safety
/// `point` must hold `len` doubles; `out` must have room for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mkg_unit_normal(
    s: *const MkgSurface,
    point: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> MkgStatus {
    guard(|| {
        let nu = unit_normal(surface(s)?, slice(point, len, "point")?)?;
        if out.is_null() {
            return Err(null("output"));
        }
        if out_len < nu.len() {
            return Err(Failure(
                MkgStatus::BufferTooSmall,
                format!("normal has {} components, buffer holds {out_len}", nu.len()),
            ));
        }
        ptr::copy_nonoverlapping(nu.as_ptr(), out, nu.len());
        Ok(())
    })
}

/// Volume of the unit `n`-ball and area of the unit `(n-1)`-sphere.
///
/// # Safety
/// `volume` and `area` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_unit_ball_constants(n: usize, volume: *mut f64, area: *mut f64) -> MkgStatus {
    guard(|| {
        let (v, a) = unit_ball_constants(n)?;
        write(volume, v, "volume")?;
        write(area, a, "area")
    })
}

fn flatten(r: CheckReport) -> MkgCheckReport {
    MkgCheckReport {
        lhs: r.lhs,
        rhs: r.rhs,
        residual: r.residual,
        tolerance: r.tolerance,
        quadrature_error: r.quadrature_error,
        passed: r.passed,
    }
}

/// Integral of `nH` over the ball of radius `radius` against the boundary flux,
/// with default quadrature and tolerance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_stokes_check(s: *const MkgSurface, radius: f64, out: *mut MkgCheckReport) -> MkgStatus {
    guard(|| {
        let r = stokes_check(surface(s)?, radius, &CheckOptions::default())?;
        write(out, flatten(r), "report")
    })
}

/// Smallest `M` with `tilt <= M |u|^{2k}` on the sampled ball.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_fit_gradient_bound(s: *const MkgSurface, radius: f64, k: f64, out: *mut f64) -> MkgStatus {
    guard(|| {
        let fit = fit_gradient_bound(surface(s)?, radius, k, &CheckOptions::default())?;
        write(out, fit.m, "output")
    })
}

/// Mean curvature bound `alpha <= M R^{2k-1}` given the gradient bound `(M, k)`.
/// A bound that does not hold on the ball yields `MkgStatus::HypothesisFailure`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_heinz_check(
    s: *const MkgSurface,
    radius: f64,
    m: f64,
    k: f64,
    out: *mut MkgCheckReport,
) -> MkgStatus {
    guard(|| {
        let r = heinz_check(surface(s)?, radius, m, k, &CheckOptions::default())?;
        write(out, flatten(r), "report")
    })
}

/// `min |H|` against the boundary-to-volume ratio on a space-like ball.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_salavessa_check(
    s: *const MkgSurface,
    radius: f64,
    out: *mut MkgCheckReport,
) -> MkgStatus {
    guard(|| {
        let r = salavessa_check(surface(s)?, radius, &CheckOptions::default())?;
        write(out, flatten(r), "report")
    })
}

/// Radial profile of the constant mean curvature graph on `[0, r_max]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkg_solve_radial(
    n: usize,
    h: f64,
    r_max: f64,
    step: f64,
    out: *mut *mut MkgRadialProfile,
) -> MkgStatus {
    guard(|| {
        let p = solve_radial_cmc(n, h, r_max, step)?;
        write(out, Box::into_raw(Box::new(MkgRadialProfile(p))), "output handle")
    })
}

/// Number of grid radii, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mkg_radial_len(p: *const MkgRadialProfile) -> usize {
    p.as_ref().map_or(0, |p| p.0.r_grid.len())
}

/// Copy the columns `r`, `psi` and `psi'` into buffers of capacity `len`.
///
/// # Safety
/// Each buffer must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mkg_radial_columns(
    p: *const MkgRadialProfile,
    r: *mut f64,
    psi: *mut f64,
    psi_prime: *mut f64,
    len: usize,
) -> MkgStatus {
    guard(|| {
        let p = &p.as_ref().ok_or_else(|| null("profile"))?.0;
        let count = p.r_grid.len();
        if len < count {
            return Err(Failure(
                MkgStatus::BufferTooSmall,
                format!("profile has {count} radii, buffers hold {len}"),
            ));
        }
        for (dst, src, what) in [(r, &p.r_grid, "r"), (psi, &p.psi_values, "psi"), (psi_prime, &p.psi_prime_values, "psi_prime")] {
            if dst.is_null() {
                return Err(null(what));
            }
            ptr::copy_nonoverlapping(src.as_ptr(), dst, count);
        }
        Ok(())
    })
}

/// Release a radial profile. Null is ignored.
///
/// # Safety
/// `p` must come from [`mkg_solve_radial`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mkg_radial_free(p: *mut MkgRadialProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
