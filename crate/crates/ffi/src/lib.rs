//! C ABI over `uqbench-core`.
//!
//! Every function returns a [`UqStatus`]; on failure a description is
//! available from [`uq_last_error_message`] on the same thread. Objects are
//! opaque handles created by `*_new`/`*_fit`/`*_from_json` functions and
//! released with the matching `*_free`. Points are row-major arrays on the
//! standard cube `[-1, 1]^n`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uqbench_core::designs::{latin_hypercube, sobol, tensor_grid, Design};
use uqbench_core::gp::{self, GpFitConfig, GpModel, KernelFamily};
use uqbench_core::polychaos::{build_basis, fit_projection, fit_regression, PceModel, TruncationScheme};
use uqbench_core::surrogate::Surrogate;
use uqbench_core::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Unsupported = 4,
    FitFailed = 5,
    Numerical = 6,
    Parse = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Correlation family of a Gaussian process.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqKernel {
    SquaredExponential = 0,
    Matern52 = 1,
}

/// An experimental design.
pub struct UqDesign(Design);

/// A fitted polynomial chaos expansion.
pub struct UqPceModel(PceModel);

/// A fitted Gaussian process emulator.
pub struct UqGpModel(GpModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UqStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => UqStatus::DimensionMismatch,
        Error::UnsupportedDimension { .. }
        | Error::DesignTooLarge { .. }
        | Error::BasisTooLarge { .. }
        | Error::QuadratureOrder(_) => UqStatus::Unsupported,
        Error::UnderDetermined { .. } | Error::WrongDesign(_) | Error::Aliasing { .. } | Error::Fit(_) => {
            UqStatus::FitFailed
        }
        Error::NotPositiveDefinite { .. } | Error::Degenerate(_) => UqStatus::Numerical,
        Error::Json(_) | Error::Malformed { .. } => UqStatus::Parse,
        _ => UqStatus::InvalidArgument,
    }
}

fn fail(status: UqStatus, message: impl Into<String>) -> UqStatus {
    set_error(message.into());
    status
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), UqStatus>) -> UqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UqStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(UqStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, UqStatus>;
}

impl<T> OrStatus<T> for uqbench_core::Result<T> {
    fn or_status(self) -> Result<T, UqStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, UqStatus> {
    // SAFETY: callers pass handles obtained from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| fail(UqStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], UqStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(UqStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees `len` readable values at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], UqStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(UqStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees `len` writable values at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), UqStatus> {
    if out.is_null() {
        return Err(fail(UqStatus::NullPointer, "output handle pointer is null"));
    }
    // SAFETY: checked non-null; the caller owns the slot.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, UqStatus> {
    if p.is_null() {
        return Err(fail(UqStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(UqStatus::Parse, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String, out: *mut *mut c_char) -> Result<(), UqStatus> {
    if out.is_null() {
        return Err(fail(UqStatus::NullPointer, "output string pointer is null"));
    }
    let c = CString::new(s).map_err(|_| fail(UqStatus::InvalidArgument, "string contains NUL"))?;
    // SAFETY: checked non-null.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message describing the most recent failure on this thread, or NULL.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn uq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by a `*_to_json` function.
///
/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn uq_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: created by CString::into_raw in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Sobol design of `m` points in `n` dimensions; seed 0 is unscrambled.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_design_sobol(m: usize, n: usize, seed: u64, out: *mut *mut UqDesign) -> UqStatus {
    guard(|| unsafe { put(out, UqDesign(sobol(m, n, seed).or_status()?)) })
}

/// Latin hypercube of `m` points in `n` dimensions.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_design_lhs(m: usize, n: usize, seed: u64, out: *mut *mut UqDesign) -> UqStatus {
    guard(|| unsafe { put(out, UqDesign(latin_hypercube(m, n, seed).or_status()?)) })
}

/// Tensor Gauss-Legendre grid with `orders[j]` nodes along input `j`.
///
/// # Safety
/// `orders` must hold `n` values; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_design_tensor_grid(orders: *const usize, n: usize, out: *mut *mut UqDesign) -> UqStatus {
    guard(|| unsafe {
        if orders.is_null() {
            return Err(fail(UqStatus::NullPointer, "orders is null"));
        }
        let orders = std::slice::from_raw_parts(orders, n);
        put(out, UqDesign(tensor_grid(orders).or_status()?))
    })
}

/// Design from `m` row-major points of dimension `n`. `weights` may be
/// NULL; otherwise it holds `m` quadrature weights.
///
/// # Safety
/// `points` must hold `m * n` values and `weights` `m` values or be NULL.
#[no_mangle]
pub unsafe extern "C" fn uq_design_from_points(
    points: *const f64,
    m: usize,
    n: usize,
    weights: *const f64,
    out: *mut *mut UqDesign,
) -> UqStatus {
    guard(|| unsafe {
        if n == 0 {
            return Err(fail(UqStatus::InvalidArgument, "dimension must be at least 1"));
        }
        let flat = slice(points, m * n, "points")?;
        let rows = flat.chunks(n).map(<[f64]>::to_vec).collect();
        let w = if weights.is_null() {
            None
        } else {
            Some(slice(weights, m, "weights")?.to_vec())
        };
        put(out, UqDesign(Design::from_rows(rows, w).or_status()?))
    })
}

/// Number of points.
///
/// # Safety
/// `design` must be a live handle; `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uq_design_len(design: *const UqDesign, len: *mut usize) -> UqStatus {
    guard(|| unsafe {
        let d = deref(design, "design")?;
        let len = len.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "len is null"))?;
        *len = d.0.len();
        Ok(())
    })
}

/// Number of inputs.
///
/// # Safety
/// `design` must be a live handle; `dim` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uq_design_dim(design: *const UqDesign, dim: *mut usize) -> UqStatus {
    guard(|| unsafe {
        let d = deref(design, "design")?;
        let dim = dim.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "dim is null"))?;
        *dim = d.0.dim();
        Ok(())
    })
}

/// Copy the row-major points into `buffer`, which holds `capacity` values.
///
/// # Safety
/// `buffer` must hold `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn uq_design_points(design: *const UqDesign, buffer: *mut f64, capacity: usize) -> UqStatus {
    guard(|| unsafe {
        let d = deref(design, "design")?;
        let flat = d.0.as_flat();
        if capacity < flat.len() {
            return Err(fail(
                UqStatus::BufferTooSmall,
                format!("buffer holds {capacity} values, design has {}", flat.len()),
            ));
        }
        out_slice(buffer, flat.len(), "buffer")?.copy_from_slice(flat);
        Ok(())
    })
}

/// Release a design. NULL is ignored.
///
/// # Safety
/// `design` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uq_design_free(design: *mut UqDesign) {
    if !design.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(design) });
    }
}

/// Least-squares chaos of total order `p` on `design` with outputs `y`.
///
/// # Safety
/// `y` must hold `len` values; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_fit_regression(
    design: *const UqDesign,
    y: *const f64,
    len: usize,
    p: u32,
    out: *mut *mut UqPceModel,
) -> UqStatus {
    guard(|| unsafe {
        let d = deref(design, "design")?;
        let y = slice(y, len, "y")?;
        let basis = build_basis(d.0.dim(), TruncationScheme::TotalOrder(p)).or_status()?;
        put(out, UqPceModel(fit_regression(&d.0, y, &basis).or_status()?))
    })
}

/// Spectral projection onto the tensor-product chaos of order `p`.
/// The design must be a weighted tensor grid.
///
/// # Safety
/// `y` must hold `len` values; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_fit_projection(
    design: *const UqDesign,
    y: *const f64,
    len: usize,
    p: u32,
    out: *mut *mut UqPceModel,
) -> UqStatus {
    guard(|| unsafe {
        let d = deref(design, "design")?;
        let y = slice(y, len, "y")?;
        let basis = build_basis(d.0.dim(), TruncationScheme::TensorProduct(p)).or_status()?;
        put(out, UqPceModel(fit_projection(&d.0, y, &basis).or_status()?))
    })
}

/// Prediction at one point of dimension `n`.
///
/// # Safety
/// `z` must hold `n` values; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_predict(model: *const UqPceModel, z: *const f64, n: usize, value: *mut f64) -> UqStatus {
    guard(|| unsafe {
        let m = deref(model, "model")?;
        let z = slice(z, n, "z")?;
        if n != m.0.basis().dim() {
            return Err(fail(
                UqStatus::DimensionMismatch,
                format!("point has {n} coordinates, model has {}", m.0.basis().dim()),
            ));
        }
        *value.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "value is null"))? = m.0.predict(z);
        Ok(())
    })
}

/// Mean and variance of the expansion under uniform inputs.
///
/// # Safety
/// `mean` and `variance` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_moments(model: *const UqPceModel, mean: *mut f64, variance: *mut f64) -> UqStatus {
    guard(|| unsafe {
        let m = deref(model, "model")?;
        let (mu, var) = m.0.analytic_moments();
        *mean.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "mean is null"))? = mu;
        *variance.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "variance is null"))? = var;
        Ok(())
    })
}

/// Number of coefficients, and with a non-NULL `buffer` of at least that
/// capacity, the coefficients themselves.
///
/// # Safety
/// `count` must be valid; `buffer` must hold `capacity` values or be NULL.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_coefficients(
    model: *const UqPceModel,
    buffer: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> UqStatus {
    guard(|| unsafe {
        let m = deref(model, "model")?;
        let c = m.0.coefficients();
        *count.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "count is null"))? = c.len();
        if buffer.is_null() {
            return Ok(());
        }
        if capacity < c.len() {
            return Err(fail(UqStatus::BufferTooSmall, format!("need {} values", c.len())));
        }
        out_slice(buffer, c.len(), "buffer")?.copy_from_slice(c);
        Ok(())
    })
}

/// Serialise to JSON; free the result with `uq_string_free`.
///
/// # Safety
/// `json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_to_json(model: *const UqPceModel, json: *mut *mut c_char) -> UqStatus {
    guard(|| unsafe {
        let m = deref(model, "model")?;
        let text = Surrogate::Pce(m.0.clone()).to_json().or_status()?;
        to_c_string(text, json)
    })
}

/// Load a model written by `uq_pce_to_json` or the `uqbench fit` command.
///
/// # Safety
/// `json` must be NUL-terminated; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_from_json(json: *const c_char, out: *mut *mut UqPceModel) -> UqStatus {
    guard(|| unsafe {
        match Surrogate::from_json(c_str(json, "json")?).or_status()? {
            Surrogate::Pce(m) => put(out, UqPceModel(m)),
            Surrogate::Gp(_) => Err(fail(UqStatus::InvalidArgument, "model is a Gaussian process")),
        }
    })
}

/// Release a chaos model. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uq_pce_free(model: *mut UqPceModel) {
    if !model.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Fit a Gaussian process with a stepwise-selected mean and maximum
/// likelihood correlation lengths.
///
/// # Safety
/// `y` must hold `len` values; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_gp_fit(
    design: *const UqDesign,
    y: *const f64,
    len: usize,
    kernel: UqKernel,
    seed: u64,
    out: *mut *mut UqGpModel,
) -> UqStatus {
    guard(|| unsafe {
        let d = deref(design, "design")?;
        let y = slice(y, len, "y")?;
        let family = match kernel {
            UqKernel::SquaredExponential => KernelFamily::SquaredExponential,
            UqKernel::Matern52 => KernelFamily::Matern52,
        };
        let basis = gp::stepwise_mean_basis(&d.0, y, 2).or_status()?;
        let config = GpFitConfig {
            seed,
            ..Default::default()
        };
        put(out, UqGpModel(gp::fit(&d.0, y, family, &basis, &config).or_status()?))
    })
}

/// Posterior mean and variance at one point of dimension `n`.
///
/// # Safety
/// `z` must hold `n` values; `mean` and `variance` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uq_gp_predict(
    model: *const UqGpModel,
    z: *const f64,
    n: usize,
    mean: *mut f64,
    variance: *mut f64,
) -> UqStatus {
    guard(|| unsafe {
        let m = deref(model, "model")?;
        let z = slice(z, n, "z")?;
        if n != m.0.design().dim() {
            return Err(fail(
                UqStatus::DimensionMismatch,
                format!("point has {n} coordinates, model has {}", m.0.design().dim()),
            ));
        }
        let p = m.0.predict(z);
        *mean.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "mean is null"))? = p.mean;
        *variance.as_mut().ok_or_else(|| fail(UqStatus::NullPointer, "variance is null"))? = p.variance;
        Ok(())
    })
}

/// Fitted correlation lengths, one per input.
///
/// # Safety
/// `buffer` must hold `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn uq_gp_lengths(model: *const UqGpModel, buffer: *mut f64, capacity: usize) -> UqStatus {
    guard(|| unsafe {
        let m = deref(model, "model")?;
        let l = m.0.kernel().lengths();
        if capacity < l.len() {
            return Err(fail(UqStatus::BufferTooSmall, format!("need {} values", l.len())));
        }
        out_slice(buffer, l.len(), "buffer")?.copy_from_slice(l);
        Ok(())
    })
}

/// Serialise to JSON; free the result with `uq_string_free`.
///
/// # Safety
/// `json` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn uq_gp_to_json(model: *const UqGpModel, json: *mut *mut c_char) -> UqStatus {
    guard(|| unsafe {
        let m = deref(model, "model")?;
        let text = serde_json::to_string_pretty(&gp::GpModelFile::from(&m.0))
            .map_err(|e| fail(UqStatus::Parse, e.to_string()))?;
        to_c_string(text, json)
    })
}

/// Load a model written by `uq_gp_to_json` or the `uqbench fit` command.
///
/// # Safety
/// `json` must be NUL-terminated; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn uq_gp_from_json(json: *const c_char, out: *mut *mut UqGpModel) -> UqStatus {
    guard(|| unsafe {
        match Surrogate::from_json(c_str(json, "json")?).or_status()? {
            Surrogate::Gp(m) => put(out, UqGpModel(*m)),
            Surrogate::Pce(_) => Err(fail(UqStatus::InvalidArgument, "model is a polynomial chaos expansion")),
        }
    })
}

/// Release a Gaussian process. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn uq_gp_free(model: *mut UqGpModel) {
    if !model.is_null() {
        // SAFETY: created by Box::into_raw in this library.
        drop(unsafe { Box::from_raw(model) });
    }
}
