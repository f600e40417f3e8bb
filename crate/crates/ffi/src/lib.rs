//! C ABI over the chiral-rmt core.
//!
//! Every function returns a [`ChiralStatus`]; results go through out
//! pointers. On failure `chiral_last_error` yields a message for the calling
//! thread. Handles are opaque and must be released with their `_free`
//! function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use chiral_rmt::ensemble::make_coupling;
use chiral_rmt::groupint::{group_integral, GroupIntegralInput};
use chiral_rmt::kernels::{correlation, kernel_g, kernel_k, kernel_w, level_density, CorrelationRequest, KernelSet};
use chiral_rmt::linalg::RngStream;
use chiral_rmt::montecarlo::{mc_density, HistogramSpec};
use chiral_rmt::polynomials::{q, q_tilde};
use chiral_rmt::quadrature::QuadratureSpec;
use chiral_rmt::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiralStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NonConvergence = 4,
    Singularity = 5,
    DegenerateEndpoint = 6,
    DegenerateMass = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Kernel tables for fixed N and μ.
pub struct ChiralKernelSet {
    inner: KernelSet,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> ChiralStatus {
    match e {
        Error::Domain(_) => ChiralStatus::Domain,
        Error::InvalidArgument(_) => ChiralStatus::InvalidArgument,
        Error::NonConvergence(_) => ChiralStatus::NonConvergence,
        Error::Singularity(_) => ChiralStatus::Singularity,
        Error::DegenerateEndpoint(_) => ChiralStatus::DegenerateEndpoint,
        Error::DegenerateMass(_) => ChiralStatus::DegenerateMass,
    }
}

struct Fail(ChiralStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null() -> Fail {
    Fail(ChiralStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ChiralStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChiralStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {m}"));
            ChiralStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn write<T>(p: *mut T, v: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null());
    }
    *p = v;
    Ok(())
}

unsafe fn handle<'a>(h: *const ChiralKernelSet) -> Result<&'a KernelSet, Fail> {
    h.as_ref().map(|h| &h.inner).ok_or_else(null)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chiral_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    V.as_ptr()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `cap`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn chiral_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = e.len().min(cap - 1);
            ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Builds the kernel tables for N × N matrices at coupling `mu` in (0, 1).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn chiral_kernel_set_new(n: usize, mu: f64, out: *mut *mut ChiralKernelSet) -> ChiralStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let inner = KernelSet::new(n, make_coupling(mu)?)?;
        write(out, Box::into_raw(Box::new(ChiralKernelSet { inner })))
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `h` must come from `chiral_kernel_set_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chiral_kernel_set_free(h: *mut ChiralKernelSet) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Level density ρ_N at `len` points.
///
/// # Safety
/// `lambda` and `out` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chiral_level_density(
    h: *const ChiralKernelSet,
    lambda: *const f64,
    len: usize,
    out: *mut f64,
) -> ChiralStatus {
    guard(|| {
        let ks = handle(h)?;
        let x = input(lambda, len)?;
        let y = output(out, len)?;
        for (o, &l) in y.iter_mut().zip(x) {
            *o = level_density(ks, l)?;
        }
        Ok(())
    })
}

/// K_N, G_N and W_N at (λ₁, λ₂). Any of the out pointers may be null.
///
/// # Safety
/// Non-null out pointers must be valid for a double write.
#[no_mangle]
pub unsafe extern "C" fn chiral_kernels(
    h: *const ChiralKernelSet,
    l1: f64,
    l2: f64,
    k: *mut f64,
    g: *mut f64,
    w: *mut f64,
) -> ChiralStatus {
    guard(|| {
        let ks = handle(h)?;
        if !k.is_null() {
            *k = kernel_k(ks, l1, l2);
        }
        if !g.is_null() {
            *g = kernel_g(ks, l1, l2)?;
        }
        if !w.is_null() {
            *w = kernel_w(ks, l1, l2)?;
        }
        Ok(())
    })
}

/// k-point correlation function at `k` points.
///
/// # Safety
/// `points` must be valid for `k` doubles and `out` for one.
#[no_mangle]
pub unsafe extern "C" fn chiral_correlation(
    h: *const ChiralKernelSet,
    points: *const f64,
    k: usize,
    out: *mut f64,
) -> ChiralStatus {
    guard(|| {
        let ks = handle(h)?;
        let p = input(points, k)?.to_vec();
        write(out, correlation(ks, &CorrelationRequest::new(p))?)
    })
}

/// Ascending coefficients in λ² of q_j (`tilde == 0`) or q̃_j. `len`
/// receives the coefficient count; when it exceeds `cap` nothing is copied
/// and `BufferTooSmall` is returned.
///
/// # Safety
/// `coeffs` must be valid for `cap` doubles, `len` for one write.
#[no_mangle]
pub unsafe extern "C" fn chiral_polynomial(
    j: usize,
    mu: f64,
    tilde: i32,
    coeffs: *mut f64,
    cap: usize,
    len: *mut usize,
) -> ChiralStatus {
    guard(|| {
        let c = make_coupling(mu)?;
        if j > 16 {
            return Err(Fail(ChiralStatus::InvalidArgument, format!("degree {j} exceeds 16")));
        }
        let p = if tilde == 0 { q(j, &c) } else { q_tilde(j, &c) };
        write(len, p.coeffs.len())?;
        if p.coeffs.len() > cap {
            return Err(Fail(ChiralStatus::BufferTooSmall, format!("need {} coefficients", p.coeffs.len())));
        }
        output(coeffs, p.coeffs.len())?.copy_from_slice(&p.coeffs);
        Ok(())
    })
}

/// Group integral for A = B = diag(a) at coupling ξ.
///
/// # Safety
/// `a` must be valid for `n` doubles and `out` for one.
#[no_mangle]
pub unsafe extern "C" fn chiral_group_integral(a: *const f64, n: usize, xi: f64, out: *mut f64) -> ChiralStatus {
    guard(|| {
        let a = input(a, n)?.to_vec();
        let spec = QuadratureSpec::new(1e-13, 1e-11, 200)?;
        write(out, group_integral(&GroupIntegralInput { a, xi }, &spec)?)
    })
}

/// Monte Carlo histogram of singular values with `bins` bins on [lo, hi),
/// normalized to one over the range. Deterministic in (`seed`, `n`, `mu`,
/// `samples`) regardless of threading.
///
/// # Safety
/// `density` and `std_error` must each be valid for `bins` doubles.
#[no_mangle]
pub unsafe extern "C" fn chiral_mc_density(
    n: usize,
    mu: f64,
    samples: usize,
    seed: u64,
    bins: usize,
    lo: f64,
    hi: f64,
    density: *mut f64,
    std_error: *mut f64,
) -> ChiralStatus {
    guard(|| {
        let spec = HistogramSpec::new(bins, lo, hi)?;
        let d = output(density, bins)?;
        let s = output(std_error, bins)?;
        let h = mc_density(n, mu, samples, &RngStream::new(seed, 0), &spec)?;
        d.copy_from_slice(&h.density);
        s.copy_from_slice(&h.std_error);
        Ok(())
    })
}
