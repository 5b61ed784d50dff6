//! C ABI over `metivier-core`.
//!
//! Objects cross the boundary as opaque handles created by `mtv_*_new`-style
//! constructors and released with the matching `*_free`. Every fallible call
//! returns an `MtvStatus`; on failure `mtv_last_error()` describes the cause
//! until the next failing call on the same thread. Complex arrays are
//! interleaved `(re, im)` pairs of doubles.

use metivier_core::fields::io::{read_field, write_field, Encoding};
use metivier_core::fields::{try_sample, GridSpec, PolarGrid, SampledField};
use metivier_core::group_algebra::{symplectic_spectrum, MetivierStructure};
use metivier_core::injectivity::{
    one_radius_counterexample, reconstruct_from_means, two_radii_check, MeanData, RadialMeasure, RadiiBounds,
};
use metivier_core::quadrature::build_sphere_rule;
use metivier_core::special::theta_k;
use metivier_core::twisted::lambda_twisted_mean;
use metivier_core::{Error, C64};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes. `Ok` is zero; the rest name the failing condition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotSkewSymmetric = 4,
    DependentStructureMatrices = 5,
    SingularPencil = 6,
    NonConvergence = 7,
    RangeExceeded = 8,
    OutOfDomain = 9,
    UnsupportedDimension = 10,
    NonFiniteValue = 11,
    GridMismatch = 12,
    MalformedFile = 13,
    VersionMismatch = 14,
    TruncationDominates = 15,
    NyquistViolation = 16,
    NotHomogeneous = 17,
    GridTooCoarse = 18,
    NoUsableRadius = 19,
    InadmissibleRadii = 20,
    Io = 21,
    Json = 22,
    BufferTooSmall = 23,
    Panic = 99,
}

fn status_of(e: &Error) -> MtvStatus {
    use MtvStatus as S;
    match e {
        Error::DimensionMismatch(_) => S::DimensionMismatch,
        Error::NotSkewSymmetric { .. } => S::NotSkewSymmetric,
        Error::DependentStructureMatrices { .. } => S::DependentStructureMatrices,
        Error::SingularPencil { .. } => S::SingularPencil,
        Error::NonConvergence(_) => S::NonConvergence,
        Error::RangeExceeded { .. } => S::RangeExceeded,
        Error::OutOfDomain { .. } => S::OutOfDomain,
        Error::UnsupportedDimension(_) => S::UnsupportedDimension,
        Error::NonFiniteValue { .. } => S::NonFiniteValue,
        Error::GridMismatch => S::GridMismatch,
        Error::MalformedFile { .. } => S::MalformedFile,
        Error::VersionMismatch { .. } => S::VersionMismatch,
        Error::TruncationDominates { .. } => S::TruncationDominates,
        Error::NyquistViolation { .. } => S::NyquistViolation,
        Error::NotHomogeneous { .. } => S::NotHomogeneous,
        Error::GridTooCoarse { .. } => S::GridTooCoarse,
        Error::NoUsableRadius => S::NoUsableRadius,
        Error::InadmissibleRadii { .. } => S::InadmissibleRadii,
        Error::InvalidArgument(_) => S::InvalidArgument,
        Error::Io(_) => S::Io,
        Error::Json(_) => S::Json,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Core(Error),
    Status(MtvStatus, &'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard(body: impl FnOnce() -> FfiResult<()>) -> MtvStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MtvStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg.to_string());
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            MtvStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure::Status(MtvStatus::NullPointer, "null pointer argument")
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(MtvStatus::InvalidArgument, "string is not UTF-8"))
}

unsafe fn out<T>(p: *mut T, v: T) -> FfiResult<()> {
    if p.is_null() {
        return Err(null());
    }
    p.write(v);
    Ok(())
}

unsafe fn field_ref<'a>(p: *const MtvField) -> FfiResult<&'a SampledField> {
    p.as_ref().map(|f| &f.0).ok_or_else(null)
}

/// Opaque Métivier structure.
pub struct MtvStructure(MetivierStructure);

/// Opaque sampled field on a polar grid.
pub struct MtvField(SampledField);

/// Polar grid description: `n` coordinates (1 or 2), each with `radial[j]`
/// Gauss–Legendre radii on `[0, r_max]` and `angular[j]` angles.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MtvGrid {
    pub n: usize,
    pub r_max: f64,
    pub radial: [usize; 2],
    pub angular: [usize; 2],
}

fn grid_of(g: &MtvGrid) -> FfiResult<PolarGrid> {
    if g.n == 0 || g.n > 2 {
        return Err(Error::UnsupportedDimension(g.n).into());
    }
    Ok(PolarGrid::from_spec(&GridSpec {
        r_max: g.r_max,
        radial: g.radial[..g.n].to_vec(),
        angular: g.angular[..g.n].to_vec(),
    })?)
}

/// Message of the last failure on this thread; valid until the next failure.
#[no_mangle]
pub extern "C" fn mtv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Looks up a built-in structure (`heisenberg:<n>`, `quaternionic`,
/// `product-counterexample`, `anisotropic`) or reads a structure JSON file.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mtv_structure_new(name: *const c_char, out_structure: *mut *mut MtvStructure) -> MtvStatus {
    guard(|| {
        let s = MetivierStructure::from_ref(text(name)?)?;
        out(out_structure, Box::into_raw(Box::new(MtvStructure(s))))
    })
}

/// # Safety
/// `s` must come from `mtv_structure_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn mtv_structure_free(s: *mut MtvStructure) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Writes `n` and `m` of a structure.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mtv_structure_dims(s: *const MtvStructure, out_n: *mut usize, out_m: *mut usize) -> MtvStatus {
    guard(|| {
        let s = &s.as_ref().ok_or_else(null)?.0;
        out(out_n, s.n)?;
        out(out_m, s.m)
    })
}

/// Symplectic spectrum at `lambda` (length `m`): writes `μ` (length `n`) and
/// `A_λ` row-major (`2n × 2n`).
///
/// # Safety
/// `mu` must hold `n` doubles and `a` must hold `4n²` doubles.
#[no_mangle]
pub unsafe extern "C" fn mtv_symplectic_spectrum(
    s: *const MtvStructure,
    lambda: *const f64,
    m: usize,
    mu: *mut f64,
    a: *mut f64,
) -> MtvStatus {
    guard(|| {
        let s = &s.as_ref().ok_or_else(null)?.0;
        let spec = symplectic_spectrum(s, slice(lambda, m)?)?;
        if mu.is_null() || a.is_null() {
            return Err(null());
        }
        let dim = 2 * s.n;
        std::slice::from_raw_parts_mut(mu, s.n).copy_from_slice(&spec.mu);
        let a_out = std::slice::from_raw_parts_mut(a, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                a_out[i * dim + j] = spec.a_mat[(i, j)];
            }
        }
        Ok(())
    })
}

/// `θ_{k,λ'}(z)` with `z` given as `n` interleaved complex numbers.
///
/// # Safety
/// `lambda_prime` and `z` must hold `n` and `2n` doubles.
#[no_mangle]
pub unsafe extern "C" fn mtv_theta(k: usize, lambda_prime: *const f64, n: usize, z: *const f64, out_value: *mut f64) -> MtvStatus {
    guard(|| {
        let zs: Vec<C64> = slice(z, 2 * n)?.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        out(out_value, theta_k(k, slice(lambda_prime, n)?, &zs)?)
    })
}

/// Creates a field from `len` interleaved complex samples in grid order.
///
/// # Safety
/// `values` must hold `2 * len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mtv_field_from_values(
    grid: *const MtvGrid,
    values: *const f64,
    len: usize,
    out_field: *mut *mut MtvField,
) -> MtvStatus {
    guard(|| {
        let g = grid_of(grid.as_ref().ok_or_else(null)?)?;
        let v: Vec<C64> = slice(values, 2 * len)?.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let f = SampledField::from_values(g, v, "")?;
        out(out_field, Box::into_raw(Box::new(MtvField(f))))
    })
}

/// Samples `θ_{k,λ'}` on a grid; `lambda_prime` has `grid.n` entries.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mtv_field_theta(
    grid: *const MtvGrid,
    k: usize,
    lambda_prime: *const f64,
    out_field: *mut *mut MtvField,
) -> MtvStatus {
    guard(|| {
        let g = grid_of(grid.as_ref().ok_or_else(null)?)?;
        let lp = slice(lambda_prime, g.n)?.to_vec();
        let f = try_sample(|z| Ok(C64::new(theta_k(k, &lp, z)?, 0.0)), &g)?;
        out(out_field, Box::into_raw(Box::new(MtvField(f))))
    })
}

/// Reads a field file.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mtv_field_read(path: *const c_char, out_field: *mut *mut MtvField) -> MtvStatus {
    guard(|| {
        let f = read_field(text(path)?)?.into_sampled()?;
        out(out_field, Box::into_raw(Box::new(MtvField(f))))
    })
}

/// Writes a field file; `base64` selects the text encoding.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mtv_field_write(f: *const MtvField, path: *const c_char, base64: bool) -> MtvStatus {
    guard(|| {
        let enc = if base64 { Encoding::Base64 } else { Encoding::Binary };
        Ok(write_field(field_ref(f)?, text(path)?, enc)?)
    })
}

/// Number of complex samples.
///
/// # Safety
/// `f` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn mtv_field_len(f: *const MtvField) -> usize {
    f.as_ref().map_or(0, |f| f.0.values.len())
}

/// Copies the samples as interleaved pairs into `buf` of `cap` doubles.
///
/// # Safety
/// `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn mtv_field_values(f: *const MtvField, buf: *mut f64, cap: usize) -> MtvStatus {
    guard(|| {
        let f = field_ref(f)?;
        if cap < 2 * f.values.len() {
            return Err(Failure::Status(MtvStatus::BufferTooSmall, "buffer smaller than 2 * mtv_field_len"));
        }
        if buf.is_null() {
            return Err(null());
        }
        let b = std::slice::from_raw_parts_mut(buf, cap);
        for (i, v) in f.values.iter().enumerate() {
            b[2 * i] = v.re;
            b[2 * i + 1] = v.im;
        }
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mtv_field_free(f: *mut MtvField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// `λ'`-twisted spherical mean over `|w| = radius` with a sphere rule of the
/// given order.
///
/// # Safety
/// Pointers must be valid; `lambda_prime` has the field's `n` entries.
#[no_mangle]
pub unsafe extern "C" fn mtv_twisted_mean(
    f: *const MtvField,
    lambda_prime: *const f64,
    radius: f64,
    order: usize,
    out_field: *mut *mut MtvField,
) -> MtvStatus {
    guard(|| {
        let f = field_ref(f)?;
        let rule = build_sphere_rule(f.n(), radius, order)?;
        let m = lambda_twisted_mean(f, slice(lambda_prime, f.n())?, &rule)?;
        out(out_field, Box::into_raw(Box::new(MtvField(m))))
    })
}

/// Recovers a field from its mean against `Σ w_i μ_{r_i}` through degree
/// `k_max`. `out_unrecoverable` receives the number of degrees that could
/// not be recovered.
///
/// # Safety
/// `radii` and `weights` hold `count` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mtv_reconstruct(
    mean: *const MtvField,
    radii: *const f64,
    weights: *const f64,
    count: usize,
    lambda_prime: *const f64,
    k_max: usize,
    out_field: *mut *mut MtvField,
    out_unrecoverable: *mut usize,
) -> MtvStatus {
    guard(|| {
        let mean = field_ref(mean)?;
        let atoms: Vec<(f64, f64)> = slice(radii, count)?.iter().copied().zip(slice(weights, count)?.iter().copied()).collect();
        let mu = RadialMeasure::new(atoms)?;
        let rec = reconstruct_from_means(MeanData::Measure(&mu, mean), slice(lambda_prime, mean.n())?, k_max)?;
        out(out_unrecoverable, rec.unrecoverable.len())?;
        out(out_field, Box::into_raw(Box::new(MtvField(rec.field))))
    })
}

/// Two-radii admissibility within `(k_max, n_max)` at tolerance `tol`.
/// Writes 1 to `out_admissible` when no conflict is found, else 0.
///
/// # Safety
/// `lambda_prime` holds `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn mtv_two_radii_check(
    r1: f64,
    r2: f64,
    n: usize,
    lambda_prime: *const f64,
    k_max: usize,
    n_max: usize,
    tol: f64,
    out_admissible: *mut i32,
) -> MtvStatus {
    guard(|| {
        let v = two_radii_check(r1, r2, n, slice(lambda_prime, n)?, RadiiBounds { k_max, n_max, tol })?;
        out(out_admissible, v.admissible_within_bounds as i32)
    })
}

/// `θ_{l,λ'}` sampled on `grid`, annihilated by the mean over
/// `|w| = *out_radius`; `out_residual` is the observed mean size.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mtv_counterexample(
    l: usize,
    grid: *const MtvGrid,
    lambda_prime: *const f64,
    out_field: *mut *mut MtvField,
    out_radius: *mut f64,
    out_residual: *mut f64,
) -> MtvStatus {
    guard(|| {
        let g = grid_of(grid.as_ref().ok_or_else(null)?)?;
        let ce = one_radius_counterexample(l, slice(lambda_prime, g.n)?, &g)?;
        out(out_radius, ce.radius)?;
        out(out_residual, ce.residual)?;
        out(out_field, Box::into_raw(Box::new(MtvField(ce.field))))
    })
}
