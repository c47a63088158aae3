//! C interface to `maxent-tomo`.
//!
//! Objects cross the boundary as opaque handles created by `mt_*_new`-style functions and
//! released with the matching `mt_*_free`. Every fallible function returns an [`MtStatus`];
//! on failure a description is available from [`mt_last_error`] on the same thread.
//! Matrices are passed as separate real and imaginary arrays in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use maxent_tomo::linalg::{CMatrix, DensityMatrix, HermitianOperator};
use maxent_tomo::maxent::{rho_normalized, ParamVector};
use maxent_tomo::metrics::{fidelity, von_neumann_entropy, ObjectiveSpec};
use maxent_tomo::models::ModelSet;
use maxent_tomo::search::{random_search, CodingScheme};
use maxent_tomo::targets::{gen_target_pure, gen_target_random, TargetKind};
use maxent_tomo::{Error, Omega0Mode};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    NotDensity = 4,
    Domain = 5,
    Numerical = 6,
    Budget = 7,
    BufferTooSmall = 8,
    Panic = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtOmega0Mode {
    FixedZero = 0,
    Analytic = 1,
    Free = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtTargetKind {
    Pure = 0,
    Mixed = 1,
}

pub struct MtModelSet(ModelSet);

pub struct MtDensityMatrix(DensityMatrix);

pub struct MtObjective(ObjectiveSpec);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(MtStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Dimension { .. } => MtStatus::Dimension,
            Error::NotDensity(_) => MtStatus::NotDensity,
            Error::Domain { .. } => MtStatus::Domain,
            Error::Numerical(_) => MtStatus::Numerical,
            Error::Budget { .. } | Error::Size { .. } => MtStatus::Budget,
            Error::InvalidOperator(_)
            | Error::Parameter(_)
            | Error::Rank { .. }
            | Error::Schedule(_)
            | Error::Config(_) => MtStatus::InvalidArgument,
            Error::Io(_) | Error::Json(_) => MtStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(MtStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(MtStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MtStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn omega0_mode(mode: u32) -> Result<Omega0Mode, Failure> {
    match mode {
        0 => Ok(Omega0Mode::FixedZero),
        1 => Ok(Omega0Mode::Analytic),
        2 => Ok(Omega0Mode::Free),
        other => Err(invalid(format!("unknown omega0 mode {other}"))),
    }
}

/// Message describing the last failure on this thread, or null. The pointer stays valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The six smoothed Pauli-eigenstate models, ordered z+, z-, x+, x-, y+, y-.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mt_model_set_pauli(epsilon: f64, out: *mut *mut MtModelSet) -> MtStatus {
    guard(|| {
        let ms = ModelSet::pauli_smoothed(epsilon)?;
        write(out, boxed(MtModelSet(ms)), "out")
    })
}

/// Model set built from `count` density matrices, each given as handles.
///
/// # Safety
/// `states` must point to `count` valid density-matrix handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_model_set_custom(
    states: *const *const MtDensityMatrix,
    count: usize,
    out: *mut *mut MtModelSet,
) -> MtStatus {
    guard(|| {
        let handles = slice(states, count, "states")?;
        let list = handles
            .iter()
            .map(|&h| deref(h, "state").map(|d| d.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let ms = ModelSet::custom(list)?;
        write(out, boxed(MtModelSet(ms)), "out")
    })
}

/// Keeps the models at the given 1-based indices.
///
/// # Safety
/// `ms` must be a valid handle, `indices` must point to `count` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_model_set_subset(
    ms: *const MtModelSet,
    indices: *const usize,
    count: usize,
    out: *mut *mut MtModelSet,
) -> MtStatus {
    guard(|| {
        let ms = deref(ms, "ms")?;
        let sub = ms.0.subset(slice(indices, count, "indices")?)?;
        write(out, boxed(MtModelSet(sub)), "out")
    })
}

/// Number of models, or 0 for a null handle.
///
/// # Safety
/// `ms` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mt_model_set_len(ms: *const MtModelSet) -> usize {
    ms.as_ref().map_or(0, |m| m.0.len())
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `ms` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mt_model_set_dim(ms: *const MtModelSet) -> usize {
    ms.as_ref().map_or(0, |m| m.0.dim())
}

/// # Safety
/// `ms` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mt_model_set_free(ms: *mut MtModelSet) {
    if !ms.is_null() {
        drop(Box::from_raw(ms));
    }
}

/// Density matrix from row-major real and imaginary parts (`dim * dim` values each).
///
/// # Safety
/// `re` and `im` must point to `dim * dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_density_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut MtDensityMatrix,
) -> MtStatus {
    guard(|| {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let n = dim.checked_mul(dim).ok_or_else(|| invalid("dimension overflows"))?;
        let re = slice(re, n, "re")?;
        let im = slice(im, n, "im")?;
        let values: Vec<Complex64> = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let m = CMatrix::from_row_slice(dim, dim, &values);
        let rho = DensityMatrix::new(HermitianOperator::new(m)?)?;
        write(out, boxed(MtDensityMatrix(rho)), "out")
    })
}

/// Real pure qubit state `cos θ |0⟩ + sin θ |1⟩`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_target_pure(theta: f64, out: *mut *mut MtDensityMatrix) -> MtStatus {
    guard(|| {
        if !theta.is_finite() {
            return Err(invalid("theta must be finite"));
        }
        write(out, boxed(MtDensityMatrix(gen_target_pure(theta))), "out")
    })
}

/// Random target of the given kind (`MT_TARGET_KIND_PURE` or `MT_TARGET_KIND_MIXED`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_target_random(
    dim: usize,
    kind: u32,
    seed: u64,
    out: *mut *mut MtDensityMatrix,
) -> MtStatus {
    guard(|| {
        let kind = match kind {
            0 => TargetKind::Pure,
            1 => TargetKind::Mixed,
            other => return Err(invalid(format!("unknown target kind {other}"))),
        };
        write(out, boxed(MtDensityMatrix(gen_target_random(dim, kind, seed)?)), "out")
    })
}

/// Dimension of a density matrix, or 0 for a null handle.
///
/// # Safety
/// `rho` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mt_density_dim(rho: *const MtDensityMatrix) -> usize {
    rho.as_ref().map_or(0, |r| r.0.dim())
}

/// Copies the entries into `re` and `im`, each with room for `capacity` values.
///
/// # Safety
/// `rho` must be a valid handle; `re` and `im` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn mt_density_entries(
    rho: *const MtDensityMatrix,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
) -> MtStatus {
    guard(|| {
        let rho = deref(rho, "rho")?;
        let n = rho.0.dim();
        if capacity < n * n {
            return Err(Failure(MtStatus::BufferTooSmall, format!("need {} entries, got {capacity}", n * n)));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        for r in 0..n {
            for c in 0..n {
                let z = rho.0.matrix()[(r, c)];
                re.add(r * n + c).write(z.re);
                im.add(r * n + c).write(z.im);
            }
        }
        Ok(())
    })
}

/// # Safety
/// `rho` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mt_density_free(rho: *mut MtDensityMatrix) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Von Neumann entropy in nats.
///
/// # Safety
/// `rho` must be a valid handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mt_entropy(rho: *const MtDensityMatrix, out: *mut f64) -> MtStatus {
    guard(|| {
        let rho = deref(rho, "rho")?;
        write(out, von_neumann_entropy(&rho.0), "out")
    })
}

/// Uhlmann fidelity `(tr √(√a b √a))²`.
///
/// # Safety
/// `a` and `b` must be valid handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mt_fidelity(a: *const MtDensityMatrix, b: *const MtDensityMatrix, out: *mut f64) -> MtStatus {
    guard(|| {
        let f = fidelity(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        write(out, f, "out")
    })
}

/// The normalized state `exp(Σ ωᵢ ηᵢ) / tr exp(Σ ωᵢ ηᵢ)`.
///
/// # Safety
/// `ms` must be a valid handle, `omegas` must point to `count` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_rho_normalized(
    ms: *const MtModelSet,
    omegas: *const f64,
    count: usize,
    out: *mut *mut MtDensityMatrix,
) -> MtStatus {
    guard(|| {
        let ms = deref(ms, "ms")?;
        let w = ParamVector::new(0.0, slice(omegas, count, "omegas")?.to_vec())?;
        write(out, boxed(MtDensityMatrix(rho_normalized(&ms.0, &w)?)), "out")
    })
}

/// Objective `E(ω)` for a model set and target. `mode` is an `MtOmega0Mode` value.
///
/// # Safety
/// `ms` and `target` must be valid handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mt_objective_new(
    ms: *const MtModelSet,
    target: *const MtDensityMatrix,
    alpha: f64,
    mode: u32,
    out: *mut *mut MtObjective,
) -> MtStatus {
    guard(|| {
        let ms = deref(ms, "ms")?;
        let target = deref(target, "target")?;
        let spec = ObjectiveSpec::new(ms.0.clone(), target.0.clone(), alpha, omega0_mode(mode)?)?;
        write(out, boxed(MtObjective(spec)), "out")
    })
}

/// Number of searched parameters, or 0 for a null handle.
///
/// # Safety
/// `obj` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn mt_objective_num_params(obj: *const MtObjective) -> usize {
    obj.as_ref().map_or(0, |o| o.0.num_params())
}

/// # Safety
/// `obj` must be a valid handle, `params` must point to `count` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_objective_evaluate(
    obj: *const MtObjective,
    params: *const f64,
    count: usize,
    out: *mut f64,
) -> MtStatus {
    guard(|| {
        let obj = deref(obj, "obj")?;
        write(out, obj.0.evaluate(slice(params, count, "params")?)?, "out")
    })
}

/// Fidelity between the target and the normalized reconstruction at `params`.
///
/// # Safety
/// `obj` must be a valid handle, `params` must point to `count` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_objective_fidelity(
    obj: *const MtObjective,
    params: *const f64,
    count: usize,
    out: *mut f64,
) -> MtStatus {
    guard(|| {
        let obj = deref(obj, "obj")?;
        write(out, obj.0.fidelity_of(slice(params, count, "params")?)?, "out")
    })
}

/// Uniform random search over `bits`-bit sign-magnitude codes in `[-omega_max, omega_max]`.
/// The best parameters are written to `best_params`, which must hold `capacity` values.
///
/// # Safety
/// `obj` must be a valid handle; `best_params` must point to `capacity` writable values and
/// `best_e` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mt_random_search(
    obj: *const MtObjective,
    bits: u32,
    omega_max: f64,
    budget: u64,
    seed: u64,
    best_params: *mut f64,
    capacity: usize,
    best_e: *mut f64,
) -> MtStatus {
    guard(|| {
        let obj = deref(obj, "obj")?;
        let scheme = CodingScheme::new(bits, obj.0.num_params(), omega_max)?;
        let needed = scheme.num_params();
        if capacity < needed {
            return Err(Failure(MtStatus::BufferTooSmall, format!("need {needed} parameters, got {capacity}")));
        }
        if best_params.is_null() {
            return Err(null("best_params"));
        }
        let result = random_search(&obj.0, &scheme, budget, seed)?;
        for (i, v) in result.best_params.iter().enumerate() {
            best_params.add(i).write(*v);
        }
        write(best_e, result.best_e, "best_e")
    })
}

/// # Safety
/// `obj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mt_objective_free(obj: *mut MtObjective) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, MtStatus::Panic);
        let msg = unsafe { std::ffi::CStr::from_ptr(mt_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn error_mapping() {
        let f = Failure::from(Error::Budget { bits: 30, limit: 24 });
        assert_eq!(f.0, MtStatus::Budget);
        assert!(f.1.contains("24"));
        assert_eq!(Failure::from(Error::Domain { eigenvalue: -1.0 }).0, MtStatus::Domain);
        assert_eq!(Failure::from(Error::Parameter("x".into())).0, MtStatus::InvalidArgument);
    }

    #[test]
    fn interior_nul_is_sanitized() {
        set_last_error("a\0b".into());
        let msg = unsafe { std::ffi::CStr::from_ptr(mt_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
