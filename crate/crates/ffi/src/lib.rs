//! C ABI for kgbounds.
//!
//! Objects cross the boundary as opaque handles written through an out
//! pointer and released by the matching `kgb_*_free`. Every fallible
//! call returns a [`KgbStatus`]; on failure the message is kept per thread and
//! can be read with [`kgb_last_error_message`]. Strings returned by the
//! library are owned by the caller and released with [`kgb_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kgbounds::bounds;
use kgbounds::config::{self, Configuration, CorrelationPoint};
use kgbounds::exact::ExactScalar;
use kgbounds::matrix::{IntMatrix, MatrixInput};
use kgbounds::oracle;
use kgbounds::polytope::{InvariantBasis, SignedPermutationGroup};
use kgbounds::projection::{facet_loop, FacetOptions, FacetResult, FacetStatus};
use kgbounds::solver::{self, ExactSolveResult, SolveOptions};
use kgbounds::Error;
use nalgebra::DMatrix;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Parse = 4,
    UnknownName = 5,
    Resource = 6,
    Budget = 7,
    Degenerate = 8,
    Certificate = 9,
    Io = 10,
    Panic = 11,
}

impl From<&Error> for KgbStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::RoundingFailed(_) => KgbStatus::Domain,
            Error::Parse { .. } | Error::Json(_) => KgbStatus::Parse,
            Error::Catalog(_) => KgbStatus::UnknownName,
            Error::Resource(_) => KgbStatus::Resource,
            Error::Budget(_) => KgbStatus::Budget,
            Error::Degenerate(_) => KgbStatus::Degenerate,
            Error::Certificate(_) => KgbStatus::Certificate,
            Error::Io(_) => KgbStatus::Io,
        }
    }
}

/// Facet status as reported by [`kgb_facet_status`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgbFacetStatus {
    Facet = 0,
    Face = 1,
    Heuristic = 2,
    Inside = 3,
}

/// A configuration of lines.
pub struct KgbConfiguration(Configuration);

/// A real matrix, kept exact when it was built from exact data.
pub struct KgbMatrix(MatrixInput);

/// Outcome of an exact `SDP_1` solve.
pub struct KgbSolveResult(ExactSolveResult);

/// Outcome of the facet loop.
pub struct KgbFacet(FacetResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: KgbStatus, msg: impl Into<String>) -> KgbStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), KgbStatus>) -> KgbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KgbStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(KgbStatus::Panic, msg)
        }
    }
}

fn lift<T>(r: kgbounds::Result<T>) -> Result<T, KgbStatus> {
    r.map_err(|e| fail(KgbStatus::from(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), KgbStatus> {
    if p.is_null() {
        Err(fail(KgbStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, KgbStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(KgbStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

unsafe fn put<T>(out: *mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length without
/// the terminator, or 0 when there is no error.
#[no_mangle]
pub unsafe extern "C" fn kgb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn kgb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library.
#[no_mangle]
pub unsafe extern "C" fn kgb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a catalog configuration by name.
#[no_mangle]
pub unsafe extern "C" fn kgb_configuration_generate(
    name: *const c_char,
    out: *mut *mut KgbConfiguration,
) -> KgbStatus {
    guard(|| {
        non_null(out, "out")?;
        let name = read_str(name, "name")?;
        let c = lift(config::generate(name))?;
        put(out, KgbConfiguration(c));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kgb_configuration_free(c: *mut KgbConfiguration) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Ambient dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn kgb_configuration_dim(c: *const KgbConfiguration) -> usize {
    c.as_ref().map_or(0, |c| c.0.d)
}

/// Number of lines, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn kgb_configuration_size(c: *const KgbConfiguration) -> usize {
    c.as_ref().map_or(0, |c| c.0.m())
}

/// Gram matrix `P_xy = ⟨a_x, b_y⟩` of two configurations (pass the same
/// handle twice for a square one).
#[no_mangle]
pub unsafe extern "C" fn kgb_gram(
    a: *const KgbConfiguration,
    b: *const KgbConfiguration,
    out: *mut *mut KgbMatrix,
) -> KgbStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        let p = lift(config::gram(&(*a).0, &(*b).0))?;
        let m = match p.exact() {
            Some(e) => MatrixInput::Exact(e.clone()),
            None => MatrixInput::Float(p.float().clone()),
        };
        put(out, KgbMatrix(m));
        Ok(())
    })
}

/// Integer matrix from `rows·cols` row-major entries.
#[no_mangle]
pub unsafe extern "C" fn kgb_matrix_from_ints(
    rows: usize,
    cols: usize,
    data: *const i64,
    out: *mut *mut KgbMatrix,
) -> KgbStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(KgbStatus::InvalidArgument, "matrix too large"))?;
        let v = std::slice::from_raw_parts(data, n).to_vec();
        let m = lift(IntMatrix::new(rows, cols, v))?;
        put(out, KgbMatrix(MatrixInput::Integer(m)));
        Ok(())
    })
}

/// Floating-point matrix from `rows·cols` row-major entries.
#[no_mangle]
pub unsafe extern "C" fn kgb_matrix_from_f64(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut KgbMatrix,
) -> KgbStatus {
    guard(|| {
        non_null(data, "data")?;
        non_null(out, "out")?;
        if rows == 0 || cols == 0 {
            return Err(fail(KgbStatus::InvalidArgument, "empty matrix"));
        }
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(KgbStatus::InvalidArgument, "matrix too large"))?;
        let v = std::slice::from_raw_parts(data, n);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(fail(KgbStatus::InvalidArgument, "non-finite entry"));
        }
        let m = DMatrix::from_row_slice(rows, cols, v);
        put(out, KgbMatrix(MatrixInput::Float(m)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kgb_matrix_free(m: *mut KgbMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

#[no_mangle]
pub unsafe extern "C" fn kgb_matrix_rows(m: *const KgbMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.shape().0)
}

#[no_mangle]
pub unsafe extern "C" fn kgb_matrix_cols(m: *const KgbMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.shape().1)
}

/// Copies the entries, row-major, as doubles into `buf` of length `len`.
#[no_mangle]
pub unsafe extern "C" fn kgb_matrix_to_f64(
    m: *const KgbMatrix,
    buf: *mut f64,
    len: usize,
) -> KgbStatus {
    guard(|| {
        non_null(m, "matrix")?;
        non_null(buf, "buf")?;
        let f = (*m).0.to_f64();
        if len < f.len() {
            return Err(fail(
                KgbStatus::InvalidArgument,
                format!("buffer needs {} entries", f.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, f.len());
        for i in 0..f.nrows() {
            for j in 0..f.ncols() {
                out[i * f.ncols() + j] = f[(i, j)];
            }
        }
        Ok(())
    })
}

/// Solves `SDP_1[M]` by branch and bound. `node_budget` 0 means unlimited;
/// when the budget runs out the handle is still produced and the call
/// returns `KGB_STATUS_BUDGET`.
#[no_mangle]
pub unsafe extern "C" fn kgb_solve_exact(
    m: *const KgbMatrix,
    node_budget: u64,
    out: *mut *mut KgbSolveResult,
) -> KgbStatus {
    guard(|| {
        non_null(m, "matrix")?;
        non_null(out, "out")?;
        let opts = SolveOptions {
            node_budget: (node_budget > 0).then_some(node_budget),
            ..SolveOptions::default()
        };
        let r = lift(solver::sdp1_rectangular(&(*m).0, &opts))?;
        let optimal = r.is_optimal();
        put(out, KgbSolveResult(r));
        if optimal {
            Ok(())
        } else {
            Err(fail(
                KgbStatus::Budget,
                "node budget exhausted; value is a lower bound",
            ))
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn kgb_solve_result_free(r: *mut KgbSolveResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn kgb_solve_result_value(r: *const KgbSolveResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.value_f64)
}

/// True when the value carries an optimality proof.
#[no_mangle]
pub unsafe extern "C" fn kgb_solve_result_optimal(r: *const KgbSolveResult) -> bool {
    r.as_ref()
        .is_some_and(|r| r.0.is_optimal() && r.0.certified)
}

/// Exact value as text, e.g. `5/2` or `1 + 2*sqrt(5)`.
#[no_mangle]
pub unsafe extern "C" fn kgb_solve_result_value_string(r: *const KgbSolveResult) -> *mut c_char {
    r.as_ref()
        .map_or(ptr::null_mut(), |r| to_c_string(r.0.value.to_string()))
}

/// Full result as JSON.
#[no_mangle]
pub unsafe extern "C" fn kgb_solve_result_to_json(r: *const KgbSolveResult) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| {
        serde_json::to_string(&r.0)
            .map(to_c_string)
            .unwrap_or(ptr::null_mut())
    })
}

/// Heuristic lower estimate of `SDP_n[M]` by alternating maximisation.
#[no_mangle]
pub unsafe extern "C" fn kgb_solve_heuristic(
    m: *const KgbMatrix,
    n: usize,
    restarts: usize,
    seed: u64,
    value: *mut f64,
) -> KgbStatus {
    guard(|| {
        non_null(m, "matrix")?;
        non_null(value, "value")?;
        let r = lift(oracle::heuristic_sdp(&(*m).0.to_f64(), n, restarts, seed))?;
        *value = r.value;
        Ok(())
    })
}

fn basis_for(
    a: &Configuration,
    b: &Configuration,
    symmetric: bool,
) -> kgbounds::Result<InvariantBasis> {
    if symmetric && !a.mirrors.is_empty() && !b.mirrors.is_empty() {
        Ok(SignedPermutationGroup::from_configuration(a, b)?.invariant_basis())
    } else {
        Ok(InvariantBasis::trivial(a.m(), b.m()))
    }
}

/// Runs the facet loop on `Gram(a, b)` against the rank-`n` body. With
/// `symmetric` the search is restricted to matrices invariant under the
/// configurations' reflection group.
#[no_mangle]
pub unsafe extern "C" fn kgb_facet_run(
    a: *const KgbConfiguration,
    b: *const KgbConfiguration,
    n: usize,
    symmetric: bool,
    seed: u64,
    out: *mut *mut KgbFacet,
) -> KgbStatus {
    guard(|| {
        non_null(a, "a")?;
        non_null(b, "b")?;
        non_null(out, "out")?;
        if n == 0 {
            return Err(fail(KgbStatus::InvalidArgument, "n must be at least 1"));
        }
        let (ca, cb) = (&(*a).0, &(*b).0);
        let p: CorrelationPoint = lift(config::gram(ca, cb))?;
        let basis = lift(basis_for(ca, cb, symmetric))?;
        let opts = FacetOptions {
            n,
            seed,
            ..FacetOptions::default()
        };
        let r = lift(facet_loop(&p, basis, &opts))?;
        put(out, KgbFacet(r));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn kgb_facet_free(f: *mut KgbFacet) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

#[no_mangle]
pub unsafe extern "C" fn kgb_facet_status(f: *const KgbFacet) -> KgbFacetStatus {
    match f.as_ref().map(|f| f.0.status) {
        Some(FacetStatus::Facet) => KgbFacetStatus::Facet,
        Some(FacetStatus::Face) => KgbFacetStatus::Face,
        Some(FacetStatus::Heuristic) => KgbFacetStatus::Heuristic,
        _ => KgbFacetStatus::Inside,
    }
}

/// `⟨A, P⟩ / SDP_n[A]` as a double.
#[no_mangle]
pub unsafe extern "C" fn kgb_facet_ratio(f: *const KgbFacet) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.ratio)
}

fn exact_string(x: Option<&ExactScalar>) -> *mut c_char {
    x.map_or(ptr::null_mut(), |x| to_c_string(x.to_string()))
}

/// Exact ratio as text, or null when it is not known exactly.
#[no_mangle]
pub unsafe extern "C" fn kgb_facet_ratio_string(f: *const KgbFacet) -> *mut c_char {
    f.as_ref()
        .map_or(ptr::null_mut(), |f| exact_string(f.0.ratio_exact.as_ref()))
}

/// `λ` with `A ∝ P − λI` as text, or null when `A` is not of that form.
#[no_mangle]
pub unsafe extern "C" fn kgb_facet_lambda_string(f: *const KgbFacet) -> *mut c_char {
    f.as_ref()
        .map_or(ptr::null_mut(), |f| exact_string(f.0.lambda.as_ref()))
}

/// Facet record as JSON.
#[no_mangle]
pub unsafe extern "C" fn kgb_facet_to_json(f: *const KgbFacet) -> *mut c_char {
    f.as_ref().map_or(ptr::null_mut(), |f| {
        serde_json::to_string(&f.0)
            .map(to_c_string)
            .unwrap_or(ptr::null_mut())
    })
}

/// Copies the integer normal `A` (row-major) into `buf`.
#[no_mangle]
pub unsafe extern "C" fn kgb_facet_normal(
    f: *const KgbFacet,
    buf: *mut i64,
    len: usize,
) -> KgbStatus {
    guard(|| {
        non_null(f, "facet")?;
        non_null(buf, "buf")?;
        let d = (*f).0.normal.data();
        if len < d.len() {
            return Err(fail(
                KgbStatus::InvalidArgument,
                format!("buffer needs {} entries", d.len()),
            ));
        }
        ptr::copy_nonoverlapping(d.as_ptr(), buf, d.len());
        Ok(())
    })
}

/// `γ(d)/γ(n)` as a double.
#[no_mangle]
pub unsafe extern "C" fn kgb_gamma_ratio(d: usize, n: usize, value: *mut f64) -> KgbStatus {
    guard(|| {
        non_null(value, "value")?;
        *value = lift(bounds::gamma_ratio(d, n))?.to_f64();
        Ok(())
    })
}

/// Infinite-order bound of Davie and Reeds and its maximiser.
#[no_mangle]
pub unsafe extern "C" fn kgb_davie_bound(value: *mut f64, lambda: *mut f64) -> KgbStatus {
    guard(|| {
        non_null(value, "value")?;
        non_null(lambda, "lambda")?;
        let b = lift(bounds::davie_bound(10_000, 1e-12))?;
        *value = b.value;
        *lambda = b.lambda;
        Ok(())
    })
}

/// Upper bound `1/(α η_A η_B)` with `α = v0/(1+ε)`, rounded upwards.
#[no_mangle]
pub unsafe extern "C" fn kgb_shrinking_upper(
    v0: f64,
    epsilon: f64,
    eta_a: f64,
    eta_b: f64,
    value: *mut f64,
) -> KgbStatus {
    guard(|| {
        non_null(value, "value")?;
        let v0q = lift(kgbounds::exact::exact_from_f64(v0))?;
        let dc =
            lift(kgbounds::projection::DecompositionCertificate::from_reported(v0q, epsilon, 1))?;
        let c = lift(bounds::shrinking_upper(1, 1, &dc.alpha, eta_a, eta_b))?;
        *value = c.conservative_f64();
        Ok(())
    })
}

/// Shrinking factor of a configuration (dimension at most 4).
#[no_mangle]
pub unsafe extern "C" fn kgb_shrinking_factor(
    c: *const KgbConfiguration,
    eta: *mut f64,
) -> KgbStatus {
    guard(|| {
        non_null(c, "configuration")?;
        non_null(eta, "eta")?;
        *eta = lift(bounds::shrinking_factor(&(*c).0))?.eta;
        Ok(())
    })
}
