//! C ABI for `membership-rd`.
//!
//! Every function returns an [`MrdStatus`]; results go through out-pointers.
//! On failure a human-readable message is kept per thread and can be read
//! with [`mrd_last_error_message`]. Filters are opaque [`MrdFilter`] handles
//! released with [`mrd_filter_free`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::{ptr, slice};

use membership_rd::filter::{self, FilterError, FilterState};
use membership_rd::rate_distortion::{self as rd, ErrorMetric, RateError, SolverConfig};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TrivialRegime = 3,
    RegimeViolation = 4,
    Infeasible = 5,
    NotReciprocalPrime = 6,
    DuplicateKey = 7,
    SearchExhausted = 8,
    BadFormat = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Error metric selector for [`mrd_solve_rp`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrdMetric {
    Fnr = 0,
    Fpr = 1,
    LogLossKey = 2,
    LogLossNonKey = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MrdLogLossOptimum {
    pub x_star: f64,
    pub q_star: f64,
    /// Bits per key.
    pub rate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MrdFrontierPoint {
    pub p: f64,
    pub eps_k: f64,
    pub eps_n: f64,
    /// Bits per key.
    pub rate: f64,
    pub dual_k: f64,
    pub dual_n: f64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MrdBuildReport {
    pub satisfied_keys: u64,
    pub candidates_tried: u64,
    pub bits_payload: u64,
    pub success: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MrdFilterParams {
    pub n: u64,
    pub q: u64,
    pub m: u64,
    pub eps_k: f64,
    pub eps_n: f64,
    pub seed: u64,
}

/// Opaque built filter.
pub struct MrdFilter {
    state: FilterState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: MrdStatus, message: impl ToString) -> MrdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.to_string());
    status
}

fn rate_status(e: RateError) -> MrdStatus {
    let status = match e {
        RateError::TrivialRegime { .. } => MrdStatus::TrivialRegime,
        RateError::LogLossRegime { .. } => MrdStatus::RegimeViolation,
        RateError::Infeasible { .. } => MrdStatus::Infeasible,
        _ => MrdStatus::InvalidArgument,
    };
    fail(status, e)
}

fn filter_status(e: FilterError) -> MrdStatus {
    let status = match e {
        FilterError::NotReciprocalPrime(_) => MrdStatus::NotReciprocalPrime,
        FilterError::TrivialRegime => MrdStatus::TrivialRegime,
        FilterError::DuplicateKey(_) => MrdStatus::DuplicateKey,
        FilterError::SearchExhausted(_) => MrdStatus::SearchExhausted,
        FilterError::BadMagic
        | FilterError::BadVersion(_)
        | FilterError::Truncated { .. }
        | FilterError::TrailingBytes(_)
        | FilterError::MalformedHeader(_) => MrdStatus::BadFormat,
        _ => MrdStatus::InvalidArgument,
    };
    fail(status, e)
}

/// Runs `body`, turning panics into [`MrdStatus::Panic`].
fn guard(body: impl FnOnce() -> MrdStatus) -> MrdStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| fail(MrdStatus::Panic, "internal panic"))
}

unsafe fn write<T>(out: *mut T, value: T) -> MrdStatus {
    if out.is_null() {
        return fail(MrdStatus::NullPointer, "null output pointer");
    }
    out.write(value);
    MrdStatus::Ok
}

/// Copies the calling thread's last error message, NUL-terminated, into
/// `buf` (truncated to `len` bytes). Returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mrd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Rate in bits per key of the binary-metric optimum.
///
/// # Safety
/// `out_rate` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_optimal_binary(eps_k: f64, eps_n: f64, out_rate: *mut f64) -> MrdStatus {
    guard(|| match rd::optimal_binary(eps_k, eps_n) {
        Ok(opt) => write(out_rate, opt.rate),
        Err(e) => rate_status(e),
    })
}

/// Log-loss optimum; budgets in nats.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_optimal_logloss(eps_k: f64, eps_n: f64, out: *mut MrdLogLossOptimum) -> MrdStatus {
    guard(|| match rd::optimal_logloss(eps_k, eps_n) {
        Ok(opt) => write(out, MrdLogLossOptimum { x_star: opt.x_star, q_star: opt.q_star, rate: opt.rate }),
        Err(e) => rate_status(e),
    })
}

/// # Safety
/// `out_rate` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_first_order_rate(eps_k: f64, eps_n: f64, p: f64, out_rate: *mut f64) -> MrdStatus {
    guard(|| match rd::first_order_rate(eps_k, eps_n, p) {
        Ok(rate) => write(out_rate, rate),
        Err(e) => rate_status(e),
    })
}

/// Total-bit lower bound for `n` keys at `fp_value` bits per key.
///
/// # Safety
/// `out_bits` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_memory_lower_bound(n: u64, fp_value: f64, out_bits: *mut f64) -> MrdStatus {
    guard(|| match rd::memory_lower_bound(n, fp_value) {
        Ok(bits) => write(out_bits, bits),
        Err(e) => rate_status(e),
    })
}

fn metric(m: MrdMetric) -> ErrorMetric {
    match m {
        MrdMetric::Fnr => ErrorMetric::Fnr,
        MrdMetric::Fpr => ErrorMetric::Fpr,
        MrdMetric::LogLossKey => ErrorMetric::LogLossKey,
        MrdMetric::LogLossNonKey => ErrorMetric::LogLossNonKey,
    }
}

/// Solves `R_p` with the default solver settings.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_solve_rp(
    p: f64,
    metric_k: MrdMetric,
    metric_n: MrdMetric,
    eps_k: f64,
    eps_n: f64,
    out: *mut MrdFrontierPoint,
) -> MrdStatus {
    guard(|| match rd::solve_rp(p, &metric(metric_k), &metric(metric_n), eps_k, eps_n, &SolverConfig::default()) {
        Ok(pt) => write(
            out,
            MrdFrontierPoint {
                p: pt.p,
                eps_k: pt.eps_k,
                eps_n: pt.eps_n,
                rate: pt.rate,
                dual_k: pt.dual_k,
                dual_n: pt.dual_n,
                converged: pt.converged,
            },
        ),
        Err(e) => rate_status(e),
    })
}

/// Builds a filter over `n` keys; key `i` is `keys[i][..key_lens[i]]`.
///
/// On success `*out_filter` owns a new handle. `out_report` may be null; when
/// given it is filled on success and on [`MrdStatus::SearchExhausted`].
///
/// # Safety
/// `keys` and `key_lens` must hold `n` entries and each key pointer must be
/// valid for its length (or null with length 0). `out_filter` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_filter_build(
    keys: *const *const u8,
    key_lens: *const usize,
    n: usize,
    eps_k: f64,
    eps_n: f64,
    seed: u64,
    out_filter: *mut *mut MrdFilter,
    out_report: *mut MrdBuildReport,
) -> MrdStatus {
    guard(|| {
        if out_filter.is_null() || (n > 0 && (keys.is_null() || key_lens.is_null())) {
            return fail(MrdStatus::NullPointer, "null argument");
        }
        let mut key_slices: Vec<&[u8]> = Vec::with_capacity(n);
        for i in 0..n {
            let (p, len) = (*keys.add(i), *key_lens.add(i));
            if p.is_null() {
                if len != 0 {
                    return fail(MrdStatus::NullPointer, format!("key {i} is null"));
                }
                key_slices.push(&[]);
            } else {
                key_slices.push(slice::from_raw_parts(p, len));
            }
        }
        let params = match filter::derive_params(n as u64, eps_k, eps_n, seed) {
            Ok(p) => p,
            Err(e) => return filter_status(e),
        };
        let to_c = |r: filter::BuildReport| MrdBuildReport {
            satisfied_keys: r.satisfied_keys,
            candidates_tried: r.candidates_tried,
            bits_payload: r.bits_payload,
            success: r.success,
        };
        match filter::build(&params, &key_slices) {
            Ok((state, report)) => {
                if !out_report.is_null() {
                    out_report.write(to_c(report));
                }
                out_filter.write(Box::into_raw(Box::new(MrdFilter { state })));
                MrdStatus::Ok
            }
            Err(e) => {
                if let (FilterError::SearchExhausted(report), false) = (&e, out_report.is_null()) {
                    out_report.write(to_c(*report));
                }
                filter_status(e)
            }
        }
    })
}

/// Writes 1 to `*out_accept` if the filter accepts the element, else 0.
///
/// # Safety
/// `filter` must be a live handle, `elem` valid for `len` bytes (or null with
/// `len` 0), `out_accept` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_filter_query(
    filter: *const MrdFilter,
    elem: *const u8,
    len: usize,
    out_accept: *mut u8,
) -> MrdStatus {
    guard(|| {
        if filter.is_null() || (elem.is_null() && len > 0) {
            return fail(MrdStatus::NullPointer, "null argument");
        }
        let bytes = if elem.is_null() { &[][..] } else { slice::from_raw_parts(elem, len) };
        write(out_accept, filter::query(&(*filter).state, bytes))
    })
}

/// # Safety
/// `filter` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_filter_params(filter: *const MrdFilter, out: *mut MrdFilterParams) -> MrdStatus {
    guard(|| {
        if filter.is_null() {
            return fail(MrdStatus::NullPointer, "null filter");
        }
        let p = (*filter).state.params();
        write(out, MrdFilterParams { n: p.n, q: p.q, m: p.m as u64, eps_k: p.eps_k, eps_n: p.eps_n, seed: p.seed })
    })
}

/// Serializes into `buf`. `*out_len` always receives the required size; with
/// a null or short buffer the call returns [`MrdStatus::BufferTooSmall`].
///
/// # Safety
/// `filter` must be a live handle, `buf` null or valid for `cap` bytes,
/// `out_len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_filter_serialize(
    filter: *const MrdFilter,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> MrdStatus {
    guard(|| {
        if filter.is_null() || out_len.is_null() {
            return fail(MrdStatus::NullPointer, "null argument");
        }
        let bytes = filter::serialize(&(*filter).state);
        out_len.write(bytes.len());
        if buf.is_null() || cap < bytes.len() {
            return fail(MrdStatus::BufferTooSmall, format!("need {} bytes", bytes.len()));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        MrdStatus::Ok
    })
}

/// # Safety
/// `bytes` must be valid for `len` bytes and `out_filter` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mrd_filter_deserialize(bytes: *const u8, len: usize, out_filter: *mut *mut MrdFilter) -> MrdStatus {
    guard(|| {
        if bytes.is_null() || out_filter.is_null() {
            return fail(MrdStatus::NullPointer, "null argument");
        }
        match filter::deserialize(slice::from_raw_parts(bytes, len)) {
            Ok(state) => {
                out_filter.write(Box::into_raw(Box::new(MrdFilter { state })));
                MrdStatus::Ok
            }
            Err(e) => filter_status(e),
        }
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `filter` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mrd_filter_free(filter: *mut MrdFilter) {
    if !filter.is_null() {
        drop(Box::from_raw(filter));
    }
}
