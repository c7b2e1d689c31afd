use std::ptr;

use membership_rd_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let needed = unsafe { mrd_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(needed >= 1);
    unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn closed_forms() {
    let mut rate = 0.0;
    assert_eq!(unsafe { mrd_optimal_binary(0.0, 2f64.powi(-10), &mut rate) }, MrdStatus::Ok);
    assert!((rate - 10.0).abs() < 1e-12);

    assert_eq!(unsafe { mrd_optimal_binary(0.6, 0.5, &mut rate) }, MrdStatus::TrivialRegime);
    assert!(last_error().contains("trivial"));

    let mut opt = MrdLogLossOptimum::default();
    assert_eq!(unsafe { mrd_optimal_logloss(0.1, 0.2, &mut opt) }, MrdStatus::Ok);
    assert!((opt.x_star - (-0.1f64).exp()).abs() < 1e-15);
    assert!((opt.rate + opt.q_star.log2()).abs() < 1e-12);
    assert_eq!(unsafe { mrd_optimal_logloss(2.0, 2.0, &mut opt) }, MrdStatus::RegimeViolation);

    assert_eq!(unsafe { mrd_first_order_rate(0.1, 0.1, 0.0, &mut rate) }, MrdStatus::Ok);
    assert!((rate - 0.8 * 9f64.log2()).abs() < 1e-12);

    let mut bits = 0.0;
    assert_eq!(unsafe { mrd_memory_lower_bound(1024, 2.0, &mut bits) }, MrdStatus::Ok);
    assert_eq!(bits, 2041.5);
    assert_eq!(unsafe { mrd_memory_lower_bound(0, 2.0, &mut bits) }, MrdStatus::InvalidArgument);
    assert_eq!(unsafe { mrd_memory_lower_bound(4, 2.0, ptr::null_mut()) }, MrdStatus::NullPointer);
}

#[test]
fn solver() {
    let mut pt = MrdFrontierPoint::default();
    let status = unsafe { mrd_solve_rp(0.5, MrdMetric::Fnr, MrdMetric::Fpr, 0.0, 0.5, &mut pt) };
    assert_eq!(status, MrdStatus::Ok);
    assert!(pt.converged);
    assert!((pt.rate - 0.622556).abs() < 1e-5);
    let status = unsafe { mrd_solve_rp(1.5, MrdMetric::Fnr, MrdMetric::Fpr, 0.0, 0.5, &mut pt) };
    assert_eq!(status, MrdStatus::InvalidArgument);
}

fn build(keys: &[Vec<u8>], eps_k: f64, eps_n: f64) -> (MrdStatus, *mut MrdFilter, MrdBuildReport) {
    let ptrs: Vec<*const u8> = keys.iter().map(|k| k.as_ptr()).collect();
    let lens: Vec<usize> = keys.iter().map(|k| k.len()).collect();
    let mut handle = ptr::null_mut();
    let mut report = MrdBuildReport::default();
    let status = unsafe {
        mrd_filter_build(ptrs.as_ptr(), lens.as_ptr(), keys.len(), eps_k, eps_n, 3, &mut handle, &mut report)
    };
    (status, handle, report)
}

#[test]
fn filter_lifecycle() {
    let keys: Vec<Vec<u8>> = (0..200).map(|i| format!("item:{i}").into_bytes()).collect();
    let (status, handle, report) = build(&keys, 0.0, 1.0 / 3.0);
    assert_eq!(status, MrdStatus::Ok);
    assert!(report.success);
    assert_eq!(report.satisfied_keys, 200);

    for k in &keys {
        let mut accept = 9;
        assert_eq!(unsafe { mrd_filter_query(handle, k.as_ptr(), k.len(), &mut accept) }, MrdStatus::Ok);
        assert_eq!(accept, 1);
    }

    let mut params = MrdFilterParams::default();
    assert_eq!(unsafe { mrd_filter_params(handle, &mut params) }, MrdStatus::Ok);
    assert_eq!((params.n, params.q), (200, 3));

    let mut needed = 0;
    assert_eq!(unsafe { mrd_filter_serialize(handle, ptr::null_mut(), 0, &mut needed) }, MrdStatus::BufferTooSmall);
    let mut buf = vec![0u8; needed];
    let mut written = 0;
    assert_eq!(unsafe { mrd_filter_serialize(handle, buf.as_mut_ptr(), buf.len(), &mut written) }, MrdStatus::Ok);
    assert_eq!(written, needed);

    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { mrd_filter_deserialize(buf.as_ptr(), buf.len(), &mut copy) }, MrdStatus::Ok);
    let mut again = vec![0u8; needed];
    assert_eq!(unsafe { mrd_filter_serialize(copy, again.as_mut_ptr(), again.len(), &mut written) }, MrdStatus::Ok);
    assert_eq!(again, buf);

    buf[0] ^= 0xff;
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { mrd_filter_deserialize(buf.as_ptr(), buf.len(), &mut bad) }, MrdStatus::BadFormat);
    assert!(bad.is_null());

    unsafe {
        mrd_filter_free(handle);
        mrd_filter_free(copy);
        mrd_filter_free(ptr::null_mut());
    }
}

#[test]
fn filter_errors() {
    let keys: Vec<Vec<u8>> = vec![b"a".to_vec(), b"a".to_vec()];
    assert_eq!(build(&keys, 0.0, 0.5).0, MrdStatus::DuplicateKey);
    let keys: Vec<Vec<u8>> = vec![b"a".to_vec()];
    assert_eq!(build(&keys, 0.0, 0.25).0, MrdStatus::NotReciprocalPrime);
    assert_eq!(build(&keys, 0.6, 0.5).0, MrdStatus::TrivialRegime);
    let mut accept = 0;
    assert_eq!(unsafe { mrd_filter_query(ptr::null(), ptr::null(), 0, &mut accept) }, MrdStatus::NullPointer);
}
