use std::ffi::{c_char, CStr, CString};
use std::ptr;

use conic_lmcf_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { clm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, clm_last_error_length());
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(clm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn sphere_spectrum_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(clm_spectrum_sphere(2, 6.0, &mut s), ClmStatus::Ok);
        let mut len = 0;
        assert_eq!(clm_spectrum_len(s, &mut len), ClmStatus::Ok);
        assert_eq!(len, 3);
        let mut got = Vec::new();
        for i in 0..len {
            let (mut l, mut mult) = (0.0, 0);
            assert_eq!(clm_spectrum_get(s, i, &mut l, &mut mult), ClmStatus::Ok);
            got.push((l, mult));
        }
        assert_eq!(got, vec![(0.0, 1), (2.0, 3), (6.0, 5)]);
        let (mut l, mut mult) = (0.0, 0);
        assert_eq!(clm_spectrum_get(s, 3, &mut l, &mut mult), ClmStatus::OutOfRange);

        let mut t = ptr::null_mut();
        // λ ≤ 6 only vouches for exponents up to 2, so M(2.5) is refused.
        assert_eq!(clm_exponents_new(s, 3, -3.0, 2.5, &mut t), ClmStatus::Ok);
        let mut refused = 0;
        assert_eq!(clm_exponents_count_m(t, 2.5, &mut refused), ClmStatus::WindowTooSmall);
        clm_exponents_free(t);
        clm_spectrum_free(s);
        assert_eq!(clm_spectrum_sphere(2, 12.0, &mut s), ClmStatus::Ok);
        assert_eq!(clm_exponents_new(s, 3, -3.0, 2.5, &mut t), ClmStatus::Ok);
        let mut count = 0;
        assert_eq!(clm_exponents_len(t, &mut count), ClmStatus::Ok);
        let (mut alpha, mut mult) = (0.0, 0);
        assert_eq!(clm_exponents_get(t, count - 1, &mut alpha, &mut mult), ClmStatus::Ok);
        assert_eq!((alpha, mult), (2.0, 5));
        let (mut m_count, mut n_count) = (0, 0);
        assert_eq!(clm_exponents_count_m(t, 2.5, &mut m_count), ClmStatus::Ok);
        assert_eq!(clm_exponents_count_n(t, 2.5, &mut n_count), ClmStatus::Ok);
        // exponents 0, 1, 2 with multiplicities 1, 3, 5; N adds the lift 0 + 2
        assert_eq!((m_count, n_count), (9, 10));
        clm_exponents_free(t);
        clm_spectrum_free(s);
    }
}

#[test]
fn torus_metric_validation() {
    unsafe {
        let bad = [1.0, 0.0, 0.0, -1.0];
        let mut s = ptr::null_mut();
        assert_eq!(clm_spectrum_torus(2, bad.as_ptr(), 4.0, &mut s), ClmStatus::InvalidInput);
        assert!(s.is_null());
        assert!(!last_error().is_empty());
        let good = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(clm_spectrum_torus(2, good.as_ptr(), 1.0, &mut s), ClmStatus::Ok);
        let mut len = 0;
        clm_spectrum_len(s, &mut len);
        assert_eq!(len, 2);
        assert!(last_error().is_empty());
        clm_spectrum_free(s);
    }
}

#[test]
fn cone_indices() {
    unsafe {
        let name = CString::new("hl-torus-3").unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(clm_cone_from_catalog(name.as_ptr(), &mut c), ClmStatus::Ok);
        let (mut index, mut rt, mut rs) = (-1, 0, 0);
        assert_eq!(clm_cone_stability(c, &mut index, &mut rt, &mut rs), ClmStatus::Ok);
        assert_eq!((index, rt, rs), (0, 6, 6));
        let mut f = 0;
        assert_eq!(clm_cone_fredholm_index(c, 2.1, &mut f), ClmStatus::Ok);
        assert_eq!(f, -13);
        assert_eq!(clm_cone_fredholm_index(c, 2.0, &mut f), ClmStatus::ExceptionalWeight);
        assert_eq!(f, -13, "out-pointer untouched on failure");
        clm_cone_free(c);

        let unknown = CString::new("nope").unwrap();
        assert_eq!(clm_cone_from_catalog(unknown.as_ptr(), &mut c), ClmStatus::InvalidInput);
        assert!(last_error().contains("nope"));
    }
}

#[test]
fn heat_buffers() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(clm_heat_solve_power(3, 0.0, 1.0, 40, 2.0, 0.05, 0.01, 1.0, 0.5, &mut h), ClmStatus::Ok);
        let mut n = 0;
        clm_heat_len(h, &mut n);
        assert_eq!(n, 40, "nodes r_1..r_n; the origin is not a node");
        let mut r = vec![0.0; n];
        let mut u = vec![0.0; n];
        assert_eq!(clm_heat_nodes(h, r.as_mut_ptr(), n), ClmStatus::Ok);
        assert_eq!(clm_heat_final(h, u.as_mut_ptr(), n), ClmStatus::Ok);
        assert_eq!(r[n - 1], 1.0);
        assert_eq!(u[n - 1], 0.0);
        assert!(u[n / 2] > 0.0);
        assert_eq!(clm_heat_final(h, u.as_mut_ptr(), n - 1), ClmStatus::OutOfRange);
        clm_heat_free(h);
        assert_eq!(clm_heat_solve_power(3, 0.0, 1.0, 40, 2.0, 0.05, -1.0, 1.0, 0.5, &mut h), ClmStatus::InvalidInput);
    }
}

#[test]
fn flow_lifecycle() {
    unsafe {
        let expr = CString::new("sin(x1) + cos(2*x2)").unwrap();
        let mut f = ptr::null_mut();
        assert_eq!(clm_flow_new(2, 16, expr.as_ptr(), 0.1, &mut f), ClmStatus::Ok);
        let mut before = 0.0;
        clm_flow_sup_theta(f, &mut before);
        assert_eq!(clm_flow_evolve(f, 0.1, 0.0), ClmStatus::Ok);
        let (mut t, mut after) = (0.0, 0.0);
        clm_flow_time(f, &mut t);
        clm_flow_sup_theta(f, &mut after);
        assert!((t - 0.1).abs() < 1e-12);
        assert!(after < before);
        let mut n = 0;
        clm_flow_len(f, &mut n);
        let mut u = vec![0.0; n];
        let mut th = vec![0.0; n];
        assert_eq!(clm_flow_field(f, u.as_mut_ptr(), n), ClmStatus::Ok);
        assert_eq!(clm_flow_theta(f, th.as_mut_ptr(), n), ClmStatus::Ok);
        assert!(u.iter().all(|v| v.is_finite()) && th.iter().any(|v| *v != 0.0));
        clm_flow_free(f);

        let big = CString::new("sin(x1)").unwrap();
        assert_eq!(clm_flow_new(2, 16, big.as_ptr(), 3.0, &mut f), ClmStatus::GraphCondition);
        let bad = CString::new("sin(").unwrap();
        assert_eq!(clm_flow_new(2, 16, bad.as_ptr(), 1.0, &mut f), ClmStatus::Parse);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(clm_spectrum_sphere(2, 6.0, ptr::null_mut()), ClmStatus::NullPointer);
        let mut len = 0;
        assert_eq!(clm_spectrum_len(ptr::null(), &mut len), ClmStatus::NullPointer);
        assert_eq!(clm_cone_from_catalog(ptr::null(), &mut ptr::null_mut()), ClmStatus::NullPointer);
        assert!(last_error().contains("NULL"));
        clm_spectrum_free(ptr::null_mut());
        clm_flow_free(ptr::null_mut());
        // Truncated copies stay NUL-terminated and report the full length.
        let mut small = [1 as c_char; 4];
        let full = clm_last_error_message(small.as_mut_ptr(), small.len());
        assert!(full > 3);
        assert_eq!(small[3], 0);
    }
}

#[test]
fn errors_are_thread_local() {
    unsafe {
        clm_spectrum_len(ptr::null(), &mut 0);
    }
    let other = std::thread::spawn(|| clm_last_error_length()).join().unwrap();
    assert_eq!(other, 0);
    assert!(clm_last_error_length() > 0);
}
