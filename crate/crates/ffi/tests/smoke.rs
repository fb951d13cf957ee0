//! Exercises the C ABI from Rust: happy paths, error paths, and the
//! string/handle ownership contract.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use hplab_ffi::*;

fn last_error_text() -> String {
    unsafe { CStr::from_ptr(hplab_last_error()).to_string_lossy().into_owned() }
}

fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p).to_string_lossy().into_owned() };
    unsafe { hplab_string_free(p) };
    s
}

#[test]
fn flat_weight_round_trip() {
    let id = CString::new("constant").unwrap();
    let mut w: *mut HplabWeight = ptr::null_mut();
    let rc = unsafe { hplab_weight_new(id.as_ptr(), ptr::null(), &mut w) };
    assert_eq!(rc, HPLAB_OK);
    assert!(!w.is_null());

    // β_n ≡ 1 for the flat weight.
    let mut lb = f64::NAN;
    assert_eq!(unsafe { hplab_weight_log_beta(w, 17, &mut lb) }, HPLAB_OK);
    assert_eq!(lb, 0.0);

    // With β ≡ 1 the reciprocal self-convolution counts its n+1 terms.
    let mut bn = f64::NAN;
    assert_eq!(unsafe { hplab_weight_bn(w, 12, &mut bn) }, HPLAB_OK);
    assert!((bn - 13.0).abs() < 1e-12, "B_12 = {bn}");

    // sup_{n<=N} β_n B_n = N+1, attained at the top index.
    let mut sup = f64::NAN;
    let mut arg = usize::MAX;
    assert_eq!(
        unsafe { hplab_weight_bnbeta_sup(w, 12, &mut sup, &mut arg) },
        HPLAB_OK
    );
    assert!((sup - 13.0).abs() < 1e-12, "sup = {sup}");
    assert_eq!(arg, 12);

    unsafe { hplab_weight_free(w) };
    unsafe { hplab_weight_free(ptr::null_mut()) }; // NULL is a no-op
}

#[test]
fn parameterized_weight_takes_json() {
    let id = CString::new("poly_shift").unwrap();
    let params = CString::new(r#"{"exponent": 2.0}"#).unwrap();
    let mut w: *mut HplabWeight = ptr::null_mut();
    let rc = unsafe { hplab_weight_new(id.as_ptr(), params.as_ptr(), &mut w) };
    assert_eq!(rc, HPLAB_OK, "last error: {}", last_error_text());

    // β_n = (n+1)^2, so log β_3 = 2 log 4.
    let mut lb = f64::NAN;
    assert_eq!(unsafe { hplab_weight_log_beta(w, 3, &mut lb) }, HPLAB_OK);
    assert!((lb - 2.0 * 4.0f64.ln()).abs() < 1e-14);

    unsafe { hplab_weight_free(w) };
}

#[test]
fn bad_weight_id_sets_last_error() {
    let id = CString::new("no_such_family").unwrap();
    let mut w: *mut HplabWeight = ptr::null_mut();
    let rc = unsafe { hplab_weight_new(id.as_ptr(), ptr::null(), &mut w) };
    assert_eq!(rc, HPLAB_ERR_DOMAIN);
    assert!(w.is_null());
    let msg = last_error_text();
    assert!(msg.contains("no_such_family"), "message was: {msg}");
}

#[test]
fn null_arguments_are_rejected_not_crashed() {
    let mut w: *mut HplabWeight = ptr::null_mut();
    assert_eq!(
        unsafe { hplab_weight_new(ptr::null(), ptr::null(), &mut w) },
        HPLAB_ERR_NULL_ARG
    );
    let id = CString::new("constant").unwrap();
    assert_eq!(
        unsafe { hplab_weight_new(id.as_ptr(), ptr::null(), ptr::null_mut()) },
        HPLAB_ERR_NULL_ARG
    );
    let mut out = f64::NAN;
    assert_eq!(
        unsafe { hplab_weight_log_beta(ptr::null(), 0, &mut out) },
        HPLAB_ERR_NULL_ARG
    );
    assert_eq!(
        unsafe { hplab_osc_integral(1, 1, 2.0, 64, ptr::null_mut(), ptr::null_mut()) },
        HPLAB_ERR_NULL_ARG
    );
    assert!(!last_error_text().is_empty());
}

#[test]
fn malformed_json_is_reported() {
    let id = CString::new("poly_shift").unwrap();
    let params = CString::new("{not json").unwrap();
    let mut w: *mut HplabWeight = ptr::null_mut();
    let rc = unsafe { hplab_weight_new(id.as_ptr(), params.as_ptr(), &mut w) };
    assert_eq!(rc, HPLAB_ERR_JSON);
    assert!(last_error_text().contains("params_json"));
}

#[test]
fn oscillatory_integral_matches_closed_form() {
    // At n = m = 1, s = 1 the window integral has the closed form 71/648.
    let mut value = f64::NAN;
    let mut err = f64::NAN;
    let rc = unsafe { hplab_osc_integral(1, 1, 1.0, 64, &mut value, &mut err) };
    assert_eq!(rc, HPLAB_OK, "last error: {}", last_error_text());
    let exact = 71.0 / 648.0;
    assert!(
        (value - exact).abs() <= 1e-10 * exact,
        "value {value} vs {exact}, err_est {err}"
    );
    assert!(err.abs() <= 1e-8);
}

#[test]
fn out_of_window_ratio_is_a_domain_error() {
    let mut value = f64::NAN;
    let rc = unsafe { hplab_osc_integral(10, 1, 2.0, 64, &mut value, ptr::null_mut()) };
    assert_eq!(rc, HPLAB_ERR_DOMAIN);
}

#[test]
fn experiment_list_is_json_in_suite_order() {
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { hplab_experiment_list(&mut out) }, HPLAB_OK);
    let ids: Vec<String> = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(ids.len(), 10);
    assert_eq!(ids[0], "zorboska_ratio");
    assert!(ids.iter().any(|i| i == "moment"));
}

#[test]
fn experiment_runs_with_defaults_and_with_config() {
    // Defaults (NULL config): the moment experiment should pass outright.
    let id = CString::new("moment").unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let rc = unsafe { hplab_experiment_run(id.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(rc, HPLAB_OK, "last error: {}", last_error_text());
    let record: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(record["experiment"], "moment");
    assert_eq!(record["pass"], true);

    // A config document with a seed override is honored.
    let cfg = CString::new(r#"{"experiment": "moment", "seed": 5}"#).unwrap();
    let mut out2: *mut c_char = ptr::null_mut();
    let rc = unsafe { hplab_experiment_run(id.as_ptr(), cfg.as_ptr(), &mut out2) };
    assert_eq!(rc, HPLAB_OK, "last error: {}", last_error_text());
    let record2: serde_json::Value = serde_json::from_str(&take_string(out2)).unwrap();
    assert_eq!(record2["pass"], true);
}

#[test]
fn experiment_id_mismatch_is_rejected() {
    let id = CString::new("moment").unwrap();
    let cfg = CString::new(r#"{"experiment": "hankel"}"#).unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let rc = unsafe { hplab_experiment_run(id.as_ptr(), cfg.as_ptr(), &mut out) };
    assert_eq!(rc, HPLAB_ERR_DOMAIN);
    assert!(out.is_null());
    let msg = last_error_text();
    assert!(msg.contains("hankel") && msg.contains("moment"), "message: {msg}");
}

#[test]
fn unknown_experiment_is_a_runtime_error_with_message() {
    let id = CString::new("nonexistent").unwrap();
    let mut out: *mut c_char = ptr::null_mut();
    let rc = unsafe { hplab_experiment_run(id.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(rc, HPLAB_ERR_RUNTIME);
    assert!(last_error_text().contains("nonexistent"));
}
