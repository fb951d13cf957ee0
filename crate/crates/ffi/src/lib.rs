//! C ABI for the hplab library.
//!
//! Conventions:
//! - Every fallible function returns an `int` status code (`HPLAB_OK` = 0);
//!   results travel through out-pointers.
//! - On a nonzero status, [`hplab_last_error`] returns a thread-local,
//!   NUL-terminated description valid until the next failing call on the
//!   same thread.
//! - `HplabWeight` is an opaque handle created by [`hplab_weight_new`] and
//!   released by [`hplab_weight_free`].
//! - Strings returned through `char**` out-parameters are heap-allocated and
//!   must be released with [`hplab_string_free`].
//! - Panics never cross the boundary; they surface as `HPLAB_ERR_PANIC`.
//!
//! The committed header `include/hplab.h` is generated from this file with
//! cbindgen (`cbindgen --config cbindgen.toml --output include/hplab.h`).

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hplab::experiments::{registry, run_experiment, ExperimentConfig};
use hplab::weights::{bn_sequence, bnbeta_sup, WeightSequence};

/// Success.
pub const HPLAB_OK: c_int = 0;
/// A required pointer argument was NULL.
pub const HPLAB_ERR_NULL_ARG: c_int = 1;
/// A string argument was not valid UTF-8.
pub const HPLAB_ERR_UTF8: c_int = 2;
/// A JSON document failed to parse or did not match the expected shape.
pub const HPLAB_ERR_JSON: c_int = 3;
/// Arguments were outside the supported domain (unknown id, bad parameter).
pub const HPLAB_ERR_DOMAIN: c_int = 4;
/// The computation itself failed (see the error message).
pub const HPLAB_ERR_RUNTIME: c_int = 5;
/// An internal panic was caught at the boundary.
pub const HPLAB_ERR_PANIC: c_int = 6;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(code: c_int, msg: &str) -> c_int {
    let safe = CString::new(msg.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = safe);
    code
}

/// Run `body` with panics converted to `HPLAB_ERR_PANIC`.
fn guarded<F: FnOnce() -> c_int>(body: F) -> c_int {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".to_string());
            fail(HPLAB_ERR_PANIC, &format!("internal panic: {msg}"))
        }
    }
}

/// # Safety
/// `ptr` must be NULL or point to a NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        return Err(fail(HPLAB_ERR_NULL_ARG, &format!("{what} is NULL")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(HPLAB_ERR_UTF8, &format!("{what} is not valid UTF-8")))
}

/// Opaque weight-sequence handle.
pub struct HplabWeight {
    inner: WeightSequence,
}

/// Latest error description for this thread (empty until a call fails).
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hplab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a weight sequence from its id and a JSON parameter object.
///
/// `params_json` may be NULL for families without parameters; ids and
/// parameter keys match the experiment configuration format (for example
/// `"poly_shift"` with `{"exponent": 2.0}`).
///
/// # Safety
/// `id`/`params_json` must be NULL or NUL-terminated; `out` must be a valid
/// pointer. A non-NULL result in `*out` must be released with
/// [`hplab_weight_free`].
#[no_mangle]
pub unsafe extern "C" fn hplab_weight_new(
    id: *const c_char,
    params_json: *const c_char,
    out: *mut *mut HplabWeight,
) -> c_int {
    guarded(|| {
        if out.is_null() {
            return fail(HPLAB_ERR_NULL_ARG, "out is NULL");
        }
        let id = match read_str(id, "id") {
            Ok(s) => s,
            Err(c) => return c,
        };
        let params = if params_json.is_null() {
            serde_json::Value::Object(serde_json::Map::new())
        } else {
            let text = match read_str(params_json, "params_json") {
                Ok(s) => s,
                Err(c) => return c,
            };
            match serde_json::from_str(text) {
                Ok(v) => v,
                Err(e) => return fail(HPLAB_ERR_JSON, &format!("params_json: {e}")),
            }
        };
        match WeightSequence::from_spec(id, &params) {
            Ok(w) => {
                *out = Box::into_raw(Box::new(HplabWeight { inner: w }));
                HPLAB_OK
            }
            Err(e) => fail(HPLAB_ERR_DOMAIN, &e.to_string()),
        }
    })
}

/// Release a weight handle (NULL is a no-op).
///
/// # Safety
/// `w` must be NULL or a pointer produced by [`hplab_weight_new`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn hplab_weight_free(w: *mut HplabWeight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// log β_n of the weight.
///
/// # Safety
/// `w` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hplab_weight_log_beta(
    w: *const HplabWeight,
    n: usize,
    out: *mut c_double,
) -> c_int {
    guarded(|| {
        if w.is_null() || out.is_null() {
            return fail(HPLAB_ERR_NULL_ARG, "w/out is NULL");
        }
        *out = (*w).inner.log_beta(n);
        HPLAB_OK
    })
}

/// B_n = Σ_k 1/(β_k β_{n−k}), the reciprocal self-convolution.
///
/// # Safety
/// `w` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hplab_weight_bn(
    w: *const HplabWeight,
    n: usize,
    out: *mut c_double,
) -> c_int {
    guarded(|| {
        if w.is_null() || out.is_null() {
            return fail(HPLAB_ERR_NULL_ARG, "w/out is NULL");
        }
        *out = bn_sequence(&(*w).inner, n).value(n);
        HPLAB_OK
    })
}

/// sup_{n ≤ n_max} β_n B_n together with the index attaining it.
///
/// `argmax_out` may be NULL when the index is not needed.
///
/// # Safety
/// `w` must be a live handle; `sup_out` must be valid; `argmax_out` must be
/// NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn hplab_weight_bnbeta_sup(
    w: *const HplabWeight,
    n_max: usize,
    sup_out: *mut c_double,
    argmax_out: *mut usize,
) -> c_int {
    guarded(|| {
        if w.is_null() || sup_out.is_null() {
            return fail(HPLAB_ERR_NULL_ARG, "w/sup_out is NULL");
        }
        let rep = bnbeta_sup(&(*w).inner, n_max);
        *sup_out = rep.sup;
        if !argmax_out.is_null() {
            *argmax_out = rep.argmax;
        }
        HPLAB_OK
    })
}

/// ∫ over the symbol window of |ĉ_m(T_a^n)|^s da, by adaptive quadrature.
///
/// `err_out` may be NULL. Fails with `HPLAB_ERR_RUNTIME` when the requested
/// tolerance was not certified within the evaluation budget implied by
/// `nodes`.
///
/// # Safety
/// `value_out` must be valid; `err_out` must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn hplab_osc_integral(
    n: usize,
    m: usize,
    s: c_double,
    nodes: usize,
    value_out: *mut c_double,
    err_out: *mut c_double,
) -> c_int {
    guarded(|| {
        if value_out.is_null() {
            return fail(HPLAB_ERR_NULL_ARG, "value_out is NULL");
        }
        match hplab::autom::osc_integral(n, m, s, nodes) {
            Ok(r) => {
                *value_out = r.value;
                if !err_out.is_null() {
                    *err_out = r.err_est;
                }
                if r.converged {
                    HPLAB_OK
                } else {
                    fail(
                        HPLAB_ERR_RUNTIME,
                        &format!(
                            "quadrature not certified after {} evaluations (err_est {:.3e})",
                            r.evals, r.err_est
                        ),
                    )
                }
            }
            Err(e) => fail(HPLAB_ERR_DOMAIN, &e.to_string()),
        }
    })
}

/// JSON array of the available experiment ids, in suite order.
///
/// # Safety
/// `out` must be a valid pointer; the returned string must be released with
/// [`hplab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hplab_experiment_list(out: *mut *mut c_char) -> c_int {
    guarded(|| {
        if out.is_null() {
            return fail(HPLAB_ERR_NULL_ARG, "out is NULL");
        }
        let ids: Vec<&str> = registry().iter().map(|d| d.id).collect();
        let text = serde_json::to_string(&ids).expect("string array serializes");
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        HPLAB_OK
    })
}

/// Run one experiment and return its full record as a JSON document.
///
/// `config_json` may be NULL (shipped defaults) or a configuration document
/// `{"experiment"?, "seed"?, "params"?}`; a mismatched `experiment` field is
/// rejected. The record contains parameters, rows, scalars, criteria, and
/// the overall pass flag.
///
/// # Safety
/// `id` must be NUL-terminated; `config_json` NULL or NUL-terminated;
/// `record_json_out` valid. The returned string must be released with
/// [`hplab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn hplab_experiment_run(
    id: *const c_char,
    config_json: *const c_char,
    record_json_out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        if record_json_out.is_null() {
            return fail(HPLAB_ERR_NULL_ARG, "record_json_out is NULL");
        }
        let id = match read_str(id, "id") {
            Ok(s) => s,
            Err(c) => return c,
        };
        let cfg = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            let text = match read_str(config_json, "config_json") {
                Ok(s) => s,
                Err(c) => return c,
            };
            match serde_json::from_str::<ExperimentConfig>(text) {
                Ok(c) => c,
                Err(e) => return fail(HPLAB_ERR_JSON, &format!("config_json: {e}")),
            }
        };
        if let Some(cfg_id) = &cfg.experiment {
            if cfg_id != id {
                return fail(
                    HPLAB_ERR_DOMAIN,
                    &format!("config names experiment `{cfg_id}`, call names `{id}`"),
                );
            }
        }
        match run_experiment(id, Some(&cfg.params), cfg.seed) {
            Ok(record) => {
                let text = serde_json::to_string(&record).expect("record serializes");
                *record_json_out = CString::new(text).expect("JSON has no NUL").into_raw();
                HPLAB_OK
            }
            Err(e) => fail(HPLAB_ERR_RUNTIME, &e.to_string()),
        }
    })
}

/// Release a string returned by this library (NULL is a no-op).
///
/// # Safety
/// `s` must be NULL or a pointer returned by an hplab function that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn hplab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
