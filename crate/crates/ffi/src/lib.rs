//! C interface to `afrelay`.
//!
//! Conventions:
//! * every fallible function returns an [`AfrStatus`] and writes its result
//!   through an out-pointer, which is left untouched on failure;
//! * models are opaque heap objects created by [`afr_model_new`] and released
//!   with [`afr_model_free`];
//! * after a failure, [`afr_last_error_message`] describes it. The string is
//!   owned by the library, per thread, and valid until the next failing call
//!   on the same thread;
//! * panics never cross the boundary; they are reported as `AFR_STATUS_PANIC`.
//!
//! # Safety
//!
//! Pointer arguments may be null (reported as `AFR_STATUS_NULL_POINTER`);
//! otherwise they must be valid for the access implied by their type, strings
//! must be NUL-terminated, and model pointers must come from
//! [`afr_model_new`] and not yet be freed.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use afrelay::config::derive_with_table;
use afrelay::e2e::{E2eModel, EvalPath, ModulationKind, ModulationSpec};
use afrelay::mcsim::{estimate_metrics, MetricRequest};
use afrelay::{DerivedParams, Error, GainConvention, SystemConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfrStatus {
    Ok = 0,
    InvalidInput = 1,
    NonConvergence = 2,
    Numerical = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfrGainConvention {
    SelectedRelayMeans = 0,
    PerRelayMeans = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfrEvalPath {
    Closed = 0,
    Quadrature = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfrModulationKind {
    Coherent = 0,
    NonCoherent = 1,
}

/// Scenario; field meanings as in the Rust `SystemConfig`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AfrConfig {
    pub num_relays: u32,
    pub rho1: f64,
    pub rho2: f64,
    pub d1: f64,
    pub pathloss_exp: f64,
    pub eta1_db: f64,
    pub eta2_db: f64,
    pub rate: f64,
    pub noise_power: f64,
    pub gain_convention: AfrGainConvention,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AfrDerived {
    pub sigma1: f64,
    pub sigma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub c: f64,
    pub psi: f64,
}

/// Monte-Carlo estimates with their standard errors.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AfrMcResult {
    pub outage: f64,
    pub outage_se: f64,
    pub ser: f64,
    pub ser_se: f64,
    pub mgf: f64,
    pub mgf_se: f64,
    pub num_trials: u64,
}

/// Opaque analytic model.
pub struct AfrModel {
    model: E2eModel,
    derived: DerivedParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AfrStatus {
    match e {
        Error::InvalidInput(_) => AfrStatus::InvalidInput,
        Error::NonConvergence { .. } => AfrStatus::NonConvergence,
        Error::Numerical(_) => AfrStatus::Numerical,
    }
}

fn null_pointer(what: &str) -> AfrStatus {
    set_error(&format!("null pointer: {what}"));
    AfrStatus::NullPointer
}

// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), AfrStatus>) -> AfrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AfrStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            AfrStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, AfrStatus>;
}

impl<T> OrStatus<T> for afrelay::Result<T> {
    fn or_status(self) -> Result<T, AfrStatus> {
        self.map_err(|e| {
            set_error(&e.to_string());
            status_of(&e)
        })
    }
}

fn to_config(c: &AfrConfig) -> SystemConfig {
    SystemConfig {
        num_relays: c.num_relays,
        rho1: c.rho1,
        rho2: c.rho2,
        d1: c.d1,
        pathloss_exp: c.pathloss_exp,
        eta1_db: c.eta1_db,
        eta2_db: c.eta2_db,
        rate: c.rate,
        noise_power: c.noise_power,
        gain_convention: match c.gain_convention {
            AfrGainConvention::SelectedRelayMeans => GainConvention::SelectedRelayMeans,
            AfrGainConvention::PerRelayMeans => GainConvention::PerRelayMeans,
        },
    }
}

fn modulation_from(name: *const c_char) -> Result<ModulationSpec, AfrStatus> {
    if name.is_null() {
        return Err(null_pointer("modulation"));
    }
    // SAFETY: caller passes a NUL-terminated string
    let s = unsafe { CStr::from_ptr(name) }.to_str().map_err(|_| {
        set_error("modulation name is not valid UTF-8");
        AfrStatus::InvalidInput
    })?;
    ModulationSpec::from_name(s).or_status()
}

/// Fills `out` with the default scenario (2 relays, correlation 0.9, relay
/// midway, path-loss exponent 3, 15 dB on both hops, rate 1).
#[no_mangle]
pub unsafe extern "C" fn afr_config_default(out: *mut AfrConfig) -> AfrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let d = SystemConfig::default();
        let c = AfrConfig {
            num_relays: d.num_relays,
            rho1: d.rho1,
            rho2: d.rho2,
            d1: d.d1,
            pathloss_exp: d.pathloss_exp,
            eta1_db: d.eta1_db,
            eta2_db: d.eta2_db,
            rate: d.rate,
            noise_power: d.noise_power,
            gain_convention: AfrGainConvention::SelectedRelayMeans,
        };
        // SAFETY: checked non-null; caller guarantees it is writable
        unsafe { out.write(c) };
        Ok(())
    })
}

/// Builds the analytic model at source 2. For source 1 pass the scenario with
/// `d1 -> 1 - d1` and `rho1 <-> rho2`.
#[no_mangle]
pub unsafe extern "C" fn afr_model_new(config: *const AfrConfig, out: *mut *mut AfrModel) -> AfrStatus {
    guard(|| {
        if config.is_null() {
            return Err(null_pointer("config"));
        }
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        // SAFETY: checked non-null
        let cfg = to_config(unsafe { &*config });
        let (derived, table) = derive_with_table(&cfg).or_status()?;
        let model = E2eModel::from_parts(&cfg, &derived, &table).or_status()?;
        let boxed = Box::new(AfrModel { model, derived });
        // SAFETY: checked non-null
        unsafe { out.write(Box::into_raw(boxed)) };
        Ok(())
    })
}

/// Releases a model. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn afr_model_free(model: *mut AfrModel) {
    if !model.is_null() {
        // SAFETY: pointer came from afr_model_new and is freed once
        drop(unsafe { Box::from_raw(model) });
    }
}

fn with_model(model: *const AfrModel, out: *mut f64, f: impl FnOnce(&AfrModel) -> afrelay::Result<f64>) -> AfrStatus {
    guard(|| {
        if model.is_null() {
            return Err(null_pointer("model"));
        }
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        // SAFETY: checked non-null; model came from afr_model_new
        let v = f(unsafe { &*model }).or_status()?;
        // SAFETY: checked non-null
        unsafe { out.write(v) };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn afr_model_derived(model: *const AfrModel, out: *mut AfrDerived) -> AfrStatus {
    guard(|| {
        if model.is_null() {
            return Err(null_pointer("model"));
        }
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        // SAFETY: checked non-null
        let d = unsafe { &*model }.derived;
        let v = AfrDerived { sigma1: d.sigma1, sigma2: d.sigma2, eta1: d.eta1, eta2: d.eta2, c: d.c, psi: d.psi };
        // SAFETY: checked non-null
        unsafe { out.write(v) };
        Ok(())
    })
}

/// CDF of the end-to-end SNR at `phi`.
#[no_mangle]
pub unsafe extern "C" fn afr_model_cdf(model: *const AfrModel, phi: f64, out: *mut f64) -> AfrStatus {
    with_model(model, out, |m| m.model.cdf(phi))
}

/// Outage probability at the scenario's target rate.
#[no_mangle]
pub unsafe extern "C" fn afr_model_outage(model: *const AfrModel, out: *mut f64) -> AfrStatus {
    with_model(model, out, |m| m.model.outage(m.derived.psi))
}

/// `E[exp(-s Y)]` (note the minus sign).
#[no_mangle]
pub unsafe extern "C" fn afr_model_mgf(model: *const AfrModel, s: f64, out: *mut f64) -> AfrStatus {
    with_model(model, out, |m| m.model.mgf(s))
}

/// Average SER for a named preset: "bpsk", "bfsk", "dbpsk", "ncbfsk", "<M>pam".
#[no_mangle]
pub unsafe extern "C" fn afr_model_ser(model: *const AfrModel, modulation: *const c_char, out: *mut f64) -> AfrStatus {
    let spec = match guard_value(|| modulation_from(modulation)) {
        Ok(s) => s,
        Err(st) => return st,
    };
    with_model(model, out, |m| m.model.ser(&spec))
}

/// Average SER for conditional error rate `a Q(sqrt(b snr))` (coherent) or
/// `a exp(-b snr)` (non-coherent).
#[no_mangle]
pub unsafe extern "C" fn afr_model_ser_custom(
    model: *const AfrModel,
    kind: AfrModulationKind,
    a: f64,
    b: f64,
    out: *mut f64,
) -> AfrStatus {
    let kind = match kind {
        AfrModulationKind::Coherent => ModulationKind::Coherent,
        AfrModulationKind::NonCoherent => ModulationKind::NonCoherent,
    };
    with_model(model, out, |m| m.model.ser(&ModulationSpec::new(kind, a, b, "custom")?))
}

/// `c1 int_0^inf x^c2 exp(-c3 x) F(x) dx`.
#[no_mangle]
pub unsafe extern "C" fn afr_model_s_integral(
    model: *const AfrModel,
    c1: f64,
    c2: f64,
    c3: f64,
    path: AfrEvalPath,
    out: *mut f64,
) -> AfrStatus {
    let path = match path {
        AfrEvalPath::Closed => EvalPath::Closed,
        AfrEvalPath::Quadrature => EvalPath::Quadrature,
    };
    with_model(model, out, |m| m.model.s_integral(path, c1, c2, c3))
}

fn guard_value<T>(f: impl FnOnce() -> Result<T, AfrStatus>) -> Result<T, AfrStatus> {
    let mut slot = None;
    match guard(|| {
        slot = Some(f()?);
        Ok(())
    }) {
        AfrStatus::Ok => Ok(slot.expect("set on success")),
        s => Err(s),
    }
}

/// Monte-Carlo outage, SER (named preset) and MGF at `mgf_s`, all from the
/// same `num_trials` trials. Results are identical for any thread count.
#[no_mangle]
pub unsafe extern "C" fn afr_simulate(
    config: *const AfrConfig,
    num_trials: u64,
    seed: u64,
    modulation: *const c_char,
    mgf_s: f64,
    out: *mut AfrMcResult,
) -> AfrStatus {
    guard(|| {
        if config.is_null() {
            return Err(null_pointer("config"));
        }
        if out.is_null() {
            return Err(null_pointer("out"));
        }
        let spec = modulation_from(modulation)?;
        // SAFETY: checked non-null
        let cfg = to_config(unsafe { &*config });
        let (derived, _) = derive_with_table(&cfg).or_status()?;
        let req = MetricRequest { psi: Some(derived.psi), modulations: vec![spec], mgf_s: vec![mgf_s] };
        let est = estimate_metrics(&cfg, &req, num_trials, seed, 0).or_status()?;
        let outage = est.outage.expect("requested");
        let r = AfrMcResult {
            outage: outage.value,
            outage_se: outage.std_error,
            ser: est.ser[0].value,
            ser_se: est.ser[0].std_error,
            mgf: est.mgf[0].value,
            mgf_se: est.mgf[0].std_error,
            num_trials,
        };
        // SAFETY: checked non-null
        unsafe { out.write(r) };
        Ok(())
    })
}

/// Message of the last failure on this thread (empty if none).
#[no_mangle]
pub extern "C" fn afr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn afr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
