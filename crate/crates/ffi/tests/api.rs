use std::ffi::{CStr, CString};
use std::ptr;

use afrelay::e2e::{E2eModel, ModulationSpec};
use afrelay::SystemConfig;
use afrelay_ffi::*;

fn default_config() -> AfrConfig {
    unsafe {
        let mut c = std::mem::MaybeUninit::uninit();
        assert_eq!(afr_config_default(c.as_mut_ptr()), AfrStatus::Ok);
        c.assume_init()
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(afr_last_error_message()).to_str().unwrap().to_owned() }
}

fn new_model(c: &AfrConfig) -> *mut AfrModel {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(afr_model_new(c, &mut m), AfrStatus::Ok);
        assert!(!m.is_null());
        m
    }
}

#[test]
fn matches_library_exactly() {
    unsafe {
        let cfg = AfrConfig { num_relays: 3, rho1: 0.5, ..default_config() };
        let m = new_model(&cfg);
        let lib = E2eModel::from_config(&SystemConfig { num_relays: 3, rho1: 0.5, ..Default::default() }).unwrap();

        let mut v = 0.0;
        assert_eq!(afr_model_outage(m, &mut v), AfrStatus::Ok);
        assert_eq!(v, lib.outage(1.0).unwrap());
        assert_eq!(afr_model_cdf(m, 2.5, &mut v), AfrStatus::Ok);
        assert_eq!(v, lib.cdf(2.5).unwrap());
        assert_eq!(afr_model_mgf(m, 0.3, &mut v), AfrStatus::Ok);
        assert_eq!(v, lib.mgf(0.3).unwrap());

        let bpsk = CString::new("bpsk").unwrap();
        assert_eq!(afr_model_ser(m, bpsk.as_ptr(), &mut v), AfrStatus::Ok);
        assert_eq!(v, lib.ser(&ModulationSpec::bpsk()).unwrap());
        let mut custom = 0.0;
        assert_eq!(afr_model_ser_custom(m, AfrModulationKind::Coherent, 1.0, 2.0, &mut custom), AfrStatus::Ok);
        assert_eq!(custom, v);

        let (mut closed, mut quad) = (0.0, 0.0);
        assert_eq!(afr_model_s_integral(m, 1.0, 0.0, 0.5, AfrEvalPath::Closed, &mut closed), AfrStatus::Ok);
        assert_eq!(afr_model_s_integral(m, 1.0, 0.0, 0.5, AfrEvalPath::Quadrature, &mut quad), AfrStatus::Ok);
        assert!(((closed - quad) / quad).abs() < 1e-6);

        let mut d = AfrDerived { sigma1: 0.0, sigma2: 0.0, eta1: 0.0, eta2: 0.0, c: 0.0, psi: 0.0 };
        assert_eq!(afr_model_derived(m, &mut d), AfrStatus::Ok);
        assert_eq!((d.sigma1, d.psi), (8.0, 1.0));
        afr_model_free(m);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let bad = AfrConfig { d1: 1.5, ..default_config() };
        let mut m = ptr::null_mut();
        assert_eq!(afr_model_new(&bad, &mut m), AfrStatus::InvalidInput);
        assert!(m.is_null());
        assert!(last_error().contains("d1"), "{}", last_error());

        assert_eq!(afr_model_new(ptr::null(), &mut m), AfrStatus::NullPointer);
        assert_eq!(afr_config_default(ptr::null_mut()), AfrStatus::NullPointer);

        let m = new_model(&default_config());
        let mut v = 42.0;
        assert_eq!(afr_model_cdf(m, -1.0, &mut v), AfrStatus::InvalidInput);
        assert_eq!(v, 42.0);
        assert_eq!(afr_model_mgf(m, 0.0, &mut v), AfrStatus::InvalidInput);
        assert_eq!(afr_model_s_integral(m, 1.0, -1.0, 1.0, AfrEvalPath::Closed, &mut v), AfrStatus::InvalidInput);
        let qam = CString::new("16qam").unwrap();
        assert_eq!(afr_model_ser(m, qam.as_ptr(), &mut v), AfrStatus::InvalidInput);
        assert_eq!(afr_model_ser(m, ptr::null(), &mut v), AfrStatus::NullPointer);
        assert_eq!(afr_model_cdf(ptr::null(), 1.0, &mut v), AfrStatus::NullPointer);
        assert_eq!(afr_model_cdf(m, 1.0, ptr::null_mut()), AfrStatus::NullPointer);
        afr_model_free(m);
        afr_model_free(ptr::null_mut());

        // large relay counts are refused rather than evaluated inaccurately
        let big = AfrConfig { num_relays: 64, ..default_config() };
        let mut m = ptr::null_mut();
        assert_eq!(afr_model_new(&big, &mut m), AfrStatus::Numerical);
    }
}

#[test]
fn simulation_is_reproducible() {
    unsafe {
        let cfg = default_config();
        let name = CString::new("dbpsk").unwrap();
        let mut a = AfrMcResult::default();
        let mut b = AfrMcResult::default();
        assert_eq!(afr_simulate(&cfg, 20_000, 5, name.as_ptr(), 1.0, &mut a), AfrStatus::Ok);
        assert_eq!(afr_simulate(&cfg, 20_000, 5, name.as_ptr(), 1.0, &mut b), AfrStatus::Ok);
        assert_eq!((a.outage, a.ser, a.mgf), (b.outage, b.ser, b.mgf));
        assert!((a.ser - 0.5 * a.mgf).abs() < 1e-15);
        assert_eq!(a.num_trials, 20_000);
        assert_eq!(afr_simulate(&cfg, 10, 5, name.as_ptr(), 1.0, &mut a), AfrStatus::InvalidInput);
    }
}

#[test]
fn version_string() {
    unsafe {
        let v = CStr::from_ptr(afr_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
