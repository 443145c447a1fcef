use std::f64::consts::PI;
use std::ffi::CStr;
use std::ptr;

use bci_ffi::*;

fn c(re: f64, im: f64) -> BciComplex {
    BciComplex { re, im }
}

fn last_error() -> Option<String> {
    let p = bci_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn new_instance(alpha: BciComplex, beta: BciComplex, theta: f64) -> Result<*mut BciInstance, BciStatus> {
    let mut inst = ptr::null_mut();
    let s = unsafe { bci_instance_new(alpha, beta, theta, 1e-8, 0.02, &mut inst) };
    if s == BciStatus::Ok {
        Ok(inst)
    } else {
        Err(s)
    }
}

#[test]
fn residue_through_every_method() {
    let inst = new_instance(c(0.5, 0.0), c(1.0, 0.0), PI).unwrap();
    let mut regime = BciRegime::Outside;
    assert_eq!(unsafe { bci_instance_regime(inst, &mut regime) }, BciStatus::Ok);
    assert_eq!(regime, BciRegime::Inside);
    for f in [bci_eval_theorem, bci_eval_quadrature] {
        let mut r = BciResult::default();
        assert_eq!(unsafe { f(inst, &mut r) }, BciStatus::Ok);
        assert!(r.value.re.abs() < 1e-9 && (r.value.im - PI).abs() < 1e-9, "{r:?}");
    }
    let mut r = BciResult::default();
    assert_eq!(unsafe { bci_eval_series(inst, 0, &mut r) }, BciStatus::Ok);
    assert!((r.value.im - PI).abs() < 1e-9);
    assert!(last_error().is_none());
    unsafe { bci_instance_free(inst) };
}

#[test]
fn rational_matches_theorem() {
    let inst = new_instance(c(2.0, 0.0), c(0.5, 0.0), PI).unwrap();
    let (mut a, mut b) = (BciResult::default(), BciResult::default());
    assert_eq!(unsafe { bci_eval_theorem(inst, &mut a) }, BciStatus::Ok);
    assert_eq!(unsafe { bci_eval_rational(inst, 1, 2, &mut b) }, BciStatus::Ok);
    assert!((a.value.re - b.value.re).hypot(a.value.im - b.value.im) < 1e-12);

    let mut untouched = BciResult { value: c(7.0, 7.0), error_estimate: 7.0 };
    assert_eq!(unsafe { bci_eval_rational(inst, 1, 3, &mut untouched) }, BciStatus::BetaMismatch);
    assert_eq!(untouched.error_estimate, 7.0);
    assert!(last_error().unwrap().starts_with("BetaMismatch"));
    assert_eq!(unsafe { bci_eval_series(inst, 0, &mut untouched) }, BciStatus::NotApplicable);
    unsafe { bci_instance_free(inst) };
}

#[test]
fn construction_errors_map_to_codes() {
    assert_eq!(new_instance(c(1.0, 0.0), c(0.5, 0.0), PI).unwrap_err(), BciStatus::AlphaOnCircle);
    assert!(last_error().unwrap().contains("unit circle"));
    assert_eq!(new_instance(c(0.5, 0.0), c(0.5, 0.0), 7.0).unwrap_err(), BciStatus::InvalidAngle);
    assert_eq!(new_instance(c(f64::NAN, 0.0), c(0.5, 0.0), 1.0).unwrap_err(), BciStatus::NonFinite);
    let s = unsafe { bci_instance_new(c(0.5, 0.0), c(0.5, 0.0), 1.0, 1e-8, 0.02, ptr::null_mut()) };
    assert_eq!(s, BciStatus::NullPointer);
}

#[test]
fn null_handles_are_rejected() {
    let mut r = BciResult::default();
    assert_eq!(unsafe { bci_eval_theorem(ptr::null(), &mut r) }, BciStatus::NullPointer);
    let inst = new_instance(c(0.3, 0.1), c(0.5, 0.2), 2.0).unwrap();
    assert_eq!(unsafe { bci_eval_theorem(inst, ptr::null_mut()) }, BciStatus::NullPointer);
    unsafe { bci_instance_free(inst) };
    unsafe { bci_instance_free(ptr::null_mut()) };
    unsafe { bci_string_free(ptr::null_mut()) };
}

#[test]
fn special_functions() {
    let mut l = c(0.0, 0.0);
    assert_eq!(unsafe { bci_branch_log(c(-1.0, 0.0), PI / 2.0, &mut l) }, BciStatus::Ok);
    assert!(l.re.abs() < 1e-15 && (l.im + PI).abs() < 1e-15);
    assert_eq!(unsafe { bci_branch_log(c(0.0, 1.0), PI / 2.0, &mut l) }, BciStatus::OnBranchCut);
    assert_eq!(unsafe { bci_branch_log(c(0.0, 0.0), PI, &mut l) }, BciStatus::ZeroInput);

    let mut p = c(0.0, 0.0);
    assert_eq!(unsafe { bci_branch_pow(c(-4.0, 0.0), c(0.5, 0.0), PI / 2.0, &mut p) }, BciStatus::Ok);
    assert!(p.re.abs() < 1e-15 && (p.im + 2.0).abs() < 1e-14);

    let mut f = BciResult::default();
    assert_eq!(unsafe { bci_hyp2f1_one_b(c(1.0, 0.0), c(0.5, 0.0), 1e-16, &mut f) }, BciStatus::Ok);
    // 2F1(1,1;2;z) = -ln(1-z)/z
    assert!((f.value.re - 2.0 * 2f64.ln()).abs() < 1e-14);
    assert_eq!(unsafe { bci_hyp2f1_one_b(c(1.0, 0.0), c(1.5, 0.0), 1e-16, &mut f) }, BciStatus::OutsideDisc);
}

#[test]
fn ode_residual_is_small() {
    let inst = new_instance(c(0.4, 0.2), c(0.5, 0.0), 2.0).unwrap();
    let mut res = f64::NAN;
    assert_eq!(unsafe { bci_ode_residual(inst, 1e-3, &mut res) }, BciStatus::Ok);
    assert!(res < 1e-6, "{res}");
    unsafe { bci_instance_free(inst) };
    let inst = new_instance(c(0.4, 0.2), c(2.0, 0.0), 2.0).unwrap();
    assert_eq!(unsafe { bci_ode_residual(inst, 1e-3, &mut res) }, BciStatus::IntegerBeta);
    unsafe { bci_instance_free(inst) };
}

#[test]
fn json_report_round_trips() {
    let inst = new_instance(c(2.0, 0.0), c(0.5, 0.0), PI).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bci_evaluate_json(inst, &mut s) }, BciStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { bci_string_free(s) };
    unsafe { bci_instance_free(inst) };
    assert!(text.starts_with("{\"instance\":"));
    assert!(text.ends_with("\"verdict\":\"Agree\"}"));
}

#[test]
fn status_names_cover_every_code() {
    let name = |s: i32| unsafe { CStr::from_ptr(bci_status_name(s)) }.to_str().unwrap();
    assert_eq!(name(BciStatus::Ok as i32), "Ok");
    assert_eq!(name(BciStatus::AlphaOnCircle as i32), "AlphaOnCircle");
    assert_eq!(name(BciStatus::Internal as i32), "Internal");
    assert_eq!(name(-5), "Unknown");
    for code in 0..=20 {
        assert_ne!(name(code), "Unknown", "{code}");
    }
    let v = unsafe { CStr::from_ptr(bci_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_are_per_thread() {
    assert_eq!(new_instance(c(1.0, 0.0), c(0.5, 0.0), PI).unwrap_err(), BciStatus::AlphaOnCircle);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_none());
    assert!(last_error().is_some());
}
