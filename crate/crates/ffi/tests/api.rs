use std::ffi::{CStr, CString};
use std::ptr;

use avar_mdp_ffi::*;

const COIN: &str = r#"{
  "states": 2, "actions": 2, "admissible": [[0, 1], [0]],
  "transitions": [
    {"x": 0, "a": 0, "x2": 0, "p": 1.0},
    {"x": 0, "a": 1, "x2": 0, "p": 0.8},
    {"x": 0, "a": 1, "x2": 1, "p": 0.2},
    {"x": 1, "a": 0, "x2": 0, "p": 1.0}
  ],
  "costs": [{"x": 0, "a": 0, "c": 2}, {"x": 0, "a": 1, "c": 1}, {"x": 1, "a": 0, "c": 4}]
}"#;

const GEOMETRIC: &str = r#"{
  "states": 2, "actions": 1, "admissible": [[0], [0]],
  "transitions": [
    {"x": 0, "a": 0, "x2": 0, "p": 0.5},
    {"x": 0, "a": 0, "x2": 1, "p": 0.5},
    {"x": 1, "a": 0, "x2": 1, "p": 1.0}
  ],
  "costs": [{"x": 0, "a": 0, "c": 1}, {"x": 1, "a": 0, "c": 0}],
  "absorbing": [1]
}"#;

fn last_error() -> String {
    let p = avar_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(json: &str) -> *mut AvarModel {
    let text = CString::new(json).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { avar_model_from_json(text.as_ptr(), &mut m) },
        AvarStatus::Ok
    );
    m
}

#[test]
fn finite_solve_round_trip() {
    let m = model(COIN);
    let mut count = 0;
    unsafe {
        assert_eq!(avar_model_state_count(m, &mut count), AvarStatus::Ok);
        assert_eq!(count, 2);
        let mut sol = ptr::null_mut();
        assert_eq!(
            avar_solve_finite(m, 0, 4, 0.9, 1.0, 1.0, &mut sol),
            AvarStatus::Ok
        );
        let (mut avar, mut s_star) = (0.0, 0.0);
        assert_eq!(
            avar_solution_avar(sol, &mut avar, &mut s_star),
            AvarStatus::Ok
        );
        assert_eq!((avar, s_star), (7.0, 7.0));

        let mut w = 0.0;
        assert_eq!(avar_solution_value(sol, 0, s_star, &mut w), AvarStatus::Ok);
        assert_eq!(w, 0.0);
        let mut action = 99;
        assert_eq!(
            avar_solution_action(sol, 0, 0, s_star, &mut action),
            AvarStatus::Ok
        );
        assert!(action < 2);
        assert_eq!(
            avar_solution_value(sol, 5, 0.0, &mut w),
            AvarStatus::OutOfRange
        );
        assert!(last_error().contains("state 5"));
        avar_solution_free(sol);
        avar_model_free(m);
    }
}

#[test]
fn infinite_solve() {
    let m = model(GEOMETRIC);
    unsafe {
        let mut sol = ptr::null_mut();
        assert_eq!(
            avar_solve_infinite(m, 0, 0.5, 1.0, 1.0, f64::NAN, &mut sol),
            AvarStatus::Ok
        );
        let (mut avar, mut s_star) = (0.0, 0.0);
        avar_solution_avar(sol, &mut avar, &mut s_star);
        assert!((avar - 3.0).abs() < 1e-6);
        let mut w = 0.0;
        avar_solution_value(sol, 0, 0.0, &mut w);
        assert!((w - 2.0).abs() < 1e-6);
        avar_solution_free(sol);
        avar_model_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(
            avar_model_from_json(ptr::null(), &mut m),
            AvarStatus::NullPointer
        );
        let bad = CString::new(r#"{"states": 1}"#).unwrap();
        assert_eq!(
            avar_model_from_json(bad.as_ptr(), &mut m),
            AvarStatus::MalformedModel
        );
        let leaky = CString::new(COIN.replace("0.8", "0.7")).unwrap();
        assert_eq!(
            avar_model_from_json(leaky.as_ptr(), &mut m),
            AvarStatus::InvalidModel
        );
        assert!(last_error().contains("sum"), "{}", last_error());
        assert!(m.is_null());

        let coin = model(COIN);
        let mut sol = ptr::null_mut();
        assert_eq!(
            avar_solve_finite(coin, 0, 3, 1.5, 1.0, 1.0, &mut sol),
            AvarStatus::InvalidArgument
        );
        assert_eq!(
            avar_solve_finite(coin, 7, 3, 0.5, 1.0, 1.0, &mut sol),
            AvarStatus::OutOfRange
        );
        assert_eq!(
            avar_solve_infinite(coin, 0, 0.5, 1.0, 1.0, f64::NAN, &mut sol),
            AvarStatus::SolverFailure
        );
        assert_eq!(
            avar_solve_finite(coin, 0, 100, 0.5, 1e-6, 1.0, &mut sol),
            AvarStatus::CapacityExceeded
        );
        assert!(sol.is_null());
        avar_model_free(coin);
        avar_model_free(ptr::null_mut());
        avar_solution_free(ptr::null_mut());
    }
}

#[test]
fn risk_measures_and_riccati() {
    let values = [1.0, 2.0, 3.0, 4.0];
    let (mut var, mut avar) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            avar_risk_measures(values.as_ptr(), ptr::null(), 4, 0.5, &mut var, &mut avar),
            AvarStatus::Ok
        );
        assert_eq!((var, avar), (2.0, 3.5));
        let probs = [0.9, 0.1];
        let two = [0.0, 10.0];
        assert_eq!(
            avar_risk_measures(two.as_ptr(), probs.as_ptr(), 2, 0.95, &mut var, &mut avar),
            AvarStatus::Ok
        );
        assert_eq!((var, avar), (10.0, 10.0));
        assert_eq!(
            avar_risk_measures(values.as_ptr(), ptr::null(), 0, 0.5, &mut var, &mut avar),
            AvarStatus::InvalidArgument
        );

        let mut k = [0.0; 4];
        assert_eq!(avar_riccati(3, k.as_mut_ptr(), 4), AvarStatus::Ok);
        for (a, b) in k.iter().zip([1.6, 1.5, 1.0, 0.0]) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert_eq!(
            avar_riccati(3, k.as_mut_ptr(), 3),
            AvarStatus::InvalidArgument
        );
    }
}

#[test]
fn status_descriptions_are_static() {
    let d = unsafe { CStr::from_ptr(avar_status_description(AvarStatus::Panic)) };
    assert_eq!(d.to_str().unwrap(), "internal panic");
}
