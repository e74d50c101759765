use std::ffi::{c_char, CStr};
use std::ptr;

use wpt_aoi_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { wpt_aoi_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn reference(power_w: f64, capacitor_j: f64) -> *mut WptAoiParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { wpt_aoi_params_reference(power_w, capacitor_j, &mut p) }, WptAoiStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn analyze_reference_point() {
    let p = reference(3.0, 3e-4);
    let mut a = WptAoiAnalytic::default();
    assert_eq!(unsafe { wpt_aoi_analyze(p, &mut a) }, WptAoiStatus::Ok);
    assert!((a.delta - 272.8461).abs() < 1e-3);
    assert!((a.e_t - (1.0 + a.beta)).abs() < 1e-9);
    unsafe { wpt_aoi_params_free(p) };
}

#[test]
fn scalar_helpers() {
    assert!((wpt_aoi_dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
    let mut out = 0.0;
    assert_eq!(unsafe { wpt_aoi_channel_rate_from_distance(10.0, 2.0, 1e3, &mut out) }, WptAoiStatus::Ok);
    assert!((out - 1e5).abs() < 1e-6);
    assert_eq!(unsafe { wpt_aoi_average_aoi(0.0, 1.0, &mut out) }, WptAoiStatus::Ok);
    assert_eq!(out, 1.0);
}

#[test]
fn errors_are_reported() {
    let mut out = 0.0;
    assert_eq!(unsafe { wpt_aoi_average_aoi(1.0, 0.0, &mut out) }, WptAoiStatus::Domain);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { wpt_aoi_average_aoi(1.0, 0.5, ptr::null_mut()) }, WptAoiStatus::NullPointer);
    assert!(last_error().contains("NULL"));

    let mut p = ptr::null_mut();
    assert_eq!(unsafe { wpt_aoi_params_new(-1.0, 0.5, 1e-8, 0.05, 1e-4, 1e5, &mut p) }, WptAoiStatus::Domain);
    assert!(p.is_null());

    let p = reference(3.0, 3e-4);
    assert_eq!(unsafe { wpt_aoi_params_set_capacitor(p, -1.0) }, WptAoiStatus::Domain);
    let mut a = WptAoiAnalytic::default();
    assert_eq!(unsafe { wpt_aoi_analyze(p, &mut a) }, WptAoiStatus::Ok);
    assert!((a.delta - 272.8461).abs() < 1e-3);
    unsafe { wpt_aoi_params_free(p) };
    unsafe { wpt_aoi_params_free(ptr::null_mut()) };
}

#[test]
fn optimize_reference_point() {
    let p = reference(3.0, 3e-4);
    let mut r = WptAoiOptResult::default();
    assert_eq!(unsafe { wpt_aoi_optimize(p, 1e-9, 1.0, 1e-6, &mut r) }, WptAoiStatus::Ok);
    assert!(r.converged);
    assert_eq!(r.boundary, 0);
    assert!((r.b_star_j / 3.370269781e-4 - 1.0).abs() < 1e-4);
    assert!((r.delta_star - 271.3899473).abs() < 1e-3);
    unsafe { wpt_aoi_params_free(p) };
}

#[test]
fn simulate_and_read_samples() {
    let p = reference(3.0, 1e-3);
    let mut sim = ptr::null_mut();
    let status = unsafe { wpt_aoi_simulate(p, 200_000, 1, WptAoiWindow::FirstSuccessToLastSuccess, &mut sim) };
    assert_eq!(status, WptAoiStatus::Ok);
    let mut s = WptAoiSimStats::default();
    assert_eq!(unsafe { wpt_aoi_simulation_stats(sim, &mut s) }, WptAoiStatus::Ok);
    assert!(s.n_successes >= 2 && s.delta_hat >= 1.0);

    let n = unsafe { wpt_aoi_simulation_recharge_count(sim) };
    assert_eq!(n as u64, s.n_recharges);
    let mut buf = vec![0u64; n];
    let mut written = 0;
    assert_eq!(
        unsafe { wpt_aoi_simulation_recharges(sim, buf.as_mut_ptr(), buf.len(), &mut written) },
        WptAoiStatus::Ok
    );
    assert_eq!(written, n);
    assert!(buf.iter().all(|&t| t >= 1));

    let m = unsafe { wpt_aoi_simulation_interarrival_count(sim) };
    let mut xs = vec![0u64; m];
    assert_eq!(
        unsafe { wpt_aoi_simulation_interarrivals(sim, xs.as_mut_ptr(), xs.len(), &mut written) },
        WptAoiStatus::Ok
    );
    assert_eq!(written, m);
    assert!(xs.iter().all(|&x| x >= 1));
    unsafe { wpt_aoi_simulation_free(sim) };
    unsafe { wpt_aoi_params_free(p) };
}

#[test]
fn simulation_without_successes() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { wpt_aoi_params_new(3.0, 0.5, 1e-8, 0.05, 1e-4, 1e12, &mut p) }, WptAoiStatus::Ok);
    let mut sim = ptr::null_mut();
    let status = unsafe { wpt_aoi_simulate(p, 1_000, 1, WptAoiWindow::FullHorizon, &mut sim) };
    assert_eq!(status, WptAoiStatus::NoSuccesses);
    assert!(sim.is_null());
    unsafe { wpt_aoi_params_free(p) };
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/wpt_aoi.h")).unwrap();
    for name in [
        "WPT_AOI_H",
        "WPT_AOI_STATUS_OK",
        "WPT_AOI_WINDOW_FULL_HORIZON",
        "typedef struct WptAoiParams WptAoiParams",
        "typedef struct WptAoiSimulation WptAoiSimulation",
        "wpt_aoi_last_error_message",
        "wpt_aoi_dbm_to_watts",
        "wpt_aoi_channel_rate_from_distance",
        "wpt_aoi_average_aoi",
        "wpt_aoi_params_new",
        "wpt_aoi_params_reference",
        "wpt_aoi_params_set_capacitor",
        "wpt_aoi_params_free",
        "wpt_aoi_analyze",
        "wpt_aoi_optimize",
        "wpt_aoi_simulate",
        "wpt_aoi_simulation_stats",
        "wpt_aoi_simulation_recharge_count",
        "wpt_aoi_simulation_interarrival_count",
        "wpt_aoi_simulation_recharges",
        "wpt_aoi_simulation_interarrivals",
        "wpt_aoi_simulation_free",
    ] {
        assert!(header.contains(name), "header is missing {name}");
    }
}
