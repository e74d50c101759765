//! C ABI over the `wpt-aoi` toolkit.
//!
//! Every fallible call returns a [`WptAoiStatus`] and writes its result
//! through an out-pointer. Parameter sets and simulation runs are opaque
//! handles owned by the caller and released with their `_free` function.
//! The message of the most recent failure on the calling thread is
//! available from [`wpt_aoi_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use wpt_aoi::analytics;
use wpt_aoi::model::{self, SystemParams};
use wpt_aoi::optimizer;
use wpt_aoi::simulator::{self, SimConfig, SimRun, Window};
use wpt_aoi::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WptAoiStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 3,
    NoSuccesses = 4,
    Internal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WptAoiWindow {
    FirstSuccessToLastSuccess = 0,
    FullHorizon = 1,
}

/// Opaque parameter set.
pub struct WptAoiParams {
    inner: SystemParams,
}

/// Opaque simulation result.
pub struct WptAoiSimulation {
    inner: SimRun,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WptAoiAnalytic {
    pub beta: f64,
    pub pi: f64,
    pub e_t: f64,
    pub e_t2: f64,
    pub e_x: f64,
    pub e_x2: f64,
    pub e_q: f64,
    pub delta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WptAoiOptResult {
    pub b_star_j: f64,
    pub delta_star: f64,
    pub evaluations: u64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub converged: bool,
    /// 0 interior, -1 lower bound, +1 upper bound.
    pub boundary: i32,
}

/// Summary statistics of a run. Confidence half-widths are NaN when there
/// were too few samples to form them.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct WptAoiSimStats {
    pub delta_hat: f64,
    pub delta_ci_half: f64,
    pub t_samples_mean: f64,
    pub t_samples_m2: f64,
    pub x_samples_mean: f64,
    pub x_samples_m2: f64,
    pub m_mean: f64,
    pub n_recharges: u64,
    pub n_successes: u64,
    pub n_slots_measured: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> WptAoiStatus {
    match err {
        Error::Domain(_) | Error::MalformedLog(_) => WptAoiStatus::Domain,
        Error::NoSuccesses(_) => WptAoiStatus::NoSuccesses,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => WptAoiStatus::Internal,
    }
}

fn guard<F>(f: F) -> WptAoiStatus
where
    F: FnOnce() -> Result<(), WptAoiStatus> + UnwindSafe,
{
    match catch_unwind(f) {
        Ok(Ok(())) => WptAoiStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("panic inside wpt_aoi".to_string());
            WptAoiStatus::Panic
        }
    }
}

fn check<T>(r: wpt_aoi::Result<T>) -> Result<T, WptAoiStatus> {
    r.map_err(|e| {
        set_last_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), WptAoiStatus> {
    if p.is_null() {
        set_last_error(format!("{name} is NULL"));
        Err(WptAoiStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length, or 0
/// when there is no error recorded.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

#[no_mangle]
pub extern "C" fn wpt_aoi_dbm_to_watts(x_dbm: f64) -> f64 {
    model::dbm_to_watts(x_dbm)
}

/// # Safety
/// `out` must be a valid pointer to an `f64`.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_channel_rate_from_distance(
    d_m: f64,
    alpha: f64,
    c0: f64,
    out: *mut f64,
) -> WptAoiStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(model::channel_rate_from_distance(d_m, alpha, c0))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer to an `f64`.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_average_aoi(beta: f64, pi: f64, out: *mut f64) -> WptAoiStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = check(analytics::average_aoi(beta, pi))?;
        Ok(())
    })
}

/// Creates a parameter set. Powers and capacitor sizes are linear (W, J).
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to free
/// with [`wpt_aoi_params_free`].
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_params_new(
    power_w: f64,
    efficiency: f64,
    noise_w: f64,
    rate_bpcu: f64,
    capacitor_j: f64,
    channel_rate: f64,
    out: *mut *mut WptAoiParams,
) -> WptAoiStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = check(SystemParams::new(power_w, efficiency, noise_w, rate_bpcu, capacitor_j, channel_rate))?;
        *out = Box::into_raw(Box::new(WptAoiParams { inner }));
        Ok(())
    })
}

/// Parameter set with the reference link (-50 dBm noise, efficiency 0.5,
/// 0.05 BPCU, 20 m at path-loss exponent 2.2).
///
/// # Safety
/// As for [`wpt_aoi_params_new`].
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_params_reference(
    power_w: f64,
    capacitor_j: f64,
    out: *mut *mut WptAoiParams,
) -> WptAoiStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = check(SystemParams::reference(power_w, capacitor_j))?;
        *out = Box::into_raw(Box::new(WptAoiParams { inner }));
        Ok(())
    })
}

/// # Safety
/// `params` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_params_set_capacitor(params: *mut WptAoiParams, capacitor_j: f64) -> WptAoiStatus {
    guard(|| {
        non_null(params, "params")?;
        let p = &mut *params;
        let updated = p.inner.with_capacitor(capacitor_j);
        check(updated.validate())?;
        p.inner = updated;
        Ok(())
    })
}

/// # Safety
/// `params` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_params_free(params: *mut WptAoiParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// # Safety
/// `params` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_analyze(params: *const WptAoiParams, out: *mut WptAoiAnalytic) -> WptAoiStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        let r = check(analytics::analyze(&(*params).inner))?;
        *out = WptAoiAnalytic {
            beta: r.beta,
            pi: r.pi,
            e_t: r.e_t,
            e_t2: r.e_t2,
            e_x: r.e_x,
            e_x2: r.e_x2,
            e_q: r.e_q,
            delta: r.delta,
        };
        Ok(())
    })
}

/// Minimizes the average age over the capacitor size in `[b_lo, b_hi]`.
/// The capacitor stored in `params` is ignored.
///
/// # Safety
/// `params` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_optimize(
    params: *const WptAoiParams,
    b_lo: f64,
    b_hi: f64,
    tol_rel: f64,
    out: *mut WptAoiOptResult,
) -> WptAoiStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        let r = check(optimizer::optimize_capacitor(&(*params).inner, b_lo, b_hi, tol_rel))?;
        *out = WptAoiOptResult {
            b_star_j: r.b_star_j,
            delta_star: r.delta_star,
            evaluations: r.evaluations as u64,
            bracket_lo: r.bracket.0,
            bracket_hi: r.bracket.1,
            converged: r.converged,
            boundary: match r.boundary {
                None => 0,
                Some(optimizer::Boundary::Lower) => -1,
                Some(optimizer::Boundary::Upper) => 1,
            },
        };
        Ok(())
    })
}

/// Runs the slot-level simulation.
///
/// # Safety
/// `params` must be a valid handle and `out` a valid pointer; on success it
/// receives a handle to free with [`wpt_aoi_simulation_free`].
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_simulate(
    params: *const WptAoiParams,
    horizon_slots: u64,
    seed: u64,
    window: WptAoiWindow,
    out: *mut *mut WptAoiSimulation,
) -> WptAoiStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        let window = match window {
            WptAoiWindow::FirstSuccessToLastSuccess => Window::FirstSuccessToLastSuccess,
            WptAoiWindow::FullHorizon => Window::FullHorizon,
        };
        let config = SimConfig { window, ..SimConfig::new((*params).inner, horizon_slots, seed) };
        let inner = check(simulator::run(&config))?;
        *out = Box::into_raw(Box::new(WptAoiSimulation { inner }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_simulation_stats(
    sim: *const WptAoiSimulation,
    out: *mut WptAoiSimStats,
) -> WptAoiStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        let s = (*sim).inner.stats;
        *out = WptAoiSimStats {
            delta_hat: s.delta_hat,
            delta_ci_half: s.delta_ci_half.unwrap_or(f64::NAN),
            t_samples_mean: s.t_samples_mean,
            t_samples_m2: s.t_samples_m2,
            x_samples_mean: s.x_samples_mean,
            x_samples_m2: s.x_samples_m2,
            m_mean: s.m_mean,
            n_recharges: s.n_recharges,
            n_successes: s.n_successes,
            n_slots_measured: s.n_slots_measured,
        };
        Ok(())
    })
}

/// Number of recharge intervals recorded by the run.
///
/// # Safety
/// `sim` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_simulation_recharge_count(sim: *const WptAoiSimulation) -> usize {
    if sim.is_null() {
        return 0;
    }
    (*sim).inner.cycles.t.len()
}

/// Number of delivered-update interarrival intervals recorded by the run.
///
/// # Safety
/// `sim` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_simulation_interarrival_count(sim: *const WptAoiSimulation) -> usize {
    if sim.is_null() {
        return 0;
    }
    (*sim).inner.cycles.x.len()
}

unsafe fn copy_samples(src: &[u64], buf: *mut u64, len: usize, written: *mut usize) -> Result<(), WptAoiStatus> {
    non_null(buf, "buf")?;
    let n = src.len().min(len);
    ptr::copy_nonoverlapping(src.as_ptr(), buf, n);
    if !written.is_null() {
        *written = n;
    }
    Ok(())
}

/// Copies up to `len` recharge intervals (slots) into `buf`.
///
/// # Safety
/// `sim` must be a valid handle, `buf` must point to `len` writable values,
/// and `written` must be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_simulation_recharges(
    sim: *const WptAoiSimulation,
    buf: *mut u64,
    len: usize,
    written: *mut usize,
) -> WptAoiStatus {
    guard(|| {
        non_null(sim, "sim")?;
        copy_samples(&(*sim).inner.cycles.t, buf, len, written)
    })
}

/// Copies up to `len` interarrival intervals (slots) into `buf`.
///
/// # Safety
/// As for [`wpt_aoi_simulation_recharges`].
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_simulation_interarrivals(
    sim: *const WptAoiSimulation,
    buf: *mut u64,
    len: usize,
    written: *mut usize,
) -> WptAoiStatus {
    guard(|| {
        non_null(sim, "sim")?;
        copy_samples(&(*sim).inner.cycles.x, buf, len, written)
    })
}

/// # Safety
/// `sim` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wpt_aoi_simulation_free(sim: *mut WptAoiSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
