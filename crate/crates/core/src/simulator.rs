//! Slot-level Monte Carlo of the charge-then-transmit sensor.
//!
//! Each slot draws the harvesting gain `h ~ Exp(lambda)`. The capacitor
//! evolves as `E_k = min(1[E_{k-1} < B] E_{k-1} + eta P h_k, B)`. A slot that
//! starts with a full capacitor is a transmit slot: it also draws the data
//! gain `g ~ Exp(lambda)` (after `h`, from the same stream) and the update
//! is decoded iff `g >= (2^r - 1) sigma^2 / B`. Harvesting continues into
//! the emptied capacitor during the transmit slot. The receiver's age is 1
//! in the slot of a successful decode and grows by one otherwise.
//!
//! Slot 0 is the initial state (`E_0 = 0`, age 1); simulated slots are
//! `1..=horizon_slots`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{domain, Error, Result, RunCounters};
use crate::model::SystemParams;

pub const DEFAULT_BATCHES: usize = 20;
pub const TRACE_HEADER: &str = "slot,harvest_j,energy_j,transmitted,success,age";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Window {
    /// Measure age from the first successful decode up to (excluding) the
    /// last one, so the window covers whole interarrival intervals.
    #[default]
    FirstSuccessToLastSuccess,
    /// Average age over every simulated slot.
    FullHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SystemParams,
    pub horizon_slots: u64,
    pub seed: u64,
    pub window: Window,
}

impl SimConfig {
    pub fn new(params: SystemParams, horizon_slots: u64, seed: u64) -> Self {
        SimConfig { params, horizon_slots, seed, window: Window::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.horizon_slots < 1 {
            return Err(domain("simulation horizon must be at least one slot"));
        }
        Ok(())
    }
}

/// State of one simulated slot, as written to the raw trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub slot: u64,
    pub harvest_j: f64,
    pub energy_j: f64,
    pub transmitted: bool,
    pub success: bool,
    pub age: u64,
}

/// A capacitor fill whose transmission attempt has been resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recharge {
    /// Slot in which the capacitor reached B.
    pub slot: u64,
    /// Outcome of the transmission in the following slot.
    pub success: bool,
}

/// Recharges in slot order. `origin` is the reference epoch from which the
/// first recharge interval is measured; it behaves as a fill followed by a
/// delivered update.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventLog {
    pub origin: u64,
    pub recharges: Vec<Recharge>,
}

/// Recharge intervals `t`, delivered-update interarrivals `x`, and attempts
/// per delivery `m`. Each `x[j]` is the sum of its `m[j]` consecutive `t`s.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cycles {
    pub t: Vec<u64>,
    pub x: Vec<u64>,
    pub m: Vec<u64>,
}

pub fn extract_cycles(log: &EventLog) -> Result<Cycles> {
    let mut cycles = Cycles::default();
    let mut prev = log.origin;
    let (mut acc_t, mut acc_m) = (0u64, 0u64);
    for (i, r) in log.recharges.iter().enumerate() {
        if r.slot <= prev {
            return Err(Error::MalformedLog(format!("recharge {i} at slot {} does not follow slot {prev}", r.slot)));
        }
        let t = r.slot - prev;
        cycles.t.push(t);
        acc_t += t;
        acc_m += 1;
        if r.success {
            cycles.x.push(acc_t);
            cycles.m.push(acc_m);
            acc_t = 0;
            acc_m = 0;
        }
        prev = r.slot;
    }
    Ok(cycles)
}

/// Total age area and slot count of whole interarrival intervals: each
/// interval of length X contributes `X (X + 1) / 2`.
pub fn staircase_area(x_intervals: &[u64]) -> (u128, u128) {
    x_intervals.iter().fold((0u128, 0u128), |(area, slots), &x| {
        let x = x as u128;
        (area + x * (x + 1) / 2, slots + x)
    })
}

/// Time-average age over whole interarrival intervals.
pub fn empirical_aoi(x_intervals: &[u64]) -> Result<f64> {
    if x_intervals.is_empty() {
        return Err(domain("empirical age needs at least one interarrival interval"));
    }
    if x_intervals.contains(&0) {
        return Err(domain("interarrival intervals must be at least one slot"));
    }
    let (area, slots) = staircase_area(x_intervals);
    Ok(area as f64 / slots as f64)
}

fn t_quantile_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64).expect("degrees of freedom are positive").inverse_cdf(0.975)
}

fn t_interval(batch_values: &[f64]) -> (f64, f64) {
    let n = batch_values.len();
    let mean = batch_values.iter().sum::<f64>() / n as f64;
    let var = batch_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, t_quantile_975(n - 1) * (var / n as f64).sqrt())
}

fn check_batches(len: usize, n_batches: usize) -> Result<usize> {
    if n_batches < 2 {
        return Err(domain("batch means need at least two batches"));
    }
    if len < n_batches {
        return Err(domain(format!("{len} samples cannot fill {n_batches} batches")));
    }
    Ok(len / n_batches)
}

/// Batch-means 95% confidence interval `(mean, half_width)`.
///
/// Samples are split into `n_batches` contiguous batches of equal size; a
/// remainder that does not fill a batch is dropped from the tail.
pub fn batch_ci(samples: &[f64], n_batches: usize) -> Result<(f64, f64)> {
    let size = check_batches(samples.len(), n_batches)?;
    let means: Vec<f64> =
        samples.chunks_exact(size).take(n_batches).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    Ok(t_interval(&means))
}

/// Batch-means interval for a ratio estimator `sum(num) / sum(den)`, with
/// one ratio per batch.
pub fn batch_ratio_ci(num: &[f64], den: &[f64], n_batches: usize) -> Result<(f64, f64)> {
    if num.len() != den.len() {
        return Err(domain("ratio batches need numerator and denominator of equal length"));
    }
    let size = check_batches(num.len(), n_batches)?;
    let ratios: Vec<f64> = num
        .chunks_exact(size)
        .zip(den.chunks_exact(size))
        .take(n_batches)
        .map(|(n, d)| n.iter().sum::<f64>() / d.iter().sum::<f64>())
        .collect();
    Ok(t_interval(&ratios))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    /// Empirical time-average age over the measurement window.
    pub delta_hat: f64,
    /// 95% batch-means half-width of `delta_hat`; absent with fewer
    /// delivered intervals than batches.
    pub delta_ci_half: Option<f64>,
    pub t_samples_mean: f64,
    pub t_samples_m2: f64,
    pub t_mean_ci_half: Option<f64>,
    pub x_samples_mean: f64,
    pub x_samples_m2: f64,
    pub x_mean_ci_half: Option<f64>,
    /// Mean transmission attempts per delivered update.
    pub m_mean: f64,
    pub n_recharges: u64,
    pub n_successes: u64,
    pub n_slots_measured: u64,
}

/// Everything a run produced, for callers that need more than the summary.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub stats: SimStats,
    pub log: EventLog,
    pub cycles: Cycles,
    /// Sum of per-slot ages over the measurement window.
    pub window_age_sum: u128,
    pub window_slots: u64,
    /// Slot of every successful decode.
    pub success_slots: Vec<u64>,
}

impl SimRun {
    /// Interarrival intervals lying wholly inside the success-to-success
    /// window (the first `x` is measured from the origin and is excluded).
    pub fn windowed_intervals(&self) -> &[u64] {
        self.cycles.x.get(1..).unwrap_or(&[])
    }
}

fn moments(values: &[u64]) -> (f64, f64) {
    let n = values.len() as f64;
    let (s1, s2) = values.iter().fold((0.0, 0.0), |(s1, s2), &v| {
        let v = v as f64;
        (s1 + v, s2 + v * v)
    });
    (s1 / n, s2 / n)
}

fn mean_ci(values: &[u64]) -> Option<f64> {
    let samples: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    batch_ci(&samples, DEFAULT_BATCHES).ok().map(|(_, h)| h)
}

/// Runs the slot loop, calling `observer` once per simulated slot.
pub fn run_observed<F>(config: &SimConfig, mut observer: F) -> Result<SimRun>
where
    F: FnMut(&SlotRecord),
{
    config.validate()?;
    let params = &config.params;
    let capacity = params.capacitor_j;
    let mean_harvest = params.mean_harvest_j();
    let threshold = params.decode_threshold();
    let lambda = params.channel_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Inverse transform on u in (0, 1].
    let mut unit_exp = move || -(1.0 - rng.random::<f64>()).ln();

    let mut energy = 0.0f64;
    let mut full = false;
    let mut age: u64 = 1;
    let mut age_sum: u128 = 0;
    let mut log = EventLog { origin: 0, recharges: Vec::new() };
    let mut success_slots = Vec::new();
    // age_sum just before each success slot, for the first and the latest.
    let mut first_success_mark: Option<u128> = None;
    let mut last_success_mark: u128 = 0;

    for slot in 1..=config.horizon_slots {
        let harvest = mean_harvest * unit_exp();
        let transmitted = full;
        let start = if full { 0.0 } else { energy };
        energy = (start + harvest).min(capacity);
        let mut success = false;
        if transmitted {
            let gain = unit_exp() / lambda;
            success = gain >= threshold;
            log.recharges.push(Recharge { slot: slot - 1, success });
        }
        if success {
            if first_success_mark.is_none() {
                first_success_mark = Some(age_sum);
            }
            last_success_mark = age_sum;
            success_slots.push(slot);
            age = 1;
        } else {
            age += 1;
        }
        age_sum += age as u128;
        full = energy >= capacity;
        observer(&SlotRecord { slot, harvest_j: harvest, energy_j: energy, transmitted, success, age });
    }

    let n_successes = success_slots.len() as u64;
    let n_recharges = log.recharges.len() as u64;
    let counters = RunCounters { n_slots: config.horizon_slots, n_recharges, n_successes };

    let (window_age_sum, window_slots) = match config.window {
        Window::FirstSuccessToLastSuccess => {
            if n_successes < 2 {
                return Err(Error::NoSuccesses(counters));
            }
            let first = first_success_mark.expect("at least two successes");
            (last_success_mark - first, success_slots[success_slots.len() - 1] - success_slots[0])
        }
        Window::FullHorizon => {
            if n_successes < 1 {
                return Err(Error::NoSuccesses(counters));
            }
            (age_sum, config.horizon_slots)
        }
    };

    let cycles = extract_cycles(&log)?;
    let (t_mean, t_m2) = moments(&cycles.t);
    let (x_mean, x_m2) = moments(&cycles.x);
    let m_mean = cycles.m.iter().sum::<u64>() as f64 / cycles.m.len() as f64;

    let genuine = cycles.x.get(1..).unwrap_or(&[]);
    let areas: Vec<f64> = genuine.iter().map(|&x| (x * (x + 1) / 2) as f64).collect();
    let lengths: Vec<f64> = genuine.iter().map(|&x| x as f64).collect();
    let delta_ci_half = batch_ratio_ci(&areas, &lengths, DEFAULT_BATCHES).ok().map(|(_, h)| h);

    let stats = SimStats {
        delta_hat: window_age_sum as f64 / window_slots as f64,
        delta_ci_half,
        t_samples_mean: t_mean,
        t_samples_m2: t_m2,
        t_mean_ci_half: mean_ci(&cycles.t),
        x_samples_mean: x_mean,
        x_samples_m2: x_m2,
        x_mean_ci_half: mean_ci(&cycles.x),
        m_mean,
        n_recharges,
        n_successes,
        n_slots_measured: window_slots,
    };
    Ok(SimRun { stats, log, cycles, window_age_sum, window_slots, success_slots })
}

pub fn run(config: &SimConfig) -> Result<SimRun> {
    run_observed(config, |_| {})
}

pub fn simulate(config: &SimConfig) -> Result<SimStats> {
    run(config).map(|r| r.stats)
}

/// Runs the simulation and writes one CSV row per slot to `out`.
pub fn write_trace<W: Write>(config: &SimConfig, out: W) -> Result<SimRun> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(TRACE_HEADER.split(','))?;
    let mut failure: Option<csv::Error> = None;
    let result = run_observed(config, |rec| {
        if failure.is_some() {
            return;
        }
        let row = [
            rec.slot.to_string(),
            rec.harvest_j.to_string(),
            rec.energy_j.to_string(),
            u8::from(rec.transmitted).to_string(),
            u8::from(rec.success).to_string(),
            rec.age.to_string(),
        ];
        if let Err(e) = writer.write_record(&row) {
            failure = Some(e);
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    writer.flush()?;
    result
}
