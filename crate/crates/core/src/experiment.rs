//! Parameter sweeps and analytic-versus-simulation validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, AnalyticReport};
use crate::error::{domain, Error, Result};
use crate::model::{derive, PathLoss, SystemParams};
use crate::optimizer::{optimize_capacitor, Boundary, DEFAULT_BRACKET, DEFAULT_TOL_REL};
use crate::simulator::{batch_ci, run, SimConfig, SimStats, DEFAULT_BATCHES};

/// Relative tolerance for the simulated average age in validation reports.
pub const DELTA_TOLERANCE: f64 = 0.01;
/// Relative tolerance for simulated moments in validation reports.
pub const MOMENT_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptField {
    CapacitorJ,
    PowerW,
    RateBpcu,
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SystemParams,
    pub swept_field: SweptField,
    pub values: Vec<f64>,
    pub with_simulation: bool,
    pub horizon_slots: u64,
    pub seed: u64,
    /// Path-loss model applied to each value of a distance sweep.
    pub path_loss: PathLoss,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.values.is_empty() {
            return Err(domain("sweep needs at least one value"));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(domain("sweep values must be finite and positive"));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("sweep values must be strictly ascending"));
        }
        Ok(())
    }

    fn params_at(&self, value: f64) -> Result<SystemParams> {
        let p = match self.swept_field {
            SweptField::CapacitorJ => self.base.with_capacitor(value),
            SweptField::PowerW => self.base.with_power(value),
            SweptField::RateBpcu => self.base.with_rate(value),
            SweptField::Distance => {
                let pl = PathLoss { distance_m: value, ..self.path_loss };
                self.base.with_channel_rate(pl.channel_rate()?)
            }
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub swept_value: f64,
    pub rate_bpcu: Option<f64>,
    pub beta: f64,
    pub pi: f64,
    pub delta_analytic: f64,
    pub delta_sim: Option<f64>,
    pub delta_sim_ci: Option<f64>,
    pub b_star: Option<f64>,
    pub delta_star: Option<f64>,
    /// Why an optional value is missing or suspect.
    pub flag: Option<String>,
}

impl SweepRow {
    /// `|delta_sim - delta_analytic| / delta_analytic`, when simulated.
    pub fn sim_rel_error(&self) -> Option<f64> {
        self.delta_sim.map(|s| (s - self.delta_analytic).abs() / self.delta_analytic)
    }
}

/// Per-point seed: the sweep seed offset by the point index.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

fn simulate_into(row: &mut SweepRow, params: SystemParams, horizon: u64, seed: u64) -> Result<()> {
    match run(&SimConfig::new(params, horizon, seed)) {
        Ok(r) => {
            row.delta_sim = Some(r.stats.delta_hat);
            row.delta_sim_ci = r.stats.delta_ci_half;
            Ok(())
        }
        Err(Error::NoSuccesses(c)) => {
            row.flag = Some(format!(
                "no-successes: {} successes, {} recharges in {} slots",
                c.n_successes, c.n_recharges, c.n_slots
            ));
            Ok(())
        }
        Err(e) => Err(e),
    }
}

/// Analytic (and optionally simulated) average age at each swept value.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.values
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let params = spec.params_at(value)?;
            let d = derive(&params)?;
            let mut row = SweepRow {
                swept_value: value,
                rate_bpcu: Some(params.rate_bpcu),
                beta: d.beta,
                pi: d.pi,
                delta_analytic: analytics::average_aoi(d.beta, d.pi)?,
                delta_sim: None,
                delta_sim_ci: None,
                b_star: None,
                delta_star: None,
                flag: None,
            };
            if spec.with_simulation {
                simulate_into(&mut row, params, spec.horizon_slots, point_seed(spec.seed, i))?;
            }
            Ok(row)
        })
        .collect()
}

pub fn sweep_aoi_vs_capacitor(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.swept_field != SweptField::CapacitorJ {
        return Err(domain("capacitor sweep requires swept_field = capacitor_j"));
    }
    sweep(spec)
}

/// Minimum average age over B for every (rate, power) pair. Rows are grouped
/// by rate in the order given, powers ascending within each group.
pub fn sweep_min_aoi_vs_power(spec: &SweepSpec, r_values: &[f64]) -> Result<Vec<SweepRow>> {
    if spec.swept_field != SweptField::PowerW {
        return Err(domain("minimum-age sweep requires swept_field = power_w"));
    }
    spec.validate()?;
    if r_values.is_empty() {
        return Err(domain("minimum-age sweep needs at least one rate"));
    }
    let pairs: Vec<(f64, f64)> = r_values.iter().flat_map(|&r| spec.values.iter().map(move |&p| (r, p))).collect();
    pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(rate, power))| {
            let base = spec.base.with_power(power).with_rate(rate);
            base.validate()?;
            let opt = optimize_capacitor(&base, DEFAULT_BRACKET.0, DEFAULT_BRACKET.1, DEFAULT_TOL_REL)?;
            let at_opt = base.with_capacitor(opt.b_star_j);
            let d = derive(&at_opt)?;
            let mut row = SweepRow {
                swept_value: power,
                rate_bpcu: Some(rate),
                beta: d.beta,
                pi: d.pi,
                delta_analytic: opt.delta_star,
                delta_sim: None,
                delta_sim_ci: None,
                b_star: Some(opt.b_star_j),
                delta_star: Some(opt.delta_star),
                flag: opt.boundary.map(|b| match b {
                    Boundary::Lower => "optimum at lower bracket bound".to_string(),
                    Boundary::Upper => "optimum at upper bracket bound".to_string(),
                }),
            };
            if spec.with_simulation {
                simulate_into(&mut row, at_opt, spec.horizon_slots, point_seed(spec.seed, i))?;
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub quantity: String,
    pub analytic: f64,
    pub empirical: Option<f64>,
    pub ci_half: Option<f64>,
    pub rel_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: SystemParams,
    pub horizon_slots: u64,
    pub seed: u64,
    pub analytic: AnalyticReport,
    pub stats: Option<SimStats>,
    pub rows: Vec<ValidationRow>,
    /// Set when the simulation could not be measured at all.
    pub failure: Option<String>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.failure.is_none() && self.rows.iter().all(|r| r.pass)
    }
}

fn validation_row(quantity: &str, analytic: f64, empirical: f64, ci_half: Option<f64>, tol: f64) -> ValidationRow {
    let rel = (empirical - analytic).abs() / analytic;
    ValidationRow {
        quantity: quantity.to_string(),
        analytic,
        empirical: Some(empirical),
        ci_half,
        rel_error: Some(rel),
        tolerance: tol,
        pass: rel < tol,
    }
}

fn squares_ci(values: &[u64]) -> Option<f64> {
    let sq: Vec<f64> = values.iter().map(|&v| (v as f64) * (v as f64)).collect();
    batch_ci(&sq, DEFAULT_BATCHES).ok().map(|(_, h)| h)
}

pub fn validation_report(params: &SystemParams, horizon: u64, seed: u64) -> Result<ValidationReport> {
    let analytic = analytics::analyze(params)?;
    let targets = [
        ("E(T)", analytic.e_t, MOMENT_TOLERANCE),
        ("E(T^2)", analytic.e_t2, MOMENT_TOLERANCE),
        ("E(X)", analytic.e_x, MOMENT_TOLERANCE),
        ("E(X^2)", analytic.e_x2, MOMENT_TOLERANCE),
        ("Delta", analytic.delta, DELTA_TOLERANCE),
    ];
    let mut report = ValidationReport {
        params: *params,
        horizon_slots: horizon,
        seed,
        analytic,
        stats: None,
        rows: Vec::new(),
        failure: None,
    };
    match run(&SimConfig::new(*params, horizon, seed)) {
        Ok(r) => {
            let s = r.stats;
            let empirical = [
                (s.t_samples_mean, s.t_mean_ci_half),
                (s.t_samples_m2, squares_ci(&r.cycles.t)),
                (s.x_samples_mean, s.x_mean_ci_half),
                (s.x_samples_m2, squares_ci(&r.cycles.x)),
                (s.delta_hat, s.delta_ci_half),
            ];
            report.rows =
                targets.iter().zip(empirical).map(|(&(q, a, tol), (e, ci))| validation_row(q, a, e, ci, tol)).collect();
            report.stats = Some(s);
        }
        Err(Error::NoSuccesses(c)) => {
            report.failure = Some(format!(
                "no-successes: {} successes, {} recharges in {} slots",
                c.n_successes, c.n_recharges, c.n_slots
            ));
            report.rows = targets
                .iter()
                .map(|&(q, a, tol)| ValidationRow {
                    quantity: q.to_string(),
                    analytic: a,
                    empirical: None,
                    ci_half: None,
                    rel_error: None,
                    tolerance: tol,
                    pass: false,
                })
                .collect();
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}
