//! Capacitor sizing: minimize the closed-form average age over B.
//!
//! The objective has no closed-form minimizer and its unimodality is not
//! guaranteed, so the search scans a logarithmic grid first and then
//! refines the best bracketing triple by golden-section search in `ln B`.

use serde::{Deserialize, Serialize};

use crate::analytics::{average_aoi, success_probability};
use crate::error::{domain, require_positive, Result};
use crate::model::SystemParams;

pub const DEFAULT_GRID_POINTS: usize = 256;
pub const DEFAULT_TOL_REL: f64 = 1e-6;
pub const DEFAULT_BRACKET: (f64, f64) = (1e-9, 1.0);
const MAX_GOLDEN_ITERATIONS: usize = 500;
// 1 / golden ratio
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub b_star_j: f64,
    pub delta_star: f64,
    pub evaluations: usize,
    pub bracket: (f64, f64),
    pub converged: bool,
    /// Set when the grid minimum sits on an end of the search interval.
    pub boundary: Option<Boundary>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub grid_points: usize,
    pub tol_rel: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions { grid_points: DEFAULT_GRID_POINTS, tol_rel: DEFAULT_TOL_REL }
    }
}

/// Average age as a function of capacitor size; `params.capacitor_j` is
/// ignored. Returns `+inf` where the decoding probability underflows.
pub fn objective(params: &SystemParams, b_j: f64) -> Result<f64> {
    require_positive("capacitor size", b_j)?;
    let p = params.with_capacitor(b_j);
    p.validate()?;
    let beta = p.channel_rate * b_j / (p.efficiency * p.power_w);
    let pi = success_probability(p.channel_rate, p.rate_bpcu, p.noise_w, b_j)?;
    if pi == 0.0 {
        return Ok(f64::INFINITY);
    }
    average_aoi(beta, pi)
}

/// `n` points spaced evenly in `ln B` over `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// Evaluates the objective at every point. Ties go to the smaller B.
pub fn grid_scan(params: &SystemParams, b_values: &[f64]) -> Result<(usize, Vec<f64>)> {
    if b_values.is_empty() {
        return Err(domain("grid scan needs at least one capacitor size"));
    }
    if b_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("grid scan capacitor sizes must be strictly ascending"));
    }
    let values = b_values.iter().map(|&b| objective(params, b)).collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    Ok((best, values))
}

pub fn optimize_capacitor(params: &SystemParams, b_lo: f64, b_hi: f64, tol_rel: f64) -> Result<OptResult> {
    optimize_capacitor_with(params, b_lo, b_hi, OptimizerOptions { tol_rel, ..Default::default() })
}

pub fn optimize_capacitor_with(
    params: &SystemParams,
    b_lo: f64,
    b_hi: f64,
    options: OptimizerOptions,
) -> Result<OptResult> {
    require_positive("lower capacitor bound", b_lo)?;
    require_positive("upper capacitor bound", b_hi)?;
    require_positive("relative tolerance", options.tol_rel)?;
    if b_lo >= b_hi {
        return Err(domain(format!("capacitor bracket [{b_lo}, {b_hi}] is empty")));
    }
    if options.grid_points < 3 {
        return Err(domain("coarse grid needs at least three points"));
    }

    let grid = log_grid(b_lo, b_hi, options.grid_points);
    let (best, values) = grid_scan(params, &grid)?;
    let mut evaluations = grid.len();
    let last = grid.len() - 1;

    let boundary = match best {
        0 => Some(Boundary::Lower),
        i if i == last => Some(Boundary::Upper),
        _ => None,
    };
    if let Some(side) = boundary {
        let bracket = match side {
            Boundary::Lower => (grid[0], grid[1]),
            Boundary::Upper => (grid[last - 1], grid[last]),
        };
        return Ok(OptResult {
            b_star_j: grid[best],
            delta_star: values[best],
            evaluations,
            bracket,
            converged: false,
            boundary,
        });
    }

    let f = |u: f64| objective(params, u.exp());
    let (mut a, mut b) = (grid[best - 1].ln(), grid[best + 1].ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    evaluations += 2;
    let mut converged = false;

    for _ in 0..MAX_GOLDEN_ITERATIONS {
        let centre = if fc <= fd { c } else { d };
        if (b.exp() - a.exp()) / centre.exp() < options.tol_rel {
            converged = true;
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }

    let (u_star, delta_star) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(OptResult {
        b_star_j: u_star.exp(),
        delta_star,
        evaluations,
        bracket: (a.exp(), b.exp()),
        converged,
        boundary: None,
    })
}

pub fn optimize_default(params: &SystemParams) -> Result<OptResult> {
    optimize_capacitor(params, DEFAULT_BRACKET.0, DEFAULT_BRACKET.1, DEFAULT_TOL_REL)
}
