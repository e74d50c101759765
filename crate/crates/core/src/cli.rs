//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 domain error,
//! 4 simulation without enough successful updates.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytics::{analyze, AnalyticReport};
use crate::error::{Error, Result};
use crate::experiment::{
    sweep_aoi_vs_capacitor, sweep_min_aoi_vs_power, validation_report, SweepRow, SweepSpec, SweptField,
};
use crate::model::{
    dbm_to_watts, resolve_channel_rate, PathLoss, SystemParams, DEFAULT_DISTANCE_M, DEFAULT_EFFICIENCY,
    DEFAULT_NOISE_DBM, DEFAULT_PATH_LOSS_C0, DEFAULT_PATH_LOSS_EXPONENT, DEFAULT_RATE_BPCU,
};
use crate::optimizer::{log_grid, optimize_capacitor, OptResult, DEFAULT_BRACKET, DEFAULT_TOL_REL};
use crate::output::{fmt_f64, write_json, write_record_csv, write_sweep_csv};
use crate::simulator::{run, write_trace, SimConfig, SimStats, Window};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NO_SUCCESS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "wpt-aoi", version, about = "Average age of information of a wireless-powered sensor link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form moments and average age at one operating point.
    Analytic {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        capacitor_j: f64,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Slot-level Monte Carlo at one operating point.
    Simulate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        capacitor_j: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum, default_value_t = WindowArg::Success)]
        window: WindowArg,
        /// Write a per-slot CSV trace to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Capacitor size minimizing the average age.
    Optimize {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value_t = DEFAULT_BRACKET.0)]
        b_lo: f64,
        #[arg(long, default_value_t = DEFAULT_BRACKET.1)]
        b_hi: f64,
        #[arg(long, default_value_t = DEFAULT_TOL_REL)]
        tol_rel: f64,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Average age versus capacitor size.
    SweepB {
        #[command(flatten)]
        scenario: Scenario,
        /// Explicit capacitor sizes (J), ascending.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["b_min", "b_max"])]
        b_values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-5)]
        b_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        b_max: f64,
        #[arg(long, default_value_t = 61)]
        points: usize,
        #[arg(long)]
        with_simulation: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Minimum average age versus transmit power, one group per rate.
    SweepP {
        #[command(flatten)]
        scenario: ScenarioNoPower,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 3.0, 5.0, 10.0])]
        p_values: Vec<f64>,
        /// Rates (BPCU) to sweep; defaults to --rate-bpcu.
        #[arg(long, value_delimiter = ',')]
        r_values: Option<Vec<f64>>,
        #[arg(long)]
        with_simulation: bool,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Closed form versus simulation, with pass/fail per quantity.
    Validate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        capacitor_j: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        io: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct Scenario {
    #[arg(long)]
    power_w: f64,
    #[command(flatten)]
    link: LinkArgs,
}

#[derive(Debug, Args)]
struct ScenarioNoPower {
    #[command(flatten)]
    link: LinkArgs,
}

#[derive(Debug, Args)]
struct LinkArgs {
    #[arg(long, default_value_t = DEFAULT_EFFICIENCY)]
    efficiency: f64,
    #[arg(long, default_value_t = DEFAULT_NOISE_DBM, allow_negative_numbers = true)]
    noise_dbm: f64,
    #[arg(long, default_value_t = DEFAULT_RATE_BPCU)]
    rate_bpcu: f64,
    /// Link distance (m); default 20.
    #[arg(long)]
    distance_m: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PATH_LOSS_EXPONENT)]
    alpha: f64,
    /// Channel-gain rate; overrides --distance-m.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value_t = 10_000_000)]
    horizon: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WindowArg {
    /// First success to last success.
    Success,
    Full,
}

impl LinkArgs {
    fn params(&self, power_w: f64, capacitor_j: f64) -> Result<SystemParams> {
        let path_loss = match (self.distance_m, self.lambda) {
            (Some(d), _) => Some(PathLoss { distance_m: d, alpha: self.alpha, c0: DEFAULT_PATH_LOSS_C0 }),
            (None, None) => Some(PathLoss::new(DEFAULT_DISTANCE_M, self.alpha)),
            (None, Some(_)) => None,
        };
        let (channel_rate, warning) = resolve_channel_rate(self.lambda, path_loss)?;
        if let Some(w) = warning {
            eprintln!("warning: {w}");
        }
        SystemParams::new(
            power_w,
            self.efficiency,
            dbm_to_watts(self.noise_dbm),
            self.rate_bpcu,
            capacitor_j,
            channel_rate,
        )
    }

    fn path_loss(&self) -> PathLoss {
        PathLoss {
            distance_m: self.distance_m.unwrap_or(DEFAULT_DISTANCE_M),
            alpha: self.alpha,
            c0: DEFAULT_PATH_LOSS_C0,
        }
    }
}

// Capacitor placeholder for commands that search over B.
const UNUSED_CAPACITOR: f64 = 1.0;

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

#[derive(Serialize)]
struct AnalyticOutput<'a> {
    params: &'a SystemParams,
    #[serde(flatten)]
    report: &'a AnalyticReport,
}

#[derive(Serialize)]
struct SimOutput<'a> {
    params: &'a SystemParams,
    horizon_slots: u64,
    seed: u64,
    #[serde(flatten)]
    stats: &'a SimStats,
}

#[derive(Serialize)]
struct OptOutput<'a> {
    params: &'a SystemParams,
    #[serde(flatten)]
    result: &'a OptResult,
}

fn opt_field(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn emit_sweep(rows: &[SweepRow], io: &OutputArgs) -> Result<()> {
    for r in rows {
        if let Some(flag) = &r.flag {
            eprintln!("warning: swept value {}: {flag}", fmt_f64(r.swept_value));
        }
    }
    let out = open_out(&io.out)?;
    match io.format.unwrap_or(Format::Csv) {
        Format::Csv => write_sweep_csv(rows, out),
        Format::Json => write_json(&rows, out),
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Analytic { scenario, capacitor_j, io } => {
            let params = scenario.link.params(scenario.power_w, capacitor_j)?;
            let report = analyze(&params)?;
            let out = open_out(&io.out)?;
            match io.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&AnalyticOutput { params: &params, report: &report }, out)?,
                Format::Csv => write_record_csv(
                    &[
                        ("beta", fmt_f64(report.beta)),
                        ("pi", fmt_f64(report.pi)),
                        ("e_t", fmt_f64(report.e_t)),
                        ("e_t2", fmt_f64(report.e_t2)),
                        ("e_x", fmt_f64(report.e_x)),
                        ("e_x2", fmt_f64(report.e_x2)),
                        ("e_q", fmt_f64(report.e_q)),
                        ("delta", fmt_f64(report.delta)),
                    ],
                    out,
                )?,
            }
        }
        Command::Simulate { scenario, capacitor_j, sim, window, trace, io } => {
            let params = scenario.link.params(scenario.power_w, capacitor_j)?;
            let window = match window {
                WindowArg::Success => Window::FirstSuccessToLastSuccess,
                WindowArg::Full => Window::FullHorizon,
            };
            let config = SimConfig { window, ..SimConfig::new(params, sim.horizon, sim.seed) };
            let result = match trace {
                Some(path) => write_trace(&config, BufWriter::new(File::create(path)?))?,
                None => run(&config)?,
            };
            let s = result.stats;
            let out = open_out(&io.out)?;
            match io.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &SimOutput { params: &params, horizon_slots: sim.horizon, seed: sim.seed, stats: &s },
                    out,
                )?,
                Format::Csv => write_record_csv(
                    &[
                        ("delta_hat", fmt_f64(s.delta_hat)),
                        ("delta_ci_half", opt_field(s.delta_ci_half)),
                        ("t_samples_mean", fmt_f64(s.t_samples_mean)),
                        ("t_samples_m2", fmt_f64(s.t_samples_m2)),
                        ("x_samples_mean", fmt_f64(s.x_samples_mean)),
                        ("x_samples_m2", fmt_f64(s.x_samples_m2)),
                        ("m_mean", fmt_f64(s.m_mean)),
                        ("n_recharges", s.n_recharges.to_string()),
                        ("n_successes", s.n_successes.to_string()),
                        ("n_slots_measured", s.n_slots_measured.to_string()),
                    ],
                    out,
                )?,
            }
        }
        Command::Optimize { scenario, b_lo, b_hi, tol_rel, io } => {
            let params = scenario.link.params(scenario.power_w, UNUSED_CAPACITOR)?;
            let result = optimize_capacitor(&params, b_lo, b_hi, tol_rel)?;
            if !result.converged {
                eprintln!("warning: optimizer did not converge (boundary: {:?})", result.boundary);
            }
            let out = open_out(&io.out)?;
            match io.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&OptOutput { params: &params, result: &result }, out)?,
                Format::Csv => write_record_csv(
                    &[
                        ("b_star_j", fmt_f64(result.b_star_j)),
                        ("delta_star", fmt_f64(result.delta_star)),
                        ("evaluations", result.evaluations.to_string()),
                        ("bracket_lo", fmt_f64(result.bracket.0)),
                        ("bracket_hi", fmt_f64(result.bracket.1)),
                        ("converged", result.converged.to_string()),
                    ],
                    out,
                )?,
            }
        }
        Command::SweepB { scenario, b_values, b_min, b_max, points, with_simulation, sim, io } => {
            let base = scenario.link.params(scenario.power_w, UNUSED_CAPACITOR)?;
            let values = match b_values {
                Some(v) => v,
                None => {
                    if !(b_min > 0.0 && b_max > b_min && points >= 1) {
                        return Err(Error::Domain("need 0 < b-min < b-max and at least one point".into()));
                    }
                    log_grid(b_min, b_max, points)
                }
            };
            let spec = SweepSpec {
                base,
                swept_field: SweptField::CapacitorJ,
                values,
                with_simulation,
                horizon_slots: sim.horizon,
                seed: sim.seed,
                path_loss: scenario.link.path_loss(),
            };
            emit_sweep(&sweep_aoi_vs_capacitor(&spec)?, &io)?;
        }
        Command::SweepP { scenario, p_values, r_values, with_simulation, sim, io } => {
            let first_power = p_values.first().copied().unwrap_or(1.0);
            let base = scenario.link.params(first_power, UNUSED_CAPACITOR)?;
            let rates = r_values.unwrap_or_else(|| vec![scenario.link.rate_bpcu]);
            let spec = SweepSpec {
                base,
                swept_field: SweptField::PowerW,
                values: p_values,
                with_simulation,
                horizon_slots: sim.horizon,
                seed: sim.seed,
                path_loss: scenario.link.path_loss(),
            };
            emit_sweep(&sweep_min_aoi_vs_power(&spec, &rates)?, &io)?;
        }
        Command::Validate { scenario, capacitor_j, sim, io } => {
            let params = scenario.link.params(scenario.power_w, capacitor_j)?;
            let report = validation_report(&params, sim.horizon, sim.seed)?;
            let out = open_out(&io.out)?;
            match io.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&report, out)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(out);
                    w.write_record(["quantity", "analytic", "empirical", "ci_half", "rel_error", "tolerance", "pass"])?;
                    for r in &report.rows {
                        w.write_record([
                            r.quantity.clone(),
                            fmt_f64(r.analytic),
                            opt_field(r.empirical),
                            opt_field(r.ci_half),
                            opt_field(r.rel_error),
                            fmt_f64(r.tolerance),
                            r.pass.to_string(),
                        ])?;
                    }
                    w.flush()?;
                }
            }
            if let Some(f) = &report.failure {
                eprintln!("error: {f}");
                return Ok(EXIT_NO_SUCCESS);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) => EXIT_DOMAIN,
                Error::NoSuccesses(_) => EXIT_NO_SUCCESS,
                Error::MalformedLog(_) => EXIT_DOMAIN,
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_required_flag_is_usage_error() {
        assert_eq!(run_cli(["wpt-aoi", "analytic", "--capacitor-j", "3e-4"]), EXIT_USAGE);
        assert_eq!(run_cli(["wpt-aoi", "optimize"]), EXIT_USAGE);
        assert_eq!(run_cli(["wpt-aoi", "bogus"]), EXIT_USAGE);
    }

    #[test]
    fn domain_error_exit_code() {
        assert_eq!(run_cli(["wpt-aoi", "analytic", "--power-w=-3", "--capacitor-j", "3e-4"]), EXIT_DOMAIN);
        assert_eq!(
            run_cli(["wpt-aoi", "analytic", "--power-w", "3", "--capacitor-j", "3e-4", "--efficiency", "2"]),
            EXIT_DOMAIN
        );
    }

    #[test]
    fn help_is_not_an_error() {
        assert_eq!(run_cli(["wpt-aoi", "--help"]), EXIT_OK);
    }
}
