//! Physical scenario of a wireless-powered sensor link and the two
//! dimensionless statistics that drive its age of information.
//!
//! All quantities are linear SI units. The slot length is one time unit, so
//! an energy in joules and a power in watts are interchangeable; dBm appears
//! only at the interface boundary via [`dbm_to_watts`].

use serde::{Deserialize, Serialize};

use crate::error::{domain, require_non_negative, require_positive, Result};

/// Path-loss constant used for the exponential channel rate `c0 * d^alpha`.
pub const DEFAULT_PATH_LOSS_C0: f64 = 1e3;
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.2;
pub const DEFAULT_DISTANCE_M: f64 = 20.0;
pub const DEFAULT_NOISE_DBM: f64 = -50.0;
pub const DEFAULT_EFFICIENCY: f64 = 0.5;
pub const DEFAULT_RATE_BPCU: f64 = 0.05;

pub fn dbm_to_watts(x_dbm: f64) -> f64 {
    10f64.powf((x_dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Exponential rate of the channel power gain at distance `d_m`.
pub fn channel_rate_from_distance(d_m: f64, alpha: f64, c0: f64) -> Result<f64> {
    require_positive("distance", d_m)?;
    require_positive("path-loss exponent", alpha)?;
    require_positive("path-loss constant", c0)?;
    Ok(c0 * d_m.powf(alpha))
}

/// Distance-based description of the channel rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    pub distance_m: f64,
    pub alpha: f64,
    pub c0: f64,
}

impl PathLoss {
    pub fn new(distance_m: f64, alpha: f64) -> Self {
        PathLoss { distance_m, alpha, c0: DEFAULT_PATH_LOSS_C0 }
    }

    pub fn channel_rate(&self) -> Result<f64> {
        channel_rate_from_distance(self.distance_m, self.alpha, self.c0)
    }
}

/// Picks the channel rate from a direct value or a path-loss description.
///
/// A direct rate always wins. When both are supplied the returned warning
/// says so; callers decide where to report it.
pub fn resolve_channel_rate(direct: Option<f64>, path_loss: Option<PathLoss>) -> Result<(f64, Option<String>)> {
    match (direct, path_loss) {
        (Some(rate), None) => Ok((require_positive("channel rate", rate)?, None)),
        (Some(rate), Some(pl)) => {
            let rate = require_positive("channel rate", rate)?;
            let warning = format!(
                "channel rate {rate} given directly; ignoring distance {} m (alpha {})",
                pl.distance_m, pl.alpha
            );
            Ok((rate, Some(warning)))
        }
        (None, Some(pl)) => Ok((pl.channel_rate()?, None)),
        (None, None) => Err(domain("either a channel rate or a distance is required")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Energy-transmitter power P (W).
    pub power_w: f64,
    /// RF-to-DC conversion efficiency, in (0, 1].
    pub efficiency: f64,
    /// Receiver noise variance (W).
    pub noise_w: f64,
    /// Spectral efficiency r (bits per channel use). Zero is accepted and
    /// makes every transmission succeed.
    pub rate_bpcu: f64,
    /// Capacitor size B (J); also the energy spent per transmission.
    pub capacitor_j: f64,
    /// Exponential rate shared by the harvesting and data channel gains.
    pub channel_rate: f64,
}

impl SystemParams {
    pub fn new(
        power_w: f64,
        efficiency: f64,
        noise_w: f64,
        rate_bpcu: f64,
        capacitor_j: f64,
        channel_rate: f64,
    ) -> Result<Self> {
        let params = SystemParams { power_w, efficiency, noise_w, rate_bpcu, capacitor_j, channel_rate };
        params.validate()?;
        Ok(params)
    }

    /// Scenario with the evaluation defaults: -50 dBm noise, efficiency 0.5,
    /// r = 0.05 BPCU and a 20 m link with path-loss exponent 2.2.
    pub fn reference(power_w: f64, capacitor_j: f64) -> Result<Self> {
        let channel_rate = PathLoss::new(DEFAULT_DISTANCE_M, DEFAULT_PATH_LOSS_EXPONENT).channel_rate()?;
        Self::new(
            power_w,
            DEFAULT_EFFICIENCY,
            dbm_to_watts(DEFAULT_NOISE_DBM),
            DEFAULT_RATE_BPCU,
            capacitor_j,
            channel_rate,
        )
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("power", self.power_w)?;
        require_positive("efficiency", self.efficiency)?;
        if self.efficiency > 1.0 {
            return Err(domain(format!("efficiency must not exceed 1, got {}", self.efficiency)));
        }
        require_positive("noise power", self.noise_w)?;
        require_non_negative("rate", self.rate_bpcu)?;
        require_positive("capacitor size", self.capacitor_j)?;
        require_positive("channel rate", self.channel_rate)?;
        Ok(())
    }

    pub fn with_capacitor(self, capacitor_j: f64) -> Self {
        SystemParams { capacitor_j, ..self }
    }

    pub fn with_power(self, power_w: f64) -> Self {
        SystemParams { power_w, ..self }
    }

    pub fn with_rate(self, rate_bpcu: f64) -> Self {
        SystemParams { rate_bpcu, ..self }
    }

    pub fn with_channel_rate(self, channel_rate: f64) -> Self {
        SystemParams { channel_rate, ..self }
    }

    /// Mean energy harvested per slot, `efficiency * power / channel_rate`.
    pub fn mean_harvest_j(&self) -> f64 {
        self.efficiency * self.power_w / self.channel_rate
    }

    /// Minimum data-channel gain that decodes at rate r with the full
    /// capacitor as transmit energy.
    pub fn decode_threshold(&self) -> f64 {
        (2f64.powf(self.rate_bpcu) - 1.0) * self.noise_w / self.capacitor_j
    }
}

/// The sufficient statistics of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Mean number of extra slots needed to fill the capacitor.
    pub beta: f64,
    /// Per-attempt decoding probability.
    pub pi: f64,
}

pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    params.validate()?;
    let beta = params.channel_rate * params.capacitor_j / (params.efficiency * params.power_w);
    let pi = crate::analytics::success_probability(
        params.channel_rate,
        params.rate_bpcu,
        params.noise_w,
        params.capacitor_j,
    )?;
    if pi <= 0.0 {
        return Err(domain(format!(
            "success probability underflows to zero at capacitor size {} J",
            params.capacitor_j
        )));
    }
    Ok(DerivedParams { beta, pi })
}
