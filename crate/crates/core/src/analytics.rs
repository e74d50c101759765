//! Closed-form age-of-information analysis of the greedy
//! charge-then-transmit policy.
//!
//! Everything here is a function of two numbers: `beta`, the mean number of
//! extra slots needed to fill the capacitor, and `pi`, the per-attempt
//! decoding probability. The recharge time T satisfies `T - 1 ~ Poisson(beta)`
//! and the interarrival time X between delivered updates is a
//! Geometric(`pi`) sum of independent recharge times.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, require_non_negative, require_positive, require_probability, Result};
use crate::model::{derive, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub beta: f64,
    pub pi: f64,
    pub e_t: f64,
    pub e_t2: f64,
    pub e_x: f64,
    pub e_x2: f64,
    pub e_q: f64,
    pub delta: f64,
}

/// Probability that filling the capacitor takes exactly `k` slots, i.e. the
/// Poisson(`beta`) mass at `k - 1`.
///
/// Evaluated in log space. For small `k - 1` the log-gamma form
/// `(k-1) ln beta - beta - ln Gamma(k)` is used directly; beyond that the log
/// mass is split into the Stirling error of `(k-1)!` and the deviance
/// `x ln(x / beta) + beta - x`, which avoids the cancellation between terms
/// of size `k ln beta` and keeps the result accurate for `beta` up to 1e6
/// and beyond.
pub fn recharge_pmf(beta: f64, k: u64) -> Result<f64> {
    require_non_negative("beta", beta)?;
    if k < 1 {
        return Err(domain("recharge slot count k must be at least 1"));
    }
    let x = (k - 1) as f64;
    if beta == 0.0 {
        return Ok(if k == 1 { 1.0 } else { 0.0 });
    }
    if k == 1 {
        return Ok((-beta).exp());
    }
    if x <= STIRLING_SERIES_MIN {
        return Ok((x * beta.ln() - beta - ln_gamma(k as f64)).exp());
    }
    let log_mass = -stirling_error(x) - deviance(x, beta) - 0.5 * (2.0 * std::f64::consts::PI * x).ln();
    Ok(log_mass.exp())
}

const STIRLING_SERIES_MIN: f64 = 15.0;

/// `ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)]` for `n > 15`.
fn stirling_error(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nn = n * n;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// `x ln(x / mean) + mean - x`, summed as a series when `x` is near `mean`.
fn deviance(x: f64, mean: f64) -> f64 {
    if (x - mean).abs() < 0.1 * (x + mean) {
        let v = (x - mean) / (x + mean);
        let mut sum = (x - mean) * v;
        let mut term = 2.0 * x * v;
        let v2 = v * v;
        for j in 1.. {
            term *= v2;
            let next = sum + term / (2 * j + 1) as f64;
            if next == sum {
                break;
            }
            sum = next;
        }
        sum
    } else {
        x * (x / mean).ln() + mean - x
    }
}

/// Series truncation point used when summing over the recharge PMF:
/// `ceil(beta + 50 sqrt(beta) + 50)`.
pub fn series_truncation(beta: f64) -> u64 {
    (beta + 50.0 * beta.sqrt() + 50.0).ceil() as u64
}

/// First and second moments of the recharge time.
pub fn recharge_moments(beta: f64) -> Result<(f64, f64)> {
    require_non_negative("beta", beta)?;
    Ok((1.0 + beta, 1.0 + 3.0 * beta + beta * beta))
}

/// Decoding probability under Rayleigh fading when the whole capacitor is
/// spent on one channel use.
pub fn success_probability(channel_rate: f64, rate_bpcu: f64, noise_w: f64, capacitor_j: f64) -> Result<f64> {
    require_positive("channel rate", channel_rate)?;
    require_non_negative("rate", rate_bpcu)?;
    require_positive("noise power", noise_w)?;
    require_positive("capacitor size", capacitor_j)?;
    Ok((-channel_rate * (2f64.powf(rate_bpcu) - 1.0) * noise_w / capacitor_j).exp())
}

/// First and second moments of the interarrival time between delivered
/// updates.
pub fn interarrival_moments(beta: f64, pi: f64) -> Result<(f64, f64)> {
    let (e_t, e_t2) = recharge_moments(beta)?;
    require_probability("success probability", pi)?;
    let e_x = e_t / pi;
    let e_x2 = e_t2 / pi + 2.0 * e_t * e_t * (1.0 - pi) / (pi * pi);
    Ok((e_x, e_x2))
}

/// Mean area under the age staircase between two deliveries.
pub fn mean_peak_area(e_x: f64, e_x2: f64) -> Result<f64> {
    if !(e_x.is_finite() && e_x2.is_finite() && e_x >= 1.0 && e_x2 >= e_x) {
        return Err(domain(format!(
            "interarrival moments need E(X^2) >= E(X) >= 1, got E(X) = {e_x}, E(X^2) = {e_x2}"
        )));
    }
    Ok((e_x2 + e_x) / 2.0)
}

pub fn average_aoi(beta: f64, pi: f64) -> Result<f64> {
    require_non_negative("beta", beta)?;
    require_probability("success probability", pi)?;
    let recharge_term = (1.0 + 3.0 * beta + beta * beta) / (2.0 * (1.0 + beta));
    let retry_term = (1.0 + beta) * (1.0 - pi) / pi;
    Ok(recharge_term + retry_term + 0.5)
}

/// Limit of the average age when power grows with the capacitor fixed.
pub fn aoi_limit_fixed_capacitor(pi: f64) -> Result<f64> {
    require_probability("success probability", pi)?;
    Ok(1.0 / pi)
}

/// Limit of the average age when power and capacitor both grow with
/// `capacitor / power = theta`.
pub fn aoi_limit_ratio(theta: f64, channel_rate: f64, efficiency: f64) -> Result<f64> {
    require_non_negative("theta", theta)?;
    require_positive("channel rate", channel_rate)?;
    require_positive("efficiency", efficiency)?;
    let c = channel_rate * theta / efficiency;
    Ok((1.0 + 3.0 * c + c * c) / (2.0 * (1.0 + c)) + 0.5)
}

pub fn report(beta: f64, pi: f64) -> Result<AnalyticReport> {
    let (e_t, e_t2) = recharge_moments(beta)?;
    let (e_x, e_x2) = interarrival_moments(beta, pi)?;
    let e_q = mean_peak_area(e_x, e_x2)?;
    let delta = average_aoi(beta, pi)?;
    Ok(AnalyticReport { beta, pi, e_t, e_t2, e_x, e_x2, e_q, delta })
}

pub fn analyze(params: &SystemParams) -> Result<AnalyticReport> {
    let d = derive(params)?;
    report(d.beta, d.pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Direct series evaluation, independent of the closed forms.
    fn series_moments(beta: f64) -> (f64, f64) {
        let kmax = series_truncation(beta);
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for k in 1..=kmax {
            let p = recharge_pmf(beta, k).unwrap();
            m1 += k as f64 * p;
            m2 += (k * k) as f64 * p;
        }
        (m1, m2)
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(recharge_pmf(0.0, 1).unwrap(), 1.0);
        assert_eq!(recharge_pmf(0.0, 4).unwrap(), 0.0);
        assert_relative_eq!(recharge_pmf(1.0, 2).unwrap(), 0.367_879_441_171_442_3, max_relative = 1e-13);
        assert_relative_eq!(recharge_pmf(2.0, 3).unwrap(), 0.270_670_566_473_225_4, max_relative = 1e-13);
        assert!(recharge_pmf(1.0, 0).is_err());
        assert!(recharge_pmf(-1.0, 1).is_err());
        let far = recharge_pmf(1e6, 1_000_001).unwrap();
        assert!(far.is_finite() && far > 0.0);
    }

    #[test]
    fn pmf_matches_exponential_partial_sum_event() {
        // Monte Carlo over the underlying event: k-1 exponential(1) partial
        // sums stay below beta and the k-th crosses it.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let beta = 2.0;
        let n = 400_000;
        let mut hits = 0u32;
        for _ in 0..n {
            let draws: [f64; 3] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
            let partial = draws[0] + draws[1];
            if partial < beta && partial + draws[2] >= beta {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        let p = recharge_pmf(beta, 3).unwrap();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p_hat - p).abs() < 4.0 * sigma, "{p_hat} vs {p}");
    }

    #[test]
    fn recharge_moment_examples() {
        assert_eq!(recharge_moments(0.0).unwrap(), (1.0, 1.0));
        assert_eq!(recharge_moments(1.0).unwrap(), (2.0, 5.0));
        assert_eq!(recharge_moments(2.0).unwrap(), (3.0, 11.0));
        assert!(recharge_moments(-0.1).is_err());
        for beta in [1.0, 2.0, 17.5, 300.0] {
            let (s1, s2) = series_moments(beta);
            let (m1, m2) = recharge_moments(beta).unwrap();
            assert_relative_eq!(s1, m1, max_relative = 1e-10);
            assert_relative_eq!(s2, m2, max_relative = 1e-10);
        }
    }

    #[test]
    fn success_probability_examples() {
        assert_eq!(success_probability(1.0, 0.0, 1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(success_probability(1.0, 1.0, 1.0, 1.0).unwrap(), (-1f64).exp());
        let lambda = 728_225.681_210_432;
        assert_relative_eq!(
            success_probability(lambda, 0.05, 1e-8, 3e-4).unwrap(),
            0.424_846_462_7,
            max_relative = 1e-9
        );
        assert!(success_probability(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(success_probability(1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn interarrival_examples() {
        assert_eq!(interarrival_moments(0.0, 1.0).unwrap(), (1.0, 1.0));
        assert_eq!(interarrival_moments(2.0, 1.0).unwrap(), (3.0, 11.0));
        assert_eq!(interarrival_moments(1.0, 0.5).unwrap(), (4.0, 26.0));
        assert!(interarrival_moments(1.0, 0.0).is_err());
        assert!(interarrival_moments(1.0, 1.5).is_err());
    }

    #[test]
    fn interarrival_matches_geometric_sum_monte_carlo() {
        // X = sum of Geometric(pi) copies of 1 + Poisson(beta), sampled directly.
        let (beta, pi) = (1.0, 0.5);
        let poisson = rand_distr::Poisson::new(beta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let mut x = 0.0;
            loop {
                let t: f64 = rand_distr::Distribution::sample(&poisson, &mut rng);
                x += 1.0 + t;
                if rng.random::<f64>() < pi {
                    break;
                }
            }
            s1 += x;
            s2 += x * x;
        }
        let (e_x, e_x2) = interarrival_moments(beta, pi).unwrap();
        assert_relative_eq!(s1 / n as f64, e_x, max_relative = 0.01);
        assert_relative_eq!(s2 / n as f64, e_x2, max_relative = 0.03);
    }

    #[test]
    fn peak_area_examples() {
        assert_eq!(mean_peak_area(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(mean_peak_area(3.0, 11.0).unwrap(), 7.0);
        assert_eq!(mean_peak_area(4.0, 26.0).unwrap(), 15.0);
        assert!(mean_peak_area(0.5, 1.0).is_err());
        assert!(mean_peak_area(3.0, 2.0).is_err());
    }

    #[test]
    fn average_aoi_examples() {
        assert_eq!(average_aoi(0.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(average_aoi(1.0, 0.5).unwrap(), 3.75, max_relative = 1e-15);
        assert_relative_eq!(average_aoi(2.0, 1.0).unwrap(), 11.0 / 6.0 + 0.5, max_relative = 1e-15);
        assert!(average_aoi(1.0, 0.0).is_err());
        assert!(average_aoi(-1.0, 0.5).is_err());
    }

    #[test]
    fn limit_examples() {
        assert_eq!(aoi_limit_fixed_capacitor(1.0).unwrap(), 1.0);
        assert_eq!(aoi_limit_fixed_capacitor(0.5).unwrap(), 2.0);
        assert!((average_aoi(1e-9, 0.5).unwrap() - 2.0).abs() < 1e-6);
        assert!(aoi_limit_fixed_capacitor(0.0).is_err());

        assert_eq!(aoi_limit_ratio(0.0, 3.0, 0.5).unwrap(), 1.0);
        assert_relative_eq!(aoi_limit_ratio(0.5, 1.0, 0.5).unwrap(), 1.75);
        assert_relative_eq!(aoi_limit_ratio(1.0, 1.0, 0.5).unwrap(), average_aoi(2.0, 1.0).unwrap());
        assert!(aoi_limit_ratio(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn shifted_poisson_identity() {
        for beta in [0.3, 4.0, 150.0] {
            let poisson = statrs::distribution::Poisson::new(beta).unwrap();
            for k in 1..=series_truncation(beta).min(400) {
                let expected = statrs::distribution::Discrete::pmf(&poisson, k - 1);
                let got = recharge_pmf(beta, k).unwrap();
                assert!((got - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-300, "beta {beta} k {k}");
            }
        }
    }

    #[test]
    fn monotone_on_grid() {
        let betas = [0.0, 0.5, 2.0, 10.0, 150.0, 1e4];
        let pis = [0.02, 0.1, 0.4, 0.8, 1.0];
        for &b in &betas {
            for w in pis.windows(2) {
                assert!(average_aoi(b, w[0]).unwrap() > average_aoi(b, w[1]).unwrap());
            }
        }
        for &p in &pis {
            for w in betas.windows(2) {
                assert!(average_aoi(w[0], p).unwrap() < average_aoi(w[1], p).unwrap());
            }
        }
    }

    #[test]
    fn ratio_limit_reached_as_pi_tends_to_one() {
        let beta = 3.0;
        let lim = aoi_limit_ratio(beta, 1.0, 1.0).unwrap();
        let gaps: Vec<f64> =
            [0.9, 0.99, 0.999, 0.999_999].iter().map(|&pi| (average_aoi(beta, pi).unwrap() - lim).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(gaps[3] < 1e-5);
    }

    #[test]
    fn analyze_reference_point() {
        let r = analyze(&SystemParams::reference(3.0, 3e-4).unwrap()).unwrap();
        // 30-digit evaluation of the closed form at beta 145.645..., pi 0.42485...
        assert_relative_eq!(r.delta, 272.8461, max_relative = 1e-6);
        assert_relative_eq!(r.e_x, r.e_t / r.pi, max_relative = 1e-15);
    }
}
