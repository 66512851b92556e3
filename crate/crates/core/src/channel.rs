//! Domain types shared by the rate formulas, the region geometry and the
//! Monte Carlo validator.
//!
//! All powers are linear (not dB). Rates are in bits per channel use.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// The shared additive Gaussian channel: total in-band noise power and the
/// (normalized) bandwidth it occupies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    noise_power: f64,
    bandwidth: f64,
}

impl ChannelConfig {
    pub fn new(noise_power: f64, bandwidth: f64) -> Result<Self> {
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(domain(format!(
                "noise power must be positive and finite, got {noise_power}"
            )));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(domain(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Self {
            noise_power,
            bandwidth,
        })
    }

    /// Channel with unit normalized bandwidth.
    pub fn with_noise(noise_power: f64) -> Result<Self> {
        Self::new(noise_power, 1.0)
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Converts a rate in bits per channel use into bits per second.
    pub fn throughput(&self, rate: f64) -> f64 {
        rate * self.bandwidth
    }
}

/// The two power-constraint models: fixed per-user powers, or only a cap on
/// the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerBudget {
    PerUser { p1: f64, p2: f64 },
    SumPower { p_total: f64 },
}

impl PowerBudget {
    pub fn per_user(p1: f64, p2: f64) -> Result<Self> {
        let b = PowerBudget::PerUser { p1, p2 };
        b.validate()?;
        Ok(b)
    }

    pub fn sum_power(p_total: f64) -> Result<Self> {
        let b = PowerBudget::SumPower { p_total };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PowerBudget::PerUser { p1, p2 } => {
                check_power(p1)?;
                check_power(p2)
            }
            PowerBudget::SumPower { p_total } => check_power(p_total),
        }
    }

    /// Total transmitted power under this budget.
    pub fn total(&self) -> f64 {
        match *self {
            PowerBudget::PerUser { p1, p2 } => p1 + p2,
            PowerBudget::SumPower { p_total } => p_total,
        }
    }
}

pub(crate) fn check_power(p: f64) -> Result<()> {
    if !p.is_finite() {
        return Err(domain(format!("power must be finite, got {p}")));
    }
    if p < 0.0 {
        return Err(domain(format!("power must be nonnegative, got {p}")));
    }
    Ok(())
}

/// An achievable `(R1, R2)` point in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        for r in [r1, r2] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(domain(format!(
                    "rate must be nonnegative and finite, got {r}"
                )));
            }
        }
        Ok(Self { r1, r2 })
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }

    pub fn swapped(&self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
        }
    }

    pub fn distance(&self, other: &RatePair) -> f64 {
        (self.r1 - other.r1).hypot(self.r2 - other.r2)
    }
}

/// Fraction `alpha` of a shared resource given to user 1; user 2 gets the
/// remaining `1 - alpha`.
///
/// Depending on the scheme, the resource is time (TD), bandwidth (FD), or
/// transmit power (superposition under a sum-power budget).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceSplit(f64);

impl ResourceSplit {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(domain(format!(
                "resource split must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.0
    }

    pub fn complement(&self) -> f64 {
        1.0 - self.0
    }

    /// `resolution` evenly spaced splits from 0 to 1, both endpoints exact.
    pub fn uniform_grid(resolution: usize) -> Vec<ResourceSplit> {
        match resolution {
            0 => Vec::new(),
            1 => vec![ResourceSplit(0.0)],
            n => {
                let last = (n - 1) as f64;
                (0..n)
                    .map(|j| ResourceSplit(if j == n - 1 { 1.0 } else { j as f64 / last }))
                    .collect()
            }
        }
    }
}

/// Multiple-access scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Superposition coding with successive interference cancellation.
    #[serde(rename = "sc")]
    Superposition,
    #[serde(rename = "td")]
    TimeDivision,
    #[serde(rename = "fd")]
    FrequencyDivision,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::Superposition,
        Scheme::TimeDivision,
        Scheme::FrequencyDivision,
    ];

    pub fn short_name(&self) -> &'static str {
        match self {
            Scheme::Superposition => "sc",
            Scheme::TimeDivision => "td",
            Scheme::FrequencyDivision => "fd",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_rejects_bad_noise() {
        assert!(ChannelConfig::with_noise(0.0).is_err());
        assert!(ChannelConfig::with_noise(-1.0).is_err());
        assert!(ChannelConfig::with_noise(f64::NAN).is_err());
        assert!(ChannelConfig::with_noise(f64::INFINITY).is_err());
        assert!(ChannelConfig::new(1.0, 0.0).is_err());
        assert_eq!(ChannelConfig::with_noise(2.0).unwrap().bandwidth(), 1.0);
    }

    #[test]
    fn budget_validation() {
        assert!(PowerBudget::per_user(1.0, 0.0).is_ok());
        let err = PowerBudget::per_user(-1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("power must be nonnegative"));
        assert!(PowerBudget::sum_power(f64::NAN).is_err());
        assert_eq!(PowerBudget::per_user(1.0, 3.0).unwrap().total(), 4.0);
    }

    #[test]
    fn split_bounds() {
        assert!(ResourceSplit::new(0.0).is_ok());
        assert!(ResourceSplit::new(1.0).is_ok());
        assert!(ResourceSplit::new(1.0 + 1e-12).is_err());
        assert!(ResourceSplit::new(-0.1).is_err());
        assert!(ResourceSplit::new(f64::NAN).is_err());
    }

    #[test]
    fn uniform_grid_endpoints_exact() {
        let g = ResourceSplit::uniform_grid(4097);
        assert_eq!(g.len(), 4097);
        assert_eq!(g[0].alpha(), 0.0);
        assert_eq!(g[2048].alpha(), 0.5);
        assert_eq!(g[4096].alpha(), 1.0);
        assert!(g.windows(2).all(|w| w[0].alpha() < w[1].alpha()));
    }

    #[test]
    fn rate_pair_rejects_negative() {
        assert!(RatePair::new(-1e-3, 0.0).is_err());
        assert!(RatePair::new(0.0, f64::INFINITY).is_err());
    }
}
