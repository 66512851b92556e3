//! Scalar rate formulas for the two-user Gaussian multiple-access channel.
//!
//! Every function validates its inputs and is otherwise total. Logarithms
//! are base 2, so rates come out in bits per channel use. Formulas go
//! through `ln_1p` so they stay accurate at very low SNR.

use std::f64::consts::LN_2;

use crate::channel::{check_power, ChannelConfig, PowerBudget, RatePair, ResourceSplit, Scheme};
use crate::error::{domain, Result};

/// `log2(1 + x)` for `x >= 0`.
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Single-user AWGN capacity `log2(1 + p / N)`.
pub fn shannon_rate(p: f64, ch: &ChannelConfig) -> Result<f64> {
    check_power(p)?;
    Ok(log2_1p(p / ch.noise_power()))
}

/// Largest total rate the two users can share: `log2(1 + (P1 + P2) / N)`
/// for per-user budgets, `log2(1 + P / N)` for a sum-power budget.
pub fn sum_capacity(budget: &PowerBudget, ch: &ChannelConfig) -> Result<f64> {
    budget.validate()?;
    shannon_rate(budget.total(), ch)
}

/// Rate of a user decoded while another user's signal of power
/// `p_interference` is still present and treated as noise.
pub fn sic_rate(p_decode: f64, p_interference: f64, ch: &ChannelConfig) -> Result<f64> {
    check_power(p_decode)?;
    check_power(p_interference)?;
    Ok(log2_1p(p_decode / (p_interference + ch.noise_power())))
}

/// The two SIC corner points of the per-user pentagon.
///
/// The first corner decodes user 2 first (treating user 1 as noise), giving
/// `(C1, C2*)`; the second decodes user 1 first, giving `(C1*, C2)`.
pub fn corner_points(budget: &PowerBudget, ch: &ChannelConfig) -> Result<(RatePair, RatePair)> {
    let (p1, p2) = per_user_powers(budget)?;
    let c1 = shannon_rate(p1, ch)?;
    let c2 = shannon_rate(p2, ch)?;
    let c2_star = sic_rate(p2, p1, ch)?;
    let c1_star = sic_rate(p1, p2, ch)?;
    Ok((
        RatePair {
            r1: c1,
            r2: c2_star,
        },
        RatePair {
            r1: c1_star,
            r2: c2,
        },
    ))
}

/// Time-division rate pair: user 1 transmits for a fraction `alpha` of the
/// time. Under a sum-power budget the active user uses the whole budget.
pub fn td_rate_pair(
    split: ResourceSplit,
    budget: &PowerBudget,
    ch: &ChannelConfig,
) -> Result<RatePair> {
    let split = ResourceSplit::new(split.alpha())?;
    budget.validate()?;
    let (c1, c2) = match *budget {
        PowerBudget::PerUser { p1, p2 } => (shannon_rate(p1, ch)?, shannon_rate(p2, ch)?),
        PowerBudget::SumPower { p_total } => {
            let c = shannon_rate(p_total, ch)?;
            (c, c)
        }
    };
    Ok(RatePair {
        r1: split.alpha() * c1,
        r2: split.complement() * c2,
    })
}

/// `fraction * log2(1 + p / (fraction * N))`: rate of a user confined to a
/// sub-band of relative width `fraction`, whose noise scales with it.
/// At `fraction = 0` the limit value 0 is returned.
fn subband_rate(fraction: f64, p: f64, ch: &ChannelConfig) -> f64 {
    if fraction <= 0.0 {
        return 0.0;
    }
    let snr = p / (fraction * ch.noise_power());
    if snr.is_finite() {
        fraction * log2_1p(snr)
    } else {
        // fraction underflows the division; log2(1 + x) ~ log2(x) here.
        fraction * (p.ln() - fraction.ln() - ch.noise_power().ln()) / LN_2
    }
}

/// Frequency-division rate pair: user 1 gets a fraction `alpha` of the band.
///
/// With per-user powers each user concentrates its full power on its own
/// sub-band. Under a sum-power budget each user also gets the matching
/// fraction of the power, so the SNR on both sub-bands is `P / N` and the
/// pair coincides with the time-division pair.
pub fn fd_rate_pair(
    split: ResourceSplit,
    budget: &PowerBudget,
    ch: &ChannelConfig,
) -> Result<RatePair> {
    let split = ResourceSplit::new(split.alpha())?;
    budget.validate()?;
    match *budget {
        PowerBudget::PerUser { p1, p2 } => Ok(RatePair {
            r1: subband_rate(split.alpha(), p1, ch),
            r2: subband_rate(split.complement(), p2, ch),
        }),
        PowerBudget::SumPower { .. } => td_rate_pair(split, budget, ch),
    }
}

/// The bandwidth split at which frequency division reaches the sum capacity:
/// each user's share of the band equals its share of the power.
pub fn fd_touch_split(budget: &PowerBudget) -> Result<ResourceSplit> {
    let (p1, p2) = per_user_powers(budget)?;
    let total = p1 + p2;
    if total <= 0.0 {
        return Err(domain("touch split is undefined when both powers are zero"));
    }
    ResourceSplit::new(p1 / total)
}

/// Rate pair of `scheme` under a sum-power budget `p_total`.
///
/// For TD and FD `split` is the time/bandwidth fraction. For superposition
/// it is the power fraction given to user 1; user 2 is decoded first with
/// user 1 as interference, then user 1 is decoded interference-free.
pub fn sum_power_rate_pair(
    scheme: Scheme,
    split: ResourceSplit,
    p_total: f64,
    ch: &ChannelConfig,
) -> Result<RatePair> {
    let split = ResourceSplit::new(split.alpha())?;
    check_power(p_total)?;
    let budget = PowerBudget::SumPower { p_total };
    match scheme {
        Scheme::TimeDivision => td_rate_pair(split, &budget, ch),
        Scheme::FrequencyDivision => fd_rate_pair(split, &budget, ch),
        Scheme::Superposition => {
            let q1 = split.alpha() * p_total;
            let q2 = split.complement() * p_total;
            Ok(RatePair {
                r1: shannon_rate(q1, ch)?,
                r2: sic_rate(q2, q1, ch)?,
            })
        }
    }
}

/// Largest sum rate `scheme` can reach under `budget`.
pub fn max_sum_rate(scheme: Scheme, budget: &PowerBudget, ch: &ChannelConfig) -> Result<f64> {
    budget.validate()?;
    match (scheme, *budget) {
        (Scheme::TimeDivision, PowerBudget::PerUser { p1, p2 }) => {
            // alpha*C1 + (1-alpha)*C2 is linear in alpha.
            Ok(shannon_rate(p1, ch)?.max(shannon_rate(p2, ch)?))
        }
        (Scheme::FrequencyDivision, PowerBudget::PerUser { p1, p2 }) if p1 + p2 > 0.0 => {
            let pair = fd_rate_pair(fd_touch_split(budget)?, budget, ch)?;
            Ok(pair.sum())
        }
        _ => sum_capacity(budget, ch),
    }
}

fn per_user_powers(budget: &PowerBudget) -> Result<(f64, f64)> {
    budget.validate()?;
    match *budget {
        PowerBudget::PerUser { p1, p2 } => Ok((p1, p2)),
        PowerBudget::SumPower { .. } => Err(domain(
            "operation requires a per-user power budget, got a sum-power budget",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LOG2_1_5: f64 = 0.584_962_500_721_156_2;
    const LOG2_3: f64 = 1.584_962_500_721_156_2;

    fn unit() -> ChannelConfig {
        ChannelConfig::with_noise(1.0).unwrap()
    }

    fn per_user(p1: f64, p2: f64) -> PowerBudget {
        PowerBudget::per_user(p1, p2).unwrap()
    }

    fn split(a: f64) -> ResourceSplit {
        ResourceSplit::new(a).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shannon_rate_examples() {
        let ch = unit();
        assert_eq!(shannon_rate(1.0, &ch).unwrap(), 1.0);
        assert_eq!(shannon_rate(0.0, &ch).unwrap(), 0.0);
        assert_eq!(shannon_rate(3.0, &ch).unwrap(), 2.0);
        let n2 = ChannelConfig::with_noise(2.0).unwrap();
        assert!(close(shannon_rate(1.0, &n2).unwrap(), 0.5849625007, 1e-10));
    }

    #[test]
    fn shannon_rate_rejects_bad_power() {
        let ch = unit();
        assert!(shannon_rate(-1.0, &ch).is_err());
        assert!(shannon_rate(f64::NAN, &ch).is_err());
        assert!(shannon_rate(f64::INFINITY, &ch).is_err());
    }

    #[test]
    fn sum_capacity_examples() {
        let ch = unit();
        assert!(close(
            sum_capacity(&per_user(1.0, 1.0), &ch).unwrap(),
            LOG2_3,
            1e-15
        ));
        let sp = PowerBudget::sum_power(2.0).unwrap();
        assert!(close(sum_capacity(&sp, &ch).unwrap(), LOG2_3, 1e-15));
        assert_eq!(sum_capacity(&per_user(0.0, 0.0), &ch).unwrap(), 0.0);
        let bad = PowerBudget::PerUser { p1: -1.0, p2: 0.0 };
        assert!(sum_capacity(&bad, &ch).is_err());
    }

    #[test]
    fn sic_rate_examples() {
        let ch = unit();
        assert!(close(sic_rate(1.0, 1.0, &ch).unwrap(), LOG2_1_5, 1e-15));
        assert_eq!(sic_rate(0.0, 5.0, &ch).unwrap(), 0.0);
        assert!(close(sic_rate(2.0, 0.0, &ch).unwrap(), LOG2_3, 1e-15));
        assert!(sic_rate(1.0, -1.0, &ch).is_err());
    }

    #[test]
    fn corner_points_examples() {
        let ch = unit();
        let (a, b) = corner_points(&per_user(1.0, 1.0), &ch).unwrap();
        assert_eq!(a.r1, 1.0);
        assert!(close(a.r2, LOG2_1_5, 1e-15));
        assert!(close(b.r1, LOG2_1_5, 1e-15));
        assert_eq!(b.r2, 1.0);

        let (a, b) = corner_points(&per_user(1.0, 0.0), &ch).unwrap();
        assert_eq!((a.r1, a.r2), (1.0, 0.0));
        assert_eq!((b.r1, b.r2), (1.0, 0.0));

        let (a, b) = corner_points(&per_user(1.0, 3.0), &ch).unwrap();
        assert_eq!(a.r1, 1.0);
        assert!(close(a.r2, 1.3219280949, 1e-10));
        assert!(close(b.r1, 0.3219280949, 1e-10));
        assert_eq!(b.r2, 2.0);
        let log2_5 = 5f64.log2();
        assert!(close(a.sum(), log2_5, 1e-14));
        assert!(close(b.sum(), log2_5, 1e-14));
    }

    #[test]
    fn corner_points_rejects_sum_power() {
        let sp = PowerBudget::sum_power(2.0).unwrap();
        assert!(corner_points(&sp, &unit()).is_err());
    }

    #[test]
    fn td_examples() {
        let ch = unit();
        let b = per_user(1.0, 1.0);
        assert_eq!(
            td_rate_pair(split(0.5), &b, &ch).unwrap(),
            RatePair { r1: 0.5, r2: 0.5 }
        );
        assert_eq!(
            td_rate_pair(split(1.0), &b, &ch).unwrap(),
            RatePair { r1: 1.0, r2: 0.0 }
        );
        let sp = PowerBudget::sum_power(2.0).unwrap();
        let p = td_rate_pair(split(0.25), &sp, &ch).unwrap();
        assert!(close(p.r1, 0.3962406252, 1e-10));
        assert!(close(p.r2, 1.1887218755, 1e-10));
    }

    #[test]
    fn fd_examples() {
        let ch = unit();
        let p = fd_rate_pair(split(0.5), &per_user(1.0, 1.0), &ch).unwrap();
        assert!(close(p.r1, 0.7924812504, 1e-10));
        assert!(close(p.r2, 0.7924812504, 1e-10));
        let p = fd_rate_pair(split(0.0), &per_user(1.0, 1.0), &ch).unwrap();
        assert_eq!((p.r1, p.r2), (0.0, 1.0));
        let p = fd_rate_pair(split(0.25), &per_user(1.0, 3.0), &ch).unwrap();
        assert!(close(p.r1, 0.5804820237, 1e-10));
        assert!(close(p.r2, 1.7414460712, 1e-10));
    }

    #[test]
    fn fd_tiny_fraction_stays_finite() {
        let ch = unit();
        let a = ResourceSplit::new(1e-320).unwrap();
        let p = fd_rate_pair(a, &per_user(1.0, 1.0), &ch).unwrap();
        assert!(p.r1.is_finite() && p.r1 >= 0.0 && p.r1 < 1e-300);
    }

    #[test]
    fn touch_split_examples() {
        assert_eq!(fd_touch_split(&per_user(1.0, 1.0)).unwrap().alpha(), 0.5);
        assert_eq!(fd_touch_split(&per_user(1.0, 3.0)).unwrap().alpha(), 0.25);
        assert_eq!(fd_touch_split(&per_user(5.0, 0.0)).unwrap().alpha(), 1.0);
        assert!(fd_touch_split(&per_user(0.0, 0.0)).is_err());
        assert!(fd_touch_split(&PowerBudget::sum_power(1.0).unwrap()).is_err());
    }

    #[test]
    fn sum_power_examples() {
        let ch = unit();
        let p = sum_power_rate_pair(Scheme::Superposition, split(1.0), 2.0, &ch).unwrap();
        assert!(close(p.r1, LOG2_3, 1e-15));
        assert_eq!(p.r2, 0.0);
        let p = sum_power_rate_pair(Scheme::Superposition, split(0.5), 2.0, &ch).unwrap();
        assert_eq!(p.r1, 1.0);
        assert!(close(p.r2, LOG2_1_5, 1e-15));
        let p = sum_power_rate_pair(Scheme::TimeDivision, split(0.5), 2.0, &ch).unwrap();
        assert!(close(p.r1, 0.7924812504, 1e-10));
        assert!(close(p.r2, 0.7924812504, 1e-10));
        assert!(sum_power_rate_pair(Scheme::Superposition, split(0.5), -2.0, &ch).is_err());
    }

    #[test]
    fn max_sum_rate_per_scheme() {
        let ch = unit();
        let b = per_user(1.0, 3.0);
        let log2_5 = 5f64.log2();
        assert!(close(
            max_sum_rate(Scheme::Superposition, &b, &ch).unwrap(),
            log2_5,
            1e-14
        ));
        assert_eq!(max_sum_rate(Scheme::TimeDivision, &b, &ch).unwrap(), 2.0);
        assert!(close(
            max_sum_rate(Scheme::FrequencyDivision, &b, &ch).unwrap(),
            log2_5,
            1e-14
        ));
        assert_eq!(
            max_sum_rate(Scheme::FrequencyDivision, &per_user(0.0, 0.0), &ch).unwrap(),
            0.0
        );
    }

    fn log_uniform() -> impl Strategy<Value = f64> {
        (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
    }

    proptest! {
        #[test]
        fn chain_rule(p1 in log_uniform(), p2 in log_uniform(), n in log_uniform()) {
            let ch = ChannelConfig::with_noise(n).unwrap();
            let lhs = shannon_rate(p1, &ch).unwrap() + sic_rate(p2, p1, &ch).unwrap();
            let rhs = sum_capacity(&per_user(p1, p2), &ch).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }

        #[test]
        fn corner_symmetry(a in 0.0f64..100.0, b in 0.0f64..100.0, n in log_uniform()) {
            let ch = ChannelConfig::with_noise(n).unwrap();
            let (x1, x2) = corner_points(&per_user(a, b), &ch).unwrap();
            let (y1, y2) = corner_points(&per_user(b, a), &ch).unwrap();
            prop_assert_eq!(x1, y2.swapped());
            prop_assert_eq!(x2, y1.swapped());
        }

        #[test]
        fn fd_touch_reaches_sum_capacity(p1 in log_uniform(), p2 in log_uniform(), n in log_uniform()) {
            let ch = ChannelConfig::with_noise(n).unwrap();
            let b = per_user(p1, p2);
            let pair = fd_rate_pair(fd_touch_split(&b).unwrap(), &b, &ch).unwrap();
            let c = sum_capacity(&b, &ch).unwrap();
            prop_assert!((pair.sum() - c).abs() <= 1e-9 * c);
        }

        #[test]
        fn fd_dominates_td(p1 in log_uniform(), p2 in log_uniform(), n in log_uniform(), a in 0.001f64..0.999) {
            let ch = ChannelConfig::with_noise(n).unwrap();
            let b = per_user(p1, p2);
            let fd = fd_rate_pair(split(a), &b, &ch).unwrap();
            let td = td_rate_pair(split(a), &b, &ch).unwrap();
            prop_assert!(fd.r1 > td.r1 && fd.r2 > td.r2);
        }

        #[test]
        fn sum_power_flatness(p in log_uniform(), n in log_uniform(), a in 0.0f64..=1.0) {
            let ch = ChannelConfig::with_noise(n).unwrap();
            let c = shannon_rate(p, &ch).unwrap();
            for scheme in Scheme::ALL {
                let pair = sum_power_rate_pair(scheme, split(a), p, &ch).unwrap();
                prop_assert!((pair.sum() - c).abs() <= 1e-9 * c);
            }
        }

        #[test]
        fn monotonicity(p in log_uniform(), n in log_uniform(), i in log_uniform()) {
            let ch = ChannelConfig::with_noise(n).unwrap();
            let ch_noisier = ChannelConfig::with_noise(n * 1.5).unwrap();
            prop_assert!(shannon_rate(p * 1.5, &ch).unwrap() > shannon_rate(p, &ch).unwrap());
            prop_assert!(shannon_rate(p, &ch_noisier).unwrap() < shannon_rate(p, &ch).unwrap());
            prop_assert!(sic_rate(p, i * 1.5, &ch).unwrap() < sic_rate(p, i, &ch).unwrap());
        }

        #[test]
        fn endpoint_limits(p1 in log_uniform(), p2 in log_uniform(), n in log_uniform()) {
            let ch = ChannelConfig::with_noise(n).unwrap();
            let b = per_user(p1, p2);
            let c1 = shannon_rate(p1, &ch).unwrap();
            let c2 = shannon_rate(p2, &ch).unwrap();
            for f in [td_rate_pair, fd_rate_pair] {
                prop_assert_eq!(f(split(0.0), &b, &ch).unwrap(), RatePair { r1: 0.0, r2: c2 });
                prop_assert_eq!(f(split(1.0), &b, &ch).unwrap(), RatePair { r1: c1, r2: 0.0 });
            }
        }
    }
}
