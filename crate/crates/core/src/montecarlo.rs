//! Monte Carlo check of the analytic rates.
//!
//! Samples the channel `y = x1 + x2 + n` with independent zero-mean Gaussian
//! inputs, removes users from `y` genie-style (the true signal is
//! subtracted), and estimates mutual information two ways: a Gaussian
//! plug-in estimator built from sample variances, and a distribution-free
//! Kozachenko-Leonenko k-nearest-neighbour entropy estimator.
//!
//! Each stored sample is one real dimension. A channel use carries two real
//! dimensions (in-phase and quadrature), which is what makes
//! `log2(1 + P/N)` the per-use rate; estimated mutual information is
//! therefore reported per channel use, i.e. twice the per-dimension value.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::channel::{check_power, ChannelConfig, PowerBudget};
use crate::error::{MacError, Result};
use crate::rates::{shannon_rate, sic_rate, sum_capacity};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_TOLERANCE: f64 = 0.01;
pub const DEFAULT_KNN_K: usize = 4;
/// Minimum sample count for the plug-in estimator.
pub const MIN_PLUGIN_SAMPLES: usize = 100;
/// Floor on the plug-in/kNN agreement tolerance, in bits.
pub const KNN_AGREEMENT_FLOOR: f64 = 0.02;
/// Width, in standard errors, of the residual-variance acceptance band.
pub const VARIANCE_SIGMAS: f64 = 5.0;

const REAL_DIMS_PER_USE: f64 = 2.0;

/// Determinism contract for one simulation run: `(seed, stream, m)` fixes
/// every sample bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub stream: u64,
    pub m: usize,
}

impl SampleConfig {
    pub fn new(seed: u64, stream: u64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(MacError::InsufficientSamples { needed: 2, got: m });
        }
        Ok(Self { seed, stream, m })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    x1: Vec<f64>,
    x2: Vec<f64>,
    y: Vec<f64>,
}

impl SampleBatch {
    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// The noise realization, `y - x1 - x2`.
    pub fn noise(&self) -> Vec<f64> {
        self.y
            .iter()
            .zip(self.x1.iter().zip(&self.x2))
            .map(|(y, (a, b))| y - a - b)
            .collect()
    }
}

/// Draws `cfg.m` channel uses of `y = x1 + x2 + n`.
///
/// Three standard normals are drawn per sample in the order `x1, x2, n`
/// whatever the powers, so changing a power rescales a signal without
/// reshuffling the others.
pub fn simulate_mac(
    p1: f64,
    p2: f64,
    ch: &ChannelConfig,
    cfg: &SampleConfig,
) -> Result<SampleBatch> {
    check_power(p1)?;
    check_power(p2)?;
    let cfg = SampleConfig::new(cfg.seed, cfg.stream, cfg.m)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(cfg.stream);

    let (sd1, sd2, sdn) = (p1.sqrt(), p2.sqrt(), ch.noise_power().sqrt());
    let scale = |sd: f64, z: f64| if sd == 0.0 { 0.0 } else { sd * z };
    let mut x1 = Vec::with_capacity(cfg.m);
    let mut x2 = Vec::with_capacity(cfg.m);
    let mut y = Vec::with_capacity(cfg.m);
    for _ in 0..cfg.m {
        let a = scale(sd1, rng.sample(StandardNormal));
        let b = scale(sd2, rng.sample(StandardNormal));
        let n = sdn * rng.sample::<f64, _>(StandardNormal);
        x1.push(a);
        x2.push(b);
        y.push(a + b + n);
    }
    Ok(SampleBatch { x1, x2, y })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum User {
    One,
    Two,
}

/// Subtracts the (perfectly reconstructed) signal of `user` from `y`.
pub fn sic_cancel(batch: &SampleBatch, user: User) -> Vec<f64> {
    let signal = match user {
        User::One => &batch.x1,
        User::Two => &batch.x2,
    };
    batch.y.iter().zip(signal).map(|(y, s)| y - s).collect()
}

/// Which mutual information to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiTarget {
    /// `I(X1; Y | X2)`: user 1 once user 2 has been cancelled.
    User1,
    /// `I(X2; Y)`: user 2 decoded with user 1 still present as noise.
    User2WithUser1Interference,
    /// `I(X1, X2; Y)`.
    Joint,
}

impl MiTarget {
    /// `(observation, observation with the target signal removed)`.
    fn observation_pair(&self, batch: &SampleBatch) -> (Vec<f64>, Vec<f64>) {
        match self {
            MiTarget::User1 => (sic_cancel(batch, User::Two), batch.noise()),
            MiTarget::User2WithUser1Interference => (batch.y.clone(), sic_cancel(batch, User::Two)),
            MiTarget::Joint => (batch.y.clone(), batch.noise()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiMethod {
    Plugin,
    Knn,
}

/// A mutual-information estimate in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub value: f64,
    pub std_error: f64,
    pub m: usize,
    pub method: MiMethod,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample variance of `m` Gaussian draws with true
/// variance `variance`.
pub fn variance_std_error(variance: f64, m: usize) -> f64 {
    variance * (2.0 / (m as f64 - 1.0)).sqrt()
}

fn std_dev(xs: &[f64]) -> f64 {
    sample_variance(xs).max(0.0).sqrt()
}

/// Gaussian plug-in estimate `log2(var(obs) / var(obs without signal))`.
///
/// The standard error comes from the delta method on the log variance
/// ratio, using the per-sample terms `a_c^2 / var(a) - b_c^2 / var(b)`.
pub fn mi_plugin_gaussian(batch: &SampleBatch, target: MiTarget) -> Result<MiEstimate> {
    let m = batch.len();
    if m < MIN_PLUGIN_SAMPLES {
        return Err(MacError::InsufficientSamples {
            needed: MIN_PLUGIN_SAMPLES,
            got: m,
        });
    }
    let (full, reduced) = target.observation_pair(batch);
    let (var_full, var_reduced) = (sample_variance(&full), sample_variance(&reduced));
    for (name, v) in [("observation", var_full), ("conditional", var_reduced)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(MacError::DegenerateVariance(format!(
                "{name} variance is {v}"
            )));
        }
    }
    let (mu_full, mu_reduced) = (mean(&full), mean(&reduced));
    let influence: Vec<f64> = full
        .iter()
        .zip(&reduced)
        .map(|(a, b)| {
            let (a, b) = (a - mu_full, b - mu_reduced);
            a * a / var_full - b * b / var_reduced
        })
        .collect();
    Ok(MiEstimate {
        value: (var_full / var_reduced).log2(),
        std_error: std_dev(&influence) / (m as f64).sqrt() / LN_2,
        m,
        method: MiMethod::Plugin,
    })
}

/// Differential entropy estimate of a real sample, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub bits: f64,
    pub std_error: f64,
    pub k: usize,
    pub m: usize,
}

/// `ln` of each sample's distance to its k-th nearest neighbour, in the
/// original sample order.
fn knn_log_radii(samples: &[f64], k: usize) -> Result<Vec<f64>> {
    let m = samples.len();
    if k == 0 {
        return Err(MacError::Config("k must be at least 1".into()));
    }
    if m < k + 1 {
        return Err(MacError::InsufficientSamples {
            needed: k + 1,
            got: m,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(MacError::DegenerateSamples("non-finite sample".into()));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&a, &b| samples[a].total_cmp(&samples[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| samples[i]).collect();

    let mut out = vec![0.0; m];
    for (j, &v) in sorted.iter().enumerate() {
        let (mut left, mut right) = (j, j + 1);
        let mut radius = 0.0;
        for _ in 0..k {
            let dl = if left > 0 {
                v - sorted[left - 1]
            } else {
                f64::INFINITY
            };
            let dr = if right < m {
                sorted[right] - v
            } else {
                f64::INFINITY
            };
            if dl <= dr {
                radius = dl;
                left -= 1;
            } else {
                radius = dr;
                right += 1;
            }
        }
        if radius <= 0.0 {
            return Err(MacError::DegenerateSamples(format!(
                "{} or more coincident samples at {v}",
                k + 1
            )));
        }
        out[order[j]] = radius.ln();
    }
    Ok(out)
}

/// Kozachenko-Leonenko entropy estimate,
/// `psi(m) - psi(k) + ln 2 + mean(ln eps_k)`, converted to bits.
pub fn entropy_knn(samples: &[f64], k: usize) -> Result<EntropyEstimate> {
    let log_radii = knn_log_radii(samples, k)?;
    let m = samples.len();
    let nats = digamma(m as f64) - digamma(k as f64) + LN_2 + mean(&log_radii);
    Ok(EntropyEstimate {
        bits: nats / LN_2,
        std_error: std_dev(&log_radii) / (m as f64).sqrt() / LN_2,
        k,
        m,
    })
}

/// kNN mutual-information estimate: the entropy drop from removing the
/// target signal. The digamma terms cancel, leaving the mean paired
/// difference of log radii.
pub fn mi_knn(batch: &SampleBatch, target: MiTarget, k: usize) -> Result<MiEstimate> {
    let (full, reduced) = target.observation_pair(batch);
    let a = knn_log_radii(&full, k)?;
    let b = knn_log_radii(&reduced, k)?;
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let m = diff.len();
    Ok(MiEstimate {
        value: REAL_DIMS_PER_USE * mean(&diff) / LN_2,
        std_error: REAL_DIMS_PER_USE * std_dev(&diff) / (m as f64).sqrt() / LN_2,
        m,
        method: MiMethod::Knn,
    })
}

/// An estimated rate compared with its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub estimate: MiEstimate,
    pub analytic: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl RateCheck {
    fn new(estimate: MiEstimate, analytic: f64, tol: f64) -> Self {
        let tolerance = tol.max(3.0 * estimate.std_error);
        Self {
            estimate,
            analytic,
            tolerance,
            pass: (estimate.value - analytic).abs() <= tolerance,
        }
    }
}

/// Sample-level chain rule: stage (a) plus stage (b) against the joint rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub sum_of_stages: f64,
    pub joint: f64,
    pub combined_std_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A kNN estimate against the plug-in value of the same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnAgreement {
    pub estimate: MiEstimate,
    pub plugin_value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl KnnAgreement {
    fn new(estimate: MiEstimate, plugin: &MiEstimate) -> Self {
        let combined = estimate.std_error.hypot(plugin.std_error);
        let tolerance = KNN_AGREEMENT_FLOOR.max(3.0 * combined);
        Self {
            estimate,
            plugin_value: plugin.value,
            tolerance,
            pass: (estimate.value - plugin.value).abs() <= tolerance,
        }
    }
}

/// Empirical variance of a residual after cancellation vs. its expected value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub empirical: f64,
    pub expected: f64,
    pub std_error: f64,
    pub pass: bool,
}

impl VarianceCheck {
    pub fn new(samples: &[f64], expected: f64) -> Self {
        let empirical = sample_variance(samples);
        let std_error = variance_std_error(expected, samples.len());
        Self {
            empirical,
            expected,
            std_error,
            pass: (empirical - expected).abs() <= VARIANCE_SIGMAS * std_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnCrossChecks {
    pub k: usize,
    pub user1_after_cancel: KnnAgreement,
    pub user2_with_interference: KnnAgreement,
    pub joint: KnnAgreement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualChecks {
    pub after_cancelling_user2: VarianceCheck,
    pub after_cancelling_both: VarianceCheck,
}

pub const SCOPE_NOTE: &str = "checks rate identities with genie-aided cancellation; \
decodability at these rates (error probability) is not tested";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SicValidationReport {
    /// (a) user 1 after user 2 is cancelled, against `log2(1 + P1/N)`.
    pub user1_after_cancel: RateCheck,
    /// (b) user 2 with user 1 as noise, against `log2(1 + P2/(P1 + N))`.
    pub user2_with_interference: RateCheck,
    /// (c) both users, against `log2(1 + (P1 + P2)/N)`.
    pub joint: RateCheck,
    pub chain: ChainCheck,
    pub knn: KnnCrossChecks,
    pub residuals: ResidualChecks,
    pub verdict: bool,
    pub scope_note: String,
}

/// Simulates the channel and checks both SIC stages and the joint rate
/// against their closed forms, the chain rule between them, the kNN
/// cross-estimates, and the residual variances after cancellation.
pub fn validate_sic_chain(
    p1: f64,
    p2: f64,
    ch: &ChannelConfig,
    cfg: &SampleConfig,
    tol: f64,
) -> Result<SicValidationReport> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(MacError::Config(format!(
            "tolerance must be nonnegative and finite, got {tol}"
        )));
    }
    let batch = simulate_mac(p1, p2, ch, cfg)?;

    let est_a = mi_plugin_gaussian(&batch, MiTarget::User1)?;
    let est_b = mi_plugin_gaussian(&batch, MiTarget::User2WithUser1Interference)?;
    let est_c = mi_plugin_gaussian(&batch, MiTarget::Joint)?;

    let a = RateCheck::new(est_a, shannon_rate(p1, ch)?, tol);
    let b = RateCheck::new(est_b, sic_rate(p2, p1, ch)?, tol);
    let c = RateCheck::new(
        est_c,
        sum_capacity(&PowerBudget::PerUser { p1, p2 }, ch)?,
        tol,
    );

    let combined =
        (est_a.std_error.powi(2) + est_b.std_error.powi(2) + est_c.std_error.powi(2)).sqrt();
    let chain_tol = 3.0 * combined + 1e-12;
    let sum_of_stages = est_a.value + est_b.value;
    let chain = ChainCheck {
        sum_of_stages,
        joint: est_c.value,
        combined_std_error: combined,
        tolerance: chain_tol,
        pass: (sum_of_stages - est_c.value).abs() <= chain_tol,
    };

    let k = DEFAULT_KNN_K;
    let knn = KnnCrossChecks {
        k,
        user1_after_cancel: KnnAgreement::new(mi_knn(&batch, MiTarget::User1, k)?, &est_a),
        user2_with_interference: KnnAgreement::new(
            mi_knn(&batch, MiTarget::User2WithUser1Interference, k)?,
            &est_b,
        ),
        joint: KnnAgreement::new(mi_knn(&batch, MiTarget::Joint, k)?, &est_c),
    };

    let noise = ch.noise_power();
    let residuals = ResidualChecks {
        after_cancelling_user2: VarianceCheck::new(&sic_cancel(&batch, User::Two), p1 + noise),
        after_cancelling_both: VarianceCheck::new(&batch.noise(), noise),
    };

    let verdict = a.pass
        && b.pass
        && c.pass
        && chain.pass
        && knn.user1_after_cancel.pass
        && knn.user2_with_interference.pass
        && knn.joint.pass
        && residuals.after_cancelling_user2.pass
        && residuals.after_cancelling_both.pass;

    Ok(SicValidationReport {
        user1_after_cancel: a,
        user2_with_interference: b,
        joint: c,
        chain,
        knn,
        residuals,
        verdict,
        scope_note: SCOPE_NOTE.to_string(),
    })
}
