//! Rate regions as explicit convex geometry, sampled Pareto frontiers, and
//! the numerical check that TD, FD and superposition coding share one
//! region under a sum-power budget.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::channel::{check_power, ChannelConfig, PowerBudget, RatePair, ResourceSplit, Scheme};
use crate::error::{domain, MacError, Result};
use crate::rates::{
    corner_points, fd_rate_pair, fd_touch_split, shannon_rate, sum_capacity, sum_power_rate_pair,
    td_rate_pair,
};

pub const DEFAULT_RESOLUTION: usize = 1025;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Absolute tolerance used when merging coincident or collinear vertices.
pub const VERTEX_MERGE_TOL: f64 = 1e-12;
/// Largest user count accepted by [`polymatroid_region`].
pub const MAX_POLYMATROID_USERS: usize = 16;

/// The constraint `a1 * r1 + a2 * r2 <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

impl HalfSpace {
    pub fn new(a1: f64, a2: f64, b: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite() && b.is_finite()) {
            return Err(domain("half-space coefficients must be finite"));
        }
        if a1 == 0.0 && a2 == 0.0 {
            return Err(domain("half-space normal must be nonzero"));
        }
        Ok(Self { a1, a2, b })
    }

    pub fn contains(&self, p: &RatePair, tol: f64) -> bool {
        self.a1 * p.r1 + self.a2 * p.r2 <= self.b + tol
    }
}

/// A convex rate region given both as half-spaces and as its
/// counterclockwise vertex list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<RatePair>,
}

impl Region {
    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[RatePair] {
        &self.vertices
    }

    pub fn contains(&self, p: &RatePair, tol: f64) -> bool {
        region_contains(self, p, tol)
    }
}

/// Sampled Pareto boundary of a rate region.
///
/// Points run from the `r2` axis to the `r1` axis: `r1` nondecreasing, `r2`
/// nonincreasing, no two consecutive points equal, at least two points.
/// Equal `r1` values only occur on vertical boundary pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<RatePair>", into = "Vec<RatePair>")]
pub struct Frontier {
    points: Vec<RatePair>,
}

impl Frontier {
    /// Validates an already ordered point list.
    pub fn new(points: Vec<RatePair>) -> Result<Self> {
        if points.len() < 2 {
            return Err(MacError::DegenerateFrontier(format!(
                "need at least 2 distinct points, got {}",
                points.len()
            )));
        }
        for p in &points {
            RatePair::new(p.r1, p.r2)?;
        }
        for w in points.windows(2) {
            if w[1].r1 < w[0].r1 || w[1].r2 > w[0].r2 || w[0] == w[1] {
                return Err(MacError::DegenerateFrontier(format!(
                    "points out of Pareto order: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// Sorts samples by ascending `r1` (descending `r2` on ties), drops
    /// repeats and validates.
    pub fn from_samples(mut points: Vec<RatePair>) -> Result<Self> {
        points.sort_by(pareto_order);
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[RatePair] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TryFrom<Vec<RatePair>> for Frontier {
    type Error = MacError;

    fn try_from(points: Vec<RatePair>) -> Result<Self> {
        Frontier::new(points)
    }
}

impl From<Frontier> for Vec<RatePair> {
    fn from(f: Frontier) -> Self {
        f.points
    }
}

fn pareto_order(a: &RatePair, b: &RatePair) -> Ordering {
    a.r1.total_cmp(&b.r1).then_with(|| b.r2.total_cmp(&a.r2))
}

/// Pentagon (per-user budget) or triangle (sum-power budget) achieved by
/// superposition coding with SIC.
pub fn superposition_region(budget: &PowerBudget, ch: &ChannelConfig) -> Result<Region> {
    budget.validate()?;
    let c_sum = sum_capacity(budget, ch)?;
    let mut halfspaces = vec![
        HalfSpace::new(-1.0, 0.0, 0.0)?,
        HalfSpace::new(0.0, -1.0, 0.0)?,
    ];
    let origin = RatePair { r1: 0.0, r2: 0.0 };
    let vertices = match *budget {
        PowerBudget::PerUser { p1, p2 } => {
            let c1 = shannon_rate(p1, ch)?;
            let c2 = shannon_rate(p2, ch)?;
            halfspaces.push(HalfSpace::new(1.0, 0.0, c1)?);
            halfspaces.push(HalfSpace::new(0.0, 1.0, c2)?);
            let (first, second) = corner_points(budget, ch)?;
            vec![
                origin,
                RatePair { r1: c1, r2: 0.0 },
                first,
                second,
                RatePair { r1: 0.0, r2: c2 },
            ]
        }
        PowerBudget::SumPower { .. } => vec![
            origin,
            RatePair { r1: c_sum, r2: 0.0 },
            RatePair { r1: 0.0, r2: c_sum },
        ],
    };
    halfspaces.push(HalfSpace::new(1.0, 1.0, c_sum)?);
    Ok(Region {
        halfspaces,
        vertices: simplify_polygon(vertices, VERTEX_MERGE_TOL),
    })
}

fn near(a: &RatePair, b: &RatePair, tol: f64) -> bool {
    (a.r1 - b.r1).abs() <= tol && (a.r2 - b.r2).abs() <= tol
}

/// Drops cyclically repeated vertices, then vertices lying on the chord of
/// their neighbours.
fn simplify_polygon(mut vs: Vec<RatePair>, tol: f64) -> Vec<RatePair> {
    vs.dedup_by(|b, a| near(a, b, tol));
    while vs.len() > 1 && near(&vs[0], &vs[vs.len() - 1], tol) {
        vs.pop();
    }
    loop {
        let n = vs.len();
        if n < 3 {
            return vs;
        }
        let redundant = (0..n).find(|&i| {
            let prev = vs[(i + n - 1) % n];
            let cur = vs[i];
            let next = vs[(i + 1) % n];
            distance_to_line(&cur, &prev, &next) <= tol
        });
        match redundant {
            Some(i) => {
                vs.remove(i);
            }
            None => return vs,
        }
    }
}

fn distance_to_line(p: &RatePair, a: &RatePair, b: &RatePair) -> f64 {
    let (dx, dy) = (b.r1 - a.r1, b.r2 - a.r2);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return p.distance(a);
    }
    ((p.r1 - a.r1) * dy - (p.r2 - a.r2) * dx).abs() / len
}

/// Endpoints of the region when exactly one user has zero power, `None`
/// for a regular budget, and an error when nothing can be transmitted.
fn degenerate_endpoints(budget: &PowerBudget, ch: &ChannelConfig) -> Result<Option<Vec<RatePair>>> {
    budget.validate()?;
    let origin = RatePair { r1: 0.0, r2: 0.0 };
    match *budget {
        PowerBudget::PerUser { p1, p2 } => {
            if p1 == 0.0 && p2 == 0.0 {
                Err(MacError::DegenerateFrontier(
                    "both users have zero power".into(),
                ))
            } else if p2 == 0.0 {
                Ok(Some(vec![
                    origin,
                    RatePair {
                        r1: shannon_rate(p1, ch)?,
                        r2: 0.0,
                    },
                ]))
            } else if p1 == 0.0 {
                Ok(Some(vec![
                    RatePair {
                        r1: 0.0,
                        r2: shannon_rate(p2, ch)?,
                    },
                    origin,
                ]))
            } else {
                Ok(None)
            }
        }
        PowerBudget::SumPower { p_total } => {
            if p_total == 0.0 {
                Err(MacError::DegenerateFrontier("sum power is zero".into()))
            } else {
                Ok(None)
            }
        }
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 2 {
        return Err(MacError::Config(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    Ok(())
}

fn sample_splits<F>(splits: &[ResourceSplit], mut rate: F) -> Result<Frontier>
where
    F: FnMut(ResourceSplit) -> Result<RatePair>,
{
    let points = splits
        .iter()
        .map(|&s| rate(s))
        .collect::<Result<Vec<_>>>()?;
    Frontier::from_samples(points)
}

/// Time-division frontier on a uniform time-fraction grid.
pub fn td_frontier(
    budget: &PowerBudget,
    ch: &ChannelConfig,
    resolution: usize,
) -> Result<Frontier> {
    check_resolution(resolution)?;
    if let Some(ends) = degenerate_endpoints(budget, ch)? {
        return Frontier::new(ends);
    }
    sample_splits(&ResourceSplit::uniform_grid(resolution), |s| {
        td_rate_pair(s, budget, ch)
    })
}

/// Frequency-division frontier on a uniform bandwidth-fraction grid. Per-user
/// budgets also sample the touch split, so the point where FD meets the sum
/// capacity is always present.
pub fn fd_frontier(
    budget: &PowerBudget,
    ch: &ChannelConfig,
    resolution: usize,
) -> Result<Frontier> {
    check_resolution(resolution)?;
    if let Some(ends) = degenerate_endpoints(budget, ch)? {
        return Frontier::new(ends);
    }
    let mut splits = ResourceSplit::uniform_grid(resolution);
    if let PowerBudget::PerUser { .. } = budget {
        splits.push(fd_touch_split(budget)?);
        splits.sort_by(|a, b| a.alpha().total_cmp(&b.alpha()));
        splits.dedup();
    }
    sample_splits(&splits, |s| fd_rate_pair(s, budget, ch))
}

/// Superposition-coding frontier.
///
/// Per-user budgets: the dominant boundary of the pentagon, from `(0, C2)`
/// through both corner points to `(C1, 0)`, sampled uniformly in arc length
/// with the corners inserted exactly. Sum-power budgets: the power-split
/// sweep of [`sum_power_rate_pair`] on a uniform grid.
pub fn superposition_frontier(
    budget: &PowerBudget,
    ch: &ChannelConfig,
    resolution: usize,
) -> Result<Frontier> {
    check_resolution(resolution)?;
    if let Some(ends) = degenerate_endpoints(budget, ch)? {
        return Frontier::new(ends);
    }
    match *budget {
        PowerBudget::SumPower { p_total } => {
            sample_splits(&ResourceSplit::uniform_grid(resolution), |s| {
                sum_power_rate_pair(Scheme::Superposition, s, p_total, ch)
            })
        }
        PowerBudget::PerUser { p1, p2 } => {
            let (first, second) = corner_points(budget, ch)?;
            let polyline = [
                RatePair {
                    r1: 0.0,
                    r2: shannon_rate(p2, ch)?,
                },
                second,
                first,
                RatePair {
                    r1: shannon_rate(p1, ch)?,
                    r2: 0.0,
                },
            ];
            Frontier::from_samples(sample_polyline(&polyline, resolution))
        }
    }
}

/// `resolution` points spaced uniformly in arc length along `polyline`,
/// plus every polyline vertex.
fn sample_polyline(polyline: &[RatePair], resolution: usize) -> Vec<RatePair> {
    let lengths: Vec<f64> = polyline.windows(2).map(|w| w[0].distance(&w[1])).collect();
    let total: f64 = lengths.iter().sum();
    let step = total / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution + polyline.len());
    let mut start = 0.0;
    let mut j = 0usize;
    for (edge, &len) in polyline.windows(2).zip(&lengths) {
        let (a, b) = (edge[0], edge[1]);
        out.push(a);
        let end = start + len;
        while j < resolution {
            let t = j as f64 * step;
            if t <= start {
                j += 1;
                continue;
            }
            if t >= end {
                break;
            }
            let f = (t - start) / len;
            out.push(RatePair {
                r1: lerp_clamped(a.r1, b.r1, f),
                r2: lerp_clamped(a.r2, b.r2, f),
            });
            j += 1;
        }
        start = end;
    }
    out.extend(polyline.last().copied());
    out
}

fn lerp_clamped(a: f64, b: f64, f: f64) -> f64 {
    (a + f * (b - a)).clamp(a.min(b), a.max(b))
}

/// Frontier of `scheme` under `budget`.
pub fn frontier(
    scheme: Scheme,
    budget: &PowerBudget,
    ch: &ChannelConfig,
    resolution: usize,
) -> Result<Frontier> {
    match scheme {
        Scheme::Superposition => superposition_frontier(budget, ch, resolution),
        Scheme::TimeDivision => td_frontier(budget, ch, resolution),
        Scheme::FrequencyDivision => fd_frontier(budget, ch, resolution),
    }
}

/// Superposition sum-power sweep whose user-1 rates land on the uniform
/// time-division grid: the power split for grid value `alpha` is the one
/// with `log2(1 + q1/N) = alpha * log2(1 + P/N)`.
pub fn superposition_frontier_rate_matched(
    p_total: f64,
    ch: &ChannelConfig,
    resolution: usize,
) -> Result<Frontier> {
    check_resolution(resolution)?;
    check_power(p_total)?;
    if p_total == 0.0 {
        return Err(MacError::DegenerateFrontier("sum power is zero".into()));
    }
    let snr = p_total / ch.noise_power();
    let log_gain = snr.ln_1p();
    sample_splits(&ResourceSplit::uniform_grid(resolution), |s| {
        let power_fraction = match s.alpha() {
            a if a == 0.0 || a == 1.0 => a,
            a => ((a * log_gain).exp_m1() / snr).clamp(0.0, 1.0),
        };
        sum_power_rate_pair(
            Scheme::Superposition,
            ResourceSplit::new(power_fraction)?,
            p_total,
            ch,
        )
    })
}

/// True iff `point` satisfies every half-space of `region` up to `tol`.
pub fn region_contains(region: &Region, point: &RatePair, tol: f64) -> bool {
    region.halfspaces.iter().all(|h| h.contains(point, tol))
}

/// Componentwise (non-strict) dominance of `p` over `q`.
pub fn dominates(p: &RatePair, q: &RatePair) -> bool {
    p.r1 >= q.r1 && p.r2 >= q.r2
}

/// Symmetric Hausdorff distance between the two sampled point sets.
pub fn hausdorff(f: &Frontier, g: &Frontier) -> Result<f64> {
    if f.is_empty() || g.is_empty() {
        return Err(MacError::EmptyFrontier);
    }
    Ok(directed_hausdorff(f.points(), g.points()).max(directed_hausdorff(g.points(), f.points())))
}

fn directed_hausdorff(from: &[RatePair], to: &[RatePair]) -> f64 {
    from.iter()
        .map(|p| nearest_distance(p, to))
        .fold(0.0, f64::max)
}

/// Distance from `p` to the closest point of `sorted` (ascending in `r1`),
/// scanning outward from `p.r1` until the `r1` gap alone exceeds the best
/// distance found.
fn nearest_distance(p: &RatePair, sorted: &[RatePair]) -> f64 {
    let split = sorted.partition_point(|q| q.r1 < p.r1);
    let mut best = f64::INFINITY;
    for q in &sorted[split..] {
        if q.r1 - p.r1 > best {
            break;
        }
        best = best.min(p.distance(q));
    }
    for q in sorted[..split].iter().rev() {
        if p.r1 - q.r1 > best {
            break;
        }
        best = best.min(p.distance(q));
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseHausdorff {
    pub sc_td: f64,
    pub sc_fd: f64,
    pub td_fd: f64,
}

impl PairwiseHausdorff {
    pub fn max(&self) -> f64 {
        self.sc_td.max(self.sc_fd).max(self.td_fd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub sum_capacity: f64,
    pub pairwise_hausdorff: PairwiseHausdorff,
    pub tolerance: f64,
    pub resolution: usize,
    pub verdict: bool,
}

/// Builds the superposition, TD and FD frontiers under a sum-power budget
/// and checks that every pair is within `tol` in Hausdorff distance.
pub fn verify_equivalence(
    p_total: f64,
    ch: &ChannelConfig,
    resolution: usize,
    tol: f64,
) -> Result<EquivalenceReport> {
    check_power(p_total)?;
    if p_total == 0.0 {
        return Err(domain("sum power must be positive"));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(MacError::Config(format!(
            "tolerance must be nonnegative and finite, got {tol}"
        )));
    }
    check_resolution(resolution)?;
    let budget = PowerBudget::SumPower { p_total };
    let sc = superposition_frontier_rate_matched(p_total, ch, resolution)?;
    let td = td_frontier(&budget, ch, resolution)?;
    let fd = fd_frontier(&budget, ch, resolution)?;
    let pairwise = PairwiseHausdorff {
        sc_td: hausdorff(&sc, &td)?,
        sc_fd: hausdorff(&sc, &fd)?,
        td_fd: hausdorff(&td, &fd)?,
    };
    Ok(EquivalenceReport {
        sum_capacity: shannon_rate(p_total, ch)?,
        pairwise_hausdorff: pairwise,
        tolerance: tol,
        resolution,
        verdict: pairwise.max() <= tol,
    })
}

/// `sum_{i in members} R_i <= bound` for one nonempty user subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetConstraint {
    /// Bit `i` set means user `i + 1` belongs to the subset.
    pub members: u32,
    pub bound: f64,
}

impl SubsetConstraint {
    /// Zero-based indices of the users in the subset.
    pub fn users(&self) -> Vec<usize> {
        (0..32).filter(|i| self.members & (1 << i) != 0).collect()
    }

    /// Indicator coefficient vector over `k` users.
    pub fn coefficients(&self, k: usize) -> Vec<f64> {
        (0..k)
            .map(|i| {
                if self.members & (1 << i) != 0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// The constraint as a half-space in the `(r1, r2)` plane, if it only
    /// involves the first two users.
    pub fn as_halfspace(&self) -> Option<HalfSpace> {
        if self.members & !0b11 != 0 {
            return None;
        }
        let c = self.coefficients(2);
        HalfSpace::new(c[0], c[1], self.bound).ok()
    }
}

/// The `2^K - 1` subset sum-rate constraints of the K-user Gaussian MAC,
/// ordered by subset bitmask.
pub fn polymatroid_region(powers: &[f64], ch: &ChannelConfig) -> Result<Vec<SubsetConstraint>> {
    let k = powers.len();
    if k == 0 || k > MAX_POLYMATROID_USERS {
        return Err(domain(format!(
            "user count must be between 1 and {MAX_POLYMATROID_USERS}, got {k}"
        )));
    }
    for &p in powers {
        check_power(p)?;
    }
    (1u32..(1 << k))
        .map(|members| {
            let power: f64 = powers
                .iter()
                .enumerate()
                .filter(|(i, _)| members & (1 << i) != 0)
                .map(|(_, p)| p)
                .sum();
            Ok(SubsetConstraint {
                members,
                bound: shannon_rate(power, ch)?,
            })
        })
        .collect()
}
