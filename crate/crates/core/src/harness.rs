//! Set families and end-to-end trials of the weak and strong combinatorial
//! bounds.
//!
//! Both trials take the threshold set `A` of a set `B` under noise and
//! predict a lower bound on `log₂ #B` from `log₂ #A` via the optimal noise
//! curve. The weak trial uses threshold `1 - 1/n` and a slack of 2 bits. The
//! strong trial uses threshold `1/n`, first blowing `B` up to radius
//! `d* = ⌈2√((n/2) ln n)⌉` and paying `log₂` of that ball's size on top.

use std::fmt;

use rand::Rng;
use serde::Deserialize;

use crate::concentration::corollary_radius;
use crate::cube::{ball_size, check_dim, hamming_ball, neighborhood, CubeSet, Point};
use crate::entcurve::{h2, h2_inv, noise_param_unchecked};
use crate::error::{Error, Result};
use crate::noise::{hit_probabilities, threshold_of, NoiseSpec};
use crate::rng::trial_stream;
use crate::scalar::Real;

const RETRIES: u64 = 64;
const DEFAULT_GRID: &str = include_str!("../config/default_grid.toml");

/// A size parameter given either absolutely or as a fraction of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scaled {
    Absolute(u32),
    Fraction(f64),
}

impl Scaled {
    /// Resolves against dimension `n`, rounding fractions to the nearest
    /// integer and clipping to `0..=n`.
    pub fn resolve(self, n: u32) -> Result<u32> {
        match self {
            Scaled::Absolute(v) if v <= n => Ok(v),
            Scaled::Absolute(v) => Err(Error::Family(format!("size {v} exceeds dimension {n}"))),
            Scaled::Fraction(f) if (0.0..=1.0).contains(&f) => Ok((f * n as f64).round() as u32),
            Scaled::Fraction(f) => Err(Error::Family(format!("fraction {f} is outside [0, 1]"))),
        }
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scaled::Absolute(v) => write!(f, "{v}"),
            Scaled::Fraction(v) => write!(f, "{v}n"),
        }
    }
}

/// A recipe for a deterministic test set in any dimension.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Ball {
        #[serde(default)]
        center: Point,
        radius: Scaled,
    },
    /// Points agreeing with `values` on the coordinates in `mask`.
    Subcube { mask: Point, values: Point },
    /// Each point kept independently with probability `density`.
    Random { density: f64, seed: u64 },
    /// Span of `k` random linearly independent vectors over GF(2).
    LinearCode { k: Scaled, seed: u64 },
    ComplementOf { of: Box<FamilySpec> },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Ball { center, radius } => write!(f, "ball(c={center:#x},r={radius})"),
            FamilySpec::Subcube { mask, values } => write!(f, "subcube(m={mask:#x},v={values:#x})"),
            FamilySpec::Random { density, seed } => write!(f, "random(p={density},s={seed})"),
            FamilySpec::LinearCode { k, seed } => write!(f, "code(k={k},s={seed})"),
            FamilySpec::ComplementOf { of } => write!(f, "not[{of}]"),
        }
    }
}

fn fits(x: Point, n: u32) -> bool {
    x >> n == 0
}

/// Builds the set described by `spec` in dimension `n`. The result depends
/// only on `(spec, n)` and is never empty.
pub fn make_family(spec: &FamilySpec, n: u32) -> Result<CubeSet> {
    check_dim(n)?;
    let set = match spec {
        FamilySpec::Ball { center, radius } => {
            if !fits(*center, n) {
                return Err(Error::PointOutOfRange { point: *center, n });
            }
            hamming_ball(n, *center, radius.resolve(n)?)?
        }
        FamilySpec::Subcube { mask, values } => {
            if !fits(*mask, n) || values & !mask != 0 {
                return Err(Error::Family(format!("mask {mask:#x} / values {values:#x} invalid for n = {n}")));
            }
            CubeSet::from_fn(n, |x| x & mask == *values)?
        }
        FamilySpec::Random { density, seed } => {
            if !(*density > 0.0 && *density <= 1.0) {
                return Err(Error::Family(format!("density {density} is outside (0, 1]")));
            }
            (0..RETRIES)
                .map(|attempt| {
                    let mut rng = trial_stream(*seed, (attempt << 32) | n as u64);
                    CubeSet::from_fn(n, |_| rng.random::<f64>() < *density)
                })
                .find(|s| s.as_ref().map_or(true, |s| !s.is_empty()))
                .unwrap_or_else(|| Err(Error::Family(format!("density {density} kept no points"))))?
        }
        FamilySpec::LinearCode { k, seed } => linear_code(n, k.resolve(n)?, *seed)?,
        FamilySpec::ComplementOf { of } => make_family(of, n)?.complement(),
    };
    if set.is_empty() {
        return Err(Error::Family(format!("{spec} is empty in dimension {n}")));
    }
    Ok(set)
}

fn linear_code(n: u32, k: u32, seed: u64) -> Result<CubeSet> {
    for attempt in 0..RETRIES {
        let mut rng = trial_stream(seed, (attempt << 32) | n as u64);
        let gens: Vec<Point> = (0..k).map(|_| rng.random_range(1..1usize << n)).collect();
        if gf2_rank(&gens) == k as usize {
            let mut words = vec![0usize];
            for g in gens {
                let shifted: Vec<Point> = words.iter().map(|w| w ^ g).collect();
                words.extend(shifted);
            }
            return CubeSet::from_points(n, words);
        }
    }
    Err(Error::Family(format!("no rank-{k} generator set found for n = {n}")))
}

fn gf2_rank(vectors: &[Point]) -> usize {
    let mut basis: Vec<Point> = Vec::new();
    for &v in vectors {
        let reduced = basis.iter().fold(v, |acc, &b| acc.min(acc ^ b));
        if reduced != 0 {
            basis.push(reduced);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// A versioned grid of dimensions, noise levels and families.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub version: u32,
    pub n: Vec<u32>,
    pub tau: Vec<f64>,
    pub family: Vec<FamilySpec>,
}

impl GridConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The grid shipped in `config/default_grid.toml`.
    pub fn default_grid() -> Self {
        Self::from_toml(DEFAULT_GRID).expect("bundled grid parses")
    }

    /// Every `(family, n, tau)` triple in canonical order.
    pub fn cases(&self) -> impl Iterator<Item = (&FamilySpec, u32, f64)> + '_ {
        self.family
            .iter()
            .flat_map(move |f| self.n.iter().flat_map(move |&n| self.tau.iter().map(move |&t| (f, n, t))))
    }
}

/// One trial of a combinatorial bound.
#[derive(Clone, Debug, PartialEq)]
pub struct HarnessRow<T> {
    pub family: String,
    pub n: u32,
    pub tau: T,
    pub theta: T,
    pub log2_b: T,
    /// `-inf` when the threshold set is empty.
    pub log2_a: T,
    /// Curve prediction for `log₂ #B / n`; NaN when vacuous.
    pub beta_pred: T,
    pub slack_used: T,
    pub verdict: bool,
    pub vacuous: bool,
    /// Pointwise blow-up step of the strong trial; always true for weak rows.
    pub step1_ok: bool,
}

fn log2_count<T: Real>(count: usize) -> T {
    if count == 0 {
        T::neg_infinity()
    } else {
        T::from_usize(count).unwrap().log2()
    }
}

/// `H(N(H⁻¹(α), τ))`, the curve's output rate for input rate `α`.
pub fn predicted_beta<T: Real>(alpha: T, tau: T) -> T {
    h2(noise_param_unchecked(h2_inv(alpha.max(T::zero()).min(T::one())), tau))
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau < T::half() {
        Ok(())
    } else {
        Err(Error::domain("tau", tau.as_f64(), "(0, 1/2)"))
    }
}

fn finish_row<T: Real>(
    label: String,
    b: &CubeSet,
    a: &CubeSet,
    tau: T,
    theta: T,
    slack: T,
    step1_ok: bool,
) -> HarnessRow<T> {
    let n = b.n();
    let log2_b = log2_count::<T>(b.len());
    let log2_a = log2_count::<T>(a.len());
    let (beta_pred, verdict, vacuous) = if a.is_empty() {
        (T::nan(), true, true)
    } else {
        let nf = T::from_u32(n).unwrap();
        let beta = predicted_beta(log2_a / nf, tau);
        (beta, log2_b >= nf * beta - slack - T::lit(1e-9), false)
    };
    HarnessRow { family: label, n, tau, theta, log2_b, log2_a, beta_pred, slack_used: slack, verdict, vacuous, step1_ok }
}

/// Weak bound: `A = {x : h_B(x) >= 1 - 1/n}` and
/// `log₂ #B >= n β_pred - 2`. At `n = 1` the threshold is 0 and `A` is the
/// whole cube.
pub fn weak_bound_trial<T: Real>(b: &CubeSet, tau: T) -> Result<HarnessRow<T>> {
    weak_bound_trial_labeled(b, tau, String::from("custom"))
}

pub fn weak_bound_trial_labeled<T: Real>(b: &CubeSet, tau: T, label: String) -> Result<HarnessRow<T>> {
    check_tau(tau)?;
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = b.n();
    let theta = T::one() - T::one() / T::from_u32(n).unwrap();
    let a = if n == 1 {
        CubeSet::full(1)?
    } else {
        threshold_of(n, &hit_probabilities(b, &NoiseSpec::uniform(tau, n)?)?, theta)
    };
    Ok(finish_row(label, b, &a, tau, theta, T::two(), true))
}

/// Strong bound: `A = {x : h_B(x) >= 1/n}`, step 1 checks
/// `h_{B_d*}(x) >= 1 - 1/n` on all of `A`, and the verdict is
/// `log₂ #B >= n β_pred - 2 - log₂ |ball(n, d*)|`.
pub fn strong_bound_trial<T: Real>(b: &CubeSet, tau: T) -> Result<HarnessRow<T>> {
    strong_bound_trial_labeled(b, tau, String::from("custom"))
}

pub fn strong_bound_trial_labeled<T: Real>(b: &CubeSet, tau: T, label: String) -> Result<HarnessRow<T>> {
    check_tau(tau)?;
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = b.n();
    if n < 2 {
        return Err(Error::Dimension(n));
    }
    let spec = NoiseSpec::uniform(tau, n)?;
    let inv_n = T::one() / T::from_u32(n).unwrap();
    let a = threshold_of(n, &hit_probabilities(b, &spec)?, inv_n);
    let d_star = corollary_radius(n, inv_n.as_f64());
    let blown = hit_probabilities(&neighborhood(b, d_star)?, &spec)?;
    let step1_ok = a.iter().all(|x| blown[x] >= T::one() - inv_n - T::lit(1e-12));
    let slack = T::two() + T::from_u128(ball_size(n, d_star)?).unwrap().log2();
    let mut row = finish_row(label, b, &a, tau, inv_n, slack, step1_ok);
    row.verdict &= step1_ok;
    Ok(row)
}

/// Largest `log₂ #A` seen for one value of `#B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontierPoint<T> {
    pub size_b: usize,
    pub log2_b: T,
    pub log2_a: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase<T> {
    pub n: u32,
    pub tau: T,
    pub theta: T,
    pub subsets: usize,
    pub frontier: Vec<FrontierPoint<T>>,
    /// Frontier points failing the weak inequality; only checked when
    /// `theta >= 1 - 1/n`, where the inequality is claimed.
    pub frontier_violations: Option<usize>,
    pub weak_violations: usize,
    /// Zero at `n = 1`, where the strong trial is undefined.
    pub strong_violations: usize,
}

/// Sweeps every nonempty `B ⊆ {0,1}^n` for `n <= 4`, recording the frontier
/// of `log₂ #A_theta` per size of `B` and running both trials on each set.
pub fn exhaustive_worst_case<T: Real>(n: u32, tau: T, theta: T) -> Result<WorstCase<T>> {
    if !(1..=4).contains(&n) {
        return Err(Error::Dimension(n));
    }
    check_tau(tau)?;
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(Error::domain("theta", theta.as_f64(), "(0, 1]"));
    }
    let spec = NoiseSpec::uniform(tau, n)?;
    let points = 1usize << n;
    let mut best = vec![None::<usize>; points + 1];
    let (mut weak_violations, mut strong_violations) = (0, 0);
    let subsets = (1u64 << points) - 1;
    for bits in 1..=subsets {
        let b = CubeSet::from_bits(n, bits)?;
        let a = threshold_of(n, &hit_probabilities(&b, &spec)?, theta);
        if !a.is_empty() {
            let slot = &mut best[b.len()];
            *slot = Some(slot.map_or(a.len(), |s| s.max(a.len())));
        }
        if !weak_bound_trial(&b, tau)?.verdict {
            weak_violations += 1;
        }
        if n >= 2 && !strong_bound_trial(&b, tau)?.verdict {
            strong_violations += 1;
        }
    }
    let frontier: Vec<FrontierPoint<T>> = (1..=points)
        .map(|size_b| FrontierPoint {
            size_b,
            log2_b: log2_count(size_b),
            log2_a: log2_count(best[size_b].unwrap_or(0)),
        })
        .collect();
    let nf = T::from_u32(n).unwrap();
    let frontier_violations = (theta >= T::one() - T::one() / nf).then(|| {
        frontier
            .iter()
            .filter(|p| p.log2_a.is_finite())
            .filter(|p| p.log2_b < nf * predicted_beta(p.log2_a / nf, tau) - T::two() - T::lit(1e-9))
            .count()
    });
    Ok(WorstCase {
        n,
        tau,
        theta,
        subsets: subsets as usize,
        frontier,
        frontier_violations,
        weak_violations,
        strong_violations,
    })
}

/// `log₂ #A_theta` on `grid` log-spaced thresholds from
/// `min(τ, 1-τ)^n / 2` up to 1. Empty threshold sets give `-inf`.
pub fn threshold_profile<T: Real>(b: &CubeSet, tau: T, grid: usize) -> Result<Vec<(T, T)>> {
    if grid < 2 {
        return Err(Error::domain("grid", grid as f64, "at least 2"));
    }
    if !(tau > T::zero() && tau < T::one()) {
        return Err(Error::domain("tau", tau.as_f64(), "(0, 1)"));
    }
    let n = b.n();
    let hits = hit_probabilities(b, &NoiseSpec::uniform(tau, n)?)?;
    let lo = tau.min(T::one() - tau).powi(n as i32) / T::two();
    let last = T::from_usize(grid - 1).unwrap();
    Ok((0..grid)
        .map(|k| {
            let theta = lo.powf(T::one() - T::from_usize(k).unwrap() / last);
            (theta, log2_count(threshold_of(n, &hits, theta).len()))
        })
        .collect())
}
