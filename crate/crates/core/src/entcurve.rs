//! Binary entropy and the entropy noise curve.
//!
//! For a flip probability `τ`, the curve is traced by `p ↦ (H(p), H(p'))`
//! with `p' = p + τ - 2pτ`, `p ∈ [0, 1/2]`. It starts at `(0, H(τ))`, ends at
//! `(1, 1)`, is increasing, convex and has slope at most one. Reading it
//! backwards (`β ↦ α`) gives the optimal combinatorial bound; the
//! hypercontractive and Fourier curves are weaker bounds on the same scale.
//! All entropies are in bits.

use crate::error::{Error, Result};
use crate::scalar::Real;

const INV_MAX_ITERS: usize = 200;

/// One point on the noise curve for flip probability `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint<T> {
    pub p: T,
    /// `H(p)`
    pub alpha: T,
    /// `H(p + τ - 2pτ)`
    pub beta: T,
    pub tau: T,
}

/// One row of the bound-comparison table: for a set of log-density `beta`,
/// the log-density bound on the noisy preimage obtained by each technique.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow<T> {
    pub tau: T,
    pub beta: T,
    /// `None` when `beta < H(τ)`: no curve point exists and the bound is vacuous.
    pub alpha_opt: Option<T>,
    pub alpha_hyper: T,
    pub alpha_fourier: T,
}

impl<T: Real> BoundRow<T> {
    /// A negative hypercontractive exponent bounds nothing useful.
    pub fn hyper_vacuous(&self) -> bool {
        self.alpha_hyper < T::zero()
    }
}

/// Summary of the discrete convexity and slope scan of a sampled curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityReport<T> {
    /// Minimum over consecutive triples of `chord(alpha_mid) - beta_mid`.
    /// Nonnegative (up to rounding) exactly when the samples are convex.
    pub min_second_difference: T,
    /// Maximum chord slope between consecutive samples.
    pub max_slope: T,
}

fn check_unit<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::domain(name, x.as_f64(), "[0, 1]"))
    }
}

fn check_open_unit<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::domain(name, x.as_f64(), "(0, 1)"))
    }
}

fn check_tau_below_half<T: Real>(tau: T) -> Result<()> {
    if tau > T::zero() && tau < T::half() {
        Ok(())
    } else {
        Err(Error::domain("tau", tau.as_f64(), "(0, 1/2)"))
    }
}

fn plogp<T: Real>(p: T) -> T {
    if p <= T::zero() {
        T::zero()
    } else {
        p * p.log2()
    }
}

pub(crate) fn h2<T: Real>(p: T) -> T {
    let h = -plogp(p) - plogp(T::one() - p);
    // rounding can push the sum a hair past the endpoints
    h.max(T::zero()).min(T::one())
}

/// Binary entropy `H(p) = -p log₂ p - (1-p) log₂(1-p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    check_unit("p", p)?;
    Ok(h2(p))
}

/// The preimage of `y` under `H` lying in `[0, 1/2]`.
///
/// Bisection on `[0, 1/2]` where `H` is strictly increasing; runs until the
/// bracket stops shrinking in floating point (at most 200 halvings).
pub fn binary_entropy_inv<T: Real>(y: T) -> Result<T> {
    check_unit("y", y)?;
    Ok(h2_inv(y))
}

pub(crate) fn h2_inv<T: Real>(y: T) -> T {
    if y <= T::zero() {
        return T::zero();
    }
    if y >= T::one() {
        return T::half();
    }
    let (mut lo, mut hi) = (T::zero(), T::half());
    for _ in 0..INV_MAX_ITERS {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        if h2(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (h2(lo) - y).abs() <= (h2(hi) - y).abs() {
        lo
    } else {
        hi
    }
}

/// Bernoulli parameter after flipping a `Bernoulli(p)` bit with probability
/// `tau`: `p + τ - 2pτ`.
pub fn noise_param<T: Real>(p: T, tau: T) -> Result<T> {
    check_unit("p", p)?;
    check_unit("tau", tau)?;
    Ok(noise_param_unchecked(p, tau))
}

pub(crate) fn noise_param_unchecked<T: Real>(p: T, tau: T) -> T {
    p + tau - T::two() * p * tau
}

pub fn curve_point<T: Real>(p: T, tau: T) -> Result<CurvePoint<T>> {
    if !(p >= T::zero() && p <= T::half()) {
        return Err(Error::domain("p", p.as_f64(), "[0, 1/2]"));
    }
    check_open_unit("tau", tau)?;
    Ok(CurvePoint { p, alpha: h2(p), beta: h2(noise_param_unchecked(p, tau)), tau })
}

/// `grid + 1` curve points at `p = i / (2·grid)`, `i = 0..=grid`.
pub fn sample_curve<T: Real>(tau: T, grid: usize) -> Result<Vec<CurvePoint<T>>> {
    if grid < 2 {
        return Err(Error::domain("grid", grid as f64, ">= 2"));
    }
    check_open_unit("tau", tau)?;
    let denom = T::from_usize(2 * grid).expect("grid fits in scalar");
    (0..=grid)
        .map(|i| {
            // pin the last abscissa to exactly 1/2
            let p = if i == grid { T::half() } else { T::from_usize(i).unwrap() / denom };
            curve_point(p, tau)
        })
        .collect()
}

/// The guaranteed increase `H(N(H⁻¹(α), τ)) - α` for inputs of density `alpha`.
pub fn min_increase_delta<T: Real>(alpha: T, tau: T) -> Result<T> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("tau", tau)?;
    let p = h2_inv(alpha);
    Ok(h2(noise_param_unchecked(p, tau)) - alpha)
}

/// Inverse of the curve: the `alpha` whose noisy image has entropy `beta`.
///
/// Fails with a domain error when `beta < H(τ)`: no input density reaches
/// such a small output entropy, and the bound is vacuous there.
pub fn alpha_opt_of_beta<T: Real>(beta: T, tau: T) -> Result<T> {
    check_tau_below_half(tau)?;
    check_unit("beta", beta)?;
    if beta < h2(tau) {
        return Err(Error::domain("beta", beta.as_f64(), "[H(tau), 1]"));
    }
    let q = h2_inv(beta);
    let p = ((q - tau) / (T::one() - T::two() * tau)).max(T::zero()).min(T::half());
    Ok(h2(p))
}

/// Hypercontractive bound exponent in the `r → 0` limit:
/// `1 - (1 - β) / (1 - 2τ)²`. Negative values are returned as is.
pub fn alpha_hypercontractive<T: Real>(beta: T, tau: T) -> Result<T> {
    check_unit("beta", beta)?;
    check_tau_below_half(tau)?;
    let rho = T::one() - T::two() * tau;
    Ok(T::one() - (T::one() - beta) / (rho * rho))
}

/// Fourier (degree-split) bound exponent: `β + 2·H⁻¹(1-β)·log₂(1-2τ)`.
pub fn alpha_fourier_asymptotic<T: Real>(beta: T, tau: T) -> Result<T> {
    check_open_unit("beta", beta)?;
    check_tau_below_half(tau)?;
    let degree_ratio = h2_inv(T::one() - beta);
    Ok(beta + T::two() * degree_ratio * (T::one() - T::two() * tau).log2())
}

/// Reference line for the largest possible increase: `min(1, α + H(τ))`.
pub fn max_increase_line<T: Real>(alpha: T, tau: T) -> Result<T> {
    check_unit("alpha", alpha)?;
    check_unit("tau", tau)?;
    Ok((alpha + h2(tau)).min(T::one()))
}

pub fn bound_row<T: Real>(beta: T, tau: T) -> Result<BoundRow<T>> {
    let alpha_opt = match alpha_opt_of_beta(beta, tau) {
        Ok(a) => Some(a),
        Err(Error::Domain { name: "beta", .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(BoundRow {
        tau,
        beta,
        alpha_opt,
        alpha_hyper: alpha_hypercontractive(beta, tau)?,
        alpha_fourier: alpha_fourier_asymptotic(beta, tau)?,
    })
}

pub fn convexity_report<T: Real>(tau: T, grid: usize) -> Result<ConvexityReport<T>> {
    if grid < 3 {
        return Err(Error::domain("grid", grid as f64, ">= 3"));
    }
    let pts = sample_curve(tau, grid)?;
    Ok(convexity_of(&pts))
}

/// Convexity scan over already-sampled points (alpha strictly increasing).
pub fn convexity_of<T: Real>(pts: &[CurvePoint<T>]) -> ConvexityReport<T> {
    let mut min_defect = T::infinity();
    let mut max_slope = T::neg_infinity();
    for w in pts.windows(2) {
        let slope = (w[1].beta - w[0].beta) / (w[1].alpha - w[0].alpha);
        max_slope = max_slope.max(slope);
    }
    for w in pts.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let t = (b.alpha - a.alpha) / (c.alpha - a.alpha);
        let chord = a.beta + t * (c.beta - a.beta);
        min_defect = min_defect.min(chord - b.beta);
    }
    ConvexityReport { min_second_difference: min_defect, max_slope }
}
