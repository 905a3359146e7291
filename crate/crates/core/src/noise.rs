//! The noise channel: each coordinate `i` flips independently with
//! probability `τ_i`.

use rand::Rng;

use crate::cube::{check_dim, CubeSet, Point};
use crate::error::{Error, Result};
use crate::fourier::{noise_multipliers, wht};
use crate::scalar::Real;

/// Per-position flip probabilities `τ_1..τ_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec<T> {
    taus: Vec<T>,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(taus: Vec<T>) -> Result<Self> {
        check_dim(taus.len() as u32)?;
        if let Some(&t) = taus.iter().find(|&&t| !(t >= T::zero() && t <= T::one())) {
            return Err(Error::domain("tau", t.as_f64(), "[0, 1]"));
        }
        Ok(Self { taus })
    }

    pub fn uniform(tau: T, n: u32) -> Result<Self> {
        Self::new(vec![tau; n as usize])
    }

    pub fn n(&self) -> u32 {
        self.taus.len() as u32
    }

    pub fn taus(&self) -> &[T] {
        &self.taus
    }

    pub fn is_uniform(&self) -> bool {
        self.taus.windows(2).all(|w| w[0] == w[1])
    }

    fn check_point(&self, x: Point) -> Result<()> {
        if x >> self.taus.len() == 0 {
            Ok(())
        } else {
            Err(Error::PointOutOfRange { point: x, n: self.n() })
        }
    }

    fn check_set(&self, b: &CubeSet) -> Result<()> {
        if b.n() == self.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: b.n(), got: self.n() })
        }
    }
}

/// `Pr[N(x) = y] = Π_i (τ_i if x_i ≠ y_i else 1 - τ_i)`.
pub fn kernel_prob<T: Real>(x: Point, y: Point, spec: &NoiseSpec<T>) -> Result<T> {
    spec.check_point(x)?;
    spec.check_point(y)?;
    let diff = x ^ y;
    Ok(spec
        .taus
        .iter()
        .enumerate()
        .map(|(i, &t)| if diff >> i & 1 == 1 { t } else { T::one() - t })
        .fold(T::one(), |acc, k| acc * k))
}

/// Flip bit `i` of `x` iff the `i`-th fresh uniform variate is below `τ_i`.
pub fn sample_noise<T: Real, R: Rng + ?Sized>(x: Point, spec: &NoiseSpec<T>, stream: &mut R) -> Point {
    spec.taus.iter().enumerate().fold(x, |y, (i, &t)| {
        let u: f64 = stream.random();
        if u < t.as_f64() {
            y ^ (1 << i)
        } else {
            y
        }
    })
}

/// Two noisy copies of `x` driven by the same variates (one per position).
/// The copies can only differ at positions whose variate falls between the
/// two thresholds.
pub fn sample_noise_coupled<T: Real, R: Rng + ?Sized>(
    x: Point,
    a: &NoiseSpec<T>,
    b: &NoiseSpec<T>,
    stream: &mut R,
) -> Result<(Point, Point)> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
    }
    let (mut ya, mut yb) = (x, x);
    for (i, (&ta, &tb)) in a.taus.iter().zip(&b.taus).enumerate() {
        let u: f64 = stream.random();
        if u < ta.as_f64() {
            ya ^= 1 << i;
        }
        if u < tb.as_f64() {
            yb ^= 1 << i;
        }
    }
    Ok((ya, yb))
}

/// `h_B(x) = Pr[N(x) ∈ B]` for every `x`, by transform, diagonal noise
/// multipliers and inverse transform.
pub fn hit_probabilities<T: Real>(b: &CubeSet, spec: &NoiseSpec<T>) -> Result<Vec<T>> {
    spec.check_set(b)?;
    let mut spectrum = wht(&b.indicator::<T>())?;
    spectrum.scale(&noise_multipliers(spec))?;
    Ok(spectrum.into_inverse())
}

/// `{x : h_B(x) >= theta}`, compared on the computed values with no epsilon.
pub fn threshold_set<T: Real>(b: &CubeSet, spec: &NoiseSpec<T>, theta: T) -> Result<CubeSet> {
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(Error::domain("theta", theta.as_f64(), "(0, 1]"));
    }
    let hits = hit_probabilities(b, spec)?;
    Ok(threshold_of(b.n(), &hits, theta))
}

pub(crate) fn threshold_of<T: Real>(n: u32, hits: &[T], theta: T) -> CubeSet {
    CubeSet::from_fn(n, |x| hits[x] >= theta).expect("dimension already validated")
}

/// `max_x |h_B^τ(x) - h_B^{τ2}(x)|`. Coupling the two channels bounds this by
/// `n |τ - τ2|`.
pub fn coupling_gap<T: Real>(b: &CubeSet, tau: T, tau2: T) -> Result<T> {
    let h1 = hit_probabilities(b, &NoiseSpec::uniform(tau, b.n())?)?;
    let h2 = hit_probabilities(b, &NoiseSpec::uniform(tau2, b.n())?)?;
    Ok(h1.iter().zip(&h2).fold(T::zero(), |m, (&a, &c)| m.max((a - c).abs())))
}
