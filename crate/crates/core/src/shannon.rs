//! Distributions on the cube, their entropy and their image under noise.

use rand::Rng;
use rand_distr::Exp1;

use crate::cube::{check_dim, weight_table, Point};
use crate::entcurve::{h2, h2_inv, noise_param_unchecked};
use crate::error::{Error, Result};
use crate::fourier::{noise_multipliers, wht};
use crate::noise::NoiseSpec;
use crate::scalar::{compensated_sum, Real};

const NEGATIVE_CLAMP: f64 = -1e-15;
const SPECTRAL_CLAMP: f64 = -1e-12;
const MASS_TOL: f64 = 1e-9;

/// A probability distribution over the `2^n` points of the cube.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector<T> {
    n: u32,
    probs: Vec<T>,
}

impl<T: Real> ProbVector<T> {
    /// Validates a table of `2^n` probabilities. Entries in `[-1e-15, 0)` are
    /// clamped to zero; the total must be within `1e-9` of one.
    pub fn new(mut probs: Vec<T>) -> Result<Self> {
        if !probs.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(probs.len()));
        }
        let n = probs.len().trailing_zeros();
        check_dim(n)?;
        for p in probs.iter_mut() {
            if !(*p >= T::lit(NEGATIVE_CLAMP)) {
                return Err(Error::Distribution(format!("negative or NaN entry {p}")));
            }
            *p = p.max(T::zero());
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - T::one()).abs() > T::lit(MASS_TOL) {
            return Err(Error::Distribution(format!("total mass {total} is not 1")));
        }
        Ok(Self { n, probs })
    }

    pub fn uniform(n: u32) -> Result<Self> {
        check_dim(n)?;
        let w = T::one() / T::from_usize(1 << n).unwrap();
        Ok(Self { n, probs: vec![w; 1 << n] })
    }

    pub fn point_mass(n: u32, x: Point) -> Result<Self> {
        check_dim(n)?;
        if x >> n != 0 {
            return Err(Error::PointOutOfRange { point: x, n });
        }
        let mut probs = vec![T::zero(); 1 << n];
        probs[x] = T::one();
        Ok(Self { n, probs })
    }

    /// Independent bits, bit `i` equal to one with probability `bias[i]`.
    pub fn product_bernoulli(bias: &[T]) -> Result<Self> {
        check_dim(bias.len() as u32)?;
        if let Some(&p) = bias.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
            return Err(Error::domain("bias", p.as_f64(), "[0, 1]"));
        }
        Self::new(weight_table(bias))
    }

    /// Flat-Dirichlet sample: normalized independent unit exponentials.
    pub fn random<R: Rng + ?Sized>(n: u32, stream: &mut R) -> Result<Self> {
        check_dim(n)?;
        let raw: Vec<f64> = (0..1usize << n).map(|_| stream.sample(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        Self::new(raw.iter().map(|&w| T::lit(w / total)).collect())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }
}

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn entropy<T: Real>(p: &ProbVector<T>) -> T {
    entropy_of(&p.probs)
}

pub(crate) fn entropy_of<T: Real>(probs: &[T]) -> T {
    let h = -compensated_sum(
        probs.iter().filter(|&&q| q > T::zero()).map(|&q| q * q.log2()),
    );
    h.max(T::zero())
}

/// Distribution of `N(X)` for `X ~ P`: `P'(y) = Σ_x P(x) Pr[N(x) = y]`,
/// computed spectrally.
pub fn pushforward_noise<T: Real>(p: &ProbVector<T>, spec: &NoiseSpec<T>) -> Result<ProbVector<T>> {
    if spec.n() != p.n {
        return Err(Error::DimensionMismatch { expected: p.n, got: spec.n() });
    }
    let mut spectrum = wht(&p.probs)?;
    spectrum.scale(&noise_multipliers(spec))?;
    let mut out = spectrum.into_inverse();
    for v in out.iter_mut() {
        if *v < T::lit(SPECTRAL_CLAMP) {
            return Err(Error::Distribution(format!("pushforward produced {v}")));
        }
        *v = v.max(T::zero());
    }
    ProbVector::new(out)
}

/// Outcome of the tensorized entropy bound `H(P') >= n H(q*)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensorCheck<T> {
    pub h_in: T,
    pub h_out: T,
    /// `n H(N(p*, τ))` with `p* = H⁻¹(h_in / n)`.
    pub h_bound: T,
    pub holds: bool,
}

pub fn tensor_bound_check<T: Real>(p: &ProbVector<T>, tau: T) -> Result<TensorCheck<T>> {
    if !(tau > T::zero() && tau < T::one()) {
        return Err(Error::domain("tau", tau.as_f64(), "(0, 1)"));
    }
    let n = T::from_u32(p.n).unwrap();
    let h_in = entropy(p);
    let p_star = h2_inv((h_in / n).min(T::one()));
    let h_bound = n * h2(noise_param_unchecked(p_star, tau));
    let h_out = entropy(&pushforward_noise(p, &NoiseSpec::uniform(tau, p.n)?)?);
    Ok(TensorCheck { h_in, h_out, h_bound, holds: h_out >= h_bound - T::lit(1e-9) })
}

/// One sampled single-bit input and its entropies before and after noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterPoint<T> {
    pub p: T,
    pub h_in: T,
    pub h_out: T,
}

/// Entropy pairs of `Bernoulli(p)` inputs, `p` uniform on `[0, 1]`. For one
/// bit they trace the noise curve itself rather than a region.
pub fn one_letter_scatter<T: Real, R: Rng + ?Sized>(
    tau: T,
    samples: usize,
    stream: &mut R,
) -> Result<Vec<ScatterPoint<T>>> {
    let spec = NoiseSpec::uniform(tau, 1)?;
    (0..samples)
        .map(|_| {
            let p = T::lit(stream.random::<f64>());
            let input = ProbVector::new(vec![T::one() - p, p])?;
            let output = pushforward_noise(&input, &spec)?;
            Ok(ScatterPoint { p, h_in: entropy(&input), h_out: entropy(&output) })
        })
        .collect()
}

/// A stochastic map between finite alphabets: row `x` is the output
/// distribution for input `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Real> Channel<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if width == 0 {
            return Err(Error::Distribution("channel needs at least one output symbol".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Length { what: "channel row", expected: width, got: row.len() });
            }
            let total = compensated_sum(row.iter().copied());
            if row.iter().any(|&v| !(v >= T::zero())) || (total - T::one()).abs() > T::lit(MASS_TOL) {
                return Err(Error::Distribution(format!("channel row {i} is not a distribution")));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new(
            (0..size)
                .map(|i| (0..size).map(|j| if i == j { T::one() } else { T::zero() }).collect())
                .collect(),
        )
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }
}

/// `H(Q₂ | Q₁)` against `H(Q₂ | P₁)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkovCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// Builds `(P₁, Q₁, Q₂)` with `Q₁ = first(P₁)` and `Q₂ = second(P₁)` drawn
/// independently given `P₁`, and checks `H(Q₂ | Q₁) >= H(Q₂ | P₁)`.
pub fn markov_conditional_check<T: Real>(
    marginal: &[T],
    first: &Channel<T>,
    second: &Channel<T>,
) -> Result<MarkovCheck<T>> {
    let total = compensated_sum(marginal.iter().copied());
    if marginal.is_empty()
        || marginal.iter().any(|&v| !(v >= T::zero()))
        || (total - T::one()).abs() > T::lit(MASS_TOL)
    {
        return Err(Error::Distribution("marginal of P1 is not a distribution".into()));
    }
    for ch in [first, second] {
        if ch.inputs() != marginal.len() {
            return Err(Error::Length {
                what: "channel inputs",
                expected: marginal.len(),
                got: ch.inputs(),
            });
        }
    }
    let (k1, k2) = (first.outputs(), second.outputs());
    let mut joint = vec![T::zero(); k1 * k2];
    for (x, &px) in marginal.iter().enumerate() {
        for (a, &wa) in first.rows[x].iter().enumerate() {
            for (b, &wb) in second.rows[x].iter().enumerate() {
                joint[a * k2 + b] = joint[a * k2 + b] + px * wa * wb;
            }
        }
    }
    let q1: Vec<T> = joint.chunks(k2).map(|row| row.iter().copied().sum()).collect();
    let lhs = entropy_of(&joint) - entropy_of(&q1);
    let rhs = marginal
        .iter()
        .zip(&second.rows)
        .map(|(&px, row)| px * entropy_of(row))
        .sum::<T>();
    Ok(MarkovCheck { lhs, rhs, holds: lhs >= rhs - T::lit(1e-9) })
}
