//! Walsh–Hadamard analysis on the cube.
//!
//! Coefficients use the averaged convention
//! `f̂_S = 2^{-n} Σ_x f(x) (-1)^{|S ∧ x|}`, so `f(x) = Σ_S f̂_S (-1)^{|S ∧ x|}`
//! and Parseval reads `E_x f(x)² = Σ_S f̂_S²`. Noise acts diagonally: flipping
//! coordinate `i` with probability `τ_i` multiplies `f̂_S` by
//! `Π_{i∈S} (1 - 2τ_i)`.

use crate::cube::{ball_size, uniform_measure, CubeSet};
use crate::error::{Error, Result};
use crate::noise::{threshold_set, NoiseSpec};
use crate::scalar::Real;

/// Unnormalized in-place butterfly, `O(n 2^n)`. Applying it twice multiplies
/// the input by `2^n`.
pub fn fwht_in_place<T: Real>(data: &mut [T]) {
    debug_assert!(data.len().is_power_of_two());
    let mut half = 1;
    while half < data.len() {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

fn dim_of_len(len: usize) -> Result<u32> {
    if len.is_power_of_two() {
        Ok(len.trailing_zeros())
    } else {
        Err(Error::NotPowerOfTwo(len))
    }
}

/// Fourier coefficients of a real function on the cube, indexed by subset mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    n: u32,
    coeffs: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Result<Self> {
        Ok(Self { n: dim_of_len(coeffs.len())?, coeffs })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, subset: usize) -> T {
        self.coeffs[subset]
    }

    /// `Σ_S f̂_S²`, which equals `E_x f(x)²`.
    pub fn energy(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum()
    }

    /// Multiply coefficient `S` by `multipliers[S]`.
    pub fn scale(&mut self, multipliers: &[T]) -> Result<()> {
        if multipliers.len() != self.coeffs.len() {
            return Err(Error::Length {
                what: "multiplier table",
                expected: self.coeffs.len(),
                got: multipliers.len(),
            });
        }
        for (c, &m) in self.coeffs.iter_mut().zip(multipliers) {
            *c = *c * m;
        }
        Ok(())
    }

    /// Point values `f(x) = Σ_S f̂_S χ_S(x)`.
    pub fn inverse(&self) -> Vec<T> {
        let mut values = self.coeffs.clone();
        fwht_in_place(&mut values);
        values
    }

    pub fn into_inverse(mut self) -> Vec<T> {
        fwht_in_place(&mut self.coeffs);
        self.coeffs
    }
}

/// Forward transform of a table of `2^n` point values.
pub fn wht<T: Real>(values: &[T]) -> Result<Spectrum<T>> {
    let n = dim_of_len(values.len())?;
    let mut coeffs = values.to_vec();
    fwht_in_place(&mut coeffs);
    let scale = T::one() / T::from_usize(values.len()).unwrap();
    for c in &mut coeffs {
        *c = *c * scale;
    }
    Ok(Spectrum { n, coeffs })
}

/// `table[S] = Π_{i∈S} (1 - 2τ_i)`.
pub fn noise_multipliers<T: Real>(spec: &NoiseSpec<T>) -> Vec<T> {
    let mut table = vec![T::one()];
    for &tau in spec.taus() {
        let rho = T::one() - T::two() * tau;
        let upper: Vec<T> = table.iter().map(|&m| m * rho).collect();
        table.extend(upper);
    }
    table
}

/// The noise operator `(T f)(x) = E[f(N(x))]`, computed spectrally.
pub fn noise_operator<T: Real>(values: &[T], spec: &NoiseSpec<T>) -> Result<Vec<T>> {
    let mut spectrum = wht(values)?;
    if spectrum.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spectrum.n(), got: spec.n() });
    }
    spectrum.scale(&noise_multipliers(spec))?;
    Ok(spectrum.into_inverse())
}

/// Record of the degree-split bound on the set of points whose noisy image
/// lands in `B` with probability at least `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NazarovCertificate<T> {
    /// Degree cutoff: coefficients with `|S| < d` form the low part.
    pub d: u32,
    pub eps: T,
    pub tau: T,
    /// `max_x |low part(x)|`
    pub low_part_max: T,
    /// `L₂` norm of the high part.
    pub high_part_norm: T,
    /// `(1 - 2τ)^d √μ(B)`
    pub high_part_bound: T,
    pub mu_b: T,
    pub mu_a: T,
    /// `(2/ε)² (1 - 2τ)^{2d} μ(B)`
    pub rhs: T,
    pub low_ok: bool,
    pub high_ok: bool,
    /// `mu_a <= rhs` (with `1e-12` slack).
    pub holds: bool,
    /// The bound says nothing (`rhs >= 1`).
    pub vacuous: bool,
}

impl<T> NazarovCertificate<T> {
    pub fn all_clauses_hold(&self) -> bool {
        self.low_ok && self.high_ok && self.holds
    }
}

/// Builds and checks the degree-split certificate for `B` at noise `tau` and
/// threshold `eps`.
///
/// The cutoff `d` is the largest with `μ(B)·Σ_{k<d} C(n,k) ≤ ε/2`. Since every
/// coefficient of an indicator is at most `μ(B)` in absolute value, this caps
/// the low part by `ε/2` everywhere, so the high part must exceed `ε/2` on the
/// threshold set and its `L₂` norm bounds that set's measure.
pub fn nazarov_certificate<T: Real>(b: &CubeSet, tau: T, eps: T) -> Result<NazarovCertificate<T>> {
    if !(tau > T::zero() && tau < T::half()) {
        return Err(Error::domain("tau", tau.as_f64(), "(0, 1/2)"));
    }
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::domain("eps", eps.as_f64(), "(0, 1)"));
    }
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = b.n();
    let slack = T::lit(1e-12);
    let half_eps = eps * T::half();
    let mu_b: T = uniform_measure(b);

    let mut d = 0;
    for cand in 1..=n {
        let low_count = T::from_u128(ball_size(n, cand - 1)?).unwrap();
        if mu_b * low_count <= half_eps {
            d = cand;
        } else {
            break;
        }
    }

    let spec = NoiseSpec::uniform(tau, n)?;
    let mut noised = wht(&b.indicator::<T>())?;
    noised.scale(&noise_multipliers(&spec))?;

    let mut low = noised.coeffs().to_vec();
    let mut high_energy = T::zero();
    for (s, c) in low.iter_mut().enumerate() {
        if (s as u64).count_ones() >= d {
            high_energy = high_energy + *c * *c;
            *c = T::zero();
        }
    }
    fwht_in_place(&mut low);
    let low_part_max = low.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let high_part_norm = high_energy.sqrt();

    let rho_d = (T::one() - T::two() * tau).powi(d as i32);
    let high_part_bound = rho_d * mu_b.sqrt();
    let rhs = (T::two() / eps).powi(2) * rho_d * rho_d * mu_b;

    let a = threshold_set(b, &spec, eps)?;
    let mu_a: T = uniform_measure(&a);

    Ok(NazarovCertificate {
        d,
        eps,
        tau,
        low_part_max,
        high_part_norm,
        high_part_bound,
        mu_b,
        mu_a,
        rhs,
        low_ok: low_part_max <= half_eps + slack,
        high_ok: high_part_norm <= high_part_bound + slack,
        holds: mu_a <= rhs + slack,
        vacuous: rhs >= T::one(),
    })
}

/// Outcome of one two-function hypercontractivity evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperCheck<T> {
    /// `E[f(x) g(y)]`, `x` uniform, `y` its `τ`-noisy copy.
    pub lhs: T,
    /// `‖f‖_{1+r} ‖g‖_{1+s}`
    pub rhs: T,
    pub holds: bool,
}

fn lp_norm<T: Real>(values: &[T], p: T) -> T {
    let len = T::from_usize(values.len()).unwrap();
    let mean = values.iter().map(|v| v.abs().powf(p)).sum::<T>() / len;
    mean.powf(T::one() / p)
}

/// Evaluates `E[f(x) g(N_τ(x))] <= ‖f‖_{1+r} ‖g‖_{1+s}` exactly.
///
/// Requires `r, s >= 0`, `1 - 2τ <= √(rs) <= 1` and nonnegative tables; a
/// violated precondition is an `Err`, a violated inequality is `holds: false`.
pub fn hyper_check<T: Real>(f: &[T], g: &[T], tau: T, r: T, s: T) -> Result<HyperCheck<T>> {
    if f.len() != g.len() {
        return Err(Error::Length { what: "second table", expected: f.len(), got: g.len() });
    }
    let n = dim_of_len(f.len())?;
    if !(tau >= T::zero() && tau <= T::half()) {
        return Err(Error::Precondition(format!("tau = {tau} must lie in [0, 1/2]")));
    }
    if !(r >= T::zero() && s >= T::zero()) {
        return Err(Error::Precondition(format!("r = {r}, s = {s} must be nonnegative")));
    }
    let geo = (r * s).sqrt();
    let rho = T::one() - T::two() * tau;
    let tol = T::lit(1e-12);
    if geo < rho - tol || geo > T::one() + tol {
        return Err(Error::Precondition(format!(
            "need 1 - 2tau = {rho} <= sqrt(r s) = {geo} <= 1"
        )));
    }
    if f.iter().chain(g).any(|&v| !(v >= T::zero())) {
        return Err(Error::Precondition("tables must be nonnegative".into()));
    }
    let lhs = if n == 0 {
        f[0] * g[0]
    } else {
        let tg = noise_operator(g, &NoiseSpec::uniform(tau, n)?)?;
        let len = T::from_usize(f.len()).unwrap();
        f.iter().zip(&tg).map(|(&a, &b)| a * b).sum::<T>() / len
    };
    let rhs = lp_norm(f, T::one() + r) * lp_norm(g, T::one() + s);
    Ok(HyperCheck { lhs, rhs, holds: lhs <= rhs + tol })
}
