//! Concentration of measure on product spaces of biased bits.
//!
//! Functions on the cube are passed as tables indexed by point mask, with
//! coordinate `i` being bit `i`. A Doob martingale reveals coordinates in
//! increasing bit order, so level `i` is indexed by the low `i` bits.
//! Exponential bounds use natural logarithms throughout this module.

use crate::cube::{check_dim, neighborhood, product_measure, set_distance, weight_table, CubeSet, Point};
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Real};

const TOL: f64 = 1e-12;
/// Largest dimension for exhaustive martingale and tail enumeration.
pub const MAX_ENUM_DIM: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoeffdingCheck<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// `E exp(U - EU)` against `exp(c²/8)` for a finite variable taking
/// `values[k]` with probability `masses[k]`, all values within a span `c`.
pub fn hoeffding_lemma_check<T: Real>(values: &[T], masses: &[T], c: T) -> Result<HoeffdingCheck<T>> {
    if values.len() != masses.len() || values.is_empty() {
        return Err(Error::Length { what: "masses", expected: values.len(), got: masses.len() });
    }
    let total = compensated_sum(masses.iter().copied());
    if masses.iter().any(|&m| !(m >= T::zero())) || (total - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::Distribution("masses must be nonnegative and sum to 1".into()));
    }
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    if !(c >= hi - lo) {
        return Err(Error::domain("c", c.as_f64(), "at least the span of the values"));
    }
    let mean = compensated_sum(values.iter().zip(masses).map(|(&v, &m)| v * m));
    let lhs = compensated_sum(values.iter().zip(masses).map(|(&v, &m)| m * (v - mean).exp()));
    let rhs = (c * c / T::lit(8.0)).exp();
    Ok(HoeffdingCheck { lhs, rhs, holds: lhs <= rhs + T::lit(TOL) })
}

/// Product measure with per-coordinate biases and bounded differences `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedDiffSpec<T> {
    biases: Vec<T>,
    c: Vec<T>,
}

impl<T: Real> BoundedDiffSpec<T> {
    pub fn new(biases: Vec<T>, c: Vec<T>) -> Result<Self> {
        check_dim(biases.len() as u32)?;
        if c.len() != biases.len() {
            return Err(Error::Length { what: "difference bounds", expected: biases.len(), got: c.len() });
        }
        if let Some(&p) = biases.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
            return Err(Error::domain("bias", p.as_f64(), "[0, 1]"));
        }
        if let Some(&ci) = c.iter().find(|&&ci| !(ci >= T::zero() && ci.is_finite())) {
            return Err(Error::domain("c", ci.as_f64(), "[0, inf)"));
        }
        Ok(Self { biases, c })
    }

    /// Fair bits with unit difference bounds.
    pub fn fair(n: u32) -> Result<Self> {
        Self::new(vec![T::half(); n as usize], vec![T::one(); n as usize])
    }

    pub fn n(&self) -> u32 {
        self.biases.len() as u32
    }

    pub fn biases(&self) -> &[T] {
        &self.biases
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    pub fn sum_c_squared(&self) -> T {
        compensated_sum(self.c.iter().map(|&ci| ci * ci))
    }
}

/// Exact conditional expectations `U_i(x_0 .. x_{i-1})` of a table.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleTrace<T> {
    n: u32,
    biases: Vec<T>,
    levels: Vec<Vec<T>>,
}

impl<T: Real> MartingaleTrace<T> {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Level `i` has `2^i` entries, one per prefix.
    pub fn level(&self, i: usize) -> &[T] {
        &self.levels[i]
    }

    pub fn value(&self, i: usize, prefix: Point) -> T {
        self.levels[i][prefix]
    }

    pub fn mean(&self) -> T {
        self.levels[0][0]
    }

    /// Largest `|U_i(p) - E[U_{i+1} | p]|` over all prefix nodes.
    pub fn martingale_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n as usize {
            let b = self.biases[i];
            let next = &self.levels[i + 1];
            for (p, &u) in self.levels[i].iter().enumerate() {
                let avg = (T::one() - b) * next[p] + b * next[p | 1 << i];
                worst = worst.max((u - avg).abs());
            }
        }
        worst
    }

    /// Largest `|U_{i+1} - U_i|` when coordinate `i` is revealed.
    pub fn max_increment(&self, i: usize) -> T {
        let next = &self.levels[i + 1];
        next.iter()
            .enumerate()
            .map(|(p, &v)| (v - self.levels[i][p & ((1 << i) - 1)]).abs())
            .fold(T::zero(), T::max)
    }
}

fn check_table<T: Real>(table: &[T], spec: &BoundedDiffSpec<T>) -> Result<u32> {
    let n = spec.n();
    if n > MAX_ENUM_DIM {
        return Err(Error::Dimension(n));
    }
    if table.len() != 1 << n {
        return Err(Error::Length { what: "function table", expected: 1 << n, got: table.len() });
    }
    Ok(n)
}

/// Builds every level by direct averaging over the unrevealed suffix, then
/// confirms the levels are consistent with one another.
pub fn doob_martingale<T: Real>(table: &[T], spec: &BoundedDiffSpec<T>) -> Result<MartingaleTrace<T>> {
    let n = check_table(table, spec)?;
    let mut levels = Vec::with_capacity(n as usize + 1);
    for i in 0..=n as usize {
        let suffix = weight_table(&spec.biases[i..]);
        let level = (0..1usize << i)
            .map(|p| compensated_sum(suffix.iter().enumerate().map(|(s, &w)| w * table[p | s << i])))
            .collect();
        levels.push(level);
    }
    let trace = MartingaleTrace { n, biases: spec.biases.clone(), levels };
    let scale = table.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let defect = trace.martingale_defect();
    if defect > T::lit(TOL) * scale {
        return Err(Error::Precondition(format!("martingale defect {defect} exceeds tolerance")));
    }
    Ok(trace)
}

/// Scans every edge of the cube for a bounded-difference violation.
pub fn check_bounded_differences<T: Real>(table: &[T], spec: &BoundedDiffSpec<T>) -> Result<()> {
    let n = check_table(table, spec)?;
    for i in 0..n as usize {
        let bound = spec.c[i];
        for x in (0..table.len()).filter(|x| x >> i & 1 == 0) {
            let y = x | 1 << i;
            let diff = (table[x] - table[y]).abs();
            if diff > bound + T::lit(TOL) {
                return Err(Error::BoundedDifference {
                    coord: i,
                    x,
                    y,
                    diff: diff.as_f64(),
                    bound: bound.as_f64(),
                });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCheck<T> {
    /// Exact `Pr[f - Ef >= z]`.
    pub prob: T,
    /// `exp(-2z² / Σ c_i²)`.
    pub bound: T,
    pub holds: bool,
}

/// Exact upper tail of a bounded-difference function against the
/// McDiarmid bound. The difference bounds are verified first.
pub fn azuma_mcdiarmid_check<T: Real>(table: &[T], spec: &BoundedDiffSpec<T>, z: T) -> Result<TailCheck<T>> {
    if !(z >= T::zero()) {
        return Err(Error::domain("z", z.as_f64(), "[0, inf)"));
    }
    check_bounded_differences(table, spec)?;
    let weights = weight_table(&spec.biases);
    let mean = compensated_sum(weights.iter().zip(table).map(|(&w, &f)| w * f));
    let cut = z - T::lit(TOL);
    let prob = compensated_sum(
        weights.iter().zip(table).filter(|(_, &f)| f - mean >= cut).map(|(&w, _)| w),
    )
    .min(T::one());
    let s = spec.sum_c_squared();
    let bound = if s > T::zero() {
        (-T::two() * z * z / s).exp()
    } else if z == T::zero() {
        T::one()
    } else {
        T::zero()
    };
    Ok(TailCheck { prob, bound, holds: prob <= bound + T::lit(TOL) })
}

/// `dist(x, B)` for every point, by layered dilation.
pub fn distance_table<T: Real>(b: &CubeSet) -> Result<Vec<T>> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut out = vec![T::zero(); b.size_of_cube()];
    let mut layer = b.clone();
    let mut d = 0u32;
    while !layer.is_full() {
        let next = neighborhood(&layer, 1)?;
        d += 1;
        for x in next.iter().filter(|&x| !layer.contains(x)) {
            out[x] = T::from_u32(d).unwrap();
        }
        layer = next;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowUpCheck<T> {
    pub dist: u32,
    pub bound: T,
    pub holds: bool,
}

fn radical<T: Real>(n: u32, mu: T) -> T {
    let half_n = T::from_u32(n).unwrap() / T::two();
    (half_n * (-mu.ln()).max(T::zero())).sqrt()
}

/// Hamming distance between two sets against
/// `√((n/2) ln 1/μ(B)) + √((n/2) ln 1/μ(B2))` under a product measure.
pub fn blowing_up_check<T: Real>(b: &CubeSet, b2: &CubeSet, bias: &[T]) -> Result<BlowUpCheck<T>> {
    let dist = set_distance(b, b2)?;
    let bound = radical(b.n(), product_measure(b, bias)?) + radical(b.n(), product_measure(b2, bias)?);
    Ok(BlowUpCheck { dist, bound, holds: T::from_u32(dist).unwrap() <= bound + T::lit(TOL) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorollaryCheck<T> {
    pub d_star: u32,
    pub mu_b: T,
    pub mu_bd: T,
    /// `μ(B) < ε`, so nothing is claimed.
    pub vacuous: bool,
    pub holds: bool,
}

/// `⌈2 √((n/2) ln(1/ε))⌉`, clipped to `n`.
pub fn corollary_radius(n: u32, eps: f64) -> u32 {
    let r = (2.0 * (n as f64 / 2.0 * (1.0 / eps).ln()).sqrt()).ceil();
    (r.max(0.0) as u32).min(n)
}

/// Biases of the product measure centred at `shift`: `τ` where the shift
/// bit is 0 and `1 - τ` where it is 1.
pub fn centred_biases<T: Real>(n: u32, tau: T, shift: Point) -> Vec<T> {
    (0..n).map(|i| if shift >> i & 1 == 1 { T::one() - tau } else { tau }).collect()
}

/// With `ε = 1/n`: if `μ(B) >= 1/n` then `μ(B_d*) >= 1 - 1/n`.
pub fn blowup_corollary_check<T: Real>(b: &CubeSet, tau: T, shift: Point) -> Result<CorollaryCheck<T>> {
    let n = b.n();
    if n < 2 {
        return Err(Error::Dimension(n));
    }
    blowup_corollary_check_eps(b, tau, shift, T::one() / T::from_u32(n).unwrap())
}

/// The corollary at a general threshold `ε ∈ (0, 1)`; the radius becomes
/// `⌈2 √((n/2) ln(1/ε))⌉`.
pub fn blowup_corollary_check_eps<T: Real>(
    b: &CubeSet,
    tau: T,
    shift: Point,
    eps: T,
) -> Result<CorollaryCheck<T>> {
    if !(tau >= T::zero() && tau <= T::one()) {
        return Err(Error::domain("tau", tau.as_f64(), "[0, 1]"));
    }
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::domain("eps", eps.as_f64(), "(0, 1)"));
    }
    b.check_point(shift)?;
    let n = b.n();
    let bias = centred_biases(n, tau, shift);
    let d_star = corollary_radius(n, eps.as_f64());
    let mu_b = product_measure(b, &bias)?;
    let mu_bd = product_measure(&neighborhood(b, d_star)?, &bias)?;
    let vacuous = mu_b < eps;
    Ok(CorollaryCheck { d_star, mu_b, mu_bd, vacuous, holds: vacuous || mu_bd >= T::one() - eps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{hamming_ball, hamming_distance};
    use crate::rng::trial_stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_set(n: u32, density: f64, seed: u64) -> CubeSet {
        let mut rng = trial_stream(seed, 0);
        let mut b = CubeSet::from_fn(n, |_| rng.random::<f64>() < density).unwrap();
        if b.is_empty() {
            b = CubeSet::singleton(n, 0).unwrap();
        }
        b
    }

    #[test]
    fn hoeffding_examples() {
        let c = hoeffding_lemma_check(&[2.0], &[1.0], 0.0).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert!(c.holds);
        for cc in [0.1, 1.0, 3.0] {
            let c = hoeffding_lemma_check(&[0.0, cc], &[0.5, 0.5], cc).unwrap();
            assert!((c.lhs - (cc / 2.0f64).cosh()).abs() < 1e-14);
            assert!(c.holds);
        }
        assert!(hoeffding_lemma_check(&[0.0, 2.0], &[0.5, 0.5], 1.0).is_err());
        assert!(hoeffding_lemma_check(&[0.0, 1.0], &[0.5, 0.6], 1.0).is_err());
    }

    #[test]
    fn hoeffding_random_variables() {
        for trial in 0..1000 {
            let mut rng = trial_stream(11, trial);
            let k = rng.random_range(1..=8);
            let c = rng.random_range(0.1..=4.0);
            let values: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=c)).collect();
            let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let t: f64 = w.iter().sum();
            let masses: Vec<f64> = w.iter().map(|v| v / t).collect();
            assert!(hoeffding_lemma_check(&values, &masses, c).unwrap().holds);
        }
    }

    #[test]
    fn martingale_of_constant_and_sum() {
        let spec = BoundedDiffSpec::<f64>::fair(6).unwrap();
        let trace = doob_martingale(&[3.5; 64], &spec).unwrap();
        for i in 0..=6 {
            assert!(trace.level(i).iter().all(|&v| v == 3.5));
        }
        assert!((0..6).all(|i| trace.max_increment(i) == 0.0));

        let sum: Vec<f64> = (0..64usize).map(|x| x.count_ones() as f64).collect();
        let trace = doob_martingale(&sum, &spec).unwrap();
        for i in 0..=6usize {
            for p in 0..1usize << i {
                let want = p.count_ones() as f64 + (6 - i) as f64 / 2.0;
                assert!((trace.value(i, p) - want).abs() < 1e-13);
            }
        }
        assert_eq!(trace.mean(), 3.0);
        assert!((0..6).all(|i| (trace.max_increment(i) - 0.5).abs() < 1e-13));
    }

    #[test]
    fn distance_function_martingale() {
        let b = random_set(12, 0.002, 3);
        let f: Vec<f64> = distance_table(&b).unwrap();
        for x in 0..1usize << 12 {
            let direct = b.iter().map(|y| hamming_distance(x, y)).min().unwrap();
            assert_eq!(f[x], direct as f64);
        }
        let spec = BoundedDiffSpec::new(vec![0.3; 12], vec![1.0; 12]).unwrap();
        check_bounded_differences(&f, &spec).unwrap();
        let trace = doob_martingale(&f, &spec).unwrap();
        assert!(trace.martingale_defect() <= 1e-12);
        assert!((0..12).all(|i| trace.max_increment(i) <= 1.0 + 1e-12));
    }

    #[test]
    fn binomial_tail() {
        for n in [4u32, 9, 14] {
            let f: Vec<f64> = (0..1usize << n).map(|x| x.count_ones() as f64).collect();
            let spec = BoundedDiffSpec::fair(n).unwrap();
            for zi in 0..=2 * n {
                let z = zi as f64 / 2.0;
                let c = azuma_mcdiarmid_check(&f, &spec, z).unwrap();
                let want: f64 = (0..=n)
                    .filter(|&k| k as f64 - n as f64 / 2.0 >= z - 1e-12)
                    .map(|k| binom(n, k) / 2f64.powi(n as i32))
                    .sum();
                assert!((c.prob - want).abs() < 1e-12);
                assert!((c.bound - (-2.0 * z * z / n as f64).exp()).abs() < 1e-15);
                assert!(c.holds);
            }
        }
    }

    fn binom(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
    }

    #[test]
    fn tails_of_distance_function() {
        let n = 14;
        let b = random_set(n, 0.001, 5);
        let f: Vec<f64> = distance_table(&b).unwrap();
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let spec = BoundedDiffSpec::new(vec![0.1; n as usize], vec![1.0; n as usize]).unwrap();
        for z in 0..=n {
            assert!(azuma_mcdiarmid_check(&f, &spec, z as f64).unwrap().holds);
            assert!(azuma_mcdiarmid_check(&neg, &spec, z as f64).unwrap().holds);
        }
    }

    #[test]
    fn tail_reports_witness() {
        let f: Vec<f64> = (0..16usize).map(|x| if x == 5 { 3.0 } else { 0.0 }).collect();
        let spec = BoundedDiffSpec::fair(4).unwrap();
        match azuma_mcdiarmid_check(&f, &spec, 1.0) {
            Err(Error::BoundedDifference { coord, x, y, .. }) => {
                assert_eq!(coord, 0);
                assert_eq!((x, y), (4, 5));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        let zero = BoundedDiffSpec::new(vec![0.5; 4], vec![0.0; 4]).unwrap();
        let flat = azuma_mcdiarmid_check(&[1.0; 16], &zero, 0.0).unwrap();
        assert_eq!((flat.prob, flat.bound), (1.0, 1.0));
        assert_eq!(azuma_mcdiarmid_check(&[1.0; 16], &zero, 0.5).unwrap().bound, 0.0);
    }

    #[test]
    fn blowing_up_examples() {
        let full = CubeSet::full(8).unwrap();
        let c = blowing_up_check::<f64>(&full, &full, &[0.5; 8]).unwrap();
        assert_eq!(c.dist, 0);
        assert!(c.bound.abs() < 1e-12 && c.holds);

        for n in [4u32, 10, 16] {
            let zero = CubeSet::singleton(n, 0).unwrap();
            let ones = CubeSet::singleton(n, (1 << n) - 1).unwrap();
            let c = blowing_up_check(&zero, &ones, &vec![0.5; n as usize]).unwrap();
            assert_eq!(c.dist, n);
            let want = n as f64 * (2.0 * 2f64.ln()).sqrt();
            assert!((c.bound - want).abs() < 1e-10, "{} vs {want}", c.bound);
            assert!(c.holds);
        }
    }

    #[test]
    fn blowing_up_random_pairs() {
        for trial in 0..200 {
            let mut rng = trial_stream(12, trial);
            let n = 12;
            let bias: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let b = random_set(n, rng.random_range(0.0..0.01), 1000 + trial);
            let b2 = random_set(n, rng.random_range(0.0..0.01), 2000 + trial);
            let fwd = blowing_up_check(&b, &b2, &bias).unwrap();
            let back = blowing_up_check(&b2, &b, &bias).unwrap();
            assert!(fwd.holds, "{fwd:?}");
            assert_eq!(fwd.holds, back.holds);
            assert_eq!(fwd.dist, back.dist);
        }
    }

    #[test]
    fn corollary_examples() {
        let full = CubeSet::full(10).unwrap();
        let c = blowup_corollary_check::<f64>(&full, 0.1, 0).unwrap();
        assert!((c.mu_b - 1.0).abs() < 1e-12 && (c.mu_bd - 1.0).abs() < 1e-12 && c.holds);
        assert_eq!(corollary_radius(16, 1.0 / 16.0), 10);

        let far = CubeSet::singleton(10, (1 << 10) - 1).unwrap();
        let c = blowup_corollary_check(&far, 0.1, 0).unwrap();
        assert!(c.vacuous && c.holds);

        let ball = hamming_ball(16, 0, 3).unwrap();
        for shift in [0usize, 1, 0b1111, 0xff] {
            let c = blowup_corollary_check(&ball, 0.1, shift).unwrap();
            assert!(c.holds, "{c:?}");
        }
        assert!(blowup_corollary_check(&CubeSet::full(1).unwrap(), 0.1, 0).is_err());
    }

    proptest! {
        #[test]
        fn lower_tail_mirrors_upper(seed in any::<u64>(), zi in 0u32..20) {
            let mut rng = trial_stream(seed, 0);
            let n = 8u32;
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            let bias: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let f: Vec<f64> = (0..1usize << n)
                .map(|x| (0..n as usize).filter(|i| x >> i & 1 == 1).map(|i| c[i]).sum())
                .collect();
            let neg: Vec<f64> = f.iter().map(|v| -v).collect();
            let spec = BoundedDiffSpec::new(bias, c).unwrap();
            let z = zi as f64 / 4.0;
            prop_assert!(azuma_mcdiarmid_check(&f, &spec, z).unwrap().holds);
            prop_assert!(azuma_mcdiarmid_check(&neg, &spec, z).unwrap().holds);
            let trace = doob_martingale(&f, &spec).unwrap();
            prop_assert!(trace.martingale_defect() <= 1e-12 * 16.0);
        }
    }
}
