//! Bit-packed subsets of the Boolean cube `{0,1}^n`.
//!
//! Point `x` is the mask whose bit `i` is coordinate `i + 1` of the string;
//! point 0 is the all-zeros string. Membership is stored as `2^n` bits packed
//! into `u64` words, bit `x % 64` of word `x / 64`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Largest supported dimension (a `2^26`-bit membership array is 8 MiB).
pub const MAX_DIM: u32 = 26;

/// Largest `n` accepted by [`ball_size`] (exact `u128` arithmetic).
pub const MAX_BALL_DIM: u32 = 120;

/// A point of the cube, as a bit mask.
pub type Point = usize;

/// For `i < 6`: the bit positions inside a word whose index has bit `i` clear.
const LOW_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CubeSet {
    n: u32,
    words: Vec<u64>,
}

pub(crate) fn check_dim(n: u32) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Dimension(n))
    }
}

fn word_count(n: u32) -> usize {
    if n >= 6 {
        1 << (n - 6)
    } else {
        1
    }
}

/// Valid-bit mask for the (single) word when `n < 6`.
fn tail_mask(n: u32) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1u32 << n)) - 1
    }
}

impl CubeSet {
    pub fn empty(n: u32) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n, words: vec![0; word_count(n)] })
    }

    pub fn full(n: u32) -> Result<Self> {
        check_dim(n)?;
        let mut words = vec![u64::MAX; word_count(n)];
        words[0] &= tail_mask(n);
        Ok(Self { n, words })
    }

    pub fn singleton(n: u32, x: Point) -> Result<Self> {
        Self::from_points(n, [x])
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(n: u32, points: I) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for x in points {
            set.check_point(x)?;
            set.words[x >> 6] |= 1 << (x & 63);
        }
        Ok(set)
    }

    pub fn from_fn<F: FnMut(Point) -> bool>(n: u32, mut pred: F) -> Result<Self> {
        let mut set = Self::empty(n)?;
        for x in 0..set.size_of_cube() {
            if pred(x) {
                set.words[x >> 6] |= 1 << (x & 63);
            }
        }
        Ok(set)
    }

    /// Build from the low `2^n` bits of `bits` (requires `n <= 6`).
    pub fn from_bits(n: u32, bits: u64) -> Result<Self> {
        check_dim(n)?;
        if n > 6 {
            return Err(Error::Precondition(format!("from_bits needs n <= 6, got {n}")));
        }
        if bits & !tail_mask(n) != 0 {
            return Err(Error::Precondition(format!("bits {bits:#x} exceed 2^{n} points")));
        }
        Ok(Self { n, words: vec![bits] })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of points in the whole cube, `2^n`.
    pub fn size_of_cube(&self) -> usize {
        1 << self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Cardinality.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.size_of_cube()
    }

    pub fn contains(&self, x: Point) -> bool {
        x < self.size_of_cube() && self.words[x >> 6] >> (x & 63) & 1 == 1
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.words.iter().enumerate().flat_map(|(j, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some((j << 6) | b)
            })
        })
    }

    /// `0.0`/`1.0` indicator table of length `2^n`.
    pub fn indicator<T: Real>(&self) -> Vec<T> {
        (0..self.size_of_cube())
            .map(|x| if self.contains(x) { T::one() } else { T::zero() })
            .collect()
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        words[0] &= tail_mask(self.n);
        Self { n: self.n, words }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.check_same_dim(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    pub fn intersects(&self, other: &Self) -> Result<bool> {
        self.check_same_dim(other)?;
        Ok(self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0))
    }

    /// Image of the set under `x ↦ x XOR shift`.
    pub fn translate(&self, shift: Point) -> Result<Self> {
        self.check_point(shift)?;
        Self::from_points(self.n, self.iter().map(|x| x ^ shift))
    }

    pub(crate) fn check_point(&self, x: Point) -> Result<()> {
        if x < self.size_of_cube() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange { point: x, n: self.n })
        }
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.n, got: other.n })
        }
    }

    fn zip_words(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Result<Self> {
        self.check_same_dim(other)?;
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { n: self.n, words })
    }

    /// One round of dilation: the set OR its `n` single-bit-flipped copies.
    fn dilate_once(&self) -> Self {
        let mut out = self.words.clone();
        for i in 0..self.n as usize {
            if i < 6 {
                let (s, m) = (1u32 << i, LOW_MASKS[i]);
                for (o, &w) in out.iter_mut().zip(&self.words) {
                    *o |= ((w & m) << s) | ((w >> s) & m);
                }
            } else {
                let stride = 1usize << (i - 6);
                for (j, o) in out.iter_mut().enumerate() {
                    *o |= self.words[j ^ stride];
                }
            }
        }
        Self { n: self.n, words: out }
    }

    /// Serialize as `n=<dim>` followed by a line of lowercase hex: the
    /// membership bytes in little-endian point order, byte `k` holding points
    /// `8k..8k+8` with point `8k + j` in bit `j`.
    pub fn to_hex(&self) -> String {
        let nbytes = ((1usize << self.n) / 8).max(1);
        let mut out = format!("n={}\n", self.n);
        out.reserve(2 * nbytes + 1);
        for k in 0..nbytes {
            let byte = (self.words[k / 8] >> ((k % 8) * 8)) as u8;
            out.push_str(&format!("{byte:02x}"));
        }
        out.push('\n');
        out
    }

    /// Parse the format written by [`CubeSet::to_hex`]. Whitespace inside the
    /// hex body is ignored.
    pub fn from_hex(text: &str) -> Result<Self> {
        let text = text.trim_start();
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let n: u32 = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header line {header:?}")))?;
        let mut set = Self::empty(n)?;
        let digits: Vec<u8> = body.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let nbytes = ((1usize << n) / 8).max(1);
        if digits.len() != 2 * nbytes {
            return Err(Error::Parse(format!(
                "expected {} hex digits for n={n}, found {}",
                2 * nbytes,
                digits.len()
            )));
        }
        for (k, pair) in digits.chunks(2).enumerate() {
            let s = std::str::from_utf8(pair).map_err(|e| Error::Parse(e.to_string()))?;
            if s.bytes().any(|b| b.is_ascii_uppercase()) {
                return Err(Error::Parse(format!("uppercase hex digit in {s:?}")));
            }
            let byte = u8::from_str_radix(s, 16).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
            set.words[k / 8] |= (byte as u64) << ((k % 8) * 8);
        }
        if set.words[0] & !tail_mask(n) != 0 {
            return Err(Error::Parse(format!("points beyond 2^{n} are set")));
        }
        Ok(set)
    }
}

impl fmt::Debug for CubeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n <= 6 {
            write!(f, "CubeSet(n={}, {:?})", self.n, self.iter().collect::<Vec<_>>())
        } else {
            write!(f, "CubeSet(n={}, len={})", self.n, self.len())
        }
    }
}

pub fn hamming_distance(x: Point, y: Point) -> u32 {
    (x ^ y).count_ones()
}

/// All points within Hamming distance `r` of `center`.
pub fn hamming_ball(n: u32, center: Point, r: u32) -> Result<CubeSet> {
    check_dim(n)?;
    if r > n {
        return Err(Error::domain("radius", r as f64, "0..=n"));
    }
    if center >= 1 << n {
        return Err(Error::PointOutOfRange { point: center, n });
    }
    CubeSet::from_fn(n, |x| hamming_distance(x, center) <= r)
}

/// `Σ_{k=0..=d} C(n, k)`, exactly.
pub fn ball_size(n: u32, d: u32) -> Result<u128> {
    if n > MAX_BALL_DIM {
        return Err(Error::domain("n", n as f64, "0..=120"));
    }
    if d > n {
        return Err(Error::domain("radius", d as f64, "0..=n"));
    }
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=d {
        total += binom;
        // C(n, k+1) = C(n, k) (n-k) / (k+1), exact at each step
        binom = binom * (n - k) as u128 / (k + 1) as u128;
    }
    Ok(total)
}

fn check_radius(b: &CubeSet, d: u32) -> Result<()> {
    if d > b.n {
        Err(Error::domain("radius", d as f64, "0..=n"))
    } else {
        Ok(())
    }
}

/// Points within distance `d` of some member of `b`, by `d` rounds of
/// single-bit dilation.
pub fn neighborhood(b: &CubeSet, d: u32) -> Result<CubeSet> {
    check_radius(b, d)?;
    let mut cur = b.clone();
    for _ in 0..d {
        let next = cur.dilate_once();
        if next == cur {
            break;
        }
        cur = next;
    }
    Ok(cur)
}

/// Points whose whole `d`-ball lies inside `b`; the complement of the
/// `d`-neighborhood of the complement.
pub fn interior(b: &CubeSet, d: u32) -> Result<CubeSet> {
    check_radius(b, d)?;
    Ok(neighborhood(&b.complement(), d)?.complement())
}

/// Minimum Hamming distance between members of `b` and `b2`.
pub fn set_distance(b: &CubeSet, b2: &CubeSet) -> Result<u32> {
    b.check_same_dim(b2)?;
    if b.is_empty() || b2.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut cur = b.clone();
    let mut d = 0;
    while !cur.intersects(b2)? {
        cur = cur.dilate_once();
        d += 1;
    }
    Ok(d)
}

/// Measure of `b` under the product measure where coordinate `i` is 1 with
/// probability `bias[i]`.
pub fn product_measure<T: Real>(b: &CubeSet, bias: &[T]) -> Result<T> {
    let n = b.n as usize;
    if bias.len() != n {
        return Err(Error::Length { what: "bias list", expected: n, got: bias.len() });
    }
    if let Some(&p) = bias.iter().find(|&&p| !(p >= T::zero() && p <= T::one())) {
        return Err(Error::domain("bias", p.as_f64(), "[0, 1]"));
    }
    // split the weight table into low and high halves of the coordinates
    let lo_bits = n / 2;
    let lo = weight_table(&bias[..lo_bits]);
    let hi = weight_table(&bias[lo_bits..]);
    let lo_mask = (1usize << lo_bits) - 1;
    let mut acc = CompensatedSum::new();
    for x in b.iter() {
        acc.add(lo[x & lo_mask] * hi[x >> lo_bits]);
    }
    Ok(acc.value())
}

/// `table[x] = Π_i (bias_i if x_i = 1 else 1 - bias_i)` over `2^len` points.
pub(crate) fn weight_table<T: Real>(bias: &[T]) -> Vec<T> {
    let mut table = vec![T::one()];
    for &p in bias {
        let q = T::one() - p;
        let mut next = Vec::with_capacity(table.len() * 2);
        next.extend(table.iter().map(|&w| w * q));
        next.extend(table.iter().map(|&w| w * p));
        table = next;
    }
    table
}

/// `#B / 2^n`.
pub fn uniform_measure<T: Real>(b: &CubeSet) -> T {
    T::from_usize(b.len()).unwrap() / T::from_usize(b.size_of_cube()).unwrap()
}

/// `log₂ #B`.
pub fn uniform_log_density<T: Real>(b: &CubeSet) -> Result<T> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(T::from_usize(b.len()).unwrap().log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_set(n: u32, density: f64, seed: u64) -> CubeSet {
        let mut rng = trial_stream(seed, n as u64);
        CubeSet::from_fn(n, |_| rng.random::<f64>() < density).unwrap()
    }

    /// Brute-force neighborhood: scan every pair.
    fn neighborhood_oracle(b: &CubeSet, d: u32) -> CubeSet {
        let members: Vec<_> = b.iter().collect();
        CubeSet::from_fn(b.n(), |x| members.iter().any(|&y| hamming_distance(x, y) <= d)).unwrap()
    }

    #[test]
    fn dimension_cap() {
        assert_eq!(CubeSet::empty(0).unwrap_err(), Error::Dimension(0));
        assert_eq!(CubeSet::empty(27).unwrap_err(), Error::Dimension(27));
        let big = CubeSet::full(MAX_DIM).unwrap();
        assert_eq!(big.words().len() * 64, 1 << MAX_DIM);
    }

    #[test]
    fn small_dimensions_keep_tail_clear() {
        for n in 1..=5 {
            let full = CubeSet::full(n).unwrap();
            assert_eq!(full.len(), 1 << n);
            assert!(full.complement().is_empty());
            assert_eq!(neighborhood(&CubeSet::singleton(n, 0).unwrap(), n).unwrap(), full);
        }
    }

    #[test]
    fn ball_examples() {
        let single = hamming_ball(5, 0, 0).unwrap();
        assert_eq!(single.iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(hamming_ball(5, 0, 5).unwrap().len(), 32);
        assert_eq!(hamming_ball(5, 0, 1).unwrap().len(), 6);
        assert!(hamming_ball(5, 0, 6).is_err());
        assert!(hamming_ball(5, 32, 1).is_err());
    }

    #[test]
    fn ball_size_examples() {
        assert_eq!(ball_size(5, 1).unwrap(), 6);
        assert_eq!(ball_size(20, 20).unwrap(), 1 << 20);
        assert_eq!(ball_size(16, 4).unwrap(), 2517);
        assert_eq!(ball_size(120, 120).unwrap(), 1u128 << 120);
        assert!(ball_size(4, 5).is_err());
        assert!(ball_size(121, 1).is_err());
    }

    #[test]
    fn ball_size_matches_ball_cardinality() {
        for n in 1..=16 {
            for d in 0..=n {
                let center = (0x9e37usize * n as usize) & ((1 << n) - 1);
                let ball = hamming_ball(n, center, d).unwrap();
                assert_eq!(ball.len() as u128, ball_size(n, d).unwrap(), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn neighborhood_examples() {
        let b = random_set(9, 0.1, 1);
        assert_eq!(neighborhood(&b, 0).unwrap(), b);
        assert_eq!(neighborhood(&CubeSet::singleton(5, 0).unwrap(), 2).unwrap().len(), 16);
        let b = random_set(12, 0.002, 2);
        assert!(!b.is_empty());
        assert_eq!(neighborhood(&b, 3).unwrap(), neighborhood_oracle(&b, 3));
    }

    #[test]
    fn neighborhood_of_ball_is_ball() {
        for n in [3, 7, 10] {
            for r in 0..=n {
                for d in 0..=n {
                    let got = neighborhood(&hamming_ball(n, 5 % (1 << n), r).unwrap(), d).unwrap();
                    assert_eq!(got, hamming_ball(n, 5 % (1 << n), (r + d).min(n)).unwrap());
                }
            }
        }
    }

    #[test]
    fn interior_examples() {
        let full = CubeSet::full(8).unwrap();
        assert_eq!(interior(&full, 3).unwrap(), full);
        for r in 2..=6 {
            let ball = hamming_ball(8, 0x5a, r).unwrap();
            assert_eq!(interior(&ball, 2).unwrap(), hamming_ball(8, 0x5a, r - 2).unwrap());
        }
        let b = random_set(10, 0.9, 3);
        let inner = interior(&b, 2).unwrap();
        for x in inner.iter() {
            assert!(hamming_ball(10, x, 2).unwrap().is_subset(&b).unwrap());
        }
        // and nothing was missed
        for x in 0..1 << 10 {
            if !inner.contains(x) {
                assert!(!hamming_ball(10, x, 2).unwrap().is_subset(&b).unwrap());
            }
        }
    }

    #[test]
    fn distance_examples() {
        let b = random_set(10, 0.3, 4);
        assert_eq!(set_distance(&b, &b).unwrap(), 0);
        let zero = CubeSet::singleton(12, 0).unwrap();
        let ones = CubeSet::singleton(12, (1 << 12) - 1).unwrap();
        assert_eq!(set_distance(&zero, &ones).unwrap(), 12);

        let b = random_set(12, 0.001, 5);
        let b2 = random_set(12, 0.001, 6).difference_for_test(&b);
        let oracle = b
            .iter()
            .flat_map(|x| b2.iter().map(move |y| hamming_distance(x, y)))
            .min()
            .unwrap();
        assert_eq!(set_distance(&b, &b2).unwrap(), oracle);
        assert_eq!(set_distance(&b, &CubeSet::empty(12).unwrap()), Err(Error::EmptySet));
    }

    impl CubeSet {
        fn difference_for_test(&self, other: &Self) -> Self {
            self.intersection(&other.complement()).unwrap()
        }
    }

    #[test]
    fn product_measure_examples() {
        let n = 10;
        let bias = vec![0.3; n as usize];
        let full = CubeSet::full(n).unwrap();
        assert!((product_measure::<f64>(&full, &bias).unwrap() - 1.0).abs() < 1e-14);
        let top = CubeSet::singleton(n, (1 << n) - 1).unwrap();
        assert!((product_measure(&top, &bias).unwrap() - 0.3f64.powi(10)).abs() < 1e-18);
        assert!(product_measure(&top, &bias[..9]).is_err());
        assert!(product_measure(&top, &[1.2; 10]).is_err());
    }

    #[test]
    fn product_measure_matches_sampling() {
        let n = 10;
        let b = random_set(n, 0.4, 7);
        let mu = product_measure(&b, &vec![0.3; n as usize]).unwrap();
        let mut rng = trial_stream(11, 0);
        let samples = 1_000_000;
        let hits = (0..samples)
            .filter(|_| {
                let x = (0..n).fold(0usize, |x, i| x | ((rng.random::<f64>() < 0.3) as usize) << i);
                b.contains(x)
            })
            .count();
        let est = hits as f64 / samples as f64;
        let sigma = (mu * (1.0 - mu) / samples as f64).sqrt();
        assert!((est - mu).abs() <= 3.0 * sigma, "est={est} mu={mu} sigma={sigma}");
    }

    #[test]
    fn log_density_examples() {
        assert_eq!(uniform_log_density::<f64>(&CubeSet::full(9).unwrap()).unwrap(), 9.0);
        assert_eq!(uniform_log_density::<f64>(&CubeSet::singleton(9, 3).unwrap()).unwrap(), 0.0);
        let b = hamming_ball(16, 0, 4).unwrap();
        assert_eq!(uniform_log_density::<f64>(&b).unwrap(), 2517f64.log2());
        assert!(uniform_log_density::<f64>(&CubeSet::empty(3).unwrap()).is_err());
    }

    #[test]
    fn hex_format() {
        let b = CubeSet::from_points(4, [0, 5, 15]).unwrap();
        assert_eq!(b.to_hex(), "n=4\n2180\n");
        assert_eq!(CubeSet::from_hex("n=4\n2180\n").unwrap(), b);
        let tiny = CubeSet::from_points(2, [1, 2]).unwrap();
        assert_eq!(tiny.to_hex(), "n=2\n06\n");
        assert!(CubeSet::from_hex("n=2\n16\n").is_err());
        assert!(CubeSet::from_hex("n=4\n21\n").is_err());
        assert!(CubeSet::from_hex("n=4\n21A0\n").is_err());
        assert!(CubeSet::from_hex("dim=4\n2180\n").is_err());
    }

    proptest! {
        #[test]
        fn hex_round_trip(n in 1u32..=9, seed in any::<u64>(), density in 0.0f64..1.0) {
            let b = random_set(n, density, seed);
            prop_assert_eq!(CubeSet::from_hex(&b.to_hex()).unwrap(), b);
        }

        #[test]
        fn duality_and_monotonicity(n in 1u32..=10, seed in any::<u64>(), density in 0.0f64..1.0, d in 0u32..4) {
            let b = random_set(n, density, seed);
            let d = d.min(n);
            let nb = neighborhood(&b, d).unwrap();
            let inner = interior(&b, d).unwrap();
            prop_assert_eq!(&inner, &neighborhood(&b.complement(), d).unwrap().complement());
            prop_assert!(b.is_subset(&nb).unwrap());
            prop_assert!(inner.is_subset(&b).unwrap());
            if d < n {
                prop_assert!(nb.is_subset(&neighborhood(&b, d + 1).unwrap()).unwrap());
                prop_assert!(interior(&b, d + 1).unwrap().is_subset(&inner).unwrap());
            }
        }

        #[test]
        fn complement_measure(n in 1u32..=12, seed in any::<u64>(), density in 0.0f64..1.0, p in 0.0f64..=1.0) {
            let b = random_set(n, density, seed);
            let bias = vec![p; n as usize];
            let mu = product_measure(&b, &bias).unwrap();
            let mu_c = product_measure(&b.complement(), &bias).unwrap();
            prop_assert!((mu + mu_c - 1.0).abs() <= 1e-12);
        }
    }
}
