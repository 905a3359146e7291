//! # noisecube
//!
//! Exact, desk-scale machinery for studying how independent bit-flipping
//! noise spreads sets and distributions on the Boolean cube `{0,1}^n`.
//!
//! - [`entcurve`]: binary entropy, the noise-parameter map `p + τ - 2pτ`, the
//!   optimal `(H(p), H(p'))` curve and the weaker Fourier / hypercontractive
//!   bound curves.
//! - [`cube`]: bit-packed subsets of the cube with Hamming balls,
//!   neighborhoods, interiors, set distance and product measures.
//! - [`noise`]: the per-position noise channel, seeded samplers, exact hit
//!   probabilities, threshold sets and the coupling gap.
//! - [`fourier`]: Walsh–Hadamard transform, noise multipliers, the degree-split
//!   certificate and the two-function hypercontractivity checker.
//! - [`shannon`]: distributions on the cube, noisy pushforward and the
//!   tensorized entropy bound.
//! - [`concentration`]: Hoeffding's lemma, Doob martingales, Azuma/McDiarmid
//!   tails and the blowing-up lemma with explicit constants.
//! - [`harness`]: set families and the weak/strong combinatorial bound trials.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`, which is what every tolerance in the test
//! suites assumes.

#![forbid(unsafe_code)]

// Validation uses `!(x >= 0)` so that NaN is rejected along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod cube;
pub mod entcurve;
mod error;
pub mod fourier;
pub mod harness;
pub mod noise;
pub mod rng;
mod scalar;
pub mod shannon;

pub use cube::{CubeSet, Point, MAX_DIM};
pub use error::{Error, Result};
pub use noise::NoiseSpec;
pub use scalar::Real;

pub type CurvePoint64 = entcurve::CurvePoint<f64>;
pub type BoundRow64 = entcurve::BoundRow<f64>;
pub type NoiseSpec64 = NoiseSpec<f64>;
pub type NoiseSpec32 = NoiseSpec<f32>;
pub type Spectrum64 = fourier::Spectrum<f64>;
pub type Spectrum32 = fourier::Spectrum<f32>;
pub type NazarovCertificate64 = fourier::NazarovCertificate<f64>;
pub type ProbVector64 = shannon::ProbVector<f64>;
pub type ProbVector32 = shannon::ProbVector<f32>;
pub type BoundedDiffSpec64 = concentration::BoundedDiffSpec<f64>;
pub type MartingaleTrace64 = concentration::MartingaleTrace<f64>;
