//! Numerical toolkit for the local limit behaviour of triangle counts in
//! the Erdős–Rényi graph G(n,p).
//!
//! * [`graph`]: sampling, triangle counting, closed-form moments.
//! * [`oracle`]: exhaustive enumeration for n ≤ 7 (exact law of the count).
//! * [`charfn`]: Monte Carlo characteristic functions, regime bounds and
//!   the interval-covering check.
//! * [`decoupling`]: the α-function built from two independent copies.
//! * [`toolbox`]: Bernoulli charfn bound, Chernoff, Kim–Vu, Paley–Zygmund,
//!   Gaussian tail.
//! * [`metrics`]: Fourier inversion and distances to the Gaussian.

pub mod charfn;
pub mod decoupling;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod toolbox;

pub use error::{Error, Result};
pub use graph::{
    count_triangles, count_triangles_naive, moments, sample_gnp, standardize, BitGraph, GnpSample,
    GnpSampler, LatticePoint, Moments,
};
pub use oracle::{build_table, exact_charfn, exact_moments, exact_pmf, TriangleEdgeTable};
pub use scalar::{Real, Scalar};

pub use num_complex::Complex64;
pub use num_rational::BigRational;

/// Moments in double precision.
pub type Moments64 = Moments<f64>;
/// Moments in single precision.
pub type Moments32 = Moments<f32>;
/// Exact moments over the rationals.
pub type ExactMoments = Moments<BigRational>;
pub type LatticePoint64 = LatticePoint<f64>;
