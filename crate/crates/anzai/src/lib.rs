//! Anzai skew-product dynamics on `X_o × T` with exact representations.
//!
//! The crate implements, over three concrete uniquely ergodic base systems
//! (irrational circle rotations, the one-point compactification of the
//! integers, finite cyclic shifts):
//!
//! * the skew-product `Φ(x, z) = (θ_o(x), f(x)·z)` together with its Koopman
//!   action, cocycle products, and Cesàro/Birkhoff averaging
//!   ([`skew`]);
//! * the observable algebra `C(X_o × T)` as finite trigonometric series in
//!   `z` with base-function coefficients ([`torus`]);
//! * solvers for the multiplicative cohomological equation
//!   `g(θ_o(x))·f(x)^n = g(x)` in its continuous and measure-a.e. forms,
//!   with the structure constants `n_o`, `m_o`, `k_o` ([`cohomology`]);
//! * scalar and parametric Fejér–Riesz factorization of strictly positive
//!   trigonometric polynomials ([`spectral`]);
//! * the family `E_A` of invariant conditional expectations onto the
//!   fixed-point subalgebra, parameterized by positive trace-one matrices,
//!   with equality classification, absorption, and domination checks
//!   ([`expectations`]);
//! * the `Z_∞` worked example as an executable golden fixture
//!   ([`fixtures`]).
//!
//! All representations are exact by construction: operations either stay
//! inside the finite representation class or fail loudly (frequency caps,
//! inexact irrational tags, transcendental witnesses). Numerical paths
//! (Birkhoff sums, grid suprema) use compensated summation in a fixed
//! order, so results are reproducible bit for bit.

pub mod base;
pub mod cohomology;
pub mod error;
pub mod exact;
pub mod expectations;
pub mod fixtures;
pub mod linalg;
pub mod sampling;
pub mod skew;
pub mod spectral;
pub mod torus;
pub mod util;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
