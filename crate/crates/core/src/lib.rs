//! Certified Sherman-type inequality chains for strongly convex functions.
//!
//! The crate evaluates, for a weighted-majorization pair `(y, b) ≺ (x, a)` and
//! a function `f` that is strongly convex with modulus `c` on `[α, β]`, the
//! chain
//!
//! ```text
//! Σ bᵢ f(yᵢ) ≤ Σ aⱼ f(xⱼ) − c(Σ aⱼ xⱼ² − Σ bᵢ yᵢ²) ≤ Σ aⱼ f(xⱼ) ≤ converse bound
//! ```
//!
//! together with its higher-order form built on Fink's identity, and applies
//! it to Csiszár-type divergences between positive measures.
//!
//! Modules:
//!
//! - [`convexity`]: functions on intervals, divided differences, modulus certificates
//! - [`majorization`]: majorization tests, T-transform construction, weighted pairs
//! - [`bounds`]: strong Jensen, Lah-Ribarič, Sherman and converse Sherman
//! - [`fink`]: Fink's identity, the Sherman-difference identity and the higher-order bound
//! - [`divergence`]: f-divergence catalog, entropy, and divergence sandwiches
//! - [`cli`]: the JSON/CSV front end behind the `sherman-bounds` binary

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod convexity;
pub mod divergence;
pub mod error;
pub mod fink;
pub mod majorization;
pub mod quadrature;
pub mod report;

pub use bounds::{full_chain, BoundChain, Modulus};
pub use convexity::{divided_difference, named_function, FunctionSpec, Interval, ModulusCertificate};
pub use divergence::{DistributionPair, DivergenceKernel, Sandwich};
pub use error::{Error, Result};
pub use fink::FinkReport;
pub use majorization::{StochasticKind, StochasticMatrix, WeightedPair, WeightedVector};
pub use quadrature::QuadratureConfig;
