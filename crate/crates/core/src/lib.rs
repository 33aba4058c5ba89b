//! Perturbed-lattice Weierstrass products and Fock-space zero-set diagnostics.
//!
//! The square lattice Λ = {a(m+in)} with pitch `a = sqrt(pi/alpha)` has the
//! critical density α/π. Pushing each nonzero real point outward by `a·R`
//! gives Λ_R, the zero set of the modified sigma function σ_{a,R}. This crate
//! evaluates σ_a, σ_{a,R} and the related one-row product ψ_R in log space,
//! integrates |σ_{a,R}|^p against the Gaussian weight on dyadic annuli, and
//! provides the scan harness used to check the comparability estimates
//! between these functions and lattice distances.
//!
//! Modules:
//! - [`lattice`]: point sets, disk counts, nearest-point distances.
//! - [`sigma`]: log-magnitude evaluators with truncation control.
//! - [`fock_norm`]: polar quadrature of the weighted norm and growth fits.
//! - [`density`]: finite-scale Beurling–Landau density estimates.
//! - [`verify`]: ratio scans and exact-identity checks.
//! - [`suite`]: the full battery of pass/fail assertions.

pub mod density;
pub mod error;
pub mod exec;
pub mod fock_norm;
pub mod lattice;
pub mod sigma;
pub mod special;
pub mod suite;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{LatticeIndex, LatticeSpec, PointSet, Variant};
pub use sigma::{TruncationPolicy, WeightedLogValue};
