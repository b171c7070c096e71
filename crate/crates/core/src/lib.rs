//! Numerical capacity estimation and curvature comparison bounds.
//!
//! The crate computes the Newtonian capacity
//! `cap(K) = inf ∫ |∇φ|²` of compact sets in two settings:
//!
//! * convex bodies in ℝ³ given by exact signed-distance functions, solved on
//!   embedded-boundary grids ([`solver`]);
//! * geodesic balls of rotationally symmetric model manifolds
//!   `dt² + g(t)² h₀`, where the capacity reduces to a one-dimensional
//!   quadrature ([`radial`]).
//!
//! Around those sit the tools needed to check the two comparison
//! inequalities `cap(K) ≥ (n−1) H₀ |∂K|` (non-positive curvature, principal
//! curvatures at least `H₀`) and `cap(K) ≤ (n−1) H₀ |∂K|` (non-negative Ricci,
//! mean curvature at most `H₀`): curvature sampling and λ-convexity on bodies
//! ([`geometry`]), curvature certificates on models ([`model`]) and the
//! Riccati flows behind both bounds ([`comparison`]).
//!
//! Everything here is `no_std` with `alloc`. File formats, scenarios and the
//! command line live in the `capacity-harness` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod comparison;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod math;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
pub use math::Vec3;
