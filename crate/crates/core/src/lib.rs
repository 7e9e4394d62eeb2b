//! Numerical laboratory for operator-size dynamics in open Brownian SYK
//! models.
//!
//! The crate assembles the exact finite-N transition generators that drive
//! the operator-size distribution P(n, t) for two models (A: system-bath
//! hopping plus a three-system-fermion bath coupling; B: hopping plus an
//! intra-system four-fermion interaction) under two definitions of operator
//! size, propagates size distributions, evaluates the infinite-N closed
//! forms and the scramblon continuum distribution, analyzes the generator
//! spectrum, and cross-validates everything against an independent SU(2)
//! spin-representation construction of the same dynamics.

pub mod analytic;
pub mod error;
pub mod generator;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod propagate;
pub mod scramblon;
pub mod spectral;
pub mod spin;
pub mod verify;

pub use error::{Error, Result};
pub use generator::Generator;
pub use model::{ModelKind, ModelSpec, SizeDefinition};
pub use propagate::{SizeDistribution, Trajectory};
