//! Isogeometric Poisson solver for immersed geometries.
//!
//! The discretisation uses truncated hierarchical B-splines (THB-splines) whose
//! levels may be produced by knot insertion (`h`), degree elevation (`p`) or both
//! (`k`). Boundary conditions on immersed curves are imposed with the shifted
//! boundary method: integrals live on the surrogate boundary formed by the edges
//! of uncut elements, and boundary data is transported there with truncated
//! Taylor expansions.
//!
//! Module map:
//!
//! * [`splines`]: univariate and tensor B-spline bases, two-scale relations.
//! * [`thb`]: hierarchical spaces, truncation, active elements.
//! * [`geometry`]: true domains, element classification, surrogate boundaries.
//! * [`sbm`]: shift operators, weak-form assembly, boundary marking.
//! * [`solver`], [`manufactured`], [`norms`], [`study`]: solve, error
//!   measurement and the convergence-study driver.
//! * [`config`]: the TOML run configuration shared with the CLI.

pub mod config;
pub mod error;
pub mod geometry;
pub mod manufactured;
pub mod norms;
pub mod par;
pub mod quadrature;
pub mod sbm;
pub mod solver;
pub mod splines;
pub mod study;
pub mod thb;
pub mod validation;

pub use error::{Error, Result};
