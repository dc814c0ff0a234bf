//! Continuous-Galerkin P1..P4 finite element solver for the
//! diffusion-advection-reaction equation
//!
//! ```text
//! -div(kappa grad u) + beta . grad u + c u = f      in Omega
//!                                        u = u_D    on Gamma_D
//!                 (kappa grad u) . n + alpha u = g  on Gamma_R
//! ```
//!
//! on tetrahedral meshes read from GMSH 4.1 ASCII files, with mixed
//! Dirichlet/Robin boundary conditions assigned through physical groups,
//! Crank-Nicolson time stepping for the transient variant, and
//! manufactured-solution error measurement.

pub mod assembly;
pub mod config;
pub mod driver;
pub mod element;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod msh;
pub mod postprocess;
pub mod quadrature;
pub mod solver;
pub mod sparse;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
