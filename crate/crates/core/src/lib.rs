//! Exact computations for the heterotic deformation complex on homogeneous
//! complex manifolds.

pub mod chartlocal;
pub mod cli;
pub mod cohomology;
pub mod error;
pub mod exterior;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod qcomplex;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
