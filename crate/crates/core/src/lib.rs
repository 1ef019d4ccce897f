//! Numerical bounds for the lowest magnetic Steklov eigenvalue in planar domains.

pub mod aux1d;
pub mod disk;
pub mod error;
pub mod exterior;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod meshing;
pub mod quadrature;
pub mod roots;
pub mod specfun;
pub mod steklov2d;
pub mod torsion;

pub use error::{Error, Result};
