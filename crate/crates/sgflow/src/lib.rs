//! Sobolev gradient descent for semilinear elliptic energies on periodic grids.

pub mod coeffs;
pub mod error;
pub(crate) mod expr;
pub mod field;
pub mod grid;
pub mod mather;
pub(crate) mod modes;
pub mod operator;
pub mod flow;
pub mod potential;
pub mod quadrature;
pub mod scheme;

pub use coeffs::CoefficientField;
pub use error::{Error, Result};
pub use field::Field;
pub use grid::{BoundaryCondition, Grid};
pub use operator::{Discretization, EllipticOperator, SpectralDecomposition};
