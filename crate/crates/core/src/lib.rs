//! Numerical laboratory for growth and nodal geometry of solutions to second
//! order elliptic equations, with a full Steklov eigenfunction pipeline on the
//! flat disk: doubling indices, generalized frequency functions, cube counting,
//! the boundary-removal gauge/gluing transform, and nodal-set length
//! measurement.
//!
//! The crate is organized along the pipeline:
//!
//! - [`geometry`]: balls, cubes, simplices, subdivision, covering checks
//! - [`fields`]: grids (Cartesian and polar), sampled fields, interpolation,
//!   ball/sphere quadrature, coefficient verification
//! - [`linalg`]: banded LU and a cyclic Jacobi symmetric eigensolver
//! - [`elliptic`]: divergence-form discretization, Dirichlet solves, the
//!   discrete Dirichlet-to-Neumann map and Steklov spectrum on the disk
//! - [`transform`]: distance blend, exponential gauge, reflection gluing and
//!   wavelength rescaling that turn a Steklov pair into an interior solution
//! - [`growth`]: doubling indices, frequency profiles, monotonicity and
//!   cube-counting checks
//! - [`nodal`]: marching-squares nodal-set extraction and length measurement
//! - [`experiments`]: config-driven sweeps, exponent fits and file emission

pub mod elliptic;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod growth;
pub mod linalg;
pub mod nodal;
pub mod transform;

pub use elliptic::{DiscreteOperator, SteklovEigenpair};
pub use error::{Error, Result};
pub use fields::{CoefficientSet, Grid, ScalarField};
pub use geometry::{Ball, Cube, Simplex};
pub use growth::{CubeIndexReport, DoublingReport, FrequencyProfile};
pub use nodal::NodalCurve;
pub use transform::{BlendedDistance, DoubledField};
