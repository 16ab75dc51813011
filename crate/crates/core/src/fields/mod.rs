//! Grids over rectangle and disk domains, sampled scalar fields with bilinear
//! interpolation, suprema and integrals over balls and spheres, and
//! verification of the ellipticity/boundedness/Lipschitz conditions on
//! coefficient sets.

mod coefficients;
mod field;
mod grid;
mod io;
mod quadrature;

pub use coefficients::CoefficientSet;
pub use field::{FieldTag, ScalarField};
pub use grid::{Grid, GridKind};
pub use io::{load_field_csv, save_field_csv};
pub use quadrature::{
    ball_integral, sphere_integral, sup_abs_on_ball, BallIntegrand, SphereIntegrand,
};
