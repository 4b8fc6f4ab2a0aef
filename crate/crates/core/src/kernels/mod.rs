//! Numerical primitives: uniform radial grid, symmetric tridiagonal
//! eigenvalue extraction, banded LU, fixed-step RK4 and Simpson quadrature.

mod banded;
mod grid;
mod ode;
mod quadrature;
mod tridiag;

pub use banded::{BandedLu, BandedMatrix};
pub use grid::Grid;
pub use ode::{integrate_ivp, SignChange, Trajectory};
pub use quadrature::{cumulative_simpson, simpson};
pub use tridiag::{
    discretize_schrodinger, fourth_order_correction, lowest_eigenpairs, lowest_eigenvalues,
    refine_eigenpair, second_difference, sturm_count, EigenPair, TridiagonalOperator,
};
