//! Spectral toolkit for the spherically symmetric α²-dynamo with the
//! sech-shaped profile α(x) = 2/cosh(x − x0).
//!
//! For this profile the 2×2 matrix operator (∂ₓK∂ₓ + M − λI)Φ = 0 decouples
//! into two scalar quadratic pencils in ε = ±(½ − λ)^{1/2}. The crate solves
//! those pencils, maps the bound states back to the coupled problem, relates
//! them to a one-dimensional Dirac system through a SUSY factorization, and
//! treats the Jordan point ε = 0 perturbatively.
//!
//! Everything is generic over the scalar type (`f32`/`f64`); the `*F64`
//! aliases below are what the command-line front end uses.

pub mod dirac;
pub mod error;
pub mod kernels;
pub mod pencil;
pub mod perturbation;
pub mod profile;
pub mod scalar;
pub mod susy_exact;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type AlphaProfileF64 = profile::AlphaProfile<f64>;
pub type AlphaProfileF32 = profile::AlphaProfile<f32>;
pub type GridF64 = kernels::Grid<f64>;
pub type GridF32 = kernels::Grid<f32>;
pub type TridiagonalOperatorF64 = kernels::TridiagonalOperator<f64>;
pub type EigenPairF64 = kernels::EigenPair<f64>;
pub type SusyDataF64 = susy_exact::SusyData<f64>;
pub type PencilSolutionF64 = pencil::PencilSolution<f64>;
pub type PencilSolutionF32 = pencil::PencilSolution<f32>;
pub type SweepRowF64 = pencil::SweepRow<f64>;
pub type MatrixPipelineF64 = transform::MatrixPipeline<f64>;
pub type DiracSystemF64 = dirac::DiracSystem<f64>;
pub type JordanExpansionF64 = perturbation::JordanExpansion<f64>;
