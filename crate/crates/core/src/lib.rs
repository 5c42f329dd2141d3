//! Pseudo-spectral toolkit for the anisotropic incompressible Navier-Stokes
//! system on a periodic box: transforms, anisotropic Littlewood-Paley
//! decompositions, Besov-type norms, the heat-flow splitting, and a
//! Friedrichs-Galerkin time integrator.

pub mod besov;
pub mod dyadic;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod heat;
pub mod nonlinear;
pub mod partition;
pub mod quadrature;
pub mod snapshot;
pub mod solver;

pub use dyadic::DyadicDecomposition;
pub use error::{Error, Result};
pub use field::{leray_project, mixed_norm, mixed_norm_of_samples, Axis, SpectralField, VectorField};
pub use grid::Grid;
pub use partition::{make_partition, PartitionFunction};
