//! Independent numerical ground truth for the first-order Dirac system.
//!
//! Nothing here uses the factorization: the matrix and shooting solvers work
//! from the physical potentials alone. [`probe::intertwine_check`] is the one
//! bridge, testing engine relations on oracle eigenpairs.

pub mod matrix;
pub mod probe;
pub mod shooting;
pub mod tridiag;

pub use matrix::{
    build_hamiltonian, eigen_solve, eigenvalues, frobenius_exponent, lowest_abs, Boundary, DiscreteHamiltonian, Grid,
};
pub use probe::{convergence_probe, intertwine_check, ConvergenceReport, IntertwineResidual, Verdict};
pub use shooting::{find_levels_shooting, shoot, ShootingSetup};
pub use tridiag::SymTridiagonal;
