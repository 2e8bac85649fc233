//! Dense complex linear algebra, Hermitian eigendecomposition and
//! deterministic fixed-step time integration.

mod eigen;
mod matrix;
mod ode;
mod operators;
mod sparse;

pub use eigen::{hermitian_eig, operator_norm, EnergyBasis, DEFAULT_DEGENERACY_TOLERANCE};
pub use matrix::{ComplexMatrix, C64};
pub(crate) use matrix::{ONE, ZERO};
pub use ode::{
    evolve_rk4, evolve_rk4_with, rk4_step, step_grid, OdeState, Rk4Config, Trajectory,
    TrajectoryPoint,
};
pub use operators::{
    expectation, DensityMatrix, HermitianOperator, TraceCheck, DEFAULT_POSITIVITY_TOLERANCE,
};
pub use sparse::SparseMatrix;
