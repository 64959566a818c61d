//! Discrete operators on structured chart grids.
//!
//! Functions live on grid nodes with the inner product `⟨φ, ψ⟩ = Σ w φ ψ`,
//! `w = √g h_u h_v`. Every quantum operator is `±iħ` times a real operator:
//! `p_i = -iħ D_i` with `D_i` W-skew-adjoint, and `H` is W-self-adjoint.

mod assemble;
mod eigen;
mod grid;
mod operator;
mod suite;
mod verify;

pub use assemble::{
    geometric_momenta, geometric_momentum, geometric_potential, hamiltonian, laplace_beltrami,
    raw_geometric_momentum,
};
pub use eigen::{
    cluster_eigenvalues, spectrum, spectrum_with, BandCholesky, EigenCluster, SpectrumOptions, SpectrumResult,
    DEFAULT_MAX_ITERATIONS, DEFAULT_SPECTRUM_TOLERANCE,
};
pub use grid::{Face, GridNode, SurfaceGrid, MIN_GRID_SIZE, MIN_NODE_SQRT_G, ORTHOGONALITY_TOLERANCE};
pub use operator::{weighted_dot, weighted_norm, Adjointness, DiscreteOperator};
pub use suite::{test_functions, TestFunction, TEST_SUITE_VERSION};
pub use verify::{
    build_ladder, default_ladder, discriminator, fit_order, identity_description, ordering_identity_checks,
    p_squared_consistency, quantum_condition_residuals, reports_table, DiscriminatorReport, Expectation,
    GridResidual, Order, VerificationReport, DISCRIMINATOR_RATIO, EXACT_RELATIVE, HAMILTONIAN_VARIANT,
    MIN_LADDER, MIN_ORDER, ORDER_TOLERANCE, PLATEAU_ORDER, QUANTUM_IDENTITIES, TARGET_ORDER,
};
