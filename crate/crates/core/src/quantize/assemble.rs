use std::sync::Arc;

use sprs::TriMat;

use super::grid::SurfaceGrid;
use super::operator::{Adjointness, DiscreteOperator};
use crate::constants::PhysicalConstants;

fn shared(grid: &SurfaceGrid) -> (Arc<[f64]>, Arc<[usize]>) {
    (grid.weights().into(), grid.band_ordering().into())
}

/// Divergence-form `(1/√g) ∂_a(√g g^{ab} ∂_b)`. Each face couples its two
/// nodes symmetrically in `W L`, so the operator is W-self-adjoint and
/// annihilates constants by construction.
pub fn laplace_beltrami(grid: &SurfaceGrid) -> DiscreteOperator {
    let (weights, ordering) = shared(grid);
    let n = grid.len();
    let mut tri = TriMat::with_capacity((n, n), 4 * grid.faces().len());
    for f in grid.faces() {
        let s = f.stiffness;
        tri.add_triplet(f.a, f.b, s / weights[f.a]);
        tri.add_triplet(f.b, f.a, s / weights[f.b]);
        tri.add_triplet(f.a, f.a, -s / weights[f.a]);
        tri.add_triplet(f.b, f.b, -s / weights[f.b]);
    }
    DiscreteOperator::new("laplace_beltrami", tri.to_csr(), weights, Adjointness::SelfAdjoint)
        .with_ordering(ordering)
}

/// Stencil form of `D_i = (∇_s)_i + (M/2) n_i` before symmetrization:
/// face-flux differences of `g^{ab} ∂_a X_i ∂_b` plus the curvature diagonal.
pub fn raw_geometric_momentum(grid: &SurfaceGrid, axis: usize) -> DiscreteOperator {
    assert!(axis < 3, "axis must be 0, 1 or 2");
    let (weights, ordering) = shared(grid);
    let n = grid.len();
    let mut tri = TriMat::with_capacity((n, n), 4 * grid.faces().len() + n);
    for f in grid.faces() {
        let c = f.flux[axis];
        tri.add_triplet(f.a, f.b, c / weights[f.a]);
        tri.add_triplet(f.a, f.a, -c / weights[f.a]);
        tri.add_triplet(f.b, f.b, c / weights[f.b]);
        tri.add_triplet(f.b, f.a, -c / weights[f.b]);
    }
    for (i, node) in grid.nodes().iter().enumerate() {
        let c = &node.curvature;
        tri.add_triplet(i, i, 0.5 * c.mean_sum * c.normal[axis]);
    }
    DiscreteOperator::new(format!("D{axis}"), tri.to_csr(), weights, Adjointness::General)
        .with_ordering(ordering)
}

/// Real operator `D_i` with `p_i = -iħ D_i`, skew-symmetrized with respect
/// to the quadrature weights so that `p_i` is Hermitian.
pub fn geometric_momentum(grid: &SurfaceGrid, axis: usize) -> DiscreteOperator {
    raw_geometric_momentum(grid, axis).skew_symmetrized()
}

/// All three components `D_x, D_y, D_z`.
pub fn geometric_momenta(grid: &SurfaceGrid) -> [DiscreteOperator; 3] {
    [0, 1, 2].map(|axis| geometric_momentum(grid, axis))
}

/// Node values of `V_G`.
pub fn geometric_potential(grid: &SurfaceGrid, constants: &PhysicalConstants) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|n| n.curvature.geometric_potential_with(constants))
        .collect()
}

/// `H = -(ħ²/2μ) ∇²_LB + V_G`, with the potential optional.
pub fn hamiltonian(grid: &SurfaceGrid, include_vg: bool, constants: &PhysicalConstants) -> DiscreteOperator {
    let lb = laplace_beltrami(grid);
    let vg = if include_vg {
        geometric_potential(grid, constants)
    } else {
        vec![0.0; grid.len()]
    };
    let potential = DiscreteOperator::diagonal("V_G", &vg, lb.shared_weights());
    let name = if include_vg { "H" } else { "H (no V_G)" };
    lb.linear_combination(-constants.kinetic_prefactor(), &potential, 1.0, name)
}
