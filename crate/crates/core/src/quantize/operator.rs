use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sprs::{CsMat, TriMat};

/// Symmetry of an operator with respect to `⟨φ, ψ⟩ = Σ w φ ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Adjointness {
    SelfAdjoint,
    SkewAdjoint,
    General,
}

/// A sparse real operator on node-valued functions.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    name: String,
    matrix: CsMat<f64>,
    weights: Arc<[f64]>,
    kind: Adjointness,
    ordering: Option<Arc<[usize]>>,
}

/// `Σ w a b`.
pub fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// `sqrt(Σ w a²)`.
pub fn weighted_norm(w: &[f64], a: &[f64]) -> f64 {
    weighted_dot(w, a, a).sqrt()
}

impl DiscreteOperator {
    pub fn new(name: impl Into<String>, matrix: CsMat<f64>, weights: Arc<[f64]>, kind: Adjointness) -> Self {
        assert_eq!(matrix.rows(), weights.len(), "operator and weights disagree in size");
        assert_eq!(matrix.cols(), weights.len(), "operator must be square");
        Self {
            name: name.into(),
            matrix: matrix.to_csr(),
            weights,
            kind,
            ordering: None,
        }
    }

    /// `diag(values)`, self-adjoint.
    pub fn diagonal(name: impl Into<String>, values: &[f64], weights: Arc<[f64]>) -> Self {
        let n = values.len();
        let matrix = CsMat::new((n, n), (0..=n).collect(), (0..n).collect(), values.to_vec());
        Self::new(name, matrix, weights, Adjointness::SelfAdjoint)
    }

    /// Attaches a bandwidth-reducing node permutation for factorizations.
    pub fn with_ordering(mut self, ordering: Arc<[usize]>) -> Self {
        self.ordering = Some(ordering);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn shared_weights(&self) -> Arc<[f64]> {
        self.weights.clone()
    }

    pub fn adjointness(&self) -> Adjointness {
        self.kind
    }

    pub fn ordering(&self) -> Option<&[usize]> {
        self.ordering.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        let indptr = self.matrix.indptr();
        let indptr = indptr.raw_storage();
        let indices = self.matrix.indices();
        let data = self.matrix.data();
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in indptr[row]..indptr[row + 1] {
                acc += data[k] * x[indices[k]];
            }
            *out = acc;
        }
    }

    fn derived(&self, name: String, tri: TriMat<f64>, kind: Adjointness) -> Self {
        Self {
            name,
            matrix: tri.to_csr(),
            weights: self.weights.clone(),
            kind,
            ordering: self.ordering.clone(),
        }
    }

    fn adjoint_combination(&self, sign: f64, kind: Adjointness) -> Self {
        let w = &self.weights;
        let n = self.dim();
        let mut tri = TriMat::with_capacity((n, n), 2 * self.matrix.nnz());
        for (&val, (r, c)) in self.matrix.iter() {
            tri.add_triplet(r, c, 0.5 * val);
            tri.add_triplet(c, r, sign * 0.5 * val * w[r] / w[c]);
        }
        self.derived(self.name.clone(), tri, kind)
    }

    /// `½(A + A*)` with `A* = W⁻¹ Aᵀ W`.
    pub fn symmetrized(&self) -> Self {
        self.adjoint_combination(1.0, Adjointness::SelfAdjoint)
    }

    /// `½(A - A*)` with `A* = W⁻¹ Aᵀ W`.
    pub fn skew_symmetrized(&self) -> Self {
        self.adjoint_combination(-1.0, Adjointness::SkewAdjoint)
    }

    /// `α A + β B`.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64, name: impl Into<String>) -> Self {
        let a = self.matrix.map(|v| alpha * v);
        let b = other.matrix.map(|v| beta * v);
        let kind = if self.kind == other.kind { self.kind } else { Adjointness::General };
        Self {
            name: name.into(),
            matrix: &a + &b,
            weights: self.weights.clone(),
            kind,
            ordering: self.ordering.clone().or_else(|| other.ordering.clone()),
        }
    }

    /// The product `A B` as a sparse matrix.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            name: format!("{} {}", self.name, other.name),
            matrix: &self.matrix * &other.matrix,
            weights: self.weights.clone(),
            kind: Adjointness::General,
            ordering: self.ordering.clone(),
        }
    }

    /// Largest relative defect of the declared symmetry over seeded random
    /// pairs: `|⟨φ, Aψ⟩ ∓ ⟨Aφ, ψ⟩| / (‖φ‖‖Aψ‖ + ‖Aφ‖‖ψ‖)`.
    pub fn adjointness_defect(&self, pairs: usize, seed: u64) -> f64 {
        let sign = match self.kind {
            Adjointness::SelfAdjoint => 1.0,
            Adjointness::SkewAdjoint => -1.0,
            Adjointness::General => return f64::NAN,
        };
        let w = &self.weights;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let phi: Vec<f64> = (0..self.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let psi: Vec<f64> = (0..self.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let a_psi = self.apply(&psi);
            let a_phi = self.apply(&phi);
            let lhs = weighted_dot(w, &phi, &a_psi);
            let rhs = weighted_dot(w, &a_phi, &psi);
            let scale = weighted_norm(w, &phi) * weighted_norm(w, &a_psi)
                + weighted_norm(w, &a_phi) * weighted_norm(w, &psi);
            if scale > 0.0 {
                worst = worst.max((lhs - sign * rhs).abs() / scale);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_operator(n: usize, seed: u64) -> DiscreteOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tri = TriMat::new((n, n));
        for r in 0..n {
            for c in [r, (r + 1) % n, (r + 3) % n] {
                tri.add_triplet(r, c, StandardNormal.sample(&mut rng));
            }
        }
        let weights: Vec<f64> = (0..n).map(|i| 0.5 + (i as f64).sin().abs()).collect();
        DiscreteOperator::new("A", tri.to_csr(), weights.into(), Adjointness::General)
    }

    #[test]
    fn symmetrization_is_exact_up_to_rounding() {
        let a = random_operator(40, 3);
        assert!(a.symmetrized().adjointness_defect(10, 1) < 1e-14);
        assert!(a.skew_symmetrized().adjointness_defect(10, 1) < 1e-14);
    }

    #[test]
    fn symmetric_and_skew_parts_recombine() {
        let a = random_operator(30, 4);
        let sum = a.symmetrized().linear_combination(1.0, &a.skew_symmetrized(), 1.0, "sum");
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).cos()).collect();
        let (y, z) = (a.apply(&x), sum.apply(&x));
        for (p, q) in y.iter().zip(&z) {
            assert!((p - q).abs() < 1e-13);
        }
    }
}
