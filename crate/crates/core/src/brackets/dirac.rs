use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::{normal_momentum_dual, Observable, PhaseDual, PhaseSpacePoint};
use crate::autodiff::Dual;
use crate::error::BracketError;
use crate::surface::{ImplicitSurface, MIN_GRADIENT_NORM};

/// Relative tolerance of the on-manifold check.
pub const MANIFOLD_TOLERANCE: f64 = 1e-10;

/// `Σ_i (∂a/∂x_i ∂b/∂p_i - ∂a/∂p_i ∂b/∂x_i)` for evaluated observables.
pub fn poisson_duals(a: &PhaseDual, b: &PhaseDual) -> f64 {
    (0..3)
        .map(|i| a.eps[i] * b.eps[i + 3] - a.eps[i + 3] * b.eps[i])
        .sum()
}

pub fn poisson(a: &Observable, b: &Observable, pt: &PhaseSpacePoint) -> f64 {
    poisson_duals(&a.eval(pt), &b.eval(pt))
}

/// `C_αβ = [χ_α, χ_β]_P`, antisymmetric by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMatrix {
    pub c12: f64,
}

impl ConstraintMatrix {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, self.c12, -self.c12, 0.0)
    }

    pub fn inverse(&self) -> Matrix2<f64> {
        Matrix2::new(0.0, -1.0 / self.c12, 1.0 / self.c12, 0.0)
    }
}

/// Dirac bracket at one validated on-manifold phase point.
#[derive(Debug, Clone)]
pub struct DiracBracket {
    point: PhaseSpacePoint,
    chi: [PhaseDual; 2],
    constraint: ConstraintMatrix,
}

impl DiracBracket {
    /// Rejects points with `|f|/|∇f| > 1e-10 (1 + |x|)` or `|n·p| > 1e-10 |p|`.
    pub fn new(surface: &ImplicitSurface, point: &PhaseSpacePoint) -> Result<Self, BracketError> {
        let d = surface.derivatives(&point.x);
        let grad = d.gradient.norm();
        if !(grad >= MIN_GRADIENT_NORM) {
            return Err(BracketError::SingularConstraintMatrix { c12: grad });
        }
        let mut eps = [0.0; 6];
        eps[..3].copy_from_slice(d.gradient.as_slice());
        let chi1 = Dual::new(d.value, eps);
        let chi2 = normal_momentum_dual(surface, point);
        let level = d.value.abs() / grad;
        let normal_momentum = chi2.re.abs();
        if !(level <= MANIFOLD_TOLERANCE * (1.0 + point.x.norm())
            && normal_momentum <= MANIFOLD_TOLERANCE * point.p.norm())
        {
            return Err(BracketError::OffManifold {
                level,
                normal_momentum,
            });
        }
        let c12 = poisson_duals(&chi1, &chi2);
        if !(c12.abs() >= MIN_GRADIENT_NORM) {
            return Err(BracketError::SingularConstraintMatrix { c12 });
        }
        Ok(Self {
            point: *point,
            chi: [chi1, chi2],
            constraint: ConstraintMatrix { c12 },
        })
    }

    pub fn point(&self) -> &PhaseSpacePoint {
        &self.point
    }

    pub fn constraint_matrix(&self) -> ConstraintMatrix {
        self.constraint
    }

    /// The evaluated constraints `χ₁`, `χ₂`.
    pub fn constraints(&self) -> &[PhaseDual; 2] {
        &self.chi
    }

    /// `[a,b]_P - [a,χ_α]_P (C⁻¹)_αβ [χ_β,b]_P` for evaluated observables.
    pub fn bracket_duals(&self, a: &PhaseDual, b: &PhaseDual) -> f64 {
        let [chi1, chi2] = &self.chi;
        let a1 = poisson_duals(a, chi1);
        let a2 = poisson_duals(a, chi2);
        let b1 = poisson_duals(chi1, b);
        let b2 = poisson_duals(chi2, b);
        poisson_duals(a, b) + (a1 * b2 - a2 * b1) / self.constraint.c12
    }

    pub fn bracket(&self, a: &Observable, b: &Observable) -> f64 {
        self.bracket_duals(&a.eval(&self.point), &b.eval(&self.point))
    }
}

pub fn dirac(
    a: &Observable,
    b: &Observable,
    pt: &PhaseSpacePoint,
    surface: &ImplicitSurface,
) -> Result<f64, BracketError> {
    Ok(DiracBracket::new(surface, pt)?.bracket(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;
    use approx::assert_relative_eq;

    #[test]
    fn canonical_poisson_pairs() {
        let pt = PhaseSpacePoint::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.0, 2.0));
        assert_eq!(poisson(&Observable::position(0), &Observable::momentum(0), &pt), 1.0);
        assert_eq!(poisson(&Observable::position(0), &Observable::momentum(1), &pt), 0.0);
        let l12 = poisson(&Observable::angular_momentum(0), &Observable::angular_momentum(1), &pt);
        assert_eq!(l12, 2.0);
    }

    #[test]
    fn north_pole_coordinate_momentum_brackets() {
        let sphere = ImplicitSurface::sphere(1.0).unwrap();
        let pt = PhaseSpacePoint::new(Vec3::z(), Vec3::x());
        let ctx = DiracBracket::new(&sphere, &pt).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j && i < 2 { 1.0 } else { 0.0 };
                let value = ctx.bracket(&Observable::position(i), &Observable::momentum(j));
                assert_relative_eq!(value, expected, epsilon = 1e-15);
            }
        }
        assert_eq!(ctx.constraint_matrix().matrix(), Matrix2::new(0.0, 1.0, -1.0, 0.0));
    }

    #[test]
    fn off_manifold_points_are_rejected() {
        let sphere = ImplicitSurface::sphere(1.0).unwrap();
        let lifted = PhaseSpacePoint::new(Vec3::new(0.0, 0.0, 1.01), Vec3::x());
        assert!(matches!(
            DiracBracket::new(&sphere, &lifted),
            Err(BracketError::OffManifold { .. })
        ));
        let radial = PhaseSpacePoint::new(Vec3::z(), Vec3::new(0.0, 0.1, 1.0));
        assert!(matches!(
            DiracBracket::new(&sphere, &radial),
            Err(BracketError::OffManifold { .. })
        ));
    }

    #[test]
    fn inverse_constraint_matrix() {
        let c = ConstraintMatrix { c12: 2.5 };
        assert_relative_eq!(c.matrix() * c.inverse(), Matrix2::identity(), epsilon = 1e-15);
    }
}
