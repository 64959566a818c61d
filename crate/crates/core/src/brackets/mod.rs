//! Poisson and Dirac brackets on the phase space `(x, p)` of a particle
//! constrained by `χ₁ = f(x) = 0` and `χ₂ = n·p = 0`.

mod dirac;
mod identities;
mod verify;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autodiff::Dual;
use crate::surface::ImplicitSurface;
use crate::Vec3;

pub use dirac::{dirac, poisson, poisson_duals, ConstraintMatrix, DiracBracket};
pub use identities::{
    angular_momentum_bracket_check, calibrate_geodesic_signs, equations_of_motion, geodesic_invariants,
    AngularMomentumCheck, EquationsOfMotion, GeodesicInvariants, SignCalibration,
};
pub use verify::{
    sample_phase_points, verify_classical, ClassicalReport, ClassicalSettings, IdentityResult,
    CLASSICAL_IDENTITIES,
};

/// Phase-space derivatives: indices `0..3` are `∂/∂x`, `3..6` are `∂/∂p`.
pub type PhaseDual = Dual<6>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    pub x: Vec3,
    pub p: Vec3,
}

impl PhaseSpacePoint {
    pub fn new(x: Vec3, p: Vec3) -> Self {
        Self { x, p }
    }

    /// Coordinates seeded as the six independent variables.
    pub fn seeded(&self) -> ([PhaseDual; 3], [PhaseDual; 3]) {
        (
            std::array::from_fn(|i| Dual::variable(self.x[i], i)),
            std::array::from_fn(|i| Dual::variable(self.p[i], i + 3)),
        )
    }
}

type ObservableFn = dyn Fn(&PhaseSpacePoint) -> PhaseDual + Send + Sync;

/// A phase-space function carrying its exact first derivatives.
#[derive(Clone)]
pub struct Observable {
    name: String,
    eval: Arc<ObservableFn>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Observable({})", self.name)
    }
}

fn levi_civita(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

impl Observable {
    /// Wraps a closure that returns the value and all six partials.
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&PhaseSpacePoint) -> PhaseDual + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// An expression in `(x, p)` differentiated by forward-mode AD.
    pub fn from_expression<F>(name: impl Into<String>, expr: F) -> Self
    where
        F: Fn(&[PhaseDual; 3], &[PhaseDual; 3]) -> PhaseDual + Send + Sync + 'static,
    {
        Self::new(name, move |pt| {
            let (x, p) = pt.seeded();
            expr(&x, &p)
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| Dual::constant(c))
    }

    pub fn position(i: usize) -> Self {
        assert!(i < 3, "axis index out of range");
        Self::new(format!("x{}", i + 1), move |pt| Dual::variable(pt.x[i], i))
    }

    pub fn momentum(i: usize) -> Self {
        assert!(i < 3, "axis index out of range");
        Self::new(format!("p{}", i + 1), move |pt| Dual::variable(pt.p[i], i + 3))
    }

    /// `G_i = ε_ijk x_j p_k`.
    pub fn angular_momentum(i: usize) -> Self {
        assert!(i < 3, "axis index out of range");
        let (j, k) = levi_civita(i);
        Self::from_expression(format!("G{}", i + 1), move |x, p| x[j] * p[k] - x[k] * p[j])
    }

    /// `H = p²/2μ`.
    pub fn hamiltonian(mass: f64) -> Self {
        Self::from_expression("H", move |_, p| {
            (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / Dual::constant(2.0 * mass)
        })
    }

    /// `χ₁ = f(x)`.
    pub fn level(surface: &ImplicitSurface) -> Self {
        let surface = surface.clone();
        Self::new("chi1", move |pt| {
            let d = surface.derivatives(&pt.x);
            let mut eps = [0.0; 6];
            eps[..3].copy_from_slice(d.gradient.as_slice());
            Dual::new(d.value, eps)
        })
    }

    /// `χ₂ = n·p` with `∂/∂x_j = p_i ∂n_i/∂x_j` and `∂/∂p = n`.
    pub fn normal_momentum(surface: &ImplicitSurface) -> Self {
        let surface = surface.clone();
        Self::new("chi2", move |pt| normal_momentum_dual(&surface, pt))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, pt: &PhaseSpacePoint) -> PhaseDual {
        (self.eval)(pt)
    }

    pub fn value(&self, pt: &PhaseSpacePoint) -> f64 {
        self.eval(pt).re
    }

    pub fn sum(&self, other: &Observable) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({} + {})", a.name, b.name), move |pt| a.eval(pt) + b.eval(pt))
    }

    pub fn product(&self, other: &Observable) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({} * {})", a.name, b.name), move |pt| a.eval(pt) * b.eval(pt))
    }

    pub fn scale(&self, c: f64) -> Self {
        let a = self.clone();
        Self::new(format!("{c} * {}", a.name), move |pt| Dual::constant(c) * a.eval(pt))
    }
}

pub(crate) fn normal_momentum_dual(surface: &ImplicitSurface, pt: &PhaseSpacePoint) -> PhaseDual {
    let d = surface.derivatives(&pt.x);
    let norm = d.gradient.norm();
    let n = d.gradient / norm;
    let projector = crate::Mat3::identity() - n * n.transpose();
    let jacobian = projector * d.hessian / norm;
    let dx = jacobian.transpose() * pt.p;
    let mut eps = [0.0; 6];
    eps[..3].copy_from_slice(dx.as_slice());
    eps[3..].copy_from_slice(n.as_slice());
    Dual::new(n.dot(&pt.p), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn observable_partials_match_central_differences() {
        let torus = ImplicitSurface::torus(2.0, 0.5).unwrap();
        let pt = PhaseSpacePoint::new(Vec3::new(1.9, 0.8, 0.3), Vec3::new(-0.4, 0.7, 1.1));
        let observables = [
            Observable::angular_momentum(1),
            Observable::hamiltonian(1.7),
            Observable::level(&torus),
            Observable::normal_momentum(&torus),
            Observable::angular_momentum(0).product(&Observable::normal_momentum(&torus)),
        ];
        let h = 1e-6;
        for obs in &observables {
            let d = obs.eval(&pt);
            for k in 0..6 {
                let shifted = |s: f64| {
                    let mut q = pt;
                    if k < 3 {
                        q.x[k] += s;
                    } else {
                        q.p[k - 3] += s;
                    }
                    obs.value(&q)
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                assert_relative_eq!(d.eps[k], fd, max_relative = 1e-6, epsilon = 1e-7);
            }
        }
    }
}
