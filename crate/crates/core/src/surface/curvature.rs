use serde::{Deserialize, Serialize};

use super::{ImplicitSurface, MIN_GRADIENT_NORM};
use crate::constants::PhysicalConstants;
use crate::error::SurfaceError;
use crate::{Mat3, Vec3};

/// Relative anisotropy below which a point is treated as umbilic.
const UMBILIC_RELATIVE: f64 = 1e-12;

/// Extrinsic geometry of an implicit surface at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Vec3,
    pub normal: Vec3,
    /// `∂n_i/∂x_j` of the normalized gradient field.
    pub normal_jacobian: Mat3,
    pub projector: Mat3,
    /// `S = -P (∇n) P`.
    pub shape_operator: Mat3,
    /// Principal curvatures, `κ₁ ≤ κ₂`.
    pub principal: [f64; 2],
    /// `M = κ₁ + κ₂ = tr S`.
    pub mean_sum: f64,
    /// `K = κ₁ κ₂`.
    pub gaussian: f64,
    /// `V_G = -(ħ²/2μ)((M/2)² - K)`.
    pub geometric_potential: f64,
}

impl CurvatureSample {
    /// `(M/2)²  - K = ((κ₁ - κ₂)/2)²`.
    pub fn anisotropy_squared(&self) -> f64 {
        let half = 0.5 * (self.principal[1] - self.principal[0]);
        half * half
    }

    /// Tangential Jacobian of the normal, `-S`; equals `∇n` for a
    /// signed-distance level function.
    pub fn tangential_normal_jacobian(&self) -> Mat3 {
        -self.shape_operator
    }

    /// `V_G` for other constants; exactly zero at umbilic points.
    pub fn geometric_potential_with(&self, constants: &PhysicalConstants) -> f64 {
        let aniso2 = self.anisotropy_squared();
        if aniso2 == 0.0 {
            0.0
        } else {
            -constants.kinetic_prefactor() * aniso2
        }
    }
}

/// Orthonormal tangent pair `(t₁, t₂)` with `t₁ × t₂ = n`.
pub(crate) fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let t1 = axis.cross(n).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

fn regular_gradient(surface: &ImplicitSurface, x: &Vec3) -> Result<super::LevelSetDerivatives, SurfaceError> {
    let d = surface.derivatives(x);
    let norm = d.gradient.norm();
    if !(norm >= MIN_GRADIENT_NORM) {
        return Err(SurfaceError::DegenerateGradient {
            norm,
            point: [x.x, x.y, x.z],
        });
    }
    Ok(d)
}

/// Unit normal `∇f / |∇f|`.
pub fn normal(surface: &ImplicitSurface, x: &Vec3) -> Result<Vec3, SurfaceError> {
    let d = regular_gradient(surface, x)?;
    Ok(d.gradient / d.gradient.norm())
}

/// Curvature with `ħ = μ = 1`.
pub fn curvature_at(surface: &ImplicitSurface, x: &Vec3) -> Result<CurvatureSample, SurfaceError> {
    curvature_at_with(surface, x, &PhysicalConstants::default())
}

pub fn curvature_at_with(
    surface: &ImplicitSurface,
    x: &Vec3,
    constants: &PhysicalConstants,
) -> Result<CurvatureSample, SurfaceError> {
    let d = regular_gradient(surface, x)?;
    let norm = d.gradient.norm();
    let n = d.gradient / norm;
    let projector = Mat3::identity() - n * n.transpose();
    let normal_jacobian = projector * d.hessian / norm;
    let shape = -(projector * normal_jacobian * projector);
    let shape_operator = (shape + shape.transpose()) * 0.5;

    let (t1, t2) = tangent_frame(&n);
    let s11 = t1.dot(&(shape_operator * t1));
    let s22 = t2.dot(&(shape_operator * t2));
    let s12 = t1.dot(&(shape_operator * t2));
    let mean_sum = s11 + s22;
    let mut aniso = (0.5 * (s11 - s22)).hypot(s12);
    if aniso <= UMBILIC_RELATIVE * s11.abs().max(s22.abs()).max(s12.abs()) {
        aniso = 0.0;
    }
    let half = 0.5 * mean_sum;
    let aniso2 = aniso * aniso;
    let geometric_potential = if aniso2 == 0.0 {
        0.0
    } else {
        -constants.kinetic_prefactor() * aniso2
    };
    Ok(CurvatureSample {
        point: *x,
        normal: n,
        normal_jacobian,
        projector,
        shape_operator,
        principal: [half - aniso, half + aniso],
        mean_sum,
        gaussian: half * half - aniso2,
        geometric_potential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_sphere_outward_convention() {
        let s = ImplicitSurface::sphere(1.0).unwrap();
        let c = curvature_at(&s, &Vec3::new(0.0, 0.6, 0.8)).unwrap();
        assert_relative_eq!(c.principal[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(c.principal[1], -1.0, epsilon = 1e-15);
        assert_relative_eq!(c.mean_sum, -2.0, epsilon = 1e-15);
        assert_relative_eq!(c.gaussian, 1.0, epsilon = 1e-15);
        assert_eq!(c.geometric_potential, 0.0);
        assert!(c.geometric_potential.is_sign_positive());
    }

    #[test]
    fn cylinder_potential() {
        let s = ImplicitSurface::cylinder(1.0, 1.0).unwrap();
        let c = curvature_at(&s, &Vec3::new(0.6, -0.8, 0.3)).unwrap();
        assert_relative_eq!(c.principal[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(c.principal[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(c.geometric_potential, -0.125, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_gradient_on_torus_axis() {
        let s = ImplicitSurface::torus(2.0, 0.5).unwrap();
        assert!(matches!(
            normal(&s, &Vec3::zeros()),
            Err(SurfaceError::DegenerateGradient { .. })
        ));
    }

    #[test]
    fn tangent_frame_is_right_handed() {
        for n in [Vec3::x(), -Vec3::z(), Vec3::new(0.3, -0.4, 0.2).normalize()] {
            let (t1, t2) = tangent_frame(&n);
            assert_relative_eq!(t1.cross(&t2), n, epsilon = 1e-15);
            assert!(t1.dot(&n).abs() < 1e-15);
        }
    }
}
