//! Regular surfaces in R³: implicit level sets, parametric charts, curvature
//! and the geometric potential.

mod chart;
mod curvature;
mod export;
mod sampling;

use std::fmt;
use std::sync::Arc;

use crate::autodiff::{Jet, Real};
use crate::error::SurfaceError;
use crate::{Mat3, Vec3};

pub use chart::{chart_metric, ChartMetric, ChartPoint, ParametricChart};
pub use curvature::{curvature_at, curvature_at_with, normal, CurvatureSample};
pub use export::{curvature_table, write_curvature_csv, CurvatureRow, CURVATURE_COLUMNS};
pub use sampling::sample_surface_points;

/// Smallest `|∇f|` accepted as a regular point.
pub const MIN_GRADIENT_NORM: f64 = 1e-8;

/// Value, gradient and Hessian of a level function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetDerivatives {
    pub value: f64,
    pub gradient: Vec3,
    pub hessian: Mat3,
}

type LevelFn = dyn Fn(&[Jet<3>; 3]) -> Jet<3> + Send + Sync;

/// User-supplied level function, differentiated by forward-mode AD.
pub struct CustomLevelSet {
    name: String,
    level: Box<LevelFn>,
    chart: Option<ParametricChart>,
    scale: f64,
}

impl fmt::Debug for CustomLevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLevelSet")
            .field("name", &self.name)
            .field("has_chart", &self.chart.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// `f = |x| - R` (signed distance).
    Sphere { radius: f64 },
    /// `f = sqrt(x² + y²) - R`, axis along z, axially periodic with `length`.
    Cylinder { radius: f64, length: f64 },
    /// `f = (|x|² + R² - r²)² - 4R²(x² + y²)`, symmetry axis z.
    Torus { major: f64, minor: f64 },
    /// `f = x²/a² + y²/b² + z²/c² - 1`.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// `f = z`, charted as the flat periodic square `[0, lx) x [0, ly)`.
    Plane { lx: f64, ly: f64 },
    Custom(Arc<CustomLevelSet>),
}

/// A surface given as the zero set of a level function `f`.
///
/// The built-in shapes carry analytic first and second derivatives; custom
/// surfaces are differentiated with [`Jet`]. `center` translates the shape and
/// `orientation = -1` replaces `f` by `-f`.
#[derive(Debug, Clone)]
pub struct ImplicitSurface {
    shape: Shape,
    center: Vec3,
    orientation: f64,
}

fn check_positive(name: &str, value: f64) -> Result<(), SurfaceError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SurfaceError::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

impl ImplicitSurface {
    fn from_shape(shape: Shape) -> Self {
        Self {
            shape,
            center: Vec3::zeros(),
            orientation: 1.0,
        }
    }

    pub fn sphere(radius: f64) -> Result<Self, SurfaceError> {
        check_positive("radius", radius)?;
        Ok(Self::from_shape(Shape::Sphere { radius }))
    }

    pub fn cylinder(radius: f64, length: f64) -> Result<Self, SurfaceError> {
        check_positive("radius", radius)?;
        check_positive("length", length)?;
        Ok(Self::from_shape(Shape::Cylinder { radius, length }))
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self, SurfaceError> {
        check_positive("major radius", major)?;
        check_positive("minor radius", minor)?;
        if minor >= major {
            return Err(SurfaceError::InvalidParameter(format!(
                "torus needs minor < major radius, got r={minor}, R={major}"
            )));
        }
        Ok(Self::from_shape(Shape::Torus { major, minor }))
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self, SurfaceError> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        check_positive("c", c)?;
        Ok(Self::from_shape(Shape::Ellipsoid { a, b, c }))
    }

    pub fn plane(lx: f64, ly: f64) -> Result<Self, SurfaceError> {
        check_positive("lx", lx)?;
        check_positive("ly", ly)?;
        Ok(Self::from_shape(Shape::Plane { lx, ly }))
    }

    /// A user-defined level set. `scale` is a characteristic length used in
    /// tolerances; `chart` is required for sampling and grids.
    pub fn custom<F>(
        name: impl Into<String>,
        level: F,
        chart: Option<ParametricChart>,
        scale: f64,
    ) -> Result<Self, SurfaceError>
    where
        F: Fn(&[Jet<3>; 3]) -> Jet<3> + Send + Sync + 'static,
    {
        check_positive("scale", scale)?;
        Ok(Self::from_shape(Shape::Custom(Arc::new(CustomLevelSet {
            name: name.into(),
            level: Box::new(level),
            chart,
            scale,
        }))))
    }

    pub fn with_center(mut self, center: Vec3) -> Self {
        self.center = center;
        self
    }

    /// The same surface described by `-f`: the normal and `M` change sign.
    pub fn flipped(mut self) -> Self {
        self.orientation = -self.orientation;
        self
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn name(&self) -> &str {
        match &self.shape {
            Shape::Sphere { .. } => "sphere",
            Shape::Cylinder { .. } => "cylinder",
            Shape::Torus { .. } => "torus",
            Shape::Ellipsoid { .. } => "ellipsoid",
            Shape::Plane { .. } => "plane",
            Shape::Custom(c) => &c.name,
        }
    }

    /// Named shape parameters, for report provenance.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        let mut out = match &self.shape {
            Shape::Sphere { radius } => vec![("radius", *radius)],
            Shape::Cylinder { radius, length } => vec![("radius", *radius), ("length", *length)],
            Shape::Torus { major, minor } => vec![("R", *major), ("r", *minor)],
            Shape::Ellipsoid { a, b, c } => vec![("a", *a), ("b", *b), ("c", *c)],
            Shape::Plane { lx, ly } => vec![("lx", *lx), ("ly", *ly)],
            Shape::Custom(c) => vec![("scale", c.scale)],
        };
        if self.center != Vec3::zeros() {
            out.extend([
                ("center_x", self.center.x),
                ("center_y", self.center.y),
                ("center_z", self.center.z),
            ]);
        }
        if self.orientation < 0.0 {
            out.push(("orientation", -1.0));
        }
        out
    }

    /// Characteristic length of the shape.
    pub fn scale(&self) -> f64 {
        match &self.shape {
            Shape::Sphere { radius } | Shape::Cylinder { radius, .. } => *radius,
            Shape::Torus { major, minor } => major + minor,
            Shape::Ellipsoid { a, b, c } => a.max(*b).max(*c),
            Shape::Plane { .. } => 1.0,
            Shape::Custom(c) => c.scale,
        }
    }

    /// Closed-form area of the charted domain, where one exists.
    pub fn analytic_area(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match &self.shape {
            Shape::Sphere { radius } => Some(4.0 * PI * radius * radius),
            Shape::Cylinder { radius, length } => Some(2.0 * PI * radius * length),
            Shape::Torus { major, minor } => Some(4.0 * PI * PI * major * minor),
            Shape::Plane { lx, ly } => Some(lx * ly),
            Shape::Ellipsoid { .. } | Shape::Custom(_) => None,
        }
    }

    /// Whether the level function is a signed distance (`|∇f| = 1`).
    pub fn is_signed_distance(&self) -> bool {
        matches!(
            self.shape,
            Shape::Sphere { .. } | Shape::Cylinder { .. } | Shape::Plane { .. }
        )
    }

    pub fn chart(&self) -> Option<ParametricChart> {
        let chart = match &self.shape {
            Shape::Sphere { radius } => ParametricChart::sphere(*radius),
            Shape::Cylinder { radius, length } => ParametricChart::cylinder(*radius, *length),
            Shape::Torus { major, minor } => ParametricChart::torus(*major, *minor),
            Shape::Ellipsoid { a, b, c } => ParametricChart::ellipsoid(*a, *b, *c),
            Shape::Plane { lx, ly } => ParametricChart::plane(*lx, *ly),
            Shape::Custom(c) => return c.chart.clone(),
        };
        Some(chart.translated(self.center))
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.derivatives(x).value
    }

    /// `f`, `∇f` and the Hessian of `f` at `x`.
    pub fn derivatives(&self, x: &Vec3) -> LevelSetDerivatives {
        let y = x - self.center;
        let mut d = match &self.shape {
            Shape::Sphere { radius } => sphere_derivatives(&y, *radius),
            Shape::Cylinder { radius, .. } => cylinder_derivatives(&y, *radius),
            Shape::Torus { major, minor } => torus_derivatives(&y, *major, *minor),
            Shape::Ellipsoid { a, b, c } => {
                let axes = [*a, *b, *c];
                let value = (0..3).map(|i| (y[i] / axes[i]).powi(2)).sum::<f64>() - 1.0;
                let gradient = Vec3::from_fn(|i, _| 2.0 * y[i] / (axes[i] * axes[i]));
                let hessian = Mat3::from_diagonal(&Vec3::from_fn(|i, _| 2.0 / (axes[i] * axes[i])));
                LevelSetDerivatives {
                    value,
                    gradient,
                    hessian,
                }
            }
            Shape::Plane { .. } => LevelSetDerivatives {
                value: y.z,
                gradient: Vec3::z(),
                hessian: Mat3::zeros(),
            },
            Shape::Custom(c) => jet_to_derivatives((c.level)(&Jet::seed([y.x, y.y, y.z]))),
        };
        if self.orientation < 0.0 {
            d.value = -d.value;
            d.gradient = -d.gradient;
            d.hessian = -d.hessian;
        }
        d
    }

    /// The same derivatives computed by forward-mode AD from the generic level
    /// function; independent of the analytic closures in [`Self::derivatives`].
    pub fn derivatives_by_autodiff(&self, x: &Vec3) -> LevelSetDerivatives {
        let y = x - self.center;
        let seeded = Jet::seed([y.x, y.y, y.z]);
        let jet = match &self.shape {
            Shape::Custom(c) => (c.level)(&seeded),
            _ => self.generic_level(seeded),
        };
        let mut d = jet_to_derivatives(jet);
        if self.orientation < 0.0 {
            d.value = -d.value;
            d.gradient = -d.gradient;
            d.hessian = -d.hessian;
        }
        d
    }

    /// Built-in level functions over any [`Real`] scalar (centre-relative).
    fn generic_level<T: Real>(&self, y: [T; 3]) -> T {
        let [x, yy, z] = y;
        match &self.shape {
            Shape::Sphere { radius } => (x * x + yy * yy + z * z).sqrt() - T::from(*radius),
            Shape::Cylinder { radius, .. } => (x * x + yy * yy).sqrt() - T::from(*radius),
            Shape::Torus { major, minor } => {
                let s = x * x + yy * yy + z * z + T::from(major * major - minor * minor);
                s * s - T::from(4.0 * major * major) * (x * x + yy * yy)
            }
            Shape::Ellipsoid { a, b, c } => {
                x * x / T::from(a * a) + yy * yy / T::from(b * b) + z * z / T::from(c * c)
                    - T::from(1.0)
            }
            Shape::Plane { .. } => z,
            Shape::Custom(_) => unreachable!("custom surfaces are evaluated through their jet"),
        }
    }
}

fn jet_to_derivatives(j: Jet<3>) -> LevelSetDerivatives {
    LevelSetDerivatives {
        value: j.v,
        gradient: Vec3::from_fn(|i, _| j.g[i]),
        hessian: Mat3::from_fn(|i, k| j.h[i][k]),
    }
}

fn sphere_derivatives(y: &Vec3, radius: f64) -> LevelSetDerivatives {
    let r = y.norm();
    if r == 0.0 {
        return LevelSetDerivatives {
            value: -radius,
            gradient: Vec3::zeros(),
            hessian: Mat3::zeros(),
        };
    }
    let n = y / r;
    LevelSetDerivatives {
        value: r - radius,
        gradient: n,
        hessian: (Mat3::identity() - n * n.transpose()) / r,
    }
}

fn cylinder_derivatives(y: &Vec3, radius: f64) -> LevelSetDerivatives {
    let rho = y.x.hypot(y.y);
    if rho == 0.0 {
        return LevelSetDerivatives {
            value: -radius,
            gradient: Vec3::zeros(),
            hessian: Mat3::zeros(),
        };
    }
    let e = Vec3::new(y.x / rho, y.y / rho, 0.0);
    let mut hessian = Mat3::zeros();
    for i in 0..2 {
        for k in 0..2 {
            let delta = if i == k { 1.0 } else { 0.0 };
            hessian[(i, k)] = (delta - e[i] * e[k]) / rho;
        }
    }
    LevelSetDerivatives {
        value: rho - radius,
        gradient: e,
        hessian,
    }
}

fn torus_derivatives(y: &Vec3, major: f64, minor: f64) -> LevelSetDerivatives {
    let r2 = major * major;
    let s = y.norm_squared() + r2 - minor * minor;
    let planar = Vec3::new(y.x, y.y, 0.0);
    let value = s * s - 4.0 * r2 * (y.x * y.x + y.y * y.y);
    let gradient = 4.0 * s * y - 8.0 * r2 * planar;
    let hessian = 4.0 * s * Mat3::identity() + 8.0 * y * y.transpose()
        - 8.0 * r2 * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0));
    LevelSetDerivatives {
        value,
        gradient,
        hessian,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn all_builtins() -> Vec<ImplicitSurface> {
        vec![
            ImplicitSurface::sphere(1.3).unwrap(),
            ImplicitSurface::cylinder(0.8, 5.0).unwrap(),
            ImplicitSurface::torus(2.0, 0.5).unwrap().with_center(Vec3::new(0.3, -0.2, 0.1)),
            ImplicitSurface::ellipsoid(2.0, 1.5, 1.0).unwrap(),
            ImplicitSurface::plane(1.0, 2.0).unwrap(),
        ]
    }

    #[test]
    fn analytic_derivatives_agree_with_autodiff() {
        let probes = [
            Vec3::new(0.9, -0.4, 0.7),
            Vec3::new(-1.7, 0.6, 0.2),
            Vec3::new(0.1, 2.2, -0.5),
        ];
        for s in all_builtins() {
            for x in &probes {
                let a = s.derivatives(x);
                let b = s.derivatives_by_autodiff(x);
                assert_relative_eq!(a.value, b.value, epsilon = 1e-12, max_relative = 1e-12);
                assert_relative_eq!(a.gradient, b.gradient, epsilon = 1e-12, max_relative = 1e-12);
                assert_relative_eq!(a.hessian, b.hessian, epsilon = 1e-12, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn flipped_surface_negates_level_function() {
        let s = ImplicitSurface::torus(2.0, 0.5).unwrap();
        let x = Vec3::new(2.2, 0.3, 0.4);
        let a = s.derivatives(&x);
        let b = s.clone().flipped().derivatives(&x);
        assert_eq!(a.value, -b.value);
        assert_eq!(a.gradient, -b.gradient);
        assert_eq!(a.hessian, -b.hessian);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ImplicitSurface::sphere(0.0).is_err());
        assert!(ImplicitSurface::torus(1.0, 1.5).is_err());
        assert!(ImplicitSurface::ellipsoid(1.0, f64::NAN, 1.0).is_err());
    }
}
