use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, SymmetricEigen};

use crate::autodiff::{Jet, Real};
use crate::error::SurfaceError;
use crate::Vec3;

/// Metric determinants at or below this value are treated as singular.
pub const SINGULAR_METRIC_DET: f64 = 1e-14;

type ChartMap = dyn Fn(Jet<2>, Jet<2>) -> [Jet<2>; 3] + Send + Sync;

#[derive(Clone)]
enum ChartKind {
    Sphere { radius: f64 },
    Cylinder { radius: f64 },
    Torus { major: f64, minor: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    Plane,
    Custom { name: String, map: Arc<ChartMap> },
}

/// A map `X(u, v) -> R³` over a coordinate rectangle.
///
/// Built-in charts:
///
/// | surface   | `u`                     | `v`                     |
/// |-----------|-------------------------|-------------------------|
/// | sphere    | polar angle `[0, π]`    | azimuth `[0, 2π)`       |
/// | ellipsoid | polar angle `[0, π]`    | azimuth `[0, 2π)`       |
/// | cylinder  | azimuth `[0, 2π)`       | height `[0, L)`         |
/// | torus     | azimuth `[0, 2π)`       | tube angle `[0, 2π)`    |
/// | plane     | `x` in `[0, lx)`        | `y` in `[0, ly)`        |
///
/// A non-periodic direction must end at chart poles, where `√g` vanishes;
/// grids place their nodes at cell centres along such directions.
#[derive(Clone)]
pub struct ParametricChart {
    kind: ChartKind,
    domain: [[f64; 2]; 2],
    periodic: [bool; 2],
    embedding_periodic: [bool; 2],
    offset: Vec3,
}

impl fmt::Debug for ParametricChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricChart")
            .field("name", &self.name())
            .field("domain", &self.domain)
            .field("periodic", &self.periodic)
            .field("offset", &self.offset)
            .finish()
    }
}

/// Position and exact first and second chart derivatives at `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
    pub position: Vec3,
    pub x_u: Vec3,
    pub x_v: Vec3,
    pub x_uu: Vec3,
    pub x_uv: Vec3,
    pub x_vv: Vec3,
}

/// Induced metric `g_ab = X_a · X_b`, its determinant root and inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartMetric {
    pub g: Matrix2<f64>,
    pub sqrt_g: f64,
    pub g_inv: Matrix2<f64>,
}

/// Curvature from the first and second fundamental forms, relative to the
/// chart normal `X_u × X_v / |X_u × X_v|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalFormCurvature {
    pub normal: Vec3,
    pub principal: [f64; 2],
    pub mean_sum: f64,
    pub gaussian: f64,
}

impl ParametricChart {
    fn builtin(kind: ChartKind, domain: [[f64; 2]; 2], periodic: [bool; 2]) -> Self {
        Self {
            kind,
            domain,
            periodic,
            embedding_periodic: periodic,
            offset: Vec3::zeros(),
        }
    }

    /// `X = R (sin u cos v, sin u sin v, cos u)`.
    pub fn sphere(radius: f64) -> Self {
        Self::builtin(
            ChartKind::Sphere { radius },
            [[0.0, PI], [0.0, 2.0 * PI]],
            [false, true],
        )
    }

    /// `X = (a sin u cos v, b sin u sin v, c cos u)`; not orthogonal unless `a = b`.
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        Self::builtin(
            ChartKind::Ellipsoid { a, b, c },
            [[0.0, PI], [0.0, 2.0 * PI]],
            [false, true],
        )
    }

    /// `X = (R cos u, R sin u, v)`, periodic in height with period `length`.
    pub fn cylinder(radius: f64, length: f64) -> Self {
        let mut chart = Self::builtin(
            ChartKind::Cylinder { radius },
            [[0.0, 2.0 * PI], [0.0, length]],
            [true, true],
        );
        chart.embedding_periodic = [true, false];
        chart
    }

    /// `X = ((R + r cos v) cos u, (R + r cos v) sin u, r sin v)`.
    pub fn torus(major: f64, minor: f64) -> Self {
        Self::builtin(
            ChartKind::Torus { major, minor },
            [[0.0, 2.0 * PI], [0.0, 2.0 * PI]],
            [true, true],
        )
    }

    /// The flat periodic chart `X = (u, v, 0)`.
    pub fn plane(lx: f64, ly: f64) -> Self {
        let mut chart = Self::builtin(ChartKind::Plane, [[0.0, lx], [0.0, ly]], [true, true]);
        chart.embedding_periodic = [false, false];
        chart
    }

    /// A user-defined chart. `embedding_periodic` states whether the
    /// embedding coordinates themselves repeat along each periodic direction.
    pub fn custom<F>(
        name: impl Into<String>,
        map: F,
        domain: [[f64; 2]; 2],
        periodic: [bool; 2],
        embedding_periodic: [bool; 2],
    ) -> Result<Self, SurfaceError>
    where
        F: Fn(Jet<2>, Jet<2>) -> [Jet<2>; 3] + Send + Sync + 'static,
    {
        for [lo, hi] in domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SurfaceError::InvalidParameter(format!(
                    "chart domain [{lo}, {hi}] is empty or not finite"
                )));
            }
        }
        Ok(Self {
            kind: ChartKind::Custom {
                name: name.into(),
                map: Arc::new(map),
            },
            domain,
            periodic,
            embedding_periodic: [
                periodic[0] && embedding_periodic[0],
                periodic[1] && embedding_periodic[1],
            ],
            offset: Vec3::zeros(),
        })
    }

    pub fn translated(mut self, offset: Vec3) -> Self {
        self.offset += offset;
        self
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            ChartKind::Sphere { .. } => "sphere",
            ChartKind::Cylinder { .. } => "cylinder",
            ChartKind::Torus { .. } => "torus",
            ChartKind::Ellipsoid { .. } => "ellipsoid",
            ChartKind::Plane => "plane",
            ChartKind::Custom { name, .. } => name,
        }
    }

    pub fn domain(&self) -> [[f64; 2]; 2] {
        self.domain
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    pub fn embedding_periodic(&self) -> [bool; 2] {
        self.embedding_periodic
    }

    pub fn offset(&self) -> Vec3 {
        self.offset
    }

    /// Node coordinates and spacing along one axis: `lo + j h` when periodic,
    /// `lo + (j + 1/2) h` otherwise.
    pub fn axis_nodes(&self, axis: usize, count: usize) -> (Vec<f64>, f64) {
        let [lo, hi] = self.domain[axis];
        let h = (hi - lo) / count as f64;
        let shift = if self.periodic[axis] { 0.0 } else { 0.5 };
        let nodes = (0..count).map(|j| lo + (j as f64 + shift) * h).collect();
        (nodes, h)
    }

    fn map<T: Real>(&self, u: T, v: T) -> [T; 3] {
        match &self.kind {
            ChartKind::Sphere { radius } => {
                let r = T::from(*radius);
                let s = u.sin();
                [r * s * v.cos(), r * s * v.sin(), r * u.cos()]
            }
            ChartKind::Ellipsoid { a, b, c } => {
                let s = u.sin();
                [
                    T::from(*a) * s * v.cos(),
                    T::from(*b) * s * v.sin(),
                    T::from(*c) * u.cos(),
                ]
            }
            ChartKind::Cylinder { radius } => {
                let r = T::from(*radius);
                [r * u.cos(), r * u.sin(), v]
            }
            ChartKind::Torus { major, minor } => {
                let rho = T::from(*major) + T::from(*minor) * v.cos();
                [rho * u.cos(), rho * u.sin(), T::from(*minor) * v.sin()]
            }
            ChartKind::Plane => [u, v, T::from(0.0)],
            ChartKind::Custom { .. } => unreachable!("custom charts are evaluated on jets"),
        }
    }

    fn jets(&self, u: f64, v: f64) -> [Jet<2>; 3] {
        let [ju, jv] = Jet::seed([u, v]);
        match &self.kind {
            ChartKind::Custom { map, .. } => map(ju, jv),
            _ => self.map(ju, jv),
        }
    }

    /// Embedding of `(u, v)` without derivatives.
    pub fn position(&self, u: f64, v: f64) -> Vec3 {
        let p = match &self.kind {
            ChartKind::Custom { .. } => self.jets(u, v).map(|j| j.v),
            _ => self.map(u, v),
        };
        Vec3::new(p[0], p[1], p[2]) + self.offset
    }

    pub fn point(&self, u: f64, v: f64) -> ChartPoint {
        let j = self.jets(u, v);
        let col = |f: &dyn Fn(&Jet<2>) -> f64| Vec3::new(f(&j[0]), f(&j[1]), f(&j[2]));
        ChartPoint {
            u,
            v,
            position: col(&|c| c.v) + self.offset,
            x_u: col(&|c| c.g[0]),
            x_v: col(&|c| c.g[1]),
            x_uu: col(&|c| c.h[0][0]),
            x_uv: col(&|c| c.h[0][1]),
            x_vv: col(&|c| c.h[1][1]),
        }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        [u, v]
            .iter()
            .zip(self.domain)
            .all(|(&t, [lo, hi])| t.is_finite() && t >= lo && t <= hi)
    }
}

impl ChartPoint {
    pub fn metric_tensor(&self) -> Matrix2<f64> {
        let guv = self.x_u.dot(&self.x_v);
        Matrix2::new(self.x_u.norm_squared(), guv, guv, self.x_v.norm_squared())
    }

    /// `√g = |X_u × X_v|`.
    pub fn area_element(&self) -> f64 {
        self.x_u.cross(&self.x_v).norm()
    }

    pub fn normal(&self) -> Vec3 {
        self.x_u.cross(&self.x_v).normalize()
    }

    /// Principal, mean and Gaussian curvature from `I` and `II`, with
    /// `S X_a = (g⁻¹ II)_a^b X_b` so that the outward sphere has `κ = -1/R`.
    pub fn fundamental_form_curvature(&self) -> Result<FundamentalFormCurvature, SurfaceError> {
        let g = self.metric_tensor();
        let det = g.determinant();
        if det <= SINGULAR_METRIC_DET {
            return Err(SurfaceError::SingularMetric {
                det,
                u: self.u,
                v: self.v,
            });
        }
        let n = self.normal();
        let l_uv = self.x_uv.dot(&n);
        let second = Matrix2::new(self.x_uu.dot(&n), l_uv, l_uv, self.x_vv.dot(&n));
        // Eigenvalues of g⁻¹II through the symmetric form g^{-1/2} II g^{-1/2}.
        let eig = SymmetricEigen::new(g);
        let inv_sqrt = eig.eigenvectors
            * Matrix2::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()))
            * eig.eigenvectors.transpose();
        let reduced = inv_sqrt * second * inv_sqrt;
        let reduced = (reduced + reduced.transpose()) * 0.5;
        let mut k = SymmetricEigen::new(reduced).eigenvalues;
        if k[0] > k[1] {
            k.swap_rows(0, 1);
        }
        Ok(FundamentalFormCurvature {
            normal: n,
            principal: [k[0], k[1]],
            mean_sum: reduced.trace(),
            gaussian: second.determinant() / det,
        })
    }
}

/// Metric quantities of `chart` at `(u, v)`.
pub fn chart_metric(chart: &ParametricChart, u: f64, v: f64) -> Result<ChartMetric, SurfaceError> {
    if !chart.contains(u, v) {
        return Err(SurfaceError::OutsideDomain { u, v });
    }
    let g = chart.point(u, v).metric_tensor();
    let det = g.determinant();
    if det <= SINGULAR_METRIC_DET {
        return Err(SurfaceError::SingularMetric { det, u, v });
    }
    let g_inv = Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det;
    Ok(ChartMetric {
        g,
        sqrt_g: det.sqrt(),
        g_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_metric_is_round() {
        let chart = ParametricChart::sphere(1.0);
        let m = chart_metric(&chart, 0.7, 2.0).unwrap();
        assert_relative_eq!(m.g, Matrix2::new(1.0, 0.0, 0.0, 0.7f64.sin().powi(2)), epsilon = 1e-15);
        assert_relative_eq!(m.sqrt_g, 0.7f64.sin(), epsilon = 1e-15);
        assert_relative_eq!(m.g * m.g_inv, Matrix2::identity(), epsilon = 1e-14);
    }

    #[test]
    fn sphere_pole_is_singular() {
        let chart = ParametricChart::sphere(1.0);
        assert!(matches!(
            chart_metric(&chart, 0.0, 1.0),
            Err(SurfaceError::SingularMetric { .. })
        ));
        assert!(matches!(
            chart_metric(&chart, -0.1, 1.0),
            Err(SurfaceError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn flat_chart_metric_is_identity() {
        let chart = ParametricChart::plane(2.0 * PI, 2.0 * PI);
        let m = chart_metric(&chart, 1.0, 3.0).unwrap();
        assert_eq!(m.g, Matrix2::identity());
        assert_eq!(m.sqrt_g, 1.0);
    }

    #[test]
    fn offset_cell_centres_on_polar_axis() {
        let chart = ParametricChart::sphere(1.0);
        let (theta, h) = chart.axis_nodes(0, 4);
        assert_relative_eq!(h, PI / 4.0);
        assert_relative_eq!(theta[0], PI / 8.0);
        assert_relative_eq!(theta[3], 7.0 * PI / 8.0);
        let (phi, _) = chart.axis_nodes(1, 4);
        assert_eq!(phi[0], 0.0);
    }

    #[test]
    fn sphere_fundamental_forms_give_outward_convention() {
        let c = ParametricChart::sphere(2.0)
            .point(1.1, 0.4)
            .fundamental_form_curvature()
            .unwrap();
        assert_relative_eq!(c.principal[0], -0.5, epsilon = 1e-14);
        assert_relative_eq!(c.principal[1], -0.5, epsilon = 1e-14);
        assert_relative_eq!(c.mean_sum, -1.0, epsilon = 1e-14);
        assert_relative_eq!(c.gaussian, 0.25, epsilon = 1e-14);
    }
}
