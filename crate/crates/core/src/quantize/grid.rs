use crate::error::{QuantizeError, SurfaceError};
use crate::surface::{curvature_at, CurvatureSample, ImplicitSurface, ParametricChart};
use crate::Vec3;

/// Largest `|g_uv| / sqrt(g_uu g_vv)` accepted as orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;
/// Smallest node area element.
pub const MIN_NODE_SQRT_G: f64 = 1e-10;
/// Smallest grid dimension along either axis.
pub const MIN_GRID_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct GridNode {
    pub u: f64,
    pub v: f64,
    pub position: Vec3,
    /// Chart tangents `∂X/∂u`, `∂X/∂v`.
    pub tangents: [Vec3; 2],
    pub sqrt_g: f64,
    /// Quadrature weight `√g h_u h_v`.
    pub weight: f64,
    pub curvature: CurvatureSample,
}

/// Interface between two neighbouring nodes `a` and `b = a + e_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
    /// `(√g g^{aa})_face h_other / h_axis`.
    pub stiffness: f64,
    /// `½ h_other (√g g^{aa} ∂_a X)_face`.
    pub flux: Vec3,
}

/// A structured node grid on an orthogonal chart. Nodes are numbered
/// `i n_v + j` with `i` along `u`.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    surface: ImplicitSurface,
    chart: ParametricChart,
    n: [usize; 2],
    h: [f64; 2],
    periodic: [bool; 2],
    nodes: Vec<GridNode>,
    faces: Vec<Face>,
}

fn face_metric(chart: &ParametricChart, u: f64, v: f64, axis: usize) -> (f64, f64, Vec3) {
    let p = chart.point(u, v);
    let t = if axis == 0 { p.x_u } else { p.x_v };
    let g_aa = t.norm_squared();
    let sqrt_g = p.area_element();
    (sqrt_g, sqrt_g / g_aa, t * (sqrt_g / g_aa))
}

impl SurfaceGrid {
    pub fn new(surface: &ImplicitSurface, n_u: usize, n_v: usize) -> Result<Self, QuantizeError> {
        if n_u < MIN_GRID_SIZE || n_v < MIN_GRID_SIZE {
            return Err(QuantizeError::GridTooSmall { n_u, n_v });
        }
        let chart = surface
            .chart()
            .ok_or_else(|| SurfaceError::NoChart(surface.name().to_string()))?;
        let periodic = chart.periodic();
        let (us, h_u) = chart.axis_nodes(0, n_u);
        let (vs, h_v) = chart.axis_nodes(1, n_v);
        let h = [h_u, h_v];
        let scale = surface.scale();

        let mut nodes = Vec::with_capacity(n_u * n_v);
        let mut worst_ratio: f64 = 0.0;
        for &u in &us {
            for &v in &vs {
                let p = chart.point(u, v);
                let g = p.metric_tensor();
                worst_ratio = worst_ratio.max(g[(0, 1)].abs() / (g[(0, 0)] * g[(1, 1)]).sqrt());
                let sqrt_g = p.area_element();
                if !(sqrt_g >= MIN_NODE_SQRT_G * scale * scale) {
                    return Err(SurfaceError::SingularMetric {
                        det: sqrt_g * sqrt_g,
                        u,
                        v,
                    }
                    .into());
                }
                nodes.push(GridNode {
                    u,
                    v,
                    position: p.position,
                    tangents: [p.x_u, p.x_v],
                    sqrt_g,
                    weight: sqrt_g * h_u * h_v,
                    curvature: curvature_at(surface, &p.position)?,
                });
            }
        }
        if worst_ratio > ORTHOGONALITY_TOLERANCE {
            return Err(QuantizeError::NonOrthogonalChart { ratio: worst_ratio });
        }

        // A non-periodic direction must close at poles, where √g vanishes.
        let [[u0, u1], [v0, v1]] = chart.domain();
        let ends = [[u0, u1], [v0, v1]];
        for axis in 0..2 {
            if periodic[axis] {
                continue;
            }
            let others = if axis == 0 { &vs } else { &us };
            for &end in &ends[axis] {
                for &o in others {
                    let (u, v) = if axis == 0 { (end, o) } else { (o, end) };
                    let sqrt_g = chart.point(u, v).area_element();
                    if sqrt_g > 1e-12 * scale * scale {
                        return Err(QuantizeError::UnsupportedBoundary(format!(
                            "chart `{}` has an open edge at {} = {end} (sqrt g = {sqrt_g:e}); only periodic directions and poles are supported",
                            chart.name(),
                            if axis == 0 { "u" } else { "v" },
                        )));
                    }
                }
            }
        }

        let index = |i: usize, j: usize| (i % n_u) * n_v + (j % n_v);
        let mut faces = Vec::with_capacity(2 * n_u * n_v);
        for i in 0..n_u {
            for j in 0..n_v {
                let a = index(i, j);
                if periodic[0] || i + 1 < n_u {
                    let (_, s, e) = face_metric(&chart, us[i] + 0.5 * h_u, vs[j], 0);
                    faces.push(Face {
                        a,
                        b: index(i + 1, j),
                        axis: 0,
                        stiffness: s * h_v / h_u,
                        flux: e * (0.5 * h_v),
                    });
                }
                if periodic[1] || j + 1 < n_v {
                    let (_, s, e) = face_metric(&chart, us[i], vs[j] + 0.5 * h_v, 1);
                    faces.push(Face {
                        a,
                        b: index(i, j + 1),
                        axis: 1,
                        stiffness: s * h_u / h_v,
                        flux: e * (0.5 * h_u),
                    });
                }
            }
        }

        Ok(Self {
            surface: surface.clone(),
            chart,
            n: [n_u, n_v],
            h,
            periodic,
            nodes,
            faces,
        })
    }

    pub fn surface(&self) -> &ImplicitSurface {
        &self.surface
    }

    pub fn chart(&self) -> &ParametricChart {
        &self.chart
    }

    pub fn n_u(&self) -> usize {
        self.n[0]
    }

    pub fn n_v(&self) -> usize {
        self.n[1]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    /// `sqrt(h_u h_v)`, the refinement parameter of convergence fits.
    pub fn mesh_size(&self) -> f64 {
        (self.h[0] * self.h[1]).sqrt()
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    /// Whether nodes along `u` sit at cell centres between poles.
    pub fn pole_offset(&self) -> bool {
        !self.periodic[0] || !self.periodic[1]
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// Whether the embedding coordinates are single-valued functions on the
    /// grid, so that multiplication by `x_i` is a grid operator.
    pub fn has_periodic_embedding(&self) -> bool {
        let ep = self.chart.embedding_periodic();
        (0..2).all(|a| !self.periodic[a] || ep[a])
    }

    /// Node permutation keeping the matrix bandwidth at `2 min(n_u, n_v)`:
    /// the smaller dimension runs fastest and a periodic slow direction is
    /// folded as `0, N-1, 1, N-2, ...` so that its wrap-around stays local.
    pub fn band_ordering(&self) -> Vec<usize> {
        let [n_u, n_v] = self.n;
        let (slow_axis, n_slow, n_fast) = if n_u <= n_v { (1, n_v, n_u) } else { (0, n_u, n_v) };
        let slow_order: Vec<usize> = if self.periodic[slow_axis] {
            (0..n_slow)
                .map(|k| if k % 2 == 0 { k / 2 } else { n_slow - 1 - k / 2 })
                .collect()
        } else {
            (0..n_slow).collect()
        };
        let mut order = Vec::with_capacity(self.len());
        for &s in &slow_order {
            for f in 0..n_fast {
                let (i, j) = if slow_axis == 1 { (f, s) } else { (s, f) };
                order.push(i * n_v + j);
            }
        }
        order
    }
}
