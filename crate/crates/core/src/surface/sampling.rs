use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ImplicitSurface, MIN_GRADIENT_NORM};
use crate::error::SurfaceError;
use crate::Vec3;

/// Largest `|f|` accepted after projection.
pub const PROJECTION_TOLERANCE: f64 = 1e-10;

/// Seeded on-surface points: uniform chart coordinates, then one Newton step
/// `x ← x - f ∇f / |∇f|²` along the normal.
pub fn sample_surface_points(
    surface: &ImplicitSurface,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec3>, SurfaceError> {
    if count == 0 {
        return Err(SurfaceError::EmptySample);
    }
    let chart = surface
        .chart()
        .ok_or_else(|| SurfaceError::NoChart(surface.name().to_string()))?;
    let [[u0, u1], [v0, v1]] = chart.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let u = u0 + (u1 - u0) * rng.random::<f64>();
        let v = v0 + (v1 - v0) * rng.random::<f64>();
        let x = chart.position(u, v);
        let d = surface.derivatives(&x);
        let g2 = d.gradient.norm_squared();
        if g2.sqrt() < MIN_GRADIENT_NORM {
            return Err(SurfaceError::DegenerateGradient {
                norm: g2.sqrt(),
                point: [x.x, x.y, x.z],
            });
        }
        let projected = x - d.gradient * (d.value / g2);
        let residual = surface.value(&projected).abs();
        if !(residual <= PROJECTION_TOLERANCE) {
            return Err(SurfaceError::ProjectionFailed { residual });
        }
        points.push(projected);
    }
    Ok(points)
}
