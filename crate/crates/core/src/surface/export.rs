use std::io::{self, Write};

use serde::Serialize;

use super::{curvature_at_with, ImplicitSurface};
use crate::constants::PhysicalConstants;
use crate::error::SurfaceError;
use crate::Vec3;

pub const CURVATURE_COLUMNS: [&str; 11] = ["u", "v", "x", "y", "z", "nx", "ny", "nz", "M", "K", "VG"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureRow {
    pub u: f64,
    pub v: f64,
    pub position: Vec3,
    pub normal: Vec3,
    pub mean_sum: f64,
    pub gaussian: f64,
    pub geometric_potential: f64,
}

impl CurvatureRow {
    pub fn values(&self) -> [f64; 11] {
        [
            self.u,
            self.v,
            self.position.x,
            self.position.y,
            self.position.z,
            self.normal.x,
            self.normal.y,
            self.normal.z,
            self.mean_sum,
            self.gaussian,
            self.geometric_potential,
        ]
    }
}

/// Curvature at every node of an `n_u x n_v` chart grid, `u` slowest.
pub fn curvature_table(
    surface: &ImplicitSurface,
    n_u: usize,
    n_v: usize,
    constants: &PhysicalConstants,
) -> Result<Vec<CurvatureRow>, SurfaceError> {
    let chart = surface
        .chart()
        .ok_or_else(|| SurfaceError::NoChart(surface.name().to_string()))?;
    let (us, _) = chart.axis_nodes(0, n_u);
    let (vs, _) = chart.axis_nodes(1, n_v);
    let mut rows = Vec::with_capacity(n_u * n_v);
    for &u in &us {
        for &v in &vs {
            let x = chart.position(u, v);
            let c = curvature_at_with(surface, &x, constants)?;
            rows.push(CurvatureRow {
                u,
                v,
                position: x,
                normal: c.normal,
                mean_sum: c.mean_sum,
                gaussian: c.gaussian,
                geometric_potential: c.geometric_potential,
            });
        }
    }
    Ok(rows)
}

/// Comma-separated table with a header row and 17 significant digits.
pub fn write_curvature_csv<W: Write>(rows: &[CurvatureRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", CURVATURE_COLUMNS.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.values().iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_values() {
        let s = ImplicitSurface::torus(2.0, 0.5).unwrap();
        let rows = curvature_table(&s, 3, 4, &PhysicalConstants::default()).unwrap();
        let mut buf = Vec::new();
        write_curvature_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "u,v,x,y,z,nx,ny,nz,M,K,VG");
        for (line, row) in lines.zip(&rows) {
            let parsed: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            assert_eq!(parsed, row.values());
        }
    }
}
