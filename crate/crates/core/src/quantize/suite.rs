use std::f64::consts::PI;

use super::grid::SurfaceGrid;

/// Version of the fixed test-function suite; bump when any function changes.
pub const TEST_SUITE_VERSION: u32 = 1;

/// A named test function sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub name: &'static str,
    pub values: Vec<f64>,
}

type Formula = fn(f64, f64) -> f64;

/// Charts with poles: functions vanishing to sixth order at both poles,
/// with `θ ∈ [0, π]` and `φ ∈ [0, 2π)`.
const POLE_SUITE: [(&str, Formula); 5] = [
    ("sin^6 t", |t, _| t.sin().powi(6)),
    ("sin^7 t cos p", |t, p| t.sin().powi(7) * p.cos()),
    ("sin^7 t sin p cos t", |t, p| t.sin().powi(7) * p.sin() * t.cos()),
    ("sin^6 t cos t", |t, _| t.sin().powi(6) * t.cos()),
    ("sin^8 t cos 2p", |t, p| t.sin().powi(8) * (2.0 * p).cos()),
];

/// Doubly periodic charts, angles in `[0, 2π)`.
const PERIODIC_SUITE: [(&str, Formula); 5] = [
    ("sin a", |a, _| a.sin()),
    ("cos b", |_, b| b.cos()),
    ("sin(a+b) cos b", |a, b| (a + b).sin() * b.cos()),
    ("cos 2a + sin b", |a, b| (2.0 * a).cos() + b.sin()),
    ("sin a sin 2b", |a, b| a.sin() * (2.0 * b).sin()),
];

/// The suite for the grid's chart, with chart coordinates rescaled to the
/// angles above.
pub fn test_functions(grid: &SurfaceGrid) -> Vec<TestFunction> {
    let [[u0, u1], [v0, v1]] = grid.chart().domain();
    let periodic = grid.periodic();
    // The polar angle is whichever chart direction is not periodic.
    let swap = periodic[0] && !periodic[1];
    let (suite, span) = if periodic[0] && periodic[1] {
        (PERIODIC_SUITE, [2.0 * PI, 2.0 * PI])
    } else if swap {
        (POLE_SUITE, [2.0 * PI, PI])
    } else {
        (POLE_SUITE, [PI, 2.0 * PI])
    };
    let su = span[0] / (u1 - u0);
    let sv = span[1] / (v1 - v0);
    suite
        .iter()
        .map(|&(name, f)| TestFunction {
            name,
            values: grid
                .nodes()
                .iter()
                .map(|n| {
                    let (a, b) = ((n.u - u0) * su, (n.v - v0) * sv);
                    if swap {
                        f(b, a)
                    } else {
                        f(a, b)
                    }
                })
                .collect(),
        })
        .collect()
}
