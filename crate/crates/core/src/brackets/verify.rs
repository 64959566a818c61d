use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{
    angular_momentum_bracket_check, equations_of_motion, DiracBracket, Observable, PhaseSpacePoint,
};
use crate::constants::PhysicalConstants;
use crate::error::BracketError;
use crate::surface::{curvature_at, normal, sample_surface_points, ImplicitSurface};
use crate::{Mat3, Vec3};

/// Identity ids in report order, with their descriptions.
pub const CLASSICAL_IDENTITIES: [(&str, &str); 10] = [
    ("EQ3", "[x_i, x_j]_D = 0"),
    ("EQ4", "[x_i, p_j]_D = delta_ij - n_i n_j"),
    ("EQ5", "[p_i, p_j]_D = (n_j n_i,k - n_i n_j,k) p_k"),
    ("EQ6", "[G_i, G_j]_D = eps_ijk {G_k - x_k tau x.p + (x_k kappa - n_k) n.G}"),
    ("EQ7", "[x, H]_D = p / mu"),
    ("EQ8", "[p, H]_D = -n (p.grad n.p) / mu"),
    ("EQ9", "[G, H]_D = -(x cross n)(p.grad n.p) / mu"),
    ("NT0", "n . [G, H]_D = 0"),
    ("CMAT", "C = [[0, |grad f|], [-|grad f|, 0]]"),
    ("ANN", "[a, chi_alpha]_D = 0"),
];

/// Tolerance on the constraint matrix.
pub const CONSTRAINT_MATRIX_TOLERANCE: f64 = 1e-12;
/// Tolerance on `[a, χ_α]_D`.
pub const ANNIHILATION_TOLERANCE: f64 = 1e-10;

/// Seeded on-manifold phase points: positions from the surface sampler and
/// `p = P w` for a standard Gaussian `w` drawn from an independent stream.
pub fn sample_phase_points(
    surface: &ImplicitSurface,
    count: usize,
    seed: u64,
) -> Result<Vec<PhaseSpacePoint>, BracketError> {
    let xs = sample_surface_points(surface, count, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut points = Vec::with_capacity(count);
    for x in xs {
        let n = normal(surface, &x)?;
        let w = Vec3::from_fn(|_, _| StandardNormal.sample(&mut rng));
        let mut p = w - n * n.dot(&w);
        p -= n * n.dot(&p);
        points.push(PhaseSpacePoint::new(x, p));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalSettings {
    pub samples: usize,
    pub seed: u64,
    /// Tolerance for EQ3 to EQ9 and NT0; CMAT and ANN never use a looser one
    /// than their own.
    pub tolerance: f64,
    pub threads: usize,
    pub constants: PhysicalConstants,
}

impl Default for ClassicalSettings {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 1,
            tolerance: 1e-8,
            threads: 1,
            constants: PhysicalConstants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub id: String,
    pub description: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalReport {
    pub surface: String,
    pub identities: Vec<IdentityResult>,
}

impl ClassicalReport {
    pub fn all_pass(&self) -> bool {
        self.identities.iter().all(|r| r.pass)
    }

    pub fn get(&self, id: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|r| r.id == id)
    }

    /// Results keyed by identity id.
    pub fn by_id(&self) -> BTreeMap<String, IdentityResult> {
        self.identities.iter().map(|r| (r.id.clone(), r.clone())).collect()
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6} {:>8} {:>14} {:>10}  result",
            "id", "samples", "max|res|", "tol"
        );
        for r in &self.identities {
            let _ = writeln!(
                out,
                "{:<6} {:>8} {:>14.6e} {:>10.1e}  {}",
                r.id,
                r.samples,
                r.max_residual,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        out
    }
}

const N_IDS: usize = CLASSICAL_IDENTITIES.len();

fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn vec_residual(a: &Vec3, b: &Vec3) -> f64 {
    (a - b).amax()
}

fn point_residuals(
    surface: &ImplicitSurface,
    pt: &PhaseSpacePoint,
    constants: &PhysicalConstants,
) -> Result<[f64; N_IDS], BracketError> {
    let ctx = DiracBracket::new(surface, pt)?;
    let c = curvature_at(surface, &pt.x)?;
    let n = c.normal;
    let nj = c.normal_jacobian;
    let xs: Vec<_> = (0..3).map(|i| Observable::position(i).eval(pt)).collect();
    let ps: Vec<_> = (0..3).map(|i| Observable::momentum(i).eval(pt)).collect();
    let gs: Vec<_> = (0..3).map(|i| Observable::angular_momentum(i).eval(pt)).collect();
    let h = Observable::hamiltonian(constants.mass).eval(pt);

    let xx = Mat3::from_fn(|i, j| ctx.bracket_duals(&xs[i], &xs[j]));
    let xp = Mat3::from_fn(|i, j| ctx.bracket_duals(&xs[i], &ps[j])) - (Mat3::identity() - n * n.transpose());
    let np = nj * pt.p;
    let pp = Mat3::from_fn(|i, j| ctx.bracket_duals(&ps[i], &ps[j]) - (n[j] * np[i] - n[i] * np[j]));

    let eq6 = angular_momentum_bracket_check(surface, pt)?.max_residual;
    let eom = equations_of_motion(surface, pt, constants)?;

    let grad = surface.derivatives(&pt.x).gradient.norm();
    let c12 = ctx.constraint_matrix().c12;
    let cmat = if surface.is_signed_distance() {
        (c12 - 1.0).abs()
    } else {
        (c12 / grad - 1.0).abs()
    };

    let mut ann: f64 = 0.0;
    for chi in ctx.constraints() {
        for a in xs.iter().chain(&ps).chain(&gs).chain(std::iter::once(&h)) {
            ann = ann.max(ctx.bracket_duals(a, chi).abs());
        }
    }

    Ok([
        max_abs(&xx),
        max_abs(&xp),
        max_abs(&pp),
        eq6,
        vec_residual(&eom.x_dot, &eom.expected_x_dot),
        vec_residual(&eom.p_dot, &eom.expected_p_dot),
        vec_residual(&eom.g_dot, &eom.torque),
        eom.normal_torque.abs(),
        cmat,
        ann,
    ])
}

fn sweep(
    surface: &ImplicitSurface,
    points: &[PhaseSpacePoint],
    constants: &PhysicalConstants,
) -> Result<[f64; N_IDS], BracketError> {
    let mut worst = [0.0f64; N_IDS];
    for pt in points {
        let r = point_residuals(surface, pt, constants)?;
        for (w, v) in worst.iter_mut().zip(r) {
            // NaN must surface as a failure, so it wins over any number.
            *w = if v.is_nan() || w.is_nan() { f64::NAN } else { w.max(v) };
        }
    }
    Ok(worst)
}

/// Runs every classical identity over seeded phase points. The reduction is
/// a maximum, so the report does not depend on `threads`.
pub fn verify_classical(
    surface: &ImplicitSurface,
    settings: &ClassicalSettings,
) -> Result<ClassicalReport, BracketError> {
    let points = sample_phase_points(surface, settings.samples, settings.seed)?;
    let threads = settings.threads.max(1).min(points.len());
    let worst = if threads == 1 {
        sweep(surface, &points, &settings.constants)?
    } else {
        let chunk = points.len().div_ceil(threads);
        let partials: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = points
                .chunks(chunk)
                .map(|part| scope.spawn(|| sweep(surface, part, &settings.constants)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        let mut worst = [0.0f64; N_IDS];
        for part in partials {
            for (w, v) in worst.iter_mut().zip(part?) {
                *w = if v.is_nan() || w.is_nan() { f64::NAN } else { w.max(v) };
            }
        }
        worst
    };

    let identities = CLASSICAL_IDENTITIES
        .iter()
        .zip(worst)
        .map(|(&(id, description), max_residual)| {
            let tolerance = match id {
                "CMAT" => settings.tolerance.min(CONSTRAINT_MATRIX_TOLERANCE),
                "ANN" => settings.tolerance.min(ANNIHILATION_TOLERANCE),
                _ => settings.tolerance,
            };
            IdentityResult {
                id: id.to_string(),
                description: description.to_string(),
                samples: points.len(),
                max_residual,
                tolerance,
                pass: max_residual <= tolerance,
            }
        })
        .collect();
    Ok(ClassicalReport {
        surface: surface.name().to_string(),
        identities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_points_are_tangent() {
        let sphere = ImplicitSurface::sphere(1.0).unwrap();
        for pt in sample_phase_points(&sphere, 3, 1).unwrap() {
            let n = normal(&sphere, &pt.x).unwrap();
            assert!(n.dot(&pt.p).abs() <= 1e-14 * pt.p.norm());
        }
    }

    #[test]
    fn threads_do_not_change_the_report() {
        let torus = ImplicitSurface::torus(2.0, 0.5).unwrap();
        let mut settings = ClassicalSettings {
            samples: 40,
            ..ClassicalSettings::default()
        };
        let serial = verify_classical(&torus, &settings).unwrap();
        settings.threads = 3;
        assert_eq!(serial, verify_classical(&torus, &settings).unwrap());
        assert!(serial.all_pass(), "{}", serial.table());
    }
}
