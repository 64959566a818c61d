use serde::{Deserialize, Serialize};

use super::{DiracBracket, Observable, PhaseSpacePoint};
use crate::constants::{conventions, PhysicalConstants};
use crate::error::BracketError;
use crate::surface::{curvature_at, ImplicitSurface};
use crate::{Mat3, Vec3};

/// Raw geodesic invariants for the direction `t = p/|p|`: `kappa = t·S t`
/// and `tau = t·S t⊥` with `t⊥ = n × t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicInvariants {
    pub kappa: f64,
    pub tau: f64,
}

impl GeodesicInvariants {
    /// `(κ, τ)` with the frozen signs of [`conventions`].
    pub fn calibrated(&self) -> (f64, f64) {
        (conventions::KAPPA_SIGN * self.kappa, conventions::TAU_SIGN * self.tau)
    }
}

pub fn geodesic_invariants(
    surface: &ImplicitSurface,
    pt: &PhaseSpacePoint,
) -> Result<GeodesicInvariants, BracketError> {
    DiracBracket::new(surface, pt)?;
    let speed = pt.p.norm();
    if speed == 0.0 {
        return Err(BracketError::ZeroMomentum);
    }
    let c = curvature_at(surface, &pt.x)?;
    let t = pt.p / speed;
    let t_perp = c.normal.cross(&t);
    let st = c.shape_operator * t;
    Ok(GeodesicInvariants {
        kappa: t.dot(&st),
        tau: t_perp.dot(&st),
    })
}

/// `[G_i, G_j]_D` through the engine for all `(i, j)`.
fn angular_momentum_lhs(ctx: &DiracBracket) -> Mat3 {
    let g: Vec<_> = (0..3)
        .map(|i| Observable::angular_momentum(i).eval(ctx.point()))
        .collect();
    Mat3::from_fn(|i, j| ctx.bracket_duals(&g[i], &g[j]))
}

/// `ε_ijk {G_k - x_k τ (x·p) + (x_k κ - n_k)(n·G)}`.
fn angular_momentum_rhs(pt: &PhaseSpacePoint, n: &Vec3, kappa: f64, tau: f64) -> Mat3 {
    let g = pt.x.cross(&pt.p);
    let xp = pt.x.dot(&pt.p);
    let ng = n.dot(&g);
    let inner = Vec3::from_fn(|k, _| g[k] - pt.x[k] * tau * xp + (pt.x[k] * kappa - n[k]) * ng);
    epsilon_contract(&inner)
}

/// `A_ij = ε_ijk v_k`.
fn epsilon_contract(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, v.z, -v.y, -v.z, 0.0, v.x, v.y, -v.x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMomentumCheck {
    pub lhs: Mat3,
    pub rhs: Mat3,
    /// Largest `|LHS - RHS|` over `(i, j)`.
    pub max_residual: f64,
    /// Largest `|[G_i, G_j]_D - ε_ijk G_k|`.
    pub so3_residual: f64,
    /// Whether `τ (x·p) = 0` and `(x_k κ - n_k)(n·G) = 0` hold at the point.
    pub reduces_to_so3: bool,
}

pub fn angular_momentum_bracket_check(
    surface: &ImplicitSurface,
    pt: &PhaseSpacePoint,
) -> Result<AngularMomentumCheck, BracketError> {
    let ctx = DiracBracket::new(surface, pt)?;
    let n = curvature_at(surface, &pt.x)?.normal;
    let (kappa, tau) = geodesic_invariants(surface, pt)?.calibrated();
    let lhs = angular_momentum_lhs(&ctx);
    let rhs = angular_momentum_rhs(pt, &n, kappa, tau);
    let g = pt.x.cross(&pt.p);
    let so3 = epsilon_contract(&g);
    let scale = 1.0 + pt.x.norm() * pt.p.norm();
    let ng = n.dot(&g);
    let reduction = (tau * pt.x.dot(&pt.p))
        .abs()
        .max((0..3).map(|k| ((pt.x[k] * kappa - n[k]) * ng).abs()).fold(0.0, f64::max));
    Ok(AngularMomentumCheck {
        lhs,
        rhs,
        max_residual: (lhs - rhs).abs().max(),
        so3_residual: (lhs - so3).abs().max(),
        reduces_to_so3: reduction <= 1e-10 * scale,
    })
}

/// Outcome of trying all four sign pairs for `(κ, τ)` in the
/// angular-momentum identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCalibration {
    pub kappa_sign: f64,
    pub tau_sign: f64,
    /// `(kappa_sign, tau_sign, max residual)` for each candidate.
    pub candidates: Vec<(f64, f64, f64)>,
    /// Exactly one candidate meets `tolerance`.
    pub unique: bool,
}

pub fn calibrate_geodesic_signs(
    surface: &ImplicitSurface,
    points: &[PhaseSpacePoint],
    tolerance: f64,
) -> Result<SignCalibration, BracketError> {
    let mut prepared = Vec::with_capacity(points.len());
    for pt in points {
        let ctx = DiracBracket::new(surface, pt)?;
        let n = curvature_at(surface, &pt.x)?.normal;
        let raw = geodesic_invariants(surface, pt)?;
        prepared.push((angular_momentum_lhs(&ctx), n, raw, *pt));
    }
    let mut candidates = Vec::new();
    for kappa_sign in [1.0, -1.0] {
        for tau_sign in [1.0, -1.0] {
            let worst = prepared
                .iter()
                .map(|(lhs, n, raw, pt)| {
                    let rhs = angular_momentum_rhs(pt, n, kappa_sign * raw.kappa, tau_sign * raw.tau);
                    (lhs - rhs).abs().max()
                })
                .fold(0.0, f64::max);
            candidates.push((kappa_sign, tau_sign, worst));
        }
    }
    let best = candidates
        .iter()
        .copied()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("four candidates");
    let unique = candidates.iter().filter(|c| c.2 <= tolerance).count() == 1;
    Ok(SignCalibration {
        kappa_sign: best.0,
        tau_sign: best.1,
        candidates,
        unique,
    })
}

/// Engine brackets with `H = p²/2μ` next to their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationsOfMotion {
    /// `[x, H]_D`.
    pub x_dot: Vec3,
    /// `[p, H]_D`.
    pub p_dot: Vec3,
    /// `[G, H]_D`.
    pub g_dot: Vec3,
    /// `p/μ`.
    pub expected_x_dot: Vec3,
    /// `-n (p·∇n·p)/μ`.
    pub expected_p_dot: Vec3,
    /// `T = -(x × n)(p·∇n·p)/μ`.
    pub torque: Vec3,
    /// `n · [G, H]_D`.
    pub normal_torque: f64,
}

pub fn equations_of_motion(
    surface: &ImplicitSurface,
    pt: &PhaseSpacePoint,
    constants: &PhysicalConstants,
) -> Result<EquationsOfMotion, BracketError> {
    let ctx = DiracBracket::new(surface, pt)?;
    let c = curvature_at(surface, &pt.x)?;
    let h = Observable::hamiltonian(constants.mass).eval(pt);
    let bracket_h = |obs: fn(usize) -> Observable| {
        Vec3::from_fn(|i, _| ctx.bracket_duals(&obs(i).eval(pt), &h))
    };
    let x_dot = bracket_h(Observable::position);
    let p_dot = bracket_h(Observable::momentum);
    let g_dot = bracket_h(Observable::angular_momentum);
    let pnp = pt.p.dot(&(c.normal_jacobian * pt.p));
    let mu = constants.mass;
    Ok(EquationsOfMotion {
        x_dot,
        p_dot,
        g_dot,
        expected_x_dot: pt.p / mu,
        expected_p_dot: -c.normal * pnp / mu,
        torque: -pt.x.cross(&c.normal) * pnp / mu,
        normal_torque: c.normal.dot(&g_dot),
    })
}
