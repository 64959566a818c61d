//! Shared fixtures for the criterion benchmarks.

use surfq_core::brackets::{sample_phase_points, ClassicalSettings, PhaseSpacePoint};
use surfq_core::surface::sample_surface_points;
use surfq_core::{ImplicitSurface, Vec3};

pub fn torus() -> ImplicitSurface {
    ImplicitSurface::torus(2.0, 0.5).expect("valid torus")
}

pub fn sphere() -> ImplicitSurface {
    ImplicitSurface::sphere(1.0).expect("valid sphere")
}

pub fn surface_points(surface: &ImplicitSurface, count: usize) -> Vec<Vec3> {
    sample_surface_points(surface, count, 7).expect("sampling succeeds")
}

pub fn classical_settings(samples: usize) -> ClassicalSettings {
    ClassicalSettings {
        samples,
        ..ClassicalSettings::default()
    }
}

pub fn phase_points(surface: &ImplicitSurface, count: usize) -> Vec<PhaseSpacePoint> {
    sample_phase_points(surface, count, 7).expect("sampling succeeds")
}
