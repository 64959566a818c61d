use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use surfq_core::surface::{
    chart_metric, curvature_at, curvature_at_with, normal, sample_surface_points, ImplicitSurface,
    ParametricChart,
};
use surfq_core::{PhysicalConstants, SurfaceError, Vec3};

fn builtins() -> Vec<ImplicitSurface> {
    vec![
        ImplicitSurface::sphere(1.0).unwrap(),
        ImplicitSurface::cylinder(1.0, 2.0 * PI).unwrap(),
        ImplicitSurface::torus(2.0, 0.5).unwrap(),
        ImplicitSurface::ellipsoid(2.0, 1.5, 1.0).unwrap(),
        ImplicitSurface::plane(2.0 * PI, 2.0 * PI).unwrap(),
    ]
}

/// Central-difference gradient of the level function.
fn fd_gradient(s: &ImplicitSurface, x: &Vec3, h: f64) -> Vec3 {
    Vec3::from_fn(|i, _| {
        let mut a = *x;
        let mut b = *x;
        a[i] += h;
        b[i] -= h;
        (s.value(&a) - s.value(&b)) / (2.0 * h)
    })
}

/// Curvature from finite-difference fundamental forms of a chart.
fn fd_chart_curvature(chart: &ParametricChart, u: f64, v: f64, h: f64) -> (Vec3, f64, f64) {
    let x = |a: f64, b: f64| chart.position(a, b);
    let xu = (x(u + h, v) - x(u - h, v)) / (2.0 * h);
    let xv = (x(u, v + h) - x(u, v - h)) / (2.0 * h);
    let xuu = (x(u + h, v) - 2.0 * x(u, v) + x(u - h, v)) / (h * h);
    let xvv = (x(u, v + h) - 2.0 * x(u, v) + x(u, v - h)) / (h * h);
    let xuv = (x(u + h, v + h) - x(u + h, v - h) - x(u - h, v + h) + x(u - h, v - h)) / (4.0 * h * h);
    let n = xu.cross(&xv).normalize();
    let (e, f, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
    let (l, m, nn) = (xuu.dot(&n), xuv.dot(&n), xvv.dot(&n));
    let det = e * g - f * f;
    let mean_sum = (e * nn - 2.0 * f * m + g * l) / det;
    let gaussian = (l * nn - m * m) / det;
    (n, mean_sum, gaussian)
}

#[test]
fn sphere_and_cylinder_normals() {
    let sphere = ImplicitSurface::sphere(1.0).unwrap();
    assert_eq!(normal(&sphere, &Vec3::z()).unwrap(), Vec3::z());
    let cyl = ImplicitSurface::cylinder(2.0, 10.0).unwrap();
    assert_eq!(normal(&cyl, &Vec3::new(2.0, 0.0, 3.0)).unwrap(), Vec3::x());
}

#[test]
fn ellipsoid_normal_matches_finite_differences() {
    let s = ImplicitSurface::ellipsoid(2.0, 1.0, 1.0).unwrap();
    let chart = s.chart().unwrap();
    let x = chart.position(0.3, 1.1);
    assert!(s.value(&x).abs() < 1e-14);
    let fd = fd_gradient(&s, &x, 1e-5);
    let n = normal(&s, &x).unwrap();
    assert_relative_eq!(n, fd.normalize(), epsilon = 1e-8);
    assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn unit_sphere_curvature() {
    let s = ImplicitSurface::sphere(1.0).unwrap();
    for x in sample_surface_points(&s, 20, 3).unwrap() {
        let c = curvature_at(&s, &x).unwrap();
        assert_relative_eq!(c.principal[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(c.principal[1], -1.0, epsilon = 1e-12);
        assert_relative_eq!(c.mean_sum, -2.0, epsilon = 1e-12);
        assert_relative_eq!(c.gaussian, 1.0, epsilon = 1e-12);
        assert_eq!(c.geometric_potential, 0.0);
    }
}

#[test]
fn sphere_anisotropy_vanishes_for_any_radius() {
    for r in [0.3, 1.0, 7.5] {
        let s = ImplicitSurface::sphere(r).unwrap();
        for x in sample_surface_points(&s, 50, 11).unwrap() {
            let c = curvature_at(&s, &x).unwrap();
            let gap = (0.5 * c.mean_sum).powi(2) - c.gaussian;
            assert!(gap.abs() <= 1e-12 / (r * r), "gap {gap:e} at radius {r}");
        }
    }
}

#[test]
fn cylinder_curvature_and_potential() {
    let s = ImplicitSurface::cylinder(1.0, 2.0 * PI).unwrap();
    let c = curvature_at(&s, &Vec3::new(0.0, 1.0, 0.4)).unwrap();
    assert_relative_eq!(c.principal[0], -1.0, epsilon = 1e-14);
    assert_relative_eq!(c.principal[1], 0.0, epsilon = 1e-14);
    assert_relative_eq!(c.gaussian, 0.0, epsilon = 1e-14);
    assert_relative_eq!(c.geometric_potential, -0.125, epsilon = 1e-14);
    let heavy = curvature_at_with(&s, &Vec3::new(0.0, 1.0, 0.4), &PhysicalConstants::new(2.0, 4.0).unwrap())
        .unwrap();
    assert_relative_eq!(heavy.geometric_potential, -0.125 * 4.0 / 4.0, epsilon = 1e-14);
}

#[test]
fn torus_gaussian_curvature_matches_chart_oracle() {
    let s = ImplicitSurface::torus(2.0, 0.5).unwrap();
    let chart = s.chart().unwrap();
    let v = PI / 4.0;
    let x = chart.position(0.0, v);
    let c = curvature_at(&s, &x).unwrap();
    let (_, mean_fd, k_fd) = fd_chart_curvature(&chart, 0.0, v, 1e-4);
    assert_relative_eq!(c.gaussian, k_fd, epsilon = 1e-6);
    assert_relative_eq!(c.mean_sum, mean_fd, epsilon = 1e-6);
    let closed_form = v.cos() / (0.5 * (2.0 + 0.5 * v.cos()));
    assert_relative_eq!(c.gaussian, closed_form, epsilon = 1e-12);
    assert!((c.gaussian - 0.6009).abs() < 1e-4);
}

#[test]
fn torus_metric_matches_finite_differences() {
    let (major, minor) = (2.0, 0.5);
    let chart = ParametricChart::torus(major, minor);
    let (u, v) = (0.0, PI / 4.0);
    let m = chart_metric(&chart, u, v).unwrap();
    let h = 1e-5;
    let xu = (chart.position(u + h, v) - chart.position(u - h, v)) / (2.0 * h);
    let xv = (chart.position(u, v + h) - chart.position(u, v - h)) / (2.0 * h);
    assert_relative_eq!(m.g[(0, 0)], xu.dot(&xu), max_relative = 1e-9);
    assert_relative_eq!(m.g[(1, 1)], xv.dot(&xv), max_relative = 1e-9);
    assert!(m.g[(0, 1)].abs() < 1e-15);
    assert_relative_eq!(m.g[(0, 0)], (major + minor * v.cos()).powi(2), epsilon = 1e-14);
    assert_relative_eq!(m.g[(1, 1)], minor * minor, epsilon = 1e-14);
}

#[test]
fn chart_curvature_agrees_with_implicit_form() {
    for s in builtins() {
        let chart = s.chart().unwrap();
        let [[u0, u1], [v0, v1]] = chart.domain();
        for i in 1..6 {
            for j in 0..5 {
                let u = u0 + (u1 - u0) * i as f64 / 6.0;
                let v = v0 + (v1 - v0) * (j as f64 + 0.3) / 5.0;
                let cp = chart.point(u, v);
                let ff = cp.fundamental_form_curvature().unwrap();
                let c = curvature_at(&s, &cp.position).unwrap();
                let sign = ff.normal.dot(&c.normal);
                assert_relative_eq!(sign.abs(), 1.0, epsilon = 1e-10);
                assert_relative_eq!(ff.normal * sign, c.normal, epsilon = 1e-10);
                assert_relative_eq!(ff.mean_sum * sign, c.mean_sum, epsilon = 1e-6);
                assert_relative_eq!(ff.gaussian, c.gaussian, epsilon = 1e-6);
                let (_, _, k_fd) = fd_chart_curvature(&chart, u, v, 1e-4);
                assert_relative_eq!(k_fd, c.gaussian, epsilon = 1e-6);
            }
        }
    }
}

#[test]
fn sampler_contract() {
    let sphere = ImplicitSurface::sphere(1.0).unwrap();
    let pts = sample_surface_points(&sphere, 4, 42).unwrap();
    assert_eq!(pts.len(), 4);
    for x in &pts {
        assert!((x.norm() - 1.0).abs() <= 1e-10);
    }
    let torus = ImplicitSurface::torus(2.0, 0.5).unwrap();
    let a = sample_surface_points(&torus, 1000, 7).unwrap();
    assert!(a.iter().all(|x| torus.value(x).abs() <= 1e-10));
    let b = sample_surface_points(&torus, 1000, 7).unwrap();
    let bits = |v: &[Vec3]| v.iter().flat_map(|x| x.iter().map(|c| c.to_bits())).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn sampled_points_satisfy_the_level_set_tightly() {
    for s in builtins() {
        for x in sample_surface_points(&s, 1000, 5).unwrap() {
            assert!(s.value(&x).abs() <= 1e-12, "{} |f| = {:e}", s.name(), s.value(&x));
            assert!(s.derivatives(&x).gradient.norm() >= 1e-8);
        }
    }
}

#[test]
fn custom_surface_uses_autodiff() {
    let custom = ImplicitSurface::custom(
        "unit-sphere-quadric",
        |y| y[0] * y[0] + y[1] * y[1] + y[2] * y[2] - 1.0.into(),
        Some(ParametricChart::sphere(1.0)),
        1.0,
    )
    .unwrap();
    for x in sample_surface_points(&custom, 50, 2).unwrap() {
        let c = curvature_at(&custom, &x).unwrap();
        assert_relative_eq!(c.mean_sum, -2.0, epsilon = 1e-12);
        assert_relative_eq!(c.gaussian, 1.0, epsilon = 1e-12);
        assert_eq!(c.geometric_potential, 0.0);
    }
    let no_chart = ImplicitSurface::custom("bare", |y| y[2], None, 1.0).unwrap();
    assert!(matches!(
        sample_surface_points(&no_chart, 1, 0),
        Err(SurfaceError::NoChart(_))
    ));
}

#[test]
fn composed_level_functions_have_normal_gradients() {
    // φ = g(f(x)) has ∇φ = g'(f) ∇f, parallel to n.
    let torus = ImplicitSurface::torus(2.0, 0.5).unwrap();
    for x in sample_surface_points(&torus, 100, 13).unwrap() {
        let d = torus.derivatives(&x);
        let n = normal(&torus, &x).unwrap();
        for g_prime in [(d.value).exp(), (3.0 * d.value).cos(), 2.0 * d.value + 0.7] {
            let grad_phi = d.gradient * g_prime;
            assert!(n.cross(&grad_phi).norm() <= 1e-12 * grad_phi.norm().max(1.0));
        }
    }
}

fn surface_strategy() -> impl Strategy<Value = ImplicitSurface> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|r| ImplicitSurface::sphere(r).unwrap()),
        (0.2f64..5.0).prop_map(|r| ImplicitSurface::cylinder(r, 3.0).unwrap()),
        (1.0f64..4.0, 0.1f64..0.9).prop_map(|(big, frac)| ImplicitSurface::torus(big, big * frac).unwrap()),
        (0.5f64..3.0, 0.5f64..3.0, 0.5f64..3.0).prop_map(|(a, b, c)| ImplicitSurface::ellipsoid(a, b, c).unwrap()),
        Just(ImplicitSurface::plane(1.0, 1.0).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curvature_invariants_hold(s in surface_strategy(), seed in 0u64..1000) {
        for x in sample_surface_points(&s, 16, seed).unwrap() {
            let c = curvature_at(&s, &x).unwrap();
            let scale = c.shape_operator.norm().max(1e-300);
            prop_assert!((c.normal.norm() - 1.0).abs() <= 1e-12);
            prop_assert!((c.shape_operator * c.normal).norm() <= 1e-10 * scale);
            prop_assert!((c.mean_sum - c.shape_operator.trace()).abs() <= 1e-10 * scale);
            let s2 = (c.shape_operator * c.shape_operator).trace();
            let k_trace = 0.5 * (c.shape_operator.trace().powi(2) - s2);
            prop_assert!((c.gaussian - k_trace).abs() <= 1e-10 * scale * scale);
            prop_assert!((c.mean_sum - c.principal[0] - c.principal[1]).abs() <= 1e-10 * scale);
            prop_assert!((c.gaussian - c.principal[0] * c.principal[1]).abs() <= 1e-10 * scale * scale);
            prop_assert!(c.geometric_potential <= 0.0);
        }
    }

    #[test]
    fn orientation_flip_preserves_quantum_quantities(s in surface_strategy(), seed in 0u64..1000) {
        let flipped = s.clone().flipped();
        for x in sample_surface_points(&s, 16, seed).unwrap() {
            let a = curvature_at(&s, &x).unwrap();
            let b = curvature_at(&flipped, &x).unwrap();
            prop_assert!((a.normal + b.normal).norm() <= 1e-12);
            prop_assert!((a.normal * a.mean_sum - b.normal * b.mean_sum).norm() <= 1e-12);
            prop_assert!((a.gaussian - b.gaussian).abs() <= 1e-12);
            prop_assert!((a.geometric_potential - b.geometric_potential).abs() <= 1e-12);
        }
    }
}
