use std::f64::consts::PI;

use proptest::prelude::*;
use vortexlab::scalar::C64;
use vortexlab::target::{TangentVector, TargetManifold, TargetPoint};

fn sphere_point() -> impl Strategy<Value = TargetPoint> {
    (0.05..PI - 0.05, 0.0..2.0 * PI).prop_map(|(p, a)| TargetPoint::sphere_polar(p, a))
}

fn linear_point() -> impl Strategy<Value = TargetPoint> {
    prop::collection::vec(-2.0..2.0f64, 4).prop_map(TargetPoint)
}

fn linear_target() -> TargetManifold {
    TargetManifold::linear(&[1, -2]).unwrap()
}

/// Orthonormal basis of the tangent space, built without the crate.
fn tangent_basis(target: &TargetManifold, p: &[f64]) -> Vec<Vec<f64>> {
    match target {
        TargetManifold::Linear { .. } => (0..p.len())
            .map(|k| (0..p.len()).map(|m| if m == k { 1.0 } else { 0.0 }).collect())
            .collect(),
        TargetManifold::Sphere => {
            let seed = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let d: f64 = (0..3).map(|k| seed[k] * p[k]).sum();
            let mut e1: Vec<f64> = (0..3).map(|k| seed[k] - d * p[k]).collect();
            let n = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
            e1.iter_mut().for_each(|v| *v /= n);
            let e2 = vec![p[1] * e1[2] - p[2] * e1[1], p[2] * e1[0] - p[0] * e1[2], p[0] * e1[1] - p[1] * e1[0]];
            vec![e1, e2]
        }
    }
}

/// Moves along a tangent direction and renormalises onto the sphere.
fn nudge(target: &TargetManifold, p: &[f64], e: &[f64], h: f64) -> Vec<f64> {
    let mut q: Vec<f64> = p.iter().zip(e).map(|(a, b)| a + h * b).collect();
    if let TargetManifold::Sphere = target {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        q.iter_mut().for_each(|v| *v /= n);
    }
    q
}

fn directional_derivative(target: &TargetManifold, p: &[f64], e: &[f64]) -> f64 {
    let h = 1e-5;
    (target.h(&nudge(target, p, e, h)) - target.h(&nudge(target, p, e, -h))) / (2.0 * h)
}

fn check_gradient(target: &TargetManifold, x: &TargetPoint) {
    let g = target.grad_h(x).unwrap();
    let mut fd = vec![0.0; x.0.len()];
    for e in tangent_basis(target, &x.0) {
        let d = directional_derivative(target, &x.0, &e);
        for k in 0..fd.len() {
            fd[k] += d * e[k];
        }
    }
    let err = g.components.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "gradient mismatch {err:e} at {x:?}");
}

fn check_moment_map(target: &TargetManifold, x: &TargetPoint) {
    let field = target.field_x(x).unwrap();
    for e in tangent_basis(target, &x.0) {
        let lhs = target.omega(&x.0, &field.components, &e);
        let rhs = directional_derivative(target, &x.0, &e);
        assert!((lhs - rhs).abs() < 1e-6, "ι_X ω ≠ dH: {lhs} vs {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hamiltonian_is_invariant_sphere(x in sphere_point(), theta in 0.0..2.0 * PI) {
        let s = TargetManifold::Sphere;
        let y = s.act(theta, &x).unwrap();
        prop_assert!((s.hamiltonian_h(&y).unwrap() - s.hamiltonian_h(&x).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn hamiltonian_is_invariant_linear(x in linear_point(), theta in 0.0..2.0 * PI) {
        let l = linear_target();
        let y = l.act(theta, &x).unwrap();
        prop_assert!((l.hamiltonian_h(&y).unwrap() - l.hamiltonian_h(&x).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn action_composes(x in linear_point(), s in -7.0..7.0f64, t in -7.0..7.0f64) {
        for target in [linear_target(), TargetManifold::Sphere] {
            let x = if let TargetManifold::Sphere = target {
                TargetPoint::sphere_polar(1.0 + 0.1 * s, t)
            } else {
                x.clone()
            };
            let lhs = target.act(s, &target.act(t, &x).unwrap()).unwrap();
            let rhs = target.act(s + t, &x).unwrap();
            for (a, b) in lhs.0.iter().zip(&rhs.0) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences_sphere(x in sphere_point()) {
        check_gradient(&TargetManifold::Sphere, &x);
        check_moment_map(&TargetManifold::Sphere, &x);
    }

    #[test]
    fn gradient_matches_finite_differences_linear(x in linear_point()) {
        check_gradient(&linear_target(), &x);
        check_moment_map(&linear_target(), &x);
    }

    #[test]
    fn exponential_map_is_a_geodesic(x in sphere_point(), a in -1.0..1.0f64, b in -1.0..1.0f64, t in 0.1..2.0f64) {
        let s = TargetManifold::Sphere;
        let basis = tangent_basis(&s, &x.0);
        let v: Vec<f64> = (0..3).map(|k| a * basis[0][k] + b * basis[1][k]).collect();
        let curve = |tau: f64| {
            let w = TangentVector { base: x.clone(), components: v.iter().map(|c| c * tau).collect() };
            s.exp_map(&w).unwrap().0
        };
        let h = 1e-3;
        let (m, c, p) = (curve(t - h), curve(t), curve(t + h));
        let acc: Vec<f64> = (0..3).map(|k| (p[k] - 2.0 * c[k] + m[k]) / (h * h)).collect();
        let normal: f64 = (0..3).map(|k| acc[k] * c[k]).sum();
        let tangential = (0..3).map(|k| (acc[k] - normal * c[k]).abs()).fold(0.0, f64::max);
        prop_assert!(tangential < 1e-5, "tangential acceleration {tangential:e}");
        // Constant speed.
        let speed = (0..3).map(|k| ((p[k] - m[k]) / (2.0 * h)).powi(2)).sum::<f64>().sqrt();
        prop_assert!((speed - (a * a + b * b).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn dist_s1_is_symmetric_and_below_distance(x in sphere_point(), y in sphere_point()) {
        let s = TargetManifold::Sphere;
        let dxy = s.dist_s1(&x, &y).unwrap();
        let dyx = s.dist_s1(&y, &x).unwrap();
        prop_assert!((dxy - dyx).abs() < 1e-9);
        prop_assert!(dxy <= s.dist(&x.0, &y.0) + 1e-12);
        // On the sphere the orbit distance is the difference in latitude.
        let oracle = (x.0[2].clamp(-1.0, 1.0).acos() - y.0[2].clamp(-1.0, 1.0).acos()).abs();
        prop_assert!((dxy - oracle).abs() < 1e-8);
    }

    #[test]
    fn dist_s1_linear_is_symmetric_and_below_distance(x in linear_point(), y in linear_point()) {
        let l = linear_target();
        let dxy = l.dist_s1(&x, &y).unwrap();
        prop_assert!((dxy - l.dist_s1(&y, &x).unwrap()).abs() < 1e-9);
        prop_assert!(dxy <= l.dist(&x.0, &y.0) + 1e-12);
    }
}

#[test]
fn linear_action_rotates_each_coordinate_by_its_weight() {
    let l = TargetManifold::linear(&[1, 2]).unwrap();
    let x = TargetPoint::complex(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
    let y = l.act(PI / 2.0, &x).unwrap().as_complex();
    assert!((y[0] - C64::new(0.0, 1.0)).norm() < 1e-15);
    assert!((y[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    assert!((l.hamiltonian_h(&x).unwrap() + 1.5).abs() < 1e-15);
}

#[test]
fn invalid_points_are_rejected() {
    let s = TargetManifold::Sphere;
    assert!(s.act(0.1, &TargetPoint(vec![1.0, 1.0, 0.0])).is_err());
    assert!(s.act(0.1, &TargetPoint(vec![1.0, 0.0])).is_err());
    assert!(TargetManifold::linear(&[0, 0]).is_err());
}
