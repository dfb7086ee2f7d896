use std::f64::consts::PI;

use proptest::prelude::*;
use vortexlab::acceptance::solver_scenarios;
use vortexlab::cylinder::{dbar, total_energy, CylinderDomain, Pair};
use vortexlab::scalar::{Imag, C64};
use vortexlab::target::{TargetManifold, TargetPoint};
use vortexlab::vortex::{
    boundary_from_modes, floer_cylinder, floer_energy_identity, h_monotonicity, solve_vortex, ymh,
    ymh_identity_check, VolumeForm, VortexProblem,
};

#[test]
fn linear_floer_cylinder_is_an_exponential() {
    let target = TargetManifold::linear(&[1]).unwrap();
    let dom = CylinderDomain::new(3.0, 61, 8).unwrap();
    let start = TargetPoint::complex(&[C64::new(1.0, 0.0)]);
    let pair = floer_cylinder(&target, 1.0, &start, dom).unwrap();
    for i in 0..dom.n_t {
        for j in 0..dom.n_theta {
            let p = pair.point(i, j);
            assert!((p[0] - (-dom.t(i)).exp()).abs() < 1e-8 * (-dom.t(i)).exp());
            assert_eq!(p[1], 0.0);
        }
    }
}

#[test]
fn sphere_floer_cylinder_follows_tanh() {
    // With ψ′ = l∇z on the unit sphere, z′ = l(1 − z²), so z = tanh(l·t)
    // from the equator.
    let l = 0.5;
    let dom = CylinderDomain::new(3.0, 601, 8).unwrap();
    let pair = floer_cylinder(&TargetManifold::Sphere, l, &TargetPoint::sphere(1.0, 0.0, 0.0), dom).unwrap();
    for i in 0..dom.n_t {
        assert!((pair.point(i, 3)[2] - (l * dom.t(i)).tanh()).abs() < 1e-10);
    }
    let exact = 4.0 * PI * l * (l * 3.0f64).tanh();
    let e = floer_energy_identity(&pair);
    assert!((e.quadrature - exact).abs() < 1e-6 * exact, "{} vs {exact}", e.quadrature);
    assert!((e.closed_form - exact).abs() < 1e-9 * exact);
}

#[test]
fn long_floer_cylinders_connect_the_poles() {
    let dom = CylinderDomain::new(40.0, 256, 16).unwrap();
    for l in [0.25, 0.5] {
        let pair = floer_cylinder(&TargetManifold::Sphere, l, &TargetPoint::sphere_polar(1.2, 0.4), dom).unwrap();
        let s = TargetManifold::Sphere;
        assert!(s.dist(pair.point(0, 0), &TargetPoint::south().0) < 1e-3);
        assert!(s.dist(pair.point(dom.n_t - 1, 0), &TargetPoint::north().0) < 1e-3);
    }
}

#[test]
fn floer_dbar_converges_at_fourth_order() {
    let residual = |n_t: usize| {
        let dom = CylinderDomain::new(2.0, n_t, 8).unwrap();
        let pair = floer_cylinder(&TargetManifold::Sphere, 0.5, &TargetPoint::sphere(1.0, 0.0, 0.0), dom).unwrap();
        dbar(&pair).sup_norm_interior()
    };
    let r: Vec<f64> = [21, 41, 81, 161, 321].iter().map(|&n| residual(n)).collect();
    for w in r.windows(2).take(3) {
        assert!(w[0] / w[1] > 10.0, "{r:?}");
    }
    assert!(r[4] <= 1e-8, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn h_moves_in_the_direction_of_l(l in prop::sample::select(vec![-0.8, -0.3, -0.1, 0.1, 0.3, 0.8]), polar in 0.2..2.9f64) {
        let dom = CylinderDomain::new(6.0, 121, 8).unwrap();
        let pair = floer_cylinder(&TargetManifold::Sphere, l, &TargetPoint::sphere_polar(polar, 0.0), dom).unwrap();
        let rep = h_monotonicity(&pair);
        prop_assert_eq!(rep.direction as f64, l.signum());
        prop_assert!(rep.is_monotone(0.0));
        prop_assert!((rep.h_end - rep.h_start) * l > 0.0);
    }
}

#[test]
fn fixed_points_have_no_floer_cylinder() {
    let dom = CylinderDomain::new(1.0, 11, 8).unwrap();
    assert!(floer_cylinder(&TargetManifold::Sphere, 0.5, &TargetPoint::north(), dom).is_err());
    assert!(floer_cylinder(&TargetManifold::Sphere, 0.0, &TargetPoint::sphere(1.0, 0.0, 0.0), dom).is_err());
}

#[test]
fn constant_boundary_data_gives_the_constant_vortex() {
    let dom = CylinderDomain::new(3.0, 48, 16).unwrap();
    let (left, right) = boundary_from_modes(&TargetManifold::Sphere, "north", Imag(0.3), &dom, &[]).unwrap();
    let vol = VolumeForm::exp_bounded(&dom, 0.1);
    let prob = VortexProblem::new(dom, TargetManifold::Sphere, vol.clone(), Imag(1.0), Imag(0.3), left, right);
    let sol = solve_vortex(&prob).unwrap();
    assert!(sol.diagnostics.converged);
    for k in 0..dom.len() {
        assert!((sol.pair.a[k] - 0.3).abs() < 1e-12);
        assert!(TargetManifold::Sphere.dist(&sol.pair.phi[3 * k..3 * k + 3], &TargetPoint::north().0) < 1e-12);
    }
    let terms = ymh(&sol.pair, &vol, Imag(1.0)).unwrap();
    assert!(terms.total < 1e-20);
}

#[test]
fn ymh_vanishes_on_constant_fixed_pairs() {
    let dom = CylinderDomain::new(2.0, 21, 8).unwrap();
    let vol = VolumeForm::exp_bounded(&dom, 0.5);
    let origin = TargetPoint(vec![0.0; 4]);
    let p = Pair::constant(dom, TargetManifold::linear(&[1, -1]).unwrap(), &origin, Imag(0.7)).unwrap();
    let t = ymh(&p, &vol, Imag(0.0)).unwrap();
    assert!(t.curvature < 1e-24 && t.dirichlet == 0.0 && t.moment == 0.0, "{t:?}");
    // A constant non-fixed point only pays the moment term.
    let q = Pair::constant(dom, TargetManifold::Sphere, &TargetPoint::south(), Imag(0.0)).unwrap();
    let t = ymh(&q, &vol, Imag(1.0)).unwrap();
    let weights = dom.trapezoid_weights();
    let oracle: f64 = (0..dom.n_t).map(|i| weights[i] * 2.0 * PI * vol.f[i] * 4.0).sum();
    assert!((t.moment - oracle).abs() < 1e-12 * oracle);
}

#[test]
fn ymh_identity_holds_for_floer_cylinders() {
    let dom = CylinderDomain::new(20.0, 801, 16).unwrap();
    let pair = floer_cylinder(&TargetManifold::Sphere, 0.5, &TargetPoint::sphere(1.0, 0.0, 0.0), dom).unwrap();
    let id = ymh_identity_check(&pair, &VolumeForm::zero(&dom), Imag(0.3)).unwrap();
    assert!((id.terms.dirichlet - 2.0 * total_energy(&pair)).abs() < 1e-12);
    assert!(id.gap < 1e-3, "gap {}", id.gap);
}

#[test]
fn solved_vortices_satisfy_the_integrated_curvature_equation() {
    for s in solver_scenarios().unwrap() {
        let (sol, vol) = s.solve().unwrap();
        let pair = &sol.pair;
        let dom = pair.domain;
        let h = pair.h_grid();
        let nth = dom.n_theta;
        for j in 0..nth {
            // a(t_i) − a(t_0) = ∫ f·(H − c) dt, by the trapezoidal rule.
            let mut integral = 0.0;
            for i in 1..dom.n_t - 1 {
                let g = |r: usize| vol.f[r] * (h[r * nth + j] - s.c);
                integral += 0.5 * dom.dt() * (g(i - 1) + g(i));
                let lhs = pair.a[i * nth + j] - pair.a[j];
                assert!((lhs - integral).abs() < 1e-6, "{}: row {i} column {j}", s.component);
            }
        }
    }
}

#[test]
fn malformed_problems_are_rejected() {
    let dom = CylinderDomain::new(3.0, 48, 16).unwrap();
    let (left, right) = boundary_from_modes(&TargetManifold::Sphere, "north", Imag(0.3), &dom, &[]).unwrap();
    let vol = VolumeForm::exp_bounded(&dom, 0.1);
    let short = left[..8].to_vec();
    let prob = VortexProblem::new(dom, TargetManifold::Sphere, vol, Imag(1.0), Imag(0.3), short, right);
    assert!(solve_vortex(&prob).is_err());
    assert!(boundary_from_modes(&TargetManifold::Sphere, "east", Imag(0.3), &dom, &[]).is_err());
}
