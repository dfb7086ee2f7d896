use std::f64::consts::PI;

use proptest::prelude::*;
use vortexlab::cylinder::{
    critical_residues, dbar, energy_rows, evolve_modes, gamma, l_min, mean_value_check, segment_energies,
    total_energy, CylinderDomain, ModeSpectrum, Pair,
};
use vortexlab::scalar::{Imag, ImagRational, C64, Q};
use vortexlab::target::{TargetManifold, TargetPoint};

type Modes = Vec<(i64, usize, f64, f64)>;

fn modes(k_max: i64, n_coords: usize) -> impl Strategy<Value = Modes> {
    prop::collection::vec((-k_max..=k_max, 0..n_coords, -0.1..0.1f64, -0.1..0.1f64), 1..5)
}

fn spectrum(m: &Modes, k_max: usize, n_coords: usize) -> ModeSpectrum {
    let mut s = ModeSpectrum::zeros(k_max, n_coords);
    for &(k, j, re, im) in m {
        s.set(k, j, C64::new(re, im));
    }
    s
}

/// Closed-form energy of an evolved spectrum over `[a, b] × S¹`: the modes
/// are orthogonal in θ and each has |D_t φ| = |D_θ φ| = |ρ||φ|.
fn mode_energy(s: &ModeSpectrum, lambda: f64, weights: &[i64], a: f64, b: f64) -> f64 {
    s.modes()
        .map(|(k, j, c)| {
            let rho = -(k as f64) - lambda * weights[j] as f64;
            let integral = if rho.abs() < 1e-14 { b - a } else { ((2.0 * rho * b).exp() - (2.0 * rho * a).exp()) / (2.0 * rho) };
            2.0 * PI * rho * rho * c.norm_sqr() * integral
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_additive(m in modes(2, 2), lambda in 0.05..0.45f64, i0 in 0usize..40, d1 in 1usize..40, d2 in 1usize..40) {
        let target = TargetManifold::linear(&[1, 2]).unwrap();
        let dom = CylinderDomain::new(2.0, 121, 16).unwrap();
        let pair = evolve_modes(&spectrum(&m, 2, 2), Imag(lambda), &target, dom).unwrap();
        let (i1, i2) = (i0 + d1, i0 + d1 + d2);
        let whole = energy_rows(&pair, i0, i2).unwrap();
        let parts = energy_rows(&pair, i0, i1).unwrap() + energy_rows(&pair, i1, i2).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1e-300));
    }

    #[test]
    fn energy_matches_closed_form(m in modes(2, 2), lambda in 0.05..0.45f64) {
        let weights = [1, 2];
        let target = TargetManifold::linear(&weights).unwrap();
        let dom = CylinderDomain::new(3.0, 1201, 16).unwrap();
        let s = spectrum(&m, 2, 2);
        let pair = evolve_modes(&s, Imag(lambda), &target, dom).unwrap();
        let exact = mode_energy(&s, lambda, &weights, -3.0, 3.0);
        prop_assert!((total_energy(&pair) - exact).abs() <= 2e-4 * exact, "{} vs {exact}", total_energy(&pair));
        let segs = segment_energies(&pair).unwrap();
        prop_assert_eq!(segs.len(), 6);
        for (n, e) in segs.iter().enumerate() {
            let a = -3.0 + n as f64;
            let want = mode_energy(&s, lambda, &weights, a, a + 1.0);
            // One-sided stencils make the end segments slightly less accurate.
            let tol = if n == 0 || n == segs.len() - 1 { 2e-3 } else { 2e-4 };
            prop_assert!((e - want).abs() <= tol * want, "segment {n}: {e} vs {want}");
        }
    }

    #[test]
    fn gamma_is_even_and_below_one_half(eta in 1e-6..20.0f64) {
        prop_assert!((gamma(eta) - gamma(-eta)).abs() < 1e-16);
        prop_assert!(gamma(eta) < 0.5);
        prop_assert!(gamma(eta) > 0.0);
    }

    #[test]
    fn critical_residues_are_the_zeros_of_the_spectral_gap(
        weights in prop::collection::vec(prop::sample::select(vec![-4i64, -3, -2, -1, 1, 2, 3, 4]), 1..4),
        p in -20i64..20,
        q in 1i64..7,
    ) {
        let crit = critical_residues(&weights, Q::from_integer(-4), Q::from_integer(4));
        prop_assert!(crit.windows(2).all(|w| w[0] < w[1]));
        let r = Q::new(p, q);
        if r >= Q::from_integer(-4) && r < Q::from_integer(4) {
            let gap = l_min(ImagRational(r).to_imag(), &weights).unwrap();
            let listed = crit.contains(&ImagRational(r));
            prop_assert_eq!(gap < 1e-12, listed, "λ = {}/{} gap {}", p, q, gap);
        }
    }

    #[test]
    fn mode_solutions_satisfy_the_mean_value_inequality(m in modes(3, 2), lambda in 0.05..0.45f64, sign in prop::bool::ANY) {
        let weights = if sign { [1, 2] } else { [1, -2] };
        let lm = l_min(Imag(lambda), &weights).unwrap();
        prop_assume!(lm > 0.02);
        let target = TargetManifold::linear(&weights).unwrap();
        let dom = CylinderDomain::new(4.0, 321, 16).unwrap();
        let pair = evolve_modes(&spectrum(&m, 3, 2), Imag(lambda), &target, dom).unwrap();
        let f = segment_energies(&pair).unwrap();
        prop_assert!(mean_value_check(&f, gamma(2.0 * lm)).unwrap().is_empty());
    }
}

#[test]
fn single_mode_segment_ratio_is_exact() {
    let target = TargetManifold::linear(&[1]).unwrap();
    let mut s = ModeSpectrum::zeros(1, 1);
    s.set(0, 0, C64::new(0.4, -0.2));
    let dom = CylinderDomain::new(5.0, 401, 16).unwrap();
    let pair = evolve_modes(&s, Imag(0.3), &target, dom).unwrap();
    let f = segment_energies(&pair).unwrap();
    assert_eq!(f.len(), 10);
    for w in f.windows(2) {
        assert!((w[1] / w[0] - (-0.6f64).exp()).abs() < 1e-8);
    }
}

#[test]
fn evolved_modes_are_holomorphic_to_fourth_order() {
    let target = TargetManifold::linear(&[1, 2]).unwrap();
    let mut s = ModeSpectrum::zeros(2, 2);
    s.set(1, 0, C64::new(0.3, 0.1));
    s.set(-2, 1, C64::new(0.02, 0.0));
    s.set(0, 1, C64::new(-0.1, 0.2));
    let residual = |n_t: usize| {
        let dom = CylinderDomain::new(2.0, n_t, 16).unwrap();
        dbar(&evolve_modes(&s, Imag(0.3), &target, dom).unwrap()).sup_norm_interior()
    };
    let r: Vec<f64> = [41, 81, 161].iter().map(|&n| residual(n)).collect();
    assert!(r[0] > 1e-9, "coarse residual unexpectedly small: {r:?}");
    for w in r.windows(2) {
        assert!(w[0] / w[1] > 10.0, "residuals do not converge at fourth order: {r:?}");
    }
}

#[test]
fn constant_pairs_have_no_energy() {
    let dom = CylinderDomain::new(2.0, 41, 8).unwrap();
    let p = Pair::constant(dom, TargetManifold::Sphere, &TargetPoint::north(), Imag(0.4)).unwrap();
    assert!(total_energy(&p) < 1e-24);
    assert!(dbar(&p).sup_norm() < 1e-12);
}

#[test]
fn mode_truncation_is_validated() {
    let target = TargetManifold::linear(&[1]).unwrap();
    let dom = CylinderDomain::new(1.0, 11, 8).unwrap();
    assert!(evolve_modes(&ModeSpectrum::zeros(4, 1), Imag(0.1), &target, dom).is_err());
    assert!(evolve_modes(&ModeSpectrum::zeros(1, 2), Imag(0.1), &target, dom).is_err());
    assert!(evolve_modes(&ModeSpectrum::zeros(1, 1), Imag(0.1), &TargetManifold::Sphere, dom).is_err());
}
