use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortexlab::cylinder::{evolve_modes, CylinderDomain, ModeSpectrum, Pair};
use vortexlab::decay::{
    center_decomposition, collar_samples, cover_pair, fit_exponential_rate, perturbed_recursion_bound_check,
    random_admissible_sequence, random_perturbed_instance, recompose, recursion_bound_check, xi_of_gamma, Collars,
    DecompositionOptions, PerturbedParams,
};
use vortexlab::scalar::{Imag, ImagRational, C64};
use vortexlab::target::{TargetManifold, TargetPoint};

fn loose() -> DecompositionOptions {
    DecompositionOptions { eps: 10.0, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn admissible_sequences_obey_the_bound(seed in 0u64..u64::MAX, gamma in 0.02..0.49f64, n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_admissible_sequence(&mut rng, n, gamma);
        let r = recursion_bound_check(&x, gamma).unwrap();
        prop_assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn the_bound_is_tight_for_extremal_sequences(gamma in 0.05..0.49f64, a in 0.0..2.0f64, b in 0.0..2.0f64, n in 2i32..30) {
        // x_k = Aξ^{−k} + Bξ^{−(N−k)} satisfies the hypothesis with equality and
        // meets the bound up to the cross terms of size (A + B)ξ^{−N}.
        let xi = xi_of_gamma(gamma).unwrap();
        let x: Vec<f64> = (0..=n).map(|k| a * xi.powi(-k) + b * xi.powi(-(n - k))).collect();
        for k in 1..n as usize {
            prop_assert!((x[k] - gamma * (x[k - 1] + x[k + 1])).abs() < 1e-12 * (a + b + 1.0));
        }
        let r = recursion_bound_check(&x, gamma).unwrap();
        prop_assert!(r.holds());
        prop_assert!(r.max_slack >= -(a + b) * xi.powi(-n) - 1e-15, "slack {}", r.max_slack);
    }

    #[test]
    fn unforced_perturbed_lemma_reduces_to_the_plain_one(seed in 0u64..u64::MAX, gamma in 0.05..0.49f64, n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_admissible_sequence(&mut rng, 2 * n, gamma);
        let z = vec![0.0; x.len()];
        let p = PerturbedParams { gamma, chi: 1.0, k: 1.0, eps: 0.5 };
        let r = perturbed_recursion_bound_check(&x, &z, p).unwrap();
        prop_assert!(r.applicable);
        prop_assert!(r.violations.is_empty());
    }
}

#[test]
fn perturbed_lemma_holds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..500 {
        let p = PerturbedParams {
            gamma: rng.gen_range(0.05..0.49),
            chi: rng.gen_range(0.1..2.0),
            k: rng.gen_range(0.01..1.0),
            eps: rng.gen_range(0.05..1.0),
        };
        let n = rng.gen_range(2..25);
        let (x, z) = random_perturbed_instance(&mut rng, n, p);
        let r = perturbed_recursion_bound_check(&x, &z, p).unwrap();
        assert!(r.applicable, "trial {trial}: generator broke a hypothesis");
        assert!(r.violations.is_empty(), "trial {trial}: {r:?}");
        assert!(r.sigma <= p.chi && r.sigma <= xi_of_gamma(p.gamma).unwrap().ln());
    }
}

fn sphere_pair(seed: u64) -> Pair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = CylinderDomain::new(2.0, 21, 16).unwrap();
    let (c1, c2, c3): (f64, f64, f64) = (rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), rng.gen_range(0.0..6.0));
    let mut phi = Vec::new();
    for i in 0..dom.n_t {
        for j in 0..dom.n_theta {
            let (t, th) = (dom.t(i), dom.theta(j));
            let polar = 0.4 + 0.1 * t + c1 * th.cos() + c2 * (2.0 * th).sin();
            phi.extend(TargetPoint::sphere_polar(polar, c3 + 0.05 * t + 0.02 * th.sin()).0);
        }
    }
    Pair::new(dom, TargetManifold::Sphere, vec![0.01; dom.len()], phi).unwrap()
}

#[test]
fn sphere_decomposition_is_balanced_and_reconstructs() {
    for seed in 0..20 {
        let pair = sphere_pair(seed);
        let dec = center_decomposition(&pair, ImagRational::integer(0), loose()).unwrap();
        assert!(dec.balancing_defect < 1e-8, "seed {seed}: {}", dec.balancing_defect);
        let back = recompose(&dec, &pair.target);
        let err = back.iter().zip(&pair.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "seed {seed}: reconstruction error {err:e}");
        assert!((dec.lambda.im() - 0.01).abs() < 1e-12);
    }
}

#[test]
fn decomposition_checks_its_hypotheses() {
    let pair = sphere_pair(1);
    assert!(center_decomposition(&pair, ImagRational::integer(0), DecompositionOptions::default()).is_err());
}

#[test]
fn linear_decomposition_separates_the_zero_modes() {
    // ψ is the θ-average, which is exactly the k = 0 part of a mode solution.
    let weights = [1, 2];
    let target = TargetManifold::linear(&weights).unwrap();
    let mut s = ModeSpectrum::zeros(2, 2);
    s.set(0, 0, C64::new(0.3, 0.1));
    s.set(0, 1, C64::new(-0.2, 0.05));
    s.set(1, 0, C64::new(0.02, 0.0));
    s.set(-2, 1, C64::new(0.0, 0.01));
    let lambda = 0.04;
    let dom = CylinderDomain::new(2.0, 41, 16).unwrap();
    let pair = evolve_modes(&s, Imag(lambda), &target, dom).unwrap();
    let dec = center_decomposition(&pair, ImagRational::integer(0), loose()).unwrap();
    for i in 0..dom.n_t {
        let t = dom.t(i);
        for (j, &w) in weights.iter().enumerate() {
            let want = s.get(0, j) * (-lambda * w as f64 * t).exp();
            let got = C64::new(dec.psi[i].0[2 * j], dec.psi[i].0[2 * j + 1]);
            assert!((got - want).norm() < 1e-12, "row {i} coordinate {j}");
        }
    }
    assert!(dec.balancing_defect < 1e-12);
}

#[test]
fn covered_decomposition_is_consistent() {
    // Weight 2 and λ_cr = i/2: the double cover untwists the residue.
    let target = TargetManifold::linear(&[2]).unwrap();
    let dom = CylinderDomain::new(2.0, 21, 8).unwrap();
    let mut phi = Vec::new();
    for i in 0..dom.n_t {
        for j in 0..dom.n_theta {
            let (t, th) = (dom.t(i), dom.theta(j));
            let z = C64::new(0.05 * t, 0.02) + C64::from_polar(0.01 * (1.0 + t * t), 3.0 * th);
            phi.extend([z.re, z.im]);
        }
    }
    let pair = Pair::new(dom, target.clone(), vec![0.52; dom.len()], phi).unwrap();
    let half = ImagRational::new(1, 2).unwrap();
    let cover = cover_pair(&pair, half).unwrap();
    assert_eq!(cover.domain.n_theta, 16);
    assert!((cover.domain.half_length - 1.0).abs() < 1e-15);
    for i in 0..dom.n_t {
        for j in 0..16 {
            assert!((cover.a_at(i, j) - (2.0 * 0.52 - 1.0)).abs() < 1e-12);
            // The gauge e^{iθ} acts by weight 2 on the covered column.
            let mut expect = vec![0.0; 2];
            target.act_into(cover.domain.theta(j), pair.point(i, j % 8), &mut expect);
            assert!((cover.point(i, j)[0] - expect[0]).abs() < 1e-15);
        }
    }
    let dec = center_decomposition(&pair, half, loose()).unwrap();
    assert!(dec.balancing_defect < 1e-8);
    let back = recompose(&dec, &target);
    let err = back.iter().zip(&pair.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "reconstruction error {err:e}");
    assert!((dec.lambda.im() - 0.02).abs() < 1e-12);
}

#[test]
fn single_mode_rate_is_recovered() {
    // k = 1 with residue −0.4 decays like e^{−0.6(t + N)} away from the left end.
    let target = TargetManifold::linear(&[1]).unwrap();
    let mut s = ModeSpectrum::zeros(1, 1);
    s.set(1, 0, C64::new(0.02, 0.01) * (-6.0f64).exp());
    let dom = CylinderDomain::new(10.0, 201, 8).unwrap();
    let pair = evolve_modes(&s, Imag(-0.4), &target, dom).unwrap();
    let dec = center_decomposition(&pair, ImagRational::integer(0), DecompositionOptions { eps: 1.0, ..Default::default() })
        .unwrap();
    let fit = fit_exponential_rate(&collar_samples(&dom, &dec.phi0_row_sup(), 5.0, Collars::Left)).unwrap();
    assert!((fit.sigma - 0.6).abs() < 1e-6, "{fit:?}");
    assert!(fit.r2 > 1.0 - 1e-9);
}

#[test]
fn noisy_rates_are_recovered_within_ten_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|k| {
                let d = k as f64 * 0.2;
                (d, 3.0 * (-0.6 * d).exp() * (1.0 + rng.gen_range(-0.05..0.05)))
            })
            .collect();
        let fit = fit_exponential_rate(&samples).unwrap();
        assert!((fit.sigma - 0.6).abs() < 0.06, "{fit:?}");
    }
}

#[test]
fn collar_sampling_selects_the_ends() {
    let dom = CylinderDomain::new(5.0, 11, 8).unwrap();
    let v: Vec<f64> = (0..11).map(|i| i as f64).collect();
    let both = collar_samples(&dom, &v, 2.0, Collars::Both);
    assert_eq!(both, vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (2.0, 8.0), (1.0, 9.0), (0.0, 10.0)]);
    assert_eq!(collar_samples(&dom, &v, 2.0, Collars::Right).len(), 3);
    assert!(fit_exponential_rate(&both[..3]).is_err());
}
