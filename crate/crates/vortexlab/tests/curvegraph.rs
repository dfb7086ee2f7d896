use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vortexlab::acceptance::curve_fixtures;
use vortexlab::curvegraph::{
    all_trees, build_graph, chain_holonomy_propagation, chain_neighbour_violations, classify_curve, node_matching_products,
    prufer_tree, random_curve, stabilization_bubbles, tree_unstable_bound_check, BubbleGraph, Component, NodalCurve,
    VertexClass, VertexKind,
};

/// Tree vertices found directly from the definition: the bubble-only side of
/// a bridge that is itself a tree.
fn tree_vertices_by_bridges(g: &BubbleGraph) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (skip, &(a, b)) in g.edges.iter().enumerate() {
        if a == b {
            continue;
        }
        let side = |root: usize| -> BTreeSet<usize> {
            let mut seen = BTreeSet::from([root]);
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for (k, &(x, y)) in g.edges.iter().enumerate() {
                    if k == skip {
                        continue;
                    }
                    for (p, q) in [(x, y), (y, x)] {
                        if p == v && seen.insert(q) {
                            stack.push(q);
                        }
                    }
                }
            }
            seen
        };
        let sa = side(a);
        if sa.contains(&b) {
            continue;
        }
        for s in [sa, side(b)] {
            let internal = g.edges.iter().filter(|(x, y)| s.contains(x) && s.contains(y)).count();
            let bubbles_only = s.iter().all(|&v| g.kinds[v] == VertexKind::Bubble);
            if bubbles_only && internal + 1 == s.len() {
                out.extend(s);
            }
        }
    }
    out
}

fn comp(genus: u32, bubble: bool) -> Component {
    Component { genus, bubble }
}

#[test]
fn hand_labelled_fixtures_classify_as_expected() {
    for f in curve_fixtures() {
        let c = classify_curve(&f.curve).unwrap();
        assert_eq!(c.classes, f.classes, "{}", f.name);
        assert_eq!(c.depths, f.depths, "{}", f.name);
        let norm = |v: &[Vec<usize>]| {
            let mut v: Vec<Vec<usize>> =
                v.iter().map(|p| if p.first() > p.last() { p.iter().rev().copied().collect() } else { p.clone() }).collect();
            v.sort();
            v
        };
        assert_eq!(norm(&c.chains), norm(&f.chains), "{}", f.name);
    }
}

#[test]
fn tree_enumeration_matches_the_known_counts() {
    // Number of unlabelled trees on n = 1..=10 vertices.
    let counts = [1, 1, 1, 2, 3, 6, 11, 23, 47, 106];
    for (n, &want) in (1..=10).zip(&counts) {
        let trees = all_trees(n);
        assert_eq!(trees.len(), want, "n = {n}");
        for t in trees {
            let r = tree_unstable_bound_check(n, &t).unwrap();
            assert!(r.ok, "n = {n}: {t:?} has {} unstable vertices < {}", r.unstable, r.bound);
        }
    }
}

#[test]
fn bound_check_rejects_non_trees() {
    assert!(tree_unstable_bound_check(3, &[(0, 1), (1, 0)]).is_err());
    assert!(tree_unstable_bound_check(3, &[(0, 1)]).is_err());
    assert!(tree_unstable_bound_check(2, &[(0, 5)]).is_err());
    let star = tree_unstable_bound_check(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    assert_eq!((star.unstable, star.ok), (3, true));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_labelled_trees_have_enough_unstable_vertices(seq in prop::collection::vec(0usize..14, 0..12)) {
        let n = seq.len() + 2;
        let seq: Vec<usize> = seq.into_iter().map(|s| s % n).collect();
        let edges = prufer_tree(&seq);
        prop_assert_eq!(edges.len(), n - 1);
        prop_assert!(tree_unstable_bound_check(n, &edges).unwrap().ok);
    }

    #[test]
    fn random_curves_classify_consistently(seed in 0u64..u64::MAX) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let curve = random_curve(&mut rng, 12);
        let c = classify_curve(&curve).unwrap();
        let oracle = tree_vertices_by_bridges(&c.graph);
        for v in 0..c.graph.len() {
            prop_assert_eq!(c.classes[v].is_tree(), oracle.contains(&v), "vertex {} of {:?}", v, curve);
            match c.classes[v] {
                VertexClass::Exterior => prop_assert_eq!(c.depths[v], Some(1)),
                VertexClass::Tree => prop_assert!(c.depths[v].unwrap() >= 2),
                _ => prop_assert_eq!(c.depths[v], None),
            }
        }
        let mut in_chain = BTreeSet::new();
        for chain in &c.chains {
            prop_assert!(chain_neighbour_violations(&c.graph, &c.classes, chain).is_empty());
            for w in chain.windows(2) {
                prop_assert!(c.graph.neighbours(w[0]).contains(&w[1]));
            }
            for &v in chain {
                prop_assert_eq!(c.classes[v], VertexClass::Connecting);
                prop_assert!(in_chain.insert(v), "vertex {} in two chains", v);
            }
        }
        let connecting = (0..c.graph.len()).filter(|&v| c.classes[v] == VertexClass::Connecting).count();
        prop_assert_eq!(connecting, in_chain.len());
        // Stabilisation never contracts the last component, so an unstable
        // principal component can only be the sole principal one.
        let principal = curve.components.iter().filter(|c| !c.bubble).count();
        prop_assert!(c.unstable_principal.is_empty() || principal == 1);
    }
}

#[test]
fn stabilisation_contracts_unstable_spheres() {
    // Two genus-1 components joined through a chain of two spheres, plus a
    // sphere carrying three marked points hanging off the first.
    let curve = NodalCurve {
        components: vec![comp(1, false), comp(0, false), comp(0, false), comp(1, false), comp(0, false)],
        marked: vec![4, 4],
        nodes: vec![(0, 1), (1, 2), (2, 3), (0, 4)],
    };
    assert_eq!(stabilization_bubbles(&curve).unwrap(), vec![false, true, true, false, false]);
    assert_eq!(curve.unstable_principal_components(), vec![1, 2]);
    // A lone sphere is never contracted entirely.
    let lone = NodalCurve { components: vec![comp(0, false)], marked: vec![], nodes: vec![] };
    assert_eq!(stabilization_bubbles(&lone).unwrap(), vec![false]);
}

#[test]
fn malformed_curves_are_rejected() {
    let disconnected = NodalCurve { components: vec![comp(0, false), comp(0, false)], marked: vec![0, 0, 0], nodes: vec![] };
    assert!(build_graph(&disconnected).is_err());
    let out_of_range = NodalCurve { components: vec![comp(0, false)], marked: vec![1], nodes: vec![] };
    assert!(build_graph(&out_of_range).is_err());
    let bad_bubble = NodalCurve { components: vec![comp(1, false), comp(2, true)], marked: vec![], nodes: vec![(0, 1)] };
    assert!(build_graph(&bad_bubble).is_err());
    let empty = NodalCurve { components: vec![], marked: vec![], nodes: vec![] };
    assert!(classify_curve(&empty).is_err());
}

#[test]
fn holonomy_matches_across_every_node() {
    for k in 1..8 {
        let chain = chain_holonomy_propagation(k).unwrap();
        assert_eq!(chain.len(), k);
        assert!(node_matching_products(&chain).iter().all(|&p| p == 0));
        for s in [0.1, 0.37, 1.0 / 3.0] {
            for w in chain.windows(2) {
                let product = w[0].eval(s).1 * w[1].eval(s).0;
                assert!((product - vortexlab::scalar::C64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }
    assert!(chain_holonomy_propagation(0).is_err());
}
