mod common;

use btlab_core::building::build_ball;
use btlab_core::canon::{are_isomorphic, canonical_form, canonical_form_centered, canonical_labeling, IsoCheck};
use btlab_core::field::FieldDescriptor;
use btlab_core::graph::{fixtures, LabeledGraph};
use btlab_core::Budget;
use common::ring;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rook_4x4() -> LabeledGraph {
    let mut edges = Vec::new();
    for a in 0..16usize {
        for b in a + 1..16 {
            if a / 4 == b / 4 || a % 4 == b % 4 {
                edges.push((a, b));
            }
        }
    }
    LabeledGraph::from_edges(16, &edges).unwrap()
}

fn shrikhande() -> LabeledGraph {
    let mut edges = Vec::new();
    for a in 0..16usize {
        for b in a + 1..16 {
            let dx = (b / 4 + 4 - a / 4) % 4;
            let dy = (b % 4 + 4 - a % 4) % 4;
            if matches!((dx, dy), (0, 1) | (0, 3) | (1, 0) | (3, 0) | (1, 1) | (3, 3)) {
                edges.push((a, b));
            }
        }
    }
    LabeledGraph::from_edges(16, &edges).unwrap()
}

fn petersen() -> LabeledGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    LabeledGraph::from_edges(10, &edges).unwrap()
}

fn fixture_suite() -> Vec<(&'static str, LabeledGraph)> {
    let budget = Budget::default();
    let tree = build_ball(&ring(&FieldDescriptor::laurent(2, 1), 3), 2, &budget).unwrap().graph;
    let x3 = build_ball(&ring(&FieldDescriptor::laurent(2, 1), 2), 3, &budget).unwrap().graph;
    let x3z = build_ball(&ring(&FieldDescriptor::qp(2), 2), 3, &budget).unwrap().graph;
    let x3r1 = build_ball(&ring(&FieldDescriptor::laurent(2, 1), 1), 3, &budget).unwrap().graph;
    vec![
        ("cycle6", fixtures::cycle(6)),
        ("cycle7", fixtures::cycle(7)),
        ("path5", fixtures::path(5)),
        ("star4", fixtures::star(4)),
        ("fano", fixtures::fano_incidence()),
        ("petersen", petersen()),
        ("rook", rook_4x4()),
        ("shrikhande", shrikhande()),
        ("tree22", tree),
        ("x3_r1", x3r1),
        ("x3_f2t", x3),
        ("x3_z4", x3z),
    ]
}

fn shuffled(g: &LabeledGraph, rng: &mut ChaCha8Rng) -> LabeledGraph {
    let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
    perm.shuffle(rng);
    g.relabel(&perm)
}

fn strip(mut g: LabeledGraph) -> LabeledGraph {
    g.color = None;
    g
}

#[test]
fn certificates_survive_relabelling() {
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, g) in fixture_suite() {
        let g = strip(g);
        let base = canonical_form(&g, false, &budget).unwrap();
        let rounds = if g.vertex_count() > 50 { 20 } else { 100 };
        for _ in 0..rounds {
            let h = shuffled(&g, &mut rng);
            assert_eq!(canonical_form(&h, false, &budget).unwrap(), base, "{name}");
        }
    }
}

#[test]
fn canonical_labelling_reproduces_the_encoding() {
    let budget = Budget::default();
    for (name, g) in fixture_suite() {
        let g = strip(g);
        let form = canonical_labeling(&g, false, &budget).unwrap();
        let relabelled = g.relabel(&form.labeling);
        assert_eq!(canonical_form(&relabelled, false, &budget).unwrap(), form.certificate, "{name}");
        for aut in &form.automorphisms {
            for (u, v) in g.edges() {
                assert!(g.has_edge(aut[u], aut[v]), "{name}: bad automorphism");
            }
        }
    }
}

#[test]
fn isomorphism_test_agrees_with_certificates() {
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let suite: Vec<(&str, LabeledGraph)> = fixture_suite().into_iter().map(|(n, g)| (n, strip(g))).collect();
    let certs: Vec<_> = suite.iter().map(|(_, g)| canonical_form(g, false, &budget).unwrap()).collect();
    for (i, (na, a)) in suite.iter().enumerate() {
        for (j, (nb, b)) in suite.iter().enumerate() {
            let b = shuffled(b, &mut rng);
            let iso = are_isomorphic(a, &b, false, &budget).unwrap();
            let same = certs[i] == certs[j];
            assert_eq!(matches!(iso, IsoCheck::Isomorphic(_)), same, "{na} vs {nb}");
            if let IsoCheck::Isomorphic(map) = iso {
                for (u, v) in a.edges() {
                    assert!(b.has_edge(map[u], map[v]));
                }
            }
        }
    }
    // same parameters, different graphs
    assert_ne!(certs[6], certs[7]);
}

#[test]
fn centered_certificates_follow_the_origin() {
    let budget = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ball = build_ball(&ring(&FieldDescriptor::laurent(2, 1), 2), 3, &budget).unwrap();
    let g = strip(ball.graph);
    let base = canonical_form_centered(&g, &budget).unwrap();
    for _ in 0..10 {
        let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
        perm.shuffle(&mut rng);
        let h = g.relabel(&perm);
        assert_eq!(h.dist.as_ref().unwrap()[perm[ball.origin]], 0);
        assert_eq!(canonical_form_centered(&h, &budget).unwrap(), base);
    }
}

fn random_connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> LabeledGraph {
    let mut g = LabeledGraph::new(n);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v).unwrap();
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !g.has_edge(u, v) {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_graphs_have_relabelling_invariant_certificates(seed in any::<u64>(), n in 2usize..40, extra in 0usize..60) {
        let budget = Budget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected(&mut rng, n, extra);
        let h = shuffled(&g, &mut rng);
        prop_assert_eq!(canonical_form(&g, false, &budget).unwrap(), canonical_form(&h, false, &budget).unwrap());
        let iso = are_isomorphic(&g, &h, false, &budget).unwrap();
        prop_assert!(matches!(iso, IsoCheck::Isomorphic(_)));
    }

    #[test]
    fn edge_count_change_breaks_isomorphism(seed in any::<u64>(), n in 4usize..30) {
        let budget = Budget::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected(&mut rng, n, n);
        let mut h = g.clone();
        let missing = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).find(|&(u, v)| !g.has_edge(u, v));
        if let Some((u, v)) = missing {
            h.add_edge(u, v).unwrap();
            prop_assert_ne!(canonical_form(&g, false, &budget).unwrap(), canonical_form(&h, false, &budget).unwrap());
        }
    }
}
