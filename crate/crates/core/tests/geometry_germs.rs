mod common;

use btlab_core::building::{build_ball, Ball};
use btlab_core::field::FieldDescriptor;
use btlab_core::geometry::{atilde_diagram, diagram_symmetries, verify_geometry, CoxeterDiagram, Entry, Scope};
use btlab_core::germs::{align_to_symmetry, is_single_orbit, propagate, short_cycle_certificate, GermAtlas, Propagation};
use btlab_core::graph::fixtures;
use btlab_core::{Budget, Error};
use common::ring;

fn ball(p: u64, d: usize, r: u32) -> Ball<u32> {
    build_ball(&ring(&FieldDescriptor::laurent(p, 1), r), d, &Budget::default()).unwrap()
}

fn germ_scope(b: &Ball<u32>) -> Vec<bool> {
    Scope::Within(b.radius - 1).predicate(&b.graph, b.radius)
}

#[test]
fn interior_geometry_axioms_hold() {
    for (q, d, r) in [(2, 3, 2), (2, 3, 3), (2, 4, 2), (3, 3, 2), (3, 3, 3)] {
        let b = ball(q, d, r);
        let tau = b.graph.color.clone().unwrap();
        let m = atilde_diagram(d).unwrap();
        let interior = verify_geometry(&b.graph, &tau, &m, &Scope::Interior.predicate(&b.graph, r)).unwrap();
        assert!(interior.passed(), "q={q} d={d} R={r}: {:?}", interior.violations.first());
        assert!(interior.flags_checked > 1);
        if b.vertex_count() < 3000 {
            let within = verify_geometry(&b.graph, &tau, &m, &Scope::Within(r - 1).predicate(&b.graph, r)).unwrap();
            assert!(within.passed());
            // flags on the boundary have truncated residues
            let full = verify_geometry(&b.graph, &tau, &m, &Scope::Full.predicate(&b.graph, r)).unwrap();
            assert!(!full.passed());
        }
    }
}

#[test]
fn scrambled_labels_are_rejected() {
    let b = ball(2, 3, 3);
    let mut tau = b.graph.color.clone().unwrap();
    let m = atilde_diagram(3).unwrap();
    let nb = b.graph.neighbors(b.origin)[0];
    tau[nb] = tau[b.origin];
    let report = verify_geometry(&b.graph, &tau, &m, &Scope::Interior.predicate(&b.graph, 3)).unwrap();
    assert!(!report.passed());
    assert!(report.violations.iter().any(|v| v.condition == 0));
}

#[test]
fn origin_germs_form_one_orbit() {
    let budget = Budget::default();
    for (q, d, r, count) in [(2, 3, 2, 6), (2, 3, 3, 6), (3, 3, 2, 6), (2, 4, 2, 8)] {
        let b = ball(q, d, r);
        let m = atilde_diagram(d).unwrap();
        let atlas = GermAtlas::new(&b.graph, &m, &budget);
        let germs = atlas.germs_at(b.origin).unwrap();
        assert_eq!(germs.len(), count, "q={q} d={d}");
        assert!(is_single_orbit(&germs, &diagram_symmetries(&m)));
        let tau = b.graph.color.as_ref().unwrap();
        assert!(germs.iter().any(|g| g.vertices.iter().zip(&g.colors).all(|(&v, &c)| tau[v] == c)));
    }
}

#[test]
fn transport_round_trips_and_commutes_with_symmetries() {
    let budget = Budget::default();
    for (q, d, r) in [(2, 3, 2), (2, 3, 3), (2, 4, 2)] {
        let b = ball(q, d, r);
        let m = atilde_diagram(d).unwrap();
        let syms = diagram_symmetries(&m);
        let atlas = GermAtlas::new(&b.graph, &m, &budget);
        let scope = germ_scope(&b);
        for (x, y) in b.graph.edges() {
            if !(scope[x] && scope[y]) {
                continue;
            }
            for (from, to) in [(x, y), (y, x)] {
                for germ in atlas.germs_at(from).unwrap() {
                    let there = atlas.transport(&germ, to).unwrap();
                    assert_eq!(atlas.transport(&there, from).unwrap(), germ);
                    for s in &syms {
                        assert_eq!(atlas.transport(&germ.permuted(s), to).unwrap(), there.permuted(s));
                    }
                }
            }
        }
    }
}

#[test]
fn propagation_recovers_type_labels_from_any_seed() {
    let budget = Budget::default();
    for (q, d, r) in [(2, 3, 3), (2, 4, 2), (3, 3, 2)] {
        let b = ball(q, d, r);
        let m = atilde_diagram(d).unwrap();
        let syms = diagram_symmetries(&m);
        let atlas = GermAtlas::new(&b.graph, &m, &budget);
        let scope = germ_scope(&b);
        let tau: Vec<Option<u32>> = b.graph.color.as_ref().unwrap().iter().map(|&c| Some(c)).collect();
        let dist = b.graph.dist.as_ref().unwrap();
        let mut basepoints = vec![b.origin];
        basepoints.extend((0..b.vertex_count()).filter(|&v| dist[v] == 1).take(1));
        basepoints.extend((0..b.vertex_count()).filter(|&v| scope[v] && dist[v] == r - 1 && r > 2).take(1));
        for &base in &basepoints {
            for seed in atlas.germs_at(base).unwrap() {
                let out = propagate(&atlas, &seed, &scope).unwrap();
                let labels = out.labelling().unwrap_or_else(|| panic!("obstruction: {out:?}"));
                let masked: Vec<Option<u32>> = tau.iter().zip(labels).map(|(&t, l)| l.and(t)).collect();
                let sigma = align_to_symmetry(&masked, labels, &syms).expect("labels differ from τ");
                assert!(syms.contains(&sigma));
                assert!(labels.iter().enumerate().all(|(v, l)| l.is_some() || !scope[v]));
            }
        }
    }
}

#[test]
fn odd_cycles_obstruct_square_germs() {
    let square = CoxeterDiagram::rank_two(Entry::Finite(4)).unwrap();
    let budget = Budget::default();
    let c8 = fixtures::cycle(8);
    let atlas = GermAtlas::new(&c8, &square, &budget);
    let seed = atlas.germs_at(0).unwrap()[0].clone();
    let out = propagate(&atlas, &seed, &[true; 8]).unwrap();
    assert!(matches!(out, Propagation::Labelling { .. }));

    let c9 = fixtures::cycle(9);
    let atlas = GermAtlas::new(&c9, &square, &budget);
    let seed = atlas.germs_at(0).unwrap()[0].clone();
    match propagate(&atlas, &seed, &[true; 9]).unwrap() {
        Propagation::Obstruction { cycle, .. } => {
            assert_eq!(cycle.len(), 9);
            for i in 0..cycle.len() {
                assert!(c9.has_edge(cycle[i], cycle[(i + 1) % cycle.len()]));
            }
        }
        other => panic!("expected an obstruction, got {other:?}"),
    }
    let cert = short_cycle_certificate(&atlas, 9, &[true; 9]).unwrap();
    assert!(!cert.passed());
    assert_eq!(cert.classes[&9].failures, 1);
}

#[test]
fn short_cycle_certificates_pass_on_balls() {
    let budget = Budget::default();
    for (q, d, r) in [(2, 3, 2), (2, 3, 3), (2, 4, 2), (3, 3, 2)] {
        let b = ball(q, d, r);
        let m = atilde_diagram(d).unwrap();
        let atlas = GermAtlas::new(&b.graph, &m, &budget);
        let cert = short_cycle_certificate(&atlas, 3, &germ_scope(&b)).unwrap();
        assert!(cert.passed(), "q={q} d={d} R={r}");
        assert!(cert.classes[&3].checked > 0);
    }
}

#[test]
fn boundary_vertices_lack_extensions() {
    let b = ball(2, 3, 2);
    let m = atilde_diagram(3).unwrap();
    let budget = Budget::default();
    let atlas = GermAtlas::new(&b.graph, &m, &budget);
    let dist = b.graph.dist.as_ref().unwrap();
    // a leaf-like boundary vertex has too small a neighbourhood for a germ
    let outer = (0..b.vertex_count()).find(|&v| dist[v] == 2).unwrap();
    assert!(atlas.germs_at(outer).unwrap().is_empty());
    let inner = b.graph.neighbors(outer).iter().copied().find(|&u| dist[u] == 1).unwrap();
    let germ = atlas.germs_at(inner).unwrap().remove(0);
    assert!(matches!(atlas.transport(&germ, outer), Err(Error::NoExtension { .. })));
}

#[test]
fn germs_label_skew_balls() {
    let budget = Budget::default();
    let desc = common::skew(2, 1, btlab_core::Ramification::Finite(1), 2, 1);
    let b = build_ball(&ring(&desc, 2), 3, &budget).unwrap();
    assert!(b.graph.color.is_none());
    assert_eq!(b.center_degree(), 42);
    let m = atilde_diagram(3).unwrap();
    let atlas = GermAtlas::new(&b.graph, &m, &budget);
    let seed = atlas.germs_at(b.origin).unwrap().remove(0);
    let out = propagate(&atlas, &seed, &germ_scope(&b)).unwrap();
    let labels: Vec<u32> = out.labelling().unwrap().iter().map(|l| l.unwrap()).collect();
    let report = verify_geometry(&b.graph, &labels, &m, &Scope::Within(1).predicate(&b.graph, 2)).unwrap();
    assert!(report.passed(), "{:?}", report.violations.first());
    assert!(short_cycle_certificate(&atlas, 3, &germ_scope(&b)).unwrap().passed());
}
