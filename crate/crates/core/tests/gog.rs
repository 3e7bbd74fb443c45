mod common;

use std::collections::{HashSet, VecDeque};

use common::graph;
use gogbench::algebra::GroupLike;
use gogbench::gog::{Crossing, OrientedEdge};
use gogbench::Error;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn reduce_examples() {
    let g1 = graph("g1-bs12");
    let b = g1.base();
    let s = g1.parse_sequence(b, "1, e, x, ebar, 1").unwrap();
    let r = g1.reduce(&s).unwrap();
    assert_eq!(g1.format_sequence(&r), "(x^2)");

    let s = g1.parse_sequence(b, "1, e, 1, ebar, 1").unwrap();
    assert_eq!(g1.format_sequence(&g1.reduce(&s).unwrap()), "(1)");

    let g0 = graph("g0");
    let s = g0.parse_sequence(g0.base(), "1, e, x2, ebar, 1").unwrap();
    let r = g0.reduce(&s).unwrap();
    assert_eq!(g0.format_sequence(&r), "(x2 x1^2)");
}

#[test]
fn trivial_backtrack_reduces_in_every_scenario() {
    for id in common::graph_ids() {
        let gog = graph(id);
        for f in gog.oriented_edges().into_iter().filter(|f| gog.source(*f) == gog.base()) {
            let s = gog
                .sequence(gog.base(), vec![gog.group(gog.base()).identity(), gog.group(gog.target(f)).identity(), gog.group(gog.base()).identity()], vec![f, f.rev()])
                .unwrap();
            assert!(gog.is_trivial_loop(&s).unwrap(), "{id}");
        }
    }
}

#[test]
fn gamma_length_examples() {
    let g0 = graph("g0");
    let s = g0.parse_sequence(g0.base(), "1, e, x2, ebar, 1").unwrap();
    assert_eq!(g0.gamma_length(&s).unwrap(), 3);
    assert_eq!(g0.gamma_length(&g0.trivial(g0.base())).unwrap(), 0);
    // the first label counts too
    let s = g0.parse_sequence(g0.base(), "x1 x2, e, 1, ebar, x1").unwrap();
    assert_eq!(g0.gamma_length(&s).unwrap(), 5);
}

#[test]
fn pi1_examples() {
    let g1 = graph("g1-bs12");
    let exe = g1.pi1(&g1.parse_sequence(g1.base(), "1, e, x, ebar, 1").unwrap()).unwrap();
    let x2 = g1.pi1_vertex(g1.group(g1.base()).parse("x^2").unwrap()).unwrap();
    assert!(g1.pi1_equal(&exe, &x2).unwrap());

    let g0 = graph("g0");
    let b = g0.base();
    let lhs = g0.pi1(&g0.parse_sequence(b, "1, e, x2, ebar, 1").unwrap()).unwrap();
    let grp = g0.group(b);
    let right = g0.pi1_vertex(grp.parse("x2 x1^2").unwrap()).unwrap();
    let wrong = g0.pi1_vertex(grp.parse("x2").unwrap()).unwrap();
    assert!(g0.pi1_equal(&lhs, &right).unwrap());
    assert!(!g0.pi1_equal(&lhs, &wrong).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let a = g0.pi1(&common::random_loop(&g0, 3, &mut rng)).unwrap();
        let p = g0.pi1_multiply(&a, &g0.pi1_inverse(&a).unwrap()).unwrap();
        assert!(g0.pi1_equal(&p, &g0.pi1_identity()).unwrap());
    }
}

/// Lengths in BS(1,2) = <x, t> from a BFS over affine maps `z -> 2^a z + b`.
fn affine_lengths(max_k: i64, radius: usize) -> Vec<Option<usize>> {
    type Aff = (i64, Ratio<i128>);
    let start: Aff = (0, Ratio::from_integer(0));
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    let mut out = vec![None; max_k as usize + 1];
    while let Some(((a, b), d)) = queue.pop_front() {
        if a == 0 && b.is_integer() && (0..=max_k).contains(&(*b.numer() as i64)) && out[*b.numer() as usize].is_none() {
            out[*b.numer() as usize] = Some(d);
        }
        if d == radius {
            continue;
        }
        let s = if a >= 0 { Ratio::from_integer(1i128 << a) } else { Ratio::new(1, 1i128 << -a) };
        for next in [(a, b + s), (a, b - s), (a + 1, b), (a - 1, b)] {
            if seen.insert(next) {
                queue.push_back((next, d + 1));
            }
        }
    }
    out
}

#[test]
fn pi1_word_length_matches_affine_model_of_g1() {
    let g1 = graph("g1-bs12");
    let oracle = affine_lengths(40, 10);
    let grp = g1.group(g1.base()).clone();
    for k in 0..=40i64 {
        let g = g1.pi1_vertex(grp.parse(&format!("x^{k}")).unwrap()).unwrap();
        assert_eq!(g1.pi1_word_length(&g, 10).unwrap(), oracle[k as usize], "x^{k}");
    }
    // Frozen from the affine oracle: x^16 = e^3 x^2 ebar^3.
    assert_eq!(oracle[16], Some(8));
    assert_eq!(g1.pi1_word_length(&g1.pi1_identity(), 0).unwrap(), Some(0));
}

#[test]
fn sol_amalgam_fiber_element_length() {
    let g3 = graph("g3-sol-amalgam");
    let grp = g3.group(g3.base()).clone();
    // A^5 e1 for the cat map is (89, 55) = t^5 e1 t^-5.
    let g = grp.parse("e1^89 e2^55").unwrap();
    assert_eq!(g, grp.parse("t^5 e1 t^-5").unwrap());
    let l = g3.pi1_word_length(&g3.pi1_vertex(g).unwrap(), 11).unwrap();
    assert!(l.is_some_and(|l| l <= 11), "{l:?}");
}

#[test]
fn crossing_examples() {
    let g1 = graph("g1-bs12");
    let e = OrientedEdge::fwd(g1.edge_index("e").unwrap());
    let grp = g1.group(g1.base());
    let x2 = grp.parse("x^2").unwrap();
    assert_eq!(g1.crossing_path(&[e], &x2).unwrap(), Crossing::Defined(grp.parse("x").unwrap()));
    assert_eq!(g1.crossing_path(&[e, e], &x2).unwrap(), Crossing::NotWellDefined { index: 2 });
    assert!(g1.is_maximal(&[e], &x2, e).unwrap());
    assert_eq!(g1.crossing_path(&[], &x2).unwrap(), Crossing::Defined(x2.clone()));
}

#[test]
fn britton_condition_in_g1() {
    // Here ebar x^m e is the pattern whose middle must lie in <x^2>.
    let g1 = graph("g1-bs12");
    let b = g1.base();
    for m in -20i64..=20 {
        let s = g1.parse_sequence(b, &format!("1, ebar, x^{m}, e, 1")).unwrap();
        let r = g1.reduce(&s).unwrap();
        if m % 2 == 0 {
            assert_eq!(g1.format_sequence(&r), g1.format_sequence(&g1.vertex_element(b, g1.group(b).parse(&format!("x^{}", m / 2)).unwrap())));
        } else {
            assert_eq!(r.edge_length(), 2, "m = {m}");
            assert!(!g1.is_trivial_loop(&s).unwrap());
        }
    }
}

#[test]
fn local_tree_examples() {
    let g1 = graph("g1-bs12");
    assert_eq!(g1.local_tree(0, 2, 100).unwrap().len(), 1);
    let nodes = g1.local_tree(1, 2, 100).unwrap();
    let e = OrientedEdge::fwd(g1.edge_index("e").unwrap());
    let children = nodes.iter().filter(|n| n.via.as_ref().is_some_and(|(f, _)| *f == e)).count();
    assert!(children >= 2, "{children}");

    for id in common::graph_ids() {
        let gog = graph(id);
        for depth in 0..=3 {
            match gog.local_tree(depth, 1, 400) {
                Ok(nodes) => assert!(gog.tree_nodes_distinct(&nodes).unwrap(), "{id} depth {depth}"),
                Err(Error::BudgetExceeded { .. }) => break,
                Err(err) => panic!("{id}: {err}"),
            }
        }
    }
}

#[test]
fn malformed_sequence_rejected() {
    let g3 = graph("g3-sol-amalgam");
    let v = g3.base();
    let e = OrientedEdge::fwd(0);
    let w = g3.target(e);
    assert_ne!(v, w);
    let ids = vec![g3.group(v).identity(), g3.group(w).identity(), g3.group(w).identity()];
    assert!(matches!(g3.sequence(v, ids, vec![e, e]), Err(Error::SequenceIllFormed(_))));
}
