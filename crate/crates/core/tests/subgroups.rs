mod common;

use std::collections::HashSet;

use gogbench::algebra::GroupLike;
use gogbench::groups::{Group, GroupElement};
use gogbench::scenarios;
use gogbench::stallings::StallingsGraph;
use gogbench::subgroup::{BackendKind, Membership, OracleSpec, SubgroupOracle};
use gogbench::Error;

fn oracle(ambient: &Group, domain: &Group, images: &[&str], backend: BackendKind) -> SubgroupOracle {
    let imgs = images.iter().map(|w| ambient.parse(w).unwrap()).collect();
    SubgroupOracle::new(ambient, domain, imgs, &OracleSpec::of(backend)).unwrap()
}

fn z2(x: i64, y: i64) -> GroupElement {
    GroupElement::Abelian(vec![x, y])
}

#[test]
fn stallings_examples() {
    let f2 = Group::free_named(&["a", "b"]);
    let dom1 = Group::free_named(&["h1"]);
    let dom2 = Group::free_named(&["h1", "h2"]);
    let cyc = oracle(&f2, &dom1, &["a"], BackendKind::Stallings);
    assert!(cyc.is_member(&f2.parse("a^3").unwrap()).unwrap());
    let h = oracle(&f2, &dom2, &["a^2", "b"], BackendKind::Stallings);
    assert!(!h.is_member(&f2.parse("a").unwrap()).unwrap());
    assert_eq!(h.preimage(&f2.parse("a^2 b").unwrap()).unwrap(), dom2.parse("h1 h2").unwrap());

    // <a^2, a b> against every product of at most 8 generators.
    let h = oracle(&f2, &dom2, &["a^2", "a b"], BackendKind::Stallings);
    let mut products: HashSet<GroupElement> = HashSet::from([f2.identity()]);
    let mut frontier = vec![f2.identity()];
    let letters: Vec<GroupElement> = h.images().iter().flat_map(|g| [g.clone(), f2.inv(g)]).collect();
    for _ in 0..8 {
        let mut next = Vec::new();
        for p in &frontier {
            for l in &letters {
                let q = f2.mul(p, l);
                if products.insert(q.clone()) {
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    // The generators are Nielsen reduced, so members of length <= 8 need at most 8 factors.
    let ball = f2.ball_enumerate(8).unwrap();
    for g in ball.ball(8) {
        assert_eq!(h.is_member(g).unwrap(), products.contains(g), "{}", f2.format(g));
    }
}

#[test]
fn empty_generating_set_is_trivial() {
    let s = StallingsGraph::new(&[]);
    assert!(s.contains(&[]));
    assert!(!s.contains(&[1]));
    assert_eq!(s.rank(), 0);
}

#[test]
fn folding_is_idempotent() {
    for gens in [vec![vec![1, 1], vec![1, 2]], vec![vec![1, 2, -1], vec![2, 2], vec![1, 1, 1]], vec![vec![1], vec![2, 1, -2]]] {
        let s = StallingsGraph::new(&gens);
        assert!(s.is_folded());
        let t = s.refold();
        assert!(t.is_folded());
        assert_eq!((t.num_states(), t.num_edges(), t.rank()), (s.num_states(), s.num_edges(), s.rank()));
        for w in [vec![1, 1, 1, 2], vec![2, 2, 2, 2], vec![1, 2, -1, 1, 1]] {
            assert_eq!(s.contains(&w), t.contains(&w));
        }
    }
}

#[test]
fn contains_examples() {
    let z = Group::free_abelian(2);
    let lat = oracle(&z, &Group::free_abelian(2), &["e1^2", "e2^3"], BackendKind::IntegerLattice);
    assert_eq!(lat.contains(&z2(4, 3)).unwrap(), Membership::In);
    assert_eq!(lat.contains(&z2(1, 0)).unwrap(), Membership::NotIn);

    let sol = Group::semidirect([[2, 1], [1, 1]]).unwrap();
    let fiber = oracle(&sol, &Group::free_abelian(2), &["e1", "e2"], BackendKind::FiberProjection);
    assert!(fiber.is_member(&GroupElement::Semidirect { v: [5, -1], k: 0 }).unwrap());
    assert!(!fiber.is_member(&GroupElement::Semidirect { v: [0, 0], k: 1 }).unwrap());

    let g1 = scenarios::load("g1-bs12").unwrap().build_graph().unwrap();
    let e = g1.edge_index("e").unwrap();
    let bar = &g1.edges[e].iota_bar;
    let v = g1.group(g1.base());
    assert!(bar.is_member(&v.parse("x^4").unwrap()).unwrap());
    assert!(!bar.is_member(&v.parse("x^3").unwrap()).unwrap());
    assert_eq!(bar.preimage(&v.parse("x^6").unwrap()).unwrap(), bar.domain().parse("a^3").unwrap());
    assert!(matches!(bar.preimage(&v.parse("x^3").unwrap()), Err(Error::NotInSubgroup)));
}

#[test]
fn lattice_preimage_solves_the_system() {
    let z = Group::free_abelian(2);
    let dom = Group::free_abelian(2);
    let lat = SubgroupOracle::new(&z, &dom, vec![z2(2, 1), z2(0, 5)], &OracleSpec::of(BackendKind::IntegerLattice)).unwrap();
    assert_eq!(lat.preimage(&z2(2, 6)).unwrap(), GroupElement::Abelian(vec![1, 1]));
}

#[test]
fn nearest_in_coset_examples() {
    let z = Group::free_abelian(2);
    let lat = SubgroupOracle::new(&z, &Group::free_abelian(2), vec![z2(2, 0), z2(0, 2)], &OracleSpec::of(BackendKind::IntegerLattice)).unwrap();
    assert_eq!(lat.nearest_in_coset(&z2(4, 2), &z.identity(), 3).unwrap().map(|p| p.1), Some(0));
    assert_eq!(lat.nearest_in_coset(&z2(1, 0), &z.identity(), 3).unwrap().map(|p| p.1), Some(1));

    let sol = Group::semidirect([[2, 1], [1, 1]]).unwrap();
    let fiber = oracle(&sol, &Group::free_abelian(2), &["e1", "e2"], BackendKind::FiberProjection);
    let target = GroupElement::Semidirect { v: [3, 2], k: 1 };
    let (m, d) = fiber.nearest_in_coset(&target, &sol.identity(), 3).unwrap().unwrap();
    assert_eq!((m, d), (GroupElement::Semidirect { v: [3, 2], k: 0 }, 1));
}

#[test]
fn nearest_in_coset_is_a_true_minimum() {
    let sol = Group::semidirect([[2, 1], [1, 1]]).unwrap();
    let fiber = oracle(&sol, &Group::free_abelian(2), &["e1^2", "e2"], BackendKind::FiberProjection);
    let z = Group::free_abelian(2);
    let lat = oracle(&z, &Group::free_abelian(2), &["e1^3", "e1 e2^2"], BackendKind::IntegerLattice);
    for (amb, o) in [(&sol, &fiber), (&z, &lat)] {
        let radius = 4;
        let ball = amb.ball_enumerate(radius + 2).unwrap();
        let targets: Vec<GroupElement> = ball.ball(2).cloned().collect();
        let reps: Vec<GroupElement> = ball.ball(1).cloned().collect();
        for t in &targets {
            for rep in &reps {
                let got = o.nearest_in_coset(t, rep, radius).unwrap().map(|p| p.1);
                // Brute force over the ball: the least L(t^-1 m) with rep^-1 m in H.
                let mut best = None;
                for d in ball.ball(radius) {
                    let m = amb.mul(t, d);
                    if o.is_member(&amb.mul(&amb.inv(rep), &m)).unwrap() {
                        let l = ball.length(d).unwrap();
                        best = Some(best.map_or(l, |b: usize| b.min(l)));
                    }
                }
                assert_eq!(got, best);
            }
        }
    }
}

#[test]
fn preimage_inverts_every_scenario_embedding() {
    for id in scenarios::ids() {
        let cfg = scenarios::load(id).unwrap();
        let mut oracles: Vec<SubgroupOracle> = cfg.subgroups.keys().map(|k| cfg.subgroup(k).unwrap()).collect();
        if cfg.has_graph() {
            let gog = cfg.build_graph().unwrap();
            for e in &gog.edges {
                oracles.push(e.iota.clone());
                oracles.push(e.iota_bar.clone());
            }
        }
        for o in &oracles {
            let dom = o.domain();
            let r = if dom.symmetric_generators().len() > 4 { 4 } else { 5 };
            for h in dom.ball_enumerate(r).unwrap().ball(r) {
                let g = o.apply(h).unwrap();
                assert!(o.is_member(&g).unwrap(), "{id}");
                assert_eq!(&o.preimage(&g).unwrap(), h, "{id}");
            }
        }
    }
}

#[test]
fn membership_is_closed_under_products() {
    let gog = common::graph("g0");
    for e in &gog.edges {
        for o in [&e.iota, &e.iota_bar] {
            let amb = o.ambient();
            let members: Vec<GroupElement> = amb.ball_enumerate(3).unwrap().ball(3).filter(|g| o.is_member(g).unwrap()).cloned().collect();
            for a in &members {
                assert!(o.is_member(&amb.inv(a)).unwrap());
                for b in &members {
                    assert!(o.is_member(&amb.mul(a, b)).unwrap());
                }
            }
        }
    }
}
