mod common;

use gogbench::algebra::GroupLike;
use gogbench::free_product::{hat_lift, magic_pair, pi1_convolve, FreeProductElement, NormalSets, Syllable};
use gogbench::functions::SupportedFunction;
use gogbench::gog::GraphOfGroups;
use gogbench::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Random positive integer values on a random part of `support`.
fn random_values<T: Clone>(support: &[T], density: f64, max: i128, rng: &mut ChaCha8Rng) -> Vec<(T, i128)> {
    let mut out = Vec::new();
    for x in support {
        if rng.gen_bool(density) {
            out.push((x.clone(), rng.gen_range(1..=max)));
        }
    }
    out
}

fn alternates(gog: &GraphOfGroups, x: &FreeProductElement) -> bool {
    let syl = x.syllables();
    let nontrivial = syl.iter().all(|s| match s {
        Syllable::Vertex { vertex, elem } => *elem != gog.group(*vertex).identity(),
        Syllable::Edge { power, .. } => *power != 0,
    });
    let distinct = syl.windows(2).all(|w| match (&w[0], &w[1]) {
        (Syllable::Vertex { vertex: a, .. }, Syllable::Vertex { vertex: b, .. }) => a != b,
        (Syllable::Edge { edge: a, .. }, Syllable::Edge { edge: b, .. }) => a != b,
        _ => true,
    });
    nontrivial && distinct
}

#[test]
fn identity_lifts_to_the_empty_word() {
    for id in ["g0", "g1-bs12", "g3-sol-amalgam"] {
        let gog = common::graph(id);
        let ns = NormalSets::build(&gog, 1).unwrap();
        let e = ns.lookup(&gog, &gog.pi1_identity()).unwrap().unwrap();
        assert_eq!(e.length, 0);
        assert_eq!(e.hat, FreeProductElement::identity());
        assert_eq!(e.reduced.edge_length(), 0);
    }
}

#[test]
fn g1_geodesic_for_x_squared() {
    let g1 = common::graph("g1-bs12");
    let b = g1.base();
    let long = g1.parse_sequence(b, "1, e, x, ebar, 1").unwrap();
    let short = g1.vertex_element(b, g1.group(b).parse("x^2").unwrap());
    assert_eq!((g1.gamma_length(&short).unwrap(), g1.gamma_length(&long).unwrap()), (2, 3));

    let ns = NormalSets::build(&g1, 3).unwrap();
    let entry = ns.lookup(&g1, &g1.pi1(&long).unwrap()).unwrap().unwrap();
    assert_eq!(entry.length, 2);
    assert_eq!(g1.format_sequence(&entry.geodesic), "(x^2)");
    assert_eq!(entry.hat_length, 2);
}

#[test]
fn normal_sets_are_bijective_and_geodesic() {
    for id in common::graph_ids() {
        let gog = common::graph(id);
        let r = 2;
        let ns = match NormalSets::build(&gog, r) {
            Ok(ns) => ns,
            Err(Error::BudgetExceeded { .. }) => continue,
            Err(err) => panic!("{id}: {err}"),
        };
        assert_eq!(ns.len(), gog.pi1_ball(r).unwrap().len(), "{id}");
        for e in &ns.entries {
            assert!(gog.pi1_equal(&gog.pi1(&e.geodesic).unwrap(), &e.element).unwrap(), "{id}");
            assert!(gog.pi1_equal(&gog.pi1(&e.reduced).unwrap(), &e.element).unwrap(), "{id}");
            assert!(gog.is_reduced(&e.reduced).unwrap(), "{id}");
            assert_eq!(gog.gamma_length(&e.geodesic).unwrap(), e.length, "{id}");
            assert!(alternates(&gog, &e.hat));
        }
        let curve = ns.lift_length_curve();
        assert!(curve.windows(2).all(|w| w[0].1 <= w[1].1), "{id}: {curve:?}");
    }
}

#[test]
fn hat_lift_is_isometric() {
    let g1 = common::graph("g1-bs12");
    let ns = NormalSets::build(&g1, 3).unwrap();
    let one = SupportedFunction::delta(0, g1.pi1_vertex(g1.group(g1.base()).parse("x^3").unwrap()).unwrap());
    assert_eq!(hat_lift(&g1, &ns, &one).unwrap().l2_norm_sq(), q(1));
    let chi = SupportedFunction::indicator(0, ns.ball(2).cloned());
    let n = chi.support_size();
    assert_eq!(n, g1.pi1_ball(2).unwrap().len());
    assert_eq!(hat_lift(&g1, &ns, &chi).unwrap().l2_norm_sq(), q(n));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ball: Vec<_> = ns.ball(3).cloned().collect();
    for _ in 0..20 {
        let vals: Vec<_> = random_values(&ball, 0.3, 9, &mut rng);
        let f = SupportedFunction::from_integers(0, vals).unwrap();
        assert_eq!(hat_lift(&g1, &ns, &f).unwrap().l2_norm_sq(), f.l2_norm_sq());
    }

    let far = g1.pi1_vertex(g1.group(g1.base()).parse("x^1000").unwrap()).unwrap();
    assert!(matches!(hat_lift(&g1, &ns, &SupportedFunction::delta(0, far)), Err(Error::SupportOutsideDomain)));
}

#[test]
fn magic_pair_with_delta_at_identity() {
    let g0 = common::graph("g0");
    let ns = NormalSets::build(&g0, 4).unwrap();
    let f = SupportedFunction::delta(0, g0.pi1_identity());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ball: Vec<_> = ns.ball(2).cloned().collect();
    for _ in 0..10 {
        let vals: Vec<_> = random_values(&ball, 0.4, 4, &mut rng);
        if vals.is_empty() {
            continue;
        }
        let g = SupportedFunction::from_integers(0, vals).unwrap();
        let (big_f, big_g, rep) = magic_pair(&g0, &ns, &f, &g).unwrap();
        assert!(rep.conv_equal() && rep.f_equal() && rep.g_equal());
        assert_eq!(big_f.l2_norm_sq(), q(1));
        // G is the hat lift of g here.
        assert_eq!(big_g.l2_norm_sq(), hat_lift(&g0, &ns, &g).unwrap().l2_norm_sq());
        assert_eq!(rep.pointwise_ok, rep.pointwise_total);
    }
}

#[test]
fn magic_pair_reports_exact_sides() {
    let g0 = common::graph("g0");
    let ns = NormalSets::build(&g0, 4).unwrap();
    let ball: Vec<_> = ns.ball(2).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let pick = |rng: &mut ChaCha8Rng| {
            let vals: Vec<_> = random_values(&ball, 0.3, 4, rng);
            SupportedFunction::from_integers(0, if vals.is_empty() { vec![(ball[0].clone(), 1)] } else { vals }).unwrap()
        };
        let (f, g) = (pick(&mut rng), pick(&mut rng));
        let (_, _, rep) = magic_pair(&g0, &ns, &f, &g).unwrap();
        assert_eq!(rep.conv_sq, pi1_convolve(&g0, &f, &g).unwrap().l2_norm_sq());
        assert_eq!((rep.f_sq.clone(), rep.g_sq.clone()), (f.l2_norm_sq(), g.l2_norm_sq()));
        // F is the hat lift of f, so this identity always holds.
        assert!(rep.f_equal());
    }
}

#[test]
fn free_product_normal_form_alternates() {
    let g0 = common::graph("g0");
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut pool: Vec<FreeProductElement> = (0..50)
        .map(|_| FreeProductElement::from_sequence(&g0, &common::random_sequence(&g0, 3, &mut rng)))
        .collect();
    for _ in 0..10_000 {
        let a = &pool[rng.gen_range(0..pool.len())];
        let b = &pool[rng.gen_range(0..pool.len())];
        let p = a.mul(&g0, b);
        assert!(alternates(&g0, &p), "{}", p.format(&g0));
        assert_eq!(p.mul(&g0, &b.inv(&g0)), *a);
        if pool.len() < 400 && p.syllables().len() < 12 {
            pool.push(p);
        }
    }
    let t = FreeProductElement::edge(0, 2);
    assert_eq!(t.mul(&g0, &FreeProductElement::edge(0, -2)), FreeProductElement::identity());
}
