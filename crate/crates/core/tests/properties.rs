mod common;

use std::sync::OnceLock;

use gogbench::algebra::GroupLike;
use gogbench::functions::SupportedFunction;
use gogbench::gog::GraphOfGroups;
use gogbench::groups::{Group, GroupElement};
use gogbench::growth::classify_growth;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graphs() -> &'static Vec<(&'static str, GraphOfGroups)> {
    static G: OnceLock<Vec<(&'static str, GraphOfGroups)>> = OnceLock::new();
    G.get_or_init(|| common::graph_ids().into_iter().map(|id| (id, common::graph(id))).collect())
}

fn f2_ball2() -> &'static (Group, Vec<GroupElement>) {
    static B: OnceLock<(Group, Vec<GroupElement>)> = OnceLock::new();
    B.get_or_init(|| {
        let f2 = Group::free(2);
        let ball = f2.ball_enumerate(2).unwrap().ball(2).cloned().collect();
        (f2, ball)
    })
}

/// Functions on `B(2)` of F2 with values in `[0, 5] / den`.
fn function() -> impl Strategy<Value = SupportedFunction<GroupElement>> {
    let n = f2_ball2().1.len();
    (prop::collection::vec(0i128..=5, n), 1i128..=3).prop_map(|(vals, den)| {
        let ball = &f2_ball2().1;
        SupportedFunction::from_fractions(0, ball.iter().cloned().zip(vals), den).unwrap()
    })
}

fn nonneg_function() -> impl Strategy<Value = SupportedFunction<GroupElement>> {
    let n = f2_ball2().1.len();
    prop::collection::vec(prop_oneof![3 => Just(0i128), 2 => 1i128..=6], n).prop_map(|vals| {
        let ball = &f2_ball2().1;
        SupportedFunction::from_integers(0, ball.iter().cloned().zip(vals)).unwrap()
    })
}

fn conv(a: &SupportedFunction<GroupElement>, b: &SupportedFunction<GroupElement>) -> SupportedFunction<GroupElement> {
    let f2 = &f2_ball2().0;
    a.convolve(b, |x, y| f2.mul(x, y)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reduction_is_idempotent_and_confluent(which in 0usize..16, seed in any::<u64>(), steps in 1usize..5) {
        let (id, gog) = &graphs()[which % graphs().len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_sequence(gog, steps, &mut rng);
        let left = gog.reduce(&s).unwrap();
        let right = gog.reduce_right_first(&s).unwrap();
        prop_assert!(gog.is_reduced(&left).unwrap(), "{}", id);
        prop_assert_eq!(&left.edges, &right.edges);
        prop_assert_eq!(&gog.reduce(&left).unwrap(), &left);
        prop_assert!(gog.pi1_equal(&gog.pi1(&gog.concat(&left, &gog.inverse(&right)).unwrap()).unwrap(), &gog.pi1_identity()).unwrap());
    }

    #[test]
    fn pi1_group_axioms(which in 0usize..16, seed in any::<u64>()) {
        let (_, gog) = &graphs()[which % graphs().len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [a, b, c] = [0, 1, 2].map(|_| gog.pi1(&common::random_loop(gog, 2, &mut rng)).unwrap());
        let one = gog.pi1_identity();
        let ab_c = gog.pi1_multiply(&gog.pi1_multiply(&a, &b).unwrap(), &c).unwrap();
        let a_bc = gog.pi1_multiply(&a, &gog.pi1_multiply(&b, &c).unwrap()).unwrap();
        prop_assert!(gog.pi1_equal(&ab_c, &a_bc).unwrap());
        prop_assert!(gog.pi1_equal(&gog.pi1_multiply(&a, &one).unwrap(), &a).unwrap());
        prop_assert!(gog.pi1_equal(&gog.pi1_multiply(&one, &a).unwrap(), &a).unwrap());
        prop_assert!(gog.pi1_equal(&gog.pi1_multiply(&gog.pi1_inverse(&a).unwrap(), &a).unwrap(), &one).unwrap());
    }

    #[test]
    fn pi1_length_is_at_most_gamma_length(which in 0usize..16, seed in any::<u64>()) {
        let (id, gog) = &graphs()[which % graphs().len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_loop(gog, 1, &mut rng);
        let l = gog.gamma_length(&s).unwrap();
        prop_assume!(l <= 6);
        let g = gog.pi1(&s).unwrap();
        match gog.pi1_word_length(&g, l) {
            Ok(found) => prop_assert!(found.is_some_and(|m| m <= l), "{}: {:?} > {}", id, found, l),
            Err(gogbench::Error::BudgetExceeded { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn each_pinch_obeys_the_triangle_bound(which in 0usize..16, seed in any::<u64>(), steps in 1usize..5) {
        let (id, gog) = &graphs()[which % graphs().len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = common::random_sequence(gog, steps, &mut rng);
        let expected = gog.reduce(&s).unwrap();
        // Pinch (g, f, mid, fbar, g') -> g img g' one pattern at a time, leftmost first.
        while let Some(j) = (1..s.edges.len()).find(|&j| {
            s.edges[j] == s.edges[j - 1].rev() && gog.iota(s.edges[j - 1]).is_member(&s.elems[j]).unwrap()
        }) {
            let f = s.edges[j - 1];
            let (src, tgt) = (gog.source(f), gog.target(f));
            let mid = &s.elems[j];
            let img = gog.iota_rev(f).apply(&gog.iota(f).preimage(mid).unwrap()).unwrap();
            let grp = gog.group(src);
            let label = grp.mul(&grp.mul(&s.elems[j - 1], &img), &s.elems[j + 1]);
            let mut next = s.clone();
            next.edges.drain(j - 1..=j);
            next.elems.splice(j - 1..=j + 1, [label]);

            let lengths = (|| Ok::<_, gogbench::Error>((
                gog.gamma_length(&s)?,
                gog.gamma_length(&next)?,
                gog.vertex_length(tgt, mid)?,
                gog.vertex_length(src, &img)?,
            )))();
            let (before, after, l_mid, l_img) = match lengths {
                Ok(l) => l,
                Err(gogbench::Error::BudgetExceeded { .. }) => return Err(TestCaseError::reject("length search over budget")),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert!(after + 2 + l_mid <= before + l_img, "{}: {} -> {} at {}", id, before, after, gog.format_sequence(&s));
            if l_img <= l_mid {
                prop_assert!(after < before, "{}: {} -> {} at {}", id, before, after, gog.format_sequence(&s));
            }
            s = next;
        }
        prop_assert_eq!(&s.edges, &expected.edges);
        prop_assert!(gog.pi1_equal(&gog.pi1(&gog.concat(&s, &gog.inverse(&expected)).unwrap()).unwrap(), &gog.pi1_identity()).unwrap());
    }

    #[test]
    fn convolution_is_associative(f in function(), g in function(), h in function()) {
        prop_assert_eq!(conv(&conv(&f, &g), &h), conv(&f, &conv(&g, &h)));
    }

    #[test]
    fn convolution_distributes(f in function(), g in function(), h in function()) {
        prop_assert_eq!(conv(&f, &g.add(&h).unwrap()), conv(&f, &g).add(&conv(&f, &h)).unwrap());
        prop_assert_eq!(conv(&g.add(&h).unwrap(), &f), conv(&g, &f).add(&conv(&h, &f)).unwrap());
    }

    #[test]
    fn young_bound(f in function(), g in function()) {
        // ||f*g||_2^2 <= ||f||_1^2 ||g||_2^2
        let lhs = conv(&f, &g).l2_norm_sq();
        let l1 = f.l1_norm();
        prop_assert!(lhs <= l1.clone() * l1 * g.l2_norm_sq());
    }

    #[test]
    fn a_single_sample_bounds_the_ratio_from_below(f in nonneg_function(), g in nonneg_function()) {
        prop_assume!(f.support_size() > 0 && g.support_size() > 0);
        // For nonnegative f, g every product term f(x) g(y) survives in (f*g)(xy).
        let fg = conv(&f, &g);
        for x in f.support() {
            for y in g.support() {
                prop_assert!(fg.value(&f2_ball2().0.mul(x, y)) >= f.value(x) * g.value(y));
            }
        }
    }

    #[test]
    fn classification_is_scale_invariant(kind in 0usize..4, c in 0.01f64..1000.0, noise in prop::collection::vec(0.9f64..1.1, 12)) {
        let pts: Vec<(f64, f64)> = (1..=12)
            .map(|n| {
                let x = n as f64;
                let y = match kind { 0 => 3.0, 1 => x * x, 2 => 1.5f64.powf(x), _ => x.powf(1.3) };
                (x, y * noise[n - 1])
            })
            .collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, c * y)).collect();
        prop_assert_eq!(classify_growth(&pts).unwrap().label(), classify_growth(&scaled).unwrap().label());
    }
}

#[test]
fn reduction_can_lengthen_when_the_edge_map_expands() {
    // In g1, e x^m ebar pinches to x^(2m), so full reduction may grow L_Gamma.
    let g1 = common::graph("g1-bs12");
    let s = g1.parse_sequence(g1.base(), "1, e, 1, e, x, e, x^2, ebar, 1, ebar, 1, e, 1").unwrap();
    let r = g1.reduce(&s).unwrap();
    assert_eq!(g1.format_sequence(&r), "(1, e, x^10, e, 1)");
    assert_eq!((g1.gamma_length(&s).unwrap(), g1.gamma_length(&r).unwrap()), (9, 12));
    // The contracting direction ebar x^(2m) e -> x^m does shorten.
    let t = g1.parse_sequence(g1.base(), "1, ebar, x^6, e, 1").unwrap();
    assert_eq!(g1.gamma_length(&g1.reduce(&t).unwrap()).unwrap(), 3);
}
