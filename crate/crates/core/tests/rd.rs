use gogbench::algebra::GroupLike;
use gogbench::functions::SupportedFunction;
use gogbench::groups::{Group, GroupElement};
use gogbench::growth::Growth;
use gogbench::rd::{amenable_lower_bound, rd_ratio_curve, GStrategy};
use gogbench::Error;
use num_bigint::BigInt;
use num_rational::BigRational;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[test]
fn convolution_examples() {
    let f2 = Group::free_named(&["a", "b"]);
    let (a, b) = (f2.parse("a").unwrap(), f2.parse("b").unwrap());
    let mul = |x: &GroupElement, y: &GroupElement| f2.mul(x, y);
    let d = SupportedFunction::delta(0, a.clone()).convolve(&SupportedFunction::delta(0, b.clone()), mul).unwrap();
    assert_eq!(d, SupportedFunction::delta(0, f2.parse("a b").unwrap()));

    let ball: Vec<GroupElement> = f2.ball_enumerate(1).unwrap().ball(1).cloned().collect();
    let chi = SupportedFunction::indicator(0, ball.iter().cloned());
    assert_eq!(chi.convolve(&SupportedFunction::delta(0, f2.identity()), mul).unwrap(), chi);

    // (chi * chi)(1) counts pairs (m, m^-1) on the 5 x 5 grid.
    let sq = chi.convolve(&chi, mul).unwrap();
    let pairs = ball.iter().flat_map(|x| ball.iter().map(move |y| (x, y))).filter(|(x, y)| f2.mul(x, y) == f2.identity()).count();
    assert_eq!(pairs, 5);
    assert_eq!(sq.value(&f2.identity()), q(5));

    let other = SupportedFunction::<GroupElement>::zero(1);
    assert!(matches!(chi.convolve(&other, mul), Err(Error::ContextMismatch)));
}

#[test]
fn norm_examples() {
    let f2 = Group::free_named(&["a", "b"]);
    let (a, b) = (f2.parse("a").unwrap(), f2.parse("b").unwrap());
    let d = SupportedFunction::delta(0, a.clone());
    assert_eq!((d.l2_norm_sq(), d.l1_norm()), (q(1), q(1)));
    let table = f2.ball_enumerate(3).unwrap();
    let chi = SupportedFunction::indicator(0, table.ball(3).cloned());
    let n = table.ball_size(3) as i64;
    assert_eq!((chi.l2_norm_sq(), chi.l1_norm()), (q(n), q(n)));
    let f = SupportedFunction::from_integers(0, [(a, 2), (b, 3)]).unwrap();
    assert_eq!((f.l2_norm_sq(), f.l1_norm()), (q(13), q(5)));
    assert!(SupportedFunction::from_integers(0, [(f2.identity(), -1)]).is_err());
}

#[test]
fn free_group_ratio_curve() {
    let f2 = Group::free(2);
    // Folner sets need B(4r), so that strategy stops at r = 2.
    for (strategy, r_max) in [(GStrategy::RandomNonneg, 3), (GStrategy::SphereIndicator, 3), (GStrategy::FolnerIndicator, 2)] {
        let curve = rd_ratio_curve(&f2, r_max, strategy, 100, 3).unwrap();
        for p in &curve.points {
            assert!(p.ratio <= (p.r + 1) as f64, "{strategy:?} r = {}: {}", p.r, p.ratio);
            assert!(p.ratio >= 1.0);
        }
    }
}

#[test]
fn z2_sphere_curve_is_polynomial() {
    let z2 = Group::free_abelian(2);
    let curve = rd_ratio_curve(&z2, 12, GStrategy::SphereIndicator, 1, 0).unwrap();
    assert!(matches!(curve.classification, Some(Growth::Polynomial { .. })), "{:?}", curve.classification);
}

#[test]
fn bs12_folner_curve_is_exponential() {
    let bs = Group::baumslag_solitar(2).unwrap();
    let curve = rd_ratio_curve(&bs, 8, GStrategy::FolnerIndicator, 1, 0).unwrap();
    assert!(matches!(curve.classification, Some(Growth::AtLeastExponential { .. })));
}

#[test]
fn more_samples_never_lower_the_ratio() {
    let f2 = Group::free(2);
    let few = rd_ratio_curve(&f2, 3, GStrategy::RandomNonneg, 20, 11).unwrap();
    let many = rd_ratio_curve(&f2, 3, GStrategy::RandomNonneg, 200, 11).unwrap();
    for (a, b) in few.points.iter().zip(&many.points) {
        assert!(b.ratio_sq >= a.ratio_sq, "r = {}", a.r);
    }
}

#[test]
fn amenable_bound_examples() {
    let z = Group::free_abelian(1);
    let b = amenable_lower_bound(&z, 1, 400).unwrap();
    assert!(b.ratio < 3.0 && b.ratio > 2.99);
    let z2 = Group::free_abelian(2);
    let b = amenable_lower_bound(&z2, 2, 40).unwrap();
    assert_eq!(b.ball_size, 13);
    assert!(b.ratio >= 0.9 * 13.0);

    // At R = r the bound is ||chi * chi|| / ||chi||.
    let table = z2.ball_enumerate(3).unwrap();
    let chi = SupportedFunction::indicator(0, table.ball(3).cloned());
    let direct = chi.convolve(&chi, |a, b| z2.mul(a, b)).unwrap().l2_norm_sq() / chi.l2_norm_sq();
    assert_eq!(amenable_lower_bound(&z2, 3, 3).unwrap().ratio_sq, direct);

    // Nondecreasing in R.
    let mut last = q(0);
    for big_r in 1..=12 {
        let b = amenable_lower_bound(&z, 2, big_r).unwrap().ratio_sq;
        assert!(b >= last);
        last = b;
    }
    assert!(amenable_lower_bound(&Group::free(2), 1, 2).is_err());
}
