use proptest::prelude::*;

use sil_core::iteration::{deviation_bound, index_at, mean_index, PathGerm};
use sil_core::ledger::{betti, betti_alternating_sum};
use sil_core::models::{ellipsoid, EllipsoidSpec};
use sil_core::normal_form::{BasicBlock, NormalForm, Sign, UnitPoint};
use sil_core::real::rat;
use sil_core::ledger::resonance_residuals;
use sil_core::rotation::RotationNumber;

fn rotation() -> impl Strategy<Value = RotationNumber> {
    prop_oneof![
        (2u64..=50)
            .prop_flat_map(|q| (1..q, Just(q)))
            .prop_filter("not 1/2", |(p, q)| 2 * p != *q)
            .prop_map(|(p, q)| RotationNumber::rational(p, q).unwrap()),
        proptest::collection::vec(0u8..10, 30)
            .prop_filter("away from 0, 1/2, 1", |d| d[0] != 0 && d[0] != 9 && d[0] != 5)
            .prop_map(|d| {
                let s: String = d.iter().map(|x| char::from(b'0' + x)).collect();
                RotationNumber::irrational(&format!("0.{}", s), 30).unwrap()
            }),
    ]
}

fn block() -> impl Strategy<Value = BasicBlock> {
    prop_oneof![
        (prop_oneof![Just(1i8), Just(-1i8)], -1i8..=1).prop_map(|(l, b)| BasicBlock::n1(l, b).unwrap()),
        prop_oneof![Just(Sign::Plus), Just(Sign::Minus)].prop_map(|sign| BasicBlock::D { sign }),
        rotation().prop_map(|r| BasicBlock::r(r).unwrap()),
        (rotation(), any::<bool>()).prop_map(|(r, t)| BasicBlock::n2(r, t).unwrap()),
        (1u32..=2).prop_map(|h| BasicBlock::off_circle(h).unwrap()),
    ]
}

fn germ() -> impl Strategy<Value = PathGerm> {
    (proptest::collection::vec(block(), 1..=4), -10i64..=10)
        .prop_filter("n <= 5", |(b, _)| NormalForm::new(b.clone()).half_dim() <= 5)
        .prop_map(|(b, i)| PathGerm::new("g", i, NormalForm::new(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn anchor_and_parity(g in germ()) {
        prop_assert_eq!(index_at(&g, 1).unwrap(), g.initial_index);
        let it = g.iterates();
        for m in 1..=200u64 {
            prop_assert_eq!((it.index(m + 2).unwrap() - it.index(m).unwrap()).rem_euclid(2), 0);
        }
    }

    #[test]
    fn deviation_from_linear_growth(g in germ()) {
        let (low, high) = deviation_bound(&g);
        let mi = mean_index(&g);
        prop_assume!(mi.is_ok());
        let mi = mi.unwrap().to_f64();
        for m in 1..=100u64 {
            let d = index_at(&g, m).unwrap() as f64 - m as f64 * mi;
            prop_assert!(d >= -(low as f64) - 1e-6 && d < high as f64 + 1.0 + 1e-6, "m={} d={}", m, d);
        }
    }

    #[test]
    fn increments_are_bracketed(g in germ(), l in 1u64..50, m in 1u64..50) {
        let it = g.iterates();
        let step = it.index(m + l).unwrap() - it.index(l).unwrap();
        prop_assert!(it.min_increment(m).unwrap() <= step);
        prop_assert!(step <= it.max_increment(m).unwrap());
    }

    #[test]
    fn splitting_numbers_add_under_diamond_sum(
        a in proptest::collection::vec(block(), 1..=3),
        b in proptest::collection::vec(block(), 1..=3),
        w in rotation(),
    ) {
        let x = NormalForm::new(a);
        let y = NormalForm::new(b);
        let s = x.diamond_sum(&y);
        for p in [UnitPoint::One, UnitPoint::MinusOne, UnitPoint::angle(w)] {
            let (p1, m1) = x.splitting_pair(&p).unwrap();
            let (p2, m2) = y.splitting_pair(&p).unwrap();
            prop_assert_eq!(s.splitting_pair(&p).unwrap(), (p1 + p2, m1 + m2));
            prop_assert_eq!(s.circle_nullity(&p).unwrap(), x.circle_nullity(&p).unwrap() + y.circle_nullity(&p).unwrap());
        }
        prop_assert_eq!(s.half_dim(), x.half_dim() + y.half_dim());
    }

    #[test]
    fn betti_sums_in_closed_form(lo in -60i64..60, len in 0i64..120) {
        let hi = lo + len;
        let direct: i64 = (lo..=hi).map(|p| if p % 2 == 0 { betti(p) as i64 } else { -(betti(p) as i64) }).sum();
        prop_assert_eq!(betti_alternating_sum(lo, hi), direct);
    }

    #[test]
    fn random_ellipsoids_are_resonant(c in proptest::collection::btree_set(2u32..40, 1..=3)) {
        let mut axes = vec!["1".to_string()];
        let mut last = 1.0f64;
        for k in &c {
            let v = (*k as f64).sqrt();
            prop_assume!(v.fract() != 0.0 && v > last);
            last = v;
            axes.push(format!("sqrt({})", k));
        }
        let model = ellipsoid(&EllipsoidSpec::new(axes), 50);
        prop_assume!(model.is_ok());
        let r = resonance_residuals(&model.unwrap()).unwrap();
        prop_assert!(r.admissible(&rat(1, 1_000_000_000)));
    }
}
