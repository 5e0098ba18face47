mod common;

use common::{brute_partition, num_gcd, sorted_desc, QTheta};
use echkit::orbit::OrbitType;
use echkit::partitions::{
    check_claim, elliptic_cutoff, exceptional_multiplicities, is_exceptional, negative_partition, positive_partition,
};
use echkit::RealScalar;
use proptest::prelude::*;

fn qtheta() -> impl Strategy<Value = QTheta> {
    prop_oneof![
        (-30i64..=30, 1i64..=12).prop_map(|(p, q)| QTheta::rational(p, q)),
        (-8i64..=8, prop_oneof![-3i64..=-1, 1i64..=3], prop::sample::select(vec![2u64, 3, 5, 7, 11]), 1i64..=7)
            .prop_map(|(a, b, d, c)| QTheta { a, b, d, c }),
    ]
}

fn irrational() -> impl Strategy<Value = QTheta> {
    (-8i64..=8, prop_oneof![-3i64..=-1, 1i64..=3], prop::sample::select(vec![2u64, 3, 5, 7, 11]), 1i64..=7)
        .prop_map(|(a, b, d, c)| QTheta { a, b, d, c })
}

#[test]
fn worked_examples() {
    let th = RealScalar::parse("sqrt2-1").unwrap();
    assert_eq!(positive_partition(&th, 3).unwrap().0.parts, vec![3]);
    assert_eq!(negative_partition(&th, 3).unwrap().0.parts, vec![2, 1]);
    let collinear = RealScalar::parse("1/2").unwrap();
    // the hull edge from (0,0) to (4,2) passes through (2,1)
    assert_eq!(positive_partition(&collinear, 4).unwrap().0.parts, vec![2, 2]);
    let r = exceptional_multiplicities(&th, OrbitType::Elliptic).unwrap();
    assert_eq!(r.multiplicities, vec![1, 2, 3]);
}

#[test]
fn multiplicity_zero_rejected() {
    let th = RealScalar::parse("sqrt2").unwrap();
    assert!(positive_partition(&th, 0).is_err());
}

#[test]
fn hyperbolic_exceptional_sets() {
    let pos = exceptional_multiplicities(&RealScalar::integer(1), OrbitType::PositiveHyperbolic).unwrap();
    assert_eq!(pos.multiplicities, vec![1]);
    let neg = exceptional_multiplicities(&RealScalar::parse("1/2").unwrap(), OrbitType::NegativeHyperbolic).unwrap();
    assert_eq!(neg.multiplicities, vec![1, 2]);
}

#[test]
fn claim_certificate_for_sqrt2_minus_1() {
    let th = RealScalar::parse("sqrt2-1").unwrap();
    let c = check_claim(&th, 3).unwrap();
    assert!(c.holds);
    assert!(c.one_in_negative);
    assert_eq!(c.twice_area, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hull_matches_exhaustive_paths(t in qtheta(), m in 1u32..=18) {
        let s = t.scalar();
        let pp = positive_partition(&s, m).unwrap().0;
        let pn = negative_partition(&s, m).unwrap().0;
        prop_assert_eq!(pp.parts, brute_partition(&t, m, true));
        prop_assert_eq!(pn.parts, brute_partition(&t, m, false));
    }

    #[test]
    fn parts_sum_and_endpoints(t in qtheta(), m in 1u32..=60) {
        let s = t.scalar();
        let (pp, lp) = positive_partition(&s, m).unwrap();
        let (pn, ln) = negative_partition(&s, m).unwrap();
        prop_assert_eq!(pp.parts.iter().sum::<u32>(), m);
        prop_assert_eq!(pn.parts.iter().sum::<u32>(), m);
        prop_assert_eq!(*lp.vertices.last().unwrap(), (i64::from(m), t.floor_mul(i64::from(m))));
        prop_assert_eq!(*ln.vertices.last().unwrap(), (i64::from(m), t.ceil_mul(i64::from(m))));
        prop_assert!(lp.vertices.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn hull_slopes_monotone(t in qtheta(), m in 1u32..=60) {
        let s = t.scalar();
        let up = positive_partition(&s, m).unwrap().1.slopes();
        let down = negative_partition(&s, m).unwrap().1.slopes();
        prop_assert!(up.windows(2).all(|w| w[1].0 * w[0].1 <= w[0].0 * w[1].1));
        prop_assert!(down.windows(2).all(|w| w[1].0 * w[0].1 >= w[0].0 * w[1].1));
    }

    #[test]
    fn reflection_identity(t in qtheta(), m in 1u32..=60) {
        let s = t.scalar();
        let pn = negative_partition(&s, m).unwrap().0;
        let pr = positive_partition(&s.neg(), m).unwrap().0;
        prop_assert_eq!(pn.multiset(), pr.multiset());
    }

    #[test]
    fn single_part_is_coprime(t in irrational(), m in 1u32..=200) {
        let s = t.scalar();
        let m64 = i64::from(m);
        if positive_partition(&s, m).unwrap().0.parts == [m] {
            prop_assert_eq!(num_gcd(m64, t.floor_mul(m64)), 1);
        }
        if negative_partition(&s, m).unwrap().0.parts == [m] {
            prop_assert_eq!(num_gcd(m64, t.ceil_mul(m64)), 1);
        }
    }

    #[test]
    fn elliptic_parts_disjoint(t in irrational(), m in 2u32..=60) {
        let s = t.scalar();
        let pp = positive_partition(&s, m).unwrap().0;
        let pn = negative_partition(&s, m).unwrap().0;
        prop_assert!(pp.parts.iter().all(|x| !pn.contains(*x)), "{:?} {:?}", pp.parts, pn.parts);
    }

    #[test]
    fn exceptional_matches_overscan(t in irrational()) {
        let s = t.scalar();
        let r = exceptional_multiplicities(&s, OrbitType::Elliptic).unwrap();
        // the over-scan is quadratic in the cutoff
        prop_assume!(r.cutoff <= 60);
        prop_assert_eq!(r.cutoff, elliptic_cutoff(&s).unwrap());
        let scan: Vec<u32> = (1..=10 * r.cutoff).filter(|&m| is_exceptional(&s, m).unwrap()).collect();
        prop_assert_eq!(r.multiplicities, scan);
    }

    #[test]
    fn hyperbolic_closed_forms(k in -5i64..=5, m in 1u32..=50) {
        let ones = vec![1; m as usize];
        let mut twos = vec![2; (m / 2) as usize];
        if m % 2 == 1 {
            twos.push(1);
        }
        let pos = RealScalar::integer(k);
        let neg = RealScalar::ratio(2 * k + 1, 2).unwrap();
        prop_assert_eq!(positive_partition(&pos, m).unwrap().0.multiset(), ones.clone());
        prop_assert_eq!(negative_partition(&pos, m).unwrap().0.multiset(), ones);
        prop_assert_eq!(sorted_desc(positive_partition(&neg, m).unwrap().0.parts), twos.clone());
        prop_assert_eq!(sorted_desc(negative_partition(&neg, m).unwrap().0.parts), twos);
    }
}
