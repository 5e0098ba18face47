mod common;

use std::collections::BTreeMap;

use common::{cz_oracle, QTheta};
use echkit::ellipsoid::EllipsoidModel;
use echkit::index::{
    abs_indices, ambiguity_shift, cz_index, cz_prefix_sum, ech_index, fredholm_index, i_minus_j0, j0_index,
    verify_delta1, RelativeClassData,
};
use echkit::orbit::{i2_grading, OrbitSet};
use echkit::{EchError, RealScalar};
use proptest::prelude::*;

const IDS: [&str; 3] = ["a", "b", "c"];

fn qtheta() -> impl Strategy<Value = QTheta> {
    prop_oneof![
        (-12i64..=12, 1i64..=6).prop_map(|(p, q)| QTheta::rational(p, q)),
        (-5i64..=5, prop_oneof![-2i64..=-1, 1i64..=2], prop::sample::select(vec![2u64, 3, 5]), 1i64..=4)
            .prop_map(|(a, b, d, c)| QTheta { a, b, d, c }),
    ]
}

fn orbit_set(ms: &[u32]) -> OrbitSet {
    let pairs: Vec<(&str, u32)> = IDS.iter().copied().zip(ms.iter().copied()).filter(|p| p.1 > 0).collect();
    OrbitSet::of(&pairs)
}

#[derive(Debug, Clone)]
struct Case {
    thetas: Vec<QTheta>,
    alpha: Vec<u32>,
    beta: Vec<u32>,
    c_tau: i64,
    q_tau: i64,
}

impl Case {
    fn data(&self) -> RelativeClassData {
        RelativeClassData {
            alpha: orbit_set(&self.alpha),
            beta: orbit_set(&self.beta),
            c_tau: self.c_tau,
            q_tau: self.q_tau,
            thetas: IDS.iter().map(|s| s.to_string()).zip(self.thetas.iter().map(QTheta::scalar)).collect(),
        }
    }

    /// `(I, J0)` summed by hand from the oracle floors.
    fn oracle(&self) -> (i64, i64) {
        let side = |ms: &[u32], drop: u32| -> i64 {
            ms.iter()
                .zip(&self.thetas)
                .map(|(&m, t)| (1..=i64::from(m.saturating_sub(drop))).map(|k| cz_oracle(t, k)).sum::<i64>())
                .sum()
        };
        let i = self.c_tau + self.q_tau + side(&self.alpha, 0) - side(&self.beta, 0);
        let j = -self.c_tau + self.q_tau + side(&self.alpha, 1) - side(&self.beta, 1);
        (i, j)
    }
}

fn case() -> impl Strategy<Value = Case> {
    (
        prop::collection::vec(qtheta(), 3),
        prop::collection::vec(0u32..6, 3),
        prop::collection::vec(0u32..6, 3),
        -10i64..=10,
        -10i64..=10,
    )
        .prop_map(|(thetas, alpha, beta, c_tau, q_tau)| Case { thetas, alpha, beta, c_tau, q_tau })
}

#[test]
fn cz_examples() {
    let th = RealScalar::parse("sqrt2-1").unwrap();
    assert_eq!(cz_index(&th, 1).unwrap(), 1);
    assert_eq!(cz_index(&th, 3).unwrap(), 3);
    assert_eq!(cz_index(&RealScalar::integer(1), 2).unwrap(), 4);
    assert_eq!(cz_prefix_sum(&th, 3).unwrap(), 1 + 1 + 3);
}

#[test]
fn trivial_cylinder_has_index_zero() {
    assert_eq!(fredholm_index(0, 0, &[3], &[3]), 0);
}

#[test]
fn ambiguity_shift_formula() {
    assert_eq!(ambiguity_shift(1, 0), (1, -1));
    assert_eq!(ambiguity_shift(0, 1), (2, 2));
}

#[test]
fn missing_rotation_number_is_reported() {
    let d = RelativeClassData {
        alpha: OrbitSet::of(&[("x", 1)]),
        beta: OrbitSet::empty(),
        c_tau: 0,
        q_tau: 0,
        thetas: BTreeMap::new(),
    };
    assert!(matches!(ech_index(&d), Err(EchError::InvalidInput(_))));
}

#[test]
fn ellipsoid_delta1_has_no_violation() {
    let e = EllipsoidModel::new(RealScalar::integer(1), RealScalar::parse("sqrt2").unwrap()).unwrap();
    let r = verify_delta1(&e.chern_model().unwrap(), &RealScalar::integer(20)).unwrap();
    assert!(r.checked > 100);
    assert!(r.violations.is_empty());
}

#[test]
fn ellipsoid_parity() {
    let e = EllipsoidModel::new(RealScalar::integer(1), RealScalar::parse("e-1").unwrap()).unwrap();
    let table = e.orbit_table().unwrap();
    let model = e.chern_model().unwrap();
    for m in 0..12u32 {
        for n in 0..12u32 {
            let pairs: Vec<(&str, u32)> = [("g1", m), ("g2", n)].into_iter().filter(|p| p.1 > 0).collect();
            let s = OrbitSet::of(&pairs);
            let (i, _) = abs_indices(&s, &model).unwrap();
            assert_eq!(i.rem_euclid(2), 0);
            assert_eq!(i2_grading(&s, &table).unwrap(), 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn indices_match_hand_sums(c in case()) {
        let d = c.data();
        let (i, j) = c.oracle();
        prop_assert_eq!(ech_index(&d).unwrap(), i);
        prop_assert_eq!(j0_index(&d).unwrap(), j);
    }

    #[test]
    fn i_minus_j0_identity(c in case()) {
        let d = c.data();
        let mut expect = 2 * c.c_tau;
        for (m, t) in c.alpha.iter().zip(&c.thetas) {
            if *m > 0 {
                expect += cz_oracle(t, i64::from(*m));
            }
        }
        for (m, t) in c.beta.iter().zip(&c.thetas) {
            if *m > 0 {
                expect -= cz_oracle(t, i64::from(*m));
            }
        }
        prop_assert_eq!(i_minus_j0(&d).unwrap(), expect);
        prop_assert_eq!(ech_index(&d).unwrap() - j0_index(&d).unwrap(), expect);
    }

    #[test]
    fn composition_is_additive(a in case(), b in case()) {
        let first = a.data();
        let mut second = b.data();
        second.alpha = first.beta.clone();
        second.thetas = first.thetas.clone();
        let glued = first.compose(&second).unwrap();
        prop_assert_eq!(ech_index(&glued).unwrap(), ech_index(&first).unwrap() + ech_index(&second).unwrap());
        prop_assert_eq!(j0_index(&glued).unwrap(), j0_index(&first).unwrap() + j0_index(&second).unwrap());
    }

    #[test]
    fn cz_parity(t in qtheta(), k in 1u32..60) {
        let cz = cz_index(&t.scalar(), k).unwrap();
        prop_assert_eq!(cz, cz_oracle(&t, i64::from(k)));
        prop_assert_eq!(cz.rem_euclid(2) == 0, t.is_integer_mul(i64::from(k)));
    }

    #[test]
    fn abs_indices_additive(ms in prop::collection::vec(0u32..10, 6)) {
        let e = EllipsoidModel::new(RealScalar::integer(1), RealScalar::parse("sqrt2").unwrap()).unwrap();
        let model = e.chern_model().unwrap();
        let set = |m: u32, n: u32| {
            let pairs: Vec<(&str, u32)> = [("g1", m), ("g2", n)].into_iter().filter(|p| p.1 > 0).collect();
            OrbitSet::of(&pairs)
        };
        let (ia, ja) = abs_indices(&set(ms[0], ms[1]), &model).unwrap();
        let (ib, jb) = abs_indices(&set(ms[2], ms[3]), &model).unwrap();
        let (id, jd) = abs_indices(&set(ms[4], ms[5]), &model).unwrap();
        prop_assert_eq!(ia - id, (ia - ib) + (ib - id));
        prop_assert_eq!(ja - jd, (ja - jb) + (jb - jd));
        // c_τ is linear in the multiplicities
        let c = |m: u32, n: u32| model.c_tau(&set(m, n)).unwrap();
        prop_assert_eq!(c(ms[0] + ms[2], ms[1] + ms[3]), c(ms[0], ms[1]) + c(ms[2], ms[3]));
    }
}
