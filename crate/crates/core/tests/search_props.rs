mod common;

use common::{brute_partition, QTheta};
use echkit::curves::Side;
use echkit::homology::HomologyGroup;
use echkit::search::{
    epsilon_threshold, find_special, generator_table, nontorsion_analysis, required_action_bound, validate_sequence,
    CaseTwoGenerator, GapCondition, GeneratorParams, KernelBranch, SearchOutcome, SequenceCase, UCurveSequence,
};
use echkit::{EchError, RealScalar};

fn sc(s: &str) -> RealScalar {
    RealScalar::parse(s).unwrap()
}

/// Actions and rotation numbers of the generator's orbits, as plain numbers.
fn plain_table(n: usize) -> Vec<(f64, QTheta)> {
    let all = [
        (1.0, QTheta { a: 0, b: 1, d: 2, c: 2 }),
        (2f64.sqrt(), QTheta { a: 0, b: 1, d: 2, c: 1 }),
        (3f64.sqrt(), QTheta { a: -1, b: 1, d: 3, c: 1 }),
    ];
    all[..n].to_vec()
}

/// Exceptional multiplicities from the exhaustive path search.
fn exceptional_oracle(t: &QTheta) -> Vec<u32> {
    (1..=20)
        .filter(|&m| brute_partition(t, m, true).len() + brute_partition(t, m, false).len() <= 3)
        .collect()
}

fn vectors(actions: &[f64], bound: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    for &a in actions {
        let mut next = Vec::new();
        for &s in &out {
            let mut k = 0.0;
            while s + k * a <= bound + 1e-9 {
                next.push(s + k * a);
                k += 1.0;
            }
        }
        out = next;
    }
    out
}

/// Half the smallest nonzero gap between an all-exceptional set and any set
/// with action up to `bound`, or the smallest action if that is smaller.
fn epsilon_oracle(n: usize, bound: f64) -> f64 {
    let table = plain_table(n);
    let actions: Vec<f64> = table.iter().map(|t| t.0).collect();
    let mut xs = vec![0.0];
    for (a, th) in &table {
        let exc = exceptional_oracle(th);
        xs = xs
            .iter()
            .flat_map(|&s| std::iter::once(s).chain(exc.iter().map(move |&m| s + f64::from(m) * a)))
            .collect();
    }
    let ys = vectors(&actions, bound);
    let mut best = actions.iter().copied().fold(f64::INFINITY, f64::min);
    for x in &xs {
        for y in &ys {
            let g = (x - y).abs();
            if g > 1e-9 {
                best = best.min(g);
            }
        }
    }
    best / 2.0
}

#[test]
fn epsilon_matches_independent_scan_at_twice_the_bound() {
    for (n, approx) in [(2, 0.0857864), (3, 0.0122898)] {
        let table = generator_table(n).unwrap();
        let cert = epsilon_threshold(&table, None).unwrap();
        let eps = cert.epsilon.to_f64();
        assert!((eps - approx).abs() < 1e-6, "n = {n}: {eps}");
        let oracle = epsilon_oracle(n, 2.0 * cert.action_bound.to_f64());
        assert!((eps - oracle).abs() < 1e-12, "n = {n}: {eps} vs {oracle}");
        for (id, (_, th)) in table.ids().iter().zip(plain_table(n)) {
            assert_eq!(cert.exceptional[id], exceptional_oracle(&th), "{id}");
        }
        let w = cert.binding().unwrap();
        assert_eq!(w.condition, GapCondition::AllExceptional);
        assert!((w.gap.to_f64() - 2.0 * eps).abs() < 1e-12);
    }
}

#[test]
fn explicit_bound_must_cover_exceptional_sets() {
    let table = generator_table(2).unwrap();
    let need = required_action_bound(&table).unwrap();
    let small = need.sub(&sc("1/10"));
    assert!(matches!(epsilon_threshold(&table, Some(&small)), Err(EchError::Precondition(_))));
    let big = need.add(&sc("3"));
    let a = epsilon_threshold(&table, None).unwrap();
    let b = epsilon_threshold(&table, Some(&big)).unwrap();
    assert_eq!(a.epsilon, b.epsilon);
}

#[test]
fn single_orbit_generator_is_refused() {
    assert!(generator_table(1).is_err());
    assert!(CaseTwoGenerator::new(GeneratorParams::new(0, 1)).is_err());
}

fn check_instance(g: &CaseTwoGenerator, seq: &UCurveSequence) {
    let n = g.table.len();
    assert_eq!(seq.curves.len(), 2 * n + 1);
    let gaps = validate_sequence(seq, &g.epsilon, &g.table).unwrap();
    let eps = g.epsilon.epsilon.to_f64();
    assert!(gaps.iter().all(|x| x.to_f64() > 0.0 && x.to_f64() < eps));
    // first curve whose trivial cylinders meet an end of its own component
    let expect = seq.curves.iter().position(|c| {
        let u = &c.ucurve;
        u.nontrivial
            .positive_ends
            .iter()
            .chain(&u.nontrivial.negative_ends)
            .any(|e| u.trivial_cylinders.multiplicity(&e.orbit) > 0)
    });
    match find_special(seq, &g.epsilon, &g.table).unwrap() {
        SearchOutcome::Found { index, case, shared, verdict, trace } => {
            assert_eq!(Some(index - 1), expect);
            assert_eq!(case, SequenceCase::Two);
            assert!(!shared.is_empty());
            for (side, orbit) in &shared {
                let u = &seq.curves[index - 1].ucurve;
                assert!(u.nontrivial.ends(*side).iter().any(|e| &e.orbit == orbit));
                assert!(u.trivial_cylinders.multiplicity(orbit) > 0);
            }
            assert!(verdict.special, "{:?}", verdict.failed());
            assert!(trace.is_monotone());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn generated_instances_have_a_special_curve() {
    for n in [2, 3] {
        let g = CaseTwoGenerator::new(GeneratorParams::new(11, n)).unwrap();
        for seq in g.instances(15).unwrap() {
            check_instance(&g, &seq);
        }
    }
}

#[test]
fn generator_is_deterministic() {
    let a = CaseTwoGenerator::new(GeneratorParams::new(5, 2)).unwrap().instances(3).unwrap();
    let b = CaseTwoGenerator::new(GeneratorParams::new(5, 2)).unwrap().instances(3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn outcomes_round_trip_through_json() {
    let g = CaseTwoGenerator::new(GeneratorParams::new(3, 3)).unwrap();
    for seq in g.instances(3).unwrap() {
        let text = serde_json::to_string(&seq).unwrap();
        let back: UCurveSequence = serde_json::from_str(&text).unwrap();
        assert_eq!(back, seq);
        let out = find_special(&seq, &g.epsilon, &g.table).unwrap();
        let again: SearchOutcome = serde_json::from_str(&serde_json::to_string(&out).unwrap()).unwrap();
        assert_eq!(again, out);
        assert_eq!(find_special(&back, &g.epsilon, &g.table).unwrap(), out);
    }
}

#[test]
fn malformed_sequences_name_the_failed_hypothesis() {
    let g = CaseTwoGenerator::new(GeneratorParams::new(1, 2)).unwrap();
    let seq = g.instances(1).unwrap().remove(0);
    let fails = |s: &UCurveSequence, name: &str| match validate_sequence(s, &g.epsilon, &g.table) {
        Err(EchError::Precondition(msg)) => assert!(msg.contains(name), "{msg}"),
        other => panic!("expected `{name}`: {other:?}"),
    };

    let mut short = seq.clone();
    short.curves.pop();
    fails(&short, "shape");
    short.generators.pop();
    fails(&short, "length");

    let mut wrong_j0 = seq.clone();
    wrong_j0.curves[0].j0 = 1;
    fails(&wrong_j0, "j0");

    let mut case_one = seq.clone();
    case_one.case = SequenceCase::One;
    fails(&case_one, "case_one");

    let mut swapped = seq.clone();
    swapped.generators.swap(0, 1);
    fails(&swapped, "endpoints");
}

#[test]
fn sharing_is_reported_by_side() {
    let g = CaseTwoGenerator::new(GeneratorParams::new(2, 2)).unwrap();
    let seq = g.instances(1).unwrap().remove(0);
    if let SearchOutcome::Found { index, shared, .. } = find_special(&seq, &g.epsilon, &g.table).unwrap() {
        let u = &seq.curves[index - 1].ucurve;
        let sides: Vec<Side> = shared.iter().map(|s| s.0).collect();
        assert!(sides.iter().all(|s| u.shares(*s)));
    }
}

#[test]
fn rank_one_kernel_grows_by_one_plus_root_two() {
    let g = HomologyGroup::free(1);
    let actions = [sc("1"), sc("sqrt2")];
    let r = nontorsion_analysis(&g, &[vec![1], vec![-1]], &[1], &actions, &sc("20"), 10).unwrap();
    assert_eq!(r.branch, KernelBranch::RankOne);
    assert_eq!(r.generator, Some(vec![1, 1]));
    assert_eq!(r.increment, Some(sc("1+sqrt2")));
    assert!(r.linear_growth && r.contradiction);
    assert_eq!(r.sequence.len(), 10);
    let step = 1.0 + 2f64.sqrt();
    for w in r.sequence.windows(2) {
        assert!((w[1].action.to_f64() - w[0].action.to_f64() - step).abs() < 1e-12);
    }
    for e in &r.sequence {
        let m = &e.multiplicities;
        assert_eq!(i64::from(m[0]) - i64::from(m[1]), 1);
        assert!((e.action.to_f64() - (f64::from(m[0]) + f64::from(m[1]) * 2f64.sqrt())).abs() < 1e-12);
    }
    assert_eq!(r.sequence[0].multiplicities, vec![1, 0]);
}

#[test]
fn mixed_sign_kernel_bounds_the_class() {
    let g = HomologyGroup::free(1);
    let r = nontorsion_analysis(&g, &[vec![1], vec![1]], &[3], &[sc("1"), sc("sqrt2")], &sc("20"), 4).unwrap();
    assert_eq!(r.branch, KernelBranch::RankOne);
    assert_eq!(r.sign_pattern_ok, Some(false));
    assert!(r.contradiction);
    // m1 + m2 = 3 has four solutions, all below the bound
    assert_eq!(r.sets_in_gamma, 4);
}

#[test]
fn rank_zero_and_rank_two_branches() {
    let free = HomologyGroup::free(2);
    let r = nontorsion_analysis(&free, &[vec![1, 0], vec![0, 1]], &[1, 1], &[sc("1"), sc("sqrt2")], &sc("15"), 3)
        .unwrap();
    assert_eq!(r.branch, KernelBranch::RankZero);
    assert_eq!(r.max_sets_per_class, 1);
    assert!(r.contradiction);

    let g = HomologyGroup::new(2, vec![vec![2, 0]]).unwrap();
    let r = nontorsion_analysis(&g, &[vec![1, 0], vec![0, 0]], &[0, 1], &[sc("1"), sc("sqrt2")], &sc("15"), 3)
        .unwrap();
    assert_eq!(r.branch, KernelBranch::RankTwo);
    assert!(!r.gamma_torsion);
    assert_eq!(r.sets_in_gamma, 0);
    assert!(r.contradiction);
}

#[test]
fn nontorsion_dimension_checks() {
    let g = HomologyGroup::free(1);
    let a = [sc("1"), sc("sqrt2")];
    assert!(matches!(
        nontorsion_analysis(&g, &[vec![1]], &[0], &a[..1], &sc("5"), 2),
        Err(EchError::DimensionMismatch(_))
    ));
    assert!(matches!(
        nontorsion_analysis(&g, &[vec![1], vec![1]], &[0, 0], &a, &sc("5"), 2),
        Err(EchError::DimensionMismatch(_))
    ));
}
