//! Small-size versions of the property suites, runnable from the CLI.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{
    check_partition_conditions, classify_ucurve, cz_lists, curve_fredholm_index, h_plus, j0_from_topology,
    psi_zero_count, Classification, CurveTopology, End, UCurveData, WindingData,
};
use crate::dynamics::{find_periodic_points, Domain, MapKind, SurfaceMap};
use crate::ellipsoid::{volume_asymptotics, EllipsoidModel};
use crate::error::{EchError, Result};
use crate::homology::{smith_normal_form, HomologyGroup};
use crate::index::{abs_indices, cz_index, ech_index, i_minus_j0, j0_index, verify_delta1, RelativeClassData};
use crate::orbit::{action, cover_type, enumerate_orbit_sets, i2_grading, OrbitSet, OrbitTable, OrbitType, ReebOrbitSpec};
use crate::partitions::{
    exceptional_multiplicities, is_exceptional, negative_partition, positive_partition, relprime_check,
};
use crate::scalar::RealScalar;
use crate::search::{epsilon_threshold, find_special, CaseTwoGenerator, GeneratorParams, KernelBranch};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

type Outcome = Result<(bool, String)>;

fn sc(s: &str) -> RealScalar {
    RealScalar::parse(s).expect("literal scalar")
}

fn thetas() -> Vec<RealScalar> {
    ["sqrt2-1", "sqrt2", "1/sqrt2", "sqrt3-1", "-sqrt5", "golden", "pi", "7/3", "-5/8"]
        .iter()
        .map(|s| sc(s))
        .collect()
}

fn irrational_thetas() -> Vec<RealScalar> {
    thetas().into_iter().filter(|t| t.is_known_irrational()).collect()
}

/// Orbit set from pairs, dropping zero multiplicities.
fn os(pairs: &[(&str, u32)]) -> OrbitSet {
    let kept: Vec<(&str, u32)> = pairs.iter().copied().filter(|p| p.1 > 0).collect();
    OrbitSet::of(&kept)
}

fn ellipsoid() -> EllipsoidModel {
    EllipsoidModel::new(sc("1"), sc("sqrt2")).expect("valid ellipsoid")
}

// core

fn action_additive(rng: &mut ChaCha8Rng) -> Outcome {
    let table = ellipsoid().orbit_table()?;
    for _ in 0..50 {
        let a = os(&[("g1", rng.gen_range(0..6)), ("g2", rng.gen_range(0..6))]);
        let b = os(&[("g1", rng.gen_range(0..6)), ("g2", rng.gen_range(0..6))]);
        let lhs = action(&a.union(&b), &table)?;
        let rhs = action(&a, &table)?.add(&action(&b, &table)?);
        if lhs != rhs {
            return Ok((false, format!("{a} ∪ {b}")));
        }
    }
    Ok((true, "50 random pairs".into()))
}

fn enumeration_count() -> Outcome {
    let table = ellipsoid().orbit_table()?;
    let bound = sc("12");
    let listed = enumerate_orbit_sets(&table, &bound, None, false)?.len();
    let mut scanned = 0;
    for m in 0..=12u32 {
        for n in 0..=12u32 {
            if (f64::from(m) + f64::from(n) * 2f64.sqrt()) < 12.0 {
                scanned += 1;
            }
        }
    }
    Ok((listed == scanned, format!("{listed} listed, {scanned} scanned")))
}

/// Rank of integer rows by fraction-free elimination.
fn rational_rank(rows: &[Vec<i128>]) -> usize {
    let mut m = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let (a, b) = (m[rank][c], m[r][c]);
                for k in 0..cols {
                    m[r][k] = m[r][k] * a - m[rank][k] * b;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn kernel_and_snf(rng: &mut ChaCha8Rng) -> Outcome {
    for _ in 0..40 {
        let n = rng.gen_range(2..=3);
        let g = HomologyGroup::free(2);
        let classes: Vec<Vec<i64>> = (0..n).map(|_| vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)]).collect();
        let k = g.kernel(&classes)?;
        let rows: Vec<Vec<i128>> = classes.iter().map(|c| c.iter().map(|&x| i128::from(x)).collect()).collect();
        if k.rank != n - rational_rank(&rows) {
            return Ok((false, format!("kernel rank {} for {classes:?}", k.rank)));
        }
        let snf = smith_normal_form(&rows);
        let d: Vec<i128> = snf.diagonal.iter().copied().filter(|&x| x != 0).collect();
        if d.windows(2).any(|w| w[1] % w[0] != 0) {
            return Ok((false, format!("divisibility fails: {:?}", snf.diagonal)));
        }
    }
    Ok((true, "40 random presentations".into()))
}

fn cover_multiplicative() -> Outcome {
    for base in [OrbitType::Elliptic, OrbitType::PositiveHyperbolic, OrbitType::NegativeHyperbolic] {
        for j in 1..=6 {
            for k in 1..=6 {
                if cover_type(cover_type(base, j), k) != cover_type(base, j * k) {
                    return Ok((false, format!("{base:?} j={j} k={k}")));
                }
            }
        }
    }
    Ok((true, "j, k ≤ 6".into()))
}

// partitions

fn sums_and_endpoints() -> Outcome {
    for th in thetas() {
        for m in 1..=20 {
            let (pp, lp) = positive_partition(&th, m)?;
            let (pn, ln) = negative_partition(&th, m)?;
            let mt = th.mul_int(i64::from(m));
            let ok = pp.parts.iter().sum::<u32>() == m
                && pn.parts.iter().sum::<u32>() == m
                && lp.vertices.last() == Some(&(i64::from(m), mt.floor_i64()?))
                && ln.vertices.last() == Some(&(i64::from(m), mt.ceil_i64()?));
            if !ok {
                return Ok((false, format!("θ={th} m={m}")));
            }
        }
    }
    Ok((true, "m ≤ 20".into()))
}

fn slope_monotone() -> Outcome {
    // dy1/dx1 ≥ dy2/dx2 with positive dx
    let non_increasing = |s: &[(i64, i64)]| s.windows(2).all(|w| w[0].0 * w[1].1 >= w[1].0 * w[0].1);
    let non_decreasing = |s: &[(i64, i64)]| s.windows(2).all(|w| w[0].0 * w[1].1 <= w[1].0 * w[0].1);
    for th in thetas() {
        for m in 1..=20 {
            let (_, lp) = positive_partition(&th, m)?;
            let (_, ln) = negative_partition(&th, m)?;
            if !non_increasing(&lp.slopes()) || !non_decreasing(&ln.slopes()) {
                return Ok((false, format!("θ={th} m={m}")));
            }
        }
    }
    Ok((true, "m ≤ 20".into()))
}

fn reflection_identity() -> Outcome {
    for th in thetas() {
        for m in 1..=30 {
            let (pn, _) = negative_partition(&th, m)?;
            let (pr, _) = positive_partition(&th.neg(), m)?;
            if pn.multiset() != pr.multiset() {
                return Ok((false, format!("θ={th} m={m}")));
            }
        }
    }
    Ok((true, "m ≤ 30".into()))
}

fn hyperbolic_closed_forms() -> Outcome {
    for k in -3..=3i64 {
        let pos = RealScalar::integer(k);
        let neg = sc(&format!("{}/2", 2 * k + 1));
        for m in 1..=30u32 {
            let ones = vec![1; m as usize];
            let mut twos = vec![2; (m / 2) as usize];
            if m % 2 == 1 {
                twos.push(1);
            }
            let ok = positive_partition(&pos, m)?.0.multiset() == ones
                && negative_partition(&pos, m)?.0.multiset() == ones
                && positive_partition(&neg, m)?.0.multiset() == twos
                && negative_partition(&neg, m)?.0.multiset() == twos;
            if !ok {
                return Ok((false, format!("k={k} m={m}")));
            }
        }
    }
    Ok((true, "m ≤ 30".into()))
}

fn relprime() -> Outcome {
    for th in irrational_thetas() {
        for m in 1..=60 {
            if relprime_check(&th, m)? == Some(false) {
                return Ok((false, format!("θ={th} m={m}")));
            }
        }
    }
    Ok((true, "m ≤ 60".into()))
}

fn disjoint_parts() -> Outcome {
    for th in irrational_thetas() {
        for m in 2..=40 {
            let (pp, _) = positive_partition(&th, m)?;
            let (pn, _) = negative_partition(&th, m)?;
            if pp.parts.iter().any(|x| pn.contains(*x)) {
                return Ok((false, format!("θ={th} m={m}")));
            }
        }
    }
    Ok((true, "2 ≤ m ≤ 40".into()))
}

fn exceptional_overscan() -> Outcome {
    for th in irrational_thetas() {
        let r = exceptional_multiplicities(&th, OrbitType::Elliptic)?;
        let mut scan = Vec::new();
        for m in 1..=10 * r.cutoff {
            if is_exceptional(&th, m)? {
                scan.push(m);
            }
        }
        if scan != r.multiplicities {
            return Ok((false, format!("θ={th}: {:?} vs {scan:?}", r.multiplicities)));
        }
    }
    Ok((true, "10× cutoff".into()))
}

// index

fn random_relative(rng: &mut ChaCha8Rng, th: &[RealScalar]) -> RelativeClassData {
    let ids = ["x", "y"];
    let side = |rng: &mut ChaCha8Rng| {
        let pairs: Vec<(&str, u32)> = ids.iter().map(|&id| (id, rng.gen_range(0..5))).collect();
        os(&pairs)
    };
    RelativeClassData {
        alpha: side(rng),
        beta: side(rng),
        c_tau: rng.gen_range(-6..=6),
        q_tau: rng.gen_range(-6..=6),
        thetas: ids.iter().map(|s| s.to_string()).zip(th.iter().cloned()).collect(),
    }
}

fn i_minus_j0_identity(rng: &mut ChaCha8Rng) -> Outcome {
    let pool = thetas();
    for _ in 0..300 {
        let th = [pool[rng.gen_range(0..pool.len())].clone(), pool[rng.gen_range(0..pool.len())].clone()];
        let d = random_relative(rng, &th);
        let mut expect = 2 * d.c_tau;
        for (id, m) in d.alpha.iter() {
            expect += cz_index(&d.thetas[id], m)?;
        }
        for (id, m) in d.beta.iter() {
            expect -= cz_index(&d.thetas[id], m)?;
        }
        if ech_index(&d)? - j0_index(&d)? != expect || i_minus_j0(&d)? != expect {
            return Ok((false, format!("{d:?}")));
        }
    }
    Ok((true, "300 fuzzed classes".into()))
}

fn additivity(rng: &mut ChaCha8Rng) -> Outcome {
    let model = ellipsoid().chern_model()?;
    let mut set = || os(&[("g1", rng.gen_range(0..8)), ("g2", rng.gen_range(0..8))]);
    for _ in 0..100 {
        let (a, b, d) = (set(), set(), set());
        let (ia, ja) = abs_indices(&a, &model)?;
        let (ib, jb) = abs_indices(&b, &model)?;
        let (id, jd) = abs_indices(&d, &model)?;
        if ia - id != (ia - ib) + (ib - id) || ja - jd != (ja - jb) + (jb - jd) {
            return Ok((false, format!("{a} {b} {d}")));
        }
    }
    Ok((true, "100 triples on the ellipsoid".into()))
}

fn cz_parity() -> Outcome {
    for th in thetas().into_iter().chain([sc("2"), sc("-1"), sc("1/2")]) {
        for k in 1..=30 {
            let odd = cz_index(&th, k)?.rem_euclid(2) == 1;
            let integral = th.mul_int(i64::from(k)).is_integer()?;
            if odd == integral {
                return Ok((false, format!("θ={th} k={k}")));
            }
        }
    }
    Ok((true, "k ≤ 30".into()))
}

fn ellipsoid_parity() -> Outcome {
    let e = ellipsoid();
    let table = e.orbit_table()?;
    for entry in e.spectrum(200)? {
        let s = os(&[("g1", entry.m), ("g2", entry.n)]);
        if entry.grading % 2 != 0 || i2_grading(&s, &table)? != 0 {
            return Ok((false, format!("{s}")));
        }
    }
    Ok((true, "200 generators".into()))
}

fn delta1() -> Outcome {
    let r = verify_delta1(&ellipsoid().chern_model()?, &sc("10"))?;
    Ok((r.violations.is_empty(), format!("{} sets checked", r.checked)))
}

// curves

fn small_topologies(orbit_ids: &[&str], max_genus: u32, max_ends: usize, max_mult: u32) -> Vec<CurveTopology> {
    let mut ends = Vec::new();
    for id in orbit_ids {
        for m in 1..=max_mult {
            ends.push(End::new(id, m));
        }
    }
    let mut sides: Vec<Vec<End>> = vec![vec![]];
    let mut frontier: Vec<(Vec<End>, usize)> = vec![(vec![], 0)];
    while let Some((cur, start)) = frontier.pop() {
        if cur.len() == max_ends {
            continue;
        }
        for i in start..ends.len() {
            let mut next = cur.clone();
            next.push(ends[i].clone());
            sides.push(next.clone());
            frontier.push((next, i));
        }
    }
    let mut out = Vec::new();
    for g in 0..=max_genus {
        for p in &sides {
            for n in &sides {
                if !p.is_empty() && p.len() + n.len() <= max_ends {
                    out.push(CurveTopology::new(g, p.clone(), n.clone()));
                }
            }
        }
    }
    out
}

fn classifier_consistency() -> Outcome {
    let mut checked = 0;
    for c in small_topologies(&["x", "y"], 1, 3, 2) {
        if c.negative_ends.is_empty() {
            continue;
        }
        for trivial in [OrbitSet::empty(), OrbitSet::of(&[("x", 1)]), OrbitSet::of(&[("y", 2)])] {
            let u = UCurveData::new(c.clone(), trivial);
            let j = j0_from_topology(&u);
            checked += 1;
            if let Classification::Contradiction { clause, detail } = classify_ucurve(&u, j)? {
                return Ok((false, format!("{clause}: {detail}")));
            }
        }
    }
    Ok((true, format!("{checked} U-curves")))
}

fn two_orbit_table() -> Result<OrbitTable> {
    OrbitTable::new([
        ReebOrbitSpec::elliptic("x", sc("1"), sc("sqrt2-1"))?,
        ReebOrbitSpec::new("y", sc("sqrt2"), sc("1"), OrbitType::PositiveHyperbolic)?,
    ])
}

fn zero_count_extremal() -> Outcome {
    let table = two_orbit_table()?;
    let mut hits = 0;
    for c in small_topologies(&["x", "y"], 1, 3, 2) {
        let w = WindingData::extremal(&c, &table)?;
        for c_tau in -4..=4 {
            let z = psi_zero_count(&c, c_tau, &w, &table)?;
            if z.twice_normal_chern == 0 {
                hits += 1;
                if z.count != 0 {
                    return Ok((false, format!("{c:?} c_τ={c_tau}")));
                }
            }
        }
    }
    Ok((hits > 0, format!("{hits} topologies with c_N = 0")))
}

fn fredholm_parity() -> Outcome {
    let table = two_orbit_table()?;
    for c in small_topologies(&["x", "y"], 1, 3, 3) {
        let ind = curve_fredholm_index(&c, 0, &table)?;
        let p = c.num_ends() as i64;
        let h = i64::from(h_plus(&c, &table)?);
        let (czp, czn) = cz_lists(&c, &table)?;
        let odd = czp.iter().chain(&czn).filter(|x| x.rem_euclid(2) == 1).count() as i64;
        if odd != p - h || (ind - c.euler_characteristic() - p + h).rem_euclid(2) != 0 {
            return Ok((false, format!("{c:?}")));
        }
    }
    Ok((true, "g ≤ 1, ≤ 3 ends".into()))
}

fn partition_conditions() -> Outcome {
    let table = two_orbit_table()?;
    let th = sc("sqrt2-1");
    for m in 1..=15 {
        let (pp, _) = positive_partition(&th, m)?;
        let ends: Vec<End> = pp.parts.iter().map(|&k| End::new("x", k)).collect();
        let c = CurveTopology::new(0, ends.clone(), vec![]);
        if !check_partition_conditions(&c, &table)?.passes {
            return Ok((false, format!("p+({m}) rejected")));
        }
        if let Some(i) = ends.iter().position(|e| e.multiplicity > 1) {
            let mut finer = ends.clone();
            let k = finer[i].multiplicity;
            finer[i] = End::new("x", k - 1);
            finer.push(End::new("x", 1));
            if check_partition_conditions(&CurveTopology::new(0, finer, vec![]), &table)?.passes {
                return Ok((false, format!("finer split of p+({m}) accepted")));
            }
        }
    }
    Ok((true, "m ≤ 15".into()))
}

// ellipsoid

fn grading_order() -> Outcome {
    let entries = ellipsoid().spectrum(150)?;
    let ok = entries
        .iter()
        .enumerate()
        .all(|(i, e)| e.grading == 2 * i as i64);
    Ok((ok, "K = 150".into()))
}

fn spectrum_bruteforce() -> Outcome {
    let k = 150;
    let entries = ellipsoid().spectrum(k)?;
    let mut grid = Vec::new();
    for m in 0..40u32 {
        for n in 0..40u32 {
            grid.push((f64::from(m) + f64::from(n) * 2f64.sqrt(), m, n));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ok = entries.iter().zip(&grid).all(|(e, g)| (e.m, e.n) == (g.1, g.2));
    Ok((ok, format!("K = {k}")))
}

fn growth_exponent() -> Outcome {
    let r = volume_asymptotics(&ellipsoid(), 10_000)?;
    let e = r.exponent.unwrap_or(f64::NAN);
    Ok(((0.45..=0.55).contains(&e), format!("exponent {e:.4}")))
}

// search

fn epsilon_reverify() -> Outcome {
    let table = crate::search::generator_table(2)?;
    let cert = epsilon_threshold(&table, None)?;
    let two_eps = cert.epsilon.mul_int(2).to_f64();
    let bound = cert.action_bound.mul_int(2);
    let sets = enumerate_orbit_sets(&table, &bound, None, false)?;
    let exceptional: BTreeMap<String, Vec<u32>> = cert.exceptional.clone();
    let all_exc = |s: &OrbitSet| s.iter().all(|(id, m)| exceptional.get(id).is_some_and(|v| v.contains(&m)));
    let limit = cert.action_bound.to_f64();
    let mut worst = f64::INFINITY;
    for x in sets.iter().filter(|s| all_exc(s)) {
        let ax = action(x, &table)?.to_f64();
        for y in &sets {
            let ay = action(y, &table)?.to_f64();
            let gap = (ax - ay).abs();
            if ay <= limit && gap > 1e-12 {
                worst = worst.min(gap);
            }
        }
    }
    Ok((worst >= two_eps - 1e-9, format!("smallest gap {worst:.6} vs 2ε {two_eps:.6}")))
}

fn special_search(seed: u64) -> Outcome {
    let gen = CaseTwoGenerator::new(GeneratorParams::new(seed, 2))?;
    let mut found = 0;
    for seq in gen.instances(20)? {
        match find_special(&seq, &gen.epsilon, &gen.table)? {
            crate::search::SearchOutcome::Found { verdict, trace, .. } => {
                if !verdict.special || !trace.is_monotone() {
                    return Ok((false, "non-special or non-monotone".into()));
                }
                found += 1;
            }
            crate::search::SearchOutcome::Contradiction { reason, .. } => return Ok((false, reason)),
        }
    }
    Ok((found == 20, "20 case-2 instances".into()))
}

fn rank_one_growth() -> Outcome {
    let g = HomologyGroup::free(1);
    let r = crate::search::nontorsion_analysis(&g, &[vec![1], vec![-1]], &[0], &[sc("1"), sc("sqrt2")], &sc("20"), 6)?;
    let inc = sc("1+sqrt2");
    let mut ok = r.branch == KernelBranch::RankOne && r.increment.as_ref() == Some(&inc) && r.sequence.len() > 1;
    for w in r.sequence.windows(2) {
        ok &= w[1].action.sub(&w[0].action) == inc;
    }
    Ok((ok, format!("{} terms", r.sequence.len())))
}

// dynamics

fn rotation_dichotomy() -> Outcome {
    let rational = SurfaceMap::new(MapKind::RationalRotation { p: 2, q: 5 }, Domain::Disk { radius: 1.0 })?;
    let golden = SurfaceMap::rotation(std::f64::consts::TAU * (5f64.sqrt() - 1.0) / 2.0, 1.0);
    let a = find_periodic_points(&rational, 5, 11, 1e-8)?.total();
    let b = find_periodic_points(&golden, 20, 11, 1e-8)?.total();
    Ok((a > 0 && b == 0, format!("rational {a}, golden {b}")))
}

fn refinement_stable() -> Outcome {
    let m = SurfaceMap::new(MapKind::Twist { offset: 0.0, slope: 1.0 }, Domain::Annulus { inner: 0.0, outer: 1.0 })?;
    let coarse = find_periodic_points(&m, 4, 11, 1e-10)?;
    let fine = find_periodic_points(&m, 4, 21, 1e-10)?;
    let counts_ok = coarse.counts.iter().all(|(q, n)| fine.counts.get(q).copied().unwrap_or(0) >= *n);
    let radii = |c: &crate::dynamics::Census| {
        let mut v: Vec<(u32, i64)> = c
            .points
            .iter()
            .map(|p| (p.period, (p.x.hypot(p.y) * 1e6).round() as i64))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let fine_radii = radii(&fine);
    let nested = radii(&coarse).iter().all(|r| fine_radii.contains(r));
    Ok((counts_ok && nested, format!("{} → {} orbits", coarse.total(), fine.total())))
}

fn twist_radii() -> Outcome {
    let m = SurfaceMap::new(MapKind::Twist { offset: 0.0, slope: 1.0 }, Domain::Annulus { inner: 0.0, outer: 1.0 })?;
    let c = find_periodic_points(&m, 4, 15, 1e-11)?;
    let worst = c
        .points
        .iter()
        .map(|p| {
            let r = p.x.hypot(p.y) * f64::from(p.period);
            (r - r.round()).abs()
        })
        .fold(0.0, f64::max);
    Ok((worst < 1e-8 && c.total() > 0, format!("max radius error {worst:.2e}")))
}

// cli

fn json_round_trip() -> Outcome {
    let entries = ellipsoid().spectrum(20)?;
    let text = serde_json::to_string(&entries).map_err(|e| EchError::Inconsistent(e.to_string()))?;
    let back: Vec<crate::ellipsoid::SpectrumEntry> =
        serde_json::from_str(&text).map_err(|e| EchError::Inconsistent(e.to_string()))?;
    let mut ok = back == entries;
    for e in &entries {
        let d = e.action.to_decimal(30);
        ok &= (sc(&d).to_f64() - e.action.to_f64()).abs() < 1e-15;
    }
    Ok((ok, "20 spectrum entries".into()))
}

/// Runs every suite and collects one line per check.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut record = |module: &str, name: &str, out: Outcome| {
        let (passed, detail) = match out {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        checks.push(Check {
            module: module.into(),
            name: name.into(),
            passed,
            detail,
        });
    };
    record("core", "action_additive", action_additive(&mut rng));
    record("core", "enumeration_count", enumeration_count());
    record("core", "kernel_rank_and_snf", kernel_and_snf(&mut rng));
    record("core", "cover_type_multiplicative", cover_multiplicative());
    record("partitions", "sums_and_endpoints", sums_and_endpoints());
    record("partitions", "slope_monotone", slope_monotone());
    record("partitions", "reflection_identity", reflection_identity());
    record("partitions", "hyperbolic_closed_forms", hyperbolic_closed_forms());
    record("partitions", "relprime", relprime());
    record("partitions", "disjoint_parts", disjoint_parts());
    record("partitions", "exceptional_overscan", exceptional_overscan());
    record("index", "i_minus_j0", i_minus_j0_identity(&mut rng));
    record("index", "additivity", additivity(&mut rng));
    record("index", "cz_parity", cz_parity());
    record("index", "ellipsoid_parity", ellipsoid_parity());
    record("index", "delta1", delta1());
    record("curves", "classifier_consistency", classifier_consistency());
    record("curves", "zero_count_extremal", zero_count_extremal());
    record("curves", "fredholm_parity", fredholm_parity());
    record("curves", "partition_conditions", partition_conditions());
    record("ellipsoid", "grading_order", grading_order());
    record("ellipsoid", "i2_and_even", ellipsoid_parity());
    record("ellipsoid", "delta1", delta1());
    record("ellipsoid", "spectrum_bruteforce", spectrum_bruteforce());
    record("ellipsoid", "growth_exponent", growth_exponent());
    record("search", "epsilon_reverify", epsilon_reverify());
    record("search", "special_search", special_search(seed));
    record("search", "rank_one_growth", rank_one_growth());
    record("dynamics", "rotation_dichotomy", rotation_dichotomy());
    record("dynamics", "refinement_stable", refinement_stable());
    record("dynamics", "twist_radii", twist_radii());
    record("cli", "json_round_trip", json_round_trip());
    let passed = checks.iter().all(|c| c.passed);
    SelftestReport { seed, passed, checks }
}
