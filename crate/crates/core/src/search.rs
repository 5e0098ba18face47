//! Low-action threshold, the special-curve search over U-curve sequences,
//! and the kernel-rank analysis for classes that are not torsion.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{
    classify_ucurve, is_special, j0_from_topology, Classification, CurveTopology, CurveType, End,
    Side, SpecialVerdict, UCurveData,
};
use crate::error::{EchError, Result};
use crate::homology::HomologyGroup;
use crate::orbit::{
    action, check_ids, enumerate_with, is_admissible, Bound, OrbitSet, OrbitTable, OrbitType,
    ReebOrbitSpec,
};
use crate::partitions::{exceptional_multiplicities, negative_partition, positive_partition};
use crate::scalar::RealScalar;

fn abs(x: &RealScalar) -> Result<RealScalar> {
    Ok(if x.signum()? == Ordering::Less { x.neg() } else { x.clone() })
}

fn min_scalar<'a>(a: &'a RealScalar, b: &'a RealScalar) -> Result<&'a RealScalar> {
    Ok(if b.try_cmp(a).ok() == Some(Ordering::Less) { b } else { a })
}

fn is_exact_zero(x: &RealScalar) -> bool {
    x.as_rational().is_some_and(|r| *r == num::zero())
}

// ---------------------------------------------------------------------------
// ε threshold

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapCondition {
    /// All-exceptional orbit set against any orbit set of different action.
    AllExceptional,
    /// Action of a simple orbit.
    SimpleAction,
    /// Simple positive hyperbolic orbit, or the double cover of a negative
    /// hyperbolic one, against every other orbit.
    Hyperbolic,
}

/// A gap `|A(x) − A(y)|` that realises the minimum for its condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapWitness {
    pub condition: GapCondition,
    pub x: OrbitSet,
    pub y: OrbitSet,
    pub gap: RealScalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonCertificate {
    pub epsilon: RealScalar,
    /// Every orbit set of action at most this bound was compared.
    pub action_bound: RealScalar,
    pub exceptional: BTreeMap<String, Vec<u32>>,
    pub witnesses: Vec<GapWitness>,
    pub pairs_checked: usize,
}

impl EpsilonCertificate {
    /// The witness with the smallest gap.
    pub fn binding(&self) -> Option<&GapWitness> {
        let mut best: Option<&GapWitness> = None;
        for w in &self.witnesses {
            best = match best {
                Some(b) if b.gap.try_cmp(&w.gap).ok() != Some(Ordering::Greater) => Some(b),
                _ => Some(w),
            };
        }
        best
    }
}

/// Exceptional multiplicities of every orbit in the table.
pub fn exceptional_table(orbits: &OrbitTable) -> Result<BTreeMap<String, Vec<u32>>> {
    let mut out = BTreeMap::new();
    for o in orbits.iter() {
        let r = exceptional_multiplicities(&o.theta_lift, o.declared_type)?;
        out.insert(o.id.clone(), r.multiplicities);
    }
    Ok(out)
}

/// Orbit sets in which every pair is exceptional, including the empty set.
pub fn all_exceptional_sets(exceptional: &BTreeMap<String, Vec<u32>>) -> Vec<OrbitSet> {
    let mut out = vec![OrbitSet::empty()];
    for (id, mults) in exceptional {
        let mut next = Vec::with_capacity(out.len() * (mults.len() + 1));
        for s in &out {
            next.push(s.clone());
            for &m in mults {
                next.push(s.union(&OrbitSet::of(&[(id.as_str(), m)])));
            }
        }
        out = next;
    }
    out
}

fn min_simple_action(orbits: &OrbitTable) -> Result<(String, RealScalar)> {
    let mut best: Option<(String, RealScalar)> = None;
    for o in orbits.iter() {
        best = match best {
            Some((id, a)) if a.try_cmp(&o.action)? != Ordering::Greater => Some((id, a)),
            _ => Some((o.id.clone(), o.action.clone())),
        };
    }
    best.ok_or_else(|| EchError::InvalidInput("empty orbit table".into()))
}

/// Largest all-exceptional action plus the smallest simple action. Orbit
/// sets beyond it cannot realise a gap below the simple-action gap.
pub fn required_action_bound(orbits: &OrbitTable) -> Result<RealScalar> {
    let exc = exceptional_table(orbits)?;
    let mut top = RealScalar::zero();
    for o in orbits.iter() {
        let m = exc[&o.id].iter().copied().max().unwrap_or(0);
        top = top.add(&o.action.mul_int(i64::from(m)));
    }
    Ok(top.add(&min_simple_action(orbits)?.1))
}

/// Minimal exact gap among candidate pairs, visiting pairs in increasing
/// floating-point gap and skipping exact ties when `skip_ties` holds.
fn minimal_gap(
    pairs: &mut [(f64, usize, usize)],
    left: &[(OrbitSet, RealScalar)],
    right: &[(OrbitSet, RealScalar)],
    skip_ties: bool,
) -> Result<Option<(usize, usize, RealScalar)>> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(usize, usize, RealScalar, f64)> = None;
    for &(approx, i, j) in pairs.iter() {
        if let Some((_, _, _, bf)) = &best {
            if approx > bf + 1e-9 * (1.0 + bf.abs()) {
                break;
            }
        }
        let d = left[i].1.sub(&right[j].1);
        if is_exact_zero(&d) {
            if skip_ties {
                continue;
            }
            return Err(EchError::Degenerate(format!(
                "{} and {} have equal action",
                left[i].0, right[j].0
            )));
        }
        let g = abs(&d).map_err(|_| {
            EchError::Degenerate(format!(
                "actions of {} and {} cannot be separated",
                left[i].0, right[j].0
            ))
        })?;
        let better = match &best {
            None => true,
            // Indistinguishable gaps are ties; either witness will do.
            Some((_, _, b, _)) => g.try_cmp(b).ok() == Some(Ordering::Less),
        };
        if better {
            let f = g.to_f64();
            best = Some((i, j, g, f));
        }
    }
    Ok(best.map(|(i, j, g, _)| (i, j, g)))
}

/// `ε = ½·min` of the three gap conditions, with each minimiser recorded.
/// `action_bound` must cover the all-exceptional sets; `None` uses
/// [`required_action_bound`].
pub fn epsilon_threshold(
    orbits: &OrbitTable,
    action_bound: Option<&RealScalar>,
) -> Result<EpsilonCertificate> {
    if orbits.is_empty() {
        return Err(EchError::InvalidInput("empty orbit table".into()));
    }
    let needed = required_action_bound(orbits)?;
    let bound = match action_bound {
        None => needed,
        Some(b) => {
            if b.try_cmp(&needed)? == Ordering::Less {
                return Err(EchError::Precondition(format!(
                    "action bound {} is below the required {}",
                    b.to_decimal(12),
                    needed.to_decimal(12)
                )));
            }
            b.clone()
        }
    };
    let exceptional = exceptional_table(orbits)?;
    let mut witnesses = Vec::new();
    let mut pairs_checked = 0usize;

    let xs: Vec<(OrbitSet, RealScalar)> = all_exceptional_sets(&exceptional)
        .into_iter()
        .map(|s| {
            let a = action(&s, orbits)?;
            Ok((s, a))
        })
        .collect::<Result<_>>()?;
    let ys: Vec<(OrbitSet, RealScalar)> = enumerate_with(orbits, &bound, Bound::AtMost, None, false)?
        .into_iter()
        .map(|s| {
            let a = action(&s, orbits)?;
            Ok((s, a))
        })
        .collect::<Result<_>>()?;
    let xf: Vec<f64> = xs.iter().map(|(_, a)| a.to_f64()).collect();
    let yf: Vec<f64> = ys.iter().map(|(_, a)| a.to_f64()).collect();
    let mut pairs = Vec::with_capacity(xs.len() * ys.len());
    for (i, (x, _)) in xs.iter().enumerate() {
        for (j, (y, _)) in ys.iter().enumerate() {
            if x != y {
                pairs.push(((xf[i] - yf[j]).abs(), i, j));
            }
        }
    }
    pairs_checked += pairs.len();
    if let Some((i, j, gap)) = minimal_gap(&mut pairs, &xs, &ys, true)? {
        witnesses.push(GapWitness {
            condition: GapCondition::AllExceptional,
            x: xs[i].0.clone(),
            y: ys[j].0.clone(),
            gap,
        });
    }

    let (min_id, min_action) = min_simple_action(orbits)?;
    if !min_action.is_positive()? {
        return Err(EchError::InvalidInput(format!("orbit `{min_id}` has non-positive action")));
    }
    witnesses.push(GapWitness {
        condition: GapCondition::SimpleAction,
        x: OrbitSet::of(&[(min_id.as_str(), 1)]),
        y: OrbitSet::empty(),
        gap: min_action.clone(),
    });

    let mut targets = Vec::new();
    for o in orbits.iter() {
        match o.declared_type {
            OrbitType::PositiveHyperbolic => targets.push((o.id.clone(), 1u32)),
            OrbitType::NegativeHyperbolic => targets.push((o.id.clone(), 2u32)),
            OrbitType::Elliptic => {}
        }
    }
    let mut best_hyp: Option<GapWitness> = None;
    for (id, k) in targets {
        let target = orbits.get(&id)?.action.mul_int(i64::from(k));
        let limit = target.add(&min_action);
        let limit_f = limit.to_f64();
        let left = vec![(OrbitSet::of(&[(id.as_str(), k)]), target.clone())];
        let mut right = Vec::new();
        for o in orbits.iter() {
            let af = o.action.to_f64();
            let mut j = 1u32;
            while f64::from(j) * af <= limit_f + 1e-9 {
                if !(o.id == id && j == k) {
                    right.push((OrbitSet::of(&[(o.id.as_str(), j)]), o.action.mul_int(i64::from(j))));
                }
                j += 1;
            }
        }
        let mut pairs: Vec<(f64, usize, usize)> = right
            .iter()
            .enumerate()
            .map(|(j, (_, a))| ((target.to_f64() - a.to_f64()).abs(), 0, j))
            .collect();
        pairs_checked += pairs.len();
        if let Some((_, j, gap)) = minimal_gap(&mut pairs, &left, &right, false)? {
            let better = match &best_hyp {
                None => true,
                Some(b) => gap.try_cmp(&b.gap).ok() == Some(Ordering::Less),
            };
            if better {
                best_hyp = Some(GapWitness {
                    condition: GapCondition::Hyperbolic,
                    x: left[0].0.clone(),
                    y: right[j].0.clone(),
                    gap,
                });
            }
        }
    }
    witnesses.extend(best_hyp);

    let mut smallest = witnesses[0].gap.clone();
    for w in &witnesses[1..] {
        smallest = min_scalar(&smallest, &w.gap)?.clone();
    }
    let epsilon = smallest.mul_rational(&num::BigRational::new(1.into(), 2.into()));
    Ok(EpsilonCertificate {
        epsilon,
        action_bound: bound,
        exceptional,
        witnesses,
        pairs_checked,
    })
}

// ---------------------------------------------------------------------------
// U-curve sequences

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceCase {
    /// Some curve has J0 at most one.
    One,
    /// Every curve has J0 = 2 and there are `2n + 1` of them.
    Two,
}

fn two() -> i64 {
    2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceCurve {
    pub ucurve: UCurveData,
    pub j0: i64,
    /// ECH index of the nontrivial component.
    #[serde(default = "two")]
    pub ech_index: i64,
    /// Fredholm index of the nontrivial component.
    #[serde(default = "two")]
    pub fredholm_index: i64,
}

/// Curve `i` (1-based) runs from `generators[i]` down to `generators[i-1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UCurveSequence {
    pub case: SequenceCase,
    pub generators: Vec<OrbitSet>,
    pub curves: Vec<SequenceCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<GeneratorParams>,
}

/// Type I/II of a U-curve whose J0 = 2 classification is consistent.
pub fn type_of(u: &UCurveData) -> Result<CurveType> {
    match classify_ucurve(u, 2)? {
        Classification::Consistent {
            curve_type: Some(t),
        } => Ok(t),
        Classification::Consistent { curve_type: None } => Err(EchError::Inconsistent(
            "same-side pairs on both sides".into(),
        )),
        Classification::Contradiction { clause, detail } => Err(EchError::Inconsistent(format!(
            "J0 = 2 conclusions fail ({clause}): {detail}"
        ))),
        Classification::Unconstrained => unreachable!("J0 = 2 is constrained"),
    }
}

fn hypothesis(name: &str, detail: impl std::fmt::Display) -> EchError {
    EchError::Precondition(format!("hypothesis `{name}` fails: {detail}"))
}

/// Checks the shape of a sequence against the threshold and returns the
/// action gaps of its steps.
pub fn validate_sequence(
    seq: &UCurveSequence,
    eps: &EpsilonCertificate,
    orbits: &OrbitTable,
) -> Result<Vec<RealScalar>> {
    let l = seq.curves.len();
    if l == 0 || seq.generators.len() != l + 1 {
        return Err(hypothesis(
            "shape",
            format!("{} generators for {} curves", seq.generators.len(), l),
        ));
    }
    for (i, g) in seq.generators.iter().enumerate() {
        check_ids(g, orbits)?;
        if !is_admissible(g, orbits)? {
            return Err(hypothesis("admissible", format!("generator {i} = {g}")));
        }
    }
    let mut gaps = Vec::with_capacity(l);
    for (k, sc) in seq.curves.iter().enumerate() {
        let i = k + 1;
        let u = &sc.ucurve;
        u.validate()?;
        if u.alpha() != seq.generators[i] || u.beta() != seq.generators[i - 1] {
            return Err(hypothesis(
                "endpoints",
                format!("curve {i} runs {} → {}", u.alpha(), u.beta()),
            ));
        }
        if u.nontrivial.negative_ends.is_empty() || u.nontrivial.positive_ends.is_empty() {
            return Err(hypothesis(
                "ends",
                format!("curve {i} needs positive and negative ends"),
            ));
        }
        let gap = action(&seq.generators[i], orbits)?.sub(&action(&seq.generators[i - 1], orbits)?);
        if gap.signum()? != Ordering::Greater || gap.try_cmp(&eps.epsilon)? != Ordering::Less {
            return Err(hypothesis(
                "low_action",
                format!("curve {i} has action gap {}", gap.to_decimal(15)),
            ));
        }
        let j = j0_from_topology(u);
        if j != sc.j0 {
            return Err(hypothesis(
                "j0",
                format!("curve {i} declares J0 = {} but its topology gives {j}", sc.j0),
            ));
        }
        gaps.push(gap);
    }
    match seq.case {
        SequenceCase::One => {
            if !seq.curves.iter().any(|c| c.j0 <= 1) {
                return Err(hypothesis("case_one", "no curve has J0 ≤ 1"));
            }
        }
        SequenceCase::Two => {
            if let Some(k) = seq.curves.iter().position(|c| c.j0 != 2) {
                return Err(hypothesis("case_two", format!("curve {} has J0 ≠ 2", k + 1)));
            }
            if l != 2 * orbits.len() + 1 {
                return Err(hypothesis(
                    "length",
                    format!("{l} curves for {} simple orbits", orbits.len()),
                ));
            }
        }
    }
    Ok(gaps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Applies to curves with smaller index.
    Down,
    /// Applies to curves with larger index.
    Up,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Typed {
        curve: usize,
        curve_type: CurveType,
    },
    Forbid {
        source: usize,
        orbit: String,
        multiplicity: u32,
        direction: Direction,
        targets: Vec<usize>,
        forbidden_total: usize,
    },
    /// A curve has an end at an orbit that an earlier step forbade; some
    /// curve between the two must share.
    Conflict {
        curve: usize,
        orbit: String,
        source: usize,
    },
    Pigeonhole {
        type_one: usize,
        type_two: usize,
        middle: usize,
        target: usize,
        available: Vec<String>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub events: Vec<TraceEvent>,
    /// Final forbidden orbits per curve index.
    #[serde(with = "pairs")]
    pub forbidden: BTreeMap<usize, BTreeSet<String>>,
}

// Integer map keys do not survive the tagged outcome enum; store pairs.
mod pairs {
    use std::collections::{BTreeMap, BTreeSet};

    use serde::{Deserialize, Deserializer, Serializer};

    type Table = BTreeMap<usize, BTreeSet<String>>;

    pub fn serialize<S: Serializer>(t: &Table, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(t.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Table, D::Error> {
        Ok(Vec::<(usize, BTreeSet<String>)>::deserialize(d)?.into_iter().collect())
    }
}

impl SearchTrace {
    /// The forbidden set never shrinks along the scan, and the final table
    /// matches the last count.
    pub fn is_monotone(&self) -> bool {
        let mut last = 0usize;
        for e in &self.events {
            if let TraceEvent::Forbid {
                forbidden_total, ..
            } = e
            {
                if *forbidden_total < last {
                    return false;
                }
                last = *forbidden_total;
            }
        }
        let total: usize = self.forbidden.values().map(|s| s.len()).sum();
        total == last
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found {
        /// 1-based curve index.
        index: usize,
        case: SequenceCase,
        shared: Vec<(Side, String)>,
        verdict: SpecialVerdict,
        trace: SearchTrace,
    },
    Contradiction {
        reason: String,
        trace: SearchTrace,
    },
}

impl SearchOutcome {
    pub fn trace(&self) -> &SearchTrace {
        match self {
            SearchOutcome::Found { trace, .. } | SearchOutcome::Contradiction { trace, .. } => trace,
        }
    }
}

fn shared_orbits(u: &UCurveData) -> Vec<(Side, String)> {
    let mut out = Vec::new();
    for side in [Side::Positive, Side::Negative] {
        let mut seen = BTreeSet::new();
        for e in u.nontrivial.ends(side) {
            if u.trivial_cylinders.multiplicity(&e.orbit) > 0 && seen.insert(e.orbit.clone()) {
                out.push((side, e.orbit.clone()));
            }
        }
    }
    out
}

fn is_exceptional_pair(
    exceptional: &BTreeMap<String, Vec<u32>>,
    orbit: &str,
    m: u32,
) -> bool {
    exceptional.get(orbit).is_some_and(|v| v.contains(&m))
}

/// Forbidden-orbit propagation over a case-2 sequence. Returns the trace and
/// the per-curve types.
fn propagate(
    seq: &UCurveSequence,
    exceptional: &BTreeMap<String, Vec<u32>>,
    orbits: &OrbitTable,
) -> Result<SearchTrace> {
    let l = seq.curves.len();
    let mut trace = SearchTrace::default();
    let mut types = Vec::with_capacity(l);
    for (k, sc) in seq.curves.iter().enumerate() {
        let t = type_of(&sc.ucurve).map_err(|e| hypothesis("j0_conclusions", format!("curve {}: {e}", k + 1)))?;
        trace.events.push(TraceEvent::Typed {
            curve: k + 1,
            curve_type: t.clone(),
        });
        types.push(t);
    }
    let is_one = |t: &CurveType| matches!(t, CurveType::TypeI | CurveType::Both);
    let is_two = |t: &CurveType| matches!(t, CurveType::TypeII | CurveType::Both);
    let mut total = 0usize;
    let mut sources: BTreeMap<(usize, String), usize> = BTreeMap::new();
    let mut forbid = |trace: &mut SearchTrace,
                      source: usize,
                      end: &End,
                      direction: Direction,
                      targets: Vec<usize>| {
        for &j in &targets {
            if trace.forbidden.entry(j).or_default().insert(end.orbit.clone()) {
                total += 1;
                sources.insert((j, end.orbit.clone()), source);
            }
        }
        trace.events.push(TraceEvent::Forbid {
            source,
            orbit: end.orbit.clone(),
            multiplicity: end.multiplicity,
            direction,
            targets,
            forbidden_total: total,
        });
    };
    for i in 1..=l {
        let c = &seq.curves[i - 1].ucurve.nontrivial;
        if i > 1 && is_one(&types[i - 1]) {
            let end = c
                .negative_ends
                .iter()
                .find(|e| !is_exceptional_pair(exceptional, &e.orbit, e.multiplicity))
                .ok_or_else(|| hypothesis("nonexceptional", format!("curve {i} has only exceptional negative ends")))?;
            forbid(&mut trace, i, end, Direction::Down, (1..i).collect());
        }
        if i < l && is_two(&types[i - 1]) {
            let end = c
                .positive_ends
                .iter()
                .find(|e| !is_exceptional_pair(exceptional, &e.orbit, e.multiplicity))
                .ok_or_else(|| hypothesis("nonexceptional", format!("curve {i} has only exceptional positive ends")))?;
            forbid(&mut trace, i, end, Direction::Up, (i + 1..=l).collect());
        }
    }
    let forbidden = trace.forbidden.clone();
    for (j, set) in &forbidden {
        let c = &seq.curves[j - 1].ucurve.nontrivial;
        let touched: BTreeSet<String> = c
            .positive_ends
            .iter()
            .chain(&c.negative_ends)
            .map(|e| e.orbit.clone())
            .collect();
        for orbit in set.intersection(&touched) {
            trace.events.push(TraceEvent::Conflict {
                curve: *j,
                orbit: orbit.clone(),
                source: sources[&(*j, orbit.clone())],
            });
        }
    }
    if l >= 3 {
        let middle = &types[1..l - 1];
        let one = middle.iter().filter(|t| is_one(t)).count();
        let two = middle.iter().filter(|t| is_two(t)).count();
        let target = if one >= two { 1 } else { l };
        let blocked = trace.forbidden.get(&target).cloned().unwrap_or_default();
        let available = orbits
            .ids()
            .into_iter()
            .filter(|id| !blocked.contains(id))
            .collect();
        trace.events.push(TraceEvent::Pigeonhole {
            type_one: one,
            type_two: two,
            middle: middle.len(),
            target,
            available,
        });
    }
    Ok(trace)
}

/// Locates a special curve in a U-curve sequence: the first curve with
/// J0 ≤ 1 in case 1, otherwise the first curve whose trivial cylinders
/// share an orbit with its nontrivial component. In case 2 the propagation
/// trace is always recorded; without any sharing curve the outcome is a
/// contradiction naming the blocked curve.
pub fn find_special(
    seq: &UCurveSequence,
    eps: &EpsilonCertificate,
    orbits: &OrbitTable,
) -> Result<SearchOutcome> {
    validate_sequence(seq, eps, orbits)?;
    let verdict_for = |sc: &SequenceCurve| {
        is_special(&sc.ucurve.nontrivial, sc.ech_index, sc.fredholm_index, true, orbits)
    };
    if seq.case == SequenceCase::One {
        let k = seq.curves.iter().position(|c| c.j0 <= 1).expect("validated");
        let sc = &seq.curves[k];
        match classify_ucurve(&sc.ucurve, sc.j0)? {
            Classification::Contradiction { clause, detail } => {
                return Err(hypothesis("j0_conclusions", format!("curve {}: {clause}: {detail}", k + 1)))
            }
            _ => {
                return Ok(SearchOutcome::Found {
                    index: k + 1,
                    case: SequenceCase::One,
                    shared: shared_orbits(&sc.ucurve),
                    verdict: verdict_for(sc)?,
                    trace: SearchTrace::default(),
                })
            }
        }
    }
    let exceptional = exceptional_table(orbits)?;
    let trace = propagate(seq, &exceptional, orbits)?;
    if let Some(k) = seq
        .curves
        .iter()
        .position(|c| c.ucurve.shares(Side::Positive) || c.ucurve.shares(Side::Negative))
    {
        let sc = &seq.curves[k];
        return Ok(SearchOutcome::Found {
            index: k + 1,
            case: SequenceCase::Two,
            shared: shared_orbits(&sc.ucurve),
            verdict: verdict_for(sc)?,
            trace,
        });
    }
    let mut reasons = Vec::new();
    for e in &trace.events {
        match e {
            TraceEvent::Conflict {
                curve,
                orbit,
                source,
            } => reasons.push(format!(
                "curve {curve} has an end at {orbit}, forbidden by curve {source}"
            )),
            TraceEvent::Pigeonhole {
                target, available, ..
            } if available.is_empty() => {
                reasons.push(format!("curve {target} has no available orbits"))
            }
            _ => {}
        }
    }
    if reasons.is_empty() {
        reasons.push("no curve shares an orbit with its trivial cylinders".into());
    }
    Ok(SearchOutcome::Contradiction {
        reason: reasons.join("; "),
        trace,
    })
}

// ---------------------------------------------------------------------------
// Case-2 instance generator

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub seed: u64,
    /// 2 or 3 elliptic orbits.
    pub orbit_count: usize,
    pub max_multiplicity: u32,
    /// Largest multiplicity added per orbit to the bottom generator.
    pub max_extra: u32,
    /// Largest total number of ends of a nontrivial component.
    pub max_ends: usize,
}

impl GeneratorParams {
    pub fn new(seed: u64, orbit_count: usize) -> Self {
        GeneratorParams {
            seed,
            orbit_count,
            max_multiplicity: if orbit_count <= 2 { 60 } else { 100 },
            max_extra: if orbit_count <= 2 { 40 } else { 100 },
            max_ends: 4,
        }
    }
}

/// Elliptic orbits with actions `1, √2, √3` and irrational rotation numbers.
pub fn generator_table(orbit_count: usize) -> Result<OrbitTable> {
    let spec = [
        ("g1", "1", "1/sqrt2"),
        ("g2", "sqrt2", "sqrt2"),
        ("g3", "sqrt3", "sqrt3-1"),
    ];
    if !(2..=3).contains(&orbit_count) {
        return Err(EchError::InvalidInput(format!(
            "generator supports 2 or 3 orbits, got {orbit_count}"
        )));
    }
    let list = spec[..orbit_count]
        .iter()
        .map(|(id, a, t)| {
            ReebOrbitSpec::elliptic(id, RealScalar::parse(a)?, RealScalar::parse(t)?)
        })
        .collect::<Result<Vec<_>>>()?;
    OrbitTable::new(list)
}

/// Nontrivial component data for one step: partition-legal ends between
/// `positive` and `negative` with action gap in `(0, ε)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTemplate {
    pub positive: OrbitSet,
    pub negative: OrbitSet,
    pub positive_ends: Vec<End>,
    pub negative_ends: Vec<End>,
    pub gap: RealScalar,
}

fn odometer(v: &mut [i64], lo: i64, hi: i64) -> bool {
    for x in v.iter_mut() {
        if *x < hi {
            *x += 1;
            return true;
        }
        *x = lo;
    }
    false
}

/// Every step template with multiplicities up to `max_multiplicity` and at
/// most `max_ends` ends.
pub fn step_templates(
    orbits: &OrbitTable,
    eps: &RealScalar,
    max_multiplicity: u32,
    max_ends: usize,
) -> Result<Vec<StepTemplate>> {
    let list: Vec<&ReebOrbitSpec> = orbits.iter().collect();
    let n = list.len();
    let m = max_multiplicity as usize;
    let mut plus = vec![vec![Vec::new(); m + 1]; n];
    let mut minus = vec![vec![Vec::new(); m + 1]; n];
    for (i, o) in list.iter().enumerate() {
        for k in 1..=max_multiplicity {
            plus[i][k as usize] = positive_partition(&o.theta_lift, k)?.0.parts;
            minus[i][k as usize] = negative_partition(&o.theta_lift, k)?.0.parts;
        }
    }
    let af: Vec<f64> = list.iter().map(|o| o.action.to_f64()).collect();
    let ef = eps.to_f64();
    let hi = max_multiplicity as i64;
    let mut d = vec![-hi; n];
    let mut out = Vec::new();
    let mut base = vec![0i64; n];
    loop {
        let g: f64 = d.iter().zip(&af).map(|(x, a)| *x as f64 * a).sum();
        if g > -1e-9 && g < ef + 1e-9 && d.iter().any(|&x| x != 0) {
            base.iter_mut().for_each(|b| *b = 0);
            let span = d.iter().map(|x| x.abs()).max().unwrap_or(0);
            loop {
                let ok = (0..n).all(|i| base[i] + d[i].abs() <= hi) && span <= hi;
                if ok {
                    let pos: Vec<i64> = (0..n).map(|i| base[i] + d[i].max(0)).collect();
                    let neg: Vec<i64> = (0..n).map(|i| base[i] + (-d[i]).max(0)).collect();
                    let ends: usize = (0..n)
                        .map(|i| plus[i][pos[i] as usize].len() + minus[i][neg[i] as usize].len())
                        .sum();
                    if ends <= max_ends && pos.iter().any(|&x| x > 0) && neg.iter().any(|&x| x > 0) {
                        let positive = OrbitSet::from_pairs(
                            (0..n).filter(|&i| pos[i] > 0).map(|i| (list[i].id.clone(), pos[i] as u32)),
                        )?;
                        let negative = OrbitSet::from_pairs(
                            (0..n).filter(|&i| neg[i] > 0).map(|i| (list[i].id.clone(), neg[i] as u32)),
                        )?;
                        let gap = action(&positive, orbits)?.sub(&action(&negative, orbits)?);
                        if gap.signum()? == Ordering::Greater && gap.try_cmp(eps)? == Ordering::Less {
                            let ends_of = |parts: &Vec<Vec<u32>>, v: &[i64], i: usize| {
                                parts_to_ends(&list[i].id, &v_parts(parts, v[i]))
                            };
                            out.push(StepTemplate {
                                positive_ends: (0..n).flat_map(|i| ends_of(&plus[i], &pos, i)).collect(),
                                negative_ends: (0..n).flat_map(|i| ends_of(&minus[i], &neg, i)).collect(),
                                positive,
                                negative,
                                gap,
                            });
                        }
                    }
                }
                // Extra shared multiplicity only adds ends; keep it small.
                if !odometer(&mut base, 0, 3) {
                    break;
                }
            }
        }
        if !odometer(&mut d, -hi, hi) {
            break;
        }
    }
    out.sort_by(|a, b| (&a.positive, &a.negative).cmp(&(&b.positive, &b.negative)));
    out.dedup();
    Ok(out)
}

fn v_parts(parts: &[Vec<u32>], k: i64) -> Vec<u32> {
    if k <= 0 {
        vec![]
    } else {
        parts[k as usize].clone()
    }
}

fn parts_to_ends(id: &str, parts: &[u32]) -> Vec<End> {
    parts.iter().map(|&p| End::new(id, p)).collect()
}

/// Applies a template below `current`; the genus is chosen so that J0 = 2.
pub fn apply_template(t: &StepTemplate, current: &OrbitSet) -> Option<SequenceCurve> {
    let trivial = current.minus(&t.negative)?;
    let topo = CurveTopology::new(0, t.positive_ends.clone(), t.negative_ends.clone());
    let mut u = UCurveData::new(topo, trivial);
    match j0_from_topology(&u) {
        2 => {}
        0 => u.nontrivial.genus = 1,
        _ => return None,
    }
    Some(SequenceCurve {
        j0: j0_from_topology(&u),
        ucurve: u,
        ech_index: 2,
        fredholm_index: 2,
    })
}

pub struct CaseTwoGenerator {
    pub params: GeneratorParams,
    pub table: OrbitTable,
    pub epsilon: EpsilonCertificate,
    pub templates: Vec<StepTemplate>,
}

impl CaseTwoGenerator {
    pub fn new(params: GeneratorParams) -> Result<Self> {
        let table = generator_table(params.orbit_count)?;
        let epsilon = epsilon_threshold(&table, None)?;
        let templates = step_templates(&table, &epsilon.epsilon, params.max_multiplicity, params.max_ends)?;
        if templates.is_empty() {
            return Err(EchError::Precondition("no step fits below the threshold".into()));
        }
        Ok(CaseTwoGenerator {
            params,
            table,
            epsilon,
            templates,
        })
    }

    fn extend(
        &self,
        rng: &mut ChaCha8Rng,
        chain: &mut Vec<SequenceCurve>,
        current: &OrbitSet,
        length: usize,
        budget: &mut usize,
    ) -> bool {
        if chain.len() == length {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let mut steps: Vec<SequenceCurve> = self
            .templates
            .iter()
            .filter_map(|t| apply_template(t, current))
            .collect();
        steps.shuffle(rng);
        // Non-sharing steps first so that traces exercise the propagation.
        steps.sort_by_key(|s| s.ucurve.shares(Side::Positive) || s.ucurve.shares(Side::Negative));
        for s in steps {
            let next = s.ucurve.alpha();
            chain.push(s);
            if self.extend(rng, chain, &next, length, budget) {
                return true;
            }
            chain.pop();
        }
        false
    }

    /// One instance with `2n + 1` curves, drawn from `rng`.
    pub fn generate(&self, rng: &mut ChaCha8Rng) -> Result<UCurveSequence> {
        let length = 2 * self.table.len() + 1;
        let ids = self.table.ids();
        for _ in 0..200 {
            let t = self.templates.choose(rng).expect("nonempty");
            let mut start = t.negative.clone();
            if rng.gen_bool(0.5) {
                for id in &ids {
                    let k = rng.gen_range(0..=self.params.max_extra);
                    if k > 0 && rng.gen_bool(0.5) {
                        start = start.union(&OrbitSet::of(&[(id.as_str(), k)]));
                    }
                }
            }
            let mut chain = Vec::with_capacity(length);
            let mut budget = 2000usize;
            if self.extend(rng, &mut chain, &start, length, &mut budget) {
                let mut generators = vec![start];
                generators.extend(chain.iter().map(|c| c.ucurve.alpha()));
                return Ok(UCurveSequence {
                    case: SequenceCase::Two,
                    generators,
                    curves: chain,
                    params: Some(self.params.clone()),
                });
            }
        }
        Err(EchError::Numerical("generator could not build a chain".into()))
    }

    /// `count` instances from the seed in the parameters.
    pub fn instances(&self, count: usize) -> Result<Vec<UCurveSequence>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        (0..count).map(|_| self.generate(&mut rng)).collect()
    }
}

// ---------------------------------------------------------------------------
// Kernel-rank dichotomy

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelBranch {
    RankZero,
    RankOne,
    RankTwo,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub multiplicities: Vec<u32>,
    pub action: RealScalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NontorsionReport {
    pub kernel_rank: usize,
    pub kernel_basis: Vec<Vec<i64>>,
    pub branch: KernelBranch,
    pub gamma_torsion: bool,
    /// Largest number of enumerated orbit sets sharing one class.
    pub max_sets_per_class: usize,
    /// Enumerated orbit sets in the class `Γ`.
    pub sets_in_gamma: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_pattern_ok: Option<bool>,
    pub sequence: Vec<SequenceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increment: Option<RealScalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_action: Option<RealScalar>,
    pub linear_growth: bool,
    pub contradiction: bool,
    pub conclusion: String,
}

fn class_sum(classes: &[Vec<i64>], m: &[u32], dim: usize) -> Vec<i64> {
    let mut total = vec![0i64; dim];
    for (c, &k) in classes.iter().zip(m) {
        for (t, x) in total.iter_mut().zip(c) {
            *t += i64::from(k) * x;
        }
    }
    total
}

/// Multiplicity vectors with `Σ m_i A_i ≤ bound`.
fn multiplicity_vectors(actions: &[RealScalar], bound: &RealScalar) -> Result<Vec<(Vec<u32>, RealScalar)>> {
    fn rec(
        actions: &[RealScalar],
        bound: &RealScalar,
        idx: usize,
        cur: &mut Vec<u32>,
        acc: &RealScalar,
        out: &mut Vec<(Vec<u32>, RealScalar)>,
    ) -> Result<()> {
        if idx == actions.len() {
            out.push((cur.clone(), acc.clone()));
            return Ok(());
        }
        let mut value = acc.clone();
        let mut k = 0u32;
        loop {
            cur.push(k);
            rec(actions, bound, idx + 1, cur, &value, out)?;
            cur.pop();
            k += 1;
            value = value.add(&actions[idx]);
            if value.try_cmp(bound)? == Ordering::Greater {
                break;
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    rec(actions, bound, 0, &mut Vec::new(), &RealScalar::zero(), &mut out)?;
    Ok(out)
}

/// Analysis of `ℤ^n → H`, `m ↦ Σ m_i [e_i]`, for the orbit classes of a
/// hypothetical form with `n ∈ {2, 3}` elliptic orbits, against a class `Γ`
/// that must carry infinitely many orbit sets of growing action. Orbit sets
/// are enumerated up to `action_bound`; `steps` sequence terms are listed in
/// the rank-one branch.
pub fn nontorsion_analysis(
    group: &HomologyGroup,
    classes: &[Vec<i64>],
    gamma: &[i64],
    actions: &[RealScalar],
    action_bound: &RealScalar,
    steps: usize,
) -> Result<NontorsionReport> {
    group.validate()?;
    if !(2..=3).contains(&classes.len()) {
        return Err(EchError::DimensionMismatch(format!(
            "expected 2 or 3 orbit classes, got {}",
            classes.len()
        )));
    }
    if actions.len() != classes.len() {
        return Err(EchError::DimensionMismatch(format!(
            "{} actions for {} classes",
            actions.len(),
            classes.len()
        )));
    }
    if gamma.len() != group.generators {
        return Err(EchError::DimensionMismatch(format!(
            "Γ has {} entries, group has {} generators",
            gamma.len(),
            group.generators
        )));
    }
    for a in actions {
        if !a.is_positive()? {
            return Err(EchError::InvalidInput("actions must be positive".into()));
        }
    }
    let kernel = group.kernel(classes)?;
    let gamma_torsion = group.is_torsion(gamma)?;
    let dim = group.generators;

    let sets = multiplicity_vectors(actions, action_bound)?;
    let mut per_class: BTreeMap<Vec<i128>, usize> = BTreeMap::new();
    let target = group.canonical(gamma)?;
    let mut in_gamma = Vec::new();
    for (m, a) in &sets {
        let c = group.canonical(&class_sum(classes, m, dim))?;
        if c == target {
            in_gamma.push((m.clone(), a.clone()));
        }
        *per_class.entry(c).or_insert(0) += 1;
    }
    let max_sets_per_class = per_class.values().copied().max().unwrap_or(0);

    let mut report = NontorsionReport {
        kernel_rank: kernel.rank,
        kernel_basis: kernel.basis.clone(),
        branch: KernelBranch::Other,
        gamma_torsion,
        max_sets_per_class,
        sets_in_gamma: in_gamma.len(),
        generator: None,
        sign_pattern_ok: None,
        sequence: vec![],
        increment: None,
        min_action: None,
        linear_growth: false,
        contradiction: false,
        conclusion: String::new(),
    };
    match kernel.rank {
        0 => {
            report.branch = KernelBranch::RankZero;
            report.contradiction = max_sets_per_class <= 1;
            report.conclusion = "at most one orbit set per class, so Γ cannot carry infinitely many".into();
        }
        1 => {
            report.branch = KernelBranch::RankOne;
            let mut v = kernel.basis[0].clone();
            let lead = *v.iter().rev().find(|&&x| x != 0).expect("nonzero kernel vector");
            if lead < 0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let ok = v.iter().all(|&x| x >= 0);
            report.sign_pattern_ok = Some(ok);
            let mut min_action = actions[0].clone();
            for a in &actions[1..] {
                min_action = min_scalar(&min_action, a)?.clone();
            }
            if !ok {
                report.contradiction = true;
                report.conclusion =
                    "kernel generator has mixed signs, so Γ holds finitely many orbit sets".into();
            } else {
                let mut increment = RealScalar::zero();
                for (x, a) in v.iter().zip(actions) {
                    increment = increment.add(&a.mul_int(*x));
                }
                let growth = increment.try_cmp(&min_action)? != Ordering::Less;
                if let Some((base, base_action)) = in_gamma
                    .iter()
                    .min_by(|a, b| a.1.try_cmp(&b.1).unwrap_or(Ordering::Equal))
                    .cloned()
                {
                    let mut cur = base;
                    let mut act = base_action;
                    for _ in 0..steps {
                        report.sequence.push(SequenceEntry {
                            multiplicities: cur.clone(),
                            action: act.clone(),
                        });
                        cur = cur.iter().zip(&v).map(|(m, x)| m + *x as u32).collect();
                        act = act.add(&increment);
                    }
                }
                report.linear_growth = growth;
                report.contradiction = growth && !gamma_torsion;
                report.conclusion = format!(
                    "actions in Γ grow by {} per step, at least the minimal action",
                    increment.to_decimal(20)
                );
                report.increment = Some(increment);
            }
            report.generator = Some(v);
            report.min_action = Some(min_action);
        }
        2 if classes.len() == 2 => {
            report.branch = KernelBranch::RankTwo;
            report.contradiction = !gamma_torsion && in_gamma.is_empty();
            report.conclusion = "both orbit classes are torsion, so no orbit set lies in Γ".into();
        }
        _ => {
            report.conclusion = format!("kernel rank {} has no dedicated branch", kernel.rank);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: &str) -> RealScalar {
        RealScalar::parse(s).unwrap()
    }

    #[test]
    fn epsilon_single_elliptic() {
        let t = OrbitTable::new([ReebOrbitSpec::elliptic("e", sc("1"), sc("sqrt2-1")).unwrap()]).unwrap();
        let cert = epsilon_threshold(&t, None).unwrap();
        assert_eq!(cert.exceptional["e"], vec![1, 2, 3]);
        assert_eq!(cert.epsilon, sc("1/2"));
    }

    #[test]
    fn epsilon_single_hyperbolic() {
        let t = OrbitTable::new([ReebOrbitSpec::new("h", sc("2"), sc("1"), OrbitType::PositiveHyperbolic).unwrap()])
            .unwrap();
        let cert = epsilon_threshold(&t, None).unwrap();
        assert_eq!(cert.epsilon, sc("1"));
    }

    #[test]
    fn epsilon_rejects_hyperbolic_tie() {
        let t = OrbitTable::new([
            ReebOrbitSpec::new("h", sc("2"), sc("1"), OrbitType::PositiveHyperbolic).unwrap(),
            ReebOrbitSpec::elliptic("e", sc("2"), sc("sqrt2")).unwrap(),
        ])
        .unwrap();
        assert!(matches!(epsilon_threshold(&t, None), Err(EchError::Degenerate(_))));
    }

    #[test]
    fn cylinder_is_both() {
        let u = UCurveData::new(
            CurveTopology::new(1, vec![End::new("g1", 1)], vec![End::new("g2", 1)]),
            OrbitSet::empty(),
        );
        assert_eq!(type_of(&u).unwrap(), CurveType::Both);
    }

    #[test]
    fn rank_one_example() {
        let g = HomologyGroup::free(1);
        let r = nontorsion_analysis(&g, &[vec![1], vec![-1]], &[0], &[sc("1"), sc("sqrt2")], &sc("20"), 5)
            .unwrap();
        assert_eq!(r.branch, KernelBranch::RankOne);
        assert_eq!(r.generator, Some(vec![1, 1]));
        assert_eq!(r.increment, Some(sc("1+sqrt2")));
        assert!(r.linear_growth);
    }
}
