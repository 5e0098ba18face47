//! Integer shadows of holomorphic curves: Euler characteristic, normal
//! Chern number, winding bounds, zero counts, intersection numbers and the
//! topological J0 formula.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};
use crate::index::{cz_index, fredholm_index, RelativeClassData};
use crate::orbit::{OrbitSet, OrbitTable, OrbitType};
use crate::partitions::{negative_partition, positive_partition};
use crate::scalar::{gcd, RealScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct End {
    pub orbit: String,
    pub multiplicity: u32,
}

impl End {
    pub fn new(orbit: &str, multiplicity: u32) -> Self {
        End {
            orbit: orbit.to_string(),
            multiplicity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveTopology {
    pub genus: u32,
    #[serde(default)]
    pub positive_ends: Vec<End>,
    #[serde(default)]
    pub negative_ends: Vec<End>,
    /// Singularity count, supplied by the caller.
    #[serde(default)]
    pub delta: u32,
}

impl CurveTopology {
    pub fn new(genus: u32, positive_ends: Vec<End>, negative_ends: Vec<End>) -> Self {
        CurveTopology {
            genus,
            positive_ends,
            negative_ends,
            delta: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_ends() == 0 {
            return Err(EchError::InvalidInput("a curve needs at least one end".into()));
        }
        if self
            .positive_ends
            .iter()
            .chain(&self.negative_ends)
            .any(|e| e.multiplicity == 0)
        {
            return Err(EchError::InvalidInput("end multiplicities must be positive".into()));
        }
        Ok(())
    }

    pub fn num_ends(&self) -> usize {
        self.positive_ends.len() + self.negative_ends.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * i64::from(self.genus) - self.num_ends() as i64
    }

    pub fn ends(&self, side: Side) -> &[End] {
        match side {
            Side::Positive => &self.positive_ends,
            Side::Negative => &self.negative_ends,
        }
    }

    /// Number of ends on `side` at covers of each simple orbit.
    pub fn end_counts(&self, side: Side) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for e in self.ends(side) {
            *out.entry(e.orbit.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Whether two ends on one side sit at covers of the same orbit.
    pub fn has_same_side_pair(&self, side: Side) -> bool {
        self.end_counts(side).values().any(|&n| n >= 2)
    }

    /// Total multiplicity per orbit on `side`.
    pub fn totals(&self, side: Side) -> OrbitSet {
        OrbitSet::from_pairs(self.ends(side).iter().map(|e| (e.orbit.clone(), e.multiplicity)))
            .expect("validated multiplicities")
    }
}

fn end_type(e: &End, orbits: &OrbitTable) -> Result<OrbitType> {
    Ok(orbits.get(&e.orbit)?.cover_type(e.multiplicity))
}

/// Ends at positive hyperbolic orbits, counting even covers of negative
/// hyperbolic orbits.
pub fn h_plus(c: &CurveTopology, orbits: &OrbitTable) -> Result<u32> {
    let mut n = 0;
    for e in c.positive_ends.iter().chain(&c.negative_ends) {
        if end_type(e, orbits)? == OrbitType::PositiveHyperbolic {
            n += 1;
        }
    }
    Ok(n)
}

/// `c_N = (2g − 2 + ind + h₊)/2`.
pub fn normal_chern(c: &CurveTopology, ind: i64, orbits: &OrbitTable) -> Result<i64> {
    let twice = 2 * i64::from(c.genus) - 2 + ind + i64::from(h_plus(c, orbits)?);
    if twice % 2 != 0 {
        return Err(EchError::InvalidInput(format!(
            "2g - 2 + ind + h+ = {twice} is odd"
        )));
    }
    Ok(twice / 2)
}

/// Deformations are automatically transverse when `c_N < ind`.
pub fn automatically_transverse(c_n: i64, ind: i64) -> bool {
    c_n < ind
}

/// Extremal winding of a section at an end at `θ`'s `k`-fold cover:
/// an upper bound `⌊kθ⌋` at positive ends and a lower bound `⌈kθ⌉` at
/// negative ends. Both are checked against `⌊CZ/2⌋` and `⌈CZ/2⌉`.
pub fn winding_bound(theta: &RealScalar, k: u32, side: Side) -> Result<i64> {
    let cz = cz_index(theta, k)?;
    let kt = theta.mul_int(i64::from(k));
    let (via_theta, via_cz) = match side {
        Side::Positive => (kt.floor_i64()?, cz.div_euclid(2)),
        Side::Negative => (kt.ceil_i64()?, -(-cz).div_euclid(2)),
    };
    if via_theta != via_cz {
        return Err(EchError::Inconsistent(format!(
            "winding bound {via_theta} from θ disagrees with {via_cz} from CZ = {cz}"
        )));
    }
    Ok(via_theta)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindingData {
    pub positive: Vec<i64>,
    pub negative: Vec<i64>,
}

impl WindingData {
    /// The extremal windings at every end.
    pub fn extremal(c: &CurveTopology, orbits: &OrbitTable) -> Result<Self> {
        let side = |ends: &[End], s: Side| -> Result<Vec<i64>> {
            ends.iter()
                .map(|e| winding_bound(&orbits.get(&e.orbit)?.theta_lift, e.multiplicity, s))
                .collect()
        };
        Ok(WindingData {
            positive: side(&c.positive_ends, Side::Positive)?,
            negative: side(&c.negative_ends, Side::Negative)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub count: i64,
    /// `c_τ − χ`.
    pub normal_bundle_chern: i64,
    pub total_winding: i64,
    pub fredholm_index: i64,
    /// `ind − χ − p + h₊`, twice the normal Chern number.
    pub twice_normal_chern: i64,
    pub windings_within_bounds: bool,
    /// `2·count ≤ 2c_N`; guaranteed when the windings respect their bounds.
    pub chain_holds: bool,
    pub warnings: Vec<String>,
}

/// `#ψ⁻¹(0) = (c_τ − χ) + Σ wind⁺ − Σ wind⁻`.
pub fn psi_zero_count(
    c: &CurveTopology,
    c_tau: i64,
    w: &WindingData,
    orbits: &OrbitTable,
) -> Result<ZeroCount> {
    c.validate()?;
    if w.positive.len() != c.positive_ends.len() || w.negative.len() != c.negative_ends.len() {
        return Err(EchError::DimensionMismatch("one winding per end".into()));
    }
    let bounds = WindingData::extremal(c, orbits)?;
    let mut warnings = Vec::new();
    for (i, (x, b)) in w.positive.iter().zip(&bounds.positive).enumerate() {
        if x > b {
            warnings.push(format!("positive end {i}: winding {x} exceeds bound {b}"));
        }
    }
    for (i, (x, b)) in w.negative.iter().zip(&bounds.negative).enumerate() {
        if x < b {
            warnings.push(format!("negative end {i}: winding {x} below bound {b}"));
        }
    }
    let chi = c.euler_characteristic();
    let total_winding = w.positive.iter().sum::<i64>() - w.negative.iter().sum::<i64>();
    let count = c_tau - chi + total_winding;
    let (czp, czn) = cz_lists(c, orbits)?;
    let ind = fredholm_index(chi, c_tau, &czp, &czn);
    let twice_normal_chern = ind - chi - c.num_ends() as i64 + i64::from(h_plus(c, orbits)?);
    Ok(ZeroCount {
        count,
        normal_bundle_chern: c_tau - chi,
        total_winding,
        fredholm_index: ind,
        twice_normal_chern,
        windings_within_bounds: warnings.is_empty(),
        chain_holds: 2 * count <= twice_normal_chern,
        warnings,
    })
}

/// Conley–Zehnder indices of the positive and negative ends.
pub fn cz_lists(c: &CurveTopology, orbits: &OrbitTable) -> Result<(Vec<i64>, Vec<i64>)> {
    let cz = |ends: &[End]| -> Result<Vec<i64>> {
        ends.iter()
            .map(|e| cz_index(&orbits.get(&e.orbit)?.theta_lift, e.multiplicity))
            .collect()
    };
    Ok((cz(&c.positive_ends)?, cz(&c.negative_ends)?))
}

/// Fredholm index of a curve with the given relative Chern number.
pub fn curve_fredholm_index(c: &CurveTopology, c_tau: i64, orbits: &OrbitTable) -> Result<i64> {
    let (p, n) = cz_lists(c, orbits)?;
    Ok(fredholm_index(c.euler_characteristic(), c_tau, &p, &n))
}

/// `gcd(m, ⌊mθ⌋) = 1` at positive ends and `gcd(n, ⌈nθ⌉) = 1` at negative
/// ends; returns the offending ends.
pub fn gcd_violations(c: &CurveTopology, orbits: &OrbitTable) -> Result<Vec<(Side, End)>> {
    let mut bad = Vec::new();
    for (side, ends) in [(Side::Positive, &c.positive_ends), (Side::Negative, &c.negative_ends)] {
        for e in ends {
            let w = winding_bound(&orbits.get(&e.orbit)?.theta_lift, e.multiplicity, side)?;
            if gcd(i64::from(e.multiplicity), w) != 1 {
                bad.push((side, e.clone()));
            }
        }
    }
    Ok(bad)
}

/// Algebraic intersection count of the curve with a distinct member of its
/// moduli space when every end winds extremally:
/// `Q_τ + Σ m_i⌊m_iθ_i⌋ − Σ n_j⌈n_jθ_j⌉`.
pub fn intersection_count(c: &CurveTopology, q_tau: i64, orbits: &OrbitTable) -> Result<i64> {
    c.validate()?;
    let bad = gcd_violations(c, orbits)?;
    if let Some((side, e)) = bad.first() {
        return Err(EchError::Precondition(format!(
            "equality case not certified: {side:?} end at {}^{} fails the gcd condition",
            e.orbit, e.multiplicity
        )));
    }
    let mut total = q_tau;
    for e in &c.positive_ends {
        let th = &orbits.get(&e.orbit)?.theta_lift;
        total += i64::from(e.multiplicity) * winding_bound(th, e.multiplicity, Side::Positive)?;
    }
    for e in &c.negative_ends {
        let th = &orbits.get(&e.orbit)?.theta_lift;
        total -= i64::from(e.multiplicity) * winding_bound(th, e.multiplicity, Side::Negative)?;
    }
    Ok(total)
}

/// A U-curve: trivial cylinders plus one nontrivial component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UCurveData {
    pub nontrivial: CurveTopology,
    #[serde(default)]
    pub trivial_cylinders: OrbitSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<RelativeClassData>,
}

impl UCurveData {
    pub fn new(nontrivial: CurveTopology, trivial_cylinders: OrbitSet) -> Self {
        UCurveData {
            nontrivial,
            trivial_cylinders,
            source: None,
        }
    }

    /// Positive end orbit set `α` of the whole current.
    pub fn alpha(&self) -> OrbitSet {
        self.nontrivial.totals(Side::Positive).union(&self.trivial_cylinders)
    }

    /// Negative end orbit set `β` of the whole current.
    pub fn beta(&self) -> OrbitSet {
        self.nontrivial.totals(Side::Negative).union(&self.trivial_cylinders)
    }

    /// `n±` per orbit: ends of the nontrivial component at covers of the
    /// orbit, plus one if a trivial cylinder covers it.
    pub fn end_numbers(&self, side: Side) -> BTreeMap<String, usize> {
        let mut n = self.nontrivial.end_counts(side);
        for (id, _) in self.trivial_cylinders.iter() {
            *n.entry(id.to_string()).or_insert(0) += 1;
        }
        n
    }

    /// Whether the trivial cylinders and the nontrivial component share an
    /// orbit on the given side.
    pub fn shares(&self, side: Side) -> bool {
        self.nontrivial
            .ends(side)
            .iter()
            .any(|e| self.trivial_cylinders.multiplicity(&e.orbit) > 0)
    }

    pub fn validate(&self) -> Result<()> {
        self.nontrivial.validate()?;
        if let Some(src) = &self.source {
            if src.alpha != self.alpha() || src.beta != self.beta() {
                return Err(EchError::InvalidInput(
                    "end multiplicities do not add up to the source orbit sets".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `J0 = −χ(C₁) + Σ(n⁺ − 1) + Σ(n⁻ − 1)`.
pub fn j0_from_topology(u: &UCurveData) -> i64 {
    let mut j = -u.nontrivial.euler_characteristic();
    for side in [Side::Positive, Side::Negative] {
        j += u
            .end_numbers(side)
            .values()
            .map(|&n| n as i64 - 1)
            .sum::<i64>();
    }
    j
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveType {
    TypeI,
    TypeII,
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Classification {
    /// Every conclusion that the claimed J0 forces holds.
    Consistent {
        #[serde(skip_serializing_if = "Option::is_none")]
        curve_type: Option<CurveType>,
    },
    Contradiction { clause: String, detail: String },
    /// The claimed J0 is outside the range with structural conclusions.
    Unconstrained,
}

fn low_j0_conclusions(c: &CurveTopology) -> Option<(String, String)> {
    if c.genus != 0 {
        return Some(("low.genus".into(), format!("genus {} is not zero", c.genus)));
    }
    if c.num_ends() > 3 {
        return Some(("low.ends".into(), format!("{} ends exceed 3", c.num_ends())));
    }
    for side in [Side::Positive, Side::Negative] {
        if c.has_same_side_pair(side) {
            return Some((
                "low.same_side".into(),
                format!("two {side:?} ends at covers of one orbit").to_lowercase(),
            ));
        }
    }
    None
}

/// Type I: no two negative ends at one orbit. Type II: no two positive ends
/// at one orbit.
pub fn curve_type(c: &CurveTopology) -> Option<CurveType> {
    let one = !c.has_same_side_pair(Side::Negative);
    let two = !c.has_same_side_pair(Side::Positive);
    match (one, two) {
        (true, true) => Some(CurveType::Both),
        (true, false) => Some(CurveType::TypeI),
        (false, true) => Some(CurveType::TypeII),
        (false, false) => None,
    }
}

/// Checks the structural consequences of a claimed J0 value on a U-curve
/// whose nontrivial component has at least one negative end.
pub fn classify_ucurve(u: &UCurveData, j0: i64) -> Result<Classification> {
    u.validate()?;
    let c = &u.nontrivial;
    if c.negative_ends.is_empty() {
        return Err(EchError::Precondition(
            "the nontrivial component has no negative end".into(),
        ));
    }
    if c.positive_ends.is_empty() {
        return Err(EchError::Precondition(
            "the nontrivial component has no positive end".into(),
        ));
    }
    if j0 <= 1 {
        return Ok(match low_j0_conclusions(c) {
            Some((clause, detail)) => Classification::Contradiction { clause, detail },
            None => Classification::Consistent {
                curve_type: curve_type(c),
            },
        });
    }
    if j0 != 2 {
        return Ok(Classification::Unconstrained);
    }
    if u.shares(Side::Positive) || u.shares(Side::Negative) {
        if let Some((clause, detail)) = low_j0_conclusions(c) {
            return Ok(Classification::Contradiction {
                clause: format!("sharing.{clause}"),
                detail,
            });
        }
    }
    for side in [Side::Positive, Side::Negative] {
        if let Some((orbit, n)) = c.end_counts(side).into_iter().find(|(_, n)| *n > 2) {
            return Ok(Classification::Contradiction {
                clause: "at_most_two".into(),
                detail: format!("{n} {side:?} ends at covers of {orbit}").to_lowercase(),
            });
        }
    }
    if c.has_same_side_pair(Side::Positive) && c.negative_ends.len() != 1 {
        return Ok(Classification::Contradiction {
            clause: "pair_forces_single".into(),
            detail: format!(
                "two positive ends at one orbit but {} negative ends",
                c.negative_ends.len()
            ),
        });
    }
    if c.has_same_side_pair(Side::Negative) && c.positive_ends.len() != 1 {
        return Ok(Classification::Contradiction {
            clause: "pair_forces_single".into(),
            detail: format!(
                "two negative ends at one orbit but {} positive ends",
                c.positive_ends.len()
            ),
        });
    }
    match curve_type(c) {
        Some(t) => Ok(Classification::Consistent { curve_type: Some(t) }),
        None => Ok(Classification::Contradiction {
            clause: "pair_forces_single".into(),
            detail: "same-side pairs on both sides".into(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub orbit: String,
    pub side: Side,
    pub total: u32,
    pub observed: Vec<u32>,
    pub expected: Vec<u32>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub checks: Vec<PartitionCheck>,
    pub passes: bool,
}

/// Compares end multiplicities at each orbit with `p±(total)`.
pub fn check_partition_conditions(c: &CurveTopology, orbits: &OrbitTable) -> Result<PartitionReport> {
    let mut checks = Vec::new();
    for side in [Side::Positive, Side::Negative] {
        let mut grouped: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for e in c.ends(side) {
            grouped.entry(&e.orbit).or_default().push(e.multiplicity);
        }
        for (orbit, mut observed) in grouped {
            let theta = &orbits.get(orbit)?.theta_lift;
            let total: u32 = observed.iter().sum();
            let expected = match side {
                Side::Positive => positive_partition(theta, total)?.0,
                Side::Negative => negative_partition(theta, total)?.0,
            }
            .multiset();
            observed.sort_unstable_by(|a, b| b.cmp(a));
            checks.push(PartitionCheck {
                orbit: orbit.to_string(),
                side,
                total,
                ok: observed == expected,
                observed,
                expected,
            });
        }
    }
    let passes = checks.iter().all(|c| c.ok);
    Ok(PartitionReport { checks, passes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInequality {
    pub holds: bool,
    /// Equality makes the partition conditions applicable.
    pub equality: bool,
}

/// `ind ≤ I − 2δ`.
pub fn index_inequality_check(ind: i64, ech: i64, delta: u32) -> IndexInequality {
    let rhs = ech - 2 * i64::from(delta);
    IndexInequality {
        holds: ind <= rhs,
        equality: ind == rhs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseResult {
    pub clause: char,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoliationHypotheses {
    pub normal_chern_zero: bool,
    pub no_same_side_pair: bool,
    pub gcd_condition: bool,
    /// Genus zero and no positive hyperbolic ends.
    pub foliates: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialVerdict {
    pub special: bool,
    pub clauses: Vec<ClauseResult>,
    pub foliation: FoliationHypotheses,
}

impl SpecialVerdict {
    pub fn failed(&self) -> Vec<char> {
        self.clauses.iter().filter(|c| !c.passed).map(|c| c.clause).collect()
    }
}

/// Clause-by-clause check of the special-curve conditions `(a)`–`(f)`.
/// `eps_ok` certifies that the curve lives in a low-action U-curve; `(f)` is
/// then implied by `(c)`.
pub fn is_special(
    c: &CurveTopology,
    ech: i64,
    ind: i64,
    eps_ok: bool,
    orbits: &OrbitTable,
) -> Result<SpecialVerdict> {
    c.validate()?;
    let mut clauses = Vec::new();
    let mut push = |clause, passed, detail: String| {
        clauses.push(ClauseResult {
            clause,
            passed,
            detail,
        })
    };
    push(
        'a',
        ind == 2 && ech == 2 && c.delta == 0,
        format!("ind = {ind}, I = {ech}, δ = {}", c.delta),
    );
    let elliptic = |ends: &[End]| -> Result<bool> {
        for e in ends {
            if orbits.get(&e.orbit)?.declared_type == OrbitType::Elliptic {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let pe = elliptic(&c.positive_ends)?;
    let ne = elliptic(&c.negative_ends)?;
    push('b', pe && ne, format!("elliptic positive end: {pe}, elliptic negative end: {ne}"));
    let c_ok = c.genus == 0 && c.num_ends() <= 3;
    push('c', c_ok, format!("genus {}, {} ends", c.genus, c.num_ends()));
    let d_ok = !c.has_same_side_pair(Side::Positive) && !c.has_same_side_pair(Side::Negative);
    push('d', d_ok, "no two same-side ends at one orbit".into());
    let mut hyperbolic = Vec::new();
    for e in c.positive_ends.iter().chain(&c.negative_ends) {
        if orbits.get(&e.orbit)?.declared_type.is_hyperbolic() {
            hyperbolic.push(e);
        }
    }
    let negative_simple_nh = |e: &End| {
        c.negative_ends.contains(e)
            && e.multiplicity == 1
            && orbits
                .get(&e.orbit)
                .map(|o| o.declared_type == OrbitType::NegativeHyperbolic)
                .unwrap_or(false)
    };
    let e_ok = hyperbolic.is_empty() || (hyperbolic.len() == 1 && negative_simple_nh(hyperbolic[0]));
    push('e', e_ok, format!("{} hyperbolic ends", hyperbolic.len()));
    push('f', eps_ok && c_ok, format!("action gap certified: {eps_ok}"));
    let special = clauses.iter().all(|c| c.passed);

    let h = h_plus(c, orbits)?;
    let c_n = {
        let twice = 2 * i64::from(c.genus) - 2 + ind + i64::from(h);
        (twice % 2 == 0).then_some(twice / 2)
    };
    let foliation = FoliationHypotheses {
        normal_chern_zero: c_n == Some(0),
        no_same_side_pair: d_ok,
        gcd_condition: gcd_violations(c, orbits)?.is_empty(),
        foliates: c.genus == 0 && h == 0,
    };
    Ok(SpecialVerdict {
        special,
        clauses,
        foliation,
    })
}

/// Distinct orbits touched by a curve, on either side.
pub fn orbits_of(c: &CurveTopology) -> BTreeSet<String> {
    c.positive_ends
        .iter()
        .chain(&c.negative_ends)
        .map(|e| e.orbit.clone())
        .collect()
}
