//! Symbolic Reeb orbits, orbit sets, and generator enumeration.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};
use crate::homology::HomologyGroup;
use crate::scalar::RealScalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitType {
    Elliptic,
    PositiveHyperbolic,
    NegativeHyperbolic,
}

impl OrbitType {
    pub fn is_hyperbolic(self) -> bool {
        !matches!(self, OrbitType::Elliptic)
    }
}

/// Type of the `k`-fold cover of an orbit of type `base`.
pub fn cover_type(base: OrbitType, k: u32) -> OrbitType {
    assert!(k >= 1, "cover degree must be positive");
    match base {
        OrbitType::NegativeHyperbolic if k % 2 == 0 => OrbitType::PositiveHyperbolic,
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReebOrbitSpec {
    pub id: String,
    pub action: RealScalar,
    #[serde(rename = "theta")]
    pub theta_lift: RealScalar,
    #[serde(rename = "type")]
    pub declared_type: OrbitType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology_class: Option<Vec<i64>>,
}

impl ReebOrbitSpec {
    pub fn new(
        id: impl Into<String>,
        action: RealScalar,
        theta_lift: RealScalar,
        declared_type: OrbitType,
    ) -> Result<Self> {
        let spec = ReebOrbitSpec {
            id: id.into(),
            action,
            theta_lift,
            declared_type,
            homology_class: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn elliptic(id: &str, action: RealScalar, theta: RealScalar) -> Result<Self> {
        Self::new(id, action, theta, OrbitType::Elliptic)
    }

    pub fn with_class(mut self, class: Vec<i64>) -> Self {
        self.homology_class = Some(class);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| EchError::InvalidOrbit {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if !self.action.is_positive()? {
            return Err(bad("action must be positive"));
        }
        match self.declared_type {
            OrbitType::PositiveHyperbolic => {
                if !self.theta_lift.is_integer()? {
                    return Err(bad("positive hyperbolic orbit needs an integer rotation number"));
                }
            }
            OrbitType::NegativeHyperbolic => {
                if !self.theta_lift.is_half_odd_integer()? {
                    return Err(bad("negative hyperbolic orbit needs a rotation number in Z + 1/2"));
                }
            }
            OrbitType::Elliptic => {
                if !self.theta_lift.is_known_irrational() {
                    return Err(bad("elliptic orbit needs a rotation number flagged irrational"));
                }
            }
        }
        Ok(())
    }

    pub fn cover_type(&self, k: u32) -> OrbitType {
        cover_type(self.declared_type, k)
    }
}

/// Orbit table keyed by id; iteration order is lexicographic in id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrbitTable {
    orbits: BTreeMap<String, ReebOrbitSpec>,
}

impl OrbitTable {
    pub fn new(orbits: impl IntoIterator<Item = ReebOrbitSpec>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for o in orbits {
            o.validate()?;
            if map.contains_key(&o.id) {
                return Err(EchError::InvalidInput(format!("duplicate orbit id `{}`", o.id)));
            }
            map.insert(o.id.clone(), o);
        }
        Ok(OrbitTable { orbits: map })
    }

    /// Builds a table without the type/rotation-number consistency check,
    /// for synthetic data with rational placeholder rotation numbers.
    pub fn unchecked(orbits: impl IntoIterator<Item = ReebOrbitSpec>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for o in orbits {
            if map.insert(o.id.clone(), o).is_some() {
                return Err(EchError::InvalidInput("duplicate orbit id".into()));
            }
        }
        Ok(OrbitTable { orbits: map })
    }

    pub fn get(&self, id: &str) -> Result<&ReebOrbitSpec> {
        self.orbits
            .get(id)
            .ok_or_else(|| EchError::UnknownOrbit(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReebOrbitSpec> {
        self.orbits.values()
    }

    pub fn ids(&self) -> Vec<String> {
        self.orbits.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }
}

impl Serialize for OrbitTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.orbits.values())
    }
}

impl<'de> Deserialize<'de> for OrbitTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let list = Vec::<ReebOrbitSpec>::deserialize(d)?;
        OrbitTable::new(list).map_err(serde::de::Error::custom)
    }
}

/// A finite multiset of simple orbits; multiplicities are strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct OrbitSet {
    entries: BTreeMap<String, u32>,
}

impl<'de> Deserialize<'de> for OrbitSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, u32>::deserialize(d)?;
        OrbitSet::from_pairs(raw).map_err(serde::de::Error::custom)
    }
}

impl OrbitSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (id, m) in pairs {
            let id = id.into();
            if m == 0 {
                return Err(EchError::InvalidInput(format!("zero multiplicity for `{id}`")));
            }
            *entries.entry(id).or_insert(0) += m;
        }
        Ok(OrbitSet { entries })
    }

    /// Convenience for literals; panics on zero multiplicity.
    pub fn of(pairs: &[(&str, u32)]) -> Self {
        Self::from_pairs(pairs.iter().map(|(a, b)| (a.to_string(), *b))).expect("positive multiplicities")
    }

    pub fn multiplicity(&self, id: &str) -> u32 {
        self.entries.get(id).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Multiplicity-adding union `αα'`.
    pub fn union(&self, other: &OrbitSet) -> OrbitSet {
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            *entries.entry(k.clone()).or_insert(0) += v;
        }
        OrbitSet { entries }
    }

    /// `self` with `other` removed, if `other ⊆ self` as multisets.
    pub fn minus(&self, other: &OrbitSet) -> Option<OrbitSet> {
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            let e = entries.get_mut(k)?;
            match (*e).cmp(v) {
                Ordering::Less => return None,
                Ordering::Equal => {
                    entries.remove(k);
                }
                Ordering::Greater => *e -= v,
            }
        }
        Some(OrbitSet { entries })
    }

    fn set(&mut self, id: &str, m: u32) {
        if m == 0 {
            self.entries.remove(id);
        } else {
            self.entries.insert(id.to_string(), m);
        }
    }
}

impl fmt::Display for OrbitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(k, v)| if *v == 1 { k.clone() } else { format!("{k}^{v}") })
            .collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

pub fn check_ids(s: &OrbitSet, orbits: &OrbitTable) -> Result<()> {
    for (id, _) in s.iter() {
        orbits.get(id)?;
    }
    Ok(())
}

/// Total symplectic action `Σ m_i·A(α_i)`.
pub fn action(s: &OrbitSet, orbits: &OrbitTable) -> Result<RealScalar> {
    let mut total = RealScalar::zero();
    for (id, m) in s.iter() {
        total = total.add(&orbits.get(id)?.action.mul_int(i64::from(m)));
    }
    Ok(total)
}

/// Hyperbolic orbits appear with multiplicity one.
pub fn is_admissible(s: &OrbitSet, orbits: &OrbitTable) -> Result<bool> {
    let mut ok = true;
    for (id, m) in s.iter() {
        if orbits.get(id)?.declared_type.is_hyperbolic() && m != 1 {
            ok = false;
        }
    }
    Ok(ok)
}

/// Parity of the number of distinct positive hyperbolic orbits.
pub fn i2_grading(s: &OrbitSet, orbits: &OrbitTable) -> Result<u8> {
    let mut count = 0u32;
    for (id, _) in s.iter() {
        if orbits.get(id)?.declared_type == OrbitType::PositiveHyperbolic {
            count += 1;
        }
    }
    Ok((count % 2) as u8)
}

/// Homology class `Σ m_i [α_i]` in generator coordinates.
pub fn homology_class(s: &OrbitSet, orbits: &OrbitTable, group: &HomologyGroup) -> Result<Vec<i64>> {
    let mut total = vec![0i64; group.generators];
    for (id, m) in s.iter() {
        let o = orbits.get(id)?;
        let c = o.homology_class.as_ref().ok_or_else(|| {
            EchError::InvalidInput(format!("orbit `{id}` has no homology class"))
        })?;
        if c.len() != group.generators {
            return Err(EchError::DimensionMismatch(format!(
                "class of `{id}` has {} entries, group has {}",
                c.len(),
                group.generators
            )));
        }
        for (t, x) in total.iter_mut().zip(c) {
            *t += i64::from(m) * x;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Below,
    AtMost,
}

/// Optional homology filter for [`enumerate_orbit_sets`].
#[derive(Debug, Clone, Copy)]
pub struct ClassFilter<'a> {
    pub group: &'a HomologyGroup,
    pub class: &'a [i64],
}

/// All orbit sets with action `< bound`, sorted by action then by entries.
pub fn enumerate_orbit_sets(
    orbits: &OrbitTable,
    bound: &RealScalar,
    class_filter: Option<ClassFilter<'_>>,
    admissible_only: bool,
) -> Result<Vec<OrbitSet>> {
    enumerate_with(orbits, bound, Bound::Below, class_filter, admissible_only)
}

/// Like [`enumerate_orbit_sets`] with either a strict or an inclusive bound.
pub fn enumerate_with(
    orbits: &OrbitTable,
    bound: &RealScalar,
    mode: Bound,
    class_filter: Option<ClassFilter<'_>>,
    admissible_only: bool,
) -> Result<Vec<OrbitSet>> {
    if !bound.is_positive()? {
        return Err(EchError::InvalidInput("action bound must be positive".into()));
    }
    let list: Vec<&ReebOrbitSpec> = orbits.iter().collect();
    let mut out = Vec::new();
    let mut current = OrbitSet::empty();
    dfs(&list, 0, &RealScalar::zero(), bound, mode, admissible_only, &mut current, &mut out)?;
    if let Some(f) = class_filter {
        let target = f.group.canonical(f.class)?;
        let mut kept = Vec::with_capacity(out.len());
        for (s, a) in out {
            let c = homology_class(&s, orbits, f.group)?;
            if f.group.canonical(&c)? == target {
                kept.push((s, a));
            }
        }
        out = kept;
    }
    let mut keyed: Vec<_> = out.into_iter().map(|(s, a)| (a.sort_key(), s)).collect();
    keyed.sort();
    Ok(keyed.into_iter().map(|(_, s)| s).collect())
}

fn within(value: &RealScalar, bound: &RealScalar, mode: Bound) -> Result<bool> {
    // A value indistinguishable from the bound counts as equal to it.
    let ord = value.try_cmp(bound).unwrap_or(Ordering::Equal);
    Ok(match mode {
        Bound::Below => ord == Ordering::Less,
        Bound::AtMost => ord != Ordering::Greater,
    })
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    list: &[&ReebOrbitSpec],
    idx: usize,
    partial: &RealScalar,
    bound: &RealScalar,
    mode: Bound,
    admissible_only: bool,
    current: &mut OrbitSet,
    out: &mut Vec<(OrbitSet, RealScalar)>,
) -> Result<()> {
    if idx == list.len() {
        out.push((current.clone(), partial.clone()));
        return Ok(());
    }
    let o = list[idx];
    let cap = if admissible_only && o.declared_type.is_hyperbolic() {
        1
    } else {
        u32::MAX
    };
    let mut m = 0u32;
    let mut value = partial.clone();
    loop {
        current.set(&o.id, m);
        dfs(list, idx + 1, &value, bound, mode, admissible_only, current, out)?;
        if m == cap {
            break;
        }
        m += 1;
        value = value.add(&o.action);
        if !within(&value, bound, mode)? {
            break;
        }
    }
    current.set(&o.id, 0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: &str) -> RealScalar {
        RealScalar::parse(s).unwrap()
    }

    fn two_orbits() -> OrbitTable {
        OrbitTable::new([
            ReebOrbitSpec::elliptic("g1", sc("1"), sc("1/sqrt2")).unwrap(),
            ReebOrbitSpec::elliptic("g2", sc("sqrt2"), sc("sqrt2")).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn actions() {
        let t = two_orbits();
        assert_eq!(action(&OrbitSet::empty(), &t).unwrap(), RealScalar::zero());
        let a = action(&OrbitSet::of(&[("g1", 2), ("g2", 1)]), &t).unwrap();
        assert_eq!(a, sc("2+sqrt2"));
        assert_eq!(a.to_decimal(6), "3.41421");
        assert!(matches!(
            action(&OrbitSet::of(&[("x", 1)]), &t),
            Err(EchError::UnknownOrbit(_))
        ));
    }

    #[test]
    fn type_validation() {
        assert!(ReebOrbitSpec::new("h", sc("1"), sc("2"), OrbitType::PositiveHyperbolic).is_ok());
        assert!(ReebOrbitSpec::new("h", sc("1"), sc("1/2"), OrbitType::PositiveHyperbolic).is_err());
        assert!(ReebOrbitSpec::new("h", sc("1"), sc("3/2"), OrbitType::NegativeHyperbolic).is_ok());
        assert!(ReebOrbitSpec::new("e", sc("1"), sc("0.3"), OrbitType::Elliptic).is_err());
        assert!(ReebOrbitSpec::new("e", sc("0"), sc("sqrt2"), OrbitType::Elliptic).is_err());
    }

    #[test]
    fn admissibility_and_parity() {
        let t = OrbitTable::new([
            ReebOrbitSpec::new("e", sc("1"), sc("sqrt2-1"), OrbitType::Elliptic).unwrap(),
            ReebOrbitSpec::new("h", sc("2"), sc("0"), OrbitType::PositiveHyperbolic).unwrap(),
            ReebOrbitSpec::new("k", sc("3"), sc("0"), OrbitType::PositiveHyperbolic).unwrap(),
            ReebOrbitSpec::new("n", sc("5"), sc("1/2"), OrbitType::NegativeHyperbolic).unwrap(),
        ])
        .unwrap();
        assert!(is_admissible(&OrbitSet::of(&[("h", 1)]), &t).unwrap());
        assert!(!is_admissible(&OrbitSet::of(&[("n", 2)]), &t).unwrap());
        assert!(is_admissible(&OrbitSet::of(&[("e", 7)]), &t).unwrap());
        assert_eq!(i2_grading(&OrbitSet::empty(), &t).unwrap(), 0);
        assert_eq!(i2_grading(&OrbitSet::of(&[("h", 1), ("k", 1)]), &t).unwrap(), 0);
        assert_eq!(i2_grading(&OrbitSet::of(&[("e", 4), ("h", 1)]), &t).unwrap(), 1);
    }

    #[test]
    fn covers() {
        assert_eq!(cover_type(OrbitType::NegativeHyperbolic, 2), OrbitType::PositiveHyperbolic);
        assert_eq!(cover_type(OrbitType::NegativeHyperbolic, 3), OrbitType::NegativeHyperbolic);
        assert_eq!(cover_type(OrbitType::Elliptic, 5), OrbitType::Elliptic);
        assert_eq!(cover_type(OrbitType::PositiveHyperbolic, 3), OrbitType::PositiveHyperbolic);
    }

    #[test]
    fn enumeration_examples() {
        let one = OrbitTable::new([ReebOrbitSpec::elliptic("e", sc("1"), sc("sqrt2-1")).unwrap()]).unwrap();
        let sets = enumerate_orbit_sets(&one, &sc("3.5"), None, false).unwrap();
        assert_eq!(sets.len(), 4);
        assert_eq!(sets[3], OrbitSet::of(&[("e", 3)]));

        let sets = enumerate_orbit_sets(&two_orbits(), &sc("3"), None, false).unwrap();
        let expect = vec![
            OrbitSet::empty(),
            OrbitSet::of(&[("g1", 1)]),
            OrbitSet::of(&[("g2", 1)]),
            OrbitSet::of(&[("g1", 2)]),
            OrbitSet::of(&[("g1", 1), ("g2", 1)]),
            OrbitSet::of(&[("g2", 2)]),
        ];
        assert_eq!(sets, expect);

        let h = OrbitTable::new([ReebOrbitSpec::new("h", sc("1"), sc("0"), OrbitType::PositiveHyperbolic).unwrap()]).unwrap();
        assert_eq!(enumerate_orbit_sets(&h, &sc("10"), None, true).unwrap().len(), 2);
        assert_eq!(enumerate_orbit_sets(&h, &sc("10"), None, false).unwrap().len(), 10);
        assert_eq!(enumerate_with(&h, &sc("10"), Bound::AtMost, None, false).unwrap().len(), 11);
        assert!(enumerate_orbit_sets(&h, &sc("0"), None, false).is_err());
    }

    #[test]
    fn class_filter() {
        let g = HomologyGroup::free(1);
        let t = OrbitTable::new([
            ReebOrbitSpec::elliptic("a", sc("1"), sc("sqrt2")).unwrap().with_class(vec![1]),
            ReebOrbitSpec::elliptic("b", sc("sqrt2"), sc("sqrt3")).unwrap().with_class(vec![-1]),
        ])
        .unwrap();
        let zero = [0i64];
        let sets = enumerate_orbit_sets(&t, &sc("6"), Some(ClassFilter { group: &g, class: &zero }), false).unwrap();
        assert!(sets.iter().all(|s| s.multiplicity("a") == s.multiplicity("b")));
        assert_eq!(sets.len(), 3);
    }
}
