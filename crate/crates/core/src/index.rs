//! Conley–Zehnder, ECH, J0 and Fredholm indices.

use std::collections::BTreeMap;

use num::{BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};
use crate::homology::HomologyGroup;
use crate::orbit::{action, enumerate_with, Bound, OrbitSet, OrbitTable, OrbitType, ReebOrbitSpec};
use crate::scalar::RealScalar;

/// `⌊kθ⌋ + ⌈kθ⌉`.
pub fn cz_index(theta: &RealScalar, k: u32) -> Result<i64> {
    if k == 0 {
        return Err(EchError::InvalidInput("cover degree must be positive".into()));
    }
    let kt = theta.mul_int(i64::from(k));
    Ok(kt.floor_i64()? + kt.ceil_i64()?)
}

/// `Σ_{k=1..m} CZ(γ^k)`.
pub fn cz_prefix_sum(theta: &RealScalar, m: u32) -> Result<i64> {
    (1..=m).map(|k| cz_index(theta, k)).sum()
}

/// Data attached to one relative homology class `Z ∈ H_2(Y, α, β)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativeClassData {
    pub alpha: OrbitSet,
    pub beta: OrbitSet,
    pub c_tau: i64,
    pub q_tau: i64,
    pub thetas: BTreeMap<String, RealScalar>,
}

impl RelativeClassData {
    fn theta(&self, id: &str) -> Result<&RealScalar> {
        self.thetas
            .get(id)
            .ok_or_else(|| EchError::InvalidInput(format!("no rotation number for `{id}`")))
    }

    /// `Σ_i Σ_{k ≤ m_i - drop} CZ(α_i^k)` over one side.
    fn side_sum(&self, side: &OrbitSet, drop: u32) -> Result<i64> {
        let mut total = 0;
        for (id, m) in side.iter() {
            total += cz_prefix_sum(self.theta(id)?, m - drop.min(m))?;
        }
        Ok(total)
    }

    /// Glues `self: α → β` with `next: β → δ`. Chern classes and
    /// self-intersection numbers add.
    pub fn compose(&self, next: &RelativeClassData) -> Result<RelativeClassData> {
        if self.beta != next.alpha {
            return Err(EchError::InvalidInput(
                "negative end of the first class differs from the positive end of the second".into(),
            ));
        }
        let mut thetas = self.thetas.clone();
        for (k, v) in &next.thetas {
            if let Some(old) = thetas.get(k) {
                if old != v {
                    return Err(EchError::InvalidInput(format!("conflicting rotation numbers for `{k}`")));
                }
            }
            thetas.insert(k.clone(), v.clone());
        }
        Ok(RelativeClassData {
            alpha: self.alpha.clone(),
            beta: next.beta.clone(),
            c_tau: self.c_tau + next.c_tau,
            q_tau: self.q_tau + next.q_tau,
            thetas,
        })
    }
}

pub fn ech_index(d: &RelativeClassData) -> Result<i64> {
    Ok(d.c_tau + d.q_tau + d.side_sum(&d.alpha, 0)? - d.side_sum(&d.beta, 0)?)
}

pub fn j0_index(d: &RelativeClassData) -> Result<i64> {
    Ok(-d.c_tau + d.q_tau + d.side_sum(&d.alpha, 1)? - d.side_sum(&d.beta, 1)?)
}

/// `2c_τ + Σ CZ(α_i^{m_i}) − Σ CZ(β_j^{n_j})`, cross-checked against
/// `I − J0`.
pub fn i_minus_j0(d: &RelativeClassData) -> Result<i64> {
    let mut v = 2 * d.c_tau;
    for (id, m) in d.alpha.iter() {
        v += cz_index(d.theta(id)?, m)?;
    }
    for (id, n) in d.beta.iter() {
        v -= cz_index(d.theta(id)?, n)?;
    }
    let direct = ech_index(d)? - j0_index(d)?;
    if v != direct {
        return Err(EchError::Inconsistent(format!(
            "I - J0 = {direct} but the closed form gives {v}"
        )));
    }
    Ok(v)
}

/// `−χ + 2c_τ + Σ CZ⁺ − Σ CZ⁻`.
pub fn fredholm_index(chi: i64, c_tau: i64, cz_positive: &[i64], cz_negative: &[i64]) -> i64 {
    -chi + 2 * c_tau + cz_positive.iter().sum::<i64>() - cz_negative.iter().sum::<i64>()
}

/// Change of `(I, J0)` when the relative class moves by `Z − Z'` with the
/// given pairings against `c_1(ξ)` and `PD(Γ)`.
pub fn ambiguity_shift(pairing_c1: i64, pairing_gamma: i64) -> (i64, i64) {
    (pairing_c1 + 2 * pairing_gamma, -pairing_c1 + 2 * pairing_gamma)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedOrbit {
    pub id: String,
    pub weight: RealScalar,
    pub action: RealScalar,
    pub theta: RealScalar,
}

/// Absolute index data for nullhomologous orbit sets: `c_τ(α) = Σ w_i m_i`
/// and `Q_τ(α) = mᵀ Q m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedChernModel {
    pub orbits: Vec<WeightedOrbit>,
    pub q_form: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<(HomologyGroup, Vec<Vec<i64>>)>,
}

impl WeightedChernModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.orbits.len();
        if n == 0 {
            return Err(EchError::InvalidInput("empty orbit table".into()));
        }
        if self.q_form.len() != n || self.q_form.iter().any(|r| r.len() != n) {
            return Err(EchError::DimensionMismatch("Q form must be n×n".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if self.q_form[i][j] != self.q_form[j][i] {
                    return Err(EchError::InvalidInput("Q form must be symmetric".into()));
                }
            }
            if self.orbits[i].weight.as_rational().is_none() {
                return Err(EchError::InvalidInput("weights must be rational".into()));
            }
            if !self.orbits[i].action.is_positive()? {
                return Err(EchError::InvalidInput("actions must be positive".into()));
            }
        }
        if let Some((g, classes)) = &self.homology {
            if classes.len() != n {
                return Err(EchError::DimensionMismatch("one class per orbit".into()));
            }
            g.validate()?;
        }
        Ok(())
    }

    fn multiplicities(&self, alpha: &OrbitSet) -> Result<Vec<u32>> {
        for (id, _) in alpha.iter() {
            if !self.orbits.iter().any(|o| o.id == id) {
                return Err(EchError::UnknownOrbit(id.to_string()));
            }
        }
        Ok(self.orbits.iter().map(|o| alpha.multiplicity(&o.id)).collect())
    }

    pub fn c_tau(&self, alpha: &OrbitSet) -> Result<i64> {
        let ms = self.multiplicities(alpha)?;
        let mut total = BigRational::zero();
        for (o, m) in self.orbits.iter().zip(&ms) {
            let w = o.weight.as_rational().expect("validated rational");
            total += w * BigRational::from_integer((*m).into());
        }
        if !total.is_integer() {
            return Err(EchError::InvalidInput(format!(
                "c_τ({alpha}) = {total} is not an integer"
            )));
        }
        Ok(crate::scalar::big_to_i64(&total.to_integer()))
    }

    pub fn q_tau(&self, alpha: &OrbitSet) -> Result<i64> {
        let ms = self.multiplicities(alpha)?;
        let mut total = 0i64;
        for (i, mi) in ms.iter().enumerate() {
            for (j, mj) in ms.iter().enumerate() {
                total += self.q_form[i][j] * i64::from(*mi) * i64::from(*mj);
            }
        }
        Ok(total)
    }

    /// Orbit table carrying the model's actions and rotation numbers. Types
    /// are inferred from the rotation numbers and not validated, since model
    /// rotation numbers may be rational placeholders.
    pub fn table(&self) -> Result<OrbitTable> {
        let mut specs = Vec::with_capacity(self.orbits.len());
        for o in &self.orbits {
            let declared_type = if o.theta.is_integer()? {
                OrbitType::PositiveHyperbolic
            } else if o.theta.is_half_odd_integer()? {
                OrbitType::NegativeHyperbolic
            } else {
                OrbitType::Elliptic
            };
            specs.push(ReebOrbitSpec {
                id: o.id.clone(),
                action: o.action.clone(),
                theta_lift: o.theta.clone(),
                declared_type,
                homology_class: None,
            });
        }
        OrbitTable::unchecked(specs)
    }

    pub fn is_nullhomologous(&self, alpha: &OrbitSet) -> Result<bool> {
        let ms = self.multiplicities(alpha)?;
        match &self.homology {
            None => Ok(true),
            Some((g, classes)) => {
                let mut total = vec![0i64; g.generators];
                for (c, m) in classes.iter().zip(&ms) {
                    for (t, x) in total.iter_mut().zip(c) {
                        *t += i64::from(*m) * x;
                    }
                }
                g.is_zero(&total)
            }
        }
    }

    fn relative(&self, alpha: &OrbitSet) -> Result<RelativeClassData> {
        Ok(RelativeClassData {
            alpha: alpha.clone(),
            beta: OrbitSet::empty(),
            c_tau: self.c_tau(alpha)?,
            q_tau: self.q_tau(alpha)?,
            thetas: self
                .orbits
                .iter()
                .map(|o| (o.id.clone(), o.theta.clone()))
                .collect(),
        })
    }
}

/// `(I(α), J0(α))` for a nullhomologous orbit set.
pub fn abs_indices(alpha: &OrbitSet, model: &WeightedChernModel) -> Result<(i64, i64)> {
    if !model.is_nullhomologous(alpha)? {
        return Err(EchError::Precondition(format!("{alpha} is not nullhomologous")));
    }
    let d = model.relative(alpha)?;
    Ok((ech_index(&d)?, j0_index(&d)?))
}

/// `δ1 = max_i 2(|w_i| + ⌈|θ_i|⌉)/a_i`.
pub fn delta1_bound(model: &WeightedChernModel) -> Result<RealScalar> {
    model.validate()?;
    let mut best: Option<RealScalar> = None;
    for o in &model.orbits {
        let w = o.weight.as_rational().expect("validated").abs();
        let abs_theta = if o.theta.is_positive()? || o.theta.is_integer()? {
            o.theta.clone()
        } else {
            o.theta.neg()
        };
        let d = RealScalar::from_rational(w)
            .add(&RealScalar::from(crate::scalar::big_to_i64(&abs_theta.ceil()?)))
            .mul_int(2);
        let ratio = d.div(&o.action)?;
        best = Some(match best {
            None => ratio,
            Some(b) => {
                if ratio.try_cmp(&b)? == std::cmp::Ordering::Greater {
                    ratio
                } else {
                    b
                }
            }
        });
    }
    Ok(best.expect("nonempty"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta1Report {
    pub delta1: RealScalar,
    pub checked: usize,
    pub violations: Vec<OrbitSet>,
}

/// Checks `|I(α) − J0(α)| ≤ δ1·A(α)` for every nullhomologous `α` with
/// `A(α) ≤ bound`.
pub fn verify_delta1(model: &WeightedChernModel, bound: &RealScalar) -> Result<Delta1Report> {
    let delta1 = delta1_bound(model)?;
    let table = model.table()?;
    let sets = enumerate_with(&table, bound, Bound::AtMost, None, false)?;
    let mut checked = 0;
    let mut violations = Vec::new();
    for s in sets {
        if !model.is_nullhomologous(&s)? {
            continue;
        }
        checked += 1;
        let (i, j) = abs_indices(&s, model)?;
        let lhs = RealScalar::from((i - j).abs());
        let rhs = delta1.mul(&action(&s, &table)?);
        if lhs.try_cmp(&rhs)? == std::cmp::Ordering::Greater {
            violations.push(s);
        }
    }
    Ok(Delta1Report {
        delta1,
        checked,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: &str) -> RealScalar {
        RealScalar::parse(s).unwrap()
    }

    fn data(alpha: &[(&str, u32)], c: i64, q: i64) -> RelativeClassData {
        RelativeClassData {
            alpha: OrbitSet::of(alpha),
            beta: OrbitSet::empty(),
            c_tau: c,
            q_tau: q,
            thetas: [("g1".to_string(), sc("1/sqrt2")), ("g2".to_string(), sc("sqrt2"))]
                .into_iter()
                .collect(),
        }
    }

    #[test]
    fn cz_examples() {
        assert_eq!(cz_index(&sc("0.3"), 1).unwrap(), 1);
        assert_eq!(cz_index(&sc("2"), 3).unwrap(), 12);
        assert_eq!(cz_index(&sc("sqrt2"), 1).unwrap(), 3);
    }

    #[test]
    fn index_examples() {
        assert_eq!(ech_index(&data(&[], 0, 0)).unwrap(), 0);
        assert_eq!(j0_index(&data(&[], 0, 0)).unwrap(), 0);
        assert_eq!(ech_index(&data(&[("g1", 1)], 1, 0)).unwrap(), 2);
        assert_eq!(ech_index(&data(&[("g2", 1)], 1, 0)).unwrap(), 4);
        assert_eq!(j0_index(&data(&[("g1", 1)], 1, 0)).unwrap(), -1);
        assert_eq!(j0_index(&data(&[("g1", 2)], 2, 2)).unwrap(), 1);
        assert_eq!(i_minus_j0(&data(&[("g1", 1)], 1, 0)).unwrap(), 3);
        assert_eq!(i_minus_j0(&data(&[], 0, 0)).unwrap(), 0);
    }

    #[test]
    fn fredholm_examples() {
        assert_eq!(fredholm_index(0, 1, &[1], &[1]), 2);
        assert_eq!(fredholm_index(1, 1, &[1], &[]), 2);
        assert_eq!(fredholm_index(0, 0, &[3], &[3]), 0);
    }

    #[test]
    fn ambiguity() {
        assert_eq!(ambiguity_shift(0, 0), (0, 0));
        assert_eq!(ambiguity_shift(3, 1), (5, -1));
        assert_eq!(ambiguity_shift(-2, 0), (-2, 2));
    }

    #[test]
    fn delta1_single_orbit() {
        let m = WeightedChernModel {
            orbits: vec![WeightedOrbit {
                id: "e".into(),
                weight: sc("1/2"),
                action: sc("1"),
                theta: sc("0.7"),
            }],
            q_form: vec![vec![0]],
            homology: None,
        };
        assert_eq!(delta1_bound(&m).unwrap(), sc("3"));
    }

    #[test]
    fn composition_adds() {
        let a = RelativeClassData {
            alpha: OrbitSet::of(&[("g1", 2), ("g2", 1)]),
            beta: OrbitSet::of(&[("g1", 1)]),
            c_tau: 2,
            q_tau: 3,
            thetas: data(&[], 0, 0).thetas,
        };
        let b = RelativeClassData {
            alpha: OrbitSet::of(&[("g1", 1)]),
            beta: OrbitSet::empty(),
            c_tau: 1,
            q_tau: 0,
            thetas: data(&[], 0, 0).thetas,
        };
        let ab = a.compose(&b).unwrap();
        assert_eq!(ech_index(&ab).unwrap(), ech_index(&a).unwrap() + ech_index(&b).unwrap());
        assert_eq!(j0_index(&ab).unwrap(), j0_index(&a).unwrap() + j0_index(&b).unwrap());
        assert!(b.compose(&a).is_err());
    }
}
