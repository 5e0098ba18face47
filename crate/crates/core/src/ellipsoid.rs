//! The boundary of the ellipsoid `E(a,b)`: two elliptic orbits, their
//! gradings and action spectrum, and the explicit Reeb flow.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};
use crate::index::{cz_index, WeightedChernModel, WeightedOrbit};
use crate::orbit::{OrbitTable, ReebOrbitSpec};
use crate::scalar::RealScalar;

pub const SHORT_ORBIT: &str = "g1";
pub const LONG_ORBIT: &str = "g2";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipsoidModel {
    pub a: RealScalar,
    pub b: RealScalar,
    /// False when `a/b` is rational; such models have action ties.
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub k: usize,
    pub m: u32,
    pub n: u32,
    pub action: RealScalar,
    pub grading: i64,
}

impl EllipsoidModel {
    /// A nondegenerate ellipsoid; `a/b` must be certified irrational.
    pub fn new(a: RealScalar, b: RealScalar) -> Result<Self> {
        let m = Self::build(a, b)?;
        if !m.nondegenerate {
            return Err(EchError::Degenerate(format!(
                "a/b = {} is not certified irrational",
                m.ratio()?
            )));
        }
        Ok(m)
    }

    /// Allows rational `a/b`; only the flow, return map and tie detection are
    /// meaningful for such models.
    pub fn degenerate(a: RealScalar, b: RealScalar) -> Result<Self> {
        Self::build(a, b)
    }

    fn build(a: RealScalar, b: RealScalar) -> Result<Self> {
        if !a.is_positive()? || !b.is_positive()? {
            return Err(EchError::InvalidInput("a and b must be positive".into()));
        }
        let ratio = a.div(&b)?;
        Ok(EllipsoidModel {
            nondegenerate: ratio.is_known_irrational(),
            a,
            b,
        })
    }

    pub fn ratio(&self) -> Result<RealScalar> {
        Ok(self.a.div(&self.b)?)
    }

    pub fn theta_short(&self) -> Result<RealScalar> {
        self.ratio()
    }

    pub fn theta_long(&self) -> Result<RealScalar> {
        Ok(self.b.div(&self.a)?)
    }

    pub fn volume(&self) -> RealScalar {
        self.a.mul(&self.b)
    }

    pub fn orbit_table(&self) -> Result<OrbitTable> {
        OrbitTable::new([
            ReebOrbitSpec::elliptic(SHORT_ORBIT, self.a.clone(), self.theta_short()?)?,
            ReebOrbitSpec::elliptic(LONG_ORBIT, self.b.clone(), self.theta_long()?)?,
        ])
    }

    /// Index data: unit weights give `c_τ = m + n` and the form
    /// `[[0,1],[1,0]]` gives `Q_τ = 2mn`.
    pub fn chern_model(&self) -> Result<WeightedChernModel> {
        Ok(WeightedChernModel {
            orbits: vec![
                WeightedOrbit {
                    id: SHORT_ORBIT.into(),
                    weight: RealScalar::integer(1),
                    action: self.a.clone(),
                    theta: self.theta_short()?,
                },
                WeightedOrbit {
                    id: LONG_ORBIT.into(),
                    weight: RealScalar::integer(1),
                    action: self.b.clone(),
                    theta: self.theta_long()?,
                },
            ],
            q_form: vec![vec![0, 1], vec![1, 0]],
            homology: None,
        })
    }

    pub fn action(&self, m: u32, n: u32) -> RealScalar {
        self.a.mul_int(i64::from(m)).add(&self.b.mul_int(i64::from(n)))
    }

    /// `(m+n) + 2mn + Σ_{k≤m} CZ(γ1^k) + Σ_{l≤n} CZ(γ2^l)`.
    pub fn grading(&self, m: u32, n: u32) -> Result<i64> {
        let t1 = self.theta_short()?;
        let t2 = self.theta_long()?;
        let mut g = i64::from(m) + i64::from(n) + 2 * i64::from(m) * i64::from(n);
        for k in 1..=m {
            g += cz_index(&t1, k)?;
        }
        for l in 1..=n {
            g += cz_index(&t2, l)?;
        }
        Ok(g)
    }

    /// The `k` smallest actions `ma + nb`, `m, n ≥ 0`, with gradings.
    pub fn spectrum(&self, k: usize) -> Result<Vec<SpectrumEntry>> {
        if !self.nondegenerate {
            return Err(EchError::Degenerate("rational a/b: the spectrum has ties".into()));
        }
        let raw = self.lowest_generators(k)?;
        for w in raw.windows(2) {
            if self.exact_cmp(w[0], w[1])? != Ordering::Less {
                return Err(EchError::Inconsistent("spectrum not strictly increasing".into()));
            }
        }
        self.attach_gradings(&raw)
    }

    fn exact_cmp(&self, x: (u32, u32), y: (u32, u32)) -> Result<Ordering> {
        Ok(self.action(x.0, x.1).try_cmp(&self.action(y.0, y.1))?)
    }

    /// The `k` lowest generators in action order. Candidates are found in
    /// floating point with a safety margin, and neighbours closer than the
    /// floating-point resolution are ordered exactly.
    fn lowest_generators(&self, k: usize) -> Result<Vec<(u32, u32)>> {
        if k == 0 {
            return Err(EchError::InvalidInput("K must be positive".into()));
        }
        let (af, bf) = (self.a.to_f64(), self.b.to_f64());
        let mut bound = (2.0 * af * bf * k as f64).sqrt() + af + bf;
        loop {
            let max_m = (bound / af).floor() as u32;
            let mut cand: Vec<(f64, u32, u32)> = (0..=max_m)
                .into_par_iter()
                .flat_map_iter(|m| {
                    let rest = bound - f64::from(m) * af;
                    let max_n = (rest / bf).floor().max(0.0) as u32;
                    (0..=max_n).map(move |n| (f64::from(m) * af + f64::from(n) * bf, m, n))
                })
                .collect();
            cand.par_sort_unstable_by(|x, y| {
                x.0.partial_cmp(&y.0).unwrap().then((x.1, x.2).cmp(&(y.1, y.2)))
            });
            let margin = 1e-9 * bound.max(1.0);
            if cand.len() >= k && cand[k - 1].0 < bound - margin {
                // Exact repair of near-ties.
                let mut out: Vec<(u32, u32)> = cand.iter().map(|c| (c.1, c.2)).collect();
                let vals: Vec<f64> = cand.iter().map(|c| c.0).collect();
                let limit = (k + 1).min(out.len());
                let mut i = 1;
                while i < limit {
                    if (vals[i] - vals[i - 1]).abs() <= margin {
                        let mut j = i;
                        while j > 0
                            && (vals[j] - vals[j - 1]).abs() <= margin
                            && self.exact_cmp(out[j - 1], out[j])? == Ordering::Greater
                        {
                            out.swap(j - 1, j);
                            j -= 1;
                        }
                    }
                    i += 1;
                }
                out.truncate(k);
                return Ok(out);
            }
            bound *= 1.25;
        }
    }

    fn attach_gradings(&self, gens: &[(u32, u32)]) -> Result<Vec<SpectrumEntry>> {
        let max_m = gens.iter().map(|g| g.0).max().unwrap_or(0);
        let max_n = gens.iter().map(|g| g.1).max().unwrap_or(0);
        let p1 = prefix_cz(&self.theta_short()?, max_m)?;
        let p2 = prefix_cz(&self.theta_long()?, max_n)?;
        Ok(gens
            .iter()
            .enumerate()
            .map(|(k, &(m, n))| SpectrumEntry {
                k,
                m,
                n,
                action: self.action(m, n),
                grading: i64::from(m) + i64::from(n) + 2 * i64::from(m) * i64::from(n) + p1[m as usize] + p2[n as usize],
            })
            .collect())
    }

    /// Gradings and actions in one go without exact actions; used for large
    /// asymptotic runs.
    fn lowest_actions_f64(&self, k: usize) -> Result<Vec<f64>> {
        let gens = self.lowest_generators(k)?;
        let (af, bf) = (self.a.to_f64(), self.b.to_f64());
        Ok(gens
            .iter()
            .map(|&(m, n)| f64::from(m) * af + f64::from(n) * bf)
            .collect())
    }
}

fn prefix_cz(theta: &RealScalar, max: u32) -> Result<Vec<i64>> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(0);
    let mut acc = 0;
    for k in 1..=max {
        acc += cz_index(theta, k)?;
        out.push(acc);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: usize,
    pub action: f64,
    /// `N_k² / (2k)`.
    pub ratio: f64,
    /// `|ratio − vol| / vol`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub volume: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub final_deviation: f64,
    /// Deviation decreases across the decade checkpoints from `10³` on.
    pub deviation_decreasing: bool,
    /// Least-squares slope of `log N_k` against `log k` over `k ≥ 10³`.
    pub exponent: Option<f64>,
    /// Only claimed for `K ≥ 10⁴`.
    pub converged: Option<bool>,
}

/// `N_k²/(2k)` along the spectrum, where `N_k` is the action of the `k`-th
/// nonempty generator.
pub fn volume_asymptotics(model: &EllipsoidModel, k_max: usize) -> Result<AsymptoticsReport> {
    if k_max < 10 {
        return Err(EchError::InvalidInput("K must be at least 10".into()));
    }
    if !model.nondegenerate {
        return Err(EchError::Degenerate("rational a/b".into()));
    }
    let actions = model.lowest_actions_f64(k_max + 1)?;
    let vol = model.volume().to_f64();
    let point = |k: usize| {
        let n = actions[k];
        let ratio = n * n / (2.0 * k as f64);
        Checkpoint {
            k,
            action: n,
            ratio,
            deviation: (ratio - vol).abs() / vol,
        }
    };
    let mut ks = Vec::new();
    let mut p = 10usize;
    while p <= k_max {
        ks.push(p);
        p *= 10;
    }
    if *ks.last().unwrap() != k_max {
        ks.push(k_max);
    }
    let checkpoints: Vec<Checkpoint> = ks.into_iter().map(point).collect();
    let decades: Vec<&Checkpoint> = checkpoints
        .iter()
        .filter(|c| c.k >= 1000 && is_decade(c.k))
        .collect();
    let deviation_decreasing = decades.windows(2).all(|w| w[1].deviation < w[0].deviation);
    let exponent = (k_max >= 10_000).then(|| {
        let lo = 1000f64.ln();
        let hi = (k_max as f64).ln();
        let samples = 400;
        let pts: Vec<(f64, f64)> = (0..=samples)
            .map(|i| {
                let k = (lo + (hi - lo) * i as f64 / samples as f64).exp().round() as usize;
                let k = k.clamp(1000, k_max);
                ((k as f64).ln(), actions[k].ln())
            })
            .collect();
        least_squares_slope(&pts)
    });
    let final_deviation = checkpoints.last().unwrap().deviation;
    Ok(AsymptoticsReport {
        volume: vol,
        final_deviation,
        deviation_decreasing,
        exponent,
        converged: (k_max >= 10_000).then_some(final_deviation <= 0.02),
        checkpoints,
    })
}

fn is_decade(mut x: usize) -> bool {
    while x >= 10 && x % 10 == 0 {
        x /= 10;
    }
    x == 1
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct USequenceReport {
    pub entries: usize,
    pub strictly_increasing: bool,
    pub gradings_step_two: bool,
    pub passed: bool,
}

/// Along the spectrum, the shift `k ↦ k−1` lowers action strictly and
/// grading by exactly 2.
pub fn u_sequence_check(model: &EllipsoidModel, k: usize) -> Result<USequenceReport> {
    let gens = model.lowest_generators(k)?;
    for w in gens.windows(2) {
        if model.exact_cmp(w[0], w[1])? == Ordering::Equal {
            return Err(EchError::Degenerate(format!(
                "action tie between ({},{}) and ({},{})",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    let entries = model.attach_gradings(&gens)?;
    let strictly_increasing = gens
        .windows(2)
        .map(|w| model.exact_cmp(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|o| o == Ordering::Less);
    let gradings_step_two = entries.windows(2).all(|w| w[1].grading - w[0].grading == 2);
    Ok(USequenceReport {
        entries: entries.len(),
        strictly_increasing,
        gradings_step_two,
        passed: strictly_increasing && gradings_step_two,
    })
}

/// A point of `C²` as `(x1, y1, x2, y2)`.
pub type Point4 = [f64; 4];

impl EllipsoidModel {
    /// `π|z1|²/a + π|z2|²/b − 1`.
    pub fn boundary_defect(&self, p: &Point4) -> f64 {
        let pi = std::f64::consts::PI;
        pi * (p[0] * p[0] + p[1] * p[1]) / self.a.to_f64()
            + pi * (p[2] * p[2] + p[3] * p[3]) / self.b.to_f64()
            - 1.0
    }

    /// Time-`t` Reeb flow: `z1 ↦ z1·e^{2πit/a}`, `z2 ↦ z2·e^{2πit/b}`.
    pub fn reeb_flow(&self, p: &Point4, t: f64) -> Result<Point4> {
        if self.boundary_defect(p).abs() > 1e-10 {
            return Err(EchError::InvalidInput("point is not on the ellipsoid boundary".into()));
        }
        Ok(flow_unchecked(p, t, self.a.to_f64(), self.b.to_f64()))
    }

    /// Radius of the page `{z1 ∈ ℝ_{>0}}` in the `z2` coordinate.
    pub fn page_radius(&self) -> f64 {
        (self.b.to_f64() / std::f64::consts::PI).sqrt()
    }

    /// Lifts a page point `w = z2` to the boundary.
    pub fn page_point(&self, w: (f64, f64)) -> Result<Point4> {
        let r2 = w.0 * w.0 + w.1 * w.1;
        let pi = std::f64::consts::PI;
        let s = 1.0 - pi * r2 / self.b.to_f64();
        if s <= 0.0 {
            return Err(EchError::InvalidInput("point outside the open page".into()));
        }
        Ok([(self.a.to_f64() * s / pi).sqrt(), 0.0, w.0, w.1])
    }

    /// First return to the page `{arg z1 = 0}`: the return time is `a` and
    /// the map is rotation of `z2` by `2π·a/b`.
    pub fn return_map(&self, w: (f64, f64)) -> Result<((f64, f64), f64)> {
        let p = self.page_point(w)?;
        let t = self.a.to_f64();
        let q = self.reeb_flow(&p, t)?;
        Ok(((q[2], q[3]), t))
    }

    /// The same return map by RK4 integration of the Reeb vector field with a
    /// crossing search; for cross-checks only.
    pub fn return_map_integrated(&self, w: (f64, f64), steps_per_unit: usize) -> Result<((f64, f64), f64)> {
        let (a, b) = (self.a.to_f64(), self.b.to_f64());
        let field = |p: &Point4| -> Point4 {
            let wa = 2.0 * std::f64::consts::PI / a;
            let wb = 2.0 * std::f64::consts::PI / b;
            [-wa * p[1], wa * p[0], -wb * p[3], wb * p[2]]
        };
        let mut p = self.page_point(w)?;
        let h = 1.0 / steps_per_unit as f64;
        let mut t = 0.0;
        let t_max = 4.0 * a;
        while t < t_max {
            let next = rk4(&field, &p, h);
            // Crossing of the half-plane y1 = 0, x1 > 0 from below.
            if t > 0.5 * h && p[1] < 0.0 && next[1] >= 0.0 && next[0] > 0.0 {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if rk4(&field, &p, mid)[1] < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let q = rk4(&field, &p, hi);
                return Ok(((q[2], q[3]), t + hi));
            }
            p = next;
            t += h;
        }
        Err(EchError::Numerical("no return to the page".into()))
    }
}

fn flow_unchecked(p: &Point4, t: f64, a: f64, b: f64) -> Point4 {
    let (s1, c1) = (2.0 * std::f64::consts::PI * t / a).sin_cos();
    let (s2, c2) = (2.0 * std::f64::consts::PI * t / b).sin_cos();
    [
        p[0] * c1 - p[1] * s1,
        p[0] * s1 + p[1] * c1,
        p[2] * c2 - p[3] * s2,
        p[2] * s2 + p[3] * c2,
    ]
}

fn rk4(f: &dyn Fn(&Point4) -> Point4, p: &Point4, h: f64) -> Point4 {
    let add = |x: &Point4, y: &Point4, s: f64| -> Point4 {
        [x[0] + s * y[0], x[1] + s * y[1], x[2] + s * y[2], x[3] + s * y[3]]
    };
    let k1 = f(p);
    let k2 = f(&add(p, &k1, h / 2.0));
    let k3 = f(&add(p, &k2, h / 2.0));
    let k4 = f(&add(p, &k3, h));
    let mut out = *p;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// CSV rows `k,m,n,action,grading` with 30 significant digits.
pub fn spectrum_csv(entries: &[SpectrumEntry]) -> String {
    let mut s = String::from("k,m,n,action,grading\n");
    for e in entries {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            e.k,
            e.m,
            e.n,
            e.action.to_decimal(30),
            e.grading
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: &str) -> RealScalar {
        RealScalar::parse(s).unwrap()
    }

    fn model() -> EllipsoidModel {
        EllipsoidModel::new(sc("1"), sc("sqrt2")).unwrap()
    }

    #[test]
    fn spectrum_start() {
        let s = model().spectrum(5).unwrap();
        let gens: Vec<(u32, u32)> = s.iter().map(|e| (e.m, e.n)).collect();
        assert_eq!(gens, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)]);
        assert_eq!(s[4].action.to_decimal(6), "2.41421");
        assert_eq!(s.iter().map(|e| e.grading).collect::<Vec<_>>(), vec![0, 2, 4, 6, 8]);
    }

    #[test]
    fn gradings() {
        let m = model();
        assert_eq!(m.grading(0, 0).unwrap(), 0);
        assert_eq!(m.grading(1, 0).unwrap(), 2);
        assert_eq!(m.grading(0, 1).unwrap(), 4);
    }

    #[test]
    fn degenerate_models() {
        assert!(EllipsoidModel::new(sc("1"), sc("1")).is_err());
        let d = EllipsoidModel::degenerate(sc("1"), sc("1")).unwrap();
        assert!(matches!(u_sequence_check(&d, 5), Err(EchError::Degenerate(_))));
        assert!(u_sequence_check(&model(), 1).unwrap().passed);
        assert!(u_sequence_check(&model(), 100).unwrap().passed);
    }

    #[test]
    fn flow_periods() {
        let m = model();
        let r1 = (1.0 / std::f64::consts::PI).sqrt();
        let p = [r1, 0.0, 0.0, 0.0];
        let q = m.reeb_flow(&p, 1.0).unwrap();
        assert!(q.iter().zip(&p).all(|(x, y)| (x - y).abs() < 1e-9));
        assert_eq!(m.reeb_flow(&p, 0.0).unwrap(), p);
        assert!(m.reeb_flow(&[1.0, 1.0, 1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn return_map_rotation() {
        let m = model();
        let ((x, y), t) = m.return_map((0.0, 0.0)).unwrap();
        assert_eq!((x, y, t), (0.0, 0.0, 1.0));
        let w = (0.2, 0.1);
        let (direct, _) = m.return_map(w).unwrap();
        let (integrated, t) = m.return_map_integrated(w, 2000).unwrap();
        assert!((direct.0 - integrated.0).abs() < 1e-8);
        assert!((direct.1 - integrated.1).abs() < 1e-8);
        assert!((t - 1.0).abs() < 1e-8);
    }
}
