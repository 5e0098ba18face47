//! Positive and negative partitions from lattice paths under and over the
//! line `y = θx`.

use serde::{Deserialize, Serialize};

use crate::error::{EchError, Result};
use crate::orbit::OrbitType;
use crate::scalar::{gcd, RealScalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    pub vertices: Vec<(i64, i64)>,
}

impl LatticePath {
    fn reflect(&self) -> LatticePath {
        LatticePath {
            vertices: self.vertices.iter().map(|&(x, y)| (x, -y)).collect(),
        }
    }

    /// Slopes of consecutive segments as reduced fractions `(dy, dx)`.
    pub fn slopes(&self) -> Vec<(i64, i64)> {
        self.vertices
            .windows(2)
            .map(|w| (w[1].1 - w[0].1, w[1].0 - w[0].0))
            .collect()
    }
}

/// Parts in path order. Comparisons that should ignore order go through
/// [`Partition::multiset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition {
    pub parts: Vec<u32>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Parts sorted in decreasing order.
    pub fn multiset(&self) -> Vec<u32> {
        let mut v = self.parts.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }

    pub fn contains(&self, part: u32) -> bool {
        self.parts.contains(&part)
    }

    pub fn smallest(&self) -> Option<u32> {
        self.parts.iter().copied().min()
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper hull of points sorted by x, with every lattice point on a hull edge
/// kept as a vertex.
fn upper_hull_split(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let mut out = vec![hull[0]];
    for w in hull.windows(2) {
        let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let g = gcd(dx, dy).max(1);
        for s in 1..=g {
            out.push((w[0].0 + dx / g * s, w[0].1 + dy / g * s));
        }
    }
    out
}

fn floors(theta: &RealScalar, m: u32) -> Result<Vec<(i64, i64)>> {
    (0..=i64::from(m))
        .map(|k| Ok((k, theta.mul_int(k).floor_i64()?)))
        .collect()
}

fn parts_of(path: &LatticePath) -> Partition {
    Partition {
        parts: path
            .vertices
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) as u32)
            .collect(),
    }
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(EchError::InvalidInput("multiplicity must be positive".into()));
    }
    Ok(())
}

/// Maximal concave lattice path from `(0,0)` to `(m, ⌊mθ⌋)` not above
/// `y = θx`, and its horizontal segment lengths.
pub fn positive_partition(theta: &RealScalar, m: u32) -> Result<(Partition, LatticePath)> {
    check_m(m)?;
    let pts = floors(theta, m)?;
    let path = LatticePath {
        vertices: upper_hull_split(&pts),
    };
    Ok((parts_of(&path), path))
}

/// Minimal convex lattice path from `(0,0)` to `(m, ⌈mθ⌉)` not below
/// `y = θx`; the mirror image of the positive construction for `-θ`.
pub fn negative_partition(theta: &RealScalar, m: u32) -> Result<(Partition, LatticePath)> {
    let (p, path) = positive_partition(&theta.neg(), m)?;
    Ok((p, path.reflect()))
}

pub fn is_exceptional(theta: &RealScalar, m: u32) -> Result<bool> {
    let (p, _) = positive_partition(theta, m)?;
    let (n, _) = negative_partition(theta, m)?;
    Ok(p.len() + n.len() <= 3)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalReport {
    pub multiplicities: Vec<u32>,
    /// Every exceptional multiplicity is at most this value.
    pub cutoff: u32,
}

/// Scan bound for elliptic orbits: `⌈max(2/{θ}, 2/(1-{θ}))⌉`.
pub fn elliptic_cutoff(theta: &RealScalar) -> Result<u32> {
    let frac = theta.fract()?;
    let zero = RealScalar::zero();
    let one = RealScalar::integer(1);
    if frac.try_cmp(&zero)? != std::cmp::Ordering::Greater {
        return Err(EchError::Precondition("{θ} = 0: rotation number is an integer".into()));
    }
    let two = RealScalar::integer(2);
    let a = two.div(&frac)?;
    let b = two.div(&one.sub(&frac))?;
    let hi = if a.try_cmp(&b)? == std::cmp::Ordering::Less { b } else { a };
    let c = hi.ceil_i64()?;
    u32::try_from(c).map_err(|_| EchError::InvalidInput("cutoff too large".into()))
}

/// Complete list of exceptional multiplicities for an orbit of the given
/// type and rotation number.
pub fn exceptional_multiplicities(theta: &RealScalar, kind: OrbitType) -> Result<ExceptionalReport> {
    match kind {
        OrbitType::PositiveHyperbolic => {
            if !theta.is_integer()? {
                return Err(EchError::Precondition("positive hyperbolic needs integer θ".into()));
            }
            Ok(ExceptionalReport {
                multiplicities: vec![1],
                cutoff: 1,
            })
        }
        OrbitType::NegativeHyperbolic => {
            if !theta.is_half_odd_integer()? {
                return Err(EchError::Precondition("negative hyperbolic needs θ in Z + 1/2".into()));
            }
            Ok(ExceptionalReport {
                multiplicities: vec![1, 2],
                cutoff: 2,
            })
        }
        OrbitType::Elliptic => {
            let cutoff = elliptic_cutoff(theta)?;
            let mut multiplicities = Vec::new();
            for m in 1..=cutoff {
                if is_exceptional(theta, m)? {
                    multiplicities.push(m);
                }
            }
            Ok(ExceptionalReport {
                multiplicities,
                cutoff,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCertificate {
    pub m: u32,
    pub negative_partition: Vec<u32>,
    /// Smallest part `a` of the negative partition.
    pub smallest_part: u32,
    pub one_in_negative: bool,
    pub triangle: [(i64, i64); 3],
    /// Twice the determinant area; equals `a`.
    pub twice_area: i64,
    pub boundary_points: i64,
    pub interior_points: i64,
    /// Pick's theorem with `I = 0`, `B = 3` gives area 1/2.
    pub pick_area_half: bool,
    pub holds: bool,
}

/// Checks that `p⁺(m) = (m)` forces `1 ∈ p⁻(m)`, both directly and through
/// the lattice triangle at the end of the negative path.
pub fn check_claim(theta: &RealScalar, m: u32) -> Result<ClaimCertificate> {
    let (pp, _) = positive_partition(theta, m)?;
    if pp.parts != vec![m] {
        return Err(EchError::Precondition(format!(
            "positive partition of {m} is {:?}, not ({m})",
            pp.parts
        )));
    }
    let mt = theta.mul_int(i64::from(m));
    if mt.is_integer()? {
        return Err(EchError::Precondition(format!("{m}θ is an integer")));
    }
    let (pn, _) = negative_partition(theta, m)?;
    let a = pn.parts.last().copied().expect("nonempty partition");
    let smallest = pn.smallest().expect("nonempty partition");
    let m64 = i64::from(m);
    let p0 = (m64, mt.floor_i64()?);
    let p1 = (m64, mt.ceil_i64()?);
    let p2 = (
        m64 - i64::from(a),
        theta.mul_int(m64 - i64::from(a)).ceil_i64()?,
    );
    let det = cross(p0, p1, p2).abs();
    let boundary = gcd(p1.0 - p0.0, p1.1 - p0.1)
        + gcd(p2.0 - p1.0, p2.1 - p1.1)
        + gcd(p0.0 - p2.0, p0.1 - p2.1);
    let interior = count_interior(&[p0, p1, p2]);
    // 2·Area = 2I + B - 2
    let pick_twice = 2 * interior + boundary - 2;
    debug_assert_eq!(pick_twice, det);
    let pick_area_half = interior == 0 && boundary == 3;
    let one_in_negative = pn.contains(1);
    Ok(ClaimCertificate {
        m,
        negative_partition: pn.parts.clone(),
        smallest_part: smallest,
        one_in_negative,
        triangle: [p0, p1, p2],
        twice_area: det,
        boundary_points: boundary,
        interior_points: interior,
        pick_area_half,
        holds: one_in_negative && pick_area_half && det == i64::from(a) && a == smallest,
    })
}

fn count_interior(tri: &[(i64, i64); 3]) -> i64 {
    let xmin = tri.iter().map(|p| p.0).min().unwrap();
    let xmax = tri.iter().map(|p| p.0).max().unwrap();
    let ymin = tri.iter().map(|p| p.1).min().unwrap();
    let ymax = tri.iter().map(|p| p.1).max().unwrap();
    let orient = cross(tri[0], tri[1], tri[2]).signum();
    let mut n = 0;
    for x in xmin..=xmax {
        for y in ymin..=ymax {
            let q = (x, y);
            let s0 = cross(tri[0], tri[1], q) * orient;
            let s1 = cross(tri[1], tri[2], q) * orient;
            let s2 = cross(tri[2], tri[0], q) * orient;
            if s0 > 0 && s1 > 0 && s2 > 0 {
                n += 1;
            }
        }
    }
    n
}

/// `gcd(m, ⌊mθ⌋) = 1` when `p⁺(m) = (m)`, and `gcd(m, ⌈mθ⌉) = 1` when
/// `p⁻(m) = (m)`. Returns `None` when neither partition is a single part.
pub fn relprime_check(theta: &RealScalar, m: u32) -> Result<Option<bool>> {
    let (pp, _) = positive_partition(theta, m)?;
    let (pn, _) = negative_partition(theta, m)?;
    let m64 = i64::from(m);
    let mt = theta.mul_int(m64);
    let mut any = false;
    let mut ok = true;
    if pp.parts == [m] {
        any = true;
        ok &= gcd(m64, mt.floor_i64()?) == 1;
    }
    if pn.parts == [m] {
        any = true;
        ok &= gcd(m64, mt.ceil_i64()?) == 1;
    }
    Ok(any.then_some(ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: &str) -> RealScalar {
        RealScalar::parse(s).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(positive_partition(&sc("2"), 4).unwrap().0.parts, vec![1, 1, 1, 1]);
        assert_eq!(positive_partition(&sc("sqrt2-1"), 1).unwrap().0.parts, vec![1]);
        assert_eq!(positive_partition(&sc("sqrt2-1"), 3).unwrap().0.parts, vec![3]);
        assert_eq!(negative_partition(&sc("1/2"), 5).unwrap().0.parts, vec![2, 2, 1]);
        assert_eq!(negative_partition(&sc("1/2"), 4).unwrap().0.parts, vec![2, 2]);
        assert_eq!(negative_partition(&sc("sqrt2-1"), 3).unwrap().0.parts, vec![2, 1]);
        let (p, path) = negative_partition(&sc("sqrt2-1"), 3).unwrap();
        assert_eq!(p.multiset(), vec![2, 1]);
        assert_eq!(path.vertices, vec![(0, 0), (2, 1), (3, 2)]);
    }

    #[test]
    fn collinear_points_split() {
        let (p, path) = positive_partition(&sc("1/2"), 4).unwrap();
        assert_eq!(p.parts, vec![2, 2]);
        assert_eq!(path.vertices, vec![(0, 0), (2, 1), (4, 2)]);
    }

    #[test]
    fn exceptional() {
        assert!(is_exceptional(&sc("sqrt2-1"), 3).unwrap());
        assert!(!is_exceptional(&sc("1/2"), 3).unwrap());
        assert!(is_exceptional(&sc("pi"), 1).unwrap());
        let r = exceptional_multiplicities(&sc("sqrt2-1"), OrbitType::Elliptic).unwrap();
        assert_eq!(r.multiplicities, vec![1, 2, 3]);
        assert_eq!(r.cutoff, 5);
        assert_eq!(
            exceptional_multiplicities(&sc("3"), OrbitType::PositiveHyperbolic).unwrap().multiplicities,
            vec![1]
        );
        assert_eq!(
            exceptional_multiplicities(&sc("-1/2"), OrbitType::NegativeHyperbolic).unwrap().multiplicities,
            vec![1, 2]
        );
    }

    #[test]
    fn claim() {
        let c = check_claim(&sc("sqrt2-1"), 3).unwrap();
        assert!(c.holds);
        assert_eq!(c.smallest_part, 1);
        assert_eq!(c.twice_area, 1);
        let c = check_claim(&sc("sqrt2-1"), 5).unwrap();
        assert!(c.holds);
        assert_eq!(c.negative_partition, vec![2, 2, 1]);
        assert!(matches!(check_claim(&sc("1/2"), 4), Err(EchError::Precondition(_))));
    }

    #[test]
    fn certified_ambiguity_propagates() {
        let near_int = RealScalar::certified(
            num::BigRational::from_integer(1.into()),
            num::BigRational::new(1.into(), num::BigInt::from(10).pow(15)),
            true,
        )
        .unwrap();
        assert!(positive_partition(&near_int, 3).is_err());
    }
}
