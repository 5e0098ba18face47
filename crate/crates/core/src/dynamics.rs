//! Periodic-point census, area-preservation residuals and the zero-or-many
//! periodic orbit check for maps of the disk and the annulus.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ellipsoid::EllipsoidModel;
use crate::error::{EchError, Result};
use crate::scalar::{gcd, RealScalar};

/// Step for the finite-difference Jacobian in residual checks.
pub const JACOBIAN_STEP: f64 = 1e-5;
/// Largest tolerated `|det Df − 1|` for maps declared area-preserving.
pub const AREA_TOLERANCE: f64 = 1e-6;
const MAX_REFINE_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Disk { radius: f64 },
    /// `inner = 0` gives the punctured disk.
    Annulus { inner: f64, outer: f64 },
    Square { half_width: f64 },
}

impl Domain {
    /// Whether `p` lies at distance more than `margin` inside the domain.
    pub fn contains(&self, p: [f64; 2], margin: f64) -> bool {
        let r = p[0].hypot(p[1]);
        match *self {
            Domain::Disk { radius } => r < radius - margin,
            Domain::Annulus { inner, outer } => r > inner + margin && r < outer - margin,
            Domain::Square { half_width } => p[0].abs() < half_width - margin && p[1].abs() < half_width - margin,
        }
    }

    fn extent(&self) -> f64 {
        match *self {
            Domain::Disk { radius } => radius,
            Domain::Annulus { outer, .. } => outer,
            Domain::Square { half_width } => half_width,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Disk { radius } => radius > 0.0,
            Domain::Annulus { inner, outer } => inner >= 0.0 && outer > inner,
            Domain::Square { half_width } => half_width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(EchError::InvalidInput(format!("bad domain {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    /// Rotation about the origin by `angle` radians.
    Rotation { angle: f64 },
    /// Rotation by `2π·p/q`; every point has period `q / gcd(p, q)`.
    RationalRotation { p: i64, q: i64 },
    /// `φ ↦ φ + 2π(offset + slope·r)` in polar coordinates.
    Twist { offset: f64, slope: f64 },
    /// First return of the ellipsoid Reeb flow to the page `{z1 > 0}`.
    EllipsoidReturn { a: RealScalar, b: RealScalar },
    /// `p ↦ factor·p`.
    Scaling { factor: f64 },
    /// `(x, y) ↦ (x + k·y, y)`.
    Shear { k: f64 },
    /// Image points on a uniform grid over `[-extent, extent]²`, bilinearly
    /// interpolated; `values[i][j]` is the image of grid point `(x_j, y_i)`.
    Table { extent: f64, values: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceMap {
    pub map: MapKind,
    pub domain: Domain,
    /// `(a, b)` as floats; exact scalars are slow to convert per step.
    #[serde(skip)]
    ab: OnceLock<(f64, f64)>,
}

impl PartialEq for SurfaceMap {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map && self.domain == other.domain
    }
}

fn rotate(p: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

impl SurfaceMap {
    pub fn new(map: MapKind, domain: Domain) -> Result<Self> {
        let m = SurfaceMap { map, domain, ab: OnceLock::new() };
        m.validate()?;
        Ok(m)
    }

    pub fn rotation(angle: f64, radius: f64) -> Self {
        SurfaceMap {
            map: MapKind::Rotation { angle },
            domain: Domain::Disk { radius },
            ab: OnceLock::new(),
        }
    }

    /// The ellipsoid return map on its page disk.
    pub fn ellipsoid(a: RealScalar, b: RealScalar) -> Result<Self> {
        let model = EllipsoidModel::degenerate(a.clone(), b.clone())?;
        Ok(SurfaceMap {
            map: MapKind::EllipsoidReturn { a, b },
            domain: Domain::Disk {
                radius: model.page_radius(),
            },
            ab: OnceLock::new(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        match &self.map {
            MapKind::RationalRotation { q, .. } if *q <= 0 => {
                Err(EchError::InvalidInput("rotation denominator must be positive".into()))
            }
            MapKind::Table { extent, values } => {
                let n = values.len();
                if n < 2 || values.iter().any(|r| r.len() != n) || *extent <= 0.0 {
                    return Err(EchError::InvalidInput("table must be a square grid of size ≥ 2".into()));
                }
                Ok(())
            }
            MapKind::EllipsoidReturn { a, b } => EllipsoidModel::degenerate(a.clone(), b.clone()).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Whether the map is declared to preserve area.
    pub fn declared_area_preserving(&self) -> bool {
        match &self.map {
            MapKind::Scaling { factor } => (factor.abs() - 1.0).abs() < f64::EPSILON,
            MapKind::Table { .. } => false,
            _ => true,
        }
    }

    /// For rotations about the origin, the period shared by every point.
    pub fn exact_period(&self) -> Option<Option<u32>> {
        match &self.map {
            MapKind::RationalRotation { p, q } => {
                let g = gcd(*p, *q).max(1);
                Some(Some((q / g) as u32))
            }
            MapKind::Rotation { .. } => Some(None),
            _ => None,
        }
    }

    pub fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let out = match &self.map {
            MapKind::Rotation { angle } => rotate(p, *angle),
            MapKind::RationalRotation { p: num, q } => rotate(p, 2.0 * PI * (*num as f64) / (*q as f64)),
            MapKind::Twist { offset, slope } => {
                let r = p[0].hypot(p[1]);
                rotate(p, 2.0 * PI * (offset + slope * r))
            }
            MapKind::EllipsoidReturn { a, b } => {
                let (a, b) = *self.ab.get_or_init(|| (a.to_f64(), b.to_f64()));
                // Closed form of the flow for time a on the z2 factor.
                let r2 = p[0] * p[0] + p[1] * p[1];
                if PI * r2 >= b {
                    return Err(EchError::InvalidInput("point outside the open page".into()));
                }
                rotate(p, 2.0 * PI * a / b)
            }
            MapKind::Scaling { factor } => [factor * p[0], factor * p[1]],
            MapKind::Shear { k } => [p[0] + k * p[1], p[1]],
            MapKind::Table { extent, values } => bilinear(*extent, values, p)?,
        };
        if !out[0].is_finite() || !out[1].is_finite() {
            return Err(EchError::Numerical(format!("non-finite image of {p:?}")));
        }
        Ok(out)
    }

    pub fn iterate(&self, p: [f64; 2], n: u32) -> Result<[f64; 2]> {
        let mut x = p;
        for _ in 0..n {
            x = self.apply(x)?;
        }
        Ok(x)
    }
}

fn bilinear(extent: f64, values: &[Vec<[f64; 2]>], p: [f64; 2]) -> Result<[f64; 2]> {
    let n = values.len();
    let h = 2.0 * extent / (n - 1) as f64;
    let fx = (p[0] + extent) / h;
    let fy = (p[1] + extent) / h;
    if !(0.0..=(n - 1) as f64).contains(&fx) || !(0.0..=(n - 1) as f64).contains(&fy) {
        return Err(EchError::InvalidInput(format!("{p:?} is outside the table")));
    }
    let j = (fx.floor() as usize).min(n - 2);
    let i = (fy.floor() as usize).min(n - 2);
    let (tx, ty) = (fx - j as f64, fy - i as f64);
    let mut out = [0.0; 2];
    for (k, o) in out.iter_mut().enumerate() {
        *o = values[i][j][k] * (1.0 - tx) * (1.0 - ty)
            + values[i][j + 1][k] * tx * (1.0 - ty)
            + values[i + 1][j][k] * (1.0 - tx) * ty
            + values[i + 1][j + 1][k] * tx * ty;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Area preservation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaStats {
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
}

fn jacobian<F: Fn([f64; 2]) -> Result<[f64; 2]>>(f: &F, p: [f64; 2], h: f64) -> Result<[[f64; 2]; 2]> {
    let xp = f([p[0] + h, p[1]])?;
    let xm = f([p[0] - h, p[1]])?;
    let yp = f([p[0], p[1] + h])?;
    let ym = f([p[0], p[1] - h])?;
    Ok([
        [(xp[0] - xm[0]) / (2.0 * h), (yp[0] - ym[0]) / (2.0 * h)],
        [(xp[1] - xm[1]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)],
    ])
}

/// Max and mean `|det Df − 1|` by central differences with step `1e-5`.
pub fn area_preservation_residual(map: &SurfaceMap, samples: &[[f64; 2]]) -> Result<AreaStats> {
    if samples.is_empty() {
        return Err(EchError::InvalidInput("no samples".into()));
    }
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for &p in samples {
        if !map.domain.contains(p, JACOBIAN_STEP) {
            return Err(EchError::InvalidInput(format!("sample {p:?} is outside the domain")));
        }
        let j = jacobian(&|x| map.apply(x), p, JACOBIAN_STEP)?;
        let r = (j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs();
        max = max.max(r);
        sum += r;
    }
    Ok(AreaStats {
        samples: samples.len(),
        max_residual: max,
        mean_residual: sum / samples.len() as f64,
    })
}

/// Uniform samples in the domain, kept `margin` away from its boundary.
pub fn interior_samples(domain: &Domain, n: usize, seed: u64, margin: f64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = domain.extent();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = [rng.gen_range(-e..e), rng.gen_range(-e..e)];
        if domain.contains(p, margin) {
            out.push(p);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Periodic-point census

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub x: f64,
    pub y: f64,
    /// Minimal period.
    pub period: u32,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub max_period: u32,
    pub resolution: usize,
    pub tol: f64,
    pub seeds: usize,
    /// One representative per orbit, in grid order.
    pub points: Vec<PeriodicPoint>,
    /// Number of orbits per minimal period.
    pub counts: BTreeMap<u32, usize>,
    /// For disks: whether the centre is fixed. It is reported apart from
    /// the interior census.
    pub center_fixed: Option<bool>,
}

impl Census {
    pub fn total(&self) -> usize {
        self.points.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("period,x,y,residual\n");
        for p in &self.points {
            s.push_str(&format!("{},{:.17e},{:.17e},{:.3e}\n", p.period, p.x, p.y, p.residual));
        }
        s
    }
}

/// Grid of `resolution²` points on `[-extent, extent]²`, endpoints included,
/// so that resolution `2N − 1` contains the grid of resolution `N`.
pub fn grid(domain: &Domain, resolution: usize) -> Vec<[f64; 2]> {
    let e = domain.extent();
    let n = resolution.max(2);
    let h = 2.0 * e / (n - 1) as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = [-e + j as f64 * h, -e + i as f64 * h];
            if domain.contains(p, 0.0) {
                out.push(p);
            }
        }
    }
    out
}

fn displacement(map: &SurfaceMap, p: [f64; 2], q: u32) -> Result<[f64; 2]> {
    let x = map.iterate(p, q)?;
    Ok([x[0] - p[0], x[1] - p[1]])
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Levenberg–Marquardt on `f^q(x) − x`, at most 50 iterations.
fn refine(map: &SurfaceMap, seed: [f64; 2], q: u32, tol: f64) -> Result<Option<([f64; 2], f64)>> {
    let mut x = seed;
    let mut fx = displacement(map, x, q)?;
    let mut lambda = 1e-9;
    for _ in 0..MAX_REFINE_ITERATIONS {
        if norm(fx) < 1e-2 * tol {
            break;
        }
        let j = match jacobian(&|p| displacement(map, p, q), x, 1e-7) {
            Ok(j) => j,
            Err(_) => return Ok(None),
        };
        // Normal equations (JᵀJ + λI) δ = −Jᵀ F.
        let a = j[0][0] * j[0][0] + j[1][0] * j[1][0];
        let b = j[0][0] * j[0][1] + j[1][0] * j[1][1];
        let d = j[0][1] * j[0][1] + j[1][1] * j[1][1];
        let g0 = j[0][0] * fx[0] + j[1][0] * fx[1];
        let g1 = j[0][1] * fx[0] + j[1][1] * fx[1];
        let scale = (a + d).max(1e-300);
        let mut improved = false;
        for _ in 0..12 {
            let l = lambda * scale;
            let det = (a + l) * (d + l) - b * b;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let dx = -((d + l) * g0 - b * g1) / det;
            let dy = -((a + l) * g1 - b * g0) / det;
            let cand = [x[0] + dx, x[1] + dy];
            if !map.domain.contains(cand, 0.0) {
                lambda *= 10.0;
                continue;
            }
            let fc = displacement(map, cand, q)?;
            if norm(fc) < norm(fx) {
                x = cand;
                fx = fc;
                lambda = (lambda * 0.1).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let r = norm(fx);
    Ok((r < tol).then_some((x, r)))
}

fn minimal_period(map: &SurfaceMap, x: [f64; 2], q: u32, tol: f64) -> Result<u32> {
    for d in 1..q {
        if q % d == 0 && norm(displacement(map, x, d)?) < tol {
            return Ok(d);
        }
    }
    Ok(q)
}

const CENTER_RADIUS: f64 = 1e-6;

fn seed_candidates(map: &SurfaceMap, p: [f64; 2], max_period: u32, tol: f64, h: f64) -> Result<Vec<PeriodicPoint>> {
    let mut out = Vec::new();
    let mut x = p;
    let disk = matches!(map.domain, Domain::Disk { .. });
    for q in 1..=max_period {
        x = map.apply(x)?;
        let d = norm([x[0] - p[0], x[1] - p[1]]);
        // A seed within a few grid steps per iterate of a periodic point.
        if d >= tol + 8.0 * h * f64::from(q) {
            continue;
        }
        let found = if d < tol {
            Some((p, d))
        } else {
            refine(map, p, q, tol)?
        };
        let Some((y, r)) = found else { continue };
        // Near a fixed centre or puncture every point moves by less than
        // `tol` once |y| is of order √tol, so such hits certify nothing.
        let exclusion = CENTER_RADIUS.max(tol.sqrt());
        if disk && norm(y) < exclusion {
            continue;
        }
        if !map.domain.contains(y, exclusion) {
            continue;
        }
        out.push(PeriodicPoint {
            x: y[0],
            y: y[1],
            period: minimal_period(map, y, q, tol)?,
            residual: r,
        });
    }
    Ok(out)
}

/// All periodic points of period at most `max_period` reachable from a
/// `resolution × resolution` grid, refined to `|f^q(x) − x| < tol` and
/// deduplicated by orbit. Seeds are processed in parallel and merged in
/// grid order.
pub fn find_periodic_points(map: &SurfaceMap, max_period: u32, resolution: usize, tol: f64) -> Result<Census> {
    map.validate()?;
    if max_period == 0 {
        return Err(EchError::InvalidInput("max period must be at least 1".into()));
    }
    if tol <= 0.0 || !tol.is_finite() {
        return Err(EchError::InvalidInput("tolerance must be positive".into()));
    }
    let seeds = grid(&map.domain, resolution);
    let h = 2.0 * map.domain.extent() / (resolution.max(2) - 1) as f64;
    let found: Vec<Result<Vec<PeriodicPoint>>> = seeds
        .par_iter()
        .map(|&p| seed_candidates(map, p, max_period, tol, h))
        .collect();

    let radius = (1e3 * tol).max(1e-9);
    let cell = |p: [f64; 2]| ((p[0] / radius).floor() as i64, (p[1] / radius).floor() as i64);
    let mut occupied: HashMap<(i64, i64), Vec<[f64; 2]>> = HashMap::new();
    let mut points = Vec::new();
    let mut counts = BTreeMap::new();
    for batch in found {
        for pt in batch? {
            let y = [pt.x, pt.y];
            let (cx, cy) = cell(y);
            let seen = (-1..=1).any(|dx| {
                (-1..=1).any(|dy| {
                    occupied
                        .get(&(cx + dx, cy + dy))
                        .is_some_and(|v| v.iter().any(|z| norm([z[0] - y[0], z[1] - y[1]]) < radius))
                })
            });
            if seen {
                continue;
            }
            let mut z = y;
            for _ in 0..pt.period {
                occupied.entry(cell(z)).or_default().push(z);
                z = map.apply(z)?;
            }
            *counts.entry(pt.period).or_insert(0) += 1;
            points.push(pt);
        }
    }
    let center_fixed = match map.domain {
        Domain::Disk { .. } => Some(norm(map.apply([0.0, 0.0])?) < tol),
        _ => None,
    };
    Ok(Census {
        max_period,
        resolution,
        tol,
        seeds: seeds.len(),
        points,
        counts,
        center_fixed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FranksVerdict {
    NoneFound,
    InfiniteEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub resolution: usize,
    pub orbits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FranksReport {
    pub verdict: FranksVerdict,
    pub area: AreaStats,
    pub max_period: u32,
    pub tol: f64,
    pub center_fixed: Option<bool>,
    /// Orbit counts at resolutions `N`, `2N − 1`, `4N − 3`.
    pub levels: Vec<RefinementLevel>,
    /// Orbits per minimal period at the finest level.
    pub counts: BTreeMap<u32, usize>,
    /// Counts grow strictly with the resolution.
    pub strict_growth: bool,
}

/// Reports either no periodic points up to `max_period`, or census counts
/// that keep growing as the seed grid is refined. Refuses maps whose area
/// residual exceeds `1e-6` on 100 samples.
pub fn franks_dichotomy_check(
    map: &SurfaceMap,
    max_period: u32,
    resolution: usize,
    tol: f64,
    seed: u64,
) -> Result<FranksReport> {
    map.validate()?;
    let samples = interior_samples(&map.domain, 100, seed, 1e-3 * map.domain.extent());
    let area = area_preservation_residual(map, &samples)?;
    if !map.declared_area_preserving() || area.max_residual > AREA_TOLERANCE {
        return Err(EchError::Precondition(format!(
            "map is not area-preserving: max |det Df − 1| = {:.3e}",
            area.max_residual
        )));
    }
    let mut levels = Vec::new();
    let mut res = resolution.max(2);
    let mut last = None;
    for _ in 0..3 {
        let c = find_periodic_points(map, max_period, res, tol)?;
        levels.push(RefinementLevel {
            resolution: res,
            orbits: c.total(),
        });
        last = Some(c);
        res = 2 * res - 1;
    }
    let finest = last.expect("three levels");
    let strict_growth = levels.windows(2).all(|w| w[1].orbits > w[0].orbits);
    Ok(FranksReport {
        verdict: if finest.total() == 0 {
            FranksVerdict::NoneFound
        } else {
            FranksVerdict::InfiniteEvidence
        },
        area,
        max_period,
        tol,
        center_fixed: finest.center_fixed,
        levels,
        counts: finest.counts,
        strict_growth,
    })
}
