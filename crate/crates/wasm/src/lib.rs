//! Browser bindings. Every export takes plain strings and numbers and
//! returns a JSON string; failures come back as `{"error": "..."}`.

use echkit::dynamics::{Domain, SurfaceMap};
use echkit::ellipsoid::EllipsoidModel;
use echkit::partitions::{negative_partition, positive_partition};
use echkit::RealScalar;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_M: u32 = 400;
const MAX_K: usize = 20_000;
const MAX_STEPS: u32 = 5_000;

fn parse(s: &str) -> Result<RealScalar, String> {
    RealScalar::parse(s).map_err(|e| e.to_string())
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

pub fn lattice_paths_value(theta: &str, m: u32) -> Result<Value, String> {
    if m == 0 || m > MAX_M {
        return Err(format!("m must be in 1..={MAX_M}"));
    }
    let th = parse(theta)?;
    let (pp, up) = positive_partition(&th, m).map_err(|e| e.to_string())?;
    let (pn, down) = negative_partition(&th, m).map_err(|e| e.to_string())?;
    Ok(json!({
        "theta": th.to_f64(),
        "m": m,
        "pplus": pp.parts,
        "pminus": pn.parts,
        "upper": up.vertices,
        "lower": down.vertices,
    }))
}

pub fn spectrum_curve_value(a: &str, b: &str, k: usize) -> Result<Value, String> {
    if !(2..=MAX_K).contains(&k) {
        return Err(format!("K must be in 2..={MAX_K}"));
    }
    let model = EllipsoidModel::new(parse(a)?, parse(b)?).map_err(|e| e.to_string())?;
    let entries = model.spectrum(k).map_err(|e| e.to_string())?;
    let stride = (k / 400).max(1);
    let points: Vec<[f64; 2]> = entries
        .iter()
        .skip(1)
        .step_by(stride)
        .map(|e| {
            let n = e.action.to_f64();
            [e.k as f64, n * n / (2.0 * e.k as f64)]
        })
        .collect();
    let first: Vec<Value> = entries
        .iter()
        .take(12)
        .map(|e| json!({"k": e.k, "m": e.m, "n": e.n, "action": e.action.to_decimal(12), "grading": e.grading}))
        .collect();
    Ok(json!({
        "volume": model.volume().to_f64(),
        "ratios": points,
        "first": first,
    }))
}

pub fn return_map_orbit_value(a: &str, b: &str, x: f64, y: f64, steps: u32) -> Result<Value, String> {
    if steps > MAX_STEPS {
        return Err(format!("at most {MAX_STEPS} steps"));
    }
    let map = SurfaceMap::ellipsoid(parse(a)?, parse(b)?).map_err(|e| e.to_string())?;
    let radius = match map.domain {
        Domain::Disk { radius } => radius,
        _ => unreachable!("ellipsoid pages are disks"),
    };
    if x.hypot(y) >= radius {
        return Err(format!("start point must lie inside the page of radius {radius:.6}"));
    }
    let mut p = [x, y];
    let mut orbit = vec![p];
    for _ in 0..steps {
        p = map.apply(p).map_err(|e| e.to_string())?;
        orbit.push(p);
    }
    Ok(json!({ "radius": radius, "orbit": orbit }))
}

/// `p±` and both lattice paths for rotation number `theta` and multiplicity `m`.
#[wasm_bindgen]
pub fn lattice_paths(theta: &str, m: u32) -> String {
    respond(lattice_paths_value(theta, m))
}

/// `N_k²/(2k)` along the first `k` generators of the ellipsoid `E(a, b)`.
#[wasm_bindgen]
pub fn spectrum_curve(a: &str, b: &str, k: usize) -> String {
    respond(spectrum_curve_value(a, b, k))
}

/// Iterates of the page return map starting at `(x, y)`.
#[wasm_bindgen]
pub fn return_map_orbit(a: &str, b: &str, x: f64, y: f64, steps: u32) -> String {
    respond(return_map_orbit_value(a, b, x, y, steps))
}
