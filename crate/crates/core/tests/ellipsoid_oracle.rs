mod common;

use common::heap_spectrum;
use echkit::dynamics::{area_preservation_residual, interior_samples, SurfaceMap};
use echkit::ellipsoid::{spectrum_csv, u_sequence_check, volume_asymptotics, EllipsoidModel};
use echkit::{EchError, RealScalar};

fn model(b: &str) -> EllipsoidModel {
    EllipsoidModel::new(RealScalar::integer(1), RealScalar::parse(b).unwrap()).unwrap()
}

#[test]
fn first_generators_of_the_unit_root_two_ellipsoid() {
    let csv = spectrum_csv(&model("sqrt2").spectrum(4).unwrap());
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "k,m,n,action,grading");
    assert_eq!(rows[1], "0,0,0,0,0");
    assert_eq!(rows[2], "1,1,0,1,2");
    assert!(rows[3].starts_with("2,0,1,1.41421356237309504880168872420"), "{}", rows[3]);
    assert_eq!(rows[4], "3,2,0,2,6");
}

#[test]
fn rational_ratio_is_degenerate() {
    assert!(EllipsoidModel::new(RealScalar::integer(1), RealScalar::integer(2)).is_err());
    let m = EllipsoidModel::degenerate(RealScalar::integer(1), RealScalar::integer(2)).unwrap();
    assert!(matches!(m.spectrum(5), Err(EchError::Degenerate(_))));
}

#[test]
fn grading_order_equals_action_order() {
    for b in ["sqrt2", "e-1"] {
        let entries = model(b).spectrum(500).unwrap();
        let mut by_grading = entries.clone();
        by_grading.sort_by_key(|e| e.grading);
        assert_eq!(by_grading, entries, "b = {b}");
        let gradings: Vec<i64> = entries.iter().map(|e| e.grading).collect();
        assert_eq!(gradings, (0..500).map(|i| 2 * i).collect::<Vec<i64>>(), "b = {b}");
    }
}

#[test]
fn spectrum_matches_heap_merge_and_grid() {
    for (b, bf) in [("sqrt2", std::f64::consts::SQRT_2), ("e-1", std::f64::consts::E - 1.0)] {
        let k = 10_000;
        let entries = model(b).spectrum(k).unwrap();
        let got: Vec<(u32, u32)> = entries.iter().map(|e| (e.m, e.n)).collect();
        assert_eq!(got, heap_spectrum(1.0, bf, k), "b = {b}");
        let mut grid = Vec::new();
        for m in 0..160u32 {
            for n in 0..160u32 {
                grid.push((f64::from(m) + f64::from(n) * bf, m, n));
            }
        }
        grid.sort_by(|x, y| x.0.total_cmp(&y.0));
        let small: Vec<(u32, u32)> = grid.iter().take(2000).map(|g| (g.1, g.2)).collect();
        assert_eq!(got[..2000], small[..]);
    }
}

#[test]
fn u_sequence_steps() {
    let r = u_sequence_check(&model("sqrt2"), 300).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn growth_exponent_is_one_half() {
    let r = volume_asymptotics(&model("sqrt2"), 100_000).unwrap();
    let e = r.exponent.unwrap();
    assert!((0.49..=0.51).contains(&e), "exponent {e}");
    assert!(r.deviation_decreasing);
    assert!(r.final_deviation <= 0.02);
    assert_eq!(r.converged, Some(true));
    assert!(volume_asymptotics(&model("sqrt2"), 5).is_err());
}

#[test]
fn reeb_flow_stays_on_boundary_and_returns() {
    let m = model("sqrt2");
    let p = m.page_point((0.2, -0.1)).unwrap();
    assert!(m.boundary_defect(&p).abs() < 1e-12);
    let q = m.reeb_flow(&p, 0.77).unwrap();
    assert!(m.boundary_defect(&q).abs() < 1e-12);
    let (closed, t) = m.return_map((0.2, -0.1)).unwrap();
    let (numeric, tn) = m.return_map_integrated((0.2, -0.1), 2000).unwrap();
    assert!((t - tn).abs() < 1e-8);
    assert!((closed.0 - numeric.0).abs() < 1e-8 && (closed.1 - numeric.1).abs() < 1e-8);
    // rotation of the page by 2π·a/b
    let angle = closed.1.atan2(closed.0) - (-0.1f64).atan2(0.2);
    let turns = (angle / std::f64::consts::TAU).rem_euclid(1.0);
    assert!((turns - (1.0 / std::f64::consts::SQRT_2)).abs() < 1e-12);
    assert!(m.reeb_flow(&[1.0, 0.0, 0.0, 0.0], 0.1).is_err());
}

#[test]
fn return_map_preserves_area() {
    let m = SurfaceMap::ellipsoid(RealScalar::integer(1), RealScalar::parse("sqrt2").unwrap()).unwrap();
    let pts = interior_samples(&m.domain, 100, 7, 1e-3);
    let s = area_preservation_residual(&m, &pts).unwrap();
    assert!(s.max_residual < 1e-6, "{s:?}");
}
