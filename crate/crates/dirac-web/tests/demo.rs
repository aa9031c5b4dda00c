//! Native checks of the functions behind the browser exports.

use dirac_web::{run_algebra, run_p_variation, run_packet};
use serde_json::Value;

#[test]
fn algebra_rows_pass_clean_and_flag_the_fault() {
    let clean: Value = serde_json::from_str(&run_algebra(100, 3, false).unwrap()).unwrap();
    let rows = clean.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["passed"] == true));
    let faulty: Value = serde_json::from_str(&run_algebra(100, 3, true).unwrap()).unwrap();
    let failed: Vec<&str> = faulty.as_array().unwrap().iter().filter(|r| r["passed"] == false).map(|r| r["identity"].as_str().unwrap()).collect();
    assert_eq!(failed, ["anticommutator(n=2)", "anticommutator(n=3)"]);
    assert!(run_algebra(0, 1, false).is_err());
}

#[test]
fn packet_keeps_its_norm_and_moves_at_unit_speed() {
    let (n, length, k) = (64usize, 32.0, 4.0);
    let start = run_packet(n, length, k, 0.0, 2.0, 0.0, true).unwrap();
    let later = run_packet(n, length, k, 0.0, 2.0, 8.0, true).unwrap();
    assert!((start.initial_l2_norm() - 1.0).abs() < 1e-12);
    assert!((later.l2_norm() - 1.0).abs() < 1e-12);
    // Centre of mass along x in display coordinates.
    let centre = |f: &dirac_web::PacketFrame| {
        let d = f.density();
        let dx = length / n as f64;
        let (mut m, mut total) = (0.0, 0.0);
        for (idx, w) in d.iter().enumerate() {
            let x = ((idx % n) as f64 - (n / 2) as f64) * dx;
            m += w * x;
            total += w;
        }
        m / total
    };
    assert!(centre(&start).abs() < 1e-6);
    let shift = centre(&later).abs();
    assert!((shift - 8.0).abs() < 1.0, "packet moved {shift}");
    assert!(run_packet(4, length, k, 0.0, 2.0, 0.0, true).is_err());
}

#[test]
fn p_variation_agrees_with_enumeration() {
    let values = [0.0, 1.0, -0.5, 2.0, 1.5, 3.0];
    let out: Value = serde_json::from_str(&run_p_variation(&values, 2.0).unwrap()).unwrap();
    assert_eq!(out["dp"], out["enumeration"]);
    // The monotone path 0 → −0.5 → 3 beats the adjacent increments here.
    assert!(out["dp"].as_f64().unwrap() >= 3.5f64.powi(2));
    let long: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
    let out: Value = serde_json::from_str(&run_p_variation(&long, 1.5).unwrap()).unwrap();
    assert!(out["enumeration"].is_null());
    assert!(run_p_variation(&values, 0.5).is_err());
}
