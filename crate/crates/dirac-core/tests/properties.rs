//! Property tests for the structural invariants of the library: algebraic
//! identities, coordinate round trips, norm homogeneity, unitarity of the
//! free flow, the p-variation dynamic programme and configuration hashing.

use dirac_core::config::RunConfig;
use dirac_core::data::{generate, DataSpec};
use dirac_core::estimates::vp_enumerate;
use dirac_core::evolution::free_evolve;
use dirac_core::fit::power_law_fit;
use dirac_core::grid::{read_snapshot, write_snapshot, Grid};
use dirac_core::manifest::config_hash;
use dirac_core::multiplier::Sign;
use dirac_core::norms::{lp_norm, vp_variation_by};
use dirac_core::null_frame::NullFrame;
use dirac_core::spinor::{fierz_check, projection_residuals, Direction};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn spinor(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

fn direction(n: usize) -> impl Strategy<Value = Direction> {
    prop::collection::vec(-1.0f64..1.0, n)
        .prop_filter("non-degenerate", |v| v.iter().map(|a| a * a).sum::<f64>() > 1e-4)
        .prop_map(|v| Direction::normalized(&v).unwrap())
}

fn band(lambda: f64) -> DataSpec {
    DataSpec::RandomBand { lambda, sobolev: 0.0, sheet: None, sector: None, l2_norm: Some(1.0) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fierz_identity_holds_for_any_spinor(psi2 in spinor(2), psi3 in spinor(4)) {
        let n2 = psi2.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
        let n3 = psi3.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-3);
        prop_assert!(fierz_check(&psi2, 2).unwrap() <= 1e-12 * n2.powi(3).max(1.0));
        prop_assert!(fierz_check(&psi3, 3).unwrap() <= 1e-12 * n3.powi(3).max(1.0));
    }

    #[test]
    fn projections_are_complementary_idempotents(w2 in direction(2), w3 in direction(3)) {
        prop_assert!(projection_residuals(&w2).max() <= 1e-15);
        prop_assert!(projection_residuals(&w3).max() <= 1e-15);
    }

    #[test]
    fn null_coordinates_round_trip(omega in direction(3), t in -10.0f64..10.0, x in prop::collection::vec(-10.0f64..10.0, 3)) {
        let frame = NullFrame::new(omega);
        let (t2, x2) = frame.from_null(&frame.to_null(t, &x));
        prop_assert!((t2 - t).abs() <= 1e-11);
        for j in 0..3 {
            prop_assert!((x2[j] - x[j]).abs() <= 1e-11);
        }
        let d = frame.to_dual_null(t, &x);
        let symbol = t * t - x.iter().map(|a| a * a).sum::<f64>();
        let null_symbol = 2.0 * d.tau_omega * d.xi1 - d.xi_perp.iter().map(|a| a * a).sum::<f64>();
        prop_assert!((symbol - null_symbol).abs() <= 1e-11);
    }

    #[test]
    fn variation_dp_matches_enumeration(points in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..9), p in 1.0f64..3.0) {
        let dist = |i: usize, j: usize| ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt();
        let dp = vp_variation_by(points.len(), p, dist);
        let brute = vp_enumerate(points.len(), p, dist);
        prop_assert!((dp - brute).abs() <= 1e-12 * brute.max(1.0), "dp {dp} vs enumeration {brute}");
    }

    #[test]
    fn exact_power_laws_are_recovered(exponent in -3.0f64..3.0, scale in 0.1f64..10.0) {
        let x = [1.0, 2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| scale * v.powf(exponent)).collect();
        let fit = power_law_fit(&x, &y).unwrap();
        prop_assert!((fit.slope - exponent).abs() <= 1e-10);
        prop_assert!(fit.r_squared >= 1.0 - 1e-10);
    }

    #[test]
    fn config_hash_ignores_formatting(seed in any::<u64>(), instances in 1usize..5000, p in 1.0f64..4.0) {
        let compact = format!(r#"{{"seed":{seed},"estimates":{{"vp":{{"p":{p},"instances":{instances}}}}}}}"#);
        let spaced = format!("{{\n  \"estimates\": {{ \"vp\": {{ \"instances\": {instances},\n \"p\": {p} }} }},\n  \"seed\": {seed}\n}}");
        let a = RunConfig::from_json(&compact).unwrap();
        let b = RunConfig::from_json(&spaced).unwrap();
        prop_assert_eq!(config_hash(&a), config_hash(&b));
        prop_assert_eq!(RunConfig::from_json(&a.canonical_json()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norms_are_absolutely_homogeneous(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0, p in 1.0f64..8.0) {
        let grid = Grid::new(2, 16, 8.0).unwrap();
        let f = generate(&grid, &band(2.0), seed).unwrap();
        let c = C64::new(re, im);
        let mut g = f.clone();
        g.scale(c);
        let tol = 1e-12 * (1.0 + c.norm());
        prop_assert!((g.l2_norm() - c.norm() * f.l2_norm()).abs() <= tol);
        prop_assert!((g.sup_norm() - c.norm() * f.sup_norm()).abs() <= tol * f.sup_norm().max(1.0));
        prop_assert!((lp_norm(&g, p) - c.norm() * lp_norm(&f, p)).abs() <= tol * lp_norm(&f, p).max(1.0));
    }

    #[test]
    fn free_flow_is_unitary_and_reversible(seed in any::<u64>(), t in -20.0f64..20.0, plus in any::<bool>()) {
        let grid = Grid::new(2, 16, 8.0).unwrap();
        let f = generate(&grid, &band(2.0), seed).unwrap();
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let forward = free_evolve(&f, t, sign).unwrap();
        prop_assert!((forward.l2_norm() - f.l2_norm()).abs() <= 1e-12);
        let back = free_evolve(&forward, -t, sign).unwrap().physical();
        prop_assert!(back.sub(&f.physical()).unwrap().l2_norm() <= 1e-12);
    }

    #[test]
    fn snapshots_round_trip_bit_exactly(seed in any::<u64>(), time in -100.0f64..100.0) {
        let grid = Grid::new(2, 8, 4.0).unwrap();
        let f = generate(&grid, &band(3.0), seed).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &f, time).unwrap();
        let (g, t) = read_snapshot(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(t.to_bits(), time.to_bits());
        prop_assert_eq!(g.data(), f.data());
        prop_assert_eq!(g.repr(), f.repr());
    }
}
