use dirac_core::evolution::*;
use dirac_core::grid::{Grid, Representation, SpinorField, Trajectory};
use dirac_core::multiplier::Sign;
use dirac_core::null_frame::NullFrame;
use dirac_core::spacetime::SpaceTimeField;
use dirac_core::spinor::{Direction, Model};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: &std::sync::Arc<Grid>, comps: usize, kmax: f64, seed: u64) -> SpinorField {
    let rng = std::cell::RefCell::new(ChaCha8Rng::seed_from_u64(seed));
    let mut f = SpinorField::from_spectrum(grid, comps, |xi, out| {
        let k: f64 = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        for o in out.iter_mut() {
            *o = if k > 0.0 && k <= kmax {
                {
                    let mut r = rng.borrow_mut();
                    C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
                }
            } else {
                C64::new(0.0, 0.0)
            };
        }
    });
    f.to_physical();
    f
}

fn gaussian(grid: &std::sync::Arc<Grid>, width: f64) -> SpinorField {
    SpinorField::from_fn(grid, 2, |x, out| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let g = (-r2 / (2.0 * width * width)).exp();
        out[0] = C64::new(g, 0.0);
        out[1] = C64::new(0.5 * g * x[0], 0.2 * g);
    })
}

#[test]
fn free_flow_is_unitary_and_a_group() {
    let grid = Grid::new(2, 32, 20.0).unwrap();
    let f = random_field(&grid, 2, 8.0, 1);
    for sign in [Sign::Plus, Sign::Minus] {
        let a = free_evolve(&f, 1.3, sign).unwrap();
        assert!((a.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-13);
        let b = free_evolve(&free_evolve(&f, 0.4, sign).unwrap(), 0.9, sign).unwrap();
        assert!(a.sub(&b).unwrap().l2_norm() / f.l2_norm() < 1e-13);
        let back = free_evolve(&a, -1.3, sign).unwrap();
        assert!(back.sub(&f).unwrap().l2_norm() / f.l2_norm() < 1e-13);
    }
}

#[test]
fn beta_intertwines_the_two_flows() {
    let grid = Grid::new(2, 16, 10.0).unwrap();
    let f = random_field(&grid, 2, 4.0, 2);
    let beta = |g: &SpinorField| {
        let mut h = g.physical();
        let np = grid.points();
        for z in &mut h.data_mut()[np..] {
            *z = -*z;
        }
        h
    };
    let lhs = free_evolve(&beta(&f), 0.8, Sign::Plus).unwrap();
    let rhs = beta(&free_evolve(&f, 0.8, Sign::Minus).unwrap());
    assert!(lhs.sub(&rhs).unwrap().l2_norm() < 1e-12);
}

#[test]
fn one_dimensional_flow_translates_components() {
    let grid = Grid::new(1, 128, 40.0).unwrap();
    let bump = |x: f64| (-(x * x)).exp();
    let f = SpinorField::from_fn(&grid, 2, |x, out| {
        out[0] = C64::new(bump(x[0]), 0.0);
        out[1] = C64::new(0.0, bump(x[0]));
    });
    let t = 3.125; // exactly 10 grid cells
    let g = free_evolve(&f, t, Sign::Plus).unwrap();
    for idx in 0..grid.points() {
        let x = grid.position(idx)[0];
        assert!((g.data()[idx] - C64::new(bump(x - t), 0.0)).norm() < 1e-12);
        assert!((g.data()[grid.points() + idx] - C64::new(0.0, bump(x + t))).norm() < 1e-12);
    }
}

#[test]
fn massive_flow_conserves_charge_and_matches_massless_limit() {
    let grid = Grid::new(2, 16, 10.0).unwrap();
    let f = random_field(&grid, 2, 4.0, 3);
    let a = evolve_blocks(&f, &[LinearFlow::Dirac2 { sign: Sign::Plus, mass: 0.7 }], 2.0).unwrap();
    assert!((a.l2_norm() / f.l2_norm() - 1.0).abs() < 1e-13);
    let b = evolve_blocks(&f, &[LinearFlow::Dirac2 { sign: Sign::Plus, mass: 0.0 }], 2.0).unwrap();
    let c = free_evolve(&f, 2.0, Sign::Plus).unwrap();
    assert!(b.sub(&c).unwrap().l2_norm() < 1e-13);
}

#[test]
fn resonant_duhamel_grows_linearly() {
    let grid = Grid::new(2, 16, 10.0).unwrap();
    let h = random_field(&grid, 2, 2.0, 4);
    let dt = 0.02;
    let forcing = free_trajectory(&h, Sign::Plus, 0.0, dt, 51).unwrap();
    let u = duhamel(&forcing, Sign::Plus).unwrap();
    for k in [10, 25, 50] {
        let t = u.time(k);
        let mut expect = forcing.frame(k).clone();
        expect.scale(C64::from(t));
        let err = u.frame(k).sub(&expect).unwrap().l2_norm() / expect.l2_norm();
        assert!(err < 1e-12, "t = {t}: {err}");
    }
}

#[test]
fn duhamel_needs_four_frames() {
    let grid = Grid::new(1, 8, 6.0).unwrap();
    let h = random_field(&grid, 2, 2.0, 5);
    let forcing = free_trajectory(&h, Sign::Plus, 0.0, 0.1, 3).unwrap();
    assert!(duhamel(&forcing, Sign::Plus).is_err());
}

fn trig_forcing(grid: &std::sync::Arc<Grid>, frames: usize, period: f64) -> SpaceTimeField {
    // A few space-time modes at integer (τ, ξ), away from the cone and the null plane of ω = e₁.
    let modes: [(f64, [f64; 2], [C64; 2]); 4] = [
        (2.0, [1.0, 0.0], [C64::new(1.0, 0.0), C64::new(0.0, 0.5)]),
        (-2.0, [0.0, 1.0], [C64::new(0.3, -0.2), C64::new(1.0, 0.0)]),
        (0.0, [1.0, 1.0], [C64::new(0.0, 1.0), C64::new(-0.4, 0.0)]),
        (1.0, [-2.0, 1.0], [C64::new(0.5, 0.5), C64::new(0.2, 0.0)]),
    ];
    SpaceTimeField::from_fn(grid, 2, 0.0, period / frames as f64, frames, |t, x, out| {
        out[0] = C64::new(0.0, 0.0);
        out[1] = C64::new(0.0, 0.0);
        for (tau, xi, a) in &modes {
            let ph = C64::from_polar(1.0, tau * t + xi[0] * x[0] + xi[1] * x[1]);
            out[0] += a[0] * ph;
            out[1] += a[1] * ph;
        }
    })
    .unwrap()
}

#[test]
fn null_fundamental_solution_solves_the_equation() {
    let pi = std::f64::consts::PI;
    let grid = Grid::new(2, 16, 2.0 * pi).unwrap();
    let forcing = trig_forcing(&grid, 32, 2.0 * pi);
    let frame = NullFrame::new(Direction::new(&[1.0, 0.0]).unwrap());
    let sol = null_fundamental_solution(&forcing, &frame, Sign::Plus, 1e-6).unwrap();
    assert!(dirac_residual(&sol.u, &forcing, Sign::Plus).unwrap() < 1e-12);
    assert!(elliptic_residual(&sol.u, &forcing, &frame, Sign::Plus).unwrap() < 1e-12);
    assert!(sol.min_null_plane_distance > 0.1);
}

#[test]
fn null_fundamental_solution_agrees_with_duhamel() {
    let pi = std::f64::consts::PI;
    let grid = Grid::new(2, 16, 2.0 * pi).unwrap();
    let frames = 512;
    let forcing = trig_forcing(&grid, frames, 2.0 * pi);
    let frame = NullFrame::new(Direction::new(&[0.6, 0.8]).unwrap());
    let sol = null_fundamental_solution(&forcing, &frame, Sign::Plus, 1e-6).unwrap();
    let u = sol.u.to_trajectory().unwrap();
    let duh = duhamel(&forcing.to_trajectory().unwrap(), Sign::Plus).unwrap();
    let u0 = u.frame(0).clone();
    let mut worst: f64 = 0.0;
    for k in (0..frames).step_by(17) {
        let free = free_evolve(&u0, u.time(k), Sign::Plus).unwrap();
        let diff = u.frame(k).sub(&free).unwrap().sub(duh.frame(k)).unwrap();
        worst = worst.max(diff.l2_norm() / duh.frame(frames - 1).l2_norm().max(1.0));
    }
    assert!(worst < 1e-7, "{worst}");
}

#[test]
fn null_fundamental_solution_rejects_the_null_plane() {
    let pi = std::f64::consts::PI;
    let grid = Grid::new(2, 8, 2.0 * pi).unwrap();
    // τ = ξ₁ = 1 lies on the null plane of ω = e₁.
    let forcing = SpaceTimeField::from_fn(&grid, 2, 0.0, 2.0 * pi / 16.0, 16, |t, x, out| {
        out[0] = C64::from_polar(1.0, t + x[0]);
        out[1] = C64::new(0.0, 0.0);
    })
    .unwrap();
    let frame = NullFrame::new(Direction::new(&[1.0, 0.0]).unwrap());
    let err = null_fundamental_solution(&forcing, &frame, Sign::Plus, 1e-6).unwrap_err();
    assert!(matches!(err, dirac_core::LabError::SingularDivision { .. }));
}

#[test]
fn traveling_waves_reassemble_the_free_flow() {
    let grid = Grid::new(2, 32, 24.0).unwrap();
    let g = gaussian(&grid, 1.5);
    let dec = traveling_wave_decompose(&g, 96).unwrap();
    for t in [0.0, 1.5] {
        let err = dec.reassembly_error(&g, t).unwrap();
        assert!(err < 1e-4, "t = {t}: {err}");
    }
    assert!(traveling_wave_decompose(&g, 4).is_err());
}

#[test]
fn nonlinear_solver_conserves_charge_and_zero() {
    let grid = Grid::new(2, 32, 20.0).unwrap();
    let spec = ModelSpec { n: 2, model: Model::Soler, mass: 0.0, epsilon: 0.5, formulation: Formulation::PsiForm, mass_treatment: MassTreatment::LinearFlow };
    let data = gaussian(&grid, 2.0);
    let opts = SolveOptions::new(0.02, 40, 10);
    let sol = nonlinear_solve(&spec, &data, &opts).unwrap();
    assert!(sol.breakdown.is_none());
    assert!(sol.charge_drift < 1e-10, "{}", sol.charge_drift);
    assert_eq!(sol.trajectory.len(), 5);

    let zero = SpinorField::zeros(&grid, 2, Representation::Physical);
    let z = nonlinear_solve(&spec, &zero, &opts).unwrap();
    assert!(z.trajectory.frames().iter().all(|f| f.l2_norm() == 0.0));
}

#[test]
fn uv_form_matches_psi_form_in_three_dimensions() {
    let grid = Grid::new(3, 16, 16.0).unwrap();
    let u = gaussian(&grid, 1.5);
    let mut v = gaussian(&grid, 1.2);
    v.scale(C64::new(0.0, 0.5));
    let np = grid.points();
    let uv = stack_fields(&[&u, &v]).unwrap();
    let mut psi = vec![C64::new(0.0, 0.0); 4 * np];
    for idx in 0..np {
        for c in 0..2 {
            psi[c * np + idx] = u.data()[c * np + idx] + v.data()[c * np + idx];
            psi[(c + 2) * np + idx] = u.data()[c * np + idx] - v.data()[c * np + idx];
        }
    }
    let psi = SpinorField::from_data(&grid, 4, Representation::Physical, psi).unwrap();
    for model in [Model::Soler, Model::Thirring] {
        let opts = SolveOptions::new(0.05, 10, 10);
        let mk = |formulation| ModelSpec { n: 3, model, mass: 0.0, epsilon: 0.5, formulation, mass_treatment: MassTreatment::LinearFlow };
        let a = nonlinear_solve(&mk(Formulation::UvForm), &uv, &opts).unwrap();
        let b = nonlinear_solve(&mk(Formulation::PsiForm), &psi, &opts).unwrap();
        let fa = a.trajectory.frame(1);
        let fb = b.trajectory.frame(1);
        let mut err: f64 = 0.0;
        for idx in 0..np {
            for c in 0..2 {
                let (uu, vv) = (fa.data()[c * np + idx], fa.data()[(c + 2) * np + idx]);
                err = err.max((uu + vv - fb.data()[c * np + idx]).norm());
                err = err.max((uu - vv - fb.data()[(c + 2) * np + idx]).norm());
            }
        }
        assert!(err < 1e-12, "{model:?}: {err}");
    }
}

#[test]
fn two_dimensional_uv_form_matches_psi_form() {
    let grid = Grid::new(2, 16, 12.0).unwrap();
    let u = gaussian(&grid, 1.5);
    let v = SpinorField::zeros(&grid, 2, Representation::Physical);
    let uv = stack_fields(&[&u, &v]).unwrap();
    let opts = SolveOptions::new(0.05, 10, 10);
    let mk = |formulation| ModelSpec { n: 2, model: Model::Soler, mass: 0.0, epsilon: 1.0, formulation, mass_treatment: MassTreatment::LinearFlow };
    let a = nonlinear_solve(&mk(Formulation::UvForm), &uv, &opts).unwrap();
    let b = nonlinear_solve(&mk(Formulation::PsiForm), &u, &opts).unwrap();
    let ua = a.components(0, 2).unwrap();
    assert!(ua.frame(1).sub(b.trajectory.frame(1)).unwrap().l2_norm() < 1e-12);
}

#[test]
fn mass_treatments_agree() {
    let grid = Grid::new(2, 16, 12.0).unwrap();
    let u = gaussian(&grid, 1.5);
    let opts = SolveOptions::new(0.01, 50, 50);
    let mk = |mass_treatment| ModelSpec { n: 2, model: Model::Soler, mass: 0.5, epsilon: 0.5, formulation: Formulation::PsiForm, mass_treatment };
    let a = nonlinear_solve(&mk(MassTreatment::LinearFlow), &u, &opts).unwrap();
    let b = nonlinear_solve(&mk(MassTreatment::Perturbation), &u, &opts).unwrap();
    let d = a.trajectory.frame(1).sub(b.trajectory.frame(1)).unwrap().l2_norm() / a.trajectory.frame(1).l2_norm();
    assert!(d < 1e-7, "{d}");
}

#[test]
fn checkpoint_resume_reproduces_the_run() {
    let grid = Grid::new(2, 32, 16.0).unwrap();
    let u = gaussian(&grid, 1.5);
    let spec =
        ModelSpec { n: 2, model: Model::Thirring, mass: 0.0, epsilon: 1.0, formulation: Formulation::PsiForm, mass_treatment: MassTreatment::LinearFlow };
    let dir = tempfile::tempdir().unwrap();
    let ck = CheckpointSpec { dir: dir.path().to_path_buf(), stride: 5, key: "run".into() };
    let mut full = SolveOptions::new(0.05, 20, 5);
    full.checkpoint = Some(ck.clone());
    let reference = nonlinear_solve(&spec, &u, &full).unwrap();
    // Pretend the run was interrupted after step 10.
    for step in [15, 20] {
        std::fs::remove_file(dir.path().join(format!("run-{step:08}.snap"))).unwrap();
    }
    let mut resumed_opts = full.clone();
    resumed_opts.resume = true;
    let resumed = nonlinear_solve(&spec, &u, &resumed_opts).unwrap();
    assert_eq!(resumed.resumed_from, Some(10));
    let last_a = reference.trajectory.frame(reference.trajectory.len() - 1);
    let last_b = resumed.trajectory.frame(resumed.trajectory.len() - 1);
    assert_eq!(last_a.data(), last_b.data());
}

#[test]
fn invalid_models_are_rejected() {
    let grid = Grid::new(2, 8, 6.0).unwrap();
    let u = SpinorField::zeros(&grid, 4, Representation::Physical);
    let bad = ModelSpec { n: 2, model: Model::Soler, mass: 1.0, epsilon: 1.0, formulation: Formulation::UvForm, mass_treatment: MassTreatment::LinearFlow };
    assert!(nonlinear_solve(&bad, &u, &SolveOptions::new(0.1, 1, 1)).is_err());
    let one_d = ModelSpec { n: 1, formulation: Formulation::PsiForm, mass: 0.0, ..bad };
    assert!(one_d.validate().is_err());
    let _ = Trajectory::new(0.0, 1.0, vec![u.clone(), u]).unwrap();
}
