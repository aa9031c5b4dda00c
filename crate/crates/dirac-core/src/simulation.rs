//! Configured nonlinear simulations: data assembly, checkpointed solve,
//! charge series and the `n = 3` formulation-equivalence check.

use num_complex::Complex64 as C64;
use std::io::Write;
use std::path::Path;

use crate::config::SimulationConfig;
use crate::data::{generate, generate_pair, generate_psi3, DataSpec};
use crate::error::{LabError, Result};
use crate::evolution::{nonlinear_solve, CheckpointSpec, Formulation, ModelSpec, Solution, SolveOptions};
use crate::grid::{Grid, SpinorField, Trajectory};

/// Columns of the charge-series CSV.
pub const CHARGE_COLUMNS: [&str; 4] = ["frame", "time", "charge", "relative_drift"];

/// Result of a configured simulation.
#[derive(Debug)]
pub struct SimulationOutcome {
    /// The solve in the configured formulation.
    pub solution: Solution,
    /// Largest relative difference between the `(u, v)` and ψ formulations
    /// over the recorded frames (equivalence runs only).
    pub divergence: Option<f64>,
}

/// Assemble the stacked initial data of `sim` for `formulation`.
pub fn initial_data(sim: &SimulationConfig, formulation: Formulation, seed: u64) -> Result<SpinorField> {
    let grid = Grid::from_spec(&sim.grid)?;
    match (formulation, sim.model.n) {
        (Formulation::UvForm, _) => generate_pair(&grid, &sim.u, &sim.v, seed),
        (Formulation::PsiForm, 3) => generate_psi3(&grid, &sim.u, &sim.v, seed),
        (Formulation::PsiForm, _) => {
            if sim.v != DataSpec::Zero {
                return Err(LabError::config("simulation.v", "the two-dimensional ψ-form takes a single datum `u`"));
            }
            generate(&grid, &sim.u, seed)
        }
    }
}

fn options(sim: &SimulationConfig, checkpoint: Option<CheckpointSpec>, resume: bool) -> SolveOptions {
    let mut opts = SolveOptions::new(sim.dt, sim.steps, sim.record_every);
    opts.checkpoint = checkpoint;
    opts.resume = resume;
    opts
}

/// Run a configured simulation. With `checkpoints = Some((dir, key))` the
/// state is written every `checkpoint_every` steps as `dir/key-<step>.snap`,
/// and `resume` continues from the latest such file.
pub fn run_simulation(sim: &SimulationConfig, seed: u64, checkpoints: Option<(&Path, &str)>, resume: bool) -> Result<SimulationOutcome> {
    let data = initial_data(sim, sim.model.formulation, seed)?;
    let ck =
        checkpoints.map(|(dir, key)| CheckpointSpec { dir: dir.to_path_buf(), stride: sim.checkpoint_every.unwrap_or(sim.record_every), key: key.to_string() });
    let solution = nonlinear_solve(&sim.model, &data, &options(sim, ck, resume))?;
    let divergence = if sim.equivalence {
        let other_form = match sim.model.formulation {
            Formulation::UvForm => Formulation::PsiForm,
            Formulation::PsiForm => Formulation::UvForm,
        };
        let other_spec = ModelSpec { formulation: other_form, ..sim.model };
        let other_data = initial_data(sim, other_form, seed)?;
        let other = nonlinear_solve(&other_spec, &other_data, &options(sim, None, false))?;
        let (uv, psi) = match sim.model.formulation {
            Formulation::UvForm => (&solution.trajectory, &other.trajectory),
            Formulation::PsiForm => (&other.trajectory, &solution.trajectory),
        };
        // A resumed run records only the frames after the checkpoint: compare the common tail.
        let skip = psi.len().saturating_sub(uv.len());
        let skip_uv = uv.len().saturating_sub(psi.len());
        Some(formulation_divergence(uv, psi, skip_uv, skip)?)
    } else {
        None
    };
    Ok(SimulationOutcome { solution, divergence })
}

/// Largest relative difference `‖(u + v, u − v) − ψ‖/‖ψ‖` over the common frames.
pub fn formulation_divergence(uv: &Trajectory, psi: &Trajectory, skip_uv: usize, skip_psi: usize) -> Result<f64> {
    let frames = (uv.len() - skip_uv).min(psi.len() - skip_psi);
    let mut worst: f64 = 0.0;
    for k in 0..frames {
        let a = uv.frame(k + skip_uv).physical();
        let b = psi.frame(k + skip_psi).physical();
        if a.comps() != 4 || b.comps() != 4 {
            return Err(LabError::Shape("equivalence needs four-component states".into()));
        }
        let np = a.grid().points();
        let (mut diff, mut norm) = (0.0, 0.0);
        for idx in 0..np {
            for c in 0..2 {
                let (u, v) = (a.data()[c * np + idx], a.data()[(c + 2) * np + idx]);
                let (p, m): (C64, C64) = (b.data()[c * np + idx], b.data()[(c + 2) * np + idx]);
                diff += (u + v - p).norm_sqr() + (u - v - m).norm_sqr();
                norm += p.norm_sqr() + m.norm_sqr();
            }
        }
        if norm > 0.0 {
            worst = worst.max((diff / norm).sqrt());
        } else {
            worst = worst.max(diff.sqrt());
        }
    }
    Ok(worst)
}

/// Write the charge series of a solution as CSV (columns [`CHARGE_COLUMNS`]).
pub fn write_charge_csv(w: impl Write, solution: &Solution) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CHARGE_COLUMNS)?;
    let q0 = solution.charge.first().copied().unwrap_or(0.0);
    let t0 = solution.trajectory.t0();
    let dt = solution.trajectory.dt();
    for (k, q) in solution.charge.iter().enumerate() {
        let drift = if q0 > 0.0 { (q - q0).abs() / q0 } else { 0.0 };
        out.write_record([k.to_string(), format!("{:.10e}", t0 + k as f64 * dt), format!("{q:.16e}"), format!("{drift:.6e}")])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::spinor::Model;

    fn zero_sim() -> SimulationConfig {
        SimulationConfig {
            grid: GridSpec { n: 2, points: 16, length: 8.0 },
            model: ModelSpec { n: 2, model: Model::Soler, mass: 0.0, epsilon: 1.0, formulation: Formulation::UvForm, mass_treatment: Default::default() },
            u: DataSpec::Zero,
            v: DataSpec::Zero,
            dt: 0.1,
            steps: 6,
            record_every: 2,
            checkpoint_every: None,
            equivalence: false,
        }
    }

    #[test]
    fn zero_data_give_zero_states_and_no_drift() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_simulation(&zero_sim(), 1, Some((dir.path(), "z")), false).unwrap();
        assert_eq!(out.solution.charge_drift, 0.0);
        assert!(out.solution.trajectory.frames().iter().all(|f| f.l2_norm() == 0.0));
        let mut snaps = 0;
        for e in std::fs::read_dir(dir.path()).unwrap() {
            let (f, _) = SpinorField::load(&e.unwrap().path()).unwrap();
            assert_eq!(f.l2_norm(), 0.0);
            snaps += 1;
        }
        assert_eq!(snaps, 3);
        let mut csv = Vec::new();
        write_charge_csv(&mut csv, &out.solution).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 5);
    }

    #[test]
    fn two_dimensional_psi_form_takes_one_datum() {
        let mut sim = zero_sim();
        sim.model.formulation = Formulation::PsiForm;
        sim.v = DataSpec::RandomBand { lambda: 2.0, sobolev: 0.0, sheet: None, sector: None, l2_norm: None };
        assert!(matches!(initial_data(&sim, Formulation::PsiForm, 0), Err(LabError::Config { .. })));
    }
}
