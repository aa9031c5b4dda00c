//! `dirac-lab`: command line driver of the Dirac laboratory.
//!
//! Exit status: 0 all criteria pass, 2 some criterion fails, 3 no failure
//! but some criterion is UNRESOLVED, 4 invalid configuration or usage,
//! 1 any other error.

use anyhow::{Context, Result};
use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use dirac_core::config::RunConfig;
use dirac_core::identities::{algebra_suite, Fault};
use dirac_core::manifest::{check_manifest, config_hash, RunManifest};
use dirac_core::registry::{self, IDS};
use dirac_core::report::{EstimateReport, Status};
use dirac_core::simulation::{run_simulation, write_charge_csv};
use dirac_core::LabError;

const EXIT_FAIL: u8 = 2;
const EXIT_UNRESOLVED: u8 = 3;
const EXIT_CONFIG: u8 = 4;

/// Largest admissible relative charge drift of a nonlinear run.
const CHARGE_TRIPWIRE: f64 = 1e-9;
/// Largest admissible divergence between the two `n = 3` formulations.
const EQUIVALENCE_TOLERANCE: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "dirac-lab", version, about = "Pseudo-spectral laboratory for the massless cubic Dirac equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random component (overrides the configuration's seed and enters the config hash).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the algebraic identities (Fierz, Clifford, projections, null coordinates).
    VerifyAlgebra {
        /// Inject a deliberate fault (`gamma1`) to exercise the failure path.
        #[arg(long)]
        fault_inject: Option<String>,
        /// Random samples per identity.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Integrate the configured nonlinear model with checkpoints and a charge series.
    Simulate {
        /// Run configuration (JSON) with a `simulation` section.
        config: PathBuf,
        /// Continue from the latest checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Run one registered estimate verifier or experiment.
    Verify {
        /// Estimate id.
        #[arg(value_parser = PossibleValuesParser::new(IDS))]
        id: String,
        /// Optional run configuration (JSON).
        config: Option<PathBuf>,
        /// Spatial dimension override (`--n 1` selects the exact one-dimensional cases).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run the estimates listed in a configuration's `campaign` section.
    Campaign {
        /// Run configuration (JSON) with a `campaign` section.
        config: PathBuf,
        /// Print the resolved plan and exit without computing.
        #[arg(long)]
        dry_run: bool,
    },
    /// Re-hash a manifest's configuration and outputs.
    CheckManifest {
        /// Path of `manifest.json`.
        manifest: PathBuf,
        /// Configuration file that should hash to the recorded value.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config_error = e.chain().any(|c| matches!(c.downcast_ref::<LabError>(), Some(LabError::Config { .. })));
            ExitCode::from(if config_error { EXIT_CONFIG } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().context("building the worker pool")?;
    pool.install(|| match cli.command {
        Command::VerifyAlgebra { fault_inject, samples } => verify_algebra(&cli.out_dir, cli.seed, fault_inject.as_deref(), samples),
        Command::Simulate { config, resume } => simulate(&cli.out_dir, cli.seed, &config, resume),
        Command::Verify { id, config, n } => verify(&cli.out_dir, cli.seed, &id, config.as_deref(), n),
        Command::Campaign { config, dry_run } => campaign(&cli.out_dir, cli.seed, jobs, &config, dry_run),
        Command::CheckManifest { manifest, config } => check(&manifest, config.as_deref()),
    })
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Pass => 0,
        Status::Unresolved => EXIT_UNRESOLVED,
        Status::Fail => EXIT_FAIL,
    }
}

fn print_report(r: &EstimateReport) {
    println!("{} ({} trials, empirical constant {:.6e})", r.estimate, r.ensemble_size, r.constant);
    if let Some(f) = r.fit {
        println!("  fit: slope {:.6} ± {:.3e} (95%), R² = {:.6}", f.slope, f.slope_ci95, f.r_squared);
    }
    for v in &r.verdicts {
        println!("  {v}");
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn finish(manifest: RunManifest, out_dir: &Path) -> Result<u8> {
    let status = manifest.status;
    let path = manifest.finish(out_dir)?;
    println!("manifest: {}", path.display());
    println!("overall: {status}");
    Ok(exit_code(status))
}

fn verify_algebra(out_dir: &Path, seed: Option<u64>, fault: Option<&str>, samples: usize) -> Result<u8> {
    let fault: Option<Fault> = fault.map(str::parse).transpose()?;
    let cfg = load_config(None, seed)?;
    let residuals = algebra_suite(samples, cfg.seed.unwrap_or(1), fault)?;
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::begin(&cfg, if fault.is_some() { "verify-algebra --fault-inject" } else { "verify-algebra" });
    let mut w = csv::Writer::from_path(out_dir.join("algebra.csv"))?;
    w.write_record(["identity", "samples", "max_residual", "tolerance", "status"])?;
    for r in &residuals {
        let status = Status::from_bool(r.passed());
        println!("{status} {}: max residual {:.3e} (tolerance {:.0e}, {} samples)", r.identity, r.max_residual, r.tolerance, r.samples);
        w.write_record([r.identity.clone(), r.samples.to_string(), format!("{:.6e}", r.max_residual), format!("{:.0e}", r.tolerance), status.to_string()])?;
        manifest.add_criterion("algebra", &r.identity, status, r.max_residual, &format!("≤ {:.0e}", r.tolerance));
    }
    w.flush()?;
    drop(w);
    manifest.add_output(out_dir, "algebra.csv")?;
    finish(manifest, out_dir)
}

fn simulate(out_dir: &Path, seed: Option<u64>, config: &Path, resume: bool) -> Result<u8> {
    let cfg = load_config(Some(config), seed)?;
    let sim = cfg.simulation.clone().ok_or_else(|| LabError::config("simulation", "the configuration has no simulation section"))?;
    let hash = config_hash(&cfg);
    let key = &hash[..16];
    let ck_dir = out_dir.join("checkpoints");
    std::fs::create_dir_all(&ck_dir)?;
    let mut manifest = RunManifest::begin(&cfg, if resume { "simulate --resume" } else { "simulate" });
    let out = run_simulation(&sim, cfg.seed.unwrap_or(0), Some((&ck_dir, key)), resume)?;
    let sol = &out.solution;

    let mut charge = Vec::new();
    write_charge_csv(&mut charge, sol)?;
    std::fs::write(out_dir.join("charge.csv"), charge)?;
    let summary = serde_json::json!({
        "steps": sol.steps,
        "final_time": sol.steps as f64 * sim.dt,
        "resumed_from": sol.resumed_from,
        "charge_drift": sol.charge_drift,
        "max_spectral_tail": sol.max_tail,
        "breakdown": sol.breakdown,
        "formulation_divergence": out.divergence,
    });
    std::fs::write(out_dir.join("simulation.json"), serde_json::to_string_pretty(&summary)?)?;
    manifest.add_output(out_dir, "charge.csv")?;
    manifest.add_output(out_dir, "simulation.json")?;
    let mut checkpoints: Vec<String> =
        std::fs::read_dir(&ck_dir)?.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).filter(|name| name.starts_with(key)).collect();
    checkpoints.sort();
    for name in &checkpoints {
        manifest.add_output(out_dir, &format!("checkpoints/{name}"))?;
    }

    println!("steps: {} (t = {})", sol.steps, sol.steps as f64 * sim.dt);
    if let Some(step) = sol.resumed_from {
        println!("resumed from step {step}");
    }
    println!("checkpoints: {}", checkpoints.len());
    println!("charge drift: {:.3e}", sol.charge_drift);
    let drift_ok = Status::from_bool(sol.charge_drift <= CHARGE_TRIPWIRE);
    manifest.add_criterion("simulate", "charge-tripwire", drift_ok, sol.charge_drift, "relative charge drift ≤ 1e-9");
    match &sol.breakdown {
        Some(b) => {
            println!("breakdown at t = {}: {}", b.time, b.reason);
            manifest.add_criterion("simulate", "no-breakdown", Status::Fail, b.time, "run reaches the horizon");
        }
        None => manifest.add_criterion("simulate", "no-breakdown", Status::Pass, sol.steps as f64 * sim.dt, "run reaches the horizon"),
    }
    if let Some(d) = out.divergence {
        println!("formulation divergence: {d:.3e}");
        manifest.add_criterion("simulate", "formulation-equivalence", Status::from_bool(d <= EQUIVALENCE_TOLERANCE), d, "relative divergence ≤ 1e-10");
    }
    finish(manifest, out_dir)
}

fn verify(out_dir: &Path, seed: Option<u64>, id: &str, config: Option<&Path>, n: Option<usize>) -> Result<u8> {
    let cfg = load_config(config, seed)?;
    let resolved = registry::resolve(id, &cfg, n)?;
    let subcommand = match n {
        Some(n) => format!("verify {id} --n {n}"),
        None => format!("verify {id}"),
    };
    let mut manifest = RunManifest::begin(&cfg, subcommand);
    let reports = resolved.run()?;
    for r in &reports {
        print_report(r);
        manifest.add_report(r);
    }
    for name in registry::write_report_files(out_dir, &reports)? {
        manifest.add_output(out_dir, &name)?;
    }
    finish(manifest, out_dir)
}

fn campaign(out_dir: &Path, seed: Option<u64>, jobs: usize, config: &Path, dry_run: bool) -> Result<u8> {
    let cfg = load_config(Some(config), seed)?;
    let plan_cfg = cfg.campaign.clone().ok_or_else(|| LabError::config("campaign", "the configuration has no campaign section"))?;
    if dry_run {
        println!("config hash: {}", config_hash(&cfg));
        println!("jobs: {jobs}");
        println!("refinement check: {}", if plan_cfg.refinement_check { format!("on (tolerance {})", plan_cfg.refinement_tolerance) } else { "off".into() });
        for r in registry::plan(&cfg, &plan_cfg.estimates)? {
            println!("{}: {}", r.id(), serde_json::to_string(&r)?);
        }
        return Ok(0);
    }
    let mut manifest = RunManifest::begin(&cfg, "campaign");
    let refinement = plan_cfg.refinement_check.then_some(plan_cfg.refinement_tolerance);
    let reports = registry::run_campaign(&cfg, &plan_cfg.estimates, jobs, refinement)?;
    for r in &reports {
        print_report(r);
        manifest.add_report(r);
    }
    for name in registry::write_report_files(out_dir, &reports)? {
        manifest.add_output(out_dir, &name)?;
    }
    finish(manifest, out_dir)
}

fn check(manifest: &Path, config: Option<&Path>) -> Result<u8> {
    let cfg = config.map(RunConfig::load).transpose()?;
    let issues = check_manifest(manifest, cfg.as_ref())?;
    if issues.is_empty() {
        println!("manifest OK: configuration hash and all outputs verified");
        return Ok(0);
    }
    for i in &issues {
        println!("MISMATCH {i}");
    }
    Ok(EXIT_FAIL)
}
