//! Registered estimate / experiment ids, parameter resolution and dispatch.
//!
//! Parameters of an id come from its section of the run configuration (or the
//! defaults), with the configuration's global seed and an optional dimension
//! override applied on top. Campaigns run several ids on a bounded worker
//! pool; the small-data and scattering experiments share one ε ladder when
//! their parameters agree.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{LabError, Result};
use crate::estimates::{
    null_frame_norms, null_gain, verify_away_from_cone, verify_bilinear_l2, verify_null_fundamental, verify_nullplane_trace, verify_strichartz, verify_vp,
    xsb_counterexample, AwayFromConeParams, BilinearParams, NullFrameParams, NullFundamentalParams, NullGainParams, NullplaneParams, StrichartzParams,
    VpParams, XsbParams,
};
use crate::experiments::{lipschitz, mass_horizon, run_ladder, scattering_report, small_data_report, LipschitzParams, MassHorizonParams, SmallDataParams};
use crate::report::{write_summary_csv, write_trace_csv, EstimateReport, Verdict};

/// Every registered id, in a fixed order.
pub const IDS: [&str; 12] = [
    "bilinear-l2",
    "strichartz",
    "xsb-counterexample",
    "nullplane-trace",
    "away-from-cone",
    "null-frame-norms",
    "vp",
    "small-data",
    "scattering",
    "lipschitz",
    "mass-horizon",
    "null-gain",
];

/// Error for an unregistered id, listing the registered ones.
pub fn unknown_id(id: &str) -> LabError {
    LabError::config("estimate", format!("unknown estimate id {id:?}; registered ids: {}", IDS.join(", ")))
}

/// Fully resolved parameters of one id.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Resolved {
    /// `bilinear-l2`.
    BilinearL2(BilinearParams),
    /// `strichartz`.
    Strichartz(StrichartzParams),
    /// `xsb-counterexample`.
    Xsb(XsbParams),
    /// `nullplane-trace`.
    NullplaneTrace(NullplaneParams),
    /// `away-from-cone`.
    AwayFromCone(AwayFromConeParams),
    /// `null-frame-norms` (together with the null-frame fundamental solution check).
    NullFrameNorms {
        /// Norm comparisons.
        norms: NullFrameParams,
        /// Fundamental-solution check.
        fundamental: NullFundamentalParams,
    },
    /// `vp`.
    Vp(VpParams),
    /// `small-data`.
    SmallData(SmallDataParams),
    /// `scattering`.
    Scattering(SmallDataParams),
    /// `lipschitz`.
    Lipschitz(LipschitzParams),
    /// `mass-horizon`.
    MassHorizon(MassHorizonParams),
    /// `null-gain`.
    NullGain(NullGainParams),
}

/// Apply the global seed and dimension override to a parameter section.
fn section<T: Serialize + DeserializeOwned + Clone>(configured: &Option<T>, default: T, id: &str, seed: Option<u64>, n: Option<usize>) -> Result<T> {
    let base = configured.clone().unwrap_or(default);
    if seed.is_none() && n.is_none() {
        return Ok(base);
    }
    let mut value = serde_json::to_value(&base)?;
    let obj = value.as_object_mut().expect("parameter sections are objects");
    if let Some(s) = seed {
        if obj.contains_key("seed") {
            obj.insert("seed".into(), s.into());
        }
        if let Some(inner) = obj.get_mut("base").and_then(|b| b.as_object_mut()) {
            inner.insert("seed".into(), s.into());
        }
    }
    if let Some(n) = n {
        let slot = if obj.contains_key("n") {
            obj
        } else if let Some(inner) = obj.get_mut("base").and_then(|b| b.as_object_mut()) {
            inner
        } else {
            return Err(LabError::config("n", format!("{id} has no dimension parameter")));
        };
        slot.insert("n".into(), n.into());
    }
    serde_json::from_value(value).map_err(|e| LabError::config(format!("estimates.{id}"), e.to_string()))
}

/// Resolve the parameters of `id` under `cfg`, with an optional dimension
/// override. Without a configured section, `n = 1` selects the exact
/// one-dimensional preset of `bilinear-l2` and `null-gain`.
pub fn resolve(id: &str, cfg: &RunConfig, n: Option<usize>) -> Result<Resolved> {
    let e = &cfg.estimates;
    let seed = cfg.seed;
    Ok(match id {
        "bilinear-l2" => {
            let default = if n == Some(1) { BilinearParams::one_dimensional() } else { BilinearParams::default() };
            Resolved::BilinearL2(section(&e.bilinear_l2, default, id, seed, n)?)
        }
        "strichartz" => Resolved::Strichartz(section(&e.strichartz, StrichartzParams::default(), id, seed, n)?),
        "xsb-counterexample" => Resolved::Xsb(section(&e.xsb_counterexample, XsbParams::default(), id, seed, n)?),
        "nullplane-trace" => Resolved::NullplaneTrace(section(&e.nullplane_trace, NullplaneParams::default(), id, seed, n)?),
        "away-from-cone" => Resolved::AwayFromCone(section(&e.away_from_cone, AwayFromConeParams::default(), id, seed, n)?),
        "null-frame-norms" => Resolved::NullFrameNorms {
            norms: section(&e.null_frame_norms, NullFrameParams::default(), id, seed, n)?,
            fundamental: section(&e.null_fundamental, NullFundamentalParams::default(), "null-fundamental", seed, None)?,
        },
        "vp" => Resolved::Vp(section(&e.vp, VpParams::default(), id, seed, n)?),
        "small-data" => Resolved::SmallData(section(&e.small_data, SmallDataParams::default(), id, seed, n)?),
        "scattering" => Resolved::Scattering(section(&e.small_data, SmallDataParams::default(), id, seed, n)?),
        "lipschitz" => Resolved::Lipschitz(section(&e.lipschitz, LipschitzParams::default(), id, seed, n)?),
        "mass-horizon" => Resolved::MassHorizon(section(&e.mass_horizon, MassHorizonParams::default(), id, seed, n)?),
        "null-gain" => {
            let default = if n == Some(1) { NullGainParams::one_dimensional() } else { NullGainParams::default() };
            Resolved::NullGain(section(&e.null_gain, default, id, seed, n)?)
        }
        other => return Err(unknown_id(other)),
    })
}

impl Resolved {
    /// Registered id.
    pub fn id(&self) -> &'static str {
        match self {
            Resolved::BilinearL2(_) => "bilinear-l2",
            Resolved::Strichartz(_) => "strichartz",
            Resolved::Xsb(_) => "xsb-counterexample",
            Resolved::NullplaneTrace(_) => "nullplane-trace",
            Resolved::AwayFromCone(_) => "away-from-cone",
            Resolved::NullFrameNorms { .. } => "null-frame-norms",
            Resolved::Vp(_) => "vp",
            Resolved::SmallData(_) => "small-data",
            Resolved::Scattering(_) => "scattering",
            Resolved::Lipschitz(_) => "lipschitz",
            Resolved::MassHorizon(_) => "mass-horizon",
            Resolved::NullGain(_) => "null-gain",
        }
    }

    /// Execute; most ids produce one report, `null-frame-norms` two.
    pub fn run(&self) -> Result<Vec<EstimateReport>> {
        Ok(match self {
            Resolved::BilinearL2(p) => vec![verify_bilinear_l2(p)?],
            Resolved::Strichartz(p) => vec![verify_strichartz(p)?],
            Resolved::Xsb(p) => vec![xsb_counterexample(p)?],
            Resolved::NullplaneTrace(p) => vec![verify_nullplane_trace(p)?],
            Resolved::AwayFromCone(p) => vec![verify_away_from_cone(p)?],
            Resolved::NullFrameNorms { norms, fundamental } => vec![null_frame_norms(norms)?, verify_null_fundamental(fundamental)?],
            Resolved::Vp(p) => vec![verify_vp(p)?],
            Resolved::SmallData(p) => vec![small_data_report(p, &run_ladder(p)?)?],
            Resolved::Scattering(p) => vec![scattering_report(p, &run_ladder(p)?)?],
            Resolved::Lipschitz(p) => vec![lipschitz(p)?],
            Resolved::MassHorizon(p) => vec![mass_horizon(p)?],
            Resolved::NullGain(p) => vec![null_gain(p)?],
        })
    }

    /// The same run with every lattice doubled (`size → 2·size`, box fixed),
    /// or `None` when the id has no lattice.
    pub fn refined(&self) -> Option<Resolved> {
        fn double<T: Serialize + DeserializeOwned>(p: &T) -> Option<T> {
            let mut v = serde_json::to_value(p).ok()?;
            let obj = v.as_object_mut()?;
            let slot = if obj.contains_key("size") { obj } else { obj.get_mut("base")?.as_object_mut()? };
            let size = slot.get("size")?.as_u64()?;
            slot.insert("size".into(), (2 * size).into());
            serde_json::from_value(v).ok()
        }
        Some(match self {
            Resolved::BilinearL2(p) => Resolved::BilinearL2(double(p)?),
            Resolved::Strichartz(p) => Resolved::Strichartz(double(p)?),
            Resolved::NullplaneTrace(p) => Resolved::NullplaneTrace(double(p)?),
            Resolved::AwayFromCone(p) => Resolved::AwayFromCone(double(p)?),
            Resolved::NullFrameNorms { norms, fundamental } => Resolved::NullFrameNorms { norms: double(norms)?, fundamental: double(fundamental)? },
            Resolved::SmallData(p) => Resolved::SmallData(double(p)?),
            Resolved::Scattering(p) => Resolved::Scattering(double(p)?),
            Resolved::Lipschitz(p) => Resolved::Lipschitz(double(p)?),
            Resolved::MassHorizon(p) => Resolved::MassHorizon(double(p)?),
            Resolved::NullGain(p) => Resolved::NullGain(double(p)?),
            Resolved::Xsb(_) | Resolved::Vp(_) => return None,
        })
    }
}

/// Run one id.
pub fn run_id(id: &str, cfg: &RunConfig, n: Option<usize>) -> Result<Vec<EstimateReport>> {
    resolve(id, cfg, n)?.run()
}

/// Headline number of a report: the fitted slope if there is one, else the empirical constant.
pub fn headline(r: &EstimateReport) -> f64 {
    r.fit.map(|f| f.slope).unwrap_or(r.constant)
}

/// Compare each report with its refined counterpart: record the refined
/// headline in the trace and add a `refinement-stable` verdict, which is
/// `UNRESOLVED` when the headline moves by more than `tolerance`.
pub fn attach_refinement(reports: &mut [EstimateReport], refined: &[EstimateReport], tolerance: f64) {
    for r in reports.iter_mut() {
        let Some(f) = refined.iter().find(|f| f.estimate == r.estimate) else { continue };
        let (a, b) = (headline(r), headline(f));
        r.trace("refined-headline", 2.0, b);
        let change = if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        let requirement = format!("headline within {:.0}% under lattice doubling", 100.0 * tolerance);
        r.verdicts.push(if change <= tolerance {
            Verdict::new("refinement-stable", true, change, requirement)
        } else {
            Verdict::unresolved("refinement-stable", change, requirement)
        });
    }
}

/// The plan of a campaign: resolved parameters per id, in order.
pub fn plan(cfg: &RunConfig, ids: &[String]) -> Result<Vec<Resolved>> {
    ids.iter().map(|id| resolve(id, cfg, None)).collect()
}

/// Run a campaign on at most `jobs` worker threads. Reports come back in
/// plan order. With `refinement_check`, every lattice-based id is repeated
/// on the doubled lattice (see [`attach_refinement`]).
pub fn run_campaign(cfg: &RunConfig, ids: &[String], jobs: usize, refinement: Option<f64>) -> Result<Vec<EstimateReport>> {
    let plan = plan(cfg, ids)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| LabError::config("jobs", e.to_string()))?;
    pool.install(|| -> Result<Vec<EstimateReport>> {
        let mut reports = run_plan(&plan)?;
        if let Some(tol) = refinement {
            let refined: Vec<Resolved> = plan.iter().filter_map(Resolved::refined).collect();
            let finer = run_plan(&refined)?;
            attach_refinement(&mut reports, &finer, tol);
        }
        Ok(reports)
    })
}

fn run_plan(plan: &[Resolved]) -> Result<Vec<EstimateReport>> {
    // small-data and scattering with identical parameters share one ladder.
    let shared = plan.iter().find_map(|r| match r {
        Resolved::SmallData(p) if plan.contains(&Resolved::Scattering(p.clone())) => Some(p.clone()),
        _ => None,
    });
    let ladder = match &shared {
        Some(p) => Some(run_ladder(p)?),
        None => None,
    };
    let results: Vec<Result<Vec<EstimateReport>>> = plan
        .par_iter()
        .map(|r| match (r, &shared, &ladder) {
            (Resolved::SmallData(p), Some(s), Some(runs)) if p == s => Ok(vec![small_data_report(p, runs)?]),
            (Resolved::Scattering(p), Some(s), Some(runs)) if p == s => Ok(vec![scattering_report(p, runs)?]),
            _ => r.run(),
        })
        .collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Names of the files [`write_report_files`] produces for `reports`.
pub fn report_file_names(reports: &[EstimateReport]) -> Vec<String> {
    let mut names: Vec<String> = reports.iter().map(|r| format!("{}.jsonl", r.estimate)).collect();
    names.push("summary.csv".into());
    names.push("trace.csv".into());
    names
}

/// Write `<estimate>.jsonl` (one line per trial) for every report, plus
/// `summary.csv` and `trace.csv`; returns the relative file names.
pub fn write_report_files(dir: &Path, reports: &[EstimateReport]) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    for r in reports {
        r.check_finite()?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{}.jsonl", r.estimate)))?);
        r.write_jsonl(&mut f)?;
        std::io::Write::flush(&mut f)?;
    }
    write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?, reports)?;
    write_trace_csv(std::fs::File::create(dir.join("trace.csv"))?, reports)?;
    Ok(report_file_names(reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_resolves_and_unknown_ids_list_the_registry() {
        let cfg = RunConfig::default();
        for id in IDS {
            assert_eq!(resolve(id, &cfg, None).unwrap().id(), id);
        }
        let msg = resolve("bogus", &cfg, None).unwrap_err().to_string();
        for id in IDS {
            assert!(msg.contains(id), "{msg}");
        }
    }

    #[test]
    fn seed_and_dimension_overrides() {
        let cfg = RunConfig { seed: Some(77), ..Default::default() };
        match resolve("bilinear-l2", &cfg, Some(1)).unwrap() {
            Resolved::BilinearL2(p) => {
                assert_eq!(p.seed, 77);
                assert_eq!(p, BilinearParams { seed: 77, ..BilinearParams::one_dimensional() });
            }
            other => panic!("{other:?}"),
        }
        match resolve("lipschitz", &cfg, None).unwrap() {
            Resolved::Lipschitz(p) => assert_eq!(p.base.seed, 77),
            other => panic!("{other:?}"),
        }
        assert!(matches!(resolve("xsb-counterexample", &cfg, Some(2)), Err(LabError::Config { .. })));
    }

    #[test]
    fn refinement_doubles_the_lattice() {
        let cfg = RunConfig::default();
        match resolve("lipschitz", &cfg, None).unwrap().refined().unwrap() {
            Resolved::Lipschitz(p) => assert_eq!(p.base.size, 2 * LipschitzParams::default().base.size),
            other => panic!("{other:?}"),
        }
        assert!(resolve("vp", &cfg, None).unwrap().refined().is_none());
    }

    #[test]
    fn refinement_verdicts() {
        let mut a = EstimateReport::new("x");
        a.constant = 1.0;
        let mut b = EstimateReport::new("x");
        b.constant = 1.05;
        let mut reports = vec![a.clone()];
        attach_refinement(&mut reports, &[b.clone()], 0.1);
        assert_eq!(reports[0].status(), crate::report::Status::Pass);
        b.constant = 1.5;
        let mut reports = vec![a];
        attach_refinement(&mut reports, &[b], 0.1);
        assert_eq!(reports[0].status(), crate::report::Status::Unresolved);
    }
}
