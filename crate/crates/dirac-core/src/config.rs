//! Declarative run configuration.
//!
//! One JSON document describes everything that enters a run's identity: the
//! seed, an optional nonlinear simulation, per-estimate parameter overrides and
//! the list of estimates a campaign executes. Every section rejects unknown
//! fields, and parse errors carry the JSON path of the offending field. The
//! committed schema `schema/run-config.schema.json` documents the format.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::data::DataSpec;
use crate::error::{LabError, Result};
use crate::estimates::{
    AwayFromConeParams, BilinearParams, NullFrameParams, NullFundamentalParams, NullGainParams, NullplaneParams, StrichartzParams, VpParams, XsbParams,
};
use crate::evolution::ModelSpec;
use crate::experiments::{LipschitzParams, MassHorizonParams, SmallDataParams};
use crate::grid::GridSpec;

/// A full run configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed applied to every seeded component (overrides per-section seeds).
    pub seed: Option<u64>,
    /// Nonlinear simulation driven by `simulate`.
    pub simulation: Option<SimulationConfig>,
    /// Per-estimate parameter overrides; absent sections use the defaults.
    pub estimates: EstimateConfigs,
    /// Campaign plan driven by `campaign`.
    pub campaign: Option<CampaignConfig>,
}

/// Parameter sections keyed by registered estimate id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EstimateConfigs {
    /// `bilinear-l2`.
    pub bilinear_l2: Option<BilinearParams>,
    /// `strichartz`.
    pub strichartz: Option<StrichartzParams>,
    /// `xsb-counterexample`.
    pub xsb_counterexample: Option<XsbParams>,
    /// `nullplane-trace`.
    pub nullplane_trace: Option<NullplaneParams>,
    /// `away-from-cone`.
    pub away_from_cone: Option<AwayFromConeParams>,
    /// `null-frame-norms`.
    pub null_frame_norms: Option<NullFrameParams>,
    /// `null-fundamental` (the null-frame fundamental solution, run by `null-frame-norms` campaigns).
    pub null_fundamental: Option<NullFundamentalParams>,
    /// `vp`.
    pub vp: Option<VpParams>,
    /// `small-data` and `scattering` (they share one ε ladder).
    pub small_data: Option<SmallDataParams>,
    /// `lipschitz`.
    pub lipschitz: Option<LipschitzParams>,
    /// `mass-horizon`.
    pub mass_horizon: Option<MassHorizonParams>,
    /// `null-gain`.
    pub null_gain: Option<NullGainParams>,
}

/// A nonlinear simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Lattice.
    pub grid: GridSpec,
    /// Equation, nonlinearity, mass and amplitude `ε`.
    pub model: ModelSpec,
    /// First datum: `u` of the `(u, v)` system, or `ψ` itself for the
    /// two-dimensional ψ-form.
    pub u: DataSpec,
    /// Second datum `v` (`n = 3` ψ-form data are `(u + v, u − v)`).
    #[serde(default = "zero_data")]
    pub v: DataSpec,
    /// Time step.
    pub dt: f64,
    /// Number of steps.
    pub steps: usize,
    /// Steps between recorded frames.
    #[serde(default = "one_step")]
    pub record_every: usize,
    /// Steps between checkpoints (defaults to `record_every`).
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
    /// Run both the `(u, v)` and the ψ formulation (`n = 3`) and report their divergence.
    #[serde(default)]
    pub equivalence: bool,
}

fn zero_data() -> DataSpec {
    DataSpec::Zero
}

fn one_step() -> usize {
    1
}

/// Campaign plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Estimate ids to run, in order.
    pub estimates: Vec<String>,
    /// Repeat every grid-based estimate with the lattice doubled and flag
    /// the row `UNRESOLVED` if its headline number moves by more than
    /// `refinement_tolerance` (relative).
    #[serde(default)]
    pub refinement_check: bool,
    /// Relative tolerance of the refinement check.
    #[serde(default = "default_refinement_tolerance")]
    pub refinement_tolerance: f64,
}

fn default_refinement_tolerance() -> f64 {
    0.1
}

impl RunConfig {
    /// Parse a configuration from JSON text; errors carry the field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            LabError::config(if path.is_empty() { ".".to_string() } else { path }, inner.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and parse a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    /// Canonical serialisation: keys sorted, no whitespace. Two configurations
    /// that parse to the same value have the same canonical form.
    pub fn canonical_json(&self) -> String {
        // `serde_json::Value` keeps object keys in a sorted map.
        let value = serde_json::to_value(self).expect("configuration serialises");
        value.to_string()
    }

    /// Semantic checks beyond the type structure.
    pub fn validate(&self) -> Result<()> {
        if let Some(sim) = &self.simulation {
            if !(sim.dt > 0.0) {
                return Err(LabError::config("simulation.dt", "must be positive"));
            }
            if sim.record_every == 0 {
                return Err(LabError::config("simulation.record_every", "must be at least 1"));
            }
            if sim.checkpoint_every == Some(0) {
                return Err(LabError::config("simulation.checkpoint_every", "must be at least 1"));
            }
            if sim.model.n != sim.grid.n {
                return Err(LabError::config("simulation.model.n", format!("model is n = {}, grid is n = {}", sim.model.n, sim.grid.n)));
            }
            sim.model.validate().map_err(|e| LabError::config("simulation.model", e.to_string()))?;
            if sim.equivalence && sim.model.n != 3 {
                return Err(LabError::config("simulation.equivalence", "the two formulations are compared for n = 3"));
            }
        }
        if let Some(c) = &self.campaign {
            for (i, id) in c.estimates.iter().enumerate() {
                if !crate::registry::IDS.contains(&id.as_str()) {
                    return Err(LabError::config(
                        format!("campaign.estimates[{i}]"),
                        format!("unknown estimate id {id:?}; expected one of {}", crate::registry::IDS.join(", ")),
                    ));
                }
            }
            if !(c.refinement_tolerance > 0.0) {
                return Err(LabError::config("campaign.refinement_tolerance", "must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_fields_report_their_path() {
        let err = RunConfig::from_json(r#"{"estimates": {"vp": {"instances": 3, "bogus": 1}}}"#).unwrap_err();
        match err {
            LabError::Config { path, message } => {
                assert_eq!(path, "estimates.vp.bogus");
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
        let err = RunConfig::from_json(r#"{"estimates": {"vp": {"instances": "many"}}}"#).unwrap_err();
        assert!(matches!(err, LabError::Config { ref path, .. } if path == "estimates.vp.instances"), "{err}");
    }

    #[test]
    fn canonical_form_ignores_layout_and_key_order() {
        let a = RunConfig::from_json(r#"{"seed": 4, "estimates": {"vp": {"max_len": 8, "instances": 3}}}"#).unwrap();
        let b = RunConfig::from_json("{\n  \"estimates\": {\"vp\": {\"instances\": 3, \"max_len\": 8}},\n  \"seed\": 4\n}").unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
        let again = RunConfig::from_json(&a.canonical_json()).unwrap();
        assert_eq!(again.canonical_json(), a.canonical_json());
    }

    #[test]
    fn campaign_ids_are_checked() {
        let err = RunConfig::from_json(r#"{"campaign": {"estimates": ["vp", "nope"]}}"#).unwrap_err();
        assert!(matches!(err, LabError::Config { ref path, .. } if path == "campaign.estimates[1]"), "{err}");
    }

    #[test]
    fn default_sections_round_trip_through_json() {
        let mut cfg = RunConfig::default();
        cfg.estimates.strichartz = Some(Default::default());
        cfg.estimates.small_data = Some(Default::default());
        cfg.estimates.lipschitz = Some(Default::default());
        let text = cfg.canonical_json();
        assert!(text.contains("\"inf\""), "{text}");
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
