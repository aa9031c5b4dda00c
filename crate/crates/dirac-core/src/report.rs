//! Structured results of verifiers and campaigns: per-criterion verdicts,
//! per-trial `(lhs, rhs)` records and their JSONL / CSV serialisations.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{LabError, Result};
use crate::fit::LineFit;

/// Outcome of one acceptance criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    /// Criterion met.
    Pass,
    /// The headline number did not persist under refinement: no verdict.
    Unresolved,
    /// Criterion violated.
    Fail,
}

impl Status {
    /// Worst of two statuses (`Fail` > `Unresolved` > `Pass`).
    pub fn worst(self, other: Status) -> Status {
        self.max(other)
    }

    /// `Pass` if `ok`, else `Fail`.
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unresolved => "UNRESOLVED",
        })
    }
}

/// A single pass/fail decision with the measured number behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Short identifier of the criterion.
    pub criterion: String,
    /// Outcome.
    pub status: Status,
    /// The measured quantity the decision is based on.
    pub measured: f64,
    /// Human-readable statement of the tolerance.
    pub requirement: String,
}

impl Verdict {
    /// Build a verdict from a boolean test.
    pub fn new(criterion: impl Into<String>, ok: bool, measured: f64, requirement: impl Into<String>) -> Self {
        Verdict { criterion: criterion.into(), status: Status::from_bool(ok), measured, requirement: requirement.into() }
    }

    /// A verdict that could not be decided.
    pub fn unresolved(criterion: impl Into<String>, measured: f64, requirement: impl Into<String>) -> Self {
        Verdict { criterion: criterion.into(), status: Status::Unresolved, measured, requirement: requirement.into() }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: measured {:.6e} (required {})", self.status, self.criterion, self.measured, self.requirement)
    }
}

/// One ensemble member of an estimate verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    /// Estimate identifier.
    pub estimate: String,
    /// Configuration label (e.g. `"N=64,T=8"` or `"lambda=2"`).
    pub group: String,
    /// Trial index within the group.
    pub trial: usize,
    /// Seed of the random data.
    pub seed: u64,
    /// Swept parameter value (λ, T, β, ε, …), `0` when not applicable.
    pub parameter: f64,
    /// Left-hand side of the inequality.
    pub lhs: f64,
    /// Right-hand side (without the unknown constant).
    pub rhs: f64,
    /// `lhs / rhs`.
    pub ratio: f64,
}

impl Trial {
    /// Build a trial record; the ratio is `0` when both sides vanish.
    pub fn new(estimate: &str, group: impl Into<String>, trial: usize, seed: u64, parameter: f64, lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
        Trial { estimate: estimate.to_string(), group: group.into(), trial, seed, parameter, lhs, rhs, ratio }
    }
}

/// One point of a refinement or scaling trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    /// What was varied (`"N"`, `"T"`, `"lambda"`, `"d_min"`, …).
    pub parameter: String,
    /// Its value.
    pub value: f64,
    /// The quantity measured at that value (usually the empirical constant).
    pub measured: f64,
}

/// The result of one estimate verification or experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Registered identifier.
    pub estimate: String,
    /// Number of trials.
    pub ensemble_size: usize,
    /// Per-trial records.
    pub trials: Vec<Trial>,
    /// Empirical constant `sup lhs/rhs` (or the headline number of the experiment).
    pub constant: f64,
    /// Fitted slope, where the criterion is a scaling law.
    pub fit: Option<LineFit>,
    /// Refinement / scaling trace.
    pub refinement: Vec<RefinementPoint>,
    /// Decisions.
    pub verdicts: Vec<Verdict>,
    /// Free-form remarks (which side of a norm a functional bounds, etc.).
    pub notes: Vec<String>,
}

impl EstimateReport {
    /// An empty report for `estimate`.
    pub fn new(estimate: &str) -> Self {
        EstimateReport {
            estimate: estimate.to_string(),
            ensemble_size: 0,
            trials: Vec::new(),
            constant: 0.0,
            fit: None,
            refinement: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Append trials and recompute the ensemble size and empirical constant.
    pub fn add_trials(&mut self, trials: impl IntoIterator<Item = Trial>) {
        self.trials.extend(trials);
        self.ensemble_size = self.trials.len();
        self.constant = self.trials.iter().map(|t| t.ratio).fold(0.0, f64::max);
    }

    /// Record a refinement point.
    pub fn trace(&mut self, parameter: &str, value: f64, measured: f64) {
        self.refinement.push(RefinementPoint { parameter: parameter.to_string(), value, measured });
    }

    /// Overall status: the worst verdict (`Pass` when there are none).
    pub fn status(&self) -> Status {
        self.verdicts.iter().fold(Status::Pass, |s, v| s.worst(v.status))
    }

    /// Check the "all entries finite" invariant.
    pub fn check_finite(&self) -> Result<()> {
        for t in &self.trials {
            if !(t.lhs.is_finite() && t.rhs.is_finite() && t.ratio.is_finite()) {
                return Err(LabError::domain(format!("{}: non-finite trial {} in group {}", self.estimate, t.trial, t.group)));
            }
        }
        if self.refinement.iter().any(|r| !(r.value.is_finite() && r.measured.is_finite())) {
            return Err(LabError::domain(format!("{}: non-finite refinement entry", self.estimate)));
        }
        Ok(())
    }

    /// Write one JSON object per trial.
    pub fn write_jsonl(&self, w: &mut impl Write) -> Result<()> {
        for t in &self.trials {
            serde_json::to_writer(&mut *w, t)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Columns of the summary CSV.
pub const SUMMARY_COLUMNS: [&str; 8] = ["estimate", "ensemble_size", "constant", "slope", "slope_ci95", "r_squared", "status", "criteria"];

/// Write a CSV summary with one row per report (columns [`SUMMARY_COLUMNS`]).
pub fn write_summary_csv(w: impl Write, reports: &[EstimateReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_COLUMNS)?;
    for r in reports {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.10e}")).unwrap_or_default();
        let criteria: Vec<String> = r.verdicts.iter().map(|v| format!("{}={}", v.criterion, v.status)).collect();
        out.write_record([
            r.estimate.clone(),
            r.ensemble_size.to_string(),
            format!("{:.10e}", r.constant),
            f(r.fit.map(|x| x.slope)),
            f(r.fit.map(|x| x.slope_ci95)),
            f(r.fit.map(|x| x.r_squared)),
            r.status().to_string(),
            criteria.join(";"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns of the refinement-trace CSV.
pub const TRACE_COLUMNS: [&str; 4] = ["estimate", "parameter", "value", "measured"];

/// Write every report's refinement trace as CSV (columns [`TRACE_COLUMNS`]).
pub fn write_trace_csv(w: impl Write, reports: &[EstimateReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_COLUMNS)?;
    for r in reports {
        for p in &r.refinement {
            out.write_record([r.estimate.clone(), p.parameter.clone(), format!("{:.10e}", p.value), format!("{:.10e}", p.measured)])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_ordering_and_serialisation() {
        assert_eq!(Status::Pass.worst(Status::Unresolved), Status::Unresolved);
        assert_eq!(Status::Fail.worst(Status::Unresolved), Status::Fail);
        assert_eq!(serde_json::to_string(&Status::Unresolved).unwrap(), "\"UNRESOLVED\"");
    }

    #[test]
    fn report_round_trip() {
        let mut r = EstimateReport::new("vp");
        r.add_trials([Trial::new("vp", "g", 0, 1, 1.0, 2.0, 4.0), Trial::new("vp", "g", 1, 2, 1.0, 3.0, 4.0)]);
        assert_eq!(r.constant, 0.75);
        r.verdicts.push(Verdict::new("c", true, 0.75, "≤ 1"));
        let mut buf = Vec::new();
        r.write_jsonl(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
        let mut csv = Vec::new();
        write_summary_csv(&mut csv, &[r]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("estimate,ensemble_size,constant"));
        assert!(text.contains("PASS"));
    }
}
