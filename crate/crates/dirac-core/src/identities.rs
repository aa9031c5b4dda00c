//! The algebraic identity suite: Fierz rearrangement, Clifford relations,
//! projection identities and null-coordinate exactness, each reported as a
//! maximal residual against a fixed tolerance.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::null_frame::NullFrame;
use crate::spinor::{anticommutator_residual, fierz_check, projection_residuals, Direction};

/// Deliberate faults for exercising the failure path of the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Add `1e−3` to the `(0, 0)` entry of `γ¹`.
    Gamma1,
}

impl std::str::FromStr for Fault {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma1" => Ok(Fault::Gamma1),
            other => Err(LabError::config("fault-inject", format!("unknown fault {other:?}; available: gamma1"))),
        }
    }
}

/// Maximal residual of one identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    /// Identity name.
    pub identity: String,
    /// Number of random samples (1 for deterministic identities).
    pub samples: usize,
    /// Largest residual.
    pub max_residual: f64,
    /// Tolerance.
    pub tolerance: f64,
}

impl IdentityResidual {
    /// Whether the residual is within tolerance.
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tolerance
    }
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Direction {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(d) = Direction::normalized(&v) {
            return d;
        }
    }
}

/// Run the suite on `samples` random inputs per identity.
///
/// Tolerances: Fierz `≤ 1e−12‖ψ‖³`; Clifford and projection identities
/// `≤ 1e−15`; null-coordinate round trips and the symbol identity
/// `τ² − |ξ|² = 2τ_ω ξ_ω¹ − |ξ_ω^⊥|²` `≤ 1e−11` (inputs in `[−10, 10]`).
pub fn algebra_suite(samples: usize, seed: u64, fault: Option<Fault>) -> Result<Vec<IdentityResidual>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let perturb = if fault == Some(Fault::Gamma1) { 1e-3 } else { 0.0 };
    for (n, len) in [(2usize, 2usize), (3, 4)] {
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let psi: Vec<C64> = (0..len).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(fierz_check(&psi, n)? / norm.powi(3));
        }
        out.push(IdentityResidual { identity: format!("fierz(n={n})"), samples, max_residual: worst, tolerance: 1e-12 });
        out.push(IdentityResidual {
            identity: format!("anticommutator(n={n})"),
            samples: 1,
            max_residual: anticommutator_residual(n, perturb)?,
            tolerance: 1e-15,
        });
        let mut proj: f64 = 0.0;
        let (mut round, mut symbol): (f64, f64) = (0.0, 0.0);
        for _ in 0..samples {
            let omega = random_direction(&mut rng, n);
            proj = proj.max(projection_residuals(&omega).max());
            let frame = NullFrame::new(omega);
            let t: f64 = rng.random_range(-10.0..10.0);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let (t2, x2) = frame.from_null(&frame.to_null(t, &x));
            round = round.max((t2 - t).abs());
            let tau: f64 = rng.random_range(-10.0..10.0);
            let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let d = frame.to_dual_null(tau, &xi);
            let (tau2, xi2) = frame.from_dual_null(&d);
            round = round.max((tau2 - tau).abs());
            for j in 0..n {
                round = round.max((x2[j] - x[j]).abs()).max((xi2[j] - xi[j]).abs());
            }
            let lhs = tau * tau - xi.iter().map(|a| a * a).sum::<f64>();
            let rhs = 2.0 * d.tau_omega * d.xi1 - d.xi_perp.iter().map(|a| a * a).sum::<f64>();
            symbol = symbol.max((lhs - rhs).abs());
        }
        out.push(IdentityResidual { identity: format!("projections(n={n})"), samples, max_residual: proj, tolerance: 1e-15 });
        out.push(IdentityResidual { identity: format!("null-round-trip(n={n})"), samples, max_residual: round, tolerance: 1e-11 });
        out.push(IdentityResidual { identity: format!("null-symbol(n={n})"), samples, max_residual: symbol, tolerance: 1e-11 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_suite_passes_and_the_fault_is_caught() {
        let clean = algebra_suite(200, 1, None).unwrap();
        assert!(clean.iter().all(IdentityResidual::passed), "{clean:?}");
        let faulty = algebra_suite(200, 1, Some(Fault::Gamma1)).unwrap();
        let failed: Vec<&str> = faulty.iter().filter(|r| !r.passed()).map(|r| r.identity.as_str()).collect();
        assert_eq!(failed, ["anticommutator(n=2)", "anticommutator(n=3)"]);
        assert!("nope".parse::<Fault>().is_err());
    }
}
