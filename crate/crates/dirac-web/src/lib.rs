//! Browser front end for the Dirac lab.
//!
//! Three operations are exported to JavaScript:
//!
//! * [`algebra_suite`] — the Fierz / Clifford / projection / null-coordinate
//!   identity suite, optionally with the injected `γ¹` fault;
//! * [`propagate_packet`] — a two-dimensional wave packet evolved by the exact
//!   free Dirac propagator, returned as a density image plus its `L²` norm;
//! * [`p_variation`] — the `p`-variation of a user-entered sequence, by
//!   dynamic programming and (for short sequences) exhaustive enumeration.
//!
//! Each export is a thin wrapper over a plain Rust function (`run_*`) that
//! returns `Result<_, String>`, so the logic is testable natively.

use dirac_core::data::{generate, DataSpec};
use dirac_core::estimates::vp_enumerate;
use dirac_core::evolution::free_evolve;
use dirac_core::grid::Grid;
use dirac_core::identities::{algebra_suite as core_algebra_suite, Fault};
use dirac_core::multiplier::Sign;
use dirac_core::norms::vp_variation_scalar;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Longest sequence for which the exhaustive `O(2^len)` check is also run.
pub const MAX_ENUMERATION_LEN: usize = 16;
/// Largest grid accepted by the packet demo (points per axis).
pub const MAX_PACKET_POINTS: usize = 256;

/// Run the identity suite and return its rows as a JSON array of
/// `{identity, samples, max_residual, tolerance, passed}`.
pub fn run_algebra(samples: usize, seed: u64, fault: bool) -> Result<String, String> {
    if samples == 0 || samples > 100_000 {
        return Err("samples must lie in 1..=100000".into());
    }
    let rows = core_algebra_suite(samples, seed, fault.then_some(Fault::Gamma1)).map_err(|e| e.to_string())?;
    let rows: Vec<_> = rows
        .iter()
        .map(|r| json!({"identity": r.identity, "samples": r.samples, "max_residual": r.max_residual, "tolerance": r.tolerance, "passed": r.passed()}))
        .collect();
    Ok(serde_json::Value::Array(rows).to_string())
}

/// One frame of the free packet demo.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct PacketFrame {
    size: usize,
    time: f64,
    l2_norm: f64,
    initial_l2_norm: f64,
    density: Vec<f64>,
}

#[wasm_bindgen]
impl PacketFrame {
    /// Points per axis.
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Evolution time.
    #[wasm_bindgen(getter)]
    pub fn time(&self) -> f64 {
        self.time
    }

    /// `L²` norm at the evolved time.
    #[wasm_bindgen(getter)]
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// `L²` norm of the initial packet.
    #[wasm_bindgen(getter)]
    pub fn initial_l2_norm(&self) -> f64 {
        self.initial_l2_norm
    }

    /// Density `|ψ|²` in display order: row-major, top row = largest `y`,
    /// first column = smallest `x`, box centred on the origin.
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
}

/// Evolve the packet `e^{ik·x} exp(−|x|²/(2w²)) (1, 0)ᵀ`, projected to the
/// `Π₊` (or `Π₋`) sheet, by the free Dirac flow for time `t` on an `N × N`
/// grid of side `length`.
pub fn run_packet(size: usize, length: f64, kx: f64, ky: f64, width: f64, t: f64, plus: bool) -> Result<PacketFrame, String> {
    if !(8..=MAX_PACKET_POINTS).contains(&size) {
        return Err(format!("points per axis must lie in 8..={MAX_PACKET_POINTS}"));
    }
    if [length, kx, ky, width, t].iter().any(|v| !v.is_finite()) {
        return Err("parameters must be finite".into());
    }
    let grid = Grid::new(2, size, length).map_err(|e| e.to_string())?;
    let sign = if plus { Sign::Plus } else { Sign::Minus };
    let spec =
        DataSpec::Packet { center: vec![0.0, 0.0], width, wavevector: vec![kx, ky], polarization: [1.0, 0.0, 0.0, 0.0], sheet: Some(sign), l2_norm: Some(1.0) };
    let initial = generate(&grid, &spec, 0).map_err(|e| e.to_string())?;
    let evolved = free_evolve(&initial, t, sign).map_err(|e| e.to_string())?.physical();
    let n = size;
    let mut density = vec![0.0; n * n];
    for (r, row) in density.chunks_exact_mut(n).enumerate() {
        let j = (n - 1 - r + n / 2) % n;
        for (c, cell) in row.iter_mut().enumerate() {
            let i = (c + n / 2) % n;
            *cell = evolved.at(i * n + j).iter().map(|z| z.norm_sqr()).sum();
        }
    }
    Ok(PacketFrame { size, time: t, l2_norm: evolved.l2_norm(), initial_l2_norm: initial.l2_norm(), density })
}

/// `p`-variation of `values` as JSON `{len, p, dp, enumeration}`;
/// `enumeration` is `null` beyond [`MAX_ENUMERATION_LEN`] entries.
pub fn run_p_variation(values: &[f64], p: f64) -> Result<String, String> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err("p must be a finite number ≥ 1".into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    let dp = vp_variation_scalar(values, p);
    let enumeration = (values.len() <= MAX_ENUMERATION_LEN).then(|| vp_enumerate(values.len(), p, |i, j| (values[j] - values[i]).abs()));
    Ok(json!({"len": values.len(), "p": p, "dp": dp, "enumeration": enumeration}).to_string())
}

/// Identity suite (JSON rows); see [`run_algebra`].
#[wasm_bindgen]
pub fn algebra_suite(samples: u32, seed: u32, fault: bool) -> Result<String, JsError> {
    run_algebra(samples as usize, seed as u64, fault).map_err(|e| JsError::new(&e))
}

/// Free packet propagation; see [`run_packet`].
#[wasm_bindgen]
pub fn propagate_packet(size: u32, length: f64, kx: f64, ky: f64, width: f64, t: f64, plus: bool) -> Result<PacketFrame, JsError> {
    run_packet(size as usize, length, kx, ky, width, t, plus).map_err(|e| JsError::new(&e))
}

/// `p`-variation of a sequence (JSON); see [`run_p_variation`].
#[wasm_bindgen]
pub fn p_variation(values: Vec<f64>, p: f64) -> Result<String, JsError> {
    run_p_variation(&values, p).map_err(|e| JsError::new(&e))
}
