//! Null frames: coordinates adapted to a light ray `(1, ω)/√2`, their duals, the
//! geometry of frequency sets seen from a frame, and restriction of trajectories
//! to null planes `{t_ω = const}`.
//!
//! # Coordinates
//!
//! ```text
//! t_ω  = (t + ω·x)/√2          x_ω¹ = (t − ω·x)/√2
//! x_ω^⊥ = x − (ω·x)ω           x_ω  = x_ω^⊥ − x_ω¹ ω/√2 = x − t_ω ω/√2
//! τ_ω  = (τ + ξ·ω)/√2          ξ_ω¹ = (τ − ξ·ω)/√2
//! ξ_ω^⊥ = ξ − (ξ·ω)ω           ξ_ω  = ξ − τω = ξ_ω^⊥ − √2 ξ_ω¹ ω
//! ```
//!
//! so that `τt + ξ·x = τ_ω t_ω + ξ_ω·x_ω` and `τ² − |ξ|² = 2τ_ωξ_ω¹ − |ξ_ω^⊥|²`.
//!
//! The map `(t, x) ↦ (t_ω, x_ω)` has Jacobian determinant `1/√2`; the map
//! `(t, x) ↦ (t_ω, x_ω¹, x_ω^⊥)` is an isometry.
//!
//! # Null planes
//!
//! A trajectory is restricted to the plane `t_ω = s` by sampling at each lattice
//! point `x` the time `t = √2 s − ω·x` (cubic Lagrange interpolation between
//! stored frames, zero outside the stored window). On a fixed plane `x_ω = x −
//! const`, so `L^r_{x_ω}` norms are lattice sums with the lattice measure.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::SQRT_2;

use crate::error::{LabError, Result};
use crate::grid::{Representation, SpinorField, Trajectory};
use crate::multiplier::{in_a_alpha_lambda, Cap, SetParams, Sign};
use crate::spinor::{angle, projector, Direction, Mat2};

/// The null frame attached to a direction `ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NullFrame {
    omega: Direction,
}

/// Null coordinates of an event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NullCoords {
    /// `t_ω`.
    pub t_omega: f64,
    /// `x_ω¹`.
    pub x1: f64,
    /// `x_ω^⊥` (orthogonal to ω; padded to three entries).
    pub x_perp: [f64; 3],
    /// `x_ω = x_ω^⊥ − x_ω¹ω/√2`.
    pub x_omega: [f64; 3],
}

/// Dual null coordinates of a space-time frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualNullCoords {
    /// `τ_ω`.
    pub tau_omega: f64,
    /// `ξ_ω¹`.
    pub xi1: f64,
    /// `ξ_ω^⊥` (orthogonal to ω; padded).
    pub xi_perp: [f64; 3],
    /// `ξ_ω = ξ_ω^⊥ − √2 ξ_ω¹ ω`.
    pub xi_omega: [f64; 3],
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl NullFrame {
    /// Frame for the direction `ω`.
    pub fn new(omega: Direction) -> Self {
        NullFrame { omega }
    }

    /// The direction `ω`.
    pub fn omega(&self) -> &Direction {
        &self.omega
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// Null coordinates of `(t, x)`.
    pub fn to_null(&self, t: f64, x: &[f64]) -> NullCoords {
        let w = self.omega.padded();
        let n = self.dim();
        let wx = dot(&w[..n], &x[..n]);
        let t_omega = (t + wx) / SQRT_2;
        let x1 = (t - wx) / SQRT_2;
        let mut x_perp = [0.0; 3];
        let mut x_omega = [0.0; 3];
        for j in 0..n {
            x_perp[j] = x[j] - wx * w[j];
            x_omega[j] = x_perp[j] - x1 * w[j] / SQRT_2;
        }
        NullCoords { t_omega, x1, x_perp, x_omega }
    }

    /// Inverse of [`NullFrame::to_null`]: `t = (t_ω + x_ω¹)/√2`, `x = x_ω^⊥ + (t_ω − x_ω¹)ω/√2`.
    pub fn from_null(&self, c: &NullCoords) -> (f64, [f64; 3]) {
        let w = self.omega.padded();
        let t = (c.t_omega + c.x1) / SQRT_2;
        let mut x = [0.0; 3];
        for j in 0..self.dim() {
            x[j] = c.x_perp[j] + (c.t_omega - c.x1) * w[j] / SQRT_2;
        }
        (t, x)
    }

    /// Recover null coordinates from `(t_ω, x_ω)` alone.
    pub fn from_t_and_x_omega(&self, t_omega: f64, x_omega: &[f64]) -> NullCoords {
        let w = self.omega.padded();
        let n = self.dim();
        let proj = dot(&w[..n], &x_omega[..n]);
        let x1 = -SQRT_2 * proj;
        let mut x_perp = [0.0; 3];
        let mut xo = [0.0; 3];
        for j in 0..n {
            x_perp[j] = x_omega[j] - proj * w[j];
            xo[j] = x_omega[j];
        }
        NullCoords { t_omega, x1, x_perp, x_omega: xo }
    }

    /// Dual null coordinates of `(τ, ξ)`.
    pub fn to_dual_null(&self, tau: f64, xi: &[f64]) -> DualNullCoords {
        let w = self.omega.padded();
        let n = self.dim();
        let xw = dot(&w[..n], &xi[..n]);
        let tau_omega = (tau + xw) / SQRT_2;
        let xi1 = (tau - xw) / SQRT_2;
        let mut xi_perp = [0.0; 3];
        let mut xi_omega = [0.0; 3];
        for j in 0..n {
            xi_perp[j] = xi[j] - xw * w[j];
            xi_omega[j] = xi_perp[j] - SQRT_2 * xi1 * w[j];
        }
        DualNullCoords { tau_omega, xi1, xi_perp, xi_omega }
    }

    /// Inverse of [`NullFrame::to_dual_null`].
    pub fn from_dual_null(&self, d: &DualNullCoords) -> (f64, [f64; 3]) {
        let w = self.omega.padded();
        let tau = (d.tau_omega + d.xi1) / SQRT_2;
        let xw = (d.tau_omega - d.xi1) / SQRT_2;
        let mut xi = [0.0; 3];
        for j in 0..self.dim() {
            xi[j] = d.xi_perp[j] + xw * w[j];
        }
        (tau, xi)
    }

    /// Matrix of the linear map `(t, x) ↦ (t_ω, x_ω)` (size `n+1`).
    pub fn jacobian_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut rows = vec![vec![0.0; n + 1]; n + 1];
        let mut basis = vec![0.0; n];
        for col in 0..=n {
            let (t, x) = if col == 0 {
                (1.0, vec![0.0; n])
            } else {
                basis.iter_mut().for_each(|b| *b = 0.0);
                basis[col - 1] = 1.0;
                (0.0, basis.clone())
            };
            let c = self.to_null(t, &x);
            rows[0][col] = c.t_omega;
            for j in 0..n {
                rows[j + 1][col] = c.x_omega[j];
            }
        }
        rows
    }

    /// Determinant of [`NullFrame::jacobian_matrix`] (equals `1/√2`).
    pub fn jacobian_determinant(&self) -> f64 {
        determinant(self.jacobian_matrix())
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Monte Carlo estimate of the `(t_ω, x_ω)`-volume of the image of the unit box in `(t, x)`.
///
/// Samples uniformly in the bounding box of the image and pulls back; the
/// result estimates `|det ∂(t_ω, x_ω)/∂(t, x)|`.
pub fn monte_carlo_volume(frame: &NullFrame, samples: usize, seed: u64) -> f64 {
    let n = frame.dim();
    let m = frame.jacobian_matrix();
    let mut lo = vec![f64::INFINITY; n + 1];
    let mut hi = vec![f64::NEG_INFINITY; n + 1];
    for corner in 0..(1usize << (n + 1)) {
        for (r, row) in m.iter().enumerate() {
            let v: f64 = (0..=n).map(|c| if corner >> c & 1 == 1 { row[c] } else { 0.0 }).sum();
            lo[r] = lo[r].min(v);
            hi[r] = hi[r].max(v);
        }
    }
    let bbox: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0usize;
    for _ in 0..samples {
        let p: Vec<f64> = (0..=n).map(|r| rng.random_range(lo[r]..hi[r])).collect();
        let c = frame.from_t_and_x_omega(p[0], &p[1..]);
        let (t, x) = frame.from_null(&c);
        if (0.0..1.0).contains(&t) && x[..n].iter().all(|v| (0.0..1.0).contains(v)) {
            inside += 1;
        }
    }
    bbox * inside as f64 / samples as f64
}

/// Measured ratios for the dual null coordinates of sampled points in `A_{α,λ}(κ)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DualSupportReport {
    /// `θ(ω, κ)`.
    pub theta: f64,
    /// `max |ξ_ω¹| / ((max{α, θ})² λ)`.
    pub max_xi1_ratio: f64,
    /// `max |ξ_ω^⊥| / (max{α, θ} λ)`.
    pub max_perp_ratio: f64,
    /// `max |τ_ω| / λ`.
    pub max_tau_ratio: f64,
    /// `min |ξ_ω¹| / (θ² λ)` when `ω ∉ 2κ`.
    pub min_xi1_ratio: Option<f64>,
    /// Number of points.
    pub count: usize,
}

/// Bounds on the dual null coordinates of sampled frequency points.
pub fn dual_support_bounds(frame: &NullFrame, cap: &Cap, lambda: f64, points: &[(f64, Vec<f64>)]) -> Result<DualSupportReport> {
    if points.is_empty() {
        return Err(LabError::domain("empty sample of frequency points"));
    }
    let w = frame.omega().as_slice();
    let theta = cap.angle_to(w);
    let scale = cap.alpha.max(theta);
    let outside = !cap.contains_scaled(w, 2.0);
    let mut rep = DualSupportReport {
        theta,
        max_xi1_ratio: 0.0,
        max_perp_ratio: 0.0,
        max_tau_ratio: 0.0,
        min_xi1_ratio: outside.then_some(f64::INFINITY),
        count: points.len(),
    };
    for (tau, xi) in points {
        let d = frame.to_dual_null(*tau, xi);
        let perp = d.xi_perp.iter().map(|v| v * v).sum::<f64>().sqrt();
        rep.max_xi1_ratio = rep.max_xi1_ratio.max(d.xi1.abs() / (scale * scale * lambda));
        rep.max_perp_ratio = rep.max_perp_ratio.max(perp / (scale * lambda));
        rep.max_tau_ratio = rep.max_tau_ratio.max(d.tau_omega.abs() / lambda);
        if let Some(m) = rep.min_xi1_ratio.as_mut() {
            *m = m.min(d.xi1.abs() / (theta * theta * lambda));
        }
    }
    Ok(rep)
}

/// Random sample of `A_{α,λ}(κ)` (uniform in the sector, both time orientations).
pub fn sample_a_alpha_lambda(cap: &Cap, lambda: f64, c_mod: f64, count: usize, seed: u64) -> Vec<(f64, Vec<f64>)> {
    let p = SetParams { lambda, cap: *cap, c_mod, natural: false };
    let n = cap.center.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = rng.random_range(lambda / 2.0..=2.0 * lambda);
        let dir: Vec<f64> = match n {
            2 => {
                let phi = cap.center.as_slice()[1].atan2(cap.center.as_slice()[0]) + rng.random_range(-cap.alpha..=cap.alpha);
                vec![phi.cos(), phi.sin()]
            }
            _ => {
                let v: Vec<f64> = (0..n).map(|j| cap.center.as_slice()[j] + rng.random_range(-cap.alpha..=cap.alpha)).collect();
                let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.iter().map(|x| x / l).collect()
            }
        };
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let m = rng.random_range(-1.0..=1.0) * p.modulation_bound();
        let xi: Vec<f64> = dir.iter().map(|d| s * r * d).collect();
        let tau = s * (r + m);
        if in_a_alpha_lambda(tau, &xi, &p) {
            out.push((tau, xi));
        }
    }
    out
}

/// Orthonormal basis of `ω^⊥`.
fn perp_basis(omega: &[f64]) -> Vec<Vec<f64>> {
    match omega.len() {
        1 => vec![],
        2 => vec![vec![-omega[1], omega[0]]],
        _ => {
            let a = if omega[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let d = dot(&a, omega);
            let mut e1: Vec<f64> = (0..3).map(|j| a[j] - d * omega[j]).collect();
            let l = e1.iter().map(|x| x * x).sum::<f64>().sqrt();
            e1.iter_mut().for_each(|x| *x /= l);
            let e2 = vec![omega[1] * e1[2] - omega[2] * e1[1], omega[2] * e1[0] - omega[0] * e1[2], omega[0] * e1[1] - omega[1] * e1[0]];
            vec![e1, e2]
        }
    }
}

/// Whether the dual point `(ξ_ω¹, ξ_ω^⊥)` lies in `𝒫r_ω[♮A_{α,λ}(κ)]`.
///
/// Translation along `(1, ω)` only moves `τ_ω`; by `τ² − |ξ|² = 2τ_ωξ_ω¹ − |ξ_ω^⊥|²`
/// the admissible `τ_ω` form a short interval around `|ξ_ω^⊥|²/(2ξ_ω¹)`, which is scanned.
fn in_projected_set(frame: &NullFrame, xi1: f64, xi_perp: &[f64; 3], p: &SetParams) -> bool {
    if xi1 == 0.0 {
        return false;
    }
    let perp2: f64 = xi_perp.iter().map(|v| v * v).sum();
    let delta = p.modulation_bound();
    let reach = 4.0 * p.lambda * 1.02 + delta;
    let center = perp2 / (2.0 * xi1);
    let half = delta * reach / (2.0 * xi1.abs());
    const STEPS: usize = 128;
    (0..=STEPS).any(|k| {
        let tau_omega = center + half * (2.0 * k as f64 / STEPS as f64 - 1.0);
        let d = DualNullCoords { tau_omega, xi1, xi_perp: *xi_perp, xi_omega: [0.0; 3] };
        let (tau, xi) = frame.from_dual_null(&d);
        in_a_alpha_lambda(tau, &xi[..frame.dim()], p)
    })
}

/// Maximal overlap of the projected sets `𝒫r_ω[♮A_{α,λ}(κ)]` over the given caps.
///
/// The dual plane `(ξ_ω¹, ξ_ω^⊥)` is sampled on a lattice of step `step`
/// restricted to bounding boxes of the individual sets.
pub fn null_projection_overlap(frame: &NullFrame, lambda: f64, caps: &[Cap], c_mod: f64, step: f64) -> Result<usize> {
    let w = frame.omega().as_slice().to_vec();
    let n = frame.dim();
    if n < 2 {
        return Err(LabError::domain("projected-set overlap needs n ≥ 2"));
    }
    for cap in caps {
        if cap.contains_scaled(&w, 2.0) {
            return Err(LabError::domain("every cap must satisfy ω ∉ 2κ"));
        }
    }
    let basis = perp_basis(&w);
    let mut counts: std::collections::HashMap<Vec<i64>, usize> = std::collections::HashMap::new();
    for (ci, cap) in caps.iter().enumerate() {
        let p = SetParams { lambda, cap: *cap, c_mod, natural: true };
        // Bounding box from a forward sample of the enlarged set.
        let sample = sample_a_alpha_lambda(&cap.scaled(crate::multiplier::NATURAL_FACTOR), lambda, c_mod, 2000, ci as u64);
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for (tau, xi) in &sample {
            let d = frame.to_dual_null(*tau, xi);
            let mut coords = vec![d.xi1];
            coords.extend(basis.iter().map(|e| dot(e, &d.xi_perp[..n])));
            for j in 0..n {
                lo[j] = lo[j].min(coords[j]);
                hi[j] = hi[j].max(coords[j]);
            }
        }
        let lo_i: Vec<i64> = lo.iter().map(|v| ((v - 0.1 * lambda) / step).floor() as i64).collect();
        let hi_i: Vec<i64> = hi.iter().map(|v| ((v + 0.1 * lambda) / step).ceil() as i64).collect();
        let mut idx = lo_i.clone();
        loop {
            let xi1 = idx[0] as f64 * step;
            let mut xp = [0.0; 3];
            for (b, e) in basis.iter().enumerate() {
                let c = idx[b + 1] as f64 * step;
                for j in 0..n {
                    xp[j] += c * e[j];
                }
            }
            if in_projected_set(frame, xi1, &xp, &p) {
                *counts.entry(idx.clone()).or_insert(0) += 1;
            }
            let mut k = 0;
            loop {
                if k == n {
                    break;
                }
                idx[k] += 1;
                if idx[k] <= hi_i[k] {
                    break;
                }
                idx[k] = lo_i[k];
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
    Ok(counts.values().copied().max().unwrap_or(0))
}

/// The two sides of the angle relation `θ(ξ+ξ′, ±ξ′)² ≈ ||ξ+ξ′| ∓ |ξ′| − |ξ|| ||ξ+ξ′| ∓ |ξ′| + |ξ|| / (|ξ+ξ′||ξ′|)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AngleEstimate {
    /// `θ(ξ+ξ′, ±ξ′)²`.
    pub theta_sq: f64,
    /// The modulation quotient.
    pub quotient: f64,
}

impl AngleEstimate {
    /// `θ² / quotient` (`NaN` when both vanish).
    pub fn ratio(&self) -> f64 {
        self.theta_sq / self.quotient
    }
}

/// Evaluate both sides of the angle relation for a pair of frequencies.
pub fn angle_estimates(xi: &[f64], xi_p: &[f64], sign: Sign) -> Result<AngleEstimate> {
    let sum: Vec<f64> = xi.iter().zip(xi_p).map(|(a, b)| a + b).collect();
    let ns = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    let np = xi_p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nx = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ns == 0.0 || np == 0.0 {
        return Err(LabError::domain("angle estimate needs ξ + ξ′ ≠ 0 and ξ′ ≠ 0"));
    }
    let s = sign.value();
    let signed: Vec<f64> = xi_p.iter().map(|v| s * v).collect();
    let theta = angle(&sum, &signed);
    let a = (ns - s * np - nx).abs();
    let b = (ns - s * np + nx).abs();
    Ok(AngleEstimate { theta_sq: theta * theta, quotient: a * b / (ns * np) })
}

/// `|ω − ω′|` for two unit vectors at angle `θ`: `2 sin(θ/2)`.
pub fn chord_length(theta: f64) -> f64 {
    2.0 * (theta / 2.0).sin()
}

/// Values of a trajectory on null planes `t_ω = s_k`.
#[derive(Clone, Debug, Serialize)]
pub struct NullProfile {
    /// Plane parameters `s_k`.
    pub s: Vec<f64>,
    /// Spacing of `s`.
    pub ds: f64,
    /// `values[j][k]`: inner `L^r_{x_ω}` norm of the `j`-th projected field on plane `k`.
    pub values: Vec<Vec<f64>>,
}

impl NullProfile {
    /// `L^q_{t_ω}` norm of the `j`-th row.
    pub fn lq(&self, j: usize, q: f64) -> f64 {
        crate::norms::time_lq(&self.values[j], self.ds, q)
    }
}

/// Cubic Lagrange interpolation weights for fractional position `u ∈ [0, 1]`
/// between nodes 1 and 2 of the stencil `{0, 1, 2, 3}`.
fn cubic_weights(u: f64) -> [f64; 4] {
    let x = u + 1.0;
    [-(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0, x * (x - 2.0) * (x - 3.0) / 2.0, -x * (x - 1.0) * (x - 3.0) / 2.0, x * (x - 1.0) * (x - 2.0) / 6.0]
}

/// Restrict a trajectory to the null plane `t_ω = s`: values at every lattice
/// point `x` at time `t = √2 s − ω·x` (zero outside the stored time window).
///
/// `frames` must all be in physical representation.
pub fn null_slice(frames: &[SpinorField], t0: f64, dt: f64, frame: &NullFrame, s: f64) -> Result<SpinorField> {
    let grid = frames[0].grid().clone();
    let comps = frames[0].comps();
    if frames.iter().any(|f| f.repr() != Representation::Physical) {
        return Err(LabError::domain("null-plane restriction needs physical frames"));
    }
    let np = grid.points();
    let m = frames.len();
    let w = frame.omega().padded();
    let n = grid.dim();
    let mut data = vec![C64::new(0.0, 0.0); comps * np];
    for idx in 0..np {
        let x = grid.position(idx);
        let wx: f64 = (0..n).map(|j| w[j] * x[j]).sum();
        let t = SQRT_2 * s - wx;
        let pos = (t - t0) / dt;
        if pos < 0.0 || pos > (m - 1) as f64 {
            continue;
        }
        let k = (pos.floor() as usize).min(m - 2);
        let base = if k == 0 {
            0
        } else if k + 2 >= m {
            m.saturating_sub(4)
        } else {
            k - 1
        };
        if m < 4 {
            let u = pos - k as f64;
            for c in 0..comps {
                data[c * np + idx] = frames[k].data()[c * np + idx] * (1.0 - u) + frames[k + 1].data()[c * np + idx] * u;
            }
            continue;
        }
        let u = pos - base as f64 - 1.0;
        let wts = cubic_weights(u);
        for c in 0..comps {
            let mut acc = C64::new(0.0, 0.0);
            for (j, wt) in wts.iter().enumerate() {
                acc += frames[base + j].data()[c * np + idx] * wt;
            }
            data[c * np + idx] = acc;
        }
    }
    SpinorField::from_data(&grid, comps, Representation::Physical, data)
}

/// Range of `s = t_ω` covering the trajectory on the centred fundamental domain.
pub fn null_window(traj: &Trajectory, frame: &NullFrame) -> (f64, f64) {
    let half = traj.grid().length() / 2.0;
    let reach: f64 = frame.omega().as_slice().iter().map(|w| w.abs() * half).sum();
    let t1 = traj.time(traj.len() - 1);
    ((traj.t0() - reach) / SQRT_2, (t1 + reach) / SQRT_2)
}

/// Inner `L^r_{x_ω}` norms on null planes for several pointwise projections of the field.
///
/// `projections[j]` is applied pointwise (2×2) before taking norms; pass an
/// empty slice for the plain field.
pub fn null_profile(traj: &Trajectory, frame: &NullFrame, projections: &[Mat2], r: f64) -> Result<NullProfile> {
    let mut t = traj.clone();
    t.to_physical();
    let grid = t.grid().clone();
    let dt = t.dt();
    let ds = dt / SQRT_2;
    let (s0, s1) = null_window(&t, frame);
    let count = ((s1 - s0) / ds).ceil() as usize + 1;
    let np = grid.points();
    let rows = projections.len().max(1);
    let mut values = vec![vec![0.0; count]; rows];
    let s: Vec<f64> = (0..count).map(|k| s0 + k as f64 * ds).collect();
    if !projections.is_empty() && t.comps() != 2 {
        return Err(LabError::Shape("projections need two-component fields".into()));
    }
    for (k, &sk) in s.iter().enumerate() {
        let slice = null_slice(t.frames(), t.t0(), dt, frame, sk)?;
        for (j, row) in values.iter_mut().enumerate() {
            let pointwise: Vec<f64> = (0..np)
                .map(|idx| {
                    if projections.is_empty() {
                        slice.at(idx).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
                    } else {
                        let v = projections[j].apply(&slice.at2(idx));
                        (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
                    }
                })
                .collect();
            row[k] = crate::norms::lattice_lr(&pointwise, grid.cell_volume(), r);
        }
    }
    Ok(NullProfile { s, ds, values })
}

/// A null-frame mixed norm with its interpolation error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NullNorm {
    /// `‖u‖_{L^q_{t_ω}L^r_{x_ω}}`.
    pub value: f64,
    /// `|value − value on every other stored frame|`.
    pub interp_error: f64,
}

/// Keep every other frame of a trajectory (time step doubled).
pub fn halve_frames(traj: &Trajectory) -> Result<Trajectory> {
    let frames: Vec<SpinorField> = traj.frames().iter().step_by(2).cloned().collect();
    Trajectory::new(traj.t0(), 2.0 * traj.dt(), frames)
}

/// `L^q_{t_ω}L^r_{x_ω}` norms of `projections[j]·u` (or of `u` when empty), with frame-halving error bars.
pub fn null_norms(traj: &Trajectory, frame: &NullFrame, projections: &[Mat2], q: f64, r: f64) -> Result<Vec<NullNorm>> {
    let fine = null_profile(traj, frame, projections, r)?;
    let coarse = if traj.len() >= 8 { Some(null_profile(&halve_frames(traj)?, frame, projections, r)?) } else { None };
    Ok((0..fine.values.len())
        .map(|j| {
            let value = fine.lq(j, q);
            let interp_error = coarse.as_ref().map(|c| (c.lq(j, q) - value).abs()).unwrap_or(f64::NAN);
            NullNorm { value, interp_error }
        })
        .collect())
}

/// Which side of an atomic norm a null-frame functional bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Upper bound for an infimum over atoms (single-frame evaluation).
    Upper,
    /// Lower bound for a supremum (sampled directions).
    Lower,
}

/// Value of a single-frame null functional.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NullFunctional {
    /// Functional value.
    pub value: f64,
    /// Interpolation error estimate.
    pub interp_error: f64,
    /// Which side of the true norm the value bounds.
    pub bound: Bound,
    /// `θ(ω, κ)` of the frame used.
    pub theta: f64,
}

fn pm_projectors(omega: &Direction, sign: Sign) -> (Mat2, Mat2) {
    let same = if sign == Sign::Plus { *omega } else { omega.neg() };
    (projector(&same), projector(&same.neg()))
}

/// The `NF^±(κ)` functional `‖Π_{±ω}F‖_{L¹L²} + θ(ω,κ)^{−1}‖Π_{∓ω}F‖_{L¹L²}` in the frame `ω ∉ 2κ`.
pub fn nf_functional(traj: &Trajectory, frame: &NullFrame, cap: &Cap, sign: Sign) -> Result<NullFunctional> {
    let w = frame.omega().as_slice();
    if cap.contains_scaled(w, 2.0) {
        return Err(LabError::domain("NF functional needs ω ∉ 2κ"));
    }
    let theta = cap.angle_to(w);
    let (a, b) = pm_projectors(frame.omega(), sign);
    let v = null_norms(traj, frame, &[a, b], 1.0, 2.0)?;
    Ok(NullFunctional { value: v[0].value + v[1].value / theta, interp_error: v[0].interp_error + v[1].interp_error / theta, bound: Bound::Upper, theta })
}

/// The `PW^±(κ)` functional `‖Π_{±ω}ψ‖_{L²L^∞} + α^{−1}‖Π_{∓ω}ψ‖_{L²L^∞}` in the frame `ω ∈ 2κ`.
pub fn pw_functional(traj: &Trajectory, frame: &NullFrame, cap: &Cap, sign: Sign) -> Result<NullFunctional> {
    let w = frame.omega().as_slice();
    if !cap.contains_scaled(w, 2.0) {
        return Err(LabError::domain("PW functional needs ω ∈ 2κ"));
    }
    let (a, b) = pm_projectors(frame.omega(), sign);
    let v = null_norms(traj, frame, &[a, b], 2.0, f64::INFINITY)?;
    Ok(NullFunctional {
        value: v[0].value + v[1].value / cap.alpha,
        interp_error: v[0].interp_error + v[1].interp_error / cap.alpha,
        bound: Bound::Upper,
        theta: cap.angle_to(w),
    })
}

/// The `[NF^±]^*(κ)` functional `sup_ω (‖Π_{±ω}u‖_{L^∞L²} + θ(ω,κ)‖Π_{∓ω}u‖_{L^∞L²})`
/// over the sampled directions (all required to lie outside `2κ`).
///
/// Returns the value and the index of the maximising direction.
pub fn nf_star_functional(traj: &Trajectory, directions: &[Direction], cap: &Cap, sign: Sign) -> Result<(NullFunctional, usize)> {
    let mut best: Option<(NullFunctional, usize)> = None;
    for (i, omega) in directions.iter().enumerate() {
        let w = omega.as_slice();
        if cap.contains_scaled(w, 2.0) {
            return Err(LabError::domain("[NF]* directions must lie outside 2κ"));
        }
        let theta = cap.angle_to(w);
        let (a, b) = pm_projectors(omega, sign);
        let v = null_norms(traj, &NullFrame::new(*omega), &[a, b], f64::INFINITY, 2.0)?;
        let f =
            NullFunctional { value: v[0].value + theta * v[1].value, interp_error: v[0].interp_error + theta * v[1].interp_error, bound: Bound::Lower, theta };
        if best.as_ref().is_none_or(|(b, _)| f.value > b.value) {
            best = Some((f, i));
        }
    }
    best.ok_or_else(|| LabError::domain("no directions supplied"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_examples() {
        let f = NullFrame::new(Direction::new(&[1.0, 0.0]).unwrap());
        let c = f.to_null(1.0, &[1.0, 0.0]);
        assert!((c.t_omega - SQRT_2).abs() < 1e-15);
        assert!(c.x1.abs() < 1e-15);
        assert!(c.x_perp.iter().all(|v| v.abs() < 1e-15));
        let d = f.to_dual_null(2.0, &[1.0, 0.0]);
        assert!((d.tau_omega - 3.0 / SQRT_2).abs() < 1e-15);
        assert!((d.xi1 - 1.0 / SQRT_2).abs() < 1e-15);
        assert!((2.0 * d.tau_omega * d.xi1 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobian_is_inverse_root_two() {
        for n in 1..=3 {
            let w: Vec<f64> = (0..n).map(|j| j as f64 + 1.0).collect();
            let f = NullFrame::new(Direction::normalized(&w).unwrap());
            assert!((f.jacobian_determinant().abs() - 1.0 / SQRT_2).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        for &u in &[0.0, 0.3, 0.5, 1.0] {
            let w = cubic_weights(u);
            let p = |x: f64| 1.0 + 2.0 * x - x * x + 0.5 * x * x * x;
            let val: f64 = (0..4).map(|j| w[j] * p(j as f64)).sum();
            assert!((val - p(1.0 + u)).abs() < 1e-12);
        }
    }
}
