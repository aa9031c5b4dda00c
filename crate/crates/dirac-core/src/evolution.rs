//! Linear and nonlinear evolution.
//!
//! * Free flows `𝒰_±(t) = e^{∓itσ·∇/i} = cos(t|ξ|) ∓ i sin(t|ξ|) σ·ξ/|ξ|`, i.e.
//!   `e^{∓it|∇|}Π₊ + e^{±it|∇|}Π₋`, solving `(∂_t ± σ·∇)u = 0`.
//! * The massive Hamiltonian flow `e^{−itH}` with `H = σ·ξ + mσ³` (`n ≤ 2`) or
//!   `H = α·ξ + mγ⁰` (`n = 3`), using `H² = (|ξ|² + m²) I`.
//! * Traveling-wave decomposition of `𝒰_−(t)g` into an average over directions
//!   of plane waves `Π_ω g_ω(t + x·ω)`.
//! * Duhamel integration in the interaction picture (fourth-order quadrature).
//! * The forward fundamental solution in null coordinates for space-time
//!   periodic forcing supported away from the cone and the null plane.
//! * The nonlinear solver: Lawson (integrating-factor) RK4 with the exact linear
//!   propagator, 2/3-rule dealiasing, charge tripwire, breakdown diagnostics and
//!   checkpoint/resume.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{signed_index, Grid, Representation, SpinorField, Trajectory};
use crate::multiplier::Sign;
use crate::null_frame::NullFrame;
use crate::spacetime::SpaceTimeField;
use crate::spinor::{alpha3, gamma3, pauli, projector_of, psi_form_rhs, sigma_dot, soler_thirring_rhs, Direction, Mat2, Model};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const IM: C64 = C64 { re: 0.0, im: 1.0 };

/// A linear flow acting on a block of spinor components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearFlow {
    /// `∂_t u = −i(±σ·ξ + mσ³)u` on two components (`𝒰_±` when `m = 0`).
    Dirac2 {
        /// Sign of the transport term.
        sign: Sign,
        /// Mass.
        mass: f64,
    },
    /// `∂_t ψ = −i(α·ξ + mγ⁰)ψ` on four components (`n = 3`).
    Dirac4 {
        /// Mass.
        mass: f64,
    },
}

impl LinearFlow {
    /// Number of spinor components acted on.
    pub fn comps(&self) -> usize {
        match self {
            LinearFlow::Dirac2 { .. } => 2,
            LinearFlow::Dirac4 { .. } => 4,
        }
    }

    /// Row-major `d×d` matrix of `e^{−itH(ξ)}`.
    pub fn matrix(&self, xi: &[f64], t: f64) -> Vec<C64> {
        match *self {
            LinearFlow::Dirac2 { sign, mass } => {
                let h = sigma_dot(xi).scale(C64::from(sign.value())) + pauli(3).scale(C64::from(mass));
                let e = (xi.iter().map(|x| x * x).sum::<f64>() + mass * mass).sqrt();
                let u = exp_hamiltonian2(&h, e, t);
                vec![u.m[0][0], u.m[0][1], u.m[1][0], u.m[1][1]]
            }
            LinearFlow::Dirac4 { mass } => {
                let mut h = gamma3(0).scale(C64::from(mass));
                for (j, x) in xi.iter().enumerate() {
                    h = h + alpha3(j + 1).scale(C64::from(*x));
                }
                let e = (xi.iter().map(|x| x * x).sum::<f64>() + mass * mass).sqrt();
                let (c, s) = if e == 0.0 { (1.0, t) } else { ((t * e).cos(), (t * e).sin() / e) };
                let mut out = vec![ZERO; 16];
                for i in 0..4 {
                    for j in 0..4 {
                        out[i * 4 + j] = h.m[i][j] * C64::new(0.0, -s) + if i == j { C64::from(c) } else { ZERO };
                    }
                }
                out
            }
        }
    }
}

/// `e^{−itH} = cos(tE) − i sin(tE) H/E` for a 2×2 Hermitian `H` with `H² = E²`.
fn exp_hamiltonian2(h: &Mat2, e: f64, t: f64) -> Mat2 {
    let (c, s) = if e == 0.0 { (1.0, t) } else { ((t * e).cos(), (t * e).sin() / e) };
    Mat2::identity().scale(C64::from(c)) + h.scale(C64::new(0.0, -s))
}

/// Per-mode propagator matrices for a fixed time step, for a state made of
/// consecutive component blocks.
#[derive(Clone, Debug)]
pub struct PropagatorCache {
    grid: Arc<Grid>,
    blocks: Vec<LinearFlow>,
    t: f64,
    mats: Vec<Vec<Vec<C64>>>,
}

impl PropagatorCache {
    /// Cache `e^{−itH}` for every block and lattice mode.
    pub fn new(grid: &Arc<Grid>, blocks: &[LinearFlow], t: f64) -> Self {
        let mats = blocks.iter().map(|b| (0..grid.points()).map(|idx| b.matrix(grid.xi(idx), t)).collect()).collect();
        PropagatorCache { grid: grid.clone(), blocks: blocks.to_vec(), t, mats }
    }

    /// Total number of components.
    pub fn comps(&self) -> usize {
        self.blocks.iter().map(|b| b.comps()).sum()
    }

    /// Cached time.
    pub fn time(&self) -> f64 {
        self.t
    }

    /// Apply to Fourier coefficients stored component-major.
    pub fn apply_spectrum(&self, data: &mut [C64]) {
        let np = self.grid.points();
        let mut offset = 0;
        let mut buf = [ZERO; 4];
        for (b, block) in self.blocks.iter().enumerate() {
            let d = block.comps();
            for idx in 0..np {
                let m = &self.mats[b][idx];
                for i in 0..d {
                    buf[i] = (0..d).map(|j| m[i * d + j] * data[(offset + j) * np + idx]).sum();
                }
                for i in 0..d {
                    data[(offset + i) * np + idx] = buf[i];
                }
            }
            offset += d;
        }
    }

    /// Apply to a field (result in Fourier representation).
    pub fn apply(&self, field: &mut SpinorField) -> Result<()> {
        if field.comps() != self.comps() {
            return Err(LabError::Shape(format!("propagator for {} components, field has {}", self.comps(), field.comps())));
        }
        field.to_fourier();
        self.apply_spectrum(field.data_mut());
        Ok(())
    }
}

/// Apply the flow of `blocks` for time `t` (result in the input's representation).
pub fn evolve_blocks(f: &SpinorField, blocks: &[LinearFlow], t: f64) -> Result<SpinorField> {
    let cache = PropagatorCache::new(f.grid(), blocks, t);
    let mut g = f.clone();
    let repr = f.repr();
    cache.apply(&mut g)?;
    if repr == Representation::Physical {
        g.to_physical();
    }
    Ok(g)
}

/// `𝒰_±(t) f`, the solution of `(∂_t ± σ·∇)u = 0` with `u(0) = f`.
pub fn free_evolve(f: &SpinorField, t: f64, sign: Sign) -> Result<SpinorField> {
    if f.comps() != 2 {
        return Err(LabError::Shape("free evolution acts on two-component fields".into()));
    }
    evolve_blocks(f, &[LinearFlow::Dirac2 { sign, mass: 0.0 }], t)
}

/// Free trajectory `𝒰_±(t_k) f` at `t_k = t0 + k dt`.
pub fn free_trajectory(f: &SpinorField, sign: Sign, t0: f64, dt: f64, frames: usize) -> Result<Trajectory> {
    let spec = f.fourier();
    let step = PropagatorCache::new(f.grid(), &[LinearFlow::Dirac2 { sign, mass: 0.0 }], dt);
    let mut cur = free_evolve(&spec, t0, sign)?;
    let mut out = Vec::with_capacity(frames);
    for k in 0..frames {
        if k > 0 {
            step.apply(&mut cur)?;
        }
        out.push(cur.physical());
    }
    Trajectory::new(t0, dt, out)
}

/// Frequency-domain representation of `𝒰_−(t)g` as an average of plane waves,
/// `v(t, x) = Σ_j w_j Π_{ω_j} g_{ω_j}(t + x·ω_j)`.
#[derive(Clone, Debug, Serialize)]
pub struct FreeWaveAverage {
    /// Spatial dimension.
    pub n: usize,
    /// Quadrature directions.
    pub directions: Vec<Direction>,
    /// Quadrature weights (sum to `|𝕊^{n−1}|`).
    pub weights: Vec<f64>,
    /// Radial nodes `r_k` (composite Gauss–Legendre, four nodes per lattice spacing).
    pub radii: Vec<f64>,
    /// Radial quadrature weights.
    pub radial_weights: Vec<f64>,
    /// `ĝ(r_k ω_j)` per direction.
    forward: Vec<Vec<[C64; 2]>>,
    /// `ĝ(−r_k ω_j)` per direction.
    backward: Vec<Vec<[C64; 2]>>,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pm, pm1) = if m == 1 { (z, 1.0) } else { (p1, p0) };
            let dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=m {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Direction quadrature on `𝕊^{n−1}`: uniform on the circle (`n = 2`), or
/// Gauss–Legendre in `cos θ` × uniform in `φ` with `n_dirs/2` polar nodes (`n = 3`).
pub fn sphere_quadrature(n: usize, n_dirs: usize) -> Result<(Vec<Direction>, Vec<f64>)> {
    match n {
        2 => Ok(((0..n_dirs).map(|j| Direction::from_angle(2.0 * PI * j as f64 / n_dirs as f64)).collect(), vec![2.0 * PI / n_dirs as f64; n_dirs])),
        3 => {
            let (zs, ws) = gauss_legendre((n_dirs / 2).max(2));
            let mut dirs = Vec::new();
            let mut wts = Vec::new();
            for (z, wz) in zs.iter().zip(&ws) {
                for j in 0..n_dirs {
                    let phi = 2.0 * PI * j as f64 / n_dirs as f64;
                    let r = (1.0 - z * z).sqrt();
                    dirs.push(Direction::normalized(&[r * phi.cos(), r * phi.sin(), *z])?);
                    wts.push(wz * 2.0 * PI / n_dirs as f64);
                }
            }
            Ok((dirs, wts))
        }
        _ => Err(LabError::domain(format!("direction quadrature for n = 2, 3 only (got {n})"))),
    }
}

/// Continuous Fourier transform `∫ e^{−ix·ξ} g(x) dx` of a field at an arbitrary frequency
/// (lattice quadrature on the centred fundamental domain).
pub fn continuous_transform(g: &SpinorField, xi: &[f64]) -> [C64; 2] {
    let grid = g.grid();
    let np = grid.points();
    let mut acc = [ZERO; 2];
    for idx in 0..np {
        let x = grid.position(idx);
        let phase: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
        let e = C64::from_polar(grid.cell_volume(), -phase);
        acc[0] += e * g.data()[idx];
        acc[1] += e * g.data()[np + idx];
    }
    acc
}

/// Decompose `𝒰_−(t)g` into traveling waves along `n_dirs` quadrature directions.
pub fn traveling_wave_decompose(g: &SpinorField, n_dirs: usize) -> Result<FreeWaveAverage> {
    let grid = g.grid().clone();
    let n = grid.dim();
    if !(2..=3).contains(&n) {
        return Err(LabError::domain("traveling-wave decomposition is defined for n = 2, 3"));
    }
    if g.comps() != 2 {
        return Err(LabError::Shape("traveling-wave decomposition acts on two-component fields".into()));
    }
    if n_dirs < 8 {
        return Err(LabError::Resolution(format!("need at least 8 directions, got {n_dirs}")));
    }
    let phys = g.physical();
    let spec = g.fourier();
    let np = grid.points();
    // Radial extent: the largest lattice frequency carrying mass.
    let total: f64 = spec.data().iter().map(|z| z.norm_sqr()).sum();
    let r_max =
        (0..np).filter(|&i| spec.data()[i].norm_sqr() + spec.data()[np + i].norm_sqr() > 1e-24 * total).map(|i| grid.xi_norm(i)).fold(0.0, f64::max) * 1.05;
    // Composite Gauss–Legendre panels keep the quadrature high order at r = 0,
    // where the polar integrand r^{n−1}ĝ(rω) has a non-vanishing derivative.
    let panel = grid.dk();
    let panels = (r_max / panel).ceil().max(1.0) as usize;
    let (gx, gw) = gauss_legendre(4);
    let mut radii = Vec::with_capacity(4 * panels);
    let mut radial_weights = Vec::with_capacity(4 * panels);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * panel;
        for (x, w) in gx.iter().zip(&gw) {
            radii.push(mid + 0.5 * panel * x);
            radial_weights.push(0.5 * panel * w);
        }
    }
    let (directions, weights) = sphere_quadrature(n, n_dirs)?;
    let mut forward = Vec::with_capacity(directions.len());
    let mut backward = Vec::with_capacity(directions.len());
    for w in &directions {
        let ws = w.as_slice();
        forward.push(radii.iter().map(|r| continuous_transform(&phys, &ws.iter().map(|c| r * c).collect::<Vec<_>>())).collect());
        backward.push(radii.iter().map(|r| continuous_transform(&phys, &ws.iter().map(|c| -r * c).collect::<Vec<_>>())).collect());
    }
    Ok(FreeWaveAverage { n, directions, weights, radii, radial_weights, forward, backward })
}

impl FreeWaveAverage {
    /// Profile `g_{ω_j}(a) = (2π)^{−n} ∫₀^∞ [e^{ira}ĝ(rω) + e^{−ira}ĝ(−rω)] r^{n−1} dr`.
    pub fn profile(&self, j: usize, a: f64) -> [C64; 2] {
        let mut acc = [ZERO; 2];
        let pow = (self.n - 1) as i32;
        for (k, r) in self.radii.iter().enumerate() {
            let wr = r.powi(pow) * self.radial_weights[k];
            let e = C64::from_polar(wr, r * a);
            let ec = e.conj();
            for c in 0..2 {
                acc[c] += e * self.forward[j][k][c] + ec * self.backward[j][k][c];
            }
        }
        let s = (2.0 * PI).powi(-(self.n as i32));
        [acc[0] * s, acc[1] * s]
    }

    /// Profiles on a uniform 1-d grid of `a` values.
    pub fn profile_on(&self, j: usize, a: &[f64]) -> Vec<[C64; 2]> {
        a.iter().map(|&x| self.profile(j, x)).collect()
    }

    /// `‖Π_{ω_j} g_{ω_j}‖_{L²(ℝ)}` by Plancherel in `a`.
    pub fn projected_mass(&self, j: usize) -> f64 {
        let p = projector_of(self.directions[j].as_slice());
        let pow = 2 * (self.n as i32 - 1);
        let mut s = 0.0;
        for (k, r) in self.radii.iter().enumerate() {
            let a = p.apply(&self.forward[j][k]);
            let b = p.apply(&self.backward[j][k]);
            s += (a[0].norm_sqr() + a[1].norm_sqr() + b[0].norm_sqr() + b[1].norm_sqr()) * r.powi(pow) * self.radial_weights[k];
        }
        (2.0 * PI * s).sqrt() * (2.0 * PI).powi(-(self.n as i32))
    }

    /// Quadrature of `∫_{𝕊^{n−1}} ‖Π_ω g_ω‖_{L²} d𝕊(ω)`.
    pub fn angular_l1(&self) -> f64 {
        (0..self.directions.len()).map(|j| self.weights[j] * self.projected_mass(j)).sum()
    }

    /// Reassemble `v(t, ·)` on the grid of `like`.
    pub fn reassemble(&self, like: &Arc<Grid>, t: f64) -> SpinorField {
        let np = like.points();
        let mut data = vec![ZERO; 2 * np];
        for (j, w) in self.directions.iter().enumerate() {
            let p = projector_of(w.as_slice());
            let ws = w.as_slice();
            for idx in 0..np {
                let x = like.position(idx);
                let a = t + ws.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>();
                let g = p.apply(&self.profile(j, a));
                data[idx] += g[0] * self.weights[j];
                data[np + idx] += g[1] * self.weights[j];
            }
        }
        SpinorField::from_data(like, 2, Representation::Physical, data).expect("shape")
    }

    /// Relative `L²` error of the reassembly against `𝒰_−(t)g`.
    pub fn reassembly_error(&self, g: &SpinorField, t: f64) -> Result<f64> {
        let exact = free_evolve(&g.physical(), t, Sign::Minus)?;
        let approx = self.reassemble(g.grid(), t);
        Ok(approx.sub(&exact)?.l2_norm() / exact.l2_norm())
    }
}

/// Fourth-order cumulative integrals `∫_{t_0}^{t_k} G` of uniformly sampled vectors.
fn cumulative_quadrature(samples: &[Vec<C64>], dt: f64) -> Result<Vec<Vec<C64>>> {
    let m = samples.len();
    if m < 4 {
        return Err(LabError::domain("fourth-order quadrature needs at least 4 samples"));
    }
    let len = samples[0].len();
    let mut out = vec![vec![ZERO; len]; m];
    for k in 0..m - 1 {
        // Cubic interpolation through four neighbouring nodes, integrated over [t_k, t_{k+1}].
        let (idx, w): ([usize; 4], [f64; 4]) = if k == 0 {
            ([0, 1, 2, 3], [9.0, 19.0, -5.0, 1.0])
        } else if k == m - 2 {
            ([m - 4, m - 3, m - 2, m - 1], [1.0, -5.0, 19.0, 9.0])
        } else {
            ([k - 1, k, k + 1, k + 2], [-1.0, 13.0, 13.0, -1.0])
        };
        let (prev, rest) = out.split_at_mut(k + 1);
        let cur = &prev[k];
        let next = &mut rest[0];
        for i in 0..len {
            let inc: C64 = (0..4).map(|j| samples[idx[j]][i] * w[j]).sum::<C64>() * (dt / 24.0);
            next[i] = cur[i] + inc;
        }
    }
    Ok(out)
}

/// Duhamel solution `u(t) = ∫_{t_0}^t 𝒰_±(t − s)F(s) ds` of `(∂_t ± σ·∇)u = F`, `u(t_0) = 0`,
/// on the time lattice of `F` (fourth-order quadrature of `𝒰_±(−s)F(s)`).
pub fn duhamel(forcing: &Trajectory, sign: Sign) -> Result<Trajectory> {
    if forcing.comps() != 2 {
        return Err(LabError::Shape("Duhamel integration acts on two-component fields".into()));
    }
    let grid = forcing.grid().clone();
    let flow = [LinearFlow::Dirac2 { sign, mass: 0.0 }];
    let pulled: Vec<Vec<C64>> = (0..forcing.len())
        .map(|k| {
            let mut f = forcing.frame(k).fourier();
            PropagatorCache::new(&grid, &flow, -(forcing.time(k) - forcing.t0())).apply(&mut f)?;
            Ok(f.into_data())
        })
        .collect::<Result<_>>()?;
    let integrals = cumulative_quadrature(&pulled, forcing.dt())?;
    let frames = integrals
        .into_iter()
        .enumerate()
        .map(|(k, w)| {
            let mut f = SpinorField::from_data(&grid, 2, Representation::Fourier, w)?;
            PropagatorCache::new(&grid, &flow, forcing.time(k) - forcing.t0()).apply(&mut f)?;
            f.to_physical();
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(forcing.t0(), forcing.dt(), frames)
}

/// The forward fundamental solution in a null frame, with its decomposition.
#[derive(Clone, Debug)]
pub struct NullSolution {
    /// `u = E_ω^± ∗ F`.
    pub u: SpaceTimeField,
    /// The part `u − G` built from the transport equation along `t_ω`.
    pub free_part: SpaceTimeField,
    /// The elliptic part `G = −(ω·∇_{x_ω})^{−1} Π_{∓ω} F`.
    pub elliptic: SpaceTimeField,
    /// `min |ξ_ω¹|` over the support of `F̃` (distance from the null plane, up to `√2`).
    pub min_null_plane_distance: f64,
    /// `min |τ² − |ξ|²|` over the support of `F̃`.
    pub min_cone_distance: f64,
}

/// `E_ω^± ∗ F` for a space-time periodic forcing whose spectrum avoids the cone and the null plane `τ = ω·ξ`.
///
/// In the frame `ω` the system `(∂_t ± σ·∇)u = F` splits into the transport equation
/// `√2∂_{t_ω}Π_{±ω}u = Π_{±ω}F ∓ σ·∇^⊥Π_{∓ω}u` and the elliptic relation
/// `ω·∇_{x_ω}Π_{∓ω}u = ±σ·∇^⊥Π_{±ω}u − Π_{∓ω}F` (with `ω·∇_{x_ω} = ω·∇ − ∂_t`).
/// Eliminating `Π_{∓ω}u` leaves a scalar symbol `i(τ² − |ξ|²)/(√2ξ_ω¹)` on
/// `Π_{±ω}u`, which is inverted mode by mode.
pub fn null_fundamental_solution(forcing: &SpaceTimeField, frame: &NullFrame, sign: Sign, threshold: f64) -> Result<NullSolution> {
    if forcing.comps() != 2 {
        return Err(LabError::Shape("the null fundamental solution acts on two-component fields".into()));
    }
    let grid = forcing.grid().clone();
    let mut f = forcing.clone();
    f.to_fourier();
    let np = grid.points();
    let m = f.frames();
    let total: f64 = f.data().iter().map(|z| z.norm_sqr()).sum();
    let support_cut = 1e-24 * total.max(f64::MIN_POSITIVE);
    let s = sign.value();
    let w = frame.omega();
    let p_same = projector_of(&w.as_slice().iter().map(|c| s * c).collect::<Vec<_>>());
    let p_other = projector_of(&w.as_slice().iter().map(|c| -s * c).collect::<Vec<_>>());
    let mut u = f.clone();
    let mut ell = f.clone();
    let mut min_plane = f64::INFINITY;
    let mut min_cone = f64::INFINITY;
    for j in 0..m {
        let tau = f.tau(j);
        for idx in 0..np {
            let a = (j * np) + idx;
            let b = ((m + j) * np) + idx;
            let fv = [f.data()[a], f.data()[b]];
            if fv[0].norm_sqr() + fv[1].norm_sqr() <= support_cut {
                u.data_mut()[a] = ZERO;
                u.data_mut()[b] = ZERO;
                ell.data_mut()[a] = ZERO;
                ell.data_mut()[b] = ZERO;
                continue;
            }
            let xi = grid.xi(idx);
            let d = frame.to_dual_null(tau, xi);
            let cone = tau * tau - grid.xi_norm(idx).powi(2);
            min_plane = min_plane.min(d.xi1.abs());
            min_cone = min_cone.min(cone.abs());
            let perp = sigma_dot(&d.xi_perp[..grid.dim()]);
            // ω·∇_{x_ω} ↦ −i√2 ξ_ω¹ ; σ·∇^⊥ ↦ iσ·ξ^⊥.
            let wgrad = C64::new(0.0, -SQRT_2 * d.xi1);
            let fs = p_same.apply(&fv);
            let fo = p_other.apply(&fv);
            let g = [-fo[0] / wgrad, -fo[1] / wgrad];
            let sperp_fo = perp.apply(&fo);
            let rhs = [fs[0] + IM * s * sperp_fo[0] / wgrad, fs[1] + IM * s * sperp_fo[1] / wgrad];
            let sym = C64::new(0.0, cone / (SQRT_2 * d.xi1));
            let a_part = [rhs[0] / sym, rhs[1] / sym];
            let pa = perp.apply(&a_part);
            let b_part = [IM * s * pa[0] / wgrad + g[0], IM * s * pa[1] / wgrad + g[1]];
            u.data_mut()[a] = a_part[0] + b_part[0];
            u.data_mut()[b] = a_part[1] + b_part[1];
            ell.data_mut()[a] = g[0];
            ell.data_mut()[b] = g[1];
        }
    }
    if min_plane < threshold {
        return Err(LabError::SingularDivision { what: "ω·∇_{x_ω} (null plane τ = ω·ξ)".into(), min_divisor: min_plane, threshold });
    }
    if min_cone < threshold {
        return Err(LabError::SingularDivision { what: "τ² − |ξ|² (light cone)".into(), min_divisor: min_cone, threshold });
    }
    let mut free_part = u.clone();
    for (x, e) in free_part.data_mut().iter_mut().zip(ell.data()) {
        *x -= e;
    }
    u.to_physical();
    free_part.to_physical();
    ell.to_physical();
    Ok(NullSolution { u, free_part, elliptic: ell, min_null_plane_distance: min_plane, min_cone_distance: min_cone })
}

/// Residual `‖(∂_t ± σ·∇)u − F‖ / ‖F‖` computed spectrally on a periodic window.
pub fn dirac_residual(u: &SpaceTimeField, forcing: &SpaceTimeField, sign: Sign) -> Result<f64> {
    let mut lu = u.clone();
    lu.to_fourier();
    let grid = lu.grid().clone();
    let np = grid.points();
    let m = lu.frames();
    let s = sign.value();
    for j in 0..m {
        let tau = lu.tau(j);
        for idx in 0..np {
            let a = (j * np) + idx;
            let b = ((m + j) * np) + idx;
            let v = [lu.data()[a], lu.data()[b]];
            let sv = sigma_dot(grid.xi(idx)).apply(&v);
            lu.data_mut()[a] = IM * (v[0] * tau + sv[0] * s);
            lu.data_mut()[b] = IM * (v[1] * tau + sv[1] * s);
        }
    }
    lu.to_physical();
    let mut f = forcing.clone();
    f.to_physical();
    let diff: f64 = lu.data().iter().zip(f.data()).map(|(a, b)| (a - b).norm_sqr()).sum();
    let norm: f64 = f.data().iter().map(|z| z.norm_sqr()).sum();
    Ok((diff / norm).sqrt())
}

/// Residual of the elliptic relation `(ω·∇ − ∂_t)Π_{∓ω}u = ±σ·∇^⊥Π_{±ω}u − Π_{∓ω}F`, relative to `‖F‖`.
pub fn elliptic_residual(u: &SpaceTimeField, forcing: &SpaceTimeField, frame: &NullFrame, sign: Sign) -> Result<f64> {
    let mut uf = u.clone();
    uf.to_fourier();
    let mut ff = forcing.clone();
    ff.to_fourier();
    let grid = uf.grid().clone();
    let np = grid.points();
    let m = uf.frames();
    let s = sign.value();
    let w = frame.omega();
    let p_same = projector_of(&w.as_slice().iter().map(|c| s * c).collect::<Vec<_>>());
    let p_other = projector_of(&w.as_slice().iter().map(|c| -s * c).collect::<Vec<_>>());
    let mut diff = 0.0;
    let mut norm = 0.0;
    for j in 0..m {
        let tau = uf.tau(j);
        for idx in 0..np {
            let a = (j * np) + idx;
            let b = ((m + j) * np) + idx;
            let uv = [uf.data()[a], uf.data()[b]];
            let fv = [ff.data()[a], ff.data()[b]];
            let d = frame.to_dual_null(tau, grid.xi(idx));
            let wgrad = C64::new(0.0, -SQRT_2 * d.xi1);
            let lhs = p_other.apply(&uv);
            let rhs_u = sigma_dot(&d.xi_perp[..grid.dim()]).apply(&p_same.apply(&uv));
            let fo = p_other.apply(&fv);
            for c in 0..2 {
                let r = wgrad * lhs[c] - (IM * s * rhs_u[c] - fo[c]);
                diff += r.norm_sqr();
            }
            norm += fv[0].norm_sqr() + fv[1].norm_sqr();
        }
    }
    Ok((diff / norm).sqrt())
}

/// Which equation the solver integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// `−iγ^μ∂_μψ + mψ = F(ψ)` in Hamiltonian form.
    PsiForm,
    /// The `(u, v)` half-wave system.
    UvForm,
}

/// How the mass term enters a ψ-form solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MassTreatment {
    /// Exactly, in the linear propagator `e^{−itH}`.
    #[default]
    LinearFlow,
    /// As an explicit perturbation `−imγ⁰ψ` next to the nonlinearity.
    Perturbation,
}

/// Model parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Spatial dimension (2 or 3 for nonlinear solves).
    pub n: usize,
    /// Nonlinearity.
    pub model: Model,
    /// Mass `m ≥ 0` (ψ-form only).
    #[serde(default)]
    pub mass: f64,
    /// Data scale `ε` (initial data are multiplied by `ε`).
    #[serde(default = "one")]
    pub epsilon: f64,
    /// Equation form.
    pub formulation: Formulation,
    /// Mass treatment (ψ-form).
    #[serde(default)]
    pub mass_treatment: MassTreatment,
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    /// Check the invariants.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(LabError::domain(format!("n must be 1, 2 or 3, got {}", self.n)));
        }
        if self.n == 1 {
            return Err(LabError::domain("nonlinear solves are implemented for n = 2, 3"));
        }
        if !(self.epsilon > 0.0) {
            return Err(LabError::domain(format!("ε must be positive, got {}", self.epsilon)));
        }
        if !(self.mass >= 0.0) {
            return Err(LabError::domain(format!("mass must be non-negative, got {}", self.mass)));
        }
        if self.mass > 0.0 && self.formulation == Formulation::UvForm {
            return Err(LabError::domain("mass is supported in the ψ-form only"));
        }
        Ok(())
    }

    /// Number of state components.
    pub fn comps(&self) -> usize {
        match (self.formulation, self.n) {
            (Formulation::UvForm, _) => 4,
            (Formulation::PsiForm, 3) => 4,
            (Formulation::PsiForm, _) => 2,
        }
    }

    /// The linear part of the model, block by block.
    pub fn linear_blocks(&self) -> Vec<LinearFlow> {
        let m = if self.mass_treatment == MassTreatment::LinearFlow { self.mass } else { 0.0 };
        match (self.formulation, self.n) {
            (Formulation::UvForm, _) => vec![LinearFlow::Dirac2 { sign: Sign::Plus, mass: 0.0 }, LinearFlow::Dirac2 { sign: Sign::Minus, mass: 0.0 }],
            (Formulation::PsiForm, 3) => vec![LinearFlow::Dirac4 { mass: m }],
            (Formulation::PsiForm, _) => vec![LinearFlow::Dirac2 { sign: Sign::Plus, mass: m }],
        }
    }

    /// Pointwise nonlinear right-hand side (including a perturbative mass term).
    pub fn pointwise_rhs(&self, state: &[C64], out: &mut [C64]) -> Result<()> {
        match self.formulation {
            Formulation::UvForm => {
                let u = [state[0], state[1]];
                let v = [state[2], state[3]];
                let (ru, rv) = soler_thirring_rhs(&u, &v, self.model, self.n)?;
                out[..2].copy_from_slice(&ru);
                out[2..4].copy_from_slice(&rv);
            }
            Formulation::PsiForm => {
                let r = psi_form_rhs(state, self.model)?;
                out.copy_from_slice(&r);
                if self.mass_treatment == MassTreatment::Perturbation && self.mass > 0.0 {
                    let half = state.len() / 2;
                    for (i, o) in out.iter_mut().enumerate() {
                        let g0 = if i < half { 1.0 } else { -1.0 };
                        *o -= IM * self.mass * g0 * state[i];
                    }
                }
            }
        }
        Ok(())
    }

    /// The nonlinearity `N(ψ)` alone (no mass), pointwise, for envelope diagnostics.
    pub fn pointwise_nonlinearity(&self, state: &[C64], out: &mut [C64]) -> Result<()> {
        let plain = ModelSpec { mass_treatment: MassTreatment::LinearFlow, ..*self };
        plain.pointwise_rhs(state, out)
    }
}

/// Periodic checkpointing of the solver state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckpointSpec {
    /// Directory for checkpoint files.
    pub dir: PathBuf,
    /// Steps between checkpoints.
    pub stride: usize,
    /// File name prefix (usually the configuration hash).
    pub key: String,
}

/// Solver options.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Time step.
    pub dt: f64,
    /// Number of steps.
    pub steps: usize,
    /// Record a frame every this many steps (frame 0 is the initial state).
    pub record_every: usize,
    /// Relative charge drift that trips the run.
    #[serde(default = "default_tripwire")]
    pub charge_tripwire: f64,
    /// Spectral tail fraction (mass beyond 80% of the dealiasing cutoff) that aborts the run.
    #[serde(default = "default_tail")]
    pub tail_threshold: f64,
    /// Estimate the local defect by step doubling at recorded frames.
    #[serde(default)]
    pub defect_estimate: bool,
    /// Optional checkpointing.
    #[serde(default)]
    pub checkpoint: Option<CheckpointSpec>,
    /// Resume from the latest checkpoint if present.
    #[serde(default)]
    pub resume: bool,
}

fn default_tripwire() -> f64 {
    1e-9
}

fn default_tail() -> f64 {
    1e-4
}

impl SolveOptions {
    /// Options with defaults for everything except the step and horizon.
    pub fn new(dt: f64, steps: usize, record_every: usize) -> Self {
        SolveOptions {
            dt,
            steps,
            record_every: record_every.max(1),
            charge_tripwire: default_tripwire(),
            tail_threshold: default_tail(),
            defect_estimate: false,
            checkpoint: None,
            resume: false,
        }
    }
}

/// Why a solve stopped early.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Breakdown {
    /// Time of the last valid state.
    pub time: f64,
    /// Diagnostic.
    pub reason: String,
}

/// Output of [`nonlinear_solve`].
#[derive(Clone, Debug)]
pub struct Solution {
    /// Recorded frames of the full state (all components, physical).
    pub trajectory: Trajectory,
    /// Charge `‖state‖²_{L²}` at each recorded frame.
    pub charge: Vec<f64>,
    /// Largest relative charge deviation from the initial value.
    pub charge_drift: f64,
    /// Whether the drift exceeded the tripwire.
    pub charge_tripped: bool,
    /// Step-doubling defect estimates at recorded frames (if requested).
    pub defects: Vec<f64>,
    /// Largest spectral tail fraction observed.
    pub max_tail: f64,
    /// Early stop, if any (the trajectory ends at the last valid frame).
    pub breakdown: Option<Breakdown>,
    /// Steps completed.
    pub steps: usize,
    /// Step index the run resumed from.
    pub resumed_from: Option<usize>,
}

impl Solution {
    /// Components `[c0, c0 + count)` of every frame as a new trajectory.
    pub fn components(&self, c0: usize, count: usize) -> Result<Trajectory> {
        split_components(&self.trajectory, c0, count)
    }
}

/// Extract consecutive components of every frame.
pub fn split_components(traj: &Trajectory, c0: usize, count: usize) -> Result<Trajectory> {
    let frames = traj
        .frames()
        .iter()
        .map(|f| {
            let f = f.physical();
            let np = f.grid().points();
            SpinorField::from_data(f.grid(), count, Representation::Physical, f.data()[c0 * np..(c0 + count) * np].to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(traj.t0(), traj.dt(), frames)
}

/// Concatenate fields component-wise (same grid).
pub fn stack_fields(parts: &[&SpinorField]) -> Result<SpinorField> {
    let grid = parts[0].grid().clone();
    let mut data = Vec::new();
    let mut comps = 0;
    for p in parts {
        if p.grid().spec() != grid.spec() {
            return Err(LabError::Shape("stacked fields must share a grid".into()));
        }
        data.extend_from_slice(p.physical().data());
        comps += p.comps();
    }
    SpinorField::from_data(&grid, comps, Representation::Physical, data)
}

/// The 2/3-rule mask: keep modes with `|k_a| ≤ N/3` on every axis.
pub fn dealias_mask(grid: &Grid) -> Vec<bool> {
    let cut = grid.size() as i64 / 3;
    (0..grid.points())
        .map(|idx| {
            let mi = grid.multi_index(idx);
            (0..grid.dim()).all(|a| signed_index(mi[a], grid.size()).abs() <= cut)
        })
        .collect()
}

struct Integrator {
    spec: ModelSpec,
    grid: Arc<Grid>,
    comps: usize,
    full: PropagatorCache,
    half: PropagatorCache,
    mask: Vec<bool>,
    outer: Vec<bool>,
    dt: f64,
}

impl Integrator {
    fn new(spec: ModelSpec, grid: &Arc<Grid>, dt: f64) -> Self {
        let blocks = spec.linear_blocks();
        let cut = grid.size() as f64 / 3.0;
        let outer = (0..grid.points())
            .map(|idx| {
                let mi = grid.multi_index(idx);
                (0..grid.dim()).any(|a| signed_index(mi[a], grid.size()).abs() as f64 > 0.8 * cut)
            })
            .collect();
        Integrator {
            spec,
            grid: grid.clone(),
            comps: spec.comps(),
            full: PropagatorCache::new(grid, &blocks, dt),
            half: PropagatorCache::new(grid, &blocks, dt / 2.0),
            mask: dealias_mask(grid),
            outer,
            dt,
        }
    }

    /// Nonlinear term of a Fourier state, dealiased, in Fourier.
    fn rhs(&self, y: &[C64]) -> Result<Vec<C64>> {
        let np = self.grid.points();
        let mut phys = y.to_vec();
        for block in phys.chunks_mut(np) {
            self.grid.inverse(block);
        }
        let mut out = vec![ZERO; y.len()];
        let mut s = vec![ZERO; self.comps];
        let mut r = vec![ZERO; self.comps];
        for idx in 0..np {
            for c in 0..self.comps {
                s[c] = phys[c * np + idx];
            }
            self.spec.pointwise_rhs(&s, &mut r)?;
            for c in 0..self.comps {
                out[c * np + idx] = r[c];
            }
        }
        for block in out.chunks_mut(np) {
            self.grid.forward(block);
            for (z, keep) in block.iter_mut().zip(&self.mask) {
                if !keep {
                    *z = ZERO;
                }
            }
        }
        Ok(out)
    }

    fn step_with(&self, y: &[C64], full: &PropagatorCache, half: &PropagatorCache, h: f64) -> Result<Vec<C64>> {
        let axpy = |a: &[C64], s: f64, b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, z)| x + z * s).collect() };
        let prop = |c: &PropagatorCache, v: &[C64]| -> Vec<C64> {
            let mut w = v.to_vec();
            c.apply_spectrum(&mut w);
            w
        };
        let k1 = self.rhs(y)?;
        let a = prop(half, &axpy(y, h / 2.0, &k1));
        let k2 = self.rhs(&a)?;
        let ey_half = prop(half, y);
        let b = axpy(&ey_half, h / 2.0, &k2);
        let k3 = self.rhs(&b)?;
        let ey = prop(full, y);
        let c = axpy(&ey, h, &prop(half, &k3));
        let k4 = self.rhs(&c)?;
        let ek1 = prop(full, &k1);
        let ek23 = prop(half, &k2.iter().zip(&k3).map(|(p, q)| p + q).collect::<Vec<_>>());
        Ok(ey.iter().enumerate().map(|(i, v)| v + (ek1[i] + ek23[i] * 2.0 + k4[i]) * (h / 6.0)).collect())
    }

    fn step(&self, y: &[C64]) -> Result<Vec<C64>> {
        self.step_with(y, &self.full, &self.half, self.dt)
    }

    fn defect(&self, y: &[C64]) -> Result<f64> {
        let blocks = self.spec.linear_blocks();
        let quarter = PropagatorCache::new(&self.grid, &blocks, self.dt / 4.0);
        let one = self.step(y)?;
        let mid = self.step_with(y, &self.half, &quarter, self.dt / 2.0)?;
        let two = self.step_with(&mid, &self.half, &quarter, self.dt / 2.0)?;
        let diff: f64 = one.iter().zip(&two).map(|(a, b)| (a - b).norm_sqr()).sum();
        let norm: f64 = two.iter().map(|z| z.norm_sqr()).sum();
        Ok((diff / norm.max(f64::MIN_POSITIVE)).sqrt() / 15.0)
    }

    fn charge(&self, y: &[C64]) -> f64 {
        let np = self.grid.points();
        self.grid.cell_volume() / np as f64 * y.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    fn tail(&self, y: &[C64]) -> f64 {
        let np = self.grid.points();
        let total: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let outer: f64 = y.iter().enumerate().filter(|(i, _)| self.outer[i % np]).map(|(_, z)| z.norm_sqr()).sum();
        outer / total
    }
}

fn checkpoint_path(ck: &CheckpointSpec, step: usize) -> PathBuf {
    ck.dir.join(format!("{}-{:08}.snap", ck.key, step))
}

/// Latest checkpoint `(step, path)` for a key, if any.
pub fn latest_checkpoint(ck: &CheckpointSpec) -> Result<Option<(usize, PathBuf)>> {
    if !ck.dir.exists() {
        return Ok(None);
    }
    let prefix = format!("{}-", ck.key);
    let mut best: Option<(usize, PathBuf)> = None;
    for entry in std::fs::read_dir(&ck.dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if let Some(rest) = name.strip_prefix(&prefix).and_then(|r| r.strip_suffix(".snap")) {
            if let Ok(step) = rest.parse::<usize>() {
                if best.as_ref().is_none_or(|(b, _)| step > *b) {
                    best = Some((step, path));
                }
            }
        }
    }
    Ok(best)
}

fn write_checkpoint(path: &Path, grid: &Arc<Grid>, comps: usize, y: &[C64], time: f64) -> Result<()> {
    let f = SpinorField::from_data(grid, comps, Representation::Fourier, y.to_vec())?;
    f.save(path, time)
}

/// Integrate a model from initial data (all components stacked: `(u, v)` or `ψ`).
///
/// The data are multiplied by `ε` before integration. The solver is the Lawson
/// RK4 scheme `y ↦ E(h)y + h/6 [E(h)k₁ + 2E(h/2)(k₂ + k₃) + k₄]` with the exact
/// linear propagator `E`.
pub fn nonlinear_solve(spec: &ModelSpec, data: &SpinorField, opts: &SolveOptions) -> Result<Solution> {
    spec.validate()?;
    if data.comps() != spec.comps() {
        return Err(LabError::Shape(format!("model expects {} components, data have {}", spec.comps(), data.comps())));
    }
    if data.grid().dim() != spec.n {
        return Err(LabError::Shape(format!("model is n = {}, grid is n = {}", spec.n, data.grid().dim())));
    }
    if !(opts.dt > 0.0) || opts.record_every == 0 {
        return Err(LabError::domain("dt must be positive and record_every ≥ 1"));
    }
    let grid = data.grid().clone();
    let integ = Integrator::new(*spec, &grid, opts.dt);
    let mut start_step = 0;
    let mut resumed_from = None;
    let mut y = {
        let mut d = data.fourier();
        d.scale(C64::from(spec.epsilon));
        // Data must live inside the dealiased band for the flow to conserve charge.
        let np = grid.points();
        for block in d.data_mut().chunks_mut(np) {
            for (z, keep) in block.iter_mut().zip(&integ.mask) {
                if !keep {
                    *z = ZERO;
                }
            }
        }
        d.into_data()
    };
    if let (true, Some(ck)) = (opts.resume, opts.checkpoint.as_ref()) {
        if let Some((step, path)) = latest_checkpoint(ck)? {
            let (f, _) = SpinorField::load(&path)?;
            if f.comps() != spec.comps() || f.grid().spec() != grid.spec() {
                return Err(LabError::Format(format!("checkpoint {} does not match the run", path.display())));
            }
            y = f.fourier().into_data();
            start_step = step;
            resumed_from = Some(step);
        }
    }
    let q0 = integ.charge(&y);
    let to_field = |y: &[C64]| -> Result<SpinorField> {
        let mut f = SpinorField::from_data(&grid, spec.comps(), Representation::Fourier, y.to_vec())?;
        f.to_physical();
        Ok(f)
    };
    let mut frames = vec![to_field(&y)?];
    let mut charge = vec![q0];
    let mut defects = Vec::new();
    let mut max_tail = integ.tail(&y);
    let mut drift: f64 = 0.0;
    let mut breakdown = None;
    let mut done = start_step;
    if opts.defect_estimate {
        defects.push(integ.defect(&y)?);
    }
    for step in start_step..opts.steps {
        let next = integ.step(&y)?;
        let t_next = (step + 1) as f64 * opts.dt;
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            breakdown = Some(Breakdown { time: step as f64 * opts.dt, reason: "non-finite values (blow-up)".into() });
            break;
        }
        let q = integ.charge(&next);
        if q0 > 0.0 && q > 1e6 * q0 {
            breakdown = Some(Breakdown { time: step as f64 * opts.dt, reason: format!("charge grew by {:.3e}", q / q0) });
            break;
        }
        let tail = integ.tail(&next);
        max_tail = max_tail.max(tail);
        if tail > opts.tail_threshold {
            breakdown = Some(Breakdown {
                time: step as f64 * opts.dt,
                reason: format!("spectral tail {tail:.3e} exceeds {:.1e}: resolution exceeded", opts.tail_threshold),
            });
            break;
        }
        y = next;
        done = step + 1;
        if q0 > 0.0 {
            drift = drift.max((q - q0).abs() / q0);
        }
        if done % opts.record_every == 0 {
            frames.push(to_field(&y)?);
            charge.push(q);
            if opts.defect_estimate {
                defects.push(integ.defect(&y)?);
            }
        }
        if let Some(ck) = opts.checkpoint.as_ref() {
            if ck.stride > 0 && done % ck.stride == 0 {
                std::fs::create_dir_all(&ck.dir)?;
                write_checkpoint(&checkpoint_path(ck, done), &grid, spec.comps(), &y, t_next)?;
            }
        }
    }
    let t0 = start_step as f64 * opts.dt;
    let rec_dt = opts.dt * opts.record_every as f64;
    let trajectory = if frames.len() >= 2 {
        Trajectory::new(t0, rec_dt, frames)?
    } else {
        let f = frames.pop().expect("initial frame");
        Trajectory::new(t0, rec_dt, vec![f.clone(), f])?
    };
    Ok(Solution {
        trajectory,
        charge,
        charge_drift: drift,
        charge_tripped: drift > opts.charge_tripwire,
        defects,
        max_tail,
        breakdown,
        steps: done,
        resumed_from,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((integral - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_quadrature_is_fourth_order_exact_on_cubics() {
        let dt = 0.1;
        let samples: Vec<Vec<C64>> = (0..10).map(|k| vec![C64::from((k as f64 * dt).powi(3))]).collect();
        let out = cumulative_quadrature(&samples, dt).unwrap();
        for (k, v) in out.iter().enumerate() {
            let t = k as f64 * dt;
            assert!((v[0].re - t.powi(4) / 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn massive_flow_is_unitary() {
        let f = LinearFlow::Dirac2 { sign: Sign::Plus, mass: 0.3 };
        let m = f.matrix(&[1.0, -2.0], 0.7);
        let u = Mat2::from_rows([[m[0], m[1]], [m[2], m[3]]]);
        assert!((u.adjoint() * u - Mat2::identity()).max_abs() < 1e-15);
    }
}
