//! Space-time fields: a trajectory on a uniform time lattice, optionally tapered,
//! with a joint `(τ, ξ)` transform used by modulation cutoffs and `X^{s,b}`-type norms.
//!
//! The time window `[t0, t0 + M·dt)` is treated as periodic. The time frequencies
//! are `τ_j = 2π j/(M dt)` for signed `j`; a modulation cutoff at scale `d` is
//! only meaningful when `2π/(M dt) ≤ d/4`.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{signed_index, Grid, Representation, SpinorField, Trajectory};

/// Time window applied before the `τ`-transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeWindow {
    /// No taper: the time series is taken as periodic.
    None,
    /// Tukey window with the given total taper fraction (`0.1` = 10%).
    Tukey {
        /// Fraction of the window length in the two cosine tapers.
        fraction: f64,
    },
}

impl TimeWindow {
    /// The default 10% Tukey taper.
    pub fn tukey10() -> Self {
        TimeWindow::Tukey { fraction: 0.1 }
    }

    /// Weight at sample `k` of `m`.
    pub fn weight(&self, k: usize, m: usize) -> f64 {
        match *self {
            TimeWindow::None => 1.0,
            TimeWindow::Tukey { fraction } => {
                if fraction <= 0.0 || m < 2 {
                    return 1.0;
                }
                let x = k as f64 / (m - 1) as f64;
                let edge = fraction / 2.0;
                if x < edge {
                    0.5 * (1.0 - (PI * x / edge).cos())
                } else if x > 1.0 - edge {
                    0.5 * (1.0 - (PI * (1.0 - x) / edge).cos())
                } else {
                    1.0
                }
            }
        }
    }

    /// Spectral leakage `sup_{|τ| ≥ d} |ŵ(τ)| / |ŵ(0)|` of the window on `m` samples of step `dt`.
    pub fn leakage(&self, m: usize, dt: f64, d: f64) -> f64 {
        let mut w: Vec<C64> = (0..m).map(|k| C64::new(self.weight(k, m), 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut w);
        let w0 = w[0].norm();
        let dtau = 2.0 * PI / (m as f64 * dt);
        (0..m).filter(|&j| (signed_index(j, m) as f64 * dtau).abs() >= d).map(|j| w[j].norm() / w0).fold(0.0, f64::max)
    }
}

/// A space-time field on `[t0, t0 + M dt) × 𝕋ⁿ_L`.
///
/// Storage is component-major, then time, then space: entry
/// `(c, k, idx)` lives at `(c·M + k)·Nⁿ + idx`.
#[derive(Clone, Debug)]
pub struct SpaceTimeField {
    grid: Arc<Grid>,
    t0: f64,
    dt: f64,
    frames: usize,
    comps: usize,
    window: TimeWindow,
    repr: Representation,
    data: Vec<C64>,
}

impl SpaceTimeField {
    /// Build from a trajectory, applying the time window.
    pub fn from_trajectory(traj: &Trajectory, window: TimeWindow) -> Result<Self> {
        let grid = traj.grid().clone();
        let np = grid.points();
        let m = traj.len();
        let comps = traj.comps();
        let mut data = vec![C64::new(0.0, 0.0); comps * m * np];
        for k in 0..m {
            let frame = traj.frame(k).physical();
            let w = window.weight(k, m);
            for c in 0..comps {
                let src = frame.component(c);
                let dst = &mut data[(c * m + k) * np..(c * m + k + 1) * np];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = s * w;
                }
            }
        }
        Ok(SpaceTimeField { grid, t0: traj.t0(), dt: traj.dt(), frames: m, comps, window, repr: Representation::Physical, data })
    }

    /// Build from a function `f(t, x, out)` sampled at `t0 + k dt`.
    pub fn from_fn(grid: &Arc<Grid>, comps: usize, t0: f64, dt: f64, frames: usize, f: impl Fn(f64, &[f64], &mut [C64])) -> Result<Self> {
        if frames < 2 || !(dt > 0.0) {
            return Err(LabError::domain("space-time field needs ≥ 2 frames and dt > 0"));
        }
        let traj = Trajectory::sample(t0, dt, frames, |t| SpinorField::from_fn(grid, comps, |x, out| f(t, x, out)))?;
        Self::from_trajectory(&traj, TimeWindow::None)
    }

    /// Build directly from a space-time spectrum `g(τ, ξ, out)`.
    pub fn from_spectrum(grid: &Arc<Grid>, comps: usize, t0: f64, dt: f64, frames: usize, g: impl Fn(f64, &[f64], &mut [C64])) -> Result<Self> {
        let np = grid.points();
        let mut field = SpaceTimeField {
            grid: grid.clone(),
            t0,
            dt,
            frames,
            comps,
            window: TimeWindow::None,
            repr: Representation::Fourier,
            data: vec![C64::new(0.0, 0.0); comps * frames * np],
        };
        let mut buf = vec![C64::new(0.0, 0.0); comps];
        for j in 0..frames {
            let tau = field.tau(j);
            for idx in 0..np {
                buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                g(tau, grid.xi(idx), &mut buf);
                for c in 0..comps {
                    field.data[(c * frames + j) * np + idx] = buf[c];
                }
            }
        }
        Ok(field)
    }

    /// Spatial grid.
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Start time.
    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Time step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Window length `M·dt`.
    pub fn duration(&self) -> f64 {
        self.frames as f64 * self.dt
    }

    /// Number of time samples `M`.
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Number of spinor components.
    pub fn comps(&self) -> usize {
        self.comps
    }

    /// Window applied at construction.
    pub fn window(&self) -> TimeWindow {
        self.window
    }

    /// Current representation.
    pub fn repr(&self) -> Representation {
        self.repr
    }

    /// Time frequency spacing `2π/(M dt)`.
    pub fn dtau(&self) -> f64 {
        2.0 * PI / self.duration()
    }

    /// Time frequency `τ_j`.
    pub fn tau(&self, j: usize) -> f64 {
        signed_index(j, self.frames) as f64 * self.dtau()
    }

    /// Raw storage.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Raw storage, mutable.
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Value at `(c, k, idx)`.
    pub fn get(&self, c: usize, k: usize, idx: usize) -> C64 {
        self.data[(c * self.frames + k) * self.grid.points() + idx]
    }

    /// Fail unless modulation scale `d` is resolved: `2π/T ≤ d/4`.
    pub fn check_modulation_resolution(&self, d: f64) -> Result<()> {
        check_modulation_resolution(self.duration(), d)
    }

    /// Leakage of the window at modulation scale `d`.
    pub fn leakage(&self, d: f64) -> f64 {
        self.window.leakage(self.frames, self.dt, d)
    }

    fn time_transform(&mut self, forward: bool) {
        let m = self.frames;
        let np = self.grid.points();
        let mut planner = FftPlanner::new();
        let fft = if forward { planner.plan_fft_forward(m) } else { planner.plan_fft_inverse(m) };
        let mut line = vec![C64::new(0.0, 0.0); m];
        let scale = if forward { 1.0 } else { 1.0 / m as f64 };
        for c in 0..self.comps {
            let block = &mut self.data[c * m * np..(c + 1) * m * np];
            for idx in 0..np {
                for k in 0..m {
                    line[k] = block[k * np + idx];
                }
                fft.process(&mut line);
                for k in 0..m {
                    block[k * np + idx] = line[k] * scale;
                }
            }
        }
    }

    fn space_transform(&mut self, forward: bool) {
        let np = self.grid.points();
        for chunk in self.data.chunks_mut(np) {
            if forward {
                self.grid.forward(chunk);
            } else {
                self.grid.inverse(chunk);
            }
        }
    }

    /// Transform to `(τ, ξ)` (unnormalised in both variables).
    pub fn to_fourier(&mut self) {
        if self.repr == Representation::Physical {
            self.space_transform(true);
            self.time_transform(true);
            self.repr = Representation::Fourier;
        }
    }

    /// Transform back to `(t, x)`.
    pub fn to_physical(&mut self) {
        if self.repr == Representation::Fourier {
            self.time_transform(false);
            self.space_transform(false);
            self.repr = Representation::Physical;
        }
    }

    /// `L²_{t,x}` norm over the window.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        let vol = self.dt * self.grid.cell_volume();
        match self.repr {
            Representation::Physical => (vol * sum).sqrt(),
            Representation::Fourier => (vol * sum / (self.frames * self.grid.points()) as f64).sqrt(),
        }
    }

    /// Spectral mass `Σ|ũ(τ_j, ξ)|² w(τ_j, ξ)` normalised so that `w ≡ 1` gives `‖u‖²_{L²_{t,x}}`.
    pub fn weighted_mass(&self, w: impl Fn(f64, &[f64]) -> f64) -> f64 {
        let mut f = self.clone();
        f.to_fourier();
        let np = self.grid.points();
        let m = self.frames;
        let mut total = 0.0;
        for j in 0..m {
            let tau = f.tau(j);
            for idx in 0..np {
                let weight = w(tau, self.grid.xi(idx));
                if weight == 0.0 {
                    continue;
                }
                let mass: f64 = (0..self.comps).map(|c| f.data[(c * m + j) * np + idx].norm_sqr()).sum();
                total += weight * mass;
            }
        }
        total * self.dt * self.grid.cell_volume() / (m * np) as f64
    }

    /// Frame `k` as a field in physical representation.
    pub fn frame(&self, k: usize) -> SpinorField {
        let mut f = self.clone();
        f.to_physical();
        let np = self.grid.points();
        let mut data = Vec::with_capacity(self.comps * np);
        for c in 0..self.comps {
            data.extend_from_slice(&f.data[(c * self.frames + k) * np..(c * self.frames + k + 1) * np]);
        }
        SpinorField::from_data(&self.grid, self.comps, Representation::Physical, data).expect("consistent shape")
    }

    /// Convert back to a trajectory (physical representation).
    pub fn to_trajectory(&self) -> Result<Trajectory> {
        let mut f = self.clone();
        f.to_physical();
        let np = self.grid.points();
        let frames = (0..self.frames)
            .map(|k| {
                let mut data = Vec::with_capacity(self.comps * np);
                for c in 0..self.comps {
                    data.extend_from_slice(&f.data[(c * self.frames + k) * np..(c * self.frames + k + 1) * np]);
                }
                SpinorField::from_data(&self.grid, self.comps, Representation::Physical, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.t0, self.dt, frames)
    }
}

/// Fail unless a window of length `duration` resolves modulation scale `d`.
pub fn check_modulation_resolution(duration: f64, d: f64) -> Result<()> {
    if 2.0 * PI / duration > d / 4.0 {
        return Err(LabError::Resolution(format!("time window T = {duration} does not resolve modulation d = {d}; need T ≥ {:.4}", 8.0 * PI / d)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_lands_on_one_lattice_point() {
        let grid = Grid::new(1, 16, 2.0 * PI).unwrap();
        let m = 32;
        let dt = 2.0 * PI / m as f64;
        // u = e^{i(3x − 2t)}: τ = −2 with the e^{−itτ} convention, ξ = 3.
        let f = SpaceTimeField::from_fn(&grid, 1, 0.0, dt, m, |t, x, out| {
            out[0] = C64::from_polar(1.0, 3.0 * x[0] - 2.0 * t);
        })
        .unwrap();
        let mut g = f.clone();
        g.to_fourier();
        let mut peak = (0, 0, 0.0);
        for j in 0..m {
            for idx in 0..16 {
                let v = g.get(0, j, idx).norm();
                if v > peak.2 {
                    peak = (j, idx, v);
                }
            }
        }
        assert!((g.tau(peak.0) + 2.0).abs() < 1e-12);
        assert!((grid.xi(peak.1)[0] - 3.0).abs() < 1e-12);
        assert!((f.l2_norm() - g.l2_norm()).abs() < 1e-10 * f.l2_norm());
        g.to_physical();
        let err = f.data().iter().zip(g.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn tukey_shape_and_leakage() {
        let w = TimeWindow::tukey10();
        assert_eq!(w.weight(0, 101), 0.0);
        assert_eq!(w.weight(50, 101), 1.0);
        assert!(TimeWindow::None.leakage(64, 0.1, 0.5) < 1e-12);
        let leak = w.leakage(256, 0.1, 2.0);
        assert!(leak > 0.0 && leak < 0.1, "{leak}");
    }

    #[test]
    fn resolution_check() {
        assert!(check_modulation_resolution(100.0, 0.5).is_ok());
        let e = check_modulation_resolution(10.0, 0.5).unwrap_err().to_string();
        assert!(e.contains("need T"), "{e}");
    }
}
