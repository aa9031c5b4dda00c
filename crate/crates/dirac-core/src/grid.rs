//! Periodic Fourier grids, spinor fields, trajectories and field snapshots.
//!
//! The torus `[0, L)ⁿ` with `N` points per axis stands in for `ℝⁿ`. Fourier
//! coefficients are stored unnormalised,
//!
//! ```text
//! û(ξ_k) = Σ_j u(x_j) e^{−i ξ_k·x_j},     ξ_k = (2π/L) k,  k ∈ {−N/2, …, N/2 − 1}ⁿ,
//! ```
//!
//! so that `Δxⁿ û` approximates the continuum transform `∫ u e^{−ix·ξ} dx` and
//! Plancherel reads `‖u‖²_{L²} = Δxⁿ Σ|u_j|² = (Δxⁿ/Nⁿ) Σ|û_k|²`. Homogeneous
//! Sobolev norms weight the coefficients by `|ξ|^{2s}` and are normalised so
//! that `Ḣ⁰ = L²`. The Nyquist mode `k = −N/2` appears once.
//!
//! Fields are component-major: component `c` of a `comps`-component field
//! occupies `data[c·Nⁿ .. (c+1)·Nⁿ]`, each block row-major with axis 0
//! slowest.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::spinor::Mat2;

/// Serialisable description of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Spatial dimension `n ∈ {1, 2, 3}`.
    pub n: usize,
    /// Points per axis (power of two, ≥ 8).
    pub points: usize,
    /// Box side length `L`.
    pub length: f64,
}

/// An `n`-dimensional periodic grid together with its FFT plans.
pub struct Grid {
    n: usize,
    size: usize,
    length: f64,
    xi: Vec<[f64; 3]>,
    xi_norm: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("N", &self.size).field("L", &self.length).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.size == other.size && self.length == other.length
    }
}

impl Grid {
    /// Build a grid; `size` must be a power of two ≥ 8 and `length` positive.
    pub fn new(n: usize, size: usize, length: f64) -> Result<Arc<Grid>> {
        if !(1..=3).contains(&n) {
            return Err(LabError::domain(format!("grid dimension {n} not in 1..=3")));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(LabError::domain(format!("points per axis must be a power of two ≥ 8, got {size}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(LabError::domain(format!("box length must be positive, got {length}")));
        }
        let total = size.pow(n as u32);
        let dk = 2.0 * std::f64::consts::PI / length;
        let mut xi = Vec::with_capacity(total);
        let mut xi_norm = Vec::with_capacity(total);
        for idx in 0..total {
            let mut v = [0.0; 3];
            let mut rest = idx;
            for a in (0..n).rev() {
                let i = rest % size;
                rest /= size;
                v[a] = dk * signed_index(i, size) as f64;
            }
            xi_norm.push((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
            xi.push(v);
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        Ok(Arc::new(Grid { n, size, length, xi, xi_norm, fwd, inv }))
    }

    /// Build from a [`GridSpec`].
    pub fn from_spec(spec: &GridSpec) -> Result<Arc<Grid>> {
        Grid::new(spec.n, spec.points, spec.length)
    }

    /// The serialisable description.
    pub fn spec(&self) -> GridSpec {
        GridSpec { n: self.n, points: self.size, length: self.length }
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Points per axis `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Box side length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of grid points `Nⁿ`.
    pub fn points(&self) -> usize {
        self.xi.len()
    }

    /// Mesh width `Δx = L/N`.
    pub fn dx(&self) -> f64 {
        self.length / self.size as f64
    }

    /// Cell volume `Δxⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.n as i32)
    }

    /// Frequency spacing `2π/L`.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Per-axis Nyquist frequency `πN/L`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.size as f64 / self.length
    }

    /// Frequency vector at flat index `idx` (length `n`).
    pub fn xi(&self, idx: usize) -> &[f64] {
        &self.xi[idx][..self.n]
    }

    /// Frequency vector padded to length 3.
    pub fn xi3(&self, idx: usize) -> [f64; 3] {
        self.xi[idx]
    }

    /// `|ξ|` at flat index `idx`.
    pub fn xi_norm(&self, idx: usize) -> f64 {
        self.xi_norm[idx]
    }

    /// All `|ξ|` values.
    pub fn xi_norms(&self) -> &[f64] {
        &self.xi_norm
    }

    /// Multi-index (axis 0 first) of a flat index.
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = idx;
        for a in (0..self.n).rev() {
            out[a] = rest % self.size;
            rest /= self.size;
        }
        out
    }

    /// Flat index of a multi-index (entries taken modulo `N`).
    pub fn flat_index(&self, mi: &[i64]) -> usize {
        let mut idx = 0usize;
        for a in 0..self.n {
            idx = idx * self.size + mi[a].rem_euclid(self.size as i64) as usize;
        }
        idx
    }

    /// Flat index of the lattice frequency with integer coordinates `k` (in units of `2π/L`).
    pub fn freq_index(&self, k: &[i64]) -> usize {
        self.flat_index(k)
    }

    /// Physical coordinate of a grid point in the centred window `[−L/2, L/2)ⁿ`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let mi = self.multi_index(idx);
        let dx = self.dx();
        let mut x = [0.0; 3];
        for a in 0..self.n {
            x[a] = signed_index(mi[a], self.size) as f64 * dx;
        }
        x
    }

    /// In-place forward transform of one scalar block of length `Nⁿ`.
    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, false);
    }

    /// In-place inverse transform (normalised by `N⁻ⁿ`) of one scalar block.
    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
        let s = 1.0 / self.points() as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        assert_eq!(data.len() % self.points(), 0, "block length must be a multiple of Nⁿ");
        let fft = if inverse { &self.inv } else { &self.fwd };
        for block in data.chunks_mut(self.points()) {
            self.transform_block(block, fft.as_ref());
        }
    }

    fn transform_block(&self, data: &mut [C64], fft: &dyn Fft<f64>) {
        let size = self.size;
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.n {
            let stride = size.pow((self.n - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = size * stride;
            let mut lines = vec![C64::new(0.0, 0.0); block];
            for outer in data.chunks_mut(block) {
                for inner in 0..stride {
                    for i in 0..size {
                        lines[inner * size + i] = outer[i * stride + inner];
                    }
                }
                fft.process_with_scratch(&mut lines, &mut scratch);
                for inner in 0..stride {
                    for i in 0..size {
                        outer[i * stride + inner] = lines[inner * size + i];
                    }
                }
            }
        }
    }
}

/// Signed wavenumber of an FFT index: `i` for `i < N/2`, `i − N` otherwise.
pub fn signed_index(i: usize, size: usize) -> i64 {
    if i < size / 2 {
        i as i64
    } else {
        i as i64 - size as i64
    }
}

/// Whether a field holds grid values or Fourier coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// Values at grid points.
    Physical,
    /// Unnormalised Fourier coefficients.
    Fourier,
}

/// A `comps`-component complex field on a [`Grid`] (2 for `ℂ²` spinors, 4 for the
/// `n = 3` Dirac spinor).
#[derive(Clone, Debug)]
pub struct SpinorField {
    grid: Arc<Grid>,
    comps: usize,
    repr: Representation,
    data: Vec<C64>,
}

impl SpinorField {
    /// The zero field.
    pub fn zeros(grid: &Arc<Grid>, comps: usize, repr: Representation) -> Self {
        SpinorField { grid: grid.clone(), comps, repr, data: vec![C64::new(0.0, 0.0); comps * grid.points()] }
    }

    /// Wrap raw component-major data.
    pub fn from_data(grid: &Arc<Grid>, comps: usize, repr: Representation, data: Vec<C64>) -> Result<Self> {
        if data.len() != comps * grid.points() {
            return Err(LabError::Shape(format!("expected {} values for {comps} components, got {}", comps * grid.points(), data.len())));
        }
        Ok(SpinorField { grid: grid.clone(), comps, repr, data })
    }

    /// Sample a function of the centred position `x ∈ [−L/2, L/2)ⁿ`.
    pub fn from_fn(grid: &Arc<Grid>, comps: usize, f: impl Fn(&[f64], &mut [C64])) -> Self {
        let mut field = SpinorField::zeros(grid, comps, Representation::Physical);
        let np = grid.points();
        let mut buf = vec![C64::new(0.0, 0.0); comps];
        for idx in 0..np {
            let x = grid.position(idx);
            buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            f(&x[..grid.dim()], &mut buf);
            for c in 0..comps {
                field.data[c * np + idx] = buf[c];
            }
        }
        field
    }

    /// Build directly from Fourier coefficients `ĉ(ξ)` given as a function of the frequency.
    pub fn from_spectrum(grid: &Arc<Grid>, comps: usize, f: impl Fn(&[f64], &mut [C64])) -> Self {
        let mut field = SpinorField::zeros(grid, comps, Representation::Fourier);
        let np = grid.points();
        let mut buf = vec![C64::new(0.0, 0.0); comps];
        for idx in 0..np {
            buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            f(grid.xi(idx), &mut buf);
            for c in 0..comps {
                field.data[c * np + idx] = buf[c];
            }
        }
        field
    }

    /// The grid.
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Number of components.
    pub fn comps(&self) -> usize {
        self.comps
    }

    /// Current representation.
    pub fn repr(&self) -> Representation {
        self.repr
    }

    /// Raw data (component-major).
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Mutable raw data.
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Consume into raw data.
    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Component `c`.
    pub fn component(&self, c: usize) -> &[C64] {
        let np = self.grid.points();
        &self.data[c * np..(c + 1) * np]
    }

    /// Mutable component `c`.
    pub fn component_mut(&mut self, c: usize) -> &mut [C64] {
        let np = self.grid.points();
        &mut self.data[c * np..(c + 1) * np]
    }

    /// Value of all components at flat index `idx`.
    pub fn at(&self, idx: usize) -> Vec<C64> {
        let np = self.grid.points();
        (0..self.comps).map(|c| self.data[c * np + idx]).collect()
    }

    /// Two-component value at `idx` (panics unless `comps == 2`).
    pub fn at2(&self, idx: usize) -> [C64; 2] {
        assert_eq!(self.comps, 2);
        let np = self.grid.points();
        [self.data[idx], self.data[np + idx]]
    }

    /// Transform to Fourier coefficients in place (no-op if already there).
    pub fn to_fourier(&mut self) {
        if self.repr == Representation::Physical {
            self.grid.forward(&mut self.data);
            self.repr = Representation::Fourier;
        }
    }

    /// Transform to grid values in place (no-op if already there).
    pub fn to_physical(&mut self) {
        if self.repr == Representation::Fourier {
            self.grid.inverse(&mut self.data);
            self.repr = Representation::Physical;
        }
    }

    /// A copy in Fourier representation.
    pub fn fourier(&self) -> SpinorField {
        let mut f = self.clone();
        f.to_fourier();
        f
    }

    /// A copy in physical representation.
    pub fn physical(&self) -> SpinorField {
        let mut f = self.clone();
        f.to_physical();
        f
    }

    fn sum_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `L²` norm (representation aware).
    pub fn l2_norm(&self) -> f64 {
        let w = match self.repr {
            Representation::Physical => self.grid.cell_volume(),
            Representation::Fourier => self.grid.cell_volume() / self.grid.points() as f64,
        };
        (w * self.sum_sq()).sqrt()
    }

    /// Homogeneous Sobolev norm `‖|ξ|^s û‖` normalised so that `Ḣ⁰ = L²`.
    /// The zero mode is excluded.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let f = if self.repr == Representation::Fourier { None } else { Some(self.fourier()) };
        let f = f.as_ref().unwrap_or(self);
        let np = self.grid.points();
        let mut acc = 0.0;
        for c in 0..self.comps {
            for idx in 0..np {
                let k = self.grid.xi_norm(idx);
                if k > 0.0 {
                    acc += k.powf(2.0 * s) * f.data[c * np + idx].norm_sqr();
                }
            }
        }
        (acc * self.grid.cell_volume() / np as f64).sqrt()
    }

    /// Maximum pointwise Euclidean length `sup_x |u(x)|` (physical values).
    pub fn sup_norm(&self) -> f64 {
        let f = if self.repr == Representation::Physical { None } else { Some(self.physical()) };
        let f = f.as_ref().unwrap_or(self);
        let np = self.grid.points();
        (0..np).map(|idx| (0..self.comps).map(|c| f.data[c * np + idx].norm_sqr()).sum::<f64>()).fold(0.0, f64::max).sqrt()
    }

    /// `L²` inner product `⟨self, other⟩ = ∫ self† other` (both in the same representation).
    pub fn inner(&self, other: &SpinorField) -> Result<C64> {
        self.check_compatible(other)?;
        let w = match self.repr {
            Representation::Physical => self.grid.cell_volume(),
            Representation::Fourier => self.grid.cell_volume() / self.grid.points() as f64,
        };
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum::<C64>() * w)
    }

    /// Fail unless grid, component count and representation agree.
    pub fn check_compatible(&self, other: &SpinorField) -> Result<()> {
        if *self.grid != *other.grid || self.comps != other.comps || self.repr != other.repr {
            return Err(LabError::Shape("fields differ in grid, component count or representation".into()));
        }
        Ok(())
    }

    /// `self ← self + a·other`.
    pub fn axpy(&mut self, a: C64, other: &SpinorField) -> Result<()> {
        self.check_compatible(other)?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
        Ok(())
    }

    /// `self − other` as a new field.
    pub fn sub(&self, other: &SpinorField) -> Result<SpinorField> {
        let mut d = self.clone();
        d.axpy(C64::new(-1.0, 0.0), other)?;
        Ok(d)
    }

    /// Multiply by a complex scalar.
    pub fn scale(&mut self, a: C64) {
        for x in self.data.iter_mut() {
            *x *= a;
        }
    }

    /// Zero the `ξ = 0` coefficient of every component.
    pub fn enforce_mean_zero(&mut self) {
        let was_physical = self.repr == Representation::Physical;
        self.to_fourier();
        let np = self.grid.points();
        for c in 0..self.comps {
            self.data[c * np] = C64::new(0.0, 0.0);
        }
        if was_physical {
            self.to_physical();
        }
    }

    /// `true` iff the `ξ = 0` coefficients vanish (to a relative tolerance).
    pub fn is_mean_zero(&self, rel_tol: f64) -> bool {
        let f = self.fourier();
        let np = self.grid.points();
        let zero_mode: f64 = (0..self.comps).map(|c| f.data[c * np].norm_sqr()).sum::<f64>().sqrt();
        let total = f.sum_sq().sqrt();
        zero_mode <= rel_tol * total.max(f64::MIN_POSITIVE)
    }

    /// Multiply the Fourier coefficients by a scalar symbol `m(ξ)` (field moved to Fourier).
    pub fn apply_scalar_symbol(&mut self, m: impl Fn(&[f64]) -> f64) {
        self.to_fourier();
        let np = self.grid.points();
        for idx in 0..np {
            let s = m(self.grid.xi(idx));
            for c in 0..self.comps {
                self.data[c * np + idx] *= s;
            }
        }
    }

    /// Multiply the Fourier coefficients of a two-component field by a matrix symbol.
    pub fn apply_matrix_symbol(&mut self, m: impl Fn(&[f64]) -> Mat2) -> Result<()> {
        if self.comps != 2 {
            return Err(LabError::Shape(format!("matrix symbols act on 2-component fields, got {}", self.comps)));
        }
        self.to_fourier();
        let np = self.grid.points();
        for idx in 0..np {
            let a = m(self.grid.xi(idx));
            let v = a.apply(&[self.data[idx], self.data[np + idx]]);
            self.data[idx] = v[0];
            self.data[np + idx] = v[1];
        }
        Ok(())
    }

    /// Pointwise spinor inner product `u†v` as a scalar physical field (values only).
    pub fn pointwise_inner(&self, other: &SpinorField) -> Result<Vec<C64>> {
        let a = self.physical();
        let b = other.physical();
        a.check_compatible(&b)?;
        let np = self.grid.points();
        Ok((0..np).map(|idx| (0..self.comps).map(|c| a.data[c * np + idx].conj() * b.data[c * np + idx]).sum()).collect())
    }

    /// Write a snapshot file (see [`write_snapshot`]).
    pub fn save(&self, path: &Path, time: f64) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_snapshot(&mut file, self, time)?;
        file.flush()?;
        Ok(())
    }

    /// Read a snapshot file; returns the field and its time stamp.
    pub fn load(path: &Path) -> Result<(SpinorField, f64)> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        read_snapshot(&mut file)
    }
}

/// File magic of the snapshot format.
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"DIRSNAP1";
/// Size in bytes of the snapshot header.
pub const SNAPSHOT_HEADER_LEN: usize = 36;

/// Serialise a field. Byte layout (all little-endian):
///
/// | offset | size | content |
/// |---|---|---|
/// | 0 | 8 | magic `DIRSNAP1` |
/// | 8 | 4 | `n` (u32) |
/// | 12 | 4 | `N` (u32) |
/// | 16 | 8 | `L` (f64) |
/// | 24 | 1 | representation flag (0 physical, 1 Fourier) |
/// | 25 | 1 | component count (u8) |
/// | 26 | 2 | reserved, zero |
/// | 28 | 8 | time stamp (f64) |
/// | 36 | 16·comps·Nⁿ | `(re, im)` f64 pairs, component-major, row-major within a component |
pub fn write_snapshot(w: &mut impl Write, field: &SpinorField, time: f64) -> Result<()> {
    let g = field.grid();
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.size() as u32).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    w.write_all(&[match field.repr() {
        Representation::Physical => 0u8,
        Representation::Fourier => 1u8,
    }])?;
    w.write_all(&[field.comps() as u8])?;
    w.write_all(&[0u8, 0u8])?;
    w.write_all(&time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * field.data().len());
    for z in field.data() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Parse a field written by [`write_snapshot`].
pub fn read_snapshot(r: &mut impl Read) -> Result<(SpinorField, f64)> {
    let mut header = [0u8; SNAPSHOT_HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[..8] != SNAPSHOT_MAGIC {
        return Err(LabError::Format("bad snapshot magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().expect("8 bytes"));
    let n = u32_at(8) as usize;
    let size = u32_at(12) as usize;
    let length = f64_at(16);
    let repr = match header[24] {
        0 => Representation::Physical,
        1 => Representation::Fourier,
        f => return Err(LabError::Format(format!("unknown representation flag {f}"))),
    };
    let comps = header[25] as usize;
    let time = f64_at(28);
    let grid = Grid::new(n, size, length).map_err(|e| LabError::Format(format!("invalid grid in header: {e}")))?;
    let count = comps * grid.points();
    let mut bytes = vec![0u8; 16 * count];
    r.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(16)
        .map(|c| C64::new(f64::from_le_bytes(c[..8].try_into().expect("8 bytes")), f64::from_le_bytes(c[8..].try_into().expect("8 bytes"))))
        .collect();
    Ok((SpinorField::from_data(&grid, comps, repr, data)?, time))
}

/// A uniformly sampled time series of fields, `t_k = t₀ + k·dt`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: Arc<Grid>,
    t0: f64,
    dt: f64,
    frames: Vec<SpinorField>,
}

impl Trajectory {
    /// Build from frames; needs at least two frames of identical shape and `dt > 0`.
    pub fn new(t0: f64, dt: f64, frames: Vec<SpinorField>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(LabError::domain("a trajectory needs at least two frames"));
        }
        if !(dt > 0.0) {
            return Err(LabError::domain(format!("time step must be positive, got {dt}")));
        }
        let grid = frames[0].grid().clone();
        for f in &frames[1..] {
            frames[0].check_compatible(f)?;
        }
        Ok(Trajectory { grid, t0, dt, frames })
    }

    /// Sample `f(t)` at `t₀ + k·dt`, `k = 0..count`.
    pub fn sample(t0: f64, dt: f64, count: usize, f: impl Fn(f64) -> SpinorField) -> Result<Self> {
        Trajectory::new(t0, dt, (0..count).map(|k| f(t0 + k as f64 * dt)).collect())
    }

    /// The grid.
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

    /// Number of frames.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    /// Always false (a trajectory has ≥ 2 frames).
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Time of frame `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    /// Frame `k`.
    pub fn frame(&self, k: usize) -> &SpinorField {
        &self.frames[k]
    }

    /// All frames.
    pub fn frames(&self) -> &[SpinorField] {
        &self.frames
    }

    /// Mutable frames.
    pub fn frames_mut(&mut self) -> &mut [SpinorField] {
        &mut self.frames
    }

    /// Consume into frames.
    pub fn into_frames(self) -> Vec<SpinorField> {
        self.frames
    }

    /// Number of components per frame.
    pub fn comps(&self) -> usize {
        self.frames[0].comps()
    }

    /// Convert every frame to physical values.
    pub fn to_physical(&mut self) {
        self.frames.iter_mut().for_each(SpinorField::to_physical);
    }

    /// Convert every frame to Fourier coefficients.
    pub fn to_fourier(&mut self) {
        self.frames.iter_mut().for_each(SpinorField::to_fourier);
    }

    /// Multiply frame `k` by `w(t_k)` (e.g. a time cutoff `ρ(t/T)`).
    pub fn apply_time_weight(&mut self, w: impl Fn(f64) -> f64) {
        for k in 0..self.frames.len() {
            let s = w(self.time(k));
            self.frames[k].scale(C64::new(s, 0.0));
        }
    }

    /// `L^q_t L²_x` norm by the trapezoidal rule in time (`q = ∞` allowed).
    pub fn lq_l2(&self, q: f64) -> f64 {
        let vals: Vec<f64> = self.frames.iter().map(SpinorField::l2_norm).collect();
        crate::norms::time_lq(&vals, self.dt, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_symmetric_with_single_nyquist() {
        let g = Grid::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let ks: Vec<f64> = (0..8).map(|i| g.xi(i)[0]).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(2, 12, 1.0).is_err());
        assert!(Grid::new(2, 4, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(2, 8, -1.0).is_err());
    }

    #[test]
    fn single_mode_transform() {
        let g = Grid::new(2, 16, 8.0).unwrap();
        let k = [2.0 * g.dk(), -3.0 * g.dk()];
        let f = SpinorField::from_fn(&g, 1, |x, out| out[0] = C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]));
        let ff = f.fourier();
        let idx = g.freq_index(&[2, -3]);
        assert!((ff.data()[idx] - C64::new(256.0, 0.0)).norm() < 1e-10);
        let rest: f64 = ff.data().iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, z)| z.norm()).sum();
        assert!(rest < 1e-9);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let f = SpinorField::from_fn(&g, 2, |x, out| {
            out[0] = C64::new(x[0], x[1]);
            out[1] = C64::new(-x[1], 0.5);
        });
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 1.25).unwrap();
        assert_eq!(buf.len(), SNAPSHOT_HEADER_LEN + 16 * 2 * 64);
        let (h, t) = read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(t, 1.25);
        assert_eq!(h.data(), f.data());
        assert!(read_snapshot(&mut &b"NOTASNAP"[..]).is_err());
    }
}
