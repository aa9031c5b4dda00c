//! Fourier multipliers: dyadic frequency and modulation cutoffs, half-wave
//! projections, angular caps and the frequency sets they localise to.
//!
//! # Smooth cutoffs
//!
//! `ψ` is a smooth bump equal to 1 on `[0, 1]` and 0 on `[2, ∞)`, built from the
//! `exp(−1/x)` mollifier. The dyadic piece `Φ(a) = ψ(a) − ψ(2a)` is supported in
//! `[½, 2]` and `Σ_{λ∈2^ℤ} Φ(a/λ) = 1` for `a > 0` (the sum telescopes). The
//! low-pass cutoff `Φ₀ = ψ` gives `C_{≤d} = Σ_{d′≤d} C_{d′}`.
//!
//! # Multiplier catalogue
//!
//! | name | symbol |
//! |---|---|
//! | `P_λ` | `Φ(|ξ|/λ)` |
//! | `C_d` | `Φ(||τ| − |ξ||/d)` |
//! | `C_d^±` | `Φ(|τ ± |ξ||/d)` |
//! | `𝔠C_d^±` | `Π₊ C_d^± + Π₋ C_d^∓` (2×2 matrix symbol) |
//! | `Π_±` | `Π_{±ξ/|ξ|}` |
//! | `R_κ^±` | `Φ_κ(∓ξ/|ξ|)` |
//! | `P^±_{λ,κ}` | `P_λ R^±_κ` |
//! | `P^{±,α}_{λ,κ}` | `C^±_{≪α²λ} P_λ R^±_κ` |
//! | `♮P` | equal to 1 on the set of `P`, supported in the `101/100` enlargement |
//!
//! Space-time symbols act on the transform `ũ(τ, ξ) = ∫∫ e^{−i(tτ + x·ξ)} u`; with
//! this convention the free wave `e^{−it|∇|}` lives on `τ = −|ξ|`, i.e. on the
//! support of `C^+_{≤d}`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{Grid, Representation, SpinorField};
use crate::spacetime::SpaceTimeField;
use crate::spinor::{angle, projector_of, Direction, Mat2};

/// A sign `±`, used for the two half-wave flows and the matching cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// `+`
    Plus,
    /// `−`
    Minus,
}

impl Sign {
    /// `+1.0` or `−1.0`.
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// The opposite sign.
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// `exp(−1/x)` for `x > 0`, zero otherwise.
fn mollifier(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth monotone transition: 0 for `x ≤ 0`, 1 for `x ≥ 1`, `C^∞` in between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = mollifier(x);
        a / (a + mollifier(1.0 - x))
    }
}

/// The cutoff `ψ`: 1 on `[0, 1]`, 0 on `[2, ∞)` (even in `a`).
pub fn psi_cutoff(a: f64) -> f64 {
    smooth_step(2.0 - a.abs())
}

/// The dyadic piece `Φ(a) = ψ(a) − ψ(2a)`, supported in `½ ≤ |a| ≤ 2`.
pub fn phi_dyadic(a: f64) -> f64 {
    psi_cutoff(a) - psi_cutoff(2.0 * a)
}

/// The low-pass cutoff `Φ₀ = ψ`.
pub fn phi_low(a: f64) -> f64 {
    psi_cutoff(a)
}

/// Smooth plateau: 1 for `a ≤ 1`, 0 for `a ≥ 1 + width`.
pub fn plateau(a: f64, width: f64) -> f64 {
    smooth_step((1.0 + width - a) / width)
}

/// Enlargement factor of the `♮` sets.
pub const NATURAL_FACTOR: f64 = 101.0 / 100.0;

/// Default value of the small constant `c` in the modulation bound `cα²λ`.
pub const DEFAULT_MODULATION_CONSTANT: f64 = 1.0 / 32.0;

/// `true` iff `x` is an integer power of two (positive or negative exponent).
pub fn is_dyadic(x: f64) -> bool {
    x > 0.0 && x.is_finite() && {
        let l = x.log2();
        (l - l.round()).abs() < 1e-12
    }
}

/// A cap `κ = {ω : θ(ω, ω(κ)) ≤ α}` on `𝕊^{n−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    /// Centre `ω(κ)`.
    pub center: Direction,
    /// Angular radius `α`.
    pub alpha: f64,
}

impl Cap {
    /// `ω ∈ Cκ`, the concentric cap of radius `Cα`.
    pub fn contains_scaled(&self, omega: &[f64], scale: f64) -> bool {
        angle(omega, self.center.as_slice()) <= scale * self.alpha
    }

    /// `ω ∈ κ`.
    pub fn contains(&self, omega: &[f64]) -> bool {
        self.contains_scaled(omega, 1.0)
    }

    /// `θ(ω, κ) = inf_{ω′∈κ} θ(ω, ω′) = max(0, θ(ω, ω(κ)) − α)`.
    pub fn angle_to(&self, omega: &[f64]) -> f64 {
        (angle(omega, self.center.as_slice()) - self.alpha).max(0.0)
    }

    /// The concentric cap `Cκ`.
    pub fn scaled(&self, scale: f64) -> Cap {
        Cap { center: self.center, alpha: self.alpha * scale }
    }
}

/// The cover `𝒞_α` with its smooth partition of unity.
///
/// `Φ_κ(ω) = χ_κ(ω) / Σ_κ′ χ_κ′(ω)` with `χ_κ(ω) = ψ(2θ(ω, ω(κ))/α)`, so each
/// `Φ_κ` is supported in `κ` (hence in `2κ`); the centres are dense enough
/// (covering radius ≤ α/2) that the denominator never vanishes. For `n = 1`
/// the two caps `{±1}` carry indicator functions.
#[derive(Clone, Debug, Serialize)]
pub struct CapCover {
    n: usize,
    alpha: f64,
    caps: Vec<Cap>,
}

/// Construct the cap cover `𝒞_α` of `𝕊^{n−1}`, `0 < α ≤ ¼`.
///
/// * `n = 2`: `K = 2^⌈log₂(2π/α)⌉` equally spaced centres.
/// * `n = 3`: a Fibonacci point set with `⌈32/α²⌉` centres.
pub fn cap_cover(n: usize, alpha: f64) -> Result<CapCover> {
    if !(alpha > 0.0 && alpha <= 0.25) {
        return Err(LabError::domain(format!("cap radius must lie in (0, 1/4], got {alpha}")));
    }
    let caps = match n {
        1 => vec![Cap { center: Direction::new(&[1.0])?, alpha }, Cap { center: Direction::new(&[-1.0])?, alpha }],
        2 => {
            let k = (2.0 * std::f64::consts::PI / alpha).log2().ceil().exp2() as usize;
            (0..k).map(|j| Cap { center: Direction::from_angle(2.0 * std::f64::consts::PI * j as f64 / k as f64), alpha }).collect()
        }
        3 => {
            let k = (32.0 / (alpha * alpha)).ceil() as usize;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / k as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * j as f64;
                    Cap { center: Direction::normalized(&[r * phi.cos(), r * phi.sin(), z]).expect("unit"), alpha }
                })
                .collect()
        }
        _ => return Err(LabError::domain(format!("cap covers are built for n = 1, 2, 3; got {n}"))),
    };
    Ok(CapCover { n, alpha, caps })
}

impl CapCover {
    /// Dimension `n` of the ambient space.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Cap radius `α`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The caps.
    pub fn caps(&self) -> &[Cap] {
        &self.caps
    }

    /// Number of caps.
    pub fn len(&self) -> usize {
        self.caps.len()
    }

    /// Always false.
    pub fn is_empty(&self) -> bool {
        self.caps.is_empty()
    }

    fn chi(&self, i: usize, omega: &[f64]) -> f64 {
        if self.n == 1 {
            return if omega[0] * self.caps[i].center.as_slice()[0] > 0.0 { 1.0 } else { 0.0 };
        }
        psi_cutoff(2.0 * angle(omega, self.caps[i].center.as_slice()) / self.alpha)
    }

    /// Non-zero partition weights `(cap index, Φ_κ(ω))` at a unit vector `ω`.
    pub fn weights(&self, omega: &[f64]) -> Vec<(usize, f64)> {
        let raw: Vec<(usize, f64)> = (0..self.caps.len()).map(|i| (i, self.chi(i, omega))).filter(|(_, w)| *w > 0.0).collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        if total == 0.0 {
            return Vec::new();
        }
        raw.into_iter().map(|(i, w)| (i, w / total)).collect()
    }

    /// `Φ_κ(ω)` for cap `i`.
    pub fn phi(&self, i: usize, omega: &[f64]) -> f64 {
        let own = self.chi(i, omega);
        if own == 0.0 {
            return 0.0;
        }
        let total: f64 = (0..self.caps.len()).map(|j| self.chi(j, omega)).sum();
        own / total
    }

    /// Number of caps with `Φ_κ(ω) ≠ 0`.
    pub fn overlap(&self, omega: &[f64]) -> usize {
        (0..self.caps.len()).filter(|&i| self.chi(i, omega) > 0.0).count()
    }

    /// Index of the cap whose centre is closest to `ω`.
    pub fn nearest(&self, omega: &[f64]) -> usize {
        (0..self.caps.len())
            .min_by(|&a, &b| angle(omega, self.caps[a].center.as_slice()).partial_cmp(&angle(omega, self.caps[b].center.as_slice())).expect("finite angles"))
            .expect("non-empty cover")
    }

    /// Fail if the caps are too narrow to be resolved at frequency `λ` on `grid`
    /// (fewer than two lattice spacings across a cap).
    pub fn check_resolution(&self, grid: &Grid, lambda: f64) -> Result<()> {
        if self.n > 1 && self.alpha * lambda < 2.0 * grid.dk() {
            return Err(LabError::Resolution(format!(
                "cap radius {} at frequency {lambda} spans {:.2} lattice spacings; need ≥ 2 (increase L or λ)",
                self.alpha,
                self.alpha * lambda / grid.dk()
            )));
        }
        Ok(())
    }
}

/// Parameters shared by the frequency-set predicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetParams {
    /// Dyadic frequency `λ`.
    pub lambda: f64,
    /// The cap `κ`.
    pub cap: Cap,
    /// Modulation constant `c` of `cα²λ`.
    pub c_mod: f64,
    /// Use the `101/100` enlargement `♮A`.
    pub natural: bool,
}

impl SetParams {
    fn factor(&self) -> f64 {
        if self.natural {
            NATURAL_FACTOR
        } else {
            1.0
        }
    }

    fn in_annulus(&self, r: f64) -> bool {
        let f = self.factor();
        r >= self.lambda / 2.0 / f && r <= 2.0 * self.lambda * f
    }

    /// Modulation bound `cα²λ` (enlarged for `♮` sets).
    pub fn modulation_bound(&self) -> f64 {
        self.c_mod * self.cap.alpha * self.cap.alpha * self.lambda * self.factor()
    }

    fn in_cap(&self, dir: &[f64]) -> bool {
        self.cap.contains_scaled(dir, self.factor())
    }
}

fn unit(xi: &[f64]) -> Option<Vec<f64>> {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    (r > 0.0).then(|| xi.iter().map(|x| x / r).collect())
}

/// `(τ, ξ) ∈ A_λ(κ)`: `λ/2 ≤ |ξ| ≤ 2λ` and `sgn(τ) ξ/|ξ| ∈ κ`.
pub fn in_a_lambda(tau: f64, xi: &[f64], p: &SetParams) -> bool {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !p.in_annulus(r) || tau == 0.0 {
        return false;
    }
    let s = tau.signum();
    let dir: Vec<f64> = xi.iter().map(|x| s * x / r).collect();
    p.in_cap(&dir)
}

/// `ξ ∈ A^±_λ(κ)`: `λ/2 ≤ |ξ| ≤ 2λ` and `∓ξ/|ξ| ∈ κ`.
pub fn in_a_lambda_pm(xi: &[f64], sign: Sign, p: &SetParams) -> bool {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !p.in_annulus(r) {
        return false;
    }
    let dir: Vec<f64> = xi.iter().map(|x| -sign.value() * x / r).collect();
    p.in_cap(&dir)
}

/// `(τ, ξ) ∈ A_{α,λ}(κ)`: `A_λ(κ)` and `||τ| − |ξ|| ≤ cα²λ`.
pub fn in_a_alpha_lambda(tau: f64, xi: &[f64], p: &SetParams) -> bool {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    (tau.abs() - r).abs() <= p.modulation_bound() && in_a_lambda(tau, xi, p)
}

/// `(τ, ξ) ∈ A^±_{α,λ}(κ)`: `ξ ∈ A^±_λ(κ)` and `|τ ± |ξ|| ≤ cα²λ`.
pub fn in_a_alpha_lambda_pm(tau: f64, xi: &[f64], sign: Sign, p: &SetParams) -> bool {
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    (tau + sign.value() * r).abs() <= p.modulation_bound() && in_a_lambda_pm(xi, sign, p)
}

/// Descriptive tag of a multiplier.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `P_λ`.
    LittlewoodPaley {
        /// Frequency.
        lambda: f64,
    },
    /// `C_d`, `C_d^±` or their low-pass versions.
    Modulation {
        /// Modulation scale.
        d: f64,
        /// `None` for the two-sided `C_d`.
        sign: Option<Sign>,
        /// Low-pass `C_{≤d}`.
        low: bool,
    },
    /// `𝔠C_d^±`.
    VectorModulation {
        /// Modulation scale.
        d: f64,
        /// Sign.
        sign: Sign,
        /// Low-pass variant.
        low: bool,
    },
    /// `Π_±`.
    HalfWave {
        /// Sign.
        sign: Sign,
    },
    /// Angular and sector cutoffs.
    Sector {
        /// Index of the cap in its cover.
        cap: usize,
        /// Sign.
        sign: Sign,
        /// Variant.
        variant: SectorVariant,
    },
    /// Product of several multipliers.
    Composite(Vec<MultiplierKind>),
}

/// Variants of the sector multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SectorVariant {
    /// `R_κ^±`.
    R,
    /// `P^±_{λ,κ}`.
    PLambdaKappa {
        /// Frequency.
        lambda: f64,
    },
    /// `P^{±,α}_{λ,κ}` with modulation constant `c`.
    PAlpha {
        /// Frequency.
        lambda: f64,
        /// Modulation constant.
        c_mod: f64,
    },
    /// `♮P^±_{λ,κ}`.
    NaturalPLambdaKappa {
        /// Frequency.
        lambda: f64,
    },
    /// `♮P^{±,α}_{λ,κ}`.
    NaturalPAlpha {
        /// Frequency.
        lambda: f64,
        /// Modulation constant.
        c_mod: f64,
    },
}

type ScalarFn = dyn Fn(f64, &[f64]) -> f64 + Send + Sync;
type MatrixFn = dyn Fn(f64, &[f64]) -> Mat2 + Send + Sync;

/// Symbol of a multiplier, evaluated lazily at `(τ, ξ)` (τ ignored by spatial symbols).
#[derive(Clone)]
pub enum Symbol {
    /// Scalar symbol, acting as `s·I`.
    Scalar(Arc<ScalarFn>),
    /// Matrix symbol acting on two-component fields.
    Matrix(Arc<MatrixFn>),
}

/// A diagonal (possibly 2×2-matrix valued) Fourier multiplier.
#[derive(Clone)]
pub struct FourierMultiplier {
    kind: MultiplierKind,
    space_time: bool,
    symbol: Symbol,
}

impl std::fmt::Debug for FourierMultiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierMultiplier").field("kind", &self.kind).field("space_time", &self.space_time).finish()
    }
}

impl FourierMultiplier {
    /// A spatial scalar multiplier from a symbol `m(ξ)`.
    pub fn scalar(kind: MultiplierKind, m: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FourierMultiplier { kind, space_time: false, symbol: Symbol::Scalar(Arc::new(move |_, xi| m(xi))) }
    }

    /// A spatial matrix multiplier from a symbol `M(ξ)`.
    pub fn matrix(kind: MultiplierKind, m: impl Fn(&[f64]) -> Mat2 + Send + Sync + 'static) -> Self {
        FourierMultiplier { kind, space_time: false, symbol: Symbol::Matrix(Arc::new(move |_, xi| m(xi))) }
    }

    /// A space-time scalar multiplier `m(τ, ξ)`.
    pub fn space_time_scalar(kind: MultiplierKind, m: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FourierMultiplier { kind, space_time: true, symbol: Symbol::Scalar(Arc::new(m)) }
    }

    /// A space-time matrix multiplier `M(τ, ξ)`.
    pub fn space_time_matrix(kind: MultiplierKind, m: impl Fn(f64, &[f64]) -> Mat2 + Send + Sync + 'static) -> Self {
        FourierMultiplier { kind, space_time: true, symbol: Symbol::Matrix(Arc::new(m)) }
    }

    /// Tag.
    pub fn kind(&self) -> &MultiplierKind {
        &self.kind
    }

    /// Whether the symbol depends on `τ`.
    pub fn is_space_time(&self) -> bool {
        self.space_time
    }

    /// Whether the symbol is scalar.
    pub fn is_scalar(&self) -> bool {
        matches!(self.symbol, Symbol::Scalar(_))
    }

    /// The symbol as a matrix at `(τ, ξ)`.
    pub fn eval(&self, tau: f64, xi: &[f64]) -> Mat2 {
        match &self.symbol {
            Symbol::Scalar(f) => Mat2::identity().scale(C64::new(f(tau, xi), 0.0)),
            Symbol::Matrix(f) => f(tau, xi),
        }
    }

    /// The scalar symbol at `(τ, ξ)`, if scalar.
    pub fn eval_scalar(&self, tau: f64, xi: &[f64]) -> Option<f64> {
        match &self.symbol {
            Symbol::Scalar(f) => Some(f(tau, xi)),
            Symbol::Matrix(_) => None,
        }
    }

    /// The composition `self ∘ other` (symbol product `m_self · m_other`).
    pub fn compose(&self, other: &FourierMultiplier) -> FourierMultiplier {
        let kinds = vec![self.kind.clone(), other.kind.clone()];
        let space_time = self.space_time || other.space_time;
        let symbol = match (&self.symbol, &other.symbol) {
            (Symbol::Scalar(a), Symbol::Scalar(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Symbol::Scalar(Arc::new(move |t, x| a(t, x) * b(t, x)))
            }
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Symbol::Matrix(Arc::new(move |t, x| a.eval(t, x) * b.eval(t, x)))
            }
        };
        FourierMultiplier { kind: MultiplierKind::Composite(kinds), space_time, symbol }
    }

    /// Apply a spatial multiplier to a field (the field ends in Fourier representation).
    pub fn apply(&self, field: &mut SpinorField) -> Result<()> {
        if self.space_time {
            return Err(LabError::domain("space-time multiplier applied to a single field; use apply_space_time"));
        }
        field.to_fourier();
        let grid = field.grid().clone();
        let np = grid.points();
        let comps = field.comps();
        match &self.symbol {
            Symbol::Scalar(f) => {
                let data = field.data_mut();
                for idx in 0..np {
                    let s = f(0.0, grid.xi(idx));
                    for c in 0..comps {
                        data[c * np + idx] *= s;
                    }
                }
            }
            Symbol::Matrix(f) => {
                if comps != 2 {
                    return Err(LabError::Shape(format!("matrix symbol on a {comps}-component field")));
                }
                let data = field.data_mut();
                for idx in 0..np {
                    let v = f(0.0, grid.xi(idx)).apply(&[data[idx], data[np + idx]]);
                    data[idx] = v[0];
                    data[np + idx] = v[1];
                }
            }
        }
        Ok(())
    }

    /// Apply to a copy of a field, returning the result in physical representation.
    pub fn applied(&self, field: &SpinorField) -> Result<SpinorField> {
        let mut f = field.clone();
        let physical = field.repr() == Representation::Physical;
        self.apply(&mut f)?;
        if physical {
            f.to_physical();
        }
        Ok(f)
    }

    /// Apply to a space-time field held in `(τ, ξ)` representation.
    pub fn apply_space_time(&self, field: &mut SpaceTimeField) -> Result<()> {
        field.to_fourier();
        let grid = field.grid().clone();
        let np = grid.points();
        let m = field.frames();
        let comps = field.comps();
        let taus: Vec<f64> = (0..m).map(|j| field.tau(j)).collect();
        let data = field.data_mut();
        match &self.symbol {
            Symbol::Scalar(f) => {
                for (j, &tau) in taus.iter().enumerate() {
                    for idx in 0..np {
                        let s = f(tau, grid.xi(idx));
                        for c in 0..comps {
                            data[(c * m + j) * np + idx] *= s;
                        }
                    }
                }
            }
            Symbol::Matrix(f) => {
                if comps != 2 {
                    return Err(LabError::Shape(format!("matrix symbol on a {comps}-component field")));
                }
                for (j, &tau) in taus.iter().enumerate() {
                    for idx in 0..np {
                        let a = (j * np) + idx;
                        let b = ((m + j) * np) + idx;
                        let v = f(tau, grid.xi(idx)).apply(&[data[a], data[b]]);
                        data[a] = v[0];
                        data[b] = v[1];
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest pointwise operator norm of the symbol over the spatial lattice (τ = 0).
    pub fn max_symbol_norm(&self, grid: &Grid) -> f64 {
        (0..grid.points()).map(|idx| self.eval(0.0, grid.xi(idx)).op_norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `m² − m` over the spatial lattice.
    pub fn idempotence_defect(&self, grid: &Grid) -> f64 {
        (0..grid.points())
            .map(|idx| {
                let a = self.eval(0.0, grid.xi(idx));
                (a * a - a).max_abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Check that a dyadic frequency has lattice support below the Nyquist limit.
pub fn check_frequency_band(grid: &Grid, lambda: f64) -> Result<()> {
    if !is_dyadic(lambda) {
        return Err(LabError::Range(format!("λ = {lambda} is not a power of two")));
    }
    if 2.0 * lambda < grid.dk() || lambda / 2.0 > grid.nyquist() {
        return Err(LabError::Range(format!("λ = {lambda} outside the representable band [{}, {}]", grid.dk() / 2.0, 2.0 * grid.nyquist())));
    }
    Ok(())
}

/// The Littlewood–Paley projection `P_λ` with symbol `Φ(|ξ|/λ)`.
pub fn littlewood_paley(grid: &Grid, lambda: f64) -> Result<FourierMultiplier> {
    check_frequency_band(grid, lambda)?;
    Ok(FourierMultiplier::scalar(MultiplierKind::LittlewoodPaley { lambda }, move |xi| phi_dyadic(norm(xi) / lambda)))
}

/// All dyadic frequencies whose `P_λ` touches the lattice, ascending.
pub fn dyadic_frequencies(grid: &Grid) -> Vec<f64> {
    let kmax = grid.xi_norms().iter().cloned().fold(0.0, f64::max);
    let lo = (grid.dk() / 2.0).log2().floor() as i32;
    let hi = (2.0 * kmax).log2().ceil() as i32;
    (lo..=hi).map(|j| 2f64.powi(j)).filter(|&l| check_frequency_band(grid, l).is_ok()).collect()
}

/// The modulation cutoff `C_d^±` (`sign = Some`) or `C_d` (`sign = None`); `low`
/// selects the smooth low-pass `C_{≤d}` built from `Φ₀`.
pub fn modulation_multiplier(d: f64, sign: Option<Sign>, low: bool) -> Result<FourierMultiplier> {
    if !is_dyadic(d) {
        return Err(LabError::Range(format!("modulation scale d = {d} is not a power of two")));
    }
    let profile = move |a: f64| if low { phi_low(a / d) } else { phi_dyadic(a / d) };
    Ok(FourierMultiplier::space_time_scalar(MultiplierKind::Modulation { d, sign, low }, move |tau, xi| {
        let r = norm(xi);
        let dist = match sign {
            Some(s) => (tau + s.value() * r).abs(),
            None => (tau.abs() - r).abs(),
        };
        profile(dist)
    }))
}

/// `𝔠C_d^± = Π₊ C_d^± + Π₋ C_d^∓` (matrix symbol), or its low-pass version.
pub fn vector_modulation_multiplier(d: f64, sign: Sign, low: bool) -> Result<FourierMultiplier> {
    if !is_dyadic(d) {
        return Err(LabError::Range(format!("modulation scale d = {d} is not a power of two")));
    }
    let profile = move |a: f64| if low { phi_low(a / d) } else { phi_dyadic(a / d) };
    Ok(FourierMultiplier::space_time_matrix(MultiplierKind::VectorModulation { d, sign, low }, move |tau, xi| {
        let r = norm(xi);
        let s = sign.value();
        let plus = projector_of(xi).scale(C64::new(profile((tau + s * r).abs()), 0.0));
        let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
        let minus = projector_of(&neg).scale(C64::new(profile((tau - s * r).abs()), 0.0));
        plus + minus
    }))
}

/// The half-wave projection `Π_± = Π_{±ξ/|ξ|}` (zero at `ξ = 0`).
pub fn half_wave_projection(sign: Sign) -> FourierMultiplier {
    FourierMultiplier::matrix(MultiplierKind::HalfWave { sign }, move |xi| {
        let v: Vec<f64> = xi.iter().map(|x| sign.value() * x).collect();
        projector_of(&v)
    })
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sector cutoffs from a cap cover: `R_κ^±`, `P^±_{λ,κ}`, `P^{±,α}_{λ,κ}` and the `♮` enlargements.
pub fn sector_multiplier(cover: &Arc<CapCover>, cap: usize, sign: Sign, variant: SectorVariant) -> Result<FourierMultiplier> {
    if cap >= cover.len() {
        return Err(LabError::domain(format!("cap index {cap} out of range ({} caps)", cover.len())));
    }
    let kind = MultiplierKind::Sector { cap, sign, variant };
    let s = sign.value();
    let cover = cover.clone();
    let alpha = cover.alpha();
    let angular = move |xi: &[f64]| -> f64 {
        match unit(xi) {
            Some(dir) => {
                let d: Vec<f64> = dir.iter().map(|x| -s * x).collect();
                cover.phi(cap, &d)
            }
            None => 0.0,
        }
    };
    match variant {
        SectorVariant::R => Ok(FourierMultiplier::scalar(kind, angular)),
        SectorVariant::PLambdaKappa { lambda } => Ok(FourierMultiplier::scalar(kind, move |xi| phi_dyadic(norm(xi) / lambda) * angular(xi))),
        SectorVariant::PAlpha { lambda, c_mod } => {
            let bound = c_mod * alpha * alpha * lambda;
            Ok(FourierMultiplier::space_time_scalar(kind, move |tau, xi| {
                let r = norm(xi);
                phi_low(2.0 * (tau + s * r).abs() / bound) * phi_dyadic(r / lambda) * angular(xi)
            }))
        }
        SectorVariant::NaturalPLambdaKappa { .. } | SectorVariant::NaturalPAlpha { .. } => {
            Err(LabError::domain("use natural_sector_multiplier for ♮ variants (needs the cap geometry)"))
        }
    }
}

/// The enlarged cutoffs `♮P^±_{λ,κ}` / `♮P^{±,α}_{λ,κ}`: identically 1 on the support of
/// the unenlarged multiplier and supported in the `101/100` enlargement of its set.
pub fn natural_sector_multiplier(cap: Cap, sign: Sign, lambda: f64, modulation: Option<f64>) -> FourierMultiplier {
    let s = sign.value();
    let w = NATURAL_FACTOR - 1.0;
    let variant = match modulation {
        Some(c_mod) => SectorVariant::NaturalPAlpha { lambda, c_mod },
        None => SectorVariant::NaturalPLambdaKappa { lambda },
    };
    let kind = MultiplierKind::Sector { cap: usize::MAX, sign, variant };
    let radial = move |r: f64| plateau(r / (2.0 * lambda), w) * plateau((lambda / 2.0) / r.max(f64::MIN_POSITIVE), w);
    let angular = move |xi: &[f64]| match unit(xi) {
        Some(dir) => {
            let d: Vec<f64> = dir.iter().map(|x| -s * x).collect();
            plateau(angle(&d, cap.center.as_slice()) / cap.alpha, w)
        }
        None => 0.0,
    };
    match modulation {
        None => FourierMultiplier::scalar(kind, move |xi| {
            let r = norm(xi);
            if r == 0.0 {
                0.0
            } else {
                radial(r) * angular(xi)
            }
        }),
        Some(c_mod) => {
            let bound = c_mod * cap.alpha * cap.alpha * lambda;
            FourierMultiplier::space_time_scalar(kind, move |tau, xi| {
                let r = norm(xi);
                if r == 0.0 {
                    0.0
                } else {
                    plateau((tau + s * r).abs() / bound, w) * radial(r) * angular(xi)
                }
            })
        }
    }
}

/// Result of a Bernstein ratio evaluation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BernsteinRatio {
    /// `‖f‖_{L^p} / (|Ω|^{1/q − 1/p} ‖f‖_{L^q})`.
    pub ratio: f64,
    /// Lebesgue measure `|Ω|` of the union of lattice cells in the set.
    pub measure: f64,
    /// Number of lattice points in the set.
    pub count: usize,
}

/// Bernstein ratio `‖f‖_{L^p} / (|Ω|^{1/q−1/p} ‖f‖_{L^q})` for `f̂` supported in `Ω`.
///
/// `omega` is a predicate on lattice frequencies; `|Ω|` is measured as the
/// number of lattice points in `Ω` times the cell volume `(2π/L)ⁿ`.
pub fn bernstein_check(f: &SpinorField, omega: impl Fn(&[f64]) -> bool, p: f64, q: f64) -> Result<BernsteinRatio> {
    if !(2.0..=f64::INFINITY).contains(&q) || p < q {
        return Err(LabError::domain(format!("need 2 ≤ q ≤ p, got p = {p}, q = {q}")));
    }
    let grid = f.grid().clone();
    let ff = f.fourier();
    let np = grid.points();
    let total: f64 = ff.data().iter().map(|z| z.norm_sqr()).sum();
    let mut count = 0;
    let mut outside = 0.0;
    for idx in 0..np {
        let inside = omega(grid.xi(idx));
        if inside {
            count += 1;
        }
        let mass: f64 = (0..f.comps()).map(|c| ff.data()[c * np + idx].norm_sqr()).sum();
        if !inside {
            outside += mass;
        }
    }
    if outside > 1e-20 * total.max(f64::MIN_POSITIVE) {
        return Err(LabError::domain(format!("f̂ is not supported in Ω (relative mass outside: {:.3e})", (outside / total).sqrt())));
    }
    let measure = count as f64 * grid.dk().powi(grid.dim() as i32);
    let phys = ff.physical();
    let lp = crate::norms::lp_norm(&phys, p);
    let lq = crate::norms::lp_norm(&phys, q);
    let expo = 1.0 / q - if p.is_infinite() { 0.0 } else { 1.0 / p };
    Ok(BernsteinRatio { ratio: lp / (measure.powf(expo) * lq), measure, count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shapes() {
        assert_eq!(psi_cutoff(0.5), 1.0);
        assert_eq!(psi_cutoff(1.0), 1.0);
        assert_eq!(psi_cutoff(2.0), 0.0);
        assert_eq!(phi_dyadic(0.5), 0.0);
        assert_eq!(phi_dyadic(2.0), 0.0);
        assert!(phi_dyadic(1.0) > 0.0);
        for k in 1..1000 {
            let a = k as f64 * 0.013;
            let total: f64 = (-12..12).map(|j| phi_dyadic(a / 2f64.powi(j))).sum();
            assert!((total - 1.0).abs() < 1e-14, "a = {a}: {total}");
        }
    }

    #[test]
    fn cover_sizes() {
        assert_eq!(cap_cover(1, 0.25).unwrap().len(), 2);
        let c = cap_cover(2, 0.25).unwrap().len();
        assert!((25..=32).contains(&c), "{c}");
        assert!(cap_cover(2, 0.5).is_err());
    }

    #[test]
    fn set_membership_examples() {
        let cap = Cap { center: Direction::new(&[1.0, 0.0]).unwrap(), alpha: 0.25 };
        let p = SetParams { lambda: 4.0, cap, c_mod: DEFAULT_MODULATION_CONSTANT, natural: false };
        // ∓ξ/|ξ| ∈ κ: for the + sign the frequency points away from the cap centre.
        assert!(in_a_lambda_pm(&[-4.0, 0.0], Sign::Plus, &p));
        assert!(!in_a_lambda_pm(&[4.0, 0.0], Sign::Plus, &p));
        assert!(in_a_lambda_pm(&[4.0, 0.0], Sign::Minus, &p));
        // sgn(τ)ξ/|ξ| ∈ κ
        assert!(in_a_lambda(-1.0, &[-4.0, 0.0], &p));
        // |τ ± |ξ|| ≤ cα²λ: the + set sits on τ = −|ξ|, the − set on τ = +|ξ|.
        assert!(in_a_alpha_lambda_pm(-4.0, &[-4.0, 0.0], Sign::Plus, &p));
        assert!(!in_a_alpha_lambda_pm(4.0, &[-4.0, 0.0], Sign::Plus, &p));
        assert!(in_a_alpha_lambda_pm(4.0, &[4.0, 0.0], Sign::Minus, &p));
        assert!(!in_a_alpha_lambda_pm(-4.0, &[4.0, 0.0], Sign::Minus, &p));
    }

    #[test]
    fn dyadic_detection() {
        assert!(is_dyadic(0.125));
        assert!(is_dyadic(4.0));
        assert!(!is_dyadic(3.0));
        assert!(!is_dyadic(0.0));
    }
}
