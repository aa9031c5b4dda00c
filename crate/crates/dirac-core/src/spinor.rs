//! Exact small-matrix spinor algebra.
//!
//! This module provides the Pauli matrices, the Dirac matrices for `n = 2`
//! (2×2) and `n = 3` (4×4), the half-wave projections
//!
//! ```text
//! Π_ω = ½ (I + σ·ω),      ω ∈ 𝕊^{n-1},
//! ```
//!
//! the quadratic identity behind the reduction of the Thirring model to the
//! Soler model, and the pointwise cubic right-hand sides of the first order
//! `(u, v)` system
//!
//! ```text
//! (∂_t + σ·∇) u = B₁ v + B₂ β u,
//! (∂_t − σ·∇) v = B₃ u + B₄ β v.
//! ```
//!
//! Conventions: the Minkowski metric is `g = diag(1, −1, …, −1)`,
//! `ψ̄ = ψ† γ⁰`, and for `n = 1` the operator `σ·∇` is `σ³ ∂₁`, so that the
//! two spinor components travel as `f₁(x − t)` and `f₂(x + t)`.
//!
//! All generators have entries in `{0, ±1, ±i}`; products and anticommutators
//! of generators are therefore exact in floating point.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

use crate::error::{LabError, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
/// The imaginary unit.
pub const IM: C64 = C64::new(0.0, 1.0);

/// Tolerance on `|ω| = 1` accepted by [`Direction::new`].
pub const UNIT_TOLERANCE: f64 = 1e-14;

/// Dense `D × D` complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat<const D: usize> {
    /// Entries, `m[row][col]`.
    pub m: [[C64; D]; D],
}

/// 2×2 complex matrix (Pauli matrices, `n = 2` Dirac matrices, projections).
pub type Mat2 = Mat<2>;
/// 4×4 complex matrix (`n = 3` Dirac matrices).
pub type Mat4 = Mat<4>;

impl<const D: usize> Mat<D> {
    /// The zero matrix.
    pub fn zero() -> Self {
        Mat { m: [[ZERO; D]; D] }
    }

    /// The identity matrix.
    pub fn identity() -> Self {
        let mut a = Self::zero();
        for i in 0..D {
            a.m[i][i] = ONE;
        }
        a
    }

    /// Build from rows.
    pub fn from_rows(m: [[C64; D]; D]) -> Self {
        Mat { m }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut a = Self::zero();
        for i in 0..D {
            for j in 0..D {
                a.m[i][j] = self.m[j][i].conj();
            }
        }
        a
    }

    /// Multiply every entry by a complex scalar.
    pub fn scale(&self, c: C64) -> Self {
        let mut a = *self;
        for row in a.m.iter_mut() {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        a
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[C64; D]) -> [C64; D] {
        let mut out = [ZERO; D];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for j in 0..D {
                acc += self.m[i][j] * v[j];
            }
            *o = acc;
        }
        out
    }

    /// Largest entry modulus; the residual measure used by the identity checks.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `true` iff `A = A†` bit for bit.
    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    /// Anticommutator `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Commutator `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }
}

impl<const D: usize> Mul for Mat<D> {
    type Output = Mat<D>;
    fn mul(self, rhs: Mat<D>) -> Mat<D> {
        let mut a = Mat::zero();
        for i in 0..D {
            for j in 0..D {
                let mut acc = ZERO;
                for k in 0..D {
                    acc += self.m[i][k] * rhs.m[k][j];
                }
                a.m[i][j] = acc;
            }
        }
        a
    }
}

impl<const D: usize> Add for Mat<D> {
    type Output = Mat<D>;
    fn add(self, rhs: Mat<D>) -> Mat<D> {
        let mut a = self;
        for i in 0..D {
            for j in 0..D {
                a.m[i][j] += rhs.m[i][j];
            }
        }
        a
    }
}

impl<const D: usize> Sub for Mat<D> {
    type Output = Mat<D>;
    fn sub(self, rhs: Mat<D>) -> Mat<D> {
        let mut a = self;
        for i in 0..D {
            for j in 0..D {
                a.m[i][j] -= rhs.m[i][j];
            }
        }
        a
    }
}

impl Mat2 {
    /// Operator (spectral) norm via the closed form for the largest singular value:
    /// `s² = (‖A‖_F² + √(‖A‖_F⁴ − 4|det A|²)) / 2`.
    pub fn op_norm(&self) -> f64 {
        let f2 = self.m.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
        let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        let disc = (f2 * f2 - 4.0 * det.norm_sqr()).max(0.0);
        ((f2 + disc.sqrt()) / 2.0).max(0.0).sqrt()
    }

    /// Determinant.
    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// Pauli matrix `σʲ`, `j ∈ {1, 2, 3}`.
///
/// # Panics
/// Panics if `j` is not 1, 2 or 3 (a programming error, not a data error).
pub fn pauli(j: usize) -> Mat2 {
    match j {
        1 => Mat2::from_rows([[ZERO, ONE], [ONE, ZERO]]),
        2 => Mat2::from_rows([[ZERO, -IM], [IM, ZERO]]),
        3 => Mat2::from_rows([[ONE, ZERO], [ZERO, -ONE]]),
        _ => panic!("Pauli index must be 1, 2 or 3, got {j}"),
    }
}

/// `σ·v` for a vector `v ∈ ℝⁿ`, `n ∈ {1, 2, 3}` (for `n = 1`, `σ·v = σ³ v₁`).
pub fn sigma_dot(v: &[f64]) -> Mat2 {
    match v.len() {
        1 => pauli(3).scale(C64::new(v[0], 0.0)),
        2 => {
            // σ¹v₁ + σ²v₂ = [[0, v₁ − i v₂], [v₁ + i v₂, 0]]
            Mat2::from_rows([[ZERO, C64::new(v[0], -v[1])], [C64::new(v[0], v[1]), ZERO]])
        }
        3 => Mat2::from_rows([[C64::new(v[2], 0.0), C64::new(v[0], -v[1])], [C64::new(v[0], v[1]), C64::new(-v[2], 0.0)]]),
        n => panic!("sigma_dot: dimension {n} not in 1..=3"),
    }
}

/// Metric coefficient `g^{μμ}` (diagonal), `g = diag(1, −1, …, −1)`.
pub fn metric(mu: usize) -> f64 {
    if mu == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Dirac matrices for `n = 2`: `γ⁰ = σ³`, `γ¹ = iσ²`, `γ² = −iσ¹`.
pub fn gamma2(mu: usize) -> Mat2 {
    match mu {
        0 => pauli(3),
        1 => pauli(2).scale(IM),
        2 => pauli(1).scale(-IM),
        _ => panic!("gamma2 index must be 0..=2, got {mu}"),
    }
}

/// Dirac matrices for `n = 3`: `γ⁰ = diag(I, −I)`, `γʲ = [[0, σʲ], [−σʲ, 0]]`.
pub fn gamma3(mu: usize) -> Mat4 {
    let mut g = Mat4::zero();
    match mu {
        0 => {
            g.m[0][0] = ONE;
            g.m[1][1] = ONE;
            g.m[2][2] = -ONE;
            g.m[3][3] = -ONE;
        }
        1..=3 => {
            let s = pauli(mu);
            for i in 0..2 {
                for j in 0..2 {
                    g.m[i][j + 2] = s.m[i][j];
                    g.m[i + 2][j] = -s.m[i][j];
                }
            }
        }
        _ => panic!("gamma3 index must be 0..=3, got {mu}"),
    }
    g
}

/// `γ⁵ = iγ⁰γ¹γ²γ³` (equal to `[[0, I], [I, 0]]` in this representation).
pub fn gamma5() -> Mat4 {
    (gamma3(0) * gamma3(1) * gamma3(2) * gamma3(3)).scale(IM)
}

/// `α^j = γ⁰γ^j` for `n = 3`, the matrices of the Hamiltonian form `∂_t ψ + α·∇ψ`.
pub fn alpha3(j: usize) -> Mat4 {
    gamma3(0) * gamma3(j)
}

/// `β` of the `(u, v)` system: `σ³` for `n ≤ 2`, the zero matrix for `n = 3`.
pub fn beta(n: usize) -> Mat2 {
    if n == 3 {
        Mat2::zero()
    } else {
        pauli(3)
    }
}

/// Largest entry of `γ^μγ^ν + γ^νγ^μ − 2g^{μν}I` over all index pairs, for `n ∈ {2, 3}`.
///
/// An optional perturbation can be added to `γ¹` (fault injection for the
/// command line verifier).
pub fn anticommutator_residual(n: usize, perturb_gamma1: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    match n {
        2 => {
            let g = |mu: usize| {
                let mut m = gamma2(mu);
                if mu == 1 {
                    m.m[0][0] += C64::new(perturb_gamma1, 0.0);
                }
                m
            };
            for mu in 0..3 {
                for nu in 0..3 {
                    let target = if mu == nu { Mat2::identity().scale(C64::new(2.0 * metric(mu), 0.0)) } else { Mat2::zero() };
                    worst = worst.max((g(mu).anticommutator(&g(nu)) - target).max_abs());
                }
            }
        }
        3 => {
            let g = |mu: usize| {
                let mut m = gamma3(mu);
                if mu == 1 {
                    m.m[0][0] += C64::new(perturb_gamma1, 0.0);
                }
                m
            };
            for mu in 0..4 {
                for nu in 0..4 {
                    let target = if mu == nu { Mat4::identity().scale(C64::new(2.0 * metric(mu), 0.0)) } else { Mat4::zero() };
                    worst = worst.max((g(mu).anticommutator(&g(nu)) - target).max_abs());
                }
            }
        }
        _ => return Err(LabError::domain(format!("Dirac matrices are defined for n = 2, 3; got n = {n}"))),
    }
    Ok(worst)
}

/// A unit vector `ω ∈ 𝕊^{n−1}`, `n ∈ {1, 2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    n: usize,
    w: [f64; 3],
}

impl Direction {
    /// Wrap a vector that is already of unit length (to [`UNIT_TOLERANCE`]).
    pub fn new(v: &[f64]) -> Result<Self> {
        let n = v.len();
        if !(1..=3).contains(&n) {
            return Err(LabError::domain(format!("direction dimension {n} not in 1..=3")));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(LabError::domain(format!("direction is not a unit vector (|ω| = {norm})")));
        }
        let mut w = [0.0; 3];
        w[..n].copy_from_slice(v);
        Ok(Direction { n, w })
    }

    /// Normalise a non-zero vector.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let n = v.len();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(1..=3).contains(&n) || norm == 0.0 || !norm.is_finite() {
            return Err(LabError::domain("cannot normalise a zero, non-finite or >3-dimensional vector"));
        }
        let mut w = [0.0; 3];
        for i in 0..n {
            w[i] = v[i] / norm;
        }
        Ok(Direction { n, w })
    }

    /// The planar direction `(cos φ, sin φ)`.
    pub fn from_angle(phi: f64) -> Self {
        Direction { n: 2, w: [phi.cos(), phi.sin(), 0.0] }
    }

    /// Unit vector from spherical angles (polar `θ`, azimuth `φ`).
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        Direction { n: 3, w: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()] }
    }

    /// Dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Components as a slice of length `n`.
    pub fn as_slice(&self) -> &[f64] {
        &self.w[..self.n]
    }

    /// Components padded to length 3.
    pub fn padded(&self) -> [f64; 3] {
        self.w
    }

    /// The antipodal direction `−ω`.
    pub fn neg(&self) -> Self {
        Direction { n: self.n, w: [-self.w[0], -self.w[1], -self.w[2]] }
    }

    /// Euclidean inner product with a vector of the same dimension (extra entries ignored).
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.as_slice().iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Angle to another direction.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        angle(self.as_slice(), other.as_slice())
    }
}

/// The angle `θ(a, b) ∈ [0, π]` between two non-zero vectors of equal dimension.
///
/// Evaluated as `atan2(|a × b|, a·b)`, which is accurate near both `0` and `π`
/// (unlike `acos`). For `n = 1` the result is `0` or `π`.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let cross = match a.len() {
        1 => 0.0,
        2 => (a[0] * b[1] - a[1] * b[0]).abs(),
        3 => {
            let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
        }
        n => panic!("angle: dimension {n} not in 1..=3"),
    };
    cross.atan2(dot)
}

/// The projection `Π_ω = ½(I + σ·ω)`.
pub fn projector(omega: &Direction) -> Mat2 {
    (Mat2::identity() + sigma_dot(omega.as_slice())).scale(C64::new(0.5, 0.0))
}

/// Projection from an unchecked vector (normalised on the fly). Used on
/// frequency lattices where `ω = ±ξ/|ξ|`; returns zero for `ξ = 0`.
pub fn projector_of(v: &[f64]) -> Mat2 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Mat2::zero();
    }
    let mut w = [0.0; 3];
    for (i, x) in v.iter().enumerate() {
        w[i] = x / norm;
    }
    (Mat2::identity() + sigma_dot(&w[..v.len()])).scale(C64::new(0.5, 0.0))
}

/// Residuals of the projection identities for one direction.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ProjectionResiduals {
    /// `|Π_ω + Π_{−ω} − I|`.
    pub completeness: f64,
    /// `|Π_ω Π_{−ω}|`.
    pub orthogonality: f64,
    /// `|Π_ω² − Π_ω|`.
    pub idempotence: f64,
    /// `|Π_ω − Π_ω†|`.
    pub hermiticity: f64,
    /// `|σ·ω − (Π_ω − Π_{−ω})|`.
    pub splitting: f64,
}

impl ProjectionResiduals {
    /// Largest of the individual residuals.
    pub fn max(&self) -> f64 {
        self.completeness.max(self.orthogonality).max(self.idempotence).max(self.hermiticity).max(self.splitting)
    }
}

/// Evaluate the projection identities `I = Π_ω + Π_{−ω}`, `σ·ω = Π_ω − Π_{−ω}`,
/// `Π_ω Π_{−ω} = 0`, `Π_ω² = Π_ω`, `Π_ω† = Π_ω` (entrywise max residuals).
pub fn projection_residuals(omega: &Direction) -> ProjectionResiduals {
    let p = projector(omega);
    let q = projector(&omega.neg());
    ProjectionResiduals {
        completeness: (p + q - Mat2::identity()).max_abs(),
        orthogonality: (p * q).max_abs(),
        idempotence: (p * p - p).max_abs(),
        hermiticity: (p - p.adjoint()).max_abs(),
        splitting: (sigma_dot(omega.as_slice()) - (p - q)).max_abs(),
    }
}

/// Null structure: returns `(‖Π_ω Π_{ω′}‖_op, θ(ω, −ω′))`.
///
/// The norm equals `½|ω + ω′| = cos(θ(ω, ω′)/2) = sin(θ(ω, −ω′)/2)·…`; in
/// particular it is bounded by `θ(ω, −ω′)`.
pub fn null_structure_bound(omega: &Direction, omega_p: &Direction) -> (f64, f64) {
    let norm = (projector(omega) * projector(omega_p)).op_norm();
    (norm, omega.angle_to(&omega_p.neg()))
}

/// `ψ̄ A ψ = ψ† γ⁰ A ψ` for a 2-spinor (`γ⁰ = σ³`).
fn bar2(psi: &[C64; 2], a: &Mat2) -> C64 {
    let g0 = gamma2(0);
    let w = (g0 * *a).apply(psi);
    psi[0].conj() * w[0] + psi[1].conj() * w[1]
}

/// `ψ̄ A ψ` for a 4-spinor.
fn bar4(psi: &[C64; 4], a: &Mat4) -> C64 {
    let w = (gamma3(0) * *a).apply(psi);
    (0..4).map(|i| psi[i].conj() * w[i]).sum()
}

/// Thirring nonlinearity `(ψ̄γ^μψ) γ_μ ψ` (indices lowered with `g`).
///
/// `psi` has length 2 (`n = 2`) or 4 (`n = 3`).
pub fn thirring_term(psi: &[C64]) -> Result<Vec<C64>> {
    match psi.len() {
        2 => {
            let p = [psi[0], psi[1]];
            let mut out = [ZERO; 2];
            for mu in 0..3 {
                let g = gamma2(mu);
                let c = bar2(&p, &g) * metric(mu);
                let w = g.apply(&p);
                out[0] += c * w[0];
                out[1] += c * w[1];
            }
            Ok(out.to_vec())
        }
        4 => {
            let p = [psi[0], psi[1], psi[2], psi[3]];
            let mut out = [ZERO; 4];
            for mu in 0..4 {
                let g = gamma3(mu);
                let c = bar4(&p, &g) * metric(mu);
                let w = g.apply(&p);
                for i in 0..4 {
                    out[i] += c * w[i];
                }
            }
            Ok(out.to_vec())
        }
        k => Err(LabError::domain(format!("spinor length {k} is neither 2 nor 4"))),
    }
}

/// Soler nonlinearity `(ψ̄ψ) ψ` for a 2- or 4-spinor.
pub fn soler_term(psi: &[C64]) -> Result<Vec<C64>> {
    let s = scalar_density(psi)?;
    Ok(psi.iter().map(|z| z * s).collect())
}

/// The scalar density `ψ̄ψ` (real up to rounding).
pub fn scalar_density(psi: &[C64]) -> Result<C64> {
    match psi.len() {
        2 => Ok(C64::from(psi[0].norm_sqr() - psi[1].norm_sqr())),
        4 => Ok(C64::from(psi[0].norm_sqr() + psi[1].norm_sqr() - psi[2].norm_sqr() - psi[3].norm_sqr())),
        k => Err(LabError::domain(format!("spinor length {k} is neither 2 nor 4"))),
    }
}

/// Residual of the quadratic identity
///
/// ```text
/// (ψ̄γ^μψ)γ_μψ = (ψ̄ψ)ψ                         (n = 2)
/// (ψ̄γ^μψ)γ_μψ = (ψ̄ψ)ψ − (ψ̄γ⁵ψ)γ⁵ψ            (n = 3)
/// ```
///
/// returned as the Euclidean norm of the difference.
pub fn fierz_check(psi: &[C64], n: usize) -> Result<f64> {
    let expected_len = match n {
        2 => 2,
        3 => 4,
        _ => return Err(LabError::domain(format!("identity is stated for n = 2, 3; got n = {n}"))),
    };
    if psi.len() != expected_len {
        return Err(LabError::domain(format!("n = {n} needs a spinor of length {expected_len}, got {}", psi.len())));
    }
    let lhs = thirring_term(psi)?;
    let mut rhs = soler_term(psi)?;
    if n == 3 {
        let p = [psi[0], psi[1], psi[2], psi[3]];
        let g5 = gamma5();
        let c = bar4(&p, &g5);
        let w = g5.apply(&p);
        for i in 0..4 {
            rhs[i] -= c * w[i];
        }
    }
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
}

/// Residual of `Σ_j (w₁†σʲw₂)σʲw₃ = 2(w₁†w₃)w₂ − (w₁†w₂)w₃`.
pub fn pauli_fierz_residual(w1: &[C64; 2], w2: &[C64; 2], w3: &[C64; 2]) -> f64 {
    let ip = |a: &[C64; 2], b: &[C64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
    let mut lhs = [ZERO; 2];
    for j in 1..=3 {
        let s = pauli(j);
        let c = ip(w1, &s.apply(w2));
        let w = s.apply(w3);
        lhs[0] += c * w[0];
        lhs[1] += c * w[1];
    }
    let a = ip(w1, w3) * 2.0;
    let b = ip(w1, w2);
    let rhs = [a * w2[0] - b * w3[0], a * w2[1] - b * w3[1]];
    ((lhs[0] - rhs[0]).norm_sqr() + (lhs[1] - rhs[1]).norm_sqr()).sqrt()
}

/// Cubic nonlinearity model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `F(ψ) = (ψ̄ψ)ψ`.
    Soler,
    /// `F(ψ) = (ψ̄γ^μψ)γ_μψ`.
    Thirring,
}

/// The coefficients `(B₁, B₂, B₃, B₄)` of the `(u, v)` system at one point.
///
/// * `n = 3` (`β = 0`): Soler `B₁ = B₃ = 2i(u†v + v†u)`; Thirring
///   `B₁ = 4i(v†u)`, `B₃ = 4i(u†v)`.
/// * `n = 2` (both models coincide): `B₁ = B₃ = B₄ = 0` and `B₂ = i(u†βu)`.
///   The factor `i` comes from multiplying `−iγ^μ∂_μψ = (ψ̄ψ)ψ` through by
///   `iγ⁰`; without it the flow would not conserve charge.
pub fn system_coefficients(u: &[C64; 2], v: &[C64; 2], model: Model, n: usize) -> Result<[C64; 4]> {
    let ip = |a: &[C64; 2], b: &[C64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
    match n {
        3 => {
            let uv = ip(u, v);
            let vu = ip(v, u);
            Ok(match model {
                Model::Soler => {
                    let b = IM * 2.0 * (uv + vu);
                    [b, ZERO, b, ZERO]
                }
                Model::Thirring => [IM * 4.0 * vu, ZERO, IM * 4.0 * uv, ZERO],
            })
        }
        2 => {
            let ubu = u[0].norm_sqr() - u[1].norm_sqr();
            Ok([ZERO, IM * ubu, ZERO, ZERO])
        }
        _ => Err(LabError::domain(format!("the cubic (u, v) system is defined for n = 2, 3; got n = {n}"))),
    }
}

/// Pointwise right-hand sides `(B₁v + B₂βu, B₃u + B₄βv)` of the `(u, v)` system.
pub fn soler_thirring_rhs(u: &[C64; 2], v: &[C64; 2], model: Model, n: usize) -> Result<([C64; 2], [C64; 2])> {
    let [b1, b2, b3, b4] = system_coefficients(u, v, model, n)?;
    // β = σ³ for n = 2 and the β-terms vanish for n = 3.
    let bu = [u[0], -u[1]];
    let bv = [v[0], -v[1]];
    let ru = [b1 * v[0] + b2 * bu[0], b1 * v[1] + b2 * bu[1]];
    let rv = [b3 * u[0] + b4 * bv[0], b3 * u[1] + b4 * bv[1]];
    Ok((ru, rv))
}

/// Right-hand side `iγ⁰F(ψ)` of the Hamiltonian form `∂_tψ + α·∇ψ + imγ⁰ψ = iγ⁰F(ψ)`
/// of `−iγ^μ∂_μψ + mψ = F(ψ)`, for a 2-spinor (`n = 2`) or 4-spinor (`n = 3`).
pub fn psi_form_rhs(psi: &[C64], model: Model) -> Result<Vec<C64>> {
    let f = match model {
        Model::Soler => soler_term(psi)?,
        Model::Thirring => thirring_term(psi)?,
    };
    let half = f.len() / 2;
    Ok(f.iter().enumerate().map(|(i, z)| if i < half { IM * z } else { -IM * z }).collect())
}

/// Reassemble the 4-spinor `ψ = (u + v, u − v)` of the `n = 3` reduction.
pub fn assemble_psi(u: &[C64; 2], v: &[C64; 2]) -> [C64; 4] {
    [u[0] + v[0], u[1] + v[1], u[0] - v[0], u[1] - v[1]]
}

/// Split a 4-spinor into `(u, v) = ((a + b)/2, (a − b)/2)` where `ψ = (a, b)`.
pub fn split_psi(psi: &[C64; 4]) -> ([C64; 2], [C64; 2]) {
    ([(psi[0] + psi[2]) * 0.5, (psi[1] + psi[3]) * 0.5], [(psi[0] - psi[2]) * 0.5, (psi[1] - psi[3]) * 0.5])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn projector_examples() {
        let p = projector(&Direction::new(&[1.0, 0.0]).unwrap());
        assert_eq!(p, Mat2::from_rows([[c(0.5, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.5, 0.0)]]));
        let p = projector(&Direction::new(&[0.0, 1.0]).unwrap());
        assert_eq!(p, Mat2::from_rows([[c(0.5, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.5, 0.0)]]));
        assert!(p.is_hermitian());
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(Direction::new(&[1.0, 1.0]).is_err());
        assert!(Direction::new(&[]).is_err());
    }

    #[test]
    fn gamma5_matches_block_form() {
        let g5 = gamma5();
        let mut expected = Mat4::zero();
        for i in 0..2 {
            expected.m[i][i + 2] = ONE;
            expected.m[i + 2][i] = ONE;
        }
        assert_eq!(g5, expected);
    }

    #[test]
    fn gamma_products_used_in_the_reduction() {
        assert_eq!(gamma2(0) * gamma2(1), pauli(1));
        assert_eq!(gamma2(0) * gamma2(2), pauli(2));
    }

    #[test]
    fn anticommutators_exact() {
        assert_eq!(anticommutator_residual(2, 0.0).unwrap(), 0.0);
        assert_eq!(anticommutator_residual(3, 0.0).unwrap(), 0.0);
        assert!(anticommutator_residual(2, 1e-3).unwrap() > 1e-4);
    }

    #[test]
    fn null_structure_trivial_cases() {
        let w = Direction::from_angle(0.3);
        let (norm, theta) = null_structure_bound(&w, &w.neg());
        assert!(norm < 1e-15 && theta < 1e-15);
        let (norm, theta) = null_structure_bound(&w, &w);
        assert!((norm - 1.0).abs() < 1e-15 && (theta - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn zero_spinor_residual() {
        assert_eq!(fierz_check(&[ZERO; 2], 2).unwrap(), 0.0);
        assert!(fierz_check(&[ZERO; 2], 3).is_err());
    }

    #[test]
    fn thirring_n3_orthogonal_example() {
        let e1 = [ONE, ZERO];
        let e2 = [ZERO, ONE];
        let (ru, rv) = soler_thirring_rhs(&e1, &e2, Model::Thirring, 3).unwrap();
        assert_eq!(ru, [ZERO; 2]);
        assert_eq!(rv, [ZERO; 2]);
    }

    #[test]
    fn op_norm_of_diagonal() {
        let a = Mat2::from_rows([[c(3.0, 0.0), ZERO], [ZERO, c(0.0, -2.0)]]);
        assert!((a.op_norm() - 3.0).abs() < 1e-15);
    }
}
