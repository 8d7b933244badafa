//! Vectorized Lindblad dynamics of the dressed qubit.
//!
//! Density matrices are flattened column by column, so index `k` of the
//! vector holds `ρ[k % 2, k / 2]`. Left multiplication `Aρ` becomes
//! `(I ⊗ A)` (block diagonal) and right multiplication `ρA` becomes
//! `(Aᵀ ⊗ I)`.
//!
//! Dressed operators are written in the ordered basis `{|g̃⟩, |ẽ⟩}`; bare
//! operators in `{|g⟩, |e⟩}` with `σz|g⟩ = +|g⟩`.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector4};
use num_complex::Complex64;

use crate::dressed::RateSet;
use crate::error::{Error, Result};
use crate::linalg::{eigen4, expm_series, Eigen4, Mat4, MAX_EIGEN_CONDITION};

pub type Op2 = Matrix2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn pauli_x() -> Op2 {
    Op2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Op2 {
    Op2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Op2 {
    Op2::new(ONE, ZERO, ZERO, -ONE)
}

/// `|0⟩⟨1|`: lowers the second basis state onto the first.
pub fn lowering() -> Op2 {
    Op2::new(ZERO, ONE, ZERO, ZERO)
}

/// `|1⟩⟨0|`.
pub fn raising() -> Op2 {
    Op2::new(ZERO, ZERO, ONE, ZERO)
}

/// Columns are `|g̃⟩` and `|ẽ⟩` in the bare basis.
pub fn dressed_to_bare(theta: f64) -> Op2 {
    let (s, c) = theta.sin_cos();
    Op2::new(real(c), real(s), real(-s), real(c))
}

/// Lab-frame σz seen in the dressed basis: `cos2θ σ̃z + sin2θ σ̃x`.
pub fn lab_sigma_z(theta: f64) -> Op2 {
    let (s2, c2) = (2.0 * theta).sin_cos();
    Op2::new(real(c2), real(s2), real(s2), real(-c2))
}

/// Lab-frame σx seen in the dressed basis: `cos2θ σ̃x − sin2θ σ̃z`.
pub fn lab_sigma_x(theta: f64) -> Op2 {
    let (s2, c2) = (2.0 * theta).sin_cos();
    Op2::new(real(-s2), real(c2), real(c2), real(s2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `{|g̃⟩, |ẽ⟩}`
    Dressed,
    /// `{|g⟩, |e⟩}`
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: Op2,
    basis: Basis,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian and unit trace within 1e−10,
    /// eigenvalues ≥ −1e−9.
    pub fn new(matrix: Op2, basis: Basis) -> Result<Self> {
        let rho = Self { matrix, basis };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(matrix: Op2, basis: Basis) -> Self {
        Self { matrix, basis }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if m.iter().any(|z| !z.is_finite()) {
            return Err(Error::Numerical("density matrix has non-finite entries".into()));
        }
        let herm = (m - m.adjoint()).norm();
        if herm > 1e-10 {
            return Err(Error::Numerical(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::Numerical(format!("density matrix trace {tr} != 1")));
        }
        let lo = self.eigenvalues()[0];
        if lo < -1e-9 {
            return Err(Error::Numerical(format!("density matrix eigenvalue {lo:e} < 0")));
        }
        Ok(())
    }

    /// `|ψ⟩⟨ψ|` for normalized amplitudes.
    pub fn pure(amplitudes: [Complex64; 2], basis: Basis) -> Result<Self> {
        let n = (amplitudes[0].norm_sqr() + amplitudes[1].norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v = nalgebra::Vector2::new(amplitudes[0] / n, amplitudes[1] / n);
        Self::new(v * v.adjoint(), basis)
    }

    /// First basis state (`|g̃⟩` or `|g⟩`).
    pub fn ground(basis: Basis) -> Self {
        Self::new_unchecked(Op2::new(ONE, ZERO, ZERO, ZERO), basis)
    }

    /// Second basis state (`|ẽ⟩` or `|e⟩`).
    pub fn excited(basis: Basis) -> Self {
        Self::new_unchecked(Op2::new(ZERO, ZERO, ZERO, ONE), basis)
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        Self::new_unchecked(Op2::identity() * real(0.5), basis)
    }

    /// `(I + r·σ)/2` in `basis`.
    pub fn from_bloch(r: BlochVector, basis: Basis) -> Self {
        let m = (Op2::identity() + pauli_x() * real(r.x) + pauli_y() * real(r.y) + pauli_z() * real(r.z))
            * real(0.5);
        Self::new_unchecked(m, basis)
    }

    pub fn matrix(&self) -> &Op2 {
        &self.matrix
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Column-stacked vector.
    pub fn to_vec(&self) -> Vector4<Complex64> {
        let m = &self.matrix;
        Vector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
    }

    pub fn from_vec(v: &Vector4<Complex64>, basis: Basis) -> Self {
        Self::new_unchecked(unvec(v), basis)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = &self.matrix;
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (self.matrix - other.matrix).norm()
    }

    /// Pauli expectations in this state's own basis.
    pub fn bloch(&self) -> BlochVector {
        BlochVector {
            x: (pauli_x() * self.matrix).trace().re,
            y: (pauli_y() * self.matrix).trace().re,
            z: (pauli_z() * self.matrix).trace().re,
        }
    }

    /// Re-expresses a dressed state in the bare basis for mixing angle `theta`.
    pub fn to_bare(&self, theta: f64) -> DensityMatrix {
        match self.basis {
            Basis::Bare => *self,
            Basis::Dressed => {
                let r = dressed_to_bare(theta);
                Self::new_unchecked(r * self.matrix * r.adjoint(), Basis::Bare)
            }
        }
    }

    pub fn to_dressed(&self, theta: f64) -> DensityMatrix {
        match self.basis {
            Basis::Dressed => *self,
            Basis::Bare => {
                let r = dressed_to_bare(theta);
                Self::new_unchecked(r.adjoint() * self.matrix * r, Basis::Dressed)
            }
        }
    }
}

fn unvec(v: &Vector4<Complex64>) -> Op2 {
    Op2::new(v[0], v[2], v[1], v[3])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_physical(&self) -> bool {
        self.x * self.x + self.y * self.y + self.z * self.z <= 1.0 + 1e-9
    }

    /// Rotates the equatorial components by `phase` about Z.
    pub fn rotate_z(&self, phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
            z: self.z,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// `vec(Aρ) = embed_left(A) vec(ρ)`; block diagonal `I ⊗ A`.
pub fn embed_left(a: &Op2) -> Mat4 {
    let mut m = Mat4::zeros();
    for blk in 0..2 {
        for r in 0..2 {
            for c in 0..2 {
                m[(2 * blk + r, 2 * blk + c)] = a[(r, c)];
            }
        }
    }
    m
}

/// `vec(ρA) = embed_right(A) vec(ρ)`; `Aᵀ ⊗ I`.
pub fn embed_right(a: &Op2) -> Mat4 {
    let mut m = Mat4::zeros();
    for r in 0..2 {
        for c in 0..2 {
            for k in 0..2 {
                m[(2 * r + k, 2 * c + k)] = a[(c, r)];
            }
        }
    }
    m
}

/// Standard dissipator `D[L]ρ = LρL† − ½{L†L, ρ}` as a superoperator.
pub fn dissipator(l: &Op2) -> Mat4 {
    let ld = l.adjoint();
    let ldl = ld * l;
    embed_left(l) * embed_right(&ld) - (embed_left(&ldl) + embed_right(&ldl)) * real(0.5)
}

/// `ρ ↦ −i[H, ρ]`.
pub fn commutator(h: &Op2) -> Mat4 {
    (embed_left(h) - embed_right(h)) * (-I)
}

/// How lab-frame pure dephasing enters the dressed-frame generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabDephasing {
    /// `γφ/2 · (cos²2θ D[σ̃z] + sin²2θ (D[σ̃₊] + D[σ̃₋]))`: the lab σz dissipator
    /// with terms oscillating at Ω_R averaged away, as for the bath channels.
    #[default]
    Secular,
    /// `γφ/2 · D[cos2θ σ̃z + sin2θ σ̃x]` with no averaging.
    Full,
}

/// Generator of the dressed-basis master equation, acting on column-stacked ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    matrix: Mat4,
    basis: Basis,
}

impl Liouvillian {
    pub fn from_matrix(matrix: Mat4, basis: Basis) -> Self {
        Self { matrix, basis }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Op2 {
        unvec(&(self.matrix * rho.to_vec()))
    }

    /// `max |Tr(L E_ij)|` over the matrix units `E_ij`.
    pub fn trace_residual(&self) -> f64 {
        (0..4)
            .map(|k| (self.matrix[(0, k)] + self.matrix[(3, k)]).norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Result<[Complex64; 4]> {
        Ok(eigen4(&self.matrix)?.values)
    }
}

pub fn build_liouvillian(rates: &RateSet) -> Result<Liouvillian> {
    build_liouvillian_with(rates, LabDephasing::default())
}

/// Dressed Hamiltonian `Ω_R/2 (|ẽ⟩⟨ẽ| − |g̃⟩⟨g̃|)` plus the dissipators
/// `γ₋ sin⁴θ D[σ̃₊]`, `γ₊ cos⁴θ D[σ̃₋]`, `γ₀ sin²θ cos²θ D[σ̃z]` and lab dephasing.
///
/// Time is in μs, so Ω_R (Hz) enters as `2π Ω_R · 1e−6` rad/μs.
pub fn build_liouvillian_with(rates: &RateSet, dephasing: LabDephasing) -> Result<Liouvillian> {
    rates.validate()?;
    let (s, c) = rates.theta.sin_cos();
    let omega_r = TAU * rates.omega_r * 1e-6;
    let h = Op2::new(real(-0.5 * omega_r), ZERO, ZERO, real(0.5 * omega_r));
    let mut l = commutator(&h);

    let channels = [
        (rates.gamma_minus * s.powi(4), raising()),
        (rates.gamma_plus * c.powi(4), lowering()),
        (rates.gamma_0 * s * s * c * c, pauli_z()),
    ];
    for (rate, op) in channels {
        if rate > 0.0 {
            l += dissipator(&op) * real(rate);
        }
    }

    let half_phi = 0.5 * rates.gamma_phi;
    if half_phi > 0.0 {
        match dephasing {
            LabDephasing::Full => l += dissipator(&lab_sigma_z(rates.theta)) * real(half_phi),
            LabDephasing::Secular => {
                let (s2, c2) = (2.0 * rates.theta).sin_cos();
                l += dissipator(&pauli_z()) * real(half_phi * c2 * c2);
                l += (dissipator(&raising()) + dissipator(&lowering())) * real(half_phi * s2 * s2);
            }
        }
    }
    Ok(Liouvillian {
        matrix: l,
        basis: Basis::Dressed,
    })
}

/// Precomputed `exp(L t)` for repeated propagation under one generator.
#[derive(Debug, Clone)]
pub struct Propagator {
    liouvillian: Liouvillian,
    eigen: Option<(Eigen4, Mat4)>,
}

impl Propagator {
    /// Uses the eigendecomposition when its eigenvectors are well conditioned
    /// (condition ≤ 1e8), otherwise the scaling-and-squaring series.
    pub fn new(l: &Liouvillian) -> Result<Self> {
        let eigen = match eigen4(l.matrix()) {
            Ok(e) if e.condition <= MAX_EIGEN_CONDITION => {
                let inv = e.inverse.expect("finite condition implies inverse");
                Some((e, inv))
            }
            Ok(e) => {
                log::debug!("eigenvector condition {:e}; using series exponential", e.condition);
                None
            }
            Err(err) => {
                log::debug!("eigendecomposition failed ({err}); using series exponential");
                None
            }
        };
        Ok(Self {
            liouvillian: l.clone(),
            eigen,
        })
    }

    pub fn uses_eigendecomposition(&self) -> bool {
        self.eigen.is_some()
    }

    /// `exp(L t)` with `t` in μs.
    pub fn superoperator(&self, t: f64) -> Result<Mat4> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
        }
        match &self.eigen {
            Some((e, inv)) => {
                let mut scaled = e.vectors;
                for (k, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= (e.values[k] * t).exp();
                }
                Ok(scaled * inv)
            }
            None => expm_series(&(self.liouvillian.matrix() * real(t))).map_err(|err| {
                Error::Numerical(format!(
                    "generator not diagonalizable within tolerance and {err}"
                ))
            }),
        }
    }

    pub fn propagate(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if rho0.basis() != self.liouvillian.basis() {
            return Err(Error::InvalidParameter(
                "state and generator are in different bases".into(),
            ));
        }
        if t == 0.0 {
            return Ok(*rho0);
        }
        let v = self.superoperator(t)? * rho0.to_vec();
        Ok(DensityMatrix::from_vec(&v, rho0.basis()))
    }
}

/// `vec ρ(t) = exp(L t) vec ρ(0)`, `t` in μs.
pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    Propagator::new(l)?.propagate(rho0, t)
}

/// Relative size below which an eigenvalue counts as stationary.
pub const STEADY_STATE_THRESHOLD: f64 = 1e-8;

/// Null eigenvector of `L`, reshaped, trace-normalized and Hermitized.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let e = eigen4(l.matrix())?;
    let mags = e.values.map(|v| v.norm());
    let largest = mags.iter().cloned().fold(0.0, f64::max);
    let threshold = STEADY_STATE_THRESHOLD * largest;
    let below = mags.iter().filter(|&&m| m <= threshold).count();
    if below > 1 {
        return Err(Error::AmbiguousSteadyState { count: below, threshold });
    }
    let (k, &smallest) = mags
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("four eigenvalues");
    if smallest > threshold {
        return Err(Error::NoSteadyState { smallest, threshold });
    }
    let v: Vector4<Complex64> = e.vectors.column(k).into_owned();
    let tr = v[0] + v[3];
    if tr.norm() < 1e-12 * v.norm() {
        return Err(Error::Numerical("stationary eigenvector is traceless".into()));
    }
    let m = unvec(&v) / tr;
    let m = (m + m.adjoint()) * real(0.5);
    Ok(DensityMatrix::new_unchecked(m, l.basis()))
}

/// Bloch vector in the frame rotating with the drive, from a dressed state.
///
/// Uses `σx = cos2θ σ̃x − sin2θ σ̃z`, `σy = σ̃y`, `σz = sin2θ σ̃x + cos2θ σ̃z`,
/// with `σ̃z = |g̃⟩⟨g̃| − |ẽ⟩⟨ẽ|` so that θ = 0 maps `|g̃⟩` to `+Z`.
pub fn lab_frame_bloch(rho: &DensityMatrix, theta: f64) -> BlochVector {
    let m = rho.matrix();
    BlochVector {
        x: (lab_sigma_x(theta) * m).trace().re,
        y: (pauli_y() * m).trace().re,
        z: (lab_sigma_z(theta) * m).trace().re,
    }
}
