//! Two-qubit polarization state algebra on the ordered basis (HH, HV, VH, VV).
//!
//! Bloch-sphere convention for a single polarization qubit:
//! `+z ↔ |H⟩`, `+x ↔ |+⟩ = (|H⟩+|V⟩)/√2`, `+y ↔ |R⟩ = (|H⟩+i|V⟩)/√2`,
//! so the `z`–`x` great circle is the linear-polarization circle and `±y`
//! are the circular states. A measurement basis is the antipodal pair `±n`
//! of a unit Bloch vector with projectors `Π± = (I ± n·σ)/2`.
//!
//! The emitted-pair target state is `|Φ^φ⟩ = (|HH⟩ + e^{iφ}|VV⟩)/√2`; its
//! correlation tensor in this convention is `diag(+1, −1, +1)` at `φ = 0`.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{Complex, Matrix2, Matrix4, Vector2, Vector4};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Single-qubit operator / Jones matrix.
pub type Mat2 = Matrix2<C64>;
/// Two-qubit operator on (HH, HV, VH, VV).
pub type Mat4 = Matrix4<C64>;
/// Single-qubit state vector.
pub type Ket2 = Vector2<C64>;
/// Two-qubit state vector on (HH, HV, VH, VV).
pub type Ket4 = Vector4<C64>;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Hermiticity / unit-trace tolerance for exact-arithmetic density matrices.
pub const STATE_TOL: f64 = 1e-10;
/// How far below zero an eigenvalue of a valid density matrix may round off.
pub const EIGENVALUE_TOL: f64 = -1e-9;
/// Eigenvalue slack for matrices tabulated with four-decimal entries.
pub const TABULATED_EIGENVALUE_TOL: f64 = -2e-3;
/// Trace slack for matrices tabulated with four-decimal entries.
pub const TABULATED_TRACE_TOL: f64 = 2e-2;

// ---------------------------------------------------------------------------
// Bloch vectors and measurement bases
// ---------------------------------------------------------------------------

/// Unit vector on the single-qubit Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// `+x ↔ |+⟩` (diagonal linear polarization).
    pub const X: BlochVector = BlochVector {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    /// `+y ↔ |R⟩` (right circular polarization).
    pub const Y: BlochVector = BlochVector {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    /// `+z ↔ |H⟩` (horizontal polarization).
    pub const Z: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Build from components that are already unit length (within `1e-6`).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > 1e-6 {
            return Err(Error::invalid_argument(format!(
                "Bloch vector ({x}, {y}, {z}) has norm {n}, expected 1"
            )));
        }
        Ok(BlochVector { x, y, z })
    }

    /// Rescale arbitrary nonzero components onto the unit sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::invalid_argument(
                "cannot normalize a null Bloch vector".to_string(),
            ));
        }
        Ok(BlochVector {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn dot(self, other: BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl std::ops::Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// One analyzer basis: the antipodal Bloch pair `±axis`, tagged with a label
/// that survives into count records and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub axis: BlochVector,
    pub label: String,
}

impl MeasurementBasis {
    pub fn new(label: impl Into<String>, axis: BlochVector) -> Self {
        MeasurementBasis {
            axis,
            label: label.into(),
        }
    }

    /// Projector onto the `+axis` outcome.
    pub fn projector_plus(&self) -> Mat2 {
        projector_from_bloch(self.axis)
    }

    /// Projector onto the `−axis` outcome.
    pub fn projector_minus(&self) -> Mat2 {
        projector_from_bloch(-self.axis)
    }
}

// ---------------------------------------------------------------------------
// Pauli algebra and elementary constructions
// ---------------------------------------------------------------------------

pub fn sigma_x() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// `n·σ` for a Bloch vector `n`.
pub fn pauli_dot(n: BlochVector) -> Mat2 {
    sigma_x() * c(n.x, 0.0) + sigma_y() * c(n.y, 0.0) + sigma_z() * c(n.z, 0.0)
}

/// Rank-1 projector `(I + n·σ)/2` onto the `+n` Bloch direction.
pub fn projector_from_bloch(n: BlochVector) -> Mat2 {
    (Mat2::identity() + pauli_dot(n)) * c(0.5, 0.0)
}

/// Kronecker product on the (HH, HV, VH, VV) ordering: qubit A is the left
/// (first) factor, so `(A ⊗ B)[2i+k, 2j+l] = A[i,j]·B[k,l]`.
pub fn tensor_product(a: &Mat2, b: &Mat2) -> Mat4 {
    let k = a.kronecker(b);
    Mat4::from_iterator(k.iter().cloned())
}

/// Pure single-qubit state with Bloch vector `n`.
pub fn ket_from_bloch(n: BlochVector) -> Ket2 {
    // θ is the polar angle from +z, φ_a the azimuth from +x toward +y.
    let theta = n.z.clamp(-1.0, 1.0).acos();
    let phase = n.y.atan2(n.x);
    Ket2::new(
        c((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phase),
    )
}

/// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a single-qubit pure state.
pub fn bloch_from_ket(psi: &Ket2) -> Result<BlochVector> {
    let n2 = psi.dotc(psi).re;
    if n2 < 1e-12 {
        return Err(Error::invalid_argument(
            "null ket has no Bloch vector".to_string(),
        ));
    }
    let expect = |op: Mat2| (psi.adjoint() * op * psi)[(0, 0)].re / n2;
    BlochVector::normalized(expect(sigma_x()), expect(sigma_y()), expect(sigma_z()))
}

/// The phase-tagged maximally entangled pair `(|HH⟩ + e^{iφ}|VV⟩)/√2`.
pub fn phi_state(phase_rad: f64) -> Ket4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ket4::new(
        c(s, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        C64::from_polar(s, phase_rad),
    )
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// Validated two-qubit density matrix: Hermitian, unit trace, positive
/// semidefinite (within the documented tolerances).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Mat4,
}

impl DensityMatrix {
    /// Strictly validated constructor for exact-arithmetic matrices:
    /// Hermitian and unit-trace within `1e-10`, eigenvalues `≥ −1e-9`.
    pub fn new(m: Mat4) -> Result<Self> {
        let dm = DensityMatrix { m };
        dm.validate()?;
        Ok(dm)
    }

    /// Constructor for callers that guarantee validity by construction
    /// (e.g. `L·L†/tr` parameterizations); skips the eigenvalue check.
    pub(crate) fn new_unchecked(m: Mat4) -> Self {
        DensityMatrix { m }
    }

    /// `|ψ⟩⟨ψ|` for a normalizable two-qubit ket.
    pub fn from_pure(psi: &Ket4) -> Result<Self> {
        let n2 = psi.dotc(psi).re;
        if n2 < 1e-12 {
            return Err(Error::invalid_argument(
                "cannot build a state from a null ket".to_string(),
            ));
        }
        let normalized = psi / c(n2.sqrt(), 0.0);
        Ok(DensityMatrix::new_unchecked(
            normalized * normalized.adjoint(),
        ))
    }

    /// `I/4`.
    pub fn maximally_mixed() -> Self {
        DensityMatrix::new_unchecked(Mat4::identity() * c(0.25, 0.0))
    }

    /// Lenient constructor for matrices transcribed from tables with
    /// four-decimal entries: symmetrizes to the nearest Hermitian matrix,
    /// renormalizes the trace, and allows eigenvalues down to `−2e-3`.
    pub fn from_tabulated(re: &[[f64; 4]; 4], im: &[[f64; 4]; 4]) -> Result<Self> {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = c(re[i][j], im[i][j]);
            }
        }
        let asym = (m - m.adjoint())
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        if asym > 2e-3 {
            return Err(Error::invalid_state(format!(
                "tabulated matrix is not Hermitian within rounding (asymmetry {asym:.2e})"
            )));
        }
        m = (m + m.adjoint()) * c(0.5, 0.0);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > TABULATED_TRACE_TOL {
            return Err(Error::invalid_state(format!(
                "tabulated matrix has trace {tr}, too far from 1 to renormalize"
            )));
        }
        m /= c(tr, 0.0);
        let dm = DensityMatrix { m };
        let min_eig = dm.eigenvalues()[0];
        if min_eig < TABULATED_EIGENVALUE_TOL {
            return Err(Error::invalid_state(format!(
                "tabulated matrix has eigenvalue {min_eig:.2e}, below rounding tolerance"
            )));
        }
        Ok(dm)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    /// Check Hermiticity (`1e-10`), unit trace (`1e-10`), and positivity
    /// (eigenvalues `≥ −1e-9`).
    pub fn validate(&self) -> Result<()> {
        let asym = (self.m - self.m.adjoint())
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        if asym > STATE_TOL {
            return Err(Error::invalid_state(format!(
                "matrix is not Hermitian (max asymmetry {asym:.2e})"
            )));
        }
        let tr = self.m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::invalid_state(format!("trace is {tr}, expected 1")));
        }
        let min_eig = self.eigenvalues()[0];
        if min_eig < EIGENVALUE_TOL {
            return Err(Error::invalid_state(format!(
                "negative eigenvalue {min_eig:.2e}"
            )));
        }
        Ok(())
    }

    /// Eigenvalues in ascending order (real, since the matrix is Hermitian).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let se = SymmetricEigen::new(hermitian_part(&self.m));
        let mut v = [
            se.eigenvalues[0],
            se.eigenvalues[1],
            se.eigenvalues[2],
            se.eigenvalues[3],
        ];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    re: [[f64; 4]; 4],
    im: [[f64; 4]; 4],
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                re[i][j] = self.m[(i, j)].re;
                im[i][j] = self.m[(i, j)].im;
            }
        }
        DensityMatrixJson { re, im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = DensityMatrixJson::deserialize(deserializer)?;
        DensityMatrix::from_tabulated(&raw.re, &raw.im).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Measurement statistics
// ---------------------------------------------------------------------------

/// Probability that both analyzers fire on their `+` ports:
/// `Tr[ρ (Π_na ⊗ Π_nb)]`, clamped to `[0, 1]`.
pub fn coincidence_probability(rho: &DensityMatrix, na: BlochVector, nb: BlochVector) -> f64 {
    let proj = tensor_product(&projector_from_bloch(na), &projector_from_bloch(nb));
    let p = (rho.matrix() * proj).trace();
    debug_assert!(p.im.abs() < 1e-9, "projector expectation should be real");
    p.re.clamp(0.0, 1.0)
}

/// Two-basis correlation
/// `E(â, b̂) = P(a,b) + P(a⊥,b⊥) − P(a⊥,b) − P(a,b⊥)`,
/// which for exact probabilities equals `Tr[ρ (â·σ ⊗ b̂·σ)]`.
pub fn correlation_expectation(
    rho: &DensityMatrix,
    a: &MeasurementBasis,
    b: &MeasurementBasis,
) -> f64 {
    let pp = coincidence_probability(rho, a.axis, b.axis);
    let mm = coincidence_probability(rho, -a.axis, -b.axis);
    let mp = coincidence_probability(rho, -a.axis, b.axis);
    let pm = coincidence_probability(rho, a.axis, -b.axis);
    pp + mm - mp - pm
}

// ---------------------------------------------------------------------------
// Entanglement measures
// ---------------------------------------------------------------------------

fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * c(0.5, 0.0)
}

fn hermitian_eigensystem(m: &Mat4) -> (Vector4<f64>, Mat4) {
    let se = SymmetricEigen::new(hermitian_part(m));
    (se.eigenvalues, se.eigenvectors)
}

/// Square roots of the eigenvalues of a Hermitian PSD matrix, unsorted.
/// Eigenvalues within round-off of zero (relative to the largest) are
/// treated as exactly zero: feeding them to `sqrt` unfloored would turn
/// `O(ε)` spectral noise into `O(√ε)` errors in every derived quantity.
fn psd_eigen_roots(vals: &Vector4<f64>) -> [f64; 4] {
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let floor = max * 1e-12;
    let mut roots = [0.0; 4];
    for (r, &v) in roots.iter_mut().zip(vals.iter()) {
        *r = if v <= floor { 0.0 } else { v.sqrt() };
    }
    roots
}

/// Hermitian square root with negative eigenvalues clamped to zero.
fn sqrtm_psd(m: &Mat4) -> Mat4 {
    let (vals, vecs) = hermitian_eigensystem(m);
    let roots = psd_eigen_roots(&vals);
    let d = Mat4::from_diagonal(&Vector4::from_iterator(roots.iter().map(|&r| c(r, 0.0))));
    vecs * d * vecs.adjoint()
}

/// Wootters concurrence.
///
/// With `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`, the concurrence is
/// `C = max(0, λ1 − λ2 − λ3 − λ4)` where `λi` are the decreasing square
/// roots of the eigenvalues of `ρρ̃`. Those eigenvalues are computed here as
/// the (real, non-negative) spectrum of the Hermitian matrix `√ρ ρ̃ √ρ`,
/// which is similar to `ρρ̃` but numerically far better behaved.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let syy = tensor_product(&sigma_y(), &sigma_y());
    let m = rho.matrix();
    let tilde = syy * m.conjugate() * syy;
    let sr = sqrtm_psd(m);
    let (vals, _) = hermitian_eigensystem(&(sr * tilde * sr));
    let mut lam = psd_eigen_roots(&vals);
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

/// Tangle `𝒯 = C²`.
pub fn tangle(rho: &DensityMatrix) -> f64 {
    let cc = concurrence(rho);
    cc * cc
}

/// Overlap `⟨ψ|ρ|ψ⟩` with a normalized pure target.
pub fn fidelity(rho: &DensityMatrix, psi: &Ket4) -> Result<f64> {
    let n = psi.dotc(psi).re;
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::invalid_argument(format!(
            "fidelity target must be normalized (|ψ|² = {n})"
        )));
    }
    Ok((psi.adjoint() * rho.matrix() * psi)[(0, 0)]
        .re
        .clamp(0.0, 1.0))
}

/// Uhlmann fidelity `F(ρ, σ) = (Tr √(√ρ σ √ρ))²` between mixed states,
/// computed as the squared trace norm `(Σᵢ sᵢ)²` of `√ρ √σ`. The singular
/// values `sᵢ` carry absolute round-off error, whereas eigenvalues of the
/// sandwiched product carry it on their squares — which would corrupt the
/// contribution of small-but-genuine eigenvalues.
pub fn fidelity_mixed(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let product = sqrtm_psd(a.matrix()) * sqrtm_psd(b.matrix());
    let sv = product.singular_values();
    let root_sum: f64 = sv.iter().sum();
    (root_sum * root_sum).clamp(0.0, 1.0)
}

/// Trace distance `½ Tr|ρ − σ|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let (vals, _) = hermitian_eigensystem(&(a.matrix() - b.matrix()));
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}
