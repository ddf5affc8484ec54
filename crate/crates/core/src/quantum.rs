//! Quantum states, Bloch vectors and POVMs.
//!
//! Pauli convention: `|0⟩` is the +1 eigenvector of `σ_z`, and a qubit state
//! is `½(1 + n·σ)` with `n_i = tr(ρ σ_i)`.

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Accepted negative eigenvalue, Hermiticity defect and trace defect.
pub const PSD_TOL: f64 = 1e-9;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn paulis() -> [ComplexMatrix; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidState("non-finite entry".into()))
    }
}

/// Density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    matrix: ComplexMatrix,
}

impl QuantumState {
    /// Validates and stores the Hermitian part of `m`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::EmptyInput);
        }
        check_finite(&m)?;
        if !linalg::is_hermitian(&m, PSD_TOL) {
            return Err(Error::InvalidState("matrix is not Hermitian".into()));
        }
        let h = linalg::hermitian_part(&m);
        let tr = linalg::trace(&h).re;
        if (tr - 1.0).abs() > PSD_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (values, _) = linalg::hermitian_eigen(&h);
        if let Some(&min) = values.first() {
            if min < -PSD_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(Self { matrix: h })
    }

    /// Pure state `|ψ⟩⟨ψ|` from an unnormalized ket.
    pub fn from_ket(ket: &DVector<Complex64>) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite ket".into()));
        }
        let v = ket.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let m = linalg::complex_identity(d).unscale(d as f64);
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// Largest eigenvalue, which is the operator norm of a state.
    pub fn max_eigenvalue(&self) -> f64 {
        let (values, _) = linalg::hermitian_eigen(&self.matrix);
        values.last().copied().unwrap_or(0.0)
    }

    /// Transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self { matrix: self.matrix.transpose() }
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Ok(Self { matrix: linalg::hermitian_part(&(u * &self.matrix * u.adjoint())) })
    }

    /// `(1−p) ρ + p·1/d`.
    pub fn depolarize(&self, p: f64) -> Self {
        let d = self.dim();
        let id = linalg::complex_identity(d).unscale(d as f64);
        Self { matrix: self.matrix.scale(1.0 - p) + id.scale(p) }
    }
}

/// Real 3-vector of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(pub [f64; 3]);

impl BlochVector {
    /// Checked constructor; the norm may exceed 1 by at most `PSD_TOL`.
    pub fn new(components: [f64; 3]) -> Result<Self> {
        if components.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite Bloch component".into()));
        }
        let v = Self(components);
        let n = v.norm();
        if n > 1.0 + PSD_TOL {
            return Err(Error::BlochOutOfBall(n));
        }
        Ok(v)
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::from(self.0)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self([v.x, v.y, v.z])
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.as_vector().dot(&other.as_vector())
    }

    /// The antipodal vector, i.e. the orthogonal pure state.
    pub fn negated(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

pub fn bloch_from_state(r: &QuantumState) -> Result<BlochVector> {
    if r.dim() != 2 {
        return Err(Error::NotQubit(r.dim()));
    }
    let m = r.matrix();
    let n = paulis().map(|s| linalg::trace_product(m, &s).re);
    Ok(BlochVector(n))
}

pub fn state_from_bloch(n: &BlochVector) -> Result<QuantumState> {
    let n = BlochVector::new(n.0)?;
    let half = Complex64::new(0.5, 0.0);
    let [x, y, z] = n.0;
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            half * (1.0 + z),
            half * Complex64::new(x, -y),
            half * Complex64::new(x, y),
            half * (1.0 - z),
        ],
    );
    Ok(QuantumState { matrix: m })
}

/// Ordered list of effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let first = effects.first().ok_or(Error::EmptyInput)?;
        let d = first.nrows();
        let mut sum = ComplexMatrix::zeros(d, d);
        let mut out = Vec::with_capacity(effects.len());
        for (b, e) in effects.into_iter().enumerate() {
            if !e.is_square() || e.nrows() != d {
                return Err(Error::InvalidPovm(format!("effect {b} has wrong shape")));
            }
            if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidPovm(format!("effect {b} has non-finite entries")));
            }
            if !linalg::is_hermitian(&e, PSD_TOL) {
                return Err(Error::InvalidPovm(format!("effect {b} is not Hermitian")));
            }
            let h = linalg::hermitian_part(&e);
            let (values, _) = linalg::hermitian_eigen(&h);
            if values[0] < -PSD_TOL {
                return Err(Error::InvalidPovm(format!(
                    "effect {b} has negative eigenvalue {:e}",
                    values[0]
                )));
            }
            sum += &h;
            out.push(h);
        }
        let defect = (sum - linalg::complex_identity(d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > PSD_TOL.max(1e-8) {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {defect:e}")));
        }
        Ok(Self { effects: out })
    }

    /// Projective measurement onto the given states.
    pub fn from_states(states: &[QuantumState]) -> Result<Self> {
        Self::new(states.iter().map(|s| s.matrix().clone()).collect())
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, b: usize) -> &ComplexMatrix {
        &self.effects[b]
    }

    /// Born probability `tr(ρ E_b)`.
    pub fn probability(&self, r: &QuantumState, b: usize) -> f64 {
        linalg::trace_product(r.matrix(), &self.effects[b]).re
    }

    pub fn transpose(&self) -> Self {
        Self { effects: self.effects.iter().map(|e| e.transpose()).collect() }
    }

    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Ok(Self {
            effects: self
                .effects
                .iter()
                .map(|e| linalg::hermitian_part(&(u * e * u.adjoint())))
                .collect(),
        })
    }

    /// `E_b → (1−p) E_b + (p/m)·1` with `m` outcomes.
    pub fn smear(&self, p: f64) -> Self {
        let d = self.dim();
        let m = self.outcomes() as f64;
        let id = linalg::complex_identity(d).scale(p / m);
        Self { effects: self.effects.iter().map(|e| e.scale(1.0 - p) + &id).collect() }
    }
}

fn check_same_dim(r1: &QuantumState, r2: &QuantumState) -> Result<()> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch { expected: r1.dim(), found: r2.dim() });
    }
    Ok(())
}

/// `½‖r1 − r2‖₁`.
pub fn trace_distance(r1: &QuantumState, r2: &QuantumState) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let diff = r1.matrix() - r2.matrix();
    let (values, _) = linalg::hermitian_eigen(&diff);
    Ok((0.5 * values.iter().map(|l| l.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// `tr(r1 r2)`.
pub fn fidelity_linear(r1: &QuantumState, r2: &QuantumState) -> Result<f64> {
    check_same_dim(r1, r2)?;
    Ok(linalg::trace_product(r1.matrix(), r2.matrix()).re)
}
