//! Best orthogonal alignment between target and experimental qubit
//! realizations, its unitary form, and the Procrustes fidelity bound.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernels::{f_m, purity_deficit};
use crate::linalg::{self, numerical_rank, pseudo_inverse_tall, ComplexMatrix, MatrixNorms, RealMatrix};
use crate::overlap::QUBIT_EPS_MAX;
use crate::quantum::{bloch_from_state, paulis, QuantumState};
use crate::scenario::{ExperimentalRealization, PmScenario};

/// Orthogonality and determinant tolerance for rotation inputs.
pub const ROTATION_TOL: f64 = 1e-8;

/// Relative singular value below which a configuration counts as planar and
/// a proper rotation is preferred.
const PLANAR_TOL: f64 = 1e-10;

/// Sign flip of the y axis: transposition in Bloch coordinates.
pub fn transposition_reflection() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0))
}

/// Orthogonal map `O` sending experimental Bloch vectors onto the targets,
/// factored as a rotation `R` possibly preceded by transposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment {
    #[serde(serialize_with = "ser_mat3")]
    pub orthogonal: Matrix3<f64>,
    #[serde(serialize_with = "ser_mat3")]
    pub rotation: Matrix3<f64>,
    #[serde(serialize_with = "ser_unitary")]
    pub unitary: ComplexMatrix,
    pub transposed: bool,
    /// `(Σ|x_i − O y_i|²)^½`.
    pub residual: f64,
    /// Mean of `½(1 + x_i·O y_i)` over the aligned vectors.
    pub achieved_avg_fidelity: f64,
}

fn ser_mat3<S: Serializer>(m: &Matrix3<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<[f64; 3]> = (0..3).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)]]).collect();
    rows.serialize(s)
}

fn ser_unitary<S: Serializer>(u: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let entries: Vec<[f64; 2]> =
        (0..u.nrows()).flat_map(|i| (0..u.ncols()).map(move |j| (i, j))).map(|(i, j)| [u[(i, j)].re, u[(i, j)].im]).collect();
    entries.serialize(s)
}

impl Alignment {
    /// Applies the alignment to an experimental state: `U ρ^(T) U†`.
    pub fn apply_state(&self, r: &QuantumState) -> Result<QuantumState> {
        let r = if self.transposed { r.transpose() } else { r.clone() };
        r.conjugate_by(&self.unitary)
    }

    /// Applies the alignment to an operator such as an effect.
    pub fn apply_operator(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let m = if self.transposed { m.transpose() } else { m.clone() };
        linalg::hermitian_part(&(&self.unitary * m * self.unitary.adjoint()))
    }
}

/// Orthogonal `O` maximizing `Σ x_i·O y_i` (equivalently minimizing
/// `Σ|x_i − O y_i|²`) over the full orthogonal group.
pub fn optimal_orthogonal(target: &[Vector3<f64>], experimental: &[Vector3<f64>]) -> Result<Matrix3<f64>> {
    if target.is_empty() {
        return Err(Error::EmptyInput);
    }
    if target.len() != experimental.len() {
        return Err(Error::DimensionMismatch { expected: target.len(), found: experimental.len() });
    }
    let h: Matrix3<f64> = target.iter().zip(experimental).map(|(x, y)| x * y.transpose()).sum();
    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut o = u * v_t;
    let smax = svd.singular_values.max();
    let (imin, smin) = svd.singular_values.argmin();
    if o.determinant() < 0.0 && smin <= PLANAR_TOL * smax.max(1e-300) {
        // the weakest direction carries no signal: flip it to get a rotation
        let mut flip = Matrix3::identity();
        flip[(imin, imin)] = -1.0;
        o = u * flip * v_t;
    }
    Ok(o)
}

/// Procrustes alignment of experimental onto target Bloch vectors.
pub fn procrustes_align(target: &[[f64; 3]], experimental: &[[f64; 3]]) -> Result<Alignment> {
    let xs: Vec<Vector3<f64>> = target.iter().map(|v| Vector3::from(*v)).collect();
    let ys: Vec<Vector3<f64>> = experimental.iter().map(|v| Vector3::from(*v)).collect();
    let o = optimal_orthogonal(&xs, &ys)?;
    alignment_from_orthogonal(o, &xs, &ys)
}

fn alignment_from_orthogonal(o: Matrix3<f64>, xs: &[Vector3<f64>], ys: &[Vector3<f64>]) -> Result<Alignment> {
    let transposed = o.determinant() < 0.0;
    let rotation = if transposed { o * transposition_reflection() } else { o };
    let unitary = su2_from_so3(&rotation)?;
    let residual = xs.iter().zip(ys).map(|(x, y)| (x - o * y).norm_squared()).sum::<f64>().sqrt();
    let fid = xs.iter().zip(ys).map(|(x, y)| 0.5 * (1.0 + x.dot(&(o * y)))).sum::<f64>() / xs.len() as f64;
    Ok(Alignment { orthogonal: o, rotation, unitary, transposed, residual, achieved_avg_fidelity: fid })
}

fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotRotation("non-finite entry".into()));
    }
    let defect = (r.transpose() * r - Matrix3::identity()).abs().max();
    if defect > ROTATION_TOL {
        return Err(Error::NotRotation(format!("not orthogonal (defect {defect:e})")));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > ROTATION_TOL {
        return Err(Error::NotRotation(format!("determinant {det}")));
    }
    Ok(())
}

/// `U` with `U (n·σ) U† = (R n)·σ`; the sign is fixed by `Re tr U ≥ 0`.
pub fn su2_from_so3(r: &Matrix3<f64>) -> Result<ComplexMatrix> {
    check_rotation(r)?;
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    let (mut w, mut v) = (q.w, q.imag());
    if w < 0.0 {
        w = -w;
        v = -v;
    }
    let [sx, sy, sz] = paulis();
    let gen = sx.scale(v.x) + sy.scale(v.y) + sz.scale(v.z);
    Ok(linalg::complex_identity(2).scale(w) - gen * Complex64::new(0.0, 1.0))
}

/// Rotation induced by conjugation: `R_ji = ½ tr(σ_j U σ_i U†)`.
pub fn so3_from_su2(u: &ComplexMatrix) -> Result<Matrix3<f64>> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::NotQubit(u.nrows()));
    }
    let defect = (u * u.adjoint() - linalg::complex_identity(2)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > ROTATION_TOL {
        return Err(Error::NotRotation(format!("matrix is not unitary (defect {defect:e})")));
    }
    let s = paulis();
    let mut r = Matrix3::zeros();
    for i in 0..3 {
        let conj = u * &s[i] * u.adjoint();
        for j in 0..3 {
            r[(j, i)] = 0.5 * linalg::trace_product(&s[j], &conj).re;
        }
    }
    Ok(r)
}

fn state_blochs(states: &[&QuantumState]) -> Result<Vec<Vector3<f64>>> {
    states.iter().map(|r| bloch_from_state(r).map(|b| b.as_vector())).collect()
}

/// Best alignment of the listed preparations `(x, a)`.
pub fn align_states(
    scenario: &PmScenario,
    real: &ExperimentalRealization,
    which: &[(usize, usize)],
) -> Result<Alignment> {
    let targets: Vec<&QuantumState> = which.iter().map(|&(x, a)| scenario.state(x, a)).collect();
    let exps: Vec<&QuantumState> = which.iter().map(|&(x, a)| real.state(x, a)).collect();
    let xs = state_blochs(&targets)?;
    let ys = state_blochs(&exps)?;
    let o = optimal_orthogonal(&xs, &ys)?;
    alignment_from_orthogonal(o, &xs, &ys)
}

fn all_preparations(scenario: &PmScenario) -> Vec<(usize, usize)> {
    (0..scenario.n()).flat_map(|x| (0..scenario.d()).map(move |a| (x, a))).collect()
}

/// Alignment maximizing the average fidelity over all `2n` states.
pub fn best_alignment(scenario: &PmScenario, real: &ExperimentalRealization) -> Result<Alignment> {
    check_shapes(scenario, real)?;
    align_states(scenario, real, &all_preparations(scenario))
}

fn check_shapes(scenario: &PmScenario, real: &ExperimentalRealization) -> Result<()> {
    if scenario.d() != 2 {
        return Err(Error::NotQubit(scenario.d()));
    }
    let d = real.dim()?;
    if d != 2 {
        return Err(Error::NotQubit(d));
    }
    if real.states.len() != scenario.n() || real.states.iter().any(|b| b.len() != 2) {
        return Err(Error::DimensionMismatch { expected: scenario.n(), found: real.states.len() });
    }
    if real.measurements.len() != scenario.n() {
        return Err(Error::DimensionMismatch { expected: scenario.n(), found: real.measurements.len() });
    }
    Ok(())
}

/// `(1/2n) Σ tr(U ρ̃^(T) U† ρ)` computed on density matrices.
pub fn achieved_fidelity(alignment: &Alignment, scenario: &PmScenario, real: &ExperimentalRealization) -> Result<f64> {
    check_shapes(scenario, real)?;
    let prep = all_preparations(scenario);
    let mut total = 0.0;
    for &(x, a) in &prep {
        let r = alignment.apply_state(real.state(x, a))?;
        total += linalg::trace_product(r.matrix(), scenario.state(x, a).matrix()).re;
    }
    Ok(total / prep.len() as f64)
}

/// Average over settings of `tr(U M̃^y_0^(T) U† M^y_0)`.
pub fn measurement_fidelity(alignment: &Alignment, scenario: &PmScenario, real: &ExperimentalRealization) -> Result<f64> {
    check_shapes(scenario, real)?;
    let n = scenario.n();
    let total: f64 = (0..n)
        .map(|y| {
            let m = alignment.apply_operator(real.measurements[y].effect(0));
            linalg::trace_product(&m, scenario.state(y, 0).matrix()).re
        })
        .sum();
    Ok(total / n as f64)
}

/// Traceless part of a qubit operator as a 3-vector: `A = ½(t + a·σ)`.
fn operator_bloch(m: &ComplexMatrix) -> Vector3<f64> {
    let s = paulis();
    Vector3::new(
        linalg::trace_product(m, &s[0]).re,
        linalg::trace_product(m, &s[1]).re,
        linalg::trace_product(m, &s[2]).re,
    )
}

/// Alignment maximizing the outcome-0 measurement fidelity average.
pub fn best_measurement_alignment(scenario: &PmScenario, real: &ExperimentalRealization) -> Result<Alignment> {
    check_shapes(scenario, real)?;
    let xs: Vec<Vector3<f64>> = (0..scenario.n()).map(|y| operator_bloch(scenario.state(y, 0).matrix())).collect();
    let ys: Vec<Vector3<f64>> = real.measurements.iter().map(|m| operator_bloch(m.effect(0))).collect();
    let o = optimal_orthogonal(&xs, &ys)?;
    alignment_from_orthogonal(o, &xs, &ys)
}

/// Best achievable outcome-0 measurement fidelity average.
pub fn best_measurement_fidelity(scenario: &PmScenario, real: &ExperimentalRealization) -> Result<f64> {
    let al = best_measurement_alignment(scenario, real)?;
    measurement_fidelity(&al, scenario, real)
}

/// Procrustes-route fidelity bound for `m` states whose Bloch vectors are
/// the rows of `rows`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcrustesBound {
    pub m: usize,
    pub k: usize,
    /// `‖L‡‖` of the rows in span coordinates.
    pub l_dagger_norm: f64,
    pub f_m: f64,
    pub p: f64,
    /// Whether `‖L‡‖√F_m < 1`.
    pub branch: bool,
    /// `1 − ε(1−2ε)/(1−ε)² − P²/(4m)`, unclipped.
    pub fidelity_lower: f64,
}

/// Coordinates of the rows in an orthonormal basis of their span. For rank 2
/// the basis comes from Gram–Schmidt on the first two independent rows.
pub fn span_coordinates(rows: &RealMatrix) -> Result<(usize, RealMatrix)> {
    if rows.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    let k = numerical_rank(rows, 1e-8);
    if k < 2 {
        return Err(Error::DegenerateConfiguration);
    }
    if k == rows.ncols() {
        return Ok((k, rows.clone()));
    }
    let scale = rows.row_iter().map(|r| r.norm()).fold(0.0, f64::max);
    let mut basis: Vec<nalgebra::RowDVector<f64>> = Vec::new();
    for r in rows.row_iter() {
        let mut v = r.clone_owned();
        for b in &basis {
            let proj = v.dot(b);
            v -= b * proj;
        }
        let nv = v.norm();
        if nv > 1e-8 * scale {
            basis.push(v / nv);
        }
        if basis.len() == k {
            break;
        }
    }
    let coords = RealMatrix::from_fn(rows.nrows(), k, |i, j| rows.row(i).dot(&basis[j]));
    Ok((k, coords))
}

pub fn procrustes_bound(eps: f64, rows: &RealMatrix) -> Result<ProcrustesBound> {
    if !eps.is_finite() || !(0.0..=QUBIT_EPS_MAX).contains(&eps) {
        return Err(Error::OutOfRange(format!("Procrustes bound needs 0 <= eps <= 1/3, got {eps}")));
    }
    let (k, coords) = span_coordinates(rows)?;
    let m = rows.nrows();
    let l_dagger_norm = pseudo_inverse_tall(&coords)?.operator_norm();
    let f = f_m(eps, m)?;
    let lf = l_dagger_norm * f;
    let tail = ((k as f64).sqrt() * f).sqrt();
    let branch = l_dagger_norm * f.sqrt() < 1.0;
    let p = if branch {
        lf + (lf / (1.0 - l_dagger_norm * lf).sqrt()).min(tail)
    } else {
        lf + tail
    };
    let fidelity_lower = 1.0 - purity_deficit(eps) - p * p / (4.0 * m as f64);
    Ok(ProcrustesBound { m, k, l_dagger_norm, f_m: f, p, branch, fidelity_lower })
}
