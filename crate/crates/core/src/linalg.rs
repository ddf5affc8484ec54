//! Dense small-matrix helpers: norms, Cholesky, tall pseudo-inverse and
//! Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

/// Pivots at or below this value declare a Gram matrix rank deficient.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-12;

/// Relative threshold on singular values used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Operator (spectral) and Frobenius norms for real and complex matrices.
pub trait MatrixNorms {
    /// Largest singular value.
    fn operator_norm(&self) -> f64;
    /// Square root of the sum of squared singular values.
    fn frobenius_norm(&self) -> f64;
}

impl MatrixNorms for RealMatrix {
    fn operator_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.singular_values().max()
    }

    fn frobenius_norm(&self) -> f64 {
        self.norm()
    }
}

impl MatrixNorms for ComplexMatrix {
    fn operator_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.singular_values().max()
    }

    fn frobenius_norm(&self) -> f64 {
        self.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn operator_norm<M: MatrixNorms>(m: &M) -> f64 {
    m.operator_norm()
}

pub fn frobenius_norm<M: MatrixNorms>(m: &M) -> f64 {
    m.frobenius_norm()
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    Ok(())
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = g`.
///
/// Plain non-pivoted column algorithm. A pivot `<= CHOLESKY_PIVOT_TOL`
/// is reported as [`Error::NotPositiveDefinite`].
pub fn cholesky(g: &RealMatrix) -> Result<RealMatrix> {
    check_square(g.nrows(), g.ncols())?;
    let n = g.nrows();
    let scale = g.amax().max(1.0);
    let asym = (g - g.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }

    let mut l = RealMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = g[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot <= CHOLESKY_PIVOT_TOL || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        for i in (j + 1)..n {
            let mut s = 0.5 * (g[(i, j)] + g[(j, i)]);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / diag;
        }
    }
    Ok(l)
}

/// Moore–Penrose inverse `(MᵀM)⁻¹Mᵀ` of a tall matrix with full column rank.
///
/// Bloch vectors are stored as rows, so an `m x k` matrix of `m` vectors
/// spanning `k` dimensions is tall; its pseudo-inverse is `k x m` and
/// satisfies `M‡ M = I_k`.
pub fn pseudo_inverse_tall(m: &RealMatrix) -> Result<RealMatrix> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::RankDeficient(0.0));
    }
    if cols == 0 {
        return Err(Error::EmptyInput);
    }
    let sv = m.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= RANK_TOL * smax.max(1.0) {
        return Err(Error::RankDeficient(smin));
    }
    let normal = m.transpose() * m;
    let inv = normal
        .try_inverse()
        .ok_or(Error::RankDeficient(smin))?;
    Ok(inv * m.transpose())
}

/// Numerical rank from singular values relative to the largest one.
pub fn numerical_rank(m: &RealMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Inverse of a symmetric positive definite matrix through its Cholesky factor.
pub fn spd_inverse(g: &RealMatrix) -> Result<RealMatrix> {
    let l = cholesky(g)?;
    let n = g.nrows();
    let mut inv = RealMatrix::zeros(n, n);
    for col in 0..n {
        let mut e = DVector::zeros(n);
        e[col] = 1.0;
        let x = solve_cholesky(&l, &e);
        inv.set_column(col, &x);
    }
    Ok(inv)
}

/// Solves `L Lᵀ x = b` given the lower-triangular factor.
pub fn solve_cholesky(l: &RealMatrix, b: &DVector<f64>) -> DVector<f64> {
    let n = l.nrows();
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = DVector::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns)
/// of a Hermitian matrix.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn unitary_from_hermitian(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let n = h.nrows();
    let phases = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        n,
        values.iter().map(|&l| Complex64::from_polar(1.0, -t * l)),
    ));
    &vectors * phases * vectors.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn complex_identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Bisection for the root of a decreasing function on `[lo, hi]`, where
/// `f(lo) > 0` and `f` is either negative or undefined at `hi`.
/// `None` from `f` is treated as negative.
pub fn bisect_decreasing<F>(mut lo: f64, mut hi: f64, tol: f64, f: F) -> f64
where
    F: Fn(f64) -> Option<f64>,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match f(mid) {
            Some(v) if v > 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}
