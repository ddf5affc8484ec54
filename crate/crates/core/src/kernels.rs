//! Scalar noise functions and the Cholesky / linear-system perturbation
//! bounds the self-testing estimates are built from.

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, MatrixNorms, RealMatrix};

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::OutOfRange(format!("epsilon must be nonnegative, got {eps}")));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k != 2 && k != 3 {
        return Err(Error::OutOfRange(format!("subset size must be 2 or 3, got {k}")));
    }
    Ok(())
}

/// `√(4m(m−1)ε(1 + 2√ε + ((m+3)/(m−1))ε))` for any `m ≥ 2`.
pub fn f_m(eps: f64, m: usize) -> Result<f64> {
    check_eps(eps)?;
    if m < 2 {
        return Err(Error::OutOfRange(format!("need at least two vectors, got {m}")));
    }
    let m = m as f64;
    let inner = 1.0 + 2.0 * eps.sqrt() + (m + 3.0) / (m - 1.0) * eps;
    Ok((4.0 * m * (m - 1.0) * eps * inner).sqrt())
}

/// Frobenius-norm bound on the Gram perturbation of `k ∈ {2, 3}` vectors.
pub fn f_k(eps: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    f_m(eps, k)
}

/// Operator-norm bound `2((k−1)√ε + (k+1)ε)` on the Gram perturbation.
pub fn o_k(eps: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    check_eps(eps)?;
    let k = k as f64;
    Ok(2.0 * ((k - 1.0) * eps.sqrt() + (k + 1.0) * eps))
}

/// Purity deficit `ε(1−2ε)/(1−ε)²` of an experimental qubit state.
pub fn purity_deficit(eps: f64) -> f64 {
    eps * (1.0 - 2.0 * eps) / ((1.0 - eps) * (1.0 - eps))
}

/// Frobenius-norm bound on `ΔL` where `Γ + ΔΓ = (L + ΔL)(L + ΔL)ᵀ`.
///
/// Requires `‖Γ⁻¹‖‖ΔΓ‖ < 1`; at equality the bound is infinite and the
/// call fails.
pub fn sun_cholesky_bound_from_norms(
    gamma_inv_norm: f64,
    delta_op: f64,
    delta_frob: f64,
    l_frob: f64,
    l_op: f64,
    gamma_op: f64,
    gamma_frob: f64,
) -> Result<f64> {
    let ratio = gamma_inv_norm * delta_op;
    if ratio >= 1.0 {
        return Err(Error::ValidityExceeded { eps: f64::NAN, ratio });
    }
    let shape = (l_frob * gamma_op / gamma_frob).min(l_op);
    Ok(gamma_inv_norm * delta_frob / (2.0 * (1.0 - ratio)).sqrt() * shape)
}

pub fn sun_cholesky_bound(gamma: &RealMatrix, delta: &RealMatrix, l: &RealMatrix) -> Result<f64> {
    let inv = spd_inverse(gamma)?;
    sun_cholesky_bound_from_norms(
        inv.operator_norm(),
        delta.operator_norm(),
        delta.frobenius_norm(),
        l.frobenius_norm(),
        l.operator_norm(),
        gamma.operator_norm(),
        gamma.frobenius_norm(),
    )
}

/// Relative error bound `|c − c̃| / |c|` for `Γc = g` perturbed to
/// `(Γ + ΔΓ)c̃ = g + Δg` with `‖ΔΓ‖ ≤ δ'‖E‖`, `|Δg| ≤ δ'|f|`.
pub fn higham_bound(
    delta_prime: f64,
    gamma_inv_norm: f64,
    e_norm: f64,
    f_norm: f64,
    c_norm: f64,
) -> Result<f64> {
    let q = delta_prime * gamma_inv_norm * e_norm;
    if q >= 1.0 {
        return Err(Error::ValidityExceeded { eps: f64::NAN, ratio: q });
    }
    if c_norm <= 0.0 {
        return Err(Error::OutOfRange("solution vector must be nonzero".into()));
    }
    Ok(delta_prime / (1.0 - q) * (gamma_inv_norm * f_norm / c_norm + gamma_inv_norm * e_norm))
}

/// Absolute bound on `|c − c̃|` with the self-testing instantiation
/// `δ' = O_k(ε)`, `‖E‖ = 1`, `|f| = √k/(k−1)`.
pub fn coefficient_shift_bound(eps: f64, k: usize, gamma_inv_norm: f64, c_norm: f64) -> Result<f64> {
    let q = gamma_inv_norm * o_k(eps, k)?;
    if q >= 1.0 {
        return Err(Error::ValidityExceeded { eps, ratio: q });
    }
    let kf = k as f64;
    Ok((c_norm + kf.sqrt() / (kf - 1.0)) * q / (1.0 - q))
}
