//! Built-in target configurations.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{state_from_bloch, BlochVector, Povm};
use crate::scenario::PmScenario;

pub const NAMES: [&str; 6] = ["mub2", "mub3", "biased", "trine", "tetrahedron", "sic-qubit"];

const Z: [f64; 3] = [0.0, 0.0, 1.0];
const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];

pub fn mub2() -> PmScenario {
    PmScenario::from_qubit_bloch(&[Z, X]).expect("valid catalog entry")
}

pub fn mub3() -> PmScenario {
    PmScenario::from_qubit_bloch(&[Z, X, Y]).expect("valid catalog entry")
}

pub fn biased_bloch(alpha: f64) -> [[f64; 3]; 2] {
    [Z, [(1.0 - alpha * alpha).max(0.0).sqrt(), 0.0, alpha]]
}

/// Two bases whose outcome-0 Bloch vectors have inner product `α`.
pub fn biased(alpha: f64) -> Result<PmScenario> {
    if !alpha.is_finite() || !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("alpha must lie in [-1, 1], got {alpha}")));
    }
    PmScenario::from_qubit_bloch(&biased_bloch(alpha))
}

pub fn trine_bloch() -> [[f64; 3]; 3] {
    let h = 3f64.sqrt() / 2.0;
    [[1.0, 0.0, 0.0], [-0.5, h, 0.0], [-0.5, -h, 0.0]]
}

pub fn trine() -> PmScenario {
    PmScenario::from_qubit_bloch(&trine_bloch()).expect("valid catalog entry")
}

pub fn tetrahedron_bloch() -> [[f64; 3]; 4] {
    let third = 1.0 / 3.0;
    let a = (8.0f64 / 9.0).sqrt();
    let b = (2.0f64 / 9.0).sqrt();
    let c = (2.0f64 / 3.0).sqrt();
    [[0.0, 0.0, 1.0], [a, 0.0, -third], [-b, c, -third], [-b, -c, -third]]
}

pub fn tetrahedron() -> PmScenario {
    PmScenario::from_qubit_bloch(&tetrahedron_bloch()).expect("valid catalog entry")
}

/// Preparation bases of the qubit SIC scheme (the tetrahedron bases).
pub fn sic_qubit() -> PmScenario {
    tetrahedron()
}

/// Qubit SIC-POVM `N_b = ½ ρ(n_b)` over the tetrahedron vectors.
pub fn sic_qubit_povm() -> Povm {
    let effects = tetrahedron_bloch()
        .iter()
        .map(|v| state_from_bloch(&BlochVector(*v)).expect("unit vector").into_matrix().scale(0.5))
        .collect();
    Povm::new(effects).expect("tetrahedron effects sum to the identity")
}

/// `n` mutually unbiased bases in dimension `d`: the computational basis
/// followed by quadratic-phase Fourier bases. `n ≤ 2` works for any `d`;
/// larger `n` (up to `d + 1`) needs an odd prime `d`.
pub fn fourier_mubs(d: usize, n: usize) -> Result<PmScenario> {
    if d < 2 || n == 0 {
        return Err(Error::OutOfRange(format!("need d >= 2 and n >= 1, got d = {d}, n = {n}")));
    }
    let odd_prime = d > 2 && (2..d).take_while(|p| p * p <= d).all(|p| !d.is_multiple_of(p));
    let max_n = if odd_prime { d + 1 } else { 2 };
    if n > max_n {
        return Err(Error::OutOfRange(format!("at most {max_n} bases available for d = {d}")));
    }
    let scale = 1.0 / (d as f64).sqrt();
    let mut kets = Vec::with_capacity(n);
    kets.push((0..d).map(|a| DVector::from_fn(d, |j, _| Complex64::new(if j == a { 1.0 } else { 0.0 }, 0.0))).collect());
    for x in 1..n {
        let k = (x - 1) as f64;
        let basis = (0..d)
            .map(|a| {
                DVector::from_fn(d, |j, _| {
                    let jf = j as f64;
                    Complex64::from_polar(scale, 2.0 * PI * (k * jf * jf + a as f64 * jf) / d as f64)
                })
            })
            .collect();
        kets.push(basis);
    }
    PmScenario::from_kets(&kets)
}

/// Catalog lookup; `alpha` parameterizes the biased family.
pub fn by_name(name: &str, alpha: Option<f64>) -> Result<PmScenario> {
    match name {
        "mub2" => Ok(mub2()),
        "mub3" => Ok(mub3()),
        "biased" => biased(alpha.unwrap_or(0.5)),
        "trine" => Ok(trine()),
        "tetrahedron" => Ok(tetrahedron()),
        "sic-qubit" => Ok(sic_qubit()),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}
