//! Seeded noise models producing admissible experimental realizations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, MatrixNorms};
use crate::quantum::paulis;
use crate::scenario::{ExperimentalRealization, PmScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// `U · U†` on every state and effect with `U = exp(−iπδH)`, `‖H‖ = 1`.
    Unitary,
    /// `ρ → (1−δ)ρ + δ·1/d` on the states.
    Depolarize,
    /// Each qubit state rotated about a random axis by an angle in `[0, δ]`.
    BlochRotate,
    /// `M_b → (1−δ)M_b + (δ/d)·1` on every measurement.
    Smear,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] =
        [NoiseKind::Unitary, NoiseKind::Depolarize, NoiseKind::BlochRotate, NoiseKind::Smear];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Unitary => "unitary",
            NoiseKind::Depolarize => "depolarize",
            NoiseKind::BlochRotate => "bloch-rotate",
            NoiseKind::Smear => "smear",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidNoise(format!("unknown noise kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub delta: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidNoise(format!("delta must be nonnegative, got {delta}")));
        }
        if matches!(kind, NoiseKind::Depolarize | NoiseKind::Smear) && delta > 1.0 {
            return Err(Error::InvalidNoise(format!("{kind} requires delta <= 1, got {delta}")));
        }
        Ok(Self { kind, delta })
    }
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random Hermitian matrix with operator norm 1.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let h = linalg::hermitian_part(&g);
    let norm = h.operator_norm();
    h.unscale(norm)
}

/// Uniformly distributed unit vector in three dimensions.
pub fn random_axis(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Qubit unitary rotating Bloch vectors by `angle` about `axis`.
pub fn rotation_unitary(axis: [f64; 3], angle: f64) -> ComplexMatrix {
    let [sx, sy, sz] = paulis();
    let h = sx.scale(axis[0]) + sy.scale(axis[1]) + sz.scale(axis[2]);
    linalg::unitary_from_hermitian(&h, 0.5 * angle)
}

/// Applies one noise step to an existing realization.
pub fn apply(
    real: &ExperimentalRealization,
    noise: NoiseSpec,
    rng: &mut impl Rng,
) -> Result<ExperimentalRealization> {
    let d = real.dim()?;
    let delta = noise.delta;
    match noise.kind {
        NoiseKind::Unitary => {
            let h = random_hermitian(d, rng);
            let u = linalg::unitary_from_hermitian(&h, std::f64::consts::PI * delta);
            let states = real
                .states
                .iter()
                .map(|basis| basis.iter().map(|r| r.conjugate_by(&u)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let measurements =
                real.measurements.iter().map(|m| m.conjugate_by(&u)).collect::<Result<Vec<_>>>()?;
            ExperimentalRealization::new(states, measurements)
        }
        NoiseKind::Depolarize => {
            let states =
                real.states.iter().map(|basis| basis.iter().map(|r| r.depolarize(delta)).collect()).collect();
            ExperimentalRealization::new(states, real.measurements.clone())
        }
        NoiseKind::BlochRotate => {
            if d != 2 {
                return Err(Error::InvalidNoise(format!("bloch-rotate requires d = 2, got d = {d}")));
            }
            let mut states = Vec::with_capacity(real.states.len());
            for basis in &real.states {
                let mut rotated = Vec::with_capacity(basis.len());
                for r in basis {
                    let axis = random_axis(rng);
                    let angle = rng.random_range(0.0..=delta);
                    rotated.push(r.conjugate_by(&rotation_unitary(axis, angle))?);
                }
                states.push(rotated);
            }
            ExperimentalRealization::new(states, real.measurements.clone())
        }
        NoiseKind::Smear => {
            let measurements = real.measurements.iter().map(|m| m.smear(delta)).collect();
            ExperimentalRealization::new(real.states.clone(), measurements)
        }
    }
}

/// Seeded realization of `scenario` under a single noise model.
pub fn perturb(scenario: &PmScenario, noise: NoiseSpec, seed: u64) -> Result<ExperimentalRealization> {
    perturb_composed(scenario, &[noise], seed)
}

/// Seeded realization under a sequence of noise models applied in order.
pub fn perturb_composed(
    scenario: &PmScenario,
    noise: &[NoiseSpec],
    seed: u64,
) -> Result<ExperimentalRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut real = scenario.realization();
    for &n in noise {
        real = apply(&real, n, &mut rng)?;
    }
    Ok(real)
}
