//! Overlap certification from the deviation ε alone.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::{fidelity_linear, Povm, QuantumState};
use crate::scenario::{deviation_epsilon, Epsilon, ExperimentalRealization, PmScenario, StatTable};

/// Largest ε for which the qubit refinements apply.
pub const QUBIT_EPS_MAX: f64 = 1.0 / 3.0;

/// Lower bound on `Σ_a ‖ρ̃^x_a‖`: `d(1−2ε)`, clipped at 0.
pub fn purity_bound(eps: Epsilon, d: usize) -> f64 {
    (d as f64 * (1.0 - 2.0 * eps.value())).max(0.0)
}

/// Lower bound on `Σ_b ‖M̃^y_b‖`: `d(1−ε)`, clipped at 0.
pub fn projectivity_bound(eps: Epsilon, d: usize) -> f64 {
    (d as f64 * (1.0 - eps.value())).max(0.0)
}

fn effect_gap_general(e: f64, d: usize) -> f64 {
    let d = d as f64;
    (2.0 * e + d * d * e * e).sqrt()
}

/// `ε + √(2ε + d²ε²)`.
pub fn state_overlap_tol(eps: Epsilon, d: usize) -> f64 {
    let e = eps.value();
    e + effect_gap_general(e, d)
}

/// `ε + (1 + dε)√(2ε + d²ε²)`.
pub fn measurement_overlap_tol(eps: Epsilon, d: usize) -> f64 {
    let e = eps.value();
    e + (1.0 + d as f64 * e) * effect_gap_general(e, d)
}

/// Qubit-specific bounds. With `fallback` set, ε exceeded 1/3 and the
/// values are the arbitrary-dimension ones at `d = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitRefinement {
    /// Lower bound on every `‖ρ̃^x_a‖`.
    pub norm_lower: f64,
    pub state_tol: f64,
    pub meas_tol: f64,
    /// Upper bound on `‖ρ̃^x_a − M̃^x_a‖`.
    pub effect_gap: f64,
    pub fallback: bool,
}

pub fn qubit_refinements(eps: Epsilon) -> QubitRefinement {
    let e = eps.value();
    if e <= QUBIT_EPS_MAX {
        let s = e.sqrt();
        QubitRefinement {
            norm_lower: (1.0 - 2.0 * e) / (1.0 - e),
            state_tol: e + s,
            meas_tol: e + (1.0 + e) * s,
            effect_gap: s,
            fallback: false,
        }
    } else {
        // Σ_a‖ρ̃_a‖ ≥ 2 − 4ε with each norm at most 1, and any qubit state has norm ≥ ½
        QubitRefinement {
            norm_lower: (1.0 - 4.0 * e).max(0.5),
            state_tol: state_overlap_tol(eps, 2),
            meas_tol: measurement_overlap_tol(eps, 2),
            effect_gap: effect_gap_general(e, 2),
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// `x ≠ x'`, `a ≠ a'`.
    CrossSetting,
    /// `x ≠ x'`, `a = a'`; the same tolerance is applied although the
    /// theorem is stated only for `a ≠ a'`.
    CrossSettingSameOutcome,
    /// `x = x'`, `a ≠ a'`: target overlap 0, interval `[0, tol]`.
    SameSetting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairInterval {
    pub x: usize,
    pub a: usize,
    pub x2: usize,
    pub a2: usize,
    pub kind: PairKind,
    /// Target overlap `tr(ρ^x_a ρ^{x2}_{a2})`.
    pub target: f64,
    /// Certified range of `tr(ρ̃^x_a ρ̃^{x2}_{a2})`.
    pub state_lower: f64,
    pub state_upper: f64,
    /// Certified range of `tr(M̃^x_a M̃^{x2}_{a2})`; absent for same-setting pairs.
    pub meas_lower: Option<f64>,
    pub meas_upper: Option<f64>,
}

impl PairInterval {
    pub fn contains_state_overlap(&self, value: f64, slack: f64) -> bool {
        value >= self.state_lower - slack && value <= self.state_upper + slack
    }

    pub fn contains_meas_overlap(&self, value: f64, slack: f64) -> bool {
        match (self.meas_lower, self.meas_upper) {
            (Some(lo), Some(hi)) => value >= lo - slack && value <= hi + slack,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapCertificate {
    pub epsilon: Epsilon,
    pub d: usize,
    pub purity_lower: f64,
    pub projectivity_lower: f64,
    /// Tolerances applied to the intervals (qubit-refined when available).
    pub state_overlap_tolerance: f64,
    pub measurement_overlap_tolerance: f64,
    /// Arbitrary-dimension tolerances, reported even when refined ones apply.
    pub general_state_tolerance: f64,
    pub general_measurement_tolerance: f64,
    pub qubit: Option<QubitRefinement>,
    pub per_pair: Vec<PairInterval>,
}

impl OverlapCertificate {
    pub fn pair(&self, x: usize, a: usize, x2: usize, a2: usize) -> Option<&PairInterval> {
        let key = if (x, a) <= (x2, a2) { (x, a, x2, a2) } else { (x2, a2, x, a) };
        self.per_pair.iter().find(|p| (p.x, p.a, p.x2, p.a2) == key)
    }
}

/// Assembles every bound for the given ε and target configuration.
pub fn certify_with_epsilon(eps: Epsilon, scenario: &PmScenario) -> OverlapCertificate {
    let d = scenario.d();
    let general_state = state_overlap_tol(eps, d);
    let general_meas = measurement_overlap_tol(eps, d);
    let qubit = (d == 2).then(|| qubit_refinements(eps));
    let (state_tol, meas_tol) = match qubit {
        Some(q) if !q.fallback => (q.state_tol, q.meas_tol),
        _ => (general_state, general_meas),
    };

    let mut per_pair = Vec::new();
    let n = scenario.n();
    for x in 0..n {
        for a in 0..d {
            for x2 in x..n {
                let a2_start = if x2 == x { a + 1 } else { 0 };
                for a2 in a2_start..d {
                    let target = fidelity_linear(scenario.state(x, a), scenario.state(x2, a2))
                        .expect("target states share the dimension");
                    let kind = if x == x2 {
                        PairKind::SameSetting
                    } else if a == a2 {
                        PairKind::CrossSettingSameOutcome
                    } else {
                        PairKind::CrossSetting
                    };
                    let interval = match kind {
                        PairKind::SameSetting => PairInterval {
                            x,
                            a,
                            x2,
                            a2,
                            kind,
                            target,
                            state_lower: 0.0,
                            state_upper: state_tol.min(1.0),
                            meas_lower: None,
                            meas_upper: None,
                        },
                        _ => PairInterval {
                            x,
                            a,
                            x2,
                            a2,
                            kind,
                            target,
                            state_lower: (target - state_tol).clamp(0.0, 1.0),
                            state_upper: (target + state_tol).clamp(0.0, 1.0),
                            meas_lower: Some((target - meas_tol).max(0.0)),
                            meas_upper: Some(target + meas_tol),
                        },
                    };
                    per_pair.push(interval);
                }
            }
        }
    }

    OverlapCertificate {
        epsilon: eps,
        d,
        purity_lower: purity_bound(eps, d),
        projectivity_lower: projectivity_bound(eps, d),
        state_overlap_tolerance: state_tol,
        measurement_overlap_tolerance: meas_tol,
        general_state_tolerance: general_state,
        general_measurement_tolerance: general_meas,
        qubit,
        per_pair,
    }
}

/// Certificate for observed statistics: ε is the worst-case deviation.
pub fn certify(observed: &StatTable, scenario: &PmScenario) -> Result<OverlapCertificate> {
    let eps = deviation_epsilon(observed, scenario)?;
    Ok(certify_with_epsilon(eps, scenario))
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ket(v: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(v.len(), v.iter().map(|&x| c(x)))
}

fn projector(v: &DVector<Complex64>) -> ComplexMatrix {
    v * v.adjoint()
}

/// Two-setting qubit pair whose state overlap moves by exactly `√(ε−ε²)`
/// while every probability moves by at most ε.
pub fn tightness_fixture_qubit(eps: Epsilon) -> Result<(PmScenario, ExperimentalRealization)> {
    let e = eps.value();
    if !(e > 0.0 && e < 0.5) {
        return Err(Error::OutOfRange(format!("qubit fixture needs 0 < eps < 1/2, got {e}")));
    }
    let (p, q) = ((1.0 - e).sqrt(), e.sqrt());
    let h = 0.5f64.sqrt();
    let zero_t = ket(&[p, q]);
    let zero_t_perp = ket(&[-q, p]);
    let plus = ket(&[h, h]);
    let minus = ket(&[h, -h]);
    let scenario = PmScenario::from_kets(&[
        vec![zero_t.clone(), zero_t_perp.clone()],
        vec![plus.clone(), minus.clone()],
    ])?;

    let plus_t = &plus * c(p) + &minus * c(q);
    let plus_t_perp = &plus * c(-q) + &minus * c(p);
    let st = |v: &[f64]| QuantumState::from_ket(&ket(v));
    let states = vec![vec![st(&[1.0, 0.0])?, st(&[0.0, 1.0])?], vec![st(&[h, h])?, st(&[h, -h])?]];
    let measurements = vec![
        Povm::new(vec![projector(&zero_t), projector(&zero_t_perp)])?,
        Povm::new(vec![projector(&plus_t), projector(&plus_t_perp)])?,
    ];
    Ok((scenario, ExperimentalRealization::new(states, measurements)?))
}

/// Dimension-`d` POVM with `M_0 = |0⟩⟨0| + ε(d−1)|+⟩⟨+|` and rank-1
/// `M_a = (|a⟩ − δ|+⟩)(⟨a| − δ⟨+|)`, where `|+⟩` is uniform over the last
/// `d−1` basis vectors. Returns the POVM and the states `|0⟩⟨0|`,
/// `M_a / tr M_a` paired with it.
pub fn tightness_fixture_dim_realization(eps: Epsilon, d: usize) -> Result<(Povm, Vec<QuantumState>)> {
    let e = eps.value();
    if d < 2 {
        return Err(Error::OutOfRange(format!("dimension fixture needs d >= 2, got {d}")));
    }
    let inv = 1.0 / (d as f64 - 1.0);
    if !(e > 0.0 && e < inv) {
        return Err(Error::OutOfRange(format!("dimension fixture needs 0 < eps < 1/(d-1) = {inv}, got {e}")));
    }
    let delta = inv.sqrt() + (inv - e).sqrt();
    let s = inv.sqrt();
    let plus = DVector::from_fn(d, |i, _| if i == 0 { c(0.0) } else { c(s) });
    let basis = |i: usize| DVector::from_fn(d, |j, _| if j == i { c(1.0) } else { c(0.0) });

    let mut effects = vec![projector(&basis(0)) + projector(&plus).scale(e * (d as f64 - 1.0))];
    let mut states = vec![QuantumState::from_ket(&basis(0))?];
    for a in 1..d {
        let v = basis(a) - &plus * c(delta);
        effects.push(projector(&v));
        states.push(QuantumState::from_ket(&v)?);
    }
    Ok((Povm::new(effects)?, states))
}

pub fn tightness_fixture_dim(eps: Epsilon, d: usize) -> Result<Povm> {
    tightness_fixture_dim_realization(eps, d).map(|(p, _)| p)
}
