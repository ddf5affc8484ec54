//! Rank-1 POVM certification from moment matrices, and intermediate
//! preparations that pin overlaps under shared randomness.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, RealMatrix};
use crate::quantum::{fidelity_linear, Povm, QuantumState};
use crate::scenario::{born_table, ExperimentalRealization, PairIndex, PmScenario, StatIndex, StatTable};

/// Relative singular-value threshold for declaring the moment matrix singular.
pub const SINGULAR_REL_TOL: f64 = 1e-8;

/// Absolute per-entry tolerance of the SIC test.
pub const SIC_TOL: f64 = 1e-9;

const RANK1_TOL: f64 = 1e-9;

/// `Γ_{bb'} = tr(N_b N_b')`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub m: usize,
    pub gamma: RealMatrix,
}

impl MomentMatrix {
    pub fn from_povm(povm: &Povm) -> Self {
        let e = povm.effects();
        let m = e.len();
        let gamma = RealMatrix::from_fn(m, m, |i, j| linalg::trace_product(&e[i], &e[j]).re);
        Self { m, gamma }
    }
}

/// Assembles `Γ_{bb'} = α_b α_b' tr(σ_b σ_b')` from estimated overlaps of the
/// pure states `σ_b` and the weights `α_b = tr N_b`, which must sum to `d`.
pub fn moment_matrix_from_stats(overlaps: &RealMatrix, alphas: &[f64], d: usize) -> Result<MomentMatrix> {
    let m = alphas.len();
    if m == 0 {
        return Err(Error::EmptyInput);
    }
    if overlaps.nrows() != m || overlaps.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, found: overlaps.nrows() });
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0 + 1e-12)) {
        return Err(Error::InvalidPovm(format!("weight {a} outside (0, 1]")));
    }
    let total: f64 = alphas.iter().sum();
    if (total - d as f64).abs() > 1e-8 {
        return Err(Error::InvalidPovm(format!("weights sum to {total}, expected {d}")));
    }
    let gamma = RealMatrix::from_fn(m, m, |i, j| alphas[i] * alphas[j] * overlaps[(i, j)]);
    Ok(MomentMatrix { m, gamma })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PovmCertificate {
    pub is_rank1_consistent: bool,
    pub is_extremal: bool,
    pub is_ic: bool,
    pub is_sic: bool,
    pub min_singular_value: f64,
}

/// SIC moment-matrix entry `(1 + d·δ_{bb'}) / (d²(d+1))`.
pub fn sic_entry(d: usize, same: bool) -> f64 {
    let df = d as f64;
    (1.0 + if same { df } else { 0.0 }) / (df * df * (df + 1.0))
}

pub fn certify_povm(mm: &MomentMatrix, d: usize) -> Result<PovmCertificate> {
    let m = mm.m;
    if m < d {
        return Err(Error::InvalidPovm(format!("{m} outcomes cannot form a POVM in dimension {d}")));
    }
    let sv = mm.gamma.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let nonsingular = smax > 0.0 && smin >= SINGULAR_REL_TOL * smax;

    // for rank-1 effects Σ_b' tr(N_b N_b') = tr N_b = √Γ_bb
    let is_rank1_consistent = (0..m).all(|b| {
        let row: f64 = mm.gamma.row(b).iter().sum();
        (row - mm.gamma[(b, b)].max(0.0).sqrt()).abs() <= RANK1_TOL
    });
    let is_extremal = nonsingular && m <= d * d;
    let is_ic = nonsingular && m == d * d;
    let is_sic = is_ic
        && (0..m).all(|i| (0..m).all(|j| (mm.gamma[(i, j)] - sic_entry(d, i == j)).abs() <= SIC_TOL));
    Ok(PovmCertificate { is_rank1_consistent, is_extremal, is_ic, is_sic, min_singular_value: smin })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmSchemeCheck {
    /// Max violation of `tr(ρ^b_a N_b) = 0` (a ≠ 0) and `tr(ρ^x_a M^x_b) = δ_ab`.
    pub residual: f64,
    /// `α_b = tr(ρ^b_0 N_b)`.
    pub alphas: Vec<f64>,
}

/// Checks the statistics that identify `ρ^b_0` with the direction of `N_b`.
/// `scenario` holds one preparation basis per POVM outcome.
pub fn verify_povm_scheme_stats(scenario: &PmScenario, povm: &Povm) -> Result<PovmSchemeCheck> {
    if scenario.n() != povm.outcomes() {
        return Err(Error::DimensionMismatch { expected: povm.outcomes(), found: scenario.n() });
    }
    if scenario.d() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: scenario.d(), found: povm.dim() });
    }
    let mut residual: f64 = 0.0;
    let mut alphas = Vec::with_capacity(povm.outcomes());
    for b in 0..povm.outcomes() {
        alphas.push(povm.probability(scenario.state(b, 0), b));
        for a in 1..scenario.d() {
            residual = residual.max(povm.probability(scenario.state(b, a), b).abs());
        }
    }
    let table = scenario.born_table();
    for (k, &p) in table.entries().iter().filter(|(k, _)| k.x == k.y) {
        let expect = if k.a == k.b { 1.0 } else { 0.0 };
        residual = residual.max((p - expect).abs());
    }
    Ok(PovmSchemeCheck { residual, alphas })
}

/// Moment matrix implied by the scheme: overlaps of the `ρ^b_0` weighted by
/// the measured `α_b`.
pub fn moment_matrix_from_scheme(scenario: &PmScenario, alphas: &[f64]) -> Result<MomentMatrix> {
    let m = scenario.n();
    let mut overlaps = RealMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            overlaps[(i, j)] = fidelity_linear(scenario.state(i, 0), scenario.state(j, 0))?;
        }
    }
    moment_matrix_from_stats(&overlaps, alphas, scenario.d())
}

/// Intermediate preparation for a pair of non-orthogonal pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediatePair {
    pub pair: Option<PairIndex>,
    pub z_state: QuantumState,
    /// `1 + √tr(ρ ρ')`, the value of `tr(ρ_z(ρ + ρ'))`.
    pub target_sum: f64,
}

/// Overlaps at or below this value count as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

/// Pure state maximizing `tr(ρ_z(r1 + r2))`: the top eigenvector of `r1 + r2`.
pub fn intermediate_state(r1: &QuantumState, r2: &QuantumState) -> Result<IntermediatePair> {
    for r in [r1, r2] {
        if !r.is_pure(1e-8) {
            return Err(Error::InvalidState("intermediate state needs pure inputs".into()));
        }
    }
    let c = fidelity_linear(r1, r2)?;
    if c <= ORTHOGONAL_TOL {
        return Err(Error::OrthogonalPair);
    }
    let sum = r1.matrix() + r2.matrix();
    let (_, vectors) = linalg::hermitian_eigen(&sum);
    let top = vectors.column(vectors.ncols() - 1).clone_owned();
    let z_state = QuantumState::from_ket(&top)?;
    Ok(IntermediatePair { pair: None, z_state, target_sum: 1.0 + c.sqrt() })
}

/// Intermediate states for every `x < x'`, `a ≠ a'` pair; orthogonal pairs
/// are skipped since their overlap is already pinned at 0.
pub fn intermediate_states(scenario: &PmScenario) -> Result<Vec<IntermediatePair>> {
    let mut out = Vec::new();
    for x in 0..scenario.n() {
        for x2 in (x + 1)..scenario.n() {
            for a in 0..scenario.d() {
                for a2 in (0..scenario.d()).filter(|&a2| a2 != a) {
                    match intermediate_state(scenario.state(x, a), scenario.state(x2, a2)) {
                        Ok(mut p) => {
                            p.pair = Some(PairIndex { x, a, x2, a2 });
                            out.push(p);
                        }
                        Err(Error::OrthogonalPair) => continue,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Born table of a realization extended with `p(b | z, y)` rows.
pub fn extended_born_table(real: &ExperimentalRealization, z: &[(PairIndex, QuantumState)]) -> Result<StatTable> {
    let base = born_table(real)?;
    let mut z_entries = BTreeMap::new();
    for (pair, r) in z {
        for (y, m) in real.measurements.iter().enumerate() {
            for b in 0..m.outcomes() {
                z_entries.insert((*pair, y, b), m.probability(r, b).clamp(0.0, 1.0));
            }
        }
    }
    base.with_z_entries(z_entries)
}

/// Ideal extended table of a target scenario.
pub fn ideal_extended_table(scenario: &PmScenario) -> Result<StatTable> {
    let z: Vec<(PairIndex, QuantumState)> = intermediate_states(scenario)?
        .into_iter()
        .map(|p| (p.pair.expect("set by intermediate_states"), p.z_state))
        .collect();
    extended_born_table(&scenario.realization(), &z)
}

/// Convex mixture of extended tables: statistics of a strategy that picks
/// table `i` with probability `w_i` from shared randomness.
pub fn mixture_table(components: &[(f64, StatTable)]) -> Result<StatTable> {
    let (_, first) = components.first().ok_or(Error::EmptyInput)?;
    let mut entries: BTreeMap<StatIndex, f64> = first.entries().keys().map(|&k| (k, 0.0)).collect();
    let mut z_entries: BTreeMap<(PairIndex, usize, usize), f64> = first.z_entries().keys().map(|&k| (k, 0.0)).collect();
    for (w, t) in components {
        if t.entries().len() != entries.len() || t.z_entries().len() != z_entries.len() {
            return Err(Error::IndexMismatch("mixture components have different index sets".into()));
        }
        for (k, v) in entries.iter_mut() {
            *v += w * t.entries().get(k).ok_or_else(|| Error::IndexMismatch(format!("missing {k}")))?;
        }
        for (k, v) in z_entries.iter_mut() {
            *v += w * t.z_entries().get(k).ok_or_else(|| Error::IndexMismatch("missing z entry".into()))?;
        }
    }
    StatTable::new(entries, z_entries)
}

/// `max |p(a|z,x) + p(a'|z,x') − 1 − √p(a'|x,a,x')|` over all `z` rows.
pub fn check_sr_identity(stats: &StatTable) -> Result<f64> {
    if !stats.has_z_entries() {
        return Err(Error::MissingEntry("table has no intermediate-preparation rows".into()));
    }
    let pairs: std::collections::BTreeSet<PairIndex> = stats.z_entries().keys().map(|(z, _, _)| *z).collect();
    let mut worst: f64 = 0.0;
    for z in pairs {
        let missing = |what: String| Error::MissingEntry(what);
        let l1 = stats.z_get(z, z.x, z.a).ok_or_else(|| missing(format!("p({}|z,{}) for {z:?}", z.a, z.x)))?;
        let l2 = stats.z_get(z, z.x2, z.a2).ok_or_else(|| missing(format!("p({}|z,{}) for {z:?}", z.a2, z.x2)))?;
        let overlap = stats
            .get(z.x, z.a, z.x2, z.a2)
            .ok_or_else(|| missing(format!("p({}|{},{},{})", z.a2, z.a, z.x, z.x2)))?;
        worst = worst.max((l1 + l2 - 1.0 - overlap.max(0.0).sqrt()).abs());
    }
    Ok(worst)
}

/// `max |p(a|a,x,x) − 1|`.
pub fn perfect_correlation_defect(stats: &StatTable) -> f64 {
    stats
        .entries()
        .iter()
        .filter(|(k, _)| k.x == k.y && k.a == k.b)
        .map(|(_, &p)| (p - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Shared-randomness attack on two qubit settings: computational-basis
/// states and measurements, with setting 1 relabelled on both sides when
/// the shared bit fires (probability `q`). Each `z` preparation uses the
/// state that maximizes its sum in each round.
pub fn flip_adversary_table(q: f64) -> Result<StatTable> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange(format!("flip probability must lie in [0, 1], got {q}")));
    }
    let basis = |flip: bool| -> Result<Vec<QuantumState>> {
        let z = crate::quantum::state_from_bloch(&crate::quantum::BlochVector([0.0, 0.0, 1.0]))?;
        let o = crate::quantum::state_from_bloch(&crate::quantum::BlochVector([0.0, 0.0, -1.0]))?;
        Ok(if flip { vec![o, z] } else { vec![z, o] })
    };
    let round = |flip: bool| -> Result<StatTable> {
        let states = vec![basis(false)?, basis(flip)?];
        let measurements = vec![Povm::from_states(&basis(false)?)?, Povm::from_states(&basis(flip)?)?];
        let real = ExperimentalRealization::new(states, measurements)?;
        let mut z = Vec::new();
        for a in 0..2 {
            for a2 in (0..2).filter(|&a2| a2 != a) {
                let pair = PairIndex { x: 0, a, x2: 1, a2 };
                let sum = real.measurements[0].effect(a) + real.measurements[1].effect(a2);
                let (_, vecs) = linalg::hermitian_eigen(&sum);
                let top = QuantumState::from_ket(&vecs.column(1).clone_owned())?;
                z.push((pair, top));
            }
        }
        extended_born_table(&real, &z)
    };
    mixture_table(&[(1.0 - q, round(false)?), (q, round(true)?)])
}
