//! Target configurations, probability tables and the deviation ε.
//!
//! All indices (`x`, `a`, `y`, `b`) are 0-based.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::quantum::{bloch_from_state, state_from_bloch, BlochVector, Povm, QuantumState};

/// Purity and completeness tolerance for target states.
pub const TARGET_TOL: f64 = 1e-8;

/// Row-normalization and range tolerance for probability tables.
pub const STAT_TOL: f64 = 1e-8;

/// Target scenario. Measurement `y` is the projective measurement onto the
/// basis `{ρ^y_b}_b`, so targets satisfy `M^x_a = ρ^x_a` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PmScenario {
    d: usize,
    states: Vec<Vec<QuantumState>>,
}

impl PmScenario {
    pub fn new(states: Vec<Vec<QuantumState>>) -> Result<Self> {
        let first = states.first().ok_or(Error::EmptyInput)?;
        let d = first.len();
        if d < 2 {
            return Err(Error::InvalidScenario("need at least two outcomes per setting".into()));
        }
        for (x, basis) in states.iter().enumerate() {
            if basis.len() != d {
                return Err(Error::InvalidScenario(format!(
                    "setting {x} has {} states, expected {d}",
                    basis.len()
                )));
            }
            let mut sum = linalg::ComplexMatrix::zeros(d, d);
            for (a, r) in basis.iter().enumerate() {
                if r.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: r.dim() });
                }
                if !r.is_pure(TARGET_TOL) {
                    return Err(Error::InvalidScenario(format!("target state ({x}, {a}) is not pure")));
                }
                sum += r.matrix();
            }
            let defect = (sum - linalg::complex_identity(d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if defect > TARGET_TOL {
                return Err(Error::InvalidScenario(format!(
                    "states of setting {x} do not sum to the identity (defect {defect:e})"
                )));
            }
        }
        Ok(Self { d, states })
    }

    /// Qubit scenario where setting `x` is the basis `{n_x, −n_x}`.
    pub fn from_qubit_bloch(vectors: &[[f64; 3]]) -> Result<Self> {
        let mut states = Vec::with_capacity(vectors.len());
        for (x, v) in vectors.iter().enumerate() {
            let n = BlochVector::new(*v)?;
            if (n.norm() - 1.0).abs() > TARGET_TOL {
                return Err(Error::InvalidScenario(format!("Bloch vector {x} is not a unit vector")));
            }
            states.push(vec![state_from_bloch(&n)?, state_from_bloch(&n.negated())?]);
        }
        Self::new(states)
    }

    /// Scenario from kets: `kets[x][a]`.
    pub fn from_kets(kets: &[Vec<DVector<Complex64>>]) -> Result<Self> {
        let states = kets
            .iter()
            .map(|basis| basis.iter().map(QuantumState::from_ket).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }

    /// Number of settings.
    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn state(&self, x: usize, a: usize) -> &QuantumState {
        &self.states[x][a]
    }

    pub fn states(&self) -> &[Vec<QuantumState>] {
        &self.states
    }

    pub fn measurement(&self, y: usize) -> Povm {
        Povm::from_states(&self.states[y]).expect("target bases were validated")
    }

    pub fn measurements(&self) -> Vec<Povm> {
        (0..self.n()).map(|y| self.measurement(y)).collect()
    }

    /// Bloch vector of `ρ^x_a` (qubits only).
    pub fn bloch(&self, x: usize, a: usize) -> Result<BlochVector> {
        bloch_from_state(&self.states[x][a])
    }

    /// The target scenario viewed as an experimental realization.
    pub fn realization(&self) -> ExperimentalRealization {
        ExperimentalRealization { states: self.states.clone(), measurements: self.measurements() }
    }

    pub fn born_table(&self) -> StatTable {
        born_table(&self.realization()).expect("target realization is consistent")
    }
}

/// Experimental counterparts `ρ̃^x_a` and `M̃^y`; no purity or projectivity
/// requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentalRealization {
    pub states: Vec<Vec<QuantumState>>,
    pub measurements: Vec<Povm>,
}

impl ExperimentalRealization {
    pub fn new(states: Vec<Vec<QuantumState>>, measurements: Vec<Povm>) -> Result<Self> {
        let r = Self { states, measurements };
        r.dim()?;
        Ok(r)
    }

    /// Common Hilbert-space dimension of all states and effects.
    pub fn dim(&self) -> Result<usize> {
        let d = self
            .states
            .first()
            .and_then(|b| b.first())
            .map(|r| r.dim())
            .ok_or(Error::EmptyInput)?;
        for r in self.states.iter().flatten() {
            if r.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: r.dim() });
            }
        }
        for m in &self.measurements {
            if m.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
            }
        }
        Ok(d)
    }

    pub fn state(&self, x: usize, a: usize) -> &QuantumState {
        &self.states[x][a]
    }
}

/// Key of a probability `p(b | a, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StatIndex {
    pub x: usize,
    pub a: usize,
    pub y: usize,
    pub b: usize,
}

impl fmt::Display for StatIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={}, a={}, y={}, b={})", self.x, self.a, self.y, self.b)
    }
}

/// Pair of preparations `((x, a), (x2, a2))` labelling an intermediate
/// preparation `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairIndex {
    pub x: usize,
    pub a: usize,
    pub x2: usize,
    pub a2: usize,
}

/// Probability table `p(b | a, x, y)`, optionally extended with rows
/// `p(b | z, y)` for intermediate preparations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StatTable {
    entries: BTreeMap<StatIndex, f64>,
    z_entries: BTreeMap<(PairIndex, usize, usize), f64>,
}

fn check_probability(p: f64, what: &dyn fmt::Display) -> Result<()> {
    if !p.is_finite() || !(-STAT_TOL..=1.0 + STAT_TOL).contains(&p) {
        return Err(Error::InvalidStatistics(format!("probability {p} at {what} is outside [0, 1]")));
    }
    Ok(())
}

impl StatTable {
    /// Validated table: entries in `[0, 1]`, every `(x, a, y)` row and every
    /// `(z, y)` row summing to 1.
    pub fn new(
        entries: BTreeMap<StatIndex, f64>,
        z_entries: BTreeMap<(PairIndex, usize, usize), f64>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut rows: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for (k, &p) in &entries {
            check_probability(p, k)?;
            *rows.entry((k.x, k.a, k.y)).or_default() += p;
        }
        for ((x, a, y), s) in rows {
            if (s - 1.0).abs() > STAT_TOL {
                return Err(Error::InvalidStatistics(format!(
                    "row (x={x}, a={a}, y={y}) sums to {s}"
                )));
            }
        }
        let mut zrows: BTreeMap<(PairIndex, usize), f64> = BTreeMap::new();
        for (&(z, y, b), &p) in &z_entries {
            check_probability(p, &format!("(z={z:?}, y={y}, b={b})"))?;
            *zrows.entry((z, y)).or_default() += p;
        }
        for ((z, y), s) in zrows {
            if (s - 1.0).abs() > STAT_TOL {
                return Err(Error::InvalidStatistics(format!("row (z={z:?}, y={y}) sums to {s}")));
            }
        }
        Ok(Self { entries, z_entries })
    }

    pub fn from_entries<I: IntoIterator<Item = (StatIndex, f64)>>(entries: I) -> Result<Self> {
        Self::new(entries.into_iter().collect(), BTreeMap::new())
    }

    pub fn get(&self, x: usize, a: usize, y: usize, b: usize) -> Option<f64> {
        self.entries.get(&StatIndex { x, a, y, b }).copied()
    }

    pub fn entries(&self) -> &BTreeMap<StatIndex, f64> {
        &self.entries
    }

    pub fn z_entries(&self) -> &BTreeMap<(PairIndex, usize, usize), f64> {
        &self.z_entries
    }

    pub fn z_get(&self, z: PairIndex, y: usize, b: usize) -> Option<f64> {
        self.z_entries.get(&(z, y, b)).copied()
    }

    pub fn has_z_entries(&self) -> bool {
        !self.z_entries.is_empty()
    }

    /// Same table with the intermediate-preparation rows replaced.
    pub fn with_z_entries(&self, z_entries: BTreeMap<(PairIndex, usize, usize), f64>) -> Result<Self> {
        Self::new(self.entries.clone(), z_entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Worst-case entrywise deviation of observed statistics from the target.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::OutOfRange(format!("epsilon must be finite and nonnegative, got {value}")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Exact Born table `tr(ρ̃^x_a M̃^y_b)`.
pub fn born_table(real: &ExperimentalRealization) -> Result<StatTable> {
    real.dim()?;
    let mut entries = BTreeMap::new();
    for (x, basis) in real.states.iter().enumerate() {
        for (a, r) in basis.iter().enumerate() {
            for (y, m) in real.measurements.iter().enumerate() {
                let probs: Vec<f64> = (0..m.outcomes()).map(|b| m.probability(r, b).clamp(0.0, 1.0)).collect();
                for (b, p) in probs.into_iter().enumerate() {
                    entries.insert(StatIndex { x, a, y, b }, p);
                }
            }
        }
    }
    StatTable::new(entries, BTreeMap::new())
}

/// `max |p̃(b|a,x,y) − tr(ρ^x_a M^y_b)|` over the full index set, which must
/// match the target table exactly.
pub fn deviation_epsilon(observed: &StatTable, scenario: &PmScenario) -> Result<Epsilon> {
    let target = scenario.born_table();
    if let Some(k) = observed.entries().keys().find(|k| !target.entries().contains_key(k)) {
        return Err(Error::IndexMismatch(format!("observed entry {k} is not part of the scenario")));
    }
    let mut eps: f64 = 0.0;
    for (k, &p) in target.entries() {
        let q = observed
            .entries()
            .get(k)
            .ok_or_else(|| Error::IndexMismatch(format!("observed table lacks entry {k}")))?;
        eps = eps.max((q - p).abs());
    }
    Epsilon::new(eps)
}
