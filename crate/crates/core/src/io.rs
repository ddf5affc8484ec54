//! JSON encodings of scenarios, statistics tables and realizations.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::{Povm, QuantumState};
use crate::scenario::{ExperimentalRealization, PairIndex, PmScenario, StatIndex, StatTable};

/// `[re, im]` pairs, row-major.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(r) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: r.len() });
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Target scenario: qubit Bloch vectors of outcome 0, or kets per setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kets: Option<Vec<Vec<Vec<[f64; 2]>>>>,
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Result<PmScenario> {
        match (&self.bloch, &self.kets) {
            (Some(b), None) => PmScenario::from_qubit_bloch(b),
            (None, Some(k)) => {
                let kets: Vec<Vec<DVector<Complex64>>> = k
                    .iter()
                    .map(|basis| {
                        basis
                            .iter()
                            .map(|v| DVector::from_iterator(v.len(), v.iter().map(|c| Complex64::new(c[0], c[1]))))
                            .collect()
                    })
                    .collect();
                PmScenario::from_kets(&kets)
            }
            _ => Err(Error::InvalidScenario("exactly one of `bloch` or `kets` is required".into())),
        }
    }
}

/// One row of a statistics file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatEntry {
    Standard { x: usize, a: usize, y: usize, b: usize, p: f64 },
    Intermediate { z: [usize; 4], y: usize, b: usize, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    /// Deviation from the target as computed by the producer, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub entries: Vec<StatEntry>,
}

impl StatsFile {
    pub fn from_table(t: &StatTable, epsilon: Option<f64>) -> Self {
        let mut entries: Vec<StatEntry> =
            t.entries().iter().map(|(k, &p)| StatEntry::Standard { x: k.x, a: k.a, y: k.y, b: k.b, p }).collect();
        entries.extend(t.z_entries().iter().map(|((z, y, b), &p)| StatEntry::Intermediate {
            z: [z.x, z.a, z.x2, z.a2],
            y: *y,
            b: *b,
            p,
        }));
        Self { epsilon, entries }
    }

    pub fn to_table(&self) -> Result<StatTable> {
        let mut entries = BTreeMap::new();
        let mut z_entries = BTreeMap::new();
        for e in &self.entries {
            let dup = match *e {
                StatEntry::Standard { x, a, y, b, p } => entries.insert(StatIndex { x, a, y, b }, p).is_some(),
                StatEntry::Intermediate { z, y, b, p } => {
                    let pair = PairIndex { x: z[0], a: z[1], x2: z[2], a2: z[3] };
                    z_entries.insert((pair, y, b), p).is_some()
                }
            };
            if dup {
                return Err(Error::InvalidStatistics(format!("duplicate entry {e:?}")));
            }
        }
        StatTable::new(entries, z_entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationFile {
    /// `states[x][a]`.
    pub states: Vec<Vec<MatrixJson>>,
    /// `measurements[y][b]`.
    pub measurements: Vec<Vec<MatrixJson>>,
}

impl RealizationFile {
    pub fn from_realization(r: &ExperimentalRealization) -> Self {
        Self {
            states: r.states.iter().map(|s| s.iter().map(|q| matrix_to_json(q.matrix())).collect()).collect(),
            measurements: r.measurements.iter().map(|m| m.effects().iter().map(matrix_to_json).collect()).collect(),
        }
    }

    pub fn to_realization(&self) -> Result<ExperimentalRealization> {
        let states = self
            .states
            .iter()
            .map(|s| s.iter().map(|m| QuantumState::new(matrix_from_json(m)?)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let measurements = self
            .measurements
            .iter()
            .map(|m| Povm::new(m.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?))
            .collect::<Result<Vec<_>>>()?;
        ExperimentalRealization::new(states, measurements)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_stats(path: &Path) -> Result<StatsFile> {
    read_json(path)
}

pub fn read_realization(path: &Path) -> Result<ExperimentalRealization> {
    read_json::<RealizationFile>(path)?.to_realization()
}

pub fn read_scenario_file(path: &Path) -> Result<PmScenario> {
    read_json::<ScenarioFile>(path)?.to_scenario()
}

/// Catalog name, or a path to a scenario file when no catalog entry matches.
pub fn resolve_scenario(spec: &str, alpha: Option<f64>) -> Result<PmScenario> {
    match catalog::by_name(spec, alpha) {
        Err(Error::UnknownScenario(_)) if Path::new(spec).is_file() => read_scenario_file(Path::new(spec)),
        other => other,
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
