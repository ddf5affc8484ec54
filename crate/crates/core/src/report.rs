//! Certification reports, threshold tables and sweep CSV.

use std::fmt::Write as _;

use serde::Serialize;

use crate::alignment::{best_alignment, best_measurement_fidelity, Alignment};
use crate::catalog;
use crate::error::{Error, Result};
use crate::extensions::{certify_povm, MomentMatrix, PovmCertificate};
use crate::overlap::{certify, OverlapCertificate};
use crate::quantum::Povm;
use crate::scenario::{ExperimentalRealization, PmScenario, StatTable};
use crate::selftest::{
    asymptotic_constant, epsilon0, outcome0_rows, procrustes_constant, procrustes_epsilon0, select_subset,
    select_subset_at, self_test, sweep, SelfTestBounds, SweepRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Certified,
    Vacuous,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Certified => 0,
            Status::Vacuous => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub alignment: Alignment,
    pub achieved_state_fidelity: f64,
    pub best_measurement_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub scenario: String,
    pub epsilon: f64,
    pub status: Status,
    pub overlap: OverlapCertificate,
    pub self_test: Option<SelfTestBounds>,
    pub alignment: Option<AlignmentReport>,
    pub povm: Option<PovmCertificate>,
    pub warnings: Vec<String>,
}

/// Runs every applicable certification step on one statistics table.
pub fn build_report(
    name: &str,
    scenario: &PmScenario,
    stats: &StatTable,
    realization: Option<&ExperimentalRealization>,
    povm: Option<&Povm>,
) -> Result<CertReport> {
    let overlap = certify(stats, scenario)?;
    let eps = overlap.epsilon.value();
    let mut warnings = Vec::new();
    if overlap.qubit.is_some_and(|q| q.fallback) {
        warnings.push("epsilon above 1/3: qubit refinements replaced by general tolerances".into());
    }

    let self_test = if scenario.d() == 2 {
        match self_test(eps, scenario) {
            Ok(b) => Some(b),
            Err(Error::DegenerateConfiguration) => {
                warnings.push("target Bloch vectors span fewer than two dimensions; no self-testing bounds".into());
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let status = match &self_test {
        Some(b) if !b.valid => {
            warnings.push(format!("epsilon {eps} is not below the threshold {}; fidelity bounds are vacuous", b.epsilon0));
            Status::Vacuous
        }
        _ => Status::Certified,
    };

    let alignment = match realization {
        Some(r) if scenario.d() == 2 => {
            let alignment = best_alignment(scenario, r)?;
            Some(AlignmentReport {
                achieved_state_fidelity: alignment.achieved_avg_fidelity,
                best_measurement_fidelity: best_measurement_fidelity(scenario, r)?,
                alignment,
            })
        }
        Some(_) => {
            warnings.push("alignment is only available for qubits".into());
            None
        }
        None => None,
    };
    let povm = povm.map(|p| certify_povm(&MomentMatrix::from_povm(p), p.dim())).transpose()?;

    Ok(CertReport { scenario: name.to_string(), epsilon: eps, status, overlap, self_test, alignment, povm, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Cholesky-factor perturbation over a linearly independent subset.
    Cholesky,
    /// Orthogonal Procrustes over all outcome-0 states.
    Procrustes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub label: String,
    pub route: Route,
    pub epsilon0: f64,
    pub epsilon0_reference: f64,
    pub constant: f64,
    pub constant_reference: f64,
}

pub const EPSILON0_TOL: f64 = 1e-3;
pub const CONSTANT_REL_TOL: f64 = 1e-3;

impl ThresholdRow {
    pub fn epsilon0_ok(&self) -> bool {
        (self.epsilon0 - self.epsilon0_reference).abs() <= EPSILON0_TOL
    }

    pub fn constant_ok(&self) -> bool {
        (self.constant - self.constant_reference).abs() <= CONSTANT_REL_TOL * self.constant_reference.abs()
    }
}

/// Closed-form threshold of the biased pair.
pub fn biased_epsilon0_reference(alpha: f64) -> f64 {
    (4.0 - 3.0 * alpha - (7.0 - 6.0 * alpha).sqrt()) / 18.0
}

/// Closed-form small-ε slope of the biased pair.
pub fn biased_constant_reference(alpha: f64) -> f64 {
    let t = 1.0 + (1.0 + alpha).sqrt() / (2f64.sqrt() * (1.0 - alpha));
    2.0 + t * t
}

fn cholesky_row(label: &str, s: &PmScenario, e0_ref: f64, c_ref: f64) -> Result<ThresholdRow> {
    let sel = select_subset(s)?;
    Ok(ThresholdRow {
        label: label.to_string(),
        route: Route::Cholesky,
        epsilon0: epsilon0(&sel, s.n()),
        epsilon0_reference: e0_ref,
        constant: asymptotic_constant(s, &sel)?,
        constant_reference: c_ref,
    })
}

fn procrustes_row(label: &str, s: &PmScenario, e0_ref: f64, c_ref: f64) -> Result<ThresholdRow> {
    let rows = outcome0_rows(s)?;
    Ok(ThresholdRow {
        label: label.to_string(),
        route: Route::Procrustes,
        epsilon0: procrustes_epsilon0(&rows)?,
        epsilon0_reference: e0_ref,
        constant: procrustes_constant(&rows)?,
        constant_reference: c_ref,
    })
}

/// Thresholds and slopes for the five reference configurations.
pub fn threshold_table(alpha: f64) -> Result<Vec<ThresholdRow>> {
    Ok(vec![
        cholesky_row("2 MUBs", &catalog::mub2(), 0.062, 3.5 + 2f64.sqrt())?,
        cholesky_row("3 MUBs", &catalog::mub3(), 0.030, 6.0)?,
        procrustes_row("trine", &catalog::trine(), 0.058, 19.0 / 3.0)?,
        procrustes_row("tetrahedron", &catalog::tetrahedron(), 0.037, 10.0)?,
        cholesky_row(
            &format!("biased alpha={alpha}"),
            &catalog::biased(alpha)?,
            biased_epsilon0_reference(alpha),
            biased_constant_reference(alpha),
        )?,
    ])
}

pub fn format_threshold_table(rows: &[ThresholdRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<10} {:>10} {:>10} {:>4} {:>10} {:>10} {:>4}",
        "scenario", "route", "eps0", "ref", "ok", "C", "ref", "ok"
    );
    for r in rows {
        let mark = |ok: bool| if ok { "yes" } else { "no" };
        let _ = writeln!(
            out,
            "{:<18} {:<10} {:>10.5} {:>10.5} {:>4} {:>10.5} {:>10.5} {:>4}",
            r.label,
            format!("{:?}", r.route).to_lowercase(),
            r.epsilon0,
            r.epsilon0_reference,
            mark(r.epsilon0_ok()),
            r.constant,
            r.constant_reference,
            mark(r.constant_ok()),
        );
    }
    out
}

/// Sweep over `[0, eps_max]` with the subset selected at ε = 0. Grid points
/// at or past the larger of the two thresholds are dropped with a warning.
pub fn sweep_scenario(scenario: &PmScenario, eps_max: f64, steps: usize) -> Result<(Vec<SweepRow>, Option<String>)> {
    if steps < 2 {
        return Err(Error::OutOfRange(format!("need at least 2 steps, got {steps}")));
    }
    if !eps_max.is_finite() || eps_max <= 0.0 {
        return Err(Error::OutOfRange(format!("eps_max must be positive, got {eps_max}")));
    }
    let sel = select_subset_at(scenario, 0.0)?;
    let threshold = epsilon0(&sel, scenario.n()).max(procrustes_epsilon0(&outcome0_rows(scenario)?).unwrap_or(0.0));
    let grid: Vec<f64> = crate::selftest::linear_grid(eps_max, steps).into_iter().filter(|&e| e < threshold).collect();
    let warning = (eps_max >= threshold)
        .then(|| format!("eps_max {eps_max} reaches the threshold {threshold}; sweep truncated to {} points", grid.len()));
    Ok((sweep(scenario, &sel, &grid)?, warning))
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("epsilon,avg_fid_state,avg_fid_state_a1,avg_fid_state_a2,avg_fid_meas,procrustes,valid\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.epsilon,
            csv_cell(r.avg_fid_state),
            csv_cell(r.avg_fid_state_a1),
            csv_cell(r.avg_fid_state_a2),
            csv_cell(r.avg_fid_meas),
            csv_cell(r.procrustes),
            r.valid
        );
    }
    out
}
