//! Robust qubit self-testing bounds built on a linearly independent subset
//! of target Bloch vectors.

use std::collections::BTreeMap;

use nalgebra::{DVector, Vector3};
use serde::Serialize;

use crate::alignment::{procrustes_bound, ProcrustesBound};
use crate::error::{Error, Result};
use crate::kernels::{f_k, o_k, purity_deficit};
use crate::linalg::{self, bisect_decreasing, cholesky, spd_inverse, MatrixNorms, RealMatrix};
use crate::scenario::PmScenario;

/// Relative singular-value threshold for the rank of the Bloch configuration.
pub const SPAN_RANK_TOL: f64 = 1e-8;

/// Largest accepted residual when expanding an off-subset vector.
pub const SPAN_RESIDUAL_TOL: f64 = 1e-8;

/// Floor of the ranking noise level used to compare subsets.
pub const RANKING_EPS_FLOOR: f64 = 1e-6;

const ROOT_TOL: f64 = 1e-14;

/// A subset `S` of settings whose outcome-0 Bloch vectors are linearly
/// independent, with everything the bounds need from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetSelection {
    pub subset: Vec<usize>,
    pub k: usize,
    #[serde(serialize_with = "serialize_matrix")]
    pub gram: RealMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub chol: RealMatrix,
    pub gram_inv_norm: f64,
    pub gram_norm: f64,
    pub gram_frob: f64,
    pub chol_norm: f64,
    /// Expansion coefficients of `n^x_a` over the subset, for `x ∉ S`.
    #[serde(serialize_with = "serialize_coeffs")]
    pub coeffs: BTreeMap<(usize, usize), Vec<f64>>,
}

fn serialize_matrix<S: serde::Serializer>(m: &RealMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

fn serialize_coeffs<S: serde::Serializer>(
    c: &BTreeMap<(usize, usize), Vec<f64>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        x: usize,
        a: usize,
        coeffs: &'a [f64],
    }
    s.collect_seq(c.iter().map(|(&(x, a), v)| Entry { x, a, coeffs: v }))
}

impl SubsetSelection {
    pub fn contains(&self, x: usize) -> bool {
        self.subset.contains(&x)
    }

    /// `‖Γ_S⁻¹‖·O_k(ε)`; the bounds require it below 1.
    pub fn validity_ratio(&self, eps: f64) -> Result<f64> {
        Ok(self.gram_inv_norm * o_k(eps, self.k)?)
    }

    fn shape_factor(&self) -> f64 {
        (self.gram_norm / self.gram_frob).min(self.chol_norm / (self.k as f64).sqrt())
    }
}

fn qubit_blochs(scenario: &PmScenario, a: usize) -> Result<Vec<Vector3<f64>>> {
    if scenario.d() != 2 {
        return Err(Error::NotQubit(scenario.d()));
    }
    (0..scenario.n()).map(|x| scenario.bloch(x, a).map(|b| b.as_vector())).collect()
}

fn rows_matrix(vectors: &[Vector3<f64>]) -> RealMatrix {
    RealMatrix::from_fn(vectors.len(), 3, |i, j| vectors[i][j])
}

/// Dimension of the span of the outcome-0 Bloch vectors.
pub fn span_rank(scenario: &PmScenario) -> Result<usize> {
    let v = qubit_blochs(scenario, 0)?;
    Ok(linalg::numerical_rank(&rows_matrix(&v), SPAN_RANK_TOL))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Builds the selection data for an explicit subset.
pub fn selection_for_subset(scenario: &PmScenario, subset: &[usize]) -> Result<SubsetSelection> {
    let n0 = qubit_blochs(scenario, 0)?;
    let n1 = qubit_blochs(scenario, 1)?;
    let k = subset.len();
    if k != 2 && k != 3 {
        return Err(Error::OutOfRange(format!("subset size must be 2 or 3, got {k}")));
    }
    if let Some(&bad) = subset.iter().find(|&&x| x >= scenario.n()) {
        return Err(Error::OutOfRange(format!("setting {bad} does not exist")));
    }
    let basis: Vec<Vector3<f64>> = subset.iter().map(|&x| n0[x]).collect();
    let gram = RealMatrix::from_fn(k, k, |i, j| basis[i].dot(&basis[j]));
    let chol = cholesky(&gram)?;
    let inv = spd_inverse(&gram)?;

    let mut coeffs = BTreeMap::new();
    for x in (0..scenario.n()).filter(|x| !subset.contains(x)) {
        for (a, v) in [(0, n0[x]), (1, n1[x])] {
            let g = DVector::from_iterator(k, basis.iter().map(|b| b.dot(&v)));
            let c = linalg::solve_cholesky(&chol, &g);
            let recon: Vector3<f64> = basis.iter().zip(c.iter()).map(|(b, ci)| b * *ci).sum();
            let residual = (recon - v).norm();
            if residual > SPAN_RESIDUAL_TOL {
                return Err(Error::OutsideSpan { x, a, residual });
            }
            coeffs.insert((x, a), c.iter().copied().collect());
        }
    }

    Ok(SubsetSelection {
        subset: subset.to_vec(),
        k,
        gram_inv_norm: inv.operator_norm(),
        gram_norm: gram.operator_norm(),
        gram_frob: gram.frobenius_norm(),
        chol_norm: chol.operator_norm(),
        gram,
        chol,
        coeffs,
    })
}

/// All admissible subsets of size equal to the span rank, in lexicographic
/// order.
pub fn candidate_subsets(scenario: &PmScenario) -> Result<Vec<SubsetSelection>> {
    let k = span_rank(scenario)?;
    if k < 2 {
        return Err(Error::DegenerateConfiguration);
    }
    let mut out = Vec::new();
    for s in combinations(scenario.n(), k) {
        match selection_for_subset(scenario, &s) {
            Ok(sel) => out.push(sel),
            Err(Error::NotPositiveDefinite { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateConfiguration);
    }
    Ok(out)
}

/// Subset minimizing `E_{S,k}` at `min(max(ε, 1e−6), ε_S/2)`, where `ε_S`
/// is the subset's validity limit. Ties keep the lexicographically first.
pub fn select_subset_at(scenario: &PmScenario, eps: f64) -> Result<SubsetSelection> {
    let mut best: Option<(f64, SubsetSelection)> = None;
    for sel in candidate_subsets(scenario)? {
        let eps_ref = eps.max(RANKING_EPS_FLOOR).min(0.5 * validity_limit(&sel));
        let e = e_sk(eps_ref, &sel)?;
        let better = match &best {
            None => true,
            Some((b, _)) => e < *b * (1.0 - 1e-12),
        };
        if better {
            best = Some((e, sel));
        }
    }
    Ok(best.expect("candidate list is nonempty").1)
}

pub fn select_subset(scenario: &PmScenario) -> Result<SubsetSelection> {
    select_subset_at(scenario, 0.0)
}

/// `E_{S,k}(ε)`; fails once `‖Γ_S⁻¹‖·O_k(ε) ≥ 1`.
pub fn e_sk(eps: f64, sel: &SubsetSelection) -> Result<f64> {
    let ratio = sel.validity_ratio(eps)?;
    if ratio >= 1.0 {
        return Err(Error::ValidityExceeded { eps, ratio });
    }
    let f = f_k(eps, sel.k)?;
    Ok(sel.gram_inv_norm * f / (2.0 * 2f64.sqrt() * (1.0 - ratio).sqrt()) * sel.shape_factor())
}

/// Root of `‖Γ_S⁻¹‖·O_k(ε) = 1`.
pub fn validity_limit(sel: &SubsetSelection) -> f64 {
    bisect_decreasing(0.0, 1.0, ROOT_TOL, |e| sel.validity_ratio(e).ok().map(|r| 1.0 - r))
}

/// Trace-distance upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceDistanceBounds {
    pub e_sk: f64,
    /// Average over `x ∈ S` for outcome 0.
    pub in_subset_a0: f64,
    /// Average over `x ∈ S` for outcome 1.
    pub in_subset_a1: f64,
    pub off_subset: Vec<OffSubsetState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffSubsetState {
    pub x: usize,
    pub a: usize,
    pub coeff_norm: f64,
    pub trace_distance: f64,
}

impl TraceDistanceBounds {
    pub fn off(&self, x: usize, a: usize) -> Option<f64> {
        self.off_subset.iter().find(|s| s.x == x && s.a == a).map(|s| s.trace_distance)
    }
}

/// Unclipped trace-distance bounds; callers clip when reporting.
pub fn trace_distance_bounds(eps: f64, sel: &SubsetSelection) -> Result<TraceDistanceBounds> {
    let e = e_sk(eps, sel)?;
    let q = sel.validity_ratio(eps)?;
    let kf = sel.k as f64;
    let off_subset = sel
        .coeffs
        .iter()
        .map(|(&(x, a), c)| {
            let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let td = kf.sqrt() * cn * e + 0.5 * kf.sqrt() * (cn + kf.sqrt() / (kf - 1.0)) * q / (1.0 - q);
            OffSubsetState { x, a, coeff_norm: cn, trace_distance: td }
        })
        .collect();
    Ok(TraceDistanceBounds { e_sk: e, in_subset_a0: e, in_subset_a1: e + 2.0 * eps.sqrt(), off_subset })
}

/// Operator-norm bounds on `U M̃^y_0 U† − M^y_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementBounds {
    pub in_subset: f64,
    /// `(y, bound)` for `y ∉ S`.
    pub off_subset: Vec<(usize, f64)>,
}

pub fn measurement_bounds(eps: f64, sel: &SubsetSelection) -> Result<MeasurementBounds> {
    let td = trace_distance_bounds(eps, sel)?;
    let s = eps.sqrt();
    let off_subset = td.off_subset.iter().filter(|o| o.a == 0).map(|o| (o.x, o.trace_distance + s)).collect();
    Ok(MeasurementBounds { in_subset: td.e_sk + s, off_subset })
}

/// Fidelity lower bounds, unclipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityBounds {
    pub in_subset_a0: f64,
    pub in_subset_a1: f64,
    /// `(x, a, bound)` for `x ∉ S`.
    pub off_subset: Vec<(usize, usize, f64)>,
    pub meas_in_subset: f64,
    pub meas_off_subset: Vec<(usize, f64)>,
    /// Average over all `2n` states.
    pub avg_state: f64,
    /// Average over the outcome-0 effects of all `n` measurements.
    pub avg_meas: f64,
}

pub fn fidelity_bounds_raw(eps: f64, sel: &SubsetSelection, n: usize) -> Result<FidelityBounds> {
    let td = trace_distance_bounds(eps, sel)?;
    let pur = purity_deficit(eps);
    let s = eps.sqrt();
    let e = td.e_sk;
    let kf = sel.k as f64;

    let in0 = 1.0 - pur - e * e;
    let in1 = 1.0 - pur - (e + 2.0 * s).powi(2);
    let off_subset: Vec<(usize, usize, f64)> =
        td.off_subset.iter().map(|o| (o.x, o.a, 1.0 - pur - o.trace_distance.powi(2))).collect();
    let meas_in = 1.0 - 2.5 * eps - (2f64.sqrt() * e + s).powi(2);
    let meas_off: Vec<(usize, f64)> = td
        .off_subset
        .iter()
        .filter(|o| o.a == 0)
        .map(|o| (o.x, 1.0 - eps - (o.trace_distance + s).powi(2)))
        .collect();

    let avg_state = (kf * (in0 + in1) + off_subset.iter().map(|t| t.2).sum::<f64>()) / (2.0 * n as f64);
    let avg_meas = (kf * meas_in + meas_off.iter().map(|t| t.1).sum::<f64>()) / n as f64;
    Ok(FidelityBounds {
        in_subset_a0: in0,
        in_subset_a1: in1,
        off_subset,
        meas_in_subset: meas_in,
        meas_off_subset: meas_off,
        avg_state,
        avg_meas,
    })
}

/// Threshold below which the average state-fidelity bound is informative:
/// the first zero of that bound, capped by the validity limit.
pub fn epsilon0(sel: &SubsetSelection, n: usize) -> f64 {
    let limit = validity_limit(sel);
    bisect_decreasing(0.0, limit, ROOT_TOL, |e| fidelity_bounds_raw(e, sel, n).ok().map(|f| f.avg_state))
}

/// Threshold of the Procrustes route: end of its first branch
/// (`‖L‡‖²F_m(ε) = 1`) or the first zero of its bound, whichever is smaller.
pub fn procrustes_epsilon0(rows: &RealMatrix) -> Result<f64> {
    procrustes_bound(0.0, rows)?;
    Ok(bisect_decreasing(0.0, 1.0 / 3.0, ROOT_TOL, |e| {
        procrustes_bound(e, rows).ok().filter(|p| p.branch).map(|p| p.fidelity_lower)
    }))
}

/// Small-ε slope `C` of `1 − bound(ε) ≈ Cε`, by Richardson extrapolation
/// over the `√ε` correction.
pub fn slope_at_zero<F: Fn(f64) -> Result<f64>>(bound: F) -> Result<f64> {
    let h = 1e-7;
    let g = |e: f64| bound(e).map(|v| (1.0 - v) / e);
    let (g1, g2) = (g(h)?, g(0.5 * h)?);
    let r = 2f64.sqrt();
    Ok((r * g2 - g1) / (r - 1.0))
}

/// `C` for the average state-fidelity bound of the given subset.
pub fn asymptotic_constant(scenario: &PmScenario, sel: &SubsetSelection) -> Result<f64> {
    let n = scenario.n();
    slope_at_zero(|e| fidelity_bounds_raw(e, sel, n).map(|f| f.avg_state))
}

/// Outcome-0 Bloch vectors as rows.
pub fn outcome0_rows(scenario: &PmScenario) -> Result<RealMatrix> {
    Ok(rows_matrix(&qubit_blochs(scenario, 0)?))
}

pub fn procrustes_constant(rows: &RealMatrix) -> Result<f64> {
    slope_at_zero(|e| procrustes_bound(e, rows).map(|p| p.fidelity_lower))
}

/// Bounds for one noise level. `bounds` is present whenever ε is below the
/// validity limit; `valid` additionally requires ε < ε₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestBounds {
    pub epsilon: f64,
    pub epsilon0: f64,
    pub validity_limit: f64,
    pub subset: Vec<usize>,
    pub k: usize,
    pub valid: bool,
    pub bounds: Option<BoundSet>,
    /// Procrustes-route bound over the outcome-0 states.
    pub procrustes: Option<ProcrustesBound>,
}

/// Reported bounds: trace distances clipped to `[0, 1]`, fidelities to
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSet {
    pub e_sk: f64,
    pub trace_distance: TraceDistanceBounds,
    pub measurement_norm: MeasurementBounds,
    pub fidelity: FidelityBounds,
    pub avg_state_fidelity_lower: f64,
    pub avg_meas_fidelity_lower: f64,
    /// Set when the average state-fidelity bound was clipped at 0.
    pub vacuous: bool,
}

fn clip01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn clipped(td: &TraceDistanceBounds, mb: &MeasurementBounds, fb: &FidelityBounds) -> (TraceDistanceBounds, MeasurementBounds, FidelityBounds) {
    let td = TraceDistanceBounds {
        e_sk: td.e_sk,
        in_subset_a0: clip01(td.in_subset_a0),
        in_subset_a1: clip01(td.in_subset_a1),
        off_subset: td
            .off_subset
            .iter()
            .map(|o| OffSubsetState { trace_distance: clip01(o.trace_distance), ..o.clone() })
            .collect(),
    };
    let mb = MeasurementBounds {
        in_subset: clip01(mb.in_subset),
        off_subset: mb.off_subset.iter().map(|&(y, v)| (y, clip01(v))).collect(),
    };
    let fb = FidelityBounds {
        in_subset_a0: clip01(fb.in_subset_a0),
        in_subset_a1: clip01(fb.in_subset_a1),
        off_subset: fb.off_subset.iter().map(|&(x, a, v)| (x, a, clip01(v))).collect(),
        meas_in_subset: clip01(fb.meas_in_subset),
        meas_off_subset: fb.meas_off_subset.iter().map(|&(y, v)| (y, clip01(v))).collect(),
        avg_state: clip01(fb.avg_state),
        avg_meas: clip01(fb.avg_meas),
    };
    (td, mb, fb)
}

/// Full bound set for a given subset.
pub fn fidelity_bounds(eps: f64, sel: &SubsetSelection, scenario: &PmScenario) -> Result<SelfTestBounds> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::OutOfRange(format!("epsilon must be nonnegative, got {eps}")));
    }
    let n = scenario.n();
    let limit = validity_limit(sel);
    let eps0 = epsilon0(sel, n);
    let bounds = if eps < limit {
        let td = trace_distance_bounds(eps, sel)?;
        let mb = measurement_bounds(eps, sel)?;
        let fb = fidelity_bounds_raw(eps, sel, n)?;
        let (td_c, mb_c, fb_c) = clipped(&td, &mb, &fb);
        Some(BoundSet {
            e_sk: td.e_sk,
            avg_state_fidelity_lower: fb_c.avg_state,
            avg_meas_fidelity_lower: fb_c.avg_meas,
            vacuous: fb.avg_state <= 0.0,
            trace_distance: td_c,
            measurement_norm: mb_c,
            fidelity: fb_c,
        })
    } else {
        None
    };
    let rows = outcome0_rows(scenario)?;
    let procrustes = procrustes_bound(eps, &rows).ok();
    Ok(SelfTestBounds {
        epsilon: eps,
        epsilon0: eps0,
        validity_limit: limit,
        subset: sel.subset.clone(),
        k: sel.k,
        valid: eps < eps0,
        bounds,
        procrustes,
    })
}

/// Selects the subset for this ε and evaluates every bound.
pub fn self_test(eps: f64, scenario: &PmScenario) -> Result<SelfTestBounds> {
    let sel = select_subset_at(scenario, eps)?;
    fidelity_bounds(eps, &sel, scenario)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub avg_fid_state: Option<f64>,
    pub avg_fid_state_a1: Option<f64>,
    pub avg_fid_state_a2: Option<f64>,
    pub avg_fid_meas: Option<f64>,
    pub procrustes: Option<f64>,
    pub valid: bool,
}

/// Bound curves over an ε grid with a fixed subset.
pub fn sweep(scenario: &PmScenario, sel: &SubsetSelection, grid: &[f64]) -> Result<Vec<SweepRow>> {
    let rows = outcome0_rows(scenario)?;
    grid.iter()
        .map(|&e| {
            let b = fidelity_bounds(e, sel, scenario)?;
            let set = b.bounds.as_ref();
            Ok(SweepRow {
                epsilon: e,
                avg_fid_state: set.map(|s| s.avg_state_fidelity_lower),
                avg_fid_state_a1: set.map(|s| s.fidelity.in_subset_a0),
                avg_fid_state_a2: set.map(|s| s.fidelity.in_subset_a1),
                avg_fid_meas: set.map(|s| s.avg_meas_fidelity_lower),
                procrustes: procrustes_bound(e, &rows).ok().map(|p| clip01(p.fidelity_lower)),
                valid: b.valid,
            })
        })
        .collect()
}

/// Evenly spaced grid `0, h, …, eps_max` with `steps` points.
pub fn linear_grid(eps_max: f64, steps: usize) -> Vec<f64> {
    if steps < 2 {
        return vec![0.0];
    }
    (0..steps).map(|i| eps_max * i as f64 / (steps - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use approx::assert_relative_eq;

    #[test]
    fn e_sk_examples() {
        let s = catalog::mub2();
        let sel = select_subset(&s).unwrap();
        assert_eq!(e_sk(0.0, &sel).unwrap(), 0.0);
        let expected = f_k(0.01, 2).unwrap() / (2.0 * 2f64.sqrt() * 0.74f64.sqrt()) / 2f64.sqrt();
        assert_relative_eq!(e_sk(0.01, &sel).unwrap(), expected, epsilon = 1e-14);
        assert_relative_eq!(e_sk(0.01, &sel).unwrap(), 0.09190, epsilon = 1e-5);
        assert!(matches!(e_sk(0.08, &sel), Err(Error::ValidityExceeded { .. })));
    }

    #[test]
    fn validity_limit_matches_closed_form() {
        for alpha in [0.0, 0.3, 0.5, 0.8] {
            let sel = select_subset(&catalog::biased(alpha).unwrap()).unwrap();
            let closed = (4.0 - 3.0 * alpha - (7.0 - 6.0 * alpha).sqrt()) / 18.0;
            assert_relative_eq!(validity_limit(&sel), closed, epsilon = 1e-12);
        }
    }

    #[test]
    fn subset_examples() {
        let sel = select_subset(&catalog::mub3()).unwrap();
        assert_eq!(sel.subset, vec![0, 1, 2]);
        assert_relative_eq!(sel.gram, RealMatrix::identity(3, 3), epsilon = 1e-14);

        let sel = select_subset(&catalog::biased(0.5).unwrap()).unwrap();
        assert_eq!(sel.subset, vec![0, 1]);
        let g = RealMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        assert_relative_eq!(sel.gram, g, epsilon = 1e-14);

        let sel = select_subset(&catalog::trine()).unwrap();
        assert_eq!(sel.k, 2);
        assert_eq!(sel.subset, vec![0, 1]);
        assert_relative_eq!(sel.gram[(0, 1)], -0.5, epsilon = 1e-14);
        let c = &sel.coeffs[&(2, 0)];
        assert_relative_eq!(c[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(c[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_configuration_is_rejected() {
        let s = PmScenario::from_qubit_bloch(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]).unwrap();
        assert!(matches!(select_subset(&s), Err(Error::DegenerateConfiguration)));
        assert!(matches!(catalog::biased(1.0).map(|s| select_subset(&s)), Ok(Err(Error::DegenerateConfiguration))));
    }

    #[test]
    fn trace_distance_examples() {
        let s = catalog::mub2();
        let sel = select_subset(&s).unwrap();
        let td = trace_distance_bounds(0.0, &sel).unwrap();
        assert_eq!((td.in_subset_a0, td.in_subset_a1), (0.0, 0.0));
        let td = trace_distance_bounds(0.01, &sel).unwrap();
        assert_relative_eq!(td.in_subset_a0, 0.09190, epsilon = 1e-5);
        assert_relative_eq!(td.in_subset_a1, 0.29190, epsilon = 1e-5);
        let mb = measurement_bounds(0.01, &sel).unwrap();
        assert_relative_eq!(mb.in_subset, 0.19190, epsilon = 1e-5);
    }

    #[test]
    fn off_subset_measurement_bound_composes() {
        let s = catalog::trine();
        let sel = select_subset(&s).unwrap();
        let td = trace_distance_bounds(0.001, &sel).unwrap();
        let mb = measurement_bounds(0.001, &sel).unwrap();
        let (y, v) = mb.off_subset[0];
        assert_relative_eq!(v, td.off(y, 0).unwrap() + 0.001f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn fidelity_at_zero_is_one() {
        for s in [catalog::mub2(), catalog::mub3(), catalog::trine(), catalog::tetrahedron()] {
            let b = self_test(0.0, &s).unwrap();
            let set = b.bounds.unwrap();
            assert_eq!(set.avg_state_fidelity_lower, 1.0);
            assert_eq!(set.avg_meas_fidelity_lower, 1.0);
            assert!(b.valid);
        }
    }

    #[test]
    fn asymptotic_constants() {
        let s = catalog::mub2();
        let c = asymptotic_constant(&s, &select_subset(&s).unwrap()).unwrap();
        assert_relative_eq!(c, 3.5 + 2f64.sqrt(), max_relative = 1e-4);
        let s = catalog::mub3();
        let c = asymptotic_constant(&s, &select_subset(&s).unwrap()).unwrap();
        assert_relative_eq!(c, 6.0, max_relative = 1e-4);
    }

    #[test]
    fn bounds_absent_past_validity() {
        let s = catalog::mub2();
        let b = self_test(0.08, &s).unwrap();
        assert!(b.bounds.is_none());
        assert!(!b.valid);
    }

    #[test]
    fn grid_of_zero() {
        let s = catalog::mub2();
        let sel = select_subset(&s).unwrap();
        let rows = sweep(&s, &sel, &[0.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].avg_fid_state, Some(1.0));
    }
}
