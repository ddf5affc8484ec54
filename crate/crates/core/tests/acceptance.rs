//! Acceptance checks. Each test prints one PASS/FAIL line per sub-check and
//! fails if any sub-check fails.

use std::time::Instant;

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use pmcert::alignment::{align_states, best_alignment, procrustes_bound, so3_from_su2, su2_from_so3};
use pmcert::catalog;
use pmcert::extensions::{
    certify_povm, check_sr_identity, flip_adversary_table, intermediate_state, moment_matrix_from_stats,
    perfect_correlation_defect,
};
use pmcert::kernels::{higham_bound, sun_cholesky_bound};
use pmcert::linalg::{cholesky, spd_inverse, ComplexMatrix, MatrixNorms, RealMatrix};
use pmcert::noise::{perturb_composed, NoiseKind, NoiseSpec};
use pmcert::overlap::{certify, qubit_refinements, tightness_fixture_dim, tightness_fixture_qubit};
use pmcert::quantum::{fidelity_linear, state_from_bloch, BlochVector, Povm, QuantumState};
use pmcert::report::{threshold_table, EPSILON0_TOL};
use pmcert::scenario::{born_table, deviation_epsilon, Epsilon, ExperimentalRealization, PmScenario};
use pmcert::selftest::{
    epsilon0, fidelity_bounds_raw, outcome0_rows, select_subset, select_subset_at, self_test, sweep, linear_grid,
};

struct Checks {
    criterion: u32,
    failed: Vec<String>,
}

impl Checks {
    fn new(criterion: u32) -> Self {
        Self { criterion, failed: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        println!("{} criterion {}: {}", if ok { "PASS" } else { "FAIL" }, self.criterion, what);
        if !ok {
            self.failed.push(what);
        }
    }

    fn finish(self) {
        assert!(self.failed.is_empty(), "criterion {} failed: {:#?}", self.criterion, self.failed);
    }
}

#[test]
fn criterion_1_threshold_table() {
    let mut c = Checks::new(1);
    let start = Instant::now();
    let rows = threshold_table(0.5).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    for r in &rows {
        c.check(
            r.epsilon0_ok(),
            format!("{} eps0 {:.5} vs {:.5} (tol {EPSILON0_TOL})", r.label, r.epsilon0, r.epsilon0_reference),
        );
        c.check(r.constant_ok(), format!("{} C {:.5} vs {:.5} (rel 1e-3)", r.label, r.constant, r.constant_reference));
    }
    c.check(elapsed < 1.0, format!("runtime {elapsed:.3} s < 1 s"));
    c.finish();
}

#[test]
fn criterion_2_anchor_point() {
    let mut c = Checks::new(2);
    let s = catalog::mub2();
    let sel = select_subset(&s).unwrap();
    let v = fidelity_bounds_raw(0.033, &sel, s.n()).unwrap().avg_state;
    c.check((v - 0.75).abs() <= 0.005, format!("2-MUB average fidelity bound at 0.033 is {v:.5}, expected 0.75 +- 0.005"));
    c.finish();
}

#[test]
fn criterion_2_sweeps_monotone() {
    let mut c = Checks::new(2);
    let mut scenarios = vec![("mub2".to_string(), catalog::mub2()), ("mub3".to_string(), catalog::mub3())];
    for alpha in [0.0, 0.25, 0.5, 0.75] {
        scenarios.push((format!("biased {alpha}"), catalog::biased(alpha).unwrap()));
    }
    for (name, s) in scenarios {
        let sel = select_subset(&s).unwrap();
        let e0 = epsilon0(&sel, s.n());
        let grid: Vec<f64> = linear_grid(e0, 201).into_iter().filter(|&e| e < e0).collect();
        let rows = sweep(&s, &sel, &grid).unwrap();
        let mut ok = true;
        for w in rows.windows(2) {
            for (a, b) in [
                (w[0].avg_fid_state, w[1].avg_fid_state),
                (w[0].avg_fid_meas, w[1].avg_fid_meas),
                (w[0].avg_fid_state_a1, w[1].avg_fid_state_a1),
                (w[0].avg_fid_state_a2, w[1].avg_fid_state_a2),
            ] {
                ok &= b.unwrap() <= a.unwrap() + 1e-12;
            }
        }
        c.check(ok, format!("{name}: sweep nonincreasing on [0, {e0:.5})"));
    }
    c.finish();
}

struct Sample {
    scenario: PmScenario,
    real: ExperimentalRealization,
}

fn scenarios() -> Vec<PmScenario> {
    vec![
        catalog::mub2(),
        catalog::mub3(),
        catalog::biased(0.5).unwrap(),
        catalog::trine(),
        catalog::tetrahedron(),
        catalog::sic_qubit(),
        catalog::fourier_mubs(3, 2).unwrap(),
        catalog::fourier_mubs(3, 4).unwrap(),
    ]
}

/// Seeded ensemble: every scenario, every applicable noise kind, δ ≤ 0.05,
/// with every fifth sample composing two noise sources.
fn ensemble(count: usize) -> Vec<Sample> {
    let targets = scenarios();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let scenario = targets[i % targets.len()].clone();
        let kinds: Vec<NoiseKind> =
            NoiseKind::ALL.into_iter().filter(|k| scenario.d() == 2 || *k != NoiseKind::BlochRotate).collect();
        let layers = if i % 5 == 4 { 2 } else { 1 };
        let specs: Vec<NoiseSpec> = (0..layers)
            .map(|_| {
                let kind = kinds[rng.random_range(0..kinds.len())];
                NoiseSpec::new(kind, rng.random_range(0.0..=0.05)).unwrap()
            })
            .collect();
        let real = perturb_composed(&scenario, &specs, rng.random()).unwrap();
        out.push(Sample { scenario, real });
    }
    out
}

fn max_eig(m: &ComplexMatrix) -> f64 {
    m.operator_norm()
}

#[test]
fn criterion_3_overlap_soundness() {
    let mut c = Checks::new(3);
    let start = Instant::now();
    let samples = ensemble(10_000);
    let slack = 1e-9;
    let (mut violations, mut checked) = (0usize, 0usize);
    let mut first: Option<String> = None;
    for (i, smp) in samples.iter().enumerate() {
        let (s, real) = (&smp.scenario, &smp.real);
        let table = born_table(real).unwrap();
        let cert = certify(&table, s).unwrap();
        let eps = cert.epsilon.value();
        let d = s.d();
        let mut fail = |what: String| {
            violations += 1;
            first.get_or_insert(format!("sample {i}: {what}"));
        };
        for x in 0..s.n() {
            let sum: f64 = (0..d).map(|a| max_eig(real.state(x, a).matrix())).sum();
            if sum < cert.purity_lower - slack {
                fail(format!("purity sum {sum} < {}", cert.purity_lower));
            }
            let msum: f64 = (0..d).map(|b| max_eig(real.measurements[x].effect(b))).sum();
            if msum < cert.projectivity_lower - slack {
                fail(format!("projectivity sum {msum} < {}", cert.projectivity_lower));
            }
        }
        for p in &cert.per_pair {
            checked += 1;
            let so = fidelity_linear(real.state(p.x, p.a), real.state(p.x2, p.a2)).unwrap();
            if !p.contains_state_overlap(so, slack) {
                fail(format!("state overlap {so} outside [{}, {}] for {p:?}", p.state_lower, p.state_upper));
            }
            let m1 = real.measurements[p.x].effect(p.a);
            let m2 = real.measurements[p.x2].effect(p.a2);
            let mo = pmcert::linalg::trace_product(m1, m2).re;
            if !p.contains_meas_overlap(mo, slack) {
                fail(format!("measurement overlap {mo} outside interval for {p:?}"));
            }
            // the general-dimension tolerance must hold as well
            if p.x != p.x2 && (so - p.target).abs() > cert.general_state_tolerance + slack {
                fail(format!("general tolerance violated: {so} vs {}", p.target));
            }
        }
        if let Some(q) = cert.qubit {
            let e = Epsilon::new(eps).unwrap();
            assert_eq!(q, qubit_refinements(e));
            for x in 0..s.n() {
                for a in 0..d {
                    let r = real.state(x, a).matrix();
                    if max_eig(r) < q.norm_lower - slack {
                        fail(format!("state norm {} < {}", max_eig(r), q.norm_lower));
                    }
                    let gap = (r - real.measurements[x].effect(a)).operator_norm();
                    if gap > q.effect_gap + slack {
                        fail(format!("effect gap {gap} > {}", q.effect_gap));
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    c.check(violations == 0, format!("{} realizations, {checked} pair checks, {violations} violations {}", samples.len(), first.unwrap_or_default()));
    c.check(elapsed < 60.0, format!("runtime {elapsed:.2} s < 60 s"));
    c.finish();
}

#[test]
fn criterion_4_fidelity_soundness() {
    let mut c = Checks::new(4);
    let samples = ensemble(10_000);
    let (mut tested, mut tested_p, mut v_state, mut v_proc) = (0usize, 0usize, 0usize, 0usize);
    let mut worst_margin = f64::INFINITY;
    for smp in samples.iter().filter(|s| s.scenario.d() == 2) {
        let (s, real) = (&smp.scenario, &smp.real);
        let eps = deviation_epsilon(&born_table(real).unwrap(), s).unwrap().value();
        let st = self_test(eps, s).unwrap();
        if st.valid {
            tested += 1;
            let bound = st.bounds.as_ref().unwrap().avg_state_fidelity_lower;
            let achieved = best_alignment(s, real).unwrap().achieved_avg_fidelity;
            worst_margin = worst_margin.min(achieved - bound);
            if achieved < bound - 1e-12 {
                v_state += 1;
            }
        }
        let rows = outcome0_rows(s).unwrap();
        if let Ok(p) = procrustes_bound(eps, &rows) {
            if p.fidelity_lower > 0.0 {
                tested_p += 1;
                let idx: Vec<(usize, usize)> = (0..s.n()).map(|x| (x, 0)).collect();
                let achieved = align_states(s, real, &idx).unwrap().achieved_avg_fidelity;
                if achieved < p.fidelity_lower - 1e-12 {
                    v_proc += 1;
                }
            }
        }
    }
    c.check(tested > 1000 && v_state == 0, format!("average-fidelity bound: {tested} samples below threshold, {v_state} violations, min margin {worst_margin:.3e}"));
    c.check(tested_p > 1000 && v_proc == 0, format!("Procrustes bound: {tested_p} samples, {v_proc} violations"));
    c.finish();
}

#[test]
fn criterion_5_tightness() {
    let mut c = Checks::new(5);
    let mut prev_gap = f64::INFINITY;
    for e in [1e-2, 1e-3, 1e-4] {
        let (s, real) = tightness_fixture_qubit(Epsilon::new(e).unwrap()).unwrap();
        let table = born_table(&real).unwrap();
        let eps = deviation_epsilon(&table, &s).unwrap().value();
        let dev = (fidelity_linear(s.state(0, 0), s.state(1, 0)).unwrap()
            - fidelity_linear(real.state(0, 0), real.state(1, 0)).unwrap())
        .abs();
        c.check((dev - (e - e * e).sqrt()).abs() < 1e-12, format!("eps {e}: deviation {dev:.15} = sqrt(eps - eps^2)"));
        c.check((eps - e).abs() < 1e-12, format!("eps {e}: statistics deviate by exactly eps ({eps:.3e})"));
        let ratio = dev / (e + e.sqrt());
        let gap = 1.0 - ratio;
        c.check(gap > 0.0 && gap <= 2.0 * e.sqrt() && gap < prev_gap, format!("eps {e}: ratio {ratio:.6}, 1 - ratio = O(sqrt eps)"));
        prev_gap = gap;
    }
    for d in [3, 4, 5] {
        let e = 0.5 / (d as f64 - 1.0);
        let ok = tightness_fixture_dim(Epsilon::new(e).unwrap(), d).map(|p| p.outcomes() == d).unwrap_or(false);
        c.check(ok, format!("dimension fixture is a valid POVM for d = {d}, eps = {e}"));
    }
    c.finish();
}

fn random_spd(k: usize, rng: &mut ChaCha8Rng) -> RealMatrix {
    let a = RealMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    &a * a.transpose() + RealMatrix::identity(k, k) * 0.2
}

fn random_symmetric(k: usize, rng: &mut ChaCha8Rng) -> RealMatrix {
    let a = RealMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

#[test]
fn criterion_6_kernel_oracles() {
    let mut c = Checks::new(6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut sun_v, mut sun_n) = (0, 0);
    while sun_n < 1000 {
        let k = rng.random_range(2..=4);
        let g = random_spd(k, &mut rng);
        let inv_norm = spd_inverse(&g).unwrap().operator_norm();
        let dir = random_symmetric(k, &mut rng);
        let dg = &dir * (rng.random_range(0.01..0.95) / (inv_norm * dir.operator_norm()));
        let Ok(lt) = cholesky(&(&g + &dg)) else { continue };
        let l = cholesky(&g).unwrap();
        let bound = sun_cholesky_bound(&g, &dg, &l).unwrap();
        sun_n += 1;
        if (&lt - &l).frobenius_norm() > bound * (1.0 + 1e-12) {
            sun_v += 1;
        }
    }
    c.check(sun_v == 0, format!("Cholesky perturbation bound: {sun_n} instances, {sun_v} violations"));

    let (mut hi_v, mut hi_n) = (0, 0);
    while hi_n < 1000 {
        let k = rng.random_range(2..=4);
        let g = random_spd(k, &mut rng);
        let inv_norm = spd_inverse(&g).unwrap().operator_norm();
        let cvec = RealMatrix::from_fn(k, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let rhs = &g * &cvec;
        let e = random_symmetric(k, &mut rng);
        let e = &e / e.operator_norm();
        let f = RealMatrix::from_fn(k, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let dp = rng.random_range(0.001..0.9) / inv_norm;
        // perturbations saturating the allowed norms in random directions
        let dg = &e * (dp * rng.random_range(0.0..=1.0));
        let dv = RealMatrix::from_fn(k, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let dvec = &dv * (dp * f.frobenius_norm() * rng.random_range(0.0..=1.0) / dv.frobenius_norm());
        let perturbed = &g + &dg;
        let Some(sol) = perturbed.clone().lu().solve(&(&rhs + &dvec)) else { continue };
        let Ok(bound) = higham_bound(dp, inv_norm, 1.0, f.frobenius_norm(), cvec.frobenius_norm()) else { continue };
        hi_n += 1;
        if (&sol - &cvec).frobenius_norm() / cvec.frobenius_norm() > bound * (1.0 + 1e-12) {
            hi_v += 1;
        }
    }
    c.check(hi_v == 0, format!("linear-system perturbation bound: {hi_n} instances, {hi_v} violations"));
    c.finish();
}

fn random_bloch(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal)).normalize();
    [v.x, v.y, v.z]
}

#[test]
fn criterion_7_extensions() {
    let mut c = Checks::new(7);
    let overlaps = RealMatrix::from_fn(4, 4, |i, j| {
        let v = catalog::tetrahedron_bloch();
        0.5 * (1.0 + (0..3).map(|k| v[i][k] * v[j][k]).sum::<f64>())
    });
    let mm = moment_matrix_from_stats(&overlaps, &[0.5; 4], 2).unwrap();
    let exact = (0..4).all(|i| (0..4).all(|j| {
        let e = if i == j { 2.0 / 12.0 + 1.0 / 12.0 } else { 1.0 / 12.0 };
        (mm.gamma[(i, j)] - e).abs() < 1e-9
    }));
    c.check(exact, "qubit SIC moment matrix has 1/4 on the diagonal and 1/12 elsewhere");
    let cert = certify_povm(&mm, 2).unwrap();
    c.check(cert.is_sic && cert.is_ic && cert.is_extremal, "qubit SIC certified as SIC, IC and extremal");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let (r1, r2) = if n % 2 == 0 {
            (state_from_bloch(&BlochVector(random_bloch(&mut rng))).unwrap(), state_from_bloch(&BlochVector(random_bloch(&mut rng))).unwrap())
        } else {
            let ket = |rng: &mut ChaCha8Rng| {
                nalgebra::DVector::from_fn(3, |_, _| {
                    num_complex::Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
            };
            (QuantumState::from_ket(&ket(&mut rng)).unwrap(), QuantumState::from_ket(&ket(&mut rng)).unwrap())
        };
        let Ok(p) = intermediate_state(&r1, &r2) else { continue };
        n += 1;
        let lhs = fidelity_linear(&p.z_state, &r1).unwrap() + fidelity_linear(&p.z_state, &r2).unwrap();
        let rhs = 1.0 + fidelity_linear(&r1, &r2).unwrap().sqrt();
        worst = worst.max((lhs - rhs).abs());
    }
    c.check(worst < 1e-12, format!("intermediate-state identity on 1000 random pairs, max residual {worst:.2e}"));

    // grid search over the Bloch sphere never beats the computed state
    let mut grid_ok = true;
    for _ in 0..20 {
        let r1 = state_from_bloch(&BlochVector(random_bloch(&mut rng))).unwrap();
        let r2 = state_from_bloch(&BlochVector(random_bloch(&mut rng))).unwrap();
        let Ok(p) = intermediate_state(&r1, &r2) else { continue };
        let mut best = f64::NEG_INFINITY;
        for i in 0..=90 {
            let theta = std::f64::consts::PI * i as f64 / 90.0;
            for j in 0..180 {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / 180.0;
                let v = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                let s = state_from_bloch(&BlochVector(v)).unwrap();
                best = best.max(fidelity_linear(&s, &r1).unwrap() + fidelity_linear(&s, &r2).unwrap());
            }
        }
        grid_ok &= best <= p.target_sum + 1e-12 && best >= p.target_sum - 2e-3;
    }
    c.check(grid_ok, "grid search over the Bloch sphere confirms the intermediate state is optimal");

    let adv = flip_adversary_table(0.5).unwrap();
    let defect = perfect_correlation_defect(&adv);
    let eps = deviation_epsilon(&adv, &catalog::mub2()).unwrap().value();
    c.check(defect < 1e-12 && eps < 1e-12, format!("flip adversary reproduces the 2-MUB table (defect {defect:.1e}, eps {eps:.1e})"));
    let residual = check_sr_identity(&adv).unwrap();
    c.check(residual > 0.1, format!("flip adversary flagged with residual {residual:.4}"));
    c.finish();
}

fn transpose_realization(real: &ExperimentalRealization, u: &ComplexMatrix) -> ExperimentalRealization {
    let states = real
        .states
        .iter()
        .map(|s| s.iter().map(|r| r.transpose().conjugate_by(u).unwrap()).collect())
        .collect();
    let measurements = real.measurements.iter().map(|m| m.transpose().conjugate_by(u).unwrap()).collect::<Vec<Povm>>();
    ExperimentalRealization::new(states, measurements).unwrap()
}

#[test]
fn criterion_8_alignment() {
    let mut c = Checks::new(8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = nalgebra::Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let r: Matrix3<f64> = UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner();
        let back = so3_from_su2(&su2_from_so3(&r).unwrap()).unwrap();
        worst = worst.max((back - r).abs().max());
    }
    c.check(worst < 1e-9, format!("SO(3) -> SU(2) -> SO(3) on 1000 random rotations, max error {worst:.2e}"));

    for (name, s) in [("mub3", catalog::mub3()), ("tetrahedron", catalog::tetrahedron())] {
        let axis = random_bloch(&mut rng);
        let u = pmcert::noise::rotation_unitary(axis, rng.random_range(0.0..3.0));
        let real = transpose_realization(&s.realization(), &u);
        let al = best_alignment(&s, &real).unwrap();
        let achieved = pmcert::alignment::achieved_fidelity(&al, &s, &real).unwrap();
        c.check(
            al.transposed && (achieved - 1.0).abs() < 1e-9,
            format!("{name}: transposed realization gives transposed = {}, fidelity {achieved:.12}", al.transposed),
        );
    }
    c.finish();
}

#[test]
fn ensemble_is_deterministic() {
    let a = ensemble(16);
    let b = ensemble(16);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.real, y.real);
    }
    let _ = select_subset_at(&catalog::mub2(), 0.01).unwrap();
}
