use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use proptest::prelude::*;

use pmcert::alignment::{best_alignment, procrustes_align, procrustes_bound, so3_from_su2, su2_from_so3};
use pmcert::catalog;
use pmcert::extensions::{certify_povm, intermediate_state, MomentMatrix};
use pmcert::io::StatsFile;
use pmcert::noise::{perturb, NoiseKind, NoiseSpec};
use pmcert::overlap::{certify, measurement_overlap_tol, qubit_refinements, state_overlap_tol};
use pmcert::quantum::{fidelity_linear, state_from_bloch, trace_distance, BlochVector, Povm};
use pmcert::scenario::{born_table, deviation_epsilon, Epsilon};
use pmcert::selftest::{fidelity_bounds, outcome0_rows, select_subset, trace_distance_bounds};

fn unit3() -> impl Strategy<Value = [f64; 3]> {
    (-1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(z, phi): (f64, f64)| {
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    })
}

fn noise_kind() -> impl Strategy<Value = NoiseKind> {
    prop::sample::select(NoiseKind::ALL.to_vec())
}

fn qubit_scenario() -> impl Strategy<Value = usize> {
    0..5usize
}

fn scenario_at(i: usize) -> pmcert::PmScenario {
    [catalog::mub2(), catalog::mub3(), catalog::biased(0.4).unwrap(), catalog::trine(), catalog::tetrahedron()][i].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tolerances_grow_with_eps_and_dimension(e1 in 0.0..0.5f64, de in 0.0..0.1f64, d in 2usize..8) {
        let (a, b) = (Epsilon::new(e1).unwrap(), Epsilon::new(e1 + de).unwrap());
        prop_assert!(state_overlap_tol(a, d) <= state_overlap_tol(b, d));
        prop_assert!(measurement_overlap_tol(a, d) <= measurement_overlap_tol(b, d));
        prop_assert!(state_overlap_tol(a, d) <= state_overlap_tol(a, d + 1));
        prop_assert!(state_overlap_tol(a, d) <= measurement_overlap_tol(a, d));
    }

    #[test]
    fn qubit_refinement_never_looser(e in 0.0..=(1.0 / 3.0f64)) {
        let eps = Epsilon::new(e).unwrap();
        let q = qubit_refinements(eps);
        prop_assert!(q.state_tol <= state_overlap_tol(eps, 2) + 1e-15);
        prop_assert!(q.meas_tol <= measurement_overlap_tol(eps, 2) + 1e-15);
    }

    #[test]
    fn realized_overlaps_lie_in_certified_intervals(i in qubit_scenario(), kind in noise_kind(), delta in 0.0..0.1f64, seed: u64) {
        let s = scenario_at(i);
        let real = perturb(&s, NoiseSpec::new(kind, delta).unwrap(), seed).unwrap();
        let cert = certify(&born_table(&real).unwrap(), &s).unwrap();
        for p in &cert.per_pair {
            let v = fidelity_linear(real.state(p.x, p.a), real.state(p.x2, p.a2)).unwrap();
            prop_assert!(p.contains_state_overlap(v, 1e-9), "{v} outside {p:?}");
        }
    }

    #[test]
    fn epsilon_is_zero_iff_exact(i in qubit_scenario(), seed: u64, angle in 0.0..3.0f64) {
        let s = scenario_at(i);
        let real = perturb(&s, NoiseSpec::new(NoiseKind::Unitary, angle).unwrap(), seed).unwrap();
        prop_assert!(deviation_epsilon(&born_table(&real).unwrap(), &s).unwrap().value() < 1e-12);
    }

    #[test]
    fn fidelity_bounds_are_ordered(i in 0..3usize, e in 0.0..0.06f64) {
        let s = scenario_at(i);
        let sel = select_subset(&s).unwrap();
        let b = fidelity_bounds(e, &sel, &s).unwrap();
        if let Some(set) = b.bounds {
            prop_assert!((0.0..=1.0).contains(&set.avg_state_fidelity_lower));
            prop_assert!(set.fidelity.in_subset_a1 <= set.fidelity.in_subset_a0);
            let td = trace_distance_bounds(e, &sel).unwrap();
            prop_assert!(td.in_subset_a1 >= td.in_subset_a0);
            if !b.valid {
                prop_assert!(e >= b.epsilon0);
            }
        }
    }

    #[test]
    fn bounds_decrease_with_eps(alpha in 0.0..0.9f64, t1 in 0.0..1.0f64, t2 in 0.0..1.0f64) {
        let s = catalog::biased(alpha).unwrap();
        let sel = select_subset(&s).unwrap();
        let lim = pmcert::selftest::epsilon0(&sel, 2);
        let (lo, hi) = (t1.min(t2) * lim * 0.999, t1.max(t2) * lim * 0.999);
        let f = |e| fidelity_bounds(e, &sel, &s).unwrap().bounds.unwrap().avg_state_fidelity_lower;
        prop_assert!(f(hi) <= f(lo) + 1e-12);
    }

    #[test]
    fn procrustes_bound_holds_for_rotated_targets(i in qubit_scenario(), axis in unit3(), angle in 0.0..6.0f64, e in 0.0..0.05f64) {
        let s = scenario_at(i);
        let rows = outcome0_rows(&s).unwrap();
        let a = procrustes_bound(e, &rows).unwrap();
        // the bound depends on the configuration only through rotation invariants
        let r = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::from(axis)), angle);
        let m = r.to_rotation_matrix().into_inner();
        let rot = rows.clone() * nalgebra::DMatrix::from_fn(3, 3, |i, j| m[(j, i)]);
        let b = procrustes_bound(e, &rot).unwrap();
        prop_assert!((a.fidelity_lower - b.fidelity_lower).abs() < 1e-9);
    }

    #[test]
    fn su2_round_trip(w in -1.0..1.0f64, x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64) {
        prop_assume!(w * w + x * x + y * y + z * z > 1e-3);
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(w, x, y, z));
        let r: Matrix3<f64> = q.to_rotation_matrix().into_inner();
        let back = so3_from_su2(&su2_from_so3(&r).unwrap()).unwrap();
        prop_assert!((back - r).abs().max() < 1e-9);
    }

    #[test]
    fn procrustes_recovers_rotations(vs in prop::collection::vec(unit3(), 3..6), axis in unit3(), angle in 0.0..6.0f64) {
        let r = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::from(axis)), angle);
        let exp: Vec<[f64; 3]> = vs.iter().map(|v| {
            let w = r.inverse() * Vector3::from(*v);
            [w.x, w.y, w.z]
        }).collect();
        let al = procrustes_align(&vs, &exp).unwrap();
        prop_assert!(al.residual < 1e-8);
        prop_assert!((al.achieved_avg_fidelity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn alignment_never_hurts(i in qubit_scenario(), kind in noise_kind(), delta in 0.0..0.2f64, seed: u64) {
        let s = scenario_at(i);
        let real = perturb(&s, NoiseSpec::new(kind, delta).unwrap(), seed).unwrap();
        let identity: f64 = (0..s.n()).flat_map(|x| (0..2).map(move |a| (x, a)))
            .map(|(x, a)| fidelity_linear(s.state(x, a), real.state(x, a)).unwrap())
            .sum::<f64>() / (2 * s.n()) as f64;
        let best = best_alignment(&s, &real).unwrap().achieved_avg_fidelity;
        prop_assert!(best >= identity - 1e-12);
    }

    #[test]
    fn intermediate_identity(a in unit3(), b in unit3()) {
        let (r1, r2) = (state_from_bloch(&BlochVector(a)).unwrap(), state_from_bloch(&BlochVector(b)).unwrap());
        prop_assume!(fidelity_linear(&r1, &r2).unwrap() > 1e-6);
        let p = intermediate_state(&r1, &r2).unwrap();
        let lhs = fidelity_linear(&p.z_state, &r1).unwrap() + fidelity_linear(&p.z_state, &r2).unwrap();
        prop_assert!((lhs - p.target_sum).abs() < 1e-12);
    }

    #[test]
    fn rank_one_povms_pass_consistency(vs in prop::collection::vec(unit3(), 2..4)) {
        // symmetric completion: n_b together with −n_b always sums to the identity
        let mut effects = Vec::new();
        let w = 1.0 / vs.len() as f64;
        for v in &vs {
            for s in [1.0, -1.0] {
                let st = state_from_bloch(&BlochVector([s * v[0], s * v[1], s * v[2]])).unwrap();
                effects.push(st.into_matrix().scale(w));
            }
        }
        let p = Povm::new(effects).unwrap();
        let cert = certify_povm(&MomentMatrix::from_povm(&p), 2).unwrap();
        prop_assert!(cert.is_rank1_consistent);
    }

    #[test]
    fn stats_json_round_trip(i in qubit_scenario(), kind in noise_kind(), delta in 0.0..0.05f64, seed: u64) {
        let s = scenario_at(i);
        let t = born_table(&perturb(&s, NoiseSpec::new(kind, delta).unwrap(), seed).unwrap()).unwrap();
        let text = serde_json::to_string(&StatsFile::from_table(&t, None)).unwrap();
        let back: StatsFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_table().unwrap(), t);
    }

    #[test]
    fn trace_distance_is_a_metric(a in unit3(), b in unit3(), c in unit3(), p in 0.0..1.0f64) {
        let st = |v: [f64; 3]| state_from_bloch(&BlochVector(v)).unwrap().depolarize(p);
        let (x, y, z) = (st(a), st(b), st(c));
        let (xy, yz, xz) = (trace_distance(&x, &y).unwrap(), trace_distance(&y, &z).unwrap(), trace_distance(&x, &z).unwrap());
        prop_assert!(xz <= xy + yz + 1e-12);
        prop_assert!((xy - trace_distance(&y, &x).unwrap()).abs() < 1e-12);
    }
}
