use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use proptest::prelude::*;
use qwcount_core::analysis::{joint_success_mass, run_sweep, CountRange, SweepChecks, SweepConfig};
use qwcount_core::counting::{fold_phase, full_count_exact, partial_count_exact, query_count};
use qwcount_core::phase::{exact_distribution, good_estimate_mass, EigenphaseMixture, GOOD_ESTIMATE_BOUND};
use qwcount_core::reduced::{
    build_u_red, eigenphase_table, invariant_basis, reduce_operator, reduced_uniform_state, spectral_decomposition,
    u_red_in_label_order, WalkAngles,
};
use qwcount_core::walk::{ancilla_restriction, ket_plus, BipartiteInstance, Part};

fn instance() -> impl Strategy<Value = BipartiteInstance> {
    (1usize..=5, 1usize..=5)
        .prop_flat_map(|(n0, n1)| {
            (
                Just(n0),
                Just(n1),
                proptest::collection::vec(any::<bool>(), n0),
                proptest::collection::vec(any::<bool>(), n1),
            )
        })
        .prop_map(|(n0, n1, m0, m1)| {
            let pick = |m: Vec<bool>| m.into_iter().enumerate().filter(|e| e.1).map(|e| e.0).collect::<Vec<_>>();
            BipartiteInstance::new(n0, n1, pick(m0), pick(m1)).unwrap()
        })
}

fn shuffled(n: usize, k: usize, rot: usize) -> BTreeSet<usize> {
    (0..k).map(|i| (i * 3 + rot) % n).collect::<BTreeSet<_>>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_preserves_invariant_subspace(inst in instance()) {
        let u = inst.build_evolution(&inst.build_oracle()).unwrap();
        let basis = invariant_basis(&inst);
        let red = reduce_operator(&u, &basis).unwrap();
        let angles = WalkAngles::from_instance(&inst);
        prop_assert!(red.leakage < 1e-10);
        prop_assert!(red.defect_against(&u_red_in_label_order(&angles)) < 1e-10);
        prop_assert!(basis.lift(&reduced_uniform_state(&angles)).max_abs_diff(&inst.uniform_state()) < 1e-10);
    }

    #[test]
    fn ancilla_circuit_restricts_to_part_oracle(inst in instance()) {
        for part in Part::BOTH {
            let anc = inst.build_ancilla_oracle(part).unwrap();
            let kept = ancilla_restriction(&anc, ket_plus(), ket_plus()).unwrap();
            prop_assert!(kept.max_abs_diff(&inst.build_part_oracle(part)) < 1e-12);
        }
    }

    #[test]
    fn closed_form_spectrum(theta0 in 0.0..PI, theta1 in 0.0..PI) {
        let angles = WalkAngles::from_thetas(theta0, theta1);
        let spec = spectral_decomposition(&angles);
        prop_assert!(spec.max_residual(&build_u_red(&angles)).unwrap() < 1e-12);
        prop_assert!(spec.gram_defect() < 1e-12);
        prop_assert!((spec.total_overlap() - 1.0).abs() < 1e-12);
        let table = eigenphase_table(&angles);
        let weights: f64 = table.components().iter().map(|c| c.1).sum();
        prop_assert!((weights - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_normalized(phases in proptest::collection::vec(0.0..TAU, 1..6), p in 1u32..=10) {
        let w = 1.0 / phases.len() as f64;
        let mix = EigenphaseMixture::new(phases.into_iter().map(|x| (x, w)).collect()).unwrap();
        let dist = exact_distribution(&mix, p).unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-10);
        prop_assert!(dist.masses().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn two_nearest_grid_points_carry_enough_mass(theta in 0.0..TAU, p in 1u32..=12) {
        prop_assert!(good_estimate_mass(theta, 1 << p) >= GOOD_ESTIMATE_BOUND - 1e-12);
    }

    #[test]
    fn folding_lands_in_first_quadrant(x in 0.0..TAU) {
        let y = fold_phase(x);
        prop_assert!((0.0..=FRAC_PI_2 + 1e-15).contains(&y));
        // the eight symmetric images of a phase fold to the same value
        for z in [TAU - x, PI - x, PI + x] {
            prop_assert!((fold_phase(z.rem_euclid(TAU)) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn count_distribution_depends_only_on_counts(
        n0 in 1usize..=6, n1 in 1usize..=6, r0 in 0usize..6, r1 in 0usize..6, p in 2u32..=6, s0 in 0usize..7, s1 in 0usize..7,
    ) {
        let k0 = r0 % (n0 + 1);
        let k1 = r1 % (n1 + 1);
        let canonical = BipartiteInstance::with_counts(n0, n1, k0, k1).unwrap();
        let m0 = shuffled(n0, k0, s0);
        let m1 = shuffled(n1, k1, s1);
        prop_assume!(m0.len() == k0 && m1.len() == k1);
        let other = BipartiteInstance::new(n0, n1, m0, m1).unwrap();
        for part in Part::BOTH {
            let a = partial_count_exact(&canonical, part, p).unwrap();
            let b = partial_count_exact(&other, part, p).unwrap();
            for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
                prop_assert!((x.mass - y.mass).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn joint_event_contains_product_of_part_events(
        n0 in 1usize..=8, n1 in 1usize..=8, r0 in 0usize..9, r1 in 0usize..9, p in 3u32..=6,
    ) {
        let inst = BipartiteInstance::with_counts(n0, n1, r0 % (n0 + 1), r1 % (n1 + 1)).unwrap();
        let j = joint_success_mass(&inst, p).unwrap();
        prop_assert!(j.report.satisfied_mass >= j.product_lower_bound - 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&j.report.satisfied_mass));
        let full = full_count_exact(&inst, p).unwrap();
        prop_assert_eq!(full.oracle_queries, 2 * query_count(1 << p));
    }
}

#[test]
fn sweep_is_a_pure_function_of_its_config() {
    let cfg = SweepConfig {
        n0: vec![2, 3],
        n1: vec![1, 4],
        k0: CountRange::All,
        k1: CountRange::Values(vec![0, 1]),
        p: vec![4, 3],
        checks: SweepChecks::default(),
    };
    let a = format!("{:?}", run_sweep(&cfg).unwrap());
    let b = format!("{:?}", run_sweep(&cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn sweep_records_are_consistent_with_thresholds() {
    let cfg = SweepConfig {
        n0: vec![1, 2, 3],
        n1: vec![2, 3],
        k0: CountRange::All,
        k1: CountRange::All,
        p: vec![3, 4],
        checks: SweepChecks::default(),
    };
    for rec in run_sweep(&cfg).unwrap() {
        for (r, pass) in rec.partial.iter().zip(rec.partial_pass) {
            assert!((0.0..=1.0 + 1e-12).contains(&r.satisfied_mass));
            assert_eq!(pass, r.passed());
        }
        assert_eq!(rec.joint_pass, rec.joint.passed());
    }
}
