mod common;

use approx::assert_relative_eq;
use mfbai::model::{cheapest_fidelity_class, compare_lb, preset, BanditInstance, PRESET_NAMES};
use mfbai::oracle::{brute_oracle_2xm, lower_bound_cost, solve_oracle, zero_weight_mask, DEFAULT_ITERS};
use mfbai::transport::big_f;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solve(inst: &BanditInstance<f64>) -> mfbai::OracleSolution<f64> {
    solve_oracle(inst, DEFAULT_ITERS, 0).unwrap()
}

#[test]
fn solver_matches_brute_force_on_two_by_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..20 {
        let inst = common::random_mf_instance(&mut rng, 2, 2);
        let sol = solve(&inst);
        let brute = brute_oracle_2xm(&inst, 60).unwrap();
        assert!(
            sol.f_star >= brute.f_star * (1.0 - 1e-9),
            "case {case}: solver {} below grid {}",
            sol.f_star,
            brute.f_star
        );
        assert!(
            (sol.f_star - brute.f_star).abs() <= 5e-3 * sol.f_star.max(brute.f_star) + 5e-3 * 1e-3,
            "case {case}: solver {} vs grid {}",
            sol.f_star,
            brute.f_star
        );
    }
}

#[test]
fn brute_force_converges_under_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..5 {
        let inst = common::random_mf_instance(&mut rng, 2, 2);
        let coarse = brute_oracle_2xm(&inst, 40).unwrap().f_star;
        let fine = brute_oracle_2xm(&inst, 80).unwrap().f_star;
        assert!((fine - coarse).abs() < 1e-3);
        assert!(fine >= coarse - 1e-15);
    }
}

#[test]
fn symmetric_single_fidelity_splits_evenly() {
    let inst: BanditInstance<f64> = BanditInstance::from_rows(
        &[vec![0.6], vec![0.5]],
        mfbai::RewardFamily::gaussian(1.0).unwrap(),
        vec![0.0],
        vec![1.0],
    )
    .unwrap();
    let brute = brute_oracle_2xm(&inst, 100).unwrap();
    assert_relative_eq!(brute.omega_star.get(0, 0), 0.5, epsilon = 1e-12);
    let sol = solve(&inst);
    assert_relative_eq!(sol.omega_star.get(0, 0), 0.5, epsilon = 1e-4);
}

#[test]
fn solutions_are_consistent_on_presets() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for name in PRESET_NAMES {
        let inst: BanditInstance<f64> = preset(name).unwrap();
        let (k, m) = (inst.arms(), inst.fidelities());
        let sol = solve(&inst);
        let recomputed = big_f(&sol.omega_star, inst.means(), inst.schedule(), inst.family())
            .unwrap()
            .value;
        assert!((recomputed - sol.f_star).abs() <= 1e-12, "{name}");
        assert_relative_eq!(sol.omega_star.total(), 1.0, epsilon = 1e-12);
        assert!(sol.stationarity_gap >= 0.0);

        for a in 0..k {
            assert!(
                (0..m).any(|f| sol.omega_star.get(a, f) >= 1e-4),
                "{name}: arm {a} has no mass"
            );
        }
        for _ in 0..100 {
            let probe = common::random_simplex(&mut rng, k, m);
            let f = big_f(&probe, inst.means(), inst.schedule(), inst.family())
                .unwrap()
                .value;
            assert!(sol.f_star >= f - 5e-3, "{name}: probe beats the solver");
            assert!(
                sol.f_star >= f * (1.0 - 1e-9),
                "{name}: probe {f} beats the solver {}",
                sol.f_star
            );
        }
        if let Ok(mask) = zero_weight_mask(&inst) {
            for ((a, f), masked) in mask.indexed() {
                if masked {
                    assert!(
                        sol.omega_star.get(a, f) <= 1e-3,
                        "{name}: masked ({a}, {f}) carries mass"
                    );
                }
            }
        }
    }
}

#[test]
fn two_arm_solutions_are_sparse() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let total = 40;
    let mut sparse = 0;
    for _ in 0..total {
        let m = rng.gen_range(2..=5);
        let inst = common::random_mf_instance(&mut rng, 2, m);
        let sol = solve(&inst);
        if (0..2).all(|a| (0..m).filter(|&f| sol.omega_star.get(a, f) >= 1e-3).count() <= 1) {
            sparse += 1;
        }
    }
    assert!(sparse as f64 >= 0.95 * total as f64, "only {sparse} of {total} sparse");
}

#[test]
fn cheapest_fidelity_instances_stay_at_the_cheapest_fidelity() {
    for (arms, xi, lambda) in [
        (2, vec![0.1, 0.0], vec![1.0, 2.0]),
        (3, vec![0.2, 0.1, 0.0], vec![0.5, 1.0, 4.0]),
        (4, vec![0.05, 0.0], vec![0.1, 0.2]),
    ] {
        let inst: BanditInstance<f64> = cheapest_fidelity_class(arms, 0.3, &xi, &lambda).unwrap();
        let sol = solve(&inst);
        for a in 0..arms {
            let upper: f64 = (1..xi.len()).map(|f| sol.omega_star.get(a, f)).sum();
            assert!(upper <= 1e-3, "arm {a}: {upper} above the cheapest fidelity");
        }
        let mask = zero_weight_mask(&inst).unwrap();
        for ((a, f), masked) in mask.indexed() {
            if masked {
                assert!(sol.omega_star.get(a, f) <= 1e-3);
            }
        }
    }
}

#[test]
fn lower_bound_on_the_comparison_instance() {
    for (gap, lam_low, lam_top, delta) in [(0.2, 1.0, 5.0, 0.01), (0.1, 0.5, 2.0, 0.1), (0.3, 0.2, 1.0, 0.001)] {
        let inst: BanditInstance<f64> = compare_lb(gap, gap, lam_low, lam_top).unwrap();
        let expected = 4.0 * lam_top / (gap * gap) * (1.0f64 / (2.4 * delta)).ln();
        assert_relative_eq!(lower_bound_cost(&inst, delta).unwrap(), expected, max_relative = 1e-4);
    }
    let inst: BanditInstance<f64> = preset("compare-lb").unwrap();
    assert_eq!(lower_bound_cost(&inst, 0.5).unwrap(), 0.0);
}
