//! Cross-module invariants: properties that tie the propagators, closed
//! forms, and spectral analysis to each other.

use opgrowth_core::analytic;
use opgrowth_core::propagate::{evolve_expm, uniform_grid};
use opgrowth_core::spectral::spectral_report;
use opgrowth_core::{Generator, ModelSpec, SizeDefinition};
use proptest::prelude::*;

#[test]
fn finite_n_distribution_converges_to_geometric_family() {
    // Model A / Def I at fixed t <= 1/(4 max rate): sup distance to the
    // geometric closed form shrinks monotonically along N.
    let (v1, v3) = (0.2, 1.0);
    let t = 0.25;
    let mut prev = f64::INFINITY;
    for big_n in [50usize, 100, 200, 400] {
        let spec = ModelSpec::model_a(SizeDefinition::DefI, v1, v3, big_n).unwrap();
        let g = Generator::assemble(&spec).unwrap();
        let traj = evolve_expm(&g, &[t]).unwrap();
        let w = traj.distributions()[0].weights();
        let sup = (0..=big_n)
            .map(|n| (w[n] - analytic::p_model_a_def_i(n, t, v1, v3).unwrap()).abs())
            .fold(0.0f64, f64::max);
        assert!(sup < prev, "sup distance {sup} not decreasing at N={big_n}");
        prev = sup;
    }
    assert!(prev < 5e-3);
}

#[test]
fn late_time_mean_decay_rate_matches_spectral_gap() {
    // In the scrambling phase the mean settles onto the scramblon plateau
    // and then decays through the second-largest eigenvalue; the log-slope
    // of the mean must match lambda_gap. Two fully independent routes:
    // QR eigensolve of the restricted block vs dense-exponential propagation.
    let spec = ModelSpec::model_a(SizeDefinition::DefI, 0.5, 1.0, 30).unwrap();
    let g = Generator::assemble(&spec).unwrap();
    let gap = spectral_report(&g).unwrap().lambda_gap;
    assert!(gap < 0.0);

    let t0 = 8.0;
    let t1 = t0 + 2.0 / gap.abs();
    let grid = uniform_grid(t1, 41);
    let traj = evolve_expm(&g, &grid).unwrap();
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .zip(traj.mean_size())
        .filter(|(t, _)| **t >= t0)
        .map(|(&t, &m)| (t, m.ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let rel = (slope - gap).abs() / gap.abs();
    assert!(rel <= 0.05, "log-slope {slope} vs gap {gap} (rel {rel})");
}

#[test]
fn trajectories_never_go_meaningfully_negative() {
    for spec in [
        ModelSpec::model_a(SizeDefinition::DefI, 0.4, 1.0, 100).unwrap(),
        ModelSpec::model_a(SizeDefinition::DefII, 0.4, 1.0, 100).unwrap(),
        ModelSpec::model_b(SizeDefinition::DefI, 0.4, 1.0, 100).unwrap(),
        ModelSpec::model_b(SizeDefinition::DefII, 0.4, 1.0, 100).unwrap(),
    ] {
        let g = Generator::assemble(&spec).unwrap();
        let traj = evolve_expm(&g, &uniform_grid(3.0, 31)).unwrap();
        for d in traj.distributions() {
            let min = d.weights().iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-10, "weight {min} at t={} for {spec:?}", d.time());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn def_i_columns_conserve_for_random_couplings(
        big_n in 2usize..=200,
        v1 in 0.0f64..5.0,
        vi in 0.0f64..5.0,
        model_a in proptest::bool::ANY,
    ) {
        let spec = if model_a {
            ModelSpec::model_a(SizeDefinition::DefI, v1, vi, big_n).unwrap()
        } else {
            ModelSpec::model_b(SizeDefinition::DefI, v1, vi, big_n).unwrap()
        };
        let g = Generator::assemble(&spec).unwrap();
        let tol = 1e-12 * g.max_abs_entry().max(1.0);
        for s in g.column_sums() {
            prop_assert!(s.abs() <= tol);
        }
    }

    #[test]
    fn def_ii_columns_dissipative_for_random_couplings(
        big_n in 1usize..=200,
        v1 in 0.0f64..5.0,
        vi in 0.0f64..5.0,
        model_a in proptest::bool::ANY,
    ) {
        let spec = if model_a {
            ModelSpec::model_a(SizeDefinition::DefII, v1, vi, big_n).unwrap()
        } else {
            ModelSpec::model_b(SizeDefinition::DefII, v1, vi, big_n).unwrap()
        };
        let g = Generator::assemble(&spec).unwrap();
        let tol = 1e-12 * g.max_abs_entry().max(1.0);
        for s in g.column_sums() {
            prop_assert!(s <= tol);
        }
    }

    #[test]
    fn generating_function_of_propagated_state_matches_closed_form(
        mu in 0.0f64..2.0,
        t in 0.01f64..0.6,
    ) {
        // Model A / Def I at N = 300: z from the propagated distribution
        // tracks the infinite-N closed form at short times. The finite-N
        // deviation of z is bounded by mu e^{-mu} times the O(mean^2/N)
        // drift of the mean (worst near mu ~ 1/mean).
        let (v1, v3) = (0.2, 1.0);
        let big_n = 300.0;
        let spec = ModelSpec::model_a(SizeDefinition::DefI, v1, v3, 300).unwrap();
        let g = Generator::assemble(&spec).unwrap();
        let traj = evolve_expm(&g, &[t]).unwrap();
        let z_num = traj.distributions()[0].generating_function(mu);
        let z_ref = analytic::z_model_a_def_i(mu, t, v1, v3).unwrap();
        let mean_ref = analytic::mean_model_a_def_i(t, v1, v3);
        let tol = 2e-3 + 4.0 * mu * (-mu).exp() * mean_ref * mean_ref / big_n;
        prop_assert!((z_num - z_ref).abs() <= tol,
            "z mismatch {} vs {} at mu={mu}, t={t} (tol {tol})", z_num, z_ref);
    }
}
