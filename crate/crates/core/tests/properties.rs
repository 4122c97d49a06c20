use num_complex::Complex64;
use proptest::prelude::*;
use tavis_core::liouville::{
    build_liouvillian, evolve, steady_state, DensityMatrix, EvolveOptions, SteadyStateOptions,
};
use tavis_core::observables::{g2_tau, g2_zero};
use tavis_core::operators::{cavity_op, CavityOp};
use tavis_core::space::{build_space, CompositeSpace, SystemParams};

/// Model dimensions up to 12: one emitter with up to five photons, or two
/// emitters with up to two.
fn model() -> impl Strategy<Value = (SystemParams, CompositeSpace)> {
    let shape = prop_oneof![(Just(1usize), 0usize..=5), (Just(2usize), 0usize..=2)];
    let rate = 1e-3f64..5.0;
    (shape, 0.1f64..3.0, rate.clone(), rate.clone(), rate.clone(), 0.0f64..2.0).prop_map(
        |((n, n_max), g, kappa, gamma, pump, deph)| {
            let p = SystemParams::new(n)
                .with_coupling(g)
                .with_kappa(kappa)
                .with_gamma(gamma)
                .with_pump(pump)
                .with_dephasing(deph);
            (p, build_space(n, n_max).unwrap())
        },
    )
}

fn random_state(d: usize, seed: &[f64]) -> Vec<Complex64> {
    (0..d)
        .map(|k| Complex64::new(seed[(2 * k) % seed.len()], seed[(2 * k + 1) % seed.len()]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generator_preserves_trace((p, s) in model()) {
        let l = build_liouvillian(&s, &p).unwrap();
        prop_assert!(l.trace_defect() < 1e-13);
    }

    #[test]
    fn evolution_keeps_a_density_matrix(
        (p, s) in model(),
        seed in prop::collection::vec(-1.0f64..1.0, 24),
        t in 0.01f64..20.0,
    ) {
        let l = build_liouvillian(&s, &p).unwrap();
        let psi = random_state(s.dim(), &seed);
        prop_assume!(psi.iter().map(|v| v.norm_sqr()).sum::<f64>() > 1e-3);
        let rho0 = DensityMatrix::pure(s.tag(), &psi).unwrap();
        let out = evolve(&l, &rho0, &[0.5 * t, t], &EvolveOptions::default()).unwrap();
        for rho in &out {
            prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
            prop_assert!(rho.hermiticity_error() < 1e-9);
            prop_assert!(rho.min_eigenvalue() > -1e-7);
        }
    }

    #[test]
    fn steady_state_is_a_valid_fixed_point((p, s) in model()) {
        let l = build_liouvillian(&s, &p).unwrap();
        let rho = steady_state(&l, &SteadyStateOptions::default()).unwrap();
        let r = l.apply_vec(rho.as_vec());
        let rn = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let xn = rho.as_vec().iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(rn <= 1e-10 * l.matrix().norm_inf() * xn);
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(rho.min_eigenvalue() >= -1e-8);
    }

    #[test]
    fn regression_agrees_at_zero_delay((p, s) in model()) {
        prop_assume!(s.n_max() >= 1);
        let l = build_liouvillian(&s, &p).unwrap();
        let rho = steady_state(&l, &SteadyStateOptions::default()).unwrap();
        let a = cavity_op(&s, CavityOp::Annihilate);
        if let Ok(g0) = g2_zero(&rho, &a) {
            let series = g2_tau(&l, &rho, &a, &[0.0], &EvolveOptions::default()).unwrap();
            prop_assert!((series[0] - g0).abs() <= 1e-8 * g0.max(1.0));
        }
    }
}
