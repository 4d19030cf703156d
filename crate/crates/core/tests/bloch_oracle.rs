mod common;

use cavleak_core::bloch::{
    depolarizing_probability, integrate_at_times, integrate_maxwell_bloch, BlochState,
    DynamicsConfig,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn integrator_matches_matrix_exponential() {
    let mut rng = common::rng(0xB10C);
    for _ in 0..50 {
        let cfg = common::random_dynamics(&mut rng);
        let mut times: Vec<f64> = (0..20)
            .map(|_| rng.random_range(0.0..cfg.horizon))
            .collect();
        times.sort_by(f64::total_cmp);
        let states = integrate_at_times(&cfg, &BlochState::EXCITED, &times, 1.0).unwrap();
        for (t, s) in times.iter().zip(&states) {
            let o = common::bloch_expm(&cfg, *t);
            let dev = [s.rho_ee - o[0], s.rho_ge_re - o[1], s.rho_ge_im - o[2]];
            assert!(
                dev.iter().all(|d| d.abs() <= 1e-6),
                "{cfg:?} t={t:e} dev={dev:?}"
            );
        }
    }
}

#[test]
fn refined_step_converges_to_oracle() {
    let cfg = DynamicsConfig::undamped(8e6, 21e6, 1e-6).with_damping(1e6, 1.5e6);
    let t = [cfg.horizon];
    let o = common::bloch_expm(&cfg, cfg.horizon)[0];
    let coarse = integrate_at_times(&cfg, &BlochState::EXCITED, &t, 1.0).unwrap()[0].rho_ee;
    let fine = integrate_at_times(&cfg, &BlochState::EXCITED, &t, 0.5).unwrap()[0].rho_ee;
    // fourth-order method: halving the step cuts the error about 16x
    assert!((fine - o).abs() < (coarse - o).abs() / 8.0 + 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectories_stay_physical(
        g in 0.1e6..15e6f64,
        delta in -40e6..40e6f64,
        gamma_r in 0.0..3e6f64,
        extra in 0.0..3e6f64,
    ) {
        let cfg = DynamicsConfig::undamped(g, delta, 1e-6).with_damping(gamma_r, gamma_r / 2.0 + extra);
        let tr = integrate_maxwell_bloch(&cfg, &BlochState::EXCITED).unwrap();
        for s in &tr.states {
            prop_assert!(s.is_physical(1e-6), "{:?}", s);
        }
    }

    #[test]
    fn leakage_is_a_probability_and_even_in_detuning(
        g in 0.5e6..15e6f64,
        delta in 0.0..200e6f64,
    ) {
        let p = depolarizing_probability(&DynamicsConfig::undamped(g, delta, 250e-9)).unwrap();
        let q = depolarizing_probability(&DynamicsConfig::undamped(g, -delta, 250e-9)).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - q).abs() < 1e-9);
        // undamped leakage never exceeds the Rabi amplitude g²/(g² + Δ²)
        prop_assert!(p <= g * g / (g * g + delta * delta) + 1e-9);
    }

    #[test]
    fn damping_only_decays(gamma_r in 1e3..1e7f64, horizon in 1e-8..1e-5f64) {
        let cfg = DynamicsConfig::undamped(0.0, 0.0, horizon).with_damping(gamma_r, gamma_r);
        let tr = integrate_maxwell_bloch(&cfg, &BlochState::EXCITED).unwrap();
        prop_assert!(tr.states.windows(2).all(|w| w[1].rho_ee <= w[0].rho_ee + 1e-12));
    }
}
