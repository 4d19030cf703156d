use cavleak_core::analysis::{
    coupling_scaling, leakage_sweep, scaled_frequencies, threshold_crossing, FrequencySource,
    SweepConfig,
};
use cavleak_core::fencing::frequency_from_wire_count;
use cavleak_core::helmholtz::{EigenOptions, Grid};
use proptest::prelude::*;

fn short(n_max: u64) -> SweepConfig {
    SweepConfig {
        n_range: (0..=n_max).collect(),
        ..SweepConfig::default()
    }
}

#[test]
fn rows_follow_requested_order_and_scaling() {
    let unsorted = SweepConfig {
        n_range: vec![9, 0, 33, 5],
        ..SweepConfig::default()
    };
    assert!(leakage_sweep(&unsorted).is_err());
    let cfg = SweepConfig {
        n_range: vec![0, 5, 9, 33],
        ..SweepConfig::default()
    };
    let res = leakage_sweep(&cfg).unwrap();
    let ns: Vec<u64> = res.rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, [0, 5, 9, 33]);
    for r in &res.rows {
        assert_eq!(r.f_tilde, frequency_from_wire_count(r.n as f64));
        assert_eq!(r.delta, r.f_tilde * cfg.f_101 - cfg.f_q);
        assert_eq!(r.g, coupling_scaling(cfg.g0, r.f_tilde));
        assert!(r.p_damped.is_some());
    }
}

#[test]
fn leakage_peaks_at_resonance() {
    let res = leakage_sweep(&short(12)).unwrap();
    let peak = res
        .rows
        .iter()
        .max_by(|a, b| a.p_undamped.total_cmp(&b.p_undamped))
        .unwrap();
    assert_eq!(peak.n, 5);
    assert_eq!(peak.delta, 0.0);
}

#[test]
fn damping_dominates_far_from_resonance() {
    let cfg = SweepConfig::default();
    let res = leakage_sweep(&cfg).unwrap();
    let far: Vec<_> = res
        .rows
        .iter()
        .filter(|r| r.delta.abs() >= 75.0 * cfg.g0)
        .collect();
    assert!(!far.is_empty());
    for r in far {
        let pd = r.p_damped.unwrap();
        assert!(
            pd >= 2.0 * r.p_undamped,
            "N={}: {pd} vs {}",
            r.n,
            r.p_undamped
        );
    }
}

#[test]
fn numerical_source_tracks_closed_form_loosely() {
    // coarse grid; wires in the fence prefix only raise the frequency and the
    // half-wave count formula is an upper envelope
    let source = FrequencySource::Numerical {
        grid: Grid::new(0.0707, 65).unwrap(),
        wire_diameter: 1e-3,
        eigen: EigenOptions::default(),
    };
    let n: Vec<u64> = vec![0, 1, 5, 9];
    let f = scaled_frequencies(&source, &n).unwrap();
    assert!((f[0] - 1.0).abs() < 1e-12);
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    for (&ni, &fi) in n.iter().zip(&f) {
        assert!(
            fi <= 1.05 * frequency_from_wire_count(ni as f64),
            "N={ni}: {fi}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn crossing_lies_on_a_sub_threshold_bracket(
        ys in prop::collection::vec(1e-6..1.0f64, 3..12),
        th in 1e-4..0.5f64,
    ) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 - 5.0, y)).collect();
        match threshold_crossing(&pts, th) {
            Some(d) => {
                prop_assert!(d >= 0.0);
                prop_assert!(pts.iter().any(|&(_, y)| y < th));
            }
            None => prop_assert!(pts.iter().all(|&(_, y)| y >= th)),
        }
    }

    #[test]
    fn coupling_grows_with_frequency(a in 1.0..8.0f64, b in 1.0..8.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(coupling_scaling(4e6, lo) <= coupling_scaling(4e6, hi));
    }
}
