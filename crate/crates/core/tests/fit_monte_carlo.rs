mod common;

use cavleak_core::analysis::fit_anticrossing;
use proptest::prelude::*;

const G: f64 = 60e6;
const F_C: f64 = 9e9;

#[test]
fn noiseless_roundtrip() {
    let fit = fit_anticrossing(&common::synthetic_anticrossing(G, F_C, 300e6, 21, 0.0, 0)).unwrap();
    assert!((fit.g - G).abs() <= 1e-3 * G, "{fit}");
    assert!((fit.f_c - F_C).abs() <= 1e-6 * F_C, "{fit}");
}

#[test]
fn one_megahertz_noise_within_two_percent() {
    let ok = (0..100)
        .filter(|&seed| {
            let data = common::synthetic_anticrossing(G, F_C, 300e6, 21, 1e6, 1000 + seed);
            let fit = fit_anticrossing(&data).unwrap();
            (fit.g - G).abs() <= 0.02 * G
        })
        .count();
    assert!(ok >= 95, "{ok}/100");
}

/// The reported 95% interval should contain the true g about 95% of the time;
/// 200 seeds give a binomial standard error near 1.5%.
#[test]
fn confidence_interval_coverage() {
    let n = 200;
    let covered = (0..n)
        .filter(|&seed| {
            let data = common::synthetic_anticrossing(G, F_C, 300e6, 21, 2e6, 5000 + seed);
            let fit = fit_anticrossing(&data).unwrap();
            assert!(fit.g_ci95 > 0.0);
            (fit.g - G).abs() <= fit.g_ci95
        })
        .count();
    let rate = covered as f64 / n as f64;
    assert!((0.89..=0.99).contains(&rate), "coverage {rate}");
}

/// Empirical spread of g over seeds against the reported interval width.
#[test]
fn interval_width_matches_scatter() {
    let fits: Vec<_> = (0..200)
        .map(|seed| {
            fit_anticrossing(&common::synthetic_anticrossing(
                G,
                F_C,
                300e6,
                21,
                2e6,
                9000 + seed,
            ))
            .unwrap()
        })
        .collect();
    let mean = fits.iter().map(|f| f.g).sum::<f64>() / fits.len() as f64;
    let sd =
        (fits.iter().map(|f| (f.g - mean).powi(2)).sum::<f64>() / (fits.len() - 1) as f64).sqrt();
    let mean_half = fits.iter().map(|f| f.g_ci95).sum::<f64>() / fits.len() as f64;
    let implied_sd = mean_half / 2.0;
    assert!(
        (implied_sd / sd - 1.0).abs() < 0.25,
        "ci sd {implied_sd:e} vs scatter {sd:e}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_recovery_over_parameters(
        g in 5e6..300e6f64,
        f_c in 3e9..15e9f64,
        span_factor in 2.0..10.0f64,
        n in 4usize..30,
    ) {
        let data = common::synthetic_anticrossing(g, f_c, span_factor * g, n, 0.0, 0);
        let fit = fit_anticrossing(&data).unwrap();
        prop_assert!((fit.g - g).abs() <= 1e-6 * g, "g {} vs {}", fit.g, g);
        prop_assert!((fit.f_c - f_c).abs() <= 1e-9 * f_c);
    }
}
