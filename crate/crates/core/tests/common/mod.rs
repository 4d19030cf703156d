//! Oracles shared by the integration tests. Each one is written from the
//! defining equations without going through the library code path it checks.

#![allow(dead_code)]

use std::f64::consts::PI;

use cavleak_core::analysis::{AnticrossingData, AnticrossingPoint};
use cavleak_core::bloch::DynamicsConfig;
use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// (ρ_ee, Re ρ̃_ge, Im ρ̃_ge) at time `t` from |e⟩, by exponentiating the
/// affine generator embedded in 4×4 homogeneous form.
pub fn bloch_expm(cfg: &DynamicsConfig, t: f64) -> [f64; 3] {
    let om = 2.0 * PI * cfg.coupling_g;
    let d = 2.0 * PI * cfg.detuning;
    let (gr, gd) = (cfg.gamma_r, cfg.gamma_d);
    #[rustfmt::skip]
    let a = Matrix4::new(
        -gr, 0.0, om, 0.0,
        0.0, -gd, d, 0.0,
        -om, -d, -gd, 0.5 * om,
        0.0, 0.0, 0.0, 0.0,
    );
    let y = (a * t).exp() * Vector4::new(1.0, 0.0, 0.0, 1.0);
    [y[0], y[1], y[2]]
}

/// Random dynamics configuration with positivity-preserving rates
/// (γ_d ≥ γ_r/2).
pub fn random_dynamics(rng: &mut ChaCha8Rng) -> DynamicsConfig {
    let g = rng.random_range(0.5e6..12e6);
    let delta = rng.random_range(-30e6..30e6);
    let gamma_r = if rng.random_bool(0.3) {
        0.0
    } else {
        rng.random_range(0.0..2e6)
    };
    let gamma_d = gamma_r / 2.0 + rng.random_range(0.0..2e6);
    DynamicsConfig::undamped(g, delta, 1e-6).with_damping(gamma_r, gamma_d)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dressed branches with splitting g at f_R = f_c:
/// (f_R + f_c)/2 ∓ ½ sqrt(g² + (f_c − f_R)²).
pub fn dressed_pair(g: f64, f_c: f64, f_r: f64) -> (f64, f64) {
    let mid = 0.5 * (f_r + f_c);
    let half = 0.5 * (g * g + (f_c - f_r) * (f_c - f_r)).sqrt();
    (mid - half, mid + half)
}

/// `n` sweep points of f_R centred on f_c spanning ±`span`, both branches
/// perturbed by independent N(0, σ²) noise.
pub fn synthetic_anticrossing(
    g: f64,
    f_c: f64,
    span: f64,
    n: usize,
    sigma: f64,
    seed: u64,
) -> AnticrossingData {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    let points = (0..n)
        .map(|i| {
            let f_r = f_c - span + 2.0 * span * i as f64 / (n - 1) as f64;
            let (lo, hi) = dressed_pair(g, f_c, f_r);
            let (e1, e2) = if sigma > 0.0 {
                (noise.sample(&mut r), noise.sample(&mut r))
            } else {
                (0.0, 0.0)
            };
            AnticrossingPoint {
                f_r,
                lower: lo + e1,
                upper: hi + e2,
                sigma: None,
            }
        })
        .collect();
    AnticrossingData { points }
}

/// Dominant 2D membrane frequency of an empty square of side `l`:
/// c/(√2 l) for ε_r = 1.
pub fn membrane_f101(l: f64) -> f64 {
    cavleak_core::constants::SPEED_OF_LIGHT / (std::f64::consts::SQRT_2 * l)
}

/// Lowest eigenvalue of the 5-point Dirichlet Laplacian on an n×n interior
/// grid (grid units): 4 sin²(π/(2(n+1))) · 2.
pub fn discrete_lowest(interior: usize) -> f64 {
    8.0 * (PI / (2.0 * (interior + 1) as f64)).sin().powi(2)
}
