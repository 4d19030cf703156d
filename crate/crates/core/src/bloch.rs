//! Semiclassical Maxwell-Bloch dynamics of a qubit coupled to one cavity mode,
//! and the depolarizing error probability derived from the excited-state
//! population.
//!
//! The state is the real 3-vector (ρ_ee, Re ρ̃_ge, Im ρ̃_ge) in the
//! interaction picture; ρ_gg = 1 − ρ_ee and ρ̃_eg = ρ̃_ge* are implied. With
//! Ω = 2πg and D = 2πΔ the equations of motion are linear:
//!
//! ```text
//! d/dt ρ_ee = Ω b − γ_r ρ_ee
//! d/dt a    = −γ_d a + D b
//! d/dt b    = Ω/2 (1 − 2 ρ_ee) − D a − γ_d b
//! ```
//!
//! where a + ib = ρ̃_ge. On resonance without damping ρ_ee(t) = cos²(π g t),
//! i.e. g is the vacuum Rabi frequency in hertz and the population period is
//! 1/g. The `sin²(g t / 2)` form sometimes quoted for the same quantity uses
//! an angular g; the two agree once the factor 2π is accounted for.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_TIME_POINTS: usize = 2000;

/// Steps per fastest period of the dynamics.
const STEPS_PER_PERIOD: f64 = 200.0;

/// Tolerance on ρ_ee leaving [0, 1] before the integration is declared
/// unstable.
const POPULATION_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub rho_ee: f64,
    pub rho_ge_re: f64,
    pub rho_ge_im: f64,
}

impl BlochState {
    /// Qubit in |e⟩, no coherence.
    pub const EXCITED: BlochState = BlochState {
        rho_ee: 1.0,
        rho_ge_re: 0.0,
        rho_ge_im: 0.0,
    };

    pub fn rho_gg(&self) -> f64 {
        1.0 - self.rho_ee
    }

    pub fn coherence_sq(&self) -> f64 {
        self.rho_ge_re * self.rho_ge_re + self.rho_ge_im * self.rho_ge_im
    }

    /// Population in [0, 1] and |ρ_ge|² ≤ ρ_ee ρ_gg (positive semidefinite
    /// density matrix), both up to `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.rho_ee >= -tol
            && self.rho_ee <= 1.0 + tol
            && self.coherence_sq() <= self.rho_ee * self.rho_gg() + tol
    }

    fn to_array(self) -> [f64; 3] {
        [self.rho_ee, self.rho_ge_re, self.rho_ge_im]
    }

    fn from_array(v: [f64; 3]) -> Self {
        BlochState {
            rho_ee: v[0],
            rho_ge_re: v[1],
            rho_ge_im: v[2],
        }
    }
}

impl Default for BlochState {
    fn default() -> Self {
        BlochState::EXCITED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Coupling g, Hz.
    pub coupling_g: f64,
    /// Δ = f_c − f_q, Hz.
    pub detuning: f64,
    /// Relaxation rate γ_r, 1/s.
    pub gamma_r: f64,
    /// Dephasing rate γ_d, 1/s.
    pub gamma_d: f64,
    /// Averaging horizon T, s.
    pub horizon: f64,
    pub n_time_points: usize,
}

impl DynamicsConfig {
    /// Undamped dynamics over `horizon` with the default sampling.
    pub fn undamped(coupling_g: f64, detuning: f64, horizon: f64) -> Self {
        DynamicsConfig {
            coupling_g,
            detuning,
            gamma_r: 0.0,
            gamma_d: 0.0,
            horizon,
            n_time_points: DEFAULT_TIME_POINTS,
        }
    }

    pub fn with_damping(mut self, gamma_r: f64, gamma_d: f64) -> Self {
        self.gamma_r = gamma_r;
        self.gamma_d = gamma_d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.coupling_g,
            self.detuning,
            self.gamma_r,
            self.gamma_d,
            self.horizon,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("dynamics config", "non-finite parameter"));
        }
        if self.coupling_g < 0.0 {
            return Err(Error::invalid("dynamics config", "coupling g must be >= 0"));
        }
        if self.gamma_r < 0.0 || self.gamma_d < 0.0 {
            return Err(Error::invalid(
                "dynamics config",
                "damping rates must be >= 0",
            ));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::invalid("dynamics config", "horizon T must be > 0"));
        }
        if self.n_time_points < 2 {
            return Err(Error::invalid(
                "dynamics config",
                "need at least 2 time points",
            ));
        }
        Ok(())
    }

    /// Largest RK4 step allowed for these parameters, or `None` when nothing
    /// evolves.
    pub fn max_step(&self) -> Option<f64> {
        let fastest = self
            .coupling_g
            .max(self.detuning.abs())
            .max((self.gamma_r + self.gamma_d) / (2.0 * PI));
        (fastest > 0.0).then(|| 1.0 / (STEPS_PER_PERIOD * fastest))
    }

    /// Affine generator (M, c) of dx/dt = M x + c on (ρ_ee, a, b).
    pub fn generator(&self) -> ([[f64; 3]; 3], [f64; 3]) {
        let omega = 2.0 * PI * self.coupling_g;
        let d = 2.0 * PI * self.detuning;
        let (gr, gd) = (self.gamma_r, self.gamma_d);
        (
            [[-gr, 0.0, omega], [0.0, -gd, d], [-omega, -d, -gd]],
            [0.0, 0.0, 0.5 * omega],
        )
    }
}

/// Sampled trajectory; `times[i]` pairs with `states[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
}

impl Trajectory {
    /// CSV with columns `time_s,rho_ee,re_rho_ge,im_rho_ge`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "rho_ee", "re_rho_ge", "im_rho_ge"])?;
        for (t, s) in self.times.iter().zip(&self.states) {
            w.write_record(&[
                format!("{t:e}"),
                format!("{:e}", s.rho_ee),
                format!("{:e}", s.rho_ge_re),
                format!("{:e}", s.rho_ge_im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn deriv(m: &[[f64; 3]; 3], c: &[f64; 3], x: &[f64; 3]) -> [f64; 3] {
    let mut out = *c;
    for (o, row) in out.iter_mut().zip(m) {
        *o += row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
    }
    out
}

fn axpy(x: &[f64; 3], a: f64, k: &[f64; 3]) -> [f64; 3] {
    [x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]]
}

fn rk4_step(m: &[[f64; 3]; 3], c: &[f64; 3], x: &[f64; 3], h: f64) -> [f64; 3] {
    let k1 = deriv(m, c, x);
    let k2 = deriv(m, c, &axpy(x, 0.5 * h, &k1));
    let k3 = deriv(m, c, &axpy(x, 0.5 * h, &k2));
    let k4 = deriv(m, c, &axpy(x, h, &k3));
    let mut out = *x;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn check_initial(initial: &BlochState) -> Result<()> {
    if !initial.is_physical(1e-9) {
        return Err(Error::invalid(
            "initial state",
            format!("{initial:?} is not a valid density matrix"),
        ));
    }
    Ok(())
}

/// Integrate with fixed-step RK4 and report the state at each of `times`
/// (non-decreasing, starting at or after 0). `step_scale` multiplies the
/// maximum step; 1.0 is the default accuracy.
pub fn integrate_at_times(
    cfg: &DynamicsConfig,
    initial: &BlochState,
    times: &[f64],
    step_scale: f64,
) -> Result<Vec<BlochState>> {
    cfg.validate()?;
    check_initial(initial)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid(
            "sample times",
            "must be non-negative and non-decreasing",
        ));
    }
    let (m, c) = cfg.generator();
    let max_step = cfg.max_step().map(|h| h * step_scale);
    let mut x = initial.to_array();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            if let Some(h_max) = max_step {
                let steps = (span / h_max).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for _ in 0..steps {
                    x = rk4_step(&m, &c, &x, h);
                }
            }
            t = target;
        }
        if !(x[0] >= -POPULATION_SLACK && x[0] <= 1.0 + POPULATION_SLACK) {
            return Err(Error::Unstable {
                time: t,
                rho_ee: x[0],
            });
        }
        out.push(BlochState::from_array(x));
    }
    Ok(out)
}

/// Equally spaced sample times over [0, T].
pub fn sample_times(cfg: &DynamicsConfig) -> Vec<f64> {
    let n = cfg.n_time_points;
    let dt = cfg.horizon / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                cfg.horizon
            } else {
                i as f64 * dt
            }
        })
        .collect()
}

/// Trajectory on `cfg.n_time_points` equally spaced samples of [0, T].
pub fn integrate_maxwell_bloch(cfg: &DynamicsConfig, initial: &BlochState) -> Result<Trajectory> {
    cfg.validate()?;
    let times = sample_times(cfg);
    let states = integrate_at_times(cfg, initial, &times, 1.0)?;
    Ok(Trajectory { times, states })
}

/// P_e(t) = ρ_ee(t).
pub fn excited_probability_trace(trajectory: &Trajectory) -> Vec<f64> {
    trajectory.states.iter().map(|s| s.rho_ee).collect()
}

/// Trapezoidal integral of equally spaced samples divided by the span, i.e.
/// the time average.
pub fn trapezoid_mean(samples: &[f64]) -> f64 {
    match samples {
        [] => 0.0,
        [x] => *x,
        _ => {
            let n = samples.len();
            let interior: f64 = samples[1..n - 1].iter().sum();
            (0.5 * (samples[0] + samples[n - 1]) + interior) / (n - 1) as f64
        }
    }
}

fn depolarizing_from(cfg: &DynamicsConfig, step_scale: f64) -> Result<f64> {
    cfg.validate()?;
    let times = sample_times(cfg);
    let states = integrate_at_times(cfg, &BlochState::EXCITED, &times, step_scale)?;
    let pe: Vec<f64> = states.iter().map(|s| s.rho_ee).collect();
    Ok((1.0 - trapezoid_mean(&pe)).clamp(0.0, 1.0))
}

/// p = 1 − (1/T) ∫₀ᵀ P_e dt for a qubit starting in |e⟩, trapezoidal
/// quadrature on the output samples, clamped to [0, 1].
pub fn depolarizing_probability(cfg: &DynamicsConfig) -> Result<f64> {
    depolarizing_from(cfg, 1.0)
}

/// Same quadrature with the integrator step multiplied by `step_scale`
/// (< 1 refines). Used for convergence checks.
pub fn depolarizing_probability_with_step(cfg: &DynamicsConfig, step_scale: f64) -> Result<f64> {
    if !(step_scale > 0.0) {
        return Err(Error::invalid("step scale", "must be > 0"));
    }
    depolarizing_from(cfg, step_scale)
}

/// Error probability from qubit damping alone (g = 0).
pub fn incoherent_floor(cfg: &DynamicsConfig) -> Result<f64> {
    depolarizing_probability(&DynamicsConfig {
        coupling_g: 0.0,
        ..*cfg
    })
}
