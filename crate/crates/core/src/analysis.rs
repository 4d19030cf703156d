//! Leakage budgets built on the other modules: detuning sweeps over wire
//! count, threshold crossings, multi-mode totals and the anticrossing fit.

use std::io::{Read, Write};

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bloch::{depolarizing_probability, DynamicsConfig, DEFAULT_TIME_POINTS};
use crate::constants::SURFACE_CODE_THRESHOLD;
use crate::fencing::{
    fence_wire_count, frequency_from_wire_count, generate_fence_layout, FencePlan, WireLayout,
};
use crate::helmholtz::{
    dominant_eigenmode_with, rasterize_wires, ConductorMask, EigenOptions, Grid,
};
use crate::physics::{
    dressed_frequencies, purcell_total_rate, CoupledSystem, Dispersive, QubitParameters,
};
use crate::{Error, Result};

/// g(N) = g0 · f̃_c^{3/2} at fixed cavity height and dipole moment.
pub fn coupling_scaling(g0: f64, f_tilde: f64) -> f64 {
    g0 * f_tilde.powf(1.5)
}

/// Where f̃_c(N) comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencySource {
    /// Inverse of the half-wave wire count formula, evaluated at real N.
    Analytic,
    /// Dominant mode of the first N wires of the coarse-to-fine half-wave
    /// fence layout (division factor 2), normalized to the empty cavity.
    Numerical {
        grid: Grid,
        wire_diameter: f64,
        eigen: EigenOptions,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub f_101: f64,
    pub f_q: f64,
    pub g0: f64,
    pub horizon: f64,
    pub t1: f64,
    pub t2: f64,
    pub n_range: Vec<u64>,
    pub p_threshold: f64,
    pub frequency_source: FrequencySource,
    /// Also integrate with γ_r = 1/T1, γ_d = 1/T2.
    pub damped: bool,
    /// Samples of ρ_ee over the horizon for the time average.
    pub time_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            f_101: 3e9,
            f_q: 6e9,
            g0: 4e6,
            horizon: 250e-9,
            t1: 100e-6,
            t2: 50e-6,
            n_range: (0..=33).collect(),
            p_threshold: SURFACE_CODE_THRESHOLD,
            frequency_source: FrequencySource::Analytic,
            damped: true,
            time_points: DEFAULT_TIME_POINTS,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("f_101", self.f_101),
            ("f_q", self.f_q),
            ("horizon", self.horizon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("sweep", format!("{what} = {v} must be > 0")));
            }
        }
        if !(self.g0.is_finite() && self.g0 >= 0.0) {
            return Err(Error::invalid(
                "sweep",
                format!("g0 = {} must be >= 0", self.g0),
            ));
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(Error::invalid("sweep", "T1 and T2 must be > 0"));
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(Error::invalid(
                "sweep",
                format!("T2 = {} s exceeds 2 T1", self.t2),
            ));
        }
        if !(self.p_threshold > 0.0 && self.p_threshold < 1.0) {
            return Err(Error::invalid(
                "sweep",
                format!("threshold {} not in (0, 1)", self.p_threshold),
            ));
        }
        if self.time_points < 2 {
            return Err(Error::invalid("sweep", "need at least 2 time points"));
        }
        if self.n_range.is_empty() {
            return Err(Error::invalid("sweep", "empty wire-count range"));
        }
        if self.n_range.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "sweep",
                "wire counts must be strictly increasing",
            ));
        }
        Ok(())
    }

    pub fn qubit(&self) -> Result<QubitParameters> {
        QubitParameters::from_times(self.f_q, 0.0, self.t1, self.t2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "f_tilde_c")]
    pub f_tilde: f64,
    #[serde(rename = "delta_Hz")]
    pub delta: f64,
    #[serde(rename = "g_Hz")]
    pub g: f64,
    pub p_undamped: f64,
    pub p_damped: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Smallest |Δ| at which the interpolated undamped curve is below
    /// threshold.
    pub threshold_crossing_delta: Option<f64>,
}

impl SweepResult {
    /// Columns: N, f_tilde_c, delta_Hz, g_Hz, p_undamped, p_damped (empty
    /// when not computed).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// f̃_c for every requested N, in order.
pub fn scaled_frequencies(source: &FrequencySource, n_range: &[u64]) -> Result<Vec<f64>> {
    match source {
        FrequencySource::Analytic => Ok(n_range
            .iter()
            .map(|&n| frequency_from_wire_count(n as f64))
            .collect()),
        FrequencySource::Numerical {
            grid,
            wire_diameter,
            eigen,
        } => {
            let empty =
                dominant_eigenmode_with(grid, &ConductorMask::empty(grid), eigen)?.frequency;
            n_range
                .par_iter()
                .map(|&n| {
                    let layout = fence_prefix(grid.side, *wire_diameter, n)?;
                    let f = dominant_eigenmode_with(grid, &rasterize_wires(grid, &layout)?, eigen)?
                        .frequency;
                    Ok(f / empty)
                })
                .collect()
        }
    }
}

/// First `n` wires of the smallest half-wave fence layout holding at least
/// `n` wires.
pub fn fence_prefix(side: f64, wire_diameter: f64, n: u64) -> Result<WireLayout> {
    let mut d = 0;
    while fence_wire_count(d, 2) < n {
        d += 1;
    }
    let mut layout = generate_fence_layout(&FencePlan::half_wave(d, side, wire_diameter)?)?;
    layout.centers.truncate(n as usize);
    Ok(layout)
}

pub fn leakage_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let f_tilde = scaled_frequencies(&cfg.frequency_source, &cfg.n_range)?;
    let (gamma_r, gamma_d) = (1.0 / cfg.t1, 1.0 / cfg.t2);
    let rows = cfg
        .n_range
        .par_iter()
        .zip(f_tilde.par_iter())
        .map(|(&n, &ft)| {
            let delta = ft * cfg.f_101 - cfg.f_q;
            let g = coupling_scaling(cfg.g0, ft);
            let undamped = DynamicsConfig {
                n_time_points: cfg.time_points,
                ..DynamicsConfig::undamped(g, delta, cfg.horizon)
            };
            let p_undamped = depolarizing_probability(&undamped)?;
            let p_damped = if cfg.damped {
                Some(depolarizing_probability(
                    &undamped.with_damping(gamma_r, gamma_d),
                )?)
            } else {
                None
            };
            Ok(SweepRow {
                n,
                f_tilde: ft,
                delta,
                g,
                p_undamped,
                p_damped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.p_undamped)).collect();
    Ok(SweepResult {
        threshold_crossing_delta: threshold_crossing(&curve, cfg.p_threshold),
        rows,
    })
}

/// Smallest |Δ| where the curve through `points` (sorted by Δ, linear in
/// ln p between neighbours) lies strictly below `threshold`.
pub fn threshold_crossing(points: &[(f64, f64)], threshold: f64) -> Option<f64> {
    const FLOOR: f64 = 1e-300;
    let lnp = |p: f64| p.max(FLOOR).ln();
    let below = |p: f64| p < threshold;
    let lt = threshold.ln();
    // min |Δ| over the interval [a, b]
    let closest = |a: f64, b: f64| {
        if a <= 0.0 && b >= 0.0 {
            0.0
        } else {
            a.abs().min(b.abs())
        }
    };
    let mut best: Option<f64> = None;
    let mut keep = |v: f64| best = Some(best.map_or(v, |b: f64| b.min(v)));
    for &(d, p) in points {
        if below(p) {
            keep(d.abs());
        }
    }
    for w in points.windows(2) {
        let ((da, pa), (db, pb)) = (w[0], w[1]);
        match (below(pa), below(pb)) {
            (true, true) => keep(closest(da, db)),
            (false, false) => {}
            (a_below, _) => {
                let t = (lt - lnp(pa)) / (lnp(pb) - lnp(pa));
                let dx = da + t.clamp(0.0, 1.0) * (db - da);
                if a_below {
                    keep(closest(da, dx));
                } else {
                    keep(closest(dx, db));
                }
            }
        }
    }
    best
}

/// Total error of independent modes, Σ p clamped to 1.
pub fn multimode_error(p_values: &[f64]) -> Result<f64> {
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid("probability", format!("{p} not in [0, 1]")));
    }
    Ok(p_values.iter().sum::<f64>().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
pub struct AnticrossingPoint {
    #[serde(rename = "f_R_Hz")]
    pub f_r: f64,
    #[serde(rename = "lower_Hz")]
    pub lower: f64,
    #[serde(rename = "upper_Hz")]
    pub upper: f64,
    #[serde(rename = "sigma_Hz", default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnticrossingData {
    pub points: Vec<AnticrossingPoint>,
}

pub const MIN_FIT_POINTS: usize = 4;

impl AnticrossingData {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < MIN_FIT_POINTS {
            return Err(Error::InsufficientData(format!(
                "{} points, at least {MIN_FIT_POINTS} required",
                self.points.len()
            )));
        }
        for p in &self.points {
            if ![p.f_r, p.lower, p.upper].iter().all(|v| v.is_finite()) {
                return Err(Error::invalid("anticrossing point", "non-finite frequency"));
            }
            if !(p.lower < p.upper) {
                return Err(Error::invalid(
                    "anticrossing point",
                    format!("lower {} Hz is not below upper {} Hz", p.lower, p.upper),
                ));
            }
            if let Some(s) = p.sigma {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::invalid(
                        "anticrossing point",
                        format!("sigma {s} must be > 0"),
                    ));
                }
            }
        }
        let weighted = self.points.iter().filter(|p| p.sigma.is_some()).count();
        if weighted != 0 && weighted != self.points.len() {
            return Err(Error::invalid(
                "anticrossing data",
                "sigma given for some points only",
            ));
        }
        let first = self.points[0].f_r;
        if self.points.iter().all(|p| p.f_r == first) {
            return Err(Error::Degenerate("all f_R values are equal".into()));
        }
        Ok(())
    }

    /// Columns f_R_Hz, lower_Hz, upper_Hz and optionally sigma_Hz.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let points = reader
            .deserialize()
            .collect::<std::result::Result<Vec<AnticrossingPoint>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(AnticrossingData { points })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticrossingFit {
    pub g: f64,
    pub f_c: f64,
    /// 95% confidence half-widths.
    pub g_ci95: f64,
    pub f_c_ci95: f64,
    pub rms_residual: f64,
    pub iterations: usize,
    pub degrees_of_freedom: usize,
}

impl std::fmt::Display for AnticrossingFit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "g_Hz = {:.9e} +/- {:.3e} (95%)", self.g, self.g_ci95)?;
        writeln!(
            f,
            "f_c_Hz = {:.9e} +/- {:.3e} (95%)",
            self.f_c, self.f_c_ci95
        )?;
        writeln!(f, "rms_residual_Hz = {:.3e}", self.rms_residual)?;
        writeln!(f, "degrees_of_freedom = {}", self.degrees_of_freedom)?;
        write!(f, "iterations = {}", self.iterations)
    }
}

const FIT_MAX_ITERATIONS: usize = 200;

/// Joint least-squares fit of both dressed branches for (g, f_c), with the
/// qubit detuning taken as f_c − f_R.
pub fn fit_anticrossing(data: &AnticrossingData) -> Result<AnticrossingFit> {
    data.validate()?;
    let pts = &data.points;
    let weighted = pts[0].sigma.is_some();
    // Work in units of the frequency spread to keep JᵀJ well scaled.
    let scale = pts.iter().map(|p| p.upper.abs()).fold(0.0, f64::max);
    let weight = |p: &AnticrossingPoint| scale / p.sigma.unwrap_or(scale);

    let residuals = |theta: Vector2<f64>| -> (Vec<f64>, Vec<[f64; 2]>) {
        let (g, fc) = (theta[0], theta[1]);
        let mut r = Vec::with_capacity(2 * pts.len());
        let mut jac = Vec::with_capacity(2 * pts.len());
        for p in pts {
            let (fr, lo, hi) = (p.f_r / scale, p.lower / scale, p.upper / scale);
            let (mlo, mhi) = dressed_frequencies(fc, g, fc - fr);
            let root = g.hypot(fc - fr).max(f64::MIN_POSITIVE);
            let ds_dg = 0.5 * g / root;
            let ds_dfc = 0.5 * (fc - fr) / root;
            let w = weight(p);
            r.push(w * (lo - mlo));
            jac.push([w * ds_dg, w * (ds_dfc - 0.5)]);
            r.push(w * (hi - mhi));
            jac.push([-w * ds_dg, -w * (0.5 + ds_dfc)]);
        }
        (r, jac)
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let normal = |r: &[f64], jac: &[[f64; 2]]| {
        let mut jtj = Matrix2::<f64>::zeros();
        let mut jtr = Vector2::<f64>::zeros();
        for (ri, ji) in r.iter().zip(jac) {
            for a in 0..2 {
                jtr[a] += ji[a] * ri;
                for b in 0..2 {
                    jtj[(a, b)] += ji[a] * ji[b];
                }
            }
        }
        (jtj, jtr)
    };

    // exact for the model: lower + upper = f_c + f_R
    let n = pts.len() as f64;
    let fc0 = pts
        .iter()
        .map(|p| (p.lower + p.upper - p.f_r) / scale)
        .sum::<f64>()
        / n;
    let g0 = (pts
        .iter()
        .map(|p| ((p.upper - p.lower) / scale).powi(2) - (fc0 - p.f_r / scale).powi(2))
        .sum::<f64>()
        / n)
        .max(0.0)
        .sqrt()
        .max(1e-9);
    let mut theta = Vector2::new(g0, fc0);
    let (mut r, mut jac) = residuals(theta);
    let mut current = cost(&r);
    let mut lambda: f64 = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        // jac holds ∂r/∂θ for r = w(data − model)
        let (jtj, jtr) = normal(&r, &jac);
        let mut damped = jtj;
        for a in 0..2 {
            damped[(a, a)] += lambda * jtj[(a, a)].max(1e-30);
        }
        let Some(step) = damped.try_inverse().map(|inv| inv * jtr) else {
            lambda *= 10.0;
            continue;
        };
        let trial = theta - step;
        let (tr, tj) = residuals(trial);
        let trial_cost = cost(&tr);
        if trial_cost <= current {
            let small = step
                .iter()
                .zip(theta.iter())
                .all(|(s, t)| s.abs() <= 1e-13 * t.abs().max(1e-9));
            theta = trial;
            r = tr;
            jac = tj;
            let improvement = current - trial_cost;
            current = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if small || improvement <= 1e-28 * current.max(1e-300) || current == 0.0 {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            solver: "anticrossing fit",
            iterations,
            residual: (current / (2.0 * n)).sqrt() * scale,
        });
    }

    let dof = 2 * pts.len() - 2;
    let (jtj, _) = normal(&r, &jac);
    let cov = jtj
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular normal matrix at the fit optimum".into()))?;
    let variance_scale = if weighted { 1.0 } else { current / dof as f64 };
    let t = StudentsT::new(0.0, 1.0, dof as f64)
        .map_err(|e| Error::invalid("degrees of freedom", e.to_string()))?
        .inverse_cdf(0.975);
    let half = |k: usize| t * (variance_scale * cov[(k, k)]).max(0.0).sqrt() * scale;
    let rms = pts
        .iter()
        .flat_map(|p| {
            let (lo, hi) = dressed_frequencies(
                theta[1] * scale,
                theta[0].abs() * scale,
                theta[1] * scale - p.f_r,
            );
            [p.lower - lo, p.upper - hi]
        })
        .map(|v| v * v)
        .sum::<f64>()
        / (2.0 * n);
    Ok(AnticrossingFit {
        g: theta[0].abs() * scale,
        f_c: theta[1] * scale,
        g_ci95: half(0),
        f_c_ci95: half(1),
        rms_residual: rms.sqrt(),
        iterations,
        degrees_of_freedom: dof,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// 2πg compared against max(γ_r, γ_d, κ_c), in 1/s.
    pub coupling_rate: f64,
    pub loss_rate: f64,
    /// Purcell-enhanced qubit decay when |Δ| ≥ 5g.
    pub purcell: Option<Dispersive>,
}

/// Strong coupling iff 2πg > max(γ_r, γ_d, κ_c); ties count as weak.
pub fn weak_coupling_regime_check(
    sys: &CoupledSystem,
    qubit: &QubitParameters,
) -> Result<RegimeReport> {
    let coupling_rate = 2.0 * std::f64::consts::PI * sys.coupling_g;
    let loss_rate = qubit
        .relaxation_rate
        .max(qubit.dephasing_rate)
        .max(sys.cavity_kappa);
    let regime = if coupling_rate > loss_rate {
        Regime::Strong
    } else {
        Regime::Weak
    };
    let dispersive = sys.detuning != 0.0
        && sys.detuning.abs() >= crate::physics::DISPERSIVE_RATIO * sys.coupling_g;
    let purcell = if dispersive {
        Some(purcell_total_rate(sys, qubit)?)
    } else {
        None
    };
    Ok(RegimeReport {
        regime,
        coupling_rate,
        loss_rate,
        purcell,
    })
}
