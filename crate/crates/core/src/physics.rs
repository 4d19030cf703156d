//! Closed-form cavity electromagnetics and Jaynes-Cummings relations.
//!
//! Every frequency in this module is a linear frequency in hertz. Angular
//! factors only show up inside the Bloch integrator.

use serde::{Deserialize, Serialize};

use crate::constants::{PLANCK, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::{Error, Result};

/// Minimum |Δ|/g for which the dispersive formulas are trusted without a
/// warning.
pub const DISPERSIVE_RATIO: f64 = 5.0;

/// Rectangular box with side `length_a` along x, `height_b` along y and
/// `depth_e` along z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub length_a: f64,
    pub height_b: f64,
    pub depth_e: f64,
    pub relative_permittivity: f64,
}

impl CavityGeometry {
    pub fn new(
        length_a: f64,
        height_b: f64,
        depth_e: f64,
        relative_permittivity: f64,
    ) -> Result<Self> {
        let geom = CavityGeometry {
            length_a,
            height_b,
            depth_e,
            relative_permittivity,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Square cross-section `side × side`, height `height`, vacuum filling.
    pub fn square(side: f64, height: f64) -> Result<Self> {
        Self::new(side, height, side, 1.0)
    }

    pub fn with_permittivity(mut self, relative_permittivity: f64) -> Result<Self> {
        self.relative_permittivity = relative_permittivity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length_a", self.length_a),
            ("height_b", self.height_b),
            ("depth_e", self.depth_e),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    "cavity geometry",
                    format!("{name} = {v} must be > 0"),
                ));
            }
        }
        if !(self.relative_permittivity.is_finite() && self.relative_permittivity >= 1.0) {
            return Err(Error::invalid(
                "cavity geometry",
                format!(
                    "relative permittivity {} must be >= 1",
                    self.relative_permittivity
                ),
            ));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.length_a * self.height_b * self.depth_e
    }

    /// Phase velocity c/√ε_r inside the filling.
    pub fn wave_speed(&self) -> f64 {
        SPEED_OF_LIGHT / self.relative_permittivity.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParameters {
    pub transition_frequency: f64,
    pub dipole_moment: f64,
    pub relaxation_rate: f64,
    pub dephasing_rate: f64,
}

impl QubitParameters {
    pub fn new(
        transition_frequency: f64,
        dipole_moment: f64,
        relaxation_rate: f64,
        dephasing_rate: f64,
    ) -> Result<Self> {
        if !(transition_frequency.is_finite() && transition_frequency > 0.0) {
            return Err(Error::invalid("qubit", "transition frequency must be > 0"));
        }
        if dipole_moment < 0.0 || relaxation_rate < 0.0 || dephasing_rate < 0.0 {
            return Err(Error::invalid(
                "qubit",
                "dipole moment and rates must be >= 0",
            ));
        }
        Ok(QubitParameters {
            transition_frequency,
            dipole_moment,
            relaxation_rate,
            dephasing_rate,
        })
    }

    /// Rates from coherence times: γ_r = 1/T1, γ_d = 1/T2. Requires T2 ≤ 2 T1.
    pub fn from_times(
        transition_frequency: f64,
        dipole_moment: f64,
        t1: f64,
        t2: f64,
    ) -> Result<Self> {
        if !(t1 > 0.0 && t2 > 0.0) {
            return Err(Error::invalid("qubit", "T1 and T2 must be > 0"));
        }
        if t2 > 2.0 * t1 {
            return Err(Error::invalid(
                "qubit",
                format!("T2 = {t2} exceeds 2 T1 = {}", 2.0 * t1),
            ));
        }
        Self::new(transition_frequency, dipole_moment, 1.0 / t1, 1.0 / t2)
    }
}

/// Number of half wavelengths along x (`n`), y (`m`) and z (`l`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CavityModeIndex {
    pub n: u32,
    pub m: u32,
    pub l: u32,
}

impl CavityModeIndex {
    pub const TE101: CavityModeIndex = CavityModeIndex { n: 1, m: 0, l: 1 };

    pub fn new(n: u32, m: u32, l: u32) -> Result<Self> {
        if n == 0 && m == 0 && l == 0 {
            return Err(Error::invalid("mode index", "(0, 0, 0) is not a mode"));
        }
        Ok(CavityModeIndex { n, m, l })
    }

    /// A closed box only resonates when at least two indices are non-zero.
    pub fn is_physical(&self) -> bool {
        [self.n, self.m, self.l].iter().filter(|&&i| i > 0).count() >= 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSystem {
    pub coupling_g: f64,
    /// Δ = f_c − f_q.
    pub detuning: f64,
    pub cavity_kappa: f64,
}

/// A value computed outside the regime where its approximation holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveWarning {
    /// |Δ|/g at the evaluation point.
    pub ratio: f64,
    pub required: f64,
}

impl std::fmt::Display for DispersiveWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "dispersive approximation used at |Δ|/g = {:.3} < {}",
            self.ratio, self.required
        )
    }
}

/// Result of a dispersive-regime formula with an optional validity warning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersive {
    pub value: f64,
    pub warning: Option<DispersiveWarning>,
}

fn dispersive_check(g: f64, delta: f64) -> Option<DispersiveWarning> {
    let ratio = if g == 0.0 {
        f64::INFINITY
    } else {
        delta.abs() / g
    };
    if ratio < DISPERSIVE_RATIO {
        let w = DispersiveWarning {
            ratio,
            required: DISPERSIVE_RATIO,
        };
        log::warn!("{w}");
        Some(w)
    } else {
        None
    }
}

/// Resonance frequency of the (n, m, l) mode of a rectangular box, using the
/// phase velocity c/√ε_r of the filling.
pub fn mode_frequency(geom: &CavityGeometry, idx: CavityModeIndex) -> Result<f64> {
    geom.validate()?;
    let idx = CavityModeIndex::new(idx.n, idx.m, idx.l)?;
    let kx = idx.n as f64 / geom.length_a;
    let ky = idx.m as f64 / geom.height_b;
    let kz = idx.l as f64 / geom.depth_e;
    Ok(0.5 * geom.wave_speed() * (kx * kx + ky * ky + kz * kz).sqrt())
}

/// Physical modes sorted by frequency, enumerated with each index up to
/// `max_index`.
pub fn lowest_modes(
    geom: &CavityGeometry,
    count: usize,
    max_index: u32,
) -> Result<Vec<(CavityModeIndex, f64)>> {
    geom.validate()?;
    let mut modes = Vec::new();
    for n in 0..=max_index {
        for m in 0..=max_index {
            for l in 0..=max_index {
                let idx = CavityModeIndex { n, m, l };
                if idx.is_physical() {
                    modes.push((idx, mode_frequency(geom, idx)?));
                }
            }
        }
    }
    modes.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    modes.truncate(count);
    Ok(modes)
}

/// Zero-point electric field sqrt(h f_c / (2 ε0 V)) of a mode at `f_c`.
pub fn zero_point_field(geom: &CavityGeometry, f_c: f64) -> Result<f64> {
    geom.validate()?;
    let volume = geom.volume();
    if !(volume > 0.0) {
        return Err(Error::invalid("cavity geometry", "volume must be > 0"));
    }
    if !(f_c > 0.0) {
        return Err(Error::invalid(
            "frequency",
            format!("f_c = {f_c} must be > 0"),
        ));
    }
    Ok((PLANCK * f_c / (2.0 * VACUUM_PERMITTIVITY * volume)).sqrt())
}

/// Zero-point field of the lowest mode of a square fence cell of height
/// `height`: (1/c) sqrt(h f_c³ / (ε0 H)).
///
/// The expression assumes the cell side is tied to the frequency through
/// a = c/(√2 f_c); it is rejected above the dominant frequency of a cell of
/// side `cell_side` (the smallest cell sets the cutoff).
pub fn cell_zero_point_field(cell_side: f64, height: f64, f_c: f64) -> Result<f64> {
    if !(cell_side > 0.0 && height > 0.0) {
        return Err(Error::invalid("cell", "side and height must be > 0"));
    }
    if !(f_c > 0.0) {
        return Err(Error::invalid(
            "frequency",
            format!("f_c = {f_c} must be > 0"),
        ));
    }
    let cutoff = SPEED_OF_LIGHT / (std::f64::consts::SQRT_2 * cell_side);
    if f_c > cutoff * (1.0 + 1e-9) {
        return Err(Error::invalid(
            "frequency",
            format!("f_c = {f_c:.6e} Hz exceeds the cell cutoff {cutoff:.6e} Hz"),
        ));
    }
    Ok((PLANCK * f_c.powi(3) / (VACUUM_PERMITTIVITY * height)).sqrt() / SPEED_OF_LIGHT)
}

/// g = E0 p_q / h for a qubit sitting at a field antinode. Inputs are
/// expected non-negative.
pub fn coupling_from_field(field: f64, dipole_moment: f64) -> f64 {
    debug_assert!(field >= 0.0 && dipole_moment >= 0.0);
    field * dipole_moment / PLANCK
}

/// Dressed single-excitation frequencies (lower, upper) relative to the ground
/// state: f_c ∓ ½ sqrt(g² + Δ²) − ½ Δ.
pub fn dressed_frequencies(f_c: f64, g: f64, delta: f64) -> (f64, f64) {
    let half_split = 0.5 * g.hypot(delta);
    let center = f_c - 0.5 * delta;
    (center - half_split, center + half_split)
}

/// Qubit decoherence rate including the Purcell term:
/// (γ_r + γ_d)/2 + (g/Δ)² κ_c.
pub fn purcell_total_rate(sys: &CoupledSystem, qubit: &QubitParameters) -> Result<Dispersive> {
    if sys.detuning == 0.0 {
        return Err(Error::invalid(
            "detuning",
            "Purcell rate is undefined at Δ = 0",
        ));
    }
    if sys.coupling_g < 0.0 || sys.cavity_kappa < 0.0 {
        return Err(Error::invalid("coupled system", "g and κ_c must be >= 0"));
    }
    let warning = dispersive_check(sys.coupling_g, sys.detuning);
    let bare = 0.5 * (qubit.relaxation_rate + qubit.dephasing_rate);
    let ratio = sys.coupling_g / sys.detuning;
    Ok(Dispersive {
        value: bare + ratio * ratio * sys.cavity_kappa,
        warning,
    })
}

/// Effective cavity-mediated qubit-qubit coupling g²/Δ.
pub fn dispersive_qq_coupling(g: f64, delta: f64) -> Result<Dispersive> {
    if delta == 0.0 {
        return Err(Error::invalid(
            "detuning",
            "dispersive coupling is undefined at Δ = 0",
        ));
    }
    let warning = dispersive_check(g, delta);
    Ok(Dispersive {
        value: g * g / delta,
        warning,
    })
}
