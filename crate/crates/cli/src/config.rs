//! Run configuration file. Every key carries its unit in the name; absent
//! keys take the defaults below.

use std::path::Path;

use serde::Deserialize;

use cavleak_core::analysis::{FrequencySource, SweepConfig};
use cavleak_core::bloch::DEFAULT_TIME_POINTS;
use cavleak_core::constants::SURFACE_CODE_THRESHOLD;
use cavleak_core::fencing::FencePlan;
use cavleak_core::helmholtz::{
    EigenOptions, Grid, DEFAULT_RESOLUTION, DEFAULT_THRESHOLD, MAX_ITERATIONS,
};
use cavleak_core::physics::CavityGeometry;
use cavleak_core::pinning::{PinningConfig, Separation};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub modes: ModesSection,
    pub grid: GridSection,
    pub fence: FenceSection,
    pub pinning: PinningSection,
    pub sweep: SweepSection,
    pub dynamics: DynamicsSection,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub length_mm: f64,
    pub height_mm: f64,
    pub depth_mm: f64,
    pub eps_r: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            length_mm: 72.0,
            height_mm: 3.0,
            depth_mm: 72.0,
            eps_r: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModesSection {
    pub count: usize,
    pub max_index: u32,
}

impl Default for ModesSection {
    fn default() -> Self {
        ModesSection {
            count: 10,
            max_index: 8,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub resolution: usize,
    /// Eigensolver iteration cap; exceeding it is a numerical failure.
    pub max_iterations: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            resolution: DEFAULT_RESOLUTION,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FenceSection {
    pub division_factor: u32,
    pub iterations: u32,
    pub wire_um: f64,
}

impl Default for FenceSection {
    fn default() -> Self {
        FenceSection {
            division_factor: 2,
            iterations: 1,
            wire_um: 500.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PinningSection {
    pub max_wires: usize,
    pub target_ghz: Option<f64>,
    pub wire_um: f64,
    pub theta: f64,
    /// At most one of the two separation keys may be set.
    pub separation_mm: Option<f64>,
    pub separation_wavelengths: Option<f64>,
}

impl Default for PinningSection {
    fn default() -> Self {
        PinningSection {
            max_wires: 89,
            target_ghz: None,
            wire_um: 500.0,
            theta: DEFAULT_THRESHOLD,
            separation_mm: None,
            separation_wavelengths: Some(DEFAULT_SEPARATION_WAVELENGTHS),
        }
    }
}

/// Wire spacing as a fraction of the dominant-mode wavelength.
pub const DEFAULT_SEPARATION_WAVELENGTHS: f64 = 0.1;

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SourceKey {
    Analytic,
    Numerical,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub f101_ghz: f64,
    pub fq_ghz: f64,
    pub g0_mhz: f64,
    pub horizon_ns: f64,
    pub t1_us: f64,
    pub t2_us: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub p_threshold: f64,
    pub frequency_source: SourceKey,
    pub damped: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            f101_ghz: 3.0,
            fq_ghz: 6.0,
            g0_mhz: 4.0,
            horizon_ns: 250.0,
            t1_us: 100.0,
            t2_us: 50.0,
            n_min: 0,
            n_max: 33,
            p_threshold: SURFACE_CODE_THRESHOLD,
            frequency_source: SourceKey::Analytic,
            damped: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSection {
    pub time_points: usize,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            time_points: DEFAULT_TIME_POINTS,
        }
    }
}

fn bad(what: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{what}: {reason}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| bad(&path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn cavity(&self) -> Result<CavityGeometry, CliError> {
        let g = &self.geometry;
        Ok(CavityGeometry::new(
            g.length_mm * 1e-3,
            g.height_mm * 1e-3,
            g.depth_mm * 1e-3,
            g.eps_r,
        )?)
    }

    /// The 2D cross-section must be square.
    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = &self.geometry;
        if g.length_mm != g.depth_mm {
            return Err(bad(
                "geometry",
                format!(
                    "cross-section {} mm x {} mm is not square",
                    g.length_mm, g.depth_mm
                ),
            ));
        }
        Ok(Grid::new(g.length_mm * 1e-3, self.grid.resolution)?.with_permittivity(g.eps_r)?)
    }

    pub fn fence_plan(&self) -> Result<FencePlan, CliError> {
        let f = &self.fence;
        Ok(FencePlan::new(
            f.division_factor,
            f.iterations,
            self.geometry.length_mm * 1e-3,
            f.wire_um * 1e-6,
        )?)
    }

    pub fn pinning(&self, eigen: EigenOptions) -> Result<PinningConfig, CliError> {
        let p = &self.pinning;
        let separation = match (p.separation_mm, p.separation_wavelengths) {
            (Some(_), Some(_)) => {
                return Err(bad(
                    "pinning",
                    "set at most one of separation_mm and separation_wavelengths",
                ))
            }
            (Some(mm), None) => Separation::Fixed(mm * 1e-3),
            (None, Some(w)) => Separation::Wavelengths(w),
            (None, None) => Separation::Default,
        };
        let cfg = PinningConfig {
            target_frequency: p.target_ghz.map(|f| f * 1e9),
            max_wires: p.max_wires,
            wire_diameter: p.wire_um * 1e-6,
            threshold_theta: p.theta,
            separation,
            grid: self.grid()?,
            eigen,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sweep(&self, eigen: EigenOptions) -> Result<SweepConfig, CliError> {
        let s = &self.sweep;
        if s.n_min > s.n_max {
            return Err(bad(
                "sweep",
                format!("n_min {} > n_max {}", s.n_min, s.n_max),
            ));
        }
        let frequency_source = match s.frequency_source {
            SourceKey::Analytic => FrequencySource::Analytic,
            SourceKey::Numerical => {
                // the solver grid spans a square box whose f_101 matches the sweep
                let side = cavleak_core::constants::SPEED_OF_LIGHT
                    / (std::f64::consts::SQRT_2 * s.f101_ghz * 1e9);
                FrequencySource::Numerical {
                    grid: Grid::new(side, self.grid.resolution)?,
                    wire_diameter: self.pinning.wire_um * 1e-6,
                    eigen,
                }
            }
        };
        let cfg = SweepConfig {
            f_101: s.f101_ghz * 1e9,
            f_q: s.fq_ghz * 1e9,
            g0: s.g0_mhz * 1e6,
            horizon: s.horizon_ns * 1e-9,
            t1: s.t1_us * 1e-6,
            t2: s.t2_us * 1e-6,
            n_range: (s.n_min..=s.n_max).collect(),
            p_threshold: s.p_threshold,
            frequency_source,
            damped: s.damped,
            time_points: self.dynamics.time_points,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
