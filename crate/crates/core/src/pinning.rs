//! Antinode pinning: solve, put wires on the field maxima, repeat.

use std::io::Write;

use serde::Serialize;

use crate::fencing::{distance, WireLayout};
use crate::helmholtz::{
    default_min_separation, dominant_eigenmode_with, find_antinodes_excluding, rasterize_wires,
    EigenOptions, EigenSolution, Grid, DEFAULT_THRESHOLD,
};
use crate::{Error, Result};

pub const MAX_WIRES: usize = 300;
/// Relative frequency gain per iteration below which progress has stalled.
pub const STAGNATION_GAIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PinningConfig {
    pub target_frequency: Option<f64>,
    pub max_wires: usize,
    pub wire_diameter: f64,
    pub threshold_theta: f64,
    pub separation: Separation,
    pub grid: Grid,
    pub eigen: EigenOptions,
}

impl PinningConfig {
    pub fn new(grid: Grid, wire_diameter: f64, max_wires: usize) -> Result<Self> {
        let cfg = PinningConfig {
            target_frequency: None,
            max_wires,
            wire_diameter,
            threshold_theta: DEFAULT_THRESHOLD,
            separation: Separation::Default,
            grid,
            eigen: EigenOptions::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.max_wires > MAX_WIRES {
            return Err(Error::invalid(
                "wire budget",
                format!("{} > {MAX_WIRES}", self.max_wires),
            ));
        }
        if !(self.wire_diameter > 0.0 && self.wire_diameter < self.grid.side) {
            return Err(Error::invalid(
                "wire diameter",
                format!("{} m", self.wire_diameter),
            ));
        }
        if !(self.threshold_theta > 0.0 && self.threshold_theta <= 1.0) {
            return Err(Error::invalid(
                "antinode threshold",
                format!("{}", self.threshold_theta),
            ));
        }
        if let Some(f) = self.target_frequency {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::invalid("target frequency", format!("{f} Hz")));
            }
        }
        match self.separation {
            Separation::Fixed(s) if !(s.is_finite() && s >= 0.0) => {
                Err(Error::invalid("minimum separation", format!("{s} m")))
            }
            Separation::Wavelengths(w) if !(w.is_finite() && w > 0.0) => {
                Err(Error::invalid("separation fraction", format!("{w}")))
            }
            _ => Ok(()),
        }
    }

    /// Minimum antinode spacing for a mode of wavenumber `k`, never below the
    /// wire diameter.
    pub fn separation_for(&self, k: f64) -> f64 {
        let floor = default_min_separation(self.wire_diameter, self.grid.spacing());
        match self.separation {
            Separation::Default => floor,
            Separation::Fixed(s) => s.max(self.wire_diameter),
            Separation::Wavelengths(w) => (w * 2.0 * std::f64::consts::PI / k).max(floor),
        }
    }
}

/// How far apart wires placed in one iteration (and from earlier wires) must
/// be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Separation {
    /// max(diameter, 3h).
    Default,
    /// Fixed distance in meters.
    Fixed(f64),
    /// Fraction of the current dominant-mode wavelength 2π/k, floored at the
    /// default.
    Wavelengths(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PinningStatus {
    TargetReached,
    WireBudgetReached,
    /// Two consecutive iterations each raised the frequency by less than
    /// [`STAGNATION_GAIN`].
    Stagnated,
    /// Every antinode was blocked by existing wires.
    NoPlacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub wires_added: usize,
    #[serde(rename = "N_total")]
    pub total_wires: usize,
    #[serde(rename = "f_c_Hz")]
    pub frequency: f64,
    /// Antinodes dropped because a wire there would overlap an existing one.
    #[serde(skip)]
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct PinningReport {
    /// Entry 0 is the starting layout (seed wires count as added there).
    pub iterations: Vec<IterationRecord>,
    pub final_layout: WireLayout,
    pub final_solution: EigenSolution,
    pub status: PinningStatus,
}

impl PinningReport {
    pub fn skipped_wires(&self) -> usize {
        self.iterations.iter().map(|r| r.skipped).sum()
    }

    /// Columns: iteration, wires_added, N_total, f_c_Hz.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.iterations {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_pinning(cfg: &PinningConfig, initial: &WireLayout) -> Result<PinningReport> {
    run_pinning_with(cfg, initial, |_, _| {})
}

/// As [`run_pinning`], calling `observe` after every solve.
pub fn run_pinning_with(
    cfg: &PinningConfig,
    initial: &WireLayout,
    mut observe: impl FnMut(&IterationRecord, &EigenSolution),
) -> Result<PinningReport> {
    cfg.validate()?;
    if !initial.is_empty()
        && (initial.diameter - cfg.wire_diameter).abs() > 1e-12 * cfg.wire_diameter
    {
        return Err(Error::invalid(
            "initial layout",
            format!(
                "diameter {} m differs from {} m",
                initial.diameter, cfg.wire_diameter
            ),
        ));
    }
    let mut layout = WireLayout {
        centers: initial.centers.clone(),
        diameter: cfg.wire_diameter,
    };
    layout.validate(cfg.grid.side)?;
    if layout.len() > cfg.max_wires {
        return Err(Error::invalid(
            "initial layout",
            format!("{} wires exceed budget {}", layout.len(), cfg.max_wires),
        ));
    }

    let mut solution =
        dominant_eigenmode_with(&cfg.grid, &rasterize_wires(&cfg.grid, &layout)?, &cfg.eigen)?;
    let first = IterationRecord {
        iteration: 0,
        wires_added: layout.len(),
        total_wires: layout.len(),
        frequency: solution.frequency,
        skipped: 0,
    };
    observe(&first, &solution);
    let mut records = vec![first];

    let status = loop {
        if cfg
            .target_frequency
            .is_some_and(|t| solution.frequency >= t)
        {
            break PinningStatus::TargetReached;
        }
        if layout.len() >= cfg.max_wires {
            break PinningStatus::WireBudgetReached;
        }
        if let [.., a, b, c] = records.as_slice() {
            if b.frequency < a.frequency * (1.0 + STAGNATION_GAIN)
                && c.frequency < b.frequency * (1.0 + STAGNATION_GAIN)
            {
                break PinningStatus::Stagnated;
            }
        }
        let separation = cfg.separation_for(solution.wavenumber);
        let antinodes = find_antinodes_excluding(
            &solution.field,
            cfg.threshold_theta,
            separation,
            &layout.centers,
        )?;
        let mut added = 0;
        let mut skipped = 0;
        for p in antinodes {
            if layout.len() >= cfg.max_wires {
                break;
            }
            if layout
                .centers
                .iter()
                .any(|&q| distance(p, q) < cfg.wire_diameter)
            {
                skipped += 1;
                continue;
            }
            layout.centers.push(p);
            added += 1;
        }
        if added == 0 {
            if let Some(last) = records.last_mut() {
                last.skipped += skipped;
            }
            break PinningStatus::NoPlacement;
        }
        solution =
            dominant_eigenmode_with(&cfg.grid, &rasterize_wires(&cfg.grid, &layout)?, &cfg.eigen)?;
        let record = IterationRecord {
            iteration: records.len(),
            wires_added: added,
            total_wires: layout.len(),
            frequency: solution.frequency,
            skipped,
        };
        observe(&record, &solution);
        log::info!(
            "pinning iteration {}: +{} wires, N = {}, f = {:.6} GHz",
            record.iteration,
            added,
            record.total_wires,
            record.frequency * 1e-9
        );
        records.push(record);
    };

    Ok(PinningReport {
        iterations: records,
        final_layout: layout,
        final_solution: solution,
        status,
    })
}

/// (N, f_c) after every iteration, starting from the initial layout.
pub fn pinning_frequency_curve(cfg: &PinningConfig) -> Result<Vec<(usize, f64)>> {
    let report = run_pinning(cfg, &WireLayout::empty(cfg.wire_diameter))?;
    Ok(report
        .iterations
        .iter()
        .map(|r| (r.total_wires, r.frequency))
        .collect())
}
