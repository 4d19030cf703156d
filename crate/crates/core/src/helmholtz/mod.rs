//! Scalar Helmholtz eigenmodes of the square cavity cross-section.
//!
//! The membrane −∇²u = k²u is discretized with the 5-point stencil on a
//! uniform grid. The outer boundary and every node covered by a wire carry
//! u = 0. Masked nodes are decoupled from the operator (identity rows) and
//! their vector components are held at exactly zero.

mod antinodes;
mod band;
mod eigen;

use crate::constants::SPEED_OF_LIGHT;
use crate::fencing::WireLayout;
use crate::{Error, Result};

pub use antinodes::{
    default_min_separation, find_antinodes, find_antinodes_excluding, DEFAULT_THRESHOLD,
};
pub use eigen::{EigenOptions, MAX_ITERATIONS, RESIDUAL_TOLERANCE};

pub const DEFAULT_RESOLUTION: usize = 257;
pub const MIN_RESOLUTION: usize = 33;
pub const MAX_MODES: usize = 12;

/// Uniform grid over the square cross-section, boundary nodes included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub side: f64,
    pub resolution: usize,
    /// Filling dielectric; scales frequencies as 1/√εr.
    pub relative_permittivity: f64,
}

impl Grid {
    pub fn new(side: f64, resolution: usize) -> Result<Self> {
        let grid = Grid {
            side,
            resolution,
            relative_permittivity: 1.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_default_resolution(side: f64) -> Result<Self> {
        Self::new(side, DEFAULT_RESOLUTION)
    }

    pub fn with_permittivity(mut self, relative_permittivity: f64) -> Result<Self> {
        self.relative_permittivity = relative_permittivity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.side.is_finite() && self.side > 0.0) {
            return Err(Error::invalid("grid side", format!("{} m", self.side)));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::invalid(
                "grid resolution",
                format!("{} < {MIN_RESOLUTION}", self.resolution),
            ));
        }
        if !(self.relative_permittivity.is_finite() && self.relative_permittivity >= 1.0) {
            return Err(Error::invalid(
                "relative permittivity",
                format!("{}", self.relative_permittivity),
            ));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.side / (self.resolution - 1) as f64
    }

    /// Interior nodes per side.
    pub fn interior(&self) -> usize {
        self.resolution - 2
    }

    /// Physical position of interior node (ix, iz).
    pub fn position(&self, ix: usize, iz: usize) -> (f64, f64) {
        let h = self.spacing();
        ((ix + 1) as f64 * h, (iz + 1) as f64 * h)
    }

    /// Interior node closest to `p`, clamped into the interior.
    pub fn nearest_node(&self, p: (f64, f64)) -> (usize, usize) {
        let h = self.spacing();
        let last = (self.interior() - 1) as f64;
        let snap = |v: f64| ((v / h).round() - 1.0).clamp(0.0, last) as usize;
        (snap(p.0), snap(p.1))
    }

    pub fn wavenumber_to_frequency(&self, k: f64) -> f64 {
        SPEED_OF_LIGHT * k / (2.0 * std::f64::consts::PI * self.relative_permittivity.sqrt())
    }
}

/// Conductor cells on the grid interior, row-major with x fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConductorMask {
    pub interior: usize,
    pub cells: Vec<bool>,
}

impl ConductorMask {
    pub fn empty(grid: &Grid) -> Self {
        let m = grid.interior();
        ConductorMask {
            interior: m,
            cells: vec![false; m * m],
        }
    }

    pub fn is_masked(&self, ix: usize, iz: usize) -> bool {
        self.cells[iz * self.interior + ix]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    fn set(&mut self, ix: usize, iz: usize) {
        self.cells[iz * self.interior + ix] = true;
    }
}

/// Normalized |u| on the grid interior.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub grid: Grid,
    /// Row-major, x fastest; max over unmasked nodes is 1.
    pub values: Vec<f64>,
    pub mask: ConductorMask,
}

impl FieldMap {
    pub fn value(&self, ix: usize, iz: usize) -> f64 {
        self.values[iz * self.grid.interior() + ix]
    }

    /// Position and value of the global maximum (first in row-major order).
    pub fn peak(&self) -> ((f64, f64), f64) {
        let m = self.grid.interior();
        let (idx, v) =
            self.values
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                });
        (self.grid.position(idx % m, idx / m), v)
    }
}

#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub wavenumber: f64,
    pub frequency: f64,
    pub field: FieldMap,
    /// Signed eigenvector, unit Euclidean norm, masked entries zero.
    pub vector: Vec<f64>,
    pub converged: bool,
    /// ‖Au − k²u‖ / (k²‖u‖).
    pub residual: f64,
    pub iterations: usize,
}

/// Mask every interior node within diameter/2 of a wire center. Wires thinner
/// than two grid spacings mask only their nearest interior node.
pub fn rasterize_wires(grid: &Grid, layout: &WireLayout) -> Result<ConductorMask> {
    grid.validate()?;
    let mut mask = ConductorMask::empty(grid);
    let h = grid.spacing();
    let m = grid.interior();
    let r = layout.diameter / 2.0;
    for &(x, z) in &layout.centers {
        if !(x > 0.0 && x < grid.side && z > 0.0 && z < grid.side) {
            return Err(Error::WireOutside { x, z });
        }
        if layout.diameter < 2.0 * h {
            let (ix, iz) = grid.nearest_node((x, z));
            mask.set(ix, iz);
            continue;
        }
        let span = |c: f64| {
            let lo = ((c - r) / h).floor().max(1.0) as usize - 1;
            let hi = (((c + r) / h).ceil() as usize).min(m) - 1;
            lo..=hi
        };
        let mut hit = false;
        for iz in span(z) {
            for ix in span(x) {
                let (px, pz) = grid.position(ix, iz);
                if (px - x).hypot(pz - z) <= r {
                    mask.set(ix, iz);
                    hit = true;
                }
            }
        }
        if !hit {
            let (ix, iz) = grid.nearest_node((x, z));
            mask.set(ix, iz);
        }
    }
    Ok(mask)
}

/// Lowest Dirichlet eigenmode of the masked cross-section.
pub fn dominant_eigenmode(grid: &Grid, mask: &ConductorMask) -> Result<EigenSolution> {
    dominant_eigenmode_with(grid, mask, &EigenOptions::default())
}

pub fn dominant_eigenmode_with(
    grid: &Grid,
    mask: &ConductorMask,
    options: &EigenOptions,
) -> Result<EigenSolution> {
    let mut modes = converged_modes(grid, mask, 1, options)?;
    modes.truncate(1);
    Ok(modes.remove(0))
}

/// The `count` lowest eigenmodes in non-decreasing frequency order. Partners
/// degenerate with the last requested mode are appended.
pub fn eigenmodes(grid: &Grid, mask: &ConductorMask, count: usize) -> Result<Vec<EigenSolution>> {
    converged_modes(grid, mask, count, &EigenOptions::default())
}

fn converged_modes(
    grid: &Grid,
    mask: &ConductorMask,
    count: usize,
    options: &EigenOptions,
) -> Result<Vec<EigenSolution>> {
    let modes = eigenmodes_with(grid, mask, count, options)?;
    if let Some(bad) = modes.iter().find(|s| !s.converged) {
        return Err(Error::NoConvergence {
            solver: "subspace iteration",
            iterations: bad.iterations,
            residual: bad.residual,
        });
    }
    Ok(modes)
}

/// As [`eigenmodes`], but returns unconverged solutions flagged instead of
/// failing.
pub fn eigenmodes_with(
    grid: &Grid,
    mask: &ConductorMask,
    count: usize,
    options: &EigenOptions,
) -> Result<Vec<EigenSolution>> {
    grid.validate()?;
    if count == 0 || count > MAX_MODES {
        return Err(Error::invalid(
            "mode count",
            format!("{count} not in 1..={MAX_MODES}"),
        ));
    }
    if mask.interior != grid.interior() {
        return Err(Error::invalid(
            "conductor mask",
            format!(
                "{} interior nodes per side, grid has {}",
                mask.interior,
                grid.interior()
            ),
        ));
    }
    let free = mask.cells.iter().filter(|&&c| !c).count();
    if free < count {
        return Err(Error::Degenerate(format!(
            "{free} unmasked nodes cannot carry {count} modes"
        )));
    }
    let h = grid.spacing();
    let pairs = eigen::lowest_pairs(mask, count, options)?;
    Ok(pairs
        .into_iter()
        .map(|p| {
            let k = p.eigenvalue.sqrt() / h;
            let peak = p.vector.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let values = p.vector.iter().map(|v| v.abs() / peak).collect();
            EigenSolution {
                wavenumber: k,
                frequency: grid.wavenumber_to_frequency(k),
                field: FieldMap {
                    grid: *grid,
                    values,
                    mask: mask.clone(),
                },
                vector: p.vector,
                converged: p.converged,
                residual: p.residual,
                iterations: p.iterations,
            }
        })
        .collect())
}
