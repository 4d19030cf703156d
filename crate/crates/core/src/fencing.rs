//! Half-wave fencing: dividing the square cross-section into n^{2d} cells
//! with rows of conducting wires, and the analytic frequency/wire-count
//! relations that go with it.
//!
//! Coordinates are in meters with the origin at a cavity corner, x and z in
//! the plane of the cross-section.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FencePlan {
    pub division_factor: u32,
    pub iterations: u32,
    pub cavity_side: f64,
    pub wire_diameter: f64,
}

impl FencePlan {
    pub fn new(
        division_factor: u32,
        iterations: u32,
        cavity_side: f64,
        wire_diameter: f64,
    ) -> Result<Self> {
        let plan = FencePlan {
            division_factor,
            iterations,
            cavity_side,
            wire_diameter,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Half-wave (n = 2) plan.
    pub fn half_wave(iterations: u32, cavity_side: f64, wire_diameter: f64) -> Result<Self> {
        Self::new(2, iterations, cavity_side, wire_diameter)
    }

    pub fn validate(&self) -> Result<()> {
        if self.division_factor < 2 {
            return Err(Error::invalid("fence plan", "division factor must be >= 2"));
        }
        if !(self.cavity_side > 0.0) || !(self.wire_diameter > 0.0) {
            return Err(Error::invalid(
                "fence plan",
                "side and wire diameter must be > 0",
            ));
        }
        let cells = self
            .cells_per_side()
            .ok_or_else(|| Error::invalid("fence plan", "n^d overflows"))?;
        if self.cavity_side / cells as f64 <= self.wire_diameter {
            return Err(Error::invalid(
                "fence plan",
                format!(
                    "cell side {:.3e} m is not larger than the wire diameter {:.3e} m",
                    self.cavity_side / cells as f64,
                    self.wire_diameter
                ),
            ));
        }
        Ok(())
    }

    /// n^d, or `None` on overflow.
    pub fn cells_per_side(&self) -> Option<u64> {
        (self.division_factor as u64).checked_pow(self.iterations)
    }

    pub fn cell_side(&self) -> f64 {
        self.cavity_side / self.cells_per_side().unwrap_or(u64::MAX) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WireLayout {
    pub centers: Vec<(f64, f64)>,
    pub diameter: f64,
}

impl WireLayout {
    pub fn empty(diameter: f64) -> Self {
        WireLayout {
            centers: Vec::new(),
            diameter,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Every center strictly inside (0, side)², pairwise distance at least one
    /// diameter.
    pub fn validate(&self, side: f64) -> Result<()> {
        if !(self.diameter > 0.0) {
            return Err(Error::invalid("wire layout", "diameter must be > 0"));
        }
        for &(x, z) in &self.centers {
            if !(x > 0.0 && x < side && z > 0.0 && z < side) {
                return Err(Error::WireOutside { x, z });
            }
        }
        for (i, a) in self.centers.iter().enumerate() {
            for b in &self.centers[i + 1..] {
                if distance(*a, *b) < self.diameter * (1.0 - 1e-12) {
                    return Err(Error::WireOverlap {
                        first: *a,
                        second: *b,
                        diameter: self.diameter,
                    });
                }
            }
        }
        Ok(())
    }

    /// True when a wire at `p` would stay clear of every existing wire.
    pub fn admits(&self, p: (f64, f64)) -> bool {
        self.centers
            .iter()
            .all(|&c| distance(c, p) >= self.diameter * (1.0 - 1e-12))
    }

    /// CSV with columns `x_m,z_m,diameter_m`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_m", "z_m", "diameter_m"])?;
        for &(x, z) in &self.centers {
            w.write_record(&[
                format!("{x:e}"),
                format!("{z:e}"),
                format!("{:e}", self.diameter),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse the layout CSV. All rows must share one diameter; a header-only
    /// file yields an empty layout with diameter `default_diameter`.
    pub fn read_csv<R: Read>(input: R, default_diameter: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            x_m: f64,
            z_m: f64,
            diameter_m: f64,
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut layout = WireLayout::empty(default_diameter);
        let mut diameter = None;
        for row in reader.deserialize() {
            let row: Row = row?;
            match diameter {
                None => diameter = Some(row.diameter_m),
                Some(d) if (d - row.diameter_m).abs() > 1e-12 * d.abs() => {
                    return Err(Error::Parse(format!(
                        "mixed wire diameters {d:e} and {:e}",
                        row.diameter_m
                    )))
                }
                _ => {}
            }
            layout.centers.push((row.x_m, row.z_m));
        }
        if let Some(d) = diameter {
            layout.diameter = d;
        }
        Ok(layout)
    }
}

pub fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Axis-aligned square cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub x0: f64,
    pub z0: f64,
    pub side: f64,
}

impl Cell {
    pub fn center(&self) -> (f64, f64) {
        (self.x0 + 0.5 * self.side, self.z0 + 0.5 * self.side)
    }
}

/// Wire count after `d` fencing iterations with division factor `n`:
/// (M+1)² + 2M(M+1) − 8M with M = n^d. The last term drops the positions
/// that fall on the outer walls.
pub fn fence_wire_count(d: u32, n: u32) -> u64 {
    assert!(n >= 2, "division factor must be >= 2");
    if d == 0 {
        return 0;
    }
    let m = (n as u64).pow(d);
    (m + 1) * (m + 1) + 2 * m * (m + 1) - 8 * m
}

/// Dominant-mode frequency of one cell relative to the bare cavity: n^d.
pub fn fence_scaled_frequency(d: u32, n: u32) -> f64 {
    assert!(n >= 2, "division factor must be >= 2");
    (n as f64).powi(d as i32)
}

/// Inverse of the wire count relation: f̃_c = (2 + sqrt(1 + 3N)) / 3, valid
/// for real N ≥ 0.
pub fn frequency_from_wire_count(n_wires: f64) -> f64 {
    assert!(n_wires >= 0.0, "wire count must be >= 0");
    (2.0 + (1.0 + 3.0 * n_wires).sqrt()) / 3.0
}

/// Fence positions at iteration `d` on the integer lattice of spacing
/// side/(2 n^d): corners have two even coordinates, edge midpoints one even
/// and one odd; both odd is a cell center. Walls excluded.
fn lattice_positions(cells: u64) -> Vec<(u64, u64)> {
    let top = 2 * cells;
    let mut out = Vec::new();
    for iz in 1..top {
        for ix in 1..top {
            if ix % 2 == 0 || iz % 2 == 0 {
                out.push((ix, iz));
            }
        }
    }
    out
}

/// Wires at all interior cell corners and interior cell-edge midpoints of the
/// d-th iteration, ordered coarse to fine: a position that already belongs to
/// an earlier iteration's layout comes before the ones added later, and within
/// one iteration cell corners precede edge midpoints.
pub fn generate_fence_layout(plan: &FencePlan) -> Result<WireLayout> {
    plan.validate()?;
    let cells = plan.cells_per_side().expect("validated");
    if plan.iterations == 0 {
        return Ok(WireLayout::empty(plan.wire_diameter));
    }
    let n = plan.division_factor as u64;
    let d = plan.iterations;
    let unit = plan.cavity_side / (2 * cells) as f64;
    // (first iteration containing the point, 0 for a corner / 1 for a midpoint)
    let rank = |(ix, iz): (u64, u64)| -> (u32, u8) {
        (1..=d)
            .find_map(|k| {
                let s = n.pow(d - k);
                let (a, b) = (ix / s, iz / s);
                (ix % s == 0 && iz % s == 0 && (a % 2 == 0 || b % 2 == 0))
                    .then_some((k, u8::from(a % 2 == 1 || b % 2 == 1)))
            })
            .unwrap_or((d, 1))
    };
    let mut positions = lattice_positions(cells);
    positions.sort_by_key(|&p| (rank(p), p.1, p.0));
    let layout = WireLayout {
        centers: positions
            .into_iter()
            .map(|(ix, iz)| (ix as f64 * unit, iz as f64 * unit))
            .collect(),
        diameter: plan.wire_diameter,
    };
    layout.validate(plan.cavity_side)?;
    Ok(layout)
}

/// The n^{2d} congruent square cells tiling [0, L]², row-major from the
/// origin.
pub fn cells_of(plan: &FencePlan) -> Vec<Cell> {
    let per_side = plan.cells_per_side().expect("validated plan");
    let side = plan.cavity_side / per_side as f64;
    let mut out = Vec::with_capacity((per_side * per_side) as usize);
    for iz in 0..per_side {
        for ix in 0..per_side {
            out.push(Cell {
                x0: ix as f64 * side,
                z0: iz as f64 * side,
                side,
            });
        }
    }
    out
}
