//! Greedy antinode selection on a normalized field map.

use super::FieldMap;
use crate::fencing::distance;
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// Values are compared after rounding to this many parts so that symmetric
/// maxima differing only by round-off tie and fall back to index order.
const TIE_QUANTUM: f64 = 1e9;

/// max(wire diameter, 3h).
pub fn default_min_separation(wire_diameter: f64, grid_spacing: f64) -> f64 {
    wire_diameter.max(3.0 * grid_spacing)
}

/// Antinode positions in descending field order.
pub fn find_antinodes(
    field: &FieldMap,
    threshold: f64,
    min_separation: f64,
) -> Result<Vec<(f64, f64)>> {
    find_antinodes_excluding(field, threshold, min_separation, &[])
}

/// As [`find_antinodes`], additionally keeping `min_separation` clear of the
/// given existing wire centers.
///
/// Candidates are 8-neighborhood local maxima together with ridge points:
/// nodes that are maximal across the direction of strongest downward
/// curvature while curving much less along the ridge. The latter lets
/// annular antinodes, which the grid breaks into a few isolated maxima, be
/// sampled all the way round.
pub fn find_antinodes_excluding(
    field: &FieldMap,
    threshold: f64,
    min_separation: f64,
    existing: &[(f64, f64)],
) -> Result<Vec<(f64, f64)>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(
            "antinode threshold",
            format!("{threshold} not in (0, 1]"),
        ));
    }
    if !(min_separation >= 0.0 && min_separation.is_finite()) {
        return Err(Error::invalid(
            "minimum separation",
            format!("{min_separation} m"),
        ));
    }
    let grid = &field.grid;
    let m = grid.interior() as isize;
    let at = |ix: isize, iz: isize| -> f64 {
        if ix < 0 || iz < 0 || ix >= m || iz >= m {
            0.0
        } else {
            field.values[(iz * m + ix) as usize]
        }
    };

    let mut candidates: Vec<(i64, usize, usize)> = Vec::new();
    for iz in 0..m {
        for ix in 0..m {
            let v = at(ix, iz);
            if v < threshold || field.mask.is_masked(ix as usize, iz as usize) {
                continue;
            }
            let local_max = (-1..=1)
                .flat_map(|dz| (-1..=1).map(move |dx| (dx, dz)))
                .all(|(dx, dz)| at(ix + dx, iz + dz) <= v);
            if local_max || is_ridge(&at, ix, iz, v) {
                candidates.push((-(v * TIE_QUANTUM).round() as i64, ix as usize, iz as usize));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::Degenerate(format!(
            "no field maximum reaches threshold {threshold}"
        )));
    }
    candidates.sort_unstable();

    let mut accepted: Vec<(f64, f64)> = Vec::new();
    for &(_, ix, iz) in &candidates {
        let p = grid.position(ix, iz);
        let clear = accepted
            .iter()
            .chain(existing)
            .all(|&q| distance(p, q) >= min_separation);
        if clear {
            accepted.push(p);
        }
    }
    Ok(accepted)
}

/// Along-ridge curvature may be at most this fraction of the cross-ridge one.
const RIDGE_ANISOTROPY: f64 = 0.25;

fn is_ridge(at: &impl Fn(isize, isize) -> f64, ix: isize, iz: isize, v: f64) -> bool {
    let fxx = at(ix + 1, iz) - 2.0 * v + at(ix - 1, iz);
    let fzz = at(ix, iz + 1) - 2.0 * v + at(ix, iz - 1);
    let fxz =
        0.25 * (at(ix + 1, iz + 1) - at(ix + 1, iz - 1) - at(ix - 1, iz + 1) + at(ix - 1, iz - 1));
    let mean = 0.5 * (fxx + fzz);
    let spread = (0.25 * (fxx - fzz).powi(2) + fxz * fxz).sqrt();
    let across = mean - spread;
    let along = mean + spread;
    if !(across < 0.0) || along.abs() > RIDGE_ANISOTROPY * across.abs() {
        return false;
    }
    // eigenvector of `across`, snapped to one of the 8 grid directions
    let (ex, ez) = if fxz.abs() > 1e-300 {
        (fxz, across - fxx)
    } else if fxx <= fzz {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let angle = ez.atan2(ex);
    let octant = (angle / std::f64::consts::FRAC_PI_4).round() as i32;
    let (dx, dz) = match octant.rem_euclid(4) {
        0 => (1, 0),
        1 => (1, 1),
        2 => (0, 1),
        _ => (-1, 1),
    };
    at(ix + dx, iz + dz) <= v && at(ix - dx, iz - dz) <= v
}
