//! Block inverse iteration with Rayleigh-Ritz projection.
//!
//! Each sweep applies A⁻¹ (banded Cholesky, factored once) to a block of
//! vectors, orthonormalizes, and diagonalizes the projected operator. Guard
//! vectors beyond the requested count set the convergence rate.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::band::BandCholesky;
use super::ConductorMask;
use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 10_000;
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
pub const EIGENVALUE_TOLERANCE: f64 = 1e-10;
/// Relative gap below which two eigenvalues count as one degenerate level.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;
const GUARD_VECTORS: usize = 5;
const DEFAULT_SEED: u64 = 0x5EED_CA71;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigenOptions {
    pub max_iterations: usize,
    /// Seeds the start block; fixes the representative of degenerate levels.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_iterations: MAX_ITERATIONS,
            seed: DEFAULT_SEED,
        }
    }
}

pub(crate) struct Pair {
    /// Eigenvalue in grid units (h = 1).
    pub eigenvalue: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Operator<'a> {
    m: usize,
    mask: &'a [bool],
}

impl Operator<'_> {
    fn free(&self, i: usize) -> bool {
        !self.mask[i]
    }

    /// Lower band entry (i ≥ j) of the masked 5-point operator.
    fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return if self.free(i) { 4.0 } else { 1.0 };
        }
        let adjacent = (i - j == 1 && !i.is_multiple_of(self.m)) || i - j == self.m;
        if adjacent && self.free(i) && self.free(j) {
            -1.0
        } else {
            0.0
        }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let m = self.m;
        for iz in 0..m {
            for ix in 0..m {
                let i = iz * m + ix;
                if !self.free(i) {
                    out[i] = 0.0;
                    continue;
                }
                let mut s = 4.0 * u[i];
                if ix > 0 {
                    s -= u[i - 1];
                }
                if ix + 1 < m {
                    s -= u[i + 1];
                }
                if iz > 0 {
                    s -= u[i - m];
                }
                if iz + 1 < m {
                    s -= u[i + m];
                }
                out[i] = s;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt, two passes. Collapsed columns are refilled from
/// `rng` and re-orthogonalized.
fn orthonormalize(block: &mut [Vec<f64>], mask: &[bool], rng: &mut ChaCha8Rng) {
    for j in 0..block.len() {
        for _attempt in 0..3 {
            let original = dot(&block[j], &block[j]).sqrt();
            for _pass in 0..2 {
                let (done, rest) = block.split_at_mut(j);
                let v = &mut rest[0];
                for q in done.iter() {
                    let c = dot(q, v);
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = dot(&block[j], &block[j]).sqrt();
            if norm > 1e-10 * original && norm > 0.0 {
                block[j].iter_mut().for_each(|x| *x /= norm);
                break;
            }
            fill_random(&mut block[j], mask, rng);
        }
    }
}

fn fill_random(v: &mut [f64], mask: &[bool], rng: &mut ChaCha8Rng) {
    for (x, &masked) in v.iter_mut().zip(mask) {
        *x = if masked {
            0.0
        } else {
            rng.random_range(-1.0..1.0)
        };
    }
}

pub(crate) fn lowest_pairs(
    mask: &ConductorMask,
    want: usize,
    options: &EigenOptions,
) -> Result<Vec<Pair>> {
    let m = mask.interior;
    let n = m * m;
    let op = Operator {
        m,
        mask: &mask.cells,
    };
    let free = mask.cells.iter().filter(|&&c| !c).count();
    let p = (want + GUARD_VECTORS).min(free);
    let chol = BandCholesky::factor(n, m, |i, j| op.entry(i, j))?;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| {
            let mut v = vec![0.0; n];
            fill_random(&mut v, &mask.cells, &mut rng);
            v
        })
        .collect();
    orthonormalize(&mut block, &mask.cells, &mut rng);

    let mut interleaved = vec![0.0; n * p];
    let mut applied: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
    let mut previous = vec![f64::INFINITY; p];
    let mut residuals = vec![f64::INFINITY; p];
    let mut theta = vec![0.0; p];

    for iteration in 1..=options.max_iterations.max(1) {
        for (c, v) in block.iter().enumerate() {
            for (k, x) in v.iter().enumerate() {
                interleaved[k * p + c] = *x;
            }
        }
        chol.solve_interleaved(&mut interleaved, p);
        for (c, v) in block.iter_mut().enumerate() {
            for (k, x) in v.iter_mut().enumerate() {
                *x = if mask.cells[k] {
                    0.0
                } else {
                    interleaved[k * p + c]
                };
            }
        }
        orthonormalize(&mut block, &mask.cells, &mut rng);

        for (v, av) in block.iter().zip(applied.iter_mut()) {
            op.apply(v, av);
        }
        let h = DMatrix::from_fn(p, p, |a, b| {
            0.5 * (dot(&block[a], &applied[b]) + dot(&block[b], &applied[a]))
        });
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut ritz = vec![vec![0.0; n]; p];
        let mut ritz_applied = vec![vec![0.0; n]; p];
        for (slot, &col) in order.iter().enumerate() {
            theta[slot] = eig.eigenvalues[col];
            for j in 0..p {
                let w = eig.eigenvectors[(j, col)];
                if w == 0.0 {
                    continue;
                }
                ritz[slot]
                    .iter_mut()
                    .zip(&block[j])
                    .for_each(|(x, y)| *x += w * y);
                ritz_applied[slot]
                    .iter_mut()
                    .zip(&applied[j])
                    .for_each(|(x, y)| *x += w * y);
            }
        }
        for slot in 0..p {
            let norm = dot(&ritz[slot], &ritz[slot]).sqrt();
            let r: f64 = ritz_applied[slot]
                .iter()
                .zip(&ritz[slot])
                .map(|(a, x)| (a - theta[slot] * x).powi(2))
                .sum::<f64>()
                .sqrt();
            residuals[slot] = r / (theta[slot].abs() * norm);
        }

        let top = theta[want - 1];
        let needed = want
            + theta[want..p.saturating_sub(1).max(want)]
                .iter()
                .take_while(|&&t| (t - top).abs() <= DEGENERACY_TOLERANCE * top)
                .count();
        let done = (0..needed).all(|j| {
            (theta[j] - previous[j]).abs() <= EIGENVALUE_TOLERANCE * theta[j].abs()
                && residuals[j] <= RESIDUAL_TOLERANCE
        });
        previous.copy_from_slice(&theta);
        block = ritz;

        if done || iteration == options.max_iterations.max(1) {
            if !(theta[0] > 0.0) {
                return Err(Error::Degenerate("non-positive eigenvalue".into()));
            }
            return Ok(block
                .into_iter()
                .take(needed)
                .enumerate()
                .map(|(j, mut v)| {
                    let norm = dot(&v, &v).sqrt();
                    // sign: largest-magnitude component positive
                    let pivot = v
                        .iter()
                        .fold(0.0f64, |a, &x| if x.abs() > a.abs() { x } else { a });
                    let s = pivot.signum() / norm;
                    v.iter_mut().for_each(|x| *x *= s);
                    Pair {
                        eigenvalue: theta[j],
                        vector: v,
                        residual: residuals[j],
                        converged: done,
                        iterations: iteration,
                    }
                })
                .collect());
        }
    }
    unreachable!("loop returns on its final iteration")
}
