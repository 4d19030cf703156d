//! Banded Cholesky factorization for the grid Laplacian.
//!
//! With row-major node ordering on an m × m interior grid the 5-point
//! operator has half-bandwidth m, and the Cholesky factor fills the band
//! completely. The factor is stored row-wise: row i keeps columns
//! `i - w ..= i` contiguously, the diagonal last.

use crate::{Error, Result};

pub(crate) struct BandCholesky {
    n: usize,
    w: usize,
    band: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in chunks_a.zip(chunks_b) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl BandCholesky {
    /// Factor the symmetric positive definite matrix whose lower band is given
    /// by `entry(i, j)` for `i - w <= j <= i`.
    pub fn factor(n: usize, w: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let stride = w + 1;
        let mut band = vec![0.0; n * stride];
        for i in 0..n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                // columns k in [lo, j) are shared by rows i and j
                let s = {
                    let (head, row_i) = band.split_at(i * stride);
                    let ri = &row_i[(lo + w - i)..(j + w - i)];
                    let s = if j == i {
                        dot(ri, ri)
                    } else {
                        let row_j = &head[j * stride..(j + 1) * stride];
                        dot(ri, &row_j[(lo + w - j)..w])
                    };
                    entry(i, j) - s
                };
                let idx = i * stride + (j + w - i);
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Degenerate(format!(
                            "operator is not positive definite at row {i}"
                        )));
                    }
                    band[idx] = s.sqrt();
                } else {
                    let djj = band[j * stride + w];
                    band[idx] = s / djj;
                }
            }
        }
        Ok(BandCholesky { n, w, band })
    }

    /// Solve A X = B in place for `cols` right-hand sides stored interleaved:
    /// `x[k * cols + c]`.
    pub fn solve_interleaved(&self, x: &mut [f64], cols: usize) {
        let (n, w, stride) = (self.n, self.w, self.w + 1);
        debug_assert_eq!(x.len(), n * cols);
        let mut acc = vec![0.0; cols];
        // L y = b
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let row = &self.band[i * stride..(i + 1) * stride];
            acc.iter_mut().for_each(|a| *a = 0.0);
            for k in lo..i {
                let l = row[k + w - i];
                if l != 0.0 {
                    let yk = &x[k * cols..(k + 1) * cols];
                    for (a, y) in acc.iter_mut().zip(yk) {
                        *a += l * y;
                    }
                }
            }
            let d = row[w];
            let xi = &mut x[i * cols..(i + 1) * cols];
            for (v, a) in xi.iter_mut().zip(&acc) {
                *v = (*v - a) / d;
            }
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            let lo = i.saturating_sub(w);
            let row = &self.band[i * stride..(i + 1) * stride];
            let d = row[w];
            let (head, tail) = x.split_at_mut(i * cols);
            let xi = &mut tail[..cols];
            for v in xi.iter_mut() {
                *v /= d;
            }
            for k in lo..i {
                let l = row[k + w - i];
                if l != 0.0 {
                    let yk = &mut head[k * cols..(k + 1) * cols];
                    for (y, v) in yk.iter_mut().zip(xi.iter()) {
                        *y -= l * v;
                    }
                }
            }
        }
    }
}
