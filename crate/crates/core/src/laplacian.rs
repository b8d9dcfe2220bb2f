//! Dense Laplacian pseudoinverse and power iteration.
//!
//! `L⁺` is applied by grounding the last vertex, factoring the remaining
//! `(n-1) x (n-1)` principal block (positive definite for a connected graph),
//! and re-centering the solution so it is orthogonal to the all-ones vector.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexVector};

/// Relative tolerance on symmetry when accepting a raw matrix.
const SYMMETRY_TOL: f64 = 1e-12;
/// Relative tolerance on row sums when accepting a raw matrix.
const ROW_SUM_TOL: f64 = 1e-10;

/// Rayleigh-quotient tolerance used for `‖Π̄‖`.
pub const POWER_TOL: f64 = 1e-10;

pub fn default_max_iter(m: usize) -> usize {
    10 * m + 1000
}

/// A factored Laplacian of a connected weighted graph.
#[derive(Debug, Clone)]
pub struct LaplacianSystem {
    matrix: DMatrix<f64>,
    grounded: Option<Cholesky<f64, Dyn>>,
}

impl LaplacianSystem {
    pub fn from_graph(g: &Graph) -> Result<Self> {
        g.require_connected()?;
        Self::factor(g.laplacian())
    }

    /// Accepts any symmetric matrix with zero row sums, nonpositive
    /// off-diagonals, and a connected support.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: matrix.ncols() });
        }
        let scale = matrix.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                let v = matrix[(i, j)];
                if (v - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotLaplacian(format!("asymmetric at ({i}, {j})")));
                }
                if i != j && v > SYMMETRY_TOL * scale {
                    return Err(Error::NotLaplacian(format!("positive off-diagonal at ({i}, {j})")));
                }
                row_sum += v;
            }
            if row_sum.abs() > ROW_SUM_TOL * scale {
                return Err(Error::NotLaplacian(format!("row {i} sums to {row_sum}")));
            }
        }
        if !support_connected(&matrix, 1e-14 * scale) {
            return Err(Error::Disconnected);
        }
        Self::factor(matrix)
    }

    fn factor(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        let grounded = if n > 1 {
            let block = matrix.view((0, 0), (n - 1, n - 1)).into_owned();
            Some(Cholesky::new(block).ok_or(Error::Disconnected)?)
        } else {
            None
        };
        Ok(LaplacianSystem { matrix, grounded })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `x = L⁺ Z b` where `Z` removes the mean of `b`.
    pub fn pinv_apply(&self, b: &VertexVector) -> Result<VertexVector> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: b.len() });
        }
        Ok(VertexVector(self.solve(b)))
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let Some(chol) = &self.grounded else {
            return vec![0.0; n];
        };
        let mean = b.iter().sum::<f64>() / n as f64;
        let rhs = DVector::from_iterator(n - 1, b[..n - 1].iter().map(|v| v - mean));
        let y = chol.solve(&rhs);
        let mut x: Vec<f64> = y.iter().copied().chain(std::iter::once(0.0)).collect();
        center(&mut x);
        x
    }

    /// Dense `L⁺`.
    pub fn pinv_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let Some(chol) = &self.grounded else {
            return DMatrix::zeros(n, n);
        };
        let inv = chol.inverse();
        let mut full = DMatrix::zeros(n, n);
        full.view_mut((0, 0), (n - 1, n - 1)).copy_from(&inv);
        // Z X Z with Z = I - J/n.
        let col_means: Vec<f64> = (0..n).map(|j| full.column(j).mean()).collect();
        for j in 0..n {
            for i in 0..n {
                full[(i, j)] -= col_means[j];
            }
        }
        let row_means: Vec<f64> = (0..n).map(|i| full.row(i).mean()).collect();
        for j in 0..n {
            for i in 0..n {
                full[(i, j)] -= row_means[i];
            }
        }
        full
    }

    /// `‖Lx - Zb‖∞`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let n = self.dim();
        let mean = b.iter().sum::<f64>() / n as f64;
        let lx = &self.matrix * DVector::from_column_slice(x);
        lx.iter().zip(b).map(|(l, bi)| (l - (bi - mean)).abs()).fold(0.0, f64::max)
    }
}

fn center(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn support_connected(matrix: &DMatrix<f64>, threshold: f64) -> bool {
    let n = matrix.nrows();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && matrix[(i, j)].abs() > threshold {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub value: f64,
    pub iterations: usize,
}

/// Largest eigenvalue of a symmetric operator with an entrywise nonnegative
/// matrix, by power iteration from the all-ones start vector.
///
/// `matvec(x, y)` must write `A x` into `y`. Stops once the Rayleigh quotient
/// changes by less than `tol` relative to its current value.
pub fn spectral_norm_nonneg<F>(mut matvec: F, m: usize, tol: f64, max_iter: usize) -> Result<PowerEstimate>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if m == 0 {
        return Ok(PowerEstimate { value: 0.0, iterations: 0 });
    }
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let mut y = vec![0.0; m];
    let mut previous = f64::NAN;
    for iteration in 1..=max_iter {
        y.iter_mut().for_each(|v| *v = 0.0);
        matvec(&x, &mut y);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(PowerEstimate { value: 0.0, iterations: iteration });
        }
        if (rayleigh - previous).abs() <= tol * rayleigh.abs() {
            return Ok(PowerEstimate { value: rayleigh, iterations: iteration });
        }
        previous = rayleigh;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    Err(Error::NotConverged { estimate: previous, iterations: max_iter })
}
