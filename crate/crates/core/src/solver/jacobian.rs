//! Finite-difference Jacobians with stencil-aware column coloring.

use rayon::prelude::*;

use super::layout::{Recorder, StateView};
use super::sparse::CscMatrix;
use crate::scalar::Scalar;

/// A square nonlinear system evaluated one residual row at a time.
pub trait RowSystem<T: Scalar>: Sync {
    fn n_rows(&self) -> usize;
    fn row<V: StateView<T> + ?Sized>(&self, i: usize, x: &V) -> T;

    fn residual_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n_rows()).into_par_iter().map(|i| self.row(i, x)).collect()
    }
}

/// Sparsity of the Jacobian and a distance-2 coloring of its columns.
#[derive(Clone, Debug, Default)]
pub struct Pattern {
    pub row_cols: Vec<Vec<usize>>,
    pub col_rows: Vec<Vec<usize>>,
    /// Structurally orthogonal column groups.
    pub colors: Vec<Vec<usize>>,
}

impl Pattern {
    /// Records which unknowns every row reads at state `x`. Residual code
    /// reads its full stencil unconditionally, so the pattern does not
    /// depend on `x`.
    pub fn detect<T: Scalar, S: RowSystem<T>>(sys: &S, x: &[T]) -> Self {
        let n = sys.n_rows();
        let row_cols: Vec<Vec<usize>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let rec = Recorder::new(x);
                let _ = sys.row(i, &rec);
                rec.take()
            })
            .collect();
        let mut col_rows = vec![Vec::new(); x.len()];
        for (i, cols) in row_cols.iter().enumerate() {
            for &j in cols {
                col_rows[j].push(i);
            }
        }
        let colors = color_columns(&row_cols, &col_rows);
        Self { row_cols, col_rows, colors }
    }

    pub fn nnz(&self) -> usize {
        self.row_cols.iter().map(Vec::len).sum()
    }

    /// Symmetrised adjacency `A + Aᵀ` without the diagonal.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.row_cols.len();
        let mut adj = vec![Vec::new(); n];
        for (i, cols) in self.row_cols.iter().enumerate() {
            for &j in cols {
                if i != j && j < n {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Greedy distance-2 coloring: two columns sharing a row never share a color.
fn color_columns(row_cols: &[Vec<usize>], col_rows: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = col_rows.len();
    let mut color = vec![usize::MAX; n];
    let mut stamp: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        for &i in &col_rows[j] {
            for &k in &row_cols[i] {
                let c = color[k];
                if c != usize::MAX {
                    stamp[c] = j + 1;
                }
            }
        }
        let c = (0..groups.len()).find(|&c| stamp[c] != j + 1).unwrap_or_else(|| {
            groups.push(Vec::new());
            stamp.push(0);
            groups.len() - 1
        });
        color[j] = c;
        groups[c].push(j);
    }
    groups
}

/// Forward-difference step for unknown value `u`.
#[inline]
pub fn fd_step<T: Scalar>(u: T) -> T {
    let base = if T::epsilon() < T::lit(1e-12) { T::lit(1e-8) } else { T::epsilon().sqrt() };
    base * u.abs().max(T::one())
}

/// Forward-difference Jacobian, one perturbed state per color.
pub fn fd_jacobian<T: Scalar, S: RowSystem<T>>(sys: &S, pat: &Pattern, x: &[T], r0: &[T]) -> CscMatrix<T> {
    let n = x.len();
    let trip: Vec<(usize, usize, T)> = pat
        .colors
        .par_iter()
        .flat_map_iter(|group| {
            let mut xp = x.to_vec();
            for &j in group {
                xp[j] += fd_step(x[j]);
            }
            let mut out = Vec::new();
            for &j in group {
                // the realised step, not the nominal one
                let h = xp[j] - x[j];
                for &i in &pat.col_rows[j] {
                    out.push((i, j, (sys.row(i, &xp[..]) - r0[i]) / h));
                }
            }
            out
        })
        .collect();
    CscMatrix::from_triplets(sys.n_rows(), n, &trip)
}

/// Dense central-difference Jacobian of the full residual. Reference only.
pub fn central_difference_jacobian<T: Scalar, S: RowSystem<T>>(sys: &S, x: &[T], h: T) -> Vec<Vec<T>> {
    let n = x.len();
    let m = sys.n_rows();
    let cols: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let step = h * x[j].abs().max(T::one());
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += step;
            xm[j] -= step;
            let d = xp[j] - xm[j];
            (0..m).map(|i| (sys.row(i, &xp[..]) - sys.row(i, &xm[..])) / d).collect()
        })
        .collect();
    (0..m).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}
