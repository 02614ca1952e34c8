//! Compressed sparse column matrices and a left-looking sparse LU
//! factorisation with threshold partial pivoting.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowind: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> CscMatrix<T> {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, trip: &[(usize, usize, T)]) -> Self {
        let mut count = vec![0usize; ncols + 1];
        for &(_, c, _) in trip {
            count[c + 1] += 1;
        }
        for c in 0..ncols {
            count[c + 1] += count[c];
        }
        let mut next = count.clone();
        let mut rows = vec![0usize; trip.len()];
        let mut vals = vec![T::zero(); trip.len()];
        for &(r, c, v) in trip {
            rows[next[c]] = r;
            vals[next[c]] = v;
            next[c] += 1;
        }
        let mut colptr = vec![0usize; ncols + 1];
        let mut rowind = Vec::with_capacity(trip.len());
        let mut values = Vec::with_capacity(trip.len());
        let mut buf: Vec<(usize, T)> = Vec::new();
        for c in 0..ncols {
            buf.clear();
            buf.extend((count[c]..count[c + 1]).map(|p| (rows[p], vals[p])));
            buf.sort_by_key(|e| e.0);
            for &(r, v) in &buf {
                if rowind.len() > colptr[c] && *rowind.last().expect("non-empty") == r {
                    *values.last_mut().expect("non-empty") += v;
                } else {
                    rowind.push(r);
                    values.push(v);
                }
            }
            colptr[c + 1] = rowind.len();
        }
        Self { nrows, ncols, colptr, rowind, values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowind: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn from_dense(a: &[Vec<T>]) -> Self {
        let nrows = a.len();
        let ncols = a.first().map_or(0, |r| r.len());
        let mut t = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &t)
    }

    pub fn nnz(&self) -> usize {
        self.rowind.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for c in 0..self.ncols {
            for p in self.colptr[c]..self.colptr[c + 1] {
                d[self.rowind[p]][c] += self.values[p];
            }
        }
        d
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        for c in 0..self.ncols {
            let xc = x[c];
            for p in self.colptr[c]..self.colptr[c + 1] {
                y[self.rowind[p]] += self.values[p] * xc;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for c in 0..self.ncols {
            for p in self.colptr[c]..self.colptr[c + 1] {
                t.push((c, self.rowind[p], self.values[p]));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    /// Entry `(i, j)` or zero.
    pub fn get(&self, i: usize, j: usize) -> T {
        let rows = &self.rowind[self.colptr[j]..self.colptr[j + 1]];
        match rows.binary_search(&i) {
            Ok(k) => self.values[self.colptr[j] + k],
            Err(_) => T::zero(),
        }
    }

    /// Adjacency of the symmetrised pattern `A + Aᵀ` without the diagonal.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.ncols.max(self.nrows);
        let mut adj = vec![Vec::new(); n];
        for c in 0..self.ncols {
            for p in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowind[p];
                if r != c {
                    adj[r].push(c);
                    adj[c].push(r);
                }
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Scales row `i` by `s[i]`.
    pub fn scale_rows(&mut self, s: &[T]) {
        for p in 0..self.nnz() {
            self.values[p] *= s[self.rowind[p]];
        }
    }
}

/// `P A Q = L U` with unit lower-triangular `L`.
#[derive(Clone, Debug)]
pub struct LuFactors<T> {
    pub n: usize,
    l: CscMatrix<T>,
    u: CscMatrix<T>,
    /// `pinv[i]` is the pivot step at which original row `i` was chosen.
    pinv: Vec<usize>,
    q: Vec<usize>,
}

/// Left-looking LU (Gilbert-Peierls) of `A` with column order `q`.
/// `tol` in `(0, 1]` is the threshold for preferring the diagonal pivot.
pub fn lu_factor<T: Scalar>(a: &CscMatrix<T>, q: &[usize], tol: T) -> Result<LuFactors<T>> {
    let n = a.ncols;
    if a.nrows != n || q.len() != n {
        return Err(Error::InvalidInput("LU needs a square matrix and a full column order".into()));
    }
    const NONE: usize = usize::MAX;
    let guess = 4 * a.nnz() + n;
    let mut lp = vec![0usize; n + 1];
    let mut li: Vec<usize> = Vec::with_capacity(guess);
    let mut lx: Vec<T> = Vec::with_capacity(guess);
    let mut up = vec![0usize; n + 1];
    let mut ui: Vec<usize> = Vec::with_capacity(guess);
    let mut ux: Vec<T> = Vec::with_capacity(guess);
    let mut pinv = vec![NONE; n];
    let mut x = vec![T::zero(); n];
    let mut xi = vec![0usize; 2 * n];
    let mut mark = vec![false; n];

    for k in 0..n {
        lp[k] = li.len();
        up[k] = ui.len();
        let col = q[k];

        // reach of A(:,col) in the graph of L
        let mut top = n;
        for p in a.colptr[col]..a.colptr[col + 1] {
            let r = a.rowind[p];
            if !mark[r] {
                top = dfs(r, &lp, &li, &pinv, top, &mut xi, &mut mark);
            }
        }
        for p in top..n {
            mark[xi[p]] = false;
        }

        // sparse triangular solve x = L \ A(:,col)
        for p in top..n {
            x[xi[p]] = T::zero();
        }
        for p in a.colptr[col]..a.colptr[col + 1] {
            x[a.rowind[p]] = a.values[p];
        }
        for px in top..n {
            let j = xi[px];
            let jj = pinv[j];
            if jj == NONE {
                continue;
            }
            let xj = x[j];
            for p in lp[jj] + 1..lp[jj + 1] {
                x[li[p]] -= lx[p] * xj;
            }
        }

        // pivot selection
        let mut ipiv = NONE;
        let mut amax = -T::one();
        for p in top..n {
            let i = xi[p];
            if pinv[i] == NONE {
                let t = x[i].abs();
                if t > amax {
                    amax = t;
                    ipiv = i;
                }
            } else {
                ui.push(pinv[i]);
                ux.push(x[i]);
            }
        }
        if ipiv == NONE || !(amax > T::zero()) || !amax.is_finite() {
            return Err(Error::Singular { column: col });
        }
        if pinv[col] == NONE && x[col].abs() >= amax * tol {
            ipiv = col;
        }
        let pivot = x[ipiv];
        ui.push(k);
        ux.push(pivot);
        pinv[ipiv] = k;
        li.push(ipiv);
        lx.push(T::one());
        for p in top..n {
            let i = xi[p];
            if pinv[i] == NONE {
                li.push(i);
                lx.push(x[i] / pivot);
            }
            x[i] = T::zero();
        }
    }
    lp[n] = li.len();
    up[n] = ui.len();
    for r in li.iter_mut() {
        *r = pinv[*r];
    }
    Ok(LuFactors {
        n,
        l: CscMatrix { nrows: n, ncols: n, colptr: lp, rowind: li, values: lx },
        u: CscMatrix { nrows: n, ncols: n, colptr: up, rowind: ui, values: ux },
        pinv,
        q: q.to_vec(),
    })
}

/// Depth-first search from row `j` in the graph of the partial `L`; pushes
/// the finished nodes onto `xi[top..]` in topological order.
fn dfs(
    j: usize,
    lp: &[usize],
    li: &[usize],
    pinv: &[usize],
    mut top: usize,
    xi: &mut [usize],
    mark: &mut [bool],
) -> usize {
    const NONE: usize = usize::MAX;
    let n = pinv.len();
    let (stack, pstack) = xi.split_at_mut(n);
    let mut head: isize = 0;
    stack[0] = j;
    while head >= 0 {
        let h = head as usize;
        let j = stack[h];
        let jn = pinv[j];
        if !mark[j] {
            mark[j] = true;
            pstack[h] = if jn == NONE { 0 } else { lp[jn] + 1 };
        }
        let mut done = true;
        if jn != NONE {
            let end = lp[jn + 1];
            let mut p = pstack[h];
            while p < end {
                let i = li[p];
                p += 1;
                if mark[i] {
                    continue;
                }
                pstack[h] = p;
                head += 1;
                stack[head as usize] = i;
                done = false;
                break;
            }
        }
        if done {
            head -= 1;
            top -= 1;
            stack[top] = j;
        }
    }
    top
}

impl<T: Scalar> LuFactors<T> {
    pub fn nnz(&self) -> usize {
        self.l.nnz() + self.u.nnz()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x = vec![T::zero(); n];
        for i in 0..n {
            x[self.pinv[i]] = b[i];
        }
        for j in 0..n {
            let xj = x[j];
            for p in self.l.colptr[j] + 1..self.l.colptr[j + 1] {
                x[self.l.rowind[p]] -= self.l.values[p] * xj;
            }
        }
        for j in (0..n).rev() {
            let d = self.u.colptr[j + 1] - 1;
            x[j] /= self.u.values[d];
            let xj = x[j];
            for p in self.u.colptr[j]..d {
                x[self.u.rowind[p]] -= self.u.values[p] * xj;
            }
        }
        let mut out = vec![T::zero(); n];
        for k in 0..n {
            out[self.q[k]] = x[k];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (1, 1, 5.0)]);
        assert_eq!(a.to_dense(), vec![vec![4.0, 0.0], vec![2.0, 5.0]]);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.get(0, 1), 0.0);
    }

    #[test]
    fn identity_solve() {
        let a = CscMatrix::<f64>::identity(5);
        let lu = lu_factor(&a, &natural(5), 0.1).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 9.0];
        assert_eq!(lu.solve(&b), b);
    }

    #[test]
    fn saddle_block() {
        let a = CscMatrix::<f64>::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let lu = lu_factor(&a, &natural(2), 0.1).unwrap();
        let x = lu.solve(&[1.0, 2.0]);
        assert!((x[0] - 2.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let a = CscMatrix::<f64>::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(lu_factor(&a, &natural(2), 0.1), Err(Error::Singular { .. })));
    }

    #[test]
    fn permuted_columns() {
        let d = vec![
            vec![4.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 2.0, 0.0],
            vec![0.0, 3.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 5.0],
        ];
        let a = CscMatrix::<f64>::from_dense(&d);
        let lu = lu_factor(&a, &[2, 0, 3, 1], 0.1).unwrap();
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let x = lu.solve(&b);
        let r = a.mul_vec(&x);
        for i in 0..4 {
            assert!((r[i] - b[i]).abs() < 1e-13);
        }
    }
}
