//! Dense LU with partial pivoting. Used as a reference for small systems.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `A x = b` for a dense row-major `A`.
pub fn dense_solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("dense solve needs a square matrix matching the right-hand side".into()));
    }
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().partial_cmp(&m[j][k].abs()).expect("finite"))
            .expect("non-empty");
        if !(m[p][k].abs() > T::zero()) {
            return Err(Error::Singular { column: k });
        }
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let l = m[i][k] / m[k][k];
            if l == T::zero() {
                continue;
            }
            for j in k..n {
                let mkj = m[k][j];
                m[i][j] -= l * mkj;
            }
            let xk = x[k];
            x[i] -= l * xk;
        }
    }
    for k in (0..n).rev() {
        let s: T = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_system() {
        let a: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = dense_solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn needs_pivoting() {
        let a: Vec<Vec<f64>> = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(dense_solve(&a, &[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn singular() {
        let a: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(dense_solve(&a, &[1.0, 1.0]), Err(Error::Singular { .. })));
    }
}
