//! Damped Newton iteration on the monolithic system.

use std::fmt::Write as _;

use super::jacobian::{fd_jacobian, Pattern, RowSystem};
use super::ordering::{geometric_dissection, minimum_degree};
use super::sparse::{lu_factor, CscMatrix};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_iterations: usize,
    /// Backtracking on the residual norm.
    pub line_search: bool,
    /// Scale every row of the linear system by its largest entry.
    pub equilibrate: bool,
    /// Threshold in `(0, 1]` for keeping the diagonal pivot.
    pub pivot_threshold: T,
}

impl<T: Scalar> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-8),
            max_iterations: 25,
            line_search: false,
            equilibrate: false,
            pivot_threshold: T::lit(0.1),
        }
    }
}

impl<T: Scalar> NewtonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero() && self.rel_tol > T::zero()) {
            return Err(Error::Config("Newton tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("Newton needs at least one iteration".into()));
        }
        if !(self.pivot_threshold > T::zero() && self.pivot_threshold <= T::one()) {
            return Err(Error::Config("pivot threshold must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual_norm: f64,
    pub update_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewtonReport {
    /// Entry 0 is the initial state.
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

impl NewtonReport {
    /// Number of Newton updates applied.
    pub fn updates(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn initial_residual(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.residual_norm)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.residual_norm)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,residual_norm,update_norm\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{:.6e},{:.6e}", r.iteration, r.residual_norm, r.update_norm);
        }
        s
    }
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Fill-reducing column order for the pattern. Large systems with known
/// unknown positions use coordinate dissection.
pub fn column_ordering<T: Scalar>(pat: &Pattern, coords: Option<&[Point<T>]>) -> Vec<usize> {
    let adj = pat.symmetric_adjacency();
    match coords {
        Some(c) if adj.len() > 2000 && c.len() == adj.len() => geometric_dissection(&adj, c),
        _ => minimum_degree(&adj),
    }
}

/// Sparse direct solve with iterative refinement. Returns the solution and
/// the relative residual `‖Ax−b‖/‖b‖`.
pub fn linear_solve<T: Scalar>(a: &CscMatrix<T>, b: &[T], order: &[usize], pivot_threshold: T) -> Result<(Vec<T>, T)> {
    let lu = lu_factor(a, order, pivot_threshold)?;
    let bn = norm(b);
    if bn == T::zero() {
        return Ok((vec![T::zero(); b.len()], T::zero()));
    }
    let mut x = lu.solve(b);
    let resid = |x: &[T]| -> Vec<T> { a.mul_vec(x).iter().zip(b).map(|(&ax, &bi)| bi - ax).collect() };
    let mut r = resid(&x);
    let mut rel = norm(&r) / bn;
    for _ in 0..3 {
        if rel < T::lit(1e-14) {
            break;
        }
        let d = lu.solve(&r);
        let xn: Vec<T> = x.iter().zip(&d).map(|(&a, &b)| a + b).collect();
        let rn = resid(&xn);
        let reln = norm(&rn) / bn;
        if !(reln < rel) {
            break;
        }
        x = xn;
        r = rn;
        rel = reln;
    }
    if !rel.is_finite() {
        return Err(Error::Singular { column: usize::MAX });
    }
    Ok((x, rel))
}

/// Hooks the Newton driver needs beyond row evaluation.
pub trait NewtonSystem<T: Scalar>: RowSystem<T> {
    /// Residual with a check for non-finite entries.
    fn checked_residual(&self, x: &[T]) -> Result<Vec<T>>;
    fn pattern(&self, x: &[T]) -> Pattern;
    fn dof_coords(&self) -> Option<Vec<Point<T>>> {
        None
    }
}

/// Newton's method from `x0`. Terminates once the residual norm drops below
/// `max(abs_tol, rel_tol · initial norm)`.
pub fn newton_solve<T: Scalar, S: NewtonSystem<T>>(sys: &S, x0: &[T], cfg: &NewtonConfig<T>) -> Result<(Vec<T>, NewtonReport)> {
    cfg.validate()?;
    let mut x = x0.to_vec();
    let mut r = sys.checked_residual(&x)?;
    let r0 = norm(&r);
    let tol = cfg.abs_tol.max(cfg.rel_tol * r0);
    let mut report = NewtonReport::default();
    report.records.push(IterationRecord { iteration: 0, residual_norm: r0.as_f64(), update_norm: 0.0 });
    if r0 < tol {
        report.converged = true;
        return Ok((x, report));
    }
    let pat = sys.pattern(&x);
    let coords = sys.dof_coords();
    let order = column_ordering(&pat, coords.as_deref());
    let mut rn = r0;
    for it in 1..=cfg.max_iterations {
        let mut jac = fd_jacobian(sys, &pat, &x, &r);
        let mut rhs: Vec<T> = r.iter().map(|&v| -v).collect();
        if cfg.equilibrate {
            let s = row_scales(&jac);
            jac.scale_rows(&s);
            for (v, &si) in rhs.iter_mut().zip(&s) {
                *v *= si;
            }
        }
        let (dx, _) = linear_solve(&jac, &rhs, &order, cfg.pivot_threshold)?;
        let mut lambda = T::one();
        let mut xn: Vec<T>;
        let mut rnew: Vec<T>;
        let mut nn: T;
        let mut tries = 0;
        loop {
            xn = x.iter().zip(&dx).map(|(&a, &d)| a + lambda * d).collect();
            rnew = sys.checked_residual(&xn)?;
            nn = norm(&rnew);
            let accept = !cfg.line_search || nn <= (T::one() - T::lit(1e-4) * lambda) * rn || tries >= 10;
            if accept {
                break;
            }
            lambda *= T::half();
            tries += 1;
        }
        let un = lambda * norm(&dx);
        x = xn;
        r = rnew;
        rn = nn;
        report.records.push(IterationRecord { iteration: it, residual_norm: rn.as_f64(), update_norm: un.as_f64() });
        if rn < tol {
            report.converged = true;
            return Ok((x, report));
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        initial_residual: r0.as_f64(),
        last_residual: rn.as_f64(),
    })
}

fn row_scales<T: Scalar>(a: &CscMatrix<T>) -> Vec<T> {
    let mut m = vec![T::zero(); a.nrows];
    for (&i, &v) in a.rowind.iter().zip(&a.values) {
        m[i] = m[i].max(v.abs());
    }
    m.into_iter().map(|v| if v > T::zero() { T::one() / v } else { T::one() }).collect()
}

#[cfg(test)]
mod tests {
    use super::super::layout::StateView;
    use super::*;

    struct Quadratic;

    impl RowSystem<f64> for Quadratic {
        fn n_rows(&self) -> usize {
            2
        }
        fn row<V: StateView<f64> + ?Sized>(&self, i: usize, x: &V) -> f64 {
            match i {
                0 => x.get(0) * x.get(0) + x.get(1) - 3.0,
                _ => x.get(0) - x.get(1) + 1.0,
            }
        }
    }

    impl NewtonSystem<f64> for Quadratic {
        fn checked_residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(self.residual_vec(x))
        }
        fn pattern(&self, x: &[f64]) -> Pattern {
            Pattern::detect(self, x)
        }
    }

    #[test]
    fn converges_quadratically() {
        let (x, rep) = newton_solve(&Quadratic, &[2.0, 2.0], &NewtonConfig::default()).unwrap();
        // x^2 + x + 1 - 3 = 0 -> x = 1
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);
        assert!(rep.converged && rep.updates() <= 6);
        assert!(rep.to_csv().starts_with("iteration,residual_norm,update_norm\n"));
    }

    #[test]
    fn linear_solve_identity() {
        let a = CscMatrix::<f64>::identity(4);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        let (x, rel) = linear_solve(&a, &b, &[0, 1, 2, 3], 0.1).unwrap();
        assert_eq!(x, b);
        assert!(rel < 1e-15);
    }

    #[test]
    fn non_convergence_reports_norms() {
        let cfg = NewtonConfig { max_iterations: 1, ..NewtonConfig::default() };
        match newton_solve(&Quadratic, &[10.0, -5.0], &cfg) {
            Err(Error::NonConvergence { iterations: 1, initial_residual, last_residual }) => {
                assert!(initial_residual > last_residual && last_residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
