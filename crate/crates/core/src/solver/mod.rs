//! Monolithic assembly and Newton solve of the coupled system.

pub mod dense;
pub mod jacobian;
pub mod layout;
pub mod newton;
pub mod ordering;
pub mod sparse;

use std::sync::OnceLock;

use rayon::prelude::*;

pub use dense::dense_solve;
pub use jacobian::{central_difference_jacobian, fd_jacobian, fd_step, Pattern, RowSystem};
pub use layout::{DofKind, DofLayout, Recorder, RowKind, StateView, SystemState};
pub use newton::{column_ordering, linear_solve, newton_solve, IterationRecord, NewtonConfig, NewtonReport, NewtonSystem};
pub use sparse::{lu_factor, CscMatrix, LuFactors};

use crate::coupling::{CouplingContext, CouplingParams};
use crate::error::{Error, Result};
use crate::freeflow::{FaceKind, FreeFlow};
use crate::geometry::Point;
use crate::porous::Porous;
use crate::scalar::Scalar;

/// Free flow, porous medium, or both joined along their interface.
#[derive(Clone)]
pub struct CoupledProblem<T> {
    pub ff: Option<FreeFlow<T>>,
    pub pm: Option<Porous<T>>,
    pub coupling: Option<CouplingContext<T>>,
    pub layout: DofLayout,
    pattern: OnceLock<Pattern>,
}

/// Global mass bookkeeping of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassBalance<T> {
    /// Mass leaving through outer free-flow boundaries.
    pub ff_boundary_outflow: T,
    /// Mass leaving through outer porous boundaries.
    pub pm_boundary_outflow: T,
    /// Integrated mass sources of both subdomains.
    pub sources: T,
    /// `Σ_γ (ff-side + pm-side)` interface flux.
    pub interface_mismatch: T,
    /// Outflow minus sources.
    pub imbalance: T,
}

impl<T: Scalar> CoupledProblem<T> {
    pub fn new(ff: Option<FreeFlow<T>>, pm: Option<Porous<T>>, params: CouplingParams<T>) -> Result<Self> {
        if ff.is_none() && pm.is_none() {
            return Err(Error::Config("problem has neither free flow nor porous medium".into()));
        }
        let has_cpl_faces = ff.as_ref().is_some_and(|f| !f.coupling_faces().is_empty());
        let coupling = match (&ff, &pm) {
            (Some(f), Some(p)) if has_cpl_faces => {
                let c = CouplingContext::build(f, p, params)?;
                c.validate(f)?;
                Some(c)
            }
            (Some(_), None) if has_cpl_faces => {
                return Err(Error::Config("free flow has coupling faces but there is no porous medium".into()));
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("free flow and porous medium given without a coupling interface".into()));
            }
            _ => None,
        };
        let ff_fixed = ff.as_ref().is_some_and(|f| f.has_pressure_outlet());
        let pm_fixed = pm.as_ref().is_some_and(|p| p.has_pressure_boundary());
        let fixed = match (&ff, &pm) {
            (Some(_), Some(_)) => ff_fixed || pm_fixed,
            (Some(_), None) => ff_fixed,
            _ => pm_fixed,
        };
        if !fixed {
            return Err(Error::Config("pressure level is undetermined: add an outflow or a pressure boundary".into()));
        }
        let (cells, faces) = match &ff {
            Some(f) => (f.active_cells(), f.velocity_faces()),
            None => (Vec::new(), Vec::new()),
        };
        let dir = pm.as_ref().map(|p| p.dirichlet_vertices()).unwrap_or_default();
        let layout = DofLayout::new(&cells, &faces, &dir);
        layout.check()?;
        Ok(Self { ff, pm, coupling, layout, pattern: OnceLock::new() })
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.len()
    }

    pub fn zero_state(&self) -> SystemState<T> {
        SystemState::zeros(&self.layout)
    }

    /// Residual of row `i`.
    pub fn residual_row<V: StateView<T> + ?Sized>(&self, i: usize, x: &V) -> T {
        let lay = &self.layout;
        let cpl = self.coupling.as_ref();
        match lay.rows[i] {
            RowKind::FfMass(c) => self.ff.as_ref().expect("ff row").mass_residual(lay, c, x),
            RowKind::FfMomentum(f) => self.ff.as_ref().expect("ff row").momentum_residual(cpl, lay, f, x),
            RowKind::PmBalance(v) | RowKind::PmDirichlet(v) => {
                self.pm.as_ref().expect("pm row").residual(self.ff.as_ref(), cpl, lay, v, x)
            }
        }
    }

    /// Full residual; a non-finite entry is reported with its equation.
    pub fn residual(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n_dofs() {
            return Err(Error::InvalidInput(format!("state has {} entries, expected {}", x.len(), self.n_dofs())));
        }
        let r = self.residual_vec(x);
        if let Some(i) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, kind: self.layout.rows[i].to_string() });
        }
        Ok(r)
    }

    /// Jacobian sparsity, detected once and cached.
    pub fn sparsity(&self) -> &Pattern {
        self.pattern.get_or_init(|| {
            let x = vec![T::zero(); self.n_dofs()];
            Pattern::detect(self, &x)
        })
    }

    /// Residual and finite-difference Jacobian at `x`.
    pub fn assemble(&self, x: &[T]) -> Result<(Vec<T>, CscMatrix<T>)> {
        let r = self.residual(x)?;
        let j = fd_jacobian(self, self.sparsity(), x, &r);
        Ok((r, j))
    }

    /// Position of every unknown: cell centres, face centres, vertices.
    pub fn dof_positions(&self) -> Vec<Point<T>> {
        self.layout
            .kinds
            .iter()
            .map(|k| match *k {
                DofKind::FfPressure(c) => self.ff.as_ref().expect("ff").grid.cells[c].center,
                DofKind::FfVelocity(f) => self.ff.as_ref().expect("ff").grid.faces[f].center,
                DofKind::PmPressure(v) => self.pm.as_ref().expect("pm").mesh.vertices[v],
            })
            .collect()
    }

    /// Newton solve from `x0` (zero state if `None`).
    pub fn solve(&self, x0: Option<&SystemState<T>>, cfg: &NewtonConfig<T>) -> Result<(SystemState<T>, NewtonReport)> {
        let start = match x0 {
            Some(s) => SystemState::from_values(&self.layout, s.values.clone())?,
            None => self.zero_state(),
        };
        let (x, rep) = newton_solve(self, &start.values, cfg)?;
        Ok((SystemState { values: x }, rep))
    }

    /// Boundary outflow at each porous Dirichlet vertex (zero elsewhere):
    /// the flux that closes the control-volume balance.
    pub fn pm_dirichlet_outflow(&self, x: &[T]) -> Vec<T> {
        let Some(pm) = &self.pm else { return Vec::new() };
        (0..pm.mesh.n_vertices())
            .map(|v| {
                if pm.dirichlet[v].is_some() {
                    -pm.balance(self.ff.as_ref(), self.coupling.as_ref(), &self.layout, v, x)
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// Sum of ff-side plus pm-side facet fluxes; zero by construction.
    pub fn interface_flux_mismatch(&self, x: &[T]) -> T {
        match (&self.ff, &self.coupling) {
            (Some(ff), Some(c)) => (0..c.facets.len())
                .map(|k| {
                    let (a, b) = c.facet_mass_flux(ff, &self.layout, k, x);
                    a + b
                })
                .sum(),
            _ => T::zero(),
        }
    }

    /// Global mass bookkeeping of state `x`.
    pub fn mass_balance(&self, x: &[T]) -> MassBalance<T> {
        let mut ff_out = T::zero();
        let mut src = T::zero();
        if let Some(ff) = &self.ff {
            for (f, k) in ff.kind.iter().enumerate() {
                if ff.grid.faces[f].is_boundary() && !matches!(k, FaceKind::Dead | FaceKind::Coupling) {
                    ff_out += ff.boundary_outflow(&self.layout, f, x);
                }
            }
            src += ff.params.rho * ff.mass_source.iter().copied().sum::<T>();
        }
        let mut pm_out = T::zero();
        if let Some(pm) = &self.pm {
            pm_out = pm.neumann.iter().copied().sum::<T>() + self.pm_dirichlet_outflow(x).into_iter().sum::<T>();
            src += pm.source.iter().copied().sum::<T>();
        }
        MassBalance {
            ff_boundary_outflow: ff_out,
            pm_boundary_outflow: pm_out,
            sources: src,
            interface_mismatch: self.interface_flux_mismatch(x),
            imbalance: ff_out + pm_out - src,
        }
    }
}

impl<T: Scalar> RowSystem<T> for CoupledProblem<T> {
    fn n_rows(&self) -> usize {
        self.layout.len()
    }

    fn row<V: StateView<T> + ?Sized>(&self, i: usize, x: &V) -> T {
        self.residual_row(i, x)
    }

    fn residual_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.layout.len()).into_par_iter().map(|i| self.residual_row(i, x)).collect()
    }
}

impl<T: Scalar> NewtonSystem<T> for CoupledProblem<T> {
    fn checked_residual(&self, x: &[T]) -> Result<Vec<T>> {
        self.residual(x)
    }

    fn pattern(&self, _x: &[T]) -> Pattern {
        self.sparsity().clone()
    }

    fn dof_coords(&self) -> Option<Vec<Point<T>>> {
        Some(self.dof_positions())
    }
}
