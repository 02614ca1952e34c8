//! Global numbering of the unknowns and read access to state vectors.

use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// What a global unknown represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    FfPressure(usize),
    FfVelocity(usize),
    PmPressure(usize),
}

/// Equation attached to a row. Row `i` is paired with unknown `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    FfMass(usize),
    FfMomentum(usize),
    PmBalance(usize),
    PmDirichlet(usize),
}

impl std::fmt::Display for RowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowKind::FfMass(c) => write!(f, "free-flow mass, cell {c}"),
            RowKind::FfMomentum(k) => write!(f, "free-flow momentum, face {k}"),
            RowKind::PmBalance(v) => write!(f, "porous balance, vertex {v}"),
            RowKind::PmDirichlet(v) => write!(f, "porous Dirichlet, vertex {v}"),
        }
    }
}

/// Block layout `[ff cell pressures | ff face velocities | pm vertex pressures]`.
#[derive(Clone, Debug, Default)]
pub struct DofLayout {
    pub cell_dof: Vec<Option<usize>>,
    pub face_dof: Vec<Option<usize>>,
    pub vertex_dof: Vec<usize>,
    pub kinds: Vec<DofKind>,
    pub rows: Vec<RowKind>,
    pub ff_velocity_offset: usize,
    pub pm_offset: usize,
}

impl DofLayout {
    /// `active_cells[c]`, `velocity_faces[f]` flag the free-flow unknowns;
    /// `dirichlet_vertices[v]` marks porous vertices with a pinned value.
    pub fn new(active_cells: &[bool], velocity_faces: &[bool], dirichlet_vertices: &[bool]) -> Self {
        let mut kinds = Vec::new();
        let mut rows = Vec::new();
        let cell_dof = active_cells
            .iter()
            .enumerate()
            .map(|(c, &a)| {
                a.then(|| {
                    kinds.push(DofKind::FfPressure(c));
                    rows.push(RowKind::FfMass(c));
                    kinds.len() - 1
                })
            })
            .collect();
        let ff_velocity_offset = kinds.len();
        let face_dof = velocity_faces
            .iter()
            .enumerate()
            .map(|(f, &a)| {
                a.then(|| {
                    kinds.push(DofKind::FfVelocity(f));
                    rows.push(RowKind::FfMomentum(f));
                    kinds.len() - 1
                })
            })
            .collect();
        let pm_offset = kinds.len();
        let vertex_dof = dirichlet_vertices
            .iter()
            .enumerate()
            .map(|(v, &d)| {
                kinds.push(DofKind::PmPressure(v));
                rows.push(if d { RowKind::PmDirichlet(v) } else { RowKind::PmBalance(v) });
                kinds.len() - 1
            })
            .collect();
        Self { cell_dof, face_dof, vertex_dof, kinds, rows, ff_velocity_offset, pm_offset }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn n_ff_pressure(&self) -> usize {
        self.ff_velocity_offset
    }

    pub fn n_ff_velocity(&self) -> usize {
        self.pm_offset - self.ff_velocity_offset
    }

    pub fn n_pm(&self) -> usize {
        self.len() - self.pm_offset
    }

    /// Verifies that the forward and inverse maps agree.
    pub fn check(&self) -> Result<()> {
        for (i, k) in self.kinds.iter().enumerate() {
            let back = match *k {
                DofKind::FfPressure(c) => self.cell_dof[c],
                DofKind::FfVelocity(f) => self.face_dof[f],
                DofKind::PmPressure(v) => Some(self.vertex_dof[v]),
            };
            if back != Some(i) {
                return Err(Error::InvalidInput(format!("layout maps are inconsistent at dof {i}")));
            }
        }
        Ok(())
    }
}

/// Read-only access to a state vector. Residual kernels are written against
/// this trait so that their read pattern can be recorded.
pub trait StateView<T> {
    fn get(&self, i: usize) -> T;
}

impl<T: Scalar> StateView<T> for [T] {
    #[inline]
    fn get(&self, i: usize) -> T {
        self[i]
    }
}

impl<T: Scalar> StateView<T> for Vec<T> {
    #[inline]
    fn get(&self, i: usize) -> T {
        self[i]
    }
}

/// View that logs every index it is asked for.
pub struct Recorder<'a, T> {
    pub values: &'a [T],
    pub reads: RefCell<Vec<usize>>,
}

impl<'a, T> Recorder<'a, T> {
    pub fn new(values: &'a [T]) -> Self {
        Self { values, reads: RefCell::new(Vec::new()) }
    }

    /// Sorted, de-duplicated indices read since the last call.
    pub fn take(&self) -> Vec<usize> {
        let mut r = std::mem::take(&mut *self.reads.borrow_mut());
        r.sort_unstable();
        r.dedup();
        r
    }
}

impl<T: Scalar> StateView<T> for Recorder<'_, T> {
    #[inline]
    fn get(&self, i: usize) -> T {
        self.reads.borrow_mut().push(i);
        self.values[i]
    }
}

/// Monolithic unknown vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> SystemState<T> {
    pub fn zeros(layout: &DofLayout) -> Self {
        Self { values: vec![T::zero(); layout.len()] }
    }

    pub fn from_values(layout: &DofLayout, values: Vec<T>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::InvalidInput(format!(
                "state has {} entries, layout expects {}",
                values.len(),
                layout.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("state entry {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_are_disjoint_and_exhaustive() {
        let l = DofLayout::new(&[true, false, true], &[true, false, true, true], &[false, true]);
        assert_eq!(l.n_ff_pressure(), 2);
        assert_eq!(l.n_ff_velocity(), 3);
        assert_eq!(l.n_pm(), 2);
        assert_eq!(l.len(), 7);
        l.check().unwrap();
        assert_eq!(l.rows[6], RowKind::PmDirichlet(1));
    }

    #[test]
    fn recorder_logs_reads() {
        let v = [1.0, 2.0, 3.0];
        let r = Recorder::new(&v);
        let s = r.get(2) + r.get(0) + r.get(2);
        assert_eq!(s, 7.0);
        assert_eq!(r.take(), vec![0, 2]);
    }
}
