//! Axis-aligned structured grid with cell-centred pressures and
//! face-centred normal velocities.

use crate::error::{Error, Result};
use crate::geometry::{Axis, Point, Rect};
use crate::scalar::Scalar;

/// Boundary markers assigned by default to the four sides of the grid and to
/// faces separating active from inactive cells.
pub mod markers {
    pub const LEFT: u32 = 1;
    pub const RIGHT: u32 = 2;
    pub const BOTTOM: u32 = 3;
    pub const TOP: u32 = 4;
    pub const INTERNAL: u32 = 5;
}

#[derive(Clone, Debug)]
pub struct Cell<T> {
    pub i: usize,
    pub j: usize,
    pub center: Point<T>,
    pub volume: T,
    pub active: bool,
}

#[derive(Clone, Debug)]
pub struct Face<T> {
    /// Normal direction. The stored normal is `+e_axis`.
    pub axis: Axis,
    /// Position index: x-faces have `i` in `0..=nx`, `j` in `0..ny`;
    /// y-faces have `i` in `0..nx`, `j` in `0..=ny`.
    pub i: usize,
    pub j: usize,
    pub center: Point<T>,
    pub area: T,
    /// Active cells on the low and high side along `axis`.
    pub cells: [Option<usize>; 2],
    pub marker: Option<u32>,
}

impl<T: Scalar> Face<T> {
    pub fn normal(&self) -> Point<T> {
        Point::unit(self.axis)
    }

    /// A face is live if at least one adjacent cell is active.
    pub fn is_live(&self) -> bool {
        self.cells[0].is_some() || self.cells[1].is_some()
    }

    pub fn is_boundary(&self) -> bool {
        self.cells[0].is_some() != self.cells[1].is_some()
    }

    /// The single adjacent active cell of a boundary face.
    pub fn inner_cell(&self) -> Option<usize> {
        match self.cells {
            [Some(c), None] | [None, Some(c)] => Some(c),
            _ => None,
        }
    }

    /// Sign of the outward normal (relative to `+e_axis`) of a boundary face,
    /// seen from its single active cell.
    pub fn outward_sign(&self) -> T {
        if self.cells[1].is_none() {
            T::one()
        } else {
            -T::one()
        }
    }
}

#[derive(Clone, Debug)]
pub struct StaggeredGrid<T> {
    pub domain: Rect<T>,
    pub nx: usize,
    pub ny: usize,
    pub dx: T,
    pub dy: T,
    pub cells: Vec<Cell<T>>,
    pub faces: Vec<Face<T>>,
}

impl<T: Scalar> StaggeredGrid<T> {
    /// Uniform grid over `domain` with all cells active.
    pub fn new(domain: Rect<T>, nx: usize, ny: usize) -> Result<Self> {
        Self::with_mask(domain, nx, ny, |_| true)
    }

    /// Uniform grid whose cells outside `hole` are active. Cells whose centre
    /// lies inside `hole` are removed from the flow domain.
    pub fn with_hole(domain: Rect<T>, nx: usize, ny: usize, hole: Rect<T>) -> Result<Self> {
        Self::with_mask(domain, nx, ny, |c| !hole.contains(c, T::zero()))
    }

    /// Uniform grid with cells activated by `active(center)`.
    pub fn with_mask<F: Fn(Point<T>) -> bool>(
        domain: Rect<T>,
        nx: usize,
        ny: usize,
        active: F,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidInput(format!("cell counts must be positive, got {nx}x{ny}")));
        }
        if !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
            return Err(Error::InvalidInput("domain has non-positive extent".into()));
        }
        let dx = domain.width() / T::from_count(nx);
        let dy = domain.height() / T::from_count(ny);
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let center = Point::new(
                    domain.x0 + (T::from_count(i) + T::half()) * dx,
                    domain.y0 + (T::from_count(j) + T::half()) * dy,
                );
                cells.push(Cell { i, j, center, volume: dx * dy, active: active(center) });
            }
        }
        let cid = |i: usize, j: usize| j * nx + i;
        let live = |i: isize, j: isize| -> Option<usize> {
            if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
                return None;
            }
            let c = cid(i as usize, j as usize);
            cells[c].active.then_some(c)
        };
        let mut faces = Vec::with_capacity((nx + 1) * ny + nx * (ny + 1));
        for j in 0..ny {
            for i in 0..=nx {
                let center = Point::new(
                    domain.x0 + T::from_count(i) * dx,
                    domain.y0 + (T::from_count(j) + T::half()) * dy,
                );
                let lo = live(i as isize - 1, j as isize);
                let hi = live(i as isize, j as isize);
                let marker = side_marker(Axis::X, i, nx, lo, hi);
                faces.push(Face { axis: Axis::X, i, j, center, area: dy, cells: [lo, hi], marker });
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                let center = Point::new(
                    domain.x0 + (T::from_count(i) + T::half()) * dx,
                    domain.y0 + T::from_count(j) * dy,
                );
                let lo = live(i as isize, j as isize - 1);
                let hi = live(i as isize, j as isize);
                let marker = side_marker(Axis::Y, j, ny, lo, hi);
                faces.push(Face { axis: Axis::Y, i, j, center, area: dx, cells: [lo, hi], marker });
            }
        }
        if cells.iter().all(|c| !c.active) {
            return Err(Error::InvalidInput("grid has no active cells".into()));
        }
        Ok(Self { domain, nx, ny, dx, dy, cells, faces })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_x_faces(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    pub fn spacing(&self, axis: Axis) -> T {
        match axis {
            Axis::X => self.dx,
            Axis::Y => self.dy,
        }
    }

    #[inline]
    pub fn cell_id(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x_face(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn y_face(&self, i: usize, j: usize) -> usize {
        self.n_x_faces() + j * self.nx + i
    }

    pub fn active_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(|(_, c)| c.active).map(|(k, _)| k)
    }

    pub fn live_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces.iter().enumerate().filter(|(_, f)| f.is_live()).map(|(k, _)| k)
    }

    /// Face of cell `c` normal to `axis`; `side` 0 is the low side, 1 the high.
    #[inline]
    pub fn cell_face(&self, c: usize, axis: Axis, side: usize) -> usize {
        let cell = &self.cells[c];
        match axis {
            Axis::X => self.x_face(cell.i + side, cell.j),
            Axis::Y => self.y_face(cell.i, cell.j + side),
        }
    }

    /// The four faces of a cell in the order `[x-, x+, y-, y+]`.
    pub fn cell_faces(&self, c: usize) -> [usize; 4] {
        [
            self.cell_face(c, Axis::X, 0),
            self.cell_face(c, Axis::X, 1),
            self.cell_face(c, Axis::Y, 0),
            self.cell_face(c, Axis::Y, 1),
        ]
    }

    /// Face parallel to `f`, shifted by one cell in direction `dir` (`-1` or
    /// `+1`) along the tangential axis. Returns `None` outside the grid.
    pub fn shifted_face(&self, f: usize, dir: i32) -> Option<usize> {
        let face = &self.faces[f];
        match face.axis {
            Axis::X => {
                let j = face.j as i64 + dir as i64;
                (j >= 0 && (j as usize) < self.ny).then(|| self.x_face(face.i, j as usize))
            }
            Axis::Y => {
                let i = face.i as i64 + dir as i64;
                (i >= 0 && (i as usize) < self.nx).then(|| self.y_face(i as usize, face.j))
            }
        }
    }

    /// Sets the marker of every live boundary face satisfying `pred`.
    pub fn mark_boundary<F: Fn(&Face<T>) -> bool>(&mut self, marker: u32, pred: F) -> usize {
        let mut n = 0;
        for f in self.faces.iter_mut() {
            if f.is_boundary() && pred(f) {
                f.marker = Some(marker);
                n += 1;
            }
        }
        n
    }

    /// Total measure of the active cells.
    pub fn active_volume(&self) -> T {
        self.cells.iter().filter(|c| c.active).map(|c| c.volume).sum()
    }

    /// Checks the structural invariants of the grid.
    pub fn validate(&self) -> Result<()> {
        for (k, f) in self.faces.iter().enumerate() {
            if f.is_boundary() && f.marker.is_none() {
                return Err(Error::Mesh(format!("boundary face {k} has no marker")));
            }
            if !f.is_boundary() && f.marker.is_some() && f.cells[0].is_some() {
                return Err(Error::Mesh(format!("interior face {k} carries a boundary marker")));
            }
        }
        for c in self.active_cells() {
            for f in self.cell_faces(c) {
                if !self.faces[f].cells.contains(&Some(c)) {
                    return Err(Error::Mesh(format!("cell {c} not attached to its face {f}")));
                }
            }
        }
        Ok(())
    }
}

fn side_marker(axis: Axis, k: usize, n: usize, lo: Option<usize>, hi: Option<usize>) -> Option<u32> {
    if lo.is_some() == hi.is_some() {
        return None;
    }
    Some(match (axis, k) {
        (Axis::X, 0) => markers::LEFT,
        (Axis::X, k) if k == n => markers::RIGHT,
        (Axis::Y, 0) => markers::BOTTOM,
        (Axis::Y, k) if k == n => markers::TOP,
        _ => markers::INTERNAL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Rect<f64> {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn single_cell() {
        let g = StaggeredGrid::<f64>::new(unit(), 1, 1).unwrap();
        assert_eq!(g.n_cells(), 1);
        assert_eq!(g.n_faces(), 4);
        assert!(g.faces.iter().all(|f| f.is_boundary()));
        let m: Vec<_> = g.cell_faces(0).iter().map(|&f| g.faces[f].marker.unwrap()).collect();
        assert_eq!(m, vec![markers::LEFT, markers::RIGHT, markers::BOTTOM, markers::TOP]);
    }

    #[test]
    fn twenty_by_twenty_upper_block() {
        let g = StaggeredGrid::<f64>::new(Rect::new(0.0, 1.0, 1.0, 2.0), 20, 20).unwrap();
        assert_eq!(g.n_cells(), 400);
        assert_eq!(g.n_x_faces(), 21 * 20);
        assert_eq!(g.n_faces(), 21 * 20 + 20 * 21);
        for c in &g.cells {
            assert!((c.volume - 1.0 / 400.0).abs() < 1e-15);
        }
        assert!((g.active_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn face_sharing() {
        let g = StaggeredGrid::<f64>::new(unit(), 3, 2).unwrap();
        let mut count = vec![0; g.n_faces()];
        for c in g.active_cells() {
            for f in g.cell_faces(c) {
                count[f] += 1;
            }
        }
        for (k, f) in g.faces.iter().enumerate() {
            assert_eq!(count[k], if f.is_boundary() { 1 } else { 2 });
        }
        g.validate().unwrap();
    }

    #[test]
    fn hole_creates_internal_boundary() {
        let g = StaggeredGrid::<f64>::with_hole(
            Rect::new(0.0, 0.0, 1.0, 2.0),
            10,
            20,
            Rect::new(0.2, 0.8, 1.0, 1.6),
        )
        .unwrap();
        let inactive = g.cells.iter().filter(|c| !c.active).count();
        assert_eq!(inactive, 8 * 8);
        let internal = g.faces.iter().filter(|f| f.marker == Some(markers::INTERNAL)).count();
        // top and bottom of the block (8 faces each) plus its left side (8)
        assert_eq!(internal, 24);
        assert!((g.active_volume() - (2.0 - 0.8 * 0.8)).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(StaggeredGrid::<f64>::new(unit(), 0, 3).is_err());
        assert!(StaggeredGrid::<f64>::new(Rect::new(0.0, 0.0, 0.0, 1.0), 2, 2).is_err());
    }

    #[test]
    fn shifted_faces() {
        let g = StaggeredGrid::<f64>::new(unit(), 2, 2).unwrap();
        let f = g.x_face(1, 0);
        assert_eq!(g.shifted_face(f, 1), Some(g.x_face(1, 1)));
        assert_eq!(g.shifted_face(f, -1), None);
        let f = g.y_face(0, 1);
        assert_eq!(g.shifted_face(f, 1), Some(g.y_face(1, 1)));
    }
}
