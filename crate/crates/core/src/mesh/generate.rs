//! Structured porous-medium mesh generators for the three grid families:
//! conforming quads, box-conforming quads and graded simplices.

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::mesh::boxmesh::BoxMesh;
use crate::mesh::staggered::markers;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GridKind {
    Conforming,
    BoxConforming,
    Simplex,
}

impl std::str::FromStr for GridKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conforming" => Ok(GridKind::Conforming),
            "box_conforming" | "box-conforming" => Ok(GridKind::BoxConforming),
            "simplex" => Ok(GridKind::Simplex),
            _ => Err(Error::Config(format!("unknown grid kind '{s}'"))),
        }
    }
}

impl std::fmt::Display for GridKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GridKind::Conforming => "conforming",
            GridKind::BoxConforming => "box_conforming",
            GridKind::Simplex => "simplex",
        })
    }
}

/// Which side of the porous rectangle touches the free flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterfaceSide {
    Bottom,
    Top,
    Left,
    Right,
}

impl InterfaceSide {
    fn horizontal(self) -> bool {
        matches!(self, InterfaceSide::Bottom | InterfaceSide::Top)
    }
}

/// Generation request. `nx`, `ny` are the cell counts of the free-flow grid
/// footprint over the porous rectangle (the face spacing seen along the
/// interface is `extent / n`).
#[derive(Clone, Copy, Debug)]
pub struct PmGridSpec<T> {
    pub kind: GridKind,
    pub rect: Rect<T>,
    pub nx: usize,
    pub ny: usize,
    pub interface: InterfaceSide,
    /// Ratio of porous interface edge length to free-flow face length.
    pub interface_factor: T,
}

/// `n + 1` equidistant nodes on `[a, b]`.
pub fn uniform_nodes<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    let h = (b - a) / T::from_count(n);
    (0..=n).map(|k| if k == n { b } else { a + T::from_count(k) * h }).collect()
}

/// Nodes `a, a+h/2, a+3h/2, ..., b-h/2, b`: the midpoints of consecutive
/// nodes fall on the uniform nodes `a + k h`.
pub fn box_offset_nodes<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    let h = (b - a) / T::from_count(n);
    let mut v = vec![a];
    for k in 0..n {
        v.push(a + (T::from_count(k) + T::half()) * h);
    }
    v.push(b);
    v
}

/// Nodes whose two end edges have length `h/2` and whose interior edges have
/// length close to `f h`; the interior edge count is `round((n-1)/f)`, so the
/// edge length is exactly `f h` whenever `(n-1)/f` is an integer.
pub fn graded_interface_nodes<T: Scalar>(a: T, b: T, n: usize, f: T) -> Vec<T> {
    let h = (b - a) / T::from_count(n);
    let mut v = vec![a, a + h * T::half()];
    if n > 1 {
        let span = T::from_count(n - 1) * h;
        let k = (T::from_count(n - 1) / f).round().to_usize().unwrap_or(1).max(1);
        let e = span / T::from_count(k);
        for i in 1..=k {
            v.push(a + h * T::half() + T::from_count(i) * e);
        }
    }
    v.push(b);
    v
}

/// Quadrilateral or triangulated tensor-product mesh on the given nodes.
pub fn tensor_mesh<T: Scalar>(xs: &[T], ys: &[T], triangles: bool, rect: Rect<T>) -> Result<BoxMesh<T>> {
    let nxv = xs.len();
    let mut vertices = Vec::with_capacity(nxv * ys.len());
    for &y in ys {
        for &x in xs {
            vertices.push(Point::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * nxv + i;
    let mut elements = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..nxv - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if triangles {
                elements.push(vec![a, b, c]);
                elements.push(vec![a, c, d]);
            } else {
                elements.push(vec![a, b, c, d]);
            }
        }
    }
    let tol = T::lit(1e-10) * (rect.width() + rect.height());
    BoxMesh::from_elements(vertices, elements, |m| side_of(rect, m, tol))
}

fn side_of<T: Scalar>(r: Rect<T>, m: Point<T>, tol: T) -> u32 {
    if (m.y - r.y0).abs() <= tol {
        markers::BOTTOM
    } else if (m.y - r.y1).abs() <= tol {
        markers::TOP
    } else if (m.x - r.x0).abs() <= tol {
        markers::LEFT
    } else if (m.x - r.x1).abs() <= tol {
        markers::RIGHT
    } else {
        markers::INTERNAL
    }
}

/// Generates a porous-medium mesh of the requested family.
pub fn generate_pm_grid<T: Scalar>(spec: &PmGridSpec<T>) -> Result<BoxMesh<T>> {
    let f = spec.interface_factor;
    if !(f > T::zero()) || f > T::one() {
        return Err(Error::InvalidInput(format!("interface factor must lie in (0, 1], got {f}")));
    }
    if spec.nx == 0 || spec.ny == 0 {
        return Err(Error::InvalidInput("cell counts must be positive".into()));
    }
    if spec.kind != GridKind::Simplex && f < T::one() {
        return Err(Error::InvalidInput("interface factor below 1 requires the simplex grid kind".into()));
    }
    let r = spec.rect;
    let (along, across) = if spec.interface.horizontal() {
        ((r.x0, r.x1, spec.nx), (r.y0, r.y1, spec.ny))
    } else {
        ((r.y0, r.y1, spec.ny), (r.x0, r.x1, spec.nx))
    };
    let t_nodes = match spec.kind {
        GridKind::Conforming => uniform_nodes(along.0, along.1, along.2),
        GridKind::BoxConforming => box_offset_nodes(along.0, along.1, along.2),
        GridKind::Simplex => graded_interface_nodes(along.0, along.1, along.2, f),
    };
    let n_nodes = uniform_nodes(across.0, across.1, across.2);
    let tri = spec.kind == GridKind::Simplex;
    if spec.interface.horizontal() {
        tensor_mesh(&t_nodes, &n_nodes, tri, r)
    } else {
        tensor_mesh(&n_nodes, &t_nodes, tri, r)
    }
}
