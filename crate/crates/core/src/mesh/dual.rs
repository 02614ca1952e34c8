//! Box-scheme dual topology: sub-control volumes, sub-control-volume faces
//! and boundary sub-faces, with basis data cached at integration points.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{polygon_centroid, signed_area, Point};
use crate::mesh::basis::{eval_basis, BasisEval};
use crate::mesh::boxmesh::BoxMesh;
use crate::scalar::Scalar;

/// Sub-control volume: the part of element `element` belonging to `vertex`.
#[derive(Clone, Debug)]
pub struct Scv<T> {
    pub vertex: usize,
    pub element: usize,
    pub local: usize,
    pub volume: T,
    /// Counter-clockwise polygon `[x_v, m_next, x_E, m_prev]`.
    pub corners: [Point<T>; 4],
    pub centroid: Point<T>,
}

/// Interior sub-control-volume face from an edge midpoint to the element
/// centre. The normal points from the scv of `vertices[0]` (lower global
/// index) towards that of `vertices[1]`.
#[derive(Clone, Debug)]
pub struct Scvf<T> {
    pub element: usize,
    pub vertices: [usize; 2],
    pub ip: Point<T>,
    pub normal: Point<T>,
    pub area: T,
    pub basis: BasisEval<T>,
}

/// Half of a boundary edge, owned by one vertex.
#[derive(Clone, Debug)]
pub struct BoundarySubface<T> {
    pub vertex: usize,
    /// Index into `BoxMesh::boundary`.
    pub edge: usize,
    pub element: usize,
    /// Segment from the vertex to the edge midpoint.
    pub p0: Point<T>,
    pub p1: Point<T>,
    pub normal: Point<T>,
    pub area: T,
    pub marker: u32,
}

#[derive(Clone, Debug)]
pub struct DualTopology<T> {
    pub scvs: Vec<Scv<T>>,
    pub scvfs: Vec<Scvf<T>>,
    pub element_scvs: Vec<Range<usize>>,
    pub element_scvfs: Vec<Range<usize>>,
    pub subfaces: Vec<BoundarySubface<T>>,
    /// Control-volume measure `|K|` per vertex.
    pub cv_volume: Vec<T>,
    pub vertex_scvs: Vec<Vec<usize>>,
    pub vertex_subfaces: Vec<Vec<usize>>,
    pub vertex_elements: Vec<Vec<usize>>,
}

impl<T: Scalar> DualTopology<T> {
    pub fn build(mesh: &BoxMesh<T>) -> Result<Self> {
        let nv = mesh.n_vertices();
        let mut scvs = Vec::new();
        let mut scvfs = Vec::new();
        let mut element_scvs = Vec::with_capacity(mesh.n_elements());
        let mut element_scvfs = Vec::with_capacity(mesh.n_elements());
        let mut cv_volume = vec![T::zero(); nv];
        let mut vertex_scvs = vec![Vec::new(); nv];
        let mut vertex_elements = vec![Vec::new(); nv];

        for (e, el) in mesh.elements.iter().enumerate() {
            let corners = mesh.corners(e);
            let area = signed_area(&corners);
            if !(area > T::zero()) {
                return Err(Error::Mesh(format!("element {e} is degenerate (area {area})")));
            }
            let xe = mesh.center(e);
            let n = corners.len();
            let mid = |k: usize| corners[k].midpoint(&corners[(k + 1) % n]);

            let s0 = scvs.len();
            for k in 0..n {
                let poly = [corners[k], mid(k), xe, mid((k + n - 1) % n)];
                let volume = signed_area(&poly);
                if !(volume > T::zero()) {
                    return Err(Error::Mesh(format!("element {e} yields a non-positive sub-control volume")));
                }
                let v = el.vertices[k];
                cv_volume[v] += volume;
                vertex_scvs[v].push(scvs.len());
                vertex_elements[v].push(e);
                scvs.push(Scv { vertex: v, element: e, local: k, volume, corners: poly, centroid: polygon_centroid(&poly) });
            }
            element_scvs.push(s0..scvs.len());

            let f0 = scvfs.len();
            for k in 0..n {
                let (va, vb) = (el.vertices[k], el.vertices[(k + 1) % n]);
                let (lo, hi) = if va < vb { (va, vb) } else { (vb, va) };
                let m = mid(k);
                let d = xe - m;
                let area = d.norm();
                let mut normal = d.perp_cw() / area;
                if normal.dot(&(mesh.vertices[hi] - m)) < T::zero() {
                    normal = -normal;
                }
                let ip = m.midpoint(&xe);
                let basis = eval_basis(&corners, ip)?;
                scvfs.push(Scvf { element: e, vertices: [lo, hi], ip, normal, area, basis });
            }
            element_scvfs.push(f0..scvfs.len());
        }

        let mut subfaces = Vec::with_capacity(2 * mesh.boundary.len());
        let mut vertex_subfaces = vec![Vec::new(); nv];
        for (k, b) in mesh.boundary.iter().enumerate() {
            let (xa, xb) = (mesh.vertices[b.vertices[0]], mesh.vertices[b.vertices[1]]);
            let m = xa.midpoint(&xb);
            let normal = (xb - xa).perp_cw().normalized();
            for (v, p0) in [(b.vertices[0], xa), (b.vertices[1], xb)] {
                vertex_subfaces[v].push(subfaces.len());
                subfaces.push(BoundarySubface {
                    vertex: v,
                    edge: k,
                    element: b.element,
                    p0,
                    p1: m,
                    normal,
                    area: p0.distance(&m),
                    marker: b.marker,
                });
            }
        }

        Ok(Self {
            scvs,
            scvfs,
            element_scvs,
            element_scvfs,
            subfaces,
            cv_volume,
            vertex_scvs,
            vertex_subfaces,
            vertex_elements,
        })
    }

    pub fn total_volume(&self) -> T {
        self.cv_volume.iter().copied().sum()
    }

    /// Local vertex index of global vertex `v` inside element `e`.
    pub fn local_index(mesh: &BoxMesh<T>, e: usize, v: usize) -> Option<usize> {
        mesh.elements[e].vertices.iter().position(|&w| w == v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_right_triangle() {
        let v: Vec<Point<f64>> = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let m = BoxMesh::from_elements(v, vec![vec![0, 1, 2]], |_| 1).unwrap();
        let d = DualTopology::build(&m).unwrap();
        assert_eq!(d.scvs.len(), 3);
        for s in &d.scvs {
            // shoelace oracle of the kite [x_v, m, x_E, m']
            let c = s.corners;
            let mut a = 0.0;
            for k in 0..4 {
                let (p, q) = (c[k], c[(k + 1) % 4]);
                a += p.x * q.y - q.x * p.y;
            }
            assert!((0.5 * a - 1.0 / 6.0).abs() < 1e-15);
            assert!((s.volume - 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(d.scvfs.len(), 3);
        assert_eq!(d.subfaces.len(), 6);
    }

    #[test]
    fn unit_square() {
        let v: Vec<Point<f64>> = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let m = BoxMesh::from_elements(v, vec![vec![0, 1, 2, 3]], |_| 1).unwrap();
        let d = DualTopology::build(&m).unwrap();
        assert_eq!(d.scvs.len(), 4);
        for s in &d.scvs {
            assert!((s.volume - 0.25).abs() < 1e-15);
        }
        assert_eq!(d.scvfs.len(), 4);
        for f in &d.scvfs {
            assert!((f.area - 0.5).abs() < 1e-15);
            let (lo, hi) = (m.vertices[f.vertices[0]], m.vertices[f.vertices[1]]);
            assert!(f.normal.dot(&(hi - lo)) > 0.0);
        }
        for s in &d.subfaces {
            assert!((s.area - 0.5).abs() < 1e-15);
            assert!((s.normal.norm() - 1.0).abs() < 1e-15);
            // outward: pointing away from the element centre
            assert!(s.normal.dot(&(s.p1 - Point::new(0.5, 0.5))) > 0.0);
        }
    }
}
