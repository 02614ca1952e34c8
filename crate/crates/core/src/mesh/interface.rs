//! Decomposition of the coupling interface into facets: the pairwise
//! overlaps of free-flow faces with porous boundary sub-faces.

use crate::error::{Error, Result};
use crate::geometry::{Axis, Point};
use crate::mesh::boxmesh::BoxMesh;
use crate::mesh::dual::DualTopology;
use crate::mesh::staggered::StaggeredGrid;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceFacet<T> {
    pub p0: Point<T>,
    pub p1: Point<T>,
    pub length: T,
    pub ff_face: usize,
    /// Index into `DualTopology::subfaces`.
    pub subface: usize,
    pub pm_vertex: usize,
    pub pm_element: usize,
    /// End points of the porous boundary edge containing the facet.
    pub edge: [usize; 2],
    /// Position of the facet midpoint along `edge`, 0 at `edge[0]`.
    pub t_mid: T,
}

impl<T: Scalar> InterfaceFacet<T> {
    pub fn midpoint(&self) -> Point<T> {
        self.p0.midpoint(&self.p1)
    }
}

/// One-dimensional interval on an interface line.
#[derive(Clone, Copy, Debug)]
struct Interval<T> {
    lo: T,
    hi: T,
    id: usize,
}

struct Line<T> {
    /// Normal axis of the line and its coordinate along that axis.
    axis: Axis,
    coord: T,
    ff: Vec<Interval<T>>,
    pm: Vec<Interval<T>>,
}

/// Intersects the given free-flow boundary faces with the given porous
/// boundary sub-faces. Both sets must lie on common axis-aligned lines.
pub fn intersect_interface<T: Scalar>(
    grid: &StaggeredGrid<T>,
    ff_faces: &[usize],
    mesh: &BoxMesh<T>,
    dual: &DualTopology<T>,
    pm_subfaces: &[usize],
) -> Result<Vec<InterfaceFacet<T>>> {
    if ff_faces.is_empty() || pm_subfaces.is_empty() {
        return Err(Error::Config("interface has no coupling faces on one side".into()));
    }
    let total: T = ff_faces.iter().map(|&f| grid.faces[f].area).sum();
    let tol = T::lit(1e-10) * total;

    let mut lines: Vec<Line<T>> = Vec::new();
    for &f in ff_faces {
        let face = &grid.faces[f];
        let coord = face.center.coord(face.axis);
        let t = face.center.coord(face.axis.other());
        let half = face.area * T::half();
        let iv = Interval { lo: t - half, hi: t + half, id: f };
        match lines.iter_mut().find(|l| l.axis == face.axis && (l.coord - coord).abs() <= tol) {
            Some(l) => l.ff.push(iv),
            None => lines.push(Line { axis: face.axis, coord, ff: vec![iv], pm: Vec::new() }),
        }
    }
    for &s in pm_subfaces {
        let sf = &dual.subfaces[s];
        let d = sf.p1 - sf.p0;
        let axis = if d.x.abs() <= tol {
            Axis::X
        } else if d.y.abs() <= tol {
            Axis::Y
        } else {
            return Err(Error::Geometry(format!("porous sub-face {s} is not axis-aligned")));
        };
        let coord = sf.p0.coord(axis);
        let (a, b) = (sf.p0.coord(axis.other()), sf.p1.coord(axis.other()));
        let line = lines
            .iter_mut()
            .find(|l| l.axis == axis && (l.coord - coord).abs() <= tol)
            .ok_or_else(|| Error::Geometry(format!("porous sub-face {s} is not collinear with any free-flow coupling face")))?;
        line.pm.push(Interval { lo: a.min(b), hi: a.max(b), id: s });
    }

    let mut facets = Vec::new();
    let mut covered = T::zero();
    for line in lines.iter_mut() {
        line.ff.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite"));
        line.pm.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite"));
        let mut bp: Vec<T> = line.ff.iter().chain(line.pm.iter()).flat_map(|i| [i.lo, i.hi]).collect();
        bp.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        bp.dedup_by(|a, b| (*a - *b).abs() <= tol);
        for w in bp.windows(2) {
            let (s, e) = (w[0], w[1]);
            if e - s <= tol {
                continue;
            }
            let mid = (s + e) * T::half();
            let (Some(fi), Some(pi)) = (find(&line.ff, mid), find(&line.pm, mid)) else {
                continue;
            };
            let s = s.max(fi.lo).max(pi.lo);
            let e = e.min(fi.hi).min(pi.hi);
            let other = line.axis.other();
            let at = |t: T| Point::zero().with_coord(line.axis, line.coord).with_coord(other, t);
            let sf = &dual.subfaces[pi.id];
            let bedge = &mesh.boundary[sf.edge];
            let (xa, xb) = (mesh.vertices[bedge.vertices[0]], mesh.vertices[bedge.vertices[1]]);
            let m = at(mid);
            let t_mid = m.distance(&xa) / xb.distance(&xa);
            covered += e - s;
            facets.push(InterfaceFacet {
                p0: at(s),
                p1: at(e),
                length: e - s,
                ff_face: fi.id,
                subface: pi.id,
                pm_vertex: sf.vertex,
                pm_element: sf.element,
                edge: bedge.vertices,
                t_mid,
            });
        }
    }
    if facets.is_empty() {
        return Err(Error::Config("free-flow and porous coupling faces do not overlap".into()));
    }
    let pm_total: T = pm_subfaces.iter().map(|&s| dual.subfaces[s].area).sum();
    if (covered - total).abs() > tol * T::lit(10.0) || (covered - pm_total).abs() > tol * T::lit(10.0) {
        return Err(Error::Config(format!(
            "coupling faces do not match: free-flow length {total}, porous length {pm_total}, overlap {covered}"
        )));
    }
    Ok(facets)
}

fn find<T: Scalar>(ivs: &[Interval<T>], x: T) -> Option<Interval<T>> {
    let k = ivs.partition_point(|i| i.lo <= x);
    if k == 0 {
        return None;
    }
    let iv = ivs[k - 1];
    (x < iv.hi).then_some(iv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::mesh::generate::tensor_mesh;
    use crate::mesh::staggered::markers;

    /// Porous strip below y = 0 with the given x nodes, free flow above with
    /// `n` cells along x.
    fn setup(xs: &[f64], n: usize) -> (StaggeredGrid<f64>, BoxMesh<f64>, DualTopology<f64>) {
        let g = StaggeredGrid::new(Rect::new(0.0, 0.0, 1.0, 1.0), n, 1).unwrap();
        let m = tensor_mesh(xs, &[-1.0, 0.0], false, Rect::new(0.0, -1.0, 1.0, 0.0)).unwrap();
        let d = DualTopology::build(&m).unwrap();
        (g, m, d)
    }

    fn coupled(g: &StaggeredGrid<f64>, d: &DualTopology<f64>) -> (Vec<usize>, Vec<usize>) {
        let ff = g.live_faces().filter(|&f| g.faces[f].marker == Some(markers::BOTTOM)).collect();
        let pm = (0..d.subfaces.len()).filter(|&s| d.subfaces[s].marker == markers::TOP).collect();
        (ff, pm)
    }

    #[test]
    fn conforming_split() {
        let (g, m, d) = setup(&[0.0, 1.0], 1);
        let (ff, pm) = coupled(&g, &d);
        let f = intersect_interface(&g, &ff, &m, &d, &pm).unwrap();
        assert_eq!(f.len(), 2);
        for x in &f {
            assert!((x.length - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn nonmatching_breakpoints() {
        // pm sub-faces [0,0.3],[0.3,0.6],[0.6,1] come from edges [0,0.6],[0.6,1]
        // split at midpoints 0.3 and 0.8; use xs = [0, 0.6, 1] -> sub-faces
        // [0,.3],[.3,.6],[.6,.8],[.8,1]
        let (g, m, d) = setup(&[0.0, 0.6, 1.0], 2);
        let (ff, pm) = coupled(&g, &d);
        let f = intersect_interface(&g, &ff, &m, &d, &pm).unwrap();
        let mut ends: Vec<(f64, f64)> = f.iter().map(|x| (x.p0.x, x.p1.x)).collect();
        ends.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let expect = [(0.0, 0.3), (0.3, 0.5), (0.5, 0.6), (0.6, 0.8), (0.8, 1.0)];
        assert_eq!(ends.len(), expect.len());
        for (a, b) in ends.iter().zip(expect) {
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
        }
        let total: f64 = f.iter().map(|x| x.length).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_extent_rejected() {
        let g = StaggeredGrid::new(Rect::new(0.0, 0.0, 2.0, 1.0), 2, 1).unwrap();
        let m = tensor_mesh(&[0.0, 1.0], &[-1.0, 0.0], false, Rect::new(0.0, -1.0, 1.0, 0.0)).unwrap();
        let d = DualTopology::build(&m).unwrap();
        let (ff, pm) = coupled(&g, &d);
        assert!(matches!(intersect_interface(&g, &ff, &m, &d, &pm), Err(Error::Config(_))));
    }
}
