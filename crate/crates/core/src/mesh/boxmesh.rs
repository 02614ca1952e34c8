//! Unstructured primary mesh of triangles and quadrilaterals.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{signed_area, vertex_average, Point, Tensor};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct Element<T> {
    /// Corner indices, counter-clockwise. Three or four entries.
    pub vertices: Vec<usize>,
    /// Element-wise constant permeability.
    pub permeability: Tensor<T>,
}

#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    /// Edge end points in the counter-clockwise order of the owning element.
    pub vertices: [usize; 2],
    pub marker: u32,
    pub element: usize,
    /// Local edge index `k` (corners `k` and `k+1`) in the owning element.
    pub local: usize,
}

#[derive(Clone, Debug)]
pub struct BoxMesh<T> {
    pub vertices: Vec<Point<T>>,
    pub elements: Vec<Element<T>>,
    pub boundary: Vec<BoundaryEdge>,
}

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    (a.min(b), a.max(b))
}

impl<T: Scalar> BoxMesh<T> {
    /// Builds a mesh from corner lists; boundary edges are detected as edges
    /// owned by a single element and labelled with `marker(midpoint)`.
    pub fn from_elements<F: Fn(Point<T>) -> u32>(
        vertices: Vec<Point<T>>,
        elements: Vec<Vec<usize>>,
        marker: F,
    ) -> Result<Self> {
        let elements: Vec<Element<T>> = elements
            .into_iter()
            .map(|v| Element { vertices: v, permeability: Tensor::isotropic(T::one()) })
            .collect();
        let owners = edge_owners(&vertices, &elements)?;
        let mut boundary = Vec::new();
        for (e, el) in elements.iter().enumerate() {
            let n = el.vertices.len();
            for k in 0..n {
                let (a, b) = (el.vertices[k], el.vertices[(k + 1) % n]);
                if owners[&key(a, b)].len() == 1 {
                    let mid = vertices[a].midpoint(&vertices[b]);
                    boundary.push(BoundaryEdge { vertices: [a, b], marker: marker(mid), element: e, local: k });
                }
            }
        }
        let mesh = Self { vertices, elements, boundary };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Builds a mesh with explicitly listed boundary edges `(a, b, marker)`.
    pub fn with_boundary(
        vertices: Vec<Point<T>>,
        elements: Vec<Vec<usize>>,
        edges: &[(usize, usize, u32)],
    ) -> Result<Self> {
        let elements: Vec<Element<T>> = elements
            .into_iter()
            .map(|v| Element { vertices: v, permeability: Tensor::isotropic(T::one()) })
            .collect();
        let owners = edge_owners(&vertices, &elements)?;
        let mut boundary = Vec::with_capacity(edges.len());
        for &(a, b, m) in edges {
            let own = owners
                .get(&key(a, b))
                .ok_or_else(|| Error::Mesh(format!("boundary edge ({a},{b}) is not an element edge")))?;
            if own.len() != 1 {
                return Err(Error::Mesh(format!(
                    "boundary edge ({a},{b}) belongs to {} elements",
                    own.len()
                )));
            }
            let e = own[0];
            let vs = &elements[e].vertices;
            let n = vs.len();
            let local = (0..n)
                .find(|&k| key(vs[k], vs[(k + 1) % n]) == key(a, b))
                .expect("edge in element");
            boundary.push(BoundaryEdge { vertices: [vs[local], vs[(local + 1) % n]], marker: m, element: e, local });
        }
        let mesh = Self { vertices, elements, boundary };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn corners(&self, e: usize) -> Vec<Point<T>> {
        self.elements[e].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    /// Element centre: mean of the corners.
    pub fn center(&self, e: usize) -> Point<T> {
        vertex_average(&self.corners(e))
    }

    pub fn area(&self, e: usize) -> T {
        signed_area(&self.corners(e))
    }

    pub fn total_area(&self) -> T {
        (0..self.n_elements()).map(|e| self.area(e)).sum()
    }

    /// Assigns `K_E = k(x_E)` to every element; rejects tensors that are not
    /// symmetric positive definite.
    pub fn set_permeability<F: Fn(Point<T>) -> Tensor<T>>(&mut self, k: F) -> Result<()> {
        for e in 0..self.n_elements() {
            let kt = k(self.center(e));
            if !kt.is_spd() {
                return Err(Error::Parameter(format!("permeability of element {e} is not SPD: {kt:?}")));
            }
            self.elements[e].permeability = kt;
        }
        Ok(())
    }

    /// Renumbers vertices: new index of old vertex `v` is `perm[v]`.
    pub fn renumber_vertices(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_vertices();
        if perm.len() != n {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput("not a permutation".into()));
            }
        }
        let mut vertices = vec![Point::zero(); n];
        for (old, &new) in perm.iter().enumerate() {
            vertices[new] = self.vertices[old];
        }
        let elements = self
            .elements
            .iter()
            .map(|el| Element {
                vertices: el.vertices.iter().map(|&v| perm[v]).collect(),
                permeability: el.permeability,
            })
            .collect();
        let boundary = self
            .boundary
            .iter()
            .map(|b| BoundaryEdge { vertices: [perm[b.vertices[0]], perm[b.vertices[1]]], ..b.clone() })
            .collect();
        Ok(Self { vertices, elements, boundary })
    }

    /// Checks positivity of element areas, boundary-edge ownership and that
    /// every vertex is an element corner.
    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.n_vertices()];
        for (e, el) in self.elements.iter().enumerate() {
            if !(el.vertices.len() == 3 || el.vertices.len() == 4) {
                return Err(Error::Mesh(format!("element {e} has {} corners", el.vertices.len())));
            }
            for &v in &el.vertices {
                if v >= self.n_vertices() {
                    return Err(Error::Mesh(format!("element {e} references missing vertex {v}")));
                }
                used[v] = true;
            }
            let a = self.area(e);
            if a.is_nan() || a <= T::zero() {
                return Err(Error::Mesh(format!("element {e} is degenerate or clockwise (area {a})")));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!("vertex {v} is not a corner of any element")));
        }
        let owners = edge_owners(&self.vertices, &self.elements)?;
        for (k, b) in self.boundary.iter().enumerate() {
            match owners.get(&key(b.vertices[0], b.vertices[1])) {
                Some(o) if o.len() == 1 && o[0] == b.element => {}
                _ => return Err(Error::Mesh(format!("boundary edge {k} does not belong to exactly one element"))),
            }
        }
        let n_open = owners.values().filter(|o| o.len() == 1).count();
        if n_open != self.boundary.len() {
            return Err(Error::Mesh(format!(
                "{n_open} open edges but {} boundary edges listed",
                self.boundary.len()
            )));
        }
        Ok(())
    }
}

fn edge_owners<T: Scalar>(vertices: &[Point<T>], elements: &[Element<T>]) -> Result<HashMap<EdgeKey, Vec<usize>>> {
    let mut owners: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (e, el) in elements.iter().enumerate() {
        let n = el.vertices.len();
        for k in 0..n {
            let (a, b) = (el.vertices[k], el.vertices[(k + 1) % n]);
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::Mesh(format!("element {e} references a missing vertex")));
            }
            owners.entry(key(a, b)).or_default().push(e);
        }
    }
    if let Some((k, o)) = owners.iter().find(|(_, o)| o.len() > 2) {
        return Err(Error::Mesh(format!("edge {k:?} shared by {} elements", o.len())));
    }
    Ok(owners)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> BoxMesh<f64> {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        BoxMesh::from_elements(v, vec![vec![0, 1, 2, 3]], |_| 1).unwrap()
    }

    #[test]
    fn single_quad() {
        let m = square();
        assert_eq!(m.boundary.len(), 4);
        assert!((m.area(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_rejected() {
        let v = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        let err = BoxMesh::from_elements(v, vec![vec![0, 1, 2]], |_| 1).unwrap_err();
        assert!(matches!(err, Error::Mesh(ref s) if s.contains("element 0")));
    }

    #[test]
    fn orphan_vertex_rejected() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(5.0, 5.0),
        ];
        assert!(BoxMesh::from_elements(v, vec![vec![0, 1, 2]], |_| 1).is_err());
    }

    #[test]
    fn non_spd_permeability_rejected() {
        let mut m = square();
        assert!(m.set_permeability(|_| Tensor::symmetric(1.0, 2.0, 1.0)).is_err());
        m.set_permeability(|_| Tensor::symmetric(2.0, 0.5, 1.0)).unwrap();
    }

    #[test]
    fn explicit_boundary_must_be_open() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let tris = vec![vec![0, 1, 2], vec![0, 2, 3]];
        let edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)];
        BoxMesh::with_boundary(v.clone(), tris.clone(), &edges).unwrap();
        let bad = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (0, 2, 1)];
        assert!(BoxMesh::with_boundary(v, tris, &bad).is_err());
    }
}
