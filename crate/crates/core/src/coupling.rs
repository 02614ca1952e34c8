//! Interface conditions between the free flow and the porous medium:
//! trace projections, mass-flux exchange, normal-stress transfer and the
//! Beavers-Joseph-Saffman slip coefficient.

use crate::error::{Error, Result};
use crate::freeflow::{upwind, FaceKind, FreeFlow};
use crate::geometry::Point;
use crate::mesh::{intersect_interface, InterfaceFacet};
use crate::porous::{PmBc, Porous};
use crate::scalar::Scalar;
use crate::solver::{DofLayout, StateView};

/// How porous vertex values are projected onto a free-flow face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProjectionKind {
    /// Mean of the piecewise linear trace over the face.
    L2,
    /// `|γ|`-weighted mean of the values at the vertices owning each facet.
    AreaWeightedVertex,
}

impl std::str::FromStr for ProjectionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" | "L2" => Ok(ProjectionKind::L2),
            "vertex" | "area_weighted_vertex" | "weighted_dof" => Ok(ProjectionKind::AreaWeightedVertex),
            _ => Err(Error::Config(format!("unknown projection '{s}'"))),
        }
    }
}

impl std::fmt::Display for ProjectionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProjectionKind::L2 => "l2",
            ProjectionKind::AreaWeightedVertex => "area_weighted_vertex",
        })
    }
}

/// Which velocity gradient enters the slip closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlipForm {
    /// Normal derivative of the tangential velocity only.
    Tangential,
    /// Full symmetric gradient `(∇v + ∇vᵀ) n · t`.
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams<T> {
    pub alpha_bjs: T,
    pub projection: ProjectionKind,
    pub zeta: T,
    pub slip: SlipForm,
}

impl<T: Scalar> Default for CouplingParams<T> {
    fn default() -> Self {
        Self { alpha_bjs: T::one(), projection: ProjectionKind::L2, zeta: T::one(), slip: SlipForm::Tangential }
    }
}

/// Sparse projection row: `(vertex, weight)` pairs.
pub type WeightRow<T> = Vec<(usize, T)>;

/// Projection weights of every coupling face for the given kind.
pub fn projection_weights<T: Scalar>(
    facets: &[InterfaceFacet<T>],
    face_facets: &[Vec<usize>],
    face_area: impl Fn(usize) -> T,
    kind: ProjectionKind,
) -> Vec<WeightRow<T>> {
    face_facets
        .iter()
        .enumerate()
        .map(|(f, list)| {
            let mut row: WeightRow<T> = Vec::new();
            if list.is_empty() {
                return row;
            }
            let area = face_area(f);
            let mut add = |v: usize, w: T| match row.iter_mut().find(|(u, _)| *u == v) {
                Some(e) => e.1 += w,
                None => row.push((v, w)),
            };
            for &k in list {
                let fc = &facets[k];
                let w = fc.length / area;
                match kind {
                    ProjectionKind::AreaWeightedVertex => add(fc.pm_vertex, w),
                    ProjectionKind::L2 => {
                        add(fc.edge[0], w * (T::one() - fc.t_mid));
                        add(fc.edge[1], w * fc.t_mid);
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect()
}

/// Applies a projection row to vertex values.
pub fn project<T: Scalar>(row: &WeightRow<T>, values: impl Fn(usize) -> T) -> Result<T> {
    if row.is_empty() {
        return Err(Error::Coupling("face has no interface facets".into()));
    }
    Ok(row.iter().map(|&(v, w)| w * values(v)).sum())
}

/// Interface data shared by both subproblems.
#[derive(Clone, Debug)]
pub struct CouplingContext<T> {
    pub params: CouplingParams<T>,
    pub facets: Vec<InterfaceFacet<T>>,
    /// Facets per free-flow face (empty for non-coupling faces).
    pub face_facets: Vec<Vec<usize>>,
    /// Facets per porous vertex.
    pub vertex_facets: Vec<Vec<usize>>,
    pub weights: Vec<WeightRow<T>>,
    /// Slip coefficient `α / sqrt(t·K t)` per coupling face.
    beta: Vec<T>,
    /// Unit tangent per coupling face.
    pub tangent: Vec<Point<T>>,
    rho_pm: T,
}

impl<T: Scalar> CouplingContext<T> {
    pub fn build(ff: &FreeFlow<T>, pm: &Porous<T>, params: CouplingParams<T>) -> Result<Self> {
        if !(params.alpha_bjs >= T::zero()) {
            return Err(Error::Parameter("slip coefficient must be non-negative".into()));
        }
        let ff_faces = ff.coupling_faces();
        let pm_subfaces: Vec<usize> = (0..pm.dual.subfaces.len())
            .filter(|&s| matches!(pm.bc.by_marker.get(&pm.dual.subfaces[s].marker), Some(PmBc::Coupling)))
            .collect();
        let facets = intersect_interface(&ff.grid, &ff_faces, &pm.mesh, &pm.dual, &pm_subfaces)?;
        let mut face_facets = vec![Vec::new(); ff.grid.n_faces()];
        let mut vertex_facets = vec![Vec::new(); pm.mesh.n_vertices()];
        for (k, fc) in facets.iter().enumerate() {
            face_facets[fc.ff_face].push(k);
            vertex_facets[fc.pm_vertex].push(k);
        }
        for &f in &ff_faces {
            if face_facets[f].is_empty() {
                return Err(Error::Coupling(format!("coupling face {f} has no facets")));
            }
        }
        let weights = projection_weights(&facets, &face_facets, |f| ff.grid.faces[f].area, params.projection);

        let mut beta = vec![T::zero(); ff.grid.n_faces()];
        let mut tangent = vec![Point::zero(); ff.grid.n_faces()];
        for &f in &ff_faces {
            let face = &ff.grid.faces[f];
            let t = Point::unit(face.axis.other());
            // permeability of the element holding the facet nearest the face centre
            let k = face_facets[f]
                .iter()
                .min_by(|&&a, &&b| {
                    let da = facets[a].midpoint().distance(&face.center);
                    let db = facets[b].midpoint().distance(&face.center);
                    da.partial_cmp(&db).expect("finite")
                })
                .map(|&k| pm.mesh.elements[facets[k].pm_element].permeability)
                .expect("non-empty");
            let tkt = k.quadratic(t);
            if !(tkt > T::zero()) {
                return Err(Error::Parameter(format!("t·K t = {tkt} is not positive at coupling face {f}")));
            }
            beta[f] = params.alpha_bjs / tkt.sqrt();
            tangent[f] = t;
        }
        Ok(Self { params, facets, face_facets, vertex_facets, weights, beta, tangent, rho_pm: pm.params.rho })
    }

    #[inline]
    pub fn beta(&self, f: usize) -> T {
        self.beta[f]
    }

    pub fn symmetric_slip(&self) -> bool {
        self.params.slip == SlipForm::Symmetric
    }

    /// Projected porous pressure on coupling face `f`: the normal traction
    /// imposed on the free-flow momentum balance.
    pub fn traction<V: StateView<T> + ?Sized>(&self, f: usize, lay: &DofLayout, x: &V) -> T {
        self.weights[f].iter().map(|&(v, w)| w * x.get(lay.vertex_dof[v])).sum()
    }

    /// Mass flux over facet `k`, returned as (free-flow side, porous side);
    /// each is the outward flux of its own subdomain.
    pub fn facet_mass_flux<V: StateView<T> + ?Sized>(&self, ff: &FreeFlow<T>, lay: &DofLayout, k: usize, x: &V) -> (T, T) {
        let fc = &self.facets[k];
        let face = &ff.grid.faces[fc.ff_face];
        let vn = face.outward_sign() * ff.face_value(lay, fc.ff_face, x);
        let rho = upwind(self.params.zeta, vn, ff.params.rho, self.rho_pm);
        let out = fc.length * rho * vn;
        (out, -out)
    }

    /// Porous-side interface outflow collected at vertex `v`.
    pub fn pm_interface_outflow<V: StateView<T> + ?Sized>(&self, ff: &FreeFlow<T>, lay: &DofLayout, v: usize, x: &V) -> T {
        self.vertex_facets[v].iter().map(|&k| self.facet_mass_flux(ff, lay, k, x).1).sum()
    }

    /// Checks that coupling faces are exactly the faces with facets.
    pub fn validate(&self, ff: &FreeFlow<T>) -> Result<()> {
        for (f, list) in self.face_facets.iter().enumerate() {
            let is_c = ff.kind[f] == FaceKind::Coupling;
            if is_c == list.is_empty() {
                return Err(Error::Coupling(format!("face {f} coupling flag and facet list disagree")));
            }
            if is_c {
                let s: T = list.iter().map(|&k| self.facets[k].length).sum();
                let a = ff.grid.faces[f].area;
                if (s - a).abs() > T::lit(1e-12) * a {
                    return Err(Error::Coupling(format!("facets of face {f} do not tile it")));
                }
            }
        }
        Ok(())
    }
}
