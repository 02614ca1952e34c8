//! Box-scheme residuals for stationary single-phase Darcy and Forchheimer
//! flow with full-tensor permeability.

use std::collections::BTreeMap;

use crate::coupling::CouplingContext;
use crate::error::{Error, Result};
use crate::freeflow::{upwind, FreeFlow, ScalarField};
use crate::geometry::Point;
use crate::mesh::{BoxMesh, DualTopology};
use crate::quadrature::integrate_polygon;
use crate::scalar::Scalar;
use crate::solver::{DofLayout, StateView};

pub use crate::mesh::basis::{eval_basis, BasisEval};

/// Boundary condition attached to a porous boundary marker.
#[derive(Clone)]
pub enum PmBc<T> {
    NoFlow,
    /// Prescribed pressure.
    Dirichlet(ScalarField<T>),
    /// Prescribed outward mass flux density.
    Neumann(ScalarField<T>),
    Coupling,
}

impl<T> std::fmt::Debug for PmBc<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PmBc::NoFlow => "NoFlow",
            PmBc::Dirichlet(_) => "Dirichlet",
            PmBc::Neumann(_) => "Neumann",
            PmBc::Coupling => "Coupling",
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct PmBoundarySpec<T> {
    pub by_marker: BTreeMap<u32, PmBc<T>>,
}

impl<T> PmBoundarySpec<T> {
    pub fn new() -> Self {
        Self { by_marker: BTreeMap::new() }
    }

    pub fn with(mut self, marker: u32, bc: PmBc<T>) -> Self {
        self.by_marker.insert(marker, bc);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PorousParams<T> {
    pub mu: T,
    pub rho: T,
    pub gravity: Point<T>,
    /// Stored for completeness; inert for stationary single-phase flow.
    pub porosity: T,
    /// Forchheimer coefficient; zero gives Darcy's law.
    pub c_f: T,
    pub zeta: T,
}

impl<T: Scalar> Default for PorousParams<T> {
    fn default() -> Self {
        Self {
            mu: T::one(),
            rho: T::one(),
            gravity: Point::zero(),
            porosity: T::lit(0.4),
            c_f: T::zero(),
            zeta: T::one(),
        }
    }
}

impl<T: Scalar> PorousParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > T::zero() && self.rho > T::zero()) {
            return Err(Error::Parameter("porous viscosity and density must be positive".into()));
        }
        if !(self.porosity > T::zero() && self.porosity <= T::one()) {
            return Err(Error::Parameter("porosity must lie in (0, 1]".into()));
        }
        if !(self.c_f >= T::zero()) {
            return Err(Error::Parameter("Forchheimer coefficient must be non-negative".into()));
        }
        if !(self.zeta >= T::half() && self.zeta <= T::one()) {
            return Err(Error::Parameter(format!("upwind weight {} outside [0.5, 1]", self.zeta)));
        }
        Ok(())
    }
}

/// Quadrature for `Σ_ϰ |ϰ| q_ϰ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SourceRule {
    /// Value at the sub-control-volume centroid.
    #[default]
    Centroid,
    /// Degree-5 rule on the sub-control-volume polygon.
    HighOrder,
}

/// Solves `s (1 + beta s) = d` for the speed `s >= 0`.
pub fn solve_forchheimer_speed<T: Scalar>(d: T, beta: T) -> Result<T> {
    if !(d >= T::zero()) || !(beta >= T::zero()) {
        return Err(Error::Domain(format!("Forchheimer inversion needs d >= 0 and beta >= 0, got {d}, {beta}")));
    }
    Ok(forchheimer_speed(d, beta))
}

#[inline]
fn forchheimer_speed<T: Scalar>(d: T, beta: T) -> T {
    if beta == T::zero() {
        return d;
    }
    // rationalised root avoids cancellation for small beta d
    T::two() * d / (T::one() + (T::one() + T::lit(4.0) * beta * d).sqrt())
}

/// Porous subproblem with resolved boundary data and integrated sources.
#[derive(Clone)]
pub struct Porous<T> {
    pub mesh: BoxMesh<T>,
    pub dual: DualTopology<T>,
    pub bc: PmBoundarySpec<T>,
    pub params: PorousParams<T>,
    /// Pinned pressure per vertex, if any.
    pub dirichlet: Vec<Option<T>>,
    /// `Σ_ϰ ∫_ϰ q` per vertex.
    pub source: Vec<T>,
    /// Prescribed boundary outflow per vertex.
    pub neumann: Vec<T>,
    /// Interior sub-control-volume faces touching each vertex.
    pub vertex_scvfs: Vec<Vec<usize>>,
    /// `c_F sqrt(K) rho / mu` per element (zero for Darcy).
    forchheimer_beta: Vec<T>,
}

impl<T: Scalar> Porous<T> {
    pub fn new(
        mesh: BoxMesh<T>,
        bc: PmBoundarySpec<T>,
        params: PorousParams<T>,
        source: Option<ScalarField<T>>,
        rule: SourceRule,
    ) -> Result<Self> {
        params.validate()?;
        mesh.validate()?;
        let dual = DualTopology::build(&mesh)?;
        let nv = mesh.n_vertices();

        let mut forchheimer_beta = vec![T::zero(); mesh.n_elements()];
        for (e, el) in mesh.elements.iter().enumerate() {
            if !el.permeability.is_spd() {
                return Err(Error::Parameter(format!("permeability of element {e} is not SPD")));
            }
            if params.c_f > T::zero() {
                let k = el.permeability.as_isotropic().ok_or_else(|| {
                    Error::Parameter(format!("Forchheimer flow needs scalar permeability (element {e})"))
                })?;
                forchheimer_beta[e] = params.c_f * k.sqrt() * params.rho / params.mu;
            }
        }

        let mut dirichlet = vec![None; nv];
        let mut neumann = vec![T::zero(); nv];
        for sf in &dual.subfaces {
            let b = bc
                .by_marker
                .get(&sf.marker)
                .ok_or_else(|| Error::Config(format!("porous boundary marker {} has no condition", sf.marker)))?;
            match b {
                PmBc::Dirichlet(p) => dirichlet[sf.vertex] = Some(p(mesh.vertices[sf.vertex])),
                PmBc::Neumann(q) => {
                    // two-point Gauss on the sub-face
                    let g = 0.5 / 3f64.sqrt();
                    let a = sf.p0 + (sf.p1 - sf.p0) * T::lit(0.5 - g);
                    let b2 = sf.p0 + (sf.p1 - sf.p0) * T::lit(0.5 + g);
                    neumann[sf.vertex] += sf.area * T::half() * (q(a) + q(b2));
                }
                PmBc::NoFlow | PmBc::Coupling => {}
            }
        }

        let mut src = vec![T::zero(); nv];
        if let Some(q) = &source {
            for scv in &dual.scvs {
                src[scv.vertex] += match rule {
                    SourceRule::Centroid => q(scv.centroid) * scv.volume,
                    SourceRule::HighOrder => integrate_polygon(&scv.corners, |p| q(p)),
                };
            }
        }

        let mut vertex_scvfs = vec![Vec::new(); nv];
        for (k, f) in dual.scvfs.iter().enumerate() {
            vertex_scvfs[f.vertices[0]].push(k);
            vertex_scvfs[f.vertices[1]].push(k);
        }

        Ok(Self { mesh, dual, bc, params, dirichlet, source: src, neumann, vertex_scvfs, forchheimer_beta })
    }

    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        self.dirichlet.iter().map(|d| d.is_some()).collect()
    }

    pub fn has_pressure_boundary(&self) -> bool {
        self.dirichlet.iter().any(|d| d.is_some())
    }

    /// Pressure gradient at the integration point of scvf `k`.
    pub fn pressure_gradient<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, k: usize, x: &V) -> Point<T> {
        let f = &self.dual.scvfs[k];
        let el = &self.mesh.elements[f.element];
        let mut g = Point::zero();
        for (l, &v) in el.vertices.iter().enumerate() {
            g = g + f.basis.gradients[l] * x.get(lay.vertex_dof[v]);
        }
        g
    }

    /// Darcy (or Forchheimer) velocity at the integration point of scvf `k`.
    pub fn darcy_velocity<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, k: usize, x: &V) -> Point<T> {
        let f = &self.dual.scvfs[k];
        let kt = self.mesh.elements[f.element].permeability;
        let drive = self.pressure_gradient(lay, k, x) - self.params.gravity * self.params.rho;
        let w = kt.apply(drive) / self.params.mu;
        let beta = self.forchheimer_beta[f.element];
        if beta > T::zero() {
            let s = forchheimer_speed(w.norm(), beta);
            -w / (T::one() + beta * s)
        } else {
            -w
        }
    }

    /// Mass flux across scvf `k` from `vertices[0]` to `vertices[1]`.
    pub fn scvf_flux<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, k: usize, x: &V) -> T {
        let f = &self.dual.scvfs[k];
        let vn = self.darcy_velocity(lay, k, x).dot(&f.normal);
        // single phase: both sides carry the same density
        let rho = upwind(self.params.zeta, vn, self.params.rho, self.params.rho);
        f.area * rho * vn
    }

    /// Outflow of control volume `v` through interior sub-control-volume
    /// faces.
    pub fn interior_outflow<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, v: usize, x: &V) -> T {
        let mut r = T::zero();
        for &k in &self.vertex_scvfs[v] {
            let fl = self.scvf_flux(lay, k, x);
            if self.dual.scvfs[k].vertices[0] == v {
                r += fl;
            } else {
                r -= fl;
            }
        }
        r
    }

    /// Mass balance of control volume `v`: outflow minus source.
    pub fn balance<V: StateView<T> + ?Sized>(
        &self,
        ff: Option<&FreeFlow<T>>,
        cpl: Option<&CouplingContext<T>>,
        lay: &DofLayout,
        v: usize,
        x: &V,
    ) -> T {
        let mut r = self.interior_outflow(lay, v, x) + self.neumann[v] - self.source[v];
        if let (Some(ff), Some(c)) = (ff, cpl) {
            r += c.pm_interface_outflow(ff, lay, v, x);
        }
        r
    }

    /// Residual of the equation attached to vertex `v`.
    pub fn residual<V: StateView<T> + ?Sized>(
        &self,
        ff: Option<&FreeFlow<T>>,
        cpl: Option<&CouplingContext<T>>,
        lay: &DofLayout,
        v: usize,
        x: &V,
    ) -> T {
        match self.dirichlet[v] {
            Some(p) => x.get(lay.vertex_dof[v]) - p,
            None => self.balance(ff, cpl, lay, v, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rect, Tensor};
    use crate::mesh::generate::tensor_mesh;
    use crate::mesh::markers;
    use std::sync::Arc;

    fn mesh(tri: bool) -> BoxMesh<f64> {
        let xs = [0.0, 0.3, 0.5, 1.0];
        let ys = [0.0, 0.4, 1.0];
        tensor_mesh(&xs, &ys, tri, Rect::new(0.0, 0.0, 1.0, 1.0)).unwrap()
    }

    fn all(bc: PmBc<f64>) -> PmBoundarySpec<f64> {
        let mut s = PmBoundarySpec::new();
        for m in [markers::LEFT, markers::RIGHT, markers::BOTTOM, markers::TOP] {
            s = s.with(m, bc.clone());
        }
        s
    }

    fn layout(pm: &Porous<f64>) -> DofLayout {
        DofLayout::new(&[], &[], &pm.dirichlet_vertices())
    }

    #[test]
    fn forchheimer_examples() {
        assert_eq!(solve_forchheimer_speed(3.5, 0.0).unwrap(), 3.5);
        assert!((solve_forchheimer_speed(2.0f64, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(solve_forchheimer_speed(0.0, 10.0).unwrap(), 0.0);
        assert!(solve_forchheimer_speed(-1.0, 1.0).is_err());
        assert!(solve_forchheimer_speed(1.0, -1.0).is_err());
    }

    #[test]
    fn constant_pressure_no_flow() {
        for tri in [false, true] {
            let pm = Porous::new(mesh(tri), all(PmBc::NoFlow), PorousParams::default(), None, SourceRule::Centroid).unwrap();
            let lay = layout(&pm);
            let x = vec![2.5; lay.len()];
            for v in 0..pm.mesh.n_vertices() {
                assert!(pm.residual(None, None, &lay, v, x.as_slice()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn linear_pressure_is_exact() {
        let k = Tensor::symmetric(2.0, 0.3, 0.7);
        for tri in [false, true] {
            let mut m = mesh(tri);
            m.set_permeability(|_| k).unwrap();
            let p = |q: Point<f64>| 1.0 + q.x - 2.0 * q.y;
            let pf: ScalarField<f64> = Arc::new(p);
            let pm = Porous::new(m, all(PmBc::Dirichlet(pf)), PorousParams::default(), None, SourceRule::Centroid).unwrap();
            let lay = layout(&pm);
            let x: Vec<f64> = pm.mesh.vertices.iter().map(|&v| p(v)).collect();
            for k2 in 0..pm.dual.scvfs.len() {
                let v = pm.darcy_velocity(&lay, k2, x.as_slice());
                let e = -(k.apply(Point::new(1.0, -2.0)));
                assert!((v - e).norm() < 1e-12);
            }
            for v in 0..pm.mesh.n_vertices() {
                assert!(pm.residual(None, None, &lay, v, x.as_slice()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fluxes_are_antisymmetric() {
        let pm = Porous::new(mesh(true), all(PmBc::NoFlow), PorousParams::default(), None, SourceRule::Centroid).unwrap();
        let lay = layout(&pm);
        let x: Vec<f64> = (0..lay.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let total: f64 = (0..pm.mesh.n_vertices()).map(|v| pm.interior_outflow(&lay, v, x.as_slice())).sum();
        assert!(total.abs() < 1e-14);
    }

    #[test]
    fn upwind_weight_inert_for_constant_density() {
        let mk = |zeta| {
            let params = PorousParams { zeta, ..PorousParams::default() };
            Porous::new(mesh(false), all(PmBc::NoFlow), params, None, SourceRule::Centroid).unwrap()
        };
        let (a, b) = (mk(1.0), mk(0.5));
        let lay = layout(&a);
        let x: Vec<f64> = (0..lay.len()).map(|i| i as f64).collect();
        for k in 0..a.dual.scvfs.len() {
            assert_eq!(a.scvf_flux(&lay, k, x.as_slice()), b.scvf_flux(&lay, k, x.as_slice()));
        }
    }

    #[test]
    fn forchheimer_requires_scalar_permeability() {
        let mut m = mesh(false);
        m.set_permeability(|_| Tensor::symmetric(1.0, 0.1, 1.0)).unwrap();
        let params = PorousParams { c_f: 0.55, ..PorousParams::default() };
        assert!(Porous::new(m, all(PmBc::NoFlow), params, None, SourceRule::Centroid).is_err());
    }

    #[test]
    fn unmarked_boundary_is_config_error() {
        let bc = PmBoundarySpec::new().with(markers::LEFT, PmBc::NoFlow);
        let err = Porous::new(mesh(false), bc, PorousParams::default(), None, SourceRule::Centroid).err().unwrap();
        assert!(matches!(err, Error::Config(_)));
    }
}
