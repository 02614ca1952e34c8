//! Staggered-grid residuals for stationary incompressible (Navier-)Stokes
//! flow.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coupling::CouplingContext;
use crate::error::{Error, Result};
use crate::geometry::{Axis, Point, Rect};
use crate::mesh::StaggeredGrid;
use crate::quadrature::integrate_rect;
use crate::scalar::Scalar;
use crate::solver::{DofLayout, StateView};

pub type ScalarField<T> = Arc<dyn Fn(Point<T>) -> T + Send + Sync>;
pub type VectorField<T> = Arc<dyn Fn(Point<T>) -> Point<T> + Send + Sync>;

/// Boundary condition attached to a free-flow boundary marker.
#[derive(Clone)]
pub enum FfBc<T> {
    /// Prescribed velocity vector.
    DirichletVelocity(VectorField<T>),
    /// Prescribed normal traction (pressure) with a free normal velocity.
    Outflow(ScalarField<T>),
    Symmetry,
    NoSlip,
    /// Interface to the porous medium.
    Coupling,
}

impl<T> std::fmt::Debug for FfBc<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FfBc::DirichletVelocity(_) => "DirichletVelocity",
            FfBc::Outflow(_) => "Outflow",
            FfBc::Symmetry => "Symmetry",
            FfBc::NoSlip => "NoSlip",
            FfBc::Coupling => "Coupling",
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct FfBoundarySpec<T> {
    pub by_marker: BTreeMap<u32, FfBc<T>>,
}

impl<T> FfBoundarySpec<T> {
    pub fn new() -> Self {
        Self { by_marker: BTreeMap::new() }
    }

    pub fn with(mut self, marker: u32, bc: FfBc<T>) -> Self {
        self.by_marker.insert(marker, bc);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeFlowParams<T> {
    pub rho: T,
    pub mu: T,
    pub gravity: Point<T>,
    pub inertia: bool,
    pub zeta: T,
}

impl<T: Scalar> Default for FreeFlowParams<T> {
    fn default() -> Self {
        Self { rho: T::one(), mu: T::one(), gravity: Point::zero(), inertia: true, zeta: T::one() }
    }
}

impl<T: Scalar> FreeFlowParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > T::zero()) || !(self.mu > T::zero()) {
            return Err(Error::Parameter("free-flow density and viscosity must be positive".into()));
        }
        if !(self.zeta >= T::half() && self.zeta <= T::one()) {
            return Err(Error::Parameter(format!("upwind weight {} outside [0.5, 1]", self.zeta)));
        }
        Ok(())
    }
}

/// Classification of a face once boundary conditions are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Dead,
    Interior,
    Dirichlet,
    NoSlip,
    Symmetry,
    Outflow,
    Coupling,
}

impl FaceKind {
    /// Whether the normal velocity on the face is an unknown.
    pub fn is_unknown(self) -> bool {
        matches!(self, FaceKind::Interior | FaceKind::Outflow | FaceKind::Coupling)
    }
}

/// Optional source terms: mass source `q` and momentum source `f`.
#[derive(Clone, Default)]
pub struct FfSources<T> {
    pub mass: Option<ScalarField<T>>,
    pub momentum: Option<VectorField<T>>,
}

/// Free-flow subproblem with resolved boundary data and integrated sources.
#[derive(Clone)]
pub struct FreeFlow<T> {
    pub grid: StaggeredGrid<T>,
    pub bc: FfBoundarySpec<T>,
    pub params: FreeFlowParams<T>,
    pub kind: Vec<FaceKind>,
    /// Boundary condition per face (`None` for interior and dead faces).
    face_bc: Vec<Option<FfBc<T>>>,
    /// Normal velocity of pinned faces.
    pinned: Vec<T>,
    /// Outflow traction per face.
    traction: Vec<T>,
    /// `∫_E q` per cell.
    pub mass_source: Vec<T>,
    /// `∫_{K*} (f + rho g)_a` per face.
    pub momentum_source: Vec<T>,
}

#[inline]
pub(crate) fn upwind<T: Scalar>(zeta: T, flux: T, inside: T, outside: T) -> T {
    if flux >= T::zero() {
        zeta * inside + (T::one() - zeta) * outside
    } else {
        zeta * outside + (T::one() - zeta) * inside
    }
}

impl<T: Scalar> FreeFlow<T> {
    pub fn new(grid: StaggeredGrid<T>, bc: FfBoundarySpec<T>, params: FreeFlowParams<T>, sources: FfSources<T>) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        let nf = grid.n_faces();
        let mut kind = vec![FaceKind::Dead; nf];
        let mut face_bc = vec![None; nf];
        let mut pinned = vec![T::zero(); nf];
        let mut traction = vec![T::zero(); nf];
        for (k, face) in grid.faces.iter().enumerate() {
            if !face.is_live() {
                continue;
            }
            if !face.is_boundary() {
                kind[k] = FaceKind::Interior;
                continue;
            }
            let m = face.marker.expect("validated boundary marker");
            let b = bc
                .by_marker
                .get(&m)
                .ok_or_else(|| Error::Config(format!("free-flow boundary marker {m} has no condition")))?;
            kind[k] = match b {
                FfBc::DirichletVelocity(v) => {
                    pinned[k] = v(face.center).coord(face.axis);
                    FaceKind::Dirichlet
                }
                FfBc::Outflow(p) => {
                    traction[k] = p(face.center);
                    FaceKind::Outflow
                }
                FfBc::Symmetry => FaceKind::Symmetry,
                FfBc::NoSlip => FaceKind::NoSlip,
                FfBc::Coupling => FaceKind::Coupling,
            };
            face_bc[k] = Some(b.clone());
        }

        let mut mass_source = vec![T::zero(); grid.n_cells()];
        if let Some(q) = &sources.mass {
            for c in grid.active_cells() {
                let x = grid.cells[c].center;
                let (hx, hy) = (grid.dx * T::half(), grid.dy * T::half());
                mass_source[c] = integrate_rect(&Rect::new(x.x - hx, x.y - hy, x.x + hx, x.y + hy), |p| q(p));
            }
        }
        let mut momentum_source = vec![T::zero(); nf];
        for (k, face) in grid.faces.iter().enumerate() {
            if !kind[k].is_unknown() {
                continue;
            }
            let r = dual_rect(&grid, k);
            let ga = params.gravity.coord(face.axis) * params.rho * r.area();
            let fa = match &sources.momentum {
                Some(f) => integrate_rect(&r, |p| f(p).coord(face.axis)),
                None => T::zero(),
            };
            momentum_source[k] = fa + ga;
        }
        Ok(Self { grid, bc, params, kind, face_bc, pinned, traction, mass_source, momentum_source })
    }

    /// Faces whose normal velocity is an unknown.
    pub fn velocity_faces(&self) -> Vec<bool> {
        self.kind.iter().map(|k| k.is_unknown()).collect()
    }

    pub fn active_cells(&self) -> Vec<bool> {
        self.grid.cells.iter().map(|c| c.active).collect()
    }

    pub fn coupling_faces(&self) -> Vec<usize> {
        (0..self.kind.len()).filter(|&k| self.kind[k] == FaceKind::Coupling).collect()
    }

    pub fn has_pressure_outlet(&self) -> bool {
        self.kind.contains(&FaceKind::Outflow)
    }

    /// Normal velocity on face `f` (unknown or prescribed).
    #[inline]
    pub fn face_value<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, f: usize, x: &V) -> T {
        match lay.face_dof[f] {
            Some(d) => x.get(d),
            None => self.pinned[f],
        }
    }

    #[inline]
    pub fn cell_pressure<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, c: usize, x: &V) -> T {
        x.get(lay.cell_dof[c].expect("active cell"))
    }

    /// Outward volumetric flux `Σ |ε| v·n - ∫q` times density.
    pub fn mass_residual<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, c: usize, x: &V) -> T {
        let g = &self.grid;
        let [xm, xp, ym, yp] = g.cell_faces(c);
        let fx = (self.face_value(lay, xp, x) - self.face_value(lay, xm, x)) * g.dy;
        let fy = (self.face_value(lay, yp, x) - self.face_value(lay, ym, x)) * g.dx;
        self.params.rho * (fx + fy - self.mass_source[c])
    }

    /// Outward mass flux through a boundary face, seen from its cell.
    pub fn boundary_outflow<V: StateView<T> + ?Sized>(&self, lay: &DofLayout, f: usize, x: &V) -> T {
        let face = &self.grid.faces[f];
        self.params.rho * face.outward_sign() * self.face_value(lay, f, x) * face.area
    }

    /// Corner point between face `f` and its lateral side `s`.
    fn corner(&self, f: usize, s: T) -> Point<T> {
        let face = &self.grid.faces[f];
        let b = face.axis.other();
        let hb = self.grid.spacing(b);
        face.center.with_coord(b, face.center.coord(b) + s * hb * T::half())
    }

    /// Tangential velocity at the corner of a one-sided boundary face `f`,
    /// given the adjacent lateral face `g` inside the domain.
    fn corner_value<V: StateView<T> + ?Sized>(
        &self,
        cpl: Option<&CouplingContext<T>>,
        lay: &DofLayout,
        f: usize,
        g: usize,
        s: T,
        x: &V,
    ) -> T {
        let b = self.grid.faces[f].axis.other();
        match &self.face_bc[g] {
            Some(FfBc::DirichletVelocity(v)) => return v(self.corner(f, s)).coord(b),
            Some(FfBc::NoSlip) => return T::zero(),
            _ => {}
        }
        let vg = self.face_value(lay, g, x);
        match self.kind[f] {
            FaceKind::Coupling => {
                let beta = cpl.map(|c| c.beta(f)).unwrap_or(T::zero());
                let d = self.grid.spacing(self.grid.faces[f].axis) * T::half();
                vg / (T::one() + beta * d)
            }
            _ => vg,
        }
    }

    /// Momentum balance over the dual cell of face `f`.
    pub fn momentum_residual<V: StateView<T> + ?Sized>(
        &self,
        cpl: Option<&CouplingContext<T>>,
        lay: &DofLayout,
        f: usize,
        x: &V,
    ) -> T {
        let g = &self.grid;
        let face = &g.faces[f];
        let a = face.axis;
        let b = a.other();
        let (ha, hb) = (g.spacing(a), g.spacing(b));
        let FreeFlowParams { rho, mu, zeta, inertia, .. } = self.params;
        let two = T::two();
        let half = T::half();
        let vf = self.face_value(lay, f, x);
        let mut r = T::zero();

        // fluxes through the faces normal to a (cell centres)
        for side in 0..2 {
            let sgn = if side == 1 { T::one() } else { -T::one() };
            let t = match face.cells[side] {
                Some(c) => {
                    let vlo = self.face_value(lay, g.cell_face(c, a, 0), x);
                    let vhi = self.face_value(lay, g.cell_face(c, a, 1), x);
                    let mut t = -two * mu * (vhi - vlo) / ha + self.cell_pressure(lay, c, x);
                    if inertia {
                        let vbar = (vlo + vhi) * half;
                        t += rho * vbar * upwind(zeta, vbar, vlo, vhi);
                    }
                    t
                }
                None => match self.kind[f] {
                    FaceKind::Coupling => cpl.map(|c| c.traction(f, lay, x)).unwrap_or(T::zero()),
                    FaceKind::Outflow => {
                        let mut t = self.traction[f];
                        if inertia {
                            t += rho * vf * vf;
                        }
                        t
                    }
                    _ => T::zero(),
                },
            };
            r += sgn * t * hb;
        }

        // fluxes through the lateral faces (normal to b)
        for s in [-T::one(), T::one()] {
            let sidx = usize::from(s > T::zero());
            let gl = face.cells[0].map(|c| g.cell_face(c, b, sidx));
            let gh = face.cells[1].map(|c| g.cell_face(c, b, sidx));
            let (dvb_da, vt) = match (gl, gh) {
                (Some(l), Some(h)) => {
                    let (vl, vh) = (self.face_value(lay, l, x), self.face_value(lay, h, x));
                    ((vh - vl) / ha, (vl + vh) * half)
                }
                (None, Some(h)) => {
                    let vh = self.face_value(lay, h, x);
                    let vc = self.corner_value(cpl, lay, f, h, s, x);
                    ((vh - vc) / (ha * half), vh)
                }
                (Some(l), None) => {
                    let vl = self.face_value(lay, l, x);
                    let vc = self.corner_value(cpl, lay, f, l, s, x);
                    ((vc - vl) / (ha * half), vl)
                }
                (None, None) => unreachable!("live face without cells"),
            };
            let sv = s * vt;
            for half_cell in [gl, gh] {
                let Some(gface) = half_cell else { continue };
                let w = ha * half;
                let contrib = if !g.faces[gface].is_boundary() {
                    let fp = g.shifted_face(f, if s > T::zero() { 1 } else { -1 }).expect("neighbour face");
                    let vo = self.face_value(lay, fp, x);
                    let mut c = -mu * ((vo - vf) / hb + s * dvb_da);
                    if inertia {
                        c += rho * sv * upwind(zeta, sv, vf, vo);
                    }
                    c
                } else {
                    let d = hb * half;
                    match &self.face_bc[gface] {
                        Some(FfBc::DirichletVelocity(v)) => {
                            let vo = v(self.corner(f, s)).coord(a);
                            let mut c = -mu * ((vo - vf) / d + s * dvb_da);
                            if inertia {
                                // the transported value sits on the wall
                                c += rho * sv * vo;
                            }
                            c
                        }
                        Some(FfBc::NoSlip) => -mu * ((-vf) / d + s * dvb_da),
                        Some(FfBc::Symmetry) => T::zero(),
                        Some(FfBc::Outflow(_)) => {
                            if inertia {
                                rho * sv * vf
                            } else {
                                T::zero()
                            }
                        }
                        Some(FfBc::Coupling) => {
                            let beta = cpl.map(|c| c.beta(gface)).unwrap_or(T::zero());
                            let sym = cpl.map(|c| c.symmetric_slip()).unwrap_or(false);
                            let gterm = if sym { -s * dvb_da * d } else { T::zero() };
                            let vs = (vf + gterm) / (T::one() + beta * d);
                            let mut c = -mu * ((vs - vf) / d + s * dvb_da);
                            if inertia {
                                c += rho * sv * vs;
                            }
                            c
                        }
                        None => unreachable!("boundary face without condition"),
                    }
                };
                r += w * contrib;
            }
        }
        r - self.momentum_source[f]
    }

    /// Tangential interface velocity implied by the slip closure on the
    /// boundary face `g` for the adjacent parallel unknown `f`.
    pub fn slip_velocity<V: StateView<T> + ?Sized>(&self, cpl: &CouplingContext<T>, lay: &DofLayout, f: usize, g: usize, x: &V) -> T {
        let d = self.grid.spacing(self.grid.faces[f].axis.other()) * T::half();
        self.face_value(lay, f, x) / (T::one() + cpl.beta(g) * d)
    }

    /// Measure of the dual cell of face `f`.
    pub fn dual_volume(&self, f: usize) -> T {
        dual_rect(&self.grid, f).area()
    }
}

/// Dual cell of a face: from neighbouring cell centre to neighbouring cell
/// centre along the normal, one cell wide along the face.
pub fn dual_rect<T: Scalar>(g: &StaggeredGrid<T>, f: usize) -> Rect<T> {
    let face = &g.faces[f];
    let a = face.axis;
    let b = a.other();
    let (ha, hb) = (g.spacing(a), g.spacing(b));
    let ca = face.center.coord(a);
    let cb = face.center.coord(b);
    let half = T::half();
    let lo = if face.cells[0].is_some() { ca - ha * half } else { ca };
    let hi = if face.cells[1].is_some() { ca + ha * half } else { ca };
    let (blo, bhi) = (cb - hb * half, cb + hb * half);
    match a {
        Axis::X => Rect::new(lo, blo, hi, bhi),
        Axis::Y => Rect::new(blo, lo, bhi, hi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::markers;

    fn all(bc: FfBc<f64>) -> FfBoundarySpec<f64> {
        let mut s = FfBoundarySpec::new();
        for m in [markers::LEFT, markers::RIGHT, markers::BOTTOM, markers::TOP, markers::INTERNAL] {
            s = s.with(m, bc.clone());
        }
        s
    }

    fn dirichlet(v: impl Fn(Point<f64>) -> Point<f64> + Send + Sync + 'static) -> FfBc<f64> {
        FfBc::DirichletVelocity(Arc::new(v))
    }

    fn layout(ff: &FreeFlow<f64>) -> DofLayout {
        DofLayout::new(&ff.active_cells(), &ff.velocity_faces(), &[])
    }

    /// Fills the state with a velocity field and a pressure field.
    fn inject(ff: &FreeFlow<f64>, lay: &DofLayout, v: impl Fn(Point<f64>) -> Point<f64>, p: impl Fn(Point<f64>) -> f64) -> Vec<f64> {
        let mut x = vec![0.0; lay.len()];
        for (c, d) in lay.cell_dof.iter().enumerate() {
            if let Some(d) = d {
                x[*d] = p(ff.grid.cells[c].center);
            }
        }
        for (f, d) in lay.face_dof.iter().enumerate() {
            if let Some(d) = d {
                let face = &ff.grid.faces[f];
                x[*d] = v(face.center).coord(face.axis);
            }
        }
        x
    }

    fn grid(n: usize) -> StaggeredGrid<f64> {
        StaggeredGrid::new(Rect::new(0.0, 0.0, 1.0, 1.0), n, n).unwrap()
    }

    #[test]
    fn uniform_flow_is_divergence_free() {
        let v = |_: Point<f64>| Point::new(1.0, 0.0);
        let ff = FreeFlow::new(grid(4), all(dirichlet(v)), FreeFlowParams::default(), FfSources::default()).unwrap();
        let lay = layout(&ff);
        let x = inject(&ff, &lay, v, |_| 0.0);
        for c in ff.grid.active_cells() {
            assert!(ff.mass_residual(&lay, c, x.as_slice()).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_divergence_free_field() {
        let v = |p: Point<f64>| Point::new(p.x, -p.y);
        let ff = FreeFlow::new(grid(3), all(dirichlet(v)), FreeFlowParams::default(), FfSources::default()).unwrap();
        let lay = layout(&ff);
        let x = inject(&ff, &lay, v, |_| 0.0);
        for c in ff.grid.active_cells() {
            assert!(ff.mass_residual(&lay, c, x.as_slice()).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_source_sign() {
        let q: ScalarField<f64> = Arc::new(|p: Point<f64>| -(std::f64::consts::PI * p.x).sin());
        let src = FfSources { mass: Some(q), momentum: None };
        let ff = FreeFlow::new(grid(5), all(FfBc::NoSlip), FreeFlowParams::default(), src).unwrap();
        let lay = layout(&ff);
        let x = vec![0.0; lay.len()];
        for c in ff.grid.active_cells() {
            let xc = ff.grid.cells[c].center;
            let expect = ff.grid.cells[c].volume * (std::f64::consts::PI * xc.x).sin();
            // cell-average versus midpoint value: O(h^2) apart
            assert!((ff.mass_residual(&lay, c, x.as_slice()) - expect).abs() < 0.02 * ff.grid.cells[c].volume);
        }
    }

    #[test]
    fn rest_state_has_zero_residual() {
        let ff = FreeFlow::new(grid(4), all(FfBc::NoSlip), FreeFlowParams::default(), FfSources::default()).unwrap();
        let lay = layout(&ff);
        let x = inject(&ff, &lay, |_| Point::zero(), |_| 3.0);
        for f in 0..ff.grid.n_faces() {
            if lay.face_dof[f].is_some() {
                assert!(ff.momentum_residual(None, &lay, f, x.as_slice()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn linear_shear_is_exact_without_inertia() {
        let v = |p: Point<f64>| Point::new(p.y, 0.0);
        let params = FreeFlowParams { inertia: false, ..Default::default() };
        let ff = FreeFlow::new(grid(5), all(dirichlet(v)), params, FfSources::default()).unwrap();
        let lay = layout(&ff);
        let x = inject(&ff, &lay, v, |_| 0.0);
        for f in 0..ff.grid.n_faces() {
            if lay.face_dof[f].is_some() {
                assert!(ff.momentum_residual(None, &lay, f, x.as_slice()).abs() < 1e-13, "face {f}");
            }
        }
    }

    #[test]
    fn symmetry_plane_with_mirrored_field() {
        // Couette-type profile symmetric about x = 1: v = (0, x(2 - x))
        let v = |p: Point<f64>| Point::new(0.0, p.x * (2.0 - p.x));
        let params = FreeFlowParams { inertia: false, ..Default::default() };
        let bc = all(dirichlet(v)).with(markers::RIGHT, FfBc::Symmetry);
        let ff = FreeFlow::new(grid(4), bc, params, FfSources {
            mass: None,
            momentum: Some(Arc::new(|_| Point::new(0.0, 2.0))),
        })
        .unwrap();
        let lay = layout(&ff);
        let x = inject(&ff, &lay, v, |_| 0.0);
        let g = &ff.grid;
        for j in 1..g.ny {
            let f = g.y_face(g.nx - 1, j);
            assert!(ff.momentum_residual(None, &lay, f, x.as_slice()).abs() < 1e-13);
        }
    }

    #[test]
    fn outflow_channel_mass() {
        let v = |_: Point<f64>| Point::new(1.0, 0.0);
        let bc = all(FfBc::NoSlip)
            .with(markers::LEFT, dirichlet(v))
            .with(markers::RIGHT, FfBc::Outflow(Arc::new(|_| 0.0)));
        let ff = FreeFlow::new(
            StaggeredGrid::new(Rect::new(0.0, 0.0, 2.0, 1.0), 2, 1).unwrap(),
            bc,
            FreeFlowParams::default(),
            FfSources::default(),
        )
        .unwrap();
        let lay = layout(&ff);
        let x = inject(&ff, &lay, v, |_| 0.0);
        for c in ff.grid.active_cells() {
            assert_eq!(ff.mass_residual(&lay, c, x.as_slice()), 0.0);
        }
    }

    #[test]
    fn missing_marker_is_config_error() {
        let bc = FfBoundarySpec::new().with(markers::LEFT, FfBc::NoSlip);
        let err = FreeFlow::new(grid(2), bc, FreeFlowParams::default(), FfSources::default()).err().unwrap();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn parameter_validation() {
        let p = FreeFlowParams { zeta: 0.3, ..FreeFlowParams::<f64>::default() };
        assert!(p.validate().is_err());
    }
}
