//! Manufactured solution of the coupled Navier-Stokes / Darcy problem on
//! `(0,1)×(0,2)`, discrete error norms, and interface oscillation measures.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::coupling::CouplingParams;
use crate::error::{Error, Result};
use crate::freeflow::{FaceKind, FfBc, FfBoundarySpec, FfSources, FreeFlow, FreeFlowParams};
use crate::geometry::{Point, Rect, Tensor};
use crate::mesh::{generate_pm_grid, markers, GridKind, InterfaceSide, PmGridSpec, StaggeredGrid};
use crate::porous::{PmBc, PmBoundarySpec, Porous, PorousParams, SourceRule};
use crate::quadrature::{integrate_polygon, integrate_rect};
use crate::scalar::Scalar;
use crate::solver::{CoupledProblem, DofKind, SystemState};

/// Exact fields of the convergence test. Free flow lives on `y ∈ [1, 2]`,
/// the porous medium on `y ∈ [0, 1]`, both on `x ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedCase<T> {
    pub omega: T,
    pub c: T,
}

impl<T: Scalar> Default for ManufacturedCase<T> {
    fn default() -> Self {
        Self { omega: T::from_f64(std::f64::consts::PI).expect("pi"), c: T::lit(0.9) }
    }
}

/// Identifier of an exact field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactField {
    FfVelocity,
    FfPressure,
    PmVelocity,
    PmPressure,
    FfMassSource,
    FfMomentumSource,
    PmMassSource,
    Permeability,
}

impl std::str::FromStr for ExactField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "v_ff" => ExactField::FfVelocity,
            "p_ff" => ExactField::FfPressure,
            "v_pm" => ExactField::PmVelocity,
            "p_pm" => ExactField::PmPressure,
            "q_ff" => ExactField::FfMassSource,
            "f" => ExactField::FfMomentumSource,
            "q_pm" => ExactField::PmMassSource,
            "K" => ExactField::Permeability,
            _ => return Err(Error::InvalidInput(format!("unknown field id '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldValue<T> {
    Scalar(T),
    Vector(Point<T>),
    Tensor(Tensor<T>),
}

impl<T: Scalar> ManufacturedCase<T> {
    fn sc(&self, x: T) -> (T, T) {
        ((self.omega * x).sin(), (self.omega * x).cos())
    }

    /// `e^{y+1} + 2 - e^2`
    fn g(y: T) -> T {
        (y + T::one()).exp() + T::two() - T::lit(2.0).exp()
    }

    pub fn v_ff(&self, p: Point<T>) -> Point<T> {
        let (s, _) = self.sc(p.x);
        Point::new(p.y, -p.y * s)
    }

    pub fn p_ff(&self, p: Point<T>) -> T {
        let (s, _) = self.sc(p.x);
        -p.y * p.y * s * s
    }

    pub fn p_pm(&self, p: Point<T>) -> T {
        let (s, _) = self.sc(p.x);
        Self::g(p.y) * s
    }

    pub fn v_pm(&self, p: Point<T>) -> Point<T> {
        let (s, co) = self.sc(p.x);
        let (w, c) = (self.omega, self.c);
        let e1 = (p.y + T::one()).exp();
        let em = (p.y - T::one()).exp();
        let g = Self::g(p.y);
        Point::new(
            c / (T::two() * w) * e1 * s * s - w * g * co,
            (c * T::half() * co * g - (T::one() + c * co) * em) * s,
        )
    }

    pub fn q_ff(&self, p: Point<T>) -> T {
        -self.sc(p.x).0
    }

    pub fn f(&self, p: Point<T>) -> Point<T> {
        let (s, co) = self.sc(p.x);
        let w = self.omega;
        let y = p.y;
        Point::new(
            -T::two() * w * y * y * s * co - T::two() * y * s + w * co,
            -w * y * y * co - w * w * y * s,
        )
    }

    pub fn q_pm(&self, p: Point<T>) -> T {
        let (s, co) = self.sc(p.x);
        let (w, c) = (self.omega, self.c);
        let e1 = (p.y + T::one()).exp();
        let em = (p.y - T::one()).exp();
        (T::lit(1.5) * c * e1 * co + w * w * Self::g(p.y) - (T::one() + c * co) * em) * s
    }

    pub fn permeability(&self, p: Point<T>) -> Tensor<T> {
        let (s, co) = self.sc(p.x);
        let off = -self.c / (T::two() * self.omega) * s;
        Tensor::symmetric(T::one(), off, T::lit(-2.0).exp() * (T::one() + self.c * co))
    }

    /// Evaluates a named field; pressures and velocities are only defined in
    /// their own subdomain.
    pub fn eval_exact(&self, which: ExactField, p: Point<T>) -> Result<FieldValue<T>> {
        let tol = T::lit(1e-12);
        let in_x = p.x >= -tol && p.x <= T::one() + tol;
        let ff = in_x && p.y >= T::one() - tol && p.y <= T::two() + tol;
        let pm = in_x && p.y >= -tol && p.y <= T::one() + tol;
        let need = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::Domain(format!("point ({}, {}) outside the subdomain of {which:?}", p.x, p.y)))
            }
        };
        Ok(match which {
            ExactField::FfVelocity => {
                need(ff)?;
                FieldValue::Vector(self.v_ff(p))
            }
            ExactField::FfPressure => {
                need(ff)?;
                FieldValue::Scalar(self.p_ff(p))
            }
            ExactField::FfMassSource => {
                need(ff)?;
                FieldValue::Scalar(self.q_ff(p))
            }
            ExactField::FfMomentumSource => {
                need(ff)?;
                FieldValue::Vector(self.f(p))
            }
            ExactField::PmVelocity => {
                need(pm)?;
                FieldValue::Vector(self.v_pm(p))
            }
            ExactField::PmPressure => {
                need(pm)?;
                FieldValue::Scalar(self.p_pm(p))
            }
            ExactField::PmMassSource => {
                need(pm)?;
                FieldValue::Scalar(self.q_pm(p))
            }
            ExactField::Permeability => {
                need(pm)?;
                FieldValue::Tensor(self.permeability(p))
            }
        })
    }
}

/// Integral over an axis-aligned cell (tensor Gauss 3×3).
pub fn integrate_cell<T: Scalar>(rect: &Rect<T>, f: impl Fn(Point<T>) -> T) -> T {
    integrate_rect(rect, f)
}

/// Integral over a convex polygon such as a sub-control volume (degree-5
/// rule on a triangle fan).
pub fn integrate_scv<T: Scalar>(poly: &[Point<T>], f: impl Fn(Point<T>) -> T) -> T {
    integrate_polygon(poly, f)
}

/// Discretisation choices of one convergence run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceSetup<T> {
    pub grid: GridKind,
    pub projection: crate::coupling::ProjectionKind,
    /// Free-flow cells per direction at level 0.
    pub base_cells: usize,
    /// Interface factor of the simplex grid.
    pub interface_factor: T,
    /// Upwind weight of porous and interface mass fluxes.
    pub zeta: T,
    /// Upwind weight of the free-flow momentum convection; 0.5 is central.
    pub momentum_zeta: T,
    pub inertia: bool,
    /// Replace the exact velocity on the top boundary by the exact pressure.
    pub pressure_outlet_top: bool,
}

impl<T: Scalar> Default for ConvergenceSetup<T> {
    fn default() -> Self {
        Self {
            grid: GridKind::Conforming,
            projection: crate::coupling::ProjectionKind::L2,
            base_cells: 5,
            interface_factor: T::one(),
            zeta: T::one(),
            momentum_zeta: T::half(),
            inertia: true,
            pressure_outlet_top: false,
        }
    }
}

impl<T: Scalar> ManufacturedCase<T> {
    /// Builds the coupled problem at refinement level `m`.
    pub fn build_problem(&self, setup: &ConvergenceSetup<T>, m: usize) -> Result<CoupledProblem<T>> {
        let n = setup.base_cells << m;
        let case = *self;
        let grid = StaggeredGrid::new(Rect::new(T::zero(), T::one(), T::one(), T::two()), n, n)?;
        let vel: crate::freeflow::VectorField<T> = Arc::new(move |p| case.v_ff(p));
        let mut bc = FfBoundarySpec::new()
            .with(markers::LEFT, FfBc::DirichletVelocity(vel.clone()))
            .with(markers::RIGHT, FfBc::DirichletVelocity(vel.clone()))
            .with(markers::BOTTOM, FfBc::Coupling);
        bc = if setup.pressure_outlet_top {
            bc.with(markers::TOP, FfBc::Outflow(Arc::new(move |p| case.ff_outlet_traction(p))))
        } else {
            bc.with(markers::TOP, FfBc::DirichletVelocity(vel))
        };
        let params = FreeFlowParams { zeta: setup.momentum_zeta, inertia: setup.inertia, ..FreeFlowParams::default() };
        let sources = FfSources {
            mass: Some(Arc::new(move |p| case.q_ff(p))),
            momentum: Some(Arc::new(move |p| case.f(p))),
        };
        let ff = FreeFlow::new(grid, bc, params, sources)?;

        let spec = PmGridSpec {
            kind: setup.grid,
            rect: Rect::new(T::zero(), T::zero(), T::one(), T::one()),
            nx: n,
            ny: n,
            interface: InterfaceSide::Top,
            interface_factor: if setup.grid == GridKind::Simplex { setup.interface_factor } else { T::one() },
        };
        let mut mesh = generate_pm_grid(&spec)?;
        mesh.set_permeability(|x| case.permeability(x))?;
        let pex: crate::freeflow::ScalarField<T> = Arc::new(move |p| case.p_pm(p));
        let pbc = PmBoundarySpec::new()
            .with(markers::LEFT, PmBc::Dirichlet(pex.clone()))
            .with(markers::RIGHT, PmBc::Dirichlet(pex.clone()))
            .with(markers::BOTTOM, PmBc::Dirichlet(pex))
            .with(markers::TOP, PmBc::Coupling);
        let pm = Porous::new(
            mesh,
            pbc,
            PorousParams { zeta: setup.zeta, ..PorousParams::default() },
            Some(Arc::new(move |p| case.q_pm(p))),
            SourceRule::HighOrder,
        )?;
        let cp = CouplingParams { projection: setup.projection, zeta: setup.zeta, ..CouplingParams::default() };
        CoupledProblem::new(Some(ff), Some(pm), cp)
    }

    /// Outlet value `p - 2 ∂v_y/∂y` on the top boundary. The discrete
    /// outflow condition has no viscous normal term, so it is folded in here.
    fn ff_outlet_traction(&self, p: Point<T>) -> T {
        let (s, _) = self.sc(p.x);
        self.p_ff(p) + T::two() * s
    }

    /// Discrete state holding the exact values at the unknowns' locations.
    pub fn exact_state(&self, prob: &CoupledProblem<T>) -> SystemState<T> {
        let values = prob
            .layout
            .kinds
            .iter()
            .map(|k| match *k {
                DofKind::FfPressure(c) => self.p_ff(prob.ff.as_ref().expect("ff").grid.cells[c].center),
                DofKind::FfVelocity(f) => {
                    let face = &prob.ff.as_ref().expect("ff").grid.faces[f];
                    self.v_ff(face.center).coord(face.axis)
                }
                DofKind::PmPressure(v) => self.p_pm(prob.pm.as_ref().expect("pm").mesh.vertices[v]),
            })
            .collect();
        SystemState { values }
    }

    /// Discrete error norms of `state`.
    pub fn error_norms(&self, prob: &CoupledProblem<T>, state: &SystemState<T>) -> ErrorNorms<T> {
        let lay = &prob.layout;
        let x = &state.values;
        let mut e = ErrorNorms::default();
        if let Some(ff) = &prob.ff {
            let g = &ff.grid;
            let mut sp = T::zero();
            for c in g.active_cells() {
                let d = ff.cell_pressure(lay, c, x) - self.p_ff(g.cells[c].center);
                sp += g.cells[c].volume * d * d;
            }
            let (mut sx, mut sy) = (T::zero(), T::zero());
            for (f, face) in g.faces.iter().enumerate() {
                if ff.kind[f] == FaceKind::Dead {
                    continue;
                }
                let d = ff.face_value(lay, f, x) - self.v_ff(face.center).coord(face.axis);
                let w = ff.dual_volume(f) * d * d;
                match face.axis {
                    crate::geometry::Axis::X => sx += w,
                    crate::geometry::Axis::Y => sy += w,
                }
            }
            e.p_ff = sp.sqrt();
            e.vx = sx.sqrt();
            e.vy = sy.sqrt();
        }
        if let Some(pm) = &prob.pm {
            let mut s = T::zero();
            for (v, &vol) in pm.dual.cv_volume.iter().enumerate() {
                let d = x[lay.vertex_dof[v]] - self.p_pm(pm.mesh.vertices[v]);
                s += vol * d * d;
            }
            e.p_pm = s.sqrt();
        }
        e
    }
}

/// Errors of one refinement level.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms<T> {
    pub p_ff: T,
    pub vx: T,
    pub vy: T,
    pub p_pm: T,
}

impl<T: Scalar> ErrorNorms<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.p_ff, self.vx, self.vy, self.p_pm]
    }
}

/// Errors over a sequence of uniform refinements.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport<T> {
    pub grid: GridKind,
    pub projection: crate::coupling::ProjectionKind,
    /// `(level, errors, converged)`
    pub rows: Vec<(usize, ErrorNorms<T>, bool)>,
}

impl<T: Scalar> ErrorReport<T> {
    pub fn new(grid: GridKind, projection: crate::coupling::ProjectionKind) -> Self {
        Self { grid, projection, rows: Vec::new() }
    }

    /// `log2(e_{m-1} / e_m)` per quantity for row `k ≥ 1`, when the levels
    /// are consecutive.
    pub fn rates(&self, k: usize) -> Option<[T; 4]> {
        if k == 0 || k >= self.rows.len() || self.rows[k].0 != self.rows[k - 1].0 + 1 {
            return None;
        }
        let a = self.rows[k - 1].1.as_array();
        let b = self.rows[k].1.as_array();
        Some(std::array::from_fn(|i| (a[i] / b[i]).log2()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,e_p_ff,r_p_ff,e_vx,r_vx,e_vy,r_vy,e_p_pm,r_p_pm\n");
        for (k, (m, e, _)) in self.rows.iter().enumerate() {
            let _ = write!(s, "{m}");
            let r = self.rates(k);
            for (i, v) in e.as_array().iter().enumerate() {
                let _ = write!(s, ",{:.6e},", v.as_f64());
                match r {
                    Some(r) => {
                        let _ = write!(s, "{:.4}", r[i].as_f64());
                    }
                    None => s.push('-'),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Total variation of a sequence and the number of strict sign changes.
/// Zeros inherit the sign of their predecessor.
pub fn total_variation<T: Scalar>(seq: &[T]) -> Result<(T, usize)> {
    if seq.len() < 2 {
        return Err(Error::InvalidInput("total variation needs at least two values".into()));
    }
    let tv = seq.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let mut changes = 0;
    let mut prev = 0i8;
    for &v in seq {
        let s = if v > T::zero() {
            1
        } else if v < T::zero() {
            -1
        } else {
            prev
        };
        if s != 0 && prev != 0 && s != prev {
            changes += 1;
        }
        if s != 0 {
            prev = s;
        }
    }
    Ok((tv, changes))
}

/// Normal velocities on coupling faces lying on the line `y = y_line` with
/// centre `x ≥ x_min`, ordered by `x`.
pub fn interface_velocities<T: Scalar>(prob: &CoupledProblem<T>, state: &SystemState<T>, y_line: T, x_min: T) -> Vec<(T, T)> {
    let Some(ff) = &prob.ff else { return Vec::new() };
    let tol = T::lit(1e-9) * (ff.grid.dx + ff.grid.dy);
    let mut out: Vec<(T, T)> = ff
        .grid
        .faces
        .iter()
        .enumerate()
        .filter(|(f, face)| {
            ff.kind[*f] == FaceKind::Coupling
                && face.axis == crate::geometry::Axis::Y
                && (face.center.y - y_line).abs() <= tol
                && face.center.x >= x_min - tol
        })
        .map(|(f, face)| (face.center.x, ff.face_value(&prob.layout, f, &state.values)))
        .collect();
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case() -> ManufacturedCase<f64> {
        ManufacturedCase::default()
    }

    #[test]
    fn pressure_sample() {
        assert!((case().p_ff(Point::new(0.5, 1.0)) + 1.0).abs() < 1e-14);
        let v = case().v_ff(Point::new(0.0, 1.7));
        assert_eq!(v, Point::new(1.7, -0.0));
    }

    #[test]
    fn tv_examples() {
        assert_eq!(total_variation(&[2.0, 2.0, 2.0]).unwrap(), (0.0, 0));
        assert_eq!(total_variation(&[1.0, -1.0, 1.0]).unwrap(), (4.0, 2));
        assert_eq!(total_variation(&[1.0, 0.0, 1.0]).unwrap().1, 0);
        assert_eq!(total_variation(&[1.0, 0.0, -1.0]).unwrap().1, 1);
        assert!(total_variation(&[1.0]).is_err());
    }

    #[test]
    fn unknown_field_and_domain() {
        assert!("nope".parse::<ExactField>().is_err());
        assert!(case().eval_exact(ExactField::PmPressure, Point::new(0.5, 1.5)).is_err());
        assert!(matches!(case().eval_exact(ExactField::FfPressure, Point::new(0.5, 1.5)), Ok(FieldValue::Scalar(_))));
    }

    #[test]
    fn source_integrals() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert!((integrate_cell(&r, |p: Point<f64>| p.x.powi(5)) - 1.0 / 6.0).abs() < 1e-14);
        let c = case();
        let ff = Rect::new(0.0, 1.0, 1.0, 2.0);
        // composite rule over 16 cells for the oscillatory integrand
        let mut s = 0.0;
        for i in 0..16 {
            let x0 = i as f64 / 16.0;
            s += integrate_cell(&Rect::new(x0, ff.y0, x0 + 1.0 / 16.0, ff.y1), |p| c.q_ff(p));
        }
        assert!((s + 2.0 / std::f64::consts::PI).abs() < 1e-10);
    }

    fn fd_div(v: impl Fn(Point<f64>) -> Point<f64>, p: Point<f64>) -> f64 {
        let h = 1e-5;
        (v(Point::new(p.x + h, p.y)).x - v(Point::new(p.x - h, p.y)).x) / (2.0 * h)
            + (v(Point::new(p.x, p.y + h)).y - v(Point::new(p.x, p.y - h)).y) / (2.0 * h)
    }

    #[test]
    fn q_pm_is_divergence() {
        let c = case();
        for k in 0..50 {
            let p = Point::new(0.02 + 0.019 * k as f64, 0.97 - 0.018 * k as f64);
            assert!((fd_div(|q| c.v_pm(q), p) - c.q_pm(p)).abs() < 1e-6);
            let q = Point::new(p.x, p.y + 1.0);
            assert!((fd_div(|q| c.v_ff(q), q) - c.q_ff(q)).abs() < 1e-6);
        }
    }
}
