use std::sync::Arc;

use ffpm::coupling::CouplingParams;
use ffpm::freeflow::{FfBc, FfBoundarySpec, FfSources, FreeFlow, FreeFlowParams};
use ffpm::mesh::{generate_pm_grid, markers, GridKind, InterfaceSide, PmGridSpec, StaggeredGrid};
use ffpm::porous::{PmBc, PmBoundarySpec, Porous, PorousParams, SourceRule};
use ffpm::solver::{central_difference_jacobian, DofKind, NewtonConfig};
use ffpm::verify::{ConvergenceSetup, ManufacturedCase};
use ffpm::{Point, Problem, Rect, State, Tensor};
use proptest::prelude::*;

fn case() -> ManufacturedCase<f64> {
    ManufacturedCase::default()
}

const H: f64 = 1e-5;

fn dx<F: Fn(Point<f64>) -> f64>(f: &F, p: Point<f64>) -> f64 {
    (f(Point::new(p.x + H, p.y)) - f(Point::new(p.x - H, p.y))) / (2.0 * H)
}

fn dy<F: Fn(Point<f64>) -> f64>(f: &F, p: Point<f64>) -> f64 {
    (f(Point::new(p.x, p.y + H)) - f(Point::new(p.x, p.y - H))) / (2.0 * H)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sources_are_consistent(x in 0.01f64..0.99, y in 0.01f64..0.99) {
        let c = case();
        let pm = Point::new(x, y);
        let ff = Point::new(x, y + 1.0);
        let div = |v: &dyn Fn(Point<f64>) -> Point<f64>, p| dx(&|q| v(q).x, p) + dy(&|q| v(q).y, p);
        prop_assert!((div(&|q| c.v_ff(q), ff) - c.q_ff(ff)).abs() < 1e-6);
        prop_assert!((div(&|q| c.v_pm(q), pm) - c.q_pm(pm)).abs() < 1e-6);

        // Darcy: v + K grad p = 0 with unit viscosity
        let g = Point::new(dx(&|q| c.p_pm(q), pm), dy(&|q| c.p_pm(q), pm));
        let kg = c.permeability(pm).apply(g);
        prop_assert!((c.v_pm(pm) + kg).norm() < 1e-6);

        // momentum: div(v v^T) - div(grad v + grad v^T) + grad p = f
        let v = |q: Point<f64>| c.v_ff(q);
        let conv = Point::new(
            dx(&|q| v(q).x * v(q).x, ff) + dy(&|q| v(q).x * v(q).y, ff),
            dx(&|q| v(q).y * v(q).x, ff) + dy(&|q| v(q).y * v(q).y, ff),
        );
        // symmetric-gradient stress components by nested differences
        let sxx = |q: Point<f64>| 2.0 * dx(&|r| v(r).x, q);
        let sxy = |q: Point<f64>| dy(&|r| v(r).x, q) + dx(&|r| v(r).y, q);
        let syy = |q: Point<f64>| 2.0 * dy(&|r| v(r).y, q);
        let visc = Point::new(dx(&sxx, ff) + dy(&sxy, ff), dx(&sxy, ff) + dy(&syy, ff));
        let gp = Point::new(dx(&|q| c.p_ff(q), ff), dy(&|q| c.p_ff(q), ff));
        let f = conv - visc + gp;
        prop_assert!((f - c.f(ff)).norm() < 1e-4, "{:?} vs {:?}", f, c.f(ff));
    }

    #[test]
    fn error_norms_are_homogeneous(seed in prop::collection::vec(-1.0f64..1.0, 32), a in 0.1f64..10.0) {
        let c = case();
        let prob = c.build_problem(&ConvergenceSetup::default(), 0).unwrap();
        let ex = c.exact_state(&prob);
        let delta: Vec<f64> = (0..ex.values.len()).map(|i| seed[i % seed.len()] * (1.0 + i as f64 * 1e-3)).collect();
        let st = |s: f64| State { values: ex.values.iter().zip(&delta).map(|(x, d)| x + s * d).collect() };
        let e1 = c.error_norms(&prob, &st(1e-3)).as_array();
        let ea = c.error_norms(&prob, &st(a * 1e-3)).as_array();
        for k in 0..4 {
            prop_assert!((ea[k] - a * e1[k]).abs() <= 1e-9 * a * e1[k].max(1e-300));
        }
    }
}

#[test]
fn exact_state_has_zero_error() {
    let c = case();
    let prob = c.build_problem(&ConvergenceSetup::default(), 0).unwrap();
    let e = c.error_norms(&prob, &c.exact_state(&prob)).as_array();
    assert!(e.iter().all(|&v| v < 1e-14), "{e:?}");
}

/// Small Stokes-Darcy problem: channel on `(0,1)×(1,1.5)` over a bed.
fn channel_problem(inertia: bool, grid: GridKind, c_f: f64) -> Problem {
    let ff_grid = StaggeredGrid::new(Rect::new(0.0, 1.0, 1.0, 1.5), 6, 3).unwrap();
    let inflow = Arc::new(|p: Point<f64>| Point::new(4.0 * (p.y - 1.0) * (1.5 - p.y), 0.0));
    let bc = FfBoundarySpec::new()
        .with(markers::LEFT, FfBc::DirichletVelocity(inflow))
        .with(markers::RIGHT, FfBc::Outflow(Arc::new(|_| 0.0)))
        .with(markers::TOP, FfBc::NoSlip)
        .with(markers::BOTTOM, FfBc::Coupling);
    let params = FreeFlowParams { inertia, ..FreeFlowParams::default() };
    let ff = FreeFlow::new(ff_grid, bc, params, FfSources::default()).unwrap();
    let spec = PmGridSpec {
        kind: grid,
        rect: Rect::new(0.0, 0.0, 1.0, 1.0),
        nx: 5,
        ny: 4,
        interface: InterfaceSide::Top,
        interface_factor: if grid == GridKind::Simplex { 0.9 } else { 1.0 },
    };
    let mut mesh = generate_pm_grid(&spec).unwrap();
    mesh.set_permeability(|_| Tensor::isotropic(0.05)).unwrap();
    let pbc = PmBoundarySpec::new()
        .with(markers::LEFT, PmBc::NoFlow)
        .with(markers::RIGHT, PmBc::Dirichlet(Arc::new(|p: Point<f64>| 0.1 * p.y)))
        .with(markers::BOTTOM, PmBc::NoFlow)
        .with(markers::TOP, PmBc::Coupling);
    let pm = Porous::new(mesh, pbc, PorousParams { c_f, ..PorousParams::default() }, None, SourceRule::Centroid).unwrap();
    Problem::new(Some(ff), Some(pm), CouplingParams::default()).unwrap()
}

#[test]
fn linear_problem_takes_one_update() {
    for grid in [GridKind::Conforming, GridKind::Simplex] {
        let prob = channel_problem(false, grid, 0.0);
        let cfg = NewtonConfig { rel_tol: 1e-6, ..NewtonConfig::default() };
        let (_, rep) = prob.solve(None, &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.updates(), 1, "{}", rep.to_csv());
    }
}

#[test]
fn linear_jacobian_is_state_independent() {
    let prob = channel_problem(false, GridKind::Simplex, 0.0);
    let n = prob.n_dofs();
    let xa: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.1).collect();
    let xb: Vec<f64> = (0..n).map(|i| ((i * 53 % 7) as f64 - 3.0) * 0.3).collect();
    // an affine residual has no truncation error, so a wide step only
    // lowers the round-off
    let da = central_difference_jacobian(&prob, &xa, 1e-2);
    let db = central_difference_jacobian(&prob, &xb, 1e-2);
    for i in 0..n {
        for j in 0..n {
            assert!((da[i][j] - db[i][j]).abs() <= 1e-8 * (1.0 + da[i][j].abs()), "({i},{j}): {} vs {}", da[i][j], db[i][j]);
        }
    }
}

#[test]
fn jacobian_matches_central_differences_with_inertia_and_forchheimer() {
    let prob = channel_problem(true, GridKind::Simplex, 0.55);
    let n = prob.n_dofs();
    assert!(n <= 500);
    let x: Vec<f64> = (0..n).map(|i| 0.2 * ((i as f64 * 0.7).sin() + 0.5)).collect();
    let (_, j) = prob.assemble(&x).unwrap();
    let dense = j.to_dense();
    let cd = central_difference_jacobian(&prob, &x, 1e-6);
    for i in 0..n {
        for k in 0..n {
            let err = (dense[i][k] - cd[i][k]).abs();
            assert!(err <= 1e-6 * (1.0 + cd[i][k].abs()), "({i},{k}): {} vs {}", dense[i][k], cd[i][k]);
        }
    }
}

#[test]
fn coupled_solve_conserves_mass() {
    for grid in [GridKind::Conforming, GridKind::BoxConforming, GridKind::Simplex] {
        let prob = channel_problem(true, grid, 0.55);
        let (st, rep) = prob.solve(None, &NewtonConfig::default()).unwrap();
        assert!(rep.converged);
        let mb = prob.mass_balance(&st.values);
        assert!(mb.interface_mismatch.abs() < 1e-13, "{mb:?}");
        assert!(mb.imbalance.abs() < 1e-10, "{mb:?}");
    }
}

#[test]
fn porous_renumbering_is_invariant() {
    let prob = channel_problem(true, GridKind::Simplex, 0.0);
    let (st, _) = prob.solve(None, &NewtonConfig::default()).unwrap();

    let pm = prob.pm.as_ref().unwrap();
    let nv = pm.mesh.n_vertices();
    let perm: Vec<usize> = (0..nv).map(|v| (2 * nv - 1 - v + 5) % nv).collect();
    let mesh = pm.mesh.renumber_vertices(&perm).unwrap();
    let pm2 = Porous::new(mesh, pm.bc.clone(), pm.params, None, SourceRule::Centroid).unwrap();
    let prob2 = Problem::new(prob.ff.clone(), Some(pm2), CouplingParams::default()).unwrap();
    let (st2, _) = prob2.solve(None, &NewtonConfig::default()).unwrap();

    for v in 0..nv {
        let a = st.values[prob.layout.vertex_dof[v]];
        let b = st2.values[prob2.layout.vertex_dof[perm[v]]];
        assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "vertex {v}: {a} vs {b}");
    }
    for (k, kind) in prob.layout.kinds.iter().enumerate() {
        if let DofKind::FfVelocity(f) = *kind {
            let k2 = prob2.layout.kinds.iter().position(|q| *q == DofKind::FfVelocity(f)).unwrap();
            assert!((st.values[k] - st2.values[k2]).abs() < 1e-10);
        }
    }
}
