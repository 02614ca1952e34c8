//! Problem setups of the obstacle and Forchheimer studies.

use std::sync::Arc;

use ffpm::coupling::{CouplingParams, ProjectionKind};
use ffpm::freeflow::{FfBc, FfBoundarySpec, FfSources, FreeFlow, FreeFlowParams};
use ffpm::mesh::generate::{box_offset_nodes, graded_interface_nodes, tensor_mesh, uniform_nodes};
use ffpm::mesh::{generate_pm_grid, markers, GridKind, InterfaceSide, PmGridSpec, StaggeredGrid};
use ffpm::porous::{PmBc, PmBoundarySpec, Porous, PorousParams, SourceRule};
use ffpm::{Point, Problem, Rect, Tensor};

use crate::config::{parse_projection, ForchheimerConfig, ObstacleConfig, PhysicsConfig};
use crate::error::{CliError, CliResult};

/// Free-flow markers of the obstacle block sides.
pub const BLOCK_TOP: u32 = 11;
pub const BLOCK_LEFT: u32 = 12;
pub const BLOCK_BOTTOM: u32 = 13;

/// One point of the obstacle sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstaclePoint {
    pub grid: GridKind,
    pub interface_factor: f64,
    pub level: usize,
    pub permeability: f64,
    pub inflow_speed: f64,
}

fn cells_on(extent: f64, h: f64, what: &str) -> CliResult<usize> {
    let n = extent / h;
    let r = n.round();
    if r < 1.0 || (n - r).abs() > 1e-8 * n.max(1.0) {
        return Err(CliError::Config(format!("{what} is not aligned with the free-flow grid")));
    }
    Ok(r as usize)
}

fn nodes(kind: GridKind, a: f64, b: f64, n: usize, f: f64) -> Vec<f64> {
    match kind {
        GridKind::Conforming => uniform_nodes(a, b, n),
        GridKind::BoxConforming => box_offset_nodes(a, b, n),
        GridKind::Simplex => graded_interface_nodes(a, b, n, f),
    }
}

/// Channel with a porous block: parabolic inflow on top, outflow at the
/// bottom, a wall on the left and a symmetry line on the right. The block
/// couples to the free flow on the configured sides.
pub fn obstacle_problem(cfg: &ObstacleConfig, phys: &PhysicsConfig, pt: &ObstaclePoint) -> CliResult<Problem> {
    let s = 1usize << pt.level;
    let (nx, ny) = (cfg.nx * s, cfg.ny * s);
    let [cx0, cy0, cx1, cy1] = cfg.channel;
    let [bx0, by0, bx1, by1] = cfg.block;
    let channel = Rect::new(cx0, cy0, cx1, cy1);
    let block = Rect::new(bx0, by0, bx1, by1);
    let mut grid = StaggeredGrid::with_hole(channel, nx, ny, block)?;
    let nbx = cells_on(bx1 - bx0, grid.dx, "obstacle block width")?;
    let nby = cells_on(by1 - by0, grid.dy, "obstacle block height")?;
    cells_on(bx0 - cx0, grid.dx, "obstacle block left side")?;
    cells_on(by0 - cy0, grid.dy, "obstacle block bottom side")?;

    let u = pt.inflow_speed;
    let w = cx1 - cx0;
    let inflow = Arc::new(move |p: Point<f64>| {
        let xi = (p.x - cx0) / w;
        Point::new(0.0, -u * xi * (2.0 - xi))
    });
    let bc = FfBoundarySpec::new()
        .with(markers::TOP, FfBc::DirichletVelocity(inflow))
        .with(markers::BOTTOM, FfBc::Outflow(Arc::new(|_| 0.0)))
        .with(markers::LEFT, FfBc::NoSlip)
        .with(markers::RIGHT, FfBc::Symmetry)
        .with(markers::INTERNAL, FfBc::NoSlip);
    let tol = 1e-9 * (grid.dx + grid.dy);
    let mut bc = bc;
    let mut pbc = PmBoundarySpec::new().with(markers::RIGHT, PmBc::NoFlow);
    for (side, pm_marker, ff_marker) in [("top", markers::TOP, BLOCK_TOP), ("left", markers::LEFT, BLOCK_LEFT), ("bottom", markers::BOTTOM, BLOCK_BOTTOM)] {
        let on_side = |p: Point<f64>| match side {
            "top" => (p.y - by1).abs() <= tol,
            "left" => (p.x - bx0).abs() <= tol,
            _ => (p.y - by0).abs() <= tol,
        };
        grid.mark_boundary(ff_marker, |f| f.marker == Some(markers::INTERNAL) && on_side(f.center));
        let coupled = cfg.coupled_sides.iter().any(|s| s == side);
        bc = bc.with(ff_marker, if coupled { FfBc::Coupling } else { FfBc::NoSlip });
        pbc = pbc.with(pm_marker, if coupled { PmBc::Coupling } else { PmBc::NoFlow });
    }
    let params = FreeFlowParams {
        rho: phys.rho,
        mu: phys.mu,
        inertia: phys.inertia,
        zeta: phys.momentum_zeta,
        ..FreeFlowParams::default()
    };
    let ff = FreeFlow::new(grid, bc, params, FfSources::default())?;

    let f = if pt.grid == GridKind::Simplex { pt.interface_factor } else { 1.0 };
    let xs = nodes(pt.grid, bx0, bx1, nbx, f);
    let ys = nodes(pt.grid, by0, by1, nby, f);
    let mut mesh = tensor_mesh(&xs, &ys, pt.grid == GridKind::Simplex, block)?;
    let k = pt.permeability;
    mesh.set_permeability(|_| Tensor::isotropic(k))?;
    let pparams = PorousParams { rho: phys.rho, mu: phys.mu, zeta: phys.zeta, ..PorousParams::default() };
    let pm = Porous::new(mesh, pbc, pparams, None, SourceRule::HighOrder)?;
    let cp = CouplingParams {
        alpha_bjs: phys.alpha_bjs,
        projection: parse_projection(&cfg.projection)?,
        zeta: phys.zeta,
        ..CouplingParams::default()
    };
    Ok(Problem::new(Some(ff), Some(pm), cp)?)
}

/// Straight channel over a porous bed, driven by the pressure drop `dp`
/// from left to right.
pub fn forchheimer_problem(cfg: &ForchheimerConfig, phys: &PhysicsConfig, c_f: f64, dp: f64) -> CliResult<Problem> {
    let (l, hb, hc) = (cfg.length, cfg.bed_height, cfg.channel_height);
    let grid = StaggeredGrid::new(Rect::new(0.0, hb, l, hb + hc), cfg.nx, cfg.ny_channel)?;
    let bc = FfBoundarySpec::new()
        .with(markers::LEFT, FfBc::Outflow(Arc::new(move |_| dp)))
        .with(markers::RIGHT, FfBc::Outflow(Arc::new(|_| 0.0)))
        .with(markers::TOP, FfBc::NoSlip)
        .with(markers::BOTTOM, FfBc::Coupling);
    let params = FreeFlowParams {
        rho: phys.rho,
        mu: phys.mu,
        inertia: cfg.channel_inertia,
        zeta: phys.momentum_zeta,
        ..FreeFlowParams::default()
    };
    let ff = FreeFlow::new(grid, bc, params, FfSources::default())?;

    let grid_kind: GridKind = crate::config::parse_grid(&cfg.grid)?;
    let spec = PmGridSpec {
        kind: grid_kind,
        rect: Rect::new(0.0, 0.0, l, hb),
        nx: cfg.nx,
        ny: cfg.ny_bed,
        interface: InterfaceSide::Top,
        interface_factor: 1.0,
    };
    let mut mesh = generate_pm_grid(&spec)?;
    let k = cfg.permeability;
    mesh.set_permeability(|_| Tensor::isotropic(k))?;
    let pbc = PmBoundarySpec::new()
        .with(markers::LEFT, PmBc::Dirichlet(Arc::new(move |_| dp)))
        .with(markers::RIGHT, PmBc::Dirichlet(Arc::new(|_| 0.0)))
        .with(markers::BOTTOM, PmBc::NoFlow)
        .with(markers::TOP, PmBc::Coupling);
    let pparams = PorousParams { rho: phys.rho, mu: phys.mu, zeta: phys.zeta, c_f, ..PorousParams::default() };
    let pm = Porous::new(mesh, pbc, pparams, None, SourceRule::HighOrder)?;
    let projection: ProjectionKind = parse_projection(&cfg.projection)?;
    let cp = CouplingParams { alpha_bjs: phys.alpha_bjs, projection, zeta: phys.zeta, ..CouplingParams::default() };
    Ok(Problem::new(Some(ff), Some(pm), cp)?)
}

/// Mass flow leaving the porous bed through its right side.
pub fn bed_flow_rate(prob: &Problem, x: &[f64], x_right: f64) -> f64 {
    let Some(pm) = &prob.pm else { return 0.0 };
    let out = prob.pm_dirichlet_outflow(x);
    let tol = 1e-9 * x_right.abs().max(1.0);
    pm.mesh.vertices.iter().zip(&out).filter(|(v, _)| (v.x - x_right).abs() <= tol).map(|(_, q)| *q).sum()
}
