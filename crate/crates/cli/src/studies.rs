//! The three studies. Each `*_study` function computes; each `run_*`
//! function also writes its files.

use std::fmt::Write as _;

use rayon::prelude::*;

use ffpm::mesh::GridKind;
use ffpm::solver::NewtonReport;
use ffpm::verify::{interface_velocities, total_variation, ConvergenceSetup, ErrorReport};
use ffpm::{Manufactured, Problem, State};

use crate::config::{parse_grid, parse_projection, StudyConfig};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;
use crate::problems::{bed_flow_rate, forchheimer_problem, obstacle_problem, ObstaclePoint};

/// One finished solve.
pub struct Solved {
    pub tag: String,
    pub problem: Problem,
    pub state: State,
    pub newton: NewtonReport,
}

fn solve_tagged(tag: String, problem: Problem, cfg: &StudyConfig) -> CliResult<Solved> {
    let (state, newton) = problem.solve(None, &cfg.newton()).map_err(|e| match CliError::from(e) {
        CliError::NonConvergence(m) => CliError::NonConvergence(format!("{tag}: {m}")),
        other => other,
    })?;
    Ok(Solved { tag, problem, state, newton })
}

fn finish(out: Option<&OutputDir>, cfg: &StudyConfig, s: &Solved) -> CliResult<()> {
    if let Some(o) = out {
        o.newton_log(&s.tag, &s.newton)?;
        if cfg.dump_fields {
            o.fields(&s.tag, &s.problem, &s.state)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- converge

pub struct ConvergeOutcome {
    pub report: ErrorReport<f64>,
    /// First failure; levels after it were not run.
    pub failure: Option<CliError>,
}

impl ConvergeOutcome {
    /// `grid, projection` header line plus the rates of the last level.
    pub fn summary(&self) -> String {
        let mut s = format!("grid={} projection={}\n", self.report.grid, self.report.projection);
        let names = ["p_ff", "vx", "vy", "p_pm"];
        for k in 0..self.report.rows.len() {
            let (m, e, _) = &self.report.rows[k];
            let _ = write!(s, "m={m}");
            for (n, v) in names.iter().zip(e.as_array()) {
                let _ = write!(s, " e_{n}={v:.3e}");
            }
            if let Some(r) = self.report.rates(k) {
                for (n, v) in names.iter().zip(r) {
                    let _ = write!(s, " r_{n}={v:.2}");
                }
            }
            s.push('\n');
        }
        if let Some(e) = &self.failure {
            let _ = writeln!(s, "failed: {e}");
        }
        s
    }
}

pub fn convergence_setup(cfg: &StudyConfig) -> CliResult<ConvergenceSetup<f64>> {
    let c = &cfg.converge;
    Ok(ConvergenceSetup {
        grid: parse_grid(&c.grid)?,
        projection: parse_projection(&c.projection)?,
        base_cells: c.base_cells,
        interface_factor: c.interface_factor,
        zeta: cfg.physics.zeta,
        momentum_zeta: cfg.physics.momentum_zeta,
        inertia: cfg.physics.inertia,
        ..ConvergenceSetup::default()
    })
}

/// Manufactured-solution convergence study over the configured levels.
/// The manufactured case fixes its own material parameters.
pub fn converge_study(cfg: &StudyConfig, out: Option<&OutputDir>) -> CliResult<ConvergeOutcome> {
    let setup = convergence_setup(cfg)?;
    let case = Manufactured::default();
    let mut report = ErrorReport::new(setup.grid, setup.projection);
    let mut failure = None;
    for m in cfg.converge.min_level..=cfg.converge.max_level {
        let tag = format!("converge_{}_{}_m{m}", setup.grid, setup.projection);
        let prob = case.build_problem(&setup, m)?;
        match solve_tagged(tag, prob, cfg) {
            Ok(s) => {
                finish(out, cfg, &s)?;
                let e = case.error_norms(&s.problem, &s.state);
                report.rows.push((m, e, true));
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(ConvergeOutcome { report, failure })
}

pub fn run_converge(cfg: &StudyConfig) -> CliResult<ConvergeOutcome> {
    let out = OutputDir::create(&cfg.output_dir)?;
    out.write("config.toml", &cfg.to_toml())?;
    let res = converge_study(cfg, Some(&out))?;
    out.write("converge.csv", &res.report.to_csv())?;
    out.write("summary.txt", &res.summary())?;
    Ok(res)
}

// ---------------------------------------------------------------- obstacle

#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleRow {
    pub point: ObstaclePoint,
    pub reynolds: f64,
    pub tv: f64,
    pub v_ref: f64,
    pub sign_changes: usize,
    pub newton_iterations: usize,
    /// Interface velocities `(x, v_y)` on the sampled line.
    pub profile: Vec<(f64, f64)>,
}

impl ObstacleRow {
    pub fn tv_normalized(&self) -> f64 {
        if self.v_ref > 0.0 {
            self.tv / self.v_ref
        } else {
            0.0
        }
    }
}

pub struct ObstacleOutcome {
    pub rows: Vec<Result<ObstacleRow, String>>,
    pub points: Vec<ObstaclePoint>,
}

impl ObstacleOutcome {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("grid,interface_factor,level,permeability,inflow_speed,reynolds,tv,v_ref,tv_normalized,sign_changes,newton_iterations,status\n");
        for (p, r) in self.points.iter().zip(&self.rows) {
            let _ = write!(s, "{},{},{},{:e},{:e},", p.grid, p.interface_factor, p.level, p.permeability, p.inflow_speed);
            match r {
                Ok(r) => {
                    let _ = writeln!(
                        s,
                        "{:e},{:.6e},{:.6e},{:.6e},{},{},ok",
                        r.reynolds,
                        r.tv,
                        r.v_ref,
                        r.tv_normalized(),
                        r.sign_changes,
                        r.newton_iterations
                    );
                }
                Err(_) => s.push_str(",,,,,,failed\n"),
            }
        }
        s
    }
}

/// Sweep points in output order: grid, interface factor, level,
/// permeability, inflow speed.
pub fn obstacle_points(cfg: &StudyConfig) -> CliResult<Vec<ObstaclePoint>> {
    let o = &cfg.obstacle;
    let mut pts = Vec::new();
    for g in &o.grids {
        let grid = parse_grid(g)?;
        let factors: &[f64] = if grid == GridKind::Simplex { &o.interface_factors } else { &[1.0] };
        for &interface_factor in factors {
            for &level in &o.levels {
                for &permeability in &o.permeabilities {
                    for &inflow_speed in &o.inflow_speeds {
                        pts.push(ObstaclePoint { grid, interface_factor, level, permeability, inflow_speed });
                    }
                }
            }
        }
    }
    Ok(pts)
}

fn point_tag(p: &ObstaclePoint) -> String {
    format!(
        "obstacle_{}_f{}_m{}_K{:e}_u{:e}",
        p.grid, p.interface_factor, p.level, p.permeability, p.inflow_speed
    )
}

fn obstacle_point(cfg: &StudyConfig, p: &ObstaclePoint, out: Option<&OutputDir>) -> CliResult<ObstacleRow> {
    let prob = obstacle_problem(&cfg.obstacle, &cfg.physics, p)?;
    let s = solve_tagged(point_tag(p), prob, cfg)?;
    finish(out, cfg, &s)?;
    let o = &cfg.obstacle;
    let profile = interface_velocities(&s.problem, &s.state, o.y_gamma, o.x_min);
    let vy: Vec<f64> = profile.iter().map(|q| q.1).collect();
    let (tv, sign_changes) = total_variation(&vy)?;
    let v_ref = vy.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let ph = &cfg.physics;
    let width = o.channel[2] - o.channel[0];
    Ok(ObstacleRow {
        point: *p,
        reynolds: ph.rho * p.inflow_speed * width / ph.mu,
        tv,
        v_ref,
        sign_changes,
        newton_iterations: s.newton.updates(),
        profile,
    })
}

/// Runs every sweep point; points are independent and run concurrently.
pub fn obstacle_study(cfg: &StudyConfig, out: Option<&OutputDir>) -> CliResult<ObstacleOutcome> {
    let points = obstacle_points(cfg)?;
    let res: Vec<CliResult<ObstacleRow>> = points.par_iter().map(|p| obstacle_point(cfg, p, out)).collect();
    let mut rows = Vec::with_capacity(res.len());
    for r in res {
        match r {
            Ok(r) => rows.push(Ok(r)),
            Err(CliError::NonConvergence(m)) => rows.push(Err(m)),
            Err(e) => return Err(e),
        }
    }
    Ok(ObstacleOutcome { rows, points })
}

pub fn run_obstacle(cfg: &StudyConfig) -> CliResult<ObstacleOutcome> {
    let out = OutputDir::create(&cfg.output_dir)?;
    out.write("config.toml", &cfg.to_toml())?;
    let res = obstacle_study(cfg, Some(&out))?;
    out.write("obstacle.csv", &res.to_csv())?;
    if cfg.dump_fields {
        for (p, r) in res.points.iter().zip(&res.rows) {
            if let Ok(r) = r {
                let mut s = String::from("x,v_y\n");
                for (x, v) in &r.profile {
                    let _ = writeln!(s, "{x:e},{v:e}");
                }
                out.write(&format!("fields/{}_interface.csv", point_tag(p)), &s)?;
            }
        }
    }
    Ok(res)
}

// ------------------------------------------------------------- forchheimer

pub struct ForchheimerOutcome {
    pub pressure_drops: Vec<f64>,
    pub c_f: Vec<f64>,
    /// `flow[c][i]`: flow rate through the bed for `c_f[c]`, `pressure_drops[i]`.
    pub flow: Vec<Vec<f64>>,
}

impl ForchheimerOutcome {
    /// Index of the Darcy column, if `c_F = 0` was run.
    pub fn darcy(&self) -> Option<usize> {
        self.c_f.iter().position(|&c| c == 0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("dp");
        for c in &self.c_f {
            let _ = write!(s, ",q_cf_{c}");
        }
        let d = self.darcy();
        if d.is_some() {
            for c in self.c_f.iter().filter(|&&c| c != 0.0) {
                let _ = write!(s, ",ratio_cf_{c}");
            }
        }
        s.push('\n');
        for (i, dp) in self.pressure_drops.iter().enumerate() {
            let _ = write!(s, "{dp:e}");
            for q in &self.flow {
                let _ = write!(s, ",{:.10e}", q[i]);
            }
            if let Some(d) = d {
                for (c, q) in self.c_f.iter().zip(&self.flow) {
                    if *c != 0.0 {
                        let _ = write!(s, ",{:.10e}", q[i] / self.flow[d][i]);
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

pub fn forchheimer_study(cfg: &StudyConfig, out: Option<&OutputDir>) -> CliResult<ForchheimerOutcome> {
    let f = &cfg.forchheimer;
    let jobs: Vec<(f64, f64)> = f.c_f.iter().flat_map(|&c| f.pressure_drops.iter().map(move |&dp| (c, dp))).collect();
    let flows: Vec<CliResult<f64>> = jobs
        .par_iter()
        .map(|&(c, dp)| {
            let prob = forchheimer_problem(f, &cfg.physics, c, dp)?;
            let s = solve_tagged(format!("forchheimer_cf{c}_dp{dp:e}"), prob, cfg)?;
            finish(out, cfg, &s)?;
            Ok(bed_flow_rate(&s.problem, &s.state.values, f.length))
        })
        .collect();
    let flows: Vec<f64> = flows.into_iter().collect::<CliResult<_>>()?;
    let n = f.pressure_drops.len();
    Ok(ForchheimerOutcome {
        pressure_drops: f.pressure_drops.clone(),
        c_f: f.c_f.clone(),
        flow: flows.chunks(n).map(<[f64]>::to_vec).collect(),
    })
}

pub fn run_forchheimer(cfg: &StudyConfig) -> CliResult<ForchheimerOutcome> {
    let out = OutputDir::create(&cfg.output_dir)?;
    out.write("config.toml", &cfg.to_toml())?;
    let res = forchheimer_study(cfg, Some(&out))?;
    out.write("forchheimer.csv", &res.to_csv())?;
    Ok(res)
}
