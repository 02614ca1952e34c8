//! Study configuration: TOML on disk, dotted-key overrides on the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ffpm::coupling::ProjectionKind;
use ffpm::mesh::GridKind;
use ffpm::solver::NewtonConfig;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Converge,
    Obstacle,
    Forchheimer,
}

impl std::fmt::Display for StudyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StudyKind::Converge => "converge",
            StudyKind::Obstacle => "obstacle",
            StudyKind::Forchheimer => "forchheimer",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub output_dir: PathBuf,
    /// Write cell, face and vertex values of every solve.
    pub dump_fields: bool,
    pub physics: PhysicsConfig,
    pub newton: NewtonSection,
    pub converge: ConvergeConfig,
    pub obstacle: ObstacleConfig,
    pub forchheimer: ForchheimerConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub rho: f64,
    pub mu: f64,
    pub alpha_bjs: f64,
    /// Upwind weight of porous and interface mass fluxes.
    pub zeta: f64,
    /// Upwind weight of free-flow momentum convection.
    pub momentum_zeta: f64,
    pub inertia: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSection {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
    pub line_search: bool,
    pub pivot_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub grid: String,
    pub projection: String,
    /// Free-flow cells per direction at level 0.
    pub base_cells: usize,
    pub min_level: usize,
    pub max_level: usize,
    /// Interface factor of simplex grids.
    pub interface_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObstacleConfig {
    /// `[x0, y0, x1, y1]`
    pub channel: [f64; 4],
    /// Porous block `[x0, y0, x1, y1]`; its right side lies on the symmetry line.
    pub block: [f64; 4],
    /// Interface line on which the velocities are sampled.
    pub y_gamma: f64,
    pub x_min: f64,
    /// Block sides coupled to the free flow, from `top`, `left`, `bottom`;
    /// the others are walls.
    pub coupled_sides: Vec<String>,
    /// Free-flow cells at level 0.
    pub nx: usize,
    pub ny: usize,
    pub levels: Vec<usize>,
    pub grids: Vec<String>,
    /// Interface factors tried on simplex grids.
    pub interface_factors: Vec<f64>,
    pub projection: String,
    pub permeabilities: Vec<f64>,
    /// Peak inflow speeds of the parabolic profile.
    pub inflow_speeds: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForchheimerConfig {
    pub length: f64,
    pub bed_height: f64,
    pub channel_height: f64,
    pub nx: usize,
    pub ny_bed: usize,
    pub ny_channel: usize,
    /// Convection in the channel. Used instead of `physics.inertia`; off by
    /// default so that the `c_f = 0` flow rate is exactly linear in the
    /// pressure drop.
    pub channel_inertia: bool,
    pub grid: String,
    pub projection: String,
    pub permeability: f64,
    pub pressure_drops: Vec<f64>,
    pub c_f: Vec<f64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            study: StudyKind::Converge,
            output_dir: PathBuf::from("out"),
            dump_fields: false,
            physics: PhysicsConfig::default(),
            newton: NewtonSection::default(),
            converge: ConvergeConfig::default(),
            obstacle: ObstacleConfig::default(),
            forchheimer: ForchheimerConfig::default(),
        }
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { rho: 1.0, mu: 1.0, alpha_bjs: 1.0, zeta: 1.0, momentum_zeta: 0.5, inertia: true }
    }
}

impl Default for NewtonSection {
    fn default() -> Self {
        let d = NewtonConfig::<f64>::default();
        Self {
            abs_tol: d.abs_tol,
            rel_tol: d.rel_tol,
            max_iterations: d.max_iterations,
            line_search: d.line_search,
            pivot_threshold: d.pivot_threshold,
        }
    }
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            grid: "conforming".into(),
            projection: "l2".into(),
            base_cells: 5,
            min_level: 0,
            max_level: 3,
            interface_factor: 1.0,
        }
    }
}

impl Default for ObstacleConfig {
    fn default() -> Self {
        Self {
            channel: [0.0, 0.0, 1.0, 2.0],
            block: [0.2, 0.8, 1.0, 1.6],
            y_gamma: 1.6,
            x_min: 0.2,
            coupled_sides: vec!["top".into(), "left".into(), "bottom".into()],
            nx: 20,
            ny: 10,
            levels: vec![0],
            grids: vec!["box_conforming".into(), "conforming".into(), "simplex".into()],
            interface_factors: vec![0.95],
            projection: "l2".into(),
            permeabilities: vec![1e-2, 1e-4, 1e-6],
            inflow_speeds: vec![0.1, 1.0],
        }
    }
}

impl Default for ForchheimerConfig {
    fn default() -> Self {
        Self {
            length: 2.0,
            bed_height: 1.0,
            channel_height: 0.5,
            nx: 16,
            ny_bed: 8,
            ny_channel: 4,
            channel_inertia: false,
            grid: "conforming".into(),
            projection: "l2".into(),
            permeability: 0.1,
            pressure_drops: vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0],
            c_f: vec![0.0, 0.55],
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(cfg_err(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite_list(name: &str, v: &[f64]) -> CliResult<()> {
    if v.is_empty() {
        return Err(cfg_err(format!("{name} must not be empty")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(cfg_err(format!("{name} contains the non-finite value {x}")));
    }
    Ok(())
}

fn rect_ok(name: &str, r: &[f64; 4]) -> CliResult<()> {
    if r.iter().all(|v| v.is_finite()) && r[2] > r[0] && r[3] > r[1] {
        Ok(())
    } else {
        Err(cfg_err(format!("{name} must be [x0, y0, x1, y1] with x1 > x0 and y1 > y0")))
    }
}

pub fn parse_grid(s: &str) -> CliResult<GridKind> {
    s.parse().map_err(|e: ffpm::Error| cfg_err(e.to_string()))
}

pub fn parse_projection(s: &str) -> CliResult<ProjectionKind> {
    s.parse().map_err(|e: ffpm::Error| cfg_err(e.to_string()))
}

impl StudyConfig {
    pub fn defaults_for(study: StudyKind) -> Self {
        Self { study, ..Self::default() }
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// Reads `path` (if any), applies `key=value` overrides and validates.
    pub fn load(path: Option<&Path>, study: StudyKind, overrides: &[String]) -> CliResult<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| cfg_err(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| cfg_err(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        match table.get("study") {
            Some(toml::Value::String(s)) if s != &study.to_string() => {
                return Err(cfg_err(format!("config is for study '{s}', not '{study}'")));
            }
            _ => {}
        }
        table.insert("study".into(), toml::Value::String(study.to_string()));
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn newton(&self) -> NewtonConfig<f64> {
        let n = &self.newton;
        NewtonConfig {
            abs_tol: n.abs_tol,
            rel_tol: n.rel_tol,
            max_iterations: n.max_iterations,
            line_search: n.line_search,
            pivot_threshold: n.pivot_threshold,
            ..NewtonConfig::default()
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let p = &self.physics;
        positive("physics.rho", p.rho)?;
        positive("physics.mu", p.mu)?;
        if !(p.alpha_bjs.is_finite() && p.alpha_bjs >= 0.0) {
            return Err(cfg_err("physics.alpha_bjs must be non-negative"));
        }
        for (n, z) in [("physics.zeta", p.zeta), ("physics.momentum_zeta", p.momentum_zeta)] {
            if !(0.5..=1.0).contains(&z) {
                return Err(cfg_err(format!("{n} must lie in [0.5, 1], got {z}")));
            }
        }
        self.newton().validate().map_err(|e| cfg_err(e.to_string()))?;

        let c = &self.converge;
        parse_grid(&c.grid)?;
        parse_projection(&c.projection)?;
        if c.base_cells == 0 {
            return Err(cfg_err("converge.base_cells must be positive"));
        }
        if c.min_level > c.max_level {
            return Err(cfg_err("converge refinement range is empty (min_level > max_level)"));
        }
        if !(c.interface_factor > 0.0 && c.interface_factor <= 1.0) {
            return Err(cfg_err("converge.interface_factor must lie in (0, 1]"));
        }

        let o = &self.obstacle;
        rect_ok("obstacle.channel", &o.channel)?;
        rect_ok("obstacle.block", &o.block)?;
        let (ch, b) = (o.channel, o.block);
        let inside = b[0] > ch[0] && b[1] > ch[1] && b[3] < ch[3] && b[2] <= ch[2];
        if !inside {
            return Err(cfg_err("obstacle.block must lie strictly inside the channel (touching only its right side)"));
        }
        if o.coupled_sides.is_empty() {
            return Err(cfg_err("obstacle.coupled_sides must not be empty"));
        }
        if let Some(b) = o.coupled_sides.iter().find(|s| !matches!(s.as_str(), "top" | "left" | "bottom")) {
            return Err(cfg_err(format!("unknown obstacle side '{b}'")));
        }
        if o.nx == 0 || o.ny == 0 {
            return Err(cfg_err("obstacle.nx and obstacle.ny must be positive"));
        }
        if o.levels.is_empty() || o.grids.is_empty() {
            return Err(cfg_err("obstacle.levels and obstacle.grids must not be empty"));
        }
        for g in &o.grids {
            parse_grid(g)?;
        }
        parse_projection(&o.projection)?;
        finite_list("obstacle.interface_factors", &o.interface_factors)?;
        if o.interface_factors.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(cfg_err("obstacle.interface_factors must lie in (0, 1]"));
        }
        finite_list("obstacle.permeabilities", &o.permeabilities)?;
        finite_list("obstacle.inflow_speeds", &o.inflow_speeds)?;
        for &k in &o.permeabilities {
            positive("obstacle.permeabilities", k)?;
        }

        let f = &self.forchheimer;
        positive("forchheimer.length", f.length)?;
        positive("forchheimer.bed_height", f.bed_height)?;
        positive("forchheimer.channel_height", f.channel_height)?;
        positive("forchheimer.permeability", f.permeability)?;
        if f.nx == 0 || f.ny_bed == 0 || f.ny_channel == 0 {
            return Err(cfg_err("forchheimer cell counts must be positive"));
        }
        parse_grid(&f.grid)?;
        parse_projection(&f.projection)?;
        finite_list("forchheimer.pressure_drops", &f.pressure_drops)?;
        finite_list("forchheimer.c_f", &f.c_f)?;
        if f.c_f.iter().any(|&c| c < 0.0) {
            return Err(cfg_err("forchheimer.c_f must be non-negative"));
        }
        Ok(())
    }
}

/// Applies `a.b.c=value`. The value is read as a TOML literal, falling back
/// to a bare string.
pub fn apply_override(table: &mut toml::Table, item: &str) -> CliResult<()> {
    let (key, raw) = item.split_once('=').ok_or_else(|| cfg_err(format!("override '{item}' is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(cfg_err(format!("override '{item}' has an empty key")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("single key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| cfg_err(format!("override key '{key}': '{p}' is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for k in [StudyKind::Converge, StudyKind::Obstacle, StudyKind::Forchheimer] {
            let c = StudyConfig::defaults_for(k);
            c.validate().unwrap();
            assert_eq!(StudyConfig::from_toml(&c.to_toml()).unwrap(), c);
        }
    }

    #[test]
    fn overrides_typed_and_nested() {
        let c = StudyConfig::load(
            None,
            StudyKind::Obstacle,
            &["obstacle.permeabilities=[1e-3]".into(), "physics.inertia=false".into(), "output_dir=run 1".into()],
        )
        .unwrap();
        assert_eq!(c.obstacle.permeabilities, vec![1e-3]);
        assert!(!c.physics.inertia);
        assert_eq!(c.output_dir, PathBuf::from("run 1"));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            "converge.min_level=4",
            "obstacle.block=[0.2, 0.8, 1.2, 1.6]",
            "physics.zeta=0.2",
            "forchheimer.pressure_drops=[]",
            "newton.max_iterations=0",
            "unknown_key=1",
            "converge.grid=\"hexagons\"",
        ];
        for b in bad {
            assert!(matches!(StudyConfig::load(None, StudyKind::Converge, &[b.into()]), Err(CliError::Config(_))), "{b}");
        }
    }

    #[test]
    fn study_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "study = \"obstacle\"\n").unwrap();
        assert!(StudyConfig::load(Some(&p), StudyKind::Converge, &[]).is_err());
        assert!(StudyConfig::load(Some(&p), StudyKind::Obstacle, &[]).is_ok());
    }
}
