//! Files written into the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ffpm::mesh::io::{write_cell_csv, write_vertex_csv};
use ffpm::solver::{DofKind, NewtonReport};
use ffpm::{Problem, State};

use crate::error::CliResult;

/// Output directory with `newton/` and `fields/` subdirectories.
#[derive(Clone, Debug)]
pub struct OutputDir {
    pub root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root.join("newton"))?;
        fs::create_dir_all(root.join("fields"))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn write(&self, rel: &str, text: &str) -> CliResult<()> {
        fs::write(self.root.join(rel), text)?;
        Ok(())
    }

    pub fn newton_log(&self, tag: &str, rep: &NewtonReport) -> CliResult<()> {
        self.write(&format!("newton/{tag}.csv"), &rep.to_csv())
    }

    /// Free-flow cells, free-flow faces and porous vertices of one solve.
    pub fn fields(&self, tag: &str, prob: &Problem, state: &State) -> CliResult<()> {
        if let Some(ff) = &prob.ff {
            let mut p = vec![0.0; ff.grid.n_cells()];
            for (k, kind) in prob.layout.kinds.iter().enumerate() {
                if let DofKind::FfPressure(c) = *kind {
                    p[c] = state.values[k];
                }
            }
            let mut buf = Vec::new();
            write_cell_csv(&mut buf, &ff.grid, &[("p", &p)])?;
            fs::write(self.root.join(format!("fields/{tag}_ff_cells.csv")), buf)?;
            self.write(&format!("fields/{tag}_ff_faces.csv"), &face_csv(prob, state))?;
        }
        if let Some(pm) = &prob.pm {
            let p: Vec<f64> = (0..pm.mesh.n_vertices()).map(|v| state.values[prob.layout.vertex_dof[v]]).collect();
            let mut buf = Vec::new();
            write_vertex_csv(&mut buf, &pm.mesh, &[("p", &p)])?;
            fs::write(self.root.join(format!("fields/{tag}_pm_vertices.csv")), buf)?;
        }
        Ok(())
    }
}

/// Normal velocity of every live face, Dirichlet values included.
fn face_csv(prob: &Problem, state: &State) -> String {
    let ff = prob.ff.as_ref().expect("free flow");
    let mut s = String::from("x,y,axis,v\n");
    for f in ff.grid.live_faces() {
        let face = &ff.grid.faces[f];
        let v = ff.face_value(&prob.layout, f, &state.values);
        let _ = writeln!(s, "{:e},{:e},{},{:e}", face.center.x, face.center.y, face.axis.index(), v);
    }
    s
}
