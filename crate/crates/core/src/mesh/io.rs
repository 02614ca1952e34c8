//! Plain-text mesh exchange and CSV export.
//!
//! Mesh file layout (blank lines and `#` comments are ignored):
//!
//! ```text
//! vertices <n>
//! <x> <y>                      (n lines)
//! elements <m>
//! <v0> <v1> <v2> [<v3>]        (m lines, counter-clockwise)
//! boundary <b>
//! <va> <vb> <marker>           (b lines)
//! ```

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::boxmesh::BoxMesh;
use crate::mesh::staggered::StaggeredGrid;
use crate::scalar::Scalar;

pub fn write_mesh<T: Scalar>(mesh: &BoxMesh<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices {}", mesh.n_vertices());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:e} {:e}", v.x, v.y);
    }
    let _ = writeln!(s, "elements {}", mesh.n_elements());
    for el in &mesh.elements {
        let idx: Vec<String> = el.vertices.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", idx.join(" "));
    }
    let _ = writeln!(s, "boundary {}", mesh.boundary.len());
    for b in &mesh.boundary {
        let _ = writeln!(s, "{} {} {}", b.vertices[0], b.vertices[1], b.marker);
    }
    s
}

pub fn read_mesh<T: Scalar>(text: &str) -> Result<BoxMesh<T>> {
    let mut lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    lines.reverse();
    let mut pop = || lines.pop().ok_or(Error::Parse { line: 0, msg: "unexpected end of file".into() });

    let num = |ln: usize, s: &str| -> Result<f64> {
        s.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad number '{s}'") })
    };
    let int = |ln: usize, s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad index '{s}'") })
    };
    let count = |ln: usize, l: &str, name: &str| -> Result<usize> {
        let mut it = l.split_whitespace();
        if it.next() != Some(name) {
            return Err(Error::Parse { line: ln, msg: format!("expected '{name} <count>'") });
        }
        int(ln, it.next().unwrap_or(""))
    };

    let (ln, l) = pop()?;
    let nv = count(ln, l, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = pop()?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::Parse { line: ln, msg: "vertex line needs 2 coordinates".into() });
        }
        vertices.push(Point::new(T::lit(num(ln, f[0])?), T::lit(num(ln, f[1])?)));
    }
    let (ln, l) = pop()?;
    let ne = count(ln, l, "elements")?;
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = pop()?;
        let v: Vec<usize> = l.split_whitespace().map(|s| int(ln, s)).collect::<Result<_>>()?;
        if !(v.len() == 3 || v.len() == 4) {
            return Err(Error::Parse { line: ln, msg: "element line needs 3 or 4 indices".into() });
        }
        elements.push(v);
    }
    let (ln, l) = pop()?;
    let nb = count(ln, l, "boundary")?;
    let mut edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, l) = pop()?;
        let v: Vec<usize> = l.split_whitespace().map(|s| int(ln, s)).collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(Error::Parse { line: ln, msg: "boundary line needs 'a b marker'".into() });
        }
        edges.push((v[0], v[1], v[2] as u32));
    }
    if let Some((ln, _)) = lines.pop() {
        return Err(Error::Parse { line: ln, msg: "trailing content".into() });
    }
    BoxMesh::with_boundary(vertices, elements, &edges)
}

/// Vertex positions with one value column per field: `x,y,<names...>`.
pub fn write_vertex_csv<T: Scalar, W: Write>(
    out: &mut W,
    mesh: &BoxMesh<T>,
    fields: &[(&str, &[T])],
) -> Result<()> {
    write!(out, "x,y")?;
    for (n, _) in fields {
        write!(out, ",{n}")?;
    }
    writeln!(out)?;
    for (k, v) in mesh.vertices.iter().enumerate() {
        write!(out, "{:e},{:e}", v.x, v.y)?;
        for (_, f) in fields {
            write!(out, ",{:e}", f[k])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Element connectivity as `element,v0,v1,v2,v3` (`v3` empty for triangles).
pub fn write_element_csv<T: Scalar, W: Write>(out: &mut W, mesh: &BoxMesh<T>) -> Result<()> {
    writeln!(out, "element,v0,v1,v2,v3")?;
    for (e, el) in mesh.elements.iter().enumerate() {
        let v = &el.vertices;
        let last = v.get(3).map(|x| x.to_string()).unwrap_or_default();
        writeln!(out, "{e},{},{},{},{last}", v[0], v[1], v[2])?;
    }
    Ok(())
}

/// Active cell centres with values: `x,y,<names...>`.
pub fn write_cell_csv<T: Scalar, W: Write>(
    out: &mut W,
    grid: &StaggeredGrid<T>,
    fields: &[(&str, &[T])],
) -> Result<()> {
    write!(out, "x,y")?;
    for (n, _) in fields {
        write!(out, ",{n}")?;
    }
    writeln!(out)?;
    for (k, c) in grid.cells.iter().enumerate().filter(|(_, c)| c.active) {
        write!(out, "{:e},{:e}", c.center.x, c.center.y)?;
        for (_, f) in fields {
            write!(out, ",{:e}", f[k])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
