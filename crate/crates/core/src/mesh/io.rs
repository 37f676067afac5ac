//! Plain-text mesh files.
//!
//! ```text
//! vem-mesh v1 <n_vertices> <n_cells>
//! x y                 (one line per vertex)
//! m i0 i1 ... i(m-1)  (one line per cell)
//! ```

use std::io::{BufRead, Write};

use super::PolygonalMesh;
use crate::{Point, Result, VemError};

pub fn write_mesh<W: Write>(mesh: &PolygonalMesh, mut w: W) -> Result<()> {
    writeln!(w, "vem-mesh v1 {} {}", mesh.n_vertices(), mesh.n_cells())?;
    for p in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e}", p.x, p.y)?;
    }
    for cell in mesh.cells() {
        write!(w, "{}", cell.len())?;
        for v in cell {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<PolygonalMesh> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let parse_err = |line: usize, reason: &str| VemError::Parse {
        line,
        reason: reason.to_string(),
    };
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 4 || tok[0] != "vem-mesh" || tok[1] != "v1" {
        return Err(parse_err(ln, "expected `vem-mesh v1 <n_vertices> <n_cells>`"));
    }
    let nv: usize = tok[2].parse().map_err(|_| parse_err(ln, "bad vertex count"))?;
    let nc: usize = tok[3].parse().map_err(|_| parse_err(ln, "bad cell count"))?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "missing vertex line"))?;
        let line = line?;
        let xy: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(ln, "bad coordinate"))?;
        if xy.len() != 2 {
            return Err(parse_err(ln, "expected two coordinates"));
        }
        vertices.push(Point::new(xy[0], xy[1]));
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "missing cell line"))?;
        let line = line?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(ln, "bad vertex index"))?;
        if ids.is_empty() || ids[0] + 1 != ids.len() {
            return Err(parse_err(ln, "vertex count does not match the cell line"));
        }
        cells.push(ids[1..].to_vec());
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing data"));
    }
    PolygonalMesh::from_cells(vertices, cells)
}
