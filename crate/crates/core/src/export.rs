//! CSV and VTK output consumed by the plotting scripts.

use std::io::Write;

use nalgebra::DVector;

use crate::experiments::ConvergenceTable;
use crate::vemspace::{DofKind, VemSpace};
use crate::Result;

pub const CSV_HEADER: &str = "preset,mesh,k,cip,level,h,ndof,e_h1,e_l2,cip_norm,rate_h1,rate_l2";

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

pub fn write_convergence_rows<W: Write>(table: &ConvergenceTable, mut w: W) -> Result<()> {
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            table.preset,
            table.family.name(),
            table.k,
            on_off(table.cip_on),
            r.level,
            fmt_f64(r.h),
            r.n_dofs,
            fmt_f64(r.e_h1),
            fmt_f64(r.e_l2),
            fmt_f64(r.cip_norm),
            fmt_opt(r.rate_h1),
            fmt_opt(r.rate_l2),
        )?;
    }
    Ok(())
}

/// Header plus one row per level for each table.
pub fn write_convergence_csv<W: Write>(tables: &[&ConvergenceTable], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for t in tables {
        write_convergence_rows(t, &mut w)?;
    }
    Ok(())
}

/// Legacy VTK polydata with each cell's `Π⁰u_h` sampled at its vertices.
/// Points are duplicated per cell so the field may jump across edges.
pub fn write_vtk_field<W: Write>(space: &VemSpace, u_h: &DVector<f64>, name: &str, mut w: W) -> Result<()> {
    let n_points: usize = space.elements().iter().map(|e| e.n_vertices()).sum();
    let n_cells = space.elements().len();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{name}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {n_points} double")?;
    for el in space.elements() {
        for p in &el.geom.vertices {
            writeln!(w, "{} {} 0", fmt_f64(p.x), fmt_f64(p.y))?;
        }
    }
    writeln!(w, "POLYGONS {n_cells} {}", n_points + n_cells)?;
    let mut next = 0;
    for el in space.elements() {
        let m = el.n_vertices();
        write!(w, "{m}")?;
        for i in next..next + m {
            write!(w, " {i}")?;
        }
        writeln!(w)?;
        next += m;
    }
    writeln!(w, "POINT_DATA {n_points}")?;
    writeln!(w, "SCALARS {name} double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    let mut means = Vec::with_capacity(n_cells);
    for (c, el) in space.elements().iter().enumerate() {
        let coeffs = &space.projectors()[c].pi_zero * space.local_values(c, u_h);
        for p in &el.geom.vertices {
            writeln!(w, "{}", fmt_f64(el.basis.eval_poly(coeffs.as_slice(), p)))?;
        }
        means.push(el.quad.integrate(|p| el.basis.eval_poly(coeffs.as_slice(), p)) / el.geom.area);
    }
    writeln!(w, "CELL_DATA {n_cells}")?;
    writeln!(w, "SCALARS {name}_mean double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for m in means {
        writeln!(w, "{}", fmt_f64(m))?;
    }
    Ok(())
}

/// One row per DoF: index, kind, location (empty for moments) and value.
pub fn write_dofs_csv<W: Write>(space: &VemSpace, u_h: &DVector<f64>, mut w: W) -> Result<()> {
    writeln!(w, "dof,kind,x,y,value")?;
    let map = space.dof_map();
    for i in 0..space.n_dofs() {
        let kind = match map.kind(i) {
            DofKind::Vertex(_) => "vertex",
            DofKind::EdgePoint { .. } => "edge",
            DofKind::Moment { .. } => "moment",
        };
        let (x, y) = match map.dof_point(space.mesh(), i) {
            Some(p) => (fmt_f64(p.x), fmt_f64(p.y)),
            None => (String::new(), String::new()),
        };
        writeln!(w, "{i},{kind},{x},{y},{}", fmt_f64(u_h[i]))?;
    }
    Ok(())
}
