use nalgebra::DVector;

use super::{edge_rule, reaction_matrix};
use crate::vemspace::VemSpace;
use crate::{Result, VemError};

/// Oswald quasi-interpolant of a piecewise polynomial field given by the
/// monomial coefficients of each cell.
///
/// Vertex and edge DoFs are area-weighted averages of the adjacent cells'
/// values; moments are those of the cell's own polynomial.
pub fn oswald_interpolate(space: &VemSpace, coeffs: &[Vec<f64>]) -> Result<DVector<f64>> {
    let n_cells = space.mesh().n_cells();
    if coeffs.len() != n_cells {
        return Err(VemError::DimensionMismatch {
            expected: n_cells,
            got: coeffs.len(),
        });
    }
    let map = space.dof_map();
    let mut sum = DVector::zeros(space.n_dofs());
    let mut weight = DVector::zeros(space.n_dofs());
    for (c, el) in space.elements().iter().enumerate() {
        let cf = &coeffs[c];
        if cf.len() != el.basis.len() {
            return Err(VemError::DimensionMismatch {
                expected: el.basis.len(),
                got: cf.len(),
            });
        }
        let dofs = map.cell_dofs(c);
        let area = el.geom.area;
        for (i, p) in el.boundary_dof_points().iter().enumerate() {
            sum[dofs[i]] += area * el.basis.eval_poly(cf, p);
            weight[dofs[i]] += area;
        }
        let proj = &space.projectors()[c];
        let hc = &proj.mass * DVector::from_column_slice(cf);
        for a in 0..el.n_moments() {
            sum[dofs[el.moment_offset() + a]] = hc[a] / area;
            weight[dofs[el.moment_offset() + a]] = 1.0;
        }
    }
    Ok(sum.component_div(&weight))
}

/// `‖p_left - p_right‖_{0,e}` of a piecewise polynomial field on `edge`;
/// zero on boundary edges.
pub fn polynomial_jump_l2(space: &VemSpace, coeffs: &[Vec<f64>], edge: usize) -> f64 {
    let mesh = space.mesh();
    let ed = &mesh.edges()[edge];
    let Some(right) = ed.right else {
        return 0.0;
    };
    let (bl, br) = (&space.elements()[ed.left].basis, &space.elements()[right].basis);
    let a = mesh.vertices()[ed.vertices[0]];
    let b = mesh.vertices()[ed.vertices[1]];
    let q = edge_rule(a, b, space.degree());
    q.points
        .iter()
        .zip(&q.weights)
        .map(|(x, w)| {
            let j = bl.eval_poly(&coeffs[ed.left], x) - br.eval_poly(&coeffs[right], x);
            w * j * j
        })
        .sum::<f64>()
        .sqrt()
}

/// Largest ratio over cells of `‖(I - π)p‖_{0,E}` to
/// `h^{1/2} Σ_{e ∈ F_E} ‖[p]‖_{0,e}`, where `F_E` holds every edge touching a
/// vertex of `E` and `h` is the mesh size. The cell norm is the `c_h^E`
/// surrogate of the L² norm. Cells whose neighbourhood has no jump are skipped.
pub fn oswald_constant(space: &VemSpace, coeffs: &[Vec<f64>]) -> Result<f64> {
    let pi = oswald_interpolate(space, coeffs)?;
    let mesh = space.mesh();
    let jumps: Vec<f64> = (0..mesh.n_edges())
        .map(|e| polynomial_jump_l2(space, coeffs, e))
        .collect();
    let mut vertex_edges = vec![Vec::new(); mesh.n_vertices()];
    for (i, e) in mesh.edges().iter().enumerate() {
        vertex_edges[e.vertices[0]].push(i);
        vertex_edges[e.vertices[1]].push(i);
    }
    let sqrt_h = space.mesh_size().sqrt();
    let mut worst: f64 = 0.0;
    for c in 0..mesh.n_cells() {
        let (el, proj) = space.element(c);
        let diff = space.polynomial_dofs(c, &coeffs[c]) - space.local_values(c, &pi);
        let err = diff.dot(&(reaction_matrix(el, proj) * &diff)).max(0.0).sqrt();
        let mut touching: Vec<usize> = mesh.cells()[c]
            .iter()
            .flat_map(|&v| vertex_edges[v].iter().copied())
            .collect();
        touching.sort_unstable();
        touching.dedup();
        let bound: f64 = touching.iter().map(|&e| jumps[e]).sum::<f64>() * sqrt_h;
        if bound > 0.0 {
            worst = worst.max(err / bound);
        }
    }
    Ok(worst)
}
