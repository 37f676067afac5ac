use nalgebra::{DMatrix, DVector};

use super::{
    cip_edge_jump, cip_volume_stab, edge_rule, grad_rows, local_diffusion, local_reaction, trace_row,
    AdvectionField, CipParameters, FormKind, LocalForm,
};
use crate::vemspace::VemSpace;
use crate::Result;

/// Coefficients of the computable CIP norm.
#[derive(Debug, Clone)]
pub struct NormParameters {
    pub epsilon: f64,
    pub sigma: f64,
    pub beta: AdvectionField,
    /// Mesh size `h` weighting the streamline term and the boundary penalty.
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CipNorm {
    pub norm: f64,
    /// Squared contribution of each cell; edge jumps are split evenly
    /// between the two adjacent cells.
    pub per_cell: Vec<f64>,
}

/// Cell-local pieces of the computable CIP norm
/// `ε a_h(v,v) + h‖β·∇Π⁰v‖² + σ c_h(v,v) + ‖ξ v‖²_Γ`,
/// with `ξ² = ε/(δh) + ½|β·n|`.
fn cell_norm_form(space: &VemSpace, cell: usize, p: &NormParameters, delta: f64) -> LocalForm {
    let (el, proj) = space.element(cell);
    let mut m = local_diffusion(space, cell).matrix * p.epsilon;
    if p.sigma != 0.0 {
        m += local_reaction(space, cell).matrix * p.sigma;
    }
    if !p.beta.is_zero() {
        for (x, w) in el.quad.points.iter().zip(&el.quad.weights) {
            let bv = p.beta.eval(x);
            let (gx, gy) = grad_rows(el, &proj.pi_zero, x);
            let s = gx * bv.x + gy * bv.y;
            m.ger(p.h * w, &s, &s, 1.0);
        }
    }
    let penalty = p.epsilon / (delta * p.h);
    for e in (0..el.n_vertices()).filter(|&e| el.boundary_edges[e]) {
        let (a, b) = el.geom.edge_endpoints(e);
        let n = el.geom.normals[e];
        let q = edge_rule(a, b, el.k);
        for ((x, t), w) in q.points.iter().zip(&q.params).zip(&q.weights) {
            let tr = trace_row(el, e, *t);
            let xi2 = penalty + 0.5 * p.beta.eval(x).dot(&n).abs();
            m.ger(w * xi2, &tr, &tr, 1.0);
        }
    }
    LocalForm {
        kind: FormKind::NormCell,
        dofs: space.dof_map().cell_dofs(cell).to_vec(),
        matrix: m,
    }
}

/// All local forms whose sum is the Gram matrix of the CIP norm. The jump
/// part `J_h` is always included, whatever `cip.cip_on` says.
pub fn cip_norm_forms(space: &VemSpace, p: &NormParameters, cip: &CipParameters) -> Result<Vec<LocalForm>> {
    let mesh = space.mesh();
    let mut forms = Vec::with_capacity(2 * mesh.n_cells() + mesh.n_edges());
    for c in 0..mesh.n_cells() {
        forms.push(cell_norm_form(space, c, p, cip.delta));
        forms.push(cip_volume_stab(space, c, cip));
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !edge.is_boundary() {
            forms.push(cip_edge_jump(space, e, cip)?);
        }
    }
    Ok(forms)
}

/// Computable CIP norm of a global DoF vector, with per-cell breakdown.
pub fn cip_norm(space: &VemSpace, v: &DVector<f64>, p: &NormParameters, cip: &CipParameters) -> Result<CipNorm> {
    let mesh = space.mesh();
    let mut per_cell = vec![0.0; mesh.n_cells()];
    for c in 0..mesh.n_cells() {
        per_cell[c] += cell_norm_form(space, c, p, cip.delta).apply(v, v);
        per_cell[c] += cip_volume_stab(space, c, cip).apply(v, v);
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        if let Some(right) = edge.right {
            let j = cip_edge_jump(space, e, cip)?.apply(v, v);
            per_cell[edge.left] += 0.5 * j;
            per_cell[right] += 0.5 * j;
        }
    }
    let total: f64 = per_cell.iter().sum();
    Ok(CipNorm {
        norm: total.max(0.0).sqrt(),
        per_cell,
    })
}

/// Dense Gram matrix of the CIP norm.
pub fn cip_norm_gram(space: &VemSpace, p: &NormParameters, cip: &CipParameters) -> Result<DMatrix<f64>> {
    let n = space.n_dofs();
    let mut g = DMatrix::zeros(n, n);
    for f in cip_norm_forms(space, p, cip)? {
        for (i, &gi) in f.dofs.iter().enumerate() {
            for (j, &gj) in f.dofs.iter().enumerate() {
                g[(gi, gj)] += f.matrix[(i, j)];
            }
        }
    }
    Ok(g)
}
