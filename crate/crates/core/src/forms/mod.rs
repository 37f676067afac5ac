//! Local bilinear and linear forms of the CIP-stabilized scheme.
//!
//! Every matrix uses the convention `M[test, trial]`, so that the form
//! value is `vᵀ M u`.

mod advection;
mod norm;
mod oswald;

use nalgebra::{DMatrix, DVector};

use crate::quadrature::EdgeQuadrature;
use crate::vemspace::{LocalElement, ProjectorSet, VemSpace};
use crate::{Point, Result, VemError, Vector};

pub use advection::AdvectionField;
pub use norm::{cip_norm, cip_norm_forms, cip_norm_gram, CipNorm, NormParameters};
pub use oswald::{oswald_constant, oswald_interpolate, polynomial_jump_l2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormKind {
    Diffusion,
    AdvectionSkew,
    Reaction,
    CipEdgeJump,
    CipVolume,
    Nitsche,
    /// Cell part of the computable CIP norm.
    NormCell,
}

/// Dense matrix over a list of global DoFs.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalForm {
    pub kind: FormKind,
    /// Global DoF indices of the rows and columns.
    pub dofs: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl LocalForm {
    fn on_cell(space: &VemSpace, cell: usize, kind: FormKind, matrix: DMatrix<f64>) -> Self {
        Self {
            kind,
            dofs: space.dof_map().cell_dofs(cell).to_vec(),
            matrix,
        }
    }

    /// `vᵀ M u` for global vectors.
    pub fn apply(&self, v: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let mut s = 0.0;
        for (i, &gi) in self.dofs.iter().enumerate() {
            for (j, &gj) in self.dofs.iter().enumerate() {
                s += v[gi] * self.matrix[(i, j)] * u[gj];
            }
        }
        s
    }
}

pub const DEFAULT_DELTA: f64 = 0.1;

/// Nitsche penalty, CIP switch and per-edge CIP weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CipParameters {
    pub delta: f64,
    pub cip_on: bool,
    /// `γ_e = max |β·n_e|` over the edge quadrature points, one per edge.
    pub gamma: Vec<f64>,
}

impl CipParameters {
    pub fn new(space: &VemSpace, beta: &AdvectionField, delta: f64, cip_on: bool) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(VemError::InvalidParameter(format!(
                "Nitsche parameter must be positive, got {delta}"
            )));
        }
        let k = space.degree();
        let mesh = space.mesh();
        let gamma = mesh
            .edges()
            .iter()
            .map(|e| {
                let a = mesh.vertices()[e.vertices[0]];
                let b = mesh.vertices()[e.vertices[1]];
                edge_gamma(a, b, beta, k)
            })
            .collect();
        Ok(Self {
            delta,
            cip_on,
            gamma,
        })
    }

    /// `γ(∂E)`: largest `γ_e` over the edges of `cell`.
    pub fn cell_gamma(&self, space: &VemSpace, cell: usize) -> f64 {
        space
            .mesh()
            .cell_edges(cell)
            .iter()
            .map(|&e| self.gamma[e])
            .fold(0.0, f64::max)
    }
}

pub(crate) fn edge_rule(a: Point, b: Point, k: usize) -> EdgeQuadrature {
    EdgeQuadrature::gauss(a, b, k + 2)
}

fn unit_normal(a: Point, b: Point) -> Vector {
    let t = (b - a).normalize();
    Vector::new(t.y, -t.x)
}

pub fn edge_gamma(a: Point, b: Point, beta: &AdvectionField, k: usize) -> f64 {
    let n = unit_normal(a, b);
    edge_rule(a, b, k)
        .points
        .iter()
        .map(|p| beta.eval(p).dot(&n).abs())
        .fold(0.0, f64::max)
}

/// Values of the local basis functions' traces on local edge `e` at edge
/// parameter `t`, as a dense row over the local DoFs.
pub(crate) fn trace_row(el: &LocalElement, e: usize, t: f64) -> DVector<f64> {
    let mut row = DVector::zeros(el.n_dofs());
    for (l, &i) in el.edge_lagrange(t).iter().zip(&el.edge_dofs(e)) {
        row[i] = *l;
    }
    row
}

/// Row vector `x ↦ Σ_α m_α(x) P[α, ·]`.
pub(crate) fn poly_row(el: &LocalElement, p: &DMatrix<f64>, x: &Point) -> DVector<f64> {
    let m = DVector::from_vec(el.basis.eval(x));
    p.tr_mul(&m)
}

/// Rows of the gradient `∇(m·P)` at `x`.
pub(crate) fn grad_rows(el: &LocalElement, p: &DMatrix<f64>, x: &Point) -> (DVector<f64>, DVector<f64>) {
    let g = el.basis.eval_gradients(x);
    let gx = DVector::from_iterator(g.len(), g.iter().map(|v| v.x));
    let gy = DVector::from_iterator(g.len(), g.iter().map(|v| v.y));
    (p.tr_mul(&gx), p.tr_mul(&gy))
}

/// Consistency part `∫ Π⁰_{k-1}∇u · Π⁰_{k-1}∇v` of the diffusion form.
pub fn diffusion_consistency(proj: &ProjectorSet) -> DMatrix<f64> {
    let nk1 = proj.grad_x.nrows();
    let h1 = proj.mass.view((0, 0), (nk1, nk1));
    proj.grad_x.transpose() * h1 * &proj.grad_x + proj.grad_y.transpose() * h1 * &proj.grad_y
}

/// `a_h^E`: projected gradients plus dofi-dofi stabilization of `(I - Π∇)`.
pub fn local_diffusion(space: &VemSpace, cell: usize) -> LocalForm {
    let proj = &space.projectors()[cell];
    let m = diffusion_consistency(proj) + proj.stabilization(&proj.pi_nabla);
    LocalForm::on_cell(space, cell, FormKind::Diffusion, m)
}

/// Non-symmetrized `b_h^E(u, v) = ∫ (β·∇Π⁰u) Π⁰v + ∫_{∂E} (β·n)(u - Π⁰u) v`.
pub fn local_advection(el: &LocalElement, proj: &ProjectorSet, beta: &AdvectionField) -> DMatrix<f64> {
    let nd = el.n_dofs();
    let mut b = DMatrix::zeros(nd, nd);
    if beta.is_zero() {
        return b;
    }
    let p0 = &proj.pi_zero;
    for (x, w) in el.quad.points.iter().zip(&el.quad.weights) {
        let bv = beta.eval(x);
        let test = poly_row(el, p0, x);
        let (gx, gy) = grad_rows(el, p0, x);
        let trial = gx * bv.x + gy * bv.y;
        b.ger(*w, &test, &trial, 1.0);
    }
    for e in 0..el.n_vertices() {
        let (a, bb) = el.geom.edge_endpoints(e);
        let n = el.geom.normals[e];
        let q = edge_rule(a, bb, el.k);
        for ((x, t), w) in q.points.iter().zip(&q.params).zip(&q.weights) {
            let bn = beta.eval(x).dot(&n);
            if bn == 0.0 {
                continue;
            }
            let tr = trace_row(el, e, *t);
            let trial = &tr - poly_row(el, p0, x);
            b.ger(w * bn, &tr, &trial, 1.0);
        }
    }
    b
}

/// `½(B - Bᵀ)` of [`local_advection`].
pub fn local_advection_skew(space: &VemSpace, cell: usize, beta: &AdvectionField) -> LocalForm {
    let (el, proj) = space.element(cell);
    let b = local_advection(el, proj, beta);
    let skew = (&b - b.transpose()) * 0.5;
    LocalForm::on_cell(space, cell, FormKind::AdvectionSkew, skew)
}

pub fn reaction_matrix(el: &LocalElement, proj: &ProjectorSet) -> DMatrix<f64> {
    let p0 = &proj.pi_zero;
    p0.transpose() * &proj.mass * p0 + proj.stabilization(p0) * el.geom.area
}

/// `c_h^E`: L² projections plus `|E|`-scaled stabilization of `(I - Π⁰)`.
pub fn local_reaction(space: &VemSpace, cell: usize) -> LocalForm {
    let (el, proj) = space.element(cell);
    LocalForm::on_cell(space, cell, FormKind::Reaction, reaction_matrix(el, proj))
}

/// Gradient-jump penalty `γ_e h_e² ∫_e [∇Π⁰u]·[∇Π⁰v]` over the union of the
/// DoFs of the two cells sharing `edge`.
pub fn cip_edge_jump(space: &VemSpace, edge: usize, params: &CipParameters) -> Result<LocalForm> {
    let mesh = space.mesh();
    let ed = mesh.edges().get(edge).ok_or(VemError::OutOfRange {
        index: edge,
        len: mesh.n_edges(),
    })?;
    let right = ed.right.ok_or(VemError::BoundaryEdge(edge))?;
    let left = ed.left;
    let map = space.dof_map();

    let mut dofs: Vec<usize> = map.cell_dofs(left).to_vec();
    let left_pos: Vec<usize> = (0..dofs.len()).collect();
    let right_pos: Vec<usize> = map
        .cell_dofs(right)
        .iter()
        .map(|g| match dofs.iter().position(|d| d == g) {
            Some(i) => i,
            None => {
                dofs.push(*g);
                dofs.len() - 1
            }
        })
        .collect();
    let n = dofs.len();
    let mut m = DMatrix::zeros(n, n);
    let gamma = params.gamma[edge];
    if gamma > 0.0 {
        let a = mesh.vertices()[ed.vertices[0]];
        let b = mesh.vertices()[ed.vertices[1]];
        let he2 = (b - a).norm_squared();
        let (el_l, pr_l) = space.element(left);
        let (el_r, pr_r) = space.element(right);
        let q = edge_rule(a, b, space.degree());
        for (x, w) in q.points.iter().zip(&q.weights) {
            let mut jx = DVector::zeros(n);
            let mut jy = DVector::zeros(n);
            let (lx, ly) = grad_rows(el_l, &pr_l.pi_zero, x);
            let (rx, ry) = grad_rows(el_r, &pr_r.pi_zero, x);
            for (i, &p) in left_pos.iter().enumerate() {
                jx[p] += lx[i];
                jy[p] += ly[i];
            }
            for (i, &p) in right_pos.iter().enumerate() {
                jx[p] -= rx[i];
                jy[p] -= ry[i];
            }
            let s = gamma * he2 * w;
            m.ger(s, &jx, &jx, 1.0);
            m.ger(s, &jy, &jy, 1.0);
        }
    }
    Ok(LocalForm {
        kind: FormKind::CipEdgeJump,
        dofs,
        matrix: m,
    })
}

/// `γ(∂E) h_E S((I - Π∇)u, (I - Π∇)v)`.
pub fn cip_volume_stab(space: &VemSpace, cell: usize, params: &CipParameters) -> LocalForm {
    let (el, proj) = space.element(cell);
    let scale = params.cell_gamma(space, cell) * el.geom.diameter;
    let m = proj.stabilization(&proj.pi_nabla) * scale;
    LocalForm::on_cell(space, cell, FormKind::CipVolume, m)
}

/// Nitsche terms on the boundary edges of `cell`:
/// `-ε⟨∇Π∇u·n, v⟩ + ε/(δh_E)⟨u, v⟩ + ½⟨|β·n| u, v⟩`.
pub fn nitsche_boundary(
    space: &VemSpace,
    cell: usize,
    beta: &AdvectionField,
    epsilon: f64,
    delta: f64,
) -> LocalForm {
    let (el, proj) = space.element(cell);
    let nd = el.n_dofs();
    let mut m = DMatrix::zeros(nd, nd);
    let penalty = epsilon / (delta * el.geom.diameter);
    for e in (0..el.n_vertices()).filter(|&e| el.boundary_edges[e]) {
        let (a, b) = el.geom.edge_endpoints(e);
        let n = el.geom.normals[e];
        let q = edge_rule(a, b, el.k);
        for ((x, t), w) in q.points.iter().zip(&q.params).zip(&q.weights) {
            let tr = trace_row(el, e, *t);
            let (gx, gy) = grad_rows(el, &proj.pi_nabla, x);
            let flux = gx * n.x + gy * n.y;
            let mass = penalty + 0.5 * beta.eval(x).dot(&n).abs();
            m.ger(*w * mass, &tr, &tr, 1.0);
            m.ger(-*w * epsilon, &tr, &flux, 1.0);
        }
    }
    LocalForm::on_cell(space, cell, FormKind::Nitsche, m)
}

/// Boundary-data load matching [`nitsche_boundary`]:
/// `⟨(ε/(δh_E) + ½(|β·n| - β·n)) g, v⟩`.
pub fn nitsche_data_load(
    space: &VemSpace,
    cell: usize,
    beta: &AdvectionField,
    epsilon: f64,
    delta: f64,
    g: &(dyn Fn(&Point) -> f64 + Sync),
) -> DVector<f64> {
    let el = &space.elements()[cell];
    let mut f = DVector::zeros(el.n_dofs());
    let penalty = epsilon / (delta * el.geom.diameter);
    for e in (0..el.n_vertices()).filter(|&e| el.boundary_edges[e]) {
        let (a, b) = el.geom.edge_endpoints(e);
        let n = el.geom.normals[e];
        let q = edge_rule(a, b, el.k);
        for ((x, t), w) in q.points.iter().zip(&q.params).zip(&q.weights) {
            let bn = beta.eval(x).dot(&n);
            let s = w * (penalty + 0.5 * (bn.abs() - bn)) * g(x);
            f.axpy(s, &trace_row(el, e, *t), 1.0);
        }
    }
    f
}

/// `∫_E f Π⁰v`.
pub fn local_load(space: &VemSpace, cell: usize, f: &(dyn Fn(&Point) -> f64 + Sync)) -> DVector<f64> {
    let (el, proj) = space.element(cell);
    let mut moments = DVector::zeros(el.basis.len());
    for (x, w) in el.quad.points.iter().zip(&el.quad.weights) {
        let fv = w * f(x);
        for (a, m) in el.basis.eval(x).into_iter().enumerate() {
            moments[a] += fv * m;
        }
    }
    proj.pi_zero.tr_mul(&moments)
}
