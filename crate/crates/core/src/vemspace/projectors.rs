//! Polynomial projectors of the enhanced virtual element space.
//!
//! All operators act on local DoF vectors and return coefficients in the
//! scaled monomial basis of the element:
//!
//! * `pi_nabla`: H¹-seminorm projection onto `P_k`, constants fixed by the
//!   boundary mean;
//! * `pi_zero`: L² projection onto `P_k`, using the moments up to `k - 2`
//!   and the enhancement constraint for the higher moments;
//! * `grad_x`, `grad_y`: L² projection of the gradient onto `[P_{k-1}]²`,
//!   obtained by integration by parts.

use nalgebra::{DMatrix, DVector};

use super::LocalElement;
use crate::quadrature::{monomial_index, poly_dim, polygon_monomial_integrals, EdgeQuadrature};
use crate::{Result, VemError};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    /// `n_k × n_dofs`
    pub pi_nabla: DMatrix<f64>,
    /// `n_k × n_dofs`
    pub pi_zero: DMatrix<f64>,
    /// `n_{k-1} × n_dofs`
    pub grad_x: DMatrix<f64>,
    pub grad_y: DMatrix<f64>,
    /// DoFs of the monomials, `n_dofs × n_k`.
    pub d: DMatrix<f64>,
    /// Stiffness Gram of the `Π∇` system (first row: boundary integrals).
    pub g: DMatrix<f64>,
    /// Right-hand side of the `Π∇` system, `n_k × n_dofs`.
    pub b: DMatrix<f64>,
    /// L² Gram `∫ m_α m_β`, `n_k × n_k`.
    pub mass: DMatrix<f64>,
}

impl ProjectorSet {
    /// `Π∇` as a map from DoFs to DoFs.
    pub fn pi_nabla_dofs(&self) -> DMatrix<f64> {
        &self.d * &self.pi_nabla
    }

    pub fn pi_zero_dofs(&self) -> DMatrix<f64> {
        &self.d * &self.pi_zero
    }

    /// Dofi-dofi stabilization matrix `(I - DΠ)ᵀ(I - DΠ)` for the given
    /// projector coefficients.
    pub fn stabilization(&self, pi: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.d.nrows();
        let r = DMatrix::identity(n, n) - &self.d * pi;
        r.transpose() * r
    }
}

/// Builds every projector of one element.
pub fn compute_projectors(el: &LocalElement) -> Result<ProjectorSet> {
    let k = el.k;
    let geom = &el.geom;
    let basis = &el.basis;
    let h = geom.diameter;
    let area = geom.area;
    let nk = basis.len();
    let nk1 = poly_dim(k as i32 - 1);
    let nm = poly_dim(k as i32 - 2);
    let nd = el.n_dofs();
    let mo = el.moment_offset();
    let singular = || VemError::SingularProjector { cell: el.cell };

    let moments = polygon_monomial_integrals(&geom.vertices, geom.centroid, h, 2 * k);
    let mut mass = DMatrix::zeros(nk, nk);
    for (i, &(ai, bi)) in basis.exponents.iter().enumerate() {
        for (j, &(aj, bj)) in basis.exponents.iter().enumerate() {
            mass[(i, j)] = moments[monomial_index(ai + aj, bi + bj)];
        }
    }

    // D: DoFs of each monomial
    let points = el.boundary_dof_points();
    let mut d = DMatrix::zeros(nd, nk);
    for (i, p) in points.iter().enumerate() {
        for (j, v) in basis.eval(p).into_iter().enumerate() {
            d[(i, j)] = v;
        }
    }
    for a in 0..nm {
        for j in 0..nk {
            d[(mo + a, j)] = mass[(a, j)] / area;
        }
    }

    // B: boundary mean row and integrated-by-parts stiffness rows
    let mut b = DMatrix::zeros(nk, nd);
    let lw = &el.lobatto_weights;
    for e in 0..geom.n_vertices() {
        let (pa, pb) = geom.edge_endpoints(e);
        let len = geom.edge_lengths[e];
        let n = geom.normals[e];
        for (j, &dof) in el.edge_dofs(e).iter().enumerate() {
            let w = lw[j] * len;
            b[(0, dof)] += w;
            let x = pa + (pb - pa) * el.lobatto_params[j];
            for (alpha, g) in basis.eval_gradients(&x).iter().enumerate().skip(1) {
                b[(alpha, dof)] += w * g.dot(&n);
            }
        }
    }
    for (alpha, &(a, bb)) in basis.exponents.iter().enumerate().skip(1) {
        if a >= 2 {
            let c = (a * (a - 1)) as f64 / (h * h);
            b[(alpha, mo + monomial_index(a - 2, bb))] -= area * c;
        }
        if bb >= 2 {
            let c = (bb * (bb - 1)) as f64 / (h * h);
            b[(alpha, mo + monomial_index(a, bb - 2))] -= area * c;
        }
    }

    // G computed directly: boundary integrals of monomials and exact
    // stiffness moments
    let mut g = DMatrix::zeros(nk, nk);
    for e in 0..geom.n_vertices() {
        let (pa, pb) = geom.edge_endpoints(e);
        let q = EdgeQuadrature::gauss(pa, pb, k / 2 + 1);
        for (x, w) in q.points.iter().zip(&q.weights) {
            for (j, v) in basis.eval(x).into_iter().enumerate() {
                g[(0, j)] += w * v;
            }
        }
    }
    for (i, &(ai, bi)) in basis.exponents.iter().enumerate().skip(1) {
        for (j, &(aj, bj)) in basis.exponents.iter().enumerate() {
            let mut s = 0.0;
            if ai > 0 && aj > 0 {
                s += (ai * aj) as f64 * moments[monomial_index(ai + aj - 2, bi + bj)];
            }
            if bi > 0 && bj > 0 {
                s += (bi * bj) as f64 * moments[monomial_index(ai + aj, bi + bj - 2)];
            }
            g[(i, j)] = s / (h * h);
        }
    }

    let pi_nabla = g.clone().lu().solve(&b).ok_or_else(singular)?;

    // C: moments of Π⁰ v against every monomial
    let mut c = DMatrix::zeros(nk, nd);
    for a in 0..nm {
        c[(a, mo + a)] = area;
    }
    let h_pin = &mass * &pi_nabla;
    for a in nm..nk {
        c.set_row(a, &h_pin.row(a));
    }
    let mass_chol = mass.clone().cholesky().ok_or_else(singular)?;
    let pi_zero = mass_chol.solve(&c);

    // E: ∫ ∂v m_α = -∫ v ∂m_α + ∫_{∂E} v m_α n
    let mut ex = DMatrix::zeros(nk1, nd);
    let mut ey = DMatrix::zeros(nk1, nd);
    for e in 0..geom.n_vertices() {
        let (pa, pb) = geom.edge_endpoints(e);
        let len = geom.edge_lengths[e];
        let n = geom.normals[e];
        for (j, &dof) in el.edge_dofs(e).iter().enumerate() {
            let w = lw[j] * len;
            let x = pa + (pb - pa) * el.lobatto_params[j];
            let vals = basis.eval(&x);
            for alpha in 0..nk1 {
                ex[(alpha, dof)] += w * vals[alpha] * n.x;
                ey[(alpha, dof)] += w * vals[alpha] * n.y;
            }
        }
    }
    for (alpha, &(a, bb)) in basis.exponents.iter().enumerate().take(nk1) {
        if a >= 1 {
            ex[(alpha, mo + monomial_index(a - 1, bb))] -= area * a as f64 / h;
        }
        if bb >= 1 {
            ey[(alpha, mo + monomial_index(a, bb - 1))] -= area * bb as f64 / h;
        }
    }
    let mass1 = mass.view((0, 0), (nk1, nk1)).into_owned();
    let chol1 = mass1.cholesky().ok_or_else(singular)?;
    let grad_x = chol1.solve(&ex);
    let grad_y = chol1.solve(&ey);

    let ok = [&pi_nabla, &pi_zero, &grad_x, &grad_y]
        .iter()
        .all(|m| m.iter().all(|v| v.is_finite()));
    if !ok {
        return Err(singular());
    }
    Ok(ProjectorSet {
        pi_nabla,
        pi_zero,
        grad_x,
        grad_y,
        d,
        g,
        b,
        mass,
    })
}

/// Dofi-dofi stabilization `Σ_i [(I - Π)u]_i [(I - Π)v]_i` for the
/// projector given by its monomial coefficients `pi`.
pub fn dofi_dofi(
    proj: &ProjectorSet,
    pi: &DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let n = proj.d.nrows();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(VemError::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let ru = u - &proj.d * (pi * u);
    let rv = v - &proj.d * (pi * v);
    Ok(ru.dot(&rv))
}
