//! Degrees of freedom and projectors of the enhanced virtual element space.

mod dofmap;
mod projectors;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::mesh::{ElementGeometry, PolygonalMesh};
use crate::quadrature::{
    build_cell_quadrature, gauss_lobatto, lobatto_parameters, poly_dim, CellQuadrature,
    MonomialBasis,
};
use crate::{Point, Result, VemError};

pub use dofmap::{build_dof_map, check_degree, DofKind, DofMap};
pub use projectors::{compute_projectors, dofi_dofi, ProjectorSet};

/// Geometry, basis, quadrature and local DoF layout of one element.
///
/// Local DoFs are ordered as vertex values, then the `k - 1` interior
/// edge values of each edge in counter-clockwise order, then moments.
#[derive(Debug, Clone)]
pub struct LocalElement {
    pub cell: usize,
    pub k: usize,
    pub geom: ElementGeometry,
    pub basis: MonomialBasis,
    pub quad: CellQuadrature,
    /// `true` for local edges on the domain boundary.
    pub boundary_edges: Vec<bool>,
    /// Gauss–Lobatto parameters of the `k + 1` edge nodes in `[0, 1]`.
    pub lobatto_params: Vec<f64>,
    /// Matching Gauss–Lobatto weights on `[0, 1]`.
    pub lobatto_weights: Vec<f64>,
}

impl LocalElement {
    pub fn new(mesh: &PolygonalMesh, cell: usize, k: usize) -> Result<Self> {
        check_degree(k)?;
        let geom = mesh.geometry(cell);
        let quad = build_cell_quadrature(&geom, 2 * k + 2).map_err(|e| match e {
            VemError::InvalidCell { reason, .. } => VemError::InvalidCell { cell, reason },
            e => e,
        })?;
        let boundary_edges = mesh
            .cell_edges(cell)
            .iter()
            .map(|&e| mesh.edges()[e].is_boundary())
            .collect();
        Ok(Self::with_parts(cell, k, geom, quad, boundary_edges))
    }

    /// Element built from a bare polygon (all edges treated as interior).
    pub fn from_polygon(vertices: Vec<Point>, k: usize) -> Result<Self> {
        check_degree(k)?;
        let geom = ElementGeometry::from_polygon(vertices);
        let quad = build_cell_quadrature(&geom, 2 * k + 2)?;
        let n = geom.n_vertices();
        Ok(Self::with_parts(0, k, geom, quad, vec![false; n]))
    }

    fn with_parts(
        cell: usize,
        k: usize,
        geom: ElementGeometry,
        quad: CellQuadrature,
        boundary_edges: Vec<bool>,
    ) -> Self {
        let (_, w) = gauss_lobatto(k + 1);
        Self {
            cell,
            k,
            basis: MonomialBasis::for_element(k, &geom),
            geom,
            quad,
            boundary_edges,
            lobatto_params: lobatto_parameters(k),
            lobatto_weights: w.iter().map(|w| 0.5 * w).collect(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.geom.n_vertices()
    }

    pub fn n_moments(&self) -> usize {
        poly_dim(self.k as i32 - 2)
    }

    pub fn n_dofs(&self) -> usize {
        self.n_vertices() * self.k + self.n_moments()
    }

    pub fn moment_offset(&self) -> usize {
        self.n_vertices() * self.k
    }

    /// Local indices of the `k + 1` DoFs on local edge `e`, ordered from its
    /// first to its second vertex.
    pub fn edge_dofs(&self, e: usize) -> Vec<usize> {
        let n = self.n_vertices();
        let k = self.k;
        let mut out = Vec::with_capacity(k + 1);
        out.push(e);
        out.extend((0..k - 1).map(|j| n + e * (k - 1) + j));
        out.push((e + 1) % n);
        out
    }

    /// Coordinates of the vertex and edge DoFs in local order.
    pub fn boundary_dof_points(&self) -> Vec<Point> {
        let n = self.n_vertices();
        let mut pts = self.geom.vertices.clone();
        for e in 0..n {
            let (a, b) = self.geom.edge_endpoints(e);
            for t in &self.lobatto_params[1..self.k] {
                pts.push(a + (b - a) * *t);
            }
        }
        pts
    }

    /// Values of the `k + 1` edge Lagrange basis functions at parameter `t`.
    pub fn edge_lagrange(&self, t: f64) -> Vec<f64> {
        lagrange_basis(&self.lobatto_params, t)
    }

    /// Evaluates the edge trace of a local DoF vector at points on local
    /// edge `e`.
    pub fn evaluate_on_edge(&self, dofs: &[f64], e: usize, points: &[Point]) -> Result<Vec<f64>> {
        if dofs.len() != self.n_dofs() {
            return Err(VemError::DimensionMismatch {
                expected: self.n_dofs(),
                got: dofs.len(),
            });
        }
        let (a, b) = self.geom.edge_endpoints(e);
        let ab = b - a;
        let len2 = ab.norm_squared();
        let ids = self.edge_dofs(e);
        points
            .iter()
            .map(|p| {
                let t = (p - a).dot(&ab) / len2;
                let foot = a + ab * t.clamp(0.0, 1.0);
                let distance = (p - foot).norm();
                if distance > 1e-10 {
                    return Err(VemError::PointOffEdge {
                        edge: e,
                        x: p.x,
                        y: p.y,
                        distance,
                    });
                }
                Ok(self
                    .edge_lagrange(t)
                    .iter()
                    .zip(&ids)
                    .map(|(l, &i)| l * dofs[i])
                    .sum())
            })
            .collect()
    }
}

/// Lagrange basis on the given nodes, evaluated at `t`.
pub fn lagrange_basis(nodes: &[f64], t: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|i| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (t - xj) / (nodes[i] - xj))
                .product()
        })
        .collect()
}

/// A virtual element space on a mesh: DoF numbering plus the local data
/// and projectors of every cell.
#[derive(Debug, Clone)]
pub struct VemSpace {
    mesh: PolygonalMesh,
    k: usize,
    dofs: DofMap,
    elements: Vec<LocalElement>,
    projectors: Vec<ProjectorSet>,
    mesh_size: f64,
}

impl VemSpace {
    pub fn new(mesh: PolygonalMesh, k: usize) -> Result<Self> {
        let dofs = build_dof_map(&mesh, k)?;
        let elements = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| LocalElement::new(&mesh, c, k))
            .collect::<Result<Vec<_>>>()?;
        let projectors = elements
            .par_iter()
            .map(compute_projectors)
            .collect::<Result<Vec<_>>>()?;
        let mesh_size = elements.iter().map(|e| e.geom.diameter).fold(0.0, f64::max);
        Ok(Self {
            mesh,
            k,
            dofs,
            elements,
            projectors,
            mesh_size,
        })
    }

    pub fn mesh(&self) -> &PolygonalMesh {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dof_map(&self) -> &DofMap {
        &self.dofs
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    pub fn elements(&self) -> &[LocalElement] {
        &self.elements
    }

    pub fn projectors(&self) -> &[ProjectorSet] {
        &self.projectors
    }

    pub fn element(&self, cell: usize) -> (&LocalElement, &ProjectorSet) {
        (&self.elements[cell], &self.projectors[cell])
    }

    /// Largest element diameter.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    /// Restriction of a global DoF vector to the local DoFs of `cell`.
    pub fn local_values(&self, cell: usize, global: &DVector<f64>) -> DVector<f64> {
        let ids = self.dofs.cell_dofs(cell);
        DVector::from_iterator(ids.len(), ids.iter().map(|&i| global[i]))
    }

    /// Local DoFs of the polynomial with monomial coefficients `coeffs`.
    pub fn polynomial_dofs(&self, cell: usize, coeffs: &[f64]) -> DVector<f64> {
        &self.projectors[cell].d * DVector::from_column_slice(coeffs)
    }

    /// DoF interpolant of a smooth function: point values on the skeleton,
    /// moments by cell quadrature.
    pub fn interpolate(&self, f: impl Fn(&Point) -> f64 + Sync) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_dofs());
        for dof in 0..self.n_dofs() {
            if let Some(p) = self.dofs.dof_point(&self.mesh, dof) {
                out[dof] = f(&p);
            }
        }
        let nm = self.dofs.moments_per_cell;
        if nm > 0 {
            let moments: Vec<Vec<f64>> = self
                .elements
                .par_iter()
                .map(|el| {
                    let mut m = vec![0.0; nm];
                    for (p, w) in el.quad.points.iter().zip(&el.quad.weights) {
                        let fv = f(p) * w;
                        for (a, v) in el.basis.eval(p).iter().take(nm).enumerate() {
                            m[a] += fv * v;
                        }
                    }
                    m.iter().map(|v| v / el.geom.area).collect()
                })
                .collect();
            for (c, m) in moments.into_iter().enumerate() {
                let base = el_moment_base(&self.dofs, c);
                for (a, v) in m.into_iter().enumerate() {
                    out[base + a] = v;
                }
            }
        }
        out
    }

    /// Scatters per-cell polynomial coefficients into a global DoF vector
    /// for a globally continuous polynomial field.
    pub fn global_polynomial_dofs(&self, coeffs_of: impl Fn(&LocalElement) -> Vec<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_dofs());
        for (c, el) in self.elements.iter().enumerate() {
            let local = self.polynomial_dofs(c, &coeffs_of(el));
            for (i, &g) in self.dofs.cell_dofs(c).iter().enumerate() {
                out[g] = local[i];
            }
        }
        out
    }
}

fn el_moment_base(dofs: &DofMap, cell: usize) -> usize {
    dofs.n_vertex_dofs + dofs.n_edge_dofs + cell * dofs.moments_per_cell
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_voronoi_mesh;

    fn square_element(k: usize) -> LocalElement {
        LocalElement::from_polygon(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            k,
        )
        .unwrap()
    }

    #[test]
    fn edge_trace_examples() {
        let el = square_element(1);
        let ones = vec![1.0; el.n_dofs()];
        let pts = [Point::new(0.3, 0.0), Point::new(0.9, 0.0)];
        for v in el.evaluate_on_edge(&ones, 0, &pts).unwrap() {
            assert!((v - 1.0).abs() < 1e-15);
        }
        let lin = vec![0.0, 1.0, 0.0, 0.0];
        let mid = el.evaluate_on_edge(&lin, 0, &[Point::new(0.5, 0.0)]).unwrap();
        assert!((mid[0] - 0.5).abs() < 1e-15);

        let el2 = square_element(2);
        // vertex values 0, midpoint of edge 0 equal to 1
        let mut bump = vec![0.0; el2.n_dofs()];
        bump[4] = 1.0;
        let q = el2.evaluate_on_edge(&bump, 0, &[Point::new(0.25, 0.0)]).unwrap();
        // Lagrange oracle on nodes {0, 1/2, 1}: 4 t (1 - t) at t = 1/4
        assert!((q[0] - 0.75).abs() < 1e-15);
        assert!(matches!(
            el2.evaluate_on_edge(&bump, 0, &[Point::new(0.25, 0.1)]),
            Err(VemError::PointOffEdge { .. })
        ));
    }

    #[test]
    fn interpolation_reproduces_polynomial_dofs() {
        let mesh = build_voronoi_mesh(15, 5, 3).unwrap();
        let space = VemSpace::new(mesh, 3).unwrap();
        let f = |p: &Point| 1.0 + p.x - 2.0 * p.y * p.x + p.y.powi(3);
        let interp = space.interpolate(f);
        for c in 0..space.mesh().n_cells() {
            let (el, proj) = space.element(c);
            let local = space.local_values(c, &interp);
            let coeffs = &proj.pi_nabla * &local;
            for p in &el.quad.points {
                assert!((el.basis.eval_poly(coeffs.as_slice(), p) - f(p)).abs() < 1e-11);
            }
        }
    }
}
