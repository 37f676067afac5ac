use crate::mesh::PolygonalMesh;
use crate::quadrature::{lobatto_parameters, poly_dim};
use crate::{Point, Result, VemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Vertex(usize),
    /// `index`-th interior Gauss–Lobatto point of `edge`, counted along the
    /// stored edge direction.
    EdgePoint { edge: usize, index: usize },
    /// Moment against the `index`-th scaled monomial of degree `<= k - 2`.
    Moment { cell: usize, index: usize },
}

/// Global numbering: vertex values first, then edge values edge by edge,
/// then cell moments cell by cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub degree: usize,
    pub n_dofs: usize,
    pub n_vertex_dofs: usize,
    pub n_edge_dofs: usize,
    pub moments_per_cell: usize,
    cell_dofs: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    kinds: Vec<DofKind>,
}

pub fn check_degree(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(VemError::UnsupportedDegree(k))
    }
}

pub fn build_dof_map(mesh: &PolygonalMesh, k: usize) -> Result<DofMap> {
    check_degree(k)?;
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let per_edge = k - 1;
    let n_mom = poly_dim(k as i32 - 2);
    let edge_base = nv;
    let mom_base = nv + per_edge * ne;
    let n_dofs = mom_base + n_mom * mesh.n_cells();

    let mut kinds = Vec::with_capacity(n_dofs);
    let mut boundary = Vec::with_capacity(n_dofs);
    for v in 0..nv {
        kinds.push(DofKind::Vertex(v));
        boundary.push(mesh.is_boundary_vertex(v));
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        for index in 0..per_edge {
            kinds.push(DofKind::EdgePoint { edge: e, index });
            boundary.push(edge.is_boundary());
        }
    }
    for cell in 0..mesh.n_cells() {
        for index in 0..n_mom {
            kinds.push(DofKind::Moment { cell, index });
            boundary.push(false);
        }
    }

    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    for (c, cell) in mesh.cells().iter().enumerate() {
        let m = cell.len();
        let mut dofs = Vec::with_capacity(m * k + n_mom);
        dofs.extend_from_slice(cell);
        for i in 0..m {
            let e = mesh.cell_edges(c)[i];
            let forward = mesh.traverses_forward(c, i);
            for j in 0..per_edge {
                let g = if forward { j } else { per_edge - 1 - j };
                dofs.push(edge_base + e * per_edge + g);
            }
        }
        dofs.extend((0..n_mom).map(|a| mom_base + c * n_mom + a));
        cell_dofs.push(dofs);
    }
    Ok(DofMap {
        degree: k,
        n_dofs,
        n_vertex_dofs: nv,
        n_edge_dofs: per_edge * ne,
        moments_per_cell: n_mom,
        cell_dofs,
        boundary,
        kinds,
    })
}

impl DofMap {
    /// Global indices of the local DoFs of `cell`: vertices, edge points
    /// (counter-clockwise), moments.
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell]
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn kind(&self, dof: usize) -> DofKind {
        self.kinds[dof]
    }

    pub fn kinds(&self) -> &[DofKind] {
        &self.kinds
    }

    /// Location of a vertex or edge DoF; `None` for moments.
    pub fn dof_point(&self, mesh: &PolygonalMesh, dof: usize) -> Option<Point> {
        match self.kinds[dof] {
            DofKind::Vertex(v) => Some(mesh.vertices()[v]),
            DofKind::EdgePoint { edge, index } => {
                let t = lobatto_parameters(self.degree)[index + 1];
                let [a, b] = mesh.edges()[edge].vertices;
                let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                Some(pa + (pb - pa) * t)
            }
            DofKind::Moment { .. } => None,
        }
    }
}
