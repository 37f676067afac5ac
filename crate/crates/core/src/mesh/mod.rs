//! Polygonal meshes of the unit square.
//!
//! A [`PolygonalMesh`] stores vertices, counter-clockwise cells and the edge
//! graph with two-cell adjacency. Meshes are immutable once built; all
//! generators go through [`PolygonalMesh::from_cells`], which validates the
//! topology.

mod io;
mod quad;
mod quality;
mod voronoi;

use std::collections::{BTreeSet, HashMap};

use crate::{Point, Result, Vector, VemError};

pub use io::{read_mesh, write_mesh};
pub use quad::build_distorted_quad_mesh;
pub use quality::{check_mesh_assumptions, chebyshev_center, MeshQualityReport};
pub use voronoi::{build_voronoi_mesh, centroidal_voronoi, VoronoiTessellation};

/// An oriented mesh edge.
///
/// `left` is the cell that traverses `vertices[0] -> vertices[1]` in its
/// counter-clockwise loop; `right` traverses the edge backwards and is
/// `None` on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// `cell_edges[c][i]` is the edge from `cells[c][i]` to `cells[c][i + 1]`.
    cell_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
}

/// Metric data of one polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub vertices: Vec<Point>,
    pub area: f64,
    pub diameter: f64,
    pub centroid: Point,
    pub edge_lengths: Vec<f64>,
    pub normals: Vec<Vector>,
}

impl ElementGeometry {
    pub fn from_polygon(vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let area = signed_area(&vertices);
        let centroid = polygon_centroid(&vertices);
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((vertices[i] - vertices[j]).norm());
            }
        }
        let mut edge_lengths = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        for i in 0..n {
            let t = vertices[(i + 1) % n] - vertices[i];
            let len = t.norm();
            edge_lengths.push(len);
            normals.push(Vector::new(t.y / len, -t.x / len));
        }
        Self {
            vertices,
            area,
            diameter,
            centroid,
            edge_lengths,
            normals,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// Endpoints of local edge `i`, in counter-clockwise order.
    pub fn edge_endpoints(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }
}

/// Shoelace area, positive for counter-clockwise loops.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    0.5 * a
}

pub fn polygon_centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    // shift to the first vertex for accuracy
    let o = poly[0];
    for i in 0..n {
        let p = poly[i] - o;
        let q = poly[(i + 1) % n] - o;
        let cross = p.x * q.y - q.x * p.y;
        a += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point::new(o.x + cx / (3.0 * a), o.y + cy / (3.0 * a))
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    fn orient(p: Point, q: Point, r: Point) -> f64 {
        (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// True if no two non-adjacent sides of the loop cross.
pub fn is_simple_polygon(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

impl PolygonalMesh {
    /// Builds the edge graph from vertex coordinates and counter-clockwise
    /// cell loops, validating orientation, simplicity and conformity.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let nv = vertices.len();
        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let m = cell.len();
            if m < 3 {
                return Err(VemError::InvalidCell {
                    cell: c,
                    reason: format!("only {m} vertices"),
                });
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= nv) {
                return Err(VemError::InvalidCell {
                    cell: c,
                    reason: format!("vertex index {bad} out of range"),
                });
            }
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&poly);
            if !(area > 0.0) {
                return Err(VemError::InvalidCell {
                    cell: c,
                    reason: format!("non-positive signed area {area:e} (not counter-clockwise)"),
                });
            }
            if !is_simple_polygon(&poly) {
                return Err(VemError::InvalidCell {
                    cell: c,
                    reason: "self-intersecting polygon".into(),
                });
            }
            let mut local = Vec::with_capacity(m);
            for i in 0..m {
                let a = cell[i];
                let b = cell[(i + 1) % m];
                if a == b {
                    return Err(VemError::InvalidCell {
                        cell: c,
                        reason: "repeated consecutive vertex".into(),
                    });
                }
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        local.push(edges.len());
                        edges.push(Edge {
                            vertices: [a, b],
                            left: c,
                            right: None,
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.vertices != [b, a] || edge.right.is_some() || edge.left == c {
                            return Err(VemError::InvalidMesh(format!(
                                "edge ({a}, {b}) of cell {c} is not shared consistently \
                                 (already used by cell {})",
                                edge.left
                            )));
                        }
                        edge.right = Some(c);
                        local.push(e);
                    }
                }
            }
            cell_edges.push(local);
        }
        let mut boundary_vertex = vec![false; nv];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.vertices[0]] = true;
            boundary_vertex[e.vertices[1]] = true;
        }
        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_vertex,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_edges(&self, cell: usize) -> &[usize] {
        &self.cell_edges[cell]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// True if cell `cell` traverses its local edge `local` in the stored
    /// direction of the global edge.
    pub fn traverses_forward(&self, cell: usize, local: usize) -> bool {
        let e = &self.edges[self.cell_edges[cell][local]];
        e.vertices[0] == self.cells[cell][local]
    }

    pub fn polygon(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn geometry(&self, cell: usize) -> ElementGeometry {
        ElementGeometry::from_polygon(self.polygon(cell))
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        signed_area(&self.polygon(cell))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Mesh size `h`: the largest cell diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| self.geometry(c).diameter)
            .fold(0.0, f64::max)
    }

    fn check_cell(&self, cell: usize) -> Result<()> {
        if cell >= self.n_cells() {
            return Err(VemError::OutOfRange {
                index: cell,
                len: self.n_cells(),
            });
        }
        Ok(())
    }

    /// Cells incident to each vertex.
    pub fn vertex_cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_vertices()];
        for (c, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                out[v].push(c);
            }
        }
        out
    }

    /// All cells sharing at least one vertex with `cell`, including itself.
    pub fn element_patch(&self, cell: usize) -> Result<BTreeSet<usize>> {
        self.check_cell(cell)?;
        let verts: BTreeSet<usize> = self.cells[cell].iter().copied().collect();
        Ok(self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, k)| k.iter().any(|v| verts.contains(v)))
            .map(|(i, _)| i)
            .collect())
    }

    /// All edges with at least one endpoint at a vertex of `cell`.
    pub fn edge_patch(&self, cell: usize) -> Result<BTreeSet<usize>> {
        self.check_cell(cell)?;
        let verts: BTreeSet<usize> = self.cells[cell].iter().copied().collect();
        Ok(self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| verts.contains(&e.vertices[0]) || verts.contains(&e.vertices[1]))
            .map(|(i, _)| i)
            .collect())
    }
}
