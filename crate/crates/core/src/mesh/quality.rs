use nalgebra::{Matrix3, Vector3};

use super::PolygonalMesh;
use crate::Point;

/// Shape-regularity ratios of a mesh, each the minimum over all cells.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshQualityReport {
    /// min edge length / h_E
    pub rho_edge: f64,
    /// Chebyshev inradius / h_E
    pub rho_ball: f64,
    /// h_E / h
    pub rho_uniform: f64,
    pub threshold: f64,
    pub passed: bool,
    pub worst_edge_cell: usize,
    pub worst_ball_cell: usize,
    pub worst_uniform_cell: usize,
}

impl MeshQualityReport {
    pub fn summary(&self) -> String {
        format!(
            "rho_edge={:.4} (cell {}), rho_ball={:.4} (cell {}), rho_uniform={:.4} (cell {}), \
             threshold={} -> {}",
            self.rho_edge,
            self.worst_edge_cell,
            self.rho_ball,
            self.worst_ball_cell,
            self.rho_uniform,
            self.worst_uniform_cell,
            self.threshold,
            if self.passed { "pass" } else { "fail" }
        )
    }
}

/// Centre and radius of the largest disc inside the intersection of the
/// inner half-planes of the polygon's sides.
///
/// For convex cells this is the largest inscribed disc; for star-shaped
/// cells the disc lies in the kernel, so the cell is star-shaped with
/// respect to it. The three-variable LP is solved exactly by enumerating
/// vertices of the feasible set (triples of active constraints).
pub fn chebyshev_center(poly: &[Point]) -> (Point, f64) {
    let n = poly.len();
    // constraint i: a_i . x + r <= b_i with a_i the outward unit normal
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let t = q - p;
        let len = t.norm();
        let nx = t.y / len;
        let ny = -t.x / len;
        a.push((nx, ny));
        b.push(nx * p.x + ny * p.y);
    }
    let scale = poly
        .iter()
        .flat_map(|p| poly.iter().map(move |q| (p - q).norm()))
        .fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1.0);
    let mut best = (poly[0], 0.0);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = Matrix3::new(
                    a[i].0, a[i].1, 1.0, a[j].0, a[j].1, 1.0, a[k].0, a[k].1, 1.0,
                );
                let rhs = Vector3::new(b[i], b[j], b[k]);
                let Some(sol) = m.lu().solve(&rhs) else {
                    continue;
                };
                let (x, y, r) = (sol[0], sol[1], sol[2]);
                if !r.is_finite() || r <= best.1 {
                    continue;
                }
                let feasible = (0..n).all(|l| a[l].0 * x + a[l].1 * y + r <= b[l] + tol);
                if feasible {
                    best = (Point::new(x, y), r);
                }
            }
        }
    }
    best
}

/// Computes the shape-regularity ratios and compares them with `rho`.
pub fn check_mesh_assumptions(mesh: &PolygonalMesh, rho: f64) -> MeshQualityReport {
    let h = mesh.mesh_size();
    let mut report = MeshQualityReport {
        rho_edge: f64::INFINITY,
        rho_ball: f64::INFINITY,
        rho_uniform: f64::INFINITY,
        threshold: rho,
        passed: false,
        worst_edge_cell: 0,
        worst_ball_cell: 0,
        worst_uniform_cell: 0,
    };
    for c in 0..mesh.n_cells() {
        let g = mesh.geometry(c);
        let edge = g.edge_lengths.iter().copied().fold(f64::INFINITY, f64::min) / g.diameter;
        let (_, r) = chebyshev_center(&g.vertices);
        let ball = r / g.diameter;
        let uniform = g.diameter / h;
        if edge < report.rho_edge {
            report.rho_edge = edge;
            report.worst_edge_cell = c;
        }
        if ball < report.rho_ball {
            report.rho_ball = ball;
            report.worst_ball_cell = c;
        }
        if uniform < report.rho_uniform {
            report.rho_uniform = uniform;
            report.worst_uniform_cell = c;
        }
    }
    report.passed = report.rho_edge >= rho && report.rho_ball >= rho && report.rho_uniform >= rho;
    report
}
