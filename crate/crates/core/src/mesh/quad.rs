use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_simple_polygon, signed_area, PolygonalMesh};
use crate::{Point, Result, VemError};

/// Structured `n × n` grid of the unit square whose interior vertices are
/// moved by random offsets of length at most `distortion / n`.
///
/// Boundary vertices are kept fixed. Fails, naming the cell, if the
/// perturbation inverts or folds a quadrilateral.
pub fn build_distorted_quad_mesh(
    n_per_side: usize,
    distortion: f64,
    rng_seed: u64,
) -> Result<PolygonalMesh> {
    if n_per_side == 0 {
        return Err(VemError::InvalidParameter("n_per_side must be positive".into()));
    }
    if !(0.0..0.4).contains(&distortion) {
        return Err(VemError::InvalidParameter(format!(
            "distortion {distortion} outside [0, 0.4)"
        )));
    }
    let n = n_per_side;
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut p = Point::new(i as f64 * h, j as f64 * h);
            if i == n {
                p.x = 1.0;
            }
            if j == n {
                p.y = 1.0;
            }
            if i > 0 && i < n && j > 0 && j < n && distortion > 0.0 {
                let r = distortion * h * rng.random::<f64>();
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                p.x += r * theta.cos();
                p.y += r * theta.sin();
            }
            vertices.push(p);
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let cell = vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if signed_area(&poly) <= 0.0 || !is_simple_polygon(&poly) {
                return Err(VemError::InvalidCell {
                    cell: cells.len(),
                    reason: "quadrilateral inverted by the perturbation".into(),
                });
            }
            cells.push(cell);
        }
    }
    PolygonalMesh::from_cells(vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undistorted_two_by_two() {
        let m = build_distorted_quad_mesh(2, 0.0, 3).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.n_vertices(), 9);
        assert_eq!(m.n_edges(), 12);
        for c in 0..4 {
            assert!((m.cell_area(c) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn distorted_sixteen() {
        let m = build_distorted_quad_mesh(16, 0.3, 1).unwrap();
        assert_eq!(m.n_cells(), 256);
        let mut total = 0.0;
        for c in 0..m.n_cells() {
            // independent shoelace evaluation
            let p = m.polygon(c);
            let mut a = 0.0;
            for i in 0..p.len() {
                let q = p[(i + 1) % p.len()];
                a += (p[i].x - q.x) * (p[i].y + q.y);
            }
            let a = 0.5 * a;
            assert!(a > 0.0);
            total += a;
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn displacement_is_bounded_and_boundary_fixed() {
        let n = 8;
        let d = 0.35;
        let m = build_distorted_quad_mesh(n, d, 11).unwrap();
        let h = 1.0 / n as f64;
        for j in 0..=n {
            for i in 0..=n {
                let p = m.vertices()[j * (n + 1) + i];
                let grid = Point::new(i as f64 * h, j as f64 * h);
                assert!((p - grid).norm() <= d * h + 1e-15);
                if i == 0 || j == 0 || i == n || j == n {
                    assert!((p - grid).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = build_distorted_quad_mesh(6, 0.3, 5).unwrap();
        let b = build_distorted_quad_mesh(6, 0.3, 5).unwrap();
        assert_eq!(a, b);
        let c = build_distorted_quad_mesh(6, 0.3, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_distortion() {
        assert!(build_distorted_quad_mesh(4, 0.5, 0).is_err());
        assert!(build_distorted_quad_mesh(0, 0.1, 0).is_err());
    }
}
