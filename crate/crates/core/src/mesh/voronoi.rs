//! Clipped Voronoi diagrams of the unit square and Lloyd relaxation.
//!
//! Each cell is obtained by intersecting the square with the bisector
//! half-planes of nearby seeds. Neighbours are visited ring by ring on a
//! bucket grid; the search stops once the next ring is farther than twice
//! the current cell radius, at which point no further seed can cut the cell.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{polygon_centroid, signed_area, PolygonalMesh};
use crate::{Point, Result, Vector, VemError};

const DUPLICATE_TOL: f64 = 1e-12;
const MERGE_TOL: f64 = 1e-10;
const SNAP_TOL: f64 = 1e-12;

/// Seeds together with the mesh of their clipped Voronoi cells.
#[derive(Debug, Clone)]
pub struct VoronoiTessellation {
    pub seeds: Vec<Point>,
    pub mesh: PolygonalMesh,
}

/// Clipped Voronoi mesh of `n_cells` random seeds relaxed by
/// `lloyd_iterations` Lloyd steps.
pub fn build_voronoi_mesh(
    n_cells: usize,
    lloyd_iterations: usize,
    rng_seed: u64,
) -> Result<PolygonalMesh> {
    Ok(centroidal_voronoi(n_cells, lloyd_iterations, rng_seed)?.mesh)
}

pub fn centroidal_voronoi(
    n_cells: usize,
    lloyd_iterations: usize,
    rng_seed: u64,
) -> Result<VoronoiTessellation> {
    if n_cells == 0 {
        return Err(VemError::InvalidParameter("n_cells must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds: Vec<Point> = (0..n_cells)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    for _ in 0..lloyd_iterations {
        let polys = clipped_cells(&seeds)?;
        seeds = polys.iter().map(|p| polygon_centroid(p)).collect();
    }
    let polys = clipped_cells(&seeds)?;
    let mesh = conforming_mesh(&polys)?;
    Ok(VoronoiTessellation { seeds, mesh })
}

/// Voronoi cells of `seeds` clipped to the unit square, in seed order.
pub fn clipped_cells(seeds: &[Point]) -> Result<Vec<Vec<Point>>> {
    let grid = BucketGrid::new(seeds);
    grid.check_duplicates(seeds)?;
    let square = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    let mut out = Vec::with_capacity(seeds.len());
    for (i, &s) in seeds.iter().enumerate() {
        let mut poly = square.clone();
        let (gi, gj) = grid.bucket_of(s);
        let max_ring = grid.n;
        for ring in 0..=max_ring {
            let radius = poly.iter().map(|p| (p - s).norm()).fold(0.0, f64::max);
            // seeds in ring r are at least (r - 1) bucket widths away
            if ring >= 1 && (ring as f64 - 1.0) * grid.width > 2.0 * radius {
                break;
            }
            for j in grid.ring(gi, gj, ring) {
                if j == i {
                    continue;
                }
                poly = clip_bisector(&poly, s, seeds[j]);
                if poly.len() < 3 {
                    return Err(VemError::DegenerateDiagram(format!(
                        "cell of seed {i} vanished while clipping against seed {j}"
                    )));
                }
            }
        }
        if signed_area(&poly) <= 0.0 {
            return Err(VemError::DegenerateDiagram(format!("cell of seed {i} has no area")));
        }
        out.push(poly);
    }
    Ok(out)
}

/// Keeps the part of `poly` closer to `s` than to `t`.
fn clip_bisector(poly: &[Point], s: Point, t: Point) -> Vec<Point> {
    let d: Vector = t - s;
    let mid = Point::from((s.coords + t.coords) * 0.5);
    let scale = d.norm();
    let dist = |p: &Point| (p - mid).dot(&d) / scale;
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let dp = dist(&p);
        let dq = dist(&q);
        let p_in = dp <= 0.0;
        let q_in = dq <= 0.0;
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    // drop near-duplicate consecutive points created by cuts through vertices
    let mut clean: Vec<Point> = Vec::with_capacity(out.len());
    for p in out {
        if clean.last().is_none_or(|l: &Point| (p - l).norm() > DUPLICATE_TOL) {
            clean.push(p);
        }
    }
    while clean.len() > 1 && (clean[0] - clean[clean.len() - 1]).norm() <= DUPLICATE_TOL {
        clean.pop();
    }
    clean
}

/// Merges the independently clipped cell polygons into one conforming mesh.
fn conforming_mesh(polys: &[Vec<Point>]) -> Result<PolygonalMesh> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: &Point| ((p.x / MERGE_TOL).floor() as i64, (p.y / MERGE_TOL).floor() as i64);
    let mut cells = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut cell: Vec<usize> = Vec::with_capacity(poly.len());
        for p in poly {
            let p = snap(*p);
            let (kx, ky) = key(&p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = buckets.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if (vertices[v] - p).norm() <= MERGE_TOL {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = match found {
                Some(v) => v,
                None => {
                    vertices.push(p);
                    buckets.entry((kx, ky)).or_default().push(vertices.len() - 1);
                    vertices.len() - 1
                }
            };
            if cell.last() != Some(&v) {
                cell.push(v);
            }
        }
        while cell.len() > 1 && cell[0] == cell[cell.len() - 1] {
            cell.pop();
        }
        cells.push(cell);
    }
    PolygonalMesh::from_cells(vertices, cells)
}

fn snap(p: Point) -> Point {
    let s = |c: f64| {
        if c.abs() < SNAP_TOL {
            0.0
        } else if (c - 1.0).abs() < SNAP_TOL {
            1.0
        } else {
            c
        }
    };
    Point::new(s(p.x), s(p.y))
}

struct BucketGrid {
    n: usize,
    width: f64,
    buckets: Vec<Vec<usize>>,
}

impl BucketGrid {
    fn new(seeds: &[Point]) -> Self {
        let n = ((seeds.len() as f64).sqrt().ceil() as usize).max(1);
        let width = 1.0 / n as f64;
        let mut grid = Self {
            n,
            width,
            buckets: vec![Vec::new(); n * n],
        };
        for (i, &s) in seeds.iter().enumerate() {
            let (gi, gj) = grid.bucket_of(s);
            grid.buckets[gj * n + gi].push(i);
        }
        grid
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let f = |c: f64| ((c / self.width).floor().max(0.0) as usize).min(self.n - 1);
        (f(p.x), f(p.y))
    }

    /// Seeds in the buckets at Chebyshev distance exactly `r` from `(gi, gj)`.
    fn ring(&self, gi: usize, gj: usize, r: usize) -> Vec<usize> {
        let n = self.n as i64;
        let (ci, cj, r) = (gi as i64, gj as i64, r as i64);
        let mut out = Vec::new();
        for j in (cj - r)..=(cj + r) {
            for i in (ci - r)..=(ci + r) {
                if (i - ci).abs().max((j - cj).abs()) != r {
                    continue;
                }
                if i < 0 || j < 0 || i >= n || j >= n {
                    continue;
                }
                out.extend_from_slice(&self.buckets[(j * n + i) as usize]);
            }
        }
        out
    }

    fn check_duplicates(&self, seeds: &[Point]) -> Result<()> {
        for (i, &s) in seeds.iter().enumerate() {
            if !(s.x > 0.0 && s.x < 1.0 && s.y > 0.0 && s.y < 1.0) {
                return Err(VemError::DegenerateDiagram(format!(
                    "seed {i} at ({}, {}) is not inside the unit square",
                    s.x, s.y
                )));
            }
            let (gi, gj) = self.bucket_of(s);
            for ring in 0..=1 {
                for j in self.ring(gi, gj, ring) {
                    if j > i && (seeds[j] - s).norm() < DUPLICATE_TOL {
                        return Err(VemError::DegenerateDiagram(format!(
                            "seeds {i} and {j} coincide; reseed"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_seed_owns_the_square() {
        let m = build_voronoi_mesh(1, 0, 99).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.n_edges(), 4);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_seeds_split_by_bisector() {
        let seeds = [Point::new(0.25, 0.5), Point::new(0.75, 0.5)];
        let cells = clipped_cells(&seeds).unwrap();
        assert!((signed_area(&cells[0]) - 0.5).abs() < 1e-15);
        assert!((signed_area(&cells[1]) - 0.5).abs() < 1e-15);
        let mesh = conforming_mesh(&cells).unwrap();
        assert_eq!(mesh.n_vertices(), 6);
        assert_eq!(mesh.edges().iter().filter(|e| !e.is_boundary()).count(), 1);
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let seeds = [Point::new(0.3, 0.3), Point::new(0.3, 0.3), Point::new(0.7, 0.6)];
        assert!(matches!(
            clipped_cells(&seeds),
            Err(VemError::DegenerateDiagram(_))
        ));
    }

    /// Brute force: clip against every other seed.
    fn brute_force_cells(seeds: &[Point]) -> Vec<Vec<Point>> {
        seeds
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut poly = vec![
                    Point::new(0.0, 0.0),
                    Point::new(1.0, 0.0),
                    Point::new(1.0, 1.0),
                    Point::new(0.0, 1.0),
                ];
                for (j, &t) in seeds.iter().enumerate() {
                    if j != i {
                        poly = clip_bisector(&poly, s, t);
                    }
                }
                poly
            })
            .collect()
    }

    #[test]
    fn ring_search_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let seeds: Vec<Point> = (0..200)
            .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let fast = clipped_cells(&seeds).unwrap();
        let slow = brute_force_cells(&seeds);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((signed_area(a) - signed_area(b)).abs() < 1e-14);
            assert_eq!(a.len(), b.len());
        }
    }

    #[test]
    fn lloyd_reaches_fixed_point() {
        let t = centroidal_voronoi(4, 200, 7).unwrap();
        let mut gap: f64 = 0.0;
        for (c, s) in t.seeds.iter().enumerate() {
            gap = gap.max((t.mesh.geometry(c).centroid - s).norm());
        }
        assert!(gap < 1e-3, "seed-centroid gap {gap}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = build_voronoi_mesh(64, 5, 3).unwrap();
        let b = build_voronoi_mesh(64, 5, 3).unwrap();
        assert_eq!(a, b);
    }
}
