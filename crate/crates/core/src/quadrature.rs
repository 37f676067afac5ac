//! Scaled monomials and polynomial-exact integration on polygons and edges.

use nalgebra::DMatrix;

use crate::mesh::{chebyshev_center, ElementGeometry};
use crate::{Point, Result, Vector, VemError};

/// Dimension of the bivariate polynomials of degree `k` (zero for `k < 0`).
pub fn poly_dim(k: i32) -> usize {
    if k < 0 {
        0
    } else {
        let k = k as usize;
        (k + 1) * (k + 2) / 2
    }
}

/// Exponents `(α, β)` of all monomials up to `degree`, ordered by total
/// degree and then by decreasing `α`.
pub fn exponents(degree: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(poly_dim(degree as i32));
    for d in 0..=degree {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Position of `x^a y^b` in the ordering of [`exponents`].
pub fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Scaled monomials `((x - x_E)/h_E)^α ((y - y_E)/h_E)^β` on one element.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    pub degree: usize,
    pub center: Point,
    pub diameter: f64,
    pub exponents: Vec<(usize, usize)>,
}

impl MonomialBasis {
    pub fn new(degree: usize, center: Point, diameter: f64) -> Self {
        Self {
            degree,
            center,
            diameter,
            exponents: exponents(degree),
        }
    }

    pub fn for_element(degree: usize, geom: &ElementGeometry) -> Self {
        Self::new(degree, geom.centroid, geom.diameter)
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    fn scaled(&self, p: &Point) -> (f64, f64) {
        (
            (p.x - self.center.x) / self.diameter,
            (p.y - self.center.y) / self.diameter,
        )
    }

    fn powers(x: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 1.0;
        for _ in 0..=n {
            out.push(acc);
            acc *= x;
        }
        out
    }

    pub fn eval(&self, p: &Point) -> Vec<f64> {
        let (x, y) = self.scaled(p);
        let px = Self::powers(x, self.degree);
        let py = Self::powers(y, self.degree);
        self.exponents.iter().map(|&(a, b)| px[a] * py[b]).collect()
    }

    pub fn eval_gradients(&self, p: &Point) -> Vec<Vector> {
        let (x, y) = self.scaled(p);
        let px = Self::powers(x, self.degree);
        let py = Self::powers(y, self.degree);
        let h = self.diameter;
        self.exponents
            .iter()
            .map(|&(a, b)| {
                let dx = if a > 0 { a as f64 * px[a - 1] * py[b] / h } else { 0.0 };
                let dy = if b > 0 { b as f64 * px[a] * py[b - 1] / h } else { 0.0 };
                Vector::new(dx, dy)
            })
            .collect()
    }

    /// Matrix with entry `(i, j) = m_j(points[i])`.
    pub fn values(&self, points: &[Point]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.len());
        for (i, p) in points.iter().enumerate() {
            for (j, v) in self.eval(p).into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `(∂x, ∂y)` matrices laid out like [`values`](Self::values).
    pub fn gradients(&self, points: &[Point]) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut gx = DMatrix::zeros(points.len(), self.len());
        let mut gy = DMatrix::zeros(points.len(), self.len());
        for (i, p) in points.iter().enumerate() {
            for (j, g) in self.eval_gradients(p).into_iter().enumerate() {
                gx[(i, j)] = g.x;
                gy[(i, j)] = g.y;
            }
        }
        (gx, gy)
    }

    /// Evaluates the polynomial with the given monomial coefficients.
    pub fn eval_poly(&self, coeffs: &[f64], p: &Point) -> f64 {
        self.eval(p).iter().zip(coeffs).map(|(m, c)| m * c).sum()
    }

    pub fn eval_poly_gradient(&self, coeffs: &[f64], p: &Point) -> Vector {
        self.eval_gradients(p)
            .iter()
            .zip(coeffs)
            .map(|(g, c)| g * *c)
            .fold(Vector::zeros(), |a, b| a + b)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * n * (n + 1.0) * x.signum().powi(n as i32 + 1)
    } else {
        n * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    symmetrize(&mut nodes);
    (nodes, weights)
}

fn symmetrize(nodes: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// `n`-point Gauss–Lobatto rule on `[-1, 1]` (endpoints included), `n >= 2`.
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let m = n - 1;
    let mf = m as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    // interior nodes: roots of P'_m, Newton on P'_m using the Legendre ODE
    for i in 1..m {
        let mut x = -(std::f64::consts::PI * i as f64 / mf).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let ddp = (2.0 * x * dp - mf * (mf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
    }
    symmetrize(&mut nodes);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre_with_derivative(m, x);
            2.0 / (mf * (mf + 1.0) * p * p)
        })
        .collect();
    (nodes, weights)
}

/// Gauss–Lobatto nodes of the `(k + 1)`-point rule mapped to `[0, 1]`.
pub fn lobatto_parameters(k: usize) -> Vec<f64> {
    let (x, _) = gauss_lobatto(k + 1);
    x.iter().map(|t| 0.5 * (t + 1.0)).collect()
}

/// The `k - 1` interior Gauss–Lobatto points of the segment `a -> b`.
pub fn gauss_lobatto_edge_points(a: Point, b: Point, k: usize) -> Vec<Point> {
    assert!(k >= 1);
    let t = lobatto_parameters(k);
    t[1..k].iter().map(|&s| a + (b - a) * s).collect()
}

/// Gauss points and weights on one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeQuadrature {
    pub points: Vec<Point>,
    /// Parameters in `[0, 1]` along the segment.
    pub params: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl EdgeQuadrature {
    pub fn gauss(a: Point, b: Point, n_points: usize) -> Self {
        let (x, w) = gauss_legendre(n_points);
        let len = (b - a).norm();
        let params: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        Self {
            points: params.iter().map(|&s| a + (b - a) * s).collect(),
            weights: w.iter().map(|w| 0.5 * len * w).collect(),
            params,
            exactness: 2 * n_points - 1,
        }
    }
}

/// Points and weights integrating polynomials exactly on one polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct CellQuadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl CellQuadrature {
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Fans the polygon into triangles from an interior point and places a
/// collapsed Gauss product rule of the requested exactness on each.
///
/// The fan apex is the centroid when every fan triangle is positively
/// oriented, otherwise the Chebyshev centre of the kernel.
pub fn build_cell_quadrature(geom: &ElementGeometry, exactness: usize) -> Result<CellQuadrature> {
    let verts = &geom.vertices;
    let n = verts.len();
    let fan_ok = |c: Point| {
        (0..n).all(|i| {
            let a = verts[i] - c;
            let b = verts[(i + 1) % n] - c;
            a.x * b.y - a.y * b.x > 0.0
        })
    };
    let apex = if fan_ok(geom.centroid) {
        geom.centroid
    } else {
        let (c, r) = chebyshev_center(verts);
        if r <= 0.0 || !fan_ok(c) {
            return Err(VemError::InvalidCell {
                cell: usize::MAX,
                reason: "polygon is not star-shaped; cannot build quadrature".into(),
            });
        }
        c
    };
    let m = exactness.div_ceil(2) + 1;
    let (x, w) = gauss_legendre(m);
    let s: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let ws: Vec<f64> = w.iter().map(|w| 0.5 * w).collect();
    let mut points = Vec::with_capacity(n * m * m);
    let mut weights = Vec::with_capacity(n * m * m);
    for i in 0..n {
        let a = verts[i] - apex;
        let b = verts[(i + 1) % n] - apex;
        let det = a.x * b.y - a.y * b.x;
        for (xi, wxi) in s.iter().zip(&ws) {
            for (eta, weta) in s.iter().zip(&ws) {
                let u = *xi;
                let v = eta * (1.0 - xi);
                points.push(apex + a * u + b * v);
                weights.push(det * wxi * weta * (1.0 - xi));
            }
        }
    }
    Ok(CellQuadrature {
        points,
        weights,
        exactness,
    })
}

/// Exact integrals `∫_E m_{αβ}` of all scaled monomials up to `max_degree`,
/// from the divergence theorem:
/// `∫_E X^a Y^b = h_E² / (a + 1) ∮ X^{a+1} Y^b n_x ds'` in scaled coordinates.
pub fn polygon_monomial_integrals(
    vertices: &[Point],
    center: Point,
    diameter: f64,
    max_degree: usize,
) -> Vec<f64> {
    let exps = exponents(max_degree);
    let mut out = vec![0.0; exps.len()];
    let n = vertices.len();
    let (gx, gw) = gauss_legendre(max_degree / 2 + 2);
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let t = q - p;
        // n_x ds = t_y dt for a counter-clockwise boundary
        let ny_len = t.y;
        if ny_len == 0.0 {
            continue;
        }
        for (x, w) in gx.iter().zip(&gw) {
            let s = 0.5 * (x + 1.0);
            let pt = p + t * s;
            let xs = (pt.x - center.x) / diameter;
            let ys = (pt.y - center.y) / diameter;
            let weight = 0.5 * w * ny_len;
            for (j, &(a, b)) in exps.iter().enumerate() {
                out[j] += weight * xs.powi(a as i32 + 1) * ys.powi(b as i32) / (a as f64 + 1.0);
            }
        }
    }
    // ds' uses scaled coordinates: the x-integration gives a factor h_E
    for v in out.iter_mut() {
        *v *= diameter;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_voronoi_mesh;

    fn unit_square_geom() -> ElementGeometry {
        ElementGeometry::from_polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
    }

    #[test]
    fn basis_dimension_and_ordering() {
        for k in 0..5 {
            assert_eq!(MonomialBasis::new(k, Point::origin(), 1.0).len(), (k + 1) * (k + 2) / 2);
        }
        let e = exponents(2);
        assert_eq!(e, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for (i, &(a, b)) in exponents(6).iter().enumerate() {
            assert_eq!(monomial_index(a, b), i);
        }
    }

    #[test]
    fn monomial_values_on_unit_square() {
        let g = unit_square_geom();
        let basis = MonomialBasis::for_element(2, &g);
        let v = basis.values(&[Point::new(1.0, 0.5), Point::new(0.5, 0.5)]);
        assert_eq!(v[(0, 0)], 1.0);
        assert!((v[(0, 1)] - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((v[(0, 1)] - 0.353553).abs() < 1e-6);
        // m_11 at the centroid
        assert_eq!(v[(1, monomial_index(1, 1))], 0.0);
        for j in 1..basis.len() {
            assert_eq!(v[(1, j)], 0.0);
        }
    }

    #[test]
    fn monomial_gradients_closed_form() {
        let g = unit_square_geom();
        let basis = MonomialBasis::for_element(2, &g);
        let p = Point::new(0.9, 0.2);
        let (gx, gy) = basis.gradients(&[p]);
        let h = g.diameter;
        assert_eq!((gx[(0, 0)], gy[(0, 0)]), (0.0, 0.0));
        assert!((gx[(0, 1)] - 1.0 / h).abs() < 1e-15);
        assert_eq!(gy[(0, 1)], 0.0);
        let i20 = monomial_index(2, 0);
        assert!((gx[(0, i20)] - 2.0 * (p.x - 0.5) / (h * h)).abs() < 1e-15);
        assert_eq!(gy[(0, i20)], 0.0);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    /// Roots of P'_m by bisection, independent of the Newton iteration.
    fn lobatto_interior_by_bisection(m: usize) -> Vec<f64> {
        let dp = |x: f64| legendre_with_derivative(m, x).1;
        let grid: Vec<f64> = (0..=4000).map(|i| -1.0 + 2.0 * i as f64 / 4000.0).collect();
        let mut roots = Vec::new();
        for w in grid.windows(2) {
            let (mut a, mut b) = (w[0] + 1e-12, w[1] - 1e-12);
            if dp(a) * dp(b) > 0.0 {
                continue;
            }
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if dp(a) * dp(c) <= 0.0 {
                    b = c;
                } else {
                    a = c;
                }
            }
            roots.push(0.5 * (a + b));
        }
        roots
    }

    #[test]
    fn lobatto_nodes() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        assert!(gauss_lobatto_edge_points(a, b, 1).is_empty());
        let p2 = gauss_lobatto_edge_points(a, b, 2);
        assert_eq!(p2.len(), 1);
        assert!((p2[0] - Point::new(0.5, 0.0)).norm() < 1e-15);
        let p3 = gauss_lobatto_edge_points(a, b, 3);
        let oracle = lobatto_interior_by_bisection(3);
        assert_eq!(oracle.len(), 2);
        for (p, r) in p3.iter().zip(&oracle) {
            assert!((p.x - 0.5 * (r + 1.0)).abs() < 1e-12);
        }
        assert!((p3[0].x - 0.5 * (1.0 - 1.0 / 5f64.sqrt())).abs() < 1e-15);
        assert!((p3[1].x - 0.72361).abs() < 1e-5);
        for n in 2..7 {
            let (x, w) = gauss_lobatto(n);
            assert_eq!(x[0], -1.0);
            assert_eq!(x[n - 1], 1.0);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for d in 0..(2 * n - 2) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn edge_quadrature_weights_sum_to_length() {
        let q = EdgeQuadrature::gauss(Point::new(0.1, 0.2), Point::new(0.4, 0.6), 4);
        assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        assert_eq!(q.exactness, 7);
    }

    #[test]
    fn cell_quadrature_on_unit_square() {
        let q = build_cell_quadrature(&unit_square_geom(), 8).unwrap();
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-13);
        let xy2 = q.integrate(|p| p.x * p.x * p.y * p.y);
        assert!((xy2 - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_boundary_moments_on_voronoi_cells() {
        let mesh = build_voronoi_mesh(40, 10, 1).unwrap();
        for c in 0..mesh.n_cells() {
            let g = mesh.geometry(c);
            let deg = 8;
            let q = build_cell_quadrature(&g, deg).unwrap();
            let basis = MonomialBasis::for_element(deg, &g);
            let exact = polygon_monomial_integrals(&g.vertices, g.centroid, g.diameter, deg);
            let mut quad = vec![0.0; basis.len()];
            for (p, w) in q.points.iter().zip(&q.weights) {
                for (j, v) in basis.eval(p).iter().enumerate() {
                    quad[j] += w * v;
                }
            }
            assert!((exact[0] - g.area).abs() < 1e-14);
            for j in 0..basis.len() {
                let scale = exact[j].abs().max(g.area * 1e-3);
                assert!((quad[j] - exact[j]).abs() <= 1e-12 * scale, "cell {c} monomial {j}");
            }
        }
    }

    #[test]
    fn non_convex_cell_uses_kernel_apex() {
        // arrow-shaped quadrilateral whose centroid lies outside the kernel
        let g = ElementGeometry::from_polygon(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.5),
            Point::new(0.0, 1.0),
            Point::new(0.8, 0.5),
        ]);
        let q = build_cell_quadrature(&g, 4).unwrap();
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert!((q.integrate(|_| 1.0) - g.area).abs() < 1e-14);
    }
}
