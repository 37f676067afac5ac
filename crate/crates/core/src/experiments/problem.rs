use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::forms::{AdvectionField, DEFAULT_DELTA};
use crate::mesh::{build_distorted_quad_mesh, build_voronoi_mesh, PolygonalMesh};
use crate::system::AssemblyConfig;
use crate::{Point, Result, VemError, Vector};

/// Analytic solution with its gradient and Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactSolution {
    /// `sin(πx) sin(πy)`.
    SinSin,
    /// `Σ c x^a y^b` over `(a, b, c)` terms.
    Polynomial(Vec<(u32, u32, f64)>),
}

fn pow(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

impl ExactSolution {
    pub fn value(&self, p: &Point) -> f64 {
        match self {
            Self::SinSin => (PI * p.x).sin() * (PI * p.y).sin(),
            Self::Polynomial(t) => t.iter().map(|&(a, b, c)| c * pow(p.x, a) * pow(p.y, b)).sum(),
        }
    }

    pub fn gradient(&self, p: &Point) -> Vector {
        match self {
            Self::SinSin => {
                let (sx, cx) = (PI * p.x).sin_cos();
                let (sy, cy) = (PI * p.y).sin_cos();
                Vector::new(PI * cx * sy, PI * sx * cy)
            }
            Self::Polynomial(t) => t.iter().fold(Vector::zeros(), |g, &(a, b, c)| {
                let dx = if a > 0 { c * a as f64 * pow(p.x, a - 1) * pow(p.y, b) } else { 0.0 };
                let dy = if b > 0 { c * b as f64 * pow(p.x, a) * pow(p.y, b - 1) } else { 0.0 };
                g + Vector::new(dx, dy)
            }),
        }
    }

    pub fn laplacian(&self, p: &Point) -> f64 {
        match self {
            Self::SinSin => -2.0 * PI * PI * self.value(p),
            Self::Polynomial(t) => t
                .iter()
                .map(|&(a, b, c)| {
                    let xx = if a > 1 { (a * (a - 1)) as f64 * pow(p.x, a - 2) * pow(p.y, b) } else { 0.0 };
                    let yy = if b > 1 { (b * (b - 1)) as f64 * pow(p.x, a) * pow(p.y, b - 2) } else { 0.0 };
                    c * (xx + yy)
                })
                .sum(),
        }
    }

    /// True when the trace on the unit square's boundary is identically zero.
    pub fn vanishes_on_boundary(&self) -> bool {
        matches!(self, Self::SinSin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    DiffusionDominated,
    AdvectionConst,
    AdvectionVarSigma0,
    AdvectionVarSigma1,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::DiffusionDominated,
        Preset::AdvectionConst,
        Preset::AdvectionVarSigma0,
        Preset::AdvectionVarSigma1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DiffusionDominated => "diffusion_dominated",
            Self::AdvectionConst => "advection_const",
            Self::AdvectionVarSigma0 => "advection_var_sigma0",
            Self::AdvectionVarSigma1 => "advection_var_sigma1",
        }
    }

    /// `(ε, σ, β)`.
    pub fn coefficients(self) -> (f64, f64, AdvectionField) {
        match self {
            Self::DiffusionDominated => (1.0, 0.0, AdvectionField::constant(1.0, 0.5)),
            Self::AdvectionConst => (1e-9, 0.0, AdvectionField::constant(1.0, 0.5)),
            Self::AdvectionVarSigma0 => (1e-9, 0.0, AdvectionField::trigonometric()),
            Self::AdvectionVarSigma1 => (1e-9, 1.0, AdvectionField::trigonometric()),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| VemError::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFamily {
    Voronoi,
    Quad,
}

pub const LLOYD_ITERATIONS: usize = 1000;
pub const QUAD_DISTORTION: f64 = 0.3;

impl MeshFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Voronoi => "voro",
            Self::Quad => "quad",
        }
    }

    /// Side count of the quad mesh closest to `cells` cells.
    pub fn quad_side(cells: usize) -> usize {
        ((cells as f64).sqrt().round() as usize).max(1)
    }

    pub fn build(self, cells: usize, seed: u64) -> Result<PolygonalMesh> {
        match self {
            Self::Voronoi => build_voronoi_mesh(cells, LLOYD_ITERATIONS, seed),
            Self::Quad => build_distorted_quad_mesh(Self::quad_side(cells), QUAD_DISTORTION, seed),
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voro" | "voronoi" => Ok(Self::Voronoi),
            "quad" => Ok(Self::Quad),
            _ => Err(VemError::InvalidParameter(format!("unknown mesh family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshSpec {
    pub family: MeshFamily,
    pub cells: usize,
    pub seed: u64,
}

impl MeshSpec {
    pub fn build(&self) -> Result<PolygonalMesh> {
        self.family.build(self.cells, self.seed)
    }
}

/// A complete problem: coefficients, exact solution, discretization and
/// mesh.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub name: String,
    pub epsilon: f64,
    pub sigma: f64,
    pub beta: AdvectionField,
    pub exact: ExactSolution,
    pub k: usize,
    pub cip_on: bool,
    pub delta: f64,
    pub mesh: MeshSpec,
}

impl ProblemConfig {
    /// `f = -εΔu + β·∇u + σu`.
    pub fn load(&self, p: &Point) -> f64 {
        -self.epsilon * self.exact.laplacian(p)
            + self.beta.eval(p).dot(&self.exact.gradient(p))
            + self.sigma * self.exact.value(p)
    }

    pub fn assembly(&self) -> AssemblyConfig {
        AssemblyConfig {
            epsilon: self.epsilon,
            sigma: self.sigma,
            beta: self.beta.clone(),
            delta: self.delta,
            cip_on: self.cip_on,
        }
    }

    pub fn with_mesh(mut self, mesh: MeshSpec) -> Self {
        self.mesh = mesh;
        self
    }
}

/// One of the named sin·sin problems.
pub fn manufactured_problem(preset: Preset, k: usize, cip_on: bool, mesh: MeshSpec) -> ProblemConfig {
    let (epsilon, sigma, beta) = preset.coefficients();
    ProblemConfig {
        name: preset.name().to_string(),
        epsilon,
        sigma,
        beta,
        exact: ExactSolution::SinSin,
        k,
        cip_on,
        delta: DEFAULT_DELTA,
        mesh,
    }
}

/// Polynomial solution with constant `β = (1, 0.5)`, `ε = 1`, `σ = 1` and
/// its trace imposed through the Nitsche data terms.
pub fn patch_problem(terms: Vec<(u32, u32, f64)>, k: usize, cip_on: bool, mesh: MeshSpec) -> ProblemConfig {
    ProblemConfig {
        name: "patch".into(),
        epsilon: 1.0,
        sigma: 1.0,
        beta: AdvectionField::constant(1.0, 0.5),
        exact: ExactSolution::Polynomial(terms),
        k,
        cip_on,
        delta: DEFAULT_DELTA,
        mesh,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const MESH: MeshSpec = MeshSpec {
        family: MeshFamily::Quad,
        cells: 4,
        seed: 0,
    };

    #[test]
    fn sin_sin_values() {
        let u = ExactSolution::SinSin;
        assert!((u.value(&Point::new(0.5, 0.5)) - 1.0).abs() < 1e-15);
        for t in [0.0, 0.3, 0.77, 1.0] {
            for p in [Point::new(t, 0.0), Point::new(t, 1.0), Point::new(0.0, t), Point::new(1.0, t)] {
                assert!(u.value(&p).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn diffusion_dominated_load_at_center() {
        let p = manufactured_problem(Preset::DiffusionDominated, 1, true, MESH);
        let f = p.load(&Point::new(0.5, 0.5));
        assert!((f - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn load_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let poly = ExactSolution::Polynomial(vec![(2, 1, 1.5), (0, 3, -2.0), (1, 0, 1.0)]);
        for preset in Preset::ALL {
            for exact in [ExactSolution::SinSin, poly.clone()] {
                let mut p = manufactured_problem(preset, 2, true, MESH);
                p.exact = exact;
                for _ in 0..20 {
                    let x = Point::new(rng.random(), rng.random());
                    let h = 1e-4;
                    let u = |dx: f64, dy: f64| p.exact.value(&Point::new(x.x + dx, x.y + dy));
                    let lap = (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * u(0.0, 0.0)) / (h * h);
                    let grad = Vector::new(u(h, 0.0) - u(-h, 0.0), u(0.0, h) - u(0.0, -h)) / (2.0 * h);
                    let fd = -p.epsilon * lap + p.beta.eval(&x).dot(&grad) + p.sigma * u(0.0, 0.0);
                    assert!((fd - p.load(&x)).abs() < 1e-5 * (1.0 + fd.abs()), "{preset}");
                    assert!(p.beta.divergence(&x).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!("nope".parse::<Preset>(), Err(VemError::UnknownPreset(_))));
        assert_eq!("voro".parse::<MeshFamily>().unwrap(), MeshFamily::Voronoi);
        assert_eq!(MeshFamily::quad_side(1024), 32);
        assert_eq!(MeshFamily::quad_side(1), 1);
    }
}
