//! Manufactured problems, error norms and convergence studies.

mod problem;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::forms::{cip_norm, CipParameters, NormParameters};
use crate::mesh::PolygonalMesh;
use crate::system::{assemble, solve, SolveReport};
use crate::vemspace::VemSpace;
use crate::{Point, Result, VemError};

pub use problem::{
    manufactured_problem, patch_problem, ExactSolution, MeshFamily, MeshSpec, Preset, ProblemConfig,
    LLOYD_ITERATIONS, QUAD_DISTORTION,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    /// `(Σ_E ‖∇(u - Π∇u_h)‖²)^{1/2}`.
    pub e_h1: f64,
    /// `(Σ_E ‖u - Π⁰u_h‖²)^{1/2}`.
    pub e_l2: f64,
    /// Computable CIP norm of `I_h u - u_h`.
    pub cip_norm: f64,
    pub h: f64,
    pub n_dofs: usize,
}

/// Broken H¹-seminorm and L² errors of the projections of `u_h`.
pub fn projection_errors(space: &VemSpace, u_h: &DVector<f64>, exact: &ExactSolution) -> (f64, f64) {
    let (mut h1, mut l2) = (0.0, 0.0);
    for c in 0..space.mesh().n_cells() {
        let (el, proj) = space.element(c);
        let local = space.local_values(c, u_h);
        let pn = &proj.pi_nabla * &local;
        let p0 = &proj.pi_zero * &local;
        for (x, w) in el.quad.points.iter().zip(&el.quad.weights) {
            let g = exact.gradient(x) - el.basis.eval_poly_gradient(pn.as_slice(), x);
            let v = exact.value(x) - el.basis.eval_poly(p0.as_slice(), x);
            h1 += w * g.norm_squared();
            l2 += w * v * v;
        }
    }
    (h1.sqrt(), l2.sqrt())
}

pub fn compute_errors(space: &VemSpace, u_h: &DVector<f64>, problem: &ProblemConfig) -> Result<ErrorReport> {
    let (e_h1, e_l2) = projection_errors(space, u_h, &problem.exact);
    let interp = space.interpolate(|p| problem.exact.value(p));
    let cip = CipParameters::new(space, &problem.beta, problem.delta, problem.cip_on)?;
    let params = NormParameters {
        epsilon: problem.epsilon,
        sigma: problem.sigma,
        beta: problem.beta.clone(),
        h: space.mesh_size(),
    };
    let norm = cip_norm(space, &(interp - u_h), &params, &cip)?;
    Ok(ErrorReport {
        e_h1,
        e_l2,
        cip_norm: norm.norm,
        h: space.mesh_size(),
        n_dofs: space.n_dofs(),
    })
}

/// Outcome of one build, assemble and solve cycle.
#[derive(Debug, Clone)]
pub struct Run {
    pub problem: ProblemConfig,
    pub space: VemSpace,
    pub report: SolveReport,
    pub errors: ErrorReport,
}

impl Run {
    pub fn solution(&self) -> &DVector<f64> {
        &self.report.solution
    }

    pub fn max_abs_dof(&self) -> f64 {
        self.report.solution.amax()
    }
}

pub fn run_on_space(problem: &ProblemConfig, space: VemSpace) -> Result<Run> {
    let load = |p: &Point| problem.load(p);
    let trace = |p: &Point| problem.exact.value(p);
    let boundary: Option<&(dyn Fn(&Point) -> f64 + Sync)> =
        if problem.exact.vanishes_on_boundary() { None } else { Some(&trace) };
    let system = assemble(&space, &problem.assembly(), &load, boundary)?;
    let report = solve(&system)?;
    let errors = compute_errors(&space, &report.solution, problem)?;
    Ok(Run {
        problem: problem.clone(),
        space,
        report,
        errors,
    })
}

pub fn run_problem(problem: &ProblemConfig) -> Result<Run> {
    let space = VemSpace::new(problem.mesh.build()?, problem.k)?;
    run_on_space(problem, space)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub cells: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub e_h1: f64,
    pub e_l2: f64,
    pub cip_norm: f64,
    pub max_abs_dof: f64,
    /// Rates against the previous level.
    pub rate_h1: Option<f64>,
    pub rate_l2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub preset: String,
    pub family: MeshFamily,
    pub k: usize,
    pub cip_on: bool,
    pub rows: Vec<LevelRecord>,
}

pub fn observed_rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

impl ConvergenceTable {
    pub fn h(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    pub fn e_h1(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.e_h1).collect()
    }

    pub fn e_l2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.e_l2).collect()
    }

    pub fn fitted_rate_h1(&self) -> f64 {
        fitted_slope(&self.h(), &self.e_h1())
    }

    pub fn fitted_rate_l2(&self) -> f64 {
        fitted_slope(&self.h(), &self.e_l2())
    }

    pub fn last_rate_h1(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate_h1)
    }

    pub fn last_rate_l2(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate_l2)
    }
}

/// Seed used for refinement level `level`; identical for CIP on and off.
pub fn level_seed(seed: u64, level: usize) -> u64 {
    seed.wrapping_add(level as u64)
}

/// Meshes of every refinement level; `levels` are cell counts.
pub fn build_level_meshes(family: MeshFamily, levels: &[usize], seed: u64) -> Result<Vec<PolygonalMesh>> {
    check_levels(levels)?;
    levels
        .par_iter()
        .enumerate()
        .map(|(i, &cells)| family.build(cells, level_seed(seed, i)))
        .collect()
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(VemError::InvalidParameter(format!(
            "levels must be non-empty and strictly increasing, got {levels:?}"
        )));
    }
    Ok(())
}

/// Solves `template` on each refinement level and records errors and
/// rates. `levels` are cell counts.
pub fn convergence_study(template: &ProblemConfig, levels: &[usize]) -> Result<ConvergenceTable> {
    let meshes = build_level_meshes(template.mesh.family, levels, template.mesh.seed)?;
    convergence_on_meshes(template, &meshes)
}

/// As [`convergence_study`] on prebuilt meshes ordered from coarse to fine.
pub fn convergence_on_meshes(template: &ProblemConfig, meshes: &[PolygonalMesh]) -> Result<ConvergenceTable> {
    if meshes.is_empty() {
        return Err(VemError::InvalidParameter("no refinement levels".into()));
    }
    let mut rows: Vec<LevelRecord> = Vec::with_capacity(meshes.len());
    for (i, mesh) in meshes.iter().enumerate() {
        let spec = MeshSpec {
            family: template.mesh.family,
            cells: mesh.n_cells(),
            seed: level_seed(template.mesh.seed, i),
        };
        let run = run_on_space(&template.clone().with_mesh(spec), VemSpace::new(mesh.clone(), template.k)?)?;
        let e = run.errors;
        let (rate_h1, rate_l2) = match rows.last() {
            Some(prev) => {
                if e.h >= prev.h {
                    return Err(VemError::InvalidMesh(format!(
                        "mesh size did not decrease between levels {} and {i}",
                        i - 1
                    )));
                }
                (
                    Some(observed_rate(prev.e_h1, e.e_h1, prev.h, e.h)),
                    Some(observed_rate(prev.e_l2, e.e_l2, prev.h, e.h)),
                )
            }
            None => (None, None),
        };
        rows.push(LevelRecord {
            level: i,
            cells: mesh.n_cells(),
            h: e.h,
            n_dofs: e.n_dofs,
            e_h1: e.e_h1,
            e_l2: e.e_l2,
            cip_norm: e.cip_norm,
            max_abs_dof: run.max_abs_dof(),
            rate_h1,
            rate_l2,
        });
    }
    Ok(ConvergenceTable {
        preset: template.name.clone(),
        family: template.mesh.family,
        k: template.k,
        cip_on: template.cip_on,
        rows,
    })
}

/// Solutions of the same problem with and without CIP on one mesh.
#[derive(Debug, Clone)]
pub struct CipComparison {
    pub on: Run,
    pub off: Run,
}

impl CipComparison {
    pub fn max_on(&self) -> f64 {
        self.on.max_abs_dof()
    }

    pub fn max_off(&self) -> f64 {
        self.off.max_abs_dof()
    }

    pub fn ratio(&self) -> f64 {
        self.max_off() / self.max_on()
    }
}

pub fn cip_ab_comparison(template: &ProblemConfig) -> Result<CipComparison> {
    let space = VemSpace::new(template.mesh.build()?, template.k)?;
    let mut on = template.clone();
    on.cip_on = true;
    let mut off = template.clone();
    off.cip_on = false;
    Ok(CipComparison {
        on: run_on_space(&on, space.clone())?,
        off: run_on_space(&off, space)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(cells: usize) -> MeshSpec {
        MeshSpec {
            family: MeshFamily::Quad,
            cells,
            seed: 1,
        }
    }

    #[test]
    fn zero_solution_has_unit_norm_error() {
        let mesh = quad(64).build().unwrap();
        let space = VemSpace::new(mesh, 3).unwrap();
        let zero = DVector::zeros(space.n_dofs());
        let (_, e_l2) = projection_errors(&space, &zero, &ExactSolution::SinSin);
        assert!((e_l2 - 0.5).abs() < 1e-6, "{e_l2}");
    }

    #[test]
    fn interpolated_polynomials_have_no_error() {
        let mesh = MeshSpec {
            family: MeshFamily::Voronoi,
            cells: 30,
            seed: 3,
        }
        .build()
        .unwrap();
        for k in 1..=3u32 {
            let space = VemSpace::new(mesh.clone(), k as usize).unwrap();
            let u = ExactSolution::Polynomial(vec![(0, 0, 1.0), (k, 0, 2.0), (1, k - 1, -1.0)]);
            let dofs = space.interpolate(|p| u.value(p));
            let (h1, l2) = projection_errors(&space, &dofs, &u);
            assert!(h1 < 1e-10 && l2 < 1e-10, "k = {k}: {h1} {l2}");
        }
    }

    #[test]
    fn single_level_has_no_rates() {
        let p = manufactured_problem(Preset::DiffusionDominated, 1, true, quad(16));
        let t = convergence_study(&p, &[16]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].rate_h1, None);
        assert!(convergence_study(&p, &[64, 16]).is_err());
    }

    #[test]
    fn rates_and_slopes() {
        assert!((observed_rate(4.0, 1.0, 0.2, 0.1) - 2.0).abs() < 1e-15);
        let h = [0.4, 0.2, 0.1, 0.05];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((fitted_slope(&h, &e) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn diffusive_quad_rates_are_optimal() {
        let p = manufactured_problem(Preset::DiffusionDominated, 2, true, quad(16));
        let t = convergence_study(&p, &[16, 64, 256]).unwrap();
        assert!(t.last_rate_h1().unwrap() > 1.7);
        assert!(t.last_rate_l2().unwrap() > 2.7);
        for r in &t.rows {
            assert!(r.e_h1.is_finite() && r.e_l2 >= 0.0 && r.cip_norm >= 0.0);
        }
    }
}
