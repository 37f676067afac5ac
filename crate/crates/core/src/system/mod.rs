//! Global assembly, sparse direct solve and the inf-sup probe.

mod sparse;

use std::time::{Duration, Instant};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::forms::{
    cip_edge_jump, cip_norm_gram, cip_volume_stab, local_advection_skew, local_diffusion, local_load,
    local_reaction, nitsche_boundary, nitsche_data_load, AdvectionField, CipParameters, FormKind,
    LocalForm, NormParameters,
};
use crate::mesh::PolygonalMesh;
use crate::vemspace::VemSpace;
use crate::{Point, Result, VemError};

pub use sparse::CsrMatrix;

pub type ScalarField<'a> = &'a (dyn Fn(&Point) -> f64 + Sync);

/// Coefficients of `-εΔu + β·∇u + σu = f` and the stabilization switches.
#[derive(Debug, Clone)]
pub struct AssemblyConfig {
    pub epsilon: f64,
    pub sigma: f64,
    pub beta: AdvectionField,
    pub delta: f64,
    pub cip_on: bool,
}

impl AssemblyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(VemError::InvalidParameter(format!("{what} = {v}")));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma", self.sigma);
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta", self.delta);
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: DVector<f64>,
    pub n_dofs: usize,
    pub forms: Vec<FormKind>,
    pub config: AssemblyConfig,
}

/// Each part of the operator assembled on its own.
#[derive(Debug, Clone)]
pub struct AssembledBlocks {
    pub diffusion: CsrMatrix,
    pub skew: CsrMatrix,
    pub reaction: CsrMatrix,
    /// Nitsche terms with the configured `ε` and `δ`.
    pub nitsche: CsrMatrix,
    /// Edge jumps plus volume stabilization.
    pub cip: CsrMatrix,
}

fn scatter(forms: impl IntoIterator<Item = (f64, LocalForm)>, out: &mut Vec<(usize, usize, f64)>) {
    for (scale, f) in forms {
        for (i, &gi) in f.dofs.iter().enumerate() {
            for (j, &gj) in f.dofs.iter().enumerate() {
                let v = f.matrix[(i, j)];
                if v != 0.0 {
                    out.push((gi, gj, scale * v));
                }
            }
        }
    }
}

fn cell_triplets(
    space: &VemSpace,
    per_cell: impl Fn(usize) -> Vec<(f64, LocalForm)> + Sync,
) -> Vec<(usize, usize, f64)> {
    (0..space.mesh().n_cells())
        .into_par_iter()
        .fold(Vec::new, |mut acc, c| {
            scatter(per_cell(c), &mut acc);
            acc
        })
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        })
}

fn edge_triplets(space: &VemSpace, cip: &CipParameters) -> Result<Vec<(usize, usize, f64)>> {
    let interior: Vec<usize> = (0..space.mesh().n_edges())
        .filter(|&e| !space.mesh().edges()[e].is_boundary())
        .collect();
    let forms = interior
        .par_iter()
        .map(|&e| cip_edge_jump(space, e, cip))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    scatter(forms.into_iter().map(|f| (1.0, f)), &mut out);
    Ok(out)
}

fn assemble_rhs(
    space: &VemSpace,
    config: &AssemblyConfig,
    load: ScalarField,
    boundary_data: Option<ScalarField>,
) -> DVector<f64> {
    let locals: Vec<DVector<f64>> = (0..space.mesh().n_cells())
        .into_par_iter()
        .map(|c| {
            let mut f = local_load(space, c, load);
            if let Some(g) = boundary_data {
                f += nitsche_data_load(space, c, &config.beta, config.epsilon, config.delta, g);
            }
            f
        })
        .collect();
    let mut rhs = DVector::zeros(space.n_dofs());
    for (c, f) in locals.iter().enumerate() {
        for (i, &g) in space.dof_map().cell_dofs(c).iter().enumerate() {
            rhs[g] += f[i];
        }
    }
    rhs
}

/// Assembles `ε a_h + b_h^skew + σ c_h + N_h (+ J_h)` and the load.
///
/// `boundary_data` supplies a nonzero Dirichlet trace through the Nitsche
/// data terms; `None` means `u = 0` on the boundary.
pub fn assemble(
    space: &VemSpace,
    config: &AssemblyConfig,
    load: ScalarField,
    boundary_data: Option<ScalarField>,
) -> Result<SparseSystem> {
    config.validate()?;
    let cip = CipParameters::new(space, &config.beta, config.delta, config.cip_on)?;
    let mut triplets = cell_triplets(space, |c| {
        let mut forms = vec![
            (config.epsilon, local_diffusion(space, c)),
            (1.0, local_advection_skew(space, c, &config.beta)),
            (1.0, nitsche_boundary(space, c, &config.beta, config.epsilon, config.delta)),
        ];
        if config.sigma != 0.0 {
            forms.push((config.sigma, local_reaction(space, c)));
        }
        if config.cip_on {
            forms.push((1.0, cip_volume_stab(space, c, &cip)));
        }
        forms
    });
    let mut kinds = vec![FormKind::Diffusion, FormKind::AdvectionSkew, FormKind::Nitsche];
    if config.sigma != 0.0 {
        kinds.push(FormKind::Reaction);
    }
    if config.cip_on {
        triplets.append(&mut edge_triplets(space, &cip)?);
        kinds.extend([FormKind::CipVolume, FormKind::CipEdgeJump]);
    }
    let n = space.n_dofs();
    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(n, triplets),
        rhs: assemble_rhs(space, config, load, boundary_data),
        n_dofs: n,
        forms: kinds,
        config: config.clone(),
    })
}

/// Assembles each part of the operator separately (diffusion and reaction
/// unscaled).
pub fn assemble_blocks(space: &VemSpace, config: &AssemblyConfig) -> Result<AssembledBlocks> {
    config.validate()?;
    let n = space.n_dofs();
    let cip = CipParameters::new(space, &config.beta, config.delta, true)?;
    let single = |f: &(dyn Fn(usize) -> LocalForm + Sync)| {
        CsrMatrix::from_triplets(n, cell_triplets(space, |c| vec![(1.0, f(c))]))
    };
    let mut cip_trip = cell_triplets(space, |c| vec![(1.0, cip_volume_stab(space, c, &cip))]);
    cip_trip.append(&mut edge_triplets(space, &cip)?);
    Ok(AssembledBlocks {
        diffusion: single(&|c| local_diffusion(space, c)),
        skew: single(&|c| local_advection_skew(space, c, &config.beta)),
        reaction: single(&|c| local_reaction(space, c)),
        nitsche: single(&|c| nitsche_boundary(space, c, &config.beta, config.epsilon, config.delta)),
        cip: CsrMatrix::from_triplets(n, cip_trip),
    })
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DVector<f64>,
    /// `‖Ax - b‖ / ‖b‖`, or `‖Ax - b‖` when `b = 0`.
    pub relative_residual: f64,
    pub refinement_steps: usize,
    pub nnz: usize,
    pub wall_time: Duration,
}

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Sparse LU solve with up to two steps of iterative refinement.
pub fn solve(system: &SparseSystem) -> Result<SolveReport> {
    let start = Instant::now();
    let a = &system.matrix;
    let n = a.dim();
    let b = &system.rhs;
    if !b.iter().all(|v| v.is_finite()) {
        return Err(VemError::SingularSystem("right-hand side is not finite".into()));
    }
    let trip: Vec<Triplet<usize, usize, f64>> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| VemError::SingularSystem(format!("matrix construction failed: {e:?}")))?;
    faer::set_global_parallelism(faer::Par::Seq);
    let lu = mat
        .sp_lu()
        .map_err(|e| VemError::SingularSystem(format!("LU factorization failed: {e:?}")))?;

    let b_norm = b.norm();
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let lu_solve = |r: &DVector<f64>| {
        let mut m = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
        lu.solve_in_place(m.as_mut());
        DVector::from_fn(n, |i, _| m[(i, 0)])
    };
    let mut x = lu_solve(b);
    let mut residual = b - a.matvec(&x);
    let mut rel = residual.norm() / scale;
    let mut steps = 0;
    while !(rel <= RESIDUAL_TOLERANCE) && steps < 2 && rel.is_finite() {
        x += lu_solve(&residual);
        residual = b - a.matvec(&x);
        rel = residual.norm() / scale;
        steps += 1;
    }
    if !rel.is_finite() || !x.iter().all(|v| v.is_finite()) || rel > RESIDUAL_TOLERANCE {
        let max_x = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        return Err(VemError::SingularSystem(format!(
            "relative residual {rel:e} after {steps} refinement steps (max |x| = {max_x:e}); \
             the matrix is singular or numerically rank deficient"
        )));
    }
    Ok(SolveReport {
        solution: x,
        relative_residual: rel,
        refinement_steps: steps,
        nnz: a.nnz(),
        wall_time: start.elapsed(),
    })
}

/// Largest DoF count accepted by the dense inf-sup probe.
pub const MAX_INFSUP_DOFS: usize = 6000;

#[derive(Debug, Clone, PartialEq)]
pub struct InfSupEstimate {
    pub n_cells: usize,
    pub n_dofs: usize,
    pub h: f64,
    /// Smallest singular value of `N^{-1/2} A N^{-1/2}`, with `N` the Gram
    /// matrix of the computable CIP norm.
    pub constant: f64,
}

/// Empirical inf-sup constant of the assembled operator on one mesh.
pub fn infsup_estimate(space: &VemSpace, config: &AssemblyConfig) -> Result<InfSupEstimate> {
    let n = space.n_dofs();
    if n > MAX_INFSUP_DOFS {
        return Err(VemError::InvalidParameter(format!(
            "inf-sup probe limited to {MAX_INFSUP_DOFS} DoFs, got {n}"
        )));
    }
    let zero = |_: &Point| 0.0;
    let a: DMatrix<f64> = assemble(space, config, &zero, None)?.matrix.to_dense();
    let cip = CipParameters::new(space, &config.beta, config.delta, true)?;
    let np = NormParameters {
        epsilon: config.epsilon,
        sigma: config.sigma,
        beta: config.beta.clone(),
        h: space.mesh_size(),
    };
    let gram = cip_norm_gram(space, &np, &cip)?;
    let gram = (&gram + gram.transpose()) * 0.5;
    let chol = gram
        .cholesky()
        .ok_or_else(|| VemError::SingularSystem("CIP norm Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| VemError::SingularSystem("singular Gram factor".into()))?;
    let m = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| VemError::SingularSystem("singular Gram factor".into()))?
        .transpose();
    let sv = m.singular_values();
    let constant = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(InfSupEstimate {
        n_cells: space.mesh().n_cells(),
        n_dofs: n,
        h: space.mesh_size(),
        constant,
    })
}

/// [`infsup_estimate`] over a sequence of meshes.
pub fn infsup_probe(meshes: &[PolygonalMesh], k: usize, config: &AssemblyConfig) -> Result<Vec<InfSupEstimate>> {
    meshes
        .iter()
        .map(|m| infsup_estimate(&VemSpace::new(m.clone(), k)?, config))
        .collect()
}
