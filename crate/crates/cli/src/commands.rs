use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use cipvem::experiments::{
    build_level_meshes, convergence_on_meshes, level_seed, manufactured_problem, run_on_space, ConvergenceTable,
    MeshFamily, MeshSpec, Preset, ProblemConfig, Run,
};
use cipvem::export::{on_off, write_convergence_csv, write_dofs_csv, write_vtk_field};
use cipvem::mesh::{check_mesh_assumptions, PolygonalMesh};
use cipvem::system::infsup_estimate;
use cipvem::vemspace::{check_degree, VemSpace};

use crate::args::{Command, Common, Switch};
use crate::error::CliError;
use crate::manifest::{Manifest, Parameters};

/// Largest mesh accepted by `infsup`.
pub const MAX_INFSUP_CELLS: usize = 512;

pub fn run(command: Command, args: Vec<String>) -> Result<(), CliError> {
    let start = Instant::now();
    let (name, common) = match &command {
        Command::Solve { common, .. } => ("solve", common),
        Command::Converge { common, .. } => ("converge", common),
        Command::Infsup { common, .. } => ("infsup", common),
    };
    let template = problem(common)?;
    let cells = match &command {
        Command::Solve { cells, .. } => vec![*cells],
        Command::Converge { levels, .. } | Command::Infsup { levels, .. } => levels.clone(),
    };
    if cells.contains(&0) {
        return Err(CliError::Usage("cell counts must be positive".into()));
    }
    if let Command::Infsup { levels, .. } = &command {
        if let Some(&n) = levels.iter().find(|&&n| n > MAX_INFSUP_CELLS) {
            return Err(CliError::Usage(format!(
                "inf-sup probe is limited to {MAX_INFSUP_CELLS} cells per mesh, got {n}"
            )));
        }
    }
    let switches = if common.compare_cip {
        vec![true, false]
    } else {
        vec![common.cip == Switch::On]
    };
    fs::create_dir_all(&common.out).map_err(|e| CliError::io(&common.out, e))?;

    let (outputs, results) = match command {
        Command::Solve { cells, .. } => solve(&template, common, cells, &switches)?,
        Command::Converge { ref levels, .. } => converge(&template, common, levels, &switches)?,
        Command::Infsup { ref levels, .. } => infsup(&template, common, levels, &switches)?,
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: name.into(),
        args,
        parameters: Parameters::new(&template, cells, switches, common.strict_mesh, common.rho),
        outputs,
        results,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let path = manifest.write(&common.out)?;
    println!("manifest: {}", path.display());
    Ok(())
}

fn problem(common: &Common) -> Result<ProblemConfig, CliError> {
    check_degree(common.degree)?;
    let preset: Preset = common.preset.parse()?;
    let mesh = MeshSpec {
        family: common.mesh.into(),
        cells: 0,
        seed: common.seed,
    };
    let mut p = manufactured_problem(preset, common.degree, common.cip == Switch::On, mesh);
    if let Some(eps) = common.epsilon {
        p.epsilon = eps;
    }
    if let Some(sigma) = common.sigma {
        p.sigma = sigma;
    }
    p.delta = common.delta;
    p.assembly().validate()?;
    if !(common.rho > 0.0 && common.rho <= 1.0) {
        return Err(CliError::Usage(format!("--rho must lie in (0, 1], got {}", common.rho)));
    }
    Ok(p)
}

/// Warns about, or under `--strict-mesh` rejects, meshes violating the
/// shape-regularity threshold.
fn check_mesh(mesh: &PolygonalMesh, common: &Common) -> Result<(), CliError> {
    let report = check_mesh_assumptions(mesh, common.rho);
    if !report.passed {
        let msg = format!("{} cells: {}", mesh.n_cells(), report.summary());
        if common.strict_mesh {
            return Err(CliError::MeshRejected(msg));
        }
        eprintln!("warning: mesh quality below threshold: {msg}");
    }
    Ok(())
}

fn level_meshes(family: MeshFamily, levels: &[usize], common: &Common) -> Result<Vec<PolygonalMesh>, CliError> {
    let meshes = build_level_meshes(family, levels, common.seed)?;
    for m in &meshes {
        check_mesh(m, common)?;
    }
    Ok(meshes)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn solve(
    template: &ProblemConfig,
    common: &Common,
    cells: usize,
    switches: &[bool],
) -> Result<(Vec<PathBuf>, Value), CliError> {
    let family = template.mesh.family;
    let mesh = family.build(cells, level_seed(common.seed, 0))?;
    check_mesh(&mesh, common)?;
    let space = VemSpace::new(mesh, template.k)?;
    let spec = MeshSpec {
        family,
        cells: space.mesh().n_cells(),
        seed: level_seed(common.seed, 0),
    };
    let mut outputs = Vec::new();
    let mut results = Vec::new();
    for &cip in switches {
        let mut p = template.clone().with_mesh(spec);
        p.cip_on = cip;
        let run = run_on_space(&p, space.clone())?;
        let suffix = if switches.len() > 1 {
            format!("_cip_{}", on_off(cip))
        } else {
            String::new()
        };
        let dofs = common.out.join(format!("solution{suffix}.csv"));
        let mut w = create(&dofs)?;
        write_dofs_csv(&run.space, run.solution(), &mut w)?;
        finish(w, &dofs)?;
        let vtk = common.out.join(format!("field{suffix}.vtk"));
        let mut w = create(&vtk)?;
        write_vtk_field(&run.space, run.solution(), "u_h", &mut w)?;
        finish(w, &vtk)?;
        outputs.extend([dofs, vtk]);
        println!(
            "cip={} cells={} ndof={} h={:.4e} e_h1={:.4e} e_l2={:.4e} max|dof|={:.4e} residual={:.2e}",
            on_off(cip),
            run.space.mesh().n_cells(),
            run.errors.n_dofs,
            run.errors.h,
            run.errors.e_h1,
            run.errors.e_l2,
            run.max_abs_dof(),
            run.report.relative_residual
        );
        results.push(run_summary(&run));
    }
    Ok((outputs, Value::Array(results)))
}

fn run_summary(run: &Run) -> Value {
    json!({
        "cip": run.problem.cip_on,
        "cells": run.space.mesh().n_cells(),
        "ndof": run.errors.n_dofs,
        "h": run.errors.h,
        "e_h1": run.errors.e_h1,
        "e_l2": run.errors.e_l2,
        "cip_norm": run.errors.cip_norm,
        "max_abs_dof": run.max_abs_dof(),
        "relative_residual": run.report.relative_residual,
        "refinement_steps": run.report.refinement_steps,
        "nnz": run.report.nnz,
    })
}

fn converge(
    template: &ProblemConfig,
    common: &Common,
    levels: &[usize],
    switches: &[bool],
) -> Result<(Vec<PathBuf>, Value), CliError> {
    let meshes = level_meshes(template.mesh.family, levels, common)?;
    let mut tables: Vec<ConvergenceTable> = Vec::new();
    for &cip in switches {
        let mut p = template.clone();
        p.cip_on = cip;
        let t = convergence_on_meshes(&p, &meshes)?;
        for r in &t.rows {
            println!(
                "cip={} level={} cells={} h={:.4e} e_h1={:.4e} e_l2={:.4e} rate_h1={} rate_l2={}",
                on_off(cip),
                r.level,
                r.cells,
                r.h,
                r.e_h1,
                r.e_l2,
                r.rate_h1.map_or("-".into(), |v| format!("{v:.3}")),
                r.rate_l2.map_or("-".into(), |v| format!("{v:.3}")),
            );
        }
        tables.push(t);
    }
    let path = common.out.join("convergence.csv");
    let mut w = create(&path)?;
    write_convergence_csv(&tables.iter().collect::<Vec<_>>(), &mut w)?;
    finish(w, &path)?;
    let results = tables
        .iter()
        .map(|t| {
            json!({
                "cip": t.cip_on,
                "max_abs_dof": t.rows.iter().map(|r| r.max_abs_dof).collect::<Vec<_>>(),
                "fitted_rate_h1": (t.rows.len() > 1).then(|| t.fitted_rate_h1()),
                "fitted_rate_l2": (t.rows.len() > 1).then(|| t.fitted_rate_l2()),
            })
        })
        .collect();
    Ok((vec![path], Value::Array(results)))
}

pub const INFSUP_HEADER: &str = "preset,mesh,k,cip,level,cells,ndof,h,constant";

fn infsup(
    template: &ProblemConfig,
    common: &Common,
    levels: &[usize],
    switches: &[bool],
) -> Result<(Vec<PathBuf>, Value), CliError> {
    let meshes = level_meshes(template.mesh.family, levels, common)?;
    let path = common.out.join("infsup.csv");
    let mut w = create(&path)?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "{INFSUP_HEADER}").map_err(io)?;
    let mut results = Vec::new();
    for &cip in switches {
        let mut p = template.clone();
        p.cip_on = cip;
        let config = p.assembly();
        let mut constants = Vec::new();
        for (level, mesh) in meshes.iter().enumerate() {
            let e = infsup_estimate(&VemSpace::new(mesh.clone(), p.k)?, &config)?;
            println!(
                "cip={} level={level} cells={} ndof={} constant={:.6e}",
                on_off(cip),
                e.n_cells,
                e.n_dofs,
                e.constant
            );
            writeln!(
                w,
                "{},{},{},{},{level},{},{},{},{}",
                p.name,
                p.mesh.family.name(),
                p.k,
                on_off(cip),
                e.n_cells,
                e.n_dofs,
                cipvem::export::fmt_f64(e.h),
                cipvem::export::fmt_f64(e.constant)
            )
            .map_err(io)?;
            constants.push(e.constant);
        }
        results.push(json!({ "cip": cip, "constants": constants }));
    }
    finish(w, &path)?;
    Ok((vec![path], Value::Array(results)))
}
