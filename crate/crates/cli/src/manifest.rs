use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use cipvem::experiments::{ProblemConfig, LLOYD_ITERATIONS, QUAD_DISTORTION};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Parameters {
    pub preset: String,
    pub mesh: String,
    pub cells: Vec<usize>,
    pub degree: usize,
    pub cip: Vec<bool>,
    pub epsilon: f64,
    pub sigma: f64,
    pub beta: String,
    pub delta: f64,
    pub seed: u64,
    pub strict_mesh: bool,
    pub rho: f64,
    pub lloyd_iterations: usize,
    pub quad_distortion: f64,
}

impl Parameters {
    pub fn new(p: &ProblemConfig, cells: Vec<usize>, cip: Vec<bool>, strict_mesh: bool, rho: f64) -> Self {
        Self {
            preset: p.name.clone(),
            mesh: p.mesh.family.name().into(),
            cells,
            degree: p.k,
            cip,
            epsilon: p.epsilon,
            sigma: p.sigma,
            beta: p.beta.name(),
            delta: p.delta,
            seed: p.mesh.seed,
            strict_mesh,
            rho,
            lloyd_iterations: LLOYD_ITERATIONS,
            quad_distortion: QUAD_DISTORTION,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Arguments after the program name; replaying them reproduces the CSVs.
    pub args: Vec<String>,
    pub parameters: Parameters,
    pub outputs: Vec<PathBuf>,
    pub results: Value,
    pub wall_time_seconds: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    /// Writes the manifest to `dir`, listing itself among the outputs.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(MANIFEST_FILE);
        self.outputs.push(path.clone());
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &self)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
        Ok(path)
    }
}
