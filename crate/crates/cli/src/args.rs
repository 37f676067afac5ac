use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cipvem::experiments::MeshFamily;

#[derive(Debug, Parser)]
#[command(name = "cipvem", version, about = "CIP-stabilized virtual element experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one manufactured problem and export the discrete field.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Number of cells.
        #[arg(long, default_value_t = 256)]
        cells: usize,
    },
    /// Run a convergence study and write one CSV row per level.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Cell counts of the refinement levels.
        #[arg(long, value_delimiter = ',', default_value = "64,256,1024,4096")]
        levels: Vec<usize>,
    },
    /// Estimate the discrete inf-sup constant on small meshes.
    Infsup {
        #[command(flatten)]
        common: Common,
        /// Cell counts, each at most 512.
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        levels: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshArg {
    Voro,
    Quad,
}

impl From<MeshArg> for MeshFamily {
    fn from(m: MeshArg) -> Self {
        match m {
            MeshArg::Voro => MeshFamily::Voronoi,
            MeshArg::Quad => MeshFamily::Quad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct Common {
    /// diffusion_dominated, advection_const, advection_var_sigma0 or advection_var_sigma1.
    #[arg(long, default_value = "diffusion_dominated")]
    pub preset: String,
    #[arg(long, value_enum, default_value_t = MeshArg::Voro)]
    pub mesh: MeshArg,
    /// Polynomial degree k (1, 2 or 3).
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub cip: Switch,
    /// Run with and without the CIP term on identical meshes.
    #[arg(long)]
    pub compare_cip: bool,
    /// Overrides the preset's diffusion coefficient.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Overrides the preset's reaction coefficient.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Nitsche penalty parameter.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Reject meshes whose shape-regularity ratios fall below `--rho`.
    #[arg(long)]
    pub strict_mesh: bool,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    pub rho: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_level_lists() {
        let cli = Cli::try_parse_from(["cipvem", "converge", "--levels", "16,64", "--mesh", "quad"]).unwrap();
        let Command::Converge { common, levels } = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(levels, vec![16, 64]);
        assert_eq!(common.mesh, MeshArg::Quad);
        assert_eq!(common.delta, 0.1);
        assert_eq!(common.rho, 0.05);
        assert_eq!(common.cip, Switch::On);
        assert_eq!(MeshFamily::from(common.mesh), MeshFamily::Quad);
    }

    #[test]
    fn rejects_unknown_switch_values() {
        assert!(Cli::try_parse_from(["cipvem", "solve", "--cip", "maybe"]).is_err());
    }
}
