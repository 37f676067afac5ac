use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use cipvem::VemError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters; exit code 1.
    Usage(String),
    /// Mesh, assembly, solver or output failure; exit code 2.
    Runtime(String),
    /// Mesh rejected under `--strict-mesh`; exit code 3.
    MeshRejected(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Runtime(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage(_) => 1,
            Self::Runtime(_) => 2,
            Self::MeshRejected(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "error: {m}"),
            Self::Runtime(m) => write!(f, "failed: {m}"),
            Self::MeshRejected(m) => write!(f, "mesh rejected: {m}"),
        }
    }
}

impl From<VemError> for CliError {
    fn from(e: VemError) -> Self {
        match e {
            VemError::UnsupportedDegree(_) | VemError::UnknownPreset(_) | VemError::InvalidParameter(_) => {
                Self::Usage(e.to_string())
            }
            _ => Self::Runtime(e.to_string()),
        }
    }
}
