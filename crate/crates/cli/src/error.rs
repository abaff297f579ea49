use std::path::PathBuf;

use fracfem::assembly::AssemblyError;
use fracfem::mesh::MeshError;
use fracfem::problem::ProblemError;
use fracfem::raypath::RayPathError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("config {path}: {message}", path = .path.display())]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}", path = .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Trace(#[from] RayPathError),
}

impl CliError {
    /// 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Config { .. } => 2,
            CliError::Io { .. } => 1,
            CliError::Mesh(MeshError::Io { .. }) => 1,
            CliError::Mesh(_) => 2,
            CliError::Problem(e) => match e {
                ProblemError::Invalid(_)
                | ProblemError::OutsideDomain { .. }
                | ProblemError::Coefficient { .. }
                | ProblemError::NoExactSolution
                | ProblemError::NoLevels => 2,
                _ => 1,
            },
            CliError::Assembly(AssemblyError::UnsupportedQuadrature { .. }) => 2,
            CliError::Assembly(_) => 1,
            CliError::Trace(RayPathError::PointOutside(_) | RayPathError::BadAxis { .. } | RayPathError::NotInStart { .. }) => 2,
            CliError::Trace(_) => 1,
        }
    }
}
