//! Run configuration: a flat TOML file, overridden by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use fracfem::problem::{Coefficients, Domain, FractionalDiffusionProblem, Polynomial};
use fracfem::ConstantField;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Unit cube with `u = Π x_i (1 − x_i)`.
    #[serde(alias = "cube-manufactured")]
    #[value(alias = "cube-manufactured")]
    Cube,
    /// Ball with `u = (|x|² − r²)²` and trigonometric coefficients.
    #[serde(rename = "ball-paper")]
    #[value(name = "ball-paper")]
    Ball,
    /// Mesh from files, constant source, no exact solution.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    /// `p_i = cos x_i`, `q_i = 1 − cos x_i`.
    Trig,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub dim: usize,
    /// One order per axis; defaults to 0.8 on every axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    pub coefficients: CoefficientKind,
    pub p: f64,
    pub q: f64,
    pub radius: f64,
    /// Source term of the custom problem.
    pub rhs: f64,
    /// Generator resolution for `assemble` and `trace`.
    pub mesh_n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_node: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_ele: Option<PathBuf>,
    /// Generator resolutions of the convergence levels; defaults per problem.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    /// Replace the fractional operator by the Laplacian in `assemble`.
    pub classical: bool,
    pub quadrature_degree: usize,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub seed: u64,
    pub bench_sizes: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Cube,
            dim: 3,
            beta: None,
            coefficients: CoefficientKind::Trig,
            p: 0.5,
            q: 0.5,
            radius: 0.5,
            rhs: 1.0,
            mesh_n: 4,
            mesh_node: None,
            mesh_ele: None,
            levels: None,
            classical: false,
            quadrature_degree: 2,
            solver_tol: 1e-10,
            solver_max_iter: 20_000,
            out: PathBuf::from("out"),
            threads: None,
            seed: 42,
            bench_sizes: vec![4, 8, 12],
        }
    }
}

const CUBE_LADDER: [usize; 4] = [4, 8, 16, 24];
const BALL_LADDER: [usize; 3] = [6, 12, 20];

/// First `count` resolutions of the default refinement ladder, continued in
/// steps of 8 past its end.
pub fn default_levels(problem: ProblemKind, count: usize) -> Vec<usize> {
    let ladder: &[usize] = match problem {
        ProblemKind::Ball => &BALL_LADDER,
        _ => &CUBE_LADDER,
    };
    (0..count)
        .map(|k| ladder.get(k).copied().unwrap_or_else(|| ladder[ladder.len() - 1] + 8 * (k + 1 - ladder.len())))
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
        toml::from_str(&text).map_err(|e| CliError::Config { path: path.to_owned(), message: e.to_string() })
    }

    /// Fill in defaults that depend on other fields.
    pub fn resolve(&mut self) {
        if self.beta.is_none() {
            self.beta = Some(vec![0.8; self.dim]);
        }
        if self.levels.is_none() {
            let count = match self.problem {
                ProblemKind::Ball => BALL_LADDER.len(),
                _ => CUBE_LADDER.len(),
            };
            self.levels = Some(default_levels(self.problem, count));
        }
    }

    pub fn beta(&self) -> Vec<f64> {
        self.beta.clone().unwrap_or_else(|| vec![0.8; self.dim])
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Invalid(m));
        if self.dim != 2 && self.dim != 3 {
            return bad(format!("dim must be 2 or 3, got {}", self.dim));
        }
        let beta = self.beta();
        if beta.len() != self.dim {
            return bad(format!("beta needs {} components, got {}", self.dim, beta.len()));
        }
        if let Some(b) = beta.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return bad(format!("beta components must lie in (0, 1), got {b}"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if self.coefficients == CoefficientKind::Constant && !(self.p >= 0.0 && self.q >= 0.0 && self.p + self.q > 0.0) {
            return bad(format!("constant coefficients need p, q >= 0 and p + q > 0, got {}, {}", self.p, self.q));
        }
        if self.mesh_n == 0 {
            return bad("mesh_n must be at least 1".into());
        }
        if let Some(levels) = &self.levels {
            if levels.is_empty() || levels.contains(&0) {
                return bad(format!("levels must be a nonempty list of positive resolutions, got {levels:?}"));
            }
        }
        if self.bench_sizes.is_empty() || self.bench_sizes.contains(&0) {
            return bad(format!("bench_sizes must be nonempty and positive, got {:?}", self.bench_sizes));
        }
        if !(1..=4).contains(&self.quadrature_degree) {
            return bad(format!("quadrature degree must be 1 to 4, got {}", self.quadrature_degree));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) {
            return bad(format!("solver tolerance must lie in (0, 1), got {}", self.solver_tol));
        }
        if self.solver_max_iter == 0 {
            return bad("solver_max_iter must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if self.mesh_node.is_some() != self.mesh_ele.is_some() {
            return bad("mesh_node and mesh_ele must be given together".into());
        }
        if self.problem == ProblemKind::Custom && self.mesh_node.is_none() {
            return bad("the custom problem needs mesh_node and mesh_ele".into());
        }
        Ok(())
    }

    pub fn coefficient_model(&self) -> Coefficients {
        match self.coefficients {
            CoefficientKind::Trig => Coefficients::Trig,
            CoefficientKind::Constant => Coefficients::Constant { p: self.p, q: self.q },
        }
    }

    pub fn build_problem(&self) -> Result<FractionalDiffusionProblem, CliError> {
        let beta = self.beta();
        let problem = match self.problem {
            ProblemKind::Cube => FractionalDiffusionProblem::cube_manufactured(self.dim, beta, self.coefficient_model())?,
            ProblemKind::Ball => FractionalDiffusionProblem::ball_trig(self.dim, self.radius, beta)?,
            ProblemKind::Custom => {
                let mut p = FractionalDiffusionProblem::new(
                    self.dim,
                    Domain::UnitCube,
                    beta,
                    self.coefficient_model(),
                    None::<Polynomial>,
                )?;
                p.rhs = Some(std::sync::Arc::new(ConstantField(self.rhs)));
                p
            }
        };
        Ok(problem)
    }

    /// Write the configuration into the output directory.
    pub fn echo(&self) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Invalid(format!("cannot serialize config: {e}")))?;
        let path = self.out.join(EFFECTIVE_CONFIG);
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}
