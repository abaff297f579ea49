//! `fracfem`: meshes, assembly, convergence studies, path dumps and timing
//! reports for fractional diffusion problems.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracfem::Side;

use config::{default_levels, ProblemKind, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "fracfem", version, about = "Finite elements for space-fractional diffusion on simplicial meshes")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for assembly (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized choices.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "D")]
    quadrature_degree: Option<usize>,
    #[arg(long, global = true, value_name = "EPS")]
    solver_tol: Option<f64>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a mesh, or summarize one with --info.
    Mesh(MeshArgs),
    /// Assemble the stiffness matrix and export it with its pattern.
    Assemble(AssembleArgs),
    /// Solve on a sequence of meshes and report error orders.
    Convergence(ConvergenceArgs),
    /// Dump the integration path through one point as CSV.
    Trace(TraceArgs),
    /// Time pattern vs hash-map accumulation and fractional vs classical assembly.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct MeshArgs {
    /// Unit cube.
    #[arg(long, conflicts_with = "ball")]
    cube: bool,
    /// Ball of the configured radius.
    #[arg(long)]
    ball: bool,
    /// Subdivisions per axis.
    #[arg(short = 'n', long = "resolution")]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Output directory (same as --out).
    #[arg(short = 'o', long = "output", value_name = "DIR")]
    output: Option<PathBuf>,
    /// Summarize an existing mesh instead of generating one.
    #[arg(long, num_args = 2, value_names = ["NODE", "ELE"], conflicts_with_all = ["cube", "ball"])]
    info: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long, visible_alias = "preset", value_enum)]
    problem: Option<ProblemKind>,
    #[arg(long)]
    dim: Option<usize>,
    /// Order per axis.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    beta: Option<Vec<f64>>,
    /// Constant coefficients `p` and `q` instead of the trigonometric ones.
    #[arg(long, num_args = 2, value_names = ["P", "Q"], allow_negative_numbers = true)]
    constant: Option<Vec<f64>>,
    #[arg(long)]
    radius: Option<f64>,
    /// Generator resolution.
    #[arg(short = 'n', long = "resolution")]
    n: Option<usize>,
    /// Read the mesh from files instead of generating it.
    #[arg(long, num_args = 2, value_names = ["NODE", "ELE"])]
    mesh: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
struct AssembleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Assemble the classical Laplacian instead.
    #[arg(long)]
    classical: bool,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of levels taken from the default refinement ladder.
    #[arg(long, conflicts_with = "sizes")]
    levels: Option<usize>,
    /// Explicit generator resolutions, coarse to fine.
    #[arg(long, num_args = 1..)]
    sizes: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Start point; a seeded random interior point when omitted.
    #[arg(long, num_args = 2..=3, allow_negative_numbers = true)]
    point: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    axis: usize,
    #[arg(long, value_enum, default_value = "left")]
    side: SideArg,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Cube resolutions to time.
    #[arg(long, num_args = 1..)]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    dim: Option<usize>,
    /// Fractional order used on every axis.
    #[arg(long)]
    beta: Option<f64>,
}

impl ProblemArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(p) = self.problem {
            c.problem = p;
        }
        if let Some(d) = self.dim {
            c.dim = d;
        }
        if let Some(b) = &self.beta {
            c.beta = Some(b.clone());
        }
        if let Some(pq) = &self.constant {
            c.coefficients = config::CoefficientKind::Constant;
            c.p = pq[0];
            c.q = pq[1];
        }
        if let Some(r) = self.radius {
            c.radius = r;
        }
        if let Some(n) = self.n {
            c.mesh_n = n;
        }
        if let Some(m) = &self.mesh {
            c.mesh_node = Some(m[0].clone());
            c.mesh_ele = Some(m[1].clone());
        }
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let g = &cli.global;
    let mut c = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &g.out {
        c.out = o.clone();
    }
    if let Some(t) = g.threads {
        c.threads = Some(t);
    }
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(d) = g.quadrature_degree {
        c.quadrature_degree = d;
    }
    if let Some(t) = g.solver_tol {
        c.solver_tol = t;
    }
    match &cli.command {
        Command::Mesh(a) => {
            if a.cube {
                c.problem = ProblemKind::Cube;
            }
            if a.ball {
                c.problem = ProblemKind::Ball;
            }
            if let Some(n) = a.n {
                c.mesh_n = n;
            }
            if let Some(d) = a.dim {
                c.dim = d;
            }
            if let Some(r) = a.radius {
                c.radius = r;
            }
            if let Some(o) = &a.output {
                c.out = o.clone();
            }
        }
        Command::Assemble(a) => {
            a.problem.apply(&mut c);
            c.classical |= a.classical;
        }
        Command::Convergence(a) => {
            a.problem.apply(&mut c);
            if let Some(k) = a.levels {
                if k == 0 {
                    return Err(CliError::Invalid("--levels must be at least 1".into()));
                }
                c.levels = Some(default_levels(c.problem, k));
            } else if let Some(s) = &a.sizes {
                c.levels = Some(s.clone());
            }
        }
        Command::Trace(a) => a.problem.apply(&mut c),
        Command::Bench(a) => {
            if let Some(s) = &a.sizes {
                c.bench_sizes = s.clone();
            }
            if let Some(d) = a.dim {
                c.dim = d;
            }
            if let Some(b) = a.beta {
                c.beta = Some(vec![b; c.dim]);
            }
        }
    }
    c.resolve();
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Mesh(MeshArgs { info: Some(files), .. }) = &cli.command {
        return commands::mesh_info(&files[0], &files[1]);
    }
    let config = effective_config(&cli)?;
    if let Some(k) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot start {k} threads: {e}")))?;
    }
    std::fs::create_dir_all(&config.out).map_err(|source| CliError::Io { path: config.out.clone(), source })?;
    config.echo()?;
    match &cli.command {
        Command::Mesh(_) => commands::mesh(&config),
        Command::Assemble(_) => commands::assemble(&config),
        Command::Convergence(_) => commands::convergence(&config),
        Command::Trace(a) => {
            let side = match a.side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            commands::trace(&config, a.point.as_deref(), a.axis, side)
        }
        Command::Bench(_) => commands::bench(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
