use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use fracfem::assembly::pattern_to_matrix_market;
use fracfem::bench::{classical_terms, rows_to_csv, run_bench};
use fracfem::mesh::{generate_ball_mesh, generate_cube_mesh, load_mesh, patch_bounds, save_mesh};
use fracfem::problem::{
    convergence_study_with, manufactured_rhs, records_table, records_to_csv, weak_form_terms, write_vtk,
    FractionalDiffusionProblem, SolverOptions, StudyOptions,
};
use fracfem::raypath::{exit_face, trace_path};
use fracfem::{
    build_sparsity_pattern, matrix_stats, quadrature_rule, Dirichlet, DofMap, Point, QuadratureRule, Side,
    SimplicialMesh,
};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ProblemKind, RunConfig};
use crate::error::CliError;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn generate(c: &RunConfig, n: usize) -> Result<SimplicialMesh, CliError> {
    let mesh = match c.problem {
        ProblemKind::Ball => generate_ball_mesh(n, c.radius, c.dim)?,
        _ => generate_cube_mesh(n, c.dim)?,
    };
    Ok(mesh)
}

/// The configured mesh files, or the generator mesh at `mesh_n`.
fn configured_mesh(c: &RunConfig) -> Result<SimplicialMesh, CliError> {
    let mesh = match (&c.mesh_node, &c.mesh_ele) {
        (Some(node), Some(ele)) => load_mesh(node, ele)?,
        _ => generate(c, c.mesh_n)?,
    };
    if mesh.dim() != c.dim {
        return Err(CliError::Invalid(format!("mesh is {}-D but dim = {}", mesh.dim(), c.dim)));
    }
    Ok(mesh)
}

fn summary(mesh: &SimplicialMesh) -> String {
    let kind = if mesh.dim() == 3 { "tetrahedra" } else { "triangles" };
    format!(
        "{} vertices, {} {kind}\nh = {:.6}\nmin volume = {:e}\ntotal volume = {:.6}\nboundary faces = {}\n",
        mesh.num_vertices(),
        mesh.num_simplices(),
        mesh.max_diameter(),
        mesh.min_volume(),
        mesh.total_volume(),
        mesh.num_boundary_faces()
    )
}

pub fn mesh(c: &RunConfig) -> Result<(), CliError> {
    let mesh = generate(c, c.mesh_n)?;
    let stem = match c.problem {
        ProblemKind::Ball => "ball",
        _ => "cube",
    };
    let (node, ele) = (c.out.join(format!("{stem}.node")), c.out.join(format!("{stem}.ele")));
    save_mesh(&mesh, &node, &ele)?;
    print!("{}", summary(&mesh));
    eprintln!("wrote {} and {}", node.display(), ele.display());
    Ok(())
}

pub fn mesh_info(node: &Path, ele: &Path) -> Result<(), CliError> {
    print!("{}", summary(&load_mesh(node, ele)?));
    Ok(())
}

/// Check the coefficients (and the manufactured source, if there is one) at
/// every quadrature point before assembling.
fn check_problem(problem: &FractionalDiffusionProblem, mesh: &SimplicialMesh, rule: &QuadratureRule) -> Result<(), CliError> {
    for s in 0..mesh.num_simplices() {
        for k in &rule.points {
            let x = mesh.point_from_barycentric(s, &k[..=mesh.dim()]);
            problem.check_coefficients(&x)?;
            if problem.rhs.is_none() {
                manufactured_rhs(problem, &x)?;
            }
        }
    }
    Ok(())
}

pub fn assemble(c: &RunConfig) -> Result<(), CliError> {
    let mesh = configured_mesh(c)?;
    let problem = c.build_problem()?;
    let rule = quadrature_rule(mesh.dim(), c.quadrature_degree)?;
    check_problem(&problem, &mesh, &rule)?;
    let terms = if c.classical { classical_terms(mesh.dim()) } else { weak_form_terms(&problem) };

    let t = Instant::now();
    let pattern = build_sparsity_pattern(&mesh, &patch_bounds(&mesh), &terms)
        .restrict(&DofMap::new(&mesh, Dirichlet::Homogeneous));
    let pattern_seconds = t.elapsed().as_secs_f64();

    let f = |x: &Point| match &problem.rhs {
        Some(r) => r.eval(x),
        None => manufactured_rhs(&problem, x).unwrap_or(f64::NAN),
    };
    let t = Instant::now();
    let system = fracfem::assemble(&mesh, &terms, &rule, &f, Dirichlet::Homogeneous)?;
    let assembly_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    write_file(&c.out.join("matrix.mtx"), &system.matrix.to_matrix_market())?;
    write_file(&c.out.join("pattern.mtx"), &pattern_to_matrix_market(&pattern))?;
    let write_seconds = t.elapsed().as_secs_f64();

    let stats = matrix_stats(&system);
    let mut out = String::new();
    let _ = writeln!(out, "{} vertices, {} simplices", mesh.num_vertices(), mesh.num_simplices());
    let _ = writeln!(out, "dofs = {}", stats.n);
    let _ = writeln!(out, "nnz = {}", stats.nnz);
    let _ = writeln!(out, "numerically nonzero = {}", stats.nnz_numeric);
    let _ = writeln!(out, "density = {:.6e}", stats.density);
    let _ = writeln!(out, "symmetry defect = {:.3e}", stats.symmetry_defect);
    let _ = writeln!(out, "pattern seconds = {pattern_seconds:.4}");
    let _ = writeln!(out, "assembly seconds = {assembly_seconds:.4}");
    let _ = writeln!(out, "write seconds = {write_seconds:.4}");
    print!("{out}");
    Ok(())
}

pub fn convergence(c: &RunConfig) -> Result<(), CliError> {
    if c.problem == ProblemKind::Custom {
        return Err(CliError::Invalid("convergence needs a problem with an exact solution (cube or ball-paper)".into()));
    }
    let problem = c.build_problem()?;
    let levels = c.levels.clone().unwrap_or_default();
    let meshes = levels.iter().map(|&n| generate(c, n)).collect::<Result<Vec<_>, _>>()?;
    let opts = StudyOptions {
        quadrature_degree: c.quadrature_degree,
        solver: SolverOptions {
            tol: c.solver_tol,
            max_iter: c.solver_max_iter,
            ..SolverOptions::default()
        },
    };
    let last = meshes.len().saturating_sub(1);
    let vtk = c.out.join("solution.vtk");
    let mut vtk_result = Ok(());
    let records = convergence_study_with(&problem, &meshes, &opts, |level, mesh, sol| {
        info!("level {level} done");
        if level == last {
            vtk_result = write_file(&vtk, &write_vtk(mesh, &sol.u_h, "u_h"));
        }
    })?;
    vtk_result?;
    write_file(&c.out.join("convergence.csv"), &records_to_csv(&records))?;
    print!("{}", records_table(&records));
    if let Some(worst) = records.iter().map(|r| r.relative_residual).reduce(f64::max) {
        eprintln!("max relative residual {worst:.2e}");
    }
    Ok(())
}

pub fn trace(c: &RunConfig, point: Option<&[f64]>, axis: usize, side: Side) -> Result<(), CliError> {
    let mesh = configured_mesh(c)?;
    let dim = mesh.dim();
    let x: Point = match point {
        Some(p) => {
            if p.len() != dim {
                return Err(CliError::Invalid(format!("--point needs {dim} coordinates, got {}", p.len())));
            }
            let mut x = [0.0; 3];
            x[..dim].copy_from_slice(p);
            x
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let s = rng.random_range(0..mesh.num_simplices());
            let w: Vec<f64> = (0..=dim).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            let k: Vec<f64> = w.iter().map(|v| v / total).collect();
            mesh.point_from_barycentric(s, &k)
        }
    };
    let path = trace_path(&mesh, &x, axis, side)?;
    let mut csv = String::from("segment_index,simplex_id,r_min,r_max,exit_entity\n");
    for (i, seg) in path.segments.iter().enumerate() {
        let cell = mesh.simplex(seg.simplex);
        let exit = exit_face(seg, dim)?;
        let ids: Vec<String> = exit.vertex_indices().iter().map(|&l| cell[l].to_string()).collect();
        let _ = writeln!(csv, "{i},{},{},{},{}", seg.simplex, seg.r_min, seg.r_max, ids.join(" "));
    }
    write_file(&c.out.join("trace.csv"), &csv)?;
    print!("{csv}");
    let chord = (x[axis] - path.chord_bound).abs();
    let total = path.total_length();
    eprintln!("point {:?}", &x[..dim]);
    eprintln!("segments {}, sum of lengths {total}, chord length {chord}, difference {:.3e}", path.segments.len(), (total - chord).abs());
    Ok(())
}

pub fn bench(c: &RunConfig) -> Result<(), CliError> {
    let beta = c.beta()[0];
    let rows = run_bench(&c.bench_sizes, c.dim, beta, c.quadrature_degree)?;
    let csv = rows_to_csv(&rows);
    write_file(&c.out.join("bench.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}
