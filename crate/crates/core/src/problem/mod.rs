//! Steady fractional diffusion in divergence form,
//!
//! `Σ_i ∂_i ( p_i D^{β_i}_{a_i,x_i} u − q_i D^{β_i}_{x_i,b_i} u ) = f` in Ω, `u = 0` outside,
//!
//! with manufactured polynomial solutions, the linear solve, error norms and
//! convergence studies.

mod polynomial;
mod solver;
mod vtk;

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use log::info;
use thiserror::Error;

pub use polynomial::Polynomial;
pub use solver::{solve, Solution, SolveError, SolveMethod, SolverOptions};
pub use vtk::write_vtk;

use crate::assembly::{
    assemble, quadrature_rule, AssemblyError, Dirichlet, DiscreteSystem, OperatorTerm, ScalarField,
};
use crate::fracops::{FractionalOrder, Side};
use crate::mesh::{Point, SimplicialMesh};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("point {point:?} is not strictly inside the domain along axis {axis}")]
    OutsideDomain { point: Point, axis: usize },
    #[error("coefficients at {point:?} violate p, q ≥ 0 with p + q > 0 (axis {axis}: p = {p}, q = {q})")]
    Coefficient { point: Point, axis: usize, p: f64, q: f64 },
    #[error("problem has no exact solution")]
    NoExactSolution,
    #[error("convergence study needs at least one mesh level")]
    NoLevels,
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// `[0, 1]^n`.
    UnitCube,
    /// `|x| < radius`.
    Ball { radius: f64 },
}

impl Domain {
    /// Chord bounds `(a_i(x), b_i(x))` of the line through `x` along `e_axis`.
    pub fn chord_bounds(&self, x: &Point, axis: usize, dim: usize) -> Option<(f64, f64)> {
        match *self {
            Domain::UnitCube => Some((0.0, 1.0)),
            Domain::Ball { radius } => {
                let rest: f64 = (0..dim).filter(|&d| d != axis).map(|d| x[d] * x[d]).sum();
                let w2 = radius * radius - rest;
                (w2 > 0.0).then(|| {
                    let w = w2.sqrt();
                    (-w, w)
                })
            }
        }
    }

    pub fn volume(&self, dim: usize) -> f64 {
        match *self {
            Domain::UnitCube => 1.0,
            Domain::Ball { radius } => match dim {
                2 => std::f64::consts::PI * radius * radius,
                _ => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficients {
    /// `p_i = cos x_i`, `q_i = 1 − cos x_i`.
    Trig,
    Constant { p: f64, q: f64 },
}

impl Coefficients {
    /// `(p_i, q_i, ∂_i p_i, ∂_i q_i)` at `x`.
    pub fn eval(&self, x: &Point, axis: usize) -> (f64, f64, f64, f64) {
        match *self {
            Coefficients::Trig => {
                let (s, c) = x[axis].sin_cos();
                (c, 1.0 - c, -s, s)
            }
            Coefficients::Constant { p, q } => (p, q, 0.0, 0.0),
        }
    }
}

#[derive(Clone)]
pub struct FractionalDiffusionProblem {
    pub dim: usize,
    pub domain: Domain,
    pub beta: Vec<f64>,
    pub coefficients: Coefficients,
    pub exact: Option<Polynomial>,
    /// Replaces the manufactured right-hand side when set.
    pub rhs: Option<Arc<dyn ScalarField>>,
}

impl std::fmt::Debug for FractionalDiffusionProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FractionalDiffusionProblem")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("beta", &self.beta)
            .field("coefficients", &self.coefficients)
            .field("exact", &self.exact)
            .finish_non_exhaustive()
    }
}

impl FractionalDiffusionProblem {
    pub fn new(
        dim: usize,
        domain: Domain,
        beta: Vec<f64>,
        coefficients: Coefficients,
        exact: Option<Polynomial>,
    ) -> Result<Self, ProblemError> {
        if dim != 2 && dim != 3 {
            return Err(ProblemError::Invalid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if beta.len() != dim {
            return Err(ProblemError::Invalid(format!("expected {dim} orders, got {}", beta.len())));
        }
        if let Some(b) = beta.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return Err(ProblemError::Invalid(format!("orders must lie in (0, 1), got {b}")));
        }
        if let Domain::Ball { radius } = domain {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(ProblemError::Invalid(format!("radius must be positive, got {radius}")));
            }
        }
        if let Coefficients::Constant { p, q } = coefficients {
            if !(p >= 0.0 && q >= 0.0 && p + q > 0.0) {
                return Err(ProblemError::Invalid(format!("constant coefficients need p, q ≥ 0 and p + q > 0, got {p}, {q}")));
            }
        }
        Ok(Self {
            dim,
            domain,
            beta,
            coefficients,
            exact,
            rhs: None,
        })
    }

    /// Unit cube, `u = Π x_d (1 − x_d)`.
    pub fn cube_manufactured(dim: usize, beta: Vec<f64>, coefficients: Coefficients) -> Result<Self, ProblemError> {
        let mut p = Self::new(dim, Domain::UnitCube, beta, coefficients, None)?;
        p.exact = Some(Polynomial::cube_bubble(dim));
        Ok(p)
    }

    /// Ball of radius `r`, `u = (|x|² − r²)²`, `p_i = cos x_i`, `q_i = 1 − cos x_i`.
    pub fn ball_trig(dim: usize, radius: f64, beta: Vec<f64>) -> Result<Self, ProblemError> {
        let mut p = Self::new(dim, Domain::Ball { radius }, beta, Coefficients::Trig, None)?;
        p.exact = Some(Polynomial::ball_bubble(dim, radius));
        Ok(p)
    }

    pub fn exact_value(&self, x: &Point) -> Option<f64> {
        self.exact.as_ref().map(|u| u.eval(x))
    }

    pub fn check_coefficients(&self, x: &Point) -> Result<(), ProblemError> {
        for axis in 0..self.dim {
            let (p, q, _, _) = self.coefficients.eval(x, axis);
            if !(p >= 0.0 && q >= 0.0 && p + q > 0.0) {
                return Err(ProblemError::Coefficient { point: *x, axis, p, q });
            }
        }
        Ok(())
    }
}

struct CoefficientField {
    coefficients: Coefficients,
    axis: usize,
    right: bool,
}

impl ScalarField for CoefficientField {
    fn eval(&self, x: &Point) -> f64 {
        let (p, q, _, _) = self.coefficients.eval(x, self.axis);
        if self.right {
            q
        } else {
            p
        }
    }
}

/// `a(u, v) = −Σ_i [ (p_i D_L u, ∂_i v) − (q_i D_R u, ∂_i v) ]` as two terms per axis.
pub fn weak_form_terms(problem: &FractionalDiffusionProblem) -> Vec<OperatorTerm> {
    let mut terms = Vec::with_capacity(2 * problem.dim);
    for axis in 0..problem.dim {
        let beta = problem.beta[axis];
        for (side, sign) in [(Side::Left, -1.0), (Side::Right, 1.0)] {
            let field = CoefficientField {
                coefficients: problem.coefficients,
                axis,
                right: side == Side::Right,
            };
            let trial = FractionalOrder::new(beta, side, axis).expect("validated order");
            terms.push(
                OperatorTerm::new(axis, trial, FractionalOrder::classical(axis), Arc::new(field), sign)
                    .expect("valid weak-form term"),
            );
        }
    }
    terms
}

/// `f(x)` for the exact solution, in closed form. The restriction of `u` to
/// each chord is a polynomial in `x_i`; expanded about `a_i` (left) or `b_i`
/// (right) the fractional power rule applies term by term, and the outer
/// derivative acts on `x_i` only.
pub fn manufactured_rhs(problem: &FractionalDiffusionProblem, x: &Point) -> Result<f64, ProblemError> {
    let u = problem.exact.as_ref().ok_or(ProblemError::NoExactSolution)?;
    let mut f = 0.0;
    for axis in 0..problem.dim {
        let (a, b) = problem
            .domain
            .chord_bounds(x, axis, problem.dim)
            .ok_or(ProblemError::OutsideDomain { point: *x, axis })?;
        let sl = x[axis] - a;
        let sr = b - x[axis];
        if !(sl > 0.0 && sr > 0.0) {
            return Err(ProblemError::OutsideDomain { point: *x, axis });
        }
        let beta = problem.beta[axis];
        let line = u.restrict_to_line(x, axis);
        let rho = polynomial::shift(&line, a);
        let sigma: Vec<f64> = polynomial::shift(&line, b)
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { *c } else { -*c })
            .collect();
        let (dl, dl1) = power_rule(&rho, beta, sl);
        let (dr, dr1) = power_rule(&sigma, beta, sr);
        let (p, q, dp, dq) = problem.coefficients.eval(x, axis);
        // d/dx_i of D_R u picks up −1 from s = b − x_i.
        f += dp * dl + p * dl1 - dq * dr + q * dr1;
    }
    Ok(f)
}

/// `(Σ c_k g_k s^{k−β}, Σ c_k g_k (k−β) s^{k−β−1})` with
/// `g_k = Γ(k+1)/Γ(k+1−β)`.
fn power_rule(c: &[f64], beta: f64, s: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let kf = k as f64;
        let g = statrs::function::gamma::gamma(kf + 1.0) / statrs::function::gamma::gamma(kf + 1.0 - beta);
        let p = s.powf(kf - beta);
        v += ck * g * p;
        d += ck * g * (kf - beta) * p / s;
    }
    (v, d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf: f64,
}

/// `‖u_h − u‖` in L² (degree-4 element quadrature) and L∞ (maximum over the
/// quadrature points and vertices). `u_h` holds vertex values.
pub fn error_norms(mesh: &SimplicialMesh, u_h: &[f64], exact: &dyn Fn(&Point) -> f64) -> ErrorNorms {
    let rule = quadrature_rule(mesh.dim(), 4).expect("degree-4 rule exists");
    let nv = mesh.dim() + 1;
    let mut l2 = 0.0;
    let mut linf: f64 = 0.0;
    for (s, cell) in mesh.simplices().enumerate() {
        let jac = mesh.geometry(s).det.abs();
        for (k, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.point_from_barycentric(s, &k[..nv]);
            let uh: f64 = (0..nv).map(|l| k[l] * u_h[cell[l]]).sum();
            let e = uh - exact(&x);
            l2 += w * jac * e * e;
            linf = linf.max(e.abs());
        }
    }
    for (v, p) in mesh.vertices().iter().enumerate() {
        linf = linf.max((u_h[v] - exact(p)).abs());
    }
    ErrorNorms { l2: l2.sqrt(), linf }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyOptions {
    pub quadrature_degree: usize,
    pub solver: SolverOptions,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            quadrature_degree: 2,
            solver: SolverOptions::default(),
        }
    }
}

/// Assembled system, solution and errors for one mesh.
#[derive(Clone, Debug)]
pub struct LevelSolution {
    pub system: DiscreteSystem,
    pub solution: Solution,
    /// Vertex values, zero on the boundary.
    pub u_h: Vec<f64>,
    pub errors: Option<ErrorNorms>,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

pub fn solve_on_mesh(
    problem: &FractionalDiffusionProblem,
    mesh: &SimplicialMesh,
    opts: &StudyOptions,
) -> Result<LevelSolution, ProblemError> {
    if mesh.dim() != problem.dim {
        return Err(ProblemError::Invalid(format!(
            "mesh is {}-D, problem is {}-D",
            mesh.dim(),
            problem.dim
        )));
    }
    let rule = quadrature_rule(mesh.dim(), opts.quadrature_degree)?;
    for s in 0..mesh.num_simplices() {
        for k in &rule.points {
            problem.check_coefficients(&mesh.point_from_barycentric(s, &k[..=mesh.dim()]))?;
        }
    }
    let terms = weak_form_terms(problem);
    let t0 = Instant::now();
    let system = match &problem.rhs {
        Some(f) => assemble(mesh, &terms, &rule, f.as_ref(), Dirichlet::Homogeneous)?,
        None => {
            // Validate at every load point first; the field itself cannot fail.
            for s in 0..mesh.num_simplices() {
                for k in &rule.points {
                    manufactured_rhs(problem, &mesh.point_from_barycentric(s, &k[..=mesh.dim()]))?;
                }
            }
            let f = |x: &Point| manufactured_rhs(problem, x).unwrap_or(f64::NAN);
            assemble(mesh, &terms, &rule, &f, Dirichlet::Homogeneous)?
        }
    };
    let assembly_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let solution = solve(&system.matrix, &system.rhs, &opts.solver)?;
    let solve_seconds = t1.elapsed().as_secs_f64();
    let u_h = system.dof_map.expand(&solution.x);
    let errors = problem
        .exact
        .as_ref()
        .map(|u| error_norms(mesh, &u_h, &|x: &Point| u.eval(x)));
    Ok(LevelSolution {
        system,
        solution,
        u_h,
        errors,
        assembly_seconds,
        solve_seconds,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub h: f64,
    pub num_dofs: usize,
    pub l2_error: f64,
    pub l2_order: Option<f64>,
    pub linf_error: f64,
    pub linf_order: Option<f64>,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
    pub solver_iterations: usize,
    pub relative_residual: f64,
}

pub fn convergence_study(
    problem: &FractionalDiffusionProblem,
    meshes: &[SimplicialMesh],
    opts: &StudyOptions,
) -> Result<Vec<ConvergenceRecord>, ProblemError> {
    convergence_study_with(problem, meshes, opts, |_, _, _| {})
}

/// Like [`convergence_study`], handing each level's solution to `on_level`
/// before it is dropped.
pub fn convergence_study_with(
    problem: &FractionalDiffusionProblem,
    meshes: &[SimplicialMesh],
    opts: &StudyOptions,
    mut on_level: impl FnMut(usize, &SimplicialMesh, &LevelSolution),
) -> Result<Vec<ConvergenceRecord>, ProblemError> {
    if meshes.is_empty() {
        return Err(ProblemError::NoLevels);
    }
    if problem.exact.is_none() {
        return Err(ProblemError::NoExactSolution);
    }
    let mut records: Vec<ConvergenceRecord> = Vec::with_capacity(meshes.len());
    for (level, mesh) in meshes.iter().enumerate() {
        let h = mesh.max_diameter();
        info!(
            "level {level}: h = {h:.6}, {} vertices, {} simplices",
            mesh.num_vertices(),
            mesh.num_simplices()
        );
        let sol = solve_on_mesh(problem, mesh, opts)?;
        let e = sol.errors.expect("exact solution present");
        let (l2_order, linf_order) = match records.last() {
            Some(prev) => (
                Some(order(prev.l2_error, e.l2, prev.h, h)),
                Some(order(prev.linf_error, e.linf, prev.h, h)),
            ),
            None => (None, None),
        };
        info!(
            "level {level}: assembly {:.2}s, solve {:.2}s ({} iterations), L2 {:.3e}, Linf {:.3e}",
            sol.assembly_seconds, sol.solve_seconds, sol.solution.iterations, e.l2, e.linf
        );
        records.push(ConvergenceRecord {
            level,
            h,
            num_dofs: sol.system.dof_map.num_free(),
            l2_error: e.l2,
            l2_order,
            linf_error: e.linf,
            linf_order,
            assembly_seconds: sol.assembly_seconds,
            solve_seconds: sol.solve_seconds,
            solver_iterations: sol.solution.iterations,
            relative_residual: sol.solution.relative_residual,
        });
        on_level(level, mesh, &sol);
    }
    Ok(records)
}

fn order(e_prev: f64, e: f64, h_prev: f64, h: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

pub fn records_to_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("level,h,num_dofs,l2_error,l2_order,linf_error,linf_order,assembly_seconds,solve_seconds\n");
    let opt = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_default();
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{},{:e},{},{:.3},{:.3}",
            r.level,
            r.h,
            r.num_dofs,
            r.l2_error,
            opt(r.l2_order),
            r.linf_error,
            opt(r.linf_order),
            r.assembly_seconds,
            r.solve_seconds
        );
    }
    out
}

/// Console table in the layout `h | L2 | order | Linf | order`.
pub fn records_table(records: &[ConvergenceRecord]) -> String {
    let mut out = format!(
        "{:>10} {:>8} {:>11} {:>6} {:>11} {:>6}\n",
        "h", "dofs", "L2 error", "order", "Linf error", "order"
    );
    let opt = |o: Option<f64>| o.map(|v| format!("{v:.2}")).unwrap_or_default();
    for r in records {
        let _ = writeln!(
            out,
            "{:>10.6} {:>8} {:>11.3e} {:>6} {:>11.3e} {:>6}",
            r.h,
            r.num_dofs,
            r.l2_error,
            opt(r.l2_order),
            r.linf_error,
            opt(r.linf_order)
        );
    }
    out
}
