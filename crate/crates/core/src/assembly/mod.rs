//! Global assembly of bilinear terms `sign · (c D^α_i u, D̂^β_i v)`.
//!
//! Each element contributes a dense block whose rows are the test basis
//! functions and whose columns are the trial basis functions reached by the
//! paths of its quadrature points. Blocks are computed in parallel batches and
//! scattered in element order into a matrix whose structure is fixed up front,
//! so the result does not depend on the number of threads.

mod csr;
mod pattern;
mod quadrature;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

pub use csr::{pattern_to_matrix_market, CsrMatrix};
pub use pattern::{build_sparsity_pattern, SparsityPattern};
pub use quadrature::{quadrature_rule, QuadratureRule};

use crate::fracops::{derivative_classical, eval_global_basis, FracError, FractionalOrder, Side};
use crate::mesh::{patch_bounds, Point, SimplicialMesh};
use crate::raypath::{trace_path_from, IntegrationPath, RayPathError};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("no quadrature rule of degree {degree} for dimension {dim} (degrees 1-4, dimensions 2-3)")]
    UnsupportedQuadrature { dim: usize, degree: usize },
    #[error("scatter target ({row}, {col}) lies outside the predicted sparsity pattern")]
    PatternViolation { row: usize, col: usize },
    #[error("invalid operator term: {0}")]
    InvalidTerm(String),
    #[error("quadrature rule is {rule}-D but the mesh is {mesh}-D")]
    DimensionMismatch { rule: usize, mesh: usize },
    #[error("pattern has {pattern} rows but the mesh has {mesh} vertices")]
    PatternSize { pattern: usize, mesh: usize },
    #[error(transparent)]
    Path(#[from] RayPathError),
    #[error(transparent)]
    Frac(#[from] FracError),
}

/// A scalar function of position, evaluated at quadrature points.
pub trait ScalarField: Send + Sync {
    fn eval(&self, x: &Point) -> f64;
}

impl<F> ScalarField for F
where
    F: Fn(&Point) -> f64 + Send + Sync,
{
    fn eval(&self, x: &Point) -> f64 {
        self(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField(pub f64);

impl ScalarField for ConstantField {
    fn eval(&self, _: &Point) -> f64 {
        self.0
    }
}

#[derive(Clone)]
pub struct OperatorTerm {
    pub axis: usize,
    pub trial: FractionalOrder,
    pub test: FractionalOrder,
    pub coefficient: Arc<dyn ScalarField>,
    pub sign: f64,
}

impl fmt::Debug for OperatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorTerm")
            .field("axis", &self.axis)
            .field("trial", &self.trial)
            .field("test", &self.test)
            .field("sign", &self.sign)
            .finish_non_exhaustive()
    }
}

impl OperatorTerm {
    pub fn new(
        axis: usize,
        trial: FractionalOrder,
        test: FractionalOrder,
        coefficient: Arc<dyn ScalarField>,
        sign: f64,
    ) -> Result<Self, AssemblyError> {
        if trial.axis() != axis || test.axis() != axis {
            return Err(AssemblyError::InvalidTerm(format!(
                "orders act on axes {} and {}, term on axis {axis}",
                trial.axis(),
                test.axis()
            )));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(AssemblyError::InvalidTerm(format!("sign must be ±1, got {sign}")));
        }
        if !trial.is_classical() && !test.is_classical() && trial.side() == test.side() {
            return Err(AssemblyError::InvalidTerm("fractional trial and test must act from opposite sides".into()));
        }
        let total = trial.gamma() + test.gamma();
        if !(total > 1.0 && total <= 2.0) {
            return Err(AssemblyError::InvalidTerm(format!("order sum {total} outside (1, 2]")));
        }
        Ok(Self {
            axis,
            trial,
            test,
            coefficient,
            sign,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dirichlet {
    /// `u = 0` on the boundary: boundary vertices are removed.
    Homogeneous,
    /// Every vertex is a degree of freedom.
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    free_of_vertex: Vec<Option<usize>>,
    vertex_of_free: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &SimplicialMesh, dirichlet: Dirichlet) -> Self {
        let mut free_of_vertex = vec![None; mesh.num_vertices()];
        let mut vertex_of_free = Vec::new();
        for (v, slot) in free_of_vertex.iter_mut().enumerate() {
            if dirichlet == Dirichlet::None || !mesh.is_boundary_vertex(v) {
                *slot = Some(vertex_of_free.len());
                vertex_of_free.push(v);
            }
        }
        Self {
            free_of_vertex,
            vertex_of_free,
        }
    }

    pub fn num_free(&self) -> usize {
        self.vertex_of_free.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.free_of_vertex.len()
    }

    pub fn free_index(&self, vertex: usize) -> Option<usize> {
        self.free_of_vertex[vertex]
    }

    pub fn vertex_of(&self, free: usize) -> usize {
        self.vertex_of_free[free]
    }

    /// Vertex values from free values, zero on constrained vertices.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        self.free_of_vertex
            .iter()
            .map(|f| f.map_or(0.0, |i| free[i]))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub paths_traced: usize,
    pub segments: usize,
    pub simplices_examined: usize,
}

impl AssemblyStats {
    fn merge(&mut self, o: &AssemblyStats) {
        self.paths_traced += o.paths_traced;
        self.segments += o.segments;
        self.simplices_examined += o.simplices_examined;
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
    /// Pattern over all vertices, before restriction to free ones.
    pub full_pattern_nnz: usize,
    pub stats: AssemblyStats,
}

/// Dense contribution of one element, in free-dof numbering. `rows` and
/// `cols` are sorted; `values` is row-major `rows.len() × cols.len()`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElementBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
    pub load_rows: Vec<usize>,
    pub load: Vec<f64>,
    pub stats: AssemblyStats,
}

impl ElementBlock {
    /// Every `(row, col, value)` triple of the dense block.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let nc = self.cols.len();
        self.rows.iter().enumerate().flat_map(move |(a, &r)| {
            self.cols
                .iter()
                .enumerate()
                .map(move |(b, &c)| (r, c, self.values[a * nc + b]))
        })
    }
}

/// Assembles with a pattern predicted from the terms.
pub fn assemble(
    mesh: &SimplicialMesh,
    terms: &[OperatorTerm],
    quadrature: &QuadratureRule,
    rhs_field: &dyn ScalarField,
    dirichlet: Dirichlet,
) -> Result<DiscreteSystem, AssemblyError> {
    let bounds = patch_bounds(mesh);
    let pattern = build_sparsity_pattern(mesh, &bounds, terms);
    assemble_with_pattern(mesh, &pattern, terms, quadrature, rhs_field, dirichlet)
}

pub fn assemble_with_pattern(
    mesh: &SimplicialMesh,
    pattern: &SparsityPattern,
    terms: &[OperatorTerm],
    quadrature: &QuadratureRule,
    rhs_field: &dyn ScalarField,
    dirichlet: Dirichlet,
) -> Result<DiscreteSystem, AssemblyError> {
    if pattern.n() != mesh.num_vertices() {
        return Err(AssemblyError::PatternSize {
            pattern: pattern.n(),
            mesh: mesh.num_vertices(),
        });
    }
    let dof_map = DofMap::new(mesh, dirichlet);
    let free_pattern = pattern.restrict(&dof_map);
    let mut matrix = CsrMatrix::zeros(&free_pattern);
    let mut rhs = vec![0.0; dof_map.num_free()];
    let mut stats = AssemblyStats::default();
    let ctx = ElementContext::new(mesh, terms, quadrature, rhs_field, &dof_map)?;

    let ne = mesh.num_simplices();
    let batch = 256;
    let mut start = 0;
    while start < ne {
        let end = (start + batch).min(ne);
        let blocks: Vec<Result<ElementBlock, AssemblyError>> = (start..end)
            .into_par_iter()
            .map_init(|| Scratch::new(mesh.num_vertices()), |s, e| ctx.element_block(e, s))
            .collect();
        for block in blocks {
            let block = block?;
            scatter_block(&mut matrix, &block)?;
            for (&r, &v) in block.load_rows.iter().zip(&block.load) {
                rhs[r] += v;
            }
            stats.merge(&block.stats);
        }
        start = end;
    }
    Ok(DiscreteSystem {
        matrix,
        rhs,
        dof_map,
        full_pattern_nnz: pattern.nnz(),
        stats,
    })
}

pub fn scatter_block(matrix: &mut CsrMatrix, block: &ElementBlock) -> Result<(), AssemblyError> {
    let nc = block.cols.len();
    for (a, &r) in block.rows.iter().enumerate() {
        matrix.add_row_sorted(r, &block.cols, &block.values[a * nc..(a + 1) * nc])?;
    }
    Ok(())
}

/// Element blocks for every simplex, in element order.
pub fn element_blocks(
    mesh: &SimplicialMesh,
    terms: &[OperatorTerm],
    quadrature: &QuadratureRule,
    rhs_field: &dyn ScalarField,
    dof_map: &DofMap,
) -> Result<Vec<ElementBlock>, AssemblyError> {
    let ctx = ElementContext::new(mesh, terms, quadrature, rhs_field, dof_map)?;
    (0..mesh.num_simplices())
        .into_par_iter()
        .map_init(|| Scratch::new(mesh.num_vertices()), |s, e| ctx.element_block(e, s))
        .collect()
}

/// Distinct derivative kinds needed by the terms.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Operand {
    Classical { axis: usize },
    Fractional { order: FractionalOrder, path: usize },
}

struct ElementContext<'a> {
    mesh: &'a SimplicialMesh,
    quadrature: &'a QuadratureRule,
    rhs_field: &'a dyn ScalarField,
    dof_map: &'a DofMap,
    operands: Vec<Operand>,
    /// `(axis, side)` of every path that must be traced.
    paths: Vec<(usize, Side)>,
    /// `(trial operand, test operand, coefficient, sign)` per term.
    terms: Vec<(usize, usize, Arc<dyn ScalarField>, f64)>,
}

struct Scratch {
    row_pos: Vec<usize>,
    col_pos: Vec<usize>,
    paths: Vec<Option<IntegrationPath>>,
    values: Vec<Vec<Vec<(usize, f64)>>>,
    tmp: Vec<(usize, f64)>,
}

impl Scratch {
    fn new(num_vertices: usize) -> Self {
        Self {
            row_pos: vec![usize::MAX; num_vertices],
            col_pos: vec![usize::MAX; num_vertices],
            paths: Vec::new(),
            values: Vec::new(),
            tmp: Vec::new(),
        }
    }
}

impl<'a> ElementContext<'a> {
    fn new(
        mesh: &'a SimplicialMesh,
        terms: &[OperatorTerm],
        quadrature: &'a QuadratureRule,
        rhs_field: &'a dyn ScalarField,
        dof_map: &'a DofMap,
    ) -> Result<Self, AssemblyError> {
        if quadrature.dim != mesh.dim() {
            return Err(AssemblyError::DimensionMismatch {
                rule: quadrature.dim,
                mesh: mesh.dim(),
            });
        }
        let mut operands = Vec::new();
        let mut paths = Vec::new();
        let mut spec_of = |o: &FractionalOrder| -> Result<usize, AssemblyError> {
            if o.axis() >= mesh.dim() {
                return Err(AssemblyError::InvalidTerm(format!("axis {} in a {}-D mesh", o.axis(), mesh.dim())));
            }
            let operand = if o.is_classical() {
                Operand::Classical { axis: o.axis() }
            } else {
                let key = (o.axis(), o.side());
                let path = paths.iter().position(|p| *p == key).unwrap_or_else(|| {
                    paths.push(key);
                    paths.len() - 1
                });
                Operand::Fractional { order: *o, path }
            };
            Ok(operands.iter().position(|s| *s == operand).unwrap_or_else(|| {
                operands.push(operand);
                operands.len() - 1
            }))
        };
        let mut mapped = Vec::with_capacity(terms.len());
        for t in terms {
            let a = spec_of(&t.trial)?;
            let b = spec_of(&t.test)?;
            mapped.push((a, b, t.coefficient.clone(), t.sign));
        }
        Ok(Self {
            mesh,
            quadrature,
            rhs_field,
            dof_map,
            operands,
            paths,
            terms: mapped,
        })
    }

    fn element_block(&self, e: usize, s: &mut Scratch) -> Result<ElementBlock, AssemblyError> {
        let mesh = self.mesh;
        let nq = self.quadrature.len();
        let noperand = self.operands.len();
        let jac = mesh.geometry(e).det.abs();
        let cell = mesh.simplex(e);
        let mut block = ElementBlock::default();

        s.paths.resize(self.paths.len(), None);
        s.values.resize_with(nq, Vec::new);
        let mut points = Vec::with_capacity(nq);
        for q in 0..nq {
            let bary = &self.quadrature.points[q];
            let x = mesh.point_from_barycentric(e, &bary[..=mesh.dim()]);
            points.push(x);
            for (p, &(axis, side)) in self.paths.iter().enumerate() {
                let path = trace_path_from(mesh, e, &x, axis, side)?;
                block.stats.paths_traced += 1;
                block.stats.segments += path.segments.len();
                block.stats.simplices_examined += path.examined;
                s.paths[p] = Some(path);
            }
            let vals = &mut s.values[q];
            vals.resize_with(noperand, Vec::new);
            for (k, operand) in self.operands.iter().enumerate() {
                let out = &mut vals[k];
                out.clear();
                match operand {
                    Operand::Classical { axis } => {
                        for (l, &v) in cell.iter().enumerate() {
                            if let Some(f) = self.dof_map.free_index(v) {
                                out.push((f, derivative_classical(mesh, e, l, *axis)));
                            }
                        }
                        out.sort_unstable_by_key(|p| p.0);
                    }
                    Operand::Fractional { order, path } => {
                        let path = s.paths[*path].as_ref().expect("path traced");
                        eval_global_basis(order, path, mesh, &mut s.tmp)?;
                        out.extend(
                            s.tmp
                                .iter()
                                .filter_map(|&(v, d)| self.dof_map.free_index(v).map(|f| (f, d))),
                        );
                    }
                }
            }
        }

        // Row and column sets over all quadrature points and terms.
        for q in 0..nq {
            for &(a, b, _, _) in &self.terms {
                for &(c, _) in &s.values[q][a] {
                    if s.col_pos[c] == usize::MAX {
                        s.col_pos[c] = 0;
                        block.cols.push(c);
                    }
                }
                for &(r, _) in &s.values[q][b] {
                    if s.row_pos[r] == usize::MAX {
                        s.row_pos[r] = 0;
                        block.rows.push(r);
                    }
                }
            }
        }
        block.rows.sort_unstable();
        block.cols.sort_unstable();
        for (i, &r) in block.rows.iter().enumerate() {
            s.row_pos[r] = i;
        }
        for (i, &c) in block.cols.iter().enumerate() {
            s.col_pos[c] = i;
        }
        let nc = block.cols.len();
        block.values = vec![0.0; block.rows.len() * nc];
        for q in 0..nq {
            let x = &points[q];
            let w = self.quadrature.weights[q] * jac;
            for (a, b, coef, sign) in &self.terms {
                let factor = w * sign * coef.eval(x);
                if factor == 0.0 {
                    continue;
                }
                for &(r, tv) in &s.values[q][*b] {
                    let base = s.row_pos[r] * nc;
                    let ft = factor * tv;
                    for &(c, uv) in &s.values[q][*a] {
                        block.values[base + s.col_pos[c]] += ft * uv;
                    }
                }
            }
        }
        for &r in &block.rows {
            s.row_pos[r] = usize::MAX;
        }
        for &c in &block.cols {
            s.col_pos[c] = usize::MAX;
        }

        // Load vector: (f, ψ_k) with P1 values equal to barycentric weights.
        for (l, &v) in cell.iter().enumerate() {
            if let Some(f) = self.dof_map.free_index(v) {
                let val: f64 = (0..nq)
                    .map(|q| self.quadrature.weights[q] * jac * self.rhs_field.eval(&points[q]) * self.quadrature.points[q][l])
                    .sum();
                block.load_rows.push(f);
                block.load.push(val);
            }
        }
        Ok(block)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixStats {
    pub n: usize,
    pub nnz: usize,
    /// Stored entries with `|a| > 1e-14 · max|a|`.
    pub nnz_numeric: usize,
    pub density: f64,
    pub symmetry_defect: f64,
}

pub fn matrix_stats(system: &DiscreteSystem) -> MatrixStats {
    let m = &system.matrix;
    let n = m.n();
    let max = m.max_abs();
    let nnz_numeric = m.values().iter().filter(|v| v.abs() > 1e-14 * max).count();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        let (cols, vals) = m.row(i);
        for (&j, &a) in cols.iter().zip(vals) {
            defect = defect.max((a - m.get(j, i)).abs());
        }
    }
    MatrixStats {
        n,
        nnz: m.nnz(),
        nnz_numeric,
        density: if n == 0 { 0.0 } else { m.nnz() as f64 / (n as f64 * n as f64) },
        symmetry_defect: defect,
    }
}
