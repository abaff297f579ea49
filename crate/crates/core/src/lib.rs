//! Finite-element assembly and solution of space-fractional Riemann–Liouville
//! diffusion problems on unstructured triangle and tetrahedron meshes.
//!
//! * [`mesh`]: conforming simplicial meshes, adjacency, patch bounds, I/O and
//!   structured generators (unit cube, ball).
//! * [`raypath`]: integration paths, the ordered chain of element chords from
//!   a quadrature point to the boundary along `±e_i`, found by walking the mesh
//!   adjacency with a barycentric ray–simplex test.
//! * [`fracops`]: closed-form left/right fractional derivatives of P1 basis
//!   functions, summed segment by segment along a path.
//! * [`assembly`]: quadrature rules, the predicted sparsity pattern and the
//!   pattern-locked global assembly of bilinear terms `(c D^α u, D̂^β v)`.
//! * [`problem`]: the steady fractional diffusion benchmark, manufactured
//!   solutions, the linear solver, error norms and convergence studies.
//! * [`bench`]: accumulation and assembly timings.

pub mod assembly;
pub mod bench;
pub mod fracops;
pub mod mesh;
pub mod problem;
pub mod raypath;

mod linalg;

pub use assembly::{
    assemble, build_sparsity_pattern, matrix_stats, quadrature_rule, ConstantField, CsrMatrix, Dirichlet,
    DiscreteSystem, DofMap, MatrixStats, OperatorTerm, QuadratureRule, ScalarField, SparsityPattern,
};
pub use fracops::{FractionalOrder, Side};
pub use mesh::{PatchBounds, Point, SimplicialMesh};
pub use raypath::{IntegrationPath, RayQuery, SegmentHit};
