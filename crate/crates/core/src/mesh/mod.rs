//! Conforming simplicial meshes (triangles in 2-D, tetrahedra in 3-D).
//!
//! A [`SimplicialMesh`] is immutable once built. Construction validates the
//! input (positive volumes after orientation fix-up, conformity, connectivity)
//! and precomputes everything the path walker and the assembly loop query in
//! their inner loops: face neighbours, vertex stars and per-simplex inverse
//! Jacobians.

mod generate;
mod io;

pub use generate::{generate_ball_mesh, generate_cube_mesh};
pub use io::{load_mesh, parse_mesh, read_ele, read_node, save_mesh, write_ele, write_node};

use std::collections::HashMap;
use std::collections::VecDeque;

use thiserror::Error;

use crate::linalg::{self, Mat3};

/// A point in physical space. 2-D meshes leave the last component at zero.
pub type Point = [f64; 3];

/// Relative degeneracy threshold: `|det A| ≤ EPS_VOL · (mean edge)^n` is rejected.
pub const EPS_VOL: f64 = 1e-12;

/// Absolute tolerance on barycentric components for containment and zero tests.
pub const EPS_FACE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("simplex {simplex} references vertex {vertex}, but the mesh has {num_vertices} vertices")]
    VertexOutOfRange {
        simplex: usize,
        vertex: usize,
        num_vertices: usize,
    },
    #[error("simplex {simplex} is degenerate (|det| = {det:e}, threshold {threshold:e})")]
    Degenerate {
        simplex: usize,
        det: f64,
        threshold: f64,
    },
    #[error("non-conforming mesh: face {face:?} is shared by {count} simplices")]
    NonConforming { face: Vec<usize>, count: usize },
    #[error("mesh is not connected: {reached} of {total} simplices reachable from simplex 0")]
    Disconnected { reached: usize, total: usize },
    #[error("mesh has no simplices")]
    Empty,
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("simplex {simplex} degenerated during the ball mapping at N = {resolution}; try a different resolution")]
    DegenerateAfterMapping { simplex: usize, resolution: usize },
    #[error("simplex index {0} out of range")]
    SimplexOutOfRange(usize),
}

/// Sorted vertex tuple of an (n−1)-face; unused slots hold `usize::MAX`.
pub type FaceKey = [usize; 3];

/// The one or two simplices incident to a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceIncidence {
    pub first: usize,
    pub second: Option<usize>,
}

impl FaceIncidence {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }
}

/// Per-simplex affine data. `inv` maps `x − v0` to `(k_1, …, k_n)`; its rows
/// are the gradients of the barycentric coordinates `λ_1 … λ_n`.
#[derive(Clone, Debug)]
pub struct SimplexGeometry {
    pub det: f64,
    pub inv: Mat3,
    pub volume: f64,
    pub diameter: f64,
}

#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    simplices: Vec<[usize; 4]>,
    /// `neighbors[s][j]` is the simplex across the face opposite local vertex `j`.
    neighbors: Vec<[Option<usize>; 4]>,
    face_adjacency: HashMap<FaceKey, FaceIncidence>,
    boundary_vertices: Vec<bool>,
    vertex_to_simplices: Vec<Vec<usize>>,
    geometry: Vec<SimplexGeometry>,
}

impl SimplicialMesh {
    /// Builds and validates a mesh. Simplices with negative orientation are
    /// fixed by swapping their last two vertices.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        mut simplices: Vec<[usize; 4]>,
    ) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::UnsupportedDimension(dim));
        }
        if simplices.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = dim + 1;
        let mut geometry = Vec::with_capacity(simplices.len());
        for (s, cell) in simplices.iter_mut().enumerate() {
            for &v in &cell[..nv] {
                if v >= vertices.len() {
                    return Err(MeshError::VertexOutOfRange {
                        simplex: s,
                        vertex: v,
                        num_vertices: vertices.len(),
                    });
                }
            }
            for slot in cell.iter_mut().skip(nv) {
                *slot = usize::MAX;
            }
            let mut a = jacobian(dim, &vertices, cell);
            let mut det = linalg::det(dim, &a);
            if det < 0.0 {
                cell.swap(dim - 1, dim);
                a = jacobian(dim, &vertices, cell);
                det = linalg::det(dim, &a);
            }
            let mut edge_sum = 0.0;
            let mut edges = 0;
            let mut diameter: f64 = 0.0;
            for i in 0..nv {
                for j in i + 1..nv {
                    let l = linalg::dist(&vertices[cell[i]], &vertices[cell[j]]);
                    edge_sum += l;
                    edges += 1;
                    diameter = diameter.max(l);
                }
            }
            let mean_edge = edge_sum / edges as f64;
            let threshold = EPS_VOL * mean_edge.powi(dim as i32);
            if !(det.abs() > threshold) {
                return Err(MeshError::Degenerate {
                    simplex: s,
                    det,
                    threshold,
                });
            }
            let inv = linalg::inverse(dim, &a, det);
            let volume = det.abs() / linalg::factorial(dim);
            geometry.push(SimplexGeometry {
                det,
                inv,
                volume,
                diameter,
            });
        }

        let mut face_adjacency: HashMap<FaceKey, FaceIncidence> =
            HashMap::with_capacity(simplices.len() * nv);
        for (s, cell) in simplices.iter().enumerate() {
            for j in 0..nv {
                let key = face_key(dim, cell, j);
                match face_adjacency.get_mut(&key) {
                    None => {
                        face_adjacency.insert(
                            key,
                            FaceIncidence {
                                first: s,
                                second: None,
                            },
                        );
                    }
                    Some(inc) if inc.second.is_none() => inc.second = Some(s),
                    Some(_) => {
                        let count = simplices
                            .iter()
                            .filter(|c| (0..nv).any(|l| face_key(dim, c, l) == key))
                            .count();
                        return Err(MeshError::NonConforming {
                            face: key.iter().copied().filter(|&v| v != usize::MAX).collect(),
                            count,
                        });
                    }
                }
            }
        }

        let mut neighbors = vec![[None; 4]; simplices.len()];
        let mut boundary_vertices = vec![false; vertices.len()];
        for (s, cell) in simplices.iter().enumerate() {
            for j in 0..nv {
                let key = face_key(dim, cell, j);
                let inc = face_adjacency[&key];
                neighbors[s][j] = if inc.first == s { inc.second } else { Some(inc.first) };
                if inc.is_boundary() {
                    for (l, &v) in cell[..nv].iter().enumerate() {
                        if l != j {
                            boundary_vertices[v] = true;
                        }
                    }
                }
            }
        }

        let mut vertex_to_simplices = vec![Vec::new(); vertices.len()];
        for (s, cell) in simplices.iter().enumerate() {
            for &v in &cell[..nv] {
                vertex_to_simplices[v].push(s);
            }
        }

        // Connectivity through shared faces.
        let mut seen = vec![false; simplices.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(s) = queue.pop_front() {
            for t in neighbors[s].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    reached += 1;
                    queue.push_back(*t);
                }
            }
        }
        if reached != simplices.len() {
            return Err(MeshError::Disconnected {
                reached,
                total: simplices.len(),
            });
        }

        Ok(Self {
            dim,
            vertices,
            simplices,
            neighbors,
            face_adjacency,
            boundary_vertices,
            vertex_to_simplices,
            geometry,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    /// Vertex indices of simplex `s` (length `dim + 1`).
    pub fn simplex(&self, s: usize) -> &[usize] {
        &self.simplices[s][..self.dim + 1]
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.simplices.iter().map(move |c| &c[..self.dim + 1])
    }

    pub fn neighbor(&self, s: usize, opposite_local: usize) -> Option<usize> {
        self.neighbors[s][opposite_local]
    }

    pub fn geometry(&self, s: usize) -> &SimplexGeometry {
        &self.geometry[s]
    }

    pub fn volume(&self, s: usize) -> f64 {
        self.geometry[s].volume
    }

    pub fn total_volume(&self) -> f64 {
        self.geometry.iter().map(|g| g.volume).sum()
    }

    pub fn min_volume(&self) -> f64 {
        self.geometry.iter().map(|g| g.volume).fold(f64::INFINITY, f64::min)
    }

    /// Maximum element diameter `h`.
    pub fn max_diameter(&self) -> f64 {
        self.geometry.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }

    pub fn face_adjacency(&self) -> &HashMap<FaceKey, FaceIncidence> {
        &self.face_adjacency
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.face_adjacency.values().filter(|f| f.is_boundary()).count()
    }

    pub fn num_interior_faces(&self) -> usize {
        self.face_adjacency.len() - self.num_boundary_faces()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertices[v]
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(move |&v| self.boundary_vertices[v])
    }

    pub fn vertex_simplices(&self, v: usize) -> &[usize] {
        &self.vertex_to_simplices[v]
    }

    /// Simplices containing every vertex in `entity`.
    pub fn simplices_containing(&self, entity: &[usize]) -> Vec<usize> {
        let Some((&first, rest)) = entity.split_first() else {
            return Vec::new();
        };
        self.vertex_to_simplices[first]
            .iter()
            .copied()
            .filter(|&s| rest.iter().all(|v| self.simplex(s).contains(v)))
            .collect()
    }

    /// True when some boundary face contains every vertex of `entity`.
    pub fn entity_on_boundary(&self, entity: &[usize]) -> bool {
        for s in self.simplices_containing(entity) {
            let cell = self.simplex(s);
            for (j, &opposite) in cell.iter().enumerate() {
                if self.neighbors[s][j].is_none() && !entity.contains(&opposite) {
                    return true;
                }
            }
        }
        false
    }

    /// Barycentric (volume) coordinates `(k_0, …, k_n)` of `point` in simplex
    /// `s`, with `k_0 = 1 − Σ k_i`. Unused trailing slots are zero.
    pub fn barycentric(&self, s: usize, point: &Point) -> Result<[f64; 4], MeshError> {
        if s >= self.simplices.len() {
            return Err(MeshError::SimplexOutOfRange(s));
        }
        Ok(self.barycentric_unchecked(s, point))
    }

    pub(crate) fn barycentric_unchecked(&self, s: usize, point: &Point) -> [f64; 4] {
        let v0 = &self.vertices[self.simplices[s][0]];
        let k = linalg::mat_vec(self.dim, &self.geometry[s].inv, &linalg::sub(point, v0));
        let mut out = [0.0; 4];
        out[1..=self.dim].copy_from_slice(&k[..self.dim]);
        out[0] = 1.0 - k[..self.dim].iter().sum::<f64>();
        out
    }

    /// Physical point with barycentric coordinates `k` in simplex `s`.
    pub fn point_from_barycentric(&self, s: usize, k: &[f64]) -> Point {
        let mut x = [0.0; 3];
        for (l, &v) in self.simplex(s).iter().enumerate() {
            for (d, xd) in x.iter_mut().enumerate().take(self.dim) {
                *xd += k[l] * self.vertices[v][d];
            }
        }
        x
    }

    /// Gradient of the P1 basis function of local vertex `local` on simplex `s`.
    pub fn basis_gradient(&self, s: usize, local: usize) -> [f64; 3] {
        let inv = &self.geometry[s].inv;
        let mut g = [0.0; 3];
        if local == 0 {
            for (d, gd) in g.iter_mut().enumerate().take(self.dim) {
                *gd = -(0..self.dim).map(|r| inv[r][d]).sum::<f64>();
            }
        } else {
            g[..self.dim].copy_from_slice(&inv[local - 1][..self.dim]);
        }
        g
    }

    /// Exhaustive point location; returns the simplex whose smallest
    /// barycentric component is largest, provided it is ≥ −`EPS_FACE`.
    pub fn locate_point(&self, point: &Point) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for s in 0..self.simplices.len() {
            let k = self.barycentric_unchecked(s, point);
            let m = k[..=self.dim].iter().copied().fold(f64::INFINITY, f64::min);
            if m >= -EPS_FACE && best.is_none_or(|(_, b)| m > b) {
                best = Some((s, m));
            }
        }
        best.map(|(s, _)| s)
    }
}

fn jacobian(dim: usize, vertices: &[Point], cell: &[usize; 4]) -> Mat3 {
    let v0 = vertices[cell[0]];
    let mut a = [[0.0; 3]; 3];
    for c in 0..dim {
        let vc = vertices[cell[c + 1]];
        for r in 0..dim {
            a[r][c] = vc[r] - v0[r];
        }
    }
    a
}

fn face_key(dim: usize, cell: &[usize; 4], opposite: usize) -> FaceKey {
    let mut key = [usize::MAX; 3];
    let mut n = 0;
    for (l, &v) in cell[..=dim].iter().enumerate() {
        if l != opposite {
            key[n] = v;
            n += 1;
        }
    }
    key[..n].sort_unstable();
    key
}

/// Extremal coordinates of every vertex patch `ω_j` (union of the simplices
/// that contain vertex `j`).
#[derive(Clone, Debug)]
pub struct PatchBounds {
    pub dim: usize,
    pub z_min: Vec<Point>,
    pub z_max: Vec<Point>,
}

impl PatchBounds {
    pub fn interval(&self, vertex: usize, axis: usize) -> (f64, f64) {
        (self.z_min[vertex][axis], self.z_max[vertex][axis])
    }
}

pub fn patch_bounds(mesh: &SimplicialMesh) -> PatchBounds {
    let n = mesh.num_vertices();
    let mut z_min = vec![[f64::INFINITY; 3]; n];
    let mut z_max = vec![[f64::NEG_INFINITY; 3]; n];
    for cell in mesh.simplices() {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &v in cell {
            for d in 0..mesh.dim() {
                lo[d] = lo[d].min(mesh.vertex(v)[d]);
                hi[d] = hi[d].max(mesh.vertex(v)[d]);
            }
        }
        for &v in cell {
            for d in 0..mesh.dim() {
                z_min[v][d] = z_min[v][d].min(lo[d]);
                z_max[v][d] = z_max[v][d].max(hi[d]);
            }
        }
    }
    for v in 0..n {
        for d in mesh.dim()..3 {
            z_min[v][d] = 0.0;
            z_max[v][d] = 0.0;
        }
    }
    PatchBounds {
        dim: mesh.dim(),
        z_min,
        z_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_tet() -> SimplicialMesh {
        SimplicialMesh::new(
            3,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn single_tet_has_four_boundary_faces() {
        let m = reference_tet();
        assert_eq!(m.num_boundary_faces(), 4);
        assert_eq!(m.num_interior_faces(), 0);
        assert!((0..4).all(|v| m.is_boundary_vertex(v)));
    }

    #[test]
    fn two_tets_share_one_face() {
        let m = SimplicialMesh::new(
            3,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [1.0, 1.0, 1.0],
            ],
            vec![[0, 1, 2, 3], [1, 2, 3, 4]],
        )
        .unwrap();
        assert_eq!(m.num_interior_faces(), 1);
        let interior: Vec<_> = m.face_adjacency().iter().filter(|(_, f)| !f.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(*interior[0].0, [1, 2, 3]);
        assert_eq!(m.neighbor(0, 0), Some(1));
    }

    #[test]
    fn negative_orientation_is_fixed() {
        let m = SimplicialMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
            vec![[0, 1, 2, 0]],
        )
        .unwrap();
        assert!(m.geometry(0).det > 0.0);
        assert!((m.volume(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_simplex_is_rejected() {
        let err = SimplicialMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 2, 0]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::Degenerate { simplex: 0, .. }));
    }

    #[test]
    fn face_shared_by_three_is_non_conforming() {
        let err = SimplicialMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [1.0, 1.0, 0.0]],
            vec![[0, 1, 2, 0], [0, 1, 3, 0], [0, 1, 4, 0]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::NonConforming { count: 3, .. }), "{err}");
    }

    #[test]
    fn disconnected_mesh_is_rejected() {
        let err = SimplicialMesh::new(
            2,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [5.0, 0.0, 0.0],
                [6.0, 0.0, 0.0],
                [5.0, 1.0, 0.0],
            ],
            vec![[0, 1, 2, 0], [3, 4, 5, 0]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::Disconnected { reached: 1, total: 2 }));
    }

    #[test]
    fn barycentric_of_vertex_and_centroid() {
        let m = reference_tet();
        assert_eq!(m.barycentric(0, &[0.0, 0.0, 0.0]).unwrap(), [1.0, 0.0, 0.0, 0.0]);
        let k = m.barycentric(0, &[0.25, 0.25, 0.25]).unwrap();
        for c in k {
            assert!((c - 0.25).abs() < 1e-15);
        }
        assert!(m.barycentric(3, &[0.0; 3]).is_err());
    }

    #[test]
    fn patch_bounds_of_single_tet() {
        let m = reference_tet();
        let pb = patch_bounds(&m);
        assert_eq!(pb.z_min[0], [0.0, 0.0, 0.0]);
        assert_eq!(pb.z_max[0], [1.0, 1.0, 1.0]);
    }

    #[test]
    fn basis_gradients_sum_to_zero() {
        let m = SimplicialMesh::new(
            3,
            vec![[0.1, 0.0, 0.2], [1.3, 0.1, 0.0], [0.2, 0.9, 0.1], [0.3, 0.2, 1.1]],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let mut sum = [0.0; 3];
        for l in 0..4 {
            let g = m.basis_gradient(0, l);
            for d in 0..3 {
                sum[d] += g[d];
            }
        }
        assert!(sum.iter().all(|s| s.abs() < 1e-14));
        assert_eq!(reference_tet().basis_gradient(0, 1), [1.0, 0.0, 0.0]);
    }
}
