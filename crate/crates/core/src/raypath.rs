//! Integration paths along coordinate axes.
//!
//! A ray `x = u0 + r d` is intersected with a simplex in its own barycentric
//! frame: with `A = (v1−v0, …, vn−v0)`, the volume coordinates along the ray
//! are `k̃(r) = b̃ + r d̃`, where `b̃ = (A⁻¹(u0−v0), 1 − Σ A⁻¹(u0−v0))` and
//! `d̃ = (A⁻¹d, −Σ A⁻¹d)`. Every component gives a half-line constraint on `r`;
//! their intersection with `r ≥ 0` is the chord. The exit point's zero
//! components name the face, edge or vertex through which the ray leaves, and
//! the next simplex is found among the simplices sharing that entity.

use std::fmt;

use thiserror::Error;

use crate::linalg;
use crate::mesh::{Point, SimplicialMesh, EPS_FACE};

/// Which one-sided operator a path serves. `Left` integrates from the lower
/// chord bound `a_i(x)` up to `x_i` (ray along `−e_i`); `Right` from `x_i` to
/// `b_i(x)` (ray along `+e_i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Sign of the ray direction along the axis.
    pub fn direction_sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Error)]
pub enum RayPathError {
    #[error("ray direction must have unit length (|d| = {0})")]
    NotUnit(f64),
    #[error("axis {axis} out of range for a {dim}-D mesh")]
    BadAxis { axis: usize, dim: usize },
    #[error("point {0:?} is not inside the mesh")]
    PointOutside(Point),
    #[error("point {point:?} is not inside simplex {simplex}")]
    NotInStart { point: Point, simplex: usize },
    #[error("traversal stalled: ray from {origin:?} along {direction:?} found no continuation after simplex {simplex} at r = {r:e}")]
    Stall {
        origin: Point,
        direction: Point,
        simplex: usize,
        r: f64,
    },
    #[error("traversal cycle: simplex {simplex} re-entered at r = {r:e}")]
    Cycle { simplex: usize, r: f64 },
    #[error("exit point has no nonzero barycentric component")]
    CorruptExit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayQuery {
    origin: Point,
    direction: Point,
}

impl RayQuery {
    pub fn new(origin: Point, direction: Point) -> Result<Self, RayPathError> {
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-14 {
            return Err(RayPathError::NotUnit(norm));
        }
        Ok(Self { origin, direction })
    }

    /// Ray along `±e_axis` for the given side.
    pub fn axis(origin: Point, axis: usize, side: Side) -> Self {
        let mut direction = [0.0; 3];
        direction[axis] = side.direction_sign();
        Self { origin, direction }
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn direction(&self) -> &Point {
        &self.direction
    }

    pub fn at(&self, r: f64) -> Point {
        [
            self.origin[0] + r * self.direction[0],
            self.origin[1] + r * self.direction[1],
            self.origin[2] + r * self.direction[2],
        ]
    }
}

/// One chord of a ray through a simplex. `k_min`/`k_max` are the volume
/// coordinates of the entry and exit points (`b̃ + r d̃`).
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentHit {
    pub simplex: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub k_min: [f64; 4],
    pub k_max: [f64; 4],
}

impl SegmentHit {
    pub fn length(&self) -> f64 {
        self.r_max - self.r_min
    }
}

/// The face, edge or vertex through which a ray leaves a simplex, given by the
/// local indices whose exit coordinate vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExitEntity {
    zero_mask: u8,
    nv: usize,
}

impl ExitEntity {
    pub fn zero_indices(&self) -> Vec<usize> {
        (0..self.nv).filter(|j| self.zero_mask & (1 << j) != 0).collect()
    }

    /// Local vertices spanning the exit entity.
    pub fn vertex_indices(&self) -> Vec<usize> {
        (0..self.nv).filter(|j| self.zero_mask & (1 << j) == 0).collect()
    }

    /// Dimension of the exit entity: `n − (number of zeros)`.
    pub fn entity_dim(&self) -> usize {
        self.nv - 1 - self.zero_mask.count_ones() as usize
    }

    fn single_zero(&self) -> Option<usize> {
        (self.zero_mask.count_ones() == 1).then(|| self.zero_mask.trailing_zeros() as usize)
    }
}

/// Chord of `query` through `simplex`, or `None` when the admissible set of
/// `r ≥ 0` is empty or a single point.
pub fn ray_simplex_intersect(mesh: &SimplicialMesh, simplex: usize, query: &RayQuery) -> Option<SegmentHit> {
    let (b, d) = ray_frame(mesh, simplex, query);
    let (lo, hi) = admissible_interval(mesh.dim() + 1, &b, &d)?;
    Some(hit_at(simplex, mesh.dim() + 1, &b, &d, lo, hi))
}

fn ray_frame(mesh: &SimplicialMesh, simplex: usize, query: &RayQuery) -> ([f64; 4], [f64; 4]) {
    let dim = mesh.dim();
    let b = mesh.barycentric_unchecked(simplex, &query.origin);
    let g = mesh.geometry(simplex);
    let dk = linalg::mat_vec(dim, &g.inv, &query.direction);
    let mut d = [0.0; 4];
    d[1..=dim].copy_from_slice(&dk[..dim]);
    d[0] = -dk[..dim].iter().sum::<f64>();
    (b, d)
}

fn admissible_interval(nv: usize, b: &[f64; 4], d: &[f64; 4]) -> Option<(f64, f64)> {
    let mut lo: f64 = 0.0;
    let mut hi = f64::INFINITY;
    for j in 0..nv {
        if d[j] > 0.0 {
            lo = lo.max(-b[j] / d[j]);
        } else if d[j] < 0.0 {
            hi = hi.min(-b[j] / d[j]);
        } else if b[j] < 0.0 {
            return None;
        }
    }
    (lo < hi && hi.is_finite()).then_some((lo, hi))
}

fn hit_at(simplex: usize, nv: usize, b: &[f64; 4], d: &[f64; 4], lo: f64, hi: f64) -> SegmentHit {
    let mut k_min = [0.0; 4];
    let mut k_max = [0.0; 4];
    for j in 0..nv {
        k_min[j] = b[j] + lo * d[j];
        k_max[j] = b[j] + hi * d[j];
    }
    SegmentHit {
        simplex,
        r_min: lo,
        r_max: hi,
        k_min,
        k_max,
    }
}

/// Classify the exit point of `hit` by its zero components (`|k| ≤ EPS_FACE`).
pub fn exit_face(hit: &SegmentHit, dim: usize) -> Result<ExitEntity, RayPathError> {
    let nv = dim + 1;
    let mut mask = 0u8;
    for j in 0..nv {
        if hit.k_max[j].abs() <= EPS_FACE {
            mask |= 1 << j;
        }
    }
    if mask.count_ones() as usize == nv {
        return Err(RayPathError::CorruptExit);
    }
    Ok(ExitEntity { zero_mask: mask, nv })
}

/// Ordered chain of chords from a point to the boundary along `±e_axis`.
#[derive(Clone, Debug)]
pub struct IntegrationPath {
    pub gauss_point: Point,
    pub axis: usize,
    pub side: Side,
    pub segments: Vec<SegmentHit>,
    /// Axis coordinate where the path leaves the mesh: `a_i(x)` or `b_i(x)`.
    pub chord_bound: f64,
    /// Number of ray–simplex tests performed while tracing.
    pub examined: usize,
}

impl IntegrationPath {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(SegmentHit::length).sum()
    }
}

/// Trace from an arbitrary point, locating its simplex by exhaustive scan.
/// A point on a shared face or edge starts in whichever containing simplex
/// the ray enters, so no zero-length first segment is produced.
pub fn trace_path(mesh: &SimplicialMesh, point: &Point, axis: usize, side: Side) -> Result<IntegrationPath, RayPathError> {
    let dim = mesh.dim();
    if axis >= dim {
        return Err(RayPathError::BadAxis { axis, dim });
    }
    let query = RayQuery::axis(*point, axis, side);
    let mut best: Option<(usize, f64)> = None;
    let mut inside = false;
    for s in 0..mesh.num_simplices() {
        let (b, d) = ray_frame(mesh, s, &query);
        if b[..=dim].iter().any(|&k| k < -EPS_FACE) {
            continue;
        }
        inside = true;
        if let Some((_, hi)) = admissible_interval(dim + 1, &b, &d) {
            if best.is_none_or(|(_, h)| hi > h) {
                best = Some((s, hi));
            }
        }
    }
    match best {
        Some((start, _)) => trace_path_from(mesh, start, point, axis, side),
        // On the boundary, facing outward: the chord is empty.
        None if inside => Err(RayPathError::Stall {
            origin: *point,
            direction: *query.direction(),
            simplex: mesh.locate_point(point).unwrap_or(0),
            r: 0.0,
        }),
        None => Err(RayPathError::PointOutside(*point)),
    }
}

/// Trace from a point known to lie in simplex `start`.
pub fn trace_path_from(
    mesh: &SimplicialMesh,
    start: usize,
    point: &Point,
    axis: usize,
    side: Side,
) -> Result<IntegrationPath, RayPathError> {
    let dim = mesh.dim();
    if axis >= dim {
        return Err(RayPathError::BadAxis { axis, dim });
    }
    let nv = dim + 1;
    let query = RayQuery::axis(*point, axis, side);
    let (b, d) = ray_frame(mesh, start, &query);
    if b[..nv].iter().any(|&k| k < -EPS_FACE) {
        return Err(RayPathError::NotInStart {
            point: *point,
            simplex: start,
        });
    }
    let (_, hi) = admissible_interval(nv, &b, &d).ok_or(RayPathError::NotInStart {
        point: *point,
        simplex: start,
    })?;
    let mut examined = 1;
    let mut segments = vec![hit_at(start, nv, &b, &d, 0.0, hi)];
    let mut visited = vec![start];

    loop {
        let current = segments.last().expect("path has a segment");
        let r_cur = current.r_max;
        let simplex = current.simplex;
        let entity = exit_face(current, dim)?;

        if let Some(j) = entity.single_zero() {
            match mesh.neighbor(simplex, j) {
                None => break,
                Some(next) => {
                    examined += 1;
                    if let Some(hit) = continuation(mesh, next, &query, r_cur) {
                        if visited.contains(&next) {
                            return Err(RayPathError::Cycle { simplex: next, r: r_cur });
                        }
                        visited.push(next);
                        segments.push(hit);
                        continue;
                    }
                }
            }
        }

        // Low-dimensional exit (or a face neighbour that did not advance):
        // every simplex sharing the exit entity is a candidate.
        let cell = mesh.simplex(simplex);
        let entity_vertices: Vec<usize> = entity.vertex_indices().iter().map(|&l| cell[l]).collect();
        let mut candidates = mesh.simplices_containing(&entity_vertices);
        let mut best = pick_candidate(mesh, &query, r_cur, &candidates, &visited, &mut examined);
        if best.is_none() {
            if mesh.entity_on_boundary(&entity_vertices) {
                break;
            }
            // Fallback for near-degenerate classifications: widen to the
            // union of the vertex stars of the exit entity.
            candidates.clear();
            for &v in &entity_vertices {
                candidates.extend_from_slice(mesh.vertex_simplices(v));
            }
            candidates.sort_unstable();
            candidates.dedup();
            best = pick_candidate(mesh, &query, r_cur, &candidates, &visited, &mut examined);
        }
        match best {
            Some(hit) => {
                visited.push(hit.simplex);
                segments.push(hit);
            }
            None => {
                return Err(RayPathError::Stall {
                    origin: query.origin,
                    direction: query.direction,
                    simplex,
                    r: r_cur,
                })
            }
        }
    }

    let end = segments.last().expect("path has a segment").r_max;
    let chord_bound = point[axis] + side.direction_sign() * end;
    Ok(IntegrationPath {
        gauss_point: *point,
        axis,
        side,
        segments,
        chord_bound,
        examined,
    })
}

/// Forward continuation of the ray inside `simplex` starting at `r_cur`,
/// snapped so that it begins exactly at `r_cur`.
fn continuation(mesh: &SimplicialMesh, simplex: usize, query: &RayQuery, r_cur: f64) -> Option<SegmentHit> {
    let nv = mesh.dim() + 1;
    let (b, d) = ray_frame(mesh, simplex, query);
    let (lo, hi) = admissible_interval(nv, &b, &d)?;
    let scale = mesh.geometry(simplex).diameter;
    let gap_tol = 1e-9 * scale;
    let progress_tol = 1e-14 * scale.max(r_cur);
    if lo > r_cur + gap_tol || hi <= r_cur + progress_tol {
        return None;
    }
    Some(hit_at(simplex, nv, &b, &d, r_cur, hi))
}

fn pick_candidate(
    mesh: &SimplicialMesh,
    query: &RayQuery,
    r_cur: f64,
    candidates: &[usize],
    visited: &[usize],
    examined: &mut usize,
) -> Option<SegmentHit> {
    let mut best: Option<SegmentHit> = None;
    for &s in candidates {
        if visited.contains(&s) {
            continue;
        }
        *examined += 1;
        if let Some(hit) = continuation(mesh, s, query, r_cur) {
            if best.as_ref().is_none_or(|b| hit.r_max > b.r_max) {
                best = Some(hit);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cube_mesh;

    fn triangle() -> SimplicialMesh {
        SimplicialMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2, 0]],
        )
        .unwrap()
    }

    #[test]
    fn triangle_ray_to_the_left() {
        let m = triangle();
        let q = RayQuery::new([0.25, 0.25, 0.0], [-1.0, 0.0, 0.0]).unwrap();
        let hit = ray_simplex_intersect(&m, 0, &q).unwrap();
        assert_eq!(hit.r_min, 0.0);
        assert!((hit.r_max - 0.25).abs() < 1e-15);
        let expected = [0.75, 0.0, 0.25];
        for j in 0..3 {
            assert!((hit.k_max[j] - expected[j]).abs() < 1e-15);
        }
        let e = exit_face(&hit, 2).unwrap();
        assert_eq!(e.zero_indices(), vec![1]);
        assert_eq!(e.vertex_indices(), vec![0, 2]);
    }

    #[test]
    fn ray_pointing_away_misses() {
        let m = triangle();
        let q = RayQuery::new([2.0, 0.25, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert!(ray_simplex_intersect(&m, 0, &q).is_none());
    }

    #[test]
    fn grazing_along_an_edge_contributes_nothing_or_is_degenerate() {
        let m = triangle();
        // Along the edge y = 0 from outside: the interval collapses to the edge itself or is empty.
        let q = RayQuery::new([-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]).unwrap();
        assert!(ray_simplex_intersect(&m, 0, &q).is_none());
        // Touching only the vertex (1,0) from the right.
        let q = RayQuery::new([1.0, 1.0, 0.0], [0.0, -1.0, 0.0]).unwrap();
        assert!(ray_simplex_intersect(&m, 0, &q).is_none());
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(RayQuery::new([0.0; 3], [2.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn exit_through_vertex_and_edge_in_tet() {
        let hit = SegmentHit {
            simplex: 0,
            r_min: 0.0,
            r_max: 1.0,
            k_min: [0.25; 4],
            k_max: [0.0, 0.0, 1.0, 0.0],
        };
        let e = exit_face(&hit, 3).unwrap();
        assert_eq!(e.zero_indices(), vec![0, 1, 3]);
        assert_eq!(e.entity_dim(), 0);
        let hit = SegmentHit {
            k_max: [0.5, 0.5, 0.0, 0.0],
            ..hit
        };
        let e = exit_face(&hit, 3).unwrap();
        assert_eq!(e.zero_indices(), vec![2, 3]);
        assert_eq!(e.vertex_indices(), vec![0, 1]);
        let hit = SegmentHit {
            k_max: [0.0; 4],
            ..hit
        };
        assert!(exit_face(&hit, 3).is_err());
    }

    #[test]
    fn single_tet_centroid_path() {
        let m = SimplicialMesh::new(
            3,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let c = [0.25, 0.25, 0.25];
        for axis in 0..3 {
            let left = trace_path(&m, &c, axis, Side::Left).unwrap();
            assert_eq!(left.segments.len(), 1);
            assert!((left.total_length() - 0.25).abs() < 1e-14);
            assert!(left.chord_bound.abs() < 1e-14);
            let right = trace_path(&m, &c, axis, Side::Right).unwrap();
            assert_eq!(right.segments.len(), 1);
            // x_axis + (sum of the other two) = 1 on the slanted face.
            assert!((right.total_length() - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn cube_path_reaches_the_left_face() {
        let m = generate_cube_mesh(2, 3).unwrap();
        let p = [0.8, 0.3, 0.65];
        let path = trace_path(&m, &p, 0, Side::Left).unwrap();
        assert!(path.segments.len() > 1);
        assert!((path.total_length() - 0.8).abs() < 1e-12);
        assert!(path.chord_bound.abs() < 1e-12);
        assert_eq!(path.segments[0].r_min, 0.0);
        for w in path.segments.windows(2) {
            assert!((w[0].r_max - w[1].r_min).abs() < 1e-10);
        }
    }

    #[test]
    fn point_outside_is_an_error() {
        let m = generate_cube_mesh(2, 2).unwrap();
        assert!(matches!(
            trace_path(&m, &[1.5, 0.5, 0.0], 0, Side::Left),
            Err(RayPathError::PointOutside(_))
        ));
        assert!(matches!(
            trace_path(&m, &[0.5, 0.5, 0.0], 2, Side::Left),
            Err(RayPathError::BadAxis { .. })
        ));
    }
}
