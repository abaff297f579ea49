//! Predicted nonzero structure of the stiffness matrix.
//!
//! A path along `±e_i` keeps the transverse coordinates of its starting point.
//! A basis pair `(j, k)` can therefore only interact through a direction-`i`
//! term if the patches `ω_j` and `ω_k` overlap in every coordinate other than
//! `i`. The along-axis coordinate is unconstrained, because the path reaches the
//! boundary. When one side of the term is classical, the quadrature point lies
//! strictly inside an element of that side's patch, so the overlap has to be
//! strict. Vertex adjacency is always part of the pattern.

use std::collections::BTreeSet;

use super::{DofMap, OperatorTerm};
use crate::mesh::{PatchBounds, SimplicialMesh};

/// Square boolean pattern in compressed-row form with sorted rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let total = rows.iter().map(Vec::len).sum();
        let mut col_idx = Vec::with_capacity(total);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(&r);
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn density(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.n as f64 * self.n as f64)
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).iter().all(|&j| self.contains(j, i)))
    }

    /// Pattern on free degrees of freedom only.
    pub fn restrict(&self, dofs: &DofMap) -> Self {
        let rows = (0..dofs.num_free())
            .map(|f| {
                self.row(dofs.vertex_of(f))
                    .iter()
                    .filter_map(|&v| dofs.free_index(v))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Overlap {
    Strict,
    Closed,
}

pub fn build_sparsity_pattern(mesh: &SimplicialMesh, bounds: &PatchBounds, terms: &[OperatorTerm]) -> SparsityPattern {
    let n = mesh.num_vertices();
    let dim = mesh.dim();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for cell in mesh.simplices() {
        for &a in cell {
            rows[a].extend_from_slice(cell);
        }
    }

    let mut mode: [Option<Overlap>; 3] = [None; 3];
    for t in terms {
        let m = match (t.trial.is_classical(), t.test.is_classical()) {
            (true, true) => continue,
            (false, false) => Overlap::Closed,
            _ => Overlap::Strict,
        };
        let slot = &mut mode[t.axis];
        *slot = Some(slot.map_or(m, |old| old.max(m)));
    }

    for (axis, m) in mode.iter().enumerate().take(dim) {
        if let Some(m) = m {
            let transverse: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
            transverse_overlaps(bounds, &transverse, *m, &mut rows);
        }
    }
    SparsityPattern::from_rows(rows)
}

/// Adds every pair whose patch boxes overlap in all `dims`, using a uniform
/// bucket grid keyed by the lower corner of each box.
fn transverse_overlaps(bounds: &PatchBounds, dims: &[usize], mode: Overlap, rows: &mut [Vec<usize>]) {
    let n = rows.len();
    let lo = |v: usize, d: usize| bounds.z_min[v][d];
    let hi = |v: usize, d: usize| bounds.z_max[v][d];
    let mut origin = [f64::INFINITY; 2];
    let mut width: f64 = 0.0;
    let mut extent = [f64::NEG_INFINITY; 2];
    for v in 0..n {
        for (c, &d) in dims.iter().enumerate() {
            origin[c] = origin[c].min(lo(v, d));
            extent[c] = extent[c].max(hi(v, d));
            width = width.max(hi(v, d) - lo(v, d));
        }
    }
    let cell = if width > 0.0 { width } else { 1.0 };
    let mut shape = [1usize; 2];
    for c in 0..dims.len() {
        shape[c] = (((extent[c] - origin[c]) / cell).floor() as usize + 1).max(1);
    }
    let bucket_of = |x: f64, c: usize| (((x - origin[c]) / cell).floor().max(0.0) as usize).min(shape[c] - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); shape[0] * shape[1]];
    for v in 0..n {
        let mut b = [0usize; 2];
        for (c, &d) in dims.iter().enumerate() {
            b[c] = bucket_of(lo(v, d), c);
        }
        buckets[b[0] + shape[0] * b[1]].push(v);
    }

    let overlaps = |a: usize, b: usize| {
        dims.iter().all(|&d| match mode {
            Overlap::Closed => lo(a, d) <= hi(b, d) && lo(b, d) <= hi(a, d),
            Overlap::Strict => lo(a, d) < hi(b, d) && lo(b, d) < hi(a, d),
        })
    };
    let mut found = BTreeSet::new();
    for j in 0..n {
        // A partner k has lo_k ∈ [lo_j − width, hi_j] in every transverse dim.
        let mut range = [(0usize, 0usize); 2];
        for c in 0..2 {
            range[c] = if c < dims.len() {
                let d = dims[c];
                (bucket_of(lo(j, d) - cell, c), bucket_of(hi(j, d), c))
            } else {
                (0, 0)
            };
        }
        found.clear();
        for b1 in range[1].0..=range[1].1 {
            for b0 in range[0].0..=range[0].1 {
                for &k in &buckets[b0 + shape[0] * b1] {
                    if overlaps(j, k) {
                        found.insert(k);
                    }
                }
            }
        }
        rows[j].extend(found.iter().copied());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{ConstantField, OperatorTerm};
    use crate::fracops::{FractionalOrder, Side};
    use crate::mesh::{generate_cube_mesh, patch_bounds};
    use std::sync::Arc;

    fn frac_terms(dim: usize) -> Vec<OperatorTerm> {
        (0..dim)
            .map(|i| {
                OperatorTerm::new(
                    i,
                    FractionalOrder::new(0.8, Side::Left, i).unwrap(),
                    FractionalOrder::classical(i),
                    Arc::new(ConstantField(1.0)),
                    -1.0,
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn classical_terms_give_adjacency() {
        let m = generate_cube_mesh(3, 2).unwrap();
        let b = patch_bounds(&m);
        let terms = vec![OperatorTerm::new(
            0,
            FractionalOrder::classical(0),
            FractionalOrder::classical(0),
            Arc::new(ConstantField(1.0)),
            1.0,
        )
        .unwrap()];
        let p = build_sparsity_pattern(&m, &b, &terms);
        // Interior vertex of a 2-D Kuhn grid has 6 neighbours plus itself.
        let v = 1 + 4;
        assert_eq!(p.row(v).len(), 7);
        assert!(p.is_symmetric());
    }

    #[test]
    fn transverse_separation_excludes_pairs() {
        let m = generate_cube_mesh(4, 2).unwrap();
        let b = patch_bounds(&m);
        let p = build_sparsity_pattern(&m, &b, &frac_terms(1)[..1]);
        // Direction 0 only: vertices at y = 0 and y = 0.75 never interact.
        let a = 0;
        let far = 3 * 5;
        assert!(!p.contains(a, far));
        // Same row along x, far apart: coupled through the path.
        assert!(p.contains(0, 4));
        assert!(p.is_symmetric());
    }

    #[test]
    fn pattern_contains_adjacency() {
        let m = generate_cube_mesh(3, 3).unwrap();
        let b = patch_bounds(&m);
        let p = build_sparsity_pattern(&m, &b, &frac_terms(3));
        for cell in m.simplices() {
            for &a in cell {
                for &c in cell {
                    assert!(p.contains(a, c));
                }
            }
        }
    }
}
