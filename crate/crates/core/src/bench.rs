//! Timing comparisons: pattern-locked vs hash-map accumulation, and
//! fractional vs classical assembly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{
    assemble, build_sparsity_pattern, element_blocks, quadrature_rule, scatter_block, AssemblyError, ConstantField,
    CsrMatrix, Dirichlet, DofMap, ElementBlock, OperatorTerm, SparsityPattern,
};
use crate::fracops::{FractionalOrder, Side};
use crate::mesh::{generate_cube_mesh, patch_bounds, SimplicialMesh};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub elements: usize,
    pub variant: &'static str,
    pub seconds: f64,
}

pub const PATTERN_ACCUMULATION: &str = "pattern_accumulation";
pub const HASHMAP_ACCUMULATION: &str = "hashmap_accumulation";
pub const FRACTIONAL_ASSEMBLY: &str = "fractional_assembly";
pub const CLASSICAL_ASSEMBLY: &str = "classical_assembly";

/// Left and right fractional terms of order `beta` against classical test
/// functions, on every axis.
pub fn fractional_terms(dim: usize, beta: f64) -> Vec<OperatorTerm> {
    let mut t = Vec::new();
    for axis in 0..dim {
        for (side, sign) in [(Side::Left, -1.0), (Side::Right, 1.0)] {
            t.push(
                OperatorTerm::new(
                    axis,
                    FractionalOrder::new(beta, side, axis).expect("order in (0, 1]"),
                    FractionalOrder::classical(axis),
                    Arc::new(ConstantField(0.5)),
                    sign,
                )
                .expect("valid term"),
            );
        }
    }
    t
}

/// `(∇u, ∇v)`.
pub fn classical_terms(dim: usize) -> Vec<OperatorTerm> {
    (0..dim)
        .map(|axis| {
            OperatorTerm::new(
                axis,
                FractionalOrder::classical(axis),
                FractionalOrder::classical(axis),
                Arc::new(ConstantField(1.0)),
                1.0,
            )
            .expect("valid term")
        })
        .collect()
}

/// Accumulates precomputed blocks into a pattern-locked matrix; the pattern
/// build is part of the timed work.
pub fn accumulate_with_pattern(
    mesh: &SimplicialMesh,
    terms: &[OperatorTerm],
    blocks: &[ElementBlock],
) -> Result<CsrMatrix, AssemblyError> {
    let pattern = build_sparsity_pattern(mesh, &patch_bounds(mesh), terms);
    let mut m = CsrMatrix::zeros(&pattern);
    for b in blocks {
        scatter_block(&mut m, b)?;
    }
    Ok(m)
}

/// Accumulates the same blocks into a hash map keyed by `(row, col)`, then
/// converts to compressed rows.
pub fn accumulate_with_hashmap(n: usize, blocks: &[ElementBlock]) -> CsrMatrix {
    let mut map: HashMap<(usize, usize), f64> = HashMap::new();
    for b in blocks {
        for (r, c, v) in b.triples() {
            *map.entry((r, c)).or_insert(0.0) += v;
        }
    }
    let mut entries: Vec<((usize, usize), f64)> = map.into_iter().collect();
    entries.sort_unstable_by_key(|e| e.0);
    let mut rows = vec![Vec::new(); n];
    for &((r, c), _) in &entries {
        rows[r].push(c);
    }
    let mut m = CsrMatrix::zeros(&SparsityPattern::from_rows(rows));
    for ((r, c), v) in entries {
        m.add(r, c, v).expect("entry is in its own pattern");
    }
    m
}

/// One row per (mesh size, variant) on unit-cube meshes.
pub fn run_bench(sizes: &[usize], dim: usize, beta: f64, quadrature_degree: usize) -> Result<Vec<BenchRow>, AssemblyError> {
    let rule = quadrature_rule(dim, quadrature_degree)?;
    let mut rows = Vec::new();
    for &n in sizes {
        let mesh = generate_cube_mesh(n, dim).map_err(|e| AssemblyError::InvalidTerm(e.to_string()))?;
        let elements = mesh.num_simplices();
        let frac = fractional_terms(dim, beta);
        let classical = classical_terms(dim);
        let zero = ConstantField(0.0);

        let t = Instant::now();
        assemble(&mesh, &frac, &rule, &zero, Dirichlet::None)?;
        rows.push(BenchRow {
            elements,
            variant: FRACTIONAL_ASSEMBLY,
            seconds: t.elapsed().as_secs_f64(),
        });
        let t = Instant::now();
        assemble(&mesh, &classical, &rule, &zero, Dirichlet::None)?;
        rows.push(BenchRow {
            elements,
            variant: CLASSICAL_ASSEMBLY,
            seconds: t.elapsed().as_secs_f64(),
        });

        let dofs = DofMap::new(&mesh, Dirichlet::None);
        let blocks = element_blocks(&mesh, &frac, &rule, &zero, &dofs)?;
        let t = Instant::now();
        let a = accumulate_with_pattern(&mesh, &frac, &blocks)?;
        rows.push(BenchRow {
            elements,
            variant: PATTERN_ACCUMULATION,
            seconds: t.elapsed().as_secs_f64(),
        });
        let t = Instant::now();
        let b = accumulate_with_hashmap(mesh.num_vertices(), &blocks);
        rows.push(BenchRow {
            elements,
            variant: HASHMAP_ACCUMULATION,
            seconds: t.elapsed().as_secs_f64(),
        });
        debug_assert!(b.nnz() <= a.nnz());
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("elements,variant,seconds\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.6}", r.elements, r.variant, r.seconds);
    }
    out
}
