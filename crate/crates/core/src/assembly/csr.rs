//! Compressed-row matrix whose structure is fixed by a [`SparsityPattern`].

use std::fmt::Write as _;

use super::{AssemblyError, SparsityPattern};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: &SparsityPattern) -> Self {
        Self {
            n: pattern.n(),
            row_ptr: pattern.row_ptr().to_vec(),
            col_idx: pattern.col_idx().to_vec(),
            values: vec![0.0; pattern.nnz()],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|p| start + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Adds into an existing pattern entry; writing outside the pattern is an error.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<(), AssemblyError> {
        match self.slot(i, j) {
            Some(p) => {
                self.values[p] += v;
                Ok(())
            }
            None => Err(AssemblyError::PatternViolation { row: i, col: j }),
        }
    }

    /// Adds `vals[c]` at `(i, cols[c])` for sorted `cols`, searching each
    /// column only in the part of the row after the previous hit.
    pub fn add_row_sorted(&mut self, i: usize, cols: &[usize], vals: &[f64]) -> Result<(), AssemblyError> {
        let end = self.row_ptr[i + 1];
        let mut pos = self.row_ptr[i];
        for (&j, &v) in cols.iter().zip(vals) {
            let off = self.col_idx[pos..end].partition_point(|&c| c < j);
            pos += off;
            if pos == end || self.col_idx[pos] != j {
                return Err(AssemblyError::PatternViolation { row: i, col: j });
            }
            self.values[pos] += v;
        }
        Ok(())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&j, &a)| a * x[j])
                .sum();
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                row[j] += a;
            }
        }
        d
    }

    /// MatrixMarket coordinate text, 1-based, every stored entry.
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::with_capacity(self.nnz() * 32);
        out.push_str("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(out, "{} {} {}", self.n, self.n, self.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, a);
            }
        }
        out
    }
}

/// MatrixMarket text for a pattern, all values 1.
pub fn pattern_to_matrix_market(p: &SparsityPattern) -> String {
    let mut out = String::with_capacity(p.nnz() * 16);
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", p.n(), p.n(), p.nnz());
    for i in 0..p.n() {
        for &j in p.row(i) {
            let _ = writeln!(out, "{} {} 1", i + 1, j + 1);
        }
    }
    out
}
