//! Linear solves for the assembled (nonsymmetric) systems.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::assembly::CsrMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("matrix has a zero diagonal entry at row {0}")]
    SingularDiagonal(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("GMRES did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("right-hand side has length {rhs}, matrix has {n} rows")]
    SizeMismatch { rhs: usize, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Target for `‖Kx − b‖₂ / ‖b‖₂`.
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    /// Systems up to this size are solved by dense LU.
    pub dense_threshold: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            restart: 60,
            dense_threshold: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    DenseLu,
    Gmres,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub relative_residual: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

pub fn solve(k: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<Solution, SolveError> {
    let n = k.n();
    if b.len() != n {
        return Err(SolveError::SizeMismatch { rhs: b.len(), n });
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(Solution {
            x: vec![0.0; n],
            relative_residual: 0.0,
            iterations: 0,
            method: SolveMethod::DenseLu,
        });
    }
    let (x, iterations, method) = if n <= opts.dense_threshold {
        (dense_lu(k, b)?, 1, SolveMethod::DenseLu)
    } else {
        let (x, it) = gmres(k, b, opts)?;
        (x, it, SolveMethod::Gmres)
    };
    let relative_residual = residual(k, &x, b) / bnorm;
    if method == SolveMethod::DenseLu && !(relative_residual <= opts.tol.max(1e-8)) {
        return Err(SolveError::Singular);
    }
    Ok(Solution {
        x,
        relative_residual,
        iterations,
        method,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(k: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut r = vec![0.0; b.len()];
    k.matvec(x, &mut r);
    r.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

fn dense_lu(k: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    let n = k.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let (cols, vals) = k.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            a[(i, j)] += v;
        }
    }
    let x = a
        .lu()
        .solve(&DVector::from_column_slice(b))
        .ok_or(SolveError::Singular)?;
    Ok(x.iter().copied().collect())
}

/// Restarted GMRES with right Jacobi preconditioning, stopping on the true
/// relative residual.
fn gmres(k: &CsrMatrix, b: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, usize), SolveError> {
    let n = k.n();
    let diag = k.diagonal();
    if let Some(i) = diag.iter().position(|&d| d == 0.0) {
        return Err(SolveError::SingularDiagonal(i));
    }
    let dinv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let bnorm = norm(b);
    let m = opts.restart.max(1);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut total = 0;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];

    loop {
        let beta = norm(&r);
        if beta / bnorm <= opts.tol {
            return Ok((x, total));
        }
        if total >= opts.max_iter {
            return Err(SolveError::NotConverged {
                iterations: total,
                residual: beta / bnorm,
            });
        }
        v.clear();
        v.push(r.iter().map(|ri| ri / beta).collect());
        g.iter_mut().for_each(|gi| *gi = 0.0);
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            for (zi, (vi, di)) in z.iter_mut().zip(v[j].iter().zip(&dinv)) {
                *zi = vi * di;
            }
            k.matvec(&z, &mut w);
            for i in 0..=j {
                let hij: f64 = w.iter().zip(&v[i]).map(|(a, b)| a * b).sum();
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(&v[i]) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            if g[j + 1].abs() / bnorm <= 0.5 * opts.tol || hn == 0.0 || total >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // Back substitution for the Krylov coefficients.
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|c| h[i][c] * y[c]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        z.iter_mut().for_each(|zi| *zi = 0.0);
        for (i, yi) in y.iter().enumerate() {
            for (zk, vk) in z.iter_mut().zip(&v[i]) {
                *zk += yi * vk;
            }
        }
        for ((xk, zk), dk) in x.iter_mut().zip(&z).zip(&dinv) {
            *xk += zk * dk;
        }
        k.matvec(&x, &mut w);
        for ((rk, bk), wk) in r.iter_mut().zip(b).zip(&w) {
            *rk = bk - wk;
        }
    }
}
