//! Quadrature rules on the reference triangle and tetrahedron.
//!
//! Points are stored as barycentric coordinates `(k0, k1, …, kn)`, weights sum
//! to the reference volume `1/n!`. Every point is strictly interior, so
//! fractional kernels evaluated at quadrature points never see a zero distance.

use nalgebra::{DMatrix, SymmetricEigen};

use super::AssemblyError;
use crate::linalg::factorial;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub degree: usize,
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reference_volume(&self) -> f64 {
        1.0 / factorial(self.dim)
    }
}

pub fn quadrature_rule(dim: usize, degree: usize) -> Result<QuadratureRule, AssemblyError> {
    if !(1..=4).contains(&degree) {
        return Err(AssemblyError::UnsupportedQuadrature { dim, degree });
    }
    let (points, weights) = match dim {
        2 => triangle(degree),
        3 => tetrahedron(degree),
        _ => return Err(AssemblyError::UnsupportedQuadrature { dim, degree }),
    };
    Ok(QuadratureRule {
        dim,
        degree,
        points,
        weights,
    })
}

fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 4]>, wts: &mut Vec<f64>) {
    let b = 1.0 - 2.0 * a;
    for p in [[b, a, a, 0.0], [a, b, a, 0.0], [a, a, b, 0.0]] {
        pts.push(p);
        wts.push(w);
    }
}

fn triangle(degree: usize) -> (Vec<[f64; 4]>, Vec<f64>) {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    match degree {
        1 => {
            pts.push([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
            wts.push(0.5);
        }
        2 => orbit3(1.0 / 6.0, 1.0 / 6.0, &mut pts, &mut wts),
        _ => {
            // Dunavant, 6 points, degree 4.
            orbit3(0.445_948_490_915_965, 0.5 * 0.223_381_589_678_011, &mut pts, &mut wts);
            orbit3(0.091_576_213_509_771, 0.5 * 0.109_951_743_655_322, &mut pts, &mut wts);
        }
    }
    (pts, wts)
}

fn tetrahedron(degree: usize) -> (Vec<[f64; 4]>, Vec<f64>) {
    match degree {
        1 => (vec![[0.25; 4]], vec![1.0 / 6.0]),
        2 => {
            let a = 0.585_410_196_624_968_5;
            let b = 0.138_196_601_125_010_5;
            let pts = (0..4)
                .map(|i| {
                    let mut p = [b; 4];
                    p[i] = a;
                    p
                })
                .collect();
            (pts, vec![1.0 / 24.0; 4])
        }
        _ => collapsed_tetrahedron((degree + 1).div_ceil(2)),
    }
}

/// Product rule through `x = u, y = v(1−u), z = w(1−u)(1−v)`, whose Jacobian
/// `(1−u)²(1−v)` is absorbed into Gauss–Jacobi weights.
fn collapsed_tetrahedron(q: usize) -> (Vec<[f64; 4]>, Vec<f64>) {
    let gu = gauss_jacobi_unit(q, 2.0);
    let gv = gauss_jacobi_unit(q, 1.0);
    let gw = gauss_jacobi_unit(q, 0.0);
    let mut pts = Vec::with_capacity(q * q * q);
    let mut wts = Vec::with_capacity(q * q * q);
    for &(u, wu) in &gu {
        for &(v, wv) in &gv {
            for &(w, ww) in &gw {
                let x = u;
                let y = v * (1.0 - u);
                let z = w * (1.0 - u) * (1.0 - v);
                pts.push([1.0 - x - y - z, x, y, z]);
                wts.push(wu * wv * ww);
            }
        }
    }
    (pts, wts)
}

/// Nodes and weights on `[0, 1]` for the weight `(1−t)^alpha`, by Golub–Welsch.
pub(crate) fn gauss_jacobi_unit(q: usize, alpha: f64) -> Vec<(f64, f64)> {
    // Jacobi recurrence on [-1, 1] with weight (1−x)^α (1+x)^0.
    let beta = 0.0;
    let mut j = DMatrix::<f64>::zeros(q, q);
    for k in 0..q {
        let kf = k as f64;
        let s = 2.0 * kf + alpha + beta;
        j[(k, k)] = if k == 0 {
            (beta - alpha) / (s + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
        if k + 1 < q {
            let n = kf + 1.0;
            let s1 = 2.0 * n + alpha + beta;
            let off = 2.0 / s1 * (n * (n + alpha) * (n + beta) * (n + alpha + beta) / ((s1 + 1.0) * (s1 - 1.0))).sqrt();
            j[(k, k + 1)] = off;
            j[(k + 1, k)] = off;
        }
    }
    // Total mass of (1−x)^α on [-1,1] is 2^{α+1}/(α+1); mapped to [0,1] the
    // mass of (1−t)^α is 1/(α+1).
    let mass = 1.0 / (alpha + 1.0);
    let eig = SymmetricEigen::new(j);
    let mut out: Vec<(f64, f64)> = (0..q)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            (0.5 * (x + 1.0), mass * v0 * v0)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ over the reference simplex of Π x_d^{a_d} = Π a_d! / (Σa + n)!.
    fn monomial_exact(exps: &[usize]) -> f64 {
        let n = exps.len();
        let s: usize = exps.iter().sum();
        exps.iter().map(|&a| factorial(a)).product::<f64>() / factorial(s + n)
    }

    fn integrate(rule: &QuadratureRule, exps: &[usize]) -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * exps.iter().enumerate().map(|(d, &a)| p[d + 1].powi(a as i32)).product::<f64>())
            .sum()
    }

    fn exponents(dim: usize, max: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for a in 0..=max {
            for b in 0..=max - a {
                if dim == 2 {
                    out.push(vec![a, b]);
                } else {
                    for c in 0..=max - a - b {
                        out.push(vec![a, b, c]);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        for dim in [2, 3] {
            for degree in 1..=4 {
                let rule = quadrature_rule(dim, degree).unwrap();
                for e in exponents(dim, degree) {
                    let got = integrate(&rule, &e);
                    let exact = monomial_exact(&e);
                    assert!((got - exact).abs() < 1e-14, "dim {dim} degree {degree} {e:?}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn weights_positive_points_interior() {
        for dim in [2, 3] {
            for degree in 1..=4 {
                let rule = quadrature_rule(dim, degree).unwrap();
                let total: f64 = rule.weights.iter().sum();
                assert!((total - rule.reference_volume()).abs() < 1e-15);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                for p in &rule.points {
                    assert!(p[..=dim].iter().all(|&k| k > 1e-3));
                    assert!((p[..=dim].iter().sum::<f64>() - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn tet_degree_one_and_two() {
        let r = quadrature_rule(3, 1).unwrap();
        assert_eq!(r.points, vec![[0.25; 4]]);
        assert!((r.weights[0] - 1.0 / 6.0).abs() < 1e-16);
        let r = quadrature_rule(3, 2).unwrap();
        assert!((integrate(&r, &[1, 1, 0]) - 1.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degree() {
        assert!(quadrature_rule(3, 0).is_err());
        assert!(quadrature_rule(3, 5).is_err());
        assert!(quadrature_rule(1, 2).is_err());
    }
}
