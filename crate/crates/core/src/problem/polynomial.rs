//! Sparse multivariate polynomials in up to three variables.

use crate::mesh::Point;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    /// `(coefficient, exponents)` pairs; exponents of unused variables are 0.
    terms: Vec<(f64, [u32; 3])>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![(c, [0, 0, 0])])
    }

    /// The coordinate `x_d`.
    pub fn variable(d: usize) -> Self {
        let mut e = [0; 3];
        e[d] = 1;
        Self::from_terms(vec![(1.0, e)])
    }

    pub fn from_terms(terms: Vec<(f64, [u32; 3])>) -> Self {
        let mut p = Self { terms };
        p.normalize();
        p
    }

    pub fn terms(&self) -> &[(f64, [u32; 3])] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut out: Vec<(f64, [u32; 3])> = Vec::with_capacity(self.terms.len());
        for &(c, e) in &self.terms {
            match out.last_mut() {
                Some(last) if last.1 == e => last.0 += c,
                _ => out.push((c, e)),
            }
        }
        out.retain(|t| t.0 != 0.0);
        self.terms = out;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = self.terms.clone();
        t.extend_from_slice(&other.terms);
        Self::from_terms(t)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|&(c, e)| (c * s, e)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, ea) in &self.terms {
            for &(b, eb) in &other.terms {
                t.push((a * b, [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]]));
            }
        }
        Self::from_terms(t)
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.terms
            .iter()
            .map(|&(c, e)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn partial(&self, axis: usize) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|t| t.1[axis] > 0)
                .map(|&(c, mut e)| {
                    let k = e[axis];
                    e[axis] -= 1;
                    (c * k as f64, e)
                })
                .collect(),
        )
    }

    /// Coefficients `U_m` of `t^m` for `t ↦ u(x + (t − x_axis) e_axis)`.
    pub fn restrict_to_line(&self, x: &Point, axis: usize) -> Vec<f64> {
        let deg = self.terms.iter().map(|t| t.1[axis]).max().unwrap_or(0) as usize;
        let mut u = vec![0.0; deg + 1];
        for &(c, e) in &self.terms {
            let mut v = c;
            for d in 0..3 {
                if d != axis {
                    v *= x[d].powi(e[d] as i32);
                }
            }
            u[e[axis] as usize] += v;
        }
        u
    }

    /// `Π_d x_d (1 − x_d)` over the first `dim` coordinates.
    pub fn cube_bubble(dim: usize) -> Self {
        (0..dim).fold(Self::constant(1.0), |acc, d| {
            let x = Self::variable(d);
            acc.mul(&x.mul(&Self::constant(1.0).add(&x.scale(-1.0))))
        })
    }

    /// `(|x|² − r²)²` over the first `dim` coordinates.
    pub fn ball_bubble(dim: usize, radius: f64) -> Self {
        let q = (0..dim).fold(Self::constant(-radius * radius), |acc, d| {
            let x = Self::variable(d);
            acc.add(&x.mul(&x))
        });
        q.mul(&q)
    }
}

/// Taylor coefficients `ρ_k` with `Σ U_m t^m = Σ ρ_k (t − a)^k`.
pub(crate) fn shift(u: &[f64], a: f64) -> Vec<f64> {
    let n = u.len();
    let mut rho = vec![0.0; n];
    for k in 0..n {
        let mut binom = 1.0;
        let mut s = 0.0;
        // C(m, k) a^{m−k}, m = k..n−1.
        for m in k..n {
            if m > k {
                binom = binom * m as f64 / (m - k) as f64;
            }
            s += u[m] * binom * a.powi((m - k) as i32);
        }
        rho[k] = s;
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_values() {
        let p = Polynomial::cube_bubble(3);
        let x = [0.3, 0.5, 0.9];
        assert!((p.eval(&x) - 0.21 * 0.25 * 0.09).abs() < 1e-15);
        let b = Polynomial::ball_bubble(3, 0.5);
        assert!((b.eval(&[0.1, 0.2, 0.3]) - (0.14f64 - 0.25).powi(2)).abs() < 1e-15);
        assert!(b.eval(&[0.5, 0.0, 0.0]).abs() < 1e-15);
    }

    #[test]
    fn partial_and_restriction() {
        let b = Polynomial::ball_bubble(2, 0.5);
        let x = [0.2, -0.1, 0.0];
        let d = b.partial(0).eval(&x);
        // d/dx (x² + y² − r²)² = 4x(x² + y² − r²)
        assert!((d - 4.0 * 0.2 * (0.05 - 0.25)).abs() < 1e-15);
        let u = b.restrict_to_line(&x, 0);
        let t: f64 = 0.37;
        let direct = b.eval(&[t, -0.1, 0.0]);
        let via: f64 = u.iter().enumerate().map(|(m, c)| c * t.powi(m as i32)).sum();
        assert!((direct - via).abs() < 1e-15);
    }

    #[test]
    fn taylor_shift() {
        let u = vec![1.0, -2.0, 0.5, 3.0];
        let a = -0.4;
        let rho = shift(&u, a);
        for t in [0.1f64, 0.7, -0.3] {
            let p: f64 = u.iter().enumerate().map(|(m, c)| c * t.powi(m as i32)).sum();
            let q: f64 = rho.iter().enumerate().map(|(k, c)| c * (t - a).powi(k as i32)).sum();
            assert!((p - q).abs() < 1e-13);
        }
    }
}
