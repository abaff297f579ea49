//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use fracfem::{Point, Side, SimplicialMesh};
use nalgebra::DMatrix;
use quadrature::double_exponential::integrate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Linear function through `(u, psi_u)` and `(v, psi_v)`.
pub fn linear(u: f64, v: f64, psi_u: f64, psi_v: f64) -> impl Fn(f64) -> f64 {
    move |y| psi_u + (psi_v - psi_u) * (y - u) / (v - u)
}

/// Fractional derivative at `s` of `psi` restricted to `[u, v]` (zero
/// elsewhere), for a segment not containing `s`. Integrates
/// `−γ/Γ(1−γ) ∫ t^{−γ−1} ψ(s ∓ t) dt` over the distance range after the
/// substitution `t = e^τ`, which leaves a smooth integrand.
pub fn kernel_interior(gamma_: f64, side: Side, u: f64, v: f64, psi: &dyn Fn(f64) -> f64, s: f64) -> f64 {
    let (t_near, t_far, sign) = match side {
        Side::Left => (s - v, s - u, -1.0),
        Side::Right => (u - s, v - s, 1.0),
    };
    assert!(t_near > 0.0 && t_far > t_near);
    let f = |tau: f64| {
        let t = tau.exp();
        (-gamma_ * tau).exp() * psi(s + sign * t)
    };
    let (a, b) = (t_near.ln(), t_far.ln());
    let scale = t_near.powf(-gamma_) * (b - a);
    let out = integrate(f, a, b, 1e-15 * scale);
    -gamma_ / gamma(1.0 - gamma_) * out.integral
}

/// Fractional integral `I(s) = 1/Γ(1−γ) ∫ |s−y|^{−γ} ψ(y) dy` over the part
/// of `[lo, hi]` on the integration side of `s`. The substitution
/// `w = |s−y|^{1−γ}` removes the endpoint singularity.
pub fn fractional_integral(gamma_: f64, side: Side, lo: f64, hi: f64, psi: &dyn Fn(f64) -> f64, s: f64) -> f64 {
    let e = 1.0 / (1.0 - gamma_);
    let (x, sign) = match side {
        Side::Left => (s - lo, -1.0),
        Side::Right => (hi - s, 1.0),
    };
    if x <= 0.0 {
        return 0.0;
    }
    let f = |w: f64| psi(s + sign * w.powf(e));
    let top = x.powf(1.0 - gamma_);
    let out = integrate(f, 0.0, top, 1e-16 * top);
    out.integral / gamma(2.0 - gamma_)
}

/// Fourth-order central difference of `f` at `x` with step `h`.
pub fn central_diff4(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Fractional derivative at `s` from the segment ending at `s`, by
/// differentiating the fractional integral numerically. The linear function
/// is held fixed while `s` moves; the far end stays put.
pub fn kernel_terminal(gamma_: f64, side: Side, u: f64, v: f64, psi: &dyn Fn(f64) -> f64) -> f64 {
    let (s, x) = match side {
        Side::Left => (v, v - u),
        Side::Right => (u, v - u),
    };
    let h = 1e-3 * x;
    let i = |t: f64| fractional_integral(gamma_, side, u, v, psi, t);
    let d = central_diff4(&i, s, h);
    match side {
        Side::Left => d,
        Side::Right => -d,
    }
}

/// Cyrus–Beck clipping of the ray `x + t e_axis·sign`, `t ≥ 0`, against every
/// simplex. Returns `(simplex, t_in, t_out)` for hits longer than `min_len`,
/// sorted by `t_in`.
pub fn brute_force_hits(mesh: &SimplicialMesh, x: &Point, axis: usize, side: Side, min_len: f64) -> Vec<(usize, f64, f64)> {
    let dim = mesh.dim();
    let mut d = [0.0; 3];
    d[axis] = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    let mut hits = Vec::new();
    for (s, cell) in mesh.simplices().enumerate() {
        let mut lo = 0.0f64;
        let mut hi = f64::INFINITY;
        let mut empty = false;
        for opp in 0..=dim {
            let face: Vec<Point> = (0..=dim).filter(|&l| l != opp).map(|l| *mesh.vertex(cell[l])).collect();
            let mut n = face_normal(dim, &face);
            let apex = mesh.vertex(cell[opp]);
            if dot(&n, &sub(apex, &face[0])) > 0.0 {
                n = [-n[0], -n[1], -n[2]];
            }
            // Inside: n·(x + t d − a) ≤ 0.
            let num = dot(&n, &sub(&face[0], x));
            let den = dot(&n, &d);
            let nn = dot(&n, &n).sqrt();
            if den.abs() <= 1e-14 * nn {
                if num < 0.0 {
                    empty = true;
                    break;
                }
                continue;
            }
            let t = num / den;
            if den > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
        }
        if !empty && hi - lo > min_len {
            hits.push((s, lo, hi));
        }
    }
    hits.sort_by(|a, b| a.1.total_cmp(&b.1));
    hits
}

fn face_normal(dim: usize, face: &[Point]) -> Point {
    let a = sub(&face[1], &face[0]);
    if dim == 2 {
        return [a[1], -a[0], 0.0];
    }
    let b = sub(&face[2], &face[0]);
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Textbook P1 stiffness `K_jk = Σ_E |E| ∇λ_j·∇λ_k`, with gradients from the
/// inverse of the element's `[1, x]` vertex matrix.
pub fn p1_stiffness(mesh: &SimplicialMesh) -> DMatrix<f64> {
    let dim = mesh.dim();
    let n = mesh.num_vertices();
    let mut k = DMatrix::zeros(n, n);
    let fact = if dim == 2 { 2.0 } else { 6.0 };
    for cell in mesh.simplices() {
        let m = DMatrix::from_fn(dim + 1, dim + 1, |r, c| if c == 0 { 1.0 } else { mesh.vertex(cell[r])[c - 1] });
        let vol = m.determinant().abs() / fact;
        let c = m.try_inverse().expect("nondegenerate element");
        for j in 0..=dim {
            for l in 0..=dim {
                let g: f64 = (1..=dim).map(|r| c[(r, j)] * c[(r, l)]).sum();
                k[(cell[j], cell[l])] += vol * g;
            }
        }
    }
    k
}

/// Uniform point in the open unit cube shrunk by `margin`.
pub fn random_cube_point(rng: &mut ChaCha8Rng, dim: usize, margin: f64) -> Point {
    let mut p = [0.0; 3];
    for c in p.iter_mut().take(dim) {
        *c = rng.random_range(margin..1.0 - margin);
    }
    p
}

/// Uniform point in the ball of radius `r` centred at the origin.
pub fn random_ball_point(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Point {
    loop {
        let mut p = [0.0; 3];
        for c in p.iter_mut().take(dim) {
            *c = rng.random_range(-r..r);
        }
        if p.iter().map(|c| c * c).sum::<f64>() < r * r {
            return p;
        }
    }
}

/// Hand-written exact solutions and their axis derivatives.
pub fn cube_u(dim: usize) -> (impl Fn(&Point) -> f64, impl Fn(&Point, usize) -> f64) {
    let u = move |x: &Point| (0..dim).map(|d| x[d] * (1.0 - x[d])).product();
    let du = move |x: &Point, axis: usize| {
        (0..dim)
            .map(|d| if d == axis { 1.0 - 2.0 * x[d] } else { x[d] * (1.0 - x[d]) })
            .product()
    };
    (u, du)
}

pub fn ball_u(dim: usize, r: f64) -> (impl Fn(&Point) -> f64, impl Fn(&Point, usize) -> f64) {
    let n2 = move |x: &Point| (0..dim).map(|d| x[d] * x[d]).sum::<f64>();
    let u = move |x: &Point| (n2(x) - r * r).powi(2);
    let du = move |x: &Point, axis: usize| 4.0 * x[axis] * (n2(x) - r * r);
    (u, du)
}

/// Left and right derivatives of order `beta` of `u` along the chord through
/// `x` in direction `axis`, using the form with `u'` under the integral.
pub fn chord_derivatives(
    beta: f64,
    u: &dyn Fn(&Point) -> f64,
    du: &dyn Fn(&Point, usize) -> f64,
    x: &Point,
    axis: usize,
    a: f64,
    b: f64,
) -> (f64, f64) {
    let t = x[axis];
    let at = |y: f64| {
        let mut p = *x;
        p[axis] = y;
        p
    };
    let e = 1.0 / (1.0 - beta);
    let g = gamma(1.0 - beta);
    let wl = (t - a).powf(1.0 - beta);
    let il = integrate(|w: f64| du(&at(t - w.powf(e)), axis), 0.0, wl, 1e-16 * wl.max(1e-300)).integral * e;
    let left = (u(&at(a)) * (t - a).powf(-beta) + il) / g;
    let wr = (b - t).powf(1.0 - beta);
    let ir = integrate(|w: f64| du(&at(t + w.powf(e)), axis), 0.0, wr, 1e-16 * wr.max(1e-300)).integral * e;
    let right = (u(&at(b)) * (b - t).powf(-beta) - ir) / g;
    (left, right)
}

/// `p_i = cos x_i`, `q_i = 1 − cos x_i`.
pub fn trig_coefficients(t: f64) -> (f64, f64) {
    let c = t.cos();
    (c, 1.0 - c)
}

pub enum OracleDomain {
    Cube,
    Ball(f64),
}

impl OracleDomain {
    fn bounds(&self, x: &Point, axis: usize, dim: usize) -> (f64, f64) {
        match *self {
            OracleDomain::Cube => (0.0, 1.0),
            OracleDomain::Ball(r) => {
                let rest: f64 = (0..dim).filter(|&d| d != axis).map(|d| x[d] * x[d]).sum();
                let w = (r * r - rest).sqrt();
                (-w, w)
            }
        }
    }
}

/// `f = Σ_i ∂_i (p_i D_L u − q_i D_R u)`, the outer derivative by
/// fourth-order differences. `coef(x_i)` returns `(p_i, q_i)`.
pub fn rhs_oracle(
    domain: &OracleDomain,
    dim: usize,
    beta: &[f64],
    coef: &dyn Fn(f64) -> (f64, f64),
    u: &dyn Fn(&Point) -> f64,
    du: &dyn Fn(&Point, usize) -> f64,
    x: &Point,
) -> f64 {
    let mut f = 0.0;
    for axis in 0..dim {
        let (a, b) = domain.bounds(x, axis, dim);
        let flux = |t: f64| {
            let mut p = *x;
            p[axis] = t;
            let (dl, dr) = chord_derivatives(beta[axis], u, du, &p, axis, a, b);
            let (p, q) = coef(t);
            p * dl - q * dr
        };
        let h = 1e-3 * (x[axis] - a).min(b - x[axis]);
        f += central_diff4(&flux, x[axis], h);
    }
    f
}
