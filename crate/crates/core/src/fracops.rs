//! Riemann–Liouville derivatives of P1 basis functions along integration paths.
//!
//! For `0 < γ < 1` both one-sided derivatives of a function that is linear on
//! a chord segment can be written in terms of the distance `t = |y − s|` from
//! the evaluation point: a segment at distances `[t_near, t_far]` contributes
//! `−γ/Γ(1−γ) ∫ t^{−γ−1} ψ dt`, and the segment touching the evaluation point
//! (`t_near = 0`) contributes `t_far^{−γ} (ψ_near − γ ψ_far) / Γ(2−γ)`. The
//! formulas are the same for the left and the right operator once the chord is
//! parametrized by distance, so both reduce to a pair of weights applied to the
//! basis values at the two segment ends.

use thiserror::Error;

use crate::mesh::SimplicialMesh;
use crate::raypath::IntegrationPath;
pub use crate::raypath::Side;

#[derive(Debug, Error, PartialEq)]
pub enum FracError {
    #[error("fractional order must satisfy 0 < γ < 1 or γ = 1, got {0}")]
    InvalidOrder(f64),
    #[error("gamma function argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("path runs {path_side} along axis {path_axis}, operator expects {side} along axis {axis}")]
    PathMismatch {
        side: Side,
        axis: usize,
        path_side: Side,
        path_axis: usize,
    },
    #[error("segment [{u}, {v}] is not admissible for evaluation at s = {s} ({side} side)")]
    BadSegment { u: f64, v: f64, s: f64, side: Side },
}

/// Order, side and axis of one derivative. `gamma == 1` denotes the classical
/// first derivative along the axis; the side is then irrelevant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalOrder {
    gamma: f64,
    side: Side,
    axis: usize,
}

impl FractionalOrder {
    pub fn new(gamma: f64, side: Side, axis: usize) -> Result<Self, FracError> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(FracError::InvalidOrder(gamma));
        }
        Ok(Self { gamma, side, axis })
    }

    pub fn classical(axis: usize) -> Self {
        Self {
            gamma: 1.0,
            side: Side::Left,
            axis,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn is_classical(&self) -> bool {
        self.gamma == 1.0
    }
}

/// Values of one local basis function at the ends of a chord segment, in
/// axis coordinates: `u < v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentBasisTrace {
    pub u: f64,
    pub v: f64,
    pub psi_u: f64,
    pub psi_v: f64,
}

pub fn gamma_function(x: f64) -> Result<f64, FracError> {
    if !(x > 0.0) {
        return Err(FracError::NonPositiveArgument(x));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Per-order constants shared by every segment evaluation.
#[derive(Clone, Copy, Debug)]
pub struct KernelConstants {
    gamma: f64,
    inv_gamma_1m: f64,
    inv_gamma_2m: f64,
}

impl KernelConstants {
    /// `gamma` must lie in `(0, 1)`.
    pub fn new(gamma: f64) -> Self {
        debug_assert!(gamma > 0.0 && gamma < 1.0);
        Self {
            gamma,
            inv_gamma_1m: 1.0 / statrs::function::gamma::gamma(1.0 - gamma),
            inv_gamma_2m: 1.0 / statrs::function::gamma::gamma(2.0 - gamma),
        }
    }

    /// Weights `(w_near, w_far)` such that a segment at distances
    /// `[t_near, t_far]` contributes `w_near ψ_near + w_far ψ_far`.
    pub fn weights(&self, t_near: f64, t_far: f64) -> (f64, f64) {
        let g = self.gamma;
        if t_near == 0.0 {
            let p = t_far.powf(-g) * self.inv_gamma_2m;
            return (p, -g * p);
        }
        let ratio = (t_far - t_near) / t_near;
        let l = ratio.ln_1p();
        let e1 = (-g * l).exp_m1();
        let big_g = if l < 0.05 {
            // Leading terms cancel; sum the series directly.
            let mut term = l;
            let mut sum = 0.0;
            let mut neg_g_pow = -g;
            let mut one_m_pow = 1.0;
            for k in 2..=20 {
                term *= l / k as f64;
                neg_g_pow *= -g;
                one_m_pow *= 1.0 - g;
                sum += term * (neg_g_pow + g * one_m_pow);
            }
            sum
        } else {
            e1 + g * ((1.0 - g) * l).exp_m1() / (1.0 - g)
        };
        let scale = t_near.powf(-g) * self.inv_gamma_1m;
        let lin = big_g / ratio;
        (scale * (e1 + lin), -scale * lin)
    }
}

fn near_far(order: &FractionalOrder, seg: &SegmentBasisTrace, s: f64) -> (f64, f64, f64, f64) {
    match order.side {
        Side::Left => (s - seg.v, s - seg.u, seg.psi_v, seg.psi_u),
        Side::Right => (seg.u - s, seg.v - s, seg.psi_u, seg.psi_v),
    }
}

/// Contribution of a segment not touching the evaluation point `s`.
pub fn segment_contribution_interior(order: &FractionalOrder, seg: &SegmentBasisTrace, s: f64) -> Result<f64, FracError> {
    if order.is_classical() {
        return Err(FracError::InvalidOrder(order.gamma));
    }
    let (near, far, psi_near, psi_far) = near_far(order, seg, s);
    if !(near > 0.0 && far > near) {
        return Err(FracError::BadSegment {
            u: seg.u,
            v: seg.v,
            s,
            side: order.side,
        });
    }
    let (wn, wf) = KernelConstants::new(order.gamma).weights(near, far);
    Ok(wn * psi_near + wf * psi_far)
}

/// Contribution of the segment ending at the evaluation point (`v = s` on the
/// left, `u = s` on the right; snapped when within 1e-12).
pub fn segment_contribution_terminal(order: &FractionalOrder, seg: &SegmentBasisTrace, s: f64) -> Result<f64, FracError> {
    if order.is_classical() {
        return Err(FracError::InvalidOrder(order.gamma));
    }
    let (near, far, psi_near, psi_far) = near_far(order, seg, s);
    if near.abs() > 1e-12 || !(far > 0.0) {
        return Err(FracError::BadSegment {
            u: seg.u,
            v: seg.v,
            s,
            side: order.side,
        });
    }
    let (wn, wf) = KernelConstants::new(order.gamma).weights(0.0, far);
    Ok(wn * psi_near + wf * psi_far)
}

fn check_path(order: &FractionalOrder, path: &IntegrationPath) -> Result<(), FracError> {
    if path.axis != order.axis || (!order.is_classical() && path.side != order.side) {
        return Err(FracError::PathMismatch {
            side: order.side,
            axis: order.axis,
            path_side: path.side,
            path_axis: path.axis,
        });
    }
    Ok(())
}

/// Derivative of the basis function attached to local vertex `local` of
/// `element`, evaluated at the path's starting point. Only segments inside
/// `element` contribute.
pub fn eval_fractional_derivative(
    order: &FractionalOrder,
    path: &IntegrationPath,
    mesh: &SimplicialMesh,
    element: usize,
    local: usize,
) -> Result<f64, FracError> {
    check_path(order, path)?;
    if order.is_classical() {
        let start = path.segments.first().map(|h| h.simplex);
        return Ok(if start == Some(element) {
            derivative_classical(mesh, element, local, order.axis)
        } else {
            0.0
        });
    }
    let k = KernelConstants::new(order.gamma);
    Ok(path
        .segments
        .iter()
        .filter(|h| h.simplex == element)
        .map(|h| {
            let (wn, wf) = k.weights(h.r_min, h.r_max);
            wn * h.k_min[local] + wf * h.k_max[local]
        })
        .sum())
}

/// Contributions of every `(element, local basis)` pair met along the path, in
/// path order.
pub fn eval_all_local_basis(
    order: &FractionalOrder,
    path: &IntegrationPath,
    mesh: &SimplicialMesh,
) -> Result<Vec<((usize, usize), f64)>, FracError> {
    check_path(order, path)?;
    let nv = mesh.dim() + 1;
    let mut out = Vec::with_capacity(path.segments.len() * nv);
    if order.is_classical() {
        let s = path.segments[0].simplex;
        for l in 0..nv {
            out.push(((s, l), derivative_classical(mesh, s, l, order.axis)));
        }
        return Ok(out);
    }
    let k = KernelConstants::new(order.gamma);
    for h in &path.segments {
        let (wn, wf) = k.weights(h.r_min, h.r_max);
        for l in 0..nv {
            out.push(((h.simplex, l), wn * h.k_min[l] + wf * h.k_max[l]));
        }
    }
    Ok(out)
}

/// Derivative of every global basis function at the path's start, accumulated
/// over segments and sorted by vertex index. Entries that are exactly zero are
/// dropped. `out` is cleared first.
pub fn eval_global_basis(
    order: &FractionalOrder,
    path: &IntegrationPath,
    mesh: &SimplicialMesh,
    out: &mut Vec<(usize, f64)>,
) -> Result<(), FracError> {
    check_path(order, path)?;
    out.clear();
    let nv = mesh.dim() + 1;
    if order.is_classical() {
        let s = path.segments[0].simplex;
        let cell = mesh.simplex(s);
        for l in 0..nv {
            out.push((cell[l], derivative_classical(mesh, s, l, order.axis)));
        }
    } else {
        let k = KernelConstants::new(order.gamma);
        for h in &path.segments {
            let (wn, wf) = k.weights(h.r_min, h.r_max);
            let cell = mesh.simplex(h.simplex);
            for l in 0..nv {
                let v = wn * h.k_min[l] + wf * h.k_max[l];
                if v != 0.0 {
                    out.push((cell[l], v));
                }
            }
        }
    }
    merge_sorted(out);
    Ok(())
}

fn merge_sorted(out: &mut Vec<(usize, f64)>) {
    out.sort_unstable_by_key(|e| e.0);
    let mut w = 0;
    for r in 0..out.len() {
        if w > 0 && out[w - 1].0 == out[r].0 {
            out[w - 1].1 += out[r].1;
        } else {
            out[w] = out[r];
            w += 1;
        }
    }
    out.truncate(w);
    out.retain(|e| e.1 != 0.0);
}

/// `∂ψ_local/∂x_axis` on `element` (constant for P1).
pub fn derivative_classical(mesh: &SimplicialMesh, element: usize, local: usize, axis: usize) -> f64 {
    mesh.basis_gradient(element, local)[axis]
}
