//! Small fixed-size helpers for 2×2 and 3×3 systems.
//!
//! Points are stored as `[f64; 3]` for both dimensions; in 2-D the third
//! component is zero and only the leading `dim × dim` block of a matrix is used.

pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) fn det(dim: usize, a: &Mat3) -> f64 {
    match dim {
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        3 => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
        _ => unreachable!("dimension must be 2 or 3"),
    }
}

/// Inverse by adjugate; the caller guarantees `det != 0`.
pub(crate) fn inverse(dim: usize, a: &Mat3, det: f64) -> Mat3 {
    let mut inv = [[0.0; 3]; 3];
    let s = 1.0 / det;
    match dim {
        2 => {
            inv[0][0] = a[1][1] * s;
            inv[0][1] = -a[0][1] * s;
            inv[1][0] = -a[1][0] * s;
            inv[1][1] = a[0][0] * s;
        }
        3 => {
            inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * s;
            inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * s;
            inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * s;
            inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * s;
            inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * s;
            inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * s;
            inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * s;
            inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * s;
            inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * s;
        }
        _ => unreachable!("dimension must be 2 or 3"),
    }
    inv
}

pub(crate) fn mat_vec(dim: usize, a: &Mat3, x: &[f64; 3]) -> [f64; 3] {
    let mut y = [0.0; 3];
    for (r, yr) in y.iter_mut().enumerate().take(dim) {
        *yr = (0..dim).map(|c| a[r][c] * x[c]).sum();
    }
    y
}

pub(crate) fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = sub(a, b);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
