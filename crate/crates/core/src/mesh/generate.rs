//! Structured simplicial meshes of the unit cube and of a ball.

use super::{MeshError, Point, SimplicialMesh};

/// `[0,1]^dim` split into `n^dim` subcubes, each cut into 2 triangles or
/// 6 Kuhn tetrahedra sharing the subcube's main diagonal.
pub fn generate_cube_mesh(n: usize, dim: usize) -> Result<SimplicialMesh, MeshError> {
    if n < 1 {
        return Err(MeshError::InvalidParameter(format!("subdivisions must be ≥ 1, got {n}")));
    }
    let (vertices, cells) = kuhn_grid(n, dim, [0.0; 3], 1.0, |_, _| false)?;
    SimplicialMesh::new(dim, vertices, cells)
}

/// Convex polyhedral approximation of the ball `|x| < radius` centred at the
/// origin. A grid on `[−radius, radius]^dim` is split with Kuhn simplices
/// mirrored per half-space so every main diagonal points away from the centre,
/// then each vertex is pushed radially so that its sup-norm distance from the
/// centre becomes its Euclidean distance. Boundary vertices land on the sphere.
pub fn generate_ball_mesh(n: usize, radius: f64, dim: usize) -> Result<SimplicialMesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidParameter(format!("ball resolution must be ≥ 2, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MeshError::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let half = n as f64 / 2.0;
    let (mut vertices, cells) = kuhn_grid(n, dim, [-radius; 3], 2.0 * radius, |_, c| (c as f64 + 0.5) < half)?;
    for p in vertices.iter_mut() {
        let sup = p[..dim].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let euclid = p[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
        if euclid > 0.0 {
            let scale = sup / euclid;
            for x in p[..dim].iter_mut() {
                *x *= scale;
            }
        }
        if (sup - radius).abs() <= 1e-14 * radius {
            // Snap the boundary ring exactly onto the sphere.
            let e = p[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in p[..dim].iter_mut() {
                *x *= radius / e;
            }
        }
    }
    SimplicialMesh::new(dim, vertices, cells).map_err(|e| match e {
        MeshError::Degenerate { simplex, .. } => MeshError::DegenerateAfterMapping { simplex, resolution: n },
        other => other,
    })
}

/// Grid vertices plus Kuhn simplices. `mirror(axis, cube_index)` flips the
/// local orientation of a subcube along `axis`; any per-axis-index choice
/// keeps the split conforming because a shared face only sees the
/// orientations of the axes parallel to it.
fn kuhn_grid(
    n: usize,
    dim: usize,
    origin: Point,
    length: f64,
    mirror: impl Fn(usize, usize) -> bool,
) -> Result<(Vec<Point>, Vec<[usize; 4]>), MeshError> {
    if dim != 2 && dim != 3 {
        return Err(MeshError::UnsupportedDimension(dim));
    }
    let np = n + 1;
    let h = length / n as f64;
    let idx = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let nz = if dim == 3 { np } else { 1 };
    let mut vertices = Vec::with_capacity(np * np * nz);
    for k in 0..nz {
        for j in 0..np {
            for i in 0..np {
                let mut p = [0.0; 3];
                for (d, c) in [i, j, k].into_iter().enumerate().take(dim) {
                    // Exact endpoints so boundary coordinates are not perturbed.
                    p[d] = if c == n { origin[d] + length } else { origin[d] + c as f64 * h };
                }
                vertices.push(p);
            }
        }
    }

    let perms: &[[usize; 3]] = if dim == 2 {
        &[[0, 1, 2], [1, 0, 2]]
    } else {
        &[[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
    };
    let ncz = if dim == 3 { n } else { 1 };
    let mut cells = Vec::with_capacity(n * n * ncz * perms.len());
    for ck in 0..ncz {
        for cj in 0..n {
            for ci in 0..n {
                let base = [ci, cj, ck];
                let flip: Vec<bool> = (0..dim).map(|a| mirror(a, base[a])).collect();
                let corner = |bits: [usize; 3]| {
                    let mut c = [0usize; 3];
                    for a in 0..3 {
                        let b = if a < dim && flip[a] { 1 - bits[a] } else { bits[a] };
                        c[a] = base[a] + if a < dim { b } else { 0 };
                    }
                    idx(c[0], c[1], c[2])
                };
                for perm in perms {
                    let mut bits = [0usize; 3];
                    let mut cell = [usize::MAX; 4];
                    cell[0] = corner(bits);
                    for step in 0..dim {
                        bits[perm[step]] = 1;
                        cell[step + 1] = corner(bits);
                    }
                    cells.push(cell);
                }
            }
        }
    }
    Ok((vertices, cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_and_cube_counts() {
        let m = generate_cube_mesh(1, 2).unwrap();
        assert_eq!((m.num_vertices(), m.num_simplices()), (4, 2));
        let m = generate_cube_mesh(1, 3).unwrap();
        assert_eq!((m.num_vertices(), m.num_simplices()), (8, 6));
    }

    #[test]
    fn cube_n4_volume() {
        let m = generate_cube_mesh(4, 3).unwrap();
        assert_eq!((m.num_vertices(), m.num_simplices()), (125, 384));
        assert!((m.total_volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(generate_cube_mesh(0, 3).is_err());
        assert!(generate_ball_mesh(1, 0.5, 3).is_err());
    }

    #[test]
    fn ball_boundary_vertices_on_sphere() {
        for n in [2, 3, 4, 7] {
            let m = generate_ball_mesh(n, 0.5, 3).unwrap();
            for v in m.boundary_vertices() {
                let r = m.vertex(v).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((r - 0.5).abs() <= 1e-12, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn every_ball_simplex_has_an_interior_vertex() {
        let m = generate_ball_mesh(6, 0.5, 3).unwrap();
        for cell in m.simplices() {
            assert!(cell.iter().any(|&v| !m.is_boundary_vertex(v)));
        }
    }
}
