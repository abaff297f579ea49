//! Legacy VTK ASCII output of a P1 field.

use std::fmt::Write as _;

use crate::mesh::SimplicialMesh;

/// Unstructured grid with one point-data scalar named `name`.
pub fn write_vtk(mesh: &SimplicialMesh, values: &[f64], name: &str) -> String {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nfracfem solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    let nv = mesh.dim() + 1;
    let _ = writeln!(out, "CELLS {} {}", mesh.num_simplices(), mesh.num_simplices() * (nv + 1));
    for cell in mesh.simplices() {
        let _ = write!(out, "{nv}");
        for v in cell {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    // 5 = VTK_TRIANGLE, 10 = VTK_TETRA
    let kind = if mesh.dim() == 2 { 5 } else { 10 };
    let _ = writeln!(out, "CELL_TYPES {}", mesh.num_simplices());
    for _ in 0..mesh.num_simplices() {
        let _ = writeln!(out, "{kind}");
    }
    let _ = writeln!(out, "POINT_DATA {}", mesh.num_vertices());
    let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cube_mesh;

    #[test]
    fn header_and_counts() {
        let m = generate_cube_mesh(1, 3).unwrap();
        let s = write_vtk(&m, &[0.0; 8], "u_h");
        assert!(s.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(s.contains("DATASET UNSTRUCTURED_GRID"));
        assert!(s.contains("CELLS 6 30"));
        assert!(s.contains("POINT_DATA 8\nSCALARS u_h double 1"));
    }
}
