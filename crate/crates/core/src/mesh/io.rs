//! Triangle/TetGen `.node` / `.ele` ASCII reader and writer.
//!
//! `.node`: header `<#points> <dim> <#attributes> <#boundary markers>`, then
//! `<index> <x> <y> [<z>] [attributes…] [marker]` per line.
//! `.ele`: header `<#simplices> <nodes per simplex> <#attributes>`, then
//! `<index> <v0> … <vn> [attributes…]`. `#` starts a comment. Indexing is
//! 0- or 1-based, detected from the first point index in the `.node` file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{MeshError, Point, SimplicialMesh};

struct Tokens<'a> {
    file: &'a str,
    lines: Vec<(usize, Vec<(usize, &'a str)>)>,
}

impl<'a> Tokens<'a> {
    fn new(file: &'a str, text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, line)| {
                let content = line.split('#').next().unwrap_or("");
                let mut toks = Vec::new();
                let mut col = 0;
                for piece in content.split(|c: char| c.is_whitespace()) {
                    if !piece.is_empty() {
                        toks.push((col + 1, piece));
                    }
                    col += piece.len() + 1;
                }
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        Self { file, lines }
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> MeshError {
        MeshError::Parse {
            file: self.file.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, line: usize, tok: (usize, &str), what: &str) -> Result<T, MeshError> {
        tok.1
            .parse()
            .map_err(|_| self.err(line, tok.0, format!("expected {what}, found `{}`", tok.1)))
    }
}

/// Parsed `.node` contents: dimension, coordinates and the index base.
pub fn read_node(file: &str, text: &str) -> Result<(usize, Vec<Point>, usize), MeshError> {
    let t = Tokens::new(file, text);
    let (hline, header) = t.lines.first().ok_or_else(|| t.err(1, 1, "missing header"))?;
    if header.len() < 2 {
        return Err(t.err(*hline, 1, "header needs `<#points> <dim> [<#attrs> <#markers>]`"));
    }
    let count: usize = t.parse(*hline, header[0], "point count")?;
    let dim: usize = t.parse(*hline, header[1], "dimension")?;
    if dim != 2 && dim != 3 {
        return Err(t.err(*hline, header[1].0, format!("unsupported dimension {dim}")));
    }
    let nattr: usize = match header.get(2) {
        Some(&tok) => t.parse(*hline, tok, "attribute count")?,
        None => 0,
    };
    let nmark: usize = match header.get(3) {
        Some(&tok) => t.parse(*hline, tok, "boundary marker count")?,
        None => 0,
    };
    let body = &t.lines[1..];
    if body.len() < count {
        let last = body.last().map_or(*hline, |l| l.0);
        return Err(t.err(last + 1, 1, format!("expected {count} points, found {}", body.len())));
    }
    let mut base = 0;
    let mut points = Vec::with_capacity(count);
    for (k, (line, toks)) in body.iter().take(count).enumerate() {
        let expected = 1 + dim + nattr + nmark;
        if toks.len() < 1 + dim {
            return Err(t.err(*line, 1, format!("expected {expected} fields, found {}", toks.len())));
        }
        let index: usize = t.parse(*line, toks[0], "point index")?;
        if k == 0 {
            if index > 1 {
                return Err(t.err(*line, toks[0].0, "first point index must be 0 or 1"));
            }
            base = index;
        } else if index != base + k {
            return Err(t.err(*line, toks[0].0, format!("expected point index {}", base + k)));
        }
        let mut p = [0.0; 3];
        for d in 0..dim {
            p[d] = t.parse(*line, toks[1 + d], "coordinate")?;
        }
        points.push(p);
    }
    Ok((dim, points, base))
}

/// Parsed `.ele` contents with vertex indices shifted to 0-based.
pub fn read_ele(file: &str, text: &str, dim: usize, base: usize) -> Result<Vec<[usize; 4]>, MeshError> {
    let t = Tokens::new(file, text);
    let (hline, header) = t.lines.first().ok_or_else(|| t.err(1, 1, "missing header"))?;
    if header.len() < 2 {
        return Err(t.err(*hline, 1, "header needs `<#simplices> <nodes per simplex> [<#attrs>]`"));
    }
    let count: usize = t.parse(*hline, header[0], "simplex count")?;
    let per: usize = t.parse(*hline, header[1], "nodes per simplex")?;
    if per != dim + 1 {
        return Err(t.err(
            *hline,
            header[1].0,
            format!("expected {} nodes per simplex for a {dim}-D mesh, found {per}", dim + 1),
        ));
    }
    let body = &t.lines[1..];
    if body.len() < count {
        let last = body.last().map_or(*hline, |l| l.0);
        return Err(t.err(last + 1, 1, format!("expected {count} simplices, found {}", body.len())));
    }
    let mut cells = Vec::with_capacity(count);
    for (line, toks) in body.iter().take(count) {
        if toks.len() < 1 + per {
            return Err(t.err(*line, 1, format!("expected {} fields, found {}", 1 + per, toks.len())));
        }
        let mut cell = [usize::MAX; 4];
        for l in 0..per {
            let raw: usize = t.parse(*line, toks[1 + l], "vertex index")?;
            cell[l] = raw
                .checked_sub(base)
                .ok_or_else(|| t.err(*line, toks[1 + l].0, format!("vertex index {raw} below base {base}")))?;
        }
        cells.push(cell);
    }
    Ok(cells)
}

pub fn parse_mesh(node_text: &str, ele_text: &str) -> Result<SimplicialMesh, MeshError> {
    let (dim, points, base) = read_node("<node>", node_text)?;
    let cells = read_ele("<ele>", ele_text, dim, base)?;
    SimplicialMesh::new(dim, points, cells)
}

pub fn load_mesh(node_path: impl AsRef<Path>, ele_path: impl AsRef<Path>) -> Result<SimplicialMesh, MeshError> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|source| MeshError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let node_path = node_path.as_ref();
    let ele_path = ele_path.as_ref();
    let node_text = read(node_path)?;
    let ele_text = read(ele_path)?;
    let (dim, points, base) = read_node(&node_path.display().to_string(), &node_text)?;
    let cells = read_ele(&ele_path.display().to_string(), &ele_text, dim, base)?;
    SimplicialMesh::new(dim, points, cells)
}

/// `.node` text, 1-based. Coordinates use the shortest round-trip decimal form.
pub fn write_node(mesh: &SimplicialMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} 0 1", mesh.num_vertices(), mesh.dim());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for x in &p[..mesh.dim()] {
            let _ = write!(out, " {x}");
        }
        let _ = writeln!(out, " {}", u8::from(mesh.is_boundary_vertex(i)));
    }
    out
}

pub fn write_ele(mesh: &SimplicialMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} 0", mesh.num_simplices(), mesh.dim() + 1);
    for (s, cell) in mesh.simplices().enumerate() {
        let _ = write!(out, "{}", s + 1);
        for v in cell {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    out
}

pub fn save_mesh(mesh: &SimplicialMesh, node_path: impl AsRef<Path>, ele_path: impl AsRef<Path>) -> Result<(), MeshError> {
    let write = |p: &Path, text: String| {
        fs::write(p, text).map_err(|source| MeshError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    write(node_path.as_ref(), write_node(mesh))?;
    write(ele_path.as_ref(), write_ele(mesh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_single_tet_one_based_with_comments() {
        let node = "# a tet\n4 3 0 0\n1 0 0 0\n2 1 0 0 # B\n3 0 1 0\n4 0 0 1\n";
        let ele = "1 4 0\n1 1 2 3 4\n";
        let m = parse_mesh(node, ele).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.simplex(0), &[0, 1, 2, 3]);
    }

    #[test]
    fn reads_zero_based_triangle() {
        let node = "3 2 0 0\n0 0.0 0.0\n1 1.0 0.0\n2 0.0 1.0\n";
        let ele = "1 3 0\n0 0 1 2\n";
        let m = parse_mesh(node, ele).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.simplex(0), &[0, 1, 2]);
    }

    #[test]
    fn parse_error_reports_line_and_column() {
        let node = "3 2 0 0\n1 0.0 0.0\n2 1.0 zz\n3 0.0 1.0\n";
        let err = read_node("t.node", node).unwrap_err();
        match err {
            MeshError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 7);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn wrong_nodes_per_simplex() {
        let err = read_ele("t.ele", "1 3 0\n1 1 2 3\n", 3, 1).unwrap_err();
        assert!(err.to_string().contains("expected 4 nodes"));
    }
}
