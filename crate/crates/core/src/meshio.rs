//! Mesh file I/O.
//!
//! Two formats are read: a minimal node-tri ASCII format and the Gmsh MSH 2.2
//! ASCII format restricted to 3-node triangles, with 2-node line elements
//! interpreted as boundary tag declarations.
//!
//! Node-tri layout: first non-comment line `nnodes ntris`, then `x y` per
//! node, then `i j k tag` per triangle (zero-based indices); `#` starts a
//! comment anywhere on a line.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mesh::{BoundaryCondition, LoadReport, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    NodeTri,
    Msh22,
}

/// Loads a mesh file. Boundary faces are classified by `classify`, which
/// receives the face midpoint and, for MSH input, the physical tag of a
/// matching declared line element.
pub fn load_mesh(
    path: &Path,
    format: MeshFormat,
    classify: &dyn Fn(Vec2, Option<i32>) -> BoundaryCondition,
) -> Result<(Mesh, LoadReport)> {
    let text = fs::read_to_string(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };
    let (nodes, triangles, tagged_edges) = match format {
        MeshFormat::NodeTri => parse_node_tri(&text, &parse_err)?,
        MeshFormat::Msh22 => parse_msh22(&text, &parse_err)?,
    };

    // Resolve declared tags by edge midpoint; remaining faces classify untagged.
    let tag_midpoints: Vec<(Vec2, i32)> = tagged_edges
        .iter()
        .filter_map(|&((a, b), tag)| {
            let (a, b) = (nodes.get(a)?, nodes.get(b)?);
            Some((0.5 * (a + b), tag))
        })
        .collect();
    let scale = nodes.iter().map(|p| p.norm()).fold(1.0f64, f64::max);
    let with_tags = |mid: Vec2| -> BoundaryCondition {
        let tag = tag_midpoints
            .iter()
            .find(|(m, _)| (m - mid).norm() < 1e-10 * scale)
            .map(|&(_, t)| t);
        classify(mid, tag)
    };
    Mesh::build(nodes, triangles, &with_tags)
}

type TaggedEdge = ((usize, usize), i32);

fn parse_node_tri(
    text: &str,
    err: &dyn Fn(usize, String) -> Error,
) -> Result<(Vec<Vec2>, Vec<[usize; 3]>, Vec<TaggedEdge>)> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            None
        } else {
            Some((i + 1, body))
        }
    });

    let (ln, header) = lines.next().ok_or_else(|| err(0, "empty file".into()))?;
    let counts = split_numbers::<usize>(header);
    let [n_nodes, n_tris] = counts[..] else {
        return Err(err(ln, format!("expected 'nnodes ntris', got '{header}'")));
    };

    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, body) = lines
            .next()
            .ok_or_else(|| err(0, format!("expected {n_nodes} node lines")))?;
        let xy = split_numbers::<f64>(body);
        let [x, y] = xy[..] else {
            return Err(err(ln, format!("expected 'x y', got '{body}'")));
        };
        nodes.push(Vec2::new(x, y));
    }

    let mut triangles = Vec::with_capacity(n_tris);
    for _ in 0..n_tris {
        let (ln, body) = lines
            .next()
            .ok_or_else(|| err(0, format!("expected {n_tris} triangle lines")))?;
        let ijk = split_numbers::<usize>(body);
        if ijk.len() < 3 {
            return Err(err(ln, format!("expected 'i j k [tag]', got '{body}'")));
        }
        triangles.push([ijk[0], ijk[1], ijk[2]]);
    }
    Ok((nodes, triangles, Vec::new()))
}

fn parse_msh22(
    text: &str,
    err: &dyn Fn(usize, String) -> Error,
) -> Result<(Vec<Vec2>, Vec<[usize; 3]>, Vec<TaggedEdge>)> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let section = |name: &str| -> Result<(usize, usize)> {
        let open = lines
            .iter()
            .position(|(_, l)| *l == format!("${name}"))
            .ok_or_else(|| err(0, format!("missing ${name} section")))?;
        let close = lines
            .iter()
            .position(|(_, l)| *l == format!("$End{name}"))
            .ok_or_else(|| err(0, format!("missing $End{name}")))?;
        Ok((open + 1, close))
    };

    let (fmt_a, _) = section("MeshFormat")?;
    let (ln, fmt) = lines[fmt_a];
    if !fmt.starts_with("2.2") {
        return Err(err(ln, format!("unsupported MSH version '{fmt}'")));
    }

    let (nodes_a, nodes_b) = section("Nodes")?;
    let mut id_map = std::collections::HashMap::new();
    let mut nodes = Vec::new();
    for &(ln, body) in &lines[nodes_a + 1..nodes_b] {
        let f = split_numbers::<f64>(body);
        let [id, x, y, _z] = f[..] else {
            return Err(err(ln, format!("expected 'id x y z', got '{body}'")));
        };
        id_map.insert(id as i64, nodes.len());
        nodes.push(Vec2::new(x, y));
    }

    let (el_a, el_b) = section("Elements")?;
    let mut triangles = Vec::new();
    let mut tagged = Vec::new();
    for &(ln, body) in &lines[el_a + 1..el_b] {
        let f = split_numbers::<i64>(body);
        if f.len() < 3 {
            return Err(err(ln, format!("short element line '{body}'")));
        }
        let (ty, n_tags) = (f[1], f[2] as usize);
        let node_ids = &f[3 + n_tags..];
        let resolve = |id: i64| -> Result<usize> {
            id_map
                .get(&id)
                .copied()
                .ok_or_else(|| err(ln, format!("element references unknown node {id}")))
        };
        match ty {
            2 => {
                let [a, b, c] = node_ids[..] else {
                    return Err(err(ln, format!("triangle needs 3 nodes, got '{body}'")));
                };
                triangles.push([resolve(a)?, resolve(b)?, resolve(c)?]);
            }
            1 => {
                let [a, b] = node_ids[..] else {
                    return Err(err(ln, format!("line element needs 2 nodes, got '{body}'")));
                };
                let tag = if n_tags > 0 { f[3] as i32 } else { 0 };
                tagged.push(((resolve(a)?, resolve(b)?), tag));
            }
            // Points and higher-dimensional elements carry no information for
            // a planar triangle mesh.
            _ => {}
        }
    }
    Ok((nodes, triangles, tagged))
}

fn split_numbers<T: std::str::FromStr>(s: &str) -> Vec<T> {
    s.split_whitespace().filter_map(|t| t.parse().ok()).collect()
}

/// Writes a mesh in node-tri format. Boundary classification is not stored;
/// loaders re-derive it from geometry.
pub fn write_node_tri(mesh: &Mesh, path: &Path) -> Result<()> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", mesh.nodes.len(), mesh.triangles.len());
    for p in &mesh.nodes {
        let _ = writeln!(out, "{:.17e} {:.17e}", p.x, p.y);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {} 0", t[0], t[1], t[2]);
    }
    fs::write(path, out)?;
    Ok(())
}
