//! Conforming triangular meshes: connectivity, boundary classification,
//! periodic pairing, and generators for the benchmark domains.
//!
//! Faces are stored once, directed so that traversing `nodes[0] -> nodes[1]`
//! walks counter-clockwise around the left cell; the stored unit normal points
//! from the left cell to the right cell (or outward on the boundary).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{outward_normal, polygon_signed_area, Vec2};

/// Condition attached to a boundary face. `Periodic` faces are placeholders
/// that must be merged into interior faces by [`Mesh::pair_periodic`].
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Periodic,
    SymmetryWall,
    /// Prescribed external conservative state.
    Inflow(Vec<f64>),
    Outflow,
}

/// What lies on the right of a face.
#[derive(Debug, Clone, PartialEq)]
pub enum FaceRight {
    Interior {
        cell: usize,
        /// Local edge index of the face within the right cell.
        slot: usize,
        /// Translation carrying left-frame coordinates into the right cell's
        /// frame; nonzero only for merged periodic pairs.
        shift: Vec2,
    },
    Boundary(BoundaryCondition),
}

#[derive(Debug, Clone)]
pub struct Face {
    /// Node indices, ordered counter-clockwise around the left cell.
    pub nodes: [usize; 2],
    pub left: usize,
    /// Local edge index of the face within the left cell.
    pub left_slot: usize,
    pub right: FaceRight,
    /// Unit normal pointing from left to right.
    pub normal: Vec2,
    pub length: f64,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.right, FaceRight::Boundary(_))
    }
}

/// Diagnostics from mesh construction. Orientation fixes are applied, not
/// silently swallowed; callers decide whether to surface them.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub flipped_triangles: usize,
    pub merged_periodic_pairs: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Vec2>,
    /// Counter-clockwise node triples. Local edge e joins vertices e, e+1 mod 3.
    pub triangles: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    /// Face index per triangle and local edge.
    pub cell_faces: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
    pub centroids: Vec<Vec2>,
    /// Node identifications produced by periodic merging, as index pairs.
    pub periodic_node_pairs: Vec<(usize, usize)>,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.triangles.len()
    }

    /// Builds full connectivity from raw nodes and triangles. Clockwise
    /// triangles are flipped and counted in the report; boundary faces are
    /// classified through `classify`, which receives the face midpoint.
    pub fn build(
        nodes: Vec<Vec2>,
        mut triangles: Vec<[usize; 3]>,
        classify: &dyn Fn(Vec2) -> BoundaryCondition,
    ) -> Result<(Mesh, LoadReport)> {
        let mut report = LoadReport::default();
        if nodes.is_empty() || triangles.is_empty() {
            return Err(Error::InvalidNodes("empty mesh".into()));
        }

        let scale = bounding_box_diameter(&nodes);
        check_distinct_nodes(&nodes, 1e-12 * scale)?;

        let mut used = vec![false; nodes.len()];
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nodes.len() {
                    return Err(Error::InvalidNodes(format!(
                        "triangle {t} references node {v} of {}",
                        nodes.len()
                    )));
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::NonConforming(format!("triangle {t} repeats a node")));
            }
            let poly = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
            let a = polygon_signed_area(&poly);
            if a.abs() < 1e-14 * scale * scale {
                return Err(Error::DegenerateGeometry(format!(
                    "triangle {t} has near-zero area {a:.3e}"
                )));
            }
            if a < 0.0 {
                tri.swap(1, 2);
                report.flipped_triangles += 1;
            }
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidNodes(format!("node {v} is referenced by no triangle")));
        }

        let areas: Vec<f64> = triangles
            .iter()
            .map(|t| polygon_signed_area(&[nodes[t[0]], nodes[t[1]], nodes[t[2]]]))
            .collect();
        let centroids: Vec<Vec2> = triangles
            .iter()
            .map(|t| (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0)
            .collect();

        // Undirected edge -> incident (cell, slot) pairs.
        let mut edge_map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (c, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edge_map.entry(key).or_default().push((c, e));
            }
        }

        let mut faces = Vec::with_capacity(edge_map.len());
        let mut cell_faces = vec![[usize::MAX; 3]; triangles.len()];
        let mut keys: Vec<_> = edge_map.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let inc = &edge_map[&key];
            match inc.len() {
                1 => {
                    let (c, e) = inc[0];
                    let (a, b) = (triangles[c][e], triangles[c][(e + 1) % 3]);
                    let f = Face {
                        nodes: [a, b],
                        left: c,
                        left_slot: e,
                        right: FaceRight::Boundary(classify(0.5 * (nodes[a] + nodes[b]))),
                        normal: outward_normal(nodes[a], nodes[b]),
                        length: (nodes[b] - nodes[a]).norm(),
                    };
                    cell_faces[c][e] = faces.len();
                    faces.push(f);
                }
                2 => {
                    let (c0, e0) = inc[0];
                    let (c1, e1) = inc[1];
                    let (a, b) = (triangles[c0][e0], triangles[c0][(e0 + 1) % 3]);
                    if triangles[c1][e1] != b || triangles[c1][(e1 + 1) % 3] != a {
                        return Err(Error::NonConforming(format!(
                            "cells {c0} and {c1} traverse edge ({a}, {b}) in the same direction"
                        )));
                    }
                    let f = Face {
                        nodes: [a, b],
                        left: c0,
                        left_slot: e0,
                        right: FaceRight::Interior { cell: c1, slot: e1, shift: Vec2::zeros() },
                        normal: outward_normal(nodes[a], nodes[b]),
                        length: (nodes[b] - nodes[a]).norm(),
                    };
                    cell_faces[c0][e0] = faces.len();
                    cell_faces[c1][e1] = faces.len();
                    faces.push(f);
                }
                n => {
                    return Err(Error::NonConforming(format!(
                        "edge ({}, {}) is shared by {n} triangles",
                        key.0, key.1
                    )));
                }
            }
        }

        let mesh = Mesh {
            nodes,
            triangles,
            faces,
            cell_faces,
            areas,
            centroids,
            periodic_node_pairs: Vec::new(),
        };
        mesh.check_closed()?;
        Ok((mesh, report))
    }

    /// Sum of cell areas must equal the area enclosed by the boundary loop.
    fn check_closed(&self) -> Result<()> {
        let cell_sum: f64 = self.areas.iter().sum();
        let mut loop_area = 0.0;
        for f in &self.faces {
            if f.is_boundary() {
                let a = self.nodes[f.nodes[0]];
                let b = self.nodes[f.nodes[1]];
                loop_area += 0.5 * (a.x * b.y - b.x * a.y);
            }
        }
        if (cell_sum - loop_area).abs() > 1e-12 * cell_sum.abs() {
            return Err(Error::NonConforming(format!(
                "cell areas sum to {cell_sum:.15e} but the boundary encloses {loop_area:.15e}"
            )));
        }
        Ok(())
    }

    /// Merges geometrically matching `Periodic` boundary faces into interior
    /// faces. `shifts` lists the period vectors (each tried in both signs).
    /// Every `Periodic` face must find exactly one partner.
    pub fn pair_periodic(&mut self, shifts: &[Vec2]) -> Result<usize> {
        let tol = 1e-10 * bounding_box_diameter(&self.nodes);
        let pending: Vec<usize> = (0..self.faces.len())
            .filter(|&f| {
                matches!(self.faces[f].right, FaceRight::Boundary(BoundaryCondition::Periodic))
            })
            .collect();
        if pending.is_empty() {
            return Ok(0);
        }

        let midpoint = |f: &Face| 0.5 * (self.nodes[f.nodes[0]] + self.nodes[f.nodes[1]]);
        let mut partner: Vec<Option<(usize, Vec2)>> = vec![None; self.faces.len()];
        for (i, &fi) in pending.iter().enumerate() {
            if partner[fi].is_some() {
                continue;
            }
            let mi = midpoint(&self.faces[fi]);
            let li = self.faces[fi].length;
            let mut found = None;
            for &fj in pending.iter().skip(i + 1) {
                if partner[fj].is_some() {
                    continue;
                }
                let mj = midpoint(&self.faces[fj]);
                for &s in shifts {
                    for sgn in [1.0, -1.0] {
                        let shift = s * sgn;
                        if (mi + shift - mj).norm() < tol
                            && (li - self.faces[fj].length).abs() < tol
                        {
                            found = Some((fj, shift));
                        }
                    }
                }
                if found.is_some() {
                    break;
                }
            }
            let (fj, shift) = found.ok_or_else(|| {
                Error::NonConforming(format!(
                    "periodic face at ({:.6}, {:.6}) has no partner under the declared periods",
                    mi.x, mi.y
                ))
            })?;
            partner[fi] = Some((fj, shift));
            partner[fj] = Some((fi, -shift));
        }

        // Keep the lower-indexed face of each pair as the interior face.
        let mut removed = vec![false; self.faces.len()];
        let mut merged = 0;
        for &fi in &pending {
            let (fj, shift) = partner[fi].expect("all periodic faces paired");
            if fj < fi {
                continue;
            }
            let (rc, rslot) = (self.faces[fj].left, self.faces[fj].left_slot);
            self.faces[fi].right = FaceRight::Interior { cell: rc, slot: rslot, shift };
            self.cell_faces[rc][rslot] = fi;
            removed[fj] = true;
            merged += 1;

            // Identify endpoint nodes across the period for vertex adjacency.
            for &a in &self.faces[fi].nodes.clone() {
                let target = self.nodes[a] + shift;
                let b = self.faces[fj]
                    .nodes
                    .iter()
                    .copied()
                    .find(|&b| (self.nodes[b] - target).norm() < tol)
                    .ok_or_else(|| {
                        Error::NonConforming(
                            "periodic faces match by midpoint but not by endpoints".into(),
                        )
                    })?;
                self.periodic_node_pairs.push((a, b));
            }
        }

        // Compact the face list and remap indices.
        let mut new_index = vec![usize::MAX; self.faces.len()];
        let mut kept = Vec::with_capacity(self.faces.len() - merged);
        for (f, face) in std::mem::take(&mut self.faces).into_iter().enumerate() {
            if !removed[f] {
                new_index[f] = kept.len();
                kept.push(face);
            }
        }
        self.faces = kept;
        for cf in &mut self.cell_faces {
            for f in cf.iter_mut() {
                *f = new_index[*f];
            }
        }
        Ok(merged)
    }

    /// Cells incident to each node, without periodic identification.
    pub fn node_cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (c, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(c);
            }
        }
        out
    }
}

fn bounding_box_diameter(nodes: &[Vec2]) -> f64 {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in nodes {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (hi - lo).norm().max(f64::MIN_POSITIVE)
}

/// Rejects node sets containing (near-)duplicate points.
fn check_distinct_nodes(nodes: &[Vec2], tol: f64) -> Result<()> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[a].x.total_cmp(&nodes[b].x));
    for (i, &a) in order.iter().enumerate() {
        for &b in order.iter().skip(i + 1) {
            if nodes[b].x - nodes[a].x > tol {
                break;
            }
            if (nodes[a] - nodes[b]).norm() < tol {
                return Err(Error::NonConforming(format!("nodes {a} and {b} coincide")));
            }
        }
    }
    Ok(())
}

/// n x n squares on [0, 1]^2, each split into 4 triangles through its centroid.
pub fn generate_square_mesh(
    n: usize,
    classify: &dyn Fn(Vec2) -> BoundaryCondition,
) -> Result<(Mesh, LoadReport)> {
    generate_rect_mesh(n, n, Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), classify)
}

/// nx x ny squares on an axis-aligned rectangle, four-way split.
pub fn generate_rect_mesh(
    nx: usize,
    ny: usize,
    lo: Vec2,
    hi: Vec2,
    classify: &dyn Fn(Vec2) -> BoundaryCondition,
) -> Result<(Mesh, LoadReport)> {
    assert!(nx >= 1 && ny >= 1);
    let (dx, dy) = ((hi.x - lo.x) / nx as f64, (hi.y - lo.y) / ny as f64);
    let corner = |i: usize, j: usize| i * (ny + 1) + j;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) + nx * ny);
    for i in 0..=nx {
        for j in 0..=ny {
            nodes.push(Vec2::new(lo.x + i as f64 * dx, lo.y + j as f64 * dy));
        }
    }
    let mut triangles = Vec::with_capacity(4 * nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let q = nodes.len();
            nodes.push(Vec2::new(lo.x + (i as f64 + 0.5) * dx, lo.y + (j as f64 + 0.5) * dy));
            let (p00, p10) = (corner(i, j), corner(i + 1, j));
            let (p11, p01) = (corner(i + 1, j + 1), corner(i, j + 1));
            triangles.push([p00, p10, q]);
            triangles.push([p10, p11, q]);
            triangles.push([p11, p01, q]);
            triangles.push([p01, p00, q]);
        }
    }
    Mesh::build(nodes, triangles, classify)
}

/// Triangulated polar wedge. When `r_min` is zero the innermost ring collapses
/// to triangles sharing the origin node. `radial_stretch` > 1 grades the radial
/// spacing geometrically toward the origin.
pub fn generate_wedge_mesh(
    r_min: f64,
    r_max: f64,
    theta_max: f64,
    n_r: usize,
    n_theta: usize,
    radial_stretch: f64,
    classify: &dyn Fn(Vec2) -> BoundaryCondition,
) -> Result<(Mesh, LoadReport)> {
    assert!(r_min >= 0.0 && r_min < r_max);
    assert!(theta_max > 0.0 && theta_max <= std::f64::consts::FRAC_PI_2);
    assert!(n_r >= 1 && n_theta >= 1);
    assert!(radial_stretch > 0.0);

    // Radii r_min = r_0 < ... < r_{n_r} = r_max with geometric spacing.
    let mut radii = Vec::with_capacity(n_r + 1);
    let mut weights = Vec::with_capacity(n_r);
    let mut w = 1.0;
    for _ in 0..n_r {
        weights.push(w);
        w *= radial_stretch;
    }
    let total: f64 = weights.iter().sum();
    let mut r = r_min;
    radii.push(r);
    for wi in &weights {
        r += (r_max - r_min) * wi / total;
        radii.push(r);
    }
    radii[n_r] = r_max;

    let collapse_origin = r_min == 0.0;
    let mut nodes = Vec::new();
    let at = |r: f64, th: f64| Vec2::new(r * th.cos(), r * th.sin());
    let dtheta = theta_max / n_theta as f64;
    let first_ring = if collapse_origin { 1 } else { 0 };
    if collapse_origin {
        nodes.push(Vec2::new(0.0, 0.0));
    }
    // Ring node (i, j): radius index i (first_ring..=n_r), angular index j.
    let ring_node = |i: usize, j: usize| {
        let base = if collapse_origin { 1 } else { 0 };
        base + (i - first_ring) * (n_theta + 1) + j
    };
    for i in first_ring..=n_r {
        for j in 0..=n_theta {
            nodes.push(at(radii[i], j as f64 * dtheta));
        }
    }

    let mut triangles = Vec::new();
    for i in 0..n_r {
        for j in 0..n_theta {
            if i == 0 && collapse_origin {
                triangles.push([0, ring_node(1, j), ring_node(1, j + 1)]);
            } else {
                let a = ring_node(i, j);
                let b = ring_node(i + 1, j);
                let c = ring_node(i + 1, j + 1);
                let d = ring_node(i, j + 1);
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }

    for tri in &triangles {
        let area =
            polygon_signed_area(&[nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]]).abs();
        if area < 1e-14 * r_max * r_max {
            return Err(Error::DegenerateGeometry(format!(
                "wedge triangle area {area:.3e} below tolerance"
            )));
        }
    }
    Mesh::build(nodes, triangles, classify)
}

/// Forward-facing step domain [0,3]x[0,1] minus [0.6,3]x[0.2,1], meshed with
/// squares of side `h` (which must divide 0.6, 0.2, and the remaining spans).
pub fn generate_step_mesh(
    h: f64,
    classify: &dyn Fn(Vec2) -> BoundaryCondition,
) -> Result<(Mesh, LoadReport)> {
    let nx = (3.0 / h).round() as usize;
    let ny = (1.0 / h).round() as usize;
    let sx = (0.6 / h).round() as usize;
    let sy = (0.2 / h).round() as usize;
    assert!((nx as f64 * h - 3.0).abs() < 1e-12 && (ny as f64 * h - 1.0).abs() < 1e-12);
    assert!((sx as f64 * h - 0.6).abs() < 1e-12 && (sy as f64 * h - 0.2).abs() < 1e-12);

    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    let mut node_at = |i: usize, j: usize, nodes: &mut Vec<Vec2>| -> usize {
        *index.entry((i, j)).or_insert_with(|| {
            nodes.push(Vec2::new(i as f64 * h, j as f64 * h));
            nodes.len() - 1
        })
    };
    let mut triangles = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let in_domain = i < sx || j < sy;
            if !in_domain {
                continue;
            }
            let p00 = node_at(i, j, &mut nodes);
            let p10 = node_at(i + 1, j, &mut nodes);
            let p11 = node_at(i + 1, j + 1, &mut nodes);
            let p01 = node_at(i, j + 1, &mut nodes);
            let q = {
                nodes.push(Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
                nodes.len() - 1
            };
            triangles.push([p00, p10, q]);
            triangles.push([p10, p11, q]);
            triangles.push([p11, p01, q]);
            triangles.push([p01, p00, q]);
        }
    }
    Mesh::build(nodes, triangles, classify)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn all_outflow(_: Vec2) -> BoundaryCondition {
        BoundaryCondition::Outflow
    }

    /// Connectivity battery shared by generator and loader tests.
    fn check_invariants(mesh: &Mesh) {
        for (c, tri) in mesh.triangles.iter().enumerate() {
            let a = polygon_signed_area(&[
                mesh.nodes[tri[0]],
                mesh.nodes[tri[1]],
                mesh.nodes[tri[2]],
            ]);
            assert!(a > 0.0, "cell {c} is not CCW");
            assert_abs_diff_eq!(a, mesh.areas[c], epsilon = 1e-14 * a);
        }
        for (fi, f) in mesh.faces.iter().enumerate() {
            assert_eq!(mesh.cell_faces[f.left][f.left_slot], fi);
            let tri = mesh.triangles[f.left];
            assert_eq!(
                [tri[f.left_slot], tri[(f.left_slot + 1) % 3]],
                f.nodes,
                "left traversal must match stored orientation"
            );
            if let FaceRight::Interior { cell, slot, shift } = &f.right {
                assert_eq!(mesh.cell_faces[*cell][*slot], fi);
                let rtri = mesh.triangles[*cell];
                let (ra, rb) = (rtri[*slot], rtri[(*slot + 1) % 3]);
                // Right cell traverses the same segment backwards, possibly
                // across a periodic shift.
                let want_a = mesh.nodes[f.nodes[1]] + shift;
                let want_b = mesh.nodes[f.nodes[0]] + shift;
                assert!((mesh.nodes[ra] - want_a).norm() < 1e-10);
                assert!((mesh.nodes[rb] - want_b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn square_mesh_counts() {
        let (m1, _) = generate_square_mesh(1, &all_outflow).unwrap();
        assert_eq!(m1.n_cells(), 4);
        assert_eq!(m1.nodes.len(), 5);
        let (m5, _) = generate_square_mesh(5, &all_outflow).unwrap();
        assert_eq!(m5.n_cells(), 100);
        let (m3, _) = generate_square_mesh(3, &all_outflow).unwrap();
        assert_eq!(m3.n_cells(), 36);
        assert_eq!(m3.nodes.len(), 16 + 9);
        // Euler characteristic with the outer face counted.
        let v = m3.nodes.len() as i64;
        let e = m3.faces.len() as i64;
        let f = m3.n_cells() as i64 + 1;
        assert_eq!(v - e + f, 2);
        check_invariants(&m3);
        assert_abs_diff_eq!(m3.areas.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn periodic_square_pairs_all_boundary_faces() {
        let classify = |_: Vec2| BoundaryCondition::Periodic;
        let (mut m, _) = generate_square_mesh(3, &classify).unwrap();
        let n_boundary = m.faces.iter().filter(|f| f.is_boundary()).count();
        assert_eq!(n_boundary, 4 * 3);
        let merged = m
            .pair_periodic(&[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)])
            .unwrap();
        assert_eq!(merged, 2 * 3);
        assert!(m.faces.iter().all(|f| !f.is_boundary()));
        check_invariants(&m);
        assert_eq!(m.periodic_node_pairs.len(), 2 * merged);
    }

    #[test]
    fn wedge_mesh_counts_and_area() {
        let (m, _) = generate_wedge_mesh(
            0.0,
            1.0,
            std::f64::consts::FRAC_PI_4,
            1,
            1,
            1.0,
            &all_outflow,
        )
        .unwrap();
        assert_eq!(m.n_cells(), 1);

        // Counts used by the shock-tube benchmarks: n_theta (2 n_r - 1) cells.
        let (sod, _) = generate_wedge_mesh(
            0.0,
            1.0,
            std::f64::consts::FRAC_PI_4,
            12,
            10,
            1.0,
            &all_outflow,
        )
        .unwrap();
        assert_eq!(sod.n_cells(), 10 * (2 * 12 - 1));
        check_invariants(&sod);

        // Triangulated area converges to the sector area from below as the
        // angular resolution grows.
        let sector = std::f64::consts::FRAC_PI_8;
        let mut errs = Vec::new();
        for n_theta in [4, 8, 16] {
            let (m, _) = generate_wedge_mesh(
                0.0,
                1.0,
                std::f64::consts::FRAC_PI_4,
                4,
                n_theta,
                1.0,
                &all_outflow,
            )
            .unwrap();
            errs.push(sector - m.areas.iter().sum::<f64>());
        }
        assert!(errs.iter().all(|&e| e > 0.0));
        assert!(errs[1] < 0.3 * errs[0] && errs[2] < 0.3 * errs[1]);
    }

    #[test]
    fn wedge_stretch_grades_radial_spacing() {
        let (m, _) = generate_wedge_mesh(
            0.0,
            1.0,
            std::f64::consts::FRAC_PI_4,
            6,
            4,
            1.4,
            &all_outflow,
        )
        .unwrap();
        check_invariants(&m);
        assert_abs_diff_eq!(
            m.areas.iter().sum::<f64>(),
            // Sector chord area: n_theta triangles per annulus boundary arc.
            {
                let dth = std::f64::consts::FRAC_PI_4 / 4.0;
                4.0 * 0.5 * dth.sin()
            },
            epsilon = 1e-12
        );
    }

    #[test]
    fn step_mesh_has_reentrant_corner() {
        let (m, _) = generate_step_mesh(0.1, &all_outflow).unwrap();
        assert_eq!(m.n_cells(), 4 * (6 * 10 + 24 * 2));
        check_invariants(&m);
        assert!(m
            .nodes
            .iter()
            .any(|p| (p.x - 0.6).abs() < 1e-12 && (p.y - 0.2).abs() < 1e-12));
        assert_abs_diff_eq!(m.areas.iter().sum::<f64>(), 0.6 + 2.4 * 0.2, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_node_rejected() {
        let nodes = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let tris = vec![[0, 1, 2], [1, 3, 2]];
        match Mesh::build(nodes, tris, &all_outflow) {
            Err(Error::NonConforming(_)) => {}
            other => panic!("expected NonConforming, got {other:?}"),
        }
    }

    #[test]
    fn clockwise_triangle_is_flipped_and_reported() {
        let nodes = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let (m, report) = Mesh::build(nodes, vec![[0, 2, 1]], &all_outflow).unwrap();
        assert_eq!(report.flipped_triangles, 1);
        assert!(m.areas[0] > 0.0);
    }

    #[test]
    fn overused_edge_rejected() {
        let nodes = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ];
        let tris = vec![[0, 1, 2], [1, 3, 2], [0, 2, 4], [0, 1, 4]];
        // Edge (0, 1) belongs to triangle 0 and twice-oriented triangle 3.
        match Mesh::build(nodes, tris, &all_outflow) {
            Err(Error::NonConforming(_)) => {}
            other => panic!("expected NonConforming, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rect_meshes_satisfy_connectivity_battery(nx in 1usize..6, ny in 1usize..6) {
            let (m, report) = generate_rect_mesh(
                nx, ny, Vec2::new(-1.5, 0.25), Vec2::new(2.0, 1.75), &all_outflow,
            ).unwrap();
            prop_assert_eq!(report.flipped_triangles, 0);
            check_invariants(&m);
            let total: f64 = m.areas.iter().sum();
            prop_assert!((total - 3.5 * 1.5).abs() < 1e-12 * total);
            let n_boundary = m.faces.iter().filter(|f| f.is_boundary()).count();
            prop_assert_eq!(n_boundary, 2 * (nx + ny));
        }
    }
}
