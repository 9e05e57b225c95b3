//! Mesh-wide subcell connectivity: physical per-cell geometry, the global
//! graph of subcell faces (cell-interior, cross-cell, domain-boundary), and
//! the neighbor stencils used by admissibility detection.
//!
//! Subcells are numbered globally as `cell * n_sub + m`. Every face stores
//! the side the unit normal leaves as `left`; that side carries sign +1 in
//! flux sums and the other side -1.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{outward_normal, AffineMap, Vec2};
use crate::mesh::{BoundaryCondition, FaceRight, Mesh};
use crate::subdivision::SubcellTopology;

#[derive(Debug, Clone)]
pub struct CellGeometry {
    pub map: AffineMap,
    /// Physical subcell areas, summing to the cell area.
    pub sub_areas: Vec<f64>,
    pub sub_centroids: Vec<Vec2>,
    /// Physical subcell polygon vertices, CCW.
    pub sub_vertices: Vec<Vec<Vec2>>,
    /// Cell characteristic length: area over perimeter.
    pub d_cell: f64,
    /// Smallest subcell characteristic length (area over perimeter).
    pub d_sub_min: f64,
}

/// Where a face's high-order flux value lives in the stage ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerSlot {
    /// Reconstructed flux on a cell-interior subcell face.
    CellInterior { cell: u32, iface: u32 },
    /// Numerical-flux integral over one segment of a shared mesh face.
    CrossSubface { face: u32, seg: u32 },
    /// Numerical-flux integral over a domain-boundary subface.
    BoundarySubface { cell: u32, bsub: u32 },
}

#[derive(Debug, Clone)]
pub enum CorrSide {
    Sub(u32),
    /// Domain boundary: the exterior state comes from the condition applied
    /// to the interior submean.
    Ghost(BoundaryCondition),
}

#[derive(Debug, Clone)]
pub struct CorrFace {
    /// Global subcell id on the side the normal leaves.
    pub left: u32,
    pub right: CorrSide,
    /// Unit normal, left to right.
    pub normal: Vec2,
    pub length: f64,
    /// Physical midpoint on the left cell's side of the face.
    pub midpoint: Vec2,
    pub ledger: LedgerSlot,
}

#[derive(Debug, Clone)]
pub struct GlobalTopology {
    pub n_cells: usize,
    pub n_sub: usize,
    /// Subfaces per parent triangle edge.
    pub n_seg: usize,
    pub geom: Vec<CellGeometry>,
    pub corr_faces: Vec<CorrFace>,
    /// Per global subcell: incident faces with the subcell's sign.
    pub sub_faces: Vec<Vec<(u32, i8)>>,
    /// Per cell: cells of the cell-wise DMP stencil (self plus face
    /// neighbors), deduplicated.
    pub linear_stencil: Vec<Vec<u32>>,
    /// Per global subcell: vertex-sharing subcells including itself.
    pub nonlinear_stencil: Vec<Vec<u32>>,
    /// Per global subcell, per polygon vertex: the other subcells sharing
    /// that vertex, each with the rank of its own coincident polygon vertex.
    /// Periodic images are identified; evaluating a sharer's fields at its own
    /// vertex copy keeps positions consistent across the periodic wrap.
    pub sub_vertex_sharers: Vec<Vec<Vec<(u32, u8)>>>,
    /// Per cell, per corner: the other cells sharing that mesh node, each
    /// with the rank of its own coincident corner.
    pub cell_vertex_sharers: Vec<[Vec<(u32, u8)>; 3]>,
    /// Boundary condition per cell edge, None on interior edges.
    pub cell_edge_bc: Vec<[Option<BoundaryCondition>; 3]>,
}

impl GlobalTopology {
    pub fn n_subcells(&self) -> usize {
        self.n_cells * self.n_sub
    }

    pub fn subcell_id(&self, cell: usize, m: usize) -> u32 {
        (cell * self.n_sub + m) as u32
    }

    pub fn cell_of(&self, sub: u32) -> usize {
        sub as usize / self.n_sub
    }

    pub fn local_of(&self, sub: u32) -> usize {
        sub as usize % self.n_sub
    }
}

/// Registry of physical points identified up to a snap tolerance and the
/// periodic shifts of the mesh.
struct PointRegistry {
    tol: f64,
    buckets: HashMap<(i64, i64), Vec<u32>>,
    points: Vec<Vec2>,
    parent: Vec<u32>,
}

impl PointRegistry {
    fn new(tol: f64) -> Self {
        PointRegistry { tol, buckets: HashMap::new(), points: Vec::new(), parent: Vec::new() }
    }

    fn key(&self, p: Vec2) -> (i64, i64) {
        ((p.x / self.tol).round() as i64, (p.y / self.tol).round() as i64)
    }

    fn find(&self, p: Vec2) -> Option<u32> {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        if (self.points[id as usize] - p).norm() <= self.tol {
                            return Some(id);
                        }
                    }
                }
            }
        }
        None
    }

    fn find_or_insert(&mut self, p: Vec2) -> u32 {
        if let Some(id) = self.find(p) {
            return id;
        }
        let id = self.points.len() as u32;
        self.points.push(p);
        self.parent.push(id);
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
        id
    }

    fn root(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let gp = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = gp;
            i = gp;
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra != rb {
            self.parent[rb as usize] = ra;
        }
    }
}

pub fn build_topology(mesh: &Mesh, topo: &SubcellTopology) -> Result<GlobalTopology> {
    let n_cells = mesh.triangles.len();
    let n_sub = topo.n_sub;
    let n_seg = topo.edge_cuts.len() - 1;
    let n_total = n_cells * n_sub;

    let mut geom = Vec::with_capacity(n_cells);
    for (c, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, d] = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let map = AffineMap::from_triangle(a, b, d);
        let area = mesh.areas[c];
        let mut sub_areas = Vec::with_capacity(n_sub);
        let mut sub_centroids = Vec::with_capacity(n_sub);
        let mut sub_vertices = Vec::with_capacity(n_sub);
        let mut d_sub_min = f64::INFINITY;
        for m in 0..n_sub {
            let poly: Vec<Vec2> = topo.polygons[m].iter().map(|&p| map.apply(p)).collect();
            let s_area = topo.area_fractions[m] * area;
            let mut perim = 0.0;
            for i in 0..poly.len() {
                perim += (poly[(i + 1) % poly.len()] - poly[i]).norm();
            }
            d_sub_min = d_sub_min.min(s_area / perim);
            sub_areas.push(s_area);
            sub_centroids.push(map.apply(topo.centroids[m]));
            sub_vertices.push(poly);
        }
        let perim = (b - a).norm() + (d - b).norm() + (a - d).norm();
        geom.push(CellGeometry {
            map,
            sub_areas,
            sub_centroids,
            sub_vertices,
            d_cell: area / perim,
            d_sub_min,
        });
    }

    let mut corr_faces: Vec<CorrFace> = Vec::new();
    let mut sub_faces: Vec<Vec<(u32, i8)>> = vec![Vec::new(); n_total];
    let push_face = |faces: &mut Vec<CorrFace>, subs: &mut Vec<Vec<(u32, i8)>>, f: CorrFace| {
        let id = faces.len() as u32;
        subs[f.left as usize].push((id, 1));
        if let CorrSide::Sub(r) = f.right {
            subs[r as usize].push((id, -1));
        }
        faces.push(f);
    };

    for c in 0..n_cells {
        let map = &geom[c].map;
        for (i, iface) in topo.interior_faces.iter().enumerate() {
            let a = map.apply(iface.a);
            let b = map.apply(iface.b);
            push_face(&mut corr_faces, &mut sub_faces, CorrFace {
                left: (c * n_sub + iface.sub_left) as u32,
                right: CorrSide::Sub((c * n_sub + iface.sub_right) as u32),
                normal: outward_normal(a, b),
                length: (b - a).norm(),
                midpoint: 0.5 * (a + b),
                ledger: LedgerSlot::CellInterior { cell: c as u32, iface: i as u32 },
            });
        }
    }

    let mut cell_edge_bc: Vec<[Option<BoundaryCondition>; 3]> = vec![Default::default(); n_cells];
    for (fid, face) in mesh.faces.iter().enumerate() {
        let cl = face.left;
        let el = face.left_slot;
        match &face.right {
            FaceRight::Interior { cell: cr, slot: er, .. } => {
                for seg in 0..n_seg {
                    let bl = &topo.boundary_subfaces[topo.edge_subfaces[el][seg]];
                    let br = &topo.boundary_subfaces[topo.edge_subfaces[*er][n_seg - 1 - seg]];
                    debug_assert!((bl.t0 - (1.0 - br.t1)).abs() < 1e-12);
                    let map = &geom[cl].map;
                    let a = map.apply(bl.a);
                    let b = map.apply(bl.b);
                    push_face(&mut corr_faces, &mut sub_faces, CorrFace {
                        left: (cl * n_sub + bl.sub) as u32,
                        right: CorrSide::Sub((cr * n_sub + br.sub) as u32),
                        normal: outward_normal(a, b),
                        length: (b - a).norm(),
                        midpoint: 0.5 * (a + b),
                        ledger: LedgerSlot::CrossSubface { face: fid as u32, seg: seg as u32 },
                    });
                }
            }
            FaceRight::Boundary(bc) => {
                if cell_edge_bc[cl][el].is_some() {
                    return Err(Error::NonConforming(format!(
                        "cell {cl} edge {el} carries two boundary faces"
                    )));
                }
                cell_edge_bc[cl][el] = Some(bc.clone());
                for seg in 0..n_seg {
                    let bsub = topo.edge_subfaces[el][seg];
                    let bf = &topo.boundary_subfaces[bsub];
                    let map = &geom[cl].map;
                    let a = map.apply(bf.a);
                    let b = map.apply(bf.b);
                    push_face(&mut corr_faces, &mut sub_faces, CorrFace {
                        left: (cl * n_sub + bf.sub) as u32,
                        right: CorrSide::Ghost(bc.clone()),
                        normal: outward_normal(a, b),
                        length: (b - a).norm(),
                        midpoint: 0.5 * (a + b),
                        ledger: LedgerSlot::BoundarySubface { cell: cl as u32, bsub: bsub as u32 },
                    });
                }
            }
        }
    }

    let mut linear_stencil: Vec<Vec<u32>> = (0..n_cells).map(|c| vec![c as u32]).collect();
    for face in &mesh.faces {
        if let FaceRight::Interior { cell: cr, .. } = face.right {
            linear_stencil[face.left].push(cr as u32);
            linear_stencil[cr].push(face.left as u32);
        }
    }
    for s in &mut linear_stencil {
        s.sort_unstable();
        s.dedup();
    }

    // Vertex registry over all physical subcell corners, with periodic
    // images unified through the mesh's shift vectors.
    let scale = mesh
        .nodes
        .iter()
        .fold(0f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
        .max(1.0);
    let mut shifts: Vec<Vec2> = Vec::new();
    for face in &mesh.faces {
        if let FaceRight::Interior { shift, .. } = face.right {
            if shift.norm() > 1e-12 * scale
                && !shifts.iter().any(|s| (s - shift).norm() < 1e-12 * scale)
            {
                shifts.push(shift);
            }
        }
    }
    let mut reg = PointRegistry::new(1e-8 * scale);
    let mut sub_corner_ids: Vec<Vec<u32>> = Vec::with_capacity(n_total);
    for c in 0..n_cells {
        for m in 0..n_sub {
            let ids = geom[c].sub_vertices[m].iter().map(|&p| reg.find_or_insert(p)).collect();
            sub_corner_ids.push(ids);
        }
    }
    let n_pts = reg.points.len();
    for i in 0..n_pts {
        let p = reg.points[i];
        for s in &shifts {
            for q in [p + s, p - s] {
                if let Some(j) = reg.find(q) {
                    reg.union(i as u32, j);
                }
            }
        }
    }
    let mut sharers: HashMap<u32, Vec<(u32, u8)>> = HashMap::new();
    let mut sub_corner_roots: Vec<Vec<u32>> = Vec::with_capacity(n_total);
    for (s, ids) in sub_corner_ids.iter().enumerate() {
        let roots: Vec<u32> = ids.iter().map(|&i| reg.root(i)).collect();
        for (vi, &r) in roots.iter().enumerate() {
            sharers.entry(r).or_default().push((s as u32, vi as u8));
        }
        sub_corner_roots.push(roots);
    }

    let mut nonlinear_stencil = Vec::with_capacity(n_total);
    let mut sub_vertex_sharers = Vec::with_capacity(n_total);
    for s in 0..n_total {
        let mut stencil: Vec<u32> = vec![s as u32];
        let mut per_vertex = Vec::with_capacity(sub_corner_roots[s].len());
        for &r in &sub_corner_roots[s] {
            let list = &sharers[&r];
            stencil.extend(list.iter().map(|&(q, _)| q));
            per_vertex.push(list.iter().copied().filter(|&(q, _)| q != s as u32).collect());
        }
        stencil.sort_unstable();
        stencil.dedup();
        nonlinear_stencil.push(stencil);
        sub_vertex_sharers.push(per_vertex);
    }

    // Mesh-node sharing for the cell-level smooth-extrema envelope, with
    // periodic node pairs identified.
    let n_nodes = mesh.nodes.len();
    let mut node_parent: Vec<usize> = (0..n_nodes).collect();
    fn node_root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(a, b) in &mesh.periodic_node_pairs {
        let (ra, rb) = (node_root(&mut node_parent, a), node_root(&mut node_parent, b));
        if ra != rb {
            node_parent[rb] = ra;
        }
    }
    let mut node_cell_sets: HashMap<usize, Vec<(u32, u8)>> = HashMap::new();
    for (c, tri) in mesh.triangles.iter().enumerate() {
        for (v, &node) in tri.iter().enumerate() {
            node_cell_sets
                .entry(node_root(&mut node_parent, node))
                .or_default()
                .push((c as u32, v as u8));
        }
    }
    let mut cell_vertex_sharers: Vec<[Vec<(u32, u8)>; 3]> = vec![Default::default(); n_cells];
    for (c, tri) in mesh.triangles.iter().enumerate() {
        for (v, &node) in tri.iter().enumerate() {
            let root = node_root(&mut node_parent, node);
            cell_vertex_sharers[c][v] = node_cell_sets[&root]
                .iter()
                .copied()
                .filter(|&(q, _)| q != c as u32)
                .collect();
        }
    }

    Ok(GlobalTopology {
        n_cells,
        n_sub,
        n_seg,
        geom,
        corr_faces,
        sub_faces,
        linear_stencil,
        nonlinear_stencil,
        sub_vertex_sharers,
        cell_vertex_sharers,
        cell_edge_bc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_square_mesh;
    use crate::subdivision::{build_subdivision, SchemeKind, SubdivisionScheme};
    use approx::assert_abs_diff_eq;

    fn outflow(_: Vec2) -> BoundaryCondition {
        BoundaryCondition::Outflow
    }

    fn two_triangle_mesh() -> Mesh {
        let nodes = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let tris = vec![[0, 1, 2], [0, 2, 3]];
        Mesh::build(nodes, tris, &outflow).unwrap().0
    }

    #[test]
    fn face_counts_on_a_two_cell_square() {
        let mesh = two_triangle_mesh();
        let topo =
            build_subdivision(SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 1 })
                .unwrap();
        let g = build_topology(&mesh, &topo).unwrap();
        assert_eq!(g.n_seg, 2);
        let n_interior = g
            .corr_faces
            .iter()
            .filter(|f| matches!(f.ledger, LedgerSlot::CellInterior { .. }))
            .count();
        let n_cross = g
            .corr_faces
            .iter()
            .filter(|f| matches!(f.ledger, LedgerSlot::CrossSubface { .. }))
            .count();
        let n_ghost = g
            .corr_faces
            .iter()
            .filter(|f| matches!(f.ledger, LedgerSlot::BoundarySubface { .. }))
            .count();
        assert_eq!(n_interior, 2 * 2);
        assert_eq!(n_cross, 2);
        assert_eq!(n_ghost, 4 * 2);
        assert_eq!(g.n_subcells(), 6);
        // Every subcell's faces tile its polygon boundary: signed lengths
        // match the mapped polygon perimeter.
        for s in 0..g.n_subcells() {
            let c = g.cell_of(s as u32);
            let m = g.local_of(s as u32);
            let poly = &g.geom[c].sub_vertices[m];
            let perim: f64 =
                (0..poly.len()).map(|i| (poly[(i + 1) % poly.len()] - poly[i]).norm()).sum();
            let covered: f64 = g.sub_faces[s].iter().map(|&(f, _)| g.corr_faces[f as usize].length).sum();
            assert_abs_diff_eq!(covered, perim, epsilon = 1e-12);
        }
    }

    #[test]
    fn cross_subfaces_match_geometrically() {
        let mesh = generate_square_mesh(3, &outflow).unwrap().0;
        let topo =
            build_subdivision(SubdivisionScheme { kind: SchemeKind::StructuredGaussLobatto, k: 3 })
                .unwrap();
        let g = build_topology(&mesh, &topo).unwrap();
        let mut checked = 0;
        for f in &g.corr_faces {
            let (fid, seg) = match f.ledger {
                LedgerSlot::CrossSubface { face, seg } => (face as usize, seg as usize),
                _ => continue,
            };
            let face = &mesh.faces[fid];
            let (cr, er) = match face.right {
                FaceRight::Interior { cell, slot, .. } => (cell, slot),
                _ => unreachable!(),
            };
            let br = &topo.boundary_subfaces[topo.edge_subfaces[er][g.n_seg - 1 - seg]];
            let a_r = g.geom[cr].map.apply(br.a);
            let b_r = g.geom[cr].map.apply(br.b);
            // The right cell traverses the same physical segment backwards.
            let left_cell = g.cell_of(f.left);
            let bl = topo
                .edge_subfaces
                .iter()
                .flatten()
                .map(|&i| &topo.boundary_subfaces[i])
                .find(|b| {
                    (g.geom[left_cell].map.apply(b.a) - b_r).norm() < 1e-11
                        && (g.geom[left_cell].map.apply(b.b) - a_r).norm() < 1e-11
                });
            assert!(bl.is_some(), "cross subface endpoints do not match reversed");
            assert_abs_diff_eq!(f.length, (b_r - a_r).norm(), epsilon = 1e-12);
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn periodic_square_has_no_ghost_faces_and_wrapped_sharers() {
        let (mut mesh, _) = generate_square_mesh(2, &|_| BoundaryCondition::Periodic).unwrap();
        mesh.pair_periodic(&[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        let topo =
            build_subdivision(SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 2 })
                .unwrap();
        let g = build_topology(&mesh, &topo).unwrap();
        assert!(g
            .corr_faces
            .iter()
            .all(|f| !matches!(f.ledger, LedgerSlot::BoundarySubface { .. })));
        // A subcell with a corner at the domain corner must see sharers from
        // cells touching the other three corners.
        let corner_sub = (0..g.n_subcells())
            .find(|&s| {
                let c = g.cell_of(s as u32);
                let m = g.local_of(s as u32);
                g.geom[c].sub_vertices[m].iter().any(|p| p.norm() < 1e-12)
            })
            .expect("some subcell touches the origin");
        let stencil = &g.nonlinear_stencil[corner_sub];
        let touches_far_corner = stencil.iter().any(|&q| {
            let c = g.cell_of(q);
            let m = g.local_of(q);
            g.geom[c].sub_vertices[m]
                .iter()
                .any(|p| (p - Vec2::new(1.0, 1.0)).norm() < 1e-12)
        });
        assert!(touches_far_corner, "periodic corner identification missing");
        // Cell-wise stencil on a fully periodic mesh: self + 3 face neighbors.
        for s in &g.linear_stencil {
            assert_eq!(s.len(), 4);
        }
    }

    #[test]
    fn nonlinear_stencil_contains_self_and_face_neighbors() {
        let mesh = generate_square_mesh(3, &outflow).unwrap().0;
        let topo =
            build_subdivision(SubdivisionScheme { kind: SchemeKind::VoronoiUniform, k: 2 })
                .unwrap();
        let g = build_topology(&mesh, &topo).unwrap();
        for s in 0..g.n_subcells() as u32 {
            assert!(g.nonlinear_stencil[s as usize].contains(&s));
            for &(f, _) in &g.sub_faces[s as usize] {
                let face = &g.corr_faces[f as usize];
                let other = match (face.left, &face.right) {
                    (l, CorrSide::Sub(r)) if l == s => Some(*r),
                    (l, CorrSide::Sub(_)) if l != s => Some(face.left),
                    _ => None,
                };
                if let Some(o) = other {
                    let o = if o == s {
                        match face.right {
                            CorrSide::Sub(r) => r,
                            _ => unreachable!(),
                        }
                    } else {
                        o
                    };
                    assert!(
                        g.nonlinear_stencil[s as usize].contains(&o),
                        "face neighbor missing from vertex stencil"
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_conditions_attach_to_cell_edges() {
        let classify = |p: Vec2| {
            if p.x < 1e-12 {
                BoundaryCondition::Inflow(vec![2.0])
            } else {
                BoundaryCondition::Outflow
            }
        };
        let mesh = generate_square_mesh(2, &classify).unwrap().0;
        let topo =
            build_subdivision(SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 1 })
                .unwrap();
        let g = build_topology(&mesh, &topo).unwrap();
        let mut inflow_edges = 0;
        for c in 0..g.n_cells {
            for e in 0..3 {
                if let Some(BoundaryCondition::Inflow(state)) = &g.cell_edge_bc[c][e] {
                    assert_eq!(state, &vec![2.0]);
                    inflow_edges += 1;
                }
            }
        }
        assert_eq!(inflow_edges, 2);
    }

    #[test]
    fn subcell_face_signs_balance() {
        let mesh = two_triangle_mesh();
        let topo =
            build_subdivision(SubdivisionScheme { kind: SchemeKind::VoronoiLagrangeMid, k: 2 })
                .unwrap();
        let g = build_topology(&mesh, &topo).unwrap();
        for (fid, face) in g.corr_faces.iter().enumerate() {
            let left_entry = g.sub_faces[face.left as usize]
                .iter()
                .find(|&&(f, _)| f == fid as u32)
                .unwrap();
            assert_eq!(left_entry.1, 1);
            if let CorrSide::Sub(r) = face.right {
                let right_entry =
                    g.sub_faces[r as usize].iter().find(|&&(f, _)| f == fid as u32).unwrap();
                assert_eq!(right_entry.1, -1);
            }
        }
    }
}
