//! Partition of the reference triangle into N_k = (k+1)(k+2)/2 subcells, with
//! oriented interior faces and boundary subfaces.
//!
//! Two families are supported. Structured subdivisions cut the triangle by
//! lines parallel to the two legs through a point set on [0, 1] (equidistant
//! or Gauss-Lobatto), producing one quadrilateral corner subcell at the first
//! reference vertex, quadrilateral interior subcells, and triangular subcells
//! along the hypotenuse. Polygonal subdivisions take the median dual of the
//! degree-k Lagrange lattice: each subcell surrounds one lattice node and is
//! bounded by segments joining lattice-edge midpoints to lattice-triangle
//! centroids, closed along the triangle boundary through edge cut points.
//!
//! All three reference edges carry the same symmetric cut parameter set, so a
//! neighboring cell's subfaces match across any primal face regardless of the
//! relative rotation of the two cells' reference frames.

use crate::error::{Error, Result};
use crate::geometry::{outward_normal, polygon_centroid, polygon_signed_area, Vec2};
use crate::quadrature::gauss_lobatto;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    StructuredUniform,
    StructuredGaussLobatto,
    VoronoiUniform,
    VoronoiLagrangeMid,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::StructuredUniform,
        SchemeKind::StructuredGaussLobatto,
        SchemeKind::VoronoiUniform,
        SchemeKind::VoronoiLagrangeMid,
    ];

    pub fn max_order(self) -> usize {
        match self {
            SchemeKind::StructuredUniform | SchemeKind::StructuredGaussLobatto => 5,
            SchemeKind::VoronoiUniform | SchemeKind::VoronoiLagrangeMid => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::StructuredUniform => "structured-uniform",
            SchemeKind::StructuredGaussLobatto => "structured-gauss-lobatto",
            SchemeKind::VoronoiUniform => "voronoi-uniform",
            SchemeKind::VoronoiLagrangeMid => "voronoi-lagrange-mid",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown subdivision scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubdivisionScheme {
    pub kind: SchemeKind,
    pub k: usize,
}

/// Interior subcell face, stored once: the stored normal points from
/// `sub_left` to `sub_right`, so the incidence sign is +1 for the left subcell
/// and -1 for the right one.
#[derive(Debug, Clone)]
pub struct InteriorFace {
    pub sub_left: usize,
    pub sub_right: usize,
    /// Endpoints, ordered so `sub_left` traverses a -> b counter-clockwise.
    pub a: Vec2,
    pub b: Vec2,
    pub length: f64,
    pub normal: Vec2,
}

/// Portion of a reference-triangle edge owned by one subcell.
#[derive(Debug, Clone)]
pub struct BoundarySubface {
    pub sub: usize,
    /// Reference edge index: 0 joins vertices 0-1, 1 joins 1-2, 2 joins 2-0.
    pub parent_edge: usize,
    pub a: Vec2,
    pub b: Vec2,
    /// Parameter range along the parent edge's counter-clockwise traversal.
    pub t0: f64,
    pub t1: f64,
    pub length: f64,
    pub normal: Vec2,
}

#[derive(Debug, Clone)]
pub struct SubcellTopology {
    pub scheme: SubdivisionScheme,
    pub n_sub: usize,
    /// Simple CCW vertex loops on the reference triangle.
    pub polygons: Vec<Vec<Vec2>>,
    /// |S_m| / |reference triangle|; sums to 1.
    pub area_fractions: Vec<f64>,
    /// Plain reference areas; sums to 1/2.
    pub ref_areas: Vec<f64>,
    pub centroids: Vec<Vec2>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_subfaces: Vec<BoundarySubface>,
    /// Cut parameters per reference edge, ascending, including 0 and 1.
    /// Identical for the three edges and symmetric under t -> 1 - t.
    pub edge_cuts: Vec<f64>,
    /// Boundary subface indices ordered by parameter along each edge.
    pub edge_subfaces: [Vec<usize>; 3],
}

impl SubcellTopology {
    pub fn count_interior_faces(&self) -> usize {
        self.interior_faces.len()
    }
}

/// Number of subcells (and of polynomial modes) at order k.
pub fn n_subcells(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

pub fn build_subdivision(scheme: SubdivisionScheme) -> Result<SubcellTopology> {
    let k = scheme.k;
    if k > scheme.kind.max_order() {
        return Err(Error::UnsupportedOrder { k, context: scheme.kind.name().into() });
    }
    let polygons = if k == 0 {
        vec![vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]]
    } else {
        match scheme.kind {
            SchemeKind::StructuredUniform => {
                let pts: Vec<f64> = (0..=k + 1).map(|i| i as f64 / (k + 1) as f64).collect();
                structured_polygons(k, &pts)
            }
            SchemeKind::StructuredGaussLobatto => structured_polygons(k, &gauss_lobatto(k + 2)),
            SchemeKind::VoronoiUniform => voronoi_polygons(k, true),
            SchemeKind::VoronoiLagrangeMid => voronoi_polygons(k, false),
        }
    };
    assemble(scheme, polygons)
}

/// Strip subdivision from a sorted point set containing exactly 0 and 1.
/// Cell (i, j) spans [p_i, p_{i+1}] x [p_j, p_{j+1}]; cells on the diagonal
/// i + j = k are triangles because symmetric point sets put the clipped
/// corner edge exactly on the hypotenuse.
fn structured_polygons(k: usize, pts: &[f64]) -> Vec<Vec<Vec2>> {
    let mut polys = Vec::with_capacity(n_subcells(k));
    for i in 0..=k {
        for j in 0..=(k - i) {
            let (s0, s1) = (pts[i], pts[i + 1]);
            let (t0, t1) = (pts[j], pts[j + 1]);
            if i + j < k {
                polys.push(vec![
                    Vec2::new(s0, t0),
                    Vec2::new(s1, t0),
                    Vec2::new(s1, t1),
                    Vec2::new(s0, t1),
                ]);
            } else {
                polys.push(vec![Vec2::new(s0, t0), Vec2::new(s1, t0), Vec2::new(s0, t1)]);
            }
        }
    }
    polys
}

/// Median-dual subdivision around the degree-k Lagrange lattice.
fn voronoi_polygons(k: usize, uniform_boundary: bool) -> Vec<Vec<Vec2>> {
    let kf = k as f64;
    // Lattice nodes ordered by (i + j, j): deterministic subcell numbering.
    let mut lattice: Vec<(usize, usize)> = Vec::new();
    for i in 0..=k {
        for j in 0..=(k - i) {
            lattice.push((i, j));
        }
    }
    lattice.sort_by_key(|&(i, j)| (i + j, j));
    let pos = |&(i, j): &(usize, usize)| Vec2::new(i as f64 / kf, j as f64 / kf);

    // Lattice triangulation: upward and downward triangles.
    let mut tris: Vec<[(usize, usize); 3]> = Vec::new();
    for i in 0..k {
        for j in 0..(k - i) {
            tris.push([(i, j), (i + 1, j), (i, j + 1)]);
            if i + j + 2 <= k {
                tris.push([(i + 1, j), (i + 1, j + 1), (i, j + 1)]);
            }
        }
    }

    // Reference edge carrying a boundary lattice edge, if any.
    let boundary_edge = |a: (usize, usize), b: (usize, usize)| -> Option<usize> {
        if a.1 == 0 && b.1 == 0 {
            Some(0)
        } else if a.0 + a.1 == k && b.0 + b.1 == k {
            Some(1)
        } else if a.0 == 0 && b.0 == 0 {
            Some(2)
        } else {
            None
        }
    };
    let edge_param = |e: usize, n: (usize, usize)| -> f64 {
        match e {
            0 => n.0 as f64 / kf,
            1 => n.1 as f64 / kf,
            _ => 1.0 - n.1 as f64 / kf,
        }
    };
    let edge_point = |e: usize, t: f64| -> Vec2 {
        match e {
            0 => Vec2::new(t, 0.0),
            1 => Vec2::new(1.0 - t, t),
            _ => Vec2::new(0.0, 1.0 - t),
        }
    };
    // Point where the subcell boundary crosses the reference edge between two
    // adjacent boundary lattice nodes.
    let boundary_cut = |a: (usize, usize), b: (usize, usize)| -> Vec2 {
        let e = boundary_edge(a, b).expect("cut requested off the boundary");
        let (ta, tb) = (edge_param(e, a), edge_param(e, b));
        let lo = ta.min(tb);
        let t = if uniform_boundary {
            let s = (lo * kf).round();
            (s + 1.0) / (kf + 1.0)
        } else {
            0.5 * (ta + tb)
        };
        edge_point(e, t)
    };

    let mut polys = Vec::with_capacity(lattice.len());
    for &p in &lattice {
        // One piece per adjacent lattice triangle: entry point on edge (p, q0),
        // centroid, exit point on edge (p, q1).
        struct Piece {
            q: [(usize, usize); 2],
            pt: [Vec2; 2],
            centroid: Vec2,
        }
        let mut pieces: Vec<Piece> = Vec::new();
        for t in &tris {
            if !t.contains(&p) {
                continue;
            }
            let others: Vec<(usize, usize)> = t.iter().copied().filter(|&q| q != p).collect();
            let centroid = (pos(&t[0]) + pos(&t[1]) + pos(&t[2])) / 3.0;
            let cut = |q: (usize, usize)| -> Vec2 {
                if boundary_edge(p, q).is_some() {
                    boundary_cut(p, q)
                } else {
                    0.5 * (pos(&p) + pos(&q))
                }
            };
            pieces.push(Piece {
                q: [others[0], others[1]],
                pt: [cut(others[0]), cut(others[1])],
                centroid,
            });
        }

        // Chain pieces through shared neighbor nodes. A boundary node yields an
        // open chain (closed through the node); an interior node a cycle.
        let mut count: std::collections::BTreeMap<(usize, usize), usize> =
            std::collections::BTreeMap::new();
        for pc in &pieces {
            for q in pc.q {
                *count.entry(q).or_insert(0) += 1;
            }
        }
        let start = count
            .iter()
            .find(|(_, &c)| c == 1)
            .map(|(&q, _)| q)
            .unwrap_or(pieces[0].q[0]);
        let open_chain = count.values().any(|&c| c == 1);

        let mut used = vec![false; pieces.len()];
        let mut loop_pts: Vec<Vec2> = Vec::new();
        let mut q = start;
        loop {
            let Some(idx) = pieces
                .iter()
                .enumerate()
                .position(|(i, pc)| !used[i] && (pc.q[0] == q || pc.q[1] == q))
            else {
                break;
            };
            used[idx] = true;
            let pc = &pieces[idx];
            let (entry, qn) = if pc.q[0] == q {
                (pc.pt[0], pc.q[1])
            } else {
                (pc.pt[1], pc.q[0])
            };
            loop_pts.push(entry);
            loop_pts.push(pc.centroid);
            q = qn;
            if q == start {
                break;
            }
        }
        if open_chain {
            // Final exit point onto the boundary, then the lattice node itself.
            let pc = pieces
                .iter()
                .zip(&used)
                .find(|(pc, &u)| u && (pc.q[0] == q || pc.q[1] == q))
                .map(|(pc, _)| pc)
                .expect("open chain ends at a used piece");
            let exit = if pc.q[0] == q { pc.pt[0] } else { pc.pt[1] };
            loop_pts.push(exit);
            loop_pts.push(pos(&p));
        }

        let mut out: Vec<Vec2> = Vec::new();
        for pt in loop_pts {
            if out.last().map_or(true, |l| (pt - l).norm() > 1e-14) {
                out.push(pt);
            }
        }
        if (out[0] - out[out.len() - 1]).norm() < 1e-14 {
            out.pop();
        }
        if polygon_signed_area(&out) < 0.0 {
            out.reverse();
        }
        polys.push(out);
    }
    polys
}

/// Derives faces, areas, and edge coverage from the subcell polygons, then
/// checks every topology invariant.
fn assemble(scheme: SubdivisionScheme, polygons: Vec<Vec<Vec2>>) -> Result<SubcellTopology> {
    let n_sub = polygons.len();
    let tol = 1e-12;

    let mut ref_areas = Vec::with_capacity(n_sub);
    let mut centroids = Vec::with_capacity(n_sub);
    for (m, poly) in polygons.iter().enumerate() {
        let a = polygon_signed_area(poly);
        if a < 1e-13 {
            return Err(Error::DegenerateSubcell(format!(
                "subcell {m} of {} k={} has area {a:.3e}",
                scheme.kind.name(),
                scheme.k
            )));
        }
        ref_areas.push(a);
        centroids.push(polygon_centroid(poly));
    }
    let total: f64 = ref_areas.iter().sum();
    if (total - 0.5).abs() > tol {
        return Err(Error::DegenerateSubcell(format!(
            "subcell areas sum to {total:.15} instead of 1/2"
        )));
    }
    let area_fractions: Vec<f64> = ref_areas.iter().map(|a| a * 2.0).collect();

    // Snap polygon vertices onto a shared point registry.
    let mut registry: Vec<Vec2> = Vec::new();
    let mut loops: Vec<Vec<usize>> = Vec::new();
    for poly in &polygons {
        let mut idx_loop = Vec::with_capacity(poly.len());
        for &p in poly {
            let id = registry
                .iter()
                .position(|&r| (r - p).norm() < tol)
                .unwrap_or_else(|| {
                    registry.push(p);
                    registry.len() - 1
                });
            idx_loop.push(id);
        }
        loops.push(idx_loop);
    }

    // Directed polygon edges; shared undirected edges become interior faces.
    let mut edge_use: std::collections::BTreeMap<(usize, usize), Vec<(usize, usize, usize)>> =
        std::collections::BTreeMap::new();
    for (m, lp) in loops.iter().enumerate() {
        for e in 0..lp.len() {
            let (a, b) = (lp[e], lp[(e + 1) % lp.len()]);
            edge_use.entry((a.min(b), a.max(b))).or_default().push((m, a, b));
        }
    }

    let mut interior_faces = Vec::new();
    let mut boundary_subfaces: Vec<BoundarySubface> = Vec::new();
    for (key, users) in &edge_use {
        match users[..] {
            [(m, a, b)] => {
                let (pa, pb) = (registry[a], registry[b]);
                let (edge, ta, tb) = classify_boundary_segment(pa, pb, tol).ok_or_else(|| {
                    Error::DegenerateSubcell(format!(
                        "unmatched interior segment ({pa:?} -> {pb:?}) of subcell {m}"
                    ))
                })?;
                if ta >= tb {
                    return Err(Error::DegenerateSubcell(format!(
                        "subcell {m} traverses boundary edge {edge} against orientation"
                    )));
                }
                boundary_subfaces.push(BoundarySubface {
                    sub: m,
                    parent_edge: edge,
                    a: pa,
                    b: pb,
                    t0: ta,
                    t1: tb,
                    length: (pb - pa).norm(),
                    normal: outward_normal(pa, pb),
                });
            }
            [(m, a, b), (p, c, d)] => {
                if (a, b) != (d, c) {
                    return Err(Error::DegenerateSubcell(format!(
                        "subcells {m} and {p} traverse a shared segment in the same direction"
                    )));
                }
                let (pa, pb) = (registry[a], registry[b]);
                interior_faces.push(InteriorFace {
                    sub_left: m,
                    sub_right: p,
                    a: pa,
                    b: pb,
                    length: (pb - pa).norm(),
                    normal: outward_normal(pa, pb),
                });
            }
            _ => {
                return Err(Error::DegenerateSubcell(format!(
                    "segment between registry points {key:?} used {} times",
                    users.len()
                )));
            }
        }
    }

    // Interior adjacency graph must be connected for the Laplacian inversion.
    let mut seen = vec![false; n_sub];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(m) = stack.pop() {
        for f in &interior_faces {
            for (x, y) in [(f.sub_left, f.sub_right), (f.sub_right, f.sub_left)] {
                if x == m && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::DisconnectedGraph(format!(
            "{} k={} subcell graph is disconnected",
            scheme.kind.name(),
            scheme.k
        )));
    }

    // Edge coverage: subfaces per edge tile [0, 1]; the three edges share one
    // symmetric cut set, which is what makes cross-cell matching rotation-proof.
    let mut edge_subfaces: [Vec<usize>; 3] = Default::default();
    for (i, bf) in boundary_subfaces.iter().enumerate() {
        edge_subfaces[bf.parent_edge].push(i);
    }
    let mut cut_sets: Vec<Vec<f64>> = Vec::new();
    for edge in 0..3 {
        edge_subfaces[edge].sort_by(|&x, &y| {
            boundary_subfaces[x].t0.total_cmp(&boundary_subfaces[y].t0)
        });
        let mut cuts = vec![0.0];
        let mut t = 0.0;
        for &i in &edge_subfaces[edge] {
            let bf = &boundary_subfaces[i];
            if (bf.t0 - t).abs() > tol {
                return Err(Error::DegenerateSubcell(format!(
                    "edge {edge} has a gap at parameter {t}"
                )));
            }
            t = bf.t1;
            cuts.push(t);
        }
        if (t - 1.0).abs() > tol {
            return Err(Error::DegenerateSubcell(format!(
                "edge {edge} coverage ends at parameter {t}"
            )));
        }
        cut_sets.push(cuts);
    }
    let edge_cuts = cut_sets[0].clone();
    for cuts in &cut_sets {
        if cuts.len() != edge_cuts.len()
            || cuts.iter().zip(&edge_cuts).any(|(a, b)| (a - b).abs() > tol)
        {
            return Err(Error::NonMatchingSubfaces(
                "reference edges carry different cut sets".into(),
            ));
        }
        let n = cuts.len();
        for i in 0..n {
            if (cuts[i] + cuts[n - 1 - i] - 1.0).abs() > tol {
                return Err(Error::NonMatchingSubfaces(format!(
                    "edge cut set is not symmetric at parameter {}",
                    cuts[i]
                )));
            }
        }
    }

    Ok(SubcellTopology {
        scheme,
        n_sub,
        polygons,
        area_fractions,
        ref_areas,
        centroids,
        interior_faces,
        boundary_subfaces,
        edge_cuts,
        edge_subfaces,
    })
}

/// Identifies which reference edge holds the segment, returning the edge index
/// and the endpoint parameters along the edge's CCW traversal.
fn classify_boundary_segment(a: Vec2, b: Vec2, tol: f64) -> Option<(usize, f64, f64)> {
    if a.y.abs() < tol && b.y.abs() < tol {
        Some((0, a.x, b.x))
    } else if (a.x + a.y - 1.0).abs() < tol && (b.x + b.y - 1.0).abs() < tol {
        Some((1, a.y, b.y))
    } else if a.x.abs() < tol && b.x.abs() < tol {
        Some((2, 1.0 - a.y, 1.0 - b.y))
    } else {
        None
    }
}
