//! A posteriori subcell correction: admissibility detection on candidate
//! submeans, a per-face blending map, and conservative local recomputation
//! from the stage-input state.
//!
//! The loop always recomputes from the stage input, never from a previous
//! correction iteration, so repeated passes widen the corrected region
//! without compounding first-order diffusion. Face flux substitutions are
//! symmetric by construction (one θ per face), which preserves conservation
//! for any mask.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Vec2};
use crate::physics::{lax_friedrichs_quiet, AdmissibleSet, MAX_VARS};
use crate::residual::{apply_boundary_trace, fv_update_subcell, Discretization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionMode {
    Off,
    /// First-order substitution on troubled-subcell faces only.
    Original,
    /// Ringed θ blending {1, 3/4, 1/2, 1/4} away from the trouble.
    Blended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NadNeighbors {
    /// Cell-wise stencil: all subcells of the cell and its face neighbors.
    Linear,
    /// Subcell-wise stencil: vertex-sharing subcells.
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothLevel {
    Cell,
    Subcell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TroubleReason {
    NotANumber,
    Pad,
    Nad,
}

#[derive(Debug, Clone)]
pub struct TroubleMask {
    pub troubled: Vec<bool>,
    pub reason: Vec<Option<TroubleReason>>,
    pub iteration: usize,
}

impl TroubleMask {
    pub fn any(&self) -> bool {
        self.troubled.iter().any(|&t| t)
    }

    pub fn count(&self) -> usize {
        self.troubled.iter().filter(|&&t| t).count()
    }
}

/// Per-face blend factors and the subcells they force to be recomputed.
#[derive(Debug, Clone)]
pub struct BlendMap {
    pub theta: Vec<f64>,
    pub recompute: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct DetectionConfig {
    /// Physical admissibility predicate; `None` checks finiteness only.
    pub pad: Option<AdmissibleSet>,
    pub nad: bool,
    pub nad_neighbors: NadNeighbors,
    pub smooth_relax: bool,
    pub smooth_level: SmoothLevel,
}

#[derive(Debug, Clone)]
pub struct CorrectionConfig {
    pub mode: CorrectionMode,
    pub detection: DetectionConfig,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CorrectionStats {
    /// Recompute passes run (0 when the candidate was admissible).
    pub iterations: usize,
    /// Subcells ever flagged troubled.
    pub troubled: usize,
    /// Subcells recomputed by the final map.
    pub recomputed: usize,
    /// True when the iteration cap or a stall forced a first-order pass.
    pub forced: bool,
}

/// Physical admissibility of candidate submeans. Non-finite values are
/// always trouble; the predicate is applied only to finite states.
pub fn detect_pad(
    disc: &Discretization,
    pad: Option<&AdmissibleSet>,
    submeans: &[f64],
    troubled: &mut [bool],
    reason: &mut [Option<TroubleReason>],
) {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let mut u = [0.0; MAX_VARS];
    for s in 0..disc.conn.n_subcells() {
        let c = s / n_sub;
        let m = s % n_sub;
        for v in 0..nv {
            u[v] = submeans[(c * nv + v) * n_sub + m];
        }
        if u[..nv].iter().any(|x| !x.is_finite()) {
            troubled[s] = true;
            reason[s] = Some(TroubleReason::NotANumber);
        } else if let Some(set) = pad {
            if !set.contains(&u[..nv]) {
                troubled[s] = true;
                reason[s] = Some(TroubleReason::Pad);
            }
        }
    }
}

/// Relaxed discrete maximum principle on the model's scalar: a candidate
/// submean must stay within the stage-input envelope of its neighborhood,
/// widened by `max(1e-4, 1e-3 (max - min))`.
pub fn detect_nad(
    disc: &Discretization,
    old_sub: &[f64],
    new_sub: &[f64],
    neighbors: NadNeighbors,
) -> Vec<bool> {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let comp = disc.model.nad_component();
    let n_total = disc.conn.n_subcells();
    let scalar_old =
        |s: usize| old_sub[((s / n_sub) * nv + comp) * n_sub + s % n_sub];
    let scalar_new =
        |s: usize| new_sub[((s / n_sub) * nv + comp) * n_sub + s % n_sub];

    let mut flags = vec![false; n_total];
    match neighbors {
        NadNeighbors::Linear => {
            let mut cell_min = vec![f64::INFINITY; disc.n_cells()];
            let mut cell_max = vec![f64::NEG_INFINITY; disc.n_cells()];
            for c in 0..disc.n_cells() {
                for m in 0..n_sub {
                    let w = scalar_old(c * n_sub + m);
                    cell_min[c] = cell_min[c].min(w);
                    cell_max[c] = cell_max[c].max(w);
                }
            }
            for c in 0..disc.n_cells() {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &q in &disc.conn.linear_stencil[c] {
                    lo = lo.min(cell_min[q as usize]);
                    hi = hi.max(cell_max[q as usize]);
                }
                let delta = (1e-3 * (hi - lo)).max(1e-4);
                for m in 0..n_sub {
                    let w = scalar_new(c * n_sub + m);
                    flags[c * n_sub + m] = w < lo - delta || w > hi + delta;
                }
            }
        }
        NadNeighbors::Nonlinear => {
            for s in 0..n_total {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &q in &disc.conn.nonlinear_stencil[s] {
                    let w = scalar_old(q as usize);
                    lo = lo.min(w);
                    hi = hi.max(w);
                }
                let delta = (1e-3 * (hi - lo)).max(1e-4);
                let w = scalar_new(s);
                flags[s] = w < lo - delta || w > hi + delta;
            }
        }
    }
    flags
}

/// Linearized derivative field of one entity: v(x) = g + H (x - x0), where g
/// is the entity average of the gradient and H the entity average of the
/// Hessian, both of the model's maximum-principle scalar.
#[derive(Debug, Clone, Copy)]
struct LinField {
    g: Vec2,
    h: Mat2,
    x0: Vec2,
}

impl LinField {
    fn vx(&self, x: Vec2) -> f64 {
        self.g.x + self.h.m11 * (x.x - self.x0.x) + self.h.m12 * (x.y - self.x0.y)
    }

    fn vy(&self, x: Vec2) -> f64 {
        self.g.y + self.h.m21 * (x.x - self.x0.x) + self.h.m22 * (x.y - self.x0.y)
    }
}

fn cell_derivative_fields(disc: &Discretization, moments: &[f64], cell: usize) -> Vec<LinField> {
    let n = disc.n_modes();
    let nv = disc.n_vars();
    let comp = disc.model.nad_component();
    let t = &disc.tables;
    let u = DMatrix::from_fn(n, 1, |q, _| moments[(cell * nv + comp) * n + q]);
    let ax = &t.dx * &u;
    let ay = &t.dy * &u;
    let hxx = &t.dx * &ax;
    let hxy = &t.dy * &ax;
    let hyx = &t.dx * &ay;
    let hyy = &t.dy * &ay;
    let proj = &disc.ops.proj;
    let map = &disc.conn.geom[cell].map;
    let g_mat = map.inv_jac.transpose();
    let avg = |w: &DMatrix<f64>, m: usize| -> f64 {
        let mut acc = 0.0;
        for q in 0..n {
            acc += proj[(m, q)] * w[(q, 0)];
        }
        acc
    };
    (0..disc.n_sub())
        .map(|m| {
            let g_ref = Vec2::new(avg(&ax, m), avg(&ay, m));
            let h_ref = Mat2::new(avg(&hxx, m), avg(&hxy, m), avg(&hyx, m), avg(&hyy, m));
            LinField {
                g: g_mat * g_ref,
                h: g_mat * h_ref * g_mat.transpose(),
                x0: disc.conn.geom[cell].sub_centroids[m],
            }
        })
        .collect()
}

fn cell_level_field(disc: &Discretization, moments: &[f64], cell: usize) -> LinField {
    let n = disc.n_modes();
    let nv = disc.n_vars();
    let comp = disc.model.nad_component();
    let t = &disc.tables;
    let u = DMatrix::from_fn(n, 1, |q, _| moments[(cell * nv + comp) * n + q]);
    let ax = &t.dx * &u;
    let ay = &t.dy * &u;
    let hxx = &t.dx * &ax;
    let hxy = &t.dy * &ax;
    let hyx = &t.dx * &ay;
    let hyy = &t.dy * &ay;
    // The cell mean of a modal expansion is sqrt(2) times its constant-mode
    // coefficient.
    let rt2 = 2f64.sqrt();
    let map = &disc.conn.geom[cell].map;
    let g_mat = map.inv_jac.transpose();
    let g_ref = Vec2::new(rt2 * ax[(0, 0)], rt2 * ay[(0, 0)]);
    let h_ref =
        Mat2::new(rt2 * hxx[(0, 0)], rt2 * hxy[(0, 0)], rt2 * hyx[(0, 0)], rt2 * hyy[(0, 0)]);
    LinField {
        g: g_mat * g_ref,
        h: g_mat * h_ref * g_mat.transpose(),
        x0: disc.mesh.centroids[cell],
    }
}

fn within_envelope(own: f64, lo: f64, hi: f64) -> bool {
    let eps = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    own >= lo - eps && own <= hi + eps
}

/// Smooth-extrema flags: an entity is smooth when its linearized derivative
/// fields, evaluated at every shared vertex, stay within the envelope of the
/// mean derivative values of all entities sharing that vertex, itself
/// included. The bounds use means, not vertex extrapolations, so their width
/// scales with the local derivative variation and the test stays robust
/// where the solution has a well-resolved extremum. Smooth flags clear NAD
/// trouble only. Needs second derivatives, so k < 2 relaxes nothing.
pub fn smooth_extrema_relax(
    disc: &Discretization,
    cand_moments: &[f64],
    level: SmoothLevel,
) -> Vec<bool> {
    let n_total = disc.conn.n_subcells();
    let n_sub = disc.n_sub();
    if disc.ops.k < 2 {
        return vec![false; n_total];
    }
    match level {
        SmoothLevel::Subcell => {
            let mut fields = Vec::with_capacity(n_total);
            for c in 0..disc.n_cells() {
                fields.extend(cell_derivative_fields(disc, cand_moments, c));
            }
            let mut smooth = vec![true; n_total];
            for s in 0..n_total {
                let c = s / n_sub;
                let m = s % n_sub;
                let verts = &disc.conn.geom[c].sub_vertices[m];
                'vertex: for (r, &p) in verts.iter().enumerate() {
                    let sharers = &disc.conn.sub_vertex_sharers[s][r];
                    if sharers.is_empty() {
                        continue;
                    }
                    let f = &fields[s];
                    let (mut xlo, mut xhi) = (f.g.x, f.g.x);
                    let (mut ylo, mut yhi) = (f.g.y, f.g.y);
                    for &(q, _) in sharers {
                        let g = fields[q as usize].g;
                        xlo = xlo.min(g.x);
                        xhi = xhi.max(g.x);
                        ylo = ylo.min(g.y);
                        yhi = yhi.max(g.y);
                    }
                    if !within_envelope(f.vx(p), xlo, xhi) || !within_envelope(f.vy(p), ylo, yhi)
                    {
                        smooth[s] = false;
                        break 'vertex;
                    }
                }
            }
            smooth
        }
        SmoothLevel::Cell => {
            let fields: Vec<LinField> =
                (0..disc.n_cells()).map(|c| cell_level_field(disc, cand_moments, c)).collect();
            let mut cell_smooth = vec![true; disc.n_cells()];
            for c in 0..disc.n_cells() {
                let tri = disc.mesh.triangles[c];
                'corner: for (v, &node) in tri.iter().enumerate() {
                    let sharers = &disc.conn.cell_vertex_sharers[c][v];
                    if sharers.is_empty() {
                        continue;
                    }
                    let p = disc.mesh.nodes[node];
                    let f = &fields[c];
                    let (mut xlo, mut xhi) = (f.g.x, f.g.x);
                    let (mut ylo, mut yhi) = (f.g.y, f.g.y);
                    for &(q, _) in sharers {
                        let g = fields[q as usize].g;
                        xlo = xlo.min(g.x);
                        xhi = xhi.max(g.x);
                        ylo = ylo.min(g.y);
                        yhi = yhi.max(g.y);
                    }
                    if !within_envelope(f.vx(p), xlo, xhi) || !within_envelope(f.vy(p), ylo, yhi)
                    {
                        cell_smooth[c] = false;
                        break 'corner;
                    }
                }
            }
            (0..n_total).map(|s| cell_smooth[s / n_sub]).collect()
        }
    }
}

/// Full detection pass on a candidate state.
pub fn detect(
    disc: &Discretization,
    cfg: &DetectionConfig,
    old_sub: &[f64],
    cand_moments: &[f64],
    cand_sub: &[f64],
) -> TroubleMask {
    let n_total = disc.conn.n_subcells();
    let mut troubled = vec![false; n_total];
    let mut reason = vec![None; n_total];
    detect_pad(disc, cfg.pad.as_ref(), cand_sub, &mut troubled, &mut reason);
    if cfg.nad {
        let nad = detect_nad(disc, old_sub, cand_sub, cfg.nad_neighbors);
        // Relaxation only clears NAD flags, so it is skipped entirely on
        // stages where nothing tripped the band.
        let smooth = if cfg.smooth_relax && nad.iter().any(|&f| f) {
            smooth_extrema_relax(disc, cand_moments, cfg.smooth_level)
        } else {
            vec![false; n_total]
        };
        for s in 0..n_total {
            if nad[s] && !smooth[s] && !troubled[s] {
                troubled[s] = true;
                reason[s] = Some(TroubleReason::Nad);
            }
        }
    }
    TroubleMask { troubled, reason, iteration: 0 }
}

fn face_neighbor(disc: &Discretization, s: usize, f: u32) -> Option<u32> {
    let face = &disc.conn.corr_faces[f as usize];
    if face.left as usize == s {
        match face.right {
            crate::connectivity::CorrSide::Sub(r) => Some(r),
            crate::connectivity::CorrSide::Ghost(_) => None,
        }
    } else {
        Some(face.left)
    }
}

/// θ assignment from a trouble mask. Original mode puts θ = 1 on every face
/// of a troubled subcell. Blended mode adds rings of 3/4 on the remaining
/// faces of face neighbors, 1/2 on those of vertex neighbors, and 1/4 on
/// those of the vertex neighbors' own face neighbors; rings from different
/// troubled subcells overlap at the larger θ because levels are assigned in
/// descending order.
pub fn build_blend_map(disc: &Discretization, troubled: &[bool], mode: CorrectionMode) -> BlendMap {
    let n_total = disc.conn.n_subcells();
    let n_faces = disc.conn.corr_faces.len();
    let mut theta = vec![0.0; n_faces];
    for s in 0..n_total {
        if troubled[s] {
            for &(f, _) in &disc.conn.sub_faces[s] {
                theta[f as usize] = 1.0;
            }
        }
    }
    if mode == CorrectionMode::Blended {
        // 0 = untouched, 1..=3 = ring index outward from the trouble.
        let mut ring = vec![0u8; n_total];
        let mut ring1: Vec<usize> = Vec::new();
        for s in 0..n_total {
            if !troubled[s] {
                continue;
            }
            for &(f, _) in &disc.conn.sub_faces[s] {
                if let Some(q) = face_neighbor(disc, s, f) {
                    let q = q as usize;
                    if !troubled[q] && ring[q] == 0 {
                        ring[q] = 1;
                        ring1.push(q);
                    }
                }
            }
        }
        let mut ring2: Vec<usize> = Vec::new();
        for s in 0..n_total {
            if !troubled[s] {
                continue;
            }
            for &q in &disc.conn.nonlinear_stencil[s] {
                let q = q as usize;
                if !troubled[q] && ring[q] == 0 {
                    ring[q] = 2;
                    ring2.push(q);
                }
            }
        }
        let mut ring3: Vec<usize> = Vec::new();
        for &s in &ring2 {
            for &(f, _) in &disc.conn.sub_faces[s] {
                if let Some(q) = face_neighbor(disc, s, f) {
                    let q = q as usize;
                    if !troubled[q] && ring[q] == 0 {
                        ring[q] = 3;
                        ring3.push(q);
                    }
                }
            }
        }
        for (members, th) in [(&ring1, 0.75), (&ring2, 0.5), (&ring3, 0.25)] {
            for &s in members {
                for &(f, _) in &disc.conn.sub_faces[s] {
                    if theta[f as usize] == 0.0 {
                        theta[f as usize] = th;
                    }
                }
            }
        }
    }
    let mut recompute = vec![false; n_total];
    for s in 0..n_total {
        if disc.conn.sub_faces[s].iter().any(|&(f, _)| theta[f as usize] > 0.0) {
            recompute[s] = true;
        }
    }
    BlendMap { theta, recompute }
}

/// Blends the ledger face values against first-order fluxes of the stage
/// input: θ = 0 keeps the ledger entry bitwise, θ = 1 discards it entirely
/// (so a poisoned high-order value cannot leak through the blend).
pub fn corrected_face_values(
    disc: &Discretization,
    base: &[f64],
    map: &BlendMap,
    old_sub: &[f64],
    gamma: f64,
) -> Vec<f64> {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let mut vals = base.to_vec();
    let mut ul = [0.0; MAX_VARS];
    let mut ur = [0.0; MAX_VARS];
    let mut fo = [0.0; MAX_VARS];
    for (fi, face) in disc.conn.corr_faces.iter().enumerate() {
        let th = map.theta[fi];
        if th == 0.0 {
            continue;
        }
        let cl = face.left as usize / n_sub;
        let ml = face.left as usize % n_sub;
        for v in 0..nv {
            ul[v] = old_sub[(cl * nv + v) * n_sub + ml];
        }
        match &face.right {
            crate::connectivity::CorrSide::Sub(r) => {
                let cr = *r as usize / n_sub;
                let mr = *r as usize % n_sub;
                for v in 0..nv {
                    ur[v] = old_sub[(cr * nv + v) * n_sub + mr];
                }
            }
            crate::connectivity::CorrSide::Ghost(bc) => {
                apply_boundary_trace(&disc.model, bc, &ul[..nv], face.normal, &mut ur);
            }
        }
        lax_friedrichs_quiet(
            &disc.model,
            &ul[..nv],
            &ur[..nv],
            face.midpoint,
            face.normal,
            gamma,
            &mut fo[..nv],
        );
        for v in 0..nv {
            let first = face.length * fo[v];
            vals[fi * nv + v] =
                if th == 1.0 { first } else { th * first + (1.0 - th) * base[fi * nv + v] };
        }
    }
    vals
}

/// Recomputes the masked subcells from the stage input with the given face
/// values and rebuilds the moments of every affected cell. Subcells outside
/// the mask keep their candidate entries untouched.
pub fn recompute_with_map(
    disc: &Discretization,
    map: &BlendMap,
    old_sub: &[f64],
    face_values: &[f64],
    dt: f64,
    cand_moments: &mut [f64],
    cand_sub: &mut [f64],
) {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_sub = disc.n_sub();
    let mut out = [0.0; MAX_VARS];
    let mut affected = vec![false; disc.n_cells()];
    for s in 0..disc.conn.n_subcells() {
        if !map.recompute[s] {
            continue;
        }
        fv_update_subcell(disc, old_sub, face_values, dt, s, &mut out);
        let c = s / n_sub;
        let m = s % n_sub;
        for v in 0..nv {
            cand_sub[(c * nv + v) * n_sub + m] = out[v];
        }
        affected[c] = true;
    }
    for c in 0..disc.n_cells() {
        if !affected[c] {
            continue;
        }
        for v in 0..nv {
            let sub = &cand_sub[(c * nv + v) * n_sub..(c * nv + v + 1) * n_sub];
            let mom = &mut cand_moments[(c * nv + v) * n..(c * nv + v + 1) * n];
            for q in 0..n {
                let mut acc = 0.0;
                for m in 0..n_sub {
                    acc += disc.ops.proj_inv[(q, m)] * sub[m];
                }
                mom[q] = acc;
            }
        }
    }
}

/// Detection/correction loop of one forward-Euler stage. Mutates the
/// candidate in place until every subcell is admissible; on hitting the
/// iteration cap, or when the mask stops growing while trouble persists,
/// runs one forced first-order pass over everything flagged and accepts it
/// after a physical-admissibility check.
pub fn apply_correction(
    disc: &Discretization,
    old_sub: &[f64],
    cand_moments: &mut [f64],
    cand_sub: &mut [f64],
    face_values: &[f64],
    dt: f64,
    gamma: f64,
    cfg: &CorrectionConfig,
) -> Result<CorrectionStats> {
    let mut stats = CorrectionStats::default();
    if cfg.mode == CorrectionMode::Off {
        return Ok(stats);
    }
    let mut mask = detect(disc, &cfg.detection, old_sub, cand_moments, cand_sub).troubled;
    if !mask.iter().any(|&t| t) {
        return Ok(stats);
    }
    let mut stalled = false;
    loop {
        stats.iterations += 1;
        let forced = stalled || stats.iterations > cfg.max_iter;
        let mode = if forced { CorrectionMode::Original } else { cfg.mode };
        let map = build_blend_map(disc, &mask, mode);
        let vals = corrected_face_values(disc, face_values, &map, old_sub, gamma);
        recompute_with_map(disc, &map, old_sub, &vals, dt, cand_moments, cand_sub);
        stats.recomputed = map.recompute.iter().filter(|&&r| r).count();
        stats.troubled = mask.iter().filter(|&&t| t).count();
        if forced {
            stats.forced = true;
            let n_total = disc.conn.n_subcells();
            let mut bad = vec![false; n_total];
            let mut why = vec![None; n_total];
            detect_pad(disc, cfg.detection.pad.as_ref(), cand_sub, &mut bad, &mut why);
            if let Some(s) = (0..n_total).find(|&s| bad[s]) {
                return Err(Error::CorrectionDiverged(format!(
                    "subcell {s} fails physical admissibility after the forced first-order pass \
                     ({:?}); the time step violates the subcell CFL or the admissible set is \
                     inconsistent with the data",
                    why[s]
                )));
            }
            return Ok(stats);
        }
        let fresh = detect(disc, &cfg.detection, old_sub, cand_moments, cand_sub).troubled;
        if !fresh.iter().any(|&t| t) {
            return Ok(stats);
        }
        let mut grew = false;
        for s in 0..mask.len() {
            if fresh[s] && !mask[s] {
                mask[s] = true;
                grew = true;
            }
        }
        if !grew {
            stalled = true;
        }
    }
}
