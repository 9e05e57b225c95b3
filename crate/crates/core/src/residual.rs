//! DG residual assembly and the reconstructed interior fluxes that recast the
//! scheme as a finite volume update on the subcells.
//!
//! Every shared mesh face is integrated once, with the flux value scattered to
//! both sides, so pairwise conservation holds to round-off. Face integrals are
//! simultaneously accumulated into a [`FluxLedger`] whose entries carry the
//! full high-order flux of the stage; the correction pass blends against these
//! entries without re-assembling anything.
//!
//! Flux evaluation is NaN-quiet: a non-physical trace poisons the affected
//! entries instead of aborting, and detection downstream treats non-finite
//! values as inadmissible.

use nalgebra::DMatrix;

use crate::connectivity::{build_topology, GlobalTopology};
use crate::error::{Error, Result};
use crate::geometry::{outward_normal, Vec2};
use crate::mesh::{BoundaryCondition, FaceRight, Mesh};
use crate::operators::{build_operators, RefOperators};
use crate::physics::{lax_friedrichs_quiet, Model, MAX_VARS};
use crate::subdivision::SubdivisionScheme;
use crate::tables::{build_tables, SolverTables};

/// Interior flux used by the volume term of the residual.
///
/// `Projected` replaces F(u_h) by its degree-(k+1) L2 projection, the form
/// under which the residual and flux expressions of the reconstructed fluxes
/// agree to round-off for nonlinear fluxes. `Exact` is the production default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeFlux {
    Exact,
    Projected,
}

/// Everything fixed over a run: model, mesh, reference operators, quadrature
/// tables, global subcell connectivity, and the precomputed solve matrix
/// `adjacency^T pinv(L)` of the reconstructed-flux system.
#[derive(Debug)]
pub struct Discretization {
    pub model: Model,
    pub mesh: Mesh,
    pub ops: RefOperators,
    pub tables: SolverTables,
    pub conn: GlobalTopology,
    pub w_solve: DMatrix<f64>,
}

impl Discretization {
    pub fn new(mesh: Mesh, model: Model, scheme: SubdivisionScheme) -> Result<Self> {
        let ops = build_operators(scheme)?;
        let tables = build_tables(&ops);
        let conn = build_topology(&mesh, &ops.topo)?;
        let w_solve = ops.adjacency.transpose() * &ops.lap_pinv;
        Ok(Discretization { model, mesh, ops, tables, conn, w_solve })
    }

    pub fn n_cells(&self) -> usize {
        self.conn.n_cells
    }

    pub fn n_vars(&self) -> usize {
        self.model.n_vars()
    }

    /// Moments per variable.
    pub fn n_modes(&self) -> usize {
        self.ops.n
    }

    /// Subcells per cell; equals the moment count.
    pub fn n_sub(&self) -> usize {
        self.conn.n_sub
    }

    pub fn n_ifaces(&self) -> usize {
        self.ops.topo.interior_faces.len()
    }

    /// Length of a flat moment vector, layout `(cell*n_vars + var)*n + mode`.
    pub fn moments_len(&self) -> usize {
        self.n_cells() * self.n_vars() * self.n_modes()
    }

    /// Length of a flat submean vector, layout `(cell*n_vars + var)*n_sub + m`.
    pub fn submeans_len(&self) -> usize {
        self.n_cells() * self.n_vars() * self.n_sub()
    }

    /// Slice of one cell's moments, var-major.
    pub fn cell_moments<'a>(&self, moments: &'a [f64], cell: usize) -> &'a [f64] {
        let stride = self.n_vars() * self.n_modes();
        &moments[cell * stride..(cell + 1) * stride]
    }

    /// Outward unit normal and physical length of one boundary subface of a
    /// cell edge. Matches the construction of the correction-face list.
    pub fn subface_frame(&self, cell: usize, edge: usize, seg: usize) -> (Vec2, f64) {
        let topo = &self.ops.topo;
        let bf = &topo.boundary_subfaces[topo.edge_subfaces[edge][seg]];
        let map = &self.conn.geom[cell].map;
        let a = map.apply(bf.a);
        let b = map.apply(bf.b);
        (outward_normal(a, b), (b - a).norm())
    }
}

/// Face-integrated fluxes of one assembled stage.
///
/// `cross` holds the numerical-flux integrals of shared mesh faces with
/// respect to the global (left-outward) face normal, one entry per subface
/// segment; `bnd` the domain-boundary integrals per cell, outward; `w_hat`
/// the reconstructed fluxes of cell-interior subcell faces with respect to
/// the reference face orientation. All entries are per variable, face-major.
#[derive(Debug, Clone)]
pub struct FluxLedger {
    pub cross: Vec<Vec<f64>>,
    pub bnd: Vec<Vec<f64>>,
    pub w_hat: Vec<Vec<f64>>,
}

impl FluxLedger {
    pub fn new(disc: &Discretization) -> Self {
        let nv = disc.n_vars();
        let n_seg = disc.conn.n_seg;
        let n_bsub = disc.ops.topo.boundary_subfaces.len();
        let cross = disc
            .mesh
            .faces
            .iter()
            .map(|f| if f.is_boundary() { Vec::new() } else { vec![0.0; n_seg * nv] })
            .collect();
        let bnd = (0..disc.n_cells()).map(|_| vec![0.0; n_bsub * nv]).collect();
        let w_hat = (0..disc.n_cells()).map(|_| vec![0.0; disc.n_ifaces() * nv]).collect();
        FluxLedger { cross, bnd, w_hat }
    }
}

/// Exterior trace from a boundary condition, given the interior trace and the
/// outward unit normal. Periodic edges never reach here: pairing turns them
/// into interior faces.
pub fn apply_boundary_trace(
    model: &Model,
    bc: &BoundaryCondition,
    u_in: &[f64],
    n: Vec2,
    out: &mut [f64],
) {
    match bc {
        BoundaryCondition::Outflow | BoundaryCondition::Periodic => {
            out[..u_in.len()].copy_from_slice(u_in);
        }
        BoundaryCondition::Inflow(state) => {
            out[..state.len()].copy_from_slice(state);
        }
        BoundaryCondition::SymmetryWall => {
            out[..u_in.len()].copy_from_slice(u_in);
            if let Model::Euler { .. } = model {
                let qn = u_in[1] * n.x + u_in[2] * n.y;
                out[1] = u_in[1] - 2.0 * qn * n.x;
                out[2] = u_in[2] - 2.0 * qn * n.y;
            }
        }
    }
}

fn eval_row(rows: &DMatrix<f64>, i: usize, cell_mom: &[f64], nv: usize, n: usize, out: &mut [f64]) {
    for v in 0..nv {
        let mut acc = 0.0;
        for q in 0..n {
            acc += rows[(i, q)] * cell_mom[v * n + q];
        }
        out[v] = acc;
    }
}

/// Numerical fluxes at the Gauss points of one segment of a shared mesh face,
/// with respect to the global face normal, ordered by the left cell's edge
/// parameter. Both assembly paths call this, so their values agree bitwise.
fn face_point_fluxes(
    disc: &Discretization,
    moments: &[f64],
    gamma: f64,
    fid: usize,
    seg: usize,
) -> Vec<f64> {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_gl = disc.tables.n_gl;
    let face = &disc.mesh.faces[fid];
    let (cl, el) = (face.left, face.left_slot);
    let (cr, er) = match face.right {
        FaceRight::Interior { cell, slot, .. } => (cell, slot),
        FaceRight::Boundary(_) => unreachable!("boundary faces use boundary_point_fluxes"),
    };
    let tr_l = &disc.tables.edge_trace[el][seg];
    let tr_r = &disc.tables.edge_trace[er][disc.conn.n_seg - 1 - seg];
    let (normal, _) = disc.subface_frame(cl, el, seg);
    let mom_l = disc.cell_moments(moments, cl);
    let mom_r = disc.cell_moments(moments, cr);
    let map_l = &disc.conn.geom[cl].map;

    let mut out = vec![0.0; n_gl * nv];
    let mut um = [0.0; MAX_VARS];
    let mut up = [0.0; MAX_VARS];
    for g in 0..n_gl {
        eval_row(&tr_l.basis, g, mom_l, nv, n, &mut um);
        eval_row(&tr_r.basis, n_gl - 1 - g, mom_r, nv, n, &mut up);
        let x = map_l.apply(tr_l.pts[g]);
        lax_friedrichs_quiet(
            &disc.model,
            &um[..nv],
            &up[..nv],
            x,
            normal,
            gamma,
            &mut out[g * nv..(g + 1) * nv],
        );
    }
    out
}

/// Numerical fluxes at the Gauss points of one domain-boundary subface, with
/// respect to the outward normal, ordered by the edge parameter.
fn boundary_point_fluxes(
    disc: &Discretization,
    moments: &[f64],
    gamma: f64,
    cell: usize,
    edge: usize,
    seg: usize,
    bc: &BoundaryCondition,
) -> Vec<f64> {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_gl = disc.tables.n_gl;
    let tr = &disc.tables.edge_trace[edge][seg];
    let (normal, _) = disc.subface_frame(cell, edge, seg);
    let mom = disc.cell_moments(moments, cell);
    let map = &disc.conn.geom[cell].map;

    let mut out = vec![0.0; n_gl * nv];
    let mut um = [0.0; MAX_VARS];
    let mut up = [0.0; MAX_VARS];
    for g in 0..n_gl {
        eval_row(&tr.basis, g, mom, nv, n, &mut um);
        apply_boundary_trace(&disc.model, bc, &um[..nv], normal, &mut up);
        let x = map.apply(tr.pts[g]);
        lax_friedrichs_quiet(
            &disc.model,
            &um[..nv],
            &up[..nv],
            x,
            normal,
            gamma,
            &mut out[g * nv..(g + 1) * nv],
        );
    }
    out
}

/// L2 projection of the interior flux onto the degree-(k+1) space, computed
/// with the volume rule. Layout `(var*2 + dim)*n_ext + mode`.
pub fn project_interior_flux(disc: &Discretization, cell: usize, cell_mom: &[f64]) -> Vec<f64> {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_ext = disc.tables.n_ext;
    let t = &disc.tables;
    let map = &disc.conn.geom[cell].map;
    let mut coef = vec![0.0; nv * 2 * n_ext];
    let mut u = [0.0; MAX_VARS];
    let mut f = [[0.0; 2]; MAX_VARS];
    for i in 0..t.vol_pts.len() {
        eval_row(&t.vol_basis, i, cell_mom, nv, n, &mut u);
        let x = map.apply(t.vol_pts[i]);
        disc.model.flux_quiet(&u[..nv], x, &mut f[..nv]);
        for v in 0..nv {
            for d in 0..2 {
                let row = &mut coef[(v * 2 + d) * n_ext..(v * 2 + d + 1) * n_ext];
                let w = t.vol_w[i] * f[v][d];
                for q in 0..n_ext {
                    row[q] += w * t.vol_basis_ext[(i, q)];
                }
            }
        }
    }
    coef
}

/// Assembles the DG residual of every cell and the face-flux ledger of the
/// stage. The ledger's reconstructed entries `w_hat` are left zero; call
/// [`solve_all_reconstructed`] to fill them.
pub fn assemble_residual(
    disc: &Discretization,
    moments: &[f64],
    gamma: f64,
    volume_flux: VolumeFlux,
) -> (Vec<f64>, FluxLedger) {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_gl = disc.tables.n_gl;
    let n_seg = disc.conn.n_seg;
    let t = &disc.tables;
    let mut phi = vec![0.0; disc.moments_len()];
    let mut ledger = FluxLedger::new(disc);

    let mut u = [0.0; MAX_VARS];
    let mut f = [[0.0; 2]; MAX_VARS];
    for c in 0..disc.n_cells() {
        let geom = &disc.conn.geom[c];
        let det = geom.map.det;
        let ij = geom.map.inv_jac;
        let cell_mom = disc.cell_moments(moments, c);
        let proj = match volume_flux {
            VolumeFlux::Exact => None,
            VolumeFlux::Projected => Some(project_interior_flux(disc, c, cell_mom)),
        };
        let phi_c = &mut phi[c * nv * n..(c + 1) * nv * n];
        for i in 0..t.vol_pts.len() {
            match &proj {
                None => {
                    eval_row(&t.vol_basis, i, cell_mom, nv, n, &mut u);
                    let x = geom.map.apply(t.vol_pts[i]);
                    disc.model.flux_quiet(&u[..nv], x, &mut f[..nv]);
                }
                Some(coef) => {
                    for v in 0..nv {
                        for d in 0..2 {
                            let row = &coef[(v * 2 + d) * t.n_ext..(v * 2 + d + 1) * t.n_ext];
                            let mut acc = 0.0;
                            for q in 0..t.n_ext {
                                acc += t.vol_basis_ext[(i, q)] * row[q];
                            }
                            f[v][d] = acc;
                        }
                    }
                }
            }
            let w = t.vol_w[i] * det;
            for m in 0..n {
                let gx = t.vol_gx[(i, m)];
                let gy = t.vol_gy[(i, m)];
                let px = ij.m11 * gx + ij.m21 * gy;
                let py = ij.m12 * gx + ij.m22 * gy;
                for v in 0..nv {
                    phi_c[v * n + m] += w * (f[v][0] * px + f[v][1] * py);
                }
            }
        }
    }

    for (fid, face) in disc.mesh.faces.iter().enumerate() {
        let (cl, el) = (face.left, face.left_slot);
        match &face.right {
            FaceRight::Interior { cell: cr, slot: er, .. } => {
                for seg in 0..n_seg {
                    let flux = face_point_fluxes(disc, moments, gamma, fid, seg);
                    let (_, len) = disc.subface_frame(cl, el, seg);
                    let tr_l = &t.edge_trace[el][seg];
                    let tr_r = &t.edge_trace[*er][n_seg - 1 - seg];
                    for g in 0..n_gl {
                        let w = t.gl_w[g] * len;
                        for v in 0..nv {
                            let wf = w * flux[g * nv + v];
                            for m in 0..n {
                                phi[(cl * nv + v) * n + m] -= wf * tr_l.basis[(g, m)];
                                phi[(*cr * nv + v) * n + m] +=
                                    wf * tr_r.basis[(n_gl - 1 - g, m)];
                            }
                            ledger.cross[fid][seg * nv + v] += wf;
                        }
                    }
                }
            }
            FaceRight::Boundary(bc) => {
                for seg in 0..n_seg {
                    let flux = boundary_point_fluxes(disc, moments, gamma, cl, el, seg, bc);
                    let (_, len) = disc.subface_frame(cl, el, seg);
                    let tr = &t.edge_trace[el][seg];
                    let bsub = disc.ops.topo.edge_subfaces[el][seg];
                    for g in 0..n_gl {
                        let w = t.gl_w[g] * len;
                        for v in 0..nv {
                            let wf = w * flux[g * nv + v];
                            for m in 0..n {
                                phi[(cl * nv + v) * n + m] -= wf * tr.basis[(g, m)];
                            }
                            ledger.bnd[cl][bsub * nv + v] += wf;
                        }
                    }
                }
            }
        }
    }

    (phi, ledger)
}

/// Per-subcell boundary flux sums of one cell, gathered from the ledger with
/// outward sign. Layout `var*n_sub + m`; rows of subcells not touching the
/// cell boundary are zero.
pub fn gather_boundary(disc: &Discretization, ledger: &FluxLedger, cell: usize) -> Vec<f64> {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let n_seg = disc.conn.n_seg;
    let topo = &disc.ops.topo;
    let mut b = vec![0.0; nv * n_sub];
    for e in 0..3 {
        let fid = disc.mesh.cell_faces[cell][e];
        let face = &disc.mesh.faces[fid];
        if face.is_boundary() {
            for seg in 0..n_seg {
                let bsub = topo.edge_subfaces[e][seg];
                let m = topo.boundary_subfaces[bsub].sub;
                for v in 0..nv {
                    b[v * n_sub + m] += ledger.bnd[cell][bsub * nv + v];
                }
            }
        } else {
            let on_left = face.left == cell && face.left_slot == e;
            for seg in 0..n_seg {
                // The global ledger normal is outward for the left cell; the
                // right cell sees the segment mirrored and negated.
                let (seg_l, sign) = if on_left { (seg, 1.0) } else { (n_seg - 1 - seg, -1.0) };
                let m = topo.boundary_subfaces[topo.edge_subfaces[e][seg]].sub;
                for v in 0..nv {
                    b[v * n_sub + m] += sign * ledger.cross[fid][seg_l * nv + v];
                }
            }
        }
    }
    b
}

/// Solves the graph system for the interior reconstructed fluxes of one cell:
/// `w = -adjacency^T pinv(L) (subres * phi + b)`. The right-hand side must sum
/// to zero per variable (the constant-test-function identity); a violation
/// beyond round-off indicates inconsistent assembly.
pub fn reconstructed_fluxes_residual(
    disc: &Discretization,
    phi_cell: &[f64],
    b: &[f64],
) -> Result<Vec<f64>> {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_sub = disc.n_sub();
    let n_if = disc.n_ifaces();
    let mut w = vec![0.0; n_if * nv];
    let mut rhs = vec![0.0; n_sub];
    for v in 0..nv {
        for m in 0..n_sub {
            let mut acc = b[v * n_sub + m];
            for q in 0..n {
                acc += disc.ops.subres[(m, q)] * phi_cell[v * n + q];
            }
            rhs[m] = acc;
        }
        let sum: f64 = rhs.iter().sum();
        if sum.is_finite() {
            let scale = rhs.iter().map(|r| r.abs()).sum::<f64>().max(1.0);
            if sum.abs() > 1e-10 * scale {
                return Err(Error::CompatibilityViolated(format!(
                    "boundary/residual imbalance {sum:.3e} against scale {scale:.3e}"
                )));
            }
        }
        for fi in 0..n_if {
            let mut acc = 0.0;
            for m in 0..n_sub {
                acc += disc.w_solve[(fi, m)] * rhs[m];
            }
            w[fi * nv + v] = -acc;
        }
    }
    Ok(w)
}

/// Fills the ledger's reconstructed entries for every cell.
pub fn solve_all_reconstructed(
    disc: &Discretization,
    phi: &[f64],
    ledger: &mut FluxLedger,
) -> Result<()> {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    for c in 0..disc.n_cells() {
        let b = gather_boundary(disc, ledger, c);
        let w = reconstructed_fluxes_residual(disc, &phi[c * nv * n..(c + 1) * nv * n], &b)
            .map_err(|e| match e {
                Error::CompatibilityViolated(msg) => {
                    Error::CompatibilityViolated(format!("cell {c}: {msg}"))
                }
                other => other,
            })?;
        ledger.w_hat[c] = w;
    }
    Ok(())
}

/// Finite volume right-hand side of one cell's submeans from its interior
/// reconstructed fluxes and boundary sums: `-D^{-1}(A w + b)`. Layout
/// `var*n_sub + m`.
pub fn submean_rhs(
    disc: &Discretization,
    cell: usize,
    w_hat: &[f64],
    b: &[f64],
    out: &mut [f64],
) {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let areas = &disc.conn.geom[cell].sub_areas;
    for v in 0..nv {
        for m in 0..n_sub {
            out[v * n_sub + m] = b[v * n_sub + m];
        }
    }
    for (fi, face) in disc.ops.topo.interior_faces.iter().enumerate() {
        for v in 0..nv {
            let w = w_hat[fi * nv + v];
            out[v * n_sub + face.sub_left] += w;
            out[v * n_sub + face.sub_right] -= w;
        }
    }
    for v in 0..nv {
        for m in 0..n_sub {
            out[v * n_sub + m] /= -areas[m];
        }
    }
}

/// Interior reconstructed fluxes of one cell in the flux form: face integrals
/// of the projected interior flux, corrected by the lifted boundary defect
/// `G_m = surface integral of phi~_m (F_h.n - numerical flux)`.
pub fn reconstructed_fluxes_fluxform(
    disc: &Discretization,
    moments: &[f64],
    gamma: f64,
    cell: usize,
) -> Vec<f64> {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let n_if = disc.n_ifaces();
    let n_gl = disc.tables.n_gl;
    let n_ext = disc.tables.n_ext;
    let n_seg = disc.conn.n_seg;
    let t = &disc.tables;
    let topo = &disc.ops.topo;
    let map = &disc.conn.geom[cell].map;
    let coef = project_interior_flux(disc, cell, disc.cell_moments(moments, cell));

    let fh_dot = |rows: &DMatrix<f64>, i: usize, nrm: Vec2, v: usize| -> f64 {
        let mut fx = 0.0;
        let mut fy = 0.0;
        for q in 0..n_ext {
            let s = rows[(i, q)];
            fx += s * coef[(v * 2) * n_ext + q];
            fy += s * coef[(v * 2 + 1) * n_ext + q];
        }
        fx * nrm.x + fy * nrm.y
    };

    let mut w = vec![0.0; n_if * nv];
    for (fi, iface) in topo.interior_faces.iter().enumerate() {
        let a = map.apply(iface.a);
        let b = map.apply(iface.b);
        let nrm = outward_normal(a, b);
        let len = (b - a).norm();
        for g in 0..n_gl {
            let wq = t.gl_w[g] * len;
            for v in 0..nv {
                w[fi * nv + v] += wq * fh_dot(&t.iface_trace[fi].basis_ext, g, nrm, v);
            }
        }
    }

    let mut g_vec = vec![0.0; nv * n_sub];
    for e in 0..3 {
        let fid = disc.mesh.cell_faces[cell][e];
        let face = &disc.mesh.faces[fid];
        let on_left = face.left == cell && face.left_slot == e;
        for seg in 0..n_seg {
            let tr = &t.edge_trace[e][seg];
            let own_sub = topo.boundary_subfaces[topo.edge_subfaces[e][seg]].sub;
            let (nrm, len) = disc.subface_frame(cell, e, seg);
            // Numerical flux per Gauss point, outward, in this cell's point
            // order. The right side of a shared face reads the canonical
            // values mirrored and negated.
            let flux = match &face.right {
                FaceRight::Boundary(bc) => {
                    boundary_point_fluxes(disc, moments, gamma, cell, e, seg, bc)
                }
                FaceRight::Interior { .. } if on_left => {
                    face_point_fluxes(disc, moments, gamma, fid, seg)
                }
                FaceRight::Interior { .. } => {
                    let canon =
                        face_point_fluxes(disc, moments, gamma, fid, n_seg - 1 - seg);
                    let mut rev = vec![0.0; n_gl * nv];
                    for g in 0..n_gl {
                        for v in 0..nv {
                            rev[g * nv + v] = -canon[(n_gl - 1 - g) * nv + v];
                        }
                    }
                    rev
                }
            };
            for g in 0..n_gl {
                let wq = t.gl_w[g] * len;
                for v in 0..nv {
                    let defect = fh_dot(&tr.basis_ext, g, nrm, v) - flux[g * nv + v];
                    for m in 0..n_sub {
                        let phit = tr.phi[(g, m)] - if m == own_sub { 1.0 } else { 0.0 };
                        g_vec[v * n_sub + m] += wq * phit * defect;
                    }
                }
            }
        }
    }

    for fi in 0..n_if {
        for v in 0..nv {
            let mut acc = 0.0;
            for m in 0..n_sub {
                acc += disc.w_solve[(fi, m)] * g_vec[v * n_sub + m];
            }
            w[fi * nv + v] -= acc;
        }
    }
    w
}

/// Flattens the ledger into one flux value per correction face, layout
/// `face*n_vars + var`, oriented by the face normal. With these values the
/// forward-Euler submean update reproduces the DG stage exactly.
pub fn ledger_face_values(disc: &Discretization, ledger: &FluxLedger) -> Vec<f64> {
    use crate::connectivity::LedgerSlot;
    let nv = disc.n_vars();
    let mut values = vec![0.0; disc.conn.corr_faces.len() * nv];
    for (fi, face) in disc.conn.corr_faces.iter().enumerate() {
        let src = match face.ledger {
            LedgerSlot::CellInterior { cell, iface } => {
                &ledger.w_hat[cell as usize][iface as usize * nv..][..nv]
            }
            LedgerSlot::CrossSubface { face, seg } => {
                &ledger.cross[face as usize][seg as usize * nv..][..nv]
            }
            LedgerSlot::BoundarySubface { cell, bsub } => {
                &ledger.bnd[cell as usize][bsub as usize * nv..][..nv]
            }
        };
        values[fi * nv..(fi + 1) * nv].copy_from_slice(src);
    }
    values
}

/// Forward-Euler update of one subcell's submeans from per-face flux values.
/// Both the stage candidate and the correction recompute call this, so a
/// subcell whose face values are untouched reproduces the candidate bitwise.
pub fn fv_update_subcell(
    disc: &Discretization,
    old_submeans: &[f64],
    face_values: &[f64],
    dt: f64,
    s: usize,
    out: &mut [f64],
) {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let c = disc.conn.cell_of(s as u32);
    let m = disc.conn.local_of(s as u32);
    let area = disc.conn.geom[c].sub_areas[m];
    for v in 0..nv {
        let mut sum = 0.0;
        for &(f, sign) in &disc.conn.sub_faces[s] {
            sum += sign as f64 * face_values[f as usize * nv + v];
        }
        out[v] = old_submeans[(c * nv + v) * n_sub + m] - dt / area * sum;
    }
}

/// Submeans from moments cell by cell, via the projection matrix.
pub fn moments_to_submeans(disc: &Discretization, moments: &[f64], out: &mut [f64]) {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_sub = disc.n_sub();
    for c in 0..disc.n_cells() {
        for v in 0..nv {
            let mom = &moments[(c * nv + v) * n..(c * nv + v + 1) * n];
            let sub = &mut out[(c * nv + v) * n_sub..(c * nv + v + 1) * n_sub];
            for m in 0..n_sub {
                let mut acc = 0.0;
                for q in 0..n {
                    acc += disc.ops.proj[(m, q)] * mom[q];
                }
                sub[m] = acc;
            }
        }
    }
}

/// Moments from submeans cell by cell, via the inverse projection.
pub fn submeans_to_moments(disc: &Discretization, submeans: &[f64], out: &mut [f64]) {
    let nv = disc.n_vars();
    let n = disc.n_modes();
    let n_sub = disc.n_sub();
    for c in 0..disc.n_cells() {
        for v in 0..nv {
            let sub = &submeans[(c * nv + v) * n_sub..(c * nv + v + 1) * n_sub];
            let mom = &mut out[(c * nv + v) * n..(c * nv + v + 1) * n];
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
