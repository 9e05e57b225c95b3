//! Precomputed quadrature and basis-evaluation tables for residual assembly.
//!
//! All tables live on the reference triangle and are shared by every cell.
//! Surface rules use the same (k+2)-point Gauss-Legendre points per subface
//! everywhere, so the cell-boundary integrals of the residual and of the
//! boundary flux ledger are consistent term by term.

use nalgebra::DMatrix;

use crate::basis::Basis;
use crate::geometry::Vec2;
use crate::operators::RefOperators;
use crate::quadrature::{gauss_legendre, TriRule};

/// Trace tables for one subface of a parent triangle edge.
#[derive(Debug, Clone)]
pub struct EdgeSubTrace {
    pub t0: f64,
    pub t1: f64,
    /// Owning subcell (reference topology index).
    pub sub: usize,
    /// Reference coordinates of the Gauss points, ordered by edge parameter.
    pub pts: Vec<Vec2>,
    /// Basis values, one row per Gauss point.
    pub basis: DMatrix<f64>,
    /// Degree-(k+1) extension values.
    pub basis_ext: DMatrix<f64>,
    /// Subresolution function values, row per point, column per subcell.
    pub phi: DMatrix<f64>,
}

/// Trace tables for one cell-interior subcell face.
#[derive(Debug, Clone)]
pub struct IfaceTrace {
    pub pts: Vec<Vec2>,
    pub basis_ext: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverTables {
    pub n: usize,
    pub n_ext: usize,
    pub n_gl: usize,
    /// Gauss-Legendre weights on [0, 1], summing to one.
    pub gl_w: Vec<f64>,
    pub vol_pts: Vec<Vec2>,
    /// Volume weights on the reference triangle, summing to 1/2.
    pub vol_w: Vec<f64>,
    pub vol_basis: DMatrix<f64>,
    /// Reference-coordinate basis gradients at the volume points.
    pub vol_gx: DMatrix<f64>,
    pub vol_gy: DMatrix<f64>,
    pub vol_basis_ext: DMatrix<f64>,
    /// Per parent edge, per subface in ascending parameter order.
    pub edge_trace: [Vec<EdgeSubTrace>; 3],
    /// Per reference interior face, aligned with the topology's list.
    pub iface_trace: Vec<IfaceTrace>,
    /// Modal differentiation matrices: coefficients of the reference x and y
    /// derivatives of a degree-k expansion.
    pub dx: DMatrix<f64>,
    pub dy: DMatrix<f64>,
}

fn eval_rows(basis: &Basis, pts: &[Vec2]) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(pts.len(), n);
    let mut row = vec![0.0; n];
    for (i, &p) in pts.iter().enumerate() {
        basis.eval(p, &mut row);
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

pub fn build_tables(ops: &RefOperators) -> SolverTables {
    let k = ops.k;
    let n = ops.n;
    let basis = &ops.basis;
    let basis_ext = Basis::new(k + 1);
    let n_ext = basis_ext.len();
    let topo = &ops.topo;

    let rule = TriRule::with_degree(2 * k + 2);
    let vol_pts = rule.pts.clone();
    let vol_w = rule.w.clone();
    let vol_basis = eval_rows(basis, &vol_pts);
    let vol_basis_ext = eval_rows(&basis_ext, &vol_pts);
    let mut vol_gx = DMatrix::zeros(vol_pts.len(), n);
    let mut vol_gy = DMatrix::zeros(vol_pts.len(), n);
    let mut grads = vec![Vec2::zeros(); n];
    for (i, &p) in vol_pts.iter().enumerate() {
        basis.eval_grad(p, &mut grads);
        for j in 0..n {
            vol_gx[(i, j)] = grads[j].x;
            vol_gy[(i, j)] = grads[j].y;
        }
    }

    // D_x[(q, p)] = integral of sigma_q d(sigma_p)/dx: exact because the
    // derivative stays inside the degree-k space.
    let mut dx = DMatrix::zeros(n, n);
    let mut dy = DMatrix::zeros(n, n);
    for q in 0..n {
        for p in 0..n {
            let (mut ax, mut ay) = (0.0, 0.0);
            for i in 0..vol_pts.len() {
                ax += vol_w[i] * vol_basis[(i, q)] * vol_gx[(i, p)];
                ay += vol_w[i] * vol_basis[(i, q)] * vol_gy[(i, p)];
            }
            dx[(q, p)] = ax;
            dy[(q, p)] = ay;
        }
    }

    let (gl_pts, gl_w) = gauss_legendre(k + 2);
    let n_gl = gl_pts.len();

    let phi_of = |b: &DMatrix<f64>| -> DMatrix<f64> {
        // phi_m(x) = sum_p subres[m][p] sigma_p(x); rows of b are points.
        b * ops.subres.transpose()
    };

    let edge_trace = std::array::from_fn(|e| {
        topo.edge_subfaces[e]
            .iter()
            .map(|&bi| {
                let bf = &topo.boundary_subfaces[bi];
                let pts: Vec<Vec2> =
                    gl_pts.iter().map(|&t| bf.a + (bf.b - bf.a) * t).collect();
                let b = eval_rows(basis, &pts);
                EdgeSubTrace {
                    t0: bf.t0,
                    t1: bf.t1,
                    sub: bf.sub,
                    phi: phi_of(&b),
                    basis: b,
                    basis_ext: eval_rows(&basis_ext, &pts),
                    pts,
                }
            })
            .collect()
    });

    let iface_trace = topo
        .interior_faces
        .iter()
        .map(|f| {
            let pts: Vec<Vec2> = gl_pts.iter().map(|&t| f.a + (f.b - f.a) * t).collect();
            IfaceTrace { basis_ext: eval_rows(&basis_ext, &pts), pts }
        })
        .collect();

    SolverTables {
        n,
        n_ext,
        n_gl,
        gl_w,
        vol_pts,
        vol_w,
        vol_basis,
        vol_gx,
        vol_gy,
        vol_basis_ext,
        edge_trace,
        iface_trace,
        dx,
        dy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_operators;
    use crate::subdivision::{SchemeKind, SubdivisionScheme};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tables(kind: SchemeKind, k: usize) -> (SolverTables, RefOperators) {
        let ops = build_operators(SubdivisionScheme { kind, k }).unwrap();
        (build_tables(&ops), ops)
    }

    #[test]
    fn surface_rule_tiles_each_edge()  {
        let (t, _) = tables(SchemeKind::StructuredGaussLobatto, 3);
        assert_abs_diff_eq!(t.gl_w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for e in 0..3 {
            let covered: f64 = t.edge_trace[e].iter().map(|s| s.t1 - s.t0).sum();
            assert_abs_diff_eq!(covered, 1.0, epsilon = 1e-13);
            // Edge 0 runs along y = 0; its trace points must sit there.
            if e == 0 {
                for s in &t.edge_trace[0] {
                    assert!(s.pts.iter().all(|p| p.y.abs() < 1e-14));
                }
            }
        }
    }

    #[test]
    fn volume_rule_integrates_the_basis() {
        let (t, _) = tables(SchemeKind::VoronoiUniform, 2);
        assert_abs_diff_eq!(t.vol_w.iter().sum::<f64>(), 0.5, epsilon = 1e-14);
        // Orthogonality to the constant: integral of sigma_q is zero except
        // for the constant mode, whose integral is 1/sqrt(2).
        for q in 0..t.n {
            let integral: f64 =
                (0..t.vol_pts.len()).map(|i| t.vol_w[i] * t.vol_basis[(i, q)]).sum();
            let expected = if q == 0 { 1.0 / 2f64.sqrt() } else { 0.0 };
            assert_abs_diff_eq!(integral, expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn differentiation_matrices_reproduce_gradients() {
        let (t, ops) = tables(SchemeKind::StructuredUniform, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u: Vec<f64> = (0..t.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let du_x: Vec<f64> = (0..t.n)
            .map(|q| (0..t.n).map(|p| t.dx[(q, p)] * u[p]).sum())
            .collect();
        let du_y: Vec<f64> = (0..t.n)
            .map(|q| (0..t.n).map(|p| t.dy[(q, p)] * u[p]).sum())
            .collect();
        let mut vals = vec![0.0; t.n];
        let mut grads = vec![Vec2::zeros(); t.n];
        for &p in &[Vec2::new(0.21, 0.36), Vec2::new(0.6, 0.15)] {
            ops.basis.eval(p, &mut vals);
            ops.basis.eval_grad(p, &mut grads);
            let dx_direct: f64 = (0..t.n).map(|q| u[q] * grads[q].x).sum();
            let dy_direct: f64 = (0..t.n).map(|q| u[q] * grads[q].y).sum();
            let dx_modal: f64 = (0..t.n).map(|q| du_x[q] * vals[q]).sum();
            let dy_modal: f64 = (0..t.n).map(|q| du_y[q] * vals[q]).sum();
            assert_abs_diff_eq!(dx_modal, dx_direct, epsilon = 1e-11);
            assert_abs_diff_eq!(dy_modal, dy_direct, epsilon = 1e-11);
        }
    }

    #[test]
    fn subresolution_traces_partition_unity() {
        for kind in SchemeKind::ALL {
            let (t, _) = tables(kind, kind.max_order().min(3));
            for e in 0..3 {
                for s in &t.edge_trace[e] {
                    for g in 0..t.n_gl {
                        let total: f64 = (0..t.n).map(|m| s.phi[(g, m)]).sum();
                        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_points_match_on_opposite_traversals() {
        // Parameter t on one side corresponds to 1 - t on the other; with
        // symmetric cuts and Gauss points the sampled parameter sets must
        // coincide after reversal to round-off.
        for kind in SchemeKind::ALL {
            let (t, ops) = tables(kind, kind.max_order().min(2));
            let n_seg = ops.topo.edge_cuts.len() - 1;
            let params: Vec<Vec<f64>> = t.edge_trace[0]
                .iter()
                .map(|s| s.pts.iter().map(|p| p.x).collect())
                .collect();
            for seg in 0..n_seg {
                for g in 0..t.n_gl {
                    let fwd = params[seg][g];
                    let rev = params[n_seg - 1 - seg][t.n_gl - 1 - g];
                    assert_abs_diff_eq!(fwd, 1.0 - rev, epsilon = 1e-15);
                }
            }
        }
    }
}
