//! Cell-independent operator set on the reference triangle: projection matrix
//! from moments to submeans, subcell-face incidence, graph-Laplacian
//! pseudo-inverse, and subresolution basis coefficients.
//!
//! With an orthonormal basis the reference mass matrix is the identity and the
//! physical mass matrix of a cell of area |w| is 2 |w| times the identity, so
//! every operator here is shared by all cells of a mesh.

use nalgebra::DMatrix;

use crate::basis::{bernstein_eval, Basis};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::quadrature::TriRule;
use crate::subdivision::{build_subdivision, SubcellTopology, SubdivisionScheme};

/// Operators shared by every cell using one subdivision scheme.
#[derive(Debug, Clone)]
pub struct RefOperators {
    pub k: usize,
    /// N_k: number of modes and of subcells.
    pub n: usize,
    pub basis: Basis,
    pub topo: SubcellTopology,
    /// Projection P: row m, column p holds the mean of basis mode p over
    /// subcell m. Maps moment vectors to submean vectors.
    pub proj: DMatrix<f64>,
    pub proj_inv: DMatrix<f64>,
    /// Signed incidence A (N_k x N_f): +1 where the face leaves the subcell,
    /// -1 where it enters.
    pub adjacency: DMatrix<f64>,
    /// Graph Laplacian L = A A^t.
    pub laplacian: DMatrix<f64>,
    /// Inverse of L on the orthogonal complement of constants.
    pub lap_pinv: DMatrix<f64>,
    /// Row m holds the basis coefficients of the subresolution function
    /// phi_m, the L2 projection of the subcell-m indicator. Equals
    /// diag(reference areas) * P.
    pub subres: DMatrix<f64>,
}

pub fn build_operators(scheme: SubdivisionScheme) -> Result<RefOperators> {
    let topo = build_subdivision(scheme)?;
    let basis = Basis::new(scheme.k);
    let n = basis.len();
    debug_assert_eq!(n, topo.n_sub);

    let proj = projection_matrix(&basis, &topo);
    let cond = condition(&proj).cond_abs;
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::SingularProjection(format!(
            "projection matrix condition {cond:.3e} for {} k={}",
            scheme.kind.name(),
            scheme.k
        )));
    }
    let proj_inv = proj.clone().try_inverse().ok_or_else(|| {
        Error::SingularProjection(format!(
            "projection matrix is singular for {} k={}",
            scheme.kind.name(),
            scheme.k
        ))
    })?;

    let n_f = topo.interior_faces.len();
    let mut adjacency = DMatrix::zeros(n, n_f);
    for (f, face) in topo.interior_faces.iter().enumerate() {
        adjacency[(face.sub_left, f)] = 1.0;
        adjacency[(face.sub_right, f)] = -1.0;
    }
    let laplacian = &adjacency * adjacency.transpose();
    let lap_pinv = graph_laplacian_pinv(&laplacian)?;

    let mut subres = proj.clone();
    for m in 0..n {
        let a = topo.ref_areas[m];
        for p in 0..n {
            subres[(m, p)] *= a;
        }
    }

    Ok(RefOperators {
        k: scheme.k,
        n,
        basis,
        topo,
        proj,
        proj_inv,
        adjacency,
        laplacian,
        lap_pinv,
        subres,
    })
}

/// Mean value of every basis mode over every subcell polygon.
pub fn projection_matrix(basis: &Basis, topo: &SubcellTopology) -> DMatrix<f64> {
    let n = basis.len();
    let rule = TriRule::with_degree(2 * basis.k + 2);
    let mut p_mat = DMatrix::zeros(topo.n_sub, n);
    let mut vals = vec![0.0; n];
    for (m, poly) in topo.polygons.iter().enumerate() {
        let acc = integrate_basis_over_polygon(basis, poly, &rule, &mut vals);
        for p in 0..n {
            p_mat[(m, p)] = acc[p] / topo.ref_areas[m];
        }
    }
    p_mat
}

fn integrate_basis_over_polygon(
    basis: &Basis,
    poly: &[Vec2],
    rule: &TriRule,
    vals: &mut [f64],
) -> Vec<f64> {
    let n = basis.len();
    let nv = poly.len();
    let c = poly.iter().fold(Vec2::zeros(), |s, p| s + p) / nv as f64;
    let mut acc = vec![0.0; n];
    for i in 0..nv {
        let (v1, v2) = (poly[i], poly[(i + 1) % nv]);
        let (e1, e2) = (v1 - c, v2 - c);
        let det = e1.x * e2.y - e1.y * e2.x;
        for (q, w) in rule.pts.iter().zip(&rule.w) {
            let x = c + e1 * q.x + e2 * q.y;
            basis.eval(x, vals);
            for p in 0..n {
                acc[p] += det * w * vals[p];
            }
        }
    }
    acc
}

/// Inverse of a connected-graph Laplacian on the complement of constants:
/// (L + lambda Pi)^-1 - Pi / lambda with Pi the averaging projector. The
/// result does not depend on lambda; lambda is set to the mean diagonal of L
/// for scale-matched conditioning.
pub fn graph_laplacian_pinv(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lambda = l.diagonal().sum() / l.nrows() as f64;
    graph_laplacian_pinv_with_lambda(l, if lambda > 0.0 { lambda } else { 1.0 })
}

pub fn graph_laplacian_pinv_with_lambda(l: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    if n == 1 {
        return Ok(DMatrix::zeros(1, 1));
    }
    let pi = DMatrix::from_element(n, n, 1.0 / n as f64);
    let shifted = l + pi.scale(lambda);
    let inv = shifted
        .try_inverse()
        .ok_or_else(|| Error::DisconnectedGraph("shifted Laplacian is singular".into()))?;
    let pinv = inv - pi.scale(1.0 / lambda);

    // Rank deficiency beyond the constant kernel means a disconnected graph.
    let residual = (&pinv * l) - (DMatrix::identity(n, n) - &pi);
    if residual.amax() > 1e-9 {
        return Err(Error::DisconnectedGraph(format!(
            "Laplacian pseudo-inverse residual {:.3e}",
            residual.amax()
        )));
    }
    Ok(pinv)
}

/// Condition numbers of a projection matrix under the infinity norm, both with
/// the conventional absolute row sums and with the literal signless row sums.
#[derive(Debug, Clone, Copy)]
pub struct ConditionReport {
    pub cond_abs: f64,
    pub cond_literal: f64,
}

pub fn condition(p: &DMatrix<f64>) -> ConditionReport {
    let inv = match p.clone().try_inverse() {
        Some(inv) => inv,
        None => {
            return ConditionReport { cond_abs: f64::INFINITY, cond_literal: f64::INFINITY }
        }
    };
    let row_sum = |m: &DMatrix<f64>, absolute: bool| -> f64 {
        (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| if absolute { m[(i, j)].abs() } else { m[(i, j)] })
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    ConditionReport {
        cond_abs: row_sum(p, true) * row_sum(&inv, true),
        cond_literal: row_sum(p, false) * row_sum(&inv, false),
    }
}

/// Projection matrix in the Bernstein basis, used to audit condition numbers:
/// Bernstein modes form a nonnegative partition of unity, so the forward
/// infinity norm is exactly one and the condition number is basis-meaningful.
pub fn bernstein_projection(topo: &SubcellTopology) -> DMatrix<f64> {
    let k = topo.scheme.k;
    let n = topo.n_sub;
    let rule = TriRule::with_degree(2 * k + 2);
    let mut p_mat = DMatrix::zeros(n, n);
    let mut vals = vec![0.0; n];
    for (m, poly) in topo.polygons.iter().enumerate() {
        let nv = poly.len();
        let c = poly.iter().fold(Vec2::zeros(), |s, p| s + p) / nv as f64;
        for i in 0..nv {
            let (v1, v2) = (poly[i], poly[(i + 1) % nv]);
            let (e1, e2) = (v1 - c, v2 - c);
            let det = e1.x * e2.y - e1.y * e2.x;
            for (q, w) in rule.pts.iter().zip(&rule.w) {
                let x = c + e1 * q.x + e2 * q.y;
                bernstein_eval(k, x, &mut vals);
                for p in 0..n {
                    p_mat[(m, p)] += det * w * vals[p];
                }
            }
        }
        for p in 0..n {
            p_mat[(m, p)] /= topo.ref_areas[m];
        }
    }
    p_mat
}

/// Recomputes the projection matrix directly on a physical triangle by mapping
/// the subcell polygons through the cell's affine map. Equals the reference
/// projection to round-off; exists to demonstrate cell independence.
pub fn physical_projection(
    ops: &RefOperators,
    a: Vec2,
    b: Vec2,
    c: Vec2,
) -> DMatrix<f64> {
    use crate::geometry::AffineMap;
    let map = AffineMap::from_triangle(a, b, c);
    let n = ops.n;
    let rule = TriRule::with_degree(2 * ops.k + 2);
    let mut p_mat = DMatrix::zeros(n, n);
    let mut vals = vec![0.0; n];
    for (m, poly) in ops.topo.polygons.iter().enumerate() {
        let phys: Vec<Vec2> = poly.iter().map(|&p| map.apply(p)).collect();
        let nv = phys.len();
        let centroid = phys.iter().fold(Vec2::zeros(), |s, p| s + p) / nv as f64;
        let mut area = 0.0;
        for i in 0..nv {
            let (v1, v2) = (phys[i], phys[(i + 1) % nv]);
            let (e1, e2) = (v1 - centroid, v2 - centroid);
            let det = e1.x * e2.y - e1.y * e2.x;
            area += 0.5 * det;
            for (q, w) in rule.pts.iter().zip(&rule.w) {
                let x = centroid + e1 * q.x + e2 * q.y;
                ops.basis.eval(map.pull_back(x), &mut vals);
                for p in 0..n {
                    p_mat[(m, p)] += det * w * vals[p];
                }
            }
        }
        for p in 0..n {
            p_mat[(m, p)] /= area;
        }
    }
    p_mat
}
