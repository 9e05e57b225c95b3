//! Polynomial bases on the reference triangle {x >= 0, y >= 0, x + y <= 1}.
//!
//! The modal basis is orthonormal for the inner product (f, g) = integral of
//! f g over the reference triangle, so the mass matrix of a physical cell of
//! area |w| is 2 |w| times the identity. Modes are ordered by total degree,
//! making every leading block a basis of the lower-degree space.
//!
//! A Bernstein evaluator is provided for conditioning audits of subcell
//! projection matrices; it is not used by the solver itself.

use crate::geometry::Vec2;

/// Normalized Jacobi polynomial values P~_0..P~_n at x in [-1, 1], orthonormal
/// for the weight (1-x)^alpha (1+x)^beta.
fn jacobi_row(x: f64, alpha: usize, beta: usize, n: usize, out: &mut [f64]) {
    let (al, be) = (alpha as f64, beta as f64);
    let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
    let gamma0 = 2f64.powf(al + be + 1.0) / (al + be + 1.0) * fact(alpha) * fact(beta)
        / fact(alpha + beta);
    out[0] = 1.0 / gamma0.sqrt();
    if n == 0 {
        return;
    }
    let gamma1 = (al + 1.0) * (be + 1.0) / (al + be + 3.0) * gamma0;
    out[1] = ((al + be + 2.0) * x / 2.0 + (al - be) / 2.0) / gamma1.sqrt();
    let mut aold = 2.0 / (2.0 + al + be) * ((al + 1.0) * (be + 1.0) / (al + be + 3.0)).sqrt();
    for i in 1..n {
        let h1 = 2.0 * i as f64 + al + be;
        let anew = 2.0 / (h1 + 2.0)
            * ((i as f64 + 1.0) * (i as f64 + 1.0 + al + be) * (i as f64 + 1.0 + al)
                * (i as f64 + 1.0 + be)
                / ((h1 + 1.0) * (h1 + 3.0)))
                .sqrt();
        let bnew = -(al * al - be * be) / (h1 * (h1 + 2.0));
        out[i + 1] = (-aold * out[i - 1] + (x - bnew) * out[i]) / anew;
        aold = anew;
    }
}

fn jacobi(x: f64, alpha: usize, beta: usize, n: usize) -> f64 {
    let mut buf = vec![0.0; n + 1];
    jacobi_row(x, alpha, beta, n, &mut buf);
    buf[n]
}

/// Derivative of the normalized Jacobi polynomial P~_n.
fn jacobi_deriv(x: f64, alpha: usize, beta: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    (nf * (nf + alpha as f64 + beta as f64 + 1.0)).sqrt() * jacobi(x, alpha + 1, beta + 1, n - 1)
}

/// Number of modes of total degree <= k in two variables.
pub fn n_modes(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Orthonormal modal basis of degree k on the reference triangle.
#[derive(Debug, Clone)]
pub struct Basis {
    pub k: usize,
    /// (i, j) Jacobi index pairs, grouped by total degree i + j ascending.
    modes: Vec<(usize, usize)>,
}

impl Basis {
    pub fn new(k: usize) -> Self {
        let mut modes = Vec::with_capacity(n_modes(k));
        for d in 0..=k {
            for i in 0..=d {
                modes.push((i, d - i));
            }
        }
        Basis { k, modes }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Total degree of each mode, ascending.
    pub fn degree_of(&self, mode: usize) -> usize {
        let (i, j) = self.modes[mode];
        i + j
    }

    /// Collapsed coordinates (a, b) for a point of the bi-unit triangle.
    fn collapsed(r: f64, s: f64) -> (f64, f64) {
        let a = if (1.0 - s).abs() > 1e-12 { 2.0 * (1.0 + r) / (1.0 - s) - 1.0 } else { -1.0 };
        (a, s)
    }

    /// Evaluates all modes at a reference-triangle point.
    pub fn eval(&self, p: Vec2, out: &mut [f64]) {
        let (r, s) = (2.0 * p.x - 1.0, 2.0 * p.y - 1.0);
        let (a, b) = Self::collapsed(r, s);
        for (m, &(i, j)) in self.modes.iter().enumerate() {
            let psi = 2f64.sqrt() * jacobi(a, 0, 0, i) * jacobi(b, 2 * i + 1, 0, j)
                * (0.5 * (1.0 - b)).powi(i as i32) * 2f64.powi(i as i32);
            // Factor 2: unit-triangle modes are the bi-unit modes scaled to keep
            // orthonormality under the quarter-area map.
            out[m] = 2.0 * psi;
        }
    }

    /// Evaluates all mode gradients (d/dx, d/dy) at a reference-triangle point.
    pub fn eval_grad(&self, p: Vec2, out: &mut [Vec2]) {
        let (r, s) = (2.0 * p.x - 1.0, 2.0 * p.y - 1.0);
        let (a, b) = Self::collapsed(r, s);
        for (m, &(i, j)) in self.modes.iter().enumerate() {
            let fa = jacobi(a, 0, 0, i);
            let dfa = jacobi_deriv(a, 0, 0, i);
            let gb = jacobi(b, 2 * i + 1, 0, j);
            let dgb = jacobi_deriv(b, 2 * i + 1, 0, j);
            let half1mb = 0.5 * (1.0 - b);
            let pow_im1 = if i > 0 { half1mb.powi(i as i32 - 1) } else { 0.0 };
            let pow_i = half1mb.powi(i as i32);

            let mut dpsi_dr = dfa * gb;
            if i > 0 {
                dpsi_dr *= pow_im1;
            }
            let mut dpsi_ds = dfa * gb * 0.5 * (1.0 + a);
            if i > 0 {
                dpsi_ds *= pow_im1;
            }
            let mut tmp = dgb * pow_i;
            if i > 0 {
                tmp -= 0.5 * i as f64 * gb * pow_im1;
            }
            dpsi_ds += fa * tmp;

            let norm = 2f64.sqrt() * 2f64.powi(i as i32);
            dpsi_dr *= norm;
            dpsi_ds *= norm;
            // Chain rule through (r, s) = (2x - 1, 2y - 1) and the unit-triangle
            // scaling factor 2.
            out[m] = Vec2::new(4.0 * dpsi_dr, 4.0 * dpsi_ds);
        }
    }
}

/// Bernstein basis of degree k: modes indexed by (a, b, c), a + b + c = k, with
/// value binom(k; a, b, c) l0^a l1^b l2^c in barycentric coordinates. All modes
/// are nonnegative on the triangle and sum to one.
pub fn bernstein_eval(k: usize, p: Vec2, out: &mut [f64]) {
    let (l1, l2) = (p.x, p.y);
    let l0 = 1.0 - l1 - l2;
    let fact = |m: usize| (1..=m).map(|i| i as f64).product::<f64>();
    let mut m = 0;
    for a in (0..=k).rev() {
        for b in (0..=(k - a)).rev() {
            let c = k - a - b;
            let coef = fact(k) / (fact(a) * fact(b) * fact(c));
            out[m] = coef * l0.powi(a as i32) * l1.powi(b as i32) * l2.powi(c as i32);
            m += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::TriRule;
    use approx::assert_abs_diff_eq;

    #[test]
    fn first_mode_is_sqrt_two() {
        let basis = Basis::new(3);
        let mut vals = vec![0.0; basis.len()];
        basis.eval(Vec2::new(0.21, 0.37), &mut vals);
        assert_abs_diff_eq!(vals[0], 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn orthonormal_up_to_degree_six() {
        for k in [1usize, 2, 3, 5, 6] {
            let basis = Basis::new(k);
            let n = basis.len();
            let rule = TriRule::with_degree(2 * k + 2);
            let mut gram = vec![0.0; n * n];
            let mut vals = vec![0.0; n];
            for (p, w) in rule.pts.iter().zip(&rule.w) {
                basis.eval(*p, &mut vals);
                for a in 0..n {
                    for b in 0..n {
                        gram[a * n + b] += w * vals[a] * vals[b];
                    }
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(gram[a * n + b], want, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn modes_ordered_by_total_degree() {
        let basis = Basis::new(4);
        let mut last = 0;
        for m in 0..basis.len() {
            let d = basis.degree_of(m);
            assert!(d >= last && d <= basis.k);
            last = d;
        }
        assert_eq!(basis.degree_of(0), 0);
        assert_eq!(basis.degree_of(basis.len() - 1), 4);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let basis = Basis::new(5);
        let n = basis.len();
        let p = Vec2::new(0.31, 0.42);
        let h = 1e-6;
        let mut g = vec![Vec2::zeros(); n];
        basis.eval_grad(p, &mut g);
        let mut vp = vec![0.0; n];
        let mut vm = vec![0.0; n];
        for (dim, e) in [Vec2::new(h, 0.0), Vec2::new(0.0, h)].iter().enumerate() {
            basis.eval(p + *e, &mut vp);
            basis.eval(p - *e, &mut vm);
            for m in 0..n {
                let fd = (vp[m] - vm[m]) / (2.0 * h);
                assert_abs_diff_eq!(g[m][dim], fd, epsilon = 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn gradient_near_collapsed_apex_is_finite() {
        let basis = Basis::new(5);
        let mut g = vec![Vec2::zeros(); basis.len()];
        basis.eval_grad(Vec2::new(1e-14, 1.0 - 1e-14), &mut g);
        assert!(g.iter().all(|v| v.x.is_finite() && v.y.is_finite()));
    }

    #[test]
    fn bernstein_partition_of_unity() {
        for k in 1..=5 {
            let n = n_modes(k);
            let mut vals = vec![0.0; n];
            for p in [Vec2::new(0.2, 0.3), Vec2::new(0.05, 0.9), Vec2::new(0.6, 0.1)] {
                bernstein_eval(k, p, &mut vals);
                assert!(vals.iter().all(|&v| v >= 0.0));
                assert_abs_diff_eq!(vals.iter().sum::<f64>(), 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn bernstein_spans_linears_at_degree_one() {
        // Degree-one Bernstein modes are the barycentric coordinates themselves.
        let mut vals = vec![0.0; 3];
        bernstein_eval(1, Vec2::new(0.25, 0.6), &mut vals);
        assert_abs_diff_eq!(vals[0], 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(vals[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(vals[2], 0.6, epsilon = 1e-15);
    }
}
