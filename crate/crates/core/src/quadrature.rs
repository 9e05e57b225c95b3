//! Quadrature rules: Gauss-Legendre segments, Gauss-Lobatto point sets, and a
//! collapsed-coordinate product rule on the reference triangle.
//!
//! The reference triangle is {(x, y) : x >= 0, y >= 0, x + y <= 1}, area 1/2.

use crate::geometry::Vec2;

/// Legendre polynomial P_n and its derivative at x, by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss-Legendre rule on [0, 1]. Exact for polynomials of degree 2n-1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "empty quadrature rule");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, refined by Newton on P_n.
        let mut t = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        x[i] = 0.5 * (t + 1.0);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    // Symmetrize so that x[i] + x[n-1-i] == 1 and w[i] == w[n-1-i] hold
    // exactly; cross-cell trace matching relies on it.
    for i in 0..n / 2 {
        let s = 0.5 * (x[i] + 1.0 - x[n - 1 - i]);
        x[i] = s;
        x[n - 1 - i] = 1.0 - s;
        let wm = 0.5 * (w[i] + w[n - 1 - i]);
        w[i] = wm;
        w[n - 1 - i] = wm;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.5;
    }
    (x, w)
}

/// n-point Gauss-Lobatto point set on [0, 1], endpoints included, sorted.
/// Interior points are the roots of P'_{n-1}.
pub fn gauss_lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 2, "Gauss-Lobatto needs at least the two endpoints");
    let mut pts = vec![0.0];
    let m = n - 1;
    for i in 1..m {
        // Newton on P'_m with a cosine initial guess.
        let mut t = -((i as f64) * std::f64::consts::PI / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, t);
            // P''_m from the Legendre ODE: (1-x^2) P'' = 2x P' - m(m+1) P
            let ddp = (2.0 * t * dp - (m * (m + 1)) as f64 * p) / (1.0 - t * t);
            let dt = dp / ddp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        pts.push(0.5 * (t + 1.0));
    }
    pts.push(1.0);
    // Symmetrize so that pts[i] + pts[n-1-i] == 1 holds exactly.
    for i in 0..n / 2 {
        let s = 0.5 * (pts[i] + 1.0 - pts[n - 1 - i]);
        pts[i] = s;
        pts[n - 1 - i] = 1.0 - s;
    }
    pts
}

/// Quadrature rule on the reference triangle with strictly positive weights.
#[derive(Debug, Clone)]
pub struct TriRule {
    pub pts: Vec<Vec2>,
    pub w: Vec<f64>,
}

impl TriRule {
    /// Product Gauss-Legendre rule mapped through (u, v) -> (u(1-v), v).
    /// Exact for total degree <= `degree`; weights sum to the reference area 1/2.
    pub fn with_degree(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let (gx, gw) = gauss_legendre(n.max(1));
        let mut pts = Vec::with_capacity(n * n);
        let mut w = Vec::with_capacity(n * n);
        for (u, wu) in gx.iter().zip(&gw) {
            for (v, wv) in gx.iter().zip(&gw) {
                pts.push(Vec2::new(u * (1.0 - v), *v));
                w.push(wu * wv * (1.0 - v));
            }
        }
        TriRule { pts, w }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }
}

/// Integrates `f` over an arbitrary triangle (a, b, c) with the given rule.
pub fn integrate_tri<F: FnMut(Vec2) -> f64>(rule: &TriRule, a: Vec2, b: Vec2, c: Vec2, mut f: F) -> f64 {
    let e1 = b - a;
    let e2 = c - a;
    let det = e1.x * e2.y - e1.y * e2.x;
    let mut acc = 0.0;
    for (p, w) in rule.pts.iter().zip(&rule.w) {
        let x = a + e1 * p.x + e2 * p.y;
        acc += w * f(x);
    }
    // Rule weights integrate over the reference triangle (measure 1/2); the affine
    // map scales measure by |det| relative to a unit parallelogram, i.e. 2 |tri|.
    acc * det
}

/// Integrates `f` over a simple polygon by fanning triangles from the centroid.
/// The polygon must be oriented counter-clockwise.
pub fn integrate_polygon<F: FnMut(Vec2) -> f64>(rule: &TriRule, poly: &[Vec2], mut f: F) -> f64 {
    let n = poly.len();
    let c = poly.iter().fold(Vec2::zeros(), |s, p| s + p) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += integrate_tri(rule, c, poly[i], poly[(i + 1) % n], &mut f);
    }
    acc
}
