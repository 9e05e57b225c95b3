//! Small planar geometry helpers shared across mesh, subdivision, and solver code.

use nalgebra::{Matrix2, Vector2};

/// Planar point or vector.
pub type Vec2 = Vector2<f64>;
/// 2x2 matrix, used for affine map Jacobians.
pub type Mat2 = Matrix2<f64>;

/// Signed area of a simple polygon (positive when counter-clockwise).
pub fn polygon_signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

/// Centroid of a simple polygon with nonzero area.
pub fn polygon_centroid(poly: &[Vec2]) -> Vec2 {
    let n = poly.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut a = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let cross = p.x * q.y - q.x * p.y;
        a += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Vec2::new(cx / (3.0 * a), cy / (3.0 * a))
}

/// Affine map x = origin + J xi from the reference triangle to a physical triangle.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub origin: Vec2,
    pub jac: Mat2,
    pub inv_jac: Mat2,
    /// Jacobian determinant; equals twice the physical triangle area when the
    /// vertex order is counter-clockwise.
    pub det: f64,
}

impl AffineMap {
    /// Map sending reference vertices (0,0), (1,0), (0,1) to a, b, c.
    pub fn from_triangle(a: Vec2, b: Vec2, c: Vec2) -> Self {
        let jac = Mat2::from_columns(&[b - a, c - a]);
        let det = jac.m11 * jac.m22 - jac.m12 * jac.m21;
        let inv_jac = Mat2::new(jac.m22, -jac.m12, -jac.m21, jac.m11) / det;
        AffineMap { origin: a, jac, inv_jac, det }
    }

    pub fn apply(&self, xi: Vec2) -> Vec2 {
        self.origin + self.jac * xi
    }

    pub fn pull_back(&self, x: Vec2) -> Vec2 {
        self.inv_jac * (x - self.origin)
    }

    /// Transforms a reference-space gradient to a physical-space gradient.
    pub fn push_gradient(&self, grad_ref: Vec2) -> Vec2 {
        self.inv_jac.transpose() * grad_ref
    }
}

/// Outward unit normal of the directed segment a -> b for a counter-clockwise
/// boundary walk (the normal points to the right of the direction of travel).
pub fn outward_normal(a: Vec2, b: Vec2) -> Vec2 {
    let t = b - a;
    let len = t.norm();
    Vec2::new(t.y / len, -t.x / len)
}
