//! Conservation-law models: analytic fluxes, wave speeds, admissibility sets,
//! and the global Lax-Friedrichs numerical flux.
//!
//! States are conservative-variable slices: length 1 for scalar models, and
//! (rho, q_x, q_y, E) for the Euler system.

use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const MAX_VARS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// Linear advection with constant velocity.
    Advection { a: Vec2 },
    /// Solid-body rotation: space-dependent velocity (1/2 - y, x - 1/2).
    Rotation,
    /// Burgers flux (u^2/2, u^2/2).
    Burgers,
    /// Nonconvex flux (sin u, cos u).
    Kpp,
    /// Compressible Euler with a gamma gas law.
    Euler { gamma: f64 },
}

impl Model {
    pub fn n_vars(&self) -> usize {
        match self {
            Model::Euler { .. } => 4,
            _ => 1,
        }
    }

    /// Space-dependent fluxes need the evaluation position.
    pub fn is_space_dependent(&self) -> bool {
        matches!(self, Model::Rotation)
    }

    /// The flux is linear in the state (possibly with space-varying
    /// coefficients), making degree-k flux integrands polynomial.
    pub fn is_linear(&self) -> bool {
        matches!(self, Model::Advection { .. } | Model::Rotation)
    }

    /// Analytic flux; `out[v]` receives the (x, y) flux components of
    /// variable v. Total function: a nonphysical Euler state writes NaN
    /// columns, which downstream admissibility detection picks up.
    pub fn flux_quiet(&self, u: &[f64], x: Vec2, out: &mut [[f64; 2]]) {
        match self {
            Model::Advection { a } => {
                out[0] = [a.x * u[0], a.y * u[0]];
            }
            Model::Rotation => {
                out[0] = [(0.5 - x.y) * u[0], (x.x - 0.5) * u[0]];
            }
            Model::Burgers => {
                let f = 0.5 * u[0] * u[0];
                out[0] = [f, f];
            }
            Model::Kpp => {
                out[0] = [u[0].sin(), u[0].cos()];
            }
            Model::Euler { gamma } => {
                let (rho, qx, qy, e) = (u[0], u[1], u[2], u[3]);
                if !(rho > 0.0) {
                    out[0] = [f64::NAN, f64::NAN];
                    out[1] = [f64::NAN, f64::NAN];
                    out[2] = [f64::NAN, f64::NAN];
                    out[3] = [f64::NAN, f64::NAN];
                    return;
                }
                let (vx, vy) = (qx / rho, qy / rho);
                let p = (gamma - 1.0) * (e - 0.5 * (qx * qx + qy * qy) / rho);
                out[0] = [qx, qy];
                out[1] = [qx * vx + p, qx * vy];
                out[2] = [qy * vx, qy * vy + p];
                out[3] = [(e + p) * vx, (e + p) * vy];
            }
        }
    }

    /// Checked flux evaluation.
    pub fn flux(&self, u: &[f64], x: Vec2, out: &mut [[f64; 2]]) -> Result<()> {
        if let Model::Euler { .. } = self {
            if !(u[0] > 0.0) {
                return Err(Error::NonPhysicalState(format!(
                    "flux of Euler state with rho = {:.6e}",
                    u[0]
                )));
            }
        }
        self.flux_quiet(u, x, out);
        Ok(())
    }

    /// Spectral norm of the flux Jacobian at one state: an upper bound for the
    /// directional wave speed in every direction. Assumes an admissible state.
    pub fn wavespeed(&self, u: &[f64], x: Vec2) -> f64 {
        match self {
            Model::Advection { a } => a.norm(),
            Model::Rotation => Vec2::new(0.5 - x.y, x.x - 0.5).norm(),
            Model::Burgers => u[0].abs() * 2f64.sqrt(),
            Model::Kpp => 1.0,
            Model::Euler { gamma } => {
                let rho = u[0];
                let v = (u[1] * u[1] + u[2] * u[2]).sqrt() / rho;
                let p = (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / rho);
                v + (gamma * p / rho).max(0.0).sqrt()
            }
        }
    }

    /// Scalar fed to the relaxed discrete maximum principle: the state itself
    /// for scalar models, total energy for Euler.
    pub fn nad_scalar(&self, u: &[f64]) -> f64 {
        u[self.nad_component()]
    }

    /// Conserved-variable index of the maximum-principle scalar.
    pub fn nad_component(&self) -> usize {
        match self {
            Model::Euler { .. } => 3,
            _ => 0,
        }
    }
}

/// Pressure of an Euler state.
pub fn pressure(u: &[f64], gamma: f64) -> Result<f64> {
    if !(u[0] > 0.0) {
        return Err(Error::NonPhysicalState(format!(
            "pressure of state with rho = {:.6e}",
            u[0]
        )));
    }
    Ok((gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]))
}

/// Internal energy density eps = E - |q|^2 / (2 rho), no positivity check.
pub fn internal_energy(u: &[f64]) -> f64 {
    u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]
}

/// Conservative state from primitive (rho, v, p).
pub fn euler_from_primitive(rho: f64, v: Vec2, p: f64, gamma: f64) -> [f64; 4] {
    [
        rho,
        rho * v.x,
        rho * v.y,
        p / (gamma - 1.0) + 0.5 * rho * (v.x * v.x + v.y * v.y),
    ]
}

/// Convex admissibility set membership. NaN fails every variant.
#[derive(Debug, Clone, PartialEq)]
pub enum AdmissibleSet {
    /// Closed interval for scalar states, from the initial datum's range.
    ScalarRange { lo: f64, hi: f64 },
    /// rho > 0 and internal energy > 0.
    EulerPositive,
}

impl AdmissibleSet {
    /// Interval bounds widened by a round-off-scale slack.
    pub fn scalar_from_range(lo: f64, hi: f64) -> Self {
        let slack = 1e-12 * (lo.abs().max(hi.abs())).max(1.0);
        AdmissibleSet::ScalarRange { lo: lo - slack, hi: hi + slack }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        if u.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match self {
            AdmissibleSet::ScalarRange { lo, hi } => u[0] >= *lo && u[0] <= *hi,
            AdmissibleSet::EulerPositive => u[0] > 0.0 && internal_energy(u) > 0.0,
        }
    }
}

/// Global Lax-Friedrichs flux through a unit normal: the average normal flux
/// minus gamma_visc/2 times the state jump. `u_minus` sits on the side the
/// normal leaves, `u_plus` on the side it enters.
pub fn lax_friedrichs_quiet(
    model: &Model,
    u_minus: &[f64],
    u_plus: &[f64],
    x: Vec2,
    n: Vec2,
    gamma_visc: f64,
    out: &mut [f64],
) {
    let nv = model.n_vars();
    let mut fm = [[0.0; 2]; MAX_VARS];
    let mut fp = [[0.0; 2]; MAX_VARS];
    model.flux_quiet(u_minus, x, &mut fm[..nv]);
    model.flux_quiet(u_plus, x, &mut fp[..nv]);
    for v in 0..nv {
        out[v] = 0.5 * ((fm[v][0] + fp[v][0]) * n.x + (fm[v][1] + fp[v][1]) * n.y)
            - 0.5 * gamma_visc * (u_plus[v] - u_minus[v]);
    }
}

pub fn lax_friedrichs(
    model: &Model,
    u_minus: &[f64],
    u_plus: &[f64],
    x: Vec2,
    n: Vec2,
    gamma_visc: f64,
    out: &mut [f64],
) -> Result<()> {
    if let Model::Euler { .. } = model {
        for u in [u_minus, u_plus] {
            if !(u[0] > 0.0) {
                return Err(Error::NonPhysicalState(format!(
                    "numerical flux of Euler state with rho = {:.6e}",
                    u[0]
                )));
            }
        }
    }
    lax_friedrichs_quiet(model, u_minus, u_plus, x, n, gamma_visc, out);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const ORIGIN: Vec2 = Vec2::new(0.0, 0.0);

    #[test]
    fn burgers_and_kpp_point_fluxes() {
        let mut out = [[0.0; 2]; 1];
        Model::Burgers.flux(&[2.0], ORIGIN, &mut out).unwrap();
        assert_eq!(out[0], [2.0, 2.0]);
        Model::Kpp.flux(&[0.0], ORIGIN, &mut out).unwrap();
        assert_eq!(out[0], [0.0, 1.0]);
    }

    #[test]
    fn euler_rest_state_flux_is_pressure_only() {
        let gamma = 1.4;
        let u = [1.0, 0.0, 0.0, 2.5];
        assert_abs_diff_eq!(pressure(&u, gamma).unwrap(), 1.0, epsilon = 1e-14);
        let mut out = [[0.0; 2]; 4];
        Model::Euler { gamma }.flux(&u, ORIGIN, &mut out).unwrap();
        assert_eq!(out[0], [0.0, 0.0]);
        assert_abs_diff_eq!(out[1][0], 1.0, epsilon = 1e-14);
        assert_eq!(out[1][1], 0.0);
        assert_abs_diff_eq!(out[2][1], 1.0, epsilon = 1e-14);
        assert_eq!(out[3], [0.0, 0.0]);
    }

    #[test]
    fn shock_tube_states_from_primitive() {
        let gamma = 1.4;
        let left = euler_from_primitive(1.0, Vec2::zeros(), 1.0, gamma);
        assert_abs_diff_eq!(left[3], 2.5, epsilon = 1e-14);
        let right = euler_from_primitive(0.125, Vec2::zeros(), 0.1, gamma);
        assert_abs_diff_eq!(right[3], 0.25, epsilon = 1e-14);
        // Zero velocity: p = (gamma - 1) E.
        assert_abs_diff_eq!(pressure(&[2.0, 0.0, 0.0, 3.0], gamma).unwrap(), 0.4 * 3.0, epsilon = 1e-14);
    }

    #[test]
    fn nonphysical_euler_states_error_or_taint() {
        let model = Model::Euler { gamma: 1.4 };
        let mut out = [[0.0; 2]; 4];
        assert!(matches!(
            model.flux(&[-1.0, 0.0, 0.0, 1.0], ORIGIN, &mut out),
            Err(Error::NonPhysicalState(_))
        ));
        model.flux_quiet(&[-1.0, 0.0, 0.0, 1.0], ORIGIN, &mut out);
        assert!(out.iter().flatten().all(|v| v.is_nan()));
    }

    #[test]
    fn lax_friedrichs_consistency_and_hand_value() {
        let model = Model::Advection { a: Vec2::new(1.0, 1.0) };
        let n = Vec2::new(1.0, 0.0);
        let mut out = [0.0];
        lax_friedrichs(&model, &[0.7], &[0.7], ORIGIN, n, 2f64.sqrt(), &mut out).unwrap();
        assert_abs_diff_eq!(out[0], 0.7, epsilon = 1e-15);
        lax_friedrichs(&model, &[0.0], &[1.0], ORIGIN, n, 2f64.sqrt(), &mut out).unwrap();
        assert_abs_diff_eq!(out[0], 0.5 - 2f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn wavespeed_examples() {
        assert_abs_diff_eq!(
            Model::Advection { a: Vec2::new(1.0, 1.0) }.wavespeed(&[5.0], ORIGIN),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        let g = |states: &[f64]| -> f64 {
            states
                .iter()
                .map(|&u| Model::Burgers.wavespeed(&[u], ORIGIN))
                .fold(0.0, f64::max)
        };
        assert_abs_diff_eq!(g(&[-1.0, 2.0]), 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        // Mach 3 inflow state of the step benchmark: |v| + c = 3 + 1.
        let u = euler_from_primitive(1.4, Vec2::new(3.0, 0.0), 1.0, 1.4);
        assert_abs_diff_eq!(u[3], 8.8, epsilon = 1e-14);
        assert_abs_diff_eq!(
            Model::Euler { gamma: 1.4 }.wavespeed(&u, ORIGIN),
            4.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn wavespeed_bounds_directional_jacobian() {
        // |d(F . n)/du| <= wavespeed for scalar models, by finite differences
        // over state and direction samples.
        let pts = [0.0, 0.3, -1.2, 2.0, 5.5];
        let dirs: [f64; 5] = [0.0, 0.7, 1.9, 3.1, 4.4];
        for model in [
            Model::Advection { a: Vec2::new(1.0, 1.0) },
            Model::Rotation,
            Model::Burgers,
            Model::Kpp,
        ] {
            for &u in &pts {
                for &th in &dirs {
                    let n = Vec2::new(th.cos(), th.sin());
                    let x = Vec2::new(0.8, 0.1);
                    let h = 1e-6;
                    let mut fp = [[0.0; 2]; 1];
                    let mut fm = [[0.0; 2]; 1];
                    model.flux_quiet(&[u + h], x, &mut fp);
                    model.flux_quiet(&[u - h], x, &mut fm);
                    let d = ((fp[0][0] - fm[0][0]) * n.x + (fp[0][1] - fm[0][1]) * n.y)
                        / (2.0 * h);
                    assert!(d.abs() <= model.wavespeed(&[u], x) + 1e-5);
                }
            }
        }
        // Euler: directional speeds are |v . n| +- c, both below |v| + c.
        let gamma = 1.4;
        let u = euler_from_primitive(0.7, Vec2::new(1.2, -2.0), 0.9, gamma);
        let c = (gamma * 0.9 / 0.7_f64).sqrt();
        let v = Vec2::new(1.2, -2.0);
        let ws = Model::Euler { gamma }.wavespeed(&u, ORIGIN);
        for th in [0.0, 1.0, 2.5] {
            let n = Vec2::new(f64::cos(th), f64::sin(th));
            assert!(v.dot(&n).abs() + c <= ws + 1e-13);
        }
    }

    #[test]
    fn rotation_flux_is_divergence_free() {
        // For constant u the flux is u A(x); its divergence must vanish.
        let model = Model::Rotation;
        let u = [1.7];
        let h = 1e-6;
        for x in [Vec2::new(0.3, 0.4), Vec2::new(0.9, 0.1)] {
            let mut fxp = [[0.0; 2]; 1];
            let mut fxm = [[0.0; 2]; 1];
            let mut fyp = [[0.0; 2]; 1];
            let mut fym = [[0.0; 2]; 1];
            model.flux_quiet(&u, x + Vec2::new(h, 0.0), &mut fxp);
            model.flux_quiet(&u, x - Vec2::new(h, 0.0), &mut fxm);
            model.flux_quiet(&u, x + Vec2::new(0.0, h), &mut fyp);
            model.flux_quiet(&u, x - Vec2::new(0.0, h), &mut fym);
            let div = (fxp[0][0] - fxm[0][0]) / (2.0 * h) + (fyp[0][1] - fym[0][1]) / (2.0 * h);
            assert_abs_diff_eq!(div, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn admissible_sets() {
        let s = AdmissibleSet::scalar_from_range(0.0, 1.0);
        assert!(s.contains(&[0.5]));
        assert!(s.contains(&[0.0]));
        assert!(!s.contains(&[1.1]));
        assert!(!s.contains(&[f64::NAN]));
        let e = AdmissibleSet::EulerPositive;
        assert!(e.contains(&[1.0, 0.0, 0.0, 2.5]));
        assert!(!e.contains(&[0.0, 0.0, 0.0, 2.5]));
        // Kinetic energy exceeding total energy: negative internal energy.
        assert!(!e.contains(&[1.0, 3.0, 0.0, 2.5]));
        assert!(!e.contains(&[1.0, 0.0, f64::INFINITY, 2.5]));
    }

    #[test]
    fn nad_scalar_selector() {
        assert_eq!(Model::Burgers.nad_scalar(&[3.5]), 3.5);
        assert_eq!(Model::Euler { gamma: 1.4 }.nad_scalar(&[1.0, 0.1, 0.2, 9.0]), 9.0);
    }

    proptest! {
        #[test]
        fn lax_friedrichs_antisymmetry_scalar(
            u in -3.0..3.0f64, v in -3.0..3.0f64, th in 0.0..6.28f64, g in 0.1..5.0f64,
        ) {
            let n = Vec2::new(th.cos(), th.sin());
            let model = Model::Burgers;
            let mut a = [0.0];
            let mut b = [0.0];
            lax_friedrichs_quiet(&model, &[u], &[v], ORIGIN, n, g, &mut a);
            lax_friedrichs_quiet(&model, &[v], &[u], ORIGIN, -n, g, &mut b);
            prop_assert!((a[0] + b[0]).abs() < 1e-14);
        }

        #[test]
        fn lax_friedrichs_antisymmetry_euler(
            rho1 in 0.1..3.0f64, p1 in 0.1..3.0f64, vx1 in -2.0..2.0f64,
            rho2 in 0.1..3.0f64, p2 in 0.1..3.0f64, vy2 in -2.0..2.0f64,
            th in 0.0..6.28f64,
        ) {
            let gamma = 1.4;
            let model = Model::Euler { gamma };
            let u = euler_from_primitive(rho1, Vec2::new(vx1, 0.3), p1, gamma);
            let v = euler_from_primitive(rho2, Vec2::new(-0.4, vy2), p2, gamma);
            let n = Vec2::new(th.cos(), th.sin());
            let g = model.wavespeed(&u, ORIGIN).max(model.wavespeed(&v, ORIGIN));
            let mut a = [0.0; 4];
            let mut b = [0.0; 4];
            lax_friedrichs_quiet(&model, &u, &v, ORIGIN, n, g, &mut a);
            lax_friedrichs_quiet(&model, &v, &u, ORIGIN, -n, g, &mut b);
            for k in 0..4 {
                prop_assert!((a[k] + b[k]).abs() < 1e-13 * (1.0 + a[k].abs()));
            }
        }
    }
}
