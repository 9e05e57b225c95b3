//! Exact solver for the one-dimensional Riemann problem of the compressible
//! Euler equations with an ideal gas law. Used as the reference solution for
//! shock-tube runs; the radial coordinate of a cylindrical tube maps onto x
//! for early times, before curvature effects accumulate.

use crate::error::{Error, Result};

/// Primitive left/right data of a planar Riemann problem.
#[derive(Debug, Clone, Copy)]
pub struct RiemannProblem {
    pub rho_l: f64,
    pub u_l: f64,
    pub p_l: f64,
    pub rho_r: f64,
    pub u_r: f64,
    pub p_r: f64,
    pub gamma: f64,
}

/// Converged star-region data plus the inputs, ready for sampling.
#[derive(Debug, Clone, Copy)]
pub struct RiemannSolution {
    pub problem: RiemannProblem,
    pub p_star: f64,
    pub u_star: f64,
}

/// Value and derivative of the pressure function of one side: the velocity
/// change across the wave that connects the side state to pressure p.
fn side_function(p: f64, rho_k: f64, p_k: f64, a_k: f64, g: f64) -> (f64, f64) {
    if p > p_k {
        let big_a = 2.0 / ((g + 1.0) * rho_k);
        let big_b = (g - 1.0) / (g + 1.0) * p_k;
        let root = (big_a / (p + big_b)).sqrt();
        let f = (p - p_k) * root;
        let df = root * (1.0 - 0.5 * (p - p_k) / (p + big_b));
        (f, df)
    } else {
        let exponent = (g - 1.0) / (2.0 * g);
        let f = 2.0 * a_k / (g - 1.0) * ((p / p_k).powf(exponent) - 1.0);
        let df = 1.0 / (rho_k * a_k) * (p / p_k).powf(-(g + 1.0) / (2.0 * g));
        (f, df)
    }
}

impl RiemannProblem {
    pub fn solve(&self) -> Result<RiemannSolution> {
        let g = self.gamma;
        if self.rho_l <= 0.0 || self.rho_r <= 0.0 || self.p_l <= 0.0 || self.p_r <= 0.0 {
            return Err(Error::NonPhysicalState(
                "Riemann data needs positive density and pressure".into(),
            ));
        }
        let a_l = (g * self.p_l / self.rho_l).sqrt();
        let a_r = (g * self.p_r / self.rho_r).sqrt();
        let du = self.u_r - self.u_l;
        // The two rarefaction curves stop meeting when the velocity jump
        // exceeds the escape speed; beyond that vacuum forms.
        if 2.0 * (a_l + a_r) / (g - 1.0) <= du {
            return Err(Error::NonPhysicalState("Riemann data produces vacuum".into()));
        }
        // Primitive-variable initial guess, floored away from zero.
        let p_guess = 0.5 * (self.p_l + self.p_r)
            - 0.125 * du * (self.rho_l + self.rho_r) * (a_l + a_r);
        let mut p = p_guess.max(1e-10 * self.p_l.min(self.p_r));
        for _ in 0..100 {
            let (f_l, df_l) = side_function(p, self.rho_l, self.p_l, a_l, g);
            let (f_r, df_r) = side_function(p, self.rho_r, self.p_r, a_r, g);
            let f = f_l + f_r + du;
            let step = f / (df_l + df_r);
            let p_new = (p - step).max(1e-14 * self.p_l.min(self.p_r));
            let done = (p_new - p).abs() <= 1e-14 * p.abs();
            p = p_new;
            if done {
                break;
            }
        }
        let (f_l, _) = side_function(p, self.rho_l, self.p_l, a_l, g);
        let (f_r, _) = side_function(p, self.rho_r, self.p_r, a_r, g);
        let u_star = 0.5 * (self.u_l + self.u_r) + 0.5 * (f_r - f_l);
        Ok(RiemannSolution { problem: *self, p_star: p, u_star })
    }
}

impl RiemannSolution {
    /// Self-similar state (rho, u, p) along the ray x/t = xi.
    pub fn sample(&self, xi: f64) -> (f64, f64, f64) {
        let q = &self.problem;
        let g = q.gamma;
        let gm = g - 1.0;
        let gp = g + 1.0;
        let a_l = (g * q.p_l / q.rho_l).sqrt();
        let a_r = (g * q.p_r / q.rho_r).sqrt();
        if xi <= self.u_star {
            // Left of the contact.
            if self.p_star > q.p_l {
                // Left shock.
                let ratio = self.p_star / q.p_l;
                let s = q.u_l - a_l * (gp / (2.0 * g) * ratio + gm / (2.0 * g)).sqrt();
                if xi <= s {
                    (q.rho_l, q.u_l, q.p_l)
                } else {
                    let rho = q.rho_l * (ratio + gm / gp) / (gm / gp * ratio + 1.0);
                    (rho, self.u_star, self.p_star)
                }
            } else {
                // Left rarefaction.
                let a_star = a_l * (self.p_star / q.p_l).powf(gm / (2.0 * g));
                let head = q.u_l - a_l;
                let tail = self.u_star - a_star;
                if xi <= head {
                    (q.rho_l, q.u_l, q.p_l)
                } else if xi >= tail {
                    let rho = q.rho_l * (self.p_star / q.p_l).powf(1.0 / g);
                    (rho, self.u_star, self.p_star)
                } else {
                    let u = (2.0 / gp) * (a_l + gm / 2.0 * q.u_l + xi);
                    let a = (2.0 / gp) * (a_l + gm / 2.0 * (q.u_l - xi));
                    let rho = q.rho_l * (a / a_l).powf(2.0 / gm);
                    let p = q.p_l * (a / a_l).powf(2.0 * g / gm);
                    (rho, u, p)
                }
            }
        } else {
            // Right of the contact; mirror of the left logic.
            if self.p_star > q.p_r {
                let ratio = self.p_star / q.p_r;
                let s = q.u_r + a_r * (gp / (2.0 * g) * ratio + gm / (2.0 * g)).sqrt();
                if xi >= s {
                    (q.rho_r, q.u_r, q.p_r)
                } else {
                    let rho = q.rho_r * (ratio + gm / gp) / (gm / gp * ratio + 1.0);
                    (rho, self.u_star, self.p_star)
                }
            } else {
                let a_star = a_r * (self.p_star / q.p_r).powf(gm / (2.0 * g));
                let head = q.u_r + a_r;
                let tail = self.u_star + a_star;
                if xi >= head {
                    (q.rho_r, q.u_r, q.p_r)
                } else if xi <= tail {
                    let rho = q.rho_r * (self.p_star / q.p_r).powf(1.0 / g);
                    (rho, self.u_star, self.p_star)
                } else {
                    let u = (2.0 / gp) * (-a_r + gm / 2.0 * q.u_r + xi);
                    let a = (2.0 / gp) * (a_r - gm / 2.0 * (q.u_r - xi));
                    let rho = q.rho_r * (a / a_r).powf(2.0 / gm);
                    let p = q.p_r * (a / a_r).powf(2.0 * g / gm);
                    (rho, u, p)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sod() -> RiemannProblem {
        RiemannProblem {
            rho_l: 1.0,
            u_l: 0.0,
            p_l: 1.0,
            rho_r: 0.125,
            u_r: 0.0,
            p_r: 0.1,
            gamma: 1.4,
        }
    }

    #[test]
    fn sod_star_state_matches_published_values() {
        let sol = sod().solve().unwrap();
        // Five-decimal reference values for this standard tube.
        assert_abs_diff_eq!(sol.p_star, 0.30313, epsilon = 1e-5);
        assert_abs_diff_eq!(sol.u_star, 0.92745, epsilon = 1e-5);
        let (rho_sl, _, _) = sol.sample(sol.u_star - 1e-9);
        let (rho_sr, _, _) = sol.sample(sol.u_star + 1e-9);
        assert_abs_diff_eq!(rho_sl, 0.42632, epsilon = 1e-5);
        assert_abs_diff_eq!(rho_sr, 0.26557, epsilon = 1e-5);
    }

    #[test]
    fn far_field_samples_return_the_input_states() {
        let sol = sod().solve().unwrap();
        let (rho, u, p) = sol.sample(-10.0);
        assert_eq!((rho, u, p), (1.0, 0.0, 1.0));
        let (rho, u, p) = sol.sample(10.0);
        assert_eq!((rho, u, p), (0.125, 0.0, 0.1));
    }

    #[test]
    fn sampled_profile_is_entropic_across_the_fan() {
        let sol = sod().solve().unwrap();
        // Pressure decreases monotonically through the left rarefaction.
        let mut last = f64::INFINITY;
        let mut xi = -1.2;
        while xi < sol.u_star {
            let (_, _, p) = sol.sample(xi);
            assert!(p <= last + 1e-12);
            last = p;
            xi += 0.01;
        }
    }

    #[test]
    fn symmetric_collision_has_zero_contact_speed() {
        let q = RiemannProblem {
            rho_l: 1.0,
            u_l: 2.0,
            p_l: 0.4,
            rho_r: 1.0,
            u_r: -2.0,
            p_r: 0.4,
            gamma: 1.4,
        };
        let sol = q.solve().unwrap();
        assert_abs_diff_eq!(sol.u_star, 0.0, epsilon = 1e-12);
        assert!(sol.p_star > 0.4, "head-on collision must compress");
    }

    #[test]
    fn strong_expansion_reports_vacuum() {
        let q = RiemannProblem {
            rho_l: 1.0,
            u_l: -20.0,
            p_l: 0.4,
            rho_r: 1.0,
            u_r: 20.0,
            p_r: 0.4,
            gamma: 1.4,
        };
        assert!(matches!(q.solve(), Err(Error::NonPhysicalState(_))));
    }
}
