//! Time integration: initialization by subcell averaging, wavespeed and CFL
//! bookkeeping, the forward-Euler stage in subcell form, and the three-stage
//! strong-stability-preserving Runge-Kutta step with per-stage correction.
//!
//! A stage updates the submeans directly from the reconstructed face fluxes
//! and rebuilds the moments afterwards. Both representations carry the same
//! information; updating the submeans makes conservation exact because every
//! interior face value enters the two adjacent balances with opposite signs
//! at identical bit patterns.

use crate::correction::{apply_correction, CorrectionConfig, CorrectionStats};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::physics::{AdmissibleSet, MAX_VARS};
use crate::quadrature::TriRule;
use crate::residual::{
    assemble_residual, fv_update_subcell, ledger_face_values, solve_all_reconstructed,
    submeans_to_moments, Discretization, VolumeFlux,
};

#[derive(Debug, Clone)]
pub struct SolutionState {
    pub t: f64,
    pub step: u64,
    pub moments: Vec<f64>,
    pub submeans: Vec<f64>,
}

/// Initial data: either a pointwise state function averaged over each
/// subcell, or a direct per-subcell assignment for data concentrated below
/// quadrature resolution (point blasts).
pub enum InitialData<'a> {
    Pointwise(&'a dyn Fn(Vec2, &mut [f64])),
    SubcellConstant(&'a dyn Fn(usize, usize, Vec2, &mut [f64])),
}

/// Per-stage integration settings shared by the run and convergence drivers.
pub struct StepContext<'a> {
    pub disc: &'a Discretization,
    pub volume_flux: VolumeFlux,
    pub correction: CorrectionConfig,
    /// CFL safety factor in (0, 1].
    pub cfl: f64,
    /// Extra time-step ceiling, used to push the time error below the space
    /// error in convergence studies.
    pub dt_cap: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StageReport {
    pub gamma: f64,
    pub correction: CorrectionStats,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepReport {
    pub dt: f64,
    pub stages: [StageReport; 3],
}

fn average_over_polygon(
    rule: &TriRule,
    poly: &[Vec2],
    area: f64,
    u0: &dyn Fn(Vec2, &mut [f64]),
    nv: usize,
    out: &mut [f64],
) {
    let mut c0 = Vec2::new(0.0, 0.0);
    for &p in poly {
        c0 += p;
    }
    c0 /= poly.len() as f64;
    out[..nv].fill(0.0);
    let mut u = [0.0; MAX_VARS];
    for e in 0..poly.len() {
        let a = poly[e];
        let b = poly[(e + 1) % poly.len()];
        let tri_area = 0.5 * ((a.x - c0.x) * (b.y - c0.y) - (a.y - c0.y) * (b.x - c0.x));
        for (i, &pt) in rule.pts.iter().enumerate() {
            let x = Vec2::new(
                c0.x + pt.x * (a.x - c0.x) + pt.y * (b.x - c0.x),
                c0.y + pt.y * (b.y - c0.y) + pt.x * (a.y - c0.y),
            );
            u0(x, &mut u[..nv]);
            let w = 2.0 * tri_area * rule.w[i];
            for v in 0..nv {
                out[v] += w * u[v];
            }
        }
    }
    for v in 0..nv {
        out[v] /= area;
    }
}

/// Subcell averages of the initial data, with the matching moments. The
/// optional admissibility check rejects initial states the solver could not
/// evolve.
pub fn initialize(
    disc: &Discretization,
    data: &InitialData,
    pad: Option<&AdmissibleSet>,
) -> Result<SolutionState> {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let rule = TriRule::with_degree(2 * disc.ops.k + 4);
    let mut submeans = vec![0.0; disc.submeans_len()];
    let mut u = [0.0; MAX_VARS];
    for c in 0..disc.n_cells() {
        let geom = &disc.conn.geom[c];
        for m in 0..n_sub {
            match data {
                InitialData::Pointwise(f) => average_over_polygon(
                    &rule,
                    &geom.sub_vertices[m],
                    geom.sub_areas[m],
                    f,
                    nv,
                    &mut u,
                ),
                InitialData::SubcellConstant(f) => {
                    f(c, m, geom.sub_centroids[m], &mut u[..nv])
                }
            }
            for v in 0..nv {
                submeans[(c * nv + v) * n_sub + m] = u[v];
            }
        }
    }
    for (s, chunk) in submeans.chunks(n_sub).enumerate() {
        if chunk.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonPhysicalState(format!(
                "initial data is not finite in cell {}",
                s / nv
            )));
        }
    }
    if let Some(set) = pad {
        for c in 0..disc.n_cells() {
            for m in 0..n_sub {
                for v in 0..nv {
                    u[v] = submeans[(c * nv + v) * n_sub + m];
                }
                if !set.contains(&u[..nv]) {
                    return Err(Error::NonPhysicalState(format!(
                        "initial subcell average in cell {c}, subcell {m} is outside the \
                         admissible set"
                    )));
                }
            }
        }
    }
    let mut moments = vec![0.0; disc.moments_len()];
    submeans_to_moments(disc, &submeans, &mut moments);
    Ok(SolutionState { t: 0.0, step: 0, moments, submeans })
}

/// Largest characteristic speed over all subcell averages, evaluated at the
/// subcell centroids. Also the viscosity constant of the numerical flux.
/// Returns NaN when any submean or speed is not finite; the max fold alone
/// would silently drop NaN and report a poisoned state as steady.
pub fn global_wavespeed(disc: &Discretization, submeans: &[f64]) -> f64 {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let mut gamma = 0f64;
    let mut u = [0.0; MAX_VARS];
    for c in 0..disc.n_cells() {
        for m in 0..n_sub {
            for v in 0..nv {
                u[v] = submeans[(c * nv + v) * n_sub + m];
            }
            let speed = disc.model.wavespeed(&u[..nv], disc.conn.geom[c].sub_centroids[m]);
            if !speed.is_finite() || u[..nv].iter().any(|x| !x.is_finite()) {
                return f64::NAN;
            }
            gamma = gamma.max(speed);
        }
    }
    gamma
}

/// The geometric length scale of the CFL bound: the smaller of the cell
/// radius divided by 2k + 1 and the smallest subcell radius, minimized over
/// cells, with radius meaning area over perimeter.
pub fn cfl_length(disc: &Discretization) -> f64 {
    let k = disc.ops.k;
    let mut d = f64::INFINITY;
    for g in &disc.conn.geom {
        d = d.min(g.d_cell / (2 * k + 1) as f64).min(g.d_sub_min);
    }
    d
}

/// Stable time step for the current state, clipped to the remaining time.
pub fn cfl_timestep(ctx: &StepContext, submeans: &[f64], remaining: f64) -> Result<f64> {
    let gamma = global_wavespeed(ctx.disc, submeans);
    if !gamma.is_finite() {
        return Err(Error::NonPhysicalState(
            "wavespeed is not finite; the state has left the physical domain".into(),
        ));
    }
    let mut dt = if gamma <= 1e-300 { remaining } else { ctx.cfl * cfl_length(ctx.disc) / gamma };
    if let Some(cap) = ctx.dt_cap {
        dt = dt.min(cap);
    }
    Ok(dt.min(remaining))
}

/// One corrected forward-Euler stage: high-order candidate from the
/// reconstructed face fluxes, then the a posteriori correction loop.
pub fn euler_stage(
    ctx: &StepContext,
    moments_in: &[f64],
    submeans_in: &[f64],
    dt: f64,
    moments_out: &mut Vec<f64>,
    submeans_out: &mut Vec<f64>,
) -> Result<StageReport> {
    let disc = ctx.disc;
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let gamma = global_wavespeed(disc, submeans_in);
    let (phi, mut ledger) = assemble_residual(disc, moments_in, gamma, ctx.volume_flux);
    solve_all_reconstructed(disc, &phi, &mut ledger)?;
    let values = ledger_face_values(disc, &ledger);
    submeans_out.resize(disc.submeans_len(), 0.0);
    let mut out = [0.0; MAX_VARS];
    for s in 0..disc.conn.n_subcells() {
        fv_update_subcell(disc, submeans_in, &values, dt, s, &mut out);
        let c = s / n_sub;
        let m = s % n_sub;
        for v in 0..nv {
            submeans_out[(c * nv + v) * n_sub + m] = out[v];
        }
    }
    moments_out.resize(disc.moments_len(), 0.0);
    submeans_to_moments(disc, submeans_out, moments_out);
    let correction = apply_correction(
        disc,
        submeans_in,
        moments_out,
        submeans_out,
        &values,
        dt,
        gamma,
        &ctx.correction,
    )?;
    Ok(StageReport { gamma, correction })
}

fn convex_combine(a_coeff: f64, a: &[f64], b_coeff: f64, b: &mut [f64]) {
    for (x, &y) in b.iter_mut().zip(a) {
        *x = a_coeff * y + b_coeff * *x;
    }
}

/// One step of the three-stage strong-stability-preserving Runge-Kutta
/// method in Shu-Osher form. Every inner Euler stage runs the full
/// correction loop, so intermediate states are admissible and the convex
/// combinations preserve that admissibility.
pub fn ssp_rk3_step(ctx: &StepContext, state: &mut SolutionState, dt: f64) -> Result<StepReport> {
    ssp_rk3_step_traced(ctx, state, dt).map_err(|(_, e)| e)
}

/// Same step, with the index of the failing stage attached to any error so
/// run loops can report where the scheme broke down.
pub fn ssp_rk3_step_traced(
    ctx: &StepContext,
    state: &mut SolutionState,
    dt: f64,
) -> std::result::Result<StepReport, (usize, Error)> {
    let mut report = StepReport { dt, ..Default::default() };
    let mut mom1 = Vec::new();
    let mut sub1 = Vec::new();
    report.stages[0] = euler_stage(ctx, &state.moments, &state.submeans, dt, &mut mom1, &mut sub1)
        .map_err(|e| (0, e))?;
    let mut mom2 = Vec::new();
    let mut sub2 = Vec::new();
    report.stages[1] =
        euler_stage(ctx, &mom1, &sub1, dt, &mut mom2, &mut sub2).map_err(|e| (1, e))?;
    convex_combine(0.75, &state.moments, 0.25, &mut mom2);
    convex_combine(0.75, &state.submeans, 0.25, &mut sub2);
    report.stages[2] =
        euler_stage(ctx, &mom2, &sub2, dt, &mut mom1, &mut sub1).map_err(|e| (2, e))?;
    convex_combine(1.0 / 3.0, &state.moments, 2.0 / 3.0, &mut mom1);
    convex_combine(1.0 / 3.0, &state.submeans, 2.0 / 3.0, &mut sub1);
    state.moments = mom1;
    state.submeans = sub1;
    state.t += dt;
    state.step += 1;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::{
        CorrectionMode, DetectionConfig, NadNeighbors, SmoothLevel,
    };
    use crate::mesh::{generate_square_mesh, BoundaryCondition, Mesh};
    use crate::physics::{euler_from_primitive, Model};
    use crate::subdivision::{SchemeKind, SubdivisionScheme};
    use approx::assert_abs_diff_eq;

    fn periodic_square(n: usize) -> Mesh {
        let (mut m, _) = generate_square_mesh(n, &|_| BoundaryCondition::Periodic).unwrap();
        m.pair_periodic(&[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        m
    }

    fn ctx_off(disc: &Discretization) -> StepContext<'_> {
        StepContext {
            disc,
            volume_flux: VolumeFlux::Exact,
            correction: CorrectionConfig {
                mode: CorrectionMode::Off,
                detection: DetectionConfig {
                    pad: None,
                    nad: false,
                    nad_neighbors: NadNeighbors::Nonlinear,
                    smooth_relax: false,
                    smooth_level: SmoothLevel::Subcell,
                },
                max_iter: 10,
            },
            cfl: 0.95,
            dt_cap: None,
        }
    }

    #[test]
    fn initialization_reproduces_polynomial_averages() {
        let mesh = generate_square_mesh(2, &|_| BoundaryCondition::Outflow).unwrap().0;
        let disc = Discretization::new(
            mesh,
            Model::Burgers,
            SubdivisionScheme { kind: SchemeKind::StructuredGaussLobatto, k: 2 },
        )
        .unwrap();
        let f = |p: Vec2, u: &mut [f64]| u[0] = 1.0 + p.x * p.x - 0.5 * p.x * p.y;
        let state = initialize(&disc, &InitialData::Pointwise(&f), None).unwrap();
        // A degree-two integrand is averaged exactly; compare against an
        // independent quadrature of much higher degree.
        let rule = TriRule::with_degree(12);
        for c in 0..disc.n_cells() {
            let geom = &disc.conn.geom[c];
            for m in 0..disc.n_sub() {
                let exact = crate::quadrature::integrate_polygon(&rule, &geom.sub_vertices[m], |p| {
                    1.0 + p.x * p.x - 0.5 * p.x * p.y
                }) / geom.sub_areas[m];
                assert_abs_diff_eq!(
                    state.submeans[c * disc.n_sub() + m],
                    exact,
                    epsilon = 1e-13
                );
            }
        }
    }

    #[test]
    fn initialization_rejects_inadmissible_data() {
        let mesh = generate_square_mesh(2, &|_| BoundaryCondition::Outflow).unwrap().0;
        let disc = Discretization::new(
            mesh,
            Model::Euler { gamma: 1.4 },
            SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 1 },
        )
        .unwrap();
        let f = |p: Vec2, u: &mut [f64]| {
            let rho = if p.x < 0.5 { 1.0 } else { -1.0 };
            u.copy_from_slice(&euler_from_primitive(rho, Vec2::new(0.0, 0.0), 1.0, 1.4));
        };
        let err = initialize(&disc, &InitialData::Pointwise(&f), Some(&AdmissibleSet::EulerPositive));
        assert!(matches!(err, Err(Error::NonPhysicalState(_))));
    }

    #[test]
    fn cfl_length_matches_hand_value_on_unit_square_mesh() {
        // generate_square_mesh(1) splits the unit square four ways at the
        // center: isoceles triangles of area 1/4 and perimeter 1 + sqrt(2).
        let mesh = generate_square_mesh(1, &|_| BoundaryCondition::Outflow).unwrap().0;
        let disc = Discretization::new(
            mesh,
            Model::Burgers,
            SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 0 },
        )
        .unwrap();
        let d_cell = 0.25 / (1.0 + 2f64.sqrt());
        assert_abs_diff_eq!(cfl_length(&disc), d_cell, epsilon = 1e-14);
        // k = 0 has a single subcell per cell, so the subcell radius equals
        // the cell radius and the 1/(2k+1) factor is one.
        let gamma = 2f64.sqrt();
        let ctx = ctx_off(&disc);
        let sub = vec![1.0; disc.submeans_len()];
        let dt = cfl_timestep(&ctx, &sub, 1.0).unwrap();
        assert_abs_diff_eq!(dt, 0.95 * d_cell / gamma, epsilon = 1e-14);
    }

    #[test]
    fn zero_wavespeed_takes_the_remaining_time() {
        let mesh = generate_square_mesh(1, &|_| BoundaryCondition::Outflow).unwrap().0;
        let disc = Discretization::new(
            mesh,
            Model::Burgers,
            SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 1 },
        )
        .unwrap();
        let ctx = ctx_off(&disc);
        let sub = vec![0.0; disc.submeans_len()];
        assert_eq!(cfl_timestep(&ctx, &sub, 0.125).unwrap(), 0.125);
    }

    #[test]
    fn constant_state_is_a_fixed_point_of_the_step() {
        for model in [Model::Advection { a: Vec2::new(1.0, -0.5) }, Model::Burgers] {
            let mesh = periodic_square(2);
            let disc = Discretization::new(
                mesh,
                model,
                SubdivisionScheme { kind: SchemeKind::StructuredGaussLobatto, k: 3 },
            )
            .unwrap();
            let f = |_: Vec2, u: &mut [f64]| u[0] = 0.7;
            let mut state = initialize(&disc, &InitialData::Pointwise(&f), None).unwrap();
            let ctx = ctx_off(&disc);
            for _ in 0..100 {
                let dt = cfl_timestep(&ctx, &state.submeans, 1e9).unwrap();
                ssp_rk3_step(&ctx, &mut state, dt).unwrap();
            }
            for &w in &state.submeans {
                assert_abs_diff_eq!(w, 0.7, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn uniform_euler_flow_stays_uniform() {
        let mesh = periodic_square(2);
        let disc = Discretization::new(
            mesh,
            Model::Euler { gamma: 1.4 },
            SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 2 },
        )
        .unwrap();
        let f = |_: Vec2, u: &mut [f64]| {
            u.copy_from_slice(&euler_from_primitive(1.2, Vec2::new(0.3, -0.2), 2.0, 1.4))
        };
        let mut state = initialize(&disc, &InitialData::Pointwise(&f), None).unwrap();
        let reference = state.submeans.clone();
        let ctx = ctx_off(&disc);
        for _ in 0..20 {
            let dt = cfl_timestep(&ctx, &state.submeans, 1e9).unwrap();
            ssp_rk3_step(&ctx, &mut state, dt).unwrap();
        }
        for (a, b) in state.submeans.iter().zip(&reference) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-13);
        }
    }

    #[test]
    fn periodic_step_conserves_mass_to_round_off() {
        let mesh = periodic_square(3);
        let disc = Discretization::new(
            mesh,
            Model::Burgers,
            SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 2 },
        )
        .unwrap();
        let f = |p: Vec2, u: &mut [f64]| {
            u[0] = 0.5 + 0.4 * (2.0 * std::f64::consts::PI * (p.x + p.y)).sin()
        };
        let mut state = initialize(&disc, &InitialData::Pointwise(&f), None).unwrap();
        let n_sub = disc.n_sub();
        let mass = |sub: &[f64]| -> f64 {
            (0..disc.conn.n_subcells())
                .map(|s| disc.conn.geom[s / n_sub].sub_areas[s % n_sub] * sub[s])
                .sum()
        };
        let m0 = mass(&state.submeans);
        let mut ctx = ctx_off(&disc);
        ctx.correction = CorrectionConfig {
            mode: CorrectionMode::Blended,
            detection: DetectionConfig {
                pad: None,
                nad: true,
                nad_neighbors: NadNeighbors::Nonlinear,
                smooth_relax: true,
                smooth_level: SmoothLevel::Subcell,
            },
            max_iter: 10,
        };
        for _ in 0..25 {
            let dt = cfl_timestep(&ctx, &state.submeans, 1e9).unwrap();
            ssp_rk3_step(&ctx, &mut state, dt).unwrap();
        }
        assert_abs_diff_eq!(mass(&state.submeans), m0, epsilon = 1e-13 * m0.abs().max(1.0));
    }

    #[test]
    fn smooth_advection_converges_on_refinement() {
        // Two resolutions at k = 1; the L2 error of the advected sine must
        // drop by roughly the expected factor, confirming the pieces fit.
        let mut errors = Vec::new();
        for n in [4, 8] {
            let mesh = periodic_square(n);
            let disc = Discretization::new(
                mesh,
                Model::Advection { a: Vec2::new(1.0, 1.0) },
                SubdivisionScheme { kind: SchemeKind::StructuredUniform, k: 1 },
            )
            .unwrap();
            let f = |p: Vec2, u: &mut [f64]| {
                u[0] = (2.0 * std::f64::consts::PI * (p.x + p.y)).sin()
            };
            let mut state = initialize(&disc, &InitialData::Pointwise(&f), None).unwrap();
            let ctx = ctx_off(&disc);
            let t_end = 0.25;
            while state.t < t_end - 1e-14 {
                let dt = cfl_timestep(&ctx, &state.submeans, t_end - state.t).unwrap();
                ssp_rk3_step(&ctx, &mut state, dt).unwrap();
            }
            let exact = initialize(
                &disc,
                &InitialData::Pointwise(&|p: Vec2, u: &mut [f64]| {
                    u[0] = (2.0 * std::f64::consts::PI * (p.x + p.y - 2.0 * t_end)).sin()
                }),
                None,
            )
            .unwrap();
            let n_sub = disc.n_sub();
            let err: f64 = (0..disc.conn.n_subcells())
                .map(|s| {
                    let e = state.submeans[s] - exact.submeans[s];
                    disc.conn.geom[s / n_sub].sub_areas[s % n_sub] * e * e
                })
                .sum::<f64>()
                .sqrt();
            errors.push(err);
        }
        let rate = (errors[0] / errors[1]).log2();
        assert!(
            rate > 1.5,
            "expected at least second-order decay, got rate {rate:.2} from {errors:?}"
        );
    }
}
