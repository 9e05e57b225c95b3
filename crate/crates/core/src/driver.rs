//! Run loop and convergence study: adaptive time stepping to a final time
//! with per-step reporting, and refinement sequences with error norms and
//! observed orders against an exact solution.

use std::time::Instant;

use crate::config::RunConfig;
use crate::error::{Error, Result, RunError};
use crate::residual::Discretization;
use crate::stepper::{
    cfl_timestep, ssp_rk3_step_traced, SolutionState, StepContext, StepReport,
};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<StepReport>,
    /// False when a step limit stopped the run before the final time.
    pub completed: bool,
    pub wall_seconds: f64,
}

/// Advances the state to t_end with CFL-adaptive steps, the last one clipped
/// to land exactly. The callback sees every completed step.
pub fn run(
    ctx: &StepContext,
    state: &mut SolutionState,
    t_end: f64,
    max_steps: Option<u64>,
    mut on_step: impl FnMut(&SolutionState, &StepReport),
) -> std::result::Result<RunOutcome, RunError> {
    let start = Instant::now();
    let eps = 1e-12 * t_end.abs().max(1.0);
    let mut reports = Vec::new();
    let mut completed = true;
    while state.t < t_end - eps {
        if let Some(limit) = max_steps {
            if state.step >= limit {
                completed = false;
                break;
            }
        }
        let at = (state.t, state.step as usize);
        let dt = cfl_timestep(ctx, &state.submeans, t_end - state.t)
            .map_err(|e| RunError { t: at.0, step: at.1, stage: 0, source: e })?;
        let report = ssp_rk3_step_traced(ctx, state, dt)
            .map_err(|(stage, e)| RunError { t: at.0, step: at.1, stage, source: e })?;
        reports.push(report);
        on_step(state, &report);
    }
    Ok(RunOutcome { reports, completed, wall_seconds: start.elapsed().as_secs_f64() })
}

/// Area-weighted L1, L2, and max norms of the first conservative component
/// of the submean difference (the advected scalar, or the gas density).
pub fn error_norms(disc: &Discretization, numeric: &[f64], exact: &[f64]) -> (f64, f64, f64) {
    let nv = disc.n_vars();
    let n_sub = disc.n_sub();
    let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0f64);
    for c in 0..disc.n_cells() {
        for m in 0..n_sub {
            let idx = (c * nv) * n_sub + m;
            let e = numeric[idx] - exact[idx];
            let area = disc.conn.geom[c].sub_areas[m];
            l1 += area * e.abs();
            l2 += area * e * e;
            linf = linf.max(e.abs());
        }
    }
    (l1, l2.sqrt(), linf)
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub n_cells: usize,
    pub h: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub qinf: Option<f64>,
}

/// Runs the configured preset at each resolution and measures errors against
/// the exact solution at the final time. The time step is capped by the cell
/// radius to the power (k + 1) / 3 so the third-order time error decays at
/// least as fast as the space error.
pub fn convergence_study(
    cfg: &RunConfig,
    levels: &[usize],
    mut on_row: impl FnMut(&ConvergenceRow),
) -> Result<Vec<ConvergenceRow>> {
    if levels.len() < 2 {
        return Err(Error::InvalidConfig(
            "a convergence study needs at least two resolutions".into(),
        ));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in levels {
        let problem = cfg.preset.build(Some(n), &cfg.preset_options())?;
        if problem.exact.is_none() {
            return Err(Error::InvalidConfig(format!(
                "preset '{}' has no exact solution to converge against",
                problem.preset.name()
            )));
        }
        let disc = problem.discretize(cfg.k, cfg.scheme)?;
        let mut state = problem.initial_state(&disc)?;
        let d_min = disc.conn.geom.iter().fold(f64::INFINITY, |d, g| d.min(g.d_cell));
        let ctx = StepContext {
            disc: &disc,
            volume_flux: cfg.volume_flux,
            correction: cfg.correction_config(&problem),
            cfl: cfg.cfl,
            dt_cap: Some(d_min.powf((cfg.k + 1) as f64 / 3.0)),
        };
        let t_end = cfg.final_time(&problem);
        run(&ctx, &mut state, t_end, cfg.max_steps, |_, _| {})
            .map_err(|e| Error::Run(Box::new(e)))?;
        let exact = problem.exact_state(&disc, t_end).unwrap()?;
        let (l1, l2, linf) = error_norms(&disc, &state.submeans, &exact.submeans);
        let h = 1.0 / n as f64;
        let rate = |prev: f64, prev_h: f64, cur: f64| {
            if prev > 0.0 && cur > 0.0 {
                Some((prev / cur).ln() / (prev_h / h).ln())
            } else {
                None
            }
        };
        let row = match rows.last() {
            Some(p) => ConvergenceRow {
                resolution: n,
                n_cells: disc.n_cells(),
                h,
                l1,
                l2,
                linf,
                q1: rate(p.l1, p.h, l1),
                q2: rate(p.l2, p.h, l2),
                qinf: rate(p.linf, p.h, linf),
            },
            None => ConvergenceRow {
                resolution: n,
                n_cells: disc.n_cells(),
                h,
                l1,
                l2,
                linf,
                q1: None,
                q2: None,
                qinf: None,
            },
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::correction::{CorrectionConfig, CorrectionMode, DetectionConfig, NadNeighbors, SmoothLevel};
    use crate::presets::Preset;
    use crate::residual::VolumeFlux;
    use approx::assert_abs_diff_eq;

    fn plain_ctx(disc: &Discretization) -> StepContext<'_> {
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
    fn run_lands_exactly_on_the_final_time() {
        let cfg = RunConfig { preset: Preset::AdvectionSine, k: 1, ..RunConfig::default() };
        let problem = cfg.build_problem().unwrap();
        let disc = problem.discretize(1, cfg.scheme).unwrap();
        let mut state = problem.initial_state(&disc).unwrap();
        let ctx = plain_ctx(&disc);
        let outcome = run(&ctx, &mut state, 0.05, None, |_, _| {}).unwrap();
        assert!(outcome.completed);
        assert!(!outcome.reports.is_empty());
        assert_abs_diff_eq!(state.t, 0.05, epsilon = 1e-12);
        assert_eq!(state.step as usize, outcome.reports.len());
    }

    #[test]
    fn step_limit_stops_the_run_early() {
        let cfg = RunConfig { preset: Preset::AdvectionSine, k: 1, ..RunConfig::default() };
        let problem = cfg.build_problem().unwrap();
        let disc = problem.discretize(1, cfg.scheme).unwrap();
        let mut state = problem.initial_state(&disc).unwrap();
        let ctx = plain_ctx(&disc);
        let outcome = run(&ctx, &mut state, 1.0, Some(3), |_, _| {}).unwrap();
        assert!(!outcome.completed);
        assert_eq!(state.step, 3);
    }

    #[test]
    fn poisoned_state_surfaces_a_located_error() {
        // Burgers wavespeeds depend on the state, so the poisoned value is
        // caught by the CFL evaluation before any stage runs.
        let cfg = RunConfig { preset: Preset::Burgers, k: 1, ..RunConfig::default() };
        let problem = cfg.build_problem().unwrap();
        let disc = problem.discretize(1, cfg.scheme).unwrap();
        let mut state = problem.initial_state(&disc).unwrap();
        state.submeans[7] = f64::NAN;
        state.moments[7] = f64::NAN;
        let ctx = plain_ctx(&disc);
        let err = run(&ctx, &mut state, 1.0, None, |_, _| {}).unwrap_err();
        assert!(matches!(err.source, Error::NonPhysicalState(_)));
        assert_eq!(err.step, 0);
    }

    #[test]
    fn advection_study_observes_second_order_at_k1() {
        let cfg = RunConfig {
            preset: Preset::AdvectionSine,
            k: 1,
            t_end: Some(0.2),
            ..RunConfig::default()
        };
        let rows = convergence_study(&cfg, &[4, 8], |_| {}).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].q2.is_none());
        let q2 = rows[1].q2.unwrap();
        assert!(
            (1.6..=2.6).contains(&q2),
            "observed L2 order {q2:.2} outside the second-order window"
        );
    }

    #[test]
    fn study_without_exact_solution_is_rejected() {
        let cfg = RunConfig { preset: Preset::Burgers, k: 1, ..RunConfig::default() };
        let err = convergence_study(&cfg, &[2, 4], |_| {}).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}
