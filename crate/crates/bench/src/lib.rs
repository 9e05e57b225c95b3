//! Shared fixtures for the solver benchmarks.

use dgfv_core::config::RunConfig;
use dgfv_core::correction::CorrectionConfig;
use dgfv_core::presets::Preset;
use dgfv_core::residual::Discretization;
use dgfv_core::stepper::SolutionState;
use dgfv_core::subdivision::SchemeKind;

/// A discretized preset at its initial state with its default correction
/// settings, sized for benchmarking one solver phase rather than a full run.
pub fn fixture(
    preset: Preset,
    k: usize,
    resolution: usize,
) -> (Discretization, SolutionState, CorrectionConfig) {
    let mut cfg = RunConfig { preset, k, ..RunConfig::default() };
    cfg.resolution = Some(resolution);
    let problem = cfg.build_problem().expect("preset builds");
    let correction = cfg.correction_config(&problem);
    let disc = problem.discretize(k, SchemeKind::StructuredUniform).expect("discretizes");
    let state = problem.initial_state(&disc).expect("initializes");
    (disc, state, correction)
}
