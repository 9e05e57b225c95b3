//! Built-in benchmark problems: model, mesh, boundary conditions, initial
//! data, admissible set, and the exact solution where one is known. Each
//! preset takes a single resolution parameter so convergence studies can
//! refine uniformly.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mesh::{
    generate_rect_mesh, generate_step_mesh, generate_wedge_mesh, BoundaryCondition, Mesh,
};
use crate::correction::NadNeighbors;
use crate::physics::{euler_from_primitive, AdmissibleSet, Model};
use crate::residual::Discretization;
use crate::riemann::{RiemannProblem, RiemannSolution};
use crate::stepper::{initialize, InitialData, SolutionState};
use crate::subdivision::{SchemeKind, SubdivisionScheme};

pub const GAMMA_DEFAULT: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    AdvectionSine,
    AdvectionCrenel,
    Rotation,
    Burgers,
    Kpp,
    Sod,
    Sedov,
    Step,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::AdvectionSine,
        Preset::AdvectionCrenel,
        Preset::Rotation,
        Preset::Burgers,
        Preset::Kpp,
        Preset::Sod,
        Preset::Sedov,
        Preset::Step,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::AdvectionSine => "advection-sine",
            Preset::AdvectionCrenel => "advection-crenel",
            Preset::Rotation => "rotation",
            Preset::Burgers => "burgers",
            Preset::Kpp => "kpp",
            Preset::Sod => "sod",
            Preset::Sedov => "sedov",
            Preset::Step => "step",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidConfig(format!("unknown preset '{s}'; expected one of {names:?}"))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KppInit {
    /// Jump across the unit circle; the entropy solution develops the
    /// rotating composite wave the benchmark is known for.
    Radial,
    /// Jump across the vertical line x = 1/2.
    Halfplane,
}

#[derive(Debug, Clone, Copy)]
pub struct PresetOptions {
    pub gamma_gas: f64,
    pub kpp_ic: KppInit,
}

impl Default for PresetOptions {
    fn default() -> Self {
        PresetOptions { gamma_gas: GAMMA_DEFAULT, kpp_ic: KppInit::Radial }
    }
}

/// Pointwise initial data of a preset.
#[derive(Debug, Clone, Copy)]
pub enum InitField {
    /// sin(2 pi (x + y)).
    SineSum,
    /// Piecewise bands in x + y with period two: one on [1/4, 1/2] and
    /// [5/4, 3/2], zero on [3/4, 1] and [7/4, 2], one half elsewhere.
    Crenel,
    /// Slotted disk at (1/2, 3/4), cone at (1/2, 1/4), cosine hump at
    /// (1/4, 1/2), all of radius 0.15 on a zero background.
    RotationShapes,
    /// 7 pi / 2 inside the unit circle, pi / 4 outside.
    KppRadial,
    /// 7 pi / 2 left of x = 1/2, pi / 4 right of it.
    KppHalfplane,
    /// High pressure gas at rest inside radius 1/2, light gas outside.
    SodCylindrical { gamma: f64 },
    /// Unit density at near-zero pressure; the blast energy is deposited
    /// separately into the subcell containing the origin.
    SedovAmbient { gamma: f64 },
    /// Uniform conservative gas state.
    UniformEuler { state: [f64; 4] },
}

fn crenel_profile(xi: f64) -> f64 {
    let xi = xi.rem_euclid(2.0);
    if (0.25..=0.5).contains(&xi) || (1.25..=1.5).contains(&xi) {
        1.0
    } else if (0.75..=1.0).contains(&xi) || (1.75..=2.0).contains(&xi) {
        0.0
    } else {
        0.5
    }
}

fn rotation_shapes(p: Vec2) -> f64 {
    let r0 = 0.15;
    let rd = (p - Vec2::new(0.5, 0.75)).norm() / r0;
    if rd <= 1.0 && !((p.x - 0.5).abs() < 0.025 && p.y < 0.85) {
        return 1.0;
    }
    let rc = (p - Vec2::new(0.5, 0.25)).norm() / r0;
    if rc <= 1.0 {
        return 1.0 - rc;
    }
    let rh = (p - Vec2::new(0.25, 0.5)).norm() / r0;
    if rh <= 1.0 {
        return 0.25 * (1.0 + (PI * rh).cos());
    }
    0.0
}

impl InitField {
    pub fn eval(&self, p: Vec2, out: &mut [f64]) {
        match self {
            InitField::SineSum => out[0] = (2.0 * PI * (p.x + p.y)).sin(),
            InitField::Crenel => out[0] = crenel_profile(p.x + p.y),
            InitField::RotationShapes => out[0] = rotation_shapes(p),
            InitField::KppRadial => {
                out[0] = if p.norm() <= 1.0 { 3.5 * PI } else { 0.25 * PI }
            }
            InitField::KppHalfplane => {
                out[0] = if p.x < 0.5 { 3.5 * PI } else { 0.25 * PI }
            }
            InitField::SodCylindrical { gamma } => {
                let (rho, pr) = if p.norm() < 0.5 { (1.0, 1.0) } else { (0.125, 0.1) };
                out.copy_from_slice(&euler_from_primitive(
                    rho,
                    Vec2::new(0.0, 0.0),
                    pr,
                    *gamma,
                ));
            }
            InitField::SedovAmbient { gamma } => {
                out.copy_from_slice(&euler_from_primitive(
                    1.0,
                    Vec2::new(0.0, 0.0),
                    1e-14,
                    *gamma,
                ));
            }
            InitField::UniformEuler { state } => out.copy_from_slice(state),
        }
    }
}

/// Exact solution fields used by convergence studies and error reports.
#[derive(Debug, Clone, Copy)]
pub enum ExactField {
    /// Initial data translated by a constant velocity.
    Advected { init: InitField, a: Vec2 },
    /// Initial data rotated backwards about the domain center.
    Rotated { init: InitField, center: Vec2 },
    /// Planar shock-tube solution read along the radius, a quasi-exact
    /// reference valid while curvature effects are small.
    SodTube { sol: RiemannSolution, r0: f64, gamma: f64 },
}

impl ExactField {
    pub fn eval(&self, t: f64, p: Vec2, out: &mut [f64]) {
        match self {
            ExactField::Advected { init, a } => init.eval(p - *a * t, out),
            ExactField::Rotated { init, center } => {
                let d = p - *center;
                let (s, c) = (-t).sin_cos();
                let q = Vec2::new(c * d.x - s * d.y, s * d.x + c * d.y) + *center;
                init.eval(q, out);
            }
            ExactField::SodTube { sol, r0, gamma } => {
                let r = p.norm();
                let (rho, u, pr) = if t <= 0.0 {
                    let q = &sol.problem;
                    if r < *r0 {
                        (q.rho_l, 0.0, q.p_l)
                    } else {
                        (q.rho_r, 0.0, q.p_r)
                    }
                } else {
                    sol.sample((r - r0) / t)
                };
                let dir = if r > 1e-300 { p / r } else { Vec2::new(1.0, 0.0) };
                out.copy_from_slice(&euler_from_primitive(rho, dir * u, pr, *gamma));
            }
        }
    }
}

/// Energy concentrated into the one subcell whose polygon contains the
/// origin (the lowest cell and subcell index when the origin is a shared
/// vertex).
#[derive(Debug, Clone, Copy)]
pub struct PointBlast {
    pub origin: Vec2,
    pub energy: f64,
}

pub struct Problem {
    pub preset: Preset,
    pub model: Model,
    pub mesh: Mesh,
    pub t_end: f64,
    pub pad: Option<AdmissibleSet>,
    pub init: InitField,
    pub exact: Option<ExactField>,
    pub blast: Option<PointBlast>,
    /// Detection stencil suited to the problem class: cell-wise for linear
    /// transport, vertex-wise for nonlinear waves.
    pub nad_neighbors: NadNeighbors,
}

fn periodic_unit_square(n: usize) -> Result<Mesh> {
    let (mut mesh, _) = generate_rect_mesh(
        n,
        n,
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 1.0),
        &|_| BoundaryCondition::Periodic,
    )?;
    mesh.pair_periodic(&[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)])?;
    Ok(mesh)
}

/// Geometric boundary rule for a polar wedge with its apex at the origin:
/// the two straight sides reflect, the outer arc lets waves leave.
pub fn wedge_classify(theta_max: f64, r_max: f64) -> impl Fn(Vec2) -> BoundaryCondition {
    move |p: Vec2| {
        let on_lower = p.y.abs() < 1e-9 * r_max;
        let on_upper = (p.y - p.x * theta_max.tan()).abs() < 1e-9 * r_max;
        if on_lower || on_upper {
            BoundaryCondition::SymmetryWall
        } else {
            BoundaryCondition::Outflow
        }
    }
}

impl Preset {
    /// Default mesh resolution parameter, matched to the reference runs.
    pub fn default_resolution(&self) -> usize {
        match self {
            Preset::AdvectionSine => 10,
            Preset::AdvectionCrenel => 12,
            Preset::Rotation => 16,
            Preset::Burgers => 8,
            Preset::Kpp => 16,
            Preset::Sod => 12,
            Preset::Sedov => 14,
            Preset::Step => 10,
        }
    }

    pub fn build(&self, resolution: Option<usize>, opts: &PresetOptions) -> Result<Problem> {
        let n = resolution.unwrap_or_else(|| self.default_resolution());
        if n == 0 {
            return Err(Error::InvalidConfig("resolution must be positive".into()));
        }
        let g = opts.gamma_gas;
        match self {
            Preset::AdvectionSine | Preset::AdvectionCrenel => {
                let a = Vec2::new(1.0, 1.0);
                let init = if *self == Preset::AdvectionSine {
                    InitField::SineSum
                } else {
                    InitField::Crenel
                };
                let pad = if *self == Preset::AdvectionSine {
                    AdmissibleSet::scalar_from_range(-1.0, 1.0)
                } else {
                    AdmissibleSet::scalar_from_range(0.0, 1.0)
                };
                Ok(Problem {
                    preset: *self,
                    model: Model::Advection { a },
                    mesh: periodic_unit_square(n)?,
                    t_end: 1.0,
                    pad: Some(pad),
                    init,
                    exact: Some(ExactField::Advected { init, a }),
                    blast: None,
                    nad_neighbors: NadNeighbors::Linear,
                })
            }
            Preset::Rotation => {
                let init = InitField::RotationShapes;
                Ok(Problem {
                    preset: *self,
                    model: Model::Rotation,
                    mesh: generate_rect_mesh(
                        n,
                        n,
                        Vec2::new(0.0, 0.0),
                        Vec2::new(1.0, 1.0),
                        &|_| BoundaryCondition::Outflow,
                    )?
                    .0,
                    t_end: 2.0 * PI,
                    pad: Some(AdmissibleSet::scalar_from_range(0.0, 1.0)),
                    init,
                    exact: Some(ExactField::Rotated { init, center: Vec2::new(0.5, 0.5) }),
                    blast: None,
                    nad_neighbors: NadNeighbors::Linear,
                })
            }
            Preset::Burgers => Ok(Problem {
                preset: *self,
                model: Model::Burgers,
                mesh: periodic_unit_square(n)?,
                t_end: 0.5,
                pad: Some(AdmissibleSet::scalar_from_range(-1.0, 1.0)),
                init: InitField::SineSum,
                exact: None,
                blast: None,
                nad_neighbors: NadNeighbors::Nonlinear,
            }),
            Preset::Kpp => {
                let init = match opts.kpp_ic {
                    KppInit::Radial => InitField::KppRadial,
                    KppInit::Halfplane => InitField::KppHalfplane,
                };
                Ok(Problem {
                    preset: *self,
                    model: Model::Kpp,
                    mesh: generate_rect_mesh(
                        n,
                        n,
                        Vec2::new(-2.0, -2.5),
                        Vec2::new(2.0, 1.5),
                        &|_| BoundaryCondition::Outflow,
                    )?
                    .0,
                    t_end: 1.0,
                    pad: Some(AdmissibleSet::scalar_from_range(0.25 * PI, 3.5 * PI)),
                    init,
                    exact: None,
                    blast: None,
                    nad_neighbors: NadNeighbors::Nonlinear,
                })
            }
            Preset::Sod => {
                let theta = 0.25 * PI;
                let n_theta = ((n as f64) * 10.0 / 12.0).round().max(2.0) as usize;
                let sol = RiemannProblem {
                    rho_l: 1.0,
                    u_l: 0.0,
                    p_l: 1.0,
                    rho_r: 0.125,
                    u_r: 0.0,
                    p_r: 0.1,
                    gamma: g,
                }
                .solve()?;
                Ok(Problem {
                    preset: *self,
                    model: Model::Euler { gamma: g },
                    mesh: generate_wedge_mesh(0.0, 1.0, theta, n, n_theta, 1.0, &wedge_classify(theta, 1.0))?.0,
                    t_end: 0.2,
                    pad: Some(AdmissibleSet::EulerPositive),
                    init: InitField::SodCylindrical { gamma: g },
                    exact: Some(ExactField::SodTube { sol, r0: 0.5, gamma: g }),
                    blast: None,
                    nad_neighbors: NadNeighbors::Nonlinear,
                })
            }
            Preset::Sedov => {
                let theta = 0.25 * PI;
                let n_theta = ((n as f64) * 10.0 / 14.0).round().max(2.0) as usize;
                Ok(Problem {
                    preset: *self,
                    model: Model::Euler { gamma: g },
                    mesh: generate_wedge_mesh(0.0, 1.2, theta, n, n_theta, 1.0, &wedge_classify(theta, 1.2))?.0,
                    t_end: 1.0,
                    pad: Some(AdmissibleSet::EulerPositive),
                    init: InitField::SedovAmbient { gamma: g },
                    exact: None,
                    blast: Some(PointBlast { origin: Vec2::new(0.0, 0.0), energy: 0.244816 }),
                    nad_neighbors: NadNeighbors::Nonlinear,
                })
            }
            Preset::Step => {
                let h = 1.0 / n as f64;
                let inflow = euler_from_primitive(1.4, Vec2::new(3.0, 0.0), 1.0, g).to_vec();
                let state: [f64; 4] = inflow.clone().try_into().unwrap();
                let classify = move |p: Vec2| {
                    if p.x < 1e-9 {
                        BoundaryCondition::Inflow(inflow.clone())
                    } else if p.x > 3.0 - 1e-9 {
                        BoundaryCondition::Outflow
                    } else {
                        BoundaryCondition::SymmetryWall
                    }
                };
                Ok(Problem {
                    preset: *self,
                    model: Model::Euler { gamma: g },
                    mesh: generate_step_mesh(h, &classify)?.0,
                    t_end: 4.0,
                    pad: Some(AdmissibleSet::EulerPositive),
                    init: InitField::UniformEuler { state },
                    exact: None,
                    blast: None,
                    nad_neighbors: NadNeighbors::Nonlinear,
                })
            }
        }
    }
}

fn polygon_contains(poly: &[Vec2], p: Vec2, tol: f64) -> bool {
    // Subcell polygons are convex and counterclockwise.
    for e in 0..poly.len() {
        let a = poly[e];
        let b = poly[(e + 1) % poly.len()];
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if cross < -tol {
            return false;
        }
    }
    true
}

impl Problem {
    pub fn discretize(&self, k: usize, kind: SchemeKind) -> Result<Discretization> {
        Discretization::new(self.mesh.clone(), self.model.clone(), SubdivisionScheme { kind, k })
    }

    /// Locates the blast subcell: the lowest-indexed subcell whose polygon
    /// contains the origin.
    pub fn blast_subcell(&self, disc: &Discretization) -> Option<(usize, usize)> {
        let blast = self.blast?;
        let scale = disc.mesh.areas.iter().fold(0f64, |a, &b| a.max(b)).sqrt();
        let tol = 1e-12 * scale.max(1.0);
        for c in 0..disc.n_cells() {
            for m in 0..disc.n_sub() {
                if polygon_contains(&disc.conn.geom[c].sub_vertices[m], blast.origin, tol) {
                    return Some((c, m));
                }
            }
        }
        None
    }

    pub fn initial_state(&self, disc: &Discretization) -> Result<SolutionState> {
        match self.blast {
            Some(blast) if matches!(self.model, Model::Euler { .. }) => {
                let (bc, bm) = self.blast_subcell(disc).ok_or_else(|| {
                    Error::InvalidConfig("no subcell contains the blast origin".into())
                })?;
                let volume = disc.conn.geom[bc].sub_areas[bm];
                let ambient = self.init;
                let f = move |c: usize, m: usize, _x: Vec2, out: &mut [f64]| {
                    ambient.eval(Vec2::new(0.0, 0.0), out);
                    if c == bc && m == bm {
                        // Total energy eps0 spread over this one subcell;
                        // equivalently p = (gamma - 1) eps0 / volume.
                        out[3] = blast.energy / volume;
                    }
                };
                initialize(disc, &InitialData::SubcellConstant(&f), self.pad.as_ref())
            }
            _ => {
                let init = self.init;
                let f = move |p: Vec2, out: &mut [f64]| init.eval(p, out);
                initialize(disc, &InitialData::Pointwise(&f), self.pad.as_ref())
            }
        }
    }

    /// Subcell averages of the exact solution at time t, when known.
    pub fn exact_state(&self, disc: &Discretization, t: f64) -> Option<Result<SolutionState>> {
        let exact = self.exact?;
        let f = move |p: Vec2, out: &mut [f64]| exact.eval(t, p, out);
        Some(initialize(disc, &InitialData::Pointwise(&f), None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_str(p.name()).unwrap(), p);
        }
        assert!(Preset::from_str("bogus").is_err());
    }

    #[test]
    fn reference_meshes_have_the_documented_cell_counts() {
        let opts = PresetOptions::default();
        for (preset, cells) in [
            (Preset::AdvectionCrenel, 576),
            (Preset::Kpp, 1024),
            (Preset::Sod, 230),
            (Preset::Sedov, 270),
            (Preset::Step, 432),
        ] {
            let problem = preset.build(None, &opts).unwrap();
            assert_eq!(problem.mesh.triangles.len(), cells, "{}", preset.name());
        }
    }

    #[test]
    fn crenel_bands_match_the_definition() {
        for (xi, expect) in [
            (0.3, 1.0),
            (0.5, 1.0),
            (0.6, 0.5),
            (0.8, 0.0),
            (1.3, 1.0),
            (1.6, 0.5),
            (1.9, 0.0),
            (2.3, 1.0),
            (-0.2, 0.0),
            (0.1, 0.5),
        ] {
            assert_eq!(crenel_profile(xi), expect, "xi = {xi}");
        }
    }

    #[test]
    fn rotation_shapes_have_the_standard_geometry() {
        // Disk interior, slot interior, cone peak, hump peak, background.
        assert_eq!(rotation_shapes(Vec2::new(0.6, 0.75)), 1.0);
        assert_eq!(rotation_shapes(Vec2::new(0.5, 0.7)), 0.0);
        assert_abs_diff_eq!(rotation_shapes(Vec2::new(0.5, 0.25)), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rotation_shapes(Vec2::new(0.25, 0.5)), 0.5, epsilon = 1e-15);
        assert_eq!(rotation_shapes(Vec2::new(0.05, 0.05)), 0.0);
    }

    #[test]
    fn advected_exact_returns_to_initial_after_one_period() {
        let opts = PresetOptions::default();
        for preset in [Preset::AdvectionSine, Preset::AdvectionCrenel] {
            let problem = preset.build(Some(4), &opts).unwrap();
            let exact = problem.exact.unwrap();
            let mut u0 = [0.0];
            let mut ut = [0.0];
            for p in [Vec2::new(0.13, 0.41), Vec2::new(0.77, 0.29), Vec2::new(0.5, 0.9)] {
                problem.init.eval(p, &mut u0);
                exact.eval(1.0, p, &mut ut);
                assert_abs_diff_eq!(u0[0], ut[0], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rotated_exact_returns_to_initial_after_a_turn() {
        let problem = Preset::Rotation.build(Some(4), &PresetOptions::default()).unwrap();
        let exact = problem.exact.unwrap();
        let mut u0 = [0.0];
        let mut ut = [0.0];
        for p in [Vec2::new(0.5, 0.8), Vec2::new(0.45, 0.2), Vec2::new(0.3, 0.5)] {
            problem.init.eval(p, &mut u0);
            exact.eval(2.0 * PI, p, &mut ut);
            assert_abs_diff_eq!(u0[0], ut[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn kpp_variants_jump_across_different_sets() {
        let opts = PresetOptions::default();
        let radial = Preset::Kpp.build(Some(4), &opts).unwrap();
        let half = Preset::Kpp
            .build(Some(4), &PresetOptions { kpp_ic: KppInit::Halfplane, ..opts })
            .unwrap();
        let mut a = [0.0];
        let mut b = [0.0];
        // Inside the circle but right of the line.
        radial.init.eval(Vec2::new(0.8, 0.0), &mut a);
        half.init.eval(Vec2::new(0.8, 0.0), &mut b);
        assert_eq!(a[0], 3.5 * PI);
        assert_eq!(b[0], 0.25 * PI);
    }

    #[test]
    fn sedov_blast_deposits_the_reference_energy() {
        let problem = Preset::Sedov.build(None, &PresetOptions::default()).unwrap();
        let disc = problem.discretize(1, SchemeKind::StructuredUniform).unwrap();
        let state = problem.initial_state(&disc).unwrap();
        let n_sub = disc.n_sub();
        let nv = 4;
        let mut total_e = 0.0;
        let mut total_area = 0.0;
        for c in 0..disc.n_cells() {
            for m in 0..n_sub {
                let area = disc.conn.geom[c].sub_areas[m];
                total_e += area * state.submeans[(c * nv + 3) * n_sub + m];
                total_area += area;
            }
        }
        let ambient = 1e-14 / 0.4 * total_area;
        assert_abs_diff_eq!(total_e - ambient, 0.244816, epsilon = 1e-10);
        // The blast subcell touches the origin.
        let (bc, bm) = problem.blast_subcell(&disc).unwrap();
        let poly = &disc.conn.geom[bc].sub_vertices[bm];
        let nearest = poly.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-12);
    }

    #[test]
    fn step_inflow_state_matches_mach_three() {
        let problem = Preset::Step.build(None, &PresetOptions::default()).unwrap();
        if let InitField::UniformEuler { state } = problem.init {
            assert_abs_diff_eq!(state[0], 1.4, epsilon = 1e-15);
            assert_abs_diff_eq!(state[1], 4.2, epsilon = 1e-15);
            assert_abs_diff_eq!(state[2], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(state[3], 8.8, epsilon = 1e-12);
        } else {
            panic!("step preset must start from a uniform state");
        }
    }

    #[test]
    fn sod_exact_profile_is_radially_symmetric_and_admissible() {
        let problem = Preset::Sod.build(None, &PresetOptions::default()).unwrap();
        let exact = problem.exact.unwrap();
        let mut u = [0.0; 4];
        for r in [0.1, 0.4, 0.55, 0.7, 0.95] {
            for th in [0.0, 0.3, 0.7] {
                exact.eval(0.2, Vec2::new(r * f64::cos(th), r * f64::sin(th)), &mut u);
                assert!(u[0] > 0.0);
                let e_int = u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0];
                assert!(e_int > 0.0, "internal energy must stay positive at r = {r}");
            }
            let mut ua = [0.0; 4];
            let mut ub = [0.0; 4];
            exact.eval(0.2, Vec2::new(r, 0.0), &mut ua);
            exact.eval(0.2, Vec2::new(0.0, r), &mut ub);
            assert_abs_diff_eq!(ua[0], ub[0], epsilon = 1e-14);
            assert_abs_diff_eq!(ua[3], ub[3], epsilon = 1e-14);
        }
    }
}
