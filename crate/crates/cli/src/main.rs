//! Command-line driver: runs benchmark presets, measures convergence rates,
//! and dumps the reference operators and subdivision geometry. Every solver
//! setting is a `key = value` line in a config file and equally a flag, so a
//! run is reproducible from the manifest written into its output bundle.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dgfv_core::config::RunConfig;
use dgfv_core::driver::{convergence_study, error_norms, run};
use dgfv_core::meshio::{load_mesh, MeshFormat};
use dgfv_core::operators::build_operators;
use dgfv_core::output::{
    format_rate_table, operator_summary, write_operator_dump, write_profile_csv,
    write_rate_table_csv, write_subdivision_dump, write_vtk, ProfileAxis,
};
use dgfv_core::physics::euler_from_primitive;
use dgfv_core::presets::{wedge_classify, Preset, Problem};
use dgfv_core::stepper::StepContext;
use dgfv_core::subdivision::{build_subdivision, SubdivisionScheme};
use dgfv_core::{BoundaryCondition, Mesh, Vec2};

#[derive(Parser)]
#[command(
    name = "dgfv",
    version,
    about = "Subcell finite-volume form of the DG method for 2D hyperbolic conservation laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Advance a preset problem to its final time and write the output bundle.
    Run(RunArgs),
    /// Measure submean error norms and observed orders over a refinement sequence.
    Converge(ConvergeArgs),
    /// Write the per-order reference operator matrices and their condition audit.
    DumpOperators(DumpArgs),
    /// Write the reference-triangle subdivision geometry.
    DumpSubdivision(DumpArgs),
}

/// Solver settings; each flag mirrors the config-file key of the same value
/// syntax, and flags override the file.
#[derive(Args, Clone, Default)]
struct SolverFlags {
    /// Configuration file with key = value lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Benchmark preset: advection-sine, advection-crenel, rotation, burgers,
    /// kpp, sod, sedov, step.
    #[arg(long)]
    preset: Option<String>,
    /// Polynomial degree k.
    #[arg(long, value_name = "K")]
    order: Option<String>,
    /// Subdivision scheme: structured-uniform, structured-gauss-lobatto,
    /// voronoi-uniform, voronoi-lagrange-mid.
    #[arg(long)]
    subdivision: Option<String>,
    /// Mesh refinement parameter for the preset generator.
    #[arg(long, value_name = "N")]
    gen: Option<String>,
    /// Correction mode: off, original, blended.
    #[arg(long)]
    correction: Option<String>,
    /// Physical admissibility detection: true or false.
    #[arg(long)]
    pad: Option<String>,
    /// Discrete maximum principle detection: true or false.
    #[arg(long)]
    nad: Option<String>,
    /// Detection stencil: linear or nonlinear (default chosen by the preset).
    #[arg(long)]
    nad_neighbors: Option<String>,
    /// Smooth-extrema relaxation: true or false.
    #[arg(long)]
    smooth_relax: Option<String>,
    /// Derivative-average level for relaxation: cell or subcell.
    #[arg(long)]
    smooth_level: Option<String>,
    /// Correction iteration cap before a forced first-order pass.
    #[arg(long)]
    max_iter: Option<String>,
    /// CFL safety factor in (0, 1].
    #[arg(long)]
    cfl: Option<String>,
    /// Final time (default chosen by the preset).
    #[arg(long)]
    t_end: Option<String>,
    /// Volume flux treatment: exact or projected.
    #[arg(long)]
    volume_flux: Option<String>,
    /// Initial datum variant for the kpp preset: radial or halfplane.
    #[arg(long)]
    kpp_ic: Option<String>,
    /// Ratio of specific heats for gas presets.
    #[arg(long)]
    gamma_gas: Option<String>,
    /// Steps between field dumps; zero writes only initial and final.
    #[arg(long)]
    output_every: Option<String>,
    /// Output bundle directory.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<String>,
    /// Stop after this many steps even before the final time.
    #[arg(long)]
    max_steps: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: SolverFlags,
    /// Load the primal mesh from FILE instead of generating it; .msh reads
    /// the MSH 2.2 subset, anything else the node-tri ASCII format.
    #[arg(long, value_name = "FILE")]
    mesh: Option<PathBuf>,
    /// Profile axis: diagonal, radius, y=VALUE (horizontal line), or
    /// x=VALUE (vertical line); default chosen by the preset.
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    flags: SolverFlags,
    /// Comma-separated mesh resolutions, coarse to fine.
    #[arg(long, default_value = "8,16,32")]
    levels: String,
}

#[derive(Args)]
struct DumpArgs {
    /// Polynomial degree k.
    #[arg(long, value_name = "K")]
    order: Option<String>,
    /// Subdivision scheme name.
    #[arg(long)]
    subdivision: Option<String>,
    /// Output directory; defaults to a name derived from order and scheme.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Converge(args) => cmd_converge(args),
        Command::DumpOperators(args) => cmd_dump_operators(args),
        Command::DumpSubdivision(args) => cmd_dump_subdivision(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Folds the config file and then each present flag into one `RunConfig`
/// through the shared key parser, so both sources accept identical syntax.
fn build_config(flags: &SolverFlags) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        cfg.apply_ini(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
    }
    let overrides: [(&str, &Option<String>); 19] = [
        ("preset", &flags.preset),
        ("k", &flags.order),
        ("scheme", &flags.subdivision),
        ("resolution", &flags.gen),
        ("correction", &flags.correction),
        ("pad", &flags.pad),
        ("nad", &flags.nad),
        ("nad_neighbors", &flags.nad_neighbors),
        ("smooth_relax", &flags.smooth_relax),
        ("smooth_level", &flags.smooth_level),
        ("max_iter", &flags.max_iter),
        ("cfl", &flags.cfl),
        ("t_end", &flags.t_end),
        ("volume_flux", &flags.volume_flux),
        ("kpp_ic", &flags.kpp_ic),
        ("gamma_gas", &flags.gamma_gas),
        ("output_every", &flags.output_every),
        ("output_dir", &flags.output_dir),
        ("max_steps", &flags.max_steps),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            cfg.apply(key, value)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_axis(text: &str) -> Result<ProfileAxis> {
    match text {
        "diagonal" => Ok(ProfileAxis::Diagonal),
        "radius" => Ok(ProfileAxis::Radius),
        _ => {
            if let Some(v) = text.strip_prefix("y=") {
                Ok(ProfileAxis::XLine { y: v.parse().context("parsing profile line level")? })
            } else if let Some(v) = text.strip_prefix("x=") {
                Ok(ProfileAxis::YLine { x: v.parse().context("parsing profile line level")? })
            } else {
                bail!("profile expects diagonal, radius, y=VALUE, or x=VALUE, got '{text}'")
            }
        }
    }
}

fn default_axis(preset: Preset) -> ProfileAxis {
    match preset {
        Preset::AdvectionSine | Preset::AdvectionCrenel | Preset::Burgers => ProfileAxis::Diagonal,
        Preset::Rotation => ProfileAxis::XLine { y: 0.25 },
        Preset::Kpp | Preset::Sod | Preset::Sedov => ProfileAxis::Radius,
        Preset::Step => ProfileAxis::XLine { y: 0.5 },
    }
}

/// Replaces the preset's generated mesh with one loaded from a file.
/// Declared tags win: 1 outflow, 2 symmetry wall, 3 periodic, 4 inflow;
/// untagged faces fall back to the preset's geometric boundary rule.
fn load_mesh_override(path: &Path, problem: &Problem, gamma: f64) -> Result<Mesh> {
    let format = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("msh")) {
        MeshFormat::Msh22
    } else {
        MeshFormat::NodeTri
    };
    let preset = problem.preset;
    let inflow = euler_from_primitive(1.4, Vec2::new(3.0, 0.0), 1.0, gamma).to_vec();
    let fallback: Box<dyn Fn(Vec2) -> BoundaryCondition> = match preset {
        Preset::AdvectionSine | Preset::AdvectionCrenel | Preset::Burgers => {
            Box::new(|_| BoundaryCondition::Periodic)
        }
        Preset::Rotation | Preset::Kpp => Box::new(|_| BoundaryCondition::Outflow),
        Preset::Sod | Preset::Sedov => Box::new(wedge_classify(PI / 4.0, 1.0)),
        Preset::Step => {
            let state = inflow.clone();
            Box::new(move |mid: Vec2| {
                if mid.x.abs() < 1e-9 {
                    BoundaryCondition::Inflow(state.clone())
                } else if (mid.x - 3.0).abs() < 1e-9 {
                    BoundaryCondition::Outflow
                } else {
                    BoundaryCondition::SymmetryWall
                }
            })
        }
    };
    let classify = |mid: Vec2, tag: Option<i32>| match tag {
        Some(1) => BoundaryCondition::Outflow,
        Some(2) => BoundaryCondition::SymmetryWall,
        Some(3) => BoundaryCondition::Periodic,
        Some(4) => BoundaryCondition::Inflow(inflow.clone()),
        _ => fallback(mid),
    };
    let (mut mesh, report) = load_mesh(path, format, &classify)
        .with_context(|| format!("loading mesh {}", path.display()))?;
    if report.flipped_triangles > 0 {
        println!("note: reoriented {} clockwise triangles from the mesh file", report.flipped_triangles);
    }
    if matches!(preset, Preset::AdvectionSine | Preset::AdvectionCrenel | Preset::Burgers) {
        mesh.pair_periodic(&[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)])
            .context("pairing periodic faces of the loaded mesh")?;
    }
    Ok(mesh)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = build_config(&args.flags)?;
    let mut problem = cfg.build_problem()?;
    if let Some(path) = &args.mesh {
        problem.mesh = load_mesh_override(path, &problem, cfg.gamma_gas)?;
    }
    let axis = match &args.profile {
        Some(text) => parse_axis(text)?,
        None => default_axis(cfg.preset),
    };
    let disc = problem.discretize(cfg.k, cfg.scheme)?;
    let mut state = problem.initial_state(&disc)?;
    let t_end = cfg.final_time(&problem);
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("manifest.ini"), cfg.manifest())?;
    write_vtk(&dir.join("step_000000.vtk"), &disc, &state, &[])?;
    println!(
        "preset {} | k = {} | scheme {} | {} cells, {} subcells | t_end = {}",
        cfg.preset.name(),
        cfg.k,
        cfg.scheme.name(),
        disc.mesh.triangles.len(),
        disc.conn.n_subcells(),
        t_end,
    );
    if t_end <= 0.0 {
        write_profile_csv(&dir.join("profile.csv"), &disc, &state, axis)?;
        println!("final time is zero: wrote the initial condition to {}", dir.display());
        return Ok(());
    }
    let correction = cfg.correction_config(&problem);
    let ctx = StepContext {
        disc: &disc,
        volume_flux: cfg.volume_flux,
        correction,
        cfl: cfg.cfl,
        dt_cap: None,
    };
    let mut log = BufWriter::new(File::create(dir.join("corrections.csv"))?);
    writeln!(log, "step,t,dt,stage,gamma,iterations,troubled,recomputed,forced")?;
    let mut dump_error: Option<anyhow::Error> = None;
    let outcome = run(&ctx, &mut state, t_end, cfg.max_steps, |s, rep| {
        for (stage, sr) in rep.stages.iter().enumerate() {
            let c = sr.correction;
            let _ = writeln!(
                log,
                "{},{:.12e},{:.12e},{stage},{:.12e},{},{},{},{}",
                s.step, s.t, rep.dt, sr.gamma, c.iterations, c.troubled, c.recomputed, c.forced
            );
        }
        if cfg.output_every > 0 && s.step as usize % cfg.output_every == 0 && dump_error.is_none()
        {
            let path = dir.join(format!("step_{:06}.vtk", s.step));
            if let Err(e) = write_vtk(&path, &disc, s, &[]) {
                dump_error = Some(e.into());
            }
        }
    })?;
    if let Some(e) = dump_error {
        return Err(e).context("writing field dump");
    }
    log.flush()?;
    write_vtk(&dir.join("final.vtk"), &disc, &state, &[])?;
    write_profile_csv(&dir.join("profile.csv"), &disc, &state, axis)?;

    let steps = outcome.reports.len().max(1);
    let stage_count = 3 * steps;
    let mut troubled = 0usize;
    let mut iters = 0usize;
    let mut active = 0usize;
    let mut forced = 0usize;
    for rep in &outcome.reports {
        for sr in &rep.stages {
            troubled += sr.correction.troubled;
            if sr.correction.iterations > 0 {
                iters += sr.correction.iterations;
                active += 1;
            }
            forced += sr.correction.forced as usize;
        }
    }
    let fraction = troubled as f64 / (stage_count * disc.conn.n_subcells()) as f64;
    let mean_iters = if active > 0 { iters as f64 / active as f64 } else { 0.0 };
    println!(
        "completed {} steps to t = {:.6} in {:.2} s{}",
        outcome.reports.len(),
        state.t,
        outcome.wall_seconds,
        if outcome.completed { "" } else { " (step limit reached)" },
    );
    println!(
        "correction: corrected-subcell fraction {fraction:.3e}, mean iterations {mean_iters:.2}, forced passes {forced}",
    );
    if let Some(exact) = problem.exact_state(&disc, state.t) {
        let exact = exact?;
        let (l1, l2, linf) = error_norms(&disc, &state.submeans, &exact.submeans);
        println!("error vs exact solution: L1 {l1:.6e}  L2 {l2:.6e}  Linf {linf:.6e}");
    }
    println!("output bundle in {}", dir.display());
    Ok(())
}

fn cmd_converge(args: &ConvergeArgs) -> Result<()> {
    let cfg = build_config(&args.flags)?;
    let levels: Vec<usize> = args
        .levels
        .split(',')
        .map(|t| t.trim().parse().with_context(|| format!("parsing level '{}'", t.trim())))
        .collect::<Result<_>>()?;
    println!(
        "preset {} | k = {} | scheme {} | levels {:?}",
        cfg.preset.name(),
        cfg.k,
        cfg.scheme.name(),
        levels,
    );
    let rows = convergence_study(&cfg, &levels, |row| {
        let rate = row.q2.map(|q| format!("  q2 = {q:.2}")).unwrap_or_default();
        println!("1/h = {:>4}  cells = {:>7}  L2 = {:.4e}{rate}", row.resolution, row.n_cells, row.l2);
    })?;
    print!("{}", format_rate_table(&rows));
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join("rates.csv");
    write_rate_table_csv(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Order and scheme for the dump commands, parsed by the config keys so the
/// spellings match `run`.
fn dump_scheme(args: &DumpArgs) -> Result<SubdivisionScheme> {
    let mut cfg = RunConfig::default();
    if let Some(k) = &args.order {
        cfg.apply("k", k)?;
    }
    if let Some(scheme) = &args.subdivision {
        cfg.apply("scheme", scheme)?;
    }
    cfg.validate()?;
    Ok(cfg.scheme_struct())
}

fn cmd_dump_operators(args: &DumpArgs) -> Result<()> {
    let scheme = dump_scheme(args)?;
    let ops = build_operators(scheme)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("operators-k{}-{}", scheme.k, scheme.kind.name())));
    write_operator_dump(&dir, &ops)?;
    println!("{}", operator_summary(&ops));
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_dump_subdivision(args: &DumpArgs) -> Result<()> {
    let scheme = dump_scheme(args)?;
    let topo = build_subdivision(scheme)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("subdivision-k{}-{}", scheme.k, scheme.kind.name())));
    write_subdivision_dump(&dir, &topo)?;
    println!(
        "scheme {} k = {}: {} subcells, {} interior faces, {} boundary subfaces",
        scheme.kind.name(),
        scheme.k,
        topo.n_sub,
        topo.interior_faces.len(),
        topo.boundary_subfaces.len(),
    );
    println!("wrote {}", dir.display());
    Ok(())
}
