//! Command-line front end: scenario handling, solver dispatch, reports.
//!
//! Exit codes: 0 success, 2 usage/validation error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use equipot::domain::{
    validate, ConductorGeometry, GridSpec, ModelParams, RadialGrid, Scenario, VoxelSet,
    DEFAULT_DELTA,
};
use equipot::equilibrium::{
    ball_closed_form, charge_table_csv, equilibrium_report, nested_spheres_charges,
    solve_equilibrium, total_variation,
};
use equipot::error::Error;
use equipot::forces::force_profile_csv;
use equipot::functional::capacity;
use equipot::photoeffect::{pair_force_table_csv, photoeffect_report, PairModel};
use equipot::radial::potential_table_csv;
use equipot::report::{fmt12, fmt6};
use equipot::scenario::{load_scenario, DEFAULT_GRID};
use equipot::verify::{all_passed, render_report, run_suite};
use equipot::voxel::{field_sidecar, field_to_bytes, mask_from_rle, solve_voxel_equilibrium};

#[derive(Parser)]
#[command(
    name = "equipot",
    version,
    about = "Screened electrostatics on conductors: capacities, equilibria, forces, pair thresholds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity of a conductor, with the analytic value when known
    Capacity(Common),
    /// Equilibrium charge distribution and its report + charge table
    Equilibrium(Common),
    /// Equilibrium potential table (rho, U, dU-, dU+)
    Potential(Common),
    /// Force profile of the equilibrium field
    Forces(Common),
    /// Electron-pair stability parameter and ejection threshold
    Photoeffect(Common),
    /// Induced face charges on nested conducting spheres (k = 0)
    Nested(Common),
    /// Voxel equilibrium solve with optional binary field export
    Voxel(Common),
    /// Run a self-verification suite
    Verify {
        /// radial, functional, equilibrium, forces, photoeffect, voxel, or all
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// Flags mirror scenario fields one-to-one; `--scenario` loads a file and
/// the flags override its values.
#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// ball, nested_shells, or voxel
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    /// Total conductor charge q
    #[arg(long)]
    charge: Option<f64>,
    /// Probe (electron) charge e
    #[arg(long)]
    probe_charge: Option<f64>,
    /// Pair separation delta
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Voxel lattice spacing (with --radius voxelizes a ball)
    #[arg(long)]
    spacing: Option<f64>,
    /// RLE voxel mask file
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Inner ball radius for nested_shells
    #[arg(long)]
    inner_radius: Option<f64>,
    /// Shell faces as a:b pairs, e.g. 0.6:0.7,0.8:0.9
    #[arg(long)]
    shells: Option<String>,
    /// Optional zero-thickness outer sphere radius
    #[arg(long)]
    outer_sphere: Option<f64>,
    /// Write the CSV/binary artifact here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn from_error(e: Error) -> Failure {
    let code = match e {
        Error::InvalidScenario(_) => 2,
        _ => 3,
    };
    Failure { code, message: e.to_string() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Capacity(c) => cmd_capacity(&c),
        Command::Equilibrium(c) => cmd_equilibrium(&c),
        Command::Potential(c) => cmd_potential(&c),
        Command::Forces(c) => cmd_forces(&c),
        Command::Photoeffect(c) => cmd_photoeffect(&c),
        Command::Nested(c) => cmd_nested(&c),
        Command::Voxel(c) => cmd_voxel(&c),
        Command::Verify { suite } => cmd_verify(&suite),
    }
}

/// Scenario assembly: file first (if any), then flag overrides.
fn build_scenario(c: &Common) -> Result<Scenario, Failure> {
    let mut scenario = match &c.scenario {
        Some(path) => load_scenario(path).map_err(from_error)?,
        None => Scenario {
            geometry: geometry_from_flags(c, None)?,
            params: ModelParams::default(),
            grid: DEFAULT_GRID,
            requested_outputs: Vec::new(),
        },
    };
    if c.scenario.is_some()
        && (c.shape.is_some()
            || c.radius.is_some()
            || c.spacing.is_some()
            || c.mask.is_some()
            || c.inner_radius.is_some()
            || c.shells.is_some()
            || c.outer_sphere.is_some())
    {
        scenario.geometry = geometry_from_flags(c, Some(&scenario.geometry))?;
    }
    if let Some(k) = c.k {
        scenario.params.k = k;
    }
    if let Some(q) = c.charge {
        scenario.params.q = q;
    }
    if let Some(e) = c.probe_charge {
        scenario.params.e = e;
    }
    if let Some(delta) = c.delta {
        scenario.params.delta = delta;
    }
    if let Some(nodes) = c.nodes {
        scenario.grid.node_count = nodes;
    }
    if let Some(r_max) = c.r_max {
        scenario.grid.r_max = r_max;
    }
    adapt_grid(&mut scenario);
    let violations = validate(&scenario);
    if !violations.is_empty() {
        return Err(usage(violations.join("; ")));
    }
    Ok(scenario)
}

/// Default grid scaled to the geometry when the user gave neither a grid
/// nor a scenario file (r_max must clear the conductor).
fn adapt_grid(scenario: &mut Scenario) {
    let outer = scenario.geometry.outermost_radius();
    if scenario.grid == DEFAULT_GRID && scenario.grid.r_max <= outer * 1.5 {
        scenario.grid = GridSpec { r_max: outer * 10.0, node_count: DEFAULT_GRID.node_count };
    }
}

fn geometry_from_flags(
    c: &Common,
    base: Option<&ConductorGeometry>,
) -> Result<ConductorGeometry, Failure> {
    let shape = c.shape.as_deref().unwrap_or(match base {
        Some(ConductorGeometry::NestedShells { .. }) => "nested_shells",
        Some(ConductorGeometry::VoxelSet(_)) => "voxel",
        _ => {
            if c.inner_radius.is_some() || c.shells.is_some() {
                "nested_shells"
            } else if c.mask.is_some() || c.spacing.is_some() {
                "voxel"
            } else {
                "ball"
            }
        }
    });
    match shape {
        "ball" => {
            let radius = c
                .radius
                .or(match base {
                    Some(ConductorGeometry::Ball { radius }) => Some(*radius),
                    _ => None,
                })
                .ok_or_else(|| usage("missing --radius for a ball conductor"))?;
            Ok(ConductorGeometry::Ball { radius })
        }
        "nested_shells" => {
            let inner_radius = c
                .inner_radius
                .ok_or_else(|| usage("missing --inner-radius for nested shells"))?;
            let shell_faces = match &c.shells {
                Some(text) => parse_shells(text)?,
                None => Vec::new(),
            };
            Ok(ConductorGeometry::NestedShells {
                inner_radius,
                shell_faces,
                outer_sphere_radius: c.outer_sphere,
            })
        }
        "voxel" => {
            let mask = match (&c.mask, c.radius, c.spacing) {
                (Some(path), _, _) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| usage(format!("cannot read mask file: {e}")))?;
                    mask_from_rle(&text).map_err(from_error)?
                }
                (None, Some(radius), Some(spacing)) => VoxelSet::ball(radius, spacing),
                _ => {
                    return Err(usage(
                        "voxel shape needs --mask or --radius together with --spacing",
                    ))
                }
            };
            Ok(ConductorGeometry::VoxelSet(mask))
        }
        other => Err(usage(format!("unknown shape '{other}'"))),
    }
}

fn parse_shells(text: &str) -> Result<Vec<(f64, f64)>, Failure> {
    text.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| usage(format!("bad shell '{pair}', expected a:b")))?;
            let a: f64 = a.trim().parse().map_err(|_| usage(format!("bad radius '{a}'")))?;
            let b: f64 = b.trim().parse().map_err(|_| usage(format!("bad radius '{b}'")))?;
            Ok((a, b))
        })
        .collect()
}

fn radial_grid(scenario: &Scenario) -> Result<RadialGrid, Failure> {
    RadialGrid::uniform(
        scenario.grid.r_max,
        scenario.grid.node_count,
        &scenario.geometry,
    )
    .map_err(from_error)
}

/// CSV/binary artifact goes to --out when given, otherwise stdout (text
/// artifacts only).
fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure { code: 3, message: format!("cannot write {path:?}: {e}") }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_capacity(c: &Common) -> Result<(), Failure> {
    let scenario = build_scenario(c)?;
    match &scenario.geometry {
        ConductorGeometry::VoxelSet(mask) => {
            let eq = solve_voxel_equilibrium(mask, 1.0, 0.0).map_err(from_error)?;
            println!("C = {} (voxel, spacing {})", fmt6(eq.capacity), fmt6(mask.spacing));
        }
        geometry => {
            let grid = radial_grid(&scenario)?;
            let c_num = capacity(geometry, &grid).map_err(from_error)?;
            if let ConductorGeometry::Ball { radius } = geometry {
                let rel = (c_num / radius - 1.0).abs();
                println!(
                    "C = {} (analytic {}, relative error {:.2e})",
                    fmt6(c_num),
                    fmt6(*radius),
                    rel
                );
            } else {
                println!("C = {}", fmt6(c_num));
            }
        }
    }
    Ok(())
}

fn cmd_equilibrium(c: &Common) -> Result<(), Failure> {
    let scenario = build_scenario(c)?;
    if let ConductorGeometry::VoxelSet(_) = scenario.geometry {
        return cmd_voxel(c);
    }
    let grid = radial_grid(&scenario)?;
    let sol = solve_equilibrium(
        &scenario.geometry,
        scenario.params.q,
        scenario.params.k,
        &grid,
    )
    .map_err(from_error)?;
    print!(
        "{}",
        equilibrium_report(&sol, &scenario.geometry).map_err(from_error)?
    );
    emit(&c.out, &charge_table_csv(&sol.charges))
}

fn cmd_potential(c: &Common) -> Result<(), Failure> {
    let scenario = build_scenario(c)?;
    let grid = radial_grid(&scenario)?;
    let sol = solve_equilibrium(
        &scenario.geometry,
        scenario.params.q,
        scenario.params.k,
        &grid,
    )
    .map_err(from_error)?;
    println!("A = {}", fmt6(sol.a));
    println!("far_coefficient = {}", fmt6(sol.potential.far_coefficient));
    emit(&c.out, &potential_table_csv(&sol.potential))
}

fn cmd_forces(c: &Common) -> Result<(), Failure> {
    let scenario = build_scenario(c)?;
    let grid = radial_grid(&scenario)?;
    let r = scenario.geometry.outermost_radius();
    let sol = solve_equilibrium(
        &scenario.geometry,
        scenario.params.q,
        scenario.params.k,
        &grid,
    )
    .map_err(from_error)?;
    let samples: Vec<f64> = (1..=120).map(|i| 2.0 * r * i as f64 / 120.0).collect();
    let csv = force_profile_csv(
        &sol,
        &sol.charges.clone(),
        scenario.params.k,
        r,
        scenario.params.e,
        &samples,
    )
    .map_err(from_error)?;
    println!("far_coefficient = {}", fmt6(sol.potential.far_coefficient));
    emit(&c.out, &csv)
}

fn cmd_photoeffect(c: &Common) -> Result<(), Failure> {
    let scenario = build_scenario(c)?;
    let r = match scenario.geometry {
        ConductorGeometry::Ball { radius } => radius,
        _ => return Err(usage("photoeffect needs a ball conductor")),
    };
    let delta = scenario.params.delta;
    if delta == DEFAULT_DELTA && c.delta.is_none() && c.scenario.is_none() {
        // the microscopic default is fine, but make it visible
        eprintln!("note: using default pair separation delta = {}", fmt6(delta));
    }
    let model = PairModel::new(
        r,
        delta,
        scenario.params.k,
        scenario.params.q,
        scenario.params.e,
    )
    .map_err(from_error)?;
    print!(
        "{}",
        photoeffect_report(&model, &[10.0 * r, 20.0 * r, 40.0 * r, 80.0 * r])
    );
    let table = pair_force_table_csv(&model, 64).map_err(from_error)?;
    emit(&c.out, &table)
}

fn cmd_nested(c: &Common) -> Result<(), Failure> {
    let mut flags = Common { shape: Some("nested_shells".into()), ..Default::default() };
    // carry over the user's flags; only the shape is forced
    flags.scenario = c.scenario.clone();
    flags.inner_radius = c.inner_radius;
    flags.shells = c.shells.clone();
    flags.outer_sphere = c.outer_sphere;
    flags.charge = c.charge;
    flags.nodes = c.nodes;
    flags.r_max = c.r_max;
    flags.out = c.out.clone();
    let scenario = build_scenario(&flags)?;
    let charges =
        nested_spheres_charges(&scenario.geometry, scenario.params.q).map_err(from_error)?;
    let mut csv = String::from("radius,charge\n");
    for &(radius, charge) in &charges {
        println!("q({}) = {}", fmt6(radius), fmt6(charge));
        csv.push_str(&format!("{},{}\n", fmt12(radius), fmt12(charge)));
    }
    println!("total_variation = {}", fmt6(total_variation(&charges)));
    emit(&c.out, &csv)
}

fn cmd_voxel(c: &Common) -> Result<(), Failure> {
    let mut flags = Common { shape: Some("voxel".into()), ..Default::default() };
    flags.scenario = c.scenario.clone();
    flags.radius = c.radius;
    flags.spacing = c.spacing;
    flags.mask = c.mask.clone();
    flags.k = c.k;
    flags.charge = c.charge;
    flags.out = c.out.clone();
    let scenario = build_scenario(&flags)?;
    let mask = match &scenario.geometry {
        ConductorGeometry::VoxelSet(mask) => mask,
        _ => unreachable!("shape forced to voxel"),
    };
    let eq = solve_voxel_equilibrium(mask, scenario.params.q, scenario.params.k)
        .map_err(from_error)?;
    println!("A = {}", fmt6(eq.a));
    println!("C = {}", fmt6(eq.capacity));
    println!("far_coefficient = {}", fmt6(eq.field.far_coefficient));
    println!("conductor_cells = {}", mask.cell_count());
    if let (Some(radius), Some(_)) = (c.radius, c.spacing) {
        if let Ok((a, _, _)) = ball_closed_form(radius, scenario.params.q, scenario.params.k) {
            println!(
                "closed_form_A = {} (relative gap {:.2e})",
                fmt6(a),
                (eq.a / a - 1.0).abs()
            );
        }
    }
    if let Some(path) = &c.out {
        std::fs::write(path, field_to_bytes(&eq.field))
            .map_err(|e| Failure { code: 3, message: format!("cannot write {path:?}: {e}") })?;
        let sidecar_path = path.with_extension("meta.txt");
        std::fs::write(&sidecar_path, field_sidecar(&eq.field)).map_err(|e| Failure {
            code: 3,
            message: format!("cannot write {sidecar_path:?}: {e}"),
        })?;
        println!("field written to {path:?} (sidecar {sidecar_path:?})");
    }
    Ok(())
}

fn cmd_verify(suite: &str) -> Result<(), Failure> {
    let results = run_suite(suite).map_err(from_error)?;
    print!("{}", render_report(suite, &results));
    if all_passed(&results) {
        Ok(())
    } else {
        Err(Failure { code: 3, message: format!("verify suite '{suite}' failed") })
    }
}
