//! `cavity`: reproducible command-line runs of the eigenvalue experiments.
//!
//! Exit status is 0 on success, 1 for invalid input (bad flags, unwritable
//! paths) and 2 for numerical failures or failed verification checks.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavity_core::closed_form::{
    ball_lambda1_radius, ball_lambda1_surface, ball_lambda1_volume, cube_lambda1_surface,
    cube_lambda1_volume, cuboid_lambda1, cuboid_surface_infimum,
};
use cavity_core::cuboid_search::{grid_infimum, lambda1_constrained, sweep_points, PerimeterConstraint};
use cavity_core::fem2d::mesh::{dof_cap_from_env, mesh_rectilinear, MeshOptions};
use cavity_core::fem2d::vtk::write_vtk;
use cavity_core::geometry::{build_dumbbell, CuboidDims, DumbbellParams, ScheduleParams};
use cavity_core::json::{fmt_f64, to_string, SCHEMA_VERSION};
use cavity_core::maxwell_product::{
    default_h_grid, dumbbell_run_with_params, schedule, DumbbellRun, FemOptions, Method,
};
use cavity_core::specfun::a11_prime;
use cavity_core::verify::run_suite;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cavity", version, about = "First Maxwell eigenvalue of cuboids, balls and thin product cavities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// λ₁ of a cuboid with the given side lengths.
    Cuboid {
        #[arg(long, num_args = 3, value_names = ["A", "B", "C"], required = true, allow_negative_numbers = true)]
        l: Vec<f64>,
    },
    /// λ₁ of a ball given its radius, surface area or volume.
    Ball(BallArgs),
    /// Grid search for the infimum of λ₁ over cuboids of fixed surface area.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Upper bounds for λ₁ along the dumbbell family of unit surface area.
    Dumbbell(DumbbellArgs),
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("size").required(true).args(["radius", "surface", "volume"])))]
struct BallArgs {
    #[arg(long, allow_negative_numbers = true)]
    radius: Option<f64>,
    /// Surface area.
    #[arg(long, allow_negative_numbers = true)]
    surface: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    volume: Option<f64>,
}

#[derive(Debug, Args)]
struct DumbbellArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    /// Exponent in δ = h^(−p); defaults to 2/β + 1.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// Comma-separated heights.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    h_grid: Option<Vec<f64>>,
    /// Fix δ instead of following the schedule (requires --eta).
    #[arg(long, requires = "eta", conflicts_with = "p", allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, requires = "delta", allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Also solve the Neumann and Dirichlet problems by finite elements.
    #[arg(long, overrides_with = "no_fem")]
    fem: bool,
    #[arg(long, overrides_with = "fem")]
    no_fem: bool,
    /// Coarse mesh size; the fine level halves it.
    #[arg(long, default_value_t = 1.0 / 16.0, allow_negative_numbers = true)]
    target_h: f64,
    /// Minimum number of cells across the channel.
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Write the fine mesh of each cross-section as legacy VTK.
    #[arg(long, requires = "fem")]
    dump_mesh: Option<PathBuf>,
    /// Write each cross-section polygon as a JSON array of [x, y] pairs.
    #[arg(long)]
    dump_geometry: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Numerical(String),
    ChecksFailed(usize),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Numerical(_) | Failure::ChecksFailed(_) => 2,
        }
    }
}

impl From<cavity_core::Error> for Failure {
    fn from(e: cavity_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("numerical failure: {m}"),
                Failure::ChecksFailed(n) => eprintln!("{n} verification check(s) failed"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    if let Some(path) = &cli.output {
        check_writable(path)?;
    }
    let text = match &cli.command {
        Command::Cuboid { l } => cuboid(l, cli.format)?,
        Command::Ball(args) => ball(args, cli.format)?,
        Command::Sweep { k, resolution } => sweep(*k, *resolution, cli.format)?,
        Command::Dumbbell(args) => dumbbell(args, cli.format)?,
        Command::Verify { seed } => return verify(*seed, cli),
    };
    emit(cli.output.as_deref(), &text)
}

/// Rejects paths whose directory is missing before any computation starts.
fn check_writable(path: &Path) -> Outcome<()> {
    if path.is_dir() {
        return Err(Failure::Invalid(format!("{} is a directory", path.display())));
    }
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(Failure::Invalid(format!("directory {} does not exist", parent.display())));
    }
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json_line<T: Serialize>(value: &T) -> Outcome<String> {
    Ok(to_string(value)? + "\n")
}

/// Quotes a text cell when it contains a separator or a quote.
fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",") + "\n";
    for row in rows {
        s += &row.join(",");
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct CuboidRecord {
    schema: u32,
    l1: f64,
    l2: f64,
    l3: f64,
    volume: f64,
    surface_area: f64,
    lambda1: f64,
}

fn cuboid(l: &[f64], format: Format) -> Outcome<String> {
    let c = CuboidDims::new(l[0], l[1], l[2])?;
    let r = CuboidRecord {
        schema: SCHEMA_VERSION,
        l1: c.l1(),
        l2: c.l2(),
        l3: c.l3(),
        volume: c.volume(),
        surface_area: c.surface_area(),
        lambda1: cuboid_lambda1(&c).value(),
    };
    Ok(match format {
        Format::Json => json_line(&r)?,
        Format::Csv => csv_table(
            &["l1", "l2", "l3", "volume", "surface_area", "lambda1"],
            [[r.l1, r.l2, r.l3, r.volume, r.surface_area, r.lambda1].map(fmt_f64).to_vec()],
        ),
    })
}

#[derive(Serialize)]
struct BallRecord {
    schema: u32,
    /// `radius`, `surface` or `volume`.
    constraint: &'static str,
    value: f64,
    radius: f64,
    lambda1: f64,
    a11_prime: f64,
    pi: f64,
    /// λ₁ of the cube with the same surface area or volume.
    cube_lambda1: Option<f64>,
    /// `4π²/k`, the cuboid infimum at the same surface area.
    cuboid_infimum: Option<f64>,
}

fn ball(args: &BallArgs, format: Format) -> Outcome<String> {
    let r = match (args.radius, args.surface, args.volume) {
        (Some(radius), _, _) => BallRecord {
            schema: SCHEMA_VERSION,
            constraint: "radius",
            value: radius,
            radius,
            lambda1: ball_lambda1_radius(radius)?.value(),
            a11_prime: a11_prime(),
            pi: PI,
            cube_lambda1: None,
            cuboid_infimum: None,
        },
        (_, Some(k), _) => BallRecord {
            schema: SCHEMA_VERSION,
            constraint: "surface",
            value: k,
            lambda1: ball_lambda1_surface(k)?.value(),
            radius: (k / (4.0 * PI)).sqrt(),
            a11_prime: a11_prime(),
            pi: PI,
            cube_lambda1: Some(cube_lambda1_surface(k)?.value()),
            cuboid_infimum: Some(cuboid_surface_infimum(k)?),
        },
        (_, _, Some(k)) => BallRecord {
            schema: SCHEMA_VERSION,
            constraint: "volume",
            value: k,
            lambda1: ball_lambda1_volume(k)?.value(),
            radius: (3.0 * k / (4.0 * PI)).cbrt(),
            a11_prime: a11_prime(),
            pi: PI,
            cube_lambda1: Some(cube_lambda1_volume(k)?.value()),
            cuboid_infimum: None,
        },
        (None, None, None) => unreachable!("clap requires one of the size flags"),
    };
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    Ok(match format {
        Format::Json => json_line(&r)?,
        Format::Csv => csv_table(
            &["constraint", "value", "radius", "lambda1", "a11_prime", "pi", "cube_lambda1", "cuboid_infimum"],
            [vec![
                r.constraint.to_string(),
                fmt_f64(r.value),
                fmt_f64(r.radius),
                fmt_f64(r.lambda1),
                fmt_f64(r.a11_prime),
                fmt_f64(r.pi),
                opt(r.cube_lambda1),
                opt(r.cuboid_infimum),
            ]],
        ),
    })
}

#[derive(Serialize)]
struct GridMin {
    l1: f64,
    l2: f64,
    l3: f64,
    lambda1: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    schema: u32,
    k: f64,
    resolution: usize,
    evaluations: usize,
    l3_floor: f64,
    grid_min: GridMin,
    infimum: f64,
    gap: f64,
}

fn sweep(k: f64, resolution: usize, format: Format) -> Outcome<String> {
    PerimeterConstraint::new(k)?;
    if resolution < 10 {
        return Err(Failure::Invalid(format!("resolution must be at least 10, got {resolution}")));
    }
    match format {
        Format::Json => {
            let g = grid_infimum(k, resolution)?;
            let t = g.point.triple();
            json_line(&SweepSummary {
                schema: SCHEMA_VERSION,
                k,
                resolution,
                evaluations: g.evaluations,
                l3_floor: g.l3_floor,
                grid_min: GridMin { l1: t.l1(), l2: t.l2(), l3: t.l3(), lambda1: g.lambda1.value() },
                infimum: g.infimum,
                gap: g.gap,
            })
        }
        Format::Csv => {
            let rows = sweep_points(k, resolution)?.into_iter().map(|p| {
                let t = p.triple();
                [t.l1(), t.l2(), t.l3(), k, lambda1_constrained(&p).value()].map(fmt_f64).to_vec()
            });
            Ok(csv_table(&["l1", "l2", "l3", "k", "lambda1"], rows))
        }
    }
}

#[derive(Serialize)]
struct DumbbellRecord<'a> {
    schema: u32,
    #[serde(flatten)]
    run: &'a DumbbellRun,
}

/// `path` itself for a single run, otherwise `stem-<index>.ext`.
fn indexed_path(path: &Path, index: usize, count: usize) -> PathBuf {
    if count == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{index}"),
    };
    path.with_file_name(name)
}

fn dumbbell(args: &DumbbellArgs, format: Format) -> Outcome<String> {
    let hs = args.h_grid.clone().unwrap_or_else(default_h_grid);
    if hs.is_empty() {
        return Err(Failure::Invalid("--h-grid is empty".into()));
    }
    let p_exp = args.p.unwrap_or(2.0 / args.beta + 1.0);
    let forced = match (args.delta, args.eta) {
        (Some(d), Some(e)) => Some(DumbbellParams::new(d, e)?),
        _ => None,
    };
    let mut points = Vec::with_capacity(hs.len());
    for &h in &hs {
        match forced {
            Some(p) => {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Failure::Invalid(format!("h must be positive and finite, got {h}")));
                }
                points.push((p, h, None));
            }
            None => {
                let s = ScheduleParams::new(args.beta, h, p_exp)?;
                points.push((schedule(&s)?, h, Some(s)));
            }
        }
    }
    if !(args.target_h.is_finite() && args.target_h > 0.0) {
        return Err(Failure::Invalid(format!("target-h must be positive, got {}", args.target_h)));
    }
    if args.layers == 0 {
        return Err(Failure::Invalid("layers must be at least 1".into()));
    }
    for path in [&args.dump_mesh, &args.dump_geometry].into_iter().flatten() {
        check_writable(path)?;
    }

    let fem_opts = FemOptions { target_h: args.target_h, channel_min_layers: args.layers, dof_cap: dof_cap_from_env() };
    let use_fem = args.fem && !args.no_fem;
    let mut runs = Vec::with_capacity(points.len());
    for (i, (p, h, s)) in points.iter().enumerate() {
        let mut run = dumbbell_run_with_params(p, *h, use_fem.then_some(&fem_opts))?;
        if let Some(s) = s {
            run.beta = Some(s.beta());
            run.delta_exponent = Some(s.delta_exponent());
            run.schedule_satisfied = p.eta() <= p.delta().powf(3.0 + s.beta()) * (1.0 + 1e-12);
        }
        if let Some(path) = &args.dump_geometry {
            fs::write(indexed_path(path, i, points.len()), build_dumbbell(p).to_json())?;
        }
        if let (Some(path), Some(_)) = (&args.dump_mesh, &run.fem) {
            let opts = MeshOptions::dumbbell(p, args.target_h, args.layers).with_dof_cap(fem_opts.dof_cap);
            let mesh = mesh_rectilinear(&build_dumbbell(p), &opts)?.refine()?;
            let title = format!("dumbbell delta={} eta={}", p.delta(), p.eta());
            write_vtk(&mesh, &title, &indexed_path(path, i, points.len()))?;
        }
        runs.push(run);
    }

    Ok(match format {
        Format::Json => {
            let mut s = String::new();
            for run in &runs {
                s += &json_line(&DumbbellRecord { schema: SCHEMA_VERSION, run })?;
            }
            s
        }
        Format::Csv => csv_table(
            &[
                "h",
                "delta",
                "eta",
                "scale",
                "method",
                "mu1n_scaled",
                "lambda1_upper",
                "dirichlet_lower_bound",
                "dirichlet_branch_inactive",
                "surface_residual",
            ],
            runs.iter().map(|r| {
                vec![
                    fmt_f64(r.h),
                    fmt_f64(r.delta),
                    fmt_f64(r.eta),
                    fmt_f64(r.scale),
                    match r.method {
                        Method::Fem => "fem",
                        Method::Trial => "trial",
                    }
                    .to_string(),
                    fmt_f64(r.mu1n_scaled),
                    fmt_f64(r.lambda1_upper),
                    fmt_f64(r.dirichlet_lower_bound),
                    r.dirichlet_branch_inactive.to_string(),
                    fmt_f64(r.surface_residual),
                ]
            }),
        ),
    })
}

fn verify(seed: u64, cli: &Cli) -> Outcome<()> {
    let report = run_suite(seed);
    eprint!("{}", report.render_table());
    let text = match cli.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => {
            let mut s = String::from("module,name,passed,measured,threshold\n");
            for c in &report.checks {
                let _ = writeln!(s, "{},{},{},{},{}", csv_field(&c.module), csv_field(&c.name), c.passed, fmt_f64(c.measured), fmt_f64(c.threshold));
            }
            s
        }
    };
    emit(cli.output.as_deref(), &text)?;
    match report.failures().count() {
        0 => Ok(()),
        n => Err(Failure::ChecksFailed(n)),
    }
}
