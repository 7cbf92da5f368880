//! Command-line front end for the `rem` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use crate::bounds::{expected_cut_constants, mc_line_oracle, BoundsConfig, BoundsReport};
use crate::deploy::{build_rem, deploy_one_per_mesh, deploy_random, Scheme};
use crate::error::{RemError, Result};
use crate::harness::figure::comparison_figure;
use crate::harness::render::{render_rem, Palette};
use crate::harness::{
    compare_schemes, run_sweep, RunRecord, SceneSource, SweepSpec, REPORT_SUBSAMPLES,
    SWEEP_SUBSAMPLES,
};
use crate::mesh::{MeshGrid, RegionPartition};
use crate::metrics::MetricsReport;
use crate::scene::{generate_scene, CoverageScene, SceneParams, DEFAULT_RASTER_RESOLUTION};

const DEFAULT_OUT: &str = "rem_out";

#[derive(Debug, Parser)]
#[command(
    name = "rem",
    version,
    about = "Radio environment map simulator and analysis"
)]
struct Cli {
    /// Master seed for scene generation and sensor placement.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory (or file for `scene gen`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sub-samples per mesh side when estimating mesh distributions.
    #[arg(long, global = true)]
    subsamples: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or inspect coverage scenes.
    #[command(subcommand)]
    Scene(SceneCommand),
    /// Build and render a single REM.
    #[command(subcommand)]
    Rem(RemCommand),
    /// RPE versus mesh count sweep.
    Sweep(SweepArgs),
    /// One-per-mesh versus random deployment.
    Compare(SweepArgs),
    /// Analytical bounds and sensor requirements.
    Theory(TheoryArgs),
    /// Monte Carlo check of the random line-cut constants.
    McLine(McLineArgs),
}

#[derive(Debug, Subcommand)]
enum SceneCommand {
    Gen(GenArgs),
    Show {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RASTER_RESOLUTION)]
        raster: usize,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Number of networks T (N = 2^T parameters).
    #[arg(long, default_value_t = 3)]
    networks: usize,
    #[arg(long, default_value_t = 1.0)]
    edge: f64,
    #[arg(long, default_value_t = 0.15)]
    radius_min: f64,
    #[arg(long, default_value_t = 0.3)]
    radius_max: f64,
    #[arg(long, default_value_t = 1)]
    disks_per_network: usize,
}

impl GenArgs {
    fn params(&self, seed: u64) -> SceneParams {
        SceneParams {
            networks: self.networks,
            region_edge: self.edge,
            seed,
            radius_min: self.radius_min,
            radius_max: self.radius_max,
            disks_per_network: self.disks_per_network,
        }
    }
}

#[derive(Debug, Subcommand)]
enum RemCommand {
    Build(BuildArgs),
    /// One-per-mesh REM next to random REMs at several densities.
    Panels(PanelArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("scene_input").required(true).args(["scene", "networks"])))]
struct SceneInput {
    /// Scene JSON file.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Generate a scene with this many networks instead.
    #[arg(long)]
    networks: Option<usize>,
}

impl SceneInput {
    fn source(&self, seed: u64) -> Result<SceneSource> {
        match (&self.scene, self.networks) {
            (Some(path), _) => Ok(SceneSource::Inline {
                scene: CoverageScene::load(path)?,
            }),
            (None, Some(t)) => Ok(SceneSource::Generate(SceneParams {
                networks: t,
                seed,
                ..Default::default()
            })),
            (None, None) => Err(RemError::Config("no scene given".into())),
        }
    }
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    input: SceneInput,
    #[arg(long, default_value_t = 16)]
    mesh_side: usize,
    #[arg(long, default_value = "one-per-mesh")]
    scheme: Scheme,
    /// Sensors per mesh for the random scheme.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Pixels per mesh in the rendered images.
    #[arg(long, default_value_t = 8)]
    scale: usize,
}

#[derive(Debug, Args)]
struct PanelArgs {
    #[command(flatten)]
    input: SceneInput,
    #[arg(long, default_value_t = 16)]
    mesh_side: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    k: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    scale: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("sweep_input").required(true).args(["scene", "networks", "config"])))]
struct SweepArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    networks: Option<usize>,
    /// Sweep spec JSON, or a previous run.json to replay.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Meshes per side; each value m gives M = m^2.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    mesh_sides: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Seed for the generated scene; defaults to --seed.
    #[arg(long)]
    scene_seed: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("count").required(true).args(["networks", "parameters"])))]
struct TheoryArgs {
    /// Number of networks T; N = 2^T.
    #[arg(long)]
    networks: Option<u32>,
    /// Number of radio parameters N directly.
    #[arg(long)]
    parameters: Option<usize>,
    #[arg(long, conflicts_with = "scene", required_unless_present = "scene")]
    xi: Option<f64>,
    /// Take xi and L from a scene file.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    edge: Option<f64>,
    #[arg(long, default_value_t = 0.04)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long)]
    mesh_count: Option<usize>,
}

#[derive(Debug, Args)]
struct McLineArgs {
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let Cli {
        seed,
        out,
        subsamples,
        command,
    } = cli;
    match command {
        Command::Scene(SceneCommand::Gen(args)) => scene_gen(&args, seed, out.as_deref()),
        Command::Scene(SceneCommand::Show { file, raster }) => scene_show(&file, raster),
        Command::Rem(RemCommand::Build(args)) => {
            let out = out.unwrap_or_else(|| DEFAULT_OUT.into());
            rem_build(&args, seed, &out, subsamples.unwrap_or(REPORT_SUBSAMPLES))
        }
        Command::Rem(RemCommand::Panels(args)) => {
            let out = out.unwrap_or_else(|| DEFAULT_OUT.into());
            rem_panels(&args, seed, &out, subsamples.unwrap_or(REPORT_SUBSAMPLES))
        }
        Command::Sweep(args) => {
            let spec = sweep_spec(&args, seed, subsamples, false)?;
            finish_run(run_sweep(&spec)?, out)
        }
        Command::Compare(args) => {
            let spec = sweep_spec(&args, seed, subsamples, true)?;
            finish_run(compare_schemes(&spec)?, out)
        }
        Command::Theory(args) => theory(&args),
        Command::McLine(args) => mc_line(args.samples, seed),
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    write_stdout(&(serde_json::to_string_pretty(v)? + "\n"))
}

// A closed pipe (e.g. `| head`) is not an error worth reporting.
fn write_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(RemError::io(Path::new("<stdout>"), e))
        }
        _ => Ok(()),
    }
}

fn scene_gen(args: &GenArgs, seed: u64, out: Option<&Path>) -> Result<()> {
    let scene = generate_scene(&args.params(seed))?;
    match out {
        Some(path) => {
            let path = if path.extension().is_some() {
                path.to_path_buf()
            } else {
                std::fs::create_dir_all(path).map_err(|e| RemError::io(path, e))?;
                path.join("scene.json")
            };
            scene.save(&path)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{}", scene.to_json_string()?),
    }
    Ok(())
}

fn scene_show(file: &Path, raster: usize) -> Result<()> {
    let scene = CoverageScene::load(file)?;
    let networks: Vec<_> = scene
        .networks()
        .iter()
        .map(|n| json!({ "index": n.index, "disks": n.disks }))
        .collect();
    print_json(&json!({
        "networks": scene.num_networks(),
        "parameters": scene.num_parameters(),
        "region_edge": scene.region_edge(),
        "xi_analytic": scene.boundary_length(),
        "xi_raster": scene.boundary_length_raster(raster)?,
        "raster_resolution": raster,
        "coverage": networks,
    }))
}

fn rem_build(args: &BuildArgs, seed: u64, out: &Path, subsamples: usize) -> Result<()> {
    let scene = args.input.source(seed)?.load()?;
    let grid = MeshGrid::for_scene(&scene, args.mesh_side)?;
    let dep = match args.scheme {
        Scheme::OnePerMesh => deploy_one_per_mesh(&scene, &grid, seed),
        Scheme::Random => {
            if !(args.k.is_finite() && args.k > 0.0) {
                return Err(RemError::domain("k must be positive"));
            }
            deploy_random(
                &scene,
                (args.k * grid.count() as f64).round() as usize,
                seed,
            )
        }
    };
    let rem = build_rem(&scene, &grid, &dep, seed);
    let part = RegionPartition::estimate(&scene, &grid, subsamples)?;
    let report = MetricsReport::compute(&part, Some(&rem))?;

    std::fs::create_dir_all(out).map_err(|e| RemError::io(out, e))?;
    let images = render_rem(
        &rem,
        &part,
        &Palette::default(),
        &out.join("rem"),
        args.scale,
    )?;
    let deployment_csv = out.join("deployment.csv");
    dep.write_csv(&deployment_csv, Some(&grid))?;
    let metrics_path = out.join("metrics.json");
    let summary = json!({
        "scheme": args.scheme,
        "mesh_count": grid.count(),
        "sensors": dep.len(),
        "seed": seed,
        "subsamples": subsamples,
        "empty_meshes": rem.empty_count(),
        "region_rpe": report.region_rpe,
        "region_entropy": report.region_entropy,
        "measured_rem_error": report.measured_rem_error,
        "parameter_map": images.parameter_map,
        "error_map": images.error_map,
        "deployment": deployment_csv,
    });
    let mut full = summary.clone();
    full["per_mesh_rpe"] = json!(report.per_mesh_rpe);
    full["per_mesh_entropy"] = json!(report.per_mesh_entropy);
    full["assignment"] = json!(rem.assignment());
    std::fs::write(&metrics_path, serde_json::to_string_pretty(&full)? + "\n")
        .map_err(|e| RemError::io(&metrics_path, e))?;
    print_json(&summary)
}

fn rem_panels(args: &PanelArgs, seed: u64, out: &Path, subsamples: usize) -> Result<()> {
    let scene = args.input.source(seed)?.load()?;
    std::fs::create_dir_all(out).map_err(|e| RemError::io(out, e))?;
    let fig = comparison_figure(
        &scene,
        args.mesh_side,
        &args.k,
        seed,
        subsamples,
        Some((out, args.scale)),
    )?;
    let path = out.join("panels.json");
    std::fs::write(&path, serde_json::to_string_pretty(&fig)? + "\n")
        .map_err(|e| RemError::io(&path, e))?;
    print_json(&fig)
}

fn sweep_spec(
    args: &SweepArgs,
    seed: u64,
    subsamples: Option<usize>,
    compare: bool,
) -> Result<SweepSpec> {
    if let Some(path) = &args.config {
        // A previous run replays its own config echo.
        if let Ok(record) = RunRecord::load(path) {
            return Ok(record.config);
        }
        let text = std::fs::read_to_string(path).map_err(|e| RemError::io(path, e))?;
        return Ok(serde_json::from_str(&text)?);
    }
    let input = SceneInput {
        scene: args.scene.clone(),
        networks: args.networks,
    };
    let default_schemes = if compare {
        vec![Scheme::OnePerMesh, Scheme::Random]
    } else {
        vec![Scheme::OnePerMesh]
    };
    let default_k = if compare {
        vec![1.0, 2.0, 4.0]
    } else {
        vec![1.0]
    };
    let mut spec = SweepSpec::new(
        input.source(args.scene_seed.unwrap_or(seed))?,
        args.mesh_sides.clone(),
        args.schemes.clone().unwrap_or(default_schemes),
    );
    spec.k_values = args.k.clone().unwrap_or(default_k);
    spec.seeds = args.seeds;
    spec.master_seed = seed;
    spec.subsamples = subsamples.unwrap_or(SWEEP_SUBSAMPLES);
    if let Some(b) = &args.betas {
        spec.betas = b.clone();
    }
    Ok(spec)
}

fn finish_run(record: RunRecord, out: Option<PathBuf>) -> Result<()> {
    let out = out.unwrap_or_else(|| DEFAULT_OUT.into());
    let (csv, json_path) = record.write(&out)?;
    println!(
        "N={} xi={:.6} (raster {:.6}) kappa={:.6} rows={} time={:.2}s",
        record.num_parameters,
        record.xi_analytic,
        record.xi_raster,
        record.kappa,
        record.rows.len(),
        record.wall_clock_secs
    );
    println!(
        "{:<13} {:>7} {:>7} {:>5} {:>11} {:>11} {:>11} {:>9}",
        "scheme", "M", "J", "k", "rpe", "rem_error", "predicted", "empty"
    );
    for a in &record.aggregates {
        println!(
            "{:<13} {:>7} {:>7} {:>5} {:>11.6} {:>11.6} {:>11.6} {:>9.4}",
            a.scheme.as_str(),
            a.mesh_count,
            a.sensors,
            a.k,
            a.region_rpe.mean,
            a.measured_rem_error.mean,
            a.predicted_rpe,
            a.empty_fraction.mean
        );
    }
    for p in &record.pairs {
        println!(
            "J={:<7} one-per-mesh {:.6}  random(k={}) {:.6}",
            p.sensors, p.one_per_mesh_error, p.random_k, p.random_error
        );
    }
    eprintln!("wrote {} and {}", csv.display(), json_path.display());
    Ok(())
}

fn theory(args: &TheoryArgs) -> Result<()> {
    let n = match (args.networks, args.parameters) {
        (Some(t), _) => {
            if t == 0 || t > 8 {
                return Err(RemError::domain(format!(
                    "network count {t} outside [1, 8]"
                )));
            }
            1usize << t
        }
        (None, Some(n)) => n,
        (None, None) => return Err(RemError::Config("need --networks or --parameters".into())),
    };
    let (xi, scene_edge) = match (&args.scene, args.xi) {
        (Some(path), _) => {
            let s = CoverageScene::load(path)?;
            (s.boundary_length(), Some(s.region_edge()))
        }
        (None, Some(xi)) => (xi, None),
        (None, None) => return Err(RemError::Config("need --xi or --scene".into())),
    };
    let cfg = BoundsConfig {
        n,
        xi,
        edge: args.edge.or(scene_edge).unwrap_or(1.0),
        beta: args.beta,
        k: args.k,
    };
    let report = BoundsReport::compute(&cfg, args.mesh_count)?;
    print_json(&report)?;
    write_stdout(&format!("\n{}", report.to_table()))
}

fn mc_line(samples: u64, seed: u64) -> Result<()> {
    let started = Instant::now();
    let r = mc_line_oracle(samples, seed)?;
    let (e_xi, e_pe) = expected_cut_constants();
    print_json(&json!({
        "samples": r.samples,
        "seed": r.seed,
        "mean_xi": r.mean_xi,
        "mean_pe": r.mean_pe,
        "std_err_xi": r.std_err_xi,
        "std_err_pe": r.std_err_pe,
        "expected_xi": e_xi,
        "expected_pe": e_pe,
        "rel_err_xi": (r.mean_xi - e_xi).abs() / e_xi,
        "rel_err_pe": (r.mean_pe - e_pe).abs() / e_pe,
        "seconds": started.elapsed().as_secs_f64(),
    }))
}
