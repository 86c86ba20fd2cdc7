//! `tcs`: run tethered UAV/UGV mission scenarios and their components.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tcs_core::detect::{detect_anchor, detect_cliff};
use tcs_core::gridmap::{write_layer_exports, GridMap};
use tcs_core::mapfilter::{run_pipeline, FilterParams};
use tcs_core::mission::{self, MissionState};
use tcs_core::planner::{astar_plan, PlanWeights};
use tcs_core::scenario::{base_dir, load_scenario, write_artifacts, write_path_csv, Scenario};

#[derive(Parser)]
#[command(name = "tcs", version, about = "Tethered UAV/UGV cliff-climbing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full mission and write its artifacts.
    Run(RunArgs),
    /// Run the map filter pipeline on a saved map.
    Filter(FilterArgs),
    /// Plan one UGV path on a saved, filtered map.
    Plan(PlanArgs),
    /// Search a saved map for an anchor point.
    DetectAnchor(AnchorArgs),
    /// Check a saved map for a cliff between two points.
    DetectCliff(CliffArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario tick limit.
    #[arg(long)]
    max_ticks: Option<u64>,
    /// Also write an annotated SVG top view.
    #[arg(long)]
    export_svg: bool,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct MapInput {
    /// A `map.json` written by `run` or `filter`.
    #[arg(long)]
    map: PathBuf,
    /// Scenario whose parameter blocks to use; defaults apply otherwise.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    input: MapInput,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    input: MapInput,
    /// Start as `x,y` in metres.
    #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
    start: [f64; 2],
    /// Goal as `x,y` in metres.
    #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
    goal: [f64; 2],
}

#[derive(Args)]
struct AnchorArgs {
    #[command(flatten)]
    input: MapInput,
    /// Centre of the searched region as `x,y`.
    #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
    center: [f64; 2],
    /// Overrides the scenario search radius, m.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct CliffArgs {
    #[command(flatten)]
    input: MapInput,
    #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
    start: [f64; 2],
    #[arg(long, value_parser = parse_xy, allow_hyphen_values = true)]
    goal: [f64; 2],
}

fn parse_xy(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected `x,y`")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok([p(a)?, p(b)?])
}

struct Params {
    filter: FilterParams,
    weights: PlanWeights,
    scenario: Option<Scenario>,
}

fn params(path: Option<&Path>) -> Result<Params> {
    match path {
        Some(p) => {
            let s = load_scenario(p).with_context(|| format!("loading {}", p.display()))?;
            Ok(Params {
                filter: s.filter,
                weights: s.weights,
                scenario: Some(s),
            })
        }
        None => Ok(Params {
            filter: FilterParams::default(),
            weights: PlanWeights::default(),
            scenario: None,
        }),
    }
}

fn read_map(path: &Path) -> Result<GridMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut sc = load_scenario(&args.scenario).with_context(|| format!("loading {}", args.scenario.display()))?;
    if let Some(seed) = args.seed {
        sc.seed = seed;
    }
    if let Some(t) = args.max_ticks {
        if t == 0 {
            bail!("--max-ticks must be >= 1");
        }
        sc.max_ticks = t;
    }
    let setup = sc.build(base_dir(&args.scenario))?;
    let result = mission::run(&sc, setup)?;
    let paths = write_artifacts(&result, &args.out, args.export_svg)
        .with_context(|| format!("writing artifacts to {}", args.out.display()))?;
    log::debug!("{paths:?}");
    let outcome = result.summary.outcome;
    if !args.quiet {
        println!(
            "{}: {} after {} ticks ({:.1} s simulated)",
            if sc.name.is_empty() { "mission" } else { &sc.name },
            outcome,
            result.summary.ticks,
            result.summary.sim_time
        );
        println!("artifacts in {}", args.out.display());
    }
    Ok(if outcome == MissionState::Done {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn filter(args: FilterArgs) -> Result<ExitCode> {
    let p = params(args.input.scenario.as_deref())?;
    let mut map = read_map(&args.input.map)?;
    let report = run_pipeline(&mut map, &p.filter)?;
    fs::create_dir_all(&args.input.out)?;
    fs::write(args.input.out.join("map.json"), serde_json::to_string(&map)?)?;
    write_layer_exports(&map, &args.input.out)?;
    write_json(&args.input.out.join("filter_report.json"), &report)?;
    if !args.input.quiet {
        println!(
            "filled {} cells, {} traversable",
            report.filled_cells, report.traversable_cells
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn plan(args: PlanArgs) -> Result<ExitCode> {
    let p = params(args.input.scenario.as_deref())?;
    let map = read_map(&args.input.map)?;
    fs::create_dir_all(&args.input.out)?;
    let Some(path) = astar_plan(&map, args.start, args.goal, &p.weights)? else {
        if !args.input.quiet {
            println!("no path");
        }
        return Ok(ExitCode::from(1));
    };
    let field = tcs_core::planner::CostField::new(&map, &p.weights)?;
    let mut acc = 0.0;
    let rows: Vec<_> = path
        .cells
        .iter()
        .zip(&path.waypoints)
        .enumerate()
        .map(|(i, (c, w))| {
            if i > 0 {
                acc += field.cost(map.flat(*c));
            }
            tcs_core::mission::PathRow {
                tick: 0,
                x: w[0],
                y: w[1],
                cost: acc,
            }
        })
        .collect();
    write_path_csv(&args.input.out.join("path.csv"), &rows)?;
    if !args.input.quiet {
        println!("{} cells, cost {}", path.len(), path.cost);
    }
    Ok(ExitCode::SUCCESS)
}

fn anchor(args: AnchorArgs) -> Result<ExitCode> {
    let p = params(args.input.scenario.as_deref())?;
    let map = read_map(&args.input.map)?;
    let a = p.scenario.map(|s| s.anchor).unwrap_or_default();
    let found = detect_anchor(
        &map,
        args.center,
        args.radius.unwrap_or(a.search_radius),
        a.peakness_threshold,
        a.neighborhood_radius,
    )?;
    fs::create_dir_all(&args.input.out)?;
    write_json(&args.input.out.join("anchor.json"), &found)?;
    if !args.input.quiet {
        match &found {
            Some(c) => println!(
                "anchor at ({:.3}, {:.3}), peakness {:.1}",
                c.position[0], c.position[1], c.peakness
            ),
            None => println!("no anchor"),
        }
    }
    Ok(if found.is_some() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cliff(args: CliffArgs) -> Result<ExitCode> {
    let p = params(args.input.scenario.as_deref())?;
    let map = read_map(&args.input.map)?;
    let c = p.scenario.map(|s| s.cliff).unwrap_or_default();
    let report = detect_cliff(&map, args.start, args.goal, &p.weights, &c)?;
    fs::create_dir_all(&args.input.out)?;
    let json = serde_json::json!({
        "cliff": report.cliff,
        "best_goal": report.best_goal,
        "best_cost": report.best_cost.is_finite().then_some(report.best_cost),
    });
    write_json(&args.input.out.join("cliff.json"), &json)?;
    if let Some(path) = &report.path {
        let rows: Vec<_> = path
            .waypoints
            .iter()
            .map(|w| tcs_core::mission::PathRow {
                tick: 0,
                x: w[0],
                y: w[1],
                cost: 0.0,
            })
            .collect();
        write_path_csv(&args.input.out.join("path.csv"), &rows)?;
    }
    if !args.input.quiet {
        println!("cliff: {} (best cost {})", report.cliff, report.best_cost);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TCS_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Filter(a) => filter(a),
        Command::Plan(a) => plan(a),
        Command::DetectAnchor(a) => anchor(a),
        Command::DetectCliff(a) => cliff(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
