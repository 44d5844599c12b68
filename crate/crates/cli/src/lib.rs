//! Command-line front end: scenario runs, distance grids with level sets,
//! and polygon-versus-circle comparison runs.

pub mod contour;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use safeguard_core::distance::{ConvexPolygon, PlacedEllipse};
use safeguard_core::robots::Outline;
use safeguard_core::scenario::{RobotConfig, Scenario, ScenarioError};
use safeguard_core::sim::{grid_evaluate, GridMode, GridSpec, GridValues, RunSummary, Simulation, TrajectoryLog};
use safeguard_core::Vec2;
use serde::Serialize;

use crate::output::{grid_csv, polylines_csv, trajectory_csv, write_atomic, SummaryFile};
use crate::svg::Svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNSAFE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "safeguard", version, about = "Safe navigation among moving ellipses with SE(2) barrier functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write trajectory.csv, summary.json and frames.svg.
    Run(RunArgs),
    /// Evaluate the robot-to-ellipse distance over a grid of positions.
    Grid(GridArgs),
    /// Run a polygonal scenario twice: exact shape and encapsulating circle.
    Compare(CompareArgs),
}

/// Scenario overrides shared by `run` and `compare`.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Integration step [s], in (0, 0.1].
    #[arg(long)]
    pub dt: Option<f64>,
    /// Time limit [s].
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Barrier gain.
    #[arg(long)]
    pub gamma_h: Option<f64>,
    /// Lyapunov decay gain.
    #[arg(long)]
    pub gamma_v: Option<f64>,
    /// Penalty on the Lyapunov slack.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Seed for obstacle jitter.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(v) = self.dt {
            s.sim.dt = v;
        }
        if let Some(v) = self.t_max {
            s.sim.t_max = v;
        }
        if let Some(v) = self.gamma_h {
            s.controller.gamma_h = v;
        }
        if let Some(v) = self.gamma_v {
            s.controller.gamma_v = v;
        }
        if let Some(v) = self.lambda {
            s.controller.lambda = v;
        }
        if let Some(v) = self.seed {
            s.sim.seed = v;
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Number of keyframes drawn in frames.svg (0 disables the file).
    #[arg(long, default_value_t = 6)]
    pub frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Se2,
    Circle,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Scenario JSON file with a polygonal unicycle robot.
    pub scenario: PathBuf,
    /// Robot orientation [rad] at every grid node.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Se2)]
    pub mode: ModeArg,
    /// Encapsulating radius for circle mode (default: polygon circumradius).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Nodes per axis.
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
    /// Output CSV.
    #[arg(long, default_value = "grid.csv")]
    pub out: PathBuf,
    /// Comma-separated isovalues; writes one contour CSV per level and an SVG.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    /// SVG path for the level sets (default: the CSV path with .svg).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Half width of the square grid around the obstacle center.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Obstacle index.
    #[arg(long, default_value_t = 0)]
    pub obstacle: usize,
    /// Time at which the obstacle pose is taken.
    #[arg(long, default_value_t = 0.0)]
    pub time: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Scenario JSON file with a polygonal unicycle robot.
    pub scenario: PathBuf,
    /// Output directory; receives se2/, circle/ and compare.json.
    #[arg(long, default_value = "compare")]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug)]
pub enum CliError {
    Config(ScenarioError),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "invalid scenario: {e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.to_path_buf(), e)
}

/// Exit code as a function of the run summary: unsafe beats timeout.
pub fn exit_code(summary: &RunSummary) -> i32 {
    if summary.violations > 0 || summary.min_h <= 0.0 {
        EXIT_UNSAFE
    } else if !summary.goal_reached {
        EXIT_TIMEOUT
    } else {
        EXIT_OK
    }
}

pub fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut scenario = Scenario::parse(&text)?;
    overrides.apply(&mut scenario);
    scenario.validate()?;
    Ok(scenario)
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

struct RunOutput {
    log: TrajectoryLog,
    sim: Simulation,
    code: i32,
}

fn run_and_write(scenario: &Scenario, out: &Path, frames: usize) -> Result<RunOutput, CliError> {
    let sim = scenario.build()?;
    let start = Instant::now();
    let log = sim.run();
    let runtime = start.elapsed().as_secs_f64();
    let code = exit_code(&log.summary);

    let path = out.join("trajectory.csv");
    write_atomic(&path, &trajectory_csv(scenario, &log)).map_err(io_err(&path))?;
    let summary = SummaryFile {
        summary: &log.summary,
        runtime,
        exit_code: code,
    };
    let path = out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_atomic(&path, json.as_bytes()).map_err(io_err(&path))?;
    if frames > 0 {
        let path = out.join("frames.svg");
        write_atomic(&path, frames_svg(&sim, &log, frames).as_bytes()).map_err(io_err(&path))?;
    }
    log::info!(
        "{}: goal_reached={} min_h={:.4} steps={} runtime={runtime:.2}s",
        out.display(),
        log.summary.goal_reached,
        log.summary.min_h,
        log.summary.steps
    );
    Ok(RunOutput { log, sim, code })
}

pub fn cmd_run(args: &RunArgs) -> Result<i32, CliError> {
    let scenario = load_scenario(&args.scenario, &args.overrides)?;
    Ok(run_and_write(&scenario, &args.out, args.frames)?.code)
}

fn keyframes(rows: usize, frames: usize) -> Vec<usize> {
    if rows == 0 {
        return Vec::new();
    }
    if frames <= 1 || rows == 1 {
        return vec![rows - 1];
    }
    let mut idx: Vec<usize> = (0..frames)
        .map(|k| ((k as f64) * (rows - 1) as f64 / (frames - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

fn pt(v: Vec2) -> (f64, f64) {
    (v.x, v.y)
}

fn draw_ellipse(svg: &mut Svg, e: &PlacedEllipse, stroke: &str, fill: &str, opacity: f64) {
    svg.ellipse(pt(e.pose.position()), (e.shape.a(), e.shape.b()), e.pose.theta(), stroke, fill, opacity);
}

/// Robot outlines and obstacle ellipses at evenly spaced rows, plus the
/// goal disk and the traced goal point.
pub fn frames_svg(sim: &Simulation, log: &TrajectoryLog, frames: usize) -> String {
    let mut svg = Svg::new();
    svg.circle(pt(sim.goal.center), sim.goal.radius, "green", "green", 0.15);
    let keys = keyframes(log.rows.len(), frames);
    let count = keys.len().max(1) as f64;
    for (n, &k) in keys.iter().enumerate() {
        let row = &log.rows[k];
        let opacity = 0.15 + 0.6 * (n as f64 + 1.0) / count;
        for o in &sim.obstacles {
            draw_ellipse(&mut svg, &o.placed_at(row.t), "purple", "purple", 0.3 * opacity);
        }
        for outline in sim.model.outline(&row.state) {
            match outline {
                Outline::Polygon(p) => {
                    let pts: Vec<_> = p.iter().copied().map(pt).collect();
                    svg.polygon(&pts, "blue", "blue", 0.4 * opacity);
                }
                Outline::Polyline(p) => {
                    let pts: Vec<_> = p.iter().copied().map(pt).collect();
                    svg.polyline(&pts, "blue", 2.0);
                }
                Outline::Circle { center, radius } => svg.circle(pt(center), radius, "blue", "blue", 0.4 * opacity),
            }
        }
    }
    let trace: Vec<_> = log.rows.iter().map(|r| pt(sim.model.goal_point(&r.state))).collect();
    svg.polyline(&trace, "red", 1.5);
    svg.render()
}

fn robot_polygon(scenario: &Scenario) -> Result<ConvexPolygon, CliError> {
    match &scenario.robot {
        RobotConfig::Unicycle { vertices, .. } => {
            ConvexPolygon::new(vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect())
                .map_err(|e| CliError::Config(ScenarioError::at("/robot/vertices", e.to_string())))
        }
        _ => Err(CliError::Usage("this command needs a polygonal unicycle robot".into())),
    }
}

fn level_path(out: &Path, level: f64) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "grid".into());
    out.with_file_name(format!("{stem}_level_{level}.csv"))
}

pub fn cmd_grid(args: &GridArgs) -> Result<i32, CliError> {
    let scenario = load_scenario(&args.scenario, &Overrides::default())?;
    let poly = robot_polygon(&scenario)?;
    let obstacles = scenario.obstacles();
    let obstacle = obstacles
        .get(args.obstacle)
        .ok_or_else(|| CliError::Usage(format!("scenario has {} obstacle(s), no index {}", obstacles.len(), args.obstacle)))?;
    if !args.theta.is_finite() || !args.time.is_finite() {
        return Err(CliError::Usage("--theta and --time must be finite".into()));
    }
    let ellipse = obstacle.placed_at(args.time);
    let mode = match args.mode {
        ModeArg::Se2 => GridMode::Se2,
        ModeArg::Circle => {
            let radius = args.radius.unwrap_or_else(|| poly.circumradius());
            if !(radius.is_finite() && radius >= 0.0) {
                return Err(CliError::Usage("--radius must be non-negative".into()));
            }
            GridMode::Circle { radius }
        }
    };
    let half = args
        .half_width
        .unwrap_or_else(|| ellipse.shape.a().max(ellipse.shape.b()) + 3.0);
    let c = ellipse.pose.position();
    let spec = GridSpec::square(c.x, c.y, half, args.resolution);
    if !spec.is_valid() {
        return Err(CliError::Usage("grid needs resolution >= 2 and a positive finite half width".into()));
    }
    let grid = grid_evaluate(&poly, &spec, args.theta, &ellipse, mode);
    write_atomic(&args.out, &grid_csv(&grid)).map_err(io_err(&args.out))?;

    if !args.levels.is_empty() {
        let svg_path = args.svg.clone().unwrap_or_else(|| args.out.with_extension("svg"));
        let svg = level_sets(&grid, &args.levels, &ellipse, &args.out)?;
        write_atomic(&svg_path, svg.as_bytes()).map_err(io_err(&svg_path))?;
    }
    Ok(EXIT_OK)
}

const LEVEL_COLORS: [&str; 4] = ["red", "blue", "darkorange", "teal"];

fn level_sets(grid: &GridValues, levels: &[f64], ellipse: &PlacedEllipse, out: &Path) -> Result<String, CliError> {
    let mut svg = Svg::new();
    let s = &grid.spec;
    svg.polyline(
        &[(s.x_min, s.y_min), (s.x_max, s.y_min), (s.x_max, s.y_max), (s.x_min, s.y_max), (s.x_min, s.y_min)],
        "lightgray",
        1.0,
    );
    draw_ellipse(&mut svg, ellipse, "black", "gray", 0.4);
    for (k, &level) in levels.iter().enumerate() {
        let lines = contour::contour_lines(grid, level);
        let path = level_path(out, level);
        write_atomic(&path, &polylines_csv(&lines)).map_err(io_err(&path))?;
        for line in &lines {
            svg.polyline(line, LEVEL_COLORS[k % LEVEL_COLORS.len()], 1.5);
        }
    }
    Ok(svg.render())
}

fn path_length(sim: &Simulation, log: &TrajectoryLog) -> f64 {
    log.rows
        .windows(2)
        .map(|w| (sim.model.goal_point(&w[1].state) - sim.model.goal_point(&w[0].state)).norm())
        .sum()
}

#[derive(Debug, Serialize)]
pub struct CompareEntry {
    pub goal_reached: bool,
    pub t_goal: Option<f64>,
    pub min_h: f64,
    pub violations: usize,
    pub path_length: f64,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
pub struct CompareFile {
    pub se2: CompareEntry,
    pub circle: CompareEntry,
    pub circle_radius: f64,
}

fn entry(run: &RunOutput) -> CompareEntry {
    let s = &run.log.summary;
    CompareEntry {
        goal_reached: s.goal_reached,
        t_goal: s.t_goal,
        min_h: s.min_h,
        violations: s.violations,
        path_length: path_length(&run.sim, &run.log),
        exit_code: run.code,
    }
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32, CliError> {
    let scenario = load_scenario(&args.scenario, &args.overrides)?;
    let poly = robot_polygon(&scenario)?;
    let circle = scenario
        .with_encapsulating_circle()
        .ok_or_else(|| CliError::Usage("this command needs a polygonal unicycle robot".into()))?;
    let se2 = run_and_write(&scenario, &args.out.join("se2"), 6)?;
    let circ = run_and_write(&circle, &args.out.join("circle"), 6)?;
    let file = CompareFile {
        se2: entry(&se2),
        circle: entry(&circ),
        circle_radius: poly.circumradius(),
    };
    let path = args.out.join("compare.json");
    let json = serde_json::to_string_pretty(&file).expect("comparison serializes");
    write_atomic(&path, json.as_bytes()).map_err(io_err(&path))?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyframes_cover_first_and_last() {
        assert_eq!(keyframes(11, 3), vec![0, 5, 10]);
        assert_eq!(keyframes(2, 5), vec![0, 1]);
        assert_eq!(keyframes(1, 5), vec![0]);
        assert!(keyframes(0, 5).is_empty());
    }

    #[test]
    fn level_file_names() {
        assert_eq!(level_path(Path::new("a/grid.csv"), 0.2), PathBuf::from("a/grid_level_0.2.csv"));
    }
}
