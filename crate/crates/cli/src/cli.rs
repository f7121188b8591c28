//! The `lorenz` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lorenz_core::cherry::{as_gap_map, cherry_verdict, rotation_trace, CherryParams, RigidRotation};
use lorenz_core::classify::{classify, ClassifyParams};
use lorenz_core::orbits::{iterate, lyapunov, periodic_orbits};
use lorenz_core::renorm::{build_tower, cycle_sets};
use lorenz_core::return_map::{first_return, return_decomposition, SCAN_POINTS};
use lorenz_core::{validate, Interval, IntervalMap, MapParams, Side, SignedPoint, Tolerances};
use serde::Serialize;

use crate::config::{parse_map, parse_sweep, MapConfig};
use crate::error::{Result, ToolError};
use crate::report::{self, Envelope};
use crate::sweep::run_sweep;

#[derive(Debug, Parser)]
#[command(name = "lorenz", version, about = "Analyse contracting Lorenz maps of the interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
struct Common {
    /// Map as inline JSON or a path to a JSON file.
    #[arg(long)]
    map: String,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the parameter constraints.
    Validate {
        #[arg(long)]
        map: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate a point and estimate its Lyapunov exponent.
    Orbit {
        #[command(flatten)]
        common: Common,
        /// Starting point; the critical point when omitted.
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
    /// Periodic orbits up to a period.
    Periodic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        max_period: usize,
    },
    /// First return map to a nice interval.
    ReturnMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
    /// Renormalization tower with the cycle sets of each level.
    Renorm {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        max_period: usize,
        /// Points sampled from each `Lambda_J`.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Rotation number of the gap map between the critical values, or of a
    /// rigid rotation.
    Rotation {
        /// Map as inline JSON or a path; omit with `--rigid`.
        #[arg(long, required_unless_present = "rigid")]
        map: Option<String>,
        #[arg(long)]
        rigid: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Iteration counts of the trace.
        #[arg(long, value_delimiter = ',', default_values_t = [1000usize, 10_000, 100_000, 1_000_000])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 12)]
        max_period: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Classify the attractor.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        settings: Settings,
    },
    /// Classify every point of a parameter grid and write a CSV summary.
    Sweep {
        /// Sweep specification as inline JSON or a path.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Debug, Args)]
struct Settings {
    /// Seed of the sampling RNG [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Longest period searched for periodic orbits [default: 12].
    #[arg(long)]
    max_period: Option<usize>,
    /// Iterations kept per sampled orbit [default: 10000].
    #[arg(long)]
    horizon: Option<usize>,
    /// Cells of the attractor cover [default: 4096].
    #[arg(long)]
    grid: Option<usize>,
    /// Deepest renormalization level searched [default: 3].
    #[arg(long)]
    depth: Option<usize>,
}

impl Settings {
    fn apply(&self, mut p: ClassifyParams) -> ClassifyParams {
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.max_period {
            p.max_period = v;
        }
        if let Some(v) = self.horizon {
            p.horizon = v;
        }
        if let Some(v) = self.grid {
            p.grid = v;
        }
        if let Some(v) = self.depth {
            p.max_depth = v;
        }
        p
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(path: &Option<PathBuf>, command: &str, cfg: &MapConfig, seed: u64, result: T) -> Result<()> {
    emit_with(path, command, Some(cfg.params()), cfg.tolerances(), seed, result)
}

fn emit_with<T: Serialize>(
    path: &Option<PathBuf>,
    command: &str,
    params: Option<MapParams>,
    tolerances: Tolerances,
    seed: u64,
    result: T,
) -> Result<()> {
    let env = Envelope { command, params, tolerances, seed, result };
    let mut out = output(path)?;
    report::write_json(&mut out, &env)?;
    out.flush()?;
    Ok(())
}

fn r_tol<M: IntervalMap>(g: &lorenz_core::cherry::GapMap<M>) -> &Tolerances {
    g.map().tolerances()
}

fn table(path: &Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut out = output(path)?;
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct OrbitResult {
    orbit: lorenz_core::orbits::Orbit,
    lyapunov: lorenz_core::orbits::LyapunovEstimate,
}

#[derive(Serialize)]
struct RenormResult {
    tower: lorenz_core::renorm::RenormTower,
    cycle_sets: Vec<lorenz_core::renorm::CycleSets>,
}

#[derive(Serialize)]
struct RotationResult {
    rigid: Option<f64>,
    trace: Vec<lorenz_core::cherry::RotationEstimate>,
    verdict: Option<lorenz_core::cherry::CherryVerdict>,
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Validate { map, out } => {
            let cfg = parse_map(&map)?;
            let report = validate(&cfg.params());
            let valid = report.is_valid();
            emit(&out, "validate", &cfg, 0, &report)?;
            if !valid {
                return Err(ToolError::Invalid(report.messages().join("; ")));
            }
            cfg.tolerances().check()?;
            Ok(())
        }
        Command::Orbit { common, x, side, horizon } => {
            let cfg = parse_map(&common.map)?;
            let f = cfg.build()?;
            let x = x.unwrap_or(f.critical_point());
            if !(0.0..=1.0).contains(&x) {
                return Err(ToolError::Invalid(format!("x = {x} is outside [0, 1]")));
            }
            let side = match side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let p = SignedPoint { x, side };
            let orbit = iterate(&f, p, horizon);
            match common.format {
                Format::Table => table(&common.out, |w| report::orbit_table(w, &orbit)),
                Format::Json => {
                    let res = OrbitResult { lyapunov: lyapunov(&f, p, horizon), orbit };
                    emit(&common.out, "orbit", &cfg, 0, res)
                }
            }
        }
        Command::Periodic { common, max_period } => {
            let cfg = parse_map(&common.map)?;
            let f = cfg.build()?;
            let orbits = periodic_orbits(&f, max_period);
            match common.format {
                Format::Table => table(&common.out, |w| {
                    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(w);
                    let wr = |e: csv::Error| ToolError::Write(io::Error::other(e));
                    w.write_record(["itinerary", "period", "multiplier", "stability", "point"]).map_err(wr)?;
                    for o in &orbits {
                        for x in &o.points {
                            w.write_record([
                                o.itinerary.clone(),
                                o.period.to_string(),
                                o.multiplier.to_string(),
                                format!("{:?}", o.stability),
                                x.to_string(),
                            ])
                            .map_err(wr)?;
                        }
                    }
                    w.flush()?;
                    Ok(())
                }),
                Format::Json => emit(&common.out, "periodic", &cfg, 0, &orbits),
            }
        }
        Command::ReturnMap { common, lo, hi, horizon } => {
            let cfg = parse_map(&common.map)?;
            let f = cfg.build()?;
            let c = f.critical_point();
            if !(0.0 <= lo && lo < c && c < hi && hi <= 1.0) {
                return Err(ToolError::Invalid(format!("({lo}, {hi}) must contain c = {c} inside [0, 1]")));
            }
            let d = first_return(&f, Interval::open(lo, hi), horizon)?;
            match common.format {
                Format::Table => table(&common.out, |w| report::decomposition_table(w, &d)),
                Format::Json => emit(&common.out, "return-map", &cfg, 0, &d),
            }
        }
        Command::Renorm { common, depth, max_period, samples } => {
            let cfg = parse_map(&common.map)?;
            let f = cfg.build()?;
            if depth == 0 || max_period == 0 {
                return Err(ToolError::Invalid("depth and max-period must be positive".into()));
            }
            let tower = build_tower(&f, depth, max_period)?;
            match common.format {
                Format::Table => table(&common.out, |w| report::tower_table(w, &tower)),
                Format::Json => {
                    let cycle_sets =
                        tower.records.iter().map(|r| cycle_sets(&f, r, samples)).collect::<lorenz_core::Result<_>>()?;
                    emit(&common.out, "renorm", &cfg, 0, RenormResult { tower, cycle_sets })
                }
            }
        }
        Command::Rotation { map, rigid, out, format, n, max_period, depth } => {
            if n.contains(&0) {
                return Err(ToolError::Invalid("iteration counts must be positive".into()));
            }
            let (params, tol, res) = match (rigid, map) {
                (Some(rho), _) => {
                    let r = RigidRotation::new(rho)?;
                    let d = return_decomposition(&r, Interval::open(0.0, 1.0), 4, SCAN_POINTS);
                    let g = as_gap_map(r, d)?;
                    let res = RotationResult { rigid: Some(rho), trace: rotation_trace(&g, &n)?, verdict: None };
                    (None, *r_tol(&g), res)
                }
                (None, Some(map)) => {
                    let cfg = parse_map(&map)?;
                    let f = cfg.build()?;
                    let (v1, v0) = f.critical_values();
                    let c = f.critical_point();
                    let trace = if v0 < c && c < v1 {
                        let d = return_decomposition(&f, Interval::open(v0, v1), 64, SCAN_POINTS);
                        as_gap_map(f, d).and_then(|g| rotation_trace(&g, &n)).unwrap_or_default()
                    } else {
                        Vec::new()
                    };
                    let tower = build_tower(&f, depth.max(1), max_period)?;
                    let params = CherryParams {
                        max_period,
                        rotation_n: n.iter().copied().max().unwrap_or(1_000_000),
                        ..CherryParams::default()
                    };
                    let verdict = cherry_verdict(&f, &tower, &params);
                    (Some(cfg.params()), cfg.tolerances(), RotationResult { rigid: None, trace, verdict: Some(verdict) })
                }
                (None, None) => return Err(ToolError::Invalid("either --map or --rigid is required".into())),
            };
            match format {
                Format::Table => table(&out, |w| report::rotation_table(w, &res.trace)),
                Format::Json => emit_with(&out, "rotation", params, tol, 0, res),
            }
        }
        Command::Classify { common, settings } => {
            let cfg = parse_map(&common.map)?;
            let f = cfg.build()?;
            let params = settings.apply(ClassifyParams::default());
            if params.grid < 2 || params.max_period == 0 {
                return Err(ToolError::Invalid("grid must be at least 2 and max-period positive".into()));
            }
            let report = classify(&f, &params);
            match common.format {
                Format::Table => table(&common.out, |w| report::cover_table(w, &report.lambda_cover))?,
                Format::Json => emit(&common.out, "classify", &cfg, params.seed, &report)?,
            }
            if !report.invariant_violations.is_empty() {
                return Err(ToolError::Invariant(report.invariant_violations.join("; ")));
            }
            Ok(())
        }
        Command::Sweep { spec, out, workers, settings } => {
            let spec = parse_sweep(&spec)?;
            let s = &spec.settings;
            let mut params = ClassifyParams::default();
            params.seed = spec.seed.unwrap_or(0);
            params.max_period = s.max_period.unwrap_or(params.max_period);
            params.grid = s.grid.unwrap_or(params.grid);
            params.horizon = s.horizon.unwrap_or(params.horizon);
            params.max_depth = s.depth.unwrap_or(params.max_depth);
            params.samples = s.samples.unwrap_or(params.samples);
            params.rotation_n = s.rotation_n.unwrap_or(params.rotation_n);
            let params = settings.apply(params);
            let tol = spec.tolerances.apply(Tolerances::default());
            tol.check()?;
            let workers = workers
                .or(spec.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let points: Vec<MapParams> = spec.points();
            let rows = run_sweep(&points, tol, &params, workers);
            let out = out.or(spec.out.map(PathBuf::from));
            let mut w = output(&out)?;
            report::summary_csv(&mut w, &rows)?;
            w.flush()?;
            Ok(())
        }
    }
}

/// Run the command line and return the process exit code: `0` on success,
/// `1` on invalid input, `2` on an internal invariant violation.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lorenz: {e}");
            e.exit_code()
        }
    }
}
