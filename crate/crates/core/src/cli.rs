//! Command-line front end. The `fusedfocus` binary only forwards the process
//! arguments and environment to [`main_with`].
//!
//! Each subcommand turns a resolved [`RunConfig`] into one data product in
//! the configured format. Diagnostics go to stderr; stdout carries data only
//! when `--stdout` is set.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::acceptance::{self, CriterionResult};
use crate::blowup::{self, equilibrium_spectrum, local_expansion, verify_hopf_numerically, CoefficientCheck, HopfRecord};
use crate::config::{self, ConfigError, Format, Overrides, RunConfig, SystemKind};
use crate::filippov::{self, classify_boundary, find_tangencies, BoundaryKind, DomainBox, PiecewiseSystem, TangencyPoint};
use crate::integrator::{integrate, IntegrationError, Mode, Trajectory};
use crate::linalg;
use crate::ode;
use crate::output::{self, csv_bytes, json_bytes, opt, Frame, Svg};
use crate::scan::{scan_nonsmooth, scan_smooth, Attractor, BifurcationDiagram, BifurcationKind};
use crate::welander::{
    pseudoequilibrium, sliding_boundaries, virtual_equilibria, Chart, TsState, WelanderFilippov, WelanderParams,
    WelanderSmooth, XyState,
};

#[derive(Debug, Parser)]
#[command(name = "fusedfocus", version, about = "Fused-focus and Hopf analysis of Welander's convection model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration (also FUSEDFOCUS_CONFIG).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (also FUSEDFOCUS_OUT).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Output format (also FUSEDFOCUS_FORMAT).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for the randomised checks of `verify` (also FUSEDFOCUS_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for scans and checks (also FUSEDFOCUS_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the data product to stdout instead of a file.
    #[arg(long, global = true)]
    pub stdout: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate trajectories and write samples or a phase portrait.
    Simulate,
    /// Report crossing and sliding arcs, folds and the pseudoequilibrium.
    Sliding,
    /// Trace and discriminant of the blown-up linearisation, and the Hopf point.
    Blowup,
    /// Attractor classification over a parameter grid.
    Scan,
    /// Run the acceptance criteria.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sliding => "sliding",
            Command::Blowup => "blowup",
            Command::Scan => "scan",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerics(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerics(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn numerics(e: impl std::fmt::Display) -> CliError {
    CliError::Numerics(e.to_string())
}

fn unsupported(cmd: Command, f: Format) -> CliError {
    CliError::Config(format!("{} has no {} output", cmd.name(), f.extension()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// A finished data product. `failure` is reported after the bytes are
/// written, so a failing `verify` still leaves its report behind.
pub struct Product {
    pub bytes: Vec<u8>,
    pub failure: Option<CliError>,
}

impl Product {
    fn ok(bytes: Vec<u8>) -> Self {
        Self { bytes, failure: None }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(
    args: I,
    env: &dyn Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(&cli, env, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Resolves the configuration for `cli` against `env`.
pub fn resolve_config(cli: &Cli, env: &dyn Fn(&str) -> Option<String>) -> Result<RunConfig, CliError> {
    let path = cli.config.clone().or_else(|| env("FUSEDFOCUS_CONFIG").map(PathBuf::from));
    let overrides =
        Overrides { out: cli.out.clone(), format: cli.format, seed: cli.seed, threads: cli.threads, stdout: cli.stdout };
    Ok(config::resolve(path.as_deref(), env, &overrides)?)
}

pub fn run(
    cli: &Cli,
    env: &dyn Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = resolve_config(cli, env)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut diag = Vec::new();
    let product = pool.install(|| execute(cli.command, &cfg, &mut diag));
    let _ = stderr.write_all(&diag);
    let product = product?;
    if cfg.output.stdout {
        stdout.write_all(&product.bytes).map_err(|e| CliError::Io(e.to_string()))?;
    } else {
        let dir = &cfg.output.dir;
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(format!("{}.{}", cli.command.name(), cfg.output.format.extension()));
        std::fs::write(&path, &product.bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let _ = writeln!(stderr, "wrote {}", path.display());
    }
    product.failure.map_or(Ok(()), Err)
}

/// Runs one subcommand and renders its data product.
pub fn execute(cmd: Command, cfg: &RunConfig, diag: &mut dyn Write) -> Result<Product, CliError> {
    match cmd {
        Command::Simulate => simulate(cfg, diag).map(Product::ok),
        Command::Sliding => sliding(cfg).map(Product::ok),
        Command::Blowup => blowup_cmd(cfg, diag).map(Product::ok),
        Command::Scan => scan(cfg, diag).map(Product::ok),
        Command::Verify => verify(cfg, diag),
    }
}

fn require_default_shape(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    let d = WelanderParams::default();
    if cfg.system == SystemKind::Custom {
        return Err(CliError::Config(format!("{what} applies to the Welander systems only")));
    }
    if cfg.params.alpha != d.alpha || cfg.params.beta != d.beta {
        return Err(CliError::Config(format!("{what} is specialised to alpha = 4/5, beta = 1/2")));
    }
    Ok(())
}

// ---------------------------------------------------------------- simulate

struct Row {
    t: f64,
    x: [f64; 2],
    mode: &'static str,
    event: Option<&'static str>,
}

#[derive(Serialize)]
struct EventRecord {
    kind: &'static str,
    t: f64,
    state: [f64; 2],
}

#[derive(Serialize)]
struct RunRecord {
    initial: [f64; 2],
    status: String,
    final_state: Option<[f64; 2]>,
    final_mode: Option<&'static str>,
    events: Vec<EventRecord>,
    #[serde(skip)]
    rows: Vec<Row>,
}

/// Landmarks of the Welander phase plane, in the `(x, y)` chart.
#[derive(Default, Serialize)]
struct Landmarks {
    folds: Vec<[f64; 2]>,
    virtual_equilibria: Vec<[f64; 2]>,
    pseudoequilibrium: Option<[f64; 2]>,
    smooth_equilibrium: Option<[f64; 2]>,
}

fn pair(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

fn rows_from_trajectory(traj: &Trajectory) -> Vec<Row> {
    let mut rows: Vec<Row> = Vec::new();
    for seg in &traj.segments {
        let last = seg.samples.len().saturating_sub(1);
        for (i, (t, x)) in seg.samples.iter().enumerate() {
            if i == 0 && rows.last().is_some_and(|r| r.t == *t) {
                continue;
            }
            let event = (i == last).then(|| seg.exit_event.as_ref().map(|e| e.kind.as_str())).flatten();
            rows.push(Row { t: *t, x: pair(x), mode: seg.mode.as_str(), event });
        }
    }
    rows
}

fn hybrid_run<S: PiecewiseSystem>(sys: &S, x0: [f64; 2], cfg: &RunConfig, diag: &mut dyn Write) -> Result<RunRecord, CliError> {
    let (traj, status) = match integrate(sys, &x0, (cfg.simulate.t_span[0], cfg.simulate.t_span[1]), &cfg.simulate.integration) {
        Ok(t) => (t, "complete".to_string()),
        Err(IntegrationError::ZenoSuspected { t, partial, .. }) => {
            let _ = writeln!(diag, "warning: run from {x0:?} stopped at t = {t}: chattering near a fold (Zeno suspected)");
            (*partial, format!("zeno_suspected at t = {t}"))
        }
        Err(e) => return Err(numerics(e)),
    };
    let events = traj.events().map(|e| EventRecord { kind: e.kind.as_str(), t: e.t, state: pair(&e.x) }).collect();
    Ok(RunRecord {
        initial: x0,
        status,
        final_state: traj.final_state().map(|(_, x)| pair(x)),
        final_mode: traj.final_mode().map(Mode::as_str),
        events,
        rows: rows_from_trajectory(&traj),
    })
}

fn smooth_run(sys: &WelanderSmooth, x0: [f64; 2], cfg: &RunConfig) -> Result<RunRecord, CliError> {
    let [t0, t1] = cfg.simulate.t_span;
    let sol = ode::integrate(sys, &x0, t0, t1, &cfg.simulate.integration.ode).map_err(numerics)?;
    let rows: Vec<Row> =
        sol.t.iter().zip(&sol.x).map(|(t, x)| Row { t: *t, x: pair(x), mode: "smooth", event: None }).collect();
    Ok(RunRecord {
        initial: x0,
        status: "complete".into(),
        final_state: rows.last().map(|r| r.x),
        final_mode: Some("smooth"),
        events: Vec::new(),
        rows,
    })
}

fn welander_landmarks(p: &WelanderParams) -> Landmarks {
    let mut l = Landmarks::default();
    if let Ok((xm, xp)) = sliding_boundaries(p) {
        l.folds = vec![[xm, 0.0], [xp, 0.0]];
    }
    l.virtual_equilibria = virtual_equilibria(p).iter().map(|e| {
        let xy = e.to_xy(p);
        [xy.x, xy.y]
    }).collect();
    l.pseudoequilibrium = pseudoequilibrium(p).map(|(x, _)| [x, 0.0]);
    if p.is_smooth() {
        l.smooth_equilibrium = blowup::smooth_equilibrium(p).ok().and_then(|e| blowup::xk_to_xy(e, p.a).ok());
    }
    l
}

fn simulate(cfg: &RunConfig, diag: &mut dyn Write) -> Result<Vec<u8>, CliError> {
    let p = cfg.params;
    let welander = cfg.system != SystemKind::Custom;
    let ts = welander && cfg.simulate.chart == Chart::Ts;
    let to_xy = |v: [f64; 2]| if ts { let s = TsState { t: v[0], s: v[1] }.to_xy(&p); [s.x, s.y] } else { v };
    let view = |v: [f64; 2]| if ts { let s = XyState { x: v[0], y: v[1] }.to_ts(&p); [s.t, s.s] } else { v };
    let mut runs = Vec::new();
    for &init in &cfg.simulate.initial {
        let x0 = to_xy(init);
        let mut run = match cfg.system {
            SystemKind::WelanderNonsmooth => {
                let sys = WelanderFilippov::new(p).map_err(|e| CliError::Config(e.to_string()))?;
                hybrid_run(&sys, x0, cfg, diag)?
            }
            SystemKind::WelanderSmooth => {
                let sys = WelanderSmooth::new(p, Chart::Xy).map_err(|e| CliError::Config(e.to_string()))?;
                smooth_run(&sys, x0, cfg)?
            }
            SystemKind::Custom => {
                let sys = cfg.custom.as_ref().expect("validated").to_system();
                hybrid_run(&sys, x0, cfg, diag)?
            }
        };
        run.initial = init;
        run.final_state = run.final_state.map(view);
        for e in &mut run.events {
            e.state = view(e.state);
        }
        runs.push(run);
    }
    let mut marks = if welander { welander_landmarks(&p) } else { custom_landmarks(cfg) };
    for v in marks.folds.iter_mut().chain(&mut marks.virtual_equilibria) {
        *v = view(*v);
    }
    marks.pseudoequilibrium = marks.pseudoequilibrium.map(view);
    marks.smooth_equilibrium = marks.smooth_equilibrium.map(view);
    let (c0, c1) = if ts { ("T", "S") } else { ("x", "y") };
    match cfg.output.format {
        Format::Csv => csv_bytes(
            &["run", "t", c0, c1, "mode", "event"],
            runs.iter().enumerate().flat_map(|(i, r)| {
                r.rows.iter().map(move |row| {
                    let v = view(row.x);
                    vec![
                        i.to_string(),
                        row.t.to_string(),
                        v[0].to_string(),
                        v[1].to_string(),
                        row.mode.to_string(),
                        row.event.unwrap_or("").to_string(),
                    ]
                })
            }),
        )
        .map_err(csv_err),
        Format::Json => Ok(json_bytes(&serde_json::json!({
            "system": cfg.system,
            "chart": if ts { "ts" } else { "xy" },
            "params": p,
            "runs": runs,
            "landmarks": marks,
        }))),
        Format::Svg => Ok(phase_portrait(cfg, &runs, &marks, ts, view, (c0, c1))),
    }
}

fn custom_landmarks(cfg: &RunConfig) -> Landmarks {
    let lin = cfg.custom.as_ref().expect("validated");
    let sys = lin.to_system();
    let folds = find_tangencies(&sys, &lin.window).unwrap_or_default();
    Landmarks { folds: folds.iter().map(|t| pair(&t.location)).collect(), ..Landmarks::default() }
}

fn mode_colour(mode: &str) -> &'static str {
    match mode {
        "smooth_plus" => output::PLUS_COLOUR,
        "smooth_minus" => output::MINUS_COLOUR,
        "sliding" => output::SLIDING_COLOUR,
        _ => "#222222",
    }
}

/// Points where the manifold meets the frame, in view coordinates.
fn manifold_in_frame(frame: &Frame, cfg: &RunConfig, ts: bool) -> Vec<[f64; 2]> {
    let p = &cfg.params;
    match (&cfg.custom, cfg.system) {
        (Some(lin), SystemKind::Custom) => {
            let (c, d) = (lin.normal, lin.offset);
            if c[1].abs() >= c[0].abs() {
                frame.x.iter().map(|&x| [x, (d - c[0] * x) / c[1]]).collect()
            } else {
                frame.y.iter().map(|&y| [(d - c[1] * y) / c[0], y]).collect()
            }
        }
        _ if ts => frame.x.iter().map(|&t| [t, p.alpha * t + p.epsilon]).collect(),
        _ => frame.x.iter().map(|&x| [x, 0.0]).collect(),
    }
}

fn phase_portrait(
    cfg: &RunConfig,
    runs: &[RunRecord],
    marks: &Landmarks,
    ts: bool,
    view: impl Fn([f64; 2]) -> [f64; 2],
    labels: (&str, &str),
) -> Vec<u8> {
    let pts = runs
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| view(row.x)))
        .chain(marks.folds.iter().copied())
        .chain(marks.virtual_equilibria.iter().copied())
        .chain(marks.pseudoequilibrium);
    let frame = Frame::fit(pts);
    let title = match cfg.system {
        SystemKind::Custom => "custom piecewise-linear system".to_string(),
        _ => format!("Welander model, epsilon = {}, a = {}", cfg.params.epsilon, cfg.params.a),
    };
    let mut svg = Svg::new(frame, &title, labels.0, labels.1);
    let m = manifold_in_frame(&frame, cfg, ts);
    svg.polyline(&m, "#888888", 1.0, true);
    for r in runs {
        // consecutive rows of one mode form one polyline
        let mut start = 0;
        for i in 1..=r.rows.len() {
            if i == r.rows.len() || r.rows[i].mode != r.rows[start].mode {
                let mut chunk: Vec<[f64; 2]> = r.rows[start..i].iter().map(|row| view(row.x)).collect();
                if i < r.rows.len() {
                    chunk.push(view(r.rows[i].x));
                }
                svg.polyline(&chunk, mode_colour(r.rows[start].mode), 1.2, false);
                start = i;
            }
        }
    }
    for f in &marks.folds {
        svg.square(*f, "#000000");
    }
    for v in &marks.virtual_equilibria {
        svg.dot(*v, 4.0, output::RED);
    }
    if let Some(pe) = marks.pseudoequilibrium {
        svg.dot(pe, 4.0, output::SLIDING_COLOUR);
    }
    if let Some(se) = marks.smooth_equilibrium {
        svg.cross(se, "#000000");
    }
    svg.legend(&[
        (output::PLUS_COLOUR, "k = 1 side"),
        (output::MINUS_COLOUR, "k = 0 side"),
        (output::SLIDING_COLOUR, "sliding / pseudoequilibrium"),
        (output::RED, "virtual equilibria"),
    ]);
    svg.finish()
}

// ----------------------------------------------------------------- sliding

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arc {
    pub kind: BoundaryKind,
    pub from: [f64; 2],
    pub to: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlidingReport {
    pub epsilon: Option<f64>,
    /// Ordered fold abscissae bounding the sliding segment.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    /// `stable`, `unstable`, `collapsed` or `none`.
    pub stability: &'static str,
    pub ds_dlambda: Option<f64>,
    pub tangencies: Vec<TangencyPoint>,
    pub pseudoequilibrium: Option<[f64; 2]>,
    /// The sampled manifold split into maximal arcs of one kind.
    pub arcs: Vec<Arc>,
}

/// Classifies `n` manifold points and merges runs of equal kind.
fn arcs<S: PiecewiseSystem>(sys: &S, points: &[[f64; 2]]) -> Vec<Arc> {
    let mut out: Vec<Arc> = Vec::new();
    for p in points {
        let Ok(c) = classify_boundary(sys, p) else { continue };
        match out.last_mut() {
            Some(a) if a.kind == c.kind => a.to = *p,
            _ => out.push(Arc { kind: c.kind, from: *p, to: *p }),
        }
    }
    out
}

pub fn sliding_report(cfg: &RunConfig) -> Result<SlidingReport, CliError> {
    let n = cfg.sliding.samples;
    match cfg.system {
        SystemKind::WelanderSmooth => {
            Err(CliError::Config("sliding analysis applies to welander-nonsmooth or custom systems".into()))
        }
        SystemKind::WelanderNonsmooth => {
            let p = cfg.params;
            let sys = WelanderFilippov::new(p).map_err(|e| CliError::Config(e.to_string()))?;
            let (xm, xp) = sliding_boundaries(&p).map_err(numerics)?;
            let (lo, hi) = (xm.min(xp), xm.max(xp));
            let mid = [0.5 * (lo + hi), 0.0];
            let ds = filippov::ds_dlambda(&sys, &mid, 0.5);
            let stability = if p.epsilon > 0.0 {
                "stable"
            } else if p.epsilon < 0.0 {
                "unstable"
            } else {
                "collapsed"
            };
            let window = DomainBox::new(vec![lo.min(0.75) - 0.5, -1.0], vec![hi.max(0.75) + 0.5, 1.0]);
            let tangencies = find_tangencies(&sys, &window).map_err(numerics)?;
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|i| [window.lo[0] + (window.hi[0] - window.lo[0]) * i as f64 / (n - 1) as f64, 0.0])
                .collect();
            Ok(SlidingReport {
                epsilon: Some(p.epsilon),
                lo: Some(lo),
                hi: Some(hi),
                stability,
                ds_dlambda: Some(ds),
                tangencies,
                pseudoequilibrium: pseudoequilibrium(&p).map(|(x, _)| [x, 0.0]),
                arcs: arcs(&sys, &pts),
            })
        }
        SystemKind::Custom => {
            let lin = cfg.custom.as_ref().expect("validated");
            let sys = lin.to_system();
            let tangencies = find_tangencies(&sys, &lin.window).map_err(numerics)?;
            let (c, d) = (lin.normal, lin.offset);
            let c2 = c[0] * c[0] + c[1] * c[1];
            let base = [c[0] * d / c2, c[1] * d / c2];
            let dir = [-c[1] / c2.sqrt(), c[0] / c2.sqrt()];
            let w = &lin.window;
            let reach = ((w.hi[0] - w.lo[0]).powi(2) + (w.hi[1] - w.lo[1]).powi(2)).sqrt()
                + base[0].abs()
                + base[1].abs();
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|i| {
                    let u = -reach + 2.0 * reach * i as f64 / (n - 1) as f64;
                    [base[0] + u * dir[0], base[1] + u * dir[1]]
                })
                .filter(|p| w.contains(p))
                .collect();
            let arcs = arcs(&sys, &pts);
            let has = |k| arcs.iter().any(|a| a.kind == k);
            let stability = match (has(BoundaryKind::StableSliding), has(BoundaryKind::UnstableSliding)) {
                (true, false) => "stable",
                (false, true) => "unstable",
                (true, true) => "mixed",
                (false, false) => "none",
            };
            Ok(SlidingReport {
                epsilon: None,
                lo: None,
                hi: None,
                stability,
                ds_dlambda: None,
                tangencies,
                pseudoequilibrium: None,
                arcs,
            })
        }
    }
}

fn kind_name(k: BoundaryKind) -> &'static str {
    match k {
        BoundaryKind::Crossing => "crossing",
        BoundaryKind::StableSliding => "stable_sliding",
        BoundaryKind::UnstableSliding => "unstable_sliding",
        BoundaryKind::Tangency => "tangency",
    }
}

fn sliding(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let r = sliding_report(cfg)?;
    match cfg.output.format {
        Format::Json => Ok(json_bytes(&r)),
        Format::Csv => csv_bytes(
            &["kind", "from_x", "from_y", "to_x", "to_y"],
            r.arcs.iter().map(|a| {
                vec![
                    kind_name(a.kind).to_string(),
                    a.from[0].to_string(),
                    a.from[1].to_string(),
                    a.to[0].to_string(),
                    a.to[1].to_string(),
                ]
            }),
        )
        .map_err(csv_err),
        Format::Svg => {
            let pts = r.arcs.iter().flat_map(|a| [a.from, a.to]).chain(r.tangencies.iter().map(|t| pair(&t.location)));
            let mut frame = Frame::fit(pts);
            if frame.y[1] - frame.y[0] < 0.1 {
                let c = 0.5 * (frame.y[0] + frame.y[1]);
                frame.y = [c - 0.05, c + 0.05];
            }
            let title = match r.epsilon {
                Some(e) => format!("splitting manifold, epsilon = {e} ({})", r.stability),
                None => format!("splitting manifold ({})", r.stability),
            };
            let mut svg = Svg::new(frame, &title, "x", "y");
            for a in &r.arcs {
                let (colour, width, dashed) = match a.kind {
                    BoundaryKind::StableSliding => (output::SLIDING_COLOUR, 4.0, false),
                    BoundaryKind::UnstableSliding => (output::RED, 4.0, true),
                    _ => ("#888888", 1.0, false),
                };
                svg.polyline(&[a.from, a.to], colour, width, dashed);
            }
            for t in &r.tangencies {
                svg.square(pair(&t.location), "#000000");
            }
            if let Some(pe) = r.pseudoequilibrium {
                svg.dot(pe, 4.0, output::SLIDING_COLOUR);
            }
            svg.legend(&[
                (output::SLIDING_COLOUR, "stable sliding"),
                (output::RED, "unstable sliding"),
                ("#888888", "crossing"),
            ]);
            Ok(svg.finish())
        }
    }
}

// ------------------------------------------------------------------ blowup

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub a: f64,
    /// Zero-trace slope of the printed base-point Jacobian.
    pub printed_slope: f64,
    pub printed_eps_star: f64,
    /// Zero-trace slope once the equilibrium shift is included.
    pub equilibrium_slope: f64,
    pub equilibrium_eps_star: f64,
    pub numeric: Option<HopfRecord>,
    pub numeric_error: Option<String>,
    pub coefficients: Vec<CoefficientCheck>,
}

struct GridRow {
    eps: f64,
    trace: f64,
    discriminant: f64,
    numeric: Option<(f64, f64)>,
}

fn blowup_cmd(cfg: &RunConfig, diag: &mut dyn Write) -> Result<Vec<u8>, CliError> {
    require_default_shape(cfg, "blowup analysis")?;
    let a = cfg.params.a;
    if !(a > 0.0) {
        return Err(CliError::Config(format!(
            "blowup needs params.a > 0 (got {a}); a = 0 is the nonsmooth limit, see `sliding` and `simulate`"
        )));
    }
    let exp = local_expansion().map_err(numerics)?;
    let coefficients = exp.verify(1e-6).map_err(numerics)?;
    let [lo, hi] = cfg.blowup.eps_range;
    let n = cfg.blowup.points;
    let rows: Vec<GridRow> = (0..n)
        .map(|i| {
            let eps = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let numeric = equilibrium_spectrum(a, eps).ok().map(|s| {
                let tr = linalg::trace(&s.jacobian);
                (tr, tr * tr - 4.0 * linalg::det(&s.jacobian))
            });
            GridRow { eps, trace: exp.trace(a, eps), discriminant: exp.discriminant(a, eps), numeric }
        })
        .collect();
    let (numeric, numeric_error) = if cfg.blowup.numeric {
        match verify_hopf_numerically(a, cfg.blowup.eps_range, &cfg.blowup.hopf) {
            Ok(r) => (Some(r), None),
            Err(e) => {
                let _ = writeln!(diag, "note: no numeric eigenvalue crossing at a = {a}: {e}");
                (None, Some(e.to_string()))
            }
        }
    } else {
        (None, None)
    };
    let report = BlowupReport {
        a,
        printed_slope: exp.hopf_slope(),
        printed_eps_star: exp.hopf_line(a),
        equilibrium_slope: exp.equilibrium_hopf_slope(),
        equilibrium_eps_star: exp.equilibrium_hopf_slope() * a,
        numeric,
        numeric_error,
        coefficients,
    };
    match cfg.output.format {
        Format::Csv => csv_bytes(
            &["eps", "trace", "discriminant", "numeric_trace", "numeric_discriminant"],
            rows.iter().map(|r| {
                vec![
                    r.eps.to_string(),
                    r.trace.to_string(),
                    r.discriminant.to_string(),
                    opt(r.numeric.map(|v| v.0)),
                    opt(r.numeric.map(|v| v.1)),
                ]
            }),
        )
        .map_err(csv_err),
        Format::Json => Ok(json_bytes(&report)),
        Format::Svg => {
            let trace: Vec<[f64; 2]> = rows.iter().map(|r| [r.eps, r.trace]).collect();
            let disc: Vec<[f64; 2]> = rows.iter().map(|r| [r.eps, r.discriminant]).collect();
            let frame = Frame::fit(trace.iter().chain(&disc).copied());
            let mut svg = Svg::new(frame, &format!("trace and discriminant, a = {a}"), "epsilon", "value");
            svg.line([frame.x[0], 0.0], [frame.x[1], 0.0], "#888888", true);
            svg.polyline(&trace, output::RED, 1.5, false);
            svg.polyline(&disc, output::BLUE, 1.5, false);
            let vertical = |svg: &mut Svg, e: f64, colour: &str, dashed: bool| {
                if e >= frame.x[0] && e <= frame.x[1] {
                    svg.line([e, frame.y[0]], [e, frame.y[1]], colour, dashed);
                }
            };
            vertical(&mut svg, report.printed_eps_star, output::RED, true);
            vertical(&mut svg, report.equilibrium_eps_star, "#555555", true);
            if let Some(r) = &report.numeric {
                vertical(&mut svg, r.eps_star, "#000000", false);
            }
            svg.legend(&[
                (output::RED, "trace"),
                (output::BLUE, "discriminant"),
                ("#555555", "shifted zero-trace line"),
                ("#000000", "numeric crossing"),
            ]);
            Ok(svg.finish())
        }
    }
}

// -------------------------------------------------------------------- scan

pub fn run_scan(cfg: &RunConfig) -> Result<BifurcationDiagram, CliError> {
    require_default_shape(cfg, "scan")?;
    Ok(match cfg.system {
        SystemKind::WelanderSmooth => {
            let a_list = if cfg.scan.a.is_empty() { vec![cfg.params.a] } else { cfg.scan.a.clone() };
            scan_smooth(&a_list, &cfg.scan.eps, &cfg.scan.budget)
        }
        _ => scan_nonsmooth(&cfg.scan.eps, &cfg.scan.budget),
    })
}

fn attractor_colour(a: Attractor) -> &'static str {
    match a {
        Attractor::SlidingAttractor => output::SLIDING_COLOUR,
        Attractor::FocusPoint => "#9467bd",
        Attractor::EquilibriumPoint => output::PLUS_COLOUR,
        Attractor::PeriodicOrbit => output::RED,
        Attractor::None => "#888888",
    }
}

fn scan(cfg: &RunConfig, diag: &mut dyn Write) -> Result<Vec<u8>, CliError> {
    let d = run_scan(cfg)?;
    for p in d.points.iter().filter(|p| p.failure.is_some()) {
        let _ = writeln!(diag, "warning: a = {}, eps = {}: {}", p.a, p.eps, p.failure.as_deref().unwrap_or(""));
    }
    match cfg.output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            d.write_csv(&mut buf).map_err(csv_err)?;
            Ok(buf)
        }
        Format::Json => {
            let mut v = d.summary();
            v["diagram"] = serde_json::to_value(&d).map_err(numerics)?;
            Ok(json_bytes(&v))
        }
        Format::Svg => {
            let smooth = cfg.system == SystemKind::WelanderSmooth;
            let y = |p: &crate::scan::ScanPoint| if smooth { p.a } else { p.orbit_amplitude.unwrap_or(0.0) };
            let frame = Frame::fit(d.points.iter().map(|p| [p.eps, y(p)]));
            let y_label = if smooth { "a" } else { "orbit amplitude" };
            let mut svg = Svg::new(frame, "attractors", "epsilon", y_label);
            for p in &d.points {
                svg.dot([p.eps, y(p)], 4.0, attractor_colour(p.attractor));
            }
            for b in &d.detected_bifurcations {
                let pt = match b.kind {
                    BifurcationKind::SmoothHopf => [b.eps, b.a],
                    BifurcationKind::FusedFocus => [b.eps, if smooth { b.a } else { 0.0 }],
                };
                svg.cross(pt, "#000000");
            }
            svg.legend(&[
                (attractor_colour(Attractor::SlidingAttractor), "sliding attractor"),
                (attractor_colour(Attractor::FocusPoint), "fused focus"),
                (attractor_colour(Attractor::EquilibriumPoint), "equilibrium"),
                (attractor_colour(Attractor::PeriodicOrbit), "periodic orbit"),
                ("#000000", "bifurcation"),
            ]);
            Ok(svg.finish())
        }
    }
}

// ------------------------------------------------------------------ verify

fn verify(cfg: &RunConfig, diag: &mut dyn Write) -> Result<Product, CliError> {
    if cfg.output.format == Format::Svg {
        return Err(unsupported(Command::Verify, Format::Svg));
    }
    let results = acceptance::run_all(cfg.seed, cfg.verify.cases);
    for r in &results {
        let _ = writeln!(diag, "{r}");
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let bytes = match cfg.output.format {
        Format::Json => json_bytes(&results),
        _ => csv_bytes(&["id", "name", "passed", "seconds", "limit_seconds", "detail"], results.iter().map(csv_row))
            .map_err(csv_err)?,
    };
    let failure = (!failed.is_empty()).then(|| CliError::Numerics(format!("criteria {failed:?} failed")));
    Ok(Product { bytes, failure })
}

fn csv_row(r: &CriterionResult) -> Vec<String> {
    vec![
        r.id.to_string(),
        r.name.to_string(),
        r.passed.to_string(),
        format!("{:.3}", r.seconds),
        r.limit_seconds.to_string(),
        r.detail.clone(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    fn cfg(text: &str) -> RunConfig {
        let c = RunConfig::from_toml(text).unwrap();
        c.validate().unwrap();
        c
    }

    #[test]
    fn sliding_report_for_positive_eps() {
        let r = sliding_report(&cfg("[params]\nepsilon = 0.05")).unwrap();
        assert!((r.lo.unwrap() - 0.8125).abs() < 1e-12);
        assert!((r.hi.unwrap() - 0.9375).abs() < 1e-12);
        assert_eq!(r.stability, "stable");
        assert!(r.arcs.iter().any(|a| a.kind == BoundaryKind::StableSliding));
    }

    #[test]
    fn sliding_report_collapses_at_zero() {
        let r = sliding_report(&cfg("")).unwrap();
        assert_eq!(r.stability, "collapsed");
        assert_eq!(r.lo, r.hi);
        assert!(r.arcs.iter().all(|a| a.kind != BoundaryKind::StableSliding && a.kind != BoundaryKind::UnstableSliding));
    }

    #[test]
    fn blowup_rejects_zero_a() {
        let err = execute(Command::Blowup, &cfg(""), &mut Vec::new()).err().unwrap();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn parse_errors_exit_with_config_code() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with(["fusedfocus", "frobnicate"], &no_env, &mut o, &mut e), 1);
        assert_eq!(main_with(["fusedfocus", "sliding", "--format", "png"], &no_env, &mut o, &mut e), 1);
        assert_eq!(main_with(["fusedfocus", "--help"], &no_env, &mut o, &mut e), 0);
    }

    #[test]
    fn stdout_carries_only_data() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = main_with(["fusedfocus", "sliding", "--stdout", "--format", "json"], &no_env, &mut o, &mut e);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_slice(&o).unwrap();
        assert_eq!(v["stability"], "collapsed");
    }
}
