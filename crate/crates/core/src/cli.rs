//! `radial-lab` command line.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails or
//! a computation errors, 2 for unusable input (flags, config, point files).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::contraction::{ContractionMap, DirectionPolicy};
use crate::convexity::{
    contraction_threshold, geodesic_deviation_with, inner_convex_set, is_geodesically_convex,
    is_p_lambda_convex, is_star_shaped, is_totally_p_convex, Region, DEFAULT_PROBE_RADIUS,
};
use crate::error::{Error, Result};
use crate::experiments::{
    self, run_counterexample_sphere, scenes::grid_step, ExperimentConfig, OutputFormat, SuiteResult,
};
use crate::io::{format_points, points_csv, read_points, write_atomic};
use crate::manifold::{Manifold, Point};
use crate::par::Execution;

#[derive(Debug, Parser)]
#[command(
    name = "radial-lab",
    version,
    about = "Radial contraction and p^λ-convexity experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `euclidean:N`, `sphere:N`, `hyperbolic:N` or `chart:sphere2`.
    #[arg(long, global = true)]
    manifold: Option<String>,
    /// Region spec; repeat to take the union.
    #[arg(long, global = true)]
    region: Vec<String>,
    /// Base point coordinates.
    #[arg(long, global = true, num_args = 1.., allow_negative_numbers = true)]
    p: Option<Vec<f64>>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// λ values in (0, 1].
    #[arg(long, global = true, num_args = 1..)]
    grid: Option<Vec<f64>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    pairs: Option<usize>,
    #[arg(long = "t-steps", global = true)]
    t_steps: Option<usize>,
    /// Write the main output here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Svg => OutputFormat::Svg,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PredicateArg {
    Geodesic,
    PLambda,
    Total,
    Star,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Expect {
    Holds,
    Refuted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Kernel,
    Propositions,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Contract a point, a point file or a curve toward `--p`.
    Contract {
        #[arg(long, num_args = 1.., allow_negative_numbers = true, conflicts_with = "points")]
        point: Option<Vec<f64>>,
        /// One point per line.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Run one convexity predicate on the region.
    Check {
        #[arg(value_enum)]
        predicate: PredicateArg,
        /// Verdict that counts as passing.
        #[arg(long, value_enum, default_value = "holds")]
        expect: Expect,
    },
    /// Deviation of a curve (optionally contracted toward `--p`) from the
    /// geodesic between its endpoints.
    Deviation {
        #[arg(long)]
        points: PathBuf,
        /// Fail unless the deviation is below this.
        #[arg(long)]
        below: Option<f64>,
        /// Fail unless the deviation exceeds this.
        #[arg(long)]
        above: Option<f64>,
    },
    /// Estimate the contraction threshold of the region about `--p`.
    Threshold {
        #[arg(long, default_value_t = DEFAULT_PROBE_RADIUS)]
        probe_radius: f64,
        /// Fail unless the estimate is within one grid step of this.
        #[arg(long)]
        expect_zeta: Option<f64>,
    },
    /// Sample the union of geodesics between contracted points of a file.
    InnerSet {
        #[arg(long)]
        points: PathBuf,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
    /// Run a bundled scene by name.
    Scene { name: String },
}

enum Failure {
    Usage(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::Parse(_)
            | Error::Io(_)
            | Error::InvalidPoint(_)
            | Error::InvalidTangent(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidLambda(_)
            | Error::NotInterior { .. }
            | Error::BaseNotInRegion => Failure::Usage(e),
            _ => Failure::Runtime(e),
        }
    }
}

struct Ctx {
    config: ExperimentConfig,
    base_dir: Option<PathBuf>,
    format_given: bool,
}

impl Ctx {
    fn manifold(&self) -> Result<Manifold> {
        self.config
            .manifold
            .as_deref()
            .ok_or_else(|| Error::Parse("--manifold is required".into()))?
            .parse()
    }

    fn base(&self, m: &Manifold) -> Result<Point> {
        let p = self
            .config
            .p
            .clone()
            .ok_or_else(|| Error::Parse("--p is required".into()))?;
        m.point(p)
    }

    fn region(&self, m: &Manifold) -> Result<Region> {
        let parts = self
            .config
            .regions
            .iter()
            .map(|s| Region::parse(s, m, self.base_dir.as_deref()))
            .collect::<Result<Vec<_>>>()?;
        match parts.len() {
            0 => Err(Error::Parse("--region is required".into())),
            1 => Ok(parts.into_iter().next().unwrap()),
            _ => Region::union(parts),
        }
    }

    fn points(&self, m: &Manifold, path: &Path) -> Result<Vec<Point>> {
        read_points(path)?
            .into_iter()
            .enumerate()
            .map(|(i, p)| m.validate(&p).map(|_| p).map_err(|e| Error::at(i, e)))
            .collect()
    }
}

fn build_config(common: &Common) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    let (mut config, base_dir) = match &common.config {
        Some(path) => (
            ExperimentConfig::from_file(path)?,
            path.parent().map(Path::to_path_buf),
        ),
        None => (ExperimentConfig::default(), None),
    };
    if let Some(m) = &common.manifold {
        config.manifold = Some(m.clone());
    }
    config.regions.extend(common.region.iter().cloned());
    if let Some(p) = &common.p {
        config.p = Some(p.clone());
    }
    if let Some(l) = common.lambda {
        config.lambda = l;
    }
    if let Some(g) = &common.grid {
        config.lambda_grid = g.clone();
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(n) = common.pairs {
        config.n_pairs = n;
    }
    if let Some(t) = common.t_steps {
        config.t_steps = t;
    }
    if let Some(o) = &common.out {
        config.out = Some(o.clone());
    }
    if let Some(f) = common.format {
        config.format = f.into();
    }
    if common.sequential {
        config.execution = Execution::Sequential;
    }
    Ok((config, base_dir))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{}", e.render());
            if !e.use_stderr() {
                let _ = write!(stdout, "{}", e.render());
            }
            return code;
        }
    };
    let ctx = match build_config(&cli.common) {
        Ok((config, base_dir)) => Ctx {
            config,
            base_dir,
            format_given: cli.common.format.is_some(),
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    match dispatch(&cli.command, &ctx, stdout, stderr) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn emit(ctx: &Ctx, stdout: &mut dyn Write, body: &str) -> Result<()> {
    match &ctx.config.out {
        Some(path) => write_atomic(path, body.as_bytes()),
        None => stdout.write_all(body.as_bytes()).map_err(Error::from),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn emit_points(ctx: &Ctx, stdout: &mut dyn Write, points: &[Point], label: &str) -> Result<()> {
    let body = match (ctx.format_given, ctx.config.format) {
        (true, OutputFormat::Json) => json(&points),
        (true, OutputFormat::Csv) => points_csv(points.iter().map(|p| (p, label))),
        (true, OutputFormat::Svg) => {
            return Err(Error::Parse(
                "svg output is only available for `scene example1`".into(),
            ))
        }
        (false, _) => format_points(points),
    };
    emit(ctx, stdout, &body)
}

fn emit_suite(
    ctx: &Ctx,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    suite: &SuiteResult,
) -> Result<()> {
    emit(ctx, stdout, &suite.to_json())?;
    let _ = write!(stderr, "{}", suite.summary());
    Ok(())
}

fn dispatch(
    cmd: &Command,
    ctx: &Ctx,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<bool, Failure> {
    let cfg = &ctx.config;
    match cmd {
        Command::Contract { point, points } => {
            let m = ctx.manifold()?;
            let c = ContractionMap::canonical(m.clone(), ctx.base(&m)?, cfg.lambda)?;
            let input = match (point, points) {
                (Some(x), _) => vec![m.point(x.clone())?],
                (None, Some(path)) => ctx.points(&m, path)?,
                (None, None) => return Err(Error::Parse("give --point or --points".into()).into()),
            };
            let out = c
                .contract_set_with(cfg.execution, &input)
                .map_err(Failure::Runtime)?;
            emit_points(ctx, stdout, &out, "contracted")?;
            Ok(true)
        }
        Command::Check { predicate, expect } => {
            let m = ctx.manifold()?;
            let region = ctx.region(&m)?;
            let sampling = cfg.sampling();
            let policy = DirectionPolicy::Canonical;
            let (holds, body) = match predicate {
                PredicateArg::Geodesic => {
                    let r = is_geodesically_convex(&region, &sampling).map_err(Failure::Runtime)?;
                    (r.holds(), json(&r))
                }
                PredicateArg::PLambda => {
                    let c = ContractionMap::canonical(m.clone(), ctx.base(&m)?, cfg.lambda)?;
                    let r = is_p_lambda_convex(&region, &c, &sampling).map_err(Failure::Runtime)?;
                    (r.holds(), json(&r))
                }
                PredicateArg::Total => {
                    let r = is_totally_p_convex(
                        &region,
                        &ctx.base(&m)?,
                        &policy,
                        &cfg.lambda_grid,
                        &sampling,
                    )
                    .map_err(Failure::from)?;
                    (r.verdict.holds(), json(&r))
                }
                PredicateArg::Star => {
                    let r = is_star_shaped(&region, &ctx.base(&m)?, &policy, &sampling)?;
                    (r.holds(), json(&r))
                }
            };
            emit(ctx, stdout, &body)?;
            let _ = writeln!(
                stderr,
                "verdict: {}",
                if holds { "holds on samples" } else { "refuted" }
            );
            Ok(matches!(
                (expect, holds),
                (Expect::Holds, true) | (Expect::Refuted, false)
            ))
        }
        Command::Deviation {
            points,
            below,
            above,
        } => {
            let m = ctx.manifold()?;
            let mut curve = ctx.points(&m, points)?;
            if cfg.p.is_some() {
                let c = ContractionMap::canonical(m.clone(), ctx.base(&m)?, cfg.lambda)?;
                curve = c.contract_curve(&curve).map_err(Failure::Runtime)?;
            }
            let dev = geodesic_deviation_with(cfg.execution, &m, &curve, cfg.t_steps)
                .map_err(Failure::Runtime)?;
            let ok = below.is_none_or(|b| dev < b) && above.is_none_or(|a| dev > a);
            emit(
                ctx,
                stdout,
                &json(
                    &serde_json::json!({ "deviation": dev, "t_steps": cfg.t_steps, "samples": curve.len() }),
                ),
            )?;
            let _ = writeln!(stderr, "deviation: {dev:.6e}");
            Ok(ok)
        }
        Command::Threshold {
            probe_radius,
            expect_zeta,
        } => {
            let m = ctx.manifold()?;
            let region = ctx.region(&m)?;
            let rep = contraction_threshold(
                &region,
                &ctx.base(&m)?,
                &DirectionPolicy::Canonical,
                &cfg.lambda_grid,
                &cfg.sampling(),
                *probe_radius,
            )?;
            emit(ctx, stdout, &json(&rep))?;
            let _ = writeln!(stderr, "zeta_hat: {:?}", rep.zeta_hat);
            Ok(expect_zeta.is_none_or(|z| {
                rep.zeta_hat
                    .is_some_and(|got| (got - z).abs() <= grid_step(&cfg.lambda_grid) + 1e-12)
            }))
        }
        Command::InnerSet { points } => {
            let m = ctx.manifold()?;
            let c = ContractionMap::canonical(m.clone(), ctx.base(&m)?, cfg.lambda)?;
            let input = ctx.points(&m, points)?;
            let out = inner_convex_set(&input, &c, cfg.t_steps).map_err(Failure::Runtime)?;
            emit_points(ctx, stdout, &out, "inner")?;
            Ok(true)
        }
        Command::Verify { suite } => {
            let result = match suite {
                SuiteArg::All => experiments::run_verification(cfg),
                SuiteArg::Kernel => experiments::run_kernel_suite(cfg),
                SuiteArg::Propositions => experiments::run_proposition_suite(cfg),
            };
            emit_suite(ctx, stdout, stderr, &result)?;
            Ok(result.passed)
        }
        Command::Scene { name } => {
            if name == "example1" && cfg.format != OutputFormat::Json {
                let outcome = run_counterexample_sphere(cfg);
                let body = match cfg.format {
                    OutputFormat::Csv => outcome.csv.clone(),
                    _ => outcome.svg.clone(),
                };
                emit(ctx, stdout, &body)?;
                let _ = write!(stderr, "{}", outcome.result.summary());
                return Ok(outcome.result.passed);
            }
            if ctx.format_given && cfg.format != OutputFormat::Json {
                return Err(Error::Parse(format!("scene `{name}` only produces json")).into());
            }
            let result = experiments::run_scene(name, cfg)?;
            emit_suite(ctx, stdout, stderr, &result)?;
            Ok(result.passed)
        }
    }
}
