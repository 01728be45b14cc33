use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, SecondsFormat, Utc};
use clap::{Parser, Subcommand, ValueEnum};

use magnocavity::config::{load_config, RunConfig};
use magnocavity::output::{emit_results, Format, OptimumReport, PointReport, SteadyStateReport};
use magnocavity::presets::{preset_from, Resolution, PRESET_NAMES};
use magnocavity::sweep::{
    analyze_point, optimize_entanglement, scan_feedback, scan_temperature, sweep_1d, sweep_2d, OptimizeOptions,
    PointStatus, SweepOptions, SweepResult,
};
use magnocavity::Error;

#[derive(Parser, Debug)]
#[command(
    name = "magnocavity",
    version,
    about = "Steady-state entanglement of a feedback-driven cavity magnomechanical system"
)]
struct Cli {
    /// TOML run configuration; the built-in baseline is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All ten E_N values and the stability margin at the configured point.
    Point,
    /// Line scan from the `[sweep1d]` section.
    Sweep1d,
    /// Map from the `[sweep2d]` section.
    Sweep2d,
    /// Temperature scan from the `[tempscan]` section.
    Tempscan,
    /// Reflectivity/phase map from the `[fbscan]` section.
    Fbscan,
    /// Pattern-search optimum from the `[optimize]` section.
    Optimize,
    /// Runs a named figure preset and writes CSV and JSON.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        preset: String,
        /// Points per axis of 2D maps.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Points of line scans.
        #[arg(long, default_value_t = 401)]
        line: usize,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            e if e.is_config_error() => Failure::Config(e.to_string()),
            Error::Io(e) => Failure::Io(e.to_string()),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn created() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|t| DateTime::from_timestamp(t, 0));
    fixed.unwrap_or_else(Utc::now).to_rfc3339_opts(SecondsFormat::Secs, true)
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    format: Format,
    sweep: SweepOptions,
}

impl Ctx {
    fn new(cli: &Cli) -> Result<Ctx, Failure> {
        let cfg = match &cli.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        let section =
            cfg.output.clone().unwrap_or(magnocavity::config::OutputSection { dir: None, format: None, workers: None });
        let format = match (cli.format, section.format.as_deref()) {
            (Some(FormatArg::Csv), _) => Format::Csv,
            (Some(FormatArg::Json), _) => Format::Json,
            (None, Some(f)) => f.parse().map_err(Failure::Config)?,
            (None, None) => Format::Csv,
        };
        Ok(Ctx {
            out: cli.out.clone().or(section.dir).unwrap_or_else(|| PathBuf::from(".")),
            format,
            sweep: SweepOptions::with_workers(cli.workers.or(section.workers).unwrap_or(0)),
            cfg,
        })
    }

    fn write(&self, stem: &str, format: Format, text: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(format!("{stem}.{}", format.extension()));
        fs::write(&path, text)?;
        Ok(path)
    }

    fn emit(&self, stem: &str, mut result: SweepResult, formats: &[Format]) -> Result<(), Failure> {
        result.provenance.created = Some(created());
        for &f in formats {
            let path = self.out.join(format!("{stem}.{}", f.extension()));
            emit_results(&result, f, &path)?;
            println!("wrote {}", path.display());
        }
        summarize(&result);
        Ok(())
    }
}

fn summarize(result: &SweepResult) {
    let stable = result.count_status(PointStatus::Stable);
    println!(
        "{} points: {stable} stable, {} marginal, {} unstable, {} failed",
        result.points.len(),
        result.count_status(PointStatus::Marginal),
        result.count_status(PointStatus::Unstable),
        result.count_status(PointStatus::Failed),
    );
    for &pair in &result.pairs {
        if let Some((coords, v)) = result.argmax(pair) {
            let at: Vec<String> = coords.iter().map(|x| format!("{x:.4}")).collect();
            println!("  max E_N^{pair} = {v:.6} at ({})", at.join(", "));
        }
    }
}

fn run_point(ctx: &Ctx) -> Result<(), Failure> {
    let (params, steady) = match ctx.cfg.microscopic()? {
        Some((p, ss)) => (p, Some(SteadyStateReport::new(ss, &p))),
        None => (ctx.cfg.params()?, None),
    };
    if let Some(ss) = &steady {
        println!(
            "steady state: converged = {}, G_mb/2π = {:.6e} MHz, Δm_eff/2π = {:.6e} MHz",
            ss.state.converged,
            ss.state.g_mb_out / (2.0e6 * std::f64::consts::PI),
            ss.state.delta_m_eff_out / (2.0e6 * std::f64::consts::PI),
        );
        println!(
            "  low-excitation ratios: G_ce²/(Δe²+γe²) = {:.3e}, |c1s|⁻² = {:.3e}",
            ss.coupling_ratio, ss.inverse_photon_number
        );
    }
    let analysis = analyze_point(&params)?;
    let status = analysis.status;
    println!(
        "status: {status}, max Re λ = {:.6e} rad/s, margin = {:.6e} ω_b",
        analysis.max_real_eig, analysis.stability_margin
    );
    if let Some(m) = analysis.physicality_margin {
        println!("  min eig of C + iΩ/2 = {m:.6e}");
    }
    for r in &analysis.entanglement {
        if let Some(p) = r.pair {
            println!("  E_N^{p:<4} = {:.9}", r.log_negativity);
        }
    }
    let report = PointReport::new(&params, analysis, steady, Some(created()));
    let path = ctx.write("point", ctx.format, &report.render(ctx.format))?;
    println!("wrote {}", path.display());
    if status == PointStatus::Unstable {
        return Err(Failure::Numerical("drift matrix is not stable; no steady state".into()));
    }
    Ok(())
}

fn run_optimize(ctx: &Ctx) -> Result<(), Failure> {
    let req = ctx.cfg.optimize_request()?;
    let base = ctx.cfg.params()?;
    let mut opts = OptimizeOptions { coarse_points: req.coarse_points, sweep: ctx.sweep, ..Default::default() };
    if let Some(s) = req.seeds {
        opts.seeds = s;
    }
    let opt = optimize_entanglement(&base, &req.free, req.mode, req.pair, opts)?;
    let params: Vec<_> = req.free.iter().map(|f| f.param).collect();
    let report = OptimumReport::new(&opt, &params, req.pair, req.mode, Some(created()));
    for c in &report.coords {
        println!("  {} = {:.6} {}", c.param, c.value, c.unit);
    }
    println!("max E_N^{} = {:.9} ({} evaluations)", req.pair, opt.value, opt.evaluations);
    let path = ctx.write("optimize", ctx.format, &report.render(ctx.format))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let ctx = Ctx::new(cli)?;
    let one = [ctx.format];
    match &cli.command {
        Command::Point => run_point(&ctx),
        Command::Sweep1d => {
            let req = ctx.cfg.sweep1d_request()?;
            let r = sweep_1d(&ctx.cfg.params()?, req.axis, req.mode, &req.pairs, ctx.sweep)?;
            ctx.emit("sweep1d", r, &one)
        }
        Command::Sweep2d => {
            let req = ctx.cfg.sweep2d_request()?;
            let r = sweep_2d(&ctx.cfg.params()?, req.x, req.y, req.mode, &req.pairs, ctx.sweep)?;
            ctx.emit("sweep2d", r, &one)
        }
        Command::Tempscan => {
            let req = ctx.cfg.tempscan_request()?;
            let ax = req.axis;
            let r = scan_temperature(&ctx.cfg.params()?, ax.start, ax.stop, ax.count, &req.pairs, ctx.sweep)?;
            ctx.emit("tempscan", r, &one)
        }
        Command::Fbscan => {
            let req = ctx.cfg.fbscan_request()?;
            let r = scan_feedback(&ctx.cfg.params()?, req.x, req.y, &req.pairs, ctx.sweep)?;
            ctx.emit("fbscan", r, &one)
        }
        Command::Optimize => run_optimize(&ctx),
        Command::Figure { preset, grid, line } => {
            let res = Resolution { grid: *grid, line: *line };
            let preset = preset_from(preset, res, &ctx.cfg.params()?)?;
            println!("{preset}");
            for (stem, result) in preset.execute(ctx.sweep)? {
                ctx.emit(&stem, result, &[Format::Csv, Format::Json])?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
