use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;
use wavearm::harness::{
    emit_plot_data, read_results_csv, run_sweep, FigureClass, HarnessConfig, PlotInput, SweepOutcome,
};
use wavearm::simulator::{ControllerKind, Pose, Trace};
use wavearm::waves::WaveCase;
use wavearm::Error;

/// Run wave-disturbed soft-arm episodes and sweeps, or emit plot data.
#[derive(Parser, Debug)]
#[command(name = "wavearm", version)]
struct Cli {
    /// TOML file with `[sweep]` and `[sim]` sections.
    #[arg(long, visible_alias = "config", value_name = "FILE")]
    sweep: Option<PathBuf>,
    /// Wave cases, comma separated (W1, W2, W3).
    #[arg(long, value_delimiter = ',')]
    wave: Vec<WaveCase>,
    /// Significant heights in metres, comma separated.
    #[arg(long, value_delimiter = ',')]
    hs: Vec<f64>,
    /// Target poses (P1..P6) or `star`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pose: Vec<String>,
    /// `mpc`, `baseline` or `both`.
    #[arg(long)]
    controller: Option<String>,
    /// Passive segment (1-based); 0 keeps the arm fully actuated.
    #[arg(long, value_delimiter = ',')]
    failure: Vec<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Episode length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Emit plot data for a figure class instead of running
    /// (spectra, evolution, ratio, failure, star).
    #[arg(long, value_name = "CLASS")]
    plot: Option<String>,
    /// Trace CSV for the `evolution` and `star` classes.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

enum Failure {
    Usage(Error),
    Run(Error),
}

fn configure(cli: &Cli) -> Result<HarnessConfig, Error> {
    let mut cfg = match &cli.sweep {
        Some(path) => HarnessConfig::load(path)?,
        None => HarnessConfig::default(),
    };
    let s = &mut cfg.sweep;
    if !cli.wave.is_empty() {
        s.waves = cli.wave.clone();
    }
    if !cli.hs.is_empty() {
        s.heights = cli.hs.clone();
    }
    if !cli.pose.is_empty() {
        s.star = cli.pose.iter().any(|p| p.eq_ignore_ascii_case("star"));
        s.poses = cli
            .pose
            .iter()
            .filter(|p| !p.eq_ignore_ascii_case("star"))
            .map(|p| p.parse::<Pose>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(c) = &cli.controller {
        s.controllers = if c.eq_ignore_ascii_case("both") {
            vec![ControllerKind::Mpc, ControllerKind::Baseline]
        } else {
            vec![c.parse()?]
        };
    }
    if !cli.failure.is_empty() {
        s.failures = cli.failure.clone();
    }
    if let Some(seed) = cli.seed {
        s.master_seed = seed;
    }
    if let Some(d) = cli.duration {
        s.duration = d;
    }
    if let Some(out) = &cli.out {
        s.output = out.clone();
    }
    s.validate()?;
    cfg.sim.validate()?;
    Ok(cfg)
}

fn plot(cli: &Cli, cfg: &HarnessConfig, class: &str) -> Result<PathBuf, Failure> {
    let class: FigureClass = class.parse().map_err(Failure::Usage)?;
    let dir = &cfg.sweep.output;
    match class {
        FigureClass::Spectra => {
            let cases: Vec<(WaveCase, f64)> = cfg
                .sweep
                .waves
                .iter()
                .flat_map(|w| cfg.sweep.heights.iter().map(move |h| (*w, *h)))
                .collect();
            let input = PlotInput::Spectra {
                cases: &cases,
                settings: &cfg.sim.jonswap,
            };
            emit_plot_data(class, input, dir).map_err(Failure::Run)
        }
        FigureClass::Evolution | FigureClass::Star => {
            let path = cli.trace.as_ref().ok_or_else(|| {
                Failure::Usage(Error::InvalidParameter(format!("--plot {} needs --trace", class.name())))
            })?;
            let trace = Trace::read_csv(path).map_err(Failure::Run)?;
            emit_plot_data(class, PlotInput::Trace(&trace), dir).map_err(Failure::Run)
        }
        FigureClass::Ratio | FigureClass::Failure => {
            let rows = read_results_csv(&dir.join("results.csv")).map_err(Failure::Run)?;
            emit_plot_data(class, PlotInput::Results(&rows), dir).map_err(Failure::Run)
        }
    }
}

fn report(out: &SweepOutcome) {
    println!(
        "{:<28} {:>10} {:>10} {:>8} {:>9}  status",
        "cell", "rmse_mpc", "rmse_pd", "ratio", "max|F_E|"
    );
    for r in &out.rows {
        println!(
            "{:<28} {:>10.5} {:>10.5} {:>8.4} {:>9.4}  {}",
            r.cell,
            r.rmse_mpc,
            r.rmse_baseline,
            r.ratio,
            r.max_abs_fe,
            if r.failed { r.error.as_str() } else { "ok" }
        );
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = match configure(&cli) {
        Ok(c) => c,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(class) = &cli.plot {
        return match plot(&cli, &cfg, class) {
            Ok(path) => {
                println!("{}", path.display());
                ExitCode::SUCCESS
            }
            Err(Failure::Usage(e)) => {
                error!("{e}");
                ExitCode::from(2)
            }
            Err(Failure::Run(e)) => {
                error!("{e}");
                ExitCode::from(1)
            }
        };
    }
    match run_sweep(&cfg.sweep, &cfg.sim, cli.jobs) {
        Ok(out) => {
            report(&out);
            if out.any_failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}
