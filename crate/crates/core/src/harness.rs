//! Scenario sweeps, result persistence and plot-data emission.
//!
//! A sweep is the cross product of wave cases, significant heights, tasks,
//! failure variants and replicate seeds. Every cell is run once per
//! controller; both controllers in a cell see the same sea and the same
//! estimate noise. Seeds are derived from the master seed by hashing the
//! cell key, so results never depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::simulator::{
    run_episode_timed, ControllerKind, EpisodeSummary, Failure, Pose, Scenario, SimConfig, StarPath, Task, Trace,
    WaveInput,
};
use crate::waves::{jonswap_density, JonswapSettings, WaveCase};

/// What to run and where to put it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub waves: Vec<WaveCase>,
    /// Significant wave heights (m).
    pub heights: Vec<f64>,
    pub poses: Vec<Pose>,
    /// Also run the star-tracking task.
    pub star: bool,
    pub controllers: Vec<ControllerKind>,
    /// Passive segment per variant (1-based); 0 is fully actuated.
    pub failures: Vec<usize>,
    pub failure_onset: f64,
    /// Replicate seeds.
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub duration: f64,
    pub snr_db: f64,
    pub base_depth: f64,
    pub output: PathBuf,
    pub write_traces: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            waves: WaveCase::ALL.to_vec(),
            heights: WaveCase::height_grid().to_vec(),
            poses: Pose::ALL.to_vec(),
            star: false,
            controllers: vec![ControllerKind::Mpc, ControllerKind::Baseline],
            failures: vec![0],
            failure_onset: 0.0,
            seeds: vec![0],
            master_seed: 0,
            duration: 60.0,
            snr_db: 20.0,
            base_depth: 4.0,
            output: PathBuf::from("out"),
            write_traces: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskSpec {
    Pose(Pose),
    Star,
}

impl TaskSpec {
    pub fn name(self) -> &'static str {
        match self {
            TaskSpec::Pose(p) => p.name(),
            TaskSpec::Star => "star",
        }
    }

    pub fn task(self) -> Task {
        match self {
            TaskSpec::Pose(p) => Task::pose(p),
            TaskSpec::Star => Task::Star(StarPath::default()),
        }
    }
}

/// One point of the sweep grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub id: String,
    pub case: WaveCase,
    pub hs: f64,
    pub task: TaskSpec,
    pub failed_segment: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.waves.is_empty()
            || self.heights.is_empty()
            || (self.poses.is_empty() && !self.star)
            || self.controllers.is_empty()
            || self.failures.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::InvalidParameter("sweep cross product is empty".into()));
        }
        if let Some(h) = self.heights.iter().find(|h| !(**h > 0.0)) {
            return Err(Error::InvalidParameter(format!("significant height must be positive (got {h})")));
        }
        if !(self.duration > 0.0) || !(self.base_depth > 0.0) || !(self.failure_onset >= 0.0) {
            return Err(Error::InvalidParameter(
                "duration and base depth must be positive, failure onset non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn tasks(&self) -> Vec<TaskSpec> {
        let mut out: Vec<TaskSpec> = self.poses.iter().map(|p| TaskSpec::Pose(*p)).collect();
        if self.star {
            out.push(TaskSpec::Star);
        }
        out
    }

    /// Grid cells in row order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &case in &self.waves {
            for &hs in &self.heights {
                for task in self.tasks() {
                    for &failed_segment in &self.failures {
                        for &seed in &self.seeds {
                            let mut id = format!("{}-hs{:.2}-{}", case.name(), hs, task.name());
                            if failed_segment > 0 {
                                id.push_str(&format!("-f{failed_segment}"));
                            }
                            id.push_str(&format!("-s{seed}"));
                            out.push(Cell {
                                id,
                                case,
                                hs,
                                task,
                                failed_segment,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Scenario for one controller in one cell.
    pub fn scenario(&self, cell: &Cell, controller: ControllerKind) -> Scenario {
        let sea_key = format!("sea/{}/{:.4}/{}", cell.case.name(), cell.hs, cell.seed);
        let noise_key = format!("noise/{}", cell.id);
        Scenario {
            id: format!("{}-{}", cell.id, controller.name()),
            wave: WaveInput::case(cell.case, cell.hs, derive_seed(self.master_seed, &sea_key)),
            task: cell.task.task(),
            controller,
            duration: self.duration,
            failure: (cell.failed_segment > 0).then_some(Failure {
                segment: cell.failed_segment,
                onset: self.failure_onset,
            }),
            snr_db: self.snr_db,
            base_depth: self.base_depth,
            seed: derive_seed(self.master_seed, &noise_key),
        }
    }
}

/// Stable 64-bit seed from a master seed and a key.
pub fn derive_seed(master: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(key.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Configuration file: a `[sweep]` section and a `[sim]` section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub sweep: SweepSpec,
    pub sim: SimConfig,
}

impl HarnessConfig {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidParameter(format!("cannot serialize config: {e}")))
    }
}

/// One sweep cell with both controllers' outcomes. Missing controllers
/// and failed episodes leave NaN metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub cell: String,
    pub wave: WaveCase,
    pub peak_period: f64,
    pub hs: f64,
    pub task: String,
    pub failed_segment: usize,
    pub seed: u64,
    pub rmse_mpc: f64,
    pub rmse_baseline: f64,
    pub ratio: f64,
    /// Largest generalized disturbance component seen by either controller (N m).
    pub max_abs_fe: f64,
    pub runtime_mpc: f64,
    pub runtime_baseline: f64,
    pub failed: bool,
    pub error: String,
}

impl ResultRow {
    /// Equal in everything except wall-clock runtimes.
    pub fn same_outcome(&self, other: &ResultRow) -> bool {
        let eq = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.cell == other.cell
            && self.wave == other.wave
            && eq(self.peak_period, other.peak_period)
            && eq(self.hs, other.hs)
            && self.task == other.task
            && self.failed_segment == other.failed_segment
            && self.seed == other.seed
            && eq(self.rmse_mpc, other.rmse_mpc)
            && eq(self.rmse_baseline, other.rmse_baseline)
            && eq(self.ratio, other.ratio)
            && eq(self.max_abs_fe, other.max_abs_fe)
            && self.failed == other.failed
            && self.error == other.error
    }
}

/// Everything a sweep produced.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub episodes: Vec<EpisodeSummary>,
    pub traces: Vec<PathBuf>,
}

impl SweepOutcome {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.failed)
    }
}

struct EpisodeResult {
    summary: Option<EpisodeSummary>,
    trace_path: Option<PathBuf>,
    error: Option<String>,
}

fn run_one(spec: &SweepSpec, config: &SimConfig, cell: &Cell, controller: ControllerKind) -> EpisodeResult {
    let scenario = spec.scenario(cell, controller);
    let outcome = run_episode_timed(&scenario, config).and_then(|(trace, secs)| {
        let summary = EpisodeSummary::from_trace(&scenario, &trace, secs)?;
        let path = if spec.write_traces {
            let p = spec.output.join("traces").join(format!("{}.csv", scenario.id));
            trace.write_csv(&p)?;
            Some(p)
        } else {
            None
        };
        Ok((summary, path))
    });
    match outcome {
        Ok((summary, trace_path)) => EpisodeResult {
            summary: Some(summary),
            trace_path,
            error: None,
        },
        Err(e) => {
            warn!("episode {} failed: {e}", scenario.id);
            EpisodeResult {
                summary: None,
                trace_path: None,
                error: Some(format!("{}: {e}", controller.name())),
            }
        }
    }
}

/// Run every cell of `spec` on `jobs` worker threads and persist results
/// under `spec.output`. Episode failures become failed rows.
pub fn run_sweep(spec: &SweepSpec, config: &SimConfig, jobs: usize) -> Result<SweepOutcome> {
    spec.validate()?;
    config.validate()?;
    fs::create_dir_all(&spec.output)?;
    if spec.write_traces {
        fs::create_dir_all(spec.output.join("traces"))?;
    }
    let cells = spec.cells();
    let work: Vec<(usize, ControllerKind)> = (0..cells.len())
        .flat_map(|i| spec.controllers.iter().map(move |c| (i, *c)))
        .collect();
    info!("sweep: {} cells, {} episodes, {} jobs", cells.len(), work.len(), jobs.max(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    let results: Vec<EpisodeResult> =
        pool.install(|| work.par_iter().map(|(i, c)| run_one(spec, config, &cells[*i], *c)).collect());

    let mut rows = Vec::with_capacity(cells.len());
    let mut episodes = Vec::new();
    let mut traces = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        let mut row = ResultRow {
            cell: cell.id.clone(),
            wave: cell.case,
            peak_period: cell.case.peak_period(),
            hs: cell.hs,
            task: cell.task.name().to_string(),
            failed_segment: cell.failed_segment,
            seed: cell.seed,
            rmse_mpc: f64::NAN,
            rmse_baseline: f64::NAN,
            ratio: f64::NAN,
            max_abs_fe: f64::NAN,
            runtime_mpc: f64::NAN,
            runtime_baseline: f64::NAN,
            failed: false,
            error: String::new(),
        };
        let mut errors = Vec::new();
        for ((_, controller), res) in work.iter().zip(&results).filter(|((j, _), _)| *j == i) {
            if let Some(e) = &res.error {
                errors.push(e.clone());
                continue;
            }
            let s = res.summary.as_ref().expect("successful episode has a summary");
            match controller {
                ControllerKind::Mpc => {
                    row.rmse_mpc = s.rmse;
                    row.runtime_mpc = s.runtime_s;
                }
                ControllerKind::Baseline => {
                    row.rmse_baseline = s.rmse;
                    row.runtime_baseline = s.runtime_s;
                }
            }
            row.max_abs_fe = if row.max_abs_fe.is_nan() { s.max_abs_fe } else { row.max_abs_fe.max(s.max_abs_fe) };
            episodes.push(s.clone());
            traces.extend(res.trace_path.clone());
        }
        if row.rmse_baseline > 0.0 {
            row.ratio = row.rmse_mpc / row.rmse_baseline;
        }
        row.failed = !errors.is_empty();
        row.error = errors.join("; ");
        rows.push(row);
    }
    write_results_csv(&spec.output.join("results.csv"), &rows)?;
    fs::write(spec.output.join("results.json"), serde_json::to_string_pretty(&rows)?)?;
    fs::write(spec.output.join("episodes.json"), serde_json::to_string_pretty(&episodes)?)?;
    Ok(SweepOutcome { rows, episodes, traces })
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_results_json(path: &Path) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn read_episodes_json(path: &Path) -> Result<Vec<EpisodeSummary>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Figure families that plot data can be emitted for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureClass {
    /// JONSWAP curves per wave case.
    Spectra,
    /// Tip positions, torques, disturbances and elevation over one episode.
    Evolution,
    /// MPC to baseline RMSE ratio per cell.
    Ratio,
    /// Actuated versus failed RMSE.
    Failure,
    /// Reference and achieved star paths.
    Star,
}

impl FigureClass {
    pub const ALL: [FigureClass; 5] = [
        FigureClass::Spectra,
        FigureClass::Evolution,
        FigureClass::Ratio,
        FigureClass::Failure,
        FigureClass::Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureClass::Spectra => "spectra",
            FigureClass::Evolution => "evolution",
            FigureClass::Ratio => "ratio",
            FigureClass::Failure => "failure",
            FigureClass::Star => "star",
        }
    }
}

impl FromStr for FigureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureClass::ALL
            .into_iter()
            .find(|c| c.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownFigureClass(s.to_string()))
    }
}

/// Source data for plot emission.
#[derive(Clone, Copy, Debug)]
pub enum PlotInput<'a> {
    Spectra {
        cases: &'a [(WaveCase, f64)],
        settings: &'a JonswapSettings,
    },
    Results(&'a [ResultRow]),
    Trace(&'a Trace),
}

/// Tidy long-format record shared by every plot file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRecord {
    pub group: String,
    pub series: String,
    pub x: f64,
    pub y: f64,
}

impl PlotRecord {
    fn new(group: impl Into<String>, series: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            group: group.into(),
            series: series.into(),
            x,
            y,
        }
    }
}

const SPECTRUM_POINTS: usize = 400;

fn spectra_records(cases: &[(WaveCase, f64)], settings: &JonswapSettings) -> Vec<PlotRecord> {
    let mut out = Vec::new();
    for (case, hs) in cases {
        let wp = 2.0 * std::f64::consts::PI / case.peak_period();
        let (lo, hi) = (settings.band.0 * wp, settings.band.1 * wp);
        let group = format!("{} Hs{hs:.1}", case.name());
        for i in 0..SPECTRUM_POINTS {
            let w = lo + (hi - lo) * i as f64 / (SPECTRUM_POINTS - 1) as f64;
            out.push(PlotRecord::new(
                group.clone(),
                "S",
                w,
                jonswap_density(w, *hs, case.peak_period(), settings.gamma),
            ));
        }
    }
    out
}

fn evolution_records(trace: &Trace) -> Vec<PlotRecord> {
    let mut out = Vec::new();
    for r in &trace.rows {
        for (i, p) in r.tips.iter().enumerate() {
            out.push(PlotRecord::new("tip", format!("tip{}x", i + 1), r.t, p[0]));
            out.push(PlotRecord::new("tip", format!("tip{}z", i + 1), r.t, p[1]));
        }
        for (i, v) in r.tau.iter().enumerate() {
            out.push(PlotRecord::new("tau", format!("tau{}", i + 1), r.t, *v));
        }
        for (i, v) in r.fe.iter().enumerate() {
            out.push(PlotRecord::new("fe", format!("fe{}", i + 1), r.t, *v));
        }
        out.push(PlotRecord::new("zeta", "zeta", r.t, r.zeta));
    }
    out
}

fn failure_tag(seg: usize) -> String {
    if seg == 0 {
        "actuated".into()
    } else {
        format!("seg{seg}-passive")
    }
}

/// Seed-averaged ratio per (wave, failure, task, Hs).
fn ratio_records(rows: &[ResultRow]) -> Vec<PlotRecord> {
    let mut out: Vec<(PlotRecord, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.ratio.is_finite()) {
        let group = format!("{} {}", r.wave.name(), failure_tag(r.failed_segment));
        match out
            .iter_mut()
            .find(|(p, _)| p.group == group && p.series == r.task && p.x == r.hs)
        {
            Some((p, n)) => {
                p.y += r.ratio;
                *n += 1;
            }
            None => out.push((PlotRecord::new(group, r.task.clone(), r.hs, r.ratio), 1)),
        }
    }
    out.into_iter()
        .map(|(mut p, n)| {
            p.y /= n as f64;
            p
        })
        .collect()
}

fn failure_records(rows: &[ResultRow]) -> Vec<PlotRecord> {
    let mut out = Vec::new();
    for r in rows {
        let group = format!("{} Hs{:.1} {}", r.wave.name(), r.hs, r.task);
        let tag = failure_tag(r.failed_segment);
        for (ctrl, v) in [("mpc", r.rmse_mpc), ("baseline", r.rmse_baseline)] {
            if v.is_finite() {
                out.push(PlotRecord::new(group.clone(), format!("{ctrl} {tag}"), r.hs, v));
            }
        }
    }
    out
}

fn star_records(trace: &Trace) -> Vec<PlotRecord> {
    let mut out: Vec<PlotRecord> = trace
        .rows
        .iter()
        .map(|r| PlotRecord::new("reference", "path", r.reference[0], r.reference[1]))
        .collect();
    out.extend(trace.rows.iter().map(|r| {
        let p = r.end_effector();
        PlotRecord::new("actual", "path", p.x, p.y)
    }));
    out
}

/// Write the plot file for `class` into `dir` and return its path.
pub fn emit_plot_data(class: FigureClass, input: PlotInput<'_>, dir: &Path) -> Result<PathBuf> {
    let records = match (class, input) {
        (FigureClass::Spectra, PlotInput::Spectra { cases, settings }) => spectra_records(cases, settings),
        (FigureClass::Evolution, PlotInput::Trace(t)) => evolution_records(t),
        (FigureClass::Star, PlotInput::Trace(t)) => star_records(t),
        (FigureClass::Ratio, PlotInput::Results(r)) => ratio_records(r),
        (FigureClass::Failure, PlotInput::Results(r)) => failure_records(r),
        (class, _) => {
            return Err(Error::InvalidParameter(format!(
                "figure class `{}` needs different input data",
                class.name()
            )))
        }
    };
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("plot_{}.csv", class.name()));
    let mut w = csv::Writer::from_path(&path)?;
    for r in &records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn read_plot_data(path: &Path) -> Result<Vec<PlotRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
