//! Episode engine: plant integration under either controller, disturbance
//! estimate corruption, actuation failures and trace recording.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use nalgebra::{DVector, Vector2};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::control::{
    disturbance_forecast, feedforward_pd, kinematic_plan_step, mpc_solve, shift_warm_start, CommandBounds, ControlCommand,
    GainSet, InnerLoop, MpcProblem, MpcSettings,
};
use crate::dynamics::GeneralizedForce;
use crate::error::{Error, Result};
use crate::kinematics::{damped_pseudo_inverse, segment_tips, Configuration};
use crate::model::{ArmModel, Loading};
use crate::ode::{Dopri5, Tolerances};
use crate::waves::{synthesize_jonswap, JonswapSettings, SeaState, WaveCase};

/// Set-point poses, world frame (m).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pose {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
}

impl Pose {
    pub const ALL: [Pose; 6] = [Pose::P1, Pose::P2, Pose::P3, Pose::P4, Pose::P5, Pose::P6];

    pub fn target(self) -> Vector2<f64> {
        let (x, z) = match self {
            Pose::P1 => (0.3, -3.7),
            Pose::P2 => (0.5, -3.7),
            Pose::P3 => (0.7, -3.7),
            Pose::P4 => (0.3, -4.3),
            Pose::P5 => (0.5, -4.3),
            Pose::P6 => (0.7, -4.3),
        };
        Vector2::new(x, z)
    }

    pub fn name(self) -> &'static str {
        ["P1", "P2", "P3", "P4", "P5", "P6"][self as usize]
    }
}

impl FromStr for Pose {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pose::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown pose `{s}`")))
    }
}

impl std::fmt::Display for Pose {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Five-pointed star traced at constant speed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StarPath {
    pub center: [f64; 2],
    pub outer_radius: f64,
}

impl Default for StarPath {
    fn default() -> Self {
        Self {
            center: [0.45, -4.0],
            outer_radius: 0.25,
        }
    }
}

pub const STAR_INNER_RATIO: f64 = 0.382;

impl StarPath {
    /// The ten corners, alternating outer and inner, starting at the top.
    pub fn vertices(&self) -> Vec<Vector2<f64>> {
        (0..10)
            .map(|i| {
                let r = if i % 2 == 0 {
                    self.outer_radius
                } else {
                    STAR_INNER_RATIO * self.outer_radius
                };
                let a = std::f64::consts::FRAC_PI_2 - i as f64 * std::f64::consts::PI / 5.0;
                Vector2::new(self.center[0] + r * a.cos(), self.center[1] + r * a.sin())
            })
            .collect()
    }

    pub fn at(&self, t: f64, duration: f64) -> Vector2<f64> {
        star_trajectory(t, Vector2::new(self.center[0], self.center[1]), self.outer_radius, duration)
    }
}

/// Point on the star path at time `t`; one lap per `duration`.
pub fn star_trajectory(t: f64, center: Vector2<f64>, outer_radius: f64, duration: f64) -> Vector2<f64> {
    let star = StarPath {
        center: [center.x, center.y],
        outer_radius,
    };
    let v = star.vertices();
    // All edges have equal length, so constant speed is uniform per edge.
    let s = (t / duration).rem_euclid(1.0) * v.len() as f64;
    let i = (s.floor() as usize).min(v.len() - 1);
    let frac = s - i as f64;
    v[i] + (v[(i + 1) % v.len()] - v[i]) * frac
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveInput {
    Calm,
    Jonswap {
        peak_period: f64,
        significant_height: f64,
        seed: u64,
    },
    /// Two-column `omega,S` spectrum file.
    Spectrum { path: PathBuf, seed: u64 },
}

impl WaveInput {
    pub fn case(case: WaveCase, hs: f64, seed: u64) -> Self {
        WaveInput::Jonswap {
            peak_period: case.peak_period(),
            significant_height: hs,
            seed,
        }
    }

    pub fn build(&self, settings: &JonswapSettings) -> Result<SeaState> {
        match self {
            WaveInput::Calm => Ok(SeaState::calm(settings.depth)),
            WaveInput::Jonswap {
                peak_period,
                significant_height,
                seed,
            } => synthesize_jonswap(*significant_height, *peak_period, settings, *seed),
            WaveInput::Spectrum { path, seed } => SeaState::from_spectrum_file(path, settings.depth, *seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    SetPoint { target: [f64; 2] },
    Star(StarPath),
}

impl Task {
    pub fn pose(p: Pose) -> Self {
        let t = p.target();
        Task::SetPoint { target: [t.x, t.y] }
    }

    pub fn reference(&self, t: f64, duration: f64) -> Vector2<f64> {
        match self {
            Task::SetPoint { target } => Vector2::new(target[0], target[1]),
            Task::Star(star) => star.at(t, duration),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Mpc,
    Baseline,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Mpc => "mpc",
            ControllerKind::Baseline => "baseline",
        }
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpc" => Ok(ControllerKind::Mpc),
            "baseline" | "pd" => Ok(ControllerKind::Baseline),
            _ => Err(Error::InvalidParameter(format!("unknown controller `{s}`"))),
        }
    }
}

/// Passive segment (1-based) from `onset` seconds on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub segment: usize,
    #[serde(default)]
    pub onset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub wave: WaveInput,
    pub task: Task,
    pub controller: ControllerKind,
    pub duration: f64,
    pub failure: Option<Failure>,
    /// Signal-to-noise ratio of the disturbance estimate (dB).
    pub snr_db: f64,
    /// Mount depth below the still-water line (m).
    pub base_depth: f64,
    /// Seed of the estimate noise.
    pub seed: u64,
}

impl Scenario {
    pub fn new(id: impl Into<String>, wave: WaveInput, task: Task, controller: ControllerKind) -> Self {
        Self {
            id: id.into(),
            wave,
            task,
            controller,
            duration: 60.0,
            failure: None,
            snr_db: 20.0,
            base_depth: 4.0,
            seed: 0,
        }
    }

    pub fn validate(&self, segments: usize) -> Result<()> {
        if !(self.duration > 0.0) || self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter("duration must be positive and snr_db defined".into()));
        }
        if !(self.base_depth > 0.0) {
            return Err(Error::InvalidParameter("base depth must be positive".into()));
        }
        if let Some(f) = self.failure {
            if f.segment == 0 || f.segment > segments {
                return Err(Error::SegmentOutOfRange {
                    index: f.segment,
                    segments,
                });
            }
        }
        Ok(())
    }

    /// Actuation mask in force at time `t`.
    pub fn mask_at(&self, t: f64, segments: usize) -> Vec<bool> {
        (0..segments)
            .map(|i| match self.failure {
                Some(f) => !(f.segment == i + 1 && t >= f.onset),
                None => true,
            })
            .collect()
    }
}

/// Everything an episode needs besides the scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub model: ArmModel,
    pub gains: GainSet,
    pub mpc: MpcSettings,
    pub jonswap: JonswapSettings,
    /// Relative tolerance of the plant integrator.
    pub plant_rtol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            model: ArmModel::default(),
            gains: GainSet::default(),
            mpc: MpcSettings::default(),
            jonswap: JonswapSettings::default(),
            plant_rtol: 1e-8,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.model.segments();
        self.model.validate()?;
        self.gains.validate(n)?;
        self.mpc.validate(n)?;
        if !(self.plant_rtol > 0.0) {
            return Err(Error::InvalidParameter("plant_rtol must be positive".into()));
        }
        Ok(())
    }
}

/// One control tick of an episode.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    /// Tip of every segment, base to end effector.
    pub tips: Vec<[f64; 2]>,
    pub tau: Vec<f64>,
    /// True generalized disturbance.
    pub fe: Vec<f64>,
    /// Disturbance the controller assumed for this tick.
    pub forecast: Vec<f64>,
    /// Surface elevation above the mount.
    pub zeta: f64,
    pub reference: [f64; 2],
    pub cost: f64,
    pub iterations: usize,
    pub capped: bool,
}

impl TraceRow {
    pub fn end_effector(&self) -> Vector2<f64> {
        let p = self.tips.last().copied().unwrap_or([0.0, 0.0]);
        Vector2::new(p[0], p[1])
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Trace {
    pub segments: usize,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn reference(&self) -> Vec<Vector2<f64>> {
        self.rows.iter().map(|r| Vector2::new(r.reference[0], r.reference[1])).collect()
    }

    pub fn header(segments: usize) -> Vec<String> {
        let idx = |p: &'static str| (1..=segments).map(move |i| format!("{p}{i}"));
        let mut h = vec!["t".to_string()];
        h.extend(idx("q"));
        h.extend(idx("qd"));
        for i in 1..=segments {
            h.push(format!("tip{i}x"));
            h.push(format!("tip{i}z"));
        }
        h.extend(idx("tau"));
        h.extend(idx("fe"));
        h.push("zeta".into());
        h.extend(idx("fc"));
        h.extend(["xr", "zr", "cost", "iters", "capped"].map(String::from));
        h
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(Self::header(self.segments))?;
        for r in &self.rows {
            let mut rec: Vec<String> = vec![r.t.to_string()];
            rec.extend(r.q.iter().chain(&r.qdot).map(f64::to_string));
            rec.extend(r.tips.iter().flat_map(|p| [p[0].to_string(), p[1].to_string()]));
            rec.extend(r.tau.iter().chain(&r.fe).map(f64::to_string));
            rec.push(r.zeta.to_string());
            rec.extend(r.forecast.iter().map(f64::to_string));
            rec.extend([r.reference[0], r.reference[1], r.cost].map(|v| v.to_string()));
            rec.push(r.iterations.to_string());
            rec.push(u8::from(r.capped).to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        let segments = header.iter().filter(|h| h.starts_with("tau")).count();
        if header.iter().map(String::from).collect::<Vec<_>>() != Self::header(segments) {
            return Err(parse_err("unexpected trace header".into()));
        }
        let n = segments;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| parse_err(format!("`{s}`: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != header.len() {
                return Err(parse_err(format!("row has {} fields", v.len())));
            }
            let mut at = 0;
            let mut take = |k: usize| {
                at += k;
                v[at - k..at].to_vec()
            };
            let t = take(1)[0];
            let q = take(n);
            let qdot = take(n);
            let tips = take(2 * n).chunks(2).map(|c| [c[0], c[1]]).collect();
            let tau = take(n);
            let fe = take(n);
            let zeta = take(1)[0];
            let forecast = take(n);
            let tail = take(5);
            rows.push(TraceRow {
                t,
                q,
                qdot,
                tips,
                tau,
                fe,
                forecast,
                zeta,
                reference: [tail[0], tail[1]],
                cost: tail[2],
                iterations: tail[3] as usize,
                capped: tail[4] != 0.0,
            });
        }
        Ok(Self { segments, rows })
    }
}

/// Per-episode statistics written next to each trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub id: String,
    pub controller: ControllerKind,
    pub rmse: f64,
    pub max_abs_fe: f64,
    pub mean_iterations: f64,
    pub capped_solves: usize,
    pub runtime_s: f64,
}

impl EpisodeSummary {
    pub fn from_trace(scenario: &Scenario, trace: &Trace, runtime_s: f64) -> Result<Self> {
        let n = trace.len().max(1) as f64;
        Ok(Self {
            id: scenario.id.clone(),
            controller: scenario.controller,
            rmse: rmse(trace, &trace.reference())?,
            max_abs_fe: max_abs_disturbance(trace),
            mean_iterations: trace.rows.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
            capped_solves: trace.rows.iter().filter(|r| r.capped).count(),
            runtime_s,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn max_abs_disturbance(trace: &Trace) -> f64 {
    trace
        .rows
        .iter()
        .flat_map(|r| r.fe.iter())
        .fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Root-mean-square end-effector distance to `reference` over the grid.
pub fn rmse(trace: &Trace, reference: &[Vector2<f64>]) -> Result<f64> {
    if reference.len() != trace.len() {
        return Err(Error::DimensionMismatch {
            expected: trace.len(),
            actual: reference.len(),
        });
    }
    if trace.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = trace
        .rows
        .iter()
        .zip(reference)
        .map(|(r, x)| (r.end_effector() - x).norm_squared())
        .sum();
    Ok((sum / trace.len() as f64).sqrt())
}

/// `rmse(mpc) / rmse(baseline)`.
pub fn error_ratio(mpc: &Trace, baseline: &Trace, reference: &[Vector2<f64>]) -> Result<f64> {
    let b = rmse(baseline, reference)?;
    if b == 0.0 {
        return Err(Error::ZeroBaselineError);
    }
    Ok(rmse(mpc, reference)? / b)
}

/// Add zero-mean Gaussian noise to each joint's series, with variance set by
/// the series' mean power and `snr_db`.
pub fn corrupt_estimate(signal: &[GeneralizedForce], snr_db: f64, noise_seed: u64) -> Vec<GeneralizedForce> {
    let Some(first) = signal.first() else {
        return Vec::new();
    };
    let n = first.len();
    let scale = 10f64.powf(-snr_db / 10.0);
    let sigma: Vec<f64> = (0..n)
        .map(|j| {
            let power = signal.iter().map(|f| f[j] * f[j]).sum::<f64>() / signal.len() as f64;
            (power * scale).sqrt()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    signal
        .iter()
        .map(|f| DVector::from_fn(n, |j, _| f[j] + sigma[j] * unit.sample(&mut rng)))
        .collect()
}

/// Joint angles within `bounds` holding the end effector at `target` at
/// rest. Passive joints must additionally be in elastic-gravitational
/// balance.
pub fn equilibrium_configuration(
    model: &ArmModel,
    target: &Vector2<f64>,
    mask: &[bool],
    bounds: &CommandBounds,
) -> Result<DVector<f64>> {
    let n = model.segments();
    let passive: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
    let residual = |q: &DVector<f64>| -> DVector<f64> {
        let e = model.tip(q.as_slice()) - target;
        let mut r = DVector::zeros(2 + passive.len());
        r[0] = e.x;
        r[1] = e.y;
        if !passive.is_empty() {
            let s = model.static_torque(q.as_slice());
            for (k, &i) in passive.iter().enumerate() {
                r[2 + k] = s[i];
            }
        }
        r
    };
    let solve = |mut q: DVector<f64>| -> (DVector<f64>, f64) {
        let mut r = residual(&q);
        for _ in 0..500 {
            if r.norm() < 1e-12 {
                break;
            }
            let jac = if passive.is_empty() {
                model.tip_jacobian(q.as_slice())
            } else {
                let h = 1e-7;
                let mut jac = nalgebra::DMatrix::zeros(r.len(), n);
                for i in 0..n {
                    let mut qp = q.clone();
                    qp[i] += h;
                    jac.set_column(i, &((residual(&qp) - &r) / h));
                }
                jac
            };
            let step = damped_pseudo_inverse(&jac, 1e-10) * &r;
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-4 {
                let cand = &q - &step * alpha;
                let rc = residual(&cand);
                if rc.norm() < r.norm() {
                    q = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let res = r.norm();
        (q, res)
    };
    // Deterministic multi-start; the smallest converged solution within the
    // command bounds wins.
    let mut guesses = Vec::new();
    for b in [0.3, 0.8, 1.4, 2.0, 2.6] {
        for sign in [1.0, -1.0] {
            let b = sign * b;
            guesses.push(DVector::from_element(n, b));
            guesses.push(DVector::from_fn(n, |i, _| if i % 2 == 0 { b } else { -b }));
            guesses.push(DVector::from_fn(n, |i, _| if i == 0 { b } else { 0.1 * b }));
        }
    }
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut chosen: Option<DVector<f64>> = None;
    for g in guesses {
        let (q, res) = solve(g);
        if res <= 1e-9 && q.iter().all(|v| bounds.contains(*v)) {
            if chosen.as_ref().map_or(true, |c| q.norm() < c.norm()) {
                chosen = Some(q);
            }
            continue;
        }
        if best.as_ref().map_or(true, |b| res < b.1) {
            best = Some((q, res));
        }
    }
    if let Some(q) = chosen {
        return Ok(q);
    }
    Err(Error::NoEquilibrium {
        x: target.x,
        z: target.y,
        residual: best.map_or(f64::INFINITY, |b| b.1),
    })
}

/// Integrate one episode and record it at the control rate.
pub fn run_episode(scenario: &Scenario, config: &SimConfig) -> Result<Trace> {
    let n = config.model.segments();
    scenario.validate(n)?;
    config.validate()?;
    let mut model = config.model.clone();
    model.base.z = -scenario.base_depth;
    let sea = scenario.wave.build(&config.jonswap)?;
    let dt = config.mpc.dt;
    let ticks = (scenario.duration / dt).round() as usize;
    let reference = |t: f64| scenario.task.reference(t, scenario.duration);

    let q0 = equilibrium_configuration(&model, &reference(0.0), &scenario.mask_at(0.0, n), &config.mpc.bounds)?;
    let mut y: Vec<f64> = q0.iter().copied().chain(std::iter::repeat(0.0).take(n)).collect();
    let mut command = ControlCommand { q_bar: q0.clone() };
    let mut plan = vec![q0.clone(); config.mpc.horizon];
    let mut plant = Dopri5::new(Tolerances {
        rtol: config.plant_rtol,
        atol: config.plant_rtol * 1e-2,
        h_max: dt,
        ..Default::default()
    });
    let mut noise_seeds = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut rows = Vec::with_capacity(ticks);

    for k in 0..ticks {
        let t = k as f64 * dt;
        let mask = scenario.mask_at(t, n);
        let state = Configuration::from_slices(&y[..n], &y[n..])?;
        let fe = if sea.is_calm() {
            GeneralizedForce::zeros(n)
        } else {
            model.disturbance(&state, &sea, t).force
        };
        let noise_seed = noise_seeds.next_u64();
        let (forecast, cost, iterations, capped) = match scenario.controller {
            ControllerKind::Baseline => {
                command = kinematic_plan_step(&reference(t + dt), &command, &config.gains, dt, &model, &config.mpc.bounds);
                (GeneralizedForce::zeros(n), 0.0, 0, false)
            }
            ControllerKind::Mpc => {
                let settings = MpcSettings {
                    actuation_mask: mask.clone(),
                    ..config.mpc.clone()
                };
                if k > 0 {
                    plan = shift_warm_start(&plan);
                }
                let clean = disturbance_forecast(&sea, &plan, &state, t, &settings, &config.gains, &model)?;
                let noisy = corrupt_estimate(&clean, scenario.snr_db, noise_seed);
                let problem = MpcProblem {
                    model: &model,
                    gains: &config.gains,
                    settings: &settings,
                    state: state.clone(),
                    t_now: t,
                    references: (1..=settings.horizon).map(|j| reference(t + j as f64 * dt)).collect(),
                    forecast: noisy,
                    previous: command.q_bar.clone(),
                };
                let sol = mpc_solve(&problem, &plan)?;
                command = sol.first();
                plan = sol.commands;
                (problem.forecast[0].clone(), sol.cost, sol.iterations, sol.capped)
            }
        };
        let tau = feedforward_pd(&command, &y[..n], &y[n..], &config.gains, &model, &mask);
        let r = reference(t);
        rows.push(TraceRow {
            t,
            q: y[..n].to_vec(),
            qdot: y[n..].to_vec(),
            tips: segment_tips(&y[..n], &model.base, &model.geometry)
                .iter()
                .map(|p| [p.x, p.y])
                .collect(),
            tau: tau.iter().copied().collect(),
            fe: fe.iter().copied().collect(),
            forecast: forecast.iter().copied().collect(),
            zeta: sea.elevation(model.base.x, t),
            reference: [r.x, r.y],
            cost,
            iterations,
            capped,
        });

        let inner = InnerLoop::new(&model, &command.q_bar, &config.gains, &mask);
        let torque = |q: &[f64], qd: &[f64]| inner.torque(q, qd);
        let loading = if sea.is_calm() {
            Loading::Dry
        } else {
            Loading::Sea(&sea)
        };
        let mut f = |t: f64, y: &[f64], dy: &mut [f64]| model.state_derivative(t, y, dy, &torque, loading);
        y = plant.integrate(&mut f, t, t + dt, &y).map_err(|e| {
            warn!("episode {} aborted at t = {t:.1} s: {e}", scenario.id);
            e
        })?;
    }
    Ok(Trace { segments: n, rows })
}

/// Run an episode and time it.
pub fn run_episode_timed(scenario: &Scenario, config: &SimConfig) -> Result<(Trace, f64)> {
    let start = Instant::now();
    let trace = run_episode(scenario, config)?;
    let secs = start.elapsed().as_secs_f64();
    info!("episode {} ({}) finished in {secs:.1} s", scenario.id, scenario.controller.name());
    Ok((trace, secs))
}
