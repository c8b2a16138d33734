//! Controllers sharing one low-level torque law.
//!
//! The inner loop is a feedforward plus PD law on commanded joint angles.
//! The baseline drives those commands with a resolved-rate kinematic
//! planner. The MPC optimizes a horizon of commands against a forecast of the
//! generalized wave loading.

use log::debug;
use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::dynamics::GeneralizedForce;
use crate::error::{Error, Result};
use crate::kinematics::{damped_pseudo_inverse, Configuration};
use crate::model::{ArmModel, Loading};
use crate::ode::{Dopri5, Tolerances};
use crate::waves::SeaState;

/// Box limits applied to every commanded joint angle (rad).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for CommandBounds {
    fn default() -> Self {
        Self {
            min: -std::f64::consts::PI,
            max: std::f64::consts::PI,
        }
    }
}

impl CommandBounds {
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

/// Commanded joint angles fed to the inner loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlCommand {
    pub q_bar: DVector<f64>,
}

impl ControlCommand {
    /// Build a command, clamping each entry into `bounds`.
    pub fn clamped(q_bar: DVector<f64>, bounds: &CommandBounds) -> Self {
        Self {
            q_bar: q_bar.map(|v| bounds.clamp(v)),
        }
    }

    pub fn within(&self, bounds: &CommandBounds) -> bool {
        self.q_bar.iter().all(|v| bounds.contains(*v))
    }
}

/// Controller gains. Matrices are diagonal and stored by their diagonals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GainSet {
    /// Proportional gain per joint (N m/rad).
    pub alpha: Vec<f64>,
    /// Derivative gain per joint (N m s/rad).
    pub beta: Vec<f64>,
    /// Task-space planner gain (1/s).
    pub k_e: f64,
    /// Tip error weight (1/m^2).
    pub q_weight: [f64; 2],
    /// Command increment weight per joint (1/rad^2).
    pub r_weight: Vec<f64>,
}

impl Default for GainSet {
    fn default() -> Self {
        Self {
            alpha: vec![6.0; 3],
            beta: vec![0.6; 3],
            k_e: 2.0,
            q_weight: [100.0, 100.0],
            r_weight: vec![1.0; 3],
        }
    }
}

impl GainSet {
    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, v) in [("alpha", &self.alpha), ("beta", &self.beta), ("r_weight", &self.r_weight)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
            if v.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.k_e > 0.0) || self.q_weight.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::InvalidParameter("k_e and q_weight must be positive".into()));
        }
        Ok(())
    }

    pub fn with_segments(mut self, n: usize) -> Self {
        let a = self.alpha[0];
        let b = self.beta[0];
        let r = self.r_weight[0];
        self.alpha = vec![a; n];
        self.beta = vec![b; n];
        self.r_weight = vec![r; n];
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpcSettings {
    /// Control interval (s).
    pub dt: f64,
    /// Horizon length in steps.
    pub horizon: usize,
    pub max_iters: usize,
    /// Finite-difference step for the step-map sensitivities.
    pub fd_step: f64,
    /// `false` marks a passive joint.
    pub actuation_mask: Vec<bool>,
    /// Relative tolerance of the prediction integrator.
    pub rtol: f64,
    pub bounds: CommandBounds,
}

impl Default for MpcSettings {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 15,
            max_iters: 30,
            fd_step: 1e-4,
            actuation_mask: vec![true; 3],
            rtol: 1e-5,
            bounds: CommandBounds::default(),
        }
    }
}

impl MpcSettings {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.dt > 0.0) || self.horizon == 0 || !(self.fd_step > 0.0) || !(self.rtol > 0.0) {
            return Err(Error::InvalidParameter("dt, horizon, fd_step and rtol must be positive".into()));
        }
        if self.actuation_mask.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.actuation_mask.len(),
            });
        }
        if !(self.bounds.min < self.bounds.max) {
            return Err(Error::InvalidParameter("command bounds are empty".into()));
        }
        Ok(())
    }

    fn active(&self) -> Vec<usize> {
        (0..self.actuation_mask.len()).filter(|&i| self.actuation_mask[i]).collect()
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.rtol * 1e-3,
            h_max: self.dt,
            ..Default::default()
        }
    }
}

/// Feedforward plus PD torque for a fixed command.
#[derive(Clone, Debug)]
pub struct InnerLoop<'a> {
    q_bar: &'a DVector<f64>,
    feedforward: GeneralizedForce,
    gains: &'a GainSet,
    mask: &'a [bool],
}

impl<'a> InnerLoop<'a> {
    pub fn new(model: &ArmModel, q_bar: &'a DVector<f64>, gains: &'a GainSet, mask: &'a [bool]) -> Self {
        Self {
            q_bar,
            feedforward: model.static_torque(q_bar.as_slice()),
            gains,
            mask,
        }
    }

    pub fn torque(&self, q: &[f64], qdot: &[f64]) -> GeneralizedForce {
        GeneralizedForce::from_fn(q.len(), |i, _| {
            if !self.mask[i] {
                return 0.0;
            }
            self.feedforward[i] + self.gains.alpha[i] * (self.q_bar[i] - q[i]) - self.gains.beta[i] * qdot[i]
        })
    }
}

/// `tau = K(q_bar) + G(q_bar) + alpha (q_bar - q) - beta qdot`, zeroed on
/// passive joints.
pub fn feedforward_pd(
    q_bar: &ControlCommand,
    q: &[f64],
    qdot: &[f64],
    gains: &GainSet,
    model: &ArmModel,
    mask: &[bool],
) -> GeneralizedForce {
    InnerLoop::new(model, &q_bar.q_bar, gains, mask).torque(q, qdot)
}

pub const PLANNER_DAMPING: f64 = 1e-4;

/// One resolved-rate step toward `target`, clamped to `bounds`.
pub fn kinematic_plan_step(
    target: &Vector2<f64>,
    q_bar_prev: &ControlCommand,
    gains: &GainSet,
    dt: f64,
    model: &ArmModel,
    bounds: &CommandBounds,
) -> ControlCommand {
    let q = q_bar_prev.q_bar.as_slice();
    let err = target - model.tip(q);
    let pinv = damped_pseudo_inverse(&model.tip_jacobian(q), PLANNER_DAMPING);
    let step = pinv * DVector::from_column_slice((err * gains.k_e).as_slice()) * dt;
    ControlCommand::clamped(&q_bar_prev.q_bar + step, bounds)
}

fn state_vec(config: &Configuration) -> Vec<f64> {
    config.q.iter().chain(config.qdot.iter()).copied().collect()
}

/// Prediction dynamics for one command under a held generalized force.
fn held_rhs<'a>(
    model: &'a ArmModel,
    inner: &'a InnerLoop<'a>,
    force: &'a GeneralizedForce,
) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a {
    move |t, y, dy| model.state_derivative(t, y, dy, &|q: &[f64], qd: &[f64]| inner.torque(q, qd), Loading::Held(force))
}

/// One prediction step of length `dt` under a held generalized force.
#[allow(clippy::too_many_arguments)]
fn predict_step(
    model: &ArmModel,
    gains: &GainSet,
    mask: &[bool],
    q_bar: &DVector<f64>,
    force: &GeneralizedForce,
    t: f64,
    dt: f64,
    y: &[f64],
    ode: &mut Dopri5,
) -> Result<Vec<f64>> {
    let inner = InnerLoop::new(model, q_bar, gains, mask);
    let mut f = held_rhs(model, &inner, force);
    ode.integrate(&mut f, t, t + dt, y)
}

/// Generalized disturbance along the trajectory predicted for `plan`, one
/// entry per horizon step, evaluated against `sea`.
pub fn disturbance_forecast(
    sea: &SeaState,
    plan: &[DVector<f64>],
    state: &Configuration,
    t_now: f64,
    settings: &MpcSettings,
    gains: &GainSet,
    model: &ArmModel,
) -> Result<Vec<GeneralizedForce>> {
    let n = model.segments();
    let mut y = state_vec(state);
    let mut ode = Dopri5::new(settings.tolerances());
    let mut out = Vec::with_capacity(plan.len());
    for (k, q_bar) in plan.iter().enumerate() {
        let t = t_now + k as f64 * settings.dt;
        let config = Configuration::from_slices(&y[..n], &y[n..])?;
        let force = if sea.is_calm() {
            GeneralizedForce::zeros(n)
        } else {
            model.disturbance(&config, sea, t).force
        };
        if k + 1 < plan.len() {
            y = predict_step(model, gains, &settings.actuation_mask, q_bar, &force, t, settings.dt, &y, &mut ode)?;
        }
        out.push(force);
    }
    Ok(out)
}

/// One receding-horizon problem instance.
#[derive(Clone, Debug)]
pub struct MpcProblem<'a> {
    pub model: &'a ArmModel,
    pub gains: &'a GainSet,
    pub settings: &'a MpcSettings,
    pub state: Configuration,
    pub t_now: f64,
    /// Tip targets for steps `1..=K`.
    pub references: Vec<Vector2<f64>>,
    /// Held generalized disturbance for steps `0..K`.
    pub forecast: Vec<GeneralizedForce>,
    /// Command applied at the previous tick.
    pub previous: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpcSolution {
    pub commands: Vec<DVector<f64>>,
    pub cost: f64,
    pub warm_cost: f64,
    pub iterations: usize,
    /// The iteration cap was reached before convergence.
    pub capped: bool,
}

impl MpcSolution {
    pub fn first(&self) -> ControlCommand {
        ControlCommand {
            q_bar: self.commands[0].clone(),
        }
    }
}

struct Rollout {
    states: Vec<Vec<f64>>,
    cost: f64,
}

impl MpcProblem<'_> {
    fn check(&self) -> Result<()> {
        let n = self.model.segments();
        self.settings.validate(n)?;
        self.gains.validate(n)?;
        let k = self.settings.horizon;
        if self.references.len() != k || self.forecast.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: self.references.len().min(self.forecast.len()),
            });
        }
        if self.previous.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.previous.len(),
            });
        }
        Ok(())
    }

    fn t(&self, k: usize) -> f64 {
        self.t_now + k as f64 * self.settings.dt
    }

    fn control_cost(&self, commands: &[DVector<f64>]) -> f64 {
        let mut cost = 0.0;
        let mut prev = &self.previous;
        for u in commands {
            for (i, (a, b)) in u.iter().zip(prev.iter()).enumerate() {
                cost += self.gains.r_weight[i] * (a - b).powi(2);
            }
            prev = u;
        }
        cost
    }

    fn tip_cost(&self, k: usize, q: &[f64]) -> f64 {
        let e = self.model.tip(q) - self.references[k - 1];
        self.gains.q_weight[0] * e.x * e.x + self.gains.q_weight[1] * e.y * e.y
    }

    fn rollout(&self, commands: &[DVector<f64>]) -> Result<Rollout> {
        let n = self.model.segments();
        let mut ode = Dopri5::new(self.settings.tolerances());
        let mut states = vec![state_vec(&self.state)];
        let mut cost = self.control_cost(commands);
        for (k, u) in commands.iter().enumerate() {
            let y = predict_step(
                self.model,
                self.gains,
                &self.settings.actuation_mask,
                u,
                &self.forecast[k],
                self.t(k),
                self.settings.dt,
                &states[k],
                &mut ode,
            )?;
            cost += self.tip_cost(k + 1, &y[..n]);
            states.push(y);
        }
        Ok(Rollout { states, cost })
    }

    /// Cost of a full command sequence.
    pub fn cost(&self, commands: &[DVector<f64>]) -> Result<f64> {
        Ok(self.rollout(commands)?.cost)
    }

    /// Zero-order-hold discretization of the prediction dynamics linearized
    /// at the step midpoint: returns `(dx_{k+1}/dx_k, dx_{k+1}/du_k)`.
    fn step_sensitivity(
        &self,
        k: usize,
        u: &DVector<f64>,
        x0: &[f64],
        x1: &[f64],
        active: &[usize],
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let nx = x0.len();
        let m = active.len();
        let h = self.settings.fd_step;
        let dt = self.settings.dt;
        let t = self.t(k) + 0.5 * dt;
        let mask = &self.settings.actuation_mask;
        let xm: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| 0.5 * (a + b)).collect();
        let force = &self.forecast[k];
        let inner = InnerLoop::new(self.model, u, self.gains, mask);
        let mut f = held_rhs(self.model, &inner, force);
        let mut f0 = vec![0.0; nx];
        f(t, &xm, &mut f0)?;
        let mut z = DMatrix::zeros(nx + m, nx + m);
        let mut fp = vec![0.0; nx];
        let mut xp = xm.clone();
        for i in 0..nx {
            xp[i] += h;
            f(t, &xp, &mut fp)?;
            xp[i] = xm[i];
            for r in 0..nx {
                z[(r, i)] = (fp[r] - f0[r]) / h * dt;
            }
        }
        let mut up = u.clone();
        for (c, &i) in active.iter().enumerate() {
            up[i] += h;
            let inner_p = InnerLoop::new(self.model, &up, self.gains, mask);
            held_rhs(self.model, &inner_p, force)(t, &xm, &mut fp)?;
            up[i] = u[i];
            for r in 0..nx {
                z[(r, nx + c)] = (fp[r] - f0[r]) / h * dt;
            }
        }
        let e = z.exp();
        Ok((e.view((0, 0), (nx, nx)).into_owned(), e.view((0, nx), (nx, m)).into_owned()))
    }

    /// Residual vector and its Jacobian with respect to the active commands.
    fn linearize(&self, commands: &[DVector<f64>], roll: &Rollout, active: &[usize]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.model.segments();
        let m = active.len();
        let kh = commands.len();
        let nz = kh * m;
        let rows = 2 * kh + m * kh;
        let mut r = DVector::zeros(rows);
        let mut jr = DMatrix::zeros(rows, nz);
        let sq = [self.gains.q_weight[0].sqrt(), self.gains.q_weight[1].sqrt()];
        // sens[j] = d x_k / d u_j for the current k
        let mut sens: Vec<DMatrix<f64>> = Vec::with_capacity(kh);
        for k in 0..kh {
            let (a, b) = self.step_sensitivity(k, &commands[k], &roll.states[k], &roll.states[k + 1], active)?;
            for s in sens.iter_mut() {
                *s = &a * &*s;
            }
            sens.push(b);
            let q_next = &roll.states[k + 1][..n];
            let jt = self.model.tip_jacobian(q_next);
            let e = self.model.tip(q_next) - self.references[k];
            for d in 0..2 {
                r[2 * k + d] = sq[d] * e[d];
            }
            for (j, s) in sens.iter().enumerate() {
                let block = &jt * s.rows(0, n);
                for d in 0..2 {
                    for c in 0..m {
                        jr[(2 * k + d, j * m + c)] = sq[d] * block[(d, c)];
                    }
                }
            }
        }
        let base = 2 * kh;
        for k in 0..kh {
            for (c, &i) in active.iter().enumerate() {
                let w = self.gains.r_weight[i].sqrt();
                let prev = if k == 0 { self.previous[i] } else { commands[k - 1][i] };
                let row = base + k * m + c;
                r[row] = w * (commands[k][i] - prev);
                jr[(row, k * m + c)] = w;
                if k > 0 {
                    jr[(row, (k - 1) * m + c)] = -w;
                }
            }
        }
        Ok((r, jr))
    }
}

/// Optimize the command sequence from `warm`, never returning a cost above
/// the warm-start cost.
pub fn mpc_solve(problem: &MpcProblem<'_>, warm: &[DVector<f64>]) -> Result<MpcSolution> {
    problem.check()?;
    let n = problem.model.segments();
    let settings = problem.settings;
    if warm.len() != settings.horizon || warm.iter().any(|u| u.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: settings.horizon,
            actual: warm.len(),
        });
    }
    let bounds = settings.bounds;
    let active = settings.active();
    let m = active.len();
    // Passive joints hold the previous command; it has no effect on torque.
    let mut commands: Vec<DVector<f64>> = warm
        .iter()
        .map(|u| {
            DVector::from_fn(n, |i, _| {
                if settings.actuation_mask[i] {
                    bounds.clamp(u[i])
                } else {
                    problem.previous[i]
                }
            })
        })
        .collect();
    let mut roll = problem.rollout(&commands)?;
    let warm_cost = roll.cost;
    let mut iterations = 0;
    let mut converged = m == 0;
    while !converged && iterations < settings.max_iters {
        iterations += 1;
        let (r, jr) = problem.linearize(&commands, &roll, &active)?;
        let grad = jr.transpose() * &r;
        let mut hess = jr.transpose() * &jr;
        let nz = grad.len();
        // Variables held at an active bound.
        let free: Vec<bool> = (0..nz)
            .map(|z| {
                let v = commands[z / m][active[z % m]];
                !((v <= bounds.min && grad[z] > 0.0) || (v >= bounds.max && grad[z] < 0.0))
            })
            .collect();
        let proj_grad: f64 = (0..nz).filter(|&z| free[z]).map(|z| grad[z] * grad[z]).sum::<f64>().sqrt();
        if proj_grad <= 1e-9 * (1.0 + roll.cost) {
            converged = true;
            break;
        }
        for z in 0..nz {
            if !free[z] {
                hess.row_mut(z).fill(0.0);
                hess.column_mut(z).fill(0.0);
                hess[(z, z)] = 1.0;
            }
        }
        let scale = hess.diagonal().max().max(1e-12);
        let mut mu = 1e-8 * scale;
        let mut improved = false;
        for _ in 0..4 {
            let mut lhs = hess.clone();
            for z in 0..nz {
                if free[z] {
                    lhs[(z, z)] += mu;
                }
            }
            let rhs = DVector::from_fn(nz, |z, _| if free[z] { -grad[z] } else { 0.0 });
            let Some(delta) = lhs.cholesky().map(|c| c.solve(&rhs)) else {
                mu *= 100.0;
                continue;
            };
            let mut alpha = 1.0;
            for _ in 0..10 {
                let trial: Vec<DVector<f64>> = commands
                    .iter()
                    .enumerate()
                    .map(|(k, u)| {
                        let mut v = u.clone();
                        for (c, &i) in active.iter().enumerate() {
                            v[i] = bounds.clamp(u[i] + alpha * delta[k * m + c]);
                        }
                        v
                    })
                    .collect();
                let cand = problem.rollout(&trial)?;
                if cand.cost < roll.cost {
                    let gain = roll.cost - cand.cost;
                    commands = trial;
                    converged = gain <= 1e-7 * (1.0 + roll.cost);
                    roll = cand;
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if improved {
                break;
            }
            mu = (mu * 1e3).max(1e-4 * scale);
        }
        if !improved {
            converged = true;
        }
    }
    let capped = !converged;
    if capped {
        debug!("mpc iteration cap reached at t = {:.2}, cost {:.4e}", problem.t_now, roll.cost);
    }
    Ok(MpcSolution {
        commands,
        cost: roll.cost,
        warm_cost,
        iterations,
        capped,
    })
}

/// Zero-order-hold shift: drop the applied command and repeat the last one.
pub fn shift_warm_start(previous: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = previous.iter().skip(1).cloned().collect();
    if let Some(last) = previous.last() {
        out.push(last.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicParams;
    use crate::hydro::HydroCoeffs;
    use crate::kinematics::{BasePose, SegmentGeometry};
    use crate::waves::{synthesize_jonswap, JonswapSettings};
    use approx::assert_relative_eq;

    fn model() -> ArmModel {
        ArmModel::default()
    }

    fn cmd(v: &[f64]) -> ControlCommand {
        ControlCommand {
            q_bar: DVector::from_column_slice(v),
        }
    }

    #[test]
    fn pd_at_command_is_feedforward() {
        let m = model();
        let q = [0.3, -0.4, 0.9];
        let tau = feedforward_pd(&cmd(&q), &q, &[0.0; 3], &GainSet::default(), &m, &[true; 3]);
        assert!((tau - m.static_torque(&q)).norm() < 1e-14);
    }

    #[test]
    fn pd_vanishes_for_neutral_unsprung_arm() {
        let mut m = model();
        m.dynamics.rho_body = m.dynamics.rho_fluid;
        m.dynamics.stiffness = vec![0.0; 3];
        let q = [0.3, -0.4, 0.9];
        let tau = feedforward_pd(&cmd(&q), &q, &[0.0; 3], &GainSet::default(), &m, &[true; 3]);
        assert_eq!(tau.norm(), 0.0);
    }

    #[test]
    fn masked_joint_gets_no_torque() {
        let m = model();
        let tau = feedforward_pd(
            &cmd(&[1.0, 1.0, 1.0]),
            &[0.0, -2.0, 0.5],
            &[0.3, 0.3, 0.3],
            &GainSet::default(),
            &m,
            &[true, false, true],
        );
        assert_eq!(tau[1], 0.0);
        assert!(tau[0] != 0.0 && tau[2] != 0.0);
    }

    #[test]
    fn planner_fixed_point_at_target() {
        let m = model();
        let c = cmd(&[0.2, 0.5, -0.3]);
        let target = m.tip(c.q_bar.as_slice());
        let next = kinematic_plan_step(&target, &c, &GainSet::default(), 0.1, &m, &CommandBounds::default());
        assert!((next.q_bar - c.q_bar).norm() < 1e-14);
    }

    #[test]
    fn planner_error_decreases() {
        let m = model();
        let target = Vector2::new(0.5, -4.3);
        let mut c = cmd(&[0.1, 0.1, 0.1]);
        let mut err = (m.tip(c.q_bar.as_slice()) - target).norm();
        for _ in 0..60 {
            c = kinematic_plan_step(&target, &c, &GainSet::default(), 0.1, &m, &CommandBounds::default());
            let e = (m.tip(c.q_bar.as_slice()) - target).norm();
            assert!(e < err);
            err = e;
        }
        assert!(err < 1e-3);
    }

    #[test]
    fn planner_clamps() {
        let m = model();
        let bounds = CommandBounds { min: -0.5, max: 0.5 };
        let c = cmd(&[0.5, 0.5, 0.5]);
        let next = kinematic_plan_step(&Vector2::new(0.8, -4.2), &c, &GainSet::default(), 0.1, &m, &bounds);
        assert!(next.within(&bounds));
        assert!(next.q_bar.iter().any(|v| *v == 0.5));
    }

    fn rest_problem<'a>(
        m: &'a ArmModel,
        gains: &'a GainSet,
        settings: &'a MpcSettings,
        q: &[f64],
        target: Vector2<f64>,
        forecast: Vec<GeneralizedForce>,
    ) -> MpcProblem<'a> {
        MpcProblem {
            model: m,
            gains,
            settings,
            state: Configuration::at_rest(DVector::from_column_slice(q)),
            t_now: 0.0,
            references: vec![target; settings.horizon],
            forecast,
            previous: DVector::from_column_slice(q),
        }
    }

    #[test]
    fn stationary_problem_returns_warm_start() {
        let m = model();
        let gains = GainSet::default();
        let settings = MpcSettings {
            horizon: 5,
            ..Default::default()
        };
        let q = [0.3, 0.6, -0.2];
        let target = m.tip(&q);
        let p = rest_problem(&m, &gains, &settings, &q, target, vec![DVector::zeros(3); 5]);
        let warm = vec![DVector::from_column_slice(&q); 5];
        let sol = mpc_solve(&p, &warm).unwrap();
        assert!(sol.cost < 1e-12);
        for u in &sol.commands {
            assert!((u - &warm[0]).norm() < 1e-9);
        }
    }

    #[test]
    fn solver_never_worsens_warm_start_and_respects_bounds() {
        let m = model();
        let gains = GainSet::default();
        let settings = MpcSettings {
            horizon: 4,
            bounds: CommandBounds { min: -1.0, max: 1.0 },
            ..Default::default()
        };
        for (i, target) in [Vector2::new(0.3, -4.7), Vector2::new(0.7, -4.3), Vector2::new(-0.2, -4.8)]
            .into_iter()
            .enumerate()
        {
            let q = [0.1 * i as f64, 0.2, -0.1];
            let forecast = vec![DVector::from_column_slice(&[0.5, -0.2, 0.1 * i as f64]); 4];
            let p = rest_problem(&m, &gains, &settings, &q, target, forecast);
            let warm = vec![DVector::from_column_slice(&q); 4];
            let sol = mpc_solve(&p, &warm).unwrap();
            assert!(sol.cost <= sol.warm_cost);
            assert_relative_eq!(sol.cost, p.cost(&sol.commands).unwrap(), max_relative = 1e-12);
            assert!(sol.commands.iter().all(|u| u.iter().all(|v| settings.bounds.contains(*v))));
        }
    }

    #[test]
    fn passive_joint_commands_are_untouched() {
        let m = model();
        let gains = GainSet::default();
        let settings = MpcSettings {
            horizon: 3,
            actuation_mask: vec![true, false, true],
            ..Default::default()
        };
        let q = [0.2, 0.0, 0.3];
        let p = rest_problem(&m, &gains, &settings, &q, Vector2::new(0.4, -4.6), vec![DVector::zeros(3); 3]);
        let warm = vec![DVector::from_column_slice(&[0.5, 2.0, 0.5]); 3];
        let sol = mpc_solve(&p, &warm).unwrap();
        assert!(sol.commands.iter().all(|u| u[1] == 0.0));
    }

    #[test]
    fn single_segment_matches_grid_search() {
        let m = ArmModel {
            geometry: SegmentGeometry {
                segments: 1,
                ..Default::default()
            },
            base: BasePose::hanging(4.0),
            dynamics: DynamicParams::default().with_segments(1),
            hydro: HydroCoeffs::default(),
        };
        let gains = GainSet::default().with_segments(1);
        let settings = MpcSettings {
            horizon: 2,
            actuation_mask: vec![true],
            ..Default::default()
        };
        let p = MpcProblem {
            model: &m,
            gains: &gains,
            settings: &settings,
            state: Configuration::from_slices(&[0.1], &[0.2]).unwrap(),
            t_now: 0.0,
            references: vec![Vector2::new(0.12, -4.27); 2],
            forecast: vec![DVector::from_element(1, 0.05); 2],
            previous: DVector::from_element(1, 0.1),
        };
        let sol = mpc_solve(&p, &[DVector::from_element(1, 0.1), DVector::from_element(1, 0.1)]).unwrap();
        let mut best = f64::INFINITY;
        let grid: Vec<f64> = (0..41).map(|i| -PI_ + 2.0 * PI_ * i as f64 / 40.0).collect();
        for a in &grid {
            for b in &grid {
                let c = p.cost(&[DVector::from_element(1, *a), DVector::from_element(1, *b)]).unwrap();
                best = best.min(c);
            }
        }
        assert!(sol.cost <= best * 1.01, "optimizer {} grid {}", sol.cost, best);
    }

    const PI_: f64 = std::f64::consts::PI;

    #[test]
    fn calm_forecast_is_zero() {
        let m = model();
        let settings = MpcSettings::default();
        let plan = vec![DVector::from_column_slice(&[0.2, 0.3, 0.4]); 15];
        let state = Configuration::from_slices(&[0.1, 0.2, 0.3], &[0.5, -0.5, 0.1]).unwrap();
        let f = disturbance_forecast(&SeaState::calm(20.0), &plan, &state, 4.0, &settings, &GainSet::default(), &m).unwrap();
        assert_eq!(f.len(), 15);
        assert!(f.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn forecast_head_equals_true_loading() {
        let m = model();
        let sea = synthesize_jonswap(3.0, 8.0, &JonswapSettings::default(), 1).unwrap();
        let settings = MpcSettings::default();
        let plan = vec![DVector::from_column_slice(&[0.2, 0.3, 0.4]); 15];
        let state = Configuration::from_slices(&[0.1, 0.2, 0.3], &[0.5, -0.5, 0.1]).unwrap();
        let f = disturbance_forecast(&sea, &plan, &state, 4.0, &settings, &GainSet::default(), &m).unwrap();
        assert_eq!(f[0], m.disturbance(&state, &sea, 4.0).force);
    }

    #[test]
    fn forecast_is_lipschitz_in_time() {
        // At rest the loading is pure drag of the particle velocity, whose
        // rate is bounded by rho A C |v|max |a|max summed over the nodes.
        let m = model();
        let sea = synthesize_jonswap(3.0, 10.0, &JonswapSettings::default(), 3).unwrap();
        let settings = MpcSettings {
            horizon: 1,
            ..Default::default()
        };
        let q = [0.4, -0.3, 0.6];
        let state = Configuration::at_rest(DVector::from_column_slice(&q));
        let plan = vec![DVector::from_column_slice(&q)];
        let coth = |c: &crate::waves::WaveComponent| 1.0 / (c.wavenumber * sea.depth).tanh();
        let vmax: f64 = sea.components.iter().map(|c| 2f64.sqrt() * c.omega * c.amplitude() * coth(c)).sum();
        let amax: f64 = sea.components.iter().map(|c| 2f64.sqrt() * c.omega.powi(2) * c.amplitude() * coth(c)).sum();
        let h = &m.hydro;
        let area = m.geometry.diameter * m.geometry.length / m.dynamics.nodes_per_segment as f64;
        let nodes = m.nodes(&q, &[0.0; 3]);
        let jsum: f64 = (0..nodes.len())
            .map(|k| nodes.jac(k).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .sum();
        let lip = jsum * h.rho_fluid * area * h.drag_normal.max(h.drag_tangential) * vmax * amax;
        let dt = 0.1;
        let mut prev = None;
        for i in 0..100 {
            let t = i as f64 * dt;
            let f = disturbance_forecast(&sea, &plan, &state, t, &settings, &GainSet::default(), &m).unwrap();
            if let Some(p) = prev {
                let d: GeneralizedForce = &f[0] - &p;
                assert!(d.norm() <= lip * dt, "{} > {}", d.norm(), lip * dt);
            }
            prev = Some(f[0].clone());
        }
    }

    #[test]
    fn shift_repeats_tail() {
        let seq: Vec<DVector<f64>> = (0..3).map(|i| DVector::from_element(2, i as f64)).collect();
        let s = shift_warm_start(&seq);
        assert_eq!(s[0][0], 1.0);
        assert_eq!(s[1][0], 2.0);
        assert_eq!(s[2][0], 2.0);
    }
}
