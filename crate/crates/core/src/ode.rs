//! Dormand-Prince 5(4) explicit Runge-Kutta integrator with adaptive steps.
//!
//! Accepted step sizes can be recorded and replayed, which gives a smooth
//! fixed-mesh map from initial state to final state.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            atol: 1e-9,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Stage storage, reused across steps.
struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }
}

pub struct Dopri5 {
    pub tol: Tolerances,
    pub stats: Stats,
    /// Step size carried into the next call; `None` triggers the initial
    /// step heuristic.
    next_step: Option<f64>,
}

impl Dopri5 {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            stats: Stats::default(),
            next_step: None,
        }
    }

    pub fn reset(&mut self) {
        self.next_step = None;
        self.stats = Stats::default();
    }

    /// Integrate `y' = f(t, y)` from `t0` to `t1`.
    pub fn integrate<F>(&mut self, f: &mut F, t0: f64, t1: f64, y0: &[f64]) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        self.run(f, t0, t1, y0, None)
    }

    /// As [`Self::integrate`], appending every accepted step size to `steps`.
    pub fn integrate_recorded<F>(
        &mut self,
        f: &mut F,
        t0: f64,
        t1: f64,
        y0: &[f64],
        steps: &mut Vec<f64>,
    ) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        self.run(f, t0, t1, y0, Some(steps))
    }

    fn run<F>(
        &mut self,
        f: &mut F,
        t0: f64,
        t1: f64,
        y0: &[f64],
        mut record: Option<&mut Vec<f64>>,
    ) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y0.len();
        let mut y = y0.to_vec();
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(y);
        }
        let mut st = Stages::new(n);
        let mut y_new = vec![0.0; n];
        f(t0, &y, &mut st.k[0])?;
        self.stats.rhs_evals += 1;
        let mut h = match self.next_step {
            Some(h) => h,
            None => self.initial_step(f, t0, &y, &st.k[0], span)?,
        }
        .min(self.tol.h_max)
        .min(span);
        let mut t = t0;
        let mut steps = 0;
        while t < t1 {
            let last = t + h >= t1 - 1e-12 * span.max(1.0);
            let h_try = if last { t1 - t } else { h };
            let err = self.stage(f, t, h_try, &y, &mut st, &mut y_new, true)?;
            steps += 1;
            if steps > self.tol.max_steps {
                return Err(Error::StepSizeUnderflow { t, step: h_try });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t1 } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                if let Some(rec) = record.as_deref_mut() {
                    rec.push(h_try);
                }
                self.stats.accepted += 1;
                // FSAL: the last stage is f(t + h, y_new).
                st.k.swap(0, 6);
                // Keep the carried step independent of the truncated final step.
                if !last {
                    h = (h_try * factor).min(self.tol.h_max);
                } else if h_try >= h * 0.5 {
                    h = (h_try * factor).min(self.tol.h_max);
                }
            } else {
                self.stats.rejected += 1;
                h = h_try * factor.min(1.0);
                if h < self.tol.h_min {
                    return Err(Error::StepSizeUnderflow { t, step: h });
                }
            }
        }
        self.next_step = Some(h);
        Ok(y)
    }

    /// Fixed-mesh integration with the 5th-order update only.
    pub fn replay<F>(f: &mut F, t0: f64, y0: &[f64], steps: &[f64]) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y0.len();
        let mut y = y0.to_vec();
        let mut y_new = vec![0.0; n];
        let mut st = Stages::new(n);
        let mut scratch = Self::new(Tolerances::default());
        let mut t = t0;
        for &h in steps {
            f(t, &y, &mut st.k[0])?;
            scratch.stage(f, t, h, &y, &mut st, &mut y_new, false)?;
            std::mem::swap(&mut y, &mut y_new);
            t += h;
        }
        Ok(y)
    }

    /// One Dormand-Prince step from `(t, y)` with `k[0] = f(t, y)` already set.
    /// Returns the scaled error norm when `estimate` is set.
    #[allow(clippy::too_many_arguments)]
    fn stage<F>(
        &mut self,
        f: &mut F,
        t: f64,
        h: f64,
        y: &[f64],
        st: &mut Stages,
        y_new: &mut [f64],
        estimate: bool,
    ) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        let Stages { k, tmp } = st;
        macro_rules! combine {
            ($($a:expr => $i:expr),+) => {
                for j in 0..n {
                    tmp[j] = y[j] + h * (0.0 $(+ $a * k[$i][j])+);
                }
            };
        }
        combine!(A21 => 0);
        f(t + C2 * h, tmp, &mut k[1])?;
        combine!(A31 => 0, A32 => 1);
        f(t + C3 * h, tmp, &mut k[2])?;
        combine!(A41 => 0, A42 => 1, A43 => 2);
        f(t + C4 * h, tmp, &mut k[3])?;
        combine!(A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        f(t + C5 * h, tmp, &mut k[4])?;
        combine!(A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        f(t + h, tmp, &mut k[5])?;
        for j in 0..n {
            y_new[j] = y[j]
                + h * (A71 * k[0][j] + A73 * k[2][j] + A74 * k[3][j] + A75 * k[4][j]
                    + A76 * k[5][j]);
        }
        self.stats.rhs_evals += 5;
        if !estimate {
            return Ok(0.0);
        }
        f(t + h, y_new, &mut k[6])?;
        self.stats.rhs_evals += 1;
        let mut acc = 0.0;
        for j in 0..n {
            let e = h
                * (E1 * k[0][j] + E3 * k[2][j] + E4 * k[3][j] + E5 * k[4][j] + E6 * k[5][j]
                    + E7 * k[6][j]);
            let sc = self.tol.atol + self.tol.rtol * y[j].abs().max(y_new[j].abs());
            acc += (e / sc).powi(2);
        }
        Ok((acc / n.max(1) as f64).sqrt())
    }

    /// Hairer-Norsett-Wanner starting step heuristic.
    fn initial_step<F>(&mut self, f: &mut F, t0: f64, y0: &[f64], f0: &[f64], span: f64) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y0.len();
        let sc: Vec<f64> = y0
            .iter()
            .map(|v| self.tol.atol + self.tol.rtol * v.abs())
            .collect();
        let norm = |v: &[f64]| {
            (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt()
        };
        let d0 = norm(y0);
        let d1 = norm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
        let mut f1 = vec![0.0; n];
        f(t0 + h0, &y1, &mut f1)?;
        self.stats.rhs_evals += 1;
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span))
    }
}
