//! Irregular long-crested sea states under linear wave theory.
//!
//! A sea state is a fixed set of monochromatic components. Each component
//! carries a height parameter `A` whose half is the cosine amplitude of the
//! surface elevation, so the component variance is `(A/2)^2 / 2`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    /// Height parameter `A` (m); cosine amplitude is `A/2`.
    pub height: f64,
    pub period: f64,
    pub phase: f64,
    pub omega: f64,
    pub wavenumber: f64,
    pub wavelength: f64,
}

impl WaveComponent {
    pub fn new(height: f64, omega: f64, phase: f64, depth: f64) -> Result<Self> {
        if !(height >= 0.0) || !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wave component needs A >= 0 and omega > 0 (got A = {height}, omega = {omega})"
            )));
        }
        let k = dispersion_solve(omega, depth, GRAVITY)?;
        Ok(Self {
            height,
            period: 2.0 * PI / omega,
            phase,
            omega,
            wavenumber: k,
            wavelength: 2.0 * PI / k,
        })
    }

    pub fn amplitude(&self) -> f64 {
        0.5 * self.height
    }
}

/// Table I spectral cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WaveCase {
    W1,
    W2,
    W3,
}

impl WaveCase {
    pub const ALL: [WaveCase; 3] = [WaveCase::W1, WaveCase::W2, WaveCase::W3];

    /// Spectral peak period (s).
    pub fn peak_period(self) -> f64 {
        match self {
            WaveCase::W1 => 6.1,
            WaveCase::W2 => 8.0,
            WaveCase::W3 => 10.0,
        }
    }

    /// Significant heights swept for every case: 0.5 to 3 m in 0.5 m steps.
    pub fn height_grid() -> [f64; 6] {
        [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    }

    pub fn name(self) -> &'static str {
        match self {
            WaveCase::W1 => "W1",
            WaveCase::W2 => "W2",
            WaveCase::W3 => "W3",
        }
    }
}

impl std::str::FromStr for WaveCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "W1" => Ok(WaveCase::W1),
            "W2" => Ok(WaveCase::W2),
            "W3" => Ok(WaveCase::W3),
            _ => Err(Error::InvalidParameter(format!("unknown wave case `{s}`"))),
        }
    }
}

impl std::fmt::Display for WaveCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// JONSWAP synthesis settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JonswapSettings {
    pub gamma: f64,
    pub components: usize,
    /// Water depth (m).
    pub depth: f64,
    /// Frequency band as multiples of the peak frequency.
    pub band: (f64, f64),
}

impl Default for JonswapSettings {
    fn default() -> Self {
        Self {
            gamma: 3.3,
            components: 50,
            depth: 20.0,
            band: (0.5, 3.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeaState {
    pub components: Vec<WaveComponent>,
    pub depth: f64,
    pub significant_height: f64,
    pub peak_period: f64,
    pub seed: u64,
}

/// Wave number from `omega^2 = g k tanh(k d)` by safeguarded Newton iteration.
pub fn dispersion_solve(omega: f64, depth: f64, g: f64) -> Result<f64> {
    if !(omega > 0.0) || !(depth > 0.0) || !(g > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dispersion needs omega, depth, g > 0 (got {omega}, {depth}, {g})"
        )));
    }
    let w2 = omega * omega;
    let tol = 1e-13 * w2.max(1.0);
    let mut k = w2 / g;
    for _ in 0..100 {
        let th = (k * depth).tanh();
        let f = g * k * th - w2;
        if f.abs() <= tol {
            return Ok(k);
        }
        let sech2 = 1.0 - th * th;
        let df = g * th + g * k * depth * sech2;
        let next = k - f / df;
        k = if next > 0.0 { next } else { 0.5 * k };
    }
    let f = g * k * (k * depth).tanh() - w2;
    if f.abs() <= 1e-10 {
        Ok(k)
    } else {
        Err(Error::DispersionNoConvergence { omega, depth })
    }
}

/// JONSWAP spectral density `S(omega)` (m^2 s) in the DNV parameterisation.
pub fn jonswap_density(omega: f64, hs: f64, tp: f64, gamma: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let wp = 2.0 * PI / tp;
    let norm = 1.0 - 0.287 * gamma.ln();
    let ratio = wp / omega;
    let pm = 5.0 / 16.0 * hs * hs * wp.powi(4) * omega.powi(-5) * (-1.25 * ratio.powi(4)).exp();
    let sigma = if omega <= wp { 0.07 } else { 0.09 };
    let r = (-(omega - wp).powi(2) / (2.0 * sigma * sigma * wp * wp)).exp();
    norm * pm * gamma.powf(r)
}

/// Discretise a JONSWAP spectrum into `components` waves with seeded phases.
pub fn synthesize_jonswap(hs: f64, tp: f64, settings: &JonswapSettings, seed: u64) -> Result<SeaState> {
    if !(hs > 0.0) || !(tp > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "JONSWAP needs Hs > 0 and Tp > 0 (got {hs}, {tp})"
        )));
    }
    if settings.components < 8 {
        return Err(Error::InvalidParameter("need at least 8 wave components".into()));
    }
    let wp = 2.0 * PI / tp;
    let (lo, hi) = settings.band;
    let dw = (hi - lo) * wp / settings.components as f64;
    let omegas: Vec<f64> = (0..settings.components)
        .map(|i| lo * wp + (i as f64 + 0.5) * dw)
        .collect();
    let density: Vec<f64> = omegas
        .iter()
        .map(|w| jonswap_density(*w, hs, tp, settings.gamma))
        .collect();
    let widths = vec![dw; omegas.len()];
    let mut sea = SeaState::from_discrete(&omegas, &density, &widths, settings.depth, seed)?;
    sea.significant_height = hs;
    sea.peak_period = tp;
    Ok(sea)
}

impl SeaState {
    /// Still water.
    pub fn calm(depth: f64) -> Self {
        Self {
            components: Vec::new(),
            depth,
            significant_height: 0.0,
            peak_period: 0.0,
            seed: 0,
        }
    }

    /// Components from sampled spectral density: `A/2 = sqrt(2 S dw)`.
    pub fn from_discrete(
        omegas: &[f64],
        density: &[f64],
        widths: &[f64],
        depth: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(depth > 0.0) {
            return Err(Error::InvalidParameter(format!("water depth must be positive (got {depth})")));
        }
        if omegas.is_empty() || omegas.len() != density.len() || omegas.len() != widths.len() {
            return Err(Error::InvalidParameter("spectrum samples must be non-empty and aligned".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let components = omegas
            .iter()
            .zip(density)
            .zip(widths)
            .map(|((&w, &s), &dw)| {
                let phase = rng.gen_range(0.0..2.0 * PI);
                WaveComponent::new(2.0 * (2.0 * s.max(0.0) * dw).sqrt(), w, phase, depth)
            })
            .collect::<Result<Vec<_>>>()?;
        let peak = omegas
            .iter()
            .zip(density)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(w, _)| 2.0 * PI / w)
            .unwrap_or(0.0);
        let mut sea = Self {
            components,
            depth,
            significant_height: 0.0,
            peak_period: peak,
            seed,
        };
        sea.significant_height = sea.recovered_hs();
        Ok(sea)
    }

    /// Load a two-column `omega,S` spectrum file and synthesise components
    /// on its frequency grid.
    pub fn from_spectrum_file(path: &Path, depth: f64, seed: u64) -> Result<Self> {
        let (omegas, density) = read_spectrum(path)?;
        let n = omegas.len();
        let widths: Vec<f64> = (0..n)
            .map(|i| {
                let lo = if i == 0 { omegas[0] } else { 0.5 * (omegas[i - 1] + omegas[i]) };
                let hi = if i + 1 == n { omegas[n - 1] } else { 0.5 * (omegas[i] + omegas[i + 1]) };
                if n == 1 { 0.0 } else { hi - lo }
            })
            .collect();
        Self::from_discrete(&omegas, &density, &widths, depth, seed)
    }

    pub fn is_calm(&self) -> bool {
        self.components.iter().all(|c| c.height == 0.0)
    }

    /// Zeroth spectral moment of the discrete component set (m^2).
    pub fn zeroth_moment(&self) -> f64 {
        self.components.iter().map(|c| 0.5 * c.amplitude().powi(2)).sum()
    }

    /// `4 sqrt(m0)`.
    pub fn recovered_hs(&self) -> f64 {
        4.0 * self.zeroth_moment().sqrt()
    }

    /// Free-surface elevation `zeta(x, t)`.
    pub fn elevation(&self, x: f64, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.amplitude() * (c.wavenumber * x - c.omega * t + c.phase).cos())
            .sum()
    }

    fn check_depth(&self, z: f64) -> Result<()> {
        if z > 0.0 || z < -self.depth || !z.is_finite() {
            return Err(Error::OutsideWaterColumn { z, depth: self.depth });
        }
        Ok(())
    }

    /// Horizontal and vertical particle velocity at `(x, z, t)`.
    pub fn particle_velocity(&self, x: f64, z: f64, t: f64) -> Result<Vector2<f64>> {
        self.check_depth(z)?;
        Ok(self.velocity_unchecked(x, z, t))
    }

    /// Analytic time derivative of [`Self::particle_velocity`].
    pub fn particle_acceleration(&self, x: f64, z: f64, t: f64) -> Result<Vector2<f64>> {
        self.check_depth(z)?;
        Ok(self.acceleration_unchecked(x, z, t))
    }

    pub(crate) fn velocity_unchecked(&self, x: f64, z: f64, t: f64) -> Vector2<f64> {
        let mut u = 0.0;
        let mut w = 0.0;
        for c in &self.components {
            let (ch, sh) = depth_factors(c.wavenumber, z, self.depth);
            let (s, co) = (c.wavenumber * x - c.omega * t + c.phase).sin_cos();
            let amp = c.omega * c.amplitude();
            u += amp * ch * co;
            w += amp * sh * s;
        }
        Vector2::new(u, w)
    }

    pub(crate) fn acceleration_unchecked(&self, x: f64, z: f64, t: f64) -> Vector2<f64> {
        let mut du = 0.0;
        let mut dw = 0.0;
        for c in &self.components {
            let (ch, sh) = depth_factors(c.wavenumber, z, self.depth);
            let (s, co) = (c.wavenumber * x - c.omega * t + c.phase).sin_cos();
            let amp = c.omega * c.omega * c.amplitude();
            du += amp * ch * s;
            dw -= amp * sh * co;
        }
        Vector2::new(du, dw)
    }

    /// Kinematics snapshot at time `t`, cheaper to sample at many points.
    pub(crate) fn field_at(&self, t: f64) -> FlowField {
        let terms = self
            .components
            .iter()
            .map(|c| {
                let k = c.wavenumber;
                let denom = -(-2.0 * k * self.depth).exp_m1();
                let (s, co) = (c.phase - c.omega * t).sin_cos();
                let amp = c.omega * c.amplitude() / denom;
                FieldTerm {
                    k,
                    vel: amp,
                    acc: amp * c.omega,
                    bed: (-2.0 * k * self.depth).exp(),
                    sin_t: s,
                    cos_t: co,
                }
            })
            .collect();
        FlowField { terms }
    }

    /// Spectrum samples `(omega, S)` implied by the component set.
    pub fn spectrum_samples(&self) -> Vec<(f64, f64)> {
        let n = self.components.len();
        (0..n)
            .map(|i| {
                let c = &self.components[i];
                let dw = if n < 2 {
                    1.0
                } else if i + 1 < n {
                    self.components[i + 1].omega - c.omega
                } else {
                    c.omega - self.components[i - 1].omega
                };
                (c.omega, c.amplitude().powi(2) / (2.0 * dw))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct FieldTerm {
    k: f64,
    vel: f64,
    acc: f64,
    bed: f64,
    sin_t: f64,
    cos_t: f64,
}

/// Per-component terms of a sea state frozen at one instant.
#[derive(Clone, Debug)]
pub(crate) struct FlowField {
    terms: Vec<FieldTerm>,
}

impl FlowField {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Velocity and, if requested, acceleration at `(x, z)` with `-d <= z <= 0`.
    pub fn sample(&self, x: f64, z: f64, with_acc: bool) -> (Vector2<f64>, Vector2<f64>) {
        let (mut u, mut w, mut du, mut dw) = (0.0, 0.0, 0.0, 0.0);
        for c in &self.terms {
            let decay = (c.k * z).exp();
            let below = c.bed / decay / decay;
            let ch = decay * (1.0 + below);
            let sh = decay * (1.0 - below);
            let (sx, cx) = (c.k * x).sin_cos();
            let co = cx * c.cos_t - sx * c.sin_t;
            let s = sx * c.cos_t + cx * c.sin_t;
            u += c.vel * ch * co;
            w += c.vel * sh * s;
            if with_acc {
                du += c.acc * ch * s;
                dw -= c.acc * sh * co;
            }
        }
        (Vector2::new(u, w), Vector2::new(du, dw))
    }
}

/// `cosh(k(z+d))/sinh(kd)` and `sinh(k(z+d))/sinh(kd)` without overflow.
fn depth_factors(k: f64, z: f64, d: f64) -> (f64, f64) {
    let decay = (k * z).exp();
    let below = (-2.0 * k * (z + d)).exp();
    let denom = -(-2.0 * k * d).exp_m1();
    let sh_num = -(-2.0 * k * (z + d)).exp_m1();
    (decay * (1.0 + below) / denom, decay * sh_num / denom)
}

pub fn read_spectrum(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "omega" || &headers[1] != "S" {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "expected header `omega,S`".into(),
        });
    }
    let mut omegas = Vec::new();
    let mut density = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("row {}: {e}", line + 2),
            })
        };
        omegas.push(parse(&rec[0])?);
        density.push(parse(&rec[1])?);
    }
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "omega column must be strictly increasing".into(),
        });
    }
    Ok((omegas, density))
}

pub fn write_spectrum(path: &Path, samples: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["omega", "S"])?;
    for (o, s) in samples {
        w.write_record([o.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
