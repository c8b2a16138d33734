//! Planar piecewise-constant-curvature kinematics.
//!
//! Segment `i` bends as a circular arc whose total bending angle is `q[i]`
//! (curvature `q[i] / L`). Points are addressed by segment index (1-based,
//! base to tip) and arc-length fraction `s` within that segment.
//!
//! Positions are handled internally as complex numbers `x + i z`: a segment
//! starting at `P` with heading `theta` places the point at fraction `s` at
//!
//! ```text
//! P + L s e^{i theta} E(s q),    E(x) = (e^{ix} - 1) / (ix) = sin x / x + i (1 - cos x) / x
//! ```
//!
//! so every Jacobian and acceleration term reduces to `E` and its first two
//! derivatives, which stay well conditioned through `q = 0`.

use nalgebra::{Complex, DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

const I: C64 = Complex { re: 0.0, im: 1.0 };

/// Below this magnitude the arc shape functions use their power series.
const SERIES_THRESHOLD: f64 = 0.5;
const SERIES_TERMS: usize = 18;

/// Joint-space state of the arm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    /// Total bending angle of each segment (rad).
    pub q: DVector<f64>,
    /// Bending rates (rad/s).
    pub qdot: DVector<f64>,
}

impl Configuration {
    pub fn new(q: DVector<f64>, qdot: DVector<f64>) -> Result<Self> {
        if q.len() != qdot.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                actual: qdot.len(),
            });
        }
        if q.iter().chain(qdot.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "configuration entries must be finite".into(),
            ));
        }
        Ok(Self { q, qdot })
    }

    pub fn at_rest(q: DVector<f64>) -> Self {
        let n = q.len();
        Self {
            q,
            qdot: DVector::zeros(n),
        }
    }

    pub fn from_slices(q: &[f64], qdot: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(q), DVector::from_column_slice(qdot))
    }

    pub fn segments(&self) -> usize {
        self.q.len()
    }
}

/// Identical-segment geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentGeometry {
    /// Segment length (m).
    pub length: f64,
    /// Cross-section diameter (m).
    pub diameter: f64,
    pub segments: usize,
}

impl Default for SegmentGeometry {
    fn default() -> Self {
        Self {
            length: 0.3,
            diameter: 0.05,
            segments: 3,
        }
    }
}

impl SegmentGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !(self.diameter > 0.0) || self.segments == 0 {
            return Err(Error::InvalidParameter(format!(
                "segment geometry needs L > 0, d_s > 0, n >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    pub fn cross_section_area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    pub fn total_length(&self) -> f64 {
        self.length * self.segments as f64
    }
}

/// Mount point and initial tangent of the arm in the world frame
/// (z = 0 at the still-water line, positive up).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasePose {
    pub x: f64,
    pub z: f64,
    /// Tangent direction at the mount (rad, measured from +x).
    pub heading: f64,
}

/// Horizontal mount (pointing along +x) 4 m below the surface.
impl Default for BasePose {
    fn default() -> Self {
        Self {
            x: 0.0,
            z: -4.0,
            heading: 0.0,
        }
    }
}

impl BasePose {
    /// Default mount moved to the given depth below the surface.
    pub fn at_depth(depth: f64) -> Self {
        Self {
            z: -depth,
            ..Self::default()
        }
    }

    /// Downward-pointing mount at the given depth.
    pub fn hanging(depth: f64) -> Self {
        Self {
            x: 0.0,
            z: -depth,
            heading: -std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z < 0.0) || !self.x.is_finite() || !self.heading.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "base must be submerged with finite pose (got {self:?})"
            )));
        }
        Ok(())
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.z)
    }
}

/// Task-space position and tangent angle of a point on the arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointPose {
    pub position: Vector2<f64>,
    pub tangent: f64,
}

/// `E`, `E'` and `E''` at `x`.
fn arc_terms(x: f64) -> [C64; 3] {
    if x.abs() < SERIES_THRESHOLD {
        // E^(m)(x) = sum_k i^(k+m) x^k / (k! (k + m + 1))
        let mut out = [C64::new(0.0, 0.0); 3];
        for (m, slot) in out.iter_mut().enumerate() {
            let mut pow_i = I.powu(m as u32);
            let mut term = 1.0; // x^k / k!
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..SERIES_TERMS {
                acc += pow_i * (term / (k + m + 1) as f64);
                term *= x / (k + 1) as f64;
                pow_i *= I;
            }
            *slot = acc;
        }
        out
    } else {
        let (s, c) = x.sin_cos();
        let f = s / x;
        let g = (1.0 - c) / x;
        let df = (c - f) / x;
        let dg = (s - g) / x;
        let ddf = (-s - 2.0 * df) / x;
        let ddg = (c - 2.0 * dg) / x;
        [C64::new(f, g), C64::new(df, dg), C64::new(ddf, ddg)]
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct SegmentFrame {
    start: C64,
    start_vel: C64,
    /// Acceleration of the segment start with zero joint accelerations.
    start_bias: C64,
    heading: f64,
    /// Unit vector along `heading`.
    dir: C64,
    heading_rate: f64,
    /// d(chord)/dq_i and its time derivative.
    chord_grad: C64,
    chord_grad_rate: C64,
}

/// Precomputed per-segment frames for one joint state; evaluating any point
/// afterwards costs O(n).
pub(crate) struct ArmChain {
    frames: Vec<SegmentFrame>,
    length: f64,
}

/// Full kinematic state of one point on the arm.
#[derive(Clone, Debug)]
pub(crate) struct PointState {
    pub pos: C64,
    pub tangent: f64,
    pub vel: C64,
    /// `J_dot * qdot`.
    pub bias: C64,
}

impl ArmChain {
    pub fn new(q: &[f64], qdot: &[f64], base: &BasePose, length: f64) -> Self {
        let n = q.len();
        let mut frames = Vec::with_capacity(n);
        let mut start = C64::new(base.x, base.z);
        let mut start_vel = C64::new(0.0, 0.0);
        let mut start_bias = C64::new(0.0, 0.0);
        let mut heading = base.heading;
        let mut heading_rate = 0.0;
        for i in 0..n {
            let [e, de, dde] = arc_terms(q[i]);
            let dir = C64::from_polar(1.0, heading);
            let rot = dir * length;
            let w = qdot[i];
            let chord_grad = rot * de;
            let chord_grad_rate = rot * (I * heading_rate * de + w * dde);
            frames.push(SegmentFrame {
                start,
                start_vel,
                start_bias,
                heading,
                dir,
                heading_rate,
                chord_grad,
                chord_grad_rate,
            });
            start += rot * e;
            start_vel += rot * (I * heading_rate * e + w * de);
            start_bias += rot
                * (-heading_rate * heading_rate * e
                    + 2.0 * I * heading_rate * w * de
                    + w * w * dde);
            heading += q[i];
            heading_rate += w;
        }
        Self { frames, length }
    }

    /// Point state plus Jacobian columns written into `jac` (length n).
    /// Columns distal to `segment` are set to zero.
    pub fn point(
        &self,
        q: &[f64],
        qdot: &[f64],
        segment: usize,
        s: f64,
        jac: &mut [C64],
    ) -> PointState {
        let f = &self.frames[segment];
        let x = s * q[segment];
        let [e, de, dde] = arc_terms(x);
        let w = f.dir * (self.length * s);
        let om = f.heading_rate;
        let sq = s * qdot[segment];
        let pos = f.start + w * e;
        let vel = f.start_vel + w * (I * om * e + sq * de);
        let bias = f.start_bias + w * (-om * om * e + 2.0 * I * om * sq * de + sq * sq * dde);
        for (m, col) in jac.iter_mut().enumerate() {
            *col = if m < segment {
                I * (pos - self.frames[m + 1].start) + self.frames[m].chord_grad
            } else if m == segment {
                w * s * de
            } else {
                C64::new(0.0, 0.0)
            };
        }
        PointState {
            pos,
            tangent: f.heading + x,
            vel,
            bias,
        }
    }

    /// Columns of `J_dot` at a point; requires the velocity from [`Self::point`].
    fn point_jac_rate(
        &self,
        q: &[f64],
        qdot: &[f64],
        segment: usize,
        s: f64,
        vel: C64,
        out: &mut [C64],
    ) {
        let f = &self.frames[segment];
        let [_, de, dde] = arc_terms(s * q[segment]);
        let w = f.dir * (self.length * s);
        for (m, col) in out.iter_mut().enumerate() {
            *col = if m < segment {
                I * (vel - self.frames[m + 1].start_vel) + self.frames[m].chord_grad_rate
            } else if m == segment {
                w * s * (I * f.heading_rate * de + s * qdot[segment] * dde)
            } else {
                C64::new(0.0, 0.0)
            };
        }
    }
}

fn check_point(n: usize, segment: usize, s: f64) -> Result<usize> {
    if segment == 0 || segment > n {
        return Err(Error::SegmentOutOfRange {
            index: segment,
            segments: n,
        });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::FractionOutOfRange(s));
    }
    Ok(segment - 1)
}

fn columns_to_matrix(cols: &[C64]) -> DMatrix<f64> {
    DMatrix::from_fn(2, cols.len(), |r, c| if r == 0 { cols[c].re } else { cols[c].im })
}

/// World-frame position and tangent angle at fraction `s` of `segment` (1-based).
pub fn forward_kinematics(
    q: &[f64],
    segment: usize,
    s: f64,
    base: &BasePose,
    geom: &SegmentGeometry,
) -> Result<PointPose> {
    let idx = check_point(q.len(), segment, s)?;
    let zeros = vec![0.0; q.len()];
    let chain = ArmChain::new(q, &zeros, base, geom.length);
    let mut jac = vec![C64::new(0.0, 0.0); q.len()];
    let p = chain.point(q, &zeros, idx, s, &mut jac);
    Ok(PointPose {
        position: Vector2::new(p.pos.re, p.pos.im),
        tangent: p.tangent,
    })
}

/// Tip of the distal segment.
pub fn tip_position(q: &[f64], base: &BasePose, geom: &SegmentGeometry) -> Vector2<f64> {
    forward_kinematics(q, q.len(), 1.0, base, geom)
        .map(|p| p.position)
        .unwrap_or_else(|_| base.position())
}

/// Tips of every segment, proximal first.
pub fn segment_tips(q: &[f64], base: &BasePose, geom: &SegmentGeometry) -> Vec<Vector2<f64>> {
    let zeros = vec![0.0; q.len()];
    let chain = ArmChain::new(q, &zeros, base, geom.length);
    let mut jac = vec![C64::new(0.0, 0.0); q.len()];
    (0..q.len())
        .map(|i| {
            let p = chain.point(q, &zeros, i, 1.0, &mut jac);
            Vector2::new(p.pos.re, p.pos.im)
        })
        .collect()
}

/// `dh/dq` at a point: a 2 x n matrix (rows x, z).
pub fn jacobian(
    q: &[f64],
    segment: usize,
    s: f64,
    base: &BasePose,
    geom: &SegmentGeometry,
) -> Result<DMatrix<f64>> {
    let idx = check_point(q.len(), segment, s)?;
    let zeros = vec![0.0; q.len()];
    let chain = ArmChain::new(q, &zeros, base, geom.length);
    let mut jac = vec![C64::new(0.0, 0.0); q.len()];
    chain.point(q, &zeros, idx, s, &mut jac);
    Ok(columns_to_matrix(&jac))
}

/// Time derivative of the Jacobian along the motion `qdot`.
pub fn jacobian_rate(
    q: &[f64],
    qdot: &[f64],
    segment: usize,
    s: f64,
    base: &BasePose,
    geom: &SegmentGeometry,
) -> Result<DMatrix<f64>> {
    let idx = check_point(q.len(), segment, s)?;
    if qdot.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            actual: qdot.len(),
        });
    }
    let chain = ArmChain::new(q, qdot, base, geom.length);
    let mut jac = vec![C64::new(0.0, 0.0); q.len()];
    let p = chain.point(q, qdot, idx, s, &mut jac);
    chain.point_jac_rate(q, qdot, idx, s, p.vel, &mut jac);
    Ok(columns_to_matrix(&jac))
}

/// Moore-Penrose pseudo-inverse with Tikhonov damping `lambda`:
/// `J^T (J J^T + lambda I)^-1`.
pub fn damped_pseudo_inverse(jac: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let rows = jac.nrows();
    let jjt = jac * jac.transpose() + DMatrix::identity(rows, rows) * lambda;
    match jjt.clone().cholesky() {
        Some(ch) => jac.transpose() * ch.inverse(),
        None => jac.transpose() * jjt.pseudo_inverse(1e-12).unwrap_or_else(|_| DMatrix::zeros(rows, rows)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn origin_down() -> BasePose {
        BasePose {
            x: 0.0,
            z: 0.0,
            heading: -PI / 2.0,
        }
    }

    #[test]
    fn straight_arm_hangs_full_length() {
        let geom = SegmentGeometry::default();
        let p = forward_kinematics(&[0.0; 3], 3, 1.0, &BasePose::hanging(4.0), &geom).unwrap();
        assert_relative_eq!(p.position.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(p.position.y, -4.9, epsilon = 1e-12);
        assert_relative_eq!(p.tangent, -PI / 2.0);
    }

    #[test]
    fn half_circle_chord() {
        let geom = SegmentGeometry::default();
        let p = forward_kinematics(&[PI, 0.0, 0.0], 1, 1.0, &origin_down(), &geom).unwrap();
        // chord 2 R sin(q/2) with R = L/q
        let chord = 2.0 * (0.3 / PI) * (PI / 2.0).sin();
        assert_relative_eq!(p.position.norm(), chord, epsilon = 1e-12);
        assert_relative_eq!(chord, 0.190_985_931_710_274_4, epsilon = 1e-12);
        assert_relative_eq!(p.tangent - (-PI / 2.0), PI, epsilon = 1e-12);
    }

    #[test]
    fn near_zero_curvature_series_matches_exact_arc() {
        // Evaluate the exact arc closed form directly at q = 1e-9 and compare
        // with the series branch used by forward_kinematics.
        let geom = SegmentGeometry::default();
        let base = origin_down();
        let q = 1e-9;
        let r = geom.length / q;
        let exact = Vector2::new(2.0 * r * (0.5 * q).sin().powi(2), -r * q.sin());
        let p = forward_kinematics(&[q, 0.0, 0.0], 1, 1.0, &base, &geom).unwrap();
        assert!((p.position - exact).norm() < 1e-12);
        // and the straight limit differs only to first order in q
        let straight = forward_kinematics(&[0.0; 3], 1, 1.0, &base, &geom).unwrap();
        assert!((p.position - straight.position).norm() <= geom.length * q);
    }

    #[test]
    fn series_and_closed_form_agree_at_switchover() {
        for x in [SERIES_THRESHOLD * (1.0 - 1e-12), -SERIES_THRESHOLD * (1.0 - 1e-12)] {
            let series = arc_terms(x);
            let closed = arc_terms(x * (1.0 + 2e-12));
            for (a, b) in series.iter().zip(closed.iter()) {
                assert!((a - b).norm() < 1e-11, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn continuity_across_straight_configuration() {
        let geom = SegmentGeometry::default();
        let base = BasePose::hanging(4.0);
        let mut last = f64::INFINITY;
        for eps in [1e-3, 1e-6, 1e-9] {
            let a = tip_position(&[eps, 0.2, -0.1], &base, &geom);
            let b = tip_position(&[-eps, 0.2, -0.1], &base, &geom);
            let gap = (a - b).norm();
            assert!(gap < last);
            assert!(gap <= 2.0 * eps * geom.total_length());
            last = gap;
        }
    }

    #[test]
    fn arc_length_is_preserved() {
        // Simpson quadrature of |dh/ds| over each segment.
        let geom = SegmentGeometry::default();
        let base = BasePose::hanging(4.0);
        let q = [2.3, -0.7, 1e-8];
        for seg in 1..=3 {
            let n = 200;
            let speed = |s: f64| {
                let h = 1e-6;
                let lo = (s - h).max(0.0);
                let hi = (s + h).min(1.0);
                let a = forward_kinematics(&q, seg, lo, &base, &geom).unwrap().position;
                let b = forward_kinematics(&q, seg, hi, &base, &geom).unwrap().position;
                (b - a).norm() / (hi - lo)
            };
            let mut acc = speed(0.0) + speed(1.0);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * speed(k as f64 / n as f64);
            }
            let length = acc / (3.0 * n as f64);
            assert!((length - geom.length).abs() < 1e-8, "segment {seg}: {length}");
        }
    }

    #[test]
    fn distal_columns_vanish() {
        let geom = SegmentGeometry::default();
        let j = jacobian(&[0.4, -1.0, 2.0], 1, 0.7, &BasePose::hanging(4.0), &geom).unwrap();
        assert_eq!(j.column(1).norm(), 0.0);
        assert_eq!(j.column(2).norm(), 0.0);
    }

    #[test]
    fn straight_rod_tip_jacobian() {
        // At q = 0 the tip of a single arc moves sideways by L/2 per radian.
        let geom = SegmentGeometry::default();
        let j = jacobian(&[0.0, 0.0, 0.0], 1, 1.0, &origin_down(), &geom).unwrap();
        assert_relative_eq!(j[(0, 0)], geom.length / 2.0, epsilon = 1e-15);
        assert_relative_eq!(j[(1, 0)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_segment_is_rejected() {
        let geom = SegmentGeometry::default();
        let base = BasePose::hanging(4.0);
        assert!(matches!(
            forward_kinematics(&[0.0; 3], 4, 0.5, &base, &geom),
            Err(Error::SegmentOutOfRange { .. })
        ));
        assert!(jacobian(&[0.0; 3], 0, 0.5, &base, &geom).is_err());
        assert!(forward_kinematics(&[0.0; 3], 1, 1.5, &base, &geom).is_err());
    }

    #[test]
    fn jacobian_rate_zero_at_rest() {
        let geom = SegmentGeometry::default();
        let jd = jacobian_rate(&[0.3, 0.2, -1.0], &[0.0; 3], 3, 0.5, &BasePose::hanging(4.0), &geom)
            .unwrap();
        assert_eq!(jd.norm(), 0.0);
    }

    #[test]
    fn single_segment_spin_is_centripetal() {
        // A straight one-segment arm spun about its base would trace a
        // circle; for PCC the tip of a constant-curvature arc at rate w has
        // J_dot w computable from the closed-form chord. Check against
        // second differences of the tip trajectory q(t) = q0 + w t.
        let geom = SegmentGeometry {
            segments: 1,
            ..Default::default()
        };
        let base = origin_down();
        let (q0, w) = (0.8, 1.7);
        let jd = jacobian_rate(&[q0], &[w], 1, 1.0, &base, &geom).unwrap();
        let acc = jd.column(0) * w;
        let h = 1e-4;
        let tip = |t: f64| tip_position(&[q0 + w * t], &base, &geom);
        let fd = (tip(h) - 2.0 * tip(0.0) + tip(-h)) / (h * h);
        assert!((&acc - &fd).norm() < 1e-5 * fd.norm().max(1.0), "{acc} vs {fd}");
    }

    #[test]
    fn pseudo_inverse_is_right_inverse_for_full_rank() {
        let geom = SegmentGeometry::default();
        let j = jacobian(&[0.5, 0.4, 0.3], 3, 1.0, &BasePose::hanging(4.0), &geom).unwrap();
        let p = damped_pseudo_inverse(&j, 0.0);
        let id = &j * p;
        assert!((id - DMatrix::identity(2, 2)).norm() < 1e-10);
    }

    fn fd_jacobian(q: &[f64], seg: usize, s: f64, base: &BasePose, geom: &SegmentGeometry) -> DMatrix<f64> {
        let h = 1e-6;
        let mut out = DMatrix::zeros(2, q.len());
        for m in 0..q.len() {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[m] += h;
            qm[m] -= h;
            let a = forward_kinematics(&qp, seg, s, base, geom).unwrap().position;
            let b = forward_kinematics(&qm, seg, s, base, geom).unwrap().position;
            out.set_column(m, &((a - b) / (2.0 * h)));
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn jacobian_matches_central_differences(
            q in proptest::collection::vec(-PI..PI, 3),
            seg in 1usize..=3,
            s in 0.0f64..=1.0,
        ) {
            let geom = SegmentGeometry::default();
            let base = BasePose::hanging(4.0);
            let j = jacobian(&q, seg, s, &base, &geom).unwrap();
            let fd = fd_jacobian(&q, seg, s, &base, &geom);
            let scale = fd.norm().max(1e-3);
            prop_assert!((j - &fd).norm() <= 1e-5 * scale);
        }

        #[test]
        fn jacobian_rate_matches_directional_difference(
            q in proptest::collection::vec(-PI..PI, 3),
            qdot in proptest::collection::vec(-2.0f64..2.0, 3),
            seg in 1usize..=3,
            s in 0.0f64..=1.0,
        ) {
            let geom = SegmentGeometry::default();
            let base = BasePose::hanging(4.0);
            let h = 1e-6;
            let qp: Vec<f64> = q.iter().zip(&qdot).map(|(a, b)| a + b * h).collect();
            let qm: Vec<f64> = q.iter().zip(&qdot).map(|(a, b)| a - b * h).collect();
            let fd = (jacobian(&qp, seg, s, &base, &geom).unwrap()
                - jacobian(&qm, seg, s, &base, &geom).unwrap()) / (2.0 * h);
            let jd = jacobian_rate(&q, &qdot, seg, s, &base, &geom).unwrap();
            let scale = fd.norm().max(1e-3);
            prop_assert!((jd - &fd).norm() <= 1e-4 * scale);
        }

        #[test]
        fn acceleration_bias_is_jdot_qdot(
            q in proptest::collection::vec(-PI..PI, 3),
            qdot in proptest::collection::vec(-2.0f64..2.0, 3),
            seg in 0usize..3,
            s in 0.0f64..=1.0,
        ) {
            let geom = SegmentGeometry::default();
            let base = BasePose::hanging(4.0);
            let chain = ArmChain::new(&q, &qdot, &base, geom.length);
            let mut cols = vec![C64::new(0.0, 0.0); 3];
            let p = chain.point(&q, &qdot, seg, s, &mut cols);
            let jd = jacobian_rate(&q, &qdot, seg + 1, s, &base, &geom).unwrap();
            let expect = jd * DVector::from_column_slice(&qdot);
            prop_assert!((p.bias.re - expect[0]).abs() < 1e-12);
            prop_assert!((p.bias.im - expect[1]).abs() < 1e-12);
            let j = columns_to_matrix(&cols);
            let v = j * DVector::from_column_slice(&qdot);
            prop_assert!((p.vel.re - v[0]).abs() < 1e-12);
            prop_assert!((p.vel.im - v[1]).abs() < 1e-12);
        }
    }
}
