//! Morison-type fluid loading on the lumped arm elements.
//!
//! Each lumping node stands for a cylindrical element of length `L / n_quad`.
//! Drag acts on the element's velocity relative to the wave particle
//! velocity, split into normal and tangential parts in the element frame.
//! Added mass is returned as generalized inertia so the equation of motion
//! stays explicit in the joint accelerations; its velocity-product term is
//! folded into the generalized force.

use nalgebra::{Complex, DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicParams, GeneralizedForce, NodeSamples};
use crate::error::Result;
use crate::kinematics::{BasePose, Configuration, SegmentGeometry};
use crate::waves::SeaState;

type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HydroCoeffs {
    /// Normal drag coefficient `C_d`.
    pub drag_normal: f64,
    /// Tangential friction coefficient `C_f`.
    pub drag_tangential: f64,
    /// Added-mass coefficient `C_a`; the inertia coefficient is `1 + C_a`.
    pub added_mass: f64,
    pub rho_fluid: f64,
    /// Also apply `M_A` to the fluid particle acceleration (Froude-Krylov
    /// style term). Off by default.
    pub fluid_acceleration: bool,
}

impl Default for HydroCoeffs {
    fn default() -> Self {
        Self {
            drag_normal: 1.1,
            drag_tangential: 0.05,
            added_mass: 1.0,
            rho_fluid: 1025.0,
            fluid_acceleration: false,
        }
    }
}

impl HydroCoeffs {
    pub fn inertia_coefficient(&self) -> f64 {
        1.0 + self.added_mass
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.drag_normal, self.drag_tangential, self.added_mass, self.rho_fluid];
        if vals.iter().any(|v| !(*v >= 0.0)) {
            return Err(crate::Error::InvalidParameter(
                "hydrodynamic coefficients must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// No fluid loading at all.
    pub fn dry() -> Self {
        Self {
            drag_normal: 0.0,
            drag_tangential: 0.0,
            added_mass: 0.0,
            rho_fluid: 0.0,
            fluid_acceleration: false,
        }
    }
}

/// Per-segment added-mass matrix `(pi d^2 / 4) L rho_f diag(C_m, C_m)`.
pub fn added_mass_matrix(geom: &SegmentGeometry, coeffs: &HydroCoeffs) -> Matrix2<f64> {
    let cm = coeffs.inertia_coefficient();
    Matrix2::from_diagonal(&Vector2::new(cm, cm)) * (geom.cross_section_area() * geom.length * coeffs.rho_fluid)
}

/// Kinematic state of one drag element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementState {
    pub position: Vector2<f64>,
    /// Tangent angle (rad).
    pub tangent: f64,
    /// Body velocity (m/s, world frame).
    pub velocity: Vector2<f64>,
    /// Incident area (m^2).
    pub area: f64,
}

/// Quadratic drag on an element, returned in the world frame (N).
pub fn drag_force(elem: &ElementState, fluid_velocity: &Vector2<f64>, coeffs: &HydroCoeffs) -> Vector2<f64> {
    let (s, c) = elem.tangent.sin_cos();
    let t_hat = Vector2::new(c, s);
    let n_hat = Vector2::new(-s, c);
    let rel = elem.velocity - fluid_velocity;
    let vn = rel.dot(&n_hat);
    let vt = rel.dot(&t_hat);
    let k = 0.5 * coeffs.rho_fluid * elem.area;
    let fn_ = -k * coeffs.drag_normal * vn.abs() * vn;
    let ft = -k * coeffs.drag_tangential * vt.abs() * vt;
    n_hat * fn_ + t_hat * ft
}

/// Generalized fluid loading for one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Disturbance {
    /// Drag plus added-mass velocity-product torques (N m).
    pub force: GeneralizedForce,
    /// `sum J^T M_A J` over the elements (kg m^2).
    pub added_inertia: DMatrix<f64>,
}

/// Flow sample at a point: particle velocity and acceleration.
pub(crate) type FlowSample = (Vector2<f64>, Vector2<f64>);

pub(crate) fn disturbance_from_nodes<F>(
    nodes: &NodeSamples,
    flow: F,
    geom: &SegmentGeometry,
    coeffs: &HydroCoeffs,
    params: &DynamicParams,
) -> Disturbance
where
    F: Fn(Vector2<f64>) -> Option<FlowSample>,
{
    let n = nodes.n;
    let elem_len = geom.length / params.nodes_per_segment as f64;
    let area = geom.diameter * elem_len;
    let added = coeffs.inertia_coefficient() * coeffs.rho_fluid * geom.cross_section_area() * elem_len;
    let mut force = GeneralizedForce::zeros(n);
    let mut added_inertia = DMatrix::zeros(n, n);
    for k in 0..nodes.len() {
        let pos = Vector2::new(nodes.pos[k].re, nodes.pos[k].im);
        // Nodes that break the surface are dry.
        let Some((vf, af)) = flow(pos) else { continue };
        let elem = ElementState {
            position: pos,
            tangent: nodes.tangent[k],
            velocity: Vector2::new(nodes.vel[k].re, nodes.vel[k].im),
            area,
        };
        let fd = drag_force(&elem, &vf, coeffs);
        let mut f = C64::new(fd.x, fd.y) - nodes.bias[k] * added;
        if coeffs.fluid_acceleration {
            f += C64::new(af.x, af.y) * added;
        }
        nodes.add_transpose(k, f, &mut force);
        nodes.add_gram(k, added, &mut added_inertia);
    }
    Disturbance {
        force,
        added_inertia,
    }
}

/// Sea-state flow field sampler; `None` above the free surface.
pub(crate) fn sea_flow(sea: &SeaState, t: f64, with_acc: bool) -> impl Fn(Vector2<f64>) -> Option<FlowSample> {
    let field = sea.field_at(t);
    let depth = sea.depth;
    move |p: Vector2<f64>| {
        if p.y > 0.0 {
            return None;
        }
        if field.is_empty() {
            return Some((Vector2::zeros(), Vector2::zeros()));
        }
        Some(field.sample(p.x, p.y.max(-depth), with_acc))
    }
}

/// Generalized disturbance `F_E` and added inertia at time `t`.
#[allow(clippy::too_many_arguments)]
pub fn generalized_disturbance(
    config: &Configuration,
    sea: &SeaState,
    t: f64,
    base: &BasePose,
    geom: &SegmentGeometry,
    coeffs: &HydroCoeffs,
    params: &DynamicParams,
) -> Disturbance {
    let nodes = NodeSamples::collect(
        config.q.as_slice(),
        config.qdot.as_slice(),
        base,
        geom,
        params.nodes_per_segment,
    );
    disturbance_from_nodes(&nodes, sea_flow(sea, t, coeffs.fluid_acceleration), geom, coeffs, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    use crate::waves::{synthesize_jonswap, JonswapSettings};

    fn uniform(u: Vector2<f64>) -> impl Fn(Vector2<f64>) -> Option<FlowSample> {
        move |_| Some((u, Vector2::zeros()))
    }

    fn nodes_for(q: &[f64], qd: &[f64], base: &BasePose, geom: &SegmentGeometry, params: &DynamicParams) -> NodeSamples {
        NodeSamples::collect(q, qd, base, geom, params.nodes_per_segment)
    }

    #[test]
    fn added_mass_hand_value() {
        let geom = SegmentGeometry::default();
        let coeffs = HydroCoeffs {
            added_mass: 1.0,
            ..Default::default()
        };
        let m = added_mass_matrix(&geom, &coeffs);
        // pi 0.05^2 / 4 * 0.3 * 1025 * 2
        assert_relative_eq!(m[(0, 0)], 1.207_549_676_223_576_7, max_relative = 1e-12);
        assert_relative_eq!(m[(0, 0)], 1.2075, epsilon = 1e-4);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(1, 0)], 0.0);
        let unit = added_mass_matrix(&geom, &HydroCoeffs { added_mass: 0.0, ..coeffs });
        assert_relative_eq!(unit[(1, 1)], geom.cross_section_area() * geom.length * 1025.0);
    }

    fn elem(velocity: Vector2<f64>, tangent: f64) -> ElementState {
        ElementState {
            position: Vector2::new(0.0, -4.0),
            tangent,
            velocity,
            area: 0.05 * 0.03,
        }
    }

    #[test]
    fn no_relative_velocity_no_drag() {
        let v = Vector2::new(0.3, -0.2);
        assert_eq!(drag_force(&elem(v, 0.7), &v, &HydroCoeffs::default()).norm(), 0.0);
    }

    #[test]
    fn normal_drag_is_quadratic() {
        let c = HydroCoeffs::default();
        // tangent along +x, normal along +z
        let f1 = drag_force(&elem(Vector2::new(0.0, 0.4), 0.0), &Vector2::zeros(), &c);
        let f2 = drag_force(&elem(Vector2::new(0.0, 0.8), 0.0), &Vector2::zeros(), &c);
        assert_relative_eq!(f2.y, 4.0 * f1.y, max_relative = 1e-14);
        assert!(f1.y < 0.0);
    }

    #[test]
    fn tangential_drag_opposes_tangent_flow() {
        let c = HydroCoeffs::default();
        let theta: f64 = 0.9;
        let t_hat = Vector2::new(theta.cos(), theta.sin());
        let e = elem(t_hat * 0.6, theta);
        let f = drag_force(&e, &Vector2::zeros(), &c);
        let expect = 0.5 * c.rho_fluid * e.area * c.drag_tangential * 0.36;
        assert_relative_eq!(f.norm(), expect, max_relative = 1e-12);
        assert_relative_eq!(f.dot(&t_hat), -expect, max_relative = 1e-12);
    }

    #[test]
    fn still_fluid_and_rest_give_zero() {
        let geom = SegmentGeometry::default();
        let config = Configuration::at_rest(DVector::from_column_slice(&[0.4, 0.9, -0.2]));
        let d = generalized_disturbance(
            &config,
            &SeaState::calm(20.0),
            3.0,
            &BasePose::hanging(4.0),
            &geom,
            &HydroCoeffs::default(),
            &DynamicParams::default(),
        );
        assert_eq!(d.force.norm(), 0.0);
    }

    #[test]
    fn uniform_crossflow_on_straight_segment() {
        // Straight single segment hanging down in horizontal flow U: the
        // generalized force is int_0^1 (L s^2 / 2) w L ds = w L^2 / 6 with
        // w = 0.5 rho C_d d U^2 the load per unit length.
        let geom = SegmentGeometry {
            segments: 1,
            ..Default::default()
        };
        let params = DynamicParams::default().with_segments(1);
        let coeffs = HydroCoeffs::default();
        let u = 0.8;
        let nodes = nodes_for(&[0.0], &[0.0], &BasePose::hanging(4.0), &geom, &params);
        let d = disturbance_from_nodes(&nodes, uniform(Vector2::new(u, 0.0)), &geom, &coeffs, &params);
        let w = 0.5 * coeffs.rho_fluid * coeffs.drag_normal * geom.diameter * u * u;
        let analytic = w * geom.length.powi(2) / 6.0;
        assert!((d.force[0] - analytic).abs() / analytic < 0.01, "{} vs {analytic}", d.force[0]);
    }

    #[test]
    fn quadrature_refinement_under_waves() {
        let geom = SegmentGeometry::default();
        let sea = synthesize_jonswap(2.0, 8.0, &JonswapSettings::default(), 4).unwrap();
        let coarse = DynamicParams::default();
        let fine = DynamicParams {
            nodes_per_segment: 20,
            ..Default::default()
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..40 {
            let a = k as f64 * 0.37;
            let q = [a.sin() * 1.5, (1.3 * a).cos(), (0.7 * a).sin() * 2.0];
            let qd = [(0.4 * a).cos() * 0.5, -(0.9 * a).sin() * 0.4, 0.3];
            let config = Configuration::from_slices(&q, &qd).unwrap();
            let t = 1.5 * k as f64;
            let c = HydroCoeffs::default();
            let f1 = generalized_disturbance(&config, &sea, t, &BasePose::hanging(4.0), &geom, &c, &coarse).force;
            let f2 = generalized_disturbance(&config, &sea, t, &BasePose::hanging(4.0), &geom, &c, &fine).force;
            num += (f1 - &f2).norm_squared();
            den += f2.norm_squared();
        }
        assert!((num / den).sqrt() < 0.01);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn added_inertia_is_symmetric_psd(q in proptest::collection::vec(-PI..PI, 3)) {
            let geom = SegmentGeometry::default();
            let config = Configuration::at_rest(DVector::from_column_slice(&q));
            let d = generalized_disturbance(&config, &SeaState::calm(20.0), 0.0, &BasePose::hanging(4.0), &geom, &HydroCoeffs::default(), &DynamicParams::default());
            prop_assert_eq!(&d.added_inertia, &d.added_inertia.transpose());
            prop_assert!(d.added_inertia.symmetric_eigen().eigenvalues.iter().all(|v| *v >= -1e-12));
        }

        #[test]
        fn drag_is_dissipative_in_still_fluid(
            q in proptest::collection::vec(-PI..PI, 3),
            qd in proptest::collection::vec(-2.0f64..2.0, 3),
        ) {
            let geom = SegmentGeometry::default();
            let params = DynamicParams::default();
            let coeffs = HydroCoeffs { added_mass: -1.0, ..Default::default() };
            // C_m = 0 isolates drag
            let nodes = nodes_for(&q, &qd, &BasePose::hanging(4.0), &geom, &params);
            let d = disturbance_from_nodes(&nodes, uniform(Vector2::zeros()), &geom, &coeffs, &params);
            prop_assert!(DVector::from_column_slice(&qd).dot(&d.force) <= 0.0);
        }

        #[test]
        fn generalized_force_is_frame_independent(
            q in proptest::collection::vec(-PI..PI, 3),
            qd in proptest::collection::vec(-2.0f64..2.0, 3),
            rot in -PI..PI,
            ux in -1.0f64..1.0,
            uz in -1.0f64..1.0,
        ) {
            let geom = SegmentGeometry::default();
            let params = DynamicParams::default();
            let coeffs = HydroCoeffs::default();
            let base = BasePose { x: 0.0, z: 0.0, heading: -PI / 2.0 };
            let turned = BasePose { heading: base.heading + rot, ..base };
            let u = Vector2::new(ux, uz);
            let (s, c) = rot.sin_cos();
            let u_rot = Vector2::new(c * ux - s * uz, s * ux + c * uz);
            let a = disturbance_from_nodes(&nodes_for(&q, &qd, &base, &geom, &params), uniform(u), &geom, &coeffs, &params);
            let b = disturbance_from_nodes(&nodes_for(&q, &qd, &turned, &geom, &params), uniform(u_rot), &geom, &coeffs, &params);
            prop_assert!((a.force - b.force).norm() <= 1e-9);
            prop_assert!((a.added_inertia - b.added_inertia).norm() <= 1e-9);
        }
    }
}
