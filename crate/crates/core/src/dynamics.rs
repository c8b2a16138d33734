//! Lumped-parameter rigid-body-equivalent dynamics
//!
//! ```text
//! M(q) qdd + C(q, qd) qd + D qd + K(q) + G(q) = tau + F_E
//! ```
//!
//! Each segment is discretised into `nodes_per_segment` point masses at the
//! arc-length midpoints of equal sub-elements. Inertia and gravity follow
//! from the node Jacobians; the Coriolis vector uses the exact point-mass
//! identity `C qd = sum m J^T (J_dot qd)`, while [`coriolis_matrix`] builds the
//! Christoffel form for analysis.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{ArmChain, BasePose, Configuration, SegmentGeometry};

type C64 = Complex<f64>;

pub type GeneralizedForce = DVector<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicParams {
    /// Body density (kg/m^3).
    pub rho_body: f64,
    /// Fluid density (kg/m^3).
    pub rho_fluid: f64,
    pub gravity: f64,
    /// Per-joint elastic stiffness (N m/rad).
    pub stiffness: Vec<f64>,
    /// Per-joint viscous damping (N m s/rad).
    pub damping: Vec<f64>,
    pub nodes_per_segment: usize,
}

impl Default for DynamicParams {
    fn default() -> Self {
        Self {
            rho_body: 1100.0,
            rho_fluid: 1025.0,
            gravity: 9.81,
            stiffness: vec![2.0; 3],
            damping: vec![0.5; 3],
            nodes_per_segment: 10,
        }
    }
}

impl DynamicParams {
    pub fn validate(&self, segments: usize) -> Result<()> {
        let positive = [self.rho_body, self.rho_fluid, self.gravity];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(
                "densities and gravity must be positive".into(),
            ));
        }
        if self.stiffness.len() != segments || self.damping.len() != segments {
            return Err(Error::DimensionMismatch {
                expected: segments,
                actual: self.stiffness.len().min(self.damping.len()),
            });
        }
        if self.stiffness.iter().chain(&self.damping).any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "stiffness and damping must be non-negative".into(),
            ));
        }
        if self.nodes_per_segment < 4 {
            return Err(Error::InvalidParameter(
                "need at least 4 lumping nodes per segment".into(),
            ));
        }
        Ok(())
    }

    pub fn node_mass(&self, geom: &SegmentGeometry) -> f64 {
        self.rho_body * self.node_volume(geom)
    }

    pub fn node_volume(&self, geom: &SegmentGeometry) -> f64 {
        geom.cross_section_area() * geom.length / self.nodes_per_segment as f64
    }

    /// Net downward force on a node: weight minus buoyancy (N).
    pub fn node_net_weight(&self, geom: &SegmentGeometry) -> f64 {
        (self.rho_body - self.rho_fluid) * self.node_volume(geom) * self.gravity
    }

    pub fn node_fractions(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.nodes_per_segment;
        (0..n).map(move |j| (j as f64 + 0.5) / n as f64)
    }

    pub fn with_segments(mut self, segments: usize) -> Self {
        let k = self.stiffness.first().copied().unwrap_or(2.0);
        let d = self.damping.first().copied().unwrap_or(0.5);
        self.stiffness = vec![k; segments];
        self.damping = vec![d; segments];
        self
    }
}

/// Kinematic samples of every lumping node for one joint state.
pub(crate) struct NodeSamples {
    pub n: usize,
    pub segment: Vec<usize>,
    pub pos: Vec<C64>,
    pub tangent: Vec<f64>,
    pub vel: Vec<C64>,
    pub bias: Vec<C64>,
    /// Row-major `nodes x n` Jacobian columns (x + i z).
    pub jac: Vec<C64>,
}

impl NodeSamples {
    pub fn collect(
        q: &[f64],
        qdot: &[f64],
        base: &BasePose,
        geom: &SegmentGeometry,
        nodes_per_segment: usize,
    ) -> Self {
        let n = q.len();
        let count = n * nodes_per_segment;
        let chain = ArmChain::new(q, qdot, base, geom.length);
        let mut out = Self {
            n,
            segment: Vec::with_capacity(count),
            pos: Vec::with_capacity(count),
            tangent: Vec::with_capacity(count),
            vel: Vec::with_capacity(count),
            bias: Vec::with_capacity(count),
            jac: vec![C64::new(0.0, 0.0); count * n],
        };
        let mut idx = 0;
        for seg in 0..n {
            for j in 0..nodes_per_segment {
                let s = (j as f64 + 0.5) / nodes_per_segment as f64;
                let p = chain.point(q, qdot, seg, s, &mut out.jac[idx * n..(idx + 1) * n]);
                out.segment.push(seg);
                out.pos.push(p.pos);
                out.tangent.push(p.tangent);
                out.vel.push(p.vel);
                out.bias.push(p.bias);
                idx += 1;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn jac(&self, node: usize) -> &[C64] {
        &self.jac[node * self.n..(node + 1) * self.n]
    }

    /// `out += weight * J^T J` for one node.
    pub fn add_gram(&self, node: usize, weight: f64, out: &mut DMatrix<f64>) {
        let n = self.n;
        let j = self.jac(node);
        let out = &mut out.as_mut_slice()[..n * n];
        for a in 0..n {
            let wa = j[a] * weight;
            out[a * n + a] += wa.re * j[a].re + wa.im * j[a].im;
            for b in a + 1..n {
                let v = wa.re * j[b].re + wa.im * j[b].im;
                out[a * n + b] += v;
                out[b * n + a] += v;
            }
        }
    }

    /// `out += J^T f` for a world-frame force `f`.
    pub fn add_transpose(&self, node: usize, f: C64, out: &mut DVector<f64>) {
        for (o, j) in out.iter_mut().zip(self.jac(node)) {
            *o += j.re * f.re + j.im * f.im;
        }
    }
}

/// Inertia, Coriolis vector and gravity-buoyancy vector from one node pass.
pub(crate) struct RigidTerms {
    pub mass: DMatrix<f64>,
    pub coriolis: DVector<f64>,
    pub gravity: DVector<f64>,
}

pub(crate) fn rigid_terms(
    nodes: &NodeSamples,
    geom: &SegmentGeometry,
    params: &DynamicParams,
) -> RigidTerms {
    let n = nodes.n;
    let m = params.node_mass(geom);
    // Potential gradient: upward z positive, so weight contributes +w dz/dq.
    let weight = C64::new(0.0, params.node_net_weight(geom));
    let mut mass = DMatrix::zeros(n, n);
    let mut coriolis = DVector::zeros(n);
    let mut gravity = DVector::zeros(n);
    for k in 0..nodes.len() {
        nodes.add_gram(k, m, &mut mass);
        nodes.add_transpose(k, nodes.bias[k] * m, &mut coriolis);
        nodes.add_transpose(k, weight, &mut gravity);
    }
    RigidTerms {
        mass,
        coriolis,
        gravity,
    }
}

fn nodes_at(q: &[f64], qdot: &[f64], base: &BasePose, geom: &SegmentGeometry, params: &DynamicParams) -> NodeSamples {
    NodeSamples::collect(q, qdot, base, geom, params.nodes_per_segment)
}

/// `M(q) = sum_j m_j J_j^T J_j`; symmetric positive definite.
pub fn mass_matrix(q: &[f64], geom: &SegmentGeometry, params: &DynamicParams) -> DMatrix<f64> {
    let zeros = vec![0.0; q.len()];
    let nodes = nodes_at(q, &zeros, &BasePose::default(), geom, params);
    let m = params.node_mass(geom);
    let mut mass = DMatrix::zeros(q.len(), q.len());
    for k in 0..nodes.len() {
        nodes.add_gram(k, m, &mut mass);
    }
    mass
}

/// Central-difference partials `dM/dq_i`.
fn mass_partials(q: &[f64], geom: &SegmentGeometry, params: &DynamicParams) -> Vec<DMatrix<f64>> {
    const STEP: f64 = 1e-6;
    (0..q.len())
        .map(|i| {
            let mut qp = q.to_vec();
            let mut qm = q.to_vec();
            qp[i] += STEP;
            qm[i] -= STEP;
            (mass_matrix(&qp, geom, params) - mass_matrix(&qm, geom, params)) / (2.0 * STEP)
        })
        .collect()
}

/// Christoffel-symbol Coriolis matrix built from finite-difference partials
/// of the mass matrix.
pub fn coriolis_matrix(
    q: &[f64],
    qdot: &[f64],
    geom: &SegmentGeometry,
    params: &DynamicParams,
) -> DMatrix<f64> {
    let n = q.len();
    let dm = mass_partials(q, geom, params);
    DMatrix::from_fn(n, n, |k, j| {
        (0..n)
            .map(|i| 0.5 * (dm[i][(k, j)] + dm[j][(k, i)] - dm[k][(i, j)]) * qdot[i])
            .sum()
    })
}

/// Time derivative of the mass matrix along `qdot` (finite differences).
pub fn mass_matrix_rate(
    q: &[f64],
    qdot: &[f64],
    geom: &SegmentGeometry,
    params: &DynamicParams,
) -> DMatrix<f64> {
    mass_partials(q, geom, params)
        .into_iter()
        .zip(qdot)
        .fold(DMatrix::zeros(q.len(), q.len()), |acc, (d, w)| acc + d * *w)
}

/// Coriolis and centrifugal generalized force `C(q, qd) qd`.
pub fn coriolis_force(
    q: &[f64],
    qdot: &[f64],
    geom: &SegmentGeometry,
    params: &DynamicParams,
) -> GeneralizedForce {
    let nodes = nodes_at(q, qdot, &BasePose::default(), geom, params);
    let m = params.node_mass(geom);
    let mut out = DVector::zeros(q.len());
    for k in 0..nodes.len() {
        nodes.add_transpose(k, nodes.bias[k] * m, &mut out);
    }
    out
}

/// Linear elastic restoring torque `diag(k) q`.
pub fn stiffness_vector(q: &[f64], params: &DynamicParams) -> GeneralizedForce {
    DVector::from_iterator(q.len(), q.iter().zip(&params.stiffness).map(|(q, k)| k * q))
}

pub fn damping_force(qdot: &[f64], params: &DynamicParams) -> GeneralizedForce {
    DVector::from_iterator(qdot.len(), qdot.iter().zip(&params.damping).map(|(w, d)| d * w))
}

/// Gradient of the gravitational-plus-buoyancy potential, `G(q) = dU/dq`.
pub fn gravity_buoyancy(
    q: &[f64],
    geom: &SegmentGeometry,
    params: &DynamicParams,
    base: &BasePose,
) -> GeneralizedForce {
    let zeros = vec![0.0; q.len()];
    let nodes = nodes_at(q, &zeros, base, geom, params);
    let weight = C64::new(0.0, params.node_net_weight(geom));
    let mut out = DVector::zeros(q.len());
    for k in 0..nodes.len() {
        nodes.add_transpose(k, weight, &mut out);
    }
    out
}

/// Solve `(M + M_A) qdd = tau + F_E - C qd - D qd - K - G` given the rigid terms.
pub(crate) fn solve_acceleration(
    rigid: &RigidTerms,
    added_inertia: Option<&DMatrix<f64>>,
    q: &[f64],
    qdot: &[f64],
    rhs_forces: &DVector<f64>,
    params: &DynamicParams,
) -> Result<DVector<f64>> {
    let mut eff = rigid.mass.clone();
    if let Some(ma) = added_inertia {
        eff += ma;
    }
    let rhs = rhs_forces
        - &rigid.coriolis
        - damping_force(qdot, params)
        - stiffness_vector(q, params)
        - &rigid.gravity;
    eff.cholesky()
        .map(|ch| ch.solve(&rhs))
        .ok_or(Error::SingularMassMatrix)
}

/// Joint accelerations for the given state, actuation and disturbance.
#[allow(clippy::too_many_arguments)]
pub fn forward_dynamics(
    config: &Configuration,
    tau: &GeneralizedForce,
    external: &GeneralizedForce,
    added_inertia: &DMatrix<f64>,
    geom: &SegmentGeometry,
    params: &DynamicParams,
    base: &BasePose,
) -> Result<DVector<f64>> {
    let q = config.q.as_slice();
    let qdot = config.qdot.as_slice();
    let nodes = nodes_at(q, qdot, base, geom, params);
    let rigid = rigid_terms(&nodes, geom, params);
    solve_acceleration(&rigid, Some(added_inertia), q, qdot, &(tau + external), params)
}

/// Kinetic (with optional added inertia), elastic and gravitational-buoyant
/// potential energy (J). Potential is referenced to z = 0.
pub fn mechanical_energy(
    config: &Configuration,
    added_inertia: Option<&DMatrix<f64>>,
    geom: &SegmentGeometry,
    params: &DynamicParams,
    base: &BasePose,
) -> f64 {
    let q = config.q.as_slice();
    let qdot = &config.qdot;
    let nodes = nodes_at(q, qdot.as_slice(), base, geom, params);
    let rigid = rigid_terms(&nodes, geom, params);
    let mut inertia = rigid.mass;
    if let Some(ma) = added_inertia {
        inertia += ma;
    }
    let kinetic = 0.5 * qdot.dot(&(&inertia * qdot));
    let elastic: f64 = q
        .iter()
        .zip(&params.stiffness)
        .map(|(q, k)| 0.5 * k * q * q)
        .sum();
    let w = params.node_net_weight(geom);
    let potential: f64 = nodes.pos.iter().map(|p| w * p.im).sum();
    kinetic + elastic + potential
}
