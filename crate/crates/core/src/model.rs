//! Arm model bundle: geometry, mount, dynamic parameters and fluid
//! coefficients, plus the first-order state derivative used by both the
//! plant and the MPC prediction.

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::dynamics::{rigid_terms, solve_acceleration, DynamicParams, GeneralizedForce, NodeSamples};
use crate::error::{Error, Result};
use crate::hydro::{disturbance_from_nodes, sea_flow, Disturbance, HydroCoeffs};
use crate::kinematics::{jacobian, tip_position, BasePose, Configuration, SegmentGeometry};
use crate::waves::SeaState;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmModel {
    pub geometry: SegmentGeometry,
    pub base: BasePose,
    pub dynamics: DynamicParams,
    pub hydro: HydroCoeffs,
}

/// External loading seen by the state derivative.
#[derive(Clone, Copy, Debug)]
pub enum Loading<'a> {
    /// No fluid forces and no added inertia.
    Dry,
    /// Full fluid model evaluated against a sea state.
    Sea(&'a SeaState),
    /// A fixed generalized force with configuration-dependent added inertia.
    Held(&'a GeneralizedForce),
}

impl ArmModel {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.base.validate()?;
        self.dynamics.validate(self.geometry.segments)?;
        self.hydro.validate()?;
        if (self.dynamics.rho_fluid - self.hydro.rho_fluid).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "fluid density differs between dynamics ({}) and hydro ({})",
                self.dynamics.rho_fluid, self.hydro.rho_fluid
            )));
        }
        Ok(())
    }

    pub fn segments(&self) -> usize {
        self.geometry.segments
    }

    pub fn tip(&self, q: &[f64]) -> Vector2<f64> {
        tip_position(q, &self.base, &self.geometry)
    }

    pub fn tip_jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        jacobian(q, self.geometry.segments, 1.0, &self.base, &self.geometry)
            .expect("tip index is always valid")
    }

    pub(crate) fn nodes(&self, q: &[f64], qdot: &[f64]) -> NodeSamples {
        NodeSamples::collect(q, qdot, &self.base, &self.geometry, self.dynamics.nodes_per_segment)
    }

    /// Elastic plus gravity-buoyancy torque `K(q) + G(q)`.
    pub fn static_torque(&self, q: &[f64]) -> GeneralizedForce {
        let zeros = vec![0.0; q.len()];
        let nodes = self.nodes(q, &zeros);
        let rigid = rigid_terms(&nodes, &self.geometry, &self.dynamics);
        rigid.gravity + crate::dynamics::stiffness_vector(q, &self.dynamics)
    }

    /// Fluid loading at a state.
    pub fn disturbance(&self, config: &Configuration, sea: &SeaState, t: f64) -> Disturbance {
        let nodes = self.nodes(config.q.as_slice(), config.qdot.as_slice());
        disturbance_from_nodes(
            &nodes,
            sea_flow(sea, t, self.hydro.fluid_acceleration),
            &self.geometry,
            &self.hydro,
            &self.dynamics,
        )
    }

    /// Joint accelerations at `(q, qdot)` for applied torque `tau`.
    pub fn acceleration(
        &self,
        t: f64,
        q: &[f64],
        qdot: &[f64],
        tau: &GeneralizedForce,
        loading: Loading<'_>,
    ) -> Result<DVector<f64>> {
        let nodes = self.nodes(q, qdot);
        let rigid = rigid_terms(&nodes, &self.geometry, &self.dynamics);
        match loading {
            Loading::Dry => solve_acceleration(&rigid, None, q, qdot, tau, &self.dynamics),
            Loading::Sea(sea) => {
                let d = disturbance_from_nodes(
                    &nodes,
                    sea_flow(sea, t, self.hydro.fluid_acceleration),
                    &self.geometry,
                    &self.hydro,
                    &self.dynamics,
                );
                solve_acceleration(&rigid, Some(&d.added_inertia), q, qdot, &(tau + d.force), &self.dynamics)
            }
            Loading::Held(force) => {
                let m_a = self.element_added_mass();
                let added = if nodes.pos.iter().all(|p| p.im <= 0.0) {
                    &rigid.mass * (m_a / self.dynamics.node_mass(&self.geometry))
                } else {
                    let mut added = DMatrix::zeros(q.len(), q.len());
                    for k in 0..nodes.len() {
                        if nodes.pos[k].im <= 0.0 {
                            nodes.add_gram(k, m_a, &mut added);
                        }
                    }
                    added
                };
                solve_acceleration(&rigid, Some(&added), q, qdot, &(tau + force), &self.dynamics)
            }
        }
    }

    fn element_added_mass(&self) -> f64 {
        self.hydro.inertia_coefficient()
            * self.hydro.rho_fluid
            * self.geometry.cross_section_area()
            * self.geometry.length
            / self.dynamics.nodes_per_segment as f64
    }

    /// First-order derivative of `y = [q, qdot]` under a state-feedback torque.
    pub fn state_derivative<T>(
        &self,
        t: f64,
        y: &[f64],
        dy: &mut [f64],
        torque: &T,
        loading: Loading<'_>,
    ) -> Result<()>
    where
        T: Fn(&[f64], &[f64]) -> GeneralizedForce,
    {
        let n = y.len() / 2;
        let (q, qdot) = y.split_at(n);
        let tau = torque(q, qdot);
        let qdd = self.acceleration(t, q, qdot, &tau, loading)?;
        dy[..n].copy_from_slice(qdot);
        dy[n..].copy_from_slice(qdd.as_slice());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::{synthesize_jonswap, JonswapSettings};

    #[test]
    fn default_model_is_valid() {
        ArmModel::default().validate().unwrap();
    }

    #[test]
    fn density_mismatch_is_rejected() {
        let mut m = ArmModel::default();
        m.hydro.rho_fluid = 1000.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn held_loading_matches_sea_loading_with_same_force() {
        let model = ArmModel::default();
        let sea = synthesize_jonswap(2.0, 8.0, &JonswapSettings::default(), 9).unwrap();
        let q = [0.3, -0.5, 0.8];
        let qd = [0.2, 0.1, -0.4];
        let config = Configuration::from_slices(&q, &qd).unwrap();
        let tau = DVector::from_column_slice(&[0.1, -0.2, 0.05]);
        let d = model.disturbance(&config, &sea, 2.5);
        let a = model.acceleration(2.5, &q, &qd, &tau, Loading::Sea(&sea)).unwrap();
        let b = model.acceleration(2.5, &q, &qd, &tau, Loading::Held(&d.force)).unwrap();
        assert!((&a - &b).norm() < 1e-12 * (1.0 + a.norm()), "{a} {b}");
    }

    #[test]
    fn static_torque_holds_rest() {
        let model = ArmModel::default();
        let q = [0.4, 0.9, -0.3];
        let tau = model.static_torque(&q);
        let qdd = model.acceleration(0.0, &q, &[0.0; 3], &tau, Loading::Dry).unwrap();
        assert!(qdd.norm() < 1e-10);
    }
}
