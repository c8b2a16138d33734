pub mod control;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod hydro;
pub mod kinematics;
pub mod model;
pub mod ode;
pub mod simulator;
pub mod waves;

pub use error::{Error, Result};
