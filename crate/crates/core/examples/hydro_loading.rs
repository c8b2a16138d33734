//! Generalized wave loading on a held arm over one peak period.

use nalgebra::DVector;
use wavearm::kinematics::Configuration;
use wavearm::model::ArmModel;
use wavearm::waves::{synthesize_jonswap, JonswapSettings, WaveCase};

fn main() -> wavearm::Result<()> {
    let model = ArmModel::default();
    let case = WaveCase::W2;
    let sea = synthesize_jonswap(3.0, case.peak_period(), &JonswapSettings::default(), 4)?;
    let config = Configuration::at_rest(DVector::from_column_slice(&[0.4, 0.3, 0.2]));
    println!("   t [s]     F_E1     F_E2     F_E3 [N m]   trace(M_A)");
    for k in 0..=16 {
        let t = k as f64 * case.peak_period() / 16.0;
        let d = model.disturbance(&config, &sea, t);
        println!(
            "{t:8.2} {:+8.4} {:+8.4} {:+8.4}   {:.4}",
            d.force[0],
            d.force[1],
            d.force[2],
            d.added_inertia.trace()
        );
    }
    Ok(())
}
