//! Synthesize the three spectral cases and sample the flow at the mount depth.

use wavearm::waves::{synthesize_jonswap, JonswapSettings, WaveCase};

fn main() -> wavearm::Result<()> {
    let settings = JonswapSettings::default();
    for case in WaveCase::ALL {
        let sea = synthesize_jonswap(3.0, case.peak_period(), &settings, 1)?;
        let peak = sea
            .components
            .iter()
            .max_by(|a, b| a.height.total_cmp(&b.height))
            .expect("non-empty sea");
        println!(
            "{case}: Tp {:.1} s, {} components, recovered Hs {:.3} m, strongest component T {:.2} s, lambda {:.1} m",
            case.peak_period(),
            sea.components.len(),
            sea.recovered_hs(),
            peak.period,
            peak.wavelength
        );
        for t in [0.0, 2.5, 5.0] {
            let v = sea.particle_velocity(0.5, -4.0, t)?;
            println!(
                "  t = {t:.1} s: zeta {:+.3} m, flow at 4 m depth ({:+.3}, {:+.3}) m/s",
                sea.elevation(0.5, t),
                v.x,
                v.y
            );
        }
    }
    Ok(())
}
