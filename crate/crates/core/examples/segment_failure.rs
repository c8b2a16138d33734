//! Holding a pose with the middle segment passive.

use wavearm::simulator::{run_episode, rmse, ControllerKind, Failure, Pose, Scenario, SimConfig, Task, WaveInput};
use wavearm::waves::WaveCase;

fn main() -> wavearm::Result<()> {
    let config = SimConfig::default();
    let wave = WaveInput::case(WaveCase::W2, 1.5, 8);
    for failure in [None, Some(Failure { segment: 2, onset: 0.0 })] {
        for controller in [ControllerKind::Mpc, ControllerKind::Baseline] {
            let scenario = Scenario {
                duration: 20.0,
                failure,
                ..Scenario::new("failure", wave.clone(), Task::pose(Pose::P6), controller)
            };
            let trace = run_episode(&scenario, &config)?;
            let tau2 = trace.rows.iter().map(|r| r.tau[1].abs()).fold(0.0, f64::max);
            println!(
                "{:<8} {:<16} rmse {:.5} m, max |tau2| {:.3} N m",
                controller.name(),
                if failure.is_some() { "segment 2 passive" } else { "fully actuated" },
                rmse(&trace, &trace.reference())?,
                tau2
            );
        }
    }
    Ok(())
}
