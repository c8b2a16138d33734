//! One set-point episode under each controller in a 3 m sea.

use wavearm::simulator::{run_episode_timed, rmse, ControllerKind, Pose, Scenario, SimConfig, Task, WaveInput};
use wavearm::waves::WaveCase;

fn main() -> wavearm::Result<()> {
    let config = SimConfig::default();
    let out = std::env::temp_dir().join("wavearm-episode");
    std::fs::create_dir_all(&out)?;
    for controller in [ControllerKind::Baseline, ControllerKind::Mpc] {
        let scenario = Scenario {
            duration: 20.0,
            seed: 11,
            ..Scenario::new(
                format!("W2-P3-{}", controller.name()),
                WaveInput::case(WaveCase::W2, 3.0, 5),
                Task::pose(Pose::P3),
                controller,
            )
        };
        let (trace, secs) = run_episode_timed(&scenario, &config)?;
        let path = out.join(format!("{}.csv", scenario.id));
        trace.write_csv(&path)?;
        println!(
            "{:<8} rmse {:.5} m in {secs:.1} s -> {}",
            controller.name(),
            rmse(&trace, &trace.reference())?,
            path.display()
        );
    }
    Ok(())
}
