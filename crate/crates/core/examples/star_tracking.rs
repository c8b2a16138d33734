//! Star trajectory tracking with the MPC in a 3 m sea.

use wavearm::harness::{emit_plot_data, FigureClass, PlotInput};
use wavearm::simulator::{run_episode, rmse, ControllerKind, Scenario, SimConfig, StarPath, Task, WaveInput};
use wavearm::waves::WaveCase;

fn main() -> wavearm::Result<()> {
    let star = StarPath::default();
    println!("star vertices:");
    for v in star.vertices() {
        println!("  ({:+.3}, {:+.3})", v.x, v.y);
    }
    let scenario = Scenario {
        duration: 30.0,
        ..Scenario::new("star", WaveInput::case(WaveCase::W3, 3.0, 2), Task::Star(star), ControllerKind::Mpc)
    };
    let trace = run_episode(&scenario, &SimConfig::default())?;
    println!("tracking rmse {:.4} m", rmse(&trace, &trace.reference())?);
    let dir = std::env::temp_dir().join("wavearm-star");
    let path = emit_plot_data(FigureClass::Star, PlotInput::Trace(&trace), &dir)?;
    println!("path overlay: {}", path.display());
    Ok(())
}
