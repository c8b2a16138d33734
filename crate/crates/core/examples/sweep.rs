//! Small sweep over heights and poses with parallel workers.

use wavearm::harness::{emit_plot_data, run_sweep, FigureClass, PlotInput, SweepSpec};
use wavearm::simulator::{Pose, SimConfig};
use wavearm::waves::WaveCase;

fn main() -> wavearm::Result<()> {
    env_logger::init();
    let spec = SweepSpec {
        waves: vec![WaveCase::W1],
        heights: vec![1.5, 3.0],
        poses: vec![Pose::P1, Pose::P6],
        duration: 10.0,
        output: std::env::temp_dir().join("wavearm-sweep"),
        ..SweepSpec::default()
    };
    let out = run_sweep(&spec, &SimConfig::default(), 2)?;
    for r in &out.rows {
        println!("{:<20} mpc {:.5}  baseline {:.5}  ratio {:.3}", r.cell, r.rmse_mpc, r.rmse_baseline, r.ratio);
    }
    let path = emit_plot_data(FigureClass::Ratio, PlotInput::Results(&out.rows), &spec.output)?;
    println!("ratio plot data: {}", path.display());
    Ok(())
}
