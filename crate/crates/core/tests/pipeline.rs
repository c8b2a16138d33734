//! Sweep to plot data to readers, end to end.

use wavearm::harness::{
    emit_plot_data, read_plot_data, read_results_csv, run_sweep, FigureClass, PlotInput, SweepSpec,
};
use wavearm::simulator::{ControllerKind, EpisodeSummary, Pose, SimConfig, Trace};
use wavearm::waves::WaveCase;

#[test]
fn failure_sweep_round_trips_through_every_reader() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SweepSpec {
        waves: vec![WaveCase::W1],
        heights: vec![2.0],
        poses: vec![Pose::P3],
        failures: vec![0, 2],
        duration: 1.0,
        output: dir.path().to_path_buf(),
        ..SweepSpec::default()
    };
    let mut config = SimConfig::default();
    config.mpc.horizon = 5;
    let out = run_sweep(&spec, &config, 2).unwrap();
    assert_eq!(out.rows.len(), 2);
    assert_eq!(out.traces.len(), 4);
    assert!(!out.any_failed());

    let rows = read_results_csv(&dir.path().join("results.csv")).unwrap();
    assert!(rows.iter().zip(&out.rows).all(|(a, b)| a.same_outcome(b)));

    for (path, summary) in out.traces.iter().zip(&out.episodes) {
        let trace = Trace::read_csv(path).unwrap();
        assert_eq!(trace.len(), 10);
        let json = dir.path().join("summary.json");
        summary.write_json(&json).unwrap();
        assert_eq!(&EpisodeSummary::read_json(&json).unwrap(), summary);
    }

    let failed_mpc = Trace::read_csv(&dir.path().join("traces").join("W1-hs2.00-P3-f2-s0-mpc.csv")).unwrap();
    assert!(failed_mpc.rows.iter().all(|r| r.tau[1] == 0.0));

    let path = emit_plot_data(FigureClass::Failure, PlotInput::Results(&rows), dir.path()).unwrap();
    let recs = read_plot_data(&path).unwrap();
    assert_eq!(recs.len(), 4);
    let path = emit_plot_data(FigureClass::Ratio, PlotInput::Results(&rows), dir.path()).unwrap();
    assert_eq!(read_plot_data(&path).unwrap().len(), 2);
}

#[test]
fn single_controller_rows_have_no_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SweepSpec {
        waves: vec![WaveCase::W2],
        heights: vec![1.0],
        poses: vec![Pose::P2],
        controllers: vec![ControllerKind::Baseline],
        duration: 0.5,
        output: dir.path().to_path_buf(),
        ..SweepSpec::default()
    };
    let out = run_sweep(&spec, &SimConfig::default(), 1).unwrap();
    assert!(out.rows[0].rmse_baseline.is_finite());
    assert!(out.rows[0].rmse_mpc.is_nan() && out.rows[0].ratio.is_nan());
}
