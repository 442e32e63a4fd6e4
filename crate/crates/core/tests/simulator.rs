use nekhoroshev::simulator::{escape_experiment, EscapeOptions, SimConfig, Simulator};
use nekhoroshev::spectrum::{FrequencyModel, ModelKind};
use nekhoroshev::Error;

#[test]
fn linear_run_keeps_every_norm() {
    let mut cfg = SimConfig::cubic_nls(1, 16, 0.05, 20.0);
    cfg.nonlinearity = vec![];
    cfg.record_stride = 40;
    let sim = Simulator::new(cfg).unwrap();
    let traj = sim.run(&sim.initial_state(0.3, false, 2).unwrap()).unwrap();
    let n0 = traj.norms_s[0];
    let worst = traj.norms_s.iter().map(|n| (n - n0).abs() / n0).fold(0.0, f64::max);
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn cubic_mass_drift_over_ten_thousand_steps() {
    let mut cfg = SimConfig::cubic_nls(1, 16, 0.1, 1000.0);
    cfg.record_stride = 1000;
    let sim = Simulator::new(cfg).unwrap();
    let traj = sim.run(&sim.initial_state(1e-2, true, 3).unwrap()).unwrap();
    assert_eq!(traj.steps, 10_000);
    let d = traj.drifts();
    assert!(d.mass < 1e-10, "{d:?}");
    assert!(d.momentum < 1e-10, "{d:?}");
    assert!(d.reality < 1e-14, "{d:?}");
}

#[test]
fn forward_then_backward_returns() {
    let sim = Simulator::new(SimConfig::cubic_nls(2, 6, 0.05, 1.0)).unwrap();
    let u0 = sim.initial_state(0.05, false, 4).unwrap();
    let back = sim.step(&sim.step(&u0, 0.05).unwrap(), -0.05).unwrap();
    let err = back.amps.iter().zip(&u0.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn beam_energy_is_nearly_conserved() {
    let model = FrequencyModel::new(
        1,
        ModelKind::Beam {
            g: vec![vec![1.0]],
            m: 1.0,
        },
    )
    .unwrap();
    let mut cfg = SimConfig::cubic_nls(1, 16, 1e-3, 5.0);
    cfg.model = model;
    cfg.record_stride = 500;
    let sim = Simulator::new(cfg).unwrap();
    let traj = sim.run(&sim.initial_state(0.1, true, 6).unwrap()).unwrap();
    assert!(traj.drifts().energy < 1e-6, "{:?}", traj.drifts());
}

#[test]
fn escape_control_runs() {
    let cfg = SimConfig::cubic_nls(1, 16, 1e-4, 1.0);
    let opts = EscapeOptions {
        threshold_factor: 1.05,
        ..EscapeOptions::default()
    };
    let rows = escape_experiment(&cfg, &[0.0, 40.0], &opts).unwrap();
    assert_eq!(rows[0].escape_time, None);
    assert!(rows[1].escape_time.is_some());
    assert!(rows[1].sup_norm_ratio > 1.05);
}

#[test]
fn oversized_step_is_rejected() {
    let sim = Simulator::new(SimConfig::cubic_nls(1, 16, 0.5, 1.0)).unwrap();
    let u0 = sim.initial_state(50.0, true, 1).unwrap();
    assert!(matches!(sim.run(&u0), Err(Error::Precondition(_))));
    let mut cfg = SimConfig::cubic_nls(1, 16, 100.0, 1000.0);
    cfg.max_phase = 1.0;
    assert!(Simulator::new(cfg).is_err());
}

#[test]
fn runs_are_reproducible() {
    let mut cfg = SimConfig::cubic_nls(1, 8, 0.1, 10.0);
    cfg.record_stride = 10;
    let sim = Simulator::new(cfg).unwrap();
    let a = sim.run(&sim.initial_state(0.1, true, 9).unwrap()).unwrap();
    let b = sim.run(&sim.initial_state(0.1, true, 9).unwrap()).unwrap();
    assert_eq!(a.rows(), b.rows());
    let mut buf = Vec::new();
    a.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("t,norm_s,norm_l2,energy,norm_low,norm_high"));
}
