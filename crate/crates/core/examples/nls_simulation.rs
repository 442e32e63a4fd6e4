//! Split-step cubic NLS: conservation, reversibility and an escape table.

use nekhoroshev::simulator::{escape_experiment, EscapeOptions, SimConfig, Simulator};

fn main() -> nekhoroshev::Result<()> {
    let cfg = SimConfig::cubic_nls(1, 32, 0.1, 100.0);
    let sim = Simulator::new(cfg.clone())?;
    println!("grid points: {}", sim.grid_size());

    let u0 = sim.initial_state(1e-2, true, 1)?;
    let traj = sim.run(&u0)?;
    let d = traj.drifts();
    println!(
        "{} steps: mass drift {:.2e}, energy drift {:.2e}, sup ||u||_s / eps = {:.3}",
        traj.steps,
        d.mass,
        d.energy,
        traj.sup_norm_s / 1e-2
    );

    let fwd = sim.step(&u0, 0.1)?;
    let back = sim.step(&fwd, -0.1)?;
    let err = back
        .amps
        .iter()
        .zip(&u0.amps)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("step and reverse: {err:.2e}");

    // the 1d cubic flow barely moves ||u||_s, so the threshold is 1.1 eps
    let short = SimConfig::cubic_nls(1, 16, 1e-4, 2.0);
    let opts = EscapeOptions {
        threshold_factor: 1.1,
        ..EscapeOptions::default()
    };
    for r in escape_experiment(&short, &[0.0, 1.0, 40.0], &opts)? {
        println!("eps = {}: escape time {:?}, sup ratio {:.4}", r.eps, r.escape_time, r.sup_norm_ratio);
    }
    Ok(())
}
