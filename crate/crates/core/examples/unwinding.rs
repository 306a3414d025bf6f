//! Q and −Q are the same attitude. Starting from q̄0 < 0 the controller
//! settles at q̄ = (−1, 0) instead of rotating a full turn to (1, 0).

use inertial_attitude::presets;
use inertial_attitude::sim::simulate;

fn main() -> inertial_attitude::Result<()> {
    for (name, cfg) in [("q0(0) = +0.8", presets::baseline_scenario()?), ("q0(0) = -0.8", presets::unwinding_scenario()?)] {
        let traj = simulate(&cfg)?;
        let crossed = traj.samples.windows(2).any(|w| w[0].q_bar.scalar().signum() != w[1].q_bar.scalar().signum());
        let angle: f64 = traj
            .samples
            .windows(2)
            .map(|w| w[0].q_bar.as_quaternion().dot(&w[1].q_bar.as_quaternion()).clamp(-1.0, 1.0).acos() * 2.0)
            .sum();
        let (label, _) = traj.terminal_equilibrium(&cfg.model);
        println!(
            "{name}: terminal {label}, final q0 = {:+.6}, q0 changed sign: {crossed}, total rotation {:.1} deg",
            traj.last().q_bar.scalar(),
            angle.to_degrees()
        );
    }
    Ok(())
}
