//! Closed-loop run from rest at Q(0) = (0.8, 0, 0, 0.6) with the tuned gains.

use inertial_attitude::presets;
use inertial_attitude::sim::simulate;

fn main() -> inertial_attitude::Result<()> {
    let cfg = presets::baseline_scenario()?;
    let traj = simulate(&cfg)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>12}", "t", "qbar0", "|qbar|", "|w|", "|tau|", "V");
    for s in traj.samples.iter().step_by(100) {
        println!(
            "{:>6.2} {:>10.6} {:>10.3e} {:>10.3e} {:>10.3e} {:>12.5e}",
            s.t,
            s.q_bar.scalar(),
            s.q_bar.vector().norm(),
            s.omega.norm(),
            s.torque.norm(),
            s.v
        );
    }
    let (label, d) = traj.terminal_equilibrium(&cfg.model);
    println!("converged at t = {:?}, terminal {label} (distance {d:.2e})", traj.convergence_time());
    println!("peak |tau| = {:.4}, ∫|tau|² dt = {:.4}", traj.peak_torque(), traj.torque_energy());
    Ok(())
}
