//! Angular velocity from vector measurements: exact with true vector rates,
//! and the filtered surrogate ω̂ tracking ω along a closed-loop run.

use inertial_attitude::observer::omega_from_vector_rates;
use inertial_attitude::plant::{body_vectors_at, reduced_kinematics};
use inertial_attitude::presets;
use inertial_attitude::sim::simulate;
use inertial_attitude::so3::{UnitQuaternion, Vec3};

fn main() -> inertial_attitude::Result<()> {
    let model = presets::benchmark_model()?;
    let q = UnitQuaternion::from_euler_xyz_degrees([20.0, -35.0, 70.0]);
    let w = Vec3::new(0.3, -1.2, 0.7);
    let b = body_vectors_at(&q, model.plant().reference_vectors());
    let rates: Vec<Vec3> = b.iter().map(|bi| reduced_kinematics(*bi, w)).collect();
    let rec = omega_from_vector_rates(&b, model.gains().filter.lambda(), &rates)?;
    println!("true ω {:?}\nreconstructed {:?}\nerror {:.1e}", w.to_array(), rec.to_array(), (rec - w).norm());

    let traj = simulate(&presets::baseline_scenario()?)?;
    println!("\n{:>6} {:>12} {:>12}", "t", "|ω|", "|ω̂ − ω|");
    for s in traj.samples.iter().step_by(50).take(20) {
        println!("{:>6.2} {:>12.5e} {:>12.5e}", s.t, s.omega.norm(), (s.omega_hat - s.omega).norm());
    }
    Ok(())
}
