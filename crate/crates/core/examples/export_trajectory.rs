//! Writes a trajectory CSV for external plotting.
//! `cargo run --example export_trajectory -- out.csv [q0 q1 q2 q3]`

use std::fs::File;
use std::io::BufWriter;

use inertial_attitude::presets;
use inertial_attitude::sim::simulate;
use inertial_attitude::so3::UnitQuaternion;

fn main() -> inertial_attitude::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| "trajectory.csv".into());
    let attitude = if args.len() == 5 {
        let q: Vec<f64> = args[1..].iter().map(|a| a.parse().expect("number")).collect();
        UnitQuaternion::new_normalize(inertial_attitude::so3::Quaternion::from_array([q[0], q[1], q[2], q[3]]))
            .expect("nonzero quaternion")
    } else {
        UnitQuaternion::from_array(presets::BASELINE_ATTITUDE).expect("unit")
    };
    let cfg = presets::scenario_at(presets::benchmark_model()?, attitude)?;
    let traj = simulate(&cfg)?;
    traj.write_csv(BufWriter::new(File::create(&path)?))?;
    println!("wrote {} samples to {path}", traj.samples.len());
    Ok(())
}
