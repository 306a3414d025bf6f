//! V along closed-loop runs from random initial states, and V̇ against a
//! finite difference of V.

use inertial_attitude::presets;
use inertial_attitude::sim::{lyapunov_monotonicity, lyapunov_v, lyapunov_vdot, rk4_step, simulate, SimConfig, SimState};
use inertial_attitude::so3::{Quaternion, UnitQuaternion, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> inertial_attitude::Result<()> {
    let model = presets::benchmark_model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let q = loop {
            let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            if let Some(q) = UnitQuaternion::new_normalize(Quaternion::from_array(a)) {
                break q;
            }
        };
        let w = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let cfg = SimConfig::new(model.clone(), 0.005, 20.0, SimState::with_matched_filter(q, w, &model))?;
        let traj = simulate(&cfg)?;
        let mono = lyapunov_monotonicity(&traj, &model);
        let (label, d) = traj.terminal_equilibrium(&model);
        println!(
            "V: {:.4} -> {:.2e}, strictly monotone {}, terminal {label} ({d:.1e})",
            traj.samples[0].v,
            traj.last().v,
            mono.strictly_monotone()
        );
    }

    let cfg = presets::baseline_scenario()?;
    let s = rk4_step(&cfg.initial, 0.01, &model, 0.0)?;
    for h in [1e-3, 5e-4, 2.5e-4] {
        let next = rk4_step(&s, h, &model, 0.01)?;
        let prev_v = lyapunov_v(&s, &model);
        let fd = (lyapunov_v(&next, &model) - prev_v) / h;
        println!("h = {h:.1e}: forward difference {fd:.6}, V̇ {:.6}", lyapunov_vdot(&s, &model));
    }
    Ok(())
}
