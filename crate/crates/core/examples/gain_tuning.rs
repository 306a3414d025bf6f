//! Multi-start gain search on the ISE cost. Usage:
//! `cargo run --release --example gain_tuning -- [starts] [iterations] [seed]`

use inertial_attitude::presets;
use inertial_attitude::tuning::{multistart_optimize, objective, Bounds, ObjectiveKind, KAPPA_NAMES};

fn main() -> inertial_attitude::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let starts = args.first().copied().unwrap_or(4) as usize;
    let iterations = args.get(1).copied().unwrap_or(200) as usize;
    let seed = args.get(2).copied().unwrap_or(2024);

    let cfg = presets::tuning_scenario(presets::tuned_gains()?)?;
    let g0 = objective(&presets::kappa0(), &cfg, ObjectiveKind::Ise, 0.1)?;
    let gf = objective(&presets::kappa_final(), &cfg, ObjectiveKind::Ise, 0.1)?;
    println!("ISE at kappa0 {g0:.6}, at the reference optimum {gf:.6}");

    let r = multistart_optimize(&cfg, &Bounds::standard(), &presets::kappa0(), ObjectiveKind::Ise, 0.1, starts, seed, iterations)?;
    for s in &r.per_start {
        println!("start {}: {:.6} -> {:.6} in {} iterations", s.index, s.initial_objective, s.final_objective, s.iterations);
    }
    println!("best {:.6}", r.best_objective);
    for (name, k) in KAPPA_NAMES.iter().zip(r.best_kappa) {
        println!("  {name:>8} = {k:.5}");
    }
    Ok(())
}
