//! The eight equilibria and the spectra of the linearized closed loop there.

use inertial_attitude::analysis::{check_gen, enumerate_equilibria, linearize_stable, linearize_unstable, Stability};
use inertial_attitude::presets;

fn main() -> inertial_attitude::Result<()> {
    let model = presets::benchmark_model()?;
    let w = model.w_rho();
    println!("W_rho eigenvalues {:.4?}", w.eigenvalues);
    let gen = check_gen(w);
    println!("simple eigenvalues: {} (min gap {:.4}, discriminant {:.4e})", gen.holds, gen.min_gap, gen.discriminant);

    let stable = linearize_stable(&model)?;
    println!("\nat Ω₁±: {:?}, spectral abscissa {:.4}", stable.class, stable.max_real_part);
    for l in &stable.eigenvalues {
        println!("  {:>10.4} {:+10.4}i", l.re, l.im);
    }
    for eq in enumerate_equilibria(w)? {
        if eq.classification == Stability::Stable {
            continue;
        }
        let lin = linearize_unstable(&eq, &model)?;
        let unstable = lin.eigenvalues.iter().filter(|l| l.re > 0.0).count();
        println!(
            "{} q̄ = {:+.4?}: {:?}, {unstable} unstable eigenvalue(s), max Re {:.4}, min |Re| {:.2e}, residual {:.1e}",
            eq.label,
            eq.q_bar.to_array(),
            lin.class,
            lin.max_real_part,
            lin.min_abs_real_part,
            lin.max_residual
        );
    }
    Ok(())
}
