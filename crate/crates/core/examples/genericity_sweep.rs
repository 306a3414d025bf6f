//! How often W_ρ has a repeated eigenvalue for random ρ, and whether the six
//! saddle equilibria stay hyperbolic for random gain vectors in the box.

use inertial_attitude::analysis::{check_gen, enumerate_equilibria, linearize_unstable, SpectrumClass};
use inertial_attitude::controller::{w_rho, ControlGains};
use inertial_attitude::presets;
use inertial_attitude::sim::ClosedLoop;
use inertial_attitude::tuning::{random_start, unpack_kappa, Bounds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> inertial_attitude::Result<()> {
    let refs = presets::benchmark_references();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (lo, hi) = (0.01f64.ln(), 30f64.ln());
    let mut failing = 0;
    let mut smallest = f64::INFINITY;
    for _ in 0..1000 {
        let rho = ControlGains::new(vec![rng.gen_range(lo..hi).exp(), rng.gen_range(lo..hi).exp()])?;
        let g = check_gen(&w_rho(&rho, &refs)?);
        smallest = smallest.min(g.min_gap / g.eigenvalues[2]);
        failing += usize::from(!g.holds);
    }
    println!("log-uniform ρ: {failing}/1000 repeated eigenvalues, smallest relative gap {smallest:.3e}");

    let bounds = Bounds::standard();
    let (mut checked, mut marginal, mut stable) = (0, 0, 0);
    for i in 1..=100 {
        let model = ClosedLoop::new(presets::benchmark_plant()?, unpack_kappa(&random_start(&bounds, 5, i))?)?;
        let Ok(eqs) = enumerate_equilibria(model.w_rho()) else { continue };
        for eq in &eqs[2..] {
            checked += 1;
            match linearize_unstable(eq, &model)?.class {
                SpectrumClass::HyperbolicUnstable => {}
                SpectrumClass::Marginal => marginal += 1,
                SpectrumClass::Hurwitz => stable += 1,
            }
        }
    }
    println!("saddle linearizations: {checked} checked, {marginal} marginal, {stable} without an unstable direction");
    Ok(())
}
