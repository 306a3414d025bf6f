//! Gain tuning: the 14-entry vector `κ`, box bounds, ISE/IAE/ITAE costs and
//! a multi-start bounded Nelder–Mead search.
//!
//! `κ = (ρ₁, ρ₂, a₁₀, a₁₁, a₁₂, a₂₀, a₂₁, a₂₂, γ₁₁, γ₁₂, γ₁₃, γ₂₁, γ₂₂, γ₂₃)`
//! with `Λ_i = diag(γ_i1, γ_i2, γ_i3)` and `A_i = a_i0 I + a_i1 Λ_i + a_i2 Λ_i²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{ControlGains, GainSet};
use crate::error::{Error, Result};
use crate::observer::FilterGains;
use crate::sim::{controller_outputs, rk4_step, ClosedLoop, SimConfig};
use crate::so3::Mat3;

pub const KAPPA_LEN: usize = 14;

pub type Kappa = [f64; KAPPA_LEN];

pub const KAPPA_NAMES: [&str; KAPPA_LEN] = [
    "rho1", "rho2", "a10", "a11", "a12", "a20", "a21", "a22", "gamma11", "gamma12", "gamma13", "gamma21", "gamma22",
    "gamma23",
];

pub const DEFAULT_SIGMA: f64 = 0.1;
pub const MAX_ITERATIONS: usize = 500;
/// Simplex diameter in log-coordinates, i.e. relative in `κ`.
pub const DIAMETER_TOLERANCE: f64 = 1e-4;
const MAX_RESTARTS: usize = 3;
/// Edge length of the initial simplex in log-coordinates.
const INITIAL_STEP: f64 = 0.25;

pub fn unpack_kappa(kappa: &[f64]) -> Result<GainSet> {
    if kappa.len() != KAPPA_LEN {
        return Err(Error::DimensionMismatch {
            what: "gain vector entries",
            expected: KAPPA_LEN,
            actual: kappa.len(),
        });
    }
    for (index, &value) in kappa.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveParameter { index, value });
        }
    }
    let control = ControlGains::new(kappa[0..2].to_vec())?;
    let coeffs = vec![[kappa[2], kappa[3], kappa[4]], [kappa[5], kappa[6], kappa[7]]];
    let gammas = [[kappa[8], kappa[9], kappa[10]], [kappa[11], kappa[12], kappa[13]]];
    GainSet::new(control, FilterGains::diagonal(&gammas, coeffs)?)
}

/// Inverse of [`unpack_kappa`]; fails unless there are two vectors with diagonal weights.
pub fn pack_kappa(gains: &GainSet) -> Result<Kappa> {
    if gains.vector_count() != 2 {
        return Err(Error::DimensionMismatch {
            what: "reference vectors for the gain vector",
            expected: 2,
            actual: gains.vector_count(),
        });
    }
    let mut k = [0.0; KAPPA_LEN];
    k[..2].copy_from_slice(gains.control.rho());
    for (i, (l, c)) in gains.filter.lambda().iter().zip(gains.filter.poly_coeffs()).enumerate() {
        if l.max_abs_diff(&Mat3::from_diagonal(l.diagonal())) != 0.0 {
            return Err(Error::InvalidConfig(format!("filter weight {i} is not diagonal")));
        }
        k[2 + 3 * i..5 + 3 * i].copy_from_slice(c);
        k[8 + 3 * i..11 + 3 * i].copy_from_slice(&l.diagonal());
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Kappa,
    pub upper: Kappa,
}

impl Bounds {
    pub fn new(lower: Kappa, upper: Kappa) -> Result<Self> {
        for i in 0..KAPPA_LEN {
            if !(lower[i] > 0.0 && lower[i] <= upper[i] && upper[i].is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "bounds for {} must satisfy 0 < lower <= upper, got [{}, {}]",
                    KAPPA_NAMES[i], lower[i], upper[i]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `ρ ∈ [0.01, 30]`, `a_i0 ∈ [1e-4, 4]`, `a_i1 ∈ [1e-4, 2]`, `a_i2 ∈ [1e-4, 0.1]`, `γ ∈ [0.01, 50]`.
    pub fn standard() -> Self {
        let (rho, a0, a1, a2, g) = ((0.01, 30.0), (1e-4, 4.0), (1e-4, 2.0), (1e-4, 0.1), (0.01, 50.0));
        let per = [rho, rho, a0, a1, a2, a0, a1, a2, g, g, g, g, g, g];
        Self {
            lower: per.map(|p| p.0),
            upper: per.map(|p| p.1),
        }
    }

    pub fn contains(&self, kappa: &Kappa) -> bool {
        (0..KAPPA_LEN).all(|i| self.lower[i] <= kappa[i] && kappa[i] <= self.upper[i])
    }
}

/// Componentwise clamp into the box.
pub fn project_to_bounds(kappa: &Kappa, bounds: &Bounds) -> Kappa {
    std::array::from_fn(|i| kappa[i].clamp(bounds.lower[i], bounds.upper[i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// `∫ ‖q̄‖² + σ‖τ‖²`
    Ise,
    /// `∫ ‖q̄‖₁ + σ‖τ‖₁`
    Iae,
    /// `∫ t (‖q̄‖₁ + σ‖τ‖₁)`
    Itae,
}

impl ObjectiveKind {
    fn integrand(self, t: f64, q_bar: crate::so3::Vec3, tau: crate::so3::Vec3, sigma: f64) -> f64 {
        match self {
            Self::Ise => q_bar.norm_squared() + sigma * tau.norm_squared(),
            Self::Iae => q_bar.norm_l1() + sigma * tau.norm_l1(),
            Self::Itae => t * (q_bar.norm_l1() + sigma * tau.norm_l1()),
        }
    }
}

/// Trapezoid-rule cost of the closed loop from `config`'s plant, initial
/// state and grid with the gains replaced by `κ`. Runs that blow up cost `+∞`.
pub fn objective(kappa: &[f64], config: &SimConfig, kind: ObjectiveKind, sigma: f64) -> Result<f64> {
    let model = ClosedLoop::new(config.model.plant().clone(), unpack_kappa(kappa)?)?;
    let mut state = config.initial.clone();
    let value = |t: f64, state: &crate::sim::SimState| -> Result<f64> {
        let (_, tau) = controller_outputs(state, &model)?;
        let q_bar = model.attitude_error(&state.plant.attitude).vector();
        Ok(kind.integrand(t, q_bar, tau, sigma))
    };
    let mut prev = match value(0.0, &state) {
        Ok(v) => v,
        Err(Error::SingularM { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let mut total = 0.0;
    for k in 0..config.steps() {
        let t = k as f64 * config.dt;
        let next = rk4_step(&state, config.dt, &model, t).and_then(|s| {
            let v = value(t + config.dt, &s)?;
            Ok((s, v))
        });
        match next {
            Ok((s, v)) => {
                total += 0.5 * config.dt * (prev + v);
                prev = v;
                state = s;
            }
            Err(Error::IntegrationBlowUp { .. } | Error::NormDrift { .. } | Error::SingularM { .. }) => {
                return Ok(f64::INFINITY)
            }
            Err(e) => return Err(e),
        }
    }
    Ok(total)
}

/// Outcome of one local search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub index: usize,
    pub initial_kappa: Kappa,
    pub initial_objective: f64,
    pub final_kappa: Kappa,
    pub final_objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
    /// Best objective after each iteration; non-increasing.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_kappa: Kappa,
    pub best_objective: f64,
    pub starts: usize,
    pub rng_seed: u64,
    pub kind: ObjectiveKind,
    pub sigma: f64,
    pub per_start: Vec<StartReport>,
}

/// Start `index > 0`: log-uniform in the box from its own ChaCha stream.
pub fn random_start(bounds: &Bounds, rng_seed: u64, index: usize) -> Kappa {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index as u64);
    let k: Kappa = std::array::from_fn(|i| {
        let (lo, hi) = (bounds.lower[i].ln(), bounds.upper[i].ln());
        if hi > lo {
            rng.gen_range(lo..=hi).exp()
        } else {
            bounds.lower[i]
        }
    });
    project_to_bounds(&k, bounds)
}

struct Search<'a, F> {
    f: F,
    bounds: &'a Bounds,
    log_lo: Kappa,
    log_hi: Kappa,
    evaluations: usize,
}

impl<F: FnMut(&Kappa) -> f64> Search<'_, F> {
    fn to_kappa(&self, u: &Kappa) -> Kappa {
        let k: Kappa = std::array::from_fn(|i| u[i].clamp(self.log_lo[i], self.log_hi[i]).exp());
        project_to_bounds(&k, self.bounds)
    }

    fn eval(&mut self, u: &Kappa) -> (Kappa, f64) {
        let u: Kappa = std::array::from_fn(|i| u[i].clamp(self.log_lo[i], self.log_hi[i]));
        self.evaluations += 1;
        let k = self.to_kappa(&u);
        let v = (self.f)(&k);
        (u, if v.is_nan() { f64::INFINITY } else { v })
    }

    fn simplex_around(&mut self, center: &Kappa, value: f64) -> Vec<(Kappa, f64)> {
        let mut s = vec![(*center, value)];
        for i in 0..KAPPA_LEN {
            let mut u = *center;
            u[i] += if center[i] + INITIAL_STEP <= self.log_hi[i] { INITIAL_STEP } else { -INITIAL_STEP };
            s.push(self.eval(&u));
        }
        s
    }
}

fn lerp(a: &Kappa, b: &Kappa, t: f64) -> Kappa {
    std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
}

fn diameter(s: &[(Kappa, f64)]) -> f64 {
    s[1..]
        .iter()
        .flat_map(|(u, _)| u.iter().zip(&s[0].0).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Bound-projected Nelder–Mead in `ln κ`, restarted around the best vertex
/// when the simplex collapses.
pub fn nelder_mead<F: FnMut(&Kappa) -> f64>(f: F, start: &Kappa, bounds: &Bounds, max_iterations: usize) -> StartReport {
    let mut search = Search {
        f,
        bounds,
        log_lo: bounds.lower.map(f64::ln),
        log_hi: bounds.upper.map(f64::ln),
        evaluations: 0,
    };
    let start = project_to_bounds(start, bounds);
    let (u0, f0) = search.eval(&start.map(f64::ln));
    let mut simplex = search.simplex_around(&u0, f0);
    let mut history = Vec::new();
    let mut restarts = 0;
    let mut iterations = 0;
    let mut best_at_restart = f0;
    let n = KAPPA_LEN as f64;

    while iterations < max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if !simplex[0].1.is_finite() {
            break;
        }
        if diameter(&simplex) < DIAMETER_TOLERANCE {
            let improved = simplex[0].1 < best_at_restart;
            if restarts >= MAX_RESTARTS || (!improved && restarts > 0) {
                break;
            }
            restarts += 1;
            best_at_restart = simplex[0].1;
            let (u, v) = simplex[0];
            simplex = search.simplex_around(&u, v);
            continue;
        }
        iterations += 1;
        let worst = simplex[KAPPA_LEN];
        let centroid: Kappa = std::array::from_fn(|i| simplex[..KAPPA_LEN].iter().map(|(u, _)| u[i]).sum::<f64>() / n);
        let reflected = search.eval(&lerp(&centroid, &worst.0, -1.0));
        if reflected.1 < simplex[0].1 {
            let expanded = search.eval(&lerp(&centroid, &worst.0, -2.0));
            simplex[KAPPA_LEN] = if expanded.1 < reflected.1 { expanded } else { reflected };
        } else if reflected.1 < simplex[KAPPA_LEN - 1].1 {
            simplex[KAPPA_LEN] = reflected;
        } else {
            let contracted = if reflected.1 < worst.1 {
                search.eval(&lerp(&centroid, &reflected.0, 0.5))
            } else {
                search.eval(&lerp(&centroid, &worst.0, 0.5))
            };
            if contracted.1 < worst.1.min(reflected.1) {
                simplex[KAPPA_LEN] = contracted;
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    *vertex = search.eval(&lerp(&best, &vertex.0, 0.5));
                }
            }
        }
        let best = simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        history.push(history.last().map_or(best, |h: &f64| h.min(best)));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    StartReport {
        index: 0,
        initial_kappa: start,
        initial_objective: f0,
        final_kappa: search.to_kappa(&simplex[0].0),
        final_objective: simplex[0].1.min(f0),
        iterations,
        evaluations: search.evaluations,
        restarts,
        history,
    }
}

/// Local searches from `κ₀` (start 0) and `n_starts − 1` random points,
/// run in parallel. The result depends only on the arguments.
#[allow(clippy::too_many_arguments)]
pub fn multistart_optimize(
    config: &SimConfig,
    bounds: &Bounds,
    kappa0: &Kappa,
    kind: ObjectiveKind,
    sigma: f64,
    n_starts: usize,
    rng_seed: u64,
    max_iterations: usize,
) -> Result<TuneResult> {
    if n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
    }
    // surface configuration errors before fanning out
    objective(kappa0, config, kind, sigma)?;
    let reports: Vec<StartReport> = (0..n_starts)
        .into_par_iter()
        .map(|index| {
            let start = if index == 0 { project_to_bounds(kappa0, bounds) } else { random_start(bounds, rng_seed, index) };
            let f = |k: &Kappa| objective(k, config, kind, sigma).unwrap_or(f64::INFINITY);
            let mut report = nelder_mead(f, &start, bounds, max_iterations);
            report.index = index;
            report
        })
        .collect();
    let best = reports
        .iter()
        .min_by(|a, b| a.final_objective.total_cmp(&b.final_objective).then(a.index.cmp(&b.index)))
        .expect("at least one start");
    if !best.final_objective.is_finite() {
        return Err(Error::AllStartsDiverged);
    }
    // the reported best vertex may be the start itself if nothing improved
    let best_kappa = if best.final_objective < best.initial_objective { best.final_kappa } else { best.initial_kappa };
    Ok(TuneResult {
        best_kappa,
        best_objective: best.final_objective,
        starts: n_starts,
        rng_seed,
        kind,
        sigma,
        per_start: reports,
    })
}
