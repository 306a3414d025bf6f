//! The four command-line operations. Each returns its report and writes
//! its files under an output directory; the binary is a thin wrapper.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    check_gen, enumerate_equilibria, linearize_stable, linearize_unstable, physical_attitude, stable_equilibria, EquilibriumLabel,
    GenCheck, LinearizationResult, SpectrumClass, Stability,
};
use crate::config::RunConfig;
use crate::controller::{w_rho, z_rho_measured, ControlGains, GainSet};
use crate::error::Result;
use crate::observer::{matrix_polynomial, summed_linear_polynomial};
use crate::plant::{body_vectors_at, desired_body_vectors, PlantConfig};
use crate::presets;
use crate::sim::{lyapunov_monotonicity, lyapunov_v, simulate as run_simulation, ClosedLoop, SimConfig, Trajectory};
use crate::so3::{Mat3, UnitQuaternion, Vec3};
use crate::tuning::{multistart_optimize, objective, TuneResult};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const TUNE_FILE: &str = "tune.json";
pub const BEST_TRAJECTORY_FILE: &str = "best_trajectory.csv";
pub const VALIDATION_FILE: &str = "validation.json";

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_csv(dir: &Path, name: &str, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = fs::File::create(dir.join(name))?;
    traj.write_csv(BufWriter::new(file))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub dt: f64,
    pub t_final: f64,
    pub samples: usize,
    pub convergence_time: Option<f64>,
    pub terminal_equilibrium: String,
    pub terminal_distance: f64,
    pub peak_torque: f64,
    pub torque_energy: f64,
    pub final_q_bar: [f64; 4],
    pub final_omega: [f64; 3],
    pub v_initial: f64,
    pub v_final: f64,
}

impl SimulationSummary {
    pub fn of(traj: &Trajectory, config: &SimConfig) -> Self {
        let (label, distance) = traj.terminal_equilibrium(&config.model);
        let last = traj.last();
        Self {
            dt: config.dt,
            t_final: last.t,
            samples: traj.samples.len(),
            convergence_time: traj.convergence_time(),
            terminal_equilibrium: label.to_string(),
            terminal_distance: distance,
            peak_torque: traj.peak_torque(),
            torque_energy: traj.torque_energy(),
            final_q_bar: last.q_bar.to_array(),
            final_omega: last.omega.to_array(),
            v_initial: traj.samples[0].v,
            v_final: last.v,
        }
    }
}

/// Writes the trajectory CSV and summary JSON.
pub fn simulate(config: &RunConfig, out: &Path) -> Result<SimulationSummary> {
    let sim = config.sim_config()?;
    let traj = run_simulation(&sim)?;
    let summary = SimulationSummary::of(&traj, &sim);
    write_csv(out, TRAJECTORY_FILE, &traj)?;
    write_json(out, SUMMARY_FILE, &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizationSummary {
    pub dimension: usize,
    /// `[re, im]` pairs, sorted by decreasing real part.
    pub eigenvalues: Vec<[f64; 2]>,
    pub max_real_part: f64,
    pub min_abs_real_part: f64,
    pub spectral_radius: f64,
    pub max_residual: f64,
    pub class: SpectrumClass,
}

impl From<&LinearizationResult> for LinearizationSummary {
    fn from(r: &LinearizationResult) -> Self {
        Self {
            dimension: r.matrix.dim(),
            eigenvalues: r.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
            max_real_part: r.max_real_part,
            min_abs_real_part: r.min_abs_real_part,
            spectral_radius: r.spectral_radius,
            max_residual: r.max_residual,
            class: r.class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub label: EquilibriumLabel,
    pub q_bar: [f64; 4],
    /// Physical attitude `q̄ ⊙ Q_d`.
    pub attitude: [f64; 4],
    pub classification: Stability,
    pub w_eigenvalue: Option<f64>,
    pub linearization: LinearizationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WRhoReport {
    pub matrix: [[f64; 3]; 3],
    pub eigenvalues: [f64; 3],
    pub eigenvectors: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub w_rho: WRhoReport,
    pub gen: GenCheck,
    pub stable_hurwitz: bool,
    /// Count of `Ω₂..₄±` whose linearization is hyperbolic with an unstable direction.
    pub unstable_hyperbolic: usize,
    /// All eight points when the genericity check holds, otherwise only `Ω₁±`.
    pub equilibria: Vec<EquilibriumReport>,
}

pub fn analyze_model(model: &ClosedLoop) -> Result<AnalysisReport> {
    let w = model.w_rho();
    let gen = check_gen(w);
    let stable = linearize_stable(model)?;
    let stable_summary = LinearizationSummary::from(&stable);
    let points = match enumerate_equilibria(w) {
        Ok(all) => all,
        Err(_) => stable_equilibria(w),
    };
    let mut equilibria = Vec::with_capacity(points.len());
    let mut unstable_hyperbolic = 0;
    for eq in &points {
        let linearization = match eq.classification {
            Stability::Stable => stable_summary.clone(),
            Stability::HyperbolicUnstable => {
                let lin = linearize_unstable(eq, model)?;
                if lin.class == SpectrumClass::HyperbolicUnstable {
                    unstable_hyperbolic += 1;
                }
                LinearizationSummary::from(&lin)
            }
        };
        equilibria.push(EquilibriumReport {
            label: eq.label,
            q_bar: eq.q_bar.to_array(),
            attitude: physical_attitude(eq, model).to_array(),
            classification: eq.classification,
            w_eigenvalue: eq.w_eigenvalue,
            linearization,
        });
    }
    Ok(AnalysisReport {
        w_rho: WRhoReport {
            matrix: w.matrix.m,
            eigenvalues: w.eigenvalues,
            eigenvectors: w.eigenvectors.map(Vec3::to_array),
        },
        gen,
        stable_hurwitz: stable.class == SpectrumClass::Hurwitz,
        unstable_hyperbolic,
        equilibria,
    })
}

/// Writes the analysis JSON.
pub fn analyze(config: &RunConfig, out: &Path) -> Result<AnalysisReport> {
    let report = analyze_model(&config.model()?)?;
    write_json(out, ANALYSIS_FILE, &report)?;
    Ok(report)
}

/// Runs the gain search, writes its result and the best trajectory.
pub fn tune(config: &RunConfig, out: &Path) -> Result<TuneResult> {
    let sim = config.sim_config()?;
    let t = &config.tuning;
    let bounds = config.bounds();
    let kappa0 = config.kappa0()?;
    eprintln!(
        "tuning: {} start(s), {:?}, sigma = {}, seed = {}, up to {} iterations each",
        t.n_starts, t.kind, t.sigma, t.seed, t.max_iterations
    );
    eprintln!("tuning: objective at kappa0 = {}", objective(&kappa0, &sim, t.kind, t.sigma)?);
    let result = multistart_optimize(&sim, &bounds, &kappa0, t.kind, t.sigma, t.n_starts, t.seed, t.max_iterations)?;
    for s in &result.per_start {
        eprintln!(
            "tuning: start {}: {} -> {} ({} iterations, {} evaluations)",
            s.index, s.initial_objective, s.final_objective, s.iterations, s.evaluations
        );
    }
    write_json(out, TUNE_FILE, &result)?;
    let best = ClosedLoop::new(sim.model.plant().clone(), crate::tuning::unpack_kappa(&result.best_kappa)?)?;
    let best_sim = SimConfig { model: best, ..sim };
    match run_simulation(&best_sim) {
        Ok(traj) => write_csv(out, BEST_TRAJECTORY_FILE, &traj)?,
        Err(e) => eprintln!("tuning: best trajectory not written: {e}"),
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A known disagreement between reference numbers, reported but not a failure.
    DocumentedInconsistency,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "FAIL",
            Self::DocumentedInconsistency => "documented inconsistency",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            let pad = width - c.name.chars().count();
            s.push_str(&format!("{}{}  {:<24}  {}\n", c.name, " ".repeat(pad), c.status.to_string(), c.detail));
        }
        s
    }
}

/// Reference `W_ρ` for the tuned `ρ` and its eigen-decomposition.
const REFERENCE_W: [[f64; 3]; 3] = [[24.3144, 0.0, -1.7736], [0.0, 26.0881, 0.0], [-1.7736, 0.0, 1.7736]];
const REFERENCE_W_EIGENVALUES: [f64; 3] = [1.6349, 24.4531, 26.0881];
const REFERENCE_W_EIGENVECTORS: [[f64; 3]; 3] = [[0.0780, 0.0, 0.9970], [-0.9970, 0.0, 0.0780], [0.0, -1.0, 0.0]];
/// Reference diagonals of `A_1`, `A_2` for the tuned gains.
const REFERENCE_A_DIAGONALS: [[f64; 3]; 2] = [[550.0, 255.2727, 0.5838], [11.4541, 10.6873, 102.7916]];
const REFERENCE_TUNING_ATTITUDE: [f64; 4] = [0.8804, 0.2704, -0.02089, 0.3891];

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

fn convergence_check(name: &str, model: &ClosedLoop, attitude: [f64; 4], expect: EquilibriumLabel) -> Check {
    let cfg = presets::scenario_at(model.clone(), UnitQuaternion::from_array(attitude).expect("unit"));
    match cfg.and_then(|cfg| run_simulation(&cfg).map(|t| (t, cfg))) {
        Ok((traj, cfg)) => {
            let (label, d) = traj.terminal_equilibrium(&cfg.model);
            let mono = lyapunov_monotonicity(&traj, &cfg.model);
            check(
                name,
                label == expect && d < 1e-3 && traj.convergence_time().is_some() && mono.unexplained.is_empty(),
                format!(
                    "terminal {label} at distance {d:.2e}, converged at t = {:?}, V increases: {} (all within RK4 step error: {})",
                    traj.convergence_time(),
                    mono.strict_violations.len(),
                    mono.unexplained.is_empty()
                ),
            )
        }
        Err(e) => check(name, false, format!("simulation failed: {e}")),
    }
}

/// Golden-value suite for a gain set on the reference plant; the command
/// runs it with the tuned gains.
pub fn validation_report(gains: &GainSet) -> ValidationReport {
    let mut checks = Vec::new();
    let refs = presets::benchmark_references();

    match w_rho(&gains.control, &refs) {
        Ok(w) => {
            let d = w.matrix.max_abs_diff(&Mat3::from_rows(REFERENCE_W));
            checks.push(check("W_rho entries", d < 1e-3, format!("max deviation {d:.2e}")));
            let d = w.eigenvalues.iter().zip(REFERENCE_W_EIGENVALUES).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            checks.push(check("W_rho eigenvalues", d < 1e-3, format!("{:.4?}, max deviation {d:.2e}", w.eigenvalues)));
            let worst = w
                .eigenvectors
                .iter()
                .zip(REFERENCE_W_EIGENVECTORS)
                .map(|(v, e)| {
                    let e = Vec3::from(e);
                    v.dot(&e).abs() / e.norm()
                })
                .fold(1.0, f64::min);
            checks.push(check("W_rho eigenvectors", worst > 1.0 - 1e-2, format!("worst |cos| {worst:.6}")));
            let gen = check_gen(&w);
            checks.push(check(
                "simple W_rho eigenvalues",
                gen.holds,
                format!("min gap {:.4}, discriminant sign {}", gen.min_gap, gen.discriminant_sign),
            ));
        }
        Err(e) => checks.push(check("W_rho entries", false, e.to_string())),
    }

    let stated: Vec<[f64; 3]> = gains
        .filter
        .lambda()
        .iter()
        .zip(gains.filter.poly_coeffs())
        .map(|(l, c)| matrix_polynomial(l, c).diagonal())
        .collect();
    let summed: Vec<[f64; 3]> = gains
        .filter
        .lambda()
        .iter()
        .zip(gains.filter.poly_coeffs())
        .map(|(l, c)| summed_linear_polynomial(l, c).diagonal())
        .collect();
    let reading_matches = summed
        .iter()
        .flatten()
        .zip(REFERENCE_A_DIAGONALS.iter().flatten())
        .all(|(a, b)| (a - b).abs() < 1e-3 * b.abs().max(1.0));
    checks.push(Check {
        name: "A_i filter matrices".into(),
        status: if reading_matches { CheckStatus::DocumentedInconsistency } else { CheckStatus::Fail },
        detail: format!(
            "a0 I + a1 L + a2 L^2 gives {stated:.4?}; reference values {:?} follow (a0 + a1) L + a2 L^2",
            REFERENCE_A_DIAGONALS
        ),
    });

    let q = presets::tuning_attitude().to_array();
    let d = q.iter().zip(REFERENCE_TUNING_ATTITUDE).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(check("Euler [30, 10, 45] deg attitude", d < 1e-3, format!("{q:.5?}")));

    let plant = PlantConfig::new(presets::benchmark_inertia(), refs.clone(), UnitQuaternion::IDENTITY).expect("reference plant");
    let unit_rho = ControlGains::new(vec![1.0, 1.0]).expect("positive");
    let b = body_vectors_at(&UnitQuaternion::from_array([0.8, 0.0, 0.0, 0.6]).expect("unit"), &refs);
    let z = z_rho_measured(&unit_rho, &b, &desired_body_vectors(&plant));
    let d = z.max_abs_diff(&Vec3::new(0.96, -0.72, -0.96));
    checks.push(check("worked z_rho, rho = (1, 1)", d < 1e-12, format!("{:?}", z.to_array())));

    match ClosedLoop::new(plant, gains.clone()) {
        Ok(model) => {
            checks.push(convergence_check("rest at (0.8, 0, 0, 0.6) -> Ω₁⁺", &model, presets::BASELINE_ATTITUDE, EquilibriumLabel::Omega1Plus));
            checks.push(convergence_check(
                "rest at (-0.8, 0, 0, 0.6) -> Ω₁⁻",
                &model,
                presets::UNWINDING_ATTITUDE,
                EquilibriumLabel::Omega1Minus,
            ));
            match analyze_model(&model) {
                Ok(r) => {
                    checks.push(check("linearization at Ω₁⁺ Hurwitz", r.stable_hurwitz, format!(
                        "max Re = {:.4}",
                        r.equilibria[0].linearization.max_real_part
                    )));
                    checks.push(check(
                        "six saddle equilibria hyperbolic",
                        r.unstable_hyperbolic == 6,
                        format!("{} of 6", r.unstable_hyperbolic),
                    ));
                    let v0 = lyapunov_v(
                        &crate::sim::SimState::with_matched_filter(UnitQuaternion::IDENTITY, Vec3::ZERO, &model),
                        &model,
                    );
                    checks.push(check("V at Ω₁⁺", v0 == 0.0, format!("{v0}")));
                }
                Err(e) => checks.push(check("linearizations", false, e.to_string())),
            }
        }
        Err(e) => checks.push(check("closed loop", false, e.to_string())),
    }
    ValidationReport { checks }
}

/// Golden values with the tuned gains; writes the report when `out` is given.
pub fn validate(out: Option<&Path>) -> Result<ValidationReport> {
    let report = validation_report(&presets::tuned_gains()?);
    if let Some(dir) = out {
        write_json(dir, VALIDATION_FILE, &report)?;
    }
    Ok(report)
}
