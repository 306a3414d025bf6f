//! Closed-loop simulation in physical coordinates `(Q, ω, b̂)`.
//!
//! The integrator is classical fixed-step RK4. The quaternion is carried
//! unnormalized through the four stages (its kinematics are linear in `Q`,
//! measurements use `Q/‖Q‖`) and renormalized once per step.

use std::io::Write;

use crate::analysis::{nearest_equilibrium, EquilibriumLabel};
use crate::controller::{torque, w_rho, GainSet, WRho};
use crate::error::{Error, Result};
use crate::observer::{build_a_matrices, filter_derivative, m_matrix, omega_hat, FilterState};
use crate::plant::{body_vectors_at, desired_body_vectors, euler_dynamics, quat_rate, PlantConfig, PlantState};
use crate::so3::{quat_conj, quat_mul, Mat3, Quaternion, UnitQuaternion, Vec3};

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_FINAL: f64 = 20.0;

/// Largest `|‖Q‖ − 1|` tolerated after one step, before renormalization.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// States with any component above this magnitude count as diverged.
const BLOW_UP_MAGNITUDE: f64 = 1e8;

/// `‖q̄‖` and `‖ω‖` thresholds for declaring convergence.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-3;
/// How long both thresholds must hold, in seconds.
pub const CONVERGENCE_HOLD: f64 = 1.0;

/// Plant plus gains with everything the vector field needs precomputed.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    plant: PlantConfig,
    gains: GainSet,
    a: Vec<Mat3>,
    a_rotated: Vec<Mat3>,
    desired: Vec<Vec3>,
    w: WRho,
    inertia_rotated: Mat3,
}

impl ClosedLoop {
    pub fn new(plant: PlantConfig, gains: GainSet) -> Result<Self> {
        if gains.vector_count() != plant.vector_count() {
            return Err(Error::DimensionMismatch {
                what: "gain entries (one per reference vector)",
                expected: plant.vector_count(),
                actual: gains.vector_count(),
            });
        }
        let a = build_a_matrices(&gains.filter, plant.desired_attitude())?;
        let rd = plant.desired_rotation().matrix();
        let a_rotated = a.iter().map(|ai| rd * *ai * rd.transpose()).collect();
        let w = w_rho(&gains.control, plant.reference_vectors())?;
        let desired = desired_body_vectors(&plant);
        let inertia_rotated = rd * *plant.inertia() * rd.transpose();
        Ok(Self {
            plant,
            gains,
            a,
            a_rotated,
            desired,
            w,
            inertia_rotated,
        })
    }

    pub fn plant(&self) -> &PlantConfig {
        &self.plant
    }

    pub fn gains(&self) -> &GainSet {
        &self.gains
    }

    /// Filter matrices `A_i`.
    pub fn a_matrices(&self) -> &[Mat3] {
        &self.a
    }

    /// `R_d A_i R_dᵀ`, the diagonal blocks of `A_d`.
    pub fn a_rotated(&self) -> &[Mat3] {
        &self.a_rotated
    }

    /// `b_i^d`
    pub fn desired_vectors(&self) -> &[Vec3] {
        &self.desired
    }

    pub fn w_rho(&self) -> &WRho {
        &self.w
    }

    /// `J_d = R_d J R_dᵀ`
    pub fn inertia_rotated(&self) -> &Mat3 {
        &self.inertia_rotated
    }

    /// `Q̄ = Q ⊙ Q_d⁻¹`
    pub fn attitude_error(&self, attitude: &UnitQuaternion) -> UnitQuaternion {
        quat_mul(attitude, &quat_conj(self.plant.desired_attitude()))
    }

    /// Physical attitude for a given error quaternion, `Q = Q̄ ⊙ Q_d`.
    pub fn attitude_from_error(&self, q_bar: &UnitQuaternion) -> UnitQuaternion {
        quat_mul(q_bar, self.plant.desired_attitude())
    }
}

/// Physical state plus filter state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub plant: PlantState,
    pub filter: FilterState,
}

impl SimState {
    /// Filter initialized on the current measurements, so `ξ(0) = 0`.
    pub fn with_matched_filter(attitude: UnitQuaternion, omega: Vec3, model: &ClosedLoop) -> Self {
        let b = body_vectors_at(&attitude, model.plant.reference_vectors());
        Self {
            plant: PlantState { attitude, omega },
            filter: FilterState::matching(&b),
        }
    }

    pub fn measurements(&self, model: &ClosedLoop) -> Vec<Vec3> {
        body_vectors_at(&self.plant.attitude, model.plant.reference_vectors())
    }

    /// `ξ_i = b_i − b̂_i`
    pub fn filter_error(&self, model: &ClosedLoop) -> Vec<Vec3> {
        self.filter.error(&self.measurements(model))
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(7 + 3 * self.filter.b_hat.len());
        y.extend(self.plant.attitude.to_array());
        y.extend(self.plant.omega.to_array());
        for b in &self.filter.b_hat {
            y.extend(b.to_array());
        }
        y
    }
}

/// Time derivative of a [`SimState`]; the attitude rate is a tangent vector,
/// not a unit quaternion.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRate {
    pub attitude: Quaternion,
    pub omega: Vec3,
    pub b_hat: Vec<Vec3>,
}

/// Integration settings together with the closed-loop model.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: ClosedLoop,
    pub dt: f64,
    pub t_final: f64,
    pub initial: SimState,
}

impl SimConfig {
    pub fn new(model: ClosedLoop, dt: f64, t_final: f64, initial: SimState) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if !(t_final >= dt && t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_final must be at least dt, got {t_final}")));
        }
        if initial.filter.b_hat.len() != model.plant.vector_count() {
            return Err(Error::DimensionMismatch {
                what: "initial filter vectors",
                expected: model.plant.vector_count(),
                actual: initial.filter.b_hat.len(),
            });
        }
        Ok(Self { model, dt, t_final, initial })
    }

    /// Number of integration steps on the uniform grid.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

struct Evaluation {
    rate: SimRate,
    omega_hat: Vec3,
    torque: Vec3,
}

/// Vector field with the attitude taken as an arbitrary nonzero quaternion:
/// measurements use its normalization, kinematics use it as is.
fn evaluate(q_raw: &Quaternion, omega: Vec3, filter: &FilterState, model: &ClosedLoop) -> Result<Evaluation> {
    let unit = UnitQuaternion::new_normalize(*q_raw).ok_or(Error::IntegrationBlowUp { t: f64::NAN })?;
    let b = body_vectors_at(&unit, model.plant.reference_vectors());
    let lambda = model.gains.filter.lambda();
    let m = m_matrix(&b, lambda)?;
    let w_hat = omega_hat(filter, &b, &model.gains.filter, &model.a)?;
    let tau = torque(&model.gains.control, &b, &model.desired, &m, w_hat);
    Ok(Evaluation {
        rate: SimRate {
            attitude: quat_rate(q_raw, omega),
            omega: euler_dynamics(omega, tau, &model.plant),
            b_hat: filter_derivative(filter, &b, &model.a),
        },
        omega_hat: w_hat,
        torque: tau,
    })
}

/// `(Q̇, ω̇, b̂̇)` from the filter, quaternion kinematics and Euler dynamics
/// with `τ = z_ρ − M ω̂`.
pub fn closed_loop_derivative(state: &SimState, model: &ClosedLoop) -> Result<SimRate> {
    evaluate(&state.plant.attitude.as_quaternion(), state.plant.omega, &state.filter, model).map(|e| e.rate)
}

/// `ω̂` and `τ` at a state.
pub fn controller_outputs(state: &SimState, model: &ClosedLoop) -> Result<(Vec3, Vec3)> {
    let e = evaluate(&state.plant.attitude.as_quaternion(), state.plant.omega, &state.filter, model)?;
    Ok((e.omega_hat, e.torque))
}

/// One classical RK4 step `y + h/6 (k1 + 2k2 + 2k3 + k4)` for a flat state.
pub fn rk4_step_with<F>(y: &[f64], h: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: &[f64], s: f64, k: &[f64]| a.iter().zip(k).map(|(x, d)| x + s * d).collect::<Vec<f64>>();
    let k1 = f(y)?;
    let k2 = f(&axpy(y, h / 2.0, &k1))?;
    let k3 = f(&axpy(y, h / 2.0, &k2))?;
    let k4 = f(&axpy(y, h, &k3))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn flat_rate(y: &[f64], model: &ClosedLoop) -> Result<Vec<f64>> {
    let q = Quaternion::from_array([y[0], y[1], y[2], y[3]]);
    let omega = Vec3::new(y[4], y[5], y[6]);
    let filter = FilterState {
        b_hat: y[7..].chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect(),
    };
    let rate = evaluate(&q, omega, &filter, model)?.rate;
    let mut out = Vec::with_capacity(y.len());
    out.extend(rate.attitude.to_array());
    out.extend(rate.omega.to_array());
    for b in rate.b_hat {
        out.extend(b.to_array());
    }
    Ok(out)
}

/// Advances the closed loop by `dt`, renormalizing the quaternion. `t` is
/// only used in error reports.
pub fn rk4_step(state: &SimState, dt: f64, model: &ClosedLoop, t: f64) -> Result<SimState> {
    let y = state.pack();
    let next = rk4_step_with(&y, dt, |y| flat_rate(y, model)).map_err(|e| match e {
        Error::IntegrationBlowUp { .. } => Error::IntegrationBlowUp { t },
        other => other,
    })?;
    if next.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_MAGNITUDE) {
        return Err(Error::IntegrationBlowUp { t: t + dt });
    }
    let q = Quaternion::from_array([next[0], next[1], next[2], next[3]]);
    let deviation = (q.norm() - 1.0).abs();
    if deviation > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift { t: t + dt, deviation });
    }
    let attitude = UnitQuaternion::new_normalize(q).ok_or(Error::IntegrationBlowUp { t: t + dt })?;
    Ok(SimState {
        plant: PlantState {
            attitude,
            omega: Vec3::new(next[4], next[5], next[6]),
        },
        filter: FilterState {
            b_hat: next[7..].chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect(),
        },
    })
}

/// `V = ξᵀ Γ A_d ξ + 4 q̄ᵀ W_ρ q̄ + ωᵀ J_d ω` with `ξ` and `ω` rotated by `R_d`.
///
/// Non-increasing along closed-loop trajectories whenever `R_d` commutes with
/// every `Λ_i` (in particular `R_d = I`).
pub fn lyapunov_v(state: &SimState, model: &ClosedLoop) -> f64 {
    let rd = model.plant.desired_rotation();
    let xi = state.filter_error(model);
    let filter_term: f64 = xi
        .iter()
        .zip(model.gains.filter.lambda())
        .zip(&model.a_rotated)
        .map(|((x, l), ad)| {
            let xr = rd.rotate(*x);
            xr.dot(&(*l * (*ad * xr)))
        })
        .sum();
    let q_bar = model.attitude_error(&state.plant.attitude).vector();
    let wr = rd.rotate(state.plant.omega);
    filter_term + 4.0 * q_bar.dot(&(model.w.matrix * q_bar)) + wr.dot(&(model.inertia_rotated * wr))
}

/// `V̇ = −ξᵀ (2 Γ A_d²) ξ ≤ 0`, rotated coordinates as in [`lyapunov_v`].
pub fn lyapunov_vdot(state: &SimState, model: &ClosedLoop) -> f64 {
    let rd = model.plant.desired_rotation();
    let xi = state.filter_error(model);
    -xi.iter()
        .zip(model.gains.filter.lambda())
        .zip(&model.a_rotated)
        .map(|((x, l), ad)| {
            let xr = rd.rotate(*x);
            2.0 * xr.dot(&(*l * (*ad * (*ad * xr))))
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub attitude: UnitQuaternion,
    pub q_bar: UnitQuaternion,
    pub omega: Vec3,
    pub omega_hat: Vec3,
    pub xi: Vec<Vec3>,
    pub torque: Vec3,
    pub v: f64,
}

impl Sample {
    fn at(t: f64, state: &SimState, model: &ClosedLoop) -> Result<Self> {
        let (omega_hat, torque) = controller_outputs(state, model)?;
        Ok(Self {
            t,
            attitude: state.plant.attitude,
            q_bar: model.attitude_error(&state.plant.attitude),
            omega: state.plant.omega,
            omega_hat,
            xi: state.filter_error(model),
            torque,
            v: lyapunov_v(state, model),
        })
    }

    fn converged(&self) -> bool {
        self.q_bar.vector().norm() < CONVERGENCE_THRESHOLD && self.omega.norm() < CONVERGENCE_THRESHOLD
    }
}

pub const CSV_HEADER: &str = "t,q0,q1,q2,q3,qbar0,qbar1,qbar2,qbar3,wx,wy,wz,what_x,what_y,what_z,tau_x,tau_y,tau_z,V";

/// Uniformly sampled closed-loop run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<Sample>,
    /// State at the last sample, filter included.
    pub final_state: SimState,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// First time from which `‖q̄‖ < 1e-3` and `‖ω‖ < 1e-3` hold for
    /// [`CONVERGENCE_HOLD`] seconds through the end of the run.
    pub fn convergence_time(&self) -> Option<f64> {
        let hold = (CONVERGENCE_HOLD / self.dt).round() as usize;
        let tail = self.samples.iter().rev().take_while(|s| s.converged()).count();
        if tail == 0 || tail <= hold {
            return None;
        }
        Some(self.samples[self.samples.len() - tail].t)
    }

    pub fn terminal_equilibrium(&self, model: &ClosedLoop) -> (EquilibriumLabel, f64) {
        nearest_equilibrium(&self.final_state, model)
    }

    pub fn peak_torque(&self) -> f64 {
        self.samples.iter().map(|s| s.torque.norm()).fold(0.0, f64::max)
    }

    /// Trapezoid rule over the sample grid.
    pub fn integrate<F: Fn(&Sample) -> f64>(&self, integrand: F) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (integrand(&w[0]) + integrand(&w[1])))
            .sum()
    }

    /// `∫ ‖τ‖² dt`
    pub fn torque_energy(&self) -> f64 {
        self.integrate(|s| s.torque.norm_squared())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            let mut fields: Vec<f64> = vec![s.t];
            fields.extend(s.attitude.to_array());
            fields.extend(s.q_bar.to_array());
            fields.extend(s.omega.to_array());
            fields.extend(s.omega_hat.to_array());
            fields.extend(s.torque.to_array());
            fields.push(s.v);
            let line: Vec<String> = fields.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Slack of the per-step monotonicity test, relative to `max(1, V)`.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-8;

/// Per-step increases of `V` along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// Steps with `V(t_{k+1}) > V(t_k) + 1e-8·max(1, V(t_k))`.
    pub strict_violations: Vec<usize>,
    pub worst_relative_increase: f64,
    /// Violations larger than the step-doubling estimate of that step's
    /// local RK4 error, i.e. not attributable to the integrator.
    pub unexplained: Vec<usize>,
}

impl MonotonicityReport {
    pub fn strictly_monotone(&self) -> bool {
        self.strict_violations.is_empty()
    }
}

impl Sample {
    /// Full state at this sample, filter recovered as `b̂ = b − ξ`.
    pub fn state(&self, model: &ClosedLoop) -> SimState {
        let b = body_vectors_at(&self.attitude, model.plant.reference_vectors());
        SimState {
            plant: PlantState {
                attitude: self.attitude,
                omega: self.omega,
            },
            filter: FilterState {
                b_hat: b.iter().zip(&self.xi).map(|(b, x)| *b - *x).collect(),
            },
        }
    }
}

pub fn lyapunov_monotonicity(traj: &Trajectory, model: &ClosedLoop) -> MonotonicityReport {
    let mut report = MonotonicityReport {
        strict_violations: Vec::new(),
        worst_relative_increase: f64::NEG_INFINITY,
        unexplained: Vec::new(),
    };
    for (k, w) in traj.samples.windows(2).enumerate() {
        let scale = w[0].v.max(1.0);
        let increase = w[1].v - w[0].v;
        report.worst_relative_increase = report.worst_relative_increase.max(increase / scale);
        if increase <= MONOTONICITY_TOLERANCE * scale {
            continue;
        }
        report.strict_violations.push(k);
        let start = w[0].state(model);
        let h = w[1].t - w[0].t;
        let halves = rk4_step(&start, h / 2.0, model, w[0].t)
            .and_then(|s| rk4_step(&s, h / 2.0, model, w[0].t + h / 2.0))
            .map(|s| lyapunov_v(&s, model));
        let explained = match halves {
            Ok(v_half) => increase <= (w[1].v - v_half).abs() * 16.0 / 15.0,
            Err(_) => false,
        };
        if !explained {
            report.unexplained.push(k);
        }
    }
    report
}

/// Runs the closed loop on the grid `t_k = k·dt`, `k = 0..=round(t_final/dt)`.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    let model = &config.model;
    let steps = config.steps();
    let mut samples = Vec::with_capacity(steps + 1);
    let mut state = config.initial.clone();
    samples.push(Sample::at(0.0, &state, model)?);
    for k in 0..steps {
        let t = k as f64 * config.dt;
        state = rk4_step(&state, config.dt, model, t)?;
        samples.push(Sample::at((k + 1) as f64 * config.dt, &state, model)?);
    }
    Ok(Trajectory {
        dt: config.dt,
        samples,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn baseline() -> SimConfig {
        presets::baseline_scenario().unwrap()
    }

    #[test]
    fn rk4_scalar_decay() {
        let y = rk4_step_with(&[1.0], 0.01, |y| Ok(vec![-y[0]])).unwrap();
        assert!((y[0] - 0.9900498337).abs() < 1e-10);
        assert!((y[0] - (-0.01f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let cfg = baseline();
        let model = &cfg.model;
        for q in [UnitQuaternion::IDENTITY, UnitQuaternion::IDENTITY.negate()] {
            let s = SimState::with_matched_filter(q, Vec3::ZERO, model);
            let rate = closed_loop_derivative(&s, model).unwrap();
            assert_eq!(rate.attitude.to_array(), [0.0; 4]);
            assert_eq!(rate.omega, Vec3::ZERO);
            assert!(rate.b_hat.iter().all(|b| *b == Vec3::ZERO));
            let next = rk4_step(&s, 0.01, model, 0.0).unwrap();
            assert!(next.plant.attitude.to_array().iter().zip(q.to_array()).all(|(a, b)| (a - b).abs() <= 1e-15));
        }
    }

    #[test]
    fn unstable_equilibria_are_fixed_points() {
        let cfg = baseline();
        let model = &cfg.model;
        for v in model.w_rho().eigenvectors {
            for s in [1.0, -1.0] {
                let q_bar = UnitQuaternion::from_array([0.0, s * v.x, s * v.y, s * v.z]).unwrap();
                let state = SimState::with_matched_filter(model.attitude_from_error(&q_bar), Vec3::ZERO, model);
                let rate = closed_loop_derivative(&state, model).unwrap();
                assert!(rate.omega.norm() < 1e-9);
                assert!(rate.attitude.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn starting_at_rest_stays_at_rest() {
        let mut cfg = baseline();
        cfg.t_final = 1.0;
        cfg.initial = SimState::with_matched_filter(UnitQuaternion::IDENTITY, Vec3::ZERO, &cfg.model);
        let traj = simulate(&cfg).unwrap();
        assert_eq!(traj.samples.len(), 101);
        assert!(traj.samples.iter().all(|s| s.attitude == UnitQuaternion::IDENTITY && s.v == 0.0));
    }

    #[test]
    fn lyapunov_examples() {
        let cfg = baseline();
        let model = &cfg.model;
        let at_rest = SimState::with_matched_filter(UnitQuaternion::IDENTITY, Vec3::ZERO, model);
        assert_eq!(lyapunov_v(&at_rest, model), 0.0);
        assert_eq!(lyapunov_vdot(&at_rest, model), 0.0);

        let v = model.w_rho().eigenvectors[0];
        let q_bar = UnitQuaternion::from_array([0.0, v.x, v.y, v.z]).unwrap();
        let s = SimState::with_matched_filter(model.attitude_from_error(&q_bar), Vec3::ZERO, model);
        assert!((lyapunov_v(&s, model) - 4.0 * model.w_rho().lambda_min()).abs() < 1e-12);

        let spinning = SimState::with_matched_filter(UnitQuaternion::IDENTITY, Vec3::new(1.0, 0.0, 0.0), model);
        assert!((lyapunov_v(&spinning, model) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn first_step_increase_is_integrator_error() {
        let cfg = baseline();
        let traj = simulate(&cfg).unwrap();
        let r = lyapunov_monotonicity(&traj, &cfg.model);
        // ξ(0) = 0 gives V̇(0) = 0, and the first RK4 step at dt = 0.01 overshoots
        assert_eq!(r.strict_violations, vec![0]);
        assert!(r.unexplained.is_empty());
        let mut fine = baseline();
        fine.dt = 0.005;
        let traj = simulate(&fine).unwrap();
        assert!(lyapunov_monotonicity(&traj, &fine.model).strictly_monotone());
    }

    #[test]
    fn sample_state_round_trips() {
        let mut cfg = baseline();
        cfg.t_final = 0.1;
        let traj = simulate(&cfg).unwrap();
        let s = traj.last().state(&cfg.model);
        assert!(s.filter.b_hat.iter().zip(&traj.final_state.filter.b_hat).all(|(a, b)| a.max_abs_diff(b) < 1e-15));
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let cfg = baseline();
        assert!(SimConfig::new(cfg.model.clone(), 0.0, 1.0, cfg.initial.clone()).is_err());
        assert!(SimConfig::new(cfg.model.clone(), 0.01, 0.001, cfg.initial.clone()).is_err());
    }

    #[test]
    fn csv_has_header_and_one_row_per_sample() {
        let mut cfg = baseline();
        cfg.t_final = 0.05;
        let traj = simulate(&cfg).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), traj.samples.len() + 1);
        let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first.len(), 19);
        assert_eq!(first[1..5], [0.8, 0.0, 0.0, 0.6]);
        // shortest round-trip: values parse back bit-exactly
        let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(last[18], traj.last().v);
    }

    #[test]
    fn diverging_run_reports_blow_up() {
        // dt far outside the RK4 stability region for these gains
        let mut cfg = baseline();
        cfg.dt = 0.05;
        let err = simulate(&cfg).unwrap_err();
        assert!(matches!(err, Error::IntegrationBlowUp { .. } | Error::NormDrift { .. } | Error::SingularM { .. }), "{err}");
    }
}
