//! The benchmark setup: inertia, reference directions, initial and optimal
//! gain vectors, and the three initial conditions used in the experiments.

use crate::controller::GainSet;
use crate::error::Result;
use crate::plant::PlantConfig;
use crate::sim::{ClosedLoop, SimConfig, SimState, DEFAULT_DT, DEFAULT_T_FINAL};
use crate::so3::{Mat3, UnitQuaternion, Vec3};
use crate::tuning::{unpack_kappa, Kappa};

pub fn benchmark_inertia() -> Mat3 {
    Mat3::from_diagonal([0.5, 0.5, 1.0])
}

pub fn benchmark_references() -> Vec<Vec3> {
    vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 1.0)]
}

/// `J = diag(0.5, 0.5, 1)`, `r₁ = [0,0,1]`, `r₂ = [1,0,1]`, `Q_d = (1, 0)`.
pub fn benchmark_plant() -> Result<PlantConfig> {
    PlantConfig::new(benchmark_inertia(), benchmark_references(), UnitQuaternion::IDENTITY)
}

/// Starting point of the gain search.
pub fn kappa0() -> Kappa {
    [6.0, 6.0, 1.0, 0.4, 0.01, 1.0, 0.4, 0.01, 12.0, 11.0, 1.0, 10.0, 10.0, 10.0]
}

/// Reference optimum of the ISE search.
pub fn kappa_final() -> Kappa {
    [
        22.5408, 1.7736, 4.0, 2.0, 0.1, 3.9672, 2.0, 0.1, 50.0, 28.7599, 0.0971, 1.8614, 1.7403, 13.9601,
    ]
}

pub fn tuned_gains() -> Result<GainSet> {
    unpack_kappa(&kappa_final())
}

/// Benchmark plant closed with the reference optimal gains.
pub fn benchmark_model() -> Result<ClosedLoop> {
    ClosedLoop::new(benchmark_plant()?, tuned_gains()?)
}

pub const BASELINE_ATTITUDE: [f64; 4] = [0.8, 0.0, 0.0, 0.6];
pub const UNWINDING_ATTITUDE: [f64; 4] = [-0.8, 0.0, 0.0, 0.6];
/// Euler angles of the tuning initial condition, degrees.
pub const TUNING_EULER_DEG: [f64; 3] = [30.0, 10.0, 45.0];

/// At rest at `attitude` with the filter matched to the measurements.
pub fn scenario_at(model: ClosedLoop, attitude: UnitQuaternion) -> Result<SimConfig> {
    let initial = SimState::with_matched_filter(attitude, Vec3::ZERO, &model);
    SimConfig::new(model, DEFAULT_DT, DEFAULT_T_FINAL, initial)
}

/// `Q(0) = (0.8, 0, 0, 0.6)`, converging to `Ω₁⁺`.
pub fn baseline_scenario() -> Result<SimConfig> {
    scenario_at(benchmark_model()?, UnitQuaternion::from_array(BASELINE_ATTITUDE).expect("unit"))
}

/// `Q(0) = (−0.8, 0, 0, 0.6)`, converging to `Ω₁⁻` without unwinding.
pub fn unwinding_scenario() -> Result<SimConfig> {
    scenario_at(benchmark_model()?, UnitQuaternion::from_array(UNWINDING_ATTITUDE).expect("unit"))
}

pub fn tuning_attitude() -> UnitQuaternion {
    UnitQuaternion::from_euler_xyz_degrees(TUNING_EULER_DEG)
}

/// Initial condition of the gain search, closed with the given gains.
pub fn tuning_scenario(gains: GainSet) -> Result<SimConfig> {
    scenario_at(ClosedLoop::new(benchmark_plant()?, gains)?, tuning_attitude())
}
