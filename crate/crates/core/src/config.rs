//! JSON run configuration.
//!
//! Quaternions are `[q0, q1, q2, q3]`, matrices are row-major nested arrays.
//! Unknown keys are rejected. A minimal file:
//!
//! ```json
//! {
//!   "plant": {
//!     "inertia": [[0.5, 0, 0], [0, 0.5, 0], [0, 0, 1]],
//!     "reference_vectors": [[0, 0, 1], [1, 0, 1]]
//!   },
//!   "gains": { "kappa": [22.5408, 1.7736, 4, 2, 0.1, 3.9672, 2, 0.1,
//!                        50, 28.7599, 0.0971, 1.8614, 1.7403, 13.9601] },
//!   "sim": { "initial_attitude": [0.8, 0, 0, 0.6] }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::{ControlGains, GainSet};
use crate::error::{Error, Result};
use crate::observer::{FilterGains, FilterState};
use crate::plant::{PlantConfig, PlantState};
use crate::sim::{ClosedLoop, SimConfig, SimState, DEFAULT_DT, DEFAULT_T_FINAL};
use crate::so3::{Mat3, Quaternion, UnitQuaternion, Vec3};
use crate::tuning::{unpack_kappa, Bounds, Kappa, ObjectiveKind, DEFAULT_SIGMA, MAX_ITERATIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plant: PlantSection,
    pub gains: GainsSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub tuning: TuningSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub inertia: [[f64; 3]; 3],
    pub reference_vectors: Vec<[f64; 3]>,
    #[serde(default = "identity_quaternion")]
    pub desired_attitude: [f64; 4],
}

fn identity_quaternion() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

/// Either a packed 14-entry `κ` (two reference vectors) or explicit gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainsSection {
    Kappa {
        kappa: Vec<f64>,
    },
    Explicit {
        rho: Vec<f64>,
        /// Symmetric positive definite `Λ_i`, one per vector.
        lambda: Vec<[[f64; 3]; 3]>,
        /// `[a_i0, a_i1, a_i2]` of `A_i = a_i0 I + a_i1 Λ_i + a_i2 Λ_i²`.
        poly_coeffs: Vec<[f64; 3]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub t_final: f64,
    pub initial_attitude: [f64; 4],
    pub initial_omega: [f64; 3],
    /// `b̂_i(0)`; defaults to the measurements at `t = 0` (zero filter error).
    pub initial_filter: Option<Vec<[f64; 3]>>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: DEFAULT_T_FINAL,
            initial_attitude: identity_quaternion(),
            initial_omega: [0.0; 3],
            initial_filter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuningSection {
    /// Defaults to the standard box.
    pub bounds: Option<Bounds>,
    pub kind: ObjectiveKind,
    pub sigma: f64,
    pub n_starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// First start; defaults to the configured gains, which must then be a `κ`.
    pub kappa0: Option<Kappa>,
}

impl Default for TuningSection {
    fn default() -> Self {
        Self {
            bounds: None,
            kind: ObjectiveKind::Ise,
            sigma: DEFAULT_SIGMA,
            n_starts: 4,
            seed: 0,
            max_iterations: MAX_ITERATIONS,
            kappa0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{name}: {msg}")),
        other => Error::InvalidConfig(format!("{name}: {other}")),
    })
}

fn unit(name: &str, q: [f64; 4]) -> Result<UnitQuaternion> {
    UnitQuaternion::try_from_unit(Quaternion::from_array(q))
        .ok_or_else(|| Error::InvalidConfig(format!("{name}: {q:?} is not a unit quaternion")))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name}: must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Parses and validates; syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every section against the invariants of the modules it feeds.
    pub fn validate(&self) -> Result<()> {
        let model = self.model()?;
        positive("sim.dt", self.sim.dt)?;
        positive("sim.t_final", self.sim.t_final)?;
        if self.sim.t_final < self.sim.dt {
            return Err(Error::InvalidConfig("sim.t_final: must be at least sim.dt".into()));
        }
        self.initial_state(&model)?;
        if !(self.tuning.sigma >= 0.0 && self.tuning.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("tuning.sigma: must be nonnegative, got {}", self.tuning.sigma)));
        }
        if self.tuning.n_starts == 0 {
            return Err(Error::InvalidConfig("tuning.n_starts: must be at least 1".into()));
        }
        if let Some(b) = &self.tuning.bounds {
            field("tuning.bounds", Bounds::new(b.lower, b.upper))?;
        }
        if let Some(k) = &self.tuning.kappa0 {
            field("tuning.kappa0", unpack_kappa(k))?;
        }
        Ok(())
    }

    pub fn plant(&self) -> Result<PlantConfig> {
        let p = &self.plant;
        let qd = unit("plant.desired_attitude", p.desired_attitude)?;
        field(
            "plant",
            PlantConfig::new(
                Mat3::from_rows(p.inertia),
                p.reference_vectors.iter().map(|r| Vec3::from(*r)).collect(),
                qd,
            ),
        )
    }

    pub fn gain_set(&self) -> Result<GainSet> {
        match &self.gains {
            GainsSection::Kappa { kappa } => field("gains.kappa", unpack_kappa(kappa)),
            GainsSection::Explicit { rho, lambda, poly_coeffs } => {
                let control = field("gains.rho", ControlGains::new(rho.clone()))?;
                let filter = field(
                    "gains.lambda",
                    FilterGains::new(lambda.iter().map(|m| Mat3::from_rows(*m)).collect(), poly_coeffs.clone()),
                )?;
                field("gains", GainSet::new(control, filter))
            }
        }
    }

    pub fn model(&self) -> Result<ClosedLoop> {
        field("gains", ClosedLoop::new(self.plant()?, self.gain_set()?))
    }

    fn initial_state(&self, model: &ClosedLoop) -> Result<SimState> {
        let attitude = unit("sim.initial_attitude", self.sim.initial_attitude)?;
        let omega = Vec3::from(self.sim.initial_omega);
        if !omega.is_finite() {
            return Err(Error::InvalidConfig("sim.initial_omega: must be finite".into()));
        }
        match &self.sim.initial_filter {
            None => Ok(SimState::with_matched_filter(attitude, omega, model)),
            Some(b_hat) => {
                if b_hat.len() != model.plant().vector_count() {
                    return Err(Error::InvalidConfig(format!(
                        "sim.initial_filter: expected {} vectors, got {}",
                        model.plant().vector_count(),
                        b_hat.len()
                    )));
                }
                Ok(SimState {
                    plant: PlantState { attitude, omega },
                    filter: FilterState {
                        b_hat: b_hat.iter().map(|b| Vec3::from(*b)).collect(),
                    },
                })
            }
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let model = self.model()?;
        let initial = self.initial_state(&model)?;
        field("sim", SimConfig::new(model, self.sim.dt, self.sim.t_final, initial))
    }

    pub fn bounds(&self) -> Bounds {
        self.tuning.bounds.clone().unwrap_or_else(Bounds::standard)
    }

    /// Starting gain vector of the search.
    pub fn kappa0(&self) -> Result<Kappa> {
        if let Some(k) = self.tuning.kappa0 {
            return Ok(k);
        }
        match &self.gains {
            GainsSection::Kappa { kappa } => kappa
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidConfig("gains.kappa: expected 14 entries".into())),
            GainsSection::Explicit { .. } => Err(Error::InvalidConfig(
                "tuning.kappa0: required when gains are given explicitly".into(),
            )),
        }
    }

    /// Applies command-line overrides and revalidates.
    pub fn with_overrides(mut self, dt: Option<f64>, t_final: Option<f64>, seed: Option<u64>) -> Result<Self> {
        if let Some(dt) = dt {
            self.sim.dt = dt;
        }
        if let Some(t) = t_final {
            self.sim.t_final = t;
        }
        if let Some(s) = seed {
            self.tuning.seed = s;
        }
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASELINE: &str = r#"{
        "plant": {
            "inertia": [[0.5, 0, 0], [0, 0.5, 0], [0, 0, 1]],
            "reference_vectors": [[0, 0, 1], [1, 0, 1]]
        },
        "gains": { "kappa": [22.5408, 1.7736, 4, 2, 0.1, 3.9672, 2, 0.1, 50, 28.7599, 0.0971, 1.8614, 1.7403, 13.9601] },
        "sim": { "initial_attitude": [0.8, 0, 0, 0.6] }
    }"#;

    fn err(text: &str) -> String {
        RunConfig::from_json(text).unwrap_err().to_string()
    }

    #[test]
    fn parses_with_defaults() {
        let cfg = RunConfig::from_json(BASELINE).unwrap();
        assert_eq!(cfg.sim.dt, 0.01);
        assert_eq!(cfg.sim.t_final, 20.0);
        assert_eq!(cfg.plant.desired_attitude, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(cfg.tuning.kind, ObjectiveKind::Ise);
        let sim = cfg.sim_config().unwrap();
        assert_eq!(sim.steps(), 2000);
        assert_eq!(cfg.kappa0().unwrap(), crate::presets::kappa_final());
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn missing_inertia_is_named() {
        let text = BASELINE.replace(r#""inertia": [[0.5, 0, 0], [0, 0.5, 0], [0, 0, 1]],"#, "");
        let e = err(&text);
        assert!(e.contains("missing field `inertia`") && e.contains("line"), "{e}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        assert!(err(&BASELINE.replace("[0.8, 0, 0, 0.6]", "[0.8, 0, 0, 0.5]")).contains("sim.initial_attitude"));
        assert!(err(&BASELINE.replace("[[0, 0, 1], [1, 0, 1]]", "[[0, 0, 1], [0, 0, 2]]")).contains("plant"));
        assert!(err(&BASELINE.replace("22.5408", "-1")).contains("gains.kappa"));
        assert!(err(&BASELINE.replace("[0.5, 0, 0], [0, 0.5, 0]", "[0.5, 0, 0], [0, -0.5, 0]")).contains("plant"));
        let e = err(&BASELINE.replace(r#""sim": {"#, r#""sim": { "dt": 0,"#));
        assert!(e.contains("sim.dt"), "{e}");
        let e = err(&BASELINE.replace(r#""sim": {"#, r#""sim": { "tfinal": 3,"#));
        assert!(e.contains("unknown field"), "{e}");
    }

    #[test]
    fn collinear_references_rejected() {
        let text = BASELINE.replace("[[0, 0, 1], [1, 0, 1]]", "[[0, 0, 1], [0, 0, 2]]");
        assert!(err(&text).starts_with("invalid configuration: plant"));
    }

    #[test]
    fn explicit_gains_and_filter_override() {
        let text = BASELINE
            .replace(
                r#"{ "kappa": [22.5408, 1.7736, 4, 2, 0.1, 3.9672, 2, 0.1, 50, 28.7599, 0.0971, 1.8614, 1.7403, 13.9601] }"#,
                r#"{ "rho": [1, 1], "lambda": [[[1,0,0],[0,1,0],[0,0,1]], [[2,0,0],[0,2,0],[0,0,2]]], "poly_coeffs": [[1, 0.5, 0], [1, 0.5, 0]] }"#,
            )
            .replace(r#""sim": {"#, r#""sim": { "initial_filter": [[0, 0, 1], [1, 0, 1]],"#);
        let cfg = RunConfig::from_json(&text).unwrap();
        let sim = cfg.sim_config().unwrap();
        assert_eq!(sim.initial.filter.b_hat[1], Vec3::new(1.0, 0.0, 1.0));
        assert!(cfg.kappa0().is_err());
        let bad = text.replace(r#""initial_filter": [[0, 0, 1], [1, 0, 1]]"#, r#""initial_filter": [[0, 0, 1]]"#);
        assert!(err(&bad).contains("sim.initial_filter"));
    }

    #[test]
    fn overrides_apply_and_revalidate() {
        let cfg = RunConfig::from_json(BASELINE).unwrap();
        let o = cfg.clone().with_overrides(Some(0.005), Some(2.0), Some(9)).unwrap();
        assert_eq!((o.sim.dt, o.sim.t_final, o.tuning.seed), (0.005, 2.0, 9));
        assert!(cfg.with_overrides(Some(-1.0), None, None).is_err());
    }
}
