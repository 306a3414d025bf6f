//! Rigid-body rotational kinematics and dynamics, and the body-frame vector
//! measurements `b_i = Rᵀ r_i` the controller is allowed to see.

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen3;
use crate::so3::{rodrigues, skew, Mat3, Quaternion, RotationMatrix, UnitQuaternion, Vec3};

/// Relative threshold for `‖r_i × r_j‖ > tol·‖r_i‖‖r_j‖`.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-9;

/// Inertia, inertial reference directions and desired attitude.
///
/// Reference vectors are stored as given (not normalized); only their
/// non-collinearity matters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    inertia: Mat3,
    inertia_inv: Mat3,
    reference_vectors: Vec<Vec3>,
    desired_attitude: UnitQuaternion,
    desired_rotation: RotationMatrix,
}

impl PlantConfig {
    pub fn new(
        inertia: Mat3,
        reference_vectors: Vec<Vec3>,
        desired_attitude: UnitQuaternion,
    ) -> Result<Self> {
        if !inertia.is_finite() || inertia.asymmetry() > 1e-9 {
            return Err(Error::InertiaNotSpd);
        }
        let eig = symmetric_eigen3(&inertia);
        if eig.values[0] <= 1e-9 * eig.values[2].abs().max(1.0) {
            return Err(Error::InertiaNotSpd);
        }
        let inertia_inv = inertia.try_inverse(0.0).ok_or(Error::InertiaNotSpd)?;

        if reference_vectors.len() < 2 {
            return Err(Error::DimensionMismatch {
                what: "reference vectors (at least)",
                expected: 2,
                actual: reference_vectors.len(),
            });
        }
        if reference_vectors.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidConfig("reference vector has a non-finite entry".into()));
        }
        if !has_non_collinear_pair(&reference_vectors) {
            return Err(Error::CollinearReferences);
        }

        Ok(Self {
            inertia,
            inertia_inv,
            reference_vectors,
            desired_attitude,
            desired_rotation: rodrigues(&desired_attitude),
        })
    }

    pub fn inertia(&self) -> &Mat3 {
        &self.inertia
    }

    pub fn inertia_inverse(&self) -> &Mat3 {
        &self.inertia_inv
    }

    pub fn reference_vectors(&self) -> &[Vec3] {
        &self.reference_vectors
    }

    pub fn vector_count(&self) -> usize {
        self.reference_vectors.len()
    }

    pub fn desired_attitude(&self) -> &UnitQuaternion {
        &self.desired_attitude
    }

    /// `R_d = R(Q_d)`
    pub fn desired_rotation(&self) -> &RotationMatrix {
        &self.desired_rotation
    }
}

/// True when at least one pair of vectors passes the collinearity threshold.
pub fn has_non_collinear_pair(vectors: &[Vec3]) -> bool {
    vectors.iter().enumerate().any(|(i, a)| {
        vectors[i + 1..].iter().any(|b| {
            let scale = a.norm() * b.norm();
            scale > 0.0 && a.cross(b).norm() > COLLINEARITY_TOLERANCE * scale
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub attitude: UnitQuaternion,
    /// Body-frame angular velocity, rad/s.
    pub omega: Vec3,
}

impl PlantState {
    pub fn at_rest(attitude: UnitQuaternion) -> Self {
        Self { attitude, omega: Vec3::ZERO }
    }
}

/// `b_i = R(Q)ᵀ r_i` for every reference vector.
pub fn body_vectors(state: &PlantState, config: &PlantConfig) -> Vec<Vec3> {
    body_vectors_at(&state.attitude, config.reference_vectors())
}

pub fn body_vectors_at(attitude: &UnitQuaternion, reference_vectors: &[Vec3]) -> Vec<Vec3> {
    let r = rodrigues(attitude);
    reference_vectors.iter().map(|ri| r.inverse_rotate(*ri)).collect()
}

/// `b_i^d = R_dᵀ r_i`
pub fn desired_body_vectors(config: &PlantConfig) -> Vec<Vec3> {
    let rd = config.desired_rotation();
    config.reference_vectors().iter().map(|ri| rd.inverse_rotate(*ri)).collect()
}

/// `Q̇ = (−½ qᵀω, ½ (q0 I + S(q)) ω)`.
pub fn quat_kinematics(state: &PlantState) -> Quaternion {
    quat_rate(&state.attitude.as_quaternion(), state.omega)
}

/// Same formula for a quaternion that need not be on the sphere; it is linear
/// in `q`, which is what the integrator needs for its intermediate stages.
pub fn quat_rate(q: &Quaternion, omega: Vec3) -> Quaternion {
    Quaternion::new(
        -0.5 * q.v.dot(&omega),
        (omega * q.w + q.v.cross(&omega)) * 0.5,
    )
}

/// `ω̇ = J⁻¹(−S(ω) J ω + τ)`
pub fn euler_dynamics(omega: Vec3, torque: Vec3, config: &PlantConfig) -> Vec3 {
    euler_dynamics_with(omega, torque, config.inertia(), config.inertia_inverse())
}

pub fn euler_dynamics_with(omega: Vec3, torque: Vec3, inertia: &Mat3, inertia_inv: &Mat3) -> Vec3 {
    *inertia_inv * (torque - omega.cross(&(*inertia * omega)))
}

/// `ḃ = −S(ω) b`
pub fn reduced_kinematics(b: Vec3, omega: Vec3) -> Vec3 {
    -(skew(omega) * b)
}
