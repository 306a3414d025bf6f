//! The stabilizing torque `τ = z_ρ − M ω̂`.
//!
//! `z_ρ = Σ ρ_i S(b_i^d) b_i` is computed from measured and desired body
//! vectors only. Its quaternion form `−2 R_dᵀ (q̄0 I − S(q̄)) W_ρ q̄` with
//! `W_ρ = −Σ ρ_i S²(r_i)` is what the stability analysis works with.

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen3;
use crate::observer::FilterGains;
use crate::so3::{rodrigues, skew, Mat3, UnitQuaternion, Vec3};

/// Positive weights `ρ_i`, one per measured vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGains {
    rho: Vec<f64>,
}

impl ControlGains {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        for (index, &value) in rho.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveGain { index, value });
            }
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }
}

/// Controller weights plus observer filter gains.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub control: ControlGains,
    pub filter: FilterGains,
}

impl GainSet {
    pub fn new(control: ControlGains, filter: FilterGains) -> Result<Self> {
        if control.rho().len() != filter.len() {
            return Err(Error::DimensionMismatch {
                what: "filter gains (one per ρ_i)",
                expected: control.rho().len(),
                actual: filter.len(),
            });
        }
        Ok(Self { control, filter })
    }

    pub fn vector_count(&self) -> usize {
        self.control.rho().len()
    }
}

/// `W_ρ` with its symmetric eigen-decomposition (eigenvalues ascending).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WRho {
    pub matrix: Mat3,
    pub eigenvalues: [f64; 3],
    pub eigenvectors: [Vec3; 3],
}

impl WRho {
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `‖W v − λ v‖` maximized over the eigenpairs.
    pub fn residual(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(l, v)| (self.matrix * *v - *v * *l).norm())
            .fold(0.0, f64::max)
    }

    /// Decomposes an arbitrary symmetric positive definite matrix.
    pub fn from_matrix(matrix: Mat3) -> Result<Self> {
        let eig = symmetric_eigen3(&matrix);
        if !(eig.values[0] > 0.0) {
            return Err(Error::WRhoNotSpd { min_eigenvalue: eig.values[0] });
        }
        Ok(Self {
            matrix,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
        })
    }
}

/// `W_ρ = Σ ρ_i (‖r_i‖² I − r_i r_iᵀ)`
pub fn w_rho(rho: &ControlGains, reference_vectors: &[Vec3]) -> Result<WRho> {
    if rho.rho().len() != reference_vectors.len() {
        return Err(Error::DimensionMismatch {
            what: "reference vectors (one per ρ_i)",
            expected: rho.rho().len(),
            actual: reference_vectors.len(),
        });
    }
    let matrix = rho
        .rho()
        .iter()
        .zip(reference_vectors)
        .fold(Mat3::ZERO, |acc, (p, r)| {
            acc + (Mat3::IDENTITY * r.norm_squared() - r.outer(r)) * *p
        });
    WRho::from_matrix(matrix)
}

/// `z_ρ = Σ ρ_i S(b_i^d) b_i`
pub fn z_rho_measured(rho: &ControlGains, measured: &[Vec3], desired: &[Vec3]) -> Vec3 {
    rho.rho()
        .iter()
        .zip(measured)
        .zip(desired)
        .fold(Vec3::ZERO, |acc, ((p, b), bd)| acc + bd.cross(b) * *p)
}

/// `z_ρ = −2 R_dᵀ (q̄0 I − S(q̄)) W_ρ q̄`
pub fn z_rho_quat(w: &WRho, q_bar: &UnitQuaternion, desired_attitude: &UnitQuaternion) -> Vec3 {
    let rd = rodrigues(desired_attitude);
    rd.inverse_rotate(z_rho_rotated(&w.matrix, q_bar.scalar(), q_bar.vector()))
}

/// `−2 (q̄0 I − S(q̄)) W q̄`, the attitude torque in the rotated frame.
pub(crate) fn z_rho_rotated(w: &Mat3, q0: f64, q: Vec3) -> Vec3 {
    ((Mat3::IDENTITY * q0 - skew(q)) * (*w * q)) * -2.0
}

/// `τ = z_ρ − M ω̂`
///
/// Only measured vectors, their desired values, the gains and observer
/// outputs enter; neither `ω` nor `Q` is an argument.
pub fn torque(rho: &ControlGains, measured: &[Vec3], desired: &[Vec3], m: &Mat3, omega_hat: Vec3) -> Vec3 {
    z_rho_measured(rho, measured, desired) - *m * omega_hat
}

/// `τ = −2 R_dᵀ (q̄0 I − S(q̄)) W_ρ q̄ − M ω̂`
pub fn torque_quat(w: &WRho, q_bar: &UnitQuaternion, desired_attitude: &UnitQuaternion, m: &Mat3, omega_hat: Vec3) -> Vec3 {
    z_rho_quat(w, q_bar, desired_attitude) - *m * omega_hat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observer::{build_a_matrices, m_matrix, omega_hat, FilterState};
    use crate::plant::body_vectors_at;
    use crate::so3::{quat_conj, quat_mul};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const R: [Vec3; 2] = [Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 1.0)];

    fn rq(rng: &mut impl Rng) -> UnitQuaternion {
        loop {
            let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            if let Some(q) = UnitQuaternion::from_array(a) {
                return q;
            }
        }
    }

    #[test]
    fn gains_must_be_positive() {
        assert!(ControlGains::new(vec![1.0, 0.0]).is_err());
        assert!(ControlGains::new(vec![1.0, f64::NAN]).is_err());
        assert!(ControlGains::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn w_rho_matches_reference_values() {
        let w = w_rho(&ControlGains::new(vec![22.5408, 1.7736]).unwrap(), &R).unwrap();
        let expected = Mat3::from_rows([
            [24.3144, 0.0, -1.7736],
            [0.0, 26.0881, 0.0],
            [-1.7736, 0.0, 1.7736],
        ]);
        assert!(w.matrix.max_abs_diff(&expected) < 1e-3);
        for (l, e) in w.eigenvalues.iter().zip([1.6349, 24.4531, 26.0881]) {
            assert!((l - e).abs() < 1e-3, "{l} vs {e}");
        }
        assert!(w.residual() < 1e-9);
    }

    #[test]
    fn w_rho_unit_gains_via_square_identity() {
        let w = w_rho(&ControlGains::new(vec![1.0, 1.0]).unwrap(), &R).unwrap();
        let oracle = R.iter().fold(Mat3::ZERO, |acc, r| acc - skew(*r) * skew(*r));
        assert!(w.matrix.max_abs_diff(&oracle) < 1e-15);
        assert_eq!(w.matrix, Mat3::from_rows([[2.0, 0.0, -1.0], [0.0, 3.0, 0.0], [-1.0, 0.0, 1.0]]));
    }

    #[test]
    fn w_rho_rejects_collinear_references() {
        let collinear = [Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 2.0)];
        assert!(matches!(
            w_rho(&ControlGains::new(vec![1.0, 1.0]).unwrap(), &collinear),
            Err(Error::WRhoNotSpd { .. })
        ));
    }

    #[test]
    fn z_rho_examples() {
        let rho = ControlGains::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(z_rho_measured(&rho, &R, &R), Vec3::ZERO);

        let q = UnitQuaternion::from_array([0.8, 0.0, 0.0, 0.6]).unwrap();
        let b = body_vectors_at(&q, &R);
        let z = z_rho_measured(&rho, &b, &R);
        assert!(z.max_abs_diff(&Vec3::new(0.96, -0.72, -0.96)) < 1e-15);

        let w = w_rho(&rho, &R).unwrap();
        let zq = z_rho_quat(&w, &q, &UnitQuaternion::IDENTITY);
        assert!(zq.max_abs_diff(&Vec3::new(0.96, -0.72, -0.96)) < 1e-15);
    }

    #[test]
    fn z_rho_vanishes_on_equilibria() {
        let w = w_rho(&ControlGains::new(vec![22.5408, 1.7736]).unwrap(), &R).unwrap();
        let id = UnitQuaternion::IDENTITY;
        assert_eq!(z_rho_quat(&w, &id, &id), Vec3::ZERO);
        assert_eq!(z_rho_quat(&w, &id.negate(), &id), Vec3::ZERO);
        for v in w.eigenvectors {
            for s in [1.0, -1.0] {
                let q = UnitQuaternion::from_array([0.0, s * v.x, s * v.y, s * v.z]).unwrap();
                assert!(z_rho_quat(&w, &q, &id).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn z_rho_is_sign_invariant() {
        let rho = ControlGains::new(vec![2.0, 0.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let q = rq(&mut rng);
            let zp = z_rho_measured(&rho, &body_vectors_at(&q, &R), &R);
            let zm = z_rho_measured(&rho, &body_vectors_at(&q.negate(), &R), &R);
            assert_eq!(zp, zm);
        }
    }

    #[test]
    fn torque_examples() {
        let rho = ControlGains::new(vec![1.0, 1.0]).unwrap();
        let m = m_matrix(&R, &[Mat3::IDENTITY, Mat3::IDENTITY]).unwrap();
        assert_eq!(torque(&rho, &R, &R, &m, Vec3::ZERO), Vec3::ZERO);
        let q = UnitQuaternion::from_array([0.8, 0.0, 0.0, 0.6]).unwrap();
        let b = body_vectors_at(&q, &R);
        assert_eq!(torque(&rho, &b, &R, &m, Vec3::ZERO), z_rho_measured(&rho, &b, &R));
    }

    #[test]
    fn dual_forms_agree_on_random_closed_loop_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let rho = ControlGains::new(vec![22.5408, 1.7736]).unwrap();
        let filter = FilterGains::diagonal(
            &[[50.0, 28.7599, 0.0971], [1.8614, 1.7403, 13.9601]],
            vec![[4.0, 2.0, 0.1], [3.9672, 2.0, 0.1]],
        )
        .unwrap();
        let w = w_rho(&rho, &R).unwrap();
        for _ in 0..500 {
            let qd = rq(&mut rng);
            let q = rq(&mut rng);
            let rd = rodrigues(&qd);
            let desired: Vec<Vec3> = R.iter().map(|r| rd.inverse_rotate(*r)).collect();
            let b = body_vectors_at(&q, &R);
            let q_bar = quat_mul(&q, &quat_conj(&qd));
            let a = build_a_matrices(&filter, &qd).unwrap();
            let f = FilterState {
                b_hat: b.iter().map(|bi| *bi + Vec3::new(rng.gen_range(-0.1..0.1), 0.05, -0.02)).collect(),
            };
            let m = m_matrix(&b, filter.lambda()).unwrap();
            let wh = omega_hat(&f, &b, &filter, &a).unwrap();
            let t15 = torque(&rho, &b, &desired, &m, wh);
            let t18 = torque_quat(&w, &q_bar, &qd, &m, wh);
            assert!(t15.max_abs_diff(&t18) < 1e-12 * t15.norm().max(1.0) * 10.0);
        }
    }
}
