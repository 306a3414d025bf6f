//! Equilibria, the (GEN) check and the two linearizations.
//!
//! Everything here works in the rotated error coordinates
//! `(ξ_R, q̄, ω_R) = (R_d ξ, Q ⊙ Q_d⁻¹, R_d ω)`, in which the closed loop is
//! autonomous and the desired attitude is `q̄ = (±1, 0)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, eigenvalues_dense, eigenvector_for, SquareMatrix, MAX_DENSE_DIM};
use crate::controller::{z_rho_rotated, WRho};
use crate::plant::body_vectors_at;
use crate::sim::{ClosedLoop, SimState};
use crate::so3::{quat_conj, quat_mul, skew, Mat3, Quaternion, UnitQuaternion, Vec3};

/// Relative eigenvalue gap below which `W_ρ` counts as having a repeated eigenvalue.
pub const GEN_GAP_TOLERANCE: f64 = 1e-9;

/// `|Re λ|` below this fraction of the spectral radius is treated as zero.
pub const HYPERBOLIC_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquilibriumLabel {
    Omega1Plus,
    Omega1Minus,
    /// `(0, ±v_k)` for the `k`-th eigenvector of `W_ρ` (eigenvalues ascending), `k = 2, 3, 4`.
    Unstable { k: u8, plus: bool },
}

impl EquilibriumLabel {
    pub fn is_desired(&self) -> bool {
        matches!(self, Self::Omega1Plus | Self::Omega1Minus)
    }
}

impl fmt::Display for EquilibriumLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SUB: [&str; 5] = ["₀", "₁", "₂", "₃", "₄"];
        let (k, plus) = match *self {
            Self::Omega1Plus => (1, true),
            Self::Omega1Minus => (1, false),
            Self::Unstable { k, plus } => (k as usize, plus),
        };
        write!(f, "Ω{}{}", SUB[k], if plus { "⁺" } else { "⁻" })
    }
}

impl Serialize for EquilibriumLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    HyperbolicUnstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub label: EquilibriumLabel,
    #[serde(serialize_with = "serialize_quaternion")]
    pub q_bar: UnitQuaternion,
    pub classification: Stability,
    /// Eigenvalue `λ_ρ` of `W_ρ` whose eigenvector gives `q̄`; `None` for `Ω₁±`.
    pub w_eigenvalue: Option<f64>,
}

fn serialize_quaternion<S: Serializer>(q: &UnitQuaternion, s: S) -> std::result::Result<S::Ok, S::Error> {
    q.to_array().serialize(s)
}

/// Outcome of the simple-eigenvalue test on `W_ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenCheck {
    pub holds: bool,
    pub eigenvalues: [f64; 3],
    /// `λ2 − λ1`, `λ3 − λ2`
    pub gaps: [f64; 2],
    pub min_gap: f64,
    /// Discriminant of `det(xI − W_ρ)` from its coefficients. Nonnegative for
    /// symmetric `W_ρ`, zero exactly on repeated eigenvalues.
    pub discriminant: f64,
    /// `+1`, `0` or `−1`; zero when `|Δ|` is at rounding level for the scale of `W_ρ`.
    pub discriminant_sign: i8,
}

/// Characteristic-polynomial discriminant of a 3×3 matrix.
pub fn characteristic_discriminant(w: &Mat3) -> f64 {
    let m = &w.m;
    let a = -w.trace();
    let b = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let c = -w.determinant();
    18.0 * a * b * c - 4.0 * a.powi(3) * c + a * a * b * b - 4.0 * b.powi(3) - 27.0 * c * c
}

pub fn check_gen(w: &WRho) -> GenCheck {
    let l = w.eigenvalues;
    let gaps = [l[1] - l[0], l[2] - l[1]];
    let min_gap = gaps[0].min(gaps[1]);
    let scale = l[2].abs().max(f64::MIN_POSITIVE);
    let discriminant = characteristic_discriminant(&w.matrix);
    let rounding = 1e-12 * scale.powi(6);
    let discriminant_sign = if discriminant > rounding {
        1
    } else if discriminant < -rounding {
        -1
    } else {
        0
    };
    GenCheck {
        holds: min_gap > GEN_GAP_TOLERANCE * scale,
        eigenvalues: l,
        gaps,
        min_gap,
        discriminant,
        discriminant_sign,
    }
}

fn equilibria_unchecked(w: &WRho) -> Vec<Equilibrium> {
    let mut out = vec![
        Equilibrium {
            label: EquilibriumLabel::Omega1Plus,
            q_bar: UnitQuaternion::IDENTITY,
            classification: Stability::Stable,
            w_eigenvalue: None,
        },
        Equilibrium {
            label: EquilibriumLabel::Omega1Minus,
            q_bar: UnitQuaternion::IDENTITY.negate(),
            classification: Stability::Stable,
            w_eigenvalue: None,
        },
    ];
    for (i, (v, l)) in w.eigenvectors.iter().zip(w.eigenvalues).enumerate() {
        for plus in [true, false] {
            let s = if plus { 1.0 } else { -1.0 };
            let q = Quaternion::new(0.0, *v * s);
            out.push(Equilibrium {
                label: EquilibriumLabel::Unstable { k: i as u8 + 2, plus },
                q_bar: UnitQuaternion::new_normalize(q).expect("unit eigenvector"),
                classification: Stability::HyperbolicUnstable,
                w_eigenvalue: Some(l),
            });
        }
    }
    out
}

/// `Ω₁±` alone, which exist for every `W_ρ`.
pub fn stable_equilibria(w: &WRho) -> Vec<Equilibrium> {
    equilibria_unchecked(w).into_iter().take(2).collect()
}

/// `(±1, 0)` and `(0, ±v_k)`, in that order.
pub fn enumerate_equilibria(w: &WRho) -> Result<Vec<Equilibrium>> {
    let gen = check_gen(w);
    if !gen.holds {
        return Err(Error::GenViolation { gap: gen.min_gap });
    }
    Ok(equilibria_unchecked(w))
}

/// Closest of the eight equilibria and the distance to it, measured as the
/// largest of `‖q̄ − q̄_e‖`, `‖ω‖` and `max ‖ξ_i‖`.
pub fn nearest_equilibrium(state: &SimState, model: &ClosedLoop) -> (EquilibriumLabel, f64) {
    let q_bar = model.attitude_error(&state.plant.attitude);
    let rest = state
        .filter_error(model)
        .iter()
        .map(Vec3::norm)
        .fold(state.plant.omega.norm(), f64::max);
    equilibria_unchecked(model.w_rho())
        .into_iter()
        .map(|e| {
            let d = q_bar.to_array().iter().zip(e.q_bar.to_array()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            (e.label, d.max(rest))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("eight equilibria")
}

/// Closed-loop state in rotated error coordinates. `q_bar` may be
/// unnormalized; the field uses its normalization for measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedState {
    pub xi: Vec<Vec3>,
    pub q_bar: Quaternion,
    pub omega: Vec3,
}

impl RotatedState {
    pub fn from_sim(state: &SimState, model: &ClosedLoop) -> Self {
        let rd = model.plant().desired_rotation();
        Self {
            xi: state.filter_error(model).iter().map(|x| rd.rotate(*x)).collect(),
            q_bar: model.attitude_error(&state.plant.attitude).as_quaternion(),
            omega: rd.rotate(state.plant.omega),
        }
    }

    pub fn to_sim(&self, model: &ClosedLoop) -> Option<SimState> {
        let rd = model.plant().desired_rotation();
        let attitude = model.attitude_from_error(&UnitQuaternion::new_normalize(self.q_bar)?);
        let b = body_vectors_at(&attitude, model.plant().reference_vectors());
        let b_hat = b.iter().zip(&self.xi).map(|(bi, x)| *bi - rd.inverse_rotate(*x)).collect();
        Some(SimState {
            plant: crate::plant::PlantState {
                attitude,
                omega: rd.inverse_rotate(self.omega),
            },
            filter: crate::observer::FilterState { b_hat },
        })
    }
}

/// `Λ_i` expressed in the rotated frame, `R_d Λ_i R_dᵀ`.
fn lambda_rotated(model: &ClosedLoop) -> Vec<Mat3> {
    let rd = model.plant().desired_rotation().matrix();
    model.gains().filter.lambda().iter().map(|l| rd * *l * rd.transpose()).collect()
}

/// Autonomous closed loop in rotated coordinates:
///
/// ```text
/// ξ̇_i = −A_d,i ξ_i + S(b̄_i) ω,            b̄_i = R(q̄)ᵀ r_i
/// q̄̇   = ½ q̄ ⊙ (0, ω)
/// J_d ω̇ = −S(ω) J_d ω − 2 (q̄0 I − S(q̄)) W_ρ q̄ − Σ S(b̄_i)ᵀ Λ_d,i A_d,i ξ_i
/// ```
pub fn rotated_field(state: &RotatedState, model: &ClosedLoop) -> Result<RotatedState> {
    let unit = UnitQuaternion::new_normalize(state.q_bar).ok_or(Error::IntegrationBlowUp { t: f64::NAN })?;
    let b_bar = body_vectors_at(&unit, model.plant().reference_vectors());
    let lambda = lambda_rotated(model);
    let xi_dot = state
        .xi
        .iter()
        .zip(model.a_rotated())
        .zip(&b_bar)
        .map(|((x, ad), b)| b.cross(&state.omega) - *ad * *x)
        .collect();
    let q_dot = crate::plant::quat_rate(&state.q_bar, state.omega);
    let jd = *model.inertia_rotated();
    let damping = state
        .xi
        .iter()
        .zip(&b_bar)
        .zip(lambda.iter().zip(model.a_rotated()))
        .fold(Vec3::ZERO, |acc, ((x, b), (l, ad))| acc + skew(*b).transpose() * (*l * (*ad * *x)));
    let rhs = -state.omega.cross(&(jd * state.omega))
        + z_rho_rotated(&model.w_rho().matrix, unit.scalar(), unit.vector())
        - damping;
    let jd_inv = jd.try_inverse(0.0).ok_or(Error::InertiaNotSpd)?;
    Ok(RotatedState {
        xi: xi_dot,
        q_bar: q_dot,
        omega: jd_inv * rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumClass {
    /// Every real part below `−tol`.
    Hurwitz,
    /// No eigenvalue within `tol` of the imaginary axis, at least one to the right.
    HyperbolicUnstable,
    /// Some `|Re λ| ≤ tol`; linear analysis is inconclusive.
    Marginal,
}

#[derive(Debug, Clone)]
pub struct LinearizationResult {
    pub matrix: SquareMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    pub min_abs_real_part: f64,
    pub spectral_radius: f64,
    /// Largest `‖Mz − λz‖ / ‖M‖_F` over unit eigenvectors from inverse iteration.
    pub max_residual: f64,
    pub class: SpectrumClass,
}

impl LinearizationResult {
    pub fn from_matrix(matrix: SquareMatrix) -> Result<Self> {
        let mut eigenvalues = eigenvalues_dense(&matrix)?;
        eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        let max_real_part = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let min_abs_real_part = eigenvalues.iter().map(|l| l.re.abs()).fold(f64::INFINITY, f64::min);
        let spectral_radius = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let norm = matrix.frobenius_norm().max(f64::MIN_POSITIVE);
        let max_residual = eigenvalues
            .iter()
            .map(|&l| match eigenvector_for(&matrix, l) {
                Some(z) => eigen_residual(&matrix, l, &z) / norm,
                None => f64::INFINITY,
            })
            .fold(0.0, f64::max);
        let tol = HYPERBOLIC_TOLERANCE * spectral_radius;
        let class = if min_abs_real_part <= tol {
            SpectrumClass::Marginal
        } else if max_real_part > 0.0 {
            SpectrumClass::HyperbolicUnstable
        } else {
            SpectrumClass::Hurwitz
        };
        Ok(Self {
            matrix,
            eigenvalues,
            max_real_part,
            min_abs_real_part,
            spectral_radius,
            max_residual,
            class,
        })
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if 3 * n + 6 > MAX_DENSE_DIM {
        return Err(Error::DimensionMismatch {
            what: "linearization size 3n+6 (at most the dense eigensolver limit)",
            expected: MAX_DENSE_DIM,
            actual: 3 * n + 6,
        });
    }
    Ok(())
}

/// Block pattern shared by both linearizations, in coordinates
/// `(z_ξ, z_x, z_ω)`:
///
/// ```text
/// [ −A_d            0           H ]
/// [  0              0         I/2 ]
/// [ −J_d⁻¹ Hᵀ Γ A_d  J_d⁻¹ K    0 ]
/// ```
fn assemble(model: &ClosedLoop, h: &[Mat3], k: &Mat3) -> Result<SquareMatrix> {
    let n = h.len();
    check_dimension(n)?;
    let lambda = lambda_rotated(model);
    let jd_inv = model.inertia_rotated().try_inverse(0.0).ok_or(Error::InertiaNotSpd)?;
    let (ix, iw) = (3 * n, 3 * n + 3);
    let mut m = SquareMatrix::zeros(3 * n + 6);
    for (j, ((hj, ad), l)) in h.iter().zip(model.a_rotated()).zip(&lambda).enumerate() {
        m.set_block(3 * j, 3 * j, &-*ad);
        m.set_block(3 * j, iw, hj);
        m.set_block(iw, 3 * j, &-(jd_inv * hj.transpose() * *l * *ad));
    }
    m.set_block(ix, iw, &(Mat3::IDENTITY * 0.5));
    m.set_block(iw, ix, &(jd_inv * *k));
    Ok(m)
}

/// Linearization at `Ω₁±` (identical for both signs).
///
/// With `R_d = I` this is `[[−A, 0, G], [0, 0, I/2], [−J⁻¹GᵀΓA, −2J⁻¹W_ρ, 0]]`
/// with `G_i = S(r_i)`.
pub fn linearize_stable(model: &ClosedLoop) -> Result<LinearizationResult> {
    let h: Vec<Mat3> = model.plant().reference_vectors().iter().map(|r| skew(*r)).collect();
    let m = assemble(model, &h, &(model.w_rho().matrix * -2.0))?;
    LinearizationResult::from_matrix(m)
}

/// `G = λ_ρ I + S(v) W_ρ S(v)` at `q̄ = (0, v)`.
pub fn g_matrix(w: &WRho, v: Vec3, lambda_rho: f64) -> Mat3 {
    Mat3::IDENTITY * lambda_rho + skew(v) * w.matrix * skew(v)
}

/// Linearization at one of `Ω₂..₄±` in coordinates `x = vec((0, −v) ⊙ q̄)`,
/// with blocks `H_j = S((I + 2S²(v)) r_j)` and `K = 2G`.
pub fn linearize_unstable(eq: &Equilibrium, model: &ClosedLoop) -> Result<LinearizationResult> {
    let lambda_rho = match (eq.classification, eq.w_eigenvalue) {
        (Stability::HyperbolicUnstable, Some(l)) => l,
        _ => {
            return Err(Error::InvalidConfig(format!(
                "{} is not one of the (0, ±v) equilibria",
                eq.label
            )))
        }
    };
    let v = eq.q_bar.vector();
    let flip = Mat3::IDENTITY + skew(v) * skew(v) * 2.0;
    let h: Vec<Mat3> = model.plant().reference_vectors().iter().map(|r| skew(flip * *r)).collect();
    let g = g_matrix(model.w_rho(), v, lambda_rho);
    let m = assemble(model, &h, &(g * 2.0))?;
    LinearizationResult::from_matrix(m)
}

/// `Q = q̄ ⊙ Q_d` for an equilibrium, the physical attitude it corresponds to.
pub fn physical_attitude(eq: &Equilibrium, model: &ClosedLoop) -> UnitQuaternion {
    quat_mul(&eq.q_bar, model.plant().desired_attitude())
}

/// Inverse of [`physical_attitude`].
pub fn error_attitude(attitude: &UnitQuaternion, model: &ClosedLoop) -> UnitQuaternion {
    quat_mul(attitude, &quat_conj(model.plant().desired_attitude()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{w_rho, z_rho_quat, ControlGains, GainSet};
    use crate::observer::FilterGains;
    use crate::plant::PlantConfig;
    use crate::presets;
    use crate::sim::closed_loop_derivative;
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

    fn rv(rng: &mut impl Rng, s: f64) -> Vec3 {
        Vec3::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s))
    }

    fn model_with(qd: UnitQuaternion) -> ClosedLoop {
        let plant = PlantConfig::new(presets::benchmark_inertia(), R.to_vec(), qd).unwrap();
        ClosedLoop::new(plant, presets::tuned_gains().unwrap()).unwrap()
    }

    #[test]
    fn gen_examples() {
        let tuned = w_rho(&ControlGains::new(vec![22.5408, 1.7736]).unwrap(), &R).unwrap();
        let g = check_gen(&tuned);
        assert!(g.holds && g.discriminant_sign == 1);

        let g = check_gen(&WRho::from_matrix(Mat3::IDENTITY).unwrap());
        assert!(!g.holds && g.min_gap == 0.0);
        assert_eq!(g.discriminant_sign, 0);

        let unit = w_rho(&ControlGains::new(vec![1.0, 1.0]).unwrap(), &R).unwrap();
        let g = check_gen(&unit);
        let s5 = 5f64.sqrt();
        let expect = [(3.0 - s5) / 2.0, (3.0 + s5) / 2.0, 3.0];
        for (a, b) in g.eigenvalues.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(g.holds);
        assert!((g.min_gap - (3.0 - (3.0 + s5) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn discriminant_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let rho = ControlGains::new(vec![rng.gen_range(0.01..30.0), rng.gen_range(0.01..30.0)]).unwrap();
            let w = w_rho(&rho, &R).unwrap();
            let l = w.eigenvalues;
            let oracle = ((l[0] - l[1]) * (l[0] - l[2]) * (l[1] - l[2])).powi(2);
            let d = characteristic_discriminant(&w.matrix);
            assert!((d - oracle).abs() <= 1e-8 * l[2].powi(6), "{d} {oracle}");
        }
    }

    #[test]
    fn equilibria_are_the_zero_set_of_z() {
        let model = presets::benchmark_model().unwrap();
        let eqs = enumerate_equilibria(model.w_rho()).unwrap();
        assert_eq!(eqs.len(), 8);
        let labels: Vec<String> = eqs.iter().map(|e| e.label.to_string()).collect();
        assert_eq!(labels, ["Ω₁⁺", "Ω₁⁻", "Ω₂⁺", "Ω₂⁻", "Ω₃⁺", "Ω₃⁻", "Ω₄⁺", "Ω₄⁻"]);
        let qd = *model.plant().desired_attitude();
        for e in &eqs {
            assert!(z_rho_quat(model.w_rho(), &e.q_bar, &qd).norm() < 1e-12);
            let s = SimState::with_matched_filter(physical_attitude(e, &model), Vec3::ZERO, &model);
            let rate = closed_loop_derivative(&s, &model).unwrap();
            assert!(rate.omega.norm() < 1e-9 && rate.attitude.norm() < 1e-9);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let q = rq(&mut rng);
            assert!(z_rho_quat(model.w_rho(), &q, &qd).norm() > 1e-6);
        }
    }

    #[test]
    fn gen_violation_is_an_error() {
        let w = WRho::from_matrix(Mat3::from_diagonal([2.0, 2.0, 3.0])).unwrap();
        assert!(matches!(enumerate_equilibria(&w), Err(Error::GenViolation { .. })));
    }

    #[test]
    fn rotated_field_matches_physical_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let model = model_with(rq(&mut rng));
            let att = rq(&mut rng);
            let mut s = SimState::with_matched_filter(att, rv(&mut rng, 1.0), &model);
            for b in &mut s.filter.b_hat {
                *b += rv(&mut rng, 0.3);
            }
            let rot = RotatedState::from_sim(&s, &model);
            let back = rot.to_sim(&model).unwrap();
            assert!(back.plant.omega.max_abs_diff(&s.plant.omega) < 1e-13);
            let f = rotated_field(&rot, &model).unwrap();

            // push the state forward along both fields and compare in rotated coordinates
            let h = 1e-7;
            let phys = closed_loop_derivative(&s, &model).unwrap();
            let q_next = UnitQuaternion::new_normalize(s.plant.attitude.as_quaternion() + phys.attitude * h).unwrap();
            let mut s_next = SimState {
                plant: crate::plant::PlantState { attitude: q_next, omega: s.plant.omega + phys.omega * h },
                filter: s.filter.clone(),
            };
            for (b, d) in s_next.filter.b_hat.iter_mut().zip(&phys.b_hat) {
                *b += *d * h;
            }
            let rot_next = RotatedState::from_sim(&s_next, &model);
            let fd_omega = (rot_next.omega - rot.omega) * (1.0 / h);
            assert!(fd_omega.max_abs_diff(&f.omega) < 1e-5 * (1.0 + f.omega.norm()), "{fd_omega:?} {:?}", f.omega);
            for (i, x) in rot_next.xi.iter().enumerate() {
                let fd = (*x - rot.xi[i]) * (1.0 / h);
                assert!(fd.max_abs_diff(&f.xi[i]) < 1e-5 * (1.0 + f.xi[i].norm()));
            }
        }
    }

    /// Central-difference Jacobian of the rotated field around `q̄*` in
    /// coordinates `(ξ, x, ω)` with `q̄ = q̄* ⊙ (√(1−‖x‖²), x)`.
    fn fd_jacobian(model: &ClosedLoop, q_star: &UnitQuaternion) -> SquareMatrix {
        let n = model.plant().vector_count();
        let dim = 3 * n + 6;
        let field = |z: &[f64]| -> Vec<f64> {
            let x = Vec3::new(z[3 * n], z[3 * n + 1], z[3 * n + 2]);
            let local = UnitQuaternion::from_array([(1.0 - x.norm_squared()).sqrt(), x.x, x.y, x.z]).unwrap();
            let q = quat_mul(q_star, &local);
            let st = RotatedState {
                xi: (0..n).map(|i| Vec3::new(z[3 * i], z[3 * i + 1], z[3 * i + 2])).collect(),
                q_bar: q.as_quaternion(),
                omega: Vec3::new(z[3 * n + 3], z[3 * n + 4], z[3 * n + 5]),
            };
            let f = rotated_field(&st, model).unwrap();
            let local_dot = quat_conj(q_star).as_quaternion().hamilton(&f.q_bar);
            let mut out: Vec<f64> = f.xi.iter().flat_map(|v| v.to_array()).collect();
            out.extend(local_dot.v.to_array());
            out.extend(f.omega.to_array());
            out
        };
        let h = 1e-6;
        let mut jac = SquareMatrix::zeros(dim);
        for j in 0..dim {
            let mut zp = vec![0.0; dim];
            let mut zm = vec![0.0; dim];
            zp[j] = h;
            zm[j] = -h;
            let (fp, fm) = (field(&zp), field(&zm));
            for i in 0..dim {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    fn max_diff(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
        let n = a.dim();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                d = d.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
        d
    }

    #[test]
    fn block_linearizations_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut models = vec![presets::benchmark_model().unwrap()];
        for _ in 0..3 {
            models.push(model_with(rq(&mut rng)));
        }
        for model in &models {
            let stable = linearize_stable(model).unwrap();
            let scale = stable.matrix.frobenius_norm();
            for q in [UnitQuaternion::IDENTITY, UnitQuaternion::IDENTITY.negate()] {
                assert!(max_diff(&stable.matrix, &fd_jacobian(model, &q)) < 1e-6 * scale);
            }
            for eq in enumerate_equilibria(model.w_rho()).unwrap().iter().skip(2) {
                let lin = linearize_unstable(eq, model).unwrap();
                let fd = fd_jacobian(model, &eq.q_bar);
                assert!(max_diff(&lin.matrix, &fd) < 1e-6 * lin.matrix.frobenius_norm(), "{}", eq.label);
            }
        }
    }

    #[test]
    fn tuned_gain_spectra() {
        let model = presets::benchmark_model().unwrap();
        let stable = linearize_stable(&model).unwrap();
        assert_eq!(stable.matrix.dim(), 12);
        assert_eq!(stable.class, SpectrumClass::Hurwitz);
        assert!(stable.max_residual < 1e-8);
        // ξ–x coupling blocks vanish
        for j in 0..2 {
            assert_eq!(stable.matrix.block(6, 3 * j), Mat3::ZERO);
            assert_eq!(stable.matrix.block(3 * j, 6), Mat3::ZERO);
        }
        let eqs = enumerate_equilibria(model.w_rho()).unwrap();
        for eq in &eqs[2..] {
            let lin = linearize_unstable(eq, &model).unwrap();
            assert_eq!(lin.class, SpectrumClass::HyperbolicUnstable, "{}", eq.label);
            assert!(lin.max_residual < 1e-8);
            let sum: Complex64 = lin.eigenvalues.iter().sum();
            assert!((sum.re - lin.matrix.trace()).abs() < 1e-8 * lin.matrix.frobenius_norm());
            let g = g_matrix(model.w_rho(), eq.q_bar.vector(), eq.w_eigenvalue.unwrap());
            let l = model.w_rho().eigenvalues;
            let lr = eq.w_eigenvalue.unwrap();
            let others: f64 = l.iter().filter(|x| (**x - lr).abs() > 1e-9).map(|x| lr - x).product();
            assert!((g.determinant() - lr * others).abs() < 1e-9 * lr.powi(3));
        }
        assert!(linearize_unstable(&eqs[0], &model).is_err());
    }

    #[test]
    fn stable_spectral_abscissa_is_continuous() {
        let base = presets::benchmark_model().unwrap();
        let a0 = linearize_stable(&base).unwrap().max_real_part;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kappa = presets::kappa_final();
        for _ in 0..20 {
            let perturbed: Vec<f64> = kappa.iter().map(|k| k * (1.0 + rng.gen_range(-0.01..0.01))).collect();
            let gains = crate::tuning::unpack_kappa(&perturbed).unwrap();
            let model = ClosedLoop::new(base.plant().clone(), gains).unwrap();
            let a = linearize_stable(&model).unwrap().max_real_part;
            assert!((a - a0).abs() < 0.05 * a0.abs(), "{a} vs {a0}");
        }
    }

    #[test]
    fn nearest_equilibrium_labels() {
        let model = presets::benchmark_model().unwrap();
        for eq in equilibria_unchecked(model.w_rho()) {
            let s = SimState::with_matched_filter(physical_attitude(&eq, &model), Vec3::ZERO, &model);
            let (label, d) = nearest_equilibrium(&s, &model);
            assert_eq!(label, eq.label);
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn isotropic_weights_with_rotated_target() {
        let filter = FilterGains::diagonal(&[[2.0; 3], [3.0; 3]], vec![[1.0, 0.2, 0.01]; 2]).unwrap();
        let gains = GainSet::new(ControlGains::new(vec![2.0, 1.0]).unwrap(), filter).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let plant = PlantConfig::new(presets::benchmark_inertia(), R.to_vec(), rq(&mut rng)).unwrap();
        let model = ClosedLoop::new(plant, gains).unwrap();
        assert_eq!(linearize_stable(&model).unwrap().class, SpectrumClass::Hurwitz);
    }
}
