//! Angular-velocity reconstruction from filtered vector measurements.
//!
//! Each measurement `b_i` drives a first-order filter `b̂̇_i = A_i (b_i − b̂_i)`.
//! With `M = Σ S(b_i)ᵀ Λ_i S(b_i)` and the filter error `ξ_i = b_i − b̂_i`, the
//! signal `ω̂ = M⁻¹ Σ S(b_i)ᵀ Λ_i A_i ξ_i` stands in for the gyroscope.

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen3;
use crate::so3::{rodrigues, skew, Mat3, UnitQuaternion, Vec3};

/// `|det M|` below this is treated as a measurement degeneracy.
pub const M_DETERMINANT_GUARD: f64 = 1e-12;

/// Filter weights `Λ_i` and the coefficients `(a_i0, a_i1, a_i2)` of the
/// polynomials `P_i(x) = a_i0 + a_i1 x + a_i2 x²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterGains {
    lambda: Vec<Mat3>,
    poly_coeffs: Vec<[f64; 3]>,
}

impl FilterGains {
    pub fn new(lambda: Vec<Mat3>, poly_coeffs: Vec<[f64; 3]>) -> Result<Self> {
        if lambda.len() != poly_coeffs.len() {
            return Err(Error::DimensionMismatch {
                what: "filter polynomial coefficient triples",
                expected: lambda.len(),
                actual: poly_coeffs.len(),
            });
        }
        for (index, l) in lambda.iter().enumerate() {
            if !l.is_finite() || l.asymmetry() > 1e-9 || symmetric_eigen3(l).values[0] <= 0.0 {
                return Err(Error::FilterWeightNotSpd { index });
            }
        }
        if poly_coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("non-finite filter polynomial coefficient".into()));
        }
        Ok(Self { lambda, poly_coeffs })
    }

    /// Diagonal weights `Λ_i = diag(γ_i1, γ_i2, γ_i3)`.
    pub fn diagonal(gammas: &[[f64; 3]], poly_coeffs: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(gammas.iter().map(|g| Mat3::from_diagonal(*g)).collect(), poly_coeffs)
    }

    pub fn lambda(&self) -> &[Mat3] {
        &self.lambda
    }

    pub fn poly_coeffs(&self) -> &[[f64; 3]] {
        &self.poly_coeffs
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }
}

/// `P(Λ) = a0 I + a1 Λ + a2 Λ²`
pub fn matrix_polynomial(lambda: &Mat3, coeffs: &[f64; 3]) -> Mat3 {
    Mat3::IDENTITY * coeffs[0] + *lambda * coeffs[1] + (*lambda * *lambda) * coeffs[2]
}

/// `(a0 + a1) Λ + a2 Λ²`, the reading under which the reference filter
/// matrices for the tuned gains come out (`diag(550, 255.27, 0.58)` for `Λ_1`).
/// Only used to report that discrepancy.
pub fn summed_linear_polynomial(lambda: &Mat3, coeffs: &[f64; 3]) -> Mat3 {
    *lambda * (coeffs[0] + coeffs[1]) + (*lambda * *lambda) * coeffs[2]
}

/// `A_i = R_dᵀ P_i(Λ_i) R_d`. Fails if some `P_i` is not positive on the
/// spectrum of `Λ_i`.
pub fn build_a_matrices(gains: &FilterGains, desired_attitude: &UnitQuaternion) -> Result<Vec<Mat3>> {
    let rd = rodrigues(desired_attitude).matrix();
    gains
        .lambda
        .iter()
        .zip(&gains.poly_coeffs)
        .enumerate()
        .map(|(index, (l, c))| {
            for eigenvalue in symmetric_eigen3(l).values {
                let value = c[0] + c[1] * eigenvalue + c[2] * eigenvalue * eigenvalue;
                if value <= 0.0 || !value.is_finite() {
                    return Err(Error::FilterPolynomialNotPositive { index, eigenvalue, value });
                }
            }
            Ok(rd.transpose() * matrix_polynomial(l, c) * rd)
        })
        .collect()
}

/// Filtered copies `b̂_i` of the measured vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub b_hat: Vec<Vec3>,
}

impl FilterState {
    /// `b̂_i = b_i`, i.e. zero filter error.
    pub fn matching(measured: &[Vec3]) -> Self {
        Self { b_hat: measured.to_vec() }
    }

    /// `ξ_i = b_i − b̂_i`
    pub fn error(&self, measured: &[Vec3]) -> Vec<Vec3> {
        measured.iter().zip(&self.b_hat).map(|(b, bh)| *b - *bh).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.b_hat.iter().all(Vec3::is_finite)
    }
}

/// `b̂̇_i = A_i (b_i − b̂_i)`
pub fn filter_derivative(filter: &FilterState, measured: &[Vec3], a: &[Mat3]) -> Vec<Vec3> {
    filter
        .b_hat
        .iter()
        .zip(measured)
        .zip(a)
        .map(|((bh, b), ai)| *ai * (*b - *bh))
        .collect()
}

/// `M = Σ S(b_i)ᵀ Λ_i S(b_i)`
pub fn m_matrix(measured: &[Vec3], lambda: &[Mat3]) -> Result<Mat3> {
    let m = m_matrix_unchecked(measured, lambda);
    let det = m.determinant();
    if !det.is_finite() || det.abs() <= M_DETERMINANT_GUARD {
        return Err(Error::SingularM { det });
    }
    Ok(m)
}

fn m_matrix_unchecked(measured: &[Vec3], lambda: &[Mat3]) -> Mat3 {
    measured.iter().zip(lambda).fold(Mat3::ZERO, |acc, (b, l)| {
        let s = skew(*b);
        acc + s.transpose() * *l * s
    })
}

/// The 3n×3 matrix `B` of the filter-error dynamics `ξ̇ = −A ξ + B ω`,
/// returned as its n stacked 3×3 blocks `S(b_i)`.
pub fn b_matrix(measured: &[Vec3]) -> Vec<Mat3> {
    measured.iter().map(|b| skew(*b)).collect()
}

/// `B ω` for a block-stacked `B`.
pub fn stacked_mul(blocks: &[Mat3], omega: Vec3) -> Vec<Vec3> {
    blocks.iter().map(|b| *b * omega).collect()
}

/// `Bᵀ x` for a block-stacked `B` and block vector `x`.
pub fn stacked_transpose_mul(blocks: &[Mat3], x: &[Vec3]) -> Vec3 {
    blocks
        .iter()
        .zip(x)
        .fold(Vec3::ZERO, |acc, (b, xi)| acc + b.transpose() * *xi)
}

/// `Bᵀ Γ B` for block-diagonal `Γ = diag(Λ_i)`.
pub fn stacked_gram(blocks: &[Mat3], lambda: &[Mat3]) -> Mat3 {
    blocks
        .iter()
        .zip(lambda)
        .fold(Mat3::ZERO, |acc, (b, l)| acc + b.transpose() * *l * *b)
}

/// `Σ S(b_i)ᵀ Λ_i A_i ξ_i = Bᵀ Γ A ξ`, which equals `M ω̂`.
pub fn weighted_filter_error(measured: &[Vec3], lambda: &[Mat3], a: &[Mat3], xi: &[Vec3]) -> Vec3 {
    let gax: Vec<Vec3> = lambda
        .iter()
        .zip(a)
        .zip(xi)
        .map(|((l, ai), x)| *l * (*ai * *x))
        .collect();
    stacked_transpose_mul(&b_matrix(measured), &gax)
}

/// `ω̂ = M⁻¹ Bᵀ Γ A ξ`
pub fn omega_hat(filter: &FilterState, measured: &[Vec3], gains: &FilterGains, a: &[Mat3]) -> Result<Vec3> {
    let m = m_matrix(measured, gains.lambda())?;
    let rhs = weighted_filter_error(measured, gains.lambda(), a, &filter.error(measured));
    let m_inv = m.try_inverse(M_DETERMINANT_GUARD).ok_or(Error::SingularM { det: m.determinant() })?;
    Ok(m_inv * rhs)
}

/// `−M⁻¹ Σ S(b_i) Λ_i ḃ_i` for supplied vector rates. With the true rates
/// `ḃ_i = −S(ω) b_i` this returns `ω` exactly; with the filter rates
/// `A_i ξ_i` it is `ω̂`.
pub fn omega_from_vector_rates(measured: &[Vec3], lambda: &[Mat3], rates: &[Vec3]) -> Result<Vec3> {
    let m = m_matrix(measured, lambda)?;
    let sum = measured
        .iter()
        .zip(lambda)
        .zip(rates)
        .fold(Vec3::ZERO, |acc, ((b, l), bd)| acc + skew(*b) * (*l * *bd));
    let m_inv = m.try_inverse(M_DETERMINANT_GUARD).ok_or(Error::SingularM { det: m.determinant() })?;
    Ok(-(m_inv * sum))
}
