//! Closed-form rotation algebra on 3-vectors, 3×3 matrices and quaternions.
//!
//! Everything here is a small `Copy` value type; no general linear solver is
//! needed at this layer. Quaternions are stored scalar-first as `(w, v)` and
//! multiplied with the Hamilton convention
//! `P⊙Q = (p0 q0 − p·q, p0 q + q0 p + p × q)`.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance on `|‖Q‖ − 1|` accepted for a unit quaternion.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Sum of absolute values.
    pub fn norm_l1(&self) -> f64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn outer(&self, other: &Vec3) -> Mat3 {
        let a = self.to_array();
        let b = other.to_array();
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i] * b[j];
            }
        }
        Mat3 { m }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs_diff(&self, other: &Vec3) -> f64 {
        (*self - *other).to_array().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl From<[[f64; 3]; 3]> for Mat3 {
    fn from(m: [[f64; 3]; 3]) -> Self {
        Mat3 { m }
    }
}

impl From<Mat3> for [[f64; 3]; 3] {
    fn from(m: Mat3) -> Self {
        m.m
    }
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Mat3 { m }
    }

    pub fn from_diagonal(d: [f64; 3]) -> Self {
        let mut m = Mat3::ZERO;
        for (i, v) in d.iter().enumerate() {
            m.m[i][i] = *v;
        }
        m
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.m[0][0], self.m[1][1], self.m[2][2]]
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from(self.m[i])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3 {
            m: [
                [c0.x, c1.x, c2.x],
                [c0.y, c1.y, c2.y],
                [c0.z, c1.z, c2.z],
            ],
        }
    }

    pub fn transpose(&self) -> Mat3 {
        let mut t = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.m[j][i] = self.m[i][j];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Adjugate-based inverse; `None` when `|det| <= min_abs_det`.
    pub fn try_inverse(&self, min_abs_det: f64) -> Option<Mat3> {
        let det = self.determinant();
        if !det.is_finite() || det.abs() <= min_abs_det {
            return None;
        }
        let m = &self.m;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Some(Mat3 { m: adj } * (1.0 / det))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Largest `|m_ij − m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }
}

impl AddAssign for Mat3 {
    fn add_assign(&mut self, o: Mat3) {
        *self = *self + o;
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o * -1.0
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut r = self;
        r.m.iter_mut().flatten().for_each(|v| *v *= s);
        r
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(&v), self.row(1).dot(&v), self.row(2).dot(&v))
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        r
    }
}

/// The skew-symmetric matrix `S(x)` with `S(x) y = x × y`.
pub fn skew(x: Vec3) -> Mat3 {
    Mat3::from_rows([[0.0, -x.z, x.y], [x.z, 0.0, -x.x], [-x.y, x.x, 0.0]])
}

/// Quaternion with no norm constraint; also used for quaternion rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub v: Vec3,
}

impl Quaternion {
    pub const fn new(w: f64, v: Vec3) -> Self {
        Self { w, v }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], Vec3::new(a[1], a[2], a[3]))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.v.x, self.v.y, self.v.z]
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.v.dot(&other.v)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Hamilton product without renormalization.
    pub fn hamilton(&self, o: &Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.v.dot(&o.v),
            o.v * self.w + self.v * o.w + self.v.cross(&o.v),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.v.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.v + o.v)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.v * s)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self * -1.0
    }
}

/// A point of the unit 3-sphere. The sign is never canonicalized, so `Q` and
/// `−Q` stay distinct values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::new(1.0, Vec3::ZERO));

    /// Rescales `q` onto the sphere. Returns `None` for a zero or non-finite input.
    pub fn new_normalize(q: Quaternion) -> Option<Self> {
        let n = q.norm();
        if !n.is_finite() || n == 0.0 {
            return None;
        }
        Some(UnitQuaternion(q * (1.0 / n)))
    }

    /// Accepts `q` only if it is already unit within [`UNIT_TOLERANCE`]; the
    /// stored value is renormalized.
    pub fn try_from_unit(q: Quaternion) -> Option<Self> {
        if (q.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return None;
        }
        Self::new_normalize(q)
    }

    pub fn from_array(a: [f64; 4]) -> Option<Self> {
        Self::new_normalize(Quaternion::from_array(a))
    }

    pub fn scalar(&self) -> f64 {
        self.0.w
    }

    pub fn vector(&self) -> Vec3 {
        self.0.v
    }

    pub fn as_quaternion(&self) -> Quaternion {
        self.0
    }

    pub fn to_array(self) -> [f64; 4] {
        self.0.to_array()
    }

    pub fn negate(&self) -> UnitQuaternion {
        UnitQuaternion(-self.0)
    }

    /// Rotation by `angle` radians about body axis `axis` (0 = x, 1 = y, 2 = z).
    pub fn from_axis_angle(axis: usize, angle: f64) -> UnitQuaternion {
        let (s, c) = (angle / 2.0).sin_cos();
        let mut v = [0.0; 3];
        v[axis] = s;
        UnitQuaternion(Quaternion::new(c, Vec3::from(v)))
    }

    /// Intrinsic X-Y-Z sequence `q_x(phi) ⊙ q_y(theta) ⊙ q_z(psi)`, angles in
    /// radians. `[30°, 10°, 45°]` gives `(0.8804, 0.2704, −0.02089, 0.3891)`.
    pub fn from_euler_xyz(phi: f64, theta: f64, psi: f64) -> UnitQuaternion {
        let qx = Self::from_axis_angle(0, phi);
        let qy = Self::from_axis_angle(1, theta);
        let qz = Self::from_axis_angle(2, psi);
        quat_mul(&quat_mul(&qx, &qy), &qz)
    }

    /// Same as [`from_euler_xyz`](Self::from_euler_xyz) with angles in degrees.
    pub fn from_euler_xyz_degrees(angles: [f64; 3]) -> UnitQuaternion {
        let [a, b, c] = angles.map(f64::to_radians);
        Self::from_euler_xyz(a, b, c)
    }
}

/// Hamilton product, renormalized.
pub fn quat_mul(p: &UnitQuaternion, q: &UnitQuaternion) -> UnitQuaternion {
    UnitQuaternion::new_normalize(p.0.hamilton(&q.0)).expect("product of unit quaternions")
}

pub fn quat_conj(q: &UnitQuaternion) -> UnitQuaternion {
    UnitQuaternion(Quaternion::new(q.0.w, -q.0.v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix = RotationMatrix(Mat3::IDENTITY);

    pub fn matrix(&self) -> Mat3 {
        self.0
    }

    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }

    /// `R x`
    pub fn rotate(&self, x: Vec3) -> Vec3 {
        self.0 * x
    }

    /// `Rᵀ x`
    pub fn inverse_rotate(&self, x: Vec3) -> Vec3 {
        self.0.transpose() * x
    }

    /// `‖RᵀR − I‖_max` and `|det R − 1|`.
    pub fn orthonormality_error(&self) -> (f64, f64) {
        let rtr = self.0.transpose() * self.0;
        (rtr.max_abs_diff(&Mat3::IDENTITY), (self.0.determinant() - 1.0).abs())
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, o: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * o.0)
    }
}

/// `R(Q) = I + 2 q0 S(q) + 2 S(q)²`
pub fn rodrigues(q: &UnitQuaternion) -> RotationMatrix {
    let s = skew(q.vector());
    RotationMatrix(Mat3::IDENTITY + s * (2.0 * q.scalar()) + (s * s) * 2.0)
}
