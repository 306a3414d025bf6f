//! Eigen-solvers for the small matrices that show up in the stability analysis:
//! a cyclic Jacobi sweep for symmetric 3×3 matrices and Hessenberg reduction
//! followed by Francis double-shift QR for dense nonsymmetric ones.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::so3::{Mat3, Vec3};

/// Largest dimension accepted by [`eigenvalues_dense`].
pub const MAX_DENSE_DIM: usize = 64;

/// QR iterations allowed per deflated eigenvalue before giving up.
pub const QR_ITERATIONS_PER_EIGENVALUE: usize = 100;

/// Eigen-decomposition of a symmetric 3×3 matrix, eigenvalues ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricEigen3 {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

impl SymmetricEigen3 {
    /// Largest `‖W v − λ v‖` over the three pairs.
    pub fn residual(&self, w: &Mat3) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(l, v)| (*w * *v - *v * *l).norm())
            .fold(0.0, f64::max)
    }
}

/// Cyclic Jacobi on the symmetric part of `a`, swept until the off-diagonal
/// mass drops below `1e-15` relative to the Frobenius norm (or 50 sweeps).
/// Each eigenvector is signed so that its first non-negligible component is
/// positive.
pub fn symmetric_eigen3(a: &Mat3) -> SymmetricEigen3 {
    let mut m = (*a + a.transpose()) * 0.5;
    let mut v = Mat3::IDENTITY;
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..50 {
        let off = (m.m[0][1].powi(2) + m.m[0][2].powi(2) + m.m[1][2].powi(2)).sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = m.m[p][q];
            if apq.abs() <= f64::MIN_POSITIVE {
                continue;
            }
            let theta = (m.m[q][q] - m.m[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Mat3::IDENTITY;
            rot.m[p][p] = c;
            rot.m[q][q] = c;
            rot.m[p][q] = s;
            rot.m[q][p] = -s;
            m = rot.transpose() * m * rot;
            m.m[p][q] = 0.0;
            m.m[q][p] = 0.0;
            v = v * rot;
        }
    }

    let mut pairs: Vec<(f64, Vec3)> = (0..3).map(|i| (m.m[i][i], v.column(i))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let fix_sign = |x: Vec3| {
        let lead = x.to_array().into_iter().find(|c| c.abs() > 1e-12).unwrap_or(0.0);
        if lead < 0.0 {
            -x
        } else {
            x
        }
    };
    SymmetricEigen3 {
        values: [pairs[0].0, pairs[1].0, pairs[2].0],
        vectors: [fix_sign(pairs[0].1), fix_sign(pairs[1].1), fix_sign(pairs[2].1)],
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "square matrix row",
                    expected: n,
                    actual: row.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// Copies `block` into the 3×3 window whose top-left corner is `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &Mat3) {
        for i in 0..3 {
            for j in 0..3 {
                self[(row + i, col + j)] = block.m[i][j];
            }
        }
    }

    pub fn block(&self, row: usize, col: usize) -> Mat3 {
        let mut b = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                b.m[i][j] = self[(row + i, col + j)];
            }
        }
        b
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_complex_vec(&self, z: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| z[j] * self[(i, j)])
                    .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Householder reduction to upper Hessenberg form; entries below the first
/// subdiagonal are zeroed.
fn hessenberg(a: &SquareMatrix) -> Vec<Vec<f64>> {
    let n = a.dim();
    let mut h = a.rows();
    if n < 3 {
        return h;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let g = if ort[m] > 0.0 { -hh.sqrt() } else { hh.sqrt() };
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f = (m..=high).rev().map(|i| ort[i] * h[i][j]).sum::<f64>() / hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut().take(high + 1) {
            let f = (m..=high).rev().map(|j| ort[j] * row[j]).sum::<f64>() / hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m][m - 1] = scale * g;
    }
    for (i, row) in h.iter_mut().enumerate() {
        for v in row.iter_mut().take(i.saturating_sub(1)) {
            *v = 0.0;
        }
    }
    h
}

/// Full spectrum of a real square matrix of dimension at most
/// [`MAX_DENSE_DIM`], via Hessenberg reduction and shifted QR.
pub fn eigenvalues_dense(a: &SquareMatrix) -> Result<Vec<Complex64>> {
    let nn = a.dim();
    if nn > MAX_DENSE_DIM {
        return Err(Error::DimensionMismatch {
            what: "dense eigenproblem (maximum dimension)",
            expected: MAX_DENSE_DIM,
            actual: nn,
        });
    }
    if nn == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];
    let eps = f64::EPSILON;
    let low = 0usize;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);

    let mut norm = 0.0;
    for (i, row) in h.iter().enumerate() {
        for v in row.iter().skip(i.saturating_sub(1)) {
            norm += v.abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= low as isize {
        let nu = n as usize;
        // look for a single small subdiagonal element
        let mut l = nu;
        while l > low {
            s = h[l - 1][l - 1].abs() + h[l][l].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[l][l - 1].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // one root
            h[nu][nu] += exshift;
            re[nu] = h[nu][nu];
            im[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == nu - 1 {
            // two roots
            let w = h[nu][nu - 1] * h[nu - 1][nu];
            p = (h[nu - 1][nu - 1] - h[nu][nu]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[nu][nu] += exshift;
            h[nu - 1][nu - 1] += exshift;
            let x = h[nu][nu];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = if z != 0.0 { x - w / z } else { re[nu - 1] };
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            let mut x = h[nu][nu];
            let mut y = 0.0;
            let mut w = 0.0;
            if l < nu {
                y = h[nu - 1][nu - 1];
                w = h[nu][nu - 1] * h[nu - 1][nu];
            }
            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in low..=nu {
                    h[i][i] -= x;
                }
                s = h[nu][nu - 1].abs() + h[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[i][i] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > QR_ITERATIONS_PER_EIGENVALUE {
                return Err(Error::EigenNoConvergence { iterations: iter });
            }

            // look for two consecutive small subdiagonal elements
            let mut m = nu - 2;
            loop {
                z = h[m][m];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[m + 1][m] + h[m][m + 1];
                q = h[m + 1][m + 1] - z - r - s;
                r = h[m + 2][m + 1];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[m][m - 1].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[m - 1][m - 1].abs() + z.abs() + h[m + 1][m + 1].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[i][i - 2] = 0.0;
                if i > m + 2 {
                    h[i][i - 3] = 0.0;
                }
            }

            // double QR step on rows l..n and columns m..n
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[k][k - 1];
                    q = h[k + 1][k - 1];
                    r = if notlast { h[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[k][k - 1] = -s * x;
                    } else if l != m {
                        h[k][k - 1] = -h[k][k - 1];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        let mut pp = h[k][j] + q * h[k + 1][j];
                        if notlast {
                            pp += r * h[k + 2][j];
                            h[k + 2][j] -= pp * z;
                        }
                        h[k][j] -= pp * x;
                        h[k + 1][j] -= pp * y;
                    }
                    for row in h.iter_mut().take(nu.min(k + 3) + 1).skip(low) {
                        let mut pp = x * row[k] + y * row[k + 1];
                        if notlast {
                            pp += z * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k] -= pp;
                        row[k + 1] -= pp * q;
                    }
                }
            }
        }
    }

    if re.iter().chain(&im).any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence { iterations: iter });
    }
    Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// Solves `(a − shift·I) x = b` by Gaussian elimination with partial pivoting.
fn solve_shifted(a: &SquareMatrix, shift: Complex64, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.dim();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = Complex64::new(a[(i, j)], 0.0);
                    if i == j {
                        v - shift
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[piv][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, piv);
        x.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let t = m[col][k];
                m[row][k] -= f * t;
            }
            let t = x[col];
            x[row] -= f * t;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in col + 1..n {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
}

/// Eigenvector for `lambda` by a few steps of inverse iteration, normalized to
/// unit Euclidean norm.
pub fn eigenvector_for(a: &SquareMatrix, lambda: Complex64) -> Option<Vec<Complex64>> {
    let n = a.dim();
    let scale = a.frobenius_norm().max(1.0);
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * (i % 3) as f64))
        .collect();
    for _ in 0..3 {
        let y = solve_shifted(a, shift, &z)?;
        let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        z = y.into_iter().map(|c| c / norm).collect();
    }
    Some(z)
}

/// `‖a z − λ z‖` for a unit eigenvector candidate `z`.
pub fn eigen_residual(a: &SquareMatrix, lambda: Complex64, z: &[Complex64]) -> f64 {
    a.mul_complex_vec(z)
        .iter()
        .zip(z)
        .map(|(az, zi)| (az - lambda * zi).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
