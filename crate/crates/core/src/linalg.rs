//! Small fixed-size linear algebra for the two-dimensional (u, m) block.
//!
//! Everything here is closed form; nothing allocates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A row vector of Wiener loadings, one entry per independent Brownian factor.
pub type Loading = [f64; 2];

#[inline]
pub fn dot(a: &Loading, b: &Loading) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Dense 2x2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn from_rows(r0: Loading, r1: Loading) -> Self {
        Mat2([r0, r1])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a, c, b, d)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: f64) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(s * a, s * b, s * c, s * d)
    }

    /// `self * self^T`.
    pub fn gram(&self) -> Self {
        let r0 = self.0[0];
        let r1 = self.0[1];
        let off = dot(&r0, &r1);
        Mat2::new(dot(&r0, &r0), off, off, dot(&r1, &r1))
    }

    pub fn mul_vec(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * x[0] + self.0[0][1] * x[1],
            self.0[1][0] * x[0] + self.0[1][1] * x[1],
        ]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other)
            .0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn quadratic_form(&self, x: [f64; 2]) -> f64 {
        let y = self.mul_vec(x);
        x[0] * y[0] + x[1] * y[1]
    }

    /// Eigenvalues from the characteristic polynomial `λ² − tr·λ + det`.
    ///
    /// The larger-magnitude root is formed first and the other recovered as
    /// `det / λ₁` so that a small root is not lost to cancellation.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half_tr = 0.5 * self.trace();
        let det = self.det();
        let disc = half_tr * half_tr - det;
        if disc >= 0.0 {
            let root = disc.sqrt();
            let big = if half_tr >= 0.0 { half_tr + root } else { half_tr - root };
            let small = if big == 0.0 { 0.0 } else { det / big };
            let (hi, lo) = if big >= small { (big, small) } else { (small, big) };
            [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
        } else {
            let im = (-disc).sqrt();
            [Complex64::new(half_tr, im), Complex64::new(half_tr, -im)]
        }
    }

    /// `exp(self)` via the Cayley–Hamilton form
    /// `e^{s}(c(q)·I + sh(q)·(M − sI))` with `s = tr/2`, `q² = s² − det`.
    pub fn expm(&self) -> Self {
        let s = 0.5 * self.trace();
        let q2 = s * s - self.det();
        let (c, sh) = if q2 > 0.0 {
            let q = q2.sqrt();
            (q.cosh(), q.sinh() / q)
        } else if q2 < 0.0 {
            let q = (-q2).sqrt();
            (q.cos(), q.sin() / q)
        } else {
            (1.0, 1.0)
        };
        let shifted = *self - Mat2::IDENTITY.scale(s);
        (Mat2::IDENTITY.scale(c) + shifted.scale(sh)).scale(s.exp())
    }

    /// Lower Cholesky factor of a symmetric positive-semidefinite matrix.
    /// Returns `None` if the matrix is not PSD (beyond a relative rounding
    /// allowance).
    pub fn cholesky(&self) -> Option<Mat2> {
        let a = self.0[0][0];
        let b = 0.5 * (self.0[0][1] + self.0[1][0]);
        let d = self.0[1][1];
        let slack = 1e-14 * (a.abs() + d.abs()).max(f64::MIN_POSITIVE);
        if a < -slack || d < -slack {
            return None;
        }
        if a <= slack {
            if b.abs() > slack.sqrt() * d.max(0.0).sqrt() + slack {
                return None;
            }
            return Some(Mat2::new(0.0, 0.0, 0.0, d.max(0.0).sqrt()));
        }
        let l11 = a.sqrt();
        let l21 = b / l11;
        let rem = d - l21 * l21;
        if rem < -slack {
            return None;
        }
        Some(Mat2::new(l11, 0.0, l21, rem.max(0.0).sqrt()))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.0[0][0] + o.0[0][0],
            self.0[0][1] + o.0[0][1],
            self.0[1][0] + o.0[1][0],
            self.0[1][1] + o.0[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Solves a 3x3 system with partial pivoting. Returns `None` when a pivot
/// falls below `rel_tol` times the largest entry of the matrix.
pub(crate) fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3], rel_tol: f64) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot_row][col].abs() <= rel_tol * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            let pivot = a[col];
            for (x, p) in a[row].iter_mut().zip(pivot).skip(col) {
                *x -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}
