//! Small fixed-size linear algebra: 3-vectors, 3x3 matrices, symmetric 2x2
//! eigen-decomposition and a tiny dense solver for least-squares fits.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::Serialize;

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    /// Standard basis vector `e_{i+1}`.
    pub fn basis(i: usize) -> Self {
        let mut v = [T::zero(); 3];
        v[i] = T::one();
        Vec3(v)
    }

    #[inline]
    pub fn x(&self) -> T {
        self.0[0]
    }
    #[inline]
    pub fn y(&self) -> T {
        self.0[1]
    }
    #[inline]
    pub fn z(&self) -> T {
        self.0[2]
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Self {
        *self * (T::one() / self.norm())
    }

    pub fn scale(&self, s: T) -> Self {
        *self * s
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [
            self.0[0].to_f64_lossy(),
            self.0[1].to_f64_lossy(),
            self.0[2].to_f64_lossy(),
        ]
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn zero() -> Self {
        Mat3([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn outer(a: &Vec3<T>, b: &Vec3<T>) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = a.0[i] * b.0[j];
            }
        }
        m
    }

    /// Rotation by `angle` about the unit vector `axis` (Rodrigues).
    pub fn rotation(axis: &Vec3<T>, angle: T) -> Self {
        let k = axis.normalized();
        let (s, c) = angle.sin_cos();
        let one_c = T::one() - c;
        let [x, y, z] = k.0;
        Mat3([
            [c + x * x * one_c, x * y * one_c - z * s, x * z * one_c + y * s],
            [y * x * one_c + z * s, c + y * y * one_c, y * z * one_c - x * s],
            [z * x * one_c - y * s, z * y * one_c + x * s, c + z * z * one_c],
        ])
    }

    pub fn apply(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    /// Bilinear form `aᵀ M b`.
    pub fn form(&self, a: &Vec3<T>, b: &Vec3<T>) -> T {
        a.dot(&self.apply(b))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s = s + self.0[i][k] * o.0[k][j];
                }
                r.0[i][j] = s;
            }
        }
        r
    }

    pub fn scale(&self, s: T) -> Self {
        let mut r = *self;
        for row in r.0.iter_mut() {
            for v in row.iter_mut() {
                *v = *v * s;
            }
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] = r.0[i][j] + o.0[i][j];
            }
        }
        r
    }

    /// Max-abs entry of `MᵀM − I`.
    pub fn orthogonality_defect(&self) -> T {
        let p = self.transpose().mul_mat(self);
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((p.0[i][j] - target).abs());
            }
        }
        worst
    }
}

/// Value, gradient and Hessian of a function on R³ at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub grad: Vec3<T>,
    pub hess: Mat3<T>,
}

impl<T: Real> Jet<T> {
    pub fn zero() -> Self {
        Jet {
            value: T::zero(),
            grad: Vec3::zero(),
            hess: Mat3::zero(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Jet {
            value: self.value + o.value,
            grad: self.grad + o.grad,
            hess: self.hess.add(&o.hess),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Jet {
            value: self.value * s,
            grad: self.grad * s,
            hess: self.hess.scale(s),
        }
    }
}

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sym2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Sym2 { a, b, c }
    }

    pub fn trace(&self) -> T {
        self.a + self.c
    }

    pub fn det(&self) -> T {
        self.a * self.c - self.b * self.b
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (T, T) {
        let mean = (self.a + self.c) * T::half();
        let half_diff = (self.a - self.c) * T::half();
        let r = half_diff.hypot(self.b);
        (mean - r, mean + r)
    }

    /// Frobenius norm of the trace-free part, `‖M − (tr M / 2) I‖_F`.
    pub fn anisotropy(&self) -> T {
        let half_diff = (self.a - self.c) * T::half();
        (T::two() * (half_diff * half_diff + self.b * self.b)).sqrt()
    }

    pub fn add(&self, o: &Self) -> Self {
        Sym2::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }

    pub fn scale(&self, s: T) -> Self {
        Sym2::new(self.a * s, self.b * s, self.c * s)
    }
}

/// Solve the dense system `A x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` for (numerically) singular systems.
pub fn solve_dense<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    let tiny = scale * T::epsilon() * T::c(16.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= tiny {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (x, v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x = *x - f * *v;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Linear least squares via the normal equations; `rows` are the design
/// matrix rows. Adequate for the well-conditioned 4-parameter fits used here.
pub fn least_squares<T: Real>(rows: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let p = rows.first()?.len();
    let mut ata = vec![vec![T::zero(); p]; p];
    let mut atb = vec![T::zero(); p];
    for (row, &y) in rows.iter().zip(rhs) {
        for i in 0..p {
            atb[i] = atb[i] + row[i] * y;
            for j in 0..p {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
        }
    }
    solve_dense(ata, atb)
}
