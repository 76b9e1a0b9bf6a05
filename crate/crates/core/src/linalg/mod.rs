//! Dense complex matrices and the decompositions the rest of the crate needs.
//!
//! Storage is row-major. Vectorization is column-stacking:
//! `vec(a)[i + j*d] = a[(i, j)]`.

mod decomp;

pub use decomp::{
    cesaro_mean, eigenvalues, hermitian_eigen, hermitian_function, householder_qr, null_space, orthonormalize,
    polar_unitary, spectral_projections, svd, HermitianEigen, Polar, Svd,
};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};
#[allow(unused_imports)]
use num_traits::Float;

pub use num_complex::Complex64 as C64;

/// `C64::new(re, im)`.
#[inline]
pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{2 pi i t}`, exact at multiples of a quarter turn.
pub fn e1(t: f64) -> C64 {
    let r = t - t.floor();
    let q = 4.0 * r;
    if q == q.floor() {
        return match q as u8 {
            0 => c64(1.0, 0.0),
            1 => c64(0.0, 1.0),
            2 => c64(-1.0, 0.0),
            _ => c64(0.0, -1.0),
        };
    }
    let a = 2.0 * core::f64::consts::PI * r;
    c64(a.cos(), a.sin())
}

/// `e^{2 pi i t / n}`.
#[inline]
pub fn e_n(n: usize, t: f64) -> C64 {
    e1(t / n as f64)
}

/// Phase of `z` normalized to `[0, 1)` turns.
pub fn turns(z: C64) -> f64 {
    let mut t = z.im.atan2(z.re) / (2.0 * core::f64::consts::PI);
    if t < 0.0 {
        t += 1.0;
    }
    if t >= 1.0 {
        t -= 1.0;
    }
    t
}

/// Sort key for points on the unit circle: [`turns`] with values within
/// `1e-9` of a full turn wrapped to 0.
pub fn phase_key(z: C64) -> f64 {
    let t = turns(z);
    if t > 1.0 - 1e-9 {
        0.0
    } else {
        t
    }
}

#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        CMat { rows, cols, data }
    }

    /// Real matrix from rows, convenient in tests.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Matrix unit `|i><j|` of size `d`.
    pub fn ket_bra(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    /// Outer product `|x><y|`.
    pub fn outer(x: &[C64], y: &[C64]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
    }

    pub fn column(v: &[C64]) -> Self {
        Self::from_row_major(v.len(), 1, v.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length of a square matrix.
    #[inline]
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &CMat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn adjoint(&self) -> CMat {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// `self - s I`.
    pub fn shift(&self, s: C64) -> CMat {
        let mut m = self.clone();
        for i in 0..m.rows.min(m.cols) {
            m[(i, i)] -= s;
        }
        m
    }

    pub fn hermitian_part(&self) -> CMat {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `v^H A` as a row.
    pub fn vecmat(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (i, vi) in v.iter().enumerate() {
            let c = vi.conj();
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += c * a;
            }
        }
        out
    }

    pub fn kron(&self, other: &CMat) -> CMat {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// Column-stacking vectorization.
    pub fn vectorize(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    /// Inverse of [`CMat::vectorize`] for a `d x d` matrix.
    pub fn unvectorize(d: usize, v: &[C64]) -> CMat {
        assert_eq!(v.len(), d * d);
        Self::from_fn(d, d, |i, j| v[i + j * d])
    }

    /// Hilbert-Schmidt inner product `tr(self^* other)`.
    pub fn hs_inner(&self, other: &CMat) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm_op(&self) -> f64 {
        svd(self).s.first().copied().unwrap_or(0.0)
    }

    /// Trace norm (sum of singular values).
    pub fn norm_trace(&self) -> f64 {
        svd(self).s.iter().sum()
    }

    pub fn powu(&self, mut k: u64) -> CMat {
        let mut base = self.clone();
        let mut acc = CMat::identity(self.rows);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (self - &self.adjoint()).max_abs() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&(&self.adjoint() * self) - &CMat::identity(self.rows)).max_abs() <= tol
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (&(self * self) - self).max_abs() <= tol
    }

    pub fn is_normal(&self, tol: f64) -> bool {
        let a = self.adjoint();
        (&(self * &a) - &(&a * self)).max_abs() <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue_hermitian(&self) -> f64 {
        hermitian_eigen(&self.hermitian_part()).values[0]
    }

    /// PSD check on the Hermitian part, relative to `tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol.max(1e-12) * (1.0 + self.max_abs())) && self.min_eigenvalue_hermitian() >= -tol
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn mul(self, rhs: &'a CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        let n = rhs.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        &self * &rhs
    }
}

impl<'a> Add<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn add(self, rhs: &'a CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Add for CMat {
    type Output = CMat;
    fn add(self, rhs: CMat) -> CMat {
        &self + &rhs
    }
}

impl<'a> Sub<&'a CMat> for &'a CMat {
    type Output = CMat;
    fn sub(self, rhs: &'a CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Sub for CMat {
    type Output = CMat;
    fn sub(self, rhs: CMat) -> CMat {
        &self - &rhs
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMat> for CMat {
    fn sub_assign(&mut self, rhs: &CMat) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

/// Euclidean norm of a complex vector.
pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `x^H y`.
pub fn vdot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorize_is_column_stacking() {
        let a = CMat::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v: Vec<f64> = a.vectorize().iter().map(|z| z.re).collect();
        assert_eq!(v, [1.0, 3.0, 2.0, 4.0]);
        assert_eq!(CMat::unvectorize(2, &a.vectorize()), a);
    }

    #[test]
    fn kron_vec_identity() {
        // vec(A X B) = (B^T kron A) vec(X)
        let a = CMat::from_fn(2, 2, |i, j| c64(i as f64 + 1.0, j as f64));
        let b = CMat::from_fn(2, 2, |i, j| c64(j as f64 - i as f64, 0.5));
        let x = CMat::from_fn(2, 2, |i, j| c64((i * 2 + j) as f64, -1.0));
        let lhs = (&(&a * &x) * &b).vectorize();
        let rhs = b.transpose().kron(&a).matvec(&x.vectorize());
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn hs_inner_matches_trace() {
        let a = CMat::from_fn(3, 3, |i, j| c64(i as f64, j as f64));
        let b = CMat::from_fn(3, 3, |i, j| c64(1.0 + j as f64, -(i as f64)));
        let t = (&a.adjoint() * &b).trace();
        assert!((a.hs_inner(&b) - t).norm() < 1e-12);
    }

    #[test]
    fn powu_matches_repeated_product() {
        let a = CMat::from_fn(3, 3, |i, j| c64(0.1 * (i + j) as f64, 0.05 * i as f64));
        let mut p = CMat::identity(3);
        for _ in 0..7 {
            p = &p * &a;
        }
        assert!((&a.powu(7) - &p).max_abs() < 1e-12);
    }

    #[test]
    fn turns_range() {
        assert_eq!(turns(c64(1.0, 0.0)), 0.0);
        assert!((turns(c64(-1.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!((turns(c64(0.0, -1.0)) - 0.75).abs() < 1e-15);
        assert!((e_n(3, 1.0) - e1(1.0 / 3.0)).norm() < 1e-15);
    }
}
