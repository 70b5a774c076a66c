//! Fixed-size dense matrices for the 3×3 and 4×4 symmetric-system algebra.

// index loops mirror the textbook factorizations
#![allow(clippy::needless_range_loop)]

use core::ops::{Add, Index, IndexMut, Mul, Sub};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix<const N: usize>(pub [[f64; N]; N]);

/// 4×4 real matrix (A⁰, Aᵏ, Jacobians).
pub type QuadMatrix = Matrix<4>;
pub type Mat3 = Matrix<3>;

impl<const N: usize> Default for Matrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Matrix<N> {
    pub const fn zeros() -> Self {
        Matrix([[0.0; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = 1.0;
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    /// Bitwise symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..N).all(|i| (0..i).all(|j| self.0[i][j].to_bits() == self.0[j][i].to_bits()))
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_fn(|i, j| a * self.0[i][j])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mul_vec(&self, x: &[f64; N]) -> [f64; N] {
        let mut y = [0.0; N];
        for (yi, row) in y.iter_mut().zip(self.0.iter()) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    /// Lower Cholesky factor, or `None` if the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<Self> {
        let mut l = Self::zeros();
        for j in 0..N {
            let mut d = self.0[j][j];
            for k in 0..j {
                d -= l.0[j][k] * l.0[j][k];
            }
            if !(d > 0.0) {
                return None;
            }
            let djj = d.sqrt();
            l.0[j][j] = djj;
            for i in (j + 1)..N {
                let mut s = self.0[i][j];
                for k in 0..j {
                    s -= l.0[i][k] * l.0[j][k];
                }
                l.0[i][j] = s / djj;
            }
        }
        Some(l)
    }

    /// LU factorisation with partial pivoting; returns the packed factors,
    /// the permutation and its parity, or `None` for an exactly singular matrix.
    fn lu(&self) -> Option<(Self, [usize; N], f64)> {
        let mut a = *self;
        let mut perm = [0usize; N];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        let mut parity = 1.0;
        for k in 0..N {
            let pivot = (k..N).fold(k, |best, i| if a.0[i][k].abs() > a.0[best][k].abs() { i } else { best });
            if a.0[pivot][k] == 0.0 {
                return None;
            }
            if pivot != k {
                a.0.swap(pivot, k);
                perm.swap(pivot, k);
                parity = -parity;
            }
            for i in (k + 1)..N {
                let m = a.0[i][k] / a.0[k][k];
                a.0[i][k] = m;
                for j in (k + 1)..N {
                    a.0[i][j] -= m * a.0[k][j];
                }
            }
        }
        Some((a, perm, parity))
    }

    pub fn determinant(&self) -> f64 {
        match self.lu() {
            Some((lu, _, parity)) => (0..N).fold(parity, |d, i| d * lu.0[i][i]),
            None => 0.0,
        }
    }

    pub fn solve(&self, b: &[f64; N]) -> Option<[f64; N]> {
        let (lu, perm, _) = self.lu()?;
        let mut x = [0.0; N];
        for i in 0..N {
            let mut s = b[perm[i]];
            for j in 0..i {
                s -= lu.0[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..N).rev() {
            let mut s = x[i];
            for j in (i + 1)..N {
                s -= lu.0[i][j] * x[j];
            }
            x[i] = s / lu.0[i][i];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        let mut inv = Self::zeros();
        for j in 0..N {
            let mut e = [0.0; N];
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..N {
                inv.0[i][j] = col[i];
            }
        }
        Some(inv)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    ///
    /// Only the upper triangle is trusted; the input is symmetrised first.
    pub fn symmetric_eigenvalues(&self) -> [f64; N] {
        let mut a = Self::from_fn(|i, j| 0.5 * (self.0[i][j] + self.0[j][i]));
        for _sweep in 0..64 {
            // stop once every off-diagonal entry is negligible relative to its
            // own diagonal pair; this keeps small eigenvalues of positive
            // definite matrices relatively accurate
            let converged = (0..N).all(|p| {
                ((p + 1)..N).all(|q| a.0[p][q].abs() <= 1e-18 * (a.0[p][p] * a.0[q][q]).abs().sqrt())
            });
            if converged {
                break;
            }
            for p in 0..N {
                for q in (p + 1)..N {
                    let apq = a.0[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a.0[q][q] - a.0[p][p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..N {
                        let akp = a.0[k][p];
                        let akq = a.0[k][q];
                        a.0[k][p] = c * akp - s * akq;
                        a.0[k][q] = s * akp + c * akq;
                    }
                    for k in 0..N {
                        let apk = a.0[p][k];
                        let aqk = a.0[q][k];
                        a.0[p][k] = c * apk - s * aqk;
                        a.0[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = [0.0; N];
        for (i, e) in ev.iter_mut().enumerate() {
            *e = a.0[i][i];
        }
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
        ev
    }
}

impl<const N: usize> Index<(usize, usize)> for Matrix<N> {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Matrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + b.0[i][j])
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - b.0[i][j])
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        Self::from_fn(|i, j| (0..N).map(|k| self.0[i][k] * b.0[k][j]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, SymmetricEigen};

    fn sample() -> QuadMatrix {
        Matrix([
            [4.0, 1.0, -0.5, 0.2],
            [1.0, 3.0, 0.3, 0.0],
            [-0.5, 0.3, 2.0, 0.1],
            [0.2, 0.0, 0.1, 1.5],
        ])
    }

    fn to_na(m: &QuadMatrix) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| m.0[i][j])
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        let m = sample();
        let ours = m.symmetric_eigenvalues();
        let mut theirs: std::vec::Vec<f64> = SymmetricEigen::new(to_na(&m)).eigenvalues.iter().copied().collect();
        theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-13 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = sample();
        let l = m.cholesky().unwrap();
        let r = l * l.transpose();
        assert!((r - m).max_abs() < 1e-14);
        let indefinite = Matrix([[1.0, 2.0], [2.0, 1.0]]);
        assert!(indefinite.cholesky().is_none());
    }

    #[test]
    fn determinant_and_inverse() {
        let m = sample();
        let det = to_na(&m).determinant();
        assert!((m.determinant() - det).abs() < 1e-13 * det.abs());
        let inv = m.inverse().unwrap();
        assert!((inv * m - QuadMatrix::identity()).max_abs() < 1e-14);
        assert_eq!(Matrix::<2>([[1.0, 2.0], [2.0, 4.0]]).determinant(), 0.0);
    }

    #[test]
    fn symmetry_is_bitwise() {
        let mut m = sample();
        assert!(m.is_symmetric());
        m.0[0][1] += 1e-15;
        assert!(!m.is_symmetric());
    }
}
