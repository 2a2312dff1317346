//! Dense complex matrices sized for the active set (a few dozen at most)
//! and the Hermitian Cholesky factorization the weight posterior needs.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `tr(self * other)`
    pub fn trace_product(&self, other: &CMatrix) -> Complex64 {
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..self.n {
            for k in 0..self.n {
                t += self[(i, k)] * other[(k, i)];
            }
        }
        t
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Submatrix on the given index set.
    pub fn select(&self, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// `A = L L^H` for Hermitian positive definite `A`.
#[derive(Clone, Debug)]
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<Complex64>,
}

impl Cholesky {
    /// Returns `None` when a pivot is not strictly positive.
    pub fn new(a: &CMatrix) -> Option<Self> {
        let n = a.dim();
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * n + j] = Complex64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        Some(Self { n, l })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i].conj() * x[k];
            }
            x[i] = s / self.l[i * n + i].re;
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.n;
        let mut inv = CMatrix::zeros(n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // symmetrize rounding noise
        for i in 0..n {
            inv[(i, i)] = Complex64::new(inv[(i, i)].re, 0.0);
            for j in i + 1..n {
                let avg = (inv[(i, j)] + inv[(j, i)].conj()) * 0.5;
                inv[(i, j)] = avg;
                inv[(j, i)] = avg.conj();
            }
        }
        inv
    }

    pub fn ln_det(&self) -> f64 {
        (0..self.n).map(|i| 2.0 * self.l[i * self.n + i].re.ln()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_hermitian_system() {
        let a = CMatrix::from_fn(3, |i, j| match (i, j) {
            (0, 0) => c(4.0, 0.0),
            (1, 1) => c(5.0, 0.0),
            (2, 2) => c(6.0, 0.0),
            (0, 1) => c(1.0, 0.5),
            (1, 0) => c(1.0, -0.5),
            (1, 2) => c(0.2, -1.0),
            (2, 1) => c(0.2, 1.0),
            _ => c(0.3, 0.0),
        });
        let ch = Cholesky::new(&a).unwrap();
        let b = [c(1.0, 2.0), c(-1.0, 0.0), c(0.5, 0.5)];
        let x = ch.solve(&b);
        let back = a.mul_vec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-13);
        }
        let inv = ch.inverse();
        let id = CMatrix::from_fn(3, |i, j| (0..3).map(|k| a[(i, k)] * inv[(k, j)]).sum());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - c(want, 0.0)).norm() < 1e-13);
            }
        }
        assert!(inv.hermitian_defect() == 0.0);
    }

    #[test]
    fn rejects_indefinite() {
        let a = CMatrix::from_fn(2, |i, j| if i == j { c(1.0, 0.0) } else { c(2.0, 0.0) });
        assert!(Cholesky::new(&a).is_none());
    }
}
