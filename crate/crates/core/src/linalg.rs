//! Dense complex matrices and the Hermitian positive-definite Cholesky
//! factorization used by the Gaussian posterior.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Row-major construction; panics if `data.len() != rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        out
    }

    /// `A^H A`, exactly Hermitian.
    pub fn gram(&self) -> CMatrix {
        let n = self.cols;
        let mut g = CMatrix::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ai = row[i].conj();
                for j in i..n {
                    g.data[i * n + j] += ai * row[j];
                }
            }
        }
        for i in 0..n {
            g.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                g.data[j * n + i] = g.data[i * n + j].conj();
            }
        }
        g
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Lower-triangular factor `L` of a Hermitian positive-definite `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// Row-major lower triangle; the diagonal is real and positive.
    l: Vec<Complex64>,
}

impl Cholesky {
    /// Factors `a`, reading only its lower triangle. Returns `None` when a
    /// pivot is not strictly positive.
    pub fn factor(a: &CMatrix) -> Option<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols());
        let mut l = vec![ZERO; n * n];
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let d = d.sqrt();
            l[j * n + j] = Complex64::new(d, 0.0);
            let inv = 1.0 / d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s * inv;
            }
        }
        Some(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let l = &self.l;
        // L z = b
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= l[i * n + k] * z[k];
            }
            z[i] = s / l[i * n + i].re;
        }
        // L^H x = z
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= l[k * n + i].conj() * z[k];
            }
            z[i] = s / l[i * n + i].re;
        }
        z
    }

    /// `L^{-1}` as a row-major lower-triangular matrix.
    fn lower_inverse(&self) -> Vec<Complex64> {
        let n = self.n;
        let l = &self.l;
        let mut x = vec![ZERO; n * n];
        for j in 0..n {
            x[j * n + j] = Complex64::new(1.0 / l[j * n + j].re, 0.0);
            for i in (j + 1)..n {
                let mut s = ZERO;
                for k in j..i {
                    s -= l[i * n + k] * x[k * n + j];
                }
                x[i * n + j] = s / l[i * n + i].re;
            }
        }
        x
    }

    /// Diagonal of `A^{-1}`: `(A^{-1})_kk = sum_i |(L^{-1})_ik|^2`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let x = self.lower_inverse();
        let mut d = vec![0.0; n];
        for i in 0..n {
            for k in 0..=i {
                d[k] += x[i * n + k].norm_sqr();
            }
        }
        d
    }

    /// Full `A^{-1} = L^{-H} L^{-1}`, Hermitian by construction.
    pub fn inverse(&self) -> CMatrix {
        let n = self.n;
        let x = self.lower_inverse();
        let mut out = CMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..=r {
                let mut s = ZERO;
                for i in r..n {
                    s += x[i * n + r].conj() * x[i * n + c];
                }
                out[(r, c)] = s;
            }
        }
        for r in 0..n {
            out[(r, r)].im = 0.0;
            for c in 0..r {
                out[(c, r)] = out[(r, c)].conj();
            }
        }
        out
    }

    /// Reconstructs `L L^H`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.n;
        CMatrix::from_fn(n, n, |i, j| {
            (0..=i.min(j))
                .map(|k| self.l[i * n + k] * self.l[j * n + k].conj())
                .sum()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_spd(n: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = CMatrix::from_fn(n + 2, n, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        b.gram().add(&CMatrix::identity(n))
    }

    #[test]
    fn factor_reconstructs() {
        let a = random_spd(7, 1);
        let ch = Cholesky::factor(&a).unwrap();
        assert!(ch.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn solve_and_inverse_agree() {
        let a = random_spd(6, 2);
        let ch = Cholesky::factor(&a).unwrap();
        let b: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let x = ch.solve(&b);
        let back = a.mul_vec(&x);
        for (u, v) in back.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
        let inv = ch.inverse();
        assert!(a.matmul(&inv).max_abs_diff(&CMatrix::identity(6)) < 1e-12);
        let diag = ch.inverse_diagonal();
        for k in 0..6 {
            assert!((diag[k] - inv[(k, k)].re).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = CMatrix::identity(3);
        a[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!(Cholesky::factor(&a).is_none());
    }

    #[test]
    fn gram_is_hermitian() {
        let h = CMatrix::from_fn(4, 3, |r, c| Complex64::new(r as f64 - c as f64, (r * c) as f64));
        let g = h.gram();
        assert_eq!(g, g.adjoint());
        assert!(g.max_abs_diff(&h.adjoint().matmul(&h)) < 1e-12);
    }
}
