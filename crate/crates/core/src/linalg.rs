//! Dense square complex matrices and a cyclic Jacobi Hermitian eigensolver.
//!
//! Operators in this crate are small (dimension well under a few hundred), so
//! everything is stored row-major in a flat `Vec` and no attempt is made at
//! blocking or BLAS-style kernels.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds from a row-major slice of `dim * dim` entries.
    ///
    /// Panics if the length is not a perfect square of `dim`.
    pub fn from_vec(dim: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data length mismatch");
        Self { dim, data }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` (no normalization).
    pub fn outer(psi: &[Complex<T>]) -> Self {
        let n = psi.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.scale(s)).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: T, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(s);
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = Complex::zero();
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise deviation from Hermiticity, `max |a_ij − conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.dim;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Replaces the matrix by its Hermitian part `(A + A*)/2`.
    pub fn hermitize(&self) -> Self {
        let half = T::c(0.5);
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = (self[(i, j)] + self[(j, i)].conj()).scale(half);
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Eigendecomposition of the Hermitian part of `self`.
    pub fn eigh(&self) -> HermitianEigen<T> {
        jacobi_eigh(self)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

/// Spectral decomposition `A = U diag(values) U*`.
///
/// Eigenvalues are sorted ascending; column `j` of `vectors` is the
/// eigenvector for `values[j]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Rebuilds `U g(Λ) U*` for a spectral function `g`.
    pub fn map_spectrum(&self, mut g: impl FnMut(T) -> T) -> CMatrix<T> {
        let n = self.values.len();
        let u = &self.vectors;
        let mapped: Vec<T> = self.values.iter().map(|&l| g(l)).collect();
        let mut out = CMatrix::zeros(n);
        for (k, &w) in mapped.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for i in 0..n {
                let uik = u[(i, k)].scale(w);
                for j in 0..n {
                    out[(i, j)] += uik * u[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.map_spectrum(|l| l)
    }

    /// `⟨u_k| M |u_k⟩` for every eigenvector `u_k`.
    pub fn diagonal_in_basis(&self, m: &CMatrix<T>) -> Vec<T> {
        let n = self.values.len();
        let u = &self.vectors;
        (0..n)
            .map(|k| {
                let mut acc = Complex::<T>::zero();
                for i in 0..n {
                    let mut row = Complex::zero();
                    for j in 0..n {
                        row += m[(i, j)] * u[(j, k)];
                    }
                    acc += u[(i, k)].conj() * row;
                }
                acc.re
            })
            .collect()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }
}

const MAX_SWEEPS: usize = 100;

fn jacobi_eigh<T: Real>(input: &CMatrix<T>) -> HermitianEigen<T> {
    let n = input.dim();
    let mut a = input.hermitize();
    let mut v = CMatrix::<T>::identity(n);
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[(i, i)].norm_sqr();
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * eps.sqrt() * (diag + off).sqrt() || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let raw: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| raw[x].partial_cmp(&raw[y]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| raw[i]).collect();
    let mut vectors = CMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    HermitianEigen { values, vectors }
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate<T: Real>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g.is_zero() {
        return;
    }
    let n = a.dim();
    // phase e^{-iφ} with a_pq = g e^{iφ}
    let phase = apq.conj().unscale(g);
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let two = T::c(2.0);
    let theta = (aqq - app) / (two * g);
    let t = if theta.is_infinite() {
        T::zero()
    } else {
        let sign = if theta < T::zero() { -T::one() } else { T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    // A <- A U with U_pp = c, U_pq = s, U_qp = -s e^{-iφ}, U_qq = c e^{-iφ}
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)] * phase;
        a[(k, p)] = akp.scale(c) - akq.scale(s);
        a[(k, q)] = akp.scale(s) + akq.scale(c);
    }
    // A <- U* A
    let phase_conj = phase.conj();
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)] * phase_conj;
        a[(p, k)] = apk.scale(c) - aqk.scale(s);
        a[(q, k)] = apk.scale(s) + aqk.scale(c);
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)] * phase;
        v[(k, p)] = vkp.scale(c) - vkq.scale(s);
        v[(k, q)] = vkp.scale(s) + vkq.scale(c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix<f64> {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::new(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix_is_its_own_spectrum() {
        let m = CMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        let e = m.eigh();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_eigenvalues() {
        let i = Complex::new(0.0, 1.0);
        let y = CMatrix::<f64>::from_vec(2, vec![Complex::zero(), -i, i, Complex::zero()]);
        let e = y.eigh();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_residual_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=12 {
            let m = random_hermitian(n, &mut rng);
            let e = m.eigh();
            let r = &e.reconstruct() - &m;
            assert!(r.frobenius_norm() <= 1e-12 * n as f64, "n={n}");
            let uu = &e.vectors.adjoint() * &e.vectors;
            assert!(uu.max_abs_diff(&CMatrix::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn f32_solver_converges() {
        let m = CMatrix::<f32>::from_vec(
            2,
            vec![
                Complex::new(2.0, 0.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, -1.0),
                Complex::new(2.0, 0.0),
            ],
        );
        let e = m.eigh();
        assert!((e.values[0] - 1.0).abs() < 1e-5);
        assert!((e.values[1] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn kron_dimensions_and_trace() {
        let a = CMatrix::<f64>::from_real_diagonal(&[0.25, 0.75]);
        let b = CMatrix::<f64>::from_real_diagonal(&[0.5, 0.25, 0.25]);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 6);
        assert!((k.trace().re - 1.0).abs() < 1e-15);
        assert_eq!(k[(4, 4)].re, 0.75 * 0.25);
    }
}
