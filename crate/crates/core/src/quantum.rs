//! Density operators and the entropic quantities used for leakage accounting.
//!
//! All quantities are reported in bits. Divergences that are infinite because
//! of a support mismatch return `T::infinity()` rather than an error.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{CMatrix, HermitianEigen};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("operator has trace {0}, expected 1")]
    BadTrace(f64),
    #[error("operator has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("not a probability distribution: {0}")]
    BadDistribution(String),
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("matrix data has {got} entries, expected {expected}")]
    BadShape { expected: usize, got: usize },
}

/// Numerical tolerances shared by validation and inequality checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    /// Relative eigenvalue threshold below which a direction is outside the support.
    pub support: f64,
    pub num: f64,
    pub dist: f64,
    pub povm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            support: 1e-10,
            num: 1e-7,
            dist: 1e-9,
            povm: 1e-9,
        }
    }
}

impl Tolerances {
    /// Loosened tolerances suitable for single-precision work.
    pub fn single_precision() -> Self {
        Self {
            herm: 1e-5,
            trace: 1e-5,
            psd: 1e-5,
            support: 1e-6,
            num: 1e-4,
            dist: 1e-5,
            povm: 1e-5,
        }
    }
}

/// Hermitian operator that need not be positive or normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: CMatrix<T>, tol: &Tolerances) -> Result<Self, QuantumError> {
        let defect = matrix.hermiticity_defect().to_f64_lossy();
        if !(defect <= tol.herm) {
            return Err(QuantumError::NotHermitian(defect));
        }
        Ok(Self {
            matrix: matrix.hermitize(),
        })
    }

    /// Wraps a matrix already known to be Hermitian (it is symmetrized anyway).
    pub fn from_hermitian(matrix: CMatrix<T>) -> Self {
        Self {
            matrix: matrix.hermitize(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn eigh(&self) -> HermitianEigen<T> {
        self.matrix.eigh()
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigh().values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// `tr(self · other)`, real for Hermitian operands.
    pub fn trace_with(&self, other: &CMatrix<T>) -> T {
        self.matrix.trace_product(other).re
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(matrix: CMatrix<T>, tol: &Tolerances) -> Result<Self, QuantumError> {
        let herm = HermitianOperator::new(matrix, tol)?;
        let tr = herm.trace().to_f64_lossy();
        if !((tr - 1.0).abs() <= tol.trace) {
            return Err(QuantumError::BadTrace(tr));
        }
        let min = herm.min_eigenvalue().to_f64_lossy();
        if min < -tol.psd {
            return Err(QuantumError::NotPositive(min));
        }
        Ok(Self {
            matrix: herm.into_matrix(),
        })
    }

    /// Wraps a matrix that is valid by construction (convex combinations,
    /// tensor products of valid states).
    pub(crate) fn from_trusted(matrix: CMatrix<T>) -> Self {
        Self {
            matrix: matrix.hermitize(),
        }
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &[Complex<T>]) -> Self {
        let norm: T = psi.iter().map(|z| z.norm_sqr()).sum();
        Self::from_trusted(CMatrix::outer(psi).scale(T::one() / norm))
    }

    /// Computational basis state `|i⟩⟨i|` in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        m[(i, i)] = Complex::new(T::one(), T::zero());
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim).scale(T::one() / T::from_count(dim)),
        }
    }

    /// Random full-rank state `G G* / tr(G G*)` with complex Gaussian `G`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self
    where
        StandardNormal: rand_distr::Distribution<T>,
    {
        let data = (0..dim * dim)
            .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let g = CMatrix::from_vec(dim, data);
        let gg = &g * &g.adjoint();
        let tr = gg.trace().re;
        Self::from_trusted(gg.scale(T::one() / tr))
    }

    /// Random pure state.
    pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self
    where
        StandardNormal: rand_distr::Distribution<T>,
    {
        let psi: Vec<Complex<T>> = (0..dim)
            .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::pure(&psi)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn as_hermitian(&self) -> HermitianOperator<T> {
        HermitianOperator {
            matrix: self.matrix.clone(),
        }
    }

    pub fn eigh(&self) -> HermitianEigen<T> {
        self.matrix.eigh()
    }

    /// Convex combination `Σ w_i ρ_i`; weights are trusted to be a distribution.
    pub fn mixture<'a, I>(dim: usize, parts: I) -> Self
    where
        I: IntoIterator<Item = (T, &'a DensityOperator<T>)>,
        T: 'a,
    {
        let mut m = CMatrix::zeros(dim);
        for (w, rho) in parts {
            if !w.is_zero() {
                m.add_scaled(w, &rho.matrix);
            }
        }
        Self::from_trusted(m)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }
}

/// Finite family of states on a common space, indexed by position.
#[derive(Clone, Debug)]
pub struct StateEnsemble<T> {
    dim: usize,
    states: Vec<DensityOperator<T>>,
}

impl<T: Real> StateEnsemble<T> {
    pub fn new(states: Vec<DensityOperator<T>>) -> Result<Self, QuantumError> {
        let dim = states.first().ok_or(QuantumError::EmptyEnsemble)?.dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(QuantumError::DimensionMismatch(dim, bad.dim()));
        }
        Ok(Self { dim, states })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityOperator<T>] {
        &self.states
    }

    pub fn average(&self, q: &[T]) -> DensityOperator<T> {
        DensityOperator::mixture(self.dim, q.iter().copied().zip(&self.states))
    }
}

/// `-Σ p log₂ p` over the given eigenvalues with `0 log 0 = 0`.
pub(crate) fn shannon_bits<T: Real>(values: &[T]) -> T {
    let mut h = T::zero();
    for &p in values {
        if p > T::zero() {
            h -= p * p.log2();
        }
    }
    h.max(T::zero())
}

/// Checks that `q` is a probability vector of length `n`.
pub fn check_distribution<T: Real>(q: &[T], n: usize, tol: &Tolerances) -> Result<(), QuantumError> {
    if q.len() != n {
        return Err(QuantumError::BadDistribution(format!(
            "length {} for alphabet of size {n}",
            q.len()
        )));
    }
    if let Some(p) = q.iter().find(|p| !(p.to_f64_lossy() >= -tol.dist)) {
        return Err(QuantumError::BadDistribution(format!("negative entry {p}")));
    }
    let total: f64 = q.iter().map(|p| p.to_f64_lossy()).sum();
    if (total - 1.0).abs() > tol.dist {
        return Err(QuantumError::BadDistribution(format!("sums to {total}")));
    }
    Ok(())
}

/// Von Neumann entropy `S(ρ) = −tr ρ log₂ ρ`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityOperator<T>) -> T {
    let e = rho.eigh();
    let cap = T::from_count(rho.dim()).log2();
    shannon_bits(&e.values).min(cap)
}

/// Holevo quantity `χ(Q; Φ) = S(Σ Q(x) ρ_x) − Σ Q(x) S(ρ_x)`.
pub fn holevo<T: Real>(q: &[T], ensemble: &StateEnsemble<T>, tol: &Tolerances) -> Result<T, QuantumError> {
    check_distribution(q, ensemble.len(), tol)?;
    let avg = ensemble.average(q);
    let mut chi = von_neumann_entropy(&avg);
    for (&p, rho) in q.iter().zip(ensemble.states()) {
        if p > T::zero() {
            chi -= p * von_neumann_entropy(rho);
        }
    }
    Ok(chi.max(T::zero()))
}

fn check_dims(a: usize, b: usize) -> Result<(), QuantumError> {
    if a != b {
        return Err(QuantumError::DimensionMismatch(a, b));
    }
    Ok(())
}

/// Spectral data of a reference state `σ` split into support and kernel.
pub(crate) struct SupportSplit<T> {
    eig: HermitianEigen<T>,
    threshold: T,
}

impl<T: Real> SupportSplit<T> {
    pub(crate) fn new(sigma: &CMatrix<T>, tol: &Tolerances) -> Self {
        let eig = sigma.eigh();
        let threshold = T::c(tol.support) * eig.max_value();
        Self { eig, threshold }
    }

    #[inline]
    fn in_support(&self, lambda: T) -> bool {
        lambda > self.threshold
    }

    /// Weight `tr(ρ Π_ker σ)` together with the per-eigenvector diagonal of ρ.
    fn kernel_weight(&self, rho: &CMatrix<T>) -> (T, Vec<T>) {
        let diag = self.eig.diagonal_in_basis(rho);
        let w = diag
            .iter()
            .zip(&self.eig.values)
            .filter(|(_, &l)| !self.in_support(l))
            .map(|(&d, _)| d)
            .sum::<T>();
        (w, diag)
    }

    /// Moore–Penrose pseudo-inverse restricted to the support.
    pub(crate) fn pinv(&self) -> CMatrix<T> {
        self.eig
            .map_spectrum(|l| if self.in_support(l) { T::one() / l } else { T::zero() })
    }

    /// Pseudo-inverse square root `σ^{-1/2}` on the support.
    pub(crate) fn pinv_sqrt(&self) -> CMatrix<T> {
        self.eig.map_spectrum(|l| {
            if self.in_support(l) {
                T::one() / l.sqrt()
            } else {
                T::zero()
            }
        })
    }

    #[cfg(test)]
    pub(crate) fn support_projector(&self) -> CMatrix<T> {
        self.eig
            .map_spectrum(|l| if self.in_support(l) { T::one() } else { T::zero() })
    }
}

/// Quantum relative entropy `D(ρ‖σ)` in bits; `+∞` when `supp ρ ⊄ supp σ`.
pub fn rel_entropy<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    tol: &Tolerances,
) -> Result<T, QuantumError> {
    check_dims(rho.dim(), sigma.dim())?;
    let split = SupportSplit::new(sigma.matrix(), tol);
    let (ker, diag) = split.kernel_weight(rho.matrix());
    if ker.to_f64_lossy() > tol.psd {
        return Ok(T::infinity());
    }
    let neg_entropy = -von_neumann_entropy(rho);
    let cross: T = diag
        .iter()
        .zip(&split.eig.values)
        .filter(|(_, &l)| split.in_support(l))
        .map(|(&d, &l)| d * l.log2())
        .sum();
    Ok((neg_entropy - cross).max(T::zero()))
}

/// `tr(ρ² σ⁺)`, i.e. `2^{D₂(ρ‖σ)}`; `+∞` on support violation.
pub fn renyi2_exp<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    tol: &Tolerances,
) -> Result<T, QuantumError> {
    check_dims(rho.dim(), sigma.dim())?;
    let split = SupportSplit::new(sigma.matrix(), tol);
    let (ker, _) = split.kernel_weight(rho.matrix());
    if ker.to_f64_lossy() > tol.psd {
        return Ok(T::infinity());
    }
    Ok(renyi2_exp_with(rho.matrix(), &split.pinv()))
}

/// `tr(ρ² σ⁺)` for a precomputed pseudo-inverse.
pub(crate) fn renyi2_exp_with<T: Real>(rho: &CMatrix<T>, sigma_pinv: &CMatrix<T>) -> T {
    let rho_sq = rho * rho;
    rho_sq.trace_product(sigma_pinv).re
}

/// Rényi-2 relative entropy `D₂(ρ‖σ) = log₂ tr(ρ² σ⁻¹)` in bits.
pub fn renyi2<T: Real>(
    rho: &DensityOperator<T>,
    sigma: &DensityOperator<T>,
    tol: &Tolerances,
) -> Result<T, QuantumError> {
    let e = renyi2_exp(rho, sigma, tol)?;
    if e.is_infinite() {
        return Ok(e);
    }
    Ok(e.log2().max(T::zero()))
}

/// Trace norm `‖H‖₁ = Σ |λ_i|`.
pub fn trace_norm<T: Real>(h: &HermitianOperator<T>) -> T {
    h.eigh().values.iter().map(|l| l.abs()).sum()
}

/// `‖ρ − σ‖₁` (no factor ½).
pub fn trace_distance<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> Result<T, QuantumError> {
    check_dims(rho.dim(), sigma.dim())?;
    let diff = HermitianOperator::from_hermitian(rho.matrix() - sigma.matrix());
    Ok(trace_norm(&diff))
}

pub fn tensor<T: Real>(rho: &DensityOperator<T>, sigma: &DensityOperator<T>) -> DensityOperator<T> {
    rho.tensor(sigma)
}

/// Diagonal operator carrying a classical distribution.
pub fn classical_embed<T: Real>(p: &[T], tol: &Tolerances) -> Result<DensityOperator<T>, QuantumError> {
    check_distribution(p, p.len(), tol)?;
    Ok(DensityOperator {
        matrix: CMatrix::from_real_diagonal(p),
    })
}

/// Right-hand side of the bit-normalized Pinsker inequality, `2 ln2 · D`.
pub fn pinsker_rhs<T: Real>(d_bits: T) -> T {
    T::c(2.0) * T::LN_2() * d_bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(p: &[f64]) -> DensityOperator<f64> {
        DensityOperator::new(CMatrix::from_real_diagonal(p), &Tolerances::default()).unwrap()
    }

    const TOL: Tolerances = Tolerances {
        herm: 1e-9,
        trace: 1e-9,
        psd: 1e-9,
        support: 1e-10,
        num: 1e-7,
        dist: 1e-9,
        povm: 1e-9,
    };

    #[test]
    fn entropy_examples() {
        assert_eq!(von_neumann_entropy(&diag(&[1.0, 0.0])), 0.0);
        assert!((von_neumann_entropy(&diag(&[0.5, 0.5])) - 1.0).abs() < 1e-12);
        let expected = -(0.25f64 * 0.25f64.log2()) - 0.75 * 0.75f64.log2();
        assert!((von_neumann_entropy(&diag(&[0.25, 0.75])) - expected).abs() < 1e-12);
        assert!((expected - 0.8113).abs() < 1e-4);
    }

    #[test]
    fn validation_rejects_bad_operators() {
        let t = Tolerances::default();
        assert!(matches!(
            DensityOperator::new(CMatrix::from_real_diagonal(&[0.5, 0.6]), &t),
            Err(QuantumError::BadTrace(_))
        ));
        assert!(matches!(
            DensityOperator::new(CMatrix::from_real_diagonal(&[1.5, -0.5]), &t),
            Err(QuantumError::NotPositive(_))
        ));
        let mut m = CMatrix::from_real_diagonal(&[0.5, 0.5]);
        m[(0, 1)] = Complex::new(0.1, 0.0);
        assert!(matches!(
            DensityOperator::new(m, &t),
            Err(QuantumError::NotHermitian(_))
        ));
    }

    #[test]
    fn holevo_examples() {
        let same = StateEnsemble::new(vec![diag(&[0.3, 0.7]), diag(&[0.3, 0.7])]).unwrap();
        assert!(holevo(&[0.5, 0.5], &same, &TOL).unwrap().abs() < 1e-12);
        let orth = StateEnsemble::new(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        assert!((holevo(&[0.5, 0.5], &orth, &TOL).unwrap() - 1.0).abs() < 1e-12);
        assert!(holevo(&[1.0, 0.0], &orth, &TOL).unwrap().abs() < 1e-12);
        assert!(holevo(&[0.5, 0.6], &orth, &TOL).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[0.25, 0.75]);
        let expected = 0.5 * 2f64.log2() + 0.5 * (2.0f64 / 3.0).log2();
        assert!((rel_entropy(&rho, &sigma, &TOL).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.2075).abs() < 1e-4);
        assert!(rel_entropy(&rho, &rho, &TOL).unwrap().abs() < 1e-12);
        assert!(rel_entropy(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), &TOL)
            .unwrap()
            .is_infinite());
        // restricted support is fine when contained
        assert!(rel_entropy(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.5]), &TOL)
            .unwrap()
            .is_finite());
    }

    #[test]
    fn renyi2_examples() {
        let rho = diag(&[0.5, 0.5]);
        let sigma = diag(&[0.25, 0.75]);
        assert!((renyi2(&rho, &sigma, &TOL).unwrap() - (4.0f64 / 3.0).log2()).abs() < 1e-12);
        assert!(renyi2(&rho, &rho, &TOL).unwrap().abs() < 1e-12);
        assert!(renyi2(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), &TOL)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn trace_distance_examples() {
        let a = diag(&[1.0, 0.0]);
        let b = diag(&[0.0, 1.0]);
        assert!(trace_distance(&a, &a).unwrap().abs() < 1e-12);
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-12);
        assert!(trace_distance(&a, &diag(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn tensor_and_embed() {
        let half = DensityOperator::<f64>::maximally_mixed(2);
        let t = tensor(&half, &half);
        assert!(t.matrix().max_abs_diff(DensityOperator::maximally_mixed(4).matrix()) < 1e-15);
        assert!((t.matrix().trace().re - 1.0).abs() < 1e-15);
        let e = classical_embed::<f64>(&[1.0 / 3.0; 3], &TOL).unwrap();
        assert!((e.matrix()[(2, 2)].re - 1.0 / 3.0).abs() < 1e-15);
        assert!(classical_embed(&[0.2, 0.2], &TOL).is_err());
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 1..=5 {
            let rho: DensityOperator<f64> = DensityOperator::random(d, &mut rng);
            DensityOperator::new(rho.matrix().clone(), &TOL).unwrap();
            let s = von_neumann_entropy(&rho);
            assert!(s >= 0.0 && s <= (d as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let t = Tolerances::single_precision();
        let rho = DensityOperator::<f32>::new(CMatrix::from_real_diagonal(&[0.5, 0.5]), &t).unwrap();
        let sigma = DensityOperator::<f32>::new(CMatrix::from_real_diagonal(&[0.25, 0.75]), &t).unwrap();
        let d = rel_entropy(&rho, &sigma, &t).unwrap();
        let d2 = renyi2(&rho, &sigma, &t).unwrap();
        assert!((d - 0.2075).abs() < 1e-3);
        assert!(d <= d2 + 1e-5);
    }
}
