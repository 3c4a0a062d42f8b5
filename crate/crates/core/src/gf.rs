//! Arithmetic in GF(q^t) for prime `q`, and F_q-linear subspaces of it.
//!
//! Elements are coefficient vectors in the power basis of the modulus
//! polynomial, coordinate 0 being the constant term. The canonical element
//! order is by integer index `Σ c_i q^i`, so coordinate 0 varies fastest.

use std::fmt;

use thiserror::Error;

/// Largest supported field size.
pub const FIELD_SIZE_CAP: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field size {q}^{t} exceeds the cap of {FIELD_SIZE_CAP}")]
    CapExceeded { q: u32, t: u32 },
    #[error("element does not belong to GF({q}^{t})")]
    MixedContext { q: u32, t: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("subspace dimension {ell} out of range for degree {t}")]
    DimensionOutOfRange { ell: u32, t: u32 },
}

/// Element of GF(q^t).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    q: u32,
    coeffs: Vec<u32>,
}

impl FieldElement {
    #[inline]
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Position in the canonical enumeration, `Σ c_i q^i`.
    pub fn index(&self) -> usize {
        self.coeffs
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.q as usize + c as usize)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(""))
    }
}

/// GF(q^t) with a fixed monic irreducible modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldCtx {
    q: u32,
    t: u32,
    /// Low-order coefficients of the modulus; the leading coefficient 1 is implicit.
    modulus: Vec<u32>,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Polynomial over F_q as a low-first coefficient vector, trimmed of leading zeros.
type Poly = Vec<u32>;

fn trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[u32], m: &[u32], q: u32) -> Poly {
    // m is monic with degree m.len() - 1
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &mc) in m.iter().enumerate() {
                let sub = (lead as u64 * mc as u64 % q as u64) as u32;
                r[shift + i] = (r[shift + i] + q - sub) % q;
            }
        }
        r.pop();
    }
    trim(r)
}

/// Monic polynomial of degree `deg` whose lower coefficients are the base-q digits of `code`.
fn monic_from_code(deg: u32, code: u64, q: u32) -> Poly {
    let mut p = Vec::with_capacity(deg as usize + 1);
    let mut c = code;
    for _ in 0..deg {
        p.push((c % q as u64) as u32);
        c /= q as u64;
    }
    p.push(1);
    p
}

/// Irreducibility by trial division with every monic polynomial of degree ≤ deg/2.
fn is_irreducible(p: &[u32], q: u32) -> bool {
    let deg = (p.len() - 1) as u32;
    for d in 1..=deg / 2 {
        let count = (q as u64).pow(d);
        for code in 0..count {
            let f = monic_from_code(d, code, q);
            if poly_rem(p, &f, q).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// GF(q^t) using the lexicographically smallest monic irreducible modulus.
    ///
    /// Candidates are ordered by the integer value of their lower
    /// coefficients read as base-q digits, constant term least significant.
    pub fn new(q: u32, t: u32) -> Result<Self, GfError> {
        if !is_prime(q) {
            return Err(GfError::NotPrime(q));
        }
        if t == 0 {
            return Err(GfError::ZeroDegree);
        }
        let size = (q as u64).checked_pow(t);
        if size.is_none_or(|s| s > FIELD_SIZE_CAP) {
            return Err(GfError::CapExceeded { q, t });
        }
        let size = size.unwrap();
        let modulus = (0..size)
            .map(|code| monic_from_code(t, code, q))
            .find(|p| is_irreducible(p, q))
            .expect("an irreducible polynomial of every degree exists");
        Ok(Self {
            q,
            t,
            modulus: modulus[..t as usize].to_vec(),
        })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn size(&self) -> usize {
        (self.q as usize).pow(self.t)
    }

    /// Full monic modulus, low-first.
    pub fn modulus_poly(&self) -> Vec<u32> {
        let mut m = self.modulus.clone();
        m.push(1);
        m
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            q: self.q,
            coeffs: vec![0; self.t as usize],
        }
    }

    pub fn one(&self) -> FieldElement {
        let mut e = self.zero();
        e.coeffs[0] = 1;
        e
    }

    /// Power-basis vector `x^i`.
    pub fn basis_vector(&self, i: usize) -> FieldElement {
        let mut e = self.zero();
        e.coeffs[i] = 1;
        e
    }

    pub fn element(&self, coeffs: &[u32]) -> Result<FieldElement, GfError> {
        if coeffs.len() != self.t as usize || coeffs.iter().any(|&c| c >= self.q) {
            return Err(self.mixed());
        }
        Ok(FieldElement {
            q: self.q,
            coeffs: coeffs.to_vec(),
        })
    }

    /// Element at position `index` of the canonical enumeration.
    pub fn from_index(&self, index: usize) -> FieldElement {
        debug_assert!(index < self.size());
        let mut c = index;
        let coeffs = (0..self.t)
            .map(|_| {
                let d = (c % self.q as usize) as u32;
                c /= self.q as usize;
                d
            })
            .collect();
        FieldElement { q: self.q, coeffs }
    }

    /// All q^t elements in canonical order; element 0 comes first.
    pub fn enumerate(&self) -> Vec<FieldElement> {
        (0..self.size()).map(|i| self.from_index(i)).collect()
    }

    fn mixed(&self) -> GfError {
        GfError::MixedContext { q: self.q, t: self.t }
    }

    pub fn contains(&self, a: &FieldElement) -> bool {
        a.q == self.q && a.coeffs.len() == self.t as usize && a.coeffs.iter().all(|&c| c < self.q)
    }

    fn check(&self, a: &FieldElement) -> Result<(), GfError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(self.mixed())
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, &self.neg_unchecked(b)))
    }

    pub fn neg(&self, a: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    /// Scalar multiple by `c ∈ F_q`.
    pub fn scale(&self, c: u32, a: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        let c = c % self.q;
        Ok(FieldElement {
            q: self.q,
            coeffs: a.coeffs.iter().map(|&x| x * c % self.q).collect(),
        })
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        // a^(q^t - 2)
        Ok(self.pow_unchecked(a, self.size() as u64 - 2))
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> Result<FieldElement, GfError> {
        self.check(a)?;
        e %= (self.size() as u64 - 1).max(1);
        Ok(self.pow_unchecked(a, e))
    }

    pub(crate) fn add_unchecked(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            q: self.q,
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| (x + y) % self.q)
                .collect(),
        }
    }

    pub(crate) fn neg_unchecked(&self, a: &FieldElement) -> FieldElement {
        FieldElement {
            q: self.q,
            coeffs: a.coeffs.iter().map(|&x| (self.q - x) % self.q).collect(),
        }
    }

    pub(crate) fn mul_unchecked(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let t = self.t as usize;
        let q = self.q as u64;
        let mut prod = vec![0u64; 2 * t - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % q;
            }
        }
        // reduce with x^t = -Σ m_i x^i
        for deg in (t..prod.len()).rev() {
            let lead = prod[deg];
            if lead == 0 {
                continue;
            }
            prod[deg] = 0;
            for (i, &m) in self.modulus.iter().enumerate() {
                let k = deg - t + i;
                prod[k] = (prod[k] + (q - lead * m as u64 % q)) % q;
            }
        }
        FieldElement {
            q: self.q,
            coeffs: prod[..t].iter().map(|&c| c as u32).collect(),
        }
    }

    fn pow_unchecked(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            base = self.mul_unchecked(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: &FieldElement) -> Result<u64, GfError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        let one = self.one();
        let mut x = a.clone();
        let mut n = 1u64;
        while x != one {
            x = self.mul_unchecked(&x, a);
            n += 1;
        }
        Ok(n)
    }

    /// `A = span(x^0..x^{t-ℓ-1})`, `V = span(x^{t-ℓ}..x^{t-1})`.
    pub fn complementary_subspaces(&self, ell: u32) -> Result<(Subspace, Subspace), GfError> {
        if ell == 0 || ell >= self.t {
            return Err(GfError::DimensionOutOfRange { ell, t: self.t });
        }
        let split = (self.t - ell) as usize;
        let a_basis: Vec<FieldElement> = (0..split).map(|i| self.basis_vector(i)).collect();
        let v_basis: Vec<FieldElement> = (split..self.t as usize).map(|i| self.basis_vector(i)).collect();
        Ok((self.span(&a_basis)?, self.span(&v_basis)?))
    }

    /// Span of arbitrary vectors, reduced to canonical echelon form.
    pub fn span(&self, vectors: &[FieldElement]) -> Result<Subspace, GfError> {
        for v in vectors {
            self.check(v)?;
        }
        let q = self.q;
        let t = self.t as usize;
        let mut rows: Vec<Vec<u32>> = vectors.iter().map(|v| v.coeffs.clone()).collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..t {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let inv = mod_inv(rows[rank][col], q);
            for c in rows[rank].iter_mut() {
                *c = *c * inv % q;
            }
            for r in 0..rows.len() {
                if r != rank && rows[r][col] != 0 {
                    let f = rows[r][col];
                    let pivot_row = rows[rank].clone();
                    for (c, &pv) in rows[r].iter_mut().zip(&pivot_row) {
                        *c = (*c + q - f * pv % q) % q;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        Ok(Subspace {
            ctx_q: q,
            ctx_t: self.t,
            basis: rows.into_iter().map(|coeffs| FieldElement { q, coeffs }).collect(),
            pivots,
        })
    }

    /// `{shift + w : w ∈ sub}` in the order of `sub.elements()`.
    pub fn coset_elements(&self, sub: &Subspace, shift: &FieldElement) -> Result<Vec<FieldElement>, GfError> {
        self.check(shift)?;
        if sub.ctx_q != self.q || sub.ctx_t != self.t {
            return Err(self.mixed());
        }
        Ok(sub
            .elements(self)
            .iter()
            .map(|w| self.add_unchecked(shift, w))
            .collect())
    }
}

fn mod_inv(a: u32, q: u32) -> u32 {
    // q prime: a^(q-2)
    let (mut base, mut e, mut acc) = (a as u64 % q as u64, q as u64 - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q as u64;
        }
        base = base * base % q as u64;
        e >>= 1;
    }
    acc as u32
}

/// F_q-linear subspace in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ctx_q: u32,
    ctx_t: u32,
    basis: Vec<FieldElement>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }

    pub fn size(&self) -> usize {
        (self.ctx_q as usize).pow(self.dim() as u32)
    }

    /// Coordinates of `x` w.r.t. the echelon basis if `x` lies in the span.
    pub fn coordinates(&self, x: &FieldElement) -> Option<Vec<u32>> {
        let q = self.ctx_q;
        let coords: Vec<u32> = self.pivots.iter().map(|&p| x.coeffs[p]).collect();
        let mut rebuilt = vec![0u32; self.ctx_t as usize];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (r, &bv) in rebuilt.iter_mut().zip(&b.coeffs) {
                *r = (*r + c * bv) % q;
            }
        }
        (rebuilt == x.coeffs).then_some(coords)
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        x.q == self.ctx_q && x.coeffs.len() == self.ctx_t as usize && self.coordinates(x).is_some()
    }

    /// Element with the given basis coordinates.
    pub fn combine(&self, coords: &[u32]) -> FieldElement {
        let q = self.ctx_q;
        let mut out = vec![0u32; self.ctx_t as usize];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (r, &bv) in out.iter_mut().zip(&b.coeffs) {
                *r = (*r + c * bv) % q;
            }
        }
        FieldElement { q, coeffs: out }
    }

    /// All `q^dim` elements, ordered by their coordinate vector (first coordinate fastest).
    pub fn elements(&self, _ctx: &FieldCtx) -> Vec<FieldElement> {
        let q = self.ctx_q as usize;
        let dim = self.dim();
        (0..self.size())
            .map(|mut i| {
                let coords: Vec<u32> = (0..dim)
                    .map(|_| {
                        let d = (i % q) as u32;
                        i /= q;
                        d
                    })
                    .collect();
                self.combine(&coords)
            })
            .collect()
    }

    /// Position of `x` in `elements()`.
    pub fn position(&self, x: &FieldElement) -> Option<usize> {
        let coords = self.coordinates(x)?;
        Some(
            coords
                .iter()
                .rev()
                .fold(0usize, |acc, &c| acc * self.ctx_q as usize + c as usize),
        )
    }
}

/// Direct-sum decomposition `F_{q^t} = A ⊕ V` with a precomputed change of basis.
#[derive(Clone, Debug)]
pub struct DirectSum {
    a: Subspace,
    v: Subspace,
    /// Row `i` maps standard coordinates to coordinate `i` in the joint basis (A first, then V).
    inverse: Vec<Vec<u32>>,
    q: u32,
}

impl DirectSum {
    pub fn new(ctx: &FieldCtx, a: Subspace, v: Subspace) -> Result<Self, GfError> {
        let t = ctx.t as usize;
        let q = ctx.q;
        if a.dim() + v.dim() != t {
            return Err(GfError::DimensionOutOfRange {
                ell: v.dim() as u32,
                t: ctx.t,
            });
        }
        // columns = basis vectors; invert by Gauss-Jordan on [B | I]
        let joint: Vec<&FieldElement> = a.basis.iter().chain(&v.basis).collect();
        let mut aug: Vec<Vec<u32>> = (0..t)
            .map(|row| {
                let mut r: Vec<u32> = joint.iter().map(|b| b.coeffs[row]).collect();
                r.extend((0..t).map(|c| (c == row) as u32));
                r
            })
            .collect();
        for col in 0..t {
            let p = (col..t)
                .find(|&r| aug[r][col] != 0)
                .ok_or(GfError::DimensionOutOfRange {
                    ell: v.dim() as u32,
                    t: ctx.t,
                })?;
            aug.swap(col, p);
            let inv = mod_inv(aug[col][col], q);
            for c in aug[col].iter_mut() {
                *c = *c * inv % q;
            }
            for r in 0..t {
                if r != col && aug[r][col] != 0 {
                    let f = aug[r][col];
                    let pr = aug[col].clone();
                    for (c, &pv) in aug[r].iter_mut().zip(&pr) {
                        *c = (*c + q - f * pv % q) % q;
                    }
                }
            }
        }
        let inverse = aug.into_iter().map(|r| r[t..].to_vec()).collect();
        Ok(Self { a, v, inverse, q })
    }

    pub fn a(&self) -> &Subspace {
        &self.a
    }

    pub fn v(&self) -> &Subspace {
        &self.v
    }

    /// Unique `(a, w)` with `x = a + w`, `a ∈ A`, `w ∈ V`. O(t²).
    pub fn decompose(&self, x: &FieldElement) -> (FieldElement, FieldElement) {
        let q = self.q as u64;
        let coords: Vec<u32> = self
            .inverse
            .iter()
            .map(|row| {
                (row.iter()
                    .zip(&x.coeffs)
                    .map(|(&m, &c)| m as u64 * c as u64)
                    .sum::<u64>()
                    % q) as u32
            })
            .collect();
        let (ca, cv) = coords.split_at(self.a.dim());
        (self.a.combine(ca), self.v.combine(cv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn field_sizes() {
        assert_eq!(FieldCtx::new(2, 1).unwrap().enumerate().len(), 2);
        assert_eq!(FieldCtx::new(2, 3).unwrap().enumerate().len(), 8);
        assert_eq!(FieldCtx::new(3, 2).unwrap().size(), 9);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldCtx::new(4, 2), Err(GfError::NotPrime(4)));
        assert_eq!(FieldCtx::new(2, 0), Err(GfError::ZeroDegree));
        assert_eq!(FieldCtx::new(2, 13), Err(GfError::CapExceeded { q: 2, t: 13 }));
        assert!(FieldCtx::new(2, 12).is_ok());
    }

    #[test]
    fn smallest_irreducible_moduli() {
        // x^2+x+1, x^3+x+1, x^2+1 over F_3, x^4+x+1
        assert_eq!(FieldCtx::new(2, 2).unwrap().modulus_poly(), vec![1, 1, 1]);
        assert_eq!(FieldCtx::new(2, 3).unwrap().modulus_poly(), vec![1, 1, 0, 1]);
        assert_eq!(FieldCtx::new(3, 2).unwrap().modulus_poly(), vec![1, 0, 1]);
        assert_eq!(FieldCtx::new(2, 4).unwrap().modulus_poly(), vec![1, 1, 0, 0, 1]);
        assert_eq!(FieldCtx::new(5, 1).unwrap().modulus_poly(), vec![0, 1]);
    }

    #[test]
    fn characteristic_two() {
        let f = FieldCtx::new(2, 3).unwrap();
        for a in f.enumerate() {
            assert!(f.add(&a, &a).unwrap().is_zero());
        }
    }

    #[test]
    fn inverse_law_and_orders() {
        let f = FieldCtx::new(3, 2).unwrap();
        for a in f.enumerate().into_iter().skip(1) {
            let inv = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &inv).unwrap(), f.one());
            assert_eq!(8 % f.order(&a).unwrap(), 0);
        }
        assert_eq!(f.inv(&f.zero()), Err(GfError::ZeroInverse));
    }

    #[test]
    fn mixed_contexts_rejected() {
        let f4 = FieldCtx::new(2, 2).unwrap();
        let f8 = FieldCtx::new(2, 3).unwrap();
        let a = f8.one();
        assert!(matches!(f4.add(&f4.one(), &a), Err(GfError::MixedContext { .. })));
        let f9 = FieldCtx::new(3, 2).unwrap();
        assert!(f4.mul(&f9.one(), &f4.one()).is_err());
    }

    #[test]
    fn enumeration_is_canonical() {
        let f = FieldCtx::new(3, 2).unwrap();
        let a = f.enumerate();
        assert_eq!(a, f.enumerate());
        assert!(a[0].is_zero());
        for (i, e) in a.iter().enumerate() {
            assert_eq!(e.index(), i);
        }
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 9);
    }

    #[test]
    fn coset_examples() {
        let f = FieldCtx::new(2, 3).unwrap();
        let (a, v) = f.complementary_subspaces(1).unwrap();
        assert_eq!((a.dim(), v.dim()), (2, 1));
        let zero_shift = f.coset_elements(&v, &f.zero()).unwrap();
        assert_eq!(zero_shift, v.elements(&f));
        let trivial = f.span(&[]).unwrap();
        let x = f.from_index(5);
        assert_eq!(f.coset_elements(&trivial, &x).unwrap(), vec![x.clone()]);
        let c = f.coset_elements(&v, &x).unwrap();
        assert_eq!(c.len(), 2);
        assert!(v.contains(&f.sub(&c[0], &c[1]).unwrap()));
    }

    #[test]
    fn canonical_echelon_form() {
        let f = FieldCtx::new(3, 3).unwrap();
        let x = f.from_index(5);
        let y = f.from_index(11);
        let s1 = f.span(&[x.clone(), y.clone()]).unwrap();
        let xy = f.add(&x, &y).unwrap();
        let s2 = f.span(&[f.scale(2, &y).unwrap(), xy, x.clone()]).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.size(), 9);
    }

    #[test]
    fn complementary_range() {
        let f = FieldCtx::new(2, 2).unwrap();
        let (a, v) = f.complementary_subspaces(1).unwrap();
        assert_eq!((a.dim(), v.dim()), (1, 1));
        assert!(f.complementary_subspaces(0).is_err());
        assert!(f.complementary_subspaces(2).is_err());
    }
}
