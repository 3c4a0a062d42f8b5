//! Finite-field mosaic of BIBDs.
//!
//! Points are the elements of GF(q^t), seeds are pairs `(s₁, s₂)` with
//! `s₁ ≠ 0` and `s₂` in the message subspace `A`, and
//! `f(s, x)` is the `A`-component of `s₁x + s₂` in the decomposition
//! `GF(q^t) = A ⊕ V`. Each color class is a `(q^t, q^ℓ, q^ℓ − 1)` BIBD.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designs::{mosaic_from_function, BibdParams, DesignError, Mosaic};
use crate::gf::{DirectSum, FieldCtx, FieldElement, GfError, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("seed component s1 must be nonzero")]
    ZeroSeed,
    #[error("seed component s2 is not in the message subspace")]
    SeedOutsideMessageSpace,
    #[error("color is not in the message subspace")]
    ColorOutsideMessageSpace,
}

/// Seed `(s₁, s₂)` with `s₁ ∈ GF(q^t)*` and `s₂ ∈ A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeedValue {
    pub s1: FieldElement,
    pub s2: FieldElement,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed_bits: f64,
    pub point_bits: f64,
    pub message_fraction: f64,
    /// `|seed_bits − (1 + message_fraction) · point_bits|`
    pub approximation_gap: f64,
}

#[derive(Clone, Debug)]
pub struct Ex2Mosaic {
    ctx: FieldCtx,
    ell: u32,
    split: DirectSum,
    points: Vec<FieldElement>,
    colors: Vec<FieldElement>,
    seeds: Vec<SeedValue>,
    color_index: HashMap<FieldElement, usize>,
}

impl Ex2Mosaic {
    pub fn build(q: u32, t: u32, ell: u32) -> Result<Self, BuildError> {
        let ctx = FieldCtx::new(q, t)?;
        let (a_sub, v_sub) = ctx.complementary_subspaces(ell)?;
        let split = DirectSum::new(&ctx, a_sub, v_sub)?;
        let points = ctx.enumerate();
        let colors = split.a().elements(&ctx);
        let color_index = colors.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        let seeds = points
            .iter()
            .filter(|x| !x.is_zero())
            .flat_map(|s1| {
                colors.iter().map(move |s2| SeedValue {
                    s1: s1.clone(),
                    s2: s2.clone(),
                })
            })
            .collect();
        Ok(Self {
            ctx,
            ell,
            split,
            points,
            colors,
            seeds,
            color_index,
        })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn message_space(&self) -> &Subspace {
        self.split.a()
    }

    pub fn masking_space(&self) -> &Subspace {
        self.split.v()
    }

    /// Point set `X = GF(q^t)` in canonical order.
    pub fn points(&self) -> &[FieldElement] {
        &self.points
    }

    /// Colors (elements of `A`) in subspace-coordinate order.
    pub fn colors(&self) -> &[FieldElement] {
        &self.colors
    }

    /// Seeds ordered by `s₁` (canonical, nonzero) then `s₂`.
    pub fn seeds(&self) -> &[SeedValue] {
        &self.seeds
    }

    pub fn color_position(&self, alpha: &FieldElement) -> Option<usize> {
        self.color_index.get(alpha).copied()
    }

    fn check_seed(&self, s: &SeedValue) -> Result<(), BuildError> {
        if !self.ctx.contains(&s.s1) || !self.ctx.contains(&s.s2) {
            return Err(GfError::MixedContext {
                q: self.ctx.q(),
                t: self.ctx.t(),
            }
            .into());
        }
        if s.s1.is_zero() {
            return Err(BuildError::ZeroSeed);
        }
        if !self.split.a().contains(&s.s2) {
            return Err(BuildError::SeedOutsideMessageSpace);
        }
        Ok(())
    }

    /// `f(s, x)`: the `A`-component of `s₁x + s₂`.
    pub fn f_eval(&self, s: &SeedValue, x: &FieldElement) -> Result<FieldElement, BuildError> {
        self.check_seed(s)?;
        let y = self.ctx.add(&self.ctx.mul(&s.s1, x)?, &s.s2)?;
        Ok(self.split.decompose(&y).0)
    }

    /// Color index of `f(seeds[s], points[x])`.
    pub fn f_index(&self, s: usize, x: usize) -> usize {
        let seed = &self.seeds[s];
        let y = self
            .ctx
            .add_unchecked(&self.ctx.mul_unchecked(&seed.s1, &self.points[x]), &seed.s2);
        let (a, _) = self.split.decompose(&y);
        self.color_index[&a]
    }

    /// Preimage block `s₁⁻¹(α − s₂ + V)`, in `V`-coordinate order.
    pub fn preimage(&self, s: &SeedValue, alpha: &FieldElement) -> Result<Vec<FieldElement>, BuildError> {
        self.check_seed(s)?;
        if !self.ctx.contains(alpha) || !self.split.a().contains(alpha) {
            return Err(BuildError::ColorOutsideMessageSpace);
        }
        let inv = self.ctx.inv(&s.s1)?;
        let shift = self.ctx.sub(alpha, &s.s2)?;
        Ok(self
            .ctx
            .coset_elements(self.split.v(), &shift)?
            .iter()
            .map(|y| self.ctx.mul_unchecked(&inv, y))
            .collect())
    }

    /// Uniform draw from the preimage block of `α` under seed `s`.
    pub fn randomized_inverse<R: Rng + ?Sized>(
        &self,
        s: &SeedValue,
        alpha: &FieldElement,
        rng: &mut R,
    ) -> Result<FieldElement, BuildError> {
        self.check_seed(s)?;
        if !self.ctx.contains(alpha) || !self.split.a().contains(alpha) {
            return Err(BuildError::ColorOutsideMessageSpace);
        }
        let q = self.ctx.q();
        let coords: Vec<u32> = (0..self.split.v().dim()).map(|_| rng.random_range(0..q)).collect();
        let w = self.split.v().combine(&coords);
        let shift = self.ctx.sub(alpha, &s.s2)?;
        let y = self.ctx.add_unchecked(&shift, &w);
        let inv = self.ctx.inv(&s.s1)?;
        Ok(self.ctx.mul_unchecked(&inv, &y))
    }

    /// Parameters every member must have.
    pub fn expected_params(&self) -> BibdParams {
        let q = self.ctx.q() as usize;
        let t = self.ctx.t();
        let v = q.pow(t);
        let k = q.pow(self.ell);
        BibdParams {
            v,
            b: q.pow(t - self.ell) * (v - 1),
            k,
            r: v - 1,
            lambda: k - 1,
        }
    }

    /// Full mosaic by enumeration of `f` over `S × X`.
    pub fn mosaic(&self) -> Result<Mosaic, DesignError> {
        let labels = self.colors.iter().map(|c| c.to_string()).collect();
        mosaic_from_function(self.points.len(), self.seeds.len(), labels, |s, x| self.f_index(s, x))
    }

    pub fn seed_metrics(&self) -> SeedMetrics {
        let seed_bits = (self.seeds.len() as f64).log2();
        let point_bits = (self.points.len() as f64).log2();
        let t = self.ctx.t();
        let message_fraction = (t - self.ell) as f64 / t as f64;
        SeedMetrics {
            seed_bits,
            point_bits,
            message_fraction,
            approximation_gap: (seed_bits - (1.0 + message_fraction) * point_bits).abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_ranges() {
        assert!(Ex2Mosaic::build(2, 2, 2).is_err());
        assert!(Ex2Mosaic::build(2, 2, 0).is_err());
        assert!(Ex2Mosaic::build(4, 2, 1).is_err());
    }

    #[test]
    fn inverse_point_maps_to_color() {
        let m = Ex2Mosaic::build(2, 3, 1).unwrap();
        let ctx = m.ctx();
        for seed in m.seeds() {
            for alpha in m.colors() {
                let x = ctx
                    .mul(&ctx.inv(&seed.s1).unwrap(), &ctx.sub(alpha, &seed.s2).unwrap())
                    .unwrap();
                assert_eq!(&m.f_eval(seed, &x).unwrap(), alpha);
            }
        }
    }

    #[test]
    fn identity_seed_projects_onto_message_space() {
        let m = Ex2Mosaic::build(2, 2, 1).unwrap();
        let ctx = m.ctx();
        let seed = SeedValue {
            s1: ctx.one(),
            s2: ctx.zero(),
        };
        for x in m.points() {
            // A = span(x^0): the A-component keeps coordinate 0
            let expected = ctx.element(&[x.coeffs()[0], 0]).unwrap();
            assert_eq!(m.f_eval(&seed, x).unwrap(), expected);
        }
    }

    #[test]
    fn invalid_seeds_rejected() {
        let m = Ex2Mosaic::build(2, 2, 1).unwrap();
        let ctx = m.ctx();
        let zero = SeedValue {
            s1: ctx.zero(),
            s2: ctx.zero(),
        };
        assert_eq!(m.f_eval(&zero, &ctx.one()), Err(BuildError::ZeroSeed));
        let outside = SeedValue {
            s1: ctx.one(),
            s2: ctx.basis_vector(1),
        };
        assert_eq!(m.f_eval(&outside, &ctx.one()), Err(BuildError::SeedOutsideMessageSpace));
    }

    #[test]
    fn seeded_inverse_is_reproducible() {
        let m = Ex2Mosaic::build(2, 3, 2).unwrap();
        let seed = &m.seeds()[5];
        let alpha = &m.colors()[1];
        let draw = |rs: u64| -> Vec<FieldElement> {
            let mut rng = ChaCha8Rng::seed_from_u64(rs);
            (0..32)
                .map(|_| m.randomized_inverse(seed, alpha, &mut rng).unwrap())
                .collect()
        };
        assert_eq!(draw(1), draw(1));
        assert_ne!(draw(1), draw(2));
        for x in draw(3) {
            assert_eq!(&m.f_eval(seed, &x).unwrap(), alpha);
        }
    }

    #[test]
    fn seed_metric_examples() {
        let m = Ex2Mosaic::build(2, 2, 1).unwrap().seed_metrics();
        assert!((m.seed_bits - 6f64.log2()).abs() < 1e-12);
        assert_eq!(m.point_bits, 2.0);
        assert_eq!(m.message_fraction, 0.5);
        assert!((m.approximation_gap - (3.0 - 6f64.log2())).abs() < 1e-12);
        assert_eq!(Ex2Mosaic::build(2, 4, 2).unwrap().seeds().len(), 60);
        assert_eq!(
            Ex2Mosaic::build(3, 3, 1).unwrap().seed_metrics().message_fraction,
            2.0 / 3.0
        );
    }
}
