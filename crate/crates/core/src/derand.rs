//! Seed reuse: one public codeword carries the seed, followed by `N` modular
//! codewords that all use it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designs::FunctionalForm;
use crate::quantum::{
    check_distribution, holevo, renyi2_exp_with, DensityOperator, HermitianOperator, StateEnsemble, SupportSplit,
    Tolerances,
};
use crate::scalar::Real;
use crate::wiretap::{
    build_modular_family, eaves_states, pgm_decoder, sigma_x, Code, CommonRandomnessCode, CqChannel, WiretapError,
};

/// Largest output dimension of a composite block.
pub const COMPOSITE_DIM_CAP: usize = 4096;
/// Largest number of encoder entries (messages × inputs) of a composite block.
pub const COMPOSITE_TABLE_CAP: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DerandError {
    #[error(transparent)]
    Wiretap(#[from] WiretapError),
    #[error("seed code has {0} messages but the modular family has {1} seeds")]
    SeedMismatch(usize, usize),
    #[error("composite {what} {size} exceeds cap {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("block count must be at least 1")]
    ZeroBlocks,
    #[error("{0} must lie strictly between 0 and 1")]
    OutOfRange(&'static str),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

#[derive(Clone, Debug)]
pub struct CompositeCode<T> {
    seed_code: Code<T>,
    family: CommonRandomnessCode<T>,
    blocks: usize,
}

/// Seed code followed by `blocks` modular codewords sharing its seed.
pub fn compose<T: Real>(
    seed_code: Code<T>,
    family: CommonRandomnessCode<T>,
    blocks: usize,
) -> Result<CompositeCode<T>, DerandError> {
    if blocks == 0 {
        return Err(DerandError::ZeroBlocks);
    }
    if seed_code.messages() != family.seeds() {
        return Err(DerandError::SeedMismatch(seed_code.messages(), family.seeds()));
    }
    let inner = family.code(0);
    let dim = checked_pow(inner.dim(), blocks)
        .and_then(|d| d.checked_mul(seed_code.dim()))
        .unwrap_or(usize::MAX);
    if dim > COMPOSITE_DIM_CAP {
        return Err(DerandError::SizeCap {
            what: "dimension",
            size: dim,
            cap: COMPOSITE_DIM_CAP,
        });
    }
    let table = checked_pow(inner.messages() * inner.inputs(), blocks)
        .and_then(|d| d.checked_mul(seed_code.inputs()))
        .unwrap_or(usize::MAX);
    if table > COMPOSITE_TABLE_CAP {
        return Err(DerandError::SizeCap {
            what: "encoder table",
            size: table,
            cap: COMPOSITE_TABLE_CAP,
        });
    }
    Ok(CompositeCode {
        seed_code,
        family,
        blocks,
    })
}

impl<T: Real> CompositeCode<T> {
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn seed_code(&self) -> &Code<T> {
        &self.seed_code
    }

    pub fn family(&self) -> &CommonRandomnessCode<T> {
        &self.family
    }

    /// `|A|^N`; message tuples are indexed with the first slot most significant.
    pub fn messages(&self) -> usize {
        self.family.messages().pow(self.blocks as u32)
    }

    /// Seed-code inputs times `|X|^N`, seed input most significant.
    pub fn inputs(&self) -> usize {
        self.seed_code.inputs() * self.family.code(0).inputs().pow(self.blocks as u32)
    }

    pub fn dim(&self) -> usize {
        self.seed_code.dim() * self.family.code(0).dim().pow(self.blocks as u32)
    }

    fn digits(mut idx: usize, base: usize, len: usize) -> Vec<usize> {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = idx % base;
            idx /= base;
        }
        out
    }

    /// `(1/|S|) Σ_s E^μ(x^μ|s) · Π_j E^s(x_j|α_j)` as a dense table.
    pub fn encoder(&self) -> Vec<Vec<T>> {
        let a = self.family.messages();
        let seeds = self.family.seeds();
        let w = T::one() / T::from_count(seeds);
        (0..self.messages())
            .map(|m| {
                let alphas = Self::digits(m, a, self.blocks);
                let mut row = vec![T::zero(); self.inputs()];
                for s in 0..seeds {
                    // distribution over x₁…x_N for this seed, built slot by slot
                    let mut tail = vec![T::one()];
                    for &alpha in &alphas {
                        let e = &self.family.code(s).encoder()[alpha];
                        tail = tail.iter().flat_map(|&p| e.iter().map(move |&q| p * q)).collect();
                    }
                    for (xm, &ps) in self.seed_code.encoder()[s].iter().enumerate() {
                        if ps.is_zero() {
                            continue;
                        }
                        let base = xm * tail.len();
                        for (i, &pt) in tail.iter().enumerate() {
                            row[base + i] += w * ps * pt;
                        }
                    }
                }
                row
            })
            .collect()
    }

    /// `Σ_s G^μ_s ⊗ ⊗_j G^s_{α_j}`.
    pub fn decoder(&self) -> Vec<HermitianOperator<T>> {
        let a = self.family.messages();
        (0..self.messages())
            .map(|m| {
                let alphas = Self::digits(m, a, self.blocks);
                let mut total = HermitianOperator::zeros(self.dim());
                for s in 0..self.family.seeds() {
                    let mut g = self.seed_code.decoder()[s].clone();
                    for &alpha in &alphas {
                        g = g.kron(&self.family.code(s).decoder()[alpha]);
                    }
                    total = total.add(&g);
                }
                total
            })
            .collect()
    }

    /// Dense single-shot code on the composite block channel.
    pub fn to_code(&self, tol: &Tolerances) -> Result<Code<T>, DerandError> {
        Ok(Code::new(self.encoder(), self.decoder(), tol)?)
    }

    /// Eavesdropper's state for one slot with the seed codeword kept and the
    /// other slots traced out: `(1/|S|) Σ_s V^μ(s) ⊗ Z_s(α)`.
    pub fn slot_states(
        &self,
        seed_eaves: &CqChannel<T>,
        form: &FunctionalForm,
        eaves: &CqChannel<T>,
    ) -> Result<StateEnsemble<T>, DerandError> {
        let seeds = self.family.seeds();
        let w = T::one() / T::from_count(seeds);
        let per_seed: Vec<(DensityOperator<T>, Vec<DensityOperator<T>>)> = (0..seeds)
            .map(|s| {
                let vs = self.seed_code.output_state(s, seed_eaves);
                eaves_states(form, eaves, s).map(|e| (vs, e.states().to_vec()))
            })
            .collect::<Result<_, _>>()?;
        let dim = seed_eaves.dim() * eaves.dim();
        let states = (0..self.family.messages())
            .map(|alpha| {
                let parts: Vec<DensityOperator<T>> = per_seed.iter().map(|(vs, z)| vs.tensor(&z[alpha])).collect();
                DensityOperator::mixture(dim, parts.iter().map(|p| (w, p)))
            })
            .collect();
        Ok(StateEnsemble::new(states).map_err(WiretapError::from)?)
    }

    /// Holevo leakage of one slot under message distribution `dist`, bits.
    pub fn slot_leakage(
        &self,
        seed_eaves: &CqChannel<T>,
        form: &FunctionalForm,
        eaves: &CqChannel<T>,
        dist: &[T],
        tol: &Tolerances,
    ) -> Result<T, DerandError> {
        let ens = self.slot_states(seed_eaves, form, eaves)?;
        Ok(holevo(dist, &ens, tol).map_err(WiretapError::from)?)
    }
}

/// `W^μ ⊗ W^{⊗N}` with `seed_channel` standing for `W^μ`.
pub fn composite_channel<T: Real>(seed_channel: &CqChannel<T>, channel: &CqChannel<T>, blocks: usize) -> CqChannel<T> {
    (0..blocks).fold(seed_channel.clone(), |acc, _| acc.tensor(channel))
}

/// `W^{⊗μ}`.
pub fn power_channel<T: Real>(channel: &CqChannel<T>, uses: usize) -> CqChannel<T> {
    (1..uses.max(1)).fold(channel.clone(), |acc, _| acc.tensor(channel))
}

/// Smallest `μ ≥ 1` with `inputs^μ ≥ seeds`.
pub fn seed_uses(inputs: usize, seeds: usize) -> usize {
    let mut mu = 1;
    let mut size = inputs.max(2);
    while size < seeds {
        size = size.saturating_mul(inputs.max(2));
        mu += 1;
    }
    mu
}

/// Seed code over `W^{⊗μ}`: seed `s` sent as the `s`-th input tuple, PGM decoder.
///
/// Returns the code together with the `μ`-fold channel it is defined on.
pub fn pgm_seed_code<T: Real>(
    channel: &CqChannel<T>,
    seeds: usize,
    tol: &Tolerances,
) -> Result<(Code<T>, CqChannel<T>), DerandError> {
    let mu = seed_uses(channel.inputs(), seeds);
    let dim = checked_pow(channel.dim(), mu).unwrap_or(usize::MAX);
    if dim > COMPOSITE_DIM_CAP {
        return Err(DerandError::SizeCap {
            what: "seed-code dimension",
            size: dim,
            cap: COMPOSITE_DIM_CAP,
        });
    }
    let power = power_channel(channel, mu);
    let codewords: Vec<usize> = (0..seeds).collect();
    let decoder = pgm_decoder(&power, &codewords, tol);
    let code = Code::deterministic(power.inputs(), &codewords, decoder, tol)?;
    Ok((code, power))
}

/// Modular family over a public code, composed with a seed code.
pub fn compose_with_public<T: Real>(
    seed_code: Code<T>,
    public: &Code<T>,
    form: &FunctionalForm,
    blocks: usize,
) -> Result<CompositeCode<T>, DerandError> {
    let family = build_modular_family(public, form)?;
    compose(seed_code, family, blocks)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// `J_n`
    pub points: usize,
    /// `|A_n|`
    pub messages: usize,
    pub seeds: usize,
    pub n: usize,
    pub mu: usize,
    pub blocks: usize,
    /// `log₂|A_n| · N / (μ + nN)`
    pub message_rate: f64,
    /// `(log₂ J_n − log₂|A_n|) / n`
    pub rate_loss: f64,
    /// `log₂|S|`
    pub seed_bits: f64,
    /// `(t − ℓ)/t` for the finite-field mosaic.
    pub message_fraction: Option<f64>,
    /// `log₂ C`, an upper bound on each slot's leakage (per-slot marginal, seed averaged).
    pub slot_leakage_bound: Option<f64>,
}

pub fn rate_report(form: &FunctionalForm, n: usize, mu: usize, blocks: usize) -> Result<RateReport, DerandError> {
    if n == 0 {
        return Err(DerandError::NonPositive("n"));
    }
    if blocks == 0 {
        return Err(DerandError::ZeroBlocks);
    }
    Ok(rate_report_counts(
        form.points(),
        form.colors(),
        form.seeds(),
        n,
        mu,
        blocks,
    ))
}

/// Rate identities from sizes alone.
pub fn rate_report_counts(
    points: usize,
    messages: usize,
    seeds: usize,
    n: usize,
    mu: usize,
    blocks: usize,
) -> RateReport {
    let a_bits = (messages as f64).log2();
    RateReport {
        points,
        messages,
        seeds,
        n,
        mu,
        blocks,
        message_rate: a_bits * blocks as f64 / (mu + n * blocks) as f64,
        rate_loss: ((points as f64).log2() - a_bits) / n as f64,
        seed_bits: (seeds as f64).log2(),
        message_fraction: None,
        slot_leakage_bound: None,
    }
}

/// `max(2, ⌊min(pe, ε)^{-1/2}⌋)`.
pub fn choose_block_count(pe: f64, eps_leak: f64) -> Result<usize, DerandError> {
    if !(pe > 0.0 && pe < 1.0) {
        return Err(DerandError::OutOfRange("public error"));
    }
    if !(eps_leak > 0.0 && eps_leak < 1.0) {
        return Err(DerandError::OutOfRange("leakage"));
    }
    let raw = 1.0 / pe.min(eps_leak).sqrt();
    // absorb rounding in sqrt of exact squares such as 1e-4
    let n = (raw * (1.0 + 1e-12)).floor();
    Ok((n as usize).max(2))
}

/// `Σ_x 2^{D₂(V(x)‖σ_X)}`.
pub fn renyi2_point_sum<T: Real>(channel: &CqChannel<T>, tol: &Tolerances) -> T {
    let sigma = sigma_x(channel);
    let pinv = SupportSplit::new(sigma.matrix(), tol).pinv();
    channel
        .states()
        .iter()
        .map(|s| renyi2_exp_with(s.matrix(), &pinv))
        .sum()
}

/// Smallest `ℓ ∈ [1, t)` with `q^ℓ ≥ Σ_x 2^{D₂(V(x)‖σ_X)} + slack`, if any.
pub fn suggest_block_size<T: Real>(
    q: u32,
    t: u32,
    channel: &CqChannel<T>,
    slack: f64,
    tol: &Tolerances,
) -> Result<Option<u32>, DerandError> {
    let v = checked_pow(q as usize, t as usize).unwrap_or(usize::MAX);
    if channel.inputs() != v {
        return Err(WiretapError::AlphabetMismatch(v, channel.inputs()).into());
    }
    let target = renyi2_point_sum(channel, tol).to_f64_lossy() + slack;
    Ok((1..t).find(|&l| (q as f64).powi(l as i32) >= target))
}

/// `χ(A; W) − D₂(V(A) ‖ σ_X)` with `V(A) = Σ_x A(x) V(x)`.
pub fn secrecy_rate_expression<T: Real>(
    legit: &CqChannel<T>,
    eaves: &CqChannel<T>,
    dist: &[T],
    tol: &Tolerances,
) -> Result<T, DerandError> {
    if legit.inputs() != eaves.inputs() {
        return Err(WiretapError::AlphabetMismatch(legit.inputs(), eaves.inputs()).into());
    }
    check_distribution(dist, legit.inputs(), tol).map_err(WiretapError::from)?;
    let ens = StateEnsemble::new(legit.states().to_vec()).map_err(WiretapError::from)?;
    let chi = holevo(dist, &ens, tol).map_err(WiretapError::from)?;
    let va = DensityOperator::mixture(eaves.dim(), dist.iter().copied().zip(eaves.states()));
    let sigma = sigma_x(eaves);
    let split = SupportSplit::new(sigma.matrix(), tol);
    let d2 = renyi2_exp_with(va.matrix(), &split.pinv()).log2();
    Ok(chi - d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::mosaic_from_function;
    use crate::mosaic_build::Ex2Mosaic;
    use crate::wiretap::{avg_error, max_error, pgm_public_code, SecurityFunction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn latin2() -> FunctionalForm {
        mosaic_from_function(2, 2, vec!["0".into(), "1".into()], |s, x| x ^ s)
            .unwrap()
            .functional_form()
            .unwrap()
    }

    fn noiseless(n: usize) -> CqChannel<f64> {
        CqChannel::from_states((0..n).map(|i| DensityOperator::basis(n, i)).collect()).unwrap()
    }

    #[test]
    fn noiseless_single_block_has_zero_error() {
        let form = latin2();
        let w = noiseless(2);
        let (seed_code, seed_ch) = pgm_seed_code(&w, 2, &tol()).unwrap();
        let public = pgm_public_code(&w, &tol());
        let comp = compose_with_public(seed_code, &public, &form, 1).unwrap();
        let code = comp.to_code(&tol()).unwrap();
        let ch = composite_channel(&seed_ch, &w, 1);
        assert!(avg_error(&code, &ch).unwrap() < 1e-12);
        for row in comp.encoder() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn composite_error_union_bound() {
        let form = latin2();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = CqChannel::<f64>::random(2, 2, &mut rng);
        let (seed_code, seed_ch) = pgm_seed_code(&w, 2, &tol()).unwrap();
        let seed_err = avg_error(&seed_code, &seed_ch).unwrap();
        let public = pgm_public_code(&w, &tol());
        let family = build_modular_family(&public, &form).unwrap();
        let worst = family
            .codes()
            .iter()
            .map(|c| avg_error(c, &w).unwrap())
            .fold(0.0, f64::max);
        let comp = compose(seed_code, family, 2).unwrap();
        let code = comp.to_code(&tol()).unwrap();
        let err = avg_error(&code, &composite_channel(&seed_ch, &w, 2)).unwrap();
        assert!(err <= seed_err + 2.0 * worst + 1e-9, "{err} {seed_err} {worst}");
        assert!(max_error(&code, &composite_channel(&seed_ch, &w, 2)).unwrap() >= err - 1e-12);
    }

    #[test]
    fn slot_leakage_within_bound() {
        let ex = Ex2Mosaic::build(2, 2, 1).unwrap();
        let sf = SecurityFunction::from_mosaic(&ex.mosaic().unwrap(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = CqChannel::<f64>::random(4, 2, &mut rng);
        let v = CqChannel::<f64>::random(4, 2, &mut rng);
        let (seed_code, _) = pgm_seed_code(&w, sf.form().seeds(), &tol()).unwrap();
        let seed_v = power_channel(&v, seed_uses(4, sf.form().seeds()));
        let public = pgm_public_code(&w, &tol());
        let comp = compose_with_public(seed_code, &public, sf.form(), 1).unwrap();
        let bound = sf.bound(&v, &tol()).unwrap().log2();
        for d in [[0.5, 0.5], [0.9, 0.1], [1.0, 0.0]] {
            let chi = comp.slot_leakage(&seed_v, sf.form(), &v, &d, &tol()).unwrap();
            assert!(chi <= bound + 1e-7);
        }
    }

    #[test]
    fn compose_errors() {
        let form = latin2();
        let w = noiseless(2);
        let public = pgm_public_code(&w, &tol());
        let family = build_modular_family(&public, &form).unwrap();
        let (seed3, _) = pgm_seed_code(&noiseless(3), 3, &tol()).unwrap();
        assert_eq!(
            compose(seed3, family.clone(), 1).unwrap_err(),
            DerandError::SeedMismatch(3, 2)
        );
        let (seed, _) = pgm_seed_code(&w, 2, &tol()).unwrap();
        assert_eq!(
            compose(seed.clone(), family.clone(), 0).unwrap_err(),
            DerandError::ZeroBlocks
        );
        assert!(matches!(compose(seed, family, 12), Err(DerandError::SizeCap { .. })));
    }

    #[test]
    fn rate_examples() {
        let ex = Ex2Mosaic::build(2, 2, 1).unwrap();
        let form = ex.mosaic().unwrap().functional_form().unwrap();
        let r = rate_report(&form, 1, 3, 1).unwrap();
        assert_eq!((r.points, r.messages), (4, 2));
        assert_eq!(r.rate_loss, 1.0);
        assert_eq!(r.points / ex.expected_params().k, r.messages);
        let mut last = 0.0;
        for n_blocks in 1..20 {
            let rate = rate_report(&form, 1, 3, n_blocks).unwrap().message_rate;
            assert!(rate > last);
            last = rate;
        }
        assert!(last < 1.0);
    }

    #[test]
    fn block_count_examples() {
        assert_eq!(choose_block_count(1e-4, 1e-4).unwrap(), 100);
        assert_eq!(choose_block_count(0.25, 0.5).unwrap(), 2);
        assert!(choose_block_count(1e-6, 0.1).unwrap() >= choose_block_count(1e-2, 0.1).unwrap());
        assert!(choose_block_count(0.0, 0.1).is_err());
        assert!(choose_block_count(0.5, 1.0).is_err());
    }

    #[test]
    fn block_size_for_constant_channel() {
        let v = CqChannel::constant(8, DensityOperator::<f64>::maximally_mixed(2));
        // Σ_x 2^{D₂} = 8 for a constant channel
        assert_eq!(suggest_block_size(2, 3, &v, 0.0, &tol()).unwrap(), None);
        let v = CqChannel::constant(16, DensityOperator::<f64>::maximally_mixed(2));
        assert_eq!(suggest_block_size(2, 4, &v, 0.0, &tol()).unwrap(), None);
        let v = CqChannel::constant(4, DensityOperator::<f64>::maximally_mixed(2));
        assert_eq!(suggest_block_size(2, 2, &v, -2.5, &tol()).unwrap(), Some(1));
    }

    #[test]
    fn secrecy_expression_examples() {
        let w = noiseless(2);
        let v = CqChannel::constant(2, DensityOperator::<f64>::maximally_mixed(2));
        let val = secrecy_rate_expression(&w, &v, &[0.5, 0.5], &tol()).unwrap();
        assert!((val - 1.0).abs() < 1e-12);
        let val = secrecy_rate_expression(&w, &w, &[0.5, 0.5], &tol()).unwrap();
        assert!((val - 1.0).abs() < 1e-12);
        let val = secrecy_rate_expression(&w, &w, &[1.0, 0.0], &tol()).unwrap();
        assert!((val + 1.0).abs() < 1e-12);
    }
}
