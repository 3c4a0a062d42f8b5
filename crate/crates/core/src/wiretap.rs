//! Classical-quantum wiretap channels, modular codes built from a mosaic's
//! functional form, and semantic-security leakage accounting.
//!
//! The leakage bound used throughout is
//!
//! ```text
//! C = (r−λ₁)/(k r v) · Σ_x 2^{D₂(V(x)‖σ_X)}
//!   + u(λ₁−λ₂)/(k r) · (1/m) Σ_i 2^{D₂(ū_i‖σ_X)}
//!   + v λ₂/(k r)
//! ```
//!
//! with `ū_i` the average output over point class `i`. It equals
//! `(1/|S|) Σ_s 2^{D₂(Z_s(α)‖σ_X)}` for every color `α`, is exactly 1 for a
//! constant channel and reduces to the BIBD closed form when `λ₁ = λ₂`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::designs::{
    verify_mosaic, BibdParams, ClassPartition, DesignError, DesignParams, FunctionalForm, GddParams, Mosaic,
};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::quantum::{
    check_distribution, holevo, renyi2_exp_with, shannon_bits, trace_norm, von_neumann_entropy, DensityOperator,
    HermitianOperator, QuantumError, StateEnsemble, SupportSplit, Tolerances,
};
use crate::scalar::Real;

/// Largest `|A|·|S|·d` for which the joint `ASZ` state is assembled.
pub const ASZ_DIM_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WiretapError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("alphabet mismatch: {0} vs {1} symbols")]
    AlphabetMismatch(usize, usize),
    #[error("output dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("preimage blocks do not have constant size")]
    NonConstantBlocks,
    #[error("encoder row {0} is not a probability distribution")]
    BadEncoder(usize),
    #[error("decoder element {0} is not positive semidefinite")]
    NegativePovmElement(usize),
    #[error("decoder elements sum to more than the identity (excess eigenvalue {0:e})")]
    PovmExceedsIdentity(f64),
    #[error("joint state dimension {0} exceeds cap {ASZ_DIM_CAP}")]
    SizeCap(usize),
    #[error("mosaic members do not share GDD/BIBD parameters: {0}")]
    NoBoundParameters(String),
    #[error("channel has no inputs")]
    EmptyChannel,
}

/// Map from a finite input alphabet to density operators of one dimension.
#[derive(Clone, Debug)]
pub struct CqChannel<T> {
    labels: Vec<String>,
    dim: usize,
    states: Vec<DensityOperator<T>>,
}

impl<T: Real> CqChannel<T> {
    pub fn new(labels: Vec<String>, states: Vec<DensityOperator<T>>) -> Result<Self, WiretapError> {
        let dim = states.first().ok_or(WiretapError::EmptyChannel)?.dim();
        if labels.len() != states.len() {
            return Err(WiretapError::AlphabetMismatch(labels.len(), states.len()));
        }
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(WiretapError::DimensionMismatch(dim, s.dim()));
        }
        Ok(Self { labels, dim, states })
    }

    /// Inputs labelled `0..n`.
    pub fn from_states(states: Vec<DensityOperator<T>>) -> Result<Self, WiretapError> {
        let labels = (0..states.len()).map(|i| i.to_string()).collect();
        Self::new(labels, states)
    }

    pub fn constant(inputs: usize, state: DensityOperator<T>) -> Self {
        Self {
            labels: (0..inputs).map(|i| i.to_string()).collect(),
            dim: state.dim(),
            states: vec![state; inputs],
        }
    }

    /// Independent random full-rank outputs.
    pub fn random<R: Rng + ?Sized>(inputs: usize, dim: usize, rng: &mut R) -> Self
    where
        StandardNormal: Distribution<T>,
    {
        let states = (0..inputs).map(|_| DensityOperator::random(dim, rng)).collect();
        Self::from_states(states).expect("nonempty")
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn inputs(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[DensityOperator<T>] {
        &self.states
    }

    pub fn output(&self, x: usize) -> &DensityOperator<T> {
        &self.states[x]
    }

    /// Channel on tuples: input `(x₁,…,x_n)` ↦ `W(x₁) ⊗ … ⊗ W(x_n)`, first slot most significant.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut labels = Vec::with_capacity(self.inputs() * other.inputs());
        let mut states = Vec::with_capacity(self.inputs() * other.inputs());
        for (la, a) in self.labels.iter().zip(&self.states) {
            for (lb, b) in other.labels.iter().zip(&other.states) {
                labels.push(format!("{la}.{lb}"));
                states.push(a.tensor(b));
            }
        }
        Self {
            labels,
            dim: self.dim * other.dim,
            states,
        }
    }
}

/// Legitimate channel `W` and eavesdropper channel `V` on one alphabet.
#[derive(Clone, Debug)]
pub struct WiretapPair<T> {
    pub legit: CqChannel<T>,
    pub eaves: CqChannel<T>,
}

impl<T: Real> WiretapPair<T> {
    pub fn new(legit: CqChannel<T>, eaves: CqChannel<T>) -> Result<Self, WiretapError> {
        if legit.inputs() != eaves.inputs() {
            return Err(WiretapError::AlphabetMismatch(legit.inputs(), eaves.inputs()));
        }
        Ok(Self { legit, eaves })
    }
}

/// Stochastic encoder plus a (sub-normalized) POVM decoder.
///
/// Any deficit `I − Σ G_α` is the implicit failure outcome.
#[derive(Clone, Debug)]
pub struct Code<T> {
    /// `encoder[α][x] = E(x | α)`
    encoder: Vec<Vec<T>>,
    decoder: Vec<HermitianOperator<T>>,
    dim: usize,
}

impl<T: Real> Code<T> {
    pub fn new(
        encoder: Vec<Vec<T>>,
        decoder: Vec<HermitianOperator<T>>,
        tol: &Tolerances,
    ) -> Result<Self, WiretapError> {
        if encoder.len() != decoder.len() {
            return Err(WiretapError::AlphabetMismatch(encoder.len(), decoder.len()));
        }
        let inputs = encoder.first().map_or(0, Vec::len);
        for (i, row) in encoder.iter().enumerate() {
            if check_distribution(row, inputs, tol).is_err() {
                return Err(WiretapError::BadEncoder(i));
            }
        }
        let dim = decoder.first().map_or(0, HermitianOperator::dim);
        let mut total = HermitianOperator::zeros(dim);
        for (i, g) in decoder.iter().enumerate() {
            if g.dim() != dim {
                return Err(WiretapError::DimensionMismatch(dim, g.dim()));
            }
            if g.min_eigenvalue().to_f64_lossy() < -tol.povm {
                return Err(WiretapError::NegativePovmElement(i));
            }
            total = total.add(g);
        }
        let excess = HermitianOperator::identity(dim)
            .sub(&total)
            .min_eigenvalue()
            .to_f64_lossy();
        if excess < -tol.povm {
            return Err(WiretapError::PovmExceedsIdentity(-excess));
        }
        Ok(Self { encoder, decoder, dim })
    }

    /// Assembled from parts that are valid by construction.
    pub(crate) fn from_parts(encoder: Vec<Vec<T>>, decoder: Vec<HermitianOperator<T>>, dim: usize) -> Self {
        Self { encoder, decoder, dim }
    }

    /// Message `i` is sent as input `codewords[i]` with certainty.
    pub fn deterministic(
        inputs: usize,
        codewords: &[usize],
        decoder: Vec<HermitianOperator<T>>,
        tol: &Tolerances,
    ) -> Result<Self, WiretapError> {
        let encoder = codewords
            .iter()
            .map(|&c| (0..inputs).map(|x| if x == c { T::one() } else { T::zero() }).collect())
            .collect();
        Self::new(encoder, decoder, tol)
    }

    pub fn messages(&self) -> usize {
        self.encoder.len()
    }

    pub fn inputs(&self) -> usize {
        self.encoder.first().map_or(0, Vec::len)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn encoder(&self) -> &[Vec<T>] {
        &self.encoder
    }

    pub fn decoder(&self) -> &[HermitianOperator<T>] {
        &self.decoder
    }

    /// `I − Σ_α G_α`.
    pub fn failure_element(&self) -> HermitianOperator<T> {
        self.decoder
            .iter()
            .fold(HermitianOperator::identity(self.dim), |acc, g| acc.sub(g))
    }

    /// Output state of message `α` through `channel`: `Σ_x E(x|α) W(x)`.
    pub fn output_state(&self, alpha: usize, channel: &CqChannel<T>) -> DensityOperator<T> {
        DensityOperator::mixture(channel.dim(), self.encoder[alpha].iter().copied().zip(channel.states()))
    }

    /// Success probability `Σ_x E(x|α) tr(W(x) G_α)` per message.
    pub fn success_probabilities(&self, channel: &CqChannel<T>) -> Result<Vec<T>, WiretapError> {
        if channel.inputs() != self.inputs() {
            return Err(WiretapError::AlphabetMismatch(self.inputs(), channel.inputs()));
        }
        if channel.dim() != self.dim {
            return Err(WiretapError::DimensionMismatch(self.dim, channel.dim()));
        }
        Ok((0..self.messages())
            .map(|a| {
                let g = &self.decoder[a];
                self.encoder[a]
                    .iter()
                    .zip(channel.states())
                    .filter(|(p, _)| !p.is_zero())
                    .map(|(&p, w)| p * g.trace_with(w.matrix()))
                    .sum()
            })
            .collect())
    }
}

/// One code per seed value, all on the same message set.
#[derive(Clone, Debug)]
pub struct CommonRandomnessCode<T> {
    codes: Vec<Code<T>>,
}

impl<T: Real> CommonRandomnessCode<T> {
    pub fn new(codes: Vec<Code<T>>) -> Result<Self, WiretapError> {
        let first = codes.first().ok_or(WiretapError::EmptyChannel)?;
        let (msgs, inputs) = (first.messages(), first.inputs());
        for c in &codes {
            if c.messages() != msgs {
                return Err(WiretapError::AlphabetMismatch(msgs, c.messages()));
            }
            if c.inputs() != inputs {
                return Err(WiretapError::AlphabetMismatch(inputs, c.inputs()));
            }
        }
        Ok(Self { codes })
    }

    pub fn seeds(&self) -> usize {
        self.codes.len()
    }

    pub fn messages(&self) -> usize {
        self.codes[0].messages()
    }

    pub fn code(&self, s: usize) -> &Code<T> {
        &self.codes[s]
    }

    pub fn codes(&self) -> &[Code<T>] {
        &self.codes
    }
}

/// `1 − (1/J) Σ_α P(success | α)`.
pub fn avg_error<T: Real>(code: &Code<T>, channel: &CqChannel<T>) -> Result<T, WiretapError> {
    let succ = code.success_probabilities(channel)?;
    let mean = succ.iter().copied().sum::<T>() / T::from_count(succ.len());
    Ok((T::one() - mean).max(T::zero()).min(T::one()))
}

/// `1 − min_α P(success | α)`.
pub fn max_error<T: Real>(code: &Code<T>, channel: &CqChannel<T>) -> Result<T, WiretapError> {
    let succ = code.success_probabilities(channel)?;
    let worst = succ.iter().copied().fold(T::infinity(), T::min);
    Ok((T::one() - worst).max(T::zero()).min(T::one()))
}

/// Pretty-good measurement `G_x = S^{-1/2} W(x) S^{-1/2}`, `S = Σ_x W(x)` over the codewords.
pub fn pgm_decoder<T: Real>(
    channel: &CqChannel<T>,
    codewords: &[usize],
    tol: &Tolerances,
) -> Vec<HermitianOperator<T>> {
    let d = channel.dim();
    let mut total = CMatrix::zeros(d);
    for &c in codewords {
        total.add_scaled(T::one(), channel.output(c).matrix());
    }
    let root = SupportSplit::new(&total, tol).pinv_sqrt();
    codewords
        .iter()
        .map(|&c| {
            let g = &(&root * channel.output(c).matrix()) * &root;
            HermitianOperator::from_hermitian(g)
        })
        .collect()
}

/// Reliable public code over all inputs: identity encoder and PGM decoder.
pub fn pgm_public_code<T: Real>(channel: &CqChannel<T>, tol: &Tolerances) -> Code<T> {
    let n = channel.inputs();
    let codewords: Vec<usize> = (0..n).collect();
    let decoder = pgm_decoder(channel, &codewords, tol);
    let encoder = (0..n)
        .map(|i| (0..n).map(|x| if x == i { T::one() } else { T::zero() }).collect())
        .collect();
    Code::from_parts(encoder, decoder, channel.dim())
}

/// Modular code for seed `s`: uniform encoding over the preimage block of α
/// composed with the public encoder; decoder elements grouped by color.
pub fn build_modular_code<T: Real>(public: &Code<T>, form: &FunctionalForm, s: usize) -> Result<Code<T>, WiretapError> {
    if public.messages() != form.points() {
        return Err(WiretapError::AlphabetMismatch(public.messages(), form.points()));
    }
    let blocks = form.preimages(s);
    let inputs = public.inputs();
    let mut encoder = Vec::with_capacity(blocks.len());
    let mut decoder = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let w = T::one() / T::from_count(block.len());
        let mut row = vec![T::zero(); inputs];
        let mut g = HermitianOperator::zeros(public.dim());
        for &x in block {
            for (r, &e) in row.iter_mut().zip(&public.encoder()[x]) {
                *r += w * e;
            }
            g = g.add(&public.decoder()[x]);
        }
        encoder.push(row);
        decoder.push(g);
    }
    Ok(Code::from_parts(encoder, decoder, public.dim()))
}

/// Modular codes for every seed.
pub fn build_modular_family<T: Real>(
    public: &Code<T>,
    form: &FunctionalForm,
) -> Result<CommonRandomnessCode<T>, WiretapError> {
    let codes = (0..form.seeds())
        .map(|s| build_modular_code(public, form, s))
        .collect::<Result<Vec<_>, _>>()?;
    CommonRandomnessCode::new(codes)
}

/// Uniform average output `σ_X = (1/v) Σ_x V(x)`.
pub fn sigma_x<T: Real>(channel: &CqChannel<T>) -> DensityOperator<T> {
    let w = T::one() / T::from_count(channel.inputs());
    DensityOperator::mixture(channel.dim(), channel.states().iter().map(|s| (w, s)))
}

/// Common preimage block size `k`, or an error if blocks differ in size.
pub fn block_size(form: &FunctionalForm) -> Result<usize, WiretapError> {
    let mut k = None;
    for s in 0..form.seeds() {
        for b in form.preimages(s) {
            match k {
                None => k = Some(b.len()),
                Some(kk) if kk != b.len() => return Err(WiretapError::NonConstantBlocks),
                _ => {}
            }
        }
    }
    k.filter(|&k| k > 0).ok_or(WiretapError::NonConstantBlocks)
}

fn check_alphabet<T: Real>(form: &FunctionalForm, channel: &CqChannel<T>) -> Result<(), WiretapError> {
    if form.points() != channel.inputs() {
        return Err(WiretapError::AlphabetMismatch(form.points(), channel.inputs()));
    }
    Ok(())
}

/// Eavesdropper outputs `Z_s(α) = (1/k) Σ_{f(s,x)=α} V(x)` for one seed.
pub fn eaves_states<T: Real>(
    form: &FunctionalForm,
    channel: &CqChannel<T>,
    s: usize,
) -> Result<StateEnsemble<T>, WiretapError> {
    check_alphabet(form, channel)?;
    let k = block_size(form)?;
    Ok(StateEnsemble::new(block_states(form, channel, s, k))?)
}

fn block_states<T: Real>(form: &FunctionalForm, channel: &CqChannel<T>, s: usize, k: usize) -> Vec<DensityOperator<T>> {
    let w = T::one() / T::from_count(k);
    form.preimages(s)
        .iter()
        .map(|block| DensityOperator::mixture(channel.dim(), block.iter().map(|&x| (w, channel.output(x)))))
        .collect()
}

/// Functional form of a verified mosaic together with the GDD view of its
/// members' common parameters.
#[derive(Clone, Debug)]
pub struct SecurityFunction {
    form: FunctionalForm,
    params: GddParams,
    classes: ClassPartition,
}

impl SecurityFunction {
    /// Every member must verify as a BIBD (or as a GDD w.r.t. `classes`) with one shared tuple.
    pub fn from_mosaic(mos: &Mosaic, classes: Option<ClassPartition>) -> Result<Self, WiretapError> {
        let form = mos.functional_form()?;
        let report = verify_mosaic(mos, classes.as_ref());
        let mut shared: Option<DesignParams> = None;
        for (label, p) in &report.member_params {
            let p = match p {
                Some(p @ (DesignParams::Bibd(_) | DesignParams::Gdd(_))) => *p,
                other => {
                    return Err(WiretapError::NoBoundParameters(format!(
                        "member {label} classified as {other:?}"
                    )))
                }
            };
            match shared {
                None => shared = Some(p),
                Some(q) if q != p => {
                    return Err(WiretapError::NoBoundParameters(format!(
                        "member {label} has {p:?}, expected {q:?}"
                    )))
                }
                _ => {}
            }
        }
        let (params, classes) = match shared.expect("at least one member") {
            DesignParams::Bibd(b) => (GddParams::from_bibd(&b), ClassPartition::singletons(b.v)),
            DesignParams::Gdd(g) => (g, classes.expect("GDD classification needs classes")),
            DesignParams::Tactical(_) => unreachable!(),
        };
        Ok(Self { form, params, classes })
    }

    /// Direct construction from already-verified parts.
    pub fn from_parts(form: FunctionalForm, params: GddParams, classes: ClassPartition) -> Self {
        Self { form, params, classes }
    }

    pub fn form(&self) -> &FunctionalForm {
        &self.form
    }

    pub fn params(&self) -> &GddParams {
        &self.params
    }

    pub fn classes(&self) -> &ClassPartition {
        &self.classes
    }

    pub fn bound<T: Real>(&self, channel: &CqChannel<T>, tol: &Tolerances) -> Result<T, WiretapError> {
        bound_c(channel, &self.params, &self.classes, tol)
    }
}

/// The leakage bound `C(V, u, m, k, v, r, λ₁, λ₂)` (see module docs).
pub fn bound_c<T: Real>(
    channel: &CqChannel<T>,
    params: &GddParams,
    classes: &ClassPartition,
    tol: &Tolerances,
) -> Result<T, WiretapError> {
    if params.v != channel.inputs() {
        return Err(WiretapError::AlphabetMismatch(params.v, channel.inputs()));
    }
    if classes.points() != params.v {
        return Err(WiretapError::AlphabetMismatch(params.v, classes.points()));
    }
    if !params.satisfies_relation() {
        return Err(WiretapError::NoBoundParameters(format!(
            "{params:?} violates r(k-1) = λ₁(u-1) + λ₂(m-1)u"
        )));
    }
    let sigma = sigma_x(channel);
    let pinv = SupportSplit::new(sigma.matrix(), tol).pinv();
    let (k, r, v) = (
        T::from_count(params.k),
        T::from_count(params.r),
        T::from_count(params.v),
    );
    let (u, m) = (T::from_count(params.u), T::from_count(params.m));
    let (l1, l2) = (T::from_count(params.lambda1), T::from_count(params.lambda2));

    let point_sum: T = channel
        .states()
        .iter()
        .map(|s| renyi2_exp_with(s.matrix(), &pinv))
        .sum();
    let class_sum: T = (0..params.m)
        .map(|i| {
            let members = classes.class_members(i);
            let w = T::one() / T::from_count(members.len());
            let avg = DensityOperator::mixture(channel.dim(), members.iter().map(|&x| (w, channel.output(x))));
            renyi2_exp_with(avg.matrix(), &pinv)
        })
        .sum();

    let kr = k * r;
    Ok((r - l1) / (kr * v) * point_sum + u * (l1 - l2) / kr * class_sum / m + v * l2 / kr)
}

/// BIBD closed form `(1 − (r−λ)/(kr)) + (r−λ)/(kr) · (1/v) Σ_x 2^{D₂(V(x)‖σ_X)}`.
pub fn bound_c_bibd<T: Real>(channel: &CqChannel<T>, params: &BibdParams, tol: &Tolerances) -> Result<T, WiretapError> {
    if params.v != channel.inputs() {
        return Err(WiretapError::AlphabetMismatch(params.v, channel.inputs()));
    }
    let sigma = sigma_x(channel);
    let pinv = SupportSplit::new(sigma.matrix(), tol).pinv();
    let sum: T = channel
        .states()
        .iter()
        .map(|s| renyi2_exp_with(s.matrix(), &pinv))
        .sum();
    let coef = T::from_count(params.r - params.lambda) / T::from_count(params.k * params.r);
    Ok(T::one() - coef + coef * sum / T::from_count(params.v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub distribution: Vec<f64>,
    /// `χ(A; Z_s)` in seed order, bits.
    pub per_seed_chi: Vec<f64>,
    pub avg_leakage: f64,
    /// `2^{avg_leakage}`
    pub exp_avg: f64,
    pub bound: f64,
    /// `bound − exp_avg`
    pub margin: f64,
    /// `‖η^{ASZ} − η^{AS} ⊗ η^Z‖₁`
    pub trace_distance: f64,
    /// `sqrt(2 ln2 · log₂ C)`
    pub trace_distance_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageCell {
    pub seed: usize,
    pub color: usize,
    /// `2^{D₂(Z_s(α)‖σ_X)}`
    pub renyi2_exp: f64,
    /// `‖Z_s(α) − σ_X‖₁`
    pub trace_distance: f64,
}

/// Per-seed eavesdropper states with cached entropies, for repeated leakage evaluation.
#[derive(Clone, Debug)]
pub struct LeakageEvaluator<T> {
    dim: usize,
    /// `zs[s][α]`
    zs: Vec<Vec<DensityOperator<T>>>,
    entropies: Vec<Vec<T>>,
    sigma: DensityOperator<T>,
    tol: Tolerances,
}

impl<T: Real> LeakageEvaluator<T> {
    pub fn new(form: &FunctionalForm, channel: &CqChannel<T>, tol: &Tolerances) -> Result<Self, WiretapError> {
        check_alphabet(form, channel)?;
        let k = block_size(form)?;
        let zs: Vec<Vec<DensityOperator<T>>> = (0..form.seeds())
            .into_par_iter()
            .map(|s| block_states(form, channel, s, k))
            .collect();
        let entropies = zs
            .par_iter()
            .map(|row| row.iter().map(von_neumann_entropy).collect())
            .collect();
        Ok(Self {
            dim: channel.dim(),
            zs,
            entropies,
            sigma: sigma_x(channel),
            tol: *tol,
        })
    }

    pub fn seeds(&self) -> usize {
        self.zs.len()
    }

    pub fn colors(&self) -> usize {
        self.zs[0].len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> &DensityOperator<T> {
        &self.sigma
    }

    /// `Z_s(α)`.
    pub fn state(&self, s: usize, alpha: usize) -> &DensityOperator<T> {
        &self.zs[s][alpha]
    }

    fn seed_mixture(&self, s: usize, dist: &[T]) -> DensityOperator<T> {
        DensityOperator::mixture(self.dim, dist.iter().copied().zip(&self.zs[s]))
    }

    fn chi_seed(&self, s: usize, dist: &[T]) -> T {
        let mut chi = von_neumann_entropy(&self.seed_mixture(s, dist));
        for (&p, &h) in dist.iter().zip(&self.entropies[s]) {
            if p > T::zero() {
                chi -= p * h;
            }
        }
        chi.max(T::zero())
    }

    /// `χ(A; Z_s)` for every seed.
    pub fn per_seed_chi(&self, dist: &[T]) -> Result<Vec<T>, WiretapError> {
        check_distribution(dist, self.colors(), &self.tol)?;
        Ok((0..self.seeds()).map(|s| self.chi_seed(s, dist)).collect())
    }

    /// `(1/|S|) Σ_s χ(A; Z_s)`.
    pub fn avg_chi(&self, dist: &[T]) -> Result<T, WiretapError> {
        let per = self.per_seed_chi(dist)?;
        Ok(per.iter().copied().sum::<T>() / T::from_count(per.len()))
    }

    /// Cross-check path through the generic Holevo routine.
    pub fn avg_chi_via_holevo(&self, dist: &[T]) -> Result<T, WiretapError> {
        let mut total = T::zero();
        for row in &self.zs {
            let ens = StateEnsemble::new(row.clone())?;
            total += holevo(dist, &ens, &self.tol)?;
        }
        Ok(total / T::from_count(self.seeds()))
    }

    /// `(1/(|A||S|)) Σ_{α,s} ‖Z_s(α) − σ_X‖₁`, the trace distance of `η^{ASZ}` from `η^{AS} ⊗ η^Z`.
    pub fn product_distance(&self) -> T {
        let n = T::from_count(self.seeds() * self.colors());
        self.zs
            .par_iter()
            .map(|row| {
                row.iter()
                    .map(|z| trace_norm(&HermitianOperator::from_hermitian(z.matrix() - self.sigma.matrix())))
                    .sum::<T>()
            })
            .collect::<Vec<T>>()
            .into_iter()
            .sum::<T>()
            / n
    }

    /// `(1/|S|) Σ_s 2^{D₂(Z_s(α)‖σ_X)}` for one color.
    pub fn mean_renyi2_exp(&self, alpha: usize) -> T {
        let pinv = SupportSplit::new(self.sigma.matrix(), &self.tol).pinv();
        self.zs
            .iter()
            .map(|row| renyi2_exp_with(row[alpha].matrix(), &pinv))
            .sum::<T>()
            / T::from_count(self.seeds())
    }

    /// Per-`(seed, color)` divergence data, seeds outermost.
    pub fn cells(&self) -> Vec<LeakageCell> {
        let pinv = SupportSplit::new(self.sigma.matrix(), &self.tol).pinv();
        self.zs
            .iter()
            .enumerate()
            .flat_map(|(s, row)| {
                let pinv = &pinv;
                row.iter().enumerate().map(move |(a, z)| LeakageCell {
                    seed: s,
                    color: a,
                    renyi2_exp: renyi2_exp_with(z.matrix(), pinv).to_f64_lossy(),
                    trace_distance: trace_norm(&HermitianOperator::from_hermitian(z.matrix() - self.sigma.matrix()))
                        .to_f64_lossy(),
                })
            })
            .collect()
    }

    pub fn report(&self, dist: &[T], bound: T) -> Result<LeakageReport, WiretapError> {
        let per = self.per_seed_chi(dist)?;
        let avg = per.iter().copied().sum::<T>() / T::from_count(per.len());
        let exp_avg = T::c(2.0).powf(avg);
        let td = self.product_distance();
        Ok(LeakageReport {
            distribution: dist.iter().map(|p| p.to_f64_lossy()).collect(),
            per_seed_chi: per.iter().map(|c| c.to_f64_lossy()).collect(),
            avg_leakage: avg.to_f64_lossy(),
            exp_avg: exp_avg.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
            margin: (bound - exp_avg).to_f64_lossy(),
            trace_distance: td.to_f64_lossy(),
            trace_distance_bound: corollary3_rhs(bound).to_f64_lossy(),
        })
    }

    /// Relative entropy `D(Z_s(α) ‖ ρ)` given the spectral data of `ρ`, bits.
    fn divergence_to(&self, s: usize, alpha: usize, eig: &HermitianEigen<T>) -> T {
        let z = &self.zs[s][alpha];
        let diag = eig.diagonal_in_basis(z.matrix());
        let threshold = T::c(self.tol.support) * eig.max_value();
        let mut cross = T::zero();
        for (&w, &l) in diag.iter().zip(&eig.values) {
            if l > threshold {
                cross += w * l.log2();
            } else if w.to_f64_lossy() > self.tol.psd {
                return T::infinity();
            }
        }
        (-self.entropies[s][alpha] - cross).max(T::zero())
    }

    /// Objective value and `g_α = (1/|S|) Σ_s D(Z_s(α) ‖ Σ_β A(β) Z_s(β))`.
    fn objective_and_gains(&self, dist: &[T]) -> (T, Vec<T>) {
        let per_seed: Vec<(T, Vec<T>)> = (0..self.seeds())
            .into_par_iter()
            .map(|s| {
                let mix = self.seed_mixture(s, dist);
                let eig = mix.eigh();
                let mut chi = shannon_bits(&eig.values);
                for (&p, &h) in dist.iter().zip(&self.entropies[s]) {
                    if p > T::zero() {
                        chi -= p * h;
                    }
                }
                let gains = (0..self.colors()).map(|a| self.divergence_to(s, a, &eig)).collect();
                (chi.max(T::zero()), gains)
            })
            .collect();
        let n = T::from_count(self.seeds());
        let mut value = T::zero();
        let mut gains = vec![T::zero(); self.colors()];
        for (chi, g) in per_seed {
            value += chi;
            for (acc, x) in gains.iter_mut().zip(g) {
                *acc += x;
            }
        }
        (value / n, gains.into_iter().map(|g| g / n).collect())
    }
}

/// Outcome of [`max_leakage_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageSearch {
    pub distribution: Vec<f64>,
    /// Best average leakage found, bits (a lower bound on the maximum).
    pub value: f64,
    /// `max_α g_α` at the returned distribution (an upper bound on the maximum).
    pub upper_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Lower-bound search for `max_A (1/|S|) Σ_s χ(A; Z_s)`.
///
/// Candidates: every vertex, the uniform distribution, a few random interior
/// points, and a Blahut–Arimoto ascent started from uniform. The objective
/// equals the Holevo quantity of the seed-augmented ensemble
/// `α ↦ (1/|S|) Σ_s |s⟩⟨s| ⊗ Z_s(α)`, so the multiplicative update
/// `A(α) ← A(α) · 2^{g_α}` is monotone and `max_α g_α` bounds the optimum.
pub fn max_leakage_search<T: Real, R: Rng + ?Sized>(
    eval: &LeakageEvaluator<T>,
    iterations: usize,
    rng: &mut R,
) -> LeakageSearch {
    let n = eval.colors();
    let mut best_dist = vec![T::one() / T::from_count(n); n];
    let (mut best_val, _) = eval.objective_and_gains(&best_dist);

    let consider = |d: Vec<T>, best_dist: &mut Vec<T>, best_val: &mut T| {
        let v = eval.avg_chi(&d).unwrap_or_else(|_| T::zero());
        if v > *best_val {
            *best_val = v;
            *best_dist = d;
        }
    };
    for a in 0..n {
        let mut d = vec![T::zero(); n];
        d[a] = T::one();
        consider(d, &mut best_dist, &mut best_val);
    }
    for _ in 0..4 {
        let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let total: f64 = raw.iter().sum();
        consider(
            raw.iter().map(|&x| T::c(x / total)).collect(),
            &mut best_dist,
            &mut best_val,
        );
    }

    let mut dist = vec![T::one() / T::from_count(n); n];
    let mut prev = T::neg_infinity();
    let mut upper = T::infinity();
    let mut converged = false;
    let mut iters = 0;
    let stop = T::c(1e-9);
    for it in 0..iterations {
        iters = it + 1;
        let (value, gains) = eval.objective_and_gains(&dist);
        upper = gains.iter().copied().fold(T::neg_infinity(), T::max);
        if value > best_val {
            best_val = value;
            best_dist = dist.clone();
        }
        if upper - value < stop || (value - prev).abs() < stop * T::c(1e-3) {
            converged = upper - value < stop || (value - prev).abs() < stop;
            break;
        }
        prev = value;
        // exp in nats of a bit-valued gain is 2^gain
        let shift = upper;
        let mut next: Vec<T> = dist
            .iter()
            .zip(&gains)
            .map(|(&p, &g)| p * T::c(2.0).powf(g - shift))
            .collect();
        let z: T = next.iter().copied().sum();
        next.iter_mut().for_each(|p| *p /= z);
        dist = next;
    }
    if !converged && iters > 0 {
        let (value, _) = eval.objective_and_gains(&dist);
        converged = upper - value < stop;
    }

    LeakageSearch {
        distribution: best_dist.iter().map(|p| p.to_f64_lossy()).collect(),
        value: best_val.to_f64_lossy(),
        upper_bound: upper.max(best_val).to_f64_lossy(),
        iterations: iters,
        converged,
    }
}

/// Leakage report for one message distribution.
pub fn leakage_avg<T: Real>(
    sf: &SecurityFunction,
    channel: &CqChannel<T>,
    dist: &[T],
    tol: &Tolerances,
) -> Result<LeakageReport, WiretapError> {
    let eval = LeakageEvaluator::new(sf.form(), channel, tol)?;
    let bound = sf.bound(channel, tol)?;
    eval.report(dist, bound)
}

/// `sqrt(2 ln2 · log₂ C)`, clamped at zero for `C ≤ 1`.
pub fn corollary3_rhs<T: Real>(bound: T) -> T {
    (T::c(2.0) * T::LN_2() * bound.log2()).max(T::zero()).sqrt()
}

/// Block-diagonal classical-quantum state `η^{ASZ}` with uniform `A` and `S`.
///
/// Blocks are ordered color-major: `|α⟩ ⊗ |s⟩ ⊗ Z_s(α)`.
#[derive(Clone, Debug)]
pub struct AszState<T> {
    colors: usize,
    seeds: usize,
    dim: usize,
    blocks: Vec<DensityOperator<T>>,
}

impl<T: Real> AszState<T> {
    pub fn total_dim(&self) -> usize {
        self.colors * self.seeds * self.dim
    }

    fn weight(&self) -> T {
        T::one() / T::from_count(self.colors * self.seeds)
    }

    pub fn trace(&self) -> T {
        self.weight() * self.blocks.iter().map(|b| b.matrix().trace().re).sum::<T>()
    }

    /// `η^Z = tr_{AS} η^{ASZ}`.
    pub fn reduced_z(&self) -> DensityOperator<T> {
        let w = self.weight();
        DensityOperator::mixture(self.dim, self.blocks.iter().map(|b| (w, b)))
    }

    /// Diagonal of `η^{AS}` in the `|α⟩ ⊗ |s⟩` basis.
    pub fn reduced_as(&self) -> Vec<T> {
        let w = self.weight();
        self.blocks.iter().map(|b| w * b.matrix().trace().re).collect()
    }

    /// `η^A`, diagonal.
    pub fn reduced_a(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.colors];
        for (i, p) in self.reduced_as().into_iter().enumerate() {
            out[i / self.seeds] += p;
        }
        out
    }

    /// `η^S`, diagonal.
    pub fn reduced_s(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.seeds];
        for (i, p) in self.reduced_as().into_iter().enumerate() {
            out[i % self.seeds] += p;
        }
        out
    }

    /// Full matrix on `A ⊗ S ⊗ Z`.
    pub fn to_dense(&self) -> DensityOperator<T> {
        let n = self.total_dim();
        let d = self.dim;
        let w = self.weight();
        let mut m = CMatrix::zeros(n);
        for (bi, b) in self.blocks.iter().enumerate() {
            let off = bi * d;
            for i in 0..d {
                for j in 0..d {
                    m[(off + i, off + j)] = b.matrix()[(i, j)].scale(w);
                }
            }
        }
        DensityOperator::from_trusted(m)
    }

    /// Dense `η^{AS} ⊗ η^Z`.
    pub fn product_dense(&self) -> DensityOperator<T> {
        let as_diag = classical_diag(&self.reduced_as());
        as_diag.tensor(&self.reduced_z())
    }

    /// `‖η^{ASZ} − η^{AS} ⊗ η^Z‖₁`, evaluated block by block.
    pub fn distance_to_product(&self) -> T {
        let z = self.reduced_z();
        let w = self.weight();
        self.blocks
            .iter()
            .map(|b| w * trace_norm(&HermitianOperator::from_hermitian(b.matrix() - z.matrix())))
            .sum()
    }
}

fn classical_diag<T: Real>(p: &[T]) -> DensityOperator<T> {
    DensityOperator::from_trusted(CMatrix::from_real_diagonal(p))
}

pub fn asz_state<T: Real>(form: &FunctionalForm, channel: &CqChannel<T>) -> Result<AszState<T>, WiretapError> {
    check_alphabet(form, channel)?;
    let total = form.colors() * form.seeds() * channel.dim();
    if total > ASZ_DIM_CAP {
        return Err(WiretapError::SizeCap(total));
    }
    let k = block_size(form)?;
    let per_seed: Vec<Vec<DensityOperator<T>>> = (0..form.seeds()).map(|s| block_states(form, channel, s, k)).collect();
    let mut blocks = Vec::with_capacity(form.colors() * form.seeds());
    for a in 0..form.colors() {
        for row in &per_seed {
            blocks.push(row[a].clone());
        }
    }
    Ok(AszState {
        colors: form.colors(),
        seeds: form.seeds(),
        dim: channel.dim(),
        blocks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corollary3Report {
    pub lhs: f64,
    pub rhs: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `‖η^{ASZ} − η^{AS} ⊗ η^Z‖₁ ≤ sqrt(2 ln2 · log₂ C)` within `tol.num`.
pub fn corollary3_check<T: Real>(
    sf: &SecurityFunction,
    channel: &CqChannel<T>,
    tol: &Tolerances,
) -> Result<Corollary3Report, WiretapError> {
    let state = asz_state(sf.form(), channel)?;
    let lhs = state.distance_to_product().to_f64_lossy();
    let bound = sf.bound(channel, tol)?;
    let rhs = corollary3_rhs(bound).to_f64_lossy();
    Ok(Corollary3Report {
        lhs,
        rhs,
        bound: bound.to_f64_lossy(),
        holds: lhs <= rhs + tol.num,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::mosaic_from_function;
    use crate::mosaic_build::Ex2Mosaic;
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: Tolerances = Tolerances {
        herm: 1e-9,
        trace: 1e-9,
        psd: 1e-9,
        support: 1e-10,
        num: 1e-7,
        dist: 1e-9,
        povm: 1e-9,
    };

    fn ex2(q: u32, t: u32, l: u32) -> SecurityFunction {
        let m = Ex2Mosaic::build(q, t, l).unwrap().mosaic().unwrap();
        SecurityFunction::from_mosaic(&m, None).unwrap()
    }

    fn basis_channel(bits: &[usize]) -> CqChannel<f64> {
        CqChannel::from_states(bits.iter().map(|&b| DensityOperator::basis(2, b)).collect()).unwrap()
    }

    #[test]
    fn sigma_x_examples() {
        let rho = DensityOperator::<f64>::random(3, &mut ChaCha8Rng::seed_from_u64(1));
        let c = CqChannel::constant(4, rho.clone());
        assert!(sigma_x(&c).matrix().max_abs_diff(rho.matrix()) < 1e-15);
        let orth = basis_channel(&[0, 1]);
        let s = sigma_x(&orth);
        assert!(s.matrix().max_abs_diff(DensityOperator::maximally_mixed(2).matrix()) < 1e-15);
        assert!((s.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_channel_has_no_leakage() {
        let sf = ex2(2, 2, 1);
        let rho = DensityOperator::<f64>::random(2, &mut ChaCha8Rng::seed_from_u64(2));
        let c = CqChannel::constant(4, rho.clone());
        for s in 0..sf.form().seeds() {
            let ens = eaves_states(sf.form(), &c, s).unwrap();
            for z in ens.states() {
                assert!(z.matrix().max_abs_diff(rho.matrix()) < 1e-14);
            }
        }
        let bound = sf.bound(&c, &TOL).unwrap();
        assert!((bound - 1.0).abs() < 1e-12);
        let rep = leakage_avg(&sf, &c, &[0.5, 0.5], &TOL).unwrap();
        assert!(rep.avg_leakage.abs() < 1e-12);
        assert!((rep.exp_avg - 1.0).abs() < 1e-12);
        assert!(rep.margin.abs() < 1e-12);
        let c3 = corollary3_check(&sf, &c, &TOL).unwrap();
        assert!(c3.lhs < 1e-12 && c3.rhs < 1e-5 && c3.holds);
    }

    #[test]
    fn seed_mixture_is_sigma_x() {
        let sf = ex2(2, 3, 1);
        let ch = CqChannel::<f64>::random(8, 3, &mut ChaCha8Rng::seed_from_u64(4));
        let sigma = sigma_x(&ch);
        let colors = sf.form().colors();
        for s in 0..sf.form().seeds() {
            let ens = eaves_states(sf.form(), &ch, s).unwrap();
            let avg = ens.average(&vec![1.0 / colors as f64; colors]);
            assert!(avg.matrix().max_abs_diff(sigma.matrix()) < 1e-12);
        }
    }

    #[test]
    fn eaves_states_match_direct_sum() {
        let ex = Ex2Mosaic::build(2, 2, 1).unwrap();
        let sf = ex2(2, 2, 1);
        let ch = basis_channel(&[0, 0, 1, 1]);
        for (s, seed) in ex.seeds().iter().enumerate() {
            let ens = eaves_states(sf.form(), &ch, s).unwrap();
            for (a, alpha) in ex.colors().iter().enumerate() {
                let mut direct = CMatrix::zeros(2);
                for (x, pt) in ex.points().iter().enumerate() {
                    if &ex.f_eval(seed, pt).unwrap() == alpha {
                        direct.add_scaled(0.5, ch.output(x).matrix());
                    }
                }
                assert!(ens.states()[a].matrix().max_abs_diff(&direct) < 1e-15);
            }
        }
    }

    #[test]
    fn example_channel_respects_bound() {
        let sf = ex2(2, 2, 1);
        let ch = basis_channel(&[0, 0, 1, 1]);
        let rep = leakage_avg(&sf, &ch, &[0.5, 0.5], &TOL).unwrap();
        assert!(rep.margin >= 0.0, "{rep:?}");
        let point = leakage_avg(&sf, &ch, &[1.0, 0.0], &TOL).unwrap();
        assert!(point.avg_leakage.abs() < 1e-12);
        assert!(corollary3_check(&sf, &ch, &TOL).unwrap().holds);
    }

    #[test]
    fn bound_matches_mean_renyi_identity() {
        let sf = ex2(2, 3, 1);
        let ch = CqChannel::<f64>::random(8, 2, &mut ChaCha8Rng::seed_from_u64(9));
        let eval = LeakageEvaluator::new(sf.form(), &ch, &TOL).unwrap();
        let c = sf.bound(&ch, &TOL).unwrap();
        for a in 0..eval.colors() {
            assert!((eval.mean_renyi2_exp(a) - c).abs() < 1e-10);
        }
        let closed = bound_c_bibd(
            &ch,
            &BibdParams {
                v: 8,
                b: 28,
                k: 2,
                r: 7,
                lambda: 1,
            },
            &TOL,
        )
        .unwrap();
        assert!((closed - c).abs() < 1e-12);
    }

    #[test]
    fn gdd_constant_channel_bound_is_one() {
        let params = GddParams {
            v: 4,
            b: 4,
            k: 2,
            r: 2,
            u: 2,
            m: 2,
            lambda1: 0,
            lambda2: 1,
        };
        let classes = ClassPartition::contiguous(2, 2);
        let c = CqChannel::constant(4, DensityOperator::<f64>::random(3, &mut ChaCha8Rng::seed_from_u64(5)));
        assert!((bound_c(&c, &params, &classes, &TOL).unwrap() - 1.0).abs() < 1e-12);
        let bad = GddParams { lambda2: 2, ..params };
        assert!(bound_c(&c, &bad, &classes, &TOL).is_err());
    }

    #[test]
    fn holevo_paths_agree() {
        let sf = ex2(3, 2, 1);
        let ch = CqChannel::<f64>::random(9, 2, &mut ChaCha8Rng::seed_from_u64(11));
        let eval = LeakageEvaluator::new(sf.form(), &ch, &TOL).unwrap();
        let d = [0.2, 0.5, 0.3];
        assert!((eval.avg_chi(&d).unwrap() - eval.avg_chi_via_holevo(&d).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn search_beats_uniform_and_is_bracketed() {
        let sf = ex2(2, 2, 1);
        let ch = CqChannel::<f64>::random(4, 2, &mut ChaCha8Rng::seed_from_u64(12));
        let eval = LeakageEvaluator::new(sf.form(), &ch, &TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let res = max_leakage_search(&eval, 500, &mut rng);
        assert!(res.value + 1e-15 >= eval.avg_chi(&[0.5, 0.5]).unwrap());
        assert!(res.upper_bound + 1e-12 >= res.value);
        let constant = CqChannel::constant(4, DensityOperator::<f64>::maximally_mixed(2));
        let eval = LeakageEvaluator::new(sf.form(), &constant, &TOL).unwrap();
        assert!(max_leakage_search(&eval, 50, &mut rng).value.abs() < 1e-12);
    }

    #[test]
    fn asz_marginals() {
        let sf = ex2(2, 2, 1);
        let ch = CqChannel::<f64>::random(4, 2, &mut ChaCha8Rng::seed_from_u64(13));
        let st = asz_state(sf.form(), &ch).unwrap();
        assert!((st.trace() - 1.0).abs() < 1e-12);
        assert!(st.reduced_z().matrix().max_abs_diff(sigma_x(&ch).matrix()) < 1e-12);
        assert!(st.reduced_a().iter().all(|&p| (p - 0.5).abs() < 1e-12));
        assert!(st.reduced_s().iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-12));
        let dense = st.to_dense();
        let diff = HermitianOperator::from_hermitian(dense.matrix() - st.product_dense().matrix());
        assert!((trace_norm(&diff) - st.distance_to_product()).abs() < 1e-12);
    }

    #[test]
    fn asz_cap() {
        let sf = ex2(2, 4, 1);
        let ch = CqChannel::constant(16, DensityOperator::<f64>::maximally_mixed(5));
        assert!(matches!(asz_state(sf.form(), &ch), Err(WiretapError::SizeCap(4800))));
    }

    #[test]
    fn non_constant_blocks_rejected() {
        let mos = mosaic_from_function(3, 1, vec!["a".into(), "b".into()], |_, x| (x == 0) as usize).unwrap();
        let form = mos.functional_form().unwrap();
        let ch = CqChannel::constant(3, DensityOperator::<f64>::maximally_mixed(2));
        assert_eq!(
            eaves_states(&form, &ch, 0).unwrap_err(),
            WiretapError::NonConstantBlocks
        );
    }

    #[test]
    fn pgm_on_orthogonal_states_is_projective() {
        let ch = basis_channel(&[0, 1]);
        let g = pgm_decoder(&ch, &[0, 1], &TOL);
        assert!(g[0].matrix().max_abs_diff(DensityOperator::<f64>::basis(2, 0).matrix()) < 1e-12);
        assert!(g[1].matrix().max_abs_diff(DensityOperator::<f64>::basis(2, 1).matrix()) < 1e-12);
        let code = pgm_public_code(&ch, &TOL);
        assert!(avg_error(&code, &ch).unwrap() < 1e-12);
    }

    #[test]
    fn pgm_sums_to_support_projector() {
        let ch = CqChannel::from_states(vec![
            DensityOperator::<f64>::pure(&[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)]),
            DensityOperator::pure(&[Complex::new(0.6, 0.0), Complex::new(0.0, 0.8), Complex::new(0.0, 0.0)]),
        ])
        .unwrap();
        let g = pgm_decoder(&ch, &[0, 1], &TOL);
        let sum = g[0].add(&g[1]);
        let mut total = CMatrix::zeros(3);
        total.add_scaled(1.0, ch.output(0).matrix());
        total.add_scaled(1.0, ch.output(1).matrix());
        let proj = SupportSplit::new(&total, &TOL).support_projector();
        assert!(sum.matrix().max_abs_diff(&proj) < 1e-12);
    }

    #[test]
    fn helstrom_value_for_two_pure_states() {
        let theta: f64 = 0.4;
        let psi0 = [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let psi1 = [Complex::new(theta.cos(), 0.0), Complex::new(theta.sin(), 0.0)];
        let ch = CqChannel::from_states(vec![DensityOperator::pure(&psi0), DensityOperator::pure(&psi1)]).unwrap();
        let code = pgm_public_code(&ch, &TOL);
        let overlap = theta.cos();
        let expected = (1.0 - (1.0 - overlap * overlap).sqrt()) / 2.0;
        assert!((avg_error(&code, &ch).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_decoder_always_fails() {
        let ch = basis_channel(&[0, 1]);
        let code = Code::deterministic(2, &[0, 1], vec![HermitianOperator::zeros(2); 2], &TOL).unwrap();
        assert_eq!(avg_error(&code, &ch).unwrap(), 1.0);
        assert_eq!(max_error(&code, &ch).unwrap(), 1.0);
        assert!(code.failure_element().matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn code_validation() {
        let id = HermitianOperator::<f64>::identity(2);
        assert!(matches!(
            Code::deterministic(2, &[0, 1], vec![id.clone(), id.clone()], &TOL),
            Err(WiretapError::PovmExceedsIdentity(_))
        ));
        assert!(matches!(
            Code::new(vec![vec![0.5, 0.6]], vec![id], &TOL),
            Err(WiretapError::BadEncoder(0))
        ));
    }

    #[test]
    fn modular_code_from_noiseless_public_code() {
        let ex = Ex2Mosaic::build(2, 2, 1).unwrap();
        let sf = ex2(2, 2, 1);
        let ch = CqChannel::from_states((0..4).map(|i| DensityOperator::<f64>::basis(4, i)).collect()).unwrap();
        let public = pgm_public_code(&ch, &TOL);
        for s in 0..ex.seeds().len() {
            let code = build_modular_code(&public, sf.form(), s).unwrap();
            assert!(avg_error(&code, &ch).unwrap() < 1e-12);
            let total = code.decoder().iter().fold(HermitianOperator::zeros(4), |a, g| a.add(g));
            let public_total = public
                .decoder()
                .iter()
                .fold(HermitianOperator::zeros(4), |a, g| a.add(g));
            assert!(total.matrix().max_abs_diff(public_total.matrix()) < 1e-12);
        }
    }
}
