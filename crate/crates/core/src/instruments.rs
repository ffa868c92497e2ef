//! Kraus instruments and non-destructive discrimination success probabilities.
//!
//! An instrument is a list of labeled Kraus branches plus a guess for each
//! branch. Separable instruments are stored structurally: every branch is a
//! pair `(K_A, K_B)` acting on the two sides of the ensemble's cut.
//!
//! The non-destructive success probability of a branch `λ` on state `z` is
//! `|<Ψ_z| K^λ |Ψ_z>|²` when the branch guesses `z`. With pre-shared
//! resource pairs the returned state is checked on the data register only and
//! the resource register is discarded, i.e. the contribution is
//! `‖(<Ψ_z| ⊗ 1) K^λ |Ψ_z>|α>‖²`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply, schmidt_coefficients, Operator, StateVector, Tensor, C64, ONE, TOL, ZERO};
use crate::states::bell_state;

/// Completeness tolerance `‖Σ K†K − 1‖_max`.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Orthogonality tolerance between ensemble members.
pub const ORTHO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kraus {
    /// `K_A ⊗ K_B`; `a` acts on side-A labels, `b` on side-B labels.
    Product { a: Operator, b: Operator },
    Joint(Operator),
}

impl Kraus {
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        match self {
            Kraus::Product { a, b } => apply(a, &apply(b, psi)?),
            Kraus::Joint(k) => apply(k, psi),
        }
    }

    /// `K†K` on `register`.
    fn effect(&self, register: &[String]) -> Result<Operator> {
        match self {
            Kraus::Product { a, b } => {
                let ea = a.dagger().compose(a)?;
                let eb = b.dagger().compose(b)?;
                ea.tensor(&eb)?.embed(register)
            }
            Kraus::Joint(k) => k.dagger().compose(k)?.embed(register),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: String,
    pub kraus: Kraus,
}

/// Finite instrument with a guess `f(λ)` (0-based state index) per branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausInstrument {
    register: Vec<String>,
    branches: Vec<Branch>,
    guess: Vec<usize>,
}

impl KrausInstrument {
    /// Checks completeness before accepting the branches.
    pub fn new(register: Vec<String>, branches: Vec<Branch>, guess: Vec<usize>) -> Result<Self> {
        if guess.len() != branches.len() {
            return Err(Error::DimensionMismatch { expected: branches.len(), found: guess.len() });
        }
        let inst = Self { register, branches, guess };
        let r = inst.completeness_residual()?;
        if r > COMPLETENESS_TOL {
            return Err(Error::IncompleteInstrument(r));
        }
        Ok(inst)
    }

    pub fn register(&self) -> &[String] {
        &self.register
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn guess(&self) -> &[usize] {
        &self.guess
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn is_product_form(&self) -> bool {
        self.branches.iter().all(|b| matches!(b.kraus, Kraus::Product { .. }))
    }

    /// `‖Σ_λ K^λ† K^λ − 1‖_max`.
    pub fn completeness_residual(&self) -> Result<f64> {
        let d = 1usize << self.register.len();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for b in &self.branches {
            sum += b.kraus.effect(&self.register)?.matrix();
        }
        Ok(Operator::new(sum, self.register.clone())?.identity_residual())
    }

    /// Replaces the guesses using `rule` on `ens`.
    pub fn with_guess_rule(mut self, ens: &Ensemble, rule: GuessRule) -> Result<Self> {
        self.guess = assign_guesses(ens, &self.register, &self.branches, rule)?;
        Ok(self)
    }
}

/// How a branch is mapped to a guessed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GuessRule {
    /// `argmax_z p_z p(λ|z)`, ties to the smallest `z`.
    #[default]
    MaxLikelihood,
    /// `argmax_z p_z ‖(<Ψ_z|⊗1) K^λ |Ψ_z>‖²`, the best guess for the non-destructive score.
    MaxFidelity,
}

/// A pre-shared maximally entangled resource attached to every ensemble state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preshared {
    pub state: StateVector,
    pub side_a: Vec<String>,
    pub side_b: Vec<String>,
    pub ebits: u32,
}

/// Orthonormal states `|Ψ_z>` with prior `p_z`, cut into sides A and B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    states: Vec<StateVector>,
    probs: Vec<f64>,
    side_a: Vec<String>,
    side_b: Vec<String>,
    preshared: Option<Preshared>,
}

impl Ensemble {
    pub fn new(states: Vec<StateVector>, probs: Vec<f64>, side_a: Vec<String>, side_b: Vec<String>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidProbabilities("empty ensemble".into()));
        }
        if probs.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), found: probs.len() });
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidProbabilities("negative or non-finite weight".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!("weights sum to {total}")));
        }
        let register = states[0].register().to_vec();
        for l in side_a.iter().chain(&side_b) {
            if !register.contains(l) {
                return Err(Error::UnknownLabel(l.clone()));
            }
        }
        if let Some(l) = side_a.iter().find(|l| side_b.contains(l)) {
            return Err(Error::LabelCollision(l.clone()));
        }
        if side_a.len() + side_b.len() != register.len() || side_a.is_empty() || side_b.is_empty() {
            return Err(Error::InvalidParams("sides must partition the register".into()));
        }
        let states = states
            .iter()
            .map(|s| {
                if !s.is_normalized() {
                    return Err(Error::NotNormalized(s.norm_sqr()));
                }
                states[0].aligned(s)
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..states.len() {
            for j in i + 1..states.len() {
                let o = states[i].inner(&states[j])?.norm();
                if o > ORTHO_TOL {
                    return Err(Error::NotOrthogonal(i, j, o));
                }
            }
        }
        Ok(Self { states, probs, side_a, side_b, preshared: None })
    }

    pub fn uniform(states: Vec<StateVector>, side_a: Vec<String>, side_b: Vec<String>) -> Result<Self> {
        let k = states.len();
        Self::new(states, vec![1.0 / k as f64; k], side_a, side_b)
    }

    pub fn k(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn side_a(&self) -> &[String] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[String] {
        &self.side_b
    }

    pub fn preshared(&self) -> Option<&Preshared> {
        self.preshared.as_ref()
    }

    /// Data register of the states.
    pub fn register(&self) -> &[String] {
        self.states[0].register()
    }

    /// Side A including any resource labels.
    pub fn full_side_a(&self) -> Vec<String> {
        let mut v = self.side_a.clone();
        if let Some(p) = &self.preshared {
            v.extend(p.side_a.iter().cloned());
        }
        v
    }

    pub fn full_side_b(&self) -> Vec<String> {
        let mut v = self.side_b.clone();
        if let Some(p) = &self.preshared {
            v.extend(p.side_b.iter().cloned());
        }
        v
    }

    /// Data register followed by resource labels.
    pub fn full_register(&self) -> Vec<String> {
        let mut v = self.register().to_vec();
        if let Some(p) = &self.preshared {
            v.extend(p.state.register().iter().cloned());
        }
        v
    }

    /// The state actually handed to the parties: `|Ψ_z>` or `|Ψ_z>|α>`.
    pub fn input(&self, z: usize) -> Result<StateVector> {
        match &self.preshared {
            None => Ok(self.states[z].clone()),
            Some(p) => self.states[z].tensor(&p.state),
        }
    }

    /// Same states, different cut.
    pub fn with_cut(&self, side_a: Vec<String>, side_b: Vec<String>) -> Result<Self> {
        let mut e = Self::new(self.states.clone(), self.probs.clone(), side_a, side_b)?;
        e.preshared = self.preshared.clone();
        Ok(e)
    }
}

/// Adds `c = log₂ f` resource pairs `Φ⁰` on `(A'1, B'1), ...` to every state.
///
/// `f` must be a power of two since registers are made of qubits.
pub fn attach_preshared(ens: &Ensemble, f: u32) -> Result<Ensemble> {
    if f == 0 || !f.is_power_of_two() {
        return Err(Error::InvalidParams(format!("resource dimension {f} is not a power of two")));
    }
    if f == 1 {
        return Ok(ens.clone());
    }
    let existing = ens.full_register();
    let offset = ens.preshared.as_ref().map_or(0, |p| p.ebits);
    let c = f.trailing_zeros();
    let mut side_a = Vec::new();
    let mut side_b = Vec::new();
    let mut pairs = Vec::new();
    for i in 1..=c {
        let (a, b) = (format!("A'{}", i + offset), format!("B'{}", i + offset));
        for l in [&a, &b] {
            if existing.contains(l) {
                return Err(Error::LabelCollision(l.clone()));
            }
        }
        pairs.push(bell_state(0, &a, &b)?);
        side_a.push(a);
        side_b.push(b);
    }
    let mut alpha = pairs[0].clone();
    for p in &pairs[1..] {
        alpha = alpha.tensor(p)?;
    }
    let mut order = side_a.clone();
    order.extend(side_b.iter().cloned());
    let alpha = alpha.permuted(&order)?;
    let preshared = match &ens.preshared {
        None => Preshared { state: alpha, side_a, side_b, ebits: c },
        Some(p) => {
            let mut sa = p.side_a.clone();
            sa.extend(side_a);
            let mut sb = p.side_b.clone();
            sb.extend(side_b);
            let mut order = sa.clone();
            order.extend(sb.iter().cloned());
            Preshared { state: p.state.tensor(&alpha)?.permuted(&order)?, side_a: sa, side_b: sb, ebits: p.ebits + c }
        }
    };
    let mut out = ens.clone();
    out.preshared = Some(preshared);
    Ok(out)
}

/// Per-branch diagnostics of one `(state, branch)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagnostic {
    pub state: usize,
    pub branch: usize,
    pub label: String,
    /// `p(λ|z)`.
    pub probability: f64,
    /// Fidelity of the renormalized returned data state with `|Ψ_z>`.
    pub fidelity: f64,
    pub guessed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    pub ndsd: f64,
    pub conventional: f64,
    pub completeness_residual: f64,
    pub diagnostics: Vec<BranchDiagnostic>,
}

/// `(p(λ|z), ‖(<Ψ_z|⊗1) K^λ|in_z>‖²)` for every branch and state, indexed `[z][λ]`.
fn branch_table(ens: &Ensemble, register: &[String], branches: &[Branch]) -> Result<Vec<Vec<(f64, f64)>>> {
    let full = ens.full_register();
    if full.len() != register.len() || full.iter().any(|l| !register.contains(l)) {
        return Err(Error::RegisterMismatch(full, register.to_vec()));
    }
    (0..ens.k())
        .map(|z| {
            let input = ens.input(z)?.permuted(register)?;
            let target = &ens.states[z];
            branches
                .iter()
                .map(|b| {
                    let out = b.kraus.apply(&input)?;
                    let kept = out.contract(target)?.norm_sqr();
                    Ok((out.norm_sqr(), kept))
                })
                .collect()
        })
        .collect()
}

fn argmax_weighted(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (z, v) in values.enumerate() {
        if v > best.1 + 1e-12 {
            best = (z, v);
        }
    }
    best.0
}

fn assign_guesses(ens: &Ensemble, register: &[String], branches: &[Branch], rule: GuessRule) -> Result<Vec<usize>> {
    let table = branch_table(ens, register, branches)?;
    Ok((0..branches.len())
        .map(|l| {
            argmax_weighted((0..ens.k()).map(|z| {
                let (p, kept) = table[z][l];
                ens.probs[z]
                    * match rule {
                        GuessRule::MaxLikelihood => p,
                        GuessRule::MaxFidelity => kept,
                    }
            }))
        })
        .collect())
}

/// Evaluates both success probabilities with full per-branch diagnostics.
pub fn ndsd_success(ens: &Ensemble, inst: &KrausInstrument) -> Result<SuccessReport> {
    let residual = inst.completeness_residual()?;
    if residual > COMPLETENESS_TOL {
        return Err(Error::IncompleteInstrument(residual));
    }
    let table = branch_table(ens, &inst.register, &inst.branches)?;
    let mut ndsd = 0.0;
    let mut conventional = 0.0;
    let mut diagnostics = Vec::with_capacity(ens.k() * inst.len());
    for (z, row) in table.iter().enumerate() {
        for (l, &(p, kept)) in row.iter().enumerate() {
            let guessed = inst.guess[l] == z;
            if guessed {
                ndsd += ens.probs[z] * kept;
                conventional += ens.probs[z] * p;
            }
            diagnostics.push(BranchDiagnostic {
                state: z,
                branch: l,
                label: inst.branches[l].label.clone(),
                probability: p,
                fidelity: if p > 0.0 { (kept / p).min(1.0) } else { 0.0 },
                guessed,
            });
        }
    }
    Ok(SuccessReport { ndsd, conventional, completeness_residual: residual, diagnostics })
}

/// `Σ_z p_z Σ_λ p(λ|z) δ_{f(λ),z}`.
pub fn conventional_success(ens: &Ensemble, inst: &KrausInstrument) -> Result<f64> {
    Ok(ndsd_success(ens, inst)?.conventional)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `d_A d_B max_z p_z ξ_z⁴`, unclipped.
    pub value: f64,
    pub clipped: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
    /// Largest Schmidt coefficient of each state.
    pub max_schmidt: Vec<f64>,
}

/// Separable-measurement bound `d_A d_B max_z p_z ξ_z⁴` for the ensemble's cut.
pub fn theorem1_bound(ens: &Ensemble) -> Result<BoundReport> {
    let d_a = (1usize << ens.side_a.len()) as f64;
    let d_b = (1usize << ens.side_b.len()) as f64;
    let max_schmidt = ens
        .states
        .iter()
        .map(|s| Ok(schmidt_coefficients(s, &ens.side_a)?[0]))
        .collect::<Result<Vec<f64>>>()?;
    let worst = max_schmidt
        .iter()
        .zip(&ens.probs)
        .map(|(xi, p)| p * xi.powi(4))
        .fold(0.0, f64::max);
    let value = d_a * d_b * worst;
    Ok(BoundReport { value, clipped: value.min(1.0), vacuous: value >= 1.0, max_schmidt })
}

/// `min(1, 2^c / k)` for `k` equiprobable maximally entangled states and `c` ebits.
pub fn theorem2_bound(k: usize, ebits: u32) -> f64 {
    (2f64.powi(ebits as i32) / k as f64).min(1.0)
}

/// Whether side B's instrument may depend on side A's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Adaptivity {
    #[default]
    Product,
    OneWay,
}

/// Haar-distributed isometry `rows x cols` (first columns of a Haar unitary).
fn haar_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..cols {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        q.column_mut(c).scale_mut(1.0);
        for x in q.column_mut(c).iter_mut() {
            *x *= phase;
        }
    }
    q
}

/// Splits an isometry `(d·m) x d` into `m` Kraus blocks `K_i = (<i|_anc ⊗ 1) V`.
fn kraus_blocks(v: &DMatrix<C64>, d: usize) -> Vec<DMatrix<C64>> {
    (0..v.nrows() / d).map(|i| v.rows(i * d, d).into_owned()).collect()
}

fn trivial_isometry(d: usize, outcomes: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d * outcomes, d, |r, c| if r == c { ONE } else { ZERO })
}

fn product_instrument(
    ens: &Ensemble,
    kraus_a: &[DMatrix<C64>],
    kraus_b: &[Vec<DMatrix<C64>>],
    rule: GuessRule,
) -> Result<KrausInstrument> {
    let side_a = ens.full_side_a();
    let side_b = ens.full_side_b();
    let mut branches = Vec::new();
    for (i, ka) in kraus_a.iter().enumerate() {
        let bs = if kraus_b.len() == 1 { &kraus_b[0] } else { &kraus_b[i] };
        for (j, kb) in bs.iter().enumerate() {
            branches.push(Branch {
                label: format!("a{i}b{j}"),
                kraus: Kraus::Product {
                    a: Operator::new(ka.clone(), side_a.clone())?,
                    b: Operator::new(kb.clone(), side_b.clone())?,
                },
            });
        }
    }
    let register = ens.full_register();
    let guess = assign_guesses(ens, &register, &branches, rule)?;
    KrausInstrument::new(register, branches, guess)
}

fn sample_with_rng<R: Rng>(ens: &Ensemble, outcomes: usize, adaptivity: Adaptivity, rng: &mut R) -> Result<KrausInstrument> {
    if outcomes == 0 {
        return Err(Error::InvalidParams("at least one outcome per side".into()));
    }
    let d_a = 1usize << ens.full_side_a().len();
    let d_b = 1usize << ens.full_side_b().len();
    let ka = kraus_blocks(&haar_isometry(d_a * outcomes, d_a, rng), d_a);
    let n_b = match adaptivity {
        Adaptivity::Product => 1,
        Adaptivity::OneWay => outcomes,
    };
    let kb: Vec<_> = (0..n_b)
        .map(|_| kraus_blocks(&haar_isometry(d_b * outcomes, d_b, rng), d_b))
        .collect();
    product_instrument(ens, &ka, &kb, GuessRule::MaxLikelihood)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random separable instrument on the ensemble's cut.
///
/// Each side runs a local instrument obtained from a Haar-random isometry
/// into system ⊗ ancilla followed by ancilla readout, so every branch is
/// `K_A^i ⊗ K_B^j`. Guesses use [`GuessRule::MaxLikelihood`].
pub fn sample_separable_instrument(
    ens: &Ensemble,
    outcomes: usize,
    adaptivity: Adaptivity,
    seed: u64,
) -> Result<KrausInstrument> {
    sample_with_rng(ens, outcomes, adaptivity, &mut trial_rng(seed, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub samples: usize,
    pub seed: u64,
    pub max_ndsd: f64,
    pub max_conventional: f64,
    pub max_residual: f64,
}

/// Draws `samples` instruments (trial `t` uses stream `t` of `seed`) and reports the maxima.
///
/// Trials run in parallel; the reduction is by trial index, so the summary
/// does not depend on scheduling.
pub fn sample_bounds(
    ens: &Ensemble,
    samples: usize,
    outcomes: usize,
    adaptivity: Adaptivity,
    seed: u64,
) -> Result<SampleSummary> {
    let results: Vec<Result<(f64, f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let inst = sample_with_rng(ens, outcomes, adaptivity, &mut trial_rng(seed, t as u64))?;
            let rep = ndsd_success(ens, &inst)?;
            Ok((rep.ndsd, rep.conventional, rep.completeness_residual))
        })
        .collect();
    let mut summary = SampleSummary { samples, seed, max_ndsd: 0.0, max_conventional: 0.0, max_residual: 0.0 };
    for r in results {
        let (n, c, res) = r?;
        summary.max_ndsd = summary.max_ndsd.max(n);
        summary.max_conventional = summary.max_conventional.max(c);
        summary.max_residual = summary.max_residual.max(res);
    }
    Ok(summary)
}

/// Budget of the separable-instrument search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Outcomes of each local instrument.
    pub outcomes: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { outcomes: 2, restarts: 200, iterations: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub instrument: KrausInstrument,
    pub probability: f64,
    /// Restart that produced the best instrument.
    pub restart: usize,
    pub config: SearchConfig,
}

/// Fast evaluator for product instruments: states as `d_A x d_B` amplitude matrices.
struct ProductObjective {
    mats: Vec<DMatrix<C64>>,
    probs: Vec<f64>,
}

impl ProductObjective {
    fn value(&self, ka: &[DMatrix<C64>], kb: &[DMatrix<C64>]) -> f64 {
        let mut total = 0.0;
        for a in ka {
            for b in kb {
                let bt = b.transpose();
                let mut best = 0.0f64;
                for (m, p) in self.mats.iter().zip(&self.probs) {
                    let out = a * m * &bt;
                    let overlap: C64 = m.iter().zip(out.iter()).map(|(x, y)| x.conj() * y).sum();
                    best = best.max(p * overlap.norm_sqr());
                }
                total += best;
            }
        }
        total
    }
}

fn orthonormalize(v: &DMatrix<C64>) -> DMatrix<C64> {
    v.clone().qr().q()
}

/// Gradient-free search over product instruments maximizing the non-destructive success.
///
/// Restart 0 starts from the identity instrument, the others from Haar-random
/// local isometries. Each iteration perturbs one complex coordinate of one
/// side's isometry, re-orthonormalizes and keeps the move if it does not lower
/// the objective. Guesses use [`GuessRule::MaxFidelity`].
pub fn optimize_separable(ens: &Ensemble, config: &SearchConfig) -> Result<SearchResult> {
    if ens.preshared.is_some() {
        return Err(Error::InvalidParams("search runs on ensembles without resource pairs".into()));
    }
    if config.outcomes == 0 || config.restarts == 0 {
        return Err(Error::InvalidParams("outcomes and restarts must be positive".into()));
    }
    let d_a = 1usize << ens.side_a.len();
    let d_b = 1usize << ens.side_b.len();
    if d_a * d_b > 16 {
        return Err(Error::SizeLimit(format!("d_A d_B = {} > 16", d_a * d_b)));
    }
    let objective = ProductObjective {
        mats: ens
            .states
            .iter()
            .map(|s| s.bipartite_matrix(&ens.side_a))
            .collect::<Result<_>>()?,
        probs: ens.probs.clone(),
    };
    let m = config.outcomes;
    let runs: Vec<(f64, DMatrix<C64>, DMatrix<C64>)> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = trial_rng(config.seed, restart as u64);
            let (mut va, mut vb) = if restart == 0 {
                (trivial_isometry(d_a, m), trivial_isometry(d_b, m))
            } else {
                (haar_isometry(d_a * m, d_a, &mut rng), haar_isometry(d_b * m, d_b, &mut rng))
            };
            let mut current = objective.value(&kraus_blocks(&va, d_a), &kraus_blocks(&vb, d_b));
            let mut step = 0.3f64;
            for _ in 0..config.iterations {
                let side_a: bool = rng.random();
                let (v, d) = if side_a { (&va, d_a) } else { (&vb, d_b) };
                let mut trial = v.clone();
                let r = rng.random_range(0..trial.nrows());
                let c = rng.random_range(0..trial.ncols());
                let dz = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * step;
                trial[(r, c)] += dz;
                let trial = orthonormalize(&trial);
                let value = if side_a {
                    objective.value(&kraus_blocks(&trial, d), &kraus_blocks(&vb, d_b))
                } else {
                    objective.value(&kraus_blocks(&va, d_a), &kraus_blocks(&trial, d))
                };
                if value >= current {
                    current = value;
                    if side_a {
                        va = trial;
                    } else {
                        vb = trial;
                    }
                    step = (step * 1.2).min(1.0);
                } else {
                    step = (step * 0.97).max(1e-4);
                }
            }
            (current, va, vb)
        })
        .collect();
    let (restart, (_, va, vb)) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, DMatrix<C64>, DMatrix<C64>))>, |best, (i, run)| match best {
            Some((_, b)) if b.0 >= run.0 => best,
            _ => Some((i, run)),
        })
        .expect("at least one restart");
    let instrument = product_instrument(
        ens,
        &kraus_blocks(va, d_a),
        &[kraus_blocks(vb, d_b)],
        GuessRule::MaxFidelity,
    )?;
    let probability = ndsd_success(ens, &instrument)?.ndsd;
    Ok(SearchResult { instrument, probability, restart, config: *config })
}

/// Single branch `1_A ⊗ 1_B` guessing state `z`.
pub fn trivial_instrument(ens: &Ensemble, z: usize) -> Result<KrausInstrument> {
    let a = Operator::identity(ens.full_side_a())?;
    let b = Operator::identity(ens.full_side_b())?;
    KrausInstrument::new(
        ens.full_register(),
        vec![Branch { label: "identity".into(), kraus: Kraus::Product { a, b } }],
        vec![z],
    )
}

fn basis_projector(label: &str, bit: u8) -> Result<Operator> {
    Operator::projector(&StateVector::basis(&[bit], vec![label.to_string()])?)
}

/// Both parties measure one qubit each in the computational basis; guesses by likelihood.
///
/// On `{Φ⁰, Φ²}` the outcome parity identifies the state with certainty.
pub fn local_z_instrument(ens: &Ensemble, qubit_a: &str, qubit_b: &str) -> Result<KrausInstrument> {
    let side_a = ens.full_side_a();
    let side_b = ens.full_side_b();
    let mut branches = Vec::new();
    for a in 0..2u8 {
        for b in 0..2u8 {
            let pa = basis_projector(qubit_a, a)?.tensor(&Operator::identity(
                side_a.iter().filter(|l| *l != qubit_a).cloned().collect(),
            )?)?;
            let pb = basis_projector(qubit_b, b)?.tensor(&Operator::identity(
                side_b.iter().filter(|l| *l != qubit_b).cloned().collect(),
            )?)?;
            branches.push(Branch { label: format!("z{a}{b}"), kraus: Kraus::Product { a: pa, b: pb } });
        }
    }
    let register = ens.full_register();
    let guess = assign_guesses(ens, &register, &branches, GuessRule::MaxLikelihood)?;
    KrausInstrument::new(register, branches, guess)
}

/// Non-local Bell-basis projective measurement `K^j = |Φʲ><Φʲ|` on `(a, b)`.
pub fn bell_basis_instrument(ens: &Ensemble, a: &str, b: &str) -> Result<KrausInstrument> {
    let rest: Vec<String> = ens.full_register().into_iter().filter(|l| l != a && l != b).collect();
    let branches = (0..4u8)
        .map(|j| {
            let mut k = Operator::projector(&bell_state(j, a, b)?)?;
            if !rest.is_empty() {
                k = k.tensor(&Operator::identity(rest.clone())?)?;
            }
            Ok(Branch { label: format!("bell{j}"), kraus: Kraus::Joint(k) })
        })
        .collect::<Result<Vec<_>>>()?;
    let register = ens.full_register();
    let guess = assign_guesses(ens, &register, &branches, GuessRule::MaxLikelihood)?;
    KrausInstrument::new(register, branches, guess)
}

/// Index `j` with `psi = Φʲ` on `(a, b)` up to phase.
pub fn bell_index(psi: &StateVector, a: &str, b: &str) -> Option<u8> {
    (0..4u8).find(|&j| {
        bell_state(j, a, b)
            .and_then(|phi| phi.inner(psi))
            .map(|o| (o.norm() - 1.0).abs() < TOL)
            .unwrap_or(false)
    })
}

/// Local Pauli `σ_j` with `Φʲ = (σ_j ⊗ 1) Φ⁰`: `I, Z, X, XZ`.
fn bell_pauli(j: u8, label: &str) -> Result<Operator> {
    let m = match j {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ONE, ZERO, ZERO, -ONE],
        2 => [ZERO, ONE, ONE, ZERO],
        _ => [ZERO, -ONE, ONE, ZERO],
    };
    Operator::new(DMatrix::from_row_slice(2, 2, &m), vec![label.to_string()])
}

fn pauli_x(label: &str) -> Result<Operator> {
    bell_pauli(2, label)
}

fn swap(p: &str, q: &str) -> Result<Operator> {
    let mut m = DMatrix::<C64>::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    Operator::new(m, vec![p.to_string(), q.to_string()])
}

/// Chains operators right-to-left (`ops[0]` applied first) on `register`.
fn chain(ops: &[Operator], register: &[String]) -> Result<Operator> {
    let mut acc = Operator::identity(register.to_vec())?;
    for op in ops {
        acc = op.embed(register)?.compose(&acc)?;
    }
    Ok(acc)
}

/// `|ket><bra|` between a product basis state and a Bell state on `(p, q)`.
fn reset_from_bell(j: u8, p: &str, q: &str) -> Result<Operator> {
    Operator::outer(&StateVector::basis(&[0, 0], vec![p.into(), q.into()])?, &bell_state(j, p, q)?)
}

fn require_pair_layout(ens: &Ensemble, ebits: u32) -> Result<(&str, &str)> {
    if ens.side_a.len() != 1 || ens.side_b.len() != 1 {
        return Err(Error::InvalidParams("expected a single Bell pair per state".into()));
    }
    match &ens.preshared {
        Some(p) if p.ebits == ebits => Ok((ens.side_a[0].as_str(), ens.side_b[0].as_str())),
        _ => Err(Error::InvalidParams(format!("expected exactly {ebits} pre-shared ebit(s)"))),
    }
}

/// Discriminate-and-reprepare with one pre-shared ebit for two Bell states of opposite `ZZ` sign.
///
/// Branch `(a, b)` projects `A, B` onto `|a b>`, resets both qubits, swaps the
/// resource pair into `A B` and rotates it into the guessed Bell state. Every
/// Kraus operator is `K_A^{ab} ⊗ K_B^{ab}`.
pub fn repreparation_instrument(ens: &Ensemble) -> Result<KrausInstrument> {
    let (a, b) = require_pair_layout(ens, 1)?;
    let bell: Vec<u8> = ens
        .states
        .iter()
        .map(|s| bell_index(s, a, b).ok_or_else(|| Error::InvalidParams("states must be Bell states".into())))
        .collect::<Result<_>>()?;
    // parity of the Z outcomes → ensemble index
    let by_parity = |parity: u8| bell.iter().position(|&j| (j >= 2) as u8 == parity);
    let (p0, p1) = match (by_parity(0), by_parity(1), bell.len()) {
        (Some(x), Some(y), 2) => (x, y),
        _ => return Err(Error::InvalidParams("need one Bell state of each ZZ sign".into())),
    };
    let pre = ens.preshared.as_ref().expect("checked");
    let (ra, rb) = (pre.side_a[0].as_str(), pre.side_b[0].as_str());
    let side_a = ens.full_side_a();
    let side_b = ens.full_side_b();
    let mut branches = Vec::new();
    let mut guess = Vec::new();
    for x in 0..2u8 {
        for y in 0..2u8 {
            let z = if x ^ y == 0 { p0 } else { p1 };
            let mut ops_a = vec![basis_projector(a, x)?];
            if x == 1 {
                ops_a.push(pauli_x(a)?);
            }
            ops_a.push(swap(a, ra)?);
            ops_a.push(bell_pauli(bell[z], a)?);
            let mut ops_b = vec![basis_projector(b, y)?];
            if y == 1 {
                ops_b.push(pauli_x(b)?);
            }
            ops_b.push(swap(b, rb)?);
            branches.push(Branch {
                label: format!("z{x}{y}"),
                kraus: Kraus::Product { a: chain(&ops_a, &side_a)?, b: chain(&ops_b, &side_b)? },
            });
            guess.push(z);
        }
    }
    KrausInstrument::new(ens.full_register(), branches, guess)
}

/// Teleport-then-discriminate-then-reprepare with two pre-shared ebits.
///
/// Bob Bell-measures `B` with his half of the first resource pair (outcome
/// `m`), Alice applies the teleportation correction and Bell-measures `A` with
/// the teleported qubit (outcome `j`), then both swap in the second resource
/// pair and Alice rotates it into `Φʲ`. Branches are labeled `(m, j)`.
pub fn teleportation_instrument(ens: &Ensemble) -> Result<KrausInstrument> {
    let (a, b) = require_pair_layout(ens, 2)?;
    let pre = ens.preshared.as_ref().expect("checked");
    let (a1, a2) = (pre.side_a[0].as_str(), pre.side_a[1].as_str());
    let (b1, b2) = (pre.side_b[0].as_str(), pre.side_b[1].as_str());
    let side_a = ens.full_side_a();
    let side_b = ens.full_side_b();
    let index_of: Vec<Option<usize>> = (0..4u8)
        .map(|j| ens.states.iter().position(|s| bell_index(s, a, b) == Some(j)))
        .collect();
    let mut branches = Vec::new();
    let mut guess = Vec::new();
    for m in 0..4u8 {
        let kb = chain(&[reset_from_bell(m, b, b1)?, swap(b, b2)?], &side_b)?;
        for j in 0..4u8 {
            let ka = chain(
                &[bell_pauli(m, a1)?, reset_from_bell(j, a, a1)?, swap(a, a2)?, bell_pauli(j, a)?],
                &side_a,
            )?;
            branches.push(Branch { label: format!("m{m}j{j}"), kraus: Kraus::Product { a: ka, b: kb.clone() } });
            guess.push(index_of[j as usize].unwrap_or(0));
        }
    }
    KrausInstrument::new(ens.full_register(), branches, guess)
}

/// Uniform ensemble of single-pair Bell states `Φʲ` on `(A, B)`.
pub fn bell_ensemble(indices: &[u8]) -> Result<Ensemble> {
    let states = indices
        .iter()
        .map(|&j| bell_state(j, "A", "B"))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::uniform(states, vec!["A".into()], vec!["B".into()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::labels;
    use crate::states::{ghz_family, ghz_labels, ghz_three};

    #[test]
    fn trivial_instrument_is_random_guessing() {
        let ens = bell_ensemble(&[0, 1, 2, 3]).unwrap();
        let inst = trivial_instrument(&ens, 0).unwrap();
        let rep = ndsd_success(&ens, &inst).unwrap();
        assert!((rep.ndsd - 0.25).abs() < 1e-12);
        assert!((rep.conventional - 0.25).abs() < 1e-12);
    }

    #[test]
    fn local_z_on_two_bell_states() {
        let ens = bell_ensemble(&[0, 2]).unwrap();
        let inst = local_z_instrument(&ens, "A", "B").unwrap();
        assert!(inst.is_product_form());
        let rep = ndsd_success(&ens, &inst).unwrap();
        assert!((rep.ndsd - 0.5).abs() < 1e-12);
        assert!((rep.conventional - 1.0).abs() < 1e-12);
        // each guessed branch leaves a product state: fidelity 1/2
        for d in rep.diagnostics.iter().filter(|d| d.guessed && d.probability > 0.0) {
            assert!((d.probability - 0.5).abs() < 1e-12);
            assert!((d.fidelity - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_basis_measurement_is_perfect() {
        let ens = bell_ensemble(&[0, 1, 2, 3]).unwrap();
        let inst = bell_basis_instrument(&ens, "A", "B").unwrap();
        assert!(!inst.is_product_form());
        let rep = ndsd_success(&ens, &inst).unwrap();
        assert!((rep.ndsd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_instruments_are_rejected() {
        let ens = bell_ensemble(&[0, 2]).unwrap();
        let half = basis_projector("A", 0)
            .unwrap()
            .tensor(&Operator::identity(labels(&["B"])).unwrap())
            .unwrap();
        let err = KrausInstrument::new(
            labels(&["A", "B"]),
            vec![Branch { label: "p0".into(), kraus: Kraus::Joint(half) }],
            vec![0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompleteInstrument(_)));
        assert!(ens.k() == 2);
    }

    #[test]
    fn ensemble_validation() {
        let phi0 = bell_state(0, "A", "B").unwrap();
        let err = Ensemble::uniform(vec![phi0.clone(), phi0.clone()], labels(&["A"]), labels(&["B"])).unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal(0, 1, _)));
        let err = Ensemble::new(vec![phi0.clone()], vec![0.5], labels(&["A"]), labels(&["B"])).unwrap_err();
        assert!(matches!(err, Error::InvalidProbabilities(_)));
        let err = Ensemble::uniform(vec![phi0], labels(&["A"]), labels(&["C"])).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel(_)));
    }

    #[test]
    fn separable_bound_examples() {
        let b = theorem1_bound(&bell_ensemble(&[0, 1, 2]).unwrap()).unwrap();
        assert!((b.value - 1.0 / 3.0).abs() < 1e-12);
        assert!(!b.vacuous);

        let prod = |bits: &[u8]| StateVector::basis(bits, labels(&["A", "B"])).unwrap();
        let ens = Ensemble::uniform(vec![prod(&[0, 0]), prod(&[1, 1])], labels(&["A"]), labels(&["B"])).unwrap();
        let b = theorem1_bound(&ens).unwrap();
        assert!((b.value - 2.0).abs() < 1e-12);
        assert!(b.vacuous && b.clipped == 1.0);

        let ghz: Vec<_> = ghz_family(&ghz_three()).unwrap().into_iter().map(|s| s.state).collect();
        let reg = ghz_labels(3);
        for i in 0..3 {
            let a = vec![reg[i].clone()];
            let rest: Vec<String> = reg.iter().filter(|l| **l != reg[i]).cloned().collect();
            let ens = Ensemble::uniform(ghz.clone(), a, rest).unwrap();
            assert!((theorem1_bound(&ens).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn preshared_bound_examples() {
        assert_eq!(theorem2_bound(4, 2), 1.0);
        assert_eq!(theorem2_bound(2, 1), 1.0);
        assert_eq!(theorem2_bound(4, 0), 0.25);
    }

    #[test]
    fn sampled_instruments_are_complete_and_product() {
        let ens = bell_ensemble(&[0, 2]).unwrap();
        for (seed, ad) in [(1, Adaptivity::Product), (2, Adaptivity::OneWay)] {
            let inst = sample_separable_instrument(&ens, 3, ad, seed).unwrap();
            assert!(inst.completeness_residual().unwrap() < COMPLETENESS_TOL);
            assert!(inst.is_product_form());
            assert_eq!(inst.len(), 9);
        }
        assert_eq!(
            sample_separable_instrument(&ens, 2, Adaptivity::Product, 7).unwrap(),
            sample_separable_instrument(&ens, 2, Adaptivity::Product, 7).unwrap()
        );
    }

    #[test]
    fn sampled_maxima_respect_random_guessing() {
        let ens = bell_ensemble(&[0, 2]).unwrap();
        let s = sample_bounds(&ens, 500, 2, Adaptivity::OneWay, 11).unwrap();
        assert!(s.max_ndsd <= 0.5 + 1e-7, "{}", s.max_ndsd);
        assert!(s.max_residual < COMPLETENESS_TOL);
    }

    #[test]
    fn attach_preshared_extends_the_cut() {
        let ens = bell_ensemble(&[0, 2]).unwrap();
        assert_eq!(attach_preshared(&ens, 1).unwrap(), ens);
        let e2 = attach_preshared(&ens, 4).unwrap();
        assert_eq!(e2.full_side_a(), labels(&["A", "A'1", "A'2"]));
        assert_eq!(e2.full_side_b(), labels(&["B", "B'1", "B'2"]));
        let alpha = &e2.preshared().unwrap().state;
        // α = (1/2) Σ_ℓ |ℓ>|ℓ> on A'1 A'2 B'1 B'2
        for (i, amp) in alpha.amplitudes().iter().enumerate() {
            let expected = if i >> 2 == i & 3 { 0.5 } else { 0.0 };
            assert!((amp.re - expected).abs() < 1e-12 && amp.im.abs() < 1e-12);
        }
        assert!(attach_preshared(&ens, 3).is_err());
    }

    #[test]
    fn repreparation_with_one_ebit_is_perfect() {
        let ens = attach_preshared(&bell_ensemble(&[0, 2]).unwrap(), 2).unwrap();
        let inst = repreparation_instrument(&ens).unwrap();
        assert!(inst.is_product_form());
        let rep = ndsd_success(&ens, &inst).unwrap();
        assert!((rep.ndsd - 1.0).abs() < 1e-9, "{}", rep.ndsd);
    }

    #[test]
    fn teleportation_with_two_ebits_is_perfect() {
        let ens = attach_preshared(&bell_ensemble(&[0, 1, 2, 3]).unwrap(), 4).unwrap();
        let inst = teleportation_instrument(&ens).unwrap();
        assert!(inst.is_product_form());
        let rep = ndsd_success(&ens, &inst).unwrap();
        assert!((rep.ndsd - 1.0).abs() < 1e-9, "{}", rep.ndsd);
    }

    #[test]
    fn optimizer_on_single_state_finds_identity() {
        let ens = bell_ensemble(&[0]).unwrap();
        let cfg = SearchConfig { outcomes: 2, restarts: 4, iterations: 50, seed: 3 };
        let r = optimize_separable(&ens, &cfg).unwrap();
        assert!((r.probability - 1.0).abs() < 1e-9);
    }

    #[test]
    fn optimizer_respects_bound_on_small_budget() {
        let ens = bell_ensemble(&[0, 2]).unwrap();
        let cfg = SearchConfig { outcomes: 2, restarts: 8, iterations: 300, seed: 5 };
        let r = optimize_separable(&ens, &cfg).unwrap();
        assert!(r.probability <= 0.5 + 1e-6, "{}", r.probability);
        assert!(r.probability >= 0.5 - 1e-9);
        assert!(r.instrument.completeness_residual().unwrap() < COMPLETENESS_TOL);
    }
}
