//! Non-destructive parity measurements, adaptive strategy trees and ebit accounting.
//!
//! A two-party Pauli parity `P_A P_B` is measured with one shared `Φ⁰`:
//! each party applies `1⊗|0><0| + P⊗|1><1|` controlled by its half of the
//! pair, both halves are read in the `|±>` basis, and coinciding outcomes
//! signal the `+1` eigenspace. Each call consumes exactly one ebit.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instruments::Ensemble;
use crate::linalg::{apply, fidelity_pure, schmidt_coefficients, Operator, StateVector, Tensor, C64, ONE};
use crate::states::{bell_state, PauliString, Sign, SignTable};

/// Tolerance used to decide that a branch occurs with certainty.
pub const CERTAINTY_TOL: f64 = 1e-9;

pub(crate) mod ratio {
    use num_rational::Rational64;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational64>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| s.parse().map_err(D::Error::custom))
                .collect()
        }
    }
}

/// One sign branch of a parity measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityOutcome {
    pub sign: Sign,
    pub probability: f64,
    /// Renormalized post-measurement state; the zero vector when `probability` is 0.
    pub post_state: StateVector,
    pub ebits_consumed: u32,
}

/// Which party holds each qubit label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parties {
    assignment: Vec<(String, String)>,
}

impl Parties {
    /// Two parties `A` and `B`.
    pub fn bipartite(side_a: &[String], side_b: &[String]) -> Self {
        let assignment = side_a
            .iter()
            .map(|l| (l.clone(), "A".to_string()))
            .chain(side_b.iter().map(|l| (l.clone(), "B".to_string())))
            .collect();
        Self { assignment }
    }

    /// Every qubit held by a different party.
    pub fn per_qubit(register: &[String]) -> Self {
        Self { assignment: register.iter().map(|l| (l.clone(), l.clone())).collect() }
    }

    pub fn party_of(&self, label: &str) -> Option<&str> {
        self.assignment.iter().find(|(l, _)| l == label).map(|(_, p)| p.as_str())
    }

    /// Labels of the first party touched by `generator`, the side `A` of the gadget.
    ///
    /// Fails when the generator's support spans more than two parties.
    pub fn gadget_side(&self, generator: &PauliString, register: &[String]) -> Result<Vec<String>> {
        if generator.num_qubits() != register.len() {
            return Err(Error::PauliLength(generator.num_qubits(), register.len()));
        }
        let mut parties: Vec<&str> = Vec::new();
        for q in generator.support() {
            let p = self.party_of(&register[q]).ok_or_else(|| Error::UnknownLabel(register[q].clone()))?;
            if !parties.contains(&p) {
                parties.push(p);
            }
        }
        if parties.len() > 2 {
            return Err(Error::NotTwoParty(generator.to_string()));
        }
        let first = parties.first().copied();
        Ok(register
            .iter()
            .filter(|l| first.is_some() && self.party_of(l) == first)
            .cloned()
            .collect())
    }
}

/// `|ψ> ⊗ |Φ⁰>` on fresh resource labels `(a, b)`.
pub fn append_resource(psi: &StateVector, a: &str, b: &str) -> Result<StateVector> {
    psi.tensor(&bell_state(0, a, b)?)
}

/// `1⊗|0><0|_c + P⊗|1><1|_c` on `targets ++ [control]`.
fn controlled_pauli(p: &PauliString, targets: &[String], control: &str) -> Result<Operator> {
    let pm = p.to_matrix();
    let d = pm.nrows();
    let mut m = DMatrix::<C64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        m[(2 * i, 2 * i)] = ONE;
        for j in 0..d {
            m[(2 * i + 1, 2 * j + 1)] = pm[(i, j)];
        }
    }
    let mut acts_on = targets.to_vec();
    acts_on.push(control.to_string());
    Operator::new(m, acts_on)
}

fn plus_minus(bit: u8, label: &str) -> Result<StateVector> {
    let s = if bit == 0 { 1.0 } else { -1.0 };
    StateVector::from_real(&[1.0, s], vec![label.to_string()])
}

fn generator_sign(generator: &PauliString) -> Result<Sign> {
    match generator.phase().power() {
        0 => Ok(Sign::Plus),
        2 => Ok(Sign::Minus),
        _ => Err(Error::InvalidParams(format!("{generator} is not Hermitian"))),
    }
}

fn outcome(sign: Sign, branch: StateVector, probability: f64) -> ParityOutcome {
    let post_state = if probability > 0.0 { branch.normalized() } else { branch };
    ParityOutcome { sign, probability, post_state, ebits_consumed: 1 }
}

/// Simulates the parity gadget on `psi`, which must already hold `Φ⁰` on `resource`.
///
/// `generator` is positional over `register`; its letters on `side_a` form
/// `P_A`, the others `P_B`. Returns the `+` and `−` branches of the
/// generator's sign, with the resource labels removed.
pub fn parity_measure(
    psi: &StateVector,
    generator: &PauliString,
    register: &[String],
    side_a: &[String],
    resource: (&str, &str),
) -> Result<[ParityOutcome; 2]> {
    if generator.num_qubits() != register.len() {
        return Err(Error::PauliLength(generator.num_qubits(), register.len()));
    }
    let (ra, rb) = resource;
    let fid = psi.contract(&bell_state(0, ra, rb)?)?.norm_sqr();
    if (fid - 1.0).abs() > CERTAINTY_TOL {
        return Err(Error::ResourceNotBell(fid));
    }
    let overall = generator_sign(generator)?;
    let (pos_a, pos_b): (Vec<usize>, Vec<usize>) = generator.support().into_iter().partition(|&q| side_a.contains(&register[q]));
    let mut state = psi.clone();
    for (positions, control) in [(pos_a, ra), (pos_b, rb)] {
        if positions.is_empty() {
            continue;
        }
        let targets: Vec<String> = positions.iter().map(|&q| register[q].clone()).collect();
        state = apply(&controlled_pauli(&generator.restrict(&positions), &targets, control)?, &state)?;
    }
    // coinciding readouts project onto (1+P)/2, opposite ones onto (1−P)/2
    let mut same = None;
    let mut opposite = None;
    let mut p_same = 0.0;
    let mut p_opposite = 0.0;
    for sa in 0..2u8 {
        for sb in 0..2u8 {
            let bra = plus_minus(sa, ra)?.tensor(&plus_minus(sb, rb)?)?;
            let branch = state.contract(&bra)?;
            let p = branch.norm_sqr();
            let (slot, total) = if sa == sb { (&mut same, &mut p_same) } else { (&mut opposite, &mut p_opposite) };
            *total += p;
            if slot.as_ref().is_none_or(|(q, _): &(f64, StateVector)| p > *q) {
                *slot = Some((p, branch));
            }
        }
    }
    let same = outcome(overall, same.expect("four readouts").1, p_same);
    let opposite = outcome(overall.flip(), opposite.expect("four readouts").1, p_opposite);
    Ok(if overall == Sign::Plus { [same, opposite] } else { [opposite, same] })
}

/// Direct application of `(1 ± P)/2`; the reference for [`parity_measure`].
pub fn project_parity(psi: &StateVector, generator: &PauliString, register: &[String]) -> Result<[ParityOutcome; 2]> {
    let p = generator.to_operator(register)?;
    let pp = apply(&p, psi)?;
    let half = C64::new(0.5, 0.0);
    let branch = |s: f64| {
        let amps = psi
            .amplitudes()
            .iter()
            .zip(pp.amplitudes())
            .map(|(a, b)| (a + b * s) * half)
            .collect();
        StateVector::unnormalized(amps, pp.register().to_vec())
    };
    let plus = branch(1.0)?;
    let minus = branch(-1.0)?;
    let (pp_, pm) = (plus.norm_sqr(), minus.norm_sqr());
    Ok([outcome(Sign::Plus, plus, pp_), outcome(Sign::Minus, minus, pm)])
}

/// How [`build_strategy`] picks the next generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyMode {
    /// Minimum expected number of measurements, ties to the lowest column.
    Optimal,
    /// Most balanced probability split, ties to the lowest column.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyNode {
    Leaf { state: usize },
    Measure { column: usize, generator: PauliString, plus: Box<StrategyNode>, minus: Box<StrategyNode> },
}

impl StrategyNode {
    fn measurements(&self) -> usize {
        match self {
            StrategyNode::Leaf { .. } => 0,
            StrategyNode::Measure { plus, minus, .. } => 1 + plus.measurements() + minus.measurements(),
        }
    }
}

/// Adaptive sign-reading protocol over a [`SignTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyTree {
    pub table: SignTable,
    #[serde(with = "ratio::vec")]
    pub probs: Vec<Rational64>,
    pub mode: StrategyMode,
    pub root: StrategyNode,
}

impl StrategyTree {
    /// Leaf guess and depth reached by state `z` under its true signs.
    pub fn walk(&self, z: usize) -> (usize, u32) {
        let mut node = &self.root;
        let mut depth = 0;
        loop {
            match node {
                StrategyNode::Leaf { state } => return (*state, depth),
                StrategyNode::Measure { column, plus, minus, .. } => {
                    depth += 1;
                    node = match self.table.entry(z, *column) {
                        Sign::Plus => plus,
                        Sign::Minus => minus,
                    };
                }
            }
        }
    }

    /// Ebits consumed for each state.
    pub fn depths(&self) -> Vec<u32> {
        (0..self.table.num_states()).map(|z| self.walk(z).1).collect()
    }

    /// Every state reaches a leaf naming itself.
    pub fn is_valid(&self) -> bool {
        (0..self.table.num_states()).all(|z| self.walk(z).0 == z)
    }

    pub fn num_measure_nodes(&self) -> usize {
        self.root.measurements()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidParams(e.to_string()))
    }
}

/// Uniform rational prior over `k` states.
pub fn uniform_probs(k: usize) -> Vec<Rational64> {
    vec![Rational64::new(1, k as i64); k]
}

fn check_probs(table: &SignTable, probs: &[Rational64]) -> Result<()> {
    if probs.len() != table.num_states() {
        return Err(Error::DimensionMismatch { expected: table.num_states(), found: probs.len() });
    }
    if probs.iter().any(|p| *p < Rational64::from_integer(0)) || probs.iter().sum::<Rational64>() != Rational64::from_integer(1) {
        return Err(Error::InvalidProbabilities("rational weights must be nonnegative and sum to 1".into()));
    }
    Ok(())
}

type Mask = u128;

fn members(mask: Mask) -> impl Iterator<Item = usize> {
    (0..128).filter(move |i| mask >> i & 1 == 1)
}

fn split(table: &SignTable, mask: Mask, column: usize) -> (Mask, Mask) {
    let mut plus = 0;
    for z in members(mask) {
        if table.entry(z, column) == Sign::Plus {
            plus |= 1 << z;
        }
    }
    (plus, mask & !plus)
}

fn weight(probs: &[Rational64], mask: Mask) -> Rational64 {
    members(mask).map(|z| probs[z]).sum()
}

struct Planner<'a> {
    table: &'a SignTable,
    probs: &'a [Rational64],
    memo: HashMap<Mask, (Rational64, usize)>,
}

impl Planner<'_> {
    /// Minimum of `Σ_{z∈S} p_z depth_z` and the first column achieving it.
    fn best(&mut self, mask: Mask) -> Rational64 {
        if mask.count_ones() <= 1 {
            return Rational64::from_integer(0);
        }
        if let Some(&(c, _)) = self.memo.get(&mask) {
            return c;
        }
        let here = weight(self.probs, mask);
        let mut best: Option<(Rational64, usize)> = None;
        for col in 0..self.table.num_generators() {
            let (plus, minus) = split(self.table, mask, col);
            if plus == 0 || minus == 0 {
                continue;
            }
            let cost = here + self.best(plus) + self.best(minus);
            if best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, col));
            }
        }
        let best = best.expect("distinct rows always split");
        self.memo.insert(mask, best);
        best.0
    }

    fn node(&mut self, mask: Mask, mode: StrategyMode) -> StrategyNode {
        if mask.count_ones() <= 1 {
            return StrategyNode::Leaf { state: mask.trailing_zeros() as usize };
        }
        let column = match mode {
            StrategyMode::Optimal => {
                self.best(mask);
                self.memo[&mask].1
            }
            StrategyMode::Greedy => {
                let mut best: Option<(Rational64, usize)> = None;
                for col in 0..self.table.num_generators() {
                    let (plus, minus) = split(self.table, mask, col);
                    if plus == 0 || minus == 0 {
                        continue;
                    }
                    let diff = weight(self.probs, plus) - weight(self.probs, minus);
                    let imbalance = diff.max(-diff);
                    if best.is_none_or(|(b, _)| imbalance < b) {
                        best = Some((imbalance, col));
                    }
                }
                best.expect("distinct rows always split").1
            }
        };
        let (plus, minus) = split(self.table, mask, column);
        StrategyNode::Measure {
            column,
            generator: self.table.generators[column].clone(),
            plus: Box::new(self.node(plus, mode)),
            minus: Box::new(self.node(minus, mode)),
        }
    }
}

/// Builds an adaptive decision tree reading generator signs until one row survives.
pub fn build_strategy(table: &SignTable, probs: &[Rational64], mode: StrategyMode) -> Result<StrategyTree> {
    check_probs(table, probs)?;
    if table.num_states() > 128 {
        return Err(Error::SizeLimit(format!("{} rows > 128", table.num_states())));
    }
    if let Some((i, j)) = table.duplicate_rows() {
        return Err(Error::Indistinguishable(i, j));
    }
    let all: Mask = if table.num_states() == 128 { Mask::MAX } else { (1 << table.num_states()) - 1 };
    let mut planner = Planner { table, probs, memo: HashMap::new() };
    let root = planner.node(all, mode);
    Ok(StrategyTree { table: table.clone(), probs: probs.to_vec(), mode, root })
}

/// `Σ_z p_z depth_z`.
pub fn average_cost(tree: &StrategyTree) -> Rational64 {
    tree.depths()
        .iter()
        .zip(&tree.probs)
        .map(|(&d, p)| p * Rational64::from_integer(d as i64))
        .sum()
}

/// Per-state ebits, their average and a comparison figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub states: Vec<Vec<u8>>,
    pub per_state_ebits: Vec<u32>,
    #[serde(with = "ratio")]
    pub average_ebits: Rational64,
    /// Cost of the teleportation-based method for the same task.
    #[serde(with = "ratio")]
    pub comparison: Rational64,
}

impl CostReport {
    pub fn new(tree: &StrategyTree, comparison: Rational64) -> Self {
        Self {
            states: tree.table.states.clone(),
            per_state_ebits: tree.depths(),
            average_ebits: average_cost(tree),
            comparison,
        }
    }

    /// Sorted per-state costs.
    pub fn multiset(&self) -> Vec<u32> {
        let mut v = self.per_state_ebits.clone();
        v.sort_unstable();
        v
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidParams(e.to_string()))
    }

    /// One row per state: `state,ebits`, then the average and comparison rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidParams(e.to_string());
        w.write_record(["state", "ebits"]).map_err(io)?;
        for (id, e) in self.states.iter().zip(&self.per_state_ebits) {
            let name: String = id.iter().map(|d| d.to_string()).collect();
            w.write_record([name, e.to_string()]).map_err(io)?;
        }
        w.write_record(["average".to_string(), self.average_ebits.to_string()]).map_err(io)?;
        w.write_record(["teleportation".to_string(), self.comparison.to_string()]).map_err(io)?;
        let bytes = w.into_inner().map_err(|e| Error::InvalidParams(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Result of running a strategy on one hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub guess: usize,
    pub final_state: StateVector,
    pub ebits: u32,
    pub fidelity: f64,
    /// Generators read, with the observed signs.
    pub readings: Vec<(PauliString, Sign)>,
}

const RESOURCE_LABELS: (&str, &str) = ("R_A", "R_B");

/// Executes the tree with the parity gadget on `hidden`.
///
/// Every visited generator must have a definite sign on the hidden state;
/// a branch that is not certain raises [`Error::NotEigenstate`].
pub fn run_strategy(tree: &StrategyTree, parties: &Parties, hidden: &StateVector) -> Result<RunOutcome> {
    let register = &tree.table.register;
    let mut state = hidden.permuted(register)?;
    for l in [RESOURCE_LABELS.0, RESOURCE_LABELS.1] {
        if register.iter().any(|r| r == l) {
            return Err(Error::LabelCollision(l.into()));
        }
    }
    let mut node = &tree.root;
    let mut readings = Vec::new();
    loop {
        match node {
            StrategyNode::Leaf { state: guess } => {
                let fidelity = fidelity_pure(&state, hidden)?;
                return Ok(RunOutcome {
                    guess: *guess,
                    final_state: state,
                    ebits: readings.len() as u32,
                    fidelity,
                    readings,
                });
            }
            StrategyNode::Measure { generator, plus, minus, .. } => {
                let side_a = parties.gadget_side(generator, register)?;
                let with_pair = append_resource(&state, RESOURCE_LABELS.0, RESOURCE_LABELS.1)?;
                let branches = parity_measure(&with_pair, generator, register, &side_a, RESOURCE_LABELS)?;
                let taken = branches
                    .into_iter()
                    .find(|b| b.probability > 1.0 - CERTAINTY_TOL)
                    .ok_or_else(|| Error::NotEigenstate {
                        generator: generator.to_string(),
                        expectation: "indefinite parity".into(),
                    })?;
                readings.push((generator.clone(), taken.sign));
                state = taken.post_state;
                node = if taken.sign == Sign::Plus { plus } else { minus };
            }
        }
    }
}

/// Optimal binary prefix-code lengths for `m` equiprobable words, ascending.
///
/// For `m = 2^n + k` with `0 ≤ k < 2^n`: `2^n − k` words of length `n` and
/// `2k` of length `n + 1`.
pub fn optimal_prefix_lengths(m: usize) -> Result<Vec<u32>> {
    if m == 0 {
        return Err(Error::NoWords);
    }
    let n = usize::BITS - 1 - m.leading_zeros();
    let k = m - (1 << n);
    let mut lengths = vec![n; (1 << n) - k];
    lengths.extend(std::iter::repeat_n(n + 1, 2 * k));
    Ok(lengths)
}

/// `Σ 2^{−ℓ}`.
pub fn kraft_sum(lengths: &[u32]) -> Rational64 {
    lengths.iter().map(|&l| Rational64::new(1, 1i64 << l)).sum()
}

/// Largest word count accepted by [`brute_force_prefix_lengths`].
pub const PREFIX_ORACLE_LIMIT: usize = 24;

/// Exhaustive search for the minimum-total-length prefix code on `m` words.
///
/// Enumerates nondecreasing length sequences in `1..m` satisfying Kraft's
/// inequality; returns the first minimizer in lexicographic order.
pub fn brute_force_prefix_lengths(m: usize) -> Result<Vec<u32>> {
    if m == 0 {
        return Err(Error::NoWords);
    }
    if m == 1 {
        return Ok(vec![0]);
    }
    if m > PREFIX_ORACLE_LIMIT {
        return Err(Error::SizeLimit(format!("{m} words > {PREFIX_ORACLE_LIMIT}")));
    }
    let max_len = (m - 1) as u32;
    let budget: u64 = 1 << max_len;
    // fixed-length code as the initial incumbent
    let fixed = usize::BITS - (m - 1).leading_zeros();
    let mut best = (vec![fixed; m], fixed as u64 * m as u64);
    let mut current = Vec::with_capacity(m);

    struct Space {
        m: usize,
        max_len: u32,
        budget: u64,
    }

    fn search(sp: &Space, start: u32, used: u64, total: u64, current: &mut Vec<u32>, best: &mut (Vec<u32>, u64)) {
        let remaining = (sp.m - current.len()) as u64;
        if remaining == 0 {
            if total < best.1 {
                *best = (current.clone(), total);
            }
            return;
        }
        for l in start..=sp.max_len {
            let cost = sp.budget >> l;
            if total + remaining * l as u64 >= best.1 {
                break;
            }
            if used + cost + (remaining - 1) * (sp.budget >> sp.max_len) > sp.budget {
                continue;
            }
            current.push(l);
            search(sp, l, used + cost, total + l as u64, current, best);
            current.pop();
        }
    }

    search(&Space { m, max_len, budget }, 1, 0, 0, &mut current, &mut best);
    Ok(best.0)
}

/// Limits of [`brute_force_optimal_cost`].
pub const BRUTE_FORCE_MAX_ROWS: usize = 8;
pub const BRUTE_FORCE_MAX_COLUMNS: usize = 8;

/// Minimum expected depth over every adaptive tree, by plain recursion.
///
/// Unlike [`build_strategy`] this has no memoization and also tries columns
/// that do not split the surviving rows.
pub fn brute_force_optimal_cost(table: &SignTable, probs: &[Rational64]) -> Result<Rational64> {
    check_probs(table, probs)?;
    if table.num_states() > BRUTE_FORCE_MAX_ROWS || table.num_generators() > BRUTE_FORCE_MAX_COLUMNS {
        return Err(Error::SizeLimit(format!(
            "{}x{} table exceeds {BRUTE_FORCE_MAX_ROWS}x{BRUTE_FORCE_MAX_COLUMNS}",
            table.num_states(),
            table.num_generators()
        )));
    }
    if let Some((i, j)) = table.duplicate_rows() {
        return Err(Error::Indistinguishable(i, j));
    }

    fn rec(table: &SignTable, probs: &[Rational64], rows: &[usize], used: &mut Vec<bool>) -> Option<Rational64> {
        if rows.len() <= 1 {
            return Some(Rational64::from_integer(0));
        }
        let here: Rational64 = rows.iter().map(|&z| probs[z]).sum();
        let mut best: Option<Rational64> = None;
        for c in 0..table.num_generators() {
            if used[c] {
                continue;
            }
            used[c] = true;
            let (plus, minus): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&z| table.entry(z, c) == Sign::Plus);
            if let (Some(a), Some(b)) = (rec(table, probs, &plus, used), rec(table, probs, &minus, used)) {
                let cost = here + a + b;
                if best.is_none_or(|x| cost < x) {
                    best = Some(cost);
                }
            }
            used[c] = false;
        }
        best
    }

    let rows: Vec<usize> = (0..table.num_states()).collect();
    Ok(rec(table, probs, &rows, &mut vec![false; table.num_generators()]).expect("distinct rows are separable"))
}

/// Teleport one share (`log₂ d`) and reprepare (`log₂ d`), in ebits.
///
/// Two states are locally distinguishable, so `k = 2` needs only the
/// repreparation; `k ≤ 1` needs nothing.
pub fn teleportation_cost_model(k: usize, d: u64, repreparation: bool) -> Result<Rational64> {
    if !d.is_power_of_two() {
        return Err(Error::InvalidParams(format!("local dimension {d} is not a power of two")));
    }
    let log_d = Rational64::from_integer(d.trailing_zeros() as i64);
    let rep = if repreparation { log_d } else { Rational64::from_integer(0) };
    Ok(match k {
        0 | 1 => Rational64::from_integer(0),
        2 => rep,
        _ => log_d + rep,
    })
}

/// Entanglement of each state (log₂ Schmidt rank) minus the tree's average cost.
///
/// Every ensemble state must be maximally entangled across the ensemble's cut.
pub fn entanglement_balance(ens: &Ensemble, tree: &StrategyTree) -> Result<Rational64> {
    let e = ens.side_a().len().min(ens.side_b().len());
    let expected = (-(e as f64) / 2.0).exp2();
    for (z, s) in ens.states().iter().enumerate() {
        let xi = schmidt_coefficients(s, ens.side_a())?;
        let rank_ok = xi.iter().filter(|&&x| x > 1e-9).count() == 1 << e;
        if !rank_ok || xi.iter().take(1 << e).any(|x| (x - expected).abs() > 1e-9) {
            return Err(Error::NotMaximallyEntangled(z));
        }
    }
    Ok(Rational64::from_integer(e as i64) - average_cost(tree))
}

impl fmt::Display for StrategyNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyNode::Leaf { state } => write!(f, "{state}"),
            StrategyNode::Measure { generator, plus, minus, .. } => {
                write!(f, "{}?(+: {plus}, -: {minus})", generator.operator_label())
            }
        }
    }
}
