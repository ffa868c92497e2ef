//! Word-trace test for local-unitary equivalence of multi-Bell-pair sets.
//!
//! A set `{|Ψ_i>} = {(U_i ⊗ 1)|ψ>}` is described by its Pauli operators `U_i`.
//! Two sets can only be equivalent if every word in the letters `U_i U_j†`
//! has the same trace magnitude for both. For Pauli words that magnitude is
//! `2^n` when the operator part is the identity and `0` otherwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::states::{pauli_mul, PauliString};

/// Words accepted by [`word_trace_profile`] before truncating.
pub const MAX_WORDS: usize = 1_000_000;

/// Ordered operators `U_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliSet {
    elements: Vec<PauliString>,
}

impl PauliSet {
    pub fn new(elements: Vec<PauliString>) -> Result<Self> {
        if let Some(first) = elements.first() {
            let n = first.num_qubits();
            if let Some(bad) = elements.iter().find(|e| e.num_qubits() != n) {
                return Err(Error::PauliLength(n, bad.num_qubits()));
            }
        }
        for (i, a) in elements.iter().enumerate() {
            if elements[..i].iter().any(|b| b.operator_label() == a.operator_label()) {
                return Err(Error::InvalidParams(format!("{a} appears twice")));
            }
        }
        Ok(Self { elements })
    }

    pub fn parse(labels: &[&str]) -> Result<Self> {
        Self::new(labels.iter().map(|l| l.parse()).collect::<Result<_>>()?)
    }

    /// `Φ^{j1 j2 ...} = (σ_{j1} ⊗ σ_{j2} ⊗ ... ⊗ 1)|Φ⁰...Φ⁰>` with `σ = I, Z, X, Y`.
    pub fn from_bell_ids(ids: &[Vec<u8>]) -> Result<Self> {
        let elements = ids
            .iter()
            .map(|id| {
                id.iter()
                    .map(|&j| match j {
                        0 => Ok('I'),
                        1 => Ok('Z'),
                        2 => Ok('X'),
                        3 => Ok('Y'),
                        _ => Err(Error::BellIndex(j)),
                    })
                    .collect::<Result<String>>()?
                    .parse()
            })
            .collect::<Result<_>>()?;
        Self::new(elements)
    }

    pub fn elements(&self) -> &[PauliString] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.elements.first().map_or(0, |e| e.num_qubits())
    }

    /// Every element replaced by `Q U_i Q†`.
    pub fn conjugated(&self, q: &PauliString) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|u| pauli_mul(&pauli_mul(q, u)?, &q.dagger()))
            .collect::<Result<_>>()?;
        Ok(Self { elements })
    }

    /// `U_i U_j†`.
    pub fn letter(&self, i: usize, j: usize) -> Result<PauliString> {
        pauli_mul(&self.elements[i], &self.elements[j].dagger())
    }

    /// Letters `(i, j)` with `i < j`, lexicographic.
    pub fn letters(&self) -> Vec<(usize, usize)> {
        let m = self.len();
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
    }

    /// `U_1 U_2 ... U_m`.
    pub fn all_elements_product(&self) -> Result<PauliString> {
        self.elements
            .iter()
            .try_fold(PauliString::identity(self.num_qubits()), |acc, u| pauli_mul(&acc, u))
    }
}

/// The six three-pair states `Φ^{012}, Φ^{021}, Φ^{102}, Φ^{120}, Φ^{201}, Φ^{210}`.
pub fn six_mes_set() -> PauliSet {
    PauliSet::parse(&["IZX", "IXZ", "ZIX", "ZXI", "XIZ", "XZI"]).expect("valid labels")
}

/// A set with all four Bell operators `I, Z, X, Y` on the first pair.
pub fn four_bell_comparator() -> PauliSet {
    PauliSet::parse(&["IZX", "ZXZ", "XIX", "YZI", "IXI", "ZZZ"]).expect("valid labels")
}

/// `{I, I, Z, Z, Z, Z}` on the first pair and the unbalanced `{X, Z, I, I, Z, Z}` on the second.
pub fn two_bell_comparator() -> PauliSet {
    PauliSet::parse(&["IXX", "IZX", "ZIX", "ZIZ", "ZZX", "ZZZ"]).expect("valid labels")
}

/// All distinct `U_i U_j†` (`i ≠ j`) by operator part, first occurrence kept.
pub fn generator_set(s: &PauliSet) -> Result<Vec<PauliString>> {
    let mut out: Vec<PauliString> = Vec::new();
    for i in 0..s.len() {
        for j in 0..s.len() {
            if i == j {
                continue;
            }
            let g = s.letter(i, j)?;
            if !out.iter().any(|o| o.operator_label() == g.operator_label()) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// A word: the product of all elements, or a sequence of letters `U_i U_j†`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Word {
    AllElements,
    Letters(Vec<(usize, usize)>),
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Word::AllElements => write!(f, "U1...Um"),
            Word::Letters(ls) => {
                for (i, j) in ls {
                    write!(f, "(U{}U{}†)", i + 1, j + 1)?;
                }
                Ok(())
            }
        }
    }
}

/// Evaluates `word` over `s` in the symplectic representation.
pub fn evaluate_word(s: &PauliSet, word: &Word) -> Result<PauliString> {
    match word {
        Word::AllElements => s.all_elements_product(),
        Word::Letters(ls) => ls
            .iter()
            .try_fold(PauliString::identity(s.num_qubits()), |acc, &(i, j)| pauli_mul(&acc, &s.letter(i, j)?)),
    }
}

/// `|Tr|` of a Pauli word: `2^n` for the identity operator part, else 0.
pub fn trace_magnitude(p: &PauliString) -> u64 {
    if p.is_identity_operator() {
        1 << p.num_qubits()
    } else {
        0
    }
}

/// `|Tr|` computed from dense matrices, independent of the symplectic product.
pub fn dense_word_trace(s: &PauliSet, word: &Word) -> f64 {
    let n = s.num_qubits();
    let mats: Vec<_> = s.elements.iter().map(|u| u.to_matrix()).collect();
    let mut acc = nalgebra::DMatrix::<C64>::identity(1 << n, 1 << n);
    match word {
        Word::AllElements => {
            for m in &mats {
                acc *= m;
            }
        }
        Word::Letters(ls) => {
            for &(i, j) in ls {
                acc = acc * &mats[i] * mats[j].adjoint();
            }
        }
    }
    acc.trace().norm()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordTrace {
    pub word: Word,
    /// Operator part of the product, e.g. `"XZY"`.
    pub operator: String,
    /// Product including its phase, e.g. `"-iXZY"`.
    pub product: PauliString,
    pub trace: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceProfile {
    pub num_qubits: usize,
    pub max_len: usize,
    /// Enumeration stopped at [`MAX_WORDS`].
    pub truncated: bool,
    pub entries: Vec<WordTrace>,
}

/// Visits words in canonical order: all-elements first, then letter sequences
/// by length, lexicographic within a length. Stops when `visit` returns false
/// or after `limit` words; returns whether the limit was hit.
fn enumerate_words(
    s: &PauliSet,
    max_len: usize,
    limit: usize,
    visit: &mut dyn FnMut(Word, PauliString) -> Result<bool>,
) -> Result<bool> {
    if !visit(Word::AllElements, s.all_elements_product()?)? {
        return Ok(false);
    }
    let letters: Vec<((usize, usize), PauliString)> = s
        .letters()
        .into_iter()
        .map(|(i, j)| Ok(((i, j), s.letter(i, j)?)))
        .collect::<Result<_>>()?;
    let mut count = 1usize;

    fn dfs(
        letters: &[((usize, usize), PauliString)],
        len: usize,
        prefix: &mut Vec<(usize, usize)>,
        product: &PauliString,
        count: &mut usize,
        limit: usize,
        visit: &mut dyn FnMut(Word, PauliString) -> Result<bool>,
    ) -> Result<Option<bool>> {
        if prefix.len() == len {
            if *count >= limit {
                return Ok(Some(true));
            }
            *count += 1;
            return Ok(if visit(Word::Letters(prefix.clone()), product.clone())? { None } else { Some(false) });
        }
        for (l, p) in letters {
            prefix.push(*l);
            let next = pauli_mul(product, p)?;
            let stop = dfs(letters, len, prefix, &next, count, limit, visit)?;
            prefix.pop();
            if stop.is_some() {
                return Ok(stop);
            }
        }
        Ok(None)
    }

    for len in 1..=max_len {
        let mut prefix = Vec::with_capacity(len);
        let id = PauliString::identity(s.num_qubits());
        if let Some(truncated) = dfs(&letters, len, &mut prefix, &id, &mut count, limit, visit)? {
            return Ok(truncated);
        }
    }
    Ok(false)
}

/// Trace magnitudes of the all-elements word and every letter word up to `max_len`.
pub fn word_trace_profile(s: &PauliSet, max_len: usize) -> Result<TraceProfile> {
    if max_len == 0 {
        return Err(Error::InvalidParams("word length must be at least 1".into()));
    }
    let mut entries = Vec::new();
    let truncated = enumerate_words(s, max_len, MAX_WORDS, &mut |word, p| {
        entries.push(WordTrace { word, operator: p.operator_label(), trace: trace_magnitude(&p), product: p });
        Ok(true)
    })?;
    Ok(TraceProfile { num_qubits: s.num_qubits(), max_len, truncated, entries })
}

/// A word whose trace magnitude differs between two sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub word: Word,
    pub operator_a: String,
    pub operator_b: String,
    pub trace_a: u64,
    pub trace_b: u64,
}

/// First word in canonical order separating `a` from `b`, if one exists up to `max_len`.
///
/// `None` only means no witness was found within the budget.
pub fn inequivalence_witness(a: &PauliSet, b: &PauliSet, max_len: usize) -> Result<Option<Witness>> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch(a.len(), b.len()));
    }
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::PauliLength(a.num_qubits(), b.num_qubits()));
    }
    let mut found = None;
    enumerate_words(a, max_len, MAX_WORDS, &mut |word, pa| {
        let pb = evaluate_word(b, &word)?;
        let (ta, tb) = (trace_magnitude(&pa), trace_magnitude(&pb));
        if ta != tb {
            found = Some(Witness {
                word,
                operator_a: pa.operator_label(),
                operator_b: pb.operator_label(),
                trace_a: ta,
                trace_b: tb,
            });
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(found)
}
