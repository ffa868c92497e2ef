//! Bell, multi-pair and GHZ states, Pauli strings and stabilizer sign tables.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{labels, Operator, StateVector, Tensor, C64, ONE, ZERO};

/// Tolerance on `|<psi|g|psi>| = 1` when reading a stabilizer sign.
pub const SIGN_TOL: f64 = 1e-6;

/// Eigenvalue sign of a stabilizer generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!("sign must be ±1, got {other}"))),
        }
    }
}

/// Bell state `Φʲ` on `(a, b)`.
///
/// The index encodes the signs of `(Z_A Z_B, X_A X_B)`:
/// `0 → (+,+)`, `1 → (+,−)`, `2 → (−,+)`, `3 → (−,−)`.
pub fn bell_state(j: u8, a: &str, b: &str) -> Result<StateVector> {
    let amps: [f64; 4] = match j {
        0 => [1.0, 0.0, 0.0, 1.0],
        1 => [1.0, 0.0, 0.0, -1.0],
        2 => [0.0, 1.0, 1.0, 0.0],
        3 => [0.0, 1.0, -1.0, 0.0],
        _ => return Err(Error::BellIndex(j)),
    };
    StateVector::from_real(&amps, labels(&[a, b]))
}

/// Default pair labels `(A1, B1), (A2, B2), ...`.
pub fn pair_labels(n: usize) -> Vec<(String, String)> {
    (1..=n).map(|i| (format!("A{i}"), format!("B{i}"))).collect()
}

/// `Φ^{j1} ⊗ Φ^{j2} ⊗ ...` with pair `i` on `pairs[i]`.
pub fn multi_bell(indices: &[u8], pairs: &[(String, String)]) -> Result<StateVector> {
    if indices.len() != pairs.len() || indices.is_empty() {
        return Err(Error::DimensionMismatch { expected: pairs.len(), found: indices.len() });
    }
    let mut state = bell_state(indices[0], &pairs[0].0, &pairs[0].1)?;
    for (&j, (a, b)) in indices.iter().zip(pairs).skip(1) {
        state = state.tensor(&bell_state(j, a, b)?)?;
    }
    Ok(state)
}

/// `(|x1 x2 ...> ± |x̄1 x̄2 ...>)/√2`.
pub fn ghz_state(bits: &[u8], sign: Sign, register: &[String]) -> Result<StateVector> {
    if bits.len() != register.len() || bits.is_empty() {
        return Err(Error::DimensionMismatch { expected: register.len(), found: bits.len() });
    }
    let n = bits.len();
    let index = bits.iter().fold(0usize, |acc, &b| acc << 1 | (b & 1) as usize);
    let complement = !index & ((1 << n) - 1);
    let mut amps = vec![0.0; 1 << n];
    amps[index] = 1.0;
    amps[complement] = sign.value() as f64;
    StateVector::from_real(&amps, register.to_vec())
}

/// Power of `i` multiplying a Pauli word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn value(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    fn prefix(self) -> &'static str {
        match self.0 {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// An `n`-qubit Pauli word `i^k σ_1 ⊗ ... ⊗ σ_n` in symplectic form.
///
/// A qubit with both bits set is the Hermitian `Y`, so `Y = i X Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    xs: Vec<bool>,
    zs: Vec<bool>,
    phase: Phase,
}

impl PauliString {
    pub fn new(xs: Vec<bool>, zs: Vec<bool>, phase: Phase) -> Result<Self> {
        if xs.len() != zs.len() {
            return Err(Error::PauliLength(xs.len(), zs.len()));
        }
        Ok(Self { xs, zs, phase })
    }

    pub fn identity(n: usize) -> Self {
        Self { xs: vec![false; n], zs: vec![false; n], phase: Phase::ONE }
    }

    /// Places single-qubit letters at given positions of an `n`-qubit word.
    pub fn from_sparse(n: usize, letters: &[(usize, char)]) -> Result<Self> {
        let mut word: Vec<char> = vec!['I'; n];
        for &(p, c) in letters {
            if p >= n {
                return Err(Error::PauliParse(format!("position {p} in {n}-qubit word")));
            }
            word[p] = c;
        }
        word.into_iter().collect::<String>().parse()
    }

    pub fn num_qubits(&self) -> usize {
        self.xs.len()
    }

    pub fn xs(&self) -> &[bool] {
        &self.xs
    }

    pub fn zs(&self) -> &[bool] {
        &self.zs
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        Self { phase, ..self.clone() }
    }

    pub fn letter(&self, q: usize) -> char {
        match (self.xs[q], self.zs[q]) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    /// Letters without the phase, e.g. `"XZY"`.
    pub fn operator_label(&self) -> String {
        (0..self.num_qubits()).map(|q| self.letter(q)).collect()
    }

    pub fn is_identity_operator(&self) -> bool {
        !self.xs.iter().any(|&x| x) && !self.zs.iter().any(|&z| z)
    }

    /// Every letter already squares to identity, so only the phase matters.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits()).filter(|&q| self.xs[q] || self.zs[q]).collect()
    }

    /// Letters on `positions`, in that order, with phase `+1`.
    pub fn restrict(&self, positions: &[usize]) -> Self {
        Self {
            xs: positions.iter().map(|&p| self.xs[p]).collect(),
            zs: positions.iter().map(|&p| self.zs[p]).collect(),
            phase: Phase::ONE,
        }
    }

    /// Hermitian adjoint: the letters are Hermitian, so only the phase conjugates.
    pub fn dagger(&self) -> Self {
        self.with_phase(Phase::from_power(-(self.phase.0 as i64)))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (0..self.num_qubits())
            .filter(|&q| (self.xs[q] & other.zs[q]) ^ (self.zs[q] & other.xs[q]))
            .count();
        anti % 2 == 0
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 most significant.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        let i = C64::new(0.0, 1.0);
        let mut m = DMatrix::from_element(1, 1, self.phase.value());
        for q in 0..self.num_qubits() {
            let s = match self.letter(q) {
                'I' => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
                'X' => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
                'Z' => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
                _ => DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
            };
            m = m.kronecker(&s);
        }
        m
    }

    pub fn to_operator(&self, register: &[String]) -> Result<Operator> {
        if register.len() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), found: register.len() });
        }
        Operator::new(self.to_matrix(), register.to_vec())
    }
}

/// Exponent of `i` picked up by one qubit when multiplying letters `(x1,z1)·(x2,z2)`.
fn letter_product_power(x1: bool, z1: bool, x2: bool, z2: bool) -> i64 {
    let (x2, z2) = (x2 as i64, z2 as i64);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

/// Product `p · q` with exact phase tracking.
pub fn pauli_mul(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    if p.num_qubits() != q.num_qubits() {
        return Err(Error::PauliLength(p.num_qubits(), q.num_qubits()));
    }
    let mut power = p.phase.0 as i64 + q.phase.0 as i64;
    let mut xs = Vec::with_capacity(p.num_qubits());
    let mut zs = Vec::with_capacity(p.num_qubits());
    for k in 0..p.num_qubits() {
        power += letter_product_power(p.xs[k], p.zs[k], q.xs[k], q.zs[k]);
        xs.push(p.xs[k] ^ q.xs[k]);
        zs.push(p.zs[k] ^ q.zs[k]);
    }
    Ok(PauliString { xs, zs, phase: Phase::from_power(power) })
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.phase.prefix(), self.operator_label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional `+`, `-`, `i`, `+i`, `-i` prefix followed by `IXYZ` letters.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::PauliParse(s.to_string());
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        if body.is_empty() {
            return Err(err());
        }
        let mut xs = Vec::with_capacity(body.len());
        let mut zs = Vec::with_capacity(body.len());
        for c in body.chars() {
            let (x, z) = match c {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                _ => return Err(err()),
            };
            xs.push(x);
            zs.push(z);
        }
        Ok(PauliString { xs, zs, phase })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `g |psi>`, with qubit `q` of the word acting on `psi.register()[q]`.
pub fn apply_pauli(g: &PauliString, psi: &StateVector) -> Result<StateVector> {
    let n = psi.num_qubits();
    if g.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.num_qubits() });
    }
    let bit = |q: usize| 1usize << (n - 1 - q);
    let xmask: usize = (0..n).filter(|&q| g.xs[q]).map(bit).sum();
    let zmask: usize = (0..n).filter(|&q| g.zs[q]).map(bit).sum();
    let ys = (0..n).filter(|&q| g.xs[q] && g.zs[q]).count() as i64;
    // Y|b> = i(-1)^b |b̄>, so each Y adds one power of i on top of the Z-sign.
    let base = Phase::from_power(g.phase.0 as i64 + ys).value();
    let mut out = vec![ZERO; psi.dim()];
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let sign = if (i & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[i ^ xmask] = a * base * sign;
    }
    StateVector::unnormalized(out, psi.register().to_vec())
}

/// `<psi|g|psi>`.
pub fn pauli_expectation(psi: &StateVector, g: &PauliString) -> Result<C64> {
    let gpsi = apply_pauli(g, psi)?;
    psi.inner(&gpsi)
}

/// Sign `s` with `<psi|g|psi> = s`; errors if `psi` is not an eigenstate of `g`.
pub fn expectation_sign(psi: &StateVector, g: &PauliString) -> Result<Sign> {
    let e = pauli_expectation(psi, g)?;
    if (e.re.abs() - 1.0).abs() > SIGN_TOL || e.im.abs() > SIGN_TOL {
        return Err(Error::NotEigenstate {
            generator: g.to_string(),
            expectation: format!("{:.6}{:+.6}i", e.re, e.im),
        });
    }
    Ok(if e.re > 0.0 { Sign::Plus } else { Sign::Minus })
}

/// A state together with the index list that names it, e.g. `[0, 1, 2]` for `Φ⁰¹²`.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedState {
    pub id: Vec<u8>,
    pub state: StateVector,
}

/// Signs of each generator on each state (rows: states, columns: generators).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTable {
    pub register: Vec<String>,
    pub states: Vec<Vec<u8>>,
    pub generators: Vec<PauliString>,
    pub entries: Vec<Vec<Sign>>,
}

impl SignTable {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn entry(&self, state: usize, generator: usize) -> Sign {
        self.entries[state][generator]
    }

    /// First pair of identical rows, if any.
    pub fn duplicate_rows(&self) -> Option<(usize, usize)> {
        for i in 0..self.entries.len() {
            for j in i + 1..self.entries.len() {
                if self.entries[i] == self.entries[j] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn rows_distinct(&self) -> bool {
        self.duplicate_rows().is_none()
    }

    /// Rows rendered as `"+-+"` strings.
    pub fn row_strings(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|s| s.symbol()).collect())
            .collect()
    }
}

/// Reads every generator's sign on every state.
pub fn sign_table(states: &[NamedState], generators: &[PauliString]) -> Result<SignTable> {
    let register = states
        .first()
        .map(|s| s.state.register().to_vec())
        .unwrap_or_default();
    let mut entries = Vec::with_capacity(states.len());
    for s in states {
        let psi = s.state.permuted(&register)?;
        let row = generators
            .iter()
            .map(|g| expectation_sign(&psi, g))
            .collect::<Result<Vec<_>>>()?;
        entries.push(row);
    }
    Ok(SignTable {
        register,
        states: states.iter().map(|s| s.id.clone()).collect(),
        generators: generators.to_vec(),
        entries,
    })
}

/// `Z_{A_i} Z_{B_i}` and `X_{A_i} X_{B_i}` for each pair, on register `A1 B1 A2 B2 ...`.
pub fn pair_generators(n_pairs: usize) -> Vec<PauliString> {
    let n = 2 * n_pairs;
    let mut gens = Vec::with_capacity(n);
    for i in 0..n_pairs {
        for c in ['Z', 'X'] {
            gens.push(PauliString::from_sparse(n, &[(2 * i, c), (2 * i + 1, c)]).expect("valid word"));
        }
    }
    gens
}

/// Multi-pair Bell states named by their index lists, on the default pair labels.
pub fn multi_bell_family(ids: &[Vec<u8>]) -> Result<Vec<NamedState>> {
    ids.iter()
        .map(|id| {
            Ok(NamedState { id: id.clone(), state: multi_bell(id, &pair_labels(id.len()))? })
        })
        .collect()
}

/// Sign table of a multi-pair Bell family against the per-pair `ZZ`, `XX` generators.
pub fn multi_bell_table(ids: &[Vec<u8>]) -> Result<SignTable> {
    let n_pairs = ids.first().map(|i| i.len()).unwrap_or(1);
    sign_table(&multi_bell_family(ids)?, &pair_generators(n_pairs))
}

/// The six three-pair states `Φ⁰¹², Φ⁰²¹, Φ¹⁰², Φ¹²⁰, Φ²⁰¹, Φ²¹⁰`.
pub fn six_mes_ids() -> Vec<Vec<u8>> {
    vec![
        vec![0, 1, 2],
        vec![0, 2, 1],
        vec![1, 0, 2],
        vec![1, 2, 0],
        vec![2, 0, 1],
        vec![2, 1, 0],
    ]
}

/// All `3^n` products of `Φ⁰, Φ¹, Φ²` over `n` pairs, lexicographic.
pub fn three_index_ids(n: usize) -> Vec<Vec<u8>> {
    let mut ids = vec![vec![]];
    for _ in 0..n {
        ids = ids
            .into_iter()
            .flat_map(|p: Vec<u8>| {
                (0..3u8).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    ids
}

/// Default GHZ labels `Q1, Q2, ...`.
pub fn ghz_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("Q{i}")).collect()
}

/// GHZ states named `[x1, ..., xn, s]` with `s = 0` for `+` and `1` for `−`.
pub fn ghz_family(members: &[(Vec<u8>, Sign)]) -> Result<Vec<NamedState>> {
    members
        .iter()
        .map(|(bits, sign)| {
            let mut id = bits.clone();
            id.push(u8::from(*sign == Sign::Minus));
            Ok(NamedState { id, state: ghz_state(bits, *sign, &ghz_labels(bits.len()))? })
        })
        .collect()
}

/// The eight three-qubit GHZ-basis states: first bit 0, both signs.
pub fn ghz_basis() -> Vec<(Vec<u8>, Sign)> {
    (0..4u8)
        .flat_map(|i| [Sign::Plus, Sign::Minus].map(|s| (vec![0, i >> 1 & 1, i & 1], s)))
        .collect()
}

/// Three `+` GHZ states sharing the sign of `X₁X₂X₃`: `|000>, |001>, |010>` (with complements).
pub fn ghz_three() -> Vec<(Vec<u8>, Sign)> {
    vec![
        (vec![0, 0, 0], Sign::Plus),
        (vec![0, 0, 1], Sign::Plus),
        (vec![0, 1, 0], Sign::Plus),
    ]
}

/// `Z₁Z₂`, `Z₂Z₃` on three qubits.
pub fn ghz_generators() -> Vec<PauliString> {
    vec!["ZZI".parse().expect("valid"), "IZZ".parse().expect("valid")]
}
