//! Dense complex linear algebra over labeled qubit registers.
//!
//! Every state and operator carries the ordered list of qubit labels it
//! lives on. The first label is the most significant bit of the basis index,
//! so `|q0 q1 ... q(n-1)>` has index `q0 * 2^(n-1) + ... + q(n-1)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for normalization, Hermiticity and trace checks.
pub const TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Converts a slice of string-likes into owned labels.
pub fn labels<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

fn check_distinct(register: &[String]) -> Result<()> {
    for (i, a) in register.iter().enumerate() {
        if register[i + 1..].contains(a) {
            return Err(Error::DuplicateLabel(a.clone()));
        }
    }
    Ok(())
}

fn positions(register: &[String], wanted: &[String]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|l| {
            register
                .iter()
                .position(|r| r == l)
                .ok_or_else(|| Error::UnknownLabel(l.clone()))
        })
        .collect()
}

/// Bit shift of register position `p` in an `n`-qubit index.
#[inline]
fn shift(n: usize, p: usize) -> usize {
    n - 1 - p
}

/// Spreads the bits of `value` (MSB first, `shifts.len()` bits) onto the given bit shifts.
fn scatter(value: usize, shifts: &[usize]) -> usize {
    let m = shifts.len();
    shifts
        .iter()
        .enumerate()
        .filter(|&(q, _)| value >> (m - 1 - q) & 1 == 1)
        .map(|(_, &s)| 1usize << s)
        .sum()
}

fn offsets(shifts: &[usize]) -> Vec<usize> {
    (0..1usize << shifts.len()).map(|v| scatter(v, shifts)).collect()
}

/// Offsets of the labels in `sub` and of the remaining labels, relative to `register`.
fn split_offsets(register: &[String], sub: &[String]) -> Result<(Vec<usize>, Vec<usize>, Vec<String>)> {
    let n = register.len();
    let pos = positions(register, sub)?;
    let sub_shifts: Vec<usize> = pos.iter().map(|&p| shift(n, p)).collect();
    let rest: Vec<usize> = (0..n).filter(|p| !pos.contains(p)).collect();
    let rest_shifts: Vec<usize> = rest.iter().map(|&p| shift(n, p)).collect();
    let rest_labels = rest.iter().map(|&p| register[p].clone()).collect();
    Ok((offsets(&sub_shifts), offsets(&rest_shifts), rest_labels))
}

/// Pure state over a labeled register.
///
/// Constructed through [`StateVector::new`] the state is normalized; branch
/// outputs of Kraus operators are built with [`StateVector::unnormalized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    #[serde(with = "complex_vec")]
    amplitudes: Vec<C64>,
    register: Vec<String>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>, register: Vec<String>) -> Result<Self> {
        let s = Self::unnormalized(amplitudes, register)?;
        let n = s.norm_sqr();
        if (n - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(s)
    }

    /// Builds a state without checking its norm.
    pub fn unnormalized(amplitudes: Vec<C64>, register: Vec<String>) -> Result<Self> {
        check_distinct(&register)?;
        let expected = 1usize << register.len();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: amplitudes.len() });
        }
        Ok(Self { amplitudes, register })
    }

    /// Real amplitudes, normalized on construction.
    pub fn from_real(amplitudes: &[f64], register: Vec<String>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        let amps = amplitudes.iter().map(|&a| C64::new(a / norm, 0.0)).collect();
        Self::new(amps, register)
    }

    /// Computational basis state; `bits[i]` is the value of `register[i]`.
    pub fn basis(bits: &[u8], register: Vec<String>) -> Result<Self> {
        if bits.len() != register.len() {
            return Err(Error::DimensionMismatch { expected: register.len(), found: bits.len() });
        }
        let index = bits.iter().fold(0usize, |acc, &b| acc << 1 | (b & 1) as usize);
        let mut amps = vec![ZERO; 1 << bits.len()];
        amps[index] = ONE;
        Self::new(amps, register)
    }

    /// Haar-random pure state: normalized complex Gaussian amplitudes.
    pub fn random<R: rand::Rng + ?Sized>(register: Vec<String>, rng: &mut R) -> Result<Self> {
        let amps = (0..1usize << register.len())
            .map(|_| C64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal)))
            .collect();
        Ok(Self::unnormalized(amps, register)?.normalized())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn register(&self) -> &[String] {
        &self.register
    }

    pub fn num_qubits(&self) -> usize {
        self.register.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL
    }

    /// Rescales to unit norm. A zero vector is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a / n).collect(),
            register: self.register.clone(),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            register: self.register.clone(),
        }
    }

    /// Same state with the register reordered to `order` (a permutation of the labels).
    pub fn permuted(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.register.len() {
            return Err(Error::RegisterMismatch(self.register.clone(), order.to_vec()));
        }
        check_distinct(order)?;
        let n = self.register.len();
        // new position q holds old position old_pos[q]
        let old_pos = positions(&self.register, order)?;
        if old_pos == (0..n).collect::<Vec<_>>() {
            return Ok(self.clone());
        }
        let mut amps = vec![ZERO; self.dim()];
        for (old, &a) in self.amplitudes.iter().enumerate() {
            let mut new = 0usize;
            for (q, &p) in old_pos.iter().enumerate() {
                if old >> shift(n, p) & 1 == 1 {
                    new |= 1 << shift(n, q);
                }
            }
            amps[new] = a;
        }
        Ok(Self { amplitudes: amps, register: order.to_vec() })
    }

    /// Expresses `other` on this state's register order; both must carry the same label set.
    pub fn aligned(&self, other: &StateVector) -> Result<StateVector> {
        if self.register == other.register {
            return Ok(other.clone());
        }
        other
            .permuted(&self.register)
            .map_err(|_| Error::RegisterMismatch(self.register.clone(), other.register.clone()))
    }

    /// `<self|other>`, with `other` aligned to this register.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        let other = self.aligned(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Partial inner product `(<bra|_labels ⊗ 1) |self>`; the bra's labels are removed.
    pub fn contract(&self, bra: &StateVector) -> Result<StateVector> {
        let (sub, rest, rest_labels) = split_offsets(&self.register, &bra.register)?;
        let amps = rest
            .iter()
            .map(|&r| {
                sub.iter()
                    .zip(&bra.amplitudes)
                    .map(|(&s, b)| b.conj() * self.amplitudes[r | s])
                    .sum()
            })
            .collect();
        StateVector::unnormalized(amps, rest_labels)
    }

    pub fn density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        DensityMatrix { matrix: &v * v.adjoint(), register: self.register.clone() }
    }

    /// Amplitudes reshaped as a `2^|cut| x 2^(n-|cut|)` matrix, cut labels as row index.
    pub fn bipartite_matrix(&self, cut: &[String]) -> Result<DMatrix<C64>> {
        let mut order = cut.to_vec();
        check_distinct(&order)?;
        positions(&self.register, cut)?;
        order.extend(self.register.iter().filter(|l| !cut.contains(l)).cloned());
        let psi = self.permuted(&order)?;
        let rows = 1usize << cut.len();
        let cols = self.dim() / rows;
        Ok(DMatrix::from_fn(rows, cols, |r, c| psi.amplitudes[r * cols + c]))
    }
}

/// Square operator on a subset of labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator {
    #[serde(with = "complex_matrix")]
    matrix: DMatrix<C64>,
    acts_on: Vec<String>,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, acts_on: Vec<String>) -> Result<Self> {
        check_distinct(&acts_on)?;
        let expected = 1usize << acts_on.len();
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { matrix, acts_on })
    }

    pub fn identity(acts_on: Vec<String>) -> Result<Self> {
        let d = 1usize << acts_on.len();
        Self::new(DMatrix::identity(d, d), acts_on)
    }

    /// `|ket><bra|`; both states must share a label set.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Result<Self> {
        let bra = ket.aligned(bra)?;
        let k = nalgebra::DVector::from_column_slice(ket.amplitudes());
        let b = nalgebra::DVector::from_column_slice(bra.amplitudes());
        Self::new(&k * b.adjoint(), ket.register().to_vec())
    }

    pub fn projector(psi: &StateVector) -> Result<Self> {
        Self::outer(psi, psi)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn acts_on(&self) -> &[String] {
        &self.acts_on
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), acts_on: self.acts_on.clone() }
    }

    /// `self * other` for operators on the same labels (other is aligned first).
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        let other = other.embed(&self.acts_on)?;
        Ok(Self { matrix: &self.matrix * &other.matrix, acts_on: self.acts_on.clone() })
    }

    /// Full matrix on `register`, acting as identity on labels outside `acts_on`.
    pub fn embed(&self, register: &[String]) -> Result<Operator> {
        let d = 1usize << register.len();
        let mut full = DMatrix::zeros(d, d);
        for c in 0..d {
            let mut amps = vec![ZERO; d];
            amps[c] = ONE;
            let col = apply(self, &StateVector::unnormalized(amps, register.to_vec())?)?;
            for (r, a) in col.amplitudes.iter().enumerate() {
                full[(r, c)] = *a;
            }
        }
        Operator::new(full, register.to_vec())
    }

    /// Largest entrywise deviation from the identity.
    pub fn identity_residual(&self) -> f64 {
        let d = self.matrix.nrows();
        (self.matrix.clone() - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Kronecker product with register concatenation.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

fn concat_registers(a: &[String], b: &[String]) -> Result<Vec<String>> {
    if let Some(l) = a.iter().find(|l| b.contains(l)) {
        return Err(Error::LabelCollision(l.clone()));
    }
    Ok(a.iter().chain(b).cloned().collect())
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let register = concat_registers(&self.register, &other.register)?;
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        StateVector::unnormalized(amps, register)
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let acts_on = concat_registers(&self.acts_on, &other.acts_on)?;
        Operator::new(self.matrix.kronecker(&other.matrix), acts_on)
    }
}

/// Applies `op ⊗ 1` to `psi`. The result is not renormalized.
pub fn apply(op: &Operator, psi: &StateVector) -> Result<StateVector> {
    let (sub, rest, _) = split_offsets(&psi.register, &op.acts_on)?;
    let mut out = vec![ZERO; psi.dim()];
    let m = &op.matrix;
    for &base in &rest {
        for (r, &ro) in sub.iter().enumerate() {
            let mut acc = ZERO;
            for (c, &co) in sub.iter().enumerate() {
                acc += m[(r, c)] * psi.amplitudes[base | co];
            }
            out[base | ro] = acc;
        }
    }
    StateVector::unnormalized(out, psi.register.clone())
}

/// Density operator over a labeled register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    #[serde(with = "complex_matrix")]
    matrix: DMatrix<C64>,
    register: Vec<String>,
}

impl DensityMatrix {
    /// Validated constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(matrix: DMatrix<C64>, register: Vec<String>) -> Result<Self> {
        let rho = Self::unchecked(matrix, register)?;
        rho.validate()?;
        Ok(rho)
    }

    fn unchecked(matrix: DMatrix<C64>, register: Vec<String>) -> Result<Self> {
        check_distinct(&register)?;
        let expected = 1usize << register.len();
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch { expected, found: matrix.nrows() });
        }
        Ok(Self { matrix, register })
    }

    pub fn maximally_mixed(register: Vec<String>) -> Result<Self> {
        let d = 1usize << register.len();
        Self::new(DMatrix::identity(d, d) / C64::new(d as f64, 0.0), register)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn register(&self) -> &[String] {
        &self.register
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (self.matrix.clone() - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.matrix.clone() + self.matrix.adjoint()) / C64::new(2.0, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Checks the density-matrix invariants at [`TOL`].
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_residual();
        if h > TOL {
            return Err(Error::NotHermitian(h));
        }
        let t = self.trace();
        if (t.re - 1.0).abs() > TOL || t.im.abs() > TOL {
            return Err(Error::InvalidTrace(t.re));
        }
        let e = self.min_eigenvalue();
        if e < -TOL {
            return Err(Error::NotPositive(e));
        }
        Ok(())
    }

    /// Same operator with the register reordered.
    pub fn permuted(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.register.len() {
            return Err(Error::RegisterMismatch(self.register.clone(), order.to_vec()));
        }
        let (sub, _, _) = split_offsets(&self.register, order)?;
        let d = sub.len();
        let m = DMatrix::from_fn(d, d, |r, c| self.matrix[(sub[r], sub[c])]);
        Self::unchecked(m, order.to_vec())
    }

    /// `<psi|rho|psi>` with `psi` aligned to this register.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.register.len() != self.register.len() {
            return Err(Error::RegisterMismatch(psi.register.clone(), self.register.clone()));
        }
        let rho = self.permuted(&psi.register)?;
        let v = nalgebra::DVector::from_column_slice(&psi.amplitudes);
        Ok((v.adjoint() * &rho.matrix * &v)[(0, 0)].re)
    }
}

/// Traces out every label not in `keep`; the result is ordered as `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[String]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    check_distinct(keep)?;
    let (kept, traced, _) = split_offsets(&rho.register, keep)?;
    let d = kept.len();
    let m = DMatrix::from_fn(d, d, |i, j| {
        traced.iter().map(|&t| rho.matrix[(kept[i] | t, kept[j] | t)]).sum()
    });
    DensityMatrix::unchecked(m, keep.to_vec())
}

/// Schmidt coefficients of `psi` across `cut | rest`, in descending order.
pub fn schmidt_coefficients(psi: &StateVector, cut: &[String]) -> Result<Vec<f64>> {
    let m = psi.bipartite_matrix(cut)?;
    let mut values: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Something a pure state's fidelity can be measured against.
pub trait FidelityTarget {
    fn fidelity_with(&self, psi: &StateVector) -> Result<f64>;
}

impl FidelityTarget for StateVector {
    fn fidelity_with(&self, psi: &StateVector) -> Result<f64> {
        Ok(psi.inner(self)?.norm_sqr())
    }
}

impl FidelityTarget for DensityMatrix {
    fn fidelity_with(&self, psi: &StateVector) -> Result<f64> {
        self.expectation(psi)
    }
}

/// `<psi|rho|psi>`, clamped into `[0, 1]` against rounding.
pub fn fidelity_pure<T: FidelityTarget + ?Sized>(psi: &StateVector, target: &T) -> Result<f64> {
    Ok(target.fidelity_with(psi)?.clamp(0.0, 1.0))
}

/// Complex numbers as `[re, im]` pairs.
pub(crate) mod complex_vec {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// Row-major nested `[re, im]` pairs.
pub(crate) mod complex_matrix {
    use super::C64;
    use nalgebra::DMatrix;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = m
            .row_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("matrix must be square"));
        }
        Ok(DMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
    }
}
