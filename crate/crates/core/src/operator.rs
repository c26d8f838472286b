//! Real symmetric operators over `n`-qubit computational bases.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index, so
//! `A ⊗ B` indexes as `i_A · 2^{n_B} + i_B`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator};

/// Largest register handled by any operator in this crate.
pub const MAX_QUBITS: usize = 24;

/// Largest dimension that may be materialized as a dense matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Bit mask of `qubit` in an `n`-qubit index (big-endian).
#[inline]
pub fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1usize << (num_qubits - 1 - qubit)
}

/// Hamming distance between two basis indices.
#[inline]
pub fn hamming(x: usize, y: usize) -> u32 {
    (x ^ y).count_ones()
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "num_qubits must lie in 1..={MAX_QUBITS}, got {num_qubits}"
        )));
    }
    Ok(())
}

/// Sparse real symmetric matrix; only the upper triangle `i <= j` is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetricOperator {
    num_qubits: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SparseSymmetricOperator {
    pub fn zeros(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        Ok(Self { num_qubits, entries: BTreeMap::new() })
    }

    /// Builds from `(i, j, value)` triples; `(i, j)` and `(j, i)` address the same entry
    /// and repeated triples accumulate.
    pub fn from_triples<I>(num_qubits: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut op = Self::zeros(num_qubits)?;
        for (i, j, v) in triples {
            op.add_to(i, j, v)?;
        }
        Ok(op)
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        Self::from_triples(num_qubits, (0..dim).map(|i| (i, i, 1.0)))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn nnz_upper(&self) -> usize {
        self.entries.len()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange { index: i, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Overwrites entry `(i, j)` (and its mirror). Zero values remove the entry.
    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        let key = (i.min(j), i.max(j));
        if value == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    /// Adds `value` to entry `(i, j)` (and its mirror).
    pub fn add_to(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let cur = self.get(i, j);
        self.set(i, j, cur + value)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Upper-triangular entries `(i, j, v)` with `i <= j`, in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = Self { num_qubits: self.num_qubits, entries: BTreeMap::new() };
        if c != 0.0 {
            for (&k, &v) in &self.entries {
                let w = c * v;
                if w != 0.0 {
                    out.entries.insert(k, w);
                }
            }
        }
        out
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        let mut out = self.scaled(a);
        for (&(i, j), &v) in &other.entries {
            let w = out.get(i, j) + b * v;
            out.set(i, j, w)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Adds `c` to every diagonal entry.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        if c != 0.0 {
            for i in 0..self.dim() {
                let w = out.get(i, i) + c;
                out.set(i, i, w).expect("index in range");
            }
        }
        out
    }

    /// Absolute row sums of the full symmetric matrix.
    pub fn abs_row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim()];
        for (&(i, j), &v) in &self.entries {
            sums[i] += v.abs();
            if i != j {
                sums[j] += v.abs();
            }
        }
        sums
    }

    /// Induced 1-norm (= induced ∞-norm for symmetric matrices); bounds the operator norm.
    pub fn induced_one_norm(&self) -> f64 {
        self.abs_row_sums().into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nonzero count per row of the full matrix.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.dim()];
        for &(i, j) in self.entries.keys() {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        counts
    }

    pub fn max_row_sparsity(&self) -> usize {
        self.row_counts().into_iter().max().unwrap_or(0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.keys().all(|&(i, j)| i == j)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim()];
        for (&(i, j), &v) in &self.entries {
            if i == j {
                d[i] = v;
            }
        }
        d
    }

    /// Off-diagonal upper entries `(i, j, v)` with `i < j`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.iter().filter(|&(i, j, _)| i != j)
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > DENSE_LIMIT {
            return Err(Error::MemoryGuard(format!(
                "dense materialization of dimension {n} exceeds {DENSE_LIMIT}"
            )));
        }
        let mut m = DMatrix::zeros(n, n);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        Ok(m)
    }

    /// Symmetric part of a dense matrix; entries with `|v| <= tol` are dropped.
    pub fn from_dense(num_qubits: usize, m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let mut op = Self::zeros(num_qubits)?;
        let n = op.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} for {num_qubits} qubits",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if v.abs() > tol {
                    op.set(i, j, v)?;
                }
            }
        }
        Ok(op)
    }

    /// Principal submatrix on the listed basis indices.
    pub fn restrict(&self, indices: &[usize]) -> DMatrix<f64> {
        let pos: BTreeMap<usize, usize> = indices.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (&(i, j), &v) in &self.entries {
            if let (Some(&a), Some(&b)) = (pos.get(&i), pos.get(&j)) {
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        m
    }

    /// `self ⊗ I_{2^k}`.
    pub fn kron_identity_right(&self, k: usize) -> Result<Self> {
        let mut out = Self::zeros(self.num_qubits + k)?;
        let block = 1usize << k;
        for (&(i, j), &v) in &self.entries {
            for c in 0..block {
                out.entries.insert((i * block + c, j * block + c), v);
            }
        }
        Ok(out)
    }

    /// `I_{2^k} ⊗ self`.
    pub fn kron_identity_left(&self, k: usize) -> Result<Self> {
        let mut out = Self::zeros(self.num_qubits + k)?;
        let d = self.dim();
        for s in 0..(1usize << k) {
            for (&(i, j), &v) in &self.entries {
                out.entries.insert((s * d + i, s * d + j), v);
            }
        }
        Ok(out)
    }

    /// Full-storage compressed rows for fast products.
    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.dim();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &v) in &self.entries {
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        CsrMatrix::from_rows(rows)
    }

    /// Structural flags and norm surrogates.
    pub fn structure(&self) -> StructureReport {
        validate_structure(self)
    }
}

impl LinearOperator for SparseSymmetricOperator {
    fn dim(&self) -> usize {
        SparseSymmetricOperator::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (&(i, j), &v) in &self.entries {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
    }
}

/// Diagonal operator stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalOperator {
    num_qubits: usize,
    values: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(num_qubits: usize, values: Vec<f64>) -> Result<Self> {
        check_qubits(num_qubits)?;
        if values.len() != 1usize << num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {num_qubits} qubits",
                values.len()
            )));
        }
        Ok(Self { num_qubits, values })
    }

    pub fn zeros(num_qubits: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        Ok(Self { num_qubits, values: vec![0.0; 1usize << num_qubits] })
    }

    /// Diagonal of a sparse operator; fails if it has off-diagonal entries.
    pub fn from_sparse(op: &SparseSymmetricOperator) -> Result<Self> {
        if !op.is_diagonal() {
            return Err(Error::Structure("operator has off-diagonal entries".into()));
        }
        Self::new(op.num_qubits(), op.diagonal())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { num_qubits: self.num_qubits, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Exact operator norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the strict minimum, or `None` if the minimum is attained twice.
    pub fn unique_argmin(&self) -> Option<usize> {
        let m = self.min();
        let mut hits = self.values.iter().enumerate().filter(|(_, &v)| v == m);
        let first = hits.next()?.0;
        if hits.next().is_some() {
            None
        } else {
            Some(first)
        }
    }

    pub fn to_sparse(&self) -> SparseSymmetricOperator {
        SparseSymmetricOperator::from_triples(
            self.num_qubits,
            self.values.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
        .expect("valid diagonal")
    }
}

/// Pauli axis allowed in transverse-field Ising terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Z,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn identity(coeff: f64) -> Self {
        Self { coeff, factors: vec![] }
    }
    pub fn x(coeff: f64, q: usize) -> Self {
        Self { coeff, factors: vec![(q, Axis::X)] }
    }
    pub fn z(coeff: f64, q: usize) -> Self {
        Self { coeff, factors: vec![(q, Axis::Z)] }
    }
    pub fn zz(coeff: f64, a: usize, b: usize) -> Self {
        Self { coeff, factors: vec![(a, Axis::Z), (b, Axis::Z)] }
    }
}

/// Sum of identity, single-qubit X, single-qubit Z and two-qubit ZZ terms.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTermList {
    pub num_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliTermList {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, terms: Vec::new() }
    }

    pub fn push(&mut self, term: PauliTerm) {
        self.terms.push(term);
    }

    /// `-c · Σ_i X_i` over all qubits.
    pub fn uniform_x(num_qubits: usize, c: f64) -> Self {
        Self { num_qubits, terms: (0..num_qubits).map(|q| PauliTerm::x(-c, q)).collect() }
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.num_qubits)?;
        for t in &self.terms {
            for &(q, _) in &t.factors {
                if q >= self.num_qubits {
                    return Err(Error::QubitOutOfRange { qubit: q, num_qubits: self.num_qubits });
                }
            }
            match t.factors.as_slice() {
                [] | [_] => {}
                [(a, Axis::Z), (b, Axis::Z)] => {
                    if a == b {
                        return Err(Error::InvalidPauliTerm(format!("repeated qubit {a}")));
                    }
                }
                [(_, p), (_, q)] if p != q => {
                    return Err(Error::InvalidPauliTerm("mixed-axis two-qubit term".into()))
                }
                [_, _] => return Err(Error::InvalidPauliTerm("XX terms are not allowed".into())),
                _ => return Err(Error::InvalidPauliTerm("term touches more than two qubits".into())),
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm { coeff: c * t.coeff, factors: t.factors.clone() })
                .collect(),
        }
    }

    /// Terms of `self` followed by the terms of `other` on the same register.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch("pauli lists on different registers".into()));
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    /// Embeds into a larger register with qubit indices offset by `offset`.
    pub fn embed(&self, total_qubits: usize, offset: usize) -> Result<Self> {
        if offset + self.num_qubits > total_qubits {
            return Err(Error::DimensionMismatch("embedding exceeds register".into()));
        }
        Ok(Self {
            num_qubits: total_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm {
                    coeff: t.coeff,
                    factors: t.factors.iter().map(|&(q, a)| (q + offset, a)).collect(),
                })
                .collect(),
        })
    }
}

/// Materializes a Pauli term list in the computational basis.
pub fn build_from_pauli(p: &PauliTermList) -> Result<SparseSymmetricOperator> {
    p.validate()?;
    let n = p.num_qubits;
    let dim = 1usize << n;
    let mut diag = vec![0.0; dim];
    let mut xcoef = vec![0.0; n];
    for t in &p.terms {
        match t.factors.as_slice() {
            [] => diag.iter_mut().for_each(|d| *d += t.coeff),
            [(q, Axis::X)] => xcoef[*q] += t.coeff,
            [(q, Axis::Z)] => {
                let m = qubit_mask(n, *q);
                for (x, d) in diag.iter_mut().enumerate() {
                    *d += if x & m == 0 { t.coeff } else { -t.coeff };
                }
            }
            [(a, Axis::Z), (b, Axis::Z)] => {
                let m = qubit_mask(n, *a) | qubit_mask(n, *b);
                for (x, d) in diag.iter_mut().enumerate() {
                    *d += if (x & m).count_ones().is_multiple_of(2) { t.coeff } else { -t.coeff };
                }
            }
            _ => unreachable!("validated"),
        }
    }
    let mut op = SparseSymmetricOperator::zeros(n)?;
    for (x, &d) in diag.iter().enumerate() {
        if d != 0.0 {
            op.entries.insert((x, x), d);
        }
    }
    for (q, &c) in xcoef.iter().enumerate() {
        if c != 0.0 {
            let m = qubit_mask(n, q);
            for x in (0..dim).filter(|x| x & m == 0) {
                op.entries.insert((x, x | m), c);
            }
        }
    }
    Ok(op)
}

/// Structural flags and norm surrogates of an operator.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub stoquastic: bool,
    pub hypercube: bool,
    pub tfd: bool,
    pub max_row_sparsity: usize,
    pub induced_one_norm: f64,
}

pub fn validate_structure(h: &SparseSymmetricOperator) -> StructureReport {
    let n = h.num_qubits();
    let mut stoquastic = true;
    let mut hypercube = true;
    // Per-qubit X coefficient: (value, count) over the 2^{n-1} flip pairs.
    let mut flips: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut tfd = true;
    for (i, j, v) in h.off_diagonal() {
        if v > 0.0 {
            stoquastic = false;
        }
        let d = hamming(i, j);
        if d > 1 {
            hypercube = false;
            tfd = false;
            continue;
        }
        let q = n - 1 - (i ^ j).trailing_zeros() as usize;
        match &mut flips[q] {
            None => flips[q] = Some((v, 1)),
            Some((c, k)) => {
                if (v - *c).abs() > 1e-12 * c.abs().max(v.abs()) {
                    tfd = false;
                }
                *k += 1;
            }
        }
    }
    let half = h.dim() / 2;
    if flips.iter().flatten().any(|&(_, k)| k != half) {
        tfd = false;
    }
    StructureReport {
        stoquastic,
        hypercube,
        tfd,
        max_row_sparsity: h.max_row_sparsity(),
        induced_one_norm: h.induced_one_norm(),
    }
}

/// Largest Pauli-Z weight with a coefficient above `tol` in the expansion of a diagonal.
pub fn diagonal_pauli_weight(values: &[f64], tol: f64) -> usize {
    // Walsh–Hadamard transform; coefficient of Z-mask m ends up at index m.
    let mut w = values.to_vec();
    let mut h = 1;
    while h < w.len() {
        for i in (0..w.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (w[j], w[j + h]);
                w[j] = a + b;
                w[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = values.len().max(1) as f64;
    w.iter()
        .enumerate()
        .filter(|(_, c)| (*c / scale).abs() > tol)
        .map(|(m, _)| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// True when `h` is a transverse-field Ising Hamiltonian: uniform single-qubit X
/// couplings plus a diagonal spanned by identity, Z and ZZ terms.
pub fn tfi_representable(h: &SparseSymmetricOperator) -> bool {
    let tol = 1e-12 * h.max_abs().max(1.0);
    validate_structure(h).tfd && diagonal_pauli_weight(&h.diagonal(), tol) <= 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_x_single() {
        let p = PauliTermList { num_qubits: 1, terms: vec![PauliTerm::x(1.0, 0)] };
        let op = build_from_pauli(&p).unwrap();
        assert_eq!(op.iter().collect::<Vec<_>>(), vec![(0, 1, 1.0)]);
    }

    #[test]
    fn pauli_z_single() {
        let p = PauliTermList { num_qubits: 1, terms: vec![PauliTerm::z(-1.0, 0)] };
        assert_eq!(build_from_pauli(&p).unwrap().diagonal(), vec![-1.0, 1.0]);
    }

    #[test]
    fn walsh_weight() {
        let mut p = PauliTermList::new(3);
        p.push(PauliTerm::zz(0.7, 0, 2));
        p.push(PauliTerm::z(-0.2, 1));
        p.push(PauliTerm::x(-1.0, 1));
        let h = build_from_pauli(&p).unwrap();
        assert_eq!(diagonal_pauli_weight(&h.diagonal(), 1e-12), 2);
        assert!(tfi_representable(&h));
        let mut d = vec![0.0; 8];
        d[7] = 1.0;
        assert_eq!(diagonal_pauli_weight(&d, 1e-12), 3);
    }

    #[test]
    fn pauli_zz() {
        let p = PauliTermList { num_qubits: 2, terms: vec![PauliTerm::zz(1.0, 0, 1)] };
        assert_eq!(build_from_pauli(&p).unwrap().diagonal(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn big_endian_order() {
        // Z on qubit 0 of two qubits flips sign on the upper half of the basis.
        let p = PauliTermList { num_qubits: 2, terms: vec![PauliTerm::z(1.0, 0)] };
        assert_eq!(build_from_pauli(&p).unwrap().diagonal(), vec![1.0, 1.0, -1.0, -1.0]);
        let p = PauliTermList { num_qubits: 2, terms: vec![PauliTerm::x(1.0, 0)] };
        assert_eq!(build_from_pauli(&p).unwrap().get(0, 2), 1.0);
    }

    #[test]
    fn pauli_errors() {
        let p = PauliTermList { num_qubits: 1, terms: vec![PauliTerm::x(1.0, 3)] };
        assert!(matches!(build_from_pauli(&p), Err(Error::QubitOutOfRange { .. })));
        let p = PauliTermList {
            num_qubits: 2,
            terms: vec![PauliTerm { coeff: 1.0, factors: vec![(0, Axis::X), (1, Axis::Z)] }],
        };
        assert!(matches!(build_from_pauli(&p), Err(Error::InvalidPauliTerm(_))));
    }

    #[test]
    fn structure_flags() {
        let mx = build_from_pauli(&PauliTermList::uniform_x(1, 1.0)).unwrap();
        let r = validate_structure(&mx);
        assert!(r.stoquastic && r.hypercube && r.tfd);

        let mut pos = SparseSymmetricOperator::zeros(1).unwrap();
        pos.set(0, 1, 0.5).unwrap();
        assert!(!validate_structure(&pos).stoquastic);

        let mut far = SparseSymmetricOperator::zeros(2).unwrap();
        far.set(0, 3, -1.0).unwrap();
        let r = validate_structure(&far);
        assert!(!r.hypercube && r.stoquastic);
    }

    #[test]
    fn tfd_requires_uniform_flips() {
        let mut h = SparseSymmetricOperator::zeros(2).unwrap();
        h.set(0, 1, -1.0).unwrap();
        assert!(!validate_structure(&h).tfd);
        h.set(2, 3, -1.0).unwrap();
        assert!(validate_structure(&h).tfd);
        h.set(2, 3, -2.0).unwrap();
        assert!(!validate_structure(&h).tfd);
    }

    #[test]
    fn symmetric_storage() {
        let mut h = SparseSymmetricOperator::zeros(2).unwrap();
        h.set(3, 1, 2.0).unwrap();
        assert_eq!(h.get(1, 3), 2.0);
        h.add_to(1, 3, -2.0).unwrap();
        assert_eq!(h.nnz_upper(), 0);
        assert!(h.set(4, 0, 1.0).is_err());
    }

    #[test]
    fn kron_layout() {
        let mx = build_from_pauli(&PauliTermList::uniform_x(1, 1.0)).unwrap();
        let left = mx.kron_identity_right(1).unwrap(); // X ⊗ I
        assert_eq!(left.get(0, 2), -1.0);
        assert_eq!(left.get(1, 3), -1.0);
        let right = mx.kron_identity_left(1).unwrap(); // I ⊗ X
        assert_eq!(right.get(0, 1), -1.0);
        assert_eq!(right.get(2, 3), -1.0);
    }
}
