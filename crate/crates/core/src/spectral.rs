//! Eigensolvers, gap scans and the simulation-certificate checker.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    dense_eigen, dense_lowest, dot, subspace_eigensolver, CsrMatrix, EigenSolution, Expansion,
    SolverOptions, Target,
};
use crate::operator::{SparseSymmetricOperator, DENSE_LIMIT};
use crate::path::HamiltonianPath;

pub use crate::linalg::subspace_distance;

/// Relative width below which the `N`/`N+1` split is treated as degenerate.
pub const SPLIT_TOLERANCE: f64 = 1e-8;

/// Largest component solved by full dense diagonalization.
pub const DENSE_SOLVE_LIMIT: usize = 512;

/// Column-sparse real isometry from a logical space into a physical one.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    physical_dim: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl Isometry {
    /// Checks orthonormality of the columns to `1e-10`.
    pub fn new(physical_dim: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for col in &columns {
            if let Some(&(i, _)) = col.iter().find(|(i, _)| *i >= physical_dim) {
                return Err(Error::NotIsometry(format!("row {i} outside dimension {physical_dim}")));
            }
        }
        let iso = Self { physical_dim, columns };
        let dense: Vec<Vec<f64>> = (0..iso.logical_dim()).map(|j| iso.column(j)).collect();
        for a in 0..dense.len() {
            for b in a..dense.len() {
                let g = dot(&dense[a], &dense[b]);
                let want = if a == b { 1.0 } else { 0.0 };
                if (g - want).abs() > 1e-10 {
                    return Err(Error::NotIsometry(format!("Gram entry ({a}, {b}) = {g}")));
                }
            }
        }
        Ok(iso)
    }

    /// `|j⟩ ↦ |map[j]⟩`; the targets must be distinct.
    pub fn from_basis_map(physical_dim: usize, map: &[usize]) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &i in map {
            if i >= physical_dim || !seen.insert(i) {
                return Err(Error::NotIsometry(format!("basis target {i} repeated or out of range")));
            }
        }
        Ok(Self { physical_dim, columns: map.iter().map(|&i| vec![(i, 1.0)]).collect() })
    }

    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }

    pub fn logical_dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<(usize, f64)>] {
        &self.columns
    }

    /// Target indices when every column is a basis vector.
    pub fn basis_map(&self) -> Option<Vec<usize>> {
        self.columns
            .iter()
            .map(|c| match c.as_slice() {
                [(i, v)] if (*v - 1.0).abs() < 1e-15 => Some(*i),
                _ => None,
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.physical_dim];
        for &(i, c) in &self.columns[j] {
            v[i] += c;
        }
        v
    }

    /// `E ψ`.
    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.physical_dim];
        for (col, &c) in self.columns.iter().zip(psi) {
            for &(i, v) in col {
                out[i] += v * c;
            }
        }
        out
    }

    /// `E† φ`.
    pub fn adjoint_apply(&self, phi: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|col| col.iter().map(|&(i, v)| v * phi[i]).sum()).collect()
    }

    /// `E₂ ∘ E₁` where `self = E₁` and the argument acts on `E₁`'s physical space.
    pub fn then(&self, outer: &Isometry) -> Result<Isometry> {
        if outer.logical_dim() != self.physical_dim {
            return Err(Error::DimensionMismatch("isometry composition".into()));
        }
        let columns = self
            .columns
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for &(k, c) in col {
                    for &(i, v) in &outer.columns[k] {
                        *acc.entry(i).or_insert(0.0) += c * v;
                    }
                }
                acc.into_iter().filter(|(_, v)| *v != 0.0).collect()
            })
            .collect();
        Ok(Isometry { physical_dim: outer.physical_dim, columns })
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Connected components of the off-diagonal graph, each sorted, ordered by minimum index.
pub fn components(h: &SparseSymmetricOperator) -> Vec<Vec<usize>> {
    let n = h.dim();
    let mut uf = UnionFind::new(n);
    for (i, j, _) in h.off_diagonal() {
        uf.union(i, j);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = uf.find(i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn component_lowest(h: &SparseSymmetricOperator, idx: &[usize], k: usize) -> Result<EigenSolution> {
    if idx.len() == 1 {
        return Ok(EigenSolution { values: vec![h.get(idx[0], idx[0])], vectors: vec![vec![1.0]] });
    }
    if idx.len() <= DENSE_SOLVE_LIMIT {
        return Ok(dense_lowest(&h.restrict(idx), k));
    }
    let pos: BTreeMap<usize, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); idx.len()];
    for (i, j, v) in h.iter() {
        if let (Some(&a), Some(&b)) = (pos.get(&i), pos.get(&j)) {
            rows[a].push((b, v));
            if a != b {
                rows[b].push((a, v));
            }
        }
    }
    let csr = CsrMatrix::from_rows(rows);
    let diag: Vec<f64> = idx.iter().map(|&i| h.get(i, i)).collect();
    let opts = SolverOptions::new(idx.len(), h.induced_one_norm());
    subspace_eigensolver(&csr, k, Target::Smallest, &Expansion::Diagonal(diag), &opts)
}

/// The `k` smallest eigenpairs, solved per connected component: dense up to
/// [`DENSE_SOLVE_LIMIT`], preconditioned subspace iteration above. Ties are ordered by the
/// smallest basis index of the owning component.
pub fn lowest_eigenpairs(h: &SparseSymmetricOperator, k: usize) -> Result<EigenSolution> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(Error::InvalidArgument(format!("k = {k} for dimension {dim}")));
    }
    let comps = components(h);
    let parts: Vec<EigenSolution> = comps
        .par_iter()
        .map(|idx| component_lowest(h, idx, k.min(idx.len())))
        .collect::<Result<_>>()?;
    let mut order: Vec<(f64, usize, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(c, p)| p.values.iter().enumerate().map(move |(j, &v)| (v, c, j)))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    order.truncate(k);
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for (v, c, j) in order {
        let mut full = vec![0.0; dim];
        for (&i, &x) in comps[c].iter().zip(&parts[c].vectors[j]) {
            full[i] = x;
        }
        values.push(v);
        vectors.push(full);
    }
    Ok(EigenSolution { values, vectors })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapSample {
    pub t: f64,
    pub mu0: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapScan {
    pub samples: Vec<GapSample>,
    pub min_gap: f64,
    pub t_min: f64,
}

/// Ground energy and gap on a uniform grid of `samples` points over the path's domain.
pub fn gap_scan(path: &HamiltonianPath, samples: usize) -> Result<GapScan> {
    if samples < 2 {
        return Err(Error::InvalidArgument("gap_scan needs at least two samples".into()));
    }
    let (lo, hi) = path.domain();
    let ts: Vec<f64> = (0..samples)
        .map(|k| if k + 1 == samples { hi } else { lo + (hi - lo) * k as f64 / (samples - 1) as f64 })
        .collect();
    let out: Vec<GapSample> = ts
        .par_iter()
        .map(|&t| {
            let h = path.eval(t)?;
            let sol = lowest_eigenpairs(&h, 2).map_err(|e| Error::NoConvergence(format!("at t = {t}: {e}")))?;
            Ok(GapSample { t, mu0: sol.values[0], gap: sol.values[1] - sol.values[0] })
        })
        .collect::<Result<_>>()?;
    let best = out.iter().min_by(|a, b| a.gap.total_cmp(&b.gap)).expect("samples >= 2");
    Ok(GapScan { min_gap: best.gap, t_min: best.t, samples: out })
}

/// Outcome of checking that `(H_sim, E)` simulates `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationCertificate {
    /// `‖E − Ẽ‖` for the Procrustes-aligned `Ẽ` with image the low-energy subspace.
    pub eps_enc_measured: f64,
    /// `‖H − Ẽ† H_sim Ẽ‖`.
    pub eps_measured: f64,
    pub eps_enc_requested: f64,
    pub eps_requested: f64,
    pub gap_target: f64,
    pub gap_sim: f64,
    /// `μ_N − μ_{N−1}` of `H_sim`.
    pub low_split: f64,
    /// `gap_sim ≥ gap_target − 2·eps_measured`.
    pub gap_ok: bool,
    pub passed: bool,
}

struct Alignment {
    mu: Vec<f64>,
    low: Vec<Vec<f64>>,
    polar: DMatrix<f64>,
    w: DMatrix<f64>,
    split: f64,
}

fn align(h_sim: &SparseSymmetricOperator, e: &Isometry) -> Result<Alignment> {
    let n = e.logical_dim();
    if e.physical_dim() != h_sim.dim() {
        return Err(Error::DimensionMismatch(format!(
            "isometry maps into dimension {}, simulator has {}",
            e.physical_dim(),
            h_sim.dim()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty isometry".into()));
    }
    let want = (n + 1).min(h_sim.dim());
    let sol = lowest_eigenpairs(h_sim, want)?;
    let split = if want > n { sol.values[n] - sol.values[n - 1] } else { f64::INFINITY };
    if split <= SPLIT_TOLERANCE * h_sim.induced_one_norm().max(1.0) {
        return Err(Error::Degenerate(format!("eigenvalues {} and {} differ by {split:e}", n - 1, n)));
    }
    let low = &sol.vectors[..n];
    let w = DMatrix::from_fn(n, n, |i, j| e.columns()[j].iter().map(|&(r, v)| v * low[i][r]).sum());
    let svd = w.clone().svd(true, true);
    let polar = svd.u.as_ref().expect("u") * svd.v_t.as_ref().expect("v_t");
    Ok(Alignment { mu: sol.values[..n].to_vec(), low: low.to_vec(), polar, w, split })
}

fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `Ẽ† H_sim Ẽ` in the logical basis, with `Ẽ` the Procrustes alignment of `E` onto the
/// low-energy subspace of `H_sim`.
pub fn aligned_low_block(h_sim: &SparseSymmetricOperator, e: &Isometry) -> Result<DMatrix<f64>> {
    let a = align(h_sim, e)?;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(a.mu));
    Ok(a.polar.transpose() * d * &a.polar)
}

/// Checks whether `(H_sim, E)` simulates `H` with error `(eps_enc, eps)`.
pub fn verify_simulation(
    h: &SparseSymmetricOperator,
    h_sim: &SparseSymmetricOperator,
    e: &Isometry,
    eps_enc: f64,
    eps: f64,
) -> Result<SimulationCertificate> {
    let n = e.logical_dim();
    if h.dim() != n {
        return Err(Error::DimensionMismatch(format!("H has dimension {}, E has {n} columns", h.dim())));
    }
    let hd = h.to_dense()?;
    let a = align(h_sim, e)?;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(a.mu.clone()));
    let eff = a.polar.transpose() * d * &a.polar;
    let eps_measured = spectral_norm_sym(&(&hd - &eff));
    // (E − Ẽ)ᵀ(E − Ẽ) has eigenvalues 2 − 2cos θᵢ over the principal angles θᵢ. The
    // sines come from E's component outside the low space, which avoids the cancellation
    // in 2 − 2cos θ for nearly aligned subspaces.
    let perp: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut col = e.column(j);
            for (i, v) in a.low.iter().enumerate() {
                crate::linalg::axpy(-a.w[(i, j)], v, &mut col);
            }
            col
        })
        .collect();
    let gram = DMatrix::from_fn(n, n, |i, j| dot(&perp[i], &perp[j]));
    let eps_enc_measured = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&s2| {
            let s2 = s2.clamp(0.0, 1.0);
            (2.0 * s2 / (1.0 + (1.0 - s2).sqrt())).sqrt()
        })
        .fold(0.0f64, f64::max);
    let target = dense_eigen(&hd);
    let gap_target = target.gap().unwrap_or(f64::INFINITY);
    let gap_sim = if a.mu.len() > 1 { a.mu[1] - a.mu[0] } else { a.split };
    let slack = 1e-9 * h_sim.induced_one_norm().max(1.0);
    Ok(SimulationCertificate {
        eps_enc_measured,
        eps_measured,
        eps_enc_requested: eps_enc,
        eps_requested: eps,
        gap_target,
        gap_sim,
        low_split: a.split,
        gap_ok: gap_sim >= gap_target - 2.0 * eps_measured - slack,
        passed: eps_enc_measured <= eps_enc && eps_measured <= eps,
    })
}

/// `V† H_sim V` for `V` spanning the `N` lowest eigenvectors (basis-dependent; compare spectra).
pub fn effective_low_block(h_sim: &SparseSymmetricOperator, n: usize) -> Result<DMatrix<f64>> {
    if n == 0 || n > h_sim.dim() {
        return Err(Error::InvalidArgument(format!("N = {n} for dimension {}", h_sim.dim())));
    }
    let want = (n + 1).min(h_sim.dim());
    let sol = lowest_eigenpairs(h_sim, want)?;
    if want > n {
        let split = sol.values[n] - sol.values[n - 1];
        if split <= SPLIT_TOLERANCE * h_sim.induced_one_norm().max(1.0) {
            return Err(Error::Degenerate(format!("split {split:e} at N = {n}")));
        }
    }
    let csr = h_sim.to_csr();
    let images: Vec<Vec<f64>> = sol.vectors[..n]
        .iter()
        .map(|v| {
            let mut y = vec![0.0; v.len()];
            crate::linalg::LinearOperator::apply(&csr, v, &mut y);
            y
        })
        .collect();
    let m = DMatrix::from_fn(n, n, |i, j| dot(&sol.vectors[i], &images[j]));
    Ok((&m + m.transpose()) * 0.5)
}

/// Second-order low block `V₋₋ − V₋₊ (Δ H₀)₊₊⁻¹ V₊₋` with `V = Δ^{1/2} V_main + V_extra`,
/// expressed in the logical basis of a basis-map encoding whose image is `ker H₀`.
pub fn second_order_low_block(
    h0: &SparseSymmetricOperator,
    vmain: &SparseSymmetricOperator,
    vextra: &SparseSymmetricOperator,
    delta: f64,
    e: &Isometry,
) -> Result<DMatrix<f64>> {
    let map = e.basis_map().ok_or_else(|| Error::InvalidArgument("encoding must be a basis map".into()))?;
    let dim = h0.dim();
    if vmain.dim() != dim || vextra.dim() != dim || e.physical_dim() != dim {
        return Err(Error::DimensionMismatch("gadget pieces".into()));
    }
    let minus: BTreeMap<usize, usize> = map.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let v = vmain.combine(delta.sqrt(), vextra, 1.0)?;
    let vcsr = v.to_csr();
    let hcsr = h0.to_csr();
    let n = map.len();
    let mut out = DMatrix::zeros(n, n);
    for (a, &ia) in map.iter().enumerate() {
        for (j, val) in vcsr.row(ia) {
            if let Some(&b) = minus.get(&j) {
                out[(a, b)] += val;
            }
        }
    }
    // Plus-space support reached from the low states, closed under H₀ couplings.
    let mut reach: Vec<usize> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &i in &map {
        for (j, _) in vcsr.row(i) {
            if !minus.contains_key(&j) && seen.insert(j) {
                reach.push(j);
            }
        }
    }
    let mut head = 0;
    while head < reach.len() {
        let i = reach[head];
        head += 1;
        for (j, _) in hcsr.row(i) {
            if minus.contains_key(&j) {
                return Err(Error::Structure("H0 couples the encoded subspace to its complement".into()));
            }
            if seen.insert(j) {
                reach.push(j);
            }
        }
    }
    if reach.is_empty() {
        return Ok(out);
    }
    if reach.len() > DENSE_LIMIT {
        return Err(Error::MemoryGuard(format!("plus-space support of size {}", reach.len())));
    }
    reach.sort_unstable();
    let block = h0.restrict(&reach) * delta;
    let coupling = DMatrix::from_fn(reach.len(), n, |r, b| v.get(reach[r], map[b]));
    let chol = block
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Structure("(H0)++ is not positive definite on the coupled support".into()))?;
    let solved = chol.solve(&coupling);
    let second = coupling.transpose() * solved;
    out -= second;
    Ok((&out + out.transpose()) * 0.5)
}

/// Maximum difference between two ascending spectra of equal length.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} eigenvalues", a.len(), b.len())));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Ok(x.iter().zip(&y).fold(0.0, |m, (p, q)| m.max((p - q).abs())))
}

/// Ascending eigenvalues of a symmetric dense matrix.
pub fn dense_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    dense_eigen(m).values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_from_pauli, PauliTermList};
    use crate::path::PiecewiseLinearPath;

    fn minus_x(n: usize) -> SparseSymmetricOperator {
        build_from_pauli(&PauliTermList::uniform_x(n, 1.0)).unwrap()
    }

    #[test]
    fn pauli_spectrum_and_components() {
        let sol = lowest_eigenpairs(&minus_x(1), 2).unwrap();
        assert!((sol.values[0] + 1.0).abs() < 1e-12 && (sol.values[1] - 1.0).abs() < 1e-12);
        let h = SparseSymmetricOperator::from_triples(2, [(0, 0, 3.0), (1, 2, -1.0), (3, 3, 0.5)]).unwrap();
        assert_eq!(components(&h), vec![vec![0], vec![1, 2], vec![3]]);
        let sol = lowest_eigenpairs(&h, 4).unwrap();
        assert_eq!(sol.values, vec![-1.0, 0.5, 1.0, 3.0]);
        assert!(sol.max_residual(&h) < 1e-12);
    }

    #[test]
    fn gap_scan_x_to_z() {
        let z = SparseSymmetricOperator::from_triples(1, [(0, 0, -1.0), (1, 1, 1.0)]).unwrap();
        let p = HamiltonianPath::Piecewise(PiecewiseLinearPath::new(vec![(0.0, minus_x(1)), (1.0, z)]).unwrap());
        let scan = gap_scan(&p, 101).unwrap();
        assert!((scan.min_gap - 2f64.sqrt()).abs() < 1e-9);
        assert!((scan.t_min - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_embedding_certificate() {
        let h = minus_x(1);
        let mut hs = SparseSymmetricOperator::zeros(2).unwrap();
        hs.set(0, 1, -1.0).unwrap();
        hs.set(2, 2, 50.0).unwrap();
        hs.set(3, 3, 60.0).unwrap();
        let e = Isometry::from_basis_map(4, &[0, 1]).unwrap();
        let c = verify_simulation(&h, &hs, &e, 1e-12, 1e-12).unwrap();
        assert!(c.passed && c.gap_ok);
        assert!(c.eps_measured < 1e-12 && c.eps_enc_measured < 1e-7);
        let bad = Isometry::from_basis_map(4, &[2, 3]).unwrap();
        let c = verify_simulation(&h, &hs, &bad, 1.0, 100.0).unwrap();
        assert!((c.eps_enc_measured - 2f64.sqrt()).abs() < 1e-12);
        assert!(!c.passed);
        let block = effective_low_block(&hs, 2).unwrap();
        assert!(spectrum_distance(&dense_spectrum(&block), &[-1.0, 1.0]).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_split_refused() {
        let hs = SparseSymmetricOperator::from_triples(2, [(0, 0, 0.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 5.0)]).unwrap();
        let h = SparseSymmetricOperator::from_triples(1, [(0, 0, 0.0), (1, 1, 1.0)]).unwrap();
        let e = Isometry::from_basis_map(4, &[0, 1]).unwrap();
        assert!(matches!(verify_simulation(&h, &hs, &e, 1.0, 1.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn isometry_checks() {
        assert!(Isometry::from_basis_map(4, &[1, 1]).is_err());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let e = Isometry::new(2, vec![vec![(0, r), (1, r)], vec![(0, r), (1, -r)]]).unwrap();
        assert!(e.basis_map().is_none());
        assert!(Isometry::new(2, vec![vec![(0, 1.0)], vec![(0, r), (1, r)]]).is_err());
        let inner = Isometry::from_basis_map(4, &[3, 0]).unwrap();
        let outer = Isometry::from_basis_map(8, &[1, 2, 4, 7]).unwrap();
        assert_eq!(inner.then(&outer).unwrap().basis_map(), Some(vec![7, 1]));
    }
}
