//! Linear-algebra backends: dense symmetric eigensolves, a Sturm-bisection solver for
//! discretized 1-D Schrödinger operators, a restarted block subspace eigensolver, and a
//! banded Cholesky factorization for shift-and-invert.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A real symmetric operator accessible through products.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Diagonal of the operator, when it is cheap to obtain.
    fn diagonal(&self) -> Option<Vec<f64>> {
        None
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn normalize(a: &mut [f64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Two passes of classical Gram–Schmidt against an orthonormal set.
pub fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
}

/// Compressed sparse rows with full symmetric storage.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                indices.push(j);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        Self { indptr, indices, data }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.indptr.len() - 1
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some((0..self.dim()).map(|i| self.row(i).find(|&(j, _)| j == i).map_or(0.0, |(_, v)| v)).collect())
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some((0..self.nrows()).map(|i| self[(i, i)]).collect())
    }
}

/// Ascending eigenvalues with matching orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `μ₁ − μ₀`, if at least two pairs are present.
    pub fn gap(&self) -> Option<f64> {
        (self.values.len() >= 2).then(|| self.values[1] - self.values[0])
    }

    /// Largest residual `‖A v_k − μ_k v_k‖`.
    pub fn max_residual(&self, op: &dyn LinearOperator) -> f64 {
        let mut y = vec![0.0; op.dim()];
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&mu, v)| {
                op.apply(v, &mut y);
                axpy(-mu, v, &mut y);
                norm(&y)
            })
            .fold(0.0, f64::max)
    }

    pub fn truncate(&mut self, k: usize) {
        self.values.truncate(k);
        self.vectors.truncate(k);
    }
}

/// Full eigendecomposition of a dense symmetric matrix, ascending.
pub fn dense_eigen(m: &DMatrix<f64>) -> EigenSolution {
    let n = m.nrows();
    if n == 0 {
        return EigenSolution { values: vec![], vectors: vec![] };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    EigenSolution {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
    }
}

/// The `k` lowest eigenpairs of a dense symmetric matrix.
pub fn dense_lowest(m: &DMatrix<f64>, k: usize) -> EigenSolution {
    let mut sol = dense_eigen(m);
    sol.truncate(k);
    sol
}

/// Eigenvalues of a symmetric tridiagonal matrix (diagonal `d`, off-diagonal `e`).
pub fn tridiagonal_eigen(d: &[f64], e: &[f64]) -> EigenSolution {
    let n = d.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = d[i];
        if i + 1 < n {
            m[(i, i + 1)] = e[i];
            m[(i + 1, i)] = e[i];
        }
    }
    dense_eigen(&m)
}

/// Symmetric tridiagonal matrix `b·L + diag(v)` where `L` is the Dirichlet second-difference
/// matrix (2 on the diagonal, −1 off it). Eigenvalues come from Sturm bisection on the
/// "excess" pivots `e_k = d_k − b`, which avoids the cancellation between `2b` and `b`
/// and resolves near-degenerate low pairs to high relative accuracy; eigenvectors come
/// from inverse iteration on the same factorization.
#[derive(Clone, Debug)]
pub struct SchrodingerChain {
    pub b: f64,
    pub v: Vec<f64>,
}

impl SchrodingerChain {
    pub fn new(b: f64, v: Vec<f64>) -> Result<Self> {
        if !(b > 0.0) || v.is_empty() {
            return Err(Error::InvalidArgument("chain needs b > 0 and at least one site".into()));
        }
        Ok(Self { b, v })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Pivots `d_k = b + e_k` of `T − σI`.
    fn pivots(&self, sigma: f64, out: &mut Vec<f64>) {
        out.clear();
        let b = self.b;
        let tiny = f64::MIN_POSITIVE.sqrt() * b;
        let mut e = b + self.v[0] - sigma;
        for k in 0..self.v.len() {
            if k > 0 {
                let prev = out[k - 1];
                e = self.v[k] - sigma + b * (prev - b) / prev;
            }
            let mut d = b + e;
            if d == 0.0 {
                d = -tiny;
            }
            out.push(d);
        }
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let b = self.b;
        let tiny = f64::MIN_POSITIVE.sqrt() * b;
        let mut count = 0;
        let mut prev = 0.0;
        for k in 0..self.v.len() {
            let e = if k == 0 { b + self.v[0] - sigma } else { self.v[k] - sigma + b * (prev - b) / prev };
            let mut d = b + e;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
            prev = d;
        }
        count
    }

    /// The `j`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let vmin = self.v.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut lo = vmin - 1.0;
        let mut hi = vmax + 4.0 * self.b + 1.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(T − σI) x = y` in place.
    fn solve_shifted(&self, sigma: f64, piv: &mut Vec<f64>, x: &mut [f64]) {
        self.pivots(sigma, piv);
        let b = self.b;
        let n = x.len();
        for k in 1..n {
            x[k] += b / piv[k - 1] * x[k - 1];
        }
        for k in 0..n {
            x[k] /= piv[k];
        }
        for k in (0..n - 1).rev() {
            x[k] += b / piv[k] * x[k + 1];
        }
    }

    /// The `k` lowest eigenpairs; vectors have unit Euclidean norm.
    pub fn lowest(&self, k: usize) -> EigenSolution {
        let n = self.v.len();
        let k = k.min(n);
        let mut values = Vec::with_capacity(k);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut piv = Vec::with_capacity(n);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for j in 0..k {
            let mu = self.eigenvalue(j);
            let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            for _ in 0..4 {
                orthogonalize(&mut x, &vectors);
                self.solve_shifted(mu, &mut piv, &mut x);
                normalize(&mut x);
            }
            orthogonalize(&mut x, &vectors);
            normalize(&mut x);
            values.push(mu);
            vectors.push(x);
        }
        EigenSolution { values, vectors }
    }
}

impl LinearOperator for SchrodingerChain {
    fn dim(&self) -> usize {
        self.v.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = x.len();
        let b = self.b;
        for i in 0..n {
            let mut s = (2.0 * b + self.v[i]) * x[i];
            if i > 0 {
                s -= b * x[i - 1];
            }
            if i + 1 < n {
                s -= b * x[i + 1];
            }
            y[i] = s;
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some(self.v.iter().map(|v| 2.0 * self.b + v).collect())
    }
}

/// Which end of the spectrum a subspace solve targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Smallest,
    Largest,
}

/// Expansion rule of the subspace solver.
#[derive(Clone, Debug)]
pub enum Expansion {
    /// Residual expansion; spans the same block Krylov space as Lanczos.
    Krylov,
    /// Residuals scaled by `(diag − θ)^{-1}` (Davidson).
    Diagonal(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Residual tolerance relative to `scale`.
    pub tol: f64,
    /// Norm scale of the operator (e.g. an induced-norm bound).
    pub scale: f64,
    pub max_matvecs: usize,
    pub max_basis: usize,
    pub seed: u64,
}

impl SolverOptions {
    pub fn new(dim: usize, scale: f64) -> Self {
        Self { tol: 1e-10, scale: scale.max(f64::MIN_POSITIVE), max_matvecs: 50 * dim, max_basis: 0, seed: 7 }
    }
}

/// Restarted block subspace eigensolver for `k` extremal pairs.
///
/// Each sweep does Rayleigh–Ritz on the current basis, expands by the (optionally
/// preconditioned) residuals of the unconverged target pairs, and thick-restarts onto the
/// best Ritz vectors when the basis is full. With [`Expansion::Krylov`] the basis is a
/// block Krylov space, i.e. this is a thick-restart block Lanczos method.
pub fn subspace_eigensolver(
    op: &dyn LinearOperator,
    k: usize,
    target: Target,
    expansion: &Expansion,
    opts: &SolverOptions,
) -> Result<EigenSolution> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} for dimension {n}")));
    }
    let block = (k + 2).min(n);
    let max_basis = if opts.max_basis > 0 { opts.max_basis } else { (4 * block + 30).max(50) }.min(n);
    let keep = (2 * block).min(max_basis.saturating_sub(block)).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut matvecs = 0usize;

    let mut pending: Vec<Vec<f64>> =
        (0..block).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    let threshold = opts.tol * opts.scale;
    let mut last_res = f64::INFINITY;

    loop {
        for mut v in pending.drain(..) {
            let before = norm(&v);
            orthogonalize(&mut v, &basis);
            let after = norm(&v);
            if after <= 1e-10 * before || after == 0.0 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= after);
            let mut w = vec![0.0; n];
            op.apply(&v, &mut w);
            matvecs += 1;
            basis.push(v);
            images.push(w);
        }
        let m = basis.len();
        if m < k {
            // Basis exhausted (invariant subspace smaller than k); refill randomly.
            if basis.len() >= n {
                return Err(Error::NoConvergence("basis exhausted".into()));
            }
            pending.push((0..n).map(|_| rng.random::<f64>() - 0.5).collect());
            continue;
        }
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let mut small = dense_eigen(&h);
        if target == Target::Largest {
            small.values.reverse();
            small.vectors.reverse();
        }
        let combine = |coeffs: &[f64], src: &[Vec<f64>]| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (c, s) in coeffs.iter().zip(src) {
                axpy(*c, s, &mut out);
            }
            out
        };
        let want = keep.min(m);
        let ritz: Vec<Vec<f64>> = (0..want).map(|i| combine(&small.vectors[i], &basis)).collect();
        let ritz_img: Vec<Vec<f64>> = (0..want).map(|i| combine(&small.vectors[i], &images)).collect();
        let mut residuals = Vec::with_capacity(k);
        let mut worst = 0.0f64;
        for i in 0..k {
            let mut r = ritz_img[i].clone();
            axpy(-small.values[i], &ritz[i], &mut r);
            let rn = norm(&r);
            worst = worst.max(rn);
            residuals.push((rn, r));
        }
        if worst <= threshold || m >= n {
            let vectors: Vec<Vec<f64>> = ritz.into_iter().take(k).collect();
            let mut values: Vec<f64> = small.values[..k].to_vec();
            let mut pairs: Vec<(f64, Vec<f64>)> = values.drain(..).zip(vectors).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (values, vectors) = pairs.into_iter().unzip();
            return Ok(EigenSolution { values, vectors });
        }
        if matvecs >= opts.max_matvecs {
            return Err(Error::NoConvergence(format!(
                "{matvecs} products, worst residual {worst:.3e} (threshold {threshold:.3e}, previous {last_res:.3e})"
            )));
        }
        last_res = worst;
        for (i, (rn, r)) in residuals.into_iter().enumerate() {
            if rn <= threshold {
                continue;
            }
            let t = match expansion {
                Expansion::Krylov => r,
                Expansion::Diagonal(d) => {
                    let theta = small.values[i];
                    let floor = 1e-8 * opts.scale;
                    let t: Vec<f64> = r
                        .iter()
                        .zip(d)
                        .map(|(ri, di)| {
                            let mut den = di - theta;
                            if den.abs() < floor {
                                den = if den < 0.0 { -floor } else { floor };
                            }
                            ri / den
                        })
                        .collect();
                    let mut probe = t.clone();
                    orthogonalize(&mut probe, &basis);
                    if norm(&probe) <= 1e-8 * norm(&t) {
                        r
                    } else {
                        t
                    }
                }
            };
            pending.push(t);
        }
        if basis.len() + pending.len() > max_basis {
            basis = ritz;
            images = ritz_img;
            // Re-orthonormalize the kept Ritz block to counter drift.
            let mut nb: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
            let mut ni: Vec<Vec<f64>> = Vec::with_capacity(basis.len());
            for (mut v, _) in basis.into_iter().zip(images) {
                orthogonalize(&mut v, &nb);
                if normalize(&mut v) > 1e-12 {
                    let mut w = vec![0.0; n];
                    op.apply(&v, &mut w);
                    matvecs += 1;
                    nb.push(v);
                    ni.push(w);
                }
            }
            basis = nb;
            images = ni;
            pending.truncate(max_basis.saturating_sub(basis.len()).max(1));
        }
    }
}

/// Banded Cholesky factor `A = L Lᵀ` of a symmetric positive definite band matrix.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` stores columns `i − bw ..= i`.
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors the matrix whose lower band is given by `entry(i, j)` for `i − bw <= j <= i`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let at = |i: usize, j: usize| i * w + bw - (i - j);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = entry(i, j);
                if k0 < j {
                    let ri = &l[at(i, k0)..at(i, j)];
                    let rj = &l[at(j, k0)..at(j, j)];
                    s -= dot(ri, rj);
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "band matrix not positive definite at row {i}"
                        )));
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        let bw = self.bw;
        let at = |i: usize, j: usize| i * w + bw - (i - j);
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            let s = dot(&self.l[at(i, j0)..at(i, i)], &x[j0..i]);
            x[i] = (x[i] - s) / self.l[at(i, i)];
        }
        for i in (0..self.n).rev() {
            x[i] /= self.l[at(i, i)];
            let xi = x[i];
            let j0 = i.saturating_sub(bw);
            for (j, xj) in x.iter_mut().enumerate().take(i).skip(j0) {
                *xj -= self.l[at(i, j)] * xi;
            }
        }
    }
}

/// `(A − σI)^{-1}` through a banded Cholesky factor.
pub struct ShiftInvert {
    pub chol: BandCholesky,
}

impl LinearOperator for ShiftInvert {
    fn dim(&self) -> usize {
        self.chol.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        self.chol.solve_in_place(y);
    }
}

/// Principal-angle distance between the column spans of two orthonormal sets:
/// `min_U ‖A U − B‖_F = sqrt(2 Σ (1 − cos θ_i))`.
pub fn subspace_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} columns", a.len(), b.len())));
    }
    let d = a.len();
    if d == 0 {
        return Ok(0.0);
    }
    let m = DMatrix::from_fn(d, d, |i, j| dot(&a[i], &b[j]));
    let sv = m.svd(false, false).singular_values;
    let s: f64 = sv.iter().map(|c| 1.0 - c.min(1.0)).sum();
    Ok((2.0 * s.max(0.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, b: f64, v: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 2.0 * b + v[i];
            if i + 1 < n {
                m[(i, i + 1)] = -b;
                m[(i + 1, i)] = -b;
            }
        }
        m
    }

    #[test]
    fn chain_matches_dense() {
        let n = 40;
        let v: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37).sin() * 3.0).collect();
        let chain = SchrodingerChain::new(5.0, v.clone()).unwrap();
        let dense = dense_eigen(&laplacian(n, 5.0, &v));
        let sol = chain.lowest(4);
        for j in 0..4 {
            assert!((sol.values[j] - dense.values[j]).abs() < 1e-10);
            let overlap = dot(&sol.vectors[j], &dense.vectors[j]).abs();
            assert!((overlap - 1.0).abs() < 1e-10);
        }
        assert!(sol.max_residual(&chain) < 1e-9);
    }

    #[test]
    fn free_chain_closed_form() {
        let n = 30;
        let chain = SchrodingerChain::new(1.0, vec![0.0; n]).unwrap();
        for j in 0..5 {
            let exact = 4.0 * ((j + 1) as f64 * std::f64::consts::PI / (2.0 * (n + 1) as f64)).sin().powi(2);
            assert!((chain.eigenvalue(j) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn subspace_solver_krylov_and_davidson() {
        let n = 300;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).cos() * 10.0 + i as f64 * 0.05).collect();
        let m = laplacian(n, 3.0, &v);
        let dense = dense_eigen(&m);
        let opts = SolverOptions::new(n, 30.0);
        for exp in [Expansion::Krylov, Expansion::Diagonal(m.diagonal().iter().copied().collect())] {
            let sol = subspace_eigensolver(&m, 3, Target::Smallest, &exp, &opts).unwrap();
            for j in 0..3 {
                assert!((sol.values[j] - dense.values[j]).abs() < 1e-8, "{exp:?}");
            }
        }
    }

    #[test]
    fn band_cholesky_solves() {
        let n = 50;
        let m = laplacian(n, 1.0, &vec![0.5; n]);
        let chol = BandCholesky::factor(n, 1, |i, j| m[(i, j)]).unwrap();
        let x0: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        m.apply(&x0, &mut b);
        chol.solve_in_place(&mut b);
        for i in 0..n {
            assert!((b[i] - x0[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn subspace_distance_cases() {
        let e0 = vec![1.0, 0.0];
        let e1 = vec![0.0, 1.0];
        assert!(subspace_distance(std::slice::from_ref(&e0), std::slice::from_ref(&e0)).unwrap() < 1e-15);
        let d = subspace_distance(std::slice::from_ref(&e0), std::slice::from_ref(&e1)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let neg: Vec<f64> = e0.iter().map(|x| -x).collect();
        assert!(subspace_distance(&[e0], &[neg]).unwrap() < 1e-15);
    }
}
