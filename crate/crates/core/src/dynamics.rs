//! Time-dependent Schrödinger integration `i dψ/dt = T·H(t)ψ` with midpoint
//! exponentials, fidelity, projective measurement and the adiabatic time heuristic.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::continuous::QhdPath;
use crate::error::{Error, Result};
use crate::linalg::{dense_eigen, tridiagonal_eigen, LinearOperator};
use crate::path::{HamiltonianPath, PiecewiseLinearPath};

/// Largest state dimension accepted by [`evolve`].
pub const MAX_EVOLVE_DIM: usize = 1 << 18;

/// Generators up to this dimension are exponentiated by full diagonalization.
pub const DENSE_EVOLVE_DIM: usize = 512;

/// Aborts an evolution when `|‖ψ‖ − 1|` exceeds this.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Constant of [`required_time`].
pub const TIME_CONSTANT: f64 = 10.0;

/// A Hamiltonian depending on a real parameter on a closed interval.
pub trait TimeDependent: Sync {
    fn dim(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    fn generator(&self, t: f64) -> Result<Box<dyn LinearOperator + '_>>;
}

impl TimeDependent for PiecewiseLinearPath {
    fn dim(&self) -> usize {
        1 << self.num_qubits()
    }
    fn domain(&self) -> (f64, f64) {
        PiecewiseLinearPath::domain(self)
    }
    fn generator(&self, t: f64) -> Result<Box<dyn LinearOperator + '_>> {
        Ok(Box::new(self.eval(t)?))
    }
}

impl TimeDependent for HamiltonianPath {
    fn dim(&self) -> usize {
        1 << self.num_qubits()
    }
    fn domain(&self) -> (f64, f64) {
        HamiltonianPath::domain(self)
    }
    fn generator(&self, t: f64) -> Result<Box<dyn LinearOperator + '_>> {
        Ok(Box::new(self.eval(t)?))
    }
}

impl TimeDependent for QhdPath {
    fn dim(&self) -> usize {
        self.params.grid.points().pow(self.params.num_axes() as u32)
    }
    fn domain(&self) -> (f64, f64) {
        QhdPath::domain(self)
    }
    fn generator(&self, t: f64) -> Result<Box<dyn LinearOperator + '_>> {
        Ok(Box::new(self.operator_at(t)?))
    }
}

/// Traverses another path backwards: `H_rev(t) = H(lo + hi − t)`.
pub struct Reversed<'a>(pub &'a dyn TimeDependent);

impl TimeDependent for Reversed<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }
    fn generator(&self, t: f64) -> Result<Box<dyn LinearOperator + '_>> {
        let (lo, hi) = self.0.domain();
        self.0.generator(lo + hi - t)
    }
}

pub struct EvolutionSpec<'a> {
    pub path: &'a dyn TimeDependent,
    /// Time multiplier `T`; a negative value runs the dynamics backwards.
    pub total_time: f64,
    pub steps: usize,
    pub initial: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResult {
    pub state: Vec<Complex64>,
    /// Largest `|‖ψ‖ − 1|` seen over all steps.
    pub norm_drift: f64,
}

pub fn state_norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Real basis state embedded as a complex vector.
pub fn basis_state(dim: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[k] = Complex64::new(1.0, 0.0);
    v
}

pub fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Midpoint-exponential stepping `ψ ← exp(−i·T·Δt·H(t_mid))ψ`.
pub fn evolve(spec: &EvolutionSpec<'_>) -> Result<EvolutionResult> {
    let dim = spec.path.dim();
    if spec.steps < 10 {
        return Err(Error::InvalidArgument(format!("at least 10 steps required, got {}", spec.steps)));
    }
    if dim > MAX_EVOLVE_DIM {
        return Err(Error::MemoryGuard(format!("state dimension {dim} exceeds {MAX_EVOLVE_DIM}")));
    }
    if spec.initial.len() != dim {
        return Err(Error::DimensionMismatch(format!("initial state has {} entries for dimension {dim}", spec.initial.len())));
    }
    if !spec.total_time.is_finite() {
        return Err(Error::InvalidArgument("total time must be finite".into()));
    }
    if (state_norm(&spec.initial) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("initial state is not normalized".into()));
    }
    let (lo, hi) = spec.path.domain();
    let dt = (hi - lo) / spec.steps as f64;
    let tau = spec.total_time * dt;
    let mut psi = spec.initial.clone();
    let mut drift: f64 = 0.0;
    for k in 0..spec.steps {
        let t = lo + (k as f64 + 0.5) * dt;
        let h = spec.path.generator(t)?;
        psi = if dim <= DENSE_EVOLVE_DIM {
            dense_expm(h.as_ref(), tau, &psi)
        } else {
            krylov_expm(h.as_ref(), tau, &psi, 1e-10)?
        };
        drift = drift.max((state_norm(&psi) - 1.0).abs());
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { drift });
        }
    }
    Ok(EvolutionResult { state: psi, norm_drift: drift })
}

fn densify(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut y);
        for i in 0..n {
            m[(i, j)] = y[i];
        }
        e[j] = 0.0;
    }
    m
}

/// `exp(−iτH)ψ` through a full eigendecomposition.
pub fn dense_expm(op: &dyn LinearOperator, tau: f64, psi: &[Complex64]) -> Vec<Complex64> {
    let eig = dense_eigen(&densify(op));
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (lam, v) in eig.values.iter().zip(&eig.vectors) {
        let c: Complex64 = v.iter().zip(psi).map(|(a, b)| b * a).sum();
        let c = c * Complex64::from_polar(1.0, -tau * lam);
        for (o, a) in out.iter_mut().zip(v) {
            *o += c * a;
        }
    }
    out
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn apply_complex(op: &dyn LinearOperator, x: &[Complex64], y: &mut [Complex64], re: &mut [f64], im: &mut [f64]) {
    let n = x.len();
    let xr: Vec<f64> = x.iter().map(|c| c.re).collect();
    let xi: Vec<f64> = x.iter().map(|c| c.im).collect();
    op.apply(&xr, re);
    op.apply(&xi, im);
    for k in 0..n {
        y[k] = Complex64::new(re[k], im[k]);
    }
}

/// `exp(−iτH)ψ` by Lanczos with an a-posteriori error estimate; the step is split
/// into substeps until every piece meets `tol` relative to ‖ψ‖.
pub fn krylov_expm(op: &dyn LinearOperator, tau: f64, psi: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    const MAX_KRYLOV: usize = 40;
    let n = psi.len();
    let mut substeps = 1usize;
    'outer: loop {
        if substeps > 1 << 20 {
            return Err(Error::NoConvergence("Krylov exponential needs too many substeps".into()));
        }
        let h = tau / substeps as f64;
        let mut cur = psi.to_vec();
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        // Doubling `substeps` restarts 'outer, so the range is never mutated mid-iteration.
        #[allow(clippy::mut_range_bound)]
        for _ in 0..substeps {
            let beta0 = state_norm(&cur);
            if beta0 == 0.0 {
                return Ok(cur);
            }
            let mut basis: Vec<Vec<Complex64>> = vec![cur.iter().map(|c| c / beta0).collect()];
            let (mut alpha, mut beta) = (Vec::new(), Vec::new());
            let mut done = None;
            for j in 0..MAX_KRYLOV.min(n) {
                apply_complex(op, &basis[j], &mut w, &mut re, &mut im);
                let a = cdot(&basis[j], &w).re;
                alpha.push(a);
                for (wk, q) in w.iter_mut().zip(&basis[j]) {
                    *wk -= q * a;
                }
                if j > 0 {
                    let b: f64 = beta[j - 1];
                    for (wk, q) in w.iter_mut().zip(&basis[j - 1]) {
                        *wk -= q * b;
                    }
                }
                // Full reorthogonalization keeps the small basis orthonormal.
                for q in &basis {
                    let c = cdot(q, &w);
                    for (wk, qk) in w.iter_mut().zip(q) {
                        *wk -= qk * c;
                    }
                }
                let b = state_norm(&w);
                let coeffs = small_expm(&alpha, &beta, h);
                let err = b * coeffs[j].norm();
                if err <= tol || b <= 1e-14 * a.abs().max(1.0) || j + 1 == n {
                    done = Some(coeffs);
                    break;
                }
                beta.push(b);
                basis.push(w.iter().map(|c| c / b).collect());
            }
            let Some(coeffs) = done else {
                substeps *= 2;
                continue 'outer;
            };
            let mut next = vec![Complex64::new(0.0, 0.0); n];
            for (c, q) in coeffs.iter().zip(&basis) {
                let c = c * beta0;
                for (o, x) in next.iter_mut().zip(q) {
                    *o += c * x;
                }
            }
            cur = next;
        }
        return Ok(cur);
    }
}

/// First column of `exp(−iτT)` for the Lanczos tridiagonal `T`.
fn small_expm(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<Complex64> {
    let eig = tridiagonal_eigen(alpha, &beta[..alpha.len() - 1]);
    let k = alpha.len();
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    for (lam, v) in eig.values.iter().zip(&eig.vectors) {
        let c = Complex64::from_polar(v[0], -tau * lam);
        for (o, &x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// `|⟨target|ψ⟩|²`.
pub fn fidelity(psi: &[Complex64], target: &[Complex64]) -> Result<f64> {
    if psi.len() != target.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} entries", psi.len(), target.len())));
    }
    Ok(cdot(target, psi).norm_sqr())
}

/// `shots` i.i.d. samples from `|ψ_k|²`, deterministic in `seed`.
pub fn measure(psi: &[Complex64], shots: usize, seed: u64) -> Result<BTreeMap<usize, usize>> {
    let weights: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(format!("bad state: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = BTreeMap::new();
    for _ in 0..shots {
        *hist.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Heuristic adiabatic time `C·M²/(δ³ε)` with `C = 10`.
pub fn required_time(m_norm: f64, delta: f64, eps: f64) -> f64 {
    TIME_CONSTANT * m_norm * m_norm / (delta.powi(3) * eps)
}
