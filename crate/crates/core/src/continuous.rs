//! Finite-difference embedding of transverse-field-plus-diagonal Hamiltonians into
//! Schrödinger operators on the box [−1, 1]^n: the double-well operator X̂, its
//! tunnelling scale Λ(λ), the interpolated diagonal D̂, the low-energy comparison with
//! the qubit Hamiltonian, and the QHD objective, schedule and path.
//!
//! Grid functions are stored as nodal values with unit discrete L² norm
//! (`h^n Σ v² = 1`). Tensor grids are indexed with axis 0 most significant, matching
//! the big-endian qubit order (axis `i` ↔ qubit `i`).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    dense_eigen, dot, normalize, subspace_eigensolver, BandCholesky, EigenSolution, Expansion, LinearOperator,
    SchrodingerChain, ShiftInvert, SolverOptions, Target,
};
use crate::operator::DiagonalOperator;

/// Largest tensor grid accepted by [`build_hat_hamiltonian`].
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Default ramp width of D̂.
pub const DEFAULT_W: f64 = 0.25;

/// Interior nodes `ξ_k = −1 + k·h`, `k = 1..=m`, `h = 2/(m+1)`, Dirichlet ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid1D {
    m: usize,
}

impl Grid1D {
    pub fn new(m: usize) -> Result<Self> {
        if m < 64 {
            return Err(Error::InvalidArgument(format!("grid needs at least 64 points, got {m}")));
        }
        Ok(Self { m })
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.m + 1) as f64
    }

    /// Position of node `k` (0-based).
    pub fn node(&self, k: usize) -> f64 {
        -1.0 + (k + 1) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|k| self.node(k)).collect()
    }

    /// Quadrature weights of ∫_a^b over the piecewise-linear interpolant of nodal values
    /// (zero at ±1). Full segments reduce to the trapezoidal rule.
    pub fn interval_weights(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        if !(a >= -1.0 && b <= 1.0 && a < b) {
            return Err(Error::InvalidArgument(format!("interval [{a}, {b}] is empty or outside [−1, 1]")));
        }
        let h = self.spacing();
        let mut w = vec![0.0; self.m];
        // Extended node j ∈ 0..=m+1 sits at −1 + j·h; interior node k is j = k + 1.
        for j in 0..=self.m {
            let (x0, x1) = (-1.0 + j as f64 * h, -1.0 + (j + 1) as f64 * h);
            let (c0, c1) = (a.max(x0), b.min(x1));
            if c1 <= c0 {
                continue;
            }
            let left = ((x1 - c0).powi(2) - (x1 - c1).powi(2)) / (2.0 * h);
            let right = ((c1 - x0).powi(2) - (c0 - x0).powi(2)) / (2.0 * h);
            if j >= 1 {
                w[j - 1] += left;
            }
            if j < self.m {
                w[j] += right;
            }
        }
        Ok(w)
    }
}

/// f_dw(z) = (z² − 1/4)².
pub fn f_dw(z: f64) -> f64 {
    let s = z * z - 0.25;
    s * s
}

/// Central-difference X̂(λ) = −d²/dξ² + λ² f_dw(ξ) on the grid.
pub fn discretize_double_well(lambda: f64, g: &Grid1D) -> SchrodingerChain {
    let h = g.spacing();
    let v = g.nodes().iter().map(|&x| lambda * lambda * f_dw(x)).collect();
    SchrodingerChain::new(1.0 / (h * h), v).expect("grid is non-empty")
}

/// Λ(λ) = 2/(μ₁ − μ₀) of the discretized X̂(λ).
pub fn tunnelling_scale(lambda: f64, g: &Grid1D) -> f64 {
    let x = discretize_double_well(lambda, g);
    2.0 / (x.eigenvalue(1) - x.eigenvalue(0))
}

/// Grid reflection ξ ↦ −ξ.
pub fn reflect(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

/// Low-energy data of X̂(λ).
#[derive(Clone, Debug)]
pub struct DoubleWellBasis {
    pub lambda: f64,
    pub grid: Grid1D,
    pub chi0: Vec<f64>,
    pub chi1: Vec<f64>,
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub big_lambda: f64,
    pub hat0: Vec<f64>,
    pub hat1: Vec<f64>,
}

impl DoubleWellBasis {
    /// Per-axis energy shift μ₀ + 1/Λ of the qubit picture.
    pub fn shift(&self) -> f64 {
        self.mu0 + 1.0 / self.big_lambda
    }

    /// `⟨χ₀|Pχ₀⟩` and `⟨χ₁|Pχ₁⟩` under grid reflection.
    pub fn parities(&self) -> (f64, f64) {
        let h = self.grid.spacing();
        (h * dot(&self.chi0, &reflect(&self.chi0)), h * dot(&self.chi1, &reflect(&self.chi1)))
    }
}

/// Three lowest eigenpairs of X̂(λ), sign-fixed so that χ₀, χ₁ ≥ 0 on ξ ≥ 0.
pub fn double_well_basis(lambda: f64, g: &Grid1D) -> Result<DoubleWellBasis> {
    if !(5.0..=60.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda must lie in [5, 60], got {lambda}")));
    }
    let x = discretize_double_well(lambda, g);
    let sol = x.lowest(3);
    let scale = 1.0 / g.spacing().sqrt();
    let m = g.points();
    let fix = |v: &[f64]| {
        let right: f64 = v[m / 2..].iter().sum();
        let s = if right < 0.0 { -scale } else { scale };
        v.iter().map(|c| c * s).collect::<Vec<_>>()
    };
    let chi0 = fix(&sol.vectors[0]);
    let chi1 = fix(&sol.vectors[1]);
    let (mu0, mu1, mu2) = (sol.values[0], sol.values[1], sol.values[2]);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let hat0 = chi0.iter().zip(&chi1).map(|(a, b)| r * (a + b)).collect();
    let hat1 = chi0.iter().zip(&chi1).map(|(a, b)| r * (a - b)).collect();
    let basis = DoubleWellBasis {
        lambda,
        grid: *g,
        chi0,
        chi1,
        mu0,
        mu1,
        mu2,
        big_lambda: 2.0 / (mu1 - mu0),
        hat0,
        hat1,
    };
    let (p0, p1) = basis.parities();
    if p0 < 1.0 - 1e-6 || p1 > -(1.0 - 1e-6) {
        return Err(Error::NoConvergence(format!(
            "double-well parity lost (⟨χ₀|Pχ₀⟩ = {p0}, ⟨χ₁|Pχ₁⟩ = {p1}); refine the grid"
        )));
    }
    Ok(basis)
}

/// `∫ u v` over the box `Π [a_i, b_i]` by per-axis piecewise-linear quadrature.
pub fn restricted_inner(u: &[f64], v: &[f64], grids: &[Grid1D], intervals: &[(f64, f64)]) -> Result<f64> {
    if grids.len() != intervals.len() || grids.is_empty() {
        return Err(Error::DimensionMismatch("one interval per grid axis required".into()));
    }
    let dim: usize = grids.iter().map(Grid1D::points).product();
    if u.len() != dim || v.len() != dim {
        return Err(Error::DimensionMismatch(format!("grid vectors must have length {dim}")));
    }
    let weights = grids
        .iter()
        .zip(intervals)
        .map(|(g, &(a, b))| g.interval_weights(a, b))
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    let mut idx = vec![0usize; grids.len()];
    for i in 0..dim {
        let w: f64 = idx.iter().zip(&weights).map(|(&k, w)| w[k]).product();
        total += w * u[i] * v[i];
        advance(&mut idx, grids);
    }
    Ok(total)
}

fn advance(idx: &mut [usize], grids: &[Grid1D]) {
    for a in (0..idx.len()).rev() {
        idx[a] += 1;
        if idx[a] < grids[a].points() {
            return;
        }
        idx[a] = 0;
    }
}

/// Basis index `θ(ξ)` with `θ(ξ_i) = 1` iff `ξ_i < 0`.
pub fn theta_index(xi: &[f64]) -> usize {
    xi.iter().fold(0, |acc, &x| (acc << 1) | usize::from(x < 0.0))
}

/// D̂(ξ) with the diagonal supplied by `query`, which is called exactly once.
pub fn hat_diag_with(xi: &[f64], w: f64, query: &dyn Fn(usize) -> f64) -> Result<f64> {
    if !(w > 0.0 && w < 0.5) {
        return Err(Error::InvalidArgument(format!("ramp width must lie in (0, 1/2), got {w}")));
    }
    if let Some(&x) = xi.iter().find(|x| !(x.abs() <= 1.0)) {
        return Err(Error::InvalidArgument(format!("point coordinate {x} outside [−1, 1]")));
    }
    let xi_min = xi.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    Ok((xi_min / w).min(1.0) * query(theta_index(xi)))
}

/// D̂(ξ) = min{1, ξ_min/w}·⟨θ(ξ)|D|θ(ξ)⟩.
pub fn hat_diag_value(d: &DiagonalOperator, xi: &[f64], w: f64) -> Result<f64> {
    if xi.len() != d.num_qubits() {
        return Err(Error::DimensionMismatch(format!("{} coordinates for {} qubits", xi.len(), d.num_qubits())));
    }
    hat_diag_with(xi, w, &|x| d.get(x))
}

/// `Σ_i a_i (−∂²_i) + V(ξ)` on a tensor grid with Dirichlet ends.
#[derive(Clone, Debug)]
pub struct GridOperator {
    grids: Vec<Grid1D>,
    kinetic: Vec<f64>,
    potential: Vec<f64>,
    strides: Vec<usize>,
}

impl GridOperator {
    pub fn new(grids: Vec<Grid1D>, kinetic: Vec<f64>, potential: Vec<f64>) -> Result<Self> {
        if grids.is_empty() || grids.len() != kinetic.len() {
            return Err(Error::DimensionMismatch("one kinetic coefficient per axis required".into()));
        }
        let dim = grid_size(&grids)?;
        if potential.len() != dim {
            return Err(Error::DimensionMismatch(format!("potential has {} values for {dim} nodes", potential.len())));
        }
        let mut strides = vec![1usize; grids.len()];
        for a in (0..grids.len() - 1).rev() {
            strides[a] = strides[a + 1] * grids[a + 1].points();
        }
        Ok(Self { grids, kinetic, potential, strides })
    }

    /// Samples the potential `v(ξ)` at every node.
    pub fn from_fn(
        grids: Vec<Grid1D>,
        kinetic: Vec<f64>,
        v: impl Fn(&[f64]) -> Result<f64>,
    ) -> Result<Self> {
        let dim = grid_size(&grids)?;
        let mut potential = Vec::with_capacity(dim);
        let mut idx = vec![0usize; grids.len()];
        let mut xi = vec![0.0; grids.len()];
        for _ in 0..dim {
            for (a, g) in grids.iter().enumerate() {
                xi[a] = g.node(idx[a]);
            }
            potential.push(v(&xi)?);
            advance(&mut idx, &grids);
        }
        Self::new(grids, kinetic, potential)
    }

    pub fn grids(&self) -> &[Grid1D] {
        &self.grids
    }

    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Largest index offset of a stencil neighbour.
    pub fn bandwidth(&self) -> usize {
        if self.grids.len() == 1 {
            1
        } else {
            self.strides[0]
        }
    }

    fn hop(&self, a: usize) -> f64 {
        let h = self.grids[a].spacing();
        -self.kinetic[a] / (h * h)
    }

    fn diag_entry(&self, i: usize) -> f64 {
        self.potential[i] - 2.0 * (0..self.grids.len()).map(|a| self.hop(a)).sum::<f64>()
    }

    /// Coordinate of node `i` along axis `a`.
    pub fn coordinate(&self, i: usize, a: usize) -> usize {
        (i / self.strides[a]) % self.grids[a].points()
    }

    /// Matrix entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag_entry(i);
        }
        let (lo, hi) = (i.min(j), i.max(j));
        for a in 0..self.grids.len() {
            if hi - lo == self.strides[a] && self.coordinate(hi, a) >= 1 {
                return self.hop(a);
            }
        }
        0.0
    }

    /// Exact lower bound of the kinetic part: `Σ a_i (2/h_i²)(1 − cos(π/(m_i+1)))`.
    pub fn kinetic_floor(&self) -> f64 {
        self.grids
            .iter()
            .zip(&self.kinetic)
            .map(|(g, &a)| {
                let h = g.spacing();
                a * 2.0 / (h * h) * (1.0 - (std::f64::consts::PI / (g.points() + 1) as f64).cos())
            })
            .sum()
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > crate::operator::DENSE_LIMIT {
            return Err(Error::MemoryGuard(format!("dense grid operator of dimension {n}")));
        }
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut y = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut y);
            m.set_column(j, &nalgebra::DVector::from_column_slice(&y));
            e[j] = 0.0;
        }
        Ok(m)
    }

    /// The `k` lowest eigenpairs with unit Euclidean vectors. One axis uses Sturm
    /// bisection, two axes a banded shift-invert solve, larger grids preconditioned
    /// subspace iteration.
    pub fn lowest(&self, k: usize) -> Result<EigenSolution> {
        let n = self.dim();
        if self.grids.len() == 1 {
            let h = self.grids[0].spacing();
            let b = self.kinetic[0] / (h * h);
            return Ok(SchrodingerChain::new(b, self.potential.clone())?.lowest(k));
        }
        if n <= 1024 {
            let mut s = dense_eigen(&self.to_dense()?);
            s.truncate(k);
            return Ok(s);
        }
        let vmin = self.potential.iter().copied().fold(f64::INFINITY, f64::min);
        if self.grids.len() == 2 {
            let sigma = self.kinetic_floor() + vmin - 1.0;
            let chol = BandCholesky::factor(n, self.bandwidth(), |i, j| {
                self.entry(i, j) - if i == j { sigma } else { 0.0 }
            })?;
            let si = ShiftInvert { chol };
            let mut opts = SolverOptions::new(n, 1.0);
            opts.tol = 1e-12;
            let sol = subspace_eigensolver(&si, k, Target::Largest, &Expansion::Krylov, &opts)?;
            return Ok(self.rayleigh_refine(sol));
        }
        let diag: Vec<f64> = (0..n).map(|i| self.diag_entry(i)).collect();
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs())) + 4.0 * self.hop(0).abs();
        let opts = SolverOptions::new(n, scale);
        subspace_eigensolver(self, k, Target::Smallest, &Expansion::Diagonal(diag), &opts)
    }

    fn rayleigh_refine(&self, mut sol: EigenSolution) -> EigenSolution {
        let mut y = vec![0.0; self.dim()];
        for (v, mu) in sol.vectors.iter_mut().zip(sol.values.iter_mut()) {
            normalize(v);
            self.apply(v, &mut y);
            *mu = dot(v, &y);
        }
        let mut order: Vec<usize> = (0..sol.values.len()).collect();
        order.sort_by(|&a, &b| sol.values[a].total_cmp(&sol.values[b]));
        EigenSolution {
            values: order.iter().map(|&i| sol.values[i]).collect(),
            vectors: order.iter().map(|&i| sol.vectors[i].clone()).collect(),
        }
    }
}

fn grid_size(grids: &[Grid1D]) -> Result<usize> {
    let mut dim = 1usize;
    for g in grids {
        dim = dim.saturating_mul(g.points());
    }
    if dim > MAX_GRID_POINTS {
        return Err(Error::MemoryGuard(format!("tensor grid of {dim} nodes exceeds {MAX_GRID_POINTS}")));
    }
    Ok(dim)
}

impl LinearOperator for GridOperator {
    fn dim(&self) -> usize {
        self.potential.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.diag_entry(i) * x[i];
        }
        for a in 0..self.grids.len() {
            let s = self.strides[a];
            let c = self.hop(a);
            let m = self.grids[a].points();
            for i in 0..x.len() {
                let k = (i / s) % m;
                if k >= 1 {
                    y[i] += c * x[i - s];
                }
                if k + 1 < m {
                    y[i] += c * x[i + s];
                }
            }
        }
    }

    fn diagonal(&self) -> Option<Vec<f64>> {
        Some((0..self.dim()).map(|i| self.diag_entry(i)).collect())
    }
}

/// Ĥ(λ) = Σ a_i X̂_i(λ) + D̂ on the tensor grid (n ≤ 3).
pub fn build_hat_hamiltonian(
    a: &[f64],
    d: &DiagonalOperator,
    lambda: f64,
    grids: &[Grid1D],
    w: f64,
) -> Result<GridOperator> {
    let n = d.num_qubits();
    if n > 3 || grids.len() != n || a.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "need n ≤ 3 with one grid and coefficient per axis (n = {n}, {} grids, {} coefficients)",
            grids.len(),
            a.len()
        )));
    }
    let l2 = lambda * lambda;
    GridOperator::from_fn(grids.to_vec(), a.to_vec(), |xi| {
        let wells: f64 = xi.iter().zip(a).map(|(&x, &c)| c * l2 * f_dw(x)).sum();
        Ok(wells + hat_diag_value(d, xi, w)?)
    })
}

/// Product grid vector `⊗_i v_i`.
pub fn tensor_product(factors: &[&[f64]]) -> Vec<f64> {
    factors.iter().fold(vec![1.0], |acc, f| acc.iter().flat_map(|&a| f.iter().map(move |&b| a * b)).collect())
}

/// ℰ|x⟩ = ⊗_i |x̂_i⟩ for every basis state `x`, as L²-normalized grid vectors.
pub fn encode_basis(bases: &[DoubleWellBasis]) -> Vec<Vec<f64>> {
    let n = bases.len();
    (0..1usize << n)
        .map(|x| {
            let f: Vec<&[f64]> = bases
                .iter()
                .enumerate()
                .map(|(i, b)| if (x >> (n - 1 - i)) & 1 == 0 { b.hat0.as_slice() } else { b.hat1.as_slice() })
                .collect();
            tensor_product(&f)
        })
        .collect()
}

/// Measured quantities of the TFD ↔ Schrödinger correspondence.
#[derive(Clone, Debug, PartialEq)]
pub struct TosdgReport {
    pub lambda: f64,
    /// Λ(λ) per axis.
    pub big_lambda: Vec<f64>,
    pub mu0_hat: f64,
    pub mu1_hat: f64,
    /// δ̂ = μ₁(Ĥ) − μ₀(Ĥ).
    pub gap_hat: f64,
    pub mu0_qubit: f64,
    pub mu1_qubit: f64,
    /// Σ a_i (μ₀(X̂_i) + 1/Λ_i).
    pub shift: f64,
    /// μ₀(Ĥ) − [μ₀(H) + shift].
    pub energy_offset: f64,
    /// ε̂ = max(2‖P(D̂ − ℰDℰ†)P‖, 4‖P^⊥D̂P‖) on the encoded subspace P.
    pub eps_hat: f64,
    /// min{μ₁(H), min_i a_i(μ₂(X̂_i) − μ₀(X̂_i) − 1/Λ_i) + μ₀(D)} − μ₀(H) − ε̂.
    pub gap_bound: f64,
    /// |⟨ĝ|ℰψ₀⟩|.
    pub overlap: f64,
    pub deficit: f64,
    pub passed: bool,
}

/// Compares the ground state of Ĥ(λ) with the encoded ground state of
/// H(λ) = −Σ (a_i/Λ_i) X_i + D.
pub fn verify_tosdg(a: &[f64], d: &DiagonalOperator, lambda: f64, grids: &[Grid1D], w: f64) -> Result<TosdgReport> {
    let n = d.num_qubits();
    let hat = build_hat_hamiltonian(a, d, lambda, grids, w)?;
    let bases = grids.iter().map(|g| double_well_basis(lambda, g)).collect::<Result<Vec<_>>>()?;

    let dim_q = 1usize << n;
    let mut hq = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d.values()));
    for (i, b) in bases.iter().enumerate() {
        let mask = 1usize << (n - 1 - i);
        for x in 0..dim_q {
            hq[(x, x ^ mask)] -= a[i] / b.big_lambda;
        }
    }
    let q = dense_eigen(&hq);

    let cell: f64 = grids.iter().map(Grid1D::spacing).product();
    let enc = encode_basis(&bases);
    let mut psi_enc = vec![0.0; hat.dim()];
    for (x, s) in enc.iter().enumerate() {
        crate::linalg::axpy(q.vectors[0][x], s, &mut psi_enc);
    }

    let low = hat.lowest(2)?;
    let g0 = &low.vectors[0];
    let overlap = (cell.sqrt() * dot(g0, &psi_enc)).abs();

    // Encoded-subspace blocks of D̂ and D̂².
    let dh: Vec<f64> = {
        let mut wells = vec![0.0; hat.dim()];
        let l2 = lambda * lambda;
        let mut idx = vec![0usize; n];
        for v in wells.iter_mut() {
            let xi: Vec<f64> = idx.iter().zip(grids).map(|(&k, g)| g.node(k)).collect();
            *v = xi.iter().zip(a).map(|(&x, &c)| c * l2 * f_dw(x)).sum::<f64>();
            advance(&mut idx, grids);
        }
        hat.potential().iter().zip(&wells).map(|(p, w)| p - w).collect()
    };
    let proj = |f: &dyn Fn(f64) -> f64| {
        DMatrix::from_fn(dim_q, dim_q, |x, y| {
            cell * enc[x].iter().zip(&enc[y]).zip(&dh).map(|((u, v), &dv)| u * v * f(dv)).sum::<f64>()
        })
    };
    let b1 = proj(&|v| v);
    let b2 = proj(&|v| v * v);
    let diff = &b1 - DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d.values()));
    let in_block = spectral_norm(&diff);
    let leak = dense_eigen(&(&b2 - &b1 * &b1)).values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    let eps_hat = (2.0 * in_block).max(4.0 * leak);

    let shift: f64 = a.iter().zip(&bases).map(|(c, b)| c * b.shift()).sum();
    let excite = a
        .iter()
        .zip(&bases)
        .map(|(c, b)| c * (b.mu2 - b.shift()))
        .fold(f64::INFINITY, f64::min);
    let gap_hat = low.values[1] - low.values[0];
    let gap_bound = q.values[1].min(excite + d.min()) - q.values[0] - eps_hat;
    let deficit = 1.0 - overlap;
    Ok(TosdgReport {
        lambda,
        big_lambda: bases.iter().map(|b| b.big_lambda).collect(),
        mu0_hat: low.values[0],
        mu1_hat: low.values[1],
        gap_hat,
        mu0_qubit: q.values[0],
        mu1_qubit: q.values[1],
        shift,
        energy_offset: low.values[0] - (q.values[0] + shift),
        eps_hat,
        gap_bound,
        overlap,
        deficit,
        passed: overlap >= 1.0 - 5.0 * eps_hat / gap_hat,
    })
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Schedule constants of the QHD path.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleParams {
    pub lambda0: f64,
    /// Λ₀ = Λ(λ₀) on `grid`.
    pub big_lambda0: f64,
    pub w: f64,
    pub a: Vec<f64>,
    /// Per-axis grid used for Λ(λ) and the path operators.
    pub grid: Grid1D,
    /// Diagonal part of the starting TFD Hamiltonian (zero when absent).
    pub d_tfi: Option<DiagonalOperator>,
}

impl ScheduleParams {
    pub fn new(lambda0: f64, a: Vec<f64>, grid: Grid1D, w: f64, d_tfi: Option<DiagonalOperator>) -> Result<Self> {
        if !(lambda0 >= 1.0) {
            return Err(Error::InvalidArgument(format!("lambda0 must be ≥ 1, got {lambda0}")));
        }
        if a.is_empty() || a.iter().any(|&c| !(c >= 1.0)) {
            return Err(Error::InvalidArgument("axis coefficients must be ≥ 1".into()));
        }
        if !(w > 0.0 && w < 0.5) {
            return Err(Error::InvalidArgument(format!("ramp width must lie in (0, 1/2), got {w}")));
        }
        if let Some(d) = &d_tfi {
            if d.num_qubits() != a.len() {
                return Err(Error::DimensionMismatch("D_TFI and coefficients disagree on n".into()));
            }
        }
        Ok(Self { lambda0, big_lambda0: tunnelling_scale(lambda0, &grid), w, a, grid, d_tfi })
    }

    pub fn num_axes(&self) -> usize {
        self.a.len()
    }

    /// g(ξ) = D̂_TFI(ξ)/Λ₀ + λ₀² Σ a_i f_dw(ξ_i).
    pub fn g_at(&self, xi: &[f64]) -> Result<f64> {
        let wells: f64 = xi.iter().zip(&self.a).map(|(&x, &c)| c * f_dw(x)).sum();
        let d = match &self.d_tfi {
            Some(d) => hat_diag_value(d, xi, self.w)?,
            None => 0.0,
        };
        Ok(d / self.big_lambda0 + self.lambda0 * self.lambda0 * wells)
    }
}

/// Objective f(ξ) = Ĥ_prob(ξ) + Σ a_i f_dw(ξ_i); `query` is called once.
pub fn objective_with(a: &[f64], w: f64, xi: &[f64], query: &dyn Fn(usize) -> f64) -> Result<f64> {
    if xi.len() != a.len() {
        return Err(Error::DimensionMismatch(format!("{} coordinates for {} axes", xi.len(), a.len())));
    }
    let wells: f64 = xi.iter().zip(a).map(|(&x, &c)| c * f_dw(x)).sum();
    Ok(hat_diag_with(xi, w, query)? + wells)
}

pub fn objective_f(h_prob: &DiagonalOperator, a: &[f64], w: f64, xi: &[f64]) -> Result<f64> {
    objective_with(a, w, xi, &|x| h_prob.get(x))
}

/// Schedule values at λ: ν = Λ₀/Λ(λ), φ = λ² − νλ₀², and path time t = φ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub lambda: f64,
    pub nu: f64,
    pub phi: f64,
    pub t: f64,
}

pub fn schedule(p: &ScheduleParams, lambda: f64) -> Result<Schedule> {
    if !(lambda >= p.lambda0) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} is below lambda0 = {}", p.lambda0)));
    }
    let nu = if lambda == p.lambda0 { 1.0 } else { p.big_lambda0 / tunnelling_scale(lambda, &p.grid) };
    let phi = lambda * lambda - nu * p.lambda0 * p.lambda0;
    Ok(Schedule { lambda, nu, phi, t: phi })
}

/// QHD path H(t) = −Σ a_i ∂²_i + ν(t) g(ξ) + t f(ξ) over t ∈ [0, φ(λ_max)].
#[derive(Clone, Debug)]
pub struct QhdPath {
    pub h_prob: DiagonalOperator,
    pub params: ScheduleParams,
    pub lambda_max: f64,
    pub t_max: f64,
}

pub fn qhd_path(h_prob: &DiagonalOperator, p: &ScheduleParams, lambda_max: f64) -> Result<QhdPath> {
    if h_prob.num_qubits() != p.num_axes() {
        return Err(Error::DimensionMismatch("H_prob and coefficients disagree on n".into()));
    }
    if h_prob.values().iter().any(|&v| !(-1.0..0.0).contains(&v)) {
        return Err(Error::InvalidArgument("H_prob entries must lie in [−1, 0)".into()));
    }
    let end = schedule(p, lambda_max)?;
    Ok(QhdPath { h_prob: h_prob.clone(), params: p.clone(), lambda_max, t_max: end.t })
}

impl QhdPath {
    pub fn domain(&self) -> (f64, f64) {
        (0.0, self.t_max)
    }

    /// λ with φ(λ) = t, by bisection to 1e-12.
    pub fn lambda_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.t_max * (1.0 + 1e-12)) {
            return Err(Error::OutsideDomain { t, lo: 0.0, hi: self.t_max });
        }
        let (mut lo, mut hi) = (self.params.lambda0, self.lambda_max);
        while hi - lo > 1e-12 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if schedule(&self.params, mid)?.phi < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn schedule_at(&self, t: f64) -> Result<Schedule> {
        let lambda = self.lambda_at(t)?;
        let s = schedule(&self.params, lambda)?;
        Ok(Schedule { t, ..s })
    }

    /// Grid operator at path time `t`.
    pub fn operator_at(&self, t: f64) -> Result<GridOperator> {
        let s = self.schedule_at(t)?;
        let grids = vec![self.params.grid; self.params.num_axes()];
        let a = &self.params.a;
        GridOperator::from_fn(grids, a.clone(), |xi| {
            Ok(s.nu * self.params.g_at(xi)? + t * objective_f(&self.h_prob, a, self.params.w, xi)?)
        })
    }

    /// Same operator in the regrouped form Σ a_i X̂_i(λ) + Λ(λ)⁻¹D̂_TFI + φ Ĥ_prob.
    pub fn regrouped_at(&self, t: f64) -> Result<GridOperator> {
        let s = self.schedule_at(t)?;
        let p = &self.params;
        let inv = s.nu / p.big_lambda0;
        let grids = vec![p.grid; p.num_axes()];
        GridOperator::from_fn(grids, p.a.clone(), |xi| {
            let wells: f64 = xi.iter().zip(&p.a).map(|(&x, &c)| c * s.lambda * s.lambda * f_dw(x)).sum();
            let tfi = match &p.d_tfi {
                Some(d) => hat_diag_value(d, xi, p.w)?,
                None => 0.0,
            };
            Ok(wells + inv * tfi + s.phi * hat_diag_value(&self.h_prob, xi, p.w)?)
        })
    }
}
