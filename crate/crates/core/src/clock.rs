//! Clock register: the ground-state-shifting TFI Hamiltonian H_L(λ, t), its unary
//! tridiagonal reduction, the clock linearization of a piecewise diagonal path and
//! the tilted/extended final path from a TFI Hamiltonian to a diagonal one.
//!
//! Clock qubit `i` (1-based) is register qubit `i − 1`; the unary state
//! `𝒋 = 1^j 0^{ℓ−j}` sets the first `j` clock qubits. In assembled operators the
//! system register comes first and the clock last.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dense_eigen, dot, tridiagonal_eigen, EigenSolution};
use crate::operator::{
    build_from_pauli, DiagonalOperator, PauliTerm, PauliTermList, SparseSymmetricOperator, MAX_QUBITS,
};
use crate::path::PiecewiseLinearPath;
use crate::spectral::lowest_eigenpairs;

/// Largest supported clock register.
pub const MAX_CLOCK: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClockParams {
    pub ell: usize,
    pub eps_l: f64,
    pub delta_l: f64,
    pub lambda: f64,
}

impl ClockParams {
    /// Δ_L = 100ℓ⁴/ε_L and λ = 1.
    pub fn new(ell: usize, eps_l: f64) -> Result<Self> {
        let p = Self { ell, eps_l, delta_l: Self::min_delta_l(ell, eps_l), lambda: 1.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn min_delta_l(ell: usize, eps_l: f64) -> f64 {
        100.0 * (ell as f64).powi(4) / eps_l
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 || self.ell > MAX_CLOCK {
            return Err(Error::InvalidArgument(format!("clock length must lie in 1..={MAX_CLOCK}, got {}", self.ell)));
        }
        if !(self.eps_l > 0.0 && self.eps_l <= 0.1) {
            return Err(Error::InvalidArgument(format!("eps_L must lie in (0, 0.1], got {}", self.eps_l)));
        }
        // Relative slack so that the default value round-trips through text.
        if !(self.delta_l >= Self::min_delta_l(self.ell, self.eps_l) * (1.0 - 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "delta_L = {} is below 100·ℓ⁴/eps_L = {}",
                self.delta_l,
                Self::min_delta_l(self.ell, self.eps_l)
            )));
        }
        if !(0.0..=2.0).contains(&self.lambda) {
            return Err(Error::InvalidArgument(format!("lambda must lie in [0, 2], got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Basis index of the unary clock state `1^j 0^{ℓ−j}`.
pub fn unary_index(ell: usize, j: usize) -> usize {
    debug_assert!(j <= ell);
    ((1usize << j) - 1) << (ell - j)
}

/// Inverse of [`unary_index`].
pub fn unary_level(ell: usize, x: usize) -> Option<usize> {
    let j = x.count_ones() as usize;
    (x < 1 << ell && unary_index(ell, j) == x).then_some(j)
}

/// Pauli form of H_L(λ, t) with the clock's own λ.
pub fn clock_pauli(p: &ClockParams, t: f64) -> Result<PauliTermList> {
    p.validate()?;
    clock_terms(p, p.lambda, t)
}

fn clock_terms(p: &ClockParams, lambda: f64, t: f64) -> Result<PauliTermList> {
    let ell = p.ell;
    let mut out = PauliTermList::new(ell);
    // Q_L = Δ_L((ℓ−1)I + Z_1 − Z_ℓ − Σ Z_i Z_{i+1})
    if ell > 1 {
        out.push(PauliTerm::identity(p.delta_l * (ell - 1) as f64));
        out.push(PauliTerm::z(p.delta_l, 0));
        out.push(PauliTerm::z(-p.delta_l, ell - 1));
        for i in 0..ell - 1 {
            out.push(PauliTerm::zz(-p.delta_l, i, i + 1));
        }
    }
    // λ·X_L with X_L = −Σ X_i
    if lambda != 0.0 {
        for i in 0..ell {
            out.push(PauliTerm::x(-lambda, i));
        }
    }
    // Z_L(t) = (1/ε_L) Σ_i (i − t)(I − Z_i)
    for i in 0..ell {
        let c = ((i + 1) as f64 - t) / p.eps_l;
        out.push(PauliTerm::identity(c));
        out.push(PauliTerm::z(-c, i));
    }
    out.validate()?;
    Ok(out)
}

/// H_L(λ, t) = Q_L + λX_L + Z_L(t) on ℓ qubits.
pub fn build_clock(p: &ClockParams, t: f64) -> Result<SparseSymmetricOperator> {
    build_from_pauli(&clock_pauli(p, t)?)
}

/// Diagonal parts of H_L at basis state `x`: (α_x from Q_L, β_x from Z_L(t)).
pub fn alpha_beta(p: &ClockParams, x: usize, t: f64) -> (f64, f64) {
    let ell = p.ell;
    let bit = |i: usize| (x >> (ell - 1 - i)) & 1;
    let z = |i: usize| 1.0 - 2.0 * bit(i) as f64;
    let mut alpha = 0.0;
    if ell > 1 {
        alpha = (ell - 1) as f64 + z(0) - z(ell - 1);
        for i in 0..ell - 1 {
            alpha -= z(i) * z(i + 1);
        }
        alpha *= p.delta_l;
    }
    let beta = (0..ell).map(|i| ((i + 1) as f64 - t) * 2.0 * bit(i) as f64).sum::<f64>() / p.eps_l;
    (alpha, beta)
}

/// Symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for (i, &e) in self.off.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        debug_assert_eq!(m.nrows(), n);
        m
    }

    pub fn eigen(&self) -> EigenSolution {
        tridiagonal_eigen(&self.diag, &self.off)
    }
}

/// Unary-sector reduction of H_L: diagonal p_j = j(j+1−2t)/ε_L, off-diagonal −λ.
pub fn reduced_clock(p: &ClockParams, t: f64) -> Tridiagonal {
    let diag = (0..=p.ell).map(|j| (j as f64) * ((j + 1) as f64 - 2.0 * t) / p.eps_l).collect();
    Tridiagonal { diag, off: vec![-p.lambda; p.ell] }
}

/// Position of the smallest entry and its margin `min_{j≠i} p_j − p_i`.
pub fn single_well(p: &[f64]) -> (usize, f64) {
    let i = (0..p.len()).min_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
    let c = p.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v - p[i]).fold(f64::INFINITY, f64::min);
    (i, c)
}

/// Best adjacent pair `(i−1, i)`: returns `(i, |p_i − p_{i−1}|, C)` with
/// `C = min_{j∉{i−1,i}} p_j − max(p_{i−1}, p_i)`, maximizing `C`.
pub fn double_well(p: &[f64]) -> Option<(usize, f64, f64)> {
    (1..p.len())
        .map(|i| {
            let top = p[i - 1].max(p[i]);
            let c = p
                .iter()
                .enumerate()
                .filter(|&(j, _)| j + 1 != i && j != i)
                .map(|(_, &v)| v - top)
                .fold(f64::INFINITY, f64::min);
            (i, (p[i] - p[i - 1]).abs(), c)
        })
        .max_by(|a, b| a.2.total_cmp(&b.2))
}

/// Unary levels `(a, b)` that carry the clock ground state at time `t ∈ [0, ℓ+1]`.
pub fn clock_window(ell: usize, t: f64) -> (usize, usize) {
    let a = (t - 0.5).floor().max(0.0) as usize;
    let b = ((t - 0.5).ceil().max(0.0) as usize).min(ell);
    (a.min(ell), b)
}

/// Norm of the component of `psi` outside span{|𝒂⟩, |𝒃⟩}.
pub fn window_residual(ell: usize, psi: &[f64], a: usize, b: usize) -> f64 {
    let keep = [unary_index(ell, a), unary_index(ell, b)];
    psi.iter()
        .enumerate()
        .filter(|(x, _)| !keep.contains(x))
        .map(|(_, v)| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Inputs of the clock linearization H_C and its tilted extension H_C′.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearAssembly {
    pub d_list: Vec<DiagonalOperator>,
    pub x_b: PauliTermList,
    pub delta_c: f64,
    pub clock: ClockParams,
    pub eta: f64,
}

impl LinearAssembly {
    /// Δ_C = 10‖D_C‖ + 1 and η = 1/(10‖D_C‖ + ℓ), with ℓ = `d_list.len() − 1`.
    pub fn with_defaults(d_list: Vec<DiagonalOperator>, x_b: PauliTermList, eps_l: f64) -> Result<Self> {
        if d_list.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal list".into()));
        }
        let ell = d_list.len() - 1;
        let norm = d_list.iter().map(DiagonalOperator::norm).fold(0.0, f64::max);
        let clock = ClockParams { ell, eps_l, delta_l: ClockParams::min_delta_l(ell, eps_l), lambda: 1.0 };
        let a = Self { d_list, x_b, delta_c: 10.0 * norm + 1.0, clock, eta: 1.0 / (10.0 * norm + ell as f64) };
        a.validate()?;
        Ok(a)
    }

    pub fn ell(&self) -> usize {
        self.clock.ell
    }

    /// ‖D_C‖ = max_i ‖D_i‖.
    pub fn d_c_norm(&self) -> f64 {
        self.d_list.iter().map(DiagonalOperator::norm).fold(0.0, f64::max)
    }

    pub fn num_system_qubits(&self) -> usize {
        self.x_b.num_qubits
    }

    pub fn num_qubits(&self) -> usize {
        self.num_system_qubits() + self.ell()
    }

    /// Checks the window of Δ_C and η. `ℓ = 0` (a single clock state) is accepted.
    pub fn validate(&self) -> Result<()> {
        let ell = self.ell();
        if ell > 0 {
            self.clock.validate()?;
        }
        self.x_b.validate()?;
        let nb = self.num_system_qubits();
        if self.d_list.len() != ell + 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} diagonal operators for ℓ = {ell}, got {}",
                ell + 1,
                self.d_list.len()
            )));
        }
        if self.d_list.iter().any(|d| d.num_qubits() != nb) {
            return Err(Error::DimensionMismatch("diagonal operators and X_B act on different registers".into()));
        }
        if nb + ell > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("{} qubits exceed the {MAX_QUBITS}-qubit limit", nb + ell)));
        }
        let norm = self.d_c_norm();
        if !(self.delta_c >= 10.0 * norm) {
            return Err(Error::InvalidArgument(format!("delta_C = {} is below 10‖D_C‖ = {}", self.delta_c, 10.0 * norm)));
        }
        let eta_max = 1.0 / (10.0 * norm + ell as f64);
        if !(self.eta > 0.0 && self.eta <= eta_max * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!("eta = {} must lie in (0, {eta_max}]", self.eta)));
        }
        Ok(())
    }

    /// D_C = Σ_i D_i ⊗ |𝒊⟩⟨𝒊|.
    pub fn d_c(&self) -> DiagonalOperator {
        let ell = self.ell();
        let nb = self.num_system_qubits();
        let mut values = vec![0.0; 1 << (nb + ell)];
        for (i, d) in self.d_list.iter().enumerate() {
            let c = unary_index(ell, i);
            for (v, &x) in d.values().iter().enumerate() {
                values[(v << ell) | c] = x;
            }
        }
        DiagonalOperator::new(nb + ell, values).expect("register size checked")
    }

    /// Δ_C·I⊗H_L(λ, t) + x·X_B⊗I + d·D_C.
    fn operator(&self, lambda: f64, t: f64, x: f64, d: f64) -> Result<SparseSymmetricOperator> {
        self.validate()?;
        let ell = self.ell();
        let xb = build_from_pauli(&self.x_b)?;
        let mut h = self.d_c().to_sparse().scaled(d);
        if ell > 0 {
            let clock = build_from_pauli(&clock_terms(&self.clock, lambda, t)?)?;
            h = h.combine(1.0, &clock.kron_identity_left(self.num_system_qubits())?, self.delta_c)?;
            h = h.combine(1.0, &xb.kron_identity_right(ell)?, x)?;
        } else {
            h = h.combine(1.0, &xb, x)?;
        }
        Ok(h)
    }

    /// System state `v` with the clock at unary level `j`.
    pub fn index(&self, v: usize, j: usize) -> usize {
        (v << self.ell()) | unary_index(self.ell(), j)
    }
}

/// H_C(t) = Δ_C·I⊗H_L(1, t) + X_B⊗I + D_C, the clock linearization over t ∈ [0, ℓ+1].
/// The clock coupling is fixed to λ = 1; `a.clock.lambda` is not used.
pub fn linearize(a: &LinearAssembly, t: f64) -> Result<SparseSymmetricOperator> {
    a.operator(1.0, t, 1.0, 1.0)
}

/// H_C′(t) = Δ_C·I⊗H_L(1−tη, t) + (1−tη)X_B⊗I + (1+tη)D_C on t ∈ [−1/η, 1/η].
pub fn tilt_extend(a: &LinearAssembly, t: f64) -> Result<SparseSymmetricOperator> {
    let r = 1.0 / a.eta;
    if !(t >= -r * (1.0 + 1e-12) && t <= r * (1.0 + 1e-12)) {
        return Err(Error::OutsideDomain { t, lo: -r, hi: r });
    }
    let mut s = (t * a.eta).clamp(-1.0, 1.0);
    // t = ±1/η must hit the endpoints exactly; 1 − (1/η)·η can round away from zero.
    if (1.0 - s.abs()).abs() <= 1e-12 {
        s = s.signum();
    }
    a.operator(1.0 - s, t, 1.0 - s, 1.0 + s)
}

/// Endpoints and linear path of the assembled final construction.
#[derive(Clone, Debug)]
pub struct FinalAssembly {
    pub h_tfi: PauliTermList,
    pub d_final: DiagonalOperator,
    pub path: PiecewiseLinearPath,
    /// Minimizer `u` of D_ℓ.
    pub u: usize,
    /// Basis index of `|u, 𝓵⟩`.
    pub ground_index: usize,
    /// Distance (up to sign) of the H_TFI ground state from |+⟩^{n_B}|0^ℓ⟩.
    pub product_distance: f64,
}

/// Builds H_TFI = H_C′(−1/η), D = H_C′(1/η) and the linear path between them on [0, 1].
pub fn assemble_final(a: &LinearAssembly) -> Result<FinalAssembly> {
    a.validate()?;
    let ell = a.ell();
    let nb = a.num_system_qubits();
    let u = a.d_list[ell]
        .unique_argmin()
        .ok_or_else(|| Error::Degenerate("D_ℓ has no unique minimizer".into()))?;
    let r = 1.0 / a.eta;
    let start = tilt_extend(a, -r)?;
    let end = tilt_extend(a, r)?;
    if !end.is_diagonal() {
        return Err(Error::Structure("final endpoint is not diagonal".into()));
    }
    let d_final = DiagonalOperator::from_sparse(&end)?;
    let ground_index = a.index(u, ell);
    if d_final.unique_argmin() != Some(ground_index) {
        return Err(Error::Degenerate("final diagonal is not uniquely minimized at |u, ℓ⟩".into()));
    }

    let mut h_tfi = a.x_b.scaled(2.0).embed(nb + ell, 0)?;
    if ell > 0 {
        let clock = clock_terms(&a.clock, 2.0, -r)?.scaled(a.delta_c).embed(nb + ell, nb)?;
        h_tfi = h_tfi.concat(&clock)?;
    }

    let g = lowest_eigenpairs(&start, 1)?;
    let amp = (1u64 << nb) as f64;
    let overlap: f64 = (0..1usize << nb).map(|v| g.vectors[0][v << ell]).sum::<f64>() / amp.sqrt();
    let product_distance = (2.0 * (1.0 - overlap.abs())).max(0.0).sqrt();

    let path = PiecewiseLinearPath::new(vec![(0.0, start), (1.0, end)])?;
    Ok(FinalAssembly { h_tfi, d_final, path, u, ground_index, product_distance })
}

/// Overlap-based distance `min_± ‖ψ ∓ φ‖` of two unit vectors.
pub fn state_distance(psi: &[f64], phi: &[f64]) -> f64 {
    (2.0 * (1.0 - dot(psi, phi).abs())).max(0.0).sqrt()
}

/// Dense spectrum and eigenvectors of a clock operator (ℓ ≤ 10).
pub fn clock_eigen(p: &ClockParams, t: f64) -> Result<EigenSolution> {
    Ok(dense_eigen(&build_clock(p, t)?.to_dense()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::tfi_representable;

    fn small_assembly() -> LinearAssembly {
        let d = |v: [f64; 4]| DiagonalOperator::new(2, v.to_vec()).unwrap();
        LinearAssembly::with_defaults(
            vec![d([-0.2, 0.1, 0.3, 0.0]), d([0.4, -0.5, 0.2, 0.1]), d([0.1, 0.2, -0.9, 0.3])],
            PauliTermList::uniform_x(2, 1.0),
            0.05,
        )
        .unwrap()
    }

    #[test]
    fn two_by_two() {
        let p = ClockParams::new(1, 0.05).unwrap();
        let m = build_clock(&p, 0.0).unwrap().to_dense().unwrap();
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(0, 1)], -1.0);
        assert!((m[(1, 1)] - 2.0 / 0.05).abs() < 1e-9);
    }

    #[test]
    fn unary_diagonal() {
        let p = ClockParams::new(3, 0.1).unwrap();
        let h = build_clock(&p, 1.3).unwrap();
        for x in 0..8 {
            let (al, be) = alpha_beta(&p, x, 1.3);
            assert!((h.get(x, x) - al - be).abs() < 1e-6);
            match unary_level(3, x) {
                Some(j) => {
                    assert_eq!(al, 0.0);
                    let want = j as f64 * (j as f64 + 1.0 - 2.6) / 0.1;
                    assert!((be - want).abs() < 1e-9);
                }
                None => assert!(al >= p.delta_l),
            }
        }
    }

    #[test]
    fn midpoint_and_endpoints() {
        let a = small_assembly();
        let (h0, h1, hm) = (linearize(&a, 0.3).unwrap(), linearize(&a, 2.1).unwrap(), linearize(&a, 1.2).unwrap());
        assert!(h0.combine(0.5, &h1, 0.5).unwrap().sub(&hm).unwrap().max_abs() < 1e-6);
        assert!(tilt_extend(&a, 0.0).unwrap().sub(&linearize(&a, 0.0).unwrap()).unwrap().max_abs() < 1e-9);
        let f = assemble_final(&a).unwrap();
        assert!(tfi_representable(&f.path.eval(0.0).unwrap()));
        assert!(f.path.eval(1.0).unwrap().is_diagonal());
        let via_pauli = build_from_pauli(&f.h_tfi).unwrap();
        assert!(via_pauli.sub(&f.path.eval(0.0).unwrap()).unwrap().max_abs() < 1e-6);
        assert_eq!(f.ground_index, (2 << 2) | 0b11);
    }

    #[test]
    fn zero_length_clock() {
        let d = DiagonalOperator::new(1, vec![-0.5, 0.25]).unwrap();
        let xb = PauliTermList::uniform_x(1, 1.0);
        let a = LinearAssembly::with_defaults(vec![d.clone()], xb.clone(), 0.05).unwrap();
        let want = build_from_pauli(&xb).unwrap().add(&d.to_sparse()).unwrap();
        assert_eq!(linearize(&a, 0.7).unwrap(), want);
    }
}
