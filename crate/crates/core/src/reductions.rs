//! Perturbative gadget reductions: sparse stoquastic → hypercube (stage I) and
//! hypercube → transverse-field-plus-diagonal (stage II), their endpoint decorations,
//! path sampling and empirical calibration of the gadget scale Δ.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{
    build_from_pauli, hamming, DiagonalOperator, PauliTerm, PauliTermList, SparseSymmetricOperator, MAX_QUBITS,
};
use crate::path::{lipschitz_estimate, HamiltonianPath, InteractionConstraint, PiecewiseLinearPath};
use crate::spectral::{verify_simulation, Isometry, SimulationCertificate};

/// Default offset parameter of both reductions.
pub const DEFAULT_EPS: f64 = 0.5;

/// Largest Δ tried by [`calibrate_delta`].
pub const DELTA_CAP: f64 = (1u64 << 40) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    I,
    II,
}

/// Frozen parameters of one reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionParams {
    /// Qubits of the input.
    pub n: usize,
    /// Row sparsity bound (stage I only).
    pub s: usize,
    /// Induced-norm bound `M` of the input.
    pub m_norm: f64,
    pub eps: f64,
    pub delta: f64,
    /// Stage II scale in the distance-≥2 penalty `(M+1)·dist/(far + ε′)`; defaults to `M`.
    pub far_scale: Option<f64>,
}

impl ReductionParams {
    pub fn stage_i(n: usize, s: usize, m_norm: f64, delta: f64) -> Self {
        Self { n, s, m_norm, eps: DEFAULT_EPS, delta, far_scale: None }
    }

    pub fn stage_ii(n: usize, m_norm: f64, delta: f64) -> Self {
        Self { n, s: n + 1, m_norm, eps: DEFAULT_EPS, delta, far_scale: None }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..self.clone() }
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("eps = {} outside (0, 1]", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta = {} must be positive", self.delta)));
        }
        if !(self.m_norm > 0.0 && self.m_norm.is_finite()) {
            return Err(Error::InvalidArgument(format!("M = {} must be positive", self.m_norm)));
        }
        Ok(())
    }
}

/// `Δ H₀ + Δ^{1/2} V_main + V_extra` with its encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct Gadget {
    pub h0: SparseSymmetricOperator,
    pub vmain: SparseSymmetricOperator,
    pub vextra: SparseSymmetricOperator,
    pub delta: f64,
    pub encoding: Isometry,
}

impl Gadget {
    pub fn combined_at(&self, delta: f64) -> Result<SparseSymmetricOperator> {
        self.h0.combine(delta, &self.vmain, delta.sqrt())?.add(&self.vextra)
    }

    pub fn combined(&self) -> Result<SparseSymmetricOperator> {
        self.combined_at(self.delta)
    }

    /// `16·max(‖V_main‖₁, ‖V_extra‖₁) + 1`.
    pub fn calibration_start(&self) -> f64 {
        16.0 * self.vmain.induced_one_norm().max(self.vextra.induced_one_norm()) + 1.0
    }

    /// Second-order low block in the logical basis.
    pub fn effective_target(&self) -> Result<DMatrix<f64>> {
        crate::spectral::second_order_low_block(&self.h0, &self.vmain, &self.vextra, self.delta, &self.encoding)
    }
}

// ---------------------------------------------------------------------------
// Stage I

/// Register layout `(p, q, A, B, C)` of widths `(n, n, s, s, n)`, `p` most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayoutI {
    pub n: usize,
    pub s: usize,
}

/// A stage I basis state split into registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeI {
    pub p: usize,
    pub q: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl LayoutI {
    pub fn num_qubits(&self) -> usize {
        3 * self.n + 2 * self.s
    }

    pub fn pack(&self, v: NodeI) -> usize {
        let (n, s) = (self.n, self.s);
        (v.p << (2 * n + 2 * s)) | (v.q << (n + 2 * s)) | (v.a << (n + s)) | (v.b << n) | v.c
    }

    pub fn unpack(&self, idx: usize) -> NodeI {
        let (n, s) = (self.n, self.s);
        let mask = |w: usize| (1usize << w) - 1;
        NodeI {
            p: (idx >> (2 * n + 2 * s)) & mask(n),
            q: (idx >> (n + 2 * s)) & mask(n),
            a: (idx >> (n + s)) & mask(s),
            b: (idx >> n) & mask(s),
            c: idx & mask(n),
        }
    }

    /// `|x⟩ ↦ |x, x, 0^s, 0^s, 0^n⟩`.
    pub fn encode(&self, x: usize) -> usize {
        self.pack(NodeI { p: x, q: x, a: 0, b: 0, c: 0 })
    }

    /// One-hot `e_r = 0^{r−1} 1 0^{s−r}` as an `s`-bit value.
    pub fn one_hot(&self, r: usize) -> usize {
        1usize << (self.s - r)
    }

    /// Inverse of [`one_hot`](Self::one_hot).
    pub fn rank_of_one_hot(&self, v: usize) -> Option<usize> {
        (v.count_ones() == 1 && v < (1 << self.s)).then(|| self.s - v.trailing_zeros() as usize)
    }
}

/// Lexicographically smallest shortest bit-flip walk `x = z₀, …, z_ℓ = y`.
pub fn lexicographic_walk(x: usize, y: usize) -> Vec<usize> {
    let mut out = vec![x];
    let mut z = x;
    while z != y {
        let diff = z ^ y;
        z = (0..usize::BITS).filter(|b| diff >> b & 1 == 1).map(|b| z ^ (1 << b)).min().expect("diff != 0");
        out.push(z);
    }
    out
}

/// The `2n+3` chain nodes joining `(x,x,e_{r₁},0,0)` to `(y,y,0,e_{r₂},0)`.
pub fn subdivision_path(n: usize, x: usize, y: usize, ranks: (usize, usize), s: usize) -> Result<Vec<usize>> {
    if x >= y {
        return Err(Error::InvalidArgument(format!("need x < y, got {x} >= {y}")));
    }
    if y >> n != 0 {
        return Err(Error::IndexOutOfRange { index: y, num_qubits: n });
    }
    let (r1, r2) = ranks;
    if !(1..=s).contains(&r1) || !(1..=s).contains(&r2) {
        return Err(Error::InvalidArgument(format!("ranks ({r1}, {r2}) outside [1, {s}]")));
    }
    let lay = LayoutI { n, s };
    let (e1, e2) = (lay.one_hot(r1), lay.one_hot(r2));
    let walk = lexicographic_walk(x, y);
    let ell = walk.len() - 1;
    let ones = |k: usize| (1usize << k) - 1;
    let mut nodes = Vec::with_capacity(2 * n + 3);
    for &z in &walk {
        nodes.push(lay.pack(NodeI { p: x, q: z, a: e1, b: 0, c: 0 }));
    }
    for k in 1..=n - ell {
        nodes.push(lay.pack(NodeI { p: x, q: y, a: e1, b: 0, c: ones(k) }));
    }
    nodes.push(lay.pack(NodeI { p: x, q: y, a: e1, b: e2, c: ones(n - ell) }));
    for k in (1..=n - ell).rev() {
        nodes.push(lay.pack(NodeI { p: x, q: y, a: 0, b: e2, c: ones(k) }));
    }
    for &z in &walk {
        nodes.push(lay.pack(NodeI { p: z, q: y, a: 0, b: e2, c: 0 }));
    }
    debug_assert_eq!(nodes.len(), 2 * n + 3);
    Ok(nodes)
}

/// `α = (M+1) / (4 sin²(π/(4n+8)))`.
pub fn chain_alpha(n: usize, m_norm: f64) -> f64 {
    let s = (PI / (4 * n + 8) as f64).sin();
    (m_norm + 1.0) / (4.0 * s * s)
}

/// `(2n+3)`-dimensional chain block of `H₀`: `α/a` off-diagonal, `−2α/a` diagonal.
pub fn chain_block(n: usize, a: f64, alpha: f64) -> DMatrix<f64> {
    let len = 2 * n + 3;
    DMatrix::from_fn(len, len, |i, j| match i.abs_diff(j) {
        0 => -2.0 * alpha / a,
        1 => alpha / a,
        _ => 0.0,
    })
}

/// Closed form of the chain block eigenvalues, `k = 1..=2n+3`, ascending for `a < 0`.
pub fn chain_eigenvalue(n: usize, a: f64, alpha: f64, k: usize) -> f64 {
    let s = (k as f64 * PI / (4 * n + 8) as f64).sin();
    -(alpha / a) * 4.0 * s * s
}

/// Closed form of the chain block inverse, 1-based `(i, j)`.
pub fn chain_inverse_entry(n: usize, a: f64, alpha: f64, i: usize, j: usize) -> f64 {
    let len = (2 * n + 4) as f64;
    -(a / alpha) * (i.min(j) as f64) * (len - i.max(j) as f64) / len
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub x: usize,
    pub y: usize,
    pub a: f64,
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionIOutput {
    pub params: ReductionParams,
    pub layout: LayoutI,
    pub alpha: f64,
    pub h0: SparseSymmetricOperator,
    pub vmain: SparseSymmetricOperator,
    pub vextra: SparseSymmetricOperator,
    pub delta: f64,
    pub encoding: Isometry,
    pub chains: Vec<Chain>,
    pub combined: SparseSymmetricOperator,
}

impl ReductionIOutput {
    pub fn gadget(&self) -> Gadget {
        Gadget {
            h0: self.h0.clone(),
            vmain: self.vmain.clone(),
            vextra: self.vextra.clone(),
            delta: self.delta,
            encoding: self.encoding.clone(),
        }
    }
}

fn check_stoquastic(k: &SparseSymmetricOperator) -> Result<()> {
    if let Some((i, j, v)) = k.off_diagonal().find(|&(_, _, v)| v > 0.0) {
        return Err(Error::Structure(format!("positive off-diagonal {v} at ({i}, {j})")));
    }
    Ok(())
}

fn check_norm(k: &SparseSymmetricOperator, m: f64) -> Result<()> {
    let norm = k.induced_one_norm();
    if norm > m * (1.0 + 1e-12) {
        return Err(Error::Structure(format!("induced norm {norm} exceeds M = {m}")));
    }
    Ok(())
}

/// Stage I: an `n`-qubit stoquastic `K`, explicitly `s`-sparse under `constraint`, becomes a
/// `(3n+2s)`-qubit stoquastic hypercube operator.
pub fn reduce_sparse_to_hypercube(
    k: &SparseSymmetricOperator,
    constraint: &InteractionConstraint,
    params: &ReductionParams,
) -> Result<ReductionIOutput> {
    params.check()?;
    let (n, s) = (k.num_qubits(), params.s);
    if n != params.n || constraint.num_qubits() != n {
        return Err(Error::DimensionMismatch(format!("K has {n} qubits, descriptor says {}", params.n)));
    }
    check_stoquastic(k)?;
    check_norm(k, params.m_norm)?;
    if let Some((i, j, _)) = k.off_diagonal().find(|&(i, j, _)| !constraint.contains(i, j)) {
        return Err(Error::Structure(format!("entry ({i}, {j}) outside the interaction constraint")));
    }
    if constraint.max_row_sparsity() > s {
        return Err(Error::Structure(format!(
            "row sparsity {} exceeds s = {s}",
            constraint.max_row_sparsity()
        )));
    }
    let lay = LayoutI { n, s };
    let n_a = lay.num_qubits();
    if n_a > MAX_QUBITS {
        return Err(Error::MemoryGuard(format!("{n_a} output qubits")));
    }
    let dim = 1usize << n_a;
    let offset = params.eps / (2.0 * s as f64);
    let alpha = chain_alpha(n, params.m_norm);
    let a_of = |x: usize, y: usize| k.get(x, y) - offset;
    let encoded: Vec<usize> = (0..1usize << n).map(|x| lay.encode(x)).collect();
    let is_encoded = |i: usize| {
        let v = lay.unpack(i);
        v.p == v.q && v.a == 0 && v.b == 0 && v.c == 0
    };

    let mut h0 = SparseSymmetricOperator::zeros(n_a)?;
    for i in (0..dim).filter(|&i| !is_encoded(i)) {
        h0.set(i, i, 1.0)?;
    }
    let mut vmain = SparseSymmetricOperator::zeros(n_a)?;
    let coupling = -(alpha * (2 * n + 4) as f64).sqrt();
    let mut chains = Vec::new();
    let mut used = std::collections::BTreeSet::new();
    for (x, y) in constraint.edges() {
        let r1 = constraint.rank(x, y).expect("edge has a rank");
        let r2 = constraint.rank(y, x).expect("edge has a rank");
        let nodes = subdivision_path(n, x, y, (r1, r2), s)?;
        let a = a_of(x, y);
        assert!(a < 0.0, "offset entry must be negative for stoquastic K");
        for (i, &v) in nodes.iter().enumerate() {
            assert!(used.insert(v), "chains overlap at node {v}");
            h0.set(v, v, -2.0 * alpha / a)?;
            if i + 1 < nodes.len() {
                h0.set(v, nodes[i + 1], alpha / a)?;
            }
        }
        vmain.set(lay.encode(x), nodes[0], coupling)?;
        vmain.set(lay.encode(y), nodes[2 * n + 2], coupling)?;
        chains.push(Chain { x, y, a, nodes });
    }
    let mut vextra = SparseSymmetricOperator::zeros(n_a)?;
    for x in 0..1usize << n {
        let sum: f64 = constraint.neighbours(x).into_iter().map(|y| a_of(x, y)).sum();
        vextra.set(lay.encode(x), lay.encode(x), a_of(x, x) - (2 * n + 3) as f64 * sum)?;
    }
    let combined = h0.combine(params.delta, &vmain, params.delta.sqrt())?.add(&vextra)?;
    Ok(ReductionIOutput {
        params: params.clone(),
        layout: lay,
        alpha,
        h0,
        vmain,
        vextra,
        delta: params.delta,
        encoding: Isometry::from_basis_map(dim, &encoded)?,
        chains,
        combined,
    })
}

/// Target low block of stage I: `K − (ε/2s)·E` with `E` the adjacency (self-loops included).
pub fn stage_i_effective(k: &SparseSymmetricOperator, constraint: &InteractionConstraint, s: usize, eps: f64) -> Result<SparseSymmetricOperator> {
    let off = eps / (2.0 * s as f64);
    let mut out = k.clone();
    for x in 0..k.dim() {
        out.add_to(x, x, -off)?;
    }
    for (x, y) in constraint.edges() {
        out.add_to(x, y, -off)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Stage II

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionIIOutput {
    pub params: ReductionParams,
    /// `−Δ_B Σ X_i` on `2n` qubits.
    pub x_part: PauliTermList,
    /// `Δ H₀ + V_extra`.
    pub d_part: DiagonalOperator,
    pub delta_b: f64,
    pub encoding: Isometry,
    pub h0: DiagonalOperator,
    pub vextra: DiagonalOperator,
}

impl ReductionIIOutput {
    pub fn combined(&self) -> Result<SparseSymmetricOperator> {
        build_from_pauli(&self.x_part)?.add(&self.d_part.to_sparse())
    }

    /// `V_main = −√((M+1)/2) Σ X_i`.
    pub fn vmain(&self) -> Result<SparseSymmetricOperator> {
        let c = ((self.params.m_norm + 1.0) / 2.0).sqrt();
        build_from_pauli(&PauliTermList::uniform_x(2 * self.params.n, c))
    }

    pub fn gadget(&self) -> Result<Gadget> {
        Ok(Gadget {
            h0: self.h0.to_sparse(),
            vmain: self.vmain()?,
            vextra: self.vextra.to_sparse(),
            delta: self.params.delta,
            encoding: self.encoding.clone(),
        })
    }

    /// `ε′ = ε / (2(n+1))`.
    pub fn eps_prime(&self) -> f64 {
        self.params.eps / (2.0 * (self.params.n + 1) as f64)
    }

    /// `(M+1)/(far + ε′)`, the per-bit penalty of distant pairs.
    pub fn far_alpha(&self) -> f64 {
        let far = self.params.far_scale.unwrap_or(self.params.m_norm);
        (self.params.m_norm + 1.0) / (far + self.eps_prime())
    }
}

/// `Δ_B = √(Δ(M+1)/2)`.
pub fn delta_b(delta: f64, m_norm: f64) -> f64 {
    (delta * (m_norm + 1.0) / 2.0).sqrt()
}

/// `H₀` diagonal entry of stage II for the pair `(x, y)`; `k_entry` is queried only when
/// `dist(x, y) = 1`.
pub fn stage_ii_h0(params: &ReductionParams, x: usize, y: usize, k_entry: impl FnOnce() -> f64) -> f64 {
    let epsp = params.eps / (2.0 * (params.n + 1) as f64);
    match hamming(x, y) {
        0 => 0.0,
        1 => -(params.m_norm + 1.0) / (k_entry() - epsp),
        d => {
            let far = params.far_scale.unwrap_or(params.m_norm);
            (params.m_norm + 1.0) * d as f64 / (far + epsp)
        }
    }
}

/// Stage II: an `n`-qubit stoquastic hypercube `K` becomes `X_B + D′` on `2n` qubits.
pub fn reduce_hypercube_to_tfd(k: &SparseSymmetricOperator, params: &ReductionParams) -> Result<ReductionIIOutput> {
    params.check()?;
    let n = k.num_qubits();
    if n != params.n {
        return Err(Error::DimensionMismatch(format!("K has {n} qubits, descriptor says {}", params.n)));
    }
    check_stoquastic(k)?;
    if let Some((i, j, _)) = k.off_diagonal().find(|&(i, j, _)| hamming(i, j) > 1) {
        return Err(Error::Structure(format!("entry ({i}, {j}) beyond Hamming distance 1")));
    }
    check_norm(k, params.m_norm)?;
    if 2 * n > MAX_QUBITS {
        return Err(Error::MemoryGuard(format!("{} output qubits", 2 * n)));
    }
    let nb = 2 * n;
    let epsp = params.eps / (2.0 * (n + 1) as f64);
    let dim = 1usize << nb;
    let mut h0 = vec![0.0; dim];
    let mut vextra = vec![0.0; dim];
    for x in 0..1usize << n {
        for y in 0..1usize << n {
            h0[(x << n) | y] = stage_ii_h0(params, x, y, || k.get(x, y));
        }
        let near: f64 = (0..n).map(|q| k.get(x, x ^ (1 << q)) - epsp).sum();
        vextra[(x << n) | x] = (k.get(x, x) - epsp) - near;
    }
    let h0 = DiagonalOperator::new(nb, h0)?;
    let vextra = DiagonalOperator::new(nb, vextra)?;
    let d = DiagonalOperator::new(
        nb,
        h0.values().iter().zip(vextra.values()).map(|(h, v)| params.delta * h + v).collect(),
    )?;
    let db = delta_b(params.delta, params.m_norm);
    let map: Vec<usize> = (0..1usize << n).map(|x| (x << n) | x).collect();
    Ok(ReductionIIOutput {
        params: params.clone(),
        x_part: PauliTermList::uniform_x(nb, db),
        d_part: d,
        delta_b: db,
        encoding: Isometry::from_basis_map(dim, &map)?,
        h0,
        vextra,
    })
}

/// Target low block of stage II: `K − ε′·E` with `E` the distance-≤1 adjacency.
pub fn stage_ii_effective(k: &SparseSymmetricOperator, eps: f64) -> Result<SparseSymmetricOperator> {
    let n = k.num_qubits();
    let epsp = eps / (2.0 * (n + 1) as f64);
    let mut out = k.clone();
    for x in 0..k.dim() {
        out.add_to(x, x, -epsp)?;
        for q in 0..n {
            let y = x ^ (1 << q);
            if x < y {
                out.add_to(x, y, -epsp)?;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Decorations

/// Operator bundles for the endpoint decorations.
#[derive(Clone, Copy, Debug)]
pub enum Decoration<'a> {
    /// Yields `[P3, P2]`: `−𝔪ΣX → −𝔪ΣZ → −𝔪|0⟩⟨0|`, then `−𝔪|0⟩⟨0| → ΔH₀+V_extra → H′(0)`.
    IHead { start: &'a Gadget, m_frak: f64 },
    /// Yields `[P1]`: `H′(1) → ΔH₀+V_extra → −𝔪|u⟩⟨u|` with `u = E|w⟩`.
    ITail { end: &'a Gadget, m_frak: f64, w: usize },
    /// Yields `[P5]`: `X_B → X_B + ½Δα(nI − ΣZ_iZ_{n+i}) → H′(0)`.
    IIHead { start: &'a ReductionIIOutput },
    /// Yields `[P4]`: `H′(1) → H′(1) − 3Δ_B n_B|u⟩⟨u| → X_B − 3Δ_B n_B|u⟩⟨u|`.
    IITail { end: &'a ReductionIIOutput, w: usize },
}

fn two_segment(a: SparseSymmetricOperator, b: SparseSymmetricOperator, c: SparseSymmetricOperator) -> Result<PiecewiseLinearPath> {
    PiecewiseLinearPath::new(vec![(0.0, a), (0.5, b), (1.0, c)])
}

fn projector(num_qubits: usize, i: usize, c: f64) -> Result<SparseSymmetricOperator> {
    SparseSymmetricOperator::from_triples(num_qubits, [(i, i, c)])
}

fn encoded_index(e: &Isometry, w: usize) -> Result<usize> {
    let map = e.basis_map().ok_or_else(|| Error::InvalidArgument("encoding must be a basis map".into()))?;
    map.get(w).copied().ok_or(Error::IndexOutOfRange { index: w, num_qubits: map.len().trailing_zeros() as usize })
}

/// Two-segment decoration paths on `[0, 1]` with the middle operator at `t = 1/2`.
pub fn decorate_endpoints(pieces: Decoration<'_>) -> Result<Vec<PiecewiseLinearPath>> {
    match pieces {
        Decoration::IHead { start, m_frak } => {
            let nq = start.h0.num_qubits();
            let mut zs = PauliTermList::new(nq);
            for q in 0..nq {
                zs.push(PauliTerm::z(-m_frak, q));
            }
            let xs = build_from_pauli(&PauliTermList::uniform_x(nq, m_frak))?;
            let ground = projector(nq, 0, -m_frak)?;
            let p3 = two_segment(xs, build_from_pauli(&zs)?, ground.clone())?;
            let mid = start.h0.combine(start.delta, &start.vextra, 1.0)?;
            let p2 = two_segment(ground, mid, start.combined()?)?;
            Ok(vec![p3, p2])
        }
        Decoration::ITail { end, m_frak, w } => {
            let nq = end.h0.num_qubits();
            let u = encoded_index(&end.encoding, w)?;
            let mid = end.h0.combine(end.delta, &end.vextra, 1.0)?;
            Ok(vec![two_segment(end.combined()?, mid, projector(nq, u, -m_frak)?)?])
        }
        Decoration::IIHead { start } => {
            let n = start.params.n;
            let nb = 2 * n;
            let xb = build_from_pauli(&start.x_part)?;
            let coeff = 0.5 * start.params.delta * start.far_alpha();
            let mut ladder = PauliTermList::new(nb);
            ladder.push(PauliTerm::identity(coeff * n as f64));
            for i in 0..n {
                ladder.push(PauliTerm::zz(-coeff, i, n + i));
            }
            let mid = xb.add(&build_from_pauli(&ladder)?)?;
            Ok(vec![two_segment(xb, mid, start.combined()?)?])
        }
        Decoration::IITail { end, w } => {
            let nb = 2 * end.params.n;
            let u = encoded_index(&end.encoding, w)?;
            let pin = projector(nb, u, -3.0 * end.delta_b * nb as f64)?;
            let h1 = end.combined()?;
            let mid = h1.add(&pin)?;
            let last = build_from_pauli(&end.x_part)?.add(&pin)?;
            Ok(vec![two_segment(h1, mid, last)?])
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling and calibration

#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    pub path: PiecewiseLinearPath,
    /// `max_k ‖D(t_k) − D(t_{k−1})‖₁`.
    pub max_deviation: f64,
    /// Grid Lipschitz estimate of the source path.
    pub lipschitz: f64,
    /// `L·|domain|/ℓ`.
    pub deviation_bound: f64,
}

/// Breakpoints `D_k = D(t_k)` at `ℓ+1` equally spaced times over the path's domain.
pub fn sample_path(path: &HamiltonianPath, ell: usize) -> Result<SampledPath> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be at least 1".into()));
    }
    let (lo, hi) = path.domain();
    let at = |k: usize| if k == ell { hi } else { lo + (hi - lo) * k as f64 / ell as f64 };
    let ops: Vec<(f64, SparseSymmetricOperator)> =
        (0..=ell).map(|k| Ok((at(k), path.eval(at(k))?))).collect::<Result<_>>()?;
    let mut max_deviation = 0.0f64;
    for w in ops.windows(2) {
        max_deviation = max_deviation.max(w[1].1.sub(&w[0].1)?.induced_one_norm());
    }
    let refine = 8 * ell;
    let grid: Vec<f64> = (0..=refine).map(|k| if k == refine { hi } else { lo + (hi - lo) * k as f64 / refine as f64 }).collect();
    let lipschitz = lipschitz_estimate(path, &grid)?;
    Ok(SampledPath {
        path: PiecewiseLinearPath::new(ops)?,
        max_deviation,
        lipschitz,
        deviation_bound: lipschitz * (hi - lo) / ell as f64,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub delta: f64,
    pub certificate: SimulationCertificate,
    /// Number of certificates evaluated.
    pub trials: usize,
}

/// Smallest Δ found by doubling from `start` (capped at 2⁴⁰) and then bisecting, whose
/// certificate passes at `(eps_enc, eps)`. `builder(Δ)` returns `(H_target, H_sim)`.
pub fn calibrate_delta(
    builder: impl Fn(f64) -> Result<(SparseSymmetricOperator, SparseSymmetricOperator)>,
    target: (f64, f64),
    e: &Isometry,
    start: f64,
) -> Result<Calibration> {
    if !(start > 0.0) {
        return Err(Error::InvalidArgument(format!("start = {start} must be positive")));
    }
    let mut trials = 0usize;
    let mut attempt = |delta: f64| -> Result<Option<SimulationCertificate>> {
        trials += 1;
        let (h, hs) = builder(delta)?;
        match verify_simulation(&h, &hs, e, target.0, target.1) {
            Ok(c) if c.passed => Ok(Some(c)),
            Ok(_) | Err(Error::Degenerate(_)) => Ok(None),
            Err(err) => Err(err),
        }
    };
    let mut lo = None;
    let mut delta = start;
    let (mut hi, mut cert) = loop {
        if delta > DELTA_CAP {
            let (h, hs) = builder(DELTA_CAP)?;
            let detail = match verify_simulation(&h, &hs, e, target.0, target.1) {
                Ok(c) => format!("eps_enc = {:e}, eps = {:e}", c.eps_enc_measured, c.eps_measured),
                Err(err) => err.to_string(),
            };
            return Err(Error::CalibrationCap { delta: DELTA_CAP, detail });
        }
        if let Some(c) = attempt(delta)? {
            break (delta, c);
        }
        lo = Some(delta);
        delta *= 2.0;
    };
    if let Some(mut lo) = lo {
        while hi / lo > 1.0 + 1.0 / 64.0 {
            let mid = (lo * hi).sqrt();
            match attempt(mid)? {
                Some(c) => {
                    hi = mid;
                    cert = c;
                }
                None => lo = mid,
            }
        }
    }
    Ok(Calibration { delta: hi, certificate: cert, trials })
}

// ---------------------------------------------------------------------------
// Entry-level evaluation through oracles

/// Where a stage I basis state sits in the construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoleI {
    Encoded(usize),
    /// Chain of edge `(x, y)`, 1-based position `i`.
    Chain { x: usize, y: usize, pos: usize },
    Other,
}

/// Locates a stage I basis state using only adjacency-list queries
/// `neighbour(v, r, above)` (the `r`-th ranked neighbour of `v`).
pub fn locate_i(lay: &LayoutI, idx: usize, neighbour: &dyn Fn(usize, usize, bool) -> Option<usize>) -> RoleI {
    let v = lay.unpack(idx);
    let n = lay.n;
    let ones = |k: usize| (1usize << k) - 1;
    let find = |walk: &[usize], z: usize| walk.iter().position(|&w| w == z);
    match (v.a, v.b) {
        (0, 0) if v.c == 0 && v.p == v.q => RoleI::Encoded(v.p),
        (a, 0) if a != 0 => {
            let Some(r) = lay.rank_of_one_hot(a) else { return RoleI::Other };
            let x = v.p;
            let Some(y) = neighbour(x, r, true) else { return RoleI::Other };
            let walk = lexicographic_walk(x, y);
            let ell = walk.len() - 1;
            if v.c == 0 {
                if let Some(i) = find(&walk, v.q) {
                    return RoleI::Chain { x, y, pos: 1 + i };
                }
            } else if v.q == y {
                if let Some(k) = (1..=n - ell).find(|&k| ones(k) == v.c) {
                    return RoleI::Chain { x, y, pos: ell + 1 + k };
                }
            }
            RoleI::Other
        }
        (a, b) if a != 0 && b != 0 => {
            let (Some(r1), Some(r2)) = (lay.rank_of_one_hot(a), lay.rank_of_one_hot(b)) else { return RoleI::Other };
            let (x, y) = (v.p, v.q);
            if x >= y || neighbour(x, r1, true) != Some(y) || neighbour(y, r2, false) != Some(x) {
                return RoleI::Other;
            }
            if v.c == ones(n - hamming(x, y) as usize) {
                RoleI::Chain { x, y, pos: n + 2 }
            } else {
                RoleI::Other
            }
        }
        (0, b) if b != 0 => {
            let Some(r) = lay.rank_of_one_hot(b) else { return RoleI::Other };
            let y = v.q;
            let Some(x) = neighbour(y, r, false) else { return RoleI::Other };
            let walk = lexicographic_walk(x, y);
            let ell = walk.len() - 1;
            if v.c == 0 {
                if let Some(i) = find(&walk, v.p) {
                    return RoleI::Chain { x, y, pos: 2 * n + 3 - ell + i };
                }
            } else if v.p == x {
                if let Some(k) = (1..=n - ell).find(|&k| ones(k) == v.c) {
                    return RoleI::Chain { x, y, pos: 2 * n + 3 - ell - k };
                }
            }
            RoleI::Other
        }
        _ => RoleI::Other,
    }
}

/// One entry of the stage I combined operator, computed from oracle queries only:
/// `k_entry(x, y)` for entries of `K` and `neighbour(v, r, above)` for adjacency lists.
pub fn entry_i(
    params: &ReductionParams,
    i: usize,
    j: usize,
    k_entry: &dyn Fn(usize, usize) -> f64,
    neighbour: &dyn Fn(usize, usize, bool) -> Option<usize>,
) -> f64 {
    let lay = LayoutI { n: params.n, s: params.s };
    let off = params.eps / (2.0 * params.s as f64);
    let alpha = chain_alpha(params.n, params.m_norm);
    let delta = params.delta;
    let ri = locate_i(&lay, i, neighbour);
    if i == j {
        return match ri {
            RoleI::Encoded(x) => {
                let mut sum = 0.0;
                for above in [true, false] {
                    let mut r = 1;
                    while let Some(y) = neighbour(x, r, above) {
                        sum += k_entry(x, y) - off;
                        r += 1;
                    }
                }
                (k_entry(x, x) - off) - (2 * params.n + 3) as f64 * sum
            }
            RoleI::Chain { x, y, .. } => delta * (-2.0 * alpha / (k_entry(x, y) - off)),
            RoleI::Other => delta,
        };
    }
    let rj = locate_i(&lay, j, neighbour);
    let last = 2 * params.n + 3;
    let coupling = -(alpha * (2 * params.n + 4) as f64).sqrt() * delta.sqrt();
    match (ri, rj) {
        (RoleI::Chain { x, y, pos: p }, RoleI::Chain { x: x2, y: y2, pos: q }) if (x, y) == (x2, y2) && p.abs_diff(q) == 1 => {
            delta * alpha / (k_entry(x, y) - off)
        }
        (RoleI::Encoded(e), RoleI::Chain { x, y, pos }) | (RoleI::Chain { x, y, pos }, RoleI::Encoded(e))
            if (e == x && pos == 1) || (e == y && pos == last) =>
        {
            coupling
        }
        _ => 0.0,
    }
}

/// One entry of the stage II combined operator from `K`-entry queries.
pub fn entry_ii(params: &ReductionParams, i: usize, j: usize, k_entry: &dyn Fn(usize, usize) -> f64) -> f64 {
    let n = params.n;
    if i != j {
        return if hamming(i, j) == 1 { -delta_b(params.delta, params.m_norm) } else { 0.0 };
    }
    let (x, y) = (i >> n, i & ((1 << n) - 1));
    let epsp = params.eps / (2.0 * (n + 1) as f64);
    let h0 = stage_ii_h0(params, x, y, || k_entry(x, y));
    let extra = if x == y {
        let near: f64 = (0..n).map(|q| k_entry(x, x ^ (1 << q)) - epsp).sum();
        (k_entry(x, x) - epsp) - near
    } else {
        0.0
    };
    params.delta * h0 + extra
}
