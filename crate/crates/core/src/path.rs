//! Hamiltonian paths: piecewise-linear breakpoint lists and pointwise-transformed paths,
//! interaction constraints, and the seeded random sparse stoquastic path generator.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::SparseSymmetricOperator;
use crate::reductions::{reduce_hypercube_to_tfd, reduce_sparse_to_hypercube, ReductionParams, Stage};

/// Interaction graph on `{0,1}^n`: off-diagonal edges `(x, y)` with `x < y`. Self-loops
/// are implicit, so the row sparsity of a compatible operator is `degree + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionConstraint {
    num_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl InteractionConstraint {
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let dim = 1usize << num_qubits;
        let mut set = BTreeSet::new();
        for (x, y) in edges {
            if x >= dim || y >= dim {
                return Err(Error::IndexOutOfRange { index: x.max(y), num_qubits });
            }
            if x != y {
                set.insert((x.min(y), x.max(y)));
            }
        }
        Ok(Self { num_qubits, edges: set })
    }

    /// Off-diagonal support of an operator.
    pub fn from_support(op: &SparseSymmetricOperator) -> Self {
        Self {
            num_qubits: op.num_qubits(),
            edges: op.off_diagonal().map(|(i, j, _)| (i, j)).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch("constraints on different registers".into()));
        }
        Ok(Self { num_qubits: self.num_qubits, edges: self.edges.union(&other.edges).copied().collect() })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x == y || self.edges.contains(&(x.min(y), x.max(y)))
    }

    /// Neighbours of `x` other than `x`, ascending.
    pub fn neighbours(&self, x: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .range((0, 0)..(x, usize::MAX))
            .filter(|&&(_, b)| b == x)
            .map(|&(a, _)| a)
            .collect();
        out.extend(self.edges.range((x, 0)..(x + 1, 0)).map(|&(_, b)| b));
        out.sort_unstable();
        out
    }

    /// Largest row sparsity, counting the self-loop.
    pub fn max_row_sparsity(&self) -> usize {
        let mut deg = vec![0usize; 1 << self.num_qubits];
        for &(x, y) in &self.edges {
            deg[x] += 1;
            deg[y] += 1;
        }
        deg.into_iter().max().unwrap_or(0) + 1
    }

    /// `rk(x, y)`: 1-based position of `y` among the neighbours of `x` on the same side,
    /// listed increasingly above `x` and decreasingly below it.
    pub fn rank(&self, x: usize, y: usize) -> Option<usize> {
        if x == y || !self.contains(x, y) {
            return None;
        }
        let nb = self.neighbours(x);
        if y > x {
            nb.iter().filter(|&&z| z > x).position(|&z| z == y).map(|p| p + 1)
        } else {
            nb.iter().rev().filter(|&&z| z < x).position(|&z| z == y).map(|p| p + 1)
        }
    }

    /// Inverse of [`rank`](Self::rank): the neighbour of `x` with rank `r` on the given side.
    pub fn ranked_neighbour(&self, x: usize, r: usize, above: bool) -> Option<usize> {
        if r == 0 {
            return None;
        }
        let nb = self.neighbours(x);
        if above {
            nb.iter().filter(|&&z| z > x).nth(r - 1).copied()
        } else {
            nb.iter().rev().filter(|&&z| z < x).nth(r - 1).copied()
        }
    }
}

/// Breakpoint list `(t_k, H_k)` with linear interpolation between breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearPath {
    breakpoints: Vec<(f64, SparseSymmetricOperator)>,
}

impl PiecewiseLinearPath {
    pub fn new(breakpoints: Vec<(f64, SparseSymmetricOperator)>) -> Result<Self> {
        let first = breakpoints
            .first()
            .ok_or_else(|| Error::InvalidArgument("path needs at least one breakpoint".into()))?;
        let n = first.1.num_qubits();
        for w in breakpoints.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidArgument("breakpoint times must increase strictly".into()));
            }
        }
        if breakpoints.iter().any(|(t, op)| !t.is_finite() || op.num_qubits() != n) {
            return Err(Error::DimensionMismatch("breakpoints must share num_qubits".into()));
        }
        Ok(Self { breakpoints })
    }

    /// Breakpoints at `0, 1/k, …, 1` for `k + 1` operators.
    pub fn uniform(ops: Vec<SparseSymmetricOperator>) -> Result<Self> {
        let k = ops.len().saturating_sub(1).max(1) as f64;
        Self::new(ops.into_iter().enumerate().map(|(i, op)| (i as f64 / k, op)).collect())
    }

    pub fn breakpoints(&self) -> &[(f64, SparseSymmetricOperator)] {
        &self.breakpoints
    }

    pub fn num_qubits(&self) -> usize {
        self.breakpoints[0].1.num_qubits()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0].0, self.breakpoints.last().expect("non-empty").0)
    }

    pub fn eval(&self, t: f64) -> Result<SparseSymmetricOperator> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutsideDomain { t, lo, hi });
        }
        let k = self.breakpoints.partition_point(|(tk, _)| *tk <= t);
        if k == 0 {
            return Ok(self.breakpoints[0].1.clone());
        }
        let (t0, a) = &self.breakpoints[k - 1];
        if *t0 == t || k == self.breakpoints.len() {
            return Ok(a.clone());
        }
        let (t1, b) = &self.breakpoints[k];
        let s = (t - t0) / (t1 - t0);
        a.combine(1.0 - s, b, s)
    }

    /// Concatenates paths, placing each on a unit-length segment (uniform rescaling), and
    /// maps the whole onto `[0, 1]`. Adjacent endpoints must agree within `tol` (induced norm).
    pub fn concat(parts: &[PiecewiseLinearPath], tol: f64) -> Result<Self> {
        let count = parts.len();
        if count == 0 {
            return Err(Error::InvalidArgument("nothing to concatenate".into()));
        }
        let mut out: Vec<(f64, SparseSymmetricOperator)> = Vec::new();
        for (p, part) in parts.iter().enumerate() {
            let (lo, hi) = part.domain();
            for (k, (t, op)) in part.breakpoints.iter().enumerate() {
                let local = if hi > lo { (t - lo) / (hi - lo) } else { 0.0 };
                let global = (p as f64 + local) / count as f64;
                if k == 0 && p > 0 {
                    let prev = &out.last().expect("previous part").1;
                    let gap = prev.sub(op)?.induced_one_norm();
                    if gap > tol {
                        return Err(Error::InvalidArgument(format!(
                            "part {p} starts {gap:e} away from the previous endpoint"
                        )));
                    }
                    continue;
                }
                out.push((global, op.clone()));
            }
        }
        Self::new(out)
    }
}

/// Frozen parameters of a pointwise reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionDescriptor {
    pub stage: Stage,
    pub params: ReductionParams,
    /// Interaction constraint for stage I; defaults to the union support of the base path.
    pub constraint: Option<InteractionConstraint>,
}

/// A base path with a reduction applied pointwise.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedPath {
    pub base: Box<HamiltonianPath>,
    pub descriptor: ReductionDescriptor,
}

impl TransformedPath {
    /// Constraint used for stage I evaluation.
    pub fn constraint(&self) -> Result<InteractionConstraint> {
        if let Some(c) = &self.descriptor.constraint {
            return Ok(c.clone());
        }
        self.base.support_constraint()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianPath {
    Piecewise(PiecewiseLinearPath),
    Transformed(TransformedPath),
}

impl HamiltonianPath {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Piecewise(p) => p.domain(),
            Self::Transformed(t) => t.base.domain(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            Self::Piecewise(p) => p.num_qubits(),
            Self::Transformed(t) => {
                let n = t.base.num_qubits();
                match t.descriptor.stage {
                    Stage::I => 3 * n + 2 * t.descriptor.params.s,
                    Stage::II => 2 * n,
                }
            }
        }
    }

    /// Union of off-diagonal supports over all breakpoints (piecewise) or of the
    /// transformed path's output structure.
    pub fn support_constraint(&self) -> Result<InteractionConstraint> {
        match self {
            Self::Piecewise(p) => {
                let mut c = InteractionConstraint::new(p.num_qubits(), [])?;
                for (_, op) in p.breakpoints() {
                    c = c.union(&InteractionConstraint::from_support(op))?;
                }
                Ok(c)
            }
            Self::Transformed(t) => {
                let (lo, hi) = t.base.domain();
                let mut c = InteractionConstraint::from_support(&self.eval(lo)?);
                c = c.union(&InteractionConstraint::from_support(&self.eval(hi)?))?;
                Ok(c)
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<SparseSymmetricOperator> {
        eval_path(self, t)
    }
}

/// `H(t)`: exact interpolation for piecewise paths, the frozen reduction for transformed ones.
pub fn eval_path(path: &HamiltonianPath, t: f64) -> Result<SparseSymmetricOperator> {
    match path {
        HamiltonianPath::Piecewise(p) => p.eval(t),
        HamiltonianPath::Transformed(tp) => {
            let k = tp.base.eval(t)?;
            let d = &tp.descriptor;
            match d.stage {
                Stage::I => {
                    let c = tp.constraint()?;
                    Ok(reduce_sparse_to_hypercube(&k, &c, &d.params)?.combined)
                }
                Stage::II => reduce_hypercube_to_tfd(&k, &d.params)?.combined(),
            }
        }
    }
}

/// Grid surrogate of the Lipschitz constant: `max ‖H(t′) − H(t)‖₁ / (t′ − t)` over
/// consecutive grid points.
pub fn lipschitz_estimate(path: &HamiltonianPath, grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument("need at least two grid points".into()));
    }
    let mut best = 0.0f64;
    let mut prev = path.eval(grid[0])?;
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
        let next = path.eval(w[1])?;
        best = best.max(next.sub(&prev)?.induced_one_norm() / (w[1] - w[0]));
        prev = next;
    }
    Ok(best)
}

fn check_generator_args(n: usize, s: usize, m: f64) -> Result<()> {
    if !(1..=6).contains(&n) {
        return Err(Error::Infeasible(format!("n = {n} outside 1..=6")));
    }
    if s == 0 || s > 1 << n {
        return Err(Error::Infeasible(format!("s = {s} outside 1..=2^{n}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Infeasible(format!("M = {m} must be positive")));
    }
    Ok(())
}

fn random_constraint(n: usize, s: usize, rng: &mut ChaCha8Rng) -> Result<InteractionConstraint> {
    let dim = 1usize << n;
    let mut pairs: Vec<(usize, usize)> = (0..dim).flat_map(|x| (x + 1..dim).map(move |y| (x, y))).collect();
    pairs.shuffle(rng);
    let mut deg = vec![0usize; dim];
    let mut edges = Vec::new();
    for (x, y) in pairs {
        if deg[x] + 1 < s && deg[y] + 1 < s {
            deg[x] += 1;
            deg[y] += 1;
            edges.push((x, y));
        }
    }
    InteractionConstraint::new(n, edges)
}

fn random_operator_on(c: &InteractionConstraint, m: f64, rng: &mut ChaCha8Rng) -> Result<SparseSymmetricOperator> {
    let n = c.num_qubits();
    let dim = 1usize << n;
    let mut op = SparseSymmetricOperator::zeros(n)?;
    for x in 0..dim {
        op.set(x, x, rng.random_range(-1.0..1.0))?;
    }
    for (x, y) in c.edges() {
        op.set(x, y, -rng.random_range(0.05..1.0))?;
    }
    let target = m * rng.random_range(0.5..1.0);
    let norm = op.induced_one_norm();
    Ok(if norm > 0.0 { op.scaled(target / norm) } else { op })
}

/// Seeded random path whose breakpoints are stoquastic, share one interaction constraint
/// of row sparsity `<= s`, and have induced 1-norm `<= M`. Breakpoints sit at `k/segments`.
pub fn random_sparse_stoquastic_path(
    n: usize,
    s: usize,
    m: f64,
    segments: usize,
    seed: u64,
) -> Result<(PiecewiseLinearPath, InteractionConstraint)> {
    check_generator_args(n, s, m)?;
    if segments == 0 {
        return Err(Error::Infeasible("segments must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = random_constraint(n, s, &mut rng)?;
    let ops = (0..=segments).map(|_| random_operator_on(&c, m, &mut rng)).collect::<Result<Vec<_>>>()?;
    Ok((PiecewiseLinearPath::uniform(ops)?, c))
}

/// Seeded random stoquastic hypercube operator: every Hamming-distance-1 pair carries a
/// negative weight; induced 1-norm `<= M`.
pub fn random_hypercube_operator(n: usize, m: f64, seed: u64) -> Result<SparseSymmetricOperator> {
    check_generator_args(n, 1, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n;
    let edges = (0..dim).flat_map(|x| (0..n).map(move |q| (x, x ^ (1 << q)))).filter(|&(x, y)| x < y);
    let c = InteractionConstraint::new(n, edges)?;
    random_operator_on(&c, m, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_from_pauli, PauliTermList};

    fn x_op() -> SparseSymmetricOperator {
        build_from_pauli(&PauliTermList::uniform_x(1, 1.0)).unwrap()
    }

    fn z_op() -> SparseSymmetricOperator {
        SparseSymmetricOperator::from_triples(1, [(0, 0, -1.0), (1, 1, 1.0)]).unwrap()
    }

    #[test]
    fn eval_interpolates() {
        let a = x_op();
        let b = z_op();
        let p = PiecewiseLinearPath::new(vec![(0.0, a.clone()), (1.0, b.clone())]).unwrap();
        assert_eq!(p.eval(0.0).unwrap(), a);
        let mid = p.eval(0.5).unwrap();
        assert_eq!(mid, a.combine(0.5, &b, 0.5).unwrap());
        assert!(matches!(p.eval(1.5), Err(Error::OutsideDomain { .. })));
        let c = a.scaled(3.0);
        let q = PiecewiseLinearPath::new(vec![(0.0, a), (1.0, b.clone()), (2.0, c.clone())]).unwrap();
        assert_eq!(q.eval(1.5).unwrap(), b.combine(0.5, &c, 0.5).unwrap());
    }

    #[test]
    fn lipschitz_of_x_to_z() {
        let p = HamiltonianPath::Piecewise(
            PiecewiseLinearPath::new(vec![(0.0, x_op()), (1.0, z_op())]).unwrap(),
        );
        assert!((lipschitz_estimate(&p, &[0.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((lipschitz_estimate(&p, &[0.2, 0.3, 0.9]).unwrap() - 2.0).abs() < 1e-12);
        assert!(lipschitz_estimate(&p, &[0.0]).is_err());
    }

    #[test]
    fn ranks_follow_ordering() {
        let c = InteractionConstraint::new(3, [(3, 5), (3, 7), (3, 1), (3, 0)]).unwrap();
        assert_eq!(c.rank(3, 5), Some(1));
        assert_eq!(c.rank(3, 7), Some(2));
        assert_eq!(c.rank(3, 1), Some(1));
        assert_eq!(c.rank(3, 0), Some(2));
        assert_eq!(c.ranked_neighbour(3, 2, false), Some(0));
        assert_eq!(c.max_row_sparsity(), 5);
    }

    #[test]
    fn generator_examples() {
        let (p, c) = random_sparse_stoquastic_path(1, 2, 1.0, 1, 7).unwrap();
        assert_eq!(p.breakpoints().len(), 2);
        for (_, op) in p.breakpoints() {
            let r = op.structure();
            assert!(r.stoquastic && r.induced_one_norm <= 1.0 + 1e-12);
        }
        assert_eq!(random_sparse_stoquastic_path(1, 2, 1.0, 1, 7).unwrap().0, p);
        assert!(c.max_row_sparsity() <= 2);
        let (p, c) = random_sparse_stoquastic_path(2, 3, 2.0, 2, 1).unwrap();
        assert_eq!(p.breakpoints().len(), 3);
        let mut u = InteractionConstraint::new(2, []).unwrap();
        for (_, op) in p.breakpoints() {
            u = u.union(&InteractionConstraint::from_support(op)).unwrap();
        }
        assert!(u.edges().all(|(x, y)| c.contains(x, y)));
        assert!(c.max_row_sparsity() <= 3);
        assert!(random_sparse_stoquastic_path(7, 2, 1.0, 1, 0).is_err());
        assert!(random_sparse_stoquastic_path(2, 5, 1.0, 1, 0).is_err());
    }
}
