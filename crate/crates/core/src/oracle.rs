//! Query-counting oracles and their composition through reductions.
//!
//! A [`CountingOracle`] wraps an evaluator and tallies calls in a shared atomic
//! counter. A [`ComposedOracle`] answers queries about a derived object (a reduced
//! Hamiltonian, the final diagonal of an assembled path, the QHD objective) by querying
//! a base oracle, and checks the number of base queries spent on each answer against a
//! declared bound.

use std::cell::{Cell, RefCell};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::clock::{alpha_beta, unary_level, LinearAssembly};
use crate::continuous::objective_with;
use crate::error::{Error, Result};
use crate::path::InteractionConstraint;
use crate::reductions::{entry_i, entry_ii, ReductionParams};

/// Anything that answers queries of type `Q` with values of type `R`.
pub trait Oracle<Q, R>: Send + Sync {
    fn query(&self, q: Q) -> Result<R>;
    /// Total number of queries answered so far.
    fn queries(&self) -> u64;
}

/// Pass-through evaluator with a query counter. Clones share the counter.
pub struct CountingOracle<Q, R = f64> {
    eval: Arc<dyn Fn(Q) -> R + Send + Sync>,
    counter: Arc<AtomicU64>,
}

impl<Q, R> Clone for CountingOracle<Q, R> {
    fn clone(&self) -> Self {
        Self { eval: Arc::clone(&self.eval), counter: Arc::clone(&self.counter) }
    }
}

impl<Q, R> CountingOracle<Q, R> {
    pub fn call(&self, q: Q) -> R {
        self.counter.fetch_add(1, Ordering::Relaxed);
        (self.eval)(q)
    }

    pub fn count(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }
}

impl<Q, R> Oracle<Q, R> for CountingOracle<Q, R> {
    fn query(&self, q: Q) -> Result<R> {
        Ok(self.call(q))
    }
    fn queries(&self) -> u64 {
        self.count()
    }
}

/// Wraps `f` with a fresh counter.
pub fn counting_wrap<Q, R>(f: impl Fn(Q) -> R + Send + Sync + 'static) -> CountingOracle<Q, R> {
    CountingOracle { eval: Arc::new(f), counter: Arc::new(AtomicU64::new(0)) }
}

/// Query accounting of a composed oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub queries: u64,
    pub base_queries: u64,
    pub per_query_overhead_max: u64,
    pub declared_bound: u64,
}

type Runner<Q, R> = dyn Fn(Q) -> Result<(R, u64)> + Send + Sync;

/// Oracle for a derived object, implemented by base-oracle queries.
pub struct ComposedOracle<Q, R> {
    run: Box<Runner<Q, R>>,
    declared: u64,
    queries: AtomicU64,
    base_queries: AtomicU64,
    max_overhead: AtomicU64,
}

impl<Q, R> ComposedOracle<Q, R> {
    /// Answer and number of base queries it took.
    pub fn query_counted(&self, q: Q) -> Result<(R, u64)> {
        let (r, used) = (self.run)(q)?;
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.base_queries.fetch_add(used, Ordering::Relaxed);
        self.max_overhead.fetch_max(used, Ordering::Relaxed);
        if used > self.declared {
            return Err(Error::OverheadExceeded { measured: used, declared: self.declared });
        }
        Ok((r, used))
    }

    pub fn report(&self) -> CountReport {
        CountReport {
            queries: self.queries.load(Ordering::Relaxed),
            base_queries: self.base_queries.load(Ordering::Relaxed),
            per_query_overhead_max: self.max_overhead.load(Ordering::Relaxed),
            declared_bound: self.declared,
        }
    }

    pub fn declared_bound(&self) -> u64 {
        self.declared
    }
}

impl<Q, R> Oracle<Q, R> for ComposedOracle<Q, R> {
    fn query(&self, q: Q) -> Result<R> {
        self.query_counted(q).map(|(r, _)| r)
    }
    fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Composes `derive` over `base`: each derived query may call the base through the
/// supplied closure, and at most `declared` such calls are allowed per query.
pub fn compose_reduction_oracle<Q, R, Q2, R2>(
    base: Arc<dyn Oracle<Q, R>>,
    declared: u64,
    derive: impl Fn(Q2, &dyn Fn(Q) -> R) -> R2 + Send + Sync + 'static,
) -> ComposedOracle<Q2, R2>
where
    Q: 'static,
    R: Default + 'static,
    Q2: 'static,
    R2: 'static,
{
    let run = move |q2: Q2| -> Result<(R2, u64)> {
        let used = Cell::new(0u64);
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let ask = |q: Q| -> R {
            used.set(used.get() + 1);
            match base.query(q) {
                Ok(r) => r,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    R::default()
                }
            }
        };
        let r = derive(q2, &ask);
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok((r, used.get())),
        }
    };
    ComposedOracle {
        run: Box::new(run),
        declared,
        queries: AtomicU64::new(0),
        base_queries: AtomicU64::new(0),
        max_overhead: AtomicU64::new(0),
    }
}

/// Entries of the final diagonal of an assembled path from queries `(i, v) ↦ ⟨v|D_i|v⟩`.
/// Clock-only states cost no query; states with a unary clock cost exactly one.
pub fn final_diagonal_oracle(
    base: Arc<dyn Oracle<(usize, usize), f64>>,
    a: &LinearAssembly,
) -> Result<ComposedOracle<usize, f64>> {
    a.validate()?;
    let (clock, ell, delta_c, t) = (a.clock, a.ell(), a.delta_c, 1.0 / a.eta);
    let dim = 1usize << a.num_qubits();
    Ok(compose_reduction_oracle(base, 1, move |x: usize, ask: &dyn Fn((usize, usize)) -> f64| {
        if x >= dim {
            return f64::NAN;
        }
        let (v, c) = (x >> ell, x & ((1 << ell) - 1));
        let clock_part = if ell > 0 {
            let (al, be) = alpha_beta(&clock, c, t);
            delta_c * (al + be)
        } else {
            0.0
        };
        match unary_level(ell, c) {
            Some(j) => clock_part + 2.0 * ask((j, v)),
            None => clock_part,
        }
    }))
}

/// Objective `f(ξ) = Ĥ_prob(ξ) + Σ a_i f_dw(ξ_i)`, one diagonal query per evaluation.
pub fn objective_oracle(
    base: Arc<dyn Oracle<usize, f64>>,
    a: Vec<f64>,
    w: f64,
) -> ComposedOracle<Vec<f64>, f64> {
    compose_reduction_oracle(base, 1, move |xi: Vec<f64>, ask: &dyn Fn(usize) -> f64| {
        objective_with(&a, w, &xi, &|x| ask(x)).unwrap_or(f64::NAN)
    })
}

/// Entries of the stage I operator from `K`-entry queries. Adjacency lists are taken
/// from `constraint` and are not counted; the declared bound is `s`.
pub fn reduction_i_oracle(
    base: Arc<dyn Oracle<(usize, usize), f64>>,
    params: ReductionParams,
    constraint: InteractionConstraint,
) -> ComposedOracle<(usize, usize), f64> {
    let declared = params.s as u64;
    compose_reduction_oracle(base, declared, move |(i, j): (usize, usize), ask: &dyn Fn((usize, usize)) -> f64| {
        let nb = |v: usize, r: usize, above: bool| constraint.ranked_neighbour(v, r, above);
        entry_i(&params, i, j, &|x, y| ask((x, y)), &nb)
    })
}

/// Entries of stage II applied to stage I, from `K`-entry queries. Every stage II entry
/// needs at most `n′ + 2` stage I entries (`n′ = 3n + 2s`), each costing at most `s`
/// queries, so the declared bound is `4(ns + s²)`.
pub fn reduction_ii_of_i_oracle(
    base: Arc<dyn Oracle<(usize, usize), f64>>,
    params_i: ReductionParams,
    params_ii: ReductionParams,
    constraint: InteractionConstraint,
) -> Result<ComposedOracle<(usize, usize), f64>> {
    let inner_qubits = 3 * params_i.n + 2 * params_i.s;
    if params_ii.n != inner_qubits {
        return Err(Error::DimensionMismatch(format!(
            "stage II expects {} qubits, stage I produces {inner_qubits}",
            params_ii.n
        )));
    }
    let (n, s) = (params_i.n as u64, params_i.s as u64);
    let declared = 4 * (n * s + s * s);
    Ok(compose_reduction_oracle(base, declared, move |(i, j): (usize, usize), ask: &dyn Fn((usize, usize)) -> f64| {
        let nb = |v: usize, r: usize, above: bool| constraint.ranked_neighbour(v, r, above);
        let inner = |x: usize, y: usize| entry_i(&params_i, x, y, &|p, q| ask((p, q)), &nb);
        entry_ii(&params_ii, i, j, &inner)
    }))
}
