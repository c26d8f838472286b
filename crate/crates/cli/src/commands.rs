//! One function per subcommand: read inputs, compute, collect outputs, report pass/fail.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hampath::clock::{assemble_final, linearize, tilt_extend, LinearAssembly};
use hampath::continuous::{qhd_path, theta_index, verify_tosdg, Grid1D, ScheduleParams};
use hampath::dynamics::{
    basis_state, evolve, fidelity, measure, required_time, to_complex, EvolutionSpec, TimeDependent,
};
use hampath::linalg::LinearOperator;
use hampath::operator::{tfi_representable, DiagonalOperator, PauliTermList, SparseSymmetricOperator};
use hampath::oracle::{compose_reduction_oracle, counting_wrap, reduction_i_oracle, ComposedOracle, Oracle};
use hampath::path::{
    random_hypercube_operator, random_sparse_stoquastic_path, HamiltonianPath, InteractionConstraint,
    PiecewiseLinearPath, ReductionDescriptor, TransformedPath,
};
use hampath::reductions::{
    calibrate_delta, entry_ii, reduce_hypercube_to_tfd, reduce_sparse_to_hypercube, ReductionParams, Stage,
    DEFAULT_EPS,
};
use hampath::spectral::{gap_scan, lowest_eigenpairs, verify_simulation, Isometry, SimulationCertificate};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{check_inputs, load, Format, Overrides, Shared};
use crate::emit::{Bundle, Cell};
use crate::formats::{
    read_json, AssemblyFile, ConstraintFile, DescriptorFile, EncodingFile, InstanceFile, OperatorFile, PathFile,
    PauliFile,
};
use crate::{CliError, Command};

type Outcome = Result<bool, CliError>;

pub fn dispatch(cmd: Command, o: &Overrides) -> Outcome {
    match cmd {
        Command::Gen => with(o, "gen", gen),
        Command::ReduceI => with(o, "reduce-i", reduce_i),
        Command::ReduceII => with(o, "reduce-ii", reduce_ii),
        Command::Linearize => with(o, "linearize", linearize_cmd),
        Command::Assemble => with(o, "assemble", assemble),
        Command::Gapscan => with(o, "gapscan", gapscan),
        Command::Certify => with(o, "certify", certify),
        Command::Evolve => with(o, "evolve", evolve_cmd),
        Command::Qhd => with(o, "qhd", qhd),
        Command::Tosdg => with(o, "tosdg", tosdg),
    }
}

/// Loads the config, validates inputs and the output directory, runs, then writes.
fn with<T: for<'de> Deserialize<'de> + Inputs>(
    o: &Overrides,
    name: &str,
    f: impl FnOnce(T, &Shared, &mut Bundle) -> Outcome,
) -> Outcome {
    let (cfg, shared): (T, Shared) = load(o)?;
    check_inputs(cfg.inputs().iter().map(PathBuf::as_path))?;
    if shared.out.exists() && !shared.out.is_dir() {
        return Err(CliError::Usage(format!("{} exists and is not a directory", shared.out.display())));
    }
    let mut bundle = Bundle::new(shared.out.clone());
    let passed = f(cfg, &shared, &mut bundle)?;
    bundle.write(name, passed)?;
    Ok(passed)
}

/// Input files named by a config.
trait Inputs {
    fn inputs(&self) -> Vec<PathBuf>;
}

fn half() -> f64 {
    DEFAULT_EPS
}
fn yes() -> bool {
    true
}
fn samples_default() -> usize {
    101
}

// ---------------------------------------------------------------------------
// gen

#[derive(Deserialize, Clone, Copy, Debug)]
#[serde(rename_all = "kebab-case")]
enum GenKind {
    SparsePath,
    Hypercube,
    Diagonal,
    Assembly,
    Instance,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenConfig {
    kind: GenKind,
    n: usize,
    #[serde(default = "gen_s")]
    s: usize,
    #[serde(rename = "M", default = "gen_m")]
    m: f64,
    #[serde(default = "gen_segments")]
    segments: usize,
    #[serde(default = "gen_ell")]
    ell: usize,
    #[serde(rename = "eps_L", default = "gen_eps_l")]
    eps_l: f64,
    #[serde(default = "gen_lambda0")]
    lambda0: f64,
}

fn gen_s() -> usize {
    2
}
fn gen_m() -> f64 {
    1.0
}
fn gen_segments() -> usize {
    1
}
fn gen_ell() -> usize {
    2
}
fn gen_eps_l() -> f64 {
    0.1
}
fn gen_lambda0() -> f64 {
    2.0
}

impl Inputs for GenConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        vec![]
    }
}

fn random_diagonal(n: usize, m: f64, seed: u64) -> Result<DiagonalOperator, CliError> {
    if !(m > 0.0) {
        return Err(CliError::Usage(format!("M = {m} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..1usize << n.min(30)).map(|_| -rng.random_range(0.0..m)).collect();
    DiagonalOperator::new(n, values).map_err(CliError::run)
}

fn gen(cfg: GenConfig, sh: &Shared, out: &mut Bundle) -> Outcome {
    let seed = sh.require_seed("gen")?;
    match cfg.kind {
        GenKind::SparsePath => {
            let (p, c) = random_sparse_stoquastic_path(cfg.n, cfg.s, cfg.m, cfg.segments, seed).map_err(CliError::run)?;
            out.json("path.json", &PathFile::from_piecewise(&p))?;
            out.json("constraint.json", &ConstraintFile::from_constraint(&c))?;
        }
        GenKind::Hypercube => {
            let k = random_hypercube_operator(cfg.n, cfg.m, seed).map_err(CliError::run)?;
            out.json("operator.json", &OperatorFile::from_op(&k))?;
        }
        GenKind::Diagonal => {
            out.json("operator.json", &OperatorFile::from_diagonal(&random_diagonal(cfg.n, cfg.m, seed)?))?;
        }
        GenKind::Assembly => {
            let d = random_diagonal(cfg.n, cfg.m, seed)?;
            let ell = cfg.ell.max(1);
            let ds = (0..=cfg.ell).map(|i| d.scaled(i as f64 / ell as f64)).collect();
            let a = LinearAssembly::with_defaults(ds, PauliTermList::uniform_x(cfg.n, 1.0), cfg.eps_l)
                .map_err(CliError::run)?;
            out.json("assembly.json", &AssemblyFile::from_assembly(&a))?;
        }
        GenKind::Instance => {
            let d = random_diagonal(cfg.n, cfg.m, seed)?;
            let inst = InstanceFile {
                H_prob: OperatorFile::from_diagonal(&d),
                a: vec![1.0; cfg.n],
                lambda0: cfg.lambda0,
                w: hampath::continuous::DEFAULT_W,
            };
            out.json("instance.json", &inst)?;
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// reductions and certificates

#[derive(Serialize)]
struct CertificateReport {
    passed: bool,
    gap_ok: bool,
    eps_enc_measured: f64,
    eps_enc_requested: f64,
    eps_measured: f64,
    eps_requested: f64,
    gap_target: f64,
    gap_sim: f64,
    low_split: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration_trials: Option<usize>,
}

impl CertificateReport {
    fn new(c: &SimulationCertificate, delta: Option<f64>, trials: Option<usize>) -> Self {
        Self {
            passed: c.passed,
            gap_ok: c.gap_ok,
            eps_enc_measured: c.eps_enc_measured,
            eps_enc_requested: c.eps_enc_requested,
            eps_measured: c.eps_measured,
            eps_requested: c.eps_requested,
            gap_target: c.gap_target,
            gap_sim: c.gap_sim,
            low_split: c.low_split,
            delta,
            calibration_trials: trials,
        }
    }
}

#[derive(Serialize)]
struct CountReport {
    queries: u64,
    per_query_overhead_max: u64,
    declared_bound: u64,
    base_queries: u64,
    max_entry_error: f64,
    passed: bool,
}

/// Recomputes every stored entry of `h_sim` through `oracle` and accounts the queries.
fn count_entries(oracle: &ComposedOracle<(usize, usize), f64>, h_sim: &SparseSymmetricOperator) -> Result<CountReport, CliError> {
    let mut max_err = 0.0f64;
    let mut within = true;
    for (i, j, v) in h_sim.iter() {
        let got = oracle.query((i, j)).map_err(CliError::run)?;
        let err = (got - v).abs();
        max_err = max_err.max(err);
        within &= err <= 1e-9 * v.abs().max(1.0);
    }
    let r = oracle.report();
    Ok(CountReport {
        queries: r.queries,
        per_query_overhead_max: r.per_query_overhead_max,
        declared_bound: r.declared_bound,
        base_queries: r.base_queries,
        max_entry_error: max_err,
        passed: within && r.per_query_overhead_max <= r.declared_bound,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReduceConfig {
    #[serde(default)]
    operator: Option<PathBuf>,
    #[serde(default)]
    path: Option<PathBuf>,
    #[serde(default)]
    constraint: Option<PathBuf>,
    #[serde(default)]
    s: Option<usize>,
    #[serde(rename = "M", default)]
    m: Option<f64>,
    #[serde(default = "half")]
    eps: f64,
    #[serde(default = "half")]
    eps_enc: f64,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default = "yes")]
    certify: bool,
    #[serde(default = "yes")]
    count: bool,
}

impl Inputs for ReduceConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        [&self.operator, &self.path, &self.constraint].into_iter().flatten().cloned().collect()
    }
}

enum ReduceInput {
    Operator(SparseSymmetricOperator),
    Path(HamiltonianPath),
}

impl ReduceConfig {
    fn input(&self) -> Result<ReduceInput, CliError> {
        match (&self.operator, &self.path) {
            (Some(op), None) => Ok(ReduceInput::Operator(read_json::<OperatorFile>(op)?.to_op()?)),
            (None, Some(p)) => Ok(ReduceInput::Path(read_json::<PathFile>(p)?.to_path()?)),
            _ => Err(CliError::Usage("exactly one of `operator` and `path` is required".into())),
        }
    }
}

/// Largest induced 1-norm over the breakpoints; bounds the norm along the whole path.
fn path_norm_bound(p: &HamiltonianPath) -> Option<f64> {
    match p {
        HamiltonianPath::Piecewise(pw) => Some(pw.breakpoints().iter().map(|(_, op)| op.induced_one_norm()).fold(0.0, f64::max)),
        HamiltonianPath::Transformed(_) => None,
    }
}

fn norm_or(m: Option<f64>, fallback: Option<f64>) -> Result<f64, CliError> {
    m.or(fallback.map(|x| x.max(f64::MIN_POSITIVE)))
        .ok_or_else(|| CliError::Usage("`M` is required for transformed input paths".into()))
}

/// Emits a transformed path; pointwise reductions of paths carry no certificate.
fn reduce_path(p: HamiltonianPath, stage: Stage, params: ReductionParams, c: Option<InteractionConstraint>, out: &mut Bundle) -> Outcome {
    let descriptor = ReductionDescriptor { stage, params: params.clone(), constraint: c };
    let tp = HamiltonianPath::Transformed(TransformedPath { base: Box::new(p), descriptor });
    // Evaluating both endpoints surfaces structural violations before anything is written.
    let (lo, hi) = tp.domain();
    tp.eval(lo).map_err(CliError::run)?;
    tp.eval(hi).map_err(CliError::run)?;
    out.json("descriptor.json", &DescriptorFile::from_params(stage, &params))?;
    out.json("path.json", &PathFile::from_path(&tp))?;
    Ok(true)
}

fn reduce_i(cfg: ReduceConfig, _: &Shared, out: &mut Bundle) -> Outcome {
    let input = cfg.input()?;
    let given = cfg.constraint.as_deref().map(|p| read_json::<ConstraintFile>(p)?.to_constraint()).transpose()?;
    let (k, c) = match input {
        ReduceInput::Path(p) => {
            let c = match given {
                Some(c) => c,
                None => p.support_constraint().map_err(CliError::run)?,
            };
            let delta = cfg.delta.ok_or_else(|| CliError::Usage("reducing a path requires `delta`".into()))?;
            let s = cfg.s.unwrap_or(c.max_row_sparsity().max(1));
            let mut params = ReductionParams::stage_i(p.num_qubits(), s, norm_or(cfg.m, path_norm_bound(&p))?, delta);
            params.eps = cfg.eps;
            out.json("constraint.json", &ConstraintFile::from_constraint(&c))?;
            return reduce_path(p, Stage::I, params, Some(c), out);
        }
        ReduceInput::Operator(k) => {
            let c = given.unwrap_or_else(|| InteractionConstraint::from_support(&k));
            (k, c)
        }
    };
    let n = k.num_qubits();
    let s = cfg.s.unwrap_or(c.max_row_sparsity().max(1));
    let mut params = ReductionParams::stage_i(n, s, norm_or(cfg.m, Some(k.induced_one_norm()))?, cfg.delta.unwrap_or(1.0));
    params.eps = cfg.eps;
    let g = reduce_sparse_to_hypercube(&k, &c, &params).map_err(CliError::run)?.gadget();
    let (delta, cert) = match cfg.delta {
        Some(d) if cfg.certify => {
            let cert = verify_simulation(&k, &g.combined_at(d).map_err(CliError::run)?, &g.encoding, cfg.eps_enc, cfg.eps)
                .map_err(CliError::run)?;
            (d, Some(CertificateReport::new(&cert, Some(d), None)))
        }
        Some(d) => (d, None),
        None => {
            let cal = calibrate_delta(|d| Ok((k.clone(), g.combined_at(d)?)), (cfg.eps_enc, cfg.eps), &g.encoding, g.calibration_start())
                .map_err(CliError::run)?;
            (cal.delta, Some(CertificateReport::new(&cal.certificate, Some(cal.delta), Some(cal.trials))))
        }
    };
    let params = params.with_delta(delta);
    let h_sim = reduce_sparse_to_hypercube(&k, &c, &params).map_err(CliError::run)?.combined;
    let mut passed = true;
    out.json("descriptor.json", &DescriptorFile::from_params(Stage::I, &params))?;
    out.json("constraint.json", &ConstraintFile::from_constraint(&c))?;
    out.json("operator.json", &OperatorFile::from_op(&h_sim))?;
    out.json("encoding.json", &EncodingFile::from_isometry(h_sim.num_qubits(), &g.encoding)?)?;
    if let Some(cert) = cert {
        passed &= cert.passed;
        out.json("certificate.json", &cert)?;
    }
    if cfg.count {
        let kk = k.clone();
        let base = counting_wrap(move |(x, y): (usize, usize)| kk.get(x, y));
        let report = count_entries(&reduction_i_oracle(Arc::new(base), params, c), &h_sim)?;
        passed &= report.passed;
        out.json("count.json", &report)?;
    }
    Ok(passed)
}

fn reduce_ii(cfg: ReduceConfig, _: &Shared, out: &mut Bundle) -> Outcome {
    if cfg.constraint.is_some() || cfg.s.is_some() {
        return Err(CliError::Usage("`constraint` and `s` apply to reduce-i only".into()));
    }
    let k = match cfg.input()? {
        ReduceInput::Path(p) => {
            let delta = cfg.delta.ok_or_else(|| CliError::Usage("reducing a path requires `delta`".into()))?;
            let mut params = ReductionParams::stage_ii(p.num_qubits(), norm_or(cfg.m, path_norm_bound(&p))?, delta);
            params.eps = cfg.eps;
            return reduce_path(p, Stage::II, params, None, out);
        }
        ReduceInput::Operator(k) => k,
    };
    let n = k.num_qubits();
    let mut params = ReductionParams::stage_ii(n, norm_or(cfg.m, Some(k.induced_one_norm()))?, cfg.delta.unwrap_or(1.0));
    params.eps = cfg.eps;
    let build = |d: f64| reduce_hypercube_to_tfd(&k, &params.with_delta(d));
    let first = build(params.delta).map_err(CliError::run)?;
    let encoding = first.encoding.clone();
    let (delta, cert) = match cfg.delta {
        Some(d) if cfg.certify => {
            let cert = verify_simulation(&k, &first.combined().map_err(CliError::run)?, &encoding, cfg.eps_enc, cfg.eps)
                .map_err(CliError::run)?;
            (d, Some(CertificateReport::new(&cert, Some(d), None)))
        }
        Some(d) => (d, None),
        None => {
            let start = first.gadget().map_err(CliError::run)?.calibration_start();
            let cal = calibrate_delta(|d| Ok((k.clone(), build(d)?.combined()?)), (cfg.eps_enc, cfg.eps), &encoding, start)
                .map_err(CliError::run)?;
            (cal.delta, Some(CertificateReport::new(&cal.certificate, Some(cal.delta), Some(cal.trials))))
        }
    };
    let params = params.with_delta(delta);
    let reduced = build(delta).map_err(CliError::run)?;
    let h_sim = reduced.combined().map_err(CliError::run)?;
    let mut passed = true;
    out.json("descriptor.json", &DescriptorFile::from_params(Stage::II, &params))?;
    out.json("operator.json", &OperatorFile::from_op(&h_sim))?;
    out.json("tfd_x.json", &PauliFile::from_list(&reduced.x_part))?;
    out.json("tfd_d.json", &OperatorFile::from_diagonal(&reduced.d_part))?;
    out.json("encoding.json", &EncodingFile::from_isometry(h_sim.num_qubits(), &encoding)?)?;
    if let Some(cert) = cert {
        passed &= cert.passed;
        out.json("certificate.json", &cert)?;
    }
    if cfg.count {
        let kk = k.clone();
        let base = counting_wrap(move |(x, y): (usize, usize)| kk.get(x, y));
        let p = params.clone();
        let oracle = compose_reduction_oracle(Arc::new(base), n as u64 + 1, move |(i, j): (usize, usize), ask: &dyn Fn((usize, usize)) -> f64| {
            entry_ii(&p, i, j, &|x, y| ask((x, y)))
        });
        let report = count_entries(&oracle, &h_sim)?;
        passed &= report.passed;
        out.json("count.json", &report)?;
    }
    Ok(passed)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CertifyConfig {
    target: PathBuf,
    simulator: PathBuf,
    #[serde(default)]
    encoding: Option<PathBuf>,
    #[serde(default = "half")]
    eps_enc: f64,
    #[serde(default = "half")]
    eps: f64,
}

impl Inputs for CertifyConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        [Some(&self.target), Some(&self.simulator), self.encoding.as_ref()].into_iter().flatten().cloned().collect()
    }
}

fn certify(cfg: CertifyConfig, _: &Shared, out: &mut Bundle) -> Outcome {
    let h = read_json::<OperatorFile>(&cfg.target)?.to_op()?;
    let hs = read_json::<OperatorFile>(&cfg.simulator)?.to_op()?;
    let e = match &cfg.encoding {
        Some(p) => read_json::<EncodingFile>(p)?.to_isometry()?,
        None if h.dim() == hs.dim() => Isometry::from_basis_map(hs.dim(), &(0..h.dim()).collect::<Vec<_>>()).map_err(CliError::run)?,
        None => return Err(CliError::Usage("operators differ in size; an `encoding` is required".into())),
    };
    if e.physical_dim() != hs.dim() {
        return Err(CliError::Usage(format!("encoding targets dimension {}, simulator has {}", e.physical_dim(), hs.dim())));
    }
    let cert = verify_simulation(&h, &hs, &e, cfg.eps_enc, cfg.eps).map_err(CliError::run)?;
    out.json("certificate.json", &CertificateReport::new(&cert, None, None))?;
    Ok(cert.passed)
}

// ---------------------------------------------------------------------------
// clock assembly

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearizeConfig {
    assembly: PathBuf,
    #[serde(default = "samples_default")]
    samples: usize,
    #[serde(default)]
    tilt: bool,
}

impl Inputs for LinearizeConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.assembly.clone()]
    }
}

#[derive(Serialize)]
struct LinearizeReport {
    mode: &'static str,
    num_qubits: usize,
    domain: [f64; 2],
    samples: usize,
    max_relative_residual: f64,
    passed: bool,
}

fn linearize_cmd(cfg: LinearizeConfig, _: &Shared, out: &mut Bundle) -> Outcome {
    let a = read_json::<AssemblyFile>(&cfg.assembly)?.to_assembly()?;
    if cfg.samples < 2 {
        return Err(CliError::Usage("`samples` must be at least 2".into()));
    }
    let (mode, lo, hi): (_, f64, f64) = if cfg.tilt { ("tilt", -1.0 / a.eta, 1.0 / a.eta) } else { ("linear", 0.0, (a.ell() + 1) as f64) };
    let at = |t: f64| if cfg.tilt { tilt_extend(&a, t) } else { linearize(&a, t) };
    let path = PiecewiseLinearPath::new(vec![(lo, at(lo).map_err(CliError::run)?), (hi, at(hi).map_err(CliError::run)?)])
        .map_err(CliError::run)?;
    // The operator is affine in t, so the two-breakpoint path must reproduce every sample.
    let mut residual = 0.0f64;
    for k in 0..cfg.samples {
        let t = if k + 1 == cfg.samples { hi } else { lo + (hi - lo) * k as f64 / (cfg.samples - 1) as f64 };
        let exact = at(t).map_err(CliError::run)?;
        let diff = exact.sub(&path.eval(t).map_err(CliError::run)?).map_err(CliError::run)?;
        residual = residual.max(diff.max_abs() / exact.max_abs().max(1.0));
    }
    let passed = residual <= 1e-9;
    out.json("path.json", &PathFile::from_piecewise(&path))?;
    out.json(
        "linearize.json",
        &LinearizeReport { mode, num_qubits: a.num_qubits(), domain: [lo, hi], samples: cfg.samples, max_relative_residual: residual, passed },
    )?;
    Ok(passed)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AssembleConfig {
    #[serde(default)]
    assembly: Option<PathBuf>,
    /// Diagonal `D`; builds the ramp `D_i = (i/ℓ)·D` with `X_B = −ΣX`.
    #[serde(default)]
    diagonal: Option<PathBuf>,
    #[serde(default = "gen_ell")]
    ell: usize,
    #[serde(rename = "eps_L", default = "gen_eps_l")]
    eps_l: f64,
}

impl Inputs for AssembleConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        [&self.assembly, &self.diagonal].into_iter().flatten().cloned().collect()
    }
}

#[derive(Serialize)]
struct AssembleReport {
    num_system_qubits: usize,
    ell: usize,
    num_qubits: usize,
    delta_c: f64,
    eta: f64,
    u: usize,
    ground_index: usize,
    brute_force_ground_index: Option<usize>,
    product_distance: f64,
    start_tfi_representable: bool,
    final_diagonal: bool,
    passed: bool,
}

fn assemble(cfg: AssembleConfig, _: &Shared, out: &mut Bundle) -> Outcome {
    let a = match (&cfg.assembly, &cfg.diagonal) {
        (Some(p), None) => read_json::<AssemblyFile>(p)?.to_assembly()?,
        (None, Some(p)) => {
            let d = read_json::<OperatorFile>(p)?.to_diagonal()?;
            let ell = cfg.ell.max(1);
            let ds = (0..=cfg.ell).map(|i| d.scaled(i as f64 / ell as f64)).collect();
            LinearAssembly::with_defaults(ds, PauliTermList::uniform_x(d.num_qubits(), 1.0), cfg.eps_l).map_err(CliError::input)?
        }
        _ => return Err(CliError::Usage("exactly one of `assembly` and `diagonal` is required".into())),
    };
    let f = assemble_final(&a).map_err(CliError::run)?;
    let bps = f.path.breakpoints();
    let start_tfi = tfi_representable(&bps[0].1);
    let final_diag = bps[bps.len() - 1].1.is_diagonal();
    let brute = f.d_final.unique_argmin();
    let passed = start_tfi && final_diag && brute == Some(f.ground_index);
    out.json("assembly.json", &AssemblyFile::from_assembly(&a))?;
    out.json("path.json", &PathFile::from_piecewise(&f.path))?;
    out.json("h_tfi.json", &PauliFile::from_list(&f.h_tfi))?;
    out.json("d_final.json", &OperatorFile::from_diagonal(&f.d_final))?;
    out.json(
        "assemble.json",
        &AssembleReport {
            num_system_qubits: a.num_system_qubits(),
            ell: a.ell(),
            num_qubits: a.num_qubits(),
            delta_c: a.delta_c,
            eta: a.eta,
            u: f.u,
            ground_index: f.ground_index,
            brute_force_ground_index: brute,
            product_distance: f.product_distance,
            start_tfi_representable: start_tfi,
            final_diagonal: final_diag,
            passed,
        },
    )?;
    Ok(passed)
}

// ---------------------------------------------------------------------------
// spectra and dynamics

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GapscanConfig {
    path: PathBuf,
    #[serde(default = "samples_default")]
    samples: usize,
    #[serde(default)]
    min_gap: Option<f64>,
}

impl Inputs for GapscanConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.path.clone()]
    }
}

#[derive(Serialize)]
struct GapRow {
    t: f64,
    mu0: f64,
    gap: f64,
}

#[derive(Serialize)]
struct GapscanReport {
    samples: usize,
    min_gap: f64,
    t_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    required_min_gap: Option<f64>,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<Vec<GapRow>>,
}

fn gapscan(cfg: GapscanConfig, sh: &Shared, out: &mut Bundle) -> Outcome {
    let path = read_json::<PathFile>(&cfg.path)?.to_path()?;
    let scan = gap_scan(&path, cfg.samples).map_err(CliError::run)?;
    let passed = cfg.min_gap.is_none_or(|m| scan.min_gap >= m);
    let rows = match sh.format {
        Format::Csv => {
            let cells: Vec<Vec<Cell>> = scan.samples.iter().map(|s| vec![Cell::Real(s.t), Cell::Real(s.mu0), Cell::Real(s.gap)]).collect();
            out.csv("gapscan.csv", &["t", "mu0", "gap"], &cells);
            None
        }
        Format::Json => Some(scan.samples.iter().map(|s| GapRow { t: s.t, mu0: s.mu0, gap: s.gap }).collect()),
    };
    out.json(
        "gapscan.json",
        &GapscanReport { samples: cfg.samples, min_gap: scan.min_gap, t_min: scan.t_min, required_min_gap: cfg.min_gap, passed, rows },
    )?;
    Ok(passed)
}

#[derive(Deserialize, Clone, Copy, Debug)]
#[serde(rename_all = "kebab-case")]
enum StateSpec {
    /// Ground state of `H` at the start of the path.
    Ground,
    /// Uniform superposition.
    Plus,
    Basis(usize),
}

#[derive(Deserialize, Clone, Copy, Debug)]
#[serde(rename_all = "kebab-case")]
enum TargetSpec {
    /// Ground state of `H` at the end of the path.
    FinalGround,
    Basis(usize),
    None,
}

fn ground() -> StateSpec {
    StateSpec::Ground
}
fn final_ground() -> TargetSpec {
    TargetSpec::FinalGround
}
fn evolve_eps() -> f64 {
    0.05
}
fn evolve_steps() -> usize {
    1000
}

const MIN_CHUNK: usize = 10;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct EvolveConfig {
    path: PathBuf,
    /// Time multiplier; the adiabatic heuristic `10 M²/(δ³ε)` when omitted.
    #[serde(default)]
    T: Option<f64>,
    #[serde(default = "evolve_eps")]
    eps: f64,
    #[serde(default = "evolve_steps")]
    steps: usize,
    #[serde(default = "ground")]
    initial: StateSpec,
    #[serde(default = "final_ground")]
    target: TargetSpec,
    #[serde(default)]
    shots: usize,
    /// Diagnostic CSV stride in steps; 0 disables it unless `--format csv`, which then
    /// records every tenth of the run.
    #[serde(default)]
    stride: usize,
    #[serde(default = "samples_default")]
    samples: usize,
    #[serde(default)]
    min_fidelity: Option<f64>,
}

impl Inputs for EvolveConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.path.clone()]
    }
}

#[derive(Serialize)]
struct HistogramEntry {
    outcome: usize,
    count: usize,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct EvolveReport {
    dim: usize,
    domain: [f64; 2],
    T: f64,
    T_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    norm_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_gap: Option<f64>,
    steps: usize,
    initial: String,
    target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity: Option<f64>,
    norm_drift: f64,
    shots: usize,
    histogram: Vec<HistogramEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    modal_outcome: Option<usize>,
    passed: bool,
}

/// `path` restricted to `[lo, hi]`; the generator is unchanged, so chunks compose exactly.
struct Window<'a> {
    path: &'a HamiltonianPath,
    lo: f64,
    hi: f64,
}

impl TimeDependent for Window<'_> {
    fn dim(&self) -> usize {
        TimeDependent::dim(self.path)
    }
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn generator(&self, t: f64) -> hampath::Result<Box<dyn LinearOperator + '_>> {
        self.path.generator(t)
    }
}

fn ground_vector(h: &SparseSymmetricOperator) -> Result<Vec<f64>, CliError> {
    Ok(lowest_eigenpairs(h, 1).map_err(CliError::run)?.vectors.swap_remove(0))
}

/// `(⟨ψ|H|ψ⟩, |⟨g|ψ⟩|²)` with `g` the ground state of `H`.
fn diagnostics(h: &SparseSymmetricOperator, psi: &[Complex64]) -> Result<(f64, f64), CliError> {
    let re: Vec<f64> = psi.iter().map(|z| z.re).collect();
    let im: Vec<f64> = psi.iter().map(|z| z.im).collect();
    let csr = h.to_csr();
    let mut y = vec![0.0; re.len()];
    let mut energy = 0.0;
    for part in [&re, &im] {
        csr.apply(part, &mut y);
        energy += part.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
    }
    let g = ground_vector(h)?;
    let dot = |v: &[f64]| g.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    Ok((energy, dot(&re).powi(2) + dot(&im).powi(2)))
}

fn histogram(psi: &[Complex64], shots: usize, seed: u64) -> Result<(Vec<HistogramEntry>, Option<usize>), CliError> {
    if shots == 0 {
        return Ok((vec![], None));
    }
    let hist: BTreeMap<usize, usize> = measure(psi, shots, seed).map_err(CliError::run)?;
    // Ties resolve to the smallest outcome.
    let modal = hist.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&k, _)| k);
    Ok((hist.into_iter().map(|(outcome, count)| HistogramEntry { outcome, count }).collect(), modal))
}

fn evolve_cmd(cfg: EvolveConfig, sh: &Shared, out: &mut Bundle) -> Outcome {
    let path = read_json::<PathFile>(&cfg.path)?.to_path()?;
    let seed = if cfg.shots > 0 { Some(sh.require_seed("evolve with shots")?) } else { None };
    if cfg.steps == 0 {
        return Err(CliError::Usage("`steps` must be positive".into()));
    }
    if cfg.min_fidelity.is_some() && matches!(cfg.target, TargetSpec::None) {
        return Err(CliError::Usage("`min_fidelity` needs a `target`".into()));
    }
    let dim = TimeDependent::dim(&path);
    let (lo, hi) = path.domain();
    let (t_mult, source, norm_bound, min_gap) = match cfg.T {
        Some(t) => (t, "config", None, None),
        None => {
            let scan = gap_scan(&path, cfg.samples).map_err(CliError::run)?;
            let mut m = 0.0f64;
            for s in &scan.samples {
                m = m.max(path.eval(s.t).map_err(CliError::run)?.induced_one_norm());
            }
            (required_time(m, scan.min_gap, cfg.eps), "heuristic", Some(m), Some(scan.min_gap))
        }
    };
    let initial = match cfg.initial {
        StateSpec::Ground => to_complex(&ground_vector(&path.eval(lo).map_err(CliError::run)?)?),
        StateSpec::Plus => to_complex(&vec![(1.0 / dim as f64).sqrt(); dim]),
        StateSpec::Basis(k) if k < dim => basis_state(dim, k),
        StateSpec::Basis(k) => return Err(CliError::Usage(format!("basis state {k} outside dimension {dim}"))),
    };
    // Each chunk is a separate integration, which needs at least MIN_CHUNK steps.
    let stride = match (cfg.stride, sh.format) {
        (0, Format::Csv) if cfg.steps.is_multiple_of(10) && cfg.steps / 10 >= MIN_CHUNK => cfg.steps / 10,
        (0, Format::Csv) => cfg.steps,
        (s, _) => s,
    };
    if stride > 0 && (stride < MIN_CHUNK || !cfg.steps.is_multiple_of(stride)) {
        return Err(CliError::Usage(format!("`stride` must divide `steps` and be at least {MIN_CHUNK}")));
    }
    let step_t = |k: usize| if k == cfg.steps { hi } else { lo + (hi - lo) * k as f64 / cfg.steps as f64 };
    let mut state = initial;
    let mut drift = 0.0f64;
    let mut rows = Vec::new();
    if stride == 0 {
        let r = evolve(&EvolutionSpec { path: &path, total_time: t_mult, steps: cfg.steps, initial: state }).map_err(CliError::run)?;
        state = r.state;
        drift = r.norm_drift;
    } else {
        let record = |k: usize, psi: &[Complex64], rows: &mut Vec<Vec<Cell>>| -> Result<(), CliError> {
            let t = step_t(k);
            let (e, ov) = diagnostics(&path.eval(t).map_err(CliError::run)?, psi)?;
            rows.push(vec![Cell::Int(k as u64), Cell::Real(t), Cell::Real(e), Cell::Real(ov)]);
            Ok(())
        };
        record(0, &state, &mut rows)?;
        let mut k = 0;
        while k < cfg.steps {
            let next = k + stride;
            let w = Window { path: &path, lo: step_t(k), hi: step_t(next) };
            let r = evolve(&EvolutionSpec { path: &w, total_time: t_mult, steps: next - k, initial: state }).map_err(CliError::run)?;
            state = r.state;
            drift = drift.max(r.norm_drift);
            k = next;
            record(k, &state, &mut rows)?;
        }
        out.csv("evolution.csv", &["step", "t", "energy", "overlap"], &rows);
    }
    let (target_name, target) = match cfg.target {
        TargetSpec::FinalGround => ("final-ground".to_string(), Some(to_complex(&ground_vector(&path.eval(hi).map_err(CliError::run)?)?))),
        TargetSpec::Basis(k) if k < dim => (format!("basis:{k}"), Some(basis_state(dim, k))),
        TargetSpec::Basis(k) => return Err(CliError::Usage(format!("basis state {k} outside dimension {dim}"))),
        TargetSpec::None => ("none".to_string(), None),
    };
    let fid = target.map(|t| fidelity(&state, &t)).transpose().map_err(CliError::run)?;
    let (hist, modal) = histogram(&state, cfg.shots, seed.unwrap_or(0))?;
    let passed = match (cfg.min_fidelity, fid) {
        (Some(m), Some(f)) => f >= m,
        _ => true,
    };
    let initial_name = match cfg.initial {
        StateSpec::Ground => "ground".to_string(),
        StateSpec::Plus => "plus".to_string(),
        StateSpec::Basis(k) => format!("basis:{k}"),
    };
    out.json(
        "evolution.json",
        &EvolveReport {
            dim,
            domain: [lo, hi],
            T: t_mult,
            T_source: source,
            norm_bound,
            min_gap,
            steps: cfg.steps,
            initial: initial_name,
            target: target_name,
            fidelity: fid,
            norm_drift: drift,
            shots: cfg.shots,
            histogram: hist,
            modal_outcome: modal,
            passed,
        },
    )?;
    Ok(passed)
}

// ---------------------------------------------------------------------------
// continuous embedding

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    m: usize,
}

fn qhd_grid() -> GridSpec {
    GridSpec { m: 64 }
}
fn tosdg_grid() -> GridSpec {
    GridSpec { m: 256 }
}
fn lambda_max_default() -> f64 {
    8.0
}
fn qhd_steps() -> usize {
    200
}

fn read_instance(p: &Path) -> Result<(InstanceFile, DiagonalOperator), CliError> {
    let inst = read_json::<InstanceFile>(p)?;
    let d = inst.H_prob.to_diagonal()?;
    if inst.a.len() != d.num_qubits() {
        return Err(CliError::Usage(format!("`a` has {} entries for {} qubits", inst.a.len(), d.num_qubits())));
    }
    Ok((inst, d))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct QhdConfig {
    instance: PathBuf,
    #[serde(default = "qhd_grid")]
    grid: GridSpec,
    #[serde(default = "lambda_max_default")]
    lambda_max: f64,
    T: f64,
    #[serde(default = "qhd_steps")]
    steps: usize,
    #[serde(default)]
    shots: usize,
    #[serde(default)]
    min_success: Option<f64>,
}

impl Inputs for QhdConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.instance.clone()]
    }
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct QhdReport {
    n: usize,
    m: usize,
    dim: usize,
    lambda0: f64,
    lambda_max: f64,
    domain: [f64; 2],
    T: f64,
    steps: usize,
    norm_drift: f64,
    orthant_probability: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    argmin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    success_probability: Option<f64>,
    shots: usize,
    orthant_histogram: Vec<HistogramEntry>,
    passed: bool,
}

fn qhd(cfg: QhdConfig, sh: &Shared, out: &mut Bundle) -> Outcome {
    let (inst, d) = read_instance(&cfg.instance)?;
    let seed = if cfg.shots > 0 { Some(sh.require_seed("qhd with shots")?) } else { None };
    let grid = Grid1D::new(cfg.grid.m).map_err(CliError::input)?;
    let params = ScheduleParams::new(inst.lambda0, inst.a.clone(), grid, inst.w, None).map_err(CliError::input)?;
    let path = qhd_path(&d, &params, cfg.lambda_max).map_err(CliError::input)?;
    let (lo, hi) = path.domain();
    let start = path.operator_at(lo).map_err(CliError::run)?;
    let init = to_complex(&start.lowest(1).map_err(CliError::run)?.vectors[0]);
    let r = evolve(&EvolutionSpec { path: &path, total_time: cfg.T, steps: cfg.steps, initial: init }).map_err(CliError::run)?;
    let n = params.num_axes();
    let orthant = |i: usize| {
        let xi: Vec<f64> = (0..n).map(|a| grid.node(start.coordinate(i, a))).collect();
        theta_index(&xi)
    };
    let mut prob = vec![0.0; 1 << n];
    for (i, z) in r.state.iter().enumerate() {
        prob[orthant(i)] += z.norm_sqr();
    }
    let mut counts = vec![0usize; 1 << n];
    if let Some(seed) = seed {
        for (i, c) in measure(&r.state, cfg.shots, seed).map_err(CliError::run)? {
            counts[orthant(i)] += c;
        }
    }
    let argmin = d.unique_argmin();
    let success = argmin.map(|u| prob[u]);
    let passed = match (cfg.min_success, success) {
        (Some(m), Some(s)) => s >= m,
        (Some(_), None) => false,
        _ => true,
    };
    out.json(
        "qhd.json",
        &QhdReport {
            n,
            m: cfg.grid.m,
            dim: r.state.len(),
            lambda0: inst.lambda0,
            lambda_max: cfg.lambda_max,
            domain: [lo, hi],
            T: cfg.T,
            steps: cfg.steps,
            norm_drift: r.norm_drift,
            orthant_probability: prob,
            argmin,
            success_probability: success,
            shots: cfg.shots,
            orthant_histogram: counts.into_iter().enumerate().filter(|c| c.1 > 0).map(|(outcome, count)| HistogramEntry { outcome, count }).collect(),
            passed,
        },
    )?;
    Ok(passed)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TosdgConfig {
    instance: PathBuf,
    lambda: f64,
    #[serde(default = "tosdg_grid")]
    grid: GridSpec,
}

impl Inputs for TosdgConfig {
    fn inputs(&self) -> Vec<PathBuf> {
        vec![self.instance.clone()]
    }
}

#[derive(Serialize)]
struct TosdgOut {
    lambda: f64,
    m: usize,
    big_lambda: Vec<f64>,
    mu0_hat: f64,
    mu1_hat: f64,
    gap_hat: f64,
    mu0_qubit: f64,
    mu1_qubit: f64,
    shift: f64,
    energy_offset: f64,
    eps_hat: f64,
    gap_bound: f64,
    overlap: f64,
    deficit: f64,
    passed: bool,
}

fn tosdg(cfg: TosdgConfig, _: &Shared, out: &mut Bundle) -> Outcome {
    let (inst, d) = read_instance(&cfg.instance)?;
    let grid = Grid1D::new(cfg.grid.m).map_err(CliError::input)?;
    let grids = vec![grid; d.num_qubits()];
    let r = verify_tosdg(&inst.a, &d, cfg.lambda, &grids, inst.w).map_err(CliError::run)?;
    out.json(
        "tosdg.json",
        &TosdgOut {
            lambda: r.lambda,
            m: cfg.grid.m,
            big_lambda: r.big_lambda,
            mu0_hat: r.mu0_hat,
            mu1_hat: r.mu1_hat,
            gap_hat: r.gap_hat,
            mu0_qubit: r.mu0_qubit,
            mu1_qubit: r.mu1_qubit,
            shift: r.shift,
            energy_offset: r.energy_offset,
            eps_hat: r.eps_hat,
            gap_bound: r.gap_bound,
            overlap: r.overlap,
            deficit: r.deficit,
            passed: r.passed,
        },
    )?;
    Ok(r.passed)
}
