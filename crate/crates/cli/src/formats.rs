//! On-disk JSON formats and their conversions to library types.

use std::path::Path;

use hampath::clock::LinearAssembly;
use hampath::operator::{Axis, DiagonalOperator, PauliTerm, PauliTermList, SparseSymmetricOperator};
use hampath::path::{HamiltonianPath, InteractionConstraint, PiecewiseLinearPath, ReductionDescriptor, TransformedPath};
use hampath::reductions::{ReductionParams, Stage};
use hampath::spectral::Isometry;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{"n", "entries": [[i, j, v], …]}`, upper triangle, nonzero values only.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl OperatorFile {
    pub fn from_op(op: &SparseSymmetricOperator) -> Self {
        Self { n: op.num_qubits(), entries: op.iter().filter(|e| e.2 != 0.0).collect() }
    }

    pub fn from_diagonal(d: &DiagonalOperator) -> Self {
        Self::from_op(&d.to_sparse())
    }

    pub fn to_op(&self) -> Result<SparseSymmetricOperator, CliError> {
        if let Some(&(i, j, _)) = self.entries.iter().find(|e| e.0 > e.1) {
            return Err(CliError::Usage(format!("operator entry ({i}, {j}) lies below the diagonal")));
        }
        SparseSymmetricOperator::from_triples(self.n, self.entries.iter().copied()).map_err(CliError::input)
    }

    pub fn to_diagonal(&self) -> Result<DiagonalOperator, CliError> {
        DiagonalOperator::from_sparse(&self.to_op()?).map_err(CliError::input)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum AxisName {
    X,
    Z,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliTermFile {
    pub coeff: f64,
    pub factors: Vec<(usize, AxisName)>,
}

/// `{"n", "terms": [{"coeff", "factors": [[q, "X"|"Z"], …]}, …]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliFile {
    pub n: usize,
    pub terms: Vec<PauliTermFile>,
}

impl PauliFile {
    pub fn from_list(p: &PauliTermList) -> Self {
        let terms = p
            .terms
            .iter()
            .map(|t| PauliTermFile {
                coeff: t.coeff,
                factors: t
                    .factors
                    .iter()
                    .map(|&(q, a)| (q, if a == Axis::X { AxisName::X } else { AxisName::Z }))
                    .collect(),
            })
            .collect();
        Self { n: p.num_qubits, terms }
    }

    pub fn to_list(&self) -> Result<PauliTermList, CliError> {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                coeff: t.coeff,
                factors: t
                    .factors
                    .iter()
                    .map(|&(q, a)| (q, if matches!(a, AxisName::X) { Axis::X } else { Axis::Z }))
                    .collect(),
            })
            .collect();
        let list = PauliTermList { num_qubits: self.n, terms };
        list.validate().map_err(CliError::input)?;
        Ok(list)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageName {
    I,
    II,
}

/// `{"stage", "n", "s", "M", "eps", "delta"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescriptorFile {
    pub stage: StageName,
    pub n: usize,
    pub s: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub eps: f64,
    pub delta: f64,
}

impl DescriptorFile {
    pub fn from_params(stage: Stage, p: &ReductionParams) -> Self {
        let stage = if stage == Stage::I { StageName::I } else { StageName::II };
        Self { stage, n: p.n, s: p.s, m: p.m_norm, eps: p.eps, delta: p.delta }
    }

    pub fn stage(&self) -> Stage {
        if self.stage == StageName::I {
            Stage::I
        } else {
            Stage::II
        }
    }

    pub fn params(&self) -> ReductionParams {
        ReductionParams { n: self.n, s: self.s, m_norm: self.m, eps: self.eps, delta: self.delta, far_scale: None }
    }
}

/// `{"n", "edges": [[x, y], …]}` with `x < y`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl ConstraintFile {
    pub fn from_constraint(c: &InteractionConstraint) -> Self {
        Self { n: c.num_qubits(), edges: c.edges().collect() }
    }

    pub fn to_constraint(&self) -> Result<InteractionConstraint, CliError> {
        InteractionConstraint::new(self.n, self.edges.iter().copied()).map_err(CliError::input)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathFile {
    Piecewise {
        breakpoints: Vec<(f64, OperatorFile)>,
    },
    Transformed {
        descriptor: DescriptorFile,
        base: Box<PathFile>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constraint: Option<ConstraintFile>,
    },
}

impl PathFile {
    pub fn from_piecewise(p: &PiecewiseLinearPath) -> Self {
        Self::Piecewise { breakpoints: p.breakpoints().iter().map(|(t, op)| (*t, OperatorFile::from_op(op))).collect() }
    }

    pub fn from_path(p: &HamiltonianPath) -> Self {
        match p {
            HamiltonianPath::Piecewise(pw) => Self::from_piecewise(pw),
            HamiltonianPath::Transformed(t) => Self::Transformed {
                descriptor: DescriptorFile::from_params(t.descriptor.stage, &t.descriptor.params),
                base: Box::new(Self::from_path(&t.base)),
                constraint: t.descriptor.constraint.as_ref().map(ConstraintFile::from_constraint),
            },
        }
    }

    pub fn to_path(&self) -> Result<HamiltonianPath, CliError> {
        match self {
            Self::Piecewise { breakpoints } => {
                let bps = breakpoints.iter().map(|(t, op)| Ok((*t, op.to_op()?))).collect::<Result<Vec<_>, CliError>>()?;
                Ok(HamiltonianPath::Piecewise(PiecewiseLinearPath::new(bps).map_err(CliError::input)?))
            }
            Self::Transformed { descriptor, base, constraint } => {
                let constraint = constraint.as_ref().map(ConstraintFile::to_constraint).transpose()?;
                let descriptor = ReductionDescriptor { stage: descriptor.stage(), params: descriptor.params(), constraint };
                Ok(HamiltonianPath::Transformed(TransformedPath { base: Box::new(base.to_path()?), descriptor }))
            }
        }
    }
}

/// `{"physical_n", "map": [...]}`: encoded basis state per logical basis state.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingFile {
    pub physical_n: usize,
    pub map: Vec<usize>,
}

impl EncodingFile {
    pub fn from_isometry(physical_n: usize, e: &Isometry) -> Result<Self, CliError> {
        let map = e.basis_map().ok_or_else(|| CliError::Failed("encoding is not a basis map".into()))?;
        Ok(Self { physical_n, map })
    }

    pub fn to_isometry(&self) -> Result<Isometry, CliError> {
        if self.physical_n >= usize::BITS as usize {
            return Err(CliError::Usage(format!("physical_n = {} is too large", self.physical_n)));
        }
        Isometry::from_basis_map(1 << self.physical_n, &self.map).map_err(CliError::input)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ClockFile {
    pub ell: usize,
    pub eps_L: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_L: Option<f64>,
}

/// `{"D_list", "X_B", "delta_C", "clock": {ell, eps_L, delta_L}, "eta"}`; omitted scalars
/// take the library defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct AssemblyFile {
    pub D_list: Vec<OperatorFile>,
    pub X_B: PauliFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_C: Option<f64>,
    pub clock: ClockFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

impl AssemblyFile {
    pub fn from_assembly(a: &LinearAssembly) -> Self {
        Self {
            D_list: a.d_list.iter().map(OperatorFile::from_diagonal).collect(),
            X_B: PauliFile::from_list(&a.x_b),
            delta_C: Some(a.delta_c),
            clock: ClockFile { ell: a.clock.ell, eps_L: a.clock.eps_l, delta_L: Some(a.clock.delta_l) },
            eta: Some(a.eta),
        }
    }

    pub fn to_assembly(&self) -> Result<LinearAssembly, CliError> {
        let ds = self.D_list.iter().map(OperatorFile::to_diagonal).collect::<Result<Vec<_>, _>>()?;
        if ds.len() != self.clock.ell + 1 {
            return Err(CliError::Usage(format!("clock.ell = {} but D_list has {} entries", self.clock.ell, ds.len())));
        }
        let mut a = LinearAssembly::with_defaults(ds, self.X_B.to_list()?, self.clock.eps_L).map_err(CliError::input)?;
        if let Some(d) = self.delta_C {
            a.delta_c = d;
        }
        if let Some(d) = self.clock.delta_L {
            a.clock.delta_l = d;
        }
        if let Some(e) = self.eta {
            a.eta = e;
        }
        a.validate().map_err(CliError::input)?;
        Ok(a)
    }
}

/// `{"H_prob", "a", "lambda0", "w"}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct InstanceFile {
    pub H_prob: OperatorFile,
    pub a: Vec<f64>,
    pub lambda0: f64,
    #[serde(default = "default_w")]
    pub w: f64,
}

fn default_w() -> f64 {
    hampath::continuous::DEFAULT_W
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
