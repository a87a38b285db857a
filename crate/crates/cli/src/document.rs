//! The `steerkit/1` task document.
//!
//! ```json
//! {
//!   "schema": "steerkit/1",
//!   "states": {
//!     "rho": { "kind": "density", "dims": [2, 2],
//!              "matrix": [[[0,0],[0,0],[0,0],[0,0]], ...] },
//!     "sq":  { "kind": "tmsv", "r": 0.5 }
//!   },
//!   "observables": {
//!     "z": { "kind": "builtin", "name": "sigma_z" },
//!     "x": { "kind": "vectors", "vectors": [[[0.7071,0],[0.7071,0]], ...] }
//!   },
//!   "tasks": [
//!     { "kind": "steering-conditional", "state": "rho", "q": "z", "r": "x" }
//!   ]
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major arrays of rows.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use steerkit::cvgauss::GaussianState;
use steerkit::infotheory::BinningSpec;
use steerkit::qstate::{DensityOperator, ObservableBasis};
use steerkit::C64;
use thiserror::Error;

pub const SCHEMA: &str = "steerkit/1";

pub type Complex = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDocument {
    pub schema: String,
    #[serde(default)]
    pub states: BTreeMap<String, StateSpec>,
    #[serde(default)]
    pub observables: BTreeMap<String, ObservableSpec>,
    #[serde(default)]
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Density {
        dims: Vec<usize>,
        matrix: Vec<Vec<Complex>>,
    },
    Gaussian {
        #[serde(default)]
        mean: [f64; 4],
        cov: [[f64; 4]; 4],
    },
    Tmsv {
        r: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinBasis {
    SigmaX,
    SigmaY,
    SigmaZ,
    Computational,
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    Vectors {
        vectors: Vec<Vec<Complex>>,
    },
    Builtin {
        name: BuiltinBasis,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

/// State and observables for a bipartite evaluation. `q`, `r` are Bob's
/// observables and also Alice's unless `alice_q`, `alice_r` are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteTask {
    pub state: String,
    pub q: String,
    pub r: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_r: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BobSampling {
    Pure,
    Mixed,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AliceSampling {
    Deterministic,
    Simplex,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    VonNeumann {
        state: String,
    },
    MaassenUffink {
        state: String,
        q: String,
        r: String,
    },
    Berta {
        state: String,
        q: String,
        r: String,
    },
    SteeringConditional(BipartiteTask),
    SteeringSymmetric(BipartiteTask),
    /// Naive substitution of the state-dependent bound.
    DemoContradiction {
        #[serde(flatten)]
        setup: BipartiteTask,
        /// Overrides the partial-transpose separability evidence.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        separable: Option<bool>,
    },
    SteeringConditionalCv {
        state: String,
    },
    SteeringSymmetricCv {
        state: String,
    },
    SteeringSymmetricBinned {
        state: String,
        /// Bins per quadrature when `spec_x`/`spec_k` are absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bins: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        span_sigmas: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spec_x: Option<BinningSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spec_k: Option<BinningSpec>,
    },
    /// Random LHS search; bases default to computational/Fourier of `dim`.
    LhsSearch {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<String>,
        trials: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambdas: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bob_states: Option<BobSampling>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alice: Option<AliceSampling>,
    },
    SaturatingEnsemble {
        q: String,
        r: String,
    },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::VonNeumann { .. } => "von-neumann",
            Task::MaassenUffink { .. } => "maassen-uffink",
            Task::Berta { .. } => "berta",
            Task::SteeringConditional(_) => "steering-conditional",
            Task::SteeringSymmetric(_) => "steering-symmetric",
            Task::DemoContradiction { .. } => "demo-contradiction",
            Task::SteeringConditionalCv { .. } => "steering-conditional-cv",
            Task::SteeringSymmetricCv { .. } => "steering-symmetric-cv",
            Task::SteeringSymmetricBinned { .. } => "steering-symmetric-binned",
            Task::LhsSearch { .. } => "lhs-search",
            Task::SaturatingEnsemble { .. } => "saturating-ensemble",
        }
    }

    /// Referenced state, if any, and whether it must be a density operator.
    fn state_ref(&self) -> Option<(&str, StateKind)> {
        match self {
            Task::VonNeumann { state }
            | Task::MaassenUffink { state, .. }
            | Task::Berta { state, .. } => Some((state, StateKind::Density)),
            Task::SteeringConditional(b) | Task::SteeringSymmetric(b) => {
                Some((&b.state, StateKind::Density))
            }
            Task::DemoContradiction { setup, .. } => Some((&setup.state, StateKind::Density)),
            Task::SteeringConditionalCv { state }
            | Task::SteeringSymmetricCv { state }
            | Task::SteeringSymmetricBinned { state, .. } => Some((state, StateKind::Gaussian)),
            Task::LhsSearch { .. } | Task::SaturatingEnsemble { .. } => None,
        }
    }

    /// (field name, observable name) pairs referenced by the task.
    fn observable_refs(&self) -> Vec<(&'static str, &str)> {
        match self {
            Task::MaassenUffink { q, r, .. }
            | Task::Berta { q, r, .. }
            | Task::SaturatingEnsemble { q, r } => vec![("q", q), ("r", r)],
            Task::SteeringConditional(b) | Task::SteeringSymmetric(b) => bipartite_refs(b),
            Task::DemoContradiction { setup, .. } => bipartite_refs(setup),
            Task::LhsSearch { q, r, .. } => {
                let mut v = Vec::new();
                if let Some(q) = q {
                    v.push(("q", q.as_str()));
                }
                if let Some(r) = r {
                    v.push(("r", r.as_str()));
                }
                v
            }
            _ => Vec::new(),
        }
    }
}

fn bipartite_refs(b: &BipartiteTask) -> Vec<(&'static str, &str)> {
    let mut v = vec![("q", b.q.as_str()), ("r", b.r.as_str())];
    if let Some(x) = &b.alice_q {
        v.push(("alice_q", x));
    }
    if let Some(x) = &b.alice_r {
        v.push(("alice_r", x));
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StateKind {
    Density,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedState {
    Density(DensityOperator),
    Gaussian(GaussianState),
}

/// A parsed document with every state and observable validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub raw: TaskDocument,
    pub states: BTreeMap<String, ResolvedState>,
    pub observables: BTreeMap<String, ObservableBasis>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("unknown schema {0:?} (expected {SCHEMA:?})")]
    UnknownSchema(String),

    #[error("unresolved reference at {path}: no {what} named {name:?}")]
    UnresolvedReference {
        path: String,
        what: &'static str,
        name: String,
    },

    #[error("invalid state at {path}: {message}")]
    InvalidState { path: String, message: String },

    #[error("invalid observable at {path}: {message}")]
    InvalidObservable { path: String, message: String },

    #[error("invalid task at {path}: {message}")]
    InvalidTask { path: String, message: String },
}

impl DocumentError {
    pub fn class(&self) -> &'static str {
        match self {
            DocumentError::Parse { .. } => "parse-error",
            DocumentError::UnknownSchema(_) => "unknown-schema",
            DocumentError::UnresolvedReference { .. } => "unresolved-reference",
            DocumentError::InvalidState { .. } => "invalid-state",
            DocumentError::InvalidObservable { .. } => "invalid-observable",
            DocumentError::InvalidTask { .. } => "invalid-task",
        }
    }
}

fn to_c64(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn matrix_from_rows(rows: &[Vec<Complex>]) -> Result<DMatrix<C64>, String> {
    let n = rows.len();
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(format!("row {i} has {} entries, expected {n}", r.len()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| to_c64(&rows[i][j])))
}

pub fn matrix_to_rows(m: &DMatrix<C64>) -> Vec<Vec<Complex>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn resolve_state(spec: &StateSpec) -> Result<ResolvedState, String> {
    match spec {
        StateSpec::Density { dims, matrix } => {
            let m = matrix_from_rows(matrix)?;
            DensityOperator::new(m, dims)
                .map(ResolvedState::Density)
                .map_err(|e| e.to_string())
        }
        StateSpec::Gaussian { mean, cov } => GaussianState::new(*mean, *cov)
            .map(ResolvedState::Gaussian)
            .map_err(|e| e.to_string()),
        StateSpec::Tmsv { r } => GaussianState::tmsv(*r)
            .map(ResolvedState::Gaussian)
            .map_err(|e| e.to_string()),
    }
}

fn resolve_observable(name: &str, spec: &ObservableSpec) -> Result<ObservableBasis, String> {
    let basis = match spec {
        ObservableSpec::Vectors { vectors } => {
            let vs = vectors
                .iter()
                .map(|v| DVector::from_iterator(v.len(), v.iter().map(to_c64)))
                .collect();
            ObservableBasis::new(name, vs).map_err(|e| e.to_string())?
        }
        ObservableSpec::Builtin { name: b, dim } => {
            let need_dim = || dim.ok_or_else(|| format!("builtin {b:?} needs \"dim\""));
            let fixed = |d: usize| match dim {
                Some(x) if *x != d => Err(format!("builtin {b:?} has dimension {d}, not {x}")),
                _ => Ok(()),
            };
            let check_range = |d: usize| {
                if (steerkit::qstate::MIN_DIM..=steerkit::qstate::MAX_DIM).contains(&d) {
                    Ok(d)
                } else {
                    Err(format!("dimension {d} outside 2..=64"))
                }
            };
            match b {
                BuiltinBasis::SigmaX => fixed(2).map(|_| ObservableBasis::sigma_x())?,
                BuiltinBasis::SigmaY => fixed(2).map(|_| ObservableBasis::sigma_y())?,
                BuiltinBasis::SigmaZ => fixed(2).map(|_| ObservableBasis::sigma_z())?,
                BuiltinBasis::Computational => {
                    ObservableBasis::computational(check_range(need_dim()?)?)
                }
                BuiltinBasis::Fourier => ObservableBasis::fourier(check_range(need_dim()?)?),
            }
        }
    };
    Ok(basis.with_label(name))
}

/// Parses and fully resolves a document; reports the first error found.
pub fn parse_document(text: &str) -> Result<Document, DocumentError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: TaskDocument =
        serde_path_to_error::deserialize(de).map_err(|e| DocumentError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    resolve(raw)
}

/// Validates an in-memory document.
pub fn resolve(raw: TaskDocument) -> Result<Document, DocumentError> {
    if raw.schema != SCHEMA {
        return Err(DocumentError::UnknownSchema(raw.schema));
    }
    let mut states = BTreeMap::new();
    for (name, spec) in &raw.states {
        let s = resolve_state(spec).map_err(|message| DocumentError::InvalidState {
            path: format!("states.{name}"),
            message,
        })?;
        states.insert(name.clone(), s);
    }
    let mut observables = BTreeMap::new();
    for (name, spec) in &raw.observables {
        let b =
            resolve_observable(name, spec).map_err(|message| DocumentError::InvalidObservable {
                path: format!("observables.{name}"),
                message,
            })?;
        observables.insert(name.clone(), b);
    }
    for (i, task) in raw.tasks.iter().enumerate() {
        if let Some((name, kind)) = task.state_ref() {
            let path = format!("tasks[{i}].state");
            match (states.get(name), kind) {
                (None, _) => {
                    return Err(DocumentError::UnresolvedReference {
                        path,
                        what: "state",
                        name: name.to_string(),
                    })
                }
                (Some(ResolvedState::Gaussian(_)), StateKind::Density) => {
                    return Err(DocumentError::InvalidTask {
                        path,
                        message: format!(
                            "{} needs a density state, {name:?} is Gaussian",
                            task.kind()
                        ),
                    })
                }
                (Some(ResolvedState::Density(_)), StateKind::Gaussian) => {
                    return Err(DocumentError::InvalidTask {
                        path,
                        message: format!(
                            "{} needs a Gaussian state, {name:?} is a density operator",
                            task.kind()
                        ),
                    })
                }
                _ => {}
            }
        }
        for (field, name) in task.observable_refs() {
            if !observables.contains_key(name) {
                return Err(DocumentError::UnresolvedReference {
                    path: format!("tasks[{i}].{field}"),
                    what: "observable",
                    name: name.to_string(),
                });
            }
        }
        if let Task::LhsSearch { dim, q, r, .. } = task {
            if dim.is_none() && (q.is_none() || r.is_none()) {
                return Err(DocumentError::InvalidTask {
                    path: format!("tasks[{i}]"),
                    message: "lhs-search needs either \"dim\" or both \"q\" and \"r\"".into(),
                });
            }
        }
    }
    Ok(Document {
        raw,
        states,
        observables,
    })
}
