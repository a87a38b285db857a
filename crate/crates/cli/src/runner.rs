//! Task execution and report assembly.

use serde::Serialize;
use serde_json::{json, Map, Value};
use steerkit::cvgauss::{
    steering_conditional_cv, steering_symmetric_binned_with, steering_symmetric_cv, QuadratureBins,
};
use steerkit::infotheory::{BinningSpec, DEFAULT_BIN_COUNT, DEFAULT_SPAN_SIGMAS};
use steerkit::lhs::{
    lhs_criterion_check, random_lhs_search, saturating_ensemble, steering_on_ensemble,
    AliceResponses, BobStates, LhsEnsemble, SearchConfig, DEFAULT_LAMBDAS, Q_LABEL, R_LABEL,
};
use steerkit::qstate::{DensityOperator, ObservableBasis};
use steerkit::witness::{
    berta_check, maassen_uffink_check, naive_substitution_demo, naive_substitution_with_evidence,
    steering_conditional_discrete, steering_symmetric_discrete, SteeringSetup, Verdict,
};
use steerkit::{Error, Execution};

use crate::document::{
    matrix_to_rows, AliceSampling, BipartiteTask, BobSampling, Document, ResolvedState, Task,
    SCHEMA,
};
use crate::format::round_numbers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorClass {
    InvalidInput,
    NumericalFailure,
}

impl ErrorClass {
    fn of(e: &Error) -> Self {
        if e.is_numerical() {
            ErrorClass::NumericalFailure
        } else {
            ErrorClass::InvalidInput
        }
    }
}

/// Outcome of one task, before number formatting.
#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub index: usize,
    pub kind: &'static str,
    pub result: Result<Value, (ErrorClass, String)>,
    /// One-line human summary.
    pub summary: String,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub seed: u64,
    pub outcomes: Vec<TaskOutcome>,
    pub document: Value,
}

impl RunReport {
    /// 0, or 3 if any task failed numerically, else 2 if any task was rejected.
    pub fn exit_code(&self) -> i32 {
        let classes: Vec<ErrorClass> = self
            .outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| e.0))
            .collect();
        if classes.contains(&ErrorClass::NumericalFailure) {
            3
        } else if classes.contains(&ErrorClass::InvalidInput) {
            2
        } else {
            0
        }
    }

    /// The JSON report, numbers rounded, with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.document).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            out.push_str(&format!("[{}] {}: {}\n", o.index, o.kind, o.summary));
        }
        let failed = self.outcomes.iter().filter(|o| o.result.is_err()).count();
        out.push_str(&format!(
            "{} task(s), {} failed, seed {}\n",
            self.outcomes.len(),
            failed,
            self.seed
        ));
        out
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn density<'a>(doc: &'a Document, name: &str) -> &'a DensityOperator {
    match &doc.states[name] {
        ResolvedState::Density(rho) => rho,
        ResolvedState::Gaussian(_) => unreachable!("checked when the document was resolved"),
    }
}

fn basis(doc: &Document, name: &str) -> ObservableBasis {
    doc.observables[name].clone()
}

fn setup(doc: &Document, b: &BipartiteTask) -> SteeringSetup {
    let q = basis(doc, &b.q);
    let r = basis(doc, &b.r);
    let qa = b
        .alice_q
        .as_deref()
        .map_or_else(|| q.clone(), |n| basis(doc, n));
    let ra = b
        .alice_r
        .as_deref()
        .map_or_else(|| r.clone(), |n| basis(doc, n));
    SteeringSetup::new(qa, ra, q, r)
}

fn verdict_word(v: Verdict) -> String {
    match to_value(&v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn ensemble_value(e: &LhsEnsemble) -> Value {
    json!({
        "weights": to_value(e.weights()),
        "bob_states": e.bob_states().iter().map(|s| to_value(&matrix_to_rows(s.matrix()))).collect::<Vec<_>>(),
        "alice_responses": to_value(&e.alice_responses()),
    })
}

fn run_task(
    doc: &Document,
    task: &Task,
    seed: u64,
    exec: Execution,
) -> steerkit::Result<(Value, String)> {
    let witness = |r: steerkit::witness::WitnessReport| {
        let line = format!(
            "lhs {:.6} {} bound {:.6}, margin {:.3e}: {}",
            r.lhs,
            to_value(&r.relation).as_str().unwrap_or("?"),
            r.bound,
            r.margin,
            verdict_word(r.verdict)
        );
        (to_value(&r), line)
    };
    match task {
        Task::VonNeumann { state } => {
            let s = density(doc, state).von_neumann_entropy();
            Ok((json!({ "entropy": s }), format!("S = {s:.6} bits")))
        }
        Task::MaassenUffink { state, q, r } => {
            maassen_uffink_check(density(doc, state), &basis(doc, q), &basis(doc, r)).map(witness)
        }
        Task::Berta { state, q, r } => {
            berta_check(density(doc, state), &basis(doc, q), &basis(doc, r)).map(witness)
        }
        Task::SteeringConditional(b) => {
            steering_conditional_discrete(density(doc, &b.state), &setup(doc, b)).map(witness)
        }
        Task::SteeringSymmetric(b) => {
            steering_symmetric_discrete(density(doc, &b.state), &setup(doc, b)).map(witness)
        }
        Task::DemoContradiction {
            setup: b,
            separable,
        } => {
            let rho = density(doc, &b.state);
            let s = setup(doc, b);
            let rep = match separable {
                Some(flag) => naive_substitution_with_evidence(rho, &s, Some(*flag))?,
                None => naive_substitution_demo(rho, &s)?,
            };
            let line = format!(
                "lhs {:.6} vs invalid bound {:.6}, contradiction {} (not a steering witness)",
                rep.report.lhs, rep.report.bound, rep.contradiction
            );
            Ok((to_value(&rep), line))
        }
        Task::SteeringConditionalCv { state } | Task::SteeringSymmetricCv { state } => {
            let g = match &doc.states[state] {
                ResolvedState::Gaussian(g) => g,
                ResolvedState::Density(_) => unreachable!("checked when the document was resolved"),
            };
            let r = if matches!(task, Task::SteeringConditionalCv { .. }) {
                steering_conditional_cv(g)?
            } else {
                steering_symmetric_cv(g)?
            };
            Ok(witness(r))
        }
        Task::SteeringSymmetricBinned {
            state,
            bins,
            span_sigmas,
            spec_x,
            spec_k,
        } => {
            let g = match &doc.states[state] {
                ResolvedState::Gaussian(g) => g,
                ResolvedState::Density(_) => unreachable!("checked when the document was resolved"),
            };
            let scaled = QuadratureBins::scaled(
                g,
                bins.unwrap_or(DEFAULT_BIN_COUNT),
                span_sigmas.unwrap_or(DEFAULT_SPAN_SIGMAS),
            )?;
            let pick = |given: &Option<BinningSpec>, a: BinningSpec, b: BinningSpec| match given {
                Some(s) => s.validate().map(|_| (*s, *s)),
                None => Ok((a, b)),
            };
            let (x_a, x_b) = pick(spec_x, scaled.x_a, scaled.x_b)?;
            let (k_a, k_b) = pick(spec_k, scaled.k_a, scaled.k_b)?;
            let q = QuadratureBins { x_a, x_b, k_a, k_b };
            let (mut v, line) = witness(steering_symmetric_binned_with(g, &q, exec)?);
            v["bins"] = to_value(&q);
            Ok((v, line))
        }
        Task::LhsSearch {
            dim,
            q,
            r,
            trials,
            seed: task_seed,
            lambdas,
            bob_states,
            alice,
        } => {
            let (qb, rb) = match (q, r) {
                (Some(q), Some(r)) => (basis(doc, q), basis(doc, r)),
                _ => {
                    let n = dim.expect("checked when the document was resolved");
                    if !(steerkit::qstate::MIN_DIM..=steerkit::qstate::MAX_DIM).contains(&n) {
                        return Err(Error::UnsupportedDimension(n));
                    }
                    (
                        ObservableBasis::computational(n).with_label(Q_LABEL),
                        ObservableBasis::fourier(n).with_label(R_LABEL),
                    )
                }
            };
            if let Some(n) = dim {
                if *n != qb.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: *n,
                        found: qb.dim(),
                    });
                }
            }
            let mut cfg =
                SearchConfig::new(qb.clone(), rb.clone(), *trials, task_seed.unwrap_or(seed));
            cfg.lambdas = lambdas.unwrap_or(DEFAULT_LAMBDAS);
            cfg.bob_states = match bob_states.unwrap_or(BobSampling::Both) {
                BobSampling::Pure => BobStates::Pure,
                BobSampling::Mixed => BobStates::Mixed,
                BobSampling::Both => BobStates::Both,
            };
            cfg.alice = match alice.unwrap_or(AliceSampling::Both) {
                AliceSampling::Deterministic => AliceResponses::Deterministic,
                AliceSampling::Simplex => AliceResponses::Simplex,
                AliceSampling::Both => AliceResponses::Both,
            };
            cfg.exec = exec;
            let rep = random_lhs_search(&cfg)?;
            let criterion = lhs_criterion_check(&rep.argmin_ensemble, Q_LABEL, R_LABEL, &qb, &rb)?;
            let margin = rep.min_margin();
            let verdict = Verdict::from_margin(margin);
            let line = format!(
                "{} trials, min steering sum {:.9} vs bound {:.6}, {} violation(s), min avg entropy {:.3e}",
                rep.trials, rep.min_steering_sum, rep.bound, rep.violations, rep.min_average_entropy
            );
            let v = json!({
                "seed": cfg.seed,
                "trials": rep.trials,
                "lambdas": rep.lambdas,
                "bound": rep.bound,
                "min_steering_sum": rep.min_steering_sum,
                "min_margin": margin,
                "verdict": to_value(&verdict),
                "argmin_trial": rep.argmin_trial,
                "min_average_entropy": rep.min_average_entropy,
                "argmin_entropy_trial": rep.argmin_entropy_trial,
                "violations": rep.violations,
                "argmin_ensemble": ensemble_value(&rep.argmin_ensemble),
                "argmin_criterion": to_value(&criterion),
            });
            Ok((v, line))
        }
        Task::SaturatingEnsemble { q, r } => {
            let (qb, rb) = (basis(doc, q), basis(doc, r));
            let e = saturating_ensemble(&qb)?;
            let w = steering_on_ensemble(&e, Q_LABEL, R_LABEL, &qb, &rb)?;
            let criterion = lhs_criterion_check(&e, Q_LABEL, R_LABEL, &qb, &rb)?;
            let (mut v, line) = witness(w);
            v["ensemble"] = ensemble_value(&e);
            v["criterion"] = to_value(&criterion);
            Ok((v, line))
        }
    }
}

/// Runs every task in order. `seed` is used by tasks that sample and do not
/// carry their own.
pub fn run(doc: &Document, seed: u64) -> RunReport {
    run_with(doc, seed, Execution::default())
}

pub fn run_with(doc: &Document, seed: u64, exec: Execution) -> RunReport {
    let mut outcomes = Vec::with_capacity(doc.raw.tasks.len());
    let mut records = Vec::with_capacity(doc.raw.tasks.len());
    for (index, task) in doc.raw.tasks.iter().enumerate() {
        let kind = task.kind();
        let mut record = Map::new();
        record.insert("index".into(), json!(index));
        record.insert("kind".into(), json!(kind));
        record.insert("task".into(), to_value(task));
        let outcome = match run_task(doc, task, seed, exec) {
            Ok((value, summary)) => {
                record.insert("status".into(), json!("ok"));
                record.insert("result".into(), value.clone());
                TaskOutcome {
                    index,
                    kind,
                    result: Ok(value),
                    summary,
                }
            }
            Err(e) => {
                let class = ErrorClass::of(&e);
                let message = e.to_string();
                record.insert("status".into(), json!("error"));
                record.insert(
                    "error".into(),
                    json!({ "class": class, "message": message }),
                );
                TaskOutcome {
                    index,
                    kind,
                    summary: format!(
                        "error ({}): {message}",
                        to_value(&class).as_str().unwrap_or("?")
                    ),
                    result: Err((class, message)),
                }
            }
        };
        records.push(Value::Object(record));
        outcomes.push(outcome);
    }
    let mut document = json!({
        "schema": SCHEMA,
        "seed": seed,
        "reports": records,
    });
    round_numbers(&mut document);
    RunReport {
        seed,
        outcomes,
        document,
    }
}
