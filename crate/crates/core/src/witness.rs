//! Entropic uncertainty relations and the steering inequalities built on them.
//!
//! Every evaluator returns a [`WitnessReport`] whose `components` hold each
//! entropy term and overlap constant, so `lhs` and `bound` can be recomputed
//! from the report alone.
//!
//! The state-dependent bound log₂ Ω + S(ρ^B) is *not* a valid steering bound.
//! It is only reachable through [`naive_substitution_demo`], whose report
//! carries [`NOT_A_STEERING_WITNESS`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::infotheory::{shannon_entropy, JointDistribution, Party};
use crate::qstate::{joint_distribution, marginal_distribution, DensityOperator, ObservableBasis};
use crate::{Error, Result};

/// |margin| at or below this reports [`Verdict::Saturated`].
pub const TOL_VERDICT: f64 = 1e-9;

/// Marker attached to every naive-substitution report.
pub const NOT_A_STEERING_WITNESS: &str =
    "not a steering witness: violating log2(Omega_B) + S(rho_B) certifies nothing";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Saturated,
    Violated,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Self {
        if margin < -TOL_VERDICT {
            Verdict::Violated
        } else if margin <= TOL_VERDICT {
            Verdict::Saturated
        } else {
            Verdict::Satisfied
        }
    }
}

/// Direction of the inequality `lhs ⋚ bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub inequality: &'static str,
    pub relation: Relation,
    pub lhs: f64,
    pub bound: f64,
    /// lhs − bound for `>=`, bound − lhs for `<=`; negative means violated.
    pub margin: f64,
    pub verdict: Verdict,
    pub components: BTreeMap<String, f64>,
}

impl WitnessReport {
    pub fn new(
        inequality: &'static str,
        relation: Relation,
        lhs: f64,
        bound: f64,
        components: BTreeMap<String, f64>,
    ) -> Self {
        let margin = match relation {
            Relation::AtLeast => lhs - bound,
            Relation::AtMost => bound - lhs,
        };
        Self {
            inequality,
            relation,
            lhs,
            bound,
            margin,
            verdict: Verdict::from_margin(margin),
            components,
        }
    }

    pub fn component(&self, name: &str) -> f64 {
        self.components[name]
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

fn components<const K: usize>(items: [(&str, f64); K]) -> BTreeMap<String, f64> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Ω = 1 / max_ij |⟨q_i|r_j⟩|².
pub fn overlap_omega(q: &ObservableBasis, r: &ObservableBasis) -> Result<f64> {
    if q.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: r.dim(),
        });
    }
    let max = q
        .vectors()
        .iter()
        .flat_map(|a| r.vectors().iter().map(move |b| a.dotc(b).norm_sqr()))
        .fold(0.0f64, f64::max);
    // 1 ≤ Ω ≤ N up to rounding in the overlaps
    Ok((1.0 / max).clamp(1.0, q.dim() as f64))
}

fn single_system_entropies(
    rho: &DensityOperator,
    q: &ObservableBasis,
    r: &ObservableBasis,
) -> Result<(f64, f64, f64)> {
    let omega = overlap_omega(q, r)?;
    let hq = shannon_entropy(&marginal_distribution(rho, q)?);
    let hr = shannon_entropy(&marginal_distribution(rho, r)?);
    Ok((hq, hr, omega))
}

/// H(Q) + H(R) ≥ log₂ Ω.
pub fn maassen_uffink_check(
    rho: &DensityOperator,
    q: &ObservableBasis,
    r: &ObservableBasis,
) -> Result<WitnessReport> {
    let (hq, hr, omega) = single_system_entropies(rho, q, r)?;
    let log_omega = omega.log2();
    Ok(WitnessReport::new(
        "maassen-uffink",
        Relation::AtLeast,
        hq + hr,
        log_omega,
        components([
            ("H(Q)", hq),
            ("H(R)", hr),
            ("Omega", omega),
            ("log2(Omega)", log_omega),
        ]),
    ))
}

/// H(Q) + H(R) ≥ log₂ Ω + S(ρ).
pub fn berta_check(
    rho: &DensityOperator,
    q: &ObservableBasis,
    r: &ObservableBasis,
) -> Result<WitnessReport> {
    let (hq, hr, omega) = single_system_entropies(rho, q, r)?;
    let log_omega = omega.log2();
    let s = rho.von_neumann_entropy();
    Ok(WitnessReport::new(
        "berta",
        Relation::AtLeast,
        hq + hr,
        log_omega + s,
        components([
            ("H(Q)", hq),
            ("H(R)", hr),
            ("Omega", omega),
            ("log2(Omega)", log_omega),
            ("S(rho)", s),
        ]),
    ))
}

/// The two complementary observables measured by one party.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPair {
    pub q: ObservableBasis,
    pub r: ObservableBasis,
}

/// Observables measured by Alice and Bob.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringSetup {
    pub alice: MeasurementPair,
    pub bob: MeasurementPair,
}

impl SteeringSetup {
    pub fn new(
        q_a: ObservableBasis,
        r_a: ObservableBasis,
        q_b: ObservableBasis,
        r_b: ObservableBasis,
    ) -> Self {
        Self {
            alice: MeasurementPair { q: q_a, r: r_a },
            bob: MeasurementPair { q: q_b, r: r_b },
        }
    }

    /// Both parties measure the same pair.
    pub fn symmetric(q: ObservableBasis, r: ObservableBasis) -> Self {
        Self::new(q.clone(), r.clone(), q, r)
    }

    /// (Q table, R table) of a bipartite state.
    pub fn tables(&self, rho: &DensityOperator) -> Result<(JointDistribution, JointDistribution)> {
        Ok((
            joint_distribution(rho, &self.alice.q, &self.bob.q)?,
            joint_distribution(rho, &self.alice.r, &self.bob.r)?,
        ))
    }
}

/// H(Q^B|Q^A) + H(R^B|R^A) ≥ log₂ Ω^B from already measured joint tables.
pub fn steering_conditional_from_tables(
    q_table: &JointDistribution,
    r_table: &JointDistribution,
    omega_b: f64,
) -> WitnessReport {
    let hq = q_table.conditional_entropy(Party::A);
    let hr = r_table.conditional_entropy(Party::A);
    let log_omega = omega_b.log2();
    WitnessReport::new(
        "steering-conditional",
        Relation::AtLeast,
        hq + hr,
        log_omega,
        components([
            ("H(Q_B|Q_A)", hq),
            ("H(R_B|R_A)", hr),
            ("Omega_B", omega_b),
            ("log2(Omega_B)", log_omega),
        ]),
    )
}

/// Conditional entropic steering inequality from A to B. A violation
/// certifies that no local-hidden-state model for Bob reproduces the data.
pub fn steering_conditional_discrete(
    rho: &DensityOperator,
    setup: &SteeringSetup,
) -> Result<WitnessReport> {
    let omega_b = overlap_omega(&setup.bob.q, &setup.bob.r)?;
    let (q_table, r_table) = setup.tables(rho)?;
    Ok(steering_conditional_from_tables(
        &q_table, &r_table, omega_b,
    ))
}

/// Report for the invalid bound log₂ Ω^B + S(ρ^B).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaiveSubstitutionReport {
    pub warning: &'static str,
    pub certifies_steering: bool,
    pub report: WitnessReport,
    /// `Some(true)` if the state is known separable, `Some(false)` if known
    /// entangled, `None` if undecided.
    pub separable: Option<bool>,
    /// A known-separable state "violates" the invalid bound.
    pub contradiction: bool,
}

/// Evaluates the naive substitution, deciding separability by partial
/// transposition (conclusive for 2⊗2 and 2⊗3).
pub fn naive_substitution_demo(
    rho: &DensityOperator,
    setup: &SteeringSetup,
) -> Result<NaiveSubstitutionReport> {
    let evidence = rho.certified_separable()?;
    naive_substitution_with_evidence(rho, setup, evidence)
}

/// As [`naive_substitution_demo`], with separability supplied by the caller,
/// e.g. `Some(true)` for a state built as a mixture of products.
pub fn naive_substitution_with_evidence(
    rho: &DensityOperator,
    setup: &SteeringSetup,
    separable: Option<bool>,
) -> Result<NaiveSubstitutionReport> {
    let valid = steering_conditional_discrete(rho, setup)?;
    let s_b = rho.partial_trace(1)?.von_neumann_entropy();
    let mut terms = valid.components.clone();
    terms.insert("S(rho_B)".into(), s_b);
    let report = WitnessReport::new(
        "naive-substitution",
        Relation::AtLeast,
        valid.lhs,
        valid.bound + s_b,
        terms,
    );
    let contradiction = report.is_violated() && separable == Some(true);
    Ok(NaiveSubstitutionReport {
        warning: NOT_A_STEERING_WITNESS,
        certifies_steering: false,
        report,
        separable,
        contradiction,
    })
}

/// H(Q^A:Q^B) + H(R^A:R^B) ≤ max_i log₂(N²/Ω^i) from measured tables.
pub fn steering_symmetric_from_tables(
    q_table: &JointDistribution,
    r_table: &JointDistribution,
    n: usize,
    omega_a: f64,
    omega_b: f64,
) -> WitnessReport {
    let iq = q_table.mutual_information();
    let ir = r_table.mutual_information();
    let n2 = (n * n) as f64;
    let bound_a = (n2 / omega_a).log2();
    let bound_b = (n2 / omega_b).log2();
    WitnessReport::new(
        "steering-symmetric",
        Relation::AtMost,
        iq + ir,
        bound_a.max(bound_b),
        components([
            ("H(Q_A:Q_B)", iq),
            ("H(R_A:R_B)", ir),
            ("N", n as f64),
            ("Omega_A", omega_a),
            ("Omega_B", omega_b),
            ("log2(N^2/Omega_A)", bound_a),
            ("log2(N^2/Omega_B)", bound_b),
        ]),
    )
}

/// Symmetric mutual-information steering inequality; a violation certifies
/// steering in both directions. Requires equal subsystem dimensions.
pub fn steering_symmetric_discrete(
    rho: &DensityOperator,
    setup: &SteeringSetup,
) -> Result<WitnessReport> {
    let (da, db) = rho.bipartite_dims()?;
    if da != db {
        return Err(Error::UnequalDimensions(da, db));
    }
    let omega_a = overlap_omega(&setup.alice.q, &setup.alice.r)?;
    let omega_b = overlap_omega(&setup.bob.q, &setup.bob.r)?;
    let (q_table, r_table) = setup.tables(rho)?;
    Ok(steering_symmetric_from_tables(
        &q_table, &r_table, da, omega_a, omega_b,
    ))
}
