//! Local-hidden-state models for Bob.
//!
//! An [`LhsEnsemble`] is a hidden variable λ with weights P(λ), a quantum
//! state ρ^B_λ Bob receives for each λ, and Alice's announcement
//! distribution P(a|λ) per measurement label. Joint statistics are
//!
//! ```text
//! P(a_i, b_j) = Σ_λ P(λ) P(a_i|λ) Tr(|b_j⟩⟨b_j| ρ^B_λ)
//! ```
//!
//! [`random_lhs_search`] samples ensembles and tracks the smallest
//! conditional-entropy sum and the smallest λ-averaged von Neumann entropy
//! it encounters; [`saturating_ensemble`] is the explicit pure-state model
//! that meets the log₂ Ω bound with equality.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::infotheory::{entropy_bits, JointDistribution};
use crate::par::{self, Execution};
use crate::qstate::{DensityOperator, ObservableBasis, ProbabilityVector};
use crate::random::{random_density, random_pure, simplex_uniform, stream_rng};
use crate::witness::{overlap_omega, steering_conditional_from_tables, WitnessReport, TOL_VERDICT};
use crate::{Error, Result};

/// Response label used for the first observable by generated ensembles.
pub const Q_LABEL: &str = "Q";
/// Response label used for the second observable by generated ensembles.
pub const R_LABEL: &str = "R";

pub const DEFAULT_LAMBDAS: usize = 8;
pub const MAX_LAMBDAS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct LhsEnsemble {
    weights: ProbabilityVector,
    bob_states: Vec<DensityOperator>,
    alice_responses: Vec<BTreeMap<String, ProbabilityVector>>,
}

impl LhsEnsemble {
    pub fn new(
        weights: ProbabilityVector,
        bob_states: Vec<DensityOperator>,
        alice_responses: Vec<BTreeMap<String, ProbabilityVector>>,
    ) -> Result<Self> {
        let k = weights.len();
        if bob_states.len() != k || alice_responses.len() != k {
            return Err(Error::InvalidEnsemble(format!(
                "{k} weights, {} states, {} response sets",
                bob_states.len(),
                alice_responses.len()
            )));
        }
        let dim = bob_states[0].dim();
        for s in &bob_states {
            if s.dims().len() != 1 {
                return Err(Error::InvalidEnsemble(
                    "Bob states must be single-system".into(),
                ));
            }
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
        }
        Ok(Self {
            weights,
            bob_states,
            alice_responses,
        })
    }

    pub fn weights(&self) -> &ProbabilityVector {
        &self.weights
    }

    pub fn bob_states(&self) -> &[DensityOperator] {
        &self.bob_states
    }

    pub fn alice_responses(&self) -> &[BTreeMap<String, ProbabilityVector>] {
        &self.alice_responses
    }

    pub fn lambdas(&self) -> usize {
        self.weights.len()
    }

    /// Dimension of Bob's system.
    pub fn dim(&self) -> usize {
        self.bob_states[0].dim()
    }

    /// Σ_λ P(λ) S(ρ^B_λ).
    pub fn average_entropy(&self) -> f64 {
        self.weights
            .as_slice()
            .iter()
            .zip(&self.bob_states)
            .map(|(w, s)| w * s.von_neumann_entropy())
            .sum()
    }

    fn responses(&self, label: &str) -> Result<Vec<&ProbabilityVector>> {
        let resp: Vec<&ProbabilityVector> = self
            .alice_responses
            .iter()
            .enumerate()
            .map(|(lambda, m)| {
                m.get(label).ok_or_else(|| Error::MissingResponse {
                    label: label.to_string(),
                    lambda,
                })
            })
            .collect::<Result<_>>()?;
        let outcomes = resp[0].len();
        if let Some(bad) = resp.iter().find(|p| p.len() != outcomes) {
            return Err(Error::DimensionMismatch {
                expected: outcomes,
                found: bad.len(),
            });
        }
        Ok(resp)
    }

    fn check_basis(&self, basis: &ObservableBasis) -> Result<()> {
        if basis.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: basis.dim(),
            });
        }
        Ok(())
    }
}

/// Joint statistics of Alice's `label` announcements and Bob's `bob_basis` outcomes.
pub fn lhs_joint_distribution(
    e: &LhsEnsemble,
    label: &str,
    bob_basis: &ObservableBasis,
) -> Result<JointDistribution> {
    e.check_basis(bob_basis)?;
    let responses = e.responses(label)?;
    let rows = responses[0].len();
    let cols = bob_basis.dim();
    let mut table = vec![0.0; rows * cols];
    for ((w, state), alice) in e
        .weights
        .as_slice()
        .iter()
        .zip(&e.bob_states)
        .zip(responses)
    {
        let bob = bob_basis.born(state.matrix());
        for (i, pa) in alice.as_slice().iter().enumerate() {
            for (j, pb) in bob.iter().enumerate() {
                table[i * cols + j] += w * pa * pb;
            }
        }
    }
    JointDistribution::new(rows, cols, table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaTerm {
    pub weight: f64,
    /// H_q(Q^B|λ)
    pub h_q: f64,
    /// H_q(R^B|λ)
    pub h_r: f64,
    /// S(ρ^B_λ)
    pub von_neumann: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LhsCriterionReport {
    /// H(Q^B|Q^A) + H(R^B|R^A) of the ensemble's statistics.
    pub lhs: f64,
    /// Σ_λ P(λ) (H_q(Q^B|λ) + H_q(R^B|λ)).
    pub rhs: f64,
    pub h_q_given_a: f64,
    pub h_r_given_a: f64,
    /// Σ_λ P(λ) S(ρ^B_λ).
    pub average_von_neumann: f64,
    pub per_lambda: Vec<LambdaTerm>,
}

/// Evaluates both sides of the LHS criterion for one ensemble.
pub fn lhs_criterion_check(
    e: &LhsEnsemble,
    q_label: &str,
    r_label: &str,
    q_b: &ObservableBasis,
    r_b: &ObservableBasis,
) -> Result<LhsCriterionReport> {
    let q_table = lhs_joint_distribution(e, q_label, q_b)?;
    let r_table = lhs_joint_distribution(e, r_label, r_b)?;
    let h_q_given_a = q_table.conditional_entropy(crate::infotheory::Party::A);
    let h_r_given_a = r_table.conditional_entropy(crate::infotheory::Party::A);
    let per_lambda: Vec<LambdaTerm> = e
        .weights
        .as_slice()
        .iter()
        .zip(&e.bob_states)
        .map(|(&weight, s)| LambdaTerm {
            weight,
            h_q: entropy_bits(&q_b.born(s.matrix())),
            h_r: entropy_bits(&r_b.born(s.matrix())),
            von_neumann: s.von_neumann_entropy(),
        })
        .collect();
    let rhs = per_lambda.iter().map(|t| t.weight * (t.h_q + t.h_r)).sum();
    let average_von_neumann = per_lambda.iter().map(|t| t.weight * t.von_neumann).sum();
    Ok(LhsCriterionReport {
        lhs: h_q_given_a + h_r_given_a,
        rhs,
        h_q_given_a,
        h_r_given_a,
        average_von_neumann,
        per_lambda,
    })
}

/// The conditional steering inequality evaluated on an ensemble's own statistics.
pub fn steering_on_ensemble(
    e: &LhsEnsemble,
    q_label: &str,
    r_label: &str,
    q_b: &ObservableBasis,
    r_b: &ObservableBasis,
) -> Result<WitnessReport> {
    let omega = overlap_omega(q_b, r_b)?;
    let q_table = lhs_joint_distribution(e, q_label, q_b)?;
    let r_table = lhs_joint_distribution(e, r_label, r_b)?;
    Ok(steering_conditional_from_tables(&q_table, &r_table, omega))
}

/// λ ranges over the eigenvectors of `q_b` with equal weight; Alice
/// announces λ for both [`Q_LABEL`] and [`R_LABEL`]. With an `r_b` mutually
/// unbiased to `q_b` the steering sum equals log₂ Ω exactly.
pub fn saturating_ensemble(q_b: &ObservableBasis) -> Result<LhsEnsemble> {
    let n = q_b.dim();
    let states = q_b
        .vectors()
        .iter()
        .map(|v| DensityOperator::pure(v, &[n]))
        .collect::<Result<Vec<_>>>()?;
    let responses = (0..n)
        .map(|k| {
            [Q_LABEL, R_LABEL]
                .into_iter()
                .map(|l| (l.to_string(), ProbabilityVector::deterministic(n, k)))
                .collect()
        })
        .collect();
    LhsEnsemble::new(ProbabilityVector::uniform(n), states, responses)
}

/// How Bob's per-λ states are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum BobStates {
    /// Haar-random pure states.
    Pure,
    /// Hilbert–Schmidt random full-rank states.
    Mixed,
    /// Pure and mixed on alternating pairs of trials.
    Both,
    /// The same state for every λ.
    Fixed(DensityOperator),
}

/// How Alice's announcements are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AliceResponses {
    /// Alice announces the most likely outcome of Bob's state in the matching
    /// basis, relabeled by a random permutation.
    Deterministic,
    /// Independent uniform points of the simplex.
    Simplex,
    /// Deterministic on even trials, simplex on odd.
    Both,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub q_b: ObservableBasis,
    pub r_b: ObservableBasis,
    pub trials: usize,
    pub seed: u64,
    pub lambdas: usize,
    pub bob_states: BobStates,
    pub alice: AliceResponses,
    pub exec: Execution,
}

impl SearchConfig {
    pub fn new(q_b: ObservableBasis, r_b: ObservableBasis, trials: usize, seed: u64) -> Self {
        Self {
            q_b,
            r_b,
            trials,
            seed,
            lambdas: DEFAULT_LAMBDAS,
            bob_states: BobStates::Both,
            alice: AliceResponses::Both,
            exec: Execution::default(),
        }
    }

    /// Computational vs Fourier bases of dimension `dim`.
    pub fn mub(dim: usize, trials: usize, seed: u64) -> Self {
        Self::new(
            ObservableBasis::computational(dim).with_label(Q_LABEL),
            ObservableBasis::fourier(dim).with_label(R_LABEL),
            trials,
            seed,
        )
    }

    pub fn dim(&self) -> usize {
        self.q_b.dim()
    }

    fn validate(&self) -> Result<()> {
        if self.q_b.dim() != self.r_b.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.q_b.dim(),
                found: self.r_b.dim(),
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidEnsemble("trials must be at least 1".into()));
        }
        if !(1..=MAX_LAMBDAS).contains(&self.lambdas) {
            return Err(Error::InvalidEnsemble(format!(
                "lambda count {} outside 1..={MAX_LAMBDAS}",
                self.lambdas
            )));
        }
        if let BobStates::Fixed(s) = &self.bob_states {
            if s.dims() != [self.dim()] {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: s.dim(),
                });
            }
        }
        Ok(())
    }

    /// The ensemble drawn for `trial`; depends only on (seed, trial).
    pub fn sample(&self, trial: usize) -> Result<LhsEnsemble> {
        let mut rng = stream_rng(self.seed, trial as u64);
        let n = self.dim();
        let m = self.lambdas;
        let weights = simplex_uniform(m, &mut rng);
        let pure = match &self.bob_states {
            BobStates::Pure => true,
            BobStates::Mixed | BobStates::Fixed(_) => false,
            BobStates::Both => (trial / 2).is_multiple_of(2),
        };
        let states = (0..m)
            .map(|_| match &self.bob_states {
                BobStates::Fixed(s) => Ok(s.clone()),
                _ if pure => random_pure(n, &mut rng),
                _ => random_density(n, n, &mut rng),
            })
            .collect::<Result<Vec<_>>>()?;
        let deterministic = match self.alice {
            AliceResponses::Deterministic => true,
            AliceResponses::Simplex => false,
            AliceResponses::Both => trial.is_multiple_of(2),
        };
        let responses = if deterministic {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            states
                .iter()
                .map(|s| {
                    [(Q_LABEL, &self.q_b), (R_LABEL, &self.r_b)]
                        .into_iter()
                        .map(|(label, basis)| {
                            let best = argmax(&basis.born(s.matrix()));
                            (
                                label.to_string(),
                                ProbabilityVector::deterministic(n, perm[best]),
                            )
                        })
                        .collect()
                })
                .collect()
        } else {
            (0..m)
                .map(|_| {
                    [Q_LABEL, R_LABEL]
                        .into_iter()
                        .map(|l| (l.to_string(), simplex_uniform(n, &mut rng)))
                        .collect()
                })
                .collect()
        };
        LhsEnsemble::new(weights, states, responses)
    }
}

fn argmax(p: &[f64]) -> usize {
    p.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| {
            if x > best.1 {
                (i, x)
            } else {
                best
            }
        })
        .0
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub trials: usize,
    pub lambdas: usize,
    /// log₂ Ω(q_b, r_b), the steering bound.
    pub bound: f64,
    /// Smallest H(Q^B|Q^A) + H(R^B|R^A) over all trials.
    pub min_steering_sum: f64,
    pub argmin_trial: usize,
    /// Smallest Σ P(λ) S(ρ^B_λ) over all trials.
    pub min_average_entropy: f64,
    pub argmin_entropy_trial: usize,
    /// Trials whose steering margin fell below −τ_verdict.
    pub violations: usize,
    /// The ensemble achieving `min_steering_sum`.
    pub argmin_ensemble: LhsEnsemble,
}

impl SearchReport {
    pub fn min_margin(&self) -> f64 {
        self.min_steering_sum - self.bound
    }
}

#[derive(Debug, Clone, Copy)]
struct Extremes {
    sum: (f64, usize),
    entropy: (f64, usize),
    violations: usize,
}

fn min_pair(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Randomized search over LHS ensembles. Deterministic in (seed, trials)
/// and independent of [`Execution`] mode.
pub fn random_lhs_search(config: &SearchConfig) -> Result<SearchReport> {
    config.validate()?;
    let bound = overlap_omega(&config.q_b, &config.r_b)?.log2();
    let identity = Ok(Extremes {
        sum: (f64::INFINITY, usize::MAX),
        entropy: (f64::INFINITY, usize::MAX),
        violations: 0,
    });
    let acc = par::map_reduce(
        config.exec,
        config.trials,
        identity,
        |trial| -> Result<Extremes> {
            let e = config.sample(trial)?;
            let w = steering_on_ensemble(&e, Q_LABEL, R_LABEL, &config.q_b, &config.r_b)?;
            Ok(Extremes {
                sum: (w.lhs, trial),
                entropy: (e.average_entropy(), trial),
                violations: (w.margin < -TOL_VERDICT) as usize,
            })
        },
        |a, b| {
            let (a, b) = (a?, b?);
            Ok(Extremes {
                sum: min_pair(a.sum, b.sum),
                entropy: min_pair(a.entropy, b.entropy),
                violations: a.violations + b.violations,
            })
        },
    )?;
    Ok(SearchReport {
        trials: config.trials,
        lambdas: config.lambdas,
        bound,
        min_steering_sum: acc.sum.0,
        argmin_trial: acc.sum.1,
        min_average_entropy: acc.entropy.0,
        argmin_entropy_trial: acc.entropy.1,
        violations: acc.violations,
        argmin_ensemble: config.sample(acc.sum.1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    use crate::C64;

    fn z_ensemble() -> LhsEnsemble {
        // λ = ↑ sends Bob ↓ and vice versa; Alice announces λ
        let up = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let down = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let states = vec![
            DensityOperator::pure(&down, &[2]).unwrap(),
            DensityOperator::pure(&up, &[2]).unwrap(),
        ];
        let responses = (0..2)
            .map(|k| {
                [Q_LABEL, R_LABEL]
                    .into_iter()
                    .map(|l| (l.to_string(), ProbabilityVector::deterministic(2, k)))
                    .collect()
            })
            .collect();
        LhsEnsemble::new(ProbabilityVector::uniform(2), states, responses).unwrap()
    }

    #[test]
    fn joint_distribution_examples() {
        let e = z_ensemble();
        let zz = lhs_joint_distribution(&e, Q_LABEL, &ObservableBasis::sigma_z()).unwrap();
        for (k, want) in [0.0, 0.5, 0.5, 0.0].iter().enumerate() {
            assert_abs_diff_eq!(zz.get(k / 2, k % 2), want, epsilon = 1e-15);
        }
        let zx = lhs_joint_distribution(&e, Q_LABEL, &ObservableBasis::sigma_x()).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(zx.get(k / 2, k % 2), 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_lambda_gives_product() {
        let state = DensityOperator::diagonal(&[0.2, 0.3, 0.5], &[3]).unwrap();
        let resp = ProbabilityVector::new(vec![0.1, 0.9]).unwrap();
        let e = LhsEnsemble::new(
            ProbabilityVector::uniform(1),
            vec![state],
            vec![[("A".to_string(), resp)].into_iter().collect()],
        )
        .unwrap();
        let d = lhs_joint_distribution(&e, "A", &ObservableBasis::computational(3)).unwrap();
        let prod = JointDistribution::product(&[0.1, 0.9], &[0.2, 0.3, 0.5]).unwrap();
        for (x, y) in d.table().iter().zip(prod.table()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
        assert!(d.mutual_information().abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let e = z_ensemble();
        assert!(matches!(
            lhs_joint_distribution(&e, "nope", &ObservableBasis::sigma_z()),
            Err(Error::MissingResponse { .. })
        ));
        assert!(matches!(
            lhs_joint_distribution(&e, Q_LABEL, &ObservableBasis::computational(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(LhsEnsemble::new(ProbabilityVector::uniform(2), vec![], vec![]).is_err());
    }

    #[test]
    fn criterion_examples() {
        let (z, x) = (ObservableBasis::sigma_z(), ObservableBasis::sigma_x());
        let r = lhs_criterion_check(&z_ensemble(), Q_LABEL, R_LABEL, &z, &x).unwrap();
        assert_abs_diff_eq!(r.lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.average_von_neumann, 0.0, epsilon = 1e-12);

        let mixed = DensityOperator::maximally_mixed(&[2]).unwrap();
        let e = LhsEnsemble::new(
            ProbabilityVector::uniform(2),
            vec![mixed.clone(), mixed],
            z_ensemble().alice_responses().to_vec(),
        )
        .unwrap();
        let r = lhs_criterion_check(&e, Q_LABEL, R_LABEL, &z, &x).unwrap();
        assert_abs_diff_eq!(r.lhs, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.rhs, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.average_von_neumann, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn criterion_holds_on_sampled_ensembles() {
        for n in [2, 3] {
            let cfg = SearchConfig::mub(n, 400, 17);
            for t in 0..cfg.trials {
                let e = cfg.sample(t).unwrap();
                let r = lhs_criterion_check(&e, Q_LABEL, R_LABEL, &cfg.q_b, &cfg.r_b).unwrap();
                assert!(r.lhs >= r.rhs - 1e-9, "trial {t}: {} < {}", r.lhs, r.rhs);
            }
        }
    }

    #[test]
    fn saturating_examples() {
        let (z, x) = (ObservableBasis::sigma_z(), ObservableBasis::sigma_x());
        let w = steering_on_ensemble(&saturating_ensemble(&z).unwrap(), Q_LABEL, R_LABEL, &z, &x)
            .unwrap();
        assert_abs_diff_eq!(w.lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.bound, 1.0, epsilon = 1e-12);

        let w = steering_on_ensemble(&saturating_ensemble(&z).unwrap(), Q_LABEL, R_LABEL, &z, &z)
            .unwrap();
        assert_abs_diff_eq!(w.lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.bound, 0.0, epsilon = 1e-12);

        let (c3, f3) = (
            ObservableBasis::computational(3),
            ObservableBasis::fourier(3),
        );
        let w = steering_on_ensemble(
            &saturating_ensemble(&c3).unwrap(),
            Q_LABEL,
            R_LABEL,
            &c3,
            &f3,
        )
        .unwrap();
        assert_abs_diff_eq!(w.lhs, 3f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn search_examples() {
        let r = random_lhs_search(&SearchConfig::mub(2, 2000, 42)).unwrap();
        assert!(r.min_steering_sum >= 1.0 - 1e-9);
        assert_eq!(r.violations, 0);

        let mut cfg = SearchConfig::mub(2, 50, 3);
        cfg.bob_states = BobStates::Pure;
        assert!(random_lhs_search(&cfg).unwrap().min_average_entropy <= 1e-12);

        let up = DensityOperator::diagonal(&[1.0, 0.0], &[2]).unwrap();
        let mut cfg =
            SearchConfig::new(ObservableBasis::sigma_z(), ObservableBasis::sigma_x(), 1, 0);
        cfg.lambdas = 1;
        cfg.bob_states = BobStates::Fixed(up);
        let r = random_lhs_search(&cfg).unwrap();
        assert_abs_diff_eq!(r.min_steering_sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn search_is_reproducible_across_modes() {
        let mut cfg = SearchConfig::mub(3, 300, 9);
        cfg.exec = Execution::Sequential;
        let a = random_lhs_search(&cfg).unwrap();
        cfg.exec = Execution::Parallel;
        let b = random_lhs_search(&cfg).unwrap();
        assert_eq!(a.min_steering_sum.to_bits(), b.min_steering_sum.to_bits());
        assert_eq!(a.argmin_trial, b.argmin_trial);
        assert_eq!(
            a.min_average_entropy.to_bits(),
            b.min_average_entropy.to_bits()
        );
        assert_eq!(a.argmin_ensemble, b.argmin_ensemble);
    }

    #[test]
    fn search_rejects_bad_config() {
        let mut cfg = SearchConfig::mub(2, 0, 0);
        assert!(random_lhs_search(&cfg).is_err());
        cfg.trials = 1;
        cfg.lambdas = 65;
        assert!(random_lhs_search(&cfg).is_err());
    }
}
