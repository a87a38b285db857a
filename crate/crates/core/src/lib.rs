//! # steerkit
//!
//! Entropic EPR-steering witnesses for bipartite quantum states.
//!
//! The crate evaluates entropic uncertainty relations and the steering
//! inequalities built from them, for finite-dimensional density operators
//! and for two-mode Gaussian states of conjugate quadratures.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`qstate`] | density operators, observables, partial trace, Born rule, von Neumann entropy |
//! | [`infotheory`] | Shannon, joint, conditional entropy, mutual information, Gaussian binning |
//! | [`witness`] | Maassen–Uffink, Berta, conditional and symmetric steering inequalities |
//! | [`lhs`] | local-hidden-state ensembles, the LHS criterion, randomized Δ search |
//! | [`cvgauss`] | Gaussian states, differential entropies, CV steering inequalities |
//!
//! All entropies are in bits.
//!
//! ```rust
//! use steerkit::qstate::{DensityOperator, ObservableBasis};
//! use steerkit::witness::{steering_conditional_discrete, SteeringSetup, Verdict};
//!
//! // even mixture of |01><01| and |10><10|
//! let rho = DensityOperator::diagonal(&[0.0, 0.5, 0.5, 0.0], &[2, 2]).unwrap();
//! let setup = SteeringSetup::symmetric(ObservableBasis::sigma_z(), ObservableBasis::sigma_x());
//! let report = steering_conditional_discrete(&rho, &setup).unwrap();
//! assert!((report.lhs - 1.0).abs() < 1e-12);
//! assert_eq!(report.verdict, Verdict::Saturated);
//! ```

#![forbid(unsafe_code)]

pub mod cvgauss;
mod error;
pub mod infotheory;
pub mod lhs;
pub mod par;
pub mod qstate;
mod quadrature;
pub mod random;
pub mod witness;

pub use error::{Error, Result, Violation};
pub use par::Execution;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
