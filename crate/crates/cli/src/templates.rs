//! Built-in documents behind the `demo` and `lhs-search` commands.

use std::collections::BTreeMap;

use crate::document::{
    BipartiteTask, BuiltinBasis, ObservableSpec, StateSpec, Task, TaskDocument, SCHEMA,
};

/// diag(0, 1/2, 1/2, 0) with σ_z/σ_x: the valid conditional inequality
/// saturates while the naive state-dependent bound is "violated" by a
/// separable state.
pub fn contradiction() -> TaskDocument {
    let z = [0.0, 0.0];
    let h = [0.5, 0.0];
    let matrix = vec![
        vec![z, z, z, z],
        vec![z, h, z, z],
        vec![z, z, h, z],
        vec![z, z, z, z],
    ];
    let states = BTreeMap::from([(
        "rho".to_string(),
        StateSpec::Density {
            dims: vec![2, 2],
            matrix,
        },
    )]);
    let builtin = |name| ObservableSpec::Builtin { name, dim: None };
    let observables = BTreeMap::from([
        ("sigma_z".to_string(), builtin(BuiltinBasis::SigmaZ)),
        ("sigma_x".to_string(), builtin(BuiltinBasis::SigmaX)),
    ]);
    let setup = BipartiteTask {
        state: "rho".into(),
        q: "sigma_z".into(),
        r: "sigma_x".into(),
        alice_q: None,
        alice_r: None,
    };
    TaskDocument {
        schema: SCHEMA.into(),
        states,
        observables,
        tasks: vec![
            Task::VonNeumann {
                state: "rho".into(),
            },
            Task::SteeringConditional(setup.clone()),
            Task::DemoContradiction {
                setup,
                separable: None,
            },
        ],
    }
}

/// A single lhs-search task over computational/Fourier bases of `dim`.
pub fn lhs_search(dim: usize, trials: usize, seed: u64, lambdas: Option<usize>) -> TaskDocument {
    TaskDocument {
        schema: SCHEMA.into(),
        states: BTreeMap::new(),
        observables: BTreeMap::new(),
        tasks: vec![Task::LhsSearch {
            dim: Some(dim),
            q: None,
            r: None,
            trials,
            seed: Some(seed),
            lambdas,
            bob_states: None,
            alice: None,
        }],
    }
}
