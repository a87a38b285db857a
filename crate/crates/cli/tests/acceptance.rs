//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;
use steerkit::cvgauss::{
    steering_conditional_cv, steering_symmetric_binned, steering_symmetric_cv, GaussianState,
};
use steerkit::infotheory::BinningSpec;
use steerkit::lhs::{
    random_lhs_search, saturating_ensemble, steering_on_ensemble, AliceResponses, BobStates,
    SearchConfig, Q_LABEL, R_LABEL,
};
use steerkit::qstate::{DensityOperator, ObservableBasis};
use steerkit::random::{random_density, random_mub_pair, random_separable, stream_rng};
use steerkit::witness::{berta_check, steering_conditional_discrete, SteeringSetup};
use steerkit_cli::{resolve, run, templates};

const TOL: f64 = 1e-9;

/// Checks accumulated for one criterion.
struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || {
            format!("{name} = {got:.12} expected {want:.12} (tol {tol:e})")
        });
    }
}

fn criterion(
    id: u32,
    title: &str,
    limit: Option<Duration>,
    body: impl FnOnce(&mut Checks) -> String,
) -> bool {
    let start = Instant::now();
    let mut c = Checks::new();
    let detail = body(&mut c);
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        c.check(elapsed <= limit, || {
            format!("runtime {elapsed:.2?} exceeds {limit:.0?}")
        });
    }
    let ok = c.failures.is_empty();
    println!(
        "{} criterion {id}: {title} [{detail}; {elapsed:.2?}]",
        if ok { "PASS" } else { "FAIL" }
    );
    for f in &c.failures {
        println!("     - {f}");
    }
    ok
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn c1_counterexample(c: &mut Checks) -> String {
    let doc = resolve(templates::contradiction()).expect("template resolves");
    let rep = run(&doc, 0);
    let reports = &rep.document["reports"];
    let valid = &reports[1]["result"];
    let naive = &reports[2]["result"];
    c.close(
        "H(sigma_z^B|sigma_z^A)",
        num(&valid["components"]["H(Q_B|Q_A)"]),
        0.0,
        TOL,
    );
    c.close(
        "H(sigma_x^B|sigma_x^A)",
        num(&valid["components"]["H(R_B|R_A)"]),
        1.0,
        TOL,
    );
    c.close(
        "S(rho^B)",
        num(&naive["report"]["components"]["S(rho_B)"]),
        1.0,
        TOL,
    );
    c.close("naive bound", num(&naive["report"]["bound"]), 2.0, TOL);
    c.close("naive lhs", num(&naive["report"]["lhs"]), 1.0, TOL);
    c.check(naive["contradiction"] == true, || {
        "contradiction flag not set".into()
    });
    c.check(naive["certifies_steering"] == false, || {
        "naive report claims certification".into()
    });
    c.close("valid bound log2 Omega", num(&valid["bound"]), 1.0, TOL);
    c.close("valid lhs", num(&valid["lhs"]), 1.0, TOL);
    c.check(valid["verdict"] == "saturated", || {
        format!("valid verdict {}", valid["verdict"])
    });
    c.check(rep.exit_code() == 0, || {
        format!("exit code {}", rep.exit_code())
    });
    format!(
        "valid {} at {}, naive lhs {} vs bound {}",
        valid["verdict"], valid["bound"], naive["report"]["lhs"], naive["report"]["bound"]
    )
}

fn c2_soundness(c: &mut Checks) -> String {
    let mut ensembles = 0;
    let mut worst = f64::INFINITY;
    for n in [2usize, 3] {
        for (bob, alice) in [
            (BobStates::Both, AliceResponses::Both),
            (BobStates::Pure, AliceResponses::Deterministic),
        ] {
            let mut cfg = SearchConfig::mub(n, 10_000, 2024 + n as u64);
            cfg.bob_states = bob;
            cfg.alice = alice;
            let r = random_lhs_search(&cfg).expect("search runs");
            ensembles += r.trials;
            worst = worst.min(r.min_margin());
            c.check(r.violations == 0, || {
                format!("N={n}: {} violating ensembles", r.violations)
            });
            c.check(r.min_margin() >= -TOL, || {
                format!("N={n}: min margin {:e}", r.min_margin())
            });
        }
    }
    let mut mixtures = 0;
    for n in [2usize, 3] {
        for i in 0..1000u64 {
            let mut rng = stream_rng(99 + n as u64, i);
            let terms = rng.random_range(1..=4);
            let rho = random_separable(n, n, terms, &mut rng).expect("separable state");
            let (qa, ra) = random_mub_pair(n, &mut rng);
            let (qb, rb) = random_mub_pair(n, &mut rng);
            let w = steering_conditional_discrete(&rho, &SteeringSetup::new(qa, ra, qb, rb))
                .expect("witness evaluates");
            mixtures += 1;
            worst = worst.min(w.margin);
            c.check(w.margin >= -TOL, || {
                format!("separable N={n} #{i}: margin {:e}", w.margin)
            });
        }
    }
    format!("{ensembles} ensembles, {mixtures} separable mixtures, worst margin {worst:.3e}")
}

fn c3_tightness(c: &mut Checks) -> String {
    let mut min_entropy = f64::INFINITY;
    for n in [2usize, 3] {
        let q = ObservableBasis::computational(n);
        let r = ObservableBasis::fourier(n);
        let e = saturating_ensemble(&q).expect("ensemble");
        let w = steering_on_ensemble(&e, Q_LABEL, R_LABEL, &q, &r).expect("witness");
        c.close(
            &format!("N={n} saturating steering sum"),
            w.lhs,
            (n as f64).log2(),
            TOL,
        );
        c.check(e.average_entropy() <= 1e-12, || {
            format!(
                "N={n}: saturating ensemble entropy {:e}",
                e.average_entropy()
            )
        });

        let mut cfg = SearchConfig::mub(n, 2000, 7 + n as u64);
        cfg.bob_states = BobStates::Pure;
        let s = random_lhs_search(&cfg).expect("search");
        min_entropy = min_entropy.min(s.min_average_entropy);
        c.check(s.min_average_entropy <= 1e-12, || {
            format!(
                "N={n}: pure search min avg entropy {:e}",
                s.min_average_entropy
            )
        });
    }
    format!("pure-state min average entropy {min_entropy:.3e}")
}

fn c4_berta(c: &mut Checks) -> String {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for n in [2usize, 3, 4] {
        for i in 0..10_000u64 {
            let mut rng = stream_rng(4000 + n as u64, i);
            let rank = rng.random_range(1..=n);
            let rho = random_density(n, rank, &mut rng).expect("state");
            let (q, r) = random_mub_pair(n, &mut rng);
            let b = berta_check(&rho, &q, &r).expect("berta");
            count += 1;
            worst = worst.min(b.margin);
            c.check(b.margin >= -TOL, || {
                format!("N={n} #{i}: margin {:e}", b.margin)
            });
        }
        let mut rng = stream_rng(5000, n as u64);
        let (q, r) = random_mub_pair(n, &mut rng);
        let mixed = DensityOperator::maximally_mixed(&[n]).expect("state");
        c.close(
            &format!("N={n} maximally mixed margin"),
            berta_check(&mixed, &q, &r).unwrap().margin,
            0.0,
            TOL,
        );
        let pure = DensityOperator::pure(&q.vectors()[0], &[n]).expect("state");
        c.close(
            &format!("N={n} pure eigenstate margin"),
            berta_check(&pure, &q, &r).unwrap().margin,
            0.0,
            TOL,
        );
    }
    format!("{count} random states, worst margin {worst:.3e}")
}

fn c5_cv(c: &mut Checks) -> String {
    for i in 0..=20 {
        let r = 0.1 * i as f64;
        let g = GaussianState::tmsv(r).expect("tmsv");
        // Schur complement: var(x_B|x_A) = cosh2r/2 - (sinh2r/2)^2 / (cosh2r/2) = 1/(2 cosh 2r)
        let ch = (2.0 * r).cosh();
        let cond_var = 0.5 / ch;
        let want_margin = -ch.log2();
        let cond = steering_conditional_cv(&g).expect("conditional");
        let sym = steering_symmetric_cv(&g).expect("symmetric");
        c.close(
            &format!("r={r:.1} var(x_B|x_A)"),
            cond.component("var(x_B|x_A)"),
            cond_var,
            TOL,
        );
        c.close(
            &format!("r={r:.1} conditional margin"),
            cond.margin,
            want_margin,
            TOL,
        );
        c.close(
            &format!("r={r:.1} symmetric lhs"),
            sym.lhs,
            2.0 * ch.log2(),
            TOL,
        );
        c.close(
            &format!("r={r:.1} symmetric bound"),
            sym.bound,
            ch.log2(),
            TOL,
        );
        c.close(
            &format!("r={r:.1} symmetric margin"),
            sym.margin,
            want_margin,
            TOL,
        );
        if i == 0 {
            c.check(
                cond.verdict == steerkit::witness::Verdict::Saturated,
                || "r=0 conditional not saturated".into(),
            );
            c.check(sym.verdict == steerkit::witness::Verdict::Saturated, || {
                "r=0 symmetric not saturated".into()
            });
        }
    }
    "21 squeezing values".into()
}

fn c6_binned(c: &mut Checks) -> String {
    let mut pairs = 0;
    for r in [0.0, 0.3, 0.6, 1.0, 1.5] {
        let g = GaussianState::tmsv(r).expect("tmsv");
        let cont = steering_symmetric_cv(&g).expect("continuous").lhs;
        let sigma = (g.variance(steerkit::cvgauss::Quadrature::XA)).sqrt();
        for count in [8usize, 16, 32, 64] {
            for span in [4.0, 6.0] {
                let spec = BinningSpec::centered(sigma, span, count).expect("spec");
                let b = steering_symmetric_binned(&g, &spec, &spec).expect("binned");
                pairs += 1;
                c.check(b.lhs <= cont + TOL, || {
                    format!(
                        "r={r} count={count} span={span}: binned {} > continuous {cont}",
                        b.lhs
                    )
                });
            }
        }
    }
    let g = GaussianState::tmsv(1.0).expect("tmsv");
    let cont = steering_symmetric_cv(&g).expect("continuous");
    let sigma = (g.variance(steerkit::cvgauss::Quadrature::XA)).sqrt();
    let spec = BinningSpec::centered(sigma, 6.0, 64).expect("spec");
    let b = steering_symmetric_binned(&g, &spec, &spec).expect("binned");
    let gap = cont.lhs - b.lhs;
    c.check(gap <= 0.05, || {
        format!(
            "tmsv(1.0) 64 bins +-6 sigma: binned lhs {:.6} vs continuous {:.6}, gap {gap:.6} > 0.05",
            b.lhs, cont.lhs
        )
    });
    c.check(b.is_violated(), || {
        format!(
            "tmsv(1.0) binned lhs {:.6} does not exceed bound {:.6}",
            b.lhs, b.bound
        )
    });
    format!(
        "{pairs} (state, spec) pairs; tmsv(1.0) gap {gap:.4} bits, binned margin {:.4}",
        b.margin
    )
}

const DETERMINISM_DOC: &str = r#"{
  "schema": "steerkit/1",
  "states": {
    "rho": { "kind": "density", "dims": [2, 2], "matrix": [
      [[0,0],[0,0],[0,0],[0,0]],
      [[0,0],[0.5,0],[0,0],[0,0]],
      [[0,0],[0,0],[0.5,0],[0,0]],
      [[0,0],[0,0],[0,0],[0,0]]
    ]},
    "sq": { "kind": "tmsv", "r": 0.7 }
  },
  "observables": {
    "z": { "kind": "builtin", "name": "sigma_z" },
    "x": { "kind": "builtin", "name": "sigma_x" }
  },
  "tasks": [
    { "kind": "steering-conditional", "state": "rho", "q": "z", "r": "x" },
    { "kind": "demo-contradiction", "state": "rho", "q": "z", "r": "x" },
    { "kind": "lhs-search", "dim": 3, "trials": 3000, "lambdas": 6 },
    { "kind": "lhs-search", "dim": 2, "trials": 2000, "seed": 5, "bob_states": "mixed", "alice": "simplex" },
    { "kind": "steering-symmetric-binned", "state": "sq", "bins": 32 },
    { "kind": "steering-conditional-cv", "state": "sq" }
  ]
}"#;

fn c7_determinism(c: &mut Checks) -> String {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("doc.json");
    std::fs::write(&path, DETERMINISM_DOC).expect("write document");
    let exe = env!("CARGO_BIN_EXE_steerkit");
    let run_with = |threads: &str| {
        let out = Command::new(exe)
            .args(["run", path.to_str().unwrap(), "--seed", "1234"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("binary runs");
        (out.status.code(), out.stdout)
    };
    let runs = [run_with("4"), run_with("4"), run_with("1"), run_with("3")];
    for (i, (code, _)) in runs.iter().enumerate() {
        c.check(*code == Some(0), || format!("run {i} exited with {code:?}"));
    }
    c.check(runs[0].1 == runs[1].1, || {
        "two runs with 4 threads differ".into()
    });
    c.check(runs[0].1 == runs[2].1, || {
        "1 thread differs from 4 threads".into()
    });
    c.check(runs[0].1 == runs[3].1, || {
        "3 threads differ from 4 threads".into()
    });
    c.check(!runs[0].1.is_empty(), || "empty report".into());
    format!(
        "{} bytes identical across 4 runs (threads 4, 4, 1, 3)",
        runs[0].1.len()
    )
}

fn main() {
    let results = [
        criterion(
            1,
            "counterexample reproduction",
            Some(Duration::from_secs(1)),
            c1_counterexample,
        ),
        criterion(
            2,
            "soundness sweep",
            Some(Duration::from_secs(60)),
            c2_soundness,
        ),
        criterion(3, "tightness, delta = 0", None, c3_tightness),
        criterion(
            4,
            "entropic uncertainty with quantum memory term",
            None,
            c4_berta,
        ),
        criterion(
            5,
            "CV inequalities on tmsv",
            Some(Duration::from_secs(1)),
            c5_cv,
        ),
        criterion(
            6,
            "binned monotonicity and 64-bin accuracy",
            Some(Duration::from_secs(30)),
            c6_binned,
        ),
        criterion(
            7,
            "determinism across runs and thread counts",
            None,
            c7_determinism,
        ),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
