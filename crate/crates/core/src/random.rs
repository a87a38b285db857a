//! Random states, unitaries and simplex points for sweeps and searches.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::qstate::{DensityOperator, ObservableBasis, ProbabilityVector};
use crate::{Result, C64};

/// Generator for work item `index` of a run seeded with `seed`. Each index
/// gets its own ChaCha stream, so results do not depend on scheduling.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-random unit vector in C^n.
pub fn haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| complex_normal(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-random unitary (QR of a Ginibre matrix with R's phases removed).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Random density matrix of the given rank (induced measure; rank n is Hilbert–Schmidt).
pub fn random_density<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    let g = ginibre(n, rank.clamp(1, n), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(m.unscale(tr), &[n])
}

pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityOperator> {
    DensityOperator::pure(&haar_state(n, rng), &[n])
}

/// Uniform point on the probability simplex, i.e. Dirichlet(1, …, 1).
pub fn simplex_uniform<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ProbabilityVector {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    ProbabilityVector::new(draws.into_iter().map(|x| x / total).collect())
        .expect("normalized exponential draws")
}

/// A mutually unbiased pair: a Haar rotation of the computational and Fourier bases.
pub fn random_mub_pair<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> (ObservableBasis, ObservableBasis) {
    let u = haar_unitary(n, rng);
    let q = ObservableBasis::computational(n)
        .rotated(&u)
        .expect("unitary rotation");
    let r = ObservableBasis::fourier(n)
        .rotated(&u)
        .expect("unitary rotation");
    (q.with_label("Q"), r.with_label("R"))
}

/// Convex mixture of `terms` product states, each factor a random state of random rank.
pub fn random_separable<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    terms: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    let weights = simplex_uniform(terms, rng);
    let states = (0..terms)
        .map(|_| {
            let ra = rng.random_range(1..=dim_a);
            let rb = rng.random_range(1..=dim_b);
            random_density(dim_a, ra, rng)?.tensor(&random_density(dim_b, rb, rng)?)
        })
        .collect::<Result<Vec<_>>>()?;
    DensityOperator::mixture(weights.as_slice(), &states)
}
