//! Two-mode Gaussian states of conjugate quadratures (x, k).
//!
//! Units: vacuum variance 1/2 for both quadratures, so σ²_x σ²_k ≥ 1/4 and two
//! independent vacua sit exactly on the log₂(πe) conditional bound.
//! Quadratures are ordered (x_A, k_A, x_B, k_B). All entropies are analytic
//! and in bits; differential entropies may be negative.

use std::f64::consts::{E, PI};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::infotheory::{bin_bivariate_gaussian_with, BinningSpec};
use crate::par::Execution;
use crate::witness::{Relation, WitnessReport};
use crate::{Error, Result};

/// Witness report for continuous-variable inequalities; terms may be negative.
pub type CvWitnessReport = WitnessReport;

/// Vacuum variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    XA,
    KA,
    XB,
    KB,
}

impl Quadrature {
    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianState {
    mean: [f64; 4],
    cov: [[f64; 4]; 4],
}

impl GaussianState {
    pub fn new(mean: [f64; 4], cov: [[f64; 4]; 4]) -> Result<Self> {
        if !mean
            .iter()
            .chain(cov.iter().flatten())
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidGaussian("non-finite entry".into()));
        }
        for (i, row) in cov.iter().enumerate() {
            for (j, &c) in row.iter().enumerate().skip(i + 1) {
                if (c - cov[j][i]).abs() > 1e-10 {
                    return Err(Error::InvalidGaussian(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let m = Matrix4::from_fn(|i, j| 0.5 * (cov[i][j] + cov[j][i]));
        if m.cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        for (party, (x, k)) in [("A", (0, 1)), ("B", (2, 3))] {
            let product = m[(x, x)] * m[(k, k)];
            if product < 0.25 * (1.0 - 1e-12) {
                return Err(Error::InvalidGaussian(format!(
                    "party {party} violates var(x)·var(k) ≥ 1/4 (got {product})"
                )));
            }
        }
        let mut sym = [[0.0; 4]; 4];
        for (i, row) in sym.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[(i, j)];
            }
        }
        Ok(Self { mean, cov: sym })
    }

    /// Two-mode squeezed vacuum with squeezing `r ≥ 0`.
    pub fn tmsv(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidGaussian(format!(
                "squeezing {r} must be finite and ≥ 0"
            )));
        }
        let c = 0.5 * (2.0 * r).cosh();
        let s = 0.5 * (2.0 * r).sinh();
        Self::new(
            [0.0; 4],
            [
                [c, 0.0, s, 0.0],
                [0.0, c, 0.0, -s],
                [s, 0.0, c, 0.0],
                [0.0, -s, 0.0, c],
            ],
        )
    }

    /// Product state with independent quadratures of the given variances.
    pub fn uncorrelated(variances: [f64; 4]) -> Result<Self> {
        let mut cov = [[0.0; 4]; 4];
        for (i, v) in variances.into_iter().enumerate() {
            cov[i][i] = v;
        }
        Self::new([0.0; 4], cov)
    }

    /// x → s·x, k → k/s on both parties.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        let f = [s, 1.0 / s, s, 1.0 / s];
        let mut cov = self.cov;
        for (i, row) in cov.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= f[i] * f[j];
            }
        }
        let mut mean = self.mean;
        for (m, fi) in mean.iter_mut().zip(f) {
            *m *= fi;
        }
        Self::new(mean, cov)
    }

    pub fn mean(&self) -> &[f64; 4] {
        &self.mean
    }

    pub fn cov(&self) -> &[[f64; 4]; 4] {
        &self.cov
    }

    pub fn variance(&self, q: Quadrature) -> f64 {
        self.cov[q.index()][q.index()]
    }

    pub fn covariance(&self, a: Quadrature, b: Quadrature) -> f64 {
        self.cov[a.index()][b.index()]
    }

    /// 2×2 covariance of (a, b).
    pub fn pair_cov(&self, a: Quadrature, b: Quadrature) -> [[f64; 2]; 2] {
        [
            [self.variance(a), self.covariance(a, b)],
            [self.covariance(b, a), self.variance(b)],
        ]
    }
}

/// ½ log₂(2πe·variance).
pub fn gaussian_differential_entropy(variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::NonpositiveVariance(variance));
    }
    Ok(0.5 * (2.0 * PI * E * variance).log2())
}

/// Schur complement σ²_t − cov(t, g)² / σ²_g.
pub fn conditional_variance(g: &GaussianState, target: Quadrature, given: Quadrature) -> f64 {
    let c = g.covariance(target, given);
    g.variance(target) - c * c / g.variance(given)
}

/// log₂(πe), the conditional-entropy steering bound.
pub fn conditional_cv_bound() -> f64 {
    (PI * E).log2()
}

/// h(x^B|x^A) + h(k^B|k^A) ≥ log₂(πe).
pub fn steering_conditional_cv(g: &GaussianState) -> Result<CvWitnessReport> {
    let vx = conditional_variance(g, Quadrature::XB, Quadrature::XA);
    let vk = conditional_variance(g, Quadrature::KB, Quadrature::KA);
    let hx = gaussian_differential_entropy(vx)?;
    let hk = gaussian_differential_entropy(vk)?;
    let bound = conditional_cv_bound();
    let components = [
        ("h(x_B|x_A)", hx),
        ("h(k_B|k_A)", hk),
        ("var(x_B|x_A)", vx),
        ("var(k_B|k_A)", vk),
        ("log2(pi e)", bound),
    ];
    Ok(WitnessReport::new(
        "steering-conditional-cv",
        Relation::AtLeast,
        hx + hk,
        bound,
        components
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    ))
}

fn party_bound(g: &GaussianState, x: Quadrature, k: Quadrature) -> f64 {
    (2.0 * (g.variance(x) * g.variance(k)).sqrt()).log2()
}

/// h(B) − h(B|A) for one quadrature pair.
fn gaussian_mi(g: &GaussianState, a: Quadrature, b: Quadrature) -> Result<f64> {
    Ok(gaussian_differential_entropy(g.variance(b))?
        - gaussian_differential_entropy(conditional_variance(g, b, a))?)
}

fn symmetric_report(
    g: &GaussianState,
    inequality: &'static str,
    ix: f64,
    ik: f64,
) -> CvWitnessReport {
    let ba = party_bound(g, Quadrature::XA, Quadrature::KA);
    let bb = party_bound(g, Quadrature::XB, Quadrature::KB);
    let components = [
        ("I(x_A:x_B)", ix),
        ("I(k_A:k_B)", ik),
        ("log2(2 sigma_xA sigma_kA)", ba),
        ("log2(2 sigma_xB sigma_kB)", bb),
    ];
    WitnessReport::new(
        inequality,
        Relation::AtMost,
        ix + ik,
        ba.max(bb),
        components
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    )
}

/// h(x^A:x^B) + h(k^A:k^B) ≤ max_i log₂(2 σ_{x^i} σ_{k^i}).
pub fn steering_symmetric_cv(g: &GaussianState) -> Result<CvWitnessReport> {
    let ix = gaussian_mi(g, Quadrature::XA, Quadrature::XB)?;
    let ik = gaussian_mi(g, Quadrature::KA, Quadrature::KB)?;
    Ok(symmetric_report(g, "steering-symmetric-cv", ix, ik))
}

/// Bins for each of the four quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureBins {
    pub x_a: BinningSpec,
    pub x_b: BinningSpec,
    pub k_a: BinningSpec,
    pub k_b: BinningSpec,
}

impl QuadratureBins {
    /// One spec for both parties' x, another for both parties' k.
    pub fn shared(x: BinningSpec, k: BinningSpec) -> Self {
        Self {
            x_a: x,
            x_b: x,
            k_a: k,
            k_b: k,
        }
    }

    /// `count` bins over ±`span_sigmas` marginal deviations of each quadrature.
    pub fn scaled(g: &GaussianState, count: usize, span_sigmas: f64) -> Result<Self> {
        let spec = |q| BinningSpec::centered(g.variance(q).sqrt(), span_sigmas, count);
        Ok(Self {
            x_a: spec(Quadrature::XA)?,
            x_b: spec(Quadrature::XB)?,
            k_a: spec(Quadrature::KA)?,
            k_b: spec(Quadrature::KB)?,
        })
    }
}

/// H(X^A:X^B) + H(K^A:K^B) ≤ max_i log₂(2 σ_{x^i} σ_{k^i}), with `spec_x`
/// binning both parties' x and `spec_k` both parties' k.
pub fn steering_symmetric_binned(
    g: &GaussianState,
    spec_x: &BinningSpec,
    spec_k: &BinningSpec,
) -> Result<CvWitnessReport> {
    steering_symmetric_binned_with(
        g,
        &QuadratureBins::shared(*spec_x, *spec_k),
        Execution::default(),
    )
}

pub fn steering_symmetric_binned_with(
    g: &GaussianState,
    bins: &QuadratureBins,
    exec: Execution,
) -> Result<CvWitnessReport> {
    let x = bin_bivariate_gaussian_with(
        g.pair_cov(Quadrature::XA, Quadrature::XB),
        &bins.x_a,
        &bins.x_b,
        exec,
    )?;
    let k = bin_bivariate_gaussian_with(
        g.pair_cov(Quadrature::KA, Quadrature::KB),
        &bins.k_a,
        &bins.k_b,
        exec,
    )?;
    Ok(symmetric_report(
        g,
        "steering-symmetric-binned",
        x.mutual_information(),
        k.mutual_information(),
    ))
}
