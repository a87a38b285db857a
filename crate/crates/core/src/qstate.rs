//! Finite-dimensional states and projective measurements.
//!
//! A [`DensityOperator`] is validated once at construction (Hermitian, unit
//! trace, positive) and is immutable afterwards. Its clipped spectrum is kept
//! so entropy queries never re-run the eigensolver.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::infotheory::JointDistribution;
use crate::{Error, Result, Violation, C64};

/// Max abs entry defect tolerated for Hermiticity.
pub const TOL_HERMITIAN: f64 = 1e-8;
/// Max abs entry defect tolerated in the Gram matrix of a basis.
pub const TOL_ORTHONORMAL: f64 = 1e-8;
/// Tolerance on unit trace.
pub const TOL_TRACE: f64 = 1e-8;
/// Tolerance on probability normalization.
pub const TOL_PROB: f64 = 1e-8;
/// Most negative eigenvalue accepted as positive.
pub const TOL_PSD: f64 = 1e-9;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 64;

const EIGEN_MAX_ITER: usize = 10_000;

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenFailure)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    for &d in dims {
        if !(MIN_DIM..=MAX_DIM).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
    }
    Ok(dims.iter().product())
}

/// Validated density operator, optionally multipartite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
    dims: Vec<usize>,
    spectrum: Vec<f64>,
}

impl DensityOperator {
    /// Validates `matrix` against every density-operator invariant.
    ///
    /// All violated invariants are reported together in
    /// [`Error::InvalidState`], each with its measured defect.
    pub fn new(matrix: DMatrix<C64>, dims: &[usize]) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let side = check_dims(dims)?;
        if side != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: side,
                found: matrix.nrows(),
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState(vec![Violation::NonHermitian(
                f64::INFINITY,
            )]));
        }

        let mut violations = Vec::new();
        let herm = hermitian_defect(&matrix);
        if herm > TOL_HERMITIAN {
            violations.push(Violation::NonHermitian(herm));
        }
        let trace_defect = (matrix.trace() - C64::new(1.0, 0.0)).norm();
        if trace_defect > TOL_TRACE {
            violations.push(Violation::NonUnitTrace(trace_defect));
        }
        // Eigenvalues of the Hermitian part; meaningful even if the check above failed.
        let hermitised = (&matrix + matrix.adjoint()).scale(0.5);
        let spectrum = hermitian_eigenvalues(&hermitised)?;
        let min_eig = spectrum.first().copied().unwrap_or(0.0);
        if min_eig < -TOL_PSD {
            violations.push(Violation::NotPositive(-min_eig));
        }
        if !violations.is_empty() {
            return Err(Error::InvalidState(violations));
        }

        let spectrum = spectrum.into_iter().map(|l| l.clamp(0.0, 1.0)).collect();
        Ok(Self {
            matrix: hermitised,
            dims: dims.to_vec(),
            spectrum,
        })
    }

    /// Diagonal operator with the given populations.
    pub fn diagonal(populations: &[f64], dims: &[usize]) -> Result<Self> {
        let d = DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p, 0.0)),
        );
        Self::new(DMatrix::from_diagonal(&d), dims)
    }

    /// |ψ⟩⟨ψ| for a (re-normalized) state vector.
    pub fn pure(psi: &DVector<C64>, dims: &[usize]) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState(vec![Violation::NonUnitTrace(1.0)]));
        }
        let psi = psi.unscale(norm);
        Self::new(&psi * psi.adjoint(), dims)
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let n = check_dims(dims)?;
        Self::new(DMatrix::identity(n, n).unscale(n as f64), dims)
    }

    /// ρ ⊗ σ, with subsystem lists concatenated.
    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        let dims: Vec<usize> = self.dims.iter().chain(&other.dims).copied().collect();
        Self::new(self.matrix.kronecker(&other.matrix), &dims)
    }

    /// Convex combination Σ w_k ρ_k. All states must share `dims`.
    pub fn mixture(weights: &[f64], states: &[DensityOperator]) -> Result<Self> {
        let first = states
            .first()
            .ok_or(Error::InvalidEnsemble("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: weights.len(),
            });
        }
        ProbabilityVector::new(weights.to_vec())?;
        let n = first.dim();
        let mut acc = DMatrix::<C64>::zeros(n, n);
        for (w, s) in weights.iter().zip(states) {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.dim(),
                });
            }
            acc += s.matrix.scale(*w);
        }
        Self::new(acc, &first.dims)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues clipped to [0, 1], ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Reduced state on subsystem `keep`.
    pub fn partial_trace(&self, keep: usize) -> Result<DensityOperator> {
        if keep >= self.dims.len() {
            return Err(Error::BadSubsystem {
                index: keep,
                count: self.dims.len(),
            });
        }
        let before: usize = self.dims[..keep].iter().product();
        let d = self.dims[keep];
        let after: usize = self.dims[keep + 1..].iter().product();
        let reduced = DMatrix::from_fn(d, d, |a, b| {
            let mut acc = C64::new(0.0, 0.0);
            for x in 0..before {
                for y in 0..after {
                    acc += self.matrix[((x * d + a) * after + y, (x * d + b) * after + y)];
                }
            }
            acc
        });
        Self::new(reduced, &[d])
    }

    /// ρ^{T_B} on a bipartite operator (transpose of the second factor).
    pub fn partial_transpose(&self) -> Result<DMatrix<C64>> {
        let (da, db) = self.bipartite_dims()?;
        Ok(DMatrix::from_fn(da * db, da * db, |r, c| {
            let (a, b) = (r / db, r % db);
            let (a2, b2) = (c / db, c % db);
            self.matrix[(a * db + b2, a2 * db + b)]
        }))
    }

    /// Peres–Horodecki test. A `Some(true)` answer certifies separability,
    /// which the criterion only does for 2⊗2 and 2⊗3 systems; a negative
    /// partial transpose always certifies entanglement (`Some(false)`).
    pub fn certified_separable(&self) -> Result<Option<bool>> {
        let (da, db) = self.bipartite_dims()?;
        let pt = self.partial_transpose()?;
        let min = hermitian_eigenvalues(&pt)?[0];
        if min < -TOL_PSD {
            Ok(Some(false))
        } else if da * db <= 6 {
            Ok(Some(true))
        } else {
            Ok(None)
        }
    }

    pub(crate) fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            [a, b] => Ok((*a, *b)),
            other => Err(Error::NotBipartite(other.len())),
        }
    }

    /// −Tr ρ log₂ ρ.
    pub fn von_neumann_entropy(&self) -> f64 {
        crate::infotheory::entropy_bits(&self.spectrum)
    }
}

/// Free-function form of [`DensityOperator::new`].
pub fn validate_density(matrix: DMatrix<C64>, dims: &[usize]) -> Result<DensityOperator> {
    DensityOperator::new(matrix, dims)
}

pub fn partial_trace(rho: &DensityOperator, keep: usize) -> Result<DensityOperator> {
    rho.partial_trace(keep)
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.von_neumann_entropy()
}

/// Orthonormal basis defining a rank-1 projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableBasis {
    label: String,
    vectors: Vec<DVector<C64>>,
}

impl ObservableBasis {
    pub fn new(label: impl Into<String>, vectors: Vec<DVector<C64>>) -> Result<Self> {
        let n = vectors.len();
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let ip = vectors[i].dotc(&vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((ip - C64::new(target, 0.0)).norm());
            }
        }
        if defect > TOL_ORTHONORMAL || !defect.is_finite() {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self {
            label: label.into(),
            vectors,
        })
    }

    /// Basis from the columns of a unitary matrix.
    pub fn from_columns(label: impl Into<String>, u: &DMatrix<C64>) -> Result<Self> {
        Self::new(label, u.column_iter().map(|c| c.into_owned()).collect())
    }

    pub fn computational(n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| DVector::from_fn(n, |k, _| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0)))
            .collect();
        Self::new("computational", vectors).expect("computational basis")
    }

    /// Discrete Fourier basis, mutually unbiased to the computational one.
    pub fn fourier(n: usize) -> Self {
        let scale = (n as f64).sqrt().recip();
        let vectors = (0..n)
            .map(|j| {
                DVector::from_fn(n, |k, _| {
                    C64::from_polar(scale, 2.0 * PI * (j * k) as f64 / n as f64)
                })
            })
            .collect();
        Self::new("fourier", vectors).expect("fourier basis")
    }

    pub fn sigma_z() -> Self {
        Self::computational(2).with_label("sigma_z")
    }

    pub fn sigma_x() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = |a: f64, b: f64| DVector::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)]);
        Self::new("sigma_x", vec![v(s, s), v(s, -s)]).expect("sigma_x basis")
    }

    pub fn sigma_y() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = |b: C64| DVector::from_vec(vec![C64::new(s, 0.0), b]);
        Self::new("sigma_y", vec![v(C64::new(0.0, s)), v(C64::new(0.0, -s))])
            .expect("sigma_y basis")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// U applied to every basis vector.
    pub fn rotated(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Self::new(
            self.label.clone(),
            self.vectors.iter().map(|v| u * v).collect(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[DVector<C64>] {
        &self.vectors
    }

    /// Matrix whose columns are the basis vectors.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_columns(&self.vectors)
    }

    /// Born-rule outcome probabilities of `rho` (a raw matrix of matching side).
    pub(crate) fn born(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| (v.adjoint() * rho * v)[(0, 0)].re.max(0.0))
            .collect()
    }
}

/// Nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates and clips entries in `[-τ, 0)` to zero.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidProbability(1.0));
        }
        let mut defect = 0.0f64;
        for &p in &entries {
            if !p.is_finite() {
                return Err(Error::InvalidProbability(f64::INFINITY));
            }
            defect = defect.max(-p).max(p - 1.0);
        }
        defect = defect.max((entries.iter().sum::<f64>() - 1.0).abs());
        if defect > TOL_PROB {
            return Err(Error::InvalidProbability(defect));
        }
        Ok(Self(entries.into_iter().map(|p| p.max(0.0)).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Point mass on `index`.
    pub fn deterministic(n: usize, index: usize) -> Self {
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Born-rule outcome distribution of `basis` on a single-system `rho`.
pub fn marginal_distribution(
    rho: &DensityOperator,
    basis: &ObservableBasis,
) -> Result<ProbabilityVector> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: basis.dim(),
        });
    }
    ProbabilityVector::new(basis.born(rho.matrix()))
}

/// P(i, j) = Tr(ρ |a_i⟩⟨a_i| ⊗ |b_j⟩⟨b_j|) on a bipartite state.
pub fn joint_distribution(
    rho: &DensityOperator,
    basis_a: &ObservableBasis,
    basis_b: &ObservableBasis,
) -> Result<JointDistribution> {
    let (da, db) = rho.bipartite_dims()?;
    if basis_a.dim() != da {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: basis_a.dim(),
        });
    }
    if basis_b.dim() != db {
        return Err(Error::DimensionMismatch {
            expected: db,
            found: basis_b.dim(),
        });
    }
    // diag(U† ρ U) with U = A ⊗ B
    let u = basis_a.to_matrix().kronecker(&basis_b.to_matrix());
    let w = rho.matrix() * &u;
    let table: Vec<f64> = (0..da * db)
        .map(|k| {
            u.column(k)
                .iter()
                .zip(w.column(k).iter())
                .map(|(x, y)| (x.conj() * y).re)
                .sum::<f64>()
                .max(0.0)
        })
        .collect();
    JointDistribution::new(da, db, table)
}
