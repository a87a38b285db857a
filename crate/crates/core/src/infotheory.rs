//! Classical information measures in bits, and binning of bivariate normal
//! distributions into discrete joint tables.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::par::{self, Execution};
use crate::qstate::{ProbabilityVector, TOL_PROB};
use crate::quadrature::{self, Tolerance};
use crate::{Error, Result};

/// −Σ p log₂ p with 0·log 0 = 0. Nonpositive entries are skipped.
pub fn entropy_bits(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    h.max(0.0)
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(p.as_slice())
}

/// Which side of a bipartite table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// Joint outcome probabilities; rows index party A, columns party B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl JointDistribution {
    /// Row-major table. Entries in `[-τ, 0)` are clipped to zero.
    pub fn new(rows: usize, cols: usize, table: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || table.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: table.len(),
            });
        }
        let table = ProbabilityVector::new(table)?.as_slice().to_vec();
        Ok(Self { rows, cols, table })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: rows.iter().map(Vec::len).find(|&l| l != cols).unwrap_or(0),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Independent joint distribution p ⊗ q.
    pub fn product(p: &[f64], q: &[f64]) -> Result<Self> {
        let table = p
            .iter()
            .flat_map(|&a| q.iter().map(move |&b| a * b))
            .collect();
        Self::new(p.len(), q.len(), table)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.table[i * self.cols + j]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    pub fn marginal(&self, party: Party) -> Vec<f64> {
        match party {
            Party::A => (0..self.rows)
                .map(|i| self.table[i * self.cols..(i + 1) * self.cols].iter().sum())
                .collect(),
            Party::B => (0..self.cols)
                .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
                .collect(),
        }
    }

    /// Same table with rows and columns reordered: entry (i, j) of the result
    /// is entry (row_perm[i], col_perm[j]) of `self`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<Self> {
        let table = row_perm
            .iter()
            .flat_map(|&i| col_perm.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self::new(row_perm.len(), col_perm.len(), table)
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_bits(&self.table)
    }

    pub fn marginal_entropy(&self, party: Party) -> f64 {
        entropy_bits(&self.marginal(party))
    }

    /// H(other | given) = H(A, B) − H(given).
    pub fn conditional_entropy(&self, given: Party) -> f64 {
        self.joint_entropy() - self.marginal_entropy(given)
    }

    /// H(A) + H(B) − H(A, B).
    pub fn mutual_information(&self) -> f64 {
        self.marginal_entropy(Party::A) + self.marginal_entropy(Party::B) - self.joint_entropy()
    }
}

pub fn joint_entropy(d: &JointDistribution) -> f64 {
    d.joint_entropy()
}

pub fn conditional_entropy(d: &JointDistribution, given: Party) -> f64 {
    d.conditional_entropy(given)
}

pub fn mutual_information(d: &JointDistribution) -> f64 {
    d.mutual_information()
}

/// Uniform bins `[lower + k·width, lower + (k+1)·width)`, `k < count`. The
/// first and last bins also absorb everything below and above the range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub lower: f64,
    pub width: f64,
    pub count: usize,
}

/// Bins used when the caller gives none.
pub const DEFAULT_BIN_COUNT: usize = 64;
/// Half-range of the default bins, in marginal standard deviations.
pub const DEFAULT_SPAN_SIGMAS: f64 = 6.0;

impl BinningSpec {
    pub fn new(lower: f64, width: f64, count: usize) -> Result<Self> {
        let spec = Self {
            lower,
            width,
            count,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `count` bins spanning `±span_sigmas·sigma` around zero.
    pub fn centered(sigma: f64, span_sigmas: f64, count: usize) -> Result<Self> {
        let half = span_sigmas * sigma;
        Self::new(-half, 2.0 * half / count as f64, count)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidBinning(format!(
                "width {} must be positive",
                self.width
            )));
        }
        if !self.lower.is_finite() {
            return Err(Error::InvalidBinning("lower edge must be finite".into()));
        }
        if self.count < 2 {
            return Err(Error::InvalidBinning(format!(
                "count {} must be at least 2",
                self.count
            )));
        }
        Ok(())
    }

    /// Same range, twice as many bins.
    pub fn refined(&self) -> Self {
        Self {
            lower: self.lower,
            width: self.width / 2.0,
            count: self.count * 2,
        }
    }

    /// Bin boundaries with the outer ones at ±∞.
    fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = (0..=self.count)
            .map(|k| self.lower + self.width * k as f64)
            .collect();
        e[0] = f64::NEG_INFINITY;
        e[self.count] = f64::INFINITY;
        e
    }
}

/// Per-cell absolute tolerance on binned probabilities.
pub const BIN_CELL_TOLERANCE: f64 = 1e-10;

const BIN_TOLERANCE: Tolerance = Tolerance {
    target: 1e-13,
    reject: BIN_CELL_TOLERANCE,
    max_intervals: 4000,
};

// Mass of a normal beyond 12σ is below 4e-33.
const TAIL_SIGMAS: f64 = 12.0;

fn std_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

fn std_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Standard-normal mass of `[lo, hi)`, evaluated in the tail that keeps precision.
fn std_interval(lo: f64, hi: f64) -> f64 {
    if lo >= 0.0 {
        std_sf(lo) - std_sf(hi)
    } else {
        std_cdf(hi) - std_cdf(lo)
    }
}

/// Bins a zero-mean bivariate normal with covariance `cov`.
pub fn bin_bivariate_gaussian(
    cov: [[f64; 2]; 2],
    spec_a: &BinningSpec,
    spec_b: &BinningSpec,
) -> Result<JointDistribution> {
    bin_bivariate_gaussian_with(cov, spec_a, spec_b, Execution::default())
}

/// Cell (i, j) is ∫_{bin i} φ_A(x) [Φ((e_{j+1} − βx)/s) − Φ((e_j − βx)/s)] dx,
/// with β and s the regression slope and residual deviation of B on A.
/// Rows are integrated independently and may run in parallel.
pub fn bin_bivariate_gaussian_with(
    cov: [[f64; 2]; 2],
    spec_a: &BinningSpec,
    spec_b: &BinningSpec,
    exec: Execution,
) -> Result<JointDistribution> {
    spec_a.validate()?;
    spec_b.validate()?;
    let [[vaa, vab], [vba, vbb]] = cov;
    let scale = vaa.abs().max(vbb.abs()).max(f64::MIN_POSITIVE);
    if !cov.iter().flatten().all(|v| v.is_finite()) || (vab - vba).abs() > 1e-10 * scale {
        return Err(Error::NotPositiveDefinite);
    }
    let det = vaa * vbb - vab * vab;
    if !(vaa > 0.0 && vbb > 0.0 && det > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let sigma_a = vaa.sqrt();
    let slope = vab / vaa;
    let resid = (det / vaa).sqrt();
    // x-scale on which a column transition sweeps past
    let feature = if slope == 0.0 {
        sigma_a
    } else {
        sigma_a.min(resid / slope.abs())
    };

    let edges_a = spec_a.edges();
    let edges_b = spec_b.edges();
    let ncols = spec_b.count;
    let tail = TAIL_SIGMAS * sigma_a;
    let norm = (2.0 * PI * vaa).sqrt().recip();

    let integrand = |x: f64, out: &mut [f64]| {
        let density = norm * (-0.5 * x * x / vaa).exp();
        let z = |e: f64| (e - slope * x) / resid;
        let mut lo = z(edges_b[0]);
        for (j, cell) in out.iter_mut().enumerate() {
            let hi = z(edges_b[j + 1]);
            *cell = density * std_interval(lo, hi);
            lo = hi;
        }
    };

    let rows: Vec<Result<Vec<f64>>> = par::map_indexed(exec, spec_a.count, |i| {
        let lo = edges_a[i].max(-tail);
        let hi = edges_a[i + 1].min(tail);
        if hi <= lo {
            return Ok(vec![0.0; ncols]);
        }
        let pieces = ((hi - lo) / (0.5 * feature)).ceil().clamp(1.0, 1000.0) as usize;
        quadrature::integrate(integrand, lo, hi, ncols, pieces, BIN_TOLERANCE)
    });
    let mut table = Vec::with_capacity(spec_a.count * ncols);
    for row in rows {
        table.extend(row?.into_iter().map(|p| p.max(0.0)));
    }
    let total: f64 = table.iter().sum();
    if (total - 1.0).abs() > TOL_PROB {
        return Err(Error::QuadratureFailure((total - 1.0).abs()));
    }
    JointDistribution::new(spec_a.count, ncols, table)
}

/// −½ log₂(1 − ρ²): mutual information of a bivariate normal with correlation ρ.
pub fn gaussian_mutual_information(cov: [[f64; 2]; 2]) -> f64 {
    let corr2 = cov[0][1] * cov[0][1] / (cov[0][0] * cov[1][1]);
    -0.5 * (1.0 - corr2).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn jd(rows: &[Vec<f64>]) -> JointDistribution {
        JointDistribution::from_rows(rows).unwrap()
    }

    #[test]
    fn shannon_examples() {
        let h = |v: Vec<f64>| shannon_entropy(&ProbabilityVector::new(v).unwrap());
        assert_abs_diff_eq!(h(vec![0.5, 0.5]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h(vec![1.0, 0.0]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h(vec![0.5, 0.25, 0.25]), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn joint_and_conditional_examples() {
        let anti = jd(&[vec![0.0, 0.5], vec![0.5, 0.0]]);
        let unif = jd(&[vec![0.25, 0.25], vec![0.25, 0.25]]);
        let point = jd(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert_abs_diff_eq!(anti.joint_entropy(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(unif.joint_entropy(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(point.joint_entropy(), 0.0, epsilon = 1e-15);

        assert_abs_diff_eq!(anti.conditional_entropy(Party::A), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(unif.conditional_entropy(Party::A), 1.0, epsilon = 1e-15);
        let prod = JointDistribution::product(&[0.5, 0.5], &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let h13 = -(1.0 / 3.0f64) * (1.0 / 3.0f64).log2() - (2.0 / 3.0f64) * (2.0 / 3.0f64).log2();
        assert_abs_diff_eq!(prod.conditional_entropy(Party::A), h13, epsilon = 1e-12);
        assert_abs_diff_eq!(h13, 0.9183, epsilon = 1e-4);
    }

    #[test]
    fn mutual_information_examples() {
        assert_abs_diff_eq!(
            jd(&[vec![0.0, 0.5], vec![0.5, 0.0]]).mutual_information(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            jd(&[vec![0.25, 0.25], vec![0.25, 0.25]]).mutual_information(),
            0.0,
            epsilon = 1e-15
        );
        // H(A) = H(1/2,1/2) = 1, H(B) = H(3/4,1/4), H(AB) = H(1/2,0,1/4,1/4) = 1.5
        let hb = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        let mi = jd(&[vec![0.5, 0.0], vec![0.25, 0.25]]).mutual_information();
        assert_abs_diff_eq!(mi, 1.0 + hb - 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(mi, 0.3113, epsilon = 1e-4);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(JointDistribution::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(JointDistribution::from_rows(&[vec![0.5], vec![0.25, 0.25]]).is_err());
        assert!(JointDistribution::new(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn binning_spec_validation() {
        assert!(BinningSpec::new(0.0, 0.0, 4).is_err());
        assert!(BinningSpec::new(0.0, 1.0, 1).is_err());
        assert!(BinningSpec::new(f64::NAN, 1.0, 4).is_err());
        let s = BinningSpec::centered(2.0, 6.0, 64).unwrap();
        assert_abs_diff_eq!(s.lower, -12.0);
        assert_abs_diff_eq!(s.width, 0.375);
    }

    #[test]
    fn binning_independent_gaussians() {
        let spec = BinningSpec::centered(1.0, 6.0, 64).unwrap();
        let d = bin_bivariate_gaussian([[1.0, 0.0], [0.0, 1.0]], &spec, &spec).unwrap();
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
        assert!(d.mutual_information() <= 1e-6);
        // marginals match the 1D normal bin masses
        let pa = d.marginal(Party::A);
        let e = spec.edges();
        for i in 0..spec.count {
            assert_abs_diff_eq!(pa[i], std_interval(e[i], e[i + 1]), epsilon = 1e-12);
        }
    }

    #[test]
    fn binning_two_bins_caps_at_one_bit() {
        let spec = BinningSpec::new(-1.0, 1.0, 2).unwrap();
        let d = bin_bivariate_gaussian([[1.0, 0.999], [0.999, 1.0]], &spec, &spec).unwrap();
        let mi = d.mutual_information();
        assert!(mi <= 1.0 && mi > 0.5, "mi = {mi}");
    }

    #[test]
    fn binning_orthant_probability() {
        // P(X<0, Y<0) = 1/4 + asin(ρ)/(2π) for a standard bivariate normal
        let spec = BinningSpec::new(-1.0, 1.0, 2).unwrap();
        for &rho in &[-0.9, -0.3, 0.0, 0.5, 0.95] {
            let d = bin_bivariate_gaussian([[1.0, rho], [rho, 1.0]], &spec, &spec).unwrap();
            let exact = 0.25 + rho.asin() / (2.0 * PI);
            assert_abs_diff_eq!(d.get(0, 0), exact, epsilon = 1e-11);
            assert_abs_diff_eq!(d.get(1, 1), exact, epsilon = 1e-11);
        }
    }

    #[test]
    fn binning_correlated_099() {
        // Reference value from an independent scipy quadrature of the same cells.
        let cov = [[1.0, 0.99], [0.99, 1.0]];
        let spec = BinningSpec::centered(1.0, 6.0, 64).unwrap();
        let d = bin_bivariate_gaussian(cov, &spec, &spec).unwrap();
        let mi = d.mutual_information();
        let analytic = gaussian_mutual_information(cov);
        assert_abs_diff_eq!(analytic, 2.825_543_879_502_899, epsilon = 1e-12);
        assert!(mi <= analytic + 1e-9);
        assert_abs_diff_eq!(mi, 2.643_389_654_909_748, epsilon = 1e-7);
    }

    #[test]
    fn binning_rejects_indefinite() {
        let spec = BinningSpec::centered(1.0, 6.0, 8).unwrap();
        assert_eq!(
            bin_bivariate_gaussian([[1.0, 1.0], [1.0, 1.0]], &spec, &spec),
            Err(Error::NotPositiveDefinite)
        );
        assert_eq!(
            bin_bivariate_gaussian([[1.0, 0.2], [0.3, 1.0]], &spec, &spec),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn binning_modes_are_bit_identical() {
        let cov = [[2.0, -1.1], [-1.1, 0.8]];
        let a = BinningSpec::centered(2f64.sqrt(), 6.0, 32).unwrap();
        let b = BinningSpec::new(-2.0, 0.3, 17).unwrap();
        let s = bin_bivariate_gaussian_with(cov, &a, &b, Execution::Sequential).unwrap();
        let p = bin_bivariate_gaussian_with(cov, &a, &b, Execution::Parallel).unwrap();
        assert_eq!(s, p);
    }

    fn arb_table() -> impl Strategy<Value = JointDistribution> {
        (2usize..5, 2usize..5).prop_flat_map(|(r, c)| {
            prop::collection::vec(0.0f64..1.0, r * c).prop_filter_map("nonzero", move |v| {
                let s: f64 = v.iter().sum();
                (s > 1e-3).then(|| {
                    JointDistribution::new(r, c, v.iter().map(|x| x / s).collect()).unwrap()
                })
            })
        })
    }

    proptest! {
        #[test]
        fn chain_rule(d in arb_table()) {
            let lhs = d.joint_entropy();
            let rhs = d.marginal_entropy(Party::A) + d.conditional_entropy(Party::A);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
            prop_assert!(d.conditional_entropy(Party::A) >= -1e-12);
            prop_assert!(d.conditional_entropy(Party::A) <= d.marginal_entropy(Party::B) + 1e-12);
        }

        #[test]
        fn mutual_information_nonnegative_and_permutation_invariant(
            d in arb_table(), seed in any::<u64>()
        ) {
            let mi = d.mutual_information();
            prop_assert!(mi >= -1e-12);
            let mut rp: Vec<usize> = (0..d.rows()).collect();
            let mut cp: Vec<usize> = (0..d.cols()).collect();
            rp.rotate_left((seed % d.rows() as u64) as usize);
            cp.reverse();
            let p = d.permuted(&rp, &cp).unwrap();
            prop_assert!((p.mutual_information() - mi).abs() <= 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn binning_respects_data_processing_and_refinement(
            va in 0.2f64..3.0, vb in 0.2f64..3.0, corr in -0.97f64..0.97,
            bins in 2usize..12, lo_a in -4.0f64..-0.5, lo_b in -4.0f64..-0.5,
        ) {
            let c = corr * (va * vb).sqrt();
            let cov = [[va, c], [c, vb]];
            let sa = BinningSpec::new(lo_a * va.sqrt(), -2.0 * lo_a * va.sqrt() / bins as f64, bins).unwrap();
            let sb = BinningSpec::new(lo_b * vb.sqrt(), -2.0 * lo_b * vb.sqrt() / bins as f64, bins).unwrap();
            let coarse = bin_bivariate_gaussian(cov, &sa, &sb).unwrap().mutual_information();
            let fine = bin_bivariate_gaussian(cov, &sa.refined(), &sb.refined()).unwrap().mutual_information();
            let bound = gaussian_mutual_information(cov);
            prop_assert!(coarse <= bound + 1e-9);
            prop_assert!(fine <= bound + 1e-9);
            prop_assert!(fine >= coarse - 1e-9, "coarse {} fine {}", coarse, fine);
        }
    }
}
