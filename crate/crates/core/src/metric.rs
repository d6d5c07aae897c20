//! Pointwise linear algebra for metrics on torus bundles.
//!
//! Metrics are sampled: each sample is the Gram matrix at one point in a
//! frame `(x_1..x_b, y_1..y_f)` split into base and fiber coordinates. Pulling
//! back along the lattice cover `ℝ^f/nΛ → ℝ^f/Λ` in fiber coordinates that
//! keep the period lattice fixed is the congruence by `diag(I, nI)`, so fiber
//! directions grow like `n` and fiber covectors shrink like `1/n`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational, RationalText};

/// Smallest eigenvalue accepted for a positive-definite sample.
pub const PD_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for the symmetry of a sample.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("sample {index}: expected {expected} entries, got {got}")]
    SampleShape { index: usize, expected: usize, got: usize },
    #[error("sample {index} is not symmetric")]
    NotSymmetric { index: usize },
    #[error("sample {index} is not positive-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { index: usize, min_eigenvalue: f64 },
    #[error("metric has no samples")]
    NoSamples,
    #[error("scale factor must be at least 1, got {0}")]
    BadScale(u64),
    #[error("form is {got}×{got}, metric is {expected}×{expected}")]
    FormShape { expected: usize, got: usize },
    #[error("form is not antisymmetric")]
    NotAntisymmetric,
    #[error("metric sample is singular")]
    Singular,
    #[error("fiber dimension {fiber_dim} cannot carry {k} symplectic pairs")]
    FiberTooSmall { fiber_dim: usize, k: usize },
    #[error("decay fit needs at least 4 strictly increasing n spanning 2 octaves: {0}")]
    BadSampleSet(String),
    #[error("all norms vanish; slope undefined")]
    DegenerateFit,
    #[error("scalar curvature bound must be positive, got {0}")]
    NonPositiveCurvature(f64),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("odd total dimension {0}; no symplectic form")]
    OddDimension(usize),
}

pub type Result<T> = std::result::Result<T, MetricError>;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMetric {
    base_dim: usize,
    fiber_dim: usize,
    samples: Vec<DMatrix<f64>>,
}

impl BlockMetric {
    pub fn new(base_dim: usize, fiber_dim: usize, samples: Vec<DMatrix<f64>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(MetricError::NoSamples);
        }
        let n = base_dim + fiber_dim;
        for (index, s) in samples.iter().enumerate() {
            if s.nrows() != n || s.ncols() != n {
                return Err(MetricError::SampleShape {
                    index,
                    expected: n * n,
                    got: s.len(),
                });
            }
            let scale = s.amax().max(f64::MIN_POSITIVE);
            if (s - s.transpose()).amax() > SYMMETRY_TOLERANCE * scale {
                return Err(MetricError::NotSymmetric { index });
            }
            let min_eigenvalue = s.clone().symmetric_eigen().eigenvalues.min();
            if min_eigenvalue <= PD_TOLERANCE {
                return Err(MetricError::NotPositiveDefinite {
                    index,
                    min_eigenvalue,
                });
            }
        }
        Ok(BlockMetric {
            base_dim,
            fiber_dim,
            samples,
        })
    }

    /// Samples given as row-major `(b+f)²` arrays.
    pub fn from_row_major(base_dim: usize, fiber_dim: usize, samples: &[Vec<f64>]) -> Result<Self> {
        let n = base_dim + fiber_dim;
        let mut mats = Vec::with_capacity(samples.len());
        for (index, s) in samples.iter().enumerate() {
            if s.len() != n * n {
                return Err(MetricError::SampleShape {
                    index,
                    expected: n * n,
                    got: s.len(),
                });
            }
            mats.push(DMatrix::from_row_slice(n, n, s));
        }
        Self::new(base_dim, fiber_dim, mats)
    }

    pub fn identity(base_dim: usize, fiber_dim: usize) -> Self {
        let n = base_dim + fiber_dim;
        BlockMetric {
            base_dim,
            fiber_dim,
            samples: vec![DMatrix::identity(n, n)],
        }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim + self.fiber_dim
    }

    pub fn samples(&self) -> &[DMatrix<f64>] {
        &self.samples
    }

    /// Product with a unit-length circle appended as a new last fiber
    /// direction.
    pub fn with_unit_circle(&self) -> Self {
        let n = self.total_dim();
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let mut out = DMatrix::zeros(n + 1, n + 1);
                out.view_mut((0, 0), (n, n)).copy_from(s);
                out[(n, n)] = 1.0;
                out
            })
            .collect();
        BlockMetric {
            base_dim: self.base_dim,
            fiber_dim: self.fiber_dim + 1,
            samples,
        }
    }
}

/// `[[A, B], [Bᵀ, C]] ↦ [[A, nB], [nBᵀ, n²C]]` on every sample.
pub fn scale_metric(h: &BlockMetric, n: u64) -> Result<BlockMetric> {
    if n < 1 {
        return Err(MetricError::BadScale(n));
    }
    let nf = n as f64;
    let b = h.base_dim;
    let samples = h
        .samples
        .iter()
        .map(|s| {
            let mut out = s.clone();
            for i in 0..out.nrows() {
                for j in 0..out.ncols() {
                    let factor = match (i < b, j < b) {
                        (true, true) => 1.0,
                        (false, false) => nf * nf,
                        _ => nf,
                    };
                    out[(i, j)] *= factor;
                }
            }
            out
        })
        .collect();
    Ok(BlockMetric {
        base_dim: h.base_dim,
        fiber_dim: h.fiber_dim,
        samples,
    })
}

/// Pointwise norm of a 2-form with coefficient matrix `φ` (so that
/// `φ = Σ_{a<b} φ_ab dx^a∧dx^b`): `|φ|² = ½ Σ φ_ab φ_cd g^ac g^bd`.
pub fn two_form_norm(sample: &DMatrix<f64>, form: &DMatrix<f64>) -> Result<f64> {
    let n = sample.nrows();
    if form.nrows() != n || form.ncols() != n {
        return Err(MetricError::FormShape {
            expected: n,
            got: form.nrows(),
        });
    }
    let scale = form.amax().max(f64::MIN_POSITIVE);
    if (form + form.transpose()).amax() > SYMMETRY_TOLERANCE * scale {
        return Err(MetricError::NotAntisymmetric);
    }
    let inv = sample
        .clone()
        .cholesky()
        .ok_or(MetricError::Singular)?
        .inverse();
    // ½ tr(g⁻¹ φ g⁻¹ φᵀ)
    let m = &inv * form * &inv * form.transpose();
    Ok((0.5 * m.trace()).max(0.0).sqrt())
}

/// Coefficient matrix of `ω = Σ_{i=1..k} dy_{2i−1}∧dy_{2i}` in a frame with
/// `base_dim` base coordinates first.
pub fn standard_fiber_form(base_dim: usize, fiber_dim: usize, k: usize) -> Result<DMatrix<f64>> {
    if 2 * k > fiber_dim {
        return Err(MetricError::FiberTooSmall { fiber_dim, k });
    }
    let n = base_dim + fiber_dim;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..k {
        let (a, b) = (base_dim + 2 * i, base_dim + 2 * i + 1);
        w[(a, b)] = 1.0;
        w[(b, a)] = -1.0;
    }
    Ok(w)
}

/// `max` over samples of `|ω|_h` for the standard fiber form with `k` pairs.
pub fn max_omega_norm(h: &BlockMetric, k: usize) -> Result<f64> {
    let w = standard_fiber_form(h.base_dim, h.fiber_dim, k)?;
    let mut best: f64 = 0.0;
    for s in &h.samples {
        best = best.max(two_form_norm(s, &w)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub n_values: Vec<u64>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub r_squared: f64,
}

impl DecayReport {
    /// `n,norm` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,norm\n");
        for (n, v) in self.n_values.iter().zip(&self.norms) {
            out.push_str(&format!("{n},{v:e}\n"));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!("slope = {:.2}, r^2 = {:.6}", self.fitted_slope, self.r_squared)
    }
}

/// Least-squares slope and r² of `y` against `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, r2)
}

/// Norm of `ω` under `h_n` for each `n`, with a log–log fit of the decay.
pub fn decay_rate(h: &BlockMetric, k: usize, n_set: &[u64]) -> Result<DecayReport> {
    if n_set.len() < 4 {
        return Err(MetricError::BadSampleSet(format!("{} values", n_set.len())));
    }
    if n_set.windows(2).any(|w| w[0] >= w[1]) || n_set[0] == 0 {
        return Err(MetricError::BadSampleSet("values must be positive and strictly increasing".into()));
    }
    if n_set[n_set.len() - 1] < 4 * n_set[0] {
        return Err(MetricError::BadSampleSet("range spans fewer than 2 octaves".into()));
    }
    let mut norms = Vec::with_capacity(n_set.len());
    for &n in n_set {
        norms.push(max_omega_norm(&scale_metric(h, n)?, k)?);
    }
    if norms.iter().any(|&v| v <= 0.0) {
        return Err(MetricError::DegenerateFit);
    }
    // base-2 logarithms keep powers of two exact
    let x: Vec<f64> = n_set.iter().map(|&n| (n as f64).log2()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.log2()).collect();
    let (fitted_slope, r_squared) = fit_line(&x, &y);
    Ok(DecayReport {
        n_values: n_set.to_vec(),
        norms,
        fitted_slope,
        r_squared,
    })
}

/// Default bound on the Clifford curvature term: the number of pairs `i < j`
/// in a frame of the given dimension.
pub fn default_weitzenbock_constant(dim_total: usize) -> f64 {
    (dim_total * dim_total.saturating_sub(1)) as f64 / 2.0
}

/// Curvature term `C·2π·|ω|_h / n²` at scale `n`.
pub fn curvature_term(constant: f64, norm_at_1: f64, n: u64) -> f64 {
    let nf = n as f64;
    constant * 2.0 * PI * norm_at_1 / (nf * nf)
}

/// Smallest `n ≥ 1` with `C·2π·|ω|_h / n² < s_min`.
pub fn weitzenbock_threshold(s_min: f64, dim_total: usize, norm_at_1: f64, c_override: Option<f64>) -> Result<u64> {
    if !s_min.is_finite() || s_min <= 0.0 {
        return Err(MetricError::NonPositiveCurvature(s_min));
    }
    if !norm_at_1.is_finite() || norm_at_1 < 0.0 {
        return Err(MetricError::Argument(format!("norm {norm_at_1} must be finite and nonnegative")));
    }
    let c = c_override.unwrap_or_else(|| default_weitzenbock_constant(dim_total));
    if !c.is_finite() || c <= 0.0 {
        return Err(MetricError::Argument(format!("constant {c} must be positive")));
    }
    let holds = |n: u64| curvature_term(c, norm_at_1, n) < s_min;
    let ratio = c * 2.0 * PI * norm_at_1 / s_min;
    if !ratio.is_finite() || ratio >= 1e36 {
        return Err(MetricError::Argument("threshold exceeds representable range".into()));
    }
    let mut n = (ratio.sqrt().floor() as u64).saturating_add(1).max(1);
    while n > 1 && holds(n - 1) {
        n -= 1;
    }
    while !holds(n) {
        n += 1;
    }
    Ok(n)
}

/// Exact Pfaffian of an antisymmetric rational matrix, by congruence
/// elimination on pivot pairs.
pub fn pfaffian(matrix: &[Vec<Rational>]) -> Result<Rational> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(MetricError::FormShape { expected: n, got: 0 });
    }
    for i in 0..n {
        for j in 0..n {
            if matrix[i][j] != -matrix[j][i].clone() {
                return Err(MetricError::NotAntisymmetric);
            }
        }
    }
    if n % 2 == 1 {
        return Ok(Rational::zero());
    }
    let mut a: Vec<Vec<Rational>> = matrix.to_vec();
    let mut pf = rational::int(1);
    let swap = |a: &mut Vec<Vec<Rational>>, p: usize, q: usize| {
        a.swap(p, q);
        for row in a.iter_mut() {
            row.swap(p, q);
        }
    };
    for i in (0..n).step_by(2) {
        let Some(j) = (i + 1..n).find(|&j| !a[i][j].is_zero()) else {
            return Ok(Rational::zero());
        };
        if j != i + 1 {
            swap(&mut a, i + 1, j);
            pf = -pf;
        }
        let pivot = a[i][i + 1].clone();
        pf *= &pivot;
        // clear row/column i and i+1 beyond the pivot block
        for r in i + 2..n {
            let f = &a[i][r] / &pivot;
            let g = &a[i + 1][r] / &pivot;
            // col_r ← col_r − f·col_{i+1} + g·col_i, and likewise for rows
            if !f.is_zero() || !g.is_zero() {
                for row in 0..n {
                    let v = &a[row][r] - &f * &a[row][i + 1] + &g * &a[row][i];
                    a[row][r] = v;
                }
                for col in 0..n {
                    let v = &a[r][col] - &f * &a[i + 1][col] + &g * &a[i][col];
                    a[r][col] = v;
                }
            }
        }
    }
    Ok(pf)
}

/// Whether `π*σ + ω` is nondegenerate, with `σ` an antisymmetric form on the
/// base block and `ω` the standard form on `2k` fiber directions.
pub fn symplectic_nondegeneracy(sigma_block: &[Vec<Rational>], k: usize) -> Result<bool> {
    let b = sigma_block.len();
    if b % 2 == 1 {
        return Err(MetricError::OddDimension(b + 2 * k));
    }
    let n = b + 2 * k;
    let mut full = vec![vec![Rational::zero(); n]; n];
    for (i, row) in sigma_block.iter().enumerate() {
        if row.len() != b {
            return Err(MetricError::FormShape { expected: b, got: row.len() });
        }
        for (j, v) in row.iter().enumerate() {
            full[i][j] = v.clone();
        }
    }
    for i in 0..k {
        full[b + 2 * i][b + 2 * i + 1] = rational::int(1);
        full[b + 2 * i + 1][b + 2 * i] = rational::int(-1);
    }
    Ok(!pfaffian(&full)?.is_zero())
}

/// File form of metric data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFile {
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub samples: Vec<SampleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_min: Option<f64>,
}

/// A sample as a flat row-major list or as nested rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleEntry {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

impl MetricFile {
    pub fn to_metric(&self) -> Result<BlockMetric> {
        let flat: Vec<Vec<f64>> = self
            .samples
            .iter()
            .map(|s| match s {
                SampleEntry::Flat(v) => v.clone(),
                SampleEntry::Rows(r) => r.concat(),
            })
            .collect();
        BlockMetric::from_row_major(self.base_dim, self.fiber_dim, &flat)
    }
}

/// Antisymmetric base form for [`symplectic_nondegeneracy`], read from text
/// entries such as `"1/2"`.
pub fn parse_form(rows: &[Vec<RationalText>]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().map(|q| q.0.clone()).collect())
        .collect()
}
