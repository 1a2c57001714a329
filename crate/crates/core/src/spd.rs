//! Affine-invariant geometry of symmetric positive-definite matrices.
//!
//! Covariance matrices of multichannel signals live on the SPD cone, and the
//! natural notion of interpolation and averaging there is not Euclidean: the
//! geodesic between two SPD matrices under the affine-invariant metric is
//!
//! ```text
//! A #_λ B = A^{1/2} (A^{-1/2} B A^{-1/2})^λ A^{1/2},   λ ∈ [0, 1]
//! ```
//!
//! and its length is the Riemannian distance
//! `‖log(A^{-1/2} B A^{-1/2})‖_F`. This module provides those two
//! primitives, the matrix functions they are built from (powers, log, exp via
//! symmetric eigendecomposition), and the weighted Fréchet (Karcher) mean,
//! which generalizes the geometric mean to sets of matrices.
//!
//! Everything here is a pure function of its inputs; values are immutable
//! after construction and can be shared freely across threads.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative asymmetry tolerated at construction, scaled by `max|A[i,j]|`.
const SYMMETRY_TOL: f64 = 1e-10;
/// Reject matrices whose smallest eigenvalue is below this fraction of the
/// largest: downstream logs and inverse square roots would amplify noise
/// instead of failing loudly.
const CONDITION_FLOOR: f64 = 1e-12;
/// Fixed-point iteration cap for the Fréchet mean. Tight clusters converge
/// in a handful of steps; widely dispersed inputs (log-spectrum spread of
/// several units) decay the gradient by only ~2/3 per step and can need
/// over a hundred iterations to reach the tolerance below.
const MEAN_MAX_ITER: usize = 200;
/// Convergence threshold on the Frobenius norm of the tangent-space gradient.
const MEAN_GRAD_TOL: f64 = 1e-9;
/// Smallest backtracking step the mean iteration will try before declaring
/// the objective numerically stuck.
const MEAN_MIN_STEP: f64 = 1.0 / 1_048_576.0;
/// A step also counts as progress if it shrinks the gradient norm by this
/// factor. Near the optimum the per-step objective decrease (~‖gradient‖²)
/// falls below f64 rounding of the objective itself long before the gradient
/// reaches tolerance, so the objective test alone cannot certify those last
/// contractions.
const MEAN_GRAD_CONTRACTION: f64 = 0.9;

/// Errors from SPD construction and manifold operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifoldError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error(
        "matrix is not symmetric: asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NotSymmetric { asymmetry: f64, tolerance: f64 },
    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:.6e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error(
        "matrix is too ill-conditioned: eigenvalues span [{min_eigenvalue:.3e}, {max_eigenvalue:.3e}]; regularize upstream"
    )]
    IllConditioned {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix power exponent must be finite, got {exponent}")]
    NonFiniteExponent { exponent: f64 },
    #[error("interpolation position {lambda} is outside [0, 1]")]
    LambdaOutOfRange { lambda: f64 },
    #[error("cannot average an empty list of matrices")]
    EmptyInput,
    #[error("{weights} weights provided for {matrices} matrices")]
    WeightCountMismatch { weights: usize, matrices: usize },
    #[error("weight {index} is {value}; weights must be finite and nonnegative")]
    InvalidWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, expected 1 within 1e-9")]
    WeightSumNotOne { sum: f64 },
    #[error(
        "mean iteration did not converge after {iterations} iterations (gradient norm {gradient_norm:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },
}

/// A symmetric positive-definite matrix, validated at construction.
///
/// Construction symmetrizes the input (`(A + Aᵀ)/2`) after checking that the
/// asymmetry is within round-off tolerance, then verifies via eigendecomposition
/// that all eigenvalues are strictly positive and that the matrix is not
/// numerically singular. Every operation that produces a new matrix re-runs
/// this validation, so an `SpdMatrix` in hand is always a usable point on the
/// manifold.
///
/// Serializes as `{ "dim": C, "values": [..] }` with values in row-major
/// order; deserialization re-validates.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "RawSpdMatrix", into = "RawSpdMatrix")]
pub struct SpdMatrix {
    mat: DMatrix<f64>,
}

/// Row-major wire form of [`SpdMatrix`].
#[derive(serde::Serialize, serde::Deserialize)]
struct RawSpdMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl TryFrom<RawSpdMatrix> for SpdMatrix {
    type Error = ManifoldError;

    fn try_from(raw: RawSpdMatrix) -> Result<Self, ManifoldError> {
        if raw.values.len() != raw.dim * raw.dim {
            return Err(ManifoldError::NotSquare {
                rows: raw.dim,
                cols: raw
                    .values
                    .len()
                    .checked_div(raw.dim)
                    .unwrap_or(raw.values.len()),
            });
        }
        SpdMatrix::new(DMatrix::from_row_slice(raw.dim, raw.dim, &raw.values))
    }
}

impl From<SpdMatrix> for RawSpdMatrix {
    fn from(spd: SpdMatrix) -> Self {
        let dim = spd.dim();
        let mut values = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                values.push(spd.mat[(i, j)]);
            }
        }
        RawSpdMatrix { dim, values }
    }
}

impl SpdMatrix {
    /// Validates and wraps a dense matrix.
    ///
    /// The input must be square, finite, symmetric within
    /// `1e-10 · max|A[i,j]|`, and strictly positive definite with
    /// `λ_min > 1e-12 · λ_max`. The stored matrix is the symmetric part
    /// `(A + Aᵀ)/2` of the input.
    pub fn new(mat: DMatrix<f64>) -> Result<Self, ManifoldError> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(ManifoldError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.iter().any(|v| !v.is_finite()) {
            return Err(ManifoldError::NonFinite);
        }
        let scale = mat.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tolerance = SYMMETRY_TOL * scale;
        let mut asymmetry = 0.0_f64;
        for i in 0..mat.nrows() {
            for j in (i + 1)..mat.ncols() {
                asymmetry = asymmetry.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        if asymmetry > tolerance {
            return Err(ManifoldError::NotSymmetric {
                asymmetry,
                tolerance,
            });
        }
        let mat = symmetric_part(&mat);
        let eig = EigenDecomposition::of_symmetric(&mat);
        let min = eig.eigenvalues[0];
        let max = eig.eigenvalues[eig.eigenvalues.len() - 1];
        if min <= 0.0 {
            return Err(ManifoldError::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        if min <= CONDITION_FLOOR * max {
            return Err(ManifoldError::IllConditioned {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
        Ok(SpdMatrix { mat })
    }

    /// Matrix order C.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Borrow the underlying dense matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Consume and return the underlying dense matrix.
    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// Matrix power `Aᵖ = V diag(wᵖ) Vᵀ` for any finite real exponent.
    ///
    /// Because the eigenvalues are positive, the result is SPD for every `p`
    /// (`p = 0` gives the identity, negative `p` the inverse powers).
    pub fn powf(&self, p: f64) -> Result<SpdMatrix, ManifoldError> {
        if !p.is_finite() {
            return Err(ManifoldError::NonFiniteExponent { exponent: p });
        }
        let eig = EigenDecomposition::of_symmetric(&self.mat);
        SpdMatrix::new(eig.map(|w| w.powf(p)))
    }

    /// Matrix inverse `A⁻¹`.
    pub fn inverse(&self) -> Result<SpdMatrix, ManifoldError> {
        self.powf(-1.0)
    }

    /// Principal matrix logarithm `log A = V diag(log w) Vᵀ`.
    ///
    /// The result is symmetric but generally indefinite, so it is returned as
    /// a plain matrix rather than an [`SpdMatrix`].
    pub fn log(&self) -> DMatrix<f64> {
        EigenDecomposition::of_symmetric(&self.mat).map(f64::ln)
    }
}

/// Matrix exponential of a symmetric matrix: `exp S = V diag(exp w) Vᵀ`.
///
/// The exponential of any symmetric matrix is SPD; this is the inverse of
/// [`SpdMatrix::log`] (`spd_exp(A.log()) == A` within round-off).
pub fn spd_exp(s: &DMatrix<f64>) -> Result<SpdMatrix, ManifoldError> {
    if s.nrows() != s.ncols() || s.nrows() == 0 {
        return Err(ManifoldError::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(ManifoldError::NonFinite);
    }
    let scale = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut asymmetry = 0.0_f64;
    for i in 0..s.nrows() {
        for j in (i + 1)..s.ncols() {
            asymmetry = asymmetry.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(ManifoldError::NotSymmetric {
            asymmetry,
            tolerance: SYMMETRY_TOL * scale,
        });
    }
    let eig = EigenDecomposition::of_symmetric(&symmetric_part(s));
    SpdMatrix::new(eig.map(f64::exp))
}

/// Point at position `lambda` on the geodesic from `a` to `b`:
/// `A^{1/2} (A^{-1/2} B A^{-1/2})^λ A^{1/2}`.
///
/// The endpoints are returned exactly (`λ = 0` clones `a`, `λ = 1` clones
/// `b`); interior points are computed from one eigendecomposition of `a` and
/// one of the whitened matrix.
pub fn geodesic(a: &SpdMatrix, b: &SpdMatrix, lambda: f64) -> Result<SpdMatrix, ManifoldError> {
    if a.dim() != b.dim() {
        return Err(ManifoldError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(ManifoldError::LambdaOutOfRange { lambda });
    }
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    if lambda == 1.0 {
        return Ok(b.clone());
    }
    let eig_a = EigenDecomposition::of_symmetric(&a.mat);
    let sqrt_a = eig_a.map(f64::sqrt);
    let inv_sqrt_a = eig_a.map(|w| 1.0 / w.sqrt());
    let whitened = symmetric_part(&(&inv_sqrt_a * &b.mat * &inv_sqrt_a));
    let powered = EigenDecomposition::of_symmetric(&whitened).map(|w| w.powf(lambda));
    SpdMatrix::new(symmetric_part(&(&sqrt_a * powered * &sqrt_a)))
}

/// Length of the geodesic between `a` and `b` under the affine-invariant
/// metric: `sqrt(Σ_k log² λ_k(A⁻¹B))`.
///
/// Symmetric in its arguments, zero exactly when `a == b`, and invariant
/// under congruence (`A ↦ GAGᵀ`) and inversion.
pub fn riemann_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64, ManifoldError> {
    if a.dim() != b.dim() {
        return Err(ManifoldError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let inv_sqrt_a = EigenDecomposition::of_symmetric(&a.mat).map(|w| 1.0 / w.sqrt());
    let whitened = symmetric_part(&(&inv_sqrt_a * &b.mat * &inv_sqrt_a));
    let eig = EigenDecomposition::of_symmetric(&whitened);
    let mut sum = 0.0;
    for &w in eig.eigenvalues.iter() {
        if w <= 0.0 {
            // Congruence of an SPD matrix stays SPD; reaching this means the
            // inputs were degenerate enough to destroy that numerically.
            return Err(ManifoldError::NotPositiveDefinite { min_eigenvalue: w });
        }
        sum += w.ln().powi(2);
    }
    Ok(sum.sqrt())
}

/// Weighted Fréchet (Karcher) mean of SPD matrices under the
/// affine-invariant metric.
///
/// Returns the matrix `M` minimizing `Σ_i w_i · d²(M, A_i)`, found by the
/// fixed-point iteration
///
/// ```text
/// M ← M^{1/2} exp( Σ_i w_i log(M^{-1/2} A_i M^{-1/2}) ) M^{1/2}
/// ```
///
/// initialized at the weighted arithmetic mean and converged when the
/// tangent-space gradient `Σ_i w_i log(M^{-1/2} A_i M^{-1/2})` has Frobenius
/// norm ≤ 1e-9. The unit step is taken whenever it does not increase the
/// weighted sum of squared distances (for moderately dispersed inputs it
/// never does, and the iteration is the classical fixed point); a step that
/// would overshoot is halved until the objective stops getting worse, which
/// keeps the descent property — and hence global convergence — on widely
/// dispersed inputs too.
///
/// Weights must be finite, nonnegative, and sum to 1 within 1e-9.
pub fn frechet_mean(mats: &[SpdMatrix], weights: &[f64]) -> Result<SpdMatrix, ManifoldError> {
    if mats.is_empty() {
        return Err(ManifoldError::EmptyInput);
    }
    if weights.len() != mats.len() {
        return Err(ManifoldError::WeightCountMismatch {
            weights: weights.len(),
            matrices: mats.len(),
        });
    }
    let dim = mats[0].dim();
    for m in mats.iter().skip(1) {
        if m.dim() != dim {
            return Err(ManifoldError::DimensionMismatch {
                left: dim,
                right: m.dim(),
            });
        }
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ManifoldError::InvalidWeight { index, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(ManifoldError::WeightSumNotOne { sum });
    }

    // Weighted arithmetic mean: a cheap SPD starting point.
    let mut current = DMatrix::<f64>::zeros(dim, dim);
    for (m, &w) in mats.iter().zip(weights) {
        current += m.matrix() * w;
    }

    let mut pass = mean_pass(&current, mats, weights)?;
    let mut iterations = 0;
    while iterations < MEAN_MAX_ITER {
        if pass.gradient_norm <= MEAN_GRAD_TOL {
            return SpdMatrix::new(current);
        }
        let mut step = 1.0;
        // Sufficient-decrease test. The directional derivative along the
        // tangent is −‖gradient‖², so a step of size t should buy roughly
        // t·‖gradient‖²; demanding a small fraction of that rejects the
        // classical overshoot bounce (which returns to an equal objective
        // with an undiminished gradient). The noise floor keeps the test
        // permissive once decrements sink below f64 rounding. A step that
        // contracts the gradient norm outright is also accepted: in the
        // endgame the objective is flat to machine precision while the
        // fixed-point map still shrinks the gradient geometrically, and
        // that shrinkage is the only measurable sign of progress left.
        let noise_floor = 16.0 * f64::EPSILON * (1.0 + pass.objective);
        let slope = pass.gradient_norm * pass.gradient_norm;
        loop {
            let scaled = &pass.tangent * step;
            let exp_step = EigenDecomposition::of_symmetric(&scaled).map(f64::exp);
            let candidate = symmetric_part(&(&pass.sqrt * exp_step * &pass.sqrt));
            let candidate_pass = mean_pass(&candidate, mats, weights)?;
            if candidate_pass.objective <= pass.objective - 1e-4 * step * slope + noise_floor
                || candidate_pass.gradient_norm <= MEAN_GRAD_CONTRACTION * pass.gradient_norm
            {
                current = candidate;
                pass = candidate_pass;
                break;
            }
            step *= 0.5;
            if step < MEAN_MIN_STEP {
                // Not even a tiny move along the gradient helps: the
                // objective is at its numerical floor short of tolerance.
                return Err(ManifoldError::NoConvergence {
                    iterations,
                    gradient_norm: pass.gradient_norm,
                });
            }
        }
        iterations += 1;
    }
    Err(ManifoldError::NoConvergence {
        iterations,
        gradient_norm: pass.gradient_norm,
    })
}

/// Everything the mean iteration needs at one point: the square root of the
/// point (for stepping away from it), the tangent-space gradient, its norm,
/// and the weighted sum of squared distances (the quantity being minimized,
/// shared by the same matrix logs).
struct MeanPass {
    sqrt: DMatrix<f64>,
    tangent: DMatrix<f64>,
    gradient_norm: f64,
    objective: f64,
}

fn mean_pass(
    point: &DMatrix<f64>,
    mats: &[SpdMatrix],
    weights: &[f64],
) -> Result<MeanPass, ManifoldError> {
    let eig = EigenDecomposition::of_symmetric(point);
    let sqrt = eig.map(f64::sqrt);
    let inv_sqrt = eig.map(|w| 1.0 / w.sqrt());

    let dim = point.nrows();
    let mut tangent = DMatrix::<f64>::zeros(dim, dim);
    let mut objective = 0.0;
    for (m, &w) in mats.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let whitened = symmetric_part(&(&inv_sqrt * m.matrix() * &inv_sqrt));
        let log = EigenDecomposition::of_symmetric(&whitened).map(f64::ln);
        if log.iter().any(|v| !v.is_finite()) {
            return Err(ManifoldError::NonFinite);
        }
        objective += w * log.norm_squared();
        tangent += log * w;
    }
    let gradient_norm = tangent.norm();
    Ok(MeanPass {
        sqrt,
        tangent,
        gradient_norm,
        objective,
    })
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// ascending; the backbone for every matrix function in this module.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues in ascending order.
    pub eigenvalues: DVector<f64>,
    /// Orthogonal matrix whose columns are the matching eigenvectors.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// Factor a symmetric matrix. The caller is responsible for symmetry;
    /// only the lower triangle influences the result.
    pub fn of_symmetric(mat: &DMatrix<f64>) -> Self {
        let eig = mat.clone().symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut eigenvalues = DVector::zeros(n);
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            eigenvalues[k] = eig.eigenvalues[i];
            eigenvectors.set_column(k, &eig.eigenvectors.column(i));
        }
        EigenDecomposition {
            eigenvalues,
            eigenvectors,
        }
    }

    /// Apply a scalar function to the spectrum: `V diag(f(w)) Vᵀ`,
    /// symmetrized to suppress round-off drift.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, &w) in self.eigenvalues.iter().enumerate() {
            let fw = f(w);
            scaled.column_mut(k).scale_mut(fw);
        }
        symmetric_part(&(scaled * self.eigenvectors.transpose()))
    }
}

/// Symmetric part `(A + Aᵀ)/2`.
fn symmetric_part(mat: &DMatrix<f64>) -> DMatrix<f64> {
    (mat + mat.transpose()) * 0.5
}
