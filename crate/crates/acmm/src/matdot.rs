//! MatDot codes and their epsilon-approximate variant.
//!
//! `A` is split into `m` column blocks and `B` into `m` row blocks; worker
//! `i` holds the evaluations of
//!
//! ```text
//! p_A(x) = A_1 + A_2 x + ... + A_m x^{m-1}
//! p_B(x) = B_m + B_{m-1} x + ... + B_1 x^{m-1}
//! ```
//!
//! at its own point and returns their product, an evaluation of
//! `p_C = p_A * p_B`. The product `A*B` is the coefficient of `x^{m-1}` in
//! `p_C`, so `2m-1` workers always suffice. Clustering every evaluation point
//! near zero makes any `m` workers enough, at the price of an entrywise error
//! that shrinks with the cluster radius.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::partition::{BlockGrid, CodeParams};
use crate::poly_algebra::{
    chebyshev_points, ensure_distinct, uniform_points, vandermonde, EvaluationPoints, LsqSolver,
};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// The encoded pair held by one worker.
#[derive(Clone, Debug)]
pub struct MatDotShare {
    pub worker_id: usize,
    pub lambda: f64,
    pub a_tilde: Mat,
    pub b_tilde: Mat,
}

/// One worker's returned product block.
#[derive(Clone, Debug)]
pub struct WorkerResult {
    pub worker_id: usize,
    pub lambda: f64,
    pub c_tilde: Mat,
}

/// Outcome of the approximate decoder: either a matrix whose every entry is
/// within epsilon of the true product, or a declared failure when the
/// minimum-norm coefficient vector exceeds the admissible bound.
#[derive(Clone, Debug)]
pub enum ApproxDecode {
    Decoded(Mat),
    Failure { coeff_norm: f64, bound: f64 },
}

impl ApproxDecode {
    pub fn decoded(self) -> Option<Mat> {
        match self {
            ApproxDecode::Decoded(m) => Some(m),
            ApproxDecode::Failure { .. } => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, ApproxDecode::Failure { .. })
    }
}

/// Spacing of the generated evaluation points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Chebyshev,
    Uniform,
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// `sum_t blocks[t] * lambda^{exps[t]}`, accumulated in block order.
pub(crate) fn eval_block_poly(blocks: &[&Mat], exps: &[i32], lambda: f64) -> Mat {
    let mut acc = Mat::zeros(blocks[0].rows(), blocks[0].cols());
    for (b, &e) in blocks.iter().zip(exps.iter()) {
        acc.axpy(lambda.powi(e), b);
    }
    acc
}

/// Encode a `1 x m` split of `A` and the matching `m x 1` split of `B` at the
/// given points, one share per point.
pub fn encode(
    a_grid: &BlockGrid,
    b_grid: &BlockGrid,
    points: &EvaluationPoints,
) -> Result<Vec<MatDotShare>> {
    if a_grid.grid_rows() != 1 || b_grid.grid_cols() != 1 {
        return Err(Error::ShapeViolation(
            "matdot expects a 1 x m split of A and an m x 1 split of B".into(),
        ));
    }
    let m = a_grid.grid_cols();
    if b_grid.grid_rows() != m {
        return Err(Error::ShapeViolation(format!(
            "A split into {m} blocks but B into {}",
            b_grid.grid_rows()
        )));
    }
    if a_grid.block_cols() != b_grid.block_rows() {
        return Err(Error::ShapeViolation(format!(
            "inner block dimensions {} and {} do not conform",
            a_grid.block_cols(),
            b_grid.block_rows()
        )));
    }
    let a_blocks: Vec<&Mat> = (0..m).map(|j| a_grid.block(0, j)).collect();
    let b_blocks: Vec<&Mat> = (0..m).map(|j| b_grid.block(j, 0)).collect();
    let a_exps: Vec<i32> = (0..m as i32).collect();
    let b_exps: Vec<i32> = (0..m as i32).rev().collect();
    let shares = (0..points.len())
        .map(|i| {
            let lambda = points[i];
            MatDotShare {
                worker_id: i,
                lambda,
                a_tilde: eval_block_poly(&a_blocks, &a_exps, lambda),
                b_tilde: eval_block_poly(&b_blocks, &b_exps, lambda),
            }
        })
        .collect();
    Ok(shares)
}

/// The worker's only job: multiply its encoded inputs.
pub fn worker_multiply(share: &MatDotShare) -> WorkerResult {
    WorkerResult {
        worker_id: share.worker_id,
        lambda: share.lambda,
        c_tilde: share.a_tilde.matmul(&share.b_tilde),
    }
}

// ---------------------------------------------------------------------------
// Evaluation points for the approximate construction
// ---------------------------------------------------------------------------

/// Chebyshev-spaced points satisfying the strict approximate-MatDot bound
/// `|lambda_i| < epsilon / (6 eta^2 sqrt(2m-1) (m-1) m)`.
pub fn eps_points(params: &CodeParams) -> Result<EvaluationPoints> {
    eps_points_with(params, Spacing::Chebyshev, false)
}

/// As [`eps_points`] but under the relaxed admissibility bound
/// `|lambda_i| < min(epsilon / (eta^2 m (m-1)), 1/m)`.
pub fn eps_points_relaxed(params: &CodeParams) -> Result<EvaluationPoints> {
    eps_points_with(params, Spacing::Chebyshev, true)
}

pub fn eps_points_with(
    params: &CodeParams,
    spacing: Spacing,
    relaxed: bool,
) -> Result<EvaluationPoints> {
    params.validate()?;
    let (m, eta, eps) = (params.m, params.eta, params.epsilon);
    if m < 2 {
        return Err(Error::InvalidParams(
            "approximate matdot needs m >= 2 (m = 1 is a single exact worker)".into(),
        ));
    }
    let deg = (2 * m - 1) as f64;
    let bound = if relaxed {
        let b = eps / (eta * eta * (m * (m - 1)) as f64);
        b.min(1.0 / m as f64)
    } else {
        let cap = (3.0 * eta * eta * deg.sqrt()).min(2.0);
        if eps >= cap {
            return Err(Error::EpsilonRange(format!(
                "epsilon {eps} must be below min(2, 3 eta^2 sqrt(2m-1)) = {cap}"
            )));
        }
        eps / (6.0 * eta * eta * deg.sqrt() * ((m - 1) * m) as f64)
    };
    // Strict inequality with margin; the bound itself has no slack to give.
    let gamma = 1.0 / (0.99 * bound);
    match spacing {
        Spacing::Chebyshev => chebyshev_points(params.workers, gamma),
        Spacing::Uniform => uniform_points(params.workers, gamma),
    }
}

/// The strict Construction-2 admissibility radius for `params`.
pub fn eps_bound(params: &CodeParams) -> f64 {
    let deg = ((2 * params.m - 1) as f64).sqrt();
    params.epsilon / (6.0 * params.eta * params.eta * deg * ((params.m - 1) * params.m) as f64)
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

fn result_points(results: &[WorkerResult]) -> Result<Vec<f64>> {
    let lambdas: Vec<f64> = results.iter().map(|r| r.lambda).collect();
    ensure_distinct(&lambdas)?;
    Ok(lambdas)
}

/// Canonical ordering by evaluation point, so a decode is bit-identical under
/// any permutation of the same result set.
fn sort_canonical(results: &mut [WorkerResult]) {
    results.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap()
            .then(a.worker_id.cmp(&b.worker_id))
    });
}

fn check_result_shapes(results: &[WorkerResult]) -> Result<(usize, usize)> {
    let (rows, cols) = (results[0].c_tilde.rows(), results[0].c_tilde.cols());
    for r in results {
        if r.c_tilde.rows() != rows || r.c_tilde.cols() != cols {
            return Err(Error::ShapeViolation("worker outputs disagree in shape".into()));
        }
    }
    Ok((rows, cols))
}

/// Exact decoding from at least `2m-1` results: interpolate the product
/// polynomial entrywise and read off the coefficient of `x^{m-1}`.
///
/// Uses exactly the first `2m-1` results handed in.
pub fn exact_decode(results: &[WorkerResult], m: usize) -> Result<Mat> {
    let need = 2 * m - 1;
    if results.len() < need {
        return Err(Error::InsufficientResults { got: results.len(), need });
    }
    let mut used: Vec<WorkerResult> = results[..need].to_vec();
    sort_canonical(&mut used);
    let used = &used[..];
    let lambdas = result_points(used)?;
    let (rows, cols) = check_result_shapes(used)?;
    let points = EvaluationPoints::new(lambdas)?;
    let v = vandermonde(&points, need)?;
    let solver = LsqSolver::factor(&v);
    if !solver.is_fully_ranked() {
        return Err(Error::RankDeficient);
    }
    let mut out = Mat::zeros(rows, cols);
    let mut y = vec![0.0; need];
    for i in 0..rows {
        for j in 0..cols {
            for (t, r) in used.iter().enumerate() {
                y[t] = r.c_tilde[(i, j)];
            }
            let coeffs = solver.solve(&y);
            out[(i, j)] = coeffs[m - 1];
        }
    }
    Ok(out)
}

/// Approximate decoding from any `K >= m` results at admissible points.
///
/// Every entry is decoded through one shared minimum-norm factorization; a
/// coefficient vector whose 2-norm exceeds `sqrt(2m-1) eta^2` declares
/// failure for the whole decode, as no admissible input can produce one.
pub fn approx_decode(results: &[WorkerResult], params: &CodeParams) -> Result<ApproxDecode> {
    let m = params.m;
    if results.len() < m {
        return Err(Error::InsufficientResults { got: results.len(), need: m });
    }
    let mut sorted: Vec<WorkerResult> = results.to_vec();
    sort_canonical(&mut sorted);
    let results = &sorted[..];
    let lambdas = result_points(results)?;
    let (rows, cols) = check_result_shapes(results)?;
    let points = EvaluationPoints::new(lambdas)?;
    let v = vandermonde(&points, 2 * m - 1)?;
    let solver = LsqSolver::factor(&v);
    let bound = ((2 * m - 1) as f64).sqrt() * params.eta * params.eta;
    let mut out = Mat::zeros(rows, cols);
    let mut y = vec![0.0; results.len()];
    let mut worst_norm = 0.0f64;
    for i in 0..rows {
        for j in 0..cols {
            for (t, r) in results.iter().enumerate() {
                y[t] = r.c_tilde[(i, j)];
            }
            let coeffs = solver.solve(&y);
            let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            worst_norm = worst_norm.max(norm);
            if norm > bound {
                return Ok(ApproxDecode::Failure { coeff_norm: norm, bound });
            }
            out[(i, j)] = coeffs[m - 1];
        }
    }
    Ok(ApproxDecode::Decoded(out))
}

/// The coefficient matrices of `p_C = p_A * p_B`, lowest power first.
///
/// Direct convolution of the block polynomials; used as the independent
/// route when checking interpolation decoders and coefficient-norm bounds.
pub fn product_poly_coeffs(a_grid: &BlockGrid, b_grid: &BlockGrid) -> Result<Vec<Mat>> {
    let m = a_grid.grid_cols();
    if a_grid.grid_rows() != 1 || b_grid.grid_cols() != 1 || b_grid.grid_rows() != m {
        return Err(Error::ShapeViolation("expected matdot splits".into()));
    }
    let rows = a_grid.block_rows();
    let cols = b_grid.block_cols();
    let mut coeffs = vec![Mat::zeros(rows, cols); 2 * m - 1];
    for i in 0..m {
        for j in 0..m {
            // A_i x^i times B_j x^{m-1-j} (zero-based exponents).
            let exp = m - 1 + i - j;
            let prod = a_grid.block(0, i).matmul(b_grid.block(j, 0));
            coeffs[exp].axpy(1.0, &prod);
        }
    }
    Ok(coeffs)
}
