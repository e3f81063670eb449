//! PolyDot (entangled polynomial) codes and their epsilon-approximate
//! variant.
//!
//! With `A` split `p x q` and `B` split `q x p`, block `A_{i,j}` rides on
//! exponent `q(i-1) + (j-1)` and block `B_{k,l}` on `q-k + pq(l-1)`. In the
//! product polynomial the output block `C_{i,l}` is the coefficient of
//! `y^{iq + pq(l-1) - 1}`, so full interpolation needs `p^2 q + q - 1`
//! workers. Near-zero evaluation points cut that to `p^2 q`: each block is
//! extracted by the explicit last row of an inverse Vandermonde over just
//! enough points, and the ignored higher-order terms contribute an
//! entrywise error of at most epsilon.
//!
//! Decoding a block at exponent `d - 1` from points of size `delta` divides
//! by `delta^{d-1}`; for the larger blocks that signal can sit below what
//! `f64` worker outputs even represent, so the straggler simulator drives
//! this code through the exact-rational path in [`precise`].

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::matdot::{eval_block_poly, WorkerResult};
use crate::partition::{BlockGrid, CodeParams};
use crate::poly_algebra::{
    chebyshev_points, ensure_distinct, vandermonde, vandermonde_inverse_last_row,
    EvaluationPoints, LsqSolver,
};

/// The encoded pair held by one worker.
#[derive(Clone, Debug)]
pub struct PolyDotShare {
    pub worker_id: usize,
    pub lambda: f64,
    pub a_tilde: Mat,
    pub b_tilde: Mat,
}

/// Row-major exponents for the blocks of `A`: `q*i + j` at grid `(i, j)`,
/// zero-based.
pub fn a_exponents(p: usize, q: usize) -> Vec<i32> {
    let mut exps = Vec::with_capacity(p * q);
    for i in 0..p {
        for j in 0..q {
            exps.push((q * i + j) as i32);
        }
    }
    exps
}

/// Row-major exponents for the blocks of `B`: `(q-1-k) + p*q*l` at grid
/// `(k, l)`, zero-based.
pub fn b_exponents(p: usize, q: usize) -> Vec<i32> {
    let mut exps = Vec::with_capacity(p * q);
    for k in 0..q {
        for l in 0..p {
            exps.push((q - 1 - k + p * q * l) as i32);
        }
    }
    exps
}

/// Number of points the per-block decoder uses for output block `(i, l)`
/// (zero-based): the block's coefficient exponent plus one.
pub fn block_point_count(p: usize, q: usize, i: usize, l: usize) -> usize {
    (i + 1) * q + p * q * l
}

/// Recovery threshold of the exact decoder: `p^2 q + q - 1`.
pub fn exact_threshold(p: usize, q: usize) -> usize {
    p * p * q + q - 1
}

/// Recovery threshold of the approximate decoder: `p^2 q`.
pub fn approx_threshold(p: usize, q: usize) -> usize {
    p * p * q
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// Encode a `p x q` split of `A` and the matching `q x p` split of `B`.
///
/// With `p = 1` this reduces to MatDot encoding, bit for bit.
pub fn encode(
    a_grid: &BlockGrid,
    b_grid: &BlockGrid,
    points: &EvaluationPoints,
) -> Result<Vec<PolyDotShare>> {
    let (p, q) = (a_grid.grid_rows(), a_grid.grid_cols());
    if b_grid.grid_rows() != q || b_grid.grid_cols() != p {
        return Err(Error::ShapeViolation(format!(
            "A split {p}x{q} needs B split {q}x{p}, got {}x{}",
            b_grid.grid_rows(),
            b_grid.grid_cols()
        )));
    }
    if a_grid.block_cols() != b_grid.block_rows() {
        return Err(Error::ShapeViolation(format!(
            "inner block dimensions {} and {} do not conform",
            a_grid.block_cols(),
            b_grid.block_rows()
        )));
    }
    let a_blocks: Vec<&Mat> = a_grid.blocks().iter().collect();
    let b_blocks: Vec<&Mat> = b_grid.blocks().iter().collect();
    let a_exps = a_exponents(p, q);
    let b_exps = b_exponents(p, q);
    let shares = (0..points.len())
        .map(|i| {
            let lambda = points[i];
            PolyDotShare {
                worker_id: i,
                lambda,
                a_tilde: eval_block_poly(&a_blocks, &a_exps, lambda),
                b_tilde: eval_block_poly(&b_blocks, &b_exps, lambda),
            }
        })
        .collect();
    Ok(shares)
}

pub fn worker_multiply(share: &PolyDotShare) -> WorkerResult {
    WorkerResult {
        worker_id: share.worker_id,
        lambda: share.lambda,
        c_tilde: share.a_tilde.matmul(&share.b_tilde),
    }
}

/// Chebyshev-spaced points satisfying the approximate-PolyDot bound
/// `|lambda_i| < min(epsilon / (eta^2 q (p^2 q - 1)), 1 / (p^2 q - 1))`.
pub fn eps_points(params: &CodeParams) -> Result<EvaluationPoints> {
    params.validate()?;
    let (p, q) = (params.p, params.q);
    if p * p * q < 2 {
        return Err(Error::InvalidParams("p^2 q must be at least 2".into()));
    }
    let denom = (p * p * q - 1) as f64;
    let bound = (params.epsilon / (params.eta * params.eta * q as f64 * denom)).min(1.0 / denom);
    chebyshev_points(params.workers, 1.0 / (0.99 * bound))
}

/// The admissibility radius used by [`eps_points`].
pub fn eps_bound(params: &CodeParams) -> f64 {
    let denom = (params.p * params.p * params.q - 1) as f64;
    (params.epsilon / (params.eta * params.eta * params.q as f64 * denom)).min(1.0 / denom)
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

fn validate_results(results: &[WorkerResult], need: usize) -> Result<()> {
    if results.len() < need {
        return Err(Error::InsufficientResults { got: results.len(), need });
    }
    let lambdas: Vec<f64> = results.iter().map(|r| r.lambda).collect();
    ensure_distinct(&lambdas)?;
    let (r0, c0) = (results[0].c_tilde.rows(), results[0].c_tilde.cols());
    if r0 != c0 {
        return Err(Error::ShapeViolation("polydot worker outputs must be square".into()));
    }
    for r in results {
        if r.c_tilde.rows() != r0 || r.c_tilde.cols() != c0 {
            return Err(Error::ShapeViolation("worker outputs disagree in shape".into()));
        }
    }
    Ok(())
}

/// Indices of the `d` smallest-magnitude points, deterministic under ties.
///
/// The per-block estimator's error bound grows with the largest point it
/// touches, so the smallest survivors are the natural choice.
fn smallest_points(results: &[WorkerResult], d: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..results.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&results[a], &results[b]);
        ra.lambda
            .abs()
            .partial_cmp(&rb.lambda.abs())
            .unwrap()
            .then(ra.lambda.partial_cmp(&rb.lambda).unwrap())
            .then(ra.worker_id.cmp(&rb.worker_id))
    });
    idx.truncate(d);
    idx
}

fn assemble_blocks(blocks: &[Mat], p: usize) -> Mat {
    let (br, bc) = (blocks[0].rows(), blocks[0].cols());
    let mut out = Mat::zeros(p * br, p * bc);
    for i in 0..p {
        for l in 0..p {
            let b = &blocks[i * p + l];
            for r in 0..br {
                for c in 0..bc {
                    out[(i * br + r, l * bc + c)] = b[(r, c)];
                }
            }
        }
    }
    out
}

/// Approximate decoding from any `K >= p^2 q` results at admissible points.
///
/// Each output block `(i, l)` takes the `d = (i+1)q + pq*l` smallest points
/// and applies the inverse-Vandermonde last row to their outputs.
pub fn approx_decode(results: &[WorkerResult], params: &CodeParams) -> Result<Mat> {
    let (p, q) = (params.p, params.q);
    validate_results(results, approx_threshold(p, q))?;
    let mut blocks = Vec::with_capacity(p * p);
    for i in 0..p {
        for l in 0..p {
            let d = block_point_count(p, q, i, l);
            let chosen = smallest_points(results, d);
            let pts = EvaluationPoints::new(chosen.iter().map(|&t| results[t].lambda).collect())?;
            let weights = vandermonde_inverse_last_row(&pts)?;
            let mut block = Mat::zeros(results[0].c_tilde.rows(), results[0].c_tilde.cols());
            for (w, &t) in weights.iter().zip(chosen.iter()) {
                block.axpy(*w, &results[t].c_tilde);
            }
            blocks.push(block);
        }
    }
    Ok(assemble_blocks(&blocks, p))
}

/// Exact decoding from at least `p^2 q + q - 1` results at generic points:
/// interpolate the product polynomial entrywise and read each block off its
/// exponent.
///
/// Uses exactly the first `p^2 q + q - 1` results. Generic (well-spread)
/// points are assumed; at approximate-construction points this system is
/// violently ill-conditioned and the approximate decoder is the right tool.
pub fn exact_decode(results: &[WorkerResult], params: &CodeParams) -> Result<Mat> {
    let (p, q) = (params.p, params.q);
    let need = exact_threshold(p, q);
    validate_results(results, need)?;
    // Canonical point order, so permuted inputs decode bit-identically.
    let mut used: Vec<WorkerResult> = results[..need].to_vec();
    used.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap()
            .then(a.worker_id.cmp(&b.worker_id))
    });
    let used = &used[..];
    let points = EvaluationPoints::new(used.iter().map(|r| r.lambda).collect())?;
    let v = vandermonde(&points, need)?;
    let solver = LsqSolver::factor(&v);
    if !solver.is_fully_ranked() {
        return Err(Error::RankDeficient);
    }
    let (br, bc) = (used[0].c_tilde.rows(), used[0].c_tilde.cols());
    let mut coeff_mats = vec![Mat::zeros(br, bc); need];
    let mut y = vec![0.0; need];
    for r in 0..br {
        for c in 0..bc {
            for (t, res) in used.iter().enumerate() {
                y[t] = res.c_tilde[(r, c)];
            }
            let coeffs = solver.solve(&y);
            for (e, cm) in coeff_mats.iter_mut().enumerate() {
                cm[(r, c)] = coeffs[e];
            }
        }
    }
    let mut blocks = Vec::with_capacity(p * p);
    for i in 0..p {
        for l in 0..p {
            let exp = block_point_count(p, q, i, l) - 1;
            blocks.push(coeff_mats[exp].clone());
        }
    }
    Ok(assemble_blocks(&blocks, p))
}

/// The coefficient matrices of `p_C = p_A * p_B`, lowest power first
/// (length `p^2 q + q - 1`).
pub fn product_poly_coeffs(a_grid: &BlockGrid, b_grid: &BlockGrid) -> Result<Vec<Mat>> {
    let (p, q) = (a_grid.grid_rows(), a_grid.grid_cols());
    if b_grid.grid_rows() != q || b_grid.grid_cols() != p {
        return Err(Error::ShapeViolation("expected polydot splits".into()));
    }
    let a_exps = a_exponents(p, q);
    let b_exps = b_exponents(p, q);
    let rows = a_grid.block_rows();
    let cols = b_grid.block_cols();
    let mut coeffs = vec![Mat::zeros(rows, cols); exact_threshold(p, q)];
    for (ai, a_block) in a_grid.blocks().iter().enumerate() {
        for (bi, b_block) in b_grid.blocks().iter().enumerate() {
            let exp = (a_exps[ai] + b_exps[bi]) as usize;
            let prod = a_block.matmul(b_block);
            coeffs[exp].axpy(1.0, &prod);
        }
    }
    Ok(coeffs)
}

// ---------------------------------------------------------------------------
// Exact-rational simulation path
// ---------------------------------------------------------------------------

pub(crate) mod precise {
    //! Encode, multiply, and per-block decode in exact rational arithmetic.
    //!
    //! Inputs and evaluation points are `f64` (hence dyadic rationals); all
    //! intermediate arithmetic is exact, and only the final decoded blocks
    //! round back to `f64`.

    use super::*;
    use crate::ratmat::{rat, rat_pow, RatMat};
    use num_rational::BigRational;

    pub(crate) struct PreciseWorker {
        pub worker_id: usize,
        pub lambda: f64,
        lambda_exact: BigRational,
        c_tilde: RatMat,
    }

    /// Run every worker of the code exactly: encode both grids at each point
    /// and multiply.
    pub(crate) fn worker_results(
        a_grid: &BlockGrid,
        b_grid: &BlockGrid,
        points: &EvaluationPoints,
    ) -> Result<Vec<PreciseWorker>> {
        let (p, q) = (a_grid.grid_rows(), a_grid.grid_cols());
        if b_grid.grid_rows() != q || b_grid.grid_cols() != p {
            return Err(Error::ShapeViolation(format!(
                "A split {p}x{q} needs B split {q}x{p}, got {}x{}",
                b_grid.grid_rows(),
                b_grid.grid_cols()
            )));
        }
        let a_exps = a_exponents(p, q);
        let b_exps = b_exponents(p, q);
        let a_blocks: Vec<RatMat> = a_grid.blocks().iter().map(RatMat::from_mat).collect();
        let b_blocks: Vec<RatMat> = b_grid.blocks().iter().map(RatMat::from_mat).collect();
        let mut out = Vec::with_capacity(points.len());
        for w in 0..points.len() {
            let lambda = points[w];
            let le = rat(lambda);
            let mut a_tilde = RatMat::zeros(a_grid.block_rows(), a_grid.block_cols());
            for (blk, &e) in a_blocks.iter().zip(a_exps.iter()) {
                a_tilde.add_scaled(&rat_pow(&le, e as usize), blk);
            }
            let mut b_tilde = RatMat::zeros(b_grid.block_rows(), b_grid.block_cols());
            for (blk, &e) in b_blocks.iter().zip(b_exps.iter()) {
                b_tilde.add_scaled(&rat_pow(&le, e as usize), blk);
            }
            out.push(PreciseWorker {
                worker_id: w,
                lambda,
                lambda_exact: le,
                c_tilde: a_tilde.matmul(&b_tilde),
            });
        }
        Ok(out)
    }

    /// Per-block decode over a subset of workers, exactly; rounds the
    /// assembled matrix to `f64` at the very end.
    pub(crate) fn approx_decode(workers: &[&PreciseWorker], params: &CodeParams) -> Result<Mat> {
        let (p, q) = (params.p, params.q);
        if workers.len() < approx_threshold(p, q) {
            return Err(Error::InsufficientResults {
                got: workers.len(),
                need: approx_threshold(p, q),
            });
        }
        let lambdas: Vec<f64> = workers.iter().map(|w| w.lambda).collect();
        ensure_distinct(&lambdas)?;
        let mut blocks = Vec::with_capacity(p * p);
        for i in 0..p {
            for l in 0..p {
                let d = block_point_count(p, q, i, l);
                let mut idx: Vec<usize> = (0..workers.len()).collect();
                idx.sort_by(|&a, &b| {
                    workers[a]
                        .lambda
                        .abs()
                        .partial_cmp(&workers[b].lambda.abs())
                        .unwrap()
                        .then(workers[a].lambda.partial_cmp(&workers[b].lambda).unwrap())
                        .then(workers[a].worker_id.cmp(&workers[b].worker_id))
                });
                idx.truncate(d);
                let mut block =
                    RatMat::zeros(workers[0].c_tilde.rows(), workers[0].c_tilde.cols());
                for &t in &idx {
                    // w_t = 1 / prod_{s != t} (x_t - x_s), exactly.
                    let mut denom = BigRational::from_float(1.0).unwrap();
                    for &s in &idx {
                        if s != t {
                            denom *= &workers[t].lambda_exact - &workers[s].lambda_exact;
                        }
                    }
                    let weight = BigRational::from_float(1.0).unwrap() / denom;
                    block.add_scaled(&weight, &workers[t].c_tilde);
                }
                blocks.push(block.to_mat());
            }
        }
        Ok(assemble_blocks(&blocks, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matdot;
    use crate::partition::split;
    use crate::rng::Rng;

    fn unit_norm_mat(n: usize, seed: u64) -> Mat {
        let mut rng = Rng::new(seed);
        let mut m = Mat::from_vec(n, n, (0..n * n).map(|_| rng.next_normal()).collect()).unwrap();
        let norm = m.frobenius_norm();
        for v in m.data_mut() {
            *v /= norm;
        }
        m
    }

    fn run_workers(a_grid: &BlockGrid, b_grid: &BlockGrid, pts: &EvaluationPoints) -> Vec<WorkerResult> {
        encode(a_grid, b_grid, pts)
            .unwrap()
            .iter()
            .map(worker_multiply)
            .collect()
    }

    #[test]
    fn p1_reduces_to_matdot_bit_for_bit() {
        let a = unit_norm_mat(12, 1);
        let b = unit_norm_mat(12, 2);
        let ag = split(&a, 1, 3).unwrap();
        let bg = split(&b, 3, 1).unwrap();
        let pts = chebyshev_points(5, 1.0).unwrap();
        let poly_shares = encode(&ag, &bg, &pts).unwrap();
        let mat_shares = matdot::encode(&ag, &bg, &pts).unwrap();
        for (ps, ms) in poly_shares.iter().zip(mat_shares.iter()) {
            assert_eq!(ps.a_tilde, ms.a_tilde);
            assert_eq!(ps.b_tilde, ms.b_tilde);
        }
    }

    #[test]
    fn exponents_p2_q1() {
        assert_eq!(a_exponents(2, 1), vec![0, 1]);
        assert_eq!(b_exponents(2, 1), vec![0, 2]);
        // Degree of p_C is p^2 q + q - 2 = 3.
        let max_deg = a_exponents(2, 1).iter().max().unwrap() + b_exponents(2, 1).iter().max().unwrap();
        assert_eq!(max_deg, 3);
        assert_eq!(exact_threshold(2, 1), 4);
    }

    #[test]
    fn exponents_p2_q2_degree() {
        let max_deg =
            a_exponents(2, 2).iter().max().unwrap() + b_exponents(2, 2).iter().max().unwrap();
        assert_eq!(max_deg, 8); // p^2 q + q - 2
        assert_eq!(approx_threshold(2, 2), 8);
        assert_eq!(exact_threshold(2, 2), 9);
    }

    #[test]
    fn product_coeffs_place_blocks_at_their_exponents() {
        let a = unit_norm_mat(8, 3);
        let b = unit_norm_mat(8, 4);
        let (p, q) = (2usize, 2usize);
        let ag = split(&a, p, q).unwrap();
        let bg = split(&b, q, p).unwrap();
        let coeffs = product_poly_coeffs(&ag, &bg).unwrap();
        let c = a.matmul(&b);
        let cg = split(&c, p, p).unwrap();
        for i in 0..p {
            for l in 0..p {
                let exp = block_point_count(p, q, i, l) - 1;
                assert!(
                    coeffs[exp].max_abs_diff(cg.block(i, l)) < 1e-12,
                    "block ({i},{l})"
                );
            }
        }
    }

    #[test]
    fn eps_points_bound_p2_q2() {
        let params = CodeParams::polydot(2, 2, 9, 8, 0.01, 1.0).unwrap();
        let bound = eps_bound(&params);
        assert!((bound - 0.01 / 14.0).abs() < 1e-12);
        let pts = eps_points(&params).unwrap();
        for i in 0..pts.len() {
            assert!(pts[i].abs() < bound);
        }
    }

    #[test]
    fn eps_points_p1_match_relaxed_matdot_form() {
        // With p = 1, q = m the bound becomes min(eps/(eta^2 m(m-1)), 1/(m-1)).
        let params = CodeParams::new(4, 1, 4, 6, 4, 0.05, 1.3).unwrap();
        let m = 4.0f64;
        let eta = 1.3f64;
        let expect = (0.05 / (eta * eta * m * (m - 1.0))).min(1.0 / (m - 1.0));
        assert!((eps_bound(&params) - expect).abs() < 1e-15);
    }

    #[test]
    fn eps_points_symmetric_chebyshev() {
        let params = CodeParams::polydot(2, 2, 8, 8, 0.01, 1.0).unwrap();
        let pts = eps_points(&params).unwrap();
        for i in 0..8 {
            assert!((pts[i] + pts[7 - i]).abs() < 1e-18);
        }
    }

    #[test]
    fn exact_decode_recovers_product() {
        for (p, q, n) in [(1usize, 4usize, 8usize), (2, 1, 8), (2, 2, 8)] {
            let a = unit_norm_mat(n, 40 + (p * q) as u64);
            let b = unit_norm_mat(n, 50 + (p * q) as u64);
            let ag = split(&a, p, q).unwrap();
            let bg = split(&b, q, p).unwrap();
            let need = exact_threshold(p, q);
            let pts = chebyshev_points(need, 1.0).unwrap();
            let results = run_workers(&ag, &bg, &pts);
            let params = CodeParams::polydot(p, q, need, need, 1e-2, 1.0).unwrap();
            let c = exact_decode(&results, &params).unwrap();
            assert!(
                c.max_abs_diff(&a.matmul(&b)) <= 1e-7,
                "(p,q)=({p},{q}): {}",
                c.max_abs_diff(&a.matmul(&b))
            );
        }
    }

    #[test]
    fn f64_approx_decode_agrees_with_matdot_for_p1() {
        // Both decoders are epsilon-accurate, so they sit within 2 eps.
        let a = unit_norm_mat(12, 60);
        let b = unit_norm_mat(12, 61);
        let ag = split(&a, 1, 3).unwrap();
        let bg = split(&b, 3, 1).unwrap();
        let eps = 1e-2;
        let params = CodeParams::new(3, 1, 3, 6, 3, eps, 1.0).unwrap();
        let pts = eps_points(&params).unwrap();
        let results = run_workers(&ag, &bg, &pts);
        let subset = &results[1..4];
        let via_polydot = approx_decode(subset, &params).unwrap();
        let via_matdot = matdot::approx_decode(subset, &params)
            .unwrap()
            .decoded()
            .unwrap();
        assert!(via_polydot.max_abs_diff(&a.matmul(&b)) <= eps);
        assert!(via_polydot.max_abs_diff(&via_matdot) <= 2.0 * eps);
    }

    #[test]
    fn precise_decode_all_threshold_subsets_p2_q2() {
        let params = CodeParams::polydot(2, 2, 9, 8, 1e-2, 1.0).unwrap();
        let pts = eps_points(&params).unwrap();
        for seed in 0..2 {
            let a = unit_norm_mat(8, 70 + seed);
            let b = unit_norm_mat(8, 80 + seed);
            let truth = a.matmul(&b);
            let ag = split(&a, 2, 2).unwrap();
            let bg = split(&b, 2, 2).unwrap();
            let workers = precise::worker_results(&ag, &bg, &pts).unwrap();
            for drop in 0..9 {
                let chosen: Vec<&precise::PreciseWorker> =
                    workers.iter().filter(|w| w.worker_id != drop).collect();
                let c = precise::approx_decode(&chosen, &params).unwrap();
                let err = c.max_abs_diff(&truth);
                assert!(err <= 1e-2, "dropping worker {drop}: error {err}");
            }
        }
    }

    #[test]
    fn precise_decode_needs_threshold() {
        let params = CodeParams::polydot(2, 2, 9, 8, 1e-2, 1.0).unwrap();
        let pts = eps_points(&params).unwrap();
        let a = unit_norm_mat(8, 90);
        let b = unit_norm_mat(8, 91);
        let ag = split(&a, 2, 2).unwrap();
        let bg = split(&b, 2, 2).unwrap();
        let workers = precise::worker_results(&ag, &bg, &pts).unwrap();
        let chosen: Vec<&precise::PreciseWorker> = workers.iter().take(7).collect();
        assert!(matches!(
            precise::approx_decode(&chosen, &params),
            Err(Error::InsufficientResults { .. })
        ));
    }

    #[test]
    fn per_block_error_chain_bound() {
        // || C_hat_{i,l} - C_{i,l} ||_max <= (k - d) d / (q (p^2 q - 1)) * eps
        // blockwise, with k = p^2 q + q - 1.
        let (p, q) = (2usize, 2usize);
        let eps = 1e-2;
        let params = CodeParams::polydot(p, q, 9, 8, eps, 1.0).unwrap();
        let pts = eps_points(&params).unwrap();
        let k = exact_threshold(p, q) as f64;
        for seed in 0..3 {
            let a = unit_norm_mat(8, 100 + seed);
            let b = unit_norm_mat(8, 110 + seed);
            let truth = a.matmul(&b);
            let tg = split(&truth, p, p).unwrap();
            let ag = split(&a, p, q).unwrap();
            let bg = split(&b, q, p).unwrap();
            let workers = precise::worker_results(&ag, &bg, &pts).unwrap();
            let chosen: Vec<&precise::PreciseWorker> = workers.iter().take(8).collect();
            let c = precise::approx_decode(&chosen, &params).unwrap();
            let cg = split(&c, p, p).unwrap();
            for i in 0..p {
                for l in 0..p {
                    let d = block_point_count(p, q, i, l) as f64;
                    let bound = (k - d) * d / (q as f64 * (p * p * q - 1) as f64) * eps;
                    let err = cg.block(i, l).max_abs_diff(tg.block(i, l));
                    assert!(
                        err <= bound.max(1e-15),
                        "block ({i},{l}): err {err} > bound {bound}"
                    );
                }
            }
        }
    }

    #[test]
    fn infinity_norm_coefficient_bound() {
        // || vec(p_C[v,w]) ||_inf <= eta^2 when both inputs have
        // Frobenius norm at most eta.
        for seed in 0..5 {
            let a = unit_norm_mat(12, 200 + seed);
            let b = unit_norm_mat(12, 210 + seed);
            let ag = split(&a, 2, 3).unwrap();
            let bg = split(&b, 3, 2).unwrap();
            let coeffs = product_poly_coeffs(&ag, &bg).unwrap();
            for c in &coeffs {
                assert!(c.max_abs() <= 1.0 + 1e-12);
            }
        }
    }
}
