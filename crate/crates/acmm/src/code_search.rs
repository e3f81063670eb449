//! Alternating-minimization search for approximate coded-computing schemes.
//!
//! A general linear code assigns worker `i` the encoded inputs
//! `sum_j alpha_j^(i) A_j` and `sum_j beta_j^(i) B_j`, and decodes scenario
//! `S` (a size-`k` survivor set) as `sum_{i in S} d_i C_tilde_i`. Recovery is
//! exact exactly when `sum_{i in S} d_i alpha^(i) beta^(i)T` is the `m x m`
//! identity, so the search minimizes the summed squared Frobenius defect of
//! that reconstruction over every scenario. The objective is non-convex but
//! quadratic in each of the three variable groups, and each group minimizer
//! is a small linear solve.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::partition::CodeParams;
use crate::poly_algebra::{EvaluationPoints, LsqSolver, RANK_TOL};
use crate::rng::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Encoding coefficients plus a decoder vector for every size-`k` scenario.
#[derive(Clone, Debug)]
pub struct GeneralLinearCode {
    /// `m x P`; column `i` encodes `A` for worker `i`.
    pub a_coeffs: Mat,
    /// `m x P`; column `i` encodes `B` for worker `i`.
    pub b_coeffs: Mat,
    /// All size-`k` subsets of `0..P`, lexicographic.
    pub scenarios: Vec<Vec<usize>>,
    /// Decoder vector per scenario, aligned with `scenarios`.
    pub decoders: Vec<Vec<f64>>,
    pub params: CodeParams,
}

/// Per-scenario reconstruction losses and the worst-case error bound they
/// imply.
#[derive(Clone, Debug)]
pub struct LossReport {
    pub per_scenario: Vec<f64>,
    pub total: f64,
    pub worst_scenario: usize,
    /// `sqrt(max loss) * m * eta^2`: the guaranteed Frobenius-error ceiling
    /// at the worst scenario.
    pub error_bound: f64,
}

impl LossReport {
    /// The error ceiling per scenario: `sqrt(loss) * m * eta^2`.
    pub fn error_bounds(&self, m: usize, eta: f64) -> Vec<f64> {
        self.per_scenario
            .iter()
            .map(|l| l.sqrt() * m as f64 * eta * eta)
            .collect()
    }
}

/// Working quantities shared by the block updates, all derived from the
/// current coefficients and decoders.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    /// `(A^T A) hadamard (B^T B)`, P x P: the Gram matrix of the rank-one
    /// reconstruction atoms.
    pub atom_gram: Mat,
    /// Entry `i` is `alpha^(i) . beta^(i)`: each atom's overlap with the
    /// identity target.
    pub identity_overlap: Vec<f64>,
    /// Entry `(i, j)` sums `d_i d_j` over scenarios containing both workers.
    pub decoder_outer: Mat,
    /// Entry `i` sums `d_i` over scenarios containing worker `i`.
    pub decoder_sum: Vec<f64>,
    /// `decoder_outer hadamard (A^T A)`.
    pub weighted_gram_a: Mat,
    /// `decoder_outer hadamard (B^T B)`.
    pub weighted_gram_b: Mat,
}

/// Knobs for [`alternating_minimize_with`].
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_sweeps: usize,
    /// Stop after the total loss moves less than `plateau_tol` for
    /// `plateau_len` consecutive sweeps. Off for full-length reproduction
    /// runs.
    pub early_stop: bool,
    pub plateau_tol: f64,
    pub plateau_len: usize,
}

impl SearchOptions {
    pub fn new(max_sweeps: usize) -> Self {
        Self { max_sweeps, early_stop: true, plateau_tol: 1e-14, plateau_len: 100 }
    }

    pub fn without_early_stop(max_sweeps: usize) -> Self {
        Self { early_stop: false, ..Self::new(max_sweeps) }
    }
}

// ---------------------------------------------------------------------------
// Scenario enumeration
// ---------------------------------------------------------------------------

/// All size-`k` subsets of `0..p_workers` in lexicographic order.
pub fn enumerate_scenarios(p_workers: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > p_workers {
        return Err(Error::IndexViolation(format!(
            "scenario size {k} out of range for {p_workers} workers"
        )));
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Advance the rightmost index that still has room.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if cur[i] != i + p_workers - k {
                break;
            }
            if i == 0 {
                return Ok(out);
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

fn reconstruction_defect(code: &GeneralLinearCode, scenario_idx: usize) -> Mat {
    let m = code.params.m;
    let mut defect = Mat::identity(m);
    let scenario = &code.scenarios[scenario_idx];
    let d = &code.decoders[scenario_idx];
    for (t, &worker) in scenario.iter().enumerate() {
        for r in 0..m {
            for c in 0..m {
                defect[(r, c)] -=
                    d[t] * code.a_coeffs[(r, worker)] * code.b_coeffs[(c, worker)];
            }
        }
    }
    defect
}

/// Per-scenario losses `|| I - sum_{i in S} d_i alpha^(i) beta^(i)T ||_F^2`.
pub fn loss(code: &GeneralLinearCode) -> LossReport {
    let mut per_scenario = Vec::with_capacity(code.scenarios.len());
    for p in 0..code.scenarios.len() {
        let defect = reconstruction_defect(code, p);
        let l = defect.data().iter().map(|v| v * v).sum::<f64>();
        per_scenario.push(l);
    }
    let total = per_scenario.iter().sum();
    // First strict maximum wins, so ties resolve to the lowest index.
    let mut worst_scenario = 0usize;
    for (i, l) in per_scenario.iter().enumerate() {
        if *l > per_scenario[worst_scenario] {
            worst_scenario = i;
        }
    }
    let error_bound = per_scenario[worst_scenario].sqrt()
        * code.params.m as f64
        * code.params.eta
        * code.params.eta;
    LossReport { per_scenario, total, worst_scenario, error_bound }
}

/// The guaranteed error ceiling `sqrt(loss) * m * eta^2` for one
/// scenario loss.
pub fn error_bound(scenario_loss: f64, params: &CodeParams) -> f64 {
    scenario_loss.sqrt() * params.m as f64 * params.eta * params.eta
}

// ---------------------------------------------------------------------------
// State computation
// ---------------------------------------------------------------------------

fn hadamard(a: &Mat, b: &Mat) -> Mat {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let mut out = a.clone();
    for (o, &v) in out.data_mut().iter_mut().zip(b.data().iter()) {
        *o *= v;
    }
    out
}

fn gram(m: &Mat) -> Mat {
    // m is m x P; returns P x P of column dot products.
    let p = m.cols();
    let mut g = Mat::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let dot: f64 = (0..m.rows()).map(|r| m[(r, i)] * m[(r, j)]).sum();
            g[(i, j)] = dot;
            g[(j, i)] = dot;
        }
    }
    g
}

impl OptimizerState {
    /// All derived quantities for the current coefficients and decoders.
    pub fn compute(code: &GeneralLinearCode) -> Self {
        let p = code.params.workers;
        let ata = gram(&code.a_coeffs);
        let btb = gram(&code.b_coeffs);
        let atom_gram = hadamard(&ata, &btb);
        let identity_overlap: Vec<f64> = (0..p)
            .map(|i| {
                (0..code.params.m)
                    .map(|r| code.a_coeffs[(r, i)] * code.b_coeffs[(r, i)])
                    .sum()
            })
            .collect();
        let (decoder_outer, decoder_sum) =
            decoder_stats(&code.scenarios, &code.decoders, p);
        let weighted_gram_a = hadamard(&decoder_outer, &ata);
        let weighted_gram_b = hadamard(&decoder_outer, &btb);
        OptimizerState {
            atom_gram,
            identity_overlap,
            decoder_outer,
            decoder_sum,
            weighted_gram_a,
            weighted_gram_b,
        }
    }
}

fn decoder_stats(
    scenarios: &[Vec<usize>],
    decoders: &[Vec<f64>],
    p: usize,
) -> (Mat, Vec<f64>) {
    let mut outer = Mat::zeros(p, p);
    let mut sums = vec![0.0; p];
    for (scenario, d) in scenarios.iter().zip(decoders.iter()) {
        for (ti, &wi) in scenario.iter().enumerate() {
            sums[wi] += d[ti];
            for (tj, &wj) in scenario.iter().enumerate() {
                outer[(wi, wj)] += d[ti] * d[tj];
            }
        }
    }
    (outer, sums)
}

// ---------------------------------------------------------------------------
// Symmetric pseudo-solve (Jacobi eigendecomposition)
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the orthogonal eigenvector matrix (columns).
fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        let scale: f64 = m.data().iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let apq = m[(i, j)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(i, i)];
                let aqq = m[(j, j)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mik = m[(i, k)];
                    let mjk = m[(j, k)];
                    m[(i, k)] = c * mik - s * mjk;
                    m[(j, k)] = s * mik + c * mjk;
                }
                for k in 0..n {
                    let mki = m[(k, i)];
                    let mkj = m[(k, j)];
                    m[(k, i)] = c * mki - s * mkj;
                    m[(k, j)] = s * mki + c * mkj;
                    let vki = v[(k, i)];
                    let vkj = v[(k, j)];
                    v[(k, i)] = c * vki - s * vkj;
                    v[(k, j)] = s * vki + c * vkj;
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| m[(i, i)]).collect();
    (eigenvalues, v)
}

/// Minimum-norm least-squares solution of the symmetric system `a x = rhs`
/// (matrix right-hand side), truncating eigenvalues below `1e-12 * scale`.
fn sym_pinv_solve(a: &Mat, rhs: &Mat) -> Mat {
    let n = a.rows();
    let (vals, vecs) = jacobi_eigen(a);
    let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    // x = V diag(1/lambda) V^T rhs over the kept spectrum.
    let mut vt_rhs = Mat::zeros(n, rhs.cols());
    for i in 0..n {
        for c in 0..rhs.cols() {
            let dot: f64 = (0..n).map(|r| vecs[(r, i)] * rhs[(r, c)]).sum();
            vt_rhs[(i, c)] = dot;
        }
    }
    let mut x = Mat::zeros(n, rhs.cols());
    for i in 0..n {
        if vals[i].abs() <= RANK_TOL * scale {
            continue;
        }
        let inv = 1.0 / vals[i];
        for r in 0..n {
            let vri = vecs[(r, i)];
            if vri == 0.0 {
                continue;
            }
            for c in 0..rhs.cols() {
                x[(r, c)] += vri * inv * vt_rhs[(i, c)];
            }
        }
    }
    x
}

// ---------------------------------------------------------------------------
// Block updates
// ---------------------------------------------------------------------------

/// Optimal decoder for every scenario given the current coefficients: solve
/// the scenario restriction of the atom Gram system. Singular restrictions
/// take the minimum-norm solution.
pub fn update_decoders(code: &GeneralLinearCode, state: &OptimizerState) -> Vec<Vec<f64>> {
    code.scenarios
        .iter()
        .map(|scenario| {
            let k = scenario.len();
            let mut z = Mat::zeros(k, k);
            let mut rhs = Mat::zeros(k, 1);
            for (ti, &wi) in scenario.iter().enumerate() {
                rhs[(ti, 0)] = state.identity_overlap[wi];
                for (tj, &wj) in scenario.iter().enumerate() {
                    z[(ti, tj)] = state.atom_gram[(wi, wj)];
                }
            }
            let d = sym_pinv_solve(&z, &rhs);
            (0..k).map(|t| d[(t, 0)]).collect()
        })
        .collect()
}

/// Optimal `A` coefficients given decoders and `B`: solve
/// `weighted_gram_b * A^T = diag(decoder_sum) * B^T`.
///
/// When every decoder is zero the objective does not depend on `A`, so the
/// coefficients are left untouched.
pub fn update_a(code: &GeneralLinearCode, state: &OptimizerState) -> Mat {
    let rhs = diag_times_transpose(&state.decoder_sum, &code.b_coeffs);
    if state.weighted_gram_b.max_abs() == 0.0 && rhs.max_abs() == 0.0 {
        return code.a_coeffs.clone();
    }
    sym_pinv_solve(&state.weighted_gram_b, &rhs).transpose()
}

/// Mirror image of [`update_a`] with the roles of `A` and `B` swapped.
pub fn update_b(code: &GeneralLinearCode, state: &OptimizerState) -> Mat {
    let rhs = diag_times_transpose(&state.decoder_sum, &code.a_coeffs);
    if state.weighted_gram_a.max_abs() == 0.0 && rhs.max_abs() == 0.0 {
        return code.b_coeffs.clone();
    }
    sym_pinv_solve(&state.weighted_gram_a, &rhs).transpose()
}

fn diag_times_transpose(diag: &[f64], coeffs: &Mat) -> Mat {
    // diag is length P, coeffs is m x P; result is P x m.
    let (m, p) = (coeffs.rows(), coeffs.cols());
    let mut out = Mat::zeros(p, m);
    for i in 0..p {
        for r in 0..m {
            out[(i, r)] = diag[i] * coeffs[(r, i)];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The alternating loop
// ---------------------------------------------------------------------------

/// One full sweep: decoders, then `A`, then `B`, recomputing the coupled
/// quantities exactly where the algorithm needs them fresh.
///
/// Each candidate block update is an exact minimizer in exact arithmetic,
/// but a near-singular solve can overshoot by roundoff when the iterate
/// passes a degenerate region; a candidate that fails to improve the total
/// loss is rejected, keeping the trace monotone.
fn sweep(code: &mut GeneralLinearCode) {
    let mut best = loss(code).total;
    let guard = |code: &mut GeneralLinearCode, prev_loss: &mut f64| {
        let now = loss(code).total;
        if now > *prev_loss {
            return false;
        }
        *prev_loss = now;
        true
    };
    let state = OptimizerState::compute(code);
    let cand = update_decoders(code, &state);
    let old = std::mem::replace(&mut code.decoders, cand);
    if !guard(code, &mut best) {
        code.decoders = old;
    }
    let state = OptimizerState::compute(code);
    let cand = update_a(code, &state);
    let old = std::mem::replace(&mut code.a_coeffs, cand);
    if !guard(code, &mut best) {
        code.a_coeffs = old;
    }
    let state = OptimizerState::compute(code);
    let cand = update_b(code, &state);
    let old = std::mem::replace(&mut code.b_coeffs, cand);
    if !guard(code, &mut best) {
        code.b_coeffs = old;
    }
}

/// Run the alternating minimization from a seeded random start.
///
/// Returns the final code and the per-sweep total-loss trace. The trace is
/// non-increasing up to roundoff: every step is an exact minimizer of its
/// own block.
pub fn alternating_minimize(
    params: &CodeParams,
    seed: u64,
    max_sweeps: usize,
) -> Result<(GeneralLinearCode, Vec<f64>)> {
    alternating_minimize_with(params, seed, &SearchOptions::new(max_sweeps))
}

pub fn alternating_minimize_with(
    params: &CodeParams,
    seed: u64,
    opts: &SearchOptions,
) -> Result<(GeneralLinearCode, Vec<f64>)> {
    params.validate()?;
    if opts.max_sweeps == 0 {
        return Err(Error::InvalidParams("need at least one sweep".into()));
    }
    let scenarios = enumerate_scenarios(params.workers, params.k)?;
    let mut rng = Rng::stream(seed, &[0x616c_746d, params.m as u64, params.workers as u64]);
    let mut randn_mat = |rows: usize, cols: usize| {
        Mat::from_vec(rows, cols, (0..rows * cols).map(|_| rng.next_normal()).collect())
            .expect("shape")
    };
    let a_coeffs = randn_mat(params.m, params.workers);
    let b_coeffs = randn_mat(params.m, params.workers);
    let decoders = vec![vec![0.0; params.k]; scenarios.len()];
    let mut code = GeneralLinearCode {
        a_coeffs,
        b_coeffs,
        scenarios,
        decoders,
        params: params.clone(),
    };
    let mut trace: Vec<f64> = Vec::new();
    let mut flat_run = 0usize;
    for _ in 0..opts.max_sweeps {
        sweep(&mut code);
        let total = loss(&code).total;
        if let Some(&prev) = trace.last() {
            if (prev - total).abs() < opts.plateau_tol {
                flat_run += 1;
            } else {
                flat_run = 0;
            }
        }
        trace.push(total);
        if opts.early_stop && flat_run >= opts.plateau_len {
            break;
        }
    }
    Ok((code, trace))
}

/// How far the current iterate sits from the three stationarity conditions.
///
/// Each residual is normalized backward-error style, against the magnitudes
/// of the terms entering its equation; optimizer trajectories can ride
/// valleys where the decoder norms diverge, and only this normalization
/// stays meaningful there.
pub fn stationarity_residuals(code: &GeneralLinearCode) -> (f64, f64, f64) {
    let state = OptimizerState::compute(code);
    let gram_norm = state.atom_gram.frobenius_norm();
    let mut decoder_res = 0.0f64;
    for (scenario, d) in code.scenarios.iter().zip(code.decoders.iter()) {
        let mut rnorm = 0.0;
        let mut znorm = 0.0;
        for &wi in scenario {
            let mut acc = -state.identity_overlap[wi];
            for (tj, &wj) in scenario.iter().enumerate() {
                acc += state.atom_gram[(wi, wj)] * d[tj];
            }
            rnorm += acc * acc;
            znorm += state.identity_overlap[wi] * state.identity_overlap[wi];
        }
        let dnorm: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = 1.0 + gram_norm * dnorm + znorm.sqrt();
        decoder_res = decoder_res.max(rnorm.sqrt() / scale);
    }
    let rhs_a = diag_times_transpose(&state.decoder_sum, &code.b_coeffs);
    let lhs_a = state.weighted_gram_b.matmul(&code.a_coeffs.transpose());
    let scale_a = 1.0
        + state.weighted_gram_b.frobenius_norm() * code.a_coeffs.frobenius_norm()
        + rhs_a.frobenius_norm();
    let res_a = lhs_a.sub(&rhs_a).frobenius_norm() / scale_a;
    let rhs_b = diag_times_transpose(&state.decoder_sum, &code.a_coeffs);
    let lhs_b = state.weighted_gram_a.matmul(&code.b_coeffs.transpose());
    let scale_b = 1.0
        + state.weighted_gram_a.frobenius_norm() * code.b_coeffs.frobenius_norm()
        + rhs_b.frobenius_norm();
    let res_b = lhs_b.sub(&rhs_b).frobenius_norm() / scale_b;
    (decoder_res, res_a, res_b)
}

/// Outcome of a multi-seed search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: GeneralLinearCode,
    pub best_seed: u64,
    pub best_loss: f64,
    /// `(seed, final total loss)` for every seed, in seed order.
    pub per_seed: Vec<(u64, f64)>,
}

/// Run [`alternating_minimize`] across `n_seeds` deterministic seeds and
/// keep the lowest-loss code (ties broken by the lower seed). Seeds run in
/// parallel; results do not depend on thread scheduling.
pub fn multi_seed_search(
    params: &CodeParams,
    n_seeds: u64,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    if n_seeds == 0 {
        return Err(Error::InvalidParams("need at least one seed".into()));
    }
    let runs: Vec<(u64, f64, GeneralLinearCode)> = (0..n_seeds)
        .into_par_iter()
        .map(|seed| {
            let (code, trace) = alternating_minimize_with(params, seed, opts)
                .expect("validated params");
            let final_loss = *trace.last().expect("at least one sweep");
            (seed, final_loss, code)
        })
        .collect();
    let per_seed: Vec<(u64, f64)> = runs.iter().map(|(s, l, _)| (*s, *l)).collect();
    let (best_seed, best_loss, best) = runs
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
        .expect("nonempty");
    Ok(SearchOutcome { best, best_seed, best_loss, per_seed })
}

// ---------------------------------------------------------------------------
// MatDot codes in coefficient form
// ---------------------------------------------------------------------------

/// Express a MatDot-family code (any `p = 1` evaluation-point code) as a
/// general linear code: Vandermonde coefficient columns plus, per scenario,
/// the linear functional the minimum-norm decoder applies to the worker
/// outputs.
///
/// This is what lets exact MatDot, approximate MatDot, and searched codes
/// run through one comparison pipeline.
pub fn code_from_matdot(
    params: &CodeParams,
    points: &EvaluationPoints,
) -> Result<GeneralLinearCode> {
    params.validate()?;
    if params.p != 1 {
        return Err(Error::InvalidParams(
            "coefficient form requires a p = 1 split".into(),
        ));
    }
    if points.len() != params.workers {
        return Err(Error::InvalidParams(format!(
            "need {} evaluation points, got {}",
            params.workers,
            points.len()
        )));
    }
    let m = params.m;
    let mut a_coeffs = Mat::zeros(m, params.workers);
    let mut b_coeffs = Mat::zeros(m, params.workers);
    for i in 0..params.workers {
        let mut pow = 1.0;
        for r in 0..m {
            a_coeffs[(r, i)] = pow;
            b_coeffs[(m - 1 - r, i)] = pow;
            pow *= points[i];
        }
    }
    let scenarios = enumerate_scenarios(params.workers, params.k)?;
    let full_v = crate::poly_algebra::vandermonde(points, 2 * m - 1)?;
    let decoders = scenarios
        .iter()
        .map(|scenario| {
            let mut v_s = Mat::zeros(2 * m - 1, scenario.len());
            for (t, &w) in scenario.iter().enumerate() {
                for r in 0..2 * m - 1 {
                    v_s[(r, t)] = full_v[(r, w)];
                }
            }
            LsqSolver::factor(&v_s).functional(m - 1)
        })
        .collect();
    Ok(GeneralLinearCode {
        a_coeffs,
        b_coeffs,
        scenarios,
        decoders,
        params: params.clone(),
    })
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DecoderJson {
    subset: Vec<usize>,
    d: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    m: usize,
    k: usize,
    #[serde(rename = "P")]
    workers: usize,
    #[serde(rename = "A_coeffs")]
    a_coeffs: Vec<f64>,
    #[serde(rename = "B_coeffs")]
    b_coeffs: Vec<f64>,
    decoders: Vec<DecoderJson>,
    loss: f64,
}

impl GeneralLinearCode {
    /// Serialize to the code-file JSON document. Worker indices are
    /// zero-based; floats round-trip exactly.
    pub fn to_json(&self) -> String {
        let report = loss(self);
        let doc = CodeJson {
            m: self.params.m,
            k: self.params.k,
            workers: self.params.workers,
            a_coeffs: self.a_coeffs.data().to_vec(),
            b_coeffs: self.b_coeffs.data().to_vec(),
            decoders: self
                .scenarios
                .iter()
                .zip(self.decoders.iter())
                .map(|(s, d)| DecoderJson { subset: s.clone(), d: d.clone() })
                .collect(),
            loss: report.total,
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CodeJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let params = CodeParams::matdot(doc.m, doc.workers, doc.k, 1e-2, 1.0)?;
        let a_coeffs = Mat::from_vec(doc.m, doc.workers, doc.a_coeffs)?;
        let b_coeffs = Mat::from_vec(doc.m, doc.workers, doc.b_coeffs)?;
        let scenarios: Vec<Vec<usize>> =
            doc.decoders.iter().map(|d| d.subset.clone()).collect();
        let expected = enumerate_scenarios(doc.workers, doc.k)?;
        if scenarios != expected {
            return Err(Error::Parse(
                "decoder table must list every size-k subset in lexicographic order".into(),
            ));
        }
        let decoders: Vec<Vec<f64>> = doc.decoders.into_iter().map(|d| d.d).collect();
        for d in &decoders {
            if d.len() != doc.k {
                return Err(Error::Parse("decoder length mismatch".into()));
            }
        }
        Ok(GeneralLinearCode { a_coeffs, b_coeffs, scenarios, decoders, params })
    }

    /// Decoder vector for a given sorted subset, if the table has it.
    pub fn decoder_for(&self, subset: &[usize]) -> Option<&[f64]> {
        self.scenarios
            .binary_search_by(|s| s.as_slice().cmp(subset))
            .ok()
            .map(|i| self.decoders[i].as_slice())
    }

    /// Decoder for an arbitrary survivor set: the stored vector when the
    /// subset is a designed scenario, otherwise the best linear decoder for
    /// that set, solved fresh from the coefficient Gram restriction.
    pub fn decoder_for_any(&self, subset: &[usize]) -> Vec<f64> {
        if let Some(d) = self.decoder_for(subset) {
            return d.to_vec();
        }
        let state = OptimizerState::compute(self);
        let k = subset.len();
        let mut z = Mat::zeros(k, k);
        let mut rhs = Mat::zeros(k, 1);
        for (ti, &wi) in subset.iter().enumerate() {
            rhs[(ti, 0)] = state.identity_overlap[wi];
            for (tj, &wj) in subset.iter().enumerate() {
                z[(ti, tj)] = state.atom_gram[(wi, wj)];
            }
        }
        let d = sym_pinv_solve(&z, &rhs);
        (0..k).map(|t| d[(t, 0)]).collect()
    }

    /// Reconstruction loss of one survivor set under a given decoder.
    pub fn subset_loss(&self, subset: &[usize], d: &[f64]) -> f64 {
        let m = self.params.m;
        let mut defect = Mat::identity(m);
        for (t, &worker) in subset.iter().enumerate() {
            for r in 0..m {
                for c in 0..m {
                    defect[(r, c)] -= d[t] * self.a_coeffs[(r, worker)] * self.b_coeffs[(c, worker)];
                }
            }
        }
        defect.data().iter().map(|v| v * v).sum()
    }
}
