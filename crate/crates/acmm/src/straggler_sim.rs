//! Deterministic master-worker straggler simulation.
//!
//! Workers are pure function calls: the guarantees under test are
//! subset-combinatorial, not timing-based, so no wall clock is modeled.
//! A run encodes once, "computes" every worker, then decodes from each
//! survivor subset the failure plan generates and measures the error against
//! the directly multiplied product. Identical inputs and seeds reproduce
//! identical reports.

use crate::code_search::{code_from_matdot, loss, GeneralLinearCode};
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::matdot::{self, WorkerResult};
use crate::partition::{check_norm, split, CodeParams};
use crate::poly_algebra::{chebyshev_points, EvaluationPoints};
use crate::polydot::{self, precise::PreciseWorker};
use crate::rng::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Codec and failure plans
// ---------------------------------------------------------------------------

/// Which code family the simulation drives.
#[derive(Clone, Debug)]
pub enum Codec {
    /// MatDot at Chebyshev points `lambda(gamma)`; exact above `2m-1`
    /// survivors, min-norm decoded below.
    MatDotExact { gamma: f64 },
    /// Approximate MatDot at near-zero points (strict construction bound, or
    /// the relaxed one).
    MatDotApprox { relaxed: bool },
    /// PolyDot at Chebyshev points `lambda(gamma)`, full interpolation.
    PolyDotExact { gamma: f64 },
    /// Approximate PolyDot at near-zero points. Simulated in exact rational
    /// arithmetic: the per-block decoder resolves signal far below the f64
    /// floor of rounded worker outputs.
    PolyDotApprox,
    /// A general linear code, typically from the optimizer or a code file.
    General(GeneralLinearCode),
}

impl Codec {
    pub fn label(&self) -> String {
        match self {
            Codec::MatDotExact { gamma } => format!("matdot(gamma={gamma})"),
            Codec::MatDotApprox { relaxed: false } => "eps-matdot".into(),
            Codec::MatDotApprox { relaxed: true } => "eps-matdot(relaxed)".into(),
            Codec::PolyDotExact { gamma } => format!("polydot(gamma={gamma})"),
            Codec::PolyDotApprox => "eps-polydot".into(),
            Codec::General(_) => "general".into(),
        }
    }

    fn points(&self, params: &CodeParams) -> Result<Option<EvaluationPoints>> {
        Ok(match self {
            Codec::MatDotExact { gamma } => Some(chebyshev_points(params.workers, *gamma)?),
            Codec::MatDotApprox { relaxed: false } => Some(matdot::eps_points(params)?),
            Codec::MatDotApprox { relaxed: true } => Some(matdot::eps_points_relaxed(params)?),
            Codec::PolyDotExact { gamma } => Some(chebyshev_points(params.workers, *gamma)?),
            Codec::PolyDotApprox => Some(polydot::eps_points(params)?),
            Codec::General(_) => None,
        })
    }
}

/// How survivor subsets are chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureMode {
    /// Every size-`k` subset.
    Exhaustive { k: usize },
    /// One pinned subset.
    Fixed { subset: Vec<usize> },
    /// Seeded random size-`k` subsets, one per trial.
    Random { k: usize, seed: u64 },
    /// The single subset maximizing the scenario loss; data-independent for
    /// a fixed code.
    WorstCase { k: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailurePlan {
    pub mode: FailureMode,
    /// Number of draws for the random mode; ignored elsewhere.
    pub trials: usize,
}

impl FailurePlan {
    pub fn exhaustive(k: usize) -> Self {
        Self { mode: FailureMode::Exhaustive { k }, trials: 1 }
    }

    pub fn fixed(subset: Vec<usize>) -> Self {
        Self { mode: FailureMode::Fixed { subset }, trials: 1 }
    }

    pub fn random(k: usize, seed: u64, trials: usize) -> Self {
        Self { mode: FailureMode::Random { k, seed }, trials }
    }

    pub fn worst_case(k: usize) -> Self {
        Self { mode: FailureMode::WorstCase { k }, trials: 1 }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetOutcome {
    pub subset: Vec<usize>,
    /// Largest absolute entry difference from the true product; absent when
    /// the decoder declared failure or the subset is undecodable.
    pub max_entry_error: Option<f64>,
    pub frobenius_error: Option<f64>,
    pub declared_failure: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimReport {
    pub per_subset: Vec<SubsetOutcome>,
    /// Max over decoded subsets of the max-entry error: the empirical
    /// epsilon.
    pub epsilon_measured: f64,
    /// Wall-clock only; excluded from serialized reports so rerun diffs are
    /// empty.
    #[serde(skip)]
    pub runtime_ms: u64,
}

impl SimReport {
    /// Everything except the wall-clock field, for determinism checks.
    pub fn content_eq(&self, other: &SimReport) -> bool {
        self.per_subset == other.per_subset && self.epsilon_measured == other.epsilon_measured
    }

    /// One row per subset, pipe-separated worker ids.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subset,max_entry_error,frobenius_error,declared_failure\n");
        for row in &self.per_subset {
            let subset: Vec<String> = row.subset.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{}\n",
                subset.join("|"),
                row.max_entry_error.map(|v| v.to_string()).unwrap_or_default(),
                row.frobenius_error.map(|v| v.to_string()).unwrap_or_default(),
                row.declared_failure
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Worker preparation
// ---------------------------------------------------------------------------

enum Prepared {
    MatDot { results: Vec<WorkerResult> },
    PolyDotGeneric { results: Vec<WorkerResult> },
    PolyDotPrecise { workers: Vec<PreciseWorker> },
    General { outputs: Vec<Mat>, code: GeneralLinearCode },
}

fn prepare(codec: &Codec, a: &Mat, b: &Mat, params: &CodeParams) -> Result<Prepared> {
    match codec {
        Codec::MatDotExact { .. } | Codec::MatDotApprox { .. } => {
            if params.p != 1 {
                return Err(Error::InvalidParams("matdot codecs need p = 1".into()));
            }
            let points = codec.points(params)?.expect("point codec");
            let ag = split(a, 1, params.m)?;
            let bg = split(b, params.m, 1)?;
            let results = matdot::encode(&ag, &bg, &points)?
                .iter()
                .map(matdot::worker_multiply)
                .collect();
            Ok(Prepared::MatDot { results })
        }
        Codec::PolyDotExact { .. } => {
            let points = codec.points(params)?.expect("point codec");
            let ag = split(a, params.p, params.q)?;
            let bg = split(b, params.q, params.p)?;
            let results = polydot::encode(&ag, &bg, &points)?
                .iter()
                .map(polydot::worker_multiply)
                .collect();
            Ok(Prepared::PolyDotGeneric { results })
        }
        Codec::PolyDotApprox => {
            let points = codec.points(params)?.expect("point codec");
            let ag = split(a, params.p, params.q)?;
            let bg = split(b, params.q, params.p)?;
            let workers = polydot::precise::worker_results(&ag, &bg, &points)?;
            Ok(Prepared::PolyDotPrecise { workers })
        }
        Codec::General(code) => {
            if code.params.workers != params.workers || code.params.m != params.m {
                return Err(Error::InvalidParams(
                    "general code dimensions disagree with run parameters".into(),
                ));
            }
            let m = params.m;
            let ag = split(a, 1, m)?;
            let bg = split(b, m, 1)?;
            let outputs = (0..params.workers)
                .map(|i| {
                    let mut at = Mat::zeros(ag.block_rows(), ag.block_cols());
                    let mut bt = Mat::zeros(bg.block_rows(), bg.block_cols());
                    for j in 0..m {
                        at.axpy(code.a_coeffs[(j, i)], ag.block(0, j));
                        bt.axpy(code.b_coeffs[(j, i)], bg.block(j, 0));
                    }
                    at.matmul(&bt)
                })
                .collect();
            Ok(Prepared::General { outputs, code: code.clone() })
        }
    }
}

fn decode_subset(prepared: &Prepared, subset: &[usize], params: &CodeParams) -> Option<Mat> {
    match prepared {
        Prepared::MatDot { results } => {
            let chosen: Vec<WorkerResult> =
                subset.iter().map(|&i| results[i].clone()).collect();
            match matdot::approx_decode(&chosen, params) {
                Ok(outcome) => outcome.decoded(),
                Err(_) => None,
            }
        }
        Prepared::PolyDotGeneric { results } => {
            let chosen: Vec<WorkerResult> =
                subset.iter().map(|&i| results[i].clone()).collect();
            polydot::exact_decode(&chosen, params).ok()
        }
        Prepared::PolyDotPrecise { workers } => {
            let chosen: Vec<&PreciseWorker> =
                subset.iter().map(|&i| &workers[i]).collect();
            polydot::precise::approx_decode(&chosen, params).ok()
        }
        Prepared::General { outputs, code } => {
            let d = code.decoder_for_any(subset);
            let mut out = Mat::zeros(outputs[0].rows(), outputs[0].cols());
            for (t, &i) in subset.iter().enumerate() {
                out.axpy(d[t], &outputs[i]);
            }
            Some(out)
        }
    }
}

// ---------------------------------------------------------------------------
// Plans to subsets
// ---------------------------------------------------------------------------

fn plan_subsets(
    codec: &Codec,
    params: &CodeParams,
    plan: &FailurePlan,
) -> Result<Vec<Vec<usize>>> {
    let p_workers = params.workers;
    match &plan.mode {
        FailureMode::Exhaustive { k } => crate::code_search::enumerate_scenarios(p_workers, *k),
        FailureMode::Fixed { subset } => {
            let mut s = subset.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != subset.len() || s.iter().any(|&i| i >= p_workers) {
                return Err(Error::IndexViolation(format!(
                    "fixed subset {subset:?} invalid for {p_workers} workers"
                )));
            }
            Ok(vec![s])
        }
        FailureMode::Random { k, seed } => {
            if *k > p_workers {
                return Err(Error::IndexViolation(format!(
                    "subset size {k} exceeds {p_workers} workers"
                )));
            }
            let mut out = Vec::with_capacity(plan.trials);
            for trial in 0..plan.trials {
                let mut rng = Rng::stream(*seed, &[0x7375_6273, trial as u64]);
                out.push(rng.subset(p_workers, *k));
            }
            Ok(out)
        }
        FailureMode::WorstCase { k } => Ok(vec![worst_case_subset(codec, params, *k)?]),
    }
}

/// The scenario maximizing the reconstruction loss, computed from the
/// codec's coefficient form. Data independent: it depends only on the code.
pub fn worst_case_subset(codec: &Codec, params: &CodeParams, k: usize) -> Result<Vec<usize>> {
    let code = match codec {
        Codec::General(code) => code.clone(),
        Codec::MatDotExact { .. } | Codec::MatDotApprox { .. } => {
            let points = codec.points(params)?.expect("point codec");
            let mut p = params.clone();
            p.k = k;
            code_from_matdot(&p, &points)?
        }
        Codec::PolyDotExact { .. } | Codec::PolyDotApprox => {
            return Err(Error::InvalidParams(
                "worst-case plans need a p = 1 coefficient form; polydot codecs have none".into(),
            ));
        }
    };
    if code.params.k != k {
        return Err(Error::InvalidParams(format!(
            "worst-case subset size {k} differs from the code's design threshold {}",
            code.params.k
        )));
    }
    let report = loss(&code);
    Ok(code.scenarios[report.worst_scenario].clone())
}

// ---------------------------------------------------------------------------
// Run and sweeps
// ---------------------------------------------------------------------------

/// Encode, simulate every worker, decode each planned survivor subset, and
/// measure against the directly computed product.
pub fn run(
    codec: &Codec,
    a: &Mat,
    b: &Mat,
    params: &CodeParams,
    plan: &FailurePlan,
) -> Result<SimReport> {
    params.validate()?;
    if !check_norm(a, params.eta) || !check_norm(b, params.eta) {
        return Err(Error::InvalidParams(format!(
            "input Frobenius norms ({}, {}) exceed eta = {}",
            a.frobenius_norm(),
            b.frobenius_norm(),
            params.eta
        )));
    }
    let start = std::time::Instant::now();
    let truth = a.matmul(b);
    let prepared = prepare(codec, a, b, params)?;
    let subsets = plan_subsets(codec, params, plan)?;
    let per_subset: Vec<SubsetOutcome> = subsets
        .par_iter()
        .map(|subset| match decode_subset(&prepared, subset, params) {
            Some(c_hat) => SubsetOutcome {
                subset: subset.clone(),
                max_entry_error: Some(c_hat.max_abs_diff(&truth)),
                frobenius_error: Some(c_hat.sub(&truth).frobenius_norm()),
                declared_failure: false,
            },
            None => SubsetOutcome {
                subset: subset.clone(),
                max_entry_error: None,
                frobenius_error: None,
                declared_failure: true,
            },
        })
        .collect();
    let epsilon_measured = per_subset
        .iter()
        .filter_map(|r| r.max_entry_error)
        .fold(0.0f64, f64::max);
    Ok(SimReport {
        per_subset,
        epsilon_measured,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Decode `c_hat` for a single survivor subset (the first subset of the
/// plan), for callers that want the matrix itself rather than statistics.
pub fn decode_once(
    codec: &Codec,
    a: &Mat,
    b: &Mat,
    params: &CodeParams,
    subset: &[usize],
) -> Result<Option<Mat>> {
    let prepared = prepare(codec, a, b, params)?;
    Ok(decode_subset(&prepared, subset, params))
}

#[derive(Clone, Debug, Serialize)]
pub struct NsuccRow {
    pub n_succ: usize,
    pub subsets_evaluated: usize,
    pub failures: usize,
    /// Worst scenario loss over the evaluated subsets; only point codes with
    /// `p = 1` and general codes report it.
    pub loss: Option<f64>,
    pub epsilon_measured: Option<f64>,
}

/// Cap on exhaustively enumerated subsets per sweep point; beyond it the
/// sweep samples this many seeded subsets instead.
const SWEEP_SUBSET_CAP: usize = 200;

fn sweep_subsets(p_workers: usize, n: usize, seed: u64) -> Vec<Vec<usize>> {
    let count = binomial(p_workers, n);
    if count <= SWEEP_SUBSET_CAP {
        crate::code_search::enumerate_scenarios(p_workers, n).expect("validated")
    } else {
        (0..SWEEP_SUBSET_CAP)
            .map(|trial| {
                let mut rng = Rng::stream(seed, &[0x6e73_7563, n as u64, trial as u64]);
                rng.subset(p_workers, n)
            })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Error and loss versus the number of non-straggling workers.
///
/// For each `n` in the range, decodes from every size-`n` subset (or a
/// seeded sample of 200 when there are more), using the codec's approximate
/// decoder. `n` below the codec's decodable threshold records failures.
pub fn sweep_nsucc(
    codec: &Codec,
    a: &Mat,
    b: &Mat,
    params: &CodeParams,
    n_succ_range: &[usize],
    seed: u64,
) -> Result<Vec<NsuccRow>> {
    params.validate()?;
    let truth = a.matmul(b);
    let prepared = prepare(codec, a, b, params)?;
    let coeff_code = coefficient_form(codec, params)?;
    let mut rows = Vec::with_capacity(n_succ_range.len());
    for &n in n_succ_range {
        if n == 0 || n > params.workers {
            return Err(Error::IndexViolation(format!(
                "n_succ {n} out of range for {} workers",
                params.workers
            )));
        }
        let subsets = sweep_subsets(params.workers, n, seed);
        let outcomes: Vec<(Option<f64>, Option<f64>)> = subsets
            .par_iter()
            .map(|subset| {
                let err = decode_subset(&prepared, subset, params)
                    .map(|c_hat| c_hat.max_abs_diff(&truth));
                let loss = coeff_code.as_ref().map(|code| {
                    let d = code.decoder_for_any(subset);
                    code.subset_loss(subset, &d)
                });
                (err, loss)
            })
            .collect();
        let failures = outcomes.iter().filter(|(e, _)| e.is_none()).count();
        let epsilon_measured = outcomes
            .iter()
            .filter_map(|(e, _)| *e)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        let loss = outcomes
            .iter()
            .filter_map(|(_, l)| *l)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        rows.push(NsuccRow {
            n_succ: n,
            subsets_evaluated: subsets.len(),
            failures,
            loss,
            epsilon_measured,
        });
    }
    Ok(rows)
}

fn coefficient_form(codec: &Codec, params: &CodeParams) -> Result<Option<GeneralLinearCode>> {
    Ok(match codec {
        Codec::General(code) => Some(code.clone()),
        Codec::MatDotExact { .. } | Codec::MatDotApprox { .. } => {
            let points = codec.points(params)?.expect("point codec");
            Some(code_from_matdot(params, &points)?)
        }
        _ => None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub epsilon_measured: Option<f64>,
    pub failures: usize,
}

/// Measured error of the MatDot codec at points `lambda(gamma)` across a
/// gamma grid, decoding from seeded size-`n_succ` subsets.
///
/// The same subsets are reused for every gamma so the curve isolates the
/// point-scale effect. Below the exact threshold the error is genuinely
/// non-monotonic in gamma: interpolation error falls while roundoff
/// amplification grows.
pub fn gamma_sweep(
    a: &Mat,
    b: &Mat,
    params: &CodeParams,
    gammas: &[f64],
    n_succ: usize,
    seed: u64,
) -> Result<Vec<GammaRow>> {
    params.validate()?;
    if n_succ == 0 || n_succ > params.workers {
        return Err(Error::IndexViolation(format!(
            "n_succ {n_succ} out of range for {} workers",
            params.workers
        )));
    }
    let truth = a.matmul(b);
    let subsets = sweep_subsets(params.workers, n_succ, seed);
    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let codec = Codec::MatDotExact { gamma };
        let prepared = prepare(&codec, a, b, params)?;
        let errs: Vec<Option<f64>> = subsets
            .par_iter()
            .map(|subset| {
                decode_subset(&prepared, subset, params).map(|c| c.max_abs_diff(&truth))
            })
            .collect();
        let failures = errs.iter().filter(|e| e.is_none()).count();
        let epsilon_measured = errs
            .iter()
            .filter_map(|e| *e)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        rows.push(GammaRow { gamma, epsilon_measured, failures });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_search::{multi_seed_search, SearchOptions};
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

    #[test]
    fn exhaustive_eps_matdot_meets_epsilon() {
        let params = CodeParams::matdot(3, 6, 3, 1e-2, 1.0).unwrap();
        let a = unit_norm_mat(21, 1);
        let b = unit_norm_mat(21, 2);
        let report = run(
            &Codec::MatDotApprox { relaxed: false },
            &a,
            &b,
            &params,
            &FailurePlan::exhaustive(3),
        )
        .unwrap();
        assert_eq!(report.per_subset.len(), 20);
        assert!(report.per_subset.iter().all(|r| !r.declared_failure));
        assert!(report.epsilon_measured <= 1e-2);
    }

    #[test]
    fn fixed_full_set_exact_matdot() {
        let params = CodeParams::matdot(3, 6, 5, 1e-2, 1.0).unwrap();
        let a = unit_norm_mat(12, 3);
        let b = unit_norm_mat(12, 4);
        let report = run(
            &Codec::MatDotExact { gamma: 1.0 },
            &a,
            &b,
            &params,
            &FailurePlan::fixed(vec![0, 1, 2, 3, 4, 5]),
        )
        .unwrap();
        assert!(report.epsilon_measured <= 1e-8);
    }

    #[test]
    fn worst_case_matches_argmax_scenario_loss() {
        let params = CodeParams::matdot(2, 4, 2, 1e-2, 1.0).unwrap();
        let outcome = multi_seed_search(&params, 4, &SearchOptions::new(400)).unwrap();
        let codec = Codec::General(outcome.best.clone());
        let subset = worst_case_subset(&codec, &params, 2).unwrap();
        let report = loss(&outcome.best);
        assert_eq!(subset, outcome.best.scenarios[report.worst_scenario]);
    }

    #[test]
    fn determinism_bit_identical_content() {
        let params = CodeParams::matdot(3, 6, 3, 1e-2, 1.0).unwrap();
        let a = unit_norm_mat(12, 5);
        let b = unit_norm_mat(12, 6);
        let plan = FailurePlan::random(3, 99, 10);
        let codec = Codec::MatDotApprox { relaxed: false };
        let r1 = run(&codec, &a, &b, &params, &plan).unwrap();
        let r2 = run(&codec, &a, &b, &params, &plan).unwrap();
        assert!(r1.content_eq(&r2));
    }

    #[test]
    fn norm_precondition_enforced() {
        let params = CodeParams::matdot(2, 4, 2, 1e-2, 0.5).unwrap();
        let a = unit_norm_mat(8, 7); // Frobenius norm 1 > eta
        let b = unit_norm_mat(8, 8);
        assert!(run(
            &Codec::MatDotApprox { relaxed: false },
            &a,
            &b,
            &params,
            &FailurePlan::exhaustive(2),
        )
        .is_err());
    }

    #[test]
    fn polydot_approx_exhaustive_threshold() {
        let params = CodeParams::polydot(2, 2, 9, 8, 1e-2, 1.0).unwrap();
        let a = unit_norm_mat(8, 9);
        let b = unit_norm_mat(8, 10);
        let report = run(
            &Codec::PolyDotApprox,
            &a,
            &b,
            &params,
            &FailurePlan::exhaustive(8),
        )
        .unwrap();
        assert_eq!(report.per_subset.len(), 9);
        assert!(report.epsilon_measured <= 1e-2);
    }

    #[test]
    fn general_code_roundtrip_through_sim() {
        let params = CodeParams::matdot(2, 3, 2, 1e-1, 1.0).unwrap();
        let outcome = multi_seed_search(&params, 6, &SearchOptions::new(2_000)).unwrap();
        let a = unit_norm_mat(8, 11);
        let b = unit_norm_mat(8, 12);
        let report = run(
            &Codec::General(outcome.best.clone()),
            &a,
            &b,
            &params,
            &FailurePlan::exhaustive(2),
        )
        .unwrap();
        // The loss-derived error ceiling holds per subset.
        let code_loss = loss(&outcome.best);
        for (row, l) in report.per_subset.iter().zip(code_loss.per_scenario.iter()) {
            let bound = l.sqrt() * 2.0;
            assert!(row.frobenius_error.unwrap() <= bound + 1e-12);
        }
    }

    #[test]
    fn coefficient_form_matches_native_matdot_decode() {
        // An exact MatDot code rewritten as a general linear code must give
        // the same answers through the general decode path.
        let params = CodeParams::matdot(3, 6, 5, 1e-2, 1.0).unwrap();
        let points = crate::poly_algebra::chebyshev_points(6, 1.0).unwrap();
        let code = code_from_matdot(&params, &points).unwrap();
        let a = unit_norm_mat(12, 23);
        let b = unit_norm_mat(12, 24);
        let plan = FailurePlan::exhaustive(5);
        let native = run(&Codec::MatDotExact { gamma: 1.0 }, &a, &b, &params, &plan).unwrap();
        let general = run(&Codec::General(code), &a, &b, &params, &plan).unwrap();
        for (n, g) in native.per_subset.iter().zip(general.per_subset.iter()) {
            assert_eq!(n.subset, g.subset);
            assert!(n.max_entry_error.unwrap() < 1e-10);
            assert!(g.max_entry_error.unwrap() < 1e-10);
        }
    }

    #[test]
    fn sweep_nsucc_matdot_transition() {
        // Unnormalized inputs so the below-threshold error is macroscopic.
        let mut a = unit_norm_mat(21, 13);
        let mut b = unit_norm_mat(21, 14);
        for v in a.data_mut() {
            *v *= 21.0;
        }
        for v in b.data_mut() {
            *v *= 21.0;
        }
        let eta = a.frobenius_norm().max(b.frobenius_norm()) * 1.001;
        let params = CodeParams::matdot(3, 6, 3, 1e-2, eta).unwrap();
        let rows = sweep_nsucc(
            &Codec::MatDotExact { gamma: 1.0 },
            &a,
            &b,
            &params,
            &[3, 4, 5, 6],
            7,
        )
        .unwrap();
        assert!(rows[0].epsilon_measured.unwrap() > 1e-1);
        assert!(rows[1].epsilon_measured.unwrap() > 1e-1);
        assert!(rows[2].epsilon_measured.unwrap() <= 1e-10);
        assert!(rows[3].epsilon_measured.unwrap() <= 1e-10);
        // Approximate variant stays below epsilon from the threshold on.
        let rows = sweep_nsucc(
            &Codec::MatDotApprox { relaxed: true },
            &a,
            &b,
            &params,
            &[3, 4, 5, 6],
            7,
        )
        .unwrap();
        for row in &rows {
            assert_eq!(row.failures, 0);
            assert!(
                row.epsilon_measured.unwrap() <= 1e-2,
                "n={} err={:?}",
                row.n_succ,
                row.epsilon_measured
            );
        }
    }

    #[test]
    fn sweep_full_p_never_worse_than_threshold() {
        let a = unit_norm_mat(12, 15);
        let b = unit_norm_mat(12, 16);
        let params = CodeParams::matdot(3, 6, 3, 1e-2, 1.0).unwrap();
        let rows = sweep_nsucc(
            &Codec::MatDotApprox { relaxed: false },
            &a,
            &b,
            &params,
            &[3, 6],
            1,
        )
        .unwrap();
        assert!(rows[1].epsilon_measured.unwrap() <= rows[0].epsilon_measured.unwrap());
    }

    #[test]
    fn gamma_sweep_shapes() {
        let a = unit_norm_mat(12, 17);
        let b = unit_norm_mat(12, 18);
        let params = CodeParams::matdot(3, 6, 5, 1e-2, 1.0).unwrap();
        let gammas = [1.0, 10.0, 100.0];
        let rows = gamma_sweep(&a, &b, &params, &gammas, 5, 3).unwrap();
        assert_eq!(rows.len(), 3);
        // At n_succ = 2m - 1 and gamma = 1 the decode is near machine
        // precision.
        assert!(rows[0].epsilon_measured.unwrap() < 1e-10);
        for (row, g) in rows.iter().zip(gammas.iter()) {
            assert_eq!(row.gamma, *g);
        }
    }

    #[test]
    fn csv_report_has_header_and_rows() {
        let params = CodeParams::matdot(2, 3, 2, 1e-2, 1.0).unwrap();
        let a = unit_norm_mat(8, 19);
        let b = unit_norm_mat(8, 20);
        let report = run(
            &Codec::MatDotApprox { relaxed: false },
            &a,
            &b,
            &params,
            &FailurePlan::exhaustive(2),
        )
        .unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "subset,max_entry_error,frobenius_error,declared_failure");
        assert_eq!(lines.len(), 1 + 3);
        assert!(lines[1].starts_with("0|1,"));
    }

    #[test]
    fn subset_order_never_changes_decode() {
        let params = CodeParams::matdot(3, 6, 3, 1e-2, 1.0).unwrap();
        let a = unit_norm_mat(12, 21);
        let b = unit_norm_mat(12, 22);
        let ag = split(&a, 1, 3).unwrap();
        let bg = split(&b, 3, 1).unwrap();
        let points = matdot::eps_points(&params).unwrap();
        let results: Vec<WorkerResult> = matdot::encode(&ag, &bg, &points)
            .unwrap()
            .iter()
            .map(matdot::worker_multiply)
            .collect();
        let pick = |ids: &[usize]| -> Vec<WorkerResult> {
            ids.iter().map(|&i| results[i].clone()).collect()
        };
        let c1 = matdot::approx_decode(&pick(&[0, 2, 4]), &params)
            .unwrap()
            .decoded()
            .unwrap();
        let c2 = matdot::approx_decode(&pick(&[4, 0, 2]), &params)
            .unwrap()
            .decoded()
            .unwrap();
        assert!(c1.max_abs_diff(&c2) <= 1e-12);
    }
}
