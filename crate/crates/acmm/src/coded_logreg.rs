//! Softmax logistic regression trained over coded matrix products.
//!
//! Each gradient step multiplies twice: the forward logits `Z = W X` and the
//! gradient `G = H X^T` with `H = softmax(Z) - Y`. Both products can run
//! through any `p = 1` codec from the simulator, with a survivor subset drawn
//! per product from the failure plan. Training tolerates the epsilon-level
//! product error easily; what it does not tolerate is dropping blocks with no
//! code at all, which the truncated baseline demonstrates.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::partition::{pad_to_divisible, Axis, CodeParams};
use crate::rng::Rng;
use crate::straggler_sim::{decode_once, worst_case_subset, Codec};

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// Feature columns with one-hot labels: `x` is features x samples, and each
/// column of `y_onehot` sums to one.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: Mat,
    pub y_onehot: Mat,
    pub classes: usize,
    pub samples: usize,
}

impl Dataset {
    pub fn new(x: Mat, labels: &[usize], classes: usize) -> Result<Self> {
        let samples = x.cols();
        if labels.len() != samples {
            return Err(Error::ShapeViolation(format!(
                "{} labels for {} sample columns",
                labels.len(),
                samples
            )));
        }
        let mut y = Mat::zeros(classes, samples);
        for (i, &l) in labels.iter().enumerate() {
            if l >= classes {
                return Err(Error::IndexViolation(format!("label {l} >= {classes}")));
            }
            y[(l, i)] = 1.0;
        }
        Ok(Self { x, y_onehot: y, classes, samples })
    }

    pub fn label_of(&self, sample: usize) -> usize {
        (0..self.classes)
            .find(|&j| self.y_onehot[(j, sample)] == 1.0)
            .expect("one-hot column")
    }

    /// Deterministic split: every fifth sample goes to the test set.
    pub fn split_train_test(&self) -> (Dataset, Dataset) {
        let test_idx: Vec<usize> = (0..self.samples).filter(|i| i % 5 == 0).collect();
        let train_idx: Vec<usize> = (0..self.samples).filter(|i| i % 5 != 0).collect();
        (self.subset(&train_idx), self.subset(&test_idx))
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let f = self.x.rows();
        let mut x = Mat::zeros(f, idx.len());
        let mut y = Mat::zeros(self.classes, idx.len());
        for (col, &i) in idx.iter().enumerate() {
            for r in 0..f {
                x[(r, col)] = self.x[(r, i)];
            }
            for r in 0..self.classes {
                y[(r, col)] = self.y_onehot[(r, i)];
            }
        }
        Dataset { x, y_onehot: y, classes: self.classes, samples: idx.len() }
    }
}

/// Seeded Gaussian blobs: `classes` clusters in `features` dimensions,
/// linearly separable at the default geometry.
///
/// Each class mean sits on its own coordinate axis, so the features carry
/// unequal information; losing a feature block without correction visibly
/// hurts whichever classes lived there.
pub fn synthetic_blobs(
    seed: u64,
    classes: usize,
    features: usize,
    per_class: usize,
) -> Dataset {
    let mut rng = Rng::stream(seed, &[0x626c_6f62]);
    let mut means = vec![vec![0.0; features]; classes];
    for (c, mean) in means.iter_mut().enumerate() {
        mean[(c * features) / classes % features] = 2.5;
    }
    let samples = classes * per_class;
    let mut x = Mat::zeros(features, samples);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let class = i % classes;
        labels.push(class);
        for r in 0..features {
            x[(r, i)] = means[class][r] + 0.7 * rng.next_normal();
        }
    }
    Dataset::new(x, &labels, classes).expect("valid construction")
}

/// Load `label,feature,...` lines. Labels must be integers `0..classes`.
pub fn read_dataset_csv(r: &mut impl std::io::Read) -> Result<Dataset> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let label: usize = fields
            .next()
            .ok_or_else(|| Error::Parse("empty line".into()))?
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad label in: {line}")))?;
        let feats: Vec<f64> = fields
            .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value: {f}"))))
            .collect::<Result<_>>()?;
        rows.push((label, feats));
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    let features = rows[0].1.len();
    if rows.iter().any(|(_, f)| f.len() != features) {
        return Err(Error::Parse("inconsistent feature counts".into()));
    }
    let classes = rows.iter().map(|(l, _)| *l).max().unwrap() + 1;
    let mut x = Mat::zeros(features, rows.len());
    let labels: Vec<usize> = rows.iter().map(|(l, _)| *l).collect();
    for (i, (_, feats)) in rows.iter().enumerate() {
        for (r, &v) in feats.iter().enumerate() {
            x[(r, i)] = v;
        }
    }
    Dataset::new(x, &labels, classes)
}

// ---------------------------------------------------------------------------
// MNIST IDX ingestion
// ---------------------------------------------------------------------------

fn read_be_u32(r: &mut impl std::io::Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_be_bytes(buf))
}

/// IDX image file (magic 0x00000803): pixels scaled to `[0, 1]`, one column
/// per image.
pub fn read_idx_images(r: &mut impl std::io::Read) -> Result<Mat> {
    if read_be_u32(r)? != 0x0000_0803 {
        return Err(Error::Parse("bad IDX image magic".into()));
    }
    let count = read_be_u32(r)? as usize;
    let rows = read_be_u32(r)? as usize;
    let cols = read_be_u32(r)? as usize;
    let features = rows * cols;
    let mut pixels = vec![0u8; count * features];
    r.read_exact(&mut pixels)?;
    let mut x = Mat::zeros(features, count);
    for i in 0..count {
        for f in 0..features {
            x[(f, i)] = pixels[i * features + f] as f64 / 255.0;
        }
    }
    Ok(x)
}

/// IDX label file (magic 0x00000801).
pub fn read_idx_labels(r: &mut impl std::io::Read) -> Result<Vec<usize>> {
    if read_be_u32(r)? != 0x0000_0801 {
        return Err(Error::Parse("bad IDX label magic".into()));
    }
    let count = read_be_u32(r)? as usize;
    let mut labels = vec![0u8; count];
    r.read_exact(&mut labels)?;
    Ok(labels.into_iter().map(|l| l as usize).collect())
}

pub fn read_idx_dataset(
    images: &mut impl std::io::Read,
    labels: &mut impl std::io::Read,
) -> Result<Dataset> {
    let x = read_idx_images(images)?;
    let l = read_idx_labels(labels)?;
    let classes = l.iter().max().map_or(0, |m| m + 1);
    Dataset::new(x, &l, classes)
}

// ---------------------------------------------------------------------------
// Model pieces
// ---------------------------------------------------------------------------

/// Column-wise softmax with max subtraction.
pub fn softmax_columns(z: &Mat) -> Mat {
    let mut out = z.clone();
    for c in 0..z.cols() {
        let mut mx = f64::NEG_INFINITY;
        for r in 0..z.rows() {
            mx = mx.max(z[(r, c)]);
        }
        let mut sum = 0.0;
        for r in 0..z.rows() {
            let e = (z[(r, c)] - mx).exp();
            out[(r, c)] = e;
            sum += e;
        }
        for r in 0..z.rows() {
            out[(r, c)] /= sum;
        }
    }
    out
}

/// The log-likelihood `sum_i sum_j y_ji log p(y_ji = 1 | x_i)`, a value at
/// most zero. The trainer descends on its negation.
pub fn cross_entropy(w: &Mat, x: &Mat, y_onehot: &Mat) -> f64 {
    let probs = softmax_columns(&w.matmul(x));
    let mut total = 0.0;
    for c in 0..probs.cols() {
        for r in 0..probs.rows() {
            if y_onehot[(r, c)] != 0.0 {
                total += y_onehot[(r, c)] * probs[(r, c)].max(1e-12).ln();
            }
        }
    }
    total
}

pub fn accuracy(w: &Mat, data: &Dataset) -> f64 {
    let z = w.matmul(&data.x);
    let mut correct = 0usize;
    for c in 0..data.samples {
        let mut best = 0usize;
        for r in 1..data.classes {
            if z[(r, c)] > z[(best, c)] {
                best = r;
            }
        }
        if best == data.label_of(c) {
            correct += 1;
        }
    }
    correct as f64 / data.samples.max(1) as f64
}

// ---------------------------------------------------------------------------
// Coded products
// ---------------------------------------------------------------------------

/// Which multiplication engine the trainer uses.
#[derive(Clone, Debug)]
pub enum TrainCodec {
    /// Plain local products: the reference trajectory.
    Uncoded,
    /// Uncoded distributed with failures: each product sums only the
    /// surviving contraction blocks. No redundancy, no correction.
    TruncatedUncoded,
    /// Any `p = 1` simulator codec.
    Coded(Codec),
}

/// How survivors are chosen each product.
#[derive(Clone, Debug)]
pub enum TrainPlan {
    /// The loss-maximizing scenario, fixed for the whole run (it depends
    /// only on the code).
    WorstCase,
    /// A fresh seeded size-`k` subset per coded product.
    Random { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub codec: TrainCodec,
    pub plan: TrainPlan,
    pub seed: u64,
    pub m: usize,
    pub workers: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Norm bound for the code; `None` recomputes it from the operands at
    /// each encode, turning the guarantee into a relative one.
    pub eta: Option<f64>,
}

impl TrainConfig {
    /// Paper-default optimizer settings with an uncoded engine.
    pub fn uncoded(iterations: usize, seed: u64) -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 128,
            iterations,
            codec: TrainCodec::Uncoded,
            plan: TrainPlan::Random { seed: 0 },
            seed,
            m: 3,
            workers: 6,
            k: 3,
            epsilon: 1e-2,
            eta: None,
        }
    }
}

/// One coded product `A * B`, with the contraction axis padded up to a
/// multiple of `m`. Returns `None` when the decoder declares failure.
///
/// With `cfg.eta` unset, both operands are scaled to unit Frobenius norm
/// before encoding and the decoded product is scaled back. Algebraically
/// that is the same code with the guarantee turned relative; numerically it
/// keeps the near-zero evaluation points at their intended size regardless
/// of the operand magnitudes.
fn coded_product(
    a: &Mat,
    b: &Mat,
    codec: &Codec,
    subset: &[usize],
    cfg: &TrainConfig,
) -> Result<Option<Mat>> {
    let ap = pad_to_divisible(a, Axis::Cols, cfg.m);
    let bp = pad_to_divisible(b, Axis::Rows, cfg.m);
    match cfg.eta {
        Some(eta) => {
            let params = CodeParams::matdot(cfg.m, cfg.workers, cfg.k, cfg.epsilon, eta)?;
            decode_once(codec, &ap, &bp, &params, subset)
        }
        None => {
            let na = ap.frobenius_norm();
            let nb = bp.frobenius_norm();
            if na == 0.0 || nb == 0.0 {
                return Ok(Some(Mat::zeros(ap.rows(), bp.cols())));
            }
            let params = CodeParams::matdot(cfg.m, cfg.workers, cfg.k, cfg.epsilon, 1.0)?;
            let decoded = decode_once(
                codec,
                &ap.scale(1.0 / na),
                &bp.scale(1.0 / nb),
                &params,
                subset,
            )?;
            Ok(decoded.map(|c| c.scale(na * nb)))
        }
    }
}

/// Forward logits through the configured engine.
pub fn coded_forward(
    w: &Mat,
    x_batch: &Mat,
    codec: &Codec,
    subset: &[usize],
    cfg: &TrainConfig,
) -> Result<Option<Mat>> {
    coded_product(w, x_batch, codec, subset, cfg)
}

/// Gradient `H * X^T` through the configured engine. The contraction axis
/// flips from features to batch, so `X` re-enters the second product
/// transposed, as column blocks.
pub fn coded_gradient(
    h: &Mat,
    x_batch: &Mat,
    codec: &Codec,
    subset: &[usize],
    cfg: &TrainConfig,
) -> Result<Option<Mat>> {
    coded_product(h, &x_batch.transpose(), codec, subset, cfg)
}

fn truncated_product(a: &Mat, b: &Mat, m: usize, survivors: &[usize]) -> Mat {
    let ap = pad_to_divisible(a, Axis::Cols, m);
    let bp = pad_to_divisible(b, Axis::Rows, m);
    let ag = crate::partition::split(&ap, 1, m).expect("padded");
    let bg = crate::partition::split(&bp, m, 1).expect("padded");
    let mut out = Mat::zeros(a.rows(), b.cols());
    for &j in survivors {
        out.axpy(1.0, &ag.block(0, j).matmul(bg.block(j, 0)));
    }
    out
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub w_final: Mat,
    pub accuracy_train: f64,
    pub accuracy_test: f64,
    /// Descent objective (negative log-likelihood per sample) after each
    /// step.
    pub loss_trace: Vec<f64>,
    /// Steps skipped because a decoder declared failure.
    pub skipped_steps: usize,
}

impl TrainReport {
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,loss\n");
        for (i, l) in self.loss_trace.iter().enumerate() {
            out.push_str(&format!("{i},{l}\n"));
        }
        out
    }
}

/// Minibatch gradient descent with coded products, deterministic under a
/// fixed config.
pub fn train(train_set: &Dataset, test_set: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    if cfg.batch_size == 0 || cfg.batch_size > train_set.samples {
        return Err(Error::InvalidParams(format!(
            "batch size {} out of range for {} samples",
            cfg.batch_size, train_set.samples
        )));
    }
    if cfg.learning_rate <= 0.0 || cfg.learning_rate.is_nan() {
        return Err(Error::InvalidParams("learning rate must be positive".into()));
    }
    let features = train_set.x.rows();
    let mut w = Mat::zeros(train_set.classes, features);
    let mut loss_trace = Vec::with_capacity(cfg.iterations);
    let mut skipped_steps = 0usize;

    // The worst-case scenario depends only on the code: compute it once.
    let fixed_subset: Option<Vec<usize>> = match (&cfg.codec, &cfg.plan) {
        (TrainCodec::Coded(codec), TrainPlan::WorstCase) => {
            let probe = CodeParams::matdot(
                cfg.m,
                cfg.workers,
                cfg.k,
                cfg.epsilon,
                cfg.eta.unwrap_or(1.0),
            )?;
            Some(worst_case_subset(codec, &probe, cfg.k)?)
        }
        (TrainCodec::TruncatedUncoded, TrainPlan::WorstCase) => {
            // No code, no loss surface; drop the trailing blocks.
            Some((0..cfg.k.min(cfg.m)).collect())
        }
        _ => None,
    };
    // One survivor draw per training step, shared by both products.
    let draw_subset = |step: usize, pool: usize, k: usize| -> Vec<usize> {
        if let Some(s) = &fixed_subset {
            return s.clone();
        }
        let seed = match &cfg.plan {
            TrainPlan::Random { seed } => *seed,
            TrainPlan::WorstCase => 0,
        };
        let mut rng = Rng::stream(seed, &[0x706c_616e, step as u64]);
        rng.subset(pool, k)
    };

    for step in 0..cfg.iterations {
        let mut batch_rng = Rng::stream(cfg.seed, &[0x6261_7463, step as u64]);
        let batch_idx = batch_rng.subset(train_set.samples, cfg.batch_size);
        let batch = train_set.subset(&batch_idx);

        let (z, g) = match &cfg.codec {
            TrainCodec::Uncoded => {
                let z = w.matmul(&batch.x);
                let h = softmax_columns(&z).sub(&batch.y_onehot);
                let g = h.matmul(&batch.x.transpose());
                (z, g)
            }
            TrainCodec::TruncatedUncoded => {
                let survivors = draw_subset(step, cfg.m, cfg.k.min(cfg.m));
                let z = truncated_product(&w, &batch.x, cfg.m, &survivors);
                let h = softmax_columns(&z).sub(&batch.y_onehot);
                let g = truncated_product(&h, &batch.x.transpose(), cfg.m, &survivors);
                (z, g)
            }
            TrainCodec::Coded(codec) => {
                let survivors = draw_subset(step, cfg.workers, cfg.k);
                let Some(z) = coded_forward(&w, &batch.x, codec, &survivors, cfg)? else {
                    skipped_steps += 1;
                    loss_trace.push(f64::NAN);
                    continue;
                };
                let h = softmax_columns(&z).sub(&batch.y_onehot);
                let Some(g) = coded_gradient(&h, &batch.x, codec, &survivors, cfg)? else {
                    skipped_steps += 1;
                    loss_trace.push(f64::NAN);
                    continue;
                };
                (z, g)
            }
        };
        let _ = z;
        w.axpy(-cfg.learning_rate, &g);
        loss_trace.push(-cross_entropy(&w, &batch.x, &batch.y_onehot) / batch.samples as f64);
    }

    Ok(TrainReport {
        accuracy_train: accuracy(&w, train_set),
        accuracy_test: accuracy(&w, test_set),
        w_final: w,
        loss_trace,
        skipped_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_symmetric_column() {
        let z = Mat::from_rows(&[&[0.0], &[0.0]]);
        let s = softmax_columns(&z);
        assert!((s[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((s[(1, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn softmax_log_ratio() {
        let z = Mat::from_rows(&[&[1.0f64.ln()], &[3.0f64.ln()]]);
        let s = softmax_columns(&z);
        assert!((s[(0, 0)] - 0.25).abs() < 1e-12);
        assert!((s[(1, 0)] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn softmax_shift_invariance_and_column_sums() {
        let z = Mat::from_rows(&[&[2.0, -1.0], &[0.5, 3.0], &[-2.0, 0.0]]);
        let mut shifted = z.clone();
        for c in 0..2 {
            for r in 0..3 {
                shifted[(r, c)] += 7.5;
            }
        }
        let s1 = softmax_columns(&z);
        let s2 = softmax_columns(&shifted);
        assert!(s1.max_abs_diff(&s2) < 1e-12);
        for c in 0..2 {
            let sum: f64 = (0..3).map(|r| s1[(r, c)]).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_entropy_uniform_prediction() {
        // W = 0 gives uniform probabilities: L = D log(1/J).
        let data = synthetic_blobs(1, 3, 4, 10);
        let w = Mat::zeros(3, 4);
        let l = cross_entropy(&w, &data.x, &data.y_onehot);
        let expect = data.samples as f64 * (1.0f64 / 3.0).ln();
        assert!((l - expect).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_perfect_prediction_tends_to_zero() {
        // One sample, one-hot target, logits hugely in favor: probability
        // saturates and the log-likelihood sits at the floor, near zero.
        let x = Mat::from_rows(&[&[1.0]]);
        let y = Mat::from_rows(&[&[1.0], &[0.0]]);
        let w = Mat::from_rows(&[&[50.0], &[-50.0]]);
        let data = Dataset { x, y_onehot: y, classes: 2, samples: 1 };
        let l = cross_entropy(&w, &data.x, &data.y_onehot);
        assert!(l <= 0.0 && l > -1e-9, "loss {l}");
    }

    #[test]
    fn cross_entropy_sample_permutation_invariant() {
        let data = synthetic_blobs(2, 3, 4, 8);
        let w = Mat::from_vec(3, 4, (0..12).map(|i| (i as f64) * 0.1 - 0.5).collect()).unwrap();
        let l1 = cross_entropy(&w, &data.x, &data.y_onehot);
        let perm: Vec<usize> = (0..data.samples).rev().collect();
        let shuffled = data.subset(&perm);
        let l2 = cross_entropy(&w, &shuffled.x, &shuffled.y_onehot);
        assert!((l1 - l2).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // J = 3 classes, 5 features, 8 samples.
        let data = synthetic_blobs(3, 3, 5, 3);
        let idx: Vec<usize> = (0..8).collect();
        let batch = data.subset(&idx);
        let mut w = Mat::zeros(3, 5);
        let mut rng = crate::rng::Rng::new(9);
        for v in w.data_mut() {
            *v = 0.3 * rng.next_normal();
        }
        let h = softmax_columns(&w.matmul(&batch.x)).sub(&batch.y_onehot);
        let grad = h.matmul(&batch.x.transpose());
        let eps = 1e-6;
        for r in 0..3 {
            for c in 0..5 {
                let mut wp = w.clone();
                wp[(r, c)] += eps;
                let mut wm = w.clone();
                wm[(r, c)] -= eps;
                // Central difference of the descent objective (-L).
                let fd = (-cross_entropy(&wp, &batch.x, &batch.y_onehot)
                    + cross_entropy(&wm, &batch.x, &batch.y_onehot))
                    / (2.0 * eps);
                let g = grad[(r, c)];
                assert!(
                    (fd - g).abs() <= 1e-4 * (1.0 + g.abs()),
                    "({r},{c}): fd {fd} vs analytic {g}"
                );
            }
        }
    }

    #[test]
    fn zero_h_gives_zero_gradient() {
        let cfg = TrainConfig::uncoded(1, 0);
        let h = Mat::zeros(3, 10);
        let x = synthetic_blobs(4, 3, 6, 4).x;
        let g = coded_gradient(
            &h,
            &x.subset_cols(10),
            &Codec::MatDotExact { gamma: 1.0 },
            &[0, 1, 2, 3, 4],
            &cfg,
        )
        .unwrap()
        .unwrap();
        assert!(g.max_abs() <= 1e-12);
    }

    #[test]
    fn coded_forward_exact_matches_direct() {
        let data = synthetic_blobs(5, 3, 6, 20);
        let mut rng = crate::rng::Rng::new(12);
        let mut w = Mat::zeros(3, 6);
        for v in w.data_mut() {
            *v = rng.next_normal();
        }
        let cfg = TrainConfig::uncoded(1, 0);
        let z = coded_forward(
            &w,
            &data.x,
            &Codec::MatDotExact { gamma: 1.0 },
            &[0, 1, 2, 3, 4],
            &cfg,
        )
        .unwrap()
        .unwrap();
        assert!(z.max_abs_diff(&w.matmul(&data.x)) <= 1e-8);
    }

    #[test]
    fn coded_forward_eps_matdot_within_epsilon() {
        let data = synthetic_blobs(6, 3, 6, 20);
        let mut rng = crate::rng::Rng::new(13);
        let mut w = Mat::zeros(3, 6);
        for v in w.data_mut() {
            *v = rng.next_normal();
        }
        let cfg = TrainConfig::uncoded(1, 0);
        let z = coded_forward(
            &w,
            &data.x,
            &Codec::MatDotApprox { relaxed: true },
            &[1, 3, 5],
            &cfg,
        )
        .unwrap()
        .unwrap();
        // Auto-eta makes the bound relative to the operand norms.
        let eta = w
            .frobenius_norm()
            .max(data.x.frobenius_norm());
        let _ = eta;
        assert!(z.max_abs_diff(&w.matmul(&data.x)) <= cfg.epsilon);
    }

    #[test]
    fn baseline_uncoded_training_accuracy() {
        let data = synthetic_blobs(7, 3, 6, 200);
        let (train_set, test_set) = data.split_train_test();
        let mut cfg = TrainConfig::uncoded(600, 42);
        cfg.learning_rate = 0.05;
        let report = train(&train_set, &test_set, &cfg).unwrap();
        assert!(report.accuracy_test >= 0.9, "test accuracy {}", report.accuracy_test);
        assert_eq!(report.skipped_steps, 0);
    }

    #[test]
    fn training_deterministic() {
        let data = synthetic_blobs(8, 3, 6, 60);
        let (train_set, test_set) = data.split_train_test();
        let mut cfg = TrainConfig::uncoded(40, 11);
        cfg.codec = TrainCodec::Coded(Codec::MatDotApprox { relaxed: true });
        cfg.plan = TrainPlan::Random { seed: 5 };
        let r1 = train(&train_set, &test_set, &cfg).unwrap();
        let r2 = train(&train_set, &test_set, &cfg).unwrap();
        assert_eq!(r1.w_final, r2.w_final);
        assert_eq!(r1.loss_trace, r2.loss_trace);
    }

    #[test]
    fn idx_roundtrip() {
        // Tiny synthetic IDX pair.
        let mut images: Vec<u8> = Vec::new();
        images.extend_from_slice(&0x0000_0803u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&2u32.to_be_bytes());
        images.extend_from_slice(&[0, 51, 102, 153, 204, 255, 0, 255]);
        let mut labels: Vec<u8> = Vec::new();
        labels.extend_from_slice(&0x0000_0801u32.to_be_bytes());
        labels.extend_from_slice(&2u32.to_be_bytes());
        labels.extend_from_slice(&[1, 0]);
        let data = read_idx_dataset(&mut &images[..], &mut &labels[..]).unwrap();
        assert_eq!(data.samples, 2);
        assert_eq!(data.x.rows(), 4);
        assert!((data.x[(1, 0)] - 0.2).abs() < 1e-12);
        assert_eq!(data.label_of(0), 1);
        assert_eq!(data.label_of(1), 0);
        // Wrong magic rejected.
        images[3] = 0x01;
        assert!(read_idx_images(&mut &images[..]).is_err());
    }

    #[test]
    fn dataset_csv_parses() {
        let text = "1,0.5,-1.0\n0,2.0,3.5\n2,0.0,0.0\n";
        let data = read_dataset_csv(&mut text.as_bytes()).unwrap();
        assert_eq!(data.samples, 3);
        assert_eq!(data.classes, 3);
        assert_eq!(data.label_of(0), 1);
        assert_eq!(data.x[(1, 1)], 3.5);
    }
}

// Test-only convenience used above.
#[cfg(test)]
impl Mat {
    fn subset_cols(&self, n: usize) -> Mat {
        let mut out = Mat::zeros(self.rows(), n);
        for r in 0..self.rows() {
            for c in 0..n {
                out[(r, c)] = self[(r, c)];
            }
        }
        out
    }
}
