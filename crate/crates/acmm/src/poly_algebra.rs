//! Polynomial and Vandermonde primitives shared by every code.
//!
//! The decoders in this crate all reduce to the same picture: a polynomial
//! with matrix coefficients is evaluated at a handful of scalar points, the
//! workers hand back the evaluations, and the master extracts one coefficient
//! by solving (or least-norm solving) a Vandermonde system. This module owns
//! that picture: Vandermonde construction, the explicit inverse-last-row
//! formula, symmetric polynomials, Chebyshev point grids, and the minimum-norm
//! solver.

use crate::error::{Error, Result};
use crate::mat::Mat;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Ordered, pairwise-distinct, finite evaluation points.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationPoints(Vec<f64>);

impl EvaluationPoints {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parse("evaluation points must be finite".into()));
        }
        ensure_distinct(&points)?;
        Ok(Self(points))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// The first `n` points, as their own point set.
    pub fn take(&self, n: usize) -> Result<Self> {
        if n > self.0.len() {
            return Err(Error::IndexViolation(format!(
                "requested {n} points, have {}",
                self.0.len()
            )));
        }
        Ok(Self(self.0[..n].to_vec()))
    }
}

impl std::ops::Index<usize> for EvaluationPoints {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn ensure_distinct(points: &[f64]) -> Result<()> {
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i] == points[j] {
                return Err(Error::DistinctnessViolation);
            }
        }
    }
    Ok(())
}

/// A univariate polynomial; index `i` holds the coefficient of `x^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Degree with trailing zeros trimmed; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }
}

// ---------------------------------------------------------------------------
// Vandermonde construction and inversion identities
// ---------------------------------------------------------------------------

/// The `k x m` Vandermonde matrix with entry `(r, c) = points[c]^r`.
///
/// In the row-vector convention a coefficient row `a` of length `k`
/// satisfies `a * V = [f(points[0]), ..., f(points[m-1])]`.
pub fn vandermonde(points: &EvaluationPoints, k: usize) -> Result<Mat> {
    if k < 1 {
        return Err(Error::IndexViolation("vandermonde needs k >= 1".into()));
    }
    let m = points.len();
    let mut v = Mat::zeros(k, m);
    for c in 0..m {
        let mut pow = 1.0;
        for r in 0..k {
            v[(r, c)] = pow;
            pow *= points[c];
        }
    }
    Ok(v)
}

/// Last row of the inverse of the square Vandermonde whose row `r` is
/// `(points[r]^0, ..., points[r]^{m-1})`.
///
/// Entry `i` is `1 / prod_{j != i} (x_i - x_j)`. Applied to a column of
/// polynomial evaluations it extracts the leading coefficient `a_{m-1}` of
/// any polynomial of degree at most `m-1`.
pub fn vandermonde_inverse_last_row(points: &EvaluationPoints) -> Result<Vec<f64>> {
    ensure_distinct(points.as_slice())?;
    let m = points.len();
    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let mut prod = 1.0;
        for j in 0..m {
            if j != i {
                prod *= points[i] - points[j];
            }
        }
        v.push(1.0 / prod);
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Symmetric polynomials
// ---------------------------------------------------------------------------

/// Elementary symmetric polynomial `e_l`: the sum over size-`l` subsets of
/// the product of entries. `e_0 = 1`.
pub fn elem_sym(points: &[f64], l: usize) -> Result<f64> {
    let n = points.len();
    if l > n {
        return Err(Error::IndexViolation(format!(
            "elementary symmetric degree {l} exceeds {n} variables"
        )));
    }
    // e[d] after processing x: e_d += x * e_{d-1}, descending d.
    let mut e = vec![0.0; l + 1];
    e[0] = 1.0;
    for &x in points {
        for d in (1..=l).rev() {
            e[d] += x * e[d - 1];
        }
    }
    Ok(e[l])
}

/// Complete homogeneous symmetric polynomial `h_l`: the sum of all degree-`l`
/// monomials in the given variables. `h_0 = 1`.
///
/// Computed by dynamic programming over (variable, degree) in O(m*l); the
/// brute-force monomial enumeration survives only as a test oracle.
pub fn complete_homog(points: &[f64], l: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::IndexViolation(
            "complete_homog needs at least one variable".into(),
        ));
    }
    let mut h = vec![0.0; l + 1];
    h[0] = 1.0;
    for &x in points {
        for d in 1..=l {
            h[d] += x * h[d - 1];
        }
    }
    Ok(h[l])
}

/// Both sides of the power-sum identity
/// `sum_i x_i^{m-1+l} / prod_{j != i} (x_i - x_j)  =  h_l(x)`.
///
/// Returned as `(lhs, rhs)` so callers can assert closeness; the identity is
/// the backbone of the per-block decoder error analysis and serves here as a
/// self-test oracle.
pub fn power_sum_identity_check(points: &EvaluationPoints, l: usize) -> Result<(f64, f64)> {
    let m = points.len();
    let weights = vandermonde_inverse_last_row(points)?;
    let mut lhs = 0.0;
    for i in 0..m {
        lhs += points[i].powi((m - 1 + l) as i32) * weights[i];
    }
    let rhs = complete_homog(points.as_slice(), l)?;
    Ok((lhs, rhs))
}

// ---------------------------------------------------------------------------
// Chebyshev point grids
// ---------------------------------------------------------------------------

/// `P` Chebyshev nodes scaled into `(-1/gamma, 1/gamma)`:
/// `lambda_i = cos((2i - 1) pi / (2P)) / gamma` for `i` in `1..=P`.
pub fn chebyshev_points(p: usize, gamma: f64) -> Result<EvaluationPoints> {
    if p < 1 {
        return Err(Error::IndexViolation("need at least one point".into()));
    }
    if gamma <= 0.0 || gamma.is_nan() {
        return Err(Error::InvalidParams(format!("gamma must be positive, got {gamma}")));
    }
    let pts = (1..=p)
        .map(|i| ((2 * i - 1) as f64 * std::f64::consts::PI / (2 * p) as f64).cos() / gamma)
        .collect();
    EvaluationPoints::new(pts)
}

/// `P` uniformly spaced points symmetric about zero inside `(-1/gamma, 1/gamma)`.
///
/// The A/B alternative to Chebyshev spacing for conditioning comparisons.
pub fn uniform_points(p: usize, gamma: f64) -> Result<EvaluationPoints> {
    if p < 1 {
        return Err(Error::IndexViolation("need at least one point".into()));
    }
    let pts = (1..=p)
        .map(|i| ((2 * i - 1) as f64 / p as f64 - 1.0) / gamma)
        .collect();
    EvaluationPoints::new(pts)
}

// ---------------------------------------------------------------------------
// Minimum-norm solver
// ---------------------------------------------------------------------------

/// Relative rank tolerance for declaring a system degenerate.
pub(crate) const RANK_TOL: f64 = 1e-12;

/// Relative floor below which the shared decoder factorization drops a
/// direction. Set near the f64 noise floor: a direction whose pivot sits
/// above it still carries usable signal (clustered points push pivots to
/// `delta^t`, and the smallest useful one can be well under `1e-12`), while
/// one below it would only amplify rounding of the worker outputs.
pub(crate) const DECODE_RANK_TOL: f64 = 1e-14;

/// Thin Householder QR of a tall (or square) matrix: `a = q * r` with `q`
/// carrying orthonormal columns (rows(a) x cols(a)) and `r` upper triangular
/// (cols(a) x cols(a)).
pub(crate) fn qr_thin(a: &Mat) -> (Mat, Mat) {
    let (rows, cols) = (a.rows(), a.cols());
    assert!(rows >= cols, "qr_thin needs rows >= cols");
    let mut work = a.clone();
    // Householder vectors, one per column, stored densely.
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for t in 0..cols {
        let mut v: Vec<f64> = (t..rows).map(|r| work[(r, t)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
            if vnorm2 > 0.0 {
                // Apply I - 2 v v^T / (v^T v) to the trailing block.
                for c in t..cols {
                    let dot: f64 = (t..rows).map(|r| v[r - t] * work[(r, c)]).sum();
                    let f = 2.0 * dot / vnorm2;
                    for r in t..rows {
                        work[(r, c)] -= f * v[r - t];
                    }
                }
            }
            work[(t, t)] = alpha;
            for r in (t + 1)..rows {
                work[(r, t)] = 0.0;
            }
        }
        vs.push(v);
    }
    let mut r = Mat::zeros(cols, cols);
    for i in 0..cols {
        for j in i..cols {
            r[(i, j)] = work[(i, j)];
        }
    }
    // Accumulate thin Q by applying the reflectors in reverse to I's leading
    // columns.
    let mut q = Mat::zeros(rows, cols);
    for c in 0..cols {
        q[(c, c)] = 1.0;
    }
    for t in (0..cols).rev() {
        let v = &vs[t];
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in 0..cols {
            let dot: f64 = (t..rows).map(|r| v[r - t] * q[(r, c)]).sum();
            let f = 2.0 * dot / vnorm2;
            for r in t..rows {
                q[(r, c)] -= f * v[r - t];
            }
        }
    }
    (q, r)
}

/// Minimum-2-norm solution of `a * v = y` in the row-vector convention,
/// where `v` is `k x K` with `k >= K` and full column rank.
///
/// Solved through a Householder QR of `v`; when `k = K` this is the unique
/// interpolation solution. Rank deficiency relative to the column scale
/// (tolerance `1e-12 * scale`) is an error, which decoders treat as failure.
pub fn min_norm_solve(v: &Mat, y: &[f64]) -> Result<Vec<f64>> {
    let (k, big_k) = (v.rows(), v.cols());
    if y.len() != big_k {
        return Err(Error::ShapeViolation(format!(
            "rhs length {} does not match {} columns",
            y.len(),
            big_k
        )));
    }
    if k < big_k {
        return Err(Error::ShapeViolation(format!(
            "min_norm_solve needs rows >= cols, got {k} x {big_k}"
        )));
    }
    let scale = column_scale(v);
    let (q, r) = qr_thin(v);
    for t in 0..big_k {
        if r[(t, t)].abs() <= RANK_TOL * scale {
            return Err(Error::RankDeficient);
        }
    }
    let z = forward_substitute_transposed(&r, y, None);
    Ok(apply_q(&q, &z))
}

fn column_scale(v: &Mat) -> f64 {
    let mut scale = 0.0f64;
    for c in 0..v.cols() {
        let norm: f64 = (0..v.rows()).map(|r| v[(r, c)] * v[(r, c)]).sum::<f64>().sqrt();
        scale = scale.max(norm);
    }
    scale
}

/// Solve `r^T z = y` by forward substitution. Entries whose pivot is marked
/// dropped (or is exactly zero) are set to zero instead of divided.
fn forward_substitute_transposed(r: &Mat, y: &[f64], keep: Option<&[bool]>) -> Vec<f64> {
    let n = r.cols();
    let mut z = vec![0.0; n];
    for t in 0..n {
        let mut acc = y[t];
        for s in 0..t {
            acc -= r[(s, t)] * z[s];
        }
        let pivot = r[(t, t)];
        let kept = keep.is_none_or(|k| k[t]);
        z[t] = if kept && pivot != 0.0 { acc / pivot } else { 0.0 };
    }
    z
}

/// Solve `r x = c` by back substitution with the same dropped-pivot rule.
fn back_substitute(r: &Mat, c: &[f64], keep: Option<&[bool]>) -> Vec<f64> {
    let n = r.cols();
    let mut x = vec![0.0; n];
    for t in (0..n).rev() {
        let mut acc = c[t];
        for s in (t + 1)..n {
            acc -= r[(t, s)] * x[s];
        }
        let pivot = r[(t, t)];
        let kept = keep.is_none_or(|k| k[t]);
        x[t] = if kept && pivot != 0.0 { acc / pivot } else { 0.0 };
    }
    x
}

fn apply_q(q: &Mat, z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; q.rows()];
    for (t, &zt) in z.iter().enumerate() {
        if zt == 0.0 {
            continue;
        }
        for r in 0..q.rows() {
            out[r] += q[(r, t)] * zt;
        }
    }
    out
}

/// A factorization of one Vandermonde system, reused across all matrix
/// entries during decoding.
///
/// Clustered evaluation points make the trailing directions of these systems
/// numerically unobservable; directions below the rank tolerance carry no
/// usable information and are dropped rather than amplified into the
/// solution. The decoder's norm-bound failure test then sees a clean
/// coefficient vector instead of rounding garbage.
pub(crate) struct LsqSolver {
    q: Mat,
    r: Mat,
    keep: Vec<bool>,
    tall: bool,
}

impl LsqSolver {
    /// Factor the coefficient-extraction system for `v` (`k x K`). Handles
    /// both the underdetermined case (`K <= k`, minimum-norm) and the
    /// overdetermined case (`K > k`, least squares).
    pub fn factor(v: &Mat) -> Self {
        let tall = v.rows() >= v.cols();
        let target = if tall { v.clone() } else { v.transpose() };
        let scale = column_scale(&target);
        let (q, r) = qr_thin(&target);
        let keep = (0..r.cols())
            .map(|t| r[(t, t)].abs() > DECODE_RANK_TOL * scale)
            .collect();
        Self { q, r, keep, tall }
    }

    pub fn is_fully_ranked(&self) -> bool {
        self.keep.iter().all(|&k| k)
    }

    /// Coefficient vector (length `k`) consistent with the evaluations `y`.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        if self.tall {
            let z = forward_substitute_transposed(&self.r, y, Some(&self.keep));
            apply_q(&self.q, &z)
        } else {
            // Least squares on v^T a = y: project then back-substitute.
            let mut c = vec![0.0; self.r.cols()];
            for (t, ct) in c.iter_mut().enumerate() {
                *ct = (0..y.len()).map(|r| self.q[(r, t)] * y[r]).sum();
            }
            back_substitute(&self.r, &c, Some(&self.keep))
        }
    }

    /// The linear functional `f` (one weight per evaluation) with
    /// `f . y = solve(y)[coeff_index]` for every right-hand side.
    pub fn functional(&self, coeff_index: usize) -> Vec<f64> {
        if self.tall {
            // solve(y)[i] = Q[i,:] . R^{-T} y, so f = R^{-1} Q[i,:]^T.
            let qrow: Vec<f64> = (0..self.r.cols()).map(|t| self.q[(coeff_index, t)]).collect();
            back_substitute(&self.r, &qrow, Some(&self.keep))
        } else {
            // solve(y) = R^{-1} Q^T y, so f = Q R^{-T} e_i.
            let mut e = vec![0.0; self.r.cols()];
            e[coeff_index] = 1.0;
            let g = forward_substitute_transposed(&self.r, &e, Some(&self.keep));
            apply_q(&self.q, &g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn pts(v: &[f64]) -> EvaluationPoints {
        EvaluationPoints::new(v.to_vec()).unwrap()
    }

    // Gauss-Jordan inversion, used only as an oracle here.
    fn invert(m: &Mat) -> Mat {
        let n = m.rows();
        assert_eq!(n, m.cols());
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = m[(i, j)];
            }
            aug[(i, n + i)] = 1.0;
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&a, &b| {
                    aug[(a, col)].abs().partial_cmp(&aug[(b, col)].abs()).unwrap()
                })
                .unwrap();
            assert!(aug[(piv, col)].abs() > 1e-300, "singular oracle matrix");
            if piv != col {
                for j in 0..2 * n {
                    let tmp = aug[(col, j)];
                    aug[(col, j)] = aug[(piv, j)];
                    aug[(piv, j)] = tmp;
                }
            }
            let p = aug[(col, col)];
            for j in 0..2 * n {
                aug[(col, j)] /= p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = aug[(row, col)];
                for j in 0..2 * n {
                    aug[(row, j)] -= f * aug[(col, j)];
                }
            }
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)];
            }
        }
        inv
    }

    // --- vandermonde ---

    #[test]
    fn vandermonde_powers_of_zero() {
        let v = vandermonde(&pts(&[0.0]), 3).unwrap();
        assert_eq!(v.rows(), 3);
        assert_eq!(v.cols(), 1);
        assert_eq!((v[(0, 0)], v[(1, 0)], v[(2, 0)]), (1.0, 0.0, 0.0));
    }

    #[test]
    fn vandermonde_two_points() {
        let v = vandermonde(&pts(&[1.0, 2.0]), 2).unwrap();
        assert_eq!(v, Mat::from_rows(&[&[1.0, 1.0], &[1.0, 2.0]]));
    }

    #[test]
    fn vandermonde_row_vector_matches_horner() {
        let points = pts(&[0.1, -0.1, 0.2]);
        let v = vandermonde(&points, 5).unwrap();
        assert_eq!((v.rows(), v.cols()), (5, 3));
        let mut rng = Rng::new(11);
        for _ in 0..10 {
            let coeffs: Vec<f64> = (0..5).map(|_| rng.next_normal()).collect();
            let poly = Polynomial::new(coeffs.clone());
            for c in 0..3 {
                let via_v: f64 = (0..5).map(|r| coeffs[r] * v[(r, c)]).sum();
                let direct = poly.eval(points[c]);
                assert!(
                    (via_v - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                    "column {c}: {via_v} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn vandermonde_rejects_duplicates() {
        assert!(matches!(
            EvaluationPoints::new(vec![1.0, 1.0]),
            Err(Error::DistinctnessViolation)
        ));
    }

    // --- inverse last row ---

    #[test]
    fn inverse_last_row_two_points() {
        let v = vandermonde_inverse_last_row(&pts(&[1.0, 2.0])).unwrap();
        assert_eq!(v, vec![-1.0, 1.0]);
    }

    #[test]
    fn inverse_last_row_three_points_against_full_inversion() {
        let points = pts(&[0.0, 1.0, 2.0]);
        let got = vandermonde_inverse_last_row(&points).unwrap();
        assert!((got[0] - 0.5).abs() < 1e-12);
        assert!((got[1] + 1.0).abs() < 1e-12);
        assert!((got[2] - 0.5).abs() < 1e-12);
        // Row-per-point Vandermonde, inverted directly.
        let w = vandermonde(&points, 3).unwrap().transpose();
        let winv = invert(&w);
        for i in 0..3 {
            assert!((got[i] - winv[(2, i)]).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_last_row_annihilates_constants() {
        for m in 2..=6 {
            let points: Vec<f64> = (0..m).map(|i| 0.3 * i as f64 - 0.7).collect();
            let v = vandermonde_inverse_last_row(&pts(&points)).unwrap();
            let dot: f64 = v.iter().sum();
            assert!(dot.abs() < 1e-9, "m={m}: {dot}");
        }
    }

    #[test]
    fn inverse_last_row_extracts_leading_coefficient() {
        let mut rng = Rng::new(3);
        for m in 2..=6 {
            let points: Vec<f64> = (0..m).map(|i| 0.4 * i as f64 - 0.9).collect();
            let ep = pts(&points);
            let row = vandermonde_inverse_last_row(&ep).unwrap();
            for _ in 0..20 {
                let coeffs: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
                let poly = Polynomial::new(coeffs.clone());
                let got: f64 = (0..m).map(|i| row[i] * poly.eval(points[i])).sum();
                assert!(
                    (got - coeffs[m - 1]).abs() < 1e-9,
                    "m={m}: {got} vs {}",
                    coeffs[m - 1]
                );
            }
        }
    }

    // --- symmetric polynomials ---

    fn elem_sym_brute(points: &[f64], l: usize) -> f64 {
        let n = points.len();
        if l == 0 {
            return 1.0;
        }
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != l {
                continue;
            }
            let mut prod = 1.0;
            for (i, &x) in points.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    prod *= x;
                }
            }
            total += prod;
        }
        total
    }

    fn complete_homog_brute(points: &[f64], l: usize) -> f64 {
        // Recursive enumeration of all degree-l monomials.
        fn go(points: &[f64], l: usize) -> f64 {
            if l == 0 {
                return 1.0;
            }
            if points.is_empty() {
                return 0.0;
            }
            let mut total = 0.0;
            let mut power = 1.0;
            for d in 0..=l {
                total += power * go(&points[1..], l - d);
                power *= points[0];
            }
            total
        }
        go(points, l)
    }

    #[test]
    fn elem_sym_spec_values() {
        assert_eq!(elem_sym(&[4.0, -2.0, 0.5], 0).unwrap(), 1.0);
        assert_eq!(elem_sym(&[1.0, 2.0, 3.0], 2).unwrap(), 11.0);
        assert_eq!(elem_sym(&[1.0, 2.0, 3.0], 3).unwrap(), 6.0);
        assert!(elem_sym(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn elem_sym_matches_brute_force() {
        let mut rng = Rng::new(5);
        for n in 1..=6 {
            let xs: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            for l in 0..=n {
                let fast = elem_sym(&xs, l).unwrap();
                let brute = elem_sym_brute(&xs, l);
                assert!((fast - brute).abs() < 1e-10 * (1.0 + brute.abs()));
            }
        }
    }

    #[test]
    fn complete_homog_spec_values() {
        assert_eq!(complete_homog(&[9.0, -3.0], 0).unwrap(), 1.0);
        assert_eq!(complete_homog(&[2.5, 4.0], 1).unwrap(), 6.5);
        assert_eq!(complete_homog(&[1.0, 2.0], 2).unwrap(), 7.0);
    }

    #[test]
    fn complete_homog_matches_enumeration() {
        let mut rng = Rng::new(6);
        for n in 1..=4 {
            let xs: Vec<f64> = (0..n).map(|_| rng.next_normal() * 0.5).collect();
            for l in 0..=4 {
                if n * l > 20 {
                    continue;
                }
                let fast = complete_homog(&xs, l).unwrap();
                let brute = complete_homog_brute(&xs, l);
                assert!(
                    (fast - brute).abs() < 1e-10 * (1.0 + brute.abs()),
                    "n={n} l={l}: {fast} vs {brute}"
                );
            }
        }
    }

    #[test]
    fn newton_cross_check_between_e_and_h() {
        // sum_{i=0..l} (-1)^i e_i h_{l-i} = 0 for l >= 1.
        let mut rng = Rng::new(7);
        for n in 1..=5 {
            let xs: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            for l in 1..=n {
                let mut acc = 0.0;
                for i in 0..=l {
                    let e = if i <= n { elem_sym(&xs, i).unwrap() } else { 0.0 };
                    let h = complete_homog(&xs, l - i).unwrap();
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * e * h;
                }
                assert!(acc.abs() < 1e-9, "n={n} l={l}: {acc}");
            }
        }
    }

    // --- power-sum identity ---

    #[test]
    fn power_sum_identity_two_points() {
        let (lhs, rhs) = power_sum_identity_check(&pts(&[1.0, 2.0]), 1).unwrap();
        assert!((lhs - 3.0).abs() < 1e-12);
        assert!((rhs - 3.0).abs() < 1e-12);
    }

    #[test]
    fn power_sum_identity_three_points() {
        let (lhs, rhs) = power_sum_identity_check(&pts(&[0.3, -0.5, 0.7]), 2).unwrap();
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    // --- chebyshev points ---

    #[test]
    fn chebyshev_single_point_is_zero() {
        let p = chebyshev_points(1, 1.0).unwrap();
        assert!(p[0].abs() < 1e-15);
    }

    #[test]
    fn chebyshev_two_points() {
        let p = chebyshev_points(2, 1.0).unwrap();
        let s = 2.0f64.sqrt() / 2.0;
        assert!((p[0] - s).abs() < 1e-15);
        assert!((p[1] + s).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_scaled_bound() {
        let p = chebyshev_points(6, 70_000.0).unwrap();
        assert_eq!(p.len(), 6);
        for i in 0..6 {
            assert!(p[i].abs() < 1.0 / 70_000.0);
        }
    }

    #[test]
    fn uniform_points_symmetric_and_bounded() {
        let p = uniform_points(4, 10.0).unwrap();
        for i in 0..4 {
            assert!(p[i].abs() < 0.1);
            assert!((p[i] + p[3 - i]).abs() < 1e-15);
        }
    }

    // --- min-norm solve ---

    #[test]
    fn min_norm_scalar() {
        let v = Mat::from_rows(&[&[2.0]]);
        let a = min_norm_solve(&v, &[6.0]).unwrap();
        assert_eq!(a, vec![3.0]);
    }

    #[test]
    fn min_norm_underdetermined_feasible_and_no_longer_than_truth() {
        // Known coefficients (4, 11, 6); two evaluation points, three unknowns.
        let points = pts(&[0.1, -0.1]);
        let v = vandermonde(&points, 3).unwrap();
        let truth = [4.0, 11.0, 6.0];
        let poly = Polynomial::new(truth.to_vec());
        let y: Vec<f64> = [0.1, -0.1].iter().map(|&x| poly.eval(x)).collect();
        let a = min_norm_solve(&v, &y).unwrap();
        for c in 0..2 {
            let got: f64 = (0..3).map(|r| a[r] * v[(r, c)]).sum();
            assert!((got - y[c]).abs() < 1e-8 * (1.0 + y[c].abs()));
        }
        let norm_a: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm_truth: f64 = truth.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm_a <= norm_truth + 1e-8);
    }

    #[test]
    fn min_norm_square_matches_direct_solve() {
        let mut rng = Rng::new(13);
        for n in 1..=6 {
            // Random well-conditioned square system via random points.
            let points: Vec<f64> = (0..n).map(|i| i as f64 + 0.3 * rng.next_f64()).collect();
            let ep = pts(&points);
            let v = vandermonde(&ep, n).unwrap();
            let a0: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            let y: Vec<f64> = (0..n)
                .map(|c| (0..n).map(|r| a0[r] * v[(r, c)]).sum())
                .collect();
            let a = min_norm_solve(&v, &y).unwrap();
            for i in 0..n {
                assert!(
                    (a[i] - a0[i]).abs() < 1e-9 * (1.0 + a0[i].abs()),
                    "n={n} i={i}: {} vs {}",
                    a[i],
                    a0[i]
                );
            }
        }
    }

    #[test]
    fn min_norm_consistency_on_random_systems() {
        let mut rng = Rng::new(17);
        for _ in 0..25 {
            let k = 2 + rng.next_below(5) as usize;
            let kk = 1 + rng.next_below(k as u64) as usize;
            let mut v = Mat::zeros(k, kk);
            for r in 0..k {
                for c in 0..kk {
                    v[(r, c)] = rng.next_normal();
                }
            }
            let a0: Vec<f64> = (0..k).map(|_| rng.next_normal()).collect();
            let y: Vec<f64> = (0..kk)
                .map(|c| (0..k).map(|r| a0[r] * v[(r, c)]).sum())
                .collect();
            let a = min_norm_solve(&v, &y).unwrap();
            for c in 0..kk {
                let got: f64 = (0..k).map(|r| a[r] * v[(r, c)]).sum();
                assert!((got - y[c]).abs() < 1e-8 * (1.0 + y[c].abs()));
            }
        }
    }

    #[test]
    fn min_norm_rejects_rank_deficient() {
        // Two identical columns.
        let v = Mat::from_rows(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]);
        assert!(matches!(min_norm_solve(&v, &[1.0, 1.0]), Err(Error::RankDeficient)));
    }

    #[test]
    fn lsq_solver_overdetermined_recovers_exactly() {
        // More evaluations than coefficients: plain least squares.
        let points = pts(&[0.9, 0.3, -0.2, -0.8, 0.5]);
        let v = vandermonde(&points, 3).unwrap();
        let truth = [1.0, -2.0, 0.5];
        let poly = Polynomial::new(truth.to_vec());
        let y: Vec<f64> = points.as_slice().iter().map(|&x| poly.eval(x)).collect();
        let solver = LsqSolver::factor(&v);
        assert!(solver.is_fully_ranked());
        let a = solver.solve(&y);
        assert_eq!(a.len(), 3);
        for i in 0..3 {
            assert!((a[i] - truth[i]).abs() < 1e-10);
        }
    }
}
