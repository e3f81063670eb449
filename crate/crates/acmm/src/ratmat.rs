//! Dense matrices over exact rationals.
//!
//! Every `f64` is a dyadic rational, so a simulation that converts its inputs
//! once and then sticks to rational arithmetic is exact: the only rounding
//! happens in the final conversion back to `f64`. The per-block PolyDot
//! decoder needs this; at its operating points the interesting coefficient
//! signal sits far below the `f64` mantissa floor of the worker outputs, and
//! no decoder can recover what the arithmetic already discarded.

use crate::mat::Mat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub(crate) fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

pub(crate) fn rat_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // Out-of-range magnitudes collapse to signed infinity.
        if v.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn from_mat(m: &Mat) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|&v| rat(v)).collect(),
        }
    }

    pub fn to_mat(&self) -> Mat {
        let data = self.data.iter().map(rat_to_f64).collect();
        Mat::from_vec(self.rows, self.cols, data).expect("shape preserved")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: &BigRational, other: &RatMat) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        if s.is_zero() {
            return;
        }
        for (d, o) in self.data.iter_mut().zip(other.data.iter()) {
            *d += s * o;
        }
    }

    pub fn matmul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a * other.get(k, j);
                    out.data[i * other.cols + j] += t;
                }
            }
        }
        out
    }
}

/// Exact integer power of a rational.
pub(crate) fn rat_pow(base: &BigRational, exp: usize) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for _ in 0..exp {
        acc *= base;
    }
    acc
}
