// Copyright 2026 The qnet Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex matrices and the matrix exponential.
//!
//! `expm` is the scaling-and-squaring method with a degree-13 diagonal Padé
//! approximant (Higham, SIAM J. Matrix Anal. Appl. 26 (2005) 1179). It makes
//! no assumption of diagonalizability, which matters for the non-Hermitian
//! generators used by the sink dynamics.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Square row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scaled(&self, k: Complex<T>) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        debug_assert_eq!(n, rhs.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self + Σ c_k M_k` for real coefficients.
    fn add_combination(mut self, terms: &[(T, &Self)]) -> Self {
        for (c, m) in terms {
            for (o, &v) in self.data.iter_mut().zip(&m.data) {
                *o += v.scale(*c);
            }
        }
        self
    }

    fn add_identity(mut self, c: T) -> Self {
        for i in 0..self.n {
            self.data[i * self.n + i].re += c;
        }
        self
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[(p, col)].norm().partial_cmp(&a[(q, col)].norm()).unwrap())?;
            if a[(pivot, col)].norm() == T::zero() {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    b.data.swap(pivot * n + j, col * n + j);
                }
            }
            let inv = a[(col, col)].inv();
            for row in col + 1..n {
                let factor = a[(row, col)] * inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(row, j)] -= factor * v;
                }
                for j in 0..n {
                    let v = b[(col, j)];
                    b[(row, j)] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let pivot = a[(col, col)];
            for j in 0..n {
                let mut acc = b[(col, j)];
                for k in col + 1..n {
                    acc -= a[(col, k)] * b[(k, j)];
                }
                b[(col, j)] = acc / pivot;
            }
        }
        Some(b)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.n + j]
    }
}

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential `exp(a)`.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.dim();
    if n == 0 {
        return CMatrix::zeros(0);
    }
    let norm = a.norm1().as_f64();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scaled(Complex::new(T::lit(2f64.powi(-squarings)), T::zero()));

    // Normalised so the constant term is exactly one; exp(0) is then exact.
    let b = PADE13.map(|c| T::lit(c / PADE13[0]));
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    let inner_u = CMatrix::zeros(n).add_combination(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
    let u = a6
        .matmul(&inner_u)
        .add_combination(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)])
        .add_identity(b[1]);
    let u = a.matmul(&u);

    let inner_v = CMatrix::zeros(n).add_combination(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
    let v = a6
        .matmul(&inner_v)
        .add_combination(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)])
        .add_identity(b[0]);

    let minus_one = -T::one();
    let num = v.clone().add_combination(&[(T::one(), &u)]);
    let den = v.add_combination(&[(minus_one, &u)]);
    let mut r = den
        .solve(&num)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    r
}
