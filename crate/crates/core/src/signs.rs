//! Bit-packed +-1 tables on F_2^n.
//!
//! Bit x set means f(x) = -1. Multiplicative derivatives become XORs and means
//! become popcounts, so everything here is exact integer arithmetic.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::Space;
use crate::table::FunctionTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignTable {
    n: usize,
    words: Vec<u64>,
}

impl SignTable {
    pub fn new(n: usize, negative: impl Fn(usize) -> bool) -> Self {
        let size = 1usize << n;
        let mut words = vec![0u64; size.div_ceil(64)];
        for x in 0..size {
            if negative(x) {
                words[x / 64] |= 1 << (x % 64);
            }
        }
        SignTable { n, words }
    }

    /// Accepts only tables over F_2 whose values are exactly +1 or -1.
    pub fn from_table(table: &FunctionTable) -> Result<Self> {
        let s = table.space();
        if s.p() != 2 {
            return Err(Error::Precondition(
                "sign tables live on F_2^n".to_string(),
            ));
        }
        for (x, v) in table.values().iter().enumerate() {
            if v.im != 0.0 || v.re.abs() != 1.0 {
                return Err(Error::Precondition(format!(
                    "value {v} at index {x} is not exactly +-1"
                )));
            }
        }
        Ok(SignTable::new(s.n(), |x| table.get(x).re < 0.0))
    }

    pub fn to_table(&self) -> FunctionTable {
        let space = Space::of(2, self.n).expect("n fits");
        FunctionTable::from_fn(space, |x| {
            if self.is_negative(x) {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn is_negative(&self, x: usize) -> bool {
        self.words[x / 64] >> (x % 64) & 1 == 1
    }

    /// Delta_h f(x) = f(x + h) f(x).
    pub fn mult_derivative(&self, h: usize) -> SignTable {
        let size = self.size();
        let mut words = vec![0u64; self.words.len()];
        if size >= 64 && h % 64 == 0 {
            let hw = h / 64;
            for (w, out) in words.iter_mut().enumerate() {
                *out = self.words[w] ^ self.words[w ^ hw];
            }
        } else {
            for x in 0..size {
                if self.is_negative(x) != self.is_negative(x ^ h) {
                    words[x / 64] |= 1 << (x % 64);
                }
            }
        }
        SignTable { n: self.n, words }
    }

    /// Sum of the table values, exactly.
    pub fn sum(&self) -> i64 {
        let neg: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        self.size() as i64 - 2 * neg as i64
    }

    pub fn mean(&self) -> f64 {
        self.sum() as f64 / self.size() as f64
    }

    /// ||f||_{U^d}^{2^d} by the derivative recursion, with an exact integer base case.
    pub fn gowers_power(&self, d: usize) -> f64 {
        assert!(d >= 1);
        if d == 1 {
            let m = self.mean();
            return m * m;
        }
        let size = self.size();
        let total: f64 = (0..size)
            .map(|h| self.mult_derivative(h).gowers_power(d - 1))
            .sum();
        total / size as f64
    }

    /// Same quantity with an exact Walsh-Hadamard base case at d = 2 and the
    /// outer shifts spread over threads (partials kept in shift order).
    pub fn gowers_power_fourier(&self, d: usize) -> f64 {
        use rayon::prelude::*;
        assert!(d >= 1);
        match d {
            1 => {
                let m = self.mean();
                m * m
            }
            2 => {
                let size = self.size();
                let mut w: Vec<i64> = (0..size)
                    .map(|x| if self.is_negative(x) { -1 } else { 1 })
                    .collect();
                let mut len = 1;
                while len < size {
                    for base in (0..size).step_by(2 * len) {
                        for i in base..base + len {
                            let (a, b) = (w[i], w[i + len]);
                            w[i] = a + b;
                            w[i + len] = a - b;
                        }
                    }
                    len *= 2;
                }
                let fourth: i128 = w.iter().map(|&v| (v as i128).pow(4)).sum();
                fourth as f64 / (size as f64).powi(4)
            }
            _ => {
                let size = self.size();
                let partial: Vec<f64> = (0..size)
                    .into_par_iter()
                    .map(|h| self.mult_derivative(h).gowers_power_fourier(d - 1))
                    .collect();
                crate::reduce::compensated_sum(partial) / size as f64
            }
        }
    }

    pub fn gowers_norm(&self, d: usize) -> f64 {
        self.gowers_power(d).max(0.0).powf(1.0 / (1u64 << d) as f64)
    }
}
