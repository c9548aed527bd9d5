//! Deterministic parallel reductions.
//!
//! Index ranges are cut into fixed-size chunks; chunk partials are summed in
//! index order, so results are bit-identical for any thread count.

use num_complex::Complex64;
use rayon::prelude::*;

pub const CHUNK: usize = 1 << 12;

pub fn sum_complex<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    if len <= CHUNK {
        return (0..len).map(f).fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    }
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            (lo..hi).map(&f).fold(Complex64::new(0.0, 0.0), |a, b| a + b)
        })
        .collect();
    partial
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

pub fn sum_real<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if len <= CHUNK {
        return (0..len).map(f).fold(0.0, |a, b| a + b);
    }
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            (lo..hi).map(&f).fold(0.0, |a, b| a + b)
        })
        .collect();
    partial.into_iter().fold(0.0, |a, b| a + b)
}

pub fn mean_complex<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    sum_complex(len, f) / len as f64
}

pub fn mean_real<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_real(len, f) / len as f64
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
