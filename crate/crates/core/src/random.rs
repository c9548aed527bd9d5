//! Seeded generators for test and benchmark tables.
//!
//! Every generator takes an explicit seed and draws from ChaCha8, so output is
//! identical across platforms and runs.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::space::Space;
use crate::table::{FieldTable, FunctionTable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`; used to split work across tasks.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Values drawn uniformly (by area) from the closed unit disk.
pub fn disk_table<R: Rng>(space: Space, rng: &mut R) -> FunctionTable {
    let values = (0..space.size())
        .map(|_| {
            let r: f64 = rng.gen::<f64>().sqrt();
            let a: f64 = rng.gen();
            Complex64::from_polar(r, TAU * a)
        })
        .collect();
    FunctionTable::new(space, values).expect("length matches")
}

pub fn unit_table<R: Rng>(space: Space, rng: &mut R) -> FunctionTable {
    let values = (0..space.size())
        .map(|_| Complex64::from_polar(1.0, TAU * rng.gen::<f64>()))
        .collect();
    FunctionTable::new(space, values).expect("length matches")
}

pub fn sign_table<R: Rng>(space: Space, rng: &mut R) -> FunctionTable {
    let values = (0..space.size())
        .map(|_| {
            if rng.gen::<bool>() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        })
        .collect();
    FunctionTable::new(space, values).expect("length matches")
}

pub fn field_table<R: Rng>(space: Space, rng: &mut R) -> FieldTable {
    let p = space.p();
    let values = (0..space.size()).map(|_| rng.gen_range(0..p)).collect();
    FieldTable::new(space, values).expect("residues in range")
}

/// Replace a `rate` fraction of entries (chosen by per-point coin flips) with random
/// unit values. For a fixed seed the corrupted set grows monotonically with `rate`.
pub fn corrupt(table: &FunctionTable, rate: f64, seed: u64) -> FunctionTable {
    let mut r = rng(seed);
    let values = table
        .values()
        .iter()
        .map(|&v| {
            let coin: f64 = r.gen();
            let angle: f64 = r.gen();
            if coin < rate {
                Complex64::from_polar(1.0, TAU * angle)
            } else {
                v
            }
        })
        .collect();
    FunctionTable::new(table.space(), values).expect("length matches")
}

/// Negate a `rate` fraction of entries (per-point coin flips).
pub fn flip_signs(table: &FunctionTable, rate: f64, seed: u64) -> FunctionTable {
    let mut r = rng(seed);
    let values = table
        .values()
        .iter()
        .map(|&v| if r.gen::<f64>() < rate { -v } else { v })
        .collect();
    FunctionTable::new(table.space(), values).expect("length matches")
}
