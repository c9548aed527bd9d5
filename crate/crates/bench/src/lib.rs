//! Seeded input tables shared by the benches.

use gowers_core::poly::PhaseCatalogue;
use gowers_core::{random, FunctionTable, Space};

pub fn space(p: u32, n: usize) -> Space {
    Space::of(p, n).expect("bench spaces are small")
}

pub fn disk(p: u32, n: usize, seed: u64) -> FunctionTable {
    random::disk_table(space(p, n), &mut random::rng(seed))
}

pub fn signs(n: usize, seed: u64) -> FunctionTable {
    random::sign_table(space(2, n), &mut random::rng(seed))
}

/// A random catalogue phase polynomial of degree `degree`.
pub fn phase(p: u32, n: usize, degree: usize, seed: u64) -> FunctionTable {
    let cat = PhaseCatalogue::new(space(p, n), degree + 1).expect("catalogue");
    cat.sample(&mut random::rng(seed), 1).expect("one member")[0].table()
}
