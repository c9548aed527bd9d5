//! Gowers uniformity norms, phase polynomials, sampling estimators and a
//! polynomiality decoder for functions on finite prime-field vector spaces.

pub mod caps;
pub mod counterexamples;
pub mod error;
pub mod field;
pub mod fourier;
pub mod gowers;
pub mod io;
pub mod poly;
pub mod polytest;
pub mod random;
pub mod reduce;
pub mod sampling;
pub mod signs;
pub mod space;
pub mod table;

pub use caps::Caps;
pub use error::{DecodeFailure, Error, Result};
pub use field::Field;
pub use num_complex::Complex64;
pub use poly::{PhasePolynomial, Polynomial};
pub use signs::SignTable;
pub use space::{Point, Space, Subspace};
pub use table::{FieldTable, FunctionTable};
