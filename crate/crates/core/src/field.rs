use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The prime field F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Field {
    p: u32,
}

impl Field {
    pub fn new(p: u32) -> Result<Self> {
        if is_prime(p as u64) {
            Ok(Field { p })
        } else {
            Err(Error::NotPrime(p as u64))
        }
    }

    #[inline]
    pub fn p(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(self, a: u32, mut e: u32) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: u32) -> Option<u32> {
        if a % self.p == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn check(self, value: u64) -> Result<u32> {
        if value < self.p as u64 {
            Ok(value as u32)
        } else {
            Err(Error::ResidueOutOfRange { value, p: self.p })
        }
    }

    /// The standard character e_F(j) = exp(2 pi i j / p).
    pub fn character(self, j: u32) -> Complex64 {
        unit_root(j as u64 % self.p as u64, self.p as u64)
    }

    /// All p values of the standard character, indexed by residue.
    pub fn characters(self) -> Vec<Complex64> {
        (0..self.p).map(|j| self.character(j)).collect()
    }
}

impl TryFrom<u32> for Field {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Field::new(p)
    }
}

impl From<Field> for u32 {
    fn from(f: Field) -> u32 {
        f.p
    }
}

/// exp(2 pi i num / den), exact on quarter turns so that sign-valued tables stay exactly +-1.
pub fn unit_root(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if (4 * num) % den == 0 {
        return match 4 * num / den {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * num as f64 / den as f64)
}

/// exp(2 pi i theta).
pub fn phase(theta: f64) -> Complex64 {
    let t = theta.rem_euclid(1.0);
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if t == 0.5 {
        return Complex64::new(-1.0, 0.0);
    }
    Complex64::from_polar(1.0, TAU * t)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
