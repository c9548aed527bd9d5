//! Dense function tables on F_p^n and the shift/derivative operators.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reduce;
use crate::space::{Point, Space};

/// Slack allowed on |f(x)| <= 1 for disk-valued tables.
pub const DISK_TOLERANCE: f64 = 1e-12;

/// A complex-valued function f: F_p^n -> C, one value per point index.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    space: Space,
    values: Vec<Complex64>,
}

impl FunctionTable {
    pub fn new(space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::TableLength {
                expected: space.size(),
                found: values.len(),
            });
        }
        Ok(FunctionTable { space, values })
    }

    /// Like [`FunctionTable::new`] but also requires every value to lie in the unit disk.
    pub fn bounded(space: Space, values: Vec<Complex64>) -> Result<Self> {
        let t = FunctionTable::new(space, values)?;
        t.check_bounded()?;
        Ok(t)
    }

    pub fn from_fn<F>(space: Space, f: F) -> Self
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        let values = (0..space.size()).into_par_iter().map(f).collect();
        FunctionTable { space, values }
    }

    pub fn constant(space: Space, c: Complex64) -> Self {
        FunctionTable {
            space,
            values: vec![c; space.size()],
        }
    }

    pub fn from_real(space: Space, values: &[f64]) -> Result<Self> {
        FunctionTable::new(
            space,
            values.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        )
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn get(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    pub fn at(&self, point: &Point) -> Result<Complex64> {
        Ok(self.values[self.space.point_index(point.coords())?])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_bounded(&self) -> Result<()> {
        match self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| v.norm() > 1.0 + DISK_TOLERANCE)
        {
            Some((index, v)) => Err(Error::NotBounded {
                index,
                modulus: v.norm(),
            }),
            None => Ok(()),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.check_bounded().is_ok()
    }

    pub fn check_unit_modulus(&self, tol: f64) -> Result<()> {
        match self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| (v.norm() - 1.0).abs() > tol)
        {
            Some((index, v)) => Err(Error::NotUnitModulus {
                index,
                modulus: v.norm(),
            }),
            None => Ok(()),
        }
    }

    pub fn is_unit_modulus(&self, tol: f64) -> bool {
        self.check_unit_modulus(tol).is_ok()
    }

    /// T_h f(x) = f(x + h), with h given as a point index.
    pub fn shift(&self, h: usize) -> FunctionTable {
        let s = self.space;
        FunctionTable::from_fn(s, |x| self.values[s.add(x, h)])
    }

    pub fn shift_by(&self, h: &Point) -> Result<FunctionTable> {
        Ok(self.shift(self.space.point_index(h.coords())?))
    }

    /// Multiplicative derivative: (T_h f) * conj(f).
    pub fn mult_derivative(&self, h: usize) -> FunctionTable {
        let s = self.space;
        FunctionTable::from_fn(s, |x| self.values[s.add(x, h)] * self.values[x].conj())
    }

    pub fn mult_derivative_by(&self, h: &Point) -> Result<FunctionTable> {
        Ok(self.mult_derivative(self.space.point_index(h.coords())?))
    }

    /// Apply several multiplicative derivatives in sequence.
    pub fn mult_derivatives(&self, hs: &[usize]) -> FunctionTable {
        hs.iter()
            .fold(self.clone(), |acc, &h| acc.mult_derivative(h))
    }

    pub fn mean(&self) -> Complex64 {
        reduce::mean_complex(self.len(), |x| self.values[x])
    }

    /// <f, g> = E_x f(x) conj(g(x)).
    pub fn inner_product(&self, other: &FunctionTable) -> Result<Complex64> {
        self.space.check_same(&other.space)?;
        Ok(reduce::mean_complex(self.len(), |x| {
            self.values[x] * other.values[x].conj()
        }))
    }

    /// E_x |f(x) - g(x)|.
    pub fn l1_distance(&self, other: &FunctionTable) -> Result<f64> {
        self.space.check_same(&other.space)?;
        Ok(reduce::mean_real(self.len(), |x| {
            (self.values[x] - other.values[x]).norm()
        }))
    }

    pub fn max_abs_diff(&self, other: &FunctionTable) -> Result<f64> {
        self.space.check_same(&other.space)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn conj(&self) -> FunctionTable {
        self.map(|v| v.conj())
    }

    pub fn map<F>(&self, f: F) -> FunctionTable
    where
        F: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        FunctionTable {
            space: self.space,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &FunctionTable) -> Result<FunctionTable> {
        self.space.check_same(&other.space)?;
        Ok(FunctionTable {
            space: self.space,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Pointwise f * conj(g).
    pub fn mul_conj(&self, other: &FunctionTable) -> Result<FunctionTable> {
        self.space.check_same(&other.space)?;
        Ok(FunctionTable {
            space: self.space,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b.conj())
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> FunctionTable {
        self.map(|v| v * c)
    }

    /// Integer power, for unit-modulus tables a negative exponent conjugates.
    pub fn powi(&self, t: i32) -> FunctionTable {
        self.map(|v| if t >= 0 { v.powu(t as u32) } else { v.conj().powu((-t) as u32) })
    }
}

/// A field-valued function P: F_p^n -> F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldTable {
    space: Space,
    values: Vec<u32>,
}

impl FieldTable {
    pub fn new(space: Space, values: Vec<u32>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::TableLength {
                expected: space.size(),
                found: values.len(),
            });
        }
        let field = space.field();
        for &v in &values {
            field.check(v as u64)?;
        }
        Ok(FieldTable { space, values })
    }

    pub fn from_fn<F>(space: Space, f: F) -> Self
    where
        F: Fn(usize) -> u32 + Sync + Send,
    {
        let p = space.p();
        let values = (0..space.size())
            .into_par_iter()
            .map(|x| f(x) % p)
            .collect();
        FieldTable { space, values }
    }

    pub fn zero(space: Space) -> Self {
        FieldTable {
            space,
            values: vec![0; space.size()],
        }
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    #[inline]
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, index: usize) -> u32 {
        self.values[index]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    pub fn shift(&self, h: usize) -> FieldTable {
        let s = self.space;
        FieldTable {
            space: s,
            values: (0..s.size()).map(|x| self.values[s.add(x, h)]).collect(),
        }
    }

    /// Additive derivative: T_h P - P.
    pub fn add_derivative(&self, h: usize) -> FieldTable {
        let s = self.space;
        let f = s.field();
        FieldTable {
            space: s,
            values: (0..s.size())
                .map(|x| f.sub(self.values[s.add(x, h)], self.values[x]))
                .collect(),
        }
    }

    pub fn add_derivative_by(&self, h: &Point) -> Result<FieldTable> {
        Ok(self.add_derivative(self.space.point_index(h.coords())?))
    }

    /// Pointwise sum in F_p.
    pub fn add(&self, other: &FieldTable) -> Result<FieldTable> {
        self.space.check_same(&other.space)?;
        let f = self.space.field();
        Ok(FieldTable {
            space: self.space,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    /// The phase table e_F(P).
    pub fn phase(&self) -> FunctionTable {
        let chars = self.space.field().characters();
        FunctionTable {
            space: self.space,
            values: self.values.iter().map(|&v| chars[v as usize]).collect(),
        }
    }
}
