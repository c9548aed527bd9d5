//! The vector space F_p^n and its points.
//!
//! Points are addressed by a little-endian mixed-radix index: coordinate 0 is
//! the fastest-varying digit, so `index = x_0 + x_1 p + ... + x_{n-1} p^{n-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;

/// F_p^n together with its size p^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    field: Field,
    n: usize,
    size: usize,
}

impl Space {
    pub fn new(field: Field, n: usize) -> Result<Self> {
        let p = field.p();
        let size = u32::try_from(n)
            .ok()
            .and_then(|n32| (p as usize).checked_pow(n32))
            .filter(|&s| s <= isize::MAX as usize)
            .ok_or(Error::SpaceTooLarge { p, n })?;
        Ok(Space { field, n, size })
    }

    /// Shorthand for `Space::new(Field::new(p)?, n)`.
    pub fn of(p: u32, n: usize) -> Result<Self> {
        Space::new(Field::new(p)?, n)
    }

    #[inline]
    pub fn field(&self) -> Field {
        self.field
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.field.p()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check_same(&self, other: &Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                p1: self.p(),
                n1: self.n,
                p2: other.p(),
                n2: other.n,
            })
        }
    }

    pub fn check_index(&self, index: usize) -> Result<usize> {
        if index < self.size {
            Ok(index)
        } else {
            Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            })
        }
    }

    pub fn point_index(&self, coordinates: &[u32]) -> Result<usize> {
        if coordinates.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: coordinates.len(),
            });
        }
        let p = self.p() as usize;
        let mut index = 0usize;
        for &c in coordinates.iter().rev() {
            self.field.check(c as u64)?;
            index = index * p + c as usize;
        }
        Ok(index)
    }

    pub fn index_point(&self, index: usize) -> Result<Point> {
        self.check_index(index)?;
        Ok(Point {
            coords: self.digits(index),
        })
    }

    pub(crate) fn digits(&self, mut index: usize) -> Vec<u32> {
        let p = self.p() as usize;
        (0..self.n)
            .map(|_| {
                let d = index % p;
                index /= p;
                d as u32
            })
            .collect()
    }

    pub fn point(&self, coordinates: &[u32]) -> Result<Point> {
        self.point_index(coordinates)?;
        Ok(Point {
            coords: coordinates.to_vec(),
        })
    }

    /// Index of the standard basis vector e_j.
    pub fn basis(&self, j: usize) -> usize {
        debug_assert!(j < self.n);
        (self.p() as usize).pow(j as u32)
    }

    /// Index of x + y.
    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        let p = self.p() as usize;
        if p == 2 {
            return x ^ y;
        }
        let (mut x, mut y) = (x, y);
        let mut out = 0;
        let mut radix = 1;
        while x > 0 || y > 0 {
            let mut d = x % p + y % p;
            if d >= p {
                d -= p;
            }
            out += d * radix;
            radix *= p;
            x /= p;
            y /= p;
        }
        out
    }

    /// Index of x - y.
    #[inline]
    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg(y))
    }

    /// Index of -x.
    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        self.scale(self.p() - 1, x)
    }

    /// Index of c * x.
    pub fn scale(&self, c: u32, x: usize) -> usize {
        let p = self.p() as usize;
        let c = c as usize % p;
        if c == 0 {
            return 0;
        }
        if c == 1 {
            return x;
        }
        let mut x = x;
        let mut out = 0;
        let mut radix = 1;
        while x > 0 {
            out += (x % p * c % p) * radix;
            radix *= p;
            x /= p;
        }
        out
    }

    /// Index of a_1 v_1 + ... + a_m v_m for point indices `vectors`.
    pub fn combine(&self, coeffs: &[u32], vectors: &[usize]) -> usize {
        coeffs
            .iter()
            .zip(vectors)
            .fold(0, |acc, (&c, &v)| self.add(acc, self.scale(c, v)))
    }

    /// Dot product of two points as a residue.
    pub fn dot(&self, x: usize, y: usize) -> u32 {
        let p = self.p() as usize;
        if p == 2 {
            return ((x & y).count_ones() & 1) as u32;
        }
        let (mut x, mut y) = (x, y);
        let mut acc = 0usize;
        while x > 0 && y > 0 {
            acc += (x % p) * (y % p);
            x /= p;
            y /= p;
        }
        (acc % p) as u32
    }

    /// Hamming weight |x| (number of nonzero coordinates).
    pub fn weight(&self, x: usize) -> usize {
        let p = self.p() as usize;
        if p == 2 {
            return x.count_ones() as usize;
        }
        let mut x = x;
        let mut w = 0;
        while x > 0 {
            if x % p != 0 {
                w += 1;
            }
            x /= p;
        }
        w
    }

    /// Componentwise F_p linear combination of points.
    pub fn linear_combination(&self, coeffs: &[u32], vectors: &[Point]) -> Result<Point> {
        if coeffs.len() != vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: vectors.len(),
                found: coeffs.len(),
            });
        }
        let mut acc = vec![0u32; self.n];
        for (&c, v) in coeffs.iter().zip(vectors) {
            self.field.check(c as u64)?;
            if v.dim() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: v.dim(),
                });
            }
            for (a, &x) in acc.iter_mut().zip(&v.coords) {
                self.field.check(x as u64)?;
                *a = self.field.add(*a, self.field.mul(c, x));
            }
        }
        Ok(Point { coords: acc })
    }
}

/// A point of F_p^n given by its coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<u32>,
}

impl Point {
    pub fn zero(n: usize) -> Self {
        Point {
            coords: vec![0; n],
        }
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A linear subspace of F_p^n, stored as the explicit list of its elements.
#[derive(Debug, Clone)]
pub struct Subspace {
    space: Space,
    elements: Vec<usize>,
    dim: usize,
}

impl Subspace {
    /// Span of the given generators. Each element appears exactly once.
    pub fn span(space: Space, generators: &[usize]) -> Self {
        let mut member = vec![false; space.size()];
        member[0] = true;
        let mut elements = vec![0usize];
        let mut dim = 0;
        for &g in generators {
            if member[g] {
                continue;
            }
            dim += 1;
            let layer: Vec<usize> = elements.clone();
            let mut step = g;
            for _ in 1..space.p() {
                for &e in &layer {
                    let y = space.add(e, step);
                    member[y] = true;
                    elements.push(y);
                }
                step = space.add(step, g);
            }
        }
        Subspace {
            space,
            elements,
            dim,
        }
    }

    pub fn whole(space: Space) -> Self {
        let gens: Vec<usize> = (0..space.n()).map(|j| space.basis(j)).collect();
        Subspace::span(space, &gens)
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Label every point of the ambient space by its coset; returns the labels and the
    /// coset count.
    pub fn coset_labels(&self) -> (Vec<u32>, usize) {
        let size = self.space.size();
        let mut labels = vec![u32::MAX; size];
        let mut count = 0u32;
        for x in 0..size {
            if labels[x] != u32::MAX {
                continue;
            }
            for &w in &self.elements {
                labels[self.space.add(x, w)] = count;
            }
            count += 1;
        }
        (labels, count as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_examples() {
        let s = Space::of(2, 3).unwrap();
        assert_eq!(s.index_point(0).unwrap().coords(), &[0, 0, 0]);
        assert_eq!(s.index_point(5).unwrap().coords(), &[1, 0, 1]);
        let s = Space::of(3, 2).unwrap();
        assert_eq!(s.index_point(5).unwrap().coords(), &[2, 1]);
        assert!(s.index_point(9).is_err());
        assert!(s.point_index(&[3, 0]).is_err());
        assert!(s.point_index(&[0]).is_err());
    }

    #[test]
    fn rejects_overflowing_spaces() {
        assert!(Space::of(2, 64).is_err());
        assert!(Space::of(3, 200).is_err());
        assert!(Space::of(2, 40).is_ok());
    }

    #[test]
    fn linear_combination_examples() {
        let s = Space::of(2, 2).unwrap();
        let v = [s.point(&[1, 0]).unwrap(), s.point(&[1, 1]).unwrap()];
        assert_eq!(s.linear_combination(&[0, 0], &v).unwrap(), Point::zero(2));
        assert_eq!(s.linear_combination(&[1], &v[..1]).unwrap(), v[0]);
        assert_eq!(s.linear_combination(&[1, 1], &v).unwrap().coords(), &[0, 1]);
        let bad = [s.point(&[1, 0]).unwrap(), Point::zero(3)];
        assert!(s.linear_combination(&[1, 1], &bad).is_err());
    }

    #[test]
    fn round_trip_exhaustive() {
        for (p, n) in [(2, 0), (2, 5), (3, 4), (5, 3), (7, 2)] {
            let s = Space::of(p, n).unwrap();
            for i in 0..s.size() {
                let pt = s.index_point(i).unwrap();
                assert_eq!(s.point_index(pt.coords()).unwrap(), i);
            }
        }
    }

    #[test]
    fn span_and_cosets() {
        let s = Space::of(3, 3).unwrap();
        let w = Subspace::span(s, &[1, 3, 4]);
        assert_eq!(w.dim(), 2);
        assert_eq!(w.len(), 9);
        let (labels, count) = w.coset_labels();
        assert_eq!(count, 3);
        for x in 0..s.size() {
            for &e in w.elements() {
                assert_eq!(labels[x], labels[s.add(x, e)]);
            }
        }
        assert_eq!(Subspace::whole(s).len(), 27);
        assert_eq!(Subspace::span(s, &[]).elements(), &[0]);
    }

    proptest! {
        #[test]
        fn index_arithmetic_matches_coordinates(p in prop::sample::select(vec![2u32, 3, 5]), n in 0usize..5, a in any::<u64>(), b in any::<u64>(), c in 0u32..5) {
            let s = Space::of(p, n).unwrap();
            let x = (a % s.size() as u64) as usize;
            let y = (b % s.size() as u64) as usize;
            let c = c % p;
            let px = s.index_point(x).unwrap();
            let py = s.index_point(y).unwrap();
            let sum = s.linear_combination(&[1, c], &[px.clone(), py.clone()]).unwrap();
            prop_assert_eq!(s.point_index(sum.coords()).unwrap(), s.add(x, s.scale(c, y)));
            prop_assert_eq!(s.add(s.sub(x, y), y), x);
            let dot: u32 = px.coords().iter().zip(py.coords()).map(|(u, v)| u * v).sum::<u32>() % p;
            prop_assert_eq!(s.dot(x, y), dot);
        }
    }
}
