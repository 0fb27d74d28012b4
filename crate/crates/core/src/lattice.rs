//! Rank-1 lattice point sets.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::space::FrequencyVector;
use crate::{Error, Result};

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut p = 5u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) || n.is_multiple_of(p + 2) {
            return false;
        }
        p += 6;
    }
    true
}

/// Prime modulus `N` and generating vector `z` with `1 <= z_j <= N - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeRule {
    n: u64,
    z: Vec<u64>,
}

impl LatticeRule {
    pub fn new(n: u64, z: Vec<u64>) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        if z.is_empty() {
            return Err(Error::InvalidParameter("generating vector is empty".into()));
        }
        if let Some(&bad) = z.iter().find(|&&zj| zj == 0 || zj >= n) {
            return Err(Error::InvalidParameter(format!(
                "generating vector component {bad} outside 1..={}",
                n - 1
            )));
        }
        Ok(Self { n, z })
    }

    pub fn n_points(&self) -> u64 {
        self.n
    }

    pub fn gen_vector(&self) -> &[u64] {
        &self.z
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Grid index `n z_j mod N` of coordinate `j` of point `n`.
    #[inline]
    pub fn grid_index(&self, point: u64, j: usize) -> u64 {
        ((point as u128 * self.z[j] as u128) % self.n as u128) as u64
    }

    /// Lazily generated points `({n z_1 / N}, ..., {n z_d / N})`, `n = 0..N`.
    pub fn iter_points(&self) -> Points<'_> {
        Points {
            rule: self,
            next: 0,
            acc: vec![0; self.z.len()],
            shift: None,
        }
    }

    /// Points shifted by `shift` modulo 1.
    pub fn iter_shifted<'a>(&'a self, shift: &'a Shift) -> Result<Points<'a>> {
        if shift.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shift.dim(),
            });
        }
        Ok(Points {
            rule: self,
            next: 0,
            acc: vec![0; self.z.len()],
            shift: Some(shift),
        })
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.iter_points().collect()
    }

    pub fn shifted_points(&self, shift: &Shift) -> Result<Vec<Vec<f64>>> {
        Ok(self.iter_shifted(shift)?.collect())
    }

    fn dot_mod(&self, k: &FrequencyVector) -> Result<u64> {
        if k.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: k.dim(),
            });
        }
        let n = self.n as i128;
        let dot = k.0.iter().zip(&self.z).fold(0i128, |acc, (&kj, &zj)| {
            (acc + (kj as i128 % n) * zj as i128) % n
        });
        Ok(dot.rem_euclid(n) as u64)
    }

    /// `k . z == 0 (mod N)`.
    pub fn in_dual(&self, k: &FrequencyVector) -> Result<bool> {
        Ok(self.dot_mod(k)? == 0)
    }

    /// `(1/N) sum_{x in P} exp(2 pi i k . x)`, evaluated term by term.
    pub fn character_sum(&self, k: &FrequencyVector) -> Result<Complex64> {
        let step = self.dot_mod(k)?;
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for point in 0..n {
            let phase = ((point as u128 * step as u128) % n as u128) as f64 / n as f64;
            acc += Complex64::from_polar(1.0, TAU * phase);
        }
        Ok(acc / n as f64)
    }
}

/// Uniform offset in `[0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shift(Vec<f64>);

impl Shift {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if let Some(bad) = delta.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(Error::InvalidParameter(format!(
                "shift component {bad} outside [0, 1)"
            )));
        }
        Ok(Self(delta))
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn delta(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// `{x + delta}`, kept inside `[0, 1)`.
#[inline]
pub(crate) fn wrap_add(x: f64, delta: f64) -> f64 {
    let y = x + delta;
    if y >= 1.0 {
        let w = y - 1.0;
        // x, delta < 1 so one subtraction suffices; guard the rounding edge.
        if w >= 1.0 {
            0.0
        } else {
            w
        }
    } else {
        y
    }
}

/// Streaming point generator. Coordinates are accumulated as integers
/// `(n z_j) mod N` and divided by `N` only on output.
pub struct Points<'a> {
    rule: &'a LatticeRule,
    next: u64,
    acc: Vec<u64>,
    shift: Option<&'a Shift>,
}

impl Points<'_> {
    /// Writes the next point into `out` without allocating.
    pub fn next_into(&mut self, out: &mut [f64]) -> bool {
        if self.next >= self.rule.n {
            return false;
        }
        let n = self.rule.n;
        let inv = n as f64;
        for (j, (a, o)) in self.acc.iter_mut().zip(out.iter_mut()).enumerate() {
            let x = *a as f64 / inv;
            *o = match self.shift {
                Some(s) => wrap_add(x, s.0[j]),
                None => x,
            };
            *a += self.rule.z[j];
            if *a >= n {
                *a -= n;
            }
        }
        self.next += 1;
        true
    }
}

impl Iterator for Points<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.acc.len()];
        self.next_into(&mut out).then_some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.rule.n - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Points<'_> {}
