//! Test integrands and the lattice / Monte Carlo estimators.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::lattice::{LatticeRule, Shift};
use crate::rng;
use crate::sum::pairwise_sum;
use crate::{Error, Result};

/// A function on `[0, 1]^d`.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    /// Exact integral over the unit cube, when known.
    fn exact(&self) -> Option<f64> {
        None
    }
}

/// `prod_j [1 + j^-4 (x_j - 1/2)^2 sin(2 pi x_j - pi)]`
pub fn eval_f1(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for (i, &xj) in x.iter().enumerate() {
        let j = (i + 1) as f64;
        let c = xj - 0.5;
        p *= 1.0 + c * c * (TAU * xj - PI).sin() / (j * j * j * j);
    }
    p
}

fn fbeta_coefficient(beta: u32) -> Result<f64> {
    // (2 beta + 1) * C(2 beta, beta)
    match beta {
        2 => Ok(30.0),
        3 => Ok(140.0),
        4 => Ok(630.0),
        _ => Err(Error::InvalidParameter(format!(
            "beta must be 2, 3 or 4, got {beta}"
        ))),
    }
}

/// `prod_j [1 + j^(-2 beta) ((2 beta + 1) C(2 beta, beta) x_j^beta (1 - x_j)^beta - 1)]`
pub fn eval_fbeta(beta: u32, x: &[f64]) -> Result<f64> {
    let c = fbeta_coefficient(beta)?;
    Ok(fbeta_unchecked(beta, c, x))
}

fn fbeta_unchecked(beta: u32, coef: f64, x: &[f64]) -> f64 {
    let mut p = 1.0;
    for (i, &xj) in x.iter().enumerate() {
        let j = (i + 1) as f64;
        let bump = coef * (xj * (1.0 - xj)).powi(beta as i32);
        p *= 1.0 + (bump - 1.0) / j.powi(2 * beta as i32);
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    F1,
    FBeta(u32),
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "f1" => Ok(TestKind::F1),
            "f2" => Ok(TestKind::FBeta(2)),
            "f3" => Ok(TestKind::FBeta(3)),
            "f4" => Ok(TestKind::FBeta(4)),
            other => Err(Error::InvalidParameter(format!(
                "unknown test function {other:?}"
            ))),
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestKind::F1 => f.write_str("f1"),
            TestKind::FBeta(b) => write!(f, "f{b}"),
        }
    }
}

/// One of the built-in test functions in a given dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    kind: TestKind,
    dim: usize,
    coef: f64,
}

impl TestFunction {
    pub fn new(kind: TestKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        let coef = match kind {
            TestKind::F1 => 0.0,
            TestKind::FBeta(b) => fbeta_coefficient(b)?,
        };
        Ok(Self { kind, dim, coef })
    }

    pub fn kind(&self) -> TestKind {
        self.kind
    }
}

impl Integrand for TestFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self.kind {
            TestKind::F1 => eval_f1(x),
            TestKind::FBeta(b) => fbeta_unchecked(b, self.coef, x),
        }
    }

    fn exact(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Wraps a closure as an integrand with no known exact value.
pub struct CustomFn<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> CustomFn<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for CustomFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Exact integral of a test function (always 1 for the built-ins).
pub fn exact_integral(f: &dyn Integrand) -> Result<f64> {
    f.exact()
        .ok_or_else(|| Error::Unsupported("integrand has no known exact integral".into()))
}

/// Equal-weight average of `f` over the (optionally shifted) lattice points.
pub fn qmc_estimate(f: &dyn Integrand, rule: &LatticeRule, shift: Option<&Shift>) -> Result<f64> {
    if f.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            got: f.dim(),
        });
    }
    let mut points = match shift {
        Some(s) => rule.iter_shifted(s)?,
        None => rule.iter_points(),
    };
    let mut x = vec![0.0; rule.dim()];
    let mut values = Vec::with_capacity(rule.n_points() as usize);
    while points.next_into(&mut x) {
        values.push(f.eval(&x));
    }
    Ok(pairwise_sum(&values) / values.len() as f64)
}

/// Same as [`qmc_estimate`] for several integrands sharing one point set.
pub fn qmc_estimate_many(
    fs: &[&dyn Integrand],
    rule: &LatticeRule,
    shift: Option<&Shift>,
) -> Result<Vec<f64>> {
    if let Some(f) = fs.iter().find(|f| f.dim() != rule.dim()) {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            got: f.dim(),
        });
    }
    let mut points = match shift {
        Some(s) => rule.iter_shifted(s)?,
        None => rule.iter_points(),
    };
    let mut x = vec![0.0; rule.dim()];
    let mut values = vec![Vec::with_capacity(rule.n_points() as usize); fs.len()];
    while points.next_into(&mut x) {
        for (f, v) in fs.iter().zip(values.iter_mut()) {
            v.push(f.eval(&x));
        }
    }
    Ok(values
        .iter()
        .map(|v| pairwise_sum(v) / v.len() as f64)
        .collect())
}

/// Mean of `f` at `m` i.i.d. uniform points.
pub fn mc_estimate<R: Rng + ?Sized>(f: &dyn Integrand, m: u64, rng: &mut R) -> Result<f64> {
    Ok(mc_estimate_many(&[f], m, rng)?[0])
}

/// Monte Carlo means of several integrands on the same `m` uniform points.
pub fn mc_estimate_many<R: Rng + ?Sized>(
    fs: &[&dyn Integrand],
    m: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "Monte Carlo needs at least one point".into(),
        ));
    }
    let d = fs.first().map_or(0, |f| f.dim());
    if let Some(f) = fs.iter().find(|f| f.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.dim(),
        });
    }
    let mut x = vec![0.0; d];
    let mut values = vec![Vec::with_capacity(m as usize); fs.len()];
    for _ in 0..m {
        for xj in x.iter_mut() {
            *xj = rng::uniform01(rng);
        }
        for (f, v) in fs.iter().zip(values.iter_mut()) {
            v.push(f.eval(&x));
        }
    }
    Ok(values.iter().map(|v| pairwise_sum(v) / m as f64).collect())
}
