//! Generating-vector construction.
//!
//! [`select`] draws a prime `N` uniformly from `(ceil(M/2), M]`, draws `r`
//! uniform candidate vectors in `{1..N-1}^d` and keeps the one with the
//! smallest worst-case error. The component-by-component constructions are
//! kept as baselines.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::lattice::{LatticeRule, Shift};
use crate::rng::{self, Purpose};
use crate::space::KorobovParams;
use crate::wce::{self, KernelTable};
use crate::{Error, Result};

/// Primes `p` with `ceil(M/2) < p <= M`, ascending.
pub fn prime_set(m: u64) -> Result<Vec<u64>> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "M must be at least 2, got {m}"
        )));
    }
    let lo = m.div_ceil(2);
    let size = m as usize + 1;
    let mut composite = vec![false; size];
    let mut i = 2usize;
    while i * i < size {
        if !composite[i] {
            for k in (i * i..size).step_by(i) {
                composite[k] = true;
            }
        }
        i += 1;
    }
    let primes: Vec<u64> = ((lo + 1).max(2)..=m)
        .filter(|&p| !composite[p as usize])
        .collect();
    if primes.is_empty() {
        return Err(Error::EmptyPrimeSet { lo, hi: m });
    }
    Ok(primes)
}

/// Uniform draw from [`prime_set`].
pub fn sample_prime<R: Rng + ?Sized>(m: u64, rng: &mut R) -> Result<u64> {
    let primes = prime_set(m)?;
    let idx = rng::uniform_int(rng, 0, primes.len() as u64 - 1) as usize;
    Ok(primes[idx])
}

/// `d` i.i.d. uniform components in `{1, ..., N-1}`.
pub fn sample_vector<R: Rng + ?Sized>(n: u64, d: usize, rng: &mut R) -> Vec<u64> {
    (0..d).map(|_| rng::uniform_int(rng, 1, n - 1)).collect()
}

/// `d` i.i.d. uniform components in `[0, 1)`.
pub fn sample_shift<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Shift {
    Shift::new((0..d).map(|_| rng::uniform01(rng)).collect()).expect("uniform01 stays in [0, 1)")
}

/// Rule for the number of candidates `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RRule {
    /// `ceil(-(alpha + 1/2) log M / log(1 - eta))`, randomized error.
    Ran,
    /// `ceil(-(2 alpha + 1) log M / log(1 - eta))`, shifted RMSE.
    Rms,
    /// `ceil(-g(M) log M / log(1 - eta))` with `g(M) = max(log log M, 1)`.
    Stable,
    Fixed(u32),
}

impl FromStr for RRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ran" => Ok(RRule::Ran),
            "rms" => Ok(RRule::Rms),
            "stable" => Ok(RRule::Stable),
            other => {
                let k = other
                    .strip_prefix("fixed:")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown r rule {other:?}")))?;
                if k == 0 {
                    return Err(Error::InvalidParameter("fixed r must be at least 1".into()));
                }
                Ok(RRule::Fixed(k))
            }
        }
    }
}

impl fmt::Display for RRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RRule::Ran => f.write_str("ran"),
            RRule::Rms => f.write_str("rms"),
            RRule::Stable => f.write_str("stable"),
            RRule::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

/// Number of candidates for size parameter `m` (natural logarithms).
pub fn resolve_r(rule: RRule, alpha: f64, eta: f64, m: u64) -> Result<u32> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "M must be at least 2, got {m}"
        )));
    }
    let log_m = (m as f64).ln();
    let coef = match rule {
        RRule::Fixed(k) => return Ok(k),
        RRule::Ran => alpha + 0.5,
        RRule::Rms => 2.0 * alpha + 1.0,
        RRule::Stable => log_m.ln().max(1.0),
    };
    let r = (-coef * log_m / (1.0 - eta).ln()).ceil();
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidParameter(format!("r resolved to {r}")));
    }
    Ok(r as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub m_max: u64,
    pub eta: f64,
    pub r_rule: RRule,
    pub seed: u64,
    /// Use this prime instead of drawing one from the prime set.
    pub fixed_n: Option<u64>,
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_max < 2 && self.fixed_n.is_none() {
            return Err(Error::InvalidParameter(format!(
                "M must be at least 2, got {}",
                self.m_max
            )));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Domain(format!(
                "eta must lie in (0, 1), got {}",
                self.eta
            )));
        }
        if let Some(n) = self.fixed_n {
            if !crate::lattice::is_prime(n) {
                return Err(Error::NotPrime(n));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub n: u64,
    pub z_star: Vec<u64>,
    /// Squared worst-case errors in draw order.
    pub candidate_errors: Vec<f64>,
    pub argmin_index: usize,
    pub r: u32,
    pub seed: u64,
}

impl SelectionOutcome {
    pub fn rule(&self) -> LatticeRule {
        LatticeRule::new(self.n, self.z_star.clone()).expect("selected rule is valid")
    }

    pub fn squared_error(&self) -> f64 {
        self.candidate_errors[self.argmin_index]
    }
}

/// Modulus used by [`select`] for this configuration.
pub fn selection_modulus(config: &SelectionConfig) -> Result<u64> {
    match config.fixed_n {
        Some(n) => Ok(n),
        None => sample_prime(
            config.m_max,
            &mut rng::stream(config.seed, Purpose::Prime, &[]),
        ),
    }
}

/// Candidate `index` of a selection run; depends only on `(seed, n, index)`.
pub fn candidate_vector(seed: u64, n: u64, d: usize, index: usize) -> Vec<u64> {
    sample_vector(
        n,
        d,
        &mut rng::stream(seed, Purpose::Candidate, &[index as u64]),
    )
}

/// Best of `r` random generating vectors by closed-form worst-case error.
/// `r` is resolved from `m_max`, or from `N` when `fixed_n` is set.
/// Ties go to the lowest candidate index.
pub fn select(config: &SelectionConfig, params: &KorobovParams) -> Result<SelectionOutcome> {
    config.validate()?;
    let n = selection_modulus(config)?;
    let size = if config.fixed_n.is_some() {
        n
    } else {
        config.m_max
    };
    let r = resolve_r(config.r_rule, params.alpha(), config.eta, size.max(2))?;
    select_with(config.seed, n, r, params)
}

/// [`select`] with `N` and `r` given.
pub fn select_with(seed: u64, n: u64, r: u32, params: &KorobovParams) -> Result<SelectionOutcome> {
    let table = KernelTable::new(n, params)?;
    let d = params.dim();
    let candidate_errors: Vec<f64> = (0..r as usize)
        .into_par_iter()
        .map(|i| {
            let z = candidate_vector(seed, n, d, i);
            let rule = LatticeRule::new(n, z).expect("candidates lie in 1..N");
            wce::closed_form_with_table(&rule, params.gammas(), &table).0
        })
        .collect();
    let argmin_index = argmin(&candidate_errors);
    Ok(SelectionOutcome {
        n,
        z_star: candidate_vector(seed, n, d, argmin_index),
        candidate_errors,
        argmin_index,
        r,
        seed,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Result of a CBC run: the vector and the squared error chosen at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct CbcOutcome {
    pub z: Vec<u64>,
    pub step_errors: Vec<f64>,
}

struct CbcState<'a> {
    n: u64,
    gammas: &'a [f64],
    table: KernelTable,
    // Inverse of z_1, once fixed. Points are kept in order of their first
    // coordinate, so point m has grid index m * w * c for candidate c.
    w: u64,
    // prod_{i < j} (1 + gamma_i^2 phi(x_i)) - 1 for each point
    q: Vec<f64>,
}

impl<'a> CbcState<'a> {
    fn new(n: u64, params: &'a KorobovParams) -> Result<Self> {
        Ok(Self {
            n,
            gammas: params.gammas(),
            table: KernelTable::new(n, params)?,
            w: 1,
            q: vec![0.0; n as usize],
        })
    }

    fn extend(&self, j: usize, c: u64) -> Vec<f64> {
        let g = self.gammas[j];
        let g2 = g * g;
        let step = if j == 0 {
            1
        } else {
            (c as u128 * self.w as u128 % self.n as u128) as u64
        };
        let mut idx = 0u64;
        self.q
            .iter()
            .map(|&q| {
                let v = wce::fold_factor(q, g2 * self.table.get(idx));
                idx += step;
                if idx >= self.n {
                    idx -= self.n;
                }
                v
            })
            .collect()
    }

    /// Squared errors of candidates `1..N` for component `j`, in candidate order.
    fn scan(&self, j: usize) -> Vec<f64> {
        (1..self.n)
            .into_par_iter()
            .map(|c| wce::finish(&self.extend(j, c)).0)
            .collect()
    }

    fn fix(&mut self, j: usize, c: u64) {
        self.q = self.extend(j, c);
        if j == 0 {
            self.w = wce::mod_inverse(c, self.n).expect("N is prime");
        }
    }
}

fn check_cbc(n: u64, d: usize, params: &KorobovParams) -> Result<()> {
    if !crate::lattice::is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if d != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: d,
        });
    }
    Ok(())
}

/// Greedy component-by-component construction: each `z_j` minimizes the
/// squared error of the `j`-dimensional rule, ties to the smallest value.
pub fn cbc_deterministic(n: u64, d: usize, params: &KorobovParams) -> Result<CbcOutcome> {
    check_cbc(n, d, params)?;
    let mut state = CbcState::new(n, params)?;
    let mut z = Vec::with_capacity(d);
    let mut step_errors = Vec::with_capacity(d);
    for j in 0..d {
        let errs = state.scan(j);
        let best = argmin(&errs);
        let c = best as u64 + 1;
        state.fix(j, c);
        z.push(c);
        step_errors.push(errs[best]);
    }
    Ok(CbcOutcome { z, step_errors })
}

/// Candidates of one CBC step ranked by `(error, value)`, best first.
fn ranked_candidates(errs: &[f64]) -> Vec<u64> {
    let mut order: Vec<u64> = (1..=errs.len() as u64).collect();
    order.sort_by(|&a, &b| {
        errs[a as usize - 1]
            .total_cmp(&errs[b as usize - 1])
            .then(a.cmp(&b))
    });
    order
}

/// Size of the quantile set `ceil(tau (N - 1))`, at least 1.
pub fn quantile_size(n: u64, tau: f64) -> usize {
    ((tau * (n - 1) as f64).ceil() as usize).clamp(1, (n - 1) as usize)
}

/// Randomized CBC: at each step draw `z_j` uniformly from the
/// `ceil(tau (N - 1))` candidates with the smallest squared error.
pub fn cbc_randomized<R: Rng + ?Sized>(
    n: u64,
    d: usize,
    params: &KorobovParams,
    tau: f64,
    rng: &mut R,
) -> Result<CbcOutcome> {
    check_cbc(n, d, params)?;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("tau must lie in (0, 1), got {tau}")));
    }
    let keep = quantile_size(n, tau);
    let mut state = CbcState::new(n, params)?;
    let mut z = Vec::with_capacity(d);
    let mut step_errors = Vec::with_capacity(d);
    for j in 0..d {
        let errs = state.scan(j);
        let ranked = ranked_candidates(&errs);
        let pick = rng::uniform_int(rng, 0, keep as u64 - 1) as usize;
        let c = ranked[pick];
        state.fix(j, c);
        z.push(c);
        step_errors.push(errs[c as usize - 1]);
    }
    Ok(CbcOutcome { z, step_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wce::wce_closed_form;
    use std::f64::consts::PI;

    fn params(alpha: f64, w: &str, d: usize) -> KorobovParams {
        KorobovParams::new(alpha, w.parse().unwrap(), d).unwrap()
    }

    #[test]
    fn prime_sets() {
        assert_eq!(prime_set(2).unwrap(), vec![2]);
        assert_eq!(prime_set(3).unwrap(), vec![3]);
        assert_eq!(prime_set(10).unwrap(), vec![7]);
        assert_eq!(prime_set(20).unwrap(), vec![11, 13, 17, 19]);
        assert_eq!(prime_set(251).unwrap().last(), Some(&251));
        assert!(prime_set(1).is_err());
        // Trial division agrees with the sieve.
        for m in 2..400u64 {
            let want: Vec<u64> = (m.div_ceil(2) + 1..=m)
                .filter(|&p| crate::lattice::is_prime(p))
                .collect();
            assert_eq!(prime_set(m).unwrap(), want, "M = {m}");
        }
    }

    #[test]
    fn sample_prime_singleton_and_replay() {
        let mut s = rng::stream(1, Purpose::Prime, &[]);
        for _ in 0..20 {
            assert_eq!(sample_prime(10, &mut s).unwrap(), 7);
        }
        let a = sample_prime(1000, &mut rng::stream(9, Purpose::Prime, &[])).unwrap();
        let b = sample_prime(1000, &mut rng::stream(9, Purpose::Prime, &[])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_vector_basics() {
        let mut s = rng::stream(3, Purpose::Candidate, &[0]);
        assert_eq!(sample_vector(2, 6, &mut s), vec![1; 6]);
        assert_eq!(
            candidate_vector(5, 101, 4, 7),
            candidate_vector(5, 101, 4, 7)
        );
        assert_ne!(
            candidate_vector(5, 101, 4, 7),
            candidate_vector(5, 101, 4, 8)
        );
    }

    #[test]
    fn r_rules() {
        assert_eq!(resolve_r(RRule::Rms, 2.0, 0.5, 251).unwrap(), 40);
        assert_eq!(resolve_r(RRule::Rms, 2.0, 0.5, 2039).unwrap(), 55);
        assert_eq!(resolve_r(RRule::Stable, 1.0, 0.5, 1024).unwrap(), 20);
        // (2 + 1/2) * ln 251 / ln 2 = 19.93
        assert_eq!(resolve_r(RRule::Ran, 2.0, 0.5, 251).unwrap(), 20);
        assert_eq!(resolve_r(RRule::Fixed(3), 2.0, 0.5, 251).unwrap(), 3);
        assert_eq!(resolve_r(RRule::Stable, 1.0, 0.5, 2).unwrap(), 1);
        assert!(resolve_r(RRule::Rms, 2.0, 1.0, 251).is_err());
        assert!(resolve_r(RRule::Rms, 2.0, 0.5, 1).is_err());
        for rule in [RRule::Ran, RRule::Rms, RRule::Stable] {
            let rs: Vec<u32> = (2..5000)
                .map(|m| resolve_r(rule, 1.5, 0.3, m).unwrap())
                .collect();
            assert!(rs.windows(2).all(|w| w[1] >= w[0]), "{rule}");
        }
    }

    #[test]
    fn r_rule_syntax() {
        for s in ["ran", "rms", "stable", "fixed:7"] {
            assert_eq!(s.parse::<RRule>().unwrap().to_string(), s);
        }
        assert!("fixed:0".parse::<RRule>().is_err());
        assert!("best".parse::<RRule>().is_err());
    }

    #[test]
    fn select_one_dimensional_ties() {
        let p = params(1.0, "list:1", 1);
        let cfg = SelectionConfig {
            m_max: 5,
            eta: 0.5,
            r_rule: RRule::Fixed(6),
            seed: 11,
            fixed_n: Some(5),
        };
        let out = select(&cfg, &p).unwrap();
        assert_eq!(out.n, 5);
        assert_eq!(out.argmin_index, 0);
        for &e in &out.candidate_errors {
            assert!((e - PI * PI / 75.0).abs() < 1e-12);
            assert!((e - 0.131_595).abs() < 1e-6);
        }
    }

    #[test]
    fn select_postconditions() {
        let p = params(2.0, "poly:3", 5);
        for seed in 0..20 {
            let cfg = SelectionConfig {
                m_max: 300,
                eta: 0.5,
                r_rule: RRule::Ran,
                seed,
                fixed_n: None,
            };
            let out = select(&cfg, &p).unwrap();
            assert!(prime_set(300).unwrap().contains(&out.n));
            assert_eq!(out.candidate_errors.len() as u32, out.r);
            let min = out
                .candidate_errors
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert_eq!(out.squared_error(), min);
            assert_eq!(
                out.z_star,
                candidate_vector(seed, out.n, 5, out.argmin_index)
            );
            let recomputed = wce_closed_form(&out.rule(), &p).unwrap().squared_error;
            assert_eq!(recomputed, out.squared_error());
        }
    }

    #[test]
    fn select_r1_is_first_candidate() {
        let p = params(2.0, "poly:3", 4);
        let out = select_with(42, 101, 1, &p).unwrap();
        assert_eq!(out.z_star, candidate_vector(42, 101, 4, 0));
    }

    #[test]
    fn select_independent_of_threads() {
        let p = params(2.0, "poly:3", 6);
        let cfg = SelectionConfig {
            m_max: 500,
            eta: 0.5,
            r_rule: RRule::Rms,
            seed: 5,
            fixed_n: None,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| select(&cfg, &p).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        assert!(a
            .candidate_errors
            .iter()
            .zip(&b.candidate_errors)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn shifts_are_uniform_and_replayable() {
        let a = sample_shift(3, &mut rng::stream(1, Purpose::Shift, &[2]));
        let b = sample_shift(3, &mut rng::stream(1, Purpose::Shift, &[2]));
        assert_eq!(a, b);
    }

    #[test]
    fn cbc_deterministic_d1() {
        let p = params(2.0, "list:1", 1);
        assert_eq!(cbc_deterministic(31, 1, &p).unwrap().z, vec![1]);
    }

    #[test]
    fn cbc_deterministic_exhaustive_steps() {
        let p = params(2.0, "poly:3", 3);
        let n = 31;
        let out = cbc_deterministic(n, 3, &p).unwrap();
        for j in 0..3 {
            let pj = p.with_dim(j + 1).unwrap();
            let errs: Vec<f64> = (1..n)
                .map(|c| {
                    let mut z = out.z[..j].to_vec();
                    z.push(c);
                    wce_closed_form(&LatticeRule::new(n, z).unwrap(), &pj)
                        .unwrap()
                        .squared_error
                })
                .collect();
            let best = argmin(&errs);
            assert_eq!(out.z[j], best as u64 + 1, "step {j}");
            assert_eq!(out.step_errors[j], errs[best]);
        }
        // Never worse than the all-ones vector.
        let ones = wce_closed_form(&LatticeRule::new(n, vec![1; 3]).unwrap(), &p).unwrap();
        assert!(out.step_errors[2] <= ones.squared_error);
    }

    #[test]
    fn cbc_dominates_first_candidate_each_step() {
        let p = params(1.0, "poly:2", 5);
        let n = 61;
        let out = cbc_deterministic(n, 5, &p).unwrap();
        for j in 0..5 {
            let mut z = out.z[..j].to_vec();
            z.push(1);
            let pj = p.with_dim(j + 1).unwrap();
            let first = wce_closed_form(&LatticeRule::new(n, z).unwrap(), &pj).unwrap();
            assert!(out.step_errors[j] <= first.squared_error);
        }
    }

    #[test]
    fn cbc_randomized_singleton_quantile_is_deterministic() {
        let p = params(2.0, "poly:3", 4);
        let n = 37;
        let tau = 0.5 / (n - 1) as f64;
        assert_eq!(quantile_size(n, tau), 1);
        let det = cbc_deterministic(n, 4, &p).unwrap();
        let ran = cbc_randomized(n, 4, &p, tau, &mut rng::stream(1, Purpose::Cbc, &[])).unwrap();
        assert_eq!(det, ran);
    }

    #[test]
    fn cbc_randomized_d1_uniform_over_prefix() {
        let p = params(1.0, "list:1", 1);
        let n = 11;
        let tau = 0.5;
        let keep = quantile_size(n, tau) as u64;
        assert_eq!(keep, 5);
        let mut counts = vec![0u32; n as usize];
        let mut s = rng::stream(2, Purpose::Cbc, &[]);
        for _ in 0..5000 {
            let z = cbc_randomized(n, 1, &p, tau, &mut s).unwrap().z[0];
            counts[z as usize] += 1;
        }
        for c in 1..=keep {
            let f = counts[c as usize] as f64 / 5000.0;
            assert!((f - 0.2).abs() < 0.03, "{counts:?}");
        }
        assert!(counts[keep as usize + 1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn cbc_randomized_within_quantile() {
        let p = params(2.0, "poly:3", 5);
        let n = 53;
        let keep = quantile_size(n, 0.5);
        for seed in 0..10 {
            let out =
                cbc_randomized(n, 5, &p, 0.5, &mut rng::stream(seed, Purpose::Cbc, &[])).unwrap();
            let full = wce_closed_form(&LatticeRule::new(n, out.z.clone()).unwrap(), &p).unwrap();
            assert_eq!(full.squared_error, out.step_errors[4]);
            // Last step: the chosen error is at most the largest in the quantile set.
            let mut z = out.z.clone();
            let errs: Vec<f64> = (1..n)
                .map(|c| {
                    z[4] = c;
                    wce_closed_form(&LatticeRule::new(n, z.clone()).unwrap(), &p)
                        .unwrap()
                        .squared_error
                })
                .collect();
            let mut sorted = errs.clone();
            sorted.sort_by(f64::total_cmp);
            assert!(full.squared_error <= sorted[keep - 1]);
        }
    }

    #[test]
    fn cbc_argument_errors() {
        let p = params(2.0, "poly:3", 2);
        assert!(cbc_deterministic(10, 2, &p).is_err());
        assert!(cbc_deterministic(11, 3, &p).is_err());
        let mut s = rng::stream(0, Purpose::Cbc, &[]);
        assert!(cbc_randomized(11, 2, &p, 1.0, &mut s).is_err());
        assert!(cbc_deterministic(11, 2, &params(1.5, "poly:3", 2)).is_err());
    }
}
