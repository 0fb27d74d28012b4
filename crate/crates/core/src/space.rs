//! Weighted Korobov space parameters and the scalar functions built on them:
//! the Fourier decay `r(k)`, the Riemann zeta function, and the worst-case
//! error bound that defines the set of good generating vectors.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Coordinate weights `gamma_j`, `j >= 1`.
///
/// Text syntax (CLI and config files): `poly:a` for `gamma_j = j^-a`, or
/// `list:g1,g2,...` for explicit values.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    Poly(f64),
    List(Vec<f64>),
}

impl WeightRule {
    /// Weight of coordinate `j` (1-based). `None` if an explicit list is too short.
    pub fn gamma(&self, j: usize) -> Option<f64> {
        match self {
            WeightRule::Poly(a) => Some((j as f64).powf(-a)),
            WeightRule::List(g) => g.get(j.checked_sub(1)?).copied(),
        }
    }
}

impl FromStr for WeightRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::WeightSyntax(format!("missing ':' in {s:?}")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::WeightSyntax(format!("bad number {t:?}")))
        };
        match kind.trim() {
            "poly" => {
                let a = num(body)?;
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::WeightSyntax(format!(
                        "decay exponent must be >= 0, got {a}"
                    )));
                }
                Ok(WeightRule::Poly(a))
            }
            "list" => {
                let g = body.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Ok(WeightRule::List(g))
            }
            other => Err(Error::WeightSyntax(format!(
                "unknown weight rule {other:?}"
            ))),
        }
    }
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRule::Poly(a) => write!(f, "poly:{a}"),
            WeightRule::List(g) => {
                f.write_str("list:")?;
                for (i, v) in g.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

/// Smoothness `alpha > 1/2`, product weights and dimension of a weighted
/// Korobov space.
#[derive(Debug, Clone, PartialEq)]
pub struct KorobovParams {
    alpha: f64,
    weights: WeightRule,
    gammas: Vec<f64>,
}

impl KorobovParams {
    pub fn new(alpha: f64, weights: WeightRule, dim: usize) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "alpha must exceed 1/2, got {alpha}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        let gammas = (1..=dim)
            .map(|j| {
                let g = weights.gamma(j).ok_or_else(|| {
                    Error::InvalidParameter(format!("weight list has fewer than {dim} entries"))
                })?;
                if !(0.0..=1.0).contains(&g) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma_{j} = {g} outside [0, 1]"
                    )));
                }
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alpha,
            weights,
            gammas,
        })
    }

    /// Same smoothness and weight rule in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.alpha, self.weights.clone(), dim)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &WeightRule {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.gammas.len()
    }

    /// `gamma_1, ..., gamma_d`.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `Some(alpha)` when alpha is one of the integers the Bernoulli-polynomial
    /// closed form supports.
    pub fn integer_alpha(&self) -> Option<u32> {
        let a = self.alpha;
        (a.fract() == 0.0 && (1.0..=4.0).contains(&a)).then_some(a as u32)
    }
}

/// Integer frequency vector `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrequencyVector(pub Vec<i64>);

impl FrequencyVector {
    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

impl From<Vec<i64>> for FrequencyVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

/// `r(k) = prod_{j: k_j != 0} |k_j|^alpha / gamma_j`; 1 for `k = 0`, and
/// `+inf` when a nonzero `k_j` meets `gamma_j = 0`.
pub fn r_decay(k: &FrequencyVector, params: &KorobovParams) -> Result<f64> {
    if k.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: k.dim(),
        });
    }
    let mut r = 1.0;
    for (&kj, &g) in k.0.iter().zip(params.gammas()) {
        if kj == 0 {
            continue;
        }
        if g == 0.0 {
            return Ok(f64::INFINITY);
        }
        r *= (kj.unsigned_abs() as f64).powf(params.alpha()) / g;
    }
    Ok(r)
}

// Even-index Bernoulli numbers B_2 .. B_12.
const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Hurwitz zeta `sum_{m >= 0} (m + a)^-s` for `s > 1`, `a > 0`, together with
/// a rigorous bound on the truncation error.
///
/// Terms with `m + a < 16` are summed directly (largest index first); the rest
/// is the Euler-Maclaurin expansion through `B_10`, with the remainder bounded
/// by `2 |B_12| / 12! * |f^(11)(a')|`.
pub(crate) fn hurwitz_zeta(s: f64, a: f64) -> (f64, f64) {
    debug_assert!(s > 1.0 && a > 0.0);
    const START: f64 = 16.0;
    let head_terms = if a >= START {
        0
    } else {
        (START - a).ceil() as u64
    };
    let start = a + head_terms as f64;

    // Correction terms: -B_{2k}/(2k)! f^{(2k-1)}(start) with
    // f^{(n)}(x) = (-1)^n s (s+1) ... (s+n-1) x^{-s-n}.
    let mut tail = start.powf(1.0 - s) / (s - 1.0) + 0.5 * start.powf(-s);
    let mut rising = s; // s (s+1) ... (s+2k-2)
    let mut bound = 0.0;
    for (i, &b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = i as u32 + 1;
        let deriv_abs = rising * start.powf(-s - (2 * k - 1) as f64);
        if i + 1 == BERNOULLI_EVEN.len() {
            bound = 2.0 * b.abs() / factorial(2 * k) * deriv_abs;
            break;
        }
        // f^{(2k-1)} is negative, so -B f^{(2k-1)} = +B |f^{(2k-1)}|.
        tail += b / factorial(2 * k) * deriv_abs;
        rising *= (s + (2 * k - 1) as f64) * (s + (2 * k) as f64);
    }

    let mut head = 0.0;
    for m in (0..head_terms).rev() {
        head += (a + m as f64).powf(-s);
    }
    (head + tail, bound)
}

/// Riemann zeta `zeta(s)` for real `s > 1`, accurate to 1e-12 absolute.
pub fn zeta(s: f64) -> Result<f64> {
    if !s.is_finite() || s <= 1.0 {
        return Err(Error::Domain(format!("zeta needs s > 1, got {s}")));
    }
    Ok(hurwitz_zeta(s, 1.0).0)
}

fn check_bound_args(n: u64, eta: f64) -> Result<()> {
    if !crate::lattice::is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

fn check_lambda(lambda: f64, alpha: f64) -> Result<()> {
    if !(lambda >= 0.5 && lambda < alpha) {
        return Err(Error::Domain(format!(
            "lambda must lie in [1/2, {alpha}), got {lambda}"
        )));
    }
    Ok(())
}

/// Worst-case error level met by at least an `eta` fraction of generating
/// vectors for prime `n`:
/// `((1 / ((1 - eta)(n - 1))) prod_j (1 + 2 gamma_j^(1/lambda) zeta(alpha/lambda)))^lambda`.
pub fn bound_b(n: u64, eta: f64, lambda: f64, params: &KorobovParams) -> Result<f64> {
    check_bound_args(n, eta)?;
    check_lambda(lambda, params.alpha())?;
    let z = zeta(params.alpha() / lambda)?;
    let prod: f64 = params
        .gammas()
        .iter()
        .map(|&g| 1.0 + 2.0 * g.powf(1.0 / lambda) * z)
        .product();
    Ok((prod / ((1.0 - eta) * (n - 1) as f64)).powf(lambda))
}

/// Minimum of [`bound_b`] over `lambda_grid`. This is never below the infimum
/// over the whole interval, so a test against it accepts a superset of the
/// vectors meeting the bound for every lambda.
pub fn bound_b_inf(n: u64, eta: f64, params: &KorobovParams, lambda_grid: &[f64]) -> Result<f64> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    lambda_grid
        .iter()
        .map(|&l| bound_b(n, eta, l, params))
        .try_fold(f64::INFINITY, |m, b| Ok(m.min(b?)))
}

/// Number of points in [`default_lambda_grid`].
pub const LAMBDA_GRID_POINTS: usize = 33;

/// 33 geometrically spaced values on `[0.5, alpha - 0.01]`. Collapses to
/// `[0.5]` when `alpha <= 0.51`.
pub fn default_lambda_grid(alpha: f64) -> Vec<f64> {
    let lo: f64 = 0.5;
    let hi = alpha - 0.01;
    if hi <= lo {
        return vec![lo];
    }
    let ratio = (hi / lo).powf(1.0 / (LAMBDA_GRID_POINTS - 1) as f64);
    let mut grid: Vec<f64> = (0..LAMBDA_GRID_POINTS)
        .map(|i| lo * ratio.powi(i as i32))
        .collect();
    grid[LAMBDA_GRID_POINTS - 1] = hi;
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64, w: &str, d: usize) -> KorobovParams {
        KorobovParams::new(alpha, w.parse().unwrap(), d).unwrap()
    }

    #[test]
    fn weight_rule_syntax() {
        assert_eq!(
            "poly:3".parse::<WeightRule>().unwrap(),
            WeightRule::Poly(3.0)
        );
        assert_eq!(
            "list:0.5, 0.25".parse::<WeightRule>().unwrap(),
            WeightRule::List(vec![0.5, 0.25])
        );
        for bad in ["poly", "poly:-1", "list:", "list:a", "exp:2"] {
            assert!(bad.parse::<WeightRule>().is_err(), "{bad}");
        }
        let w: WeightRule = "list:1,0.5".parse().unwrap();
        assert_eq!(w.to_string().parse::<WeightRule>().unwrap(), w);
    }

    #[test]
    fn params_validation() {
        assert!(KorobovParams::new(0.5, WeightRule::Poly(1.0), 2).is_err());
        assert!(KorobovParams::new(1.0, WeightRule::Poly(1.0), 0).is_err());
        assert!(KorobovParams::new(1.0, WeightRule::List(vec![1.5]), 1).is_err());
        assert!(KorobovParams::new(1.0, WeightRule::List(vec![1.0]), 2).is_err());
        let p = params(2.0, "poly:3", 3);
        assert_eq!(p.gammas(), &[1.0, 1.0 / 8.0, 1.0 / 27.0]);
        assert_eq!(p.integer_alpha(), Some(2));
        assert_eq!(params(1.5, "poly:1", 1).integer_alpha(), None);
        assert_eq!(params(5.0, "poly:1", 1).integer_alpha(), None);
    }

    #[test]
    fn r_decay_examples() {
        let p = params(1.0, "list:0.5,0.25", 2);
        assert_eq!(r_decay(&FrequencyVector::zero(2), &p).unwrap(), 1.0);
        assert_eq!(
            r_decay(&vec![2].into(), &params(2.0, "list:1", 1)).unwrap(),
            4.0
        );
        let p = params(1.0, &format!("list:0.5,{}", 1.0 / 3.0), 2);
        let r = r_decay(&vec![2, 3].into(), &p).unwrap();
        assert!((r - 36.0).abs() < 1e-12);
        let p = params(1.0, "list:1,0", 2);
        assert_eq!(r_decay(&vec![1, 1].into(), &p).unwrap(), f64::INFINITY);
        assert_eq!(r_decay(&vec![1, 0].into(), &p).unwrap(), 1.0);
        assert!(matches!(
            r_decay(&vec![1].into(), &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    // Plain partial sum with the integral tail sandwich, far from s = 1.
    fn zeta_oracle(s: f64) -> f64 {
        let t = 200_000u64;
        let head: f64 = (1..t).rev().map(|n| (n as f64).powf(-s)).sum();
        head + (t as f64).powf(1.0 - s) / (s - 1.0) + 0.5 * (t as f64).powf(-s)
    }

    #[test]
    fn zeta_closed_forms() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-12);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta(6.0).unwrap() - PI.powi(6) / 945.0).abs() < 1e-12);
        for s in [1.5, 2.5, 3.3, 8.0] {
            assert!((zeta(s).unwrap() - zeta_oracle(s)).abs() < 1e-10, "s = {s}");
        }
    }

    #[test]
    fn zeta_near_one() {
        // zeta(s) = 1/(s-1) + euler_gamma + O(s-1)
        let s = 1.0001;
        let z = zeta(s).unwrap();
        let approx = 1.0 / (s - 1.0) + 0.577_215_664_901_532_9;
        assert!(z.is_finite() && z > 1e3);
        assert!((z - approx).abs() < 1e-3);
        let (_, bound) = hurwitz_zeta(s, 1.0);
        assert!(bound < 1e-12);
    }

    #[test]
    fn zeta_domain() {
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
        assert!(zeta(f64::NAN).is_err());
    }

    #[test]
    fn hurwitz_matches_direct_sum() {
        for (s, a) in [(2.0, 0.3), (4.0, 2.5), (2.2, 40.0)] {
            let direct: f64 = (0..2_000_000u64)
                .rev()
                .map(|m| (m as f64 + a).powf(-s))
                .sum();
            let rest = (2_000_000.0 + a).powf(1.0 - s) / (s - 1.0);
            let (h, bound) = hurwitz_zeta(s, a);
            assert!((h - direct - rest).abs() < 1e-11, "s={s} a={a}");
            assert!(bound < 1e-14);
        }
    }

    #[test]
    fn bound_b_examples() {
        let p = params(2.0, "list:1", 1);
        let b = bound_b(5, 0.5, 1.0, &p).unwrap();
        let expected = 0.5 * (1.0 + 2.0 * PI * PI / 6.0);
        assert!((b - expected).abs() < 1e-12);
        assert!((b - 2.144_934).abs() < 1e-6);

        let p0 = params(2.0, "list:0,0,0", 3);
        let b0 = bound_b(7, 0.25, 1.5, &p0).unwrap();
        assert!((b0 - (1.0 / (0.75 * 6.0f64)).powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn bound_b_blows_up_near_alpha() {
        let p = params(2.0, "poly:2", 3);
        let lambdas = [1.9, 1.99, 1.999, 1.9999];
        let vals: Vec<f64> = lambdas
            .iter()
            .map(|&l| bound_b(101, 0.5, l, &p).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
        assert!(vals[3] > 1e3 * vals[0]);
    }

    #[test]
    fn bound_b_monotone_in_n_and_eta() {
        let p = params(2.0, "poly:3", 4);
        for &lambda in &[0.5, 1.0, 1.7] {
            let by_n: Vec<f64> = [2u64, 3, 11, 101, 1009]
                .iter()
                .map(|&n| bound_b(n, 0.5, lambda, &p).unwrap())
                .collect();
            assert!(by_n.windows(2).all(|w| w[1] < w[0]));
            let by_eta: Vec<f64> = [0.1, 0.3, 0.5, 0.9]
                .iter()
                .map(|&e| bound_b(101, e, lambda, &p).unwrap())
                .collect();
            assert!(by_eta.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn bound_b_errors() {
        let p = params(2.0, "poly:3", 2);
        assert!(bound_b(4, 0.5, 1.0, &p).is_err());
        assert!(bound_b(5, 0.0, 1.0, &p).is_err());
        assert!(bound_b(5, 1.0, 1.0, &p).is_err());
        assert!(bound_b(5, 0.5, 0.4, &p).is_err());
        assert!(bound_b(5, 0.5, 2.0, &p).is_err());
        assert!(bound_b_inf(5, 0.5, &p, &[]).is_err());
    }

    #[test]
    fn bound_b_inf_grid() {
        let p = params(2.0, "list:1", 1);
        let single = bound_b_inf(5, 0.5, &p, &[0.5]).unwrap();
        assert_eq!(single, bound_b(5, 0.5, 0.5, &p).unwrap());

        let grid = [0.5, 0.75, 1.0, 1.25, 1.5];
        let vals: Vec<f64> = grid
            .iter()
            .map(|&l| bound_b(5, 0.5, l, &p).unwrap())
            .collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(bound_b_inf(5, 0.5, &p, &grid).unwrap(), min);
        let coarse = bound_b_inf(5, 0.5, &p, &grid[..2]).unwrap();
        assert!(min <= coarse);
    }

    #[test]
    fn default_grid_shape() {
        let g = default_lambda_grid(2.0);
        assert_eq!(g.len(), LAMBDA_GRID_POINTS);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[32], 1.99);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(default_lambda_grid(0.505), vec![0.5]);
    }
}
