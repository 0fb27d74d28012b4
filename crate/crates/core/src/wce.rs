//! Worst-case error of rank-1 lattice rules in the weighted Korobov space.
//!
//! Two independent routes are provided:
//!
//! * [`wce_closed_form`]: for integer `alpha <= 4`, the Bernoulli-polynomial
//!   kernel averaged over the `N` lattice points, `O(dN)`.
//! * [`wce_brute_force`]: the dual-lattice series `sum_{k in dual, k != 0}
//!   r(k)^-2`, for any real `alpha > 1/2`. Frequencies `|k_j| <= k_max` are
//!   summed explicitly, grouped by their residue mod `N`; each residue class
//!   beyond `k_max` is closed with an Euler-Maclaurin tail whose remainder is
//!   bounded, and the bound is propagated through the product into
//!   [`WceReport::tail_bound`].

use std::f64::consts::TAU;

use crate::lattice::LatticeRule;
use crate::space::{self, KorobovParams};
use crate::sum::pairwise_sum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WceMethod {
    ClosedForm,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WceReport {
    /// Squared worst-case error, never negative.
    pub squared_error: f64,
    pub method: WceMethod,
    /// Zero for the closed form. For brute force, a bound on
    /// `|squared_error - exact|` from the truncated frequency tails.
    pub tail_bound: f64,
    /// Set when a negative rounding residue was clamped to zero.
    pub clamped: bool,
}

impl WceReport {
    pub fn wce(&self) -> f64 {
        self.squared_error.sqrt()
    }
}

/// Bernoulli polynomial `B_order(x)` for `order` in {2, 4, 6, 8}.
pub fn bernoulli_poly(order: u32, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "bernoulli polynomial argument {x} outside [0, 1]"
        )));
    }
    let x2 = x * x;
    let v = match order {
        2 => x2 - x + 1.0 / 6.0,
        4 => x2 * x2 - 2.0 * x2 * x + x2 - 1.0 / 30.0,
        6 => {
            let x4 = x2 * x2;
            x4 * x2 - 3.0 * x4 * x + 2.5 * x4 - 0.5 * x2 + 1.0 / 42.0
        }
        8 => {
            let x4 = x2 * x2;
            x4 * x4 - 4.0 * x4 * x2 * x + (14.0 / 3.0) * x4 * x2 - (7.0 / 3.0) * x4
                + (2.0 / 3.0) * x2
                - 1.0 / 30.0
        }
        _ => return Err(Error::UnsupportedOrder(order)),
    };
    Ok(v)
}

/// `(-1)^(alpha+1) (2 pi)^(2 alpha) / (2 alpha)!`
fn kernel_scale(alpha: u32) -> f64 {
    let sign = if alpha % 2 == 1 { 1.0 } else { -1.0 };
    let fact: f64 = (1..=2 * alpha).map(f64::from).product();
    sign * TAU.powi(2 * alpha as i32) / fact
}

/// One-dimensional kernel `scale * B_{2 alpha}(m / N)` tabulated on the
/// lattice grid `m = 0..N`. Mirrored so `phi[m] == phi[N - m]` exactly.
#[derive(Debug, Clone)]
pub(crate) struct KernelTable {
    phi: Vec<f64>,
}

impl KernelTable {
    pub(crate) fn new(n: u64, params: &KorobovParams) -> Result<Self> {
        let alpha = params
            .integer_alpha()
            .ok_or(Error::UnsupportedAlpha(params.alpha()))?;
        let scale = kernel_scale(alpha);
        let n_us = n as usize;
        let mut phi = vec![0.0; n_us];
        for m in 0..=n_us / 2 {
            let v = scale * bernoulli_poly(2 * alpha, m as f64 / n as f64)?;
            phi[m] = v;
            if m != 0 {
                phi[n_us - m] = v;
            }
        }
        Ok(Self { phi })
    }

    #[inline]
    pub(crate) fn get(&self, m: u64) -> f64 {
        self.phi[m as usize]
    }
}

/// Applies one coordinate factor to a running `prod - 1`:
/// `(1 + q)(1 + a) - 1 = q + a + a q`.
#[inline]
pub(crate) fn fold_factor(q: f64, a: f64) -> f64 {
    q + a + a * q
}

/// Turns per-point `prod - 1` values into a squared error.
pub(crate) fn finish(per_point: &[f64]) -> (f64, bool) {
    let e2 = pairwise_sum(per_point) / per_point.len() as f64;
    if e2 < 0.0 {
        (0.0, true)
    } else {
        (e2, false)
    }
}

/// Modular inverse by the extended Euclidean algorithm.
pub(crate) fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut r0, mut r1) = (n as i128, (a % n) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(n as i128) as u64)
}

/// Per-coordinate index steps when the points are visited in order of their
/// first coordinate: point `m` has grid index `m * step_j mod N`.
pub(crate) fn grid_steps(rule: &LatticeRule) -> Vec<u64> {
    let n = rule.n_points();
    let z = rule.gen_vector();
    match z.first().and_then(|&z1| mod_inverse(z1, n)) {
        Some(w) => z
            .iter()
            .map(|&zj| ((w as u128 * zj as u128) % n as u128) as u64)
            .collect(),
        None => z.to_vec(),
    }
}

pub(crate) fn closed_form_with_table(
    rule: &LatticeRule,
    gammas: &[f64],
    table: &KernelTable,
) -> (f64, bool) {
    let n = rule.n_points();
    let steps = grid_steps(rule);
    let mut acc = vec![0u64; steps.len()];
    let per_point: Vec<f64> = (0..n)
        .map(|_| {
            let mut q = 0.0;
            for ((a, &s), &g) in acc.iter_mut().zip(&steps).zip(gammas) {
                q = fold_factor(q, g * g * table.get(*a));
                *a += s;
                if *a >= n {
                    *a -= n;
                }
            }
            q
        })
        .collect();
    finish(&per_point)
}

fn check_dims(rule: &LatticeRule, params: &KorobovParams) -> Result<()> {
    if rule.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: rule.dim(),
        });
    }
    Ok(())
}

/// Squared worst-case error from the Bernoulli-polynomial closed form:
/// `-1 + (1/N) sum_x prod_j [1 + gamma_j^2 (-1)^(alpha+1) (2 pi)^(2 alpha) / (2 alpha)! B_{2 alpha}(x_j)]`.
///
/// Points are visited in order of their first coordinate and combined by
/// pairwise summation, so rules generating the same point set give
/// bitwise-equal results.
pub fn wce_closed_form(rule: &LatticeRule, params: &KorobovParams) -> Result<WceReport> {
    check_dims(rule, params)?;
    let table = KernelTable::new(rule.n_points(), params)?;
    let (squared_error, clamped) = closed_form_with_table(rule, params.gammas(), &table);
    Ok(WceReport {
        squared_error,
        method: WceMethod::ClosedForm,
        tail_bound: 0.0,
        clamped,
    })
}

/// Upper limit on enumerated terms.
pub const ENUMERATION_GUARD: f64 = 1e9;

/// Sums of `|k|^-s` over `1 <= k` in each residue class mod `n`, explicit up
/// to `k_max`, plus (optionally) the tail beyond it. Returns values and
/// per-class error bounds.
pub(crate) fn residue_power_sums(
    n: u64,
    s: f64,
    k_max: u64,
    with_tail: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n_us = n as usize;
    let mut sums = vec![0.0; n_us];
    let mut errs = vec![0.0; n_us];
    for (rho, (sum, err)) in sums.iter_mut().zip(errs.iter_mut()).enumerate() {
        let rho = rho as u64;
        let first = if rho == 0 { n } else { rho };
        if first <= k_max {
            let count = (k_max - first) / n + 1;
            // Smallest terms first.
            let mut acc = 0.0;
            for i in (0..count).rev() {
                acc += ((first + i * n) as f64).powf(-s);
            }
            *sum = acc;
        }
        if with_tail {
            // Smallest k > k_max in the class.
            let k0 = k_max + 1 + (rho + n - (k_max + 1) % n) % n;
            let scale = (n as f64).powf(-s);
            let (h, bound) = space::hurwitz_zeta(s, k0 as f64 / n as f64);
            *sum += scale * h;
            *err = scale * bound;
        }
    }
    (sums, errs)
}

/// Per-coordinate totals over residue classes: `S_j(rho) = [rho = 0] + T_j(rho)`
/// with `T_j(rho) = gamma_j^2 sum_{k != 0, k = rho mod N} |k|^(-2 alpha)`.
struct ClassSums {
    t: Vec<f64>,
    err: Vec<f64>,
}

fn class_sums(n: u64, alpha: f64, gamma: f64, k_max: u64, with_tail: bool) -> ClassSums {
    let n_us = n as usize;
    if gamma == 0.0 {
        return ClassSums {
            t: vec![0.0; n_us],
            err: vec![0.0; n_us],
        };
    }
    let (pos, pos_err) = residue_power_sums(n, 2.0 * alpha, k_max, with_tail);
    let g2 = gamma * gamma;
    let mut t = vec![0.0; n_us];
    let mut err = vec![0.0; n_us];
    for rho in 0..n_us {
        let neg = (n_us - rho) % n_us;
        t[rho] = g2 * (pos[rho] + pos[neg]);
        err[rho] = g2 * (pos_err[rho] + pos_err[neg]);
    }
    ClassSums { t, err }
}

fn dual_series(
    rule: &LatticeRule,
    params: &KorobovParams,
    k_max: u64,
    with_tail: bool,
) -> Result<(f64, f64)> {
    check_dims(rule, params)?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be positive".into()));
    }
    let n = rule.n_points();
    let d = rule.dim();
    let residue_vectors = (n as f64).powi(d as i32 - 1);
    let explicit_terms = d as f64 * k_max as f64;
    if residue_vectors > ENUMERATION_GUARD || explicit_terms > ENUMERATION_GUARD {
        return Err(Error::EnumerationTooLarge(
            residue_vectors.max(explicit_terms),
        ));
    }
    let sums: Vec<ClassSums> = params
        .gammas()
        .iter()
        .map(|&g| class_sums(n, params.alpha(), g, k_max, with_tail))
        .collect();

    // Zero residue vector: prod_j (1 + T_j(0)) - 1. Error bounds are carried
    // alongside values: (v + dv)(w + dw) - v w = dv (w + dw) + v dw.
    let mut zero_q = 0.0;
    let mut zero_err = 0.0;
    for s in &sums {
        zero_err = zero_err * (1.0 + s.t[0] + s.err[0]) + (1.0 + zero_q) * s.err[0];
        zero_q = fold_factor(zero_q, s.t[0]);
    }

    // Nonzero residue vectors with sum_j rho_j z_j = 0 mod N. The last
    // coordinate is determined by the others.
    let z = rule.gen_vector();
    let last = d - 1;
    let inv_last = mod_inverse(z[last], n).ok_or_else(|| {
        Error::Unsupported(format!(
            "brute force needs z_d coprime to N, got z_d={} N={n}",
            z[last]
        ))
    })?;
    let factor = |j: usize, rho: u64| -> (f64, f64) {
        let s = &sums[j];
        let base = if rho == 0 { 1.0 } else { 0.0 };
        (base + s.t[rho as usize], s.err[rho as usize])
    };

    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut rho = vec![0u64; last];
    loop {
        // Residue of the free coordinates.
        let mut acc = 0u128;
        let mut val = 1.0;
        let mut err = 0.0;
        for (j, &r) in rho.iter().enumerate() {
            acc = (acc + r as u128 * z[j] as u128) % n as u128;
            let (v, e) = factor(j, r);
            err = err * (v + e) + val * e;
            val *= v;
        }
        let r_last = ((n as u128 - acc) % n as u128 * inv_last as u128 % n as u128) as u64;
        let all_zero = r_last == 0 && rho.iter().all(|&r| r == 0);
        if !all_zero {
            let (v, e) = factor(last, r_last);
            total += val * v;
            total_err += err * (v + e) + val * e;
        }
        // Odometer increment.
        let mut j = 0;
        while j < last {
            rho[j] += 1;
            if rho[j] < n {
                break;
            }
            rho[j] = 0;
            j += 1;
        }
        if j == last {
            break;
        }
    }
    let value = total + zero_q;
    Ok((value, total_err + zero_err))
}

/// Squared worst-case error from the dual-lattice series. See the module
/// docs for how `k_max` enters; the cost is `O(d k_max + N^(d-1))`.
pub fn wce_brute_force(
    rule: &LatticeRule,
    params: &KorobovParams,
    k_max: u64,
) -> Result<WceReport> {
    let (value, tail_bound) = dual_series(rule, params, k_max, true)?;
    let clamped = value < 0.0;
    Ok(WceReport {
        squared_error: value.max(0.0),
        method: WceMethod::BruteForce,
        tail_bound,
        clamped,
    })
}

/// Sum over the frequency box `[-k_max, k_max]^d` only, no tail correction.
pub fn dual_box_sum(rule: &LatticeRule, params: &KorobovParams, k_max: u64) -> Result<f64> {
    Ok(dual_series(rule, params, k_max, false)?.0)
}

/// Default frequency cutoff used when the closed form is unavailable.
pub const DEFAULT_K_MAX: u64 = 1000;

/// Closed form when alpha is a supported integer, brute force otherwise.
pub fn wce_auto(rule: &LatticeRule, params: &KorobovParams) -> Result<WceReport> {
    if params.integer_alpha().is_some() {
        wce_closed_form(rule, params)
    } else {
        wce_brute_force(rule, params, DEFAULT_K_MAX)
    }
}

/// `true` when `wce <= B(N, eta, lambda)` for every `lambda` in the grid,
/// i.e. `wce <= min_grid B`.
pub fn membership_z_for_error(
    squared_error: f64,
    n: u64,
    eta: f64,
    params: &KorobovParams,
    lambda_grid: &[f64],
) -> Result<bool> {
    let bound = space::bound_b_inf(n, eta, params, lambda_grid)?;
    Ok(squared_error.sqrt() <= bound)
}

/// Membership of the rule's generating vector in the good set: its
/// worst-case error meets the bound at every `lambda` of the grid. The finite
/// grid accepts a superset of the vectors meeting it for all `lambda`.
pub fn membership_z(
    rule: &LatticeRule,
    eta: f64,
    params: &KorobovParams,
    lambda_grid: &[f64],
) -> Result<bool> {
    let report = wce_auto(rule, params)?;
    membership_z_for_error(
        report.squared_error,
        rule.n_points(),
        eta,
        params,
        lambda_grid,
    )
}
