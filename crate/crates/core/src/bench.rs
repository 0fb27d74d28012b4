//! Experiment drivers: worst-case error histograms for fixed `N`, and
//! variance convergence of shifted randomized lattice rules against Monte
//! Carlo. Raw per-replication records are written as CSV; variances and
//! slopes are computed from those records afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{self, RRule, SelectionConfig};
use crate::integrands::{self, Integrand, TestFunction, TestKind};
use crate::lattice::LatticeRule;
use crate::rng::{self, Purpose};
use crate::space::KorobovParams;
use crate::wce;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// One uniform random generating vector.
    RandomZ,
    /// Best of `r` random candidates.
    Alg1,
    CbcRand,
    CbcDet,
    /// Plain Monte Carlo with `M` points.
    Mc,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::RandomZ,
        Estimator::Alg1,
        Estimator::CbcRand,
        Estimator::CbcDet,
        Estimator::Mc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::RandomZ => "random_z",
            Estimator::Alg1 => "alg1",
            Estimator::CbcRand => "cbc_rand",
            Estimator::CbcDet => "cbc_det",
            Estimator::Mc => "mc",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Estimator::RandomZ => 1,
            Estimator::Alg1 => 2,
            Estimator::CbcRand => 3,
            Estimator::CbcDet => 4,
            Estimator::Mc => 5,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown estimator {s:?}")))
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub estimator: Estimator,
    /// Test function name, or `wce` for histogram rows.
    #[serde(rename = "fn")]
    pub fn_name: String,
    pub d: usize,
    pub alpha: f64,
    /// Size parameter; 0 when `N` was fixed.
    #[serde(rename = "M")]
    pub m: u64,
    /// Points used: the prime modulus, or `M` for Monte Carlo rows.
    #[serde(rename = "N")]
    pub n: u64,
    pub rep: u64,
    /// log10 of the worst-case error (histograms) or an integral estimate.
    pub value: f64,
    pub seed: u64,
}

impl ExperimentRecord {
    fn sort_key(&self) -> (&'static str, &str, u64, u64) {
        (self.estimator.name(), &self.fn_name, self.m, self.rep)
    }
}

/// Sorts rows lexicographically on `(estimator, fn, M, rep)`.
pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Writes header and rows (sorted first) with LF line endings.
pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in &sorted {
        w.serialize(r)
            .map_err(|e| Error::InvalidParameter(format!("csv write: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv write: {e}")))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::InvalidParameter(format!("csv read: {e}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramConfig {
    pub n: u64,
    pub params: KorobovParams,
    pub eta: f64,
    pub tau: f64,
    pub trials: u64,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
}

impl HistogramConfig {
    /// d = 20, alpha = 2, gamma_j = j^-3, eta = tau = 1/2, 10^3 trials.
    pub fn desk_defaults(n: u64, seed: u64) -> Self {
        Self {
            n,
            params: KorobovParams::new(2.0, crate::space::WeightRule::Poly(3.0), 20)
                .expect("valid defaults"),
            eta: 0.5,
            tau: 0.5,
            trials: 1000,
            seed,
            estimators: vec![Estimator::RandomZ, Estimator::Alg1, Estimator::CbcRand],
        }
    }
}

fn job_seed(seed: u64, est: Estimator, m: u64, rep: u64) -> u64 {
    rng::derive_key(seed, &[Purpose::Job as u64, est.tag(), m, rep])
}

/// log10 worst-case error of one trial.
fn histogram_trial(cfg: &HistogramConfig, est: Estimator, trial: u64, r: u32) -> Result<f64> {
    let n = cfg.n;
    let d = cfg.params.dim();
    let seed = job_seed(cfg.seed, est, 0, trial);
    let squared = match est {
        Estimator::RandomZ => {
            let z = construct::sample_vector(n, d, &mut rng::stream(seed, Purpose::Candidate, &[]));
            wce::wce_closed_form(&LatticeRule::new(n, z)?, &cfg.params)?.squared_error
        }
        Estimator::Alg1 => construct::select_with(seed, n, r, &cfg.params)?.squared_error(),
        Estimator::CbcRand => {
            let mut s = rng::stream(seed, Purpose::Cbc, &[]);
            let out = construct::cbc_randomized(n, d, &cfg.params, cfg.tau, &mut s)?;
            *out.step_errors.last().expect("d >= 1")
        }
        Estimator::CbcDet => *construct::cbc_deterministic(n, d, &cfg.params)?
            .step_errors
            .last()
            .expect("d >= 1"),
        Estimator::Mc => {
            return Err(Error::InvalidParameter("mc has no worst-case error".into()));
        }
    };
    Ok(0.5 * squared.log10())
}

/// Worst-case error histograms for fixed `N`. Algorithm 1 uses the RMS rule
/// for `r` with `M` replaced by `N`.
pub fn run_histogram(cfg: &HistogramConfig) -> Result<Vec<ExperimentRecord>> {
    if !crate::lattice::is_prime(cfg.n) {
        return Err(Error::NotPrime(cfg.n));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let r = construct::resolve_r(RRule::Rms, cfg.params.alpha(), cfg.eta, cfg.n)?;
    let jobs: Vec<(Estimator, u64)> = cfg
        .estimators
        .iter()
        .flat_map(|&e| (0..cfg.trials).map(move |t| (e, t)))
        .collect();
    let mut records = jobs
        .into_par_iter()
        .map(|(est, trial)| {
            Ok(ExperimentRecord {
                experiment_id: format!("hist-n{}", cfg.n),
                estimator: est,
                fn_name: "wce".into(),
                d: cfg.params.dim(),
                alpha: cfg.params.alpha(),
                m: 0,
                n: cfg.n,
                rep: trial,
                value: histogram_trial(cfg, est, trial, r)?,
                seed: cfg.seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub params: KorobovParams,
    pub m_grid: Vec<u64>,
    pub reps: u64,
    pub seed: u64,
    pub fns: Vec<TestKind>,
    pub estimators: Vec<Estimator>,
    pub eta: f64,
    pub tau: f64,
}

/// Powers of two `2^5 ..= 2^12`.
pub fn default_m_grid() -> Vec<u64> {
    (5..=12).map(|e| 1u64 << e).collect()
}

impl ConvergenceConfig {
    /// alpha = 1, gamma_j = j^-2, M = 2^5..2^12, 50 replications, f1..f4,
    /// estimators alg1, cbc_rand and mc.
    pub fn defaults(d: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            params: KorobovParams::new(1.0, crate::space::WeightRule::Poly(2.0), d)?,
            m_grid: default_m_grid(),
            reps: 50,
            seed,
            fns: vec![
                TestKind::F1,
                TestKind::FBeta(2),
                TestKind::FBeta(3),
                TestKind::FBeta(4),
            ],
            estimators: vec![Estimator::Alg1, Estimator::CbcRand, Estimator::Mc],
            eta: 0.5,
            tau: 0.5,
        })
    }
}

/// Point set used by one convergence job, plus integral estimates for each
/// integrand. Returns `(N, estimates)`.
pub fn convergence_job(
    cfg: &ConvergenceConfig,
    fs: &[&dyn Integrand],
    est: Estimator,
    m: u64,
    rep: u64,
) -> Result<(u64, Vec<f64>)> {
    let seed = job_seed(cfg.seed, est, m, rep);
    let d = cfg.params.dim();
    if est == Estimator::Mc {
        let mut s = rng::stream(seed, Purpose::MonteCarlo, &[]);
        return Ok((m, integrands::mc_estimate_many(fs, m, &mut s)?));
    }
    let rule = match est {
        Estimator::Alg1 => {
            let sel = SelectionConfig {
                m_max: m,
                eta: cfg.eta,
                r_rule: RRule::Stable,
                seed,
                fixed_n: None,
            };
            construct::select(&sel, &cfg.params)?.rule()
        }
        _ => {
            let n = construct::sample_prime(m, &mut rng::stream(seed, Purpose::Prime, &[]))?;
            let z = match est {
                Estimator::RandomZ => {
                    construct::sample_vector(n, d, &mut rng::stream(seed, Purpose::Candidate, &[]))
                }
                Estimator::CbcRand => {
                    let mut s = rng::stream(seed, Purpose::Cbc, &[]);
                    construct::cbc_randomized(n, d, &cfg.params, cfg.tau, &mut s)?.z
                }
                _ => construct::cbc_deterministic(n, d, &cfg.params)?.z,
            };
            LatticeRule::new(n, z)?
        }
    };
    let shift = construct::sample_shift(d, &mut rng::stream(seed, Purpose::Shift, &[]));
    let values = integrands::qmc_estimate_many(fs, &rule, Some(&shift))?;
    Ok((rule.n_points(), values))
}

/// Shifted-lattice and Monte Carlo estimates of each test function, one
/// record per `(estimator, fn, M, rep)`, sorted.
pub fn run_convergence(cfg: &ConvergenceConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.reps == 0 || cfg.m_grid.is_empty() || cfg.fns.is_empty() {
        return Err(Error::InvalidParameter(
            "empty replication count, M grid or function list".into(),
        ));
    }
    if let Some(&m) = cfg.m_grid.iter().find(|&&m| m < 2) {
        return Err(Error::InvalidParameter(format!(
            "M must be at least 2, got {m}"
        )));
    }
    let d = cfg.params.dim();
    let tests = cfg
        .fns
        .iter()
        .map(|&k| TestFunction::new(k, d))
        .collect::<Result<Vec<_>>>()?;
    let fs: Vec<&dyn Integrand> = tests.iter().map(|t| t as &dyn Integrand).collect();

    let mut jobs = Vec::new();
    for &est in &cfg.estimators {
        for &m in &cfg.m_grid {
            for rep in 0..cfg.reps {
                jobs.push((est, m, rep));
            }
        }
    }
    let per_job = jobs
        .into_par_iter()
        .map(|(est, m, rep)| {
            let (n, values) = convergence_job(cfg, &fs, est, m, rep)?;
            Ok(cfg
                .fns
                .iter()
                .zip(values)
                .map(|(k, value)| ExperimentRecord {
                    experiment_id: format!("conv-d{d}"),
                    estimator: est,
                    fn_name: k.to_string(),
                    d,
                    alpha: cfg.params.alpha(),
                    m,
                    n,
                    rep,
                    value,
                    seed: cfg.seed,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<ExperimentRecord> = per_job.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

/// Sample statistics of one `(estimator, fn, M)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct VariancePoint {
    pub estimator: Estimator,
    pub fn_name: String,
    pub m: u64,
    pub count: usize,
    pub mean: f64,
    /// Unbiased (`count - 1` denominator) sample variance.
    pub variance: f64,
}

impl VariancePoint {
    /// `log10(variance)`, with the `-inf` sentinel for an exact zero.
    pub fn log10_variance_cell(&self) -> String {
        if self.variance == 0.0 {
            "-inf".to_string()
        } else {
            format!("{}", self.variance.log10())
        }
    }
}

/// Unbiased sample variance; `None` below two samples.
pub fn sample_variance(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((mean, ss / (n - 1.0)))
}

type GroupKey = (&'static str, String, u64);

/// Groups records by `(estimator, fn, M)` and computes sample variances.
pub fn variances(records: &[ExperimentRecord]) -> Vec<VariancePoint> {
    let mut groups: BTreeMap<GroupKey, (Estimator, Vec<(u64, f64)>)> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.estimator.name(), r.fn_name.clone(), r.m))
            .or_insert_with(|| (r.estimator, Vec::new()))
            .1
            .push((r.rep, r.value));
    }
    groups
        .into_iter()
        .filter_map(|((_, fn_name, m), (estimator, mut vals))| {
            vals.sort_by_key(|&(rep, _)| rep);
            let values: Vec<f64> = vals.into_iter().map(|(_, v)| v).collect();
            let (mean, variance) = sample_variance(&values)?;
            Some(VariancePoint {
                estimator,
                fn_name,
                m,
                count: values.len(),
                mean,
                variance,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Inclusive bounds on `M`.
    pub m_range: (u64, u64),
    pub points: usize,
}

/// Least squares of `log10(variance)` on `log10(M)` over `(M, variance)`
/// pairs with `M` in range and positive variance.
pub fn fit_slope(points: &[(u64, f64)], m_range: (u64, u64)) -> Result<SlopeFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(m, v)| m >= m_range.0 && m <= m_range.1 && v > 0.0 && v.is_finite())
        .map(|&(m, v)| ((m as f64).log10(), v.log10()))
        .collect();
    let mut distinct: Vec<u64> = points
        .iter()
        .filter(|&&(m, v)| m >= m_range.0 && m <= m_range.1 && v > 0.0)
        .map(|&(m, _)| m)
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} distinct M values with positive variance in [{}, {}], need 3",
            distinct.len(),
            m_range.0,
            m_range.1
        )));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        m_range,
        points: xy.len(),
    })
}

/// Variance slope for one `(estimator, fn)` selection of raw records.
pub fn fit_records(
    records: &[ExperimentRecord],
    estimator: Estimator,
    fn_name: &str,
    m_range: (u64, u64),
) -> Result<SlopeFit> {
    let pts: Vec<(u64, f64)> = variances(records)
        .into_iter()
        .filter(|v| v.estimator == estimator && v.fn_name == fn_name)
        .map(|v| (v.m, v.variance))
        .collect();
    fit_slope(&pts, m_range)
}

/// Sample mean and median, for the skewness check on histogram samples.
pub fn mean_and_median(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    let median = if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    };
    Some((mean, median))
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(s[lo] + (pos - lo as f64) * (s[hi] - s[lo]))
}
