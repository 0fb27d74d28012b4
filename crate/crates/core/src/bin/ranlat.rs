use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ranlat::bench::{self, ConvergenceConfig, Estimator, HistogramConfig};
use ranlat::construct::{self, RRule, SelectionConfig};
use ranlat::integrands::{self, TestFunction, TestKind};
use ranlat::lattice::LatticeRule;
use ranlat::rng::{self, Purpose};
use ranlat::space::{KorobovParams, WeightRule};
use ranlat::wce;

#[derive(Parser)]
#[command(name = "ranlat", version, about = "Randomized rank-1 lattice rules")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// Squared worst-case error of a lattice rule.
    Wce {
        #[arg(long)]
        n: u64,
        /// Generating vector, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<u64>,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value = "poly:3")]
        weights: WeightRule,
        #[arg(long, value_enum, default_value = "closed")]
        method: Method,
        #[arg(long, default_value_t = wce::DEFAULT_K_MAX)]
        kmax: u64,
    },
    /// Best of r random generating vectors.
    Select {
        #[arg(long, default_value_t = 1024)]
        m: u64,
        #[arg(long)]
        fixed_n: Option<u64>,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value = "poly:3")]
        weights: WeightRule,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// ran, rms, stable or fixed:K
        #[arg(long, default_value = "rms")]
        r_rule: RRule,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Component-by-component construction.
    Cbc {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value = "poly:3")]
        weights: WeightRule,
        #[arg(long)]
        randomized: bool,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimate the integral of a test function.
    Integrate {
        #[arg(long = "fn", default_value = "f1")]
        func: TestKind,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        z: Vec<u64>,
        /// Apply a random shift drawn from this seed.
        #[arg(long)]
        shift_seed: Option<u64>,
        /// Plain Monte Carlo instead of a lattice rule.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = 1024)]
        m: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the points of a lattice rule, one per line, tab separated.
    Points {
        #[arg(long)]
        n: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<u64>,
        #[arg(long)]
        shift_seed: Option<u64>,
    },
    /// Worst-case error histogram data for a fixed prime N.
    HistExperiment {
        #[arg(long, default_value_t = 251)]
        n: u64,
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value = "poly:3")]
        weights: WeightRule,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// 1000 at desk scale; 10000 reproduces the full study.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variance convergence data for shifted lattice rules and Monte Carlo.
    ConvExperiment {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value = "poly:2")]
        weights: WeightRule,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "32,64,128,256,512,1024,2048,4096"
        )]
        m_grid: Vec<u64>,
        #[arg(long, default_value_t = 50)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "f1,f2,f3,f4")]
        fns: Vec<TestKind>,
        #[arg(long, value_delimiter = ',', default_value = "alg1,cbc_rand,mc")]
        estimators: Vec<Estimator>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log-log variance slope from convergence records.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        estimator: Estimator,
        #[arg(long = "fn")]
        func: String,
        #[arg(long, default_value_t = 0)]
        m_min: u64,
        #[arg(long, default_value_t = u64::MAX)]
        m_max: u64,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Positional decimal with 17 significant digits.
fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (16 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Wce {
            n,
            z,
            alpha,
            weights,
            method,
            kmax,
        } => {
            let params = KorobovParams::new(alpha, weights, z.len())?;
            let rule = LatticeRule::new(n, z)?;
            let report = match method {
                Method::Closed => wce::wce_closed_form(&rule, &params)?,
                Method::Brute => wce::wce_brute_force(&rule, &params, kmax)?,
            };
            println!("squared_error {:e}", report.squared_error);
            println!("tail_bound {:e}", report.tail_bound);
            if report.clamped {
                eprintln!("note: negative rounding residue clamped to zero");
            }
        }
        Command::Select {
            m,
            fixed_n,
            d,
            alpha,
            weights,
            eta,
            r_rule,
            seed,
        } => {
            let params = KorobovParams::new(alpha, weights, d)?;
            let cfg = SelectionConfig {
                m_max: m,
                eta,
                r_rule,
                seed,
                fixed_n,
            };
            let out = construct::select(&cfg, &params)?;
            println!(
                "# n={} r={} argmin_index={} seed={}",
                out.n, out.r, out.argmin_index, out.seed
            );
            println!("# z_star={}", join(&out.z_star));
            println!("# squared_wce={:e}", out.squared_error());
            println!("candidate,squared_wce");
            for (i, e) in out.candidate_errors.iter().enumerate() {
                println!("{i},{e:e}");
            }
        }
        Command::Cbc {
            n,
            d,
            alpha,
            weights,
            randomized,
            tau,
            seed,
        } => {
            let params = KorobovParams::new(alpha, weights, d)?;
            let out = if randomized {
                let mut s = rng::stream(seed, Purpose::Cbc, &[]);
                construct::cbc_randomized(n, d, &params, tau, &mut s)?
            } else {
                construct::cbc_deterministic(n, d, &params)?
            };
            println!("z {}", join(&out.z));
            println!(
                "squared_error {:e}",
                out.step_errors.last().copied().unwrap_or(0.0)
            );
        }
        Command::Integrate {
            func,
            d,
            n,
            z,
            shift_seed,
            mc,
            m,
            seed,
        } => {
            let f = TestFunction::new(func, d)?;
            let estimate = if mc {
                integrands::mc_estimate(&f, m, &mut rng::stream(seed, Purpose::MonteCarlo, &[]))?
            } else {
                let Some(n) = n else {
                    bail!("--n is required unless --mc is given")
                };
                let z = if z.is_empty() { vec![1; d] } else { z };
                let rule = LatticeRule::new(n, z)?;
                let shift = shift_seed
                    .map(|s| construct::sample_shift(d, &mut rng::stream(s, Purpose::Shift, &[])));
                integrands::qmc_estimate(&f, &rule, shift.as_ref())?
            };
            println!("{estimate:e}");
        }
        Command::Points { n, z, shift_seed } => {
            let d = z.len();
            let rule = LatticeRule::new(n, z)?;
            let shift = shift_seed
                .map(|s| construct::sample_shift(d, &mut rng::stream(s, Purpose::Shift, &[])));
            let mut pts = match &shift {
                Some(s) => rule.iter_shifted(s)?,
                None => rule.iter_points(),
            };
            let mut out = output(&None)?;
            let mut x = vec![0.0; d];
            while pts.next_into(&mut x) {
                let line: Vec<String> = x.iter().map(|&v| sig17(v)).collect();
                writeln!(out, "{}", line.join("\t"))?;
            }
            out.flush()?;
        }
        Command::HistExperiment {
            n,
            d,
            alpha,
            weights,
            eta,
            trials,
            seed,
            out,
        } => {
            let mut cfg = HistogramConfig::desk_defaults(n, seed);
            cfg.params = KorobovParams::new(alpha, weights, d)?;
            cfg.eta = eta;
            cfg.trials = trials;
            let records = bench::run_histogram(&cfg)?;
            bench::write_csv(&records, output(&out)?)?;
        }
        Command::ConvExperiment {
            d,
            alpha,
            weights,
            m_grid,
            reps,
            seed,
            fns,
            estimators,
            out,
        } => {
            let mut cfg = ConvergenceConfig::defaults(d, seed)?;
            cfg.params = KorobovParams::new(alpha, weights, d)?;
            cfg.m_grid = m_grid;
            cfg.reps = reps;
            cfg.fns = fns;
            cfg.estimators = estimators;
            let records = bench::run_convergence(&cfg)?;
            bench::write_csv(&records, output(&out)?)?;
        }
        Command::Fit {
            input,
            estimator,
            func,
            m_min,
            m_max,
        } => {
            let file =
                File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let records = bench::read_csv(file)?;
            println!("M,count,variance,log10_variance");
            for v in bench::variances(&records)
                .iter()
                .filter(|v| v.estimator == estimator && v.fn_name == func)
            {
                println!(
                    "{},{},{:e},{}",
                    v.m,
                    v.count,
                    v.variance,
                    v.log10_variance_cell()
                );
            }
            let fit = bench::fit_records(&records, estimator, &func, (m_min, m_max))?;
            println!("slope {}", fit.slope);
            println!("intercept {}", fit.intercept);
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring worker threads")?;
    }
    run(cli.command)
}
