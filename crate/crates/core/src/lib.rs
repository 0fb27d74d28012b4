//! Randomized rank-1 lattice rules for quasi-Monte Carlo integration over
//! weighted Korobov spaces.
//!
//! The generating vector is picked as the best of `r` uniformly random
//! candidates, ranked by their computable worst-case error, with the number
//! of points drawn uniformly from the primes in `(ceil(M/2), M]`. Baselines
//! (component-by-component constructions, plain Monte Carlo) and experiment
//! drivers for the histogram and variance-convergence studies live alongside.
//!
//! ```
//! use ranlat::{space::KorobovParams, lattice::LatticeRule, wce};
//!
//! let params = KorobovParams::new(1.0, "list:1".parse().unwrap(), 1).unwrap();
//! let rule = LatticeRule::new(2, vec![1]).unwrap();
//! let report = wce::wce_closed_form(&rule, &params).unwrap();
//! let expected = std::f64::consts::PI.powi(2) / 12.0;
//! assert!((report.squared_error - expected).abs() < 1e-12);
//! ```

pub mod bench;
pub mod construct;
mod error;
pub mod integrands;
pub mod lattice;
pub mod rng;
pub mod space;
mod sum;
pub mod wce;

pub use error::{Error, Result};
