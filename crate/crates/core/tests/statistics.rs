//! Distributional checks on the random constructions. Seeds are fixed, so
//! each test is deterministic; thresholds sit at roughly the 0.1% tail.

use rand::Rng;

use ranlat::bench;
use ranlat::construct;
use ranlat::integrands::{self, CustomFn, Integrand, TestFunction, TestKind};
use ranlat::lattice::LatticeRule;
use ranlat::rng::{self, Purpose};
use ranlat::space::{KorobovParams, WeightRule};
use ranlat::wce;

fn chi_square(counts: &[u64], expected: f64) -> f64 {
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

#[test]
fn primes_are_drawn_uniformly() {
    let primes = construct::prime_set(20).unwrap();
    assert_eq!(primes, [11, 13, 17, 19]);
    let mut s = rng::stream(1, Purpose::Prime, &[]);
    let draws = 100_000;
    let mut counts = [0u64; 4];
    for _ in 0..draws {
        let p = construct::sample_prime(20, &mut s).unwrap();
        counts[primes.iter().position(|&q| q == p).unwrap()] += 1;
    }
    // 3 degrees of freedom, p = 0.001
    assert!(
        chi_square(&counts, draws as f64 / 4.0) < 16.27,
        "{counts:?}"
    );
}

#[test]
fn vector_components_are_uniform_and_independent() {
    let mut s = rng::stream(2, Purpose::Candidate, &[]);
    let draws = 100_000;
    let mut marginal = [[0u64; 4]; 3];
    let mut pairs = [0u64; 16];
    for _ in 0..draws {
        let z = construct::sample_vector(5, 3, &mut s);
        for (j, &c) in z.iter().enumerate() {
            assert!((1..5).contains(&c));
            marginal[j][c as usize - 1] += 1;
        }
        pairs[(z[0] as usize - 1) * 4 + z[1] as usize - 1] += 1;
    }
    for m in &marginal {
        assert!(chi_square(m, draws as f64 / 4.0) < 16.27, "{m:?}");
    }
    // 15 degrees of freedom, p = 0.001
    assert!(chi_square(&pairs, draws as f64 / 16.0) < 37.70, "{pairs:?}");
}

#[test]
fn shift_moments() {
    let d = 3;
    let draws = 100_000;
    let mut s = rng::stream(3, Purpose::Shift, &[]);
    let samples: Vec<Vec<f64>> = (0..draws)
        .map(|_| construct::sample_shift(d, &mut s).delta().to_vec())
        .collect();
    let n = draws as f64;
    for j in 0..d {
        let col: Vec<f64> = samples.iter().map(|x| x[j]).collect();
        assert!(col.iter().all(|x| (0.0..1.0).contains(x)));
        let (mean, var) = bench::sample_variance(&col).unwrap();
        // sd of the mean is 0.29 / sqrt(n) ~ 9e-4
        assert!((mean - 0.5).abs() < 4e-3, "{mean}");
        assert!((var - 1.0 / 12.0).abs() < 2e-3, "{var}");
    }
    let cov: f64 = samples
        .iter()
        .map(|x| (x[0] - 0.5) * (x[1] - 0.5))
        .sum::<f64>()
        / n;
    let corr = cov * 12.0;
    assert!(corr.abs() < 4.0 / n.sqrt(), "{corr}");
}

fn space5() -> KorobovParams {
    KorobovParams::new(2.0, WeightRule::Poly(3.0), 5).unwrap()
}

#[test]
fn selection_filters_bad_vectors() {
    let params = space5();
    let n = 251;
    let runs = 500u64;
    let best: Vec<f64> = (0..runs)
        .map(|i| {
            construct::select_with(rng::derive_key(10, &[i]), n, 40, &params)
                .unwrap()
                .squared_error()
        })
        .collect();
    let mut s = rng::stream(11, Purpose::Candidate, &[]);
    let single: Vec<f64> = (0..runs)
        .map(|_| {
            let z = construct::sample_vector(n, 5, &mut s);
            wce::wce_closed_form(&LatticeRule::new(n, z).unwrap(), &params)
                .unwrap()
                .squared_error
        })
        .collect();
    let (_, med_best) = bench::mean_and_median(&best).unwrap();
    let (_, med_single) = bench::mean_and_median(&single).unwrap();
    assert!(med_best <= med_single, "{med_best} vs {med_single}");
}

#[test]
fn selected_vector_is_the_best_candidate() {
    let params = space5();
    let out = construct::select_with(5, 101, 12, &params).unwrap();
    assert_eq!(out.candidate_errors.len(), 12);
    for (i, &e) in out.candidate_errors.iter().enumerate() {
        let z = construct::candidate_vector(5, 101, 5, i);
        let direct = wce::wce_closed_form(&LatticeRule::new(101, z).unwrap(), &params).unwrap();
        assert_eq!(e, direct.squared_error);
        assert!(out.squared_error() <= e);
    }
}

#[test]
fn shifted_rule_is_unbiased() {
    let d = 3;
    let rule = LatticeRule::new(31, vec![1, 12, 7]).unwrap();
    let f = TestFunction::new(TestKind::F1, d).unwrap();
    let exact = integrands::exact_integral(&f).unwrap();
    let estimates: Vec<f64> = (0..4000u64)
        .map(|i| {
            let shift = construct::sample_shift(d, &mut rng::stream(12, Purpose::Shift, &[i]));
            integrands::qmc_estimate(&f, &rule, Some(&shift)).unwrap()
        })
        .collect();
    let (mean, var) = bench::sample_variance(&estimates).unwrap();
    let se = (var / estimates.len() as f64).sqrt();
    assert!(
        (mean - exact).abs() <= 4.0 * se,
        "mean {mean} exact {exact} se {se}"
    );

    // A non-periodic integrand too.
    let g = CustomFn::new(2, |x: &[f64]| x[0] * x[0] + x[1]);
    let rule2 = LatticeRule::new(13, vec![1, 5]).unwrap();
    let est: Vec<f64> = (0..4000u64)
        .map(|i| {
            let shift = construct::sample_shift(2, &mut rng::stream(13, Purpose::Shift, &[i]));
            integrands::qmc_estimate(&g, &rule2, Some(&shift)).unwrap()
        })
        .collect();
    let (mean, var) = bench::sample_variance(&est).unwrap();
    let se = (var / est.len() as f64).sqrt();
    assert!((mean - 5.0 / 6.0).abs() <= 4.0 * se);
    assert_eq!(g.dim(), 2);
}

#[test]
fn error_grows_with_weights() {
    let mut s = rng::stream(14, Purpose::Candidate, &[]);
    for _ in 0..40 {
        let d = s.random_range(1..=3usize);
        let n = [5u64, 7, 11, 13][s.random_range(0..4)];
        let alpha = [0.8, 1.0, 1.5, 2.0][s.random_range(0..4)];
        let z: Vec<u64> = (0..d).map(|_| s.random_range(1..n)).collect();
        let gammas: Vec<f64> = (0..d).map(|_| s.random_range(0.05..0.9)).collect();
        let j = s.random_range(0..d);
        let mut bigger = gammas.clone();
        bigger[j] += s.random_range(0.01..0.1);
        let rule = LatticeRule::new(n, z).unwrap();
        let lo = KorobovParams::new(alpha, WeightRule::List(gammas), d).unwrap();
        let hi = KorobovParams::new(alpha, WeightRule::List(bigger), d).unwrap();
        let a = wce::wce_brute_force(&rule, &lo, 300).unwrap();
        let b = wce::wce_brute_force(&rule, &hi, 300).unwrap();
        assert!(b.squared_error >= a.squared_error - a.tail_bound - b.tail_bound);
    }
}

#[test]
fn monte_carlo_variance_scales_inversely() {
    let f = TestFunction::new(TestKind::FBeta(2), 2).unwrap();
    let var_at = |m: u64| {
        let est: Vec<f64> = (0..400u64)
            .map(|i| {
                integrands::mc_estimate(&f, m, &mut rng::stream(15, Purpose::MonteCarlo, &[m, i]))
                    .unwrap()
            })
            .collect();
        bench::sample_variance(&est).unwrap().1
    };
    let ratio = var_at(64) / var_at(1024);
    // Expected 16; the sample variances have about 7% relative error each.
    assert!((10.0..26.0).contains(&ratio), "{ratio}");
}
