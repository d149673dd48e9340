mod common;

use gibbs_forge::census::census_of;
use gibbs_forge::instances::{factor_count, is_balanced, sample_null, sample_planted};
use gibbs_forge::models::{gaussian_expectation, Coupling, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{pair_graph, random_tree};

#[test]
fn null_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let spec = ModelSpec::colouring(3, 2).unwrap();
    let g = sample_null(10, 0, 2, &spec, &mut rng).unwrap();
    assert_eq!((g.n(), g.m()), (10, 0));
    let mut mean = 0.0;
    for _ in 0..20 {
        let g = sample_null(10_000, factor_count(10_000, 3.0, 2), 2, &spec, &mut rng).unwrap();
        mean += g.mean_degree() / 20.0;
    }
    assert!((mean - 3.0).abs() <= 0.1);
}

#[test]
fn short_cycle_counts_have_the_right_order() {
    // Poisson means (d(k-1))^l / (2l) for l = 2, 3 at d = 3: 2.25 + 4.5
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spec = ModelSpec::potts(2, 2, -1.0).unwrap();
    let mut total = 0;
    for _ in 0..50 {
        let g = sample_null(2000, 3000, 2, &spec, &mut rng).unwrap();
        total += census_of(&g, Some(7)).short_cycles.len();
    }
    let mean = total as f64 / 50.0;
    assert!((3.0..13.5).contains(&mean), "mean short cycles {mean}");
}

#[test]
fn planted_colouring_respects_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let p = sample_planted(30, 40, 2, &ModelSpec::colouring(2, 2).unwrap(), &mut rng).unwrap();
        for f in p.graph.factors() {
            assert_ne!(p.ground_truth[f.vars[0]], p.ground_truth[f.vars[1]]);
        }
    }
}

#[test]
fn planted_at_zero_beta_matches_null() {
    let spec = ModelSpec::potts(3, 2, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = 100_000;
    let null = sample_null(10, m, 2, &spec, &mut rng).unwrap();
    let planted = sample_planted(10, m, 2, &spec, &mut rng).unwrap().graph;
    let count = |g: &gibbs_forge::graph::FactorGraph| {
        let mut c = [0f64; 10];
        g.factors().iter().for_each(|f| c[f.vars[0]] += 1.0);
        c
    };
    let (a, b) = (count(&null), count(&planted));
    let chi2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2) / (x + y)).sum();
    // 9 degrees of freedom, 0.1% critical value
    assert!(chi2 < 27.88, "chi-square {chi2}");
}

#[test]
fn planted_kspin_tilts_toward_truth() {
    let beta = 1.0;
    let spec = ModelSpec::kspin(2, beta, Coupling::StandardGaussian).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = 100_000;
    let p = sample_planted(500, m, 2, &spec, &mut rng).unwrap();
    let pm = |s: usize| if s == 0 { 1.0 } else { -1.0 };
    let xs: Vec<f64> = p
        .graph
        .factors()
        .iter()
        .map(|f| {
            let j = (f.table.get(&[0, 0]) - 1.0).atanh() / beta;
            j * pm(p.ground_truth[f.vars[0]]) * pm(p.ground_truth[f.vars[1]])
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / m as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
    let expected = gaussian_expectation(|j| j * (beta * j).tanh());
    assert!(mean > 0.0);
    assert!((mean - expected).abs() <= 3.0 * (var / m as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn census_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tree = pair_graph(12, 3, None, &random_tree(12, &mut rng));
    let c = census_of(&tree, Some(40));
    assert!(c.in_family_g && c.short_cycles.is_empty());

    let two = pair_graph(6, 3, None, &[(0, 1), (1, 0), (3, 4), (4, 3), (1, 2)]);
    let c = census_of(&two, Some(6));
    assert!(c.in_family_g);
    assert_eq!(c.short_cycles.len(), 2);

    let shared = pair_graph(6, 3, None, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
    assert!(!census_of(&shared, Some(6)).in_family_g);
}

/// Exact `P(|K/n - 1/2| <= tol)` for `K ~ Bin(n, 1/2)`.
fn binomial_window(n: u64, tol: f64) -> f64 {
    let mut log_pmf = -(n as f64) * 2f64.ln();
    let mut total = 0.0;
    for k in 0..=n {
        if k > 0 {
            log_pmf += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        if (k as f64 / n as f64 - 0.5).abs() <= tol {
            total += log_pmf.exp();
        }
    }
    total
}

#[test]
fn balance_examples() {
    assert!(is_balanced(&[0, 1, 0, 1, 0, 1, 0, 1], 2, 1.0));
    assert!(!is_balanced(&[0; 8], 2, 1.0));
    let n = 10_000;
    let p = binomial_window(n, 3.0 * (n as f64).powf(-2.0 / 3.0));
    assert!((p - 0.80).abs() < 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ok = (0..1000)
        .filter(|_| {
            let s: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
            is_balanced(&s, 2, 3.0)
        })
        .count() as f64;
    let sd = (1000.0 * p * (1.0 - p)).sqrt();
    assert!((ok - 1000.0 * p).abs() <= 3.0 * sd, "{ok} of 1000 balanced, expected {:.0}", 1000.0 * p);
}
