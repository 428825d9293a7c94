//! Model-level invariants checked over random inputs.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use overload::diagnostics::{
    brant_test, hosmer_lemeshow_ordinal, lipsitz_test, polychoric, pulkstenis_robinson_test,
    TestResult,
};
use overload::estimation::design::{Column, DesignMatrix};
use overload::estimation::{
    category_probs, cumulative_probs, fit_ordered_logit, observation_probs, OrderedLikelihood,
};
use overload::ingest::categorical_summary;
use overload::iv::first_stage;
use overload::sim::{simulate_org, SimScenario};

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Ordered data with one continuous covariate, one indicator and six levels.
fn ordered_design(seed: u64, n: usize) -> DesignMatrix {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let alpha = [-1.8, -0.9, 0.0, 0.8, 1.7];
    let mut x1 = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a = 4.0 * r.random::<f64>() - 2.0;
        let b = f64::from(u8::from(r.random::<f64>() < 0.4));
        let eta = 0.7 * a - 0.5 * b;
        let u: f64 = r.random();
        y.push(1 + alpha.iter().filter(|&&t| u >= logistic(t - eta)).count() as u8);
        x1.push(a);
        d.push(b);
    }
    DesignMatrix::ordinal(
        y,
        6,
        vec![
            Column::continuous("x1", x1),
            Column::dummy("d: yes", "d", d),
        ],
    )
}

fn chi2_sf(x: f64, df: usize) -> f64 {
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(x)
}

fn reproduces(t: &TestResult) -> bool {
    (t.p_value - chi2_sf(t.statistic, t.df)).abs() <= 1e-10
        && t.per_variable
            .iter()
            .all(|v| (v.p_value - chi2_sf(v.statistic, v.df)).abs() <= 1e-10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn category_probabilities_are_a_distribution(
        mut alpha in prop::collection::vec(-6.0f64..6.0, 1..7),
        eta in -10.0f64..10.0,
    ) {
        alpha.sort_by(f64::total_cmp);
        alpha.dedup();
        let p = category_probs(&alpha, eta);
        let c = cumulative_probs(&alpha, eta);
        prop_assert_eq!(p.len(), alpha.len() + 1);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn cumulative_percentages_end_at_hundred(values in prop::collection::vec(0u8..9, 1..300)) {
        let s = categorical_summary("v", values);
        let cum: Vec<f64> = s.levels.iter().map(|l| l.cumulative_percent).collect();
        prop_assert!(cum.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((cum.last().unwrap() - 100.0).abs() <= 0.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn column_scaling_rescales_its_coefficient(seed in 0u64..1000, scale in prop_oneof![0.01f64..0.5, 2.0f64..50.0]) {
        let d = ordered_design(seed, 400);
        let fit = fit_ordered_logit(&d).unwrap();
        let mut scaled = d.clone();
        for v in &mut scaled.columns[0].values {
            *v *= scale;
        }
        let sfit = fit_ordered_logit(&scaled).unwrap();
        let b = fit.param("x1").unwrap().estimate;
        let bs = sfit.param("x1").unwrap().estimate;
        prop_assert!((bs * scale - b).abs() <= 1e-7 * b.abs().max(1.0));
        let p = observation_probs(&fit, &d).unwrap();
        let ps = observation_probs(&sfit, &scaled).unwrap();
        let gap = p.iter().flatten().zip(ps.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-8, "probability gap {}", gap);
    }

    #[test]
    fn optimum_beats_nearby_perturbations(seed in 0u64..1000) {
        let d = ordered_design(seed, 300);
        let fit = fit_ordered_logit(&d).unwrap();
        let ll = OrderedLikelihood::from_design(&d);
        let best = fit.log_likelihood.unwrap();
        let theta: Vec<f64> = fit.params.iter().map(|p| p.estimate).collect();
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..100 {
            let t: Vec<f64> = theta.iter().map(|v| v + 0.02 * (r.random::<f64>() - 0.5)).collect();
            if let Some(v) = ll.value(&t) {
                prop_assert!(v <= best + 1e-9);
            }
        }
    }

    #[test]
    fn reported_p_values_follow_from_statistics(seed in 0u64..1000) {
        let d = ordered_design(seed, 600);
        let fit = fit_ordered_logit(&d).unwrap();
        prop_assert!(reproduces(&brant_test(&d, &fit).unwrap()));
        prop_assert!(reproduces(&lipsitz_test(&d, &fit, 10).unwrap()));
        let (chi, dev) = pulkstenis_robinson_test(&d, &fit).unwrap();
        prop_assert!(reproduces(&chi) && reproduces(&dev));
        prop_assert!(reproduces(&hosmer_lemeshow_ordinal(&d, &fit, 10).unwrap()));
    }

    #[test]
    fn first_stage_residuals_ignore_instrument_units(seed in 0u64..1000, a in 0.1f64..20.0, b in -50.0f64..50.0) {
        let mut d = ordered_design(seed, 200);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..200).map(|_| r.random::<f64>()).collect();
        let load: Vec<f64> = z.iter().zip(&d.columns[0].values).map(|(z, x)| 3.0 * z + x + r.random::<f64>()).collect();
        d.columns.insert(0, Column::continuous("Load", load));
        let base = first_stage(&d, &z).unwrap();
        let affine: Vec<f64> = z.iter().map(|v| a * v + b).collect();
        let other = first_stage(&d, &affine).unwrap();
        let gap = base.fitted.iter().zip(&other.fitted).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-8, "fitted gap {}", gap);
    }

    #[test]
    fn polychoric_is_bounded_and_antisymmetric(seed in 0u64..1000, rho in -0.9f64..0.9) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for _ in 0..400 {
            let a: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut r);
            let e: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut r);
            let b = rho * a + (1.0 - rho * rho).sqrt() * e;
            x.push(1.0 + [-0.5, 0.4].iter().filter(|&&c| a > c).count() as f64);
            y.push(1.0 + [-1.0, 0.0, 0.9].iter().filter(|&&c| b > c).count() as f64);
        }
        let (est, _) = polychoric(&x, &y).unwrap();
        let reversed: Vec<f64> = y.iter().map(|v| 5.0 - v).collect();
        let (rev, _) = polychoric(&x, &reversed).unwrap();
        prop_assert!(est > -1.0 && est < 1.0);
        prop_assert!((est + rev).abs() <= 1e-6, "{} vs {}", est, rev);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn more_confounding_couples_load_and_error_more(seed in 0u64..1000) {
        let corr = |gamma: f64| {
            let t = simulate_org(&SimScenario { gamma_talent: gamma, seed, ..SimScenario::default() }).unwrap();
            let mut load = std::collections::BTreeMap::new();
            for c in &t.citations {
                *load.entry(c.target.clone()).or_insert(0.0) += f64::from(c.frequency);
            }
            let l: Vec<f64> = t.citations.iter().map(|c| load[&c.target]).collect();
            pearson(&l, &t.latent_error)
        };
        let (lo, hi) = (corr(0.0), corr(1.5));
        prop_assert!(hi >= lo, "{} then {}", lo, hi);
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn instrument_is_independent_of_talent() {
    use overload::homophily::{build_similarity_network, instrument_centrality, SimilarityConfig};
    let reps = 40;
    let mut corrs = Vec::new();
    for seed in 0..reps {
        let t = simulate_org(&SimScenario {
            seed: 500 + seed,
            ..SimScenario::default()
        })
        .unwrap();
        let inst = instrument_centrality(
            &build_similarity_network(&t.employees, &SimilarityConfig::default()).unwrap(),
        );
        let z: Vec<f64> = t.employees.iter().map(|e| inst[&e.id]).collect();
        corrs.push(pearson(&z, &t.talent));
    }
    let m = corrs.iter().sum::<f64>() / reps as f64;
    let sd = (corrs.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
    assert!(
        m.abs() <= 3.0 * sd / (reps as f64).sqrt(),
        "mean correlation {m}, sd {sd}"
    );
}
