//! Property tests for the invariants of the estimators, sequences, detector,
//! segmentation and harness.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robust_cpd::confseq::{CatoniCs, CatoniCsConfig, ConfidenceInterval, CsGate, StitchSchedule};
use robust_cpd::detection::intersection_is_empty;
use robust_cpd::environments::{fit_piecewise_constant, InstanceSpec, NoiseFamily};
use robust_cpd::estimators::{influence, median_of_means, HeavyTailParams};
use robust_cpd::harness::run_trial;
use robust_cpd::policies::{forced_arm, PolicyConfig};

use common::{brute_force_sse, direct_sse};

fn eps() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.05f64..1.0]
}

proptest! {
    #[test]
    fn influence_is_odd(x in -1e6f64..1e6, e in eps()) {
        prop_assert_eq!(influence(-x, e), -influence(x, e));
    }

    #[test]
    fn influence_is_nondecreasing(x in -1e4f64..1e4, dx in 0.0f64..10.0, e in eps()) {
        prop_assert!(influence(x + dx, e) >= influence(x, e));
    }

    #[test]
    fn influence_exponential_moment(x in -50f64..50.0, e in eps()) {
        let rhs = 1.0 + x + x.abs().powf(1.0 + e) / (1.0 + e);
        prop_assert!(influence(x, e).exp() <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn mom_is_permutation_invariant_per_block(
        data in prop::collection::vec(-100f64..100.0, 1..60),
        k in 1usize..10,
        seed in any::<u64>(),
    ) {
        let k = k.min(data.len());
        let base = median_of_means(&data, k).unwrap();
        // shuffling inside each block leaves every block mean unchanged up to
        // summation order
        let n = data.len();
        let (q, r) = (n / k, n % k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = data.clone();
        let mut start = 0;
        for b in 0..k {
            let len = q + usize::from(b < r);
            let block = &mut shuffled[start..start + len];
            for i in (1..block.len()).rev() {
                block.swap(i, rng.random_range(0..=i));
            }
            start += len;
        }
        let got = median_of_means(&shuffled, k).unwrap();
        prop_assert!((got - base).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    #[test]
    fn mom_is_translation_equivariant(
        data in prop::collection::vec(-100f64..100.0, 1..60),
        k in 1usize..10,
        c in -1000f64..1000.0,
    ) {
        let k = k.min(data.len());
        let shifted: Vec<f64> = data.iter().map(|x| x + c).collect();
        let a = median_of_means(&data, k).unwrap() + c;
        let b = median_of_means(&shifted, k).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn running_interval_is_nested(seed in any::<u64>(), e in eps(), n in 5usize..200) {
        let ht = HeavyTailParams::new(e, 1.0).unwrap();
        let cfg = CatoniCsConfig {
            schedule: StitchSchedule::new(0.05, ht).unwrap(),
            horizon: 1000,
            tolerance: 1e-9,
            gate: CsGate { n_min: 1, feasibility_theta: None },
        };
        let mut cs = CatoniCs::new(0, cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        let mut prev = ConfidenceInterval::TRIVIAL;
        for _ in 0..n {
            data.push(rng.random_range(-2.0..2.0));
            let ci = cs.update(&data);
            prop_assert!(ci.lower >= prev.lower && ci.upper <= prev.upper);
            prev = ci;
        }
    }

    #[test]
    fn helly_matches_pairwise(
        family in prop::collection::vec((-10f64..10.0, 0f64..5.0), 1..12),
    ) {
        let cis: Vec<ConfidenceInterval> =
            family.iter().map(|&(lo, w)| ConfidenceInterval::new(lo, lo + w)).collect();
        let pairwise = cis.iter().any(|a| cis.iter().any(|b| a.lower > b.upper));
        prop_assert_eq!(intersection_is_empty(&cis), pairwise);
    }

    #[test]
    fn segmentation_matches_exhaustive(
        series in prop::collection::vec(-5f64..5.0, 1..=10),
        k in 1usize..=4,
    ) {
        let k = k.min(series.len());
        let fit = fit_piecewise_constant(&series, k).unwrap();
        let best = brute_force_sse(&series, k);
        prop_assert!((fit.sse - best).abs() <= 1e-9 * (1.0 + best));
        prop_assert!((direct_sse(&series, &fit.breakpoints) - best).abs() <= 1e-9 * (1.0 + best));
    }

    #[test]
    fn forced_exploration_density(k in 1usize..6, eta in 0.01f64..1.0, m in 1u64..4) {
        let eta = eta.min(k as f64);
        let cycle = (k as f64 / eta).floor() as u64;
        let mut counts = vec![0u64; k];
        for t in 0..cycle * m {
            if let Some(a) = forced_arm(t, k, eta) {
                counts[a] += 1;
            }
        }
        prop_assert!(counts.iter().all(|&c| c >= m));
    }
}

fn small_instance() -> InstanceSpec {
    let ht = HeavyTailParams::new(0.5, 1.0).unwrap();
    InstanceSpec::from_means(
        &[vec![1.0, 0.5, 0.2], vec![0.3, 1.2, 0.2]],
        vec![150],
        300,
        ht,
        NoiseFamily::Pareto { shape: 2.0 },
    )
    .unwrap()
}

fn all_policies() -> Vec<PolicyConfig> {
    let doc = r#"
        [[policy]]
        type = "robust_cpd_ucb"
        n_min = 10
        thinning = 1.1
        [[policy]]
        type = "robust_ucb"
        [[policy]]
        type = "sliding_window_ucb"
        [[policy]]
        type = "monitored_ucb"
        window = 20
        [[policy]]
        type = "uniform"
        [[policy]]
        type = "oracle"
    "#;
    #[derive(serde::Deserialize)]
    struct Doc {
        policy: Vec<PolicyConfig>,
    }
    toml::from_str::<Doc>(doc).unwrap().policy
}

#[test]
fn regret_identity_holds_for_every_policy() {
    let spec = small_instance();
    let gaps = spec.gaps().gaps;
    for cfg in all_policies() {
        for seed in 0..3 {
            let mut p = cfg.build(&spec, seed).unwrap();
            let ledger = run_trial(&spec, p.as_mut(), seed).unwrap();
            assert!(ledger.identity_holds(&gaps), "{} seed {seed}", cfg.label());
            assert_eq!(ledger.total(), ledger.total_from_counts(&gaps));
        }
    }
}

#[test]
fn oracle_has_zero_regret() {
    let spec = small_instance();
    let cfg = all_policies().pop().unwrap();
    let mut p = cfg.build(&spec, 1).unwrap();
    let ledger = run_trial(&spec, p.as_mut(), 1).unwrap();
    assert_eq!(ledger.total(), 0.0);
}

#[test]
fn trials_are_deterministic() {
    let spec = small_instance();
    for cfg in all_policies() {
        let run = || {
            let mut p = cfg.build(&spec, 9).unwrap();
            run_trial(&spec, p.as_mut(), 9).unwrap().cumulative()
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), "{}", cfg.label());
    }
}

#[test]
fn instance_moments_within_bound() {
    let spec = small_instance();
    assert!(spec.moment_violations(1e-9).is_empty());
}
