use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waternet::anomaly::{SigmaDetector, Verdict};
use waternet::inference::{
    discrete_free_energy, layer_free_energy, DiscreteBelief, DiscreteGenerativeModel,
    FreeEnergyForm, PrecisionState,
};

fn random_model(rng: &mut impl Rng, states: usize, obs: usize) -> DiscreteGenerativeModel {
    let raw: Vec<Vec<f64>> = (0..states)
        .map(|_| (0..obs).map(|_| rng.gen_range(0.01..1.0)).collect())
        .collect();
    let total: f64 = raw.iter().flatten().sum();
    DiscreteGenerativeModel::new(raw.into_iter().map(|r| r.into_iter().map(|v| v / total).collect()).collect())
        .unwrap()
}

fn normalised(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Every point of the simplex over 4 states on a grid of step 1/20.
fn simplex_grid() -> Vec<Vec<f64>> {
    let n = 20;
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                let d = n - a - b - c;
                out.push([a, b, c, d].iter().map(|&k| k as f64 / n as f64).collect());
            }
        }
    }
    out
}

#[test]
fn posterior_minimises_free_energy_on_a_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = simplex_grid();
    for _ in 0..20 {
        let model = random_model(&mut rng, 4, 3);
        let o = rng.gen_range(0..3);
        let post = DiscreteBelief::new(model.posterior(o).unwrap()).unwrap();
        let best = discrete_free_energy(&post, &model, o).unwrap();
        assert!(best.kl.abs() < 1e-12);
        for q in &grid {
            let f = discrete_free_energy(&DiscreteBelief::new(q.clone()).unwrap(), &model, o).unwrap();
            assert!(f.free_energy >= best.free_energy - 1e-9);
        }
    }
}

#[test]
fn precision_tracks_batch_variance() {
    // Symmetric +-0.5 errors: variance 0.25 and no fourth-moment noise in the
    // EWMA estimate.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let stream: Vec<f64> = (0..10_000).map(|_| if rng.gen_bool(0.5) { 0.5 } else { -0.5 }).collect();
    let mut s = PrecisionState::new(0.001, 0.99).unwrap();
    for &e in &stream {
        s = s.update(e);
    }
    let mean = stream.iter().sum::<f64>() / stream.len() as f64;
    let batch = stream.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / stream.len() as f64;
    let oracle = 1.0 / (batch + 0.001);
    assert!((s.precision() - oracle).abs() / oracle < 0.05, "{} vs {oracle}", s.precision());
    assert!((oracle - 1.0 / 0.251).abs() / oracle < 0.01);
}

proptest! {
    #[test]
    fn decomposition_and_gibbs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = rng.gen_range(1..=6);
        let obs = rng.gen_range(1..=4);
        let model = random_model(&mut rng, states, obs);
        let q = DiscreteBelief::new(normalised((0..states).map(|_| rng.gen_range(0.0..1.0)).collect())).unwrap();
        let o = rng.gen_range(0..obs);
        let f = discrete_free_energy(&q, &model, o).unwrap();
        prop_assert!(f.kl >= 0.0);
        prop_assert!((f.free_energy - f.surprise - f.kl).abs() <= 1e-12);
        prop_assert!(f.free_energy >= f.surprise);
        prop_assert!((f.surprise + model.evidence(o).unwrap().ln()).abs() <= 1e-12);
    }

    #[test]
    fn layer_free_energy_even_and_increasing(
        var in 0.0f64..10.0,
        beta in 1e-4f64..1.0,
        eps in 0.01f64..100.0,
        bump in 0.01f64..10.0,
        literal in any::<bool>(),
    ) {
        let form = if literal { FreeEnergyForm::Literal } else { FreeEnergyForm::Standard };
        let s = PrecisionState::with_variance(var, beta, 0.9).unwrap();
        prop_assert_eq!(layer_free_energy(&s, eps, form), layer_free_energy(&s, -eps, form));
        prop_assert!(layer_free_energy(&s, eps + bump, form) > layer_free_energy(&s, eps, form));
    }

    #[test]
    fn detector_is_one_sided(
        base in prop::collection::vec(10.0f64..20.0, 30..60),
        drop in 50.0f64..1e3,
    ) {
        let mut d = SigmaDetector::new(30, 3.0, 30).unwrap();
        for &x in &base {
            d.update(x);
        }
        prop_assert_eq!(d.update(-drop), Verdict::Normal);
    }

    #[test]
    fn raising_k_never_adds_verdicts(
        values in prop::collection::vec(0.0f64..100.0, 10..300),
        k in 0.5f64..4.0,
        dk in 0.01f64..3.0,
    ) {
        let count = |k: f64| {
            let mut d = SigmaDetector::new(8, k, 8).unwrap();
            values.iter().filter(|&&x| d.update(x) == Verdict::Anomaly).count()
        };
        prop_assert!(count(k + dk) <= count(k));
    }

    #[test]
    fn burst_leaves_no_trace_in_window(
        baseline in prop::collection::vec(10.0f64..20.0, 80..120),
        at in 40usize..70,
        len in 1usize..4,
    ) {
        let mut with = SigmaDetector::new(24, 3.0, 24).unwrap();
        let mut without = SigmaDetector::new(24, 3.0, 24).unwrap();
        let (mut flagged, mut flagged_clean) = (Vec::new(), Vec::new());
        for (t, &x) in baseline.iter().enumerate() {
            let burst = (at..at + len).contains(&t);
            let v = if burst { x + 1e4 } else { x };
            if with.update(v) == Verdict::Anomaly {
                flagged.push(t);
            }
            if !burst && without.update(x) == Verdict::Anomaly {
                flagged_clean.push(t);
            }
        }
        let mut expected: Vec<usize> = flagged_clean.into_iter().chain(at..at + len).collect();
        expected.sort_unstable();
        prop_assert_eq!(flagged, expected);
        prop_assert_eq!(with.window_values().collect::<Vec<_>>(), without.window_values().collect::<Vec<_>>());
    }
}

#[test]
fn constant_baseline_window_matches_burst_free_run() {
    let mut with = SigmaDetector::new(24, 3.0, 24).unwrap();
    let mut without = SigmaDetector::new(24, 3.0, 24).unwrap();
    for t in 0..100 {
        let burst = (50..55).contains(&t);
        with.update(if burst { 500.0 } else { 40.0 });
        without.update(40.0);
    }
    assert_eq!(with.stats(), without.stats());
    assert_eq!(with.window_values().collect::<Vec<_>>(), without.window_values().collect::<Vec<_>>());
}
