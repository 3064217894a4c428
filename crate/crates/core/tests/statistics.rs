//! Statistical and regression checks on sampled disorder and ensembles.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use qwalk_core::{
    evolve_with_field, measure_trajectory, run_ensemble, run_trajectory_pair, sample_angles,
    CoinField, DisorderConfig, DisorderKind, ExperimentConfig, InitialStateSpec, MeasureKind,
    WalkRng, Workers,
};

fn autocorrelation(xs: &[f64], lag: usize) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let cov = xs.windows(lag + 1).map(|w| (w[0] - mean) * (w[lag] - mean)).sum::<f64>() / n;
    cov / var
}

#[test]
fn full_strength_angles_are_white() {
    for (kind, steps) in [(DisorderKind::Temporal, 10_000), (DisorderKind::Spatial, 5_000)] {
        let field = sample_angles(&DisorderConfig::new(kind, 1.0), steps, &mut WalkRng::from_seed(2024)).unwrap();
        let xs = field.angles();
        assert!(xs.len() >= 10_000);
        let bound = 5.0 / (xs.len() as f64).sqrt();
        for lag in 1..=10 {
            let r = autocorrelation(xs, lag);
            assert!(r.abs() < bound, "{kind:?} lag {lag}: {r}");
        }
    }
}

#[test]
fn partial_strength_mixes_base_angle() {
    let field = sample_angles(&DisorderConfig::new(DisorderKind::Temporal, 0.5), 10_000, &mut WalkRng::from_seed(8)).unwrap();
    let base = field.angles().iter().filter(|&&a| a == FRAC_PI_4).count() as f64 / 10_000.0;
    // Binomial(1e4, 0.5) has sd 0.005.
    assert!((base - 0.5).abs() < 0.025, "base fraction {base}");
}

#[test]
fn realization_fields_do_not_collide() {
    let cfg = ExperimentConfig {
        steps: 10,
        realizations: 10_000,
        master_seed: 5,
        ..ExperimentConfig::new(DisorderConfig::new(DisorderKind::Spatial, 1.0))
    };
    let mut seen = HashSet::new();
    for i in 0..cfg.realizations {
        let f = cfg.realization_field(i).unwrap();
        let key: Vec<u64> = f.angles().iter().map(|a| a.to_bits()).collect();
        assert!(seen.insert(key), "realization {i} repeats an earlier field");
    }
}

#[test]
fn realization_is_reproducible() {
    let cfg = ExperimentConfig {
        steps: 30,
        realizations: 4,
        master_seed: 77,
        ..ExperimentConfig::new(DisorderConfig::new(DisorderKind::Spatial, 1.0))
    };
    assert_eq!(run_trajectory_pair::<f64>(&cfg, 3).unwrap(), run_trajectory_pair::<f64>(&cfg, 3).unwrap());
    assert_ne!(cfg.realization_field(0).unwrap(), cfg.realization_field(1).unwrap());
}

#[test]
fn standard_error_shrinks_with_realizations() {
    let base = ExperimentConfig {
        steps: 40,
        master_seed: 99,
        measures: [MeasureKind::Blp, MeasureKind::StdDev].into_iter().collect(),
        ..ExperimentConfig::new(DisorderConfig::new(DisorderKind::Temporal, 1.0))
    };
    let at = |r: usize| {
        let cfg = ExperimentConfig { realizations: r, ..base.clone() };
        run_ensemble::<f64>(&cfg, Workers(4)).unwrap()
    };
    let small = at(250);
    let large = at(1000);
    let ratio = large.blp.unwrap().stderr / small.blp.unwrap().stderr;
    assert!((ratio - 0.5).abs() < 0.1, "blp stderr ratio {ratio}");
    let ratio = large.std_dev.as_ref().unwrap().last().unwrap().stderr
        / small.std_dev.as_ref().unwrap().last().unwrap().stderr;
    assert!((ratio - 0.5).abs() < 0.1, "sigma stderr ratio {ratio}");
}

#[test]
fn ordered_walk_regression_anchors() {
    // Frozen from an independent dense NumPy implementation.
    let field = CoinField::uniform(FRAC_PI_4).unwrap();
    let a = InitialStateSpec::new(FRAC_PI_4, FRAC_PI_2);
    let b = InitialStateSpec::new(-FRAC_PI_4, FRAC_PI_2);

    let ta = evolve_with_field(&a, &field, 20).unwrap();
    let tb = evolve_with_field(&b, &field, 20).unwrap();
    let n20 = measure_trajectory(&ta, Some(&tb)).unwrap().blp.unwrap();
    assert!(n20 > 0.0);
    assert!((n20 - 2.055611720857217).abs() < 1e-9, "N(20) = {n20}");

    let ta = evolve_with_field(&a, &field, 200).unwrap();
    let tb = evolve_with_field(&b, &field, 200).unwrap();
    let m = measure_trajectory(&ta, Some(&tb)).unwrap();
    assert!((m.blp.unwrap() - 7.488850198639925).abs() < 1e-9);
    assert!((m.entropy.last().unwrap() - 0.8456254171913551).abs() < 1e-9);
    assert!((m.coherence.last().unwrap() - 0.32113771564576954).abs() < 1e-9);
    assert!((m.std_dev.last().unwrap() - 90.79226426227633).abs() < 1e-7);
}

#[test]
fn ballistic_versus_localized_spreading() {
    let field = CoinField::uniform(FRAC_PI_4).unwrap();
    let traj = evolve_with_field(&InitialStateSpec::new(FRAC_PI_4, FRAC_PI_2), &field, 400).unwrap();
    let sigma = measure_trajectory(&traj, None).unwrap().std_dev.values;
    let (r200, r400) = (sigma[200] / 200.0, sigma[400] / 400.0);
    assert!(r200 > 0.0 && r200 < 1.0);
    assert!((r200 - r400).abs() < 0.01, "{r200} vs {r400}");

    let cfg = ExperimentConfig {
        steps: 400,
        realizations: 100,
        master_seed: 3,
        measures: [MeasureKind::StdDev].into_iter().collect(),
        ..ExperimentConfig::new(DisorderConfig::new(DisorderKind::Spatial, 1.0))
    };
    let stats = run_ensemble::<f64>(&cfg, Workers(4)).unwrap();
    let s = stats.std_dev.unwrap().mean;
    let (l100, l200, l400) = (s[100] / 100.0, s[200] / 200.0, s[400] / 400.0);
    assert!(l400 < l200 && l200 < l100, "{l100} {l200} {l400}");
    assert!(l400 < 0.03, "sigma/t at 400 = {l400}");
}

#[test]
fn pair_without_partner_measures_has_no_distance() {
    let field = CoinField::uniform(0.3).unwrap();
    let traj = evolve_with_field(&InitialStateSpec::new(0.2, 0.0), &field, 5).unwrap();
    let m = measure_trajectory(&traj, None).unwrap();
    assert!(m.trace_distance.is_none() && m.blp.is_none());
    assert_eq!(m.entropy.len(), 6);
}

#[test]
fn ballistic_pair_loses_distinguishability_at_once() {
    let field = CoinField::uniform(0.0).unwrap();
    let a = evolve_with_field(&InitialStateSpec::new(FRAC_PI_4, 0.0), &field, 10).unwrap();
    let b = evolve_with_field(&InitialStateSpec::new(-FRAC_PI_4, 0.0), &field, 10).unwrap();
    let m = measure_trajectory(&a, Some(&b)).unwrap();
    let d: Vec<f64> = m.trace_distance.unwrap().values;
    assert!((d[0] - 1.0).abs() < 1e-15);
    assert!(d[1..].iter().all(|&x| x.abs() < 1e-15));
    assert_eq!(m.blp.unwrap(), 0.0);
}
