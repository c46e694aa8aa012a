use freqpix::connectivity::{
    build_pair_dataset, estimate_connectivity, generate_synthetic, probe_features, Cell,
    ExperimentConfig, FeatureSet, LabeledSample, PairDataset, PairKind, PairSpec, ProbeConfig,
    SynthSpec,
};
use freqpix::{derive_stream, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

// Phi(-1), from the series of erfc at 1/sqrt(2), kept independent of the probe.
fn bayes_error_unit_gap() -> f64 {
    let x = 1.0 / std::f64::consts::SQRT_2;
    // erf by its Maclaurin series; converges quickly at this argument
    let mut term = x;
    let mut sum = x;
    for n in 1..40 {
        term *= -x * x / n as f64;
        sum += term / (2 * n + 1) as f64;
    }
    let erf = 2.0 / std::f64::consts::PI.sqrt() * sum;
    0.5 * (1.0 - erf)
}

fn gaussian_pair(mu0: f64, mu1: f64, per_group: usize, seed: u64) -> PairDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d0 = Normal::new(mu0, 1.0).unwrap();
    let d1 = Normal::new(mu1, 1.0).unwrap();
    let n_test = per_group / 5;
    let mut data = PairDataset::default();
    for i in 0..per_group {
        let set = if i < n_test { &mut data.test } else { &mut data.train };
        set.push(vec![d0.sample(&mut rng)], 0);
        set.push(vec![d1.sample(&mut rng)], 1);
    }
    data
}

fn mean_error(mu1: f64, seeds: u64) -> f64 {
    let probe = ProbeConfig::default();
    (0..seeds)
        .map(|s| {
            let data = gaussian_pair(0.0, mu1, 200, s);
            estimate_connectivity(&data, &probe, &mut derive_stream(s, 1)).unwrap()
        })
        .sum::<f64>()
        / seeds as f64
}

#[test]
fn oracle_matches_known_value() {
    assert!((bayes_error_unit_gap() - 0.158_655_253_931_457).abs() < 1e-12);
}

#[test]
fn gaussian_error_approaches_bayes() {
    let e = mean_error(2.0, 20);
    assert!((e - bayes_error_unit_gap()).abs() <= 0.05, "mean error {e}");
}

#[test]
fn identical_distributions_are_at_chance() {
    let e = mean_error(0.0, 20);
    assert!((e - 0.5).abs() <= 0.07, "mean error {e}");
}

#[test]
fn huge_margin_is_nearly_perfect() {
    let e = mean_error(50.0, 5);
    assert!(e <= 0.02, "mean error {e}");
}

#[test]
fn swapping_groups_gives_the_same_estimate() {
    let spec = SynthSpec { samples_per_cell: 30, ..SynthSpec::default() };
    let samples = generate_synthetic(&spec).unwrap();
    let features: Vec<Vec<f64>> = samples.iter().map(|s| probe_features(&s.tensor, 16)).collect();
    let a = Cell::new("c0", "d0");
    let b = Cell::new("c1", "d1");
    let probe = ProbeConfig::default();
    let mean = |g0: &Cell, g1: &Cell| {
        let spec = PairSpec::new(g0.clone(), g1.clone());
        (0..20)
            .map(|s| {
                let split = build_pair_dataset(&samples, &spec, s).unwrap();
                estimate_connectivity(&split.features(&features), &probe, &mut derive_stream(s, 9)).unwrap()
            })
            .sum::<f64>()
            / 20.0
    };
    let (fwd, back) = (mean(&a, &b), mean(&b, &a));
    assert!((fwd - back).abs() <= 0.02, "{fwd} vs {back}");
}

fn kind_error(samples: &[LabeledSample], kind: PairKind, seeds: u64) -> f64 {
    let features: Vec<Vec<f64>> = samples.iter().map(|s| probe_features(&s.tensor, 16)).collect();
    let (g0, g1) = match kind {
        PairKind::Alpha => (Cell::new("c0", "d0"), Cell::new("c0", "d1")),
        PairKind::Beta => (Cell::new("c0", "d0"), Cell::new("c1", "d0")),
        PairKind::Gamma => (Cell::new("c0", "d0"), Cell::new("c1", "d1")),
        PairKind::Rho => (Cell::new("c0", "d0"), Cell::new("c0", "d0")),
    };
    let spec = PairSpec::new(g0, g1);
    (0..seeds)
        .map(|s| {
            let split = build_pair_dataset(samples, &spec, s).unwrap();
            estimate_connectivity(&split.features(&features), &ProbeConfig::default(), &mut derive_stream(s, 1))
                .unwrap()
        })
        .sum::<f64>()
        / seeds as f64
}

#[test]
fn without_domain_cues_domains_are_inseparable() {
    let spec = SynthSpec { spu_separation: 0.0, robust_separation: 0.0, ..SynthSpec::default() };
    let e = kind_error(&generate_synthetic(&spec).unwrap(), PairKind::Alpha, 5);
    assert!((e - 0.5).abs() <= 0.1, "alpha {e}");
}

#[test]
fn strong_class_cue_separates_classes() {
    let spec = SynthSpec { obj_separation: 0.3, ..SynthSpec::default() };
    let samples = generate_synthetic(&spec).unwrap();
    for kind in [PairKind::Beta, PairKind::Gamma] {
        let e = kind_error(&samples, kind, 3);
        assert!(e <= 0.05, "{kind:?} {e}");
    }
}

#[test]
fn class_block_alone_carries_no_domain_signal() {
    let spec = SynthSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut set = FeatureSet::default();
    let mut test = FeatureSet::default();
    for i in 0..200 {
        let (class, domain) = (i % 2, (i / 2) % 2);
        let blocks = spec.render_blocks(class, domain, &mut rng);
        let obj = Tensor::from_planes(std::slice::from_ref(&blocks.obj)).unwrap();
        let mut row = probe_features(&obj, 16);
        // the class block is deterministic; add noise so the probe has variance to fit
        for (v, n) in row.iter_mut().zip(blocks.noise.data()) {
            *v += n;
        }
        let target = if i < 160 { &mut set } else { &mut test };
        target.push(row, domain as u8);
    }
    let data = PairDataset { train: set, test };
    let e = estimate_connectivity(&data, &ProbeConfig::default(), &mut derive_stream(11, 0)).unwrap();
    assert!((e - 0.5).abs() <= 0.15, "domain error on class block {e}");
}

#[test]
fn experiment_reports_all_kinds() {
    let spec = SynthSpec { samples_per_cell: 20, ..SynthSpec::default() };
    let samples = generate_synthetic(&spec).unwrap();
    let report = freqpix::connectivity::run_connectivity_experiment(&samples, &ExperimentConfig::default()).unwrap();
    assert_eq!(report.pairs.rho, 4);
    assert_eq!(report.pairs.alpha, 2);
    assert_eq!(report.pairs.beta, 2);
    assert_eq!(report.pairs.gamma, 2);
    for v in [report.rho, report.alpha, report.beta, report.gamma] {
        assert!((0.0..=1.0).contains(&v));
    }
}
