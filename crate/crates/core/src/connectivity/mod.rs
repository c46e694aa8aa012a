//! Cross-domain connectivity measurements.
//!
//! The connectivity of two `(class, domain)` cells is the test error of a
//! probe trained to tell them apart: higher error means the cells are more
//! connected. Pairs fall into four kinds by which coordinates agree:
//!
//! | kind    | class     | domain    |
//! |---------|-----------|-----------|
//! | `rho`   | same      | same      |
//! | `alpha` | same      | different |
//! | `beta`  | different | same      |
//! | `gamma` | different | different |
//!
//! A `rho` pair needs two disjoint groups from one cell, so the cell is split
//! in half at random. The ratios `alpha / gamma` and `beta / gamma` summarize
//! how well same-class samples connect across domains relative to pairs that
//! share nothing.

mod probe;
mod synth;

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use probe::{probe_features, FeatureSet, LinearProbe, ProbeConfig};
pub use synth::{class_name, domain_name, generate_synthetic, SynthBlocks, SynthSpec};

use crate::error::{Error, Result};
use crate::mixing::Mixer;
use crate::pipeline::augment_one;
use crate::sampler::{derive_stream, PairingStrategy, SampleRecord, SampleRng};
use crate::tensor::Tensor;

/// An in-memory sample with its class and domain.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub tensor: Tensor,
    pub label: String,
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub class: String,
    pub domain: String,
}

impl Cell {
    pub fn new(class: impl Into<String>, domain: impl Into<String>) -> Self {
        Cell {
            class: class.into(),
            domain: domain.into(),
        }
    }

    fn matches(&self, s: &LabeledSample) -> bool {
        s.label == self.class && s.domain == self.domain
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.class, self.domain)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Rho,
    Alpha,
    Beta,
    Gamma,
}

impl PairKind {
    pub const ALL: [PairKind; 4] = [PairKind::Rho, PairKind::Alpha, PairKind::Beta, PairKind::Gamma];

    pub fn of(group0: &Cell, group1: &Cell) -> PairKind {
        match (group0.class == group1.class, group0.domain == group1.domain) {
            (true, true) => PairKind::Rho,
            (true, false) => PairKind::Alpha,
            (false, true) => PairKind::Beta,
            (false, false) => PairKind::Gamma,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub group0: Cell,
    pub group1: Cell,
    pub kind: PairKind,
}

impl PairSpec {
    pub fn new(group0: Cell, group1: Cell) -> Self {
        let kind = PairKind::of(&group0, &group1);
        PairSpec { group0, group1, kind }
    }

    /// Fails unless `kind` matches the equality pattern of the two cells.
    pub fn with_kind(group0: Cell, group1: Cell, kind: PairKind) -> Result<Self> {
        if PairKind::of(&group0, &group1) != kind {
            return Err(Error::PairKind { kind });
        }
        Ok(PairSpec { group0, group1, kind })
    }
}

/// Indices into the sample list with their binary labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairSplit {
    pub train: Vec<(usize, u8)>,
    pub test: Vec<(usize, u8)>,
}

#[derive(Debug, Clone, Default)]
pub struct PairDataset {
    pub train: FeatureSet,
    pub test: FeatureSet,
}

impl PairSplit {
    /// Gathers rows from per-sample feature vectors.
    pub fn features(&self, features: &[Vec<f64>]) -> PairDataset {
        let gather = |part: &[(usize, u8)]| {
            let mut set = FeatureSet::default();
            for &(i, label) in part {
                set.push(features[i].clone(), label);
            }
            set
        };
        PairDataset {
            train: gather(&self.train),
            test: gather(&self.test),
        }
    }
}

/// Test share of each group: `round(n / 5)`, at least one when `n >= 2`.
fn test_count(n: usize) -> usize {
    let t = (n as f64 * 0.2).round() as usize;
    if n >= 2 {
        t.max(1)
    } else {
        t
    }
}

/// Labels `group0` as 0 and `group1` as 1, drops every other sample, and
/// splits each group 80/20 at random.
pub fn build_pair_dataset_with<R: Rng + ?Sized>(
    samples: &[LabeledSample],
    spec: &PairSpec,
    rng: &mut R,
) -> Result<PairSplit> {
    let members = |cell: &Cell| -> Result<Vec<usize>> {
        let idx: Vec<usize> = (0..samples.len()).filter(|&i| cell.matches(&samples[i])).collect();
        if idx.is_empty() {
            return Err(Error::EmptyGroup {
                class: cell.class.clone(),
                domain: cell.domain.clone(),
            });
        }
        Ok(idx)
    };

    let (mut g0, mut g1) = if spec.kind == PairKind::Rho {
        let mut cell = members(&spec.group0)?;
        if cell.len() < 2 {
            return Err(Error::EmptyGroup {
                class: spec.group0.class.clone(),
                domain: spec.group0.domain.clone(),
            });
        }
        cell.shuffle(rng);
        let second = cell.split_off(cell.len() / 2);
        (cell, second)
    } else {
        (members(&spec.group0)?, members(&spec.group1)?)
    };

    let mut split = PairSplit::default();
    for (group, label) in [(&mut g0, 0u8), (&mut g1, 1u8)] {
        group.shuffle(rng);
        let n_test = test_count(group.len());
        split.test.extend(group[..n_test].iter().map(|&i| (i, label)));
        split.train.extend(group[n_test..].iter().map(|&i| (i, label)));
    }
    Ok(split)
}

/// [`build_pair_dataset_with`] on the stream derived from `seed`.
pub fn build_pair_dataset(samples: &[LabeledSample], spec: &PairSpec, seed: u64) -> Result<PairSplit> {
    build_pair_dataset_with(samples, spec, &mut derive_stream(seed, 0))
}

/// Trains the probe on `data.train` and returns its error rate on `data.test`.
pub fn estimate_connectivity<R: Rng + ?Sized>(
    data: &PairDataset,
    probe: &ProbeConfig,
    rng: &mut R,
) -> Result<f64> {
    if data.test.is_empty() {
        return Err(Error::EmptySplit("test"));
    }
    let model = LinearProbe::fit(&data.train, probe, rng)?;
    Ok(model.error_rate(&data.test))
}

/// A quotient that may be undefined (zero denominator). Serializes as a
/// number rounded to 3 significant figures, or the string `"undefined"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio(pub Option<f64>);

impl Ratio {
    pub fn new(num: f64, den: f64) -> Self {
        if den > 0.0 && num.is_finite() && den.is_finite() {
            Ratio(Some(num / den))
        } else {
            Ratio(None)
        }
    }

    pub fn value(self) -> Option<f64> {
        self.0
    }

    pub fn rounded(self) -> Option<f64> {
        self.0.map(|v| round_sig(v, 3))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => f.write_str(&format_sig(v, 3)),
            None => f.write_str("undefined"),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.rounded() {
            Some(v) => s.serialize_f64(v),
            None => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ratio(Some(v))),
            Raw::Text(t) if t == "undefined" => Ok(Ratio(None)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad ratio `{t}`"))),
        }
    }
}

/// Rounds to `digits` significant figures.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}

/// Formats with `digits` significant figures, keeping trailing zeros (`40.0`).
pub fn format_sig(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let r = round_sig(x, digits);
    let magnitude = r.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{r:.decimals$}")
}

/// `(alpha / gamma, beta / gamma)`; both undefined when `gamma` is 0.
pub fn connectivity_ratios(alpha: f64, beta: f64, gamma: f64) -> (Ratio, Ratio) {
    (Ratio::new(alpha, gamma), Ratio::new(beta, gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairCounts {
    pub rho: usize,
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
}

impl PairCounts {
    fn bump(&mut self, kind: PairKind) {
        match kind {
            PairKind::Rho => self.rho += 1,
            PairKind::Alpha => self.alpha += 1,
            PairKind::Beta => self.beta += 1,
            PairKind::Gamma => self.gamma += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha_over_gamma: Ratio,
    pub beta_over_gamma: Ratio,
    pub pairs: PairCounts,
    pub seed: u64,
    pub probe: String,
}

impl ConnectivityReport {
    fn from_means(means: [f64; 4], pairs: PairCounts, seed: u64, probe: String) -> Self {
        let [rho, alpha, beta, gamma] = means;
        let (alpha_over_gamma, beta_over_gamma) = connectivity_ratios(alpha, beta, gamma);
        ConnectivityReport {
            rho,
            alpha,
            beta,
            gamma,
            alpha_over_gamma,
            beta_over_gamma,
            pairs,
            seed,
            probe,
        }
    }

    /// Mean of each estimate over several runs, ratios recomputed from the means.
    /// Seed and pair counts come from the first report.
    pub fn average(reports: &[ConnectivityReport]) -> Option<ConnectivityReport> {
        let first = reports.first()?;
        let n = reports.len() as f64;
        let mean = |f: fn(&ConnectivityReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Some(ConnectivityReport::from_means(
            [mean(|r| r.rho), mean(|r| r.alpha), mean(|r| r.beta), mean(|r| r.gamma)],
            first.pairs,
            first.seed,
            first.probe.clone(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    /// Cap on pairs per kind; `None` enumerates all of them.
    pub pairs_per_kind: Option<usize>,
    pub probe: ProbeConfig,
    pub seed: u64,
}

// Stream namespaces under one master seed.
const TAG_PAIR_SELECT: u64 = 1;
const TAG_SPLIT: u64 = 2;
const TAG_PROBE: u64 = 3;
const TAG_AUGMENT: u64 = 4;

fn stream(seed: u64, tag: u64, index: u64) -> SampleRng {
    derive_stream(seed, (tag << 48) | index)
}

/// Every pair of distinct cells plus one `rho` pair per cell, in sorted order.
pub fn enumerate_pairs(samples: &[LabeledSample]) -> Result<Vec<PairSpec>> {
    let classes: BTreeSet<&str> = samples.iter().map(|s| s.label.as_str()).collect();
    let domains: BTreeSet<&str> = samples.iter().map(|s| s.domain.as_str()).collect();
    if classes.len() < 2 || domains.len() < 2 {
        return Err(Error::Diversity {
            classes: classes.len(),
            domains: domains.len(),
        });
    }
    let cells: Vec<Cell> = samples
        .iter()
        .map(|s| Cell::new(s.label.clone(), s.domain.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut pairs: Vec<PairSpec> = cells
        .iter()
        .map(|c| PairSpec::new(c.clone(), c.clone()))
        .collect();
    for (i, a) in cells.iter().enumerate() {
        for b in &cells[i + 1..] {
            pairs.push(PairSpec::new(a.clone(), b.clone()));
        }
    }
    pairs.sort_by_key(|p| p.kind);
    Ok(pairs)
}

/// Enumerates pairs and, when capped, samples `pairs_per_kind` of each kind.
pub fn select_pairs(samples: &[LabeledSample], cfg: &ExperimentConfig) -> Result<Vec<PairSpec>> {
    let all = enumerate_pairs(samples)?;
    let mut out = Vec::new();
    for kind in PairKind::ALL {
        let of_kind: Vec<&PairSpec> = all.iter().filter(|p| p.kind == kind).collect();
        if of_kind.is_empty() {
            let classes = samples.iter().map(|s| &s.label).collect::<BTreeSet<_>>().len();
            let domains = samples.iter().map(|s| &s.domain).collect::<BTreeSet<_>>().len();
            return Err(Error::Diversity { classes, domains });
        }
        match cfg.pairs_per_kind {
            Some(k) if k < of_kind.len() => {
                let mut rng = stream(cfg.seed, TAG_PAIR_SELECT, kind.index() as u64);
                let mut picked: Vec<usize> = (0..of_kind.len())
                    .collect::<Vec<_>>()
                    .choose_multiple(&mut rng, k)
                    .copied()
                    .collect();
                picked.sort_unstable();
                out.extend(picked.into_iter().map(|i| of_kind[i].clone()));
            }
            _ => out.extend(of_kind.into_iter().cloned()),
        }
    }
    Ok(out)
}

fn features_of(samples: &[LabeledSample], max_side: usize) -> Vec<Vec<f64>> {
    samples
        .par_iter()
        .map(|s| probe_features(&s.tensor, max_side))
        .collect()
}

/// Error estimate per pair on a list of feature sets that share the same splits.
fn evaluate(
    splits: &[PairSplit],
    features: &[Vec<f64>],
    cfg: &ExperimentConfig,
) -> Result<Vec<f64>> {
    splits
        .par_iter()
        .enumerate()
        .map(|(i, split)| {
            let mut rng = stream(cfg.seed, TAG_PROBE, i as u64);
            estimate_connectivity(&split.features(features), &cfg.probe, &mut rng)
        })
        .collect()
}

fn splits_for(samples: &[LabeledSample], pairs: &[PairSpec], seed: u64) -> Result<Vec<PairSplit>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| build_pair_dataset_with(samples, p, &mut stream(seed, TAG_SPLIT, i as u64)))
        .collect()
}

fn assemble(pairs: &[PairSpec], errors: &[f64], cfg: &ExperimentConfig) -> ConnectivityReport {
    let mut sums = [0.0; 4];
    let mut counts = PairCounts::default();
    let mut n = [0usize; 4];
    for (p, e) in pairs.iter().zip(errors) {
        sums[p.kind.index()] += e;
        n[p.kind.index()] += 1;
        counts.bump(p.kind);
    }
    let means = std::array::from_fn(|k| if n[k] > 0 { sums[k] / n[k] as f64 } else { 0.0 });
    ConnectivityReport::from_means(means, counts, cfg.seed, cfg.probe.describe())
}

/// Runs every selected pair and averages the estimates per kind.
pub fn run_connectivity_experiment(
    samples: &[LabeledSample],
    cfg: &ExperimentConfig,
) -> Result<ConnectivityReport> {
    let pairs = select_pairs(samples, cfg)?;
    let splits = splits_for(samples, &pairs, cfg.seed)?;
    let errors = evaluate(&splits, &features_of(samples, cfg.probe.max_side), cfg)?;
    Ok(assemble(&pairs, &errors, cfg))
}

/// Replaces every sample by its augmentation. Targets come from the same
/// sample list under `pairing`; sample `i` uses its own derived stream.
pub fn augment_samples(
    samples: &[LabeledSample],
    mixer: &Mixer,
    pairing: PairingStrategy,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    let pool: Vec<SampleRecord> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| SampleRecord {
            id: i.to_string(),
            path: Default::default(),
            label: s.label.clone(),
            domain: s.domain.clone(),
        })
        .collect();
    samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = stream(seed, TAG_AUGMENT, i as u64);
            let (tensor, _) = augment_one(mixer, &pool[i], &s.tensor, &pool, pairing, &mut rng, |t| {
                let j: usize = t.id.parse().expect("pool ids are indices");
                Ok(samples[j].tensor.clone())
            })?;
            Ok(LabeledSample {
                tensor,
                label: s.label.clone(),
                domain: s.domain.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedReports {
    pub raw: ConnectivityReport,
    pub augmented: ConnectivityReport,
}

/// Raw and augmented connectivity on identical pairs, splits and probe streams.
pub fn run_paired_experiment(
    samples: &[LabeledSample],
    mixer: &Mixer,
    pairing: PairingStrategy,
    cfg: &ExperimentConfig,
) -> Result<PairedReports> {
    let pairs = select_pairs(samples, cfg)?;
    let splits = splits_for(samples, &pairs, cfg.seed)?;
    let raw = evaluate(&splits, &features_of(samples, cfg.probe.max_side), cfg)?;
    let augmented_samples = augment_samples(samples, mixer, pairing, cfg.seed)?;
    let aug = evaluate(&splits, &features_of(&augmented_samples, cfg.probe.max_side), cfg)?;
    Ok(PairedReports {
        raw: assemble(&pairs, &raw, cfg),
        augmented: assemble(&pairs, &aug, cfg),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::MixParams;

    fn sample(label: &str, domain: &str, v: f64) -> LabeledSample {
        LabeledSample {
            tensor: Tensor::filled(2, 2, 1, v).unwrap(),
            label: label.into(),
            domain: domain.into(),
        }
    }

    fn grid(classes: usize, domains: usize, per_cell: usize) -> Vec<LabeledSample> {
        let mut out = Vec::new();
        for c in 0..classes {
            for d in 0..domains {
                for k in 0..per_cell {
                    out.push(sample(&format!("c{c}"), &format!("d{d}"), (k % 10) as f64 / 10.0));
                }
            }
        }
        out
    }

    #[test]
    fn kinds_follow_equality_pattern() {
        let (a0, a1) = (Cell::new("0", "A"), Cell::new("0", "B"));
        let b1 = Cell::new("1", "B");
        assert_eq!(PairKind::of(&a0, &a0), PairKind::Rho);
        assert_eq!(PairKind::of(&a0, &a1), PairKind::Alpha);
        assert_eq!(PairKind::of(&a1, &b1), PairKind::Beta);
        assert_eq!(PairKind::of(&a0, &b1), PairKind::Gamma);
        assert!(PairSpec::with_kind(a0.clone(), a1.clone(), PairKind::Beta).is_err());
        assert!(PairSpec::with_kind(a0, a1, PairKind::Alpha).is_ok());
    }

    #[test]
    fn split_is_stratified_80_20() {
        let data = grid(2, 2, 50);
        let spec = PairSpec::new(Cell::new("c0", "d0"), Cell::new("c1", "d1"));
        let split = build_pair_dataset(&data, &spec, 3).unwrap();
        assert_eq!(split.train.len(), 80);
        assert_eq!(split.test.len(), 20);
        for part in [&split.train, &split.test] {
            let zeros = part.iter().filter(|(_, l)| *l == 0).count();
            assert_eq!(zeros * 2, part.len());
        }
        for &(i, l) in split.train.iter().chain(&split.test) {
            let cell = if l == 0 { &spec.group0 } else { &spec.group1 };
            assert!(cell.matches(&data[i]));
        }
        assert_eq!(split, build_pair_dataset(&data, &spec, 3).unwrap());
    }

    #[test]
    fn discard_rule_keeps_only_the_two_cells() {
        let data = grid(4, 2, 10);
        let spec = PairSpec::new(Cell::new("c0", "d0"), Cell::new("c0", "d1"));
        let split = build_pair_dataset(&data, &spec, 1).unwrap();
        assert_eq!(split.train.len() + split.test.len(), 20);
        assert!(split.train.iter().chain(&split.test).all(|&(i, _)| data[i].label == "c0"));
    }

    #[test]
    fn absent_cell_is_named() {
        let data = grid(2, 2, 5);
        let spec = PairSpec::new(Cell::new("c0", "d0"), Cell::new("c9", "d1"));
        match build_pair_dataset(&data, &spec, 1) {
            Err(Error::EmptyGroup { class, domain }) => assert_eq!((class.as_str(), domain.as_str()), ("c9", "d1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rho_halves_one_cell() {
        let data = grid(2, 2, 10);
        let spec = PairSpec::new(Cell::new("c1", "d0"), Cell::new("c1", "d0"));
        let split = build_pair_dataset(&data, &spec, 1).unwrap();
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).map(|p| p.0).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 10);
        let ones = split.train.iter().chain(&split.test).filter(|p| p.1 == 1).count();
        assert_eq!(ones, 5);
    }

    #[test]
    fn enumeration_counts_for_two_by_two() {
        let pairs = enumerate_pairs(&grid(2, 2, 4)).unwrap();
        let count = |k| pairs.iter().filter(|p| p.kind == k).count();
        assert_eq!(
            [count(PairKind::Rho), count(PairKind::Alpha), count(PairKind::Beta), count(PairKind::Gamma)],
            [4, 2, 2, 2]
        );
        assert!(matches!(enumerate_pairs(&grid(1, 3, 4)), Err(Error::Diversity { classes: 1, .. })));
    }

    #[test]
    fn capped_selection_is_seeded() {
        let data = grid(4, 3, 4);
        let cfg = ExperimentConfig { pairs_per_kind: Some(3), ..ExperimentConfig::default() };
        let a = select_pairs(&data, &cfg).unwrap();
        assert_eq!(a.len(), 12);
        assert_eq!(a, select_pairs(&data, &cfg).unwrap());
        let other = select_pairs(&data, &ExperimentConfig { seed: 99, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn ratio_examples() {
        let (ag, bg) = connectivity_ratios(0.212, 0.030, 0.051);
        assert_eq!(ag.to_string(), "4.16");
        assert_eq!(format!("{:.2}", bg.value().unwrap()), "0.59");
        let (ag, bg) = connectivity_ratios(0.120, 0.073, 0.003);
        assert_eq!(ag.to_string(), "40.0");
        assert_eq!(bg.to_string(), "24.3");
        assert_eq!(connectivity_ratios(0.3, 0.1, 0.3).0.value(), Some(1.0));
        let (ag, _) = connectivity_ratios(0.3, 0.1, 0.0);
        assert_eq!(ag.to_string(), "undefined");
        assert_eq!(serde_json::to_string(&ag).unwrap(), "\"undefined\"");
    }

    #[test]
    fn sig_fig_helpers() {
        assert_eq!(round_sig(4.156_862, 3), 4.16);
        assert_eq!(round_sig(0.000_123_45, 3), 0.000_123);
        assert_eq!(format_sig(40.0, 3), "40.0");
        assert_eq!(format_sig(0.588, 3), "0.588");
        assert_eq!(format_sig(1234.5, 3), "1230");
    }

    #[test]
    fn report_round_trips_through_json() {
        let data = generate_synthetic(&SynthSpec { samples_per_cell: 20, ..SynthSpec::default() }).unwrap();
        let report = run_connectivity_experiment(&data, &ExperimentConfig::default()).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["rho", "alpha", "beta", "gamma", "alpha_over_gamma", "beta_over_gamma", "pairs", "seed", "probe"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        for v in [report.rho, report.alpha, report.beta, report.gamma] {
            assert!((0.0..=1.0).contains(&v));
        }
        let again = run_connectivity_experiment(&data, &ExperimentConfig::default()).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn no_op_augmentation_matches_raw() {
        let data = generate_synthetic(&SynthSpec { samples_per_cell: 20, ..SynthSpec::default() }).unwrap();
        let mixer = Mixer::new(MixParams { prob: 0.0, ..MixParams::default() }).unwrap();
        let paired = run_paired_experiment(&data, &mixer, PairingStrategy::CrossDomainTrain, &ExperimentConfig::default()).unwrap();
        assert_eq!(paired.raw, paired.augmented);
    }

    #[test]
    fn average_recomputes_ratios() {
        let mk = |a, g| ConnectivityReport::from_means([0.5, a, 0.1, g], PairCounts::default(), 0, String::new());
        let avg = ConnectivityReport::average(&[mk(0.2, 0.1), mk(0.4, 0.0)]).unwrap();
        assert!((avg.alpha - 0.3).abs() < 1e-12);
        assert!((avg.alpha_over_gamma.value().unwrap() - 6.0).abs() < 1e-9);
        assert!(ConnectivityReport::average(&[]).is_none());
    }
}
