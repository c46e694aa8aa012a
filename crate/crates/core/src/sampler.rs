//! Target selection and per-sample random streams.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One manifest line: a file with its class `label` and `domain`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub path: PathBuf,
    pub label: String,
    pub domain: String,
}

/// How mixing targets are drawn from the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingStrategy {
    /// Uniform over pool records from a domain other than the source's.
    #[default]
    CrossDomainTrain,
    /// Uniform over the whole pool; the source itself may come back.
    UnlabeledPool,
}

impl fmt::Display for PairingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairingStrategy::CrossDomainTrain => "cross-domain-train",
            PairingStrategy::UnlabeledPool => "unlabeled-pool",
        })
    }
}

impl FromStr for PairingStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cross-domain-train" | "cross-domain" => Ok(PairingStrategy::CrossDomainTrain),
            "unlabeled-pool" | "unlabeled" => Ok(PairingStrategy::UnlabeledPool),
            other => Err(format!(
                "unknown pairing `{other}` (expected cross-domain-train or unlabeled-pool)"
            )),
        }
    }
}

/// Picks the mixing target for `source`.
///
/// Under [`PairingStrategy::CrossDomainTrain`] a pool without any record from
/// another domain is an error, never a silent self-mix.
pub fn select_target<'a, R: Rng + ?Sized>(
    source: &SampleRecord,
    pool: &'a [SampleRecord],
    strategy: PairingStrategy,
    rng: &mut R,
) -> Result<&'a SampleRecord> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    match strategy {
        PairingStrategy::UnlabeledPool => Ok(&pool[rng.random_range(0..pool.len())]),
        PairingStrategy::CrossDomainTrain => {
            let eligible: Vec<&SampleRecord> =
                pool.iter().filter(|r| r.domain != source.domain).collect();
            if eligible.is_empty() {
                return Err(Error::NoCrossDomainCandidate {
                    source_id: source.id.clone(),
                    domain: source.domain.clone(),
                });
            }
            Ok(eligible[rng.random_range(0..eligible.len())])
        }
    }
}

/// Random stream handed to one sample's work.
pub type SampleRng = ChaCha8Rng;

/// Stream for `(master_seed, sample_index)`.
///
/// The ChaCha key is the master seed (little-endian, zero padded) and the
/// sample index selects the ChaCha stream, so every index gets its own
/// counter space. Output depends only on the two integers.
pub fn derive_stream(master_seed: u64, sample_index: u64) -> SampleRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample_index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, domain: &str) -> SampleRecord {
        SampleRecord {
            id: id.into(),
            path: PathBuf::from(format!("{id}.png")),
            label: "0".into(),
            domain: domain.into(),
        }
    }

    #[test]
    fn forced_choice() {
        let pool = vec![rec("t", "B")];
        let mut rng = derive_stream(1, 0);
        for _ in 0..10 {
            let t = select_target(&rec("s", "A"), &pool, PairingStrategy::CrossDomainTrain, &mut rng).unwrap();
            assert_eq!(t.id, "t");
        }
    }

    #[test]
    fn same_domain_pool_is_an_error() {
        let pool = vec![rec("a", "A"), rec("b", "A")];
        let mut rng = derive_stream(1, 0);
        let err = select_target(&rec("s", "A"), &pool, PairingStrategy::CrossDomainTrain, &mut rng);
        assert!(matches!(err, Err(Error::NoCrossDomainCandidate { .. })));
        // the unlabeled pool has no domain constraint
        assert!(select_target(&rec("s", "A"), &pool, PairingStrategy::UnlabeledPool, &mut rng).is_ok());
        assert!(matches!(
            select_target(&rec("s", "A"), &[], PairingStrategy::UnlabeledPool, &mut rng),
            Err(Error::EmptyPool)
        ));
    }

    #[test]
    fn uniform_over_eligible_records() {
        // 3 of 5 eligible; each count must be within 3 sigma of n/3.
        let pool = vec![rec("a", "A"), rec("b", "B"), rec("c", "A"), rec("d", "C"), rec("e", "B")];
        let source = rec("s", "A");
        let mut rng = derive_stream(42, 0);
        let n = 10_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            let t = select_target(&source, &pool, PairingStrategy::CrossDomainTrain, &mut rng).unwrap();
            assert_ne!(t.domain, "A");
            *counts.entry(t.id.clone()).or_insert(0usize) += 1;
        }
        let p = 1.0 / 3.0;
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert_eq!(counts.len(), 3);
        for (id, c) in counts {
            assert!((c as f64 - mean).abs() <= 3.0 * sigma, "{id}: {c}");
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, idx| {
            let mut r = derive_stream(seed, idx);
            (0..100).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9, 3), draw(9, 3));
        assert_ne!(draw(9, 0), draw(9, 1));
        assert_ne!(draw(9, 0), draw(10, 0));
    }

    #[test]
    fn stream_is_pinned() {
        // Frozen first outputs; a change here breaks replay of old audit files.
        assert_eq!(derive_stream(0, 0).random::<u64>(), 15_438_444_565_445_410_878);
        assert_eq!(derive_stream(42, 7).random::<u64>(), 3_425_180_178_688_264_041);
        assert_ne!(derive_stream(0, 1).random::<u64>(), 15_438_444_565_445_410_878);
    }

    #[test]
    fn first_draws_pass_chi_square() {
        // 1000 streams, 10 equal bins; chi-square critical value for 9 dof at alpha = 0.01.
        const CRITICAL: f64 = 21.665_994;
        let mut bins = [0usize; 10];
        for i in 0..1000 {
            let u: f64 = derive_stream(2024, i).random();
            bins[(u * 10.0) as usize] += 1;
        }
        let expected = 100.0;
        let chi2: f64 = bins.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < CRITICAL, "chi2 = {chi2}, bins = {bins:?}");
    }

    #[test]
    fn pairing_parses() {
        assert_eq!("unlabeled-pool".parse::<PairingStrategy>().unwrap(), PairingStrategy::UnlabeledPool);
        assert!("nope".parse::<PairingStrategy>().is_err());
    }
}
