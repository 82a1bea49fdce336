//! Run configuration: an optional JSON file merged under command-line flags,
//! and the hash that stamps every document this tool emits.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// On-disk configuration. Every field is optional; unknown keys are
/// rejected so a typo cannot silently fall back to a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format: Option<OutputFormat>,
    pub threads: Option<usize>,
    pub timings: Option<bool>,
    pub seed: Option<u64>,
    pub primes: Option<Vec<u64>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// Flag-over-file merge result. `primes: None` means the subcommand picks
/// its own default list.
#[derive(Debug, Clone)]
pub struct Settings {
    pub format: OutputFormat,
    pub timings: bool,
    pub seed: u64,
    pub primes: Option<Vec<u64>>,
    pub config_hash: String,
}

/// The hashed view deliberately excludes the output path and the thread
/// count: neither changes what is computed, only where and how fast.
#[derive(Serialize)]
struct HashedView<'a> {
    format: OutputFormat,
    timings: bool,
    seed: u64,
    primes: &'a Option<Vec<u64>>,
}

pub const DEFAULT_SEED: u64 = 0x00e5_7e59;

impl Settings {
    pub fn merge(
        file: &RunConfig,
        format: Option<OutputFormat>,
        timings: bool,
        seed: Option<u64>,
        primes: Option<Vec<u64>>,
    ) -> Self {
        let format = format.or(file.format).unwrap_or(OutputFormat::Csv);
        let timings = timings || file.timings.unwrap_or(false);
        let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
        let primes = primes.or_else(|| file.primes.clone());
        let view = HashedView { format, timings, seed, primes: &primes };
        let bytes = serde_json::to_vec(&view).expect("hash view serializes");
        let digest = Sha256::digest(&bytes);
        let mut hash = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hash.push_str(&format!("{byte:02x}"));
        }
        Settings { format, timings, seed, primes, config_hash: hash }
    }

    pub fn primes_or(&self, default: &[u64]) -> Vec<u64> {
        match &self.primes {
            Some(list) => list.clone(),
            None => default.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_take_precedence_over_the_file() {
        let file = RunConfig {
            format: Some(OutputFormat::Json),
            threads: Some(2),
            timings: Some(false),
            seed: Some(7),
            primes: Some(vec![11]),
        };
        let s = Settings::merge(&file, Some(OutputFormat::Csv), true, None, None);
        assert_eq!(s.format, OutputFormat::Csv);
        assert!(s.timings);
        assert_eq!(s.seed, 7);
        assert_eq!(s.primes.as_deref(), Some(&[11u64][..]));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let base = Settings::merge(&RunConfig::default(), None, false, None, None);
        let again = Settings::merge(&RunConfig::default(), None, false, None, None);
        assert_eq!(base.config_hash, again.config_hash);
        assert_eq!(base.config_hash.len(), 16);

        let seeded = Settings::merge(&RunConfig::default(), None, false, Some(1), None);
        assert_ne!(base.config_hash, seeded.config_hash);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>("{\"primos\": [3]}");
        assert!(err.is_err());
    }
}
