//! Growth sequences `m_j`, `n_j` and column heights `h_k`.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CAP_DEPTH: usize = 64;
pub const DEFAULT_TRUNCATION_K: usize = 30;

/// Minimum number of table entries kept for an unbounded sequence; enough for
/// every word-cap and grid level we use.
const MIN_TABLE: usize = 66;

/// The JSON form: `{"m": [3,3,3], "repeat_last": true, "cap_depth": 64, "truncation_k": 30}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub m: Vec<u64>,
    #[serde(default = "default_true")]
    pub repeat_last: bool,
    #[serde(default = "default_cap")]
    pub cap_depth: usize,
    #[serde(default = "default_k")]
    pub truncation_k: usize,
}

fn default_true() -> bool {
    true
}
fn default_cap() -> usize {
    DEFAULT_CAP_DEPTH
}
fn default_k() -> usize {
    DEFAULT_TRUNCATION_K
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            m: vec![3],
            repeat_last: true,
            cap_depth: DEFAULT_CAP_DEPTH,
            truncation_k: DEFAULT_TRUNCATION_K,
        }
    }
}

/// Validated growth data with precomputed `n_j` and `h_k`.
///
/// `n_0 = 1`, `n_{j+1} = m_j n_j` and `h_k = n_k - Σ_{j<k} n_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthSpec {
    config: GrowthConfig,
    n: Vec<BigUint>,
    h: Vec<BigUint>,
}

impl Default for GrowthSpec {
    fn default() -> Self {
        GrowthSpec::new(GrowthConfig::default()).expect("default growth config is valid")
    }
}

impl GrowthSpec {
    pub fn new(config: GrowthConfig) -> Result<Self> {
        if config.m.is_empty() {
            return Err(Error::InvalidGrowth("m must not be empty".into()));
        }
        if let Some((j, &mj)) = config.m.iter().enumerate().find(|(_, &mj)| mj < 3) {
            return Err(Error::InvalidGrowth(format!("m[{j}] = {mj} is below 3")));
        }
        if config.cap_depth < 2 {
            return Err(Error::InvalidGrowth("cap_depth must be at least 2".into()));
        }
        if config.truncation_k >= config.cap_depth {
            return Err(Error::InvalidGrowth(format!(
                "truncation_k = {} must be below cap_depth = {}",
                config.truncation_k, config.cap_depth
            )));
        }

        let entries = if config.repeat_last {
            MIN_TABLE.max(config.cap_depth + 2).max(config.truncation_k + 2)
        } else {
            config.m.len() + 1
        };
        let mut n = Vec::with_capacity(entries);
        let mut h = Vec::with_capacity(entries);
        let mut prefix_sum = BigUint::from(0u32);
        let mut nk = BigUint::one();
        for k in 0..entries {
            h.push(&nk - &prefix_sum);
            prefix_sum += &nk;
            n.push(nk.clone());
            if k + 1 < entries {
                let mk = config.m.get(k).or(config.m.last()).copied().unwrap_or(3);
                nk *= mk;
            }
        }
        Ok(GrowthSpec { config, n, h })
    }

    /// The repeating `m ≡ 3` sequence with default caps.
    pub fn constant(m: u64) -> Result<Self> {
        GrowthSpec::new(GrowthConfig { m: vec![m], ..GrowthConfig::default() })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let config: GrowthConfig = serde_json::from_str(json)
            .map_err(|e| Error::InvalidGrowth(format!("bad growth JSON: {e}")))?;
        GrowthSpec::new(config)
    }

    pub fn config(&self) -> &GrowthConfig {
        &self.config
    }

    pub fn cap_depth(&self) -> usize {
        self.config.cap_depth
    }

    pub fn truncation_k(&self) -> usize {
        self.config.truncation_k
    }

    /// A copy with different caps, revalidated.
    pub fn with_caps(&self, cap_depth: usize, truncation_k: usize) -> Result<Self> {
        GrowthSpec::new(GrowthConfig { cap_depth, truncation_k, ..self.config.clone() })
    }

    pub fn m(&self, j: usize) -> Result<u64> {
        match self.config.m.get(j) {
            Some(&mj) => Ok(mj),
            None if self.config.repeat_last => Ok(*self.config.m.last().expect("non-empty")),
            None => Err(Error::GrowthExhausted(j)),
        }
    }

    pub fn n(&self, j: usize) -> Result<&BigUint> {
        self.n.get(j).ok_or(Error::GrowthExhausted(j))
    }

    pub fn h(&self, k: usize) -> Result<&BigUint> {
        self.h.get(k).ok_or(Error::GrowthExhausted(k))
    }

    /// Number of tabulated `n_j` / `h_k` entries.
    pub fn table_len(&self) -> usize {
        self.n.len()
    }

    /// Smallest height over all words starting with `bits`.
    ///
    /// If the prefix contains a 0 the column index is fixed; an all-ones prefix
    /// of length `L` admits every column `k ≥ L`, and heights increase in `k`.
    pub fn min_height_for_prefix(&self, bits: &[bool]) -> Result<&BigUint> {
        let k = bits.iter().position(|b| !b).unwrap_or(bits.len());
        self.h(k)
    }
}
