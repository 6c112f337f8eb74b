use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEC_FORMAT_VERSION: u32 = 1;

/// Embedding parameters shared by every block of a watermark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WatermarkParams {
    pub block_size: usize,
    /// Amplitude step per unit of watermark, in coordinate degrees.
    pub strength: f64,
    pub nonzero_count: usize,
}

impl Default for WatermarkParams {
    fn default() -> Self {
        WatermarkParams {
            block_size: 16,
            strength: 0.0003,
            nonzero_count: 10,
        }
    }
}

impl WatermarkParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_size < 2 {
            return Err(Error::domain(format!(
                "block size must be at least 2, got {}",
                self.block_size
            )));
        }
        if self.nonzero_count == 0 || self.nonzero_count > self.block_size {
            return Err(Error::domain(format!(
                "nonzero count must be in 1..={}, got {}",
                self.block_size, self.nonzero_count
            )));
        }
        if !self.strength.is_finite() || self.strength < 0.0 {
            return Err(Error::domain(format!(
                "strength must be finite and non-negative, got {}",
                self.strength
            )));
        }
        Ok(())
    }

    /// Analytic bound on how far embedding can move any single point, in degrees.
    pub fn max_displacement_deg(&self) -> f64 {
        self.strength * self.nonzero_count as f64 / self.block_size as f64
    }
}

/// The secret needed to verify a watermarked trajectory: one ternary vector per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatermarkSpec {
    pub version: u32,
    pub block_size: usize,
    pub strength: f64,
    pub nonzero_count: usize,
    pub seed: u64,
    pub per_block: Vec<Vec<i8>>,
}

/// Draws `n_blocks` independent ternary vectors.
///
/// In each block `nonzero_count` positions are chosen uniformly without
/// replacement and each gets +1 or -1 with equal probability.
pub fn generate_watermark(
    n_blocks: usize,
    params: &WatermarkParams,
    seed: u64,
) -> Result<WatermarkSpec> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_block = (0..n_blocks)
        .map(|_| {
            let mut w = vec![0i8; params.block_size];
            for idx in sample(&mut rng, params.block_size, params.nonzero_count) {
                w[idx] = if rng.random_bool(0.5) { 1 } else { -1 };
            }
            w
        })
        .collect();
    Ok(WatermarkSpec {
        version: SPEC_FORMAT_VERSION,
        block_size: params.block_size,
        strength: params.strength,
        nonzero_count: params.nonzero_count,
        seed,
        per_block,
    })
}

impl WatermarkSpec {
    pub fn params(&self) -> WatermarkParams {
        WatermarkParams {
            block_size: self.block_size,
            strength: self.strength,
            nonzero_count: self.nonzero_count,
        }
    }

    pub fn block_count(&self) -> usize {
        self.per_block.len()
    }

    /// Same vectors, different strength.
    pub fn with_strength(&self, strength: f64) -> Self {
        WatermarkSpec {
            strength,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SPEC_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported watermark spec version {}",
                self.version
            )));
        }
        self.params().validate()?;
        for (i, w) in self.per_block.iter().enumerate() {
            if w.len() != self.block_size {
                return Err(Error::domain(format!(
                    "block {i}: vector has length {}, expected {}",
                    w.len(),
                    self.block_size
                )));
            }
            if w.iter().any(|v| !(-1..=1).contains(v)) {
                return Err(Error::domain(format!("block {i}: entries must be -1, 0 or 1")));
            }
            let nnz = w.iter().filter(|&&v| v != 0).count();
            if nnz != self.nonzero_count {
                return Err(Error::domain(format!(
                    "block {i}: {nnz} nonzero entries, expected {}",
                    self.nonzero_count
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: WatermarkSpec =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
