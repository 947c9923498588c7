use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from, stream};

/// Current standard deviation recorded for every k-mer of a generated model.
pub const DEFAULT_PORE_STD: f32 = 2.0;

/// Mean current level and spread for every base k-mer.
///
/// Tables are indexed by the k-mer's 2-bit code, first base most significant
/// (A=0, C=1, G=2, T=3).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoreModel {
    pub kmer_length: usize,
    pub means: Vec<f32>,
    pub stds: Vec<f32>,
}

impl PoreModel {
    pub fn n_kmers(&self) -> usize {
        1 << (2 * self.kmer_length)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_kmers();
        if !(1..=8).contains(&self.kmer_length) || self.means.len() != n || self.stds.len() != n {
            return Err(Error::format(
                "pore model",
                format!("expected {n} entries per table"),
            ));
        }
        if self.stds.iter().any(|&s| s.is_nan() || s <= 0.0) {
            return Err(Error::format(
                "pore model",
                "standard deviations must be positive",
            ));
        }
        Ok(())
    }

    /// Index of the k-mer starting at `seq[0]`; `seq` must be ACGT.
    pub fn kmer_index(&self, seq: &[u8]) -> usize {
        seq[..self.kmer_length].iter().fold(0usize, |acc, &b| {
            let code = match b {
                b'A' | b'a' => 0,
                b'C' | b'c' => 1,
                b'G' | b'g' => 2,
                _ => 3,
            };
            (acc << 2) | code
        })
    }

    /// Mean levels of every k-mer window of `seq`.
    pub fn levels(&self, seq: &[u8]) -> Vec<f64> {
        if seq.len() < self.kmer_length {
            return Vec::new();
        }
        seq.windows(self.kmer_length)
            .map(|w| f64::from(self.means[self.kmer_index(w)]))
            .collect()
    }
}

/// Synthetic pore model: means uniform in [60, 120] pA.
pub fn generate_pore_model(kmer_length: usize, seed: u64) -> Result<PoreModel> {
    if !(1..=8).contains(&kmer_length) {
        return Err(Error::InvalidParameter(format!(
            "k-mer length must be 1..=8, got {kmer_length}"
        )));
    }
    let n = 1usize << (2 * kmer_length);
    let mut rng = rng_from(derive_seed(seed, &[stream::PORE]));
    let means = (0..n).map(|_| rng.random_range(60.0f32..=120.0)).collect();
    Ok(PoreModel {
        kmer_length,
        means,
        stds: vec![DEFAULT_PORE_STD; n],
    })
}
