use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;

use super::PoreModel;

/// Raw current trace of one read.
#[derive(Clone, Debug, PartialEq)]
pub struct Squiggle {
    pub read_id: u64,
    pub samples: Vec<f32>,
    /// Start position of the k-mer behind each sample (simulation only).
    pub truth: Option<Vec<u32>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SquiggleParams {
    /// Mean samples per base; dwell is `1 + Geometric(1/mean)`.
    pub dwell_mean: f64,
    /// Gaussian measurement noise in pA.
    pub noise_std: f64,
}

impl Default for SquiggleParams {
    fn default() -> Self {
        Self {
            dwell_mean: 10.0,
            noise_std: 2.0,
        }
    }
}

/// Renders the current trace of `seq`: every k-mer window dwells for a
/// geometric number (≥ 1) of samples at its mean level plus Gaussian noise.
pub fn render_squiggle(
    seq: &[u8],
    pore: &PoreModel,
    params: &SquiggleParams,
    read_id: u64,
    seed: u64,
) -> Result<Squiggle> {
    let k = pore.kmer_length;
    if seq.len() < k {
        return Err(Error::SequenceTooShort {
            len: seq.len(),
            kmer: k,
        });
    }
    if params.dwell_mean.is_nan()
        || params.dwell_mean < 1.0
        || params.noise_std.is_nan()
        || params.noise_std < 0.0
    {
        return Err(Error::InvalidParameter(format!(
            "bad squiggle parameters {params:?}"
        )));
    }
    let mut rng = rng_from(seed);
    let dwell = (params.dwell_mean > 1.0)
        .then(|| Geometric::new(1.0 / params.dwell_mean).expect("p in (0,1)"));
    let noise =
        (params.noise_std > 0.0).then(|| Normal::new(0.0, params.noise_std).expect("finite std"));
    let n_windows = seq.len() - k + 1;
    let mut samples = Vec::with_capacity(n_windows * params.dwell_mean.ceil() as usize);
    let mut truth = Vec::with_capacity(samples.capacity());
    for pos in 0..n_windows {
        let level = f64::from(pore.means[pore.kmer_index(&seq[pos..])]);
        let d = 1 + dwell.as_ref().map_or(0, |g| g.sample(&mut rng));
        for _ in 0..d {
            let x = level + noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
            samples.push(x as f32);
            truth.push(pos as u32);
        }
    }
    // keep the generator's use pattern independent of the optional distributions
    let _ = rng.random::<u8>();
    Ok(Squiggle {
        read_id,
        samples,
        truth: Some(truth),
    })
}
