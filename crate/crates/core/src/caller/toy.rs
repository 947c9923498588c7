//! Windowed-feature affine model trained with the CTC loss.
//!
//! Each 64-sample window of a read (normalised to zero mean and unit variance
//! per read) is summarised by its mean, standard deviation, minimum, maximum
//! and mean first difference, plus a constant; an affine map turns these into
//! token logits.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ctc::{ctc_forward, ctc_gradient, min_windows, Emissions};
use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Summary statistics per window plus the bias input.
pub const N_FEATURES: usize = 6;

/// Affine window-to-logit model. `weights` is `n_tokens × N_FEATURES`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyModelParams {
    pub window: usize,
    pub stride: usize,
    pub n_tokens: usize,
    pub weights: Vec<f64>,
}

impl ToyModelParams {
    pub fn zeros(n_tokens: usize) -> Self {
        Self {
            window: 64,
            stride: 64,
            n_tokens,
            weights: vec![0.0; n_tokens * N_FEATURES],
        }
    }

    /// Small uniform initial weights in `[-scale, scale]`.
    pub fn random(n_tokens: usize, scale: f64, seed: u64) -> Self {
        let mut rng = rng_from(seed);
        let mut p = Self::zeros(n_tokens);
        for w in &mut p.weights {
            *w = rng.random_range(-scale..=scale);
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.stride == 0 || self.n_tokens < 2 {
            return Err(Error::InvalidParameter(
                "toy model needs positive window, stride and at least two tokens".into(),
            ));
        }
        if self.weights.len() != self.n_tokens * N_FEATURES {
            return Err(Error::format(
                "toy model",
                format!("weights must have shape {}×{N_FEATURES}", self.n_tokens),
            ));
        }
        Ok(())
    }

    /// Per-window feature vectors of a read.
    pub fn features(&self, samples: &[f32]) -> Vec<[f64; N_FEATURES]> {
        window_features(samples, self.window, self.stride)
    }

    pub fn logits(&self, features: &[[f64; N_FEATURES]]) -> Emissions<f64> {
        let mut data = Vec::with_capacity(features.len() * self.n_tokens);
        for f in features {
            for row in self.weights.chunks_exact(N_FEATURES) {
                data.push(row.iter().zip(f).map(|(w, x)| w * x).sum());
            }
        }
        Emissions::new(features.len(), self.n_tokens, data).expect("shape follows construction")
    }

    pub fn log_probs(&self, samples: &[f32]) -> Emissions<f64> {
        Emissions::log_softmax(&self.logits(&self.features(samples)))
    }
}

/// Window summaries over the per-read standardised signal.
pub fn window_features(samples: &[f32], window: usize, stride: usize) -> Vec<[f64; N_FEATURES]> {
    if samples.len() < window || window == 0 || stride == 0 {
        return Vec::new();
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&x| f64::from(x)).sum::<f64>() / n;
    let var = samples
        .iter()
        .map(|&x| (f64::from(x) - mean).powi(2))
        .sum::<f64>()
        / n;
    let sd = var.sqrt().max(1e-9);
    let z: Vec<f64> = samples
        .iter()
        .map(|&x| (f64::from(x) - mean) / sd)
        .collect();
    (0..=(samples.len() - window) / stride)
        .map(|w| {
            let x = &z[w * stride..w * stride + window];
            let m = x.iter().sum::<f64>() / window as f64;
            let s = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / window as f64).sqrt();
            let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let diff = if window > 1 {
                (x[window - 1] - x[0]) / (window - 1) as f64
            } else {
                0.0
            };
            [m, s, lo, hi, diff, 1.0]
        })
        .collect()
}

/// One training example: a read's samples and its blank-free token labels.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    pub samples: Vec<f32>,
    pub labels: Vec<usize>,
}

/// Loss trace of a training run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean loss over usable pairs before each epoch's update, plus the final loss.
    pub losses: Vec<f64>,
    /// Pairs skipped because they have too few windows for their labels.
    pub skipped: usize,
}

/// Mean CTC loss over `pairs` and its gradient with respect to the weights.
pub fn loss_and_gradient(
    params: &ToyModelParams,
    pairs: &[(Vec<[f64; N_FEATURES]>, Vec<usize>)],
) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; params.weights.len()];
    let mut total = 0.0;
    for (features, labels) in pairs {
        let log_probs = Emissions::log_softmax(&params.logits(features));
        let (loss, g) = ctc_gradient(&log_probs, labels)?;
        total += loss;
        for (t, f) in features.iter().enumerate() {
            for (k, &gk) in g.row(t).iter().enumerate() {
                for (j, &x) in f.iter().enumerate() {
                    grad[k * N_FEATURES + j] += gk * x;
                }
            }
        }
    }
    let n = pairs.len().max(1) as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((total / n, grad))
}

/// Mean CTC loss of `params` over `pairs`, skipping infeasible ones.
pub fn mean_loss(params: &ToyModelParams, pairs: &[TrainingPair]) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0;
    for p in pairs {
        let lp = params.log_probs(&p.samples);
        if lp.n_windows() < min_windows(&p.labels) {
            continue;
        }
        total += ctc_forward(&lp, &p.labels)?;
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { total / n as f64 })
}

/// Full-batch gradient descent on the mean CTC loss.
pub fn train_toy_caller(
    pairs: &[TrainingPair],
    init: ToyModelParams,
    epochs: usize,
    learning_rate: f64,
) -> Result<(ToyModelParams, TrainReport)> {
    init.validate()?;
    let blank = init.n_tokens - 1;
    let mut report = TrainReport::default();
    let mut usable = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        if p.labels.iter().any(|&l| l >= blank) {
            return Err(Error::InvalidParameter(format!(
                "training pair {i} has a label outside the non-blank tokens"
            )));
        }
        let features = init.features(&p.samples);
        if features.len() < min_windows(&p.labels) {
            warn!(
                "skipping training pair {i}: {} windows for {} labels",
                features.len(),
                p.labels.len()
            );
            report.skipped += 1;
            continue;
        }
        usable.push((features, p.labels.clone()));
    }
    let mut params = init;
    for _ in 0..epochs {
        let (loss, grad) = loss_and_gradient(&params, &usable)?;
        report.losses.push(loss);
        for (w, g) in params.weights.iter_mut().zip(&grad) {
            *w -= learning_rate * g;
        }
    }
    report.losses.push(loss_and_gradient(&params, &usable)?.0);
    Ok((params, report))
}
