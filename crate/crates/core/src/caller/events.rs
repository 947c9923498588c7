use serde::{Deserialize, Serialize};

/// A constant-level stretch of a squiggle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Mean current over the stretch.
    pub level: f64,
    /// Number of samples covered; at least 1.
    pub support: u32,
}

/// Segmentation of one squiggle; supports sum to its sample count.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    pub events: Vec<Event>,
}

impl EventSequence {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn total_support(&self) -> u64 {
        self.events.iter().map(|e| u64::from(e.support)).sum()
    }

    /// Sample offset at which each event starts, plus the total as a final entry.
    pub fn boundaries(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.events.len() + 1);
        let mut acc = 0;
        out.push(0);
        for e in &self.events {
            acc += u64::from(e.support);
            out.push(acc);
        }
        out
    }

    pub fn reversed(&self) -> Self {
        Self {
            events: self.events.iter().rev().copied().collect(),
        }
    }
}

/// Exact minimiser of `Σ SSE(segment) + penalty · segments` over all
/// piecewise-constant segmentations, via optimal partitioning with PELT pruning.
pub fn eventize(samples: &[f32], penalty: f64) -> EventSequence {
    let n = samples.len();
    if n == 0 {
        return EventSequence::default();
    }
    // centring keeps the prefix sums well conditioned
    let centre = samples.iter().map(|&x| f64::from(x)).sum::<f64>() / n as f64;
    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    for (i, &x) in samples.iter().enumerate() {
        let x = f64::from(x) - centre;
        s1[i + 1] = s1[i] + x;
        s2[i + 1] = s2[i] + x * x;
    }
    let cost = |a: usize, b: usize| {
        let len = (b - a) as f64;
        let sum = s1[b] - s1[a];
        (s2[b] - s2[a] - sum * sum / len).max(0.0)
    };

    let mut best = vec![0.0; n + 1];
    let mut last = vec![0usize; n + 1];
    best[0] = -penalty;
    let mut candidates = vec![0usize];
    let mut partial = Vec::new();
    for t in 1..=n {
        partial.clear();
        let mut min = f64::INFINITY;
        let mut arg = 0;
        for &s in &candidates {
            let v = best[s] + cost(s, t);
            partial.push(v);
            if v + penalty < min {
                min = v + penalty;
                arg = s;
            }
        }
        best[t] = min;
        last[t] = arg;
        // candidates that can never win again are pruned; ties are kept for exactness
        let mut keep = 0;
        for i in 0..candidates.len() {
            if partial[i] <= min {
                candidates[keep] = candidates[i];
                keep += 1;
            }
        }
        candidates.truncate(keep);
        candidates.push(t);
    }

    let mut cuts = vec![n];
    let mut t = n;
    while t > 0 {
        t = last[t];
        cuts.push(t);
    }
    cuts.reverse();
    let events = cuts
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            Event {
                level: (s1[b] - s1[a]) / (b - a) as f64 + centre,
                support: (b - a) as u32,
            }
        })
        .collect();
    EventSequence { events }
}

/// Default segmentation penalty `σ²·ln n`, with σ floored at `sigma_floor`.
pub fn default_penalty(noise_std: f64, sigma_floor: f64, n_samples: usize) -> f64 {
    let s = noise_std.max(sigma_floor);
    s * s * (n_samples.max(2) as f64).ln()
}
