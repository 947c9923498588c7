//! Direct signal-to-motif inference. A squiggle is segmented into events and
//! decoded by Viterbi against level templates of the oligo grammar, giving a
//! motif per slot with a calibrated confidence and an emission matrix that the
//! CTC decoders accept. A small affine model trained with the CTC loss lives
//! in [`toy`].

mod events;
mod templates;
pub mod toy;
mod viterbi;

pub use events::{default_penalty, eventize, Event, EventSequence};
pub use templates::{GrammarToken, Template, TemplateBank};

use serde::{Deserialize, Serialize};

use crate::ctc::{quality, Emissions, TokenAlphabet, DEFAULT_QUALITY_CAP};
use crate::error::Result;
use crate::library::{BlockLayout, MotifId, MotifLibrary};
use crate::search::SlotCalls;
use crate::synthsim::{Orientation, PoreModel};

use viterbi::{forward, max_marginals, traceback, Costs, Lattice};

/// Logistic scale, in nats of path score, fitted by
/// [`calibrate_confidence_scale`] on reads at 2 to 4 pA noise and frozen.
pub const DEFAULT_CONFIDENCE_SCALE: f64 = 75.0;

/// Caller configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CallerParams {
    /// Relative half-width of the per-token event-count band.
    pub band: f64,
    pub p_stay: f64,
    pub p_advance: f64,
    pub p_skip: f64,
    /// Lower bound on the emission standard deviation.
    pub sigma_floor: f64,
    /// Segmentation penalty; derived from the noise level when absent.
    pub event_penalty: Option<f64>,
    pub confidence_scale: f64,
    pub read_q_min: f64,
    pub token_p_min: f64,
}

impl Default for CallerParams {
    fn default() -> Self {
        Self {
            band: 0.3,
            p_stay: 0.1,
            p_advance: 0.8,
            p_skip: 0.1,
            sigma_floor: 0.5,
            event_penalty: None,
            confidence_scale: DEFAULT_CONFIDENCE_SCALE,
            read_q_min: 11.0,
            token_p_min: 0.85,
        }
    }
}

/// One decoded token.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalledToken {
    /// Column in the [`TokenAlphabet`].
    pub token: usize,
    /// Forward-strand slot for motif tokens.
    pub slot: Option<usize>,
    pub confidence: f64,
    /// Max-marginal score margin of the call over the runner-up; infinite for spacers.
    pub score_gap: f64,
    /// Half-open sample range covered by the token.
    pub span: (u64, u64),
}

impl CalledToken {
    pub fn quality(&self) -> f64 {
        quality(self.confidence, DEFAULT_QUALITY_CAP).unwrap_or(0.0)
    }
}

/// Decoded read. Spacers are reported with confidence 1; `read_q` averages
/// the quality of motif tokens only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotifCall {
    pub read_id: u64,
    pub orientation: Orientation,
    pub tokens: Vec<CalledToken>,
    pub read_q: f64,
    pub path_score: f64,
}

impl MotifCall {
    pub fn motif_tokens(&self) -> impl Iterator<Item = &CalledToken> {
        self.tokens.iter().filter(|t| t.slot.is_some())
    }

    pub fn mean_motif_q(&self) -> f64 {
        let (sum, n) = self
            .motif_tokens()
            .fold((0.0, 0usize), |(s, n), t| (s + t.quality(), n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    pub fn to_slot_calls(&self, layout: &BlockLayout) -> SlotCalls {
        let mut calls = SlotCalls::empty(layout.total_slots());
        for t in self.motif_tokens() {
            if let Some(slot) = t.slot.filter(|&s| s < calls.calls.len()) {
                calls.calls[slot] = Some(t.token as MotifId);
            }
        }
        calls.orientation = Some(self.orientation);
        calls
    }
}

/// Result of decoding one read.
#[derive(Clone, Debug, PartialEq)]
pub enum CallOutcome {
    Called {
        call: MotifCall,
        emissions: Emissions<f64>,
    },
    /// No grammar path fits the events.
    Unmappable,
}

/// Template banks for both read orientations.
#[derive(Clone, Debug, PartialEq)]
pub struct CallerModel {
    pub alphabet: TokenAlphabet,
    pub banks: Vec<TemplateBank>,
}

impl CallerModel {
    pub fn new(library: &MotifLibrary, layout: &BlockLayout, pore: &PoreModel) -> Result<Self> {
        let banks = [Orientation::Forward, Orientation::Reverse]
            .into_iter()
            .map(|o| TemplateBank::new(library, layout, pore, o))
            .collect::<Result<_>>()?;
        Ok(Self {
            alphabet: TokenAlphabet::new(library.n_motifs(), layout.n_spacers()),
            banks,
        })
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Decodes `events` under every bank of `model` and keeps the orientation with
/// the higher path score (forward on ties).
///
/// Per slot the call is the motif with the highest max-marginal path score;
/// its confidence is the logistic of the gap to the runner-up over
/// `confidence_scale`, and its emission row is the softmax of the
/// max-marginals at the same scale. Spacer rows are one-hot.
pub fn viterbi_call(
    read_id: u64,
    events: &EventSequence,
    model: &CallerModel,
    noise_std: f64,
    params: &CallerParams,
) -> CallOutcome {
    let costs = Costs::new(params, noise_std);
    let mut best: Option<(usize, Lattice, viterbi::Table)> = None;
    for (b, bank) in model.banks.iter().enumerate() {
        let lat = Lattice::new(&bank.tokens, params.band, false);
        if events.len() < lat.min_events() {
            continue;
        }
        let table = forward(&lat, events, &costs);
        if table.best > best.as_ref().map_or(f64::NEG_INFINITY, |b| b.2.best) {
            best = Some((b, lat, table));
        }
    }
    let Some((b, lat, table)) = best else {
        return CallOutcome::Unmappable;
    };
    let bank = &model.banks[b];
    let rev_lat = Lattice::new(&bank.tokens, params.band, true);
    let rev_table = forward(&rev_lat, &events.reversed(), &costs);
    let marg = max_marginals(&lat, &table, &rev_lat, &rev_table, events, &costs);

    // event span of every token along the best path
    let path = traceback(&lat, &table);
    let bounds = events.boundaries();
    let mut spans = vec![(u64::MAX, 0u64); bank.tokens.len()];
    let mut traced = vec![0usize; bank.tokens.len()];
    for (e, &(t, v)) in path.iter().enumerate() {
        traced[t] = v;
        spans[t].0 = spans[t].0.min(bounds[e]);
        spans[t].1 = spans[t].1.max(bounds[e + 1]);
    }

    let alpha = &model.alphabet;
    let scale = params.confidence_scale;
    let mut tokens = Vec::with_capacity(bank.tokens.len());
    let mut rows = Vec::with_capacity(bank.tokens.len());
    for (t, tok) in bank.tokens.iter().enumerate() {
        let mut row = vec![0.0; alpha.len()];
        let span = if spans[t].0 == u64::MAX {
            (0, 0)
        } else {
            spans[t]
        };
        match tok {
            GrammarToken::Spacer { position, .. } => {
                let col = alpha.spacer(*position);
                row[col] = 1.0;
                tokens.push(CalledToken {
                    token: col,
                    slot: None,
                    confidence: 1.0,
                    score_gap: f64::INFINITY,
                    span,
                });
            }
            GrammarToken::Slot { slot, variants } => {
                let scores = &marg[t];
                let mut order: Vec<usize> = (0..scores.len()).collect();
                order.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
                let top = scores[order[0]];
                let motif;
                let (confidence, gap);
                if top.is_finite() {
                    gap = order.get(1).map_or(f64::INFINITY, |&r| top - scores[r]);
                    confidence = logistic(gap / scale);
                    let z: f64 = scores.iter().map(|&s| ((s - top) / scale).exp()).sum();
                    for (v, tpl) in variants.iter().enumerate() {
                        let m = tpl.motif.expect("slot variants carry motifs");
                        row[alpha.motif(m)] = ((scores[v] - top) / scale).exp() / z;
                    }
                    motif = variants[order[0]]
                        .motif
                        .expect("slot variants carry motifs");
                } else {
                    // no banded path combines through this slot: keep the traced motif, uninformatively
                    gap = 0.0;
                    confidence = 0.0;
                    for tpl in variants {
                        let m = tpl.motif.expect("slot variants carry motifs");
                        row[alpha.motif(m)] = 1.0 / variants.len() as f64;
                    }
                    motif = variants[traced[t]]
                        .motif
                        .expect("slot variants carry motifs");
                }
                tokens.push(CalledToken {
                    token: alpha.motif(motif),
                    slot: Some(*slot),
                    confidence,
                    score_gap: gap,
                    span,
                });
            }
        }
        rows.push(row);
    }
    let emissions = Emissions::from_rows(&rows).expect("rows share the alphabet width");
    let mut call = MotifCall {
        read_id,
        orientation: bank.orientation,
        tokens,
        read_q: 0.0,
        path_score: table.best,
    };
    call.read_q = call.mean_motif_q();
    CallOutcome::Called { call, emissions }
}

/// Segments a squiggle with the configured or noise-derived penalty and decodes it.
pub fn call_squiggle(
    read_id: u64,
    samples: &[f32],
    model: &CallerModel,
    noise_std: f64,
    params: &CallerParams,
) -> CallOutcome {
    let penalty = params
        .event_penalty
        .unwrap_or_else(|| default_penalty(noise_std, params.sigma_floor, samples.len()));
    let events = eventize(samples, penalty);
    viterbi_call(read_id, &events, model, noise_std, params)
}

/// Token counts before and after filtering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub tokens_in: usize,
    pub tokens_kept: usize,
}

/// Outcome of [`filter_call`].
#[derive(Clone, Debug, PartialEq)]
pub enum Filtered {
    Retained(MotifCall, FilterStats),
    Rejected(FilterStats),
}

impl Filtered {
    pub fn retained(&self) -> Option<&MotifCall> {
        match self {
            Filtered::Retained(call, _) => Some(call),
            Filtered::Rejected(_) => None,
        }
    }
}

/// Drops motif tokens below `token_p_min` and rejects the read when the mean
/// quality of the surviving motif tokens is below `read_q_min` or none survive.
pub fn filter_call(call: &MotifCall, read_q_min: f64, token_p_min: f64) -> Filtered {
    let tokens_in = call.tokens.len();
    let tokens: Vec<CalledToken> = call
        .tokens
        .iter()
        .filter(|t| t.confidence >= token_p_min)
        .cloned()
        .collect();
    let mut out = MotifCall {
        tokens,
        ..call.clone()
    };
    out.read_q = out.mean_motif_q();
    let stats = FilterStats {
        tokens_in,
        tokens_kept: out.tokens.len(),
    };
    if out.motif_tokens().next().is_none() || out.read_q < read_q_min {
        Filtered::Rejected(stats)
    } else {
        Filtered::Retained(out, stats)
    }
}

/// Fits the logistic confidence scale by maximum likelihood on
/// `(score gap, call was correct)` pairs; searches `ln scale` by golden section
/// over `[1e-3, 1e3]`.
pub fn calibrate_confidence_scale(samples: &[(f64, bool)]) -> f64 {
    let nll = |log_s: f64| {
        let s = log_s.exp();
        samples
            .iter()
            .map(|&(gap, ok)| {
                let z = gap / s;
                // −ln σ(z) = ln(1 + e^{−z}); −ln(1 − σ(z)) = ln(1 + e^{z})
                let x = if ok { -z } else { z };
                if x > 30.0 {
                    x
                } else {
                    x.exp().ln_1p()
                }
            })
            .sum::<f64>()
    };
    let (mut a, mut b) = (1e-3f64.ln(), 1e3f64.ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if nll(c) <= nll(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    ((a + b) / 2.0).exp()
}

/// Score gap between the called motif and the runner-up, recovered from a confidence.
pub fn confidence_gap(confidence: f64, scale: f64) -> f64 {
    let p = confidence.clamp(1e-300, 1.0 - 1e-16);
    scale * (p / (1.0 - p)).ln()
}

/// A baseline read proposed for training: its AM-called tokens and the fraction
/// of its slots matching ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapCandidate<L> {
    pub read_id: u64,
    pub match_fraction: f64,
    pub labels: L,
}

/// Keeps the best `round(top_fraction · n)` candidates by match fraction, ties
/// broken by ascending read id; output is in that rank order.
pub fn label_bootstrap<L: Clone>(
    candidates: &[BootstrapCandidate<L>],
    top_fraction: f64,
) -> Vec<BootstrapCandidate<L>> {
    let n = ((top_fraction.clamp(0.0, 1.0)) * candidates.len() as f64).round() as usize;
    let mut ranked: Vec<&BootstrapCandidate<L>> = candidates.iter().collect();
    ranked.sort_by(|a, b| {
        b.match_fraction
            .total_cmp(&a.match_fraction)
            .then(a.read_id.cmp(&b.read_id))
    });
    ranked.into_iter().take(n).cloned().collect()
}

#[cfg(test)]
mod tests;
