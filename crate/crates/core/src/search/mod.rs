//! Baseline motif inference on basecalled reads: exact matching (ZE) and
//! approximate matching (AM) through a spacer k-mer index, chaining and
//! segment alignment.

mod am;
mod index;
mod ze;

pub use am::{am_search, AmParams};
pub use index::{build_spacer_index, Posting, SpacerIndex};
pub use ze::ze_search;

use serde::{Deserialize, Serialize};

use crate::library::{BlockLayout, MotifId};
use crate::synthsim::Orientation;

/// Per-slot motif calls for one read (address slots first).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotCalls {
    pub calls: Vec<Option<MotifId>>,
    pub orientation: Option<Orientation>,
}

impl SlotCalls {
    pub fn empty(n_slots: usize) -> Self {
        Self {
            calls: vec![None; n_slots],
            orientation: None,
        }
    }

    pub fn n_called(&self) -> usize {
        self.calls.iter().filter(|c| c.is_some()).count()
    }

    pub fn payload<'a>(&'a self, layout: &BlockLayout) -> &'a [Option<MotifId>] {
        &self.calls[layout.n_address_slots..]
    }
}

/// Detection and error fractions of one read against pre-synthesis truth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadScore {
    /// Payload slots whose call lies in the slot's truth set, over all payload slots.
    pub detected: f64,
    /// Wrong calls over all calls; 0 with `error_defined = false` when nothing was called.
    pub error: f64,
    pub error_defined: bool,
    pub n_called: usize,
    pub n_correct: usize,
}

/// Scores payload slots of `calls` against per-slot truth sets (address slots
/// first, as produced by [`crate::library::Block::slot_truth`]).
pub fn score_read_vs_truth(
    calls: &SlotCalls,
    truth: &[Vec<MotifId>],
    layout: &BlockLayout,
) -> ReadScore {
    let skip = layout.n_address_slots;
    let mut n_called = 0;
    let mut n_correct = 0;
    for (call, truth) in calls.calls.iter().zip(truth).skip(skip) {
        if let Some(m) = call {
            n_called += 1;
            if truth.contains(m) {
                n_correct += 1;
            }
        }
    }
    let n_payload = layout.n_payload_slots as f64;
    ReadScore {
        detected: n_correct as f64 / n_payload,
        error: if n_called == 0 {
            0.0
        } else {
            (n_called - n_correct) as f64 / n_called as f64
        },
        error_defined: n_called > 0,
        n_called,
        n_correct,
    }
}

/// Basecaller quality gate for the baseline pipelines. Simulated reads carry
/// no basecaller quality and always pass; real reads are kept when their mean
/// quality reaches `min_q`.
pub fn baseline_quality_pass(read_q: Option<f64>, min_q: f64) -> bool {
    read_q.is_none_or(|q| q >= min_q)
}

/// Picks between forward and reverse decodes: higher score, then more calls,
/// then the lexicographically smaller call vector. Symmetric in its arguments,
/// so decoding a read and its reverse complement agree.
pub(crate) fn pick_orientation(
    fwd: (Vec<Option<MotifId>>, i64),
    rev: (Vec<Option<MotifId>>, i64),
) -> SlotCalls {
    let count = |c: &[Option<MotifId>]| c.iter().filter(|x| x.is_some()).count();
    let key = |c: &(Vec<Option<MotifId>>, i64)| (c.1, count(&c.0));
    let take_fwd = match key(&fwd).cmp(&key(&rev)) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => fwd.0 <= rev.0,
    };
    let (calls, orientation) = if take_fwd {
        (fwd.0, Orientation::Forward)
    } else {
        (rev.0, Orientation::Reverse)
    };
    let orientation = calls.iter().any(Option::is_some).then_some(orientation);
    SlotCalls { calls, orientation }
}
