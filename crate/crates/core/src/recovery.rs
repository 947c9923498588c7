//! Majority voting of per-read calls into recovered blocks, recovery curves,
//! dilution accuracy and quality-threshold sweeps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::library::{Block, BlockLayout, MotifId};
use crate::search::{ReadScore, SlotCalls};

/// Vote counts of one block: `counts[slot][motif]`, address slots first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTable {
    pub counts: Vec<Vec<u32>>,
}

impl VoteTable {
    pub fn new(layout: &BlockLayout) -> Self {
        Self {
            counts: vec![vec![0; layout.library_size]; layout.total_slots()],
        }
    }

    /// Adds counts slot by slot; tables must share a shape.
    pub fn merge(&mut self, other: &VoteTable) -> Result<()> {
        if self.counts.len() != other.counts.len()
            || self
                .counts
                .iter()
                .zip(&other.counts)
                .any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::InvalidParameter(
                "vote tables differ in shape".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

/// Counts one vote for every called slot; absent slots and out-of-range ids are ignored.
pub fn vote_update(table: &mut VoteTable, calls: &SlotCalls) {
    for (slot, call) in calls.calls.iter().enumerate() {
        if let Some(m) = *call {
            if let Some(c) = table
                .counts
                .get_mut(slot)
                .and_then(|s| s.get_mut(m as usize))
            {
                *c += 1;
            }
        }
    }
}

/// Top-`k` motifs by count, ties to the lower id, in ascending id order;
/// `None` when fewer than `k` distinct motifs have votes.
pub fn top_k(counts: &[u32], k: usize) -> Option<Vec<MotifId>> {
    let mut voted: Vec<(u32, MotifId)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| (c, m as MotifId))
        .collect();
    if voted.len() < k {
        return None;
    }
    voted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<MotifId> = voted[..k].iter().map(|v| v.1).collect();
    out.sort_unstable();
    Some(out)
}

/// Decisions for every slot of a block; `None` marks an undecided slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecision {
    pub address: Vec<Option<MotifId>>,
    pub payloads: Vec<Option<Vec<MotifId>>>,
}

impl BlockDecision {
    /// Whether every slot equals the block's truth.
    pub fn matches(&self, truth: &Block) -> bool {
        self.address
            .iter()
            .zip(&truth.address)
            .all(|(d, t)| *d == Some(*t))
            && self
                .payloads
                .iter()
                .zip(&truth.payloads)
                .all(|(d, t)| d.as_deref() == Some(t.ids()))
    }
}

/// Address slots take the most voted motif, payload slots the top `k`.
pub fn block_decision(table: &VoteTable, layout: &BlockLayout) -> BlockDecision {
    let n_addr = layout.n_address_slots;
    BlockDecision {
        address: table.counts[..n_addr]
            .iter()
            .map(|c| top_k(c, 1).map(|v| v[0]))
            .collect(),
        payloads: table.counts[n_addr..]
            .iter()
            .map(|c| top_k(c, layout.motifs_per_symbol))
            .collect(),
    }
}

/// One read in arrival order. `calls` is `None` for reads that were filtered
/// or could not be decoded; they are consumed without voting.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamRead {
    pub block_id: u64,
    pub calls: Option<SlotCalls>,
}

/// Recovery after a whole number of reads per block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub reads_per_block: f64,
    /// Payload `(block, slot)` decisions equal to truth.
    pub slot_fraction: f64,
    pub blocks_recovered: f64,
}

/// Final state of one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockOutcome {
    pub block_id: u64,
    pub reads: u64,
    pub recovered: bool,
    /// Block reads consumed when each payload slot last became correct.
    pub slot_decided_at: Vec<Option<u64>>,
    pub decision: BlockDecision,
}

/// Outcome of replaying a read stream against truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub n_blocks: usize,
    pub reads_total: u64,
    pub threshold: f64,
    pub curve: Vec<CurvePoint>,
    /// Mean reads per block when the slot fraction first reaches the threshold.
    pub coverage_to_threshold: Option<f64>,
    /// Mean reads per block when every block is first fully recovered.
    pub full_convergence: Option<f64>,
    pub final_slot_fraction: f64,
    pub blocks: Vec<BlockOutcome>,
}

impl RecoveryReport {
    pub fn decoding_accuracy(&self) -> f64 {
        if self.n_blocks == 0 {
            return 0.0;
        }
        self.blocks.iter().filter(|b| b.recovered).count() as f64 / self.n_blocks as f64
    }
}

/// Replays `stream` in order, voting per block and tracking how many payload
/// slots decide to their truth subset. Reads of blocks absent from `truth`
/// are an error.
pub fn recovery_curve(
    stream: &[StreamRead],
    truth: &[Block],
    layout: &BlockLayout,
    threshold: f64,
) -> Result<RecoveryReport> {
    let index: BTreeMap<u64, usize> = truth
        .iter()
        .enumerate()
        .map(|(i, b)| (b.block_id, i))
        .collect();
    let n_blocks = truth.len();
    let n_addr = layout.n_address_slots;
    let n_payload = layout.n_payload_slots;
    let mut tables = vec![VoteTable::new(layout); n_blocks];
    let mut reads = vec![0u64; n_blocks];
    let mut slot_ok = vec![vec![false; n_payload]; n_blocks];
    let mut addr_ok = vec![vec![false; n_addr]; n_blocks];
    let mut decided_at = vec![vec![None; n_payload]; n_blocks];
    let mut n_slot_ok = 0usize;
    let mut n_block_ok = 0usize;
    let total_slots = (n_blocks * n_payload).max(1) as f64;

    let mut report = RecoveryReport {
        n_blocks,
        reads_total: stream.len() as u64,
        threshold,
        curve: Vec::new(),
        coverage_to_threshold: None,
        full_convergence: None,
        final_slot_fraction: 0.0,
        blocks: Vec::new(),
    };
    let reached = |n_slot_ok: usize| n_blocks > 0 && n_slot_ok as f64 / total_slots >= threshold;
    if reached(0) {
        report.coverage_to_threshold = Some(0.0);
    }

    for (i, read) in stream.iter().enumerate() {
        let &b = index.get(&read.block_id).ok_or_else(|| {
            Error::format(
                "read stream",
                format!("read {i} names unknown block {}", read.block_id),
            )
        })?;
        reads[b] += 1;
        if let Some(calls) = &read.calls {
            let before = addr_ok[b].iter().all(|&x| x) && slot_ok[b].iter().all(|&x| x);
            vote_update(&mut tables[b], calls);
            let block = &truth[b];
            for (s, call) in calls.calls.iter().enumerate() {
                if call.is_none() || s >= layout.total_slots() {
                    continue;
                }
                let counts = &tables[b].counts[s];
                if s < n_addr {
                    addr_ok[b][s] = top_k(counts, 1).map(|v| v[0]) == Some(block.address[s]);
                } else {
                    let p = s - n_addr;
                    let ok = top_k(counts, layout.motifs_per_symbol).as_deref()
                        == Some(block.payloads[p].ids());
                    if ok && !slot_ok[b][p] {
                        n_slot_ok += 1;
                        decided_at[b][p] = Some(reads[b]);
                    } else if !ok && slot_ok[b][p] {
                        n_slot_ok -= 1;
                    }
                    slot_ok[b][p] = ok;
                }
            }
            let after = addr_ok[b].iter().all(|&x| x) && slot_ok[b].iter().all(|&x| x);
            match (before, after) {
                (false, true) => n_block_ok += 1,
                (true, false) => n_block_ok -= 1,
                _ => {}
            }
        }
        let consumed = (i + 1) as f64 / n_blocks as f64;
        if report.coverage_to_threshold.is_none() && reached(n_slot_ok) {
            report.coverage_to_threshold = Some(consumed);
        }
        if report.full_convergence.is_none() && n_block_ok == n_blocks {
            report.full_convergence = Some(consumed);
        }
        if (i + 1) % n_blocks == 0 || i + 1 == stream.len() {
            report.curve.push(CurvePoint {
                reads_per_block: consumed,
                slot_fraction: n_slot_ok as f64 / total_slots,
                blocks_recovered: n_block_ok as f64 / n_blocks as f64,
            });
        }
    }

    report.final_slot_fraction = if n_blocks == 0 {
        0.0
    } else {
        n_slot_ok as f64 / total_slots
    };
    report.blocks = truth
        .iter()
        .enumerate()
        .map(|(b, block)| {
            let decision = block_decision(&tables[b], layout);
            BlockOutcome {
                block_id: block.block_id,
                reads: reads[b],
                recovered: decision.matches(block),
                slot_decided_at: decided_at[b]
                    .iter()
                    .zip(&slot_ok[b])
                    .map(|(d, &ok)| if ok { *d } else { None })
                    .collect(),
                decision,
            }
        })
        .collect();
    Ok(report)
}

/// Per-read detection summary of one pipeline.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub reads: usize,
    pub reads_retained: usize,
    /// Mean detected fraction over all reads; dropped reads count as zero.
    pub detected: f64,
    /// Mean error fraction over reads with at least one call.
    pub error: f64,
}

/// Summarises per-read scores; `None` marks a read dropped before calling.
pub fn detection_summary(scores: &[Option<ReadScore>]) -> DetectionSummary {
    let mut s = DetectionSummary {
        reads: scores.len(),
        ..Default::default()
    };
    let mut n_err = 0usize;
    for score in scores.iter().flatten() {
        s.reads_retained += 1;
        s.detected += score.detected;
        if score.error_defined {
            s.error += score.error;
            n_err += 1;
        }
    }
    if s.reads > 0 {
        s.detected /= s.reads as f64;
    }
    if n_err > 0 {
        s.error /= n_err as f64;
    }
    s
}

/// Decoding accuracy of one pipeline at one coverage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilutionRow {
    pub pipeline: String,
    pub coverage: f64,
    pub reads: u64,
    /// Fraction of blocks fully recovered from all their reads.
    pub accuracy: f64,
}

/// Decoding accuracy for each `(pipeline, coverage, stream)` entry.
pub fn dilution_experiment(
    entries: &[(String, f64, Vec<StreamRead>)],
    truth: &[Block],
    layout: &BlockLayout,
) -> Result<Vec<DilutionRow>> {
    entries
        .iter()
        .map(|(pipeline, coverage, stream)| {
            let report = recovery_curve(stream, truth, layout, 1.0)?;
            Ok(DilutionRow {
                pipeline: pipeline.clone(),
                coverage: *coverage,
                reads: stream.len() as u64,
                accuracy: report.decoding_accuracy(),
            })
        })
        .collect()
}

/// Metrics of the reads kept at one quality threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub retained: f64,
    /// Mean detected fraction of retained reads; `None` when nothing is retained.
    pub detected: Option<f64>,
    /// Mean error of retained reads with calls; `None` when undefined.
    pub error: Option<f64>,
}

/// Retains reads with `read_q ≥ threshold` (a missing quality counts as 0)
/// and reports retention and accuracy at every threshold.
pub fn quality_sweep(reads: &[(Option<f64>, ReadScore)], thresholds: &[f64]) -> Vec<SweepRow> {
    thresholds
        .iter()
        .map(|&q| {
            let kept: Vec<&ReadScore> = reads
                .iter()
                .filter(|(rq, _)| rq.unwrap_or(0.0) >= q)
                .map(|(_, s)| s)
                .collect();
            let n = kept.len();
            let with_calls: Vec<&&ReadScore> = kept.iter().filter(|s| s.error_defined).collect();
            SweepRow {
                threshold: q,
                retained: if reads.is_empty() {
                    0.0
                } else {
                    n as f64 / reads.len() as f64
                },
                detected: (n > 0).then(|| kept.iter().map(|s| s.detected).sum::<f64>() / n as f64),
                error: (!with_calls.is_empty()).then(|| {
                    with_calls.iter().map(|s| s.error).sum::<f64>() / with_calls.len() as f64
                }),
            }
        })
        .collect()
}
