//! End-to-end experiment plumbing: configuration, seeded corpus simulation in
//! arrival order, the three motif pipelines, and their scoring against truth.

use std::collections::HashMap;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caller::{call_squiggle, filter_call, CallOutcome, CallerModel, CallerParams, Filtered};
use crate::codec::CodecConfig;
use crate::dna::complement_reverse;
use crate::error::{Error, Result};
use crate::formats::{digest_json, CallRecord, CallStatus, TokenRecord, TruthRecord};
use crate::library::{generate_library, Block, BlockLayout, LibraryParams, MotifLibrary};
use crate::recovery::{
    detection_summary, recovery_curve, DetectionSummary, DilutionRow, RecoveryReport, StreamRead,
};
use crate::rng::{derive_seed, rng_from, stream};
use crate::search::{
    am_search, build_spacer_index, score_read_vs_truth, ze_search, AmParams, ReadScore, SlotCalls,
    SpacerIndex,
};
use crate::synthsim::{
    corrupt, draw_molecule, generate_pore_model, render_squiggle, ChannelParams, CoverageModel,
    Molecule, Orientation, PoreModel, Read, Squiggle, SquiggleParams,
};

/// Pore model settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoreParams {
    pub kmer_length: usize,
}

impl Default for PoreParams {
    fn default() -> Self {
        Self { kmer_length: 6 }
    }
}

/// Recovery and reporting settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryParams {
    pub threshold: f64,
    pub quality_thresholds: Vec<f64>,
    /// Mean reads per block of the dilution corpora.
    pub dilution_coverages: Vec<f64>,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        Self {
            threshold: 0.95,
            quality_thresholds: vec![0.0, 10.0, 15.0, 20.0],
            dilution_coverages: vec![18.0, 7.0, 2.3],
        }
    }
}

/// Everything that determines a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub library: LibraryParams,
    pub layout: BlockLayout,
    pub codec: CodecConfig,
    pub channel: ChannelParams,
    pub pore: PoreParams,
    pub squiggle: SquiggleParams,
    pub caller: CallerParams,
    pub search: AmParams,
    pub recovery: RecoveryParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output: None,
            library: LibraryParams::default(),
            layout: BlockLayout::default(),
            codec: CodecConfig::default(),
            channel: ChannelParams::default(),
            pore: PoreParams::default(),
            squiggle: SquiggleParams::default(),
            caller: CallerParams::default(),
            search: AmParams::default(),
            recovery: RecoveryParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        self.channel.validate()?;
        let l = &self.library;
        if l.n_motifs != self.layout.library_size
            || l.spacer_length != self.layout.spacer_length
            || l.n_spacers != self.layout.n_spacers()
        {
            return Err(Error::InvalidParameter(format!(
                "library ({} motifs, {} spacers of length {}) does not fit the layout \
                 ({} motifs, {} spacers of length {})",
                l.n_motifs,
                l.n_spacers,
                l.spacer_length,
                self.layout.library_size,
                self.layout.n_spacers(),
                self.layout.spacer_length
            )));
        }
        if !(0.0..=1.0).contains(&self.recovery.threshold) {
            return Err(Error::InvalidParameter(
                "recovery threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Reads of every block under the coverage model; Poisson draws are seeded per block.
pub fn reads_per_block(blocks: &[Block], coverage: &CoverageModel, seed: u64) -> Result<Vec<u64>> {
    blocks
        .iter()
        .map(|b| match *coverage {
            CoverageModel::Fixed(n) => Ok(u64::from(n)),
            CoverageModel::Poisson(0.0) => Ok(0),
            CoverageModel::Poisson(mean) => {
                let d = Poisson::new(mean).map_err(|e| {
                    Error::InvalidParameter(format!("poisson coverage {mean}: {e}"))
                })?;
                let mut rng = rng_from(derive_seed(seed, &[stream::COVERAGE, b.block_id]));
                Ok(d.sample(&mut rng) as u64)
            }
        })
        .collect()
}

/// Arrival order as `(block index, read index)`: round `r` holds the `r`-th read
/// of every block that has one, in a seeded shuffle of those blocks.
pub fn arrival_order(blocks: &[Block], counts: &[u64], seed: u64) -> Vec<(usize, u64)> {
    let rounds = counts.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(counts.iter().sum::<u64>() as usize);
    for r in 0..rounds {
        let mut present: Vec<usize> = (0..blocks.len()).filter(|&b| counts[b] > r).collect();
        present.shuffle(&mut rng_from(derive_seed(seed, &[stream::ARRIVAL, r])));
        out.extend(present.into_iter().map(|b| (b, r)));
    }
    out
}

/// One simulated read with its source molecule.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRead {
    pub read_index: u64,
    pub molecule: Molecule,
    pub read: Read,
}

impl SimRead {
    pub fn read_id(&self) -> u64 {
        self.read.read_id
    }

    pub fn block_id(&self) -> u64 {
        self.read.block_id
    }

    pub fn truth_record(&self) -> TruthRecord {
        TruthRecord {
            read_id: self.read.read_id,
            block_id: self.read.block_id,
            read_index: self.read_index,
            orientation: self.read.orientation,
            truth_motifs: self.read.truth_motifs.clone(),
        }
    }

    /// Current trace of the source molecule in the read's orientation.
    pub fn render(&self, pore: &PoreModel, params: &SquiggleParams, seed: u64) -> Result<Squiggle> {
        let seq = match self.read.orientation {
            Orientation::Forward => self.molecule.sequence.clone(),
            Orientation::Reverse => complement_reverse(&self.molecule.sequence),
        };
        render_squiggle(
            &seq,
            pore,
            params,
            self.read.read_id,
            derive_seed(
                seed,
                &[stream::SQUIGGLE, self.molecule.block_id, self.read_index],
            ),
        )
    }
}

/// Simulates every read of every block; read ids follow arrival order.
/// Each read's randomness derives from `(seed, block id, read index)` only.
pub fn simulate_corpus(
    blocks: &[Block],
    library: &MotifLibrary,
    layout: &BlockLayout,
    channel: &ChannelParams,
    seed: u64,
) -> Result<Vec<SimRead>> {
    simulate_span(blocks, library, layout, channel, seed, 0..usize::MAX)
}

/// The reads of [`simulate_corpus`] whose arrival positions fall in `span`
/// (clamped to the corpus), without materialising the rest.
pub fn simulate_span(
    blocks: &[Block],
    library: &MotifLibrary,
    layout: &BlockLayout,
    channel: &ChannelParams,
    seed: u64,
    span: Range<usize>,
) -> Result<Vec<SimRead>> {
    channel.validate()?;
    layout.check_library(library)?;
    for b in blocks {
        b.check(layout)?;
    }
    let counts = reads_per_block(blocks, &channel.coverage, seed)?;
    let order = arrival_order(blocks, &counts, seed);
    let end = span.end.min(order.len());
    let start = span.start.min(end);
    order[start..end]
        .par_iter()
        .enumerate()
        .map(|(i, &(b, r))| {
            let block = &blocks[b];
            let mut rng = rng_from(derive_seed(seed, &[stream::ASSEMBLE, block.block_id, r]));
            let molecule = draw_molecule(block, library, layout, &mut rng);
            let channel_seed = derive_seed(seed, &[stream::CHANNEL, block.block_id, r]);
            let (read, _) = corrupt(&molecule, channel, (start + i) as u64, channel_seed)?;
            Ok(SimRead {
                read_index: r,
                molecule,
                read,
            })
        })
        .collect()
}

/// Motif inference method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Caller,
    Am,
    Ze,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Caller => "caller",
            Method::Am => "am",
            Method::Ze => "ze",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "caller" => Ok(Method::Caller),
            "am" => Ok(Method::Am),
            "ze" => Ok(Method::Ze),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Calls record of a baseline search; baselines carry no confidences.
pub fn search_record(read_id: u64, calls: &SlotCalls) -> CallRecord {
    CallRecord {
        read_id,
        status: CallStatus::Retained,
        orientation: calls.orientation,
        read_q: None,
        tokens: calls
            .calls
            .iter()
            .enumerate()
            .filter_map(|(slot, c)| {
                c.map(|m| TokenRecord {
                    id: m as usize,
                    slot: Some(slot),
                    p: None,
                    q: None,
                    kept: true,
                })
            })
            .collect(),
    }
}

/// Runs ZE or AM search over base-level reads in order.
pub fn run_search(
    method: Method,
    reads: &[(u64, &[u8])],
    library: &MotifLibrary,
    layout: &BlockLayout,
    index: Option<&SpacerIndex>,
    params: &AmParams,
) -> Result<Vec<CallRecord>> {
    let index = match (method, index) {
        (Method::Am, Some(i)) => Some(i),
        (Method::Am, None) => {
            return Err(Error::InvalidParameter(
                "AM search needs a spacer index".into(),
            ))
        }
        (Method::Ze, _) => None,
        (Method::Caller, _) => {
            return Err(Error::InvalidParameter(
                "the caller consumes squiggles, not reads".into(),
            ))
        }
    };
    Ok(reads
        .par_iter()
        .map(|&(id, bases)| {
            let calls = match index {
                Some(idx) => am_search(bases, idx, library, layout, params),
                None => ze_search(bases, library, layout),
            };
            search_record(id, &calls)
        })
        .collect())
}

/// Calls record of a caller outcome; tokens are stored unfiltered with a `kept` flag.
pub fn caller_record(read_id: u64, outcome: &CallOutcome, params: &CallerParams) -> CallRecord {
    let CallOutcome::Called { call, .. } = outcome else {
        return CallRecord {
            read_id,
            status: CallStatus::Unmappable,
            orientation: None,
            read_q: None,
            tokens: Vec::new(),
        };
    };
    let filtered = filter_call(call, params.read_q_min, params.token_p_min);
    let status = match filtered {
        Filtered::Retained(..) => CallStatus::Retained,
        Filtered::Rejected(_) => CallStatus::Rejected,
    };
    CallRecord {
        read_id,
        status,
        orientation: Some(call.orientation),
        read_q: Some(call.read_q),
        tokens: call
            .tokens
            .iter()
            .map(|t| TokenRecord {
                id: t.token,
                slot: t.slot,
                p: Some(t.confidence),
                q: Some(t.quality()),
                kept: t.confidence >= params.token_p_min,
            })
            .collect(),
    }
}

/// Decodes squiggles with the caller; returns records and, per read, the outcome.
pub fn run_caller(
    squiggles: &[Squiggle],
    model: &CallerModel,
    noise_std: f64,
    params: &CallerParams,
) -> Vec<(CallRecord, CallOutcome)> {
    squiggles
        .par_iter()
        .map(|sq| {
            let outcome = call_squiggle(sq.read_id, &sq.samples, model, noise_std, params);
            (caller_record(sq.read_id, &outcome, params), outcome)
        })
        .collect()
}

/// Renders and decodes simulated reads without keeping their squiggles.
pub fn call_sim_reads(
    reads: &[SimRead],
    pore: &PoreModel,
    squiggle: &SquiggleParams,
    seed: u64,
    model: &CallerModel,
    params: &CallerParams,
) -> Result<Vec<CallRecord>> {
    reads
        .par_iter()
        .map(|r| {
            let sq = r.render(pore, squiggle, seed)?;
            let outcome = call_squiggle(sq.read_id, &sq.samples, model, squiggle.noise_std, params);
            Ok(caller_record(sq.read_id, &outcome, params))
        })
        .collect()
}

/// Everything learned about one pipeline on one corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineEvaluation {
    pub method: String,
    pub summary: DetectionSummary,
    pub recovery: RecoveryReport,
    /// Per read in arrival order: unfiltered read quality and score (caller only has qualities).
    #[serde(skip)]
    pub per_read: Vec<(Option<f64>, Option<ReadScore>)>,
}

/// Scores the records of one pipeline against truth, replaying reads in
/// read-id order. Reads without a record count as dropped.
pub fn evaluate(
    method: &str,
    records: &[CallRecord],
    truth: &[TruthRecord],
    blocks: &[Block],
    layout: &BlockLayout,
    threshold: f64,
) -> Result<PipelineEvaluation> {
    let slot_truth: HashMap<u64, Vec<Vec<crate::library::MotifId>>> = blocks
        .iter()
        .map(|b| (b.block_id, b.slot_truth()))
        .collect();
    let by_id: HashMap<u64, &CallRecord> = records.iter().map(|r| (r.read_id, r)).collect();
    let mut sorted: Vec<&TruthRecord> = truth.iter().collect();
    sorted.sort_by_key(|t| t.read_id);
    let n_slots = layout.total_slots();
    let n_motifs = layout.library_size;
    let mut stream_reads = Vec::with_capacity(sorted.len());
    let mut per_read = Vec::with_capacity(sorted.len());
    for t in sorted {
        let st = slot_truth.get(&t.block_id).ok_or_else(|| {
            Error::format(
                "truth",
                format!("read {} names unknown block {}", t.read_id, t.block_id),
            )
        })?;
        let rec = by_id.get(&t.read_id);
        let calls = rec.and_then(|r| r.slot_calls(n_motifs, n_slots));
        let score = calls.as_ref().map(|c| score_read_vs_truth(c, st, layout));
        // quality sweeps score every decoded read, ignoring the filter
        let unfiltered = rec
            .filter(|r| r.status != CallStatus::Unmappable)
            .map(|r| score_read_vs_truth(&r.all_slot_calls(n_motifs, n_slots), st, layout));
        per_read.push((rec.and_then(|r| r.read_q), unfiltered));
        stream_reads.push((
            StreamRead {
                block_id: t.block_id,
                calls,
            },
            score,
        ));
    }
    let scores: Vec<Option<ReadScore>> = stream_reads.iter().map(|(_, s)| *s).collect();
    let stream: Vec<StreamRead> = stream_reads.into_iter().map(|(r, _)| r).collect();
    Ok(PipelineEvaluation {
        method: method.to_string(),
        summary: detection_summary(&scores),
        recovery: recovery_curve(&stream, blocks, layout, threshold)?,
        per_read,
    })
}

/// Library-derived state shared by every pipeline of a run.
pub struct Toolkit {
    pub library: MotifLibrary,
    pub pore: PoreModel,
    pub model: CallerModel,
    pub index: SpacerIndex,
    pub library_digest: String,
    pub pore_digest: String,
}

impl Toolkit {
    /// Library and pore model drawn from the master seed.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let library = generate_library(&cfg.library, cfg.seed)?;
        let pore = generate_pore_model(cfg.pore.kmer_length, cfg.seed)?;
        let model = CallerModel::new(&library, &cfg.layout, &pore)?;
        let index = build_spacer_index(&library, cfg.search.k_idx)?;
        Ok(Self {
            library_digest: digest_json(&library)?,
            pore_digest: digest_json(&pore)?,
            library,
            pore,
            model,
            index,
        })
    }

    /// Calls records of one method over simulated reads, in input order.
    pub fn run_method(
        &self,
        cfg: &ExperimentConfig,
        method: Method,
        reads: &[SimRead],
    ) -> Result<Vec<CallRecord>> {
        match method {
            Method::Caller => call_sim_reads(
                reads,
                &self.pore,
                &cfg.squiggle,
                cfg.seed,
                &self.model,
                &cfg.caller,
            ),
            Method::Am | Method::Ze => {
                let input: Vec<(u64, &[u8])> = reads
                    .iter()
                    .map(|r| (r.read_id(), r.read.bases.as_slice()))
                    .collect();
                run_search(
                    method,
                    &input,
                    &self.library,
                    &cfg.layout,
                    Some(&self.index),
                    &cfg.search,
                )
            }
        }
    }

    /// Decoding accuracy of each method on Poisson-coverage corpora at every
    /// configured coverage. Corpora share the master seed, so a read `(block, r)`
    /// is identical at every coverage that produces it.
    pub fn dilution(
        &self,
        cfg: &ExperimentConfig,
        blocks: &[Block],
        methods: &[Method],
    ) -> Result<Vec<DilutionRow>> {
        let mut rows = Vec::new();
        for &coverage in &cfg.recovery.dilution_coverages {
            let channel = ChannelParams {
                coverage: CoverageModel::Poisson(coverage),
                ..cfg.channel
            };
            let reads = simulate_corpus(blocks, &self.library, &cfg.layout, &channel, cfg.seed)?;
            let truth: Vec<TruthRecord> = reads.iter().map(SimRead::truth_record).collect();
            for &method in methods {
                let records = self.run_method(cfg, method, &reads)?;
                let ev = evaluate(
                    method.name(),
                    &records,
                    &truth,
                    blocks,
                    &cfg.layout,
                    cfg.recovery.threshold,
                )?;
                rows.push(DilutionRow {
                    pipeline: method.name().to_string(),
                    coverage,
                    reads: reads.len() as u64,
                    accuracy: ev.recovery.decoding_accuracy(),
                });
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{bytes_to_bits, encode};

    fn setup(n_bytes: usize) -> (MotifLibrary, BlockLayout, Vec<Block>) {
        let cfg = ExperimentConfig::default();
        let lib = generate_library(&cfg.library, 3).unwrap();
        let data: Vec<u8> = (0..n_bytes).map(|i| (i * 37 + 11) as u8).collect();
        let enc = encode(&bytes_to_bits(&data), &cfg.layout, &cfg.codec).unwrap();
        (lib, cfg.layout, enc.blocks)
    }

    #[test]
    fn default_config_roundtrips_through_toml() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
        let partial: ExperimentConfig =
            toml::from_str("seed = 7\n[squiggle]\nnoise_std = 3.0\n").unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.squiggle.noise_std, 3.0);
        assert_eq!(partial.caller, CallerParams::default());
    }

    #[test]
    fn mismatched_library_is_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.library.n_motifs = 9;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn arrival_rounds_cover_every_read_once() {
        let (_, _, blocks) = setup(40);
        let counts: Vec<u64> = (0..blocks.len() as u64).map(|b| b % 4).collect();
        let order = arrival_order(&blocks, &counts, 5);
        assert_eq!(order.len() as u64, counts.iter().sum::<u64>());
        for (b, &c) in counts.iter().enumerate() {
            let idx: Vec<u64> = order
                .iter()
                .filter(|(x, _)| *x == b)
                .map(|&(_, r)| r)
                .collect();
            assert_eq!(idx, (0..c).collect::<Vec<_>>());
        }
        assert!(order.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn reads_depend_only_on_block_and_index() {
        let (lib, layout, blocks) = setup(30);
        let ch = ChannelParams {
            coverage: CoverageModel::Fixed(3),
            ..ChannelParams::default()
        };
        let a = simulate_corpus(&blocks, &lib, &layout, &ch, 9).unwrap();
        let more = ChannelParams {
            coverage: CoverageModel::Fixed(5),
            ..ch
        };
        let b = simulate_corpus(&blocks, &lib, &layout, &more, 9).unwrap();
        assert_eq!(a.len(), blocks.len() * 3);
        for r in &a {
            let twin = b
                .iter()
                .find(|x| x.block_id() == r.block_id() && x.read_index == r.read_index)
                .unwrap();
            assert_eq!(twin.read.bases, r.read.bases);
            assert_eq!(twin.molecule, r.molecule);
        }
        assert_eq!(a, simulate_corpus(&blocks, &lib, &layout, &ch, 9).unwrap());
        assert!(a.iter().enumerate().all(|(i, r)| r.read_id() == i as u64));
        let mid = simulate_span(&blocks, &lib, &layout, &ch, 9, 7..12).unwrap();
        assert_eq!(mid, a[7..12]);
        assert!(simulate_span(&blocks, &lib, &layout, &ch, 9, 1000..2000)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn poisson_coverage_is_seeded_per_block() {
        let (_, _, blocks) = setup(200);
        let c = reads_per_block(&blocks, &CoverageModel::Poisson(7.0), 4).unwrap();
        assert_eq!(
            c,
            reads_per_block(&blocks, &CoverageModel::Poisson(7.0), 4).unwrap()
        );
        let mean = c.iter().sum::<u64>() as f64 / c.len() as f64;
        let sd = (7.0 / c.len() as f64).sqrt();
        assert!((mean - 7.0).abs() < 4.0 * sd, "{mean}");
        assert!(reads_per_block(&blocks, &CoverageModel::Poisson(0.0), 4)
            .unwrap()
            .iter()
            .all(|&n| n == 0));
    }

    #[test]
    fn noiseless_searches_recover_every_block() {
        let (lib, layout, blocks) = setup(25);
        let ch = ChannelParams {
            coverage: CoverageModel::Fixed(40),
            ..ChannelParams::noiseless()
        };
        let reads = simulate_corpus(&blocks, &lib, &layout, &ch, 2).unwrap();
        let truth: Vec<TruthRecord> = reads.iter().map(SimRead::truth_record).collect();
        let input: Vec<(u64, &[u8])> = reads
            .iter()
            .map(|r| (r.read_id(), r.read.bases.as_slice()))
            .collect();
        let index = build_spacer_index(&lib, 8).unwrap();
        for method in [Method::Ze, Method::Am] {
            let records = run_search(
                method,
                &input,
                &lib,
                &layout,
                Some(&index),
                &AmParams::default(),
            )
            .unwrap();
            let ev = evaluate(method.name(), &records, &truth, &blocks, &layout, 0.95).unwrap();
            assert_eq!(ev.summary.detected, 1.0, "{method}");
            assert_eq!(ev.summary.error, 0.0, "{method}");
            assert_eq!(ev.recovery.decoding_accuracy(), 1.0, "{method}");
        }
        assert!(run_search(
            Method::Caller,
            &input,
            &lib,
            &layout,
            None,
            &AmParams::default()
        )
        .is_err());
    }

    #[test]
    fn missing_records_count_as_dropped() {
        let (lib, layout, blocks) = setup(10);
        let ch = ChannelParams {
            coverage: CoverageModel::Fixed(2),
            ..ChannelParams::noiseless()
        };
        let reads = simulate_corpus(&blocks, &lib, &layout, &ch, 2).unwrap();
        let truth: Vec<TruthRecord> = reads.iter().map(SimRead::truth_record).collect();
        let ev = evaluate("none", &[], &truth, &blocks, &layout, 0.95).unwrap();
        assert_eq!(ev.summary.reads, reads.len());
        assert_eq!(ev.summary.reads_retained, 0);
        assert_eq!(ev.summary.detected, 0.0);
    }

    #[test]
    fn method_names_parse() {
        for m in [Method::Caller, Method::Am, Method::Ze] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("bwa".parse::<Method>().is_err());
    }
}
