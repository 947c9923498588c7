use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use log::info;
use motifcall::caller::CallOutcome;
use motifcall::codec::{bits_to_bytes, bytes_to_bits, decode_stream, encode, CodecConfig};
use motifcall::experiment::{
    evaluate, run_caller, run_search, simulate_corpus, ExperimentConfig, Method,
    PipelineEvaluation, SimRead, Toolkit,
};
use motifcall::formats::{
    check_digest, open_buffered, read_json, read_jsonl, read_reads, read_squiggles, to_json_bytes,
    write_emissions, write_jsonl, write_reads, write_squiggles, BlocksFile, CallRecord, CallStatus,
    FastaRead, JsonlHeader, TruthRecord,
};
use motifcall::library::{Block, CompositeSymbol};
use motifcall::recovery::{quality_sweep, RecoveryReport};
use motifcall::selftest;
use rayon::prelude::*;

use crate::output::{Manifest, OutDir};

pub const TRUTH_FORMAT: &str = "truth";
pub const CALLS_FORMAT: &str = "calls";

fn calls_file_name(method: Method) -> String {
    format!("calls_{method}.jsonl")
}

fn write_to_vec(f: impl FnOnce(&mut Vec<u8>) -> motifcall::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn load_blocks(path: &Path, cfg: &ExperimentConfig, tk: &Toolkit) -> Result<BlocksFile> {
    let file: BlocksFile =
        read_json(path).with_context(|| format!("reading blocks file {}", path.display()))?;
    file.validate()
        .with_context(|| format!("validating {}", path.display()))?;
    check_digest("library", &tk.library_digest, &file.library_digest)
        .with_context(|| format!("blocks file {}", path.display()))?;
    ensure!(
        file.layout == cfg.layout,
        "blocks file {} was encoded with a different layout",
        path.display()
    );
    Ok(file)
}

fn load_truth(path: &Path, tk: &Toolkit) -> Result<Vec<TruthRecord>> {
    let (header, truth) = read_jsonl(open_buffered(path)?, TRUTH_FORMAT)
        .with_context(|| format!("reading truth file {}", path.display()))?;
    check_digest("library", &tk.library_digest, &header.library_digest)
        .with_context(|| format!("truth file {}", path.display()))?;
    Ok(truth)
}

fn load_calls(path: &Path, tk: &Toolkit) -> Result<(String, Vec<CallRecord>)> {
    let (header, calls): (JsonlHeader, Vec<CallRecord>) =
        read_jsonl(open_buffered(path)?, CALLS_FORMAT)
            .with_context(|| format!("reading calls file {}", path.display()))?;
    check_digest("library", &tk.library_digest, &header.library_digest)
        .with_context(|| format!("calls file {}", path.display()))?;
    if let Some(pore) = &header.pore_digest {
        check_digest("pore model", &tk.pore_digest, pore)
            .with_context(|| format!("calls file {}", path.display()))?;
    }
    let method = header.method.unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| "calls".into(), |s| s.to_string_lossy().into_owned())
    });
    Ok((method, calls))
}

/// Rejects calls whose read ids the truth file does not know.
fn check_corpus(calls: &[CallRecord], truth: &[TruthRecord], blocks: &[Block]) -> Result<()> {
    let ids: HashSet<u64> = truth.iter().map(|t| t.read_id).collect();
    if let Some(c) = calls.iter().find(|c| !ids.contains(&c.read_id)) {
        bail!(
            "corpus mismatch: read {} has calls but no truth record",
            c.read_id
        );
    }
    let block_ids: HashSet<u64> = blocks.iter().map(|b| b.block_id).collect();
    if let Some(t) = truth.iter().find(|t| !block_ids.contains(&t.block_id)) {
        bail!(
            "corpus mismatch: read {} belongs to block {} absent from the blocks file",
            t.read_id,
            t.block_id
        );
    }
    Ok(())
}

pub fn encode_cmd(cfg: &ExperimentConfig, out: &Path, input: &Path) -> Result<()> {
    let tk = Toolkit::from_config(cfg)?;
    let data = fs::read(input).with_context(|| format!("reading input {}", input.display()))?;
    let mut dir = OutDir::create(out, "encode")?;
    dir.set_digests(&tk.library_digest, None);
    let enc = encode(&bytes_to_bits(&data), &cfg.layout, &cfg.codec)?;
    info!(
        "{} bytes -> {} blocks ({} padding bits)",
        data.len(),
        enc.blocks.len(),
        enc.padding_bits
    );
    let file = BlocksFile {
        layout: cfg.layout,
        codec_mode: cfg.codec.mode,
        padding_bits: enc.padding_bits,
        library_digest: tk.library_digest.clone(),
        blocks: enc.blocks,
    };
    dir.write("blocks.json", &to_json_bytes(&file)?)?;
    dir.write("library.json", &to_json_bytes(&tk.library)?)?;
    dir.finish(cfg)
}

pub fn simulate_cmd(
    cfg: &ExperimentConfig,
    out: &Path,
    blocks_path: &Path,
    squiggles: bool,
) -> Result<()> {
    let tk = Toolkit::from_config(cfg)?;
    let file = load_blocks(blocks_path, cfg, &tk)?;
    let mut dir = OutDir::create(out, "simulate")?;
    dir.set_digests(
        &tk.library_digest,
        squiggles.then_some(tk.pore_digest.as_str()),
    );
    let reads = simulate_corpus(
        &file.blocks,
        &tk.library,
        &cfg.layout,
        &cfg.channel,
        cfg.seed,
    )?;
    info!("{} blocks -> {} reads", file.blocks.len(), reads.len());

    let fasta: Vec<FastaRead> = reads
        .iter()
        .map(|r| FastaRead {
            read_id: r.read_id(),
            block_id: r.block_id(),
            orientation: r.read.orientation,
            bases: r.read.bases.clone(),
        })
        .collect();
    dir.write(
        "reads.fa",
        &write_to_vec(|w| write_reads(w, &fasta, &tk.library_digest))?,
    )?;
    let truth: Vec<TruthRecord> = reads.iter().map(SimRead::truth_record).collect();
    let header = JsonlHeader {
        format: TRUTH_FORMAT.into(),
        library_digest: tk.library_digest.clone(),
        pore_digest: None,
        method: None,
    };
    dir.write(
        "truth.jsonl",
        &write_to_vec(|w| write_jsonl(w, &header, &truth))?,
    )?;
    if squiggles {
        let traces = reads
            .par_iter()
            .map(|r| {
                let mut sq = r.render(&tk.pore, &cfg.squiggle, cfg.seed)?;
                sq.truth = None;
                Ok(sq)
            })
            .collect::<motifcall::Result<Vec<_>>>()?;
        dir.write(
            "squiggles.sqg",
            &write_to_vec(|w| write_squiggles(w, &traces))?,
        )?;
    }
    dir.finish(cfg)
}

fn calls_header(tk: &Toolkit, method: Method) -> JsonlHeader {
    JsonlHeader {
        format: CALLS_FORMAT.into(),
        library_digest: tk.library_digest.clone(),
        pore_digest: (method == Method::Caller).then(|| tk.pore_digest.clone()),
        method: Some(method.name().into()),
    }
}

pub fn call_cmd(
    cfg: &ExperimentConfig,
    out: &Path,
    squiggles: &Path,
    emissions: bool,
) -> Result<()> {
    let tk = Toolkit::from_config(cfg)?;
    if let Some(m) = Manifest::beside(squiggles)? {
        if let Some(d) = &m.library_digest {
            check_digest("library", &tk.library_digest, d)
                .with_context(|| format!("squiggles {}", squiggles.display()))?;
        }
        if let Some(d) = &m.pore_digest {
            check_digest("pore model", &tk.pore_digest, d)
                .with_context(|| format!("squiggles {}", squiggles.display()))?;
        }
    }
    let traces = read_squiggles(open_buffered(squiggles)?)
        .with_context(|| format!("reading squiggles {}", squiggles.display()))?;
    let mut dir = OutDir::create(out, "call")?;
    dir.set_digests(&tk.library_digest, Some(&tk.pore_digest));
    let results = run_caller(&traces, &tk.model, cfg.squiggle.noise_std, &cfg.caller);

    let count = |s: CallStatus| results.iter().filter(|(r, _)| r.status == s).count();
    let tokens_in: usize = results.iter().map(|(r, _)| r.tokens.len()).sum();
    let tokens_kept: usize = results
        .iter()
        .filter(|(r, _)| r.status == CallStatus::Retained)
        .map(|(r, _)| r.tokens.iter().filter(|t| t.kept).count())
        .sum();
    info!(
        "{} reads: {} retained, {} rejected, {} unmappable; {tokens_kept}/{tokens_in} tokens kept",
        results.len(),
        count(CallStatus::Retained),
        count(CallStatus::Rejected),
        count(CallStatus::Unmappable)
    );

    let records: Vec<CallRecord> = results.iter().map(|(r, _)| r.clone()).collect();
    let header = calls_header(&tk, Method::Caller);
    dir.write(
        &calls_file_name(Method::Caller),
        &write_to_vec(|w| write_jsonl(w, &header, &records))?,
    )?;
    if emissions {
        let mats: Vec<(String, _)> = results
            .iter()
            .filter_map(|(r, o)| match o {
                CallOutcome::Called { emissions, .. } => {
                    Some((r.read_id.to_string(), emissions.cast::<f32>()))
                }
                CallOutcome::Unmappable => None,
            })
            .collect();
        dir.write(
            "emissions.emx",
            &write_to_vec(|w| write_emissions(w, &mats))?,
        )?;
    }
    dir.finish(cfg)
}

pub fn search_cmd(
    cfg: &ExperimentConfig,
    out: &Path,
    reads_path: &Path,
    method: Method,
) -> Result<()> {
    ensure!(
        method != Method::Caller,
        "search takes --method ze or am; use `call` for the caller"
    );
    let tk = Toolkit::from_config(cfg)?;
    let (digest, reads) = read_reads(open_buffered(reads_path)?)
        .with_context(|| format!("reading reads {}", reads_path.display()))?;
    let digest = digest.with_context(|| {
        format!(
            "reads file {} carries no library digest",
            reads_path.display()
        )
    })?;
    check_digest("library", &tk.library_digest, &digest)
        .with_context(|| format!("reads file {}", reads_path.display()))?;
    let mut dir = OutDir::create(out, "search")?;
    dir.set_digests(&tk.library_digest, None);
    let input: Vec<(u64, &[u8])> = reads
        .iter()
        .map(|r| (r.read_id, r.bases.as_slice()))
        .collect();
    let records = run_search(
        method,
        &input,
        &tk.library,
        &cfg.layout,
        Some(&tk.index),
        &cfg.search,
    )?;
    let with_calls = records.iter().filter(|r| !r.tokens.is_empty()).count();
    info!(
        "{method}: {with_calls}/{} reads with at least one call",
        records.len()
    );
    let header = calls_header(&tk, method);
    dir.write(
        &calls_file_name(method),
        &write_to_vec(|w| write_jsonl(w, &header, &records))?,
    )?;
    dir.finish(cfg)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn curve_csv(report: &RecoveryReport) -> String {
    let mut s = String::from("reads_per_block,slot_fraction,blocks_recovered\n");
    for p in &report.curve {
        let _ = writeln!(
            s,
            "{},{},{}",
            p.reads_per_block, p.slot_fraction, p.blocks_recovered
        );
    }
    s
}

fn blocks_csv(report: &RecoveryReport) -> String {
    let mut s = String::from("block_id,reads,recovered,slots_decided,last_slot_decided_at\n");
    for b in &report.blocks {
        let decided = b.slot_decided_at.iter().filter(|x| x.is_some()).count();
        let last = if decided == b.slot_decided_at.len() {
            b.slot_decided_at
                .iter()
                .flatten()
                .max()
                .map(|x| x.to_string())
        } else {
            None
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            b.block_id,
            b.reads,
            b.recovered,
            decided,
            last.unwrap_or_default()
        );
    }
    s
}

/// Bytes of the recovered blocks when every slot of every block is decided.
fn decode_recovered(report: &RecoveryReport, file: &BlocksFile) -> Result<Option<Vec<u8>>> {
    let (m, k) = (file.layout.library_size, file.layout.motifs_per_symbol);
    let mut blocks = Vec::with_capacity(report.blocks.len());
    for b in &report.blocks {
        let address: Option<Vec<_>> = b.decision.address.iter().copied().collect();
        let payloads: Option<Vec<_>> = b.decision.payloads.iter().cloned().collect();
        let (Some(address), Some(payloads)) = (address, payloads) else {
            return Ok(None);
        };
        blocks.push(Block {
            block_id: b.block_id,
            address,
            payloads: payloads
                .into_iter()
                .map(|ids| CompositeSymbol::new(ids, m, k))
                .collect::<motifcall::Result<_>>()?,
        });
    }
    let bits = decode_stream(
        &blocks,
        &file.layout,
        &CodecConfig::new(file.codec_mode),
        file.padding_bits,
    )?;
    Ok(Some(bits_to_bytes(&bits)))
}

struct Corpus {
    tk: Toolkit,
    blocks: BlocksFile,
    truth: Vec<TruthRecord>,
}

impl Corpus {
    fn load(cfg: &ExperimentConfig, blocks: &Path, truth: &Path) -> Result<Self> {
        let tk = Toolkit::from_config(cfg)?;
        let blocks = load_blocks(blocks, cfg, &tk)?;
        let truth = load_truth(truth, &tk)?;
        Ok(Self { tk, blocks, truth })
    }

    fn evaluate(&self, cfg: &ExperimentConfig, path: &Path) -> Result<PipelineEvaluation> {
        let (method, calls) = load_calls(path, &self.tk)?;
        check_corpus(&calls, &self.truth, &self.blocks.blocks)
            .with_context(|| format!("calls file {}", path.display()))?;
        Ok(evaluate(
            &method,
            &calls,
            &self.truth,
            &self.blocks.blocks,
            &cfg.layout,
            cfg.recovery.threshold,
        )?)
    }
}

pub fn recover_cmd(
    cfg: &ExperimentConfig,
    out: &Path,
    calls: &Path,
    truth: &Path,
    blocks: &Path,
) -> Result<()> {
    let corpus = Corpus::load(cfg, blocks, truth)?;
    let ev = corpus.evaluate(cfg, calls)?;
    let mut dir = OutDir::create(out, "recover")?;
    dir.set_digests(&corpus.tk.library_digest, None);
    info!(
        "{}: detected {:.4}, error {:.4}, coverage to {} = {}, accuracy {:.4}",
        ev.method,
        ev.summary.detected,
        ev.summary.error,
        cfg.recovery.threshold,
        opt(ev.recovery.coverage_to_threshold),
        ev.recovery.decoding_accuracy()
    );
    let name = &ev.method;
    dir.write(&format!("recovery_{name}.json"), &to_json_bytes(&ev)?)?;
    dir.write(
        &format!("curve_{name}.csv"),
        curve_csv(&ev.recovery).as_bytes(),
    )?;
    dir.write(
        &format!("blocks_{name}.csv"),
        blocks_csv(&ev.recovery).as_bytes(),
    )?;
    match decode_recovered(&ev.recovery, &corpus.blocks)? {
        Some(bytes) => dir.write(&format!("decoded_{name}.bin"), &bytes)?,
        None => info!("{name}: some slots undecided, no payload decoded"),
    }
    dir.finish(cfg)
}

pub fn report_cmd(
    cfg: &ExperimentConfig,
    out: &Path,
    calls: &[std::path::PathBuf],
    truth: &Path,
    blocks: &Path,
    dilution: bool,
) -> Result<()> {
    ensure!(
        !calls.is_empty() || dilution,
        "report needs --calls files or --dilution"
    );
    let corpus = Corpus::load(cfg, blocks, truth)?;
    let evals = calls
        .iter()
        .map(|p| corpus.evaluate(cfg, p))
        .collect::<Result<Vec<_>>>()?;
    let mut dir = OutDir::create(out, "report")?;
    dir.set_digests(&corpus.tk.library_digest, Some(&corpus.tk.pore_digest));

    let mut table = String::from(
        "method,reads,reads_retained,detected,error,coverage_to_threshold,full_convergence,decoding_accuracy\n",
    );
    for ev in &evals {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            ev.method,
            ev.summary.reads,
            ev.summary.reads_retained,
            ev.summary.detected,
            ev.summary.error,
            opt(ev.recovery.coverage_to_threshold),
            opt(ev.recovery.full_convergence),
            ev.recovery.decoding_accuracy()
        );
        dir.write(
            &format!("curve_{}.csv", ev.method),
            curve_csv(&ev.recovery).as_bytes(),
        )?;
        println!(
            "{:<8} detected {:>6.2}%  error {:>5.2}%  coverage@{} {:>8}",
            ev.method,
            100.0 * ev.summary.detected,
            100.0 * ev.summary.error,
            cfg.recovery.threshold,
            opt(ev.recovery.coverage_to_threshold)
        );
    }
    dir.write("comparison.csv", table.as_bytes())?;
    dir.write("comparison.json", &to_json_bytes(&evals)?)?;

    let mut sweep = String::from("method,threshold,retained,detected,error\n");
    for ev in &evals {
        if ev.per_read.iter().all(|(q, _)| q.is_none()) {
            continue;
        }
        let scored: Vec<_> = ev
            .per_read
            .iter()
            .filter_map(|&(q, s)| s.map(|s| (q, s)))
            .collect();
        for row in quality_sweep(&scored, &cfg.recovery.quality_thresholds) {
            let _ = writeln!(
                sweep,
                "{},{},{},{},{}",
                ev.method,
                row.threshold,
                row.retained,
                opt(row.detected),
                opt(row.error)
            );
        }
    }
    dir.write("quality_sweep.csv", sweep.as_bytes())?;

    if dilution {
        let rows = corpus.tk.dilution(
            cfg,
            &corpus.blocks.blocks,
            &[Method::Caller, Method::Am, Method::Ze],
        )?;
        let mut s = String::from("pipeline,coverage,reads,accuracy\n");
        for r in &rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                r.pipeline, r.coverage, r.reads, r.accuracy
            );
        }
        dir.write("dilution.csv", s.as_bytes())?;
    }
    dir.finish(cfg)
}

/// Runs the oracle suites; fails when any suite fails.
pub fn selftest_cmd(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<()> {
    let reports = selftest::run_all(cfg.seed)?;
    for r in &reports {
        println!(
            "{} {} ({} cases, max error {:e}, tolerance {:e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.max_error,
            r.tolerance
        );
    }
    if let Some(out) = out {
        let mut dir = OutDir::create(out, "selftest")?;
        dir.write("selftest.json", &to_json_bytes(&reports)?)?;
        dir.finish(cfg)?;
    }
    ensure!(reports.iter().all(|r| r.passed), "selftest failed");
    Ok(())
}
