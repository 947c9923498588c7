//! On-disk formats: JSON documents, FASTA-style reads, JSON-lines sidecars,
//! and the binary squiggle (`SQG1`) and emission (`EMX1`) containers.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::CodecMode;
use crate::ctc::Emissions;
use crate::error::{Error, Result};
use crate::library::{Block, BlockLayout, MotifId};
use crate::synthsim::{Orientation, Squiggle};

pub const SQUIGGLE_MAGIC: &[u8; 4] = b"SQG1";
pub const EMISSION_MAGIC: &[u8; 4] = b"EMX1";

/// 64-bit content digest as 16 hex digits: the leading bytes of SHA-256.
pub fn digest_bytes(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a value's compact JSON serialisation.
pub fn digest_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(digest_bytes(&serde_json::to_vec(value)?))
}

pub fn check_digest(what: &str, expected: &str, found: &str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DigestMismatch {
            what: what.into(),
            expected: expected.into(),
            found: found.into(),
        })
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Encoded blocks with everything needed to decode them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlocksFile {
    pub layout: BlockLayout,
    pub codec_mode: CodecMode,
    pub padding_bits: usize,
    pub library_digest: String,
    pub blocks: Vec<Block>,
}

impl BlocksFile {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        for (i, b) in self.blocks.iter().enumerate() {
            b.check(&self.layout)
                .map_err(|e| Error::format("blocks file", format!("block record {i}: {e}")))?;
        }
        Ok(())
    }
}

/// A read as stored in the reads file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FastaRead {
    pub read_id: u64,
    pub block_id: u64,
    pub orientation: Orientation,
    pub bases: Vec<u8>,
}

/// Writes `>read_id block_id=N orientation=±` records after a digest comment line.
pub fn write_reads<W: Write>(mut w: W, reads: &[FastaRead], library_digest: &str) -> Result<()> {
    writeln!(w, "#library_digest={library_digest}")?;
    for r in reads {
        writeln!(
            w,
            ">{} block_id={} orientation={}",
            r.read_id,
            r.block_id,
            r.orientation.symbol()
        )?;
        w.write_all(&r.bases)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Parses a reads file; returns the library digest from its comment line and the records.
pub fn read_reads<R: BufRead>(r: R) -> Result<(Option<String>, Vec<FastaRead>)> {
    let ctx = |line: usize| format!("reads file line {line}");
    let mut digest = None;
    let mut out: Vec<FastaRead> = Vec::new();
    let mut expect_seq = false;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(d) = rest.strip_prefix("library_digest=") {
                digest = Some(d.trim().to_string());
            }
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let mut fields = header.split_whitespace();
            let read_id = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::format(ctx(n), "missing numeric read id"))?;
            let mut block_id = None;
            let mut orientation = None;
            for f in fields {
                if let Some(v) = f.strip_prefix("block_id=") {
                    block_id = v.parse().ok();
                } else if let Some(v) = f.strip_prefix("orientation=") {
                    orientation = Orientation::from_symbol(v);
                }
            }
            out.push(FastaRead {
                read_id,
                block_id: block_id.ok_or_else(|| Error::format(ctx(n), "missing block_id"))?,
                orientation: orientation
                    .ok_or_else(|| Error::format(ctx(n), "missing orientation"))?,
                bases: Vec::new(),
            });
            expect_seq = true;
            continue;
        }
        let rec = out
            .last_mut()
            .filter(|_| expect_seq)
            .ok_or_else(|| Error::format(ctx(n), "sequence line before any header"))?;
        crate::dna::validate(line.as_bytes()).map_err(|e| Error::format(ctx(n), e.to_string()))?;
        rec.bases.extend_from_slice(line.as_bytes());
    }
    Ok((digest, out))
}

/// Ground truth of one simulated read, kept apart from the reads themselves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub read_id: u64,
    pub block_id: u64,
    /// Index of the read among its block's reads.
    pub read_index: u64,
    pub orientation: Orientation,
    pub truth_motifs: Vec<MotifId>,
}

/// First line of every JSON-lines file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonlHeader {
    pub format: String,
    pub library_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pore_digest: Option<String>,
    /// Producer of a calls file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

pub fn write_jsonl<W: Write, T: Serialize>(
    mut w: W,
    header: &JsonlHeader,
    records: &[T],
) -> Result<()> {
    serde_json::to_writer(&mut w, header)?;
    writeln!(w)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead, T: DeserializeOwned>(
    r: R,
    format: &str,
) -> Result<(JsonlHeader, Vec<T>)> {
    let mut lines = r.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::format(format, "empty file"))?;
    let header: JsonlHeader =
        serde_json::from_str(&first?).map_err(|e| Error::format(format, format!("line 1: {e}")))?;
    if header.format != format {
        return Err(Error::format(
            format,
            format!("file holds `{}` records", header.format),
        ));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::format(format, format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok((header, out))
}

/// Status of a read in a calls file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CallStatus {
    Retained,
    Rejected,
    Unmappable,
}

/// One token of a calls record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    /// Column in the token alphabet.
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<usize>,
    /// Confidence; absent for the baseline searches.
    pub p: Option<f64>,
    pub q: Option<f64>,
    /// Survived the per-token confidence filter.
    pub kept: bool,
}

/// One read of a calls file, shared by the caller and the baseline searches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub read_id: u64,
    pub status: CallStatus,
    pub orientation: Option<Orientation>,
    pub read_q: Option<f64>,
    pub tokens: Vec<TokenRecord>,
}

impl CallRecord {
    /// Kept slot calls of a retained read; `None` otherwise.
    pub fn slot_calls(&self, n_motifs: usize, n_slots: usize) -> Option<crate::search::SlotCalls> {
        (self.status == CallStatus::Retained).then(|| self.collect_calls(n_motifs, n_slots, true))
    }

    /// Every slot call, ignoring the read and token filters.
    pub fn all_slot_calls(&self, n_motifs: usize, n_slots: usize) -> crate::search::SlotCalls {
        self.collect_calls(n_motifs, n_slots, false)
    }

    fn collect_calls(
        &self,
        n_motifs: usize,
        n_slots: usize,
        kept_only: bool,
    ) -> crate::search::SlotCalls {
        let mut calls = crate::search::SlotCalls::empty(n_slots);
        for t in self.tokens.iter().filter(|t| t.kept || !kept_only) {
            if let Some(s) = t.slot.filter(|&s| s < n_slots && t.id < n_motifs) {
                calls.calls[s] = Some(t.id as MotifId);
            }
        }
        calls.orientation = self.orientation;
        calls
    }
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads the 4-byte magic, or reports a clean end of stream.
fn read_magic_or_eof<R: Read>(r: &mut R) -> Result<Option<[u8; 4]>> {
    let mut b = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        let n = r.read(&mut b[got..])?;
        if n == 0 {
            return if got == 0 {
                Ok(None)
            } else {
                Err(Error::format("binary file", "truncated record"))
            };
        }
        got += n;
    }
    Ok(Some(b))
}

fn write_id<W: Write>(w: &mut W, id: &str) -> Result<()> {
    w.write_all(&(id.len() as u32).to_le_bytes())?;
    w.write_all(id.as_bytes())?;
    Ok(())
}

/// `SQG1`, then per record: id length and bytes, sample count, little-endian f32 samples.
pub fn write_squiggles<W: Write>(mut w: W, squiggles: &[Squiggle]) -> Result<()> {
    w.write_all(SQUIGGLE_MAGIC)?;
    for s in squiggles {
        write_id(&mut w, &s.read_id.to_string())?;
        w.write_all(&(s.samples.len() as u32).to_le_bytes())?;
        for x in &s.samples {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_squiggles<R: Read>(mut r: R) -> Result<Vec<Squiggle>> {
    let magic = read_magic_or_eof(&mut r)?;
    if magic.as_ref() != Some(SQUIGGLE_MAGIC) {
        return Err(Error::format("squiggle file", "missing SQG1 magic"));
    }
    let mut out = Vec::new();
    loop {
        let mut len = [0u8; 4];
        match r.read(&mut len[..1])? {
            0 => break,
            _ => r
                .read_exact(&mut len[1..])
                .map_err(|e| Error::format("squiggle file", e.to_string()))?,
        }
        let ctx = format!("squiggle record {}", out.len());
        let mut id = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut id)
            .map_err(|e| Error::format(&ctx, e.to_string()))?;
        let read_id = std::str::from_utf8(&id)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(&ctx, "read id is not a number"))?;
        let n = read_u32(&mut r).map_err(|e| Error::format(&ctx, e.to_string()))? as usize;
        let mut bytes = vec![0u8; n * 4];
        r.read_exact(&mut bytes)
            .map_err(|e| Error::format(&ctx, e.to_string()))?;
        let samples = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        out.push(Squiggle {
            read_id,
            samples,
            truth: None,
        });
    }
    Ok(out)
}

/// `EMX1`, then per record: id length and bytes, rows, columns, row-major little-endian f32.
pub fn write_emissions<W: Write>(mut w: W, records: &[(String, Emissions<f32>)]) -> Result<()> {
    w.write_all(EMISSION_MAGIC)?;
    for (id, em) in records {
        write_id(&mut w, id)?;
        w.write_all(&(em.n_windows() as u32).to_le_bytes())?;
        w.write_all(&(em.n_tokens() as u32).to_le_bytes())?;
        for x in em.as_slice() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_emissions<R: Read>(mut r: R) -> Result<Vec<(String, Emissions<f32>)>> {
    let magic = read_magic_or_eof(&mut r)?;
    if magic.as_ref() != Some(EMISSION_MAGIC) {
        return Err(Error::format("emission file", "missing EMX1 magic"));
    }
    let mut out = Vec::new();
    loop {
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? == 0 {
            break;
        }
        let ctx = format!("emission record {}", out.len());
        let mut rest = [0u8; 3];
        r.read_exact(&mut rest)
            .map_err(|e| Error::format(&ctx, e.to_string()))?;
        let len = u32::from_le_bytes([probe[0], rest[0], rest[1], rest[2]]) as usize;
        let mut id = vec![0u8; len];
        r.read_exact(&mut id)
            .map_err(|e| Error::format(&ctx, e.to_string()))?;
        let id = String::from_utf8(id).map_err(|e| Error::format(&ctx, e.to_string()))?;
        let rows = read_u32(&mut r).map_err(|e| Error::format(&ctx, e.to_string()))? as usize;
        let cols = read_u32(&mut r).map_err(|e| Error::format(&ctx, e.to_string()))? as usize;
        let mut bytes = vec![0u8; rows * cols * 4];
        r.read_exact(&mut bytes)
            .map_err(|e| Error::format(&ctx, e.to_string()))?;
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        out.push((id, Emissions::new(rows, cols, data)?));
    }
    Ok(out)
}

/// Buffered writer for a new file.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

pub fn open_buffered(path: &Path) -> Result<BufReader<File>> {
    open(path)
}
