use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::library::MotifLibrary;

/// Where a k-mer occurs inside a spacer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Posting {
    pub spacer: u32,
    pub offset: u32,
}

/// k-mer → postings over every spacer of a library.
#[derive(Clone, Debug)]
pub struct SpacerIndex {
    k: usize,
    map: HashMap<u64, Vec<Posting>>,
    n_postings: usize,
}

pub(crate) fn pack_kmer(kmer: &[u8]) -> Option<u64> {
    kmer.iter().try_fold(0u64, |acc, &b| {
        let code = match b {
            b'A' => 0,
            b'C' => 1,
            b'G' => 2,
            b'T' => 3,
            _ => return None,
        };
        Some((acc << 2) | code)
    })
}

impl SpacerIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_postings(&self) -> usize {
        self.n_postings
    }

    pub fn lookup(&self, kmer: &[u8]) -> &[Posting] {
        pack_kmer(kmer)
            .and_then(|key| self.map.get(&key))
            .map_or(&[], Vec::as_slice)
    }
}

/// Indexes every k-mer of every spacer; a k-mer shared by several spacers gets
/// one posting per occurrence.
pub fn build_spacer_index(library: &MotifLibrary, k: usize) -> Result<SpacerIndex> {
    if k == 0 || k > library.spacer_length || k > 32 {
        return Err(Error::InvalidParameter(format!(
            "index k-mer length {k} must be in 1..=min(32, spacer length {})",
            library.spacer_length
        )));
    }
    let mut map: HashMap<u64, Vec<Posting>> = HashMap::new();
    let mut n_postings = 0;
    for (j, spacer) in library.spacers.iter().enumerate() {
        for (offset, kmer) in spacer.as_bytes().windows(k).enumerate() {
            let key = pack_kmer(kmer).ok_or_else(|| Error::format("spacer", "non-ACGT base"))?;
            map.entry(key).or_default().push(Posting {
                spacer: j as u32,
                offset: offset as u32,
            });
            n_postings += 1;
        }
    }
    Ok(SpacerIndex { k, map, n_postings })
}
