//! Motif libraries, block layouts, and blocks of composite symbols.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dna::{self, edit_distance};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from, stream};

/// Identifier of a payload motif, `0..M`.
pub type MotifId = u32;

/// Payload motifs plus position-specific spacers.
///
/// Serialized with the field names `motif_length`, `spacer_length`, `motifs`
/// and `spacers`; a motif's id is its index in `motifs` and a spacer's
/// position is its index in `spacers`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifLibrary {
    pub motif_length: usize,
    pub spacer_length: usize,
    pub motifs: Vec<String>,
    pub spacers: Vec<String>,
}

impl MotifLibrary {
    pub fn n_motifs(&self) -> usize {
        self.motifs.len()
    }

    pub fn n_spacers(&self) -> usize {
        self.spacers.len()
    }

    pub fn motif(&self, id: MotifId) -> &[u8] {
        self.motifs[id as usize].as_bytes()
    }

    pub fn spacer(&self, position: usize) -> &[u8] {
        self.spacers[position].as_bytes()
    }

    /// Checks every structural invariant except the edit-distance guarantee,
    /// which is a generation-time property (see [`MotifLibrary::min_motif_distance`]).
    pub fn validate(&self) -> Result<()> {
        let bad = |r: String| Err(Error::format("motif library", r));
        if self.motifs.len() < 2 {
            return bad("need at least two motifs".into());
        }
        for (i, m) in self.motifs.iter().enumerate() {
            dna::validate(m.as_bytes())?;
            if m.len() != self.motif_length {
                return bad(format!(
                    "motif {i} has length {}, expected {}",
                    m.len(),
                    self.motif_length
                ));
            }
        }
        for (i, s) in self.spacers.iter().enumerate() {
            dna::validate(s.as_bytes())?;
            if s.len() != self.spacer_length {
                return bad(format!(
                    "spacer {i} has length {}, expected {}",
                    s.len(),
                    self.spacer_length
                ));
            }
        }
        let all: Vec<&String> = self.motifs.iter().chain(&self.spacers).collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if all[i] == all[j] {
                    return bad(format!("duplicate sequence {}", all[i]));
                }
            }
        }
        Ok(())
    }

    /// Smallest pairwise edit distance between motifs.
    pub fn min_motif_distance(&self) -> usize {
        let mut best = usize::MAX;
        for i in 0..self.motifs.len() {
            for j in i + 1..self.motifs.len() {
                best = best.min(edit_distance(self.motif(i as u32), self.motif(j as u32)));
            }
        }
        best
    }
}

/// Parameters of [`generate_library`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LibraryParams {
    pub n_motifs: usize,
    pub motif_length: usize,
    pub n_spacers: usize,
    pub spacer_length: usize,
    pub d_min: usize,
}

impl Default for LibraryParams {
    fn default() -> Self {
        Self {
            n_motifs: 8,
            motif_length: 25,
            n_spacers: 10,
            spacer_length: 40,
            d_min: 10,
        }
    }
}

const MAX_ATTEMPTS_PER_SEQUENCE: usize = 10_000;

fn random_bases(rng: &mut impl Rng, len: usize) -> String {
    (0..len)
        .map(|_| dna::Base::from_code(rng.random_range(0..4u8)).to_ascii() as char)
        .collect()
}

fn sample_separated(
    rng: &mut impl Rng,
    count: usize,
    len: usize,
    d_min: usize,
    forbidden: &[String],
) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts >= MAX_ATTEMPTS_PER_SEQUENCE * count.max(1) {
            return Err(Error::LibraryUnsatisfiable {
                wanted: count,
                length: len,
                d_min,
                attempts,
            });
        }
        attempts += 1;
        let cand = random_bases(rng, len);
        let ok = out
            .iter()
            .all(|o| edit_distance(o.as_bytes(), cand.as_bytes()) >= d_min.max(1))
            && !forbidden.contains(&cand);
        if ok {
            out.push(cand);
        }
    }
    Ok(out)
}

/// Draws a library by rejection sampling uniform random base strings.
///
/// Motifs are pairwise at least `d_min` apart in edit distance. Spacers get the
/// same separation when `d_min <= spacer_length`, and are always distinct from
/// each other and from every motif.
pub fn generate_library(params: &LibraryParams, seed: u64) -> Result<MotifLibrary> {
    let LibraryParams {
        n_motifs,
        motif_length,
        n_spacers,
        spacer_length,
        d_min,
    } = *params;
    if n_motifs < 2 {
        return Err(Error::InvalidParameter(format!(
            "need M >= 2 motifs, got {n_motifs}"
        )));
    }
    if motif_length == 0 || spacer_length == 0 {
        return Err(Error::InvalidParameter(
            "motif and spacer lengths must be >= 1".into(),
        ));
    }
    if d_min > motif_length {
        return Err(Error::LibraryUnsatisfiable {
            wanted: n_motifs,
            length: motif_length,
            d_min,
            attempts: 0,
        });
    }
    let mut rng = rng_from(derive_seed(seed, &[stream::LIBRARY]));
    let motifs = sample_separated(&mut rng, n_motifs, motif_length, d_min, &[])?;
    let spacer_sep = if d_min <= spacer_length { d_min } else { 1 };
    let spacers = sample_separated(&mut rng, n_spacers, spacer_length, spacer_sep, &motifs)?;
    let lib = MotifLibrary {
        motif_length,
        spacer_length,
        motifs,
        spacers,
    };
    Ok(lib)
}

/// Slot geometry of one oligo.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockLayout {
    pub n_address_slots: usize,
    pub n_payload_slots: usize,
    /// `k`: motifs mixed into one composite payload symbol.
    pub motifs_per_symbol: usize,
    /// `M`: library size.
    pub library_size: usize,
    pub spacer_length: usize,
}

impl Default for BlockLayout {
    fn default() -> Self {
        Self {
            n_address_slots: 1,
            n_payload_slots: 8,
            motifs_per_symbol: 4,
            library_size: 8,
            spacer_length: 40,
        }
    }
}

impl BlockLayout {
    pub fn total_slots(&self) -> usize {
        self.n_address_slots + self.n_payload_slots
    }

    /// One spacer flanks every slot boundary.
    pub fn n_spacers(&self) -> usize {
        self.total_slots() + 1
    }

    pub fn oligo_length(&self, motif_length: usize) -> usize {
        self.total_slots() * motif_length + self.n_spacers() * self.spacer_length
    }

    pub fn is_address_slot(&self, slot: usize) -> bool {
        slot < self.n_address_slots
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.motifs_per_symbol;
        if k == 0 || k > self.library_size {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k <= M, got k={k}, M={}",
                self.library_size
            )));
        }
        if self.n_payload_slots == 0 {
            return Err(Error::InvalidParameter(
                "need at least one payload slot".into(),
            ));
        }
        Ok(())
    }

    /// Checks that a library has enough motifs and spacers for this layout.
    pub fn check_library(&self, lib: &MotifLibrary) -> Result<()> {
        self.validate()?;
        if lib.n_motifs() != self.library_size {
            return Err(Error::InvalidParameter(format!(
                "layout expects M={} motifs, library has {}",
                self.library_size,
                lib.n_motifs()
            )));
        }
        if lib.n_spacers() < self.n_spacers() || lib.spacer_length != self.spacer_length {
            return Err(Error::InvalidParameter(format!(
                "layout needs {} spacers of length {}, library has {} of length {}",
                self.n_spacers(),
                self.spacer_length,
                lib.n_spacers(),
                lib.spacer_length
            )));
        }
        Ok(())
    }
}

/// A sorted k-subset of motif ids stored in one payload slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompositeSymbol(Vec<MotifId>);

impl CompositeSymbol {
    pub fn new(ids: Vec<MotifId>, m: usize, k: usize) -> Result<Self> {
        let sym = CompositeSymbol(ids);
        sym.check(m, k)?;
        Ok(sym)
    }

    /// Wraps ids without validation; see [`CompositeSymbol::check`].
    pub fn from_ids_unchecked(ids: Vec<MotifId>) -> Self {
        CompositeSymbol(ids)
    }

    pub fn check(&self, m: usize, k: usize) -> Result<()> {
        let ok = self.0.len() == k
            && self.0.windows(2).all(|w| w[0] < w[1])
            && self.0.iter().all(|&id| (id as usize) < m);
        if ok {
            Ok(())
        } else {
            Err(Error::MalformedSubset {
                subset: self.0.clone(),
                m,
                k,
            })
        }
    }

    pub fn ids(&self) -> &[MotifId] {
        &self.0
    }

    pub fn contains(&self, id: MotifId) -> bool {
        self.0.binary_search(&id).is_ok()
    }
}

/// One stored information unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub block_id: u64,
    pub address: Vec<MotifId>,
    #[serde(rename = "payload_subsets")]
    pub payloads: Vec<CompositeSymbol>,
}

impl Block {
    pub fn check(&self, layout: &BlockLayout) -> Result<()> {
        let err = |slot: usize, reason: String| Error::MalformedBlock {
            block_id: self.block_id,
            slot,
            reason,
        };
        if self.address.len() != layout.n_address_slots {
            return Err(err(
                0,
                format!("expected {} address motifs", layout.n_address_slots),
            ));
        }
        if let Some(i) = self
            .address
            .iter()
            .position(|&a| a as usize >= layout.library_size)
        {
            return Err(err(
                i,
                format!("address motif {} not in library", self.address[i]),
            ));
        }
        if self.payloads.len() != layout.n_payload_slots {
            return Err(err(
                layout.n_address_slots,
                format!(
                    "expected {} payload slots, found {}",
                    layout.n_payload_slots,
                    self.payloads.len()
                ),
            ));
        }
        for (i, p) in self.payloads.iter().enumerate() {
            p.check(layout.library_size, layout.motifs_per_symbol)
                .map_err(|e| err(layout.n_address_slots + i, e.to_string()))?;
        }
        Ok(())
    }

    /// Ground-truth motif set of each slot (address slots are singletons).
    pub fn slot_truth(&self) -> Vec<Vec<MotifId>> {
        self.address
            .iter()
            .map(|&a| vec![a])
            .chain(self.payloads.iter().map(|p| p.ids().to_vec()))
            .collect()
    }
}
