//! Synthesis and sequencing simulation: oligo assembly from composite symbols,
//! a base-level error channel, and squiggle rendering from a k-mer pore model.

mod channel;
mod pore;
mod squiggle;

pub use channel::{corrupt, ChannelParams, ChannelStats, CoverageModel, Orientation, Read};
pub use pore::{generate_pore_model, PoreModel, DEFAULT_PORE_STD};
pub use squiggle::{render_squiggle, Squiggle, SquiggleParams};

use rand::Rng;

use crate::error::Result;
use crate::library::{Block, BlockLayout, MotifId, MotifLibrary};
use crate::rng::rng_from;

/// One physical strand: a motif drawn for every slot, joined by spacers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Molecule {
    pub block_id: u64,
    /// Motif id per slot, address slots first.
    pub chosen_motifs: Vec<MotifId>,
    pub sequence: Vec<u8>,
}

/// `S₀ · m₀ · S₁ · … · m_{n−1} · S_n`.
pub fn molecule_sequence(
    chosen: &[MotifId],
    library: &MotifLibrary,
    layout: &BlockLayout,
) -> Vec<u8> {
    let mut seq = Vec::with_capacity(layout.oligo_length(library.motif_length));
    for (slot, &m) in chosen.iter().enumerate() {
        seq.extend_from_slice(library.spacer(slot));
        seq.extend_from_slice(library.motif(m));
    }
    seq.extend_from_slice(library.spacer(chosen.len()));
    seq
}

/// Draws one molecule: address slots are fixed, each payload slot picks one
/// motif uniformly from its subset.
pub fn draw_molecule(
    block: &Block,
    library: &MotifLibrary,
    layout: &BlockLayout,
    rng: &mut impl Rng,
) -> Molecule {
    let chosen: Vec<MotifId> = block
        .address
        .iter()
        .copied()
        .chain(block.payloads.iter().map(|p| {
            let ids = p.ids();
            ids[rng.random_range(0..ids.len())]
        }))
        .collect();
    let sequence = molecule_sequence(&chosen, library, layout);
    Molecule {
        block_id: block.block_id,
        chosen_motifs: chosen,
        sequence,
    }
}

/// Samples `draws` molecules of one block from the mixture.
pub fn assemble(
    block: &Block,
    library: &MotifLibrary,
    layout: &BlockLayout,
    draws: usize,
    seed: u64,
) -> Result<Vec<Molecule>> {
    block.check(layout)?;
    layout.check_library(library)?;
    let mut rng = rng_from(seed);
    Ok((0..draws)
        .map(|_| draw_molecule(block, library, layout, &mut rng))
        .collect())
}
