use std::collections::HashMap;

use crate::dna::complement_reverse;
use crate::library::{BlockLayout, MotifId, MotifLibrary};

use super::{pick_orientation, SlotCalls};

#[derive(Clone, Copy, Debug)]
struct Anchor {
    spacer: usize,
    start: isize,
    exact: bool,
}

/// Exact-match decode of one orientation; returns calls and the spacer hit count.
fn ze_orient(
    read: &[u8],
    library: &MotifLibrary,
    layout: &BlockLayout,
) -> (Vec<Option<MotifId>>, i64) {
    let (l, ls) = (library.motif_length, library.spacer_length);
    let n_slots = layout.total_slots();
    let n_spacers = layout.n_spacers();
    let period = (l + ls) as isize;

    let motif_ids: HashMap<&[u8], MotifId> = library
        .motifs
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_bytes(), i as MotifId))
        .collect();
    let spacer_ids: HashMap<&[u8], usize> = library.spacers[..n_spacers]
        .iter()
        .enumerate()
        .map(|(j, s)| (s.as_bytes(), j))
        .collect();

    let mut anchors: Vec<Anchor> = if read.len() >= ls {
        read.windows(ls)
            .enumerate()
            .filter_map(|(p, w)| {
                spacer_ids.get(w).map(|&j| Anchor {
                    spacer: j,
                    start: p as isize,
                    exact: true,
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    let n_spacer_hits = anchors.len() as i64;
    if anchors.is_empty() {
        // fall back to the read ends: S₀ opens the read, S_n closes it
        anchors.push(Anchor {
            spacer: 0,
            start: 0,
            exact: false,
        });
        anchors.push(Anchor {
            spacer: n_spacers - 1,
            start: read.len() as isize - ls as isize,
            exact: false,
        });
    }

    // (slot) -> (distance to anchor, motif)
    let mut best: Vec<Option<(isize, MotifId)>> = vec![None; n_slots];
    if read.len() >= l {
        for (pos, w) in read.windows(l).enumerate() {
            let Some(&m) = motif_ids.get(w) else { continue };
            let pos = pos as isize;
            let flank = anchors.iter().find_map(|a| {
                // spacer ending right where the motif starts, or starting right after it
                if a.exact && a.start + ls as isize == pos {
                    Some((a.spacer as isize, 0))
                } else if a.exact && a.start == pos + l as isize && a.spacer > 0 {
                    Some((a.spacer as isize - 1, 0))
                } else {
                    None
                }
            });
            let (slot, dist) = flank.unwrap_or_else(|| {
                let a = anchors
                    .iter()
                    .min_by_key(|a| ((pos - a.start).abs(), a.spacer))
                    .expect("at least one anchor");
                let rel = pos - a.start - ls as isize;
                let steps = (rel as f64 / period as f64).round() as isize;
                (a.spacer as isize + steps, (pos - a.start).abs())
            });
            if !(0..n_slots as isize).contains(&slot) {
                continue;
            }
            let cell = &mut best[slot as usize];
            if cell.is_none_or(|(d, id)| (dist, m) < (d, id)) {
                *cell = Some((dist, m));
            }
        }
    }
    (
        best.into_iter().map(|c| c.map(|(_, m)| m)).collect(),
        n_spacer_hits,
    )
}

/// Zero-error search: a motif counts only if all of its bases occur exactly.
///
/// Each exact motif hit is assigned to a slot by an exact spacer match directly
/// flanking it, else by the nearest exact spacer match and the nominal
/// motif-spacer period, else by the read ends. Both orientations are decoded and
/// the one with more exact spacer hits is kept.
pub fn ze_search(read: &[u8], library: &MotifLibrary, layout: &BlockLayout) -> SlotCalls {
    let fwd = ze_orient(read, library, layout);
    let rev = ze_orient(&complement_reverse(read), library, layout);
    pick_orientation(fwd, rev)
}
