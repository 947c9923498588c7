use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dna::{banded_edit_distance, complement_reverse};
use crate::library::{BlockLayout, MotifId, MotifLibrary};

use super::{pick_orientation, SlotCalls, SpacerIndex};

/// Tuning knobs of [`am_search`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmParams {
    pub k_idx: usize,
    /// Minimum k-mer hits for a raw spacer candidate.
    pub min_support: usize,
    /// Candidates of one spacer closer than this (bases) are merged.
    pub merge_window: usize,
    /// Shifts tried when correcting a candidate's offset.
    pub refine_window: usize,
    /// Allowed deviation of an inter-spacer gap from the motif length.
    pub indel_tol: usize,
    /// Required edit-distance margin of the best motif over the runner-up.
    pub margin_min: usize,
}

impl Default for AmParams {
    fn default() -> Self {
        Self {
            k_idx: 8,
            min_support: 3,
            merge_window: 10,
            refine_window: 5,
            indel_tol: 5,
            margin_min: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    spacer: usize,
    offset: isize,
    support: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    motif: Option<MotifId>,
    score: i64,
}

fn raw_candidates(read: &[u8], index: &SpacerIndex) -> Vec<Candidate> {
    let k = index.k();
    let mut support: HashMap<(usize, isize), usize> = HashMap::new();
    if read.len() >= k {
        for (p, kmer) in read.windows(k).enumerate() {
            for post in index.lookup(kmer) {
                let start = p as isize - post.offset as isize;
                *support.entry((post.spacer as usize, start)).or_default() += 1;
            }
        }
    }
    let mut out: Vec<Candidate> = support
        .into_iter()
        .map(|((spacer, offset), support)| Candidate {
            spacer,
            offset,
            support,
        })
        .collect();
    out.sort_by_key(|c| (c.spacer, c.offset));
    out
}

/// Single-linkage merge of same-spacer candidates; the merged offset is the
/// support-weighted mean.
fn merge(cands: &[Candidate], window: usize) -> Vec<Candidate> {
    let mut out = Vec::new();
    let mut group: Vec<Candidate> = Vec::new();
    let flush = |group: &mut Vec<Candidate>, out: &mut Vec<Candidate>| {
        if group.is_empty() {
            return;
        }
        let total: usize = group.iter().map(|c| c.support).sum();
        let weighted: isize = group.iter().map(|c| c.offset * c.support as isize).sum();
        out.push(Candidate {
            spacer: group[0].spacer,
            offset: (weighted as f64 / total as f64).round() as isize,
            support: total,
        });
        group.clear();
    };
    for &c in cands {
        if let Some(last) = group.last() {
            if last.spacer != c.spacer || (c.offset - last.offset) as usize > window {
                flush(&mut group, &mut out);
            }
        }
        group.push(c);
    }
    flush(&mut group, &mut out);
    out
}

fn hamming_at(read: &[u8], spacer: &[u8], start: isize) -> usize {
    spacer
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let p = start + i as isize;
            usize::from(p < 0 || p as usize >= read.len() || read[p as usize] != b)
        })
        .sum()
}

/// Local Hamming scan around the merged offset.
fn refine(read: &[u8], spacer: &[u8], offset: isize, window: usize) -> isize {
    let w = window as isize;
    (-w..=w)
        .min_by_key(|&s| (hamming_at(read, spacer, offset + s), s.abs(), s))
        .map_or(offset, |s| offset + s)
}

fn align_segment(segment: &[u8], library: &MotifLibrary, params: &AmParams) -> Segment {
    let band = 2 * params.indel_tol;
    let mut dists: Vec<(usize, MotifId)> = (0..library.n_motifs() as MotifId)
        .map(|m| (banded_edit_distance(segment, library.motif(m), band), m))
        .collect();
    dists.sort();
    let (best, id) = dists[0];
    let runner_up = dists.get(1).map_or(usize::MAX, |d| d.0);
    Segment {
        motif: (runner_up.saturating_sub(best) >= params.margin_min).then_some(id),
        score: library.motif_length as i64 - best as i64,
    }
}

fn am_orient(
    read: &[u8],
    index: &SpacerIndex,
    library: &MotifLibrary,
    layout: &BlockLayout,
    params: &AmParams,
) -> (Vec<Option<MotifId>>, i64) {
    let (l, ls) = (library.motif_length as isize, library.spacer_length);
    let n_spacers = layout.n_spacers();
    let strong: Vec<Candidate> = raw_candidates(read, index)
        .into_iter()
        .filter(|c| c.support >= params.min_support && c.spacer < n_spacers)
        .collect();
    let mut cands = merge(&strong, params.merge_window);
    for c in cands.iter_mut() {
        c.offset = refine(
            read,
            library.spacer(c.spacer),
            c.offset,
            params.refine_window,
        );
    }
    cands.sort_by_key(|c| (c.offset, c.spacer));

    // best chain ending at each candidate: (score, predecessor, segment into it)
    let tol = params.indel_tol as isize;
    let n = cands.len();
    let mut best: Vec<(i64, Option<usize>, Option<Segment>)> = vec![(0, None, None); n];
    let mut segments: HashMap<(usize, usize), Segment> = HashMap::new();
    for b in 0..n {
        for a in 0..b {
            let (ca, cb) = (cands[a], cands[b]);
            if cb.spacer != ca.spacer + 1 {
                continue;
            }
            let gap = cb.offset - (ca.offset + ls as isize);
            if (gap - l).abs() > tol {
                continue;
            }
            let from = (ca.offset + ls as isize).max(0) as usize;
            let to = (cb.offset.max(0) as usize).min(read.len());
            if from > to {
                continue;
            }
            let seg = *segments
                .entry((a, b))
                .or_insert_with(|| align_segment(&read[from..to], library, params));
            let score = best[a].0 + seg.score;
            let better = match best[b].1 {
                None => true,
                Some(prev) => score > best[b].0 || (score == best[b].0 && a < prev),
            };
            if better {
                best[b] = (score, Some(a), Some(seg));
            }
        }
    }

    // every candidate that ends a chain of at least one link proposes that chain
    struct Chain {
        score: i64,
        links: usize,
        span: (isize, isize),
        calls: Vec<(usize, Option<MotifId>)>,
    }
    let mut chains: Vec<Chain> = Vec::new();
    for end in 0..n {
        if best[end].1.is_none() {
            continue;
        }
        let mut calls = Vec::new();
        let mut cur = end;
        while let (Some(prev), Some(seg)) = (best[cur].1, best[cur].2) {
            calls.push((cands[prev].spacer, seg.motif));
            cur = prev;
        }
        chains.push(Chain {
            score: best[end].0,
            links: calls.len(),
            span: (cands[cur].offset, cands[end].offset + ls as isize),
            calls,
        });
    }
    // within a group of overlapping chains only the best-scoring one survives
    chains.sort_by(|x, y| {
        y.score
            .cmp(&x.score)
            .then(y.links.cmp(&x.links))
            .then(x.span.cmp(&y.span))
    });
    let mut kept: Vec<&Chain> = Vec::new();
    for ch in &chains {
        let overlaps = kept
            .iter()
            .any(|k| ch.span.0 < k.span.1 && k.span.0 < ch.span.1);
        if !overlaps {
            kept.push(ch);
        }
    }

    let mut out: Vec<Option<MotifId>> = vec![None; layout.total_slots()];
    let mut filled = vec![false; layout.total_slots()];
    let mut total = 0;
    for ch in kept {
        total += ch.score;
        for &(slot, motif) in &ch.calls {
            if slot < out.len() && !filled[slot] {
                filled[slot] = true;
                out[slot] = motif;
            }
        }
    }
    (out, total)
}

/// Approximate-matching search: spacer k-mer seeding, candidate filtering,
/// merging and Hamming refinement, chaining of consecutive spacers, and
/// banded alignment of each between-spacer segment against the library.
pub fn am_search(
    read: &[u8],
    index: &SpacerIndex,
    library: &MotifLibrary,
    layout: &BlockLayout,
    params: &AmParams,
) -> SlotCalls {
    let fwd = am_orient(read, index, library, layout, params);
    let rev = am_orient(&complement_reverse(read), index, library, layout, params);
    pick_orientation(fwd, rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{generate_library, LibraryParams};
    use crate::search::{build_spacer_index, ze_search};
    use crate::synthsim::molecule_sequence;

    fn setup() -> (
        MotifLibrary,
        BlockLayout,
        SpacerIndex,
        Vec<MotifId>,
        Vec<u8>,
    ) {
        let lib = generate_library(&LibraryParams::default(), 21).unwrap();
        let layout = BlockLayout::default();
        let idx = build_spacer_index(&lib, 8).unwrap();
        let chosen: Vec<MotifId> = vec![5, 0, 1, 4, 5, 7, 3, 3, 6];
        let seq = molecule_sequence(&chosen, &lib, &layout);
        (lib, layout, idx, chosen, seq)
    }

    #[test]
    fn error_free_read_matches_ze() {
        let (lib, layout, idx, chosen, seq) = setup();
        let am = am_search(&seq, &idx, &lib, &layout, &AmParams::default());
        assert_eq!(am, ze_search(&seq, &lib, &layout));
        assert_eq!(
            am.calls,
            chosen.iter().map(|&m| Some(m)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn deletion_inside_motif_still_called() {
        let (lib, layout, idx, chosen, mut seq) = setup();
        seq.remove(40 + 2 * 65 + 10);
        let am = am_search(&seq, &idx, &lib, &layout, &AmParams::default());
        assert_eq!(am.calls[2], Some(chosen[2]));
        assert_eq!(
            am.calls,
            chosen.iter().map(|&m| Some(m)).collect::<Vec<_>>()
        );
        // the exact matcher loses that slot
        assert_eq!(ze_search(&seq, &lib, &layout).calls[2], None);
    }

    #[test]
    fn orientation_invariant() {
        let (lib, layout, idx, _, mut seq) = setup();
        seq.remove(300);
        seq.insert(100, b'G');
        seq[500] = b'A';
        let p = AmParams::default();
        let fwd = am_search(&seq, &idx, &lib, &layout, &p);
        let rev = am_search(&complement_reverse(&seq), &idx, &lib, &layout, &p);
        assert_eq!(fwd.calls, rev.calls);
    }

    #[test]
    fn merge_weights_by_support() {
        let c = |offset, support| Candidate {
            spacer: 1,
            offset,
            support,
        };
        let merged = merge(&[c(10, 3), c(12, 1), c(40, 5)], 10);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].offset, 11); // (30 + 12) / 4 = 10.5 → 11
        assert_eq!(merged[0].support, 4);
        assert_eq!(merged[1].offset, 40);
    }

    #[test]
    fn refine_recovers_true_offset() {
        let (lib, _, _, _, seq) = setup();
        let s = lib.spacer(3);
        let true_start = 3 * 65;
        for shift in -5isize..=5 {
            assert_eq!(
                refine(&seq, s, true_start as isize + shift, 5),
                true_start as isize
            );
        }
    }

    #[test]
    fn garbage_read_calls_nothing() {
        let (lib, layout, idx, _, _) = setup();
        let junk: Vec<u8> = (0..300).map(|i| b"ACGT"[(i * i + 3 * i) % 4]).collect();
        assert!(am_search(&junk, &idx, &lib, &layout, &AmParams::default()).n_called() <= 1);
    }
}
