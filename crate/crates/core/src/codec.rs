//! Bitstream <-> block mapping through lexicographic k-subset ranking.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::library::{Block, BlockLayout, CompositeSymbol, MotifId};

/// Exact binomial coefficient `C(m, k)`; exact for every `m <= 64`.
pub fn choose(m: usize, k: usize) -> Result<u64> {
    if k > m {
        return Err(Error::ChooseOutOfRange { m, k });
    }
    let k = k.min(m - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (m - i) is divisible by (i + 1) at every step
        c = c * (m - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(c).map_err(|_| Error::InvalidParameter(format!("C({m},{k}) overflows u64")))
}

/// Lexicographic rank of a composite symbol, `0 <= value < C(M, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolRank(pub u64);

/// Rank of a sorted k-subset of `0..m` among all such subsets in lexicographic order.
pub fn subset_rank(subset: &CompositeSymbol, m: usize, k: usize) -> Result<SymbolRank> {
    subset.check(m, k)?;
    let mut rank = 0u64;
    let mut next = 0usize;
    for (i, &id) in subset.ids().iter().enumerate() {
        let id = id as usize;
        // subsets sharing the prefix but holding a smaller value at position i
        for v in next..id {
            rank += choose(m - 1 - v, k - 1 - i)?;
        }
        next = id + 1;
    }
    Ok(SymbolRank(rank))
}

/// Inverse of [`subset_rank`].
pub fn subset_unrank(rank: SymbolRank, m: usize, k: usize) -> Result<CompositeSymbol> {
    let total = choose(m, k)?;
    if rank.0 >= total {
        return Err(Error::RankOutOfRange { rank: rank.0, m, k });
    }
    let mut rest = rank.0;
    let mut ids = Vec::with_capacity(k);
    let mut v = 0usize;
    for i in 0..k {
        loop {
            let below = choose(m - 1 - v, k - 1 - i)?;
            if rest < below {
                break;
            }
            rest -= below;
            v += 1;
        }
        ids.push(v as MotifId);
        v += 1;
    }
    CompositeSymbol::new(ids, m, k)
}

/// How payload bits are packed into composite symbols.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodecMode {
    /// `⌊log₂ C(M,k)⌋` bits in every payload slot.
    #[default]
    PerSymbolFloor,
    /// A block's payload slots form one base-`C(M,k)` number holding
    /// `⌊n · log₂ C(M,k)⌋` bits.
    MixedRadix,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub mode: CodecMode,
}

impl CodecConfig {
    pub fn new(mode: CodecMode) -> Self {
        Self { mode }
    }

    /// Payload bits stored in one block under this configuration.
    pub fn bits_per_block(&self, layout: &BlockLayout) -> Result<usize> {
        let c = choose(layout.library_size, layout.motifs_per_symbol)?;
        let n = layout.n_payload_slots;
        Ok(match self.mode {
            CodecMode::PerSymbolFloor => n * floor_log2(c),
            CodecMode::MixedRadix => {
                let cap = BigUint::from(c).pow(n as u32);
                (cap.bits() - 1) as usize
            }
        })
    }
}

fn floor_log2(x: u64) -> usize {
    debug_assert!(x > 0);
    63 - x.leading_zeros() as usize
}

/// Logical density `log₂ C(M,k)` in bits per payload slot.
pub fn bits_per_slot(m: usize, k: usize) -> Result<f64> {
    Ok((choose(m, k)? as f64).log2())
}

/// Output of [`encode`]: the blocks plus the zero padding appended to fill the last one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub blocks: Vec<Block>,
    pub padding_bits: usize,
}

/// Address motifs of a block: `block_id` written in base `M`, most significant slot first.
pub fn address_for(block_id: u64, layout: &BlockLayout) -> Vec<MotifId> {
    let m = layout.library_size as u64;
    let mut digits = vec![0; layout.n_address_slots];
    let mut rest = block_id;
    for d in digits.iter_mut().rev() {
        *d = (rest % m) as MotifId;
        rest /= m;
    }
    digits
}

fn bits_to_u64(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
}

fn push_u64_bits(out: &mut Vec<bool>, value: u64, width: usize) {
    out.extend((0..width).rev().map(|i| (value >> i) & 1 == 1));
}

/// Packs a bitstream into blocks, zero-padding to a whole number of blocks.
pub fn encode(bits: &[bool], layout: &BlockLayout, config: &CodecConfig) -> Result<Encoded> {
    layout.validate()?;
    let (m, k) = (layout.library_size, layout.motifs_per_symbol);
    let per_block = config.bits_per_block(layout)?;
    if per_block == 0 {
        return Err(Error::InvalidParameter(format!(
            "C({m},{k}) = 1 leaves no room for payload bits"
        )));
    }
    let n_blocks = bits.len().div_ceil(per_block);
    let padding_bits = n_blocks * per_block - bits.len();
    let mut padded = bits.to_vec();
    padded.resize(n_blocks * per_block, false);

    let c = choose(m, k)?;
    let mut blocks = Vec::with_capacity(n_blocks);
    for (b, chunk) in padded.chunks(per_block).enumerate() {
        let ranks: Vec<u64> = match config.mode {
            CodecMode::PerSymbolFloor => {
                let w = floor_log2(c);
                chunk.chunks(w).map(bits_to_u64).collect()
            }
            CodecMode::MixedRadix => {
                let mut value = chunk
                    .iter()
                    .fold(BigUint::zero(), |acc, &bit| (acc << 1u8) + u32::from(bit));
                let mut digits = vec![0u64; layout.n_payload_slots];
                for d in digits.iter_mut().rev() {
                    *d = (&value % c).to_u64().expect("digit below C(M,k)");
                    value /= c;
                }
                digits
            }
        };
        let payloads = ranks
            .into_iter()
            .map(|r| subset_unrank(SymbolRank(r), m, k))
            .collect::<Result<Vec<_>>>()?;
        let block_id = b as u64;
        blocks.push(Block {
            block_id,
            address: address_for(block_id, layout),
            payloads,
        });
    }
    Ok(Encoded {
        blocks,
        padding_bits,
    })
}

/// Integer carried by a block's payload slots read as base-`C(M,k)` digits.
pub fn payload_value(block: &Block, layout: &BlockLayout) -> Result<BigUint> {
    let (m, k) = (layout.library_size, layout.motifs_per_symbol);
    let c = choose(m, k)?;
    let mut value = BigUint::zero();
    for (i, p) in block.payloads.iter().enumerate() {
        let r = subset_rank(p, m, k).map_err(|e| Error::MalformedBlock {
            block_id: block.block_id,
            slot: layout.n_address_slots + i,
            reason: e.to_string(),
        })?;
        value = value * c + r.0;
    }
    Ok(value)
}

/// Inverse of [`encode`]; returns every payload bit including padding.
/// Blocks are taken in `block_id` order.
pub fn decode(blocks: &[Block], layout: &BlockLayout, config: &CodecConfig) -> Result<Vec<bool>> {
    layout.validate()?;
    let (m, k) = (layout.library_size, layout.motifs_per_symbol);
    let per_block = config.bits_per_block(layout)?;
    let mut order: Vec<&Block> = blocks.iter().collect();
    order.sort_by_key(|b| b.block_id);
    let mut out = Vec::with_capacity(order.len() * per_block);
    for block in order {
        block.check(layout)?;
        match config.mode {
            CodecMode::PerSymbolFloor => {
                let w = floor_log2(choose(m, k)?);
                for (i, p) in block.payloads.iter().enumerate() {
                    let r = subset_rank(p, m, k)?.0;
                    if r >> w != 0 {
                        return Err(Error::MalformedBlock {
                            block_id: block.block_id,
                            slot: layout.n_address_slots + i,
                            reason: format!("rank {r} does not fit in {w} bits"),
                        });
                    }
                    push_u64_bits(&mut out, r, w);
                }
            }
            CodecMode::MixedRadix => {
                let value = payload_value(block, layout)?;
                if value.bits() as usize > per_block {
                    return Err(Error::PayloadOverflow {
                        block_id: block.block_id,
                        bits: per_block,
                    });
                }
                out.extend((0..per_block).rev().map(|i| value.bit(i as u64)));
            }
        }
    }
    Ok(out)
}

/// Decodes and strips the recorded padding.
pub fn decode_stream(
    blocks: &[Block],
    layout: &BlockLayout,
    config: &CodecConfig,
    padding_bits: usize,
) -> Result<Vec<bool>> {
    let mut bits = decode(blocks, layout, config)?;
    if padding_bits > bits.len() {
        return Err(Error::InvalidParameter(format!(
            "padding of {padding_bits} bits exceeds decoded length {}",
            bits.len()
        )));
    }
    bits.truncate(bits.len() - padding_bits);
    Ok(bits)
}

/// MSB-first bit expansion of bytes.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

/// Inverse of [`bytes_to_bits`]; a trailing partial byte is zero-filled.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// All sorted k-subsets of 0..m in lexicographic order, by recursion.
    fn enumerate_subsets(m: usize, k: usize) -> Vec<Vec<u32>> {
        fn go(start: usize, m: usize, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for v in start..m {
                cur.push(v as u32);
                go(v + 1, m, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, m, k, &mut Vec::new(), &mut out);
        out
    }

    fn pascal(n: usize) -> Vec<Vec<u64>> {
        let mut t = vec![vec![1u64]];
        for i in 1..=n {
            let prev = &t[i - 1];
            let mut row = vec![1u64; i + 1];
            for j in 1..i {
                row[j] = prev[j - 1] + prev[j];
            }
            t.push(row);
        }
        t
    }

    #[test]
    fn choose_examples() {
        assert_eq!(choose(8, 4).unwrap(), 70);
        assert_eq!(choose(13, 0).unwrap(), 1);
        assert_eq!(choose(12, 5).unwrap(), pascal(12)[12][5]);
        assert_eq!(choose(12, 5).unwrap(), 792);
        assert!(choose(3, 4).is_err());
        assert_eq!(choose(64, 32).unwrap(), 1_832_624_140_942_590_534);
    }

    #[test]
    fn choose_matches_pascal() {
        let t = pascal(64);
        for (n, row) in t.iter().enumerate() {
            for (k, &c) in row.iter().enumerate() {
                assert_eq!(choose(n, k).unwrap(), c, "C({n},{k})");
            }
        }
    }

    #[test]
    fn rank_examples() {
        let s = |v: Vec<u32>| CompositeSymbol::new(v, 8, 4).unwrap();
        assert_eq!(
            subset_rank(&s(vec![0, 1, 2, 3]), 8, 4).unwrap(),
            SymbolRank(0)
        );
        assert_eq!(
            subset_rank(&s(vec![4, 5, 6, 7]), 8, 4).unwrap(),
            SymbolRank(69)
        );
        let enumerated = enumerate_subsets(8, 4);
        assert_eq!(enumerated[1], vec![0, 1, 2, 4]);
        assert_eq!(
            subset_rank(&s(vec![0, 1, 2, 4]), 8, 4).unwrap(),
            SymbolRank(1)
        );
        assert_eq!(
            subset_unrank(SymbolRank(0), 8, 4).unwrap().ids(),
            &[0, 1, 2, 3]
        );
        assert_eq!(
            subset_unrank(SymbolRank(69), 8, 4).unwrap().ids(),
            &[4, 5, 6, 7]
        );
        assert_eq!(
            subset_unrank(SymbolRank(1), 8, 4).unwrap().ids(),
            &[0, 1, 2, 4]
        );
        assert!(subset_unrank(SymbolRank(70), 8, 4).is_err());
        let bad = CompositeSymbol::from_ids_unchecked(vec![0, 1, 2]);
        assert!(subset_rank(&bad, 8, 4).is_err());
    }

    #[test]
    fn rank_is_enumeration_index_exhaustively() {
        for m in 1..=10 {
            for k in 0..=m {
                for (i, ids) in enumerate_subsets(m, k).into_iter().enumerate() {
                    let s = CompositeSymbol::new(ids.clone(), m, k).unwrap();
                    assert_eq!(subset_rank(&s, m, k).unwrap().0, i as u64);
                    assert_eq!(subset_unrank(SymbolRank(i as u64), m, k).unwrap(), s);
                }
            }
        }
    }

    #[test]
    fn packing_arithmetic() {
        let layout = BlockLayout::default();
        let floor = CodecConfig::new(CodecMode::PerSymbolFloor);
        let mixed = CodecConfig::new(CodecMode::MixedRadix);
        assert_eq!(floor.bits_per_block(&layout).unwrap(), 48);
        assert_eq!(mixed.bits_per_block(&layout).unwrap(), 49);

        assert!(encode(&[], &layout, &floor).unwrap().blocks.is_empty());
        let e = encode(&[true; 48], &layout, &floor).unwrap();
        assert_eq!((e.blocks.len(), e.padding_bits), (1, 0));
        let e = encode(&[true; 49], &layout, &floor).unwrap();
        assert_eq!((e.blocks.len(), e.padding_bits), (2, 47));
    }

    #[test]
    fn rank_zero_block_is_zero_bits() {
        let layout = BlockLayout::default();
        let floor = CodecConfig::new(CodecMode::PerSymbolFloor);
        let zero = subset_unrank(SymbolRank(0), 8, 4).unwrap();
        let block = Block {
            block_id: 0,
            address: vec![0],
            payloads: vec![zero; 8],
        };
        assert_eq!(decode(&[block], &layout, &floor).unwrap(), vec![false; 48]);
    }

    #[test]
    fn mixed_radix_all_max_digits() {
        let layout = BlockLayout::default();
        let top = subset_unrank(SymbolRank(69), 8, 4).unwrap();
        let block = Block {
            block_id: 0,
            address: vec![0],
            payloads: vec![top; 8],
        };
        // big-integer oracle: 70^8 - 1 by repeated multiplication
        let mut oracle = BigUint::from(1u32);
        for _ in 0..8 {
            oracle *= 70u32;
        }
        oracle -= 1u32;
        assert_eq!(payload_value(&block, &layout).unwrap(), oracle);
        // 70^8 - 1 needs 50 bits, one more than a mixed-radix block carries
        assert_eq!(oracle.bits(), 50);
        let mixed = CodecConfig::new(CodecMode::MixedRadix);
        assert!(matches!(
            decode(&[block], &layout, &mixed),
            Err(Error::PayloadOverflow { bits: 49, .. })
        ));
    }

    #[test]
    fn wrong_cardinality_names_block_and_slot() {
        let layout = BlockLayout::default();
        let mut e = encode(&[true; 96], &layout, &CodecConfig::default()).unwrap();
        e.blocks[1].payloads[3] = CompositeSymbol::from_ids_unchecked(vec![0, 1, 2]);
        match decode(&e.blocks, &layout, &CodecConfig::default()) {
            Err(Error::MalformedBlock {
                block_id: 1,
                slot: 4,
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn addresses_are_base_m_digits() {
        let layout = BlockLayout {
            n_address_slots: 3,
            ..BlockLayout::default()
        };
        assert_eq!(address_for(0, &layout), vec![0, 0, 0]);
        assert_eq!(address_for(9, &layout), vec![0, 1, 1]);
        assert_eq!(address_for(511, &layout), vec![7, 7, 7]);
        assert_eq!(address_for(512, &layout), vec![0, 0, 0]);
    }

    #[test]
    fn mixed_radix_never_stores_fewer_bits() {
        for m in 2..=12 {
            for k in 1..m {
                for n in 1..=9 {
                    let layout = BlockLayout {
                        n_payload_slots: n,
                        motifs_per_symbol: k,
                        library_size: m,
                        ..BlockLayout::default()
                    };
                    let f = CodecConfig::new(CodecMode::PerSymbolFloor)
                        .bits_per_block(&layout)
                        .unwrap();
                    let x = CodecConfig::new(CodecMode::MixedRadix)
                        .bits_per_block(&layout)
                        .unwrap();
                    let density = bits_per_slot(m, k).unwrap();
                    assert!(x >= f);
                    if n as f64 * density.fract() >= 1.0 + 1e-9 {
                        assert!(x > f, "M={m} k={k} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn bytes_bits_roundtrip() {
        let bytes = b"motif";
        assert_eq!(bits_to_bytes(&bytes_to_bits(bytes)), bytes.to_vec());
    }

    proptest! {
        #[test]
        fn roundtrip_both_modes(bits in proptest::collection::vec(any::<bool>(), 0..400), mixed in any::<bool>()) {
            let layout = BlockLayout::default();
            let cfg = CodecConfig::new(if mixed { CodecMode::MixedRadix } else { CodecMode::PerSymbolFloor });
            let e = encode(&bits, &layout, &cfg).unwrap();
            for b in &e.blocks {
                b.check(&layout).unwrap();
            }
            let back = decode_stream(&e.blocks, &layout, &cfg, e.padding_bits).unwrap();
            prop_assert_eq!(back, bits);
        }
    }
}
