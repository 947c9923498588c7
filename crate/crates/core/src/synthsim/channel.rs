use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dna::complement_reverse;
use crate::error::{Error, Result};
use crate::library::MotifId;
use crate::rng::rng_from;

use super::Molecule;

/// Reads per block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum CoverageModel {
    Fixed(u32),
    /// Poisson-distributed count per block with this mean.
    Poisson(f64),
}

impl Default for CoverageModel {
    fn default() -> Self {
        CoverageModel::Fixed(10)
    }
}

/// Base-level error channel standing in for basecalled nanopore reads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub p_sub: f64,
    pub p_ins: f64,
    pub p_del: f64,
    pub p_reverse: f64,
    pub coverage: CoverageModel,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            p_sub: 0.03,
            p_ins: 0.03,
            p_del: 0.04,
            p_reverse: 0.5,
            coverage: CoverageModel::default(),
        }
    }
}

impl ChannelParams {
    /// Identity channel, forward orientation only.
    pub fn noiseless() -> Self {
        Self {
            p_sub: 0.0,
            p_ins: 0.0,
            p_del: 0.0,
            p_reverse: 0.0,
            coverage: CoverageModel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_sub, self.p_ins, self.p_del, self.p_reverse];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || self.p_sub + self.p_del > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "channel probabilities must lie in [0,1] with p_sub + p_del <= 1: {self:?}"
            )));
        }
        match self.coverage {
            CoverageModel::Poisson(mean) if !(mean >= 0.0 && mean.is_finite()) => Err(
                Error::InvalidParameter(format!("Poisson coverage mean must be >= 0, got {mean}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Forward,
    Reverse,
}

impl Orientation {
    pub fn symbol(self) -> char {
        match self {
            Orientation::Forward => '+',
            Orientation::Reverse => '-',
        }
    }

    pub fn from_symbol(c: &str) -> Option<Self> {
        match c {
            "+" | "forward" => Some(Orientation::Forward),
            "-" | "reverse" => Some(Orientation::Reverse),
            _ => None,
        }
    }
}

/// One simulated basecalled read. `truth_motifs` is simulation ground truth and
/// is never handed to a decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Read {
    pub read_id: u64,
    pub block_id: u64,
    pub orientation: Orientation,
    pub bases: Vec<u8>,
    pub truth_motifs: Vec<MotifId>,
}

/// Event counts applied by one pass of the channel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChannelStats {
    pub bases_in: usize,
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl ChannelStats {
    pub fn add(&mut self, other: &ChannelStats) {
        self.bases_in += other.bases_in;
        self.substitutions += other.substitutions;
        self.insertions += other.insertions;
        self.deletions += other.deletions;
    }
}

const BASES: [u8; 4] = *b"ACGT";

fn substitute(b: u8, rng: &mut impl Rng) -> u8 {
    let alts: Vec<u8> = BASES.iter().copied().filter(|&x| x != b).collect();
    alts[rng.random_range(0..3)]
}

/// Applies the channel to one molecule: per position a deletion with `p_del`,
/// otherwise a substitution with `p_sub`; a random base is inserted after each
/// position with `p_ins`; finally the read is reverse-complemented with `p_reverse`.
pub fn corrupt(
    molecule: &Molecule,
    params: &ChannelParams,
    read_id: u64,
    seed: u64,
) -> Result<(Read, ChannelStats)> {
    params.validate()?;
    let mut rng = rng_from(seed);
    let mut stats = ChannelStats {
        bases_in: molecule.sequence.len(),
        ..ChannelStats::default()
    };
    let mut out = Vec::with_capacity(molecule.sequence.len() + 16);
    for &b in &molecule.sequence {
        let u: f64 = rng.random();
        if u < params.p_del {
            stats.deletions += 1;
        } else if u < params.p_del + params.p_sub {
            stats.substitutions += 1;
            out.push(substitute(b, &mut rng));
        } else {
            out.push(b);
        }
        if params.p_ins > 0.0 && rng.random::<f64>() < params.p_ins {
            stats.insertions += 1;
            out.push(BASES[rng.random_range(0..4)]);
        }
    }
    let orientation = if params.p_reverse > 0.0 && rng.random::<f64>() < params.p_reverse {
        out = complement_reverse(&out);
        Orientation::Reverse
    } else {
        Orientation::Forward
    };
    let read = Read {
        read_id,
        block_id: molecule.block_id,
        orientation,
        bases: out,
        truth_motifs: molecule.chosen_motifs.clone(),
    };
    Ok((read, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dna::edit_distance;
    use crate::rng::{derive_seed, SimRng};
    use rand::SeedableRng;

    fn random_molecule(len: usize, seed: u64) -> Molecule {
        let mut rng = SimRng::seed_from_u64(seed);
        Molecule {
            block_id: 0,
            chosen_motifs: vec![],
            sequence: (0..len).map(|_| BASES[rng.random_range(0..4)]).collect(),
        }
    }

    #[test]
    fn zero_rates_are_identity() {
        let m = random_molecule(625, 1);
        let (r, s) = corrupt(&m, &ChannelParams::noiseless(), 0, 5).unwrap();
        assert_eq!(r.bases, m.sequence);
        assert_eq!(r.orientation, Orientation::Forward);
        assert_eq!((s.substitutions, s.insertions, s.deletions), (0, 0, 0));
    }

    #[test]
    fn full_deletion_gives_empty_read() {
        let m = random_molecule(100, 2);
        let p = ChannelParams {
            p_del: 1.0,
            ..ChannelParams::noiseless()
        };
        assert!(corrupt(&m, &p, 0, 3).unwrap().0.bases.is_empty());
    }

    #[test]
    fn reverse_orientation_is_reverse_complement() {
        let m = random_molecule(80, 4);
        let p = ChannelParams {
            p_reverse: 1.0,
            ..ChannelParams::noiseless()
        };
        let (r, _) = corrupt(&m, &p, 0, 3).unwrap();
        assert_eq!(r.orientation, Orientation::Reverse);
        assert_eq!(r.bases, complement_reverse(&m.sequence));
    }

    #[test]
    fn invalid_rates_rejected() {
        let m = random_molecule(10, 4);
        let p = ChannelParams {
            p_sub: 0.7,
            p_del: 0.5,
            ..ChannelParams::noiseless()
        };
        assert!(corrupt(&m, &p, 0, 0).is_err());
    }

    /// 160 molecules of 625 bases = 10^5 bases through the default channel.
    fn default_corpus() -> (ChannelStats, usize) {
        let params = ChannelParams {
            p_reverse: 0.0,
            ..ChannelParams::default()
        };
        let mut total = ChannelStats::default();
        let mut dist = 0;
        for i in 0..160 {
            let m = random_molecule(625, derive_seed(99, &[i]));
            let (r, s) = corrupt(&m, &params, i, derive_seed(100, &[i])).unwrap();
            total.add(&s);
            dist += edit_distance(&m.sequence, &r.bases);
        }
        (total, dist)
    }

    #[test]
    fn empirical_rates_within_three_sigma() {
        let (s, _) = default_corpus();
        let n = s.bases_in as f64;
        assert_eq!(s.bases_in, 100_000);
        let check = |count: usize, p: f64, what: &str| {
            let sd = (n * p * (1.0 - p)).sqrt();
            assert!(
                (count as f64 - n * p).abs() <= 3.0 * sd,
                "{what}: {count} vs {}",
                n * p
            );
        };
        check(s.deletions, 0.04, "deletions");
        check(s.substitutions, 0.03, "substitutions");
        check(s.insertions, 0.03, "insertions");
    }

    #[test]
    fn edit_distance_tracks_configured_rates() {
        let (s, dist) = default_corpus();
        let n = s.bases_in as f64;
        let sd = (n * 0.1 * 0.9).sqrt();
        // (p_sub + p_ins + p_del)·n = 10^4 applied edits
        let ops = s.substitutions + s.insertions + s.deletions;
        assert!((ops as f64 - 1e4).abs() <= 3.0 * sd, "ops {ops}");
        // an insertion next to a deletion can cancel or merge into a substitution,
        // so the optimal alignment is a little cheaper than the applied edits
        assert!(dist <= ops);
        assert!(
            dist as f64 >= 0.9 * ops as f64,
            "distance {dist} vs ops {ops}"
        );
    }
}
