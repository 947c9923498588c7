//! Nucleotides and string-level sequence utilities.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One of the four nucleotides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    A,
    C,
    G,
    T,
}

impl Base {
    pub const ALL: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    pub fn complement(self) -> Base {
        match self {
            Base::A => Base::T,
            Base::C => Base::G,
            Base::G => Base::C,
            Base::T => Base::A,
        }
    }

    /// 2-bit code, A=0 C=1 G=2 T=3.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Base {
        Base::ALL[(code & 3) as usize]
    }

    pub fn to_ascii(self) -> u8 {
        b"ACGT"[self as usize]
    }

    pub fn from_ascii(b: u8) -> Option<Base> {
        match b {
            b'A' | b'a' => Some(Base::A),
            b'C' | b'c' => Some(Base::C),
            b'G' | b'g' => Some(Base::G),
            b'T' | b't' => Some(Base::T),
            _ => None,
        }
    }
}

/// Checks that a byte string only contains `ACGT`.
pub fn validate(seq: &[u8]) -> Result<(), Error> {
    match seq.iter().position(|&b| Base::from_ascii(b).is_none()) {
        None => Ok(()),
        Some(i) => Err(Error::InvalidBase {
            byte: seq[i],
            position: i,
        }),
    }
}

fn complement_ascii(b: u8) -> u8 {
    match b {
        b'A' => b'T',
        b'C' => b'G',
        b'G' => b'C',
        b'T' => b'A',
        b'a' => b't',
        b'c' => b'g',
        b'g' => b'c',
        b't' => b'a',
        other => other,
    }
}

/// Reverse complement of an ASCII base string.
pub fn complement_reverse(seq: &[u8]) -> Vec<u8> {
    seq.iter().rev().map(|&b| complement_ascii(b)).collect()
}

/// Unit-cost Levenshtein distance.
pub fn edit_distance(a: &[u8], b: &[u8]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let up = row[j + 1];
            let sub = diag + usize::from(ca != cb);
            row[j + 1] = sub.min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    row[b.len()]
}

/// Unit-cost global alignment restricted to cells with `|i - j| <= band`
/// (the band is widened to cover the length difference). Returns the edit
/// distance of the best in-band alignment.
pub fn banded_edit_distance(a: &[u8], b: &[u8], band: usize) -> usize {
    let (n, m) = (a.len(), b.len());
    let band = band.max(n.abs_diff(m));
    const INF: usize = usize::MAX / 4;
    let width = 2 * band + 1;
    // cell (i, j) stored at row i, column j + band - i
    let mut prev = vec![INF; width];
    let mut cur = vec![INF; width];
    for j in 0..=m.min(band) {
        prev[j + band] = j;
    }
    for i in 1..=n {
        cur.fill(INF);
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(m);
        for j in lo..=hi {
            let c = j + band - i;
            let mut best = INF;
            if j == 0 {
                best = i;
            } else {
                // diagonal: (i-1, j-1) lives at the same column offset in prev
                let d = prev[c];
                if d < INF {
                    best = d + usize::from(a[i - 1] != b[j - 1]);
                }
                // left: (i, j-1)
                if c > 0 && cur[c - 1] < INF {
                    best = best.min(cur[c - 1] + 1);
                }
            }
            // up: (i-1, j)
            if c + 1 < width && prev[c + 1] < INF {
                best = best.min(prev[c + 1] + 1);
            }
            cur[c] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m + band - n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reverse_complement_examples() {
        assert_eq!(complement_reverse(b"ACGT"), b"ACGT".to_vec());
        assert_eq!(complement_reverse(b"AAAA"), b"TTTT".to_vec());
        assert_eq!(complement_reverse(b""), Vec::<u8>::new());
        assert_eq!(complement_reverse(b"AACG"), b"CGTT".to_vec());
    }

    #[test]
    fn complement_is_involution() {
        for b in Base::ALL {
            assert_eq!(b.complement().complement(), b);
            assert_ne!(b.complement(), b);
        }
    }

    #[test]
    fn edit_distance_basics() {
        assert_eq!(edit_distance(b"kitten", b"sitting"), 3);
        assert_eq!(edit_distance(b"", b"ACG"), 3);
        assert_eq!(edit_distance(b"ACGT", b"ACGT"), 0);
    }

    #[test]
    fn rejects_non_acgt() {
        assert!(validate(b"ACGN").is_err());
        assert!(validate(b"acgt").is_ok());
    }

    proptest! {
        #[test]
        fn reverse_complement_twice_is_identity(s in "[ACGT]{0,64}") {
            let once = complement_reverse(s.as_bytes());
            prop_assert_eq!(complement_reverse(&once), s.as_bytes().to_vec());
        }

        #[test]
        fn wide_band_equals_full_dp(a in "[ACGT]{0,30}", b in "[ACGT]{0,30}") {
            let full = edit_distance(a.as_bytes(), b.as_bytes());
            prop_assert_eq!(banded_edit_distance(a.as_bytes(), b.as_bytes(), 64), full);
            prop_assert!(banded_edit_distance(a.as_bytes(), b.as_bytes(), 2) >= full);
        }
    }
}
