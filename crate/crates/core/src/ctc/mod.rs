//! Connectionist temporal classification over motif tokens: alignment
//! collapse, loss and gradient by α/β recursions, greedy and prefix beam
//! decoding, and Phred-style quality scores.
//!
//! Emission matrices have one row per window and one column per token. The
//! blank is always the last column.

mod decode;
mod emissions;
mod loss;

pub use decode::{beam_decode, greedy_decode, BeamDecode, GreedyDecode};
pub use emissions::{Emissions, TokenAlphabet};
pub use loss::{ctc_forward, ctc_gradient, min_windows};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Quality score reported for confidences at or numerically indistinguishable from 1.
pub const DEFAULT_QUALITY_CAP: f64 = 60.0;

/// Maps an alignment to its label sequence: merge runs of equal tokens, then drop blanks.
pub fn collapse(path: &[usize], blank: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = None;
    for &tok in path {
        if prev != Some(tok) && tok != blank {
            out.push(tok);
        }
        prev = Some(tok);
    }
    out
}

/// Phred-style quality `Q = −10·log₁₀(1 − p)`, saturating at `cap`.
pub fn quality<T: Real>(p: T, cap: T) -> Result<T> {
    let pf = p.to_f64().unwrap_or(f64::NAN);
    if !(0.0..=1.0).contains(&pf) {
        return Err(Error::ProbabilityOutOfRange(pf));
    }
    if p >= T::one() {
        return Ok(cap);
    }
    let q = -T::lit(10.0) * (T::one() - p).log10();
    Ok(q.min(cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BLANK: usize = 9;
    const A: usize = 0;
    const G: usize = 2;

    #[test]
    fn collapse_worked_example() {
        assert_eq!(
            collapse(&[A, BLANK, A, A, BLANK, G, G], BLANK),
            vec![A, A, G]
        );
        assert_eq!(collapse(&[BLANK, BLANK, BLANK], BLANK), Vec::<usize>::new());
        assert_eq!(collapse(&[1, 1, 1], BLANK), vec![1]);
        assert_eq!(collapse(&[], BLANK), Vec::<usize>::new());
    }

    #[test]
    fn quality_formula() {
        assert!((quality(0.9f64, 60.0).unwrap() - 10.0).abs() < 1e-12);
        assert!((quality(0.99f64, 60.0).unwrap() - 20.0).abs() < 1e-12);
        assert!((quality(0.999f64, 60.0).unwrap() - 30.0).abs() < 1e-12);
        assert_eq!(quality(0.0f64, 60.0).unwrap(), 0.0);
        assert_eq!(quality(1.0f64, 60.0).unwrap(), 60.0);
        assert_eq!(quality(1.0 - 1e-12f64, 60.0).unwrap(), 60.0);
        assert!(quality(1.5f64, 60.0).is_err());
        assert!(quality(-0.1f64, 60.0).is_err());
        assert!(quality(f64::NAN, 60.0).is_err());
        assert!((quality(0.9f32, 60.0).unwrap() - 10.0).abs() < 1e-4);
    }

    #[test]
    fn collapse_ignores_blanks_between_distinct_tokens() {
        let out = vec![0usize, 3, 1, 3];
        let with_blanks = vec![BLANK, 0, 0, BLANK, 3, BLANK, BLANK, 1, 3, 3, BLANK];
        assert_eq!(collapse(&with_blanks, BLANK), out);
        assert_eq!(collapse(&out, BLANK), out);
    }
}
