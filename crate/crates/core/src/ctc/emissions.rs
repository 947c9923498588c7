use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{log_softmax_in_place, Real};

/// Token layout shared by the caller and the decoders: motif ids `0..M`,
/// then one token per spacer position, then the blank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAlphabet {
    pub n_motifs: usize,
    pub n_spacers: usize,
}

impl TokenAlphabet {
    pub fn new(n_motifs: usize, n_spacers: usize) -> Self {
        Self {
            n_motifs,
            n_spacers,
        }
    }

    pub fn len(&self) -> usize {
        self.n_motifs + self.n_spacers + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn blank(&self) -> usize {
        self.n_motifs + self.n_spacers
    }

    pub fn motif(&self, id: u32) -> usize {
        id as usize
    }

    pub fn spacer(&self, position: usize) -> usize {
        self.n_motifs + position
    }

    pub fn is_motif(&self, token: usize) -> bool {
        token < self.n_motifs
    }

    pub fn is_spacer(&self, token: usize) -> bool {
        (self.n_motifs..self.blank()).contains(&token)
    }
}

/// Row-major `windows × tokens` matrix, holding either probabilities or log-probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Emissions<T> {
    n_windows: usize,
    n_tokens: usize,
    data: Vec<T>,
}

impl<T: Real> Emissions<T> {
    pub fn new(n_windows: usize, n_tokens: usize, data: Vec<T>) -> Result<Self> {
        if n_tokens == 0 || data.len() != n_windows * n_tokens {
            return Err(Error::InvalidParameter(format!(
                "emission data of length {} does not match {n_windows}×{n_tokens}",
                data.len()
            )));
        }
        Ok(Self {
            n_windows,
            n_tokens,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_tokens = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_tokens) {
            return Err(Error::InvalidParameter("ragged emission rows".into()));
        }
        Self::new(rows.len(), n_tokens, rows.concat())
    }

    pub fn n_windows(&self) -> usize {
        self.n_windows
    }

    pub fn n_tokens(&self) -> usize {
        self.n_tokens
    }

    pub fn blank(&self) -> usize {
        self.n_tokens - 1
    }

    pub fn row(&self, t: usize) -> &[T] {
        &self.data[t * self.n_tokens..(t + 1) * self.n_tokens]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [T] {
        &mut self.data[t * self.n_tokens..(t + 1) * self.n_tokens]
    }

    pub fn get(&self, t: usize, k: usize) -> T {
        self.data[t * self.n_tokens + k]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n_tokens)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            n_windows: self.n_windows,
            n_tokens: self.n_tokens,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn ln(&self) -> Self {
        self.map(T::ln)
    }

    pub fn exp(&self) -> Self {
        self.map(T::exp)
    }

    /// Row-wise log-softmax of unnormalized scores.
    pub fn log_softmax(logits: &Self) -> Self {
        let mut out = logits.clone();
        for t in 0..out.n_windows {
            log_softmax_in_place(out.row_mut(t));
        }
        out
    }

    /// Checks that every row is a probability distribution within `tol`.
    pub fn check_distribution(&self, tol: T) -> Result<()> {
        for (t, row) in self.rows().enumerate() {
            let sum: T = row.iter().copied().sum();
            if row.iter().any(|&p| p.is_nan() || p < T::zero()) || (sum - T::one()).abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "emission row {t} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> Emissions<U> {
        Emissions {
            n_windows: self.n_windows,
            n_tokens: self.n_tokens,
            data: self
                .data
                .iter()
                .map(|x| U::from_f64(x.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(U::nan))
                .collect(),
        }
    }
}
