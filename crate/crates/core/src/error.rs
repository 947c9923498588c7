use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base {:?} at position {position}", *byte as char)]
    InvalidBase { byte: u8, position: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "cannot place {wanted} sequences of length {length} at pairwise edit distance >= {d_min} \
         (gave up after {attempts} attempts)"
    )]
    LibraryUnsatisfiable {
        wanted: usize,
        length: usize,
        d_min: usize,
        attempts: usize,
    },

    #[error("k={k} exceeds M={m}")]
    ChooseOutOfRange { m: usize, k: usize },

    #[error("malformed subset {subset:?} for M={m}, k={k}")]
    MalformedSubset {
        subset: Vec<u32>,
        m: usize,
        k: usize,
    },

    #[error("rank {rank} out of range for C({m},{k})")]
    RankOutOfRange { rank: u64, m: usize, k: usize },

    #[error("block {block_id}, slot {slot}: {reason}")]
    MalformedBlock {
        block_id: u64,
        slot: usize,
        reason: String,
    },

    #[error("block {block_id}: payload value exceeds the {bits}-bit block capacity")]
    PayloadOverflow { block_id: u64, bits: usize },

    #[error("sequence of length {len} is shorter than the pore k-mer length {kmer}")]
    SequenceTooShort { len: usize, kmer: usize },

    #[error("target of length {target_len} is infeasible for {windows} windows")]
    CtcInfeasible { target_len: usize, windows: usize },

    #[error("probability {0} outside [0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("format error in {context}: {reason}")]
    Format { context: String, reason: String },

    #[error("digest mismatch for {what}: expected {expected}, found {found}")]
    DigestMismatch {
        what: String,
        expected: String,
        found: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn format(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            reason: reason.into(),
        }
    }
}
