//! Crate-wide error and validation types.

use thiserror::Error;

use crate::rat::Rat;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed rational '{0}'")]
    MalformedRational(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("unknown symbol '{symbol}'")]
    UnknownSymbol { symbol: String },
    #[error("word length {actual} does not match expected length {expected}")]
    WordLength { expected: usize, actual: usize },
    #[error("binary channel requires eps0 > 0, got {0}")]
    ErrorProbZero0(Rat),
    #[error("binary channel requires eps1 > 0, got {0}")]
    ErrorProbZero1(Rat),
    #[error("binary channel requires eps0 + eps1 < 1, got {0}")]
    ErrorProbSum(Rat),
    #[error("channel is not a two-symbol binary channel")]
    NotBinary,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {}", issues.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { issues: Vec<ValidationIssue> },
    #[error("enumeration budget exceeded: {need} candidates > budget {budget}")]
    BudgetExceeded { need: u128, budget: u64 },
    #[error("at most {limit} states supported here, got {actual}")]
    TooManyStates { actual: usize, limit: usize },
    #[error("decoder is not deterministic")]
    NotDeterministic,
    #[error("decoder is not a best response: decodes output {output} as state {state} outside its tie set")]
    NotBestResponse { output: String, state: usize },
    #[error("decoder is not monotonic: d({y},{state}) < d({y_prime},{state}) with the tie set of {y} contained in that of {y_prime}")]
    NotMonotonic {
        y: String,
        y_prime: String,
        state: usize,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn invalid(issues: Vec<ValidationIssue>) -> Self {
        Error::Invalid { issues }
    }
}

/// A single invariant violation found while validating a channel, game,
/// codebook, or decoder. Validation collects every violation rather than
/// stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationIssue {
    #[error("channel row {row} sums to {sum}")]
    RowSum { row: usize, sum: Rat },
    #[error("channel entry at row {row}, column {col} is {value}, outside [0,1]")]
    EntryRange { row: usize, col: usize, value: Rat },
    #[error("channel alphabet is empty")]
    EmptyAlphabet,
    #[error("alphabet symbol {index} is invalid: {reason}")]
    BadSymbol { index: usize, reason: String },
    #[error("duplicate alphabet symbol '{symbol}'")]
    DuplicateSymbol { symbol: String },
    #[error("channel matrix has {actual} rows, expected {expected}")]
    MatrixRows { expected: usize, actual: usize },
    #[error("channel row {row} has {actual} entries, expected {expected}")]
    MatrixCols {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("number of channel uses must be positive")]
    ZeroUses,
    #[error("game must have at least one state")]
    NoStates,
    #[error("prior for state {state} is {value}, must be positive")]
    NonPositivePrior { state: usize, value: Rat },
    #[error("priors sum to {sum}, expected 1")]
    PriorSum { sum: Rat },
    #[error("sender utility for state {state} is {value}, must be positive")]
    NonPositiveSenderUtility { state: usize, value: Rat },
    #[error("receiver utility for state {state} is {value}, must be positive")]
    NonPositiveReceiverUtility { state: usize, value: Rat },
    #[error("{section} has {actual} entries, expected {expected}")]
    SectionLength {
        section: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("codebook has {actual} words, expected {expected} (one per state)")]
    CodebookSize { expected: usize, actual: usize },
    #[error("codeword for state {state} has length {actual}, expected {expected}")]
    CodewordLength {
        state: usize,
        expected: usize,
        actual: usize,
    },
    #[error("codeword for state {state} uses symbol index {symbol} outside the input alphabet")]
    CodewordSymbol { state: usize, symbol: usize },
    #[error("decoder weights: {reason}")]
    BadWeights { reason: String },
    #[error("decoder order {order:?} is not a permutation of the states")]
    BadOrder { order: Vec<usize> },
    #[error("decoder table: {reason}")]
    BadTable { reason: String },
}
