//! Channels, games, and codebooks.
//!
//! A [`Channel`] is a finite-alphabet noisy channel with an exact transition
//! matrix. A [`Game`] couples a channel used `n` times with states of nature,
//! priors, and per-state utilities for sender and receiver. A [`Codebook`] is
//! the sender strategy: one length-`n` input word per state.

use std::fmt;

use crate::error::{Error, ValidationIssue};
use crate::rat::Rat;

/// An ordered list of distinct symbols. Symbols are arbitrary non-empty
/// strings without whitespace or commas (so words have an unambiguous
/// text form).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new(symbols: Vec<String>) -> Self {
        Alphabet { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn all_single_char(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    fn validate(&self, issues: &mut Vec<ValidationIssue>) {
        if self.symbols.is_empty() {
            issues.push(ValidationIssue::EmptyAlphabet);
        }
        for (i, s) in self.symbols.iter().enumerate() {
            if s.is_empty() || s.contains(char::is_whitespace) || s.contains(',') {
                issues.push(ValidationIssue::BadSymbol {
                    index: i,
                    reason: "must be non-empty without whitespace or commas".into(),
                });
            }
            if self.symbols[..i].contains(s) {
                issues.push(ValidationIssue::DuplicateSymbol { symbol: s.clone() });
            }
        }
    }

    /// Parses a word from text. Single-character alphabets use one character
    /// per symbol ("110"); otherwise symbols are comma-separated.
    pub fn parse_word(&self, text: &str) -> Result<Word, Error> {
        let lookup = |sym: &str| {
            self.index_of(sym).ok_or_else(|| Error::UnknownSymbol {
                symbol: sym.to_string(),
            })
        };
        let symbols = if self.all_single_char() && !text.contains(',') {
            text.chars()
                .map(|c| lookup(&c.to_string()))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            if text.is_empty() {
                Vec::new()
            } else {
                text.split(',').map(lookup).collect::<Result<Vec<_>, _>>()?
            }
        };
        Ok(Word(symbols))
    }

    /// Renders a word as text: joined directly when every symbol is a single
    /// character, comma-separated otherwise.
    pub fn format_word(&self, word: &Word) -> String {
        let parts: Vec<&str> = word.0.iter().map(|&i| self.symbols[i].as_str()).collect();
        if self.all_single_char() {
            parts.concat()
        } else {
            parts.join(",")
        }
    }
}

/// A fixed-length sequence of symbol indices over some alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// Lexicographic rank of this word among all words of the same length
    /// over an alphabet of `base` symbols.
    pub fn rank(&self, base: usize) -> usize {
        self.0.iter().fold(0, |acc, &s| acc * base + s)
    }

    /// Inverse of [`Word::rank`].
    pub fn from_rank(mut rank: usize, len: usize, base: usize) -> Self {
        let mut symbols = vec![0usize; len];
        for slot in symbols.iter_mut().rev() {
            *slot = rank % base;
            rank /= base;
        }
        Word(symbols)
    }

    /// Iterates all words of the given length in lexicographic order.
    pub fn all(len: usize, base: usize) -> impl Iterator<Item = Word> {
        let count = count_words(len, base).unwrap_or(0);
        (0..count).map(move |r| Word::from_rank(r, len, base))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `base^len` as usize, or `None` on overflow.
pub fn count_words(len: usize, base: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..len {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// A discrete memoryless channel: input/output alphabets plus an exact
/// transition matrix with one row per input symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub inputs: Alphabet,
    pub outputs: Alphabet,
    trans: Vec<Vec<Rat>>,
}

impl Channel {
    /// Builds a channel, checking only that the matrix shape matches the
    /// alphabets. Numeric invariants (row sums, entry ranges) are reported
    /// by [`Channel::validate`].
    pub fn new(inputs: Alphabet, outputs: Alphabet, trans: Vec<Vec<Rat>>) -> Result<Self, Error> {
        if trans.len() != inputs.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows, expected {}",
                trans.len(),
                inputs.len()
            )));
        }
        for (i, row) in trans.iter().enumerate() {
            if row.len() != outputs.len() {
                return Err(Error::Dimension(format!(
                    "matrix row {} has {} entries, expected {}",
                    i + 1,
                    row.len(),
                    outputs.len()
                )));
            }
        }
        Ok(Channel {
            inputs,
            outputs,
            trans,
        })
    }

    /// Binary channel with error probabilities `eps0 = p(1|0)` and
    /// `eps1 = p(0|1)`, which must satisfy eps0 > 0, eps1 > 0, eps0 + eps1 < 1.
    /// The failing inequality is reported.
    pub fn binary(eps0: Rat, eps1: Rat) -> Result<Self, Error> {
        if !eps0.is_positive() {
            return Err(Error::ErrorProbZero0(eps0));
        }
        if !eps1.is_positive() {
            return Err(Error::ErrorProbZero1(eps1));
        }
        let sum = &eps0 + &eps1;
        if Rat::one() <= sum {
            return Err(Error::ErrorProbSum(sum));
        }
        let bits = Alphabet::new(vec!["0".into(), "1".into()]);
        let trans = vec![
            vec![Rat::one() - &eps0, eps0],
            vec![eps1.clone(), Rat::one() - &eps1],
        ];
        Channel::new(bits.clone(), bits, trans)
    }

    /// `(eps0, eps1)` when this is a two-symbol channel, regardless of
    /// whether the error-probability inequalities hold.
    pub fn binary_error_probs(&self) -> Result<(Rat, Rat), Error> {
        if self.inputs.len() != 2 || self.outputs.len() != 2 {
            return Err(Error::NotBinary);
        }
        Ok((self.trans[0][1].clone(), self.trans[1][0].clone()))
    }

    /// Single-symbol transition probability p(y|x) by symbol index.
    pub fn prob(&self, x: usize, y: usize) -> &Rat {
        &self.trans[x][y]
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.trans
    }

    /// Word-level probability over independent uses: p(y|x) = prod_j p(y_j|x_j).
    pub fn word_prob(&self, x: &Word, y: &Word) -> Result<Rat, Error> {
        if x.len() != y.len() {
            return Err(Error::WordLength {
                expected: x.len(),
                actual: y.len(),
            });
        }
        let mut acc = Rat::one();
        for (&xs, &ys) in x.symbols().iter().zip(y.symbols()) {
            if xs >= self.inputs.len() {
                return Err(Error::UnknownSymbol {
                    symbol: format!("input #{xs}"),
                });
            }
            if ys >= self.outputs.len() {
                return Err(Error::UnknownSymbol {
                    symbol: format!("output #{ys}"),
                });
            }
            acc = acc * &self.trans[xs][ys];
        }
        Ok(acc)
    }

    /// p(y|x) for every output word y of length `x.len()`, indexed by the
    /// lexicographic rank of y. Built by expanding one position at a time.
    pub fn output_row(&self, x: &Word) -> Vec<Rat> {
        let base = self.outputs.len();
        let mut row = vec![Rat::one()];
        for &xs in x.symbols() {
            let mut next = Vec::with_capacity(row.len() * base);
            for prefix in &row {
                for ys in 0..base {
                    next.push(prefix * &self.trans[xs][ys]);
                }
            }
            row = next;
        }
        row
    }

    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        self.inputs.validate(&mut issues);
        self.outputs.validate(&mut issues);
        if self.trans.len() != self.inputs.len() {
            issues.push(ValidationIssue::MatrixRows {
                expected: self.inputs.len(),
                actual: self.trans.len(),
            });
        }
        for (i, row) in self.trans.iter().enumerate() {
            if row.len() != self.outputs.len() {
                issues.push(ValidationIssue::MatrixCols {
                    row: i + 1,
                    expected: self.outputs.len(),
                    actual: row.len(),
                });
                continue;
            }
            let mut sum = Rat::zero();
            for (j, entry) in row.iter().enumerate() {
                if !entry.in_unit_interval() {
                    issues.push(ValidationIssue::EntryRange {
                        row: i + 1,
                        col: j + 1,
                        value: entry.clone(),
                    });
                }
                sum = sum + entry;
            }
            if sum != Rat::one() {
                issues.push(ValidationIssue::RowSum { row: i + 1, sum });
            }
        }
        issues
    }
}

/// A sender-receiver coordination game over a noisy channel.
///
/// States of nature are 0..M-1 where M = `priors.len()`. Sender and receiver
/// both get positive payoff (`sender_util[i]`, `receiver_util[i]`) exactly
/// when the receiver decodes state `i` correctly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    pub channel: Channel,
    /// Number of independent channel uses (codeword length n).
    pub uses: usize,
    pub priors: Vec<Rat>,
    pub sender_util: Vec<Rat>,
    pub receiver_util: Vec<Rat>,
}

impl Game {
    pub fn new(
        channel: Channel,
        uses: usize,
        priors: Vec<Rat>,
        sender_util: Vec<Rat>,
        receiver_util: Vec<Rat>,
    ) -> Self {
        Game {
            channel,
            uses,
            priors,
            sender_util,
            receiver_util,
        }
    }

    /// Number of states M.
    pub fn states(&self) -> usize {
        self.priors.len()
    }

    /// The receiver's argmax weight q_i * V_i for state i.
    pub fn receiver_weight(&self, state: usize) -> Rat {
        &self.priors[state] * &self.receiver_util[state]
    }

    pub fn output_count(&self) -> Option<usize> {
        count_words(self.uses, self.channel.outputs.len())
    }

    pub fn input_count(&self) -> Option<usize> {
        count_words(self.uses, self.channel.inputs.len())
    }

    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = self.channel.validate();
        if self.uses == 0 {
            issues.push(ValidationIssue::ZeroUses);
        }
        let m = self.states();
        if m == 0 {
            issues.push(ValidationIssue::NoStates);
        }
        let mut sum = Rat::zero();
        for (i, q) in self.priors.iter().enumerate() {
            if !q.is_positive() {
                issues.push(ValidationIssue::NonPositivePrior {
                    state: i,
                    value: q.clone(),
                });
            }
            sum = sum + q;
        }
        if m > 0 && sum != Rat::one() {
            issues.push(ValidationIssue::PriorSum { sum });
        }
        for (section, values) in [
            ("senderUtil", &self.sender_util),
            ("receiverUtil", &self.receiver_util),
        ] {
            if values.len() != m {
                issues.push(ValidationIssue::SectionLength {
                    section,
                    expected: m,
                    actual: values.len(),
                });
            }
        }
        for (i, u) in self.sender_util.iter().enumerate() {
            if !u.is_positive() {
                issues.push(ValidationIssue::NonPositiveSenderUtility {
                    state: i,
                    value: u.clone(),
                });
            }
        }
        for (i, v) in self.receiver_util.iter().enumerate() {
            if !v.is_positive() {
                issues.push(ValidationIssue::NonPositiveReceiverUtility {
                    state: i,
                    value: v.clone(),
                });
            }
        }
        issues
    }
}

/// Checks every type invariant of a game and returns all violations.
pub fn validate_game(game: &Game) -> Result<(), Vec<ValidationIssue>> {
    let issues = game.validate();
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// The sender strategy: one codeword per state. Repeated words are legal
/// (pooling codes).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Codebook(pub Vec<Word>);

impl Codebook {
    pub fn new(words: Vec<Word>) -> Self {
        Codebook(words)
    }

    pub fn words(&self) -> &[Word] {
        &self.0
    }

    pub fn word(&self, state: usize) -> &Word {
        &self.0[state]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Returns a copy with the codeword for one state replaced.
    pub fn with_word(&self, state: usize, word: Word) -> Self {
        let mut words = self.0.clone();
        words[state] = word;
        Codebook(words)
    }

    pub fn validate(&self, game: &Game) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        if self.0.len() != game.states() {
            issues.push(ValidationIssue::CodebookSize {
                expected: game.states(),
                actual: self.0.len(),
            });
        }
        for (state, word) in self.0.iter().enumerate() {
            if word.len() != game.uses {
                issues.push(ValidationIssue::CodewordLength {
                    state,
                    expected: game.uses,
                    actual: word.len(),
                });
            }
            for &s in word.symbols() {
                if s >= game.channel.inputs.len() {
                    issues.push(ValidationIssue::CodewordSymbol { state, symbol: s });
                }
            }
        }
        issues
    }
}

/// Word-level channel probability: p(y|x) = prod_j p(y_j|x_j).
pub fn channel_prob(channel: &Channel, x: &Word, y: &Word) -> Result<Rat, Error> {
    channel.word_prob(x, y)
}

/// See [`Channel::binary`].
pub fn make_binary_channel(eps0: Rat, eps1: Rat) -> Result<Channel, Error> {
    Channel::binary(eps0, eps1)
}
