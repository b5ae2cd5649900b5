//! Instance files: JSON schemas, canonical save/load, and seeded random
//! instance generation.
//!
//! An instance file bundles a channel, a game, a codebook, and optionally a
//! decoder. Rationals are serialized as strings ("17/20" or "0.85") so the
//! round trip is lossless; canonical form uses reduced fractions and sorted
//! table keys, making save-load-save idempotent.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoding::{DecoderTable, TieBreakRule};
use crate::equilibrium::DecoderSpec;
use crate::error::{Error, ValidationIssue};
use crate::model::{Alphabet, Channel, Codebook, Game, Word};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub matrix: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    #[serde(rename = "n")]
    pub uses: usize,
    pub priors: Vec<Rat>,
    #[serde(rename = "senderUtil")]
    pub sender_util: Vec<Rat>,
    #[serde(rename = "receiverUtil")]
    pub receiver_util: Vec<Rat>,
}

/// A word as text ("110") or as an explicit symbol list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordRepr {
    Joined(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    pub words: Vec<WordRepr>,
}

/// Decoder section: a tie-break rule or an explicit table
/// {output word: {state index: probability}}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule")]
pub enum DecoderRepr {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "weighted")]
    Weighted { weights: Vec<Rat> },
    #[serde(rename = "fixed-order")]
    FixedOrder { order: Vec<usize> },
    #[serde(rename = "table")]
    Table {
        entries: BTreeMap<String, BTreeMap<String, Rat>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
    pub channel: ChannelSpec,
    pub game: GameSpec,
    pub codebook: CodebookSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<DecoderRepr>,
}

/// An instance file resolved into engine types, with referential consistency
/// checked.
#[derive(Debug, Clone)]
pub struct CompiledInstance {
    pub game: Game,
    pub codebook: Codebook,
    pub decoder: Option<DecoderSpec>,
    pub metadata: Option<Metadata>,
}

impl InstanceFile {
    pub fn from_parts(
        game: &Game,
        codebook: &Codebook,
        decoder: Option<&DecoderRepr>,
        metadata: Option<Metadata>,
    ) -> Self {
        let format_word = |w: &Word| {
            if game.channel.inputs.all_single_char() {
                WordRepr::Joined(game.channel.inputs.format_word(w))
            } else {
                WordRepr::List(
                    w.symbols()
                        .iter()
                        .map(|&s| game.channel.inputs.symbols()[s].clone())
                        .collect(),
                )
            }
        };
        InstanceFile {
            metadata,
            channel: ChannelSpec {
                inputs: game.channel.inputs.symbols().to_vec(),
                outputs: game.channel.outputs.symbols().to_vec(),
                matrix: game.channel.matrix().to_vec(),
            },
            game: GameSpec {
                uses: game.uses,
                priors: game.priors.clone(),
                sender_util: game.sender_util.clone(),
                receiver_util: game.receiver_util.clone(),
            },
            codebook: CodebookSpec {
                words: codebook.words().iter().map(format_word).collect(),
            },
            decoder: decoder.cloned(),
        }
    }

    /// Resolves the file into engine types, collecting every violation.
    pub fn compile(&self) -> Result<CompiledInstance, Error> {
        let channel = Channel::new(
            Alphabet::new(self.channel.inputs.clone()),
            Alphabet::new(self.channel.outputs.clone()),
            self.channel.matrix.clone(),
        )?;
        let game = Game::new(
            channel,
            self.game.uses,
            self.game.priors.clone(),
            self.game.sender_util.clone(),
            self.game.receiver_util.clone(),
        );
        let mut issues = game.validate();

        let mut words = Vec::with_capacity(self.codebook.words.len());
        for (state, repr) in self.codebook.words.iter().enumerate() {
            match parse_word_repr(&game.channel.inputs, repr) {
                Ok(word) => words.push(word),
                Err(_) => {
                    issues.push(ValidationIssue::CodewordSymbol {
                        state,
                        symbol: usize::MAX,
                    });
                    words.push(Word(Vec::new()));
                }
            }
        }
        let codebook = Codebook::new(words);
        issues.extend(codebook.validate(&game));
        if !issues.is_empty() {
            return Err(Error::invalid(issues));
        }

        let decoder = match &self.decoder {
            None => None,
            Some(repr) => Some(compile_decoder(repr, &game)?),
        };
        Ok(CompiledInstance {
            game,
            codebook,
            decoder,
            metadata: self.metadata.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("serializable");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            context: format!("writing {}", path.display()),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            context: format!("reading {}", path.display()),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            context: format!("parsing {}", path.display()),
            source,
        })
    }
}

fn parse_word_repr(alphabet: &Alphabet, repr: &WordRepr) -> Result<Word, Error> {
    match repr {
        WordRepr::Joined(text) => alphabet.parse_word(text),
        WordRepr::List(symbols) => {
            let indices = symbols
                .iter()
                .map(|s| {
                    alphabet
                        .index_of(s)
                        .ok_or_else(|| Error::UnknownSymbol { symbol: s.clone() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Word(indices))
        }
    }
}

fn compile_decoder(repr: &DecoderRepr, game: &Game) -> Result<DecoderSpec, Error> {
    let m = game.states();
    match repr {
        DecoderRepr::Uniform => Ok(DecoderSpec::Rule(TieBreakRule::Uniform)),
        DecoderRepr::Weighted { weights } => {
            let rule = TieBreakRule::Weighted(weights.clone());
            rule.validate(m)?;
            Ok(DecoderSpec::Rule(rule))
        }
        DecoderRepr::FixedOrder { order } => {
            let rule = TieBreakRule::FixedOrder(order.clone());
            rule.validate(m)?;
            Ok(DecoderSpec::Rule(rule))
        }
        DecoderRepr::Table { entries } => {
            let outputs = game
                .output_count()
                .ok_or_else(|| Error::Dimension("output space size overflows".into()))?;
            let bad = |reason: String| Error::invalid(vec![ValidationIssue::BadTable { reason }]);
            let mut rows = vec![None; outputs];
            for (key, dist) in entries {
                let word = game.channel.outputs.parse_word(key)?;
                if word.len() != game.uses {
                    return Err(bad(format!(
                        "entry '{key}' has length {}, expected {}",
                        word.len(),
                        game.uses
                    )));
                }
                let rank = word.rank(game.channel.outputs.len());
                let mut row = vec![Rat::zero(); m];
                for (state_key, prob) in dist {
                    let state: usize = state_key
                        .parse()
                        .map_err(|_| bad(format!("bad state index '{state_key}'")))?;
                    if state >= m {
                        return Err(bad(format!("state {state} out of range")));
                    }
                    row[state] = prob.clone();
                }
                rows[rank] = Some(row);
            }
            let missing: Vec<usize> = rows
                .iter()
                .enumerate()
                .filter_map(|(rank, row)| row.is_none().then_some(rank))
                .collect();
            if !missing.is_empty() {
                let word = Word::from_rank(missing[0], game.uses, game.channel.outputs.len());
                return Err(bad(format!(
                    "missing entries for {} outputs, first is '{}'",
                    missing.len(),
                    game.channel.outputs.format_word(&word)
                )));
            }
            let table = DecoderTable::new(
                m,
                game.channel.outputs.len(),
                game.uses,
                rows.into_iter().map(|row| row.unwrap()).collect(),
            )?;
            Ok(DecoderSpec::Table(table))
        }
    }
}

/// Renders a decoder table back into its JSON representation.
pub fn table_to_repr(game: &Game, table: &DecoderTable) -> DecoderRepr {
    let mut entries = BTreeMap::new();
    for rank in 0..table.output_count() {
        let word = Word::from_rank(rank, game.uses, game.channel.outputs.len());
        let mut dist = BTreeMap::new();
        for state in 0..table.num_states() {
            let p = table.prob_at(rank, state);
            if !p.is_zero() {
                dist.insert(state.to_string(), p.clone());
            }
        }
        entries.insert(game.channel.outputs.format_word(&word), dist);
    }
    DecoderRepr::Table { entries }
}

/// See [`InstanceFile::load`].
pub fn load_instance(path: &Path) -> Result<InstanceFile, Error> {
    InstanceFile::load(path)
}

/// See [`InstanceFile::save`].
pub fn save_instance(instance: &InstanceFile, path: &Path) -> Result<(), Error> {
    instance.save(path)
}

/// Shape of a randomly generated instance.
#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub seed: u64,
    pub states: usize,
    pub input_symbols: usize,
    pub output_symbols: usize,
    pub uses: usize,
    pub max_denominator: u64,
    /// Generate a binary channel satisfying the error-probability
    /// inequalities instead of an arbitrary positive channel.
    pub binary: bool,
}

fn symbol_names(count: usize) -> Vec<String> {
    const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";
    (0..count)
        .map(|i| {
            if i < DIGITS.len() {
                (DIGITS[i] as char).to_string()
            } else {
                format!("s{i}")
            }
        })
        .collect()
}

fn random_positive_distribution(rng: &mut ChaCha8Rng, len: usize, max_den: u64) -> Vec<Rat> {
    let parts: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=max_den)).collect();
    let total: u64 = parts.iter().sum();
    parts
        .into_iter()
        .map(|p| Rat::new(p as i64, total as i64).expect("positive total"))
        .collect()
}

fn random_positive_rational(rng: &mut ChaCha8Rng, max_den: u64) -> Rat {
    let num = rng.gen_range(1..=max_den);
    let den = rng.gen_range(1..=max_den);
    Rat::new(num as i64, den as i64).expect("positive denominator")
}

/// A random binary channel under eps0 > 0, eps1 > 0, eps0 + eps1 < 1,
/// sampled by rejection.
pub fn random_binary_channel(rng: &mut ChaCha8Rng, max_den: u64) -> Channel {
    loop {
        let den0 = rng.gen_range(2..=max_den.max(2));
        let den1 = rng.gen_range(2..=max_den.max(2));
        let eps0 = Rat::new(rng.gen_range(1..den0) as i64, den0 as i64).expect("positive");
        let eps1 = Rat::new(rng.gen_range(1..den1) as i64, den1 as i64).expect("positive");
        if let Ok(channel) = Channel::binary(eps0, eps1) {
            return channel;
        }
    }
}

fn random_game(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> Game {
    let channel = if spec.binary {
        random_binary_channel(rng, spec.max_denominator)
    } else {
        let inputs = Alphabet::new(symbol_names(spec.input_symbols));
        let outputs = Alphabet::new(symbol_names(spec.output_symbols));
        let matrix = (0..spec.input_symbols)
            .map(|_| random_positive_distribution(rng, spec.output_symbols, spec.max_denominator))
            .collect();
        Channel::new(inputs, outputs, matrix).expect("matrix shape matches")
    };
    let priors = random_positive_distribution(rng, spec.states, spec.max_denominator);
    let sender_util = (0..spec.states)
        .map(|_| random_positive_rational(rng, spec.max_denominator))
        .collect();
    let receiver_util = (0..spec.states)
        .map(|_| random_positive_rational(rng, spec.max_denominator))
        .collect();
    Game::new(channel, spec.uses, priors, sender_util, receiver_util)
}

fn random_codebook(rng: &mut ChaCha8Rng, game: &Game) -> Codebook {
    let base = game.channel.inputs.len();
    Codebook::new(
        (0..game.states())
            .map(|_| Word((0..game.uses).map(|_| rng.gen_range(0..base)).collect()))
            .collect(),
    )
}

/// Deterministically generates a random instance: positive channel rows that
/// sum exactly to 1, normalized positive priors, positive utilities, and a
/// random codebook. The same spec always yields the identical file.
pub fn random_instance(spec: &RandomSpec) -> InstanceFile {
    let (game, codebook) = random_game_and_codebook(spec);
    InstanceFile::from_parts(
        &game,
        &codebook,
        None,
        Some(Metadata {
            name: Some(format!("random-{}", spec.seed)),
            seed: Some(spec.seed),
        }),
    )
}

/// The engine-typed variant of [`random_instance`].
pub fn random_game_and_codebook(spec: &RandomSpec) -> (Game, Codebook) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let game = random_game(&mut rng, spec);
    let codebook = random_codebook(&mut rng, &game);
    (game, codebook)
}

/// A random binary game with the given shape, deterministic in the seed.
pub fn random_binary_game(seed: u64, states: usize, uses: usize, max_denominator: u64) -> Game {
    let spec = RandomSpec {
        seed,
        states,
        input_symbols: 2,
        output_symbols: 2,
        uses,
        max_denominator,
        binary: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_game(&mut rng, &spec)
}
