//! Bundled worked-example instances with their expected values.
//!
//! Two instances are embedded: a three-symbol channel used once with two
//! states, whose six distinct-codeword codebooks exercise every Nash verdict,
//! and a four-codeword binary instance (M=4, n=3) whose tie structure
//! separates monotonic from non-monotonic decoding. `reproduce_tables`
//! recomputes every numeric cell from scratch and diffs it against the
//! embedded expectations; any mismatch is a regression.

use crate::decoding::{decoder_from_rule, tie_structure, DecoderTable, TieBreakRule};
use crate::equilibrium::{correct_decode_prob, receiver_payoff, sender_payoff};
use crate::error::Error;
use crate::model::{Alphabet, Channel, Codebook, Game, Word};
use crate::rat::Rat;

fn r(num: i64, den: i64) -> Rat {
    Rat::new(num, den).expect("nonzero denominator")
}

fn w(symbols: &[usize]) -> Word {
    Word(symbols.to_vec())
}

/// Expected values for one codebook of a reference instance.
#[derive(Debug, Clone)]
pub struct CodebookRow {
    pub codebook: Codebook,
    /// Y_i per state, as output ranks.
    pub classes: Vec<Vec<usize>>,
    /// p(y in Y_i | x^i) per state.
    pub decode_probs: Vec<Rat>,
    pub sender_payoff: Rat,
    pub receiver_payoff: Rat,
    pub is_nash: bool,
    /// Expected profitable deviation (state, word) when not Nash.
    pub witness: Option<(usize, Word)>,
}

/// A bundled game with per-codebook expectations.
#[derive(Debug, Clone)]
pub struct ReferenceInstance {
    pub name: &'static str,
    pub game: Game,
    pub rows: Vec<CodebookRow>,
}

/// The three-symbol instance: X = Y = {0,1,2}, n = 1, uniform priors over
/// two states, U = (2,8), V = (8,2).
pub fn ternary_game() -> Game {
    let symbols = Alphabet::new(vec!["0".into(), "1".into(), "2".into()]);
    let trans = vec![
        vec![r(17, 20), r(1, 10), r(1, 20)],
        vec![r(1, 10), r(13, 20), r(1, 4)],
        vec![Rat::zero(), r(3, 10), r(7, 10)],
    ];
    let channel = Channel::new(symbols.clone(), symbols, trans).expect("well-formed matrix");
    Game::new(
        channel,
        1,
        vec![r(1, 2), r(1, 2)],
        vec![r(2, 1), r(8, 1)],
        vec![r(8, 1), r(2, 1)],
    )
}

/// The ternary instance with all six distinct-codeword codebooks: their
/// best-response partitions, per-codeword decode probabilities, payoffs,
/// Nash verdicts, and deviation witnesses.
pub fn ternary_instance() -> ReferenceInstance {
    let game = ternary_game();
    let row = |a: usize,
               b: usize,
               classes: [&[usize]; 2],
               probs: (Rat, Rat),
               u: Rat,
               v: Rat,
               witness: Option<(usize, Word)>| {
        CodebookRow {
            codebook: Codebook::new(vec![w(&[a]), w(&[b])]),
            classes: classes.iter().map(|c| c.to_vec()).collect(),
            decode_probs: vec![probs.0, probs.1],
            sender_payoff: u,
            receiver_payoff: v,
            is_nash: witness.is_none(),
            witness,
        }
    };
    ReferenceInstance {
        name: "ternary",
        game,
        rows: vec![
            row(
                0,
                1,
                [&[0], &[1, 2]],
                (r(17, 20), r(9, 10)),
                r(89, 20),
                r(43, 10),
                Some((1, w(&[2]))),
            ),
            row(
                0,
                2,
                [&[0, 1], &[2]],
                (r(19, 20), r(7, 10)),
                r(15, 4),
                r(9, 2),
                None,
            ),
            row(
                1,
                0,
                [&[1, 2], &[0]],
                (r(9, 10), r(17, 20)),
                r(43, 10),
                r(89, 20),
                Some((0, w(&[2]))),
            ),
            row(
                1,
                2,
                [&[0, 1, 2], &[]],
                (Rat::one(), Rat::zero()),
                Rat::one(),
                r(4, 1),
                None,
            ),
            row(
                2,
                0,
                [&[1, 2], &[0]],
                (Rat::one(), r(17, 20)),
                r(22, 5),
                r(97, 20),
                None,
            ),
            row(
                2,
                1,
                [&[1, 2], &[0]],
                (Rat::one(), r(1, 10)),
                r(7, 5),
                r(41, 10),
                Some((1, w(&[0]))),
            ),
        ],
    }
}

/// Expected cells of the weighted-likelihood table q_i V_i p(y|x^i) for the
/// ternary codebook 0,1: one row per state, one column per output symbol.
pub fn weighted_likelihood_table() -> Vec<Vec<Rat>> {
    vec![
        vec![r(17, 5), r(2, 5), r(1, 5)],
        vec![r(1, 10), r(13, 20), r(1, 4)],
    ]
}

/// A fixed decoder under which a multi-codeword change moves sender and
/// receiver payoffs in opposite directions (so receiver payoff is not a
/// potential for the two-player game, only for the per-state agents).
#[derive(Debug, Clone)]
pub struct FixedDecoderComparison {
    pub game: Game,
    /// Decodes outputs 0, 1, 2 as states 0, 0, 1.
    pub decoder: DecoderTable,
    pub base: Codebook,
    pub changed: Codebook,
    /// (sender, receiver) payoffs for `base` under `decoder`.
    pub base_payoffs: (Rat, Rat),
    /// (sender, receiver) payoffs for `changed` under `decoder`.
    pub changed_payoffs: (Rat, Rat),
}

pub fn fixed_decoder_comparison() -> FixedDecoderComparison {
    FixedDecoderComparison {
        game: ternary_game(),
        decoder: DecoderTable::deterministic(2, 3, 1, &[0, 0, 1]).expect("valid table"),
        base: Codebook::new(vec![w(&[0]), w(&[1])]),
        changed: Codebook::new(vec![w(&[1]), w(&[2])]),
        base_payoffs: (r(39, 20), r(81, 20)),
        changed_payoffs: (r(71, 20), r(37, 10)),
    }
}

/// The four-codeword binary instance and its expected tie structure and
/// witnesses.
#[derive(Debug, Clone)]
pub struct BinaryReference {
    pub name: &'static str,
    pub game: Game,
    pub codebook: Codebook,
    /// Y_i per state, as output ranks.
    pub classes: Vec<Vec<usize>>,
    /// Best response that decodes 110, 011, 101 as states 1, 2, 3 and 111 as
    /// state 1. Not monotonic, and not a Nash code.
    pub circular: DecoderTable,
    /// Monotonic deterministic decoding by the natural state order.
    pub fixed_order: TieBreakRule,
    /// Expected monotonicity violation of `circular`: (y, y', state).
    pub monotonicity_witness: (Word, Word, usize),
    /// Expected profitable deviation against `circular`: (state, word).
    pub nash_witness: (usize, Word),
    /// Single-codeword change that strictly improves the receiver's
    /// best-response payoff even though the fixed-order pair is Nash.
    pub improving_change: (usize, Word),
}

/// Binary symmetric channel with error probability 1/10, M = 4 states with
/// uniform priors and unit utilities, codebook 000, 100, 010, 001.
pub fn binary_instance() -> BinaryReference {
    let channel = Channel::binary(r(1, 10), r(1, 10)).expect("legal error probabilities");
    let game = Game::new(
        channel,
        3,
        vec![r(1, 4); 4],
        vec![Rat::one(); 4],
        vec![Rat::one(); 4],
    );
    let codebook = Codebook::new(vec![
        w(&[0, 0, 0]),
        w(&[1, 0, 0]),
        w(&[0, 1, 0]),
        w(&[0, 0, 1]),
    ]);
    // output ranks follow the binary value of the word: 000=0 .. 111=7
    let classes = vec![
        vec![0],
        vec![4, 5, 6, 7],
        vec![2, 3, 6, 7],
        vec![1, 3, 5, 7],
    ];
    let circular = DecoderTable::deterministic(4, 2, 3, &[0, 3, 2, 2, 1, 3, 1, 1])
        .expect("valid deterministic table");
    BinaryReference {
        name: "binary-four-codewords",
        game,
        codebook,
        classes,
        circular,
        fixed_order: TieBreakRule::FixedOrder(vec![0, 1, 2, 3]),
        monotonicity_witness: (w(&[1, 0, 1]), w(&[1, 1, 1]), 1),
        nash_witness: (1, w(&[1, 1, 0])),
        improving_change: (1, w(&[1, 1, 0])),
    }
}

/// One recomputed cell that disagrees with its embedded expectation.
#[derive(Debug, Clone)]
pub struct CellDiff {
    pub table: &'static str,
    pub row: String,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

/// Result of recomputing the embedded tables.
#[derive(Debug, Clone, Default)]
pub struct TableReport {
    pub cells_checked: usize,
    pub mismatches: Vec<CellDiff>,
}

impl TableReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn check(
        &mut self,
        table: &'static str,
        row: String,
        column: String,
        expected: String,
        actual: String,
    ) {
        self.cells_checked += 1;
        if expected != actual {
            self.mismatches.push(CellDiff {
                table,
                row,
                column,
                expected,
                actual,
            });
        }
    }
}

/// Recomputes every numeric cell of the embedded tables (the weighted
/// likelihood table for codebook 0,1 and the six-codebook table with its
/// partitions, decode probabilities, and payoffs) and diffs them against
/// the expected values. Exact match required.
pub fn reproduce_tables() -> Result<TableReport, Error> {
    let mut report = TableReport::default();
    let instance = ternary_instance();
    let game = &instance.game;

    // weighted likelihoods q_i V_i p(y|x^i) for codebook 0,1
    let expected = weighted_likelihood_table();
    let codeword = [0usize, 1];
    for (i, row) in expected.iter().enumerate() {
        let weight = game.receiver_weight(i);
        for (y, cell) in row.iter().enumerate() {
            let actual = &weight * game.channel.prob(codeword[i], y);
            report.check(
                "weighted-likelihood",
                format!("state {i}"),
                format!("output {y}"),
                cell.to_string(),
                actual.to_string(),
            );
        }
    }

    // six-codebook table
    for row in &instance.rows {
        let label = format!(
            "{},{}",
            game.channel.inputs.format_word(row.codebook.word(0)),
            game.channel.inputs.format_word(row.codebook.word(1)),
        );
        let structure = tie_structure(game, &row.codebook)?;
        for (state, expected_class) in row.classes.iter().enumerate() {
            report.check(
                "six-codebooks",
                label.clone(),
                format!("Y_{state}"),
                format!("{expected_class:?}"),
                format!("{:?}", structure.class(state)),
            );
        }
        let table = decoder_from_rule(&structure, &TieBreakRule::Uniform)?;
        for (state, expected_prob) in row.decode_probs.iter().enumerate() {
            let actual = correct_decode_prob(game, &table, state, row.codebook.word(state))?;
            report.check(
                "six-codebooks",
                label.clone(),
                format!("decode prob {state}"),
                expected_prob.to_string(),
                actual.to_string(),
            );
        }
        let u = sender_payoff(game, &row.codebook, &table)?;
        let v = receiver_payoff(game, &row.codebook, &table)?;
        report.check(
            "six-codebooks",
            label.clone(),
            "U".into(),
            row.sender_payoff.to_string(),
            u.to_string(),
        );
        report.check(
            "six-codebooks",
            label,
            "V".into(),
            row.receiver_payoff.to_string(),
            v.to_string(),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoding::{is_best_response, is_monotonic};

    #[test]
    fn tables_reproduce_exactly() {
        let report = reproduce_tables().unwrap();
        assert!(
            report.is_clean(),
            "mismatched cells: {:?}",
            report.mismatches
        );
        // 6 weighted likelihood cells + 6 rows x (2 classes + 2 probs + U + V)
        assert_eq!(report.cells_checked, 6 + 6 * 6);
    }

    #[test]
    fn embedded_games_validate() {
        assert!(ternary_instance().game.validate().is_empty());
        assert!(binary_instance().game.validate().is_empty());
    }

    #[test]
    fn binary_reference_classes_match_engine() {
        let b = binary_instance();
        let structure = tie_structure(&b.game, &b.codebook).unwrap();
        for (state, class) in b.classes.iter().enumerate() {
            assert_eq!(&structure.class(state), class);
        }
    }

    #[test]
    fn circular_decoder_is_a_best_response() {
        let b = binary_instance();
        let structure = tie_structure(&b.game, &b.codebook).unwrap();
        assert_eq!(is_best_response(&b.circular, &structure).unwrap(), None);
        assert!(!is_monotonic(&b.circular, &structure)
            .unwrap()
            .is_monotonic());
    }

    #[test]
    fn fixed_decoder_comparison_values() {
        let cmp = fixed_decoder_comparison();
        assert_eq!(
            sender_payoff(&cmp.game, &cmp.base, &cmp.decoder).unwrap(),
            cmp.base_payoffs.0
        );
        assert_eq!(
            receiver_payoff(&cmp.game, &cmp.base, &cmp.decoder).unwrap(),
            cmp.base_payoffs.1
        );
        assert_eq!(
            sender_payoff(&cmp.game, &cmp.changed, &cmp.decoder).unwrap(),
            cmp.changed_payoffs.0
        );
        assert_eq!(
            receiver_payoff(&cmp.game, &cmp.changed, &cmp.decoder).unwrap(),
            cmp.changed_payoffs.1
        );
        // sender strictly up, receiver strictly down
        assert!(cmp.changed_payoffs.0 > cmp.base_payoffs.0);
        assert!(cmp.changed_payoffs.1 < cmp.base_payoffs.1);
    }
}
