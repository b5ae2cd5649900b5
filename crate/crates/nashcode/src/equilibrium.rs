//! Payoff computation and Nash-code verification.
//!
//! A codebook paired with a decoder is a Nash code when the decoder is a
//! best response and no state's codeword can be replaced by another channel
//! input with a strictly higher probability of being decoded correctly.
//! Verification enumerates every alternative input word per state; mixed
//! deviations are covered because the sender's expected payoff is linear in
//! the distribution over inputs, so some pure deviation is always maximal.

use crate::decoding::{
    decoder_from_rule, is_best_response, tie_structure, DecoderTable, TieBreakRule,
};
use crate::error::Error;
use crate::model::{Codebook, Game, Word};
use crate::rat::Rat;
use crate::Budget;

/// Either a tie-break rule (decoder derived against the codebook's tie
/// structure) or an explicit decoding table.
#[derive(Debug, Clone)]
pub enum DecoderSpec {
    Rule(TieBreakRule),
    Table(DecoderTable),
}

/// A strictly profitable sender deviation: transmitting `alternative` in
/// `state` is decoded correctly more often than the codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationWitness {
    pub state: usize,
    pub alternative: Word,
    pub current_prob: Rat,
    pub deviation_prob: Rat,
}

/// Verdict of [`check_nash`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NashReport {
    pub is_nash: bool,
    /// Whether the decoder satisfies the receiver's best-response condition.
    pub receiver_side_ok: bool,
    /// Correct-decode probability per state under the given decoder.
    pub per_state: Vec<Rat>,
    pub sender_payoff: Rat,
    pub receiver_payoff: Rat,
    /// The lexicographically least (state, word) maximizing the improvement,
    /// when any strictly profitable deviation exists.
    pub witness: Option<DeviationWitness>,
    /// Per state, whether the codeword is the unique maximizer of the
    /// correct-decode probability. Recorded only as a diagnostic.
    pub unique_optimum: Vec<bool>,
}

fn check_table_dims(game: &Game, table: &DecoderTable) -> Result<(), Error> {
    let outputs = game
        .output_count()
        .ok_or_else(|| Error::Dimension("output space size overflows".into()))?;
    if table.num_states() != game.states()
        || table.output_count() != outputs
        || table.output_base() != game.channel.outputs.len()
    {
        return Err(Error::Dimension(
            "decoder table does not match the game's dimensions".into(),
        ));
    }
    Ok(())
}

/// The probability that transmitting `x` in `state` is decoded as `state`:
/// sum over outputs y of p(y|x) d(y, state).
pub fn correct_decode_prob(
    game: &Game,
    table: &DecoderTable,
    state: usize,
    x: &Word,
) -> Result<Rat, Error> {
    check_table_dims(game, table)?;
    if x.len() != game.uses {
        return Err(Error::WordLength {
            expected: game.uses,
            actual: x.len(),
        });
    }
    let row = game.channel.output_row(x);
    Ok(sparse_dot(&row, table, state))
}

fn sparse_dot(row: &[Rat], table: &DecoderTable, state: usize) -> Rat {
    let mut acc = Rat::zero();
    for (y, p) in row.iter().enumerate() {
        let d = table.prob_at(y, state);
        if !d.is_zero() {
            acc = acc + &(p * d);
        }
    }
    acc
}

/// Expected sender payoff: sum over states of q_i U_i times the
/// correct-decode probability of the codeword.
pub fn sender_payoff(game: &Game, code: &Codebook, table: &DecoderTable) -> Result<Rat, Error> {
    expected_payoff(game, code, table, &game.sender_util)
}

/// Expected receiver payoff, analogous with V_i.
pub fn receiver_payoff(game: &Game, code: &Codebook, table: &DecoderTable) -> Result<Rat, Error> {
    expected_payoff(game, code, table, &game.receiver_util)
}

fn expected_payoff(
    game: &Game,
    code: &Codebook,
    table: &DecoderTable,
    utils: &[Rat],
) -> Result<Rat, Error> {
    check_table_dims(game, table)?;
    let issues = code.validate(game);
    if !issues.is_empty() {
        return Err(Error::invalid(issues));
    }
    let mut total = Rat::zero();
    for state in 0..game.states() {
        let row = game.channel.output_row(code.word(state));
        let prob = sparse_dot(&row, table, state);
        total = total + &game.priors[state] * &utils[state] * prob;
    }
    Ok(total)
}

/// The receiver's payoff under any best response to `code`:
/// sum over outputs y of max_i q_i V_i p(y|x^i). Every best-response decoder
/// attains exactly this value.
pub fn receiver_value(game: &Game, code: &Codebook) -> Result<Rat, Error> {
    let issues = code.validate(game);
    if !issues.is_empty() {
        return Err(Error::invalid(issues));
    }
    let m = game.states();
    let rows: Vec<Vec<Rat>> = (0..m)
        .map(|i| {
            let w = game.receiver_weight(i);
            game.channel
                .output_row(code.word(i))
                .into_iter()
                .map(|p| &w * &p)
                .collect()
        })
        .collect();
    let outputs = rows[0].len();
    let mut total = Rat::zero();
    for y in 0..outputs {
        let mut best = &rows[0][y];
        for row in rows.iter().skip(1) {
            if row[y] > *best {
                best = &row[y];
            }
        }
        total = total + best;
    }
    Ok(total)
}

struct StateScan {
    current: Rat,
    max: Rat,
    /// Lexicographically least word attaining the maximum.
    argmax: Word,
}

fn scan_state(
    game: &Game,
    table: &DecoderTable,
    state: usize,
    codeword: &Word,
) -> Result<StateScan, Error> {
    let current = {
        let row = game.channel.output_row(codeword);
        sparse_dot(&row, table, state)
    };
    let mut max: Option<Rat> = None;
    let mut argmax: Option<Word> = None;
    for x in Word::all(game.uses, game.channel.inputs.len()) {
        let row = game.channel.output_row(&x);
        let value = sparse_dot(&row, table, state);
        let better = match &max {
            Some(best) => value > *best,
            None => true,
        };
        if better {
            max = Some(value);
            argmax = Some(x);
        }
    }
    Ok(StateScan {
        current,
        max: max.expect("input space is nonempty"),
        argmax: argmax.expect("input space is nonempty"),
    })
}

/// Verifies the Nash-code conditions by exhaustive enumeration of all
/// alternative inputs for each state.
///
/// With a [`DecoderSpec::Rule`], the decoder is derived against this
/// codebook's tie structure and the receiver side holds by construction.
/// With an explicit table, the receiver's best-response condition is checked
/// and reported in `receiver_side_ok`; the sender side is evaluated either
/// way.
pub fn check_nash(
    game: &Game,
    code: &Codebook,
    decoder: &DecoderSpec,
    budget: Budget,
) -> Result<NashReport, Error> {
    let structure = tie_structure(game, code)?;
    let (table, receiver_side_ok) = match decoder {
        DecoderSpec::Rule(rule) => (decoder_from_rule(&structure, rule)?, true),
        DecoderSpec::Table(table) => {
            check_table_dims(game, table)?;
            let ok = is_best_response(table, &structure)?.is_none();
            (table.clone(), ok)
        }
    };
    let candidates = game
        .input_count()
        .ok_or_else(|| Error::Dimension("input space size overflows".into()))?;
    budget.admit(candidates as u128)?;

    let m = game.states();
    let per_state: Vec<Rat> = (0..m)
        .map(|state| {
            let row = game.channel.output_row(code.word(state));
            sparse_dot(&row, &table, state)
        })
        .collect();
    // one pass over the candidate inputs, evaluating every state on the
    // same channel row
    let mut max: Vec<Option<Rat>> = vec![None; m];
    let mut argmax: Vec<Option<Word>> = vec![None; m];
    let mut max_count = vec![0usize; m];
    for x in Word::all(game.uses, game.channel.inputs.len()) {
        let row = game.channel.output_row(&x);
        for state in 0..m {
            let value = sparse_dot(&row, &table, state);
            match &max[state] {
                Some(best) if value > *best => {
                    max[state] = Some(value);
                    argmax[state] = Some(x.clone());
                    max_count[state] = 1;
                }
                Some(best) if value == *best => max_count[state] += 1,
                Some(_) => {}
                None => {
                    max[state] = Some(value);
                    argmax[state] = Some(x.clone());
                    max_count[state] = 1;
                }
            }
        }
    }
    let mut unique_optimum = Vec::with_capacity(m);
    let mut witness: Option<DeviationWitness> = None;
    let mut best_improvement = Rat::zero();
    for state in 0..m {
        let best = max[state].take().expect("input space is nonempty");
        unique_optimum.push(max_count[state] == 1 && best == per_state[state]);
        if best > per_state[state] {
            let improvement = &best - &per_state[state];
            if improvement > best_improvement {
                best_improvement = improvement;
                witness = Some(DeviationWitness {
                    state,
                    alternative: argmax[state].take().expect("argmax recorded"),
                    current_prob: per_state[state].clone(),
                    deviation_prob: best,
                });
            }
        }
    }

    let weighted = |utils: &[Rat]| -> Rat {
        (0..m)
            .map(|i| &game.priors[i] * &utils[i] * per_state[i].clone())
            .sum()
    };
    Ok(NashReport {
        is_nash: receiver_side_ok && witness.is_none(),
        receiver_side_ok,
        sender_payoff: weighted(&game.sender_util),
        receiver_payoff: weighted(&game.receiver_util),
        witness,
        per_state,
        unique_optimum,
    })
}

/// The lexicographically least input word maximizing the correct-decode
/// probability for `state`, when it strictly beats the codeword.
pub fn best_deviation(
    game: &Game,
    code: &Codebook,
    table: &DecoderTable,
    state: usize,
    budget: Budget,
) -> Result<Option<DeviationWitness>, Error> {
    check_table_dims(game, table)?;
    let candidates = game
        .input_count()
        .ok_or_else(|| Error::Dimension("input space size overflows".into()))?;
    budget.admit(candidates as u128)?;
    let scan = scan_state(game, table, state, code.word(state))?;
    if scan.max > scan.current {
        Ok(Some(DeviationWitness {
            state,
            alternative: scan.argmax,
            current_prob: scan.current,
            deviation_prob: scan.max,
        }))
    } else {
        Ok(None)
    }
}

/// The uninformative equilibrium: every state sends the all-first-symbol
/// word and the receiver decodes everything as the state with the highest
/// receiver weight q_i V_i (lowest index on ties). Always a Nash code.
pub fn pooling_code(game: &Game) -> Result<(Codebook, DecoderTable), Error> {
    let m = game.states();
    if m == 0 || game.channel.inputs.is_empty() {
        return Err(Error::Dimension("game has no states or no inputs".into()));
    }
    let mut winner = 0usize;
    for i in 1..m {
        if game.receiver_weight(i) > game.receiver_weight(winner) {
            winner = i;
        }
    }
    let word = Word(vec![0; game.uses]);
    let code = Codebook::new(vec![word; m]);
    let outputs = game
        .output_count()
        .ok_or_else(|| Error::Dimension("output space size overflows".into()))?;
    let table = DecoderTable::deterministic(
        m,
        game.channel.outputs.len(),
        game.uses,
        &vec![winner; outputs],
    )?;
    Ok((code, table))
}
