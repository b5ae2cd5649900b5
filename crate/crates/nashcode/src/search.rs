//! Receiver-optimal code search and better-reply dynamics.
//!
//! The receiver's best-response payoff acts as an exact potential: any
//! single-codeword change that profits the sender against a fixed decoder
//! strictly raises it. Local search and the deviation-driven dynamics both
//! climb that potential, so they terminate, and their terminal codes are
//! Nash codes.

use crate::decoding::{decoder_from_rule, tie_structure, TieBreakRule};
use crate::equilibrium::{best_deviation, receiver_value, sender_payoff};
use crate::error::Error;
use crate::model::{Codebook, Game, Word};
use crate::rat::Rat;
use crate::Budget;

/// One accepted configuration along a search run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub codebook: Codebook,
    /// The state whose codeword changed, `None` for the starting point.
    pub changed_state: Option<usize>,
    /// Receiver payoff under a best response to this codebook.
    pub receiver_payoff: Rat,
}

/// The sequence of accepted moves; receiver payoff strictly increases along
/// it and consecutive codebooks differ in at most one codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTrace {
    pub steps: Vec<TraceStep>,
    pub terminal: Codebook,
}

fn admit_moves(game: &Game, budget: Budget) -> Result<usize, Error> {
    let inputs = game
        .input_count()
        .ok_or_else(|| Error::Dimension("input space size overflows".into()))?;
    budget.admit(game.states() as u128 * inputs as u128)?;
    Ok(inputs)
}

/// Hill-climbs the receiver's best-response payoff by single-codeword
/// replacements (best improvement first, lexicographic tie-break on
/// (state, word)) until no replacement strictly improves it. The terminal
/// codebook is locally receiver-optimal and hence a Nash code.
pub fn local_receiver_search(
    game: &Game,
    start: &Codebook,
    budget: Budget,
) -> Result<(Codebook, SearchTrace), Error> {
    let inputs = admit_moves(game, budget)?;
    let mut current = start.clone();
    let mut current_value = receiver_value(game, &current)?;
    let mut steps = vec![TraceStep {
        codebook: current.clone(),
        changed_state: None,
        receiver_payoff: current_value.clone(),
    }];
    loop {
        let mut best: Option<(usize, Word, Rat)> = None;
        for state in 0..game.states() {
            for rank in 0..inputs {
                let word = Word::from_rank(rank, game.uses, game.channel.inputs.len());
                if &word == current.word(state) {
                    continue;
                }
                let value = receiver_value(game, &current.with_word(state, word.clone()))?;
                let improves = match &best {
                    Some((_, _, best_value)) => value > *best_value,
                    None => value > current_value,
                };
                if improves {
                    best = Some((state, word, value));
                }
            }
        }
        match best {
            Some((state, word, value)) => {
                current = current.with_word(state, word);
                current_value = value;
                steps.push(TraceStep {
                    codebook: current.clone(),
                    changed_state: Some(state),
                    receiver_payoff: current_value.clone(),
                });
            }
            None => break,
        }
    }
    Ok((
        current.clone(),
        SearchTrace {
            steps,
            terminal: current,
        },
    ))
}

fn codebook_space(game: &Game, budget: Budget) -> Result<(usize, u128), Error> {
    let inputs = game
        .input_count()
        .ok_or_else(|| Error::Dimension("input space size overflows".into()))?;
    let mut total: u128 = 1;
    for _ in 0..game.states() {
        total = total
            .checked_mul(inputs as u128)
            .ok_or(Error::BudgetExceeded {
                need: u128::MAX,
                budget: budget.0,
            })?;
    }
    budget.admit(total)?;
    Ok((inputs, total))
}

fn codebook_at(index: u128, states: usize, inputs: usize, uses: usize, base: usize) -> Codebook {
    let mut ranks = vec![0usize; states];
    let mut rest = index;
    for slot in ranks.iter_mut().rev() {
        *slot = (rest % inputs as u128) as usize;
        rest /= inputs as u128;
    }
    Codebook::new(
        ranks
            .into_iter()
            .map(|r| Word::from_rank(r, uses, base))
            .collect(),
    )
}

/// Exhaustively maximizes the receiver's best-response payoff over all
/// codebooks, breaking ties by the lexicographically least codebook. The
/// result is receiver-optimal and hence a Nash code.
pub fn global_receiver_optimal(game: &Game, budget: Budget) -> Result<(Codebook, Rat), Error> {
    global_optimal_by(game, budget, |code| receiver_value(game, code))
}

/// Exhaustively maximizes the sender's payoff under best-response decoding
/// with the given tie-break rule. A sender-optimal code is not necessarily a
/// Nash code; this is exposed as a diagnostic only.
pub fn global_sender_optimal(
    game: &Game,
    rule: &TieBreakRule,
    budget: Budget,
) -> Result<(Codebook, Rat), Error> {
    global_optimal_by(game, budget, |code| {
        let structure = tie_structure(game, code)?;
        let table = decoder_from_rule(&structure, rule)?;
        sender_payoff(game, code, &table)
    })
}

fn global_optimal_by(
    game: &Game,
    budget: Budget,
    mut value_of: impl FnMut(&Codebook) -> Result<Rat, Error>,
) -> Result<(Codebook, Rat), Error> {
    let (inputs, total) = codebook_space(game, budget)?;
    let base = game.channel.inputs.len();
    let mut best: Option<(Codebook, Rat)> = None;
    for index in 0..total {
        let code = codebook_at(index, game.states(), inputs, game.uses, base);
        let value = value_of(&code)?;
        let better = match &best {
            Some((_, best_value)) => value > *best_value,
            None => true,
        };
        if better {
            best = Some((code, value));
        }
    }
    best.ok_or_else(|| Error::Dimension("empty codebook space".into()))
}

/// Iterates profitable sender deviations: derive the best response to the
/// current codebook with `rule`, let the lowest-index state with a strict
/// improvement replace its codeword by its best deviation, and repeat.
/// Each accepted move strictly increases the receiver's best-response payoff,
/// so the loop terminates; the terminal codebook is a Nash code under `rule`.
pub fn better_reply_dynamics(
    game: &Game,
    start: &Codebook,
    rule: &TieBreakRule,
    budget: Budget,
) -> Result<(Codebook, SearchTrace), Error> {
    admit_moves(game, budget)?;
    let mut current = start.clone();
    let mut steps = vec![TraceStep {
        codebook: current.clone(),
        changed_state: None,
        receiver_payoff: receiver_value(game, &current)?,
    }];
    loop {
        let structure = tie_structure(game, &current)?;
        let table = decoder_from_rule(&structure, rule)?;
        let mut moved = false;
        for state in 0..game.states() {
            if let Some(witness) = best_deviation(game, &current, &table, state, budget)? {
                current = current.with_word(state, witness.alternative);
                steps.push(TraceStep {
                    codebook: current.clone(),
                    changed_state: Some(state),
                    receiver_payoff: receiver_value(game, &current)?,
                });
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
    }
    Ok((
        current.clone(),
        SearchTrace {
            steps,
            terminal: current,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{check_nash, DecoderSpec};
    use crate::model::Channel;
    use crate::testutil::{rat, ternary_game, word};

    fn ternary_code(a: usize, b: usize) -> Codebook {
        Codebook::new(vec![word(&[a]), word(&[b])])
    }

    fn assert_strictly_increasing(trace: &SearchTrace) {
        for pair in trace.steps.windows(2) {
            assert!(pair[1].receiver_payoff > pair[0].receiver_payoff);
            let differing = pair[0]
                .codebook
                .words()
                .iter()
                .zip(pair[1].codebook.words())
                .filter(|(a, b)| a != b)
                .count();
            assert!(differing <= 1);
        }
    }

    #[test]
    fn local_search_from_ternary_codebooks() {
        let game = ternary_game();
        let (terminal, trace) =
            local_receiver_search(&game, &ternary_code(0, 1), Budget::default()).unwrap();
        assert_eq!(terminal, ternary_code(0, 2));
        assert_eq!(trace.steps.last().unwrap().receiver_payoff, rat(9, 2));
        assert_eq!(trace.steps.len(), 2);
        assert_strictly_increasing(&trace);
        // the terminal really is locally optimal: every neighbor, the
        // pooling codebooks included, has receiver value at most 9/2
        assert_eq!(receiver_value(&game, &ternary_code(0, 0)).unwrap(), rat(4, 1));
        assert_eq!(receiver_value(&game, &ternary_code(2, 2)).unwrap(), rat(4, 1));
        for state in 0..2usize {
            for replacement in 0..3usize {
                let neighbor = ternary_code(0, 2).with_word(state, word(&[replacement]));
                assert!(receiver_value(&game, &neighbor).unwrap() <= rat(9, 2));
            }
        }

        let (terminal, trace) =
            local_receiver_search(&game, &ternary_code(2, 1), Budget::default()).unwrap();
        assert_eq!(terminal, ternary_code(2, 0));
        assert_eq!(trace.steps.last().unwrap().receiver_payoff, rat(97, 20));
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[1].changed_state, Some(1));
    }

    #[test]
    fn local_search_single_state_stays_put() {
        let mut game = ternary_game();
        game.priors = vec![Rat::one()];
        game.sender_util = vec![rat(2, 1)];
        game.receiver_util = vec![rat(8, 1)];
        let start = Codebook::new(vec![word(&[1])]);
        let (terminal, trace) = local_receiver_search(&game, &start, Budget::default()).unwrap();
        assert_eq!(terminal, start);
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn global_optimum_on_the_ternary_game() {
        let game = ternary_game();
        let (code, value) = global_receiver_optimal(&game, Budget::default()).unwrap();
        assert_eq!(code, ternary_code(2, 0));
        assert_eq!(value, rat(97, 20));
        let report = check_nash(
            &game,
            &code,
            &DecoderSpec::Rule(TieBreakRule::Uniform),
            Budget::default(),
        )
        .unwrap();
        assert!(report.is_nash);
    }

    #[test]
    fn global_optimum_breaks_ties_lexicographically() {
        let channel = Channel::binary(rat(1, 10), rat(1, 10)).unwrap();
        let game = Game::new(
            channel,
            1,
            vec![rat(1, 2), rat(1, 2)],
            vec![Rat::one(), Rat::one()],
            vec![Rat::one(), Rat::one()],
        );
        let (code, value) = global_receiver_optimal(&game, Budget::default()).unwrap();
        assert_eq!(code, ternary_code(0, 1));
        assert_eq!(value, rat(9, 10));
    }

    #[test]
    fn one_input_symbol_forces_the_constant_codebook() {
        use crate::model::Alphabet;
        let channel = Channel::new(
            Alphabet::new(vec!["a".into()]),
            Alphabet::new(vec!["0".into(), "1".into()]),
            vec![vec![rat(1, 2), rat(1, 2)]],
        )
        .unwrap();
        let game = Game::new(
            channel,
            2,
            vec![rat(1, 2), rat(1, 2)],
            vec![Rat::one(), Rat::one()],
            vec![Rat::one(), Rat::one()],
        );
        let (code, _) = global_receiver_optimal(&game, Budget::default()).unwrap();
        assert_eq!(code, Codebook::new(vec![word(&[0, 0]), word(&[0, 0])]));
    }

    #[test]
    fn dynamics_follow_profitable_deviations() {
        let game = ternary_game();
        let rule = TieBreakRule::FixedOrder(vec![0, 1]);
        let (terminal, trace) =
            better_reply_dynamics(&game, &ternary_code(0, 1), &rule, Budget::default()).unwrap();
        assert_eq!(terminal, ternary_code(0, 2));
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[0].receiver_payoff, rat(43, 10));
        assert_eq!(trace.steps[1].receiver_payoff, rat(9, 2));
        assert_strictly_increasing(&trace);
        let report = check_nash(
            &game,
            &terminal,
            &DecoderSpec::Rule(rule),
            Budget::default(),
        )
        .unwrap();
        assert!(report.is_nash);
    }

    #[test]
    fn dynamics_fixpoints() {
        let game = ternary_game();
        let rule = TieBreakRule::FixedOrder(vec![0, 1]);
        let (terminal, trace) =
            better_reply_dynamics(&game, &ternary_code(2, 0), &rule, Budget::default()).unwrap();
        assert_eq!(terminal, ternary_code(2, 0));
        assert_eq!(trace.steps.len(), 1);

        let (pooling, _) = crate::equilibrium::pooling_code(&game).unwrap();
        let (terminal, trace) =
            better_reply_dynamics(&game, &pooling, &rule, Budget::default()).unwrap();
        assert_eq!(terminal, pooling);
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn local_and_global_optima_differ_on_the_ternary_game() {
        let game = ternary_game();
        let (local_terminal, _) =
            local_receiver_search(&game, &ternary_code(0, 1), Budget::default()).unwrap();
        let (global_code, global_value) =
            global_receiver_optimal(&game, Budget::default()).unwrap();
        assert_ne!(local_terminal, global_code);
        assert!(receiver_value(&game, &local_terminal).unwrap() < global_value);
        // yet the local terminal is still a Nash code
        let report = check_nash(
            &game,
            &local_terminal,
            &DecoderSpec::Rule(TieBreakRule::Uniform),
            Budget::default(),
        )
        .unwrap();
        assert!(report.is_nash);
    }

    #[test]
    fn sender_optimal_code_need_not_be_nash() {
        let game = ternary_game();
        let (code, value) =
            global_sender_optimal(&game, &TieBreakRule::Uniform, Budget::default()).unwrap();
        assert_eq!(code, ternary_code(0, 1));
        assert_eq!(value, rat(89, 20));
        let report = check_nash(
            &game,
            &code,
            &DecoderSpec::Rule(TieBreakRule::Uniform),
            Budget::default(),
        )
        .unwrap();
        assert!(!report.is_nash);
    }

    #[test]
    fn budget_guards_global_search() {
        let game = ternary_game();
        assert!(matches!(
            global_receiver_optimal(&game, Budget(8)),
            Err(Error::BudgetExceeded { need: 9, budget: 8 })
        ));
    }
}
