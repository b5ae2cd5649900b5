//! Binary-channel machinery: the decomposition lemmas behind "every
//! monotonically decoded binary code is a Nash code", directly checkable at
//! desk scale, plus an exhaustive sweep harness.
//!
//! For a state `i` and an alternative input `x`, positions split into the
//! set S where `x` agrees with the codeword and the set D where it differs.
//! Outputs over D are indexed by the subset A of positions that agree with
//! the codeword. The checks here compute the comparison values Q_k(A) whose
//! signs decide tie-set membership, verify that those signs only grow with
//! A, and evaluate the multilinear interpolation of the decoding
//! probabilities h_A at the two probability vectors induced by sending the
//! codeword versus sending `x`. Summed over S-outputs, the interpolation
//! route reproduces the sender condition value for value, which gives an
//! independent second route to every Nash verdict.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::decoding::{
    is_monotonic, tie_structure, DecoderTable, MonotonicityVerdict, StateSet, TieBreakRule,
};
use crate::equilibrium::DeviationWitness;
use crate::error::Error;
use crate::model::{count_words, Codebook, Game, Word};
use crate::rat::Rat;
use crate::Budget;

/// Validates that the game's channel is binary with eps0 > 0, eps1 > 0 and
/// eps0 + eps1 < 1, returning (eps0, eps1).
pub fn checked_error_probs(game: &Game) -> Result<(Rat, Rat), Error> {
    let (eps0, eps1) = game.channel.binary_error_probs()?;
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
    Ok((eps0, eps1))
}

/// Positions where an alternative input agrees with and differs from a
/// state's codeword, the differing positions split by the codeword bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationDecomposition {
    pub state: usize,
    pub alternative: Word,
    /// Positions j with x_j = codeword_j (the set S).
    pub same: Vec<usize>,
    /// Positions j with x_j != codeword_j (the set D).
    pub diff: Vec<usize>,
    /// Positions in D where the codeword bit is 0.
    pub diff_zero: Vec<usize>,
    /// Positions in D where the codeword bit is 1.
    pub diff_one: Vec<usize>,
}

impl DeviationDecomposition {
    pub fn new(code: &Codebook, state: usize, alternative: &Word) -> Result<Self, Error> {
        let codeword = code.word(state);
        if codeword.len() != alternative.len() {
            return Err(Error::WordLength {
                expected: codeword.len(),
                actual: alternative.len(),
            });
        }
        for &s in codeword.symbols().iter().chain(alternative.symbols()) {
            if s > 1 {
                return Err(Error::NotBinary);
            }
        }
        let mut same = Vec::new();
        let mut diff = Vec::new();
        let mut diff_zero = Vec::new();
        let mut diff_one = Vec::new();
        for (j, (&cw, &alt)) in codeword
            .symbols()
            .iter()
            .zip(alternative.symbols())
            .enumerate()
        {
            if cw == alt {
                same.push(j);
            } else {
                diff.push(j);
                if cw == 0 {
                    diff_zero.push(j);
                } else {
                    diff_one.push(j);
                }
            }
        }
        Ok(DeviationDecomposition {
            state,
            alternative: alternative.clone(),
            same,
            diff,
            diff_zero,
            diff_one,
        })
    }

    /// The output bits over D encoded by the agreement subset `agree`:
    /// bit t of `agree` set means position `diff[t]` carries the codeword
    /// bit, otherwise the flipped bit.
    pub fn agreement_word(&self, code: &Codebook, agree: u32) -> Word {
        let codeword = code.word(self.state);
        Word(
            self.diff
                .iter()
                .enumerate()
                .map(|(t, &j)| {
                    let bit = codeword.symbols()[j];
                    if agree >> t & 1 == 1 {
                        bit
                    } else {
                        1 - bit
                    }
                })
                .collect(),
        )
    }

    /// Assembles the full output word from S-bits and an agreement subset.
    pub fn full_output(&self, code: &Codebook, y_same: &Word, agree: u32) -> Word {
        let n = self.same.len() + self.diff.len();
        let mut bits = vec![0usize; n];
        for (t, &j) in self.same.iter().enumerate() {
            bits[j] = y_same.symbols()[t];
        }
        let y_diff = self.agreement_word(code, agree);
        for (t, &j) in self.diff.iter().enumerate() {
            bits[j] = y_diff.symbols()[t];
        }
        Word(bits)
    }
}

fn restrict(word: &Word, positions: &[usize]) -> Word {
    Word(positions.iter().map(|&j| word.symbols()[j]).collect())
}

/// The comparison value Q_k(A) = p(y_D^A | x_D^i) - R_k p(y_D^A | x_D^k)
/// with R_k = q_k V_k p(y_S | x_S^k) / (q_i V_i p(y_S | x_S^i)).
///
/// The full output (y_S, y_D^A) lies in the tie set of state `i` exactly
/// when Q_k(A) >= 0 for every k.
pub fn q_value(
    game: &Game,
    code: &Codebook,
    decomp: &DeviationDecomposition,
    y_same: &Word,
    k: usize,
    agree: u32,
) -> Result<Rat, Error> {
    checked_error_probs(game)?;
    if y_same.len() != decomp.same.len() {
        return Err(Error::WordLength {
            expected: decomp.same.len(),
            actual: y_same.len(),
        });
    }
    let i = decomp.state;
    let x_s_i = restrict(code.word(i), &decomp.same);
    let x_s_k = restrict(code.word(k), &decomp.same);
    let own = game.receiver_weight(i) * game.channel.word_prob(&x_s_i, y_same)?;
    let other = game.receiver_weight(k) * game.channel.word_prob(&x_s_k, y_same)?;
    if own.is_zero() {
        // impossible under the error inequalities unless the game carries a
        // non-positive prior or utility
        return Err(Error::Dimension(
            "zero receiver weight in comparison ratio".into(),
        ));
    }
    let ratio = other / own;

    let y_diff = decomp.agreement_word(code, agree);
    let x_d_i = restrict(code.word(i), &decomp.diff);
    let x_d_k = restrict(code.word(k), &decomp.diff);
    let p_own = game.channel.word_prob(&x_d_i, &y_diff)?;
    let p_other = game.channel.word_prob(&x_d_k, &y_diff)?;
    Ok(p_own - ratio * p_other)
}

/// A quadruple where growing the agreement subset decreased the sign of the
/// comparison value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignCounterexample {
    pub y_same: Word,
    pub state: usize,
    pub agree: u32,
    pub position: usize,
}

/// Verifies sign[Q_k(A + j)] >= sign[Q_k(A)] for every S-output, state k,
/// subset A of D, and j in D minus A. Under the error-probability
/// inequalities this always holds; a counterexample would falsify the
/// implementation.
pub fn check_sign_monotonicity(
    game: &Game,
    code: &Codebook,
    state: usize,
    x: &Word,
    budget: Budget,
) -> Result<Option<SignCounterexample>, Error> {
    checked_error_probs(game)?;
    let decomp = DeviationDecomposition::new(code, state, x)?;
    let outputs = game
        .output_count()
        .ok_or_else(|| Error::Dimension("output space size overflows".into()))?;
    budget.admit(outputs as u128)?;

    let subsets = 1u32 << decomp.diff.len();
    for y_same in Word::all(decomp.same.len(), 2) {
        for k in 0..game.states() {
            let signs: Vec<i8> = (0..subsets)
                .map(|agree| q_value(game, code, &decomp, &y_same, k, agree).map(|q| q.sign()))
                .collect::<Result<_, _>>()?;
            for agree in 0..subsets {
                for t in 0..decomp.diff.len() {
                    if agree >> t & 1 == 1 {
                        continue;
                    }
                    let grown = agree | 1 << t;
                    if signs[grown as usize] < signs[agree as usize] {
                        return Ok(Some(SignCounterexample {
                            y_same,
                            state: k,
                            agree,
                            position: decomp.diff[t],
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Result of one multilinear interpolation check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolationCheck {
    /// Decoding probabilities h_A indexed by agreement-subset bitmask.
    pub h: Vec<Rat>,
    /// f evaluated at the per-position correct-transmission probabilities of
    /// the codeword (1 - eps on each differing position).
    pub f_at_codeword_point: Rat,
    /// f evaluated at the probabilities induced by sending the alternative.
    pub f_at_alternative_point: Rat,
    /// Whether the codeword point dominates.
    pub dominates: bool,
    /// Whether f reproduces h_A at every vertex of the unit cube.
    pub vertex_identity: bool,
}

fn eval_multilinear(h: &[Rat], z: &[Rat]) -> Rat {
    debug_assert_eq!(h.len(), 1usize << z.len());
    // contract one coordinate per round: a pair (value at 0, value at 1)
    // collapses to lo + z (hi - lo)
    let mut vals = h.to_vec();
    for zt in z {
        let mut next = Vec::with_capacity(vals.len() / 2);
        for pair in vals.chunks_exact(2) {
            if pair[0] == pair[1] {
                next.push(pair[0].clone());
            } else {
                next.push(&pair[0] + &(zt * &(&pair[1] - &pair[0])));
            }
        }
        vals = next;
    }
    vals.into_iter().next().expect("nonempty table")
}

/// Builds h_A = d((y_S, y_D^A), state) for the given S-output, interpolates
/// multilinearly, and evaluates at the codeword point z^i (components
/// 1 - eps0 on positions where the codeword bit is 0, 1 - eps1 where it is
/// 1) and the alternative point z (components eps1 and eps0 respectively).
///
/// Requires a monotonic decoder: without monotonicity the h values need not
/// grow with A and the domination claim fails.
pub fn multilinear_check(
    game: &Game,
    code: &Codebook,
    table: &DecoderTable,
    state: usize,
    x: &Word,
    y_same: &Word,
) -> Result<InterpolationCheck, Error> {
    checked_error_probs(game)?;
    let structure = tie_structure(game, code)?;
    match is_monotonic(table, &structure)? {
        MonotonicityVerdict::Monotonic => {}
        MonotonicityVerdict::NotBestResponse(v) => {
            return Err(Error::NotBestResponse {
                output: structure.word(v.output_rank).to_string(),
                state: v.state,
            })
        }
        MonotonicityVerdict::Violation(v) => {
            return Err(Error::NotMonotonic {
                y: structure.word(v.y_rank).to_string(),
                y_prime: structure.word(v.y_prime_rank).to_string(),
                state: v.state,
            })
        }
    }
    let decomp = DeviationDecomposition::new(code, state, x)?;
    interpolate(game, code, table, &decomp, y_same, true)
}

fn interpolate(
    game: &Game,
    code: &Codebook,
    table: &DecoderTable,
    decomp: &DeviationDecomposition,
    y_same: &Word,
    check_vertices: bool,
) -> Result<InterpolationCheck, Error> {
    if y_same.len() != decomp.same.len() {
        return Err(Error::WordLength {
            expected: decomp.same.len(),
            actual: y_same.len(),
        });
    }
    let (eps0, eps1) = checked_error_probs(game)?;
    let d = decomp.diff.len();
    let subsets = 1usize << d;
    let h: Vec<Rat> = (0..subsets)
        .map(|agree| {
            let y = decomp.full_output(code, y_same, agree as u32);
            table.prob(&y, decomp.state).clone()
        })
        .collect();

    let codeword = code.word(decomp.state);
    let mut z_codeword = Vec::with_capacity(d);
    let mut z_alternative = Vec::with_capacity(d);
    for &j in &decomp.diff {
        if codeword.symbols()[j] == 0 {
            z_codeword.push(Rat::one() - &eps0);
            z_alternative.push(eps1.clone());
        } else {
            z_codeword.push(Rat::one() - &eps1);
            z_alternative.push(eps0.clone());
        }
    }

    let vertex_identity = !check_vertices
        || (0..subsets).all(|mask| {
            let vertex: Vec<Rat> = (0..d)
                .map(|t| {
                    if mask >> t & 1 == 1 {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect();
            eval_multilinear(&h, &vertex) == h[mask]
        });

    let f_at_codeword_point = eval_multilinear(&h, &z_codeword);
    let f_at_alternative_point = eval_multilinear(&h, &z_alternative);
    let dominates = f_at_codeword_point >= f_at_alternative_point;
    Ok(InterpolationCheck {
        h,
        f_at_codeword_point,
        f_at_alternative_point,
        dominates,
        vertex_identity,
    })
}

/// The pair of correct-decode probabilities for (codeword, alternative)
/// computed through the interpolation route: each is the sum over S-outputs
/// of p(y_S|x_S) times f at the corresponding point. Must agree exactly with
/// direct enumeration.
pub fn interpolation_decode_probs(
    game: &Game,
    code: &Codebook,
    table: &DecoderTable,
    state: usize,
    x: &Word,
) -> Result<(Rat, Rat), Error> {
    let (eps0, eps1) = checked_error_probs(game)?;
    let decomp = DeviationDecomposition::new(code, state, x)?;
    let n = game.uses;
    let codeword = code.word(state);

    // evaluation points, fixed across S-outputs
    let d = decomp.diff.len();
    let mut z_codeword = Vec::with_capacity(d);
    let mut z_alternative = Vec::with_capacity(d);
    for &j in &decomp.diff {
        if codeword.symbols()[j] == 0 {
            z_codeword.push(Rat::one() - &eps0);
            z_alternative.push(eps1.clone());
        } else {
            z_codeword.push(Rat::one() - &eps1);
            z_alternative.push(eps0.clone());
        }
    }

    // output ranks split into an S part and an agreement-subset part
    let bit_weight = |j: usize| 1usize << (n - 1 - j);
    let subsets = 1usize << d;
    let mut diff_rank = vec![0usize; subsets];
    for (mask, slot) in diff_rank.iter_mut().enumerate() {
        for (t, &j) in decomp.diff.iter().enumerate() {
            let bit = if mask >> t & 1 == 1 {
                codeword.symbols()[j]
            } else {
                1 - codeword.symbols()[j]
            };
            *slot += bit * bit_weight(j);
        }
    }
    let s_len = decomp.same.len();
    let mut same_rank = vec![0usize; 1 << s_len];
    for (s_rank, slot) in same_rank.iter_mut().enumerate() {
        for (t, &j) in decomp.same.iter().enumerate() {
            *slot += (s_rank >> (s_len - 1 - t) & 1) * bit_weight(j);
        }
    }

    let x_s = restrict(x, &decomp.same);
    let weights = game.channel.output_row(&x_s);
    let mut current = Rat::zero();
    let mut deviation = Rat::zero();
    let mut h = vec![Rat::zero(); subsets];
    for (s_rank, weight) in weights.iter().enumerate() {
        for (mask, slot) in h.iter_mut().enumerate() {
            *slot = table
                .prob_at(same_rank[s_rank] + diff_rank[mask], state)
                .clone();
        }
        current = current + weight * &eval_multilinear(&h, &z_codeword);
        deviation = deviation + weight * &eval_multilinear(&h, &z_alternative);
    }
    Ok((current, deviation))
}

/// Nash verdict of the sender condition computed entirely through the
/// interpolation route (monotonic decoders only). Witness selection matches
/// [`crate::equilibrium::check_nash`]: the lexicographically least
/// (state, word) maximizing the improvement.
pub fn interpolation_verdict(
    game: &Game,
    code: &Codebook,
    table: &DecoderTable,
    budget: Budget,
) -> Result<(bool, Option<DeviationWitness>), Error> {
    checked_error_probs(game)?;
    let structure = tie_structure(game, code)?;
    match is_monotonic(table, &structure)? {
        MonotonicityVerdict::Monotonic => {}
        MonotonicityVerdict::NotBestResponse(v) => {
            return Err(Error::NotBestResponse {
                output: structure.word(v.output_rank).to_string(),
                state: v.state,
            })
        }
        MonotonicityVerdict::Violation(v) => {
            return Err(Error::NotMonotonic {
                y: structure.word(v.y_rank).to_string(),
                y_prime: structure.word(v.y_prime_rank).to_string(),
                state: v.state,
            })
        }
    }
    let candidates = game
        .input_count()
        .ok_or_else(|| Error::Dimension("input space size overflows".into()))?;
    budget.admit(candidates as u128)?;

    let mut witness: Option<DeviationWitness> = None;
    let mut best_improvement = Rat::zero();
    for state in 0..game.states() {
        for x in Word::all(game.uses, 2) {
            let (current, deviation) = interpolation_decode_probs(game, code, table, state, &x)?;
            if deviation > current {
                let improvement = &deviation - &current;
                if improvement > best_improvement {
                    best_improvement = improvement;
                    witness = Some(DeviationWitness {
                        state,
                        alternative: x.clone(),
                        current_prob: current,
                        deviation_prob: deviation,
                    });
                }
            }
        }
    }
    Ok((witness.is_none(), witness))
}

/// One game plus the tie-break rules to sweep it with.
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub game: Game,
    pub rules: Vec<TieBreakRule>,
}

/// Sweep over every binary codebook of a given shape.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub states: usize,
    pub uses: usize,
    pub jobs: Vec<SweepJob>,
    pub budget: Budget,
}

/// A (game, rule, codebook) triple whose rule-derived decoder admitted a
/// profitable sender deviation. The swept theorem says none exist; finding
/// one falsifies the implementation, not the theorem.
#[derive(Debug, Clone)]
pub struct SweepCounterexample {
    pub job: usize,
    pub rule: usize,
    pub codebook: Codebook,
    pub witness: DeviationWitness,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub jobs: usize,
    pub codebooks: u64,
    /// (codebook, rule) pairs checked across all jobs.
    pub checks: u64,
    pub nash: u64,
    pub failed: u64,
    /// At most the first 100 counterexamples in scan order.
    pub counterexamples: Vec<SweepCounterexample>,
}

impl SweepReport {
    pub fn all_nash(&self) -> bool {
        self.failed == 0 && self.checks > 0
    }
}

/// Exhaustively checks that every binary codebook is a Nash code under every
/// given monotonic tie-break rule, for every job's game.
///
/// Work is data-parallel over codebooks; counts aggregate associatively and
/// counterexamples keep scan order, so results do not depend on the number
/// of workers.
pub fn verify_binary_theorem(config: &SweepConfig) -> Result<SweepReport, Error> {
    let inputs = count_words(config.uses, 2)
        .ok_or_else(|| Error::Dimension("input space size overflows".into()))?;
    let mut total: u128 = 1;
    for _ in 0..config.states {
        total = total
            .checked_mul(inputs as u128)
            .ok_or(Error::BudgetExceeded {
                need: u128::MAX,
                budget: config.budget.0,
            })?;
    }
    config.budget.admit(total)?;
    let total = total as u64;

    for job in &config.jobs {
        checked_error_probs(&job.game)?;
        if job.game.states() != config.states || job.game.uses != config.uses {
            return Err(Error::Dimension(
                "sweep job game does not match the sweep shape".into(),
            ));
        }
        let issues = job.game.validate();
        if !issues.is_empty() {
            return Err(Error::invalid(issues));
        }
        for rule in &job.rules {
            rule.validate(config.states)?;
        }
    }

    let mut report = SweepReport {
        jobs: config.jobs.len(),
        codebooks: total,
        ..SweepReport::default()
    };
    for (job_index, job) in config.jobs.iter().enumerate() {
        // fixed-denominator integer engine when all quantities fit its
        // bounds, exact rationals otherwise; both produce identical results
        let engine = match IntSweepEngine::try_new(&job.game, config.uses, &job.rules) {
            Some(fast) => JobEngine::Fast(fast),
            None => JobEngine::Exact(SweepEngine::new(&job.game, config.uses)),
        };
        let per_codebook: Vec<(u64, u64, Vec<SweepCounterexample>)> = (0..total)
            .into_par_iter()
            .map(|index| {
                let mut nash = 0u64;
                let mut failed = 0u64;
                let mut examples = Vec::new();
                let code_ranks = codebook_ranks(index, config.states, inputs);
                let witnesses = match &engine {
                    JobEngine::Fast(fast) => fast.deviations(&code_ranks),
                    JobEngine::Exact(exact) => {
                        let classes = exact.tie_classes(&code_ranks);
                        job.rules
                            .iter()
                            .map(|rule| exact.first_deviation(&code_ranks, &classes, rule))
                            .collect()
                    }
                };
                for (rule_index, witness) in witnesses.into_iter().enumerate() {
                    match witness {
                        None => nash += 1,
                        Some(witness) => {
                            failed += 1;
                            if examples.len() < 100 {
                                examples.push(SweepCounterexample {
                                    job: job_index,
                                    rule: rule_index,
                                    codebook: ranks_to_codebook(&code_ranks, config.uses),
                                    witness,
                                });
                            }
                        }
                    }
                }
                (nash, failed, examples)
            })
            .collect();
        for (nash, failed, examples) in per_codebook {
            report.nash += nash;
            report.failed += failed;
            report.checks += nash + failed;
            for example in examples {
                if report.counterexamples.len() < 100 {
                    report.counterexamples.push(example);
                }
            }
        }
    }
    Ok(report)
}

enum JobEngine {
    Fast(IntSweepEngine),
    Exact(SweepEngine),
}

fn ranks_to_codebook(ranks: &[usize], uses: usize) -> Codebook {
    Codebook::new(ranks.iter().map(|&r| Word::from_rank(r, uses, 2)).collect())
}

fn codebook_ranks(index: u64, states: usize, inputs: usize) -> Vec<usize> {
    let mut ranks = vec![0usize; states];
    let mut rest = index;
    for slot in ranks.iter_mut().rev() {
        *slot = (rest % inputs as u64) as usize;
        rest /= inputs as u64;
    }
    ranks
}

/// Per-game caches for the sweep: every input word's output row and its
/// receiver-weighted variants.
struct SweepEngine {
    uses: usize,
    /// p(y|x) indexed by [x rank][y rank].
    rows: Vec<Vec<Rat>>,
    /// q_i V_i p(y|x) indexed by [state][x rank][y rank].
    weighted: Vec<Vec<Vec<Rat>>>,
}

impl SweepEngine {
    fn new(game: &Game, uses: usize) -> Self {
        let inputs = count_words(uses, 2).expect("sweep shape fits");
        let rows: Vec<Vec<Rat>> = (0..inputs)
            .map(|rank| game.channel.output_row(&Word::from_rank(rank, uses, 2)))
            .collect();
        let weighted = (0..game.states())
            .map(|i| {
                let weight = game.receiver_weight(i);
                rows.iter()
                    .map(|row| row.iter().map(|p| &weight * p).collect())
                    .collect()
            })
            .collect();
        SweepEngine {
            uses,
            rows,
            weighted,
        }
    }

    /// Tie set per output and, grouped by distinct tie set, the summed
    /// p(y in class | x) for every input word x.
    fn tie_classes(&self, code_ranks: &[usize]) -> TieClasses {
        let outputs = self.rows[0].len();
        let m = code_ranks.len();
        let mut sets = Vec::with_capacity(outputs);
        for y in 0..outputs {
            let mut best = &self.weighted[0][code_ranks[0]][y];
            for i in 1..m {
                let v = &self.weighted[i][code_ranks[i]][y];
                if v > best {
                    best = v;
                }
            }
            let set: StateSet = (0..m)
                .filter(|&i| &self.weighted[i][code_ranks[i]][y] == best)
                .collect();
            sets.push(set);
        }
        let mut distinct: Vec<StateSet> = sets.clone();
        distinct.sort();
        distinct.dedup();
        let index_of: BTreeMap<StateSet, usize> = distinct
            .iter()
            .enumerate()
            .map(|(idx, set)| (*set, idx))
            .collect();
        let inputs = self.rows.len();
        let mut class_prob = vec![vec![Rat::zero(); distinct.len()]; inputs];
        for (y, set) in sets.iter().enumerate() {
            let idx = index_of[set];
            for (x, row) in self.rows.iter().enumerate() {
                class_prob[x][idx] = &class_prob[x][idx] + &row[y];
            }
        }
        TieClasses {
            distinct,
            class_prob,
        }
    }

    /// The first (lexicographically least, maximum improvement) profitable
    /// deviation under the rule-derived decoder, if any.
    fn first_deviation(
        &self,
        code_ranks: &[usize],
        classes: &TieClasses,
        rule: &TieBreakRule,
    ) -> Option<DeviationWitness> {
        let m = code_ranks.len();
        let dists: Vec<Vec<Rat>> = classes
            .distinct
            .iter()
            .map(|set| rule.distribution(*set, m))
            .collect();
        let mut witness: Option<DeviationWitness> = None;
        let mut best_improvement = Rat::zero();
        for state in 0..m {
            let decode_prob = |x: usize| -> Rat {
                let mut acc = Rat::zero();
                for (idx, dist) in dists.iter().enumerate() {
                    let d = &dist[state];
                    if !d.is_zero() {
                        acc = acc + &classes.class_prob[x][idx] * d;
                    }
                }
                acc
            };
            let current = decode_prob(code_ranks[state]);
            let mut max = current.clone();
            let mut argmax: Option<usize> = None;
            for x in 0..self.rows.len() {
                let value = decode_prob(x);
                if value > max {
                    max = value;
                    argmax = Some(x);
                }
            }
            if let Some(x) = argmax {
                let improvement = &max - &current;
                if improvement > best_improvement {
                    best_improvement = improvement;
                    witness = Some(DeviationWitness {
                        state,
                        alternative: Word::from_rank(x, self.uses, 2),
                        current_prob: current,
                        deviation_prob: max,
                    });
                }
            }
        }
        witness
    }
}

struct TieClasses {
    distinct: Vec<StateSet>,
    /// [x rank][distinct tie-set index] -> summed probability.
    class_prob: Vec<Vec<Rat>>,
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm_u128(a: u128, b: u128) -> Option<u128> {
    if a == 0 || b == 0 {
        return None;
    }
    (a / gcd_u128(a, b)).checked_mul(b)
}

/// Bounds keeping every product and sum in the integer scan far from u128
/// overflow: tie comparisons are at most weight^2 * p_den < 2^120 and decode
/// sums at most p_den * rule_den < 2^120.
const INT_P_DEN_LIMIT: u128 = 1 << 72;
const INT_WEIGHT_LIMIT: u128 = 1 << 24;
const INT_RULE_DEN_LIMIT: u128 = 1 << 48;

/// Sweep engine over fixed common denominators in u128, used when every
/// quantity fits the bounds above. Orders of magnitude faster than the
/// general engine and exactly equivalent to it.
struct IntSweepEngine {
    uses: usize,
    states: usize,
    /// Numerator of p(y|x) over `p_den`, indexed [x rank][y rank].
    p_num: Vec<Vec<u128>>,
    p_den: u128,
    /// Receiver weight q_i V_i as numerator/denominator pairs.
    w_num: Vec<u128>,
    w_den: Vec<u128>,
    /// Per rule: numerators of d(T, i) over `rule_den`, indexed
    /// [rule][set bitmask][state].
    rule_num: Vec<Vec<Vec<u128>>>,
    rule_den: Vec<u128>,
}

impl IntSweepEngine {
    fn try_new(game: &Game, uses: usize, rules: &[TieBreakRule]) -> Option<Self> {
        let m = game.states();
        if m == 0 || m > 16 || uses == 0 || uses > 16 {
            return None;
        }
        // single-use entries over a common denominator
        let mut den_single: u128 = 1;
        let mut parts = [[(0u128, 0u128); 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                let (num, den) = game.channel.prob(x, y).to_unsigned_parts()?;
                den_single = lcm_u128(den_single, den)?;
                parts[x][y] = (num, den);
            }
        }
        let mut p_den: u128 = 1;
        for _ in 0..uses {
            p_den = p_den.checked_mul(den_single)?;
            if p_den > INT_P_DEN_LIMIT {
                return None;
            }
        }
        let entry = |x: usize, y: usize| {
            let (num, den) = parts[x][y];
            num * (den_single / den)
        };
        let inputs = 1usize << uses;
        let p_num: Vec<Vec<u128>> = (0..inputs)
            .map(|x_rank| {
                let mut row = vec![1u128];
                for pos in (0..uses).rev() {
                    let bit = x_rank >> pos & 1;
                    let mut next = Vec::with_capacity(row.len() * 2);
                    for &prefix in &row {
                        next.push(prefix * entry(bit, 0));
                        next.push(prefix * entry(bit, 1));
                    }
                    row = next;
                }
                row
            })
            .collect();

        let mut w_num = Vec::with_capacity(m);
        let mut w_den = Vec::with_capacity(m);
        for i in 0..m {
            let (num, den) = game.receiver_weight(i).to_unsigned_parts()?;
            if num == 0 || num > INT_WEIGHT_LIMIT || den > INT_WEIGHT_LIMIT {
                return None;
            }
            w_num.push(num);
            w_den.push(den);
        }

        let mut rule_num = Vec::with_capacity(rules.len());
        let mut rule_den = Vec::with_capacity(rules.len());
        for rule in rules {
            let dists: Vec<Vec<Rat>> = (0..(1usize << m))
                .map(|mask| {
                    if mask == 0 {
                        Vec::new()
                    } else {
                        rule.distribution(StateSet(mask as u64), m)
                    }
                })
                .collect();
            let mut den: u128 = 1;
            for dist in &dists {
                for value in dist {
                    let (_, value_den) = value.to_unsigned_parts()?;
                    den = lcm_u128(den, value_den)?;
                    if den > INT_RULE_DEN_LIMIT {
                        return None;
                    }
                }
            }
            let nums: Vec<Vec<u128>> = dists
                .iter()
                .map(|dist| {
                    dist.iter()
                        .map(|value| {
                            let (value_num, value_den) =
                                value.to_unsigned_parts().expect("checked above");
                            value_num * (den / value_den)
                        })
                        .collect()
                })
                .collect();
            rule_num.push(nums);
            rule_den.push(den);
        }
        Some(IntSweepEngine {
            uses,
            states: m,
            p_num,
            p_den,
            w_num,
            w_den,
            rule_num,
            rule_den,
        })
    }

    /// Distinct tie sets and the per-input summed class probabilities for
    /// one codebook.
    fn tie_class_nums(&self, code_ranks: &[usize]) -> (Vec<u32>, Vec<Vec<u128>>) {
        let m = self.states;
        let outputs = self.p_num[0].len();
        // tie set per output: states attaining max_i (w_num[i]/w_den[i]) p(y|cw_i)
        let mut set_of = vec![0u32; outputs];
        for (y, slot) in set_of.iter_mut().enumerate() {
            let key = |i: usize| self.w_num[i] * self.p_num[code_ranks[i]][y];
            let mut best = 0usize;
            for i in 1..m {
                if key(i) * self.w_den[best] > key(best) * self.w_den[i] {
                    best = i;
                }
            }
            let mut mask = 0u32;
            for i in 0..m {
                if key(i) * self.w_den[best] == key(best) * self.w_den[i] {
                    mask |= 1 << i;
                }
            }
            *slot = mask;
        }
        let mut set_index = vec![usize::MAX; 1 << m];
        let mut distinct: Vec<u32> = Vec::new();
        for &mask in &set_of {
            if set_index[mask as usize] == usize::MAX {
                set_index[mask as usize] = distinct.len();
                distinct.push(mask);
            }
        }
        let inputs = self.p_num.len();
        let mut class_num = vec![vec![0u128; distinct.len()]; inputs];
        for (y, &mask) in set_of.iter().enumerate() {
            let idx = set_index[mask as usize];
            for (x, row) in self.p_num.iter().enumerate() {
                class_num[x][idx] += row[y];
            }
        }
        (distinct, class_num)
    }

    /// Numerator over `p_den * rule_den[rule]` of the probability that
    /// sending input `x` decodes as `state`.
    fn decode_sum(
        &self,
        distinct: &[u32],
        class_num: &[Vec<u128>],
        rule: usize,
        state: usize,
        x: usize,
    ) -> u128 {
        let mut acc = 0u128;
        for (idx, &mask) in distinct.iter().enumerate() {
            let d = self.rule_num[rule][mask as usize][state];
            if d != 0 {
                acc += class_num[x][idx] * d;
            }
        }
        acc
    }

    /// First profitable deviation per rule, matching the general engine's
    /// selection exactly.
    fn deviations(&self, code_ranks: &[usize]) -> Vec<Option<DeviationWitness>> {
        let m = self.states;
        let inputs = self.p_num.len();
        let (distinct, class_num) = self.tie_class_nums(code_ranks);
        (0..self.rule_num.len())
            .map(|rule| {
                let mut witness: Option<(usize, usize, u128, u128)> = None;
                let mut best_improvement: u128 = 0;
                for state in 0..m {
                    let current =
                        self.decode_sum(&distinct, &class_num, rule, state, code_ranks[state]);
                    let mut max = current;
                    let mut argmax: Option<usize> = None;
                    for x in 0..inputs {
                        let value = self.decode_sum(&distinct, &class_num, rule, state, x);
                        if value > max {
                            max = value;
                            argmax = Some(x);
                        }
                    }
                    if let Some(x) = argmax {
                        let improvement = max - current;
                        if improvement > best_improvement {
                            best_improvement = improvement;
                            witness = Some((state, x, current, max));
                        }
                    }
                }
                witness.map(|(state, x, current, max)| {
                    let den = self.p_den * self.rule_den[rule];
                    DeviationWitness {
                        state,
                        alternative: Word::from_rank(x, self.uses, 2),
                        current_prob: Rat::from_unsigned_parts(current, den)
                            .expect("nonzero denominator"),
                        deviation_prob: Rat::from_unsigned_parts(max, den)
                            .expect("nonzero denominator"),
                    }
                })
            })
            .collect()
    }
}

/// Verdict stability as one error probability vanishes, approximating a
/// one-sided channel without hard-coding a limit.
#[derive(Debug, Clone)]
pub struct VanishingErrorReport {
    /// (eps value, is_nash) per step.
    pub verdicts: Vec<(Rat, bool)>,
    /// Whether the verdict is identical over the final two steps.
    pub stable: bool,
}

/// Which error probability shrinks toward zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VanishingSide {
    Eps0,
    Eps1,
}

/// Re-checks the Nash verdict while halving one error probability `steps`
/// times, keeping the other fixed.
pub fn vanishing_error_stability(
    game: &Game,
    code: &Codebook,
    rule: &TieBreakRule,
    side: VanishingSide,
    steps: usize,
    budget: Budget,
) -> Result<VanishingErrorReport, Error> {
    let (eps0, eps1) = checked_error_probs(game)?;
    let mut verdicts = Vec::with_capacity(steps);
    let half = Rat::new(1, 2).expect("2 != 0");
    let mut shrinking = match side {
        VanishingSide::Eps0 => eps0.clone(),
        VanishingSide::Eps1 => eps1.clone(),
    };
    for _ in 0..steps {
        shrinking = &shrinking * &half;
        let (e0, e1) = match side {
            VanishingSide::Eps0 => (shrinking.clone(), eps1.clone()),
            VanishingSide::Eps1 => (eps0.clone(), shrinking.clone()),
        };
        let channel = crate::model::Channel::binary(e0, e1)?;
        let stepped = Game {
            channel,
            ..game.clone()
        };
        let report = crate::equilibrium::check_nash(
            &stepped,
            code,
            &crate::equilibrium::DecoderSpec::Rule(rule.clone()),
            budget,
        )?;
        verdicts.push((shrinking.clone(), report.is_nash));
    }
    let stable =
        verdicts.len() >= 2 && verdicts[verdicts.len() - 1].1 == verdicts[verdicts.len() - 2].1;
    Ok(VanishingErrorReport { verdicts, stable })
}
