//! Best-response tie structures and decoding functions.
//!
//! For a game and codebook, every channel output word `y` has a nonempty tie
//! set `T(y)`: the states attaining `max_k q_k V_k p(y|x^k)`. A best-response
//! decoder puts positive probability only on states inside `T(y)`. Tie-break
//! rules (uniform, weighted, fixed-order) turn a tie structure into a
//! concrete decoder table; monotonic decoders are the ones whose decoding
//! probability for a state never increases when the tie set grows.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::model::{count_words, Codebook, Game, Word};
use crate::rat::Rat;

/// Maximum number of states representable in a [`StateSet`].
pub const MAX_STATES: usize = 64;

/// Default cap on the number of states for general-decoder enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 5;

/// A set of states as a bitmask. Games here have at most 64 states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateSet(pub u64);

impl StateSet {
    pub fn empty() -> Self {
        StateSet(0)
    }

    pub fn singleton(state: usize) -> Self {
        StateSet(1 << state)
    }

    pub fn full(num_states: usize) -> Self {
        if num_states == 64 {
            StateSet(u64::MAX)
        } else {
            StateSet((1u64 << num_states) - 1)
        }
    }

    pub fn contains(&self, state: usize) -> bool {
        self.0 >> state & 1 == 1
    }

    pub fn insert(&mut self, state: usize) {
        self.0 |= 1 << state;
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Member states in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(|&i| self.contains(i))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for StateSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = StateSet::empty();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

/// The tie set `T(y)` for every output word, indexed by the lexicographic
/// rank of `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieStructure {
    num_states: usize,
    out_base: usize,
    word_len: usize,
    sets: Vec<StateSet>,
}

impl TieStructure {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn output_count(&self) -> usize {
        self.sets.len()
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn output_base(&self) -> usize {
        self.out_base
    }

    pub fn set_at(&self, y_rank: usize) -> StateSet {
        self.sets[y_rank]
    }

    pub fn tie_set(&self, y: &Word) -> StateSet {
        self.sets[y.rank(self.out_base)]
    }

    /// The output word with the given rank.
    pub fn word(&self, y_rank: usize) -> Word {
        Word::from_rank(y_rank, self.word_len, self.out_base)
    }

    /// The set Y_i of outputs whose tie set contains `state`, as ranks.
    pub fn class(&self, state: usize) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&r| self.sets[r].contains(state))
            .collect()
    }

    /// Distinct tie sets with their member output ranks, keyed by bitmask.
    pub fn groups(&self) -> BTreeMap<StateSet, Vec<usize>> {
        let mut groups: BTreeMap<StateSet, Vec<usize>> = BTreeMap::new();
        for (rank, set) in self.sets.iter().enumerate() {
            groups.entry(*set).or_default().push(rank);
        }
        groups
    }
}

/// Computes the tie set of every output word: `i` is in `T(y)` exactly when
/// `q_i V_i p(y|x^i)` attains the maximum over all states. If every state has
/// probability zero at `y`, all states are tied.
pub fn tie_structure(game: &Game, code: &Codebook) -> Result<TieStructure, Error> {
    let issues = code.validate(game);
    if !issues.is_empty() {
        return Err(Error::invalid(issues));
    }
    let m = game.states();
    if m > MAX_STATES {
        return Err(Error::TooManyStates {
            actual: m,
            limit: MAX_STATES,
        });
    }
    let outputs = game
        .output_count()
        .ok_or_else(|| Error::Dimension("output space size overflows".into()))?;
    // one weighted likelihood row per state: q_i V_i p(y|x^i)
    let rows: Vec<Vec<Rat>> = (0..m)
        .map(|i| {
            let weight = game.receiver_weight(i);
            game.channel
                .output_row(code.word(i))
                .into_iter()
                .map(|p| &weight * &p)
                .collect()
        })
        .collect();
    let mut sets = Vec::with_capacity(outputs);
    for y in 0..outputs {
        let mut best = &rows[0][y];
        for row in rows.iter().skip(1) {
            if row[y] > *best {
                best = &row[y];
            }
        }
        let set: StateSet = (0..m).filter(|&i| rows[i][y] == *best).collect();
        sets.push(set);
    }
    Ok(TieStructure {
        num_states: m,
        out_base: game.channel.outputs.len(),
        word_len: game.uses,
        sets,
    })
}

/// How the receiver breaks ties between best-response states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TieBreakRule {
    /// Decode each tied state with probability 1/|T|.
    Uniform,
    /// Decode state i with probability w_i / sum of weights over T.
    Weighted(Vec<Rat>),
    /// Decode the first state of the order that appears in T.
    FixedOrder(Vec<usize>),
}

impl TieBreakRule {
    pub fn validate(&self, num_states: usize) -> Result<(), Error> {
        match self {
            TieBreakRule::Uniform => Ok(()),
            TieBreakRule::Weighted(weights) => {
                if weights.len() != num_states {
                    return Err(Error::Dimension(format!(
                        "{} weights for {} states",
                        weights.len(),
                        num_states
                    )));
                }
                if weights.iter().any(|w| !w.is_positive()) {
                    return Err(Error::invalid(vec![
                        crate::error::ValidationIssue::BadWeights {
                            reason: "all weights must be positive".into(),
                        },
                    ]));
                }
                Ok(())
            }
            TieBreakRule::FixedOrder(order) => {
                if !is_permutation(order, num_states) {
                    return Err(Error::invalid(vec![
                        crate::error::ValidationIssue::BadOrder {
                            order: order.clone(),
                        },
                    ]));
                }
                Ok(())
            }
        }
    }

    /// The decoding distribution over all states for a tie set.
    pub fn distribution(&self, tie_set: StateSet, num_states: usize) -> Vec<Rat> {
        let mut probs = vec![Rat::zero(); num_states];
        match self {
            TieBreakRule::Uniform => {
                let share = Rat::new(1, tie_set.len() as i64).expect("nonempty tie set");
                for i in tie_set.iter() {
                    probs[i] = share.clone();
                }
            }
            TieBreakRule::Weighted(weights) => {
                let total: Rat = tie_set.iter().map(|i| &weights[i]).sum();
                for i in tie_set.iter() {
                    probs[i] = &weights[i] / &total;
                }
            }
            TieBreakRule::FixedOrder(order) => {
                let winner = order
                    .iter()
                    .copied()
                    .find(|&i| tie_set.contains(i))
                    .expect("order covers all states");
                probs[winner] = Rat::one();
            }
        }
        probs
    }

    /// The rule as a decoding function over every nonempty subset of states.
    pub fn general_decoder(&self, num_states: usize) -> Result<GeneralDecoder, Error> {
        self.validate(num_states)?;
        GeneralDecoder::from_fn(num_states, |set| self.distribution(set, num_states))
    }
}

fn is_permutation(order: &[usize], num_states: usize) -> bool {
    order.len() == num_states && (0..num_states).all(|i| order.contains(&i))
}

/// All permutations of `0..m` in lexicographic order.
pub fn all_orders(m: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, remaining: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for idx in 0..remaining.len() {
            let v = remaining.remove(idx);
            prefix.push(v);
            extend(prefix, remaining, out);
            prefix.pop();
            remaining.insert(idx, v);
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut (0..m).collect(), &mut out);
    out
}

/// A decoding probability table d(y, i), one distribution over states per
/// output word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderTable {
    num_states: usize,
    out_base: usize,
    word_len: usize,
    rows: Vec<Vec<Rat>>,
}

impl DecoderTable {
    pub fn new(
        num_states: usize,
        out_base: usize,
        word_len: usize,
        rows: Vec<Vec<Rat>>,
    ) -> Result<Self, Error> {
        let outputs = count_words(word_len, out_base)
            .ok_or_else(|| Error::Dimension("output space size overflows".into()))?;
        if rows.len() != outputs {
            return Err(Error::Dimension(format!(
                "decoder covers {} outputs, expected {}",
                rows.len(),
                outputs
            )));
        }
        for (rank, row) in rows.iter().enumerate() {
            if row.len() != num_states {
                return Err(Error::Dimension(format!(
                    "decoder row {rank} has {} entries, expected {num_states}",
                    row.len()
                )));
            }
            if row.iter().any(Rat::is_negative) {
                return Err(Error::Dimension(format!(
                    "decoder row {rank} has a negative probability"
                )));
            }
            let total: Rat = row.iter().sum();
            if total != Rat::one() {
                return Err(Error::Dimension(format!(
                    "decoder row {rank} sums to {total}, expected 1"
                )));
            }
        }
        Ok(DecoderTable {
            num_states,
            out_base,
            word_len,
            rows,
        })
    }

    /// A deterministic table: `assignment[rank of y]` is the decoded state.
    pub fn deterministic(
        num_states: usize,
        out_base: usize,
        word_len: usize,
        assignment: &[usize],
    ) -> Result<Self, Error> {
        let rows = assignment
            .iter()
            .map(|&state| {
                let mut row = vec![Rat::zero(); num_states];
                row[state] = Rat::one();
                row
            })
            .collect();
        DecoderTable::new(num_states, out_base, word_len, rows)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn output_count(&self) -> usize {
        self.rows.len()
    }

    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn output_base(&self) -> usize {
        self.out_base
    }

    pub fn prob_at(&self, y_rank: usize, state: usize) -> &Rat {
        &self.rows[y_rank][state]
    }

    pub fn prob(&self, y: &Word, state: usize) -> &Rat {
        &self.rows[y.rank(self.out_base)][state]
    }

    pub fn row(&self, y_rank: usize) -> &[Rat] {
        &self.rows[y_rank]
    }

    fn dims_match(&self, structure: &TieStructure) -> Result<(), Error> {
        if self.num_states != structure.num_states
            || self.rows.len() != structure.sets.len()
            || self.out_base != structure.out_base
        {
            return Err(Error::Dimension(
                "decoder table does not match tie structure dimensions".into(),
            ));
        }
        Ok(())
    }
}

/// Applies a tie-break rule to a tie structure: uniform gives 1/|T(y)| on
/// tied states, weighted gives w_i over the tied weight sum, fixed-order puts
/// probability 1 on the first tied state in the order.
pub fn decoder_from_rule(
    structure: &TieStructure,
    rule: &TieBreakRule,
) -> Result<DecoderTable, Error> {
    rule.validate(structure.num_states)?;
    // distributions depend on y only through its tie set
    let mut by_set: BTreeMap<StateSet, Vec<Rat>> = BTreeMap::new();
    let rows = structure
        .sets
        .iter()
        .map(|set| {
            by_set
                .entry(*set)
                .or_insert_with(|| rule.distribution(*set, structure.num_states))
                .clone()
        })
        .collect();
    DecoderTable::new(
        structure.num_states,
        structure.out_base,
        structure.word_len,
        rows,
    )
}

/// A positive decoding probability outside the tie set: `d(y, state) > 0`
/// with `state` not in `T(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportViolation {
    pub output_rank: usize,
    pub state: usize,
}

/// Checks the receiver's best-response condition: d(y,i) > 0 implies i is in
/// T(y). Returns the first violation in lexicographic order of (y, i).
pub fn is_best_response(
    table: &DecoderTable,
    structure: &TieStructure,
) -> Result<Option<SupportViolation>, Error> {
    table.dims_match(structure)?;
    for (rank, set) in structure.sets.iter().enumerate() {
        for state in 0..structure.num_states {
            if table.rows[rank][state].is_positive() && !set.contains(state) {
                return Ok(Some(SupportViolation {
                    output_rank: rank,
                    state,
                }));
            }
        }
    }
    Ok(None)
}

/// Outcome of a monotonicity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonotonicityVerdict {
    Monotonic,
    /// The table is not even a best response; monotonicity is undefined.
    NotBestResponse(SupportViolation),
    /// A pair y, y' with `state` in T(y), T(y) contained in T(y'), and
    /// d(y, state) < d(y', state).
    Violation(MonotonicityViolation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub y_rank: usize,
    pub y_prime_rank: usize,
    pub state: usize,
}

impl MonotonicityVerdict {
    pub fn is_monotonic(&self) -> bool {
        matches!(self, MonotonicityVerdict::Monotonic)
    }
}

/// Checks monotonicity of a best-response table: for all y, y' with
/// `i` in `T(y)` and `T(y)` contained in `T(y')`, requires
/// `d(y,i) >= d(y',i)`. Scanning both directions of every pair also enforces
/// that outputs with equal tie sets decode identically. The first violating
/// triple in lexicographic order of (y, y', i) is reported.
pub fn is_monotonic(
    table: &DecoderTable,
    structure: &TieStructure,
) -> Result<MonotonicityVerdict, Error> {
    if let Some(violation) = is_best_response(table, structure)? {
        return Ok(MonotonicityVerdict::NotBestResponse(violation));
    }
    let outputs = structure.sets.len();
    for y in 0..outputs {
        for y_prime in 0..outputs {
            if y == y_prime || !structure.sets[y].is_subset_of(&structure.sets[y_prime]) {
                continue;
            }
            for state in structure.sets[y].iter() {
                if table.rows[y][state] < table.rows[y_prime][state] {
                    return Ok(MonotonicityVerdict::Violation(MonotonicityViolation {
                        y_rank: y,
                        y_prime_rank: y_prime,
                        state,
                    }));
                }
            }
        }
    }
    Ok(MonotonicityVerdict::Monotonic)
}

/// A decoding function defined on every nonempty subset of states rather
/// than on channel outputs, with support inside the subset. This is the
/// form a monotonic decoder takes once decoding probabilities are known to
/// depend on an output only through its tie set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralDecoder {
    num_states: usize,
    /// Distribution per subset bitmask; index 0 is unused.
    rows: Vec<Vec<Rat>>,
}

impl GeneralDecoder {
    /// Builds from a function of each nonempty subset. The distribution must
    /// sum to 1 with support inside the subset.
    pub fn from_fn(
        num_states: usize,
        mut f: impl FnMut(StateSet) -> Vec<Rat>,
    ) -> Result<Self, Error> {
        if num_states == 0 || num_states > MAX_STATES {
            return Err(Error::TooManyStates {
                actual: num_states,
                limit: MAX_STATES,
            });
        }
        let size = 1usize << num_states;
        let mut rows = vec![Vec::new(); size];
        for mask in 1..size {
            let set = StateSet(mask as u64);
            let row = f(set);
            if row.len() != num_states {
                return Err(Error::Dimension(format!(
                    "distribution for subset {mask:#b} has {} entries, expected {num_states}",
                    row.len()
                )));
            }
            let total: Rat = row.iter().sum();
            if total != Rat::one() || row.iter().any(Rat::is_negative) {
                return Err(Error::Dimension(format!(
                    "distribution for subset {mask:#b} is not a probability distribution"
                )));
            }
            for (i, p) in row.iter().enumerate() {
                if p.is_positive() && !set.contains(i) {
                    return Err(Error::Dimension(format!(
                        "distribution for subset {mask:#b} puts weight on state {i} outside it"
                    )));
                }
            }
            rows[mask] = row;
        }
        Ok(GeneralDecoder { num_states, rows })
    }

    /// The deterministic decoder selecting the first state of `order`
    /// present in each subset.
    pub fn fixed_order(num_states: usize, order: &[usize]) -> Result<Self, Error> {
        TieBreakRule::FixedOrder(order.to_vec()).general_decoder(num_states)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn prob(&self, set: StateSet, state: usize) -> &Rat {
        &self.rows[set.0 as usize][state]
    }

    pub fn distribution(&self, set: StateSet) -> &[Rat] {
        &self.rows[set.0 as usize]
    }

    pub fn is_deterministic(&self) -> bool {
        self.rows[1..]
            .iter()
            .all(|row| row.iter().any(|p| p == &Rat::one()))
    }

    /// The chosen state for a subset when deterministic.
    pub fn choice(&self, set: StateSet) -> Option<usize> {
        let row = &self.rows[set.0 as usize];
        let mut winner = None;
        for (i, p) in row.iter().enumerate() {
            if p == &Rat::one() {
                winner = winner.or(Some(i));
            } else if p.is_positive() {
                return None;
            }
        }
        winner
    }

    /// Monotonicity over all subset pairs: `i` in T, T contained in T'
    /// implies d(T,i) >= d(T',i).
    pub fn is_monotonic(&self) -> bool {
        let size = self.rows.len();
        for sup in 1..size {
            // proper subsets of sup
            let mut sub = (sup - 1) & sup;
            while sub > 0 {
                for i in StateSet(sub as u64).iter() {
                    if self.rows[sub][i] < self.rows[sup][i] {
                        return false;
                    }
                }
                sub = (sub - 1) & sup;
            }
        }
        true
    }
}

/// Applies a general decoder to a tie structure, yielding the table
/// d(y, i) = d(T(y), i).
pub fn decoder_from_general(
    structure: &TieStructure,
    general: &GeneralDecoder,
) -> Result<DecoderTable, Error> {
    if general.num_states != structure.num_states {
        return Err(Error::Dimension(
            "general decoder state count does not match tie structure".into(),
        ));
    }
    let rows = structure
        .sets
        .iter()
        .map(|set| general.distribution(*set).to_vec())
        .collect();
    DecoderTable::new(
        structure.num_states,
        structure.out_base,
        structure.word_len,
        rows,
    )
}

/// Enumerates every deterministic monotonic general decoder on `m` states.
///
/// Searches assignments of one chosen state per nonempty subset, pruning
/// branches as soon as a subset-pair constraint fails, so the full candidate
/// space (which grows far faster than the result) is never materialized.
/// There are exactly m! results, one per fixed order.
pub fn enumerate_general_deterministic_monotonic(
    m: usize,
    limit: usize,
) -> Result<Vec<GeneralDecoder>, Error> {
    if m == 0 || m > limit {
        return Err(Error::TooManyStates { actual: m, limit });
    }
    let size = 1usize << m;
    // masks in descending popcount order, ascending mask within a size,
    // so every superset is assigned before its subsets
    let mut masks: Vec<usize> = (1..size).collect();
    masks.sort_by_key(|&mask| (std::cmp::Reverse(mask.count_ones()), mask));

    let mut choices: Vec<Option<usize>> = vec![None; size];
    let mut results = Vec::new();
    search_assignments(&masks, 0, &mut choices, &mut results);

    let decoders = results
        .into_iter()
        .map(|assignment| {
            GeneralDecoder::from_fn(m, |set| {
                let mut row = vec![Rat::zero(); m];
                row[assignment[set.0 as usize]] = Rat::one();
                row
            })
            .expect("assignment is a valid deterministic decoder")
        })
        .collect();
    Ok(decoders)
}

fn search_assignments(
    masks: &[usize],
    depth: usize,
    choices: &mut Vec<Option<usize>>,
    results: &mut Vec<Vec<usize>>,
) {
    if depth == masks.len() {
        results.push(choices.iter().map(|c| c.unwrap_or(0)).collect());
        return;
    }
    let mask = masks[depth];
    // a superset whose chosen state lies in this subset forces the choice
    let mut forced: Option<usize> = None;
    let mut consistent = true;
    for &sup_mask in &masks[..depth] {
        if mask & !sup_mask != 0 {
            continue; // not a superset
        }
        let chosen = choices[sup_mask].expect("supersets are assigned first");
        if mask >> chosen & 1 == 1 {
            match forced {
                None => forced = Some(chosen),
                Some(f) if f != chosen => {
                    consistent = false;
                    break;
                }
                _ => {}
            }
        }
    }
    if !consistent {
        return;
    }
    let candidates: Vec<usize> = match forced {
        Some(state) => vec![state],
        None => StateSet(mask as u64).iter().collect(),
    };
    for state in candidates {
        choices[mask] = Some(state);
        search_assignments(masks, depth + 1, choices, results);
        choices[mask] = None;
    }
}

/// Result of reconstructing a fixed order from a deterministic general
/// decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixedOrderOutcome {
    /// The decoder is monotonic; selecting along this order (first element
    /// most preferred) reproduces it on every subset.
    Order(Vec<usize>),
    /// Pairwise preferences cycle: a beats b, b beats c, c beats a.
    Cycle(usize, usize, usize),
    /// The pairwise order is consistent but some subset selects a dominated
    /// state: d(subset, state) = 0 < 1 = d(superset, state).
    SubsetViolation {
        subset: StateSet,
        superset: StateSet,
        state: usize,
    },
}

/// Rebuilds the pairwise preference relation `i` before `j` iff
/// d({i,j}, i) = 1 and checks whether the decoder is the fixed-order decoder
/// of that relation. Requires a deterministic complete decoder.
pub fn derive_fixed_order(decoder: &GeneralDecoder) -> Result<FixedOrderOutcome, Error> {
    if !decoder.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    let m = decoder.num_states;
    let before = |i: usize, j: usize| {
        let pair: StateSet = [i, j].into_iter().collect();
        decoder.choice(pair) == Some(i)
    };
    // transitivity: any violation yields a 3-cycle
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                if i != j && j != k && i != k && before(i, j) && before(j, k) && before(k, i) {
                    return Ok(FixedOrderOutcome::Cycle(i, j, k));
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        if a == b {
            std::cmp::Ordering::Equal
        } else if before(a, b) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    // the chosen state of every subset must be its order-minimum
    for mask in 1..(1usize << m) {
        let set = StateSet(mask as u64);
        let chosen = decoder.choice(set).expect("deterministic");
        let min = order
            .iter()
            .copied()
            .find(|&i| set.contains(i))
            .expect("nonempty");
        if chosen != min {
            return Ok(FixedOrderOutcome::SubsetViolation {
                subset: [min, chosen].into_iter().collect(),
                superset: set,
                state: chosen,
            });
        }
    }
    Ok(FixedOrderOutcome::Order(order))
}

/// Adds `state_index * delta` to each prior and renormalizes. For small
/// enough `delta` this breaks every tie and leaves strict comparisons
/// intact, inducing a fixed-order decoder.
pub fn perturb_priors(game: &Game, delta: &Rat) -> Game {
    let mut priors: Vec<Rat> = game
        .priors
        .iter()
        .enumerate()
        .map(|(i, q)| q + &(Rat::from_int(i as i64) * delta))
        .collect();
    let total: Rat = priors.iter().sum();
    for q in &mut priors {
        *q = &*q / &total;
    }
    Game {
        priors,
        ..game.clone()
    }
}
