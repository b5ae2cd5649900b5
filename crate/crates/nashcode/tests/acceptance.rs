//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nashcode::binary::{
    check_sign_monotonicity, interpolation_decode_probs, interpolation_verdict, multilinear_check,
    verify_binary_theorem, SweepConfig, SweepJob,
};
use nashcode::decoding::{
    all_orders, decoder_from_rule, derive_fixed_order, enumerate_general_deterministic_monotonic,
    is_monotonic, tie_structure, FixedOrderOutcome, GeneralDecoder, MonotonicityVerdict, StateSet,
    TieBreakRule,
};
use nashcode::equilibrium::{
    check_nash, correct_decode_prob, receiver_payoff, receiver_value, sender_payoff, DecoderSpec,
};
use nashcode::instance::{random_binary_game, random_game_and_codebook, RandomSpec};
use nashcode::model::{Channel, Codebook, Game, Word};
use nashcode::rat::Rat;
use nashcode::reference::{
    binary_instance, fixed_decoder_comparison, reproduce_tables, ternary_instance,
};
use nashcode::search::{global_receiver_optimal, local_receiver_search};
use nashcode::Budget;

fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den).unwrap()
}

fn pass(name: &str, detail: String) {
    println!("criterion {name}: PASS ({detail})");
}

/// Tables reproduce exactly: every partition, decode probability, and payoff
/// of the embedded worked example matches the engine's recomputation.
#[test]
fn criterion_01_table_reproduction() {
    let started = Instant::now();
    let report = reproduce_tables().unwrap();
    assert!(report.is_clean(), "mismatches: {:?}", report.mismatches);

    // spot-pin the embedded expectations themselves
    let instance = ternary_instance();
    let by_label: Vec<(String, &nashcode::reference::CodebookRow)> = instance
        .rows
        .iter()
        .map(|row| {
            let label: String = row
                .codebook
                .words()
                .iter()
                .map(|w| instance.game.channel.inputs.format_word(w))
                .collect::<Vec<_>>()
                .join(",");
            (label, row)
        })
        .collect();
    let expect_u = [
        ("0,1", rat(89, 20)),
        ("0,2", rat(15, 4)),
        ("1,0", rat(43, 10)),
        ("1,2", rat(1, 1)),
        ("2,0", rat(22, 5)),
        ("2,1", rat(7, 5)),
    ];
    let expect_v = [
        ("0,1", rat(43, 10)),
        ("0,2", rat(9, 2)),
        ("1,0", rat(89, 20)),
        ("1,2", rat(4, 1)),
        ("2,0", rat(97, 20)),
        ("2,1", rat(41, 10)),
    ];
    for (label, expected) in expect_u {
        let row = &by_label.iter().find(|(l, _)| l == label).unwrap().1;
        assert_eq!(row.sender_payoff, expected, "U for {label}");
    }
    for (label, expected) in expect_v {
        let row = &by_label.iter().find(|(l, _)| l == label).unwrap().1;
        assert_eq!(row.receiver_payoff, expected, "V for {label}");
    }
    let probs: Vec<Rat> = instance
        .rows
        .iter()
        .flat_map(|row| row.decode_probs.clone())
        .collect();
    for expected in [
        rat(17, 20),
        rat(9, 10),
        rat(19, 20),
        rat(7, 10),
        rat(1, 1),
        rat(0, 1),
        rat(17, 20),
        rat(1, 10),
    ] {
        assert!(probs.contains(&expected), "decode prob {expected} missing");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        "1 (table reproduction)",
        format!("{} cells, {elapsed:?}", report.cells_checked),
    );
}

/// Nash verdicts for the six ternary codebooks, with the expected deviation
/// witnesses.
#[test]
fn criterion_02_ternary_nash_verdicts() {
    let started = Instant::now();
    let instance = ternary_instance();
    let game = &instance.game;
    for row in &instance.rows {
        let report = check_nash(
            game,
            &row.codebook,
            &DecoderSpec::Rule(TieBreakRule::Uniform),
            Budget::default(),
        )
        .unwrap();
        assert_eq!(report.is_nash, row.is_nash);
        match (&report.witness, &row.witness) {
            (None, None) => {}
            (Some(found), Some((state, word))) => {
                assert_eq!(found.state, *state);
                assert_eq!(&found.alternative, word);
            }
            other => panic!("witness mismatch: {other:?}"),
        }
    }
    // the deviation for codebook 0,1: state 1 sends "2"; the sender's
    // in-state payoff rises from 8 * 9/10 = 7.2 to 8 * 1 = 8
    let not_nash = &instance.rows[0];
    let report = check_nash(
        game,
        &not_nash.codebook,
        &DecoderSpec::Rule(TieBreakRule::Uniform),
        Budget::default(),
    )
    .unwrap();
    let witness = report.witness.unwrap();
    assert_eq!(witness.current_prob, rat(9, 10));
    assert_eq!(witness.deviation_prob, rat(1, 1));
    let u1 = &game.sender_util[1];
    assert_eq!(u1 * &witness.current_prob, rat(36, 5));
    assert_eq!(u1 * &witness.deviation_prob, rat(8, 1));
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        "2 (ternary Nash verdicts)",
        format!("6 codebooks, {elapsed:?}"),
    );
}

/// Receiver-optimal and locally receiver-optimal codes are Nash codes on a
/// seeded random suite.
#[test]
fn criterion_03_optimal_codes_are_nash() {
    let started = Instant::now();
    let instances = 200usize;
    let failures: Vec<String> = (0..instances as u64)
        .into_par_iter()
        .filter_map(|seed| {
            let symbols = 2 + (seed / 3 % 2) as usize;
            let spec = RandomSpec {
                seed: 0xC3 + seed,
                states: 1 + (seed % 3) as usize,
                input_symbols: symbols,
                output_symbols: symbols,
                uses: 1 + (seed / 5 % 2) as usize,
                max_denominator: 60,
                binary: false,
            };
            let (game, start) = random_game_and_codebook(&spec);
            let rules = [
                TieBreakRule::Uniform,
                TieBreakRule::FixedOrder((0..game.states()).rev().collect()),
            ];

            let (global, _) = global_receiver_optimal(&game, Budget::default()).unwrap();
            for rule in &rules {
                let report = check_nash(
                    &game,
                    &global,
                    &DecoderSpec::Rule(rule.clone()),
                    Budget::default(),
                )
                .unwrap();
                if !report.is_nash {
                    return Some(format!(
                        "seed {seed}: global optimum not Nash under {rule:?}"
                    ));
                }
            }

            let (terminal, trace) =
                local_receiver_search(&game, &start, Budget::default()).unwrap();
            for pair in trace.steps.windows(2) {
                if pair[1].receiver_payoff <= pair[0].receiver_payoff {
                    return Some(format!("seed {seed}: non-increasing trace"));
                }
            }
            for rule in &rules {
                let report = check_nash(
                    &game,
                    &terminal,
                    &DecoderSpec::Rule(rule.clone()),
                    Budget::default(),
                )
                .unwrap();
                if !report.is_nash {
                    return Some(format!(
                        "seed {seed}: local terminal not Nash under {rule:?}"
                    ));
                }
            }
            None
        })
        .collect();
    assert!(failures.is_empty(), "{failures:?}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        "3 (optimal codes are Nash)",
        format!("{instances} instances, {elapsed:?}"),
    );
}

/// Single-codeword changes move sender and receiver payoffs with the same
/// sign under any fixed decoder; a multi-codeword change can move them in
/// opposite directions.
#[test]
fn criterion_04_potential_structure() {
    let started = Instant::now();
    let mut moves = 0u64;
    let mut seed = 0u64;
    while moves < 10_000 {
        let spec = RandomSpec {
            seed: 0x40_000 + seed,
            states: 2 + (seed % 2) as usize,
            input_symbols: 2 + (seed / 2 % 2) as usize,
            output_symbols: 2 + (seed / 3 % 2) as usize,
            uses: 1 + (seed / 5 % 2) as usize,
            max_denominator: 40,
            binary: false,
        };
        let (game, code) = random_game_and_codebook(&spec);
        let structure = tie_structure(&game, &code).unwrap();
        let rule = match seed % 3 {
            0 => TieBreakRule::Uniform,
            1 => TieBreakRule::Weighted(
                (0..game.states())
                    .map(|i| rat(1 + ((seed + i as u64) % 5) as i64, 1))
                    .collect(),
            ),
            _ => TieBreakRule::FixedOrder((0..game.states()).rev().collect()),
        };
        let table = decoder_from_rule(&structure, &rule).unwrap();
        let base_u = sender_payoff(&game, &code, &table).unwrap();
        let base_v = receiver_payoff(&game, &code, &table).unwrap();
        let inputs = game.input_count().unwrap();
        for state in 0..game.states() {
            for rank in 0..inputs {
                let word = Word::from_rank(rank, game.uses, game.channel.inputs.len());
                if &word == code.word(state) {
                    continue;
                }
                let moved = code.with_word(state, word);
                let du = sender_payoff(&game, &moved, &table).unwrap() - base_u.clone();
                let dv = receiver_payoff(&game, &moved, &table).unwrap() - base_v.clone();
                assert_eq!(
                    du.sign(),
                    dv.sign(),
                    "seed {seed} state {state} rank {rank}"
                );
                moves += 1;
            }
        }
        seed += 1;
    }

    // the embedded two-codeword counterexample: U strictly up, V strictly down
    let cmp = fixed_decoder_comparison();
    assert_eq!(
        sender_payoff(&cmp.game, &cmp.base, &cmp.decoder).unwrap(),
        rat(39, 20)
    );
    assert_eq!(
        sender_payoff(&cmp.game, &cmp.changed, &cmp.decoder).unwrap(),
        rat(71, 20)
    );
    assert_eq!(
        receiver_payoff(&cmp.game, &cmp.base, &cmp.decoder).unwrap(),
        rat(81, 20)
    );
    assert_eq!(
        receiver_payoff(&cmp.game, &cmp.changed, &cmp.decoder).unwrap(),
        rat(37, 10)
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        "4 (potential structure)",
        format!("{moves} single-codeword moves, {elapsed:?}"),
    );
}

fn uniform_binary_game(states: usize, uses: usize) -> Game {
    let channel = Channel::binary(rat(1, 10), rat(1, 10)).unwrap();
    Game::new(
        channel,
        uses,
        vec![rat(1, states as i64); states],
        vec![Rat::one(); states],
        vec![Rat::one(); states],
    )
}

/// Every binary codebook is a Nash code under uniform, fixed-order, and
/// weighted tie-breaking, across seeded games including the tie-rich uniform
/// one.
#[test]
fn criterion_05_binary_sweep() {
    let started = Instant::now();
    let states = 4;
    let uses = 3;
    let games = 10;
    let orders = all_orders(states);
    let mut order_uses = vec![0usize; orders.len()];
    let mut jobs = Vec::new();
    let mut cursor = 0usize;
    for g in 0..games {
        let game = if g == 0 {
            uniform_binary_game(states, uses)
        } else {
            random_binary_game(0x50 + g as u64, states, uses, 1000)
        };
        let mut rules = vec![TieBreakRule::Uniform];
        for _ in 0..10 {
            rules.push(TieBreakRule::FixedOrder(
                orders[cursor % orders.len()].clone(),
            ));
            order_uses[cursor % orders.len()] += 1;
            cursor += 1;
        }
        for k in 0..2 {
            let weights = (0..states)
                .map(|i| rat(1 + ((g * 7 + k * 3 + i) % 9) as i64, 1))
                .collect();
            rules.push(TieBreakRule::Weighted(weights));
        }
        jobs.push(SweepJob { game, rules });
    }
    assert!(
        order_uses.iter().all(|&count| count >= 4),
        "order sampling too thin: {order_uses:?}"
    );
    let rules_per_game = jobs[0].rules.len();
    let config = SweepConfig {
        states,
        uses,
        jobs,
        budget: Budget::default(),
    };
    let report = verify_binary_theorem(&config).unwrap();
    assert_eq!(report.codebooks, 4096);
    assert_eq!(report.checks, 4096 * games as u64 * rules_per_game as u64);
    assert!(
        report.all_nash(),
        "counterexamples: {:?}",
        report.counterexamples
    );
    let main_elapsed = started.elapsed();

    // extended shape: 65536 codebooks
    let extended_start = Instant::now();
    let config = SweepConfig {
        states,
        uses: 4,
        jobs: vec![SweepJob {
            game: uniform_binary_game(states, 4),
            rules: vec![
                TieBreakRule::Uniform,
                TieBreakRule::FixedOrder((0..states).collect()),
            ],
        }],
        budget: Budget::default(),
    };
    let extended = verify_binary_theorem(&config).unwrap();
    assert_eq!(extended.codebooks, 65536);
    assert!(extended.all_nash());
    let extended_elapsed = extended_start.elapsed();
    assert!(
        main_elapsed.as_secs_f64() + extended_elapsed.as_secs_f64() < 300.0,
        "took {main_elapsed:?} + {extended_elapsed:?}"
    );
    pass(
        "5 (binary sweep)",
        format!(
            "{} checks in {main_elapsed:?}, extended 65536 codebooks in {extended_elapsed:?}",
            report.checks
        ),
    );
}

/// The circular decoder fails monotonicity at (101, 111, state 1) and the
/// sender condition at (state 1, 110); fixed-order decoding passes both.
#[test]
fn criterion_06_monotonicity_counterexample() {
    let started = Instant::now();
    let b = binary_instance();
    let structure = tie_structure(&b.game, &b.codebook).unwrap();

    match is_monotonic(&b.circular, &structure).unwrap() {
        MonotonicityVerdict::Violation(v) => {
            assert_eq!(structure.word(v.y_rank), b.monotonicity_witness.0);
            assert_eq!(structure.word(v.y_prime_rank), b.monotonicity_witness.1);
            assert_eq!(v.state, b.monotonicity_witness.2);
        }
        other => panic!("expected monotonicity violation, got {other:?}"),
    }
    let report = check_nash(
        &b.game,
        &b.codebook,
        &DecoderSpec::Table(b.circular.clone()),
        Budget::default(),
    )
    .unwrap();
    assert!(report.receiver_side_ok);
    assert!(!report.is_nash);
    let witness = report.witness.unwrap();
    assert_eq!((witness.state, witness.alternative), b.nash_witness);

    let fixed = decoder_from_rule(&structure, &b.fixed_order).unwrap();
    assert!(is_monotonic(&fixed, &structure).unwrap().is_monotonic());
    let report = check_nash(
        &b.game,
        &b.codebook,
        &DecoderSpec::Rule(b.fixed_order.clone()),
        Budget::default(),
    )
    .unwrap();
    assert!(report.is_nash);
    pass(
        "6 (monotonicity counterexample)",
        format!("{:?}", started.elapsed()),
    );
}

/// Independent oracle for criterion 7: every deterministic assignment of a
/// chosen state to each nonempty subset, enumerated mixed-radix.
struct CandidateIter {
    masks: Vec<usize>,
    members: Vec<Vec<usize>>,
    counter: Vec<usize>,
    done: bool,
}

impl CandidateIter {
    fn new(m: usize) -> Self {
        let masks: Vec<usize> = (1..(1usize << m)).collect();
        let members = masks
            .iter()
            .map(|&mask| StateSet(mask as u64).to_vec())
            .collect();
        CandidateIter {
            counter: vec![0; masks.len()],
            masks,
            members,
            done: false,
        }
    }
}

impl Iterator for CandidateIter {
    /// assignment[mask] = chosen state
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let size = self.masks.len() + 1;
        let mut assignment = vec![0usize; size];
        for (idx, &mask) in self.masks.iter().enumerate() {
            assignment[mask] = self.members[idx][self.counter[idx]];
        }
        let mut pos = 0;
        loop {
            if pos == self.counter.len() {
                self.done = true;
                break;
            }
            self.counter[pos] += 1;
            if self.counter[pos] < self.members[pos].len() {
                break;
            }
            self.counter[pos] = 0;
            pos += 1;
        }
        Some(assignment)
    }
}

fn decoder_from_assignment(m: usize, assignment: &[usize]) -> GeneralDecoder {
    GeneralDecoder::from_fn(m, |set| {
        let mut row = vec![Rat::zero(); m];
        row[assignment[set.0 as usize]] = Rat::one();
        row
    })
    .unwrap()
}

/// Deterministic monotonic decoding functions are exactly the fixed-order
/// ones: m! of them, and every other deterministic candidate yields a cycle
/// or subset-pair certificate.
#[test]
fn criterion_07_deterministic_monotonic_enumeration() {
    let started = Instant::now();
    let mut detail = Vec::new();
    for (m, factorial) in [(2usize, 2usize), (3, 6), (4, 24)] {
        let enumerated = enumerate_general_deterministic_monotonic(m, 5).unwrap();
        assert_eq!(enumerated.len(), factorial);
        let mut enumerated_orders: Vec<Vec<usize>> = enumerated
            .iter()
            .map(|d| match derive_fixed_order(d).unwrap() {
                FixedOrderOutcome::Order(order) => order,
                other => panic!("enumerated decoder not fixed-order: {other:?}"),
            })
            .collect();
        enumerated_orders.sort();
        let mut expected_orders = all_orders(m);
        expected_orders.sort();
        assert_eq!(enumerated_orders, expected_orders);

        let mut total = 0usize;
        let mut monotonic = 0usize;
        for assignment in CandidateIter::new(m) {
            total += 1;
            let decoder = decoder_from_assignment(m, &assignment);
            match derive_fixed_order(&decoder).unwrap() {
                FixedOrderOutcome::Order(_) => {
                    monotonic += 1;
                    assert!(decoder.is_monotonic());
                }
                FixedOrderOutcome::Cycle(a, b, c) => {
                    assert!(!decoder.is_monotonic());
                    let pair = |x: usize, y: usize| {
                        decoder.choice([x, y].into_iter().collect()) == Some(x)
                    };
                    assert!(pair(a, b) && pair(b, c) && pair(c, a));
                }
                FixedOrderOutcome::SubsetViolation {
                    subset,
                    superset,
                    state,
                } => {
                    assert!(!decoder.is_monotonic());
                    assert!(subset.is_subset_of(&superset));
                    assert!(subset.contains(state));
                    assert_eq!(decoder.choice(superset), Some(state));
                    assert_ne!(decoder.choice(subset), Some(state));
                }
            }
        }
        assert_eq!(monotonic, factorial);
        let expected_total: usize = (1..(1usize << m))
            .map(|mask| mask.count_ones() as usize)
            .product();
        assert_eq!(total, expected_total);
        detail.push(format!("m={m}: {factorial} of {total}"));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        "7 (deterministic monotonic enumeration)",
        format!("{}, {elapsed:?}", detail.join("; ")),
    );
}

/// Sign monotonicity, the multilinear interpolation inequality with its
/// vertex identity, and agreement between the interpolation-route and
/// enumeration-route Nash verdicts.
#[test]
fn criterion_08_interpolation_lemmas() {
    let started = Instant::now();

    // exhaustive scan of the embedded binary example
    let b = binary_instance();
    let structure = tie_structure(&b.game, &b.codebook).unwrap();
    let table = decoder_from_rule(&structure, &b.fixed_order).unwrap();
    for state in 0..4 {
        for x in Word::all(3, 2) {
            assert_eq!(
                check_sign_monotonicity(&b.game, &b.codebook, state, &x, Budget::default())
                    .unwrap(),
                None
            );
            let same_len = b
                .codebook
                .word(state)
                .symbols()
                .iter()
                .zip(x.symbols())
                .filter(|(a, b)| a == b)
                .count();
            for y_same in Word::all(same_len, 2) {
                let check =
                    multilinear_check(&b.game, &b.codebook, &table, state, &x, &y_same).unwrap();
                assert!(check.vertex_identity);
                assert!(check.dominates);
            }
        }
    }
    let (nash, witness) =
        interpolation_verdict(&b.game, &b.codebook, &table, Budget::default()).unwrap();
    assert!(nash && witness.is_none());

    // seeded random suite
    let instances = 1000u64;
    let failures: Vec<String> = (0..instances)
        .into_par_iter()
        .filter_map(|seed| {
            let uses = 1 + (seed % 8) as usize;
            let states = match uses {
                8 => 2,
                7 => 2 + (seed % 2) as usize,
                _ => 2 + (seed % 3) as usize,
            };
            let game = if seed % 5 == 0 {
                let eps = rat(1, 3 + (seed % 6) as i64);
                let channel = Channel::binary(eps.clone(), eps).unwrap();
                Game::new(
                    channel,
                    uses,
                    vec![rat(1, states as i64); states],
                    vec![Rat::one(); states],
                    vec![Rat::one(); states],
                )
            } else {
                random_binary_game(0x80_000 + seed, states, uses, 1000)
            };
            let mut rng = ChaCha8Rng::seed_from_u64(0x88_000 + seed);
            let codebook = Codebook::new(
                (0..states)
                    .map(|_| Word((0..uses).map(|_| rng.gen_range(0..2usize)).collect()))
                    .collect(),
            );
            let rule = match seed % 3 {
                0 => TieBreakRule::Uniform,
                1 => TieBreakRule::Weighted(
                    (0..states)
                        .map(|i| rat(1 + ((seed + i as u64) % 7) as i64, 1))
                        .collect(),
                ),
                _ => {
                    let mut order: Vec<usize> = (0..states).collect();
                    order.rotate_left((seed % states as u64) as usize);
                    TieBreakRule::FixedOrder(order)
                }
            };
            let structure = tie_structure(&game, &codebook).unwrap();
            let table = decoder_from_rule(&structure, &rule).unwrap();

            // sampled lemma checks
            let state = (seed % states as u64) as usize;
            let x = Word((0..uses).map(|_| rng.gen_range(0..2usize)).collect());
            match check_sign_monotonicity(&game, &codebook, state, &x, Budget::default()) {
                Ok(None) => {}
                other => return Some(format!("seed {seed}: sign monotonicity {other:?}")),
            }
            let same_len = codebook
                .word(state)
                .symbols()
                .iter()
                .zip(x.symbols())
                .filter(|(a, b)| a == b)
                .count();
            let y_same = Word((0..same_len).map(|_| rng.gen_range(0..2usize)).collect());
            match multilinear_check(&game, &codebook, &table, state, &x, &y_same) {
                Ok(check) => {
                    if !check.vertex_identity || !check.dominates {
                        return Some(format!("seed {seed}: interpolation check failed"));
                    }
                    // h grows with the agreement subset
                    let d = check.h.len().trailing_zeros() as usize;
                    for mask in 0..check.h.len() {
                        for t in 0..d {
                            if mask >> t & 1 == 0 && check.h[mask | 1 << t] < check.h[mask] {
                                return Some(format!("seed {seed}: h not monotone"));
                            }
                        }
                    }
                }
                Err(err) => return Some(format!("seed {seed}: {err}")),
            }
            let (current, deviation) =
                interpolation_decode_probs(&game, &codebook, &table, state, &x).unwrap();
            let direct_current =
                correct_decode_prob(&game, &table, state, codebook.word(state)).unwrap();
            let direct_deviation = correct_decode_prob(&game, &table, state, &x).unwrap();
            if current != direct_current || deviation != direct_deviation {
                return Some(format!("seed {seed}: route values disagree"));
            }

            // verdict equivalence between the two routes
            let report = check_nash(
                &game,
                &codebook,
                &DecoderSpec::Rule(rule.clone()),
                Budget::default(),
            )
            .unwrap();
            let (interp_nash, interp_witness) =
                interpolation_verdict(&game, &codebook, &table, Budget::default()).unwrap();
            if report.is_nash != interp_nash || report.witness != interp_witness {
                return Some(format!("seed {seed}: verdicts disagree"));
            }
            if !report.is_nash {
                return Some(format!("seed {seed}: monotonically decoded code not Nash"));
            }
            None
        })
        .collect();
    assert!(failures.is_empty(), "{failures:?}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        "8 (interpolation lemmas)",
        format!("{instances} instances, {elapsed:?}"),
    );
}

/// The fixed-order pair on the four-codeword binary instance is Nash yet not
/// locally receiver-optimal: one codeword change strictly improves the
/// receiver.
#[test]
fn criterion_09_nash_without_local_optimality() {
    let started = Instant::now();
    let b = binary_instance();
    let report = check_nash(
        &b.game,
        &b.codebook,
        &DecoderSpec::Rule(b.fixed_order.clone()),
        Budget::default(),
    )
    .unwrap();
    assert!(report.is_nash);

    let before = receiver_value(&b.game, &b.codebook).unwrap();
    let (state, replacement) = b.improving_change.clone();
    let improved = b.codebook.with_word(state, replacement);
    let after = receiver_value(&b.game, &improved).unwrap();
    assert!(
        after > before,
        "expected strict improvement: {before} -> {after}"
    );
    assert_eq!(before, rat(99, 125));
    assert_eq!(after, rat(81, 100));
    pass(
        "9 (Nash without local optimality)",
        format!("{before} -> {after}, {:?}", started.elapsed()),
    );
}
