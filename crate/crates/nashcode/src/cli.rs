//! Command-line interface.
//!
//! Subcommands read instance files, invoke the engine, and write JSON to
//! stdout (a human-readable table with `--pretty`). Exit codes: 0 for
//! success or a Nash verdict, 1 when the checked property fails (non-Nash,
//! counterexample, table mismatch), 2 for usage or input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::binary::{verify_binary_theorem, SweepConfig, SweepJob, SweepReport};
use crate::decoding::{
    all_orders, decoder_from_rule, derive_fixed_order, enumerate_general_deterministic_monotonic,
    tie_structure, FixedOrderOutcome, TieBreakRule, TieStructure, DEFAULT_ENUMERATION_LIMIT,
};
use crate::equilibrium::{check_nash, receiver_payoff, sender_payoff, DecoderSpec, NashReport};
use crate::error::Error;
use crate::instance::{
    random_binary_game, random_instance, CompiledInstance, DecoderRepr, InstanceFile, RandomSpec,
};
use crate::model::{Codebook, Game, Word};
use crate::rat::Rat;
use crate::reference::{reproduce_tables, ternary_instance, TableReport};
use crate::search::{
    better_reply_dynamics, global_receiver_optimal, local_receiver_search, SearchTrace,
};
use crate::Budget;

#[derive(Parser)]
#[command(
    name = "nashcode",
    about = "Sender-receiver games over noisy channels in exact arithmetic",
    version
)]
struct Cli {
    /// Emit a human-readable table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Enumeration budget (default 2^20; NASHCODE_BUDGET overrides).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArgs {
    /// Path to an instance file.
    #[arg(long)]
    instance: PathBuf,
    /// Decoder: a JSON file path or an inline JSON object. Defaults to the
    /// instance's decoder section, then to the uniform rule.
    #[arg(long)]
    decoder: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the Nash-code conditions for the instance's codebook.
    Check(InstanceArgs),
    /// Print the best-response tie structure.
    Partition {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Print per-state decode probabilities and both expected payoffs.
    Payoff(InstanceArgs),
    /// Hill-climb single-codeword changes on the receiver payoff.
    SearchLocal {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Exhaustively maximize the receiver payoff over all codebooks.
    SearchGlobal {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Iterate profitable sender deviations until a Nash code is reached.
    Dynamics(InstanceArgs),
    /// Check every binary codebook of a shape against sampled games and
    /// monotonic tie-break rules.
    VerifyBinarySweep {
        #[arg(long)]
        states: usize,
        #[arg(long)]
        uses: usize,
        /// Comma-separated rule families: uniform, fixed-order, weighted.
        #[arg(long, default_value = "uniform,fixed-order,weighted")]
        rules: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled games (the first is the tie-rich uniform game).
        #[arg(long, default_value_t = 10)]
        games: usize,
        #[arg(long, default_value_t = 1000)]
        max_denominator: u64,
        /// Fixed orders per game (cycling through all orders).
        #[arg(long, default_value_t = 10)]
        orders: usize,
        /// Random weight vectors per game.
        #[arg(long, default_value_t = 2)]
        weighted: usize,
    },
    /// List all deterministic monotonic general decoders.
    EnumerateMonotonic {
        #[arg(long)]
        states: usize,
    },
    /// Recompute the bundled worked-example tables and diff every cell.
    PaperTables,
    /// Generate a seeded random instance.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        inputs: usize,
        #[arg(long, default_value_t = 2)]
        outputs: usize,
        #[arg(long, default_value_t = 1)]
        uses: usize,
        #[arg(long, default_value_t = 20)]
        max_denominator: u64,
        /// Draw a binary channel satisfying the error inequalities.
        #[arg(long)]
        binary: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses arguments and runs one subcommand, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    let budget = Budget(
        cli.budget
            .or_else(|| {
                std::env::var("NASHCODE_BUDGET")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or(Budget::default().0),
    );
    match dispatch(cli.command, budget, cli.pretty) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}

fn dispatch(command: Command, budget: Budget, pretty: bool) -> Result<i32, Error> {
    match command {
        Command::Check(args) => {
            let (compiled, decoder) = load_with_decoder(&args)?;
            let report = check_nash(&compiled.game, &compiled.codebook, &decoder, budget)?;
            let value = nash_report_json(&compiled.game, &report);
            if pretty {
                print_nash_report(&compiled.game, &compiled.codebook, &report);
            } else {
                emit(&value);
            }
            Ok(if report.is_nash { 0 } else { 1 })
        }
        Command::Partition { instance } => {
            let compiled = load_compiled(&instance)?;
            let structure = tie_structure(&compiled.game, &compiled.codebook)?;
            let value = partition_json(&compiled.game, &structure);
            if pretty {
                print_partition(&compiled.game, &structure);
            } else {
                emit(&value);
            }
            Ok(0)
        }
        Command::Payoff(args) => {
            let (compiled, decoder) = load_with_decoder(&args)?;
            let structure = tie_structure(&compiled.game, &compiled.codebook)?;
            let table = match &decoder {
                DecoderSpec::Rule(rule) => decoder_from_rule(&structure, rule)?,
                DecoderSpec::Table(table) => table.clone(),
            };
            let game = &compiled.game;
            let per_state: Vec<Rat> = (0..game.states())
                .map(|i| {
                    crate::equilibrium::correct_decode_prob(
                        game,
                        &table,
                        i,
                        compiled.codebook.word(i),
                    )
                })
                .collect::<Result<_, _>>()?;
            let u = sender_payoff(game, &compiled.codebook, &table)?;
            let v = receiver_payoff(game, &compiled.codebook, &table)?;
            let value = json!({
                "perState": rat_list(&per_state),
                "senderPayoff": u.to_string(),
                "receiverPayoff": v.to_string(),
            });
            if pretty {
                println!("codebook : {}", codebook_text(game, &compiled.codebook));
                for (i, p) in per_state.iter().enumerate() {
                    println!("decode prob state {i}: {}", pretty_rat(p));
                }
                println!("sender payoff  U = {}", pretty_rat(&u));
                println!("receiver payoff V = {}", pretty_rat(&v));
            } else {
                emit(&value);
            }
            Ok(0)
        }
        Command::SearchLocal { instance } => {
            let compiled = load_compiled(&instance)?;
            let (terminal, trace) =
                local_receiver_search(&compiled.game, &compiled.codebook, budget)?;
            report_search(&compiled.game, &terminal, &trace, pretty);
            Ok(0)
        }
        Command::SearchGlobal { instance } => {
            let compiled = load_compiled(&instance)?;
            let (code, value) = global_receiver_optimal(&compiled.game, budget)?;
            let out = json!({
                "codebook": codebook_json(&compiled.game, &code),
                "receiverPayoff": value.to_string(),
            });
            if pretty {
                println!(
                    "receiver-optimal codebook: {}  (V = {})",
                    codebook_text(&compiled.game, &code),
                    pretty_rat(&value)
                );
            } else {
                emit(&out);
            }
            Ok(0)
        }
        Command::Dynamics(args) => {
            let (compiled, decoder) = load_with_decoder_default(&args, |game| {
                DecoderSpec::Rule(TieBreakRule::FixedOrder((0..game.states()).collect()))
            })?;
            let rule = match decoder {
                DecoderSpec::Rule(rule) => rule,
                DecoderSpec::Table(_) => {
                    return Err(Error::Dimension(
                        "dynamics needs a tie-break rule, not an explicit table".into(),
                    ))
                }
            };
            let (terminal, trace) =
                better_reply_dynamics(&compiled.game, &compiled.codebook, &rule, budget)?;
            report_search(&compiled.game, &terminal, &trace, pretty);
            Ok(0)
        }
        Command::VerifyBinarySweep {
            states,
            uses,
            rules,
            seed,
            games,
            max_denominator,
            orders,
            weighted,
        } => {
            let config = build_sweep_config(
                states,
                uses,
                &rules,
                seed,
                games,
                max_denominator,
                orders,
                weighted,
                budget,
            )?;
            let report = verify_binary_theorem(&config)?;
            let value = sweep_json(&config, &report);
            if pretty {
                print_sweep(&report);
            } else {
                emit(&value);
            }
            Ok(if report.all_nash() { 0 } else { 1 })
        }
        Command::EnumerateMonotonic { states } => {
            let decoders =
                enumerate_general_deterministic_monotonic(states, DEFAULT_ENUMERATION_LIMIT)?;
            let orders: Vec<Vec<usize>> = decoders
                .iter()
                .map(|d| match derive_fixed_order(d)? {
                    FixedOrderOutcome::Order(order) => Ok(order),
                    other => Err(Error::Dimension(format!(
                        "enumerated decoder is not fixed-order: {other:?}"
                    ))),
                })
                .collect::<Result<_, Error>>()?;
            if pretty {
                println!(
                    "{} deterministic monotonic decoders on {states} states:",
                    orders.len()
                );
                for order in &orders {
                    let text: Vec<String> = order.iter().map(|s| s.to_string()).collect();
                    println!("  {}", text.join(" < "));
                }
            } else {
                emit(&json!({ "states": states, "count": orders.len(), "orders": orders }));
            }
            Ok(0)
        }
        Command::PaperTables => {
            let report = reproduce_tables()?;
            if pretty {
                print_reference_tables(&report);
            } else {
                emit(&table_report_json(&report));
            }
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::Random {
            seed,
            states,
            inputs,
            outputs,
            uses,
            max_denominator,
            binary,
            out,
        } => {
            let file = random_instance(&RandomSpec {
                seed,
                states,
                input_symbols: if binary { 2 } else { inputs },
                output_symbols: if binary { 2 } else { outputs },
                uses,
                max_denominator,
                binary,
            });
            match out {
                Some(path) => file.save(&path)?,
                None => print!("{}", file.to_json()),
            }
            Ok(0)
        }
    }
}

fn load_compiled(path: &Path) -> Result<CompiledInstance, Error> {
    InstanceFile::load(path)?.compile()
}

fn load_with_decoder(args: &InstanceArgs) -> Result<(CompiledInstance, DecoderSpec), Error> {
    load_with_decoder_default(args, |_| DecoderSpec::Rule(TieBreakRule::Uniform))
}

fn load_with_decoder_default(
    args: &InstanceArgs,
    default: impl Fn(&Game) -> DecoderSpec,
) -> Result<(CompiledInstance, DecoderSpec), Error> {
    let compiled = load_compiled(&args.instance)?;
    let decoder = match &args.decoder {
        Some(text) => {
            let repr: DecoderRepr = if text.trim_start().starts_with('{') {
                serde_json::from_str(text).map_err(|source| Error::Json {
                    context: "parsing --decoder".into(),
                    source,
                })?
            } else {
                let raw = std::fs::read_to_string(text).map_err(|source| Error::Io {
                    context: format!("reading {text}"),
                    source,
                })?;
                serde_json::from_str(&raw).map_err(|source| Error::Json {
                    context: format!("parsing {text}"),
                    source,
                })?
            };
            let file =
                InstanceFile::from_parts(&compiled.game, &compiled.codebook, Some(&repr), None);
            file.compile()?.decoder.expect("decoder present")
        }
        None => match &compiled.decoder {
            Some(spec) => spec.clone(),
            None => default(&compiled.game),
        },
    };
    Ok((compiled, decoder))
}

#[allow(clippy::too_many_arguments)]
fn build_sweep_config(
    states: usize,
    uses: usize,
    rule_families: &str,
    seed: u64,
    games: usize,
    max_denominator: u64,
    orders_per_game: usize,
    weighted_per_game: usize,
    budget: Budget,
) -> Result<SweepConfig, Error> {
    let families: Vec<&str> = rule_families
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    for family in &families {
        if !matches!(*family, "uniform" | "fixed-order" | "weighted") {
            return Err(Error::Dimension(format!("unknown rule family '{family}'")));
        }
    }
    let orders = all_orders(states);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(games);
    let mut order_cursor = 0usize;
    for index in 0..games {
        let game = if index == 0 {
            // tie-rich uniform game on a symmetric channel
            let channel = crate::model::Channel::binary(
                Rat::new(1, 10).expect("valid"),
                Rat::new(1, 10).expect("valid"),
            )?;
            Game::new(
                channel,
                uses,
                vec![Rat::new(1, states as i64).expect("positive states"); states],
                vec![Rat::one(); states],
                vec![Rat::one(); states],
            )
        } else {
            random_binary_game(
                seed.wrapping_add(index as u64),
                states,
                uses,
                max_denominator,
            )
        };
        let mut rules = Vec::new();
        if families.contains(&"uniform") {
            rules.push(TieBreakRule::Uniform);
        }
        if families.contains(&"fixed-order") {
            for _ in 0..orders_per_game.min(orders.len()) {
                rules.push(TieBreakRule::FixedOrder(
                    orders[order_cursor % orders.len()].clone(),
                ));
                order_cursor += 1;
            }
        }
        if families.contains(&"weighted") {
            for _ in 0..weighted_per_game {
                let weights = (0..states)
                    .map(|_| Rat::from_int(rng.gen_range(1..=16)))
                    .collect();
                rules.push(TieBreakRule::Weighted(weights));
            }
        }
        jobs.push(SweepJob { game, rules });
    }
    Ok(SweepConfig {
        states,
        uses,
        jobs,
        budget,
    })
}

fn emit(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("valid json")
    );
}

fn pretty_rat(value: &Rat) -> String {
    match value.decimal() {
        Some(text) => text,
        None => value.to_string(),
    }
}

fn rat_list(values: &[Rat]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn word_text(game: &Game, word: &Word) -> String {
    game.channel.outputs.format_word(word)
}

fn input_word_text(game: &Game, word: &Word) -> String {
    game.channel.inputs.format_word(word)
}

fn codebook_json(game: &Game, code: &Codebook) -> Value {
    Value::Array(
        code.words()
            .iter()
            .map(|w| Value::String(input_word_text(game, w)))
            .collect(),
    )
}

fn codebook_text(game: &Game, code: &Codebook) -> String {
    code.words()
        .iter()
        .map(|w| input_word_text(game, w))
        .collect::<Vec<_>>()
        .join(",")
}

fn nash_report_json(game: &Game, report: &NashReport) -> Value {
    json!({
        "isNash": report.is_nash,
        "receiverSideOk": report.receiver_side_ok,
        "perState": rat_list(&report.per_state),
        "senderPayoff": report.sender_payoff.to_string(),
        "receiverPayoff": report.receiver_payoff.to_string(),
        "witness": report.witness.as_ref().map(|w| json!({
            "state": w.state,
            "alternative": input_word_text(game, &w.alternative),
            "currentProb": w.current_prob.to_string(),
            "deviationProb": w.deviation_prob.to_string(),
        })),
        "uniqueOptimum": report.unique_optimum,
    })
}

fn print_nash_report(game: &Game, code: &Codebook, report: &NashReport) {
    println!("codebook : {}", codebook_text(game, code));
    println!(
        "verdict  : {}",
        if report.is_nash { "Nash" } else { "not Nash" }
    );
    println!(
        "receiver : {}",
        if report.receiver_side_ok {
            "best response"
        } else {
            "NOT a best response"
        }
    );
    for (i, p) in report.per_state.iter().enumerate() {
        println!("state {i}: decode prob {}", pretty_rat(p));
    }
    println!("sender payoff  U = {}", pretty_rat(&report.sender_payoff));
    println!(
        "receiver payoff V = {}",
        pretty_rat(&report.receiver_payoff)
    );
    if let Some(w) = &report.witness {
        println!(
            "deviation: state {} -> send {} ({} > {})",
            w.state,
            input_word_text(game, &w.alternative),
            pretty_rat(&w.deviation_prob),
            pretty_rat(&w.current_prob),
        );
    }
}

fn partition_json(game: &Game, structure: &TieStructure) -> Value {
    let mut tie_sets = serde_json::Map::new();
    for rank in 0..structure.output_count() {
        let word = structure.word(rank);
        tie_sets.insert(
            word_text(game, &word),
            Value::Array(
                structure
                    .set_at(rank)
                    .iter()
                    .map(|s| Value::Number(s.into()))
                    .collect(),
            ),
        );
    }
    let classes: Vec<Value> = (0..structure.num_states())
        .map(|state| {
            Value::Array(
                structure
                    .class(state)
                    .into_iter()
                    .map(|rank| Value::String(word_text(game, &structure.word(rank))))
                    .collect(),
            )
        })
        .collect();
    json!({ "tieSets": tie_sets, "classes": classes })
}

fn print_partition(game: &Game, structure: &TieStructure) {
    for state in 0..structure.num_states() {
        let members: Vec<String> = structure
            .class(state)
            .into_iter()
            .map(|rank| word_text(game, &structure.word(rank)))
            .collect();
        println!("Y_{state} = {{{}}}", members.join(", "));
    }
    let ties: Vec<usize> = (0..structure.output_count())
        .filter(|&r| structure.set_at(r).len() > 1)
        .collect();
    if ties.is_empty() {
        println!("no ties");
    } else {
        for rank in ties {
            let states: Vec<String> = structure
                .set_at(rank)
                .iter()
                .map(|s| s.to_string())
                .collect();
            println!(
                "tie at {}: states {{{}}}",
                word_text(game, &structure.word(rank)),
                states.join(", ")
            );
        }
    }
}

fn search_trace_json(game: &Game, terminal: &Codebook, trace: &SearchTrace) -> Value {
    json!({
        "terminal": codebook_json(game, terminal),
        "receiverPayoff": trace.steps.last().map(|s| s.receiver_payoff.to_string()),
        "steps": trace.steps.iter().map(|step| json!({
            "codebook": codebook_json(game, &step.codebook),
            "changedState": step.changed_state,
            "receiverPayoff": step.receiver_payoff.to_string(),
        })).collect::<Vec<_>>(),
    })
}

fn report_search(game: &Game, terminal: &Codebook, trace: &SearchTrace, pretty: bool) {
    if pretty {
        for step in &trace.steps {
            let change = match step.changed_state {
                Some(state) => format!("state {state} moved"),
                None => "start".to_string(),
            };
            println!(
                "{:-30} V = {:-10} ({change})",
                codebook_text(game, &step.codebook),
                pretty_rat(&step.receiver_payoff),
            );
        }
        println!("terminal: {}", codebook_text(game, terminal));
    } else {
        emit(&search_trace_json(game, terminal, trace));
    }
}

fn sweep_json(config: &SweepConfig, report: &SweepReport) -> Value {
    json!({
        "states": config.states,
        "uses": config.uses,
        "games": report.jobs,
        "rules": config.jobs.iter().map(|job| job.rules.len()).collect::<Vec<_>>(),
        "codebooks": report.codebooks,
        "checks": report.checks,
        "nash": report.nash,
        "failed": report.failed,
        "counterexamples": report.counterexamples.iter().map(|c| json!({
            "game": c.job,
            "rule": c.rule,
            "codebook": codebook_json(&config.jobs[c.job].game, &c.codebook),
            "state": c.witness.state,
            "alternative": config.jobs[c.job].game.channel.inputs.format_word(&c.witness.alternative),
        })).collect::<Vec<_>>(),
    })
}

fn print_sweep(report: &SweepReport) {
    println!(
        "games {}  codebooks {}  checks {}  nash {}  failed {}",
        report.jobs, report.codebooks, report.checks, report.nash, report.failed
    );
    if report.failed == 0 {
        println!("every (game, codebook, rule) combination is a Nash code");
    }
}

fn table_report_json(report: &TableReport) -> Value {
    json!({
        "cellsChecked": report.cells_checked,
        "mismatches": report.mismatches.iter().map(|m| json!({
            "table": m.table,
            "row": m.row,
            "column": m.column,
            "expected": m.expected,
            "actual": m.actual,
        })).collect::<Vec<_>>(),
    })
}

fn print_reference_tables(report: &TableReport) {
    let instance = ternary_instance();
    let game = &instance.game;
    println!("codebook   Y_0        Y_1        p0     p1     U      V");
    for row in &instance.rows {
        let structure = tie_structure(game, &row.codebook).expect("embedded instance is valid");
        let class_text = |state: usize| {
            let members: Vec<String> = structure
                .class(state)
                .into_iter()
                .map(|r| word_text(game, &structure.word(r)))
                .collect();
            format!("{{{}}}", members.join(","))
        };
        println!(
            "{:-10} {:-10} {:-10} {:-6} {:-6} {:-6} {:-6}",
            codebook_text(game, &row.codebook),
            class_text(0),
            class_text(1),
            pretty_rat(&row.decode_probs[0]),
            pretty_rat(&row.decode_probs[1]),
            pretty_rat(&row.sender_payoff),
            pretty_rat(&row.receiver_payoff),
        );
    }
    if report.is_clean() {
        println!("all {} recomputed cells match", report.cells_checked);
    } else {
        for m in &report.mismatches {
            println!(
                "MISMATCH {} [{} / {}]: expected {}, got {}",
                m.table, m.row, m.column, m.expected, m.actual
            );
        }
    }
}
