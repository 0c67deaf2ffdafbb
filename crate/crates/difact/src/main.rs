use std::fs::File;
use std::io::BufWriter;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use difact_core::diffusion::{run_walk, spectral_data, verify_korobov_bound, StepLedger};
use difact_core::factor::{factor_once, factor_with_retries, FactorError, Status};
use difact_core::numtheory::{p_success, Residue};
use difact_core::orderfind::{find_order, Mode, OrderFindConfig, OrderFindError};
use difact::{
    configured_threads, decode_path_name, parallel_success_rate, path_name, reason_name,
    screen_message, sig17, write_probs_csv, RunRecord,
};
use serde_json::json;

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_NO_ANSWER: u8 = 2;
const SPECTRUM_GUARD: u64 = 4096;

#[derive(Parser)]
#[command(name = "difact", version, about = "Factor integers by simulated heat diffusion on Cayley graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Full,
    Early,
}

impl CliMode {
    fn to_mode(self) -> Mode {
        match self {
            CliMode::Full => Mode::FullBound,
            CliMode::Early => Mode::EarlyStop,
        }
    }

    fn name(self) -> &'static str {
        match self {
            CliMode::Full => "full",
            CliMode::Early => "early",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Factor an odd composite N that is not a prime power
    Factor {
        n: u64,
        /// Fixed base instead of random draws
        #[arg(long)]
        a: Option<u64>,
        /// PRNG seed for the random draws
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        attempts: u64,
        #[arg(long, value_enum, default_value_t = CliMode::Full)]
        mode: CliMode,
        #[arg(long, default_value_t = 25)]
        check_every: u64,
        #[arg(long, default_value_t = 8)]
        max_candidates: usize,
        #[arg(long)]
        json: bool,
    },
    /// Compute the multiplicative order of b modulo N by diffusion
    Order {
        n: u64,
        b: u64,
        #[arg(long, value_enum, default_value_t = CliMode::Full)]
        mode: CliMode,
        /// Override the walk's diffusion-step budget
        #[arg(long)]
        steps: Option<u64>,
        /// Write the final probability vector as CSV
        #[arg(long, value_name = "PATH")]
        emit_probs: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Eigenvalues of the half-lazy walk on the order-r graph
    Spectrum {
        r: u64,
        m: u32,
        /// Also check the exponential-sum bound max|eta_k|/(2(M+1)) < 1 - 1/(M+1)
        #[arg(long)]
        verify_bound: bool,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive success rate of the pipeline over all a in {1..N}
    SuccessRate {
        n: u64,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::from(EXIT_OK)
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
    };
    let started = Instant::now();
    let code = match cli.command {
        Command::Factor {
            n,
            a,
            seed,
            attempts,
            mode,
            check_every,
            max_candidates,
            json,
        } => cmd_factor(n, a, seed, attempts, mode, check_every, max_candidates, json),
        Command::Order {
            n,
            b,
            mode,
            steps,
            emit_probs,
            json,
        } => cmd_order(n, b, mode, steps, emit_probs.as_deref(), json),
        Command::Spectrum {
            r,
            m,
            verify_bound,
            json,
        } => cmd_spectrum(r, m, verify_bound, json),
        Command::SuccessRate { n, json } => cmd_success_rate(n, json),
    };
    if code == EXIT_OK || code == EXIT_NO_ANSWER {
        eprintln!("wall time: {} ms", started.elapsed().as_millis());
    }
    ExitCode::from(code)
}

fn emit(record: &RunRecord) {
    println!("{}", serde_json::to_string(record).unwrap());
}

fn input_error(msg: &str) -> u8 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

#[allow(clippy::too_many_arguments)]
fn cmd_factor(
    n: u64,
    a: Option<u64>,
    seed: u64,
    attempts: u64,
    mode: CliMode,
    check_every: u64,
    max_candidates: usize,
    json: bool,
) -> u8 {
    let config = OrderFindConfig {
        mode: mode.to_mode(),
        check_every,
        max_candidates,
        ..OrderFindConfig::default()
    };
    let inputs = json!({
        "n": n,
        "a": a,
        "seed": if a.is_none() { Some(seed) } else { None },
        "attempts": if a.is_none() { Some(attempts) } else { None },
        "mode": mode.name(),
        "check_every": check_every,
        "max_candidates": max_candidates,
    });

    let (outcomes, used_seed) = if let Some(a) = a {
        match factor_once(n, a, &config) {
            Ok(out) => (vec![out], None),
            Err(e) => return factor_input_error(n, e),
        }
    } else {
        match factor_with_retries(n, attempts, seed, &config) {
            Ok(report) => (report.outcomes, Some(report.seed)),
            Err(e) => return factor_input_error(n, e),
        }
    };

    let mut ledger = StepLedger::default();
    for out in &outcomes {
        ledger.absorb(&out.ledger);
    }
    let last = outcomes.last().expect("at least one attempt when a is fixed");
    let found = outcomes.iter().find_map(|o| o.divisor());

    let outcome = match found {
        Some((d, c)) => json!({
            "status": "found",
            "divisor": d,
            "cofactor": c,
            "path": path_name(last.path),
            "a": last.chosen_a,
            "attempts_used": outcomes.len(),
        }),
        None => json!({
            "status": "no-answer",
            "path": path_name(last.path),
            "reason": match last.status {
                Status::NoAnswer { reason } => reason_name(reason),
                Status::Found { .. } => unreachable!(),
            },
            "a": last.chosen_a,
            "attempts_used": outcomes.len(),
        }),
    };
    let mut record = RunRecord::new("factor", inputs, outcome, &ledger);
    record.seed = used_seed;
    if json {
        emit(&record);
    } else {
        match found {
            Some((d, c)) => println!(
                "{n} = {d} * {c} (a = {}, path {}, {} diffusion steps)",
                last.chosen_a,
                path_name(last.path),
                ledger.diffusion_steps()
            ),
            None => println!(
                "no divisor of {n} found after {} attempt(s)",
                outcomes.len()
            ),
        }
    }
    if found.is_some() {
        EXIT_OK
    } else {
        EXIT_NO_ANSWER
    }
}

fn factor_input_error(n: u64, e: FactorError) -> u8 {
    match e {
        FactorError::ScreenRejected { screen, .. } => input_error(&screen_message(n, screen)),
        FactorError::OrderFind(OrderFindError::NotAUnit { value, modulus }) => {
            input_error(&format!("{value} is not a unit modulo {modulus}"))
        }
        other => input_error(&format!("{other}")),
    }
}

fn cmd_order(
    n: u64,
    b: u64,
    mode: CliMode,
    steps: Option<u64>,
    emit_probs: Option<&str>,
    json: bool,
) -> u8 {
    let b_res = match Residue::new(b, n) {
        Ok(r) if r.is_unit() => r,
        _ => return input_error(&format!("{b} is not a unit modulo {n}")),
    };
    let config = OrderFindConfig {
        mode: mode.to_mode(),
        steps_override: steps,
        ..OrderFindConfig::default()
    };
    let result = match find_order(b_res, &config) {
        Ok(r) => r,
        Err(OrderFindError::NotAUnit { value, modulus }) => {
            return input_error(&format!("{value} is not a unit modulo {modulus}"))
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NO_ANSWER;
        }
    };

    if let Some(path) = emit_probs {
        let graph = difact_core::cayley::build_cayley_graph(b_res).expect("unit checked above");
        let mut ledger = StepLedger::default();
        let state = match run_walk(&graph, result.ledger.matrix_applications, &mut ledger) {
            Ok(s) => s,
            Err(e) => return input_error(&format!("{e}")),
        };
        let file = match File::create(path) {
            Ok(f) => f,
            Err(e) => return input_error(&format!("cannot write {path}: {e}")),
        };
        if let Err(e) = write_probs_csv(BufWriter::new(file), &graph, state.probabilities()) {
            return input_error(&format!("cannot write {path}: {e}"));
        }
    }

    let interval_json = |iv: &difact_core::orderfind::CandidateInterval| {
        json!({
            "lower": sig17(iv.lower),
            "upper": sig17(iv.upper),
            "tolerance": sig17(iv.a_m),
            "candidates": iv.candidates,
        })
    };
    let inputs = json!({
        "n": n,
        "b": b,
        "mode": mode.name(),
        "steps": steps,
        "emit_probs": emit_probs,
    });
    let outcome = json!({
        "order": result.order,
        "decode_path": decode_path_name(result.decode_path),
        "candidates_tried": result.candidates_tried,
        "bound_interval": result.bound_interval.as_ref().map(interval_json),
        "raw_interval": result.raw_interval.as_ref().map(interval_json),
    });
    let record = RunRecord::new("order", inputs, outcome, &result.ledger);
    if json {
        emit(&record);
    } else {
        println!(
            "ord_{n}({b}) = {} ({} W applications + {} measurement(s) = {} diffusion steps, {})",
            result.order,
            result.ledger.matrix_applications,
            result.ledger.measurements,
            result.ledger.diffusion_steps(),
            decode_path_name(result.decode_path),
        );
    }
    EXIT_OK
}

fn cmd_spectrum(r: u64, m: u32, verify_bound: bool, json: bool) -> u8 {
    if r == 0 || r % 2 == 0 {
        return input_error(&format!("r = {r} must be odd and positive"));
    }
    if r > SPECTRUM_GUARD {
        return input_error(&format!("r = {r} exceeds the guard {SPECTRUM_GUARD}"));
    }
    let data = spectral_data(r, m);
    let bound = if verify_bound {
        match verify_korobov_bound(r, m) {
            Ok((ratio, holds)) => Some(json!({
                "ratio": ratio,
                "threshold": 1.0 - 1.0 / (m as f64 + 1.0),
                "holds": holds,
            })),
            Err(e) => return input_error(&format!("{e}")),
        }
    } else {
        None
    };
    let inputs = json!({"r": r, "m": m, "verify_bound": verify_bound});
    let outcome = json!({
        "lambda_star": data.lambda_star,
        "lambda": data.lambda,
        "bound": bound,
    });
    let record = RunRecord::new("spectrum", inputs, outcome, &StepLedger::default());
    if json {
        emit(&record);
    } else {
        println!("lambda_star = {}", data.lambda_star);
        if let Some(b) = &bound {
            println!(
                "korobov ratio = {} (threshold {}): {}",
                b["ratio"],
                b["threshold"],
                if b["holds"].as_bool().unwrap() { "holds" } else { "VIOLATED" }
            );
        }
    }
    EXIT_OK
}

fn cmd_success_rate(n: u64, json: bool) -> u8 {
    let config = OrderFindConfig::default();
    let report = match parallel_success_rate(n, &config, configured_threads()) {
        Ok(r) => r,
        Err(FactorError::ScreenRejected { screen, .. }) => {
            return input_error(&screen_message(n, screen))
        }
        Err(e) => return input_error(&format!("{e}")),
    };
    let m = difact::distinct_prime_factors(n);
    let bound = p_success(m);
    let h = &report.histogram;
    let inputs = json!({"n": n});
    let outcome = json!({
        "n": n,
        "distinct_prime_factors": m,
        "rate_over_units": format!("{}", report.rate_over_units),
        "rate_over_units_float": sig17(report.rate_over_units.to_f64()),
        "rate_over_all": format!("{}", report.rate_over_all),
        "rate_over_all_float": sig17(report.rate_over_all.to_f64()),
        "unit_count": report.unit_count,
        "bound": format!("{bound}"),
        "bound_float": sig17(bound.to_f64()),
        "bound_met": report.rate_over_units >= bound,
        "histogram": {
            "found_step1": h.found_step1,
            "found_step3": h.found_step3,
            "found_step5": h.found_step5,
            "no_answer_step1": h.no_answer_step1,
            "s_zero": h.s_zero,
            "trivial_gcd_step3": h.trivial_gcd_step3,
            "trivial_gcd_step5": h.trivial_gcd_step5,
            "order_odd_at_step5": h.order_odd_at_step5,
        },
    });
    let record = RunRecord::new("success-rate", inputs, outcome, &StepLedger::default());
    if json {
        emit(&record);
    } else {
        println!(
            "success rate over units: {} ({} units), over all draws: {}; bound p({m}) = {}: {}",
            report.rate_over_units,
            report.unit_count,
            report.rate_over_all,
            bound,
            if report.rate_over_units >= bound { "met" } else { "NOT MET" },
        );
    }
    EXIT_OK
}
