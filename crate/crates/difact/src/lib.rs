//! Output formats and driver helpers for the `difact` binary: run records,
//! probability CSV dumps, and the parallel exhaustive sweep.

use std::io::Write;

use difact_core::cayley::CayleyGraph;
use difact_core::diffusion::StepLedger;
use difact_core::factor::{
    factor_once, summarize_outcomes, FactorError, FactorOutcome, NoAnswerReason, Path,
    SuccessRateReport,
};
use difact_core::numtheory::ScreenResult;
use difact_core::orderfind::{DecodePath, OrderFindConfig};
use serde::Serialize;
use serde_json::{json, Value};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Probability rendered as a 17-significant-digit decimal string so JSON and
/// CSV round-trip bit-exactly.
pub fn sig17(p: f64) -> String {
    format!("{:.16e}", p)
}

/// The single JSON object every command emits under `--json`. Field order is
/// fixed by this struct; `wall_time_ms` is always 0 in serialized output to
/// keep runs byte-identical (measured time goes to stderr).
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub inputs: Value,
    pub outcome: Value,
    pub ledger: Value,
    pub wall_time_ms: u64,
    pub seed: Option<u64>,
    pub artifact_version: String,
}

impl RunRecord {
    pub fn new(command: &str, inputs: Value, outcome: Value, ledger: &StepLedger) -> Self {
        RunRecord {
            command: command.to_string(),
            inputs,
            outcome,
            ledger: ledger_json(ledger),
            wall_time_ms: 0,
            seed: None,
            artifact_version: ARTIFACT_VERSION.to_string(),
        }
    }
}

pub fn ledger_json(ledger: &StepLedger) -> Value {
    json!({
        "matrix_applications": ledger.matrix_applications,
        "measurements": ledger.measurements,
        "diffusion_steps": ledger.diffusion_steps(),
        "digital_ops": ledger.digital_ops,
    })
}

pub fn path_name(path: Path) -> &'static str {
    match path {
        Path::Step1Gcd => "step1-gcd",
        Path::Step3Repetition => "step3-repetition",
        Path::Step5Order => "step5-order",
    }
}

pub fn reason_name(reason: NoAnswerReason) -> &'static str {
    match reason {
        NoAnswerReason::SZero => "s-zero",
        NoAnswerReason::TrivialGcd => "trivial-gcd",
        NoAnswerReason::OrderOddAtStep5 => "order-odd-at-step5",
    }
}

pub fn decode_path_name(path: DecodePath) -> &'static str {
    match path {
        DecodePath::FullBoundDecode => "full-bound",
        DecodePath::EarlyStopDecode => "early-stop",
        DecodePath::RepetitionShortcut => "repetition-shortcut",
    }
}

pub fn screen_message(n: u64, screen: Option<ScreenResult>) -> String {
    match screen {
        Some(ScreenResult::Even) => format!("{n} is even: factor out 2 first"),
        Some(ScreenResult::Prime) => format!("{n} is prime"),
        Some(ScreenResult::PrimePower { base, exponent }) => {
            format!("{n} is a prime power: {base}^{exponent}")
        }
        Some(ScreenResult::CompositeNonPrimePower) => {
            format!("{n} unexpectedly passed the screen")
        }
        None => format!("{n} is out of range (need odd 3 <= N < 2^31)"),
    }
}

/// Writes the probability dump: one row per vertex of the walk's state.
pub fn write_probs_csv<W: Write>(
    mut w: W,
    graph: &CayleyGraph,
    probabilities: &[f64],
) -> std::io::Result<()> {
    writeln!(w, "vertex,residue,probability,reciprocal")?;
    for (id, &p) in probabilities.iter().enumerate() {
        let recip = if p > 0.0 {
            sig17(1.0 / p)
        } else {
            "inf".to_string()
        };
        writeln!(
            w,
            "{},{},{},{}",
            id,
            graph.vertex_label(id as u32),
            sig17(p),
            recip
        )?;
    }
    Ok(())
}

/// Number of distinct prime factors of `n` (trial division; `n` is small).
pub fn distinct_prime_factors(mut n: u64) -> u32 {
    let mut count = 0;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            count += 1;
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    count + (n > 1) as u32
}

/// Exhaustive sweep over `a in {1..N}` fanned out across `threads` workers.
/// Outcomes are reduced in `a` order, so the report is identical for any
/// thread count.
pub fn parallel_success_rate(
    n: u64,
    config: &OrderFindConfig,
    threads: usize,
) -> Result<SuccessRateReport, FactorError> {
    if n > difact_core::factor::EXHAUSTIVE_LIMIT {
        return Err(FactorError::TooLarge { n });
    }
    // fail fast on screen rejection before spawning anything
    factor_once(n, 1, config)?;
    let threads = threads.clamp(1, 64);
    let chunk = n.div_ceil(threads as u64).max(1);
    let mut results: Vec<Result<Vec<FactorOutcome>, FactorError>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads as u64 {
            let lo = 1 + t * chunk;
            let hi = ((t + 1) * chunk).min(n);
            if lo > hi {
                break;
            }
            handles.push(scope.spawn(move || {
                (lo..=hi)
                    .map(|a| factor_once(n, a, config))
                    .collect::<Result<Vec<_>, _>>()
            }));
        }
        for h in handles {
            results.push(h.join().expect("worker panicked"));
        }
    });
    let mut outcomes = Vec::with_capacity(n as usize);
    for r in results {
        outcomes.extend(r?);
    }
    Ok(summarize_outcomes(n, &outcomes))
}

/// Thread count from `DIFFUSION_FACTOR_THREADS`, else the machine's.
pub fn configured_threads() -> usize {
    match std::env::var("DIFFUSION_FACTOR_THREADS") {
        Ok(s) => s.trim().parse().unwrap_or(1).max(1),
        Err(_) => std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1),
    }
}
