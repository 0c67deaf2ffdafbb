//! The five-step factorization pipeline: gcd shortcut, power table and
//! repetition check, square root of 1 extraction, diffusion order finding,
//! order lifting, retry driving, and exhaustive success-rate evaluation.

use alloc::vec::Vec;
use core::fmt;

use crate::cayley::{build_power_table, exponent_bound, find_repetition};
use crate::diffusion::StepLedger;
use crate::numtheory::{gcd, mod_pow_raw, mul_mod, Ratio, Residue, ScreenResult};
use crate::orderfind::{find_order, OrderFindConfig, OrderFindError};

/// Identifier of the PRNG used by [`factor_with_retries`]; recorded in every
/// trial report so transcripts are replayable.
pub const RNG_ALGORITHM: &str = "splitmix64";

/// Largest `N` the exhaustive evaluator will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorError {
    /// N failed the input screen (even, prime, prime power, or out of range).
    ScreenRejected { n: u64, screen: Option<ScreenResult> },
    /// Repetition witness did not produce an `s <= l'`; upstream bug.
    WitnessInvalid,
    /// No `k <= M` lifted the order; upstream bug.
    LiftFailure,
    TooLarge { n: u64 },
    OrderFind(OrderFindError),
}

impl fmt::Display for FactorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorError::ScreenRejected { n, screen } => {
                write!(f, "input {n} rejected by screen ({screen:?})")
            }
            FactorError::WitnessInvalid => write!(f, "repetition witness failed its guarantee"),
            FactorError::LiftFailure => write!(f, "order lifting failed"),
            FactorError::TooLarge { n } => write!(f, "{n} too large for exhaustive enumeration"),
            FactorError::OrderFind(e) => write!(f, "order finding failed: {e}"),
        }
    }
}

impl From<OrderFindError> for FactorError {
    fn from(e: OrderFindError) -> Self {
        FactorError::OrderFind(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoAnswerReason {
    /// The repetition gave `s = 0` (the odd part already kills `a`).
    SZero,
    /// Both `gcd(x-1, N)` and `gcd(x+1, N)` were trivial.
    TrivialGcd,
    /// The lifted order `r_a` was odd at Step 5.
    OrderOddAtStep5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Step1Gcd,
    Step3Repetition,
    Step5Order,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Found { divisor: u64, cofactor: u64 },
    NoAnswer { reason: NoAnswerReason },
}

/// Result of one pipeline run for a fixed `a`.
#[derive(Debug, Clone)]
pub struct FactorOutcome {
    pub status: Status,
    pub path: Path,
    pub ledger: StepLedger,
    pub chosen_a: u64,
}

impl FactorOutcome {
    pub fn divisor(&self) -> Option<(u64, u64)> {
        match self.status {
            Status::Found { divisor, cofactor } => Some((divisor, cofactor)),
            Status::NoAnswer { .. } => None,
        }
    }
}

/// Smallest `s >= 0` with `a^{2^s q} = 1`, given the witness guarantee that
/// some `s <= l'` works. Computes `a^q` once, then squares.
pub fn compute_s(a: Residue, q: u64, l_prime: u32, ledger: &mut StepLedger) -> Result<u32, FactorError> {
    let n = a.modulus();
    let mut x = mod_pow_raw(a.value(), q as u128, n);
    ledger.digital_ops += 2 * (64 - q.leading_zeros()) as u64;
    let mut s = 0u32;
    while x != 1 {
        if s > l_prime {
            return Err(FactorError::WitnessInvalid);
        }
        x = mul_mod(x, x, n);
        ledger.digital_ops += 1;
        s += 1;
    }
    Ok(s)
}

/// Sets `x = a^{2^{s-1} q}` (a square root of 1) and extracts a divisor from
/// `gcd(x-1, N)`, falling back to `gcd(x+1, N)`.
pub fn square_root_factor(a: Residue, s: u32, q: u64, ledger: &mut StepLedger) -> Status {
    debug_assert!(s >= 1);
    let n = a.modulus();
    let x = mod_pow_raw(a.value(), (1u128 << (s - 1)) * q as u128, n);
    ledger.digital_ops += (s as u64) + 2 * (64 - q.leading_zeros()) as u64;
    debug_assert_eq!(mul_mod(x, x, n), 1, "x must be a square root of 1");
    debug_assert_ne!(x, 1, "x = 1 contradicts minimality of s");
    for d in [gcd(x - 1, n), gcd(x + 1, n)] {
        ledger.digital_ops += 64 - n.leading_zeros() as u64;
        if d > 1 && d < n {
            return Status::Found {
                divisor: d,
                cofactor: n / d,
            };
        }
    }
    Status::NoAnswer {
        reason: NoAnswerReason::TrivialGcd,
    }
}

/// Lifts the odd order `r_b` of `b = a^{2^M}` to the order of `a` itself:
/// `r_a = 2^k r_b` with `k` minimal, found by at most `M+1` squarings.
pub fn lift_order(
    a: Residue,
    r_b: u64,
    m: u32,
    ledger: &mut StepLedger,
) -> Result<(u32, u64), FactorError> {
    let n = a.modulus();
    let mut x = mod_pow_raw(a.value(), r_b as u128, n);
    ledger.digital_ops += 2 * (64 - r_b.leading_zeros()) as u64;
    let mut k = 0u32;
    while x != 1 {
        if k >= m + 1 {
            return Err(FactorError::LiftFailure);
        }
        x = mul_mod(x, x, n);
        ledger.digital_ops += 1;
        k += 1;
    }
    Ok((k, (1u64 << k) * r_b))
}

/// One run of the five-step algorithm for a fixed `a in [1, N]`.
pub fn factor_once(n: u64, a: u64, config: &OrderFindConfig) -> Result<FactorOutcome, FactorError> {
    match crate::numtheory::screen_input(n) {
        Ok(ScreenResult::CompositeNonPrimePower) => {}
        Ok(screen) => {
            return Err(FactorError::ScreenRejected {
                n,
                screen: Some(screen),
            })
        }
        Err(_) => return Err(FactorError::ScreenRejected { n, screen: None }),
    }
    let a = a.clamp(1, n);
    let mut ledger = StepLedger::default();

    // Step 1: gcd shortcut.
    ledger.digital_ops += 64 - n.leading_zeros() as u64;
    let d = if a == n { n } else { gcd(a, n) };
    if d > 1 {
        let status = if d < n {
            Status::Found {
                divisor: d,
                cofactor: n / d,
            }
        } else {
            // a = N: the draw hit zero mod N; no information
            Status::NoAnswer {
                reason: NoAnswerReason::TrivialGcd,
            }
        };
        return Ok(FactorOutcome {
            status,
            path: Path::Step1Gcd,
            ledger,
            chosen_a: a,
        });
    }

    // Step 2: the S-set.
    let a_res = Residue::new(a, n).expect("unit after gcd check");
    let table = build_power_table(a_res).expect("unit after gcd check");
    let m = table.m();
    ledger.digital_ops += 2 * m as u64;

    // Step 3: repetitions.
    if let Some(w) = find_repetition(&table) {
        let s = compute_s(a_res, w.q, w.l_prime, &mut ledger)?;
        let status = if s > 0 {
            square_root_factor(a_res, s, w.q, &mut ledger)
        } else {
            Status::NoAnswer {
                reason: NoAnswerReason::SZero,
            }
        };
        return Ok(FactorOutcome {
            status,
            path: Path::Step3Repetition,
            ledger,
            chosen_a: a,
        });
    }

    // Step 4: diffusion order finding on b = a^{2^M}.
    let b = Residue::new(table.plus_powers()[m as usize], n).unwrap();
    let order_result = find_order(b, config)?;
    ledger.absorb(&order_result.ledger);

    // Step 5: lift and extract.
    let (_k, r_a) = lift_order(a_res, order_result.order, m, &mut ledger)?;
    let status = if r_a % 2 == 0 {
        let split = crate::numtheory::two_adic_split(r_a);
        square_root_factor(a_res, split.power, split.odd_part, &mut ledger)
    } else {
        Status::NoAnswer {
            reason: NoAnswerReason::OrderOddAtStep5,
        }
    };
    Ok(FactorOutcome {
        status,
        path: Path::Step5Order,
        ledger,
        chosen_a: a,
    })
}

/// Seedable deterministic PRNG (splitmix64); good enough for uniform draws
/// and fully reproducible.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform draw from `{1, ..., n}` by rejection.
    pub fn uniform_1_to_n(&mut self, n: u64) -> u64 {
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return 1 + x % n;
            }
        }
    }
}

/// Transcript of repeated pipeline runs with randomly drawn `a`.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub attempts: u64,
    pub outcomes: Vec<FactorOutcome>,
    pub success: Option<(u64, u64)>,
    /// Fraction of completed trials that returned no answer.
    pub empirical_failure_rate: Ratio,
    pub seed: u64,
    pub rng_algorithm: &'static str,
}

/// Draws `a` uniformly from `{1..N}` with a seeded PRNG and runs the pipeline
/// until the first divisor or until `attempts` trials are exhausted.
pub fn factor_with_retries(
    n: u64,
    attempts: u64,
    seed: u64,
    config: &OrderFindConfig,
) -> Result<TrialReport, FactorError> {
    let mut rng = SplitMix64::new(seed);
    let mut outcomes = Vec::new();
    let mut success = None;
    for _ in 0..attempts {
        let a = rng.uniform_1_to_n(n);
        let outcome = factor_once(n, a, config)?;
        let found = outcome.divisor();
        outcomes.push(outcome);
        if let Some(pair) = found {
            success = Some(pair);
            break;
        }
    }
    let failures = outcomes.iter().filter(|o| o.divisor().is_none()).count() as u64;
    let tried = outcomes.len().max(1) as u64;
    Ok(TrialReport {
        attempts,
        outcomes,
        success,
        empirical_failure_rate: Ratio::new(failures, tried),
        seed,
        rng_algorithm: RNG_ALGORITHM,
    })
}

/// Per-path, per-reason outcome counts over an exhaustive sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutcomeHistogram {
    pub found_step1: u64,
    pub found_step3: u64,
    pub found_step5: u64,
    pub no_answer_step1: u64,
    pub s_zero: u64,
    pub trivial_gcd_step3: u64,
    pub trivial_gcd_step5: u64,
    pub order_odd_at_step5: u64,
}

impl OutcomeHistogram {
    pub fn record(&mut self, outcome: &FactorOutcome) {
        match (outcome.path, outcome.status) {
            (Path::Step1Gcd, Status::Found { .. }) => self.found_step1 += 1,
            (Path::Step3Repetition, Status::Found { .. }) => self.found_step3 += 1,
            (Path::Step5Order, Status::Found { .. }) => self.found_step5 += 1,
            (Path::Step1Gcd, Status::NoAnswer { .. }) => self.no_answer_step1 += 1,
            (Path::Step3Repetition, Status::NoAnswer { reason }) => match reason {
                NoAnswerReason::SZero => self.s_zero += 1,
                _ => self.trivial_gcd_step3 += 1,
            },
            (Path::Step5Order, Status::NoAnswer { reason }) => match reason {
                NoAnswerReason::OrderOddAtStep5 => self.order_odd_at_step5 += 1,
                _ => self.trivial_gcd_step5 += 1,
            },
        }
    }
}

/// Success rates of the pipeline over every `a in {1..N}`.
#[derive(Debug, Clone)]
pub struct SuccessRateReport {
    pub n: u64,
    pub rate_over_units: Ratio,
    pub rate_over_all: Ratio,
    pub unit_count: u64,
    pub histogram: OutcomeHistogram,
}

/// Aggregates per-`a` outcomes (ordered reduction; callers may compute the
/// outcomes in parallel).
pub fn summarize_outcomes(n: u64, outcomes: &[FactorOutcome]) -> SuccessRateReport {
    let mut histogram = OutcomeHistogram::default();
    let mut found_units = 0u64;
    let mut found_all = 0u64;
    let mut units = 0u64;
    for outcome in outcomes {
        histogram.record(outcome);
        let found = outcome.divisor().is_some();
        if gcd(outcome.chosen_a, n) == 1 {
            units += 1;
            found_units += found as u64;
        }
        found_all += found as u64;
    }
    SuccessRateReport {
        n,
        rate_over_units: Ratio::new(found_units, units.max(1)),
        rate_over_all: Ratio::new(found_all, (outcomes.len() as u64).max(1)),
        unit_count: units,
        histogram,
    }
}

/// Runs the pipeline for every `a in {1..N}` and reports the Found fraction
/// over units and over all draws. The sampling ambiguity between Z_N and
/// Z_N^* is resolved by reporting both denominators.
pub fn exhaustive_success_rate(
    n: u64,
    config: &OrderFindConfig,
) -> Result<SuccessRateReport, FactorError> {
    if n > EXHAUSTIVE_LIMIT {
        return Err(FactorError::TooLarge { n });
    }
    let mut outcomes = Vec::with_capacity(n as usize);
    for a in 1..=n {
        outcomes.push(factor_once(n, a, config)?);
    }
    Ok(summarize_outcomes(n, &outcomes))
}

/// Searches for a relation `a^k = a^l` among positive exponents expressible
/// as a sum of at most `max_weight` signed powers of two (the higher
/// repetitions that would surface at later diffusion steps).
///
/// Returns the pair minimizing `max(k, l)`, as `(k, l)` with `k < l`.
pub fn higher_repetition_scan(a: Residue, max_weight: u32) -> Option<(u64, u64)> {
    let n = a.modulus();
    let m = exponent_bound(n);
    // enumerate signed-digit sums over exponents 0..=M
    let mut values: Vec<i128> = alloc::vec![0];
    for _ in 0..max_weight {
        let mut next = values.clone();
        for &v in &values {
            for t in 0..=m {
                next.push(v + (1i128 << t));
                next.push(v - (1i128 << t));
            }
        }
        next.sort_unstable();
        next.dedup();
        values = next;
    }
    let mut exponents: Vec<u64> = values
        .into_iter()
        .filter(|&v| v > 0)
        .map(|v| v as u64)
        .collect();
    exponents.sort_unstable();
    let mut seen: alloc::collections::BTreeMap<u64, u64> = alloc::collections::BTreeMap::new();
    for &e in &exponents {
        let val = mod_pow_raw(a.value(), e as u128, n);
        if let Some(&first) = seen.get(&val) {
            return Some((first, e));
        }
        seen.insert(val, e);
    }
    None
}
