//! Order finding by diffusion: run the half-lazy walk for the proven step
//! bound and decode the order as the integer nearest `1/p_n(e)`, or stop
//! early from a candidate interval around the measured probabilities.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cayley::{build_cayley_graph, build_power_table, exponent_bound, find_repetition, CayleyGraph};
use crate::diffusion::{half_lazy_step, measure, DiffusionError, StepLedger, WalkState};
use crate::numtheory::{mod_pow_raw, Residue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderFindError {
    NotAUnit { value: u64, modulus: u64 },
    /// Returned order is even: the odd-order premise was violated by the caller.
    OrderNotOdd { order: u64 },
    /// No candidate verified; engine bug or tolerance breach.
    DecodeFailure,
    NonpositiveProbability { value: f64 },
    EmptyMeasurements,
    Engine(DiffusionError),
}

impl fmt::Display for OrderFindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderFindError::NotAUnit { value, modulus } => {
                write!(f, "{value} is not a unit modulo {modulus}")
            }
            OrderFindError::OrderNotOdd { order } => {
                write!(f, "computed order {order} is even; caller must supply odd-order elements")
            }
            OrderFindError::DecodeFailure => write!(f, "no order candidate verified"),
            OrderFindError::NonpositiveProbability { value } => {
                write!(f, "cannot decode nonpositive probability {value}")
            }
            OrderFindError::EmptyMeasurements => write!(f, "no measurements supplied"),
            OrderFindError::Engine(e) => write!(f, "diffusion engine error: {e}"),
        }
    }
}

impl From<DiffusionError> for OrderFindError {
    fn from(e: DiffusionError) -> Self {
        OrderFindError::Engine(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Walk the full proven bound, then one measurement at the start vertex.
    FullBound,
    /// Periodically measure and stop once few enough candidates remain.
    EarlyStop,
}

/// Which vertices the early-stop checkpoints measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSet {
    StartOnly,
    /// The distinct residues `b^{2^t}` for `t = 1..=M`.
    SPowers,
    All,
}

#[derive(Debug, Clone, Copy)]
pub struct OrderFindConfig {
    pub mode: Mode,
    pub check_every: u64,
    pub max_candidates: usize,
    pub measure_set: MeasureSet,
    /// Walk budget override; `None` uses [`required_steps`].
    pub steps_override: Option<u64>,
}

impl Default for OrderFindConfig {
    fn default() -> Self {
        OrderFindConfig {
            mode: Mode::FullBound,
            check_every: 25,
            max_candidates: 8,
            measure_set: MeasureSet::SPowers,
            steps_override: None,
        }
    }
}

/// Smallest `n > 4(M+1) ln N`, the proven diffusion-step bound.
pub fn required_steps(n: u64) -> u64 {
    debug_assert!(n >= 2);
    let m = exponent_bound(n);
    libm::floor(4.0 * (m as f64 + 1.0) * libm::log(n as f64)) as u64 + 1
}

/// Integer candidates nearest `1/p`, clamped to `[1, N]`; an exact half-way
/// tie yields both neighbors for verification.
pub fn decode_order(p_at_e: f64, n: u64) -> Result<Vec<u64>, OrderFindError> {
    if !(p_at_e > 0.0 && p_at_e <= 1.0) {
        return Err(OrderFindError::NonpositiveProbability { value: p_at_e });
    }
    let recip = 1.0 / p_at_e;
    let lower = libm::floor(recip);
    let frac = recip - lower;
    let clamp = |x: f64| -> u64 { (libm::fmax(1.0, libm::fmin(x, n as f64))) as u64 };
    let mut out = if frac == 0.5 {
        vec![clamp(lower), clamp(lower + 1.0)]
    } else {
        vec![clamp(libm::round(recip))]
    };
    out.dedup();
    Ok(out)
}

/// The interval `(L_m, U_m)` bracketing `1/r` after `m` steps, and the
/// integers whose reciprocals fall inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateInterval {
    pub lower: f64,
    pub upper: f64,
    pub a_m: f64,
    /// Exactly `{h : ceil(1/U_m) <= h <= floor(1/L_m)}` intersected with `[1, N]`.
    pub candidates: Vec<u64>,
}

pub fn candidate_interval(
    measurements: &[f64],
    a_m: f64,
    n: u64,
) -> Result<CandidateInterval, OrderFindError> {
    if measurements.is_empty() {
        return Err(OrderFindError::EmptyMeasurements);
    }
    let max_p = measurements.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_p = measurements.iter().copied().fold(f64::INFINITY, f64::min);
    let lower = libm::fmax(1.0 / n as f64, max_p - a_m);
    let upper = libm::fmin(1.0, min_p + a_m);
    let mut candidates = Vec::new();
    if lower <= upper && lower > 0.0 {
        let first = libm::ceil(1.0 / upper) as u64;
        let last = libm::floor(1.0 / lower) as u64;
        for h in first.max(1)..=last.min(n) {
            candidates.push(h);
        }
    }
    Ok(CandidateInterval {
        lower,
        upper,
        a_m,
        candidates,
    })
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest candidate `h` with `b^h = 1` whose minimality survives the
/// prime-divisor checks (`b^{h/p} != 1` for every prime `p | h`).
pub fn verify_candidates(b: Residue, candidates: &[u64], ledger: &mut StepLedger) -> Option<u64> {
    let n = b.modulus();
    'cand: for &h in candidates {
        if h == 0 {
            continue;
        }
        ledger.digital_ops += 2 * (64 - h.leading_zeros()) as u64;
        if mod_pow_raw(b.value(), h as u128, n) != 1 {
            continue;
        }
        for p in prime_factors(h) {
            ledger.digital_ops += 2 * (64 - h.leading_zeros()) as u64;
            if mod_pow_raw(b.value(), (h / p) as u128, n) == 1 {
                continue 'cand;
            }
        }
        return Some(h);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodePath {
    FullBoundDecode,
    EarlyStopDecode,
    /// The power table of `b` itself had a repetition; the order was read off
    /// the witness without any diffusion.
    RepetitionShortcut,
}

#[derive(Debug, Clone)]
pub struct OrderResult {
    pub order: u64,
    pub ledger: StepLedger,
    pub decode_path: DecodePath,
    pub candidates_tried: Vec<u64>,
    /// Interval from the provable error bound `(1 - 1/(2(M+1)))^m`, when an
    /// early-stop checkpoint fired.
    pub bound_interval: Option<CandidateInterval>,
    /// Interval from the raw measurement bracket `[min p, max p]`.
    pub raw_interval: Option<CandidateInterval>,
}

/// Exact order from a repetition witness: the order divides `2^{l'} q`, and
/// stripping removable prime factors pins it down.
fn order_from_witness(b: Residue, l_prime: u32, q: u64, ledger: &mut StepLedger) -> u64 {
    let n = b.modulus();
    let mut r: u128 = (1u128 << l_prime) * q as u128;
    debug_assert_eq!(mod_pow_raw(b.value(), r, n), 1);
    let mut primes = prime_factors(q);
    primes.push(2);
    for p in primes {
        while r % p as u128 == 0 {
            ledger.digital_ops += 128 - r.leading_zeros() as u64;
            if mod_pow_raw(b.value(), r / p as u128, n) == 1 {
                r /= p as u128;
            } else {
                break;
            }
        }
    }
    r as u64
}

/// Vertices the early-stop checkpoints measure, per the configured set.
fn measurement_vertices(
    b: Residue,
    graph: &CayleyGraph,
    set: MeasureSet,
) -> Vec<u32> {
    match set {
        MeasureSet::StartOnly => vec![0],
        MeasureSet::All => (0..graph.vertex_count() as u32).collect(),
        MeasureSet::SPowers => {
            let n = b.modulus();
            let mut ids = Vec::new();
            let mut x = b.value();
            for _ in 1..=graph.m() {
                x = crate::numtheory::mul_mod(x, x, n);
                let id = graph.vertex_id(x).expect("power of b is in <b>");
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            ids
        }
    }
}

/// Determines `ord_N(b)` for an element of odd order.
///
/// A repetition pre-check on `b`'s power table may shortcut the walk; else
/// the half-lazy walk runs on the Cayley graph of `<b>` until the configured
/// decode fires. The ledger counts every `W` application and measurement.
pub fn find_order(b: Residue, config: &OrderFindConfig) -> Result<OrderResult, OrderFindError> {
    let n = b.modulus();
    let table = build_power_table(b).map_err(|_| OrderFindError::NotAUnit {
        value: b.value(),
        modulus: n,
    })?;
    let mut ledger = StepLedger::default();

    if let Some(w) = find_repetition(&table) {
        let order = order_from_witness(b, w.l_prime, w.q, &mut ledger);
        if order % 2 == 0 {
            return Err(OrderFindError::OrderNotOdd { order });
        }
        return Ok(OrderResult {
            order,
            ledger,
            decode_path: DecodePath::RepetitionShortcut,
            candidates_tried: vec![order],
            bound_interval: None,
            raw_interval: None,
        });
    }

    let graph = build_cayley_graph(b).map_err(|_| OrderFindError::NotAUnit {
        value: b.value(),
        modulus: n,
    })?;
    let steps = config.steps_override.unwrap_or_else(|| required_steps(n));
    let m = graph.m();
    let lambda_bound = 1.0 - 1.0 / (2.0 * (m as f64 + 1.0));
    let mut state = WalkState::point_mass(&graph);
    let mut bound_interval = None;
    let mut raw_interval = None;

    if config.mode == Mode::EarlyStop {
        let vertices = measurement_vertices(b, &graph, config.measure_set);
        let check_every = config.check_every.max(1);
        while state.iteration() < steps {
            half_lazy_step(&mut state, &mut ledger)?;
            if state.iteration() % check_every != 0 {
                continue;
            }
            let ms: Vec<f64> = vertices
                .iter()
                .map(|&v| measure(&state, v, &mut ledger))
                .collect::<Result<_, _>>()?;
            let a_bound = libm::pow(lambda_bound, state.iteration() as f64);
            let bound = candidate_interval(&ms, a_bound, n)?;
            let spread = ms.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - ms.iter().copied().fold(f64::INFINITY, f64::min);
            let raw = candidate_interval(&ms, spread, n)?;
            // the bound-derived interval is sound; the raw bracket is a
            // heuristic whose answer is verified before acceptance
            let pick = if !bound.candidates.is_empty() && bound.candidates.len() <= config.max_candidates
            {
                Some(bound.candidates.clone())
            } else if !raw.candidates.is_empty() && raw.candidates.len() <= config.max_candidates {
                Some(raw.candidates.clone())
            } else {
                None
            };
            let fired = pick.is_some();
            if let Some(cands) = pick {
                if let Some(order) = verify_candidates(b, &cands, &mut ledger) {
                    if order % 2 == 0 {
                        return Err(OrderFindError::OrderNotOdd { order });
                    }
                    return Ok(OrderResult {
                        order,
                        ledger,
                        decode_path: DecodePath::EarlyStopDecode,
                        candidates_tried: cands,
                        bound_interval: Some(bound),
                        raw_interval: Some(raw),
                    });
                }
            }
            if fired || state.iteration() >= steps {
                bound_interval = Some(bound);
                raw_interval = Some(raw);
            }
        }
    } else {
        while state.iteration() < steps {
            half_lazy_step(&mut state, &mut ledger)?;
        }
    }

    let p_at_e = measure(&state, 0, &mut ledger)?;
    let candidates = decode_order(p_at_e, n)?;
    let order = verify_candidates(b, &candidates, &mut ledger).ok_or(OrderFindError::DecodeFailure)?;
    if order % 2 == 0 {
        return Err(OrderFindError::OrderNotOdd { order });
    }
    Ok(OrderResult {
        order,
        ledger,
        decode_path: DecodePath::FullBoundDecode,
        candidates_tried: candidates,
        bound_interval,
        raw_interval,
    })
}
