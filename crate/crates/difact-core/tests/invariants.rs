//! Property-based and sweep invariants for the walk, the decoder, and the
//! factorization pipeline.

use difact_core::cayley::{additive_model, build_power_table, exponent_bound, find_repetition};
use difact_core::diffusion::{run_walk, spectral_data, verify_korobov_bound, StepLedger};
use difact_core::factor::{factor_once, FactorError};
use difact_core::numtheory::{
    gcd, mod_pow_raw, order_bruteforce, p_success, screen_input, Residue, ScreenResult,
};
use difact_core::orderfind::{decode_order, find_order, Mode, OrderFindConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn walk_stays_a_distribution(r in (1u64..150).prop_map(|x| 2 * x + 1), steps in 1u64..60) {
        let m = exponent_bound(r);
        let g = additive_model(r, m);
        let mut ledger = StepLedger::default();
        let state = run_walk(&g, steps, &mut ledger).unwrap();
        let sum: f64 = state.probabilities().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(state.probabilities().iter().all(|&p| p >= 0.0));
        prop_assert_eq!(ledger.matrix_applications, steps);
    }

    #[test]
    fn mixing_bound_holds(r in (1u64..100).prop_map(|x| 2 * x + 1), steps in 1u64..80) {
        let m = exponent_bound(r);
        let g = additive_model(r, m);
        let mut ledger = StepLedger::default();
        let state = run_walk(&g, steps, &mut ledger).unwrap();
        let lambda_star = spectral_data(r, m).lambda_star;
        let bound = lambda_star.powi(steps as i32) + 1e-12;
        let uniform = 1.0 / r as f64;
        for &p in state.probabilities() {
            prop_assert!((p - uniform).abs() <= bound, "r={} n={}", r, steps);
        }
    }

    #[test]
    fn repetition_witness_is_sound(a in 2u64..5000, n in 2u64..5000) {
        prop_assume!(a < n && gcd(a, n) == 1 && n % 2 == 1);
        let table = build_power_table(Residue::new(a, n).unwrap()).unwrap();
        if let Some(w) = find_repetition(&table) {
            prop_assert!(w.l_prime < w.l);
            prop_assert_eq!(w.q % 2, 1);
            let lhs = mod_pow_raw(a, 1u128 << w.l, n);
            let rhs = if w.sign > 0 {
                mod_pow_raw(a, 1u128 << w.l_prime, n)
            } else {
                let inv = Residue::new(a, n).unwrap().inverse().unwrap().value();
                mod_pow_raw(inv, 1u128 << w.l_prime, n)
            };
            prop_assert_eq!(lhs, rhs);
            // q is exactly the exponent gap
            prop_assert_eq!(mod_pow_raw(a, (1u128 << w.l_prime) * w.q as u128, n), 1);
        } else {
            // all 2(M+1) residues pairwise distinct
            let mut all: Vec<u64> = table
                .plus_powers()
                .iter()
                .chain(table.minus_powers())
                .copied()
                .collect();
            let len = all.len();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), len);
        }
    }

    #[test]
    fn decode_inverts_exact_reciprocals(n in 2u64..4000, r in 1u64..4000) {
        prop_assume!(r <= n);
        let decoded = decode_order(1.0 / r as f64, n).unwrap();
        prop_assert!(decoded.contains(&r));
    }
}

#[test]
fn korobov_bound_sweep() {
    for r in (3u64..=501).step_by(2) {
        let m = exponent_bound(r);
        let (ratio, ok) = verify_korobov_bound(r, m).unwrap();
        assert!(ok, "r={r}: ratio {ratio}");
        assert!(ratio < 1.0 - 1.0 / (m as f64 + 1.0));
    }
}

#[test]
fn find_order_matches_bruteforce_both_modes() {
    let full = OrderFindConfig {
        mode: Mode::FullBound,
        ..OrderFindConfig::default()
    };
    let early = OrderFindConfig {
        mode: Mode::EarlyStop,
        ..OrderFindConfig::default()
    };
    for n in [33u64, 35, 105, 143] {
        let m = exponent_bound(n);
        for a in 1..n {
            if gcd(a, n) != 1 {
                continue;
            }
            let b = Residue::new(mod_pow_raw(a, 1u128 << m, n), n).unwrap();
            let expected = order_bruteforce(b).unwrap();
            assert_eq!(expected % 2, 1, "b = a^(2^M) always has odd order");
            for cfg in [&full, &early] {
                let result = find_order(b, cfg).unwrap();
                assert_eq!(result.order, expected, "n={n} a={a}");
            }
        }
    }
}

#[test]
fn pipeline_success_rate_meets_bound() {
    // N = p q with distinct odd primes: failure rate over units <= (m+1)/2^m
    for (n, m_factors) in [(33u64, 2u32), (35, 2), (105, 3), (143, 2)] {
        let mut units = 0u64;
        let mut found = 0u64;
        for a in 1..n {
            if gcd(a, n) != 1 {
                continue;
            }
            units += 1;
            let out = factor_once(n, a, &OrderFindConfig::default()).unwrap();
            if let Some((d, c)) = out.divisor() {
                assert_eq!(d * c, n);
                assert!(d > 1 && d < n);
                found += 1;
            }
        }
        let bound = p_success(m_factors);
        assert!(
            found * bound.denom() >= bound.numer() * units,
            "n={n}: {found}/{units} below {bound}"
        );
    }
}

#[test]
fn screen_agrees_with_pipeline_preconditions() {
    for n in 2u64..600 {
        let screen = screen_input(n).unwrap();
        let result = factor_once(n, 2, &OrderFindConfig::default());
        match screen {
            ScreenResult::CompositeNonPrimePower => assert!(result.is_ok(), "n={n}"),
            _ => assert!(
                matches!(result, Err(FactorError::ScreenRejected { .. })),
                "n={n}"
            ),
        }
    }
}
