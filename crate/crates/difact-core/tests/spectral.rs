//! Cross-checks the closed-form spectral machinery against a dense symmetric
//! eigensolver and against the walk engine itself.

use difact_core::cayley::{additive_model, build_cayley_graph, exponent_bound, CayleyGraph};
use difact_core::diffusion::{
    run_walk, spectral_data, spectral_walk_oracle, StepLedger, WalkState,
};
use difact_core::numtheory::Residue;
use nalgebra::DMatrix;

fn dense_walk_matrix(g: &CayleyGraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let d = g.degree() as f64;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for v in 0..n {
        w[(v, v)] += 0.5;
        for &(u, weight) in g.neighbors(v as u32) {
            w[(u as usize, v)] += 0.5 * weight as f64 / d;
        }
    }
    w
}

#[test]
fn eigenvalues_match_dense_solver() {
    for r in [3u64, 5, 7, 15, 33, 57, 99, 161, 199] {
        let m = exponent_bound(r);
        let g = additive_model(r, m);
        let w = dense_walk_matrix(&g);
        let mut dense: Vec<f64> = w.symmetric_eigen().eigenvalues.iter().copied().collect();
        dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut closed = spectral_data(r, m).lambda.clone();
        closed.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(dense.len(), closed.len());
        for (a, b) in dense.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-8, "r={r}: {a} vs {b}");
        }
    }
}

#[test]
fn walk_matches_spectral_oracle_additive() {
    for (r, steps) in [(5u64, 20u64), (33, 50), (161, 347)] {
        let m = exponent_bound(r);
        let g = additive_model(r, m);
        let mut ledger = StepLedger::default();
        let state = run_walk(&g, steps, &mut ledger).unwrap();
        for k in 0..r {
            let id = g.vertex_id(k).unwrap() as usize;
            let oracle = spectral_walk_oracle(r, m, steps, k);
            assert!(
                (state.probabilities()[id] - oracle).abs() < 1e-12,
                "r={r} k={k}"
            );
        }
    }
}

#[test]
fn walk_matches_spectral_oracle_multiplicative() {
    // b = 944 mod 1363 has order 161 with M = 11; the graph is isomorphic to
    // the additive model under b^k <-> k
    let b = Residue::new(944, 1363).unwrap();
    let g = build_cayley_graph(b).unwrap();
    assert_eq!(g.vertex_count(), 161);
    let mut ledger = StepLedger::default();
    let state = run_walk(&g, 347, &mut ledger).unwrap();
    let mut x = 1u64;
    for k in 0..161u64 {
        let id = g.vertex_id(x).unwrap() as usize;
        let oracle = spectral_walk_oracle(161, 11, 347, k);
        assert!((state.probabilities()[id] - oracle).abs() < 1e-12, "k={k}");
        x = (x as u128 * 944 % 1363) as u64;
    }
    assert_eq!(ledger.matrix_applications, 347);
}

#[test]
fn dense_power_matches_engine() {
    let r = 33u64;
    let m = exponent_bound(r);
    let g = additive_model(r, m);
    let w = dense_walk_matrix(&g);
    let mut vec = DMatrix::<f64>::zeros(r as usize, 1);
    vec[(g.vertex_id(0).unwrap() as usize, 0)] = 1.0;
    let mut state = WalkState::point_mass(&g);
    let mut ledger = StepLedger::default();
    for _ in 0..40 {
        vec = &w * vec;
        difact_core::diffusion::half_lazy_step(&mut state, &mut ledger).unwrap();
    }
    for v in 0..r as usize {
        assert!((state.probabilities()[v] - vec[(v, 0)]).abs() < 1e-12);
    }
}
