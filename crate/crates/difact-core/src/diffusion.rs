//! The diffusion engine: the half-lazy walk operator `W = (I + A/d)/2`, the
//! diffusion-step ledger, and exact spectral oracles for the additive model.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::cayley::CayleyGraph;

/// Entries of a probability vector may dip this far below zero from roundoff;
/// anything lower is an engine bug.
pub const NEGATIVE_CLAMP: f64 = -1e-15;

/// Tolerance for grouping equal eigenvalues in [`fourier_coefficients`].
pub const EIGENVALUE_GROUP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionError {
    UnknownVertex { vertex: u32 },
    /// Probability mass fell below the roundoff clamp.
    NegativeMass { vertex: u32, value: f64 },
    /// `M` too small relative to `r` for the eigenvalue-bound derivation.
    PreconditionViolated { r: u64, m: u32 },
}

impl fmt::Display for DiffusionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusionError::UnknownVertex { vertex } => write!(f, "unknown vertex {vertex}"),
            DiffusionError::NegativeMass { vertex, value } => {
                write!(f, "probability {value} at vertex {vertex} below roundoff clamp")
            }
            DiffusionError::PreconditionViolated { r, m } => {
                write!(f, "M = {m} too small for r = {r}")
            }
        }
    }
}

/// Diffusion and digital step counts (W applications and measurements are the
/// diffusion steps; modular multiplications and gcd iterations the digital).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepLedger {
    pub matrix_applications: u64,
    pub measurements: u64,
    pub digital_ops: u64,
}

impl StepLedger {
    pub fn diffusion_steps(&self) -> u64 {
        self.matrix_applications + self.measurements
    }

    pub fn absorb(&mut self, other: &StepLedger) {
        self.matrix_applications += other.matrix_applications;
        self.measurements += other.measurements;
        self.digital_ops += other.digital_ops;
    }
}

/// Probability vector over the graph's vertices after `iteration` steps.
#[derive(Debug, Clone)]
pub struct WalkState<'g> {
    graph: &'g CayleyGraph,
    probabilities: Vec<f64>,
    iteration: u64,
}

impl<'g> WalkState<'g> {
    /// Point mass at vertex 0 (the group identity).
    pub fn point_mass(graph: &'g CayleyGraph) -> Self {
        let mut probabilities = vec![0.0; graph.vertex_count()];
        probabilities[0] = 1.0;
        WalkState {
            graph,
            probabilities,
            iteration: 0,
        }
    }

    pub fn graph(&self) -> &'g CayleyGraph {
        self.graph
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }
}

/// One application of `W`: `p'(x) = p(x)/2 + sum_y w(x,y)/(2d) p(y)`.
///
/// Conserves mass; entries in `[NEGATIVE_CLAMP, 0)` are clamped to 0.
pub fn half_lazy_step(state: &mut WalkState<'_>, ledger: &mut StepLedger) -> Result<(), DiffusionError> {
    let graph = state.graph;
    let half_over_d = 0.5 / graph.degree() as f64;
    let mut next = vec![0.0f64; state.probabilities.len()];
    for (x, &px) in state.probabilities.iter().enumerate() {
        next[x] += 0.5 * px;
        let scaled = half_over_d * px;
        // weights are symmetric, so scattering along x's own neighbor list
        // is the same as gathering into x
        for &(y, w) in graph.neighbors(x as u32) {
            next[y as usize] += w as f64 * scaled;
        }
    }
    for (x, p) in next.iter_mut().enumerate() {
        if *p < 0.0 {
            if *p < NEGATIVE_CLAMP {
                return Err(DiffusionError::NegativeMass {
                    vertex: x as u32,
                    value: *p,
                });
            }
            *p = 0.0;
        }
    }
    state.probabilities = next;
    state.iteration += 1;
    ledger.matrix_applications += 1;
    Ok(())
}

/// Runs `n` half-lazy steps from the point mass at vertex 0.
pub fn run_walk<'g>(
    graph: &'g CayleyGraph,
    n: u64,
    ledger: &mut StepLedger,
) -> Result<WalkState<'g>, DiffusionError> {
    let mut state = WalkState::point_mass(graph);
    for _ in 0..n {
        half_lazy_step(&mut state, ledger)?;
    }
    Ok(state)
}

/// Inspects one vertex; counted as one diffusion step.
pub fn measure(
    state: &WalkState<'_>,
    vertex: u32,
    ledger: &mut StepLedger,
) -> Result<f64, DiffusionError> {
    let p = state
        .probabilities
        .get(vertex as usize)
        .copied()
        .ok_or(DiffusionError::UnknownVertex { vertex })?;
    ledger.measurements += 1;
    Ok(p)
}

/// Eigenvalues of the additive model `X_{r,S}`: adjacency eigenvalues
/// `eta_k = sum_j e^{2πik2^j/r} + e^{-2πik2^j/r}` and the walk eigenvalues
/// `lambda_k = (1 + eta_k/(2(M+1)))/2`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub r: u64,
    pub m: u32,
    pub eta: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Largest `lambda_k < 1` (0 when r = 1).
    pub lambda_star: f64,
}

fn character_sum(r: u64, k: u64, m: u32) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = 1u64 % r;
    for _ in 0..=m {
        let theta = core::f64::consts::TAU * (k as f64) * (pow as f64) / (r as f64);
        sum += Complex64::new(libm::cos(theta), libm::sin(theta));
        sum += Complex64::new(libm::cos(theta), -libm::sin(theta));
        pow = (pow * 2) % r;
    }
    sum
}

pub fn spectral_data(r: u64, m: u32) -> SpectralData {
    debug_assert!(r >= 1 && r % 2 == 1);
    let degree = 2.0 * (m as f64 + 1.0);
    let mut eta = Vec::with_capacity(r as usize);
    let mut lambda = Vec::with_capacity(r as usize);
    for k in 0..r {
        let s = character_sum(r, k, m);
        debug_assert!(libm::fabs(s.im) < 1e-10, "conjugate symmetry");
        eta.push(s.re);
        lambda.push(0.5 * (1.0 + s.re / degree));
    }
    let lambda_star = lambda
        .iter()
        .skip(1)
        .copied()
        .fold(0.0f64, |a, b| if b > a { b } else { a });
    SpectralData {
        r,
        m,
        eta,
        lambda,
        lambda_star,
    }
}

/// Exact spectral evaluation of `p_n(x)` for the point-mass start on the
/// additive model: `p_n(x) = (1/r) sum_k lambda_k^n cos(2πkx/r)`.
///
/// Cross-check only; independent of the walk engine.
pub fn spectral_walk_oracle(r: u64, m: u32, n: u64, vertex: u64) -> f64 {
    let data = spectral_data(r, m);
    let mut acc = 0.0f64;
    for (k, &lam) in data.lambda.iter().enumerate() {
        let theta = core::f64::consts::TAU * (k as f64) * (vertex as f64) / (r as f64);
        acc += libm::pow(lam, n as f64) * libm::cos(theta);
    }
    acc / r as f64
}

/// Evaluates `max_{k>=1} |eta_k| / (2(M+1))` and whether it is below
/// `1 - 1/(M+1)`, the exponential-sum bound the step count rests on.
pub fn verify_korobov_bound(r: u64, m: u32) -> Result<(f64, bool), DiffusionError> {
    if r < 3 || r % 2 == 0 {
        return Err(DiffusionError::PreconditionViolated { r, m });
    }
    let log2_r = 63 - r.leading_zeros();
    if m < log2_r + 1 {
        return Err(DiffusionError::PreconditionViolated { r, m });
    }
    let data = spectral_data(r, m);
    let max_eta = data
        .eta
        .iter()
        .skip(1)
        .fold(0.0f64, |a, &b| if libm::fabs(b) > a { libm::fabs(b) } else { a });
    let ratio = max_eta / (2.0 * (m as f64 + 1.0));
    Ok((ratio, ratio < 1.0 - 1.0 / (m as f64 + 1.0)))
}

/// Projections of a real function on `C_r` onto the eigenspaces of `W`,
/// grouped by eigenvalue and computed directly from character sums.
///
/// Returns `(lambda_i, h_i)` pairs with the `h_i` summing back to `f`.
pub fn fourier_coefficients(f: &[f64], r: u64, m: u32) -> Vec<(f64, Vec<f64>)> {
    debug_assert_eq!(f.len() as u64, r);
    let data = spectral_data(r, m);
    // coefficient of chi_k: <chi_k, f>_G = (1/r) sum_x conj(chi_k(x)) f(x)
    let mut coeffs = Vec::with_capacity(r as usize);
    for k in 0..r {
        let mut c = Complex64::new(0.0, 0.0);
        for (x, &fx) in f.iter().enumerate() {
            let theta = core::f64::consts::TAU * (k as f64) * (x as f64) / (r as f64);
            c += Complex64::new(libm::cos(theta), -libm::sin(theta)) * fx;
        }
        coeffs.push(c / r as f64);
    }
    // group characters by eigenvalue
    let mut order: Vec<usize> = (0..r as usize).collect();
    order.sort_by(|&a, &b| data.lambda[b].total_cmp(&data.lambda[a]));
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for &k in &order {
        let lam = data.lambda[k];
        if out
            .last()
            .map_or(true, |(l, _)| libm::fabs(l - lam) > EIGENVALUE_GROUP_TOL)
        {
            out.push((lam, vec![0.0; r as usize]));
        }
        let h = &mut out.last_mut().unwrap().1;
        for (x, hx) in h.iter_mut().enumerate() {
            let theta = core::f64::consts::TAU * (k as f64) * (x as f64) / (r as f64);
            let chi = Complex64::new(libm::cos(theta), libm::sin(theta));
            *hx += (coeffs[k] * chi).re;
        }
    }
    out
}
