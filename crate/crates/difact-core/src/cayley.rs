//! The S-set of `a^{±2^t}` powers, repetition detection, the weight function
//! alpha, and construction of the weighted Cayley graph the walk runs on.
//!
//! The graph is built without any knowledge of the order of the base element:
//! vertices are discovered by closure from the identity under the distinct
//! generators.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::numtheory::{mul_mod, NumTheoryError, Residue};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CayleyError {
    NotAUnit { value: u64, modulus: u64 },
}

impl fmt::Display for CayleyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CayleyError::NotAUnit { value, modulus } => {
                write!(f, "{value} is not a unit modulo {modulus}")
            }
        }
    }
}

impl From<CayleyError> for NumTheoryError {
    fn from(e: CayleyError) -> Self {
        match e {
            CayleyError::NotAUnit { value, modulus } => NumTheoryError::NotAUnit { value, modulus },
        }
    }
}

/// `M = floor(log2 N) + 1`, the exponent bound used throughout.
pub fn exponent_bound(n: u64) -> u32 {
    debug_assert!(n >= 2);
    (63 - n.leading_zeros()) + 1
}

/// The residues `a^{+2^t}` and `a^{-2^t}` for `t = 0..=M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerTable {
    base: Residue,
    m: u32,
    plus: Vec<u64>,
    minus: Vec<u64>,
}

impl PowerTable {
    pub fn base(&self) -> Residue {
        self.base
    }

    /// The exponent bound `M`.
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn plus_powers(&self) -> &[u64] {
        &self.plus
    }

    pub fn minus_powers(&self) -> &[u64] {
        &self.minus
    }
}

/// Computes the power table by `M` squarings per direction; the inverse is
/// found once by the extended Euclidean algorithm.
pub fn build_power_table(a: Residue) -> Result<PowerTable, CayleyError> {
    let n = a.modulus();
    let inv = a.inverse().map_err(|_| CayleyError::NotAUnit {
        value: a.value(),
        modulus: n,
    })?;
    let m = exponent_bound(n);
    let mut plus = Vec::with_capacity(m as usize + 1);
    let mut minus = Vec::with_capacity(m as usize + 1);
    plus.push(a.value());
    minus.push(inv.value());
    for t in 0..m as usize {
        plus.push(mul_mod(plus[t], plus[t], n));
        minus.push(mul_mod(minus[t], minus[t], n));
    }
    Ok(PowerTable { base: a, m, plus, minus })
}

/// A coincidence `a^{2^l} = a^{±2^{l'}}` with `l > l'`, yielding an odd `q`
/// with `a^{2^{l'} q} = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepetitionWitness {
    pub l: u32,
    pub l_prime: u32,
    /// `+1` for a hit against `a^{+2^{l'}}`, `-1` against `a^{-2^{l'}}`.
    pub sign: i8,
    /// `2^{l-l'} - 1` (plus-hit) or `2^{l-l'} + 1` (minus-hit); always odd.
    pub q: u64,
}

/// Scans the power table for a repetition.
///
/// Plus-hits are preferred over minus-hits; within a sign class the pair
/// minimizing `l + l'` (then `l`) wins. Returns `None` when all `2(M+1)`
/// residues are pairwise distinct.
pub fn find_repetition(table: &PowerTable) -> Option<RepetitionWitness> {
    let m = table.m as usize;
    let scan = |other: &[u64], sign: i8| -> Option<RepetitionWitness> {
        let mut best: Option<(u32, u32)> = None;
        for l in 1..=m {
            for l_prime in 0..l {
                if table.plus[l] == other[l_prime] {
                    let cand = (l as u32 + l_prime as u32, l as u32);
                    if best.map_or(true, |(s, bl)| cand < (s, bl)) {
                        best = Some(cand);
                    }
                }
            }
        }
        best.map(|(sum, l)| {
            let l_prime = sum - l;
            let pow = 1u64 << (l - l_prime);
            RepetitionWitness {
                l,
                l_prime,
                sign,
                q: if sign > 0 { pow - 1 } else { pow + 1 },
            }
        })
    };
    scan(&table.plus, 1).or_else(|| scan(&table.minus, -1))
}

/// The weight `alpha(s)` of each distinct generator: the number of entries of
/// the plus and minus lists equal to `s` (multiset multiplicity). The weights
/// always sum to `2(M+1)`.
pub fn weight_alpha(table: &PowerTable) -> BTreeMap<u64, u32> {
    let mut alpha = BTreeMap::new();
    for &s in table.plus.iter().chain(&table.minus) {
        *alpha.entry(s).or_insert(0) += 1;
    }
    alpha
}

/// A weighted Cayley graph on a cyclic group, regular of degree `2(M+1)`.
///
/// Vertex 0 is always the group identity (the walk's start). Immutable once
/// built; freely shared across concurrent walks.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    vertices: Vec<u64>,
    index: BTreeMap<u64, u32>,
    /// Per-vertex `(neighbor id, weight)` pairs; weights sum to `degree`.
    neighbors: Vec<Vec<(u32, u32)>>,
    degree: u32,
    generator_weights: Vec<(u64, u32)>,
    m: u32,
}

impl CayleyGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Group element labelling vertex `id`.
    pub fn vertex_label(&self, id: u32) -> u64 {
        self.vertices[id as usize]
    }

    pub fn vertex_id(&self, label: u64) -> Option<u32> {
        self.index.get(&label).copied()
    }

    pub fn neighbors(&self, id: u32) -> &[(u32, u32)] {
        &self.neighbors[id as usize]
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn generator_weights(&self) -> &[(u64, u32)] {
        &self.generator_weights
    }

    /// The exponent bound `M` the generator set was built with.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Closure build from `identity` under `generators`, applying `step`.
    fn build<F: Fn(u64, u64) -> u64>(
        identity: u64,
        generators: &[(u64, u32)],
        m: u32,
        step: F,
    ) -> CayleyGraph {
        let degree: u32 = generators.iter().map(|&(_, w)| w).sum();
        let mut vertices = Vec::new();
        let mut index = BTreeMap::new();
        vertices.push(identity);
        index.insert(identity, 0u32);
        let mut frontier = 0usize;
        while frontier < vertices.len() {
            let x = vertices[frontier];
            for &(s, _) in generators {
                let y = step(x, s);
                if !index.contains_key(&y) {
                    index.insert(y, vertices.len() as u32);
                    vertices.push(y);
                }
            }
            frontier += 1;
        }
        let neighbors = vertices
            .iter()
            .map(|&x| {
                generators
                    .iter()
                    .map(|&(s, w)| (index[&step(x, s)], w))
                    .collect()
            })
            .collect();
        CayleyGraph {
            vertices,
            index,
            neighbors,
            degree,
            generator_weights: generators.to_vec(),
            m,
        }
    }
}

/// Builds the walk graph for `b`: vertices are the subgroup generated by `b`
/// (discovered, not presumed), edges weighted by `alpha`. The vertex count
/// equals the order of `b`, which is never consulted during the build.
pub fn build_cayley_graph(b: Residue) -> Result<CayleyGraph, CayleyError> {
    let table = build_power_table(b)?;
    let alpha = weight_alpha(&table);
    let generators: Vec<(u64, u32)> = alpha.into_iter().collect();
    let n = b.modulus();
    let graph = CayleyGraph::build(1 % n, &generators, table.m(), |x, s| mul_mod(x, s, n));
    debug_assert!(check_regular(&graph));
    Ok(graph)
}

/// The additive twin on `C_r` with generators `±2^j mod r`; the test oracle
/// for [`build_cayley_graph`] (isomorphic under `b^k <-> k` when `r = ord b`).
pub fn additive_model(r: u64, m: u32) -> CayleyGraph {
    debug_assert!(r >= 1 && r % 2 == 1);
    let mut alpha: BTreeMap<u64, u32> = BTreeMap::new();
    let mut pow = 1u64 % r;
    for _ in 0..=m {
        *alpha.entry(pow).or_insert(0) += 1;
        *alpha.entry((r - pow) % r).or_insert(0) += 1;
        pow = (pow * 2) % r;
    }
    let generators: Vec<(u64, u32)> = alpha.into_iter().collect();
    let graph = CayleyGraph::build(0, &generators, m, |x, s| (x + s) % r);
    debug_assert_eq!(graph.vertex_count() as u64, r);
    debug_assert!(check_regular(&graph));
    graph
}

fn check_regular(graph: &CayleyGraph) -> bool {
    (0..graph.vertex_count() as u32)
        .all(|v| graph.neighbors(v).iter().map(|&(_, w)| w).sum::<u32>() == graph.degree())
}
