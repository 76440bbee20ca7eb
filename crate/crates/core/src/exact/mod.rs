//! Exact Markov-chain machinery on tiny complete graphs.
//!
//! Edge configurations are indexed by bitmask, bit `i` standing for the
//! `i`-th pair in lexicographic order. Joint states `(σ, A)` of an
//! active/inactive labelling and a configuration are indexed by
//! `σ · 2^m + A`, where bit `v` of `σ` marks vertex `v` active.

mod chains;
mod operators;
mod report;
mod sparse;
mod spectral;

use std::collections::BTreeMap;

use crate::dsu::DisjointSet;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::EdgeConfig;

pub use chains::{build_p_cm, build_p_hb, build_p_su};
pub use operators::{
    adjointness_residual, build_m, build_m_adjoint, build_te, edge_product, edwards_sokal, verify_decomposition,
    verify_su_decomposition, JointOperators,
};
pub use report::{Check, ExactReport};
pub use sparse::SparseMatrix;
pub use spectral::{
    detailed_balance_residual, mixing_bounds, spectral_gap, spectrum, stationarity_residual,
};

/// Dense stochastic matrix over an enumerated state space.
pub type TransitionMatrix = nalgebra::DMatrix<f64>;
/// Distribution over an enumerated state space.
pub type DistVector = Vec<f64>;

/// Largest vertex count for edge-space enumeration.
pub const MAX_EDGE_SPACE_N: usize = 6;
/// Largest vertex count for the joint space and the CM matrix.
pub const MAX_JOINT_N: usize = 4;

/// Per-configuration data of the enumerated edge space.
#[derive(Debug, Clone)]
pub struct StateInfo {
    pub num_edges: u32,
    /// Vertex bitmasks of the components, ordered by smallest vertex.
    pub components: Vec<u32>,
    /// Component index of each vertex.
    pub label: Vec<u8>,
}

impl StateInfo {
    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// Component sizes in non-increasing order.
    pub fn size_multiset(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.components.iter().map(|c| c.count_ones() as usize).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

/// All `2^{n(n-1)/2}` configurations on the complete graph `K_n`.
#[derive(Debug, Clone)]
pub struct StateIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
    states: Vec<StateInfo>,
}

impl StateIndex {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_EDGE_SPACE_N {
            return Err(Error::TooLarge(format!(
                "edge space enumeration supports 1 <= n <= {MAX_EDGE_SPACE_N}, got {n}"
            )));
        }
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let states = (0..1usize << pairs.len())
            .map(|mask| {
                let mut dsu = DisjointSet::new(n);
                for (i, &(u, v)) in pairs.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        dsu.union(u, v);
                    }
                }
                let mut root_label = vec![u8::MAX; n];
                let mut label = vec![0u8; n];
                let mut components = Vec::new();
                for v in 0..n {
                    let r = dsu.find(v);
                    if root_label[r] == u8::MAX {
                        root_label[r] = components.len() as u8;
                        components.push(0u32);
                    }
                    label[v] = root_label[r];
                    components[label[v] as usize] |= 1 << v;
                }
                StateInfo {
                    num_edges: (mask as u64).count_ones(),
                    components,
                    label,
                }
            })
            .collect();
        Ok(Self { n, pairs, states })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pairs `m = n(n-1)/2`.
    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn info(&self, mask: usize) -> &StateInfo {
        &self.states[mask]
    }

    /// Index of the pair `{u, v}`.
    pub fn pair_index(&self, u: usize, v: usize) -> usize {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    /// Bitmask of the pairs with both endpoints in the vertex set `vertices`.
    pub fn pairs_within(&self, vertices: u32) -> usize {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| vertices >> u & 1 == 1 && vertices >> v & 1 == 1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn to_config(&self, mask: usize) -> EdgeConfig {
        let edges = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e);
        EdgeConfig::from_edges(self.n, edges).expect("enumerated pairs are valid")
    }

    pub fn mask_of(&self, cfg: &EdgeConfig) -> usize {
        cfg.edges().fold(0, |acc, (u, v)| acc | 1 << self.pair_index(u, v))
    }

    /// Sums a distribution over configurations by component-size multiset.
    pub fn project(&self, dist: &[f64]) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        for (mask, &w) in dist.iter().enumerate() {
            *out.entry(self.states[mask].size_multiset()).or_insert(0.0) += w;
        }
        out
    }
}

/// Unnormalised random-cluster weight of each configuration.
pub fn rc_weights(space: &StateIndex, p: f64, q: f64) -> Vec<f64> {
    let m = space.num_pairs() as i32;
    space
        .states
        .iter()
        .map(|s| {
            let k = s.num_edges as i32;
            p.powi(k) * (1.0 - p).powi(m - k) * q.powi(s.num_components() as i32)
        })
        .collect()
}

fn normalise(mut w: Vec<f64>) -> Vec<f64> {
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    w
}

/// The random-cluster measure μ_{p,q} on `K_n` by full enumeration.
pub fn exact_mu(n: usize, params: &ModelParams) -> Result<DistVector> {
    if n > 5 {
        return Err(Error::TooLarge(format!("exact measure supports n <= 5, got {n}")));
    }
    let space = StateIndex::new(n)?;
    Ok(normalise(rc_weights(&space, params.p(), params.q())))
}

/// Law of the component-size multiset of `G(m, p)`, by enumeration.
pub fn gnp_size_distribution(m: usize, p: f64) -> Result<BTreeMap<Vec<usize>, f64>> {
    let space = StateIndex::new(m)?;
    Ok(space.project(&rc_weights(&space, p, 1.0)))
}
