//! Couplings: the binomial random-walk coupling and the identity coupling of
//! two CM chains with the same component structure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::random_graph::{binomial, for_each_bernoulli_pair};
use crate::rng::RngStream;
use crate::state::{component_sizes, EdgeConfig};

/// Draw of the binomial coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinomialCoupling {
    pub x: u64,
    pub y: u64,
    /// The running difference reached the target, so `x - y` equals it.
    pub success: bool,
    /// Coordinate at which the difference first hit the target.
    pub hit_at: Option<u64>,
}

/// Couples two Binomial(m, r) variables so that `X - Y = y` with high
/// probability.
///
/// Coordinate pairs `(X_k, Y_k)` are drawn independently while the running
/// difference `D_k = Σ (X_i - Y_i)` differs from `y`; from the first hit on,
/// both copies share their coordinates, so the remainder is one common
/// Binomial draw. Coordinates where `X_k = Y_k` leave `D` unchanged and are
/// skipped geometrically.
pub fn binomial_coupling_sample(m: u64, r: f64, target: u64, rng: &mut RngStream) -> BinomialCoupling {
    assert!(r > 0.0 && r < 1.0, "r must lie in (0, 1)");
    if target == 0 {
        let x = binomial(rng, m, r);
        return BinomialCoupling { x, y: x, success: true, hit_at: Some(0) };
    }
    let tie = r * r + (1.0 - r) * (1.0 - r);
    let both_one = r * r / tie;
    let log_tie = tie.ln();
    let target = target as i64;
    let (mut d, mut k, mut ties, mut plus) = (0i64, 0u64, 0u64, 0u64);
    let mut hit_at = None;
    loop {
        let skip = (rng.open01().ln() / log_tie) as u64;
        if skip >= m - k {
            ties += m - k;
            k = m;
            break;
        }
        ties += skip;
        k += skip + 1;
        if rng.next_bit() {
            d += 1;
            plus += 1;
        } else {
            d -= 1;
        }
        if d == target {
            hit_at = Some(k);
            break;
        }
        if k == m {
            break;
        }
    }
    let changes = k - ties;
    let shared_ones = binomial(rng, ties, both_one);
    let tail = binomial(rng, m - k, r);
    let x = shared_ones + plus + tail;
    let y = shared_ones + (changes - plus) + tail;
    BinomialCoupling { x, y, success: hit_at.is_some(), hit_at }
}

/// Two CM chains on labelled edge configurations with equal component
/// structure, plus the bijection that matches them.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub x: EdgeConfig,
    pub y: EdgeConfig,
    /// `bijection[v]` is the vertex of `y` matched to vertex `v` of `x`. It
    /// maps each component of `x` onto a component of `y` of equal size.
    pub bijection: Vec<usize>,
    /// Vertices that have been active in both copies at once; they satisfy
    /// `bijection[v] == v` from then on.
    pub fixed: Vec<bool>,
}

/// Per-step bookkeeping of the identity coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FixReport {
    pub unfixed_before: usize,
    pub newly_fixed: usize,
}

/// Components ordered by decreasing size, ties by smallest vertex.
fn ordered_components(cfg: &EdgeConfig) -> Vec<Vec<usize>> {
    let mut members = cfg.components().members();
    members.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    members
}

impl CoupledPair {
    /// Matches equal-size components largest first, pairing vertices within
    /// matched components in increasing order.
    pub fn new(x: EdgeConfig, y: EdgeConfig) -> Result<Self> {
        if x.n() != y.n() || component_sizes(&x) != component_sizes(&y) {
            return Err(Error::StructureMismatch);
        }
        let mut bijection = vec![0; x.n()];
        for (cx, cy) in ordered_components(&x).iter().zip(ordered_components(&y).iter()) {
            for (&a, &b) in cx.iter().zip(cy.iter()) {
                bijection[a] = b;
            }
        }
        let n = x.n();
        Ok(Self { x, y, bijection, fixed: vec![false; n] })
    }

    pub fn coupled(&self) -> bool {
        self.x == self.y
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed.iter().filter(|&&f| f).count()
    }
}

/// One coupled CM step.
///
/// A component of `x` and its image in `y` activate together. Vertices
/// active in both copies are matched to themselves and marked fixed; the
/// other active vertices of `x` are matched to the other active vertices of
/// `y` in increasing order. The active part of `x` is percolated and copied
/// to `y` through the new matching.
pub fn identity_coupling_step(
    pair: &mut CoupledPair,
    params: &ModelParams,
    rng: &mut RngStream,
) -> FixReport {
    let n = pair.x.n();
    let comps = pair.x.components();
    let on: Vec<bool> = (0..comps.count()).map(|_| rng.bernoulli(1.0 / params.q())).collect();
    let active_x: Vec<bool> = comps.label.iter().map(|&c| on[c]).collect();
    let mut active_y = vec![false; n];
    for v in 0..n {
        if active_x[v] {
            active_y[pair.bijection[v]] = true;
        }
    }

    let unfixed_before = n - pair.fixed_count();
    let mut newly_fixed = 0;
    let mut spare_x = Vec::new();
    let mut spare_y = Vec::new();
    for v in 0..n {
        match (active_x[v], active_y[v]) {
            (true, true) => {
                if !pair.fixed[v] {
                    pair.fixed[v] = true;
                    newly_fixed += 1;
                }
            }
            (true, false) => spare_x.push(v),
            (false, true) => spare_y.push(v),
            (false, false) => {}
        }
    }
    debug_assert_eq!(spare_x.len(), spare_y.len());
    for v in 0..n {
        if active_x[v] && active_y[v] {
            pair.bijection[v] = v;
        }
    }
    for (&a, &b) in spare_x.iter().zip(spare_y.iter()) {
        pair.bijection[a] = b;
    }
    assert!(
        (0..n).all(|v| !pair.fixed[v] || pair.bijection[v] == v),
        "fixed vertex lost its identity match"
    );

    pair.x.clear_within(&active_x);
    pair.y.clear_within(&active_y);
    let members: Vec<usize> = (0..n).filter(|&v| active_x[v]).collect();
    let (x, y, b) = (&mut pair.x, &mut pair.y, &pair.bijection);
    for_each_bernoulli_pair(members.len(), params.p(), rng, |i, j| {
        let (u, v) = (members[i], members[j]);
        x.insert(u, v);
        y.insert(b[u], b[v]);
    });
    FixReport { unfixed_before, newly_fixed }
}

/// Outcome of a coupling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingTime {
    Coupled(u64),
    Timeout,
}

impl CouplingTime {
    pub fn steps(self) -> Option<u64> {
        match self {
            Self::Coupled(t) => Some(t),
            Self::Timeout => None,
        }
    }
}

/// Runs the identity coupling from `(x0, y0)` until the labelled
/// configurations agree, reporting fix statistics to `on_step`.
pub fn coupling_time_with<F: FnMut(&CoupledPair, FixReport)>(
    x0: EdgeConfig,
    y0: EdgeConfig,
    params: &ModelParams,
    max_steps: u64,
    rng: &mut RngStream,
    mut on_step: F,
) -> Result<CouplingTime> {
    let mut pair = CoupledPair::new(x0, y0)?;
    for t in 0..=max_steps {
        if pair.coupled() {
            return Ok(CouplingTime::Coupled(t));
        }
        if t == max_steps {
            break;
        }
        let before: Vec<bool> = pair.fixed.clone();
        let report = identity_coupling_step(&mut pair, params, rng);
        assert!(
            before.iter().zip(&pair.fixed).all(|(&a, &b)| !a || b),
            "fixed set shrank"
        );
        on_step(&pair, report);
    }
    Ok(CouplingTime::Timeout)
}

pub fn coupling_time(
    x0: EdgeConfig,
    y0: EdgeConfig,
    params: &ModelParams,
    max_steps: u64,
    rng: &mut RngStream,
) -> Result<CouplingTime> {
    coupling_time_with(x0, y0, params, max_steps, rng, |_, _| {})
}

/// A uniformly random relabelling of `cfg`.
pub fn random_relabel(cfg: &EdgeConfig, rng: &mut RngStream) -> EdgeConfig {
    let mut perm: Vec<usize> = (0..cfg.n()).collect();
    for i in (1..perm.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    cfg.relabel(&perm).expect("a permutation is a valid relabelling")
}
