#![allow(dead_code)]

use std::collections::BTreeMap;

use mfrc::exact::{StateIndex, TransitionMatrix};
use mfrc::state::component_sizes;
use mfrc::stats::{chi_square_gof, ChiSquare};
use mfrc::{ComponentState, EdgeConfig, ModelParams, RngStream};

/// Goodness of fit of observed multiset counts against an exact law. An
/// observation outside the support yields p = 0.
pub fn gof_multisets(observed: &BTreeMap<Vec<usize>, u64>, law: &BTreeMap<Vec<usize>, f64>) -> ChiSquare {
    if observed.keys().any(|k| law.get(k).map_or(true, |&p| p == 0.0)) {
        return ChiSquare { statistic: f64::INFINITY, dof: law.len().saturating_sub(1), p_value: 0.0 };
    }
    let keys: Vec<&Vec<usize>> = law.keys().collect();
    let obs: Vec<u64> = keys.iter().map(|k| observed.get(*k).copied().unwrap_or(0)).collect();
    let probs: Vec<f64> = keys.iter().map(|k| law[*k]).collect();
    chi_square_gof(&obs, &probs)
}

pub fn multiset(s: &ComponentState) -> Vec<usize> {
    s.sizes().collect()
}

/// Empirical transition row of an edge-configuration chain from `start`,
/// tested against row `start` of `exact`.
pub fn edge_row_test<F>(
    space: &StateIndex,
    exact: &TransitionMatrix,
    start: usize,
    params: &ModelParams,
    steps: usize,
    rng: &mut RngStream,
    step: F,
) -> ChiSquare
where
    F: Fn(&EdgeConfig, &ModelParams, &mut RngStream) -> EdgeConfig,
{
    let from = space.to_config(start);
    let mut counts = vec![0u64; space.len()];
    for _ in 0..steps {
        counts[space.mask_of(&step(&from, params, rng))] += 1;
    }
    let row: Vec<f64> = (0..space.len()).map(|j| exact[(start, j)]).collect();
    if counts.iter().zip(&row).any(|(&c, &p)| c > 0 && p == 0.0) {
        return ChiSquare { statistic: f64::INFINITY, dof: 0, p_value: 0.0 };
    }
    // Drop structural zeros so that they do not count as cells.
    let (obs, probs): (Vec<u64>, Vec<f64>) = counts.into_iter().zip(row).filter(|&(_, p)| p > 0.0).unzip();
    chi_square_gof(&obs, &probs)
}

/// Empirical one-step law of the component multiset under a
/// component-level chain from `start`, against the exact CM matrix row
/// from a configuration with that multiset, projected onto multisets.
pub fn component_row_test<F>(
    space: &StateIndex,
    exact: &TransitionMatrix,
    start: &ComponentState,
    params: &ModelParams,
    steps: usize,
    rng: &mut RngStream,
    step: F,
) -> ChiSquare
where
    F: Fn(&ComponentState, &ModelParams, &mut RngStream) -> ComponentState,
{
    let target = multiset(start);
    let mask = (0..space.len())
        .find(|&m| multiset(&component_sizes(&space.to_config(m))) == target)
        .expect("every multiset is realised");
    let row: Vec<f64> = (0..space.len()).map(|j| exact[(mask, j)]).collect();
    let law = space.project(&row);
    let mut observed = BTreeMap::new();
    for _ in 0..steps {
        *observed.entry(multiset(&step(start, params, rng))).or_insert(0u64) += 1;
    }
    gof_multisets(&observed, &law)
}

/// All component multisets of `n` vertices, as component states.
pub fn all_partitions(n: usize) -> Vec<ComponentState> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for s in (1..=rest.min(max)).rev() {
            cur.push(s);
            rec(rest - s, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out.into_iter().map(|p| ComponentState::from_sizes(n, p).unwrap()).collect()
}
