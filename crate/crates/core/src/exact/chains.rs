//! Transition matrices assembled directly from the definitions of the three
//! chains.

use super::{StateIndex, TransitionMatrix, MAX_JOINT_N};
use crate::error::{Error, Result};
use crate::params::ModelParams;

fn check_n(n: usize, max: usize, what: &str) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::TooLarge(format!("{what} supports 1 <= n <= {max}, got {n}")));
    }
    Ok(())
}

/// Probability of the outcome `set ⊆ within` when each pair of `within` is
/// kept independently with probability `p`.
fn percolation_weight(p: f64, within: usize, set: usize) -> f64 {
    let k = set.count_ones() as i32;
    let total = within.count_ones() as i32;
    p.powi(k) * (1.0 - p).powi(total - k)
}

/// CM matrix by summing over every activation subset and every outcome on
/// the active pairs.
pub fn build_p_cm(n: usize, params: &ModelParams) -> Result<TransitionMatrix> {
    check_n(n, MAX_JOINT_N, "the CM matrix")?;
    let space = StateIndex::new(n)?;
    let (p, q) = (params.p(), params.q());
    let within: Vec<usize> = (0..1u32 << n).map(|vs| space.pairs_within(vs)).collect();
    let size = space.len();
    let mut mat = TransitionMatrix::zeros(size, size);
    for a in 0..size {
        let comps = &space.info(a).components;
        let c = comps.len();
        for chosen in 0..1usize << c {
            let k = chosen.count_ones() as i32;
            let w_act = q.powi(-k) * (1.0 - 1.0 / q).powi(c as i32 - k);
            if w_act == 0.0 {
                continue;
            }
            let active = (0..c)
                .filter(|i| chosen >> i & 1 == 1)
                .fold(0u32, |acc, i| acc | comps[i]);
            let free = within[active as usize];
            let base = a & !free;
            let mut t = free;
            loop {
                mat[(a, base | t)] += w_act * percolation_weight(p, free, t);
                if t == 0 {
                    break;
                }
                t = (t - 1) & free;
            }
        }
    }
    Ok(mat)
}

/// Heat-bath matrix: a uniform pair is included with probability
/// `p/(p + q(1-p))` if it would be a cut edge and `p` otherwise.
pub fn build_p_hb(n: usize, params: &ModelParams) -> Result<TransitionMatrix> {
    check_n(n, 5, "the heat-bath matrix")?;
    let space = StateIndex::new(n)?;
    let (p, q) = (params.p(), params.q());
    let m = space.num_pairs() as f64;
    let cut_p = p / (p + q * (1.0 - p));
    let size = space.len();
    let mut mat = TransitionMatrix::zeros(size, size);
    for a in 0..size {
        for (i, &(u, v)) in space.pairs().iter().enumerate() {
            let bit = 1 << i;
            let rest = space.info(a & !bit);
            let keep = if rest.label[u] != rest.label[v] { cut_p } else { p };
            mat[(a, a | bit)] += keep / m;
            mat[(a, a & !bit)] += (1.0 - keep) / m;
        }
    }
    Ok(mat)
}

/// Single-update matrix: a uniform pair is resampled at rate `p` when both
/// endpoints are active, which happens with probability `1/q` if they share
/// a component and `1/q²` otherwise.
pub fn build_p_su(n: usize, params: &ModelParams) -> Result<TransitionMatrix> {
    check_n(n, 5, "the single-update matrix")?;
    let space = StateIndex::new(n)?;
    let (p, q) = (params.p(), params.q());
    let m = space.num_pairs() as f64;
    let size = space.len();
    let mut mat = TransitionMatrix::zeros(size, size);
    for a in 0..size {
        let info = space.info(a);
        for (i, &(u, v)) in space.pairs().iter().enumerate() {
            let bit = 1 << i;
            let both = if info.label[u] == info.label[v] { 1.0 / q } else { 1.0 / (q * q) };
            mat[(a, a | bit)] += both * p / m;
            mat[(a, a & !bit)] += both * (1.0 - p) / m;
            mat[(a, a)] += (1.0 - both) / m;
        }
    }
    Ok(mat)
}
