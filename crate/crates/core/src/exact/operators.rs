//! The labelling operator M, its adjoint M*, the single-edge operators T_e
//! on the joint space, and the Edwards–Sokal measure ν.

use super::sparse::SparseMatrix;
use super::{build_p_cm, build_p_su, exact_mu, StateIndex, MAX_JOINT_N};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::RngStream;

fn joint_space(n: usize) -> Result<StateIndex> {
    if n == 0 || n > MAX_JOINT_N {
        return Err(Error::TooLarge(format!(
            "joint-space operators support 1 <= n <= {MAX_JOINT_N}, got {n}"
        )));
    }
    StateIndex::new(n)
}

#[inline]
fn joint_index(space: &StateIndex, sigma: u32, a: usize) -> usize {
    ((sigma as usize) << space.num_pairs()) | a
}

fn m_matrix(space: &StateIndex, q: f64) -> SparseMatrix {
    let cols = space.len() << space.n();
    let rows = (0..space.len())
        .map(|b| {
            let comps = &space.info(b).components;
            let c = comps.len();
            (0..1usize << c)
                .map(|chosen| {
                    let sigma = (0..c)
                        .filter(|i| chosen >> i & 1 == 1)
                        .fold(0u32, |acc, i| acc | comps[i]);
                    let inactive = c as i32 - chosen.count_ones() as i32;
                    let w = (q - 1.0).powi(inactive) * q.powi(-(c as i32));
                    (joint_index(space, sigma, b), w)
                })
                .collect()
        })
        .collect();
    SparseMatrix::from_rows(cols, rows)
}

fn m_adjoint_matrix(space: &StateIndex) -> SparseMatrix {
    let m = space.num_pairs();
    let rows = (0..space.len() << space.n())
        .map(|j| vec![(j & ((1 << m) - 1), 1.0)])
        .collect();
    SparseMatrix::from_rows(space.len(), rows)
}

fn te_matrix(space: &StateIndex, e: usize, p: f64) -> SparseMatrix {
    let (u, v) = space.pairs()[e];
    let m = space.num_pairs();
    let bit = 1usize << e;
    let size = space.len() << space.n();
    let rows = (0..size)
        .map(|j| {
            let sigma = j >> m;
            if sigma >> u & 1 == 1 && sigma >> v & 1 == 1 {
                let base = j & !bit;
                vec![(base | bit, p), (base, 1.0 - p)]
            } else {
                vec![(j, 1.0)]
            }
        })
        .collect();
    SparseMatrix::from_rows(size, rows)
}

/// M: assigns each component of a configuration the label active (1/q) or
/// inactive ((q−1)/q) independently. `|Ω_E| × |Ω_J|`.
pub fn build_m(n: usize, params: &ModelParams) -> Result<SparseMatrix> {
    Ok(m_matrix(&joint_space(n)?, params.q()))
}

/// M*: drops the labelling. `|Ω_J| × |Ω_E|`.
pub fn build_m_adjoint(n: usize) -> Result<SparseMatrix> {
    Ok(m_adjoint_matrix(&joint_space(n)?))
}

/// T_e: resamples pair `e` at rate `p` when both endpoints are active,
/// otherwise leaves the state alone.
pub fn build_te(e: usize, n: usize, params: &ModelParams) -> Result<SparseMatrix> {
    let space = joint_space(n)?;
    if e >= space.num_pairs() {
        return Err(Error::InvalidParams(format!("pair index {e} out of range")));
    }
    Ok(te_matrix(&space, e, params.p()))
}

/// Closed-form Edwards–Sokal measure
/// `ν(σ, A) ∝ (p/(1−p))^{|A|} (q−1)^{#inactive components} 1(A ⊆ E(σ))`.
pub fn edwards_sokal(n: usize, params: &ModelParams) -> Result<Vec<f64>> {
    let space = joint_space(n)?;
    let (p, q) = (params.p(), params.q());
    let m = space.num_pairs();
    let mut nu = vec![0.0; space.len() << n];
    for a in 0..space.len() {
        let info = space.info(a);
        let odds = (p / (1.0 - p)).powi(info.num_edges as i32);
        for sigma in 0u32..1 << n {
            // A ⊆ E(σ) iff every component is entirely active or inactive.
            let mono = info.components.iter().all(|&c| sigma & c == 0 || sigma & c == c);
            if !mono {
                continue;
            }
            let inactive = info.components.iter().filter(|&&c| sigma & c == 0).count() as i32;
            nu[((sigma as usize) << m) | a] = odds * (q - 1.0).powi(inactive);
        }
    }
    let z: f64 = nu.iter().sum();
    nu.iter_mut().for_each(|x| *x /= z);
    Ok(nu)
}

/// Max over all `(B, j)` of `|μ(B) M(B, j) − ν(j) M*(j, B)|`, which is the
/// adjointness relation tested on indicator functions.
pub fn adjointness_residual(mu: &[f64], m: &SparseMatrix, m_adj: &SparseMatrix, nu: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for b in 0..m.rows() {
        for &(j, w) in m.row(b) {
            worst = worst.max((mu[b] * w - nu[j] * m_adj.get(j, b)).abs());
        }
    }
    for j in 0..m_adj.rows() {
        for &(b, w) in m_adj.row(j) {
            worst = worst.max((mu[b] * m.get(b, j) - nu[j] * w).abs());
        }
    }
    worst
}

/// Product of the T_e in the given order.
pub fn edge_product(te: &[SparseMatrix], order: &[usize]) -> SparseMatrix {
    let mut acc = SparseMatrix::identity(te[0].rows());
    for &e in order {
        acc = acc.mul(&te[e]);
    }
    acc
}

/// All operators of the decomposition for one instance.
#[derive(Debug, Clone)]
pub struct JointOperators {
    pub space: StateIndex,
    pub mu: Vec<f64>,
    pub m: SparseMatrix,
    pub m_adj: SparseMatrix,
    pub te: Vec<SparseMatrix>,
    pub nu: Vec<f64>,
}

impl JointOperators {
    pub fn new(n: usize, params: &ModelParams) -> Result<Self> {
        let space = joint_space(n)?;
        let mu = exact_mu(n, params)?;
        let m = m_matrix(&space, params.q());
        let m_adj = m_adjoint_matrix(&space);
        let te = (0..space.num_pairs()).map(|e| te_matrix(&space, e, params.p())).collect();
        let nu = m.left_mul(&mu);
        Ok(Self { space, mu, m, m_adj, te, nu })
    }

    /// `M (∏_e T_e) M*` with the pairs taken in `order`.
    pub fn cm_product(&self, order: &[usize]) -> SparseMatrix {
        self.m.mul(&edge_product(&self.te, order)).mul(&self.m_adj)
    }

    pub fn natural_order(&self) -> Vec<usize> {
        (0..self.te.len()).collect()
    }

    /// `M ((1/|E|) Σ_e T_e) M*`.
    pub fn su_product(&self) -> SparseMatrix {
        let k = self.te.len() as f64;
        let mut sum = self.te[0].scale(1.0 / k);
        for t in &self.te[1..] {
            sum = sum.combine(1.0, t, 1.0 / k);
        }
        self.m.mul(&sum).mul(&self.m_adj)
    }

    pub fn idempotence_residual(&self) -> f64 {
        self.te.iter().map(|t| t.mul(t).max_abs_diff(t)).fold(0.0, f64::max)
    }

    pub fn commutation_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.te.len() {
            for j in i + 1..self.te.len() {
                worst = worst.max(self.te[i].mul(&self.te[j]).max_abs_diff(&self.te[j].mul(&self.te[i])));
            }
        }
        worst
    }

    /// Max detailed-balance violation of the T_e with respect to ν.
    pub fn te_reversibility_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.te {
            for i in 0..t.rows() {
                for &(j, w) in t.row(i) {
                    worst = worst.max((self.nu[i] * w - self.nu[j] * t.get(j, i)).abs());
                }
            }
        }
        worst
    }

    /// Max difference between μM and the closed-form Edwards–Sokal measure.
    pub fn edwards_sokal_residual(&self, params: &ModelParams) -> Result<f64> {
        let closed = edwards_sokal(self.space.n(), params)?;
        Ok(closed.iter().zip(&self.nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn adjointness_residual(&self) -> f64 {
        adjointness_residual(&self.mu, &self.m, &self.m_adj, &self.nu)
    }

    /// Max difference between the edge products in the natural order and in
    /// `trials` random orders.
    pub fn order_independence_residual(&self, trials: usize, rng: &mut RngStream) -> f64 {
        let base = edge_product(&self.te, &self.natural_order());
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let mut order = self.natural_order();
            for i in (1..order.len()).rev() {
                order.swap(i, rng.below(i as u64 + 1) as usize);
            }
            worst = worst.max(edge_product(&self.te, &order).max_abs_diff(&base));
        }
        worst
    }
}

/// `max |P_CM − M(∏_e T_e)M*|` with both sides built independently.
pub fn verify_decomposition(n: usize, params: &ModelParams) -> Result<f64> {
    let ops = JointOperators::new(n, params)?;
    let direct = build_p_cm(n, params)?;
    let product = ops.cm_product(&ops.natural_order()).to_dense();
    Ok((direct - product).abs().max())
}

/// `max |P_SU − M((1/|E|)Σ_e T_e)M*|`.
pub fn verify_su_decomposition(n: usize, params: &ModelParams) -> Result<f64> {
    let ops = JointOperators::new(n, params)?;
    let direct = build_p_su(n, params)?;
    Ok((direct - ops.su_product().to_dense()).abs().max())
}
