use serde::Serialize;

use super::operators::JointOperators;
use super::spectral::{detailed_balance_residual, mixing_bounds, spectrum, stationarity_residual};
use super::{build_p_cm, build_p_hb, build_p_su, exact_mu, TransitionMatrix, MAX_JOINT_N};
use crate::error::Result;
use crate::params::ModelParams;
use crate::rng::RngStream;

/// One named pass/fail check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `true` when the value must not exceed the bound, `false` when it must
    /// exceed it.
    pub upper: bool,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, upper: true, pass: value <= bound }
    }

    fn above(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, upper: false, pass: value > bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub name: String,
    pub gap: f64,
    pub mixing_lower: f64,
    pub mixing_upper: f64,
    pub min_eigenvalue: f64,
}

/// Residuals, gaps and inequality checks for one small instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    pub n: usize,
    pub q: f64,
    pub lambda: f64,
    pub p: f64,
    pub alpha: f64,
    pub chains: Vec<ChainSummary>,
    pub checks: Vec<Check>,
}

fn row_dev(m: &TransitionMatrix) -> f64 {
    m.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
}

fn summarise(name: &str, p: &TransitionMatrix, mu: &[f64]) -> Result<ChainSummary> {
    let eig = spectrum(p, mu)?;
    let gap = 1.0 - eig[1].abs().max(eig[eig.len() - 1].abs());
    let (mixing_lower, mixing_upper) = mixing_bounds(p, mu)?;
    Ok(ChainSummary {
        name: name.into(),
        gap,
        mixing_lower,
        mixing_upper,
        min_eigenvalue: eig[eig.len() - 1],
    })
}

impl ExactReport {
    /// Runs every check that the instance size allows: the CM matrix and the
    /// joint-space operators need `n ≤ 4`, the local chains `n ≤ 5`.
    pub fn compute(n: usize, params: &ModelParams, rng: &mut RngStream) -> Result<Self> {
        let mu = exact_mu(n, params)?;
        let (p, q) = (params.p(), params.q());
        let alpha = (q * (1.0 - p) + p) / (q * q);
        let mut checks = vec![Check::at_most("mu_normalisation", (mu.iter().sum::<f64>() - 1.0).abs(), 1e-12)];
        let mut chains = Vec::new();

        let hb = build_p_hb(n, params)?;
        let su = build_p_su(n, params)?;
        let cm = if n <= MAX_JOINT_N { Some(build_p_cm(n, params)?) } else { None };
        for (name, mat) in [("cm", cm.as_ref()), ("hb", Some(&hb)), ("su", Some(&su))] {
            let Some(mat) = mat else { continue };
            checks.push(Check::at_most(&format!("{name}_row_sums"), row_dev(mat), 1e-12));
            checks.push(Check::at_most(&format!("{name}_min_entry"), -mat.min(), 0.0));
            checks.push(Check::at_most(
                &format!("{name}_detailed_balance"),
                detailed_balance_residual(mat, &mu),
                1e-10,
            ));
            checks.push(Check::at_most(
                &format!("{name}_stationarity"),
                stationarity_residual(mat, &mu),
                1e-12,
            ));
            chains.push(summarise(name, mat, &mu)?);
        }
        let gap = |name: &str| chains.iter().find(|c| c.name == name).map(|c| c.gap);
        let (gap_hb, gap_su) = (gap("hb").unwrap(), gap("su").unwrap());
        let su_min = chains.iter().find(|c| c.name == "su").unwrap().min_eigenvalue;
        checks.push(Check::above("su_positive", su_min, -1e-10));

        // Entrywise comparison of the off-diagonal transitions.
        let mut lower: f64 = f64::INFINITY;
        let mut upper: f64 = f64::INFINITY;
        for a in 0..hb.nrows() {
            for b in 0..hb.ncols() {
                if a != b {
                    lower = lower.min(su[(a, b)] - alpha * hb[(a, b)]);
                    upper = upper.min(hb[(a, b)] - su[(a, b)]);
                }
            }
        }
        checks.push(Check::above("su_hb_entrywise_lower", lower, -1e-15));
        checks.push(Check::above("su_hb_entrywise_upper", upper, -1e-15));
        checks.push(Check::above("su_hb_gap_lower_margin", gap_su - alpha * gap_hb, 1e-12));
        checks.push(Check::above("su_hb_gap_upper_margin", gap_hb - gap_su, 1e-12));

        if let Some(cm) = cm.as_ref() {
            let gap_cm = gap("cm").unwrap();
            let m = (n * (n - 1) / 2) as f64;
            checks.push(Check::above("cm_su_gap_lower_margin", gap_cm - gap_su, 1e-12));
            checks.push(Check::above(
                "cm_su_gap_upper_margin",
                8.0 * m * m.ln() * gap_su - gap_cm,
                1e-12,
            ));

            let ops = JointOperators::new(n, params)?;
            let product = ops.cm_product(&ops.natural_order()).to_dense();
            checks.push(Check::at_most("cm_decomposition", (cm - product).abs().max(), 1e-10));
            checks.push(Check::at_most(
                "su_decomposition",
                (&su - ops.su_product().to_dense()).abs().max(),
                1e-10,
            ));
            checks.push(Check::at_most("edge_order_independence", ops.order_independence_residual(2, rng), 1e-12));
            checks.push(Check::at_most("te_idempotence", ops.idempotence_residual(), 1e-12));
            checks.push(Check::at_most("te_commutation", ops.commutation_residual(), 1e-12));
            checks.push(Check::at_most("te_reversibility_nu", ops.te_reversibility_residual(), 1e-10));
            checks.push(Check::at_most("nu_edwards_sokal", ops.edwards_sokal_residual(params)?, 1e-12));
            checks.push(Check::at_most("m_adjointness", ops.adjointness_residual(), 1e-10));
            checks.push(Check::at_most("m_row_sums", ops.m.row_sum_deviation(), 1e-12));
        }

        Ok(Self {
            n,
            q,
            lambda: params.lambda(),
            p,
            alpha,
            chains,
            checks,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn gap(&self, chain: &str) -> Option<f64> {
        self.chains.iter().find(|c| c.name == chain).map(|c| c.gap)
    }
}
