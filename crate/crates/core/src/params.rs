use serde::Serialize;

use crate::error::{Error, Result};

/// Parameters of the mean-field random-cluster model on the complete graph.
///
/// The edge probability is always derived as `lambda / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    n: usize,
    q: f64,
    lambda: f64,
}

impl ModelParams {
    /// Validated constructor: `n >= 1`, `q > 1`, `lambda > 0` and `0 < lambda/n < 1`.
    pub fn new(n: usize, q: f64, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::InvalidParams(format!("q must exceed 1, got {q}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let p = lambda / n as f64;
        if !(p < 1.0) {
            return Err(Error::InvalidParams(format!(
                "edge probability lambda/n = {p} must lie in (0, 1)"
            )));
        }
        Ok(Self { n, q, lambda })
    }

    /// Relaxed constructor used by oracles and degenerate checks: admits `q >= 1`
    /// and the closed range `0 <= lambda/n <= 1`.
    pub fn oracle(n: usize, q: f64, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidParams(format!("q must be >= 1, got {q}")));
        }
        let p = lambda / n as f64;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "edge probability lambda/n = {p} must lie in [0, 1]"
            )));
        }
        Ok(Self { n, q, lambda })
    }

    /// Oracle-mode constructor from an edge probability instead of `lambda`.
    pub fn with_p(n: usize, q: f64, p: f64) -> Result<Self> {
        Self::oracle(n, q, p * n as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p(&self) -> f64 {
        self.lambda / self.n as f64
    }

    /// Number of edges of the complete host graph, `n(n-1)/2`.
    pub fn num_pairs(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    /// Same `q` and `lambda` on a different vertex count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.q, self.lambda)
    }
}
