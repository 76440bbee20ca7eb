//! Phase structure of the mean-field model: the drift map φ, the drift
//! function f(θ) = θ − φ(θ), the giant-component fraction θ_r and the
//! critical points λ_s ≤ λ_c ≤ λ_S.
//!
//! For a configuration with one component of size θn, a CM step activates
//! about (θ + (1−θ)/q)n vertices and percolates them at p = λ/n. The giant of
//! that subgraph, as a fraction of n, is φ(θ): the largest x > 0 with
//! `e^{-λx} = 1 - qx / (1 + (q-1)θ)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::random_graph::beta;

/// Offset of the θ grid above θ_min.
pub const GRID_EPSILON: f64 = 1e-9;
/// Grid size used when locating θ_r.
pub const ROOT_GRID: usize = 10_000;

/// Phase-transition point λ_c(q).
pub fn lambda_c(q: f64) -> f64 {
    if q <= 2.0 {
        q
    } else {
        2.0 * ((q - 1.0) / (q - 2.0)) * (q - 1.0).ln()
    }
}

/// λ_S(q) = q for every q > 1. [`upper_window_holds`] checks the defining
/// property independently.
pub fn lambda_upper(q: f64) -> f64 {
    q
}

/// Drift apparatus at fixed `(q, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Drift {
    q: f64,
    lambda: f64,
}

impl Drift {
    /// `q = 1` is admitted so the Erdős–Rényi limit can be checked.
    pub fn new(q: f64, lambda: f64) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::InvalidParams(format!("q must be >= 1, got {q}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { q, lambda })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Lower edge of the domain of φ: `max{(q−λ)/(λ(q−1)), 0}`.
    ///
    /// At `q = 1` the domain is all of (0, 1] when λ > 1 and empty otherwise
    /// (reported as 1).
    pub fn theta_min(&self) -> f64 {
        let (q, l) = (self.q, self.lambda);
        if q == 1.0 {
            return if l > 1.0 { 0.0 } else { 1.0 };
        }
        ((q - l) / (l * (q - 1.0))).max(0.0)
    }

    fn check(&self, theta: f64) -> Result<()> {
        let theta_min = self.theta_min();
        if theta > theta_min && theta <= 1.0 {
            Ok(())
        } else {
            Err(Error::Domain { theta, theta_min })
        }
    }

    /// Mean degree of the active subgraph, λ(1+(q−1)θ)/q.
    fn active_degree(&self, theta: f64) -> f64 {
        self.lambda * (1.0 + (self.q - 1.0) * theta) / self.q
    }

    /// φ without domain checks; 0 where the active subgraph is not
    /// supercritical.
    pub(crate) fn phi_raw(&self, theta: f64) -> f64 {
        let active = (1.0 + (self.q - 1.0) * theta) / self.q;
        beta(self.active_degree(theta)) * active
    }

    pub fn phi(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        Ok(self.phi_raw(theta))
    }

    pub(crate) fn phi_prime_raw(&self, theta: f64) -> f64 {
        let x = self.phi_raw(theta);
        let t = self.lambda * x;
        let ratio = if t < 1e-3 {
            (1.0 - t + 7.0 * t * t / 12.0) / (0.5 - t / 3.0 + t * t / 8.0)
        } else {
            let e = (-t).exp();
            let s = -(-t).exp_m1();
            s * s / (s - t * e)
        };
        (self.q - 1.0) / self.q * ratio
    }

    pub fn phi_prime(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        Ok(self.phi_prime_raw(theta))
    }

    pub fn f(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        Ok(theta - self.phi_raw(theta))
    }

    pub fn f_prime(&self, theta: f64) -> Result<f64> {
        self.check(theta)?;
        Ok(1.0 - self.phi_prime_raw(theta))
    }

    /// `|e^{-λx} − 1 + qx/(1+(q−1)θ)|`, the residual of the equation defining φ(θ).
    pub fn phi_residual(&self, theta: f64, x: f64) -> f64 {
        ((-self.lambda * x).exp() - 1.0 + self.q * x / (1.0 + (self.q - 1.0) * theta)).abs()
    }

    /// `|e^{-λx} − 1 + qx/(1+(q−1)x)|`, the residual of the giant-fraction equation.
    pub fn root_residual(&self, x: f64) -> f64 {
        self.phi_residual(x, x)
    }

    /// Uniform grid of `size` points over `(θ_min + ε, 1]`.
    pub fn grid(&self, size: usize) -> Vec<f64> {
        let lo = self.theta_min() + GRID_EPSILON;
        if size < 2 || lo >= 1.0 {
            return if lo < 1.0 { vec![1.0] } else { vec![] };
        }
        let step = (1.0 - lo) / (size - 1) as f64;
        (0..size)
            .map(|i| if i + 1 == size { 1.0 } else { lo + step * i as f64 })
            .collect()
    }

    fn f_raw(&self, theta: f64) -> f64 {
        theta - self.phi_raw(theta)
    }

    fn bisect_root(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut f_lo = self.f_raw(lo);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            let fm = self.f_raw(mid);
            if (fm < 0.0) == (f_lo < 0.0) {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// All roots of f detected as sign changes on a `grid_size` grid, refined
    /// by bisection, in increasing order.
    pub fn roots(&self, grid_size: usize) -> Vec<f64> {
        let grid = self.grid(grid_size);
        let values: Vec<f64> = grid.iter().map(|&t| self.f_raw(t)).collect();
        let mut out = Vec::new();
        for i in 0..grid.len().saturating_sub(1) {
            let (a, b) = (values[i], values[i + 1]);
            if a == 0.0 {
                out.push(grid[i]);
            } else if (a < 0.0) != (b < 0.0) && b != 0.0 {
                out.push(self.bisect_root(grid[i], grid[i + 1]));
            }
        }
        if values.last() == Some(&0.0) {
            out.push(1.0);
        }
        out
    }

    /// θ_r, the largest root of f in (θ_min, 1], if any.
    pub fn theta_r(&self) -> Option<f64> {
        let grid = self.grid(ROOT_GRID);
        let values: Vec<f64> = grid.iter().map(|&t| self.f_raw(t)).collect();
        (0..grid.len().saturating_sub(1))
            .rev()
            .find(|&i| values[i] <= 0.0 && values[i + 1] >= 0.0)
            .map(|i| {
                if values[i + 1] == 0.0 {
                    grid[i + 1]
                } else if values[i] == 0.0 {
                    grid[i]
                } else {
                    self.bisect_root(grid[i], grid[i + 1])
                }
            })
    }

    /// Minimum of f over a grid, with its location.
    pub fn min_f(&self, grid_size: usize) -> Option<(f64, f64)> {
        self.grid(grid_size)
            .into_iter()
            .map(|t| (t, self.f_raw(t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn scan(&self, grid_size: usize) -> DriftScan {
        let rows = self
            .grid(grid_size)
            .into_iter()
            .map(|theta| DriftRow {
                theta,
                phi: self.phi_raw(theta),
                f: self.f_raw(theta),
                f_prime: 1.0 - self.phi_prime_raw(theta),
            })
            .collect();
        DriftScan {
            q: self.q,
            lambda: self.lambda,
            rows,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftRow {
    pub theta: f64,
    pub phi: f64,
    pub f: f64,
    pub f_prime: f64,
}

/// Tabulated (θ, φ, f, f') over the drift domain.
#[derive(Debug, Clone, Serialize)]
pub struct DriftScan {
    pub q: f64,
    pub lambda: f64,
    pub rows: Vec<DriftRow>,
}

impl DriftScan {
    /// Signs of f along the grid with consecutive repeats collapsed.
    pub fn sign_pattern(&self) -> Vec<bool> {
        let mut out: Vec<bool> = Vec::new();
        for r in &self.rows {
            let positive = r.f > 0.0;
            if out.last() != Some(&positive) {
                out.push(positive);
            }
        }
        out
    }

    pub fn sign_changes(&self) -> usize {
        self.sign_pattern().len().saturating_sub(1)
    }
}

/// Witness of the tangency that defines λ_s for q > 2: f(θ*) = f'(θ*) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tangency {
    pub lambda: f64,
    pub theta: f64,
    pub f_residual: f64,
    pub f_prime_residual: f64,
    pub iterations: usize,
}

/// In terms of x = φ(θ), solving the defining equation for θ gives
/// θ(x) = (qx/(1−e^{−λx}) − 1)/(q−1), and f = 0, f' = 0 becomes
/// F(x) = θ(x) − x = 0, F'(x) = 0. Returns (F, F_x, F_xx, F_xλ, F_λ).
fn tangency_system(q: f64, lambda: f64, x: f64) -> [f64; 5] {
    let c = q / (q - 1.0);
    let e = (-lambda * x).exp();
    let s = -(-lambda * x).exp_m1();
    let h = x / s;
    let num = s - lambda * x * e;
    let h_x = num / (s * s);
    let h_xx = (lambda * lambda * x * e * s - 2.0 * num * lambda * e) / (s * s * s);
    let h_xl = (lambda * x * x * e * s - 2.0 * num * x * e) / (s * s * s);
    let h_l = -x * x * e / (s * s);
    [
        c * h - 1.0 / (q - 1.0) - x,
        c * h_x - 1.0,
        c * h_xx,
        c * h_xl,
        c * h_l,
    ]
}

/// Solves the tangency system for q > 2 by damped 2-D Newton, seeded from a
/// coarse (λ, θ) scan of min f.
pub fn lambda_s_tangency(q: f64) -> Result<Tangency> {
    if !(q > 2.0) {
        return Err(Error::InvalidParams(format!(
            "tangency exists only for q > 2, got {q}"
        )));
    }
    let lc = lambda_c(q);
    let coarse = 160;
    let lo = 1.0 + 1e-6;
    let mut seed: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64, f64)> = None;
    for i in 0..=coarse {
        let l = lo + (lc - lo) * i as f64 / coarse as f64;
        let drift = Drift::new(q, l)?;
        let Some((theta, fmin)) = drift.min_f(400) else {
            continue;
        };
        if fmin <= 0.0 {
            let (l0, t0) = match prev {
                Some((pl, pt, pf)) if pf > 0.0 => {
                    let w = pf / (pf - fmin);
                    (pl + w * (l - pl), pt + w * (theta - pt))
                }
                _ => (l, theta),
            };
            seed = Some((l0, t0));
            break;
        }
        prev = Some((l, theta, fmin));
    }
    let (mut lambda, mut x) =
        seed.ok_or_else(|| Error::SolverFailure(format!("no sign change of min f below λ_c for q = {q}")))?;

    let norm = |r: &[f64; 5]| r[0].abs().max(r[1].abs());
    let mut res = tangency_system(q, lambda, x);
    let mut iterations = 0;
    while iterations < 200 && norm(&res) > 1e-15 {
        iterations += 1;
        let [g1, g2, g2x, g2l, g1l] = res;
        // Jacobian rows: d(g1) = (g2, g1l), d(g2) = (g2x, g2l).
        let det = g2 * g2l - g1l * g2x;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (g1 * g2l - g1l * g2) / det;
        let dl = (g2 * g2 - g2x * g1) / det;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (nx, nl) = (x - step * dx, lambda - step * dl);
            if nx > 0.0 && nx <= 1.0 && nl > 1.0 {
                let trial = tangency_system(q, nl, nx);
                if norm(&trial).is_finite() && norm(&trial) < norm(&res) {
                    x = nx;
                    lambda = nl;
                    res = trial;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let drift = Drift::new(q, lambda)?;
    let theta = x;
    let f_residual = drift
        .f(theta)
        .map_err(|e| Error::SolverFailure(format!("tangency left the domain: {e}")))?
        .abs();
    let f_prime_residual = drift.f_prime(theta)?.abs();
    if f_residual > 1e-10 || f_prime_residual > 1e-10 {
        return Err(Error::SolverFailure(format!(
            "tangency residuals f = {f_residual:e}, f' = {f_prime_residual:e} after {iterations} iterations"
        )));
    }
    Ok(Tangency {
        lambda,
        theta,
        f_residual,
        f_prime_residual,
        iterations,
    })
}

/// λ_s(q): q for q ≤ 2, otherwise the λ at which f first touches zero.
pub fn lambda_s(q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::InvalidParams(format!("q must exceed 1, got {q}")));
    }
    if q <= 2.0 {
        Ok(q)
    } else {
        lambda_s_tangency(q).map(|t| t.lambda)
    }
}

/// Definition check for λ_S: `f(θ)(θ − θ_r) > 0` on every grid point at the
/// given λ.
pub fn upper_window_holds(q: f64, lambda: f64, grid_size: usize) -> Result<bool> {
    let drift = Drift::new(q, lambda)?;
    let Some(theta_r) = drift.theta_r() else {
        return Ok(false);
    };
    Ok(drift
        .grid(grid_size)
        .into_iter()
        .filter(|t| (t - theta_r).abs() > 1e-12)
        .all(|t| drift.f_raw(t) * (t - theta_r) > 0.0))
}

/// Phase structure at fixed `(q, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoints {
    pub q: f64,
    pub lambda: f64,
    pub lambda_c: f64,
    pub lambda_s: f64,
    #[serde(rename = "lambda_S")]
    pub lambda_upper: f64,
    pub theta_min: f64,
    pub theta_r: Option<f64>,
    #[serde(rename = "theta_S_threshold")]
    pub theta_upper_threshold: f64,
}

impl CriticalPoints {
    pub fn compute(q: f64, lambda: f64) -> Result<Self> {
        if !(q > 1.0) {
            return Err(Error::InvalidParams(format!("q must exceed 1, got {q}")));
        }
        let drift = Drift::new(q, lambda)?;
        Ok(Self {
            q,
            lambda,
            lambda_c: lambda_c(q),
            lambda_s: lambda_s(q)?,
            lambda_upper: lambda_upper(q),
            theta_min: drift.theta_min(),
            theta_r: drift.theta_r(),
            theta_upper_threshold: 1.0 - q / lambda,
        })
    }
}
