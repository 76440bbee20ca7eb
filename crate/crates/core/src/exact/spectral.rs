use nalgebra::SymmetricEigen;

use super::TransitionMatrix;
use crate::error::{Error, Result};

/// Tolerance on detailed balance before symmetrising.
pub const REVERSIBILITY_TOL: f64 = 1e-10;

/// `max_{x,y} |μ(x)P(x,y) − μ(y)P(y,x)|`.
pub fn detailed_balance_residual(p: &TransitionMatrix, mu: &[f64]) -> f64 {
    let n = p.nrows();
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            worst = worst.max((mu[x] * p[(x, y)] - mu[y] * p[(y, x)]).abs());
        }
    }
    worst
}

/// `max_y |(μP)(y) − μ(y)|`.
pub fn stationarity_residual(p: &TransitionMatrix, mu: &[f64]) -> f64 {
    let n = p.nrows();
    (0..n)
        .map(|y| ((0..n).map(|x| mu[x] * p[(x, y)]).sum::<f64>() - mu[y]).abs())
        .fold(0.0, f64::max)
}

/// Eigenvalues of `P` in decreasing order, from the symmetric matrix
/// `D^{1/2} P D^{-1/2}` with `D = diag(μ)`.
pub fn spectrum(p: &TransitionMatrix, mu: &[f64]) -> Result<Vec<f64>> {
    if mu.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidParams("stationary distribution must be positive".into()));
    }
    let residual = detailed_balance_residual(p, mu);
    if residual > REVERSIBILITY_TOL {
        return Err(Error::NotReversible(residual));
    }
    let n = p.nrows();
    let sqrt: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let mut s = TransitionMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            s[(x, y)] = sqrt[x] * p[(x, y)] / sqrt[y];
        }
    }
    let sym = (&s + s.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig)
}

/// `1 − max{|λ_2|, |λ_min|}`.
pub fn spectral_gap(p: &TransitionMatrix, mu: &[f64]) -> Result<f64> {
    let eig = spectrum(p, mu)?;
    if eig.len() < 2 {
        return Ok(1.0);
    }
    let second = eig[1].abs().max(eig[eig.len() - 1].abs());
    Ok(1.0 - second)
}

/// Bounds `1/λ − 1 ≤ τ_mix ≤ ln(2e/π_min)/λ` on the mixing time.
pub fn mixing_bounds(p: &TransitionMatrix, mu: &[f64]) -> Result<(f64, f64)> {
    let gap = spectral_gap(p, mu)?;
    let pi_min = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = (2.0 * std::f64::consts::E / pi_min).ln() / gap;
    Ok((1.0 / gap - 1.0, upper))
}
