//! Goodness-of-fit tests and small summary statistics used by the
//! experiments and the test suites.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(statistic)
}

/// Pearson test of `observed` counts against `probs`. Cells whose expected
/// count falls below 5 are pooled, in order, until the pool reaches 5.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let total_f = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total_f;
        if e >= 5.0 {
            cells.push((o as f64, e));
        } else {
            pool_o += o as f64;
            pool_e += e;
            if pool_e >= 5.0 {
                cells.push((pool_o, pool_e));
                pool_o = 0.0;
                pool_e = 0.0;
            }
        }
    }
    if pool_e > 0.0 || pool_o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pool_o;
                last.1 += pool_e;
            }
            None => cells.push((pool_o, pool_e)),
        }
    }
    let statistic = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = cells.len().saturating_sub(1);
    ChiSquare { statistic, dof, p_value: chi_square_tail(statistic, dof) }
}

/// Pearson two-sample homogeneity test on paired histograms. Cells with a
/// combined count below 10 are pooled.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pa, mut pb) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        pa += x as f64;
        pb += y as f64;
        if pa + pb >= 10.0 {
            cells.push((pa, pb));
            pa = 0.0;
            pb = 0.0;
        }
    }
    if pa + pb > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pa;
                last.1 += pb;
            }
            None => cells.push((pa, pb)),
        }
    }
    let n = na + nb;
    let statistic = cells
        .iter()
        .map(|&(x, y)| {
            let col = x + y;
            let (ea, eb) = (col * na / n, col * nb / n);
            (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb
        })
        .sum();
    let dof = cells.len().saturating_sub(1);
    ChiSquare { statistic, dof, p_value: chi_square_tail(statistic, dof) }
}

/// Median of a sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Median where `None` stands for a censored value larger than every
/// observation. Returns `None` when the median itself is censored.
pub fn censored_median(values: &[Option<u64>]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x.map_or(f64::INFINITY, |t| t as f64)).collect();
    v.sort_by(f64::total_cmp);
    let m = median(&v);
    m.is_finite().then_some(m)
}

/// Least-squares line `y = slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Mean and standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Total-variation distance between two histograms, each normalised by its
/// own total.
pub fn tv_distance(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let d = 0.5 * a.iter().zip(b).map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs()).sum::<f64>();
    d.min(1.0)
}
