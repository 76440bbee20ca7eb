//! Monte Carlo experiments: TV-distance mixing proxy, escape times from a
//! phase, the slow start from many mid-size components, conditional drift,
//! and coupling summaries.
//!
//! Replica `r` of any experiment draws from `rng.split(r)`, so results do not
//! depend on how replicas are scheduled across threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::{binomial_coupling_sample, coupling_time_with, random_relabel, CouplingTime};
use crate::dynamics::{cm_step, cm_step_given_giant};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::phase::Drift;
use crate::random_graph::{binomial, sample_gnp_edges};
use crate::rng::RngStream;
use crate::state::ComponentState;
use crate::stats::{censored_median, mean_and_se, tv_distance};

/// Full description of an experiment run; together with the seed it
/// determines every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: String,
    pub n: usize,
    pub q: f64,
    pub lambda: f64,
    pub n_schedule: Vec<usize>,
    pub replicas: usize,
    pub budget: u64,
    pub thresholds: BTreeMap<String, f64>,
    pub seed: u64,
    pub outputs: Vec<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::InvalidParams("replica count must be at least 1".into()));
        }
        if self.n_schedule.is_empty() {
            return Err(Error::InvalidParams("n schedule must not be empty".into()));
        }
        for &n in &self.n_schedule {
            ModelParams::new(n, self.q, self.lambda)?;
        }
        Ok(())
    }
}

/// Extreme starting states of the TV proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// The complete graph: one component.
    Full,
    /// No edges: all singletons.
    Empty,
}

impl Start {
    pub fn state(self, n: usize) -> ComponentState {
        match self {
            Self::Full => ComponentState::single_component(n),
            Self::Empty => ComponentState::singletons(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvEstimate {
    pub t: u64,
    pub tv: f64,
    /// Running minimum of `tv`, a non-increasing smoothing.
    pub tv_smoothed: f64,
    pub replicas: usize,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvRun {
    pub estimates: Vec<TvEstimate>,
    /// First `t` with estimate below 1/4; `None` if the budget ran out.
    pub mixing_proxy: Option<u64>,
}

/// Default bin count, √replicas.
pub fn default_bins(replicas: usize) -> usize {
    ((replicas as f64).sqrt().round() as usize).max(1)
}

fn histogram(values: impl Iterator<Item = f64>, bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for x in values {
        let i = ((x * bins as f64) as usize).min(bins - 1);
        h[i] += 1;
    }
    h
}

/// TV distance between the empirical laws of `L1/n` under CM from two
/// starts, step by step, stopping at the first value below 1/4 (or at
/// `t_max`). Replica `r` runs its two chains on `split(r).split(0)` and
/// `split(r).split(1)`.
pub fn tv_mixing_estimate(
    params: &ModelParams,
    starts: (Start, Start),
    t_max: u64,
    replicas: usize,
    bins: Option<usize>,
    rng: &RngStream,
) -> Result<TvRun> {
    if replicas == 0 {
        return Err(Error::InvalidParams("replica count must be at least 1".into()));
    }
    let n = params.n();
    let bins = bins.unwrap_or_else(|| default_bins(replicas));
    let mut chains: Vec<(ComponentState, ComponentState, RngStream, RngStream)> = (0..replicas)
        .map(|r| {
            let base = rng.split(r as u64);
            (starts.0.state(n), starts.1.state(n), base.split(0), base.split(1))
        })
        .collect();
    let mut estimates = Vec::new();
    let mut best = f64::INFINITY;
    let mut t = 0u64;
    loop {
        let ha = histogram(chains.iter().map(|c| c.0.largest() as f64 / n as f64), bins);
        let hb = histogram(chains.iter().map(|c| c.1.largest() as f64 / n as f64), bins);
        let tv = tv_distance(&ha, &hb);
        best = best.min(tv);
        estimates.push(TvEstimate { t, tv, tv_smoothed: best, replicas, bins });
        if tv < 0.25 {
            return Ok(TvRun { estimates, mixing_proxy: Some(t) });
        }
        if t >= t_max {
            return Ok(TvRun { estimates, mixing_proxy: None });
        }
        t += 1;
        chains.par_iter_mut().for_each(|(a, b, ra, rb)| {
            *a = cm_step(a, params, ra);
            *b = cm_step(b, params, rb);
        });
    }
}

/// Inclusive-exclusive band `(lo, hi]` for `L1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x <= self.hi
    }
}

/// Steps until `L1/n` leaves `band`, starting from one component of
/// `round(θ₀ n)` vertices plus singletons. `None` on timeout.
pub fn escape_time(
    params: &ModelParams,
    theta0: f64,
    band: Band,
    max_steps: u64,
    rng: &mut RngStream,
) -> Result<Option<u64>> {
    let n = params.n();
    if !(theta0 > 0.0 && theta0 <= 1.0) {
        return Err(Error::InvalidState(format!("theta0 = {theta0} outside (0, 1]")));
    }
    if !(0.0..=1.0).contains(&band.lo) || !(0.0..=1.0).contains(&band.hi) || band.lo >= band.hi {
        return Err(Error::InvalidParams(format!("invalid band ({}, {}]", band.lo, band.hi)));
    }
    let giant = ((theta0 * n as f64).round() as usize).clamp(1, n);
    let mut s = ComponentState::giant_plus_singletons(n, giant)?;
    for t in 0..=max_steps {
        if !band.contains(s.largest() as f64 / n as f64) {
            return Ok(Some(t));
        }
        if t == max_steps {
            break;
        }
        s = cm_step(&s, params, rng);
    }
    Ok(None)
}

/// Escape times of `replicas` independent runs.
pub fn escape_times(
    params: &ModelParams,
    theta0: f64,
    band: Band,
    max_steps: u64,
    replicas: usize,
    rng: &RngStream,
) -> Result<Vec<Option<u64>>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| escape_time(params, theta0, band, max_steps, &mut rng.split(r as u64)))
        .collect()
}

/// Steps until each of the initial components has been activated at least
/// once, starting from `⌊n/size⌋` components of `size` vertices plus the
/// remainder as singletons.
///
/// Until its first activation an initial component is untouched by CM, and
/// in every step each such component activates independently with
/// probability 1/q, so only the count of untouched components needs to be
/// simulated.
pub fn slow_start_time(params: &ModelParams, component_size: usize, rng: &mut RngStream) -> Result<u64> {
    let n = params.n();
    if component_size == 0 || component_size > n {
        return Err(Error::InvalidParams(format!(
            "component size must lie in 1..={n}, got {component_size}"
        )));
    }
    let mut remaining = (n / component_size + n % component_size) as u64;
    let stay = 1.0 - 1.0 / params.q();
    let mut t = 0;
    while remaining > 0 {
        remaining = binomial(rng, remaining, stay);
        t += 1;
    }
    Ok(t)
}

/// Number of initial components in [`slow_start_time`].
pub fn slow_start_components(n: usize, component_size: usize) -> usize {
    n / component_size + n % component_size
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftPoint {
    pub theta: f64,
    pub empirical: f64,
    pub std_err: f64,
    pub phi: f64,
    /// `empirical − φ(θ)`.
    pub gap: f64,
}

/// Conditional one-step mean of `L1/n` given that the giant activates, from
/// one component of `round(θn)` vertices plus singletons. Conditioning uses
/// rejection on the activation. Grid point `i` uses `rng.split(i)` and its
/// replica `r` uses `.split(r)` below that.
pub fn drift_validation(
    params: &ModelParams,
    theta_grid: &[f64],
    replicas: usize,
    rng: &RngStream,
) -> Result<Vec<DriftPoint>> {
    let n = params.n();
    let drift = Drift::new(params.q(), params.lambda())?;
    theta_grid
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            let phi = drift.phi(theta)?;
            let giant = ((theta * n as f64).round() as usize).clamp(1, n);
            let start = ComponentState::giant_plus_singletons(n, giant)?;
            let grid_rng = rng.split(i as u64);
            let values: Vec<f64> = (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rr = grid_rng.split(r as u64);
                    cm_step_given_giant(&start, params, &mut rr, true).state.largest() as f64 / n as f64
                })
                .collect();
            let (empirical, std_err) = mean_and_se(&values);
            Ok(DriftPoint { theta, empirical, std_err, phi, gap: empirical - phi })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinomialCouplingSummary {
    pub m: u64,
    pub r: f64,
    pub target: u64,
    pub trials: usize,
    pub success_rate: f64,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
}

/// Repeated draws of the binomial coupling; trial `i` uses `rng.split(i)`.
pub fn binomial_coupling_experiment(
    m: u64,
    r: f64,
    target: u64,
    trials: usize,
    rng: &RngStream,
) -> BinomialCouplingSummary {
    let draws: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|i| binomial_coupling_sample(m, r, target, &mut rng.split(i as u64)))
        .collect();
    let successes = draws.iter().filter(|d| d.success).count();
    BinomialCouplingSummary {
        m,
        r,
        target,
        trials,
        success_rate: successes as f64 / trials as f64,
        x: draws.iter().map(|d| d.x).collect(),
        y: draws.iter().map(|d| d.y).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCouplingSummary {
    pub n: usize,
    pub replicas: usize,
    pub times: Vec<Option<u64>>,
    pub median_time: Option<f64>,
    /// Fraction of (vertex, step) opportunities in which an unfixed vertex
    /// became fixed.
    pub fix_frequency: f64,
}

/// Identity coupling from a `G(n, p)` sample and a uniformly relabelled copy
/// of it. Replica `r` uses `rng.split(r)`.
pub fn identity_coupling_experiment(
    params: &ModelParams,
    replicas: usize,
    max_steps: u64,
    rng: &RngStream,
) -> Result<IdentityCouplingSummary> {
    let results: Vec<(CouplingTime, u64, u64)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rr = rng.split(r as u64);
            let x0 = sample_gnp_edges(params.n(), params.p(), &mut rr);
            let y0 = random_relabel(&x0, &mut rr);
            let (mut fixed, mut chances) = (0u64, 0u64);
            let time = coupling_time_with(x0, y0, params, max_steps, &mut rr, |_, rep| {
                fixed += rep.newly_fixed as u64;
                chances += rep.unfixed_before as u64;
            })?;
            Ok((time, fixed, chances))
        })
        .collect::<Result<_>>()?;
    let times: Vec<Option<u64>> = results.iter().map(|r| r.0.steps()).collect();
    let fixed: u64 = results.iter().map(|r| r.1).sum();
    let chances: u64 = results.iter().map(|r| r.2).sum();
    Ok(IdentityCouplingSummary {
        n: params.n(),
        replicas,
        median_time: censored_median(&times),
        times,
        fix_frequency: if chances == 0 { 1.0 } else { fixed as f64 / chances as f64 },
    })
}
