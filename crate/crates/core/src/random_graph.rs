//! Erdős–Rényi sampling and the giant-component root equation.

use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::state::{ComponentState, EdgeConfig};

/// Below this mean, binomials are drawn by sequential inversion.
const INVERSION_MEAN_LIMIT: f64 = 12.0;
/// Component sizes below this bound are tallied in a flat array.
const SMALL_SIZE_LIMIT: usize = 512;

/// Request for the component structure of `G(m, p)`.
#[derive(Debug, Clone)]
pub struct GnpRequest {
    pub m: usize,
    pub p: f64,
    pub rng: RngStream,
}

/// Binomial(trials, p) draw.
pub fn binomial(rng: &mut RngStream, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    if p > 0.5 {
        return trials - binomial(rng, trials, 1.0 - p);
    }
    let mean = trials as f64 * p;
    if mean < INVERSION_MEAN_LIMIT {
        binomial_inversion(rng, trials, p, (trials as f64 * (-p).ln_1p()).exp())
    } else {
        Binomial::new(trials, p)
            .expect("p checked to lie in (0, 1)")
            .sample(rng)
    }
}

/// Sequential inversion, given `prob0 = (1-p)^trials`.
#[inline]
fn binomial_inversion(rng: &mut RngStream, trials: u64, p: f64, prob0: f64) -> u64 {
    let odds = p / (1.0 - p);
    let mut u = rng.unit();
    let mut prob = prob0;
    let mut k = 0u64;
    while u >= prob {
        u -= prob;
        k += 1;
        if k >= trials {
            return trials;
        }
        prob *= odds * (trials - k + 1) as f64 / k as f64;
    }
    k
}

/// Geometric number of failures before the first success, by inverting the
/// CDF with a logarithm. `log_fail = ln(1 - p)`.
#[inline]
fn geometric_skip(rng: &mut RngStream, log_fail: f64) -> u64 {
    let g = rng.open01().ln() / log_fail;
    if g >= u64::MAX as f64 {
        u64::MAX
    } else {
        g as u64
    }
}

/// Calls `visit(i, j)` for each pair `i < j < k` independently with
/// probability `p`, in lexicographic order. Cost is proportional to the
/// number of pairs selected.
pub fn for_each_bernoulli_pair<F: FnMut(usize, usize)>(
    k: usize,
    p: f64,
    rng: &mut RngStream,
    mut visit: F,
) {
    if k < 2 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for i in 0..k {
            for j in i + 1..k {
                visit(i, j);
            }
        }
        return;
    }
    let total = (k as u64) * (k as u64 - 1) / 2;
    let log_fail = (-p).ln_1p();
    let mut row = 0usize;
    let mut row_start = 0u64; // linear index of pair (row, row + 1)
    let mut pos = geometric_skip(rng, log_fail);
    while pos < total {
        while pos >= row_start + (k - 1 - row) as u64 {
            row_start += (k - 1 - row) as u64;
            row += 1;
        }
        let col = row + 1 + (pos - row_start) as usize;
        visit(row, col);
        pos = match pos
            .checked_add(1)
            .and_then(|x| x.checked_add(geometric_skip(rng, log_fail)))
        {
            Some(x) => x,
            None => break,
        };
    }
}

/// A labelled `G(n, p)` sample.
pub fn sample_gnp_edges(n: usize, p: f64, rng: &mut RngStream) -> EdgeConfig {
    let mut cfg = EdgeConfig::empty(n);
    for_each_bernoulli_pair(n, p, rng, |u, v| {
        cfg.insert(u, v);
    });
    cfg
}

/// Tally of component sizes produced by percolation.
#[derive(Debug, Default)]
pub(crate) struct SizeTally {
    small: Vec<usize>,
    large: Vec<usize>,
    touched: usize,
}

impl SizeTally {
    pub(crate) fn new() -> Self {
        Self {
            small: vec![0; SMALL_SIZE_LIMIT],
            large: Vec::new(),
            touched: 0,
        }
    }

    #[inline]
    fn record(&mut self, size: usize) {
        if size < SMALL_SIZE_LIMIT {
            self.small[size] += 1;
            self.touched = self.touched.max(size);
        } else {
            self.large.push(size);
        }
    }

    pub(crate) fn record_many(&mut self, size: usize, count: usize) {
        if size < SMALL_SIZE_LIMIT {
            self.small[size] += count;
            if count > 0 {
                self.touched = self.touched.max(size);
            }
        } else {
            self.large.extend(std::iter::repeat_n(size, count));
        }
    }

    /// Drains the tally into `(size, count)` classes in decreasing size order.
    pub(crate) fn drain_classes(&mut self) -> Vec<(usize, usize)> {
        self.large.sort_unstable_by(|a, b| b.cmp(a));
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &s in &self.large {
            match out.last_mut() {
                Some((size, c)) if *size == s => *c += 1,
                _ => out.push((s, 1)),
            }
        }
        self.large.clear();
        for s in (1..=self.touched).rev() {
            let c = std::mem::take(&mut self.small[s]);
            if c > 0 {
                out.push((s, c));
            }
        }
        self.touched = 0;
        out
    }
}

/// Explores `G(m, p)` one vertex at a time. Each explored vertex is joined
/// to a Binomial(unseen, p) number of unseen vertices, which yields the
/// component-size multiset with exactly the `G(m, p)` law in O(m) draws.
pub(crate) fn percolate_into(m: usize, p: f64, rng: &mut RngStream, tally: &mut SizeTally) {
    if m == 0 {
        return;
    }
    if p <= 0.0 {
        tally.small[1] += m;
        tally.touched = tally.touched.max(1);
        return;
    }
    if p >= 1.0 {
        tally.record(m);
        return;
    }
    let log_fail = (-p).ln_1p();
    if (m as f64) * p >= INVERSION_MEAN_LIMIT || p > 0.5 {
        let mut unseen = m as u64;
        while unseen > 0 {
            unseen -= 1;
            let mut size = 1u64;
            let mut frontier = 1u64;
            while frontier > 0 && unseen > 0 {
                frontier -= 1;
                let k = binomial(rng, unseen, p);
                unseen -= k;
                frontier += k;
                size += k;
            }
            tally.record(size as usize);
        }
        return;
    }
    // Every draw below has mean under the inversion limit. P(K = 0) =
    // (1-p)^unseen is refreshed from the exact power after each draw that
    // removes many vertices, and updated by a tabulated factor otherwise.
    let odds = p / (1.0 - p);
    let inv: [f64; INV_TABLE] = std::array::from_fn(|k| if k == 0 { 0.0 } else { 1.0 / k as f64 });
    let grow: [f64; INV_TABLE] = std::array::from_fn(|d| (-(d as f64) * log_fail).exp());
    let mut unseen = m as u64;
    let mut prob0 = (unseen as f64 * log_fail).exp();
    let mut since_refresh = 0u32;
    let mut take = |unseen: &mut u64, prob0: &mut f64, d: u64| {
        *unseen -= d;
        since_refresh += 1;
        if (d as usize) < INV_TABLE && since_refresh < 64 {
            *prob0 *= grow[d as usize];
        } else {
            *prob0 = (*unseen as f64 * log_fail).exp();
            since_refresh = 0;
        }
    };
    while unseen > 0 {
        take(&mut unseen, &mut prob0, 1);
        let mut size = 1u64;
        let mut frontier = 1u64;
        while frontier > 0 && unseen > 0 {
            frontier -= 1;
            let k = inversion_small(rng, unseen, odds, prob0, &inv);
            if k > 0 {
                take(&mut unseen, &mut prob0, k);
            }
            frontier += k;
            size += k;
        }
        tally.record(size as usize);
    }
}

const INV_TABLE: usize = 64;

/// Sequential inversion with tabulated reciprocals.
#[inline]
fn inversion_small(rng: &mut RngStream, trials: u64, odds: f64, prob0: f64, inv: &[f64; INV_TABLE]) -> u64 {
    let mut u = rng.unit();
    let mut prob = prob0;
    let mut k = 0u64;
    while u >= prob {
        u -= prob;
        k += 1;
        if k >= trials {
            return trials;
        }
        let r = if (k as usize) < INV_TABLE { inv[k as usize] } else { 1.0 / k as f64 };
        prob *= odds * (trials - k + 1) as f64 * r;
    }
    k
}

/// Component sizes of `G(m, p)`.
pub fn sample_gnp_components(req: GnpRequest) -> ComponentState {
    let GnpRequest { m, p, mut rng } = req;
    gnp_components(m, p, &mut rng)
}

/// Component sizes of `G(m, p)`, drawing from a borrowed stream.
pub fn gnp_components(m: usize, p: f64, rng: &mut RngStream) -> ComponentState {
    let mut tally = SizeTally::new();
    percolate_into(m, p, rng, &mut tally);
    ComponentState::from_parts_unchecked(m, tally.drain_classes())
}

/// Validates a [`GnpRequest`].
pub fn check_request(req: &GnpRequest) -> Result<()> {
    if !(0.0..=1.0).contains(&req.p) {
        return Err(Error::InvalidParams(format!("p = {} outside [0, 1]", req.p)));
    }
    Ok(())
}

/// Positive root of `e^{-d x} = 1 - x`, or 0 when `d <= 1 + 1e-9`.
///
/// The trivial root `x = 0` is excluded by bracketing on `[1e-12, 1]`.
/// Bisection runs until the bracket is 1e-9 wide, then Newton polishes.
pub fn beta(d: f64) -> f64 {
    if !(d > 1.0 + 1e-9) {
        return 0.0;
    }
    if d.is_infinite() {
        return 1.0;
    }
    let g = |x: f64| (-d * x).exp_m1() + x;
    let (mut lo, mut hi) = (1e-12, 1.0);
    if g(lo) >= 0.0 {
        return lo;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let gx = g(x);
        let dg = 1.0 - d * (-d * x).exp();
        if dg == 0.0 {
            break;
        }
        let next = (x - gx / dg).clamp(lo.min(x), hi.max(x));
        let done = (next - x).abs() <= 1e-16 * x.max(1e-300);
        x = next;
        if done || gx.abs() <= 1e-16 {
            break;
        }
    }
    x
}

/// `|e^{-d x} - (1 - x)|` at `x`.
pub fn beta_residual(d: f64, x: f64) -> f64 {
    ((-d * x).exp() - (1.0 - x)).abs()
}
