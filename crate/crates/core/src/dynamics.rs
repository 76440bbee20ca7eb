//! One-step kernels of the CM, heat-bath and single-update chains, and
//! trajectory recording.
//!
//! `cm_step` works on component sizes only. This is enough because the
//! percolation sub-step depends on the configuration only through the number
//! of active vertices; `cm_step_edges` is the literal edge-level version and
//! serves as its cross-check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::random_graph::{for_each_bernoulli_pair, percolate_into, SizeTally};
use crate::rng::RngStream;
use crate::state::{component_sizes, ComponentState, EdgeConfig};

/// Result of one CM step on component sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct CmOutcome {
    pub state: ComponentState,
    /// Number of activated vertices A_t.
    pub active: usize,
    /// Whether the designated largest component was activated.
    pub giant_active: bool,
}

/// Activation of a [`ComponentState`]; the inactive part is written into
/// `tally`.
struct Activation {
    active: usize,
    giant_active: bool,
}

fn activate_classes(
    state: &ComponentState,
    q: f64,
    rng: &mut RngStream,
    tally: &mut SizeTally,
    force_giant: bool,
) -> Activation {
    let r = 1.0 / q;
    let mut active = 0usize;
    let mut giant_active = false;
    for (i, &(size, count)) in state.classes().iter().enumerate() {
        let mut k = 0usize;
        let mut rest = count;
        if i == 0 {
            // The first component of the largest class is tracked on its own.
            giant_active = force_giant || rng.bernoulli(r);
            k += giant_active as usize;
            rest -= 1;
        }
        k += crate::random_graph::binomial(rng, rest as u64, r) as usize;
        active += k * size;
        tally.record_many(size, count - k);
    }
    Activation { active, giant_active }
}

fn cm_from_activation(
    state: &ComponentState,
    params: &ModelParams,
    rng: &mut RngStream,
    force_giant: bool,
) -> CmOutcome {
    let mut tally = SizeTally::new();
    let act = activate_classes(state, params.q(), rng, &mut tally, force_giant);
    percolate_into(act.active, params.p(), rng, &mut tally);
    CmOutcome {
        state: ComponentState::from_parts_unchecked(state.n(), tally.drain_classes()),
        active: act.active,
        giant_active: act.giant_active,
    }
}

/// One CM step on component sizes.
pub fn cm_step(state: &ComponentState, params: &ModelParams, rng: &mut RngStream) -> ComponentState {
    cm_step_detailed(state, params, rng).state
}

/// One CM step, also reporting A_t and whether the largest component was
/// activated.
pub fn cm_step_detailed(
    state: &ComponentState,
    params: &ModelParams,
    rng: &mut RngStream,
) -> CmOutcome {
    cm_from_activation(state, params, rng, false)
}

/// One CM step conditioned on the largest component being active.
///
/// Activation of the other components is independent of the giant's, so
/// conditioning amounts to activating the giant with probability one. With
/// `rejection` set, activation is instead redrawn until the giant is active,
/// following the conditional law by definition.
pub fn cm_step_given_giant(
    state: &ComponentState,
    params: &ModelParams,
    rng: &mut RngStream,
    rejection: bool,
) -> CmOutcome {
    if !rejection {
        return cm_from_activation(state, params, rng, true);
    }
    loop {
        let mut tally = SizeTally::new();
        let act = activate_classes(state, params.q(), rng, &mut tally, false);
        if act.giant_active {
            percolate_into(act.active, params.p(), rng, &mut tally);
            return CmOutcome {
                state: ComponentState::from_parts_unchecked(state.n(), tally.drain_classes()),
                active: act.active,
                giant_active: true,
            };
        }
    }
}

/// Activates each component of `cfg` independently with probability `1/q`.
/// Returns per-vertex flags, the active count, and whether the designated
/// largest component (lowest label among those of maximal size) is active.
pub fn activate_components(cfg: &EdgeConfig, q: f64, rng: &mut RngStream) -> (Vec<bool>, usize, bool) {
    let comps = cfg.components();
    let on: Vec<bool> = (0..comps.count()).map(|_| rng.bernoulli(1.0 / q)).collect();
    let giant = (0..comps.count())
        .max_by(|&a, &b| comps.sizes[a].cmp(&comps.sizes[b]).then(b.cmp(&a)))
        .map(|g| on[g])
        .unwrap_or(false);
    let flags: Vec<bool> = comps.label.iter().map(|&c| on[c]).collect();
    let active = flags.iter().filter(|&&a| a).count();
    (flags, active, giant)
}

/// Literal edge-level CM step, also returning A_t and the giant flag.
pub fn cm_step_edges_detailed(
    cfg: &EdgeConfig,
    params: &ModelParams,
    rng: &mut RngStream,
) -> (EdgeConfig, usize, bool) {
    let (flags, active, giant) = activate_components(cfg, params.q(), rng);
    let mut out = cfg.clone();
    out.clear_within(&flags);
    let members: Vec<usize> = (0..flags.len()).filter(|&v| flags[v]).collect();
    for_each_bernoulli_pair(members.len(), params.p(), rng, |i, j| {
        out.insert(members[i], members[j]);
    });
    (out, active, giant)
}

pub fn cm_step_edges(cfg: &EdgeConfig, params: &ModelParams, rng: &mut RngStream) -> EdgeConfig {
    cm_step_edges_detailed(cfg, params, rng).0
}

/// Maps a linear index in `0..n(n-1)/2` to the pair it names in
/// lexicographic order.
pub fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    for u in 0..n {
        let row = n - 1 - u;
        if k < row {
            return (u, u + 1 + k);
        }
        k -= row;
    }
    panic!("pair index out of range for n = {n}");
}

fn uniform_pair(n: usize, rng: &mut RngStream) -> (usize, usize) {
    let pairs = n * (n - 1) / 2;
    pair_from_index(n, rng.below(pairs as u64) as usize)
}

/// Inclusion probability of a cut edge under the heat-bath rule.
pub fn cut_edge_probability(p: f64, q: f64) -> f64 {
    p / (p + q * (1.0 - p))
}

/// One heat-bath step: resample a uniform pair from its conditional law.
pub fn hb_step(cfg: &EdgeConfig, params: &ModelParams, rng: &mut RngStream) -> EdgeConfig {
    let mut out = cfg.clone();
    if cfg.n() < 2 {
        return out;
    }
    let (u, v) = uniform_pair(cfg.n(), rng);
    let p = params.p();
    let keep = if cfg.connected_without_edge(u, v) {
        p
    } else {
        cut_edge_probability(p, params.q())
    };
    out.set(u, v, rng.bernoulli(keep));
    out
}

/// One single-update step.
///
/// Only the activation of the two components touching the chosen pair
/// matters, so it is drawn lazily: probability `1/q` when the endpoints
/// already share a component, `1/q²` otherwise.
pub fn su_step(cfg: &EdgeConfig, params: &ModelParams, rng: &mut RngStream) -> EdgeConfig {
    let mut out = cfg.clone();
    if cfg.n() < 2 {
        return out;
    }
    let (u, v) = uniform_pair(cfg.n(), rng);
    let r = 1.0 / params.q();
    let joined = cfg.contains(u, v) || cfg.connected_without_edge(u, v);
    let both_active = if joined {
        rng.bernoulli(r)
    } else {
        rng.bernoulli(r) & rng.bernoulli(r)
    };
    if both_active {
        out.set(u, v, rng.bernoulli(params.p()));
    }
    out
}

/// Which chain to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsKind {
    Cm,
    CmEdges,
    Hb,
    Su,
}

impl DynamicsKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cm" => Ok(Self::Cm),
            "cm-edges" | "cm_edges" => Ok(Self::CmEdges),
            "hb" => Ok(Self::Hb),
            "su" => Ok(Self::Su),
            other => Err(Error::Parse(format!("unknown dynamics '{other}'"))),
        }
    }

    pub fn uses_components(self) -> bool {
        self == Self::Cm
    }
}

/// Initial state of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum InitState {
    Components(ComponentState),
    Edges(EdgeConfig),
}

impl InitState {
    /// Builds one of the standard starts: `empty`, `full` or `giant:<theta>`,
    /// a clique on `round(θn)` vertices plus singletons.
    pub fn standard(spec: &str, n: usize, kind: DynamicsKind) -> Result<Self> {
        let giant = match spec {
            "empty" => 1,
            "full" => n,
            other => {
                let theta: f64 = other
                    .strip_prefix("giant:")
                    .ok_or_else(|| Error::Parse(format!("unknown init '{other}'")))?
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad giant fraction in '{other}'")))?;
                if !(0.0..=1.0).contains(&theta) {
                    return Err(Error::InvalidState(format!("giant fraction {theta} outside [0, 1]")));
                }
                ((theta * n as f64).round() as usize).max(1)
            }
        };
        Ok(if kind.uses_components() {
            Self::Components(ComponentState::giant_plus_singletons(n, giant)?)
        } else {
            Self::Edges(EdgeConfig::clique(n, giant))
        })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Components(s) => s.n(),
            Self::Edges(c) => c.n(),
        }
    }
}

/// One trace row. `active` and `giant_active` are absent where the chain
/// has no global activation (heat-bath, single-update) and on row 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub t: u64,
    pub l1: usize,
    pub l2: usize,
    pub isolated: usize,
    pub chi: u128,
    pub active: Option<usize>,
    pub giant_active: Option<bool>,
}

impl TraceRow {
    pub const CSV_HEADER: &'static str = "t,L1,L2,I,chi,active,giant_active";

    fn observe(t: u64, s: &ComponentState, active: Option<usize>, giant_active: Option<bool>) -> Self {
        Self {
            t,
            l1: s.largest(),
            l2: s.second(),
            isolated: s.isolated(),
            chi: s.chi(),
            active,
            giant_active,
        }
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<String>| x.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.t,
            self.l1,
            self.l2,
            self.isolated,
            self.chi,
            opt(self.active.map(|a| a.to_string())),
            opt(self.giant_active.map(|g| (g as u8).to_string())),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TraceRow::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }
}

/// Runs `steps` steps, handing every `record_every`-th row (and row 0) to
/// `sink`. Returns the final state.
pub fn run_trajectory_streaming<F: FnMut(&TraceRow)>(
    kind: DynamicsKind,
    init: InitState,
    params: &ModelParams,
    steps: u64,
    record_every: u64,
    rng: &mut RngStream,
    mut sink: F,
) -> Result<InitState> {
    if init.n() != params.n() {
        return Err(Error::InvalidState(format!(
            "initial state has n = {}, parameters have n = {}",
            init.n(),
            params.n()
        )));
    }
    let every = record_every.max(1);
    match (kind, init) {
        (DynamicsKind::Cm, InitState::Components(mut s)) => {
            sink(&TraceRow::observe(0, &s, None, None));
            for t in 1..=steps {
                let out = cm_step_detailed(&s, params, rng);
                s = out.state;
                if t % every == 0 {
                    sink(&TraceRow::observe(t, &s, Some(out.active), Some(out.giant_active)));
                }
            }
            Ok(InitState::Components(s))
        }
        (DynamicsKind::Cm, InitState::Edges(_)) => Err(Error::RepresentationMismatch(
            "cm runs on component sizes; use cm-edges for edge configurations".into(),
        )),
        (_, InitState::Components(_)) => Err(Error::RepresentationMismatch(format!(
            "{kind:?} runs on edge configurations"
        ))),
        (kind, InitState::Edges(mut c)) => {
            sink(&TraceRow::observe(0, &component_sizes(&c), None, None));
            for t in 1..=steps {
                let (next, active, giant) = match kind {
                    DynamicsKind::CmEdges => {
                        let (c2, a, g) = cm_step_edges_detailed(&c, params, rng);
                        (c2, Some(a), Some(g))
                    }
                    DynamicsKind::Hb => (hb_step(&c, params, rng), None, None),
                    DynamicsKind::Su => (su_step(&c, params, rng), None, None),
                    DynamicsKind::Cm => unreachable!(),
                };
                c = next;
                if t % every == 0 {
                    sink(&TraceRow::observe(t, &component_sizes(&c), active, giant));
                }
            }
            Ok(InitState::Edges(c))
        }
    }
}

/// Buffered form of [`run_trajectory_streaming`].
pub fn run_trajectory(
    kind: DynamicsKind,
    init: InitState,
    params: &ModelParams,
    steps: u64,
    record_every: u64,
    rng: &mut RngStream,
) -> Result<Trace> {
    let mut trace = Trace::default();
    run_trajectory_streaming(kind, init, params, steps, record_every, rng, |r| {
        trace.rows.push(r.clone())
    })?;
    Ok(trace)
}
