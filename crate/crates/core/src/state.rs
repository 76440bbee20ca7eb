//! State representations: component-size multisets and explicit edge sets.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::dsu::DisjointSet;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Multiset of component sizes, stored as `(size, count)` classes in strictly
/// decreasing size order.
///
/// Sizes are kept run-length encoded: a configuration with `10^6` vertices
/// that is mostly isolated vertices has only a handful of classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ComponentState {
    n: usize,
    classes: Vec<(usize, usize)>,
}

impl ComponentState {
    pub fn from_sizes<I: IntoIterator<Item = usize>>(n: usize, sizes: I) -> Result<Self> {
        let mut sizes: Vec<usize> = sizes.into_iter().collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut classes: Vec<(usize, usize)> = Vec::new();
        for s in sizes {
            match classes.last_mut() {
                Some((size, count)) if *size == s => *count += 1,
                _ => classes.push((s, 1)),
            }
        }
        Self::from_classes(n, classes)
    }

    /// Builds from `(size, count)` pairs in any order; merges duplicates and
    /// drops zero counts.
    pub fn from_classes(n: usize, mut classes: Vec<(usize, usize)>) -> Result<Self> {
        classes.retain(|&(_, c)| c > 0);
        if classes.iter().any(|&(s, _)| s == 0) {
            return Err(Error::InvalidState("component of size 0".into()));
        }
        classes.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        classes.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        let total: usize = classes.iter().map(|&(s, c)| s * c).sum();
        if total != n {
            return Err(Error::InvalidState(format!(
                "component sizes sum to {total}, expected {n}"
            )));
        }
        Ok(Self { n, classes })
    }

    /// Merges sorted class lists without re-validating the total.
    pub(crate) fn from_parts_unchecked(n: usize, classes: Vec<(usize, usize)>) -> Self {
        debug_assert!(classes.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert_eq!(classes.iter().map(|&(s, c)| s * c).sum::<usize>(), n);
        Self { n, classes }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            classes: if n == 0 { vec![] } else { vec![(1, n)] },
        }
    }

    pub fn single_component(n: usize) -> Self {
        Self {
            n,
            classes: if n == 0 { vec![] } else { vec![(n, 1)] },
        }
    }

    /// One component of size `giant` plus `n - giant` isolated vertices.
    pub fn giant_plus_singletons(n: usize, giant: usize) -> Result<Self> {
        if giant == 0 || giant > n {
            return Err(Error::InvalidState(format!(
                "giant size {giant} not in 1..={n}"
            )));
        }
        Self::from_classes(n, vec![(giant, 1), (1, n - giant)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> &[(usize, usize)] {
        &self.classes
    }

    /// L_1, the largest component size.
    pub fn largest(&self) -> usize {
        self.classes.first().map_or(0, |&(s, _)| s)
    }

    /// L_2, the second-largest component size (0 if there is only one component).
    pub fn second(&self) -> usize {
        match self.classes.first() {
            Some(&(s, c)) if c >= 2 => s,
            Some(_) => self.classes.get(1).map_or(0, |&(s, _)| s),
            None => 0,
        }
    }

    /// Number of isolated vertices.
    pub fn isolated(&self) -> usize {
        match self.classes.last() {
            Some(&(1, c)) => c,
            _ => 0,
        }
    }

    pub fn num_components(&self) -> usize {
        self.classes.iter().map(|&(_, c)| c).sum()
    }

    /// Sum of squared sizes over all components.
    pub fn susceptibility(&self) -> u128 {
        self.classes
            .iter()
            .map(|&(s, c)| (s as u128) * (s as u128) * c as u128)
            .sum()
    }

    /// Sum of squared sizes excluding the largest component.
    pub fn chi(&self) -> u128 {
        let l1 = self.largest() as u128;
        self.susceptibility() - l1 * l1
    }

    /// Sizes in non-increasing order.
    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .flat_map(|&(s, c)| std::iter::repeat(s).take(c))
    }

    pub fn to_text(&self) -> String {
        let sizes: Vec<String> = self.sizes().map(|s| s.to_string()).collect();
        format!("n {}\n{}\n", self.n, sizes.join(" "))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n = parse_header(lines.next())?;
        let sizes = lines
            .flat_map(|l| l.split_whitespace())
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad size {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if sizes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parse("sizes must be non-increasing".into()));
        }
        Self::from_sizes(n, sizes)
    }
}

impl fmt::Display for ComponentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.sizes().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

fn parse_header(line: Option<&str>) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Parse("missing header".into()))?;
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some("n"), Some(v), None) => v
            .parse()
            .map_err(|e| Error::Parse(format!("bad vertex count {v:?}: {e}"))),
        _ => Err(Error::Parse(format!("expected header `n <count>`, got {line:?}"))),
    }
}

/// Explicit edge subset of the complete graph on `n` vertices.
///
/// Adjacency sets are ordered, so iteration yields edges in canonical
/// `(min, max)` lexicographic order and equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeConfig {
    adj: Vec<BTreeSet<u32>>,
    num_edges: usize,
}

/// Component labelling of an [`EdgeConfig`].
#[derive(Debug, Clone)]
pub struct Components {
    /// Component index of each vertex; indices are assigned in order of the
    /// smallest vertex in each component.
    pub label: Vec<usize>,
    /// Size of each component, indexed by label.
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Vertices of each component, each list sorted ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (v, &c) in self.label.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

impl EdgeConfig {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![BTreeSet::new(); n],
            num_edges: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        Self::clique(n, n)
    }

    /// Complete graph on vertices `0..k`, the rest isolated.
    pub fn clique(n: usize, k: usize) -> Self {
        let mut cfg = Self::empty(n);
        for u in 0..k.min(n) {
            for v in u + 1..k.min(n) {
                cfg.insert(u, v);
            }
        }
        cfg
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut cfg = Self::empty(n);
        for (u, v) in edges {
            if u == v || u >= n || v >= n {
                return Err(Error::InvalidState(format!("invalid edge ({u}, {v}) for n = {n}")));
            }
            if !cfg.insert(u, v) {
                return Err(Error::InvalidState(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&(v as u32))
    }

    /// Returns true if the edge was absent.
    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        debug_assert!(u != v);
        let added = self.adj[u].insert(v as u32);
        if added {
            self.adj[v].insert(u as u32);
            self.num_edges += 1;
        }
        added
    }

    /// Returns true if the edge was present.
    pub fn remove(&mut self, u: usize, v: usize) -> bool {
        let removed = self.adj[u].remove(&(v as u32));
        if removed {
            self.adj[v].remove(&(u as u32));
            self.num_edges -= 1;
        }
        removed
    }

    pub fn set(&mut self, u: usize, v: usize, present: bool) {
        if present {
            self.insert(u, v);
        } else {
            self.remove(u, v);
        }
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u].iter().map(|&v| v as usize)
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, nb)| {
            nb.range(u as u32 + 1..).map(move |&v| (u, v as usize))
        })
    }

    /// Removes every edge with both endpoints in `active` (a per-vertex mask).
    pub fn clear_within(&mut self, active: &[bool]) {
        for u in 0..self.adj.len() {
            if !active[u] {
                continue;
            }
            let doomed: Vec<u32> = self.adj[u]
                .iter()
                .copied()
                .filter(|&v| active[v as usize] && v as usize > u)
                .collect();
            for v in doomed {
                self.remove(u, v as usize);
            }
        }
    }

    /// Whether `u` and `v` are joined by a path that avoids the edge `{u, v}`.
    pub fn connected_without_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::new();
        seen[u] = true;
        queue.push_back(u);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if (x == u && y == v) || (x == v && y == u) || seen[y] {
                    continue;
                }
                if y == v {
                    return true;
                }
                seen[y] = true;
                queue.push_back(y);
            }
        }
        false
    }

    pub fn components(&self) -> Components {
        let n = self.n();
        let mut dsu = DisjointSet::new(n);
        for (u, v) in self.edges() {
            dsu.union(u, v);
        }
        let mut root_label = vec![usize::MAX; n];
        let mut label = vec![0; n];
        let mut sizes = Vec::new();
        for v in 0..n {
            let r = dsu.find(v);
            if root_label[r] == usize::MAX {
                root_label[r] = sizes.len();
                sizes.push(0);
            }
            label[v] = root_label[r];
            sizes[label[v]] += 1;
        }
        Components { label, sizes }
    }

    /// Applies the vertex relabelling `v -> perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::InvalidState("permutation length mismatch".into()));
        }
        Self::from_edges(self.n(), self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n = parse_header(lines.next())?;
        let mut edges = Vec::new();
        for line in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [a, b] = toks.as_slice() else {
                return Err(Error::Parse(format!("expected `u v`, got {line:?}")));
            };
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad vertex {t:?}: {e}")))
            };
            let (u, v) = (parse(a)?, parse(b)?);
            if u >= v {
                return Err(Error::Parse(format!("edge endpoints must satisfy u < v: {line:?}")));
            }
            edges.push((u, v));
        }
        Self::from_edges(n, edges)
    }
}

/// Connected-component sizes of an edge configuration.
pub fn component_sizes(cfg: &EdgeConfig) -> ComponentState {
    let comps = cfg.components();
    ComponentState::from_sizes(cfg.n(), comps.sizes).expect("component sizes always sum to n")
}

/// Unnormalised log-weight `|A| ln p + (|E|-|A|) ln(1-p) + c(A) ln q`.
pub fn log_weight(cfg: &EdgeConfig, params: &ModelParams) -> f64 {
    debug_assert_eq!(cfg.n(), params.n());
    let edges = cfg.num_edges() as f64;
    let closed = (params.num_pairs() - cfg.num_edges()) as f64;
    let p = params.p();
    let comps = cfg.components().count() as f64;
    xlog(edges, p) + xlog(closed, 1.0 - p) + comps * params.q().ln()
}

/// `k ln x` with the convention `0 ln 0 = 0`.
pub(crate) fn xlog(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn bfs_sizes(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut sizes = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut size = 0;
            while let Some(x) = stack.pop() {
                size += 1;
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    #[test]
    fn component_sizes_examples() {
        let cfg = EdgeConfig::empty(4);
        assert_eq!(component_sizes(&cfg).sizes().collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        let cfg = EdgeConfig::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(component_sizes(&cfg).sizes().collect::<Vec<_>>(), vec![3, 1]);
        let cfg = EdgeConfig::complete(3);
        assert_eq!(component_sizes(&cfg).sizes().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn component_sizes_match_bfs_on_random_graphs() {
        let root = RngStream::new(11);
        for i in 0..1000 {
            let mut rng = root.split(i);
            let n = 1 + rng.below(32) as usize;
            let p = rng.unit() * 0.3;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.bernoulli(p) {
                        edges.push((u, v));
                    }
                }
            }
            let cfg = EdgeConfig::from_edges(n, edges.iter().copied()).unwrap();
            let state = component_sizes(&cfg);
            assert_eq!(state.sizes().collect::<Vec<_>>(), bfs_sizes(n, &edges));

            // c(A) = n - rank of a spanning forest.
            let mut dsu = DisjointSet::new(n);
            let rank = edges.iter().filter(|&&(u, v)| dsu.union(u, v)).count();
            assert_eq!(state.num_components(), n - rank);
        }
    }

    #[test]
    fn log_weight_examples() {
        let params = ModelParams::with_p(3, 2.0, 0.5).unwrap();
        let empty = EdgeConfig::empty(3);
        assert!((log_weight(&empty, &params).exp() - 1.0).abs() < 1e-12);
        let tri = EdgeConfig::complete(3);
        assert!((log_weight(&tri, &params).exp() - 0.25).abs() < 1e-12);

        let bern = ModelParams::with_p(4, 1.0, 0.3).unwrap();
        let cfg = EdgeConfig::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let expected = 0.3f64.powi(2) * 0.7f64.powi(4);
        assert!((log_weight(&cfg, &bern).exp() - expected).abs() < 1e-15);
    }

    #[test]
    fn component_state_observables() {
        let s = ComponentState::from_sizes(10, [3, 1, 4, 1, 1]).unwrap();
        assert_eq!(s.largest(), 4);
        assert_eq!(s.second(), 3);
        assert_eq!(s.isolated(), 3);
        assert_eq!(s.num_components(), 5);
        assert_eq!(s.chi(), 9 + 3);
        let t = ComponentState::from_sizes(6, [3, 3]).unwrap();
        assert_eq!(t.second(), 3);
        assert!(ComponentState::from_sizes(5, [3, 1]).is_err());
        assert!(ComponentState::from_sizes(3, [3, 0]).is_err());
        assert_eq!(ComponentState::single_component(5).second(), 0);
    }

    #[test]
    fn text_formats() {
        let s = ComponentState::from_sizes(6, [1, 3, 2]).unwrap();
        assert_eq!(s.to_text(), "n 6\n3 2 1\n");
        assert_eq!(ComponentState::parse(&s.to_text()).unwrap(), s);
        assert!(ComponentState::parse("n 6\n1 3 2\n").is_err());

        let cfg = EdgeConfig::from_edges(5, [(3, 1), (0, 4), (1, 2)]).unwrap();
        assert_eq!(cfg.to_text(), "n 5\n0 4\n1 2\n1 3\n");
        assert_eq!(EdgeConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert!(EdgeConfig::parse("n 3\n2 1\n").is_err());
        assert!(EdgeConfig::parse("n 3\n0 1\n0 1\n").is_err());
        assert!(EdgeConfig::parse("n 3\n0 3\n").is_err());
        assert!(EdgeConfig::parse("x 3\n").is_err());
    }

    #[test]
    fn connectivity_without_edge() {
        let path = EdgeConfig::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        assert!(!path.connected_without_edge(0, 1));
        assert!(path.connected_without_edge(0, 2));
        assert!(!path.connected_without_edge(0, 3));
        let tri = EdgeConfig::complete(3);
        assert!(tri.connected_without_edge(0, 1));
    }

    proptest! {
        #[test]
        fn edge_text_roundtrip(n in 1usize..20, raw in proptest::collection::vec((0usize..20, 0usize..20), 0..40)) {
            let mut cfg = EdgeConfig::empty(n);
            for (a, b) in raw {
                let (a, b) = (a % n, b % n);
                if a != b {
                    cfg.insert(a, b);
                }
            }
            let back = EdgeConfig::parse(&cfg.to_text()).unwrap();
            prop_assert_eq!(&back, &cfg);
            let sizes = component_sizes(&cfg);
            prop_assert_eq!(sizes.sizes().sum::<usize>(), n);
            prop_assert_eq!(ComponentState::parse(&sizes.to_text()).unwrap(), sizes);
        }
    }
}
