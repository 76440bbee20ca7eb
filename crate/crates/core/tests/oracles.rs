//! Statistical comparisons of the samplers and chain steps against exact
//! laws computed by enumeration, and of the two CM representations against
//! each other.

mod common;

use std::collections::BTreeMap;

use mfrc::dynamics::{cm_step, cm_step_detailed, cm_step_edges, cm_step_given_giant, hb_step, su_step};
use mfrc::exact::{build_p_cm, build_p_hb, build_p_su, gnp_size_distribution, StateIndex};
use mfrc::random_graph::{binomial, gnp_components, sample_gnp_edges};
use mfrc::state::component_sizes;
use mfrc::stats::{chi_square_gof, chi_square_two_sample};
use mfrc::{ComponentState, EdgeConfig, ModelParams, RngStream};

use common::{all_partitions, component_row_test, edge_row_test, gof_multisets};

const ALPHA: f64 = 1e-3;

#[test]
fn component_sampler_matches_enumeration() {
    let root = RngStream::new(1);
    for (i, &(m, p)) in [(4, 0.05), (4, 0.7), (5, 0.3), (6, 0.2), (6, 0.9)].iter().enumerate() {
        let law = gnp_size_distribution(m, p).unwrap();
        let mut rng = root.split(i as u64);
        let mut observed = BTreeMap::new();
        for _ in 0..100_000 {
            *observed.entry(gnp_components(m, p, &mut rng).sizes().collect()).or_insert(0u64) += 1;
        }
        let chi = gof_multisets(&observed, &law);
        assert!(chi.p_value > ALPHA, "G({m},{p}): {chi:?}");
    }
}

#[test]
fn edge_sampler_matches_enumeration() {
    let space = StateIndex::new(4).unwrap();
    let p = 0.35;
    let mut rng = RngStream::new(2);
    let mut counts = vec![0u64; space.len()];
    for _ in 0..200_000 {
        counts[space.mask_of(&sample_gnp_edges(4, p, &mut rng))] += 1;
    }
    let probs: Vec<f64> = (0..space.len())
        .map(|mask| {
            let k = (mask as u32).count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(6 - k)
        })
        .collect();
    let chi = chi_square_gof(&counts, &probs);
    assert!(chi.p_value > ALPHA, "{chi:?}");
}

#[test]
fn component_and_edge_samplers_agree_on_larger_graphs() {
    let (m, p) = (300, 1.8 / 300.0);
    let root = RngStream::new(3);
    let (mut a_rng, mut b_rng) = (root.split(0), root.split(1));
    let mut a = vec![0u64; m + 1];
    let mut b = vec![0u64; m + 1];
    for _ in 0..20_000 {
        a[gnp_components(m, p, &mut a_rng).largest()] += 1;
        b[component_sizes(&sample_gnp_edges(m, p, &mut b_rng)).largest()] += 1;
    }
    let chi = chi_square_two_sample(&a, &b);
    assert!(chi.p_value > ALPHA, "{chi:?}");
}

#[test]
fn binomial_matches_pmf() {
    let mut rng = RngStream::new(4);
    for &(trials, p) in &[(10u64, 0.3), (40, 0.02), (200, 0.6)] {
        let mut counts = vec![0u64; trials as usize + 1];
        for _ in 0..100_000 {
            counts[binomial(&mut rng, trials, p) as usize] += 1;
        }
        let mut probs = vec![0.0; trials as usize + 1];
        let mut log_c = 0.0f64;
        for k in 0..=trials {
            if k > 0 {
                log_c += ((trials - k + 1) as f64).ln() - (k as f64).ln();
            }
            probs[k as usize] = (log_c + k as f64 * p.ln() + (trials - k) as f64 * (1.0 - p).ln()).exp();
        }
        let chi = chi_square_gof(&counts, &probs);
        assert!(chi.p_value > ALPHA, "Bin({trials},{p}): {chi:?}");
    }
}

#[test]
fn chain_rows_match_exact_matrices_at_n4() {
    let params = ModelParams::new(4, 3.0, 1.6).unwrap();
    let space = StateIndex::new(4).unwrap();
    let p_cm = build_p_cm(4, &params).unwrap();
    let p_hb = build_p_hb(4, &params).unwrap();
    let p_su = build_p_su(4, &params).unwrap();
    let root = RngStream::new(5);
    for (k, &mask) in [0usize, 5, 0b111, 0b101101, 63].iter().enumerate() {
        let k = k as u64 * 10;
        let chi = edge_row_test(&space, &p_hb, mask, &params, 100_000, &mut root.split(k), hb_step);
        assert!(chi.p_value > ALPHA, "hb from {mask}: {chi:?}");
        let chi = edge_row_test(&space, &p_su, mask, &params, 100_000, &mut root.split(k + 1), su_step);
        assert!(chi.p_value > ALPHA, "su from {mask}: {chi:?}");
        let chi = edge_row_test(&space, &p_cm, mask, &params, 100_000, &mut root.split(k + 2), cm_step_edges);
        assert!(chi.p_value > ALPHA, "cm-edges from {mask}: {chi:?}");
    }
    for (k, start) in all_partitions(4).iter().enumerate() {
        let chi = component_row_test(&space, &p_cm, start, &params, 100_000, &mut root.split(100 + k as u64), cm_step);
        assert!(chi.p_value > ALPHA, "cm from {:?}: {chi:?}", start.classes());
    }
}

#[test]
fn component_and_edge_cm_agree_after_several_steps() {
    let (n, steps, reps) = (80, 6, 20_000);
    let params = ModelParams::new(n, 2.5, 2.8).unwrap();
    let root = RngStream::new(6);
    let (mut ra, mut rb) = (root.split(0), root.split(1));
    let mut a = vec![0u64; n + 1];
    let mut b = vec![0u64; n + 1];
    for _ in 0..reps {
        let mut s = ComponentState::giant_plus_singletons(n, 40).unwrap();
        let mut c = EdgeConfig::clique(n, 40);
        for _ in 0..steps {
            s = cm_step(&s, &params, &mut ra);
            c = cm_step_edges(&c, &params, &mut rb);
        }
        a[s.largest()] += 1;
        b[component_sizes(&c).largest()] += 1;
    }
    let chi = chi_square_two_sample(&a, &b);
    assert!(chi.p_value > ALPHA, "{chi:?}");
}

#[test]
fn conditioning_on_the_giant_matches_restricted_law() {
    // Both conditioned samplers against unconditioned steps kept only when
    // the giant was active.
    let (n, reps) = (60, 40_000);
    let params = ModelParams::new(n, 3.0, 3.0).unwrap();
    let start = ComponentState::from_sizes(n, [30, 10, 10, 5, 5]).unwrap();
    let root = RngStream::new(7);
    let (mut r0, mut r1, mut r2) = (root.split(0), root.split(1), root.split(2));
    let mut restricted = vec![0u64; n + 1];
    let mut kept = 0;
    while kept < reps {
        let out = cm_step_detailed(&start, &params, &mut r0);
        if out.giant_active {
            restricted[out.state.largest()] += 1;
            kept += 1;
        }
    }
    for (rejection, rng) in [(true, &mut r1), (false, &mut r2)] {
        let mut h = vec![0u64; n + 1];
        for _ in 0..reps {
            h[cm_step_given_giant(&start, &params, rng, rejection).state.largest()] += 1;
        }
        let chi = chi_square_two_sample(&h, &restricted);
        assert!(chi.p_value > ALPHA, "rejection={rejection}: {chi:?}");
    }
}
