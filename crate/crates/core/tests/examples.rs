//! Worked examples: small deterministic cases and moderate Monte Carlo
//! checks with analytically known targets.

use mfrc::coupling::{coupling_time, random_relabel, CouplingTime};
use mfrc::dynamics::{cut_edge_probability, hb_step, pair_from_index};
use mfrc::exact::{build_p_hb, StateIndex};
use mfrc::experiments::{
    drift_validation, escape_time, slow_start_components, slow_start_time, tv_mixing_estimate, Band, Start,
};
use mfrc::phase::Drift;
use mfrc::random_graph::sample_gnp_edges;
use mfrc::stats::{mean_and_se, median};
use mfrc::{EdgeConfig, ModelParams, RngStream};

#[test]
fn heat_bath_thresholds() {
    assert!((cut_edge_probability(0.5, 2.0) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(cut_edge_probability(0.3, 1.0), 0.3);
    // From the empty graph on K_3 every pair is a cut pair; the row puts
    // 1/3 · p/(p+q(1−p)) on each single edge.
    let params = ModelParams::new(3, 2.0, 1.5).unwrap();
    let p_hb = build_p_hb(3, &params).unwrap();
    let space = StateIndex::new(3).unwrap();
    let single = |e: usize| space.mask_of(&EdgeConfig::from_edges(3, [space.pairs()[e]]).unwrap());
    for e in 0..3 {
        assert!((p_hb[(0, single(e))] - cut_edge_probability(0.5, 2.0) / 3.0).abs() < 1e-15);
    }
    // In a triangle no edge is a cut edge, so removal has probability 1 − p.
    let tri = space.len() - 1;
    let two = tri & !(1 << 0);
    assert!((p_hb[(tri, two)] - (1.0 - 0.5) / 3.0).abs() < 1e-15);
}

#[test]
fn heat_bath_empirical_cut_rate() {
    let params = ModelParams::new(3, 2.0, 1.5).unwrap();
    let empty = EdgeConfig::empty(3);
    let mut rng = RngStream::new(11);
    let trials = 200_000;
    let added = (0..trials).filter(|_| hb_step(&empty, &params, &mut rng).num_edges() == 1).count();
    let rate = added as f64 / trials as f64;
    assert!((rate - 1.0 / 3.0).abs() < 0.005, "{rate}");
}

#[test]
fn pair_indexing_is_lexicographic() {
    assert_eq!(pair_from_index(4, 0), (0, 1));
    assert_eq!(pair_from_index(4, 2), (0, 3));
    assert_eq!(pair_from_index(4, 3), (1, 2));
    assert_eq!(pair_from_index(4, 5), (2, 3));
}

#[test]
fn single_component_slow_start_is_geometric() {
    let params = ModelParams::new(50, 2.5, 1.0).unwrap();
    let root = RngStream::new(12);
    let times: Vec<f64> = (0..100_000)
        .map(|i| slow_start_time(&params, 50, &mut root.split(i)).unwrap() as f64)
        .collect();
    let (mean, se) = mean_and_se(&times);
    assert!((mean - 2.5).abs() < 4.0 * se, "{mean} ± {se}");
}

#[test]
fn slow_start_follows_the_coupon_collector_law() {
    let q: f64 = 2.0;
    let base = q / (q - 1.0);
    let size = (1e5f64.ln().powi(2)).ceil() as usize;
    let mut means = Vec::new();
    for (k, n) in [100_000usize, 200_000].into_iter().enumerate() {
        let params = ModelParams::new(n, q, 1.0).unwrap();
        let root = RngStream::new(13).split(k as u64);
        let times: Vec<f64> = (0..20_000)
            .map(|i| slow_start_time(&params, size, &mut root.split(i)).unwrap() as f64)
            .collect();
        let comps = slow_start_components(n, size) as f64;
        let target = comps.ln() / base.ln();
        let med = median(&times);
        if n == 100_000 {
            assert!((med - target).abs() <= 0.3 * target, "median {med} vs {target}");
        }
        means.push((mean_and_se(&times).0, comps));
    }
    let shift = means[1].0 - means[0].0;
    let expected = (means[1].1 / means[0].1).ln() / base.ln();
    assert!((shift - expected).abs() < 0.15, "{shift} vs {expected}");
}

#[test]
fn drift_is_negative_above_theta_r_when_supercritical() {
    let params = ModelParams::new(20_000, 2.0, 3.0).unwrap();
    let theta_r = Drift::new(2.0, 3.0).unwrap().theta_r().unwrap();
    let grid = [0.5 * (theta_r + 1.0), 1.0];
    let points = drift_validation(&params, &grid, 2_000, &RngStream::new(14)).unwrap();
    for p in points {
        assert!(p.empirical < p.theta, "{p:?}");
        assert!(p.empirical >= theta_r - 0.01, "{p:?}");
    }
}

#[test]
fn drift_is_bounded_below_lambda_s() {
    // λ = 3 < λ_s(4); the drift domain is (1/9, 1].
    let params = ModelParams::new(100_000, 4.0, 3.0).unwrap();
    let drift = Drift::new(4.0, 3.0).unwrap();
    let (_, delta) = drift.min_f(10_000).unwrap();
    assert!(delta > 0.0);
    let grid = [0.3, 0.6, 0.9];
    let points = drift_validation(&params, &grid, 500, &RngStream::new(15)).unwrap();
    for p in points {
        assert!(p.empirical <= p.theta - delta / 2.0, "{p:?}, delta {delta}");
    }
}

#[test]
fn identical_starts_have_zero_tv_proxy() {
    let params = ModelParams::new(500, 2.0, 3.0).unwrap();
    let run = tv_mixing_estimate(&params, (Start::Full, Start::Full), 10, 1_000, None, &RngStream::new(16)).unwrap();
    assert_eq!(run.mixing_proxy, Some(0));
    assert_eq!(run.estimates[0].tv, 0.0);
}

#[test]
fn tv_estimates_are_monotone_smoothed_and_bounded() {
    let params = ModelParams::new(1_000, 2.0, 3.0).unwrap();
    let run = tv_mixing_estimate(&params, (Start::Full, Start::Empty), 200, 1_000, None, &RngStream::new(17)).unwrap();
    assert!(run.mixing_proxy.is_some());
    for w in run.estimates.windows(2) {
        assert!(w[1].tv_smoothed <= w[0].tv_smoothed);
    }
    assert!(run.estimates.iter().all(|e| (0.0..=1.0).contains(&e.tv) && e.bins == 32));
}

#[test]
fn swapped_start_labels_give_the_same_proxy_law() {
    let params = ModelParams::new(1_000, 2.0, 3.0).unwrap();
    let root = RngStream::new(18);
    let mut diffs = Vec::new();
    for k in 0..10u64 {
        let a = tv_mixing_estimate(&params, (Start::Full, Start::Empty), 500, 1_000, None, &root.split(2 * k)).unwrap();
        let b = tv_mixing_estimate(&params, (Start::Empty, Start::Full), 500, 1_000, None, &root.split(2 * k + 1)).unwrap();
        diffs.push(a.mixing_proxy.unwrap() as f64 - b.mixing_proxy.unwrap() as f64);
    }
    let (mean, _) = mean_and_se(&diffs);
    assert!(mean.abs() <= 1.5, "{diffs:?}");
}

#[test]
fn bin_count_changes_proxy_by_at_most_a_fifth() {
    // Fast-mixing benchmark size: 10^4 replicas, so 100 bins by default.
    let params = ModelParams::new(1_000, 2.0, 3.0).unwrap();
    let rng = RngStream::new(19);
    let proxy = |bins: Option<usize>| {
        tv_mixing_estimate(&params, (Start::Full, Start::Empty), 500, 10_000, bins, &rng)
            .unwrap()
            .mixing_proxy
            .unwrap() as f64
    };
    let base = proxy(None);
    for bins in [50, 200] {
        let other = proxy(Some(bins));
        assert!((other - base).abs() <= 0.2 * base, "bins {bins}: {other} vs {base}");
    }
}

#[test]
fn supercritical_upward_escape_is_fast() {
    let params = ModelParams::new(5_000, 2.0, 3.0).unwrap();
    let band = Band { lo: 0.0, hi: 0.3 };
    let root = RngStream::new(20);
    let times: Vec<f64> = (0..50)
        .map(|i| escape_time(&params, 1.0 / 5_000.0, band, 10_000, &mut root.split(i)).unwrap().unwrap() as f64)
        .collect();
    assert!(median(&times) <= 50.0 * 5_000f64.ln());
}

#[test]
fn escape_from_outside_the_band_is_immediate() {
    let params = ModelParams::new(100, 2.0, 3.0).unwrap();
    let band = Band { lo: 0.5, hi: 1.0 };
    assert_eq!(escape_time(&params, 0.2, band, 10, &mut RngStream::new(21)).unwrap(), Some(0));
    assert!(escape_time(&params, 0.2, Band { lo: 0.5, hi: 0.4 }, 10, &mut RngStream::new(21)).is_err());
}

#[test]
fn full_activation_couples_in_one_step() {
    // With q = 1 every component activates in both copies, so every vertex
    // is fixed and the percolations coincide.
    let params = ModelParams::oracle(40, 1.0, 1.5).unwrap();
    let mut rng = RngStream::new(22);
    let x = sample_gnp_edges(40, params.p(), &mut rng);
    let y = random_relabel(&x, &mut rng);
    let expected = if x == y { 0 } else { 1 };
    assert_eq!(coupling_time(x, y, &params, 5, &mut rng).unwrap(), CouplingTime::Coupled(expected));
}

#[test]
fn mismatched_structures_cannot_be_coupled() {
    let params = ModelParams::new(5, 2.0, 1.0).unwrap();
    let x = EdgeConfig::clique(5, 3);
    let y = EdgeConfig::clique(5, 2);
    assert!(coupling_time(x, y, &params, 5, &mut RngStream::new(23)).is_err());
}
