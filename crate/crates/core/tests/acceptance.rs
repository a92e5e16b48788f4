//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see the lines for passing
//! criteria as well).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cachecast_core::caching::{
    decentralized_place, generate_coded_messages, worst_case_demand, DEFAULT_PLACEMENT_BITS,
};
use cachecast_core::dof_region::{
    brute_force_vertices, corner_points, inner_bound, outer_bound, CornerSource, RegionKind,
};
use cachecast_core::model::{MessageLengthVector, Regime, SystemConfig};
use cachecast_core::ndt::{
    benchmark_group_by_group, benchmark_time_sharing, centralized_worst_lengths,
    centralized_worst_ndt, decentralized_lln_lengths, decentralized_worst_ndt, gap, solve_ndt,
};
use cachecast_core::phy::{design_scheme, sample_channels, simulate_delivery, time_sharing_plan, verify_scheme};
use cachecast_core::DofTuple;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXAMPLE1_F: [f64; 7] = [0.2, 0.1, 0.0, 0.15, 0.25, 0.35, 0.0];
const EXAMPLE1_CORNERS: [[f64; 7]; 3] = [
    [3.0, 0.0, 0.0, 0.0, 0.0, 1.5, 0.0],
    [0.0, 1.5, 0.0, 0.0, 1.5, 1.5, 0.0],
    [0.0, 0.0, 0.0, 1.5, 1.5, 1.5, 0.0],
];

fn example1_cfg() -> SystemConfig {
    SystemConfig::new(3, 5, 3, 4, 100, 0.4, 1000.0).unwrap()
}

fn cfg(k: usize, m: usize, n: usize) -> SystemConfig {
    SystemConfig::new(k, m, n, k.max(4), 100, 0.5, 1000.0).unwrap()
}

/// Runs one criterion, prints a single pass/fail line with the elapsed time,
/// and re-raises any assertion failure so `cargo test` reports it.
fn criterion<F>(number: usize, summary: &str, budget: Option<Duration>, body: F)
where
    F: FnOnce(),
{
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let within_budget = budget.map_or(true, |b| elapsed <= b);
    let pass = result.is_ok() && within_budget;
    println!(
        "acceptance {number:2}: {} ({elapsed:.2?}) {summary}",
        if pass { "PASS" } else { "FAIL" }
    );
    if let Err(payload) = result {
        std::panic::resume_unwind(payload);
    }
    if !within_budget {
        panic!("criterion {number} exceeded its time budget: {elapsed:.2?} > {budget:?}");
    }
}

/// Deterministic (M, N) pairs in the requested regime, smallest first.
fn regime_pairs(k: usize, regime: Regime, count: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=6 {
        for m in 1..=6 * k {
            if cfg(k, m, n).regime() == regime {
                out.push((m, n));
            }
        }
    }
    out.sort_by_key(|&(m, n)| (m + n, m));
    out.truncate(count);
    assert_eq!(out.len(), count, "not enough {regime:?} pairs for K={k}");
    out
}

fn random_f<R: Rng>(rng: &mut R, dim: usize) -> MessageLengthVector {
    MessageLengthVector((0..dim).map(|_| rng.gen::<f64>()).collect())
}

#[test]
fn criterion_01_example1_ndt() {
    criterion(
        1,
        "Example 1: tau_a = 7/30, d_star and phase weights match",
        Some(Duration::from_secs(1)),
        || {
            let cfg = example1_cfg();
            let f = MessageLengthVector(EXAMPLE1_F.to_vec());
            let plan = solve_ndt(&f, &cfg).unwrap();
            assert!((plan.tau - 7.0 / 30.0).abs() < 1e-9, "tau = {}", plan.tau);

            let expected_d = [6.0 / 7.0, 3.0 / 7.0, 0.0, 9.0 / 14.0, 15.0 / 14.0, 1.5, 0.0];
            for (got, want) in plan.d_star.0.iter().zip(expected_d) {
                assert!((got - want).abs() < 1e-8, "d_star {:?}", plan.d_star);
            }

            let expected_w = [2.0 / 7.0, 2.0 / 7.0, 3.0 / 7.0];
            assert_eq!(plan.phases.len(), 3, "three-phase decomposition");
            for (corner, w) in EXAMPLE1_CORNERS.iter().zip(expected_w) {
                let phase = plan
                    .phases
                    .iter()
                    .find(|ph| {
                        ph.point.0.iter().zip(corner).all(|(a, b)| (a - b).abs() < 1e-7)
                    })
                    .unwrap_or_else(|| panic!("corner {corner:?} missing from the plan"));
                assert!(
                    (phase.weight - w * plan.tau).abs() < 1e-8,
                    "weight at {corner:?}: {} vs {}",
                    phase.weight,
                    w * plan.tau
                );
            }
        },
    );
}

#[test]
fn criterion_02_example1_bounds() {
    criterion(2, "Example 1: tau_l = 0.21, tau_u = 7/30, rho = 10/9 <= 5/3", None, || {
        let cfg = example1_cfg();
        let f = MessageLengthVector(EXAMPLE1_F.to_vec());
        let b = gap(&f, &cfg).unwrap();
        assert!((b.tau_l - 0.21).abs() < 1e-12, "tau_l = {}", b.tau_l);
        let tau_u = b.tau_u.expect("Mid regime has the relaxed upper bound");
        assert!((tau_u - 7.0 / 30.0).abs() < 1e-9, "tau_u = {tau_u}");
        assert!((b.rho - 10.0 / 9.0).abs() < 1e-9, "rho = {}", b.rho);
        assert!(b.rho <= 5.0 / 3.0);
    });
}

#[test]
fn criterion_03_time_sharing_benchmark() {
    criterion(
        3,
        "time sharing = 7/20 on Example 1; tau_a <= time sharing on 1000 random f per K",
        Some(Duration::from_secs(60)),
        || {
            let ts = benchmark_time_sharing(
                &MessageLengthVector(EXAMPLE1_F.to_vec()),
                &example1_cfg(),
            )
            .unwrap();
            assert!((ts - 7.0 / 20.0).abs() < 1e-12, "ts = {ts}");

            for k in 2..=4 {
                let mut pairs = Vec::new();
                for regime in [Regime::LowM, Regime::Mid, Regime::HighM] {
                    pairs.extend(regime_pairs(k, regime, 3));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(300 + k as u64);
                for trial in 0..1000 {
                    let (m, n) = pairs[trial % pairs.len()];
                    let cfg = cfg(k, m, n);
                    let f = random_f(&mut rng, cfg.group_count());
                    let tau = solve_ndt(&f, &cfg).unwrap().tau;
                    let ts = benchmark_time_sharing(&f, &cfg).unwrap();
                    assert!(tau <= ts + 1e-9, "K={k} M={m} N={n}: tau {tau} > ts {ts}");
                }
            }
        },
    );
}

#[test]
fn criterion_04_optimality_at_extremes() {
    criterion(
        4,
        "tau_a = tau_l for M/N <= 1 or >= K; K=2 inner/outer supports agree",
        None,
        || {
            for k in 2..=4 {
                let mut pairs = regime_pairs(k, Regime::LowM, 10);
                // pairs with M/N >= K: the HighM regime plus the boundary M = KN
                pairs.extend(regime_pairs(k, Regime::HighM, 7));
                pairs.extend([(k, 1), (2 * k, 2), (3 * k, 3)]);
                assert_eq!(pairs.len(), 20);
                let mut rng = ChaCha8Rng::seed_from_u64(400 + k as u64);
                for (m, n) in pairs {
                    let cfg = cfg(k, m, n);
                    for _ in 0..100 {
                        let f = random_f(&mut rng, cfg.group_count());
                        let b = gap(&f, &cfg).unwrap();
                        assert!(
                            (b.tau_a - b.tau_l).abs() < 1e-9,
                            "K={k} M={m} N={n}: tau_a {} vs tau_l {}",
                            b.tau_a,
                            b.tau_l
                        );
                    }
                }
            }

            // K = 2: the bounds coincide at every antenna geometry
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let pairs: Vec<(usize, usize)> =
                (1..=5).flat_map(|n| (1..=4).map(move |q| (q * n.max(1), n))).take(20).collect();
            for (m, n) in pairs {
                let cfg = cfg(2, m, n);
                let inner = corner_points(&inner_bound(&cfg));
                let outer = brute_force_vertices(&outer_bound(&cfg)).unwrap();
                for _ in 0..100 {
                    let w: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
                    let (si, so) = (inner.support(&w), outer.support(&w));
                    assert!((si - so).abs() < 1e-9, "K=2 M={m} N={n}: {si} vs {so}");
                }
            }
        },
    );
}

#[test]
fn criterion_05_gap_bound() {
    criterion(
        5,
        "Mid regime: tau_l <= tau_a <= tau_u and rho <= M/N on 1000 random f per pair",
        Some(Duration::from_secs(300)),
        || {
            for k in 2..=4 {
                let pairs = regime_pairs(k, Regime::Mid, 20);
                let mut rng = ChaCha8Rng::seed_from_u64(500 + k as u64);
                for (m, n) in pairs {
                    let cfg = cfg(k, m, n);
                    for _ in 0..1000 {
                        let f = random_f(&mut rng, cfg.group_count());
                        let b = gap(&f, &cfg).unwrap();
                        let tau_u = b.tau_u.expect("Mid regime");
                        assert!(b.tau_l <= b.tau_a + 1e-9);
                        assert!(b.tau_a <= tau_u + 1e-9);
                        assert!(
                            b.rho <= m as f64 / n as f64 + 1e-9,
                            "K={k} M={m} N={n}: rho = {}",
                            b.rho
                        );
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_06_corollary1_centralized() {
    criterion(
        6,
        "centralized_worst_ndt matches solve_ndt on every grid mu; (1-mu)/N when M >= KN",
        None,
        || {
            for k in 2..=4 {
                let mut pairs = Vec::new();
                for regime in [Regime::LowM, Regime::Mid, Regime::HighM] {
                    pairs.extend(regime_pairs(k, regime, 10));
                }
                for (m, n) in pairs {
                    for t in 0..=k {
                        let mu = t as f64 / k as f64;
                        let cfg = SystemConfig::new(k, m, n, k.max(4), 100, mu, 1000.0).unwrap();
                        let closed = centralized_worst_ndt(&cfg);
                        let f = centralized_worst_lengths(&cfg, t);
                        let lp = solve_ndt(&f, &cfg).unwrap().tau;
                        assert!(
                            (closed - lp).abs() < 1e-9,
                            "K={k} M={m} N={n} t={t}: {closed} vs {lp}"
                        );
                        if m >= k * n {
                            let expect = (1.0 - mu) / n as f64;
                            assert!(
                                (closed - expect).abs() < 1e-12,
                                "K={k} M={m} N={n} t={t}: {closed} vs {expect}"
                            );
                        }
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_07_corollary2_decentralized() {
    criterion(
        7,
        "decentralized_worst_ndt matches solve_ndt on LLN lengths; closed forms at the extremes",
        None,
        || {
            let binom = |n: usize, k: usize| -> f64 {
                (0..k).fold(1.0, |v, i| v * (n - i) as f64 / (i + 1) as f64).round()
            };
            for k in 2..=4 {
                let mut pairs = Vec::new();
                for regime in [Regime::LowM, Regime::Mid, Regime::HighM] {
                    pairs.extend(regime_pairs(k, regime, 3));
                }
                for (m, n) in pairs {
                    for tenths in 0..=10 {
                        let mu = tenths as f64 / 10.0;
                        let cfg = SystemConfig::new(k, m, n, k.max(4), 100, mu, 1000.0).unwrap();
                        let closed = decentralized_worst_ndt(&cfg);
                        let f = decentralized_lln_lengths(&cfg);
                        let lp = solve_ndt(&f, &cfg).unwrap().tau;
                        assert!(
                            (closed - lp).abs() < 1e-9,
                            "K={k} M={m} N={n} mu={mu}: {closed} vs {lp}"
                        );
                        match cfg.regime() {
                            Regime::LowM => {
                                let sum: f64 = (1..=k)
                                    .map(|s| {
                                        binom(k, s)
                                            * mu.powi(s as i32 - 1)
                                            * (1.0 - mu).powi((k - s + 1) as i32)
                                    })
                                    .sum();
                                assert!((closed - sum / m as f64).abs() < 1e-12);
                            }
                            Regime::HighM => {
                                assert!((closed - (1.0 - mu) / n as f64).abs() < 1e-12);
                            }
                            Regime::Mid => {}
                        }
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_08_corner_point_oracle() {
    criterion(
        8,
        "corner_points equals brute-force vertices on every unconditioned polytope",
        None,
        || {
            let same_set = |a: &[DofTuple], b: &[DofTuple]| {
                let close = |p: &DofTuple, q: &DofTuple| {
                    p.0.iter().zip(&q.0).all(|(x, y)| (x - y).abs() < 1e-7)
                };
                a.iter().all(|p| b.iter().any(|q| close(p, q)))
                    && b.iter().all(|q| a.iter().any(|p| close(p, q)))
            };
            for k in 2..=3 {
                for regime in [Regime::LowM, Regime::Mid, Regime::HighM] {
                    for (m, n) in regime_pairs(k, regime, 10) {
                        let cfg = cfg(k, m, n);
                        let region = inner_bound(&cfg);
                        let corners = corner_points(&region);
                        let close = |p: &DofTuple, q: &DofTuple| {
                            p.0.iter().zip(&q.0).all(|(x, y)| (x - y).abs() < 1e-7)
                        };
                        match &region.kind {
                            RegionKind::Single(poly) => {
                                // brute force keeps the origin; the corner list does not
                                let brute: Vec<DofTuple> = brute_force_vertices(poly)
                                    .unwrap()
                                    .points
                                    .into_iter()
                                    .filter(|p| p.0.iter().any(|&v| v > 1e-7))
                                    .collect();
                                assert!(
                                    same_set(&corners.points, &brute),
                                    "K={k} M={m} N={n} ({regime:?}): {} listed vs {} brute",
                                    corners.len(),
                                    brute.len()
                                );
                            }
                            RegionKind::Mid { d1, .. } => {
                                // every D1 vertex must be listed (a coinciding D2
                                // point may own the deduplicated source tag), and
                                // every D1-tagged point must be a true vertex
                                let brute: Vec<DofTuple> = brute_force_vertices(d1)
                                    .unwrap()
                                    .points
                                    .into_iter()
                                    .filter(|p| p.0.iter().any(|&v| v > 1e-7))
                                    .collect();
                                for q in &brute {
                                    assert!(
                                        corners.points.iter().any(|p| close(p, q)),
                                        "K={k} M={m} N={n}: D1 vertex {q:?} missing"
                                    );
                                }
                                for (p, s) in corners.points.iter().zip(&corners.sources) {
                                    if *s == CornerSource::D1 {
                                        assert!(
                                            brute.iter().any(|q| close(p, q)),
                                            "K={k} M={m} N={n}: listed {p:?} not a D1 vertex"
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_09_scheme_construction() {
    criterion(
        9,
        "Example-1 corners: nulling <= 1e-8, positive margins, equalization <= 1e-8 over 100 draws",
        Some(Duration::from_secs(30)),
        || {
            let cfg = example1_cfg();
            for corner in EXAMPLE1_CORNERS {
                let d = DofTuple(corner.to_vec());
                for seed in 0..100 {
                    let h = sample_channels(&cfg, cfg.m, seed);
                    let scheme = design_scheme(&h, &d, &cfg).unwrap();
                    let report = verify_scheme(&scheme, &h, &d);
                    assert!(
                        report.nulling_residual <= 1e-8
                            && report.rank_margin > 0.0
                            && report.equalization_dev <= 1e-8,
                        "corner {corner:?} seed {seed}: {report:?}"
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_10_finite_snr_convergence() {
    criterion(
        10,
        "mean simulated NDT decreases in P and approaches the asymptotic values",
        Some(Duration::from_secs(300)),
        || {
            let cfg = example1_cfg();
            let f = MessageLengthVector(EXAMPLE1_F.to_vec());
            let proposed = solve_ndt(&f, &cfg).unwrap();
            let ts = time_sharing_plan(&f, &cfg);
            let draws = 200;
            let mut mean_p = Vec::new();
            let mut mean_t = Vec::new();
            for db in [10.0, 20.0, 30.0, 40.0, 50.0] {
                let p = 10f64.powf(db / 10.0);
                mean_p.push(simulate_delivery(&proposed, &f, &cfg, p, draws, 0).unwrap().ndt_mean);
                mean_t.push(simulate_delivery(&ts, &f, &cfg, p, draws, 0).unwrap().ndt_mean);
            }
            for w in mean_p.windows(2) {
                assert!(w[1] < w[0], "proposed means not decreasing: {mean_p:?}");
            }
            for w in mean_t.windows(2) {
                assert!(w[1] < w[0], "time-sharing means not decreasing: {mean_t:?}");
            }
            let tau = 7.0 / 30.0;
            assert!(
                (mean_p[4] - tau).abs() < (mean_p[1] - tau).abs(),
                "proposed not approaching {tau}: {mean_p:?}"
            );
            let tau_ts = 7.0 / 20.0;
            assert!(
                (mean_t[4] - tau_ts).abs() < (mean_t[1] - tau_ts).abs(),
                "time sharing not approaching {tau_ts}: {mean_t:?}"
            );
        },
    );
}

#[test]
fn criterion_11_sweep_properties() {
    criterion(
        11,
        "decentralized sweeps: proposed beats benchmarks; NDT falls with mu and with M",
        None,
        || {
            // K=3, M=2, N=1: 200 random decentralized placements per mu
            let mut prev_mean = f64::INFINITY;
            for tenths in [0, 2, 4, 6, 8] {
                let mu = tenths as f64 / 10.0;
                let cfg = SystemConfig::new(3, 2, 1, 4, 100, mu, 1000.0).unwrap();
                let r = worst_case_demand(&cfg).unwrap();
                let (mut sp, mut st, mut sg) = (0.0, 0.0, 0.0);
                for seed in 0..200u64 {
                    let cache = decentralized_place(&cfg, seed, DEFAULT_PLACEMENT_BITS);
                    let f = generate_coded_messages(&cache, &r);
                    sp += solve_ndt(&f, &cfg).unwrap().tau;
                    st += benchmark_time_sharing(&f, &cfg).unwrap();
                    sg += benchmark_group_by_group(&f, &cfg).unwrap();
                }
                let (mp, mt, mg) = (sp / 200.0, st / 200.0, sg / 200.0);
                assert!(mp <= mt + 1e-12, "mu={mu}: proposed {mp} > time sharing {mt}");
                assert!(mp <= mg + 1e-12, "mu={mu}: proposed {mp} > group-by-group {mg}");
                assert!(mp <= prev_mean + 1e-9, "mean NDT rose at mu={mu}: {mp} > {prev_mean}");
                prev_mean = mp;
            }

            // K=4, N=1: worst-case NDT non-increasing in mu and in M in {3, 6, 12}
            for tenths in 0..=10 {
                let mu = tenths as f64 / 10.0;
                let taus: Vec<f64> = [3, 6, 12]
                    .iter()
                    .map(|&m| {
                        decentralized_worst_ndt(
                            &SystemConfig::new(4, m, 1, 4, 100, mu, 1000.0).unwrap(),
                        )
                    })
                    .collect();
                assert!(
                    taus[0] >= taus[1] - 1e-12 && taus[1] >= taus[2] - 1e-12,
                    "mu={mu}: NDT not falling with M: {taus:?}"
                );
                if tenths > 0 {
                    for &m in &[3usize, 6, 12] {
                        let lo =
                            SystemConfig::new(4, m, 1, 4, 100, mu - 0.1, 1000.0).unwrap();
                        let hi = SystemConfig::new(4, m, 1, 4, 100, mu, 1000.0).unwrap();
                        assert!(
                            decentralized_worst_ndt(&hi) <= decentralized_worst_ndt(&lo) + 1e-12,
                            "M={m}: NDT rose from mu={} to {mu}",
                            mu - 0.1
                        );
                    }
                }
            }
        },
    );
}
