//! NDT optimization: the achievable minimum delivery time over the inner
//! bound (P1/P2), the cut-set lower bound (P3), the relaxed upper bound (P4),
//! the multiplicative gap, closed-form worst-case NDTs for centralized and
//! decentralized placement (Corollaries 1-2), and the two benchmark schemes.

use crate::dof_region::{
    self, corner_points, inner_bound, CornerPointSet, RegionKind, EPS_DEDUP, EPS_MEMBER,
};
use crate::lp;
use crate::model::{DofTuple, MessageLengthVector, Regime, SystemConfig};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NdtError {
    #[error("operation requires the Mid regime (1 < M/N <= K), got {0:?}")]
    Regime(Regime),
    #[error("group size s={s} out of range [1, {k}]")]
    GroupSize { s: usize, k: usize },
    #[error("length vector has {got} entries, expected {want}")]
    Dimension { got: usize, want: usize },
    #[error("message lengths must be nonnegative (entry {index} = {value})")]
    NegativeLength { index: usize, value: f64 },
    #[error("empty length vector: {0}")]
    EmptyLengths(&'static str),
    #[error("bound invariant violated: {0}")]
    BoundViolation(String),
    #[error("internal LP failure: {0}")]
    Lp(#[from] lp::LpError),
}

/// One time-sharing phase: a corner point of the region and the time spent on it.
#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    pub point: DofTuple,
    pub weight: f64,
}

/// Solution of P1/P2: the minimum NDT, the served DoF tuple, and the
/// time-sharing decomposition over corner points.
#[derive(Debug, Clone, Serialize)]
pub struct DeliveryPlan {
    pub tau: f64,
    pub d_star: DofTuple,
    pub phases: Vec<Phase>,
}

/// Achievable NDT with its lower/upper bounds and multiplicative gap.
#[derive(Debug, Clone, Serialize)]
pub struct NdtBounds {
    pub tau_a: f64,
    pub tau_l: f64,
    pub tau_u: Option<f64>,
    pub rho: f64,
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v.round()
}

/// Corner points of the inner bound, cached per antenna geometry. The Mid
/// regime enumeration is the expensive part; sweeps hit the same (K, M, N)
/// repeatedly.
pub fn region_corners(cfg: &SystemConfig) -> Arc<CornerPointSet> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), Arc<CornerPointSet>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (cfg.k, cfg.m, cfg.n);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return hit.clone();
    }
    let set = Arc::new(corner_points(&inner_bound(cfg)));
    cache.lock().unwrap().insert(key, set.clone());
    set
}

fn validate_lengths(f: &MessageLengthVector, cfg: &SystemConfig) -> Result<(), NdtError> {
    if f.len() != cfg.group_count() {
        return Err(NdtError::Dimension { got: f.len(), want: cfg.group_count() });
    }
    if let Some((i, &v)) = f.0.iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(NdtError::NegativeLength { index: i, value: v });
    }
    Ok(())
}

/// Minimum NDT for the given coded-message lengths (P1, solved as the
/// corner-point LP P2).
pub fn solve_ndt(f: &MessageLengthVector, cfg: &SystemConfig) -> Result<DeliveryPlan, NdtError> {
    let corners = region_corners(cfg);
    solve_ndt_with(f, cfg, &corners)
}

/// As `solve_ndt` but reusing an already-enumerated corner set.
pub fn solve_ndt_with(
    f: &MessageLengthVector,
    cfg: &SystemConfig,
    corners: &CornerPointSet,
) -> Result<DeliveryPlan, NdtError> {
    validate_lengths(f, cfg)?;
    let dim = f.len();
    if f.is_zero() {
        return Ok(DeliveryPlan { tau: 0.0, d_star: DofTuple::zeros(dim), phases: vec![] });
    }

    // Messages with zero length are projected out: zeroing a coordinate of a
    // region member stays in the region (the indicator constraint for an
    // absent message switches off), so every projected corner point is still
    // a valid time-sharing target.
    let support: Vec<usize> = (0..dim).filter(|&j| f.0[j] > 0.0).collect();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for p in &corners.points {
        let proj: Vec<f64> = support.iter().map(|&j| p.0[j]).collect();
        if proj.iter().all(|&v| v <= EPS_MEMBER) {
            continue;
        }
        if !cols.iter().any(|q| {
            q.iter().zip(&proj).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < EPS_DEDUP
        }) {
            cols.push(proj);
        }
    }
    let fs: Vec<f64> = support.iter().map(|&j| f.0[j]).collect();
    let rows: Vec<Vec<f64>> =
        (0..support.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();

    // Stage 1: minimum total time-sharing weight = tau.
    let ones = vec![1.0; cols.len()];
    let stage1 = lp::solve_min_eq(&ones, &rows, &fs)?;
    let tau = stage1.objective;

    // Stage 2: among optimal decompositions, prefer weight on the "largest"
    // corner points (maximal squared norm). This pins a unique, reproducible
    // decomposition; alternative optima otherwise abound in degenerate
    // instances.
    let norms: Vec<f64> = cols.iter().map(|c| -c.iter().map(|v| v * v).sum::<f64>()).collect();
    let mut rows2 = rows;
    rows2.push(ones);
    let mut rhs2 = fs.clone();
    rhs2.push(tau);
    let stage2 = lp::solve_min_eq(&norms, &rows2, &rhs2)?;

    let weight_floor = 1e-9 * tau.max(1.0);
    let mut phases: Vec<Phase> = stage2
        .x
        .iter()
        .enumerate()
        .filter(|(_, &b)| b > weight_floor)
        .map(|(j, &b)| {
            let mut point = vec![0.0; dim];
            for (pos, &jj) in support.iter().enumerate() {
                point[jj] = cols[j][pos];
            }
            Phase { point: DofTuple(point), weight: b }
        })
        .collect();
    phases.sort_by(|a, b| {
        b.point
            .0
            .iter()
            .zip(&a.point.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let d_star = DofTuple(f.0.iter().map(|&v| if v > 0.0 { v / tau } else { 0.0 }).collect());
    Ok(DeliveryPlan { tau, d_star, phases })
}

/// Cut-set lower bound of P3: tau_l = max(sum f / M, max_i sum_{A owns i} f_A / N).
pub fn lower_bound_ndt(f: &MessageLengthVector, cfg: &SystemConfig) -> Result<f64, NdtError> {
    validate_lengths(f, cfg)?;
    let idx = crate::model::canonical_groups(cfg.k).expect("validated cfg");
    let mut best = f.total() / cfg.m as f64;
    for user in 1..=cfg.k {
        let load: f64 = idx
            .groups()
            .iter()
            .zip(&f.0)
            .filter(|(g, _)| g.contains_user(user))
            .map(|(_, &v)| v)
            .sum();
        best = best.max(load / cfg.n as f64);
    }
    Ok(best)
}

/// Relaxed upper bound of P4 (indicators dropped), defined in the Mid regime
/// only: the max of (row . f)/rhs over all rows of the unconditioned D2.
pub fn upper_bound_ndt(f: &MessageLengthVector, cfg: &SystemConfig) -> Result<f64, NdtError> {
    validate_lengths(f, cfg)?;
    let region = inner_bound(cfg);
    let RegionKind::Mid { d2_template, .. } = &region.kind else {
        return Err(NdtError::Regime(region.regime));
    };
    Ok(d2_template
        .rows
        .iter()
        .map(|r| r.coeffs.iter().zip(&f.0).map(|(a, v)| a * v).sum::<f64>() / r.rhs)
        .fold(0.0, f64::max))
}

/// Bundles tau_a, tau_l, tau_u and the gap rho = tau_a/tau_l, enforcing the
/// Theorem-3 guarantees.
pub fn gap(f: &MessageLengthVector, cfg: &SystemConfig) -> Result<NdtBounds, NdtError> {
    validate_lengths(f, cfg)?;
    if f.is_zero() {
        return Err(NdtError::EmptyLengths("gap analysis needs f != 0"));
    }
    let tau_a = solve_ndt(f, cfg)?.tau;
    let tau_l = lower_bound_ndt(f, cfg)?;
    let regime = cfg.regime();
    let tau_u = if regime == Regime::Mid { Some(upper_bound_ndt(f, cfg)?) } else { None };
    let rho = tau_a / tau_l;
    let ratio = cfg.m as f64 / cfg.n as f64;
    let ok = match regime {
        Regime::Mid => {
            rho <= ratio + 1e-9
                && tau_l <= tau_a + 1e-9
                && tau_a <= tau_u.unwrap() + 1e-9 * tau_a.max(1.0)
        }
        _ => (rho - 1.0).abs() <= 1e-7,
    };
    if !ok {
        return Err(NdtError::BoundViolation(format!(
            "tau_a={tau_a}, tau_l={tau_l}, tau_u={tau_u:?}, rho={rho}, M/N={ratio}, f={:?}",
            f.0
        )));
    }
    Ok(NdtBounds { tau_a, tau_l, tau_u, rho })
}

/// Per-group DoF of the symmetric allocation where every group of size s is
/// active with equal length (Appendix B, generalized to any s).
pub fn symmetric_group_dof(cfg: &SystemConfig, s: usize) -> Result<f64, NdtError> {
    if s < 1 || s > cfg.k {
        return Err(NdtError::GroupSize { s, k: cfg.k });
    }
    let (k, m, n) = (cfg.k as f64, cfg.m as f64, cfg.n as f64);
    let c_ks = binom(cfg.k, s);
    let c_k1s1 = binom(cfg.k - 1, s - 1);
    let ratio = m / n;
    let threshold = s as f64 * c_ks / (1.0 + (s - 1) as f64 * c_ks);
    Ok(if ratio <= threshold {
        m / c_ks
    } else if ratio <= k {
        (m / (k * c_k1s1)).max(s as f64 * n / (1.0 + (s - 1) as f64 * c_ks))
    } else {
        n / c_k1s1
    })
}

fn centralized_grid_value(cfg: &SystemConfig, t: usize) -> f64 {
    if t == cfg.k {
        return 0.0;
    }
    let s = t + 1;
    let a = (1.0 - t as f64 / cfg.k as f64) / binom(cfg.k - 1, t);
    a / symmetric_group_dof(cfg, s).expect("s in range")
}

/// Worst-case NDT under centralized placement (Corollary 1). Non-integer
/// K*mu interpolates linearly between the two adjacent grid points (memory
/// sharing between the neighboring placements).
pub fn centralized_worst_ndt(cfg: &SystemConfig) -> f64 {
    let km = cfg.mu * cfg.k as f64;
    let lo = km.floor() as usize;
    let hi = km.ceil() as usize;
    if lo == hi {
        return centralized_grid_value(cfg, lo);
    }
    let w = km - lo as f64;
    (1.0 - w) * centralized_grid_value(cfg, lo) + w * centralized_grid_value(cfg, hi)
}

/// LLN coded-message length for size-s groups under decentralized placement.
fn lln_length(mu: f64, k: usize, s: usize) -> f64 {
    mu.powi(s as i32 - 1) * (1.0 - mu).powi((k - s + 1) as i32)
}

/// Worst-case NDT under decentralized placement in the large-F limit
/// (Corollary 2). The Mid regime solves the size-symmetric reduction of
/// Eq. 31, a K-dimensional LP.
pub fn decentralized_worst_ndt(cfg: &SystemConfig) -> f64 {
    let (k, mu) = (cfg.k, cfg.mu);
    match cfg.regime() {
        Regime::LowM => {
            (1..=k).map(|s| binom(k, s) * lln_length(mu, k, s)).sum::<f64>() / cfg.m as f64
        }
        Regime::HighM => (1.0 - mu) / cfg.n as f64,
        Regime::Mid => {
            let f: Vec<f64> = (1..=k).map(|s| lln_length(mu, k, s)).collect();
            if f.iter().all(|&v| v <= 0.0) {
                return 0.0;
            }
            let corners = reduced_corners(cfg);
            let rows: Vec<Vec<f64>> =
                (0..k).map(|i| corners.iter().map(|c| c[i]).collect()).collect();
            let ones = vec![1.0; corners.len()];
            lp::solve_min_eq(&ones, &rows, &f).expect("reduced P1 is feasible").objective
        }
    }
}

/// Corner points of conv(D1 u D~2) in the size-symmetric coordinates
/// (d_1, ..., d_K) of Eq. 31.
fn reduced_corners(cfg: &SystemConfig) -> Vec<Vec<f64>> {
    let k = cfg.k;
    let (m, n) = (cfg.m as f64, cfg.n as f64);
    // D1: sum_s C(K-1,s-1) d_s <= M/K; vertices are the axis points.
    let mut corners: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut p = vec![0.0; k];
            p[j] = m / (k as f64 * binom(k - 1, j));
            p
        })
        .collect();
    // D~2 rows of Eq. 31, conditional rows gated on d_s > 0.
    let mut rows = vec![
        dof_region::GatedRow {
            coeffs: (1..=k).map(|s| binom(k - 1, s - 1)).collect(),
            rhs: n,
            gate: None,
        },
        dof_region::GatedRow {
            coeffs: (1..=k).map(|s| binom(k, s)).collect(),
            rhs: m,
            gate: None,
        },
    ];
    for s in 2..=k {
        let coeffs = (1..=k)
            .map(|sp| {
                let mut c = (s - 1) as f64 * binom(k, sp);
                if sp == s {
                    c += 1.0;
                } else if sp > s {
                    c += binom(k - s, sp - s);
                }
                c
            })
            .collect();
        rows.push(dof_region::GatedRow { coeffs, rhs: s as f64 * n, gate: Some(s - 1) });
    }
    for p in dof_region::enumerate_gated_corners(k, &rows) {
        if !corners.iter().any(|q| {
            q.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < EPS_DEDUP
        }) {
            corners.push(p);
        }
    }
    corners
}

/// Time-sharing benchmark: every message alone at DoF min(M, N).
pub fn benchmark_time_sharing(f: &MessageLengthVector, cfg: &SystemConfig) -> Result<f64, NdtError> {
    validate_lengths(f, cfg)?;
    Ok(f.total() / cfg.m.min(cfg.n) as f64)
}

/// Group-by-group benchmark: messages batched by group size, zero-padded to
/// the longest in the batch, each batch at the symmetric per-group DoF.
pub fn benchmark_group_by_group(
    f: &MessageLengthVector,
    cfg: &SystemConfig,
) -> Result<f64, NdtError> {
    validate_lengths(f, cfg)?;
    let idx = crate::model::canonical_groups(cfg.k).expect("validated cfg");
    let mut tau = 0.0;
    for s in 1..=cfg.k {
        let longest = idx
            .groups()
            .iter()
            .zip(&f.0)
            .filter(|(g, _)| g.size() == s)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max);
        if longest > 0.0 {
            tau += longest / symmetric_group_dof(cfg, s)?;
        }
    }
    Ok(tau)
}

/// Symmetric worst-case length vector of Appendix B: a_A = (1-mu)/C(K-1,t)
/// for |A| = t+1, zero otherwise (t = K*mu, integer).
pub fn centralized_worst_lengths(cfg: &SystemConfig, t: usize) -> MessageLengthVector {
    let idx = crate::model::canonical_groups(cfg.k).expect("validated cfg");
    if t == cfg.k {
        return MessageLengthVector::zeros(idx.len());
    }
    let a = (1.0 - t as f64 / cfg.k as f64) / binom(cfg.k - 1, t);
    MessageLengthVector(
        idx.groups().iter().map(|g| if g.size() == t + 1 { a } else { 0.0 }).collect(),
    )
}

/// LLN length vector of Appendix C: a_A = mu^{|A|-1} (1-mu)^{K-|A|+1}.
pub fn decentralized_lln_lengths(cfg: &SystemConfig) -> MessageLengthVector {
    let idx = crate::model::canonical_groups(cfg.k).expect("validated cfg");
    MessageLengthVector(
        idx.groups().iter().map(|g| lln_length(cfg.mu, cfg.k, g.size())).collect(),
    )
}
