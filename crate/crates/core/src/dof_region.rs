//! DoF regions of the K-user (M,N) broadcast channel with general message
//! sets: the cut-set outer bound, the regime-dependent inner bound with its
//! indicator-gated subspace constraints, corner-point enumeration, and an
//! independent brute-force vertex oracle.

use crate::lp;
use crate::model::{canonical_groups, DofTuple, Group, Regime, SystemConfig};
use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

/// Membership tolerance on unit-scale constraints.
pub const EPS_MEMBER: f64 = 1e-9;
/// Infinity-norm distance below which two vertices are considered equal.
pub const EPS_DEDUP: f64 = 1e-7;

#[derive(Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("dimension mismatch: tuple has {got} coordinates, region has {want}")]
    Dimension { got: usize, want: usize },
    #[error("polytope is unbounded in coordinate {0}")]
    Unbounded(usize),
    #[error("brute-force vertex enumeration limited to dimension <= 15, got {0}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    /// Per-user cut-set row: sum of streams toward user i bounded by N
    /// (or M/K inside D1).
    UserCutSet(usize),
    /// BS cut-set row: total streams bounded by M.
    BsCutSet,
    /// Subspace row for a group of size >= 2; active only while the group's
    /// DoF is positive (the indicator in Eq. 13c of the inner bound).
    Subspace(Group),
}

#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub label: RowLabel,
}

/// Half-space system { d >= 0 : A d <= c }.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub rows: Vec<ConstraintRow>,
}

impl Polytope {
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.coeffs.clone()).collect()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rhs).collect()
    }

    /// Plain membership: every row holds within eps and d >= -eps.
    pub fn contains(&self, d: &DofTuple, eps: f64) -> Result<bool, RegionError> {
        self.check_dim(d)?;
        if d.0.iter().any(|&v| v < -eps) {
            return Ok(false);
        }
        Ok(self.rows.iter().all(|r| {
            r.coeffs.iter().zip(&d.0).map(|(a, v)| a * v).sum::<f64>() <= r.rhs + eps
        }))
    }

    /// Membership honoring indicators: `Subspace(g)` rows are checked only
    /// when the group's coordinate exceeds eps.
    pub fn contains_gated(
        &self,
        d: &DofTuple,
        groups: &[Group],
        eps: f64,
    ) -> Result<bool, RegionError> {
        self.check_dim(d)?;
        if d.0.iter().any(|&v| v < -eps) {
            return Ok(false);
        }
        Ok(self.rows.iter().all(|r| {
            if let RowLabel::Subspace(g) = r.label {
                let idx = groups.iter().position(|&x| x == g).expect("group in index");
                if d.0[idx] <= eps {
                    return true;
                }
            }
            r.coeffs.iter().zip(&d.0).map(|(a, v)| a * v).sum::<f64>() <= r.rhs + eps
        }))
    }

    fn check_dim(&self, d: &DofTuple) -> Result<(), RegionError> {
        if d.len() != self.dim {
            Err(RegionError::Dimension { got: d.len(), want: self.dim })
        } else {
            Ok(())
        }
    }
}

/// Regime-dependent inner-bound description (Theorem 2).
#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub cfg: SystemConfig,
    pub regime: Regime,
    pub kind: RegionKind,
}

#[derive(Debug, Clone)]
pub enum RegionKind {
    /// Single polytope (LowM and HighM regimes).
    Single(Polytope),
    /// conv(D1 u D2); D2 carries the indicator-gated subspace rows.
    Mid { d1: Polytope, d2_template: Polytope },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerSource {
    D1,
    D2,
    Axis,
}

#[derive(Debug, Clone)]
pub struct CornerPointSet {
    pub points: Vec<DofTuple>,
    pub sources: Vec<CornerSource>,
}

impl CornerPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains_point(&self, d: &[f64], tol: f64) -> bool {
        self.points.iter().any(|p| inf_dist(&p.0, d) < tol)
    }

    /// Support function max_{e in set} w . e.
    pub fn support(&self, w: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|p| p.0.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Cut-set outer bound of Theorem 1: K per-user rows plus the BS sum row.
pub fn outer_bound(cfg: &SystemConfig) -> Polytope {
    let idx = canonical_groups(cfg.k).expect("validated cfg");
    let dim = idx.len();
    let mut rows = Vec::with_capacity(cfg.k + 1);
    for user in 1..=cfg.k {
        let coeffs = idx
            .groups()
            .iter()
            .map(|g| if g.contains_user(user) { 1.0 } else { 0.0 })
            .collect();
        rows.push(ConstraintRow { coeffs, rhs: cfg.n as f64, label: RowLabel::UserCutSet(user) });
    }
    rows.push(ConstraintRow { coeffs: vec![1.0; dim], rhs: cfg.m as f64, label: RowLabel::BsCutSet });
    Polytope { dim, rows }
}

/// Inner bound of Theorem 2 for the regime picked by (M, N, K).
pub fn inner_bound(cfg: &SystemConfig) -> RegionSpec {
    let idx = canonical_groups(cfg.k).expect("validated cfg");
    let dim = idx.len();
    let regime = cfg.regime();
    let kind = match regime {
        Regime::LowM => RegionKind::Single(Polytope {
            dim,
            rows: vec![ConstraintRow {
                coeffs: vec![1.0; dim],
                rhs: cfg.m as f64,
                label: RowLabel::BsCutSet,
            }],
        }),
        Regime::HighM => {
            let mut rows = Vec::with_capacity(cfg.k);
            for user in 1..=cfg.k {
                let coeffs = idx
                    .groups()
                    .iter()
                    .map(|g| if g.contains_user(user) { 1.0 } else { 0.0 })
                    .collect();
                rows.push(ConstraintRow {
                    coeffs,
                    rhs: cfg.n as f64,
                    label: RowLabel::UserCutSet(user),
                });
            }
            RegionKind::Single(Polytope { dim, rows })
        }
        Regime::Mid => {
            let per_user_budget = cfg.m as f64 / cfg.k as f64;
            let mut d1_rows = Vec::with_capacity(cfg.k);
            for user in 1..=cfg.k {
                let coeffs: Vec<f64> = idx
                    .groups()
                    .iter()
                    .map(|g| if g.contains_user(user) { 1.0 } else { 0.0 })
                    .collect();
                d1_rows.push(ConstraintRow {
                    coeffs,
                    rhs: per_user_budget,
                    label: RowLabel::UserCutSet(user),
                });
            }
            RegionKind::Mid {
                d1: Polytope { dim, rows: d1_rows },
                d2_template: d2_template(cfg),
            }
        }
    };
    RegionSpec { cfg: *cfg, regime, kind }
}

/// D2 with indicators noted but not applied: K per-user rows, the sum row,
/// and one subspace row per group of size >= 2 (Eq. 13c with the indicator
/// recorded in the label).
fn d2_template(cfg: &SystemConfig) -> Polytope {
    let idx = canonical_groups(cfg.k).expect("validated cfg");
    let dim = idx.len();
    let mut rows = Vec::new();
    for user in 1..=cfg.k {
        let coeffs = idx
            .groups()
            .iter()
            .map(|g| if g.contains_user(user) { 1.0 } else { 0.0 })
            .collect();
        rows.push(ConstraintRow { coeffs, rhs: cfg.n as f64, label: RowLabel::UserCutSet(user) });
    }
    rows.push(ConstraintRow { coeffs: vec![1.0; dim], rhs: cfg.m as f64, label: RowLabel::BsCutSet });
    for &a in idx.groups() {
        let s = a.size();
        if s < 2 {
            continue;
        }
        // (|A|-1) * sum_B d_B + d_A + sum_{B strict superset of A} d_B <= |A| N
        let coeffs = idx
            .groups()
            .iter()
            .map(|&b| {
                let mut c = (s - 1) as f64;
                if b == a {
                    c += 1.0;
                } else if a.is_proper_subset_of(b) {
                    c += 1.0;
                }
                c
            })
            .collect();
        rows.push(ConstraintRow {
            coeffs,
            rhs: (s * cfg.n) as f64,
            label: RowLabel::Subspace(a),
        });
    }
    Polytope { dim, rows }
}

impl RegionSpec {
    pub fn dim(&self) -> usize {
        match &self.kind {
            RegionKind::Single(p) => p.dim,
            RegionKind::Mid { d1, .. } => d1.dim,
        }
    }

    /// Membership test. LowM/HighM check the half-space system directly; the
    /// Mid-regime convex hull is decided by LP feasibility over the combined
    /// corner sets. Enumerating corners is not cheap, so callers testing many
    /// points should use `contains_with_corners`.
    pub fn contains(&self, d: &DofTuple, eps: f64) -> Result<bool, RegionError> {
        match &self.kind {
            RegionKind::Single(p) => p.contains(d, eps),
            RegionKind::Mid { .. } => {
                let corners = corner_points(self);
                self.contains_with_corners(&corners, d, eps)
            }
        }
    }

    pub fn contains_with_corners(
        &self,
        corners: &CornerPointSet,
        d: &DofTuple,
        eps: f64,
    ) -> Result<bool, RegionError> {
        if d.len() != self.dim() {
            return Err(RegionError::Dimension { got: d.len(), want: self.dim() });
        }
        if d.0.iter().any(|&v| v < -eps) {
            return Ok(false);
        }
        let cost = vec![1.0; corners.len()];
        let rows: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| corners.points.iter().map(|p| p.0[i]).collect())
            .collect();
        match lp::solve_min_eq(&cost, &rows, &d.0) {
            Ok(sol) => Ok(sol.objective <= 1.0 + eps),
            Err(lp::LpError::Infeasible(_)) => Ok(false),
            Err(e) => panic!("membership LP failed: {e}"),
        }
    }
}

/// Vertices of an ungated polytope (per-user cut-set boxes), via the same
/// support enumeration used for the gated D2 region. Families of pairwise
/// disjoint groups pinned at the cut-set value are always among these, but for
/// K >= 3 the boxes also have vertices with overlapping supports (e.g. all
/// three pairs at half the bound for K = 3), so a true vertex enumeration is
/// required.
fn enumerate_box_vertices(poly: &Polytope) -> Vec<Vec<f64>> {
    let rows: Vec<GatedRow> = poly
        .rows
        .iter()
        .map(|r| GatedRow { coeffs: r.coeffs.clone(), rhs: r.rhs, gate: None })
        .collect();
    enumerate_gated_corners(poly.dim, &rows)
}

/// Corner points of the inner bound (Appendix A). LowM and HighM use the
/// paper's closed forms; the Mid regime unions the D1 construction with the
/// Algorithm-1 enumeration over D2 support patterns.
pub fn corner_points(region: &RegionSpec) -> CornerPointSet {
    let cfg = &region.cfg;
    let idx = canonical_groups(cfg.k).expect("validated cfg");
    let dim = idx.len();
    let mut points: Vec<(Vec<f64>, CornerSource)> = Vec::new();

    match (&region.kind, region.regime) {
        (RegionKind::Single(_), Regime::LowM) => {
            for j in 0..dim {
                let mut p = vec![0.0; dim];
                p[j] = cfg.m as f64;
                points.push((p, CornerSource::Axis));
            }
        }
        (RegionKind::Single(poly), Regime::HighM) => {
            for p in enumerate_box_vertices(poly) {
                points.push((p, CornerSource::Axis));
            }
        }
        (RegionKind::Mid { d1, d2_template }, _) => {
            for p in enumerate_box_vertices(d1) {
                points.push((p, CornerSource::D1));
            }
            for p in enumerate_d2_corners(d2_template, idx.groups()) {
                points.push((p, CornerSource::D2));
            }
        }
        _ => unreachable!("regime/kind mismatch"),
    }

    dedup_and_sort(points)
}

/// A half-space row whose activity may be gated on one coordinate being
/// strictly positive (the paper's indicator constraints).
#[derive(Debug, Clone)]
pub(crate) struct GatedRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    /// Coordinate index whose positivity switches the row on; None = always on.
    pub gate: Option<usize>,
}

impl GatedRow {
    fn dot_restricted(&self, support: &[usize], values: &[f64]) -> f64 {
        support.iter().zip(values).map(|(&j, v)| self.coeffs[j] * v).sum()
    }
}

fn enumerate_d2_corners(template: &Polytope, groups: &[Group]) -> Vec<Vec<f64>> {
    let rows: Vec<GatedRow> = template
        .rows
        .iter()
        .map(|r| GatedRow {
            coeffs: r.coeffs.clone(),
            rhs: r.rhs,
            gate: match r.label {
                RowLabel::Subspace(g) => Some(groups.iter().position(|&x| x == g).unwrap()),
                _ => None,
            },
        })
        .collect();
    enumerate_gated_corners(template.dim, &rows)
}

/// Algorithm-1 enumeration: for every support set, intersect |support| bounds
/// drawn from the active rows (gated rows enter the pool only when their gate
/// coordinate is in the support), keep nonnegative solutions satisfying the
/// remaining pool rows. Solutions with a zero coordinate inside the support
/// are dropped; they reappear at the smaller support that matches them.
pub(crate) fn enumerate_gated_corners(dim: usize, rows: &[GatedRow]) -> Vec<Vec<f64>> {
    let supports: Vec<u32> = (1u32..(1 << dim)).collect();
    supports
        .par_iter()
        .flat_map_iter(|&mask| {
            let support: Vec<usize> = (0..dim).filter(|&j| mask >> j & 1 == 1).collect();
            let pool: Vec<&GatedRow> = rows
                .iter()
                .filter(|r| match r.gate {
                    Some(j) => support.contains(&j),
                    None => true,
                })
                .collect();
            let size = support.len();
            let mut found = Vec::new();
            if pool.len() < size {
                return found.into_iter();
            }
            let restricted: Vec<Vec<f64>> = pool
                .iter()
                .map(|r| support.iter().map(|&j| r.coeffs[j]).collect())
                .collect();
            for lam in (0..pool.len()).combinations(size) {
                let mat: Vec<Vec<f64>> = lam.iter().map(|&i| restricted[i].clone()).collect();
                let rhs: Vec<f64> = lam.iter().map(|&i| pool[i].rhs).collect();
                let Some(sol) = lp::solve_square(&mat, &rhs) else { continue };
                if sol.iter().any(|&v| v <= EPS_MEMBER) {
                    continue;
                }
                let ok = pool
                    .iter()
                    .all(|r| r.dot_restricted(&support, &sol) <= r.rhs + EPS_MEMBER);
                if !ok {
                    continue;
                }
                let mut full = vec![0.0; dim];
                for (pos, &j) in support.iter().enumerate() {
                    full[j] = sol[pos];
                }
                found.push(full);
            }
            found.into_iter()
        })
        .collect()
}

fn dedup_and_sort(mut points: Vec<(Vec<f64>, CornerSource)>) -> CornerPointSet {
    points.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<(Vec<f64>, CornerSource)> = Vec::new();
    for (p, src) in points {
        if !out.iter().any(|(q, _)| inf_dist(q, &p) < EPS_DEDUP) {
            out.push((p, src));
        }
    }
    let (points, sources) = out.into_iter().map(|(p, s)| (DofTuple(p), s)).unzip();
    CornerPointSet { points, sources }
}

/// Independent vertex oracle: solve every dimension-sized subset of
/// {constraint rows} u {coordinate planes} and keep the feasible solutions.
/// The origin is a vertex of every region here and is reported as such.
pub fn brute_force_vertices(poly: &Polytope) -> Result<CornerPointSet, RegionError> {
    let dim = poly.dim;
    if dim > 15 {
        return Err(RegionError::TooLarge(dim));
    }
    for j in 0..dim {
        if !poly.rows.iter().any(|r| r.coeffs[j] > 0.0) {
            return Err(RegionError::Unbounded(j));
        }
    }
    // Hyperplanes: the rows, then the coordinate planes d_j = 0.
    let n_rows = poly.rows.len();
    let total = n_rows + dim;
    let mut points = Vec::new();
    for combo in (0..total).combinations(dim) {
        let mut mat = Vec::with_capacity(dim);
        let mut rhs = Vec::with_capacity(dim);
        for &h in &combo {
            if h < n_rows {
                mat.push(poly.rows[h].coeffs.clone());
                rhs.push(poly.rows[h].rhs);
            } else {
                let mut row = vec![0.0; dim];
                row[h - n_rows] = 1.0;
                mat.push(row);
                rhs.push(0.0);
            }
        }
        let Some(sol) = lp::solve_square(&mat, &rhs) else { continue };
        if sol.iter().any(|&v| v < -EPS_MEMBER) {
            continue;
        }
        let feasible = poly.rows.iter().all(|r| {
            r.coeffs.iter().zip(&sol).map(|(a, v)| a * v).sum::<f64>() <= r.rhs + EPS_MEMBER
        });
        if feasible {
            points.push((sol, CornerSource::Axis));
        }
    }
    Ok(dedup_and_sort(points))
}
