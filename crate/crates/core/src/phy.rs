//! Linear physical-layer schemes: transmit precoders and receive combiners
//! realizing a DoF tuple in each antenna regime, numerical verification of
//! the nulling/decodability/equalization conditions, and the finite-SNR
//! Monte Carlo delivery simulation.
//!
//! Fractional DoF are handled by kappa-symbol extension: the channel is
//! replicated block-diagonally over kappa slots (it is constant within a
//! codeword), turning each d_A into an integer stream count kappa*d_A.

use crate::dof_region::{inner_bound, RegionKind};
use crate::model::{canonical_groups, DofTuple, Group, MessageLengthVector, Regime, SystemConfig};
use crate::ndt::DeliveryPlan;
use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

type C64 = Complex<f64>;
type CMat = DMatrix<C64>;

#[derive(Debug, Error)]
pub enum PhyError {
    #[error("no symbol extension kappa <= {max} makes {0:?} integral", max = MAX_KAPPA)]
    Kappa(Vec<f64>),
    #[error("DoF tuple lies outside the achievable region: {0}")]
    OutsideRegion(String),
    #[error("null space for group {group:?} has dimension {got}, need {needed} streams")]
    NullSpace { group: Group, needed: usize, got: usize },
    #[error("channel set has {got} columns, scheme needs {needed}")]
    Antennas { got: usize, needed: usize },
    #[error("phase {phase}: {source}")]
    Phase { phase: usize, source: Box<PhyError> },
    #[error("plan does not reproduce f at entry {index}: {got} vs {expected}")]
    PlanMismatch { index: usize, expected: f64, got: f64 },
}

pub const MAX_KAPPA: usize = 16;

/// Per-user channel matrices (N x M), i.i.d. CN(0,1) entries, reproducible
/// per seed.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub h: Vec<DMatrix<C64>>,
    pub seed: u64,
}

fn cgauss<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn sample_channels(cfg: &SystemConfig, m_a: usize, seed: u64) -> ChannelSet {
    assert!(m_a <= cfg.m, "cannot activate more than M antennas");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = (0..cfg.k)
        .map(|_| DMatrix::from_fn(cfg.n, m_a, |_, _| cgauss(&mut rng)))
        .collect();
    ChannelSet { h, seed }
}

/// A complete precoding/combining design for one DoF tuple.
#[derive(Debug, Clone)]
pub struct LinearScheme {
    pub regime: Regime,
    pub kappa: usize,
    /// Activated extended columns, slot-major: (slot, antenna).
    pub cols: Vec<(usize, usize)>,
    /// Active groups in canonical order.
    pub groups: Vec<Group>,
    /// Extended stream counts, kappa * d_A.
    pub streams: Vec<usize>,
    /// Per group: S x s_A precoder over the activated columns (unit columns).
    pub u: Vec<CMat>,
    /// Per group, per member (ascending user): s_A x kappa*N combiner.
    pub v: Vec<Vec<CMat>>,
    /// Per group: equalized effective channel (Mid-regime groups only).
    pub g: Vec<Option<CMat>>,
    /// Transmit mixing from the S stream dimensions to the extended antenna
    /// array (Mid D2 only). Keeps the effective channels in general position;
    /// a plain column subset inherits the block-diagonal extension structure
    /// and loses rank at boundary DoF tuples.
    pub mix: Option<CMat>,
}

impl LinearScheme {
    pub fn total_streams(&self) -> usize {
        self.streams.iter().sum()
    }

    /// Extended activated channel of user `i` (1-based): kappa*N x S.
    pub fn extended_channel(&self, h: &ChannelSet, i: usize) -> CMat {
        let n = h.h[i - 1].nrows();
        let mut out = CMat::zeros(self.kappa * n, self.cols.len());
        for (j, &(slot, ant)) in self.cols.iter().enumerate() {
            for r in 0..n {
                out[(slot * n + r, j)] = h.h[i - 1][(r, ant)];
            }
        }
        out
    }
}

fn smallest_kappa(values: &[f64]) -> Option<usize> {
    (1..=MAX_KAPPA).find(|&k| {
        values.iter().all(|&v| {
            let scaled = v * k as f64;
            (scaled - scaled.round()).abs() < 1e-9
        })
    })
}

/// Basis of { y : b y = 0 }, columns orthonormal. Computed from the Gram
/// matrix so the full right singular basis is available.
fn null_space(b: &CMat) -> CMat {
    let q = b.ncols();
    let gram = b.adjoint() * b;
    let svd = gram.svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &v| a.max(v));
    // Gram eigenvalues are squared singular values, so the noise floor sits
    // near machine-eps * smax; generic channels keep true nonzero values far
    // above this cut.
    let tol = smax * 1e-10 + f64::MIN_POSITIVE;
    let v_t = svd.v_t.as_ref().expect("svd with v requested");
    let cols: Vec<usize> = (0..q).filter(|&i| svd.singular_values[i] <= tol).collect();
    let mut out = CMat::zeros(q, cols.len());
    for (c, &i) in cols.iter().enumerate() {
        out.set_column(c, &v_t.row(i).adjoint());
    }
    out
}

fn pinv(m: &CMat) -> CMat {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &v| a.max(v));
    svd.pseudo_inverse(smax * 1e-10 + f64::MIN_POSITIVE).expect("svd computed")
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cgauss(rng))
}

/// Random matrix with orthonormal columns.
fn random_orthonormal<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let qr = random_matrix(rng, rows, cols).qr();
    qr.q()
}

fn normalize_columns(m: &mut CMat) {
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex::from(norm);
        }
    }
}

/// Slot-major activation of the first `s` extended columns, at most
/// `per_slot` antennas per slot.
fn slot_major_cols(kappa: usize, per_slot: usize, s: usize) -> Vec<(usize, usize)> {
    (0..kappa)
        .flat_map(|slot| (0..per_slot).map(move |ant| (slot, ant)))
        .take(s)
        .collect()
}

/// Builds the scheme for DoF tuple `d`. `d` must lie in D1 or D2 (Mid
/// regime) or in the single inner-bound polytope (LowM/HighM); interior
/// points of the convex hull are served by time sharing, not by one design.
pub fn design_scheme(
    h: &ChannelSet,
    d: &DofTuple,
    cfg: &SystemConfig,
) -> Result<LinearScheme, PhyError> {
    let idx = canonical_groups(cfg.k).expect("validated cfg");
    let regime = cfg.regime();
    let mut rng = ChaCha8Rng::seed_from_u64(h.seed ^ 0x9e37_79b9_7f4a_7c15);

    let active: Vec<usize> = (0..d.len()).filter(|&j| d.0[j] > 1e-12).collect();
    let groups: Vec<Group> = active.iter().map(|&j| idx.group_at(j)).collect();

    match regime {
        Regime::LowM => {
            let total: f64 = d.total();
            if total > cfg.m as f64 + 1e-9 {
                return Err(PhyError::OutsideRegion(format!("sum {} > M {}", total, cfg.m)));
            }
            let kappa = smallest_kappa(&d.0).ok_or_else(|| PhyError::Kappa(d.0.clone()))?;
            design_low_m(h, d, cfg, kappa, &active, &groups, &mut rng)
        }
        Regime::HighM => {
            for user in 1..=cfg.k {
                let load: f64 = active
                    .iter()
                    .zip(&groups)
                    .filter(|(_, g)| g.contains_user(user))
                    .map(|(&j, _)| d.0[j])
                    .sum();
                if load > cfg.n as f64 + 1e-9 {
                    return Err(PhyError::OutsideRegion(format!(
                        "user {user} load {load} > N {}",
                        cfg.n
                    )));
                }
            }
            let kappa = smallest_kappa(&d.0).ok_or_else(|| PhyError::Kappa(d.0.clone()))?;
            let m_a = cfg.m.min(cfg.k * cfg.n);
            design_zero_forced(h, d, cfg, kappa, &active, &groups, m_a, cfg.n * kappa, &mut rng)
        }
        Regime::Mid => {
            let region = inner_bound(cfg);
            let RegionKind::Mid { d1, d2_template } = &region.kind else { unreachable!() };
            if d2_template.contains_gated(d, idx.groups(), 1e-7).unwrap() {
                let kappa = smallest_kappa(&d.0).ok_or_else(|| PhyError::Kappa(d.0.clone()))?;
                design_mid_d2(h, d, cfg, kappa, &active, &groups, &mut rng)
            } else if d1.contains(d, 1e-7).unwrap() {
                // D1 is achieved like the HighM regime with each user
                // restricted to M/K receive dimensions.
                let mut vals = d.0.clone();
                vals.push(cfg.m as f64 / cfg.k as f64);
                let kappa = smallest_kappa(&vals).ok_or(PhyError::Kappa(vals))?;
                let rows = kappa * cfg.m / cfg.k;
                design_zero_forced(h, d, cfg, kappa, &active, &groups, cfg.m, rows, &mut rng)
            } else {
                Err(PhyError::OutsideRegion("point is in neither D1 nor D2".into()))
            }
        }
    }
}

fn check_antennas(h: &ChannelSet, needed: usize) -> Result<(), PhyError> {
    let got = h.h[0].ncols();
    if got < needed {
        Err(PhyError::Antennas { got, needed })
    } else {
        Ok(())
    }
}

/// LowM: one random unitary precoder over the activated columns; every user
/// has enough receive dimensions (N >= M) to zero-force by pseudo-inverse.
fn design_low_m(
    h: &ChannelSet,
    d: &DofTuple,
    cfg: &SystemConfig,
    kappa: usize,
    active: &[usize],
    groups: &[Group],
    rng: &mut ChaCha8Rng,
) -> Result<LinearScheme, PhyError> {
    check_antennas(h, cfg.m)?;
    let streams: Vec<usize> = active.iter().map(|&j| (d.0[j] * kappa as f64).round() as usize).collect();
    let s_total: usize = streams.iter().sum();
    let cols = slot_major_cols(kappa, cfg.m, s_total);
    let mut scheme = LinearScheme {
        regime: Regime::LowM,
        kappa,
        cols,
        groups: groups.to_vec(),
        streams: streams.clone(),
        u: vec![],
        v: vec![],
        g: vec![],
        mix: None,
    };
    let u_all = random_orthonormal(rng, s_total, s_total);
    let mut offset = 0;
    for &s in &streams {
        scheme.u.push(u_all.columns(offset, s).into());
        offset += s;
    }
    // Per user: pseudo-invert the whole effective channel; the rows matching
    // each desired group's block null every other stream.
    let mut v = vec![Vec::new(); groups.len()];
    for user in 1..=cfg.k {
        if !groups.iter().any(|g| g.contains_user(user)) {
            continue;
        }
        let ht = scheme.extended_channel(h, user);
        let w = pinv(&(&ht * &u_all));
        let mut offset = 0;
        for (a, &s) in streams.iter().enumerate() {
            if groups[a].contains_user(user) {
                v[a].push(w.rows(offset, s).into());
            }
            offset += s;
        }
    }
    scheme.v = v;
    scheme.g = vec![None; groups.len()];
    Ok(scheme)
}

/// Transmit-side zero forcing used by HighM and the D1 part of Mid: each
/// group's precoder lives in the null space of all non-member (possibly
/// row-restricted) channels; combiners pseudo-invert the per-user
/// meta-signal. `user_rows` is the number of leading extended receive rows
/// each user keeps (kappa*N for HighM, kappa*M/K for D1).
#[allow(clippy::too_many_arguments)]
fn design_zero_forced(
    h: &ChannelSet,
    d: &DofTuple,
    cfg: &SystemConfig,
    kappa: usize,
    active: &[usize],
    groups: &[Group],
    m_a: usize,
    user_rows: usize,
    rng: &mut ChaCha8Rng,
) -> Result<LinearScheme, PhyError> {
    check_antennas(h, m_a)?;
    let streams: Vec<usize> = active.iter().map(|&j| (d.0[j] * kappa as f64).round() as usize).collect();
    let s_cols = kappa * m_a;
    let mut scheme = LinearScheme {
        regime: cfg.regime(),
        kappa,
        cols: slot_major_cols(kappa, m_a, s_cols),
        groups: groups.to_vec(),
        streams: streams.clone(),
        u: vec![],
        v: vec![],
        g: vec![None; groups.len()],
        mix: None,
    };
    let ext_rows = kappa * cfg.n;
    // Each user keeps `user_rows` receive dimensions. A generic projection
    // (rather than a row subset) keeps the restricted channels in general
    // position with respect to the slot structure of the extension.
    let projections: Vec<CMat> = (1..=cfg.k)
        .map(|_| {
            if user_rows == ext_rows {
                CMat::identity(user_rows, ext_rows)
            } else {
                random_matrix(rng, user_rows, ext_rows)
            }
        })
        .collect();
    let restricted: Vec<CMat> = (1..=cfg.k)
        .map(|i| &projections[i - 1] * scheme.extended_channel(h, i))
        .collect();

    for (a, (&group, &s)) in groups.iter().zip(&streams).enumerate() {
        let outsiders: Vec<usize> = (1..=cfg.k).filter(|&i| !group.contains_user(i)).collect();
        let u_a = if outsiders.is_empty() {
            random_orthonormal(rng, s_cols, s)
        } else {
            let mut stacked = CMat::zeros(outsiders.len() * user_rows, s_cols);
            for (t, &i) in outsiders.iter().enumerate() {
                stacked.rows_mut(t * user_rows, user_rows).copy_from(&restricted[i - 1]);
            }
            let basis = null_space(&stacked);
            if basis.ncols() < s {
                return Err(PhyError::NullSpace {
                    group: groups[a],
                    needed: s,
                    got: basis.ncols(),
                });
            }
            &basis * random_matrix(rng, basis.ncols(), s)
        };
        scheme.u.push(u_a);
    }
    for u in scheme.u.iter_mut() {
        normalize_columns(u);
    }

    let mut v = vec![Vec::new(); groups.len()];
    for user in 1..=cfg.k {
        let mine: Vec<usize> =
            (0..groups.len()).filter(|&a| groups[a].contains_user(user)).collect();
        if mine.is_empty() {
            continue;
        }
        let total: usize = mine.iter().map(|&a| streams[a]).sum();
        let mut w = CMat::zeros(user_rows, total);
        let mut offset = 0;
        for &a in &mine {
            w.columns_mut(offset, streams[a])
                .copy_from(&(&restricted[user - 1] * &scheme.u[a]));
            offset += streams[a];
        }
        let w_inv = pinv(&w);
        let mut offset = 0;
        for &a in &mine {
            // compose with the receive projection to act on all kappa*N dims
            v[a].push(w_inv.rows(offset, streams[a]) * &projections[user - 1]);
            offset += streams[a];
        }
    }
    scheme.v = v;
    Ok(scheme)
}

/// Mid-regime D2 construction (Eqs. 24-25): for each multicast group the
/// pair (G_A, {V^i_A}) is a random point in the left null space of the
/// stacked system [I; -H_i], so all members see the identical effective
/// channel G_A; the precoder inverts the stacked G.
fn design_mid_d2(
    h: &ChannelSet,
    d: &DofTuple,
    cfg: &SystemConfig,
    kappa: usize,
    active: &[usize],
    groups: &[Group],
    rng: &mut ChaCha8Rng,
) -> Result<LinearScheme, PhyError> {
    let streams: Vec<usize> = active.iter().map(|&j| (d.0[j] * kappa as f64).round() as usize).collect();
    let s_cols: usize = streams.iter().sum();
    check_antennas(h, cfg.m)?;
    let mut scheme = LinearScheme {
        regime: Regime::Mid,
        kappa,
        cols: slot_major_cols(kappa, cfg.m, kappa * cfg.m),
        groups: groups.to_vec(),
        streams: streams.clone(),
        u: vec![],
        v: vec![Vec::new(); groups.len()],
        g: vec![None; groups.len()],
        mix: None,
    };
    let ext_rows = kappa * cfg.n;

    // Generic mixing of the S = kappa * sum(d) stream dimensions over the
    // whole extended array: the effective channels H_i * Phi behave like
    // generic kappa*N x S channels, i.e. like an activation of sum(d)
    // (possibly fractional) antennas. Activating a plain column subset keeps
    // the block-diagonal slot structure and produces spurious subspace
    // intersections at boundary DoF tuples.
    let phi = random_matrix(rng, kappa * cfg.m, s_cols);
    let effective: Vec<CMat> =
        (1..=cfg.k).map(|i| scheme.extended_channel(h, i) * &phi).collect();

    for (a, (&group, &s)) in groups.iter().zip(&streams).enumerate() {
        let members = group.members();
        if members.len() == 1 {
            let v = random_orthonormal(rng, ext_rows, s).adjoint();
            let g = &v * &effective[members[0] - 1];
            scheme.g[a] = Some(g);
            scheme.v[a].push(v);
            continue;
        }
        // x = [g | v^{i1} | ... | v^{is}] with g = v^i (H_i Phi) for every
        // member: left null space of C = [I_S ...; -H_{i1} 0 ...; 0 -H_{i2} ...].
        let sz = members.len();
        let width = s_cols + sz * ext_rows;
        let mut c = CMat::zeros(width, sz * s_cols);
        for (t, &i) in members.iter().enumerate() {
            for j in 0..s_cols {
                c[(j, t * s_cols + j)] = Complex::from(1.0);
            }
            c.view_mut((s_cols + t * ext_rows, t * s_cols), (ext_rows, s_cols))
                .copy_from(&(-&effective[i - 1]));
        }
        let basis = null_space(&c.transpose());
        if basis.ncols() < s {
            return Err(PhyError::NullSpace { group, needed: s, got: basis.ncols() });
        }
        // rows of x: s random combinations of the null basis
        let x = (&basis * random_matrix(rng, basis.ncols(), s)).transpose();
        scheme.g[a] = Some(x.columns(0, s_cols).into());
        for t in 0..sz {
            scheme.v[a].push(x.columns(s_cols + t * ext_rows, ext_rows).into());
        }
    }

    // Precoder: invert the stacked effective channels (Eq. 25), so each
    // group's streams land only on its own block; compose with the mixing to
    // map back onto the extended array.
    let mut g_all = CMat::zeros(s_cols, s_cols);
    let mut offset = 0;
    for (a, &s) in streams.iter().enumerate() {
        g_all.rows_mut(offset, s).copy_from(scheme.g[a].as_ref().unwrap());
        offset += s;
    }
    let u_all = pinv(&g_all);
    let mut offset = 0;
    for &s in &streams {
        let mut u: CMat = &phi * u_all.columns(offset, s);
        normalize_columns(&mut u);
        scheme.u.push(u);
        offset += s;
    }
    scheme.mix = Some(phi);
    Ok(scheme)
}

/// Numerical check of the scheme invariants.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// max over (i in A, B != A) of |V H U_B| / (|V||H||U_B|).
    pub nulling_residual: f64,
    /// min over (i in A) of sigma_min/sigma_max of V H U_A.
    pub rank_margin: f64,
    /// max over Mid-regime groups of |V H - G| / |G|.
    pub equalization_dev: f64,
    pub pass: bool,
}

pub const EPS_REL: f64 = 1e-8;

pub fn verify_scheme(scheme: &LinearScheme, h: &ChannelSet, _d: &DofTuple) -> VerifyReport {
    let mut nulling = 0.0f64;
    let mut margin = f64::INFINITY;
    let mut equalization = 0.0f64;
    for (a, group) in scheme.groups.iter().enumerate() {
        for (pos, &i) in group.members().iter().enumerate() {
            let ht = scheme.extended_channel(h, i);
            let v = &scheme.v[a][pos];
            let eff = v * &ht;
            for b in 0..scheme.groups.len() {
                let prod = &eff * &scheme.u[b];
                if b == a {
                    let sv = prod.svd(false, false).singular_values;
                    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &s| {
                        (l.min(s), h.max(s))
                    });
                    margin = margin.min(lo / hi.max(f64::MIN_POSITIVE));
                } else {
                    let scale = v.norm() * ht.norm() * scheme.u[b].norm();
                    nulling = nulling.max(prod.norm() / scale.max(f64::MIN_POSITIVE));
                }
            }
            if let Some(g) = &scheme.g[a] {
                // the equalized channel lives on the stream dimensions
                let eff_g = match &scheme.mix {
                    Some(phi) => &eff * phi,
                    None => eff.clone(),
                };
                equalization = equalization.max((&eff_g - g).norm() / g.norm());
            }
        }
    }
    let pass = nulling <= EPS_REL && margin > 1e-10 && equalization <= EPS_REL;
    VerifyReport { nulling_residual: nulling, rank_margin: margin, equalization_dev: equalization, pass }
}

/// Achieved rate per group in bits per channel use at transmit power `p`.
/// Power is split equally over the phase's data streams; multicast rates
/// take the minimum over group members.
pub fn phase_rates(scheme: &LinearScheme, h: &ChannelSet, p: f64) -> Vec<f64> {
    let phys_streams = scheme.total_streams() as f64 / scheme.kappa as f64;
    let per_stream = p / phys_streams;
    scheme
        .groups
        .iter()
        .enumerate()
        .map(|(a, group)| {
            group
                .members()
                .iter()
                .enumerate()
                .map(|(pos, &i)| {
                    let ht = scheme.extended_channel(h, i);
                    // re-orthonormalize combiner rows so the noise stays white
                    let q = scheme.v[a][pos].adjoint().qr().q();
                    let eff = q.adjoint() * &ht * &scheme.u[a];
                    let sv = eff.svd(false, false).singular_values;
                    sv.iter().map(|&s| (1.0 + per_stream * s * s).log2()).sum::<f64>()
                        / scheme.kappa as f64
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Finite-SNR Monte Carlo result. Rates and phase times are ensemble means;
/// `ndt_mean`/`ndt_std` aggregate the per-draw simulated NDT.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub power: f64,
    pub draws: usize,
    pub ndt_mean: f64,
    pub ndt_std: f64,
    /// Mean delivery time per phase, in channel uses.
    pub phase_time_mean: Vec<f64>,
    /// Active groups per phase.
    pub phase_groups: Vec<Vec<Group>>,
    /// Mean rate per (phase, active group), bits per channel use.
    pub phase_rate_mean: Vec<Vec<f64>>,
}

/// Simulates the plan at transmit power `p` over `draws` independent channel
/// realizations. Per phase k with weight beta_k over corner point e_k, the
/// message loads are beta_k * e_k fractions of F and the phase lasts until
/// the slowest message is through.
pub fn simulate_delivery(
    plan: &DeliveryPlan,
    f: &MessageLengthVector,
    cfg: &SystemConfig,
    p: f64,
    draws: usize,
    seed: u64,
) -> Result<SimResult, PhyError> {
    assert!(draws >= 1 && p > 0.0);
    for j in 0..f.len() {
        let recon: f64 = plan.phases.iter().map(|ph| ph.weight * ph.point.0[j]).sum();
        if (recon - f.0[j]).abs() > 1e-6 {
            return Err(PhyError::PlanMismatch { index: j, expected: f.0[j], got: recon });
        }
    }
    let idx = canonical_groups(cfg.k).expect("validated cfg");
    let f_bits = cfg.f_bits as f64;

    let per_draw: Vec<(f64, Vec<f64>, Vec<Vec<f64>>)> = (0..draws as u64)
        .into_par_iter()
        .map(|draw| {
            let h = sample_channels(cfg, cfg.m, seed.wrapping_add(draw));
            let mut times = Vec::with_capacity(plan.phases.len());
            let mut rates_all = Vec::with_capacity(plan.phases.len());
            for (k, phase) in plan.phases.iter().enumerate() {
                let scheme = design_scheme(&h, &phase.point, cfg)
                    .map_err(|e| PhyError::Phase { phase: k, source: Box::new(e) })?;
                let rates = phase_rates(&scheme, &h, p);
                let t_k = scheme
                    .groups
                    .iter()
                    .zip(&rates)
                    .map(|(g, &rate)| {
                        let load = phase.weight * phase.point.0[idx.index_of(*g)] * f_bits;
                        load / rate
                    })
                    .fold(0.0, f64::max);
                times.push(t_k);
                rates_all.push(rates);
            }
            let total: f64 = times.iter().sum();
            let ndt = total / (f_bits / p.log2());
            Ok((ndt, times, rates_all))
        })
        .collect::<Result<_, PhyError>>()?;

    let n = draws as f64;
    let ndt_mean = per_draw.iter().map(|d| d.0).sum::<f64>() / n;
    let var = per_draw.iter().map(|d| (d.0 - ndt_mean).powi(2)).sum::<f64>() / n;
    let phases = plan.phases.len();
    let mut phase_time_mean = vec![0.0; phases];
    let mut phase_rate_mean: Vec<Vec<f64>> =
        per_draw[0].2.iter().map(|r| vec![0.0; r.len()]).collect();
    for (_, times, rates) in &per_draw {
        for (k, &t) in times.iter().enumerate() {
            phase_time_mean[k] += t / n;
        }
        for (k, rs) in rates.iter().enumerate() {
            for (g, &r) in rs.iter().enumerate() {
                phase_rate_mean[k][g] += r / n;
            }
        }
    }
    let phase_groups = plan
        .phases
        .iter()
        .map(|ph| {
            idx.groups()
                .iter()
                .zip(&ph.point.0)
                .filter(|(_, &v)| v > 1e-12)
                .map(|(&g, _)| g)
                .collect()
        })
        .collect();
    Ok(SimResult {
        power: p,
        draws,
        ndt_mean,
        ndt_std: var.sqrt(),
        phase_time_mean,
        phase_groups,
        phase_rate_mean,
    })
}

/// Benchmark plan: every message in its own phase at DoF min(M, N).
pub fn time_sharing_plan(f: &MessageLengthVector, cfg: &SystemConfig) -> DeliveryPlan {
    let dof = cfg.m.min(cfg.n) as f64;
    let mut phases = Vec::new();
    for (j, &len) in f.0.iter().enumerate() {
        if len <= 0.0 {
            continue;
        }
        let mut point = vec![0.0; f.len()];
        point[j] = dof;
        phases.push(crate::ndt::Phase { point: DofTuple(point), weight: len / dof });
    }
    let tau: f64 = phases.iter().map(|p| p.weight).sum();
    let d_star = DofTuple(f.0.iter().map(|&v| if v > 0.0 { v / tau } else { 0.0 }).collect());
    DeliveryPlan { tau, d_star, phases }
}
