//! Cache placement (centralized and decentralized), Table-style fixture
//! ingestion, and coded-message generation from user demands.
//!
//! Only subfile *lengths* are tracked: the DoF/NDT analysis depends on the
//! length of each XOR-combined message, never on payload bits.

use crate::model::{canonical_groups, MessageLengthVector, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CachingError {
    #[error("centralized placement needs integer K*mu, got {0}")]
    NonIntegerKmu(f64),
    #[error("file {file}: subfile lengths sum to {sum}, expected 1")]
    Partition { file: usize, sum: f64 },
    #[error("user {user}: cached fraction {used} exceeds budget {budget}")]
    Memory { user: usize, used: f64, budget: f64 },
    #[error("fixture parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("demand entry {value} outside library [1, {l}]")]
    DemandRange { value: usize, l: usize },
    #[error("library has {l} files but worst-case demand needs {k}")]
    LibraryTooSmall { l: usize, k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheKind {
    Centralized,
    Decentralized,
    Fixture,
}

/// Subfile lengths per (file, cacher subset), as fractions of F. Subsets are
/// bitmasks with bit i-1 for user i; mask 0 is the uncached part.
#[derive(Debug, Clone)]
pub struct CacheState {
    pub k: usize,
    pub l: usize,
    pub kind: CacheKind,
    /// lengths[file - 1][mask]
    lengths: Vec<Vec<f64>>,
}

impl CacheState {
    pub fn length(&self, file: usize, mask: u32) -> f64 {
        self.lengths[file - 1][mask as usize]
    }

    /// Fraction of file `file` available at user `user` (all subsets
    /// containing the user).
    pub fn cached_at(&self, file: usize, user: usize) -> f64 {
        let bit = 1usize << (user - 1);
        self.lengths[file - 1]
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask & bit != 0)
            .map(|(_, &v)| v)
            .sum()
    }

    /// Partition (per file) and memory (per user) invariants.
    pub fn validate(&self, mu: f64, eps: f64) -> Result<(), CachingError> {
        for (fi, per_file) in self.lengths.iter().enumerate() {
            let sum: f64 = per_file.iter().sum();
            if (sum - 1.0).abs() > eps {
                return Err(CachingError::Partition { file: fi + 1, sum });
            }
        }
        let budget = mu * self.l as f64;
        for user in 1..=self.k {
            let used: f64 = (1..=self.l).map(|f| self.cached_at(f, user)).sum();
            if used > budget + eps {
                return Err(CachingError::Memory { user, used, budget });
            }
        }
        Ok(())
    }
}

/// User demands, 1-based file indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVector(pub Vec<usize>);

impl DemandVector {
    pub fn new(r: Vec<usize>, l: usize) -> Result<Self, CachingError> {
        for &v in &r {
            if v < 1 || v > l {
                return Err(CachingError::DemandRange { value: v, l });
            }
        }
        Ok(DemandVector(r))
    }
}

/// Worst-case demand: every user requests a distinct file.
pub fn worst_case_demand(cfg: &SystemConfig) -> Result<DemandVector, CachingError> {
    if cfg.l < cfg.k {
        return Err(CachingError::LibraryTooSmall { l: cfg.l, k: cfg.k });
    }
    Ok(DemandVector((1..=cfg.k).collect()))
}

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut v = 1u64;
    for i in 0..k {
        v = v * (n - i) as u64 / (i + 1) as u64;
    }
    v
}

/// Symmetric centralized placement: each file split equally over all subsets
/// of size K*mu, each subfile cached exactly at its subset.
pub fn centralized_place(cfg: &SystemConfig) -> Result<CacheState, CachingError> {
    let km = cfg.mu * cfg.k as f64;
    let t = km.round();
    if (km - t).abs() > 1e-9 {
        return Err(CachingError::NonIntegerKmu(km));
    }
    let t = t as usize;
    let share = 1.0 / binom(cfg.k, t) as f64;
    let mut per_file = vec![0.0; 1 << cfg.k];
    for (mask, slot) in per_file.iter_mut().enumerate() {
        if (mask as u32).count_ones() as usize == t {
            *slot = share;
        }
    }
    Ok(CacheState {
        k: cfg.k,
        l: cfg.l,
        kind: CacheKind::Centralized,
        lengths: vec![per_file; cfg.l],
    })
}

/// Random per-bit placement: each file is split into `bits` units and every
/// user caches exactly round(mu*bits) of them, chosen uniformly at random.
/// `bits = 0` returns the large-F limit exactly: lengths = mu^|S| (1-mu)^(K-|S|)
/// per subset S.
pub fn decentralized_place(cfg: &SystemConfig, seed: u64, bits: usize) -> CacheState {
    let masks = 1usize << cfg.k;
    let mut lengths = Vec::with_capacity(cfg.l);
    if bits == 0 {
        let per_file: Vec<f64> = (0..masks)
            .map(|mask| {
                let s = (mask as u32).count_ones() as i32;
                cfg.mu.powi(s) * (1.0 - cfg.mu).powi(cfg.k as i32 - s)
            })
            .collect();
        lengths = vec![per_file; cfg.l];
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let per_user = (cfg.mu * bits as f64).round() as usize;
        for _ in 0..cfg.l {
            let mut unit_masks = vec![0usize; bits];
            for user in 0..cfg.k {
                for idx in rand::seq::index::sample(&mut rng, bits, per_user) {
                    unit_masks[idx] |= 1 << user;
                }
            }
            let mut per_file = vec![0.0; masks];
            for m in unit_masks {
                per_file[m] += 1.0;
            }
            for v in per_file.iter_mut() {
                *v /= bits as f64;
            }
            lengths.push(per_file);
        }
    }
    CacheState { k: cfg.k, l: cfg.l, kind: CacheKind::Decentralized, lengths }
}

/// Default granularity for sampled decentralized placement.
pub const DEFAULT_PLACEMENT_BITS: usize = 10_000;

fn parse_fraction(s: &str) -> Option<f64> {
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        if den == 0.0 {
            return None;
        }
        Some(num / den)
    } else {
        s.trim().parse().ok()
    }
}

fn parse_subset_label(label: &str, k: usize) -> Option<u32> {
    let inner = label.trim().strip_prefix('{')?.strip_suffix('}')?;
    let mut mask = 0u32;
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let user: usize = part.parse().ok()?;
        if user < 1 || user > k {
            return None;
        }
        mask |= 1 << (user - 1);
    }
    Some(mask)
}

/// Loads a Table-I-style placement: a header of subset labels (canonical
/// order plus `{}` for the uncached part), then one row per file with decimal
/// or `p/q` entries. Lines starting with `#` are comments.
pub fn load_cache_fixture(text: &str, cfg: &SystemConfig) -> Result<CacheState, CachingError> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = rows
        .next()
        .ok_or(CachingError::Parse { line: 0, msg: "empty fixture".into() })?;
    let mut fields = header.split_whitespace();
    let first = fields.next().unwrap_or("");
    if first != "file" {
        return Err(CachingError::Parse {
            line: hline,
            msg: format!("header must start with 'file', got '{first}'"),
        });
    }
    let columns: Vec<u32> = fields
        .map(|lbl| {
            parse_subset_label(lbl, cfg.k).ok_or(CachingError::Parse {
                line: hline,
                msg: format!("bad subset label '{lbl}'"),
            })
        })
        .collect::<Result<_, _>>()?;
    let expected = 1usize << cfg.k;
    if columns.len() != expected {
        return Err(CachingError::Parse {
            line: hline,
            msg: format!("expected {expected} subset columns, got {}", columns.len()),
        });
    }

    let mut lengths = vec![vec![f64::NAN; expected]; cfg.l];
    for (line, row) in rows {
        let mut fields = row.split_whitespace();
        let file: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(CachingError::Parse { line, msg: "missing file index".into() })?;
        if file < 1 || file > cfg.l {
            return Err(CachingError::Parse { line, msg: format!("file index {file} out of range") });
        }
        for &mask in &columns {
            let raw = fields
                .next()
                .ok_or(CachingError::Parse { line, msg: "missing length entry".into() })?;
            let v = parse_fraction(raw)
                .ok_or(CachingError::Parse { line, msg: format!("bad length '{raw}'") })?;
            lengths[file - 1][mask as usize] = v;
        }
    }
    for (fi, per_file) in lengths.iter().enumerate() {
        if per_file.iter().any(|v| v.is_nan()) {
            return Err(CachingError::Parse {
                line: 0,
                msg: format!("file {} has no row", fi + 1),
            });
        }
    }
    let state = CacheState { k: cfg.k, l: cfg.l, kind: CacheKind::Fixture, lengths };
    state.validate(cfg.mu, 1e-9)?;
    Ok(state)
}

/// Coded-message lengths from Eq.-2 style XOR combining with zero-padding:
/// a_A = max_{i in A} |W_{r_i, A\{i}}|, in canonical group order.
pub fn generate_coded_messages(cache: &CacheState, r: &DemandVector) -> MessageLengthVector {
    let idx = canonical_groups(cache.k).expect("valid cache");
    MessageLengthVector(
        idx.groups()
            .iter()
            .map(|g| {
                g.members()
                    .iter()
                    .map(|&i| cache.length(r.0[i - 1], g.0 & !(1 << (i - 1))))
                    .fold(0.0, f64::max)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg(k: usize, mu: f64) -> SystemConfig {
        SystemConfig::new(k, 5, 3, 4, 100, mu, 1.0).unwrap()
    }

    const TABLE_FIXTURE: &str = "\
file {1} {2} {3} {1,2} {1,3} {2,3} {1,2,3} {}
1 0.05 0.1 0.25 0.25 0.1 0.05 0 0.2
2 0.15 0.3 0.2 0.05 0.15 0 0.05 0.1
3 0.25 0.35 0.2 0 0.15 0.05 0 0
4 0.2 0.15 0.15 0.05 0.05 0.1 0.1 0.2
";

    #[test]
    fn centralized_structure() {
        let c = centralized_place(&cfg(3, 1.0 / 3.0)).unwrap();
        // each file in 3 subfiles of 1/3, one per user
        for file in 1..=4 {
            for user in 1..=3 {
                assert_abs_diff_eq!(c.length(file, 1 << (user - 1)), 1.0 / 3.0, epsilon = 1e-12);
            }
            assert_eq!(c.length(file, 0), 0.0);
            assert_eq!(c.length(file, 0b111), 0.0);
        }
        c.validate(1.0 / 3.0, 1e-9).unwrap();

        let empty = centralized_place(&cfg(3, 0.0)).unwrap();
        assert_abs_diff_eq!(empty.length(1, 0), 1.0, epsilon = 1e-12);
        let full = centralized_place(&cfg(3, 1.0)).unwrap();
        assert_abs_diff_eq!(full.length(1, 0b111), 1.0, epsilon = 1e-12);

        assert!(matches!(
            centralized_place(&cfg(3, 0.5)),
            Err(CachingError::NonIntegerKmu(_))
        ));
    }

    #[test]
    fn decentralized_lln_sentinel() {
        let c = decentralized_place(&cfg(3, 0.4), 1, 0);
        assert_abs_diff_eq!(c.length(1, 0b011), 0.4 * 0.4 * 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(c.length(2, 0), 0.6f64.powi(3), epsilon = 1e-12);
        c.validate(0.4, 1e-9).unwrap();

        let none = decentralized_place(&cfg(3, 0.0), 1, 0);
        assert_abs_diff_eq!(none.length(1, 0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decentralized_sampling_deterministic_and_valid() {
        let config = cfg(3, 0.4);
        let a = decentralized_place(&config, 42, 1000);
        let b = decentralized_place(&config, 42, 1000);
        for file in 1..=4 {
            for mask in 0..8u32 {
                assert_eq!(a.length(file, mask), b.length(file, mask));
            }
        }
        a.validate(0.4, 1e-9).unwrap();
        assert_ne!(
            decentralized_place(&config, 43, 1000).lengths,
            a.lengths,
            "different seeds should differ"
        );
    }

    #[test]
    fn decentralized_sampling_approaches_lln() {
        let config = cfg(3, 0.4);
        // average subset lengths over seeds against the product formula
        let seeds = 30;
        let bits = 2000;
        let mut mean = vec![0.0f64; 8];
        for seed in 0..seeds {
            let c = decentralized_place(&config, seed, bits);
            for mask in 0..8u32 {
                mean[mask as usize] += c.length(1, mask) / seeds as f64;
            }
        }
        for mask in 0..8usize {
            let s = (mask as u32).count_ones() as i32;
            let want = 0.4f64.powi(s) * 0.6f64.powi(3 - s);
            // binomial std of the mean, padded for the without-replacement correlation
            let sigma = (want * (1.0 - want) / (bits * seeds as usize) as f64).sqrt();
            assert!(
                (mean[mask] - want).abs() < 5.0 * sigma + 1e-3,
                "mask {mask}: mean {} vs {want}",
                mean[mask]
            );
        }
    }

    #[test]
    fn fixture_round_trip_and_messages() {
        let config = cfg(3, 0.4);
        let cache = load_cache_fixture(TABLE_FIXTURE, &config).unwrap();
        assert_abs_diff_eq!(cache.length(1, 0), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(cache.length(3, 0b010), 0.35, epsilon = 1e-12);
        // memory: each user holds 1.6 = mu*L
        for user in 1..=3 {
            let used: f64 = (1..=4).map(|f| cache.cached_at(f, user)).sum();
            assert_abs_diff_eq!(used, 1.6, epsilon = 1e-12);
        }

        let r = worst_case_demand(&config).unwrap();
        assert_eq!(r.0, vec![1, 2, 3]);
        let f = generate_coded_messages(&cache, &r);
        let want = [0.2, 0.1, 0.0, 0.15, 0.25, 0.35, 0.15];
        for (got, want) in f.0.iter().zip(want) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn fixture_accepts_fractions_and_rejects_bad_rows() {
        let config = cfg(2, 0.5);
        let good = "\
file {1} {2} {1,2} {}
1 1/4 1/4 1/4 1/4
2 0.5 0 0.25 0.25
3 0 0.25 1/4 1/2
4 1/4 1/2 0 1/4
";
        let cache = load_cache_fixture(good, &config).unwrap();
        assert_abs_diff_eq!(cache.length(1, 0b01), 0.25, epsilon = 1e-12);

        let bad_sum = good.replace("1 1/4 1/4 1/4 1/4", "1 1/4 1/4 1/4 0.15");
        assert!(matches!(
            load_cache_fixture(&bad_sum, &config),
            Err(CachingError::Partition { file: 1, .. })
        ));
        let bad_label = good.replace("{1,2}", "{1,5}");
        assert!(matches!(
            load_cache_fixture(&bad_label, &config),
            Err(CachingError::Parse { .. })
        ));
    }

    #[test]
    fn centralized_worst_case_message_lengths() {
        // a_A = (1-mu)/C(K-1, K mu) for |A| = K mu + 1, zero otherwise
        for k in 2..=4usize {
            for t in 0..k {
                let mu = t as f64 / k as f64;
                let config = SystemConfig::new(k, 5, 3, k, 100, mu, 1.0).unwrap();
                let cache = centralized_place(&config).unwrap();
                let f = generate_coded_messages(&cache, &worst_case_demand(&config).unwrap());
                let idx = canonical_groups(k).unwrap();
                let want = (1.0 - mu) / binom(k - 1, t) as f64;
                for (g, &a) in idx.groups().iter().zip(&f.0) {
                    if g.size() == t + 1 {
                        assert_abs_diff_eq!(a, want, epsilon = 1e-12);
                    } else {
                        assert_eq!(a, 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn no_cache_means_unicast_only() {
        let config = cfg(3, 0.0);
        let cache = centralized_place(&config).unwrap();
        let f = generate_coded_messages(&cache, &worst_case_demand(&config).unwrap());
        assert_eq!(f.0, vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn permutation_equivariance() {
        // relabel users by sigma = (1 2 3) -> (2 3 1) in cache, demand, and groups
        let config = cfg(3, 0.4);
        let cache = load_cache_fixture(TABLE_FIXTURE, &config).unwrap();
        let sigma = [2usize, 3, 1]; // sigma[i-1] = new label of user i
        let permute_mask = |mask: u32| -> u32 {
            (0..3).filter(|&i| mask >> i & 1 == 1).map(|i| 1 << (sigma[i] - 1)).sum()
        };
        let mut permuted_lengths = vec![vec![0.0; 8]; 4];
        for file in 1..=4usize {
            for mask in 0..8u32 {
                permuted_lengths[file - 1][permute_mask(mask) as usize] =
                    cache.length(file, mask);
            }
        }
        let permuted =
            CacheState { k: 3, l: 4, kind: CacheKind::Fixture, lengths: permuted_lengths };

        let r = DemandVector::new(vec![1, 2, 3], 4).unwrap();
        // user with new label j requested what old user sigma^-1(j) did
        let mut r_perm = vec![0usize; 3];
        for i in 1..=3usize {
            r_perm[sigma[i - 1] - 1] = r.0[i - 1];
        }
        let r_perm = DemandVector::new(r_perm, 4).unwrap();

        let f = generate_coded_messages(&cache, &r);
        let f_perm = generate_coded_messages(&permuted, &r_perm);
        let idx = canonical_groups(3).unwrap();
        for (pos, g) in idx.groups().iter().enumerate() {
            let g_new = crate::model::Group(permute_mask(g.0));
            assert_abs_diff_eq!(
                f.0[pos],
                f_perm.0[idx.index_of(g_new)],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn demand_validation() {
        assert!(DemandVector::new(vec![1, 5], 4).is_err());
        assert!(DemandVector::new(vec![4, 4], 4).is_ok());
    }
}
