//! Core domain types: system configuration, multicast groups and their
//! canonical ordering, and the dense vectors indexed by that ordering.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("user count K must be at least 2, got {0}")]
    UserCount(usize),
    #[error("antenna counts must be positive (M={m}, N={n})")]
    Antennas { m: usize, n: usize },
    #[error("library size L={l} must be at least K={k}")]
    LibrarySize { l: usize, k: usize },
    #[error("file length F must be positive")]
    FileLength,
    #[error("normalized cache size mu={0} must lie in [0, 1]")]
    CacheSize(f64),
    #[error("transmit power P={0} must be positive")]
    Power(f64),
}

/// Antenna regime of Theorem 2, decided by the ratio M/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// M/N <= 1.
    LowM,
    /// 1 < M/N <= K.
    Mid,
    /// M/N > K.
    HighM,
}

/// Channel and caching dimensions shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of users.
    pub k: usize,
    /// Transmit antennas at the BS.
    pub m: usize,
    /// Receive antennas per user.
    pub n: usize,
    /// Library size (number of files), L >= K.
    pub l: usize,
    /// File length in bits.
    pub f_bits: u64,
    /// Normalized per-user cache size, mu = Q/L in [0, 1].
    pub mu: f64,
    /// Transmit power (linear scale).
    pub power: f64,
}

impl SystemConfig {
    pub fn new(
        k: usize,
        m: usize,
        n: usize,
        l: usize,
        f_bits: u64,
        mu: f64,
        power: f64,
    ) -> Result<Self, ConfigError> {
        if k < 2 {
            return Err(ConfigError::UserCount(k));
        }
        if m == 0 || n == 0 {
            return Err(ConfigError::Antennas { m, n });
        }
        if l < k {
            return Err(ConfigError::LibrarySize { l, k });
        }
        if f_bits == 0 {
            return Err(ConfigError::FileLength);
        }
        if !(0.0..=1.0).contains(&mu) || mu.is_nan() {
            return Err(ConfigError::CacheSize(mu));
        }
        if power <= 0.0 || power.is_nan() {
            return Err(ConfigError::Power(power));
        }
        Ok(Self { k, m, n, l, f_bits, mu, power })
    }

    pub fn regime(&self) -> Regime {
        let ratio = self.m as f64 / self.n as f64;
        if ratio <= 1.0 {
            Regime::LowM
        } else if ratio <= self.k as f64 {
            Regime::Mid
        } else {
            Regime::HighM
        }
    }

    /// Number of multicast groups, 2^K - 1.
    pub fn group_count(&self) -> usize {
        (1usize << self.k) - 1
    }
}

/// A nonempty subset of users, stored as a bitmask with bit i-1 set for user i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group(pub u32);

impl Group {
    pub fn from_members(members: &[usize]) -> Self {
        let mut mask = 0u32;
        for &i in members {
            assert!(i >= 1 && i <= 32, "user indices are 1-based");
            mask |= 1 << (i - 1);
        }
        Group(mask)
    }

    pub fn size(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains_user(&self, user: usize) -> bool {
        user >= 1 && (self.0 >> (user - 1)) & 1 == 1
    }

    /// 1-based members in ascending order.
    pub fn members(&self) -> Vec<usize> {
        (1..=32).filter(|&i| self.contains_user(i)).collect()
    }

    pub fn is_subset_of(&self, other: Group) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset_of(&self, other: Group) -> bool {
        self.is_subset_of(other) && self.0 != other.0
    }

    pub fn is_disjoint_from(&self, other: Group) -> bool {
        self.0 & other.0 == 0
    }

    /// Render as `{1,3}` in serialized output.
    pub fn label(&self) -> String {
        let members: Vec<String> = self.members().iter().map(|m| m.to_string()).collect();
        format!("{{{}}}", members.join(","))
    }
}

/// Canonical ordering of the 2^K - 1 nonempty multicast groups: ascending
/// cardinality, ties broken lexicographically on sorted member lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupIndex {
    k: usize,
    order: Vec<Group>,
    /// Position of each mask in `order` (mask-indexed, entry 0 unused).
    position: Vec<usize>,
}

/// Returns the canonical group ordering for K users.
pub fn canonical_groups(k: usize) -> Result<GroupIndex, ConfigError> {
    if k < 2 {
        return Err(ConfigError::UserCount(k));
    }
    assert!(k <= 16, "group enumeration limited to K <= 16");
    let mut order: Vec<Group> = (1u32..(1 << k)).map(Group).collect();
    order.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.members().cmp(&b.members())));
    let mut position = vec![usize::MAX; 1 << k];
    for (idx, g) in order.iter().enumerate() {
        position[g.0 as usize] = idx;
    }
    Ok(GroupIndex { k, order, position })
}

impl GroupIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn groups(&self) -> &[Group] {
        &self.order
    }

    pub fn group_at(&self, idx: usize) -> Group {
        self.order[idx]
    }

    pub fn index_of(&self, g: Group) -> usize {
        let pos = self.position[g.0 as usize];
        assert!(pos != usize::MAX, "group {:?} outside index for K={}", g, self.k);
        pos
    }
}

/// A nonnegative real vector over the canonical groups, in data streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofTuple(pub Vec<f64>);

impl DofTuple {
    pub fn zeros(len: usize) -> Self {
        DofTuple(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Coded-message lengths as fractions of F, over the canonical groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageLengthVector(pub Vec<f64>);

impl MessageLengthVector {
    pub fn zeros(len: usize) -> Self {
        MessageLengthVector(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v <= 0.0)
    }
}
