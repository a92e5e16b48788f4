//! Optimal content delivery for multi-antenna coded caching.
//!
//! The delivery phase of a cached broadcast network is treated as a general
//! message-sets transmission problem: every nonempty subset of the K users
//! may request a common coded message. The crate builds the DoF region of
//! the K-user (M, N) channel under that traffic model, minimizes the
//! normalized delivery time (NDT) over the region by linear programming,
//! constructs the matching linear precoding/combining schemes, and checks
//! them at finite SNR by Monte Carlo simulation.

pub mod caching;
pub mod dof_region;
pub mod lp;
pub mod model;
pub mod ndt;
pub mod phy;

pub use dof_region::{
    brute_force_vertices, corner_points, inner_bound, outer_bound, CornerPointSet, Polytope,
    RegionSpec,
};
pub use model::{canonical_groups, DofTuple, Group, GroupIndex, MessageLengthVector, Regime, SystemConfig};
pub use ndt::{solve_ndt, NdtBounds};
