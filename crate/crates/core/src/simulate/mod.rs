//! Finite-depth realizations of the two random sets and the statistics of
//! their product: pair counts per diagonal, triangle counts per column,
//! projection occupancy, branching diagnostics and pictures.

mod branching;
mod counts;
mod occupancy;
mod realization;
pub mod render;

pub use branching::{
    critical_processes, deterministic_growth_check, unaligned_delta_pairs, CriticalSeries,
    DeltaPairs, GrowthCheck,
};
pub use counts::{
    diagonal_counts, diagonal_counts_with, triangle_counts, CountBackend, DiagonalCounts,
    TriangleCounts,
};
pub use occupancy::{occupancy_profile, OccupancyProfile, Run};
pub use realization::{sample_pair, sample_realization, sample_realization_with, Realization};
pub use render::{render, ImageFormat, RenderView};
