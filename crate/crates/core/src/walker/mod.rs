//! Greedy likelihood-guided walks over the region adjacency graph.
//!
//! Each extension step scores the candidates in the bounded-order
//! neighborhood of the walk's last vertex by the product of a visual term
//! (histogram intersection through a Bradford density), a curvature term (von
//! Mises density of the half turn angle) and a distance term (normalized step
//! length through a Bradford density), and appends the argmax.

mod likelihood;
mod run;
mod walk;

pub use likelihood::{
    bessel_i0, bradford_likelihood, edge_angle, log_von_mises, turn_half_angle, von_mises, wrap_angle,
};
pub use run::{locate_seeds, mean_spacing, run_walks, SeedReport, WalkRun};
pub use walk::{
    curvature_likelihood, distance_likelihood, extend_walk, score_candidates, select_best, visual_likelihood,
    AbortReason, Seed, SelectionScore, StepScore, Walk, WalkStatus, WalkerParams,
};
