//! Resonance classification, the homological equation, and the Lie-transform
//! iteration producing cutoff normal forms.

mod classify;
mod homological;
mod iterate;

pub use classify::{classify, Classifier, ResonanceClass};
pub use homological::{solve_homological, HomologicalSolution, HomologicalStats};
pub use iterate::{
    birkhoff_iterate, lie_order, lie_series_h0_increment, lie_series_increment, lie_transform_truncated,
    BirkhoffConfig, HamiltonianSpec, LieOutput, NormalFormOutput, NormalFormReport, StepTrace,
};
