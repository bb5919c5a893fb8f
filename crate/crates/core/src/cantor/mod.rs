//! Randomized Cantor subsets of the limsup set: nested collections of
//! rectangles chosen among the covers, labelled by words.

mod build;
mod measure;
mod plan;
mod shrink;
mod word;

pub use build::{
    build, build_level, success_rates, verify_level, BuildReport, CantorLevel, Construction,
    LevelRate, Node, Property, Violation,
};
pub use measure::{sample_mu, sample_mu_indexed};
pub use plan::{
    chebyshev_bound, failure_bound, plan_from_indices, plan_levels, LevelPlan, LevelSpec, Mode,
    PlanOptions,
};
pub use shrink::ShrinkSequence;
pub use word::Word;
