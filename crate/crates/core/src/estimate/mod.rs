//! Dimension and energy estimators.

mod boxcount;
mod energy;
mod tail;

pub use boxcount::{box_count, box_count_series, box_dim_fit, BoxCountSeries, DimReport};
pub use energy::{
    capped_kernel, energy_mc, energy_mc_caps, falconer_check, uniform_sampler, EnergyEstimate,
    FalconerResult, DEFAULT_CAP, FALCONER_CAP, FALCONER_UNRELIABLE_SHARE,
};
pub use tail::{ball_like_dimension, mtp_transform, tail_cover_sum};
