//! Random covering sets on the flat torus `T^d = R^d / Z^d`.
//!
//! Translates `G_n = g_n + xi_n` of shrinking rectangles by i.i.d. uniform
//! points, the singular-value exponent of the shape sequence, a randomized
//! Cantor subset of the limsup set, and estimators that check dimension claims
//! numerically.
//!
//! Everything numeric is generic over [`Real`] (`f64` or `f32`); the unsuffixed
//! type names default to `f64`, and `*F32` aliases are provided below.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cantor;
pub mod cover;
pub mod error;
pub mod estimate;
pub mod exponent;
pub mod rng;
pub mod scalar;
pub mod shape;
pub mod spectrum;
pub mod stats;
pub mod torus;

pub use cover::{
    collect_covers, coverage_fraction, coverage_series, covering_number, covering_numbers,
    generate_cover, shepp_partial_sum, CoverConfig, CoverSet, CoverageGrid, CoverageStats, Verdict,
    COVERAGE_CSV_HEADER,
};
pub use error::{Condition, Error, Result};
pub use exponent::{f_hat, f_hat_windowed, s0_analytic, s0_numeric, ExponentReport, Method, Window};
pub use rng::{sample_xi, substream, Purpose, XiStream};
pub use scalar::Real;
pub use shape::{ShapeKind, ShapeSequence};
pub use spectrum::{phi_s, singular_values, SingularSpectrum};
pub use torus::{torus_distance, wrap, Frame, TorusPoint, TorusRectangle};

pub type TorusPointF32 = TorusPoint<f32>;
pub type FrameF32 = Frame<f32>;
pub type TorusRectangleF32 = TorusRectangle<f32>;
pub type SingularSpectrumF32 = SingularSpectrum<f32>;
pub type ShapeSequenceF32 = ShapeSequence<f32>;
