//! Finite probability couplings as a weighted category.
//!
//! * [`wcat`]: weighted categories, pq-metric spaces, the `optimize`
//!   construction, functors, daggers and embeddings.
//! * [`prob`]: measures, couplings, kernels, gluing, k-costs, pushforwards.
//! * [`ot`]: exact optimal transport (transportation simplex) and a
//!   brute-force oracle.
//! * [`lens`]: set-based lenses, metric lenses, submetries.
//! * [`lift`]: lifting couplings along lenses and the associated law checks.
//! * [`sample`]: seeded random instances; [`io`]: JSON file formats.
//!
//! Everything numeric is generic over [`Scalar`] (`f64` or `f32`); the
//! aliases below fix `f64`, and the `…F32` ones `f32`. Law checks return a
//! [`LawReport`] and never fail because a law fails; an [`Error`] means the
//! input is malformed.

pub mod error;
pub mod io;
pub mod lens;
pub mod lift;
pub mod ot;
pub mod prob;
pub mod report;
pub mod sample;
pub mod scalar;
pub mod wcat;

pub use error::{Error, Result};
pub use report::{LawReport, Violation};
pub use scalar::Scalar;

pub type Space = prob::FiniteSpace<f64>;
pub type Measure = prob::Measure<f64>;
pub type Coupling = prob::Coupling<f64>;
pub type Kernel = prob::Kernel<f64>;
pub type PointMap = prob::PointMap<f64>;
pub type Lens = lens::SetLens<f64>;
pub type PQMetric = wcat::PQMetric<f64>;
pub type WeightedCategory = wcat::FinWeightedCategory<f64>;
pub type TransportSolution = ot::TransportSolution<f64>;

pub type SpaceF32 = prob::FiniteSpace<f32>;
pub type MeasureF32 = prob::Measure<f32>;
pub type CouplingF32 = prob::Coupling<f32>;
pub type KernelF32 = prob::Kernel<f32>;
pub type PointMapF32 = prob::PointMap<f32>;
pub type LensF32 = lens::SetLens<f32>;
pub type PQMetricF32 = wcat::PQMetric<f32>;
pub type WeightedCategoryF32 = wcat::FinWeightedCategory<f32>;

/// Every law check in the library, by `module::function`. The CLI maps each
/// of these to exactly one verb.
pub const LAW_CHECKS: &[&str] = &[
    "wcat::check_pq_metric",
    "wcat::check_weighted_category",
    "wcat::check_optimization_complete",
    "wcat::check_weighted_functor",
    "wcat::check_dagger",
    "wcat::classify_pair",
    "wcat::check_embedding",
    "wcat::check_normed",
    "prob::bayes_check",
    "prob::cost_triangle_check",
    "ot::check_optimization_complete",
    "lens::check_lens_laws",
    "lens::check_lens_laws_pq",
    "lens::check_metric_lens",
    "lens::check_submetry",
    "lift::LiftedCoupling::check_invariants",
    "lift::check_lift_delta_laws",
    "lift::check_weight_preservation",
    "lift::check_pushforward_conditional",
    "lift::check_pushforward_functor",
    "lift::check_pushforward_embedding",
    "lift::check_lens_functoriality",
];
