//! Causal effect estimation and causal decision making.
//!
//! Effect models estimate the CATE `f(x) = E[Y(1) - Y(0) | X = x]`; policies
//! decide whom to treat. The crate provides both, plus the metrics that tell
//! them apart: transformed-outcome effect MSE, oracle and IPS regret, and
//! uplift curves.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below fix the width.

// `!(a < b)` is how NaN gets rejected alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod data;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod model;
pub mod policy;
pub mod reduction;
pub mod scalar;
pub mod sim;
pub mod synth;
pub mod trees;

pub use data::{Dataset, FeatureVector, Oracle, Sample, TreatmentLevel, N_LEVELS};
pub use error::{CdmError, Result};
pub use eval::{EvaluationReport, UpliftCurve, UpliftPoint};
pub use ingest::CsvSchema;
pub use model::{EffectModel, FnEffect, FnOutcome, FnPolicy, OutcomeModel, Policy};
pub use reduction::{PolicyTree, WeightedClassificationSet, WeightedExample};
pub use scalar::Scalar;
pub use trees::{CausalTree, OutcomeTree, Tree, TreeParams, TwoModel};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
pub type CausalTree64 = CausalTree<f64>;
pub type CausalTree32 = CausalTree<f32>;
pub type OutcomeTree64 = OutcomeTree<f64>;
pub type OutcomeTree32 = OutcomeTree<f32>;
pub type PolicyTree64 = PolicyTree<f64>;
pub type PolicyTree32 = PolicyTree<f32>;
pub type UpliftCurve64 = UpliftCurve<f64>;
pub type UpliftCurve32 = UpliftCurve<f32>;
