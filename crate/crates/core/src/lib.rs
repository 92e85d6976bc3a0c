//! Suppression-based k-anonymization that preserves declared diversity
//! constraints.
//!
//! The entry point is [`diva`], which clusters the tuples needed by the
//! constraints, anonymizes the rest with a greedy k-member pass, and then
//! repairs any upper bound broken by the union.

pub mod anonymizer;
pub mod constraints;
pub mod diverse;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod io;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod synth;

pub use anonymizer::{
    anonymize_kmember, decide, decide_with, diva, integrate, integrate_with, AnonymizationOutcome,
    DivaConfig, IntegrateMode, LowerBoundPolicy, Publication,
};
pub use constraints::{
    frequency, implies, inferred_range, is_satisfiable, minimal_cover, relevant_tuples, validate,
    ConstraintSet, DiversityConstraint, FrequencyRange, Target, UpperBound,
};
pub use diverse::{
    build_graph, coloring, consistent, diverse_clustering, merge, merge_all, ConstraintGraph, Heuristic,
    Strategy,
};
pub use error::{Error, Result};
pub use generate::{estimate_published, generate_constraints, ConstraintClass, GeneratorSpec};
pub use metrics::{
    accuracy_ratio, conflict_rate, discernibility, discernibility_normalized, reference_anonymization,
    MetricsReport,
};
pub use model::{
    information_loss, is_k_anonymous, is_suppression_of, qi_groups, suppress, CellValue, Clustering,
    Relation, Schema, TupleId,
};
pub use scalar::Scalar;
pub use synth::{synth_generate, SynthSpec};

/// Floating-point scalar for reported ratios.
pub type Real = f64;
/// Exact scalar for reported ratios.
pub type Exact = num_rational::Ratio<u64>;
