//! Affine functions on exactly representable geodesic spaces, the Hilbert
//! structure they carry under a curvature bound, and the canonical
//! embedding of the space into a quotient times a flat factor.
//!
//! The crate is organized around the pipeline:
//!
//! 1. [`space`] — the catalog of spaces (metric graphs, Euclidean factors,
//!    l2 and lp products) with exact distances, geodesics, and structural
//!    curvature verdicts.
//! 2. [`affine`] — the space of affine functions modulo constants, with
//!    Lipschitz norms and absolute gradients.
//! 3. [`hilbert`] — the polarization inner product over the Lipschitz norm,
//!    certified or refuted through the parallelogram law.
//! 4. [`embedding`] — the evaluation map, the pulled-back pseudometric, its
//!    quotient view, and the verifier suite.
//! 5. [`comparison`] — comparison-triangle and midpoint-inequality checks
//!    against the constant-curvature model planes.
//!
//! Everything is deterministic given a seed, and every verifier reports
//! findings instead of crashing on spaces outside the hypotheses.

pub mod affine;
pub mod catalog;
pub mod comparison;
pub mod embedding;
pub mod hilbert;
pub mod space;
pub mod tolerance;
pub mod verdict;

pub use affine::{
    absolute_gradient, affine_basis, check_affine, directional_slopes, gradient_probe,
    lipschitz_norm, verify_affine, AffineError, AffineFunction,
};
pub use comparison::{check_bruhat_tits, check_cat, model_distance, CatCheck, ComparisonError};
pub use embedding::{
    check_bruhat_tits_quotient, check_geodesic_additivity, check_isometry_identity,
    check_normalized, check_pseudometric, check_quotient_isometry, embed, evaluation_map,
    factor_affine_function, flat_reduction, normalized_basis_map, quotient_classes, AffineFormOnH,
    EmbeddingReport, EvaluationMap, FactorizationError, FlatReduction, LipschitzViolation,
    QuotientSummary, QuotientView, ScopeVerdict, TildeMetric,
};
pub use hilbert::{
    build_hilbert_model, parallelogram_residual, parallelogram_residual_signed,
    polarization_gram, polarization_inner_product, HilbertError, HilbertModel,
};
pub use space::{
    build_space, build_with_bounds, CurvatureVerdict, EdgeSpec, EuclideanSpace, Geodesic,
    GraphBasepoint, GraphSpace, Point, ProductNorm, ProductSpace, Space, SpaceDescriptor,
    SpaceError,
};
pub use tolerance::Tolerances;
pub use verdict::{derive_seed, CheckOutcome};
