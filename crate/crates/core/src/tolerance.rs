//! Numerical tolerances used by the verifiers.
//!
//! Everything here is a default; callers can override single knobs through
//! [`Tolerances`] before handing it to the pipeline.

/// Relative threshold below which singular values of the graph constraint
/// matrix count as zero. Edge lengths are user floats, so the nullspace is
/// only defined up to this resolution.
pub const SOLVER_RANK_REL: f64 = 1e-10;

/// Maximum deviation an affine function may show on sampled geodesics.
pub const AFFINE_CHECK: f64 = 1e-9;

/// Structural slope-constraint violation at which a vertex-value vector is
/// rejected as non-affine.
pub const AFFINE_STRUCTURAL: f64 = 1e-8;

/// Agreement required between the exact absolute gradient and the sampled
/// difference-quotient fallback.
pub const GRADIENT_PROBE: f64 = 1e-6;

/// Parallelogram residual above which the Hilbert build fails loudly.
pub const PARALLELOGRAM_DETECT: f64 = 1e-8;

/// Gram matrices must have smallest eigenvalue >= -PSD_REL * trace.
pub const PSD_REL: f64 = 1e-8;

/// The recomputed Gram matrix of the orthonormal basis must match the
/// identity entrywise within this bound.
pub const ONB_IDENTITY: f64 = 1e-9;

/// Normalization defect allowed for unit directions of the evaluation map.
pub const NORMALIZED_DEV: f64 = 1e-6;

/// Triangle-inequality slack floor for the pulled-back pseudometric.
pub const PSEUDOMETRIC_SLACK: f64 = 1e-9;

/// Additivity defect allowed along geodesics for the pseudometric.
pub const ADDITIVITY_DEV: f64 = 1e-9;

/// Defect allowed in the splitting identity d^2 = d~^2 + |dF|^2.
pub const ISOMETRY_IDENTITY: f64 = 1e-12;

/// Radicands within this multiple of the roundoff floor
/// eps * (d^2 + d * |F|) flush to exactly zero: below that the pseudometric
/// cannot distinguish the pair from an equivalent one. The multiplier
/// leaves an order of magnitude over the worst observed constant while
/// staying far below any genuine catalog separation.
pub const RADICAND_FLUSH_MULT: f64 = 64.0;

/// Radicands below -RADICAND_VIOLATION_REL * d^2 are genuine 1-Lipschitz
/// failures and raise an error.
pub const RADICAND_VIOLATION_REL: f64 = 1e-9;

/// Midpoint-inequality slack floor for the quotient view.
pub const BRUHAT_TITS_QUOTIENT_SLACK: f64 = 1e-8;

/// Points closer than this in the pseudometric fall into one quotient class.
pub const QUOTIENT_MERGE: f64 = 1e-9;

/// Residual allowed when reconstructing an affine function through the
/// Hilbert coordinates.
pub const FACTORIZATION_RESIDUAL: f64 = 1e-9;

/// Comparison-triangle violation above which a space fails the curvature
/// check.
pub const CAT_VIOLATION: f64 = 1e-8;

/// Midpoint-inequality slack floor for the ambient space.
pub const BRUHAT_TITS_SLACK: f64 = 1e-8;

/// Tolerance bundle threaded through the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub solver_rank_rel: f64,
    pub affine_check: f64,
    pub affine_structural: f64,
    pub gradient_probe: f64,
    pub parallelogram_detect: f64,
    pub psd_rel: f64,
    pub onb_identity: f64,
    pub normalized_dev: f64,
    pub pseudometric_slack: f64,
    pub additivity_dev: f64,
    pub isometry_identity: f64,
    pub radicand_flush_mult: f64,
    pub radicand_violation_rel: f64,
    pub bruhat_tits_quotient_slack: f64,
    pub quotient_merge: f64,
    pub factorization_residual: f64,
    pub cat_violation: f64,
    pub bruhat_tits_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver_rank_rel: SOLVER_RANK_REL,
            affine_check: AFFINE_CHECK,
            affine_structural: AFFINE_STRUCTURAL,
            gradient_probe: GRADIENT_PROBE,
            parallelogram_detect: PARALLELOGRAM_DETECT,
            psd_rel: PSD_REL,
            onb_identity: ONB_IDENTITY,
            normalized_dev: NORMALIZED_DEV,
            pseudometric_slack: PSEUDOMETRIC_SLACK,
            additivity_dev: ADDITIVITY_DEV,
            isometry_identity: ISOMETRY_IDENTITY,
            radicand_flush_mult: RADICAND_FLUSH_MULT,
            radicand_violation_rel: RADICAND_VIOLATION_REL,
            bruhat_tits_quotient_slack: BRUHAT_TITS_QUOTIENT_SLACK,
            quotient_merge: QUOTIENT_MERGE,
            factorization_residual: FACTORIZATION_RESIDUAL,
            cat_violation: CAT_VIOLATION,
            bruhat_tits_slack: BRUHAT_TITS_SLACK,
        }
    }
}
