//! Empirical comparison-triangle checks against the constant-curvature
//! model planes.
//!
//! A space satisfies the curvature bound kappa when every sampled triangle
//! is no thicker than its comparison triangle in the model plane: for a
//! point m on the side yz, the distance d(x, m) may not exceed the model
//! distance between the comparison points. The check works through
//! point-on-side distances rather than angles.

use thiserror::Error;

use crate::space::Space;
use crate::tolerance::Tolerances;
use crate::verdict::{derive_seed, CheckOutcome};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ComparisonError {
    #[error("side lengths must be finite and nonnegative, got ({0}, {1})")]
    BadSide(f64, f64),
    #[error("angle must lie in [0, pi], got {0}")]
    BadAngle(f64),
    #[error("side {0} exceeds the model diameter pi/sqrt(kappa)")]
    BeyondModelDiameter(f64),
}

/// Side length opposite `angle` in a model triangle with adjacent sides `a`
/// and `b`: the Euclidean, spherical, or hyperbolic law of cosines depending
/// on the sign of `kappa`.
pub fn model_distance(kappa: f64, a: f64, b: f64, angle: f64) -> Result<f64, ComparisonError> {
    if a < 0.0 || b < 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(ComparisonError::BadSide(a, b));
    }
    if !(-1e-9..=std::f64::consts::PI + 1e-9).contains(&angle) {
        return Err(ComparisonError::BadAngle(angle));
    }
    let angle = angle.clamp(0.0, std::f64::consts::PI);
    // Half-angle forms of the laws of cosines: writing everything through
    // 1 - cos(x) = 2 sin^2(x/2) keeps the result accurate at degenerate
    // angles, where the textbook form cancels catastrophically.
    let versine = {
        let h = (angle / 2.0).sin();
        2.0 * h * h
    };
    if kappa > 0.0 {
        let s = kappa.sqrt();
        let limit = std::f64::consts::PI / s;
        if a > limit + 1e-9 || b > limit + 1e-9 {
            return Err(ComparisonError::BeyondModelDiameter(a.max(b)));
        }
        // 1 - cos(sc) = (1 - cos(s(a-b))) + sin(sa) sin(sb) (1 - cos angle)
        let base = (s * (a - b) / 2.0).sin();
        let u = (2.0 * base * base + (s * a).sin() * (s * b).sin() * versine).clamp(0.0, 2.0);
        Ok(2.0 * (u / 2.0).sqrt().min(1.0).asin() / s)
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        // cosh(sc) - 1 = (cosh(s(a-b)) - 1) + sinh(sa) sinh(sb) (1 - cos angle)
        let base = (s * (a - b) / 2.0).sinh();
        let u = (2.0 * base * base + (s * a).sinh() * (s * b).sinh() * versine).max(0.0);
        // cosh(sc) = 1 + u, hence sinh(sc) = sqrt(u (u + 2)).
        Ok((u * (u + 2.0)).sqrt().asinh() / s)
    } else {
        let c_sq = (a - b) * (a - b) + 2.0 * a * b * versine;
        Ok(c_sq.max(0.0).sqrt())
    }
}

/// Angle at the vertex between sides `a` and `b`, opposite side `c`, in the
/// model plane. `None` when a side degenerates.
fn model_angle(kappa: f64, a: f64, b: f64, c: f64) -> Option<f64> {
    if a <= 1e-12 || b <= 1e-12 {
        return None;
    }
    let cos = if kappa > 0.0 {
        let s = kappa.sqrt();
        ((s * c).cos() - (s * a).cos() * (s * b).cos()) / ((s * a).sin() * (s * b).sin())
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        ((s * a).cosh() * (s * b).cosh() - (s * c).cosh()) / ((s * a).sinh() * (s * b).sinh())
    } else {
        (a * a + b * b - c * c) / (2.0 * a * b)
    };
    Some(cos.clamp(-1.0, 1.0).acos())
}

/// Report of a sampled comparison run.
#[derive(Debug, Clone)]
pub struct CatCheck {
    pub outcome: CheckOutcome,
    /// Triangles that survived the perimeter filter.
    pub triangles_used: usize,
}

/// Maximum comparison violation `d(x, m) - d_model(x~, m~)` over sampled
/// triangles (x, y, z) and points m on the side yz. The bound holds when the
/// maximum stays within tolerance.
///
/// For kappa > 0 only triangles of perimeter below `2*pi/sqrt(kappa)` are
/// comparable; oversized samples are discarded, not errors.
pub fn check_cat(
    space: &Space,
    kappa: f64,
    n_triangles: usize,
    n_side_points: usize,
    seed: u64,
    tol: &Tolerances,
) -> CatCheck {
    let pts = space.sample_points(3 * n_triangles, derive_seed(seed, 81));
    let perimeter_cap = if kappa > 0.0 {
        2.0 * std::f64::consts::PI / kappa.sqrt() - 1e-9
    } else {
        f64::INFINITY
    };
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut used = 0usize;
    for tri in pts.chunks(3) {
        let [x, y, z] = tri else { break };
        let side_yz = space.distance(y, z);
        let side_xy = space.distance(x, y);
        let side_xz = space.distance(x, z);
        if side_yz < 1e-9 {
            continue;
        }
        if side_yz + side_xy + side_xz >= perimeter_cap {
            continue;
        }
        used += 1;
        let geo = space.geodesic(y, z);
        let angle_y = model_angle(kappa, side_xy, side_yz, side_xz);
        for j in 1..=n_side_points {
            let t = j as f64 / (n_side_points + 1) as f64;
            let m = geo.eval(t);
            let arc = t * side_yz;
            // Comparison point at the same arclength from y~; with x~ = y~
            // the comparison distance is the arclength itself.
            let comparison = match angle_y {
                Some(angle) => match model_distance(kappa, side_xy, arc, angle) {
                    Ok(d) => d,
                    Err(_) => continue,
                },
                None => arc,
            };
            let violation = space.distance(x, &m) - comparison;
            if violation > worst {
                worst = violation;
                witness = Some(format!(
                    "triangle x={x}, y={y}, z={z}, side point t={t:.3}: violation {violation:.3e}"
                ));
            }
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    CatCheck {
        outcome: CheckOutcome::new("comparison", worst <= tol.cat_violation, worst, witness),
        triangles_used: used,
    }
}

/// Minimum slack of the midpoint inequality
/// `d^2(x,m) <= d^2(x,y)/2 + d^2(x,z)/2 - d^2(y,z)/4` with `m` the midpoint
/// of y and z, over sampled quadruples.
pub fn check_bruhat_tits(
    space: &Space,
    n_quadruples: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckOutcome {
    let pts = space.sample_points(3 * n_quadruples, derive_seed(seed, 91));
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for tri in pts.chunks(3) {
        let [x, y, z] = tri else { break };
        let m = space.midpoint(y, z);
        let slack = 0.5 * space.distance_sq(x, y) + 0.5 * space.distance_sq(x, z)
            - 0.25 * space.distance_sq(y, z)
            - space.distance_sq(x, &m);
        if slack < worst {
            worst = slack;
            witness = Some(format!("x={x}, y={y}, z={z}: slack {slack:.3e}"));
        }
    }
    if worst == f64::INFINITY {
        worst = 0.0;
    }
    CheckOutcome::new(
        "bruhat_tits",
        worst >= -tol.bruhat_tits_slack,
        worst,
        witness,
    )
}
