//! The vector space of affine functions on a catalog space, with Lipschitz
//! norms and absolute gradients.
//!
//! A real function is affine when its restriction to every geodesic is
//! affine in the arclength parameter. On a metric graph this pins down the
//! representation completely: the function is linear along each edge, and at
//! every vertex the outgoing slopes of any two incident edges must sum to
//! zero (a geodesic passing through the vertex enters along one edge and
//! leaves along another). Vertices of degree >= 3 therefore force all
//! incident slopes to vanish. On products, sums of factor affine functions
//! are affine; the basis is the direct sum of the pulled-back factor bases.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::space::{GraphSpace, Point, Space};
use crate::tolerance::{AFFINE_STRUCTURAL, SOLVER_RANK_REL};
use crate::verdict::derive_seed;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AffineError {
    #[error("function is not affine: slope constraint violated by {0:.3e}")]
    NotAffine(f64),
    #[error("function shape does not match the space")]
    ShapeMismatch,
    #[error("no vertex with index {0}")]
    NotAVertex(usize),
}

/// An affine function, represented per space variant: vertex values on a
/// graph (linear along edges), a linear form plus constant on a Euclidean
/// factor, and a sum of factor functions on a product.
///
/// Basis elements are pinned so that they vanish at the space basepoint;
/// general elements may carry a constant offset.
#[derive(Debug, Clone, PartialEq)]
pub enum AffineFunction {
    Graph { values: Vec<f64> },
    Linear { coeffs: Vec<f64>, constant: f64 },
    Sum {
        left: Box<AffineFunction>,
        right: Box<AffineFunction>,
    },
}

impl AffineFunction {
    /// The zero function on `space`.
    pub fn zero(space: &Space) -> Self {
        match space {
            Space::Graph(g) => AffineFunction::Graph {
                values: vec![0.0; g.vertex_count()],
            },
            Space::Euclidean(e) => AffineFunction::Linear {
                coeffs: vec![0.0; e.dim()],
                constant: 0.0,
            },
            Space::Product(p) => AffineFunction::Sum {
                left: Box::new(Self::zero(p.left())),
                right: Box::new(Self::zero(p.right())),
            },
        }
    }

    /// Value of the function at a point of `space`.
    pub fn evaluate_on(&self, space: &Space, p: &Point) -> f64 {
        match (self, space, p) {
            (AffineFunction::Graph { values }, Space::Graph(g), Point::OnEdge { edge, offset }) => {
                let e = &g.edges()[*edge];
                let t = offset / e.len;
                values[e.u] + t * (values[e.v] - values[e.u])
            }
            (AffineFunction::Linear { coeffs, constant }, Space::Euclidean(_), Point::Vector(x)) => {
                coeffs.iter().zip(x.iter()).map(|(c, v)| c * v).sum::<f64>() + constant
            }
            (AffineFunction::Sum { left, right }, Space::Product(prod), Point::Pair(l, r)) => {
                left.evaluate_on(prod.left(), l) + right.evaluate_on(prod.right(), r)
            }
            _ => panic!("affine function shape does not match space/point"),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, &|a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, &|a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        match self {
            AffineFunction::Graph { values } => AffineFunction::Graph {
                values: values.iter().map(|v| v * factor).collect(),
            },
            AffineFunction::Linear { coeffs, constant } => AffineFunction::Linear {
                coeffs: coeffs.iter().map(|c| c * factor).collect(),
                constant: constant * factor,
            },
            AffineFunction::Sum { left, right } => AffineFunction::Sum {
                left: Box::new(left.scale(factor)),
                right: Box::new(right.scale(factor)),
            },
        }
    }

    /// Adds a constant, shifting every value.
    pub fn add_constant(&self, c: f64) -> Self {
        match self {
            AffineFunction::Graph { values } => AffineFunction::Graph {
                values: values.iter().map(|v| v + c).collect(),
            },
            AffineFunction::Linear { coeffs, constant } => AffineFunction::Linear {
                coeffs: coeffs.clone(),
                constant: constant + c,
            },
            AffineFunction::Sum { left, right } => AffineFunction::Sum {
                left: Box::new(left.add_constant(c)),
                right: right.clone(),
            },
        }
    }

    /// Re-pins the representative so it vanishes at `o`.
    pub fn pinned_at(&self, space: &Space, o: &Point) -> Self {
        self.add_constant(-self.evaluate_on(space, o))
    }

    fn zip(&self, other: &Self, op: &dyn Fn(f64, f64) -> f64) -> Self {
        match (self, other) {
            (AffineFunction::Graph { values: a }, AffineFunction::Graph { values: b }) => {
                assert_eq!(a.len(), b.len(), "mismatched graph functions");
                AffineFunction::Graph {
                    values: a.iter().zip(b.iter()).map(|(x, y)| op(*x, *y)).collect(),
                }
            }
            (
                AffineFunction::Linear { coeffs: a, constant: ca },
                AffineFunction::Linear { coeffs: b, constant: cb },
            ) => {
                assert_eq!(a.len(), b.len(), "mismatched linear functions");
                AffineFunction::Linear {
                    coeffs: a.iter().zip(b.iter()).map(|(x, y)| op(*x, *y)).collect(),
                    constant: op(*ca, *cb),
                }
            }
            (
                AffineFunction::Sum { left: al, right: ar },
                AffineFunction::Sum { left: bl, right: br },
            ) => AffineFunction::Sum {
                left: Box::new(al.zip(bl, op)),
                right: Box::new(ar.zip(br, op)),
            },
            _ => panic!("mismatched affine function shapes"),
        }
    }

    /// Compact human-readable description of the linear data.
    pub fn describe(&self) -> String {
        match self {
            AffineFunction::Graph { values } => {
                let vals: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
                format!("vertex values [{}]", vals.join(", "))
            }
            AffineFunction::Linear { coeffs, constant } => {
                let cs: Vec<String> = coeffs.iter().map(|c| format!("{c:.6}")).collect();
                format!("linear [{}] + {constant:.6}", cs.join(", "))
            }
            AffineFunction::Sum { left, right } => {
                format!("{} (+) {}", left.describe(), right.describe())
            }
        }
    }
}

/// Outgoing slope of `f` at vertex `v` along edge `e`.
fn outgoing_slope(g: &GraphSpace, values: &[f64], v: usize, e: usize) -> f64 {
    let edge = &g.edges()[e];
    let other = if edge.u == v { edge.v } else { edge.u };
    (values[other] - values[v]) / edge.len
}

/// Structural affinity check. For graph functions this verifies every
/// pairwise slope constraint; linear forms are always affine.
pub fn verify_affine(space: &Space, f: &AffineFunction) -> Result<(), AffineError> {
    match (space, f) {
        (Space::Graph(g), AffineFunction::Graph { values }) => {
            if values.len() != g.vertex_count() {
                return Err(AffineError::ShapeMismatch);
            }
            let mut worst = 0.0_f64;
            let mut scale = 1.0_f64;
            for v in 0..g.vertex_count() {
                let inc = g.incident_edges(v);
                for (i, &(e1, _)) in inc.iter().enumerate() {
                    let si = outgoing_slope(g, values, v, e1);
                    scale = scale.max(si.abs());
                    for &(e2, _) in inc.iter().skip(i + 1) {
                        let sj = outgoing_slope(g, values, v, e2);
                        worst = worst.max((si + sj).abs());
                    }
                }
            }
            if worst > AFFINE_STRUCTURAL * scale {
                Err(AffineError::NotAffine(worst))
            } else {
                Ok(())
            }
        }
        (Space::Euclidean(e), AffineFunction::Linear { coeffs, .. }) => {
            if coeffs.len() == e.dim() {
                Ok(())
            } else {
                Err(AffineError::ShapeMismatch)
            }
        }
        (Space::Product(p), AffineFunction::Sum { left, right }) => {
            verify_affine(p.left(), left)?;
            verify_affine(p.right(), right)
        }
        _ => Err(AffineError::ShapeMismatch),
    }
}

/// Basis of the affine functions modulo constants, pinned at the basepoint.
///
/// Graphs: the vertex values are the unknowns of the homogeneous system of
/// pairwise slope constraints; the basepoint pin removes the constants
/// direction and the SVD nullspace is the basis. Products: direct sum of the
/// pulled-back factor bases.
pub fn affine_basis(space: &Space) -> Vec<AffineFunction> {
    match space {
        Space::Graph(g) => graph_basis(g)
            .into_iter()
            .map(|values| AffineFunction::Graph { values })
            .collect(),
        Space::Euclidean(e) => {
            let o = space.basepoint();
            let o = o.coords();
            (0..e.dim())
                .map(|i| {
                    let mut coeffs = vec![0.0; e.dim()];
                    coeffs[i] = 1.0;
                    AffineFunction::Linear {
                        coeffs,
                        constant: -o[i],
                    }
                })
                .collect()
        }
        Space::Product(p) => {
            let mut basis = Vec::new();
            for f in affine_basis(p.left()) {
                basis.push(AffineFunction::Sum {
                    left: Box::new(f),
                    right: Box::new(AffineFunction::zero(p.right())),
                });
            }
            for f in affine_basis(p.right()) {
                basis.push(AffineFunction::Sum {
                    left: Box::new(AffineFunction::zero(p.left())),
                    right: Box::new(f),
                });
            }
            basis
        }
    }
}

fn graph_basis(g: &GraphSpace) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for v in 0..n {
        let inc = g.incident_edges(v);
        for i in 0..inc.len() {
            for j in (i + 1)..inc.len() {
                let (e1, u1) = inc[i];
                let (e2, u2) = inc[j];
                let l1 = g.edges()[e1].len;
                let l2 = g.edges()[e2].len;
                let mut row = vec![0.0; n];
                row[u1] += 1.0 / l1;
                row[u2] += 1.0 / l2;
                row[v] -= 1.0 / l1 + 1.0 / l2;
                rows.push(row);
            }
        }
    }
    // Pin the value at the basepoint; this removes the constants direction.
    let Point::OnEdge { edge, offset } = *g.basepoint() else {
        unreachable!("graph basepoint is a graph point");
    };
    let e = &g.edges()[edge];
    let t = offset / e.len;
    let mut pin = vec![0.0; n];
    pin[e.u] += 1.0 - t;
    pin[e.v] += t;
    rows.push(pin);
    // Pad with zero rows so the SVD carries a full set of right singular
    // vectors.
    while rows.len() < n {
        rows.push(vec![0.0; n]);
    }

    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let matrix = DMatrix::from_row_slice(rows.len(), n, &flat);
    let svd = matrix.svd(false, true);
    let sv = &svd.singular_values;
    let vt = svd.v_t.expect("svd requested v_t");
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mut basis = Vec::new();
    for i in 0..sv.len() {
        if sv[i] <= SOLVER_RANK_REL * smax {
            let mut values: Vec<f64> = vt.row(i).iter().copied().collect();
            canonicalize_sign(&mut values);
            basis.push(values);
        }
    }
    basis
}

fn canonicalize_sign(values: &mut [f64]) {
    if let Some(first) = values.iter().find(|v| v.abs() > 1e-9) {
        if *first < 0.0 {
            for v in values.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// Maximum deviation of `f` from chordal interpolation over sampled
/// geodesics; the independent oracle for affinity.
pub fn check_affine(space: &Space, f: &AffineFunction, n_geodesics: usize, seed: u64) -> f64 {
    let pts = space.sample_points(2 * n_geodesics, derive_seed(seed, 101));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 102));
    let mut worst = 0.0_f64;
    for pq in pts.chunks(2) {
        let [p, q] = pq else { break };
        let geo = space.geodesic(p, q);
        let fp = f.evaluate_on(space, p);
        let fq = f.evaluate_on(space, q);
        let mut ts = [0.5, 0.0, 0.0, 0.0, 0.0];
        for t in ts.iter_mut().skip(1) {
            *t = rng.random_range(0.0..1.0);
        }
        for &t in &ts {
            let value = f.evaluate_on(space, &geo.eval(t));
            let chord = (1.0 - t) * fp + t * fq;
            worst = worst.max((value - chord).abs());
        }
    }
    worst
}

fn norm_unchecked(space: &Space, f: &AffineFunction) -> f64 {
    match (space, f) {
        (Space::Graph(g), AffineFunction::Graph { values }) => g
            .edges()
            .iter()
            .map(|e| ((values[e.v] - values[e.u]) / e.len).abs())
            .fold(0.0, f64::max),
        (Space::Euclidean(_), AffineFunction::Linear { coeffs, .. }) => {
            coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
        }
        (Space::Product(p), AffineFunction::Sum { left, right }) => p.norm().combine_dual(
            norm_unchecked(p.left(), left),
            norm_unchecked(p.right(), right),
        ),
        _ => panic!("affine function shape does not match space"),
    }
}

/// Optimal Lipschitz constant of an affine function: the maximum edge slope
/// on graphs, the coefficient norm on Euclidean factors, and the dual-norm
/// combination of the factor constants on products.
pub fn lipschitz_norm(space: &Space, f: &AffineFunction) -> Result<f64, AffineError> {
    verify_affine(space, f)?;
    Ok(norm_unchecked(space, f))
}

fn gradient_unchecked(space: &Space, f: &AffineFunction, p: &Point) -> f64 {
    match (space, f) {
        (Space::Graph(g), AffineFunction::Graph { values }) => {
            let best = match g.vertex_of_point(p) {
                Some(v) => g
                    .incident_edges(v)
                    .iter()
                    .map(|&(e, _)| outgoing_slope(g, values, v, e))
                    .fold(f64::NEG_INFINITY, f64::max),
                None => {
                    let Point::OnEdge { edge, .. } = p else {
                        panic!("graph point expected")
                    };
                    let e = &g.edges()[*edge];
                    let slope = (values[e.v] - values[e.u]) / e.len;
                    slope.abs()
                }
            };
            best.max(0.0)
        }
        (Space::Euclidean(_), AffineFunction::Linear { coeffs, .. }) => {
            coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
        }
        (Space::Product(prod), AffineFunction::Sum { left, right }) => {
            let (pl, pr) = p.split();
            prod.norm().combine_dual(
                gradient_unchecked(prod.left(), left, pl),
                gradient_unchecked(prod.right(), right, pr),
            )
        }
        _ => panic!("affine function shape does not match space"),
    }
}

/// Absolute gradient of `f` at `p`: the largest nonnegative ascent rate over
/// the directions available at the point. At graph vertices these are the
/// incident edges; at edge-interior points the two edge directions.
pub fn absolute_gradient(space: &Space, f: &AffineFunction, p: &Point) -> Result<f64, AffineError> {
    verify_affine(space, f)?;
    Ok(gradient_unchecked(space, f, p))
}

/// A point near `p` at factor-weighted radius `delta` realizing the ascent
/// rate of `f`, when one exists.
fn best_ascent_point(space: &Space, f: &AffineFunction, p: &Point, delta: f64) -> Option<Point> {
    if delta <= 0.0 {
        return None;
    }
    match (space, f) {
        (Space::Graph(g), AffineFunction::Graph { values }) => {
            let mut best: Option<(f64, Point)> = None;
            for (slope, point) in graph_direction_steps(g, values, p, delta) {
                if best.as_ref().map(|(s, _)| slope > *s).unwrap_or(true) {
                    best = Some((slope, point));
                }
            }
            best.map(|(_, point)| point)
        }
        (Space::Euclidean(_), AffineFunction::Linear { coeffs, .. }) => {
            let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm <= 0.0 {
                return None;
            }
            let x = p.coords();
            Some(Point::Vector(
                x.iter()
                    .zip(coeffs.iter())
                    .map(|(xi, c)| xi + delta * c / norm)
                    .collect(),
            ))
        }
        (Space::Product(prod), AffineFunction::Sum { left, right }) => {
            let (pl, pr) = p.split();
            let gl = gradient_unchecked(prod.left(), left, pl);
            let gr = gradient_unchecked(prod.right(), right, pr);
            let (wl, wr) = prod.norm().steepest_weights(gl, gr)?;
            let zl = best_ascent_point(prod.left(), left, pl, wl * delta).unwrap_or(pl.clone());
            let zr = best_ascent_point(prod.right(), right, pr, wr * delta).unwrap_or(pr.clone());
            Some(Point::pair(zl, zr))
        }
        _ => panic!("affine function shape does not match space"),
    }
}

/// All single-edge steps of size up to `delta` available at `p`, paired with
/// the slope of `f` along the step. Directions with less than 1e-6 room are
/// skipped; their quotients would lose every significant digit.
fn graph_direction_steps(
    g: &GraphSpace,
    values: &[f64],
    p: &Point,
    delta: f64,
) -> Vec<(f64, Point)> {
    let mut out = Vec::new();
    match g.vertex_of_point(p) {
        Some(v) => {
            for &(e, _) in g.incident_edges(v) {
                let edge = &g.edges()[e];
                let room = edge.len;
                if room < 1e-6 {
                    continue;
                }
                let step = delta.min(room);
                let slope = outgoing_slope(g, values, v, e);
                let offset = if edge.u == v { step } else { edge.len - step };
                out.push((slope, Point::on_edge(e, offset)));
            }
        }
        None => {
            let Point::OnEdge { edge, offset } = *p else {
                panic!("graph point expected")
            };
            let e = &g.edges()[edge];
            let slope = (values[e.v] - values[e.u]) / e.len;
            let room_up = e.len - offset;
            if room_up >= 1e-6 {
                out.push((slope, Point::on_edge(edge, offset + delta.min(room_up))));
            }
            if offset >= 1e-6 {
                out.push((-slope, Point::on_edge(edge, offset - delta.min(offset))));
            }
        }
    }
    out
}

fn random_nearby<R: Rng>(space: &Space, p: &Point, eps: f64, rng: &mut R) -> Option<Point> {
    match space {
        Space::Graph(g) => {
            // Candidate moves as (edge, start offset, signed room).
            let candidates = match g.vertex_of_point(p) {
                Some(v) => g
                    .incident_edges(v)
                    .iter()
                    .map(|&(e, _)| {
                        let edge = &g.edges()[e];
                        if edge.u == v {
                            (e, 0.0, edge.len.min(eps))
                        } else {
                            (e, edge.len, -edge.len.min(eps))
                        }
                    })
                    .collect::<Vec<_>>(),
                None => {
                    let Point::OnEdge { edge, offset } = *p else {
                        panic!("graph point expected")
                    };
                    let len = g.edges()[edge].len;
                    vec![
                        (edge, offset, (len - offset).min(eps)),
                        (edge, offset, -(offset.min(eps))),
                    ]
                }
            };
            let usable: Vec<_> = candidates
                .into_iter()
                .filter(|(_, _, room)| room.abs() >= 1e-6)
                .collect();
            if usable.is_empty() {
                return None;
            }
            let (e, from, room) = usable[rng.random_range(0..usable.len())];
            let offset = from + rng.random_range(1e-7..1.0) * room;
            Some(Point::on_edge(e, offset.clamp(0.0, g.edges()[e].len)))
        }
        Space::Euclidean(e) => {
            if e.dim() == 0 {
                return None;
            }
            let x = p.coords();
            let dir: Vec<f64> = (0..e.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            if norm < 1e-9 {
                return None;
            }
            let r = rng.random_range(1e-7..1.0) * eps;
            Some(Point::Vector(
                x.iter()
                    .zip(dir.iter())
                    .map(|(xi, d)| xi + r * d / norm)
                    .collect(),
            ))
        }
        Space::Product(prod) => {
            let (pl, pr) = p.split();
            let alpha: f64 = rng.random_range(0.0..1.0);
            let zl = random_nearby(prod.left(), pl, alpha * eps, rng).unwrap_or(pl.clone());
            let zr = random_nearby(prod.right(), pr, (1.0 - alpha) * eps, rng).unwrap_or(pr.clone());
            Some(Point::pair(zl, zr))
        }
    }
}

/// Difference-quotient estimate of the absolute gradient: the maximum rate
/// over a constructed steepest step plus random probes at radius `eps`. Used
/// as the sampled cross-check of [`absolute_gradient`].
pub fn gradient_probe(
    space: &Space,
    f: &AffineFunction,
    p: &Point,
    eps: f64,
    n_random: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 103));
    let fp = f.evaluate_on(space, p);
    let mut candidates = Vec::new();
    if let Some(z) = best_ascent_point(space, f, p, eps) {
        candidates.push(z);
    }
    if let (Space::Graph(g), AffineFunction::Graph { values }) = (space, f) {
        candidates.extend(
            graph_direction_steps(g, values, p, eps)
                .into_iter()
                .map(|(_, z)| z),
        );
    }
    for _ in 0..n_random {
        if let Some(z) = random_nearby(space, p, eps, &mut rng) {
            candidates.push(z);
        }
    }
    let mut best = 0.0_f64;
    for z in candidates {
        let d = space.distance(p, &z);
        if d > 0.0 {
            best = best.max((f.evaluate_on(space, &z) - fp) / d);
        }
    }
    best
}

/// Slope of `f` along each edge leaving `vertex`.
pub fn directional_slopes(
    space: &Space,
    f: &AffineFunction,
    vertex: usize,
) -> Result<BTreeMap<usize, f64>, AffineError> {
    let (Space::Graph(g), AffineFunction::Graph { values }) = (space, f) else {
        return Err(AffineError::ShapeMismatch);
    };
    if vertex >= g.vertex_count() {
        return Err(AffineError::NotAVertex(vertex));
    }
    if values.len() != g.vertex_count() {
        return Err(AffineError::ShapeMismatch);
    }
    Ok(g.incident_edges(vertex)
        .iter()
        .map(|&(e, _)| (e, outgoing_slope(g, values, vertex, e)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::space::build_space;

    fn basis_of(desc: &crate::space::SpaceDescriptor) -> (Space, Vec<AffineFunction>) {
        let space = build_space(desc).unwrap();
        let basis = affine_basis(&space);
        (space, basis)
    }

    #[test]
    fn dimension_of_tripod_is_zero() {
        let (_, basis) = basis_of(&catalog::tripod());
        assert!(basis.is_empty());
    }

    #[test]
    fn dimension_of_path_is_one_with_propagated_slope() {
        let (space, basis) = basis_of(&catalog::path_graph());
        assert_eq!(basis.len(), 1);
        let f = &basis[0];
        let slopes = directional_slopes(&space, f, 1).unwrap();
        let vals: Vec<f64> = slopes.values().copied().collect();
        assert!((vals[0] + vals[1]).abs() < 1e-12, "pass-through defect");
        assert!(check_affine(&space, f, 300, 9) <= 1e-9);
    }

    #[test]
    fn dimension_of_cycle_is_zero() {
        let (_, basis) = basis_of(&catalog::cycle(2.0 * std::f64::consts::PI, 4));
        assert!(basis.is_empty());
    }

    #[test]
    fn product_basis_is_the_direct_sum() {
        let (space, basis) = basis_of(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ));
        assert_eq!(basis.len(), 1);
        // The single basis element is the line coordinate.
        let p = Point::pair(Point::on_edge(1, 0.7), Point::vector(vec![2.5]));
        assert!((basis[0].evaluate_on(&space, &p) - 2.5).abs() < 1e-12);
        let (_, basis2) = basis_of(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(2),
        ));
        assert_eq!(basis2.len(), 2);
    }

    #[test]
    fn basis_vanishes_at_the_basepoint() {
        for (name, desc) in catalog::cat_catalog() {
            let (space, basis) = basis_of(&desc);
            let o = space.basepoint();
            for f in &basis {
                assert!(
                    f.evaluate_on(&space, &o).abs() < 1e-9,
                    "unpinned basis on {name}"
                );
            }
        }
    }

    #[test]
    fn unit_slope_segment_evaluates_to_offset() {
        let (space, basis) = basis_of(&catalog::segment(2.0));
        assert_eq!(basis.len(), 1);
        let norm = lipschitz_norm(&space, &basis[0]).unwrap();
        let f = basis[0].scale(1.0 / norm);
        let value = f.evaluate_on(&space, &Point::on_edge(0, 0.5));
        assert!((value.abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn distance_from_center_is_not_affine() {
        let space = build_space(&catalog::tripod()).unwrap();
        // d(center, .) is edge-linear with value 1 at every tip.
        let f = AffineFunction::Graph {
            values: vec![0.0, 1.0, 1.0, 1.0],
        };
        assert!(verify_affine(&space, &f).is_err());
        let dev = check_affine(&space, &f, 500, 4);
        assert!(dev >= 0.4, "deviation {dev} too small");
    }

    #[test]
    fn projections_on_the_lp_plane_are_affine() {
        let (space, basis) = basis_of(&catalog::normed_plane(4.0));
        assert_eq!(basis.len(), 2);
        for f in &basis {
            assert!(check_affine(&space, f, 500, 21) <= 1e-9);
        }
    }

    #[test]
    fn lp_plane_sum_norm_matches_the_dual_exponent() {
        let (space, basis) = basis_of(&catalog::normed_plane(4.0));
        let sum = basis[0].add(&basis[1]);
        let norm = lipschitz_norm(&space, &sum).unwrap();
        let expected = 2.0_f64.powf(0.75);
        assert!((norm - expected).abs() < 1e-12, "got {norm}");
        // Dense sweep of the lp unit circle as an independent oracle.
        let p = 4.0;
        let mut best = 0.0_f64;
        let n = 200_000;
        for k in 0..n {
            let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
            let (c, s) = (theta.cos(), theta.sin());
            let scale = (c.abs().powf(p) + s.abs().powf(p)).powf(1.0 / p);
            best = best.max((c + s).abs() / scale);
        }
        assert!((best - expected).abs() < 1e-8, "oracle gap {}", best - expected);
    }

    #[test]
    fn product_projection_norm_is_pythagorean() {
        let (space, basis) = basis_of(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ));
        let norm = lipschitz_norm(&space, &basis[0]).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
        // Cross-check by sampled difference quotients: never above the norm.
        let pts = space.sample_points(400, 13);
        let mut best = 0.0_f64;
        for pq in pts.chunks(2) {
            let [p, q] = pq else { break };
            let d = space.distance(p, q);
            if d > 1e-9 {
                let quot = (basis[0].evaluate_on(&space, p) - basis[0].evaluate_on(&space, q))
                    .abs()
                    / d;
                best = best.max(quot);
            }
        }
        assert!(best <= norm + 1e-9);
        assert!(best >= 0.9, "sampled quotients should approach the norm");
    }

    #[test]
    fn endpoint_gradient_of_descending_function_vanishes() {
        let space = build_space(&catalog::segment(1.0)).unwrap();
        // f(x) = -x as vertex values.
        let f = AffineFunction::Graph {
            values: vec![0.0, -1.0],
        };
        let at_zero = absolute_gradient(&space, &f, &Point::on_edge(0, 0.0)).unwrap();
        assert_eq!(at_zero, 0.0);
        let inside = absolute_gradient(&space, &f, &Point::on_edge(0, 0.5)).unwrap();
        assert_eq!(inside, 1.0);
        let at_one = absolute_gradient(&space, &f, &Point::on_edge(0, 1.0)).unwrap();
        assert_eq!(at_one, 1.0);
    }

    #[test]
    fn product_basis_gradient_is_one_everywhere() {
        let (space, basis) = basis_of(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ));
        for p in space.sample_points(50, 17) {
            let g = absolute_gradient(&space, &basis[0], &p).unwrap();
            assert!((g - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_probe_agrees_with_exact_values() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            let basis = affine_basis(&space);
            let Some(f) = basis.first() else { continue };
            for (i, p) in space.sample_points(25, 29).into_iter().enumerate() {
                let exact = absolute_gradient(&space, f, &p).unwrap();
                let probe = gradient_probe(&space, f, &p, 1e-3, 40, 1000 + i as u64);
                assert!(
                    (exact - probe).abs() <= 1e-6,
                    "probe gap {} on {name}",
                    exact - probe
                );
            }
        }
    }

    #[test]
    fn sampled_gradients_attain_the_lipschitz_norm() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            let basis = affine_basis(&space);
            if basis.is_empty() {
                continue;
            }
            let mut f = basis[0].clone();
            for (k, b) in basis.iter().enumerate().skip(1) {
                f = f.add(&b.scale(0.5 / (k as f64)));
            }
            let norm = lipschitz_norm(&space, &f).unwrap();
            let sup = space
                .sample_points(1000, 37)
                .iter()
                .map(|p| absolute_gradient(&space, &f, p).unwrap())
                .fold(0.0_f64, f64::max);
            assert!(
                (sup - norm).abs() <= 1e-6,
                "gradient sup {sup} vs norm {norm} on {name}"
            );
        }
    }

    #[test]
    fn gradient_is_monotone_along_geodesics() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            let basis = affine_basis(&space);
            let Some(f) = basis.first() else { continue };
            let pts = space.sample_points(200, 31);
            for pq in pts.chunks(2) {
                let [x, q] = pq else { break };
                let geo = space.geodesic(x, q);
                let gx = absolute_gradient(&space, f, x).unwrap();
                for k in 1..5 {
                    let y = geo.eval(k as f64 / 5.0);
                    let gy = absolute_gradient(&space, f, &y).unwrap();
                    assert!(gy >= gx - 1e-9, "monotonicity defect on {name}");
                }
            }
        }
    }

    #[test]
    fn degree_three_vertex_forces_zero_slopes() {
        let space = build_space(&catalog::branched_tree()).unwrap();
        // Constants are the only affine functions here.
        let f = AffineFunction::Graph {
            values: vec![2.5; 5],
        };
        verify_affine(&space, &f).unwrap();
        let slopes = directional_slopes(&space, &f, 0).unwrap();
        assert_eq!(slopes.len(), 3);
        assert!(slopes.values().all(|s| s.abs() < 1e-12));
        assert!(directional_slopes(&space, &f, 99).is_err());
    }

    #[test]
    fn degree_one_slope_is_unconstrained() {
        let (space, basis) = basis_of(&catalog::path_graph());
        let slopes = directional_slopes(&space, &basis[0], 0).unwrap();
        assert_eq!(slopes.len(), 1);
        assert!(slopes.values().next().unwrap().abs() > 1e-6);
    }

    #[test]
    fn random_vertex_vector_off_the_span_fails_check_affine() {
        use nalgebra::DVector;
        for (name, desc) in [
            ("tripod", catalog::tripod()),
            ("path", catalog::path_graph()),
            ("cycle", catalog::cycle(5.0, 4)),
        ] {
            let space = build_space(&desc).unwrap();
            let basis = affine_basis(&space);
            let Space::Graph(g) = &space else { unreachable!() };
            let n = g.vertex_count();
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Project out the span of the basis plus constants, then
            // renormalize: what remains cannot be affine.
            let mut v = DVector::from_vec(raw);
            let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
            v -= &ones * ones.dot(&v);
            for f in &basis {
                let AffineFunction::Graph { values } = f else {
                    unreachable!()
                };
                let b = DVector::from_vec(values.clone());
                let b = &b / b.norm();
                v -= &b * b.dot(&v);
            }
            assert!(v.norm() > 1e-6, "residual collapsed on {name}");
            v /= v.norm();
            let f = AffineFunction::Graph {
                values: v.iter().copied().collect(),
            };
            let dev = check_affine(&space, &f, 1000, 5);
            assert!(dev > 1e-3, "deviation {dev} too small on {name}");
        }
    }

    #[test]
    fn solver_outputs_pass_the_sampling_oracle() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            for (i, f) in affine_basis(&space).iter().enumerate() {
                let dev = check_affine(&space, f, 1000, 40 + i as u64);
                assert!(dev <= 1e-9, "basis {i} of {name} deviates by {dev}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn linear_combinations_stay_affine(a in -3.0_f64..3.0, b in -3.0_f64..3.0) {
            let space = build_space(&catalog::l2product(
                catalog::path_graph(),
                catalog::euclidean(1),
            ))
            .unwrap();
            let basis = affine_basis(&space);
            proptest::prop_assert_eq!(basis.len(), 2);
            let f = basis[0].scale(a).add(&basis[1].scale(b));
            proptest::prop_assert!(verify_affine(&space, &f).is_ok());
            proptest::prop_assert!(check_affine(&space, &f, 60, 8) <= 1e-9);
        }

        #[test]
        fn gradient_never_exceeds_the_norm(seed in 0u64..500) {
            let space = build_space(&catalog::l2product(
                catalog::tripod(),
                catalog::euclidean(2),
            ))
            .unwrap();
            let basis = affine_basis(&space);
            let f = basis[0].add(&basis[1].scale(0.5));
            let norm = lipschitz_norm(&space, &f).unwrap();
            for p in space.sample_points(10, seed) {
                let g = absolute_gradient(&space, &f, &p).unwrap();
                proptest::prop_assert!(g <= norm + 1e-9);
            }
        }
    }
}
