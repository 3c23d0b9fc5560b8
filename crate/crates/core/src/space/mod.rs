//! The catalog of exactly representable geodesic spaces: metric graphs,
//! Euclidean factors, and l2 / lp products of them.

mod graph;
mod point;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{Edge, GraphSpace};
pub use point::{Geodesic, Point};

pub(crate) use point::Path;

/// Default half-width of the sampling box for Euclidean factors.
pub const DEFAULT_BOUNDS: f64 = 10.0;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpaceError {
    #[error("graph must have at least one edge")]
    EmptyGraph,
    #[error("edge references unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("loop edge at vertex `{0}`")]
    LoopEdge(String),
    #[error("parallel edge between `{0}` and `{1}`")]
    ParallelEdge(String, String),
    #[error("edge `{0}`-`{1}` has nonpositive length {2}")]
    NonpositiveLength(String, String, f64),
    #[error("graph is not connected")]
    Disconnected,
    #[error("product exponent must lie in (1, inf), got {0}")]
    BadExponent(f64),
    #[error("basepoint rejected: {0}")]
    BadBasepoint(String),
    #[error("point does not belong to the space: {0}")]
    PointMismatch(String),
}

/// Structural description of a space, readable from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceDescriptor {
    Graph {
        vertices: Vec<String>,
        edges: Vec<EdgeSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basepoint: Option<GraphBasepoint>,
    },
    Euclidean {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basepoint: Option<Vec<f64>>,
    },
    L2Product {
        left: Box<SpaceDescriptor>,
        right: Box<SpaceDescriptor>,
    },
    NormedProduct {
        left: Box<SpaceDescriptor>,
        right: Box<SpaceDescriptor>,
        p: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub length: f64,
}

/// Basepoint of a graph factor: either a named vertex or an edge-interior
/// location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphBasepoint {
    Vertex { vertex: String },
    OnEdge { edge: (String, String), offset: f64 },
}

/// Norm applied to the pair of factor distances of a product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProductNorm {
    L2,
    Lp(f64),
}

impl ProductNorm {
    /// Combined distance of the factor distances (a, b) >= 0.
    pub fn combine(&self, a: f64, b: f64) -> f64 {
        match self {
            ProductNorm::L2 => (a * a + b * b).sqrt(),
            ProductNorm::Lp(p) => (a.powf(*p) + b.powf(*p)).powf(1.0 / p),
        }
    }

    /// Dual-norm combination: the Lipschitz constant of a sum of factor
    /// functions with constants (a, b), and likewise the combined absolute
    /// gradient. Dual exponent q = p / (p - 1).
    pub fn combine_dual(&self, a: f64, b: f64) -> f64 {
        match self {
            ProductNorm::L2 => (a * a + b * b).sqrt(),
            ProductNorm::Lp(p) => {
                let q = p / (p - 1.0);
                (a.powf(q) + b.powf(q)).powf(1.0 / q)
            }
        }
    }

    /// Unit-ball direction (by the product norm) maximizing a*x + b*y over
    /// nonnegative (x, y); realizes `combine_dual(a, b)` as a rate.
    pub fn steepest_weights(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        if a <= 0.0 && b <= 0.0 {
            return None;
        }
        match self {
            ProductNorm::L2 => {
                let n = (a * a + b * b).sqrt();
                Some((a.max(0.0) / n, b.max(0.0) / n))
            }
            ProductNorm::Lp(p) => {
                let q = p / (p - 1.0);
                let a = a.max(0.0);
                let b = b.max(0.0);
                let nq = (a.powf(q) + b.powf(q)).powf(1.0 / q);
                Some(((a / nq).powf(q - 1.0), (b / nq).powf(q - 1.0)))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EuclideanSpace {
    dim: usize,
    bounds: f64,
    basepoint: Vec<f64>,
}

impl EuclideanSpace {
    pub fn new(dim: usize, bounds: f64, basepoint: Option<Vec<f64>>) -> Result<Self, SpaceError> {
        let basepoint = basepoint.unwrap_or_else(|| vec![0.0; dim]);
        if basepoint.len() != dim {
            return Err(SpaceError::BadBasepoint(format!(
                "expected {dim} coordinates, got {}",
                basepoint.len()
            )));
        }
        Ok(Self {
            dim,
            bounds,
            basepoint,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> f64 {
        self.bounds
    }

    fn expect_coords<'a>(&self, p: &'a Point) -> &'a [f64] {
        match p {
            Point::Vector(v) if v.len() == self.dim => v,
            other => panic!("euclidean({}) cannot hold {other}", self.dim),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let a = self.expect_coords(p);
        let b = self.expect_coords(q);
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    pub fn geodesic(&self, p: &Point, q: &Point) -> Geodesic {
        let from = self.expect_coords(p).to_vec();
        let to = self.expect_coords(q).to_vec();
        Geodesic::new(
            p.clone(),
            q.clone(),
            self.distance(p, q),
            true,
            Path::Segment { from, to },
        )
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let coords = (0..self.dim)
            .map(|_| rng.random_range(-self.bounds..=self.bounds))
            .collect();
        Point::Vector(coords)
    }

    pub fn validate_point(&self, p: &Point) -> Result<(), SpaceError> {
        match p {
            Point::Vector(v) if v.len() == self.dim && v.iter().all(|x| x.is_finite()) => Ok(()),
            other => Err(SpaceError::PointMismatch(format!(
                "euclidean({}) cannot hold {other}",
                self.dim
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProductSpace {
    left: Box<Space>,
    right: Box<Space>,
    norm: ProductNorm,
}

impl ProductSpace {
    pub(crate) fn assemble(left: Space, right: Space, norm: ProductNorm) -> Self {
        Self {
            left: Box::new(left),
            right: Box::new(right),
            norm,
        }
    }

    pub fn left(&self) -> &Space {
        &self.left
    }

    pub fn right(&self) -> &Space {
        &self.right
    }

    pub fn norm(&self) -> ProductNorm {
        self.norm
    }

    fn expect_pair<'a>(&self, p: &'a Point) -> (&'a Point, &'a Point) {
        match p {
            Point::Pair(l, r) => (l, r),
            other => panic!("product space cannot hold {other}"),
        }
    }
}

/// Curvature verdict from structural sufficient conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureVerdict {
    CatOk,
    NotCat,
    Unknown,
}

/// A validated, immutable space handle. All operations are pure; the handle
/// is safe to share across threads.
#[derive(Debug, Clone)]
pub enum Space {
    Graph(GraphSpace),
    Euclidean(EuclideanSpace),
    Product(ProductSpace),
}

/// Validates a descriptor and assembles the space handle.
pub fn build_space(desc: &SpaceDescriptor) -> Result<Space, SpaceError> {
    build_with_bounds(desc, None)
}

/// Same as [`build_space`] with an overridden sampling half-width for every
/// Euclidean factor that does not pin its own.
pub fn build_with_bounds(
    desc: &SpaceDescriptor,
    default_bounds: Option<f64>,
) -> Result<Space, SpaceError> {
    match desc {
        SpaceDescriptor::Graph {
            vertices,
            edges,
            basepoint,
        } => {
            let mut seen = std::collections::BTreeSet::new();
            for name in vertices {
                if !seen.insert(name.as_str()) {
                    return Err(SpaceError::DuplicateVertex(name.clone()));
                }
            }
            let index = |name: &str| -> Result<usize, SpaceError> {
                vertices
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| SpaceError::UnknownVertex(name.to_string()))
            };
            let mut edge_list = Vec::with_capacity(edges.len());
            for e in edges {
                edge_list.push((index(&e.from)?, index(&e.to)?, e.length));
            }
            // Resolve the declared basepoint against canonical edge storage.
            let base = match basepoint {
                None => None,
                Some(GraphBasepoint::Vertex { vertex }) => {
                    let v = index(vertex)?;
                    let (pos, edge) = edge_list
                        .iter()
                        .enumerate()
                        .find(|(_, &(a, b, _))| a == v || b == v)
                        .ok_or_else(|| {
                            SpaceError::BadBasepoint(format!("vertex `{vertex}` is isolated"))
                        })?;
                    let (a, b, len) = *edge;
                    let (u, _) = if a < b { (a, b) } else { (b, a) };
                    Some(Point::on_edge(pos, if u == v { 0.0 } else { len }))
                }
                Some(GraphBasepoint::OnEdge { edge, offset }) => {
                    let a = index(&edge.0)?;
                    let b = index(&edge.1)?;
                    let pos = edge_list
                        .iter()
                        .position(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a))
                        .ok_or_else(|| {
                            SpaceError::BadBasepoint(format!(
                                "no edge between `{}` and `{}`",
                                edge.0, edge.1
                            ))
                        })?;
                    // Offsets are measured from the smaller-indexed endpoint.
                    let off = if a < b {
                        *offset
                    } else {
                        edge_list[pos].2 - *offset
                    };
                    Some(Point::on_edge(pos, off))
                }
            };
            Ok(Space::Graph(GraphSpace::new(
                vertices.clone(),
                edge_list,
                base,
            )?))
        }
        SpaceDescriptor::Euclidean {
            dim,
            bounds,
            basepoint,
        } => {
            let b = bounds.or(default_bounds).unwrap_or(DEFAULT_BOUNDS);
            if b <= 0.0 || !b.is_finite() {
                return Err(SpaceError::BadBasepoint(format!(
                    "sampling bounds must be positive, got {b}"
                )));
            }
            Ok(Space::Euclidean(EuclideanSpace::new(
                *dim,
                b,
                basepoint.clone(),
            )?))
        }
        SpaceDescriptor::L2Product { left, right } => Ok(Space::Product(ProductSpace {
            left: Box::new(build_with_bounds(left, default_bounds)?),
            right: Box::new(build_with_bounds(right, default_bounds)?),
            norm: ProductNorm::L2,
        })),
        SpaceDescriptor::NormedProduct { left, right, p } => {
            if *p <= 1.0 || !p.is_finite() {
                return Err(SpaceError::BadExponent(*p));
            }
            Ok(Space::Product(ProductSpace {
                left: Box::new(build_with_bounds(left, default_bounds)?),
                right: Box::new(build_with_bounds(right, default_bounds)?),
                norm: ProductNorm::Lp(*p),
            }))
        }
    }
}

impl Space {
    pub fn build(desc: &SpaceDescriptor) -> Result<Self, SpaceError> {
        build_space(desc)
    }

    /// Designated basepoint, the origin of all pinned representatives.
    pub fn basepoint(&self) -> Point {
        match self {
            Space::Graph(g) => g.basepoint().clone(),
            Space::Euclidean(e) => Point::Vector(e.basepoint.clone()),
            Space::Product(p) => Point::pair(p.left.basepoint(), p.right.basepoint()),
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<(), SpaceError> {
        match self {
            Space::Graph(g) => g.validate_point(p),
            Space::Euclidean(e) => e.validate_point(p),
            Space::Product(prod) => match p {
                Point::Pair(l, r) => {
                    prod.left.validate_point(l)?;
                    prod.right.validate_point(r)
                }
                other => Err(SpaceError::PointMismatch(format!(
                    "product space cannot hold {other}"
                ))),
            },
        }
    }

    /// Distance between two points of this space.
    ///
    /// Panics if a point does not structurally belong to the space; validate
    /// untrusted points with [`Space::validate_point`] first.
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        match self {
            Space::Graph(g) => g.distance(p, q),
            Space::Euclidean(e) => e.distance(p, q),
            Space::Product(prod) => {
                let (pl, pr) = prod.expect_pair(p);
                let (ql, qr) = prod.expect_pair(q);
                prod.norm
                    .combine(prod.left.distance(pl, ql), prod.right.distance(pr, qr))
            }
        }
    }

    /// Squared distance, computed without a square-root round trip wherever
    /// the structure allows it. Subtracting squared quantities computed this
    /// way keeps the cancellation error at one rounding of the final sum.
    pub fn distance_sq(&self, p: &Point, q: &Point) -> f64 {
        match self {
            Space::Graph(g) => {
                let d = g.distance(p, q);
                d * d
            }
            Space::Euclidean(e) => {
                let a = e.expect_coords(p);
                let b = e.expect_coords(q);
                a.iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
            }
            Space::Product(prod) => {
                let (pl, pr) = prod.expect_pair(p);
                let (ql, qr) = prod.expect_pair(q);
                match prod.norm {
                    ProductNorm::L2 => {
                        prod.left.distance_sq(pl, ql) + prod.right.distance_sq(pr, qr)
                    }
                    ProductNorm::Lp(_) => {
                        let d = self.distance(p, q);
                        d * d
                    }
                }
            }
        }
    }

    /// A constant-speed geodesic from `p` to `q` realizing their distance.
    /// Ties between shortest routes pick the lexicographically smallest
    /// vertex sequence and clear the uniqueness flag.
    pub fn geodesic(&self, p: &Point, q: &Point) -> Geodesic {
        match self {
            Space::Graph(g) => g.geodesic(p, q),
            Space::Euclidean(e) => e.geodesic(p, q),
            Space::Product(prod) => {
                let (pl, pr) = prod.expect_pair(p);
                let (ql, qr) = prod.expect_pair(q);
                let gl = prod.left.geodesic(pl, ql);
                let gr = prod.right.geodesic(pr, qr);
                let length = prod.norm.combine(gl.length(), gr.length());
                let unique = gl.is_unique() && gr.is_unique();
                Geodesic::new(
                    p.clone(),
                    q.clone(),
                    length,
                    unique,
                    Path::Pair(Box::new(gl), Box::new(gr)),
                )
            }
        }
    }

    /// Midpoint of the geodesic from `p` to `q`.
    pub fn midpoint(&self, p: &Point, q: &Point) -> Point {
        self.geodesic(p, q).eval(0.5)
    }

    /// Deterministic sample of `n` points; identical seeds give identical
    /// lists.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sample_one(&mut rng)).collect()
    }

    pub(crate) fn sample_one<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            Space::Graph(g) => g.sample(rng),
            Space::Euclidean(e) => e.sample(rng),
            Space::Product(p) => {
                let l = p.left.sample_one(rng);
                let r = p.right.sample_one(rng);
                Point::pair(l, r)
            }
        }
    }

    /// Structural sufficient conditions for the comparison property at
    /// curvature bound `kappa`. Returns `Unknown` whenever no listed
    /// criterion applies.
    pub fn curvature_validity(&self, kappa: f64) -> CurvatureVerdict {
        match self {
            Space::Graph(g) => {
                if kappa == 0.0 {
                    if g.is_tree() {
                        CurvatureVerdict::CatOk
                    } else {
                        CurvatureVerdict::NotCat
                    }
                } else if kappa > 0.0 {
                    // Comparison holds iff every cycle is at least as long as
                    // the model circumference 2*pi/sqrt(kappa).
                    let bound = 2.0 * std::f64::consts::PI / kappa.sqrt();
                    match g.girth() {
                        None => CurvatureVerdict::CatOk,
                        Some(girth) if girth >= bound - 1e-9 => CurvatureVerdict::CatOk,
                        Some(_) => CurvatureVerdict::NotCat,
                    }
                } else {
                    CurvatureVerdict::Unknown
                }
            }
            Space::Euclidean(_) => {
                if kappa >= 0.0 {
                    CurvatureVerdict::CatOk
                } else {
                    CurvatureVerdict::Unknown
                }
            }
            Space::Product(p) => match p.norm {
                ProductNorm::Lp(exp) if exp != 2.0 => CurvatureVerdict::NotCat,
                ProductNorm::Lp(_) => CurvatureVerdict::Unknown,
                ProductNorm::L2 => {
                    let l0 = p.left.curvature_validity(0.0);
                    let r0 = p.right.curvature_validity(0.0);
                    if kappa >= 0.0
                        && l0 == CurvatureVerdict::CatOk
                        && r0 == CurvatureVerdict::CatOk
                    {
                        CurvatureVerdict::CatOk
                    } else if p.left.curvature_validity(kappa) == CurvatureVerdict::NotCat
                        || p.right.curvature_validity(kappa) == CurvatureVerdict::NotCat
                    {
                        CurvatureVerdict::NotCat
                    } else {
                        CurvatureVerdict::Unknown
                    }
                }
            },
        }
    }

    pub fn summary(&self) -> String {
        match self {
            Space::Graph(g) => g.summary(),
            Space::Euclidean(e) => format!("euclidean({})", e.dim),
            Space::Product(p) => match p.norm {
                ProductNorm::L2 => {
                    format!("l2product({}, {})", p.left.summary(), p.right.summary())
                }
                ProductNorm::Lp(exp) => format!(
                    "normedproduct({}, {}; p={exp})",
                    p.left.summary(),
                    p.right.summary()
                ),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn space_handles_are_shareable() {
        fn assert_shareable<T: Send + Sync>() {}
        assert_shareable::<Space>();
        assert_shareable::<Geodesic>();
    }

    #[test]
    fn builds_the_catalog() {
        for (name, desc) in catalog::cat_catalog() {
            assert!(build_space(&desc).is_ok(), "failed to build {name}");
        }
    }

    #[test]
    fn rejects_bad_exponent() {
        let desc = catalog::normed_plane(1.0);
        assert!(matches!(
            build_space(&desc),
            Err(SpaceError::BadExponent(p)) if p == 1.0
        ));
    }

    #[test]
    fn l2_plane_distance_is_euclidean() {
        let space = build_space(&catalog::l2product(
            catalog::euclidean(1),
            catalog::euclidean(1),
        ))
        .unwrap();
        let p = Point::pair(Point::vector(vec![0.0]), Point::vector(vec![0.0]));
        let q = Point::pair(Point::vector(vec![3.0]), Point::vector(vec![4.0]));
        assert!((space.distance(&p, &q) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn lp_plane_distance_uses_the_exponent() {
        let space = build_space(&catalog::normed_plane(4.0)).unwrap();
        let p = Point::pair(Point::vector(vec![0.0]), Point::vector(vec![0.0]));
        let q = Point::pair(Point::vector(vec![1.0]), Point::vector(vec![1.0]));
        let expected = 2.0_f64.powf(0.25);
        assert!((space.distance(&p, &q) - expected).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_reproducible_and_in_range() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            let a = space.sample_points(64, 7);
            let b = space.sample_points(64, 7);
            assert_eq!(a, b, "sampling of {name} not reproducible");
            for p in &a {
                space.validate_point(p).unwrap_or_else(|e| {
                    panic!("sampled point of {name} out of range: {e}");
                });
            }
        }
    }

    #[test]
    fn product_distance_satisfies_pythagoras() {
        let space = build_space(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ))
        .unwrap();
        let pts = space.sample_points(40, 3);
        let Space::Product(prod) = &space else {
            unreachable!()
        };
        for p in &pts {
            for q in &pts {
                let (pl, pr) = p.split();
                let (ql, qr) = q.split();
                let dl = prod.left().distance(pl, ql);
                let dr = prod.right().distance(pr, qr);
                let d = space.distance(p, q);
                assert!((d * d - (dl * dl + dr * dr)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_midpoint_is_the_coordinate_average() {
        let space = build_space(&catalog::euclidean(2)).unwrap();
        let m = space.midpoint(
            &Point::vector(vec![1.0, -3.0]),
            &Point::vector(vec![5.0, 7.0]),
        );
        assert_eq!(m, Point::vector(vec![3.0, 2.0]));
    }

    #[test]
    fn midpoint_halves_the_distance_on_the_catalog() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            let pts = space.sample_points(40, 13);
            for pq in pts.chunks(2) {
                let [p, q] = pq else { break };
                let m = space.midpoint(p, q);
                let d = space.distance(p, q);
                assert!(
                    (space.distance(p, &m) - d / 2.0).abs() <= 1e-9
                        && (space.distance(&m, q) - d / 2.0).abs() <= 1e-9,
                    "midpoint defect on {name}"
                );
            }
        }
    }

    #[test]
    fn geodesics_have_constant_speed_on_the_catalog() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            let pts = space.sample_points(60, 17);
            for pq in pts.chunks(2) {
                let [p, q] = pq else { break };
                let geo = space.geodesic(p, q);
                assert!((geo.length() - space.distance(p, q)).abs() <= 1e-12);
                for k in 0..6 {
                    let s = k as f64 / 5.0;
                    for j in (k + 1)..6 {
                        let t = j as f64 / 5.0;
                        let d = space.distance(&geo.eval(s), &geo.eval(t));
                        assert!(
                            (d - (t - s) * geo.length()).abs() <= 1e-9,
                            "speed defect on {name} at ({s},{t})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn metric_axioms_on_sampled_triples() {
        for (name, desc) in catalog::cat_catalog() {
            let space = build_space(&desc).unwrap();
            let pts = space.sample_points(3 * 10_000, 11);
            for tri in pts.chunks(3) {
                let [x, y, z] = tri else { break };
                let dxy = space.distance(x, y);
                let dyx = space.distance(y, x);
                assert_eq!(dxy, dyx, "symmetry defect on {name}");
                assert!(dxy >= 0.0);
                let slack = space.distance(x, y) + space.distance(y, z) - space.distance(x, z);
                assert!(slack >= -1e-12, "triangle defect {slack} on {name}");
                assert_eq!(space.distance(x, x), 0.0);
            }
        }
    }

    #[test]
    fn curvature_verdicts_match_structure() {
        let tripod = build_space(&catalog::tripod()).unwrap();
        assert_eq!(tripod.curvature_validity(0.0), CurvatureVerdict::CatOk);
        let circle_2pi = build_space(&catalog::cycle(2.0 * std::f64::consts::PI, 4)).unwrap();
        assert_eq!(circle_2pi.curvature_validity(1.0), CurvatureVerdict::CatOk);
        assert_eq!(circle_2pi.curvature_validity(0.0), CurvatureVerdict::NotCat);
        let circle_5 = build_space(&catalog::cycle(5.0, 4)).unwrap();
        assert_eq!(circle_5.curvature_validity(1.0), CurvatureVerdict::NotCat);
        let lp = build_space(&catalog::normed_plane(4.0)).unwrap();
        assert_eq!(lp.curvature_validity(0.0), CurvatureVerdict::NotCat);
        let l2 = build_space(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(2),
        ))
        .unwrap();
        assert_eq!(l2.curvature_validity(0.0), CurvatureVerdict::CatOk);
        assert_eq!(l2.curvature_validity(1.0), CurvatureVerdict::CatOk);
    }

    #[test]
    fn geodesics_project_to_factor_geodesics() {
        let space = build_space(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ))
        .unwrap();
        let pts = space.sample_points(20, 5);
        let Space::Product(prod) = &space else {
            unreachable!()
        };
        for pair in pts.chunks(2) {
            let [p, q] = pair else { break };
            let geo = space.geodesic(p, q);
            let (pl, ql) = (p.split().0, q.split().0);
            let factor_geo = prod.left().geodesic(pl, ql);
            for k in 1..8 {
                let t = k as f64 / 8.0;
                let (ml, _) = (geo.eval(t), ());
                let d = prod.left().distance(ml.split().0, &factor_geo.eval(t));
                assert!(d <= 1e-9, "projection defect {d}");
            }
        }
    }
}
