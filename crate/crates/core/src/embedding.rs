//! The canonical embedding pipeline: evaluation map into the Hilbert model,
//! the pulled-back pseudometric, its quotient view, and the verifier suite.
//!
//! For a normalized affine map F the function
//! `d~(y,z) = sqrt(d(y,z)^2 - |F(y)-F(z)|^2)` is a pseudometric, additive
//! along geodesics, and `x -> ([x], F(x))` is an isometric embedding into
//! the quotient times the Hilbert space. Every one of those statements is a
//! sampled check here; on spaces outside the curvature hypothesis the checks
//! fail with reported witnesses instead of crashing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::affine::{
    affine_basis, lipschitz_norm, AffineError, AffineFunction,
};
use crate::hilbert::{
    build_hilbert_model, polarization_gram, polarization_inner_product, HilbertModel,
};
use crate::space::{CurvatureVerdict, EuclideanSpace, Point, ProductSpace, Space};
use crate::tolerance::Tolerances;
use crate::verdict::{derive_seed, CheckOutcome};

/// Orthonormal coordinates of the evaluation map at a basepoint `o`:
/// `F(x) = (f_1(x), ..., f_k(x))` with every `f_i(o) = 0`.
#[derive(Debug, Clone)]
pub struct EvaluationMap {
    basepoint: Point,
    coords: Vec<AffineFunction>,
}

impl EvaluationMap {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn basepoint(&self) -> &Point {
        &self.basepoint
    }

    pub fn coords(&self) -> &[AffineFunction] {
        &self.coords
    }

    pub fn apply(&self, space: &Space, p: &Point) -> Vec<f64> {
        self.coords
            .iter()
            .map(|f| f.evaluate_on(space, p))
            .collect()
    }

    /// Squared norm of F(p) - F(q).
    pub fn delta_norm_sq(&self, space: &Space, p: &Point, q: &Point) -> f64 {
        self.delta_and_magnitude_sq(space, p, q).0
    }

    /// (|F(p) - F(q)|^2, |F(p)|^2 + |F(q)|^2). The second value scales the
    /// roundoff of the first: coordinate evaluations carry absolute error
    /// proportional to their own magnitude, which the difference then
    /// inherits.
    fn delta_and_magnitude_sq(&self, space: &Space, p: &Point, q: &Point) -> (f64, f64) {
        let mut delta_sq = 0.0;
        let mut mag_sq = 0.0;
        for f in &self.coords {
            let a = f.evaluate_on(space, p);
            let b = f.evaluate_on(space, q);
            delta_sq += (a - b) * (a - b);
            mag_sq += a * a + b * b;
        }
        (delta_sq, mag_sq)
    }

    /// Composition with the orthogonal projection onto the coordinate
    /// subspace spanned by `keep`; still a normalized map.
    pub fn project(&self, keep: &[usize]) -> EvaluationMap {
        EvaluationMap {
            basepoint: self.basepoint.clone(),
            coords: keep.iter().map(|&i| self.coords[i].clone()).collect(),
        }
    }
}

/// Coordinates of the evaluation map at `o` over the orthonormal basis of
/// the model.
pub fn evaluation_map(space: &Space, model: &HilbertModel, o: &Point) -> EvaluationMap {
    let coords = model
        .onb
        .iter()
        .map(|f| f.pinned_at(space, o))
        .collect();
    EvaluationMap {
        basepoint: o.clone(),
        coords,
    }
}

/// Fallback coordinates when no Hilbert model exists: the raw basis, scaled
/// to unit Lipschitz norm but not orthogonalized. Exercises the downstream
/// verifiers on out-of-scope spaces.
pub fn normalized_basis_map(space: &Space, basis: &[AffineFunction], o: &Point) -> EvaluationMap {
    let coords = basis
        .iter()
        .map(|f| {
            let n = lipschitz_norm(space, f).expect("basis functions are affine");
            f.scale(1.0 / n).pinned_at(space, o)
        })
        .collect();
    EvaluationMap {
        basepoint: o.clone(),
        coords,
    }
}

/// Normalization defect of the map: for sampled unit directions `v`, the
/// combination `sum v_i f_i` must have Lipschitz norm exactly one, and no
/// sampled difference quotient may exceed it.
pub fn check_normalized(
    space: &Space,
    map: &EvaluationMap,
    n_directions: usize,
    n_pairs: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckOutcome {
    if map.dim() == 0 {
        return CheckOutcome::new("normalized", true, 0.0, None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 11));
    let pts = space.sample_points(2 * n_pairs.max(1), derive_seed(seed, 12));
    let mut worst = 0.0_f64;
    let mut witness = None;
    for _ in 0..n_directions {
        let v = unit_direction(map.dim(), &mut rng);
        let mut combo = AffineFunction::zero(space);
        for (vi, f) in v.iter().zip(map.coords.iter()) {
            combo = combo.add(&f.scale(*vi));
        }
        let norm = match lipschitz_norm(space, &combo) {
            Ok(n) => n,
            Err(e) => {
                return CheckOutcome::new("normalized", false, f64::INFINITY, Some(e.to_string()))
            }
        };
        let mut dev = (norm - 1.0).abs();
        for pq in pts.chunks(2) {
            let [p, q] = pq else { break };
            let d = space.distance(p, q);
            if d > 1e-9 {
                let quot =
                    (combo.evaluate_on(space, p) - combo.evaluate_on(space, q)).abs() / d;
                dev = dev.max(quot - 1.0);
            }
        }
        if dev > worst {
            worst = dev;
            witness = Some(format!("direction {v:?}: |F^v| deviates by {dev:.3e}"));
        }
    }
    CheckOutcome::new("normalized", worst <= tol.normalized_dev, worst, witness)
}

fn unit_direction<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("1-Lipschitz failure between {y} and {z}: radicand {radicand:.6e} at distance^2 {dist_sq:.6e}")]
pub struct LipschitzViolation {
    pub y: Point,
    pub z: Point,
    pub radicand: f64,
    pub dist_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    /// Radicand comfortably positive.
    Clean,
    /// Radicand within the resolution band around zero; flushed to zero.
    Flushed,
    /// Negative beyond roundoff but above the violation threshold.
    Clamped,
    /// Genuine 1-Lipschitz failure.
    Violated,
}

/// Bookkeeping shared by the sampled checks.
#[derive(Debug, Default, Clone)]
struct BandTally {
    clamped: usize,
    violated: usize,
    worst_ratio: f64,
}

impl BandTally {
    fn record(&mut self, band: Band, radicand: f64, dist_sq: f64) {
        match band {
            Band::Clean | Band::Flushed => {}
            Band::Clamped => self.clamped += 1,
            Band::Violated => self.violated += 1,
        }
        if dist_sq > 0.0 {
            self.worst_ratio = self.worst_ratio.min(radicand / dist_sq);
        }
    }

    fn clamp_activations(&self) -> usize {
        self.clamped + self.violated
    }

    fn suffix(&self) -> String {
        if self.clamp_activations() == 0 {
            String::new()
        } else {
            format!(
                "; clamp activations {} (violations {}), worst radicand ratio {:.3e}",
                self.clamp_activations(),
                self.violated,
                self.worst_ratio
            )
        }
    }
}

/// The pulled-back pseudometric `d~`.
pub struct TildeMetric<'a> {
    space: &'a Space,
    map: EvaluationMap,
    flush_mult: f64,
    violation_rel: f64,
}

impl<'a> TildeMetric<'a> {
    pub fn new(space: &'a Space, map: EvaluationMap, tol: &Tolerances) -> Self {
        Self {
            space,
            map,
            flush_mult: tol.radicand_flush_mult,
            violation_rel: tol.radicand_violation_rel,
        }
    }

    pub fn space(&self) -> &Space {
        self.space
    }

    pub fn map(&self) -> &EvaluationMap {
        &self.map
    }

    /// (d^2, |dF|^2, radicand, band, d~) for one pair.
    ///
    /// Radicands within the roundoff floor of zero flush to exactly zero:
    /// cancellation in d^2 - |dF|^2 leaves noise of order
    /// eps * (d^2 + d * |F|), so values inside a small multiple of that
    /// floor carry no information. A radicand below both the floor and the
    /// relative violation threshold is a genuine 1-Lipschitz failure.
    fn components(&self, y: &Point, z: &Point) -> (f64, f64, f64, Band, f64) {
        let d_sq = self.space.distance_sq(y, z);
        let (nf, mag_sq) = self.map.delta_and_magnitude_sq(self.space, y, z);
        let r = d_sq - nf;
        let floor = self.flush_mult * f64::EPSILON * (d_sq + (d_sq * mag_sq).sqrt());
        let (band, value) = if r.abs() <= floor {
            (Band::Flushed, 0.0)
        } else if r > 0.0 {
            (Band::Clean, r.sqrt())
        } else if r >= -(self.violation_rel * d_sq).max(floor) {
            (Band::Clamped, 0.0)
        } else {
            (Band::Violated, 0.0)
        };
        (d_sq, nf, r, band, value)
    }

    /// The pseudometric value; errors on a genuine 1-Lipschitz failure.
    pub fn tilde_distance(&self, y: &Point, z: &Point) -> Result<f64, LipschitzViolation> {
        let (d_sq, _, r, band, value) = self.components(y, z);
        if band == Band::Violated {
            Err(LipschitzViolation {
                y: y.clone(),
                z: z.clone(),
                radicand: r,
                dist_sq: d_sq,
            })
        } else {
            Ok(value)
        }
    }

    /// Clamped value plus band, for the aggregating checks.
    fn tilde_tracked(&self, y: &Point, z: &Point, tally: &mut BandTally) -> f64 {
        let (d_sq, _, r, band, value) = self.components(y, z);
        tally.record(band, r, d_sq);
        value
    }
}

/// Minimum triangle-inequality slack of `d~` over sampled triples.
pub fn check_pseudometric(
    tm: &TildeMetric,
    n_triples: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckOutcome {
    let pts = tm.space.sample_points(3 * n_triples, derive_seed(seed, 21));
    let mut tally = BandTally::default();
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for tri in pts.chunks(3) {
        let [x, y, z] = tri else { break };
        let dxy = tm.tilde_tracked(x, y, &mut tally);
        let dyz = tm.tilde_tracked(y, z, &mut tally);
        let dxz = tm.tilde_tracked(x, z, &mut tally);
        for (slack, a, b, c) in [
            (dxy + dyz - dxz, x, z, y),
            (dxy + dxz - dyz, y, z, x),
            (dyz + dxz - dxy, x, y, z),
        ] {
            if slack < worst {
                worst = slack;
                witness = Some(format!("triple {a}, {b} via {c}: slack {slack:.3e}"));
            }
        }
    }
    if worst == f64::INFINITY {
        worst = 0.0;
    }
    let pass = worst >= -tol.pseudometric_slack && tally.clamp_activations() == 0;
    CheckOutcome::new(
        "pseudometric",
        pass,
        worst,
        witness.map(|w| format!("{w}{}", tally.suffix())),
    )
}

/// Maximum additivity defect `|d~(y,z) - d~(y,m) - d~(m,z)|` over sampled
/// geodesics and interior points.
pub fn check_geodesic_additivity(
    tm: &TildeMetric,
    n_geodesics: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckOutcome {
    let pts = tm.space.sample_points(2 * n_geodesics, derive_seed(seed, 31));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 32));
    let mut tally = BandTally::default();
    let mut worst = 0.0_f64;
    let mut witness = None;
    for pq in pts.chunks(2) {
        let [y, z] = pq else { break };
        let geo = tm.space.geodesic(y, z);
        let total = tm.tilde_tracked(y, z, &mut tally);
        let mut ts = [0.25, 0.5, 0.75, 0.0, 0.0];
        for t in ts.iter_mut().skip(3) {
            *t = rng.random_range(0.05..0.95);
        }
        for &t in &ts {
            let m = geo.eval(t);
            let first = tm.tilde_tracked(y, &m, &mut tally);
            let second = tm.tilde_tracked(&m, z, &mut tally);
            let dev = (total - first - second).abs();
            if dev > worst {
                worst = dev;
                witness = Some(format!("geodesic {y} -> {z} at t={t}: defect {dev:.3e}"));
            }
        }
    }
    let pass = worst <= tol.additivity_dev && tally.clamp_activations() == 0;
    CheckOutcome::new(
        "additivity",
        pass,
        worst,
        witness.map(|w| format!("{w}{}", tally.suffix())),
    )
}

/// Maximum defect of the splitting identity `d^2 = d~^2 + |dF|^2`, plus the
/// clamp-activation count (which must stay zero under the curvature
/// hypothesis).
pub fn check_isometry_identity(
    tm: &TildeMetric,
    n_pairs: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckOutcome {
    let pts = tm.space.sample_points(2 * n_pairs, derive_seed(seed, 41));
    let mut tally = BandTally::default();
    let mut worst = -1.0_f64;
    let mut witness: Option<String> = None;
    for pq in pts.chunks(2) {
        let [y, z] = pq else { break };
        let (d_sq, _, r, band, _) = tm.components(y, z);
        tally.record(band, r, d_sq);
        // d~^2 is the radicand clamped at zero, so the identity can only be
        // off by the clamped-away negative part. The distance flush floor is
        // a reporting convention and does not enter the identity.
        let residual = (-r).max(0.0);
        if residual > worst {
            worst = residual;
            witness = Some(format!("pair {y}, {z}: residual {residual:.3e}"));
        }
    }
    let worst = worst.max(0.0);
    let pass = worst <= tol.isometry_identity && tally.clamp_activations() == 0;
    let note = format!(
        "{}{}",
        witness.unwrap_or_else(|| "no pairs sampled".into()),
        tally.suffix()
    );
    CheckOutcome::new("isometry", pass, worst, Some(note))
}

/// Minimum midpoint-inequality slack of the quotient pseudometric:
/// `d~^2(x,m) <= d~^2(x,y)/2 + d~^2(x,z)/2 - d~^2(y,z)/4` with `m` the
/// ambient midpoint of `y` and `z`.
pub fn check_bruhat_tits_quotient(
    tm: &TildeMetric,
    n_quadruples: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckOutcome {
    let pts = tm
        .space
        .sample_points(3 * n_quadruples, derive_seed(seed, 51));
    let mut tally = BandTally::default();
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for tri in pts.chunks(3) {
        let [x, y, z] = tri else { break };
        let m = tm.space.midpoint(y, z);
        let dxy = tm.tilde_tracked(x, y, &mut tally);
        let dxz = tm.tilde_tracked(x, z, &mut tally);
        let dyz = tm.tilde_tracked(y, z, &mut tally);
        let dxm = tm.tilde_tracked(x, &m, &mut tally);
        let slack = 0.5 * dxy * dxy + 0.5 * dxz * dxz - 0.25 * dyz * dyz - dxm * dxm;
        if slack < worst {
            worst = slack;
            witness = Some(format!("x={x}, y={y}, z={z}: slack {slack:.3e}"));
        }
    }
    if worst == f64::INFINITY {
        worst = 0.0;
    }
    let pass = worst >= -tol.bruhat_tits_quotient_slack && tally.clamp_activations() == 0;
    CheckOutcome::new(
        "bruhat_tits_quotient",
        pass,
        worst,
        witness.map(|w| format!("{w}{}", tally.suffix())),
    )
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Finite sample view of the quotient by `d~ = 0`.
#[derive(Debug, Clone)]
pub struct QuotientView {
    pub points: Vec<Point>,
    /// Index of the class containing each sampled point.
    pub class_of: Vec<usize>,
    /// Member indices per class, ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Representative point index per class (its smallest member).
    pub representatives: Vec<usize>,
    /// Pseudometric distances between class representatives.
    pub distances: Vec<Vec<f64>>,
    /// Worst observed dependence of class distances on the representative:
    /// max over merged pairs (x, x') and probe points w of
    /// |d~(x,w) - d~(x',w)|. Well-defined classes keep this below twice the
    /// merge tolerance.
    pub representation_slack: f64,
}

impl QuotientView {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

/// Merges sampled points at pseudometric distance at most `merge_tol` and
/// tabulates class distances.
pub fn quotient_classes(tm: &TildeMetric, points: Vec<Point>, merge_tol: f64) -> QuotientView {
    let n = points.len();
    let mut tally = BandTally::default();
    let mut uf = UnionFind::new(n);
    let mut merged_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if tm.tilde_tracked(&points[i], &points[j], &mut tally) <= merge_tol {
                uf.union(i, j);
                if merged_pairs.len() < 64 {
                    merged_pairs.push((i, j));
                }
            }
        }
    }
    let mut root_to_class: std::collections::BTreeMap<usize, usize> = Default::default();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![0usize; n];
    for (i, slot) in class_of.iter_mut().enumerate() {
        let root = uf.find(i);
        let class = *root_to_class.entry(root).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[class].push(i);
        *slot = class;
    }
    let representatives: Vec<usize> = classes.iter().map(|c| c[0]).collect();
    let k = classes.len();
    let mut distances = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in (a + 1)..k {
            let d = tm.tilde_tracked(
                &points[representatives[a]],
                &points[representatives[b]],
                &mut tally,
            );
            distances[a][b] = d;
            distances[b][a] = d;
        }
    }
    // Representative independence: merged points must see the rest of the
    // sample at equal pseudometric distances.
    let mut representation_slack = 0.0_f64;
    let probes: Vec<usize> = (0..n).step_by((n / 16).max(1)).collect();
    for &(i, j) in &merged_pairs {
        for &w in &probes {
            let a = tm.tilde_tracked(&points[i], &points[w], &mut tally);
            let b = tm.tilde_tracked(&points[j], &points[w], &mut tally);
            representation_slack = representation_slack.max((a - b).abs());
        }
    }
    QuotientView {
        points,
        class_of,
        classes,
        representatives,
        distances,
        representation_slack,
    }
}

/// Coefficients of an affine function factored through the Hilbert
/// coordinates: `f(x) = <coeffs, F(x)> + offset`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineFormOnH {
    pub coeffs: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FactorizationError {
    #[error("reconstruction through the Hilbert factor leaves residual {0:.3e}")]
    Residual(f64),
    #[error(transparent)]
    Affine(#[from] AffineError),
}

/// Factors `f` through the evaluation map: coordinates of its class over the
/// orthonormal basis plus the offset `f(o)`. Verified on sampled points.
pub fn factor_affine_function(
    space: &Space,
    f: &AffineFunction,
    map: &EvaluationMap,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<AffineFormOnH, FactorizationError> {
    let offset = f.evaluate_on(space, map.basepoint());
    let pinned = f.add_constant(-offset);
    let coeffs: Vec<f64> = map
        .coords
        .iter()
        .map(|g| polarization_inner_product(space, &pinned, g))
        .collect::<Result<_, _>>()?;
    let mut worst = 0.0_f64;
    for p in space.sample_points(n_samples.max(1), derive_seed(seed, 61)) {
        let through: f64 = coeffs
            .iter()
            .zip(map.coords.iter())
            .map(|(c, g)| c * g.evaluate_on(space, &p))
            .sum::<f64>()
            + offset;
        worst = worst.max((f.evaluate_on(space, &p) - through).abs());
    }
    if worst > tol.factorization_residual {
        return Err(FactorizationError::Residual(worst));
    }
    Ok(AffineFormOnH { coeffs, offset })
}

/// Symbolic reduction of a catalog space to the expected quotient: Euclidean
/// factors and path graphs carry their full metric into the Hilbert factor
/// and collapse; everything else survives unchanged.
pub struct FlatReduction {
    pub space: Space,
    map: ReduceMap,
}

enum ReduceMap {
    Identity,
    Collapse,
    Both(Box<ReduceMap>, Box<ReduceMap>),
    LeftOnly(Box<ReduceMap>),
    RightOnly(Box<ReduceMap>),
}

impl FlatReduction {
    pub fn project(&self, p: &Point) -> Point {
        fn go(map: &ReduceMap, p: &Point) -> Point {
            match map {
                ReduceMap::Identity => p.clone(),
                ReduceMap::Collapse => Point::Vector(Vec::new()),
                ReduceMap::Both(l, r) => {
                    let (pl, pr) = p.split();
                    Point::pair(go(l, pl), go(r, pr))
                }
                ReduceMap::LeftOnly(l) => go(l, p.split().0),
                ReduceMap::RightOnly(r) => go(r, p.split().1),
            }
        }
        go(&self.map, p)
    }
}

/// Builds the reduced space when every factor is either fully flat (a
/// Euclidean factor or a path graph) or has no affine functions at all.
pub fn flat_reduction(space: &Space) -> FlatReduction {
    fn reduce(space: &Space) -> (Option<Space>, ReduceMap) {
        match space {
            Space::Euclidean(_) => (None, ReduceMap::Collapse),
            Space::Graph(_) => {
                if affine_basis(space).is_empty() {
                    (Some(space.clone()), ReduceMap::Identity)
                } else {
                    // A graph with an affine coordinate is a path, isometric
                    // to an interval; it collapses entirely.
                    (None, ReduceMap::Collapse)
                }
            }
            Space::Product(prod) => {
                let (ls, lm) = reduce(prod.left());
                let (rs, rm) = reduce(prod.right());
                match (ls, rs) {
                    (Some(l), Some(r)) => (
                        Some(Space::Product(ProductSpace::assemble(l, r, prod.norm()))),
                        ReduceMap::Both(Box::new(lm), Box::new(rm)),
                    ),
                    (Some(l), None) => (Some(l), ReduceMap::LeftOnly(Box::new(lm))),
                    (None, Some(r)) => (Some(r), ReduceMap::RightOnly(Box::new(rm))),
                    (None, None) => (None, ReduceMap::Collapse),
                }
            }
        }
    }
    let (reduced, map) = reduce(space);
    match reduced {
        Some(space) => FlatReduction { space, map },
        None => FlatReduction {
            space: Space::Euclidean(
                EuclideanSpace::new(0, crate::space::DEFAULT_BOUNDS, None)
                    .expect("point space is valid"),
            ),
            map: ReduceMap::Collapse,
        },
    }
}

/// Compares `d~` against the metric of the symbolically reduced space.
pub fn check_quotient_isometry(
    tm: &TildeMetric,
    reduction: &FlatReduction,
    n_pairs: usize,
    seed: u64,
    tol: &Tolerances,
) -> CheckOutcome {
    let pts = tm.space.sample_points(2 * n_pairs, derive_seed(seed, 71));
    let mut tally = BandTally::default();
    let mut worst = 0.0_f64;
    let mut witness = None;
    for pq in pts.chunks(2) {
        let [y, z] = pq else { break };
        let tilde = tm.tilde_tracked(y, z, &mut tally);
        let expected = reduction
            .space
            .distance(&reduction.project(y), &reduction.project(z));
        let dev = (tilde - expected).abs();
        if dev > worst {
            worst = dev;
            witness = Some(format!("pair {y}, {z}: |d~ - d_quotient| = {dev:.3e}"));
        }
    }
    let pass = worst <= tol.additivity_dev && tally.clamp_activations() == 0;
    CheckOutcome::new(
        "quotient_isometry",
        pass,
        worst,
        witness.map(|w| format!("{w}{}", tally.suffix())),
    )
}

/// Whether the space sits inside the theorem hypotheses, with the witness
/// that expelled it otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(
    tag = "verdict",
    content = "witness",
    rename_all = "SCREAMING_SNAKE_CASE"
)]
pub enum ScopeVerdict {
    InScope,
    NotInTheoremScope(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientSummary {
    pub classes: usize,
    pub sample_size: usize,
    pub representation_slack: f64,
}

/// A sampled point with its Hilbert coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCoordinates {
    pub point: String,
    pub coordinates: Vec<f64>,
}

/// Aggregated result of the full pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub space: String,
    pub basepoint: String,
    pub seed: u64,
    pub samples: usize,
    pub dim: usize,
    pub scope: ScopeVerdict,
    pub gram: Vec<Vec<f64>>,
    pub checks: Vec<CheckOutcome>,
    pub quotient: QuotientSummary,
    /// A handful of sampled points with their coordinates under F.
    pub sample_coordinates: Vec<SampleCoordinates>,
    /// Pseudometric distances between the previewed points.
    pub tilde_table: Vec<Vec<f64>>,
}

impl EmbeddingReport {
    pub fn all_pass(&self) -> bool {
        matches!(self.scope, ScopeVerdict::InScope) && self.checks.iter().all(|c| c.pass)
    }
}

/// Runs the whole pipeline: basis, Hilbert model, evaluation map, verifier
/// suite, quotient view. Failures become reported verdicts, never panics.
pub fn embed(
    space: &Space,
    o: &Point,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> EmbeddingReport {
    let basis = affine_basis(space);
    let dim = basis.len();
    let gram = polarization_gram(space, &basis)
        .map(|g| {
            (0..g.nrows())
                .map(|i| g.row(i).iter().copied().collect())
                .collect()
        })
        .unwrap_or_default();

    let (scope, map) = match build_hilbert_model(space, basis.clone(), tol) {
        Ok(model) => (ScopeVerdict::InScope, evaluation_map(space, &model, o)),
        Err(e) => (
            ScopeVerdict::NotInTheoremScope(e.to_string()),
            normalized_basis_map(space, &basis, o),
        ),
    };

    let tm = TildeMetric::new(space, map, tol);
    let mut checks = vec![check_normalized(
        space,
        tm.map(),
        100,
        (samples / 100).max(10),
        derive_seed(seed, 1),
        tol,
    )];
    checks.push(check_pseudometric(&tm, samples, derive_seed(seed, 2), tol));
    checks.push(check_geodesic_additivity(
        &tm,
        (samples / 10).max(100),
        derive_seed(seed, 3),
        tol,
    ));
    checks.push(check_isometry_identity(
        &tm,
        samples,
        derive_seed(seed, 4),
        tol,
    ));
    if space.curvature_validity(0.0) == CurvatureVerdict::CatOk {
        checks.push(check_bruhat_tits_quotient(
            &tm,
            samples,
            derive_seed(seed, 5),
            tol,
        ));
    }
    if matches!(scope, ScopeVerdict::InScope) {
        let reduction = flat_reduction(space);
        checks.push(check_quotient_isometry(
            &tm,
            &reduction,
            (samples / 10).max(100),
            derive_seed(seed, 6),
            tol,
        ));
    }

    let quotient_points = space.sample_points(64, derive_seed(seed, 7));
    let view = quotient_classes(&tm, quotient_points, tol.quotient_merge);

    let preview = space.sample_points(6, derive_seed(seed, 8));
    let sample_coordinates = preview
        .iter()
        .map(|p| SampleCoordinates {
            point: p.to_string(),
            coordinates: tm.map().apply(space, p),
        })
        .collect();
    let mut tally = BandTally::default();
    let tilde_table = preview
        .iter()
        .map(|a| {
            preview
                .iter()
                .map(|b| tm.tilde_tracked(a, b, &mut tally))
                .collect()
        })
        .collect();

    EmbeddingReport {
        space: space.summary(),
        basepoint: o.to_string(),
        seed,
        samples,
        dim,
        scope,
        gram,
        checks,
        quotient: QuotientSummary {
            classes: view.class_count(),
            sample_size: view.points.len(),
            representation_slack: view.representation_slack,
        },
        sample_coordinates,
        tilde_table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::space::build_space;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pipeline(desc: &crate::space::SpaceDescriptor) -> (Space, EvaluationMap) {
        let space = build_space(desc).unwrap();
        let model = build_hilbert_model(&space, affine_basis(&space), &tol()).unwrap();
        let o = space.basepoint();
        let map = evaluation_map(&space, &model, &o);
        (space, map)
    }

    #[test]
    fn evaluation_map_on_tripod_line_is_the_line_coordinate() {
        let (space, map) = pipeline(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ));
        assert_eq!(map.dim(), 1);
        let p = Point::pair(Point::on_edge(2, 0.3), Point::vector(vec![-1.5]));
        let fx = map.apply(&space, &p);
        assert!((fx[0].abs() - 1.5).abs() < 1e-12);
        let o = space.basepoint();
        assert!(map.apply(&space, &o)[0].abs() < 1e-12);
    }

    #[test]
    fn evaluation_map_on_euclidean_is_translation() {
        let (space, map) = pipeline(&catalog::euclidean(2));
        let p = Point::vector(vec![3.0, -4.0]);
        let fx = map.apply(&space, &p);
        let mut sorted = fx.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![-4.0, 3.0]);
    }

    #[test]
    fn evaluation_map_on_tripod_is_trivial() {
        let (space, map) = pipeline(&catalog::tripod());
        assert_eq!(map.dim(), 0);
        let p = Point::on_edge(1, 0.4);
        assert!(map.apply(&space, &p).is_empty());
    }

    #[test]
    fn normalization_holds_on_catalog_maps() {
        for (name, desc) in catalog::cat_catalog() {
            let (space, map) = pipeline(&desc);
            let out = check_normalized(&space, &map, 50, 100, 9, &tol());
            assert!(out.pass, "normalization fails on {name}: {out:?}");
        }
    }

    #[test]
    fn coordinate_projection_stays_normalized() {
        let (space, map) = pipeline(&catalog::euclidean(3));
        let projected = map.project(&[0, 2]);
        let out = check_normalized(&space, &projected, 40, 60, 3, &tol());
        assert!(out.pass, "{out:?}");
    }

    #[test]
    fn tilde_distance_with_one_coordinate_dropped() {
        let (space, map) = pipeline(&catalog::euclidean(2));
        // Keep the coordinate that sends (3,4) to 3.
        let keep = if map.apply(&space, &Point::vector(vec![3.0, 4.0]))[0] == 3.0 {
            [0]
        } else {
            [1]
        };
        let tm = TildeMetric::new(&space, map.project(&keep), &tol());
        let d = tm
            .tilde_distance(&Point::vector(vec![0.0, 0.0]), &Point::vector(vec![3.0, 4.0]))
            .unwrap();
        assert!((d - 4.0).abs() < 1e-12);
        // The dropped coordinate is still a metric and still additive.
        let add = check_geodesic_additivity(&tm, 300, 5, &tol());
        assert!(add.pass && add.worst_slack <= 1e-12, "{add:?}");
        let tri = check_pseudometric(&tm, 1000, 5, &tol());
        assert!(tri.pass, "{tri:?}");
    }

    #[test]
    fn tilde_distance_is_the_graph_factor_metric() {
        let (space, map) = pipeline(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ));
        let tm = TildeMetric::new(&space, map, &tol());
        let y = Point::pair(Point::on_edge(0, 0.8), Point::vector(vec![4.0]));
        let z = Point::pair(Point::on_edge(1, 0.6), Point::vector(vec![-7.0]));
        let d = tm.tilde_distance(&y, &z).unwrap();
        assert!((d - 1.4).abs() < 1e-9, "got {d}");
        assert_eq!(tm.tilde_distance(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn evaluation_map_is_one_lipschitz_on_catalog() {
        for (name, desc) in catalog::cat_catalog() {
            let (space, map) = pipeline(&desc);
            let pts = space.sample_points(2 * 10_000, 3);
            for pq in pts.chunks(2) {
                let [y, z] = pq else { break };
                let df = map.delta_norm_sq(&space, y, z).sqrt();
                let d = space.distance(y, z);
                assert!(df <= d + 1e-9, "expansion {df} > {d} on {name}");
            }
        }
    }

    #[test]
    fn pseudometric_and_additivity_hold_on_catalog() {
        for (name, desc) in catalog::cat_catalog() {
            let (space, map) = pipeline(&desc);
            let tm = TildeMetric::new(&space, map, &tol());
            let tri = check_pseudometric(&tm, 2000, 7, &tol());
            assert!(tri.pass, "pseudometric fails on {name}: {tri:?}");
            let add = check_geodesic_additivity(&tm, 300, 7, &tol());
            assert!(add.pass, "additivity fails on {name}: {add:?}");
            let iso = check_isometry_identity(&tm, 2000, 7, &tol());
            assert!(iso.pass, "isometry identity fails on {name}: {iso:?}");
        }
    }

    #[test]
    fn degraded_map_on_the_lp_plane_fails_loudly_but_cleanly() {
        let space = build_space(&catalog::normed_plane(4.0)).unwrap();
        let basis = affine_basis(&space);
        let o = space.basepoint();
        let map = normalized_basis_map(&space, &basis, &o);
        let tm = TildeMetric::new(&space, map, &tol());
        let y = Point::pair(Point::vector(vec![0.0]), Point::vector(vec![0.0]));
        let z = Point::pair(Point::vector(vec![1.0]), Point::vector(vec![1.0]));
        let err = tm.tilde_distance(&y, &z).unwrap_err();
        assert!(err.radicand < -0.1);
        let iso = check_isometry_identity(&tm, 500, 3, &tol());
        assert!(!iso.pass, "{iso:?}");
    }

    #[test]
    fn quotient_merges_fibers_over_the_tripod() {
        let (space, map) = pipeline(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ));
        let tm = TildeMetric::new(&space, map, &tol());
        // Grid: 5 tripod points x 4 line coordinates.
        let tripod = build_space(&catalog::tripod()).unwrap();
        let base = tripod.sample_points(5, 23);
        let mut grid = Vec::new();
        for b in &base {
            for s in [-3.0, -1.0, 0.4, 8.0] {
                grid.push(Point::pair(b.clone(), Point::vector(vec![s])));
            }
        }
        let view = quotient_classes(&tm, grid, tol().quotient_merge);
        assert_eq!(view.class_count(), 5);
        assert!(view.representation_slack <= 2.0 * tol().quotient_merge);
        // Class distances reproduce the tripod metric.
        for a in 0..5 {
            for b in 0..5 {
                let expected = tripod.distance(&base[a], &base[b]);
                let idx_a = view.class_of[4 * a];
                let idx_b = view.class_of[4 * b];
                let got = view.distances[idx_a][idx_b];
                assert!((got - expected).abs() <= 1e-9, "{got} vs {expected}");
            }
        }
    }

    #[test]
    fn quotient_of_euclidean_space_is_a_point() {
        let (space, map) = pipeline(&catalog::euclidean(3));
        let tm = TildeMetric::new(&space, map, &tol());
        let view = quotient_classes(&tm, space.sample_points(40, 5), tol().quotient_merge);
        assert_eq!(view.class_count(), 1);
    }

    #[test]
    fn quotient_of_tripod_is_discrete() {
        let (space, map) = pipeline(&catalog::tripod());
        let tm = TildeMetric::new(&space, map, &tol());
        let view = quotient_classes(&tm, space.sample_points(30, 5), tol().quotient_merge);
        assert_eq!(view.class_count(), 30);
    }

    #[test]
    fn bruhat_tits_holds_on_quotients_of_cat0_spaces() {
        for (name, desc) in catalog::cat0_catalog() {
            let (space, map) = pipeline(&desc);
            let tm = TildeMetric::new(&space, map, &tol());
            let out = check_bruhat_tits_quotient(&tm, 2000, 13, &tol());
            assert!(out.pass, "quotient midpoint check fails on {name}: {out:?}");
        }
    }

    #[test]
    fn factorization_recovers_basis_and_combinations() {
        let (space, map) = pipeline(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(2),
        ));
        let basis = affine_basis(&space);
        // A basis element maps to a unit coordinate vector.
        let form = factor_affine_function(&space, &basis[0], &map, 200, 3, &tol()).unwrap();
        assert!(form.offset.abs() < 1e-12);
        let norm: f64 = form.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        // 2 f1 - f2 + 3 factors with offset 3.
        let f = basis[0].scale(2.0).add(&basis[1].scale(-1.0)).add_constant(3.0);
        let form = factor_affine_function(&space, &f, &map, 200, 3, &tol()).unwrap();
        assert!((form.offset - 3.0).abs() < 1e-12);
        let norm: f64 = form.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 5.0_f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn tilde_tables_are_basepoint_independent() {
        let desc = catalog::l2product(catalog::tripod(), catalog::euclidean(1));
        let space = build_space(&desc).unwrap();
        let model = build_hilbert_model(&space, affine_basis(&space), &tol()).unwrap();
        let o1 = space.basepoint();
        let o2 = Point::pair(Point::on_edge(2, 0.75), Point::vector(vec![4.2]));
        let tm1 = TildeMetric::new(&space, evaluation_map(&space, &model, &o1), &tol());
        let tm2 = TildeMetric::new(&space, evaluation_map(&space, &model, &o2), &tol());
        let pts = space.sample_points(60, 19);
        for pq in pts.chunks(2) {
            let [y, z] = pq else { break };
            let a = tm1.tilde_distance(y, z).unwrap();
            let b = tm2.tilde_distance(y, z).unwrap();
            assert!((a - b).abs() <= 1e-9, "basepoint dependence {a} vs {b}");
        }
    }

    #[test]
    fn embed_runs_end_to_end_on_tripod_line() {
        let desc = catalog::l2product(catalog::tripod(), catalog::euclidean(1));
        let space = build_space(&desc).unwrap();
        let report = embed(&space, &space.basepoint(), 2000, 42, &tol());
        assert_eq!(report.dim, 1);
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn embed_flags_the_lp_plane_as_out_of_scope() {
        let space = build_space(&catalog::normed_plane(4.0)).unwrap();
        let report = embed(&space, &space.basepoint(), 1000, 42, &tol());
        assert_eq!(report.dim, 2);
        match &report.scope {
            ScopeVerdict::NotInTheoremScope(w) => {
                assert!(w.contains("parallelogram"), "witness: {w}")
            }
            ScopeVerdict::InScope => panic!("lp plane must be out of scope"),
        }
        assert!(
            report.checks.iter().any(|c| !c.pass),
            "at least one check must fail: {report:?}"
        );
        assert!(!report.all_pass());
    }

    #[test]
    fn embed_on_euclidean_space_has_trivial_quotient() {
        let space = build_space(&catalog::euclidean(3)).unwrap();
        let report = embed(&space, &space.basepoint(), 1500, 42, &tol());
        assert_eq!(report.dim, 3);
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.quotient.classes, 1);
    }

    #[test]
    fn embed_is_deterministic() {
        let space = build_space(&catalog::l2product(
            catalog::tripod(),
            catalog::euclidean(1),
        ))
        .unwrap();
        let a = embed(&space, &space.basepoint(), 500, 7, &tol());
        let b = embed(&space, &space.basepoint(), 500, 7, &tol());
        assert_eq!(a, b);
    }
}
