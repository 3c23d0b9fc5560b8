//! Points and constant-speed geodesics.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A location inside a space. The variant must match the space the point
/// belongs to: graph points live on an edge, Euclidean points are coordinate
/// vectors, product points are pairs of factor points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    /// Edge index plus arclength offset from the edge's first endpoint.
    OnEdge { edge: usize, offset: f64 },
    /// Coordinate vector of a Euclidean factor.
    Vector(Vec<f64>),
    /// Component pair of a product space.
    Pair(Box<Point>, Box<Point>),
}

impl Point {
    pub fn on_edge(edge: usize, offset: f64) -> Self {
        Point::OnEdge { edge, offset }
    }

    pub fn vector(coords: Vec<f64>) -> Self {
        Point::Vector(coords)
    }

    pub fn pair(left: Point, right: Point) -> Self {
        Point::Pair(Box::new(left), Box::new(right))
    }

    /// Splits a product point into its components. Panics on other variants.
    pub fn split(&self) -> (&Point, &Point) {
        match self {
            Point::Pair(l, r) => (l, r),
            other => panic!("expected a product point, got {other}"),
        }
    }

    /// Coordinates of a Euclidean point. Panics on other variants.
    pub fn coords(&self) -> &[f64] {
        match self {
            Point::Vector(v) => v,
            other => panic!("expected a coordinate point, got {other}"),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::OnEdge { edge, offset } => write!(f, "e{edge}:{offset}"),
            Point::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Point::Pair(l, r) => write!(f, "[{l} | {r}]"),
        }
    }
}

/// One maximal piece of a graph path: a sub-interval of a single edge,
/// traversed from offset `from` to offset `to`.
#[derive(Debug, Clone)]
pub(crate) struct Leg {
    pub edge: usize,
    pub from: f64,
    pub to: f64,
}

impl Leg {
    pub fn len(&self) -> f64 {
        (self.to - self.from).abs()
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Path {
    /// Piecewise-edge path on a graph; `prefix[i]` is the arclength consumed
    /// before leg `i`.
    Legs { legs: Vec<Leg>, prefix: Vec<f64> },
    /// Straight segment between coordinate vectors.
    Segment { from: Vec<f64>, to: Vec<f64> },
    /// Factor geodesics sharing the common parameter.
    Pair(Box<Geodesic>, Box<Geodesic>),
}

/// A constant-speed geodesic parametrized on [0, 1].
#[derive(Debug, Clone)]
pub struct Geodesic {
    start: Point,
    end: Point,
    length: f64,
    unique: bool,
    path: Path,
}

impl Geodesic {
    pub(crate) fn new(start: Point, end: Point, length: f64, unique: bool, path: Path) -> Self {
        Self {
            start,
            end,
            length,
            unique,
            path,
        }
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// False when a second shortest route tied within tolerance; the returned
    /// path is still a geodesic.
    pub fn is_unique(&self) -> bool {
        self.unique
    }

    /// Point at parameter `t`, clamped to [0, 1]. Constant speed: the
    /// arclength from `start` is `t * length`.
    pub fn eval(&self, t: f64) -> Point {
        if t <= 0.0 {
            return self.start.clone();
        }
        if t >= 1.0 {
            return self.end.clone();
        }
        match &self.path {
            Path::Legs { legs, prefix } => {
                if legs.is_empty() {
                    return self.start.clone();
                }
                let s = t * self.length;
                // Find the leg containing arclength s.
                let mut i = legs.len() - 1;
                for (j, p) in prefix.iter().enumerate() {
                    if s < *p {
                        i = j.saturating_sub(1);
                        break;
                    }
                }
                let leg = &legs[i];
                let local = (s - prefix[i]).clamp(0.0, leg.len());
                let offset = if leg.to >= leg.from {
                    leg.from + local
                } else {
                    leg.from - local
                };
                Point::OnEdge {
                    edge: leg.edge,
                    offset,
                }
            }
            Path::Segment { from, to } => {
                let coords = from
                    .iter()
                    .zip(to.iter())
                    .map(|(a, b)| a + t * (b - a))
                    .collect();
                Point::Vector(coords)
            }
            Path::Pair(l, r) => Point::pair(l.eval(t), r.eval(t)),
        }
    }
}
