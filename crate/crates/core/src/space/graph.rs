//! Metric graphs with exact shortest-path distances.
//!
//! Distances between interior points reduce to the direct same-edge route
//! plus at most four endpoint routes over a precomputed all-pairs vertex
//! distance table. Ties are resolved toward the lexicographically smallest
//! vertex sequence and flagged as non-unique.

use rand::Rng;

use super::point::{Geodesic, Leg, Path, Point};
use super::SpaceError;

#[derive(Debug, Clone)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

#[derive(Debug, Clone)]
pub struct GraphSpace {
    names: Vec<String>,
    edges: Vec<Edge>,
    /// vertex -> (edge id, opposite endpoint)
    adj: Vec<Vec<(usize, usize)>>,
    /// All-pairs shortest vertex distances (Floyd-Warshall).
    dist: Vec<Vec<f64>>,
    /// Length of the shortest cycle; `None` for trees.
    girth: Option<f64>,
    total_length: f64,
    basepoint: Point,
}

impl GraphSpace {
    /// Builds and validates a metric graph. Edges are given as index triples
    /// into `names`.
    pub fn new(
        names: Vec<String>,
        edge_list: Vec<(usize, usize, f64)>,
        basepoint: Option<Point>,
    ) -> Result<Self, SpaceError> {
        if edge_list.is_empty() {
            return Err(SpaceError::EmptyGraph);
        }
        let n = names.len();
        let mut seen = std::collections::BTreeSet::new();
        let mut edges = Vec::with_capacity(edge_list.len());
        for (a, b, len) in edge_list {
            if a >= n || b >= n {
                return Err(SpaceError::UnknownVertex(format!("index {}", a.max(b))));
            }
            if a == b {
                return Err(SpaceError::LoopEdge(names[a].clone()));
            }
            if len <= 0.0 || !len.is_finite() {
                return Err(SpaceError::NonpositiveLength(
                    names[a].clone(),
                    names[b].clone(),
                    len,
                ));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(SpaceError::ParallelEdge(names[u].clone(), names[v].clone()));
            }
            edges.push(Edge { u, v, len });
        }

        let mut adj = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            adj[edge.u].push((e, edge.v));
            adj[edge.v].push((e, edge.u));
        }
        for list in &mut adj {
            list.sort_by_key(|&(_, w)| w);
        }

        // Connectivity.
        let mut visited = vec![false; n];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(c) = stack.pop() {
            for &(_, w) in &adj[c] {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        if visited.iter().any(|&b| !b) {
            return Err(SpaceError::Disconnected);
        }

        // Floyd-Warshall.
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for edge in &edges {
            dist[edge.u][edge.v] = dist[edge.u][edge.v].min(edge.len);
            dist[edge.v][edge.u] = dist[edge.v][edge.u].min(edge.len);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }

        let total_length = edges.iter().map(|e| e.len).sum();
        let girth = shortest_cycle(&edges, &adj, n);

        let mut space = Self {
            names,
            edges,
            adj,
            dist,
            girth,
            total_length,
            basepoint: Point::on_edge(0, 0.0),
        };
        space.basepoint = match basepoint {
            Some(p) => {
                space
                    .validate_point(&p)
                    .map_err(|e| SpaceError::BadBasepoint(e.to_string()))?;
                p
            }
            None => space.vertex_point(0),
        };
        Ok(space)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn incident_edges(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn girth(&self) -> Option<f64> {
        self.girth
    }

    pub fn is_tree(&self) -> bool {
        self.girth.is_none()
    }

    pub fn basepoint(&self) -> &Point {
        &self.basepoint
    }

    pub fn vertex_distance(&self, u: usize, v: usize) -> f64 {
        self.dist[u][v]
    }

    /// Canonical point sitting at vertex `v`: smallest incident edge id.
    pub fn vertex_point(&self, v: usize) -> Point {
        let &(e, _) = self.adj[v]
            .iter()
            .min_by_key(|&&(e, _)| e)
            .expect("connected graph with an edge has no isolated vertex");
        let offset = if self.edges[e].u == v {
            0.0
        } else {
            self.edges[e].len
        };
        Point::on_edge(e, offset)
    }

    /// The vertex a point sits on, if its offset matches an endpoint exactly
    /// (within 1e-12 of the boundary).
    pub fn vertex_of_point(&self, p: &Point) -> Option<usize> {
        let (e, off) = self.expect_graph_point(p);
        let edge = &self.edges[e];
        if off.abs() <= 1e-12 {
            Some(edge.u)
        } else if (off - edge.len).abs() <= 1e-12 {
            Some(edge.v)
        } else {
            None
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<(), SpaceError> {
        match p {
            Point::OnEdge { edge, offset } => {
                if *edge >= self.edges.len() {
                    return Err(SpaceError::PointMismatch(format!(
                        "edge index {edge} out of range"
                    )));
                }
                let len = self.edges[*edge].len;
                if !offset.is_finite() || *offset < -1e-12 || *offset > len + 1e-12 {
                    return Err(SpaceError::PointMismatch(format!(
                        "offset {offset} outside edge of length {len}"
                    )));
                }
                Ok(())
            }
            other => Err(SpaceError::PointMismatch(format!(
                "graph space cannot hold {other}"
            ))),
        }
    }

    fn expect_graph_point(&self, p: &Point) -> (usize, f64) {
        match p {
            Point::OnEdge { edge, offset } => (*edge, *offset),
            other => panic!("graph space cannot hold {other}"),
        }
    }

    /// Offsets from a point to both endpoints of its edge.
    fn endpoint_offsets(&self, p: &Point) -> [(usize, f64); 2] {
        let (e, off) = self.expect_graph_point(p);
        let edge = &self.edges[e];
        [(edge.u, off), (edge.v, edge.len - off)]
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let (ep, sp) = self.expect_graph_point(p);
        let (eq, sq) = self.expect_graph_point(q);
        let mut best = f64::INFINITY;
        if ep == eq {
            best = (sp - sq).abs();
        }
        for (x, dx) in self.endpoint_offsets(p) {
            for (y, dy) in self.endpoint_offsets(q) {
                // Offsets first: the sum stays bit-identical when p and q
                // swap roles, keeping the metric exactly symmetric.
                best = best.min((dx + dy) + self.dist[x][y]);
            }
        }
        best
    }

    /// Lexicographically smallest shortest vertex path from `x` to `y`,
    /// plus a uniqueness flag.
    fn lex_shortest_path(&self, x: usize, y: usize) -> (Vec<usize>, bool) {
        let mut path = vec![x];
        let mut unique = true;
        let mut c = x;
        let tol = 1e-9 * (1.0 + self.dist[x][y]);
        let mut guard = 0;
        while c != y {
            guard += 1;
            assert!(
                guard <= self.vertex_count() + 1,
                "shortest-path walk failed to terminate"
            );
            let mut best = f64::INFINITY;
            for &(e, w) in &self.adj[c] {
                best = best.min(self.edges[e].len + self.dist[w][y]);
            }
            let mut candidates: Vec<usize> = self.adj[c]
                .iter()
                .filter(|&&(e, w)| self.edges[e].len + self.dist[w][y] <= best + tol)
                .map(|&(_, w)| w)
                .collect();
            candidates.sort_unstable();
            candidates.dedup();
            if candidates.len() > 1 {
                unique = false;
            }
            c = candidates[0];
            path.push(c);
        }
        (path, unique)
    }

    fn edge_between(&self, a: usize, b: usize) -> usize {
        self.adj[a]
            .iter()
            .find(|&&(_, w)| w == b)
            .map(|&(e, _)| e)
            .expect("consecutive path vertices must share an edge")
    }

    fn offset_of_vertex(&self, e: usize, v: usize) -> f64 {
        if self.edges[e].u == v {
            0.0
        } else {
            self.edges[e].len
        }
    }

    /// Materializes the route p -> x -> (vertex path) -> y -> q into legs.
    fn route_legs(&self, p: &Point, q: &Point, vertex_path: &[usize]) -> Vec<Leg> {
        let (ep, sp) = self.expect_graph_point(p);
        let (eq, sq) = self.expect_graph_point(q);
        let mut legs = Vec::new();
        let x = vertex_path[0];
        let y = *vertex_path.last().unwrap();
        let first_to = self.offset_of_vertex(ep, x);
        if (sp - first_to).abs() > 0.0 {
            legs.push(Leg {
                edge: ep,
                from: sp,
                to: first_to,
            });
        }
        for w in vertex_path.windows(2) {
            let e = self.edge_between(w[0], w[1]);
            legs.push(Leg {
                edge: e,
                from: self.offset_of_vertex(e, w[0]),
                to: self.offset_of_vertex(e, w[1]),
            });
        }
        let last_from = self.offset_of_vertex(eq, y);
        if (sq - last_from).abs() > 0.0 {
            legs.push(Leg {
                edge: eq,
                from: last_from,
                to: sq,
            });
        }
        legs
    }

    pub fn geodesic(&self, p: &Point, q: &Point) -> Geodesic {
        let (ep, sp) = self.expect_graph_point(p);
        let (eq, sq) = self.expect_graph_point(q);
        let length = self.distance(p, q);
        let tol = 1e-9 * (1.0 + length);

        // Candidate routes within tolerance of the optimum. A route is the
        // direct same-edge segment or a walk through a pair of endpoints.
        // Key: vertex sequence (empty for the direct segment).
        let mut candidates: Vec<(Vec<usize>, Vec<Leg>, bool)> = Vec::new();
        if ep == eq && (sp - sq).abs() <= length + tol {
            let legs = if (sp - sq).abs() > 0.0 {
                vec![Leg {
                    edge: ep,
                    from: sp,
                    to: sq,
                }]
            } else {
                Vec::new()
            };
            candidates.push((Vec::new(), legs, true));
        }
        for (x, dx) in self.endpoint_offsets(p) {
            for (y, dy) in self.endpoint_offsets(q) {
                if (dx + dy) + self.dist[x][y] <= length + tol {
                    let (vp, unique) = self.lex_shortest_path(x, y);
                    let legs = self.route_legs(p, q, &vp);
                    candidates.push((vp, legs, unique));
                }
            }
        }
        // A fork inside any tied route is a second geodesic even when every
        // candidate materializes to the same legs.
        let internal_tie = candidates.iter().any(|c| !c.2);
        // Dedupe routes that materialize to the same legs (a point sitting
        // exactly on a vertex makes several endpoint routes coincide).
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        candidates.dedup_by(|a, b| same_legs(&a.1, &b.1));
        assert!(!candidates.is_empty(), "no geodesic route found");

        let unique = candidates.len() == 1 && !internal_tie;
        let (_, legs, _) = candidates.into_iter().next().unwrap();
        let mut prefix = Vec::with_capacity(legs.len());
        let mut acc = 0.0;
        for leg in &legs {
            prefix.push(acc);
            acc += leg.len();
        }
        Geodesic::new(
            p.clone(),
            q.clone(),
            length,
            unique,
            Path::Legs { legs, prefix },
        )
    }

    /// Uniform sample with respect to arclength measure.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let mut target = rng.random_range(0.0..self.total_length);
        for (e, edge) in self.edges.iter().enumerate() {
            if target <= edge.len || e + 1 == self.edges.len() {
                return Point::on_edge(e, target.clamp(0.0, edge.len));
            }
            target -= edge.len;
        }
        unreachable!()
    }

    pub fn summary(&self) -> String {
        format!("graph({}v,{}e)", self.vertex_count(), self.edge_count())
    }
}

fn same_legs(a: &[Leg], b: &[Leg]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b.iter()).all(|(x, y)| {
            x.edge == y.edge && (x.from - y.from).abs() <= 1e-12 && (x.to - y.to).abs() <= 1e-12
        })
}

/// Shortest cycle length: for every edge, the shortest path between its
/// endpoints avoiding the edge itself, plus the edge length.
fn shortest_cycle(edges: &[Edge], adj: &[Vec<(usize, usize)>], n: usize) -> Option<f64> {
    let mut best = f64::INFINITY;
    for (skip, edge) in edges.iter().enumerate() {
        let detour = dijkstra_without(adj, edges, n, edge.u, edge.v, skip);
        if detour.is_finite() {
            best = best.min(detour + edge.len);
        }
    }
    best.is_finite().then_some(best)
}

fn dijkstra_without(
    adj: &[Vec<(usize, usize)>],
    edges: &[Edge],
    n: usize,
    src: usize,
    dst: usize,
    skip: usize,
) -> f64 {
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[src] = 0.0;
    loop {
        let mut c = usize::MAX;
        let mut cd = f64::INFINITY;
        for (i, &d) in dist.iter().enumerate() {
            if !done[i] && d < cd {
                c = i;
                cd = d;
            }
        }
        if c == usize::MAX {
            break;
        }
        if c == dst {
            return cd;
        }
        done[c] = true;
        for &(e, w) in &adj[c] {
            if e == skip {
                continue;
            }
            let nd = cd + edges[e].len;
            if nd < dist[w] {
                dist[w] = nd;
            }
        }
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod() -> GraphSpace {
        let names = vec!["center", "a", "b", "c"]
            .into_iter()
            .map(String::from)
            .collect();
        GraphSpace::new(names, vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], None).unwrap()
    }

    #[test]
    fn tripod_tip_to_tip_is_two() {
        let g = tripod();
        let a = g.vertex_point(1);
        let b = g.vertex_point(2);
        assert_eq!(g.distance(&a, &b), 2.0);
    }

    #[test]
    fn tripod_geodesic_midpoint_is_center() {
        let g = tripod();
        let a = g.vertex_point(1);
        let b = g.vertex_point(2);
        let geo = g.geodesic(&a, &b);
        assert_eq!(geo.length(), 2.0);
        let mid = geo.eval(0.5);
        assert_eq!(g.vertex_of_point(&mid), Some(0));
    }

    #[test]
    fn same_edge_direct_path_wins() {
        let g = tripod();
        let p = Point::on_edge(0, 0.2);
        let q = Point::on_edge(0, 0.9);
        assert!((g.distance(&p, &q) - 0.7).abs() < 1e-15);
        let geo = g.geodesic(&p, &q);
        assert!(geo.is_unique());
    }

    #[test]
    fn cycle_girth_and_antipodal_tie() {
        let names = (0..4).map(|i| i.to_string()).collect();
        let g = GraphSpace::new(
            names,
            vec![(0, 1, 1.25), (1, 2, 1.25), (2, 3, 1.25), (0, 3, 1.25)],
            None,
        )
        .unwrap();
        assert_eq!(g.girth(), Some(5.0));
        let p = g.vertex_point(0);
        let q = g.vertex_point(2);
        assert_eq!(g.distance(&p, &q), 2.5);
        let geo = g.geodesic(&p, &q);
        assert!(!geo.is_unique());
        assert!((geo.length() - 2.5).abs() < 1e-15);
        // Tie-break: the route through the smaller vertex index wins.
        assert_eq!(g.vertex_of_point(&geo.eval(0.5)), Some(1));
    }

    #[test]
    fn rejects_malformed_graphs() {
        let names: Vec<String> = vec!["a".into(), "b".into()];
        assert!(matches!(
            GraphSpace::new(names.clone(), vec![(0, 0, 1.0)], None),
            Err(SpaceError::LoopEdge(_))
        ));
        assert!(matches!(
            GraphSpace::new(names.clone(), vec![(0, 1, 0.0)], None),
            Err(SpaceError::NonpositiveLength(..))
        ));
        assert!(matches!(
            GraphSpace::new(names.clone(), vec![(0, 1, 1.0), (1, 0, 2.0)], None),
            Err(SpaceError::ParallelEdge(..))
        ));
        let names3: Vec<String> = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        assert!(matches!(
            GraphSpace::new(names3, vec![(0, 1, 1.0), (2, 3, 1.0)], None),
            Err(SpaceError::Disconnected)
        ));
    }

    #[test]
    fn geodesic_constant_speed_on_multi_edge_path() {
        let names = (0..4).map(|i| i.to_string()).collect();
        let g = GraphSpace::new(names, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5)], None).unwrap();
        let p = Point::on_edge(0, 0.25);
        let q = Point::on_edge(2, 0.25);
        let geo = g.geodesic(&p, &q);
        let expected = 0.75 + 2.0 + 0.25;
        assert!((geo.length() - expected).abs() < 1e-12);
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            for j in 0..=10 {
                let t = j as f64 / 10.0;
                let d = g.distance(&geo.eval(s), &geo.eval(t));
                assert!(
                    (d - (s - t).abs() * geo.length()).abs() < 1e-9,
                    "speed defect at ({s},{t})"
                );
            }
        }
    }
}
