//! Canonical example spaces used by the verifiers and the test suites.

use crate::space::{EdgeSpec, SpaceDescriptor};

fn edge(from: &str, to: &str, length: f64) -> EdgeSpec {
    EdgeSpec {
        from: from.to_string(),
        to: to.to_string(),
        length,
    }
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Three unit edges meeting at a single center vertex.
pub fn tripod() -> SpaceDescriptor {
    SpaceDescriptor::Graph {
        vertices: names(&["center", "a", "b", "c"]),
        edges: vec![
            edge("center", "a", 1.0),
            edge("center", "b", 1.0),
            edge("center", "c", 1.0),
        ],
        basepoint: None,
    }
}

/// A path of three edges with mixed lengths.
pub fn path_graph() -> SpaceDescriptor {
    SpaceDescriptor::Graph {
        vertices: names(&["p0", "p1", "p2", "p3"]),
        edges: vec![
            edge("p0", "p1", 1.0),
            edge("p1", "p2", 2.0),
            edge("p2", "p3", 0.5),
        ],
        basepoint: None,
    }
}

/// A single edge of the given length.
pub fn segment(length: f64) -> SpaceDescriptor {
    SpaceDescriptor::Graph {
        vertices: names(&["s0", "s1"]),
        edges: vec![edge("s0", "s1", length)],
        basepoint: None,
    }
}

/// A tree with one degree-3 vertex and a two-edge tail.
pub fn branched_tree() -> SpaceDescriptor {
    SpaceDescriptor::Graph {
        vertices: names(&["root", "l", "r", "t1", "t2"]),
        edges: vec![
            edge("root", "l", 1.0),
            edge("root", "r", 1.5),
            edge("root", "t1", 0.5),
            edge("t1", "t2", 2.0),
        ],
        basepoint: None,
    }
}

/// A cycle of the given total length split into `segments` equal edges.
pub fn cycle(total: f64, segments: usize) -> SpaceDescriptor {
    assert!(segments >= 3, "a simple cycle needs at least three edges");
    let vertices: Vec<String> = (0..segments).map(|i| format!("c{i}")).collect();
    let len = total / segments as f64;
    let edges = (0..segments)
        .map(|i| edge(&vertices[i], &vertices[(i + 1) % segments], len))
        .collect();
    SpaceDescriptor::Graph {
        vertices,
        edges,
        basepoint: None,
    }
}

pub fn euclidean(dim: usize) -> SpaceDescriptor {
    SpaceDescriptor::Euclidean {
        dim,
        bounds: None,
        basepoint: None,
    }
}

pub fn l2product(left: SpaceDescriptor, right: SpaceDescriptor) -> SpaceDescriptor {
    SpaceDescriptor::L2Product {
        left: Box::new(left),
        right: Box::new(right),
    }
}

pub fn normed_product(left: SpaceDescriptor, right: SpaceDescriptor, p: f64) -> SpaceDescriptor {
    SpaceDescriptor::NormedProduct {
        left: Box::new(left),
        right: Box::new(right),
        p,
    }
}

/// The plane R x R metrized by the lp norm of the coordinate distances.
pub fn normed_plane(p: f64) -> SpaceDescriptor {
    normed_product(euclidean(1), euclidean(1), p)
}

/// Catalog spaces satisfying a comparison hypothesis for some kappa.
/// The cycle of length 2*pi is the only member that is not CAT(0).
pub fn cat_catalog() -> Vec<(String, SpaceDescriptor)> {
    let mut list = cat0_catalog();
    list.push((
        "cycle_2pi".into(),
        cycle(2.0 * std::f64::consts::PI, 4),
    ));
    list
}

/// Catalog spaces satisfying the CAT(0) comparison.
pub fn cat0_catalog() -> Vec<(String, SpaceDescriptor)> {
    vec![
        ("tripod".into(), tripod()),
        ("path".into(), path_graph()),
        ("segment".into(), segment(1.0)),
        ("branched_tree".into(), branched_tree()),
        ("euclidean1".into(), euclidean(1)),
        ("euclidean2".into(), euclidean(2)),
        ("euclidean3".into(), euclidean(3)),
        ("tripod_x_line".into(), l2product(tripod(), euclidean(1))),
        ("tripod_x_plane".into(), l2product(tripod(), euclidean(2))),
    ]
}
