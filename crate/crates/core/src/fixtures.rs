//! Small standard presentations used throughout the test suites and shipped
//! with the command-line tool. Each constructor panics only on programming
//! errors; the presentations themselves are fixed and valid unless the doc
//! comment says otherwise.

use crate::degree::DegreeVec;
use crate::graph::{EdgeDecl, KGraph, Skeleton};

/// The 2-graph with one vertex and one loop of each color (the rotation
/// fixture). There is exactly one morphism of every degree.
pub fn n2(bound: (u32, u32)) -> KGraph {
    let skeleton = Skeleton::new(
        2,
        vec!["v".into()],
        vec![
            EdgeDecl {
                id: "e".into(),
                color: 1,
                source: "v".into(),
                range: "v".into(),
            },
            EdgeDecl {
                id: "f".into(),
                color: 2,
                source: "v".into(),
                range: "v".into(),
            },
        ],
        vec![(("e".into(), "f".into()), ("f".into(), "e".into()))],
    )
    .unwrap();
    KGraph::new(skeleton, DegreeVec(vec![bound.0, bound.1])).unwrap()
}

/// One vertex, two loops of each color, product-style squares
/// [a_i, b_j] = [b_j, a_i]. Paths genuinely branch.
pub fn two_per_color(bound: (u32, u32)) -> KGraph {
    let mut squares = Vec::new();
    for a in ["a1", "a2"] {
        for b in ["b1", "b2"] {
            squares.push(((a.to_string(), b.to_string()), (b.to_string(), a.to_string())));
        }
    }
    let edge = |id: &str, color: usize| EdgeDecl {
        id: id.into(),
        color,
        source: "v".into(),
        range: "v".into(),
    };
    let skeleton = Skeleton::new(
        2,
        vec!["v".into()],
        vec![edge("a1", 1), edge("a2", 1), edge("b1", 2), edge("b2", 2)],
        squares,
    )
    .unwrap();
    KGraph::new(skeleton, DegreeVec(vec![bound.0, bound.1])).unwrap()
}

/// One vertex, three colors: three loops a1, a2, a3 of color 1 and one
/// loop each (f, g) of colors 2 and 3. Passing f across the a's applies
/// the transposition a1<->a2 and passing g applies a1<->a3. Every
/// two-edge path sits in exactly one square, but the two transpositions
/// do not commute, so triple rewrites disagree: the square set is
/// pairwise complete yet not confluent.
pub fn three_color_twist(bound: (u32, u32, u32)) -> KGraph {
    let edge = |id: &str, color: usize| EdgeDecl {
        id: id.into(),
        color,
        source: "v".into(),
        range: "v".into(),
    };
    let sq = |a: &str, b: &str, c: &str, d: &str| {
        ((a.to_string(), b.to_string()), (c.to_string(), d.to_string()))
    };
    let skeleton = Skeleton::new(
        3,
        vec!["v".into()],
        vec![
            edge("a1", 1),
            edge("a2", 1),
            edge("a3", 1),
            edge("f", 2),
            edge("g", 3),
        ],
        vec![
            sq("f", "a1", "a2", "f"),
            sq("f", "a2", "a1", "f"),
            sq("f", "a3", "a3", "f"),
            sq("g", "a1", "a3", "g"),
            sq("g", "a3", "a1", "g"),
            sq("g", "a2", "a2", "g"),
            sq("g", "f", "f", "g"),
        ],
    )
    .unwrap();
    KGraph::new(skeleton, DegreeVec(vec![bound.0, bound.1, bound.2])).unwrap()
}

/// One vertex, two loops of a single color: the binary-branching 1-graph.
pub fn two_loops(bound: u32) -> KGraph {
    let edge = |id: &str| EdgeDecl {
        id: id.into(),
        color: 1,
        source: "v".into(),
        range: "v".into(),
    };
    let skeleton = Skeleton::new(
        1,
        vec!["v".into()],
        vec![edge("a"), edge("b")],
        Vec::new(),
    )
    .unwrap();
    KGraph::new(skeleton, DegreeVec(vec![bound])).unwrap()
}
