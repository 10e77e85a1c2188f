//! Graph parsing, colorings and Kempe components.

use std::collections::BTreeSet;

use kempeflip::graph::{available_colors, enumerate_components, flip, hamming, is_proper, kempe_component, load_graph};
use kempeflip::{Coloring, Error, Graph};
use proptest::prelude::*;

/// Breadth-first search over edges whose endpoints carry the two swap colors.
fn component_oracle(graph: &Graph, colors: &[usize], v: usize, c: usize) -> BTreeSet<usize> {
    let a = colors[v];
    if a == c {
        return BTreeSet::new();
    }
    let mut seen = BTreeSet::from([v]);
    let mut queue = vec![v];
    while let Some(x) = queue.pop() {
        for &y in graph.neighbors(x) {
            let pair = (colors[x].min(colors[y]), colors[x].max(colors[y]));
            if pair == (a.min(c), a.max(c)) && seen.insert(y) {
                queue.push(y);
            }
        }
    }
    seen
}

fn arbitrary_instance() -> impl Strategy<Value = (Graph, Vec<usize>, usize)> {
    (2usize..8, 2usize..5).prop_flat_map(|(n, k)| {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = slots.len();
        (proptest::collection::vec(any::<bool>(), m), proptest::collection::vec(0..k, n)).prop_map(
            move |(mask, colors)| {
                let edges: Vec<_> = slots.iter().zip(&mask).filter(|(_, &keep)| keep).map(|(&e, _)| e).collect();
                (Graph::from_edges(n, &edges).expect("valid edges"), colors, k)
            },
        )
    })
}

#[test]
fn edge_list_round_trip() {
    let text = "# a square with a diagonal\n4 5\n0 1\n1 2\n2 3\n3 0\n0 2\n";
    let graph = load_graph(text).unwrap();
    assert_eq!(graph.n(), 4);
    assert_eq!(graph.edge_count(), 5);
    assert_eq!(graph.max_degree(), 3);
    assert_eq!(load_graph(&graph.to_edge_list()).unwrap(), graph);
}

#[test]
fn edge_list_errors_name_the_line() {
    assert!(matches!(load_graph("3 1\n0 3\n"), Err(Error::VertexOutOfRange { line: 2, vertex: 3, n: 3 })));
    assert!(matches!(load_graph("3 1\n1 1\n"), Err(Error::SelfLoop { line: 2, vertex: 1 })));
    assert!(matches!(load_graph("3 2\n0 1\n"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(load_graph("3 1\n0 x\n"), Err(Error::Parse { line: 2, .. })));
    assert!(load_graph("").is_err());
}

#[test]
fn coloring_rejects_out_of_range_colors() {
    assert!(matches!(Coloring::new(vec![0, 3], 3), Err(Error::ColorOutOfRange { vertex: 1, color: 3, k: 3 })));
}

#[test]
fn coloring_index_is_a_bijection() {
    let (n, k) = (4, 3);
    let indices: BTreeSet<u64> = (0..81).map(|i| Coloring::from_index(i, n, k).index()).collect();
    assert_eq!(indices.len(), 81);
    for i in 0..81 {
        assert_eq!(Coloring::from_index(i, n, k).index(), i);
    }
}

#[test]
fn path_component_alternates() {
    // 0-1-2-3-4 colored 0 1 0 2 0: S(0, 1) stops where color 2 interrupts.
    let graph = Graph::path(5);
    let sigma = Coloring::new(vec![0, 1, 0, 2, 0], 3).unwrap();
    let s = kempe_component(&graph, &sigma, 0, 1);
    assert_eq!(s.vertices, vec![0, 1, 2]);
    assert_eq!(s.color_pair(), (0, 1));
    let flipped = flip(&sigma, &s);
    assert_eq!(flipped.as_slice(), &[1, 0, 1, 2, 0]);
    assert!(is_proper(&graph, &flipped));
    assert!(kempe_component(&graph, &sigma, 3, 2).is_empty());
}

#[test]
fn monochromatic_edges_do_not_join_components() {
    let graph = Graph::path(3);
    let sigma = Coloring::new(vec![0, 0, 1], 2).unwrap();
    assert!(!is_proper(&graph, &sigma));
    assert_eq!(kempe_component(&graph, &sigma, 0, 1).vertices, vec![0]);
    assert_eq!(kempe_component(&graph, &sigma, 1, 1).vertices, vec![1, 2]);
}

#[test]
fn available_colors_avoid_neighbors() {
    let graph = Graph::path(3);
    let sigma = Coloring::new(vec![0, 1, 2], 4).unwrap();
    assert_eq!(available_colors(&graph, &sigma, 1), vec![1, 3]);
}

proptest! {
    #[test]
    fn components_match_the_oracle((graph, colors, k) in arbitrary_instance()) {
        let sigma = Coloring::new(colors.clone(), k).unwrap();
        for v in 0..graph.n() {
            for c in 0..k {
                let s = kempe_component(&graph, &sigma, v, c);
                let expected: Vec<usize> = component_oracle(&graph, &colors, v, c).into_iter().collect();
                prop_assert_eq!(&s.vertices, &expected);
            }
        }
    }

    #[test]
    fn flipping_twice_restores((graph, colors, k) in arbitrary_instance()) {
        let sigma = Coloring::new(colors, k).unwrap();
        for s in enumerate_components(&graph, &sigma) {
            let once = flip(&sigma, &s);
            prop_assert_eq!(hamming(&once, &sigma), s.size());
            prop_assert_eq!(flip(&once, &s), sigma.clone());
        }
    }

    #[test]
    fn proper_flips_are_involutions((graph, colors, k) in arbitrary_instance()) {
        let sigma = Coloring::new(colors, k).unwrap();
        prop_assume!(is_proper(&graph, &sigma));
        for s in enumerate_components(&graph, &sigma).into_iter().filter(|s| !s.is_empty()) {
            let once = flip(&sigma, &s);
            let back = kempe_component(&graph, &once, s.vertices[0], sigma.get(s.vertices[0]));
            prop_assert!(back.same_flip(&s));
        }
    }

    #[test]
    fn flips_preserve_properness((graph, colors, k) in arbitrary_instance()) {
        let sigma = Coloring::new(colors, k).unwrap();
        if is_proper(&graph, &sigma) {
            for s in enumerate_components(&graph, &sigma) {
                prop_assert!(is_proper(&graph, &flip(&sigma, &s)));
            }
        }
    }
}
