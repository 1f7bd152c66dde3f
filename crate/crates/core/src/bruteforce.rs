//! Exponential reference implementations used for differential testing.
//!
//! Everything here favors obviousness over speed: isomorphism by trying all
//! vertex bijections, class counting by scanning every labeled graph. Tests
//! compare the optimized paths against these.

use std::collections::BTreeSet;

use crate::canon::{canonical_code, ColorAssignment};
use crate::error::Result;
use crate::exec::ExecMode;
use crate::hypergraph::Hypergraph;

/// All permutations of `0..n` in lexicographic order. Factorial; callers
/// stay at desk scale.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn grow(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                current.push(v);
                grow(n, current, used, out);
                current.pop();
                used[v] = false;
            }
        }
    }
    grow(n, &mut current, &mut used, &mut out);
    out
}

fn edge_profile(graph: &Hypergraph, colors: Option<&ColorAssignment>) -> Vec<(usize, Vec<usize>, u64)> {
    let mut profile = Vec::new();
    for arity in graph.arities() {
        for (i, edge) in graph.edges(arity).iter().enumerate() {
            let color = colors
                .and_then(|c| c.edge_colors.get(&arity))
                .map(|v| v[i])
                .unwrap_or(0);
            profile.push((arity, edge.clone(), color));
        }
    }
    profile.sort_unstable();
    profile
}

/// Color-preserving isomorphism by exhaustive bijection search. Independent
/// of the canonical-form machinery.
pub fn isomorphic_by_search(
    a: &Hypergraph,
    a_colors: Option<&ColorAssignment>,
    b: &Hypergraph,
    b_colors: Option<&ColorAssignment>,
) -> bool {
    let n = a.vertex_count();
    if n != b.vertex_count() {
        return false;
    }
    let target = edge_profile(b, b_colors);
    'outer: for pi in permutations(n) {
        for v in 0..n {
            let av = a_colors.map(|c| c.vertex_colors[v]).unwrap_or(0);
            let bv = b_colors.map(|c| c.vertex_colors[pi[v]]).unwrap_or(0);
            if av != bv {
                continue 'outer;
            }
        }
        let mut mapped = Vec::new();
        for arity in a.arities() {
            for (i, edge) in a.edges(arity).iter().enumerate() {
                let color = a_colors
                    .and_then(|c| c.edge_colors.get(&arity))
                    .map(|v| v[i])
                    .unwrap_or(0);
                let mut image: Vec<usize> = edge.iter().map(|&v| pi[v]).collect();
                image.sort_unstable();
                mapped.push((arity, image, color));
            }
        }
        mapped.sort_unstable();
        if mapped == target {
            return true;
        }
    }
    false
}

/// Every labeled simple graph on `n` vertices, one per subset of vertex
/// pairs, in mask order.
pub fn all_simple_graphs(n: usize) -> Vec<Hypergraph> {
    let mut pairs = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            pairs.push((u, v));
        }
    }
    let count = 1usize << pairs.len();
    (0..count)
        .map(|mask| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            Hypergraph::graph(n, &edges).expect("pairs are in range and distinct")
        })
        .collect()
}

/// Number of isomorphism classes of simple graphs on `n` vertices, found by
/// scanning all labeled graphs. Independent of the extension-based sweep.
pub fn simple_class_count_by_scan(n: usize, mode: ExecMode) -> Result<usize> {
    let codes = mode.map_vec(all_simple_graphs(n), |graph| {
        canonical_code(&graph, None).expect("uniform colors validate")
    });
    Ok(codes.into_iter().collect::<BTreeSet<_>>().len())
}
