//! Finite hypergraphs with abstract parallel edges, grouped by arity.
//!
//! Vertices are `0..vertex_count()`. For each arity `j >= 2` the edges form a
//! list of incidence sets; an edge's id is its position in that list, so two
//! edges may share an incidence set and still be distinct. Self-incidences are
//! rejected: every edge touches `j` distinct vertices.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Hypergraph {
    vertex_count: usize,
    /// Arity -> edge list. Incidence sets and the lists themselves are
    /// sorted and arities with no edges are not stored, so structural
    /// equality is well defined and an edge id is the edge's rank within
    /// its arity.
    edges: BTreeMap<usize, Vec<Vec<usize>>>,
}

/// Validates and normalizes raw edge data into a [`Hypergraph`].
pub fn build_hypergraph(
    vertex_count: usize,
    edges_by_arity: BTreeMap<usize, Vec<Vec<usize>>>,
) -> Result<Hypergraph> {
    let mut edges = BTreeMap::new();
    for (arity, list) in edges_by_arity {
        if list.is_empty() {
            continue;
        }
        if arity < 2 {
            return Err(Error::DegenerateEdge {
                incident: list.into_iter().next().unwrap_or_default(),
            });
        }
        let mut normalized = Vec::with_capacity(list.len());
        for incident in list {
            if incident.len() != arity {
                return Err(Error::ArityMismatch {
                    declared: arity,
                    incident,
                });
            }
            let mut sorted = incident;
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DegenerateEdge { incident: sorted });
            }
            if let Some(&v) = sorted.last() {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: v,
                        vertex_count,
                    });
                }
            }
            normalized.push(sorted);
        }
        // Stable, so callers that pre-sort keep their edge ids.
        normalized.sort();
        edges.insert(arity, normalized);
    }
    Ok(Hypergraph {
        vertex_count,
        edges,
    })
}

impl Hypergraph {
    /// The edgeless hypergraph on `vertex_count` vertices.
    pub fn edgeless(vertex_count: usize) -> Self {
        Hypergraph {
            vertex_count,
            edges: BTreeMap::new(),
        }
    }

    /// Convenience constructor for plain graphs (arity-2 edges only).
    pub fn graph(vertex_count: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let list = pairs.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>();
        let mut by_arity = BTreeMap::new();
        by_arity.insert(2, list);
        build_hypergraph(vertex_count, by_arity)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Arities that carry at least one edge, ascending.
    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.keys().copied()
    }

    /// Edge list for one arity; the position of an edge is its id.
    pub fn edges(&self, arity: usize) -> &[Vec<usize>] {
        self.edges.get(&arity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn edge_count(&self, arity: usize) -> usize {
        self.edges(arity).len()
    }

    pub fn total_edge_count(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }

    pub fn is_edgeless(&self) -> bool {
        self.edges.is_empty()
    }

    /// True when no two edges of the same arity share an incidence set.
    pub fn is_simple(&self) -> bool {
        self.edges.values().all(|list| {
            let mut seen = list.to_vec();
            seen.sort();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }

    /// Number of arity-`arity` edges incident to `vertex`.
    pub fn degree(&self, vertex: usize, arity: usize) -> Result<usize> {
        if vertex >= self.vertex_count {
            return Err(Error::VertexOutOfRange {
                vertex,
                vertex_count: self.vertex_count,
            });
        }
        Ok(self
            .edges(arity)
            .iter()
            .filter(|incident| incident.binary_search(&vertex).is_ok())
            .count())
    }

    /// Degree of `vertex` summed over every arity.
    pub fn total_degree(&self, vertex: usize) -> Result<usize> {
        let mut sum = 0;
        for arity in self.edges.keys() {
            sum += self.degree(vertex, *arity)?;
        }
        Ok(sum)
    }

    /// Smallest `b >= 1` such that every arity above `b` is edgeless.
    pub fn bounding_degree(&self) -> usize {
        self.edges.keys().next_back().copied().unwrap_or(1)
    }

    /// Both sides of the degree-sum identity: summed degrees on the left,
    /// arity-weighted edge counts on the right. They agree on every input;
    /// exposed as a self-check.
    pub fn degree_sum_sides(&self) -> (usize, usize) {
        let lhs = self
            .edges
            .values()
            .map(|list| list.iter().map(Vec::len).sum::<usize>())
            .sum();
        let rhs = self
            .edges
            .iter()
            .map(|(arity, list)| arity * list.len())
            .sum();
        (lhs, rhs)
    }

    pub fn check_degree_sum(&self) -> bool {
        let (lhs, rhs) = self.degree_sum_sides();
        lhs == rhs
    }

    /// Disjoint union: `other`'s vertices are shifted past `self`'s, and for
    /// each arity `self`'s edges keep their ids while `other`'s follow.
    pub fn disjoint_union(&self, other: &Hypergraph) -> Hypergraph {
        let offset = self.vertex_count;
        let mut edges = self.edges.clone();
        for (&arity, list) in &other.edges {
            let shifted = list
                .iter()
                .map(|incident| incident.iter().map(|v| v + offset).collect())
                .collect::<Vec<_>>();
            edges.entry(arity).or_default().extend(shifted);
        }
        Hypergraph {
            vertex_count: self.vertex_count + other.vertex_count,
            edges,
        }
    }

    /// Deletes `vertex`, every incident edge, and re-indexes the survivors
    /// preserving order. Surviving edge ids stay in their original relative
    /// order, so callers can track which edges made it.
    pub fn delete_vertex(&self, vertex: usize) -> Result<(Hypergraph, DeletionTrace)> {
        if vertex >= self.vertex_count {
            return Err(Error::VertexOutOfRange {
                vertex,
                vertex_count: self.vertex_count,
            });
        }
        let remap = |v: usize| if v > vertex { v - 1 } else { v };
        let mut edges = BTreeMap::new();
        let mut surviving_edges = BTreeMap::new();
        for (&arity, list) in &self.edges {
            let mut kept = Vec::new();
            let mut kept_ids = Vec::new();
            for (id, incident) in list.iter().enumerate() {
                if incident.binary_search(&vertex).is_ok() {
                    continue;
                }
                kept.push(incident.iter().map(|&v| remap(v)).collect());
                kept_ids.push(id);
            }
            if !kept.is_empty() {
                edges.insert(arity, kept);
                surviving_edges.insert(arity, kept_ids);
            }
        }
        Ok((
            Hypergraph {
                vertex_count: self.vertex_count - 1,
                edges,
            },
            DeletionTrace {
                deleted: vertex,
                surviving_edges,
            },
        ))
    }

    /// Appends `count` isolated vertices.
    pub fn add_isolated(&self, count: usize) -> Hypergraph {
        Hypergraph {
            vertex_count: self.vertex_count + count,
            edges: self.edges.clone(),
        }
    }
}

/// Records which original edges survived a vertex deletion, per arity, in the
/// order they were kept (which is the surviving edge-id order).
#[derive(Clone, Debug)]
pub struct DeletionTrace {
    pub deleted: usize,
    pub surviving_edges: BTreeMap<usize, Vec<usize>>,
}

/// The two-colored incidence graph of a hypergraph: vertices on the left,
/// one node per edge on the right, adjacency given by incidence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteIncidenceGraph {
    pub vertex_count: usize,
    /// Edge nodes in (arity ascending, edge id ascending) order.
    pub edge_nodes: Vec<EdgeNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeNode {
    pub arity: usize,
    pub neighbors: Vec<usize>,
}

pub fn to_incidence(g: &Hypergraph) -> BipartiteIncidenceGraph {
    let mut edge_nodes = Vec::with_capacity(g.total_edge_count());
    for arity in g.arities().collect::<Vec<_>>() {
        for incident in g.edges(arity) {
            edge_nodes.push(EdgeNode {
                arity,
                neighbors: incident.clone(),
            });
        }
    }
    BipartiteIncidenceGraph {
        vertex_count: g.vertex_count(),
        edge_nodes,
    }
}

pub fn from_incidence(b: &BipartiteIncidenceGraph) -> Result<Hypergraph> {
    let mut edges_by_arity: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for (idx, node) in b.edge_nodes.iter().enumerate() {
        if node.neighbors.len() != node.arity {
            return Err(Error::MalformedIncidence {
                edge_node: idx,
                reason: format!(
                    "arity {} node with {} neighbors",
                    node.arity,
                    node.neighbors.len()
                ),
            });
        }
        let mut sorted = node.neighbors.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedIncidence {
                edge_node: idx,
                reason: "repeated neighbor".into(),
            });
        }
        if sorted.last().is_some_and(|&v| v >= b.vertex_count) {
            return Err(Error::MalformedIncidence {
                edge_node: idx,
                reason: "neighbor out of range".into(),
            });
        }
        if node.arity < 2 {
            return Err(Error::MalformedIncidence {
                edge_node: idx,
                reason: "arity below two".into(),
            });
        }
        edges_by_arity.entry(node.arity).or_default().push(sorted);
    }
    build_hypergraph(b.vertex_count, edges_by_arity)
}

/// A hypergraph morphism: a vertex map plus, for each arity, an edge map that
/// commutes with incidence. Source and target are carried along so a morphism
/// is self-contained.
#[derive(Clone, Debug)]
pub struct HypergraphMorphism {
    pub source: Hypergraph,
    pub target: Hypergraph,
    pub vertex_map: Vec<usize>,
    pub edge_maps: BTreeMap<usize, Vec<usize>>,
}

/// Checks that the maps are total, land in range, and that every source
/// edge's image edge has exactly the image incidence set.
pub fn validate_morphism(m: &HypergraphMorphism) -> Result<bool> {
    if m.vertex_map.len() != m.source.vertex_count() {
        return Err(Error::ColorCoverageError {
            reason: format!(
                "vertex map covers {} of {} vertices",
                m.vertex_map.len(),
                m.source.vertex_count()
            ),
        });
    }
    if let Some(&v) = m.vertex_map.iter().max() {
        if v >= m.target.vertex_count() {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                vertex_count: m.target.vertex_count(),
            });
        }
    }
    for arity in m.source.arities() {
        let map = match m.edge_maps.get(&arity) {
            Some(map) if map.len() == m.source.edge_count(arity) => map,
            _ => return Ok(false),
        };
        let targets = m.target.edges(arity);
        for (incident, &image) in m.source.edges(arity).iter().zip(map) {
            let Some(target_incident) = targets.get(image) else {
                return Ok(false);
            };
            let mut mapped: Vec<usize> = incident.iter().map(|&v| m.vertex_map[v]).collect();
            mapped.sort_unstable();
            if mapped.windows(2).any(|w| w[0] == w[1]) {
                return Ok(false);
            }
            if &mapped != target_incident {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True when the morphism is bijective on vertices and on every edge class.
pub fn is_bijective_morphism(m: &HypergraphMorphism) -> bool {
    if m.source.vertex_count() != m.target.vertex_count() {
        return false;
    }
    let mut seen = vec![false; m.target.vertex_count()];
    for &v in &m.vertex_map {
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let arities: Vec<usize> = m.source.arities().chain(m.target.arities()).collect();
    for arity in arities {
        if m.source.edge_count(arity) != m.target.edge_count(arity) {
            return false;
        }
        if m.source.edge_count(arity) == 0 {
            continue;
        }
        let Some(map) = m.edge_maps.get(&arity) else {
            return false;
        };
        let mut seen = vec![false; m.target.edge_count(arity)];
        for &e in map {
            if e >= seen.len() || seen[e] {
                return false;
            }
            seen[e] = true;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Hypergraph {
        Hypergraph::graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn builds_and_normalizes() {
        let g = Hypergraph::graph(3, &[(2, 0), (1, 2)]).unwrap();
        assert_eq!(g.edges(2), &[vec![0, 2], vec![1, 2]]);
        assert_eq!(g.vertex_count(), 3);
    }

    #[test]
    fn rejects_out_of_range() {
        let err = Hypergraph::graph(3, &[(0, 3)]).unwrap_err();
        assert_eq!(
            err,
            Error::VertexOutOfRange {
                vertex: 3,
                vertex_count: 3
            }
        );
    }

    #[test]
    fn rejects_repeated_vertex() {
        let err = Hypergraph::graph(3, &[(1, 1)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateEdge { .. }));
    }

    #[test]
    fn rejects_arity_mismatch() {
        let mut by_arity = BTreeMap::new();
        by_arity.insert(3, vec![vec![0, 1]]);
        let err = build_hypergraph(4, by_arity).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { declared: 3, .. }));
    }

    #[test]
    fn degree_on_k4() {
        let g = k4();
        for v in 0..4 {
            assert_eq!(g.degree(v, 2).unwrap(), 3);
        }
        assert_eq!(g.degree(0, 3).unwrap(), 0);
    }

    #[test]
    fn degree_sum_mixed_arities() {
        let mut by_arity = BTreeMap::new();
        by_arity.insert(2, vec![vec![0, 1], vec![0, 1]]);
        by_arity.insert(3, vec![vec![0, 1, 2]]);
        let g = build_hypergraph(3, by_arity).unwrap();
        let (lhs, rhs) = g.degree_sum_sides();
        assert_eq!(lhs, 7);
        assert_eq!(rhs, 2 * 2 + 3);
        assert!(g.check_degree_sum());
    }

    #[test]
    fn bounding_degree_cases() {
        assert_eq!(Hypergraph::edgeless(5).bounding_degree(), 1);
        assert_eq!(k4().bounding_degree(), 2);
        let mut by_arity = BTreeMap::new();
        by_arity.insert(2, vec![vec![0, 1]]);
        by_arity.insert(3, vec![vec![0, 1, 2]]);
        let g = build_hypergraph(3, by_arity).unwrap();
        assert_eq!(g.bounding_degree(), 3);
    }

    #[test]
    fn disjoint_union_shifts() {
        let g = Hypergraph::graph(2, &[(0, 1)]).unwrap();
        let h = Hypergraph::graph(3, &[(0, 2)]).unwrap();
        let u = g.disjoint_union(&h);
        assert_eq!(u.vertex_count(), 5);
        assert_eq!(u.edges(2), &[vec![0, 1], vec![2, 4]]);
        assert!(u.check_degree_sum());
    }

    #[test]
    fn delete_vertex_reindexes() {
        let g = Hypergraph::graph(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let (h, trace) = g.delete_vertex(1).unwrap();
        assert_eq!(h.vertex_count(), 3);
        assert_eq!(h.edges(2), &[vec![1, 2]]);
        assert_eq!(trace.surviving_edges.get(&2).unwrap(), &vec![2]);
    }

    #[test]
    fn incidence_round_trip_exact() {
        let mut by_arity = BTreeMap::new();
        by_arity.insert(2, vec![vec![0, 1], vec![0, 1], vec![2, 3]]);
        by_arity.insert(3, vec![vec![1, 2, 4]]);
        let g = build_hypergraph(5, by_arity).unwrap();
        let b = to_incidence(&g);
        assert_eq!(b.edge_nodes.len(), 4);
        let back = from_incidence(&b).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn malformed_incidence_rejected() {
        let b = BipartiteIncidenceGraph {
            vertex_count: 4,
            edge_nodes: vec![EdgeNode {
                arity: 3,
                neighbors: vec![0, 1],
            }],
        };
        assert!(matches!(
            from_incidence(&b),
            Err(Error::MalformedIncidence { edge_node: 0, .. })
        ));
    }

    #[test]
    fn identity_morphism_validates() {
        let g = k4();
        let m = HypergraphMorphism {
            source: g.clone(),
            target: g.clone(),
            vertex_map: (0..4).collect(),
            edge_maps: BTreeMap::from([(2, (0..6).collect())]),
        };
        assert!(validate_morphism(&m).unwrap());
        assert!(is_bijective_morphism(&m));
    }

    #[test]
    fn collapsing_morphism_fails() {
        let g = Hypergraph::graph(2, &[(0, 1)]).unwrap();
        let m = HypergraphMorphism {
            source: g.clone(),
            target: g,
            vertex_map: vec![0, 0],
            edge_maps: BTreeMap::from([(2, vec![0])]),
        };
        assert!(!validate_morphism(&m).unwrap());
    }
}
