//! Canonical forms for colored hypergraphs.
//!
//! A hypergraph, together with optional vertex and edge colors, is turned
//! into a self-contained byte string that is equal for two inputs exactly
//! when a color-preserving isomorphism exists between them. The code is
//! computed per connected component of the bipartite incidence graph and the
//! component blocks are sorted, so the code of a disjoint union is the
//! sorted multiset of the component codes. Color values are part of the
//! code: recoloring a graph changes its code even when the color classes
//! induce the same partition.

mod cache;
mod enumerate;
mod search;

pub use cache::{export as cache_export, import as cache_import, len as cache_len, PortableEntry};
pub use enumerate::{enumerate_hypergraphs, EnumerationClass, EnumerationOptions};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use search::{push_u32, read_u32, read_u64, Component};

/// Vertex and edge colors for a hypergraph. Color values are semantic, not
/// just a partition: codes computed under different values differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorAssignment {
    /// One color per vertex.
    pub vertex_colors: Vec<u64>,
    /// Colors per arity, parallel to the edge lists; arities missing from the
    /// map are uniformly colored 0.
    pub edge_colors: BTreeMap<usize, Vec<u64>>,
}

impl ColorAssignment {
    /// The all-zero coloring of `graph`.
    pub fn uniform(graph: &Hypergraph) -> Self {
        ColorAssignment {
            vertex_colors: vec![0; graph.vertex_count()],
            edge_colors: BTreeMap::new(),
        }
    }

    fn validate(&self, graph: &Hypergraph) -> Result<()> {
        if self.vertex_colors.len() != graph.vertex_count() {
            return Err(Error::ColorCoverageError {
                reason: format!(
                    "{} vertex colors for {} vertices",
                    self.vertex_colors.len(),
                    graph.vertex_count()
                ),
            });
        }
        for (&arity, colors) in &self.edge_colors {
            if colors.len() != graph.edge_count(arity) {
                return Err(Error::ColorCoverageError {
                    reason: format!(
                        "{} edge colors for {} edges of arity {}",
                        colors.len(),
                        graph.edge_count(arity),
                        arity
                    ),
                });
            }
        }
        Ok(())
    }

    fn edge_color(&self, arity: usize, index: usize) -> u64 {
        self.edge_colors
            .get(&arity)
            .map(|c| c[index])
            .unwrap_or(0)
    }
}

/// A self-contained canonical code. Equal codes mean color-isomorphic
/// inputs; `decode` recovers a representative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// SHA-256 of the code bytes; used for grouping and progress sharding.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(&self.0);
        hasher.finalize().into()
    }

    /// The raw component blocks, already in sorted order.
    pub fn component_blocks(&self) -> Vec<&[u8]> {
        let bytes = &self.0;
        let mut at = 0usize;
        let count = read_u32(bytes, &mut at) as usize;
        let mut blocks = Vec::with_capacity(count);
        for _ in 0..count {
            let len = read_u32(bytes, &mut at) as usize;
            blocks.push(&bytes[at..at + len]);
            at += len;
        }
        blocks
    }

    /// Assembles a code from component blocks, sorting them into canonical
    /// order. The blocks must come from `component_blocks` (or from
    /// single-component codes).
    pub fn from_component_blocks(mut blocks: Vec<Vec<u8>>) -> Self {
        blocks.sort_unstable();
        let mut bytes = Vec::new();
        push_u32(&mut bytes, blocks.len() as u32);
        for block in blocks {
            push_u32(&mut bytes, block.len() as u32);
            bytes.extend_from_slice(&block);
        }
        CanonicalCode(bytes)
    }

    /// Rebuilds a representative hypergraph and coloring from the code.
    /// Canonicalizing the result reproduces the same code.
    pub fn decode(&self) -> (Hypergraph, ColorAssignment) {
        let mut vertex_colors = Vec::new();
        let mut edges: BTreeMap<usize, Vec<(Vec<usize>, u64)>> = BTreeMap::new();
        for block in self.component_blocks() {
            let offset = vertex_colors.len();
            let mut at = 0usize;
            let nv = read_u32(block, &mut at) as usize;
            for _ in 0..nv {
                vertex_colors.push(read_u64(block, &mut at));
            }
            let groups = read_u32(block, &mut at) as usize;
            for _ in 0..groups {
                let arity = read_u32(block, &mut at) as usize;
                let count = read_u32(block, &mut at) as usize;
                for _ in 0..count {
                    let endpoints: Vec<usize> = (0..arity)
                        .map(|_| offset + read_u32(block, &mut at) as usize)
                        .collect();
                    let color = read_u64(block, &mut at);
                    edges.entry(arity).or_default().push((endpoints, color));
                }
            }
        }
        let vertex_count = vertex_colors.len();
        let mut edge_lists: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        let mut edge_colors: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (arity, list) in edges {
            for (endpoints, color) in list {
                edge_lists.entry(arity).or_default().push(endpoints);
                edge_colors.entry(arity).or_default().push(color);
            }
        }
        let graph = crate::hypergraph::build_hypergraph(vertex_count, edge_lists)
            .expect("canonical codes decode to valid hypergraphs");
        (
            graph,
            ColorAssignment {
                vertex_colors,
                edge_colors,
            },
        )
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for byte in self.digest() {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

/// The canonical code of a graph together with the order that realizes it.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub code: CanonicalCode,
    /// Canonical position -> original vertex.
    pub vertex_order: Vec<usize>,
}

fn input_digest(graph: &Hypergraph, colors: &ColorAssignment) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((graph.vertex_count() as u64).to_be_bytes());
    for &c in &colors.vertex_colors {
        hasher.update(c.to_be_bytes());
    }
    for arity in graph.arities() {
        hasher.update((arity as u64).to_be_bytes());
        for (i, edge) in graph.edges(arity).iter().enumerate() {
            hasher.update(colors.edge_color(arity, i).to_be_bytes());
            for &v in edge {
                hasher.update((v as u64).to_be_bytes());
            }
        }
    }
    hasher.finalize().into()
}

fn split_components(graph: &Hypergraph, colors: &ColorAssignment) -> Vec<(Component, Vec<usize>)> {
    let n = graph.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for arity in graph.arities() {
        for edge in graph.edges(arity) {
            for pair in edge.windows(2) {
                let (a, b) = (find(&mut parent, pair[0]), find(&mut parent, pair[1]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let root = find(&mut parent, v);
        members.entry(root).or_default().push(v);
    }
    let mut local = vec![0usize; n];
    let mut comps: Vec<(Component, Vec<usize>)> = Vec::new();
    let mut comp_of = vec![0usize; n];
    for (ci, verts) in members.into_values().enumerate() {
        for (li, &v) in verts.iter().enumerate() {
            local[v] = li;
            comp_of[v] = ci;
        }
        let vertex_colors = verts.iter().map(|&v| colors.vertex_colors[v]).collect();
        comps.push((
            Component {
                nv: verts.len(),
                vertex_colors,
                edges: Vec::new(),
            },
            verts,
        ));
    }
    for arity in graph.arities() {
        for (i, edge) in graph.edges(arity).iter().enumerate() {
            let ci = comp_of[edge[0]];
            let endpoints: Vec<usize> = edge.iter().map(|&v| local[v]).collect();
            comps[ci]
                .0
                .edges
                .push((arity, colors.edge_color(arity, i), endpoints));
        }
    }
    comps
}

/// Computes the canonical form of a colored hypergraph. `colors` defaults to
/// the all-zero assignment. Results are memoized process-wide.
pub fn canonical_form(graph: &Hypergraph, colors: Option<&ColorAssignment>) -> Result<CanonicalForm> {
    let owned;
    let colors = match colors {
        Some(c) => c,
        None => {
            owned = ColorAssignment::uniform(graph);
            &owned
        }
    };
    colors.validate(graph)?;
    let key = input_digest(graph, colors);
    if let Some(hit) = cache::lookup(&key) {
        return Ok(CanonicalForm {
            code: CanonicalCode(hit.code_bytes.clone()),
            vertex_order: hit.vertex_order.clone(),
        });
    }
    let mut outcomes: Vec<(Vec<u8>, Vec<usize>)> = split_components(graph, colors)
        .into_iter()
        .map(|(comp, verts)| {
            let outcome = search::canonical_component(&comp);
            let order: Vec<usize> = outcome.order.iter().map(|&li| verts[li]).collect();
            (outcome.bytes, order)
        })
        .collect();
    // Ties between equal blocks are broken by the smallest original vertex so
    // the order is deterministic; any tie resolution yields the same code.
    outcomes.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut bytes = Vec::new();
    push_u32(&mut bytes, outcomes.len() as u32);
    let mut vertex_order = Vec::with_capacity(graph.vertex_count());
    for (block, order) in outcomes {
        push_u32(&mut bytes, block.len() as u32);
        bytes.extend_from_slice(&block);
        vertex_order.extend(order);
    }
    let form = CanonicalForm {
        code: CanonicalCode(bytes),
        vertex_order,
    };
    cache::insert(
        key,
        Arc::new(cache::Entry {
            code_bytes: form.code.0.clone(),
            vertex_order: form.vertex_order.clone(),
        }),
    );
    Ok(form)
}

/// The canonical code alone.
pub fn canonical_code(graph: &Hypergraph, colors: Option<&ColorAssignment>) -> Result<CanonicalCode> {
    Ok(canonical_form(graph, colors)?.code)
}

/// Whether two colored hypergraphs are isomorphic by a color-preserving map.
pub fn are_isomorphic(
    a: &Hypergraph,
    a_colors: Option<&ColorAssignment>,
    b: &Hypergraph,
    b_colors: Option<&ColorAssignment>,
) -> Result<bool> {
    Ok(canonical_code(a, a_colors)? == canonical_code(b, b_colors)?)
}

/// An explicit isomorphism between colored hypergraphs, if one exists: the
/// vertex bijection plus, per arity, the edge index mapping.
pub fn find_isomorphism(
    a: &Hypergraph,
    a_colors: Option<&ColorAssignment>,
    b: &Hypergraph,
    b_colors: Option<&ColorAssignment>,
) -> Result<Option<crate::hypergraph::HypergraphMorphism>> {
    let fa = canonical_form(a, a_colors)?;
    let fb = canonical_form(b, b_colors)?;
    if fa.code != fb.code {
        return Ok(None);
    }
    let mut vertex_map = vec![0usize; a.vertex_count()];
    for (pos, &va) in fa.vertex_order.iter().enumerate() {
        vertex_map[va] = fb.vertex_order[pos];
    }
    let owned_b;
    let b_colors = match b_colors {
        Some(c) => c,
        None => {
            owned_b = ColorAssignment::uniform(b);
            &owned_b
        }
    };
    let owned_a;
    let a_colors = match a_colors {
        Some(c) => c,
        None => {
            owned_a = ColorAssignment::uniform(a);
            &owned_a
        }
    };
    let mut edge_maps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for arity in a.arities() {
        // Pool target edges by (incidence, color); pull them out in id order
        // so parallel edges map off distinct representatives.
        let mut pool: BTreeMap<(Vec<usize>, u64), Vec<usize>> = BTreeMap::new();
        for (j, edge) in b.edges(arity).iter().enumerate() {
            pool.entry((edge.clone(), b_colors.edge_color(arity, j)))
                .or_default()
                .push(j);
        }
        for ids in pool.values_mut() {
            ids.reverse();
        }
        let mut map = Vec::with_capacity(a.edge_count(arity));
        for (i, edge) in a.edges(arity).iter().enumerate() {
            let mut image: Vec<usize> = edge.iter().map(|&v| vertex_map[v]).collect();
            image.sort_unstable();
            let key = (image, a_colors.edge_color(arity, i));
            let slot = pool.get_mut(&key).and_then(|ids| ids.pop());
            match slot {
                Some(j) => map.push(j),
                None => {
                    return Err(Error::SpecMismatch {
                        reason: "equal canonical codes but no edge matching".into(),
                    })
                }
            }
        }
        edge_maps.insert(arity, map);
    }
    Ok(Some(crate::hypergraph::HypergraphMorphism {
        source: a.clone(),
        target: b.clone(),
        vertex_map,
        edge_maps,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruteforce;
    use crate::exec::ExecMode;
    use crate::hypergraph::{build_hypergraph, validate_morphism};
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand::rngs::StdRng;

    fn permute(graph: &Hypergraph, pi: &[usize]) -> Hypergraph {
        let mut edges: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for arity in graph.arities() {
            for edge in graph.edges(arity) {
                edges
                    .entry(arity)
                    .or_default()
                    .push(edge.iter().map(|&v| pi[v]).collect());
            }
        }
        build_hypergraph(graph.vertex_count(), edges).unwrap()
    }

    fn permute_colors(graph: &Hypergraph, colors: &ColorAssignment, pi: &[usize]) -> ColorAssignment {
        // Vertex colors travel with vertices. Edge color slots follow the
        // sorted incidence order of the permuted graph.
        let mut vertex_colors = vec![0; colors.vertex_colors.len()];
        for (v, &c) in colors.vertex_colors.iter().enumerate() {
            vertex_colors[pi[v]] = c;
        }
        let mut edge_colors: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        let permuted = permute(graph, pi);
        for (&arity, arity_colors) in &colors.edge_colors {
            let mut tagged: Vec<(Vec<usize>, u64)> = graph
                .edges(arity)
                .iter()
                .zip(arity_colors)
                .map(|(edge, &c)| {
                    let mut image: Vec<usize> = edge.iter().map(|&v| pi[v]).collect();
                    image.sort_unstable();
                    (image, c)
                })
                .collect();
            tagged.sort_unstable();
            let mut slots = Vec::with_capacity(tagged.len());
            let mut by_edge = tagged.into_iter().peekable();
            for edge in permuted.edges(arity) {
                let (image, c) = by_edge.next().unwrap();
                assert_eq!(&image, edge);
                slots.push(c);
            }
            edge_colors.insert(arity, slots);
        }
        ColorAssignment {
            vertex_colors,
            edge_colors,
        }
    }

    fn prism() -> Hypergraph {
        Hypergraph::graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)])
            .unwrap()
    }

    fn k33() -> Hypergraph {
        Hypergraph::graph(6, &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)])
            .unwrap()
    }

    #[test]
    fn regular_pair_needs_individualization() {
        // Both are 3-regular on six vertices; color refinement alone leaves
        // a single cell for each, so this exercises the branching search.
        assert_ne!(
            canonical_code(&prism(), None).unwrap(),
            canonical_code(&k33(), None).unwrap()
        );
    }

    #[test]
    fn equal_degree_sequences_still_split() {
        let c6 = Hypergraph::graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
        let two_triangles =
            Hypergraph::graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_ne!(
            canonical_code(&c6, None).unwrap(),
            canonical_code(&two_triangles, None).unwrap()
        );
    }

    #[test]
    fn codes_are_relabeling_invariant() {
        let mixed = build_hypergraph(
            5,
            BTreeMap::from([
                (2, vec![vec![0, 1], vec![0, 1], vec![2, 3]]),
                (3, vec![vec![0, 2, 4], vec![1, 2, 3]]),
            ]),
        )
        .unwrap();
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for graph in [prism(), k33(), mixed] {
            let code = canonical_code(&graph, None).unwrap();
            for _ in 0..20 {
                let mut pi: Vec<usize> = (0..graph.vertex_count()).collect();
                pi.shuffle(&mut rng);
                let relabeled = permute(&graph, &pi);
                assert_eq!(code, canonical_code(&relabeled, None).unwrap());
            }
        }
    }

    #[test]
    fn agrees_with_bijection_search_on_all_pairs() {
        let graphs = bruteforce::all_simple_graphs(4);
        let codes: Vec<CanonicalCode> = graphs
            .iter()
            .map(|g| canonical_code(g, None).unwrap())
            .collect();
        for i in 0..graphs.len() {
            for j in (i + 1)..graphs.len() {
                let by_code = codes[i] == codes[j];
                let by_search = bruteforce::isomorphic_by_search(&graphs[i], None, &graphs[j], None);
                assert_eq!(by_code, by_search, "pair {i}/{j}");
            }
        }
    }

    #[test]
    fn color_values_are_part_of_the_code() {
        let path = Hypergraph::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let a = ColorAssignment {
            vertex_colors: vec![1, 2, 1],
            edge_colors: BTreeMap::new(),
        };
        let b = ColorAssignment {
            vertex_colors: vec![5, 9, 5],
            edge_colors: BTreeMap::new(),
        };
        assert_ne!(
            canonical_code(&path, Some(&a)).unwrap(),
            canonical_code(&path, Some(&b)).unwrap()
        );
        let reversed = ColorAssignment {
            vertex_colors: vec![1, 2, 1],
            edge_colors: BTreeMap::new(),
        };
        let flipped = permute(&path, &[2, 1, 0]);
        assert_eq!(
            canonical_code(&path, Some(&a)).unwrap(),
            canonical_code(&flipped, Some(&reversed)).unwrap()
        );
    }

    #[test]
    fn edge_colors_compare_as_multisets_on_parallel_edges() {
        let doubled = build_hypergraph(2, BTreeMap::from([(2, vec![vec![0, 1], vec![0, 1]])])).unwrap();
        let ab = ColorAssignment {
            vertex_colors: vec![0, 0],
            edge_colors: BTreeMap::from([(2, vec![3, 4])]),
        };
        let ba = ColorAssignment {
            vertex_colors: vec![0, 0],
            edge_colors: BTreeMap::from([(2, vec![4, 3])]),
        };
        let aa = ColorAssignment {
            vertex_colors: vec![0, 0],
            edge_colors: BTreeMap::from([(2, vec![3, 3])]),
        };
        let code = |c: &ColorAssignment| canonical_code(&doubled, Some(c)).unwrap();
        assert_eq!(code(&ab), code(&ba));
        assert_ne!(code(&ab), code(&aa));
    }

    #[test]
    fn vertex_colors_constrain_isomorphism() {
        let pair = Hypergraph::graph(3, &[(0, 1)]).unwrap();
        let edge_marked = ColorAssignment {
            vertex_colors: vec![0, 1, 0],
            edge_colors: BTreeMap::new(),
        };
        let isolated_marked = ColorAssignment {
            vertex_colors: vec![0, 0, 1],
            edge_colors: BTreeMap::new(),
        };
        assert!(!are_isomorphic(&pair, Some(&edge_marked), &pair, Some(&isolated_marked)).unwrap());
        assert!(!bruteforce::isomorphic_by_search(
            &pair,
            Some(&edge_marked),
            &pair,
            Some(&isolated_marked)
        ));
    }

    #[test]
    fn decode_reproduces_the_code() {
        let mut graphs = enumerate_hypergraphs(
            EnumerationClass::simple(4),
            EnumerationOptions::default(),
            ExecMode::Sequential,
        )
        .unwrap();
        graphs.push(
            build_hypergraph(
                5,
                BTreeMap::from([(2, vec![vec![0, 1], vec![0, 1]]), (3, vec![vec![2, 3, 4]])]),
            )
            .unwrap(),
        );
        for graph in graphs {
            let colors = ColorAssignment {
                vertex_colors: (0..graph.vertex_count() as u64).map(|v| v % 3).collect(),
                edge_colors: BTreeMap::new(),
            };
            for colors in [None, Some(&colors)] {
                let code = canonical_code(&graph, colors).unwrap();
                let (decoded, decoded_colors) = code.decode();
                assert!(decoded.check_degree_sum());
                assert_eq!(code, canonical_code(&decoded, Some(&decoded_colors)).unwrap());
            }
        }
    }

    #[test]
    fn union_code_is_the_sorted_block_multiset() {
        let a = prism();
        let b = Hypergraph::graph(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let union = a.disjoint_union(&b);
        let mut expected: Vec<Vec<u8>> = canonical_code(&a, None)
            .unwrap()
            .component_blocks()
            .into_iter()
            .map(|b| b.to_vec())
            .collect();
        expected.extend(
            canonical_code(&b, None)
                .unwrap()
                .component_blocks()
                .into_iter()
                .map(|b| b.to_vec()),
        );
        let assembled = CanonicalCode::from_component_blocks(expected);
        assert_eq!(assembled, canonical_code(&union, None).unwrap());
    }

    #[test]
    fn isomorphism_witness_validates() {
        let graph = prism();
        let pi = [4, 2, 0, 5, 3, 1];
        let relabeled = permute(&graph, &pi);
        let morphism = find_isomorphism(&graph, None, &relabeled, None).unwrap().unwrap();
        assert!(validate_morphism(&morphism).unwrap());
        assert!(crate::hypergraph::is_bijective_morphism(&morphism));
        assert!(find_isomorphism(&graph, None, &k33(), None).unwrap().is_none());
    }

    #[test]
    fn simple_class_counts_match_the_labeled_scan() {
        let expected = [1usize, 1, 2, 4, 11, 34];
        for n in 0..=5 {
            let sweep = enumerate_hypergraphs(
                EnumerationClass::simple(n),
                EnumerationOptions::default(),
                ExecMode::Sequential,
            )
            .unwrap();
            assert_eq!(sweep.len(), expected[n], "n = {n}");
            if n >= 2 {
                let scan = bruteforce::simple_class_count_by_scan(n, ExecMode::Sequential).unwrap();
                assert_eq!(sweep.len(), scan, "n = {n}");
            }
        }
    }

    #[test]
    fn hypergraph_classes_match_pairwise_grouping() {
        // Arity up to 3 on three vertices: the four 2-uniform classes, each
        // with or without the unique 3-edge.
        let classes = enumerate_hypergraphs(
            EnumerationClass {
                vertex_count: 3,
                max_arity: 3,
                max_multiplicity: 1,
            },
            EnumerationOptions::default(),
            ExecMode::Sequential,
        )
        .unwrap();
        assert_eq!(classes.len(), 8);
        for (i, a) in classes.iter().enumerate() {
            for b in classes.iter().skip(i + 1) {
                assert!(!bruteforce::isomorphic_by_search(a, None, b, None));
            }
        }
        let doubled = enumerate_hypergraphs(
            EnumerationClass {
                vertex_count: 2,
                max_arity: 2,
                max_multiplicity: 2,
            },
            EnumerationOptions::default(),
            ExecMode::Sequential,
        )
        .unwrap();
        assert_eq!(doubled.len(), 3);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let err = enumerate_hypergraphs(
            EnumerationClass::simple(9),
            EnumerationOptions::default(),
            ExecMode::Sequential,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CapExceeded { requested: 9, cap: 8 }));
    }

    #[test]
    fn parallel_and_sequential_enumeration_agree() {
        let class = EnumerationClass::simple(5);
        let opts = EnumerationOptions::default();
        let seq = enumerate_hypergraphs(class, opts, ExecMode::Sequential).unwrap();
        let par = enumerate_hypergraphs(class, opts, ExecMode::Parallel { jobs: Some(3) }).unwrap();
        let codes = |graphs: &[Hypergraph]| {
            graphs
                .iter()
                .map(|g| canonical_code(g, None).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(codes(&seq), codes(&par));
    }

    #[test]
    fn cache_exports_and_imports() {
        let graph = prism();
        canonical_code(&graph, None).unwrap();
        let exported = cache_export();
        assert!(!exported.is_empty());
        let before = cache_len();
        cache_import(exported);
        assert_eq!(cache_len(), before);
    }

    fn arbitrary_colored() -> impl Strategy<Value = (Hypergraph, ColorAssignment)> {
        (2usize..6)
            .prop_flat_map(|n| {
                let pairs = proptest::collection::vec((0..n, 0..n), 0..7);
                let triples = proptest::collection::vec((0..n, 0..n, 0..n), 0..4);
                let colors = proptest::collection::vec(0u64..4, n);
                (Just(n), pairs, triples, colors)
            })
            .prop_map(|(n, pairs, triples, colors)| {
                let mut edges: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
                for (u, v) in pairs {
                    if u != v {
                        let mut e = vec![u, v];
                        e.sort_unstable();
                        edges.entry(2).or_default().push(e);
                    }
                }
                for (u, v, w) in triples {
                    if u != v && v != w && u != w {
                        let mut e = vec![u, v, w];
                        e.sort_unstable();
                        edges.entry(3).or_default().push(e);
                    }
                }
                let graph = build_hypergraph(n, edges).unwrap();
                let coloring = ColorAssignment {
                    vertex_colors: colors,
                    edge_colors: BTreeMap::new(),
                };
                (graph, coloring)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_code_invariant_under_relabeling(
            (graph, colors) in arbitrary_colored(),
            seed in 0u64..1 << 48,
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut pi: Vec<usize> = (0..graph.vertex_count()).collect();
            pi.shuffle(&mut rng);
            let relabeled = permute(&graph, &pi);
            let relabeled_colors = permute_colors(&graph, &colors, &pi);
            prop_assert_eq!(
                canonical_code(&graph, Some(&colors)).unwrap(),
                canonical_code(&relabeled, Some(&relabeled_colors)).unwrap()
            );
        }

        #[test]
        fn prop_decode_round_trips((graph, colors) in arbitrary_colored()) {
            let code = canonical_code(&graph, Some(&colors)).unwrap();
            let (decoded, decoded_colors) = code.decode();
            prop_assert_eq!(&code, &canonical_code(&decoded, Some(&decoded_colors)).unwrap());
            prop_assert_eq!(decoded.vertex_count(), graph.vertex_count());
            prop_assert!(decoded.check_degree_sum());
        }

        #[test]
        fn prop_union_blocks_concatenate(
            (a, a_colors) in arbitrary_colored(),
            (b, b_colors) in arbitrary_colored(),
        ) {
            let union = a.disjoint_union(&b);
            let mut union_colors = a_colors.clone();
            union_colors.vertex_colors.extend(b_colors.vertex_colors.iter().copied());
            let mut blocks: Vec<Vec<u8>> = canonical_code(&a, Some(&a_colors))
                .unwrap()
                .component_blocks()
                .into_iter()
                .map(|bl| bl.to_vec())
                .collect();
            blocks.extend(
                canonical_code(&b, Some(&b_colors))
                    .unwrap()
                    .component_blocks()
                    .into_iter()
                    .map(|bl| bl.to_vec()),
            );
            prop_assert_eq!(
                CanonicalCode::from_component_blocks(blocks),
                canonical_code(&union, Some(&union_colors)).unwrap()
            );
        }
    }
}
