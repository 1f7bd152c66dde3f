//! Canonical labeling of one connected component of the colored incidence
//! graph: iterated color refinement, individualization with backtracking,
//! and selection of the lexicographically minimal serialization.

use std::collections::BTreeMap;

/// A connected component in local indexing. Vertices are `0..nv`; every edge
/// stores sorted local endpoints. Parallel edges are separate entries.
pub(super) struct Component {
    pub nv: usize,
    pub vertex_colors: Vec<u64>,
    /// (arity, color, endpoints ascending).
    pub edges: Vec<(usize, u64, Vec<usize>)>,
}

pub(super) struct ComponentOutcome {
    pub bytes: Vec<u8>,
    /// Canonical position -> local vertex index.
    pub order: Vec<usize>,
}

struct Searcher<'a> {
    comp: &'a Component,
    /// Incident edge nodes per vertex (edge node i = node `nv + i`).
    vertex_adj: Vec<Vec<usize>>,
    node_count: usize,
    best: Option<Vec<u8>>,
    best_order: Vec<usize>,
    /// Automorphisms discovered from pairs of leaves with equal serializations,
    /// as permutations of local vertices.
    automorphisms: Vec<Vec<usize>>,
    prefix: Vec<usize>,
}

pub(super) fn canonical_component(comp: &Component) -> ComponentOutcome {
    let mut vertex_adj = vec![Vec::new(); comp.nv];
    for (i, (_, _, endpoints)) in comp.edges.iter().enumerate() {
        for &v in endpoints {
            vertex_adj[v].push(comp.nv + i);
        }
    }
    let node_count = comp.nv + comp.edges.len();
    let mut searcher = Searcher {
        comp,
        vertex_adj,
        node_count,
        best: None,
        best_order: Vec::new(),
        automorphisms: Vec::new(),
        prefix: Vec::new(),
    };
    let cells = searcher.initial_cells();
    searcher.search(cells);
    ComponentOutcome {
        bytes: searcher.best.expect("search visits at least one leaf"),
        order: searcher.best_order,
    }
}

impl<'a> Searcher<'a> {
    /// Initial partition: vertices keyed by color, edge nodes by (arity,
    /// color). Cell ids are dense and follow the sorted key order, with all
    /// vertex keys preceding all edge keys.
    fn initial_cells(&self) -> Vec<u32> {
        let mut keys: Vec<(u8, u64, u64)> = Vec::with_capacity(self.node_count);
        for v in 0..self.comp.nv {
            keys.push((0, self.comp.vertex_colors[v], 0));
        }
        for (arity, color, _) in &self.comp.edges {
            keys.push((1, *arity as u64, *color));
        }
        let mut distinct = keys.clone();
        distinct.sort_unstable();
        distinct.dedup();
        keys.iter()
            .map(|k| distinct.binary_search(k).unwrap() as u32)
            .collect()
    }

    fn neighbors(&self, node: usize) -> &[usize] {
        if node < self.comp.nv {
            &self.vertex_adj[node]
        } else {
            &self.comp.edges[node - self.comp.nv].2
        }
    }

    /// Refines to the coarsest stable partition reachable by splitting on
    /// neighbor-cell multisets. New cell ids follow (old id, signature) order,
    /// so the result depends only on the partition, not on node numbering.
    fn refine(&self, cells: &mut Vec<u32>) {
        loop {
            let mut groups: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
            for node in 0..self.node_count {
                let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
                for &nb in self.neighbors(node) {
                    *counts.entry(cells[nb]).or_insert(0) += 1;
                }
                let mut sig = Vec::with_capacity(2 + counts.len() * 2);
                sig.push(cells[node]);
                for (cell, count) in counts {
                    sig.push(cell);
                    sig.push(count);
                }
                groups.entry(sig).or_default().push(node);
            }
            let cell_count = groups.len();
            let old_count = {
                let mut seen = cells.clone();
                seen.sort_unstable();
                seen.dedup();
                seen.len()
            };
            if cell_count == old_count {
                return;
            }
            for (new_id, (_, nodes)) in groups.into_iter().enumerate() {
                for node in nodes {
                    cells[node] = new_id as u32;
                }
            }
        }
    }

    /// The vertices of the lowest-id cell containing more than one vertex.
    fn branch_cell(&self, cells: &[u32]) -> Option<Vec<usize>> {
        let mut by_cell: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for v in 0..self.comp.nv {
            by_cell.entry(cells[v]).or_default().push(v);
        }
        by_cell.into_values().find(|members| members.len() > 1)
    }

    /// Splits `u` off at the front of its cell: `u` keeps the cell id and the
    /// remaining members (and every later cell) shift up by one.
    fn individualize(&self, cells: &[u32], u: usize) -> Vec<u32> {
        let cu = cells[u];
        cells
            .iter()
            .enumerate()
            .map(|(node, &c)| if c < cu || node == u { c } else { c + 1 })
            .collect()
    }

    fn search(&mut self, mut cells: Vec<u32>) {
        self.refine(&mut cells);
        match self.branch_cell(&cells) {
            None => self.record_leaf(&cells),
            Some(candidates) => {
                let mut tried: Vec<usize> = Vec::new();
                for &u in &candidates {
                    if self.in_tried_orbit(u, &tried, &candidates) {
                        continue;
                    }
                    tried.push(u);
                    self.prefix.push(u);
                    let child = self.individualize(&cells, u);
                    self.search(child);
                    self.prefix.pop();
                }
            }
        }
    }

    /// True when a discovered automorphism that fixes the current prefix
    /// pointwise maps an already-tried candidate to `u`; such a branch would
    /// repeat an explored subtree.
    fn in_tried_orbit(&self, u: usize, tried: &[usize], candidates: &[usize]) -> bool {
        if tried.is_empty() || self.automorphisms.is_empty() {
            return false;
        }
        let mut parent = (0..self.comp.nv).collect::<Vec<usize>>();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for auto in &self.automorphisms {
            if self.prefix.iter().any(|&p| auto[p] != p) {
                continue;
            }
            for &v in candidates {
                let (a, b) = (find(&mut parent, v), find(&mut parent, auto[v]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, u);
        tried.iter().any(|&t| find(&mut parent, t) == root)
    }

    fn record_leaf(&mut self, cells: &[u32]) {
        let mut order: Vec<usize> = (0..self.comp.nv).collect();
        order.sort_by_key(|&v| cells[v]);
        let bytes = self.serialize(&order);
        match &self.best {
            None => {
                self.best = Some(bytes);
                self.best_order = order;
            }
            Some(best) => {
                if bytes < *best {
                    self.best = Some(bytes);
                    self.best_order = order;
                } else if bytes == *best {
                    // Two leaves with one serialization compose to an
                    // automorphism; keep it for orbit pruning.
                    let mut gamma = vec![0; self.comp.nv];
                    for (pos, &v) in order.iter().enumerate() {
                        gamma[v] = self.best_order[pos];
                    }
                    if gamma.iter().enumerate().any(|(v, &g)| g != v)
                        && !self.automorphisms.contains(&gamma)
                    {
                        self.automorphisms.push(gamma);
                    }
                }
            }
        }
    }

    /// Component serialization under a vertex order: vertex count, per-position
    /// colors, then per arity the sorted list of (endpoint positions, color).
    /// The color section is identical across leaves (cells are monochromatic),
    /// so byte-wise comparison ranks leaves by the adjacency body.
    fn serialize(&self, order: &[usize]) -> Vec<u8> {
        let nv = self.comp.nv;
        let mut pos = vec![0usize; nv];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let mut by_arity: BTreeMap<usize, Vec<(Vec<usize>, u64)>> = BTreeMap::new();
        for (arity, color, endpoints) in &self.comp.edges {
            let mut mapped: Vec<usize> = endpoints.iter().map(|&v| pos[v]).collect();
            mapped.sort_unstable();
            by_arity.entry(*arity).or_default().push((mapped, *color));
        }
        let mut bytes = Vec::new();
        push_u32(&mut bytes, nv as u32);
        for p in 0..nv {
            push_u64(&mut bytes, self.comp.vertex_colors[order[p]]);
        }
        push_u32(&mut bytes, by_arity.len() as u32);
        for (arity, mut edges) in by_arity {
            edges.sort_unstable();
            push_u32(&mut bytes, arity as u32);
            push_u32(&mut bytes, edges.len() as u32);
            for (endpoints, color) in edges {
                for p in endpoints {
                    push_u32(&mut bytes, p as u32);
                }
                push_u64(&mut bytes, color);
            }
        }
        bytes
    }
}

pub(super) fn push_u32(bytes: &mut Vec<u8>, value: u32) {
    bytes.extend_from_slice(&value.to_be_bytes());
}

pub(super) fn push_u64(bytes: &mut Vec<u8>, value: u64) {
    bytes.extend_from_slice(&value.to_be_bytes());
}

pub(super) fn read_u32(bytes: &[u8], at: &mut usize) -> u32 {
    let v = u32::from_be_bytes(bytes[*at..*at + 4].try_into().unwrap());
    *at += 4;
    v
}

pub(super) fn read_u64(bytes: &[u8], at: &mut usize) -> u64 {
    let v = u64::from_be_bytes(bytes[*at..*at + 8].try_into().unwrap());
    *at += 8;
    v
}
