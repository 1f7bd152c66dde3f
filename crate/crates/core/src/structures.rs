//! Value tables attached to hypergraphs and the classes embedded through
//! them: proper colorings, labelings, Feynman graphs, and ribbon graphs.
//!
//! A structure table declares, per slot `(k, j)`, a modulus `m`; arity-`j`
//! elements (vertices when `j = 1`, edges otherwise) then carry residues
//! below `m`. Modulus 1 is the trivial structure: the slot exists, every
//! element silently carries 0, and nothing is stored.

use std::collections::BTreeMap;

use crate::canon::{canonical_code, CanonicalCode, ColorAssignment};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, HypergraphMorphism};

/// Declared structure slots: `(slot k, arity j) -> modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StructureSpec {
    table: BTreeMap<(usize, usize), u64>,
}

impl StructureSpec {
    /// The empty table; every slot is undeclared.
    pub fn new() -> Self {
        StructureSpec::default()
    }

    /// Declares slot `(k, j)` with the given modulus (1 is the trivial
    /// structure). Slot and arity indices start at 1.
    pub fn with_slot(mut self, k: usize, j: usize, modulus: u64) -> Result<Self> {
        if k == 0 || j == 0 || modulus == 0 {
            return Err(Error::SpecMismatch {
                reason: format!("slot ({k},{j}) with modulus {modulus} is ill-formed"),
            });
        }
        self.table.insert((k, j), modulus);
        Ok(self)
    }

    /// The modulus of a declared slot.
    pub fn modulus(&self, k: usize, j: usize) -> Option<u64> {
        self.table.get(&(k, j)).copied()
    }

    /// Declared slots in `(k, j)` order.
    pub fn slots(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.table.iter().map(|(&(k, j), &m)| (k, j, m))
    }

    /// Declared slots carrying more than one residue, for the given arity.
    fn nontrivial_for_arity(&self, j: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.table
            .iter()
            .filter(move |(&(_, sj), &m)| sj == j && m > 1)
            .map(|(&(k, _), &m)| (k, m))
    }
}

/// A hypergraph together with residues for every element of every declared
/// non-trivial slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredHypergraph {
    base: Hypergraph,
    spec: StructureSpec,
    /// `(k, j) -> residues`, indexed by vertex for `j = 1` and by edge id
    /// within the arity otherwise. Only slots with modulus > 1 are stored.
    values: BTreeMap<(usize, usize), Vec<u64>>,
}

fn element_count(base: &Hypergraph, j: usize) -> usize {
    if j == 1 {
        base.vertex_count()
    } else {
        base.edge_count(j)
    }
}

impl StructuredHypergraph {
    /// Wraps a hypergraph with values for each non-trivial slot. Slots with
    /// modulus 1 must not appear in `values`.
    pub fn new(
        base: Hypergraph,
        spec: StructureSpec,
        values: BTreeMap<(usize, usize), Vec<u64>>,
    ) -> Result<Self> {
        for (&(k, j), residues) in &values {
            let modulus = spec.modulus(k, j).ok_or(Error::SlotUnknown { k, j })?;
            if modulus == 1 {
                return Err(Error::SpecMismatch {
                    reason: format!("slot ({k},{j}) is trivial but carries stored values"),
                });
            }
            let expected = element_count(&base, j);
            if residues.len() != expected {
                return Err(Error::SpecMismatch {
                    reason: format!(
                        "slot ({k},{j}) has {} values for {expected} elements",
                        residues.len()
                    ),
                });
            }
            if let Some(&bad) = residues.iter().find(|&&r| r >= modulus) {
                return Err(Error::SpecMismatch {
                    reason: format!("slot ({k},{j}) value {bad} exceeds modulus {modulus}"),
                });
            }
        }
        for (k, j, m) in spec.slots() {
            if m > 1 && !values.contains_key(&(k, j)) && element_count(&base, j) > 0 {
                return Err(Error::SpecMismatch {
                    reason: format!("slot ({k},{j}) is non-trivial but has no values"),
                });
            }
        }
        Ok(StructuredHypergraph { base, spec, values })
    }

    /// A structured view with the empty table.
    pub fn plain(base: Hypergraph) -> Self {
        StructuredHypergraph {
            base,
            spec: StructureSpec::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn base(&self) -> &Hypergraph {
        &self.base
    }

    pub fn spec(&self) -> &StructureSpec {
        &self.spec
    }

    /// The residue of one element at a declared slot.
    pub fn value(&self, k: usize, j: usize, element: usize) -> Result<u64> {
        if self.spec.modulus(k, j).is_none() {
            return Err(Error::SlotUnknown { k, j });
        }
        if element >= element_count(&self.base, j) {
            return Err(Error::SpecMismatch {
                reason: format!("element {element} out of range for arity {j}"),
            });
        }
        Ok(self
            .values
            .get(&(k, j))
            .map(|residues| residues[element])
            .unwrap_or(0))
    }

    /// Number of arity-`j` elements whose slot-`(k, j)` residue equals `a`.
    pub fn count_elements_with_value(&self, k: usize, j: usize, a: u64) -> Result<usize> {
        let modulus = self.spec.modulus(k, j).ok_or(Error::SlotUnknown { k, j })?;
        if a >= modulus {
            return Err(Error::SpecMismatch {
                reason: format!("residue {a} exceeds modulus {modulus} at slot ({k},{j})"),
            });
        }
        let total = element_count(&self.base, j);
        Ok(match self.values.get(&(k, j)) {
            Some(residues) => residues.iter().filter(|&&r| r == a).count(),
            None => {
                if a == 0 {
                    total
                } else {
                    0
                }
            }
        })
    }

    /// Folds the residues of every slot into one color per element. Two
    /// structured hypergraphs over one spec are isomorphic as structured
    /// objects exactly when their colored bases are.
    pub fn color_assignment(&self) -> ColorAssignment {
        let n = self.base.vertex_count();
        let mut vertex_colors = vec![0u64; n];
        for (k, m) in self.spec.nontrivial_for_arity(1) {
            let residues = self.values.get(&(k, 1));
            for (v, color) in vertex_colors.iter_mut().enumerate() {
                let r = residues.map(|res| res[v]).unwrap_or(0);
                *color = *color * m + r;
            }
        }
        let mut edge_colors: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for arity in self.base.arities() {
            let mut colors = vec![0u64; self.base.edge_count(arity)];
            let mut any = false;
            for (k, m) in self.spec.nontrivial_for_arity(arity) {
                any = true;
                let residues = self.values.get(&(k, arity));
                for (e, color) in colors.iter_mut().enumerate() {
                    let r = residues.map(|res| res[e]).unwrap_or(0);
                    *color = *color * m + r;
                }
            }
            if any {
                edge_colors.insert(arity, colors);
            }
        }
        ColorAssignment {
            vertex_colors,
            edge_colors,
        }
    }

    /// Canonical code of the structured hypergraph (spec-relative: compare
    /// codes only across equal specs).
    pub fn canonical_code(&self) -> Result<CanonicalCode> {
        canonical_code(&self.base, Some(&self.color_assignment()))
    }
}

/// Whether `morphism` is structure-preserving between two structured views:
/// a valid base morphism whose element images carry the same residues.
pub fn is_structured_morphism(
    morphism: &HypergraphMorphism,
    source: &StructuredHypergraph,
    target: &StructuredHypergraph,
) -> Result<bool> {
    if source.spec != target.spec {
        return Err(Error::SpecMismatch {
            reason: "structured morphism across different specs".into(),
        });
    }
    if !crate::hypergraph::validate_morphism(morphism)? {
        return Ok(false);
    }
    for (k, j, m) in source.spec.slots() {
        if m == 1 {
            continue;
        }
        if j == 1 {
            for v in 0..source.base.vertex_count() {
                if source.value(k, 1, v)? != target.value(k, 1, morphism.vertex_map[v])? {
                    return Ok(false);
                }
            }
        } else {
            let map = morphism.edge_maps.get(&j);
            for e in 0..source.base.edge_count(j) {
                let image = map.map(|m| m[e]).unwrap_or(e);
                if source.value(k, j, e)? != target.value(k, j, image)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Merges two structured hypergraphs over one spec: disjoint union of the
/// bases, each element keeping the residues of its originating side.
pub fn structured_union(a: &StructuredHypergraph, b: &StructuredHypergraph) -> Result<StructuredHypergraph> {
    if a.spec != b.spec {
        return Err(Error::SpecMismatch {
            reason: "structured union across different specs".into(),
        });
    }
    let base = a.base.disjoint_union(&b.base);
    let mut values: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for (k, j, m) in a.spec.slots() {
        if m == 1 {
            continue;
        }
        let total = element_count(&base, j);
        if total == 0 {
            continue;
        }
        let mut merged = Vec::with_capacity(total);
        let left = a.values.get(&(k, j));
        let right = b.values.get(&(k, j));
        let left_count = element_count(&a.base, j);
        let right_count = element_count(&b.base, j);
        for e in 0..left_count {
            merged.push(left.map(|v| v[e]).unwrap_or(0));
        }
        for e in 0..right_count {
            merged.push(right.map(|v| v[e]).unwrap_or(0));
        }
        values.insert((k, j), merged);
    }
    StructuredHypergraph::new(base, a.spec.clone(), values)
}

/// A vertex labeling and the edge ranks it induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    /// vertex -> label, bijective on `0..n`.
    labels: Vec<usize>,
}

impl Labeling {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        let mut seen = vec![false; n];
        for &l in &labels {
            if l >= n || seen[l] {
                return Err(Error::NotABijection { vertex_count: n });
            }
            seen[l] = true;
        }
        Ok(Labeling { labels })
    }

    pub fn identity(n: usize) -> Self {
        Labeling {
            labels: (0..n).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, vertex: usize) -> usize {
        self.labels[vertex]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// The vertex carrying `label`.
    pub fn vertex_with_label(&self, label: usize) -> usize {
        self.labels
            .iter()
            .position(|&l| l == label)
            .expect("labels are a bijection")
    }

    /// Derived labels for the arity-`j` edges: each edge is ranked by the
    /// sorted label image of its incidence, ties between parallel edges
    /// broken by edge id. Entry `e` is the rank of edge `e`.
    pub fn edge_labels(&self, graph: &Hypergraph, arity: usize) -> Vec<usize> {
        let mut keyed: Vec<(Vec<usize>, usize)> = graph
            .edges(arity)
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let mut image: Vec<usize> = edge.iter().map(|&v| self.labels[v]).collect();
                image.sort_unstable();
                (image, e)
            })
            .collect();
        keyed.sort_unstable();
        let mut ranks = vec![0usize; keyed.len()];
        for (rank, (_, e)) in keyed.into_iter().enumerate() {
            ranks[e] = rank;
        }
        ranks
    }
}

/// A structured hypergraph together with a labeling of its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledHypergraph {
    pub structured: StructuredHypergraph,
    pub labeling: Labeling,
}

impl LabeledHypergraph {
    pub fn new(structured: StructuredHypergraph, labeling: Labeling) -> Result<Self> {
        if labeling.vertex_count() != structured.base().vertex_count() {
            return Err(Error::NotABijection {
                vertex_count: structured.base().vertex_count(),
            });
        }
        Ok(LabeledHypergraph {
            structured,
            labeling,
        })
    }

    /// A plain graph with identity labels and no structure.
    pub fn plain_identity(base: Hypergraph) -> Self {
        let labeling = Labeling::identity(base.vertex_count());
        LabeledHypergraph {
            structured: StructuredHypergraph::plain(base),
            labeling,
        }
    }

    pub fn base(&self) -> &Hypergraph {
        self.structured.base()
    }

    /// Colors carrying both the structure residues and the labels, so equal
    /// codes mean label-and-structure preserving isomorphism.
    pub fn color_assignment(&self) -> ColorAssignment {
        let mut colors = self.structured.color_assignment();
        let n = self.base().vertex_count() as u64;
        for (v, color) in colors.vertex_colors.iter_mut().enumerate() {
            *color = *color * n + self.labeling.label(v) as u64;
        }
        colors
    }

    pub fn canonical_code(&self) -> Result<CanonicalCode> {
        canonical_code(self.base(), Some(&self.color_assignment()))
    }
}

/// The unique candidate isomorphism between labeled hypergraphs: vertices
/// matched by label, arity-`j` edges by derived label. Present only when
/// the candidate is a genuine structure-preserving isomorphism.
pub fn unique_labeled_iso(a: &LabeledHypergraph, b: &LabeledHypergraph) -> Result<Option<HypergraphMorphism>> {
    if a.structured.spec() != b.structured.spec() {
        return Err(Error::SpecMismatch {
            reason: "labeled isomorphism across different specs".into(),
        });
    }
    let (ga, gb) = (a.base(), b.base());
    if ga.vertex_count() != gb.vertex_count() {
        return Ok(None);
    }
    let arities: Vec<usize> = ga.arities().collect();
    if arities != gb.arities().collect::<Vec<_>>() {
        return Ok(None);
    }
    if arities.iter().any(|&j| ga.edge_count(j) != gb.edge_count(j)) {
        return Ok(None);
    }
    let vertex_map: Vec<usize> = (0..ga.vertex_count())
        .map(|v| b.labeling.vertex_with_label(a.labeling.label(v)))
        .collect();
    let mut edge_maps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &j in &arities {
        let a_ranks = a.labeling.edge_labels(ga, j);
        let b_ranks = b.labeling.edge_labels(gb, j);
        let mut b_by_rank = vec![0usize; b_ranks.len()];
        for (e, &rank) in b_ranks.iter().enumerate() {
            b_by_rank[rank] = e;
        }
        edge_maps.insert(j, a_ranks.iter().map(|&rank| b_by_rank[rank]).collect());
    }
    let morphism = HypergraphMorphism {
        source: ga.clone(),
        target: gb.clone(),
        vertex_map,
        edge_maps,
    };
    if is_structured_morphism(&morphism, &a.structured, &b.structured)? {
        Ok(Some(morphism))
    } else {
        Ok(None)
    }
}

/// Disjoint union of labeled hypergraphs: all of `a`'s vertices keep their
/// labels and precede all of `b`'s, whose labels shift up by `a`'s size.
pub fn labeled_union(a: &LabeledHypergraph, b: &LabeledHypergraph) -> Result<LabeledHypergraph> {
    let structured = structured_union(&a.structured, &b.structured)?;
    let na = a.base().vertex_count();
    let mut labels: Vec<usize> = a.labeling.labels().to_vec();
    labels.extend(b.labeling.labels().iter().map(|&l| l + na));
    LabeledHypergraph::new(structured, Labeling::new(labels)?)
}

/// Whether every edge of every arity sees at least two distinct colors.
pub fn validate_coloring(graph: &Hypergraph, colors: &[u64]) -> bool {
    if colors.len() != graph.vertex_count() {
        return false;
    }
    for arity in graph.arities() {
        for edge in graph.edges(arity) {
            let first = colors[edge[0]];
            if edge.iter().all(|&v| colors[v] == first) {
                return false;
            }
        }
    }
    true
}

/// Embeds a proper coloring as a structured hypergraph with one vertex slot
/// of modulus `color_count`.
pub fn coloring_as_structure(
    graph: &Hypergraph,
    colors: &[u64],
    color_count: u64,
) -> Result<StructuredHypergraph> {
    if !validate_coloring(graph, colors) {
        return Err(Error::InvalidColoring {
            reason: "an edge is monochromatic or the color list is short".into(),
        });
    }
    if let Some(&bad) = colors.iter().find(|&&c| c >= color_count) {
        return Err(Error::InvalidColoring {
            reason: format!("color {bad} outside 0..{color_count}"),
        });
    }
    let spec = StructureSpec::new().with_slot(1, 1, color_count.max(1))?;
    let mut values = BTreeMap::new();
    if color_count > 1 && graph.vertex_count() > 0 {
        values.insert((1, 1), colors.to_vec());
    }
    StructuredHypergraph::new(graph.clone(), spec, values)
}

/// Embeds a labeling as a structured hypergraph with one vertex slot of
/// modulus `n`.
pub fn labeling_as_structure(graph: &Hypergraph, labels: Vec<usize>) -> Result<StructuredHypergraph> {
    let labeling = Labeling::new(labels)?;
    if labeling.vertex_count() != graph.vertex_count() {
        return Err(Error::NotABijection {
            vertex_count: graph.vertex_count(),
        });
    }
    let n = graph.vertex_count() as u64;
    let spec = StructureSpec::new().with_slot(1, 1, n.max(1))?;
    let mut values = BTreeMap::new();
    if n > 1 {
        values.insert(
            (1, 1),
            labeling.labels().iter().map(|&l| l as u64).collect(),
        );
    }
    StructuredHypergraph::new(graph.clone(), spec, values)
}

/// External/internal vertex kinds and genera.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeynmanGraphData {
    /// 0 = external, 1 = internal.
    pub kind: Vec<u8>,
    pub genus: Vec<u64>,
}

/// Whether `(graph, data)` is a Feynman graph: only arity-2 edges, external
/// vertices have degree 1 and genus 0, and no edge joins two externals.
/// When these hold, tails biject with external vertices.
pub fn validate_feynman(graph: &Hypergraph, data: &FeynmanGraphData) -> bool {
    let n = graph.vertex_count();
    if data.kind.len() != n || data.genus.len() != n {
        return false;
    }
    if data.kind.iter().any(|&k| k > 1) {
        return false;
    }
    if graph.arities().any(|j| j != 2) {
        return false;
    }
    for v in 0..n {
        if data.kind[v] == 0 && (graph.total_degree(v).unwrap() != 1 || data.genus[v] != 0) {
            return false;
        }
    }
    let mut tails = 0usize;
    for edge in graph.edges(2) {
        let externals = edge.iter().filter(|&&v| data.kind[v] == 0).count();
        if externals == 2 {
            return false;
        }
        tails += externals;
    }
    let external_vertices = data.kind.iter().filter(|&&k| k == 0).count();
    debug_assert_eq!(tails, external_vertices);
    true
}

/// Stability on top of the Feynman conditions: internal genus-0 vertices have
/// degree at least 3 and internal genus-1 vertices are not isolated.
pub fn validate_stable(graph: &Hypergraph, data: &FeynmanGraphData) -> Result<bool> {
    if !validate_feynman(graph, data) {
        return Err(Error::NotFeynman {
            reason: "stability is defined on Feynman graphs only".into(),
        });
    }
    for v in 0..graph.vertex_count() {
        if data.kind[v] == 1 {
            let d = graph.total_degree(v)?;
            if data.genus[v] == 0 && d < 3 {
                return Ok(false);
            }
            if data.genus[v] == 1 && d < 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Darts around vertices with a pairing involution and a rotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RibbonGraphData {
    pub vertex_count: usize,
    /// dart -> vertex.
    pub dart_vertex: Vec<usize>,
    /// Fixed-point-free pairing of darts into edges.
    pub involution: Vec<usize>,
    /// Rotation; its orbits must be the per-vertex dart sets.
    pub sigma: Vec<usize>,
}

fn check_permutation(map: &[usize], len: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; len];
    for &image in map {
        if image >= len || seen[image] {
            return Err(Error::SpecMismatch {
                reason: format!("{what} is not a permutation of the darts"),
            });
        }
        seen[image] = true;
    }
    Ok(())
}

/// Whether the rotation's orbits coincide with the dart fibers over
/// vertices. The involution must pair darts without fixed points.
pub fn validate_ribbon(data: &RibbonGraphData) -> Result<bool> {
    let d = data.dart_vertex.len();
    if data.involution.len() != d || data.sigma.len() != d {
        return Err(Error::SpecMismatch {
            reason: "dart maps must cover every dart exactly once".into(),
        });
    }
    if let Some(&bad) = data.dart_vertex.iter().find(|&&v| v >= data.vertex_count) {
        return Err(Error::SpecMismatch {
            reason: format!("dart attached to missing vertex {bad}"),
        });
    }
    check_permutation(&data.involution, d, "involution")?;
    check_permutation(&data.sigma, d, "rotation")?;
    for dart in 0..d {
        if data.involution[dart] == dart {
            return Err(Error::FixedPointInInvolution { dart });
        }
        if data.involution[data.involution[dart]] != dart {
            return Err(Error::SpecMismatch {
                reason: format!("pairing is not an involution at dart {dart}"),
            });
        }
    }
    // Orbit of sigma through each dart must equal its vertex fiber.
    let mut orbit_of = vec![usize::MAX; d];
    let mut next_orbit = 0usize;
    for start in 0..d {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let mut dart = start;
        loop {
            orbit_of[dart] = next_orbit;
            dart = data.sigma[dart];
            if dart == start {
                break;
            }
        }
        next_orbit += 1;
    }
    for a in 0..d {
        for b in (a + 1)..d {
            let same_orbit = orbit_of[a] == orbit_of[b];
            let same_fiber = data.dart_vertex[a] == data.dart_vertex[b];
            if same_orbit != same_fiber {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Embeds Feynman data as a structured hypergraph: vertex kind at slot
/// `(1, 1)` over modulus 2 and genus at `(2, 1)` over `genus_cap`.
pub fn feynman_as_structure(
    graph: &Hypergraph,
    data: &FeynmanGraphData,
    genus_cap: u64,
) -> Result<StructuredHypergraph> {
    if !validate_feynman(graph, data) {
        return Err(Error::NotFeynman {
            reason: "kind or genus data violates the Feynman conditions".into(),
        });
    }
    for (v, &g) in data.genus.iter().enumerate() {
        if g >= genus_cap {
            return Err(Error::GenusCapExceeded {
                vertex: v,
                genus: g,
                cap: genus_cap,
            });
        }
    }
    let spec = StructureSpec::new()
        .with_slot(1, 1, 2)?
        .with_slot(2, 1, genus_cap.max(1))?;
    let mut values = BTreeMap::new();
    if graph.vertex_count() > 0 {
        values.insert((1, 1), data.kind.iter().map(|&k| k as u64).collect());
        if genus_cap > 1 {
            values.insert((2, 1), data.genus.clone());
        }
    }
    StructuredHypergraph::new(graph.clone(), spec, values)
}
