//! Decomposition systems and rule evaluation.
//!
//! A decomposition system sorts the vertices and edges of a hypergraph into
//! an external class 0 and internal classes 1..=order. A rule assigns each
//! element a degree and a graded tensor factor; evaluation tensors the
//! factors in label order, class by class. The word is independent of vertex
//! numbering (only labels matter), which is what the naturality and
//! monoidality checks below exercise.

use std::collections::BTreeMap;

use crate::canon::canonical_form;
use crate::error::{Error, Result};
use crate::hypergraph::{
    is_bijective_morphism, validate_morphism, Hypergraph, HypergraphMorphism,
};
use crate::structures::{
    is_structured_morphism, labeled_union, LabeledHypergraph, Labeling, StructuredHypergraph,
};
use crate::symcontext::{
    symmetric_iso, tensor, AnalyticExpression, FactorKind, FactorSymbol, Parameter,
    ParameterGrade, TensorFactor, Variance,
};

/// Assignment of every vertex and edge to a class in `{0, ..., order}`.
/// Class 0 is external; positive classes are internal types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionSystem {
    pub order: usize,
    /// Class of each vertex.
    pub vertex_class: Vec<usize>,
    /// Class of each edge, per arity, indexed by edge id.
    pub edge_class: BTreeMap<usize, Vec<usize>>,
}

impl DecompositionSystem {
    /// Checks the assignment is total on `graph` and classes are in range.
    pub fn validate(&self, graph: &Hypergraph) -> Result<()> {
        if self.vertex_class.len() != graph.vertex_count() {
            return Err(Error::SpecMismatch {
                reason: format!(
                    "decomposition classifies {} of {} vertices",
                    self.vertex_class.len(),
                    graph.vertex_count()
                ),
            });
        }
        for arity in graph.arities() {
            let count = graph.edge_count(arity);
            match self.edge_class.get(&arity) {
                Some(classes) if classes.len() == count => {}
                _ => {
                    return Err(Error::SpecMismatch {
                        reason: format!("decomposition misses arity-{arity} edges"),
                    });
                }
            }
        }
        for (&arity, classes) in &self.edge_class {
            if classes.len() != graph.edge_count(arity) {
                return Err(Error::SpecMismatch {
                    reason: format!("decomposition classifies absent arity-{arity} edges"),
                });
            }
        }
        let worst_vertex = self.vertex_class.iter().max().copied().unwrap_or(0);
        let worst_edge = self
            .edge_class
            .values()
            .flatten()
            .max()
            .copied()
            .unwrap_or(0);
        if worst_vertex > self.order || worst_edge > self.order {
            return Err(Error::SpecMismatch {
                reason: format!(
                    "class {} exceeds order {}",
                    worst_vertex.max(worst_edge),
                    self.order
                ),
            });
        }
        Ok(())
    }

    fn edge_class_of(&self, arity: usize, edge: usize) -> usize {
        self.edge_class.get(&arity).map_or(0, |c| c[edge])
    }

    fn external_vertex_count(&self) -> usize {
        self.vertex_class.iter().filter(|&&c| c == 0).count()
    }
}

/// Everything external: all vertices and edges in class 0.
pub fn trivial_decomposition(graph: &Hypergraph, order: usize) -> DecompositionSystem {
    DecompositionSystem {
        order,
        vertex_class: vec![0; graph.vertex_count()],
        edge_class: graph
            .arities()
            .map(|j| (j, vec![0; graph.edge_count(j)]))
            .collect(),
    }
}

/// Everything internal of type 1; empty external class. Always normal and
/// (vacuously) standard.
pub fn all_internal_decomposition(graph: &Hypergraph) -> DecompositionSystem {
    DecompositionSystem {
        order: 2,
        vertex_class: vec![1; graph.vertex_count()],
        edge_class: graph
            .arities()
            .map(|j| (j, vec![1; graph.edge_count(j)]))
            .collect(),
    }
}

/// The order-2 system read off the structure values: a vertex is external
/// when it carries only zeros, sits on exactly one 2-edge and nothing else,
/// and that edge does not join it to another such vertex; its unique edge is
/// external too. Everything else is internal of type 1.
pub fn structured_decomposition(s: &StructuredHypergraph) -> Result<DecompositionSystem> {
    let graph = s.base();
    let n = graph.vertex_count();
    let mut candidate = vec![false; n];
    for v in 0..n {
        let lonely = graph.degree(v, 2)? == 1
            && graph
                .arities()
                .filter(|&j| j != 2)
                .map(|j| graph.degree(v, j).unwrap_or(0))
                .sum::<usize>()
                == 0;
        let unstructured = s
            .spec()
            .slots()
            .filter(|&(_, j, m)| j == 1 && m > 1)
            .all(|(k, _, _)| s.value(k, 1, v).unwrap_or(0) == 0);
        candidate[v] = lonely && unstructured;
    }
    // A candidate whose edge reaches another candidate is disqualified; both
    // endpoints drop out together.
    let mut external = candidate.clone();
    for arity in graph.arities() {
        for edge in graph.edges(arity) {
            let candidates = edge.iter().filter(|&&v| candidate[v]).count();
            if candidates > 1 {
                for &v in edge {
                    external[v] = false;
                }
            }
        }
    }
    let vertex_class: Vec<usize> = external.iter().map(|&ext| usize::from(!ext)).collect();
    let edge_class = graph
        .arities()
        .map(|j| {
            let classes = graph
                .edges(j)
                .iter()
                .map(|edge| usize::from(!edge.iter().any(|&v| external[v])))
                .collect();
            (j, classes)
        })
        .collect();
    Ok(DecompositionSystem {
        order: 2,
        vertex_class,
        edge_class,
    })
}

/// True when the external counts balance (|V⁰| equals the number of external
/// edges) and every external edge touches an external vertex.
pub fn is_standard(graph: &Hypergraph, d: &DecompositionSystem) -> bool {
    let external_edges: usize = graph
        .arities()
        .map(|j| {
            graph
                .edges(j)
                .iter()
                .enumerate()
                .filter(|&(e, _)| d.edge_class_of(j, e) == 0)
                .count()
        })
        .sum();
    if d.external_vertex_count() != external_edges {
        return false;
    }
    graph.arities().all(|j| {
        graph
            .edges(j)
            .iter()
            .enumerate()
            .filter(|&(e, _)| d.edge_class_of(j, e) == 0)
            .all(|(_, edge)| edge.iter().any(|&v| d.vertex_class[v] == 0))
    })
}

/// True when every external class has at most one element.
pub fn is_normal(graph: &Hypergraph, d: &DecompositionSystem) -> bool {
    if d.external_vertex_count() > 1 {
        return false;
    }
    graph.arities().all(|j| {
        graph
            .edges(j)
            .iter()
            .enumerate()
            .filter(|&(e, _)| d.edge_class_of(j, e) == 0)
            .count()
            <= 1
    })
}

/// Deletes the external class. Internal elements keep their classes; an
/// internal edge that loses an endpoint cannot survive and is dropped too
/// (the systems built here never produce one). Idempotent, and the result
/// is normal with empty class 0.
pub fn normalize(graph: &Hypergraph, d: &DecompositionSystem) -> Result<(Hypergraph, DecompositionSystem)> {
    d.validate(graph)?;
    let mut new_id = vec![usize::MAX; graph.vertex_count()];
    let mut kept = 0usize;
    for v in 0..graph.vertex_count() {
        if d.vertex_class[v] > 0 {
            new_id[v] = kept;
            kept += 1;
        }
    }
    let mut edges_by_arity: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut edge_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for arity in graph.arities() {
        for (e, edge) in graph.edges(arity).iter().enumerate() {
            let class = d.edge_class_of(arity, e);
            if class == 0 || edge.iter().any(|&v| new_id[v] == usize::MAX) {
                continue;
            }
            edges_by_arity
                .entry(arity)
                .or_default()
                .push(edge.iter().map(|&v| new_id[v]).collect());
            edge_class.entry(arity).or_default().push(class);
        }
    }
    let result = crate::hypergraph::build_hypergraph(kept, edges_by_arity)?;
    let vertex_class = (0..graph.vertex_count())
        .filter(|&v| d.vertex_class[v] > 0)
        .map(|v| d.vertex_class[v])
        .collect();
    Ok((
        result,
        DecompositionSystem {
            order: d.order,
            vertex_class,
            edge_class,
        },
    ))
}

/// A uniform way to assign a decomposition system to any structured
/// hypergraph, so families of graphs (decks, enumerated classes) get
/// compatible systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemChoice {
    Trivial { order: usize },
    AllInternal,
    Structured,
}

impl SystemChoice {
    pub fn assign(&self, s: &StructuredHypergraph) -> Result<DecompositionSystem> {
        match self {
            SystemChoice::Trivial { order } => Ok(trivial_decomposition(s.base(), *order)),
            SystemChoice::AllInternal => Ok(all_internal_decomposition(s.base())),
            SystemChoice::Structured => structured_decomposition(s),
        }
    }
}

/// How element degrees are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeMode {
    /// External elements weigh 0 (vertices) or 1 (edges); internal vertices
    /// weigh their full degree, internal arity-j edges weigh j.
    Classic,
    /// External elements all weigh 1; internal vertices weigh their degree
    /// in the graph left after deleting the external vertices; internal
    /// edges weigh their arity.
    Standard,
    /// Explicit per-class tables; must cover every occurring class.
    Custom {
        vertex: BTreeMap<usize, u64>,
        edge: BTreeMap<(usize, usize), u64>,
    },
}

/// Degrees resolved per element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeTables {
    pub vertex: Vec<u64>,
    pub edge: BTreeMap<usize, Vec<u64>>,
}

pub fn classic_degrees(graph: &Hypergraph, d: &DecompositionSystem) -> Result<DegreeTables> {
    let vertex = (0..graph.vertex_count())
        .map(|v| {
            if d.vertex_class[v] == 0 {
                Ok(0)
            } else {
                graph.total_degree(v).map(|deg| deg as u64)
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    let edge = graph
        .arities()
        .map(|j| {
            let degrees = (0..graph.edge_count(j))
                .map(|e| if d.edge_class_of(j, e) == 0 { 1 } else { j as u64 })
                .collect();
            (j, degrees)
        })
        .collect();
    Ok(DegreeTables { vertex, edge })
}

pub fn standard_degrees(graph: &Hypergraph, d: &DecompositionSystem) -> Result<DegreeTables> {
    // Internal degree: incident edges that survive deleting class-0 vertices.
    let mut internal = vec![0u64; graph.vertex_count()];
    for arity in graph.arities() {
        for edge in graph.edges(arity) {
            if edge.iter().all(|&v| d.vertex_class[v] > 0) {
                for &v in edge {
                    internal[v] += 1;
                }
            }
        }
    }
    let vertex = (0..graph.vertex_count())
        .map(|v| if d.vertex_class[v] == 0 { 1 } else { internal[v] })
        .collect();
    let edge = graph
        .arities()
        .map(|j| {
            let degrees = (0..graph.edge_count(j))
                .map(|e| if d.edge_class_of(j, e) == 0 { 1 } else { j as u64 })
                .collect();
            (j, degrees)
        })
        .collect();
    Ok(DegreeTables { vertex, edge })
}

pub fn degree_tables(
    graph: &Hypergraph,
    d: &DecompositionSystem,
    mode: &DegreeMode,
) -> Result<DegreeTables> {
    match mode {
        DegreeMode::Classic => classic_degrees(graph, d),
        DegreeMode::Standard => standard_degrees(graph, d),
        DegreeMode::Custom { vertex, edge } => {
            let vertex_degrees = d
                .vertex_class
                .iter()
                .map(|class| {
                    vertex.get(class).copied().ok_or_else(|| Error::SpecMismatch {
                        reason: format!("no custom vertex degree for class {class}"),
                    })
                })
                .collect::<Result<Vec<u64>>>()?;
            let mut edge_degrees = BTreeMap::new();
            for arity in graph.arities() {
                let degrees = (0..graph.edge_count(arity))
                    .map(|e| {
                        let class = d.edge_class_of(arity, e);
                        edge.get(&(class, arity)).copied().ok_or_else(|| {
                            Error::SpecMismatch {
                                reason: format!(
                                    "no custom edge degree for class {class}, arity {arity}"
                                ),
                            }
                        })
                    })
                    .collect::<Result<Vec<u64>>>()?;
                edge_degrees.insert(arity, degrees);
            }
            Ok(DegreeTables {
                vertex: vertex_degrees,
                edge: edge_degrees,
            })
        }
    }
}

/// Total edge weight and total vertex weight; equality is the coherence
/// condition and equals the balanced rank of the evaluated word.
pub fn coherence_sums(tables: &DegreeTables) -> (u64, u64) {
    let edge_side = tables.edge.values().flatten().sum();
    let vertex_side = tables.vertex.iter().sum();
    (edge_side, vertex_side)
}

pub fn check_coherence(
    graph: &Hypergraph,
    d: &DecompositionSystem,
    tables: &DegreeTables,
) -> bool {
    debug_assert!(d.validate(graph).is_ok());
    debug_assert_eq!(tables.vertex.len(), graph.vertex_count());
    let (edge_side, vertex_side) = coherence_sums(tables);
    edge_side == vertex_side
}

/// Whether factor symbols keep the defining data (class, arity, degree,
/// structure residues) or deliberately forget the residues, producing a
/// weaker rule that no longer separates structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolMode {
    InjectiveByData,
    Forgetful,
}

/// Which formal parameters grade the factors: the full grading (arity,
/// class, structure values) or only arity and class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradingMode {
    Full,
    TypeArity,
}

/// What to do when no labeling is supplied: synthesize one from the
/// canonical vertex order, or refuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelPolicy {
    AutoCanonical,
    Required,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeynmanRule {
    pub degrees: DegreeMode,
    pub symbols: SymbolMode,
    pub grading: GradingMode,
    pub labels: LabelPolicy,
}

impl FeynmanRule {
    pub fn classic() -> Self {
        FeynmanRule {
            degrees: DegreeMode::Classic,
            symbols: SymbolMode::InjectiveByData,
            grading: GradingMode::Full,
            labels: LabelPolicy::AutoCanonical,
        }
    }

    /// Standard degrees, full symbols and grading.
    pub fn physics() -> Self {
        FeynmanRule {
            degrees: DegreeMode::Standard,
            ..FeynmanRule::classic()
        }
    }

    /// Collapses structure data from both symbols and grades; demonstrates a
    /// rule that fails to separate structured elements.
    pub fn forgetful() -> Self {
        FeynmanRule {
            symbols: SymbolMode::Forgetful,
            grading: GradingMode::TypeArity,
            ..FeynmanRule::classic()
        }
    }
}

fn vertex_factor(
    s: &StructuredHypergraph,
    d: &DecompositionSystem,
    tables: &DegreeTables,
    rule: &FeynmanRule,
    v: usize,
) -> Result<TensorFactor> {
    let class = d.vertex_class[v];
    let mut residues = Vec::new();
    let mut grade = ParameterGrade::trivial()
        .with(Parameter::O, class as u64)
        .with(Parameter::T, 1);
    for (k, _, _) in s.spec().slots().filter(|&(_, j, m)| j == 1 && m > 1) {
        let value = s.value(k, 1, v)?;
        if rule.symbols == SymbolMode::InjectiveByData {
            residues.push((k, value));
        }
        if rule.grading == GradingMode::Full {
            grade = grade.with(Parameter::H { k, j: 1 }, value);
        }
    }
    Ok(TensorFactor {
        symbol: FactorSymbol {
            kind: FactorKind::Vertex,
            class_index: class,
            arity: 1,
            degree: tables.vertex[v],
            residues,
        },
        variance: Variance::Dual,
        rank: tables.vertex[v],
        grade,
    })
}

fn edge_factor(
    s: &StructuredHypergraph,
    d: &DecompositionSystem,
    tables: &DegreeTables,
    rule: &FeynmanRule,
    arity: usize,
    e: usize,
) -> Result<TensorFactor> {
    let class = d.edge_class_of(arity, e);
    let mut residues = Vec::new();
    if rule.symbols == SymbolMode::InjectiveByData {
        for (k, _, _) in s.spec().slots().filter(|&(_, j, m)| j == arity && m > 1) {
            residues.push((k, s.value(k, arity, e)?));
        }
    }
    let degree = tables.edge[&arity][e];
    Ok(TensorFactor {
        symbol: FactorSymbol {
            kind: FactorKind::Edge,
            class_index: class,
            arity,
            degree,
            residues,
        },
        variance: Variance::Primal,
        rank: degree,
        grade: ParameterGrade::trivial()
            .with(Parameter::O, class as u64)
            .with(Parameter::T, arity as u64),
    })
}

/// A labeling induced by the canonical vertex order, so isomorphic inputs
/// get matching labels.
pub fn auto_labeling(s: &StructuredHypergraph) -> Result<Labeling> {
    let form = canonical_form(s.base(), Some(&s.color_assignment()))?;
    let mut labels = vec![0usize; s.base().vertex_count()];
    for (position, &v) in form.vertex_order.iter().enumerate() {
        labels[v] = position;
    }
    Labeling::new(labels)
}

/// Evaluates the rule on a decomposed structured hypergraph: one dual factor
/// per vertex and one primal factor per edge, tensored class by class (all
/// vertex blocks first, then all edge blocks), each block in label order.
/// Degree-0 elements contribute the unit and vanish from the word.
pub fn evaluate(
    s: &StructuredHypergraph,
    labeling: Option<&Labeling>,
    d: &DecompositionSystem,
    rule: &FeynmanRule,
) -> Result<AnalyticExpression> {
    let graph = s.base();
    d.validate(graph)?;
    let tables = degree_tables(graph, d, &rule.degrees)?;
    let (edge_side, vertex_side) = coherence_sums(&tables);
    if edge_side != vertex_side {
        return Err(Error::IncoherentRule {
            edge_side,
            vertex_side,
        });
    }
    let synthesized;
    let labeling = match (labeling, rule.labels) {
        (Some(l), _) => l,
        (None, LabelPolicy::AutoCanonical) => {
            synthesized = auto_labeling(s)?;
            &synthesized
        }
        (None, LabelPolicy::Required) => return Err(Error::MissingLabeling),
    };
    if labeling.vertex_count() != graph.vertex_count() {
        return Err(Error::NotABijection {
            vertex_count: graph.vertex_count(),
        });
    }

    let mut factors = Vec::new();
    for class in 0..=d.order {
        let mut block: Vec<usize> = (0..graph.vertex_count())
            .filter(|&v| d.vertex_class[v] == class)
            .collect();
        block.sort_by_key(|&v| labeling.label(v));
        for v in block {
            factors.push(vertex_factor(s, d, &tables, rule, v)?);
        }
    }
    for class in 0..=d.order {
        for arity in graph.arities().collect::<Vec<_>>() {
            let ranks = labeling.edge_labels(graph, arity);
            let mut block: Vec<usize> = (0..graph.edge_count(arity))
                .filter(|&e| d.edge_class_of(arity, e) == class)
                .collect();
            block.sort_by_key(|&e| ranks[e]);
            for e in block {
                factors.push(edge_factor(s, d, &tables, rule, arity, e)?);
            }
        }
    }
    Ok(AnalyticExpression::from_factors(factors))
}

/// Classes on a disjoint union, computed componentwise: left elements keep
/// their classes, right elements theirs; union edge ids list left edges
/// first, matching `disjoint_union`.
pub fn union_decomposition(
    left: &Hypergraph,
    dl: &DecompositionSystem,
    right: &Hypergraph,
    dr: &DecompositionSystem,
) -> DecompositionSystem {
    let mut vertex_class = dl.vertex_class.clone();
    vertex_class.extend(dr.vertex_class.iter().copied());
    let mut edge_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for arity in left.arities().chain(right.arities()) {
        edge_class.entry(arity).or_default();
    }
    for (arity, classes) in &mut edge_class {
        if let Some(l) = dl.edge_class.get(arity) {
            classes.extend(l.iter().copied());
        }
        if let Some(r) = dr.edge_class.get(arity) {
            classes.extend(r.iter().copied());
        }
    }
    DecompositionSystem {
        order: dl.order.max(dr.order),
        vertex_class,
        edge_class,
    }
}

/// Compares the evaluation of a labeled union against the tensor of the
/// parts. Returns the permutation carrying the union word onto the tensor
/// word, or `None` if the factor multisets disagree (they never do).
pub fn check_monoidality(
    a: &LabeledHypergraph,
    da: &DecompositionSystem,
    b: &LabeledHypergraph,
    db: &DecompositionSystem,
    rule: &FeynmanRule,
) -> Result<Option<Vec<usize>>> {
    let union = labeled_union(a, b)?;
    let du = union_decomposition(a.base(), da, b.base(), db);
    let zu = evaluate(&union.structured, Some(&union.labeling), &du, rule)?;
    let za = evaluate(&a.structured, Some(&a.labeling), da, rule)?;
    let zb = evaluate(&b.structured, Some(&b.labeling), db, rule)?;
    Ok(symmetric_iso(&zu, &tensor(&za, &zb)))
}

/// Tests the reflection property on one morphism: if the induced maps
/// between corresponding blocks are factor-preserving bijections (the
/// evaluated image is invertible), the morphism itself must be an
/// isomorphism. Blocks are compared element by element, units included.
pub fn check_iso_reflection(
    source: &StructuredHypergraph,
    target: &StructuredHypergraph,
    f: &HypergraphMorphism,
    d_src: &DecompositionSystem,
    d_tgt: &DecompositionSystem,
    rule: &FeynmanRule,
) -> Result<bool> {
    if f.source != *source.base() || f.target != *target.base() {
        return Err(Error::SpecMismatch {
            reason: "morphism endpoints do not match the given hypergraphs".into(),
        });
    }
    if !validate_morphism(f)? {
        return Err(Error::SpecMismatch {
            reason: "not a morphism: incidence does not commute".into(),
        });
    }
    d_src.validate(source.base())?;
    d_tgt.validate(target.base())?;
    let src_tables = degree_tables(source.base(), d_src, &rule.degrees)?;
    let tgt_tables = degree_tables(target.base(), d_tgt, &rule.degrees)?;

    let invertible = (|| -> Result<bool> {
        // Vertex blocks: images must stay in the block, preserve the factor,
        // and exhaust the target block without repeats.
        for class in 0..=d_src.order.max(d_tgt.order) {
            let mut hit = vec![false; target.base().vertex_count()];
            let mut mapped = 0usize;
            for v in 0..source.base().vertex_count() {
                if d_src.vertex_class[v] != class {
                    continue;
                }
                let image = f.vertex_map[v];
                if d_tgt.vertex_class[image] != class || hit[image] {
                    return Ok(false);
                }
                let fv = vertex_factor(source, d_src, &src_tables, rule, v)?;
                let fi = vertex_factor(target, d_tgt, &tgt_tables, rule, image)?;
                if fv != fi {
                    return Ok(false);
                }
                hit[image] = true;
                mapped += 1;
            }
            let target_block = d_tgt.vertex_class.iter().filter(|&&c| c == class).count();
            if mapped != target_block {
                return Ok(false);
            }
        }
        let arities: std::collections::BTreeSet<usize> = source
            .base()
            .arities()
            .chain(target.base().arities())
            .collect();
        for &arity in &arities {
            for class in 0..=d_src.order.max(d_tgt.order) {
                let mut hit = vec![false; target.base().edge_count(arity)];
                let mut mapped = 0usize;
                for e in 0..source.base().edge_count(arity) {
                    if d_src.edge_class_of(arity, e) != class {
                        continue;
                    }
                    let image = f.edge_maps.get(&arity).map_or(usize::MAX, |m| m[e]);
                    if image >= hit.len()
                        || d_tgt.edge_class_of(arity, image) != class
                        || hit[image]
                    {
                        return Ok(false);
                    }
                    let fe = edge_factor(source, d_src, &src_tables, rule, arity, e)?;
                    let fi = edge_factor(target, d_tgt, &tgt_tables, rule, arity, image)?;
                    if fe != fi {
                        return Ok(false);
                    }
                    hit[image] = true;
                    mapped += 1;
                }
                let target_block = (0..target.base().edge_count(arity))
                    .filter(|&e| d_tgt.edge_class_of(arity, e) == class)
                    .count();
                if mapped != target_block {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })()?;

    if !invertible {
        return Ok(true);
    }
    Ok(is_bijective_morphism(f) && is_structured_morphism(f, source, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{FeynmanGraphData, StructureSpec, feynman_as_structure};
    use crate::symcontext::{apply_permutation, normal_form, order_of, HBAR};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    /// Three leaves 0..2, center 3, one 2-edge from each leaf to the center;
    /// the center carries the only nonzero structure value.
    fn star() -> StructuredHypergraph {
        let base = Hypergraph::graph(4, &[(0, 3), (1, 3), (2, 3)]).unwrap();
        let spec = StructureSpec::new().with_slot(1, 1, 2).unwrap();
        StructuredHypergraph::new(
            base,
            spec,
            BTreeMap::from([((1, 1), vec![0, 0, 0, 1])]),
        )
        .unwrap()
    }

    /// The same shape with vertex kinds and genera attached: leaves external,
    /// center internal, everything genus 0.
    fn star_feynman() -> StructuredHypergraph {
        let base = Hypergraph::graph(4, &[(0, 3), (1, 3), (2, 3)]).unwrap();
        let data = FeynmanGraphData {
            kind: vec![0, 0, 0, 1],
            genus: vec![0, 0, 0, 0],
        };
        feynman_as_structure(&base, &data, 8).unwrap()
    }

    fn star_system() -> DecompositionSystem {
        DecompositionSystem {
            order: 2,
            vertex_class: vec![0, 0, 0, 1],
            edge_class: BTreeMap::from([(2, vec![0, 0, 0])]),
        }
    }

    /// Two internal trivalent vertices 0, 1 joined by a double edge, with a
    /// tail hanging off each: edges sort as {0,1},{0,1},{0,2},{1,3}.
    fn double_edge() -> (StructuredHypergraph, DecompositionSystem) {
        let base =
            Hypergraph::graph(4, &[(0, 1), (0, 1), (0, 2), (1, 3)]).unwrap();
        let data = FeynmanGraphData {
            kind: vec![1, 1, 0, 0],
            genus: vec![0, 0, 0, 0],
        };
        let s = feynman_as_structure(&base, &data, 8).unwrap();
        let d = DecompositionSystem {
            order: 2,
            vertex_class: vec![1, 1, 0, 0],
            edge_class: BTreeMap::from([(2, vec![1, 1, 0, 0])]),
        };
        (s, d)
    }

    #[test]
    fn trivial_and_all_internal_systems() {
        let k3 = Hypergraph::graph(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let trivial = trivial_decomposition(&k3, 2);
        trivial.validate(&k3).unwrap();
        assert!(trivial.vertex_class.iter().all(|&c| c == 0));
        assert!(trivial.edge_class[&2].iter().all(|&c| c == 0));
        assert!(!is_normal(&k3, &trivial));

        let empty = Hypergraph::edgeless(0);
        let d = trivial_decomposition(&empty, 0);
        d.validate(&empty).unwrap();
        assert!(is_normal(&empty, &d));

        let internal = all_internal_decomposition(&k3);
        internal.validate(&k3).unwrap();
        assert!(is_normal(&k3, &internal));
        assert!(is_standard(&k3, &internal));
    }

    #[test]
    fn structured_system_sorts_leaves_out() {
        let d = structured_decomposition(&star()).unwrap();
        assert_eq!(d.vertex_class, vec![0, 0, 0, 1]);
        assert_eq!(d.edge_class[&2], vec![0, 0, 0]);
        assert!(is_standard(star().base(), &d));

        // Two bare vertices joined by an edge: each is the other's candidate
        // neighbor, so both stay internal.
        let k2 = StructuredHypergraph::plain(Hypergraph::graph(2, &[(0, 1)]).unwrap());
        let d = structured_decomposition(&k2).unwrap();
        assert_eq!(d.vertex_class, vec![1, 1]);
        assert_eq!(d.edge_class[&2], vec![1]);

        // Nonzero structure everywhere leaves the external class empty.
        let spec = StructureSpec::new().with_slot(1, 1, 2).unwrap();
        let charged = StructuredHypergraph::new(
            Hypergraph::graph(2, &[(0, 1)]).unwrap(),
            spec,
            BTreeMap::from([((1, 1), vec![1, 1])]),
        )
        .unwrap();
        let d = structured_decomposition(&charged).unwrap();
        assert_eq!(d.vertex_class, vec![1, 1]);
    }

    #[test]
    fn standardness_and_normality() {
        let s = star();
        let d = structured_decomposition(&s).unwrap();
        assert!(is_standard(s.base(), &d));
        assert!(!is_normal(s.base(), &d));

        // One external vertex but no external edge breaks the balance.
        let k1 = Hypergraph::edgeless(1);
        let lopsided = DecompositionSystem {
            order: 1,
            vertex_class: vec![0],
            edge_class: BTreeMap::new(),
        };
        assert!(!is_standard(&k1, &lopsided));
        assert!(is_normal(&k1, &lopsided));

        // A single external vertex with a single tail is normal.
        let k2 = Hypergraph::graph(2, &[(0, 1)]).unwrap();
        let tail = DecompositionSystem {
            order: 1,
            vertex_class: vec![0, 1],
            edge_class: BTreeMap::from([(2, vec![0])]),
        };
        assert!(is_normal(&k2, &tail));
        assert!(is_standard(&k2, &tail));
    }

    #[test]
    fn normalization_deletes_the_external_class() {
        let s = star();
        let d = structured_decomposition(&s).unwrap();
        let (core, nd) = normalize(s.base(), &d).unwrap();
        assert_eq!(core.vertex_count(), 1);
        assert!(core.is_edgeless());
        assert!(is_normal(&core, &nd));
        assert_eq!(nd.vertex_class, vec![1]);

        let again = normalize(&core, &nd).unwrap();
        assert_eq!(again.0, core);
        assert_eq!(again.1, nd);

        let k3 = Hypergraph::graph(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let internal = all_internal_decomposition(&k3);
        let (same, samed) = normalize(&k3, &internal).unwrap();
        assert_eq!(same, k3);
        assert_eq!(samed, internal);
    }

    #[test]
    fn classic_degrees_match_hand_counts() {
        let s = star();
        let d = structured_decomposition(&s).unwrap();
        let tables = classic_degrees(s.base(), &d).unwrap();
        assert_eq!(tables.vertex, vec![0, 0, 0, 3]);
        assert_eq!(tables.edge[&2], vec![1, 1, 1]);

        let (dbl, dd) = double_edge();
        let tables = classic_degrees(dbl.base(), &dd).unwrap();
        assert_eq!(tables.vertex, vec![3, 3, 0, 0]);
        assert_eq!(tables.edge[&2], vec![2, 2, 1, 1]);

        let lonely = Hypergraph::edgeless(1);
        let tables =
            classic_degrees(&lonely, &all_internal_decomposition(&lonely)).unwrap();
        assert_eq!(tables.vertex, vec![0]);
    }

    #[test]
    fn coherence_on_worked_cases() {
        let s = star();
        let d = structured_decomposition(&s).unwrap();
        let classic = classic_degrees(s.base(), &d).unwrap();
        assert_eq!(coherence_sums(&classic), (3, 3));
        assert!(check_coherence(s.base(), &d, &classic));

        let standard = standard_degrees(s.base(), &d).unwrap();
        assert_eq!(coherence_sums(&standard), (3, 3));

        let (dbl, dd) = double_edge();
        let tables = classic_degrees(dbl.base(), &dd).unwrap();
        assert_eq!(coherence_sums(&tables), (6, 6));

        let skewed = degree_tables(
            dbl.base(),
            &dd,
            &DegreeMode::Custom {
                vertex: BTreeMap::from([(0, 0), (1, 4)]),
                edge: BTreeMap::from([((0, 2), 1), ((1, 2), 2)]),
            },
        )
        .unwrap();
        assert!(!check_coherence(dbl.base(), &dd, &skewed));
    }

    #[test]
    fn evaluation_of_the_star() {
        let s = star_feynman();
        let d = star_system();
        let labeling = Labeling::identity(4);
        let word = evaluate(&s, Some(&labeling), &d, &FeynmanRule::classic()).unwrap();
        assert_eq!(word.factors().len(), 4);
        assert_eq!(order_of(&word), Some(3));

        let center = &word.factors()[0];
        assert_eq!(center.variance, Variance::Dual);
        assert_eq!(center.rank, 3);
        assert_eq!(center.symbol.kind, FactorKind::Vertex);
        assert_eq!(center.symbol.class_index, 1);
        assert_eq!(center.symbol.residues, vec![(1, 1), (2, 0)]);
        assert_eq!(center.grade.exponent(Parameter::O), 1);
        assert_eq!(center.grade.exponent(Parameter::T), 1);
        assert_eq!(center.grade.exponent(HBAR), 0);

        for tail in &word.factors()[1..] {
            assert_eq!(tail.variance, Variance::Primal);
            assert_eq!(tail.rank, 1);
            assert_eq!(tail.symbol.class_index, 0);
            assert_eq!(tail.grade.exponent(Parameter::T), 2);
            assert_eq!(tail.grade.exponent(Parameter::O), 0);
        }

        let empty = StructuredHypergraph::plain(Hypergraph::edgeless(0));
        let unit = evaluate(
            &empty,
            Some(&Labeling::identity(0)),
            &trivial_decomposition(empty.base(), 0),
            &FeynmanRule::classic(),
        )
        .unwrap();
        assert!(unit.is_unit());
    }

    #[test]
    fn evaluation_of_the_double_edge() {
        let (s, d) = double_edge();
        let word = evaluate(
            &s,
            Some(&Labeling::identity(4)),
            &d,
            &FeynmanRule::classic(),
        )
        .unwrap();
        assert_eq!(order_of(&word), Some(6));
        let duals: Vec<u64> = word
            .factors()
            .iter()
            .filter(|f| f.variance == Variance::Dual)
            .map(|f| f.rank)
            .collect();
        assert_eq!(duals, vec![3, 3]);
        let primals: Vec<u64> = word
            .factors()
            .iter()
            .filter(|f| f.variance == Variance::Primal)
            .map(|f| f.rank)
            .collect();
        assert_eq!(primals, vec![1, 1, 2, 2]);
        assert_eq!(word.total_grade().exponent(HBAR), 0);
    }

    #[test]
    fn evaluation_requires_coherence_and_labels() {
        let (s, d) = double_edge();
        let rule = FeynmanRule {
            degrees: DegreeMode::Custom {
                vertex: BTreeMap::from([(0, 0), (1, 4)]),
                edge: BTreeMap::from([((0, 2), 1), ((1, 2), 2)]),
            },
            ..FeynmanRule::classic()
        };
        let err = evaluate(&s, Some(&Labeling::identity(4)), &d, &rule).unwrap_err();
        assert!(matches!(
            err,
            Error::IncoherentRule {
                edge_side: 6,
                vertex_side: 8
            }
        ));

        let rule = FeynmanRule {
            labels: LabelPolicy::Required,
            ..FeynmanRule::classic()
        };
        let err = evaluate(&s, None, &d, &rule).unwrap_err();
        assert!(matches!(err, Error::MissingLabeling));

        let auto = evaluate(&s, None, &d, &FeynmanRule::classic()).unwrap();
        let explicit = evaluate(
            &s,
            Some(&auto_labeling(&s).unwrap()),
            &d,
            &FeynmanRule::classic(),
        )
        .unwrap();
        assert_eq!(auto, explicit);
    }

    /// Relabels vertices by `perm` (vertex v becomes perm[v]), carrying the
    /// structure values and the decomposition along.
    fn permute_structured(
        s: &StructuredHypergraph,
        d: &DecompositionSystem,
        perm: &[usize],
    ) -> (StructuredHypergraph, DecompositionSystem, Labeling) {
        let base = s.base();
        let n = base.vertex_count();
        let mut edges_by_arity: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        let mut order_by_arity: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for arity in base.arities() {
            let mut tagged: Vec<(Vec<usize>, usize)> = base
                .edges(arity)
                .iter()
                .enumerate()
                .map(|(e, edge)| {
                    let mut mapped: Vec<usize> = edge.iter().map(|&v| perm[v]).collect();
                    mapped.sort_unstable();
                    (mapped, e)
                })
                .collect();
            tagged.sort();
            order_by_arity.insert(arity, tagged.iter().map(|&(_, e)| e).collect());
            edges_by_arity.insert(arity, tagged.into_iter().map(|(edge, _)| edge).collect());
        }
        let new_base =
            crate::hypergraph::build_hypergraph(n, edges_by_arity.clone()).unwrap();
        let mut values: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
        for (k, j, _) in s.spec().slots().filter(|&(_, _, m)| m > 1) {
            let mapped = if j == 1 {
                let mut out = vec![0; n];
                for v in 0..n {
                    out[perm[v]] = s.value(k, 1, v).unwrap();
                }
                out
            } else {
                order_by_arity[&j]
                    .iter()
                    .map(|&e| s.value(k, j, e).unwrap())
                    .collect()
            };
            values.insert((k, j), mapped);
        }
        let permuted =
            StructuredHypergraph::new(new_base, s.spec().clone(), values).unwrap();
        let mut vertex_class = vec![0; n];
        for v in 0..n {
            vertex_class[perm[v]] = d.vertex_class[v];
        }
        let edge_class = order_by_arity
            .iter()
            .map(|(&arity, order)| {
                (
                    arity,
                    order.iter().map(|&e| d.edge_class_of(arity, e)).collect(),
                )
            })
            .collect();
        let nd = DecompositionSystem {
            order: d.order,
            vertex_class,
            edge_class,
        };
        // Vertex perm[v] gets label v, matching the original identity labels.
        let mut labels = vec![0; n];
        for v in 0..n {
            labels[perm[v]] = v;
        }
        (permuted, nd, Labeling::new(labels).unwrap())
    }

    #[test]
    fn evaluation_is_label_natural_on_hand_cases() {
        let rule = FeynmanRule::classic();
        for perm in [vec![3, 1, 0, 2], vec![1, 2, 3, 0], vec![2, 0, 3, 1]] {
            let (s, d) = double_edge();
            let left =
                evaluate(&s, Some(&Labeling::identity(4)), &d, &rule).unwrap();
            let (ps, pd, labeling) = permute_structured(&s, &d, &perm);
            let right = evaluate(&ps, Some(&labeling), &pd, &rule).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn monoidality_witness_examples() {
        let rule = FeynmanRule::classic();
        let k2 = LabeledHypergraph::plain_identity(
            Hypergraph::graph(2, &[(0, 1)]).unwrap(),
        );
        let dk2 = all_internal_decomposition(k2.base());
        let k1 = LabeledHypergraph::plain_identity(Hypergraph::edgeless(1));
        let dk1 = all_internal_decomposition(k1.base());
        let witness = check_monoidality(&k2, &dk2, &k1, &dk1, &rule)
            .unwrap()
            .unwrap();
        assert_eq!(witness, vec![0, 1, 2]);

        let empty = LabeledHypergraph::plain_identity(Hypergraph::edgeless(0));
        let dempty = all_internal_decomposition(empty.base());
        let witness = check_monoidality(&k2, &dk2, &empty, &dempty, &rule)
            .unwrap()
            .unwrap();
        assert_eq!(witness, vec![0, 1, 2]);

        let s = star_feynman();
        let labeled =
            LabeledHypergraph::new(s.clone(), Labeling::identity(4)).unwrap();
        let d = star_system();
        let union = labeled_union(&labeled, &labeled).unwrap();
        let du = union_decomposition(labeled.base(), &d, labeled.base(), &d);
        let zu = evaluate(&union.structured, Some(&union.labeling), &du, &rule).unwrap();
        let witness = check_monoidality(&labeled, &d, &labeled, &d, &rule)
            .unwrap()
            .unwrap();
        let part = evaluate(&s, Some(&Labeling::identity(4)), &d, &rule).unwrap();
        assert_eq!(apply_permutation(&zu, &witness), tensor(&part, &part));
        assert_eq!(zu.factors().len(), 8);
    }

    #[test]
    fn iso_reflection_cases() {
        let rule = FeynmanRule::classic();
        let s = star();
        let d = structured_decomposition(&s).unwrap();
        let identity = HypergraphMorphism {
            source: s.base().clone(),
            target: s.base().clone(),
            vertex_map: vec![0, 1, 2, 3],
            edge_maps: BTreeMap::from([(2, vec![0, 1, 2])]),
        };
        assert!(check_iso_reflection(&s, &s, &identity, &d, &d, &rule).unwrap());

        // Strict inclusion: blocks differ in size, image not invertible,
        // implication vacuous.
        let k2 = StructuredHypergraph::plain(Hypergraph::graph(2, &[(0, 1)]).unwrap());
        let k3 = StructuredHypergraph::plain(
            Hypergraph::graph(3, &[(0, 1), (0, 2), (1, 2)]).unwrap(),
        );
        let inclusion = HypergraphMorphism {
            source: k2.base().clone(),
            target: k3.base().clone(),
            vertex_map: vec![0, 1],
            edge_maps: BTreeMap::from([(2, vec![0])]),
        };
        assert!(check_iso_reflection(
            &k2,
            &k3,
            &inclusion,
            &all_internal_decomposition(k2.base()),
            &all_internal_decomposition(k3.base()),
            &rule
        )
        .unwrap());

        // Collapsing two isolated vertices: every factor is the unit, but the
        // block map repeats an image, so the image is not invertible.
        let two = StructuredHypergraph::plain(Hypergraph::edgeless(2));
        let one = StructuredHypergraph::plain(Hypergraph::edgeless(1));
        let collapse = HypergraphMorphism {
            source: two.base().clone(),
            target: one.base().clone(),
            vertex_map: vec![0, 0],
            edge_maps: BTreeMap::new(),
        };
        assert!(check_iso_reflection(
            &two,
            &one,
            &collapse,
            &all_internal_decomposition(two.base()),
            &all_internal_decomposition(one.base()),
            &rule
        )
        .unwrap());
    }

    fn arbitrary_structured() -> impl Strategy<Value = StructuredHypergraph> {
        (2usize..6)
            .prop_flat_map(|n| {
                let pairs = proptest::collection::vec(
                    ((0usize..n, 0usize..n), 0usize..2),
                    0..6,
                );
                let values = proptest::collection::vec(0u64..3, n);
                (Just(n), pairs, values)
            })
            .prop_map(|(n, pairs, values)| {
                let mut edges: Vec<Vec<usize>> = Vec::new();
                for ((a, b), copies) in pairs {
                    if a != b {
                        for _ in 0..=copies {
                            let mut e = vec![a, b];
                            e.sort_unstable();
                            edges.push(e);
                        }
                    }
                }
                let base = crate::hypergraph::build_hypergraph(
                    n,
                    BTreeMap::from([(2, edges)]),
                )
                .unwrap();
                let spec = StructureSpec::new().with_slot(1, 1, 3).unwrap();
                StructuredHypergraph::new(
                    base,
                    spec,
                    BTreeMap::from([((1, 1), values)]),
                )
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_standard_rules_are_coherent(s in arbitrary_structured()) {
            let d = structured_decomposition(&s).unwrap();
            prop_assert!(is_standard(s.base(), &d));
            let tables = standard_degrees(s.base(), &d).unwrap();
            prop_assert!(check_coherence(s.base(), &d, &tables));
            let classic = classic_degrees(s.base(), &d).unwrap();
            prop_assert!(check_coherence(s.base(), &d, &classic));
        }

        #[test]
        fn prop_evaluation_is_label_natural(
            s in arbitrary_structured(),
            seed in 0u64..1000,
        ) {
            let d = structured_decomposition(&s).unwrap();
            let n = s.base().vertex_count();
            // A deterministic permutation from the seed.
            let mut perm: Vec<usize> = (0..n).collect();
            let mut state = seed.wrapping_mul(2654435761).wrapping_add(1);
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (state >> 33) as usize % (i + 1));
            }
            let rule = FeynmanRule::classic();
            let left = evaluate(&s, Some(&Labeling::identity(n)), &d, &rule).unwrap();
            let (ps, pd, labeling) = permute_structured(&s, &d, &perm);
            let right = evaluate(&ps, Some(&labeling), &pd, &rule).unwrap();
            prop_assert_eq!(&left, &right);

            // The synthesized labels agree across presentations too.
            let auto_left = evaluate(&s, None, &d, &rule).unwrap();
            let auto_right = evaluate(&ps, None, &pd, &rule).unwrap();
            prop_assert_eq!(normal_form(&auto_left), normal_form(&auto_right));
        }

        #[test]
        fn prop_monoidality_holds_on_random_pairs(
            a in arbitrary_structured(),
            b in arbitrary_structured(),
        ) {
            let da = structured_decomposition(&a).unwrap();
            let db = structured_decomposition(&b).unwrap();
            let na = a.base().vertex_count();
            let nb = b.base().vertex_count();
            let la = LabeledHypergraph::new(a.clone(), Labeling::identity(na)).unwrap();
            let lb = LabeledHypergraph::new(b.clone(), Labeling::identity(nb)).unwrap();
            let rule = FeynmanRule::classic();
            let witness = check_monoidality(&la, &da, &lb, &db, &rule).unwrap();
            prop_assert!(witness.is_some());
            let union = labeled_union(&la, &lb).unwrap();
            let du = union_decomposition(la.base(), &da, lb.base(), &db);
            let zu = evaluate(&union.structured, Some(&union.labeling), &du, &rule).unwrap();
            let za = evaluate(&a, Some(&Labeling::identity(na)), &da, &rule).unwrap();
            let zb = evaluate(&b, Some(&Labeling::identity(nb)), &db, &rule).unwrap();
            prop_assert_eq!(
                apply_permutation(&zu, &witness.unwrap()),
                tensor(&za, &zb)
            );
        }
    }
}
