//! JSON documents for hypergraphs with optional structure values, labeling,
//! field-graph data, and a decomposition system.
//!
//! Loading re-validates everything the in-memory types enforce, so a document
//! that passes [`read_document`] is safe to hand to any core driver. Emitted
//! JSON has sorted keys and stable field order; re-serializing a loaded
//! document reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hyperdeck_core::feynman::DecompositionSystem;
use hyperdeck_core::hypergraph::{build_hypergraph, Hypergraph};
use hyperdeck_core::structures::{
    feynman_as_structure, validate_feynman, FeynmanGraphData, LabeledHypergraph, Labeling,
    StructureSpec, StructuredHypergraph,
};

/// A slot declaration: values of the `(k, j)` slot live in `Z/modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotEntry {
    pub k: usize,
    pub j: usize,
    pub modulus: u64,
}

/// One stored residue: element `element` of arity `j` (vertices are arity 1)
/// carries `value` in slot `(k, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueEntry {
    pub k: usize,
    pub j: usize,
    pub element: usize,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    pub spec: Vec<SlotEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<ValueEntry>,
}

/// Per-vertex kind (0 = external, 1 = internal) and genus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeynmanSection {
    pub kind: Vec<u8>,
    pub genus: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSection {
    pub order: usize,
    pub vertex_class: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_class: BTreeMap<String, Vec<usize>>,
}

/// The on-disk form of a hypergraph. Edge lists are keyed by arity (JSON
/// object keys, so decimal strings); every optional section is independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergraphDocument {
    pub vertices: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edges: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeling: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feynman: Option<FeynmanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSection>,
}

fn element_count(base: &Hypergraph, j: usize) -> usize {
    if j == 1 {
        base.vertex_count()
    } else {
        base.edge_count(j)
    }
}

impl HypergraphDocument {
    pub fn from_hypergraph(g: &Hypergraph) -> Self {
        let mut edges = BTreeMap::new();
        for arity in g.arities().collect::<Vec<_>>() {
            edges.insert(arity.to_string(), g.edges(arity).to_vec());
        }
        HypergraphDocument {
            vertices: g.vertex_count(),
            edges,
            structure: None,
            labeling: None,
            feynman: None,
            decomposition: None,
        }
    }

    pub fn from_structured(s: &StructuredHypergraph) -> Self {
        let mut doc = Self::from_hypergraph(s.base());
        let spec: Vec<SlotEntry> = s
            .spec()
            .slots()
            .map(|(k, j, modulus)| SlotEntry { k, j, modulus })
            .collect();
        if spec.is_empty() {
            return doc;
        }
        let mut values = Vec::new();
        for (k, j, modulus) in s.spec().slots() {
            if modulus < 2 {
                continue;
            }
            for element in 0..element_count(s.base(), j) {
                let value = s.value(k, j, element).expect("element is in range");
                values.push(ValueEntry {
                    k,
                    j,
                    element,
                    value,
                });
            }
        }
        doc.structure = Some(StructureSection { spec, values });
        doc
    }

    pub fn from_labeled(l: &LabeledHypergraph) -> Self {
        let mut doc = Self::from_structured(&l.structured);
        doc.labeling = Some(l.labeling.labels().to_vec());
        doc
    }

    pub fn to_hypergraph(&self) -> Result<Hypergraph> {
        let mut edges = BTreeMap::new();
        for (key, list) in &self.edges {
            let arity: usize = key
                .parse()
                .with_context(|| format!("edge arity key {key:?} is not an integer"))?;
            edges.insert(arity, list.clone());
        }
        Ok(build_hypergraph(self.vertices, edges)?)
    }

    pub fn to_structured(&self) -> Result<StructuredHypergraph> {
        let base = self.to_hypergraph()?;
        let Some(section) = &self.structure else {
            return Ok(StructuredHypergraph::plain(base));
        };
        let mut spec = StructureSpec::new();
        for slot in &section.spec {
            spec = spec.with_slot(slot.k, slot.j, slot.modulus)?;
        }
        let mut tables: BTreeMap<(usize, usize), Vec<Option<u64>>> = BTreeMap::new();
        for entry in &section.values {
            let count = element_count(&base, entry.j);
            if entry.element >= count {
                bail!(
                    "slot ({},{}) value names element {} but the document has {count} such elements",
                    entry.k,
                    entry.j,
                    entry.element
                );
            }
            let table = tables
                .entry((entry.k, entry.j))
                .or_insert_with(|| vec![None; count]);
            if table[entry.element].replace(entry.value).is_some() {
                bail!(
                    "slot ({},{}) element {} is assigned twice",
                    entry.k,
                    entry.j,
                    entry.element
                );
            }
        }
        let mut values = BTreeMap::new();
        for ((k, j), table) in tables {
            let mut out = Vec::with_capacity(table.len());
            for (element, value) in table.into_iter().enumerate() {
                let Some(value) = value else {
                    bail!("slot ({k},{j}) has no value for element {element}");
                };
                out.push(value);
            }
            values.insert((k, j), out);
        }
        Ok(StructuredHypergraph::new(base, spec, values)?)
    }

    /// Labeled view; identity labels when the document has none.
    pub fn to_labeled(&self) -> Result<LabeledHypergraph> {
        self.to_labeled_view(self.to_structured()?)
    }

    /// Attaches the document's labeling (or identity) to a structured view
    /// built elsewhere, e.g. [`Self::evaluated_structure`].
    pub fn to_labeled_view(&self, structured: StructuredHypergraph) -> Result<LabeledHypergraph> {
        let labeling = match &self.labeling {
            Some(labels) => Labeling::new(labels.clone())?,
            None => Labeling::identity(structured.base().vertex_count()),
        };
        Ok(LabeledHypergraph::new(structured, labeling)?)
    }

    /// Smallest genus cap admitting this document's feynman section.
    pub fn genus_cap_hint(&self) -> Option<u64> {
        let section = self.feynman.as_ref()?;
        Some(section.genus.iter().copied().max().map_or(1, |g| g + 1))
    }

    /// The structured view the `feynman` commands evaluate: the stored
    /// structure section, or kind/genus slots derived from the feynman
    /// section. Carrying both is rejected as ambiguous.
    pub fn evaluated_structure(&self) -> Result<StructuredHypergraph> {
        self.evaluated_structure_with_cap(self.genus_cap_hint().unwrap_or(1))
    }

    /// Same as [`Self::evaluated_structure`], with the genus cap pinned so
    /// several documents can share one slot layout.
    pub fn evaluated_structure_with_cap(&self, cap: u64) -> Result<StructuredHypergraph> {
        match (&self.structure, &self.feynman) {
            (Some(_), Some(_)) => {
                bail!("document carries both structure and feynman sections; keep one")
            }
            (_, None) => self.to_structured(),
            (None, Some(section)) => {
                let base = self.to_hypergraph()?;
                let data = FeynmanGraphData {
                    kind: section.kind.clone(),
                    genus: section.genus.clone(),
                };
                Ok(feynman_as_structure(&base, &data, cap)?)
            }
        }
    }

    pub fn to_decomposition(&self, graph: &Hypergraph) -> Result<Option<DecompositionSystem>> {
        let Some(section) = &self.decomposition else {
            return Ok(None);
        };
        let mut edge_class = BTreeMap::new();
        for (key, classes) in &section.edge_class {
            let arity: usize = key
                .parse()
                .with_context(|| format!("edge_class arity key {key:?} is not an integer"))?;
            edge_class.insert(arity, classes.clone());
        }
        let system = DecompositionSystem {
            order: section.order,
            vertex_class: section.vertex_class.clone(),
            edge_class,
        };
        system.validate(graph)?;
        Ok(Some(system))
    }

    /// Re-checks every invariant of every present section.
    pub fn validated(&self) -> Result<()> {
        // Edge ids are ranks in sorted order, so require the written lists
        // to already be sorted; otherwise `element` indices in the structure
        // section would be silently reinterpreted.
        for (key, list) in &self.edges {
            let ascending = list
                .iter()
                .all(|incident| incident.windows(2).all(|w| w[0] < w[1]));
            if !ascending || list.windows(2).any(|w| w[0] > w[1]) {
                bail!("arity-{key} edges are not listed in sorted order");
            }
        }
        let structured = self.to_structured()?;
        let base = structured.base();
        if let Some(labels) = &self.labeling {
            Labeling::new(labels.clone())?;
            if labels.len() != base.vertex_count() {
                bail!(
                    "labeling has {} entries for {} vertices",
                    labels.len(),
                    base.vertex_count()
                );
            }
        }
        if let Some(section) = &self.feynman {
            let data = FeynmanGraphData {
                kind: section.kind.clone(),
                genus: section.genus.clone(),
            };
            if !validate_feynman(base, &data) {
                bail!("feynman section violates the external-vertex conditions");
            }
        }
        self.to_decomposition(base)?;
        Ok(())
    }
}

pub fn to_json_string(doc: &HypergraphDocument) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serialization cannot fail");
    text.push('\n');
    text
}

pub fn read_document(path: &Path) -> Result<HypergraphDocument> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: HypergraphDocument =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    doc.validated()
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(doc)
}

pub fn write_document(path: &Path, doc: &HypergraphDocument) -> Result<()> {
    fs::write(path, to_json_string(doc)).with_context(|| format!("writing {}", path.display()))
}
