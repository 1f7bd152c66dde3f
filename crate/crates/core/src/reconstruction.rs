//! Vertex-deletion decks and what they determine.
//!
//! A card is `G - x`: delete one vertex and every incident edge, re-index
//! the survivors. The deck collects the canonical codes of all `n` cards.
//! Three grouping disciplines are supported: the plain multiset of cards,
//! the single code of the disjoint union of the cards (the weak deck), and
//! the label-indexed card sequence for labeled inputs. The verification
//! driver sweeps an enumerated class and reports every group of distinct
//! members sharing a deck.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::canon::{
    canonical_code, enumerate_hypergraphs, CanonicalCode, EnumerationClass, EnumerationOptions,
};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::hypergraph::Hypergraph;
use crate::structures::{
    labeled_union, structured_union, LabeledHypergraph, Labeling, StructureSpec,
    StructuredHypergraph,
};

/// Deletes a vertex from a structured hypergraph, restricting every value
/// table to the surviving elements.
pub fn delete_vertex_structured(s: &StructuredHypergraph, x: usize) -> Result<StructuredHypergraph> {
    let (base, trace) = s.base().delete_vertex(x)?;
    let mut values: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for (k, j, m) in s.spec().slots() {
        if m == 1 {
            continue;
        }
        if j == 1 {
            if base.vertex_count() > 0 {
                let mut kept = Vec::with_capacity(base.vertex_count());
                for v in 0..s.base().vertex_count() {
                    if v != x {
                        kept.push(s.value(k, 1, v)?);
                    }
                }
                values.insert((k, 1), kept);
            }
        } else if let Some(ids) = trace.surviving_edges.get(&j) {
            let kept: Result<Vec<u64>> = ids.iter().map(|&e| s.value(k, j, e)).collect();
            values.insert((k, j), kept?);
        }
    }
    StructuredHypergraph::new(base, s.spec().clone(), values)
}

/// Deletes a vertex from a labeled hypergraph; surviving labels keep their
/// relative order and close the gap left by the deleted label.
pub fn delete_vertex_labeled(l: &LabeledHypergraph, x: usize) -> Result<LabeledHypergraph> {
    let deleted_label = l.labeling.label(x);
    let structured = delete_vertex_structured(&l.structured, x)?;
    let mut labels = Vec::with_capacity(structured.base().vertex_count());
    for v in 0..l.base().vertex_count() {
        if v == x {
            continue;
        }
        let label = l.labeling.label(v);
        labels.push(if label > deleted_label { label - 1 } else { label });
    }
    LabeledHypergraph::new(structured, Labeling::new(labels)?)
}

/// The canonical codes of all cards of one hypergraph, in deletion order
/// (vertex index, or deleted label for labeled inputs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deck {
    cards: Vec<CanonicalCode>,
}

impl Deck {
    pub fn cards(&self) -> &[CanonicalCode] {
        &self.cards
    }

    pub fn card_count(&self) -> usize {
        self.cards.len()
    }

    /// Cards with multiplicities, forgetting the deletion order.
    pub fn multiset(&self) -> BTreeMap<&CanonicalCode, usize> {
        let mut counts = BTreeMap::new();
        for card in &self.cards {
            *counts.entry(card).or_insert(0) += 1;
        }
        counts
    }

    /// The sorted card codes, length-prefixed; two decks are equal as
    /// multisets exactly when these bytes are equal.
    pub fn multiset_bytes(&self) -> Vec<u8> {
        let mut sorted: Vec<&CanonicalCode> = self.cards.iter().collect();
        sorted.sort_unstable();
        let mut bytes = Vec::new();
        for card in sorted {
            bytes.extend_from_slice(&(card.as_bytes().len() as u64).to_be_bytes());
            bytes.extend_from_slice(card.as_bytes());
        }
        bytes
    }

    /// Card codes in deletion order, length-prefixed; equality means equal
    /// indexed decks.
    pub fn indexed_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::new();
        for card in &self.cards {
            bytes.extend_from_slice(&(card.as_bytes().len() as u64).to_be_bytes());
            bytes.extend_from_slice(card.as_bytes());
        }
        bytes
    }

    pub fn multiset_digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.multiset_bytes());
        hasher.finalize().into()
    }

    pub fn indexed_digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.indexed_bytes());
        hasher.finalize().into()
    }
}

/// The deck of a plain hypergraph, cards ordered by deleted vertex.
pub fn deck(graph: &Hypergraph) -> Result<Deck> {
    if graph.vertex_count() == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let cards: Result<Vec<CanonicalCode>> = (0..graph.vertex_count())
        .map(|x| canonical_code(&graph.delete_vertex(x)?.0, None))
        .collect();
    Ok(Deck { cards: cards? })
}

/// The deck of a structured hypergraph; structure values ride along as
/// colors in the card codes.
pub fn deck_structured(s: &StructuredHypergraph) -> Result<Deck> {
    if s.base().vertex_count() == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let cards: Result<Vec<CanonicalCode>> = (0..s.base().vertex_count())
        .map(|x| delete_vertex_structured(s, x)?.canonical_code())
        .collect();
    Ok(Deck { cards: cards? })
}

/// The deck of a labeled hypergraph, cards ordered by the deleted label and
/// coded with label colors.
pub fn deck_labeled(l: &LabeledHypergraph) -> Result<Deck> {
    let n = l.base().vertex_count();
    if n == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let cards: Result<Vec<CanonicalCode>> = (0..n)
        .map(|label| {
            let x = l.labeling.vertex_with_label(label);
            delete_vertex_labeled(l, x)?.canonical_code()
        })
        .collect();
    Ok(Deck { cards: cards? })
}

/// Code of the disjoint union of all cards of a plain hypergraph.
pub fn weak_deck(graph: &Hypergraph) -> Result<CanonicalCode> {
    if graph.vertex_count() == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let mut union = Hypergraph::edgeless(0);
    for x in 0..graph.vertex_count() {
        union = union.disjoint_union(&graph.delete_vertex(x)?.0);
    }
    canonical_code(&union, None)
}

/// Code of the disjoint union of all cards of a structured hypergraph.
pub fn weak_deck_structured(s: &StructuredHypergraph) -> Result<CanonicalCode> {
    if s.base().vertex_count() == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let mut union = StructuredHypergraph::new(
        Hypergraph::edgeless(0),
        s.spec().clone(),
        BTreeMap::new(),
    )?;
    for x in 0..s.base().vertex_count() {
        union = structured_union(&union, &delete_vertex_structured(s, x)?)?;
    }
    union.canonical_code()
}

/// Code of the labeled disjoint union of all cards, joined in deleted-label
/// order under the left-before-right labeling convention.
pub fn weak_deck_labeled(l: &LabeledHypergraph) -> Result<CanonicalCode> {
    let n = l.base().vertex_count();
    if n == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let empty = LabeledHypergraph::new(
        StructuredHypergraph::new(Hypergraph::edgeless(0), l.structured.spec().clone(), BTreeMap::new())?,
        Labeling::identity(0),
    )?;
    let mut union = empty;
    for label in 0..n {
        let x = l.labeling.vertex_with_label(label);
        union = labeled_union(&union, &delete_vertex_labeled(l, x)?)?;
    }
    union.canonical_code()
}

/// Rebuilds the weak-deck code from a deck alone by merging the component
/// blocks of the cards. Deck equality therefore forces weak-deck equality.
/// For plain and structured inputs this equals the corresponding `weak_deck`
/// byte-for-byte; labeled weak decks relabel the union, so only the
/// implication (not byte equality) carries over there.
pub fn weak_deck_from_deck(deck: &Deck) -> CanonicalCode {
    let mut blocks: Vec<Vec<u8>> = Vec::new();
    for card in &deck.cards {
        for block in card.component_blocks() {
            blocks.push(block.to_vec());
        }
    }
    CanonicalCode::from_component_blocks(blocks)
}

/// Number of arity-`j` elements of `s` whose `(k, j)` residue is `a`.
pub fn structure_count(s: &StructuredHypergraph, k: usize, j: usize, a: u64) -> Result<usize> {
    s.count_elements_with_value(k, j, a)
}

/// The counting identity relating a structure count to its per-card sums:
/// an arity-`j` element survives in exactly `n - j` cards, so
/// `(n - j) * count(S) = sum over x of count(S - x)`.
pub fn kelly_identity_check(s: &StructuredHypergraph, k: usize, j: usize, a: u64) -> Result<bool> {
    let n = s.base().vertex_count();
    if n <= j {
        return Err(Error::ArityTooLargeForDeck {
            arity: j,
            vertex_count: n,
        });
    }
    let lhs = (n - j) * structure_count(s, k, j, a)?;
    let mut rhs = 0usize;
    for x in 0..n {
        rhs += structure_count(&delete_vertex_structured(s, x)?, k, j, a)?;
    }
    Ok(lhs == rhs)
}

/// Rebuilds a labeled structured hypergraph from its labeled deck. `cards[x]`
/// must be the card obtained by deleting the vertex with label `x`. Each
/// arity-`j` edge appears in exactly `n - j` cards, which determines its
/// multiplicity; vertex residues are read off every card containing the
/// vertex and must agree.
pub fn reconstruct_labeled(cards: &[LabeledHypergraph]) -> Result<LabeledHypergraph> {
    let n = cards.len();
    if n == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let spec = cards[0].structured.spec().clone();
    for (x, card) in cards.iter().enumerate() {
        if card.base().vertex_count() != n - 1 {
            return Err(Error::InconsistentDeck {
                reason: format!(
                    "card {x} has {} vertices, expected {}",
                    card.base().vertex_count(),
                    n - 1
                ),
            });
        }
        if card.structured.spec() != &spec {
            return Err(Error::InconsistentDeck {
                reason: format!("card {x} declares a different structure table"),
            });
        }
    }
    // A card label l' seen in card x came from original label l' when
    // l' < x, and from l' + 1 otherwise.
    let lift = |card_label: usize, x: usize| {
        if card_label < x {
            card_label
        } else {
            card_label + 1
        }
    };
    let edge_slots: BTreeMap<usize, Vec<usize>> = {
        let mut by_arity: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, j, _) in spec.slots() {
            if j >= 2 {
                by_arity.entry(j).or_default().push(k);
            }
        }
        by_arity
    };
    // (arity, original labels, slot residues) -> occurrences across cards.
    let mut occurrences: BTreeMap<(usize, Vec<usize>, Vec<u64>), usize> = BTreeMap::new();
    for (x, card) in cards.iter().enumerate() {
        for arity in card.base().arities() {
            for (e, incidence) in card.base().edges(arity).iter().enumerate() {
                let mut labels: Vec<usize> = incidence
                    .iter()
                    .map(|&v| lift(card.labeling.label(v), x))
                    .collect();
                labels.sort_unstable();
                let mut residues = Vec::new();
                if let Some(slots) = edge_slots.get(&arity) {
                    for &k in slots {
                        residues.push(card.structured.value(k, arity, e)?);
                    }
                }
                *occurrences.entry((arity, labels, residues)).or_insert(0) += 1;
            }
        }
    }
    let mut edges: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut edge_values: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for ((arity, labels, residues), count) in occurrences {
        let survivors = n - arity;
        if survivors == 0 || count % survivors != 0 {
            return Err(Error::InconsistentDeck {
                reason: format!(
                    "edge {labels:?} of arity {arity} seen {count} times, not a multiple of {survivors}"
                ),
            });
        }
        let multiplicity = count / survivors;
        for _ in 0..multiplicity {
            edges.entry(arity).or_default().push(labels.clone());
            if let Some(slots) = edge_slots.get(&arity) {
                for (&k, &value) in slots.iter().zip(&residues) {
                    edge_values.entry((k, arity)).or_default().push(value);
                }
            }
        }
    }
    let base = crate::hypergraph::build_hypergraph(n, edges)?;
    let mut values: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for (k, j, m) in spec.slots() {
        if m == 1 {
            continue;
        }
        if j == 1 {
            let mut residues = Vec::with_capacity(n);
            for label in 0..n {
                let mut agreed: Option<u64> = None;
                for (x, card) in cards.iter().enumerate() {
                    if x == label {
                        continue;
                    }
                    let card_label = if label < x { label } else { label - 1 };
                    let v = card.labeling.vertex_with_label(card_label);
                    let value = card.structured.value(k, 1, v)?;
                    match agreed {
                        None => agreed = Some(value),
                        Some(prev) if prev != value => {
                            return Err(Error::InconsistentDeck {
                                reason: format!(
                                    "cards disagree on slot ({k},1) at label {label}: {prev} vs {value}"
                                ),
                            });
                        }
                        _ => {}
                    }
                }
                residues.push(agreed.unwrap_or(0));
            }
            values.insert((k, 1), residues);
        } else if let Some(residues) = edge_values.get(&(k, j)) {
            values.insert((k, j), residues.clone());
        }
    }
    let structured = StructuredHypergraph::new(base, spec, values)?;
    LabeledHypergraph::new(structured, Labeling::identity(n))
}

/// Which deck discipline a verification run groups by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextKind {
    /// Multiset of cards.
    Rc,
    /// Disjoint union of cards (weak deck).
    Drc,
    /// Label-indexed card sequence over labeled members.
    LabeledRc,
}

/// Shape of the class a verification run sweeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSpec {
    pub max_arity: usize,
    pub max_multiplicity: usize,
    /// When present, members carry all possible value tables for this spec.
    pub structure: Option<StructureSpec>,
}

impl ClassSpec {
    pub fn simple() -> Self {
        ClassSpec {
            max_arity: 2,
            max_multiplicity: 1,
            structure: None,
        }
    }

    pub fn simple_structured(spec: StructureSpec) -> Self {
        ClassSpec {
            max_arity: 2,
            max_multiplicity: 1,
            structure: Some(spec),
        }
    }
}

/// One member of a swept class: its identifying code plus the data needed to
/// rebuild a witness document.
#[derive(Debug, Clone)]
pub struct Member {
    pub code: CanonicalCode,
    pub structured: StructuredHypergraph,
    pub labeling: Option<Labeling>,
}

/// Distinct members sharing one deck.
#[derive(Debug, Clone)]
pub struct CollisionGroup {
    pub deck_digest: [u8; 32],
    pub members: Vec<Member>,
}

/// Outcome of a class sweep: an empty `groups` list means the deck
/// discipline separates every pair in the class at this size.
#[derive(Debug, Clone)]
pub struct CollisionReport {
    pub kind: ContextKind,
    pub vertex_count: usize,
    pub class_size: usize,
    pub groups: Vec<CollisionGroup>,
    pub elapsed: Duration,
}

/// Assignment tables admitted per member before the sweep refuses.
const VALUE_CAP: usize = 1 << 22;

fn all_value_tables(
    base: &Hypergraph,
    spec: &StructureSpec,
) -> Result<Vec<BTreeMap<(usize, usize), Vec<u64>>>> {
    // One digit per (slot, element); the odometer walks all combinations.
    let mut digits: Vec<((usize, usize), usize, u64)> = Vec::new();
    let mut total: usize = 1;
    for (k, j, m) in spec.slots() {
        if m == 1 {
            continue;
        }
        let count = if j == 1 {
            base.vertex_count()
        } else {
            base.edge_count(j)
        };
        for e in 0..count {
            digits.push(((k, j), e, m));
            total = total
                .checked_mul(m as usize)
                .filter(|&t| t <= VALUE_CAP)
                .ok_or(Error::CapExceeded {
                    requested: usize::MAX,
                    cap: VALUE_CAP,
                })?;
        }
    }
    let mut tables = Vec::with_capacity(total);
    for mut index in 0..total {
        let mut values: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
        for &((k, j), _, m) in &digits {
            let digit = (index % m as usize) as u64;
            index /= m as usize;
            values.entry((k, j)).or_default().push(digit);
        }
        tables.push(values);
    }
    Ok(tables)
}

fn structured_members(
    class: &ClassSpec,
    n: usize,
    options: EnumerationOptions,
    mode: ExecMode,
) -> Result<Vec<Member>> {
    let bases = enumerate_hypergraphs(
        EnumerationClass {
            vertex_count: n,
            max_arity: class.max_arity,
            max_multiplicity: class.max_multiplicity,
        },
        options,
        mode,
    )?;
    let spec = class.structure.clone().unwrap_or_default();
    let mut members: BTreeMap<CanonicalCode, Member> = BTreeMap::new();
    for base in bases {
        for values in all_value_tables(&base, &spec)? {
            let structured = StructuredHypergraph::new(base.clone(), spec.clone(), values)?;
            let code = structured.canonical_code()?;
            members.entry(code.clone()).or_insert(Member {
                code,
                structured,
                labeling: None,
            });
        }
    }
    Ok(members.into_values().collect())
}

/// Every concrete hypergraph on `n` vertices within the arity and
/// multiplicity bounds, not up to isomorphism.
fn all_concrete_bases(class: &ClassSpec, n: usize) -> Result<Vec<Hypergraph>> {
    let mut slots: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn grow(
        slots: &mut Vec<Vec<usize>>,
        current: &mut Vec<usize>,
        from: usize,
        n: usize,
        max: usize,
    ) {
        for v in from..n {
            current.push(v);
            if current.len() >= 2 {
                slots.push(current.clone());
            }
            if current.len() < max {
                grow(slots, current, v + 1, n, max);
            }
            current.pop();
        }
    }
    grow(&mut slots, &mut current, 0, n, class.max_arity);
    let base = class.max_multiplicity + 1;
    let total = base
        .checked_pow(slots.len() as u32)
        .filter(|&t| t <= VALUE_CAP)
        .ok_or(Error::CapExceeded {
            requested: usize::MAX,
            cap: VALUE_CAP,
        })?;
    let mut graphs = Vec::with_capacity(total);
    for mut index in 0..total {
        let mut edges: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for slot in &slots {
            let multiplicity = index % base;
            index /= base;
            for _ in 0..multiplicity {
                edges.entry(slot.len()).or_default().push(slot.clone());
            }
        }
        graphs.push(crate::hypergraph::build_hypergraph(n, edges)?);
    }
    Ok(graphs)
}

/// Every labeled member of the class at `n` vertices: all concrete bases,
/// all value tables, identity labels. Distinct members are distinct up to
/// label-preserving isomorphism by construction.
pub fn labeled_members(class: &ClassSpec, n: usize) -> Result<Vec<Member>> {
    let spec = class.structure.clone().unwrap_or_default();
    let mut members = Vec::new();
    for base in all_concrete_bases(class, n)? {
        for values in all_value_tables(&base, &spec)? {
            let structured = StructuredHypergraph::new(base.clone(), spec.clone(), values)?;
            let labeled = LabeledHypergraph::new(structured, Labeling::identity(n))?;
            let code = labeled.canonical_code()?;
            members.push(Member {
                code,
                structured: labeled.structured,
                labeling: Some(Labeling::identity(n)),
            });
        }
    }
    Ok(members)
}

/// The grouping key a verification run compares members by.
pub fn deck_key(kind: ContextKind, member: &Member) -> Result<Vec<u8>> {
    match kind {
        ContextKind::Rc => Ok(deck_structured(&member.structured)?.multiset_bytes()),
        ContextKind::Drc => Ok(weak_deck_structured(&member.structured)?.as_bytes().to_vec()),
        ContextKind::LabeledRc => {
            let labeling = member.labeling.clone().ok_or(Error::MissingLabeling)?;
            let labeled = LabeledHypergraph::new(member.structured.clone(), labeling)?;
            Ok(deck_labeled(&labeled)?.indexed_bytes())
        }
    }
}

/// Sweeps an enumerated class, grouping members by their deck under `kind`.
/// Workers each own a digest-prefix partition; groups are re-verified by
/// exact deck bytes, so hash collisions cannot fabricate counterexamples.
pub fn verify_class(
    kind: ContextKind,
    class: &ClassSpec,
    n: usize,
    options: EnumerationOptions,
    mode: ExecMode,
) -> Result<CollisionReport> {
    let started = Instant::now();
    if n == 0 {
        return Err(Error::EmptyHypergraph);
    }
    if n > options.cap {
        return Err(Error::CapExceeded {
            requested: n,
            cap: options.cap,
        });
    }
    let members = match kind {
        ContextKind::Rc | ContextKind::Drc => structured_members(class, n, options, mode)?,
        ContextKind::LabeledRc => labeled_members(class, n)?,
    };
    let class_size = members.len();
    let keyed: Vec<Result<([u8; 32], Vec<u8>, Member)>> = mode.map_vec(members, |member| {
        let key = deck_key(kind, &member)?;
        let mut hasher = Sha256::new();
        hasher.update(&key);
        Ok((hasher.finalize().into(), key, member))
    });
    let mut buckets: Vec<Vec<([u8; 32], Vec<u8>, Member)>> = (0..256).map(|_| Vec::new()).collect();
    for entry in keyed {
        let entry = entry?;
        buckets[entry.0[0] as usize].push(entry);
    }
    let grouped: Vec<Vec<CollisionGroup>> = mode.map_vec(buckets, |bucket| {
        let mut by_deck: BTreeMap<Vec<u8>, ([u8; 32], Vec<Member>)> = BTreeMap::new();
        for (digest, key, member) in bucket {
            by_deck.entry(key).or_insert((digest, Vec::new())).1.push(member);
        }
        let mut groups = Vec::new();
        for (_, (digest, mut members)) in by_deck {
            if members.len() >= 2 {
                members.sort_by(|a, b| a.code.cmp(&b.code));
                groups.push(CollisionGroup {
                    deck_digest: digest,
                    members,
                });
            }
        }
        groups
    });
    let mut groups: Vec<CollisionGroup> = grouped.into_iter().flatten().collect();
    groups.sort_by(|a, b| a.deck_digest.cmp(&b.deck_digest));
    Ok(CollisionReport {
        kind,
        vertex_count: n,
        class_size,
        groups,
        elapsed: started.elapsed(),
    })
}
