//! Enumeration of hypergraphs up to isomorphism by vertex extension.
//!
//! Level `k + 1` representatives are produced by attaching a new vertex to
//! every level-`k` representative in every possible way and deduplicating by
//! canonical code. Every isomorphism class on `k + 1` vertices restricts,
//! after deleting the new vertex, to a class on `k` vertices, so the sweep
//! is exhaustive. Output graphs are decoded from their codes, which makes
//! the result independent of scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::hypergraph::{build_hypergraph, Hypergraph};

use super::{canonical_code, CanonicalCode};

/// Shape of an enumeration universe: all hypergraphs on `vertex_count`
/// vertices whose arities lie in `2..=max_arity`, with at most
/// `max_multiplicity` parallel copies of any edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationClass {
    pub vertex_count: usize,
    pub max_arity: usize,
    pub max_multiplicity: usize,
}

impl EnumerationClass {
    /// Simple graphs: arity 2, no parallel edges.
    pub fn simple(vertex_count: usize) -> Self {
        EnumerationClass {
            vertex_count,
            max_arity: 2,
            max_multiplicity: 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    /// Largest admitted vertex count; the sweep is exponential and meant for
    /// desk-scale checks.
    pub cap: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { cap: 8 }
    }
}

/// Attachment combinations admitted per level before the sweep refuses.
const ATTACHMENT_CAP: usize = 1 << 22;

/// All nonempty subsets of `0..k` of size at most `max_size`, in a fixed
/// order. Each subset is one slot for an edge through the new vertex.
fn attachment_slots(k: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut slots = Vec::new();
    let mut current = Vec::new();
    fn grow(slots: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, from: usize, k: usize, max: usize) {
        for v in from..k {
            current.push(v);
            slots.push(current.clone());
            if current.len() < max {
                grow(slots, current, v + 1, k, max);
            }
            current.pop();
        }
    }
    if max_size > 0 {
        grow(&mut slots, &mut current, 0, k, max_size);
    }
    slots
}

fn attach(
    base: &Hypergraph,
    slots: &[Vec<usize>],
    mut index: usize,
    base_mult: usize,
) -> Hypergraph {
    let k = base.vertex_count();
    let mut edges: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for arity in base.arities() {
        edges.insert(arity, base.edges(arity).to_vec());
    }
    for slot in slots {
        let multiplicity = index % base_mult;
        index /= base_mult;
        if multiplicity == 0 {
            continue;
        }
        let mut edge = slot.clone();
        edge.push(k);
        let arity = edge.len();
        for _ in 0..multiplicity {
            edges.entry(arity).or_default().push(edge.clone());
        }
    }
    build_hypergraph(k + 1, edges).expect("extension edges are valid")
}

/// Enumerates one representative per isomorphism class of `class`, in
/// canonical-code order.
pub fn enumerate_hypergraphs(
    class: EnumerationClass,
    options: EnumerationOptions,
    mode: ExecMode,
) -> Result<Vec<Hypergraph>> {
    if class.max_arity < 2 {
        return Err(Error::SpecMismatch {
            reason: format!("max arity {} is below 2", class.max_arity),
        });
    }
    if class.max_multiplicity < 1 {
        return Err(Error::SpecMismatch {
            reason: "max multiplicity must be at least 1".into(),
        });
    }
    if class.vertex_count > options.cap {
        return Err(Error::CapExceeded {
            requested: class.vertex_count,
            cap: options.cap,
        });
    }
    let mut reps = vec![Hypergraph::edgeless(0)];
    for k in 0..class.vertex_count {
        let slots = attachment_slots(k, class.max_arity - 1);
        let base_mult = class.max_multiplicity + 1;
        let attachments = base_mult.checked_pow(slots.len() as u32).unwrap_or(usize::MAX);
        if attachments > ATTACHMENT_CAP {
            return Err(Error::CapExceeded {
                requested: attachments,
                cap: ATTACHMENT_CAP,
            });
        }
        const CHUNK: usize = 1 << 10;
        let mut jobs: Vec<(usize, Range<usize>)> = Vec::new();
        for rep in 0..reps.len() {
            let mut start = 0;
            while start < attachments {
                let end = (start + CHUNK).min(attachments);
                jobs.push((rep, start..end));
                start = end;
            }
        }
        let reps_ref = &reps;
        let slots_ref = &slots;
        let chunks: Vec<BTreeSet<CanonicalCode>> = mode.map_vec(jobs, move |(rep, range)| {
            let mut seen = BTreeSet::new();
            for index in range {
                let extended = attach(&reps_ref[rep], slots_ref, index, base_mult);
                seen.insert(canonical_code(&extended, None).expect("uniform colors validate"));
            }
            seen
        });
        let mut merged: BTreeSet<CanonicalCode> = BTreeSet::new();
        for chunk in chunks {
            merged.extend(chunk);
        }
        reps = merged.iter().map(|code| code.decode().0).collect();
    }
    Ok(reps)
}
