//! Seeded random instances for sweeps and benchmarks. Everything here is
//! deterministic in the caller's RNG, so a failing case can be replayed
//! from its seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::hypergraph::{build_hypergraph, Hypergraph};
use crate::structures::{LabeledHypergraph, Labeling, StructureSpec, StructuredHypergraph};

/// A random hypergraph on `n` vertices: up to `2n` edge draws, each a random
/// subset of an arity in `2..=max_arity`, repeated with multiplicity up to
/// `max_parallel`. Parallel edges and mixed arities both occur.
pub fn random_hypergraph(
    rng: &mut impl Rng,
    n: usize,
    max_arity: usize,
    max_parallel: usize,
) -> Hypergraph {
    let max_arity = max_arity.min(n);
    if max_arity < 2 {
        return Hypergraph::edgeless(n);
    }
    let mut edges_by_arity: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let draws = rng.gen_range(0..=2 * n);
    let mut pool: Vec<usize> = (0..n).collect();
    for _ in 0..draws {
        let arity = rng.gen_range(2..=max_arity);
        let (subset, _) = pool.partial_shuffle(rng, arity);
        let mut edge = subset.to_vec();
        edge.sort_unstable();
        let copies = rng.gen_range(1..=max_parallel.max(1));
        for _ in 0..copies {
            edges_by_arity.entry(arity).or_default().push(edge.clone());
        }
    }
    build_hypergraph(n, edges_by_arity).expect("random edges are well-formed")
}

/// A random structured hypergraph over `spec`: random base plus uniform
/// residues for every stored slot.
pub fn random_structured(
    rng: &mut impl Rng,
    n: usize,
    max_arity: usize,
    max_parallel: usize,
    spec: &StructureSpec,
) -> Result<StructuredHypergraph> {
    let base = random_hypergraph(rng, n, max_arity, max_parallel);
    let mut values = BTreeMap::new();
    for (k, j, m) in spec.slots() {
        if m == 1 {
            continue;
        }
        let count = if j == 1 {
            base.vertex_count()
        } else {
            base.edge_count(j)
        };
        let residues = (0..count).map(|_| rng.gen_range(0..m)).collect();
        values.insert((k, j), residues);
    }
    StructuredHypergraph::new(base, spec.clone(), values)
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

pub fn random_labeling(rng: &mut impl Rng, n: usize) -> Labeling {
    Labeling::new(random_permutation(rng, n)).expect("a permutation is a labeling")
}

/// A random labeled structured hypergraph.
pub fn random_labeled(
    rng: &mut impl Rng,
    n: usize,
    max_arity: usize,
    max_parallel: usize,
    spec: &StructureSpec,
) -> Result<LabeledHypergraph> {
    let structured = random_structured(rng, n, max_arity, max_parallel, spec)?;
    let labeling = random_labeling(rng, n);
    LabeledHypergraph::new(structured, labeling)
}

/// Renames vertex `v` to `perm[v]` everywhere, keeping each vertex's label:
/// the map `v -> perm[v]` is then the unique label-respecting isomorphism
/// from the input to the copy.
pub fn permuted_copy(l: &LabeledHypergraph, perm: &[usize]) -> Result<LabeledHypergraph> {
    let base = l.base();
    let n = base.vertex_count();
    assert_eq!(perm.len(), n);
    let mut edges_by_arity: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut old_order: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
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
        old_order.insert(arity, tagged.iter().map(|&(_, e)| e).collect());
        edges_by_arity.insert(arity, tagged.into_iter().map(|(edge, _)| edge).collect());
    }
    let new_base = build_hypergraph(n, edges_by_arity)?;
    let spec = l.structured.spec().clone();
    let mut values: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    for (k, j, m) in spec.slots() {
        if m == 1 {
            continue;
        }
        let mapped = if j == 1 {
            let mut out = vec![0; n];
            for v in 0..n {
                out[perm[v]] = l.structured.value(k, 1, v)?;
            }
            out
        } else {
            old_order
                .get(&j)
                .map(|order| {
                    order
                        .iter()
                        .map(|&e| l.structured.value(k, j, e))
                        .collect::<Result<Vec<u64>>>()
                })
                .transpose()?
                .unwrap_or_default()
        };
        values.insert((k, j), mapped);
    }
    let structured = StructuredHypergraph::new(new_base, spec, values)?;
    let mut labels = vec![0; n];
    for v in 0..n {
        labels[perm[v]] = l.labeling.label(v);
    }
    LabeledHypergraph::new(structured, Labeling::new(labels)?)
}
