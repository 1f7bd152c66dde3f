//! Superposition of tensor words and deck-level evaluation digests.
//!
//! A word is a superposition of a list of factors when it is isomorphic to
//! their tensor product. Evaluating every card of a labeled hypergraph and
//! tensoring the results gives a word whose normal-form digest is a deck
//! invariant; sweeping a class and grouping by that digest measures how much
//! of the deck an evaluation rule retains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::canon::EnumerationOptions;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::feynman::{evaluate, FeynmanRule, SystemChoice};
use crate::reconstruction::{
    delete_vertex_labeled, labeled_members, weak_deck_labeled, ClassSpec, CollisionGroup, Member,
};
use crate::structures::LabeledHypergraph;
use crate::symcontext::{
    encode, normal_form, symmetric_iso, tensor, AnalyticExpression,
};

/// A verified decomposition of `target` into the given factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpositionWitness {
    pub target: AnalyticExpression,
    pub factors: Vec<AnalyticExpression>,
    /// Applying this to `target` yields the factors tensored left to right.
    pub permutation: Vec<usize>,
}

/// Checks whether `target` is the superposition of `factors`: present iff
/// the factor multisets of `target` and of the fold of `factors` agree.
/// Unit factors pad a superposition to any order.
pub fn superpose_check(
    target: &AnalyticExpression,
    factors: &[AnalyticExpression],
) -> Option<SuperpositionWitness> {
    let folded = factors
        .iter()
        .fold(AnalyticExpression::unit(), |acc, f| tensor(&acc, f));
    symmetric_iso(target, &folded).map(|permutation| SuperpositionWitness {
        target: target.clone(),
        factors: factors.to_vec(),
        permutation,
    })
}

/// Fingerprint of a word's isomorphism class: a hash over the stable
/// encoding of its normal form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpressionDigest(pub [u8; 32]);

impl fmt::Display for ExpressionDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for byte in self.0 {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

pub fn expression_digest(a: &AnalyticExpression) -> ExpressionDigest {
    let mut hasher = Sha256::new();
    hasher.update(encode(&normal_form(a)));
    ExpressionDigest(hasher.finalize().into())
}

/// The tensor product of the evaluations of all cards, in deleted-label
/// order. Each card is decomposed afresh by `choice`.
pub fn card_tensor(
    l: &LabeledHypergraph,
    choice: SystemChoice,
    rule: &FeynmanRule,
) -> Result<AnalyticExpression> {
    let n = l.base().vertex_count();
    if n == 0 {
        return Err(Error::EmptyHypergraph);
    }
    let mut word = AnalyticExpression::unit();
    for label in 0..n {
        let x = l.labeling.vertex_with_label(label);
        let card = delete_vertex_labeled(l, x)?;
        let d = choice.assign(&card.structured)?;
        let z = evaluate(&card.structured, Some(&card.labeling), &d, rule)?;
        word = tensor(&word, &z);
    }
    Ok(word)
}

/// Digest of the normal form of `card_tensor`; equal for labeled-isomorphic
/// inputs, and for any two inputs with equal labeled decks.
pub fn card_tensor_digest(
    l: &LabeledHypergraph,
    choice: SystemChoice,
    rule: &FeynmanRule,
) -> Result<ExpressionDigest> {
    Ok(expression_digest(&card_tensor(l, choice, rule)?))
}

/// Outcome of sweeping a labeled class: members grouped by card-tensor
/// digest and, independently, by weak-deck code, plus whether the two
/// partitions of the class coincide.
#[derive(Debug, Clone)]
pub struct CardTensorReport {
    pub vertex_count: usize,
    pub class_size: usize,
    /// Digest classes with at least two members.
    pub digest_groups: Vec<CollisionGroup>,
    /// Weak-deck classes with at least two members.
    pub weak_deck_groups: Vec<CollisionGroup>,
    /// True when the digest partition equals the weak-deck partition,
    /// singletons included.
    pub partitions_agree: bool,
    pub elapsed: Duration,
}

/// Sweeps every labeled member of the class at `n` vertices, evaluates the
/// card tensor of each, and cross-tabulates digest classes against weak-deck
/// classes.
pub fn verify_card_tensor_injectivity(
    class: &ClassSpec,
    n: usize,
    choice: SystemChoice,
    rule: &FeynmanRule,
    options: EnumerationOptions,
    mode: ExecMode,
) -> Result<CardTensorReport> {
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
    let members = labeled_members(class, n)?;
    let class_size = members.len();
    let keyed: Vec<Result<(ExpressionDigest, Vec<u8>, Member)>> =
        mode.map_vec(members, |member| {
            let labeling = member.labeling.clone().ok_or(Error::MissingLabeling)?;
            let labeled = LabeledHypergraph::new(member.structured.clone(), labeling)?;
            let digest = card_tensor_digest(&labeled, choice, rule)?;
            let weak = weak_deck_labeled(&labeled)?.as_bytes().to_vec();
            Ok((digest, weak, member))
        });

    let mut by_digest: BTreeMap<ExpressionDigest, Vec<usize>> = BTreeMap::new();
    let mut by_weak: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    let mut members = Vec::with_capacity(class_size);
    for (idx, entry) in keyed.into_iter().enumerate() {
        let (digest, weak, member) = entry?;
        by_digest.entry(digest).or_default().push(idx);
        by_weak.entry(weak).or_default().push(idx);
        members.push(member);
    }

    let partitions_agree = {
        let digest_blocks: BTreeSet<&Vec<usize>> = by_digest.values().collect();
        let weak_blocks: BTreeSet<&Vec<usize>> = by_weak.values().collect();
        digest_blocks == weak_blocks
    };

    let collision_groups = |blocks: Vec<([u8; 32], Vec<usize>)>| -> Vec<CollisionGroup> {
        let mut groups: Vec<CollisionGroup> = blocks
            .into_iter()
            .filter(|(_, idxs)| idxs.len() >= 2)
            .map(|(deck_digest, idxs)| CollisionGroup {
                deck_digest,
                members: idxs.iter().map(|&i| members[i].clone()).collect(),
            })
            .collect();
        groups.sort_by_key(|g| g.deck_digest);
        groups
    };
    let digest_groups = collision_groups(
        by_digest
            .iter()
            .map(|(digest, idxs)| (digest.0, idxs.clone()))
            .collect(),
    );
    let weak_deck_groups = collision_groups(
        by_weak
            .iter()
            .map(|(key, idxs)| {
                let mut hasher = Sha256::new();
                hasher.update(key);
                (hasher.finalize().into(), idxs.clone())
            })
            .collect(),
    );

    Ok(CardTensorReport {
        vertex_count: n,
        class_size,
        digest_groups,
        weak_deck_groups,
        partitions_agree,
        elapsed: started.elapsed(),
    })
}
