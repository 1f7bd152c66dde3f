//! Formal tensor words over one background generator.
//!
//! Evaluation targets a free symmetric strict monoidal setting: a word is an
//! ordered list of graded factors, tensor is concatenation, and two words
//! are isomorphic exactly when their factor multisets agree. Nothing is ever
//! contracted or rewritten, so normal forms are plain stable sorts.

use std::collections::BTreeMap;
use std::fmt;

/// A formal grading parameter. `H { k: 2, j: 1 }` is the genus parameter and
/// prints with its traditional symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parameter {
    /// Arity grading.
    T,
    /// Class (type) grading.
    O,
    /// Structure-slot grading.
    H { k: usize, j: usize },
}

pub const HBAR: Parameter = Parameter::H { k: 2, j: 1 };

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parameter::T => write!(f, "t"),
            Parameter::O => write!(f, "o"),
            p if *p == HBAR => write!(f, "ℏ"),
            Parameter::H { k, j } => write!(f, "h[{k},{j}]"),
        }
    }
}

/// Exponents of the formal parameters; absent entries are zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ParameterGrade {
    exponents: BTreeMap<Parameter, u64>,
}

impl ParameterGrade {
    pub fn trivial() -> Self {
        ParameterGrade::default()
    }

    pub fn with(mut self, parameter: Parameter, exponent: u64) -> Self {
        if exponent > 0 {
            *self.exponents.entry(parameter).or_insert(0) += exponent;
        }
        self
    }

    pub fn exponent(&self, parameter: Parameter) -> u64 {
        self.exponents.get(&parameter).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (Parameter, u64)> + '_ {
        self.exponents.iter().map(|(&p, &e)| (p, e))
    }

    pub fn add(&self, other: &ParameterGrade) -> ParameterGrade {
        let mut sum = self.clone();
        for (p, e) in other.exponents() {
            *sum.exponents.entry(p).or_insert(0) += e;
        }
        sum
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty()
    }
}

impl fmt::Display for ParameterGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, e) in self.exponents() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{p}^{e}")?;
            first = false;
        }
        Ok(())
    }
}

/// Vertex factors are dual, edge factors primal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variance {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FactorKind {
    Vertex,
    Edge,
}

/// The identity of one factor: where it came from and which rule data it
/// records. Two factors with equal symbols are interchangeable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorSymbol {
    pub kind: FactorKind,
    /// Decomposition class `i`.
    pub class_index: usize,
    /// Arity `j`; vertices use 1.
    pub arity: usize,
    pub degree: u64,
    /// Structure residues `(k, value)` in slot order.
    pub residues: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorFactor {
    pub symbol: FactorSymbol,
    pub variance: Variance,
    pub rank: u64,
    pub grade: ParameterGrade,
}

impl fmt::Display for TensorFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sym[i={},j={},d={}",
            self.symbol.class_index, self.symbol.arity, self.symbol.degree
        )?;
        if !self.symbol.residues.is_empty() {
            write!(f, ",s=(")?;
            for (pos, (k, v)) in self.symbol.residues.iter().enumerate() {
                if pos > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{k}:{v}")?;
            }
            write!(f, ")")?;
        }
        let variance = match self.variance {
            Variance::Primal => "primal",
            Variance::Dual => "dual",
        };
        write!(f, "]{{{variance},{}}}", self.rank)?;
        if !self.grade.is_trivial() {
            write!(f, "·{}", self.grade)?;
        }
        Ok(())
    }
}

/// An ordered tensor word; the empty word is the unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AnalyticExpression {
    word: Vec<TensorFactor>,
}

impl AnalyticExpression {
    pub fn unit() -> Self {
        AnalyticExpression::default()
    }

    /// Builds a word, dropping rank-0 factors (they denote the unit).
    pub fn from_factors(factors: Vec<TensorFactor>) -> Self {
        AnalyticExpression {
            word: factors.into_iter().filter(|f| f.rank > 0).collect(),
        }
    }

    pub fn factors(&self) -> &[TensorFactor] {
        &self.word
    }

    pub fn is_unit(&self) -> bool {
        self.word.is_empty()
    }

    pub fn primal_rank(&self) -> u64 {
        self.word
            .iter()
            .filter(|f| f.variance == Variance::Primal)
            .map(|f| f.rank)
            .sum()
    }

    pub fn dual_rank(&self) -> u64 {
        self.word
            .iter()
            .filter(|f| f.variance == Variance::Dual)
            .map(|f| f.rank)
            .sum()
    }

    pub fn total_grade(&self) -> ParameterGrade {
        self.word
            .iter()
            .fold(ParameterGrade::trivial(), |acc, f| acc.add(&f.grade))
    }
}

impl fmt::Display for AnalyticExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        for (pos, factor) in self.word.iter().enumerate() {
            if pos > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// Concatenates two words; ranks and grades add, the unit is neutral.
pub fn tensor(a: &AnalyticExpression, b: &AnalyticExpression) -> AnalyticExpression {
    let mut word = a.word.clone();
    word.extend(b.word.iter().cloned());
    AnalyticExpression { word }
}

/// Stable sort by factor key; idempotent, and equal normal forms mean the
/// words are isomorphic in the symmetric setting.
pub fn normal_form(a: &AnalyticExpression) -> AnalyticExpression {
    let mut word = a.word.clone();
    word.sort();
    AnalyticExpression { word }
}

/// A permutation witnessing that `a` and `b` are the same multiset of
/// factors: entry `pos` names the position in `a` sent to position `pos` of
/// `b`. Absent when the multisets differ.
pub fn symmetric_iso(a: &AnalyticExpression, b: &AnalyticExpression) -> Option<Vec<usize>> {
    if a.word.len() != b.word.len() {
        return None;
    }
    let mut pool: BTreeMap<&TensorFactor, Vec<usize>> = BTreeMap::new();
    for (pos, factor) in a.word.iter().enumerate().rev() {
        pool.entry(factor).or_default().push(pos);
    }
    let mut witness = Vec::with_capacity(b.word.len());
    for factor in &b.word {
        let positions = pool.get_mut(factor)?;
        witness.push(positions.pop()?);
    }
    Some(witness)
}

/// Applies a `symmetric_iso` witness: position `pos` of the result is factor
/// `witness[pos]` of `a`.
pub fn apply_permutation(a: &AnalyticExpression, witness: &[usize]) -> AnalyticExpression {
    AnalyticExpression {
        word: witness.iter().map(|&pos| a.word[pos].clone()).collect(),
    }
}

/// Drops the word entirely when any factor carries a parameter exponent past
/// its cutoff (that series coefficient is zero); otherwise returns the word
/// unchanged. Parameters without a cutoff are unconstrained.
pub fn truncate(
    a: &AnalyticExpression,
    cutoffs: &BTreeMap<Parameter, u64>,
) -> Option<AnalyticExpression> {
    for factor in &a.word {
        for (p, e) in factor.grade.exponents() {
            if let Some(&max) = cutoffs.get(&p) {
                if e > max {
                    return None;
                }
            }
        }
    }
    Some(a.clone())
}

/// A stable byte serialization of a word; equal words encode equally, so
/// hashing the encoding of a normal form fingerprints the isomorphism class.
pub fn encode(a: &AnalyticExpression) -> Vec<u8> {
    fn push(bytes: &mut Vec<u8>, value: u64) {
        bytes.extend_from_slice(&value.to_be_bytes());
    }
    let mut bytes = Vec::new();
    push(&mut bytes, a.word.len() as u64);
    for factor in &a.word {
        bytes.push(match factor.symbol.kind {
            FactorKind::Vertex => 0,
            FactorKind::Edge => 1,
        });
        push(&mut bytes, factor.symbol.class_index as u64);
        push(&mut bytes, factor.symbol.arity as u64);
        push(&mut bytes, factor.symbol.degree);
        push(&mut bytes, factor.symbol.residues.len() as u64);
        for &(k, v) in &factor.symbol.residues {
            push(&mut bytes, k as u64);
            push(&mut bytes, v);
        }
        bytes.push(match factor.variance {
            Variance::Primal => 0,
            Variance::Dual => 1,
        });
        push(&mut bytes, factor.rank);
        let grade: Vec<(Parameter, u64)> = factor.grade.exponents().collect();
        push(&mut bytes, grade.len() as u64);
        for (p, e) in grade {
            match p {
                Parameter::T => bytes.push(0),
                Parameter::O => bytes.push(1),
                Parameter::H { k, j } => {
                    bytes.push(2);
                    push(&mut bytes, k as u64);
                    push(&mut bytes, j as u64);
                }
            }
            push(&mut bytes, e);
        }
    }
    bytes
}

/// The order of a balanced word: `k` when primal and dual ranks both equal
/// `k`, absent when unbalanced.
pub fn order_of(a: &AnalyticExpression) -> Option<u64> {
    let primal = a.primal_rank();
    if primal == a.dual_rank() {
        Some(primal)
    } else {
        None
    }
}
