//! Decision procedures for the bisimulation relations between two automata,
//! all computed on their disjoint union.

mod minor;
mod quotient;
mod report;
mod verify;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use thiserror::Error;

use crate::flownet::FlowError;
use crate::model::{disjoint_union, Cpa, DisjointUnion, ModelError, Rational, StateId};
use crate::relations::{BinaryRelation, Partition};

pub use minor::decide_minor_weak;
pub use quotient::{find_split, quotient, quotient_with, refine, Split, Stats};
pub use verify::verify_witness;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("refinement would leave an empty class")]
    DegenerateSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Strong,
    StrongProb,
    WeakProb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostMode {
    Plain,
    Preserving,
    Minor,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::Strong => "strong",
            RelationKind::StrongProb => "strong-prob",
            RelationKind::WeakProb => "weak-prob",
        })
    }
}

impl FromStr for RelationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strong" => Ok(RelationKind::Strong),
            "strong-prob" => Ok(RelationKind::StrongProb),
            "weak-prob" => Ok(RelationKind::WeakProb),
            _ => Err(format!("unknown relation `{s}`")),
        }
    }
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::Plain => "none",
            CostMode::Preserving => "preserving",
            CostMode::Minor => "minor",
        })
    }
}

impl FromStr for CostMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(CostMode::Plain),
            "preserving" => Ok(CostMode::Preserving),
            "minor" => Ok(CostMode::Minor),
            _ => Err(format!("unknown cost mode `{s}`")),
        }
    }
}

/// A challenger transition that some defender could not match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub transition: usize,
    pub defender: StateId,
    pub reason: String,
}

/// One evaluation of a cost-relation pair against a challenger transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorStep {
    pub transition: usize,
    pub defender: StateId,
    /// 1 when the challenger target can be extended to border states, 2
    /// otherwise; 0 for the strong variants.
    pub condition: u8,
    /// Minimal cost of extending the challenger target to border states.
    pub border_cost: Option<Rational>,
    /// Cost the defender has to stay within.
    pub bound: Rational,
    /// Minimal defender cost, when a linear program was solved.
    pub defender_cost: Option<Rational>,
    pub passed: bool,
}

/// Outcome of a decision procedure. State ids refer to `union`, whose left
/// operand is the first automaton passed in.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub kind: RelationKind,
    pub mode: CostMode,
    pub holds: bool,
    pub union: DisjointUnion,
    pub partition: Partition,
    /// Pairs `(s2, s1)` of the cost relation, for minor modes.
    pub cost_relation: Option<BinaryRelation>,
    pub diagnostics: Vec<Diagnostic>,
    pub removed_pairs: Vec<(StateId, StateId)>,
    pub steps: Vec<MinorStep>,
    pub lp_solved: usize,
}

impl Verdict {
    /// The relations justifying the verdict, when it holds.
    pub fn witness(&self) -> Option<(&Partition, Option<&BinaryRelation>)> {
        self.holds.then(|| (&self.partition, self.cost_relation.as_ref()))
    }

    /// Human-readable description of a challenger transition.
    pub fn describe_transition(&self, tr: usize) -> String {
        let cpa = &self.union.cpa;
        let t = cpa.transition(tr);
        format!("{} -{}-> #{tr}", cpa.state_name(t.source), t.action)
    }
}

/// States enabling an external transition or one that may leave their class.
pub fn border_states(cpa: &Cpa, w: &Partition) -> BTreeSet<StateId> {
    let one = Rational::one();
    let mut out = BTreeSet::new();
    for tr in cpa.transitions() {
        if cpa.alphabet().is_external(&tr.action) {
            out.insert(tr.source);
            continue;
        }
        let class = w.class_members(tr.source);
        let inside: Rational = class.iter().map(|s| tr.target.prob(s)).sum();
        if inside < one {
            out.insert(tr.source);
        }
    }
    out
}

/// Decides `kind` with `mode`. For `CostMode::Minor` the question is
/// whether `a1` is the cheaper side, with challengers drawn from `a2`.
pub fn decide(kind: RelationKind, mode: CostMode, a1: &Cpa, a2: &Cpa) -> Result<Verdict, BisimError> {
    match (kind, mode) {
        (RelationKind::WeakProb, CostMode::Minor) => decide_minor_weak(a1, a2),
        (_, CostMode::Minor) => minor::decide_minor_strong(kind, a1, a2),
        _ => decide_symmetric(kind, mode, a1, a2),
    }
}

fn decide_symmetric(kind: RelationKind, mode: CostMode, a1: &Cpa, a2: &Cpa) -> Result<Verdict, BisimError> {
    let union = disjoint_union(a1, a2)?;
    let stats = Stats::default();
    let (partition, diagnostics) = quotient_with(&union.cpa, kind, mode, &stats)?;
    let holds = partition.same_class(union.starts.0, union.starts.1);
    Ok(Verdict {
        kind,
        mode,
        holds,
        union,
        partition,
        cost_relation: None,
        diagnostics,
        removed_pairs: Vec::new(),
        steps: Vec::new(),
        lp_solved: stats.lps(),
    })
}

pub fn decide_weak_prob(a1: &Cpa, a2: &Cpa) -> Result<Verdict, BisimError> {
    decide_symmetric(RelationKind::WeakProb, CostMode::Plain, a1, a2)
}

pub fn decide_cost_preserving_weak(a1: &Cpa, a2: &Cpa) -> Result<Verdict, BisimError> {
    decide_symmetric(RelationKind::WeakProb, CostMode::Preserving, a1, a2)
}

pub fn decide_strong(a1: &Cpa, a2: &Cpa, mode: CostMode) -> Result<Verdict, BisimError> {
    decide(RelationKind::Strong, mode, a1, a2)
}

pub fn decide_strong_prob(a1: &Cpa, a2: &Cpa, mode: CostMode) -> Result<Verdict, BisimError> {
    decide(RelationKind::StrongProb, mode, a1, a2)
}
