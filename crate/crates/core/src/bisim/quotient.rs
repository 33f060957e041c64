//! Partition refinement: the coarsest partition of the union's states in
//! which every transition is matched by every class-mate.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{BisimError, CostMode, Diagnostic, RelationKind};
use crate::flownet::{
    add_cost_constraint, build_feasibility_lp, build_network, build_strongprob_lp, solve, CostBound, FlowError,
    WeakLabel,
};
use crate::model::{Cpa, Distribution, Rational, StateId};
use crate::relations::{BinaryRelation, Partition};

/// Counters shared by the checks of one decision.
#[derive(Debug, Default)]
pub struct Stats {
    lps: AtomicUsize,
}

impl Stats {
    pub fn lps(&self) -> usize {
        self.lps.load(Ordering::Relaxed)
    }

    pub(crate) fn count_lp(&self) {
        self.lps.fetch_add(1, Ordering::Relaxed);
    }
}

/// A challenger transition and the class-mates of its source that cannot
/// match it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub class: usize,
    pub transition: usize,
    pub failing: Vec<StateId>,
}

/// Mass of `d` on each class it touches.
pub(crate) fn project(w: &Partition, d: &Distribution) -> BTreeMap<usize, Rational> {
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    for (s, p) in d.iter() {
        let c = w.class_of(*s).expect("partition covers the automaton");
        *out.entry(c).or_insert_with(Rational::zero) += p;
    }
    out
}

fn same_projection(w: &Partition, d: &Distribution, proj: &BTreeMap<usize, Rational>) -> bool {
    proj.iter()
        .all(|(c, p)| w.class(*c).iter().map(|s| d.prob(s)).sum::<Rational>() == *p)
}

/// Moves the mass of each class onto its least member and relates that
/// member to the whole class. Lifting through the result is lifting
/// through the equivalence, with far fewer pairs.
pub(crate) fn representative(w: &Partition, proj: &BTreeMap<usize, Rational>) -> (Distribution, BinaryRelation) {
    let reps: Vec<StateId> = proj.keys().map(|c| w.class(*c)[0]).collect();
    let members: Vec<StateId> = proj.keys().flat_map(|c| w.class(*c).iter().copied()).collect();
    let mut rel = BinaryRelation::empty(reps.iter().copied(), members);
    for (c, rep) in proj.keys().zip(&reps) {
        for &v in w.class(*c) {
            rel.insert(*rep, v).expect("pair within the universes");
        }
    }
    let mu = Distribution::from_pairs(reps.into_iter().zip(proj.values().cloned())).expect("projection of a distribution");
    (mu, rel)
}

type Key = (StateId, String, Option<Rational>, Vec<(Vec<StateId>, Rational)>);

/// Step test with a cache that stays valid across refinements: a check
/// depends only on the defender, the label and the classes hit by the
/// challenger target together with their masses.
pub(crate) struct Checker<'a> {
    cpa: &'a Cpa,
    kind: RelationKind,
    preserving: bool,
    stats: &'a Stats,
    cache: Mutex<HashMap<Key, bool>>,
}

impl<'a> Checker<'a> {
    pub fn new(cpa: &'a Cpa, kind: RelationKind, mode: CostMode, stats: &'a Stats) -> Self {
        Checker {
            cpa,
            kind,
            preserving: mode == CostMode::Preserving,
            stats,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Whether `t` matches transition `tr` up to `w`.
    pub fn matches(&self, w: &Partition, tr: usize, t: StateId) -> Result<bool, BisimError> {
        let trn = self.cpa.transition(tr);
        let proj = project(w, &trn.target);
        let label = match self.kind {
            RelationKind::WeakProb => WeakLabel::of(self.cpa.alphabet(), &trn.action).to_string(),
            _ => trn.action.clone(),
        };
        let key = (
            t,
            label,
            self.preserving.then(|| trn.cost.clone()),
            proj.iter().map(|(c, p)| (w.class(*c).to_vec(), p.clone())).collect(),
        );
        if let Some(&b) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(b);
        }
        let b = self.evaluate(w, tr, t, &proj)?;
        self.cache.lock().expect("cache lock").insert(key, b);
        Ok(b)
    }

    fn evaluate(&self, w: &Partition, tr: usize, t: StateId, proj: &BTreeMap<usize, Rational>) -> Result<bool, BisimError> {
        let cpa = self.cpa;
        let trn = cpa.transition(tr);
        let cost_ok = |c: &Rational| !self.preserving || *c == trn.cost;
        let strong_match = cpa.outgoing(t).iter().map(|&i| cpa.transition(i)).any(|d| {
            d.action == trn.action && cost_ok(&d.cost) && same_projection(w, &d.target, proj)
        });
        match self.kind {
            RelationKind::Strong => Ok(strong_match),
            RelationKind::StrongProb => {
                if strong_match {
                    return Ok(true);
                }
                let (mu, rel) = representative(w, proj);
                let bound = self.preserving.then_some((&trn.cost, CostBound::Equal));
                match build_strongprob_lp(cpa, t, &trn.action, &mu, &rel, bound) {
                    Err(FlowError::NoSuchTransitions) => Ok(false),
                    Err(e) => Err(e.into()),
                    Ok(lp) => {
                        self.stats.count_lp();
                        Ok(solve(&lp)?.is_feasible())
                    }
                }
            }
            RelationKind::WeakProb => {
                let label = WeakLabel::of(cpa.alphabet(), &trn.action);
                let home = w.class_of(t).expect("partition covers the automaton");
                if label == WeakLabel::Tau
                    && proj.len() == 1
                    && proj.get(&home).is_some_and(|p| p.is_one())
                    && cost_ok(&Rational::zero())
                {
                    return Ok(true);
                }
                let direct = cpa.outgoing(t).iter().map(|&i| cpa.transition(i)).any(|d| {
                    WeakLabel::of(cpa.alphabet(), &d.action) == label
                        && cost_ok(&d.cost)
                        && same_projection(w, &d.target, proj)
                });
                if direct {
                    return Ok(true);
                }
                let (mu, rel) = representative(w, proj);
                let net = build_network(cpa, t, &label, &mu, &rel)?;
                let mut lp = build_feasibility_lp(&net);
                if self.preserving {
                    add_cost_constraint(&mut lp, &trn.cost, CostBound::Equal);
                }
                self.stats.count_lp();
                Ok(solve(&lp)?.is_feasible())
            }
        }
    }

    fn split_for(&self, w: &Partition, tr: usize) -> Result<Option<Split>, BisimError> {
        let s = self.cpa.transition(tr).source;
        let class = w.class_of(s).expect("partition covers the automaton");
        let mut failing = Vec::new();
        for &t in w.class(class) {
            if t != s && !self.matches(w, tr, t)? {
                failing.push(t);
            }
        }
        Ok((!failing.is_empty()).then_some(Split {
            class,
            transition: tr,
            failing,
        }))
    }

    /// First transition in declaration order that some class-mate of its
    /// source cannot match.
    pub fn find_split(&self, w: &Partition) -> Result<Option<Split>, BisimError> {
        let found = (0..self.cpa.transitions().len())
            .into_par_iter()
            .map(|tr| self.split_for(w, tr))
            .find_map_first(|r| match r {
                Ok(None) => None,
                other => Some(other),
            });
        found.unwrap_or(Ok(None))
    }

    pub fn refine(&self, w: &Partition, split: &Split) -> Result<Partition, BisimError> {
        let s = self.cpa.transition(split.transition).source;
        let mut passing = Vec::new();
        for &t in w.class(split.class) {
            if t == s || self.matches(w, split.transition, t)? {
                passing.push(t);
            }
        }
        if passing.len() == w.class(split.class).len() {
            return Err(BisimError::DegenerateSplit);
        }
        Ok(w.split(split.class, &passing))
    }
}

/// Coarsest partition for `kind` (with `CostMode::Preserving`, also
/// matching costs exactly; other modes use the plain test). Every split
/// performed is reported as diagnostics.
pub fn quotient_with(
    cpa: &Cpa,
    kind: RelationKind,
    mode: CostMode,
    stats: &Stats,
) -> Result<(Partition, Vec<Diagnostic>), BisimError> {
    let checker = Checker::new(cpa, kind, mode, stats);
    let mut w = Partition::trivial(0..cpa.num_states());
    let mut diagnostics = Vec::new();
    while let Some(split) = checker.find_split(&w)? {
        for &t in &split.failing {
            diagnostics.push(Diagnostic {
                transition: split.transition,
                defender: t,
                reason: format!("no matching {kind} transition"),
            });
        }
        w = checker.refine(&w, &split)?;
    }
    Ok((w, diagnostics))
}

/// Coarsest weak probabilistic bisimulation partition of `cpa`.
pub fn quotient(cpa: &Cpa) -> Result<Partition, BisimError> {
    Ok(quotient_with(cpa, RelationKind::WeakProb, CostMode::Plain, &Stats::default())?.0)
}

/// One FindSplit scan over `w` with the weak probabilistic test.
pub fn find_split(cpa: &Cpa, w: &Partition) -> Result<Option<Split>, BisimError> {
    let stats = Stats::default();
    Checker::new(cpa, RelationKind::WeakProb, CostMode::Plain, &stats).find_split(w)
}

/// Splits the class of `split` into the states matching its transition and
/// the rest.
pub fn refine(w: &Partition, split: &Split, cpa: &Cpa) -> Result<Partition, BisimError> {
    let stats = Stats::default();
    Checker::new(cpa, RelationKind::WeakProb, CostMode::Plain, &stats).refine(w, split)
}
