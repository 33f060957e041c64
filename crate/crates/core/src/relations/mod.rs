//! Relations between states, partitions and the lifting of relations to
//! distributions.

mod file;
mod lifting;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::StateId;

pub use file::{format_partition, format_relation, parse_relation, RelationFile};
pub use lifting::{lift_check, WeightingFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),
    #[error("relation file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A relation `R ⊆ X × Y` together with its universes `X` and `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRelation<T: Ord = StateId> {
    left: BTreeSet<T>,
    right: BTreeSet<T>,
    pairs: BTreeSet<(T, T)>,
}

impl<T: Ord + Clone> BinaryRelation<T> {
    pub fn empty(left: impl IntoIterator<Item = T>, right: impl IntoIterator<Item = T>) -> Self {
        BinaryRelation {
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
            pairs: BTreeSet::new(),
        }
    }

    pub fn from_pairs(
        left: impl IntoIterator<Item = T>,
        right: impl IntoIterator<Item = T>,
        pairs: impl IntoIterator<Item = (T, T)>,
    ) -> Result<Self, RelationError> {
        let mut r = Self::empty(left, right);
        for (x, y) in pairs {
            r.insert(x, y)?;
        }
        Ok(r)
    }

    pub fn identity(universe: impl IntoIterator<Item = T>) -> Self {
        let u: BTreeSet<T> = universe.into_iter().collect();
        BinaryRelation {
            pairs: u.iter().map(|x| (x.clone(), x.clone())).collect(),
            left: u.clone(),
            right: u,
        }
    }

    pub fn full(left: impl IntoIterator<Item = T>, right: impl IntoIterator<Item = T>) -> Self {
        let mut r = Self::empty(left, right);
        for x in &r.left {
            for y in &r.right {
                r.pairs.insert((x.clone(), y.clone()));
            }
        }
        r
    }

    pub fn insert(&mut self, x: T, y: T) -> Result<(), RelationError> {
        if !self.left.contains(&x) || !self.right.contains(&y) {
            return Err(RelationError::UniverseMismatch("pair outside the universes".into()));
        }
        self.pairs.insert((x, y));
        Ok(())
    }

    pub fn remove(&mut self, x: &T, y: &T) -> bool {
        self.pairs.remove(&(x.clone(), y.clone()))
    }

    pub fn contains(&self, x: &T, y: &T) -> bool {
        self.pairs.contains(&(x.clone(), y.clone()))
    }

    pub fn left(&self) -> &BTreeSet<T> {
        &self.left
    }

    pub fn right(&self) -> &BTreeSet<T> {
        &self.right
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(T, T)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `{y | x R y}` in order.
    pub fn image(&self, x: &T) -> Vec<T> {
        self.pairs
            .iter()
            .skip_while(|(a, _)| a < x)
            .take_while(|(a, _)| a == x)
            .map(|(_, b)| b.clone())
            .collect()
    }

    /// `{x | x R y}` in order.
    pub fn preimage(&self, y: &T) -> Vec<T> {
        self.pairs.iter().filter(|(_, b)| b == y).map(|(a, _)| a.clone()).collect()
    }

    /// `y ↦ {x | x R y}` for every `y` with a nonempty preimage.
    pub fn preimages(&self) -> BTreeMap<T, Vec<T>> {
        let mut m: BTreeMap<T, Vec<T>> = BTreeMap::new();
        for (x, y) in &self.pairs {
            m.entry(y.clone()).or_default().push(x.clone());
        }
        m
    }

    /// `x ↦ {y | x R y}` for every `x` with a nonempty image.
    pub fn images(&self) -> BTreeMap<T, Vec<T>> {
        let mut m: BTreeMap<T, Vec<T>> = BTreeMap::new();
        for (x, y) in &self.pairs {
            m.entry(x.clone()).or_default().push(y.clone());
        }
        m
    }

    pub fn inverse(&self) -> Self {
        BinaryRelation {
            left: self.right.clone(),
            right: self.left.clone(),
            pairs: self.pairs.iter().map(|(x, y)| (y.clone(), x.clone())).collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    /// Pairs of `self` also in `other`; universes are those of `self`.
    pub fn intersection(&self, other: &Self) -> Self {
        BinaryRelation {
            left: self.left.clone(),
            right: self.right.clone(),
            pairs: self.pairs.intersection(&other.pairs).cloned().collect(),
        }
    }

    /// Keeps pairs `(x, y)` with `keep(x, y)`.
    pub fn filter(&self, keep: impl Fn(&T, &T) -> bool) -> Self {
        BinaryRelation {
            left: self.left.clone(),
            right: self.right.clone(),
            pairs: self.pairs.iter().filter(|(x, y)| keep(x, y)).cloned().collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        BinaryRelation {
            left: self.left.union(&other.left).cloned().collect(),
            right: self.right.union(&other.right).cloned().collect(),
            pairs: self.pairs.union(&other.pairs).cloned().collect(),
        }
    }

    /// `R × S = {((x, z), (y, w)) | x R y, z S w}`.
    pub fn product<U: Ord + Clone>(&self, other: &BinaryRelation<U>) -> BinaryRelation<(T, U)> {
        let cross = |a: &BTreeSet<T>, b: &BTreeSet<U>| -> BTreeSet<(T, U)> {
            a.iter().flat_map(|x| b.iter().map(move |z| (x.clone(), z.clone()))).collect()
        };
        let mut pairs = BTreeSet::new();
        for (x, y) in &self.pairs {
            for (z, w) in &other.pairs {
                pairs.insert(((x.clone(), z.clone()), (y.clone(), w.clone())));
            }
        }
        BinaryRelation {
            left: cross(&self.left, &other.left),
            right: cross(&self.right, &other.right),
            pairs,
        }
    }

    pub fn is_reflexive(&self) -> bool {
        self.left == self.right && self.left.iter().all(|x| self.contains(x, x))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs.iter().all(|(x, y)| self.contains(y, x))
    }

    pub fn is_transitive(&self) -> bool {
        self.pairs
            .iter()
            .all(|(x, y)| self.image(y).iter().all(|z| self.contains(x, z)))
    }
}

/// `R ∘ S = {(x, z) | ∃y. x R y ∧ y S z}`. The middle universes must agree.
pub fn relation_compose<T: Ord + Clone>(
    r: &BinaryRelation<T>,
    s: &BinaryRelation<T>,
) -> Result<BinaryRelation<T>, RelationError> {
    if r.right != s.left {
        return Err(RelationError::UniverseMismatch(
            "right universe of the first relation differs from left universe of the second".into(),
        ));
    }
    let mut out = BinaryRelation::empty(r.left.iter().cloned(), s.right.iter().cloned());
    for (x, y) in &r.pairs {
        for z in s.image(y) {
            out.pairs.insert((x.clone(), z));
        }
    }
    Ok(out)
}

/// `R × I_Z`, relating `(x, z)` to `(y, z)` whenever `x R y`.
pub fn cross_identity<T: Ord + Clone, U: Ord + Clone>(
    r: &BinaryRelation<T>,
    z: impl IntoIterator<Item = U>,
) -> BinaryRelation<(T, U)> {
    r.product(&BinaryRelation::identity(z))
}

/// A partition of a finite set of states. Members are sorted and classes
/// are ordered by their least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    classes: Vec<Vec<StateId>>,
    class_of: BTreeMap<StateId, usize>,
}

impl Partition {
    pub fn from_classes(classes: impl IntoIterator<Item = Vec<StateId>>) -> Result<Self, RelationError> {
        let mut cs: Vec<Vec<StateId>> = classes
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        cs.sort();
        let mut class_of = BTreeMap::new();
        for (i, c) in cs.iter().enumerate() {
            for &s in c {
                if class_of.insert(s, i).is_some() {
                    return Err(RelationError::UniverseMismatch(format!("state {s} in two classes")));
                }
            }
        }
        Ok(Partition { classes: cs, class_of })
    }

    /// A single class holding every state of `universe`.
    pub fn trivial(universe: impl IntoIterator<Item = StateId>) -> Self {
        Self::from_classes([universe.into_iter().collect()]).expect("one class is a partition")
    }

    pub fn discrete(universe: impl IntoIterator<Item = StateId>) -> Self {
        Self::from_classes(universe.into_iter().map(|s| vec![s])).expect("singletons are a partition")
    }

    pub fn classes(&self) -> &[Vec<StateId>] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &[StateId] {
        &self.classes[i]
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_of(&self, s: StateId) -> Option<usize> {
        self.class_of.get(&s).copied()
    }

    /// Members of the class of `s`.
    pub fn class_members(&self, s: StateId) -> &[StateId] {
        self.class_of(s).map(|i| self.classes[i].as_slice()).unwrap_or(&[])
    }

    pub fn same_class(&self, a: StateId, b: StateId) -> bool {
        match (self.class_of(a), self.class_of(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    pub fn universe(&self) -> impl Iterator<Item = StateId> + '_ {
        self.class_of.keys().copied()
    }

    /// Replaces class `i` by `part` and its complement within the class.
    pub fn split(&self, i: usize, part: &[StateId]) -> Partition {
        let inside: BTreeSet<StateId> = part.iter().copied().collect();
        let mut classes: Vec<Vec<StateId>> = Vec::with_capacity(self.classes.len() + 1);
        for (k, c) in self.classes.iter().enumerate() {
            if k == i {
                let (a, b): (Vec<StateId>, Vec<StateId>) = c.iter().partition(|s| inside.contains(s));
                classes.push(a);
                classes.push(b);
            } else {
                classes.push(c.clone());
            }
        }
        Partition::from_classes(classes).expect("splitting keeps classes disjoint")
    }

    /// The equivalence relation induced on the universe.
    pub fn as_relation(&self) -> BinaryRelation {
        let mut r = BinaryRelation::empty(self.universe(), self.universe());
        for c in &self.classes {
            for &x in c {
                for &y in c {
                    r.pairs.insert((x, y));
                }
            }
        }
        r
    }
}

/// Equivalence closure of `p ∪ q` over the union of both universes.
pub fn equivalence_compose(p: &Partition, q: &Partition) -> Partition {
    let universe: Vec<StateId> = p.universe().chain(q.universe()).collect::<BTreeSet<_>>().into_iter().collect();
    let pos: BTreeMap<StateId, usize> = universe.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut parent: Vec<usize> = (0..universe.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in p.classes().iter().chain(q.classes()) {
        let root = find(&mut parent, pos[&c[0]]);
        for s in &c[1..] {
            let r = find(&mut parent, pos[s]);
            if r != root {
                parent[r] = root;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<StateId>> = BTreeMap::new();
    for (i, s) in universe.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(*s);
    }
    Partition::from_classes(groups.into_values()).expect("union-find yields disjoint classes")
}
