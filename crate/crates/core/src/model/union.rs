use super::{Alphabet, Cpa, ModelError, StateId, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `A1 ⊎ A2` with states renamed by automaton. Left states come first, so
/// the provenance of a state is decided by its index. The inner automaton's
/// start is the left start; the union itself has two distinguished starts.
#[derive(Debug, Clone)]
pub struct DisjointUnion {
    pub cpa: Cpa,
    pub left_len: usize,
    pub starts: (StateId, StateId),
}

impl DisjointUnion {
    pub fn side(&self, s: StateId) -> Side {
        if s < self.left_len {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Index of `s` in its source automaton.
    pub fn local(&self, s: StateId) -> StateId {
        if s < self.left_len {
            s
        } else {
            s - self.left_len
        }
    }

    pub fn left_states(&self) -> std::ops::Range<StateId> {
        0..self.left_len
    }

    pub fn right_states(&self) -> std::ops::Range<StateId> {
        self.left_len..self.cpa.num_states()
    }

    /// Union-level id of a state of the left or right operand.
    pub fn lift(&self, side: Side, s: StateId) -> StateId {
        match side {
            Side::Left => s,
            Side::Right => s + self.left_len,
        }
    }
}

/// Disjoint union. Fails when an action is external in one operand and
/// internal in the other.
pub fn disjoint_union(a1: &Cpa, a2: &Cpa) -> Result<DisjointUnion, ModelError> {
    for a in &a1.alphabet().external {
        if a2.is_internal(a) {
            return Err(ModelError::AlphabetClash(format!(
                "`{a}` is external in `{}` but internal in `{}`",
                a1.name, a2.name
            )));
        }
    }
    for a in &a1.alphabet().internal {
        if a2.alphabet().is_external(a) {
            return Err(ModelError::AlphabetClash(format!(
                "`{a}` is internal in `{}` but external in `{}`",
                a1.name, a2.name
            )));
        }
    }
    let (p1, p2) = if a1.name == a2.name {
        (format!("{}.1.", a1.name), format!("{}.2.", a2.name))
    } else {
        (format!("{}.", a1.name), format!("{}.", a2.name))
    };
    let left_len = a1.num_states();
    let states = a1
        .states()
        .iter()
        .map(|s| format!("{p1}{s}"))
        .chain(a2.states().iter().map(|s| format!("{p2}{s}")))
        .collect();
    let mut alphabet: Alphabet = a1.alphabet().clone();
    for a in &a2.alphabet().external {
        if !alphabet.is_external(a) {
            alphabet.external.push(a.clone());
        }
    }
    for a in &a2.alphabet().internal {
        if !alphabet.is_internal(a) {
            alphabet.internal.push(a.clone());
        }
    }
    let transitions = a1
        .transitions()
        .iter()
        .cloned()
        .chain(a2.transitions().iter().map(|tr| Transition {
            source: tr.source + left_len,
            action: tr.action.clone(),
            target: tr.target.map_states(|s| s + left_len),
            cost: tr.cost.clone(),
        }))
        .collect();
    let cpa = Cpa::new(
        format!("{}+{}", a1.name, a2.name),
        states,
        a1.start(),
        alphabet,
        transitions,
    )?;
    Ok(DisjointUnion {
        cpa,
        left_len,
        starts: (a1.start(), a2.start() + left_len),
    })
}
