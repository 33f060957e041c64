//! Witness construction from files and machine-readable verdicts.

use serde_json::{json, Value};

use super::{BisimError, CostMode, RelationKind, Verdict};
use crate::model::{disjoint_union, Cpa};
use crate::relations::{BinaryRelation, Partition};

impl Verdict {
    /// A claimed witness, to be checked with `verify_witness`. State ids
    /// refer to `disjoint_union(a1, a2)`.
    pub fn claimed(
        kind: RelationKind,
        mode: CostMode,
        a1: &Cpa,
        a2: &Cpa,
        partition: Partition,
        cost_relation: Option<BinaryRelation>,
    ) -> Result<Verdict, BisimError> {
        Ok(Verdict {
            kind,
            mode,
            holds: true,
            union: disjoint_union(a1, a2)?,
            partition,
            cost_relation,
            diagnostics: Vec::new(),
            removed_pairs: Vec::new(),
            steps: Vec::new(),
            lp_solved: 0,
        })
    }

    /// `{relation, cost_mode, holds, lp_solved, removed_pairs, witness,
    /// diagnostics}` with states by name and rationals as strings.
    pub fn to_json(&self) -> Value {
        let cpa = &self.union.cpa;
        let name = |s: &usize| cpa.state_name(*s).to_string();
        let pairs = |r: &BinaryRelation| -> Vec<[String; 2]> { r.pairs().map(|(x, y)| [name(x), name(y)]).collect() };
        let witness = self.witness().map(|(w, rc)| {
            json!({
                "classes": w.classes().iter().map(|c| c.iter().map(name).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "cost_relation": rc.map(pairs),
            })
        });
        json!({
            "relation": self.kind.to_string(),
            "cost_mode": self.mode.to_string(),
            "holds": self.holds,
            "lp_solved": self.lp_solved,
            "removed_pairs": self.removed_pairs.iter().map(|(x, y)| [name(x), name(y)]).collect::<Vec<_>>(),
            "witness": witness,
            "diagnostics": self.diagnostics.iter().map(|d| json!({
                "challenger": self.describe_transition(d.transition),
                "defender": name(&d.defender),
                "reason": d.reason,
            })).collect::<Vec<_>>(),
        })
    }
}
