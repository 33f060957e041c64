//! Relation files: either `pair <s> <t>` lines or `class <s> <t> ...` lines,
//! never both. `#` starts a comment.

use std::fmt::Write;

use super::{BinaryRelation, Partition, RelationError};
use crate::model::{Cpa, StateId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationFile {
    Pairs(BinaryRelation),
    Classes(Partition),
}

impl RelationFile {
    pub fn into_relation(self) -> BinaryRelation {
        match self {
            RelationFile::Pairs(r) => r,
            RelationFile::Classes(p) => p.as_relation(),
        }
    }
}

/// Parses a relation over the states of `cpa`. For `class` files, states not
/// mentioned form singleton classes.
pub fn parse_relation(text: &str, cpa: &Cpa) -> Result<RelationFile, RelationError> {
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    let mut classes: Vec<Vec<StateId>> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let err = |message: String| RelationError::Parse { line: ln, message };
        let line = raw.split('#').next().unwrap_or("");
        let mut toks = line.split_whitespace();
        let Some(kw) = toks.next() else { continue };
        let ids: Vec<StateId> = toks
            .map(|t| cpa.state_id(t).ok_or_else(|| err(format!("unknown state `{t}`"))))
            .collect::<Result<_, _>>()?;
        match kw {
            "pair" => {
                if !classes.is_empty() {
                    return Err(err("`pair` and `class` lines cannot be mixed".into()));
                }
                if ids.len() != 2 {
                    return Err(err(format!("`pair` takes two states, found {}", ids.len())));
                }
                pairs.push((ids[0], ids[1]));
            }
            "class" | "class:" => {
                if !pairs.is_empty() {
                    return Err(err("`pair` and `class` lines cannot be mixed".into()));
                }
                if ids.is_empty() {
                    return Err(err("empty class".into()));
                }
                classes.push(ids);
            }
            other => return Err(err(format!("unknown keyword `{other}`"))),
        }
    }
    let all = 0..cpa.num_states();
    if !classes.is_empty() {
        let mentioned: std::collections::BTreeSet<StateId> = classes.iter().flatten().copied().collect();
        classes.extend(all.filter(|s| !mentioned.contains(s)).map(|s| vec![s]));
        let p = Partition::from_classes(classes).map_err(|e| RelationError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        return Ok(RelationFile::Classes(p));
    }
    Ok(RelationFile::Pairs(BinaryRelation::from_pairs(all.clone(), all, pairs)?))
}

pub fn format_partition(p: &Partition, names: &[String]) -> String {
    let mut out = String::new();
    for c in p.classes() {
        let members: Vec<&str> = c.iter().map(|s| names[*s].as_str()).collect();
        let _ = writeln!(out, "class {}", members.join(" "));
    }
    out
}

pub fn format_relation(r: &BinaryRelation, names: &[String]) -> String {
    let mut out = String::new();
    for (x, y) in r.pairs() {
        let _ = writeln!(out, "pair {} {}", names[*x], names[*y]);
    }
    out
}
