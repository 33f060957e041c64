//! Line-oriented model file format.
//!
//! ```text
//! automaton wcc
//! states: s h0 h1
//! start: s
//! external: send recv
//! internal: hop
//! trans: s send 1 -> h0:1
//! trans: h0 hop 4 -> h1:1/2 h0:1/2
//! trans: h1 recv _ -> s:1
//! ```
//!
//! `_` stands for cost zero and `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use num_traits::Zero;

use super::{
    check_action_id, check_state_id, Alphabet, Cpa, Distribution, ModelError, Rational,
    Transition, TAU,
};

#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub cpa: Cpa,
    /// Human-readable notes, currently one per pruned unreachable state.
    pub warnings: Vec<String>,
}

/// Parses `a/b` or an integer.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let bad = || format!("`{text}` is not a rational (expected a/b or an integer)");
    if text.is_empty() || text.starts_with('+') || text.contains("/+") || text.contains("/-") {
        return Err(bad());
    }
    text.parse::<Rational>().map_err(|_| bad())
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    column: offset + line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: offset + line[..s].chars().count() + 1,
        });
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn invalid(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Validation {
        line: Some(line),
        message: message.into(),
    }
}

struct TransLine<'a> {
    line: usize,
    source: Token<'a>,
    action: Token<'a>,
    cost: Token<'a>,
    targets: Vec<Token<'a>>,
}

pub fn parse_model(text: &str) -> Result<ParsedModel, ModelError> {
    let mut name: Option<String> = None;
    let mut states: Vec<String> = Vec::new();
    let mut state_lines: BTreeMap<String, usize> = BTreeMap::new();
    let mut start: Option<(Token, usize)> = None;
    let mut external: Vec<String> = Vec::new();
    let mut internal: Vec<String> = Vec::new();
    let mut actions_seen: BTreeSet<String> = BTreeSet::new();
    let mut trans: Vec<TransLine> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let first = tokens(line, 0);
        if first[0].text == "automaton" {
            if name.is_some() {
                return Err(parse_err(ln, first[0].column, "second `automaton` line"));
            }
            match first.as_slice() {
                [_, n] => {
                    check_state_id(n.text).map_err(|m| parse_err(ln, n.column, m))?;
                    name = Some(n.text.to_string());
                }
                [kw] => return Err(parse_err(ln, kw.column + kw.text.len(), "missing automaton name")),
                [_, _, extra, ..] => return Err(parse_err(ln, extra.column, "unexpected token")),
                [] => unreachable!(),
            }
            continue;
        }
        let Some(colon) = line.find(':') else {
            return Err(parse_err(ln, first[0].column, format!("unknown line `{}`", line.trim())));
        };
        let keyword = line[..colon].trim();
        let rest_offset = line[..=colon].chars().count();
        let rest = tokens(&line[colon + 1..], rest_offset);
        match keyword {
            "states" => {
                for t in rest {
                    check_state_id(t.text).map_err(|m| parse_err(ln, t.column, m))?;
                    if state_lines.insert(t.text.to_string(), ln).is_some() {
                        return Err(invalid(ln, format!("duplicate state `{}`", t.text)));
                    }
                    states.push(t.text.to_string());
                }
            }
            "start" => {
                if start.is_some() {
                    return Err(parse_err(ln, first[0].column, "second `start` line"));
                }
                match rest.len() {
                    1 => start = Some((rest.into_iter().next().unwrap(), ln)),
                    0 => return Err(parse_err(ln, rest_offset + 1, "missing start state")),
                    _ => return Err(parse_err(ln, rest[1].column, "unexpected token")),
                }
            }
            "external" | "internal" => {
                for t in rest {
                    check_action_id(t.text).map_err(|m| parse_err(ln, t.column, m))?;
                    if !actions_seen.insert(t.text.to_string()) {
                        return Err(invalid(ln, format!("action `{}` declared twice", t.text)));
                    }
                    if keyword == "external" {
                        external.push(t.text.to_string());
                    } else {
                        internal.push(t.text.to_string());
                    }
                }
            }
            "trans" => {
                let mut it = rest.into_iter();
                let mut next = |what: &str| {
                    it.next()
                        .ok_or_else(|| parse_err(ln, raw.trim_end().chars().count() + 1, format!("missing {what}")))
                };
                let source = next("source state")?;
                let action = next("action")?;
                let cost = next("cost")?;
                let arrow = next("`->`")?;
                if arrow.text != "->" {
                    return Err(parse_err(ln, arrow.column, format!("expected `->`, found `{}`", arrow.text)));
                }
                let targets: Vec<Token> = it.collect();
                if targets.is_empty() {
                    return Err(parse_err(ln, arrow.column + 2, "missing target distribution"));
                }
                trans.push(TransLine {
                    line: ln,
                    source,
                    action,
                    cost,
                    targets,
                });
            }
            other => {
                return Err(parse_err(ln, first[0].column, format!("unknown keyword `{other}`")));
            }
        }
    }

    let name = name.ok_or_else(|| parse_err(1, 1, "missing `automaton` line"))?;
    let (start_tok, start_line) = start.ok_or_else(|| ModelError::validation("missing `start` line"))?;
    let lookup = |t: &Token, ln: usize| {
        states
            .iter()
            .position(|s| s == t.text)
            .ok_or_else(|| invalid(ln, format!("undeclared state `{}`", t.text)))
    };
    let start_id = lookup(&start_tok, start_line)?;
    let alphabet = Alphabet::new(external, internal);

    let mut transitions = Vec::new();
    for tl in &trans {
        let ln = tl.line;
        let source = lookup(&tl.source, ln)?;
        if tl.action.text == TAU {
            return Err(invalid(ln, "`tau` is reserved; declare a named internal action"));
        }
        if !alphabet.contains(tl.action.text) {
            return Err(invalid(ln, format!("undeclared action `{}`", tl.action.text)));
        }
        let cost = if tl.cost.text == "_" {
            Rational::zero()
        } else {
            parse_rational(tl.cost.text).map_err(|m| parse_err(ln, tl.cost.column, m))?
        };
        if cost < Rational::zero() {
            return Err(invalid(ln, format!("negative cost {cost}")));
        }
        let mut pairs = Vec::new();
        let mut seen = BTreeSet::new();
        for t in &tl.targets {
            let Some(sep) = t.text.rfind(':') else {
                return Err(parse_err(ln, t.column, format!("expected <state>:<prob>, found `{}`", t.text)));
            };
            let (s, p) = (&t.text[..sep], &t.text[sep + 1..]);
            let sid = states
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| invalid(ln, format!("undeclared state `{s}`")))?;
            if !seen.insert(sid) {
                return Err(invalid(ln, format!("state `{s}` repeated in target")));
            }
            let p = parse_rational(p).map_err(|m| parse_err(ln, t.column + sep + 1, m))?;
            if p <= Rational::zero() {
                return Err(invalid(ln, format!("probability of `{s}` must be positive")));
            }
            pairs.push((sid, p));
        }
        let total: Rational = pairs.iter().map(|(_, p)| p.clone()).sum();
        if total != Rational::from_integer(1.into()) {
            return Err(invalid(ln, format!("target mass is {total}, expected 1")));
        }
        let target = Distribution::from_pairs(pairs).map_err(|e| invalid(ln, e.to_string()))?;
        transitions.push(Transition {
            source,
            action: tl.action.text.to_string(),
            target,
            cost,
        });
    }

    let cpa = Cpa::new(name, states, start_id, alphabet, transitions)?;
    let (cpa, removed) = cpa.prune_unreachable();
    let warnings = removed
        .into_iter()
        .map(|s| format!("state `{s}` is unreachable and was removed"))
        .collect();
    Ok(ParsedModel { cpa, warnings })
}

pub fn serialize_model(cpa: &Cpa) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "automaton {}", cpa.name);
    let _ = writeln!(out, "states: {}", cpa.states().join(" "));
    let _ = writeln!(out, "start: {}", cpa.state_name(cpa.start()));
    let _ = writeln!(out, "external: {}", cpa.alphabet().external.join(" "));
    let _ = writeln!(out, "internal: {}", cpa.alphabet().internal.join(" "));
    for tr in cpa.transitions() {
        let targets: Vec<String> = tr
            .target
            .iter()
            .map(|(s, p)| format!("{}:{}", cpa.state_name(*s), p))
            .collect();
        let _ = writeln!(
            out,
            "trans: {} {} {} -> {}",
            cpa.state_name(tr.source),
            tr.action,
            tr.cost,
            targets.join(" ")
        );
    }
    out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
}
