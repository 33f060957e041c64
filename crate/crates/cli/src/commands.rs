use std::fs;
use std::path::{Path, PathBuf};

use cpa_core::bisim::{decide, quotient_with, verify_witness, BisimError, CostMode, RelationKind, Stats, Verdict};
use cpa_core::compose::{compose_cpa, ComposeError, GeneratorFunction};
use cpa_core::flownet::{build_mincost_lp, build_network, dump_lp, solve, WeakLabel};
use cpa_core::model::{disjoint_union, parse_model, parse_rational, serialize_model, Cpa, Distribution, ModelError, TAU};
use cpa_core::relations::{format_partition, format_relation, parse_relation, BinaryRelation, RelationFile};
use cpa_core::sched::{extract_scheduler, format_scheduler};
use serde_json::{json, Value};

use crate::report::Report;
use crate::{CheckArgs, ComposeArgs, Failure, MincostArgs, QuotientArgs, VerifyArgs};

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path, report: &mut Report) -> Result<Cpa, Failure> {
    let parsed = parse_model(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    for w in parsed.warnings {
        let w = format!("{}: {w}", path.display());
        eprintln!("warning: {w}");
        report.warnings.push(w);
    }
    Ok(parsed.cpa)
}

fn bisim_failure(e: BisimError) -> Failure {
    match e {
        BisimError::Model(e @ ModelError::AlphabetClash(_)) => Failure::Input(e.to_string()),
        other => Failure::Internal(other.to_string()),
    }
}

fn union_of(a: &Cpa, b: &Cpa) -> Result<Cpa, Failure> {
    disjoint_union(a, b)
        .map(|u| u.cpa)
        .map_err(|e| bisim_failure(e.into()))
}

fn print_verdict(v: &Verdict) {
    let cpa = &v.union.cpa;
    let status = if v.holds { "holds" } else { "does not hold" };
    println!("{}/{}: {status} ({} LPs)", v.kind, v.mode, v.lp_solved);
    for d in &v.diagnostics {
        println!(
            "  {} not matched by {}: {}",
            v.describe_transition(d.transition),
            cpa.state_name(d.defender),
            d.reason
        );
    }
    if !v.removed_pairs.is_empty() {
        println!("  {} cost-relation pairs removed", v.removed_pairs.len());
    }
}

fn cost_path(witness: &Path) -> PathBuf {
    let mut p = witness.as_os_str().to_owned();
    p.push(".cost");
    PathBuf::from(p)
}

pub fn check(args: &CheckArgs) -> Result<u8, Failure> {
    let mut report = Report::new("check");
    let a = load(&args.a, &mut report)?;
    let b = load(&args.b, &mut report)?;
    let v = decide(args.kind, args.mode, &a, &b).map_err(bisim_failure)?;
    report.lp_solved = v.lp_solved;
    if let Some(path) = &args.witness {
        match v.witness() {
            Some((w, rc)) => {
                let names = v.union.cpa.states();
                write(path, &format_partition(w, names))?;
                if let Some(rc) = rc {
                    write(&cost_path(path), &format_relation(rc, names))?;
                }
            }
            None => eprintln!("note: no witness written, the relation does not hold"),
        }
    }
    if args.json {
        report.print(v.to_json());
    } else {
        print_verdict(&v);
    }
    Ok(if v.holds { 0 } else { 1 })
}

pub fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let mut report = Report::new("verify");
    let a = load(&args.a, &mut report)?;
    let b = load(&args.b, &mut report)?;
    let union = disjoint_union(&a, &b).map_err(|e| bisim_failure(e.into()))?;
    let partition = match parse_relation(&read(&args.witness)?, &union.cpa) {
        Ok(RelationFile::Classes(p)) => p,
        Ok(RelationFile::Pairs(_)) => return Err(Failure::Input("the witness must consist of `class` lines".into())),
        Err(e) => return Err(Failure::Input(format!("{}: {e}", args.witness.display()))),
    };
    let mut rejection = None;
    let cost_relation = if args.mode == CostMode::Minor {
        let path = args.cost_relation.clone().unwrap_or_else(|| cost_path(&args.witness));
        let pairs = match parse_relation(&read(&path)?, &union.cpa) {
            Ok(RelationFile::Pairs(r)) => r,
            Ok(RelationFile::Classes(_)) => {
                return Err(Failure::Input("the cost relation must consist of `pair` lines".into()))
            }
            Err(e) => return Err(Failure::Input(format!("{}: {e}", path.display()))),
        };
        let restricted =
            BinaryRelation::from_pairs(union.right_states(), union.left_states(), pairs.pairs().cloned());
        match restricted {
            Ok(r) => Some(r),
            Err(_) => {
                rejection = Some("cost relation pairs must lead from the second automaton to the first");
                None
            }
        }
    } else {
        None
    };
    let valid = rejection.is_none() && {
        let claimed =
            Verdict::claimed(args.kind, args.mode, &a, &b, partition, cost_relation).map_err(bisim_failure)?;
        verify_witness(&claimed, &a, &b)
    };
    if args.json {
        report.print(json!({
            "relation": args.kind.to_string(),
            "cost_mode": args.mode.to_string(),
            "valid": valid,
            "reason": rejection,
        }));
    } else if valid {
        println!("witness valid");
    } else {
        println!("witness rejected{}", rejection.map(|r| format!(": {r}")).unwrap_or_default());
    }
    Ok(if valid { 0 } else { 1 })
}

pub fn compose(args: &ComposeArgs) -> Result<u8, Failure> {
    let mut report = Report::new("compose");
    let generator: GeneratorFunction = args.generator.parse().map_err(|e: ComposeError| Failure::Input(e.to_string()))?;
    let a = load(&args.a, &mut report)?;
    let b = load(&args.b, &mut report)?;
    let ab = match compose_cpa(&a, &b, &generator) {
        Ok(ab) => ab,
        Err(e @ ComposeError::Incompatible(_)) => {
            eprintln!("{e}");
            if args.json {
                report.print(json!({ "composed": false, "reason": e.to_string() }));
            }
            return Ok(1);
        }
        Err(e) => return Err(Failure::Internal(e.to_string())),
    };
    let text = serialize_model(&ab);
    match &args.output {
        Some(path) => write(path, &text)?,
        None if !args.json => print!("{text}"),
        None => {}
    }
    if args.json {
        report.print(json!({
            "composed": true,
            "name": ab.name,
            "states": ab.num_states(),
            "transitions": ab.transitions().len(),
            "generator": generator.to_string(),
            "model": args.output.is_none().then_some(text),
        }));
    }
    Ok(0)
}

/// Splits `s:p,t:q` at commas outside parentheses, so composed state names
/// like `(s,u)` stay whole.
fn parse_target(text: &str, cpa: &Cpa) -> Result<Distribution, Failure> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&text[start..]);
    let mut pairs = Vec::new();
    for item in items {
        let item = item.trim();
        let (name, p) = item
            .rsplit_once(':')
            .ok_or_else(|| Failure::Input(format!("target entry `{item}` is not of the form state:probability")))?;
        let s = cpa
            .state_id(name.trim())
            .ok_or_else(|| Failure::Input(format!("unknown state `{}`", name.trim())))?;
        let p = parse_rational(p.trim()).map_err(|e| Failure::Input(format!("bad probability `{p}`: {e}")))?;
        pairs.push((s, p));
    }
    let d = Distribution::from_pairs(pairs).map_err(|e| Failure::Input(e.to_string()))?;
    if !d.is_full() {
        return Err(Failure::Input(format!("target has mass {}, expected 1", d.mass())));
    }
    Ok(d)
}

fn weak_label(cpa: &Cpa, action: &str) -> Result<WeakLabel, Failure> {
    if action == TAU || cpa.alphabet().is_internal(action) {
        Ok(WeakLabel::Tau)
    } else if cpa.alphabet().is_external(action) {
        Ok(WeakLabel::Action(action.to_string()))
    } else {
        Err(Failure::Input(format!("unknown action `{action}`")))
    }
}

pub fn mincost(args: &MincostArgs) -> Result<u8, Failure> {
    let mut report = Report::new("mincost");
    let cpa = load(&args.model, &mut report)?;
    let from = cpa
        .state_id(&args.from)
        .ok_or_else(|| Failure::Input(format!("unknown state `{}`", args.from)))?;
    let label = weak_label(&cpa, &args.action)?;
    let target = parse_target(&args.target, &cpa)?;
    let relation = match &args.rel {
        Some(path) => parse_relation(&read(path)?, &cpa)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
            .into_relation(),
        None => BinaryRelation::identity(0..cpa.num_states()),
    };
    let net = build_network(&cpa, from, &label, &target, &relation).map_err(|e| Failure::Internal(e.to_string()))?;
    let lp = build_mincost_lp(&net);
    if let Some(path) = &args.dump_lp {
        write(path, &dump_lp(&lp, &cpa))?;
    }
    let sol = solve(&lp).map_err(|e| Failure::Internal(e.to_string()))?;
    report.lp_solved = 1;
    let value = sol.value.clone().filter(|_| sol.is_feasible());
    if let (Some(path), Some(_)) = (&args.scheduler, &value) {
        let sched = extract_scheduler(&net, &sol).map_err(|e| Failure::Internal(e.to_string()))?;
        write(path, &format_scheduler(&sched, &cpa))?;
    }
    if args.json {
        let reached: Option<Value> = value.as_ref().map(|_| {
            let d = net.reached_distribution(&sol.assignment);
            d.iter().map(|(s, p)| (cpa.state_name(*s).to_string(), Value::String(p.to_string()))).collect()
        });
        report.print(json!({
            "from": args.from,
            "action": label.to_string(),
            "feasible": value.is_some(),
            "cost": value.as_ref().map(ToString::to_string),
            "reached": reached,
        }));
    } else {
        match &value {
            Some(v) => println!("{v}"),
            None => println!("infeasible"),
        }
    }
    Ok(if value.is_some() { 0 } else { 1 })
}

pub fn quotient(args: &QuotientArgs) -> Result<u8, Failure> {
    let mut report = Report::new("quotient");
    let a = load(&args.a, &mut report)?;
    let cpa = match &args.b {
        Some(path) => union_of(&a, &load(path, &mut report)?)?,
        None => a,
    };
    let stats = Stats::default();
    let (w, _) = quotient_with(&cpa, RelationKind::WeakProb, CostMode::Plain, &stats).map_err(bisim_failure)?;
    report.lp_solved = stats.lps();
    if args.json {
        let classes: Vec<Vec<&str>> = w.classes().iter().map(|c| c.iter().map(|s| cpa.state_name(*s)).collect()).collect();
        report.print(json!({ "classes": classes }));
    } else {
        print!("{}", format_partition(&w, cpa.states()));
    }
    Ok(0)
}
