//! Human-readable output. Terms, ruloids and states print in DSL syntax so
//! they can be pasted back into specification files.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use opensos::bisim::{Certificate, InconclusiveReason, Witness};
use opensos::equations::{Classification, PreservationReport};
use opensos::gsos::FertilityResult;
use opensos::{Label, Verdict};

pub fn labels(ls: &BTreeSet<Label>) -> String {
    let shown: Vec<&str> = ls.iter().map(Label::as_str).collect();
    format!("{{{}}}", shown.join(", "))
}

pub fn verdict(v: &Verdict) -> String {
    let mut out = String::new();
    match v {
        Verdict::Holds { certificate } => match certificate {
            Certificate::Partition { classes } => {
                writeln!(out, "bisimulation classes:").unwrap();
                for c in classes {
                    let shown: Vec<String> = c.iter().map(ToString::to_string).collect();
                    writeln!(out, "  {{{}}}", shown.join(", ")).unwrap();
                }
            }
            Certificate::Relation { notion, states } => {
                writeln!(out, "{notion}-bisimulation ({} state(s), identity and symmetry implicit):", states.len())
                    .unwrap();
                for s in states {
                    writeln!(out, "  {s}").unwrap();
                }
            }
            Certificate::Vacuous { reason } => writeln!(out, "vacuous: {reason}").unwrap(),
        },
        Verdict::Fails { witness } => witness_text(witness, 0, &mut out),
        Verdict::Inconclusive { bound, reason } => {
            let why = match reason {
                InconclusiveReason::NoCounterexampleUpTo { substitutions, undecided, .. } => {
                    format!("no counterexample among {substitutions} closing substitution(s) ({undecided} undecided)")
                }
                InconclusiveReason::CapReached { explored, cap } => format!("explored {explored} state(s), cap {cap}"),
                InconclusiveReason::DepthReached { depth } => format!("no distinguishing formula up to depth {depth}"),
            };
            writeln!(out, "{why}; bound: {bound}").unwrap();
        }
    }
    out
}

fn witness_text(w: &Witness, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match w {
        Witness::Distinguishing { left, right, formula, .. } => {
            writeln!(out, "{pad}{left} satisfies {formula}, {right} does not").unwrap();
        }
        Witness::ClosingSubstitution { substitution, left, right, inner } => {
            writeln!(out, "{pad}closing substitution {substitution}: {left} vs {right}").unwrap();
            witness_text(inner, indent + 2, out);
        }
        Witness::Unmatched(u) => {
            writeln!(out, "{pad}in state {}", u.pair).unwrap();
            writeln!(out, "{pad}unmatched ruloid: {}", u.ruloid).unwrap();
            for c in &u.candidates {
                writeln!(out, "{pad}  candidate {} -> {}: {}", c.ruloid, c.successor, c.reason).unwrap();
            }
            writeln!(out, "{pad}{}", u.explanation).unwrap();
        }
        Witness::ImproperPair { left, right } => {
            writeln!(out, "{pad}improper pair ({left}, {right})").unwrap();
        }
    }
}

pub fn fertility(r: &FertilityResult) -> String {
    let mut out = String::new();
    let ws = match r {
        FertilityResult::Fertile { witnesses } => {
            writeln!(out, "initially fertile").unwrap();
            witnesses
        }
        FertilityResult::UnknownAtBound { missing, witnesses, bound } => {
            let shown: Vec<String> = missing.iter().map(labels).collect();
            writeln!(out, "unrealized at size <= {bound}: {}", shown.join(", ")).unwrap();
            witnesses
        }
    };
    for w in ws {
        writeln!(out, "  {} by {}", labels(&w.actions), w.process).unwrap();
    }
    out
}

pub fn advice(r: &PreservationReport) -> String {
    let mut out = String::new();
    writeln!(out, "{} over {} ({}), adds labels: {}", r.extension, r.base, r.notion, r.adds_labels).unwrap();
    for a in &r.axioms {
        let class = match &a.classification {
            Classification::GuaranteedPreserved { theorem } => {
                format!("guaranteed preserved ({})", serde_json::to_value(theorem).unwrap().as_str().unwrap_or(""))
            }
            Classification::EmpiricallyPreservedAtBound => "empirically preserved at bound".to_string(),
            Classification::Broken { .. } => "broken".to_string(),
            Classification::UnsoundOnBase { .. } => "unsound on the base".to_string(),
        };
        writeln!(out, "{}: {class}", a.axiom).unwrap();
        writeln!(out, "  base: {}, extension: {}", a.base_evidence.summary(), a.extension_evidence.summary()).unwrap();
        for t in a.theorems.iter().filter(|t| t.relevant) {
            let failed: Vec<&str> = t.conjuncts.iter().filter(|c| !c.satisfied).map(|c| c.name).collect();
            let theorem = serde_json::to_value(t.theorem).unwrap();
            if failed.is_empty() {
                writeln!(out, "  {}: applies", theorem.as_str().unwrap_or("")).unwrap();
            } else {
                writeln!(out, "  {}: fails on {}", theorem.as_str().unwrap_or(""), failed.join(", ")).unwrap();
            }
        }
        if let Classification::Broken { witness } | Classification::UnsoundOnBase { witness } = &a.classification {
            witness_text(witness, 2, &mut out);
        }
        if a.contradiction {
            writeln!(out, "  CONTRADICTION: a guaranteed preservation failed on the extension").unwrap();
        }
    }
    writeln!(out, "note: {}", r.caveat).unwrap();
    out
}
