use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use opensos::equations::{
    preservation_advisor, prove, soundness_sweep, Classification, ProofResult,
};
use opensos::gsos::{
    adds_labels, initial_fertility, label_usage, label_usage_all, non_evolving_indices, robust_equation_criteria,
    robust_extension_criteria, validate_positive_gsos, FertilityResult,
};
use opensos::{check, parse_term, Bounds, Equation, SpecDocument, Semantics, Term, Tss, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::render;
use crate::{Cli, Command, GlobalOpts, InputError, Outcome, Report, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK};

type Result<T> = std::result::Result<T, InputError>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn default_specs() -> Vec<PathBuf> {
    let mut found: Vec<PathBuf> = std::fs::read_dir("corpus")
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "sos"))
        .collect();
    found.sort();
    found
}

/// Parses `files` (or the default corpus specs when empty) into one document.
fn load(files: &[PathBuf]) -> Result<SpecDocument> {
    let files = if files.is_empty() { default_specs() } else { files.to_vec() };
    if files.is_empty() {
        return Err(InputError("no specification given (use --spec FILE)".into()));
    }
    let mut doc = SpecDocument::default();
    for f in &files {
        let text = read(f)?;
        doc.parse_more(&text).map_err(|e| InputError(format!("{}:{e}", f.display())))?;
    }
    Ok(doc)
}

fn tss(doc: &SpecDocument, name: &str) -> Result<Arc<Tss>> {
    doc.tss(name).cloned().ok_or_else(|| {
        let known: Vec<&str> = doc.tss_names().collect();
        InputError(format!("unknown TSS `{name}` (declared: {})", known.join(", ")))
    })
}

fn semantics(t: &Arc<Tss>) -> Result<Semantics> {
    Semantics::new(t.clone()).map_err(|e| {
        let lines: Vec<String> = e.0.violations.iter().map(|v| format!("{}: {}", v.rule, v.explanation)).collect();
        InputError(format!("`{}` is not positive GSOS: {}", t.name(), lines.join("; ")))
    })
}

fn term(text: &str, t: &Tss) -> Result<Term> {
    parse_term(text, t.signature()).map_err(|e| InputError(format!("term `{text}`: {e}")))
}

fn closed_term(text: &str, t: &Tss) -> Result<Term> {
    let p = term(text, t)?;
    if !p.is_closed() {
        return Err(InputError(format!("`{p}` is not closed")));
    }
    Ok(p)
}

/// Equations from `--eqs`, or else those of the document pinned to `t` or unpinned.
fn equations(doc: &mut SpecDocument, eqs: Option<&Path>, t: &Tss) -> Result<Vec<Equation>> {
    let selected: Vec<Equation> = match eqs {
        Some(path) => {
            let before = doc.equations.len();
            doc.parse_more(&read(path)?).map_err(|e| InputError(format!("{}:{e}", path.display())))?;
            doc.equations[before..].iter().map(|d| d.equation.clone()).collect()
        }
        None => doc
            .equations
            .iter()
            .filter(|d| d.tss.as_deref().is_none_or(|n| n == t.name()))
            .map(|d| d.equation.clone())
            .collect(),
    };
    for e in &selected {
        for side in [&e.lhs, &e.rhs] {
            t.signature().check(side).map_err(|err| InputError(format!("equation {}: {err}", e.label())))?;
        }
    }
    Ok(selected)
}

fn outcome(analysis: &str, tss: &str, verdict: &str, details: Vec<Value>, text: String, code: i32) -> Outcome {
    Outcome {
        report: Report { analysis: analysis.into(), tss: tss.into(), verdict: verdict.into(), details },
        text,
        code,
    }
}

fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Holds { .. } => EXIT_OK,
        Verdict::Fails { .. } => EXIT_FAILS,
        Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

pub(crate) fn dispatch(cli: &Cli, bounds: &Bounds) -> Result<Outcome> {
    let g: &GlobalOpts = &cli.global;
    match &cli.command {
        Command::ParseCheck { files } => parse_check(files, &g.specs),
        Command::GsosCheck { files, tss: name } => {
            let all: Vec<PathBuf> = files.iter().chain(&g.specs).cloned().collect();
            let doc = load(&all)?;
            let names: Vec<String> = match name {
                Some(n) => vec![tss(&doc, n)?.name().to_string()],
                None => doc.tss_names().map(str::to_string).collect(),
            };
            let mut details = Vec::new();
            let mut text = String::new();
            let mut bad = 0;
            for n in &names {
                let report = validate_positive_gsos(&*tss(&doc, n)?);
                if report.is_ok() {
                    writeln!(text, "{n}: positive GSOS").unwrap();
                } else {
                    bad += 1;
                    writeln!(text, "{n}: {} violation(s)", report.violations.len()).unwrap();
                    for v in &report.violations {
                        writeln!(text, "  rule {}: {} ({})", v.rule, v.kind, v.explanation).unwrap();
                    }
                }
                details.push(json!({ "tss": n, "ok": report.is_ok(), "violations": to_value(&report.violations) }));
            }
            let verdict = if bad == 0 { "ok" } else { "violations" };
            Ok(outcome("gsos-check", &names.join(","), verdict, details, text, if bad == 0 { EXIT_OK } else { EXIT_FAILS }))
        }
        Command::ExtensionCheck { tss: base, ext, eqs, require_robust } => {
            let mut doc = load(&g.specs)?;
            let (t0, t1) = (tss(&doc, base)?, tss(&doc, ext)?);
            let eqs = equations(&mut doc, eqs.as_deref(), &t0)?;
            let c = robust_extension_criteria(&t0, &t1, &eqs)?;
            let new_labels = adds_labels(&t0, &t1);
            let mut text = String::new();
            let disjoint = c.disjoint.is_disjoint();
            writeln!(text, "{ext} over {base}: {}", if disjoint { "disjoint extension" } else { "NOT a disjoint extension" })
                .unwrap();
            if let opensos::gsos::Disjointness::NotDisjoint { offending } = &c.disjoint {
                for o in offending {
                    writeln!(text, "  rule {} ({})", o.rule, o.reason).unwrap();
                }
            }
            writeln!(text, "adds labels: {new_labels}").unwrap();
            writeln!(text, "base premise labels: {}", render::labels(&c.base_premise_labels)).unwrap();
            writeln!(text, "extension conclusion labels: {}", render::labels(&c.extension_conclusion_labels)).unwrap();
            writeln!(text, "overlap: {}", render::labels(&c.overlap)).unwrap();
            if !c.improper_equations.is_empty() {
                writeln!(text, "improper equations: {}", c.improper_equations.join(", ")).unwrap();
            }
            writeln!(text, "robust extension: {}", if c.robust { "yes" } else { "no" }).unwrap();
            let verdict = match (disjoint, c.robust) {
                (false, _) => "not-disjoint",
                (true, true) => "robust",
                (true, false) => "not-robust",
            };
            let code = if !disjoint || (*require_robust && !c.robust) { EXIT_FAILS } else { EXIT_OK };
            let details = vec![json!({
                "extension": ext,
                "adds_labels": new_labels,
                "base_usage": to_value(&label_usage_all(&t0)),
                "extension_usage": to_value(&label_usage(&t1)),
                "criteria": to_value(&c),
            })];
            Ok(outcome("extension-check", base, verdict, details, text, code))
        }
        Command::Ruloids { term: text, tss: name } => {
            let doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let sem = semantics(&t)?;
            let u = term(text, &t)?;
            let rs = sem.ruloids(&u);
            let mut out = String::new();
            for r in &rs {
                writeln!(out, "{r}").unwrap();
            }
            let details = rs
                .iter()
                .map(|r| json!({ "hyps": to_value(&r.hypotheses), "label": to_value(&r.label), "target": to_value(&r.target) }))
                .collect();
            Ok(outcome("ruloids", name, "ok", details, out, EXIT_OK))
        }
        Command::Transitions { term: text, tss: name } => {
            let doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let sem = semantics(&t)?;
            let p = closed_term(text, &t)?;
            let mut out = String::new();
            let mut details = Vec::new();
            for (l, q) in sem.transitions(&p).iter() {
                writeln!(out, "{p} -{l}-> {q}").unwrap();
                details.push(json!({ "label": to_value(l), "target": to_value(q) }));
            }
            Ok(outcome("transitions", name, "ok", details, out, EXIT_OK))
        }
        Command::Explore { term: text, tss: name } => {
            let doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let sem = semantics(&t)?;
            let p = closed_term(text, &t)?;
            let lts = sem.explore(&p, bounds.state_cap);
            let mut out = format!("{} state(s), {} transition(s)", lts.states.len(), lts.edges.len());
            out.push_str(if lts.complete { "\n" } else { ", state cap reached\n" });
            for (a, l, b) in &lts.edges {
                writeln!(out, "{} -{l}-> {}", lts.states[*a], lts.states[*b]).unwrap();
            }
            let (verdict, code) = if lts.complete { ("complete", EXIT_OK) } else { ("cap-reached", EXIT_INCONCLUSIVE) };
            Ok(outcome("explore", name, verdict, vec![to_value(&lts)], out, code))
        }
        Command::Check { notion, lhs, rhs, tss: name } => {
            let doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let sem = semantics(&t)?;
            let (s, u) = (term(lhs, &t)?, term(rhs, &t)?);
            let v = check(*notion, &s, &u, &sem, bounds);
            let text = format!("{s} ~{notion} {u}: {}\n{}", v.summary(), render::verdict(&v));
            let details = vec![json!({ "notion": notion, "lhs": to_value(&s), "rhs": to_value(&u), "bounds": to_value(bounds), "result": to_value(&v) })];
            Ok(outcome("check", name, v.summary(), details, text, verdict_code(&v)))
        }
        Command::Fertility { tss: name, max_size } => {
            let doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let sem = semantics(&t)?;
            let r = initial_fertility(&sem, *max_size, g.override_label_guard)?;
            let text = render::fertility(&r);
            let (verdict, code) = match &r {
                FertilityResult::Fertile { .. } => ("fertile", EXIT_OK),
                FertilityResult::UnknownAtBound { .. } => ("unknown-at-bound", EXIT_INCONCLUSIVE),
            };
            Ok(outcome("fertility", name, verdict, vec![to_value(&r)], text, code))
        }
        Command::NonEvolving { tss: name, eqs, max_size } => {
            let mut doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let sem = semantics(&t)?;
            let table = non_evolving_indices(&sem);
            let mut text = String::new();
            for (op, ix) in &table.indices {
                let shown: Vec<String> = ix.iter().map(usize::to_string).collect();
                writeln!(text, "{op}: {{{}}}", shown.join(", ")).unwrap();
            }
            let mut details = vec![to_value(&table)];
            let eqs = equations(&mut doc, eqs.as_deref(), &t)?;
            let mut all_met = true;
            for e in &eqs {
                let c = robust_equation_criteria(e, &sem, *max_size, g.override_label_guard)?;
                all_met &= c.criteria_met;
                writeln!(text, "{}: {}", e.label(), if c.criteria_met { "criteria met" } else { "criteria not met" })
                    .unwrap();
                for m in &c.evolving_open_arguments {
                    writeln!(text, "  {m}").unwrap();
                }
                details.push(to_value(&c));
            }
            let verdict = if all_met { "ok" } else { "criteria-not-met" };
            Ok(outcome("non-evolving", name, verdict, details, text, if all_met { EXIT_OK } else { EXIT_FAILS }))
        }
        Command::Sweep { tss: name, notion, eqs } => {
            let mut doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let sem = semantics(&t)?;
            let eqs = equations(&mut doc, eqs.as_deref(), &t)?;
            let r = soundness_sweep(&eqs, &sem, *notion, bounds);
            let mut text = String::new();
            for a in &r.axioms {
                writeln!(text, "{}: {}", a.axiom, a.verdict.summary()).unwrap();
                for line in render::verdict(&a.verdict).lines() {
                    writeln!(text, "  {line}").unwrap();
                }
            }
            writeln!(text, "note: {}", r.caveat).unwrap();
            let (verdict, code) = if r.any_fails() {
                ("fails", EXIT_FAILS)
            } else if r.axioms.iter().all(|a| a.verdict.holds()) {
                ("holds", EXIT_OK)
            } else {
                ("inconclusive", EXIT_INCONCLUSIVE)
            };
            Ok(outcome("sweep", name, verdict, vec![to_value(&r)], text, code))
        }
        Command::Prove { lhs, rhs, tss: name, eqs, max_steps, inst_size } => {
            let mut doc = load(&g.specs)?;
            let t = tss(&doc, name)?;
            let axioms = equations(&mut doc, eqs.as_deref(), &t)?;
            let goal = Equation::new(term(lhs, &t)?, term(rhs, &t)?);
            let r = prove(&axioms, &goal, t.signature(), *max_steps, *inst_size);
            let mut text = String::new();
            let (verdict, code) = match &r {
                ProofResult::Proved { start, steps } => {
                    writeln!(text, "proved in {} step(s)", steps.len()).unwrap();
                    writeln!(text, "  {start}").unwrap();
                    for s in steps {
                        let dir = if s.reversed { "<-" } else { "->" };
                        writeln!(text, "= {}   [{} {dir} at {:?} with {}]", s.result, s.axiom, s.position, s.substitution)
                            .unwrap();
                    }
                    ("proved", EXIT_OK)
                }
                ProofResult::UnknownAtBound { depth, explored } => {
                    writeln!(text, "no derivation within {depth} step(s) ({explored} terms explored)").unwrap();
                    ("unknown-at-bound", EXIT_INCONCLUSIVE)
                }
            };
            Ok(outcome("prove", name, verdict, vec![to_value(&r)], text, code))
        }
        Command::Advise { tss: base, ext, notion, eqs } => {
            let mut doc = load(&g.specs)?;
            let (t0, t1) = (tss(&doc, base)?, tss(&doc, ext)?);
            let eqs = equations(&mut doc, eqs.as_deref(), &t0)?;
            let r = preservation_advisor(&eqs, &t0, &t1, *notion, bounds, g.override_label_guard)
                .map_err(|e| InputError(e.to_string()))?;
            let text = render::advice(&r);
            let failing = r.axioms.iter().any(|a| {
                a.contradiction
                    || matches!(a.classification, Classification::Broken { .. } | Classification::UnsoundOnBase { .. })
            });
            let verdict = if failing { "not-preserved" } else { "preserved" };
            Ok(outcome("advise", base, verdict, vec![to_value(&r)], text, if failing { EXIT_FAILS } else { EXIT_OK }))
        }
        Command::Corpus { dir } => crate::corpus::run_corpus(dir, g),
    }
}

fn parse_check(files: &[PathBuf], specs: &[PathBuf]) -> Result<Outcome> {
    let all: Vec<PathBuf> = files.iter().chain(specs).cloned().collect();
    let doc = load(&all)?;
    let mut text = String::new();
    let mut details = Vec::new();
    for d in &doc.tss_decls {
        let t = tss(&doc, &d.name)?;
        writeln!(
            text,
            "tss {}{}: {} label(s), {} operator(s), {} rule(s)",
            d.name,
            d.extends.as_ref().map(|b| format!(" extends {b}")).unwrap_or_default(),
            t.labels().len(),
            t.signature().len(),
            t.rules().len()
        )
        .unwrap();
        details.push(json!({
            "tss": d.name,
            "extends": d.extends,
            "labels": t.labels().len(),
            "operators": t.signature().len(),
            "rules": t.rules().len(),
        }));
    }
    writeln!(text, "{} equation(s)", doc.equations.len()).unwrap();
    let names: Vec<&str> = doc.tss_names().collect();
    Ok(outcome("parse-check", &names.join(","), "ok", details, text, EXIT_OK))
}
